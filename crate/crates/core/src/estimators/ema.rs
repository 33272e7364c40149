use crate::error::{Error, Result};

pub const DEFAULT_EMA_ALPHA: f64 = 0.2;

/// Exponentially weighted moving average `S_t = a*Y_t + (1-a)*S_{t-1}`,
/// with `S_1 = Y_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmaState {
    alpha: f64,
    s: f64,
    initialized: bool,
}

impl EmaState {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!(
                "EMA alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(EmaState {
            alpha,
            s: 0.0,
            initialized: false,
        })
    }

    /// A state that has already absorbed history and currently holds `s`.
    pub fn with_value(alpha: f64, s: f64) -> Result<Self> {
        let mut state = Self::new(alpha)?;
        state.update(s)?;
        Ok(state)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Folds `y` into the average and returns the new smoothed value, which is
    /// also the prediction for the next step.
    pub fn update(&mut self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::RejectedInput(format!("non-finite EMA input {y}")));
        }
        if !self.initialized || self.alpha == 1.0 {
            self.s = y;
            self.initialized = true;
        } else {
            self.s += self.alpha * (y - self.s);
        }
        Ok(self.s)
    }

    pub fn prediction(&self) -> Option<f64> {
        self.initialized.then_some(self.s)
    }
}

impl Default for EmaState {
    fn default() -> Self {
        EmaState {
            alpha: DEFAULT_EMA_ALPHA,
            s: 0.0,
            initialized: false,
        }
    }
}
