use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Variance floor applied before dividing by the variance.
pub const V_FLOOR: f64 = 1e-6;

/// Sign with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Predicted SNR adjusted by the direction of its recent change:
/// `s + alpha * sgn(g) * s`.
pub fn gradient_adjusted_snr(s: f64, g: f64, alpha: f64) -> f64 {
    s + alpha * sgn(g) * s
}

/// DBCAR forwarder score `(m * E / max(v, V_FLOOR)) * delta_d * SNR(s, g)`.
pub fn forwarder_score(s: f64, g: f64, delta_d: f64, m: f64, v: f64, e: f64, alpha: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::Domain(format!("variance must be non-negative, got {v}")));
    }
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::Domain(format!("energy ratio must lie in [0, 1], got {e}")));
    }
    if !(delta_d > 0.0) {
        return Err(Error::Domain(format!("depth gain must be positive, got {delta_d}")));
    }
    Ok(m * e / v.max(V_FLOOR) * delta_d * gradient_adjusted_snr(s, g, alpha))
}

/// What a forwarding node knows about one handshake responder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbcarCandidate {
    pub id: usize,
    pub is_sink: bool,
    /// Sender depth minus candidate depth, meters.
    pub delta_d: f64,
    /// Predicted SNR, dB.
    pub s: f64,
    /// Latest SNR change, dB.
    pub g: f64,
    /// Historical mean SNR, dB.
    pub m: f64,
    /// Historical SNR variance, dB^2.
    pub v: f64,
    /// Residual over initial energy.
    pub e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarpCandidate {
    pub id: usize,
    pub is_sink: bool,
    pub delta_d: f64,
    /// EMA-predicted SNR, dB.
    pub ema_s: f64,
}

/// Sinks first (lowest id first), then the remaining candidates with a
/// positive depth gain by descending score, ties to the lowest id.
fn rank(mut scored: Vec<(usize, bool, f64)>) -> Vec<usize> {
    scored.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| if a.1 { Ordering::Equal } else { b.2.total_cmp(&a.2) })
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.into_iter().map(|(id, _, _)| id).collect()
}

/// DBCAR candidates in preference order.
pub fn rank_dbcar(candidates: &[DbcarCandidate], alpha: f64) -> Result<Vec<usize>> {
    let mut scored = Vec::with_capacity(candidates.len());
    for c in candidates {
        if c.is_sink {
            scored.push((c.id, true, 0.0));
        } else if c.delta_d > 0.0 {
            scored.push((c.id, false, forwarder_score(c.s, c.g, c.delta_d, c.m, c.v, c.e, alpha)?));
        }
    }
    Ok(rank(scored))
}

pub fn select_forwarder(candidates: &[DbcarCandidate], alpha: f64) -> Result<Option<usize>> {
    Ok(rank_dbcar(candidates, alpha)?.first().copied())
}

/// CARP-like candidates in preference order, scored by `ema_s * delta_d`.
pub fn rank_carp_like(candidates: &[CarpCandidate]) -> Vec<usize> {
    let scored = candidates
        .iter()
        .filter(|c| c.is_sink || c.delta_d > 0.0)
        .map(|c| (c.id, c.is_sink, c.ema_s * c.delta_d))
        .collect();
    rank(scored)
}

pub fn carp_like_select(candidates: &[CarpCandidate]) -> Option<usize> {
    rank_carp_like(candidates).first().copied()
}
