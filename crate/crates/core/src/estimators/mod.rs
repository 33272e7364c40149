//! SNR time-series predictors: the running mean, EMA, AR(p), and
//! nearest-neighbor regression with its quantized index and compression.

mod ar;
mod compress;
mod ema;
mod index;
mod nnr;
mod predictor;
mod series;
mod stats;

pub use ar::{ArFit, ArModel, DEFAULT_FIT_WINDOW};
pub use compress::{compress, compress_in_place, CompressionPolicy};
pub use ema::{EmaState, DEFAULT_EMA_ALPHA};
pub use index::{prune_interval, KeyRange, QuantizedIndex, DEFAULT_SCALE, INITIAL_MIN};
pub use nnr::{
    combine_labels, idw_weights, nnr_predict, nnr_predict_indexed, nnr_search,
    nnr_search_indexed, window_distance, Neighbor, NnrConfig, NnrOutcome,
};
pub use predictor::NnrPredictor;
pub use series::{SnrSample, SnrSeries};
pub use stats::{mean_predict, RunningStats};
