//! Nearest-neighbor regression over a single SNR time series.
//!
//! The training set is built by sliding a window of length `m` over the
//! history: the window starting at sample `j` is paired with the sample that
//! follows it. The query is the most recent `m` samples. The `k` training
//! windows closest to the query (squared Euclidean distance) vote on the next
//! value through inverse distance weighting, `w_i = d_i^q / sum_j d_j^q`.

use super::index::{prune_interval, BucketsDown, BucketsUp, KeyRange, QuantizedIndex};
use super::series::incremental_mean;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnrConfig {
    /// Sliding-window length `m`.
    pub window_m: usize,
    /// Neighbor count `k`.
    pub k: usize,
    /// Inverse-distance exponent `q`, a negative integer.
    pub idw_exponent_q: i32,
    /// Neighbors at or below this distance count as exact matches.
    pub zero_distance_epsilon: f64,
}

impl Default for NnrConfig {
    fn default() -> Self {
        NnrConfig {
            window_m: 3,
            k: 3,
            idw_exponent_q: -2,
            zero_distance_epsilon: 1e-12,
        }
    }
}

impl NnrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_m == 0 {
            return Err(Error::Config("NNR window length must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("NNR neighbor count must be at least 1".into()));
        }
        if self.idw_exponent_q > -1 {
            return Err(Error::Config(format!(
                "IDW exponent must be a negative integer, got {}",
                self.idw_exponent_q
            )));
        }
        if !(self.zero_distance_epsilon >= 0.0) {
            return Err(Error::Config("zero-distance epsilon must be non-negative".into()));
        }
        Ok(())
    }

    /// Shortest history that yields at least one training pair.
    pub fn min_history(&self) -> usize {
        self.window_m + 1
    }
}

/// Squared Euclidean distance between two windows (no square root).
pub fn window_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(squared_distance(a, b))
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A training window selected as one of the `k` nearest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Index of the window's first sample.
    pub start: usize,
    pub distance: f64,
    /// The sample that followed the window.
    pub label: f64,
}

impl Neighbor {
    /// Strict total order used for selection: smaller distance first, and on
    /// equal distance the more recent window.
    fn precedes(&self, other: &Neighbor) -> bool {
        self.distance < other.distance
            || (self.distance == other.distance && self.start > other.start)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnrOutcome {
    pub value: f64,
    /// Selected neighbors, nearest first.
    pub neighbors: Vec<Neighbor>,
    /// Number of window distances evaluated.
    pub comparisons: u64,
}

/// The `k` best neighbors seen so far, kept sorted nearest first.
struct KBest {
    k: usize,
    items: Vec<Neighbor>,
}

impl KBest {
    fn new(k: usize) -> Self {
        KBest {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn is_full(&self) -> bool {
        self.items.len() == self.k
    }

    /// Returns true when the candidate entered the set.
    fn offer(&mut self, candidate: Neighbor) -> bool {
        if self.is_full() && !candidate.precedes(self.items.last().expect("k >= 1")) {
            return false;
        }
        let at = self
            .items
            .iter()
            .position(|n| candidate.precedes(n))
            .unwrap_or(self.items.len());
        self.items.insert(at, candidate);
        self.items.truncate(self.k);
        true
    }

    /// Largest distance in the set once it holds `k` neighbors.
    fn bound(&self) -> Option<f64> {
        self.is_full().then(|| self.items[self.k - 1].distance)
    }
}

fn check_history(len: usize, cfg: &NnrConfig) -> Result<()> {
    cfg.validate()?;
    if len < cfg.min_history() {
        return Err(Error::Prediction(format!(
            "NNR with window {} needs at least {} samples, have {len}",
            cfg.window_m,
            cfg.min_history()
        )));
    }
    Ok(())
}

/// Inverse-distance-weighted combination of the neighbor labels.
///
/// If any neighbor is an exact match (distance at most epsilon) the result
/// is the plain mean of the exact matches' labels.
pub fn combine_labels(neighbors: &[Neighbor], cfg: &NnrConfig) -> f64 {
    let exact = incremental_mean(
        neighbors
            .iter()
            .filter(|n| n.distance <= cfg.zero_distance_epsilon)
            .map(|n| n.label),
    );
    if let Some(mean) = exact {
        return mean;
    }
    let mut weighted = 0.0;
    let mut total = 0.0;
    for n in neighbors {
        let w = n.distance.powi(cfg.idw_exponent_q);
        weighted += w * n.label;
        total += w;
    }
    weighted / total
}

/// Normalized IDW weights for the given neighbors.
pub fn idw_weights(neighbors: &[Neighbor], q: i32) -> Vec<f64> {
    let raw: Vec<f64> = neighbors.iter().map(|n| n.distance.powi(q)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Exhaustive nearest-neighbor regression over every training window.
pub fn nnr_search(values: &[f64], cfg: &NnrConfig) -> Result<NnrOutcome> {
    check_history(values.len(), cfg)?;
    let m = cfg.window_m;
    let n = values.len();
    let query = &values[n - m..];
    let mut best = KBest::new(cfg.k);
    for start in 0..n - m {
        let distance = squared_distance(&values[start..start + m], query);
        best.offer(Neighbor {
            start,
            distance,
            label: values[start + m],
        });
    }
    Ok(NnrOutcome {
        value: combine_labels(&best.items, cfg),
        neighbors: best.items,
        comparisons: (n - m) as u64,
    })
}

pub fn nnr_predict(values: &[f64], cfg: &NnrConfig) -> Result<f64> {
    nnr_search(values, cfg).map(|o| o.value)
}

/// Nearest-neighbor regression that only visits windows whose first sample
/// falls inside the current search interval around the query's first sample.
///
/// Buckets are visited outward from the query's key so the interval tightens
/// early. Until `k` neighbors are known the search is unbounded. Distances
/// always use full-precision values; keys only select candidates.
pub fn nnr_search_indexed(
    index: &QuantizedIndex,
    values: &[f64],
    cfg: &NnrConfig,
) -> Result<NnrOutcome> {
    check_history(values.len(), cfg)?;
    let n = values.len();
    let m = cfg.window_m;
    index.check_consistent(values)?;

    let query = &values[n - m..];
    let anchor = query[0];
    let anchor_key = index.key_of(anchor);
    let last_start = n - m - 1;

    let mut best = KBest::new(cfg.k);
    let mut range: Option<KeyRange> = None;
    let mut comparisons = 0u64;

    let mut down = index.buckets_at_or_below(anchor_key).peekable();
    let mut up = index.buckets_above(anchor_key).peekable();
    loop {
        let next_down = down.peek().map(|(key, _)| anchor_key - *key);
        let next_up = up.peek().map(|(key, _)| *key - anchor_key);
        let take_down = match (next_down, next_up) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(d), Some(u)) => d <= u,
        };
        let (key, bucket) = if take_down {
            down.next().expect("peeked")
        } else {
            up.next().expect("peeked")
        };
        if let Some(r) = range {
            if !r.contains(key) {
                // Keys only move away from the anchor in this direction.
                if take_down {
                    down = BucketsDown::default().peekable();
                } else {
                    up = BucketsUp::default().peekable();
                }
                continue;
            }
        }
        for &start in bucket {
            if start > last_start {
                break;
            }
            comparisons += 1;
            let distance = squared_distance(&values[start..start + m], query);
            let entered = best.offer(Neighbor {
                start,
                distance,
                label: values[start + m],
            });
            if entered {
                if let Some(bound) = best.bound() {
                    range = Some(prune_interval(anchor, bound, index.scale())?.widened());
                }
            }
        }
    }

    Ok(NnrOutcome {
        value: combine_labels(&best.items, cfg),
        neighbors: best.items,
        comparisons,
    })
}

pub fn nnr_predict_indexed(index: &QuantizedIndex, values: &[f64], cfg: &NnrConfig) -> Result<f64> {
    nnr_search_indexed(index, values, cfg).map(|o| o.value)
}
