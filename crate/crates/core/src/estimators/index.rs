use std::collections::{btree_map, BTreeMap};
use std::ops::Bound;

use crate::error::{Error, Result};

/// Default quantization multiplier: SNR values keep three decimals.
pub const DEFAULT_SCALE: u32 = 1000;

/// Starting value for the running k-th minimum distance.
pub const INITIAL_MIN: f64 = 65535.0;

/// Hash index from quantized SNR value to the positions holding that value.
///
/// The key of a sample is `floor(snr_db * scale)`; each bucket lists sample
/// positions in ascending order. Buckets are kept in key order so a search
/// can walk outward from any key.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedIndex {
    scale: u32,
    buckets: BTreeMap<i64, Vec<usize>>,
    keys: Vec<i64>,
}

/// Closed interval of quantized keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyRange {
    pub lo: i64,
    pub hi: i64,
}

impl KeyRange {
    pub fn contains(&self, key: i64) -> bool {
        self.lo <= key && key <= self.hi
    }

    /// Adds one key on each side so quantization never drops a candidate.
    pub fn widened(self) -> KeyRange {
        KeyRange {
            lo: self.lo.saturating_sub(1),
            hi: self.hi.saturating_add(1),
        }
    }
}

fn quantize(snr_db: f64, scale: u32) -> i64 {
    (snr_db * f64::from(scale)).floor() as i64
}

/// Key interval `[floor(x - sqrt(min)), ceil(x + sqrt(min))]`, in units of
/// `1/scale` dB.
///
/// Any window whose first sample lies outside this interval (before
/// widening) is farther than `current_min` from the query.
pub fn prune_interval(query_first: f64, current_min: f64, scale: u32) -> Result<KeyRange> {
    if !(current_min >= 0.0) {
        return Err(Error::Domain(format!(
            "search bound must be non-negative, got {current_min}"
        )));
    }
    let radius = current_min.sqrt();
    let s = f64::from(scale);
    Ok(KeyRange {
        lo: ((query_first - radius) * s).floor() as i64,
        hi: ((query_first + radius) * s).ceil() as i64,
    })
}

impl QuantizedIndex {
    pub fn new(scale: u32) -> Result<Self> {
        if scale == 0 {
            return Err(Error::Config("quantization scale must be positive".into()));
        }
        Ok(QuantizedIndex {
            scale,
            buckets: BTreeMap::new(),
            keys: Vec::new(),
        })
    }

    pub fn from_values(values: &[f64], scale: u32) -> Result<Self> {
        let mut index = Self::new(scale)?;
        index.keys.reserve(values.len());
        for (position, &v) in values.iter().enumerate() {
            index.insert(v, position)?;
        }
        Ok(index)
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn key_of(&self, snr_db: f64) -> i64 {
        quantize(snr_db, self.scale)
    }

    /// Number of indexed samples.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket(&self, key: i64) -> &[usize] {
        self.buckets.get(&key).map_or(&[], Vec::as_slice)
    }

    pub fn key_at(&self, position: usize) -> Option<i64> {
        self.keys.get(position).copied()
    }

    pub fn min_key(&self) -> Option<i64> {
        self.buckets.keys().next().copied()
    }

    pub fn max_key(&self) -> Option<i64> {
        self.buckets.keys().next_back().copied()
    }

    pub fn buckets(&self) -> impl Iterator<Item = (i64, &[usize])> {
        self.buckets.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// Indexes the sample at `position`, which must be the next ordinal.
    pub fn insert(&mut self, snr_db: f64, position: usize) -> Result<()> {
        if !snr_db.is_finite() {
            return Err(Error::RejectedInput(format!("non-finite SNR value {snr_db}")));
        }
        let expected = self.keys.len();
        if position < expected {
            return Err(Error::IndexCorruption(format!(
                "position {position} is already indexed"
            )));
        }
        if position > expected {
            return Err(Error::IndexCorruption(format!(
                "position {position} skips ahead of the next ordinal {expected}"
            )));
        }
        let key = self.key_of(snr_db);
        self.keys.push(key);
        self.buckets.entry(key).or_default().push(position);
        Ok(())
    }

    /// Cheap consistency check against the series being searched.
    pub(crate) fn check_consistent(&self, values: &[f64]) -> Result<()> {
        if self.len() != values.len() {
            return Err(Error::IndexCorruption(format!(
                "index holds {} samples but the series has {}",
                self.len(),
                values.len()
            )));
        }
        for position in [0, values.len() / 2, values.len().saturating_sub(1)] {
            if let Some(&v) = values.get(position) {
                if self.keys[position] != self.key_of(v) {
                    return Err(Error::IndexCorruption(format!(
                        "key of position {position} does not match its value {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn buckets_at_or_below(&self, key: i64) -> BucketsDown<'_> {
        BucketsDown(Some(self.buckets.range(..=key)))
    }

    pub(crate) fn buckets_above(&self, key: i64) -> BucketsUp<'_> {
        BucketsUp(Some(
            self.buckets.range((Bound::Excluded(key), Bound::Unbounded)),
        ))
    }
}

/// Buckets in descending key order; `Default` is an exhausted walk.
#[derive(Default)]
pub(crate) struct BucketsDown<'a>(Option<btree_map::Range<'a, i64, Vec<usize>>>);

/// Buckets in ascending key order; `Default` is an exhausted walk.
#[derive(Default)]
pub(crate) struct BucketsUp<'a>(Option<btree_map::Range<'a, i64, Vec<usize>>>);

impl<'a> Iterator for BucketsDown<'a> {
    type Item = (i64, &'a [usize]);
    fn next(&mut self) -> Option<Self::Item> {
        self.0
            .as_mut()?
            .next_back()
            .map(|(k, v)| (*k, v.as_slice()))
    }
}

impl<'a> Iterator for BucketsUp<'a> {
    type Item = (i64, &'a [usize]);
    fn next(&mut self) -> Option<Self::Item> {
        self.0.as_mut()?.next().map(|(k, v)| (*k, v.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantization_examples() {
        let idx = QuantizedIndex::new(DEFAULT_SCALE).unwrap();
        assert_eq!(idx.key_of(12.345678), 12345);
        assert_eq!(idx.key_of(-3.2), -3200);
        assert_eq!(idx.key_of(-0.0001), -1);
    }

    #[test]
    fn equal_values_share_a_bucket_in_order() {
        let idx = QuantizedIndex::from_values(&[4.5, 1.0, 4.5, 4.5], DEFAULT_SCALE).unwrap();
        assert_eq!(idx.bucket(4500), &[0, 2, 3]);
        assert_eq!(idx.bucket(1000), &[1]);
    }

    #[test]
    fn duplicate_or_skipped_positions_are_corruption() {
        let mut idx = QuantizedIndex::new(10).unwrap();
        idx.insert(1.0, 0).unwrap();
        assert!(matches!(idx.insert(2.0, 0), Err(Error::IndexCorruption(_))));
        assert!(matches!(idx.insert(2.0, 5), Err(Error::IndexCorruption(_))));
        assert_eq!(idx.len(), 1);
    }

    #[test]
    fn prune_interval_examples() {
        let r = prune_interval(10.0, 9.0, 1).unwrap();
        assert_eq!(r, KeyRange { lo: 7, hi: 13 });
        assert_eq!(r.widened(), KeyRange { lo: 6, hi: 14 });

        let x = 10.4;
        let r = prune_interval(x, 0.0, 1).unwrap().widened();
        assert_eq!(r, KeyRange { lo: 9, hi: 12 });
        assert_eq!(r.lo, x.floor() as i64 - 1);
        assert_eq!(r.hi, x.ceil() as i64 + 1);

        assert!(matches!(prune_interval(1.0, -1.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn sentinel_interval_spans_every_bucket() {
        let values: Vec<f64> = (0..500).map(|i| -40.0 + (i as f64 * 0.377) % 90.0).collect();
        let idx = QuantizedIndex::from_values(&values, DEFAULT_SCALE).unwrap();
        for &x in &values {
            let r = prune_interval(x, INITIAL_MIN, DEFAULT_SCALE).unwrap();
            assert!(r.contains(idx.min_key().unwrap()));
            assert!(r.contains(idx.max_key().unwrap()));
        }
    }

    proptest! {
        #[test]
        fn index_is_complete(values in prop::collection::vec(-60.0f64..60.0, 0..300), scale in 1u32..5000) {
            let idx = QuantizedIndex::from_values(&values, scale).unwrap();
            let total: usize = idx.buckets().map(|(_, b)| b.len()).sum();
            prop_assert_eq!(total, values.len());
            for (position, &v) in values.iter().enumerate() {
                let key = idx.key_of(v);
                prop_assert!(idx.bucket(key).contains(&position));
                prop_assert_eq!(idx.key_at(position), Some(key));
            }
            for (_, bucket) in idx.buckets() {
                prop_assert!(bucket.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn pruned_windows_are_strictly_farther(
            first in -30.0f64..30.0,
            query_first in -30.0f64..30.0,
            rest in prop::collection::vec((-30.0f64..30.0, -30.0f64..30.0), 0..4),
            bound in 0.0f64..400.0,
        ) {
            let r = prune_interval(query_first, bound, 1).unwrap();
            let key = first.floor() as i64;
            if !r.contains(key) {
                let mut d = (first - query_first).powi(2);
                for (a, b) in rest {
                    d += (a - b).powi(2);
                }
                prop_assert!(d > bound);
            }
        }
    }
}
