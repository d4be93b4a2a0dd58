//! Partial sums of orthogonal expansions and their stabilization diagnostic.

use serde::{Deserialize, Serialize};

use crate::real;

/// Number of trailing partial sums inspected by the stabilization test.
pub const WINDOW: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSums {
    /// S_0..S_N.
    #[serde(with = "real::vec")]
    pub sums: Vec<f64>,
    /// max − min over the last five partial sums.
    #[serde(with = "real")]
    pub oscillation: f64,
    pub stabilized: bool,
}

impl PartialSums {
    /// Accumulates `terms` and declares stabilization when the trailing
    /// oscillation is below `rel_band · max(floor, |S_N|)`.
    pub fn from_terms(terms: impl IntoIterator<Item = f64>, rel_band: f64, floor: f64) -> Self {
        let mut acc = 0.0;
        let sums: Vec<f64> = terms
            .into_iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect();
        Self::from_sums(sums, rel_band, floor)
    }

    pub fn from_sums(sums: Vec<f64>, rel_band: f64, floor: f64) -> Self {
        let oscillation = trailing_oscillation(&sums);
        let last = sums.last().copied().unwrap_or(0.0);
        let stabilized = oscillation.is_finite() && oscillation < rel_band * last.abs().max(floor);
        Self {
            sums,
            oscillation,
            stabilized,
        }
    }

    pub fn last(&self) -> f64 {
        *self.sums.last().expect("at least S_0")
    }

    /// True when the last five partial sums all lie below `-tol`.
    pub fn tail_below(&self, tol: f64) -> bool {
        let k = self.sums.len().min(WINDOW);
        self.sums[self.sums.len() - k..].iter().all(|&s| s < -tol)
    }
}

pub fn trailing_oscillation(sums: &[f64]) -> f64 {
    let k = sums.len().min(WINDOW);
    let tail = &sums[sums.len() - k..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_stabilizes() {
        let p = PartialSums::from_terms([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-6, 0.0);
        assert_eq!(p.sums, vec![1.0; 6]);
        assert!(p.stabilized);
        assert_eq!(p.oscillation, 0.0);
    }

    #[test]
    fn growing_series_does_not() {
        let p = PartialSums::from_terms((0..10).map(|k| k as f64), 1e-6, 0.0);
        assert!(!p.stabilized);
        assert_eq!(p.oscillation, 45.0 - 15.0);
    }
}
