use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CarrierKind {
    Finite,
    /// Closed interval; `points` holds `samples` equally spaced grid points.
    Interval {
        lo: f64,
        hi: f64,
        samples: usize,
    },
}

/// The underlying set X, with an ordered list of distinct sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    pub kind: CarrierKind,
    pub points: Vec<f64>,
}

impl Carrier {
    pub fn finite(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid(
                "finite carrier needs at least one point".into(),
            ));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Invalid(format!("carrier point {p} is not finite")));
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Invalid(format!(
                "carrier point {} is repeated",
                w[0]
            )));
        }
        Ok(Carrier {
            kind: CarrierKind::Finite,
            points: points.to_vec(),
        })
    }

    pub fn interval(lo: f64, hi: f64, samples: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Invalid(format!(
                "interval [{lo}, {hi}] is empty or unbounded"
            )));
        }
        if samples < 2 {
            return Err(Error::Invalid(
                "interval carrier needs at least 2 samples".into(),
            ));
        }
        let points = (0..samples)
            .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
            .collect();
        Ok(Carrier {
            kind: CarrierKind::Interval { lo, hi, samples },
            points,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.kind == CarrierKind::Finite
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self.kind {
            CarrierKind::Interval { lo, hi, .. } => (lo, hi),
            CarrierKind::Finite => self
                .points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| {
                    (a.min(p), b.max(p))
                }),
        }
    }

    /// Exact membership for finite carriers, bounds check for intervals.
    pub fn contains(&self, x: f64) -> bool {
        match self.kind {
            CarrierKind::Finite => self.points.contains(&x),
            CarrierKind::Interval { lo, hi, .. } => x >= lo && x <= hi,
        }
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == x)
    }

    /// Uniform draw from the carrier (a listed point for finite carriers).
    pub fn sample(&self, rng: &mut impl rand::Rng) -> f64 {
        match self.kind {
            CarrierKind::Finite => self.points[rng.gen_range(0..self.points.len())],
            CarrierKind::Interval { lo, hi, .. } => rng.gen_range(lo..=hi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_rejects_duplicates() {
        assert!(Carrier::finite(&[0.0, 1.0, 0.0]).is_err());
        assert!(Carrier::finite(&[]).is_err());
        let c = Carrier::finite(&[0.0, 1.0, 2.0, 5.0]).unwrap();
        assert!(c.contains(5.0) && !c.contains(3.0));
        assert_eq!(c.index_of(2.0), Some(2));
    }

    #[test]
    fn interval_grid() {
        let c = Carrier::interval(0.0, 3.0, 61).unwrap();
        assert_eq!(c.points.len(), 61);
        assert_eq!(c.points[60], 3.0);
        assert!(c.contains(0.7) && !c.contains(3.1));
        assert!(Carrier::interval(1.0, 1.0, 5).is_err());
    }
}
