use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::BISECTION_STEPS;
use crate::spaces::FuzzySpace;

/// Which pairs a classifier evaluates.
///
/// Finite carriers always use every unordered pair (diagonal included), so the
/// checks are exhaustive. Interval carriers use all unordered pairs of the grid
/// points, `random` seeded draws, the `extra` pairs and, where a threshold
/// 1 - r is involved, bisection probes that approach it from below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampling {
    pub random: usize,
    pub seed: u64,
    pub extra: Vec<(f64, f64)>,
    pub probes: bool,
}

impl Default for PairSampling {
    fn default() -> Self {
        PairSampling {
            random: 2000,
            seed: 0,
            extra: Vec::new(),
            probes: true,
        }
    }
}

impl PairSampling {
    pub fn with_seed(seed: u64) -> Self {
        PairSampling {
            seed,
            ..Self::default()
        }
    }

    /// Unordered pairs, diagonal included.
    pub fn base_pairs(&self, space: &FuzzySpace) -> Vec<(f64, f64)> {
        let c = &space.carrier;
        let p = &c.points;
        let mut out = Vec::with_capacity(p.len() * (p.len() + 1) / 2);
        for i in 0..p.len() {
            for j in i..p.len() {
                out.push((p[i], p[j]));
            }
        }
        if !c.is_finite() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for _ in 0..self.random {
                out.push((c.sample(&mut rng), c.sample(&mut rng)));
            }
            out.extend(self.extra.iter().copied());
        } else {
            out.extend(
                self.extra
                    .iter()
                    .copied()
                    .filter(|&(x, y)| c.contains(x) && c.contains(y)),
            );
        }
        out
    }

    /// Probe pairs whose `f` value approaches `level` from below, or nothing on
    /// finite carriers.
    pub fn probes(
        &self,
        space: &FuzzySpace,
        level: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Vec<(f64, f64)> {
        if !self.probes || space.carrier.is_finite() {
            return Vec::new();
        }
        let (lo, hi) = space.carrier.bounds();
        let w = hi - lo;
        let mut out = Vec::new();
        for x in [lo, lo + 0.25 * w, lo + 0.5 * w] {
            out.extend(
                threshold_probe(x, hi, level, |y| f(x, y))
                    .into_iter()
                    .map(|y| (x, y)),
            );
        }
        out
    }
}

/// Bisect y on [x, hi] for g(y) crossing `level`, returning every iterate
/// with g(y) < level. Empty if g(x) < level or g(hi) >= level.
pub fn threshold_probe(x: f64, hi: f64, level: f64, g: impl Fn(f64) -> f64) -> Vec<f64> {
    if !(g(x) >= level) || !(g(hi) < level) {
        return Vec::new();
    }
    let (mut a, mut b) = (x, hi);
    let mut out = vec![hi];
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        if g(mid) < level {
            b = mid;
            out.push(mid);
        } else {
            a = mid;
        }
    }
    out
}
