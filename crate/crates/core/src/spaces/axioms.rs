use serde::{Deserialize, Serialize};

use super::metric::triples;
use super::FuzzySpace;
use crate::algebra::AxiomCheck;
use crate::{par, Verdict, CMP_TOL};

/// Largest allowed change of M between adjacent points of the refined t-grid.
pub const CONTINUITY_JUMP_TOL: f64 = 0.05;

/// Sub-steps inserted (geometrically) between adjacent t-grid nodes.
const REFINE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceAxiomReport {
    pub constructor: String,
    pub triple_samples: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub positivity: AxiomCheck,
    pub identity: AxiomCheck,
    pub symmetry: AxiomCheck,
    pub continuity: AxiomCheck,
    pub triangle: AxiomCheck,
    pub strong: AxiomCheck,
    pub declared_strong: bool,
}

impl SpaceAxiomReport {
    /// Axioms (a) to (e) all held on the samples.
    pub fn is_fuzzy_metric(&self) -> bool {
        self.checks()[..5].iter().all(|c| c.verdict.is_satisfied())
    }

    pub fn strong_verdict(&self) -> Verdict {
        self.strong.verdict
    }

    pub fn checks(&self) -> [&AxiomCheck; 6] {
        [
            &self.positivity,
            &self.identity,
            &self.symmetry,
            &self.continuity,
            &self.triangle,
            &self.strong,
        ]
    }
}

fn refine(t_grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in t_grid.windows(2) {
        let ratio = (w[1] / w[0]).powf(1.0 / REFINE as f64);
        for k in 0..REFINE {
            out.push(w[0] * ratio.powi(k as i32));
        }
    }
    if let Some(&last) = t_grid.last() {
        out.push(last);
    }
    out
}

type Found = Option<(Vec<f64>, Vec<f64>)>;

fn first_some(v: Vec<Found>) -> Found {
    v.into_iter().flatten().next()
}

pub fn axiom_check(
    space: &FuzzySpace,
    triple_samples: usize,
    t_grid: &[f64],
    seed: u64,
) -> SpaceAxiomReport {
    let pts = &space.carrier.points;
    let pairs: Vec<(f64, f64)> = pts
        .iter()
        .flat_map(|&x| pts.iter().map(move |&y| (x, y)))
        .collect();
    let m = |x, y, t| space.nearness(x, y, t);
    let star = |a, b| space.tnorm.eval(a, b);

    let positivity = first_some(par::map(&pairs, |&(x, y)| {
        t_grid.iter().find_map(|&t| {
            let v = m(x, y, t);
            (!(v > 0.0 && v <= 1.0)).then(|| (vec![x, y, t], vec![v]))
        })
    }));

    let identity = first_some(par::map(&pairs, |&(x, y)| {
        if x == y {
            t_grid.iter().find_map(|&t| {
                let v = m(x, y, t);
                ((v - 1.0).abs() > CMP_TOL).then(|| (vec![x, y, t], vec![v]))
            })
        } else {
            let all_one = t_grid.iter().all(|&t| m(x, y, t) >= 1.0 - CMP_TOL);
            all_one.then(|| (vec![x, y], vec![1.0]))
        }
    }));

    let symmetry = first_some(par::map(&pairs, |&(x, y)| {
        t_grid.iter().find_map(|&t| {
            let (a, b) = (m(x, y, t), m(y, x, t));
            ((a - b).abs() > CMP_TOL).then(|| (vec![x, y, t], vec![a, b]))
        })
    }));

    let fine = refine(t_grid);
    let continuity = first_some(par::map(&pairs, |&(x, y)| {
        fine.windows(2).find_map(|w| {
            let (a, b) = (m(x, y, w[0]), m(x, y, w[1]));
            ((b - a).abs() > CONTINUITY_JUMP_TOL).then(|| (vec![x, y, w[0], w[1]], vec![a, b]))
        })
    }));

    let trip = triples(&space.carrier, triple_samples, seed);
    let triangle = first_some(par::map(&trip, |&[x, y, z]| {
        for &s in t_grid {
            for &t in t_grid {
                let lhs = m(x, z, s + t);
                let rhs = star(m(x, y, s), m(y, z, t));
                if !(lhs >= rhs - CMP_TOL) {
                    return Some((vec![x, y, z, s, t], vec![lhs, rhs]));
                }
            }
        }
        None
    }));

    let strong = first_some(par::map(&trip, |&[x, y, z]| {
        t_grid.iter().find_map(|&t| {
            let lhs = m(x, z, t);
            let rhs = star(m(x, y, t), m(y, z, t));
            (!(lhs >= rhs - CMP_TOL)).then(|| (vec![x, y, z, t], vec![lhs, rhs]))
        })
    }));

    SpaceAxiomReport {
        constructor: space.constructor_id(),
        triple_samples: trip.len(),
        seed,
        t_grid: t_grid.to_vec(),
        positivity: AxiomCheck::from_first("(a) M > 0", positivity),
        identity: AxiomCheck::from_first("(b) M = 1 iff x = y", identity),
        symmetry: AxiomCheck::from_first("(c) symmetry", symmetry),
        continuity: AxiomCheck::from_first("(d) continuity in t", continuity),
        triangle: AxiomCheck::from_first("(e) triangle", triangle),
        strong: AxiomCheck::from_first("strong triangle", strong),
        declared_strong: space.strong,
    }
}
