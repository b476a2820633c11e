use serde::{Deserialize, Serialize};

use super::OrbitTrace;
use crate::error::{Error, Result};
use crate::spaces::FuzzySpace;
use crate::{par, Verdict};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_I_MAX: usize = 50;
/// Required shrink of the defect across the tail half for the decay test.
pub const DECAY_RATIO: f64 = 0.75;

/// The scale sequence E = { t / i : 1 <= i <= i_max }.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSequence {
    pub t: f64,
    pub i_max: usize,
}

impl Default for ScaleSequence {
    fn default() -> Self {
        ScaleSequence {
            t: 1.0,
            i_max: DEFAULT_I_MAX,
        }
    }
}

impl ScaleSequence {
    pub fn values(&self) -> Vec<f64> {
        (1..=self.i_max).map(|i| self.t / i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlainRegularity {
    pub t: f64,
    pub verdict: Verdict,
    /// 1 - M(x_{L-1}, x_L, t).
    pub final_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub plain: Vec<PlainRegularity>,
    pub uniform: Verdict,
    pub scales: ScaleSequence,
    /// Largest sup-over-E defect seen in the tail window, with its step index.
    pub uniform_worst: Option<(usize, f64)>,
    pub tail_tolerance: f64,
    pub note: String,
}

impl RegularityReport {
    pub fn plain_verdict(&self) -> Verdict {
        Verdict::all(self.plain.iter().map(|p| p.verdict))
    }
}

/// Start index of the tail window (last quarter of the step series, at least one step).
fn tail_start(len: usize) -> usize {
    len - len.div_ceil(4).max(1)
}

/// Classify a defect series 1 - M(x_n, x_{n+1}, t).
pub(crate) fn defect_verdict(defects: &[f64], tol: f64) -> Verdict {
    let len = defects.len();
    if defects[tail_start(len)..].iter().all(|&d| d <= tol) {
        return Verdict::Satisfied;
    }
    let half = &defects[len / 2..];
    let (first, last) = (half[0], half[half.len() - 1]);
    let nonincreasing = half.windows(2).all(|w| w[1] <= w[0]);
    if nonincreasing && last <= DECAY_RATIO * first {
        Verdict::Satisfied
    } else if last >= first {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

/// Plain regularity per grid t and uniform regularity over the truncated E.
pub fn regularity_check(
    space: &FuzzySpace,
    trace: &OrbitTrace,
    t_grid: &[f64],
    scales: ScaleSequence,
    tail_tolerance: f64,
) -> Result<RegularityReport> {
    if trace.points.len() < 3 && !trace.stabilized {
        return Err(Error::Invalid(
            "regularity needs a trace of at least 3 points".into(),
        ));
    }
    let pts = &trace.points;
    let len = trace.len();
    let plain = par::map(t_grid, |&t| {
        let defects: Vec<f64> = (0..len)
            .map(|n| 1.0 - space.nearness(pts[n], pts[n + 1], t))
            .collect();
        PlainRegularity {
            t,
            verdict: if trace.stabilized {
                Verdict::Satisfied
            } else {
                defect_verdict(&defects, tail_tolerance)
            },
            final_defect: defects[len - 1],
        }
    });
    let es = scales.values();
    let start = tail_start(len);
    let sup_defect = par::map_range(len - start, |k| {
        let n = start + k;
        let sup = es
            .iter()
            .map(|&t| 1.0 - space.nearness(pts[n], pts[n + 1], t))
            .fold(0.0, f64::max);
        (n, sup)
    });
    let worst = sup_defect
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let uniform = Verdict::from_bool(worst.is_none_or(|w| w.1 <= tail_tolerance));
    Ok(RegularityReport {
        plain,
        uniform,
        scales,
        uniform_worst: worst,
        tail_tolerance,
        note: format!(
            "uniform check truncated at i_max = {} over the last {} steps",
            scales.i_max,
            len - start
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contractions::SelfMap;
    use crate::dynamics::picard_orbit;
    use crate::grid::default_t_grid;
    use crate::spaces::{exponential_fuzzy_metric, standard_fuzzy_metric, BaseMetric, Carrier};

    #[test]
    fn stabilized_orbit_is_uniformly_regular() {
        let s = exponential_fuzzy_metric(
            Carrier::finite(&[0.0, 1.0, 2.0, 5.0]).unwrap(),
            BaseMetric::euclidean(),
        );
        let tr = picard_orbit(
            &s,
            &SelfMap::perm_0_1_2_5(),
            1.0,
            &default_t_grid(),
            100,
            1e-9,
        )
        .unwrap();
        let r =
            regularity_check(&s, &tr, &default_t_grid(), ScaleSequence::default(), 1e-6).unwrap();
        assert_eq!(r.plain_verdict(), Verdict::Satisfied);
        assert_eq!(r.uniform, Verdict::Satisfied);
        let c = picard_orbit(&s, &SelfMap::constant(2.0), 5.0, &[1.0], 10, 1e-9).unwrap();
        let rc = regularity_check(
            &s,
            &c,
            &[1.0],
            ScaleSequence {
                t: 1.0,
                i_max: 1000,
            },
            1e-6,
        )
        .unwrap();
        assert_eq!(rc.uniform, Verdict::Satisfied);
    }

    #[test]
    fn step_map_plain_but_not_uniform() {
        let s = standard_fuzzy_metric(
            Carrier::interval(0.0, 3.0, 61).unwrap(),
            BaseMetric::max_point(),
        );
        let tr = picard_orbit(&s, &SelfMap::phi_step(), 0.7, &[1.0], 200, 1e-9).unwrap();
        let r = regularity_check(&s, &tr, &[1.0], ScaleSequence::default(), 1e-6).unwrap();
        assert_eq!(r.plain[0].verdict, Verdict::Satisfied);
        assert_eq!(r.uniform, Verdict::Violated);
        let (n, sup) = r.uniform_worst.unwrap();
        // oracle: sup over i <= 50 of 1 - (1/i) / (1/i + x_n) with x_n = 1/(n+1) is at i = 50
        let x = 1.0 / (n as f64 + 1.0);
        assert!((sup - (1.0 - 0.02 / (0.02 + x))).abs() < 1e-12);
    }

    #[test]
    fn divergent_defect_is_violated() {
        let s = standard_fuzzy_metric(
            Carrier::interval(0.0, 100.0, 11).unwrap(),
            BaseMetric::euclidean(),
        );
        let pts: Vec<f64> = (0..40).map(|n| n as f64).collect();
        let tr = OrbitTrace::from_points(&s, pts, &[1.0]).unwrap();
        let r = regularity_check(&s, &tr, &[1.0], ScaleSequence::default(), 1e-6).unwrap();
        assert_eq!(r.plain[0].verdict, Verdict::Violated);
    }
}
