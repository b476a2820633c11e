use serde::{Deserialize, Serialize};

use super::OrbitTrace;
use crate::contractions::FKind;
use crate::grid::{clamp_open_unit, default_r_grid, search_rho, MIN_BAND};
use crate::spaces::FuzzySpace;
use crate::{par, CMP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauchyKind {
    MCauchy,
    GCauchy,
}

/// Prefix certificates never claim anything about the infinite tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauchyVerdict {
    HoldsOnPrefix,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyEntry {
    pub t: f64,
    pub r: f64,
    /// Gap for G-Cauchy entries.
    pub gap: Option<usize>,
    pub n: Option<usize>,
}

/// Pair (n, m) with M(x_n, x_m, t) = value <= 1 - r inside the last admissible window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyWitness {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyCertificate {
    pub kind: CauchyKind,
    pub verdict: CauchyVerdict,
    pub r_grid: Vec<f64>,
    pub m_grid: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub entries: Vec<CauchyEntry>,
    pub witness: Option<CauchyWitness>,
    pub prefix_len: usize,
    /// The trace ended on a fixed point, so the tail beyond the prefix is known.
    pub exact: bool,
}

impl CauchyCertificate {
    pub fn holds(&self) -> bool {
        self.verdict == CauchyVerdict::HoldsOnPrefix
    }
}

/// Largest admissible window start: half the prefix, or all of it once stabilized.
fn max_start(trace: &OrbitTrace) -> usize {
    if trace.stabilized {
        trace.len()
    } else {
        trace.len() / 2
    }
}

/// Per start N, the (value, n, m) of the smallest pair, if any.
type Window = Vec<Option<(f64, usize, usize)>>;

/// suffix[N] = (min value, n, m) over the pairs produced for starts >= N.
fn suffix_min(rows: Window) -> Window {
    let mut out = rows;
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = match (out[i], out[i + 1]) {
            (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
            (a, b) => a.or(b),
        };
    }
    out
}

fn certify(
    kind: CauchyKind,
    trace: &OrbitTrace,
    r_grid: &[f64],
    m_grid: &[usize],
    t_grid: &[f64],
    windows: Vec<(f64, Option<usize>, Window)>,
) -> CauchyCertificate {
    let nmax = max_start(trace);
    let mut cert = CauchyCertificate {
        kind,
        verdict: CauchyVerdict::HoldsOnPrefix,
        r_grid: r_grid.to_vec(),
        m_grid: m_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        entries: Vec::new(),
        witness: None,
        prefix_len: trace.len(),
        exact: trace.stabilized,
    };
    for (t, gap, w) in windows {
        for &r in r_grid {
            let r = clamp_open_unit(r);
            let level = 1.0 - r;
            let n = (0..=nmax.min(w.len().saturating_sub(1)))
                .find(|&n| w[n].is_none_or(|v| v.0 > level));
            // a start with no pairs left only counts for a gap shorter than the trace
            let vacuous_ok = trace.stabilized || gap.is_some_and(|g| g < trace.len());
            let n = n.filter(|&n| w[n].is_some() || vacuous_ok);
            cert.entries.push(CauchyEntry { t, r, gap, n });
            if n.is_none() {
                match w
                    .get(nmax.min(w.len().saturating_sub(1)))
                    .copied()
                    .flatten()
                {
                    Some((value, i, j)) if value <= level => {
                        if cert.verdict != CauchyVerdict::Violated {
                            cert.witness = Some(CauchyWitness {
                                n: i,
                                m: j,
                                t,
                                r,
                                value,
                            });
                        }
                        cert.verdict = CauchyVerdict::Violated;
                    }
                    _ => {
                        if cert.verdict == CauchyVerdict::HoldsOnPrefix {
                            cert.verdict = CauchyVerdict::Inconclusive;
                        }
                    }
                }
            }
        }
    }
    cert
}

/// Smallest N per (r, t) with M(x_n, x_m, t) > 1 - r for all N <= n < m <= L,
/// with N at most L/2 unless the trace stabilized.
pub fn m_cauchy_check(
    space: &FuzzySpace,
    trace: &OrbitTrace,
    r_grid: &[f64],
    t_grid: &[f64],
) -> CauchyCertificate {
    let pts = &trace.points;
    let len = trace.len();
    let windows = par::map(t_grid, |&t| {
        let rows = (0..=len)
            .map(|n| {
                ((n + 1)..=len)
                    .map(|m| (space.nearness(pts[n], pts[m], t), n, m))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
            })
            .collect();
        (t, None, suffix_min(rows))
    });
    certify(CauchyKind::MCauchy, trace, r_grid, &[], t_grid, windows)
}

/// G-Cauchy on the default r-grid.
pub fn g_cauchy_check(
    space: &FuzzySpace,
    trace: &OrbitTrace,
    m_grid: &[usize],
    t_grid: &[f64],
) -> CauchyCertificate {
    g_cauchy_check_with(space, trace, m_grid, t_grid, &default_r_grid())
}

/// Smallest N per (gap, t, r) with M(x_n, x_{n+gap}, t) > 1 - r for all n >= N.
/// Needs a trace longer than the gap; starts past the last gap pair hold vacuously.
/// Uses the same window rule as the M-Cauchy check, over a subset of its pairs.
pub fn g_cauchy_check_with(
    space: &FuzzySpace,
    trace: &OrbitTrace,
    m_grid: &[usize],
    t_grid: &[f64],
    r_grid: &[f64],
) -> CauchyCertificate {
    let pts = &trace.points;
    let len = trace.len();
    let jobs: Vec<(usize, f64)> = m_grid
        .iter()
        .flat_map(|&g| t_grid.iter().map(move |&t| (g, t)))
        .collect();
    let windows = par::map(&jobs, |&(gap, t)| {
        let rows = (0..=len)
            .map(|n| {
                (gap > 0 && n + gap <= len)
                    .then(|| (space.nearness(pts[n], pts[n + gap], t), n, n + gap))
            })
            .collect();
        (t, Some(gap), suffix_min(rows))
    });
    certify(CauchyKind::GCauchy, trace, r_grid, m_grid, t_grid, windows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub t: f64,
    pub r: f64,
    pub rho: Option<f64>,
    pub n: Option<usize>,
}

/// Trace pair (p, q) with F > 1 - rho for every rho tried and E < 1 - r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionWitness {
    pub p: usize,
    pub q: usize,
    pub t: f64,
    pub r: f64,
    pub f: f64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub kind: FKind,
    pub verdict: CauchyVerdict,
    pub entries: Vec<CriterionEntry>,
    pub witness: Option<CriterionWitness>,
}

/// Search (rho, N) per (t, r) such that F(x_p, x_q, t) > 1 - rho implies
/// M(x_{p+1}, x_{q+1}, t) >= 1 - r for all trace pairs N <= p < q < L.
pub fn cauchy_criterion_check(
    space: &FuzzySpace,
    trace: &OrbitTrace,
    kind: FKind,
    r_grid: &[f64],
    t_grid: &[f64],
) -> CriterionReport {
    let pts = &trace.points;
    let len = trace.len();
    let nmax = max_start(trace).min(len.saturating_sub(1));
    let star = |a, b| space.tnorm.eval(a, b);
    let per_t = par::map(t_grid, |&t| {
        let m = |i: usize, j: usize| space.nearness(pts[i], pts[j], t);
        let f = |p: usize, q: usize| match kind {
            FKind::Plain => m(p, q),
            FKind::MGeneralized(pr) => star(
                star(m(p, q), m(p, p + 1).powf(pr.alpha)),
                m(q, q + 1).powf(pr.beta),
            ),
        };
        let mut pairs = Vec::new();
        for p in 0..len {
            for q in (p + 1)..len {
                pairs.push((p, q, f(p, q), m(p + 1, q + 1)));
            }
        }
        r_grid
            .iter()
            .map(|&r| {
                let r = clamp_open_unit(r);
                let level = 1.0 - r;
                // worst[N] = bad pair with the largest F among p >= N
                let mut worst: Vec<Option<(usize, usize, f64, f64)>> = vec![None; len + 1];
                for &(p, q, fv, ev) in &pairs {
                    if ev < level - CMP_TOL && worst[p].is_none_or(|w| fv > w.2) {
                        worst[p] = Some((p, q, fv, ev));
                    }
                }
                for i in (0..len).rev() {
                    if let (Some(b), a) = (worst[i + 1], worst[i]) {
                        if a.is_none_or(|a| b.2 > a.2) {
                            worst[i] = Some(b);
                        }
                    }
                }
                let found = (0..=nmax).find_map(|n| {
                    let max_bad = worst[n].map_or(f64::NEG_INFINITY, |w| w.2);
                    search_rho(r, |rho| max_bad <= 1.0 - rho).map(|rho| (n, rho))
                });
                (t, r, found, worst[nmax])
            })
            .collect::<Vec<_>>()
    });
    let mut report = CriterionReport {
        kind,
        verdict: CauchyVerdict::HoldsOnPrefix,
        entries: Vec::new(),
        witness: None,
    };
    for (t, r, found, worst) in per_t.into_iter().flatten() {
        report.entries.push(CriterionEntry {
            t,
            r,
            rho: found.map(|f| f.1),
            n: found.map(|f| f.0),
        });
        if found.is_some() {
            continue;
        }
        let w = worst.map(|(p, q, f, e)| CriterionWitness { p, q, t, r, f, e });
        let exact = w.is_some_and(|w| w.f > 1.0 - r - MIN_BAND);
        if exact && report.verdict != CauchyVerdict::Violated {
            report.verdict = CauchyVerdict::Violated;
            report.witness = w;
        } else if report.verdict == CauchyVerdict::HoldsOnPrefix {
            report.verdict = CauchyVerdict::Inconclusive;
            report.witness = w;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contractions::{MParams, SelfMap};
    use crate::dynamics::picard_orbit;
    use crate::grid::default_t_grid;
    use crate::spaces::{exponential_fuzzy_metric, standard_fuzzy_metric, BaseMetric, Carrier};

    fn ex62() -> FuzzySpace {
        standard_fuzzy_metric(
            Carrier::interval(0.0, 3.0, 61).unwrap(),
            BaseMetric::max_point(),
        )
    }

    fn line() -> FuzzySpace {
        standard_fuzzy_metric(
            Carrier::interval(0.0, 1000.0, 11).unwrap(),
            BaseMetric::euclidean(),
        )
    }

    #[test]
    fn step_orbit_m_cauchy_at_unit_scale() {
        let s = ex62();
        let tr = picard_orbit(&s, &SelfMap::phi_step(), 0.7, &[1.0], 60, 1e-9).unwrap();
        let c = m_cauchy_check(&s, &tr, &[0.1], &[1.0]);
        assert!(c.holds());
        // oracle: 1/(1 + 1/(N+1)) > 0.9 first at N = 9
        assert_eq!(c.entries[0].n, Some(9));
    }

    #[test]
    fn divergent_sequence_violates() {
        let s = line();
        let tr = OrbitTrace::from_points(&s, (0..50).map(|n| n as f64).collect(), &[1.0]).unwrap();
        let c = m_cauchy_check(&s, &tr, &[0.1], &[1.0]);
        assert_eq!(c.verdict, CauchyVerdict::Violated);
        let w = c.witness.unwrap();
        assert!(w.n >= 24 && w.m > w.n);
        assert_eq!(s.m(tr.points[w.n], tr.points[w.m], 1.0).unwrap(), w.value);
        assert!(w.value <= 0.9);
    }

    #[test]
    fn constant_tail_is_exact() {
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
        let c = m_cauchy_check(&s, &tr, &default_r_grid(), &default_t_grid());
        assert!(c.holds() && c.exact);
        assert!(c.entries.iter().all(|e| e.n.is_some_and(|n| n <= 3)));
        assert!(g_cauchy_check(&s, &tr, &[1, 2], &default_t_grid()).holds());
        let k = cauchy_criterion_check(
            &s,
            &tr,
            FKind::MGeneralized(MParams::new(2.0, 2.0).unwrap()),
            &default_r_grid(),
            &default_t_grid(),
        );
        assert_eq!(k.verdict, CauchyVerdict::HoldsOnPrefix);
    }

    #[test]
    fn harmonic_sums_g_but_not_m() {
        let s = line();
        let mut x = 0.0;
        let pts: Vec<f64> = (0..=200)
            .map(|k| {
                if k > 0 {
                    x += 1.0 / k as f64;
                }
                x
            })
            .collect();
        let tr = OrbitTrace::from_points(&s, pts, &[1.0]).unwrap();
        assert!(g_cauchy_check(&s, &tr, &[1, 2, 3], &[1.0]).holds());
        let m = m_cauchy_check(&s, &tr, &default_r_grid(), &[1.0]);
        assert_eq!(m.verdict, CauchyVerdict::Violated);
        let w = m.witness.unwrap();
        assert_eq!((w.n, w.m), (100, 200));
    }

    #[test]
    fn step_orbit_criterion_holds() {
        let s = ex62();
        let tr = picard_orbit(&s, &SelfMap::phi_step(), 0.7, &default_t_grid(), 60, 1e-9).unwrap();
        let k = cauchy_criterion_check(&s, &tr, FKind::Plain, &default_r_grid(), &default_t_grid());
        assert_eq!(k.verdict, CauchyVerdict::HoldsOnPrefix, "{:?}", k.witness);
    }

    #[test]
    fn expanding_cycle_violates_criterion() {
        let s = standard_fuzzy_metric(
            Carrier::finite(&[0.0, 1.0, 3.0]).unwrap(),
            BaseMetric::euclidean(),
        );
        let map = SelfMap::table(vec![(0.0, 1.0), (1.0, 3.0), (3.0, 0.0)]);
        let tr = picard_orbit(&s, &map, 0.0, &[1.0], 30, 1e-9).unwrap();
        let k = cauchy_criterion_check(&s, &tr, FKind::Plain, &[0.6], &[1.0]);
        assert_eq!(k.verdict, CauchyVerdict::Violated);
        let w = k.witness.unwrap();
        // M(0,1,1) = 1/2 >= 0.4 > 1/3 = M(1,3,1)
        assert_eq!(tr.points[w.p] + tr.points[w.q], 1.0);
        assert_eq!(w.f, 0.5);
        assert!((w.e - 1.0 / 3.0).abs() < 1e-15);
    }
}
