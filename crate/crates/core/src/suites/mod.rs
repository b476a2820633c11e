//! Worked examples and property suites, each a list of checked assertions with golden values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    class_membership_default, ClassTag, DomainTag, Gauge, Generator, MembershipWitness,
};
use crate::contractions::{
    cm_contractive_check, extract_empirical_gauge, m_value, psi_at, CmForm, FKind, MParams,
    PairSampling, SelfMap, Witness,
};
use crate::dynamics::{
    m_cauchy_check, picard_orbit, solve_fixed_point, Route, SolveStatus, SolverConfig,
};
use crate::grid::{default_r_grid, default_t_grid, weyl};
use crate::spaces::{
    axiom_check, exponential_fuzzy_metric, standard_fuzzy_metric, BaseMetric, Carrier, FuzzySpace,
};
use crate::Verdict;

/// Random triples for the axiom assertions.
const AXIOM_SAMPLES: usize = 500;
const EXACT_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub id: String,
    /// What the assertion certifies, in words.
    pub certifies: String,
    pub passed: bool,
    pub expected: String,
    pub observed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.into(),
            passed: true,
            assertions: Vec::new(),
        }
    }

    fn check(
        &mut self,
        id: &str,
        certifies: &str,
        passed: bool,
        expected: impl ToString,
        observed: impl ToString,
    ) {
        self.passed &= passed;
        self.assertions.push(Assertion {
            id: id.into(),
            certifies: certifies.into(),
            passed,
            expected: expected.to_string(),
            observed: observed.to_string(),
        });
    }

    pub fn get(&self, id: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.id == id)
    }
}

pub fn ex62_space() -> FuzzySpace {
    standard_fuzzy_metric(
        Carrier::interval(0.0, 3.0, 61).expect("valid interval"),
        BaseMetric::max_point(),
    )
}

pub fn ex63_space() -> FuzzySpace {
    exponential_fuzzy_metric(
        Carrier::finite(&[0.0, 1.0, 2.0, 5.0]).expect("valid carrier"),
        BaseMetric::euclidean(),
    )
}

pub fn ex63_params() -> MParams {
    MParams {
        alpha: 2.0,
        beta: 2.0,
    }
}

pub fn ex63_psi() -> Gauge {
    Gauge::power(5.0 / 7.0)
}

fn ex63_config() -> SolverConfig {
    SolverConfig {
        params: Some(ex63_params()),
        psi: Some(ex63_psi()),
        ..SolverConfig::default()
    }
}

fn jump_of(g: &Gauge) -> Option<(f64, f64)> {
    match class_membership_default(g, ClassTag::Psi).witness {
        Some(MembershipWitness::Jump(j)) => Some((j.at, j.size)),
        _ => None,
    }
}

/// The discontinuous step gauge: outside Psi, inside Psi1, a conjugate of the step phi.
pub fn run_example_step_gauge() -> SuiteReport {
    let mut s = SuiteReport::new("step-gauge");
    let psi = Gauge::step_psi();
    let v = psi.eval(0.3).unwrap_or(f64::NAN);
    s.check("ex61.value", "step psi is 1/2 below 1/2", v == 0.5, 0.5, v);

    let psi_cert = class_membership_default(&psi, ClassTag::Psi);
    let jump = jump_of(&psi);
    let size = 2.0 / 3.0 - 0.5;
    let ok = !psi_cert.is_member()
        && jump.is_some_and(|(at, sz)| {
            (at - 0.5).abs() < ROUND_TRIP_TOL && (sz - size).abs() < ROUND_TRIP_TOL
        });
    s.check(
        "ex61.jump",
        "step psi is not in Psi: jump 1/6 at 1/2",
        ok,
        format!("non_member, jump {size} at 0.5"),
        format!("{:?}, jump {jump:?}", psi_cert.verdict),
    );

    let psi1 = class_membership_default(&psi, ClassTag::Psi1);
    s.check(
        "ex61.psi1",
        "step psi is in Psi1 on the default r-grid",
        psi1.is_member(),
        "member",
        format!("{:?}", psi1.verdict),
    );

    let conj = Gauge::step_phi()
        .conjugate(&Generator::reciprocal())
        .expect("phi-style gauge");
    let worst = weyl(200)
        .into_iter()
        .map(|tau| (conj.eval(tau).unwrap_or(f64::NAN) - psi.eval(tau).unwrap_or(f64::NAN)).abs())
        .fold(0.0, f64::max);
    s.check(
        "ex61.conjugation",
        "step psi equals the conjugate of step phi by 1/tau - 1 at 200 points",
        worst <= EXACT_TOL,
        format!("<= {EXACT_TOL}"),
        worst,
    );
    let c = conj.eval(2.0 / 3.0).unwrap_or(f64::NAN);
    s.check(
        "ex61.conjugation_at_two_thirds",
        "conjugate value at 2/3",
        (c - 0.75).abs() <= EXACT_TOL,
        0.75,
        c,
    );
    s
}

/// The step map on the max metric: a CM map whose gauge is not in Psi.
pub fn run_example_step_map_extension() -> SuiteReport {
    let mut s = SuiteReport::new("step-map-extension");
    let space = ex62_space();
    let map = SelfMap::phi_step();
    let t_grid = default_t_grid();

    let ax = axiom_check(&space, AXIOM_SAMPLES, &t_grid, 0);
    let ok = ax.is_fuzzy_metric() && ax.strong_verdict() == Verdict::Satisfied;
    s.check(
        "ex62.strong",
        "standard space over the max metric is a strong fuzzy metric",
        ok,
        "satisfied",
        ok,
    );

    let m = space.nearness(1.0, 1.5, 1.0);
    s.check(
        "ex62.nearness",
        "M(1, 1.5, 1) = 1/(2 + delta/2) at delta = 1",
        m == 2.0 / 5.0,
        2.0 / 5.0,
        m,
    );
    let (a, b) = (
        map.eval(1.0).unwrap_or(f64::NAN),
        map.eval(1.5).unwrap_or(f64::NAN),
    );
    let mi = space.nearness(a, b, 1.0);
    s.check(
        "ex62.image_nearness",
        "M(phi 1, phi 1.5, 1) = 1/2",
        mi == 0.5,
        0.5,
        mi,
    );

    let cm = cm_contractive_check(
        &space,
        &map,
        &default_r_grid(),
        &t_grid,
        CmForm::Between,
        &PairSampling::default(),
    );
    let recorded = cm.conditions.iter().map(|c| c.rho.len()).max().unwrap_or(0);
    s.check(
        "ex62.cm",
        "step map is CM contractive with rho recorded per (r, t)",
        cm.is_satisfied() && recorded == default_r_grid().len() * t_grid.len(),
        "satisfied",
        format!("{} with {recorded} rho records", cm.verdict),
    );

    let deltas = [1.0, 0.5, 0.1, 0.01];
    let sampling = PairSampling {
        extra: deltas.iter().map(|d| (1.0, 1.0 + d / 2.0)).collect(),
        ..PairSampling::default()
    };
    let observed: Vec<f64> =
        match extract_empirical_gauge(&space, &map, FKind::Plain, 1.0, &sampling) {
            Ok(g) => deltas
                .iter()
                .map(|d| g.eval(1.0 / (2.0 + d / 2.0)))
                .collect(),
            Err(_) => Vec::new(),
        };
    let ok = observed.len() == deltas.len() && observed.iter().all(|&v| v == 0.5);
    s.check(
        "ex62.envelope",
        "empirical gauge is exactly 1/2 as tau rises to 1/2, so no Psi gauge fits",
        ok,
        "[0.5, 0.5, 0.5, 0.5]",
        format!("{observed:?}"),
    );

    let r = solve_fixed_point(&space, &map, 0.7, Route::CmStrong, &SolverConfig::default());
    let (ok, obs) = match &r {
        Ok(r) => (
            r.z == Some(0.0) && r.status == SolveStatus::LimitIdentified,
            format!("{:?} {:?}", r.status, r.z),
        ),
        Err(e) => (false, e.to_string()),
    };
    s.check(
        "ex62.fixed_point",
        "orbit from 0.7 tends to the fixed point 0",
        ok,
        "limit_identified Some(0.0)",
        obs,
    );
    s
}

/// The four-point space: the m-value route applies while CM fails.
pub fn run_example_final() -> SuiteReport {
    let mut s = SuiteReport::new("final");
    let space = ex63_space();
    let map = SelfMap::perm_0_1_2_5();
    let t_grid = default_t_grid();
    let pts = space.carrier.points.clone();

    let ax = axiom_check(&space, AXIOM_SAMPLES, &t_grid, 0);
    let ok = ax.is_fuzzy_metric() && ax.strong_verdict() == Verdict::Satisfied;
    s.check(
        "ex63.strong",
        "exponential space on {0,1,2,5} is strong",
        ok,
        "satisfied",
        ok,
    );

    let (p, psi) = (ex63_params(), ex63_psi());
    let mut worst = f64::INFINITY;
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            for &t in &t_grid {
                let lhs = space.nearness(
                    map.eval(x).unwrap_or(f64::NAN),
                    map.eval(y).unwrap_or(f64::NAN),
                    t,
                );
                let rhs = psi_at(&psi, m_value(&space, &map, p, x, y, t).unwrap_or(f64::NAN));
                let slack = lhs - rhs;
                worst = if slack.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    worst.min(slack)
                };
            }
        }
    }
    s.check(
        "ex63.inequality",
        "M(Tx, Ty, t) >= m-value^(5/7) on all pairs and grid t",
        worst >= -EXACT_TOL,
        format!(">= -{EXACT_TOL}"),
        worst,
    );
    let lhs = space.nearness(0.0, 5.0, 1.0);
    let rhs = psi_at(
        &psi,
        m_value(&space, &map, p, 0.0, 1.0, 1.0).unwrap_or(f64::NAN),
    );
    let (gl, gr) = ((-5.0f64).exp(), (-45.0f64 / 7.0).exp());
    let ok = (lhs - gl).abs() <= EXACT_TOL && (rhs - gr).abs() <= EXACT_TOL && lhs >= rhs;
    s.check(
        "ex63.inequality_at_0_1",
        "pair (0, 1) at t = 1: e^-5 >= e^(-45/7)",
        ok,
        format!("{gl} >= {gr}"),
        format!("{lhs} >= {rhs}"),
    );

    let expands = t_grid
        .iter()
        .all(|&t| space.nearness(0.0, 5.0, t) < space.nearness(0.0, 1.0, t));
    s.check(
        "ex63.obstruction",
        "M(T0, T1, t) < M(0, 1, t) for every grid t",
        expands,
        true,
        expands,
    );
    let cm = cm_contractive_check(
        &space,
        &map,
        &default_r_grid(),
        &t_grid,
        CmForm::Between,
        &PairSampling::default(),
    );
    let w = cm.conditions.first().and_then(|c| c.witness.clone());
    let ok = matches!(w, Some(Witness::Pair { x, y, .. }) if x.min(y) == 0.0 && x.max(y) == 1.0);
    s.check(
        "ex63.cm_witness",
        "CM fails with witness pair (0, 1)",
        ok && !cm.is_satisfied(),
        "(0, 1)",
        format!("{w:?}"),
    );

    let config = ex63_config();
    let mut zs = Vec::new();
    let mut ok = true;
    for &x0 in &pts {
        match solve_fixed_point(&space, &map, x0, Route::MFinal, &config) {
            Ok(r) => {
                let unique = r
                    .uniqueness
                    .as_ref()
                    .is_some_and(|u| u.verdict == Verdict::Satisfied);
                ok &= r.status == SolveStatus::Converged && r.z == Some(0.0) && unique;
                if x0 == 1.0 {
                    ok &= r.iterations <= 3;
                }
                zs.push((x0, r.z, r.iterations));
            }
            Err(_) => ok = false,
        }
    }
    s.check(
        "ex63.unique_fixed_point",
        "final route gives the unique fixed point 0 from every start, within 3 steps from 1",
        ok,
        "z = 0 from {0, 1, 2, 5}",
        format!("{zs:?}"),
    );
    s
}

fn max_round_trip(phi: &Gauge, eta: &Generator, points: &[f64]) -> f64 {
    let back = phi.conjugate(eta).and_then(|psi| psi.conjugate(eta));
    match back {
        Ok(b) => points
            .iter()
            .map(|&x| (b.eval(x).unwrap_or(f64::NAN) - phi.eval(x).unwrap_or(f64::NAN)).abs())
            .fold(
                0.0,
                |a, v| if v.is_nan() { f64::INFINITY } else { a.max(v) },
            ),
        Err(_) => f64::INFINITY,
    }
}

/// Class containment, the conjugation correspondence and the Cauchy consequence of CM.
pub fn run_proposition_suite(seed: u64) -> SuiteReport {
    let mut s = SuiteReport::new("propositions");
    let mut builtin = vec![
        Gauge::power(0.5),
        Gauge::power(5.0 / 7.0),
        Gauge::power(0.9),
    ];
    builtin.push(Gauge::step_psi());
    builtin.push(Gauge::identity());
    for g in &builtin {
        let in_psi = class_membership_default(g, ClassTag::Psi).is_member();
        let in_psi1 = class_membership_default(g, ClassTag::Psi1).is_member();
        s.check(
            &format!("prop.containment.{}", g.name()),
            "Psi membership implies Psi1 membership",
            !in_psi || in_psi1,
            "psi => psi1",
            format!("psi {in_psi}, psi1 {in_psi1}"),
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<f64> = (0..100).map(|_| rng.gen_range(1e-3..10.0)).collect();
    let phis = [
        Gauge::step_phi(),
        Gauge::expression("s ^ 2 / (1 + s)", DomainTag::PhiStyle).expect("valid expression"),
    ];
    for phi in &phis {
        for eta in [Generator::reciprocal(), Generator::neglog()] {
            let err = max_round_trip(phi, &eta, &points);
            s.check(
                &format!("prop.round_trip.{}.{}", phi.name(), eta.gauge().name()),
                "conjugating there and back returns the phi gauge",
                err <= ROUND_TRIP_TOL,
                format!("<= {ROUND_TRIP_TOL}"),
                err,
            );
        }
    }

    let id = class_membership_default(&Gauge::identity(), ClassTag::Psi1);
    s.check(
        "prop.identity_rejected",
        "identity gauge is not in Psi1",
        !id.is_member() && id.witness.is_some(),
        "non_member with witness",
        format!("{:?} {:?}", id.verdict, id.witness.is_some()),
    );

    let space = ex62_space();
    let (ok, obs) = match picard_orbit(&space, &SelfMap::phi_step(), 0.7, &[1.0], 60, 1e-9) {
        Ok(tr) => {
            let c = m_cauchy_check(&space, &tr, &[0.1], &[1.0]);
            (
                c.holds(),
                format!(
                    "{:?} with N {:?}",
                    c.verdict,
                    c.entries.first().and_then(|e| e.n)
                ),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    s.check(
        "prop.cauchy_prefix",
        "a CM orbit in a strong space is M-Cauchy on its 60-step prefix at r = 0.1, t = 1",
        ok,
        "holds_on_prefix with N 9",
        obs,
    );
    s
}

/// All suites in a fixed order.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    vec![
        run_example_step_gauge(),
        run_example_step_map_extension(),
        run_example_final(),
        run_proposition_suite(seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failures(s: &SuiteReport) -> Vec<&Assertion> {
        s.assertions.iter().filter(|a| !a.passed).collect()
    }

    #[test]
    fn step_gauge_suite_passes() {
        let s = run_example_step_gauge();
        assert!(s.passed, "{:?}", failures(&s));
    }

    #[test]
    fn step_map_suite_passes() {
        let s = run_example_step_map_extension();
        assert!(s.passed, "{:?}", failures(&s));
    }

    #[test]
    fn final_suite_passes() {
        let s = run_example_final();
        assert!(s.passed, "{:?}", failures(&s));
    }

    #[test]
    fn proposition_suite_is_deterministic() {
        let a = run_proposition_suite(7);
        assert!(a.passed, "{:?}", failures(&a));
        assert_eq!(a, run_proposition_suite(7));
    }
}
