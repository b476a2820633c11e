use fuzzycm::algebra::{Gauge, Generator, TNorm};
use fuzzycm::contractions::{cm_contractive_check, CmForm, PairSampling, SelfMap};
use fuzzycm::dynamics::{
    g_cauchy_check_with, m_cauchy_check, picard_orbit, regularity_check, solve_fixed_point,
    OrbitTrace, Route, ScaleSequence, SolveStatus, SolverConfig,
};
use fuzzycm::expr::{BinOp, CmpOp, Cond, Expr, ExprKind, Func};
use fuzzycm::spaces::{
    exponential_fuzzy_metric, standard_fuzzy_metric, BaseMetric, Carrier, FuzzySpace,
};
use fuzzycm::Verdict;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn tnorms() -> Vec<TNorm> {
    vec![
        TNorm::product(),
        TNorm::minimum(),
        TNorm::lukasiewicz(),
        TNorm::hamacher(),
    ]
}

fn spaces(metric: BaseMetric) -> [FuzzySpace; 2] {
    let c = Carrier::interval(0.0, 10.0, 11).unwrap();
    [
        standard_fuzzy_metric(c.clone(), metric.clone()),
        exponential_fuzzy_metric(c, metric),
    ]
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..1000, 0u32..4)
            .prop_map(|(n, k)| Expr::new(ExprKind::Num(n as f64 / 10f64.powi(k as i32)))),
        prop::sample::select(vec!["x", "t", "tau", "s"])
            .prop_map(|v| Expr::new(ExprKind::Var(v.into()))),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        let op = prop::sample::select(vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Pow,
        ]);
        let cmp = prop::sample::select(vec![CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq]);
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::new(ExprKind::Bin(
                o,
                Box::new(a),
                Box::new(b)
            ))),
            (
                prop::sample::select(vec![Func::Exp, Func::Ln, Func::Abs]),
                inner.clone()
            )
                .prop_map(|(f, a)| Expr::new(ExprKind::Call(f, vec![a]))),
            (
                prop::sample::select(vec![Func::Min, Func::Max]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(f, a, b)| Expr::new(ExprKind::Call(f, vec![a, b]))),
            (inner.clone(), cmp, inner.clone(), inner.clone(), inner).prop_map(
                |(l, op, r, a, b)| {
                    let c = Cond { lhs: l, op, rhs: r };
                    Expr::new(ExprKind::Piecewise(Box::new(c), Box::new(a), Box::new(b)))
                }
            ),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tnorm_axioms(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0, d in 0.0f64..=1.0) {
        for n in tnorms() {
            prop_assert!((n.eval(a, b) - n.eval(b, a)).abs() <= TOL);
            prop_assert!((n.eval(n.eval(a, b), c) - n.eval(a, n.eval(b, c))).abs() <= TOL);
            prop_assert!((n.eval(a, 1.0) - a).abs() <= TOL);
            let (lo, hi) = (b.min(d), b.max(d));
            prop_assert!(n.eval(a, lo) <= n.eval(a, hi) + TOL);
            prop_assert!(n.eval(a, b) <= a.min(b) + TOL);
        }
    }

    #[test]
    fn fuzzy_metric_triangles(x in 0.0f64..10.0, y in 0.0f64..10.0, z in 0.0f64..10.0,
                              t in 1e-3f64..100.0, s in 1e-3f64..100.0) {
        for metric in [BaseMetric::euclidean(), BaseMetric::max_point()] {
            for sp in spaces(metric.clone()) {
                let m = |a, b, t| sp.m(a, b, t).unwrap();
                prop_assert!(m(x, y, t) > 0.0 && m(x, y, t) <= 1.0);
                prop_assert_eq!(m(x, y, t), m(y, x, t));
                prop_assert!(m(x, z, t + s) >= sp.tnorm.eval(m(x, y, t), m(y, z, s)) - TOL);
                prop_assert!(m(x, z, t) >= sp.tnorm.eval(m(x, y, t), m(y, z, t)) - TOL);
                prop_assert!(m(x, y, t) <= m(x, y, t + s) + TOL);
            }
        }
    }

    #[test]
    fn expressions_print_and_reparse(e in tree()) {
        let src = e.to_string();
        let back = Expr::parse(&src).unwrap();
        prop_assert_eq!(&back, &e, "{}", src);
        prop_assert_eq!(back.to_string(), src);
    }

    #[test]
    fn conjugation_round_trips(s in 1e-3f64..50.0, k in 0.05f64..0.95) {
        for phi in [Gauge::step_phi(), Gauge::phi_scale(k)] {
            for eta in [Generator::reciprocal(), Generator::neglog()] {
                let back = phi.conjugate(&eta).unwrap().conjugate(&eta).unwrap();
                let (a, b) = (back.eval(s).unwrap(), phi.eval(s).unwrap());
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b), "{} {} {}", phi.name(), a, b);
            }
        }
    }

    #[test]
    fn m_cauchy_implies_g_cauchy(xs in prop::collection::vec(0.0f64..10.0, 4..40), decay in 0.0f64..1.0) {
        let sp = &spaces(BaseMetric::euclidean())[0];
        // damped sequences give a mix of verdicts
        let pts: Vec<f64> = xs.iter().enumerate().map(|(n, x)| x * decay.powi(n as i32)).collect();
        let tr = OrbitTrace::from_points(sp, pts, &[0.5, 1.0]).unwrap();
        let r = [0.1, 0.5];
        let m = m_cauchy_check(sp, &tr, &r, &tr.t_grid);
        let g = g_cauchy_check_with(sp, &tr, &[1, 2], &tr.t_grid, &r);
        if m.holds() {
            prop_assert!(g.holds(), "{:?}", g);
        }
        if let Some(w) = m.witness {
            prop_assert_eq!(sp.m(tr.points[w.n], tr.points[w.m], w.t).unwrap(), w.value);
            prop_assert!(w.value <= 1.0 - w.r);
        }
    }

    #[test]
    fn uniform_regularity_implies_plain(xs in prop::collection::vec(0.0f64..10.0, 3..30), decay in 0.0f64..1.0) {
        let sp = &spaces(BaseMetric::euclidean())[0];
        let pts: Vec<f64> = xs.iter().enumerate().map(|(n, x)| x * decay.powi(n as i32)).collect();
        let tr = OrbitTrace::from_points(sp, pts, &[1.0]).unwrap();
        let scales = ScaleSequence { t: 1.0, i_max: 10 };
        let rep = regularity_check(sp, &tr, &scales.values(), scales, 1e-6).unwrap();
        if rep.uniform == Verdict::Satisfied {
            prop_assert!(rep.plain.iter().all(|p| p.verdict == Verdict::Satisfied));
        }
    }

    #[test]
    fn cm_maps_on_finite_carriers(img in prop::collection::vec(0usize..5, 5), x0 in 0usize..5) {
        let pts = [0.0, 1.0, 2.0, 4.0, 7.0];
        let sp = exponential_fuzzy_metric(Carrier::finite(&pts).unwrap(), BaseMetric::euclidean());
        let map = SelfMap::table(pts.iter().zip(&img).map(|(&x, &i)| (x, pts[i])).collect());
        let tg = [0.1, 1.0, 10.0];
        let cm = cm_contractive_check(&sp, &map, &[0.25, 0.5, 0.75], &tg, CmForm::Between, &PairSampling::default());
        let tr = picard_orbit(&sp, &map, pts[x0], &tg, 50, 1e-9).unwrap();
        if cm.is_satisfied() {
            // strictly improving step series until the orbit stops moving
            for s in &tr.steps {
                for w in s.windows(2) {
                    prop_assert!(w[0] == 1.0 || w[1] > w[0], "{:?}", s);
                }
            }
            prop_assert!(tr.stabilized);
            prop_assert!(regularity_check(&sp, &tr, &tg, ScaleSequence::default(), 1e-6).unwrap().plain_verdict().is_satisfied());
        }
        let cfg = SolverConfig { t_grid: tg.to_vec(), r_grid: vec![0.25, 0.5, 0.75], ..SolverConfig::default() };
        let res = solve_fixed_point(&sp, &map, pts[x0], Route::CmStrong, &cfg).unwrap();
        if let Some(z) = res.z {
            prop_assert_eq!(map.eval(z).unwrap(), z);
            prop_assert_eq!(res.residual, Some(0.0));
            if res.audit_passed() {
                prop_assert_eq!(res.uniqueness.unwrap().fixed_points, vec![z]);
            }
        } else {
            prop_assert!(res.status == SolveStatus::PreconditionFailed);
        }
    }
}
