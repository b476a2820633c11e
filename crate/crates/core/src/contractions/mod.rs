//! Self-maps, contraction classifiers and empirical gauges.

mod classify;
mod empirical;
mod maps;
mod pairs;

pub use classify::{
    cm_contractive_check, m_contractive_check, psi_at, psi_contractive_check, ClassificationReport,
    CmForm, ConditionReport, PairSample, RhoRecord, Witness, N_CAP_SAMPLED, STRICT_MARGIN,
};
pub use empirical::{
    equivalence_probe, extract_empirical_gauge, EmpiricalGauge, EquivalenceReport, FKind, GaugeAtT,
    PsiObstruction, UniformRho,
};
pub use maps::{m_value, MParams, MapKind, SelfMap};
pub use pairs::{threshold_probe, PairSampling};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Gauge, Generator, MembershipVerdict};
    use crate::grid::{default_r_grid, default_t_grid};
    use crate::spaces::{
        exponential_fuzzy_metric, standard_fuzzy_metric, BaseMetric, Carrier, FuzzySpace,
    };
    use crate::Verdict;

    fn ex63() -> FuzzySpace {
        exponential_fuzzy_metric(
            Carrier::finite(&[0.0, 1.0, 2.0, 5.0]).unwrap(),
            BaseMetric::euclidean(),
        )
    }

    fn ex62() -> FuzzySpace {
        standard_fuzzy_metric(
            Carrier::interval(0.0, 3.0, 61).unwrap(),
            BaseMetric::max_point(),
        )
    }

    #[test]
    fn ex63_not_psi_contractive() {
        let s = ex63();
        let r = psi_contractive_check(
            &s,
            &SelfMap::perm_0_1_2_5(),
            &Gauge::power(0.5),
            &default_t_grid(),
            &PairSampling::default(),
        );
        assert_eq!(r.verdict, Verdict::Violated);
        match r.conditions[0].witness {
            Some(Witness::Pair { x, y, lhs, rhs, .. }) => {
                assert_eq!((x, y), (0.0, 1.0));
                assert!(lhs < rhs);
            }
            ref w => panic!("{w:?}"),
        }
        let c = cm_contractive_check(
            &s,
            &SelfMap::perm_0_1_2_5(),
            &default_r_grid(),
            &default_t_grid(),
            CmForm::Between,
            &PairSampling::default(),
        );
        assert_eq!(c.conditions[0].verdict, Verdict::Violated);
    }

    #[test]
    fn identity_fails_strict_condition() {
        let s = ex62();
        let r = psi_contractive_check(
            &s,
            &SelfMap::identity(),
            &Gauge::identity(),
            &[1.0],
            &PairSampling::default(),
        );
        assert_eq!(r.conditions[0].verdict, Verdict::Violated);
        assert_eq!(r.conditions[1].verdict, Verdict::Satisfied);
    }

    #[test]
    fn ex62_psi_contractive_with_conjugate() {
        let s = ex62();
        let psi = Gauge::step_phi()
            .conjugate(&Generator::reciprocal())
            .unwrap();
        let r = psi_contractive_check(
            &s,
            &SelfMap::phi_step(),
            &psi,
            &[1.0],
            &PairSampling::default(),
        );
        assert!(r.is_satisfied(), "{:?}", r.conditions);
    }

    #[test]
    fn ex62_cm_contractive() {
        let s = ex62();
        let r = cm_contractive_check(
            &s,
            &SelfMap::phi_step(),
            &default_r_grid(),
            &default_t_grid(),
            CmForm::Between,
            &PairSampling::default(),
        );
        assert!(
            r.is_satisfied(),
            "{:?}",
            r.conditions
                .iter()
                .map(|c| (&c.name, c.verdict, &c.witness))
                .collect::<Vec<_>>()
        );
        assert_eq!(r.conditions[1].rho.len(), 19 * 40);
        assert!(r.conditions[1]
            .rho
            .iter()
            .all(|x| x.rho.is_some_and(|rho| rho > x.r)));
        let one = cm_contractive_check(
            &s,
            &SelfMap::phi_step(),
            &[0.5],
            &[1.0],
            CmForm::Between,
            &PairSampling::default(),
        );
        assert!(one.conditions[1].rho[0].rho.is_some_and(|rho| rho > 0.5));
    }

    #[test]
    fn identity_on_interval_fails_threshold() {
        let s = ex62();
        let r = cm_contractive_check(
            &s,
            &SelfMap::identity(),
            &[0.5],
            &[1.0],
            CmForm::Between,
            &PairSampling::default(),
        );
        assert_eq!(r.conditions[1].verdict, Verdict::Violated);
        assert!(matches!(
            r.conditions[1].witness,
            Some(Witness::Threshold { .. })
        ));
    }

    #[test]
    fn constant_map_is_cm() {
        let s = ex63();
        let r = cm_contractive_check(
            &s,
            &SelfMap::constant(2.0),
            &default_r_grid(),
            &default_t_grid(),
            CmForm::Between,
            &PairSampling::default(),
        );
        assert!(r.is_satisfied());
        assert!(r.conditions[1]
            .rho
            .iter()
            .all(|x| x.rho == Some(1.0 - crate::grid::ENDPOINT_CLAMP)));
    }

    #[test]
    fn ex63_m_contractive_with_power() {
        let s = ex63();
        let p = MParams::new(2.0, 2.0).unwrap();
        let psi = Gauge::power(5.0 / 7.0);
        let r = m_contractive_check(
            &s,
            &SelfMap::perm_0_1_2_5(),
            p,
            Some(&psi),
            &default_r_grid(),
            &default_t_grid(),
            &PairSampling::default(),
        );
        assert!(r.is_satisfied(), "{:?}", r.conditions);
        assert!(r.conditions[2].margin.unwrap() >= -1e-12);
        let lhs = s.m(0.0, 5.0, 1.0).unwrap();
        let rhs = m_value(&s, &SelfMap::perm_0_1_2_5(), p, 0.0, 1.0, 1.0)
            .unwrap()
            .powf(5.0 / 7.0);
        assert!(
            (lhs - (-5.0f64).exp()).abs() < 1e-15 && (rhs - (-45.0f64 / 7.0).exp()).abs() < 1e-15
        );
        let n = m_contractive_check(
            &s,
            &SelfMap::perm_0_1_2_5(),
            p,
            None,
            &default_r_grid(),
            &default_t_grid(),
            &PairSampling::default(),
        );
        assert!(n.is_satisfied(), "{:?}", n.conditions);
    }

    #[test]
    fn zero_exponents_match_onesided_cm() {
        let s = ex63();
        for map in [
            SelfMap::constant(0.0),
            SelfMap::perm_0_1_2_5(),
            SelfMap::identity(),
        ] {
            let a = cm_contractive_check(
                &s,
                &map,
                &default_r_grid(),
                &[0.5, 1.0, 4.0],
                CmForm::Onesided,
                &PairSampling::default(),
            );
            let b = m_contractive_check(
                &s,
                &map,
                MParams::zero(),
                None,
                &default_r_grid(),
                &[0.5, 1.0, 4.0],
                &PairSampling::default(),
            );
            assert_eq!(a.conditions[0].verdict, b.conditions[0].verdict);
            if a.is_satisfied() {
                assert!(b.conditions[1].rho.iter().all(|x| x.n == Some(0)));
            }
        }
    }

    #[test]
    fn ex62_envelope_obstruction() {
        let s = ex62();
        let extra = [1.0, 0.5, 0.1, 0.01]
            .iter()
            .map(|d| (1.0, 1.0 + d / 2.0))
            .collect();
        let sampling = PairSampling {
            extra,
            ..PairSampling::default()
        };
        let g = extract_empirical_gauge(&s, &SelfMap::phi_step(), FKind::Plain, 1.0, &sampling)
            .unwrap();
        for d in [1.0, 0.5, 0.1, 0.01] {
            assert_eq!(g.eval(1.0 / (2.0 + d / 2.0)), 0.5);
        }
        assert!(g.certificate.is_member(), "{:?}", g.certificate);
        let ob = g.obstruction.clone().expect("obstruction");
        assert_eq!(ob.tau0, 0.5);
        assert!(g.samples.iter().all(|&(f, e)| e >= g.eval(f)));
    }

    #[test]
    fn identity_envelope() {
        let s = ex62();
        let g = extract_empirical_gauge(
            &s,
            &SelfMap::identity(),
            FKind::Plain,
            1.0,
            &PairSampling::default(),
        )
        .unwrap();
        assert!(g.samples.iter().all(|&(f, _)| g.eval(f) == f));
        assert_eq!(g.certificate.verdict, MembershipVerdict::NonMember);
    }

    #[test]
    fn ex63_envelope_dominates_power() {
        let s = ex63();
        let p = MParams::new(2.0, 2.0).unwrap();
        let g = extract_empirical_gauge(
            &s,
            &SelfMap::perm_0_1_2_5(),
            FKind::MGeneralized(p),
            1.0,
            &PairSampling::default(),
        )
        .unwrap();
        assert!(g
            .samples
            .iter()
            .all(|&(f, _)| g.eval(f) >= f.powf(5.0 / 7.0) - 1e-12));
    }

    #[test]
    fn equivalences() {
        let s = ex62();
        let ts = [0.1, 1.0, 10.0];
        let e = equivalence_probe(
            &s,
            &SelfMap::phi_step(),
            &default_r_grid(),
            &ts,
            &PairSampling::default(),
        );
        assert!(e.hypothesis.verdict.is_satisfied());
        assert!(e.pointwise.as_ref().unwrap().verdict.is_satisfied());
        assert_eq!(e.uniform_verdict, Verdict::Satisfied);
        assert_eq!(e.uniform_whenever_pointwise, Some(true));
        assert_eq!(e.gauges_verdict, Verdict::Satisfied);
        let id = equivalence_probe(
            &s,
            &SelfMap::identity(),
            &[0.5],
            &[1.0],
            &PairSampling::default(),
        );
        assert!(id.hypothesis.verdict.is_satisfied());
        assert_eq!(id.pointwise.unwrap().verdict, Verdict::Violated);
        let c = equivalence_probe(
            &ex63(),
            &SelfMap::constant(1.0),
            &default_r_grid(),
            &ts,
            &PairSampling::default(),
        );
        assert_eq!(c.uniform_verdict, Verdict::Satisfied);
        assert_eq!(c.gauges_verdict, Verdict::Satisfied);
    }
}
