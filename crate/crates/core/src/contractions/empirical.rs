use serde::{Deserialize, Serialize};

use super::classify::{cm_threshold_condition, image_nearness, CmForm, ConditionReport, Witness};
use super::pairs::PairSampling;
use super::{m_value, MParams, SelfMap};
use crate::algebra::{
    class_membership_default, ClassTag, Gauge, MembershipCertificate, MembershipVerdict,
    StepEnvelope,
};
use crate::error::{check_positive, Result};
use crate::grid::{default_r_grid, MIN_BAND};
use crate::spaces::FuzzySpace;
use crate::{par, Verdict, CMP_TOL};

/// What plays the role of F in E(x, y) >= psi(F(x, y)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FKind {
    Plain,
    MGeneralized(MParams),
}

/// Samples with F rising to `tau0` from below while E stays at or below `tau0`:
/// no continuous gauge with psi(tau) > tau can sit under them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiObstruction {
    pub tau0: f64,
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalGauge {
    pub t: f64,
    pub kind: FKind,
    /// (F, E) pairs.
    pub samples: Vec<(f64, f64)>,
    pub envelope: StepEnvelope,
    pub certificate: MembershipCertificate,
    pub obstruction: Option<PsiObstruction>,
}

impl EmpiricalGauge {
    pub fn eval(&self, tau: f64) -> f64 {
        self.envelope.eval(tau)
    }

    pub fn gauge(&self) -> Gauge {
        Gauge::envelope(self.envelope.clone(), format!("envelope@t={}", self.t))
    }
}

/// Lower step envelope of (F, E) samples at scale t, with its Psi1 certificate
/// and a Psi obstruction scan.
pub fn extract_empirical_gauge(
    space: &FuzzySpace,
    map: &SelfMap,
    kind: FKind,
    t: f64,
    sampling: &PairSampling,
) -> Result<EmpiricalGauge> {
    check_positive("t", t)?;
    let f = |x: f64, y: f64| match kind {
        FKind::Plain => space.nearness(x, y, t),
        FKind::MGeneralized(p) => m_value(space, map, p, x, y, t).unwrap_or(f64::NAN),
    };
    let mut pairs = sampling.base_pairs(space);
    for r in default_r_grid() {
        pairs.extend(sampling.probes(space, 1.0 - r, f));
    }
    let samples: Vec<(f64, f64)> = par::map(&pairs, |&(x, y)| {
        (f(x, y), image_nearness(space, map, x, y, t))
    })
    .into_iter()
    .filter(|s| !s.0.is_nan() && !s.1.is_nan())
    .collect();
    let envelope = StepEnvelope::from_samples(&samples);
    let g = Gauge::envelope(envelope.clone(), format!("envelope@t={t}"));
    let certificate = class_membership_default(&g, ClassTag::Psi1);
    let obstruction = find_obstruction(&samples);
    Ok(EmpiricalGauge {
        t,
        kind,
        samples,
        envelope,
        certificate,
        obstruction,
    })
}

/// Approach window below tau0, and how close the nearest sample must get.
const APPROACH_WINDOW: f64 = 1e-6;
const MIN_APPROACHING: usize = 3;

fn find_obstruction(samples: &[(f64, f64)]) -> Option<PsiObstruction> {
    let mut by_f = samples.to_vec();
    by_f.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut taus: Vec<f64> = samples.iter().map(|s| s.1).filter(|&e| e < 1.0).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    for tau0 in taus {
        let lo = by_f.partition_point(|s| s.0 < tau0 - APPROACH_WINDOW);
        let hi = by_f.partition_point(|s| s.0 < tau0);
        let near: Vec<(f64, f64)> = by_f[lo..hi]
            .iter()
            .copied()
            .filter(|s| s.1 <= tau0 + CMP_TOL)
            .collect();
        let closest = near.last().map(|s| tau0 - s.0);
        if near.len() >= MIN_APPROACHING && closest.is_some_and(|g| g <= MIN_BAND) {
            let keep = near.len().saturating_sub(8);
            return Some(PsiObstruction {
                tau0,
                samples: near[keep..].to_vec(),
            });
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeAtT {
    pub t: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformRho {
    pub r: f64,
    pub rho: Option<f64>,
}

/// Observations on the equivalences between the uniform (ii), pointwise (iii)
/// and gauge (iv) forms. Nothing is asserted about (iii) implying (ii).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub map: String,
    pub hypothesis: ConditionReport,
    pub pointwise: Option<ConditionReport>,
    pub uniform: Option<Vec<UniformRho>>,
    pub uniform_verdict: Verdict,
    pub uniform_whenever_pointwise: Option<bool>,
    pub gauges: Vec<GaugeAtT>,
    pub gauges_verdict: Verdict,
}

pub fn equivalence_probe(
    space: &FuzzySpace,
    map: &SelfMap,
    r_grid: &[f64],
    t_grid: &[f64],
    sampling: &PairSampling,
) -> EquivalenceReport {
    let pairs = sampling.base_pairs(space);
    let found = par::map(&pairs, |&(x, y)| {
        t_grid.iter().find_map(|&t| {
            let (lhs, rhs) = (image_nearness(space, map, x, y, t), space.nearness(x, y, t));
            (!(lhs >= rhs - CMP_TOL)).then_some(Witness::Pair { x, y, t, lhs, rhs })
        })
    });
    let mut hypothesis = ConditionReport {
        name: "nonexpansive: M(Tx,Ty,t) >= M(x,y,t)".into(),
        verdict: Verdict::Satisfied,
        witness: None,
        rho: Vec::new(),
        margin: None,
        note: None,
    };
    let mut report = EquivalenceReport {
        map: map.id().into(),
        hypothesis: hypothesis.clone(),
        pointwise: None,
        uniform: None,
        uniform_verdict: Verdict::Inconclusive,
        uniform_whenever_pointwise: None,
        gauges: Vec::new(),
        gauges_verdict: Verdict::Inconclusive,
    };
    if let Some(w) = found.into_iter().flatten().next() {
        hypothesis.verdict = Verdict::Violated;
        hypothesis.witness = Some(w);
        hypothesis.note = Some("precondition failed; equivalences not probed".into());
        report.hypothesis = hypothesis;
        return report;
    }
    let pointwise = cm_threshold_condition(space, map, r_grid, t_grid, CmForm::Between, sampling);
    let mut uniform = Vec::new();
    let mut all_found = true;
    for rec in &pointwise.rho {
        match uniform.iter_mut().find(|u: &&mut UniformRho| u.r == rec.r) {
            Some(u) => {
                u.rho = match (u.rho, rec.rho) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    _ => None,
                }
            }
            None => uniform.push(UniformRho {
                r: rec.r,
                rho: rec.rho,
            }),
        }
    }
    for u in &uniform {
        all_found &= u.rho.is_some();
    }
    report.uniform_verdict = if all_found {
        Verdict::Satisfied
    } else {
        pointwise.verdict
    };
    report.uniform_whenever_pointwise = pointwise.verdict.is_satisfied().then_some(all_found);
    report.uniform = Some(uniform);
    report.pointwise = Some(pointwise);
    report.gauges = par::map(t_grid, |&t| {
        let verdict = match extract_empirical_gauge(space, map, FKind::Plain, t, sampling) {
            Ok(g) if g.certificate.is_member() => Verdict::Satisfied,
            Ok(g) if g.certificate.verdict == MembershipVerdict::NonMember => Verdict::Violated,
            _ => Verdict::Inconclusive,
        };
        GaugeAtT { t, verdict }
    });
    report.gauges_verdict = Verdict::all(report.gauges.iter().map(|g| g.verdict));
    report.hypothesis = hypothesis;
    report
}
