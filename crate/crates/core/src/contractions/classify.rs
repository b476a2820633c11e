use serde::{Deserialize, Serialize};

use super::pairs::PairSampling;
use super::{m_value, MParams, SelfMap};
use crate::algebra::{class_membership_default, ClassTag, Gauge, MembershipVerdict};
use crate::grid::{clamp_open_unit, search_rho};
use crate::spaces::FuzzySpace;
use crate::{par, Verdict, CMP_TOL};

/// Strictness margin for `>` on sampled (interval) carriers.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Form of the threshold implication in the CM condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmForm {
    /// 1 - r > M(x,y,t) > 1 - rho implies M(Tx,Ty,t) >= 1 - r.
    Between,
    /// M(x,y,t) > 1 - rho implies M(Tx,Ty,t) >= 1 - r.
    Onesided,
}

/// One evaluated pair: comparison value `f` and image nearness `e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub x: f64,
    pub y: f64,
    pub f: f64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    /// `lhs` = M(Tx,Ty,t) failed against `rhs`.
    Pair {
        x: f64,
        y: f64,
        t: f64,
        lhs: f64,
        rhs: f64,
    },
    /// No rho >= r + MIN_BAND works at (r, t); `pairs` are the offending samples
    /// closest to the threshold, F descending. `n` is the iterate depth, if any.
    Threshold {
        r: f64,
        t: f64,
        n: Option<usize>,
        pairs: Vec<PairSample>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoRecord {
    pub t: f64,
    pub r: f64,
    pub rho: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rho: Vec<RhoRecord>,
    /// Tightest observed slack, where meaningful.
    pub margin: Option<f64>,
    pub note: Option<String>,
}

impl ConditionReport {
    fn new(name: &str, verdict: Verdict) -> Self {
        ConditionReport {
            name: name.into(),
            verdict,
            witness: None,
            rho: Vec::new(),
            margin: None,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub map: String,
    pub space: String,
    pub definition: String,
    pub verdict: Verdict,
    pub conditions: Vec<ConditionReport>,
    pub t_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub pairs: usize,
    pub exhaustive: bool,
}

impl ClassificationReport {
    fn assemble(
        space: &FuzzySpace,
        map: &SelfMap,
        definition: &str,
        conditions: Vec<ConditionReport>,
        t_grid: &[f64],
        r_grid: &[f64],
        pairs: usize,
    ) -> Self {
        ClassificationReport {
            map: map.id().into(),
            space: space.constructor_id(),
            definition: definition.into(),
            verdict: Verdict::all(conditions.iter().map(|c| c.verdict)),
            conditions,
            t_grid: t_grid.to_vec(),
            r_grid: r_grid.to_vec(),
            pairs,
            exhaustive: space.carrier.is_finite(),
        }
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict.is_satisfied()
    }

    fn precondition_failed(
        space: &FuzzySpace,
        map: &SelfMap,
        definition: &str,
        msg: String,
    ) -> Self {
        let mut c = ConditionReport::new("map is a self-map", Verdict::Inconclusive);
        c.note = Some(msg);
        Self::assemble(space, map, definition, vec![c], &[], &[], 0)
    }
}

pub(crate) fn image_nearness(space: &FuzzySpace, map: &SelfMap, x: f64, y: f64, t: f64) -> f64 {
    match (map.eval(x), map.eval(y)) {
        (Ok(a), Ok(b)) => space.nearness(a, b, t),
        _ => f64::NAN,
    }
}

/// psi at a nearness value; a value that underflowed to 0 is read as the smallest
/// positive normal, which only raises the bound since psi is nondecreasing.
pub fn psi_at(psi: &Gauge, v: f64) -> f64 {
    let v = if v == 0.0 { f64::MIN_POSITIVE } else { v };
    psi.eval(v).unwrap_or(f64::NAN)
}

/// Smallest slack first, with NaN (an evaluation failure) worst of all.
fn worst_slack(a: &(f64, Witness), b: &(f64, Witness)) -> std::cmp::Ordering {
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    key(a.0).total_cmp(&key(b.0))
}

fn strict_margin(space: &FuzzySpace) -> f64 {
    if space.carrier.is_finite() {
        0.0
    } else {
        STRICT_MARGIN
    }
}

/// M(Tx,Ty,t) > rhs(x,y,t) for every sampled x != y and grid t.
fn strict_condition(
    name: &str,
    space: &FuzzySpace,
    map: &SelfMap,
    pairs: &[(f64, f64)],
    t_grid: &[f64],
    rhs: impl Fn(f64, f64, f64) -> f64 + Sync + Send,
) -> ConditionReport {
    let off: Vec<(f64, f64)> = pairs.iter().copied().filter(|p| p.0 != p.1).collect();
    let margin = strict_margin(space);
    let found = par::map(&off, |&(x, y)| {
        t_grid.iter().find_map(|&t| {
            let lhs = image_nearness(space, map, x, y, t);
            let rhs = rhs(x, y, t);
            (!(lhs > rhs + margin)).then_some(Witness::Pair { x, y, t, lhs, rhs })
        })
    });
    let mut c = ConditionReport::new(name, Verdict::Satisfied);
    if let Some(w) = found.into_iter().flatten().next() {
        c.verdict = Verdict::Violated;
        c.witness = Some(w);
    }
    c.note = Some(format!("strict comparison with margin {margin}"));
    c
}

/// rho search for one (r, t) over evaluated samples. `Ok(rho)` or the failure.
fn rho_for(
    samples: &[PairSample],
    r: f64,
    form: CmForm,
    finite: bool,
) -> Result<f64, (Verdict, Vec<PairSample>)> {
    let level = 1.0 - r;
    let mut bad: Vec<PairSample> = samples
        .iter()
        .copied()
        .filter(|s| !(s.e >= level - CMP_TOL) && (form == CmForm::Onesided || s.f < level))
        .collect();
    let max_bad = bad.iter().map(|s| s.f).fold(f64::NEG_INFINITY, f64::max);
    if let Some(rho) = search_rho(r, |rho| max_bad <= 1.0 - rho) {
        return Ok(rho);
    }
    bad.sort_by(|a, b| b.f.total_cmp(&a.f));
    bad.truncate(5);
    // A bad pair at or above the threshold defeats every rho > r exactly; otherwise
    // only the probe sequence of an interval carrier closes in on the threshold.
    let exact = max_bad >= level || !finite;
    Err((
        if exact {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        },
        bad,
    ))
}

fn evaluate(
    pairs: &[(f64, f64)],
    f: impl Fn(f64, f64) -> f64,
    e: impl Fn(f64, f64) -> f64,
) -> Vec<PairSample> {
    pairs
        .iter()
        .map(|&(x, y)| PairSample {
            x,
            y,
            f: f(x, y),
            e: e(x, y),
        })
        .filter(|s| !s.f.is_nan() && !s.e.is_nan())
        .collect()
}

/// The CM threshold condition: a rho per (t, r).
pub(crate) fn cm_threshold_condition(
    space: &FuzzySpace,
    map: &SelfMap,
    r_grid: &[f64],
    t_grid: &[f64],
    form: CmForm,
    sampling: &PairSampling,
) -> ConditionReport {
    let base = sampling.base_pairs(space);
    let finite = space.carrier.is_finite();
    let per_t = par::map(t_grid, |&t| {
        let f = |x, y| space.nearness(x, y, t);
        let e = |x, y| image_nearness(space, map, x, y, t);
        let base_samples = evaluate(&base, f, e);
        r_grid
            .iter()
            .map(|&r| {
                let r = clamp_open_unit(r);
                let mut samples = evaluate(&sampling.probes(space, 1.0 - r, f), f, e);
                samples.extend_from_slice(&base_samples);
                (t, r, rho_for(&samples, r, form, finite))
            })
            .collect::<Vec<_>>()
    });
    let name = match form {
        CmForm::Between => "threshold implication (between)",
        CmForm::Onesided => "threshold implication (one-sided)",
    };
    let mut c = ConditionReport::new(name, Verdict::Satisfied);
    for (t, r, res) in per_t.into_iter().flatten() {
        match res {
            Ok(rho) => c.rho.push(RhoRecord {
                t,
                r,
                rho: Some(rho),
                n: None,
            }),
            Err((v, pairs)) => {
                c.rho.push(RhoRecord {
                    t,
                    r,
                    rho: None,
                    n: None,
                });
                if c.witness.is_none() || (v == Verdict::Violated && c.verdict != Verdict::Violated)
                {
                    c.witness = Some(Witness::Threshold {
                        r,
                        t,
                        n: None,
                        pairs,
                    });
                }
                c.verdict = c.verdict.and(v);
            }
        }
    }
    c
}

pub fn psi_contractive_check(
    space: &FuzzySpace,
    map: &SelfMap,
    psi: &Gauge,
    t_grid: &[f64],
    sampling: &PairSampling,
) -> ClassificationReport {
    const DEF: &str = "psi-contractive";
    if let Err(e) = map.validate(&space.carrier) {
        return ClassificationReport::precondition_failed(space, map, DEF, e.to_string());
    }
    let pairs = sampling.base_pairs(space);
    let c1 = strict_condition(
        "strict improvement",
        space,
        map,
        &pairs,
        t_grid,
        |x, y, t| space.nearness(x, y, t),
    );
    let found = par::map(&pairs, |&(x, y)| {
        t_grid
            .iter()
            .map(|&t| {
                let lhs = image_nearness(space, map, x, y, t);
                let rhs = psi_at(psi, space.nearness(x, y, t));
                (lhs - rhs, Witness::Pair { x, y, t, lhs, rhs })
            })
            .min_by(worst_slack)
    });
    let mut c2 = ConditionReport::new("gauge bound", Verdict::Satisfied);
    let mut min_slack = f64::INFINITY;
    for (slack, w) in found.into_iter().flatten() {
        if !(slack >= -CMP_TOL) && c2.witness.is_none() {
            c2.verdict = Verdict::Violated;
            c2.witness = Some(w);
        }
        if !(slack >= min_slack) {
            min_slack = slack;
        }
    }
    c2.margin = Some(min_slack);
    c2.note = Some(format!(
        "M(Tx,Ty,t) >= {}(M(x,y,t)) - {CMP_TOL}",
        psi.name()
    ));
    ClassificationReport::assemble(space, map, DEF, vec![c1, c2], t_grid, &[], pairs.len())
}

pub fn cm_contractive_check(
    space: &FuzzySpace,
    map: &SelfMap,
    r_grid: &[f64],
    t_grid: &[f64],
    form: CmForm,
    sampling: &PairSampling,
) -> ClassificationReport {
    let def = match form {
        CmForm::Between => "cm-contractive",
        CmForm::Onesided => "cm-contractive (one-sided)",
    };
    if let Err(e) = map.validate(&space.carrier) {
        return ClassificationReport::precondition_failed(space, map, def, e.to_string());
    }
    let pairs = sampling.base_pairs(space);
    let c1 = strict_condition(
        "strict improvement",
        space,
        map,
        &pairs,
        t_grid,
        |x, y, t| space.nearness(x, y, t),
    );
    let c2 = cm_threshold_condition(space, map, r_grid, t_grid, form, sampling);
    ClassificationReport::assemble(space, map, def, vec![c1, c2], t_grid, r_grid, pairs.len())
}

/// Largest N tried in the iterate-depth search on sampled carriers.
pub const N_CAP_SAMPLED: usize = 50;

pub fn m_contractive_check(
    space: &FuzzySpace,
    map: &SelfMap,
    params: MParams,
    psi: Option<&Gauge>,
    r_grid: &[f64],
    t_grid: &[f64],
    sampling: &PairSampling,
) -> ClassificationReport {
    const DEF: &str = "m-contractive";
    if let Err(e) = map.validate(&space.carrier) {
        return ClassificationReport::precondition_failed(space, map, DEF, e.to_string());
    }
    let mv = |x: f64, y: f64, t: f64| m_value(space, map, params, x, y, t).unwrap_or(f64::NAN);
    let pairs = sampling.base_pairs(space);
    let c1 = strict_condition(
        "strict improvement over m-value",
        space,
        map,
        &pairs,
        t_grid,
        mv,
    );
    let mut conditions = vec![c1];
    match psi {
        Some(psi) => {
            let cert = class_membership_default(psi, ClassTag::Psi1);
            let mut cg = ConditionReport::new(
                "gauge in Psi1",
                match cert.verdict {
                    MembershipVerdict::Member => Verdict::Satisfied,
                    MembershipVerdict::NonMember => Verdict::Violated,
                    MembershipVerdict::Inconclusive => Verdict::Inconclusive,
                },
            );
            cg.note = Some(format!("{} on the default r-grid", psi.name()));
            conditions.push(cg);
            let found = par::map(&pairs, |&(x, y)| {
                t_grid
                    .iter()
                    .map(|&t| {
                        let lhs = image_nearness(space, map, x, y, t);
                        let rhs = psi_at(psi, mv(x, y, t));
                        (lhs - rhs, Witness::Pair { x, y, t, lhs, rhs })
                    })
                    .min_by(worst_slack)
            });
            let mut c = ConditionReport::new("gauge bound over m-value", Verdict::Satisfied);
            let mut min_slack = f64::INFINITY;
            for (slack, w) in found.into_iter().flatten() {
                if !(slack >= -CMP_TOL) && c.witness.is_none() {
                    c.verdict = Verdict::Violated;
                    c.witness = Some(w);
                }
                if !(slack >= min_slack) {
                    min_slack = slack;
                }
            }
            c.margin = Some(min_slack);
            c.note = Some(format!(
                "M(Tx,Ty,t) >= {}(m(x,y,t)) - {CMP_TOL}",
                psi.name()
            ));
            conditions.push(c);
        }
        None => conditions.push(iterate_threshold_condition(
            space, map, params, r_grid, t_grid, sampling,
        )),
    }
    ClassificationReport::assemble(space, map, DEF, conditions, t_grid, r_grid, pairs.len())
}

/// m(T^N x, T^N y, t) > 1 - rho implies M(T^{N+1} x, T^{N+1} y, t) >= 1 - r,
/// searching the smallest N per (r, t).
fn iterate_threshold_condition(
    space: &FuzzySpace,
    map: &SelfMap,
    params: MParams,
    r_grid: &[f64],
    t_grid: &[f64],
    sampling: &PairSampling,
) -> ConditionReport {
    let finite = space.carrier.is_finite();
    let cap = if finite {
        space.carrier.points.len()
    } else {
        N_CAP_SAMPLED
    };
    let base = sampling.base_pairs(space);
    let iterate = |p: &(f64, f64)| {
        (
            map.eval(p.0).unwrap_or(f64::NAN),
            map.eval(p.1).unwrap_or(f64::NAN),
        )
    };
    let per_t = par::map(t_grid, |&t| {
        let mv = |x, y| m_value(space, map, params, x, y, t).unwrap_or(f64::NAN);
        let e = |x, y| image_nearness(space, map, x, y, t);
        r_grid
            .iter()
            .map(|&r| {
                let r = clamp_open_unit(r);
                let mut pairs = sampling.probes(space, 1.0 - r, mv);
                pairs.extend_from_slice(&base);
                let mut last = None;
                for n in 0..=cap {
                    let samples = evaluate(&pairs, mv, e);
                    match rho_for(&samples, r, CmForm::Onesided, finite) {
                        Ok(rho) => return (t, r, Ok((rho, n))),
                        Err(err) => last = Some((n, err)),
                    }
                    pairs = pairs.iter().map(iterate).collect();
                }
                let (n, err) = last.expect("at least one depth tried");
                (t, r, Err((n, err)))
            })
            .collect::<Vec<_>>()
    });
    let mut c = ConditionReport::new("threshold implication over iterates", Verdict::Satisfied);
    for (t, r, res) in per_t.into_iter().flatten() {
        match res {
            Ok((rho, n)) => c.rho.push(RhoRecord {
                t,
                r,
                rho: Some(rho),
                n: Some(n),
            }),
            Err((n, (v, pairs))) => {
                c.rho.push(RhoRecord {
                    t,
                    r,
                    rho: None,
                    n: None,
                });
                if c.witness.is_none() {
                    c.witness = Some(Witness::Threshold {
                        r,
                        t,
                        n: Some(n),
                        pairs,
                    });
                }
                c.verdict = c.verdict.and(v);
            }
        }
    }
    c.note = Some(format!("iterate depth searched up to {cap}"));
    c
}
