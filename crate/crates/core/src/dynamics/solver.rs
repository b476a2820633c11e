use serde::{Deserialize, Serialize};

use super::regularity::defect_verdict;
use super::{
    m_cauchy_check, picard_orbit, regularity_check, CauchyCertificate, OrbitTrace, ScaleSequence,
    StopReason, DEFAULT_MAX_LEN, DEFAULT_STOP_TOLERANCE, DEFAULT_TAIL_TOLERANCE,
};
use crate::algebra::Gauge;
use crate::contractions::{
    cm_contractive_check, m_contractive_check, ClassificationReport, CmForm, MParams, PairSampling,
    SelfMap, Witness,
};
use crate::error::Result;
use crate::grid::{default_r_grid, default_t_grid};
use crate::spaces::{axiom_check, FuzzySpace};
use crate::Verdict;

/// Random triples used when sampling strongness for the audit.
const STRONG_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Auto,
    CmStrong,
    CmGeneral,
    MFinal,
}

impl Route {
    pub fn from_id(id: &str) -> Option<Route> {
        Some(match id {
            "auto" => Route::Auto,
            "cm-strong" | "cm_strong" => Route::CmStrong,
            "cm-general" | "cm_general" => Route::CmGeneral,
            "m-final" | "m_final" => Route::MFinal,
            _ => return None,
        })
    }
}

/// Where an audit verdict comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditSource {
    Declared,
    Sampled,
    Exhaustive,
    /// Holds trivially, e.g. continuity of any map on a finite carrier.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditItem {
    pub name: String,
    pub verdict: Verdict,
    pub source: AuditSource,
    pub detail: Option<String>,
    pub witness: Option<Witness>,
}

impl AuditItem {
    fn new(name: &str, verdict: Verdict, source: AuditSource) -> Self {
        AuditItem {
            name: name.into(),
            verdict,
            source,
            detail: None,
            witness: None,
        }
    }

    fn from_classification(name: &str, rep: &ClassificationReport) -> Self {
        let source = if rep.exhaustive {
            AuditSource::Exhaustive
        } else {
            AuditSource::Sampled
        };
        let mut item = AuditItem::new(name, rep.verdict, source);
        if let Some(c) = rep.conditions.iter().find(|c| !c.verdict.is_satisfied()) {
            item.detail = Some(format!("{}: {}", c.name, c.verdict));
            item.witness = c.witness.clone();
        }
        item
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub t_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub max_len: usize,
    pub stop_tolerance: f64,
    pub tail_tolerance: f64,
    pub scales: ScaleSequence,
    /// Exponents of the m-value, needed by the final route.
    pub params: Option<MParams>,
    pub psi: Option<Gauge>,
    /// Declared continuity of the map; None means undeclared.
    pub continuity: Option<bool>,
    /// Trailing points certified M-Cauchy.
    pub cauchy_window: usize,
    pub sampling: PairSampling,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            t_grid: default_t_grid(),
            r_grid: default_r_grid(),
            max_len: DEFAULT_MAX_LEN,
            stop_tolerance: DEFAULT_STOP_TOLERANCE,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            scales: ScaleSequence::default(),
            params: None,
            psi: None,
            continuity: None,
            cauchy_window: 400,
            sampling: PairSampling::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// The orbit reached an exact fixed point.
    Converged,
    /// The orbit approaches a carrier point z with T z = z.
    LimitIdentified,
    /// No limit could be named on the computed prefix.
    Truncated,
    PreconditionFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uniqueness {
    pub verdict: Verdict,
    pub source: AuditSource,
    /// Carrier points with T z = z found by the scan.
    pub fixed_points: Vec<f64>,
    pub scanned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub requested: Route,
    /// None when auto found no route whose preconditions hold.
    pub route: Option<Route>,
    pub status: SolveStatus,
    pub z: Option<f64>,
    /// Index of the first orbit point equal to z, or the prefix length if z is only approached.
    pub iterations: usize,
    /// max over t of 1 - M(z, T z, t).
    pub residual: Option<f64>,
    /// min over t of M(x_L, z, t).
    pub closeness: Option<f64>,
    pub uniqueness: Option<Uniqueness>,
    pub audit: Vec<AuditItem>,
    pub cauchy: Option<CauchyCertificate>,
    pub trace_len: usize,
    pub diagnosis: String,
}

impl FixedPointResult {
    pub fn audit_passed(&self) -> bool {
        self.audit.iter().all(|a| a.verdict.is_satisfied())
    }
}

struct Auditor<'a> {
    space: &'a FuzzySpace,
    map: &'a SelfMap,
    trace: &'a OrbitTrace,
    config: &'a SolverConfig,
}

impl Auditor<'_> {
    fn complete(&self) -> AuditItem {
        AuditItem::new(
            "complete",
            Verdict::from_bool(self.space.complete),
            AuditSource::Declared,
        )
    }

    fn strong(&self) -> Vec<AuditItem> {
        let declared = AuditItem::new(
            "strong (declared)",
            Verdict::from_bool(self.space.strong),
            AuditSource::Declared,
        );
        let rep = axiom_check(
            self.space,
            STRONG_SAMPLES,
            &self.config.t_grid,
            self.config.sampling.seed,
        );
        let source = if self.space.carrier.is_finite() {
            AuditSource::Exhaustive
        } else {
            AuditSource::Sampled
        };
        let sampled = AuditItem::new("strong", rep.strong_verdict(), source);
        vec![declared, sampled]
    }

    fn cm(&self) -> AuditItem {
        let c = &self.config;
        let rep = cm_contractive_check(
            self.space,
            self.map,
            &c.r_grid,
            &c.t_grid,
            CmForm::Between,
            &c.sampling,
        );
        AuditItem::from_classification("cm-contractive", &rep)
    }

    fn uniform(&self) -> AuditItem {
        let c = &self.config;
        match regularity_check(
            self.space,
            self.trace,
            &c.t_grid,
            c.scales,
            c.tail_tolerance,
        ) {
            Ok(rep) => {
                let mut item =
                    AuditItem::new("uniformly regular", rep.uniform, AuditSource::Sampled);
                item.detail = Some(rep.note);
                item
            }
            Err(e) => {
                let mut item = AuditItem::new(
                    "uniformly regular",
                    Verdict::Inconclusive,
                    AuditSource::Sampled,
                );
                item.detail = Some(e.to_string());
                item
            }
        }
    }

    fn m_conditions(&self) -> AuditItem {
        let c = &self.config;
        match c.params {
            Some(p) => {
                let rep = m_contractive_check(
                    self.space,
                    self.map,
                    p,
                    c.psi.as_ref(),
                    &c.r_grid,
                    &c.t_grid,
                    &c.sampling,
                );
                AuditItem::from_classification("m-contractive", &rep)
            }
            None => {
                let mut item = AuditItem::new(
                    "m-contractive",
                    Verdict::Inconclusive,
                    AuditSource::Declared,
                );
                item.detail = Some("no m-value exponents configured".into());
                item
            }
        }
    }

    fn continuity(&self) -> AuditItem {
        if self.space.carrier.is_finite() {
            AuditItem::new("continuous", Verdict::Satisfied, AuditSource::Vacuous)
        } else {
            let v = match self.config.continuity {
                Some(b) => Verdict::from_bool(b),
                None => Verdict::Inconclusive,
            };
            AuditItem::new("continuous", v, AuditSource::Declared)
        }
    }

    fn route(&self, route: Route) -> Vec<AuditItem> {
        let mut items = vec![self.complete()];
        match route {
            Route::CmStrong => {
                items.extend(self.strong());
                items.push(self.cm());
            }
            Route::CmGeneral => {
                items.push(self.cm());
                items.push(self.uniform());
            }
            Route::MFinal => {
                items.push(self.m_conditions());
                items.push(self.continuity());
                items.push(self.uniform());
            }
            Route::Auto => unreachable!("auto is resolved first"),
        }
        items
    }
}

fn passed(items: &[AuditItem]) -> bool {
    items.iter().all(|a| a.verdict.is_satisfied())
}

/// Carrier points with T z = z; exhaustive on finite carriers, over the sample points otherwise.
fn scan_fixed_points(space: &FuzzySpace, map: &SelfMap) -> Uniqueness {
    let pts = &space.carrier.points;
    let fixed: Vec<f64> = pts
        .iter()
        .copied()
        .filter(|&z| map.eval(z).is_ok_and(|w| w == z))
        .collect();
    let source = if space.carrier.is_finite() {
        AuditSource::Exhaustive
    } else {
        AuditSource::Sampled
    };
    let verdict = match (fixed.len(), source) {
        (1, AuditSource::Exhaustive) => Verdict::Satisfied,
        (1, _) => Verdict::Inconclusive,
        (0, _) => Verdict::Inconclusive,
        _ => Verdict::Violated,
    };
    Uniqueness {
        verdict,
        source,
        fixed_points: fixed,
        scanned: pts.len(),
    }
}

/// 1 - min over t of M(x_n, z, t) along the trace.
fn approach_defects(space: &FuzzySpace, trace: &OrbitTrace, z: f64, t_grid: &[f64]) -> Vec<f64> {
    trace
        .points
        .iter()
        .map(|&x| {
            1.0 - t_grid
                .iter()
                .map(|&t| space.nearness(x, z, t))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Audit the route's hypotheses, iterate from x0 and name the fixed point.
pub fn solve_fixed_point(
    space: &FuzzySpace,
    map: &SelfMap,
    x0: f64,
    route: Route,
    config: &SolverConfig,
) -> Result<FixedPointResult> {
    let trace = picard_orbit(
        space,
        map,
        x0,
        &config.t_grid,
        config.max_len,
        config.stop_tolerance,
    )?;
    let auditor = Auditor {
        space,
        map,
        trace: &trace,
        config,
    };
    let (chosen, audit) = match route {
        Route::Auto => {
            let mut last = Vec::new();
            let mut chosen = None;
            let order = if space.strong {
                [Route::CmStrong, Route::MFinal]
            } else {
                [Route::CmGeneral, Route::MFinal]
            };
            for r in order {
                last = auditor.route(r);
                if passed(&last) {
                    chosen = Some(r);
                    break;
                }
            }
            (chosen, last)
        }
        r => (Some(r), auditor.route(r)),
    };
    let mut result = FixedPointResult {
        requested: route,
        route: chosen,
        status: SolveStatus::PreconditionFailed,
        z: None,
        iterations: trace.len(),
        residual: None,
        closeness: None,
        uniqueness: None,
        audit,
        cauchy: None,
        trace_len: trace.len(),
        diagnosis: String::new(),
    };
    if chosen.is_none() || !result.audit_passed() {
        let failed: Vec<&str> = result
            .audit
            .iter()
            .filter(|a| !a.verdict.is_satisfied())
            .map(|a| a.name.as_str())
            .collect();
        result.diagnosis = format!("preconditions not met: {}", failed.join(", "));
        return Ok(result);
    }

    let start = trace.len().saturating_sub(config.cauchy_window);
    result.cauchy = Some(m_cauchy_check(
        space,
        &trace.window(start),
        &config.r_grid,
        &config.t_grid,
    ));
    let uniq = scan_fixed_points(space, map);

    let z = if trace.stabilized {
        result.status = SolveStatus::Converged;
        Some(trace.last())
    } else {
        // the candidate the orbit decays towards, closest at the end
        let best = uniq
            .fixed_points
            .iter()
            .map(|&z| (z, approach_defects(space, &trace, z, &config.t_grid)))
            .filter(|(_, d)| defect_verdict(d, config.tail_tolerance).is_satisfied())
            .min_by(|a, b| a.1[a.1.len() - 1].total_cmp(&b.1[b.1.len() - 1]))
            .map(|(z, _)| z);
        result.status = if best.is_some() {
            SolveStatus::LimitIdentified
        } else {
            SolveStatus::Truncated
        };
        best
    };
    if let Some(z) = z {
        result.iterations = trace
            .points
            .iter()
            .position(|&x| x == z)
            .unwrap_or(trace.len());
        let tz = map.eval(z)?;
        let mut residual = 0.0f64;
        let mut closeness = f64::INFINITY;
        for &t in &config.t_grid {
            residual = residual.max(1.0 - space.m(z, tz, t)?);
            closeness = closeness.min(space.m(trace.last(), z, t)?);
        }
        result.residual = Some(residual);
        result.closeness = Some(closeness);
        result.diagnosis = match result.status {
            SolveStatus::Converged => format!("orbit reached the fixed point {z} after {} steps", result.iterations),
            _ => format!(
                "orbit approaches the fixed point {z}; min over t of M(x_L, z, t) = {closeness} after {} steps",
                trace.len()
            ),
        };
    } else {
        result.diagnosis = match trace.stop {
            StopReason::MaxLen => format!("no limit identified within {} steps", trace.len()),
            _ => format!(
                "orbit settled near {} but no carrier fixed point matches",
                trace.last()
            ),
        };
    }
    result.z = z;
    result.uniqueness = Some(uniq);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{exponential_fuzzy_metric, standard_fuzzy_metric, BaseMetric, Carrier};

    fn ex63() -> (FuzzySpace, SelfMap, SolverConfig) {
        let s = exponential_fuzzy_metric(
            Carrier::finite(&[0.0, 1.0, 2.0, 5.0]).unwrap(),
            BaseMetric::euclidean(),
        );
        let config = SolverConfig {
            params: Some(MParams::new(2.0, 2.0).unwrap()),
            psi: Some(Gauge::power(5.0 / 7.0)),
            ..SolverConfig::default()
        };
        (s, SelfMap::perm_0_1_2_5(), config)
    }

    #[test]
    fn final_route_from_every_start() {
        let (s, t, config) = ex63();
        for x0 in [0.0, 1.0, 2.0, 5.0] {
            let r = solve_fixed_point(&s, &t, x0, Route::MFinal, &config).unwrap();
            assert_eq!(r.status, SolveStatus::Converged, "{:?}", r.audit);
            assert_eq!(r.z, Some(0.0));
            assert_eq!(r.residual, Some(0.0));
            let u = r.uniqueness.unwrap();
            assert_eq!(
                (u.verdict, u.source, u.fixed_points),
                (Verdict::Satisfied, AuditSource::Exhaustive, vec![0.0])
            );
            if x0 == 1.0 {
                assert_eq!(r.iterations, 3);
            }
            assert!(r.cauchy.unwrap().holds());
        }
    }

    #[test]
    fn strong_route_fails_on_cm_with_pair_witness() {
        let (s, t, config) = ex63();
        let r = solve_fixed_point(&s, &t, 1.0, Route::CmStrong, &config).unwrap();
        assert_eq!(r.status, SolveStatus::PreconditionFailed);
        assert!(r.z.is_none());
        let cm = r.audit.iter().find(|a| a.name == "cm-contractive").unwrap();
        assert_eq!(cm.verdict, Verdict::Violated);
        match cm.witness {
            Some(Witness::Pair { x, y, .. }) => assert_eq!((x.min(y), x.max(y)), (0.0, 1.0)),
            ref w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn auto_falls_through_to_final() {
        let (s, t, config) = ex63();
        let r = solve_fixed_point(&s, &t, 5.0, Route::Auto, &config).unwrap();
        assert_eq!(r.route, Some(Route::MFinal));
        assert_eq!(r.z, Some(0.0));
    }

    #[test]
    fn step_map_limit_is_zero() {
        let s = standard_fuzzy_metric(
            Carrier::interval(0.0, 3.0, 61).unwrap(),
            BaseMetric::max_point(),
        );
        let config = SolverConfig {
            max_len: 2000,
            ..SolverConfig::default()
        };
        let r = solve_fixed_point(&s, &SelfMap::phi_step(), 0.7, Route::CmStrong, &config).unwrap();
        assert_eq!(r.status, SolveStatus::LimitIdentified, "{:?}", r.audit);
        assert_eq!(r.z, Some(0.0));
        assert!(r.closeness.unwrap() > 0.9);
    }
}
