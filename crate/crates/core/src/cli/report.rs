use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::algebra::{MembershipCertificate, StepEnvelope};
use crate::contractions::{ClassificationReport, EmpiricalGauge, PsiObstruction, Witness};
use crate::dynamics::{
    CauchyCertificate, FixedPointResult, OrbitTrace, RegularityReport, StopReason,
};
use crate::spaces::SpaceAxiomReport;
use crate::suites::SuiteReport;

pub const REPORT_VERSION: u32 = 1;

/// Orbit without the per-t step series (exported separately as CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub x0: f64,
    pub len: usize,
    pub points: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub limits: Vec<f64>,
    pub stop: StopReason,
    pub stabilized: bool,
}

impl From<&OrbitTrace> for TraceSummary {
    fn from(t: &OrbitTrace) -> Self {
        TraceSummary {
            x0: t.x0,
            len: t.len(),
            points: t.points.clone(),
            t_grid: t.t_grid.clone(),
            limits: t.limits.clone(),
            stop: t.stop,
            stabilized: t.stabilized,
        }
    }
}

/// Empirical gauge without its raw samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub t: f64,
    pub samples: usize,
    pub envelope: StepEnvelope,
    pub certificate: MembershipCertificate,
    pub obstruction: Option<PsiObstruction>,
}

impl From<&EmpiricalGauge> for EmpiricalSummary {
    fn from(g: &EmpiricalGauge) -> Self {
        EmpiricalSummary {
            t: g.t,
            samples: g.samples.len(),
            envelope: g.envelope.clone(),
            certificate: g.certificate.clone(),
            obstruction: g.obstruction.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Space {
        axioms: SpaceAxiomReport,
    },
    Classification {
        report: ClassificationReport,
    },
    Gauge {
        certificates: Vec<MembershipCertificate>,
        empirical: Option<EmpiricalSummary>,
    },
    Iterate {
        trace: TraceSummary,
        regularity: Option<RegularityReport>,
        cauchy: CauchyCertificate,
    },
    Solve {
        result: FixedPointResult,
    },
    Paper {
        suites: Vec<SuiteReport>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub command: String,
    pub scenario: Option<String>,
    pub seed: u64,
    pub passed: bool,
    #[serde(flatten)]
    pub body: Body,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let status = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            o,
            "{} [{}] {status}",
            self.command,
            self.scenario.as_deref().unwrap_or("-")
        );
        match &self.body {
            Body::Space { axioms } => {
                let _ = writeln!(
                    o,
                    "space {} ({} triples, seed {})",
                    axioms.constructor, axioms.triple_samples, axioms.seed
                );
                for c in axioms.checks() {
                    let _ = write!(o, "  {:<12} {}", c.name, c.verdict);
                    if let Some(w) = &c.witness {
                        let _ = write!(
                            o,
                            " at {w:?} values {:?}",
                            c.values.as_deref().unwrap_or(&[])
                        );
                    }
                    let _ = writeln!(o);
                }
                let _ = writeln!(o, "  declared strong: {}", axioms.declared_strong);
            }
            Body::Classification { report } => {
                let _ = writeln!(
                    o,
                    "{} for map {} on {}: {}",
                    report.definition, report.map, report.space, report.verdict
                );
                let _ = writeln!(
                    o,
                    "  {} pairs ({})",
                    report.pairs,
                    if report.exhaustive {
                        "exhaustive"
                    } else {
                        "sampled"
                    }
                );
                for c in &report.conditions {
                    let _ = write!(o, "  {:<40} {}", c.name, c.verdict);
                    if let Some(m) = c.margin {
                        let _ = write!(o, " margin {m:e}");
                    }
                    if !c.rho.is_empty() {
                        let found = c.rho.iter().filter(|r| r.rho.is_some()).count();
                        let _ = write!(o, " rho found {found}/{}", c.rho.len());
                    }
                    let _ = writeln!(o);
                    if let Some(w) = &c.witness {
                        let _ = writeln!(o, "    witness {}", witness_text(w));
                    }
                    if let Some(n) = &c.note {
                        let _ = writeln!(o, "    {n}");
                    }
                }
            }
            Body::Gauge {
                certificates,
                empirical,
            } => {
                for c in certificates {
                    let _ = writeln!(o, "  {} in {:?}: {:?}", c.gauge, c.class_tag, c.verdict);
                    if let Some(w) = &c.witness {
                        let _ = writeln!(o, "    witness {w:?}");
                    }
                }
                if let Some(e) = empirical {
                    let _ = writeln!(
                        o,
                        "  empirical gauge at t = {}: {} samples, {:?} in Psi1",
                        e.t, e.samples, e.certificate.verdict
                    );
                    if let Some(ob) = &e.obstruction {
                        let _ = writeln!(
                            o,
                            "    not in Psi: {} samples with F rising to {} and E at most {}",
                            ob.samples.len(),
                            ob.tau0,
                            ob.tau0
                        );
                    }
                }
            }
            Body::Iterate {
                trace,
                regularity,
                cauchy,
            } => {
                let head: Vec<String> =
                    trace.points.iter().take(6).map(|x| x.to_string()).collect();
                let _ = writeln!(
                    o,
                    "orbit from {}: {} steps, stop {:?}",
                    trace.x0, trace.len, trace.stop
                );
                let _ = writeln!(o, "  {} ...", head.join(", "));
                let _ = writeln!(o, "  last point {}", trace.points[trace.points.len() - 1]);
                if let Some(r) = regularity {
                    let _ = writeln!(
                        o,
                        "  regular on the grid: {}; uniformly: {}",
                        r.plain_verdict(),
                        r.uniform
                    );
                }
                let _ = writeln!(
                    o,
                    "  M-Cauchy on the last {} steps: {:?}",
                    cauchy.prefix_len, cauchy.verdict
                );
            }
            Body::Solve { result } => {
                let _ = writeln!(
                    o,
                    "route {:?} (requested {:?}): {:?}",
                    result.route, result.requested, result.status
                );
                for a in &result.audit {
                    let _ = write!(o, "  {:<20} {} ({:?})", a.name, a.verdict, a.source);
                    if let Some(d) = &a.detail {
                        let _ = write!(o, " {d}");
                    }
                    let _ = writeln!(o);
                    if let Some(w) = &a.witness {
                        let _ = writeln!(o, "    witness {}", witness_text(w));
                    }
                }
                let _ = writeln!(o, "  {}", result.diagnosis);
                if let Some(u) = &result.uniqueness {
                    let _ = writeln!(
                        o,
                        "  fixed points {:?} ({:?}, {} scanned): {}",
                        u.fixed_points, u.source, u.scanned, u.verdict
                    );
                }
            }
            Body::Paper { suites } => {
                for s in suites {
                    let _ = writeln!(
                        o,
                        "suite {} {}",
                        s.name,
                        if s.passed { "PASS" } else { "FAIL" }
                    );
                    for a in &s.assertions {
                        let _ = writeln!(
                            o,
                            "  [{}] {:<36} {}",
                            if a.passed { "ok" } else { "FAIL" },
                            a.id,
                            a.certifies
                        );
                        if !a.passed {
                            let _ = writeln!(
                                o,
                                "      expected {} observed {}",
                                a.expected, a.observed
                            );
                        }
                    }
                }
            }
        }
        o
    }
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Pair { x, y, t, lhs, rhs } => {
            format!("pair ({x}, {y}) at t = {t}: {lhs:e} vs {rhs:e}")
        }
        Witness::Threshold { r, t, n, pairs } => {
            let mut s = format!("r = {r}, t = {t}");
            if let Some(n) = n {
                let _ = write!(s, ", depth {n}");
            }
            if let Some(p) = pairs.first() {
                let _ = write!(s, ", closest pair {p:?}");
            }
            s
        }
    }
}
