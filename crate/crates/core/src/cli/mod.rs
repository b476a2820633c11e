//! Scenario documents, command dispatch and report emission.

mod report;
mod scenario;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use report::{Body, EmpiricalSummary, Report, TraceSummary, REPORT_VERSION};
pub use scenario::{load_scenario, parse_scenario, Scenario, SolverSpec, BUILTIN};

use crate::algebra::{class_membership_default, ClassTag, Gauge, MembershipCertificate};
use crate::contractions::{
    cm_contractive_check, extract_empirical_gauge, m_contractive_check, psi_contractive_check,
    CmForm, FKind, PairSampling,
};
use crate::dynamics::{
    m_cauchy_check, picard_orbit, regularity_check, solve_fixed_point, Route, SolveStatus,
};
use crate::error::{Error, Result};
use crate::grid::parse_grid_spec;
use crate::spaces::axiom_check;
use crate::Verdict;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fuzzycm",
    version,
    about = "Fuzzy metric spaces, contractive gauges and certified Picard iteration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Built-in scenario name (ex61, ex62, ex63) or path to a TOML document.
    #[arg(long, global = true)]
    scenario: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `log:lo:hi:n`, `lin:lo:hi:n` or a comma list.
    #[arg(long, global = true)]
    t_grid: Option<String>,
    #[arg(long, global = true)]
    r_grid: Option<String>,
    /// Tail tolerance for regularity and limit detection.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    #[value(name = "json-like", alias = "json")]
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassifyRoute {
    /// CM with the two-sided band.
    Cm,
    CmOnesided,
    Psi,
    /// m-value contraction, with the scenario psi if one is given.
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Phi1,
    Psi,
    Psi1,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveRoute {
    Auto,
    CmStrong,
    CmGeneral,
    MFinal,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the fuzzy metric axioms and strongness.
    CheckSpace {
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Classify the scenario map.
    ClassifyMap {
        #[arg(long, value_enum, default_value_t = ClassifyRoute::Cm)]
        route: ClassifyRoute,
    },
    /// Certify gauge class membership, or extract the empirical gauge at t.
    Gauge {
        /// Gauge id; defaults to the scenario gauges.
        #[arg(long)]
        gauge: Option<String>,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        empirical_t: Option<f64>,
    },
    /// Picard orbit with regularity and Cauchy diagnostics.
    Iterate {
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
        #[arg(long)]
        max_len: Option<usize>,
        /// Export the trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Audit a fixed point theorem and run it.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
        #[arg(long, value_enum)]
        route: Option<SolveRoute>,
    },
    /// Reproduce the worked examples and property suites.
    Paper,
}

/// Exit status and the rendered report (or error message).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: msg.into(),
        }
    }
}

/// Parse argv (including the program name) and run the command.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: EXIT_PASS,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Outcome::usage(text),
            };
        }
    };
    let report = match dispatch(&cli) {
        Ok(r) => r,
        Err(
            e @ (Error::Schema(_)
            | Error::UnknownId { .. }
            | Error::Invalid(_)
            | Error::Io(_)
            | Error::NotInCarrier(_)),
        ) => {
            return Outcome::usage(format!("error: {e}\n"));
        }
        Err(e) => {
            return Outcome {
                code: EXIT_FAIL,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let text = match cli.common.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    let code = if report.passed { EXIT_PASS } else { EXIT_FAIL };
    match &cli.common.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => Outcome::usage(format!("error: cannot write {}: {e}\n", path.display())),
        },
        None => Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

fn scenario(common: &Common) -> Result<Scenario> {
    let name = common
        .scenario
        .as_deref()
        .ok_or_else(|| Error::Invalid("this command needs --scenario".into()))?;
    let mut s = load_scenario(name)?;
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(spec) = &common.t_grid {
        s.t_grid = parse_grid_spec(spec)?;
        if let Some(t) = s.t_grid.iter().find(|t| !(**t > 0.0)) {
            return Err(Error::Invalid(format!(
                "--t-grid: t must be positive, got {t}"
            )));
        }
    }
    if let Some(spec) = &common.r_grid {
        s.r_grid = parse_grid_spec(spec)?;
        if let Some(r) = s.r_grid.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::Invalid(format!(
                "--r-grid: r must lie in (0,1), got {r}"
            )));
        }
    }
    if let Some(tol) = common.tolerance {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Invalid(format!(
                "--tolerance must lie in (0,1), got {tol}"
            )));
        }
        s.solver.tail_tolerance = Some(tol);
    }
    Ok(s)
}

fn certificate(g: &Gauge, tag: ClassTag) -> MembershipCertificate {
    class_membership_default(g, tag)
}

fn dispatch(cli: &Cli) -> Result<Report> {
    let c = &cli.common;
    let (command, scenario) = match &cli.command {
        Command::Paper => ("paper", None),
        Command::CheckSpace { .. } => ("check-space", Some(scenario(c)?)),
        Command::ClassifyMap { .. } => ("classify-map", Some(scenario(c)?)),
        Command::Gauge { .. } => ("gauge", Some(scenario(c)?)),
        Command::Iterate { .. } => ("iterate", Some(scenario(c)?)),
        Command::Solve { .. } => ("solve", Some(scenario(c)?)),
    };
    let seed = scenario.as_ref().map_or(c.seed.unwrap_or(0), |s| s.seed);
    let (passed, body) = match (&cli.command, scenario.as_ref()) {
        (Command::Paper, _) => {
            let suites = crate::suites::run_all(seed);
            (suites.iter().all(|s| s.passed), Body::Paper { suites })
        }
        (Command::CheckSpace { samples }, Some(s)) => {
            let axioms = axiom_check(&s.space, *samples, &s.t_grid, s.seed);
            let strong_ok = !s.space.strong || axioms.strong_verdict() == Verdict::Satisfied;
            (
                axioms.is_fuzzy_metric() && strong_ok,
                Body::Space { axioms },
            )
        }
        (Command::ClassifyMap { route }, Some(s)) => {
            let sampling = PairSampling::with_seed(s.seed);
            let report = match route {
                ClassifyRoute::Cm => cm_contractive_check(
                    &s.space,
                    &s.map,
                    &s.r_grid,
                    &s.t_grid,
                    CmForm::Between,
                    &sampling,
                ),
                ClassifyRoute::CmOnesided => cm_contractive_check(
                    &s.space,
                    &s.map,
                    &s.r_grid,
                    &s.t_grid,
                    CmForm::Onesided,
                    &sampling,
                ),
                ClassifyRoute::Psi => {
                    let psi = s
                        .psi
                        .as_ref()
                        .ok_or_else(|| Error::Invalid("route psi needs gauges.psi".into()))?;
                    psi_contractive_check(&s.space, &s.map, psi, &s.t_grid, &sampling)
                }
                ClassifyRoute::M => {
                    let p = s
                        .params
                        .ok_or_else(|| Error::Invalid("route m needs gauges.params".into()))?;
                    m_contractive_check(
                        &s.space,
                        &s.map,
                        p,
                        s.psi.as_ref(),
                        &s.r_grid,
                        &s.t_grid,
                        &sampling,
                    )
                }
            };
            (report.is_satisfied(), Body::Classification { report })
        }
        (
            Command::Gauge {
                gauge,
                class,
                empirical_t,
            },
            Some(s),
        ) => {
            let mut certs = Vec::new();
            let class = class.map(|c| match c {
                ClassArg::Phi1 => ClassTag::Phi1,
                ClassArg::Psi => ClassTag::Psi,
                ClassArg::Psi1 => ClassTag::Psi1,
                ClassArg::H => ClassTag::H,
            });
            match gauge {
                Some(id) => {
                    let g = Gauge::from_id(id)?;
                    let tags = match (class, g.tag()) {
                        (Some(t), _) => vec![t],
                        (None, crate::algebra::DomainTag::PhiStyle) => vec![ClassTag::Phi1],
                        (None, crate::algebra::DomainTag::PsiStyle) => {
                            vec![ClassTag::Psi, ClassTag::Psi1]
                        }
                        (None, crate::algebra::DomainTag::EtaStyle) => vec![ClassTag::H],
                    };
                    certs.extend(tags.into_iter().map(|t| certificate(&g, t)));
                }
                None => {
                    if let Some(psi) = &s.psi {
                        for t in [ClassTag::Psi, ClassTag::Psi1] {
                            if class.is_none_or(|c| c == t) {
                                certs.push(certificate(psi, t));
                            }
                        }
                    }
                    if let Some(phi) = &s.phi {
                        if class.is_none_or(|c| c == ClassTag::Phi1) {
                            certs.push(certificate(phi, ClassTag::Phi1));
                        }
                    }
                    if let Some(eta) = &s.eta {
                        if class.is_none_or(|c| c == ClassTag::H) {
                            certs.push(certificate(eta.gauge(), ClassTag::H));
                        }
                    }
                }
            }
            let empirical = match empirical_t {
                Some(t) => {
                    let kind = s.params.map_or(FKind::Plain, FKind::MGeneralized);
                    let g = extract_empirical_gauge(
                        &s.space,
                        &s.map,
                        kind,
                        *t,
                        &PairSampling::with_seed(s.seed),
                    )?;
                    Some(EmpiricalSummary::from(&g))
                }
                None => None,
            };
            if certs.is_empty() && empirical.is_none() {
                return Err(Error::Invalid(
                    "no gauge given and the scenario declares none".into(),
                ));
            }
            let passed = certs.iter().all(|c| c.is_member())
                && empirical.as_ref().is_none_or(|e| e.certificate.is_member());
            (
                passed,
                Body::Gauge {
                    certificates: certs,
                    empirical,
                },
            )
        }
        (Command::Iterate { x0, max_len, csv }, Some(s)) => {
            let cfg = s.solver_config();
            let x0 = x0
                .or(s.solver.x0)
                .ok_or_else(|| Error::Invalid("give --x0 or solver.x0".into()))?;
            let trace = picard_orbit(
                &s.space,
                &s.map,
                x0,
                &s.t_grid,
                max_len.unwrap_or(cfg.max_len),
                cfg.stop_tolerance,
            )?;
            if let Some(path) = csv {
                let f = std::fs::File::create(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                trace
                    .write_csv(std::io::BufWriter::new(f))
                    .map_err(|e| Error::Io(e.to_string()))?;
            }
            let regularity =
                regularity_check(&s.space, &trace, &s.t_grid, cfg.scales, cfg.tail_tolerance).ok();
            let window = trace.window(trace.len().saturating_sub(cfg.cauchy_window));
            let cauchy = m_cauchy_check(&s.space, &window, &s.r_grid, &s.t_grid);
            let trace = TraceSummary::from(&trace);
            (
                true,
                Body::Iterate {
                    trace,
                    regularity,
                    cauchy,
                },
            )
        }
        (Command::Solve { x0, route }, Some(s)) => {
            let x0 = x0
                .or(s.solver.x0)
                .ok_or_else(|| Error::Invalid("give --x0 or solver.x0".into()))?;
            let route = match route {
                Some(SolveRoute::Auto) => Route::Auto,
                Some(SolveRoute::CmStrong) => Route::CmStrong,
                Some(SolveRoute::CmGeneral) => Route::CmGeneral,
                Some(SolveRoute::MFinal) => Route::MFinal,
                None => s.solver.route,
            };
            let result = solve_fixed_point(&s.space, &s.map, x0, route, &s.solver_config())?;
            let ok = matches!(
                result.status,
                SolveStatus::Converged | SolveStatus::LimitIdentified
            );
            (ok, Body::Solve { result })
        }
        (_, None) => unreachable!("scenario commands load a scenario"),
    };
    Ok(Report {
        version: REPORT_VERSION,
        command: command.into(),
        scenario: scenario.map(|s| s.name),
        seed,
        passed,
        body,
    })
}
