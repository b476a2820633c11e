//! Picard orbits and their asymptotic diagnostics.

mod cauchy;
mod orbit;
mod regularity;
mod solver;

pub use cauchy::{
    cauchy_criterion_check, g_cauchy_check, g_cauchy_check_with, m_cauchy_check, CauchyCertificate,
    CauchyEntry, CauchyKind, CauchyVerdict, CauchyWitness, CriterionEntry, CriterionReport,
    CriterionWitness,
};
pub use orbit::{picard_orbit, OrbitTrace, StopReason, DEFAULT_MAX_LEN, DEFAULT_STOP_TOLERANCE};
pub use regularity::{
    regularity_check, PlainRegularity, RegularityReport, ScaleSequence, DECAY_RATIO, DEFAULT_I_MAX,
    DEFAULT_TAIL_TOLERANCE,
};
pub use solver::{
    solve_fixed_point, AuditItem, AuditSource, FixedPointResult, Route, SolveStatus, SolverConfig,
    Uniqueness,
};
