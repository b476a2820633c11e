//! Carriers, base metrics and fuzzy metric spaces.

mod axioms;
mod carrier;
mod metric;
mod space;

pub use axioms::{axiom_check, SpaceAxiomReport, CONTINUITY_JUMP_TOL};
pub use carrier::{Carrier, CarrierKind};
pub use metric::{metric_axiom_check, BaseMetric, MetricKind};
pub use space::{
    exponential_fuzzy_metric, standard_fuzzy_metric, FuzzySpace, FuzzyTable, Provenance,
};
