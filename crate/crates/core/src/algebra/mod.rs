//! Triangular norms, gauge functions and grid certification of gauge classes.

mod gauge;
mod membership;
mod tnorm;

pub use gauge::{DomainTag, Gauge, GaugeKind, Generator, StepEnvelope};
pub use membership::{
    class_membership, class_membership_default, BandFailure, ClassTag, GridBound, Jump,
    MembershipCertificate, MembershipVerdict, MembershipWitness,
};
pub use tnorm::{tnorm_axiom_check, AxiomCheck, TNorm, TNormAxiomReport, TNormKind};
