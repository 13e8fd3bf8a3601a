//! Contact processes driven by a shared event log.
//!
//! All processes evolved on one log are coupled: they see the same deaths
//! and arrows, which makes additivity and monotonicity hold exactly per
//! realization.

mod engine;
mod events;
mod survival;
mod trajectory;

pub use engine::{lockstep, Cut, EventKey, Process, StepOutcome, Transition, TransitionKind};
pub use events::{
    agreement_on_set, bootstrap_event, endpoint_equality, endpoint_equality_with, shape_agreement,
    AgreementReport, EndpointReport, EndpointSample,
};
pub use survival::{right_edge_sample, EdgeSample, survival_estimate, survival_outcome, survival_sweep, SurvivalOutcome, SurvivalSweep, SweepPoint};
pub use trajectory::{evolve, evolve_family, evolve_from, Configuration, Trajectory};

pub(crate) use survival::{horizon_note, tally};
