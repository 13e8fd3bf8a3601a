//! Space-time points that control subsequent edges, the break-point
//! sequence of the right edge, and the restart chain.

mod cse;
mod estimate;
mod psi;
mod restart;

pub use cse::{cse_violation_naive, is_cse, BandEvaluator, CseOutcome};
pub use psi::{
    increments, psi_sequence, psi_sequence_with, BreakPoint, BreakPointSeries, Evaluator, IncrementSample,
    PsiOptions,
};
pub use restart::{restart_construction, restart_construction_with, RestartRecord};
pub use estimate::{cse_probability, increment_study, restart_sample, CseEstimate, IncrementStudy, RestartSample};
