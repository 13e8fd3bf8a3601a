//! The graphical representation: Poisson death clocks on sites and arrow
//! clocks on directed edges of `Z_M`, materialized over a finite
//! space-time window.

mod config;
mod front;
mod json;
mod log;

pub use config::{SimConfig, MAX_RANGE};
pub use front::InfluenceFront;
pub use log::{build_event_log, masked_view, EdgeMask, Event, EventKind, EventLog, LogView};
