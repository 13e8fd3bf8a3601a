//! Oriented site percolation on `{(y, n) : y + n even}` with independent
//! or one-dependent site fields.
//!
//! Windows are sized from the largest row so that no run from the allowed
//! starts can feel the window edge; only the even-lattice start is
//! truncated, and its rows are exact on a shrinking central region that
//! always covers the light cone of the origin.

mod events;
mod experiments;
mod field;
mod run;

pub use events::{density_deficit, extinction_and_speed_events, row_sites, scan_consecutive_runs, DeficitVariant};
pub use experiments::{
    decay_table, deficit_counts, extinction_counts, scan_counts, write_decay_csv, DecayRow, DeficitRaw, DeficitSpec,
    ScanSpec,
};
pub use field::{gen_field, FieldMode, PercConfig, PercField};
pub use run::{coupling_identity_check, evolve_percolation, origin_run, PercRun, PercStart};
