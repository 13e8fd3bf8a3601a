//! Command-line front end: flat TOML configs, one command per run, and a
//! manifest per run directory that is enough to reproduce every data file.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{increment_summary, run_command, Command, Outcome};
pub use config::{default_table, parse_config, Config};
pub use manifest::{execute, read_manifest, replay, run_dir, sha256_hex, RunManifest, MANIFEST_FILE};
