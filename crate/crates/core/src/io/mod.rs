//! Configuration files, binary snapshots and text reports.

pub mod config;
pub mod report;
pub mod snapshot;

pub use config::{parse_config, Equation, RunConfig};
pub use report::{export_report, render_table, Cell, Table, Tabular};
pub use snapshot::{snapshot_roundtrip, SnapshotFile, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
