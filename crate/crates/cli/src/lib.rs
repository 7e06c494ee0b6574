//! Library surface of the `infolim` binary: scenario loading, the report
//! model with its provenance registry, the subcommand implementations, and
//! grid sweeps. Kept as a lib so integration tests can drive the pieces
//! directly.

pub mod commands;
pub mod report;
pub mod scenario;
pub mod sweep;
