//! Command implementations behind the `sparsify` binary.
//!
//! Every command reads graph files, runs one pipeline, writes its output
//! graph and returns a [`RunReport`] whose certified claims have been
//! recomputed from the written files.

pub mod commands;
pub mod error;
pub mod graph_file;
pub mod report;

pub use commands::{
    check_report, cmd_algconn, cmd_sparsify_patch, cmd_ultra, cmd_verify, read_graph,
    write_graph, write_trace_csv,
};
pub use error::{CliError, CliResult};
pub use report::RunReport;
