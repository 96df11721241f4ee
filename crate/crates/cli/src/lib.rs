//! Command-line front end: `evaluate`, `meta`, `plotdata` and `simulate`.
//!
//! Exit codes: 0 on success, 1 on validation or configuration errors,
//! 2 on I/O errors.

pub mod cli;
pub mod commands;

pub use cli::{execute, run, Cli, Command, Flags};
pub use commands::{
    cmd_evaluate, cmd_meta, cmd_plotdata, cmd_simulate, EvalPool, EvaluationRequest, LagChoice,
    MetaRequest,
};
