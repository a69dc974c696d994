//! Command-line front end for `treedeg`.
//!
//! [`run`] parses a command line, computes, and returns the JSON result
//! document for stdout, any warnings for stderr, and the exit status:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | malformed input or arguments |
//! | 3 | graph disconnected, or a node cannot reach the root |
//! | 4 | numerical failure, or a failed `check` |
//! | 5 | request outside the operation's scope |

// `!(x <= tol)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod graph_file;
pub mod output;

pub use commands::{
    exit_code, run, Outcome, CHECK_ORACLE_CAP, EXIT_CAPABILITY, EXIT_CONNECTIVITY, EXIT_INPUT, EXIT_NUMERICAL,
    EXIT_OK,
};
