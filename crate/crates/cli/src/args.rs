//! Command-line arguments.

use std::path::PathBuf;

use clap::Parser;
use metacheck_core::unify::DEFAULT_MAX_STEPS;

use crate::driver::Options;

/// Elaborates and checks the declarations of a `.tog` file.
///
/// Exit status: 0 all checks succeed, 1 some check is ill-typed, 2 some
/// check has unsolved constraints, 3 syntax, scope or IO error.
#[derive(Debug, Parser)]
#[command(name = "metacheck", version)]
pub struct Cli {
    /// Source file to check.
    pub file: PathBuf,
    /// Print the fresh metas, constraints and elaborated term of each check.
    #[arg(long)]
    pub dump_elaboration: bool,
    /// Print the instantiations found and the resulting term.
    #[arg(long)]
    pub dump_solution: bool,
    /// Print one line per solver event.
    #[arg(long)]
    pub trace_unify: bool,
    /// Bound on solver steps per check.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// Re-check solutions against the declarative rules.
    #[arg(long)]
    pub verify: bool,
}

impl Cli {
    pub fn options(&self) -> Options {
        Options {
            dump_elaboration: self.dump_elaboration,
            dump_solution: self.dump_solution,
            trace_unify: self.trace_unify,
            max_steps: self.max_steps,
            verify: self.verify,
        }
    }
}
