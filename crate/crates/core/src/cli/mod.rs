//! Command-line front end: problem files, subcommands and report output.

mod commands;
mod problem;

pub use commands::{
    run, solve_exit_code, Cli, Command, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_UNCERTIFIED, SCHEMA,
};
pub use problem::{
    load_problem, parse_problem, parse_problem_file, FunctionSpec, OmegaSpec, ProblemFile, TermSpec,
};
