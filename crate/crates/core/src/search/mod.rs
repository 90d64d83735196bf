//! The special-point solver.

mod certify;
mod engine;
mod lemma;
mod moduli;
mod report;
mod solve;

pub use certify::{certify_zero, Certification, IntegerForm, ZeroTest};
pub use engine::{solve_equation, EngineOutput, EngineStats, JESTIMATE_SLACK};
pub use lemma::{verify_equation_bound, verify_equation_bound_with_table, LemmaReport, LemmaSolution};
pub use moduli::{enumerate_singular_moduli, ModuliTable, ModulusEntry, ModulusId, BASE_PREC};
pub use report::{
    format_residual, BoundEcho, CapEcho, DiagonalEcho, InputEcho, PointEcho, SolveReport, UndecidedEcho, REPORT_FORMAT,
};
pub use solve::{
    check_point, solve, solve_with_table, with_threads, CapChoice, CapSource, PointCheck, Solution, SolveOptions,
    SolveStats, SolveStatus, SpecialPoint, UndecidedTuple, DEFAULT_REFUSAL_THRESHOLD,
};
