//! Scheduled template-tuple constructions and their verification.

mod build;
mod lemma_key;
mod schedule;
mod verify;

pub use build::{construction_i, construction_ii, TemplateTuple};
pub use lemma_key::{lemma_key_solve, KeyFunction, PiecewiseConstant, SolveError};
pub use schedule::{build_schedule, Mode, Schedule, ScheduleError};
pub use verify::{
    verify_construction_i, verify_construction_ii, FactorWindow, VerificationReport, WindowReport,
};
