//! Bistable-approximation simulation engine.

mod clock;
mod coupling;
mod schedule;
mod sim;

pub use clock::{clock_value, hold_centre_offset};
pub use coupling::{
    adjacent_kink_energy, kink_energy, precompute_couplings, CouplingTable, ELEMENTARY_CHARGE,
    VACUUM_PERMITTIVITY,
};
pub use schedule::{InputSchedule, MAX_SCHEDULE_INPUTS};
pub use sim::{
    bistable_response, format_sig, relax, simulate, SWEEP_WEIGHT, Relaxation, Simulator, TraceScope, TraceSet,
};

use thiserror::Error;

use crate::layout::Diagnostic;
use crate::params::ParamError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("cells {0} and {1} are coincident")]
    CoincidentCells(usize, usize),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("schedule labels {found:?} do not match layout inputs {expected:?}")]
    LabelMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid layout: {0:?}")]
    InvalidLayout(Vec<Diagnostic>),
    #[error("thread pool: {0}")]
    Threads(String),
}
