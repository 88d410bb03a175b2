//! QCA cell-level bistable simulation with an Akers logic-array
//! processing-in-memory layer.

pub mod akers;
pub mod engine;
pub mod layout;
pub mod metrics;
pub mod params;
pub mod verification;

pub use layout::{CellRole, Geometry, QcaCell, QcaLayout};
pub use params::SimParams;
