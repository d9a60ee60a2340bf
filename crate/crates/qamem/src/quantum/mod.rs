//! States, channels, Choi representations and measurements.

mod channel;
mod choi;
mod povm;
mod state;

pub use channel::{CptpReport, FixedPointRun, KrausChannel};
pub use choi::{choi_of, ChoiMatrix};
pub use povm::{square_root_measurement, MeasureOutcome, Povm};
pub use state::{trace_distance_mat, DensityOperator, DEFAULT_TOL};
