mod correlate;
mod decompose;
mod measure;

pub use correlate::{cmd_correlate, correlate, CorrelateOutput};
pub use decompose::{cmd_decompose, DecomposeMode, DecomposeOutput};
pub use measure::{cmd_measure, measure_rows, MeasureOutput};
