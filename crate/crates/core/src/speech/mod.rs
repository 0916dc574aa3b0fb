//! Classical intrusive speech-enhancement measures.

mod bands;
mod dllr;
mod fwsnrseg;
mod lpc;

pub use bands::{band_edges, critical_band_energies, magnitude_spectrum};
pub use dllr::{dllr, llr_frame, mean_capped_llr, DllrParams, LLR_CAP};
pub use fwsnrseg::{fwsnrseg, FwSnrSegParams};
pub use lpc::{autocorrelation, lpc, quadratic_form, Lpc};
