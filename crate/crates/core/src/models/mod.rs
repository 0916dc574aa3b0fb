//! The uniform full-reference measure interface and everything plugged into
//! it: built-in measures, external tools, the two-MOV combiner and the
//! artifacts-only wrapper.

mod adapter;
mod builtin;
mod measure;
mod sa;
mod two_f;

pub use adapter::{run_tool, AdapterConfig, ExternalAdapter, MovToolConfig, ToolOutput};
pub use builtin::{BssMeasure, BssRatioKind, DllrMeasure, FwSnrSegMeasure};
pub use measure::{
    evaluate, ChannelPolicy, ItemContext, Measure, MeasureDescriptor, MeasureResult, Registry,
    RequiredRate, Scale, SourceSet,
};
pub use sa::{sa_wrap, sa_wrap_item, SaWrapped};
pub use two_f::{
    two_f_combine, MappingKind, MovProvider, MovSidecar, MovTool, Movs, TwoFMeasure, TwoFParams,
};
