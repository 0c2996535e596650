//! Presets, bound queries and see-saw runs on the command line.

pub mod anchors;
pub mod commands;
pub mod inputs;
pub mod presets;
pub mod properties;
pub mod report;

pub use anchors::Anchors;
pub use presets::{run as run_preset, PRESETS};
pub use report::{Cell, Check, PresetReport, Verdict};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const ANCHOR_FAILURE: i32 = 3;
}
