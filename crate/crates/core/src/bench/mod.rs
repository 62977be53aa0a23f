//! Synthetic tracking and timing experiments with machine-readable reports.

mod config;
mod layout;
mod report;
mod simulate;
mod trials;

pub use config::{Layout, TrajectorySpec, TrialConfig};
pub use layout::{planar10, random_layout};
pub use report::{ReportFormat, TimingRow, TrialReport};
pub use simulate::{simulate_frames, Frame};
pub use trials::{run_error_trial, run_timing_trial, run_tracking_loop, TimingTrialConfig};
