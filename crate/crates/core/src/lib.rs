//! Test case prioritization for CI histories.
//!
//! A static scheduler (Optimal, Worst, seeded Random, or any score-assigning
//! scheduler) produces the initial order of a cycle's tests. The dynamic
//! conditional-probability rescheduler then executes tests one at a time and
//! moves pending tests up or down depending on how they co-failed or
//! co-passed with the executed test over a window of recent cycles.
//!
//! [`replay`] drives the whole experiment against recorded verdict logs and
//! scores every cycle with APFD.

#![forbid(unsafe_code)]

pub mod correlation;
pub mod dynamic;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod replay;
pub mod schedulers;
pub mod synth;

pub use correlation::{build_tables, CorrelationTable, WindowConfig};
pub use dynamic::{run_dynamic, CpConfig, ExecutionTrace, ScoreBoard};
pub use error::{Error, Result};
pub use ingest::{DatasetStats, IndustrialFormat};
pub use metrics::apfd;
pub use model::{
    classify_verdict, is_evaluable, normalize_cycle, CycleId, CycleLog, Dataset, Outcome,
    RawVerdict, TestId, VerdictRecord,
};
pub use replay::{ReplayConfig, ReplayReport, StaticChoice, SummaryStats};
pub use schedulers::{init_scores, Schedule, StaticKind};
pub use synth::SynthConfig;
