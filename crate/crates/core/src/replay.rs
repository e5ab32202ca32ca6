//! Replays recorded CI cycles through a (static, dynamic) configuration and
//! scores each cycle with APFD.
//!
//! For every evaluated cycle the correlation tables are rebuilt from the
//! cycles strictly before it, so a replay never looks at the verdicts it is
//! about to be scored on except through the oracle that "runs" the tests.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::{build_tables, CorrelationTable, WindowConfig, DEFAULT_HISTORY_LENGTH};
use crate::dynamic::{run_dynamic_logged, CpConfig, ExecutionTrace, StepRecord, DEFAULT_K};
use crate::error::{Error, Result};
use crate::metrics::apfd;
use crate::model::{is_evaluable, CycleId, CycleLog, Dataset, TestId};
use crate::schedulers::{Schedule, StaticKind};

pub const DEFAULT_REPETITIONS: u32 = 30;
pub const DEFAULT_CYCLE_LIMIT: usize = 300;

/// Any static scheduler that assigns priority scores from history.
pub trait ScoreProvider: Send + Sync + fmt::Debug {
    /// Configuration label used in reports.
    fn name(&self) -> &str;

    /// Scores for the schedulable tests of `cycle`. `history` holds only
    /// earlier cycles. Higher scores run earlier.
    fn scores(&self, history: &[CycleLog], cycle: &CycleLog) -> HashMap<TestId, f64>;
}

/// Ranks tests by their failure rate over the last `window` cycles. Tests
/// without history get rate 0.
#[derive(Debug, Clone)]
pub struct FailureRateScores {
    pub window: usize,
}

impl ScoreProvider for FailureRateScores {
    fn name(&self) -> &str {
        "failrate"
    }

    fn scores(&self, history: &[CycleLog], cycle: &CycleLog) -> HashMap<TestId, f64> {
        let start = history.len().saturating_sub(self.window);
        let mut counts: HashMap<&TestId, (u32, u32)> = HashMap::new();
        for log in &history[start..] {
            for (t, o) in log.schedulable() {
                let c = counts.entry(t).or_default();
                c.1 += 1;
                if o == crate::model::Outcome::Fault {
                    c.0 += 1;
                }
            }
        }
        cycle
            .schedulable()
            .map(|(t, _)| {
                let rate = counts
                    .get(t)
                    .map_or(0.0, |&(f, n)| f64::from(f) / f64::from(n));
                (t.clone(), rate)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum StaticChoice {
    Optimal,
    Worst,
    Random,
    Scored(Arc<dyn ScoreProvider>),
}

impl StaticChoice {
    pub fn label(&self) -> &str {
        match self {
            StaticChoice::Optimal => "optimal",
            StaticChoice::Worst => "worst",
            StaticChoice::Random => "random",
            StaticChoice::Scored(p) => p.name(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplayConfig {
    pub window: WindowConfig,
    pub cp: CpConfig,
    pub random_repetitions: u32,
    pub master_seed: u64,
    pub cycle_limit: usize,
    pub static_choice: StaticChoice,
    pub dynamic_enabled: bool,
    /// Keep every dynamic step in the report.
    pub record_steps: bool,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            window: WindowConfig {
                history_length: DEFAULT_HISTORY_LENGTH,
            },
            cp: CpConfig { k: DEFAULT_K },
            random_repetitions: DEFAULT_REPETITIONS,
            master_seed: 0,
            cycle_limit: DEFAULT_CYCLE_LIMIT,
            static_choice: StaticChoice::Optimal,
            dynamic_enabled: true,
            record_steps: false,
        }
    }
}

impl ReplayConfig {
    pub fn validate(&self) -> Result<()> {
        WindowConfig::new(self.window.history_length)?;
        CpConfig::new(self.cp.k)?;
        if self.random_repetitions == 0 {
            return Err(Error::Config(
                "random repetitions must be at least 1".into(),
            ));
        }
        if self.cycle_limit == 0 {
            return Err(Error::Config("cycle limit must be at least 1".into()));
        }
        Ok(())
    }

    pub fn static_label(&self) -> String {
        self.static_choice.label().to_string()
    }

    pub fn dynamic_label(&self) -> String {
        format!("{}+cp", self.static_choice.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayRow {
    pub cycle: u64,
    pub config: String,
    /// Repetition index, only for random static schedules.
    pub repetition: Option<u32>,
    pub apfd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLine {
    pub cycle: u64,
    pub config: String,
    pub repetition: Option<u32>,
    #[serde(flatten)]
    pub step: StepRecord,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayReport {
    pub rows: Vec<ReplayRow>,
    pub steps: Vec<StepLine>,
}

impl ReplayReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with columns `cycle,config,repetition,apfd`.
    pub fn write_csv<W: Write>(&self, output: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(output);
        writer.write_record(["cycle", "config", "repetition", "apfd"])?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Steps as JSON lines.
    pub fn write_steps<W: Write>(&self, mut output: W) -> Result<()> {
        for line in &self.steps {
            serde_json::to_writer(&mut output, line).map_err(std::io::Error::from)?;
            output.write_all(b"\n")?;
        }
        Ok(())
    }

    /// APFD values of one configuration, in report order.
    pub fn values(&self, config: &str) -> impl Iterator<Item = &ReplayRow> + '_ {
        let config = config.to_string();
        self.rows.iter().filter(move |r| r.config == config)
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one random repetition, reproducible on its own.
pub fn derive_seed(master_seed: u64, cycle: CycleId, repetition: u32) -> u64 {
    mix64(mix64(mix64(master_seed) ^ cycle.0) ^ u64::from(repetition))
}

/// The last `cycle_limit` cycles of the dataset that have both a failing and
/// a passing test.
pub fn evaluated_cycles(dataset: &Dataset, cfg: &ReplayConfig) -> Vec<CycleId> {
    let cycles = dataset.cycles();
    let start = cycles.len().saturating_sub(cfg.cycle_limit);
    cycles[start..]
        .iter()
        .filter(|c| is_evaluable(c))
        .map(|c| c.cycle)
        .collect()
}

struct Run<'a> {
    cycle: CycleId,
    log: &'a CycleLog,
    table: Option<CorrelationTable>,
    cfg: &'a ReplayConfig,
    rows: Vec<ReplayRow>,
    steps: Vec<StepLine>,
}

impl Run<'_> {
    fn score(&mut self, schedule: &Schedule, repetition: Option<u32>) -> Result<()> {
        let static_trace = ExecutionTrace::from_schedule(schedule, self.log)?;
        self.rows.push(ReplayRow {
            cycle: self.cycle.0,
            config: self.cfg.static_label(),
            repetition,
            apfd: apfd(&static_trace)?,
        });

        if let Some(table) = &self.table {
            let label = self.cfg.dynamic_label();
            let mut steps = Vec::new();
            let record = self.cfg.record_steps;
            let trace = run_dynamic_logged(schedule, self.log, table, self.cfg.cp, |s| {
                if record {
                    steps.push(s);
                }
            })?;
            self.steps.extend(steps.into_iter().map(|step| StepLine {
                cycle: self.cycle.0,
                config: label.clone(),
                repetition,
                step,
            }));
            self.rows.push(ReplayRow {
                cycle: self.cycle.0,
                config: label,
                repetition,
                apfd: apfd(&trace)?,
            });
        }
        Ok(())
    }
}

/// Rows for a single cycle.
pub fn replay_cycle(dataset: &Dataset, cycle: CycleId, cfg: &ReplayConfig) -> Result<ReplayReport> {
    let pos = dataset
        .position(cycle)
        .ok_or_else(|| Error::DataIntegrity(format!("cycle {cycle} not in dataset")))?;
    let log = &dataset.cycles()[pos];
    if !is_evaluable(log) {
        return Err(Error::NotEvaluable(cycle.0));
    }
    let history = dataset.history_before(cycle);
    let table = if cfg.dynamic_enabled {
        Some(build_tables(history, cycle, cfg.window)?)
    } else {
        None
    };

    let mut run = Run {
        cycle,
        log,
        table,
        cfg,
        rows: Vec::new(),
        steps: Vec::new(),
    };

    match &cfg.static_choice {
        StaticChoice::Random => {
            for rep in 0..cfg.random_repetitions {
                let seed = derive_seed(cfg.master_seed, cycle, rep);
                let schedule = StaticKind::Random(seed).schedule(log)?;
                run.score(&schedule, Some(rep))?;
            }
        }
        StaticChoice::Optimal => run.score(&StaticKind::Optimal.schedule(log)?, None)?,
        StaticChoice::Worst => run.score(&StaticKind::Worst.schedule(log)?, None)?,
        StaticChoice::Scored(provider) => {
            let scores = provider.scores(history, log);
            run.score(&StaticKind::External(scores).schedule(log)?, None)?;
        }
    }

    Ok(ReplayReport {
        rows: run.rows,
        steps: run.steps,
    })
}

/// Replays every evaluated cycle. Cycles run in parallel; the report is in
/// cycle order.
pub fn replay(dataset: &Dataset, cfg: &ReplayConfig) -> Result<ReplayReport> {
    cfg.validate()?;
    let cycles = evaluated_cycles(dataset, cfg);
    if cycles.is_empty() {
        warn!(
            "no evaluable cycles among the last {} cycles",
            cfg.cycle_limit
        );
        return Ok(ReplayReport::default());
    }
    let parts = cycles
        .par_iter()
        .map(|&c| replay_cycle(dataset, c, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ReplayReport::default();
    for part in parts {
        report.rows.extend(part.rows);
        report.steps.extend(part.steps);
    }
    Ok(report)
}

/// Distribution of per-cycle APFD for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub cycles: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

/// Summary per configuration label.
pub type SummaryStats = BTreeMap<String, ConfigSummary>;

/// Linear interpolation between order statistics, on sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Summary of a list of per-cycle values; `None` when empty.
pub fn describe(values: &[f64]) -> Option<ConfigSummary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(ConfigSummary {
        cycles: sorted.len(),
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Per-cycle APFD of each configuration, repetitions averaged.
pub fn per_cycle_means(report: &ReplayReport) -> BTreeMap<String, BTreeMap<u64, f64>> {
    let mut sums: BTreeMap<String, BTreeMap<u64, (f64, u32)>> = BTreeMap::new();
    for row in &report.rows {
        let slot = sums
            .entry(row.config.clone())
            .or_default()
            .entry(row.cycle)
            .or_default();
        slot.0 += row.apfd;
        slot.1 += 1;
    }
    sums.into_iter()
        .map(|(config, cycles)| {
            let means = cycles
                .into_iter()
                .map(|(c, (sum, n))| (c, sum / f64::from(n)))
                .collect();
            (config, means)
        })
        .collect()
}

pub fn summarize(report: &ReplayReport) -> SummaryStats {
    per_cycle_means(report)
        .into_iter()
        .filter_map(|(config, cycles)| {
            let values: Vec<f64> = cycles.into_values().collect();
            describe(&values).map(|s| (config, s))
        })
        .collect()
}
