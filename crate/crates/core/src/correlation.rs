//! Pairwise conditional co-failure and co-pass probabilities.
//!
//! For an ordered pair (pending, executed) and a window of past cycles:
//!
//! ```text
//! P(pending = Fault | executed = Fault) = #(both Fault) / #(executed Fault)
//! P(pending = Pass  | executed = Pass)  = #(both Pass)  / #(executed Pass)
//! ```
//!
//! A cycle only counts for a pair when both tests have a Pass or Fault
//! outcome in it. Pairs whose conditioning event never happened, and pairs
//! that never co-occurred with the same verdict, have no entry: a missing
//! entry and a zero probability produce the same (absent) score update.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{CycleId, CycleLog, Outcome, TestId};

pub const DEFAULT_HISTORY_LENGTH: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    pub history_length: usize,
}

impl WindowConfig {
    pub fn new(history_length: usize) -> Result<Self> {
        if history_length == 0 {
            return Err(Error::Config("history length must be at least 1".into()));
        }
        Ok(Self { history_length })
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            history_length: DEFAULT_HISTORY_LENGTH,
        }
    }
}

/// Which conditional probability an entry holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FailGivenFail,
    PassGivenPass,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::FailGivenFail => "fail_given_fail",
            Direction::PassGivenPass => "pass_given_pass",
        }
    }
}

/// Conditional probabilities. Tests are interned to dense ids; each
/// direction keeps, per executed (conditioning) test, the pending tests it
/// has entries for, sorted by pending id.
#[derive(Debug, Clone, Default)]
pub struct CorrelationTable {
    tests: Vec<TestId>,
    ids: HashMap<TestId, u32>,
    fail_given_fail: Vec<Vec<(u32, f64)>>,
    pass_given_pass: Vec<Vec<(u32, f64)>>,
}

impl CorrelationTable {
    pub fn is_empty(&self) -> bool {
        self.fail_given_fail.iter().all(Vec::is_empty)
            && self.pass_given_pass.iter().all(Vec::is_empty)
    }

    fn rows(&self, direction: Direction) -> &[Vec<(u32, f64)>] {
        match direction {
            Direction::FailGivenFail => &self.fail_given_fail,
            Direction::PassGivenPass => &self.pass_given_pass,
        }
    }

    fn intern(&mut self, test: &TestId) -> u32 {
        if let Some(&id) = self.ids.get(test) {
            return id;
        }
        let id = self.tests.len() as u32;
        self.tests.push(test.clone());
        self.ids.insert(test.clone(), id);
        self.fail_given_fail.push(Vec::new());
        self.pass_given_pass.push(Vec::new());
        id
    }

    /// Inserts or replaces an entry. Self-pairs and values outside (0, 1]
    /// are rejected.
    pub fn insert(
        &mut self,
        direction: Direction,
        pending: TestId,
        executed: TestId,
        probability: f64,
    ) -> Result<()> {
        if pending == executed {
            return Err(Error::ContractViolation(format!(
                "self-pair ({pending}, {pending}) in correlation table"
            )));
        }
        if !(probability > 0.0 && probability <= 1.0) {
            return Err(Error::ContractViolation(format!(
                "probability {probability} outside (0, 1]"
            )));
        }
        let p = self.intern(&pending);
        let e = self.intern(&executed) as usize;
        let row = match direction {
            Direction::FailGivenFail => &mut self.fail_given_fail[e],
            Direction::PassGivenPass => &mut self.pass_given_pass[e],
        };
        match row.binary_search_by_key(&p, |&(id, _)| id) {
            Ok(i) => row[i].1 = probability,
            Err(i) => row.insert(i, (p, probability)),
        }
        Ok(())
    }

    pub fn lookup(&self, direction: Direction, pending: &TestId, executed: &TestId) -> Option<f64> {
        let p = *self.ids.get(pending)?;
        let row = &self.rows(direction)[*self.ids.get(executed)? as usize];
        row.binary_search_by_key(&p, |&(id, _)| id)
            .ok()
            .map(|i| row[i].1)
    }

    /// P(pending = Fault | executed = Fault), if known.
    pub fn lookup_fail(&self, pending: &TestId, executed: &TestId) -> Option<f64> {
        self.lookup(Direction::FailGivenFail, pending, executed)
    }

    /// P(pending = Pass | executed = Pass), if known.
    pub fn lookup_pass(&self, pending: &TestId, executed: &TestId) -> Option<f64> {
        self.lookup(Direction::PassGivenPass, pending, executed)
    }

    /// Interned id of a test, if the table has seen it.
    pub fn id_of(&self, test: &TestId) -> Option<u32> {
        self.ids.get(test).copied()
    }

    /// Interned tests, indexed by id.
    pub fn tests(&self) -> &[TestId] {
        &self.tests
    }

    /// (pending id, probability) entries conditioned on the test with id
    /// `executed`.
    pub fn row(&self, direction: Direction, executed: u32) -> &[(u32, f64)] {
        self.rows(direction)
            .get(executed as usize)
            .map_or(&[], Vec::as_slice)
    }

    /// All pending tests with an entry conditioned on `executed`.
    pub fn conditioned_on<'a>(
        &'a self,
        direction: Direction,
        executed: &TestId,
    ) -> impl Iterator<Item = (&'a TestId, f64)> + 'a {
        let row = self
            .id_of(executed)
            .map_or(&[][..], |e| self.row(direction, e));
        row.iter().map(|&(p, prob)| (&self.tests[p as usize], prob))
    }

    /// Every entry as (direction, pending, executed, probability), sorted by
    /// direction, then executed name, then pending name.
    pub fn entries(&self) -> Vec<(Direction, &TestId, &TestId, f64)> {
        let mut out = Vec::new();
        for dir in [Direction::FailGivenFail, Direction::PassGivenPass] {
            let start = out.len();
            for (e, row) in self.rows(dir).iter().enumerate() {
                for &(p, prob) in row {
                    out.push((dir, &self.tests[p as usize], &self.tests[e], prob));
                }
            }
            out[start..].sort_by(|a, b| (a.2, a.1).cmp(&(b.2, b.1)));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.fail_given_fail.iter().map(Vec::len).sum::<usize>()
            + self.pass_given_pass.iter().map(Vec::len).sum::<usize>()
    }

    /// Debug dump: `pending,executed,direction,probability` rows.
    pub fn write_csv<W: Write>(&self, output: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(output);
        writer.write_record(["pending", "executed", "direction", "probability"])?;
        for (dir, pending, executed, p) in self.entries() {
            writer.write_record([
                pending.as_str(),
                executed.as_str(),
                dir.label(),
                &p.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Tables are equal when they hold the same entries, whatever order the
/// tests were interned in.
impl PartialEq for CorrelationTable {
    fn eq(&self, other: &Self) -> bool {
        self.entries() == other.entries()
    }
}

#[derive(Default, Clone, Copy)]
struct PairCounts {
    both_fault: u32,
    executed_fault: u32,
    both_pass: u32,
    executed_pass: u32,
}

/// Dense n*n counters for ordinary windows, a map beyond that.
enum PairCounter {
    Dense(usize, Vec<PairCounts>),
    Sparse(HashMap<(u32, u32), PairCounts>),
}

const DENSE_LIMIT: usize = 2048;

impl PairCounter {
    fn new(n: usize) -> Self {
        if n <= DENSE_LIMIT {
            PairCounter::Dense(n, vec![PairCounts::default(); n * n])
        } else {
            PairCounter::Sparse(HashMap::new())
        }
    }

    fn get_mut(&mut self, executed: u32, pending: u32) -> &mut PairCounts {
        match self {
            PairCounter::Dense(n, v) => &mut v[executed as usize * *n + pending as usize],
            PairCounter::Sparse(m) => m.entry((executed, pending)).or_default(),
        }
    }

    /// Non-empty counters ordered by (executed, pending).
    fn into_sorted(self) -> Vec<(u32, u32, PairCounts)> {
        let mut out: Vec<_> = match self {
            PairCounter::Dense(n, v) => v
                .into_iter()
                .enumerate()
                .map(|(i, c)| ((i / n) as u32, (i % n) as u32, c))
                .collect(),
            PairCounter::Sparse(m) => m.into_iter().map(|((e, p), c)| (e, p, c)).collect(),
        };
        out.retain(|(_, _, c)| c.executed_fault + c.executed_pass > 0);
        out.sort_unstable_by_key(|&(e, p, _)| (e, p));
        out
    }
}

/// Builds the tables for `target` from the `history_length` cycles right
/// before it. `history` must hold only cycles earlier than `target`; a later
/// cycle in it is reported as a contract violation rather than silently read.
pub fn build_tables(
    history: &[CycleLog],
    target: CycleId,
    cfg: WindowConfig,
) -> Result<CorrelationTable> {
    if let Some(late) = history.iter().find(|c| c.cycle >= target) {
        return Err(Error::ContractViolation(format!(
            "history for cycle {target} contains cycle {}",
            late.cycle
        )));
    }
    let start = history.len().saturating_sub(cfg.history_length);
    Ok(tables_from_window(&history[start..]))
}

/// Counts co-occurrences over exactly the given cycles.
pub fn tables_from_window(window: &[CycleLog]) -> CorrelationTable {
    let mut table = CorrelationTable::default();
    let present: Vec<Vec<(u32, bool)>> = window
        .iter()
        .map(|log| {
            log.schedulable()
                .map(|(test, outcome)| (table.intern(test), outcome == Outcome::Fault))
                .collect()
        })
        .collect();

    let n = table.tests.len();
    let mut counts = PairCounter::new(n);
    for cycle in &present {
        for &(executed, executed_fault) in cycle {
            for &(pending, pending_fault) in cycle {
                if pending == executed {
                    continue;
                }
                let c = counts.get_mut(executed, pending);
                if executed_fault {
                    c.executed_fault += 1;
                    c.both_fault += u32::from(pending_fault);
                } else {
                    c.executed_pass += 1;
                    c.both_pass += u32::from(!pending_fault);
                }
            }
        }
    }

    for (executed, pending, c) in counts.into_sorted() {
        if c.both_fault > 0 {
            let p = f64::from(c.both_fault) / f64::from(c.executed_fault);
            table.fail_given_fail[executed as usize].push((pending, p));
        }
        if c.both_pass > 0 {
            let p = f64::from(c.both_pass) / f64::from(c.executed_pass);
            table.pass_given_pass[executed as usize].push((pending, p));
        }
    }
    table
}
