//! Dynamic rescheduling from conditional probabilities.
//!
//! Tests run one at a time. After each verdict the pending tests correlated
//! with the executed one are re-scored:
//!
//! ```text
//! executed failed: score(t) += k * P(t = Fault | executed = Fault)
//! executed passed: score(t) -= k * P(t = Pass  | executed = Pass)
//! ```
//!
//! and the pending test with the highest score runs next. Scores start at
//! 1/n for static position n, so with no correlations the static order is
//! reproduced exactly. Scores are never clamped and may go negative.

use std::collections::HashMap;

use serde::Serialize;

use crate::correlation::{CorrelationTable, Direction};
use crate::error::{Error, Result};
use crate::model::{CycleLog, Outcome, TestId};
use crate::schedulers::Schedule;

pub const DEFAULT_K: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpConfig {
    pub k: f64,
}

impl CpConfig {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Config(format!(
                "k must be a finite value >= 0, got {k}"
            )));
        }
        Ok(Self { k })
    }
}

impl Default for CpConfig {
    fn default() -> Self {
        Self { k: DEFAULT_K }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    test: TestId,
    score: f64,
    pending: bool,
}

/// Scores of one in-flight cycle. Slots stay in static-schedule order, which
/// is also the tie-break order.
#[derive(Debug, Clone)]
pub struct ScoreBoard {
    slots: Vec<Slot>,
    index: HashMap<TestId, usize>,
    executed: Vec<(TestId, Outcome)>,
}

/// One score change applied after a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreDelta {
    pub test: TestId,
    pub delta: f64,
}

impl ScoreBoard {
    pub fn from_schedule(schedule: &Schedule) -> Self {
        let slots: Vec<Slot> = schedule
            .order()
            .iter()
            .enumerate()
            .map(|(i, t)| Slot {
                test: t.clone(),
                score: 1.0 / (i + 1) as f64,
                pending: true,
            })
            .collect();
        let index = slots
            .iter()
            .enumerate()
            .map(|(i, s)| (s.test.clone(), i))
            .collect();
        Self {
            slots,
            index,
            executed: Vec::new(),
        }
    }

    /// Score of a pending test; executed tests have left the board.
    pub fn score(&self, test: &TestId) -> Option<f64> {
        let slot = &self.slots[*self.index.get(test)?];
        slot.pending.then_some(slot.score)
    }

    pub fn is_pending(&self, test: &TestId) -> bool {
        self.index.get(test).is_some_and(|&i| self.slots[i].pending)
    }

    pub fn pending(&self) -> impl Iterator<Item = (&TestId, f64)> + '_ {
        self.slots
            .iter()
            .filter(|s| s.pending)
            .map(|s| (&s.test, s.score))
    }

    pub fn pending_count(&self) -> usize {
        self.slots.len() - self.executed.len()
    }

    pub fn executed(&self) -> &[(TestId, Outcome)] {
        &self.executed
    }

    /// Moves a pending test to the executed list.
    pub fn mark_executed(&mut self, test: &TestId, outcome: Outcome) -> Result<()> {
        let Some(&i) = self.index.get(test) else {
            return Err(Error::ContractViolation(format!(
                "{test} is not on the board"
            )));
        };
        if !self.slots[i].pending {
            return Err(Error::ContractViolation(format!("{test} already executed")));
        }
        self.slots[i].pending = false;
        self.executed.push((test.clone(), outcome));
        Ok(())
    }

    /// Re-scores pending tests after `executed` produced `outcome`. Returns
    /// the changes that were applied.
    pub fn apply_verdict(
        &mut self,
        executed: &TestId,
        outcome: Outcome,
        table: &CorrelationTable,
        cfg: CpConfig,
    ) -> Result<Vec<ScoreDelta>> {
        if self.is_pending(executed) {
            return Err(Error::ContractViolation(format!(
                "{executed} must be marked executed before its verdict is applied"
            )));
        }
        let (direction, sign) = match outcome {
            Outcome::Fault => (Direction::FailGivenFail, 1.0),
            Outcome::Pass => (Direction::PassGivenPass, -1.0),
            Outcome::Excluded => {
                return Err(Error::ContractViolation(format!(
                    "excluded test {executed} cannot be executed"
                )))
            }
        };

        let Some(executed_id) = table.id_of(executed) else {
            return Ok(Vec::new());
        };
        let index = &self.index;
        let slots: Vec<Option<usize>> = table
            .tests()
            .iter()
            .map(|t| index.get(t).copied())
            .collect();
        Ok(self.apply_row(table, direction, executed_id, sign * cfg.k, &slots))
    }

    /// Adds `factor * p` to every pending test in the table row of
    /// `executed_id`. `slots[id]` maps table ids onto board slots.
    fn apply_row(
        &mut self,
        table: &CorrelationTable,
        direction: Direction,
        executed_id: u32,
        factor: f64,
        slots: &[Option<usize>],
    ) -> Vec<ScoreDelta> {
        let mut deltas = Vec::new();
        for &(pending, p) in table.row(direction, executed_id) {
            let Some(i) = slots[pending as usize] else {
                continue;
            };
            let slot = &mut self.slots[i];
            if slot.pending {
                let delta = factor * p;
                slot.score += delta;
                deltas.push(ScoreDelta {
                    test: slot.test.clone(),
                    delta,
                });
            }
        }
        deltas
    }

    #[cfg(test)]
    fn set_score(&mut self, test: &TestId, score: f64) {
        let i = self.index[test];
        self.slots[i].score = score;
    }

    fn next_slot(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, slot) in self.slots.iter().enumerate().filter(|(_, s)| s.pending) {
            // strict comparison keeps the earliest slot on ties
            if best.is_none_or(|b| slot.score > self.slots[b].score) {
                best = Some(i);
            }
        }
        best
    }

    /// Highest-scoring pending test; earlier static position wins ties.
    pub fn next_test(&self) -> Result<&TestId> {
        self.next_slot()
            .map(|i| &self.slots[i].test)
            .ok_or(Error::Exhausted)
    }
}

/// Realized execution order with the verdicts observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    order: Vec<(TestId, Outcome)>,
}

impl ExecutionTrace {
    pub fn new(order: Vec<(TestId, Outcome)>) -> Self {
        Self { order }
    }

    /// The trace of running `schedule` as-is against `oracle`.
    pub fn from_schedule(schedule: &Schedule, oracle: &CycleLog) -> Result<Self> {
        let outcomes = schedule.outcomes(oracle)?;
        Ok(Self {
            order: schedule.order().iter().cloned().zip(outcomes).collect(),
        })
    }

    pub fn steps(&self) -> &[(TestId, Outcome)] {
        &self.order
    }

    pub fn tests(&self) -> impl Iterator<Item = &TestId> + '_ {
        self.order.iter().map(|(t, _)| t)
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        self.order.iter().map(|(_, o)| *o)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self {
            order: self.order.iter().rev().cloned().collect(),
        }
    }
}

/// One iteration of the dynamic loop, for the JSON-lines step log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub test: TestId,
    pub outcome: Outcome,
    pub deltas: Vec<ScoreDelta>,
}

pub fn run_dynamic(
    schedule: &Schedule,
    oracle: &CycleLog,
    table: &CorrelationTable,
    cfg: CpConfig,
) -> Result<ExecutionTrace> {
    run_dynamic_logged(schedule, oracle, table, cfg, |_| {})
}

/// [`run_dynamic`], reporting every step to `on_step`.
pub fn run_dynamic_logged(
    schedule: &Schedule,
    oracle: &CycleLog,
    table: &CorrelationTable,
    cfg: CpConfig,
    mut on_step: impl FnMut(StepRecord),
) -> Result<ExecutionTrace> {
    let outcomes = schedule.outcomes(oracle)?;
    if let Some((t, _)) = schedule
        .order()
        .iter()
        .zip(&outcomes)
        .find(|(_, o)| !o.is_schedulable())
    {
        return Err(Error::DataIntegrity(format!(
            "scheduled test {t} is excluded in cycle {}",
            oracle.cycle
        )));
    }
    if !schedule.covers(oracle) {
        return Err(Error::DataIntegrity(format!(
            "schedule does not cover the tests of cycle {}",
            oracle.cycle
        )));
    }
    let mut board = ScoreBoard::from_schedule(schedule);
    let slots: Vec<Option<usize>> = table
        .tests()
        .iter()
        .map(|t| board.index.get(t).copied())
        .collect();
    let table_ids: Vec<Option<u32>> = schedule.order().iter().map(|t| table.id_of(t)).collect();

    for step in 0..schedule.len() {
        let i = board.next_slot().ok_or(Error::Exhausted)?;
        let test = board.slots[i].test.clone();
        let outcome = outcomes[i];
        board.slots[i].pending = false;
        board.executed.push((test.clone(), outcome));

        let (direction, sign) = match outcome {
            Outcome::Fault => (Direction::FailGivenFail, 1.0),
            _ => (Direction::PassGivenPass, -1.0),
        };
        let deltas = match table_ids[i] {
            Some(id) => board.apply_row(table, direction, id, sign * cfg.k, &slots),
            None => Vec::new(),
        };
        on_step(StepRecord {
            step,
            test,
            outcome,
            deltas,
        });
    }
    Ok(ExecutionTrace::new(board.executed))
}
