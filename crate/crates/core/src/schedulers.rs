//! Static schedulers: the full test order decided before execution starts.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamic::ScoreBoard;
use crate::error::{Error, Result};
use crate::model::{is_evaluable, CycleLog, Outcome, TestId};

/// A permutation of a cycle's schedulable tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    order: Vec<TestId>,
}

impl Schedule {
    pub fn new(order: Vec<TestId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(order.len());
        for t in &order {
            if !seen.insert(t) {
                return Err(Error::ContractViolation(format!(
                    "test {t} scheduled twice"
                )));
            }
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[TestId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// True when the schedule holds exactly the non-Excluded tests of `log`.
    pub fn covers(&self, log: &CycleLog) -> bool {
        let schedulable: HashSet<&TestId> = log.schedulable().map(|(t, _)| t).collect();
        schedulable.len() == self.order.len() && self.order.iter().all(|t| schedulable.contains(t))
    }

    /// Outcomes in schedule order, read from `log`.
    pub fn outcomes(&self, log: &CycleLog) -> Result<Vec<Outcome>> {
        self.order
            .iter()
            .map(|t| {
                log.outcome(t).ok_or_else(|| {
                    Error::DataIntegrity(format!("no outcome for {t} in cycle {}", log.cycle))
                })
            })
            .collect()
    }
}

impl From<Schedule> for Vec<TestId> {
    fn from(s: Schedule) -> Self {
        s.order
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StaticKind {
    Optimal,
    Worst,
    Random(u64),
    /// Priority scores from any external scheduler; higher runs earlier.
    External(HashMap<TestId, f64>),
}

impl StaticKind {
    pub fn schedule(&self, log: &CycleLog) -> Result<Schedule> {
        match self {
            StaticKind::Optimal => schedule_optimal(log),
            StaticKind::Worst => schedule_worst(log),
            StaticKind::Random(seed) => schedule_random(log, *seed),
            StaticKind::External(scores) => schedule_by_scores(log, scores),
        }
    }
}

fn require_evaluable(log: &CycleLog) -> Result<()> {
    if is_evaluable(log) {
        Ok(())
    } else {
        Err(Error::NotEvaluable(log.cycle.0))
    }
}

fn by_class(log: &CycleLog, first: Outcome) -> Result<Schedule> {
    require_evaluable(log)?;
    let (mut head, tail): (Vec<_>, Vec<_>) = log
        .schedulable()
        .partition(|(_, outcome)| *outcome == first);
    head.extend(tail);
    Ok(Schedule {
        order: head.into_iter().map(|(t, _)| t.clone()).collect(),
    })
}

/// Every failing test before every passing one; dataset order within a class.
pub fn schedule_optimal(log: &CycleLog) -> Result<Schedule> {
    by_class(log, Outcome::Fault)
}

/// Every passing test before every failing one; dataset order within a class.
pub fn schedule_worst(log: &CycleLog) -> Result<Schedule> {
    by_class(log, Outcome::Pass)
}

/// Uniform shuffle with a ChaCha8 stream seeded from `seed`.
pub fn schedule_random(log: &CycleLog, seed: u64) -> Result<Schedule> {
    require_evaluable(log)?;
    let mut order: Vec<TestId> = log.schedulable().map(|(t, _)| t.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    Ok(Schedule { order })
}

/// Orders by descending score; equal scores keep dataset order.
pub fn schedule_by_scores(log: &CycleLog, scores: &HashMap<TestId, f64>) -> Result<Schedule> {
    let mut scored = log
        .schedulable()
        .map(|(t, _)| match scores.get(t) {
            Some(s) if s.is_nan() => Err(Error::DataIntegrity(format!("NaN score for {t}"))),
            Some(s) => Ok((t.clone(), *s)),
            None => Err(Error::DataIntegrity(format!(
                "static scheduler gave no score for {t} in cycle {}",
                log.cycle
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(Schedule {
        order: scored.into_iter().map(|(t, _)| t).collect(),
    })
}

/// Scores 1/n for the test at 1-based position n; everything pending.
pub fn init_scores(schedule: &Schedule) -> ScoreBoard {
    ScoreBoard::from_schedule(schedule)
}
