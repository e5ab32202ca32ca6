//! Tests, verdicts, cycles and datasets.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque test identifier. Equality is exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestId(String);

impl TestId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Malformed("empty test identifier".into()));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for TestId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Position of a CI cycle in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleId(pub u64);

impl fmt::Display for CycleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Recorded verdict code: 0 pass, 1 fail, 2 invalid, 3 resource unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RawVerdict(u8);

impl RawVerdict {
    pub const PASS: RawVerdict = RawVerdict(0);
    pub const FAIL: RawVerdict = RawVerdict(1);
    pub const INVALID: RawVerdict = RawVerdict(2);
    pub const UNAVAILABLE: RawVerdict = RawVerdict(3);

    /// Accepts only the four known codes. `context` names the offending
    /// record in the error message.
    pub fn new(code: i64, context: impl FnOnce() -> String) -> Result<Self> {
        match code {
            0..=3 => Ok(RawVerdict(code as u8)),
            _ => Err(Error::InvalidVerdict {
                code,
                context: context(),
            }),
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Pass,
    Fault,
    Excluded,
}

impl Outcome {
    pub fn is_schedulable(self) -> bool {
        !matches!(self, Outcome::Excluded)
    }

    /// The raw code this outcome serializes to in the canonical format.
    pub fn canonical_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fault => 1,
            Outcome::Excluded => 3,
        }
    }
}

pub fn classify_verdict(raw: RawVerdict) -> Outcome {
    match raw.0 {
        0 => Outcome::Pass,
        1 | 2 => Outcome::Fault,
        _ => Outcome::Excluded,
    }
}

/// One test outcome in one cycle, as read from a raw log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictRecord {
    pub test: TestId,
    pub cycle: CycleId,
    pub raw: RawVerdict,
    /// Execution order within the cycle.
    pub sequence: u64,
}

/// All outcomes of one cycle, at most one per test. Iteration order is the
/// order in which tests first appeared in the source, which is the "dataset
/// order" used for stable tie-breaking downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleLog {
    pub cycle: CycleId,
    outcomes: IndexMap<TestId, Outcome>,
}

impl CycleLog {
    /// Builds a log from already-deduplicated outcomes.
    pub fn from_outcomes(
        cycle: CycleId,
        outcomes: impl IntoIterator<Item = (TestId, Outcome)>,
    ) -> Result<Self> {
        let mut map = IndexMap::new();
        for (test, outcome) in outcomes {
            if map.insert(test.clone(), outcome).is_some() {
                return Err(Error::Malformed(format!(
                    "test {test} appears twice in cycle {cycle}"
                )));
            }
        }
        Ok(Self {
            cycle,
            outcomes: map,
        })
    }

    pub fn outcome(&self, test: &TestId) -> Option<Outcome> {
        self.outcomes.get(test).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TestId, Outcome)> + '_ {
        self.outcomes.iter().map(|(t, o)| (t, *o))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Tests that can be scheduled (everything but Excluded), in dataset order.
    pub fn schedulable(&self) -> impl Iterator<Item = (&TestId, Outcome)> + '_ {
        self.iter().filter(|(_, o)| o.is_schedulable())
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.outcomes.values().filter(|o| **o == outcome).count()
    }
}

/// Keeps, for every test, the record with the largest sequence number.
pub fn normalize_cycle(records: &[VerdictRecord]) -> Result<CycleLog> {
    let Some(first) = records.first() else {
        return Err(Error::EmptyInput("cycle without records".into()));
    };
    let cycle = first.cycle;

    let mut seen: HashSet<(&TestId, u64)> = HashSet::with_capacity(records.len());
    let mut latest: IndexMap<TestId, (u64, RawVerdict)> = IndexMap::new();
    for rec in records {
        if rec.cycle != cycle {
            return Err(Error::Malformed(format!(
                "records from cycles {cycle} and {} mixed in one batch",
                rec.cycle
            )));
        }
        if !seen.insert((&rec.test, rec.sequence)) {
            return Err(Error::Malformed(format!(
                "duplicate sequence {} for test {} in cycle {cycle}",
                rec.sequence, rec.test
            )));
        }
        match latest.get_mut(&rec.test) {
            Some(slot) if slot.0 < rec.sequence => *slot = (rec.sequence, rec.raw),
            Some(_) => {}
            None => {
                latest.insert(rec.test.clone(), (rec.sequence, rec.raw));
            }
        }
    }

    Ok(CycleLog {
        cycle,
        outcomes: latest
            .into_iter()
            .map(|(t, (_, raw))| (t, classify_verdict(raw)))
            .collect(),
    })
}

/// A cycle can be scored when it has at least one Fault and one Pass.
pub fn is_evaluable(log: &CycleLog) -> bool {
    let mut fault = false;
    let mut pass = false;
    for (_, o) in log.iter() {
        match o {
            Outcome::Fault => fault = true,
            Outcome::Pass => pass = true,
            Outcome::Excluded => {}
        }
        if fault && pass {
            return true;
        }
    }
    false
}

/// Normalized cycles in strictly increasing cycle order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    cycles: Vec<CycleLog>,
    universe: BTreeSet<TestId>,
}

impl Dataset {
    pub fn new(cycles: Vec<CycleLog>) -> Result<Self> {
        for pair in cycles.windows(2) {
            if pair[0].cycle >= pair[1].cycle {
                return Err(Error::Malformed(format!(
                    "cycle {} does not follow cycle {}",
                    pair[1].cycle, pair[0].cycle
                )));
            }
        }
        let universe = cycles
            .iter()
            .flat_map(|c| c.iter().map(|(t, _)| t.clone()))
            .collect();
        Ok(Self { cycles, universe })
    }

    /// Groups raw records by cycle (ascending) and normalizes each cycle.
    pub fn from_records(mut records: Vec<VerdictRecord>) -> Result<Self> {
        // stable: keeps execution order within a cycle
        records.sort_by_key(|r| r.cycle);
        let cycles = records
            .chunk_by(|a, b| a.cycle == b.cycle)
            .map(normalize_cycle)
            .collect::<Result<Vec<_>>>()?;
        Self::new(cycles)
    }

    pub fn cycles(&self) -> &[CycleLog] {
        &self.cycles
    }

    pub fn universe(&self) -> &BTreeSet<TestId> {
        &self.universe
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn position(&self, cycle: CycleId) -> Option<usize> {
        self.cycles.binary_search_by_key(&cycle, |c| c.cycle).ok()
    }

    /// Every cycle strictly before `cycle`.
    pub fn history_before(&self, cycle: CycleId) -> &[CycleLog] {
        let end = self.cycles.partition_point(|c| c.cycle < cycle);
        &self.cycles[..end]
    }
}
