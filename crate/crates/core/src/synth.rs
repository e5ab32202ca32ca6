//! Synthetic CI histories with known co-failure structure.
//!
//! Each cycle, every group draws one Bernoulli(`rate`) group-fault event.
//! When it fires, each member fails with probability `rho`; otherwise, like
//! ungrouped tests, it fails with the background rate. Finally every verdict
//! is flipped independently with probability `flakiness`.
//!
//! With background and flakiness at zero, two members of a group satisfy
//! P(a = Fault | b = Fault) = rho exactly, which gives the correlation
//! tables a ground truth to be checked against.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CycleId, CycleLog, Dataset, Outcome, TestId};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    /// Indices into the generated tests, `0..num_tests`.
    pub members: Vec<usize>,
    pub rate: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_tests: usize,
    pub num_cycles: usize,
    pub groups: Vec<GroupSpec>,
    pub background_rate: f64,
    pub flakiness: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// `count` groups of `size` consecutive tests, starting at test 0, all
    /// with the same rate and rho.
    pub fn with_uniform_groups(
        num_tests: usize,
        num_cycles: usize,
        count: usize,
        size: usize,
        rate: f64,
        rho: f64,
    ) -> Self {
        let groups = (0..count)
            .map(|g| GroupSpec {
                members: (g * size..(g + 1) * size).collect(),
                rate,
                rho,
            })
            .collect();
        Self {
            num_tests,
            num_cycles,
            groups,
            background_rate: 0.0,
            flakiness: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rate_ok = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} {v} is outside [0, 1]")))
            }
        };
        if self.num_tests == 0 || self.num_cycles == 0 {
            return Err(Error::Config("need at least one test and one cycle".into()));
        }
        rate_ok("background rate", self.background_rate)?;
        rate_ok("flakiness", self.flakiness)?;
        let mut taken = HashSet::new();
        for (i, g) in self.groups.iter().enumerate() {
            rate_ok("group rate", g.rate)?;
            rate_ok("rho", g.rho)?;
            for &m in &g.members {
                if m >= self.num_tests {
                    return Err(Error::Config(format!(
                        "group {i} member {m} is out of range for {} tests",
                        self.num_tests
                    )));
                }
                if !taken.insert(m) {
                    return Err(Error::Config(format!("test {m} is in more than one group")));
                }
            }
        }
        Ok(())
    }

    /// Name of generated test `index`, zero-padded so names sort by index.
    pub fn test_name(&self, index: usize) -> TestId {
        let width = (self.num_tests.saturating_sub(1)).to_string().len().max(3);
        TestId::new(format!("t{index:0width$}")).expect("non-empty name")
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let names: Vec<TestId> = (0..cfg.num_tests).map(|i| cfg.test_name(i)).collect();

    // group index per test, if any
    let mut group_of = vec![None; cfg.num_tests];
    for (g, spec) in cfg.groups.iter().enumerate() {
        for &m in &spec.members {
            group_of[m] = Some(g);
        }
    }

    let mut cycles = Vec::with_capacity(cfg.num_cycles);
    let mut fired = vec![false; cfg.groups.len()];
    for c in 0..cfg.num_cycles {
        for (g, spec) in cfg.groups.iter().enumerate() {
            fired[g] = rng.gen_bool(spec.rate);
        }
        let outcomes = names.iter().enumerate().map(|(i, name)| {
            let p_fail = match group_of[i] {
                Some(g) if fired[g] => cfg.groups[g].rho,
                _ => cfg.background_rate,
            };
            let mut fails = rng.gen_bool(p_fail);
            if rng.gen_bool(cfg.flakiness) {
                fails = !fails;
            }
            let outcome = if fails { Outcome::Fault } else { Outcome::Pass };
            (name.clone(), outcome)
        });
        cycles.push(CycleLog::from_outcomes(CycleId(c as u64 + 1), outcomes)?);
    }
    Dataset::new(cycles)
}
