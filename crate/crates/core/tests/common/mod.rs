#![allow(dead_code)]

use dyntcp::{CycleId, CycleLog, Dataset, Outcome, TestId};
use proptest::prelude::*;

pub fn t(name: &str) -> TestId {
    TestId::new(name).unwrap()
}

pub fn log(id: u64, outcomes: &[(&str, Outcome)]) -> CycleLog {
    CycleLog::from_outcomes(CycleId(id), outcomes.iter().map(|(n, o)| (t(n), *o))).unwrap()
}

pub fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![
        4 => Just(Outcome::Pass),
        3 => Just(Outcome::Fault),
        1 => Just(Outcome::Excluded),
    ]
}

/// A cycle over a subset of tests `t0..t{universe}`.
pub fn cycle_log(id: u64, universe: usize) -> impl Strategy<Value = CycleLog> {
    prop::collection::vec(prop::option::weighted(0.85, outcome()), universe).prop_map(
        move |slots| {
            CycleLog::from_outcomes(
                CycleId(id),
                slots
                    .into_iter()
                    .enumerate()
                    .filter_map(|(i, o)| o.map(|o| (t(&format!("t{i}")), o))),
            )
            .unwrap()
        },
    )
}

/// An evaluable cycle of 1..=max tests with no Excluded outcomes.
pub fn evaluable_cycle(max: usize) -> impl Strategy<Value = CycleLog> {
    (2..=max)
        .prop_flat_map(|n| prop::collection::vec(any::<bool>(), n))
        .prop_filter("needs a fault and a pass", |v| {
            v.contains(&true) && v.contains(&false)
        })
        .prop_map(|faults| {
            CycleLog::from_outcomes(
                CycleId(1),
                faults.into_iter().enumerate().map(|(i, f)| {
                    (
                        t(&format!("t{i}")),
                        if f { Outcome::Fault } else { Outcome::Pass },
                    )
                }),
            )
            .unwrap()
        })
}

pub fn dataset(max_cycles: usize, universe: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_cycles).prop_flat_map(move |n| {
        (0..n as u64)
            .map(|i| cycle_log(i + 1, universe))
            .collect::<Vec<_>>()
            .prop_map(|cycles| Dataset::new(cycles).unwrap())
    })
}
