mod common;

use std::collections::HashSet;

use common::{cycle_log, dataset, evaluable_cycle, outcome, t};
use dyntcp::correlation::{build_tables, tables_from_window, CorrelationTable, Direction};
use dyntcp::dynamic::{run_dynamic, CpConfig, ExecutionTrace};
use dyntcp::ingest::{dataset_stats, parse_canonical, raw_stats, read_canonical, write_canonical};
use dyntcp::metrics::{apfd, apfd_of_outcomes};
use dyntcp::model::{
    is_evaluable, normalize_cycle, CycleId, CycleLog, Dataset, Outcome, RawVerdict, VerdictRecord,
};
use dyntcp::schedulers::{
    init_scores, schedule_optimal, schedule_random, schedule_worst, Schedule,
};
use dyntcp::WindowConfig;
use proptest::prelude::*;
use proptest::sample::Index;

fn records_strategy() -> impl Strategy<Value = Vec<VerdictRecord>> {
    prop::collection::vec((0..6usize, 0..4i64), 1..30).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(seq, (test, code))| VerdictRecord {
                test: t(&format!("x{test}")),
                cycle: CycleId(1),
                raw: RawVerdict::new(code, String::new).unwrap(),
                sequence: seq as u64,
            })
            .collect()
    })
}

fn as_records(log: &CycleLog) -> Vec<VerdictRecord> {
    log.iter()
        .enumerate()
        .map(|(i, (test, o))| VerdictRecord {
            test: test.clone(),
            cycle: log.cycle,
            raw: RawVerdict::new(i64::from(o.canonical_code()), String::new).unwrap(),
            sequence: i as u64,
        })
        .collect()
}

fn trace_of(schedule: &Schedule, log: &CycleLog) -> ExecutionTrace {
    ExecutionTrace::from_schedule(schedule, log).unwrap()
}

fn same_multiset(a: &Schedule, log: &CycleLog) -> bool {
    let got: HashSet<_> = a.order().iter().collect();
    got.len() == a.len() && a.covers(log)
}

/// A target cycle over t0..t{n} plus a random history of the same tests.
fn replay_case() -> impl Strategy<Value = (Vec<CycleLog>, CycleLog)> {
    (evaluable_cycle(8), 0..16usize)
        .prop_flat_map(|(target, h)| {
            let universe = target.len();
            let history: Vec<_> = (0..h as u64).map(|i| cycle_log(i + 1, universe)).collect();
            (history, Just(target))
        })
        .prop_map(|(history, target)| {
            let target =
                CycleLog::from_outcomes(CycleId(1000), target.iter().map(|(t, o)| (t.clone(), o)))
                    .unwrap();
            (history, target)
        })
}

proptest! {
    #[test]
    fn normalize_is_idempotent(records in records_strategy()) {
        let once = normalize_cycle(&records).unwrap();
        let twice = normalize_cycle(&as_records(&once)).unwrap();
        prop_assert_eq!(&once, &twice);
        let distinct: HashSet<_> = records.iter().map(|r| &r.test).collect();
        prop_assert_eq!(once.len(), distinct.len());
    }

    #[test]
    fn evaluable_monotone(log in cycle_log(1, 6)) {
        let fault_only: Vec<_> = log.iter().filter(|(_, o)| *o != Outcome::Pass).map(|(t, o)| (t.clone(), o)).collect();
        let has_fault = fault_only.iter().any(|(_, o)| *o == Outcome::Fault);
        let mut with_pass = fault_only.clone();
        with_pass.push((t("extra"), Outcome::Pass));
        let extended = CycleLog::from_outcomes(CycleId(1), with_pass).unwrap();
        prop_assert_eq!(is_evaluable(&extended), has_fault);
    }

    #[test]
    fn canonical_round_trip(d in dataset(6, 5)) {
        let mut out = Vec::new();
        write_canonical(&d, &mut out).unwrap();
        let back = parse_canonical(out.as_slice()).unwrap();
        // cycles with no tests cannot be represented in the row format
        let nonempty: Vec<CycleLog> = d.cycles().iter().filter(|c| !c.is_empty()).cloned().collect();
        prop_assert_eq!(back, Dataset::new(nonempty).unwrap());
    }

    #[test]
    fn stats_bounds(rows in prop::collection::vec((0..5u8, 0..4u64, 0..4u8), 1..60)) {
        let text: String = rows.iter().map(|(a, b, c)| format!("T{a},{b},{c}\n")).collect();
        let records = read_canonical(text.as_bytes()).unwrap();
        let raw = raw_stats(&records).unwrap();
        let norm = dataset_stats(&Dataset::from_records(records).unwrap()).unwrap();
        prop_assert!(norm.verdict_count <= raw.verdict_count);
        prop_assert!((0.0..=1.0).contains(&norm.failed_fraction));
        prop_assert!((0.0..=1.0).contains(&raw.failed_fraction));
        prop_assert_eq!(norm.distinct_tests, raw.distinct_tests);
        prop_assert_eq!(norm.cycles, raw.cycles);
    }

    #[test]
    fn table_values_in_unit_interval(window in prop::collection::vec(cycle_log(0, 5), 0..10)) {
        let window: Vec<CycleLog> = window
            .into_iter()
            .enumerate()
            .map(|(i, c)| CycleLog::from_outcomes(CycleId(i as u64), c.iter().map(|(t, o)| (t.clone(), o))).unwrap())
            .collect();
        let table = tables_from_window(&window);
        for (_, pending, executed, p) in table.entries() {
            prop_assert!(pending != executed);
            prop_assert!(p > 0.0 && p <= 1.0);
        }
        // pure function of the window
        prop_assert_eq!(&table, &tables_from_window(&window));
    }

    #[test]
    fn never_failing_executed_has_no_fail_entries(window in prop::collection::vec(cycle_log(0, 4), 1..8)) {
        // t0 never fails in the window: no fail_given_fail entries conditioned on it
        let window: Vec<CycleLog> = window
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                CycleLog::from_outcomes(
                    CycleId(i as u64),
                    c.iter().map(|(t, o)| {
                        let o = if t.as_str() == "t0" && o == Outcome::Fault { Outcome::Pass } else { o };
                        (t.clone(), o)
                    }),
                )
                .unwrap()
            })
            .collect();
        let table = build_tables(&window, CycleId(999), WindowConfig::new(8).unwrap()).unwrap();
        prop_assert_eq!(table.conditioned_on(Direction::FailGivenFail, &t("t0")).count(), 0);
    }

    #[test]
    fn schedulers_are_permutations(log in evaluable_cycle(9), seed in any::<u64>()) {
        for s in [schedule_optimal(&log).unwrap(), schedule_worst(&log).unwrap(), schedule_random(&log, seed).unwrap()] {
            prop_assert!(same_multiset(&s, &log));
        }
    }

    #[test]
    fn worst_is_reversed_optimal_by_class(log in evaluable_cycle(9)) {
        let opt = trace_of(&schedule_optimal(&log).unwrap(), &log);
        let worst = trace_of(&schedule_worst(&log).unwrap(), &log);
        let reversed: Vec<Outcome> = opt.reversed().outcomes().collect();
        prop_assert_eq!(worst.outcomes().collect::<Vec<_>>(), reversed);
    }

    #[test]
    fn initial_scores_strictly_decrease(log in evaluable_cycle(12), seed in any::<u64>()) {
        let s = schedule_random(&log, seed).unwrap();
        let board = init_scores(&s);
        let scores: Vec<f64> = s.order().iter().map(|t| board.score(t).unwrap()).collect();
        prop_assert!(scores.windows(2).all(|w| w[0] > w[1]));
        prop_assert_eq!(board.next_test().unwrap(), &s.order()[0]);
    }

    #[test]
    fn apfd_reversal_identity(order in prop::collection::vec(outcome(), 1..40), idx in any::<Index>()) {
        let mut order: Vec<Outcome> = order.into_iter().filter(|o| *o != Outcome::Excluded).collect();
        if order.is_empty() {
            order.push(Outcome::Pass);
        }
        let i = idx.index(order.len());
        order[i] = Outcome::Fault;
        let fwd = apfd_of_outcomes(order.iter().copied()).unwrap();
        let back = apfd_of_outcomes(order.iter().rev().copied()).unwrap();
        prop_assert!((fwd + back - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&fwd));
    }

    #[test]
    fn apfd_ignores_order_within_class(log in evaluable_cycle(9), a in any::<u64>(), b in any::<u64>()) {
        // two random orders with the same outcome sequence score the same
        let sa = schedule_random(&log, a).unwrap();
        let sb = schedule_random(&log, b).unwrap();
        let ta = trace_of(&sa, &log);
        let tb = trace_of(&sb, &log);
        if ta.outcomes().eq(tb.outcomes()) {
            prop_assert_eq!(apfd(&ta).unwrap(), apfd(&tb).unwrap());
        }
        let opt = schedule_optimal(&log).unwrap();
        let mut rotated = opt.order().to_vec();
        let faults = log.count(Outcome::Fault);
        rotated[..faults].rotate_left(1);
        let rotated = Schedule::new(rotated).unwrap();
        prop_assert_eq!(apfd(&trace_of(&rotated, &log)).unwrap(), apfd(&trace_of(&opt, &log)).unwrap());
    }

    #[test]
    fn dynamic_trace_properties((history, target) in replay_case(), seed in any::<u64>(), k in 0.0..3.0f64) {
        let table = tables_from_window(&history);
        let cfg = CpConfig::new(k).unwrap();
        let random = schedule_random(&target, seed).unwrap();
        let trace = run_dynamic(&random, &target, &table, cfg).unwrap();

        // permutation of the static schedule, with oracle outcomes
        let tests: Vec<_> = trace.tests().cloned().collect();
        prop_assert!(Schedule::new(tests.clone()).unwrap().covers(&target));
        for (t, o) in trace.steps() {
            prop_assert_eq!(target.outcome(t), Some(*o));
        }
        prop_assert_eq!(&tests[0], &random.order()[0]);
        // determinism
        prop_assert_eq!(&trace, &run_dynamic(&random, &target, &table, cfg).unwrap());

        // degenerate cases reproduce the static order
        let zero_k = run_dynamic(&random, &target, &table, CpConfig::new(0.0).unwrap()).unwrap();
        prop_assert!(zero_k.tests().eq(random.order().iter()));
        let empty = run_dynamic(&random, &target, &CorrelationTable::default(), cfg).unwrap();
        prop_assert!(empty.tests().eq(random.order().iter()));

        // dominance against the extremes
        let opt = schedule_optimal(&target).unwrap();
        let worst = schedule_worst(&target).unwrap();
        let opt_static = apfd(&trace_of(&opt, &target)).unwrap();
        let worst_static = apfd(&trace_of(&worst, &target)).unwrap();
        let opt_cp = apfd(&run_dynamic(&opt, &target, &table, cfg).unwrap()).unwrap();
        let worst_cp = apfd(&run_dynamic(&worst, &target, &table, cfg).unwrap()).unwrap();
        prop_assert!(opt_cp <= opt_static);
        prop_assert!(worst_cp >= worst_static);
        let rand_cp = apfd(&trace).unwrap();
        prop_assert!(worst_static <= rand_cp && rand_cp <= opt_static);
    }
}
