use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use dyntcp::correlation::{build_tables, WindowConfig, DEFAULT_HISTORY_LENGTH};
use dyntcp::dynamic::{CpConfig, DEFAULT_K};
use dyntcp::ingest::{
    dataset_stats, raw_stats, read_canonical, read_industrial, write_canonical, IndustrialFormat,
};
use dyntcp::replay::{
    replay as run_replay, summarize, FailureRateScores, ReplayConfig, StaticChoice,
    DEFAULT_CYCLE_LIMIT, DEFAULT_REPETITIONS,
};
use dyntcp::synth::{generate, SynthConfig};
use dyntcp::{CycleId, Dataset, VerdictRecord};
use log::{info, warn};

use crate::config::{load, Failure, ReplayFile, SynthFile};
use crate::output::{write_atomic, write_to};
use crate::{
    DumpArgs, DynamicArg, InputArgs, InputFormat, ReplayArgs, StaticArg, StatsArgs, SynthArgs,
};

fn industrial_format(args: &InputArgs) -> Result<IndustrialFormat, Failure> {
    let mut format = IndustrialFormat::default();
    if let Some(c) = args.delimiter {
        format.delimiter = u8::try_from(c).ok().filter(u8::is_ascii).ok_or_else(|| {
            Failure::Config(format!("delimiter {c:?} must be a single ASCII character"))
        })?;
    }
    if let Some(c) = &args.col_test {
        format.test_column = c.clone();
    }
    if let Some(c) = &args.col_cycle {
        format.cycle_column = c.clone();
    }
    if let Some(c) = &args.col_verdict {
        format.verdict_column = c.clone();
    }
    Ok(format)
}

fn load_records(args: &InputArgs) -> Result<Vec<VerdictRecord>, Failure> {
    let format = industrial_format(args)?;
    let file = File::open(&args.input)
        .map_err(|e| Failure::Input(format!("cannot open {}: {e}", args.input.display())))?;
    let reader = BufReader::new(file);
    let records = match args.format.unwrap_or(InputFormat::Canonical) {
        InputFormat::Canonical => read_canonical(reader),
        InputFormat::Industrial => read_industrial(reader, &format),
    }
    .map_err(|e| Failure::Input(format!("{}: {e}", args.input.display())))?;
    Ok(records)
}

fn load_dataset(args: &InputArgs) -> Result<Dataset, Failure> {
    let dataset = Dataset::from_records(load_records(args)?)?;
    info!(
        "loaded {} cycles, {} tests from {}",
        dataset.cycles().len(),
        dataset.universe().len(),
        args.input.display()
    );
    Ok(dataset)
}

fn replay_config(args: &ReplayArgs) -> Result<ReplayConfig, Failure> {
    let file: ReplayFile = load(args.config.as_deref())?;
    let history = args
        .history
        .or(file.history)
        .unwrap_or(DEFAULT_HISTORY_LENGTH);
    let k = args.k.or(file.k).unwrap_or(DEFAULT_K);
    let static_kind = args
        .static_kind
        .or(file.static_kind)
        .unwrap_or(StaticArg::Optimal);
    let dynamic = args.dynamic.or(file.dynamic).unwrap_or(DynamicArg::Cp);

    let cfg = ReplayConfig {
        window: WindowConfig::new(history)?,
        cp: CpConfig::new(k)?,
        random_repetitions: args.reps.or(file.reps).unwrap_or(DEFAULT_REPETITIONS),
        master_seed: args.seed.or(file.seed).unwrap_or(0),
        cycle_limit: args
            .cycle_limit
            .or(file.cycles)
            .unwrap_or(DEFAULT_CYCLE_LIMIT),
        static_choice: match static_kind {
            StaticArg::Optimal => StaticChoice::Optimal,
            StaticArg::Worst => StaticChoice::Worst,
            StaticArg::Random => StaticChoice::Random,
            StaticArg::Failrate => {
                StaticChoice::Scored(Arc::new(FailureRateScores { window: history }))
            }
        },
        dynamic_enabled: dynamic == DynamicArg::Cp,
        record_steps: args.step_log.is_some(),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn replay(args: ReplayArgs) -> Result<(), Failure> {
    let cfg = replay_config(&args)?;
    let dataset = load_dataset(&args.input)?;
    let report = run_replay(&dataset, &cfg)?;
    if report.is_empty() {
        warn!("no evaluable cycles; writing empty report");
    }

    write_atomic(&args.out, |w| Ok(report.write_csv(w)?))?;
    if let Some(path) = &args.summary {
        let summary = summarize(&report);
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &summary)
                .map_err(|e| Failure::Input(e.to_string()))?;
            w.write_all(b"\n")
                .map_err(|e| Failure::Input(e.to_string()))
        })?;
    }
    if let Some(path) = &args.step_log {
        write_atomic(path, |w| Ok(report.write_steps(w)?))?;
    }
    Ok(())
}

pub fn stats(args: StatsArgs) -> Result<(), Failure> {
    let records = load_records(&args.input)?;
    let stats = if args.raw {
        raw_stats(&records)?
    } else {
        dataset_stats(&Dataset::from_records(records)?)?
    };
    write_to(args.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &stats).map_err(|e| Failure::Input(e.to_string()))?;
        w.write_all(b"\n")
            .map_err(|e| Failure::Input(e.to_string()))
    })
}

fn parse_groups(spec: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Config(format!("--groups expects COUNTxSIZE, got {spec:?}"));
    let (count, size) = spec.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        count.trim().parse().map_err(|_| bad())?,
        size.trim().parse().map_err(|_| bad())?,
    ))
}

fn synth_config(args: &SynthArgs) -> Result<SynthConfig, Failure> {
    let file: SynthFile = load(args.config.as_deref())?;
    let groups = args
        .groups
        .clone()
        .or(file.groups)
        .unwrap_or_else(|| "5x10".into());
    let (count, size) = parse_groups(&groups)?;
    let mut cfg = SynthConfig::with_uniform_groups(
        args.tests.or(file.tests).unwrap_or(50),
        args.cycles.or(file.cycles).unwrap_or(300),
        count,
        size,
        args.group_rate.or(file.group_rate).unwrap_or(0.3),
        args.rho.or(file.rho).unwrap_or(1.0),
    );
    cfg.background_rate = args.background.or(file.background).unwrap_or(0.0);
    cfg.flakiness = args.flakiness.or(file.flakiness).unwrap_or(0.0);
    cfg.seed = args.seed.or(file.seed).unwrap_or(0);
    cfg.validate()?;
    Ok(cfg)
}

pub fn synth(args: SynthArgs) -> Result<(), Failure> {
    let cfg = synth_config(&args)?;
    let dataset = generate(&cfg)?;
    write_atomic(&args.out, |w| Ok(write_canonical(&dataset, w)?))
}

pub fn dump_tables(args: DumpArgs) -> Result<(), Failure> {
    let window = WindowConfig::new(args.history.unwrap_or(DEFAULT_HISTORY_LENGTH))?;
    let dataset = load_dataset(&args.input)?;
    let target = CycleId(args.cycle);
    let table = build_tables(dataset.history_before(target), target, window)?;
    write_to(args.out.as_deref(), |w| Ok(table.write_csv(w)?))
}
