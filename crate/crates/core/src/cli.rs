//! Command-line front end. Every subcommand resolves a [`RunConfig`], echoes
//! it to `manifest.json` in the output directory, and writes CSV/JSON
//! artifacts next to it.
//!
//! Exit status: 0 on success, 2 for usage, configuration and input errors,
//! 3 for numerical failures.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use toml::{Table, Value};

use crate::config::{self, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::output::{self, Constants, Manifest, SuccessRow, CSV_FORMAT_VERSION};
use crate::experiments::{
    evaluate_schedule, grover_fidelity_table, infidelity_campaign, pooled_second_moment, spectrum_trace, stats,
    transfer_study, Checkpoint, FidelityRow, InfidelityStats, ScheduleKind, ScheduleSource, TrainRun, Trainer, CHECKPOINT_FORMAT_VERSION,
    GROVER_BENCHMARK,
};
use crate::problems::{GroverVariant, ProblemFamily};
use crate::schedule::{ProblemKind, Schedule, ScheduleRecord, SCHEDULE_FORMAT_VERSION};

#[derive(Debug, Parser)]
#[command(name = "adiabatic-rl", version, about = "Design adiabatic annealing schedules with deep Q-learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a schedule; writes schedule.json, checkpoint.json, trace.csv.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Continue from a checkpoint file (its configuration is used).
        #[arg(long, conflicts_with = "warm_start")]
        resume: Option<PathBuf>,
        /// Start from the network and best path of a checkpoint file.
        #[arg(long)]
        warm_start: Option<PathBuf>,
    },
    /// Evaluate a schedule; Grover writes fidelity.csv, 3-SAT writes success.csv.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// `linear`, `roland-cerf`, or a schedule file.
        #[arg(long, default_value = "linear")]
        schedule: String,
    },
    /// Linear and Roland–Cerf success on easy Grover; writes fidelity.csv.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        /// Only this kind (default: both).
        #[arg(long, value_enum)]
        kind: Option<BaselineKind>,
    },
    /// Instantaneous levels and dynamical energy; writes spectrum.csv.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Trained schedule file to include.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// 3-SAT infidelity statistics; writes infidelity.csv, stats.json,
    /// histogram.csv, constants.json.
    Stats {
        #[command(flatten)]
        common: CommonArgs,
        /// `linear` or a schedule file.
        #[arg(long, default_value = "linear")]
        schedule: String,
    },
    /// Apply a Grover schedule to other sizes with `T ∝ √(2^n)`; writes transfer.csv.
    Transfer {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        schedule: PathBuf,
        /// Target sizes, e.g. `11..16` or `11,13`.
        #[arg(long)]
        targets: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Linear,
    RolandCerf,
}

/// Flags shared by all subcommands. Each maps onto one config key.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `section.key=value`, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// grover-easy, grover-hard, or sat3.
    #[arg(long)]
    pub problem: Option<String>,
    /// Grover qubits.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_bits: Option<usize>,
    #[arg(long)]
    pub n_clauses: Option<usize>,
    /// Total anneal time.
    #[arg(long = "T")]
    pub total_time: Option<f64>,
    #[arg(long)]
    pub mi: Option<usize>,
    #[arg(long)]
    pub l_sa: Option<usize>,
    #[arg(long)]
    pub l_ps: Option<usize>,
    /// Fixed RK4 step count.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub bernoulli_reward: bool,
    /// 3-SAT instances per clause number.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Clause numbers, e.g. `1..6`.
    #[arg(long)]
    pub clauses: Option<String>,
}

impl CommonArgs {
    fn layer(&self) -> Result<Table> {
        let mut t = Table::new();
        for a in &self.set {
            let (k, v) = config::parse_assignment(a)?;
            config::set_dotted(&mut t, &k, v)?;
        }
        let mut put = |k: &str, v: Option<Value>| -> Result<()> {
            match v {
                Some(v) => config::set_dotted(&mut t, k, v),
                None => Ok(()),
            }
        };
        let int = |v: Option<usize>| v.map(|x| Value::Integer(x as i64));
        put("seed", self.seed.map(|x| Value::Integer(x as i64)))?;
        put("output_dir", self.out.as_ref().map(|p| Value::String(p.display().to_string())))?;
        put("jobs", int(self.jobs))?;
        put("problem.family", self.problem.clone().map(Value::String))?;
        put("problem.n", int(self.n))?;
        put("problem.n_bits", int(self.n_bits))?;
        put("problem.n_clauses", int(self.n_clauses))?;
        put("problem.T", self.total_time.map(Value::Float))?;
        put("agent.mi", int(self.mi))?;
        put("agent.l_sa", int(self.l_sa))?;
        put("agent.l_ps", int(self.l_ps))?;
        put("evolution.steps", int(self.steps))?;
        put("agent.bernoulli_reward", self.bernoulli_reward.then_some(Value::Boolean(true)))?;
        put("evaluation.instances", int(self.samples))?;
        if let Some(c) = &self.clauses {
            let list = config::parse_range(c)?.into_iter().map(|x| Value::Integer(x as i64)).collect();
            put("evaluation.clauses", Some(Value::Array(list)))?;
        }
        Ok(t)
    }
}

/// Resolved configuration plus the merged override table it came from.
struct Context {
    config: RunConfig,
    overrides: Table,
}

impl Context {
    /// `defaults` sits below the config file: command-specific defaults.
    fn resolve(common: &CommonArgs, defaults: Table, env: &[(String, String)]) -> Result<Self> {
        let mut overrides = defaults;
        if let Some(path) = &common.config {
            config::merge(&mut overrides, &config::load_file(path)?);
        }
        config::merge(&mut overrides, &config::env_layer(env.iter().cloned())?);
        config::merge(&mut overrides, &common.layer()?);
        let config = RunConfig::resolve(&overrides)?;
        Ok(Self { config, overrides })
    }

    fn is_set(&self, section: &str, key: &str) -> bool {
        matches!(self.overrides.get(section), Some(Value::Table(t)) if t.contains_key(key))
    }

    fn out(&self) -> &Path {
        &self.config.output_dir
    }

    fn manifest(&self, command: &str) -> Result<Manifest> {
        fs::create_dir_all(self.out())?;
        let m = Manifest::new(command, self.config.seed, self.config.to_json_value()?);
        m.write(self.out())?;
        Ok(m)
    }
}

fn load_schedule(path: &Path) -> Result<ScheduleRecord> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::param(format!("cannot read schedule file {}: {e}", path.display())))?;
    ScheduleRecord::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.exists() {
        return Err(Error::param(format!("checkpoint file {} not found", path.display())));
    }
    Checkpoint::load(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Lowest config layer implied by a schedule record: its family and size.
fn record_defaults(record: &ScheduleRecord) -> Table {
    let mut t = Table::new();
    let family = match (record.problem, record.variant) {
        (ProblemKind::Sat3, _) => "sat3",
        (ProblemKind::Grover, Some(GroverVariant::Hard)) => "grover-hard",
        (ProblemKind::Grover, _) => "grover-easy",
    };
    let size_key = if record.problem == ProblemKind::Sat3 { "n_bits" } else { "n" };
    let mut p = Table::new();
    p.insert("family".into(), Value::String(family.into()));
    p.insert(size_key.into(), Value::Integer(record.n as i64));
    t.insert("problem".into(), Value::Table(p));
    t
}

/// Total time for a record: its own `T` when it was made for the same
/// family and size and no `T` was configured.
fn record_time(ctx: &Context, record: &ScheduleRecord) -> f64 {
    let family = ctx.config.problem.family();
    let same = match family {
        ProblemFamily::Sat3 { n_bits, .. } => record.problem == ProblemKind::Sat3 && record.n == n_bits,
        ProblemFamily::GroverEasy { n_qubits } | ProblemFamily::GroverHard { n_qubits } => {
            record.problem == ProblemKind::Grover && record.n == n_qubits && record.variant == family.grover_variant()
        }
    };
    if same && !ctx.is_set("problem", "T") {
        record.total_time
    } else {
        ctx.config.problem.total_time()
    }
}

fn sat_defaults() -> Table {
    let mut t = Table::new();
    config::set_dotted(&mut t, "problem.family", Value::String("sat3".into())).unwrap();
    t
}

fn init_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(k) = jobs {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        if rayon::current_num_threads() != k {
            return Err(Error::param(format!("worker pool already running with {} threads", rayon::current_num_threads())));
        }
    }
    Ok(())
}

/// Parses arguments and runs the command, returning the exit status.
pub fn main_with<I, T>(args: I, env: &[(String, String)]) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, env) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, env: &[(String, String)]) -> Result<()> {
    match cli.command {
        Command::Train { common, resume, warm_start } => cmd_train(&common, resume.as_deref(), warm_start.as_deref(), env),
        Command::Eval { common, schedule } => cmd_eval(&common, &schedule, env),
        Command::Baseline { common, kind } => cmd_baseline(&common, kind, env),
        Command::Spectrum { common, schedule } => cmd_spectrum(&common, schedule.as_deref(), env),
        Command::Stats { common, schedule } => cmd_stats(&common, &schedule, env),
        Command::Transfer { common, schedule, targets } => cmd_transfer(&common, &schedule, targets.as_deref(), env),
    }
}

fn schedule_record_for(run: &TrainRun, path: &crate::schedule::PathState) -> ScheduleRecord {
    let (kind, variant, n) = match run.family {
        ProblemFamily::GroverEasy { n_qubits } => (ProblemKind::Grover, Some(GroverVariant::Easy), n_qubits),
        ProblemFamily::GroverHard { n_qubits } => (ProblemKind::Grover, Some(GroverVariant::Hard), n_qubits),
        ProblemFamily::Sat3 { n_bits, .. } => (ProblemKind::Sat3, None, n_bits),
    };
    ScheduleRecord::new(path, kind, variant, n, run.total_time)
}

fn cmd_train(common: &CommonArgs, resume: Option<&Path>, warm: Option<&Path>, env: &[(String, String)]) -> Result<()> {
    let ctx = Context::resolve(common, Table::new(), env)?;
    init_pool(ctx.config.jobs)?;
    let cfg = &ctx.config;
    let out = ctx.out().to_path_buf();
    let mut manifest = ctx.manifest("train")?;
    let mut trainer = if let Some(path) = resume {
        manifest.inputs.push(path.to_path_buf());
        let cp = load_checkpoint(path)?;
        // the checkpoint's own configuration governs a resumed run
        manifest.config = json!({ "resumed": serde_json::to_value(&cp.run)?, "invocation": cfg.to_json_value()? });
        Trainer::resume(cp)?
    } else {
        let run = TrainRun {
            agent: cfg.agent.clone(),
            family: cfg.problem.family(),
            total_time: cfg.problem.total_time(),
            evolution: cfg.evolution,
            seed: cfg.seed,
            halt_on_threshold: cfg.training.halt_on_threshold,
        };
        match warm {
            Some(path) => {
                manifest.inputs.push(path.to_path_buf());
                Trainer::warm_start(run, &load_checkpoint(path)?)?
            }
            None => Trainer::new(run)?,
        }
    };
    manifest.write(&out)?;

    let checkpoint = out.join("checkpoint.json");
    let outcome = trainer.run(Some(&checkpoint), Some(cfg.training.checkpoint_every))?;
    let run = trainer.run_config().clone();
    fs::write(out.join("schedule.json"), schedule_record_for(&run, &outcome.best_path).to_json()? + "\n")?;
    fs::write(out.join("final_schedule.json"), schedule_record_for(&run, &outcome.final_path).to_json()? + "\n")?;
    output::write_trace_csv(&out.join("trace.csv"), &outcome.trace)?;

    manifest.add_output("schedule.json", "schedule", SCHEDULE_FORMAT_VERSION);
    manifest.add_output("final_schedule.json", "schedule", SCHEDULE_FORMAT_VERSION);
    manifest.add_output("checkpoint.json", "checkpoint", CHECKPOINT_FORMAT_VERSION);
    manifest.add_output("trace.csv", "trace", CSV_FORMAT_VERSION);
    manifest.summary = json!({
        "best_reward": outcome.best_reward,
        "best_path": outcome.best_path,
        "threshold_iteration": outcome.threshold_iteration,
        "iterations": trainer.state().iteration,
    });
    manifest.write(&out)?;
    println!(
        "best reward {:.6} at {} (threshold iteration {:?})",
        outcome.best_reward, outcome.best_path, outcome.threshold_iteration
    );
    Ok(())
}

/// A named baseline or a schedule file.
fn schedule_arg(ctx_common: &CommonArgs, spec: &str, env: &[(String, String)], sat_only: bool) -> Result<(Context, ScheduleSource, ScheduleKind, f64)> {
    let record = match spec {
        "linear" | "roland-cerf" => None,
        path => Some(load_schedule(Path::new(path))?),
    };
    let defaults = match (&record, sat_only) {
        (_, true) => sat_defaults(),
        (Some(r), false) => record_defaults(r),
        (None, false) => Table::new(),
    };
    let ctx = Context::resolve(ctx_common, defaults, env)?;
    let family = ctx.config.problem.family();
    let (source, kind, time) = match (spec, record) {
        ("linear", _) => (ScheduleSource::linear(ctx.config.agent.cutoff), ScheduleKind::Linear, ctx.config.problem.total_time()),
        ("roland-cerf", _) => {
            if !matches!(family, ProblemFamily::GroverEasy { .. }) {
                return Err(Error::param("the roland-cerf schedule is defined for grover-easy only"));
            }
            (ScheduleSource::roland_cerf(family.n_qubits())?, ScheduleKind::RolandCerf, ctx.config.problem.total_time())
        }
        (_, Some(r)) => {
            let t = record_time(&ctx, &r);
            (ScheduleSource::Path(r.path()?), ScheduleKind::Rl, t)
        }
        (_, None) => unreachable!(),
    };
    Ok((ctx, source, kind, time))
}

fn cmd_eval(common: &CommonArgs, spec: &str, env: &[(String, String)]) -> Result<()> {
    let (ctx, schedule, kind, t) = schedule_arg(common, spec, env, false)?;
    init_pool(ctx.config.jobs)?;
    let cfg = &ctx.config;
    let mut manifest = ctx.manifest("eval")?;
    if !matches!(spec, "linear" | "roland-cerf") {
        manifest.inputs.push(PathBuf::from(spec));
    }
    match cfg.problem.family() {
        ProblemFamily::Sat3 { n_bits, .. } => {
            let mut rows = Vec::new();
            for &nc in &cfg.evaluation.clauses {
                let family = ProblemFamily::Sat3 { n_bits, n_clauses: nc };
                let e = evaluate_schedule(&schedule, family, t, &cfg.evolution, cfg.evaluation.instances, cfg.seed)?;
                println!("N_C = {nc}: {:.6} ± {:.6}", e.mean, e.standard_error.unwrap_or(0.0));
                rows.push(SuccessRow {
                    n_clauses: nc,
                    schedule_kind: kind,
                    mean_success: e.mean,
                    standard_error: e.standard_error.unwrap_or(0.0),
                    instances: cfg.evaluation.instances,
                    unsatisfiable: e.unsatisfiable,
                });
            }
            output::write_success_csv(&ctx.out().join("success.csv"), &rows)?;
            manifest.add_output("success.csv", "success", CSV_FORMAT_VERSION);
        }
        family => {
            let p = evaluate_schedule(&schedule, family, t, &cfg.evolution, 1, cfg.seed)?.mean;
            println!("{family}, T = {t}: success {p:.9}");
            let row = FidelityRow { n: family.n_qubits(), total_time: t, schedule_kind: kind, success_probability: p };
            output::write_fidelity_csv(&ctx.out().join("fidelity.csv"), &[row])?;
            manifest.add_output("fidelity.csv", "fidelity", CSV_FORMAT_VERSION);
        }
    }
    manifest.write(ctx.out())
}

fn cmd_baseline(common: &CommonArgs, kind: Option<BaselineKind>, env: &[(String, String)]) -> Result<()> {
    let ctx = Context::resolve(common, Table::new(), env)?;
    init_pool(ctx.config.jobs)?;
    let cfg = &ctx.config;
    if !matches!(cfg.problem.family(), ProblemFamily::GroverEasy { .. }) {
        return Err(Error::param("baseline covers grover-easy; use `eval --schedule linear` for other problems"));
    }
    let points: Vec<(usize, f64)> = if ctx.is_set("problem", "n") || ctx.is_set("problem", "T") {
        vec![(cfg.problem.n, cfg.problem.total_time())]
    } else {
        GROVER_BENCHMARK.to_vec()
    };
    let mut manifest = ctx.manifest("baseline")?;
    let mut rows = grover_fidelity_table(&points, None, &cfg.evolution)?;
    rows.retain(|r| match kind {
        Some(BaselineKind::Linear) => r.schedule_kind == ScheduleKind::Linear,
        Some(BaselineKind::RolandCerf) => r.schedule_kind == ScheduleKind::RolandCerf,
        None => true,
    });
    for r in &rows {
        println!("n = {:2}  T = {:6.1}  {:12} {:.6}", r.n, r.total_time, r.schedule_kind.as_str(), r.success_probability);
    }
    output::write_fidelity_csv(&ctx.out().join("fidelity.csv"), &rows)?;
    manifest.add_output("fidelity.csv", "fidelity", CSV_FORMAT_VERSION);
    manifest.write(ctx.out())
}

fn cmd_spectrum(common: &CommonArgs, schedule: Option<&Path>, env: &[(String, String)]) -> Result<()> {
    let record = schedule.map(load_schedule).transpose()?;
    let defaults = record.as_ref().map(record_defaults).unwrap_or_default();
    let ctx = Context::resolve(common, defaults, env)?;
    init_pool(ctx.config.jobs)?;
    let cfg = &ctx.config;
    let family = cfg.problem.family();
    let t = record.as_ref().map(|r| record_time(&ctx, r)).unwrap_or_else(|| cfg.problem.total_time());
    let mut manifest = ctx.manifest("spectrum")?;
    let mut sources = vec![(ScheduleKind::Linear, ScheduleSource::linear(cfg.agent.cutoff))];
    if let Some(r) = &record {
        manifest.inputs.push(schedule.unwrap().to_path_buf());
        sources.push((ScheduleKind::Rl, ScheduleSource::Path(r.path()?)));
    }
    if let ProblemFamily::GroverEasy { n_qubits } = family {
        sources.push((ScheduleKind::RolandCerf, ScheduleSource::roland_cerf(n_qubits)?));
    }
    let refs: Vec<&(dyn Schedule + Sync)> = sources.iter().map(|(_, s)| s as &(dyn Schedule + Sync)).collect();
    let kinds: Vec<ScheduleKind> = sources.iter().map(|(k, _)| *k).collect();
    let trace = spectrum_trace(family, cfg.seed, &refs, t, cfg.evaluation.grid, &cfg.evolution)?;
    for (k, c) in kinds.iter().zip(&trace.curves) {
        let dev = c.dynamical.iter().zip(&c.e0).map(|(d, e)| d - e).fold(0.0, f64::max);
        println!("{:12} max ⟨H⟩ − E0 = {dev:.3e}", k.as_str());
    }
    output::write_spectrum_csv(&ctx.out().join("spectrum.csv"), &trace, &kinds)?;
    manifest.add_output("spectrum.csv", "spectrum", CSV_FORMAT_VERSION);
    manifest.write(ctx.out())
}

fn cmd_stats(common: &CommonArgs, spec: &str, env: &[(String, String)]) -> Result<()> {
    if spec == "roland-cerf" {
        return Err(Error::param("statistics are collected for 3-SAT; use `linear` or a schedule file"));
    }
    let (ctx, schedule, kind, t) = schedule_arg(common, spec, env, true)?;
    init_pool(ctx.config.jobs)?;
    let cfg = &ctx.config;
    let ProblemFamily::Sat3 { n_bits, .. } = cfg.problem.family() else {
        return Err(Error::param("statistics are collected for the sat3 problem"));
    };
    let ev = &cfg.evaluation;
    let mut manifest = ctx.manifest("stats")?;
    if kind == ScheduleKind::Rl {
        manifest.inputs.push(PathBuf::from(spec));
    }
    let blocks = infidelity_campaign(&schedule, n_bits, t, &ev.clauses, ev.instances, cfg.seed, &cfg.evolution)?;
    // a single clause always gives the same infidelity, so it carries no spread
    let pooled_blocks: Vec<&InfidelityStats> = blocks.iter().filter(|s| s.n_clauses >= 2).collect();
    if pooled_blocks.is_empty() {
        return Err(Error::param("the pooled second moment needs a clause number of at least 2"));
    }
    let groups: Vec<&[f64]> = pooled_blocks.iter().map(|s| s.samples.as_slice()).collect();
    let pooled_clauses: Vec<usize> = pooled_blocks.iter().map(|s| s.n_clauses).collect();
    let (pooled, pooled_se) = pooled_second_moment(&groups, stats::BOOTSTRAP_RESAMPLES, cfg.seed)?;
    let reference = ev.ensemble.second_moment();
    let rescaled: Vec<Vec<f64>> = blocks.iter().map(|s| s.rescaled()).collect::<Result<_>>()?;
    let mut ks = Vec::new();
    for a in 0..rescaled.len() {
        for b in a + 1..rescaled.len() {
            ks.push(json!({
                "n_clauses": [blocks[a].n_clauses, blocks[b].n_clauses],
                "statistic": stats::ks_statistic(&rescaled[a], &rescaled[b])?,
                "critical_value": stats::ks_critical_value(rescaled[a].len(), rescaled[b].len(), ev.ks_alpha),
            }));
        }
    }
    for s in &blocks {
        println!(
            "N_C = {}: success {:.5} ± {:.5}, ⟨x²⟩ = {:.4} ± {:.4} ({} unsatisfiable)",
            s.n_clauses, s.mean_success, s.success_se, s.second_moment, s.second_moment_se, s.unsatisfiable
        );
    }
    println!("pooled ⟨x²⟩ over N_C = {pooled_clauses:?}: {pooled:.4} ± {pooled_se:.4}, reference {reference:.4}");

    let out = ctx.out();
    output::write_infidelity_csv(&out.join("infidelity.csv"), &blocks)?;
    let refs: Vec<&[f64]> = rescaled.iter().map(|v| v.as_slice()).collect();
    let hist = stats::shared_histogram(&refs, ev.histogram_bins, 0.0, ev.histogram_max)?;
    let labels: Vec<String> = blocks.iter().map(|s| format!("n_clauses_{}", s.n_clauses)).collect();
    output::write_histogram_csv(&out.join("histogram.csv"), &hist, &labels)?;
    output::write_json(&out.join("constants.json"), &Constants::new(ev.ensemble))?;
    output::write_json(
        &out.join("stats.json"),
        &json!({
            "format_version": output::STATS_FORMAT_VERSION,
            "schedule_kind": kind,
            "n_bits": n_bits,
            "T": t,
            "ensemble": ev.ensemble,
            "reference_second_moment": reference,
            "pooled_clauses": pooled_clauses,
            "pooled_second_moment": pooled,
            "pooled_second_moment_se": pooled_se,
            "pooled_relative_deviation": pooled / reference - 1.0,
            "ks_alpha": ev.ks_alpha,
            "ks_pairs": ks,
            "clauses": output::stats_summary(&blocks),
        }),
    )?;
    manifest.add_output("infidelity.csv", "infidelity", CSV_FORMAT_VERSION);
    manifest.add_output("histogram.csv", "histogram", CSV_FORMAT_VERSION);
    manifest.add_output("stats.json", "stats", output::STATS_FORMAT_VERSION);
    manifest.add_output("constants.json", "constants", output::CONSTANTS_FORMAT_VERSION);
    manifest.write(out)
}

fn cmd_transfer(common: &CommonArgs, schedule: &Path, targets: Option<&str>, env: &[(String, String)]) -> Result<()> {
    let record = load_schedule(schedule)?;
    if record.problem != ProblemKind::Grover {
        return Err(Error::param(format!("{} is not a Grover schedule", schedule.display())));
    }
    let ctx = Context::resolve(common, record_defaults(&record), env)?;
    init_pool(ctx.config.jobs)?;
    let cfg = &ctx.config;
    let targets = match targets {
        Some(t) => config::parse_range(t)?,
        None => cfg.evaluation.transfer_targets.clone(),
    };
    let mut manifest = ctx.manifest("transfer")?;
    manifest.inputs.push(schedule.to_path_buf());
    let rows = transfer_study(&record.path()?, record.n, record.total_time, &targets, &cfg.evolution)?;
    for r in &rows {
        println!("n = {:2}  T = {:8.1}  rl {:.3e}  linear {:.3e}", r.n, r.total_time, r.rl_infidelity, r.linear_infidelity);
    }
    output::write_transfer_csv(&ctx.out().join("transfer.csv"), &rows)?;
    manifest.add_output("transfer.csv", "transfer", CSV_FORMAT_VERSION);
    manifest.write(ctx.out())
}
