//! CSV and JSON artifacts.
//!
//! CSV files carry no version column; their schema version is listed next
//! to each file in the run manifest. JSON files carry `format_version`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::evaluation::{FidelityRow, InfidelityStats, ScheduleKind, SpectrumTrace, TransferRow};
use super::stats::{Ensemble, Histogram, GOE_SECOND_MOMENT, GUE_SECOND_MOMENT};
use super::training::TraceRecord;
use crate::error::{Error, Result};

pub const CSV_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const STATS_FORMAT_VERSION: u32 = 1;
pub const CONSTANTS_FORMAT_VERSION: u32 = 1;

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::Writer::from_path(path)?)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `n,T,schedule_kind,success_probability`
pub fn write_fidelity_csv(path: &Path, rows: &[FidelityRow]) -> Result<()> {
    if rows.is_empty() {
        let mut w = writer(path)?;
        w.write_record(["n", "T", "schedule_kind", "success_probability"])?;
        w.flush()?;
        return Ok(());
    }
    write_rows(path, rows)
}

/// `n_clauses,sample_index,infidelity`; `sample_index` is the instance
/// index, so unsatisfiable instances leave gaps.
pub fn write_infidelity_csv(path: &Path, stats: &[InfidelityStats]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n_clauses", "sample_index", "infidelity"])?;
    for s in stats {
        for (idx, x) in s.sample_indices.iter().zip(&s.samples) {
            w.write_record([s.n_clauses.to_string(), idx.to_string(), fmt(*x)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per iteration of a training run.
pub fn write_trace_csv(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "j",
        "i",
        "iteration",
        "action_selected",
        "action_taken",
        "accepted",
        "delta",
        "reward",
        "epsilon",
        "temperature",
        "loss",
        "target_refreshed",
        "training_active",
    ])?;
    for r in trace {
        w.write_record([
            r.j.to_string(),
            r.i.to_string(),
            r.iteration.to_string(),
            r.action_selected.to_string(),
            r.action_taken.to_string(),
            r.accepted.to_string(),
            fmt(r.delta),
            fmt(r.reward),
            fmt(r.epsilon),
            fmt(r.temperature),
            r.loss.map(fmt).unwrap_or_default(),
            r.target_refreshed.to_string(),
            r.training_active.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `n,T,rl_infidelity,linear_infidelity`
pub fn write_transfer_csv(path: &Path, rows: &[TransferRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Mean 3-SAT success of one schedule at one clause number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub n_clauses: usize,
    pub schedule_kind: ScheduleKind,
    pub mean_success: f64,
    pub standard_error: f64,
    pub instances: usize,
    pub unsatisfiable: usize,
}

/// `n_clauses,schedule_kind,mean_success,standard_error,instances,unsatisfiable`
pub fn write_success_csv(path: &Path, rows: &[SuccessRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Spectrum table. `E0`/`E1` are taken along the trained schedule when one is
/// present, otherwise along the first; per-schedule levels follow as
/// `E0_<kind>`/`E1_<kind>`. Columns of absent schedules are left empty.
pub fn write_spectrum_csv(path: &Path, trace: &SpectrumTrace, kinds: &[ScheduleKind]) -> Result<()> {
    if kinds.len() != trace.curves.len() {
        return Err(Error::param("one schedule kind per spectrum curve is required"));
    }
    let order = [ScheduleKind::Linear, ScheduleKind::Rl, ScheduleKind::RolandCerf];
    let label = |k: ScheduleKind| match k {
        ScheduleKind::RolandCerf => "nonlinear",
        other => other.as_str(),
    };
    let find = |k: ScheduleKind| kinds.iter().position(|&x| x == k);
    let main = find(ScheduleKind::Rl).unwrap_or(0);

    let mut header = vec!["t_over_T".to_string(), "E0".into(), "E1".into()];
    header.extend(order.iter().map(|&k| format!("E_dyn_{}", label(k))));
    for &k in &order {
        header.push(format!("E0_{}", label(k)));
        header.push(format!("E1_{}", label(k)));
    }
    let mut w = writer(path)?;
    w.write_record(&header)?;
    for (row, &x) in trace.t_over_t.iter().enumerate() {
        let c = &trace.curves[main];
        let mut rec = vec![fmt(x), fmt(c.e0[row]), fmt(c.e1[row])];
        for &k in &order {
            rec.push(find(k).map(|i| fmt(trace.curves[i].dynamical[row])).unwrap_or_default());
        }
        for &k in &order {
            let idx = find(k);
            rec.push(idx.map(|i| fmt(trace.curves[i].e0[row])).unwrap_or_default());
            rec.push(idx.map(|i| fmt(trace.curves[i].e1[row])).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `bin_lo,bin_hi,<label>...` with one density column per series.
pub fn write_histogram_csv(path: &Path, hist: &Histogram, labels: &[String]) -> Result<()> {
    if labels.len() != hist.densities.len() {
        return Err(Error::param("one label per histogram series is required"));
    }
    let mut w = writer(path)?;
    let mut header = vec!["bin_lo".to_string(), "bin_hi".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for b in 0..hist.edges.len() - 1 {
        let mut rec = vec![fmt(hist.edges[b]), fmt(hist.edges[b + 1])];
        rec.extend(hist.densities.iter().map(|d| fmt(d[b])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that parses back to the same value.
fn fmt(x: f64) -> String {
    format!("{x:?}")
}

/// Reference density `A·x^k·exp(−B·x²)` in closed form, so plots need no
/// formula of their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurmiseConstants {
    pub formula: String,
    pub amplitude: f64,
    pub power: u32,
    pub exponent: f64,
    pub mean: f64,
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub format_version: u32,
    /// Ensemble used for comparisons in this run.
    pub ensemble: Ensemble,
    pub goe: SurmiseConstants,
    pub gue: SurmiseConstants,
}

impl Constants {
    pub fn new(ensemble: Ensemble) -> Self {
        Self {
            format_version: CONSTANTS_FORMAT_VERSION,
            ensemble,
            goe: SurmiseConstants {
                formula: "A * x^k * exp(-B * x^2)".into(),
                amplitude: PI / 2.0,
                power: 1,
                exponent: PI / 4.0,
                mean: 1.0,
                second_moment: GOE_SECOND_MOMENT,
            },
            gue: SurmiseConstants {
                formula: "A * x^k * exp(-B * x^2)".into(),
                amplitude: 32.0 / (PI * PI),
                power: 2,
                exponent: 4.0 / PI,
                mean: 1.0,
                second_moment: GUE_SECOND_MOMENT,
            },
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One file written by a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: PathBuf,
    pub kind: String,
    pub format_version: u32,
}

/// Record of one command invocation: what ran, with which resolved
/// configuration and seed, and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: Value,
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<OutputEntry>,
    /// Command-specific results, e.g. the best training reward.
    #[serde(default)]
    pub summary: Value,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: Value) -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn add_output(&mut self, file: impl Into<PathBuf>, kind: &str, format_version: u32) {
        self.outputs.push(OutputEntry { file: file.into(), kind: kind.to_string(), format_version });
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join("manifest.json"))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported manifest format_version {}", m.format_version)));
        }
        Ok(m)
    }
}

/// Summary of an infidelity campaign, without the raw samples.
pub fn stats_summary(stats: &[InfidelityStats]) -> Vec<Value> {
    stats
        .iter()
        .map(|s| {
            json!({
                "n_clauses": s.n_clauses,
                "samples": s.samples.len(),
                "unsatisfiable": s.unsatisfiable,
                "mean_success": s.mean_success,
                "success_se": s.success_se,
                "mean_infidelity": s.mean_infidelity,
                "second_moment": s.second_moment,
                "second_moment_se": s.second_moment_se,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::evaluation::SpectrumCurve;

    fn read(path: &Path) -> Vec<Vec<String>> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
        r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
    }

    #[test]
    fn fidelity_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fidelity.csv");
        let rows = vec![FidelityRow {
            n: 4,
            total_time: 62.2,
            schedule_kind: ScheduleKind::RolandCerf,
            success_probability: 0.5,
        }];
        write_fidelity_csv(&p, &rows).unwrap();
        let t = read(&p);
        assert_eq!(t[0], ["n", "T", "schedule_kind", "success_probability"]);
        assert_eq!(t[1], ["4", "62.2", "roland-cerf", "0.5"]);
    }

    #[test]
    fn infidelity_columns_keep_instance_indices() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("infidelity.csv");
        let s = InfidelityStats {
            n_clauses: 2,
            sample_indices: vec![0, 2],
            samples: vec![0.1, 0.3],
            unsatisfiable: 1,
            mean_success: 0.8,
            success_se: 0.1,
            mean_infidelity: 0.2,
            second_moment: 1.25,
            second_moment_se: 0.1,
        };
        write_infidelity_csv(&p, &[s]).unwrap();
        let t = read(&p);
        assert_eq!(t[0], ["n_clauses", "sample_index", "infidelity"]);
        assert_eq!(t[2], ["2", "2", "0.3"]);
    }

    #[test]
    fn spectrum_columns_leave_missing_schedules_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("spectrum.csv");
        let curve = |v: f64| SpectrumCurve { e0: vec![v, v], e1: vec![v + 1.0, v + 1.0], dynamical: vec![v, v + 0.5] };
        let trace = SpectrumTrace { t_over_t: vec![0.0, 1.0], curves: vec![curve(0.0), curve(2.0)] };
        write_spectrum_csv(&p, &trace, &[ScheduleKind::Linear, ScheduleKind::Rl]).unwrap();
        let t = read(&p);
        assert_eq!(&t[0][..6], ["t_over_T", "E0", "E1", "E_dyn_linear", "E_dyn_rl", "E_dyn_nonlinear"]);
        // E0/E1 follow the trained schedule
        assert_eq!(&t[2][..6], ["1.0", "2.0", "3.0", "0.5", "2.5", ""]);
        assert!(write_spectrum_csv(&p, &trace, &[ScheduleKind::Linear]).is_err());
    }

    #[test]
    fn constants_integrate_to_unit_mean() {
        let c = Constants::new(Ensemble::Goe);
        for s in [&c.goe, &c.gue] {
            let f = |x: f64| s.amplitude * x.powi(s.power as i32) * (-s.exponent * x * x).exp();
            let h = 1e-3;
            let (mut norm, mut m1) = (0.0, 0.0);
            for k in 0..12_000 {
                let x = (k as f64 + 0.5) * h;
                norm += f(x) * h;
                m1 += x * f(x) * h;
            }
            assert!((norm - 1.0).abs() < 1e-6 && (m1 - 1.0).abs() < 1e-6);
        }
        assert!((c.goe.amplitude * 1.3 * (-c.goe.exponent * 1.69f64).exp() - super::super::stats::goe_surmise(1.3)).abs() < 1e-15);
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new("eval", 7, json!({"seed": 7}));
        m.add_output("fidelity.csv", "fidelity", CSV_FORMAT_VERSION);
        m.write(dir.path()).unwrap();
        assert_eq!(Manifest::read(dir.path()).unwrap(), m);
    }
}
