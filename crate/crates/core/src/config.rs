//! Run configuration: published defaults, overlaid by a TOML file, then by
//! `ADIABATIC_RL_*` environment variables, then by command-line values.
//!
//! Every layer is a partial TOML table. Layers are merged key by key and the
//! result is deserialized section by section on top of the defaults, so an
//! unknown key anywhere is reported with its section and name.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::experiments::{grover_total_time, stats::Ensemble};
use crate::problems::{FamilyName, ProblemFamily};
use crate::quantum::EvolutionConfig;
use crate::rl_agent::AgentConfig;

/// Prefix of environment overrides: `ADIABATIC_RL_AGENT_L_PS=25`,
/// `ADIABATIC_RL_SEED=3`.
pub const ENV_PREFIX: &str = "ADIABATIC_RL_";

const SECTIONS: [&str; 5] = ["problem", "agent", "evolution", "training", "evaluation"];
const TOP_LEVEL: [&str; 3] = ["seed", "output_dir", "jobs"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: FamilyName,
    /// Grover qubit count.
    pub n: usize,
    /// 3-SAT bit count `N_b`.
    pub n_bits: usize,
    /// 3-SAT clause count `N_C` used for training.
    pub n_clauses: usize,
    /// Total time; defaults to the Grover benchmark value for `n`, or 6 for 3-SAT.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self { family: FamilyName::GroverEasy, n: 4, n_bits: 10, n_clauses: 3, total_time: None }
    }
}

impl ProblemConfig {
    pub fn family(&self) -> ProblemFamily {
        match self.family {
            FamilyName::GroverEasy => ProblemFamily::GroverEasy { n_qubits: self.n },
            FamilyName::GroverHard => ProblemFamily::GroverHard { n_qubits: self.n },
            FamilyName::Sat3 => ProblemFamily::Sat3 { n_bits: self.n_bits, n_clauses: self.n_clauses },
        }
    }

    pub fn total_time(&self) -> f64 {
        self.total_time.unwrap_or(match self.family {
            FamilyName::Sat3 => 6.0,
            _ => grover_total_time(self.n),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingOptions {
    /// Write a checkpoint every this many iterations (0: only at the end).
    pub checkpoint_every: u64,
    /// Stop the run at the first threshold event.
    pub halt_on_threshold: bool,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self { checkpoint_every: 1000, halt_on_threshold: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationOptions {
    /// 3-SAT instances per clause number.
    pub instances: usize,
    /// Clause numbers of evaluation and statistics campaigns.
    pub clauses: Vec<usize>,
    /// Points on the `t/T` grid of spectrum traces.
    pub grid: usize,
    /// Grover sizes of transfer studies.
    pub transfer_targets: Vec<usize>,
    /// Bins of the rescaled-infidelity histogram over `[0, histogram_max)`.
    pub histogram_bins: usize,
    pub histogram_max: f64,
    pub ensemble: Ensemble,
    /// Significance level of the pairwise KS comparison.
    pub ks_alpha: f64,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            instances: 10_000,
            clauses: (1..=6).collect(),
            grid: 101,
            transfer_targets: (11..=16).collect(),
            histogram_bins: 40,
            histogram_max: 5.0,
            ensemble: Ensemble::Goe,
            ks_alpha: 0.05,
        }
    }
}

/// Fully resolved configuration of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; absent means one per available core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub problem: ProblemConfig,
    pub agent: AgentConfig,
    pub evolution: EvolutionConfig,
    pub training: TrainingOptions,
    pub evaluation: EvaluationOptions,
}

impl RunConfig {
    /// Defaults only.
    pub fn defaults() -> Result<Self> {
        Self::resolve(&Table::new())
    }

    /// Resolves merged overrides on top of the defaults. Agent defaults
    /// follow the resolved problem family.
    pub fn resolve(overrides: &Table) -> Result<Self> {
        for key in overrides.keys() {
            if !SECTIONS.contains(&key.as_str()) && !TOP_LEVEL.contains(&key.as_str()) {
                return Err(Error::param(format!("unknown config key `{key}`")));
            }
        }
        let section = |name: &str| -> Result<Option<&Table>> {
            match overrides.get(name) {
                None => Ok(None),
                Some(Value::Table(t)) => Ok(Some(t)),
                Some(_) => Err(Error::param(format!("`{name}` must be a section"))),
            }
        };
        let problem: ProblemConfig = overlay(ProblemConfig::default(), section("problem")?, "problem")?;
        let family = problem.family();
        let agent: AgentConfig = overlay(AgentConfig::for_family(&family), section("agent")?, "agent")?;
        let evolution: EvolutionConfig = overlay(EvolutionConfig::default(), section("evolution")?, "evolution")?;
        let training: TrainingOptions = overlay(TrainingOptions::default(), section("training")?, "training")?;
        let evaluation: EvaluationOptions = overlay(EvaluationOptions::default(), section("evaluation")?, "evaluation")?;

        let seed = match overrides.get("seed") {
            None => 0,
            Some(Value::Integer(v)) if *v >= 0 => *v as u64,
            Some(v) => return Err(Error::param(format!("`seed` must be a non-negative integer, got {v}"))),
        };
        let output_dir = match overrides.get("output_dir") {
            None => PathBuf::from("out"),
            Some(Value::String(s)) => PathBuf::from(s),
            Some(v) => return Err(Error::param(format!("`output_dir` must be a string, got {v}"))),
        };
        let jobs = match overrides.get("jobs") {
            None => None,
            Some(Value::Integer(v)) if *v >= 1 => Some(*v as usize),
            Some(v) => return Err(Error::param(format!("`jobs` must be a positive integer, got {v}"))),
        };
        let config = Self { seed, output_dir, jobs, problem, agent, evolution, training, evaluation };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.agent.validate().map_err(|e| Error::param(format!("[agent] {}", strip(e))))?;
        let family = self.problem.family();
        let n = family.n_qubits();
        if n == 0 {
            return Err(Error::param("[problem] size must be at least 1"));
        }
        if let ProblemFamily::Sat3 { n_bits, n_clauses } = family {
            if n_bits < 3 || n_clauses == 0 {
                return Err(Error::param("[problem] 3-SAT needs n_bits >= 3 and n_clauses >= 1"));
            }
        }
        let t = self.problem.total_time();
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::param(format!("[problem] T must be positive, got {t}")));
        }
        self.evolution.settings(t).map_err(|e| Error::param(format!("[evolution] {}", strip(e))))?;
        let ev = &self.evaluation;
        if ev.instances == 0 || ev.grid < 2 || ev.histogram_bins == 0 {
            return Err(Error::param(
                "[evaluation] instances and histogram_bins must be at least 1, grid at least 2",
            ));
        }
        if ev.clauses.is_empty() || ev.clauses.contains(&0) {
            return Err(Error::param("[evaluation] clauses must be a non-empty list of positive counts"));
        }
        if !(ev.histogram_max > 0.0) || !(ev.ks_alpha > 0.0 && ev.ks_alpha < 1.0) {
            return Err(Error::param("[evaluation] histogram_max must be positive and ks_alpha in (0, 1)"));
        }
        Ok(())
    }

    /// JSON form echoed into run manifests.
    pub fn to_json_value(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::InvalidParameter(m) => m,
        other => other.to_string(),
    }
}

fn overlay<T: Serialize + DeserializeOwned>(base: T, patch: Option<&Table>, name: &str) -> Result<T> {
    let mut table = Table::try_from(&base).map_err(|e| Error::Parse(format!("[{name}] {e}")))?;
    if let Some(patch) = patch {
        merge(&mut table, patch);
    }
    T::deserialize(table).map_err(|e| Error::param(format!("[{name}] {}", e.message())))
}

/// Recursively merges `top` into `base`; scalars and arrays in `top` win.
pub fn merge(base: &mut Table, top: &Table) {
    for (k, v) in top {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// Reads a config file as an override layer.
pub fn load_file(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::param(format!("cannot read config file {}: {e}", path.display())))?;
    text.parse::<Table>().map_err(|e| Error::Parse(format!("{}: {}", path.display(), e.message())))
}

/// Parses a command-line or environment value: any TOML value, otherwise a
/// bare string.
pub fn parse_value(text: &str) -> Value {
    let probe = format!("v = {text}");
    match probe.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(text.to_string())),
        Err(_) => Value::String(text.to_string()),
    }
}

/// Sets a dotted key such as `agent.l_ps`.
pub fn set_dotted(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) || parts.len() > 2 {
        return Err(Error::param(format!("malformed config key `{key}`")));
    }
    if parts.len() == 1 {
        table.insert(parts[0].to_string(), value);
        return Ok(());
    }
    let entry = table.entry(parts[0].to_string()).or_insert_with(|| Value::Table(Table::new()));
    match entry {
        Value::Table(t) => {
            t.insert(parts[1].to_string(), value);
            Ok(())
        }
        _ => Err(Error::param(format!("`{}` is not a section", parts[0]))),
    }
}

/// Parses `key=value`.
pub fn parse_assignment(text: &str) -> Result<(String, Value)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::param(format!("expected key=value, got `{text}`")))?;
    Ok((k.trim().to_string(), parse_value(v.trim())))
}

/// Override layer from environment variables carrying [`ENV_PREFIX`].
pub fn env_layer<I: IntoIterator<Item = (String, String)>>(vars: I) -> Result<Table> {
    let mut table = Table::new();
    for (name, value) in vars {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
        let rest = rest.to_ascii_lowercase();
        let key = SECTIONS
            .iter()
            .find_map(|s| rest.strip_prefix(&format!("{s}_")).map(|k| format!("{s}.{k}")))
            .unwrap_or(rest);
        // the problem total time is spelled `T` in files
        let key = if key == "problem.t" { "problem.T".to_string() } else { key };
        set_dotted(&mut table, &key, parse_value(&value))?;
    }
    Ok(table)
}

/// Parses `a..b` (inclusive) or a comma-separated list.
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::param(format!("expected a range like 1..6 or a list like 1,3,5; got `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(text: &str) -> Table {
        text.parse().unwrap()
    }

    #[test]
    fn defaults_follow_family() {
        let c = RunConfig::defaults().unwrap();
        assert_eq!(c.agent, AgentConfig::grover());
        assert_eq!(c.problem.total_time(), 62.2);
        let c = RunConfig::resolve(&layer("[problem]\nfamily = \"sat3\"")).unwrap();
        assert_eq!(c.agent.layer_sizes(), vec![6, 12, 12, 13]);
        assert_eq!(c.agent.capacity, 1000);
        assert_eq!(c.problem.total_time(), 6.0);
    }

    #[test]
    fn shipped_example_restates_defaults() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/example.toml");
        let c = RunConfig::resolve(&load_file(&path).unwrap()).unwrap();
        assert_eq!(c, RunConfig::defaults().unwrap());
    }

    #[test]
    fn partial_agent_overlay_keeps_preset() {
        let c = RunConfig::resolve(&layer("[problem]\nfamily = \"sat3\"\n[agent]\nl_ps = 25")).unwrap();
        assert_eq!(c.agent.l_ps, 25);
        assert_eq!(c.agent.mi, 100);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = RunConfig::resolve(&layer("[agent]\nlearnin_rate = 0.1")).unwrap_err().to_string();
        assert!(e.contains("learnin_rate") && e.contains("[agent]"), "{e}");
        let e = RunConfig::resolve(&layer("sed = 3")).unwrap_err().to_string();
        assert!(e.contains("sed"), "{e}");
        let e = RunConfig::resolve(&layer("[agent]\ngamma = 1.5")).unwrap_err().to_string();
        assert!(e.contains("gamma"), "{e}");
    }

    #[test]
    fn layers_merge_in_order() {
        let mut base = layer("seed = 1\n[agent]\nl_sa = 5\nl_ps = 7");
        merge(&mut base, &env_layer([("ADIABATIC_RL_AGENT_L_PS".to_string(), "9".to_string())]).unwrap());
        let mut cli = Table::new();
        set_dotted(&mut cli, "seed", parse_value("4")).unwrap();
        merge(&mut base, &cli);
        let c = RunConfig::resolve(&base).unwrap();
        assert_eq!((c.seed, c.agent.l_sa, c.agent.l_ps), (4, 5, 9));
    }

    #[test]
    fn env_names_map_to_sections() {
        let t = env_layer([
            ("ADIABATIC_RL_SEED".to_string(), "11".to_string()),
            ("ADIABATIC_RL_PROBLEM_T".to_string(), "9.5".to_string()),
            ("ADIABATIC_RL_EVOLUTION_STEPS_PER_UNIT_TIME".to_string(), "40".to_string()),
            ("ADIABATIC_RL_OUTPUT_DIR".to_string(), "runs/a".to_string()),
            ("HOME".to_string(), "/root".to_string()),
        ])
        .unwrap();
        let c = RunConfig::resolve(&t).unwrap();
        assert_eq!(c.seed, 11);
        assert_eq!(c.problem.total_time(), 9.5);
        assert_eq!(c.evolution.steps_per_unit_time, Some(40.0));
        assert_eq!(c.output_dir, PathBuf::from("runs/a"));
    }

    #[test]
    fn values_and_ranges_parse() {
        assert_eq!(parse_value("3"), Value::Integer(3));
        assert_eq!(parse_value("[12, 12]"), Value::Array(vec![Value::Integer(12), Value::Integer(12)]));
        assert_eq!(parse_value("sat3"), Value::String("sat3".into()));
        assert_eq!(parse_range("1..6").unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(parse_range("2,4").unwrap(), vec![2, 4]);
        assert!(parse_range("6..1").is_err());
        assert!(parse_assignment("agent.mi").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::resolve(&layer("seed = 5\n[problem]\nfamily = \"grover-hard\"\nn = 3\nT = 30.0")).unwrap();
        let again = RunConfig::resolve(&c.to_toml().unwrap().parse().unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
