//! Evaluation campaigns: success probabilities, spectra along a schedule,
//! 3-SAT infidelity statistics, and size transfer of Grover schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{self, BOOTSTRAP_RESAMPLES};
use crate::error::{Error, Result};
use crate::problems::{sample_sat_instance_with, GroverInstance, GroverVariant, ProblemFamily, SatSuccess};
use crate::quantum::{energy_expectation, evolve, exact_spectrum, EvolutionConfig, EvolutionSettings, StateVector};
use crate::rl_agent::instance_seed;
use crate::schedule::{PathState, RolandCerfSchedule, Schedule, ROLAND_CERF_SAMPLES};

/// Grover sizes and total times of the baseline comparison, `T ∝ √(2^n)`.
pub const GROVER_BENCHMARK: [(usize, f64); 6] =
    [(1, 22.0), (2, 31.1), (4, 62.2), (6, 124.5), (8, 248.9), (10, 497.8)];

/// Total time for an `n`-qubit Grover run: the benchmark value where one
/// exists, otherwise `497.8·√(2^{n−10})`.
pub fn grover_total_time(n_qubits: usize) -> f64 {
    GROVER_BENCHMARK
        .iter()
        .find(|(n, _)| *n == n_qubits)
        .map(|(_, t)| *t)
        .unwrap_or_else(|| 497.8 * 2f64.powf((n_qubits as f64 - 10.0) / 2.0))
}

/// Name of a schedule in output tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Linear,
    RolandCerf,
    Rl,
}

impl ScheduleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Linear => "linear",
            ScheduleKind::RolandCerf => "roland-cerf",
            ScheduleKind::Rl => "rl",
        }
    }
}

/// A schedule that can be shared across worker threads.
pub enum ScheduleSource {
    Path(PathState),
    RolandCerf(RolandCerfSchedule),
}

impl ScheduleSource {
    pub fn linear(cutoff: usize) -> Self {
        ScheduleSource::Path(PathState::zeros(cutoff))
    }

    pub fn roland_cerf(n_qubits: usize) -> Result<Self> {
        Ok(ScheduleSource::RolandCerf(RolandCerfSchedule::new(n_qubits, ROLAND_CERF_SAMPLES)?))
    }
}

impl Schedule for ScheduleSource {
    fn value(&self, x: f64) -> f64 {
        match self {
            ScheduleSource::Path(p) => p.value(x),
            ScheduleSource::RolandCerf(r) => r.value(x),
        }
    }
}

/// Instance seed for evaluation campaigns; disjoint from training seeds
/// and shared by every schedule evaluated with the same `seed`, so
/// comparisons are paired.
pub fn evaluation_seed(seed: u64, n_clauses: usize, index: usize) -> u64 {
    instance_seed(seed, (1 << 63) | n_clauses as u64, index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub seed: u64,
    /// `None` for an unsatisfiable instance.
    pub success: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Mean success over satisfiable instances.
    pub mean: f64,
    /// Bootstrap standard error of the mean; `None` for a single instance.
    pub standard_error: Option<f64>,
    pub instances: Vec<InstanceOutcome>,
    pub unsatisfiable: usize,
}

impl Evaluation {
    pub fn successes(&self) -> Vec<f64> {
        self.instances.iter().filter_map(|o| o.success).collect()
    }

    pub fn infidelities(&self) -> Vec<f64> {
        self.instances.iter().filter_map(|o| o.success.map(|p| 1.0 - p)).collect()
    }
}

/// Success probability of `schedule`. Grover is a single deterministic run
/// (target `m = 0`); 3-SAT averages over `instances` sampled instances,
/// excluding unsatisfiable ones from the mean and counting them separately.
pub fn evaluate_schedule<S: Schedule + Sync + ?Sized>(
    schedule: &S,
    family: ProblemFamily,
    total_time: f64,
    evolution: &EvolutionConfig,
    instances: usize,
    seed: u64,
) -> Result<Evaluation> {
    let settings = evolution.settings(total_time)?;
    match family {
        ProblemFamily::GroverEasy { n_qubits } | ProblemFamily::GroverHard { n_qubits } => {
            let inst = GroverInstance::new(n_qubits, 0, family.grover_variant().unwrap())?;
            let p = inst.run_adiabatic(schedule, &settings)?;
            Ok(Evaluation {
                mean: p,
                standard_error: None,
                instances: vec![InstanceOutcome { index: 0, seed: 0, success: Some(p) }],
                unsatisfiable: 0,
            })
        }
        ProblemFamily::Sat3 { n_bits, n_clauses } => {
            if instances == 0 {
                return Err(Error::param("need at least one instance"));
            }
            let outcomes: Vec<InstanceOutcome> = (0..instances)
                .into_par_iter()
                .map(|index| {
                    let seed = evaluation_seed(seed, n_clauses, index);
                    let inst = sample_sat_instance_with(n_bits, n_clauses, &mut ChaCha8Rng::seed_from_u64(seed))?;
                    let success = match inst.run_adiabatic(schedule, &settings)? {
                        SatSuccess::Satisfiable(p) => Some(p),
                        SatSuccess::Unsatisfiable => None,
                    };
                    Ok(InstanceOutcome { index, seed, success })
                })
                .collect::<Result<_>>()?;
            let unsatisfiable = outcomes.iter().filter(|o| o.success.is_none()).count();
            let successes: Vec<f64> = outcomes.iter().filter_map(|o| o.success).collect();
            if successes.is_empty() {
                return Err(Error::param("every sampled instance was unsatisfiable"));
            }
            let standard_error = if successes.len() > 1 {
                Some(stats::bootstrap_se(&successes, stats::mean, BOOTSTRAP_RESAMPLES, seed ^ n_clauses as u64)?)
            } else {
                None
            };
            Ok(Evaluation { mean: stats::mean(&successes), standard_error, instances: outcomes, unsatisfiable })
        }
    }
}

/// One row of the Grover success table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub schedule_kind: ScheduleKind,
    pub success_probability: f64,
}

/// Easy-Grover success of the linear and local-adiabatic baselines (and an
/// optional trained path) at each `(n, T)`.
pub fn grover_fidelity_table(
    points: &[(usize, f64)],
    trained: Option<&PathState>,
    evolution: &EvolutionConfig,
) -> Result<Vec<FidelityRow>> {
    let mut rows = Vec::new();
    for &(n, t) in points {
        let family = ProblemFamily::GroverEasy { n_qubits: n };
        let mut kinds = vec![
            (ScheduleKind::Linear, ScheduleSource::linear(6)),
            (ScheduleKind::RolandCerf, ScheduleSource::roland_cerf(n)?),
        ];
        if let Some(p) = trained {
            kinds.push((ScheduleKind::Rl, ScheduleSource::Path(p.clone())));
        }
        for (kind, schedule) in kinds {
            let p = evaluate_schedule(&schedule, family, t, evolution, 1, 0)?.mean;
            rows.push(FidelityRow { n, total_time: t, schedule_kind: kind, success_probability: p });
        }
    }
    Ok(rows)
}

/// Levels of `H(s(t/T))` along one schedule and the energy of the state
/// evolving under it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub e0: Vec<f64>,
    pub e1: Vec<f64>,
    /// `⟨ψ(t)|H(s(t/T))|ψ(t)⟩`
    pub dynamical: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub t_over_t: Vec<f64>,
    /// One curve per input schedule, in input order.
    pub curves: Vec<SpectrumCurve>,
}

/// Problem Hamiltonians used by [`spectrum_trace`]; 3-SAT takes the first
/// evaluation instance for `sat_seed`.
pub fn spectrum_hamiltonians(family: ProblemFamily, sat_seed: u64) -> Result<crate::quantum::HamiltonianPair> {
    match family {
        ProblemFamily::GroverEasy { n_qubits } => GroverInstance::new(n_qubits, 0, GroverVariant::Easy)?.build_hamiltonians(),
        ProblemFamily::GroverHard { n_qubits } => GroverInstance::new(n_qubits, 0, GroverVariant::Hard)?.build_hamiltonians(),
        ProblemFamily::Sat3 { n_bits, n_clauses } => {
            let seed = evaluation_seed(sat_seed, n_clauses, 0);
            sample_sat_instance_with(n_bits, n_clauses, &mut ChaCha8Rng::seed_from_u64(seed))?.build_hamiltonians()
        }
    }
}

/// Lowest two levels by exact diagonalization and the dynamical energy for
/// each schedule, on `grid` uniform points of `t/T`.
pub fn spectrum_trace(
    family: ProblemFamily,
    sat_seed: u64,
    schedules: &[&(dyn Schedule + Sync)],
    total_time: f64,
    grid: usize,
    evolution: &EvolutionConfig,
) -> Result<SpectrumTrace> {
    if grid < 2 || schedules.is_empty() {
        return Err(Error::param("spectrum trace needs at least two grid points and one schedule"));
    }
    let pair = spectrum_hamiltonians(family, sat_seed)?;
    let xs: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let full = evolution.settings(total_time)?;
    let segments = grid - 1;
    let seg_time = total_time / segments as f64;
    let seg_steps = full.steps.div_ceil(segments).max(EvolutionSettings::min_steps(seg_time)?);
    let seg_settings = EvolutionSettings::new(seg_time)?
        .with_steps(seg_steps)?
        .with_max_doublings(full.max_doublings)
        .with_renormalize(full.renormalize);
    let mut curves = Vec::new();
    for schedule in schedules {
        let mut e0 = Vec::with_capacity(grid);
        let mut e1 = Vec::with_capacity(grid);
        for &x in &xs {
            let levels = exact_spectrum(&pair, schedule.value(x), 2)?;
            e0.push(levels[0]);
            e1.push(levels[1]);
        }
        let mut state = StateVector::uniform(pair.n_qubits())?;
        let mut dynamical = vec![energy_expectation(&pair, schedule.value(0.0), &state)?];
        for k in 0..segments {
            let (a, b) = (xs[k], xs[k + 1]);
            let piece = |u: f64| schedule.value(a + u * (b - a));
            state = evolve(&pair, &piece, &seg_settings, &state)?.state;
            dynamical.push(energy_expectation(&pair, schedule.value(b), &state)?);
        }
        curves.push(SpectrumCurve { e0, e1, dynamical });
    }
    Ok(SpectrumTrace { t_over_t: xs, curves })
}

/// Infidelity statistics of one clause number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfidelityStats {
    pub n_clauses: usize,
    /// Instance indices of the satisfiable instances, aligned with `samples`.
    pub sample_indices: Vec<usize>,
    /// Infidelities `1 − P` of satisfiable instances.
    pub samples: Vec<f64>,
    pub unsatisfiable: usize,
    pub mean_success: f64,
    pub success_se: f64,
    pub mean_infidelity: f64,
    /// `⟨x²⟩` of the mean-rescaled infidelities.
    pub second_moment: f64,
    pub second_moment_se: f64,
}

impl InfidelityStats {
    pub fn rescaled(&self) -> Result<Vec<f64>> {
        stats::rescale(&self.samples)
    }
}

/// Infidelity samples and their moments for each clause number, all
/// instances drawn from `seed` (paired across schedules).
pub fn infidelity_campaign<S: Schedule + Sync + ?Sized>(
    schedule: &S,
    n_bits: usize,
    total_time: f64,
    clauses: &[usize],
    samples: usize,
    seed: u64,
    evolution: &EvolutionConfig,
) -> Result<Vec<InfidelityStats>> {
    if samples < 2 {
        return Err(Error::param("infidelity statistics need at least two samples"));
    }
    clauses
        .iter()
        .map(|&n_clauses| {
            let family = ProblemFamily::Sat3 { n_bits, n_clauses };
            let eval = evaluate_schedule(schedule, family, total_time, evolution, samples, seed)?;
            let (sample_indices, infidelities): (Vec<usize>, Vec<f64>) =
                eval.instances.iter().filter_map(|o| o.success.map(|p| (o.index, 1.0 - p))).unzip();
            let bseed = seed ^ (0x5EED << 8) ^ n_clauses as u64;
            Ok(InfidelityStats {
                n_clauses,
                sample_indices,
                unsatisfiable: eval.unsatisfiable,
                mean_success: eval.mean,
                success_se: eval.standard_error.unwrap_or(0.0),
                mean_infidelity: stats::mean(&infidelities),
                second_moment: stats::rescaled_second_moment(&infidelities),
                second_moment_se: stats::bootstrap_se(
                    &infidelities,
                    stats::rescaled_second_moment,
                    BOOTSTRAP_RESAMPLES,
                    bseed,
                )?,
                samples: infidelities,
            })
        })
        .collect()
}

/// Second moment of the pooled distribution of per-group mean-rescaled
/// samples, with a stratified bootstrap error (each group resampled and
/// rescaled separately).
pub fn pooled_second_moment(groups: &[&[f64]], resamples: usize, seed: u64) -> Result<(f64, f64)> {
    use rand::Rng;
    if groups.is_empty() || groups.iter().any(|g| g.len() < 2) {
        return Err(Error::param("every group needs at least two samples"));
    }
    let total: usize = groups.iter().map(|g| g.len()).sum();
    let pooled = |gs: &[Vec<f64>]| -> f64 {
        gs.iter().map(|g| stats::rescaled_second_moment(g) * g.len() as f64).sum::<f64>() / total as f64
    };
    let owned: Vec<Vec<f64>> = groups.iter().map(|g| g.to_vec()).collect();
    let value = pooled(&owned);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            let resampled: Vec<Vec<f64>> =
                groups.iter().map(|g| (0..g.len()).map(|_| g[rng.gen_range(0..g.len())]).collect()).collect();
            pooled(&resampled)
        })
        .collect();
    let m = stats::mean(&values);
    let se = (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt();
    Ok((value, se))
}

/// Infidelity of a transferred schedule and of the linear one at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub rl_infidelity: f64,
    pub linear_infidelity: f64,
}

/// Applies `source`, trained at `source_n` qubits with time `source_time`,
/// to each target size with `T ∝ √(2^n)`, using the two-level easy-Grover
/// simulation.
pub fn transfer_study(
    source: &PathState,
    source_n: usize,
    source_time: f64,
    targets: &[usize],
    evolution: &EvolutionConfig,
) -> Result<Vec<TransferRow>> {
    targets
        .par_iter()
        .map(|&n| {
            let t = source_time * 2f64.powf((n as f64 - source_n as f64) / 2.0);
            let family = ProblemFamily::GroverEasy { n_qubits: n };
            let rl = evaluate_schedule(source, family, t, evolution, 1, 0)?.mean;
            let linear = evaluate_schedule(&PathState::zeros(source.cutoff()), family, t, evolution, 1, 0)?.mean;
            Ok(TransferRow { n, total_time: t, rl_infidelity: 1.0 - rl, linear_infidelity: 1.0 - linear })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{easy_grover_gap, evolve_two_level};

    #[test]
    fn benchmark_times_follow_sqrt_scaling() {
        for &(n, t) in &GROVER_BENCHMARK {
            let predicted = 497.8 * 2f64.powf((n as f64 - 10.0) / 2.0);
            assert!((t / predicted - 1.0).abs() < 5e-3, "n={n}");
            assert_eq!(grover_total_time(n), t);
        }
        assert!((grover_total_time(12) - 995.6).abs() < 1e-9);
    }

    #[test]
    fn grover_evaluation_matches_two_level_oracle() {
        let ev = EvolutionConfig::default();
        let out = evaluate_schedule(&ScheduleSource::linear(6), ProblemFamily::GroverEasy { n_qubits: 1 }, 22.0, &ev, 1, 0)
            .unwrap();
        let oracle = evolve_two_level(1, &|x: f64| x, &ev.settings(22.0).unwrap()).unwrap().success_probability();
        assert!((out.mean - oracle).abs() < 1e-6);
        assert_eq!(out.standard_error, None);
    }

    #[test]
    fn sat_evaluation_is_paired_and_reproducible() {
        let ev = EvolutionConfig::minimal();
        let family = ProblemFamily::Sat3 { n_bits: 6, n_clauses: 2 };
        let a = evaluate_schedule(&ScheduleSource::linear(6), family, 3.0, &ev, 40, 9).unwrap();
        let bent = ScheduleSource::Path(PathState::new(vec![0.05, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap());
        let b = evaluate_schedule(&bent, family, 3.0, &ev, 40, 9).unwrap();
        let seeds_a: Vec<u64> = a.instances.iter().map(|o| o.seed).collect();
        let seeds_b: Vec<u64> = b.instances.iter().map(|o| o.seed).collect();
        assert_eq!(seeds_a, seeds_b);
        let again = evaluate_schedule(&ScheduleSource::linear(6), family, 3.0, &ev, 40, 9).unwrap();
        assert_eq!(a, again);
        assert!(a.standard_error.unwrap() > 0.0);
    }

    #[test]
    fn spectrum_trace_starts_at_zero_energy() {
        let ev = EvolutionConfig::default();
        let linear = |x: f64| x;
        let family = ProblemFamily::GroverEasy { n_qubits: 3 };
        let tr = spectrum_trace(family, 0, &[&linear], 20.0, 11, &ev).unwrap();
        let c = &tr.curves[0];
        assert_eq!(tr.t_over_t.len(), 11);
        assert!(c.dynamical[0].abs() < 1e-12);
        for (k, &x) in tr.t_over_t.iter().enumerate() {
            let g = easy_grover_gap(3, x);
            assert!((c.e0[k] - (1.0 - g) / 2.0).abs() < 1e-9);
            assert!((c.e1[k] - (1.0 + g) / 2.0).abs() < 1e-9);
            assert!(c.dynamical[k] >= c.e0[k] - 1e-9);
        }
        // the final energy is the infidelity for a Grover problem Hamiltonian
        let p = evolve_two_level(3, &linear, &ev.settings(20.0).unwrap()).unwrap().success_probability();
        assert!((c.dynamical[10] - (1.0 - p)).abs() < 1e-6);
    }

    #[test]
    fn infidelity_rescaling_and_pooling() {
        let ev = EvolutionConfig::minimal();
        let out = infidelity_campaign(&|x: f64| x, 6, 3.0, &[2, 3], 60, 4, &ev).unwrap();
        assert_eq!(out.len(), 2);
        for s in &out {
            let r = s.rescaled().unwrap();
            assert!((stats::mean(&r) - 1.0).abs() < 1e-12);
            assert!((s.mean_success + s.mean_infidelity - 1.0).abs() < 1e-12);
            assert_eq!(s.samples.len() + s.unsatisfiable, 60);
        }
        let groups: Vec<&[f64]> = out.iter().map(|s| s.samples.as_slice()).collect();
        let (m, se) = pooled_second_moment(&groups, 200, 1).unwrap();
        let weighted = (out[0].second_moment * out[0].samples.len() as f64
            + out[1].second_moment * out[1].samples.len() as f64)
            / (out[0].samples.len() + out[1].samples.len()) as f64;
        assert!((m - weighted).abs() < 1e-12);
        assert!(se > 0.0);
    }

    #[test]
    fn transfer_rows_rescale_time() {
        let rows = transfer_study(&PathState::zeros(6), 10, 497.8, &[11, 12], &EvolutionConfig::default()).unwrap();
        assert!((rows[0].total_time - 497.8 * 2f64.sqrt()).abs() < 1e-9);
        assert!((rows[1].total_time - 995.6).abs() < 1e-9);
        // identical schedules give identical infidelities
        assert!(rows.iter().all(|r| r.rl_infidelity == r.linear_infidelity));
    }
}
