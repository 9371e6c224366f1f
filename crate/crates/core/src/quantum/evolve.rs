//! Fixed-step RK4 propagation of `i d|ψ⟩/dt = H(s(t/T))|ψ⟩` (ħ = 1).
//!
//! Each derivative evaluation subtracts the instantaneous energy
//! `⟨ψ|H(s)|ψ⟩` from `H(s)`, and the accumulated phase `∫⟨H⟩dt` is restored
//! at the end, so the returned state is the true `|ψ(T)⟩`. RK4 damps an
//! eigencomponent at energy `λ` (relative to the shift) by roughly
//! `(λ·dt)⁶/72` per step; measuring energies from the mean keeps the
//! dominant low-lying components near `λ = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianPair;
use super::state::{self, StateVector};
use crate::error::{Error, Result};
use crate::schedule::Schedule;

/// A run is accepted without further step doubling below this drift.
pub const DRIFT_ACCEPT: f64 = 1e-9;
/// Drift above this after all doublings is an integration failure.
pub const DRIFT_FAILURE: f64 = 1e-6;
/// Lower bound on the default step count.
pub const MIN_DEFAULT_STEPS: usize = 10_000;
/// Default cap on step doublings. Trained paths can reach `|s| ≫ 1`, where
/// the per-step error grows like `(|s|·dt)⁶`.
pub const DEFAULT_MAX_DOUBLINGS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSettings {
    pub total_time: f64,
    pub steps: usize,
    pub renormalize: bool,
    pub max_doublings: u32,
}

impl EvolutionSettings {
    /// Default rule: `max(10 000, ⌈20·T⌉)` steps, up to [`DEFAULT_MAX_DOUBLINGS`] doublings.
    pub fn new(total_time: f64) -> Result<Self> {
        let floor = Self::min_steps(total_time)?;
        Ok(Self { total_time, steps: floor.max(MIN_DEFAULT_STEPS), renormalize: false, max_doublings: DEFAULT_MAX_DOUBLINGS })
    }

    /// Smallest step count allowed for a total time: `⌈20·T⌉`.
    pub fn min_steps(total_time: f64) -> Result<usize> {
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(Error::param(format!("total time must be positive, got {total_time}")));
        }
        Ok((20.0 * total_time).ceil() as usize)
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        let floor = Self::min_steps(self.total_time)?;
        if steps < floor {
            return Err(Error::param(format!("{steps} steps is below ⌈20·T⌉ = {floor}")));
        }
        self.steps = steps;
        Ok(self)
    }

    pub fn with_renormalize(mut self, renormalize: bool) -> Self {
        self.renormalize = renormalize;
        self
    }

    pub fn with_max_doublings(mut self, max_doublings: u32) -> Self {
        self.max_doublings = max_doublings;
        self
    }

    fn validate(&self) -> Result<()> {
        let floor = Self::min_steps(self.total_time)?;
        if self.steps < floor {
            return Err(Error::param(format!("{} steps is below ⌈20·T⌉ = {floor}", self.steps)));
        }
        Ok(())
    }
}

/// Step policy independent of `T`, resolved into [`EvolutionSettings`] per run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Explicit step count; `None` uses the default rule.
    #[serde(default)]
    pub steps: Option<usize>,
    /// When set, the step count is `⌈steps_per_unit_time·T⌉` (at least `⌈20·T⌉`).
    #[serde(default)]
    pub steps_per_unit_time: Option<f64>,
    #[serde(default = "default_doublings")]
    pub max_doublings: u32,
    #[serde(default)]
    pub renormalize: bool,
}

fn default_doublings() -> u32 {
    DEFAULT_MAX_DOUBLINGS
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { steps: None, steps_per_unit_time: None, max_doublings: DEFAULT_MAX_DOUBLINGS, renormalize: false }
    }
}

impl EvolutionConfig {
    /// Shortest admissible grid: `⌈20·T⌉` steps.
    pub fn minimal() -> Self {
        Self { steps_per_unit_time: Some(20.0), ..Self::default() }
    }

    pub fn settings(&self, total_time: f64) -> Result<EvolutionSettings> {
        let mut settings = EvolutionSettings::new(total_time)?
            .with_renormalize(self.renormalize)
            .with_max_doublings(self.max_doublings);
        if let Some(steps) = self.steps {
            settings = settings.with_steps(steps)?;
        } else if let Some(rate) = self.steps_per_unit_time {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::param(format!("steps_per_unit_time must be positive, got {rate}")));
            }
            let floor = EvolutionSettings::min_steps(total_time)?;
            settings = settings.with_steps(((rate * total_time).ceil() as usize).max(floor))?;
        }
        Ok(settings)
    }
}

/// Final state of an evolution together with the integration diagnostics.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: StateVector,
    /// Step count of the accepted run (after any doubling).
    pub steps: usize,
    /// `|‖ψ(T)‖ − 1|` before optional renormalization.
    pub norm_drift: f64,
}

/// Runs the step-doubling protocol around `attempt`, which integrates with a
/// given step count and reports the final norm drift.
fn with_doubling<T>(
    settings: &EvolutionSettings,
    mut attempt: impl FnMut(usize) -> (T, f64),
) -> Result<(T, usize, f64)> {
    settings.validate()?;
    let mut steps = settings.steps;
    let mut doublings = 0;
    loop {
        let (out, drift) = attempt(steps);
        if drift < DRIFT_ACCEPT {
            return Ok((out, steps, drift));
        }
        if doublings == settings.max_doublings {
            if drift <= DRIFT_FAILURE {
                return Ok((out, steps, drift));
            }
            return Err(Error::IntegrationFailure { drift, steps });
        }
        doublings += 1;
        steps *= 2;
    }
}

/// Integrates the Schrödinger equation for `H(s(t/T))` from `initial`.
pub fn evolve<S: Schedule + ?Sized>(
    pair: &HamiltonianPair,
    schedule: &S,
    settings: &EvolutionSettings,
    initial: &StateVector,
) -> Result<Evolution> {
    if initial.dim() != pair.dim() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), found: initial.dim() });
    }
    let (mut amps, steps, norm_drift) = with_doubling(settings, |steps| {
        let s_table = schedule.tabulate(2 * steps + 1);
        let out = rk4(pair, &s_table, settings.total_time, initial.amplitudes());
        let drift = (state::norm(&out) - 1.0).abs();
        (out, drift)
    })?;
    if settings.renormalize {
        let norm = state::norm(&amps);
        amps.iter_mut().for_each(|a| *a /= norm);
    }
    Ok(Evolution { state: StateVector::from_raw(pair.n_qubits(), amps), steps, norm_drift })
}

fn rk4(pair: &HamiltonianPair, s_table: &[f64], total_time: f64, initial: &[Complex64]) -> Vec<Complex64> {
    let steps = (s_table.len() - 1) / 2;
    let dt = total_time / steps as f64;
    let dim = initial.len();
    let mut y = initial.to_vec();
    let mut acc = vec![Complex64::default(); dim];
    let mut stage = vec![Complex64::default(); dim];
    let mut k = vec![Complex64::default(); dim];
    // k = -i (H(s) - c) x with c = ⟨x|H(s)|x⟩/⟨x|x⟩; returns c.
    let derivative = |s: f64, x: &[Complex64], k: &mut [Complex64]| {
        k.iter_mut().for_each(|v| *v = Complex64::default());
        pair.accumulate(s, x, k);
        let (mut num, mut den) = (0.0, 0.0);
        for (kv, xv) in k.iter().zip(x) {
            num += xv.re * kv.re + xv.im * kv.im;
            den += xv.norm_sqr();
        }
        let c = num / den;
        for (kv, xv) in k.iter_mut().zip(x) {
            let h = *kv - xv * c;
            *kv = Complex64::new(h.im, -h.re);
        }
        c
    };
    let mut phase = 0.0;
    for step in 0..steps {
        let s0 = s_table[2 * step];
        let s1 = s_table[2 * step + 1];
        let s2 = s_table[2 * step + 2];

        acc.copy_from_slice(&y);
        let c1 = derivative(s0, &y, &mut k);
        for i in 0..dim {
            acc[i] += k[i] * (dt / 6.0);
            stage[i] = y[i] + k[i] * (0.5 * dt);
        }
        let c2 = derivative(s1, &stage, &mut k);
        for i in 0..dim {
            acc[i] += k[i] * (dt / 3.0);
            stage[i] = y[i] + k[i] * (0.5 * dt);
        }
        let c3 = derivative(s1, &stage, &mut k);
        for i in 0..dim {
            acc[i] += k[i] * (dt / 3.0);
            stage[i] = y[i] + k[i] * dt;
        }
        let c4 = derivative(s2, &stage, &mut k);
        for i in 0..dim {
            y[i] = acc[i] + k[i] * (dt / 6.0);
        }
        phase += dt / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    }
    let restore = Complex64::from_polar(1.0, -phase);
    y.iter_mut().for_each(|a| *a *= restore);
    y
}

/// Result of the reduced easy-Grover evolution.
#[derive(Debug, Clone, Copy)]
pub struct TwoLevelEvolution {
    /// `⟨m|ψ(T)⟩`
    pub target: Complex64,
    /// Amplitude on the normalized component of `|ψ₀⟩` orthogonal to `|m⟩`.
    pub orthogonal: Complex64,
    pub steps: usize,
    pub norm_drift: f64,
}

impl TwoLevelEvolution {
    pub fn success_probability(&self) -> f64 {
        self.target.norm_sqr()
    }
}

/// Easy-Grover dynamics restricted to `span{|m⟩, |ψ₀⟩}`.
///
/// In the basis `(|m⟩, |m⊥⟩)` with `a = 2^{-n/2}`, `b = √(1−a²)`:
/// `H_B = [[b², −ab], [−ab, a²]]`, `H_P = [[0, 0], [0, 1]]`, and
/// `|ψ₀⟩ = (a, b)`.
pub fn evolve_two_level<S: Schedule + ?Sized>(
    n_qubits: usize,
    schedule: &S,
    settings: &EvolutionSettings,
) -> Result<TwoLevelEvolution> {
    if n_qubits == 0 || n_qubits > 60 {
        return Err(Error::param(format!("qubit count {n_qubits} outside 1..=60")));
    }
    let a = (-(n_qubits as f64) * 0.5 * std::f64::consts::LN_2).exp();
    let b = (1.0 - a * a).sqrt();
    let initial = [Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
    let ((target, orthogonal), steps, norm_drift) = with_doubling(settings, |steps| {
        let s_table = schedule.tabulate(2 * steps + 1);
        let out = rk4_two_level(a, b, &s_table, settings.total_time, initial);
        let drift = ((out.0.norm_sqr() + out.1.norm_sqr()).sqrt() - 1.0).abs();
        (out, drift)
    })?;
    let (mut target, mut orthogonal) = (target, orthogonal);
    if settings.renormalize {
        let norm = (target.norm_sqr() + orthogonal.norm_sqr()).sqrt();
        target /= norm;
        orthogonal /= norm;
    }
    Ok(TwoLevelEvolution { target, orthogonal, steps, norm_drift })
}

fn rk4_two_level(
    a: f64,
    b: f64,
    s_table: &[f64],
    total_time: f64,
    initial: [Complex64; 2],
) -> (Complex64, Complex64) {
    let steps = (s_table.len() - 1) / 2;
    let dt = total_time / steps as f64;
    let entries = |s: f64| {
        let d = 1.0 - s;
        (d * b * b, -d * a * b, d * a * a + s)
    };
    // Same energy-centered right-hand side as the full integrator.
    let f = |(h00, h01, h11): (f64, f64, f64), y0: Complex64, y1: Complex64| {
        let r0 = y0 * h00 + y1 * h01;
        let r1 = y0 * h01 + y1 * h11;
        let num = y0.re * r0.re + y0.im * r0.im + y1.re * r1.re + y1.im * r1.im;
        let c = num / (y0.norm_sqr() + y1.norm_sqr());
        let (r0, r1) = (r0 - y0 * c, r1 - y1 * c);
        (Complex64::new(r0.im, -r0.re), Complex64::new(r1.im, -r1.re), c)
    };
    let (mut y0, mut y1) = (initial[0], initial[1]);
    let mut phase = 0.0;
    for step in 0..steps {
        let e0 = entries(s_table[2 * step]);
        let e1 = entries(s_table[2 * step + 1]);
        let e2 = entries(s_table[2 * step + 2]);
        let k1 = f(e0, y0, y1);
        let k2 = f(e1, y0 + k1.0 * (0.5 * dt), y1 + k1.1 * (0.5 * dt));
        let k3 = f(e1, y0 + k2.0 * (0.5 * dt), y1 + k2.1 * (0.5 * dt));
        let k4 = f(e2, y0 + k3.0 * dt, y1 + k3.1 * dt);
        y0 += (k1.0 + (k2.0 + k3.0) * 2.0 + k4.0) * (dt / 6.0);
        y1 += (k1.1 + (k2.1 + k3.1) * 2.0 + k4.1) * (dt / 6.0);
        phase += dt / 6.0 * (k1.2 + 2.0 * (k2.2 + k3.2) + k4.2);
    }
    let restore = Complex64::from_polar(1.0, -phase);
    (y0 * restore, y1 * restore)
}
