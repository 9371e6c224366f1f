//! Deep-Q agent over path states: a small fully connected Q-network with a
//! delayed target copy, a replay memory, ε-greedy selection, the annealed
//! acceptance rule, and the MI-averaged reward.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{sample_sat_instance_with, GroverInstance, ProblemFamily};
use crate::quantum::EvolutionConfig;
use crate::schedule::{ActionId, PathState};

/// Size of the update applied by an accepted action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMagnitude {
    /// The Δ drawn uniformly from `[0, Δ₀]` for the acceptance test.
    Sampled,
    /// Always Δ₀.
    Fixed,
}

/// Agent hyperparameters. The presets match the published defaults for the
/// Grover and 3-SAT problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    /// Number of Fourier coefficients `C`.
    pub cutoff: usize,
    /// Widths of the hidden layers.
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Discount factor γ.
    pub gamma: f64,
    /// Replay memory capacity `CAP`.
    pub capacity: usize,
    pub epsilon_max: f64,
    pub epsilon_increment: f64,
    /// Target network refresh period `W`, in training steps.
    pub target_refresh: usize,
    /// Cooling rate `C_R`: `Tem_j = Tem_{j−1}·10^{−C_R}`.
    pub cooling_rate: f64,
    pub initial_temperature: f64,
    /// Maximal update per step Δ₀.
    pub delta0: f64,
    /// Instances averaged per reward, `MI`.
    pub mi: usize,
    /// Outer (annealing) iterations `L_SA`.
    pub l_sa: usize,
    /// Inner (path-state) iterations `L_PS`.
    pub l_ps: usize,
    pub threshold: f64,
    pub update_magnitude: UpdateMagnitude,
    /// Restart ε from 0 at every outer iteration instead of carrying it over.
    pub epsilon_reset_per_cycle: bool,
    /// Replace each instance's success probability by a 0/1 draw.
    pub bernoulli_reward: bool,
}

impl AgentConfig {
    /// Easy and hard Grover column: one hidden layer of 20, CAP 500, MI 1.
    pub fn grover() -> Self {
        Self {
            cutoff: 6,
            hidden_layers: vec![20],
            learning_rate: 0.01,
            batch_size: 32,
            gamma: 0.9,
            capacity: 500,
            epsilon_max: 0.9,
            epsilon_increment: 0.01,
            target_refresh: 50,
            cooling_rate: 0.1,
            initial_temperature: 10.0,
            delta0: 0.1,
            mi: 1,
            l_sa: 80,
            l_ps: 1000,
            threshold: 0.999,
            update_magnitude: UpdateMagnitude::Sampled,
            epsilon_reset_per_cycle: false,
            bernoulli_reward: false,
        }
    }

    /// 3-SAT column: two hidden layers of 12, CAP 1000, MI 100.
    pub fn sat3() -> Self {
        Self { hidden_layers: vec![12, 12], capacity: 1000, mi: 100, ..Self::grover() }
    }

    pub fn for_family(family: &ProblemFamily) -> Self {
        if family.is_sat() {
            Self::sat3()
        } else {
            Self::grover()
        }
    }

    /// `[C, hidden…, 2C+1]`
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.cutoff];
        sizes.extend(&self.hidden_layers);
        sizes.push(ActionId::count(self.cutoff));
        sizes
    }

    /// Temperature in effect during outer iteration `j` (1-based).
    pub fn temperature(&self, j: usize) -> f64 {
        self.initial_temperature * 10f64.powf(-self.cooling_rate * j as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("epsilon_increment", self.epsilon_increment),
            ("cooling_rate", self.cooling_rate),
            ("initial_temperature", self.initial_temperature),
            ("delta0", self.delta0),
            ("threshold", self.threshold),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("cutoff", self.cutoff),
            ("batch_size", self.batch_size),
            ("capacity", self.capacity),
            ("target_refresh", self.target_refresh),
            ("mi", self.mi),
            ("l_sa", self.l_sa),
            ("l_ps", self.l_ps),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::param(format!("{name} must be at least 1")));
            }
        }
        if self.hidden_layers.iter().any(|&w| w == 0) {
            return Err(Error::param("hidden layer widths must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::param(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.epsilon_max > 0.0 && self.epsilon_max <= 1.0) {
            return Err(Error::param(format!("epsilon_max must lie in (0, 1], got {}", self.epsilon_max)));
        }
        if self.threshold > 1.0 {
            return Err(Error::param(format!("threshold must not exceed 1, got {}", self.threshold)));
        }
        if self.batch_size > self.capacity {
            return Err(Error::param("batch_size exceeds the replay capacity"));
        }
        Ok(())
    }
}

/// Fully connected network with rectifier hidden layers and a linear output.
///
/// Parameters are stored flat, layer by layer: the `out × in` weight matrix
/// in row-major order followed by the `out` biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

impl QNetwork {
    /// Uniform initialization in `±1/√fan_in` for weights and biases.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        let mut offset = 0;
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (fan_in as f64).sqrt().recip();
            for p in &mut net.params[offset..offset + fan_out * (fan_in + 1)] {
                *p = rng.gen_range(-bound..=bound);
            }
            offset += fan_out * (fan_in + 1);
        }
        Ok(net)
    }

    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::param(format!("invalid layer sizes {layer_sizes:?}")));
        }
        let count = layer_sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        Ok(Self { layer_sizes: layer_sizes.to_vec(), params: vec![0.0; count] })
    }

    pub fn from_parameters(layer_sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        net.set_parameters(params)?;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn set_parameters(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), found: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("network parameters must be finite"));
        }
        self.params = params;
        Ok(())
    }

    /// Q-values for every action.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        Ok(self.activations(input).pop().unwrap())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_width() {
            return Err(Error::DimensionMismatch { expected: self.input_width(), found: input.len() });
        }
        Ok(())
    }

    /// Input followed by the output of each layer (post-activation).
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        let mut offset = 0;
        let layers = self.layer_sizes.len() - 1;
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + fan_out * fan_in];
            let biases = &self.params[offset + fan_out * fan_in..offset + fan_out * (fan_in + 1)];
            let prev = &acts[l];
            let out: Vec<f64> = (0..fan_out)
                .map(|o| {
                    let z = biases[o] + weights[o * fan_in..(o + 1) * fan_in].iter().zip(prev).map(|(a, b)| a * b).sum::<f64>();
                    if l + 1 < layers {
                        z.max(0.0)
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
            offset += fan_out * (fan_in + 1);
        }
        acts
    }

    /// Mean squared error `mean_k (y_k − Q(x_k, a_k))²` over the batch and
    /// its gradient with respect to the flat parameters.
    pub fn loss_and_gradient(&self, batch: &[(&[f64], usize, f64)]) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::param("empty training batch"));
        }
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        let layers = self.layer_sizes.len() - 1;
        for &(input, action, target) in batch {
            self.check_input(input)?;
            if action >= self.output_width() {
                return Err(Error::param(format!("action {action} out of range")));
            }
            let acts = self.activations(input);
            let q = acts[layers][action];
            loss += (target - q).powi(2) * scale;
            let mut delta = vec![0.0; self.output_width()];
            delta[action] = -2.0 * (target - q) * scale;
            let mut offset = self.params.len();
            for l in (0..layers).rev() {
                let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
                offset -= fan_out * (fan_in + 1);
                let prev = &acts[l];
                for o in 0..fan_out {
                    if delta[o] == 0.0 {
                        continue;
                    }
                    let row = offset + o * fan_in;
                    for i in 0..fan_in {
                        grad[row + i] += delta[o] * prev[i];
                    }
                    grad[offset + fan_out * fan_in + o] += delta[o];
                }
                if l > 0 {
                    let weights = &self.params[offset..offset + fan_out * fan_in];
                    delta = (0..fan_in)
                        .map(|i| {
                            if prev[i] > 0.0 {
                                (0..fan_out).map(|o| weights[o * fan_in + i] * delta[o]).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                }
            }
        }
        Ok((loss, grad))
    }

    /// `θ ← θ − lr·∇`
    pub fn sgd_step(&mut self, grad: &[f64], learning_rate: f64) -> Result<()> {
        if grad.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), found: grad.len() });
        }
        for (p, g) in self.params.iter_mut().zip(grad) {
            *p -= learning_rate * g;
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numerical("network parameters diverged".into()));
        }
        Ok(())
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.map_or(true, |b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// ε-greedy: the greedy action with probability ε, otherwise a uniformly
/// random one (which may coincide with the greedy action).
pub fn select_action<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> Result<ActionId> {
    if q_values.is_empty() {
        return Err(Error::param("no Q-values to choose from"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::param(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if rng.gen::<f64>() < epsilon {
        Ok(ActionId(argmax(q_values).unwrap()))
    } else {
        Ok(ActionId(rng.gen_range(0..q_values.len())))
    }
}

/// `e = (q_next − q_current)/Δ₀ · Δ`
pub fn acceptance_energy(q_current: f64, q_next: f64, delta: f64, delta0: f64) -> f64 {
    (q_next - q_current) / delta0 * delta
}

/// Draws μ uniform in `[0, 1)` and accepts iff `μ ≤ exp(e/Tem)`.
pub fn acceptance_decision<R: Rng + ?Sized>(
    q_current: f64,
    q_next: f64,
    delta: f64,
    delta0: f64,
    temperature: f64,
    rng: &mut R,
) -> Result<bool> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::param(format!("temperature must be positive, got {temperature}")));
    }
    if !(0.0..=delta0).contains(&delta) {
        return Err(Error::param(format!("delta {delta} outside [0, {delta0}]")));
    }
    let e = acceptance_energy(q_current, q_next, delta, delta0);
    let mu: f64 = rng.gen();
    Ok(mu <= (e / temperature).exp())
}

/// One stored experience: path, executed action, reward of the next path,
/// and the next path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub b: PathState,
    pub action: usize,
    pub reward: f64,
    pub next_b: PathState,
}

/// Fixed-capacity ring buffer; the oldest entry is overwritten first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayMemory {
    capacity: usize,
    entries: Vec<Transition>,
    /// Slot the next insertion overwrites once full.
    next: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::param("replay capacity must be at least 1"));
        }
        Ok(Self { capacity, entries: Vec::with_capacity(capacity), next: 0 })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.entries.len() < self.capacity {
            self.entries.push(t);
        } else {
            self.entries[self.next] = t;
            self.next = (self.next + 1) % self.capacity;
        }
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.entries.split_at(self.next);
        older.iter().chain(newer)
    }

    /// `batch` distinct entries chosen uniformly, or `None` if too few are stored.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Option<Vec<&Transition>> {
        if batch == 0 || self.entries.len() < batch {
            return None;
        }
        Some(index::sample(rng, self.entries.len(), batch).into_iter().map(|i| &self.entries[i]).collect())
    }
}

/// `y = r + γ·max_a' Q(next, a'; θ₋)`
pub fn bellman_target(reward: f64, gamma: f64, next_q: &[f64]) -> f64 {
    reward + gamma * next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// One SGD step on a sampled batch. Returns the loss before the update, or
/// `None` (and leaves `net` untouched) when the memory holds fewer than
/// `batch_size` transitions.
pub fn train_step<R: Rng + ?Sized>(
    net: &mut QNetwork,
    target_net: &QNetwork,
    memory: &ReplayMemory,
    batch_size: usize,
    gamma: f64,
    learning_rate: f64,
    rng: &mut R,
) -> Result<Option<f64>> {
    let Some(batch) = memory.sample(batch_size, rng) else {
        return Ok(None);
    };
    let mut targets = Vec::with_capacity(batch.len());
    for t in &batch {
        targets.push(bellman_target(t.reward, gamma, &target_net.forward(t.next_b.coefficients())?));
    }
    let rows: Vec<(&[f64], usize, f64)> =
        batch.iter().zip(&targets).map(|(t, &y)| (t.b.coefficients(), t.action, y)).collect();
    let (loss, grad) = net.loss_and_gradient(&rows)?;
    net.sgd_step(&grad, learning_rate)?;
    Ok(Some(loss))
}

/// `θ₋ ← θ`
pub fn refresh_target(net: &QNetwork, target_net: &mut QNetwork) -> Result<()> {
    if net.layer_sizes != target_net.layer_sizes {
        return Err(Error::param("target network shape differs from the online network"));
    }
    target_net.params.clone_from(&net.params);
    Ok(())
}

/// Seed for instance `index` of reward evaluation `step` in run `run_seed`.
pub fn instance_seed(run_seed: u64, step: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(run_seed) ^ step) ^ index)
}

/// Reward of a path state: mean success probability over `MI` instances.
///
/// Grover uses the fixed target `m = 0`, so its `MI` instances coincide and
/// one simulation serves all of them. 3-SAT draws `MI` fresh instances per
/// evaluation, seeded by [`instance_seed`]; unsatisfiable ones score 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardModel {
    pub family: ProblemFamily,
    pub total_time: f64,
    pub evolution: EvolutionConfig,
    pub mi: usize,
    pub bernoulli: bool,
}

impl RewardModel {
    pub fn new(family: ProblemFamily, total_time: f64, evolution: EvolutionConfig, mi: usize, bernoulli: bool) -> Result<Self> {
        if mi == 0 {
            return Err(Error::param("mi must be at least 1"));
        }
        evolution.settings(total_time)?;
        Ok(Self { family, total_time, evolution, mi, bernoulli })
    }

    /// Per-instance success probabilities (or 0/1 outcomes in Bernoulli mode).
    pub fn instance_rewards(&self, path: &PathState, run_seed: u64, step: u64) -> Result<Vec<f64>> {
        let settings = self.evolution.settings(self.total_time)?;
        let seeds: Vec<u64> = (0..self.mi as u64).map(|k| instance_seed(run_seed, step, k)).collect();
        let probabilities: Vec<f64> = match self.family {
            ProblemFamily::GroverEasy { n_qubits } | ProblemFamily::GroverHard { n_qubits } => {
                let variant = self.family.grover_variant().unwrap();
                let p = GroverInstance::new(n_qubits, 0, variant)?.run_adiabatic(path, &settings)?;
                vec![p; self.mi]
            }
            ProblemFamily::Sat3 { n_bits, n_clauses } => seeds
                .par_iter()
                .map(|&seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let inst = sample_sat_instance_with(n_bits, n_clauses, &mut rng)?;
                    Ok(inst.run_adiabatic(path, &settings)?.probability())
                })
                .collect::<Result<_>>()?,
        };
        if !self.bernoulli {
            return Ok(probabilities);
        }
        Ok(probabilities
            .iter()
            .zip(&seeds)
            .map(|(&p, &seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB5AD_4ECE_DA1C_E2A9);
                if rng.gen::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn evaluate(&self, path: &PathState, run_seed: u64, step: u64) -> Result<f64> {
        let rewards = self.instance_rewards(path, run_seed, step)?;
        Ok(rewards.iter().sum::<f64>() / rewards.len() as f64)
    }
}

/// Reward of `path` under the agent's MI and reward mode.
pub fn compute_reward(
    path: &PathState,
    family: ProblemFamily,
    total_time: f64,
    evolution: EvolutionConfig,
    config: &AgentConfig,
    run_seed: u64,
    step: u64,
) -> Result<f64> {
    RewardModel::new(family, total_time, evolution, config.mi, config.bernoulli_reward)?.evaluate(path, run_seed, step)
}
