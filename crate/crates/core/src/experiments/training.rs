//! The nested annealing/path-state training loop with exact checkpoint resume.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemFamily;
use crate::quantum::EvolutionConfig;
use crate::rl_agent::{
    acceptance_decision, refresh_target, select_action, train_step, AgentConfig, QNetwork, ReplayMemory, RewardModel,
    Transition, UpdateMagnitude,
};
use crate::schedule::{ActionId, PathState};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub agent: AgentConfig,
    pub family: ProblemFamily,
    pub total_time: f64,
    pub evolution: EvolutionConfig,
    pub seed: u64,
    /// Stop at the first threshold event instead of finishing the loop.
    #[serde(default)]
    pub halt_on_threshold: bool,
}

impl TrainRun {
    /// Published defaults for the family's column.
    pub fn new(family: ProblemFamily, total_time: f64, seed: u64) -> Self {
        Self {
            agent: AgentConfig::for_family(&family),
            family,
            total_time,
            evolution: EvolutionConfig::default(),
            seed,
            halt_on_threshold: false,
        }
    }

    pub fn total_iterations(&self) -> u64 {
        (self.agent.l_sa * self.agent.l_ps) as u64
    }
}

/// One path-state iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Outer (annealing) iteration, 1-based.
    pub j: usize,
    /// Inner (path-state) iteration, 1-based.
    pub i: usize,
    /// Reward evaluations so far, including this one.
    pub iteration: u64,
    pub action_selected: usize,
    pub action_taken: usize,
    pub accepted: bool,
    pub delta: f64,
    pub reward: f64,
    pub epsilon: f64,
    pub temperature: f64,
    /// Loss before this iteration's SGD step, if one was taken.
    pub loss: Option<f64>,
    pub target_refreshed: bool,
    pub training_active: bool,
}

/// Complete mutable state of a run; serializing it allows exact resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerState {
    pub net: QNetwork,
    pub target: QNetwork,
    pub memory: ReplayMemory,
    pub path: PathState,
    pub best_path: PathState,
    pub best_reward: f64,
    pub epsilon: f64,
    pub epsilon_max: f64,
    pub temperature: f64,
    /// Coordinates of the next iteration.
    pub j: usize,
    pub i: usize,
    pub iteration: u64,
    pub learn_steps: u64,
    pub target_refreshes: u64,
    pub training_active: bool,
    /// Iteration of the first reward at or above the threshold.
    pub threshold_iteration: Option<u64>,
    pub rng: ChaCha8Rng,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub run: TrainRun,
    pub state: TrainerState,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Parse(format!("checkpoint: {e}")))?;
        if cp.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint format_version {}", cp.format_version)));
        }
        Ok(cp)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_json()?)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Result of [`Trainer::run`].
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    /// Path with the highest reward seen.
    pub best_path: PathState,
    pub best_reward: f64,
    /// Path state when the loop ended.
    pub final_path: PathState,
    pub threshold_iteration: Option<u64>,
    pub trace: Vec<TraceRecord>,
}

pub struct Trainer {
    run: TrainRun,
    reward: RewardModel,
    state: TrainerState,
}

impl Trainer {
    /// Fresh run starting from the linear path and a seeded network.
    pub fn new(run: TrainRun) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
        let net = QNetwork::new(&run.agent.layer_sizes(), &mut rng)?;
        Self::start(run, net, None, rng)
    }

    /// Fresh run whose network and starting path come from `source`.
    pub fn warm_start(run: TrainRun, source: &Checkpoint) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(run.seed);
        let net = source.state.net.clone();
        if net.layer_sizes() != run.agent.layer_sizes() {
            return Err(Error::param(format!(
                "source network {:?} does not match layer sizes {:?}",
                net.layer_sizes(),
                run.agent.layer_sizes()
            )));
        }
        Self::start(run, net, Some(source.state.best_path.clone()), rng)
    }

    fn start(run: TrainRun, net: QNetwork, path: Option<PathState>, rng: ChaCha8Rng) -> Result<Self> {
        run.agent.validate()?;
        let reward = RewardModel::new(run.family, run.total_time, run.evolution, run.agent.mi, run.agent.bernoulli_reward)?;
        let cutoff = run.agent.cutoff;
        let path = path.unwrap_or_else(|| PathState::zeros(cutoff));
        if path.cutoff() != cutoff {
            return Err(Error::param(format!("starting path has {} coefficients, expected {cutoff}", path.cutoff())));
        }
        let state = TrainerState {
            target: net.clone(),
            net,
            memory: ReplayMemory::new(run.agent.capacity)?,
            best_path: path.clone(),
            best_reward: f64::NEG_INFINITY,
            path,
            epsilon: 0.0,
            epsilon_max: run.agent.epsilon_max,
            temperature: run.agent.initial_temperature,
            j: 1,
            i: 1,
            iteration: 0,
            learn_steps: 0,
            target_refreshes: 0,
            training_active: true,
            threshold_iteration: None,
            rng,
        };
        Ok(Self { run, reward, state })
    }

    pub fn resume(checkpoint: Checkpoint) -> Result<Self> {
        let Checkpoint { run, state, .. } = checkpoint;
        run.agent.validate()?;
        let reward = RewardModel::new(run.family, run.total_time, run.evolution, run.agent.mi, run.agent.bernoulli_reward)?;
        Ok(Self { run, reward, state })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { format_version: CHECKPOINT_FORMAT_VERSION, run: self.run.clone(), state: self.state.clone() }
    }

    pub fn run_config(&self) -> &TrainRun {
        &self.run
    }

    pub fn state(&self) -> &TrainerState {
        &self.state
    }

    pub fn is_finished(&self) -> bool {
        self.state.j > self.run.agent.l_sa || (self.run.halt_on_threshold && self.state.threshold_iteration.is_some())
    }

    /// Runs one path-state iteration; `None` once the loop is complete.
    pub fn step(&mut self) -> Result<Option<TraceRecord>> {
        if self.is_finished() {
            return Ok(None);
        }
        let cfg = &self.run.agent;
        let st = &mut self.state;
        if st.i == 1 && st.training_active {
            st.temperature = cfg.temperature(st.j);
            if cfg.epsilon_reset_per_cycle {
                st.epsilon = 0.0;
            }
        }
        st.iteration += 1;

        let q = st.net.forward(st.path.coefficients())?;
        let selected = select_action(&q, st.epsilon, &mut st.rng)?;
        let delta = st.rng.gen_range(0.0..=cfg.delta0);
        let proposal = st.path.apply(selected, cfg.delta0)?;
        let q_next = st.net.forward(proposal.coefficients())?[selected.index()];
        let accepted = acceptance_decision(q[selected.index()], q_next, delta, cfg.delta0, st.temperature, &mut st.rng)?;
        let taken = if accepted { selected } else { ActionId::IDENTITY };
        let magnitude = match cfg.update_magnitude {
            UpdateMagnitude::Sampled => delta,
            UpdateMagnitude::Fixed => cfg.delta0,
        };
        let next = st.path.apply(taken, magnitude)?;
        let reward = self.reward.evaluate(&next, self.run.seed, st.iteration)?;
        st.memory.push(Transition { b: st.path.clone(), action: taken.index(), reward, next_b: next.clone() });

        let mut loss = None;
        let mut target_refreshed = false;
        if st.training_active && st.memory.len() >= cfg.batch_size {
            if st.learn_steps % cfg.target_refresh as u64 == 0 {
                refresh_target(&st.net, &mut st.target)?;
                st.target_refreshes += 1;
                target_refreshed = true;
            }
            loss = train_step(&mut st.net, &st.target, &st.memory, cfg.batch_size, cfg.gamma, cfg.learning_rate, &mut st.rng)?;
            st.learn_steps += 1;
        }
        st.epsilon = (st.epsilon + cfg.epsilon_increment).min(st.epsilon_max);

        let record = TraceRecord {
            j: st.j,
            i: st.i,
            iteration: st.iteration,
            action_selected: selected.index(),
            action_taken: taken.index(),
            accepted,
            delta,
            reward,
            epsilon: st.epsilon,
            temperature: st.temperature,
            loss,
            target_refreshed,
            training_active: st.training_active,
        };

        if reward > st.best_reward {
            st.best_reward = reward;
            st.best_path = next.clone();
        }
        if st.training_active && reward >= cfg.threshold {
            st.training_active = false;
            st.epsilon_max = 1.0;
            st.threshold_iteration = Some(st.iteration);
        }
        st.path = next;
        st.i += 1;
        if st.i > cfg.l_ps {
            st.i = 1;
            st.j += 1;
        }
        Ok(Some(record))
    }

    /// Runs until the loop completes. With `checkpoint_path`, the state is
    /// saved every `checkpoint_every` iterations, at the end, and before an
    /// error is returned.
    pub fn run(&mut self, checkpoint_path: Option<&Path>, checkpoint_every: Option<u64>) -> Result<TrainingOutcome> {
        let mut trace = Vec::new();
        loop {
            match self.step() {
                Ok(Some(record)) => {
                    trace.push(record);
                    if let (Some(path), Some(every)) = (checkpoint_path, checkpoint_every) {
                        if every > 0 && self.state.iteration % every == 0 {
                            self.checkpoint().save(path)?;
                        }
                    }
                }
                Ok(None) => break,
                Err(e) => {
                    if let Some(path) = checkpoint_path {
                        self.checkpoint().save(path)?;
                    }
                    return Err(e);
                }
            }
        }
        if let Some(path) = checkpoint_path {
            self.checkpoint().save(path)?;
        }
        Ok(self.outcome(trace))
    }

    fn outcome(&self, trace: Vec<TraceRecord>) -> TrainingOutcome {
        TrainingOutcome {
            best_path: self.state.best_path.clone(),
            best_reward: self.state.best_reward,
            final_path: self.state.path.clone(),
            threshold_iteration: self.state.threshold_iteration,
            trace,
        }
    }
}

/// Trains from scratch without checkpoints.
pub fn run_training(run: TrainRun) -> Result<TrainingOutcome> {
    Trainer::new(run)?.run(None, None)
}
