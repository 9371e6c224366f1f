//! Problem encodings: easy and hard Grover search, and random 3-SAT.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{evolve, evolve_two_level, EvolutionSettings, HamiltonianPair, HamiltonianTerm, StateVector};
use crate::schedule::Schedule;

/// Which driver Hamiltonian a Grover instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroverVariant {
    /// `H_B = 𝟙 − |ψ₀⟩⟨ψ₀|`; dynamics reduce to two levels.
    Easy,
    /// `H_B = Σ_q (𝟙 − X_q)/2`.
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroverInstance {
    pub n_qubits: usize,
    pub target: usize,
    pub variant: GroverVariant,
}

impl GroverInstance {
    pub fn new(n_qubits: usize, target: usize, variant: GroverVariant) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 30 {
            return Err(Error::param(format!("qubit count {n_qubits} outside 1..=30")));
        }
        if target >= 1 << n_qubits {
            return Err(Error::param(format!("target {target} out of range for {n_qubits} qubits")));
        }
        Ok(Self { n_qubits, target, variant })
    }

    pub fn build_hamiltonians(&self) -> Result<HamiltonianPair> {
        let dim = 1usize << self.n_qubits;
        let driver = match self.variant {
            GroverVariant::Easy => HamiltonianTerm::projector_complement(vec![(dim as f64).sqrt().recip(); dim])?,
            GroverVariant::Hard => HamiltonianTerm::transverse_field(self.n_qubits)?,
        };
        let mut marked = vec![0.0; dim];
        marked[self.target] = 1.0;
        HamiltonianPair::new(driver, HamiltonianTerm::projector_complement(marked)?)
    }

    /// `|⟨m|ψ⟩|²`
    pub fn success_probability(&self, state: &StateVector) -> f64 {
        state.probability(self.target)
    }

    /// Success probability after annealing along `schedule`. The easy
    /// variant uses the exact two-level reduction.
    pub fn run_adiabatic<S: Schedule + ?Sized>(&self, schedule: &S, settings: &EvolutionSettings) -> Result<f64> {
        match self.variant {
            GroverVariant::Easy => Ok(evolve_two_level(self.n_qubits, schedule, settings)?.success_probability()),
            GroverVariant::Hard => {
                let pair = self.build_hamiltonians()?;
                let out = evolve(&pair, schedule, settings, &StateVector::uniform(self.n_qubits)?)?;
                Ok(self.success_probability(&out.state))
            }
        }
    }
}

/// One 3-SAT clause: three distinct bits and the single assignment of those
/// bits that violates it. The other seven assignments form its truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SatClause {
    qubits: [usize; 3],
    excluded: u8,
}

impl SatClause {
    /// `excluded` packs `(z_{q1}, z_{q2}, z_{q3})` as `z_{q1}·4 + z_{q2}·2 + z_{q3}`.
    pub fn new(qubits: [usize; 3], excluded: u8) -> Result<Self> {
        if qubits[0] == qubits[1] || qubits[0] == qubits[2] || qubits[1] == qubits[2] {
            return Err(Error::param(format!("clause bits {qubits:?} are not distinct")));
        }
        if excluded > 7 {
            return Err(Error::param(format!("excluded pattern {excluded} is not a 3-bit value")));
        }
        Ok(Self { qubits, excluded })
    }

    pub fn qubits(&self) -> [usize; 3] {
        self.qubits
    }

    pub fn excluded(&self) -> u8 {
        self.excluded
    }

    /// Packed 3-bit pattern this clause sees in `assignment`.
    pub fn pattern(&self, assignment: u64) -> u8 {
        let [a, b, c] = self.qubits;
        (((assignment >> a) & 1) << 2 | ((assignment >> b) & 1) << 1 | ((assignment >> c) & 1)) as u8
    }

    pub fn is_satisfied_by(&self, assignment: u64) -> bool {
        self.pattern(assignment) != self.excluded
    }

    /// The seven satisfying patterns, packed as in [`SatClause::new`].
    pub fn truth_table(&self) -> Vec<u8> {
        (0..8).filter(|&p| p != self.excluded).collect()
    }
}

/// Random 3-SAT instance over `n_bits` boolean variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInstance {
    n_bits: usize,
    clauses: Vec<SatClause>,
}

/// Largest bit count the exhaustive solver accepts.
pub const MAX_BRUTE_FORCE_BITS: usize = 24;

impl SatInstance {
    pub fn new(n_bits: usize, clauses: Vec<SatClause>) -> Result<Self> {
        if !(3..=30).contains(&n_bits) {
            return Err(Error::param(format!("bit count {n_bits} outside 3..=30")));
        }
        if let Some(c) = clauses.iter().find(|c| c.qubits.iter().any(|&q| q >= n_bits)) {
            return Err(Error::param(format!("clause {:?} references a bit ≥ {n_bits}", c.qubits)));
        }
        Ok(Self { n_bits, clauses })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[SatClause] {
        &self.clauses
    }

    /// `H_P` diagonal: minus the number of clauses each assignment satisfies.
    pub fn energy_diagonal(&self) -> Vec<f64> {
        (0..1u64 << self.n_bits).map(|z| -(self.satisfied_count(z) as f64)).collect()
    }

    pub fn satisfied_count(&self, assignment: u64) -> usize {
        self.clauses.iter().filter(|c| c.is_satisfied_by(assignment)).count()
    }

    pub fn build_hamiltonians(&self) -> Result<HamiltonianPair> {
        HamiltonianPair::new(
            HamiltonianTerm::transverse_field(self.n_bits)?,
            HamiltonianTerm::diagonal(self.energy_diagonal())?,
        )
    }

    /// Restriction to the bits that appear in at least one clause.
    ///
    /// A bit outside every clause only sees its own transverse field, so it
    /// stays in `|+⟩` for any schedule and never affects whether an
    /// assignment is a solution. The success probability of the restricted
    /// instance therefore equals that of the full one. Returns the restricted
    /// instance and the number of dropped bits. The restricted instance may
    /// have fewer than three bits only if there are no clauses; in that case
    /// three bits are kept.
    pub fn active_restriction(&self) -> (SatInstance, usize) {
        let mut used = vec![false; self.n_bits];
        for c in &self.clauses {
            for &q in &c.qubits {
                used[q] = true;
            }
        }
        let mut relabel = vec![usize::MAX; self.n_bits];
        let mut next = 0;
        for (q, u) in used.iter().enumerate() {
            if *u {
                relabel[q] = next;
                next += 1;
            }
        }
        let kept = next.max(3);
        let clauses = self
            .clauses
            .iter()
            .map(|c| SatClause { qubits: c.qubits.map(|q| relabel[q]), excluded: c.excluded })
            .collect();
        (SatInstance { n_bits: kept, clauses }, self.n_bits - kept)
    }

    /// All satisfying assignments by exhaustive enumeration.
    pub fn solve_brute_force(&self) -> Result<Vec<u64>> {
        if self.n_bits > MAX_BRUTE_FORCE_BITS {
            return Err(Error::Capability(format!(
                "exhaustive search limited to {MAX_BRUTE_FORCE_BITS} bits (got {})",
                self.n_bits
            )));
        }
        let all = self.clauses.len();
        Ok((0..1u64 << self.n_bits).filter(|&z| self.satisfied_count(z) == all).collect())
    }

    /// Probability mass of `state` on satisfying assignments.
    pub fn success_probability(&self, state: &StateVector) -> Result<SatSuccess> {
        if state.n_qubits() != self.n_bits {
            return Err(Error::DimensionMismatch { expected: 1 << self.n_bits, found: state.dim() });
        }
        let solutions = self.solve_brute_force()?;
        if solutions.is_empty() {
            return Ok(SatSuccess::Unsatisfiable);
        }
        Ok(SatSuccess::Satisfiable(solutions.iter().map(|&z| state.probability(z as usize)).sum()))
    }

    /// Success after annealing along `schedule`, simulated on the active bits
    /// only (see [`SatInstance::active_restriction`]).
    pub fn run_adiabatic<S: Schedule + ?Sized>(&self, schedule: &S, settings: &EvolutionSettings) -> Result<SatSuccess> {
        let (active, _) = self.active_restriction();
        if active.solve_brute_force()?.is_empty() {
            return Ok(SatSuccess::Unsatisfiable);
        }
        let pair = active.build_hamiltonians()?;
        let out = evolve(&pair, schedule, settings, &StateVector::uniform(active.n_bits)?)?;
        active.success_probability(&out.state)
    }
}

/// Success of a 3-SAT run; unsatisfiable instances have no verifiable output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SatSuccess {
    Satisfiable(f64),
    Unsatisfiable,
}

impl SatSuccess {
    /// Probability, with unsatisfiable instances counted as 0.
    pub fn probability(self) -> f64 {
        match self {
            SatSuccess::Satisfiable(p) => p,
            SatSuccess::Unsatisfiable => 0.0,
        }
    }

    pub fn is_satisfiable(self) -> bool {
        matches!(self, SatSuccess::Satisfiable(_))
    }
}

/// Samples clauses independently: a uniform 3-subset of bits in uniform
/// random order and a uniformly chosen excluded assignment.
pub fn sample_sat_instance_with<R: Rng + ?Sized>(n_bits: usize, n_clauses: usize, rng: &mut R) -> Result<SatInstance> {
    if n_bits < 3 {
        return Err(Error::param(format!("3-SAT needs at least 3 bits, got {n_bits}")));
    }
    if n_clauses == 0 {
        return Err(Error::param("need at least one clause"));
    }
    let clauses = (0..n_clauses)
        .map(|_| {
            let picked = index::sample(rng, n_bits, 3);
            let excluded = rng.gen_range(0..8u8);
            SatClause { qubits: [picked.index(0), picked.index(1), picked.index(2)], excluded }
        })
        .collect();
    SatInstance::new(n_bits, clauses)
}

pub fn sample_sat_instance(n_bits: usize, n_clauses: usize, seed: u64) -> Result<SatInstance> {
    sample_sat_instance_with(n_bits, n_clauses, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub const SAT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SatInstanceJson {
    #[serde(default = "default_version")]
    format_version: u32,
    n_bits: usize,
    clauses: Vec<SatClauseJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SatClauseJson {
    qubits: [usize; 3],
    excluded: String,
}

fn default_version() -> u32 {
    SAT_FORMAT_VERSION
}

impl SatInstance {
    /// `{n_bits, clauses: [{qubits: [a, b, c], excluded: "b1b2b3"}]}`, where
    /// character `k` of `excluded` is the violating value of `qubits[k]`.
    pub fn to_json(&self) -> Result<String> {
        let doc = SatInstanceJson {
            format_version: SAT_FORMAT_VERSION,
            n_bits: self.n_bits,
            clauses: self
                .clauses
                .iter()
                .map(|c| SatClauseJson { qubits: c.qubits, excluded: format!("{:03b}", c.excluded) })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SatInstanceJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.format_version != SAT_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format_version {}", doc.format_version)));
        }
        let clauses = doc
            .clauses
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let bits = c.excluded.as_bytes();
                if bits.len() != 3 || bits.iter().any(|b| *b != b'0' && *b != b'1') {
                    return Err(Error::Parse(format!("clause {i}: excluded must be three of 0/1, got {:?}", c.excluded)));
                }
                let excluded = bits.iter().fold(0u8, |acc, b| acc << 1 | (b - b'0'));
                SatClause::new(c.qubits, excluded).map_err(|e| Error::Parse(format!("clause {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SatInstance::new(doc.n_bits, clauses).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// A concrete instance of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemInstance {
    Grover(GroverInstance),
    Sat(SatInstance),
}

impl ProblemInstance {
    pub fn build_hamiltonians(&self) -> Result<HamiltonianPair> {
        match self {
            ProblemInstance::Grover(g) => g.build_hamiltonians(),
            ProblemInstance::Sat(s) => s.build_hamiltonians(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            ProblemInstance::Grover(g) => g.n_qubits,
            ProblemInstance::Sat(s) => s.n_bits,
        }
    }

    /// `|ψ₀⟩`, shared by every family.
    pub fn initial_state(&self) -> Result<StateVector> {
        StateVector::uniform(self.n_qubits())
    }

    /// Unsatisfiable 3-SAT instances count as 0.
    pub fn success_probability(&self, state: &StateVector) -> Result<f64> {
        match self {
            ProblemInstance::Grover(g) => Ok(g.success_probability(state)),
            ProblemInstance::Sat(s) => Ok(s.success_probability(state)?.probability()),
        }
    }

    /// Unsatisfiable 3-SAT instances count as 0.
    pub fn run_adiabatic<S: Schedule + ?Sized>(&self, schedule: &S, settings: &EvolutionSettings) -> Result<f64> {
        match self {
            ProblemInstance::Grover(g) => g.run_adiabatic(schedule, settings),
            ProblemInstance::Sat(s) => Ok(s.run_adiabatic(schedule, settings)?.probability()),
        }
    }
}

/// Problem family and size, without a concrete instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProblemFamily {
    GroverEasy { n_qubits: usize },
    GroverHard { n_qubits: usize },
    Sat3 { n_bits: usize, n_clauses: usize },
}

impl ProblemFamily {
    pub fn n_qubits(&self) -> usize {
        match *self {
            ProblemFamily::GroverEasy { n_qubits } | ProblemFamily::GroverHard { n_qubits } => n_qubits,
            ProblemFamily::Sat3 { n_bits, .. } => n_bits,
        }
    }

    pub fn grover_variant(&self) -> Option<GroverVariant> {
        match self {
            ProblemFamily::GroverEasy { .. } => Some(GroverVariant::Easy),
            ProblemFamily::GroverHard { .. } => Some(GroverVariant::Hard),
            ProblemFamily::Sat3 { .. } => None,
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, ProblemFamily::Sat3 { .. })
    }

    /// Same family at a different size (qubits or bits).
    pub fn with_size(&self, n: usize) -> Self {
        match *self {
            ProblemFamily::GroverEasy { .. } => ProblemFamily::GroverEasy { n_qubits: n },
            ProblemFamily::GroverHard { .. } => ProblemFamily::GroverHard { n_qubits: n },
            ProblemFamily::Sat3 { n_clauses, .. } => ProblemFamily::Sat3 { n_bits: n, n_clauses },
        }
    }
}

impl fmt::Display for ProblemFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemFamily::GroverEasy { n_qubits } => write!(f, "grover-easy(n={n_qubits})"),
            ProblemFamily::GroverHard { n_qubits } => write!(f, "grover-hard(n={n_qubits})"),
            ProblemFamily::Sat3 { n_bits, n_clauses } => write!(f, "sat3(N_b={n_bits}, N_C={n_clauses})"),
        }
    }
}

/// Command-line spelling of a family name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    GroverEasy,
    GroverHard,
    Sat3,
}

impl FromStr for FamilyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grover-easy" => Ok(FamilyName::GroverEasy),
            "grover-hard" => Ok(FamilyName::GroverHard),
            "sat3" => Ok(FamilyName::Sat3),
            other => Err(Error::param(format!("unknown problem {other:?} (grover-easy, grover-hard, sat3)"))),
        }
    }
}
