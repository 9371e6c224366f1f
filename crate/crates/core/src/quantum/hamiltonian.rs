use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{self, StateVector};
use crate::error::{Error, Result};

/// One of the structured real-symmetric Hamiltonians used as driver or
/// problem term. Each form has a matrix-free product.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianTerm {
    /// `𝟙 − |v⟩⟨v|` for a real unit vector `v`. O(2^n) product.
    ProjectorComplement { vector: Vec<f64> },
    /// `Σ_q (𝟙 − X_q)/2`. O(n·2^n) product.
    TransverseField { n_qubits: usize },
    /// Diagonal in the computational basis. O(2^n) product.
    Diagonal { values: Vec<f64> },
}

impl HamiltonianTerm {
    pub fn projector_complement(vector: Vec<f64>) -> Result<Self> {
        qubits_for_len(vector.len())?;
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > state::NORM_TOLERANCE {
            return Err(Error::param(format!("projector vector has norm {norm}")));
        }
        Ok(Self::ProjectorComplement { vector })
    }

    pub fn transverse_field(n_qubits: usize) -> Result<Self> {
        state::dimension(n_qubits)?;
        Ok(Self::TransverseField { n_qubits })
    }

    pub fn diagonal(values: Vec<f64>) -> Result<Self> {
        qubits_for_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("diagonal entries must be finite"));
        }
        Ok(Self::Diagonal { values })
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::ProjectorComplement { vector } => vector.len().trailing_zeros() as usize,
            Self::TransverseField { n_qubits } => *n_qubits,
            Self::Diagonal { values } => values.len().trailing_zeros() as usize,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// `out += coef · H · input`. Lengths are assumed to match.
    pub fn accumulate(&self, coef: f64, input: &[Complex64], out: &mut [Complex64]) {
        match self {
            Self::ProjectorComplement { vector } => {
                let overlap: Complex64 = vector.iter().zip(input).map(|(v, x)| x * v).sum();
                let overlap = overlap * coef;
                for ((o, x), v) in out.iter_mut().zip(input).zip(vector) {
                    *o += x * coef - overlap * v;
                }
            }
            Self::TransverseField { n_qubits } => {
                let diag = coef * 0.5 * *n_qubits as f64;
                for (o, x) in out.iter_mut().zip(input) {
                    *o += x * diag;
                }
                let half = 0.5 * coef;
                for q in 0..*n_qubits {
                    let bit = 1usize << q;
                    for (i, o) in out.iter_mut().enumerate() {
                        *o -= input[i ^ bit] * half;
                    }
                }
            }
            Self::Diagonal { values } => {
                for ((o, x), d) in out.iter_mut().zip(input).zip(values) {
                    *o += x * (coef * d);
                }
            }
        }
    }

    /// Lower and upper bounds on the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        match self {
            Self::ProjectorComplement { .. } => (0.0, 1.0),
            Self::TransverseField { n_qubits } => (0.0, *n_qubits as f64),
            Self::Diagonal { values } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        match self {
            Self::ProjectorComplement { vector } => {
                let v = nalgebra::DVector::from_column_slice(vector);
                DMatrix::identity(dim, dim) - &v * v.transpose()
            }
            Self::TransverseField { n_qubits } => {
                let mut m = DMatrix::zeros(dim, dim);
                for i in 0..dim {
                    m[(i, i)] = 0.5 * *n_qubits as f64;
                    for q in 0..*n_qubits {
                        m[(i, i ^ (1 << q))] -= 0.5;
                    }
                }
                m
            }
            Self::Diagonal { values } => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)),
        }
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::param(format!("term length {len} is not 2^n with n ≥ 1")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Driver and problem terms of `H(s) = (1−s)·driver + s·problem`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianPair {
    n_qubits: usize,
    driver: HamiltonianTerm,
    problem: HamiltonianTerm,
}

impl HamiltonianPair {
    pub fn new(driver: HamiltonianTerm, problem: HamiltonianTerm) -> Result<Self> {
        let n_qubits = driver.n_qubits();
        if problem.n_qubits() != n_qubits {
            return Err(Error::DimensionMismatch { expected: driver.dim(), found: problem.dim() });
        }
        Ok(Self { n_qubits, driver, problem })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn driver(&self) -> &HamiltonianTerm {
        &self.driver
    }

    pub fn problem(&self) -> &HamiltonianTerm {
        &self.problem
    }

    /// `H(s)|ψ⟩`; the result is generally not normalized.
    pub fn apply(&self, s: f64, state: &StateVector) -> Result<Vec<Complex64>> {
        self.apply_slice(s, state.amplitudes())
    }

    pub fn apply_slice(&self, s: f64, input: &[Complex64]) -> Result<Vec<Complex64>> {
        if input.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: input.len() });
        }
        let mut out = vec![Complex64::default(); input.len()];
        self.accumulate(s, input, &mut out);
        Ok(out)
    }

    pub(crate) fn accumulate(&self, s: f64, input: &[Complex64], out: &mut [Complex64]) {
        self.driver.accumulate(1.0 - s, input, out);
        self.problem.accumulate(s, input, out);
    }

    /// Bounds on the spectrum of `H(s)` from the bounds of each term.
    pub fn spectral_bounds(&self, s: f64) -> (f64, f64) {
        let scaled = |coef: f64, (lo, hi): (f64, f64)| {
            if coef >= 0.0 {
                (coef * lo, coef * hi)
            } else {
                (coef * hi, coef * lo)
            }
        };
        let (dl, dh) = scaled(1.0 - s, self.driver.spectral_bounds());
        let (pl, ph) = scaled(s, self.problem.spectral_bounds());
        (dl + pl, dh + ph)
    }

    pub fn to_dense(&self, s: f64) -> DMatrix<f64> {
        self.driver.to_dense() * (1.0 - s) + self.problem.to_dense() * s
    }
}

/// `⟨ψ|H(s)|ψ⟩`.
pub fn energy_expectation(pair: &HamiltonianPair, s: f64, state: &StateVector) -> Result<f64> {
    let h_psi = pair.apply(s, state)?;
    let value = state::inner(state.amplitudes(), &h_psi);
    debug_assert!(value.im.abs() <= 1e-10 * value.re.abs().max(1.0));
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_apply(m: &DMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| x[j] * m[(i, j)]).sum())
            .collect()
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let amps = (0..1 << n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::normalized(n, amps).unwrap()
    }

    fn terms(n: usize, rng: &mut ChaCha8Rng) -> Vec<HamiltonianTerm> {
        let mut v: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        vec![
            HamiltonianTerm::projector_complement(v).unwrap(),
            HamiltonianTerm::transverse_field(n).unwrap(),
            HamiltonianTerm::diagonal((0..1 << n).map(|_| rng.gen_range(-3.0..0.0)).collect()).unwrap(),
        ]
    }

    #[test]
    fn matrix_free_products_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            let psi = random_state(n, &mut rng);
            for term in terms(n, &mut rng) {
                let mut out = vec![Complex64::default(); psi.dim()];
                term.accumulate(0.7, psi.amplitudes(), &mut out);
                let dense = dense_apply(&(term.to_dense() * 0.7), psi.amplitudes());
                for (a, b) in out.iter().zip(&dense) {
                    assert!((a - b).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn spectral_bounds_contain_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ts = terms(4, &mut rng);
        let pair = HamiltonianPair::new(ts[1].clone(), ts[2].clone()).unwrap();
        for s in [-0.5, 0.0, 0.3, 1.0, 1.4] {
            let (lo, hi) = pair.spectral_bounds(s);
            let eig = pair.to_dense(s).symmetric_eigenvalues();
            assert!(eig.iter().all(|&e| e >= lo - 1e-12 && e <= hi + 1e-12), "s={s}");
        }
    }

    #[test]
    fn pair_rejects_mismatched_terms() {
        let a = HamiltonianTerm::transverse_field(2).unwrap();
        let b = HamiltonianTerm::transverse_field(3).unwrap();
        assert!(HamiltonianPair::new(a.clone(), b).is_err());
        let pair = HamiltonianPair::new(a.clone(), a).unwrap();
        assert!(pair.apply(0.5, &StateVector::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn term_validation() {
        assert!(HamiltonianTerm::projector_complement(vec![1.0, 1.0]).is_err());
        assert!(HamiltonianTerm::diagonal(vec![0.0, f64::NAN]).is_err());
        assert!(HamiltonianTerm::diagonal(vec![0.0; 3]).is_err());
    }

    #[test]
    fn energy_matches_dense_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=6 {
            let ts = terms(n, &mut rng);
            for (d, p) in [(0, 0), (1, 2), (0, 2), (1, 0)] {
                let pair = HamiltonianPair::new(ts[d].clone(), ts[p].clone()).unwrap();
                let psi = random_state(n, &mut rng);
                let e = energy_expectation(&pair, 0.3, &psi).unwrap();
                let hx = dense_apply(&pair.to_dense(0.3), psi.amplitudes());
                let dense = state::inner(psi.amplitudes(), &hx);
                assert!((e - dense.re).abs() < 1e-9);
                assert!(dense.im.abs() < 1e-10);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn linear_and_hermitian(seed in any::<u64>(), n in 1usize..6, s in -1.0f64..2.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let ts = terms(n, &mut rng);
                let pair = HamiltonianPair::new(ts[1].clone(), ts[2].clone()).unwrap();
                let phi = random_state(n, &mut rng);
                let psi = random_state(n, &mut rng);
                let sum: Vec<Complex64> =
                    phi.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| a + b).collect();
                let h_sum = pair.apply_slice(s, &sum).unwrap();
                let h_phi = pair.apply(s, &phi).unwrap();
                let h_psi = pair.apply(s, &psi).unwrap();
                for i in 0..sum.len() {
                    prop_assert!((h_sum[i] - h_phi[i] - h_psi[i]).norm() < 1e-12);
                }
                let lhs = state::inner(phi.amplitudes(), &h_psi);
                let rhs = state::inner(psi.amplitudes(), &h_phi).conj();
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
