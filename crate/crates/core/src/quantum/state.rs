use num_complex::Complex64;

use crate::error::{Error, Result};

/// Norm tolerance for a state vector to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Pure state of `n` qubits in the computational basis.
///
/// Basis index `z` encodes qubit `q` in bit `q` of `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let state = Self { n_qubits, amplitudes };
        let drift = (state.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::param(format!("state norm off by {drift:.3e}")));
        }
        Ok(state)
    }

    /// Rescales arbitrary (non-zero) amplitudes to unit norm.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let norm = norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::param("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = dimension(n_qubits)?;
        if index >= dim {
            return Err(Error::param(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// The uniform superposition `|+⟩^⊗n`, ground state of both driver Hamiltonians.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        let dim = dimension(n_qubits)?;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { n_qubits, amplitudes: vec![a; dim] })
    }

    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|⟨index|ψ⟩|²`
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes.get(index).map_or(0.0, |a| a.norm_sqr())
    }
}

pub(crate) fn dimension(n_qubits: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > 30 {
        return Err(Error::param(format!("qubit count {n_qubits} outside 1..=30")));
    }
    Ok(1 << n_qubits)
}

fn check_len(n_qubits: usize, len: usize) -> Result<()> {
    let dim = dimension(n_qubits)?;
    if len != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: len });
    }
    Ok(())
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_state_is_normalized() {
        for n in 1..=8 {
            let psi = StateVector::uniform(n).unwrap();
            assert_eq!(psi.dim(), 1 << n);
            assert!((psi.norm() - 1.0).abs() < 1e-12);
            assert!((psi.probability(3 % psi.dim()) - 1.0 / psi.dim() as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_vectors() {
        let two = vec![Complex64::new(1.0, 0.0); 2];
        assert!(matches!(StateVector::new(1, two.clone()), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            StateVector::new(2, two),
            Err(Error::DimensionMismatch { expected: 4, found: 2 })
        ));
        assert!(StateVector::basis(2, 4).is_err());
        assert!(StateVector::normalized(1, vec![Complex64::default(); 2]).is_err());
    }

    #[test]
    fn basis_overlap() {
        let a = StateVector::basis(3, 5).unwrap();
        let u = StateVector::uniform(3).unwrap();
        let ov = a.inner(&u).unwrap();
        assert!((ov.norm_sqr() - 0.125).abs() < 1e-15);
    }
}
