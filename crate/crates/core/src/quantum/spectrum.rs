use super::hamiltonian::HamiltonianPair;
use crate::error::{Error, Result};

/// Largest Hilbert-space dimension handled by dense diagonalization.
pub const MAX_DENSE_DIM: usize = 4096;

/// The `k` lowest eigenvalues of `H(s)`, ascending, by dense diagonalization.
pub fn exact_spectrum(pair: &HamiltonianPair, s: f64, k: usize) -> Result<Vec<f64>> {
    if pair.dim() > MAX_DENSE_DIM {
        return Err(Error::Capability(format!(
            "dense diagonalization limited to dimension {MAX_DENSE_DIM} (got {}); \
             use the analytic two-level gap for easy Grover",
            pair.dim()
        )));
    }
    if k == 0 || k > pair.dim() {
        return Err(Error::param(format!("requested {k} eigenvalues of a {}-dim operator", pair.dim())));
    }
    if !s.is_finite() {
        return Err(Error::param("interpolation parameter must be finite"));
    }
    let mut eig: Vec<f64> = pair.to_dense(s).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig.truncate(k);
    Ok(eig)
}

/// Gap of the easy-Grover two-level block, `g(s) = √(1 − 4(1 − 1/N) s(1 − s))`.
pub fn easy_grover_gap(n_qubits: usize, s: f64) -> f64 {
    let inv_n = (-(n_qubits as f64) * std::f64::consts::LN_2).exp();
    (1.0 - 4.0 * (1.0 - inv_n) * s * (1.0 - s)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::HamiltonianTerm;

    #[test]
    fn rejects_large_or_empty_requests() {
        let big = HamiltonianPair::new(
            HamiltonianTerm::transverse_field(13).unwrap(),
            HamiltonianTerm::transverse_field(13).unwrap(),
        )
        .unwrap();
        assert!(matches!(exact_spectrum(&big, 0.5, 2), Err(Error::Capability(_))));
        let small = HamiltonianPair::new(
            HamiltonianTerm::transverse_field(2).unwrap(),
            HamiltonianTerm::diagonal(vec![0.0, -1.0, -1.0, -2.0]).unwrap(),
        )
        .unwrap();
        assert!(exact_spectrum(&small, 0.5, 0).is_err());
        assert!(exact_spectrum(&small, 0.5, 5).is_err());
        let all = exact_spectrum(&small, 1.0, 4).unwrap();
        assert_eq!(all, vec![-2.0, -1.0, -1.0, 0.0]);
    }

    #[test]
    fn transverse_field_levels_are_hamming_weights() {
        let pair = HamiltonianPair::new(
            HamiltonianTerm::transverse_field(3).unwrap(),
            HamiltonianTerm::transverse_field(3).unwrap(),
        )
        .unwrap();
        let e = exact_spectrum(&pair, 0.0, 8).unwrap();
        let expected = [0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0];
        for (a, b) in e.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
