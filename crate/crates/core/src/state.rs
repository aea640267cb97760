//! States as coefficient vectors over a spectral basis.

use nalgebra::DVector;
use num_complex::Complex64;

/// Coefficients c_k = ⟨φ_k, ψ⟩ for k = 1..N.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub coeffs: DVector<Complex64>,
}

impl QuantumState {
    pub fn new(coeffs: DVector<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn from_slice(c: &[Complex64]) -> Self {
        Self::new(DVector::from_column_slice(c))
    }

    /// φ_k in a truncation of order `n` (k is 1-based).
    pub fn basis_vector(k: usize, n: usize) -> Self {
        assert!(k >= 1 && k <= n, "mode {k} outside 1..={n}");
        let mut c = DVector::zeros(n);
        c[k - 1] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// ‖ψ‖_(s) = (Σ |k^s c_k|²)^{1/2}.
    pub fn hs_norm(&self, s: f64) -> f64 {
        hs_norm(self.coeffs.as_slice(), s)
    }

    pub fn normalized(&self) -> Self {
        Self::new(self.coeffs.unscale(self.norm()))
    }

    /// ⟨self, other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs.dotc(&other.coeffs)
    }
}

/// Weighted sequence norm (Σ_k |k^s c_k|²)^{1/2} with k starting at 1.
pub fn hs_norm(c: &[Complex64], s: f64) -> f64 {
    assert!(s >= 0.0, "regularity index must be non-negative");
    // scale to avoid overflow for large s
    let terms: Vec<f64> = c
        .iter()
        .enumerate()
        .map(|(i, z)| ((i + 1) as f64).powf(s) * z.norm())
        .collect();
    let max = terms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    max * terms.iter().map(|t| (t / max).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basis_vectors() {
        let e1 = QuantumState::basis_vector(1, 4);
        for s in [0.0, 1.0, 3.0, 7.5] {
            assert_eq!(e1.hs_norm(s), 1.0);
        }
        let e2 = QuantumState::basis_vector(2, 4);
        assert!((e2.hs_norm(3.0) - 8.0).abs() < 1e-15);
    }

    fn coeffs() -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }

    proptest! {
        #[test]
        fn s_zero_is_euclidean(c in coeffs()) {
            let direct: f64 = c.iter().map(|z| z.re * z.re + z.im * z.im).sum::<f64>().sqrt();
            prop_assert!((hs_norm(&c, 0.0) - direct).abs() <= 1e-14 * direct.max(1.0));
        }

        #[test]
        fn monotone_in_s(c in coeffs(), s1 in 0.0f64..4.0, ds in 0.0f64..3.0) {
            prop_assert!(hs_norm(&c, s1) <= hs_norm(&c, s1 + ds) * (1.0 + 1e-14));
        }
    }
}
