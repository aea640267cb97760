//! Admissible planar generators and the dimension of the Lie algebra they span.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::operator::CouplingMatrix;

/// Residual below which a commutator is taken to lie in the current span.
pub const SPAN_TOLERANCE: f64 = 1e-9;

/// Pairs (j, k), j < k, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl GeneratorSet {
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .filter(|(a, b)| a != b && *b <= n && *a >= 1)
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        Self { n, pairs }
    }

    /// Every pair of 1..=n.
    pub fn full(n: usize) -> Self {
        Self::new(n, (1..=n).flat_map(|j| (j + 1..=n).map(move |k| (j, k))).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, j: usize, k: usize) -> bool {
        self.pairs.contains(&(j.min(k), j.max(k)))
    }
}

/// E^θ_{jk}: e^{iθ} at (j, k), −e^{−iθ} at (k, j), zero elsewhere.
pub fn planar_generator(n: usize, j: usize, k: usize, theta: f64) -> DMatrix<Complex64> {
    let mut e = DMatrix::zeros(n, n);
    e[(j - 1, k - 1)] = Complex64::from_polar(1.0, theta);
    e[(k - 1, j - 1)] = -Complex64::from_polar(1.0, -theta);
    e
}

/// Pairs with |B_jk| > `tol` whose transition frequency |μ_j − μ_k| is not
/// shared (within `freq_tol`) by any other coupled pair.
pub fn admissible_generators(b: &CouplingMatrix, mu: &[f64], n: usize, tol: f64, freq_tol: f64) -> GeneratorSet {
    let n = n.min(b.dim()).min(mu.len());
    let coupled: Vec<(usize, usize, f64)> = (1..=n)
        .flat_map(|j| (j + 1..=n).map(move |k| (j, k)))
        .filter(|&(j, k)| b.get(j, k).norm() > tol)
        .map(|(j, k)| (j, k, (mu[k - 1] - mu[j - 1]).abs()))
        .collect();
    let pairs = coupled
        .iter()
        .filter(|&&(j, k, f)| {
            f > freq_tol
                && !coupled
                    .iter()
                    .any(|&(a, c, g)| (a, c) != (j, k) && (f - g).abs() <= freq_tol)
        })
        .map(|&(j, k, _)| (j, k))
        .collect();
    GeneratorSet::new(n, pairs)
}

fn flatten(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unflatten(v: &[f64], n: usize) -> DMatrix<Complex64> {
    DMatrix::from_iterator(n, n, v.chunks(2).map(|c| Complex64::new(c[0], c[1])))
}

/// Adds `v` to the orthonormal list `basis` when its residual exceeds the tolerance.
fn try_extend(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> bool {
    let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return false;
    }
    // two passes of modified Gram–Schmidt
    for _ in 0..2 {
        for q in basis.iter() {
            let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (x, qi) in v.iter_mut().zip(q) {
                *x -= d * qi;
            }
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= SPAN_TOLERANCE * norm0.max(1.0) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    basis.push(v);
    true
}

/// Real dimension of the Lie algebra generated by E^0_{jk}, E^{π/2}_{jk}
/// over the pairs of `gens`; at most N² − 1.
pub fn lie_closure_rank(gens: &GeneratorSet) -> usize {
    let n = gens.n;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &(j, k) in &gens.pairs {
        for theta in [0.0, std::f64::consts::FRAC_PI_2] {
            try_extend(&mut basis, flatten(&planar_generator(n, j, k, theta)));
        }
    }
    let limit = (n * n).saturating_sub(1);
    let mut checked = 0;
    // commutators of each new element with all earlier ones
    while checked < basis.len() && basis.len() < limit {
        let x = unflatten(&basis[checked], n);
        for i in 0..checked {
            let y = unflatten(&basis[i], n);
            let c = &x * &y - &y * &x;
            try_extend(&mut basis, flatten(&c));
            if basis.len() >= limit {
                break;
            }
        }
        checked += 1;
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::tadpole_basis;
    use crate::operator::tadpole_operator;

    #[test]
    fn generator_is_anti_hermitian() {
        let e = planar_generator(4, 2, 4, 0.7);
        assert!((&e + e.adjoint()).iter().all(|z| z.norm() < 1e-16));
        assert_eq!(e.trace(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn full_sets_span_su_n() {
        for n in 2..=5 {
            assert_eq!(lie_closure_rank(&GeneratorSet::full(n)), n * n - 1);
        }
    }

    #[test]
    fn single_pair_gives_su2() {
        let r = lie_closure_rank(&GeneratorSet::new(3, vec![(1, 2)]));
        assert_eq!(r, 3);
    }

    #[test]
    fn chain_is_enough() {
        // 1–2, 2–3, 3–4 connect all levels
        let r = lie_closure_rank(&GeneratorSet::new(4, vec![(1, 2), (2, 3), (3, 4)]));
        assert_eq!(r, 15);
        let r = lie_closure_rank(&GeneratorSet::new(4, vec![(1, 2), (3, 4)]));
        assert!(r < 15);
    }

    #[test]
    fn monotone_in_pairs() {
        let all: Vec<(usize, usize)> = GeneratorSet::full(4).pairs;
        let mut prev = 0;
        for m in 0..=all.len() {
            let r = lie_closure_rank(&GeneratorSet::new(4, all[..m].to_vec()));
            assert!(r >= prev && r <= 15);
            prev = r;
        }
    }

    fn tadpole(n: usize) -> (Vec<f64>, CouplingMatrix) {
        let basis = tadpole_basis(n).unwrap();
        let b = tadpole_operator(basis.graph_arc())
            .unwrap()
            .assemble_matrix(&basis, n)
            .unwrap();
        (basis.eigenvalues(), b)
    }

    #[test]
    fn tadpole_admissible_pairs() {
        let (mu, b) = tadpole(4);
        let g = admissible_generators(&b, &mu, 4, 1e-12, 1e-9 * mu[3]);
        assert!(g.contains(1, 2));
        let (mu, b) = tadpole(8);
        let g = admissible_generators(&b, &mu, 8, 1e-12, 1e-9 * mu[7]);
        // 7² − 1² = 8² − 4² = 48
        assert!(!g.contains(1, 7) && !g.contains(4, 8));
        assert!(g.contains(1, 2));
        let (mu5, b5) = tadpole(5);
        let g5 = admissible_generators(&b5, &mu5, 5, 1e-12, 1e-9 * mu5[4]);
        assert_eq!(lie_closure_rank(&g5), 24);
    }

    #[test]
    fn diagonal_coupling_has_no_generator() {
        let (mu, _) = tadpole(4);
        let b = CouplingMatrix::from_real(&DMatrix::from_diagonal_element(4, 4, 0.5)).unwrap();
        assert!(admissible_generators(&b, &mu, 4, 1e-12, 1e-9).is_empty());
    }
}
