//! Spectrum of diag(μ) + u₀B and the non-degeneracy scan over u₀.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::resonance::ResonanceTable;
use crate::error::{Error, Result};
use crate::operator::CouplingMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSpectrum {
    pub u0: f64,
    /// μ_k^{u₀}, in the order of the unperturbed index they continue.
    pub eigenvalues: Vec<f64>,
    /// μ_k^{u₀} − μ_k evaluated as a Rayleigh quotient, free of the
    /// cancellation in the difference of the two eigenvalues.
    pub shifts: Vec<f64>,
    /// Column k is φ_k^{u₀} in the unperturbed basis, largest entry real positive.
    pub eigenvectors: DMatrix<Complex64>,
}

impl PerturbedSpectrum {
    /// ⟨φ_j^{u₀}, B φ_k^{u₀}⟩ for all pairs.
    pub fn perturbed_couplings(&self, b: &CouplingMatrix) -> DMatrix<Complex64> {
        let n = self.eigenvectors.ncols();
        let bn = b.matrix.view((0, 0), (n, n));
        self.eigenvectors.adjoint() * bn * &self.eigenvectors
    }
}

/// Hermitian eigendecomposition of diag(μ) + u₀B over the first `n` modes.
///
/// Each eigenvector is matched to the unperturbed index of its largest
/// component, which is the continuation of φ_k for |u₀| below the gap scale.
pub fn perturbed_spectrum(mu: &[f64], b: &CouplingMatrix, u0: f64, n: usize) -> Result<PerturbedSpectrum> {
    if n < 2 || n > mu.len() || n > b.dim() {
        return Err(Error::Dimension(format!(
            "need 2 <= n <= min({}, {}), got {n}",
            mu.len(),
            b.dim()
        )));
    }
    let bn = b.matrix.view((0, 0), (n, n)).into_owned();
    let mut h = bn.scale(u0);
    for i in 0..n {
        h[(i, i)] += Complex64::new(mu[i], 0.0);
    }
    let eig = h.symmetric_eigen();

    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    for &c in &order {
        let col = eig.eigenvectors.column(c);
        let k = (0..n)
            .max_by(|&x, &y| col[x].norm().total_cmp(&col[y].norm()))
            .expect("n >= 2");
        if owner[k].is_some() {
            // no clean continuation; fall back to the sorted order
            owner = order.iter().map(|&c| Some(c)).collect();
            break;
        }
        owner[k] = Some(c);
    }

    let mut vectors = DMatrix::zeros(n, n);
    let mut shifts = Vec::with_capacity(n);
    let mut eigenvalues = Vec::with_capacity(n);
    for k in 0..n {
        let c = owner[k].expect("every index matched");
        let mut v: DVector<Complex64> = eig.eigenvectors.column(c).into_owned();
        let top = (0..n)
            .max_by(|&x, &y| v[x].norm().total_cmp(&v[y].norm()))
            .expect("n >= 2");
        let phase = v[top] / v[top].norm();
        v.unscale_mut(v.norm());
        v *= phase.conj();
        let drift: f64 = (0..n).map(|j| (mu[j] - mu[k]) * v[j].norm_sqr()).sum();
        let coupling = v.dotc(&(&bn * &v)).re;
        let shift = drift + u0 * coupling;
        shifts.push(shift);
        eigenvalues.push(mu[k] + shift);
        vectors.set_column(k, &v);
    }
    Ok(PerturbedSpectrum {
        u0,
        eigenvalues,
        shifts,
        eigenvectors: vectors,
    })
}

/// Margins of the perturbed quadruple combinations and couplings per u₀.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub u0: f64,
    /// min over the table of |μ_j^{u₀} − μ_k^{u₀} − μ_l^{u₀} + μ_m^{u₀}|.
    pub min_combination: f64,
    /// Smallest ratio |combination| / (|u₀|·|B_jj − B_kk − B_ll + B_mm|).
    pub min_first_order_ratio: f64,
    /// min_k |⟨φ_k^{u₀}, Bφ_1^{u₀}⟩|.
    pub min_coupling: f64,
    pub argmin_coupling: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyScan {
    pub points: Vec<ScanPoint>,
    pub tol: f64,
}

impl NondegeneracyScan {
    /// Grid points where some combination or coupling fell below `tol`.
    pub fn failures(&self) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.min_combination <= self.tol || p.min_coupling <= self.tol)
            .map(|p| p.u0)
            .collect()
    }

    pub fn pass(&self) -> bool {
        self.failures().is_empty()
    }
}

/// For each u₀, recomputes the combinations of the unperturbed resonant
/// quadruples and the perturbed first column of B.
pub fn scan_nondegeneracy(
    mu: &[f64],
    b: &CouplingMatrix,
    grid: &[f64],
    n: usize,
    table: &ResonanceTable,
    tol: f64,
) -> Result<NondegeneracyScan> {
    if table.n > n {
        return Err(Error::Dimension("resonance table exceeds the truncation".into()));
    }
    let points = grid
        .par_iter()
        .map(|&u0| {
            let p = perturbed_spectrum(mu, b, u0, n)?;
            let s = &p.shifts;
            let mut min_combination = f64::INFINITY;
            let mut min_ratio = f64::INFINITY;
            for q in &table.quadruples {
                // exact resonances cancel in μ, so only the shifts remain
                let base = (mu[q.j - 1] - mu[q.k - 1]) - (mu[q.l - 1] - mu[q.m - 1]);
                let combo = (base + s[q.j - 1] - s[q.k - 1] - s[q.l - 1] + s[q.m - 1]).abs();
                min_combination = min_combination.min(combo);
                let first = q.diagonal_combination(b).abs() * u0.abs();
                if first > 0.0 {
                    min_ratio = min_ratio.min(combo / first);
                }
            }
            let pc = p.perturbed_couplings(b);
            let (argmin, min_coupling) = (0..n)
                .map(|k| (k + 1, pc[(k, 0)].norm()))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
            Ok(ScanPoint {
                u0,
                min_combination,
                min_first_order_ratio: min_ratio,
                min_coupling,
                argmin_coupling: argmin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NondegeneracyScan { points, tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::resonance::find_resonances_exact;
    use crate::basis::tadpole_basis;
    use crate::operator::tadpole_operator;

    fn setup(n: usize) -> (Vec<f64>, CouplingMatrix, ResonanceTable) {
        let basis = tadpole_basis(n).unwrap();
        let b = tadpole_operator(basis.graph_arc())
            .unwrap()
            .assemble_matrix(&basis, n)
            .unwrap();
        let table = find_resonances_exact(basis.exact_keys().unwrap().1, n);
        (basis.eigenvalues(), b, table)
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let (mu, b, _) = setup(8);
        let p = perturbed_spectrum(&mu, &b, 0.0, 8).unwrap();
        for k in 0..8 {
            assert!((p.eigenvalues[k] - mu[k]).abs() <= 1e-12 * mu[k]);
            assert!((p.eigenvectors[(k, k)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn first_order_shift_is_the_diagonal() {
        let (mu, b, _) = setup(12);
        let diag = b.diagonal();
        let defect = |u0: f64| {
            let p = perturbed_spectrum(&mu, &b, u0, 12).unwrap();
            (0..12)
                .map(|k| (p.shifts[k] / u0 - diag[k]).abs())
                .collect::<Vec<_>>()
        };
        let (d1, d2) = (defect(1e-2), defect(5e-3));
        for k in 0..12 {
            assert!(d1[k] < 1e-3 * diag[k]);
            let ratio = d1[k] / d2[k];
            assert!((1.4..=2.6).contains(&ratio), "k={} ratio {ratio}", k + 1);
        }
    }

    #[test]
    fn weyl_bound() {
        let (mu, b, _) = setup(10);
        let norm = b.norm2();
        let a = perturbed_spectrum(&mu, &b, 0.3, 10).unwrap();
        let c = perturbed_spectrum(&mu, &b, 0.1, 10).unwrap();
        let mut ea = a.eigenvalues.clone();
        let mut ec = c.eigenvalues.clone();
        ea.sort_by(f64::total_cmp);
        ec.sort_by(f64::total_cmp);
        for (x, y) in ea.iter().zip(&ec) {
            assert!((x - y).abs() <= norm * 0.2 + 1e-9);
        }
    }

    #[test]
    fn scan_resolves_resonances_off_zero() {
        let (mu, b, table) = setup(12);
        assert!(!table.is_empty());
        let grid = [0.0, -1e-2, -5e-3, 5e-3, 1e-2];
        let scan = scan_nondegeneracy(&mu, &b, &grid, 12, &table, 1e-12).unwrap();
        assert_eq!(scan.failures(), vec![0.0]);
        for p in &scan.points[1..] {
            assert!(p.min_combination > 0.0);
            assert!(p.min_first_order_ratio > 0.5, "{p:?}");
            assert!(p.min_coupling > 1e-6);
        }
    }
}
