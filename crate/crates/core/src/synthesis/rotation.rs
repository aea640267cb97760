//! Factorization of special-unitary targets into planar rotations exp(αE^θ_{jk}).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngExt};

use super::lie::planar_generator;
use crate::error::{Error, Result};

/// Unitarity and determinant tolerance for targets.
pub const SU_TOLERANCE: f64 = 1e-10;

/// One factor exp(α E^θ_{jk}), j < k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationFactor {
    pub j: usize,
    pub k: usize,
    pub theta: f64,
    pub alpha: f64,
}

impl RotationFactor {
    /// cos α on the (j, k) diagonal, e^{iθ} sin α at (j, k), −e^{−iθ} sin α at (k, j).
    pub fn matrix(&self, n: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::identity(n, n);
        let (j, k) = (self.j - 1, self.k - 1);
        let (s, c) = self.alpha.sin_cos();
        m[(j, j)] = Complex64::new(c, 0.0);
        m[(k, k)] = Complex64::new(c, 0.0);
        m[(j, k)] = Complex64::from_polar(s, self.theta);
        m[(k, j)] = -Complex64::from_polar(s, -self.theta);
        m
    }
}

/// target = factors[0]·factors[1]⋯factors[p−1]·diag(residual).
#[derive(Debug, Clone, PartialEq)]
pub struct RotationPlan {
    pub n: usize,
    pub factors: Vec<RotationFactor>,
    pub residual: Vec<Complex64>,
}

impl RotationPlan {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::<Complex64>::identity(self.n, self.n);
        for f in &self.factors {
            m *= f.matrix(self.n);
        }
        m * DMatrix::from_diagonal(&DVector::from_column_slice(&self.residual))
    }

    /// Whether the diagonal residual is the identity within `tol`.
    pub fn residual_is_identity(&self, tol: f64) -> bool {
        self.residual.iter().all(|d| (d - 1.0).norm() <= tol)
    }
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

pub fn check_special_unitary(u: &DMatrix<Complex64>) -> Result<()> {
    if u.nrows() != u.ncols() || u.nrows() == 0 {
        return Err(Error::NotSpecialUnitary("matrix is not square".into()));
    }
    let n = u.nrows();
    let defect = (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > SU_TOLERANCE {
        return Err(Error::NotSpecialUnitary(format!("‖U†U − I‖ = {defect:.3e}")));
    }
    let det = u.determinant();
    if (det - 1.0).norm() > SU_TOLERANCE {
        return Err(Error::NotSpecialUnitary(format!("det = {det}")));
    }
    Ok(())
}

/// Givens elimination below the diagonal, column by column.
pub fn plan_rotations(target: &DMatrix<Complex64>) -> Result<RotationPlan> {
    check_special_unitary(target)?;
    let n = target.nrows();
    let mut w = target.clone();
    let mut factors = Vec::new();
    for c in 0..n.saturating_sub(1) {
        for r in (c + 1..n).rev() {
            let (a, b) = (w[(c, c)], w[(r, c)]);
            if b.norm() == 0.0 {
                continue;
            }
            // (G†W)[r, c] = e^{−iθ} sin α · a + cos α · b = 0
            let alpha = b.norm().atan2(a.norm());
            let arg_a = if a.norm() == 0.0 { 0.0 } else { a.arg() };
            let f = RotationFactor {
                j: c + 1,
                k: r + 1,
                theta: wrap(arg_a - b.arg() - PI),
                alpha,
            };
            w = f.matrix(n).adjoint() * w;
            w[(r, c)] = Complex64::new(0.0, 0.0);
            factors.push(f);
        }
    }
    let residual = (0..n).map(|i| w[(i, i)]).collect();
    Ok(RotationPlan { n, factors, residual })
}

/// exp(X) for X anti-Hermitian traceless with entries uniform in [−1, 1].
pub fn random_special_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let mut x = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for k in j + 1..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            x[(j, k)] = z;
            x[(k, j)] = -z.conj();
        }
        x[(j, j)] = Complex64::new(0.0, rng.random_range(-1.0..1.0));
    }
    let tr = x.trace() / n as f64;
    for j in 0..n {
        x[(j, j)] -= tr;
    }
    // X = −iH with H = iX Hermitian
    let h = x.map(|z| z * Complex64::i());
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= Complex64::from_polar(1.0, -eig.eigenvalues[j]);
    }
    vd * v.adjoint()
}

/// Result of searching a free-drift time that realizes a diagonal residual.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatch {
    /// First grid time within tolerance, if any.
    pub time: Option<f64>,
    pub best_time: f64,
    /// Largest relative phase error at `best_time`, radians.
    pub best_error: f64,
}

/// Searches t ∈ (0, t_max] with e^{−iμ_k t} = g·d_k for a common phase g.
pub fn match_drift_phases(residual: &[Complex64], mu: &[f64], t_max: f64, tol: f64) -> Result<DriftMatch> {
    let n = residual.len();
    if mu.len() < n || n == 0 {
        return Err(Error::Dimension("spectrum shorter than the residual".into()));
    }
    if !(t_max > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument("t_max and tol must be positive".into()));
    }
    let spread = mu[..n].iter().map(|m| (m - mu[0]).abs()).fold(0.0, f64::max);
    let error_at = |t: f64| -> f64 {
        let ref0 = residual[0] * Complex64::from_polar(1.0, mu[0] * t);
        (1..n)
            .map(|k| {
                let z = residual[k] * Complex64::from_polar(1.0, mu[k] * t) * ref0.conj();
                z.arg().abs()
            })
            .fold(0.0, f64::max)
    };
    if spread == 0.0 {
        let e = error_at(t_max);
        return Ok(DriftMatch {
            time: (e <= tol).then_some(t_max),
            best_time: t_max,
            best_error: e,
        });
    }
    let dt = tol / (2.0 * spread);
    let steps = (t_max / dt).ceil() as usize;
    let mut best = (f64::INFINITY, t_max);
    for s in 1..=steps {
        let t = (s as f64 * dt).min(t_max);
        let e = error_at(t);
        if e < best.0 {
            best = (e, t);
        }
        if e <= tol {
            return Ok(DriftMatch {
                time: Some(t),
                best_time: t,
                best_error: e,
            });
        }
    }
    Ok(DriftMatch {
        time: None,
        best_time: best.1,
        best_error: best.0,
    })
}

/// max |A − B| entrywise.
pub fn max_entry_error(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// exp(α E^θ_{jk}) from the generator, for cross-checking [`RotationFactor::matrix`].
pub fn factor_by_series(f: &RotationFactor, n: usize) -> DMatrix<Complex64> {
    let e = planar_generator(n, f.j, f.k, f.theta).scale(f.alpha);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for i in 1..40 {
        term = &term * &e / Complex64::new(i as f64, 0.0);
        sum += &term;
    }
    sum
}
