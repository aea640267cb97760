//! Minimum-norm solution of the truncated trigonometric moment problem.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::signal::{piece_kernel, ControlSignal, SignalForm};
use crate::error::{Error, Result};
use crate::operator::CouplingMatrix;

/// Couplings below this magnitude count as vanishing.
pub const COUPLING_FLOOR: f64 = 1e-14;

/// Largest tolerated condition number of the (regularized) normal matrix.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Targets r_k for −i∫₀ᵀ u(τ) e^{iω_kτ} dτ.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProblem {
    pub omegas: Vec<f64>,
    pub targets: Vec<Complex64>,
    pub horizon: f64,
    /// The ω = 0 row only constrains the imaginary part; its target must be
    /// purely imaginary for u to be real.
    pub reality_constraint: bool,
}

impl MomentProblem {
    pub fn new(omegas: Vec<f64>, targets: Vec<Complex64>, horizon: f64) -> Result<Self> {
        if omegas.len() != targets.len() || omegas.is_empty() {
            return Err(Error::Dimension(format!(
                "{} frequencies for {} targets",
                omegas.len(),
                targets.len()
            )));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        if omegas.windows(2).any(|w| !(w[1] > w[0])) || omegas[0] < 0.0 {
            return Err(Error::InvalidArgument(
                "frequencies must be non-negative and strictly increasing".into(),
            ));
        }
        let reality_constraint = omegas[0] == 0.0;
        if reality_constraint && targets[0].re.abs() > 1e-12 * targets[0].norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "zero-frequency target {} is not purely imaginary",
                targets[0]
            )));
        }
        Ok(Self {
            omegas,
            targets,
            horizon,
            reality_constraint,
        })
    }

    /// ω_k = μ_k − μ₁ and r_k = x_k / B_{k,1} from the linearization around φ₁.
    pub fn linearized(mu: &[f64], b: &CouplingMatrix, x: &[Complex64], horizon: f64) -> Result<Self> {
        let n = x.len();
        if n > mu.len() || n > b.dim() {
            return Err(Error::Dimension(format!("target has {n} entries")));
        }
        let mut targets = Vec::with_capacity(n);
        for k in 1..=n {
            let bk1 = b.get(k, 1);
            if bk1.norm() < COUPLING_FLOOR {
                return Err(Error::VanishingCoupling { k });
            }
            targets.push(x[k - 1] / bk1);
        }
        let omegas = mu[..n].iter().map(|m| m - mu[0]).collect();
        Self::new(omegas, targets, horizon)
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Fewest uniform pieces accepted by [`solve_moment_problem`].
    pub fn min_samples(&self) -> usize {
        let w = *self.omegas.last().expect("non-empty");
        let nyquist = (4.0 * self.len() as f64 * w * self.horizon / (2.0 * PI)).ceil() as usize;
        let per_period = (8.0 * w * self.horizon / (2.0 * PI)).ceil() as usize;
        nyquist.max(per_period).max(1)
    }
}

/// Solution with per-moment residuals |moment(u, ω_k) − r_k|.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSolution {
    pub signal: ControlSignal,
    pub residuals: Vec<f64>,
    pub ridge: f64,
    /// Condition number of GGᵀ + λI.
    pub condition: f64,
}

impl MomentSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Real rows (Re and Im of each moment) of the constraint matrix, and the
/// matching right-hand side; rows that vanish identically are dropped.
fn constraint_system(mp: &MomentProblem, n_samples: usize) -> (DMatrix<f64>, DVector<f64>) {
    let h = mp.horizon / n_samples as f64;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * mp.len());
    let mut rhs = Vec::with_capacity(2 * mp.len());
    for (&w, &r) in mp.omegas.iter().zip(&mp.targets) {
        let ks: Vec<Complex64> = (0..n_samples)
            .map(|p| piece_kernel(w, p as f64 * h, (p + 1) as f64 * h))
            .collect();
        if w != 0.0 {
            rows.push(ks.iter().map(|z| z.re).collect());
            rhs.push(r.re);
        }
        rows.push(ks.iter().map(|z| z.im).collect());
        rhs.push(r.im);
    }
    let g = DMatrix::from_fn(rows.len(), n_samples, |i, p| rows[i][p]);
    (g, DVector::from_vec(rhs))
}

/// Piecewise-constant u on `n_samples` uniform pieces minimizing
/// λ‖u‖² + Σ_k |moment(u, ω_k) − r_k|², via u = Gᵀ(GGᵀ + λI)⁻¹r.
///
/// `ridge = None` selects λ = 1e-10·‖G‖₂².
pub fn solve_moment_problem(mp: &MomentProblem, n_samples: usize, ridge: Option<f64>) -> Result<MomentSolution> {
    let need = mp.min_samples();
    if n_samples < need {
        return Err(Error::InvalidArgument(format!(
            "{n_samples} samples cannot resolve the top frequency; need at least {need}"
        )));
    }
    let (g, rhs) = constraint_system(mp, n_samples);
    let gram = &g * g.transpose();
    let eig = gram.clone().symmetric_eigenvalues();
    let top = eig.iter().copied().fold(0.0, f64::max);
    let lambda = ridge.unwrap_or(1e-10 * top);
    if lambda < 0.0 {
        return Err(Error::InvalidArgument("ridge must be non-negative".into()));
    }
    let low = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = (top + lambda) / (low + lambda).max(f64::MIN_POSITIVE);
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditioned(condition));
    }
    let mut m = gram;
    for i in 0..m.nrows() {
        m[(i, i)] += lambda;
    }
    let chol = m.cholesky().ok_or(Error::IllConditioned(condition))?;
    let y = chol.solve(&rhs);
    let u = g.transpose() * y;
    let fitted = &g * &u;

    // reassemble complex residuals in the row layout of constraint_system
    let mut residuals = Vec::with_capacity(mp.len());
    let mut row = 0;
    for (&w, &r) in mp.omegas.iter().zip(&mp.targets) {
        let re = if w != 0.0 {
            row += 1;
            fitted[row - 1]
        } else {
            0.0
        };
        let im = fitted[row];
        row += 1;
        residuals.push((Complex64::new(re, im) - r).norm());
    }
    let signal = ControlSignal::uniform_piecewise(mp.horizon, u.iter().copied().collect())?;
    Ok(MomentSolution {
        signal,
        residuals,
        ridge: lambda,
        condition,
    })
}

/// max_k |−i∫₀ᵀ u e^{iω_kτ}dτ − r_k|, integrating each piece in closed form.
pub fn verify_moments(u: &ControlSignal, mp: &MomentProblem) -> f64 {
    moment_residuals(u, mp).into_iter().fold(0.0, f64::max)
}

/// Per-moment residuals of [`verify_moments`].
pub fn moment_residuals(u: &ControlSignal, mp: &MomentProblem) -> Vec<f64> {
    mp.omegas
        .iter()
        .zip(&mp.targets)
        .map(|(&w, &r)| (u.moment(w) - r).norm())
        .collect()
}

/// Values of a piecewise-constant solution, for inspection.
pub fn piece_values(u: &ControlSignal) -> Option<&[f64]> {
    match &u.form {
        SignalForm::PiecewiseConstant { values, .. } => Some(values),
        SignalForm::TrigSum { .. } => None,
    }
}
