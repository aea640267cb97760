//! Galerkin dynamics i∂ₜc = (diag(μ) + u(t)B)c and a Duhamel cross-check.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::CouplingMatrix;
use crate::state::{hs_norm, QuantumState};
use crate::synthesis::signal::ControlSignal;

/// Recorded states along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub norms: Vec<f64>,
    /// Regularity indices s of the tracked ‖·‖_(s) norms.
    pub hs_orders: Vec<f64>,
    /// hs_norms[i][r] = ‖ψ(t_i)‖_(hs_orders[r]).
    pub hs_norms: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// max_t |‖ψ(t)‖ − ‖ψ₀‖|.
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norms[0];
        self.norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }

    /// max_t ‖ψ(t)‖_(s) / ‖ψ₀‖_(s) for the r-th tracked order.
    pub fn hs_growth(&self, r: usize) -> f64 {
        let base = self.hs_norms[0][r];
        self.hs_norms.iter().map(|h| h[r] / base).fold(0.0, f64::max)
    }

    /// Populations |c_k(t)|² for every recorded time.
    pub fn populations(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|s| s.coeffs.iter().map(|c| c.norm_sqr()).collect())
            .collect()
    }

    /// CSV columns t, re_c1, im_c1, …, norm, hs_<s>….
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, QuantumState::dim);
        let mut s = String::from("t");
        for k in 1..=n {
            let _ = write!(s, ",re_c{k},im_c{k}");
        }
        s.push_str(",norm");
        for o in &self.hs_orders {
            let _ = write!(s, ",hs_{o}");
        }
        s.push('\n');
        for (i, st) in self.states.iter().enumerate() {
            let _ = write!(s, "{:.12e}", self.times[i]);
            for c in st.coeffs.iter() {
                let _ = write!(s, ",{:.15e},{:.15e}", c.re, c.im);
            }
            let _ = write!(s, ",{:.15e}", self.norms[i]);
            for h in &self.hs_norms[i] {
                let _ = write!(s, ",{h:.12e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Options for [`evolve_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub dt_max: f64,
    /// Record every `stride`-th step; the final state is always recorded.
    pub stride: usize,
    pub hs_orders: Vec<f64>,
}

impl EvolveOptions {
    pub fn new(dt_max: f64) -> Self {
        Self {
            dt_max,
            stride: 1,
            hs_orders: vec![3.0],
        }
    }
}

fn check_dims(psi0: &QuantumState, mu: &[f64], b: &CouplingMatrix) -> Result<usize> {
    let n = psi0.dim();
    if n == 0 || mu.len() < n || b.dim() < n {
        return Err(Error::Dimension(format!(
            "state has {n} modes, spectrum {}, coupling matrix {}",
            mu.len(),
            b.dim()
        )));
    }
    Ok(n)
}

/// exp(−i(diag(μ) + ūB)dt) via a Hermitian eigendecomposition.
fn step_unitary(mu: &[f64], b: &DMatrix<Complex64>, value: f64, dt: f64) -> DMatrix<Complex64> {
    let n = b.nrows();
    if value == 0.0 {
        return DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            Complex64::from_polar(1.0, -mu[i] * dt)
        }));
    }
    let mut h = b.scale(value);
    for i in 0..n {
        h[(i, i)] += Complex64::new(mu[i], 0.0);
    }
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_fn(n, |i, _| Complex64::from_polar(1.0, -eig.eigenvalues[i] * dt));
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    vd * v.adjoint()
}

/// Evolves ψ₀ under u with the defaults of [`EvolveOptions::new`].
pub fn evolve(
    psi0: &QuantumState,
    u: &ControlSignal,
    mu: &[f64],
    b: &CouplingMatrix,
    dt_max: f64,
) -> Result<Trajectory> {
    evolve_with(psi0, u, mu, b, &EvolveOptions::new(dt_max))
}

/// Exact exponential on each step where u is held at its midpoint value.
pub fn evolve_with(
    psi0: &QuantumState,
    u: &ControlSignal,
    mu: &[f64],
    b: &CouplingMatrix,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let n = check_dims(psi0, mu, b)?;
    let steps = u.steps(opts.dt_max)?;
    let bn = b.matrix.view((0, 0), (n, n)).into_owned();
    let stride = opts.stride.max(1);

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        norms: Vec::new(),
        hs_orders: opts.hs_orders.clone(),
        hs_norms: Vec::new(),
    };
    let mut record = |t: f64, c: &DVector<Complex64>| {
        traj.times.push(t);
        traj.norms.push(c.norm());
        traj.hs_norms
            .push(opts.hs_orders.iter().map(|&s| hs_norm(c.as_slice(), s)).collect());
        traj.states.push(QuantumState::new(c.clone()));
    };

    let mut c = psi0.coeffs.clone();
    record(0.0, &c);
    let mut cache: Option<(f64, f64, DMatrix<Complex64>)> = None;
    for (i, st) in steps.iter().enumerate() {
        let reuse = matches!(&cache, Some((v, dt, _)) if *v == st.value && *dt == st.dt);
        if !reuse {
            cache = Some((st.value, st.dt, step_unitary(mu, &bn, st.value, st.dt)));
        }
        let uop = &cache.as_ref().expect("filled above").2;
        c = uop * &c;
        if (i + 1) % stride == 0 || i + 1 == steps.len() {
            record(st.t0 + st.dt, &c);
        }
    }
    Ok(traj)
}

/// Final state only, without recording the trajectory.
pub fn evolve_final(
    psi0: &QuantumState,
    u: &ControlSignal,
    mu: &[f64],
    b: &CouplingMatrix,
    dt_max: f64,
) -> Result<QuantumState> {
    let opts = EvolveOptions {
        dt_max,
        stride: usize::MAX,
        hs_orders: Vec::new(),
    };
    let traj = evolve_with(psi0, u, mu, b, &opts)?;
    Ok(traj.final_state().clone())
}

/// Outcome of the Picard iteration on the mild formula.
#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelResult {
    pub state: QuantumState,
    pub iterations: usize,
    /// Successive update norms ‖a_{n+1} − a_n‖_∞ over the grid.
    pub updates: Vec<f64>,
    /// ‖u‖_{L²(0,T)}·‖B‖₂·√T.
    pub contraction_estimate: f64,
}

/// Picard iteration of c(t) = e^{−iμt}[c₀ − i∫₀ᵗ u(s)e^{iμs}Be^{−iμs}a(s)ds]
/// on a uniform grid of `n_quad` intervals with the trapezoid rule in s.
pub fn duhamel_picard(
    psi0: &QuantumState,
    u: &ControlSignal,
    mu: &[f64],
    b: &CouplingMatrix,
    horizon: f64,
    n_iter: usize,
    n_quad: usize,
) -> Result<DuhamelResult> {
    let n = check_dims(psi0, mu, b)?;
    if !(horizon > 0.0) || n_quad == 0 {
        return Err(Error::InvalidArgument("need T > 0 and at least one interval".into()));
    }
    let bn = b.matrix.view((0, 0), (n, n)).into_owned();
    let h = horizon / n_quad as f64;
    let m = n_quad + 1;
    let uvals: Vec<f64> = (0..m).map(|i| u.eval(i as f64 * h)).collect();
    // e^{iμ_k t_i}, row-major in (i, k)
    let rot: Vec<Complex64> = (0..m)
        .flat_map(|i| (0..n).map(move |k| Complex64::from_polar(1.0, mu[k] * i as f64 * h)))
        .collect();
    let a0: Vec<Complex64> = psi0.coeffs.iter().copied().collect();

    // a_n on the grid in the interaction picture, row-major in (i, k)
    let mut a: Vec<Complex64> = a0.iter().copied().cycle().take(m * n).collect();
    let mut f = vec![Complex64::new(0.0, 0.0); m * n];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut updates = Vec::new();
    let mut iterations = 0;
    for it in 0..n_iter.max(1) {
        // f(t_i) = u(t_i) e^{iμt_i} B e^{−iμt_i} a(t_i)
        for i in 0..m {
            let row = &mut f[i * n..(i + 1) * n];
            if uvals[i] == 0.0 {
                row.fill(Complex64::new(0.0, 0.0));
                continue;
            }
            let r = &rot[i * n..(i + 1) * n];
            for k in 0..n {
                tmp[k] = r[k].conj() * a[i * n + k];
            }
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += bn[(j, k)] * tmp[k];
                }
                row[j] = acc * r[j] * uvals[i];
            }
        }
        let mut diff = 0.0f64;
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..m {
            let mut d2 = 0.0;
            for k in 0..n {
                acc[k] += (f[(i - 1) * n + k] + f[i * n + k]) * (0.5 * h);
                let next = a0[k] - Complex64::i() * acc[k];
                d2 += (next - a[i * n + k]).norm_sqr();
                a[i * n + k] = next;
            }
            diff = diff.max(d2.sqrt());
        }
        iterations = it + 1;
        updates.push(diff);
        let k = updates.len();
        if k >= 3 && updates[k - 1] > updates[k - 2] && updates[k - 2] > updates[k - 3] {
            return Err(Error::NonContraction {
                ratio: updates[k - 1] / updates[k - 2],
            });
        }
        if diff <= 1e-15 * psi0.norm().max(1.0) {
            break;
        }
    }
    let end = &a[n_quad * n..];
    let c = DVector::from_fn(n, |k, _| Complex64::from_polar(1.0, -mu[k] * horizon) * end[k]);
    Ok(DuhamelResult {
        state: QuantumState::new(c),
        iterations,
        updates,
        contraction_estimate: u.l2_norm() * b.truncated(n).norm2() * horizon.sqrt(),
    })
}

/// |⟨φ, ψ⟩|.
pub fn fidelity(psi: &QuantumState, phi: &QuantumState) -> f64 {
    phi.inner(psi).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::tadpole_basis;
    use crate::operator::tadpole_operator;
    use std::f64::consts::PI;

    fn tadpole(n: usize) -> (Vec<f64>, CouplingMatrix) {
        let basis = tadpole_basis(n).unwrap();
        let b = tadpole_operator(basis.graph_arc())
            .unwrap()
            .assemble_matrix(&basis, n)
            .unwrap();
        (basis.eigenvalues(), b)
    }

    #[test]
    fn free_drift_of_eigenstate() {
        let (mu, b) = tadpole(5);
        let psi = QuantumState::basis_vector(3, 5);
        let t = 0.37;
        let traj = evolve(&psi, &ControlSignal::zero(t), &mu, &b, 0.01).unwrap();
        let end = traj.final_state();
        let expect = Complex64::from_polar(1.0, -mu[2] * t);
        assert!((end.coeffs[2] - expect).norm() < 1e-12);
        assert!((traj.times.last().unwrap() - t).abs() < 1e-15);
    }

    #[test]
    fn unitary_over_many_steps() {
        let (mu, b) = tadpole(8);
        let w = mu[1] - mu[0];
        let u = ControlSignal::cosine(0.8, w, 0.3, 1.0).unwrap();
        let psi = QuantumState::basis_vector(1, 8);
        let traj = evolve(&psi, &u, &mu, &b, 1e-4).unwrap();
        assert_eq!(traj.states.len(), 10_001);
        assert!(traj.norm_drift() <= 1e-12, "{}", traj.norm_drift());
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let (mu, b) = tadpole(6);
        let u = ControlSignal::cosine(1.0, 12.0 * PI * PI, 0.0, 0.2).unwrap();
        let psi = QuantumState::basis_vector(1, 6);
        let period = 2.0 * PI / (12.0 * PI * PI);
        let run = |dt| evolve_final(&psi, &u, &mu, &b, dt).unwrap().coeffs;
        let r0 = run(period / 40.0);
        let r1 = run(period / 80.0);
        let r2 = run(period / 160.0);
        let ratio = (&r0 - &r1).norm() / (&r1 - &r2).norm();
        assert!(ratio >= 3.5, "{ratio}");
    }

    #[test]
    fn duhamel_homogeneous() {
        let (mu, b) = tadpole(4);
        let psi = QuantumState::from_slice(&[
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        let r = duhamel_picard(&psi, &ControlSignal::zero(1.0), &mu, &b, 1.0, 10, 10).unwrap();
        assert_eq!(r.iterations, 1);
        for k in 0..4 {
            let expect = psi.coeffs[k] * Complex64::from_polar(1.0, -mu[k]);
            assert!((r.state.coeffs[k] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn duhamel_agrees_with_evolve() {
        let (mu, b) = tadpole(6);
        let u = ControlSignal::cosine(0.1, 12.0 * PI * PI, 0.0, 0.3).unwrap();
        let psi = QuantumState::basis_vector(1, 6);
        let e = evolve_final(&psi, &u, &mu, &b, 2e-5).unwrap();
        let d = duhamel_picard(&psi, &u, &mu, &b, 0.3, 30, 100_000).unwrap();
        assert!((&e.coeffs - &d.state.coeffs).norm() < 1e-6);
    }

    #[test]
    fn fidelity_examples() {
        let e1 = QuantumState::basis_vector(1, 2);
        let e2 = QuantumState::basis_vector(2, 2);
        assert_eq!(fidelity(&e1, &e1), 1.0);
        assert_eq!(fidelity(&e1, &e2), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sup = QuantumState::from_slice(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]);
        assert!((fidelity(&sup, &e1) - s).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let (mu, b) = tadpole(2);
        let traj = evolve(&QuantumState::basis_vector(1, 2), &ControlSignal::zero(0.1), &mu, &b, 0.05)
            .unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,re_c1,im_c1,re_c2,im_c2,norm,hs_3\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
