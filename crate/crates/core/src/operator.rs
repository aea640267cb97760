//! Bounded control operators built from edge-coupling multiplication terms.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{quadrature_order, EigenMode, SpectralBasis};
use crate::error::{Error, Result};
use crate::expr::{parse_real, Profile};
use crate::graph::MetricGraph;
use crate::quadrature::{integrate_poly_wave, GaussLegendre, NeumaierSum, Wave};

/// Largest tolerated `‖M − M†‖_max` before symmetrization.
pub const HERMITICITY_THRESHOLD: f64 = 1e-10;

/// `(Bψ)^out(x) += sign · profile(x) · ψ^in(scale · x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTerm {
    pub out_edge: usize,
    pub in_edge: usize,
    pub profile: Profile,
    pub scale: f64,
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct ControlOperator {
    graph: Arc<MetricGraph>,
    terms: Vec<CouplingTerm>,
}

/// Config form of one term (`[[B.term]]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub out_edge: String,
    pub in_edge: String,
    pub profile: String,
    #[serde(default = "one_str")]
    pub scale: String,
    #[serde(default = "one_i")]
    pub sign: i8,
}

fn one_str() -> String {
    "1".into()
}

fn one_i() -> i8 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default)]
    pub term: Vec<TermSpec>,
}

impl ControlOperator {
    pub fn new(graph: Arc<MetricGraph>, terms: Vec<CouplingTerm>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.out_edge >= graph.edges().len() || t.in_edge >= graph.edges().len() {
                return Err(Error::Dimension(format!("term {i} references a missing edge")));
            }
            if !(t.scale > 0.0) || (t.sign != 1.0 && t.sign != -1.0) {
                return Err(Error::InvalidArgument(format!(
                    "term {i}: scale must be positive and sign ±1"
                )));
            }
            let l_out = graph.edge(t.out_edge).length;
            let l_in = graph.edge(t.in_edge).length;
            if !l_out.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "term {i}: output edge `{}` is a half-line",
                    graph.edge(t.out_edge).id
                )));
            }
            let mapped = t.scale * l_out;
            if mapped > l_in * (1.0 + 1e-12) {
                return Err(Error::CoordinateMap {
                    term: i,
                    mapped,
                    length: l_in,
                });
            }
        }
        Ok(Self { graph, terms })
    }

    pub fn from_spec(graph: Arc<MetricGraph>, spec: &OperatorSpec) -> Result<Self> {
        let terms = spec
            .term
            .iter()
            .map(|t| {
                Ok(CouplingTerm {
                    out_edge: graph.edge_index(&t.out_edge)?,
                    in_edge: graph.edge_index(&t.in_edge)?,
                    profile: Profile::parse(&t.profile)?,
                    scale: parse_real(&t.scale)?,
                    sign: f64::from(t.sign),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(graph, terms)
    }

    pub fn zero(graph: Arc<MetricGraph>) -> Self {
        Self { graph, terms: Vec::new() }
    }

    pub fn terms(&self) -> &[CouplingTerm] {
        &self.terms
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// ⟨φ_j, B φ_k⟩. Each term is a polynomial times a sum of sinusoids, so it
    /// is integrated wave by wave in closed form (see [`integrate_poly_wave`]).
    pub fn matrix_element(&self, phi_j: &EigenMode, phi_k: &EigenMode) -> Complex64 {
        let mut acc = NeumaierSum::default();
        for t in &self.terms {
            let (Some(cj), Some(ck)) = (phi_j.edge_coeff(t.out_edge), phi_k.edge_coeff(t.in_edge)) else {
                continue;
            };
            let len = self.graph.edge(t.out_edge).length;
            let out = Wave { c: cj.a, s: cj.b, w: phi_j.frequency() };
            let inn = Wave { c: ck.a, s: ck.b, w: t.scale * phi_k.frequency() };
            let profile = match t.profile.harmonic {
                None => Wave::constant(1.0),
                Some(h) => {
                    let (sn, cs) = h.phase.sin_cos();
                    Wave { c: cs, s: -sn, w: h.freq }
                }
            };
            for pair in out.product(inn) {
                for wave in pair.product(profile) {
                    acc.add(t.sign * integrate_poly_wave(&t.profile.poly, wave, len));
                }
            }
        }
        Complex64::new(acc.total(), 0.0)
    }

    /// ⟨φ_j, B φ_k⟩ by plain Gauss–Legendre quadrature, for cross-checks.
    pub fn matrix_element_quadrature(&self, phi_j: &EigenMode, phi_k: &EigenMode) -> Complex64 {
        let mut acc = NeumaierSum::default();
        for t in &self.terms {
            if !phi_j.is_supported_on(t.out_edge) || !phi_k.is_supported_on(t.in_edge) {
                continue;
            }
            let len = self.graph.edge(t.out_edge).length;
            let freq = phi_j.frequency() + t.scale * phi_k.frequency() + t.profile.frequency();
            let rule = GaussLegendre::cached(quadrature_order(freq, len, t.profile.degree()));
            let v = rule.integrate(0.0, len, |x| {
                phi_j.eval(t.out_edge, x) * t.profile.eval(x) * phi_k.eval(t.in_edge, t.scale * x)
            });
            acc.add(t.sign * v);
        }
        Complex64::new(acc.total(), 0.0)
    }

    /// (Bψ)^edge(x) and its x-derivative for ψ given per edge by `f`, `df`.
    pub fn apply_at(
        &self,
        edge: usize,
        x: f64,
        f: &dyn Fn(usize, f64) -> f64,
        df: &dyn Fn(usize, f64) -> f64,
    ) -> (f64, f64) {
        let mut val = 0.0;
        let mut der = 0.0;
        for t in self.terms.iter().filter(|t| t.out_edge == edge) {
            let y = t.scale * x;
            let (p, dp) = (t.profile.eval(x), t.profile.deriv(x));
            val += t.sign * p * f(t.in_edge, y);
            der += t.sign * (dp * f(t.in_edge, y) + p * t.scale * df(t.in_edge, y));
        }
        (val, der)
    }

    /// N×N matrix B_{jk} = ⟨φ_j, Bφ_k⟩ over the first `n` modes.
    pub fn assemble_matrix(&self, basis: &SpectralBasis, n: usize) -> Result<CouplingMatrix> {
        if n == 0 || n > basis.len() {
            return Err(Error::Dimension(format!(
                "truncation {n} exceeds basis size {}",
                basis.len()
            )));
        }
        let modes = &basis.modes()[..n];
        let entries: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|idx| self.matrix_element(&modes[idx / n], &modes[idx % n]))
            .collect();
        let raw = DMatrix::from_row_slice(n, n, &entries);
        CouplingMatrix::from_raw(raw)
    }
}

/// Hermitian coupling matrix with the defect measured before symmetrization.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub matrix: DMatrix<Complex64>,
    pub hermiticity_defect: f64,
}

impl CouplingMatrix {
    /// Checks `‖M − M†‖_max ≤ 1e-10`, then stores (M + M†)/2.
    pub fn from_raw(raw: DMatrix<Complex64>) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::Dimension("coupling matrix must be square".into()));
        }
        let adj = raw.adjoint();
        let defect = (&raw - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > HERMITICITY_THRESHOLD {
            return Err(Error::NotHermitian {
                defect,
                threshold: HERMITICITY_THRESHOLD,
            });
        }
        Ok(Self {
            matrix: (raw + adj).scale(0.5),
            hermiticity_defect: defect,
        })
    }

    /// Builds directly from a real symmetric matrix (tests, synthetic operators).
    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_raw(m.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry B_{j,k} with 1-based indices.
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.matrix[(j - 1, k - 1)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Leading n×n block.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            matrix: self.matrix.view((0, 0), (n, n)).into_owned(),
            hermiticity_defect: self.hermiticity_defect,
        }
    }

    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// CSV rows `j,k,re,im` (1-based).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,k,re,im\n");
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                let z = self.matrix[(j, k)];
                let _ = writeln!(s, "{},{},{:.17e},{:.17e}", j + 1, k + 1, z.re, z.im);
            }
        }
        s
    }
}

/// ⟨φ_k, Bφ_1⟩ = −2k/((k²−1)²π²) for the tadpole head coupling x(1−x).
pub fn tadpole_coupling_oracle(k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument("closed form holds for k >= 2".into()));
    }
    let k = k as f64;
    Ok(-2.0 * k / ((k * k - 1.0).powi(2) * PI * PI))
}

/// Magnitude 3³·2^{5/3}·√3·m / (|64 − 180m² + 81m⁴|·π), the same-class bound
/// quoted for the star example. The m = 1 denominator is negative; only the
/// absolute value is meaningful.
pub fn star_coupling_oracle(m: u64) -> f64 {
    let m = m as f64;
    let den = 64.0 - 180.0 * m * m + 81.0 * m.powi(4);
    27.0 * 2f64.powf(5.0 / 3.0) * 3f64.sqrt() * m / (den.abs() * PI)
}

/// 27√3 m / ((64 − 180m² + 81m⁴)π) = ∫₀¹ cos(πt/3) sin(πt) sin(mπt) dt, with its sign.
pub fn star_unit_overlap(m: u64) -> f64 {
    let mf = m as f64;
    let den = 64.0 - 180.0 * mf * mf + 81.0 * mf.powi(4);
    let mag = 27.0 * 3f64.sqrt() * mf / (den.abs() * PI);
    // sign pattern of the integral: + for m = 1, 2, then (−1)^m
    if m <= 2 || m % 2 == 0 {
        mag
    } else {
        -mag
    }
}

/// Diagonal entry quoted for the star example: 3³ L² √3 m² / ((36m² − 1)π).
pub fn star_diagonal_quoted(length: f64, m: u64) -> f64 {
    let m = m as f64;
    27.0 * length * length * 3f64.sqrt() * m * m / ((36.0 * m * m - 1.0) * PI)
}

/// Tadpole control: multiplication by x(1−x) on the head, zero on the tail.
pub fn tadpole_operator(graph: Arc<MetricGraph>) -> Result<ControlOperator> {
    let head = graph.edge_index("head")?;
    ControlOperator::new(
        graph,
        vec![CouplingTerm {
            out_edge: head,
            in_edge: head,
            profile: Profile::polynomial(vec![0.0, 1.0, -1.0]),
            scale: 1.0,
            sign: 1.0,
        }],
    )
}

/// How the cross-class terms of the star operator are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossCoupling {
    /// Class-2 → class-1 coefficient L1²/L2, which makes B symmetric.
    Symmetrized,
    /// Class-2 → class-1 coefficient L2 as in the printed formula (not symmetric
    /// unless L1 = L2).
    AsPrinted,
}

/// Star operator on edges e1..e4 (pairs of lengths L1, L2):
/// (Bψ)¹ = −(Bψ)² = L1 cos(πx/(3L1)) [ψ¹(x) + ψ³(L2 x / L1)] and the mirrored
/// expression on e3, e4.
pub fn star_operator(graph: Arc<MetricGraph>, cross: CrossCoupling) -> Result<ControlOperator> {
    let idx: Vec<usize> = ["e1", "e2", "e3", "e4"]
        .iter()
        .map(|e| graph.edge_index(e))
        .collect::<Result<_>>()?;
    let l1 = graph.edge(idx[0]).length;
    let l2 = graph.edge(idx[2]).length;
    let c1 = Profile::cosine(l1, PI / (3.0 * l1));
    let c2 = Profile::cosine(l2, PI / (3.0 * l2));
    let c21 = match cross {
        CrossCoupling::Symmetrized => Profile::cosine(l1 * l1 / l2, PI / (3.0 * l2)),
        CrossCoupling::AsPrinted => c2.clone(),
    };
    let mut terms = Vec::new();
    for (out, sign) in [(idx[0], 1.0), (idx[1], -1.0)] {
        terms.push(CouplingTerm { out_edge: out, in_edge: idx[0], profile: c1.clone(), scale: 1.0, sign });
        terms.push(CouplingTerm { out_edge: out, in_edge: idx[2], profile: c1.clone(), scale: l2 / l1, sign });
    }
    for (out, sign) in [(idx[2], 1.0), (idx[3], -1.0)] {
        terms.push(CouplingTerm { out_edge: out, in_edge: idx[2], profile: c2.clone(), scale: 1.0, sign });
        terms.push(CouplingTerm { out_edge: out, in_edge: idx[0], profile: c21.clone(), scale: l1 / l2, sign });
    }
    ControlOperator::new(graph, terms)
}
