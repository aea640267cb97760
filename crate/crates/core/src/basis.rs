//! Closed-form eigen-systems of the Laplacian on metric graphs.
//!
//! Every mode is stored symbolically: on each supporting edge it equals
//! `a cos(√μ x) + b sin(√μ x)` and it vanishes identically elsewhere. Three
//! families are available: the head of a tadpole, antisymmetric modes on
//! pairs of equal star edges, and uniform chains.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{canonical, BoundaryCondition, EdgeEnd, MetricGraph};
use crate::quadrature::{GaussLegendre, NeumaierSum};

/// Relative tolerance below which two eigenvalues from different families collide.
pub const MERGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCoeff {
    pub edge: usize,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenMode {
    /// Global 1-based index after sorting.
    pub k: usize,
    pub mu: f64,
    pub coeffs: Vec<EdgeCoeff>,
    /// Mode number m(k) inside its family.
    pub mode_number: usize,
    /// Length class l(k), 1-based, for star bases.
    pub length_class: Option<usize>,
}

impl EigenMode {
    pub fn frequency(&self) -> f64 {
        self.mu.sqrt()
    }

    fn coeff(&self, edge: usize) -> Option<&EdgeCoeff> {
        self.coeffs.iter().find(|c| c.edge == edge)
    }

    /// φ^edge = a cos(√μ x) + b sin(√μ x), if supported on `edge`.
    pub fn edge_coeff(&self, edge: usize) -> Option<&EdgeCoeff> {
        self.coeff(edge)
    }

    pub fn is_supported_on(&self, edge: usize) -> bool {
        self.coeff(edge).is_some()
    }

    /// φ^edge(x); zero off the support.
    pub fn eval(&self, edge: usize, x: f64) -> f64 {
        self.coeff(edge).map_or(0.0, |c| {
            let w = self.frequency();
            c.a * (w * x).cos() + c.b * (w * x).sin()
        })
    }

    /// d/dx φ^edge(x).
    pub fn deriv(&self, edge: usize, x: f64) -> f64 {
        self.coeff(edge).map_or(0.0, |c| {
            let w = self.frequency();
            w * (c.b * (w * x).cos() - c.a * (w * x).sin())
        })
    }
}

/// Eigenvalue families of uniform chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainClass {
    /// Two edges between Neumann ends: μ = (2k-1)²π²/(4L²).
    NeumannEnds,
    /// Open chain with Dirichlet ends: μ = k²π²/L².
    DirichletEnds,
    /// Closed chain with an even number of edges: μ = (2k-1)²π²/L².
    Loop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisFamily {
    Tadpole { head: usize },
    StarPairs { pairs: Vec<(usize, usize)>, lengths: Vec<f64> },
    UniformChain { class: ChainClass, edges: Vec<usize>, length: f64 },
}

/// Orthonormal eigen-system sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    graph: Arc<MetricGraph>,
    modes: Vec<EigenMode>,
    family: BasisFamily,
    /// Integers q_k with μ_k = scale·q_k, when the spectrum has that form.
    exact_keys: Option<(f64, Vec<u64>)>,
}

/// One failed boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryViolation {
    pub k: usize,
    pub vertex: String,
    pub condition: BoundaryCondition,
    pub defect: f64,
}

/// Gauss–Legendre order for an integrand with total angular frequency `freq`
/// on an edge of length `length`: max(32, 4·mode number) plus the polynomial degree.
pub fn quadrature_order(freq: f64, length: f64, degree: usize) -> usize {
    let mode_number = (freq * length / PI).ceil() as usize;
    32.max(4 * mode_number) + degree
}

impl SpectralBasis {
    /// Modes √(2/L) sin(2kπx/L) on the loop `head`, zero elsewhere.
    pub fn tadpole(graph: Arc<MetricGraph>, head: &str, n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Basis("n_modes must be at least 1".into()));
        }
        let h = graph.edge_index(head)?;
        let edge = graph.edge(h);
        if edge.end != Some(edge.start) || !edge.is_finite() {
            return Err(Error::Basis(format!("`{head}` is not a finite self-loop")));
        }
        if graph.vertices()[edge.start].boundary != BoundaryCondition::NeumannKirchhoff {
            return Err(Error::Basis("the loop vertex must carry Neumann-Kirchhoff".into()));
        }
        let len = edge.length;
        let amp = (2.0 / len).sqrt();
        let modes = (1..=n_modes)
            .map(|k| {
                let w = 2.0 * k as f64 * PI / len;
                EigenMode {
                    k,
                    mu: w * w,
                    coeffs: vec![EdgeCoeff { edge: h, a: 0.0, b: amp }],
                    mode_number: k,
                    length_class: None,
                }
            })
            .collect();
        let keys = (1..=n_modes as u64).map(|k| k * k).collect();
        Ok(Self {
            graph,
            modes,
            family: BasisFamily::Tadpole { head: h },
            exact_keys: Some((4.0 * PI * PI / (len * len), keys)),
        })
    }

    /// Antisymmetric modes on each pair `(e_{2l-1}, e_{2l})` of equal star edges.
    ///
    /// Edges run from a Dirichlet external vertex (coordinate 0) to a shared
    /// Neumann–Kirchhoff centre. Class `l` contributes
    /// μ = m²π²/L_l² with φ = ±L_l^{-1/2} sin(√μ x) on its two edges.
    pub fn star_pairs(
        graph: Arc<MetricGraph>,
        pairs: &[(&str, &str)],
        modes_per_length: usize,
    ) -> Result<Self> {
        if modes_per_length == 0 || pairs.is_empty() {
            return Err(Error::Basis("need at least one pair and one mode per length".into()));
        }
        let mut idx_pairs = Vec::new();
        let mut lengths = Vec::new();
        let mut centre = None;
        for &(p, q) in pairs {
            let (ip, iq) = (graph.edge_index(p)?, graph.edge_index(q)?);
            let (ep, eq) = (graph.edge(ip), graph.edge(iq));
            if !ep.is_finite() || !eq.is_finite() {
                return Err(Error::Basis(format!("pair ({p}, {q}) has an infinite edge")));
            }
            if ((ep.length - eq.length) / ep.length).abs() > 1e-12 {
                return Err(Error::Basis(format!("pair ({p}, {q}) has unequal lengths")));
            }
            for e in [ep, eq] {
                let ext = &graph.vertices()[e.start];
                if !ext.is_external() || ext.boundary != BoundaryCondition::Dirichlet {
                    return Err(Error::Basis(format!(
                        "edge `{}` must start at a Dirichlet external vertex",
                        e.id
                    )));
                }
                if *centre.get_or_insert(e.end) != e.end {
                    return Err(Error::Basis("all pair edges must end at one centre".into()));
                }
            }
            idx_pairs.push((ip, iq));
            lengths.push(ep.length);
        }
        let mut modes = Vec::new();
        for (l, (&(ip, iq), &len)) in idx_pairs.iter().zip(&lengths).enumerate() {
            let amp = len.sqrt().recip();
            for m in 1..=modes_per_length {
                let w = m as f64 * PI / len;
                modes.push(EigenMode {
                    k: 0,
                    mu: w * w,
                    coeffs: vec![
                        EdgeCoeff { edge: ip, a: 0.0, b: amp },
                        EdgeCoeff { edge: iq, a: 0.0, b: -amp },
                    ],
                    mode_number: m,
                    length_class: Some(l + 1),
                });
            }
        }
        let modes = merge_sorted(modes)?;
        let exact_keys = (lengths.len() == 1).then(|| {
            let keys = modes.iter().map(|m| (m.mode_number * m.mode_number) as u64).collect();
            (PI * PI / (lengths[0] * lengths[0]), keys)
        });
        Ok(Self {
            graph,
            modes,
            family: BasisFamily::StarPairs {
                pairs: idx_pairs,
                lengths,
            },
            exact_keys,
        })
    }

    /// Uniform chain of consecutive equal edges; see [`ChainClass`].
    pub fn uniform_chain(
        graph: Arc<MetricGraph>,
        edges: &[&str],
        class: ChainClass,
        n_modes: usize,
    ) -> Result<Self> {
        if n_modes == 0 || edges.is_empty() {
            return Err(Error::Basis("need at least one edge and one mode".into()));
        }
        let idx: Vec<usize> = edges
            .iter()
            .map(|e| graph.edge_index(e))
            .collect::<Result<_>>()?;
        let len = graph.edge(idx[0]).length;
        for w in idx.windows(2) {
            let (a, b) = (graph.edge(w[0]), graph.edge(w[1]));
            if a.end != Some(b.start) {
                return Err(Error::Basis(format!("`{}` does not continue `{}`", b.id, a.id)));
            }
        }
        for &i in &idx {
            let e = graph.edge(i);
            if !e.is_finite() || ((e.length - len) / len).abs() > 1e-12 {
                return Err(Error::Basis(format!("chain edge `{}` has a different length", e.id)));
            }
        }
        let first = graph.edge(idx[0]).start;
        let last = graph.edge(*idx.last().unwrap()).end.expect("finite edge");
        let ends_are = |bc: BoundaryCondition| {
            [first, last].iter().all(|&v| {
                let v = &graph.vertices()[v];
                v.is_external() && v.boundary == bc
            })
        };
        let n_edges = idx.len();
        let (keys, odd): (Vec<u64>, bool) = match class {
            ChainClass::NeumannEnds => {
                if n_edges != 2 || !ends_are(BoundaryCondition::Neumann) {
                    return Err(Error::Basis(
                        "Neumann-end chains need two edges with Neumann external ends".into(),
                    ));
                }
                ((1..=n_modes as u64).map(|k| (2 * k - 1).pow(2)).collect(), true)
            }
            ChainClass::DirichletEnds => {
                if !ends_are(BoundaryCondition::Dirichlet) {
                    return Err(Error::Basis("chain ends must be Dirichlet external vertices".into()));
                }
                ((1..=n_modes as u64).map(|k| k * k).collect(), false)
            }
            ChainClass::Loop => {
                if first != last || n_edges % 2 != 0 {
                    return Err(Error::Basis("loops need an even number of edges closing on themselves".into()));
                }
                ((1..=n_modes as u64).map(|k| (2 * k - 1).pow(2)).collect(), true)
            }
        };
        let amp = (2.0 / (n_edges as f64 * len)).sqrt();
        let scale = match class {
            ChainClass::NeumannEnds => PI * PI / (4.0 * len * len),
            _ => PI * PI / (len * len),
        };
        let modes = (1..=n_modes)
            .map(|k| {
                let q = keys[k - 1] as f64;
                let coeffs = idx
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| match class {
                        ChainClass::NeumannEnds if j == 0 => EdgeCoeff { edge: e, a: amp, b: 0.0 },
                        ChainClass::NeumannEnds => EdgeCoeff {
                            edge: e,
                            a: 0.0,
                            b: if k % 2 == 0 { amp } else { -amp },
                        },
                        ChainClass::DirichletEnds => EdgeCoeff {
                            edge: e,
                            a: 0.0,
                            b: if (k * j) % 2 == 0 { amp } else { -amp },
                        },
                        ChainClass::Loop => EdgeCoeff {
                            edge: e,
                            a: 0.0,
                            b: if j % 2 == 0 { amp } else { -amp },
                        },
                    })
                    .collect();
                EigenMode {
                    k,
                    mu: scale * q,
                    coeffs,
                    mode_number: if odd { 2 * k - 1 } else { k },
                    length_class: None,
                }
            })
            .collect();
        Ok(Self {
            graph,
            modes,
            family: BasisFamily::UniformChain {
                class,
                edges: idx,
                length: len,
            },
            exact_keys: Some((scale, keys)),
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<MetricGraph> {
        self.graph.clone()
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    pub fn modes(&self) -> &[EigenMode] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> &EigenMode {
        &self.modes[k - 1]
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.mu).collect()
    }

    /// `(scale, q)` with μ_k = scale·q_k for integer q_k, when available.
    pub fn exact_keys(&self) -> Option<(f64, &[u64])> {
        self.exact_keys.as_ref().map(|(s, k)| (*s, k.as_slice()))
    }

    /// First `n` modes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::Dimension(format!("cannot truncate {} modes to {n}", self.len())));
        }
        Ok(Self {
            graph: self.graph.clone(),
            modes: self.modes[..n].to_vec(),
            family: self.family.clone(),
            exact_keys: self
                .exact_keys
                .as_ref()
                .map(|(s, k)| (*s, k[..n].to_vec())),
        })
    }

    /// Γ(φ): indices of edges carrying some mode.
    pub fn support_edges(&self) -> Vec<usize> {
        let mut edges: Vec<usize> = self
            .modes
            .iter()
            .flat_map(|m| m.coeffs.iter().map(|c| c.edge))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Vertices touched by Γ(φ).
    pub fn support_vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self
            .support_edges()
            .iter()
            .flat_map(|&e| {
                let edge = self.graph.edge(e);
                std::iter::once(edge.start).chain(edge.end)
            })
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// ⟨φ_j, φ_k⟩ for all pairs, by Gauss–Legendre quadrature.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let (mj, mk) = (&self.modes[j], &self.modes[k]);
                let mut acc = NeumaierSum::default();
                for cj in &mj.coeffs {
                    if !mk.is_supported_on(cj.edge) {
                        continue;
                    }
                    let len = self.graph.edge(cj.edge).length;
                    let order = quadrature_order(mj.frequency() + mk.frequency(), len, 0);
                    let rule = GaussLegendre::cached(order);
                    acc.add(rule.integrate(0.0, len, |x| mj.eval(cj.edge, x) * mk.eval(cj.edge, x)));
                }
                g[(j, k)] = acc.total();
                g[(k, j)] = acc.total();
            }
        }
        g
    }

    /// Checks every mode against every vertex condition of Γ(φ).
    ///
    /// Values are compared against `tol`; derivative conditions against
    /// `tol·max(1, √μ)`.
    pub fn boundary_violations(&self, tol: f64) -> Vec<BoundaryViolation> {
        let mut out = Vec::new();
        for mode in &self.modes {
            let f = |edge: usize, x: f64| mode.eval(edge, x);
            let df = |edge: usize, x: f64| mode.deriv(edge, x);
            let dscale = mode.frequency().max(1.0);
            for v in self.support_vertices() {
                let defect = vertex_defect(&self.graph, v, &f, &df, dscale);
                if defect > tol {
                    let vertex = &self.graph.vertices()[v];
                    out.push(BoundaryViolation {
                        k: mode.k,
                        vertex: vertex.id.clone(),
                        condition: vertex.boundary,
                        defect,
                    });
                }
            }
        }
        out
    }

    /// CSV rows `k,mu_k,edge_id,a,b`, one per supporting edge.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,mu_k,edge_id,a,b\n");
        for m in &self.modes {
            for c in &m.coeffs {
                let _ = writeln!(
                    s,
                    "{},{:.17e},{},{:.17e},{:.17e}",
                    m.k,
                    m.mu,
                    self.graph.edge(c.edge).id,
                    c.a,
                    c.b
                );
            }
        }
        s
    }
}

/// Largest defect of the vertex condition at `v` for a function given per edge
/// by `f` and `df`; derivative defects are divided by `dscale`.
pub fn vertex_defect(
    graph: &MetricGraph,
    v: usize,
    f: &dyn Fn(usize, f64) -> f64,
    df: &dyn Fn(usize, f64) -> f64,
    dscale: f64,
) -> f64 {
    let ends: Vec<(f64, f64)> = graph
        .incident(v)
        .into_iter()
        .map(|(e, end)| {
            let edge = graph.edge(e);
            if !edge.is_finite() && end == EdgeEnd::End {
                return (0.0, 0.0);
            }
            match end {
                EdgeEnd::Start => (f(e, 0.0), df(e, 0.0)),
                EdgeEnd::End => (f(e, edge.length), -df(e, edge.length)),
            }
        })
        .collect();
    match graph.vertices()[v].boundary {
        BoundaryCondition::Dirichlet => ends.iter().map(|(val, _)| val.abs()).fold(0.0, f64::max),
        BoundaryCondition::Neumann => ends
            .iter()
            .map(|(_, d)| d.abs() / dscale)
            .fold(0.0, f64::max),
        BoundaryCondition::NeumannKirchhoff => {
            let lo = ends.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
            let hi = ends.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
            let flux: f64 = ends.iter().map(|e| e.1).sum();
            (hi - lo).max(flux.abs() / dscale)
        }
    }
}

fn merge_sorted(mut modes: Vec<EigenMode>) -> Result<Vec<EigenMode>> {
    modes.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    for w in modes.windows(2) {
        if (w[1].mu - w[0].mu) <= MERGE_TOLERANCE * w[1].mu.abs() {
            return Err(Error::EigenvalueCollision {
                a: w[0].mu,
                ia: w[0].mode_number,
                b: w[1].mu,
                ib: w[1].mode_number,
            });
        }
    }
    for (i, m) in modes.iter_mut().enumerate() {
        m.k = i + 1;
    }
    Ok(modes)
}

/// Tadpole basis on the canonical tadpole graph.
pub fn tadpole_basis(n_modes: usize) -> Result<SpectralBasis> {
    SpectralBasis::tadpole(Arc::new(canonical::tadpole()), "head", n_modes)
}

/// Star-pair basis on a freshly built star with one edge pair per length.
pub fn star_pair_basis(lengths: &[&str], modes_per_length: usize) -> Result<SpectralBasis> {
    let graph = Arc::new(canonical::star_pairs(lengths)?);
    let names: Vec<(String, String)> = (0..lengths.len())
        .map(|l| (format!("e{}", 2 * l + 1), format!("e{}", 2 * l + 2)))
        .collect();
    let pairs: Vec<(&str, &str)> = names.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    SpectralBasis::star_pairs(graph, &pairs, modes_per_length)
}

/// The L1 = cbrt(2), L2 = cbrt(5) star with `modes_per_length` modes per class.
pub fn star_example_basis(modes_per_length: usize) -> SpectralBasis {
    star_pair_basis(&["cbrt(2)", "cbrt(5)"], modes_per_length).expect("irrational lengths never collide")
}

/// Uniform chain of edge length `length` in its canonical graph: two edges
/// for Neumann ends, `edges` edges otherwise.
pub fn uniform_chain_basis(
    length: &str,
    class: ChainClass,
    edges: usize,
    n_modes: usize,
) -> Result<SpectralBasis> {
    use crate::graph::GraphSpec;
    let n_edges = if class == ChainClass::NeumannEnds { 2 } else { edges.max(1) };
    let mut spec = GraphSpec::new();
    let names: Vec<String> = (1..=n_edges).map(|i| format!("e{i}")).collect();
    match class {
        ChainClass::Loop => {
            if n_edges < 2 {
                return Err(Error::Basis("loops need at least two edges".into()));
            }
            for i in 0..n_edges {
                spec = spec.vertex(&format!("v{i}"), BoundaryCondition::NeumannKirchhoff);
            }
            for i in 0..n_edges {
                let (a, b) = (format!("v{i}"), format!("v{}", (i + 1) % n_edges));
                spec = spec.edge(&names[i], &a, Some(&b), length);
            }
        }
        _ => {
            let ext = if class == ChainClass::NeumannEnds {
                BoundaryCondition::Neumann
            } else {
                BoundaryCondition::Dirichlet
            };
            for i in 0..=n_edges {
                let bc = if i == 0 || i == n_edges { ext } else { BoundaryCondition::NeumannKirchhoff };
                spec = spec.vertex(&format!("v{i}"), bc);
            }
            for i in 0..n_edges {
                let (a, b) = (format!("v{i}"), format!("v{}", i + 1));
                spec = spec.edge(&names[i], &a, Some(&b), length);
            }
        }
    }
    let graph = Arc::new(MetricGraph::build(&spec)?);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    SpectralBasis::uniform_chain(graph, &refs, class, n_modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_orthonormal(b: &SpectralBasis, tol: f64) {
        let g = b.gram();
        for j in 0..b.len() {
            for k in 0..b.len() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (g[(j, k)] - want).abs() <= tol,
                    "G[{j},{k}] = {} in {:?}",
                    g[(j, k)],
                    b.family()
                );
            }
        }
    }

    #[test]
    fn tadpole_eigenvalues() {
        let b = tadpole_basis(3).unwrap();
        assert!((b.mode(1).mu - 39.478_417_6).abs() < 1e-6);
        assert!((b.mode(1).mu - 4.0 * PI * PI).abs() < 1e-12);
        assert!((b.mode(2).mu - b.mode(1).mu - 12.0 * PI * PI).abs() < 1e-11);
        assert_eq!(b.support_edges(), vec![0]);
        // zero on the tail
        assert_eq!(b.mode(2).eval(1, 0.5), 0.0);
    }

    #[test]
    fn tadpole_orthonormal_and_boundary() {
        let b = tadpole_basis(40).unwrap();
        assert_orthonormal(&b, 1e-12);
        assert!(b.boundary_violations(1e-10).is_empty());
    }

    #[test]
    fn star_example_sorted_with_provenance() {
        let b = star_example_basis(1);
        let l1 = 2f64.cbrt();
        let l2 = 5f64.cbrt();
        // L2 > L1 so the second class comes first
        assert!((b.mode(1).mu - PI * PI / (l2 * l2)).abs() < 1e-12);
        assert!((b.mode(2).mu - PI * PI / (l1 * l1)).abs() < 1e-12);
        assert!((b.mode(1).mu - PI * PI / 5f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(b.mode(1).length_class, Some(2));
        assert_eq!(b.mode(2).length_class, Some(1));
    }

    #[test]
    fn star_orthonormal_and_boundary() {
        let b = star_example_basis(30);
        assert_orthonormal(&b, 1e-10);
        assert!(b.boundary_violations(1e-10).is_empty());
        for w in b.eigenvalues().windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn star_centre_conditions_pointwise() {
        let b = star_example_basis(5);
        let g = b.graph();
        let c = g.vertex_index("c").unwrap();
        for m in b.modes() {
            let mut flux = 0.0;
            for (e, _) in g.incident(c) {
                let len = g.edge(e).length;
                assert!(m.eval(e, len).abs() < 1e-12);
                flux -= m.deriv(e, len);
            }
            assert!(flux.abs() < 1e-12 * m.frequency());
        }
    }

    #[test]
    fn equal_lengths_collide() {
        let err = star_pair_basis(&["1", "1"], 2).unwrap_err();
        assert!(matches!(err, Error::EigenvalueCollision { .. }));
        // commensurate lengths collide on higher modes
        assert!(star_pair_basis(&["1", "2"], 4).is_err());
    }

    #[test]
    fn chain_families() {
        let d = uniform_chain_basis("1", ChainClass::DirichletEnds, 3, 3).unwrap();
        let pi2 = PI * PI;
        for (k, want) in [pi2, 4.0 * pi2, 9.0 * pi2].iter().enumerate() {
            assert!((d.mode(k + 1).mu - want).abs() < 1e-12);
        }
        let n = uniform_chain_basis("1", ChainClass::NeumannEnds, 2, 1).unwrap();
        assert!((n.mode(1).mu - pi2 / 4.0).abs() < 1e-13);
        let l = uniform_chain_basis("1", ChainClass::Loop, 2, 1).unwrap();
        assert!((l.mode(1).mu - pi2).abs() < 1e-13);
        for b in [&d, &n, &l] {
            assert!(b.boundary_violations(1e-10).is_empty(), "{:?}", b.family());
        }
    }

    #[test]
    fn chain_orthonormal() {
        for class in [ChainClass::DirichletEnds, ChainClass::NeumannEnds, ChainClass::Loop] {
            let b = uniform_chain_basis("0.7", class, 4, 12).unwrap();
            assert_orthonormal(&b, 1e-12);
            assert!(b.boundary_violations(1e-10).is_empty());
        }
    }

    #[test]
    fn odd_loop_rejected() {
        assert!(uniform_chain_basis("1", ChainClass::Loop, 3, 2).is_err());
    }

    #[test]
    fn boundary_check_catches_a_bad_mode() {
        let mut b = tadpole_basis(2).unwrap();
        b.modes[0].coeffs[0].a = 0.3;
        let bad = b.boundary_violations(1e-10);
        assert!(bad.iter().any(|v| v.k == 1));
    }

    #[test]
    fn csv_export() {
        let csv = star_example_basis(1).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,mu_k,edge_id,a,b");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("1,") && lines[1].contains(",e3,"));
    }
}
