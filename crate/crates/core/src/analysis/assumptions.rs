//! Coupling hypotheses: decay of the first column, diagonal non-resonance and
//! the boundary bookkeeping for the range of B.

use std::fmt;

use super::resonance::{default_tolerance, find_resonances, ResonanceTable};
use crate::basis::{vertex_defect, SpectralBasis};
use crate::error::{Error, Result};
use crate::graph::BoundaryCondition;
use crate::operator::{ControlOperator, CouplingMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionIReport {
    pub eta: f64,
    /// min_k |B_{k,1}|·k^{2+η}.
    pub c_best: f64,
    pub argmin: usize,
    pub decay_pass: bool,
    /// Resonant quadruples with their diagonal combination attached.
    pub resonances: ResonanceTable,
    /// Smallest |B_jj − B_kk − B_ll + B_mm| over the table; +∞ when empty.
    pub min_diagonal: f64,
    /// Quadruples whose combination is within `tol` of zero.
    pub violations: Vec<(usize, usize, usize, usize)>,
    pub tol: f64,
    /// Truncation the evidence is restricted to.
    pub n: usize,
}

impl AssumptionIReport {
    pub fn pass(&self) -> bool {
        self.decay_pass && self.violations.is_empty()
    }
}

/// Decay of B_{k,1} and the diagonal condition on resonances found by the
/// float scan with the default tolerance.
pub fn check_assumption_i(b: &CouplingMatrix, mu: &[f64], eta: f64, tol: f64) -> Result<AssumptionIReport> {
    let n = b.dim().min(mu.len());
    let table = find_resonances(mu, n, default_tolerance(&mu[..n]));
    check_assumption_i_with(b, eta, tol, table)
}

/// As [`check_assumption_i`] with a caller-supplied resonance table.
pub fn check_assumption_i_with(
    b: &CouplingMatrix,
    eta: f64,
    tol: f64,
    mut table: ResonanceTable,
) -> Result<AssumptionIReport> {
    let n = b.dim();
    if table.n > n {
        return Err(Error::Dimension(format!(
            "resonance table covers {} modes, matrix only {n}",
            table.n
        )));
    }
    let (argmin, c_best) = (1..=n)
        .map(|k| (k, b.get(k, 1).norm() * (k as f64).powf(2.0 + eta)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    table.attach_diagonal(b);
    let mut min_diagonal = f64::INFINITY;
    let mut violations = Vec::new();
    for q in &table.quadruples {
        let d = q.diagonal.expect("attached").abs();
        min_diagonal = min_diagonal.min(d);
        if d <= tol {
            violations.push(q.indices());
        }
    }
    Ok(AssumptionIReport {
        eta,
        c_best,
        argmin,
        decay_pass: c_best > 0.0,
        resonances: table,
        min_diagonal,
        violations,
        tol,
        n,
    })
}

/// Boundary configuration of the external vertices of Γ(φ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionIiCase {
    /// Dirichlet and Neumann both present.
    Mixed,
    Neumann,
    Dirichlet,
}

impl AssumptionIiCase {
    /// Half-open interval [lower, upper) of admissible d for a given a + η.
    pub fn d_range(self, a_plus_eta: f64) -> (f64, f64) {
        match self {
            Self::Mixed => (a_plus_eta.max(1.0), 1.5),
            Self::Neumann => (a_plus_eta.max(2.0), 3.5),
            Self::Dirichlet => (a_plus_eta.max(1.0), 2.5),
        }
    }
}

impl fmt::Display for AssumptionIiCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mixed => "D/N",
            Self::Neumann => "N",
            Self::Dirichlet => "D",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionIiReport {
    /// Cases compatible with Γ(φ); all three when it has no external vertex.
    pub cases: Vec<AssumptionIiCase>,
    pub a_plus_eta: f64,
    /// Non-empty admissible d-intervals, per case.
    pub ranges: Vec<(AssumptionIiCase, f64, f64)>,
    /// Largest vertex-condition defect of Bφ_k over the checked modes.
    pub max_boundary_defect: f64,
    pub modes_checked: usize,
}

impl AssumptionIiReport {
    pub fn admissible(&self) -> bool {
        !self.ranges.is_empty()
    }
}

/// Case selection, d-range bookkeeping and pointwise vertex conditions of Bφ_k.
///
/// Fails with [`Error::BoundaryIdentity`] when some Bφ_k leaves H²_Γ(φ)
/// beyond `tol` (derivatives scaled by max(1, √μ_k)).
pub fn check_assumption_ii(
    basis: &SpectralBasis,
    op: &ControlOperator,
    eta: f64,
    a: f64,
    n: usize,
    tol: f64,
) -> Result<AssumptionIiReport> {
    let graph = basis.graph();
    let vertices = basis.support_vertices();
    let mut has_d = false;
    let mut has_n = false;
    for &v in &vertices {
        let vx = &graph.vertices()[v];
        if vx.is_external() {
            match vx.boundary {
                BoundaryCondition::Dirichlet => has_d = true,
                BoundaryCondition::Neumann => has_n = true,
                BoundaryCondition::NeumannKirchhoff => {}
            }
        }
    }
    let cases = match (has_d, has_n) {
        (true, true) => vec![AssumptionIiCase::Mixed],
        (false, true) => vec![AssumptionIiCase::Neumann],
        (true, false) => vec![AssumptionIiCase::Dirichlet],
        (false, false) => vec![
            AssumptionIiCase::Mixed,
            AssumptionIiCase::Neumann,
            AssumptionIiCase::Dirichlet,
        ],
    };
    let a_plus_eta = a + eta;
    let ranges = cases
        .iter()
        .filter_map(|&c| {
            let (lo, hi) = c.d_range(a_plus_eta);
            (a_plus_eta > 0.0 && lo < hi).then_some((c, lo, hi))
        })
        .collect();

    let n = n.min(basis.len());
    let mut max_defect = 0.0f64;
    for mode in &basis.modes()[..n] {
        let f = |e: usize, x: f64| mode.eval(e, x);
        let df = |e: usize, x: f64| mode.deriv(e, x);
        let bf = |e: usize, x: f64| op.apply_at(e, x, &f, &df).0;
        let bdf = |e: usize, x: f64| op.apply_at(e, x, &f, &df).1;
        let dscale = mode.frequency().max(1.0);
        for &v in &vertices {
            let defect = vertex_defect(graph, v, &bf, &bdf, dscale);
            if defect > tol {
                return Err(Error::BoundaryIdentity {
                    vertex: graph.vertices()[v].id.clone(),
                    k: mode.k,
                    detail: format!("defect {defect:.3e} exceeds {tol:.1e}"),
                });
            }
            max_defect = max_defect.max(defect);
        }
    }
    Ok(AssumptionIiReport {
        cases,
        a_plus_eta,
        ranges,
        max_boundary_defect: max_defect,
        modes_checked: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::resonance::find_resonances_exact;
    use crate::basis::{star_example_basis, tadpole_basis};
    use crate::expr::Profile;
    use crate::operator::{star_operator, tadpole_operator, CouplingTerm, CrossCoupling};
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn tadpole_setup(n: usize) -> (SpectralBasis, CouplingMatrix) {
        let basis = tadpole_basis(n).unwrap();
        let op = tadpole_operator(basis.graph_arc()).unwrap();
        let b = op.assemble_matrix(&basis, n).unwrap();
        (basis, b)
    }

    #[test]
    fn tadpole_assumption_i() {
        let (basis, b) = tadpole_setup(20);
        let table = find_resonances_exact(basis.exact_keys().unwrap().1, 20);
        let r = check_assumption_i_with(&b, 1.0, 1e-12, table).unwrap();
        assert!(r.pass(), "{:?}", r.violations);
        assert!(!r.resonances.is_empty());
        for q in &r.resonances.quadruples {
            let inv = |i: usize| 1.0 / (i * i) as f64;
            let expect = (inv(q.j) - inv(q.k) - inv(q.l) + inv(q.m)) / (8.0 * PI * PI);
            assert!((q.diagonal.unwrap() - expect).abs() < 1e-12);
        }
        // the float path finds the same quadruples
        let f = check_assumption_i(&b, &basis.eigenvalues(), 1.0, 1e-12).unwrap();
        assert_eq!(f.resonances.index_set(), r.resonances.index_set());
    }

    #[test]
    fn identity_fails_diagonal_condition() {
        let (basis, _) = tadpole_setup(20);
        let id = CouplingMatrix::from_real(&DMatrix::identity(20, 20)).unwrap();
        let r = check_assumption_i(&id, &basis.eigenvalues(), 1.0, 1e-12).unwrap();
        assert!(!r.pass());
        assert_eq!(r.violations.len(), r.resonances.len());
        assert_eq!(r.min_diagonal, 0.0);
    }

    #[test]
    fn star_assumption_i() {
        let basis = star_example_basis(15);
        let op = star_operator(basis.graph_arc(), CrossCoupling::Symmetrized).unwrap();
        let b = op.assemble_matrix(&basis, 30).unwrap();
        let r = check_assumption_i(&b, &basis.eigenvalues(), 1.0, 1e-10).unwrap();
        assert!(r.pass(), "{:?} {}", r.violations, r.c_best);
        assert!(!r.resonances.is_empty());
    }

    #[test]
    fn tadpole_boundary_bookkeeping() {
        let basis = tadpole_basis(30).unwrap();
        let op = tadpole_operator(basis.graph_arc()).unwrap();
        let r = check_assumption_ii(&basis, &op, 1.0, 0.0, 30, 1e-9).unwrap();
        assert_eq!(r.cases.len(), 3);
        assert!(r.admissible());
        assert!(r.max_boundary_defect < 1e-9);
    }

    #[test]
    fn star_boundary_identities() {
        let basis = star_example_basis(20);
        let op = star_operator(basis.graph_arc(), CrossCoupling::Symmetrized).unwrap();
        let r = check_assumption_ii(&basis, &op, 1.0, 0.1, 40, 1e-9).unwrap();
        assert_eq!(r.cases, vec![AssumptionIiCase::Dirichlet]);
        let (c, lo, hi) = r.ranges[0];
        assert_eq!(c, AssumptionIiCase::Dirichlet);
        assert!((lo - 1.1).abs() < 1e-15 && hi == 2.5);
    }

    #[test]
    fn no_admissible_d() {
        let basis = star_example_basis(4);
        let op = star_operator(basis.graph_arc(), CrossCoupling::Symmetrized).unwrap();
        let r = check_assumption_ii(&basis, &op, 1.0, 2.0, 8, 1e-9).unwrap();
        assert!(!r.admissible());
    }

    #[test]
    fn constant_multiplier_breaks_identity_on_the_tadpole() {
        // B = 1 + x keeps Bφ_k continuous at v but breaks the flux balance
        let basis = tadpole_basis(6).unwrap();
        let graph = basis.graph_arc();
        let head = graph.edge_index("head").unwrap();
        let op = ControlOperator::new(
            graph,
            vec![CouplingTerm {
                out_edge: head,
                in_edge: head,
                profile: Profile::polynomial(vec![1.0, 1.0]),
                scale: 1.0,
                sign: 1.0,
            }],
        )
        .unwrap();
        assert!(matches!(
            check_assumption_ii(&basis, &op, 1.0, 0.0, 6, 1e-9),
            Err(Error::BoundaryIdentity { .. })
        ));
    }
}
