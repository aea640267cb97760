//! Resonant quadruples μ_j − μ_k = μ_l − μ_m.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::basis::SpectralBasis;
use crate::operator::CouplingMatrix;

/// Canonical form: j > k, l > m and (j, k) < (l, m) lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadruple {
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    /// (μ_j − μ_k) − (μ_l − μ_m).
    pub defect: f64,
    /// Equality holds exactly (integer keys) or to rounding level.
    pub exact: bool,
    /// B_jj − B_kk − B_ll + B_mm, once attached.
    pub diagonal: Option<f64>,
}

impl Quadruple {
    pub fn indices(&self) -> (usize, usize, usize, usize) {
        (self.j, self.k, self.l, self.m)
    }

    pub fn diagonal_combination(&self, b: &CouplingMatrix) -> f64 {
        b.get(self.j, self.j).re - b.get(self.k, self.k).re - b.get(self.l, self.l).re
            + b.get(self.m, self.m).re
    }

    /// Whether the four modes come from more than one length class.
    pub fn is_mixed_class(&self, basis: &SpectralBasis) -> bool {
        let classes: BTreeSet<Option<usize>> = [self.j, self.k, self.l, self.m]
            .iter()
            .map(|&i| basis.mode(i).length_class)
            .collect();
        classes.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceTable {
    pub n: usize,
    pub tol: f64,
    pub quadruples: Vec<Quadruple>,
}

impl ResonanceTable {
    pub fn len(&self) -> usize {
        self.quadruples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadruples.is_empty()
    }

    pub fn exact(&self) -> impl Iterator<Item = &Quadruple> {
        self.quadruples.iter().filter(|q| q.exact)
    }

    pub fn near_misses(&self) -> impl Iterator<Item = &Quadruple> {
        self.quadruples.iter().filter(|q| !q.exact)
    }

    pub fn index_set(&self) -> BTreeSet<(usize, usize, usize, usize)> {
        self.quadruples.iter().map(Quadruple::indices).collect()
    }

    pub fn attach_diagonal(&mut self, b: &CouplingMatrix) {
        for q in &mut self.quadruples {
            q.diagonal = Some(q.diagonal_combination(b));
        }
    }

    /// CSV rows `j,k,l,m,defect,exact,diagonal`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,k,l,m,defect,exact,diagonal\n");
        for q in &self.quadruples {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6e},{},{}",
                q.j,
                q.k,
                q.l,
                q.m,
                q.defect,
                q.exact,
                q.diagonal.map(|d| format!("{d:.12e}")).unwrap_or_default()
            );
        }
        s
    }
}

/// 1e-9 relative to the largest |μ|.
pub fn default_tolerance(mu: &[f64]) -> f64 {
    1e-9 * mu.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn canonical(a: (usize, usize), b: (usize, usize)) -> ((usize, usize), (usize, usize)) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn sort_quadruples(q: &mut [Quadruple]) {
    q.sort_by_key(Quadruple::indices);
}

/// Quadruples among the first `n` eigenvalues whose transition frequencies
/// agree within `tol`, by sorting the positive differences and scanning.
pub fn find_resonances(mu: &[f64], n: usize, tol: f64) -> ResonanceTable {
    let n = n.min(mu.len());
    let mut diffs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 1..n {
        for k in 0..j {
            diffs.push((mu[j] - mu[k], j + 1, k + 1));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = mu[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let exact_tol = 4.0 * f64::EPSILON * scale;
    let mut out = Vec::new();
    for (i, a) in diffs.iter().enumerate() {
        for b in &diffs[i + 1..] {
            let gap = b.0 - a.0;
            if gap > tol {
                break;
            }
            let ((j, k), (l, m)) = canonical((a.1, a.2), (b.1, b.2));
            let defect = (mu[j - 1] - mu[k - 1]) - (mu[l - 1] - mu[m - 1]);
            out.push(Quadruple {
                j,
                k,
                l,
                m,
                defect,
                exact: defect.abs() <= exact_tol,
                diagonal: None,
            });
        }
    }
    sort_quadruples(&mut out);
    ResonanceTable { n, tol, quadruples: out }
}

/// Exact detection on integer keys q with μ = scale·q.
pub fn find_resonances_exact(keys: &[u64], n: usize) -> ResonanceTable {
    let n = n.min(keys.len());
    let mut diffs: Vec<(u64, usize, usize)> = Vec::new();
    for j in 1..n {
        for k in 0..j {
            if let Some(d) = keys[j].checked_sub(keys[k]) {
                diffs.push((d, j + 1, k + 1));
            }
        }
    }
    diffs.sort_unstable();
    let mut out = Vec::new();
    let mut start = 0;
    while start < diffs.len() {
        let end = start + diffs[start..].iter().take_while(|d| d.0 == diffs[start].0).count();
        for a in start..end {
            for b in a + 1..end {
                let ((j, k), (l, m)) =
                    canonical((diffs[a].1, diffs[a].2), (diffs[b].1, diffs[b].2));
                out.push(Quadruple {
                    j,
                    k,
                    l,
                    m,
                    defect: 0.0,
                    exact: true,
                    diagonal: None,
                });
            }
        }
        start = end;
    }
    sort_quadruples(&mut out);
    ResonanceTable { n, tol: 0.0, quadruples: out }
}

/// Integer detection when the basis carries exact keys, float scan otherwise.
pub fn resonances_for_basis(basis: &SpectralBasis, n: usize, tol: Option<f64>) -> ResonanceTable {
    match (basis.exact_keys(), tol) {
        (Some((_, keys)), None) => find_resonances_exact(keys, n),
        _ => {
            let mu = basis.eigenvalues();
            let tol = tol.unwrap_or_else(|| default_tolerance(&mu[..n.min(mu.len())]));
            find_resonances(&mu, n, tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{star_example_basis, tadpole_basis};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn brute_force(mu: &[f64], n: usize, tol: f64) -> BTreeSet<(usize, usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for j in 1..=n {
            for k in 1..j {
                for l in 1..=n {
                    for m in 1..l {
                        if (j, k) < (l, m)
                            && ((mu[j - 1] - mu[k - 1]) - (mu[l - 1] - mu[m - 1])).abs() <= tol
                        {
                            out.insert((j, k, l, m));
                        }
                    }
                }
            }
        }
        out
    }

    fn squares_oracle(n: usize) -> BTreeSet<(usize, usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for j in 1..=n {
            for k in 1..j {
                for l in 1..=n {
                    for m in 1..l {
                        if (j, k) < (l, m) && j * j - k * k == l * l - m * m {
                            out.insert((j, k, l, m));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn tadpole_matches_difference_of_squares() {
        let mu: Vec<f64> = (1..=20).map(|k| 4.0 * (k * k) as f64 * PI * PI).collect();
        let float = find_resonances(&mu, 20, default_tolerance(&mu));
        assert_eq!(float.index_set(), squares_oracle(20));
        assert!(float.quadruples.iter().all(|q| q.exact));
        assert!(float.index_set().contains(&(7, 1, 8, 4)));
        let basis = tadpole_basis(20).unwrap();
        let exact = resonances_for_basis(&basis, 20, None);
        assert_eq!(exact.index_set(), squares_oracle(20));
    }

    #[test]
    fn two_levels_have_no_quadruple() {
        assert!(find_resonances(&[1.0, 4.0], 2, 1e-9).is_empty());
        assert!(find_resonances_exact(&[1, 4], 2).is_empty());
    }

    #[test]
    fn star_spectrum_matches_brute_force() {
        let basis = star_example_basis(25);
        let mu = basis.eigenvalues();
        let tol = default_tolerance(&mu[..25]);
        let t = find_resonances(&mu, 25, tol);
        assert_eq!(t.index_set(), brute_force(&mu, 25, tol));
        assert!(!t.is_empty());
    }

    #[test]
    fn star_mixed_classes_are_non_resonant() {
        let basis = star_example_basis(40);
        let t = find_resonances(&basis.eigenvalues(), 60, 1e-6);
        assert!(t.quadruples.iter().all(|q| !q.is_mixed_class(&basis)));
        assert!(t.quadruples.iter().any(|q| !q.is_mixed_class(&basis)));
    }

    #[test]
    fn near_misses_are_flagged() {
        let mu = [0.0, 1.0, 5.0, 6.0 + 1e-7];
        let t = find_resonances(&mu, 4, 1e-6);
        assert_eq!(t.len(), 2);
        assert!(t.quadruples.iter().all(|q| !q.exact));
        assert_eq!(find_resonances(&mu, 4, 1e-9).len(), 0);
    }

    #[test]
    fn csv_rows() {
        let mu: Vec<f64> = (1..=8).map(|k| (k * k) as f64).collect();
        let t = find_resonances(&mu, 8, 1e-9);
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), t.len() + 1);
        assert!(csv.starts_with("j,k,l,m,defect,exact,diagonal"));
    }

    proptest! {
        #[test]
        fn scan_equals_brute_force(
            gaps in prop::collection::vec(1u32..6, 2..18),
            tol in prop::sample::select(vec![0.5, 1e-9]),
        ) {
            let mut acc = 0.0;
            let mu: Vec<f64> = gaps.iter().map(|&g| { acc += f64::from(g); acc }).collect();
            let n = mu.len();
            prop_assert_eq!(find_resonances(&mu, n, tol).index_set(), brute_force(&mu, n, tol));
            let keys: Vec<u64> = mu.iter().map(|&v| v as u64).collect();
            prop_assert_eq!(find_resonances_exact(&keys, n).index_set(), brute_force(&mu, n, 0.5));
        }
    }
}
