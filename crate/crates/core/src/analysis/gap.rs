//! Spectral gap conditions and the δ-chaining class partition.

use crate::error::{Error, Result};

fn check_increasing(mu: &[f64]) -> Result<()> {
    if mu.len() < 2 {
        return Err(Error::InvalidArgument("need at least two eigenvalues".into()));
    }
    match mu.windows(2).position(|w| !(w[1] > w[0])) {
        Some(i) => Err(Error::NotIncreasing(i + 1)),
        None => Ok(()),
    }
}

/// Result of `|μ_{k+1} − μ_k| ≥ C k^{−d̃−1}` over the available indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialGapReport {
    pub d_tilde: f64,
    /// min_k (μ_{k+1} − μ_k)·k^{d̃+1}.
    pub c_best: f64,
    /// 1-based k attaining the minimum.
    pub argmin: usize,
    /// Number of eigenvalues scanned; the constant is only certified up to here.
    pub n: usize,
    pub pass: bool,
}

pub fn check_gap_polynomial(mu: &[f64], d_tilde: f64) -> Result<PolynomialGapReport> {
    check_increasing(mu)?;
    let (argmin, c_best) = mu
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i + 1, (w[1] - w[0]) * ((i + 1) as f64).powf(d_tilde + 1.0)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(PolynomialGapReport {
        d_tilde,
        c_best,
        argmin,
        n: mu.len(),
        pass: c_best > 0.0,
    })
}

/// Least-squares slope of log(μ_{k+1} − μ_k) against log k.
pub fn gap_decay_exponent(mu: &[f64]) -> Result<f64> {
    check_increasing(mu)?;
    let pts: Vec<(f64, f64)> = mu
        .windows(2)
        .enumerate()
        .map(|(i, w)| (((i + 1) as f64).ln(), (w[1] - w[0]).ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Smallest block size M with inf_k (μ_{k+M} − μ_k) > δM over the available range.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub block: usize,
    pub delta: f64,
    /// μ_{k+M} − μ_k − δM for k = 1..N−M.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin: usize,
    pub n: usize,
    pub pass: bool,
}

pub fn check_gap_uniform(mu: &[f64], delta: f64) -> Result<GapReport> {
    check_increasing(mu)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let n = mu.len();
    for block in 1..n {
        let margins: Vec<f64> = (0..n - block)
            .map(|k| mu[k + block] - mu[k] - delta * block as f64)
            .collect();
        let (argmin, min_margin) = margins
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, m)| if m < b.1 { (i + 1, m) } else { b });
        if min_margin > 0.0 {
            return Ok(GapReport {
                block,
                delta,
                margins,
                min_margin,
                argmin,
                n,
                pass: true,
            });
        }
    }
    Err(Error::NoUniformGap { n, delta })
}

/// Partition of 1..N into classes E_m of δ-close consecutive eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPartition {
    /// 1-based indices, each class in increasing order.
    pub classes: Vec<Vec<usize>>,
}

impl ClassPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// n(j): the class holding index j.
    pub fn class_of(&self, j: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&j))
    }
}

/// Greedy chaining: index k+1 joins the class of k while μ_{k+1} − μ_k < δ.
pub fn partition_classes(mu: &[f64], delta: f64, block: usize) -> Result<ClassPartition> {
    check_increasing(mu)?;
    if block == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let mut classes = vec![vec![1]];
    for k in 1..mu.len() {
        if mu[k] - mu[k - 1] < delta {
            classes.last_mut().expect("non-empty").push(k + 1);
        } else {
            classes.push(vec![k + 1]);
        }
    }
    // at most M − 1 consecutive gaps below δ, hence at most M members
    for (i, c) in classes.iter().enumerate() {
        if c.len() > block {
            return Err(Error::ClassTooLarge {
                class: i + 1,
                size: c.len(),
                limit: block,
            });
        }
    }
    Ok(ClassPartition { classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tadpole_mu(n: usize) -> Vec<f64> {
        (1..=n).map(|k| 4.0 * (k * k) as f64 * PI * PI).collect()
    }

    #[test]
    fn tadpole_polynomial_gap() {
        let r = check_gap_polynomial(&tadpole_mu(200), 1.0).unwrap();
        assert_eq!(r.argmin, 1);
        assert!((r.c_best / (12.0 * PI * PI) - 1.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn unit_gap_sequence() {
        let mu: Vec<f64> = (1..=10).map(f64::from).collect();
        let r = check_gap_polynomial(&mu, 1.0).unwrap();
        assert_eq!(r.c_best, 1.0);
        assert_eq!(r.argmin, 1);
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(matches!(
            check_gap_polynomial(&[1.0, 3.0, 2.0], 1.0),
            Err(Error::NotIncreasing(2))
        ));
        assert!(check_gap_uniform(&[1.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn uniform_gap_examples() {
        let r = check_gap_uniform(&tadpole_mu(50), 12.0 * PI * PI - 1.0).unwrap();
        assert_eq!(r.block, 1);
        let sq: Vec<f64> = (1..=30).map(|k| (k * k) as f64).collect();
        assert_eq!(check_gap_uniform(&sq, 2.0).unwrap().block, 1);
        // gaps 0.1 then 3.9: needs M = 2
        let r = check_gap_uniform(&[1.0, 1.1, 5.0, 5.1, 9.0], 1.0).unwrap();
        assert_eq!(r.block, 2);
        assert!(matches!(
            check_gap_uniform(&[1.0, 1.1, 1.2], 10.0),
            Err(Error::NoUniformGap { .. })
        ));
    }

    #[test]
    fn partition_examples() {
        let p = partition_classes(&[1.0, 1.1, 5.0, 5.1, 9.0], 1.0, 3).unwrap();
        assert_eq!(p.classes, vec![vec![1, 2], vec![3, 4], vec![5]]);
        assert_eq!(p.class_of(4), Some(1));
        let t = partition_classes(&tadpole_mu(20), 12.0 * PI * PI - 1.0, 1).unwrap();
        assert!(t.sizes().iter().all(|&s| s == 1));
        assert!(matches!(
            partition_classes(&[1.0, 1.1, 1.2, 1.3, 9.0], 1.0, 3),
            Err(Error::ClassTooLarge { .. })
        ));
    }

    fn sequence() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.05f64..3.0, 2..100).prop_map(|gaps| {
            let mut acc = 0.0;
            gaps.into_iter()
                .map(|g| {
                    acc += g;
                    acc
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn partition_matches_pairwise_rule(mu in sequence(), delta in 0.1f64..2.0) {
            let Ok(gap) = check_gap_uniform(&mu, delta) else { return Ok(()); };
            let p = partition_classes(&mu, delta, gap.block).unwrap();
            let m = gap.block as f64;
            for a in 1..=mu.len() {
                for b in 1..=mu.len() {
                    let same = p.class_of(a) == p.class_of(b);
                    let d = (mu[a - 1] - mu[b - 1]).abs();
                    if same {
                        prop_assert!(a == b || d < delta * (m - 1.0));
                    } else {
                        prop_assert!(d >= delta);
                    }
                }
            }
        }
    }
}
