//! Gauss–Legendre quadrature with compensated accumulation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes an `n`-point rule by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    dp = legendre(n, z).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, cached rule of order `n`.
    pub fn cached(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(Self::new(n));
        cache
            .lock()
            .expect("quadrature cache poisoned")
            .entry(n)
            .or_insert(rule)
            .clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// ∫_a^b f(x) dx with Neumaier-compensated summation.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = NeumaierSum::default();
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * t));
        }
        half * acc.total()
    }
}

/// (P_n(z), P_n'(z)).
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `c cos(wx) + s sin(wx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub c: f64,
    pub s: f64,
    pub w: f64,
}

impl Wave {
    pub fn constant(v: f64) -> Self {
        Self { c: v, s: 0.0, w: 0.0 }
    }

    /// The two waves at frequencies w₁ + w₂ and w₁ − w₂ whose sum is the product.
    pub fn product(self, other: Wave) -> [Wave; 2] {
        let (a1, b1, a2, b2) = (self.c, self.s, other.c, other.s);
        [
            Wave {
                c: 0.5 * (a1 * a2 - b1 * b2),
                s: 0.5 * (a1 * b2 + b1 * a2),
                w: self.w + other.w,
            },
            Wave {
                c: 0.5 * (a1 * a2 + b1 * b2),
                s: 0.5 * (b1 * a2 - a1 * b2),
                w: self.w - other.w,
            },
        ]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (sn, cs) = (self.w * x).sin_cos();
        self.c * cs + self.s * sn
    }
}

/// ∫_0^len p(x)·wave(x) dx for p given by monomial coefficients.
///
/// Repeated integration by parts in closed form once the wave completes a few
/// oscillations, so the result keeps its relative accuracy when the integrand
/// cancels heavily; Gauss–Legendre below that.
pub fn integrate_poly_wave(poly: &[f64], wave: Wave, len: f64) -> f64 {
    let deg = poly.len().saturating_sub(1);
    // normalize to w ≥ 0
    let (w, c, s) = if wave.w < 0.0 {
        (-wave.w, wave.c, -wave.s)
    } else {
        (wave.w, wave.c, wave.s)
    };
    if w * len < 4.0 * (deg as f64 + 1.0) {
        let n = 32.max((w * len / PI).ceil() as usize * 4) + deg;
        let wave = Wave { c, s, w };
        return GaussLegendre::cached(n).integrate(0.0, len, |x| {
            poly.iter().rev().fold(0.0, |acc, &k| acc * x + k) * wave.eval(x)
        });
    }
    // m-th antiderivative of cos(wx) is cos(wx − mπ/2)/w^m, likewise for sin
    let antiderivative = |x: f64| -> f64 {
        let (sn, cs) = (w * x).sin_cos();
        let mut d = poly.to_vec();
        let mut acc = NeumaierSum::default();
        let mut scale = 1.0 / w;
        for m in 1..=deg + 1 {
            let pv = d.iter().rev().fold(0.0, |a, &k| a * x + k);
            // cos(θ − mπ/2), sin(θ − mπ/2)
            let (cm, sm) = match m % 4 {
                1 => (sn, -cs),
                2 => (-cs, -sn),
                3 => (-sn, cs),
                _ => (cs, sn),
            };
            let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(sign * pv * scale * (c * cm + s * sm));
            scale /= w;
            d = d.iter().enumerate().skip(1).map(|(i, &k)| i as f64 * k).collect();
        }
        acc.total()
    };
    antiderivative(len) - antiderivative(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is the exactness limit of an 8-point rule
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral() {
        let rule = GaussLegendre::cached(400);
        let v = rule.integrate(0.0, 1.0, |x| (100.0 * PI * x).sin().powi(2));
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn poly_wave_matches_quadrature() {
        let poly = [0.3, -1.2, 0.7, 0.25];
        for (c, s, w) in [(1.0, 0.0, 0.0), (0.4, -0.9, 3.0), (-0.2, 1.1, 57.0), (0.5, 0.5, -40.0)] {
            let wave = Wave { c, s, w };
            let exact = integrate_poly_wave(&poly, wave, 1.7);
            let rule = GaussLegendre::cached(200);
            let v = rule.integrate(0.0, 1.7, |x| {
                poly.iter().rev().fold(0.0, |a, &k| a * x + k) * wave.eval(x)
            });
            assert!((exact - v).abs() < 1e-13, "{w}: {exact} vs {v}");
        }
    }

    #[test]
    fn wave_product_identity() {
        let a = Wave { c: 0.3, s: -0.8, w: 2.5 };
        let b = Wave { c: 1.1, s: 0.4, w: 0.7 };
        let [p, q] = a.product(b);
        for x in [0.0, 0.3, 1.9] {
            assert!((a.eval(x) * b.eval(x) - p.eval(x) - q.eval(x)).abs() < 1e-15);
        }
    }
}
