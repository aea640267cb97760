//! Real control signals with exact norms and moments.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `p cos(ωt) + q sin(ωt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub omega: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalForm {
    /// Value `values[i]` on [breakpoints[i], breakpoints[i+1]).
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
    TrigSum { offset: f64, terms: Vec<TrigTerm> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pub form: SignalForm,
    pub horizon: f64,
}

/// Exact BV, L∞ and T·L∞ norms over [0, T].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub bv: f64,
    pub l_inf: f64,
    pub t_l_inf: f64,
}

/// Time interval on which a propagator may hold the control at `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub t0: f64,
    pub dt: f64,
    pub value: f64,
}

impl ControlSignal {
    pub fn zero(horizon: f64) -> Self {
        Self::constant(0.0, horizon)
    }

    pub fn constant(c: f64, horizon: f64) -> Self {
        Self {
            form: SignalForm::PiecewiseConstant {
                breakpoints: vec![0.0, horizon],
                values: vec![c],
            },
            horizon,
        }
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::Signal(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Signal("breakpoints must start at 0 and increase".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Signal("non-finite value".into()));
        }
        let horizon = *breakpoints.last().expect("non-empty");
        Ok(Self {
            form: SignalForm::PiecewiseConstant { breakpoints, values },
            horizon,
        })
    }

    /// Equal pieces of width T/len on [0, T].
    pub fn uniform_piecewise(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::Signal("horizon must be positive".into()));
        }
        let n = values.len();
        let breakpoints = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
        Self::piecewise(breakpoints, values)
    }

    pub fn trig(offset: f64, terms: Vec<TrigTerm>, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) {
            return Err(Error::Signal("horizon must be non-negative".into()));
        }
        if terms.iter().any(|t| !(t.omega >= 0.0) || !t.p.is_finite() || !t.q.is_finite()) {
            return Err(Error::Signal("trigonometric terms need ω >= 0 and finite weights".into()));
        }
        Ok(Self {
            form: SignalForm::TrigSum { offset, terms },
            horizon,
        })
    }

    /// `amplitude · cos(ωt + phase)`.
    pub fn cosine(amplitude: f64, omega: f64, phase: f64, horizon: f64) -> Result<Self> {
        Self::trig(
            0.0,
            vec![TrigTerm {
                omega,
                p: amplitude * phase.cos(),
                q: -amplitude * phase.sin(),
            }],
            horizon,
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.form {
            SignalForm::PiecewiseConstant { breakpoints, values } => {
                let i = breakpoints.partition_point(|&b| b <= t);
                values[i.clamp(1, values.len()) - 1]
            }
            SignalForm::TrigSum { offset, terms } => {
                offset
                    + terms
                        .iter()
                        .map(|tt| tt.p * (tt.omega * t).cos() + tt.q * (tt.omega * t).sin())
                        .sum::<f64>()
            }
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        match &self.form {
            SignalForm::PiecewiseConstant { .. } => 0.0,
            SignalForm::TrigSum { terms, .. } => terms
                .iter()
                .map(|tt| tt.omega * (tt.q * (tt.omega * t).cos() - tt.p * (tt.omega * t).sin()))
                .sum(),
        }
    }

    /// Largest angular frequency present; zero for piecewise-constant signals.
    pub fn max_frequency(&self) -> f64 {
        match &self.form {
            SignalForm::PiecewiseConstant { .. } => 0.0,
            SignalForm::TrigSum { terms, .. } => terms
                .iter()
                .filter(|t| t.p != 0.0 || t.q != 0.0)
                .map(|t| t.omega)
                .fold(0.0, f64::max),
        }
    }

    /// Points containing every local extremum of u on [0, T].
    fn extremal_points(&self) -> Vec<f64> {
        let t_end = self.horizon;
        match &self.form {
            SignalForm::PiecewiseConstant { breakpoints, .. } => breakpoints.clone(),
            SignalForm::TrigSum { .. } => {
                let w = self.max_frequency();
                if w == 0.0 || t_end == 0.0 {
                    return vec![0.0, t_end];
                }
                let n = ((t_end * w / (2.0 * PI)) * 16.0).ceil().max(16.0) as usize;
                let grid: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
                let mut pts = Vec::with_capacity(grid.len() * 3 / 2);
                for w2 in grid.windows(2) {
                    pts.push(w2[0]);
                    let (da, db) = (self.deriv(w2[0]), self.deriv(w2[1]));
                    if da * db < 0.0 {
                        let (mut lo, mut hi) = (w2[0], w2[1]);
                        for _ in 0..64 {
                            let mid = 0.5 * (lo + hi);
                            if self.deriv(mid) * da > 0.0 {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                            if hi - lo <= f64::EPSILON * hi.abs() {
                                break;
                            }
                        }
                        pts.push(0.5 * (lo + hi));
                    }
                }
                pts.push(t_end);
                pts
            }
        }
    }

    /// sup |u| on [0, T].
    pub fn l_inf(&self) -> f64 {
        match &self.form {
            SignalForm::PiecewiseConstant { values, .. } => {
                values.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
            SignalForm::TrigSum { .. } => self
                .extremal_points()
                .into_iter()
                .map(|t| self.eval(t).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Total variation on [0, T].
    pub fn bv(&self) -> f64 {
        match &self.form {
            SignalForm::PiecewiseConstant { values, .. } => {
                values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
            }
            SignalForm::TrigSum { .. } => {
                let pts = self.extremal_points();
                pts.windows(2)
                    .map(|w| (self.eval(w[1]) - self.eval(w[0])).abs())
                    .sum()
            }
        }
    }

    pub fn budget(&self) -> Budget {
        let l_inf = self.l_inf();
        Budget {
            bv: self.bv(),
            l_inf,
            t_l_inf: self.horizon * l_inf,
        }
    }

    /// ‖u‖_{L²(0,T)}.
    pub fn l2_norm(&self) -> f64 {
        match &self.form {
            SignalForm::PiecewiseConstant { breakpoints, values } => breakpoints
                .windows(2)
                .zip(values)
                .map(|(w, v)| (w[1] - w[0]) * v * v)
                .sum::<f64>()
                .sqrt(),
            SignalForm::TrigSum { .. } => {
                let w = self.max_frequency().max(1.0 / self.horizon.max(f64::MIN_POSITIVE));
                let n = (self.horizon * w / PI).ceil() as usize;
                let rule = crate::quadrature::GaussLegendre::cached(32);
                let mut acc = crate::quadrature::NeumaierSum::default();
                let h = self.horizon / n.max(1) as f64;
                for i in 0..n.max(1) {
                    let a = i as f64 * h;
                    acc.add(rule.integrate(a, a + h, |t| self.eval(t).powi(2)));
                }
                acc.total().sqrt()
            }
        }
    }

    /// −i∫₀ᵀ u(τ) e^{iωτ} dτ in closed form.
    pub fn moment(&self, omega: f64) -> Complex64 {
        let i = Complex64::i();
        match &self.form {
            SignalForm::PiecewiseConstant { breakpoints, values } => {
                let mut re = crate::quadrature::NeumaierSum::default();
                let mut im = crate::quadrature::NeumaierSum::default();
                for (w, &v) in breakpoints.windows(2).zip(values) {
                    let z = v * piece_kernel(omega, w[0], w[1]);
                    re.add(z.re);
                    im.add(z.im);
                }
                Complex64::new(re.total(), im.total())
            }
            SignalForm::TrigSum { offset, terms } => {
                let t = self.horizon;
                // ∫₀ᵀ e^{iντ} dτ
                let e = |nu: f64| -> Complex64 {
                    if nu == 0.0 {
                        Complex64::new(t, 0.0)
                    } else {
                        ((i * nu * t).exp() - 1.0) / (i * nu)
                    }
                };
                let mut acc = *offset * e(omega);
                for tt in terms {
                    // cos = (e⁺ + e⁻)/2, sin = (e⁺ − e⁻)/(2i)
                    let plus = e(omega + tt.omega);
                    let minus = e(omega - tt.omega);
                    acc += tt.p * 0.5 * (plus + minus) + tt.q * (plus - minus) / (2.0 * i);
                }
                -i * acc
            }
        }
    }

    /// Equal-width steps of at most `dt_max`, each carrying the midpoint value.
    ///
    /// Piecewise-constant signals are stepped piece by piece with their exact
    /// values; oscillating signals require `dt_max` ≤ (shortest period)/20.
    pub fn steps(&self, dt_max: f64) -> Result<Vec<Step>> {
        if !(dt_max > 0.0) {
            return Err(Error::InvalidArgument("dt_max must be positive".into()));
        }
        let mut out = Vec::new();
        match &self.form {
            SignalForm::PiecewiseConstant { breakpoints, values } => {
                for (w, &v) in breakpoints.windows(2).zip(values) {
                    let n = ((w[1] - w[0]) / dt_max).ceil().max(1.0) as usize;
                    let dt = (w[1] - w[0]) / n as f64;
                    out.extend((0..n).map(|s| Step {
                        t0: w[0] + s as f64 * dt,
                        dt,
                        value: v,
                    }));
                }
            }
            SignalForm::TrigSum { .. } => {
                let w = self.max_frequency();
                if w > 0.0 {
                    let limit = 2.0 * PI / w / 20.0;
                    if dt_max > limit * (1.0 + 1e-12) {
                        return Err(Error::StepTooCoarse { dt: dt_max, omega: w, limit });
                    }
                }
                if self.horizon > 0.0 {
                    let n = (self.horizon / dt_max).ceil().max(1.0) as usize;
                    let dt = self.horizon / n as f64;
                    out.extend((0..n).map(|s| {
                        let t0 = s as f64 * dt;
                        Step {
                            t0,
                            dt,
                            value: self.eval(t0 + 0.5 * dt),
                        }
                    }));
                }
            }
        }
        Ok(out)
    }

    /// One-line symbolic description that reconstructs the signal exactly.
    pub fn describe(&self) -> String {
        match &self.form {
            SignalForm::PiecewiseConstant { breakpoints, values } => {
                let join = |v: &[f64]| {
                    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
                };
                format!(
                    "form=piecewise-constant T={:e} breakpoints=[{}] values=[{}]",
                    self.horizon,
                    join(breakpoints),
                    join(values)
                )
            }
            SignalForm::TrigSum { offset, terms } => {
                let t: Vec<String> = terms
                    .iter()
                    .map(|t| format!("({:e},{:e},{:e})", t.omega, t.p, t.q))
                    .collect();
                format!(
                    "form=trig-sum T={:e} offset={offset:e} terms(omega,p,q)=[{}]",
                    self.horizon,
                    t.join(" ")
                )
            }
        }
    }

    /// `# <description>` header followed by `t,u` at `samples` + 1 uniform times.
    pub fn to_csv(&self, samples: usize) -> String {
        let samples = samples.max(1);
        let mut s = format!("# {}\nt,u\n", self.describe());
        for i in 0..=samples {
            let t = self.horizon * i as f64 / samples as f64;
            let _ = writeln!(s, "{t:.12e},{:.12e}", self.eval(t));
        }
        s
    }
}

/// −i∫_a^b e^{iωτ} dτ.
pub fn piece_kernel(omega: f64, a: f64, b: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(0.0, -(b - a));
    }
    let i = Complex64::i();
    -((i * omega * b).exp() - (i * omega * a).exp()) / omega
}

/// BV, L∞ and T·L∞ of `u`.
pub fn budget_report(u: &ControlSignal) -> Budget {
    u.budget()
}
