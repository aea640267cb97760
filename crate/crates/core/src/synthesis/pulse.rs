//! Resonant pulses realizing a planar rotation to first order in the amplitude.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::rotation::RotationFactor;
use super::signal::{Budget, ControlSignal};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ResonantPulse {
    pub signal: ControlSignal,
    /// The rotation exp(α E^θ_{jk}) the pulse approximates in the interaction frame.
    pub factor: RotationFactor,
    pub amplitude: f64,
    pub omega: f64,
    /// Phase χ in u(t) = 2A cos(ωt + χ).
    pub phase: f64,
    pub budget: Budget,
}

/// u(t) = 2A cos(ω t + χ) on [0, α/(A|B_jk|)] with ω = |μ_j − μ_k|.
///
/// Keeping only the resonant part of the drive, the interaction-frame
/// dynamics on span{φ_j, φ_k} is exp(α E^θ_{jk}); χ absorbs arg B_jk and the
/// sign of μ_k − μ_j.
#[allow(clippy::too_many_arguments)]
pub fn resonant_pulse(
    j: usize,
    k: usize,
    theta: f64,
    alpha: f64,
    amplitude: f64,
    b_jk: Complex64,
    mu_j: f64,
    mu_k: f64,
) -> Result<ResonantPulse> {
    let omega = (mu_j - mu_k).abs();
    if omega == 0.0 {
        return Err(Error::InvalidArgument(format!("levels {j} and {k} are degenerate")));
    }
    if b_jk.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!("B[{j},{k}] vanishes")));
    }
    if !(amplitude > 0.0) || !(alpha >= 0.0) {
        return Err(Error::InvalidArgument("need A > 0 and α >= 0".into()));
    }
    let phase = if mu_j < mu_k {
        theta + FRAC_PI_2 - b_jk.arg()
    } else {
        b_jk.arg() - theta - FRAC_PI_2
    };
    let horizon = alpha / (amplitude * b_jk.norm());
    let signal = ControlSignal::cosine(2.0 * amplitude, omega, phase, horizon)?;
    let budget = if alpha == 0.0 {
        Budget { bv: 0.0, l_inf: 0.0, t_l_inf: 0.0 }
    } else {
        signal.budget()
    };
    Ok(ResonantPulse {
        signal,
        factor: RotationFactor { j, k, theta, alpha },
        amplitude,
        omega,
        phase,
        budget,
    })
}
