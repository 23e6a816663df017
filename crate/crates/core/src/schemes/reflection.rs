//! Reflection-based GHZ generation: one time-bin photon reflects off each spin cavity in turn.

use serde::{Deserialize, Serialize};

use crate::error::{check_prob, Error, Result};
use crate::noise::{depolarizing_1q, CircuitNoise};
use crate::quantum::{c, cr, hadamard, CMatrix, DensityMatrix, Pauli, C64, KET_MINUS, KET_PLUS};

use super::{jitter_grid, SchemeResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionParams {
    pub c1: f64,
    pub kappa_c: f64,
    pub kappa_l: f64,
    pub gamma: f64,
    /// Ground-state splitting in units of γ.
    pub delta_big: f64,
    /// Calibration jitter std in units of γ.
    pub sigma: f64,
    pub eta_c: f64,
    pub p_dk: f64,
    /// Cavity detuning, same rate unit as κ and γ.
    pub omega: f64,
    /// Spin detuning in units of γ.
    pub delta1: f64,
}

impl ReflectionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa_c", self.kappa_c), ("gamma", self.gamma)] {
            if !(v > 0.0) {
                return Err(Error::Parameter { name, reason: format!("{v} must be positive") });
            }
        }
        for (name, v) in [("c1", self.c1), ("kappa_l", self.kappa_l), ("sigma", self.sigma)] {
            if !(v >= 0.0) {
                return Err(Error::Parameter { name, reason: format!("{v} must be non-negative") });
            }
        }
        check_prob("eta_c", self.eta_c)?;
        check_prob("p_dk", self.p_dk)
    }
}

/// Cavity reflection for a spin at detuning `delta` (units of γ) and cavity detuning `omega`.
pub fn reflection_coefficient(params: &ReflectionParams, delta: f64, omega: f64) -> C64 {
    let kappa = params.kappa_c + params.kappa_l;
    let denom = c(1.0, 2.0 * omega / kappa) + cr(4.0 * params.c1) / c(1.0, 2.0 * delta);
    cr(1.0) - cr(2.0 * params.kappa_c / kappa) / denom
}

/// Unnormalized spin state after all reflections and the photon X measurement, for fixed
/// reflection coefficients `[r0, r1]`.
pub fn reflection_kernel(r: [C64; 2], n: usize, noise: &CircuitNoise) -> Result<DensityMatrix> {
    let depol = depolarizing_1q(noise.p_g)?;
    let h = hadamard();
    let early = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r[0], r[1], cr(1.0), cr(1.0)]));
    let late = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(1.0), cr(1.0), r[0], r[1]]));
    // photon (early=|0>, late=|1>) is qubit 0
    let mut rho = DensityMatrix::from_pure(&KET_PLUS)?.kron(&DensityMatrix::basis(n, 0))?;
    for j in 1..=n {
        rho = rho.apply_operator(&early, &[0, j])?;
        rho = rho.apply_operator(&h, &[j])?.apply_channel(&depol, &[j])?;
        rho = rho.apply_operator(&late, &[0, j])?;
        rho = rho.apply_operator(&h, &[j])?.apply_channel(&depol, &[j])?;
    }
    let mut sum = rho.project_out(0, KET_PLUS)?;
    let minus = rho
        .project_out(0, KET_MINUS)?
        .apply_operator(&Pauli::Z.matrix(), &[0])?
        .apply_channel(&depol, &[0])?;
    sum.add_assign(&minus);
    Ok(sum)
}

pub fn reflection_ghz(params: &ReflectionParams, n: usize, noise: &CircuitNoise) -> Result<SchemeResult> {
    params.validate()?;
    if !(2..=4).contains(&n) {
        return Err(Error::Parameter { name: "n", reason: format!("{n} spins not supported (2..=4)") });
    }
    let kernel = |d1: f64, om: f64| {
        let r = [reflection_coefficient(params, d1 + params.delta_big, om), reflection_coefficient(params, d1, om)];
        reflection_kernel(r, n, noise)
    };
    let nodes = jitter_grid(params.delta1, params.sigma, params.omega, params.sigma * params.gamma);
    let sum = if let [(d1, om, _)] = nodes[..] {
        kernel(d1, om)?
    } else {
        let mut sum = DensityMatrix::zero(n);
        for (d1, om, w) in nodes {
            sum.add_scaled(&kernel(d1, om)?, w);
        }
        sum
    };
    let p_succ = (sum.trace() * params.eta_c.powi(n as i32)).clamp(0.0, 1.0);
    if p_succ == 0.0 {
        return Ok(SchemeResult { state: DensityMatrix::maximally_mixed(n), p_succ, duration: 1.0 });
    }
    let mut state = sum.normalized()?;
    if params.p_dk > 0.0 {
        state = state.scaled(p_succ);
        state.add_scaled(&DensityMatrix::basis(n, 0), params.p_dk * (1.0 - p_succ));
        state = state.normalized()?;
    }
    Ok(SchemeResult { state, p_succ, duration: 1.0 })
}
