//! Emission-based Bell pairs: single-click and double-click heralding.

use serde::{Deserialize, Serialize};

use crate::error::{check_prob, Result};
use crate::noise::{amplitude_damping, dephasing, depolarizing_1q, CircuitNoise};
use crate::quantum::{controlled, cr, CMatrix, DensityMatrix, Pauli, Povm};

use super::SchemeResult;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionParams {
    pub f_prep: f64,
    /// Excitation error probability (the parameter tables call it p_DE).
    pub p_ee: f64,
    pub mu: f64,
    pub lambda_dephase: f64,
    pub eta_ph: f64,
    pub alpha_bright: f64,
}

impl EmissionParams {
    pub fn ideal() -> Self {
        EmissionParams { f_prep: 1.0, p_ee: 0.0, mu: 1.0, lambda_dephase: 1.0, eta_ph: 1.0, alpha_bright: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("f_prep", self.f_prep)?;
        check_prob("p_ee", self.p_ee)?;
        check_prob("mu", self.mu)?;
        check_prob("lambda_dephase", self.lambda_dephase)?;
        check_prob("eta_ph", self.eta_ph)?;
        check_prob("alpha_bright", self.alpha_bright)
    }

    /// Combined coherence factor of one heralded round.
    pub fn phi(&self) -> f64 {
        self.mu.sqrt()
            * (2.0 * self.f_prep - 1.0).powi(2)
            * (2.0 * self.lambda_dephase - 1.0)
            * (1.0 - self.p_ee).powi(2)
    }
}

/// Two-photon measurement operators [E00, E01, E10, E11] on (photon A, photon B).
pub fn photon_measurement(mu: f64) -> Result<Povm> {
    check_prob("mu", mu)?;
    let (sp, sm) = ((1.0 + mu.sqrt()).sqrt(), (1.0 - mu.sqrt()).sqrt());
    let diag = (sp + sm) / std::f64::consts::SQRT_2;
    let off = (sp - sm) / std::f64::consts::SQRT_2;
    let single = |sign: f64| {
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = cr(0.5 * diag);
        m[(2, 2)] = cr(0.5 * diag);
        m[(1, 2)] = cr(0.5 * sign * off);
        m[(2, 1)] = cr(0.5 * sign * off);
        m[(3, 3)] = cr(0.5 * (1.0 + mu).sqrt());
        m
    };
    let mut e00 = CMatrix::zeros(4, 4);
    e00[(0, 0)] = cr(1.0);
    let mut e11 = CMatrix::zeros(4, 4);
    e11[(3, 3)] = cr(((1.0 - mu) / 2.0).sqrt());
    Povm::new(vec![e00, single(-1.0), single(1.0), e11])
}

fn prepared_emitter(alpha: f64) -> DensityMatrix {
    DensityMatrix::from_pure(&[cr((1.0 - alpha).sqrt()), cr(alpha.sqrt())]).expect("qubit state")
}

/// One excitation/interference round on two emitters. Returns the unnormalized emitter
/// states heralded by a left (Ψ+-like) and right (Ψ−-like) click.
fn heralded_round(emitters: &DensityMatrix, p: &EmissionParams, with_lambda: bool) -> Result<[DensityMatrix; 2]> {
    let prep = dephasing(1.0 - p.f_prep)?;
    let excite = dephasing(p.p_ee / 2.0)?;
    let mut rho = emitters.clone();
    for q in 0..2 {
        rho = rho.apply_channel(&prep, &[q])?.apply_channel(&excite, &[q])?;
    }
    // |1> → |1>|1_ph>, |0> → |0>|0_ph>
    let mut rho = rho.kron(&DensityMatrix::basis(2, 0))?;
    let cnot = controlled(Pauli::X);
    rho = rho.apply_operator(&cnot, &[0, 2])?.apply_operator(&cnot, &[1, 3])?;
    if with_lambda {
        rho = rho.apply_channel(&dephasing(1.0 - p.lambda_dephase)?, &[2])?;
    }
    let loss = amplitude_damping(p.eta_ph)?;
    rho = rho.apply_channel(&loss, &[2])?.apply_channel(&loss, &[3])?;
    let povm = photon_measurement(p.mu)?;
    let left = rho.apply_povm_element(&povm.elements()[2], &[2, 3])?.0.partial_trace(&[0, 1])?;
    let right = rho.apply_povm_element(&povm.elements()[1], &[2, 3])?.0.partial_trace(&[0, 1])?;
    Ok([left, right])
}

/// Maps Ψ± onto Φ+ with noisy single-qubit corrections.
fn correct(rho: &DensityMatrix, minus: bool, noise: &CircuitNoise) -> Result<DensityMatrix> {
    let depol = depolarizing_1q(noise.p_g)?;
    let mut out = rho.apply_operator(&Pauli::X.matrix(), &[0])?.apply_channel(&depol, &[0])?;
    if minus {
        out = out.apply_operator(&Pauli::Z.matrix(), &[1])?.apply_channel(&depol, &[1])?;
    }
    Ok(out)
}

fn finish(sum: DensityMatrix) -> Result<SchemeResult> {
    let p_succ = sum.trace();
    let state = if p_succ > 0.0 { sum.normalized()? } else { DensityMatrix::maximally_mixed(2) };
    Ok(SchemeResult { state, p_succ, duration: 1.0 })
}

pub fn single_click(params: &EmissionParams, noise: &CircuitNoise) -> Result<SchemeResult> {
    params.validate()?;
    let init = prepared_emitter(params.alpha_bright);
    let [left, right] = heralded_round(&init.kron(&init)?, params, true)?;
    let mut sum = correct(&left, false, noise)?;
    sum.add_assign(&correct(&right, true, noise)?);
    finish(sum)
}

pub fn double_click(params: &EmissionParams, noise: &CircuitNoise) -> Result<SchemeResult> {
    let params = EmissionParams { alpha_bright: 0.5, ..*params };
    params.validate()?;
    let init = prepared_emitter(0.5);
    let first = heralded_round(&init.kron(&init)?, &params, false)?;
    let depol = depolarizing_1q(noise.p_g)?;
    let mut sum = DensityMatrix::zero(2);
    for (a, rho) in first.iter().enumerate() {
        let mut flipped = rho.clone();
        for q in 0..2 {
            flipped = flipped.apply_operator(&Pauli::X.matrix(), &[q])?.apply_channel(&depol, &[q])?;
        }
        let second = heralded_round(&flipped, &params, false)?;
        for (b, out) in second.iter().enumerate() {
            sum.add_assign(&correct(out, a != b, noise)?);
        }
    }
    finish(sum)
}

/// Closed-form single-click success probability.
pub fn single_click_p_succ(p: &EmissionParams) -> f64 {
    let ae = p.alpha_bright * p.eta_ph;
    0.5 * ae * (4.0 - ae * (3.0 - p.mu))
}

/// Closed-form double-click success probability with noisy inter-round flips.
pub fn double_click_p_succ(p: &EmissionParams, p_g: f64) -> f64 {
    let (eta, mu) = (p.eta_ph, p.mu);
    eta * eta / 36.0 * (18.0 + 12.0 * p_g * (2.0 + eta * (mu - 3.0)) + p_g * p_g * eta * eta * (mu - 3.0).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ghz_fidelity;

    fn sample() -> EmissionParams {
        EmissionParams { f_prep: 0.99, p_ee: 0.04, mu: 0.9, lambda_dephase: 0.984, eta_ph: 0.4, alpha_bright: 0.1 }
    }

    #[test]
    fn measurement_is_complete() {
        for mu in [0.0, 0.3, 1.0] {
            photon_measurement(mu).unwrap();
        }
    }

    #[test]
    fn e01_on_single_photon_gives_half() {
        let e01 = &photon_measurement(1.0).unwrap().elements()[1].clone();
        let (_, p) = DensityMatrix::basis(2, 1).apply_povm_element(e01, &[0, 1]).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_click_probability_matches_closed_form() {
        for (alpha, eta, mu) in [(0.1, 0.4, 0.9), (0.5, 1.0, 1.0), (0.03, 0.01, 0.7), (1.0, 1.0, 1.0)] {
            let p = EmissionParams { alpha_bright: alpha, eta_ph: eta, mu, ..sample() };
            let r = single_click(&p, &CircuitNoise::uniform(0.01).unwrap()).unwrap();
            assert!((r.p_succ - single_click_p_succ(&p)).abs() < 1e-12, "{alpha} {eta} {mu}");
        }
        let one = EmissionParams { alpha_bright: 1.0, eta_ph: 1.0, mu: 1.0, ..sample() };
        assert!((single_click_p_succ(&one) - 1.0).abs() < 1e-15);
        let dark = EmissionParams { alpha_bright: 0.0, ..sample() };
        assert_eq!(single_click(&dark, &CircuitNoise::noiseless()).unwrap().p_succ, 0.0);
    }

    #[test]
    fn single_click_fidelity_without_gate_noise() {
        // branch-resolved closed form at p_g = 0: F = αη(1−α)(1+φ)/P
        let p = sample();
        let r = single_click(&p, &CircuitNoise::noiseless()).unwrap();
        let want = p.alpha_bright * p.eta_ph * (1.0 - p.alpha_bright) * (1.0 + p.phi()) / single_click_p_succ(&p);
        assert!((ghz_fidelity(&r.state) - want).abs() < 1e-12);
    }

    #[test]
    fn double_click_probability_with_gate_noise() {
        for p_g in [0.0, 0.01, 0.1] {
            let r = double_click(&sample(), &CircuitNoise::new(p_g, 0.0).unwrap()).unwrap();
            assert!((r.p_succ - double_click_p_succ(&sample(), p_g)).abs() < 1e-12);
        }
    }

    #[test]
    fn ideal_double_click_is_perfect() {
        let r = double_click(&EmissionParams::ideal(), &CircuitNoise::noiseless()).unwrap();
        assert!((ghz_fidelity(&r.state) - 1.0).abs() < 1e-12);
        assert!((r.p_succ - 0.5).abs() < 1e-12);
    }
}
