//! Carving-based GHZ generation. Light scatters off two spin routes ("up" and "down"),
//! recombines on a beam splitter, and detector clicks carve out the GHZ subspace.

use serde::{Deserialize, Serialize};

use crate::error::{check_prob, Error, Result};
use crate::noise::{depolarizing_1q, CircuitNoise};
use crate::quantum::{c, cr, DensityMatrix, Pauli, C64};

use super::{jitter_grid, SchemeResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CarvingMode {
    Cavity,
    Waveguide,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarvingParams {
    pub mode: CarvingMode,
    pub c2: f64,
    pub p_purcell: f64,
    pub kappa_c: f64,
    pub kappa_l: f64,
    pub gamma: f64,
    pub delta_big: f64,
    pub sigma: f64,
    pub omega: f64,
    pub delta1: f64,
    pub eta_f: f64,
    pub eta_det: f64,
    pub n_sc: usize,
    pub alpha_coherent: f64,
}

impl CarvingParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter { name, reason: format!("{v} must be positive") })
            }
        };
        positive("gamma", self.gamma)?;
        match self.mode {
            CarvingMode::Cavity => {
                positive("kappa_c", self.kappa_c)?;
                if !(self.c2 >= 0.0 && self.kappa_l >= 0.0) {
                    return Err(Error::Parameter { name: "c2", reason: "cavity needs c2, kappa_l ≥ 0".into() });
                }
            }
            CarvingMode::Waveguide => {
                if !(self.p_purcell >= 0.0) {
                    return Err(Error::Parameter { name: "p_purcell", reason: format!("{}", self.p_purcell) });
                }
            }
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Parameter { name: "sigma", reason: format!("{} must be non-negative", self.sigma) });
        }
        check_prob("eta_f", self.eta_f)?;
        check_prob("eta_det", self.eta_det)
    }

    fn efficiency(&self) -> f64 {
        self.eta_f * self.eta_det
    }
}

/// Scattering amplitudes for spin states 0 (detuned by Δ) and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CarvingCoefficients {
    pub t: [C64; 2],
    pub r: [C64; 2],
    /// Amplitudes into unobserved loss modes.
    pub loss: Vec<[C64; 2]>,
}

impl CarvingCoefficients {
    /// Transmission-only coefficients with everything else discarded.
    pub fn transmission_only(t: [C64; 2]) -> Self {
        CarvingCoefficients { t, r: [cr(0.0); 2], loss: vec![] }
    }
}

struct Amplitudes {
    t: C64,
    r: C64,
    loss: Vec<C64>,
}

fn amplitudes(params: &CarvingParams, delta: f64, omega: f64) -> Amplitudes {
    let spin = c(1.0, 2.0 * delta);
    match params.mode {
        CarvingMode::Cavity => {
            let kappa = 2.0 * params.kappa_c + params.kappa_l;
            let t = cr(2.0 * params.kappa_c / kappa) / (c(1.0, 2.0 * omega / kappa) + cr(4.0 * params.c2) / spin);
            let cavity_loss = t * (params.kappa_l / params.kappa_c).sqrt();
            let spin_loss = t * cr(2.0 * (params.c2 * kappa / params.kappa_c).sqrt()) / spin;
            Amplitudes { t, r: cr(1.0) - t, loss: vec![cavity_loss, spin_loss] }
        }
        CarvingMode::Waveguide => {
            let p = params.p_purcell;
            let denom = c(1.0 + p, 2.0 * delta);
            let t = spin / denom;
            Amplitudes { t, r: t - cr(1.0), loss: vec![cr((2.0 * p).sqrt()) / denom] }
        }
    }
}

/// Transmission for a spin at detuning `delta` (units of γ) at the configured cavity detuning.
pub fn carving_transmission(params: &CarvingParams, delta: f64) -> Result<C64> {
    params.validate()?;
    Ok(amplitudes(params, delta, params.omega).t)
}

pub fn carving_coefficients(params: &CarvingParams, delta1: f64, omega: f64) -> CarvingCoefficients {
    let a0 = amplitudes(params, delta1 + params.delta_big, omega);
    let a1 = amplitudes(params, delta1, omega);
    let loss = a0.loss.iter().zip(&a1.loss).map(|(&x, &y)| [x, y]).collect();
    CarvingCoefficients { t: [a0.t, a1.t], r: [a0.r, a1.r], loss }
}

/// Cavity detuning that makes the detuned-spin transmission real at δ1 = 0.
pub fn omega_star(params: &CarvingParams) -> f64 {
    let d = params.delta_big;
    4.0 * params.c2 * d * (2.0 * params.kappa_c + params.kappa_l) / (1.0 + 4.0 * d * d)
}

fn check_split(n_u: usize, n_d: usize, n_sc: usize) -> Result<()> {
    if n_u == 0 || n_d == 0 || !(2..=4).contains(&(n_u + n_d)) {
        return Err(Error::Parameter { name: "n_u/n_d", reason: format!("split {n_u}+{n_d} not supported") });
    }
    if n_sc < 2 {
        return Err(Error::Parameter { name: "n_sc", reason: format!("{n_sc} < 2") });
    }
    Ok(())
}

fn bit(k: usize, j: usize, n: usize) -> usize {
    (k >> (n - 1 - j)) & 1
}

fn flip_all(rho: &DensityMatrix, noise: &CircuitNoise) -> Result<DensityMatrix> {
    let depol = depolarizing_1q(noise.p_g)?;
    let mut out = rho.clone();
    for q in 0..rho.n_qubits() {
        out = out.apply_operator(&Pauli::X.matrix(), &[q])?.apply_channel(&depol, &[q])?;
    }
    Ok(out)
}

/// ρ ↦ C ⊙ ρ.
fn hadamard_product(rho: &DensityMatrix, coef: &[C64], dim: usize) -> DensityMatrix {
    let mut out = rho.clone();
    let m = out.matrix_mut();
    for col in 0..dim {
        for row in 0..dim {
            m[(row, col)] *= coef[row * dim + col];
        }
    }
    out
}

/// Runs the rounds with outcome-dependent element-wise updates `[C+, C−]`, tracking the
/// parity of minus outcomes, then applies the corrections.
fn carve(coef: &[Vec<C64>; 2], n_u: usize, n: usize, n_sc: usize, noise: &CircuitNoise) -> Result<DensityMatrix> {
    let dim = 1usize << n;
    let plus: Vec<C64> = (0..dim).map(|_| cr((dim as f64).recip().sqrt())).collect();
    let mut even = DensityMatrix::from_pure(&plus)?;
    let mut odd = DensityMatrix::zero(n);
    for round in 0..n_sc {
        if round > 0 {
            even = flip_all(&even, noise)?;
            odd = flip_all(&odd, noise)?;
        }
        let mut next_even = hadamard_product(&even, &coef[0], dim);
        next_even.add_assign(&hadamard_product(&odd, &coef[1], dim));
        let mut next_odd = hadamard_product(&odd, &coef[0], dim);
        next_odd.add_assign(&hadamard_product(&even, &coef[1], dim));
        (even, odd) = (next_even, next_odd);
    }
    let depol = depolarizing_1q(noise.p_g)?;
    for q in 0..n_u {
        even = even.apply_operator(&Pauli::X.matrix(), &[q])?.apply_channel(&depol, &[q])?;
        odd = odd.apply_operator(&Pauli::X.matrix(), &[q])?.apply_channel(&depol, &[q])?;
    }
    odd = odd.apply_operator(&Pauli::Z.matrix(), &[0])?.apply_channel(&depol, &[0])?;
    even.add_assign(&odd);
    Ok(even)
}

/// Single-photon carving for fixed coefficients; trace is the success probability before
/// detection efficiencies.
pub fn sps_kernel(co: &CarvingCoefficients, n_u: usize, n_d: usize, n_sc: usize, noise: &CircuitNoise) -> Result<DensityMatrix> {
    check_split(n_u, n_d, n_sc)?;
    let n = n_u + n_d;
    let dim = 1usize << n;
    let diag: Vec<[C64; 2]> = (0..dim)
        .map(|k| {
            let tu: C64 = (0..n_u).map(|j| co.t[bit(k, j, n)]).product();
            let td: C64 = (n_u..n).map(|j| co.t[bit(k, j, n)]).product();
            [(tu + td) * 0.5, (tu - td) * 0.5]
        })
        .collect();
    let outer = |s: usize| -> Vec<C64> {
        (0..dim * dim).map(|i| diag[i / dim][s] * diag[i % dim][s].conj()).collect()
    };
    carve(&[outer(0), outer(1)], n_u, n, n_sc, noise)
}

/// ⟨γ|β⟩ for coherent states.
fn overlap(beta: C64, gamma: C64) -> C64 {
    (cr(-0.5 * (beta.norm_sqr() + gamma.norm_sqr())) + gamma.conj() * beta).exp()
}

fn vacuum(beta: C64, gamma: C64) -> C64 {
    cr((-0.5 * (beta.norm_sqr() + gamma.norm_sqr())).exp())
}

struct Beams {
    lost: Vec<C64>,
    plus: C64,
    minus: C64,
}

fn beams(co: &CarvingCoefficients, k: usize, n_u: usize, n: usize, alpha: f64, eta: f64) -> Beams {
    let mut lost = Vec::new();
    let mut route = |spins: std::ops::Range<usize>| {
        let mut a = cr(alpha * std::f64::consts::FRAC_1_SQRT_2);
        for j in spins {
            let s = bit(k, j, n);
            lost.push(a * co.r[s]);
            lost.extend(co.loss.iter().map(|l| a * l[s]));
            a *= co.t[s];
        }
        a
    };
    let up = route(0..n_u);
    let down = route(n_u..n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (plus, minus) = ((up + down) * s, (up - down) * s);
    let leak = (1.0 - eta).sqrt();
    lost.push(plus * leak);
    lost.push(minus * leak);
    Beams { lost, plus: plus * eta.sqrt(), minus: minus * eta.sqrt() }
}

/// Coherent-light carving for fixed coefficients; trace is the success probability.
pub fn coherent_kernel(
    co: &CarvingCoefficients,
    n_u: usize,
    n_d: usize,
    n_sc: usize,
    alpha: f64,
    eta: f64,
    noise: &CircuitNoise,
) -> Result<DensityMatrix> {
    check_split(n_u, n_d, n_sc)?;
    if !(alpha > 0.0) {
        return Err(Error::Parameter { name: "alpha_coherent", reason: format!("{alpha} must be positive") });
    }
    check_prob("eta", eta)?;
    let n = n_u + n_d;
    let dim = 1usize << n;
    let all: Vec<Beams> = (0..dim).map(|k| beams(co, k, n_u, n, alpha, eta)).collect();
    let mut plus = vec![cr(0.0); dim * dim];
    let mut minus = vec![cr(0.0); dim * dim];
    for (row, b) in all.iter().enumerate() {
        for (col, g) in all.iter().enumerate() {
            let env: C64 = b.lost.iter().zip(&g.lost).map(|(&x, &y)| overlap(x, y)).product();
            let click = |x: C64, y: C64| overlap(x, y) - vacuum(x, y);
            plus[row * dim + col] = env * click(b.plus, g.plus) * vacuum(b.minus, g.minus);
            minus[row * dim + col] = env * click(b.minus, g.minus) * vacuum(b.plus, g.plus);
        }
    }
    carve(&[plus, minus], n_u, n, n_sc, noise)
}

fn jitter_average<F>(params: &CarvingParams, n: usize, mut kernel: F) -> Result<DensityMatrix>
where
    F: FnMut(&CarvingCoefficients) -> Result<DensityMatrix>,
{
    let nodes = jitter_grid(params.delta1, params.sigma, params.omega, params.sigma * params.gamma);
    if let [(d1, om, _)] = nodes[..] {
        return kernel(&carving_coefficients(params, d1, om));
    }
    let mut sum = DensityMatrix::zero(n);
    for (d1, om, w) in nodes {
        sum.add_scaled(&kernel(&carving_coefficients(params, d1, om))?, w);
    }
    Ok(sum)
}

pub fn carving_sps_ghz(params: &CarvingParams, n_u: usize, n_d: usize, noise: &CircuitNoise) -> Result<SchemeResult> {
    params.validate()?;
    let sum = jitter_average(params, n_u + n_d, |co| sps_kernel(co, n_u, n_d, params.n_sc, noise))?;
    SchemeResult::from_unnormalized(sum, params.efficiency().powi(params.n_sc as i32))
}

pub fn carving_coherent_ghz(params: &CarvingParams, n_u: usize, n_d: usize, noise: &CircuitNoise) -> Result<SchemeResult> {
    params.validate()?;
    let eta = params.efficiency();
    let sum = jitter_average(params, n_u + n_d, |co| {
        coherent_kernel(co, n_u, n_d, params.n_sc, params.alpha_coherent, eta, noise)
    })?;
    SchemeResult::from_unnormalized(sum, 1.0)
}
