//! Physical models of heralded Bell and GHZ generation.

pub mod carving;
pub mod emission;
pub mod reflection;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{ghz_fidelity, DensityMatrix};

pub use carving::{
    carving_coefficients, carving_coherent_ghz, carving_sps_ghz, carving_transmission, omega_star, CarvingCoefficients,
    CarvingMode, CarvingParams,
};
pub use emission::{double_click, single_click, EmissionParams};
pub use reflection::{reflection_coefficient, reflection_ghz, ReflectionParams};

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeResult {
    pub state: DensityMatrix,
    pub p_succ: f64,
    /// Attempt duration in units of t_link.
    pub duration: f64,
}

impl SchemeResult {
    pub fn fidelity(&self) -> f64 {
        ghz_fidelity(&self.state)
    }

    /// Builds a result from an unnormalized heralded state whose trace is the success probability.
    pub(crate) fn from_unnormalized(sum: DensityMatrix, scale: f64) -> Result<Self> {
        let p_succ = (sum.trace() * scale).clamp(0.0, 1.0);
        let state = if sum.trace() > 0.0 { sum.normalized()? } else { DensityMatrix::maximally_mixed(sum.n_qubits()) };
        Ok(SchemeResult { state, p_succ, duration: 1.0 })
    }
}

/// λ = (1 + I1(x)/I0(x))/2 with x = σ⁻².
pub fn lambda_from_phase_std(sigma_phi: f64) -> Result<f64> {
    if !(sigma_phi > 0.0) || !sigma_phi.is_finite() {
        return Err(Error::Parameter { name: "sigma_phi", reason: format!("{sigma_phi} must be positive") });
    }
    Ok(0.5 * (1.0 + bessel_ratio_i1_i0(sigma_phi.powi(-2))))
}

/// I1(x)/I0(x) for x ≥ 0.
pub fn bessel_ratio_i1_i0(x: f64) -> f64 {
    if x > 700.0 {
        let y = 1.0 / x;
        return 1.0 - y / 2.0 - y * y / 8.0 - y.powi(3) / 8.0 - 25.0 * y.powi(4) / 128.0;
    }
    let q = x * x / 4.0;
    let (mut term0, mut term1) = (1.0, x / 2.0);
    let (mut i0, mut i1) = (term0, term1);
    for k in 1..2000 {
        let k = k as f64;
        term0 *= q / (k * k);
        term1 *= q / (k * (k + 1.0));
        i0 += term0;
        i1 += term1;
        if term0 < i0 * 1e-17 && k > x {
            break;
        }
    }
    i1 / i0
}

const GH_NODES: [f64; 4] = [0.0, 0.816_287_882_858_964_7, 1.673_551_628_767_471_4, 2.651_961_356_835_233_4];
const GH_WEIGHTS: [f64; 4] = [0.810_264_617_556_807_3, 0.425_607_252_610_127_8, 0.054_515_582_819_127_03, 0.000_971_781_245_099_519_2];

/// Seven-point Gauss–Hermite nodes `(value, weight)` for N(mean, std²); a single node at std = 0.
pub fn gaussian_nodes(mean: f64, std: f64) -> Vec<(f64, f64)> {
    if std == 0.0 {
        return vec![(mean, 1.0)];
    }
    let norm = std::f64::consts::PI.sqrt();
    let shift = std::f64::consts::SQRT_2 * std;
    let mut out = vec![(mean, GH_WEIGHTS[0] / norm)];
    for i in 1..4 {
        out.push((mean + shift * GH_NODES[i], GH_WEIGHTS[i] / norm));
        out.push((mean - shift * GH_NODES[i], GH_WEIGHTS[i] / norm));
    }
    out
}

/// Product quadrature over independent (δ1, ω) jitter.
pub(crate) fn jitter_grid(delta1: f64, sigma_delta: f64, omega: f64, sigma_omega: f64) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for (d, wd) in gaussian_nodes(delta1, sigma_delta) {
        for (o, wo) in gaussian_nodes(omega, sigma_omega) {
            out.push((d, o, wd * wo));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn point(v: f64) -> Self {
        GridAxis { min: v, max: v, steps: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => vec![],
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    pub omega: GridAxis,
    pub delta1: GridAxis,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetuningOptimum {
    pub omega: f64,
    pub delta1: f64,
    pub fidelity: f64,
}

/// Arg-max of `eval(omega, delta1)` over the grid; the first maximum in row-major order wins.
pub fn scan_detunings<F>(grid: &DetuningGrid, mut eval: F) -> Result<DetuningOptimum>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let (omegas, deltas) = (grid.omega.values(), grid.delta1.values());
    if omegas.is_empty() || deltas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<DetuningOptimum> = None;
    for &omega in &omegas {
        for &delta1 in &deltas {
            let fidelity = eval(omega, delta1)?;
            if best.map_or(true, |b| fidelity > b.fidelity) {
                best = Some(DetuningOptimum { omega, delta1, fidelity });
            }
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// Reflection-scheme detuning scan on the jitter-averaged GHZ fidelity.
pub fn scan_reflection_detunings(
    params: &ReflectionParams,
    n: usize,
    noise: &crate::noise::CircuitNoise,
    grid: &DetuningGrid,
) -> Result<DetuningOptimum> {
    scan_detunings(grid, |omega, delta1| {
        let p = ReflectionParams { omega, delta1, ..*params };
        Ok(reflection_ghz(&p, n, noise)?.fidelity())
    })
}

const NSC_TIE: f64 = 1e-12;

/// Picks the n_sc in `2..=max_nsc` with the highest fidelity among results with
/// p_succ ≥ floor. Ties within 1e-12 go to the smaller n_sc.
pub fn scan_nsc<F>(max_nsc: usize, floor: f64, mut eval: F) -> Result<(usize, SchemeResult)>
where
    F: FnMut(usize) -> Result<SchemeResult>,
{
    if !(floor >= 0.0) {
        return Err(Error::Parameter { name: "p_succ_floor", reason: format!("{floor} must be non-negative") });
    }
    let mut best: Option<(usize, SchemeResult)> = None;
    for n_sc in 2..=max_nsc {
        let r = eval(n_sc)?;
        if r.p_succ < floor {
            continue;
        }
        let better = best.as_ref().map_or(true, |(_, b)| r.fidelity() > b.fidelity() + NSC_TIE);
        if better {
            best = Some((n_sc, r));
        }
    }
    best.ok_or(Error::NoNscMeetsFloor)
}

/// Which carving light source to model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CarvingSource {
    SinglePhoton,
    Coherent,
}

pub fn scan_carving_nsc(
    params: &CarvingParams,
    n_u: usize,
    n_d: usize,
    noise: &crate::noise::CircuitNoise,
    source: CarvingSource,
    floor: f64,
    max_nsc: usize,
) -> Result<(usize, SchemeResult)> {
    scan_nsc(max_nsc, floor, |n_sc| {
        let p = CarvingParams { n_sc, ..params.clone() };
        match source {
            CarvingSource::SinglePhoton => carving_sps_ghz(&p, n_u, n_d, noise),
            CarvingSource::Coherent => carving_coherent_ghz(&p, n_u, n_d, noise),
        }
    })
}
