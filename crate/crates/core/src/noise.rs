//! Gate, measurement and memory-decoherence noise, plus hardware timing and coherence sets.

use serde::{Deserialize, Serialize};

use crate::error::{check_prob, Error, Result};
use crate::quantum::{cr, CMatrix, DensityMatrix, KrausChannel, Pauli, PauliString};

pub fn depolarizing_1q(p: f64) -> Result<KrausChannel> {
    check_prob("p", p)?;
    let terms: Vec<(f64, PauliString)> = Pauli::ALL
        .iter()
        .map(|&q| (if q == Pauli::I { 1.0 - p } else { p / 3.0 }, PauliString::new(vec![q])))
        .collect();
    KrausChannel::pauli_mixture(&terms)
}

pub fn depolarizing_2q(p: f64) -> Result<KrausChannel> {
    check_prob("p", p)?;
    let terms: Vec<(f64, PauliString)> = (0..16)
        .map(|i| {
            let s = PauliString::from_index(2, i);
            (if i == 0 { 1.0 - p } else { p / 15.0 }, s)
        })
        .collect();
    KrausChannel::pauli_mixture(&terms)
}

/// Generalized amplitude damping at infinite temperature (equal weights on both relaxation directions).
pub fn generalized_amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_prob("gamma", gamma)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (s, r) = ((1.0 - gamma).sqrt(), gamma.sqrt());
    let m = |a: f64, b: f64, c: f64, d: f64| CMatrix::from_row_slice(2, 2, &[cr(a * h), cr(b * h), cr(c * h), cr(d * h)]);
    KrausChannel::new(vec![m(1.0, 0.0, 0.0, s), m(0.0, r, 0.0, 0.0), m(s, 0.0, 0.0, 1.0), m(0.0, 0.0, r, 0.0)])
}

pub fn phase_damping(gamma: f64) -> Result<KrausChannel> {
    check_prob("gamma", gamma)?;
    let m = |a: f64, d: f64| CMatrix::from_row_slice(2, 2, &[cr(a), cr(0.0), cr(0.0), cr(d)]);
    KrausChannel::new(vec![m(1.0, (1.0 - gamma).sqrt()), m(0.0, gamma.sqrt())])
}

/// Photon loss; `eta` is the survival probability.
pub fn amplitude_damping(eta: f64) -> Result<KrausChannel> {
    check_prob("eta", eta)?;
    let k1 = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(eta.sqrt())]);
    let k2 = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr((1.0 - eta).sqrt()), cr(0.0), cr(0.0)]);
    KrausChannel::new(vec![k1, k2])
}

/// Z flip with probability `p_flip`.
pub fn dephasing(p_flip: f64) -> Result<KrausChannel> {
    check_prob("p_flip", p_flip)?;
    KrausChannel::pauli_mixture(&[
        (1.0 - p_flip, PauliString::new(vec![Pauli::I])),
        (p_flip, PauliString::new(vec![Pauli::Z])),
    ])
}

fn decay(t: f64, tau: f64) -> f64 {
    (-t / tau).exp()
}

fn check_times(t: f64, t1: f64, t2: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Parameter { name: "t", reason: format!("negative time {t}") });
    }
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::Parameter { name: "T1/T2", reason: format!("{t1}, {t2} must be positive") });
    }
    Ok(())
}

/// GAD(1 − e^(−t/T1)) followed by PD(1 − e^(−t/T2)).
pub fn decoherence_channel(t: f64, t1: f64, t2: f64) -> Result<KrausChannel> {
    check_times(t, t1, t2)?;
    generalized_amplitude_damping(1.0 - decay(t, t1))?.then(&phase_damping(1.0 - decay(t, t2))?)
}

pub fn decohere(rho: &DensityMatrix, qubit: usize, t: f64, t1: f64, t2: f64) -> Result<DensityMatrix> {
    if t == 0.0 {
        check_times(t, t1, t2)?;
        return Ok(rho.clone());
    }
    rho.apply_channel(&decoherence_channel(t, t1, t2)?, &[qubit])
}

/// Bloch-vector scalings (transverse, longitudinal) of the decoherence channel.
///
/// The infinite-temperature GAD composed with PD is unital with diagonal Bloch action,
/// hence a Pauli channel.
pub fn decoherence_scalings(t: f64, t1: f64, t2: f64) -> (f64, f64) {
    let transverse = decay(t, 2.0 * t1) * decay(t, 2.0 * t2);
    let longitudinal = decay(t, t1);
    (transverse, longitudinal)
}

/// Pauli probabilities [I, X, Y, Z] of a unital channel with Bloch scalings (a, a, b).
pub fn pauli_probs_from_scalings(a: f64, b: f64) -> [f64; 4] {
    [(1.0 + b + 2.0 * a) / 4.0, (1.0 - b) / 4.0, (1.0 - b) / 4.0, (1.0 + b - 2.0 * a) / 4.0]
}

pub fn decoherence_pauli_probs(t: f64, t1: f64, t2: f64) -> Result<[f64; 4]> {
    check_times(t, t1, t2)?;
    let (a, b) = decoherence_scalings(t, t1, t2);
    Ok(pauli_probs_from_scalings(a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitNoise {
    pub p_g: f64,
    pub p_m: f64,
}

impl CircuitNoise {
    pub fn new(p_g: f64, p_m: f64) -> Result<Self> {
        check_prob("p_g", p_g)?;
        check_prob("p_m", p_m)?;
        Ok(CircuitNoise { p_g, p_m })
    }

    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn noiseless() -> Self {
        CircuitNoise { p_g: 0.0, p_m: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperationTimes {
    pub t_link: f64,
    pub t_meas: f64,
    pub t_single_gate: f64,
    pub t_cz: f64,
    pub t_cx: f64,
    pub t_ciy: f64,
    pub t_swap: f64,
}

impl Default for OperationTimes {
    fn default() -> Self {
        OperationTimes { t_link: 1.0, t_meas: 1.0, t_single_gate: 0.1, t_cz: 1.0, t_cx: 1.0, t_ciy: 1.0, t_swap: 3.0 }
    }
}

impl OperationTimes {
    pub fn instantaneous() -> Self {
        OperationTimes { t_link: 1.0, t_meas: 0.0, t_single_gate: 0.0, t_cz: 0.0, t_cx: 0.0, t_ciy: 0.0, t_swap: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t_link, self.t_meas, self.t_single_gate, self.t_cz, self.t_cx, self.t_ciy, self.t_swap];
        if all.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::Parameter { name: "times", reason: "all durations must be >= 0".into() });
        }
        Ok(())
    }

    pub fn controlled(&self, p: Pauli) -> f64 {
        match p {
            Pauli::X => self.t_cx,
            Pauli::Y => self.t_ciy,
            Pauli::Z => self.t_cz,
            Pauli::I => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoherenceSetName {
    Set1,
    Set2,
    Set3,
    SetMix,
    SetD,
}

impl CoherenceSetName {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "Set-1" => Self::Set1,
            "Set-2" => Self::Set2,
            "Set-3" => Self::Set3,
            "Set-mix" => Self::SetMix,
            "Set-D" => Self::SetD,
            _ => return Err(Error::UnknownCoherenceSet(s.to_string())),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Set1 => "Set-1",
            Self::Set2 => "Set-2",
            Self::Set3 => "Set-3",
            Self::SetMix => "Set-mix",
            Self::SetD => "Set-D",
        }
    }
}

/// Memory coherence times. Relative sets are in units of t_link; Set-D is in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSet {
    pub name: CoherenceSetName,
    pub t1_link: f64,
    pub t2_link: f64,
    pub t1_idle: f64,
    pub t2_idle: f64,
    pub dd_enabled: bool,
    pub t_pulse: f64,
    pub n_dd: u32,
    /// Seconds per t_link when the set is absolute, `None` for relative sets.
    pub t_link_seconds: Option<f64>,
}

pub const SET_D_T_LINK: f64 = 1e-5;
pub const SET_D_T_PULSE: f64 = 1e-3;
pub const SET_D_N_DD: u32 = 18;

impl CoherenceSet {
    fn relative(name: CoherenceSetName, link: f64, idle: f64) -> Self {
        CoherenceSet {
            name,
            t1_link: link,
            t2_link: link,
            t1_idle: idle,
            t2_idle: idle,
            dd_enabled: false,
            t_pulse: 0.0,
            n_dd: 0,
            t_link_seconds: None,
        }
    }

    pub fn resolve(name: &str) -> Result<Self> {
        let name = CoherenceSetName::parse(name)?;
        Ok(match name {
            CoherenceSetName::Set1 => Self::relative(name, 1e4, 1e5),
            CoherenceSetName::Set2 => Self::relative(name, 1e5, 1e5),
            CoherenceSetName::Set3 => Self::relative(name, 1e6, 1e6),
            CoherenceSetName::SetMix => Self::relative(name, 1e4, 1e6),
            // T1/T2 for Set-D are figure-only; these defaults are placeholders meant to be overridden.
            CoherenceSetName::SetD => CoherenceSet {
                name,
                t1_link: 300.0,
                t2_link: 0.5,
                t1_idle: 300.0,
                t2_idle: 1.0,
                dd_enabled: true,
                t_pulse: SET_D_T_PULSE,
                n_dd: SET_D_N_DD,
                t_link_seconds: Some(SET_D_T_LINK),
            },
        })
    }

    pub fn infinite() -> Self {
        Self::relative(CoherenceSetName::Set3, f64::INFINITY, f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.t1_link, self.t2_link, self.t1_idle, self.t2_idle];
        if all.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Parameter { name: "coherence", reason: "all times must be > 0".into() });
        }
        if self.t1_idle < self.t1_link || self.t2_idle < self.t2_link {
            return Err(Error::Parameter { name: "coherence", reason: "T_idle must be >= T_link".into() });
        }
        Ok(())
    }

    /// Refocusing time t_pulse + 2·n_DD·t_link, in the set's own units.
    pub fn t_dd(&self) -> f64 {
        let t_link = self.t_link_seconds.unwrap_or(1.0);
        self.t_pulse + 2.0 * self.n_dd as f64 * t_link
    }

    /// Coherence times in units of t_link.
    pub fn in_link_units(&self) -> CoherenceSet {
        match self.t_link_seconds {
            None => *self,
            Some(s) => CoherenceSet {
                t1_link: self.t1_link / s,
                t2_link: self.t2_link / s,
                t1_idle: self.t1_idle / s,
                t2_idle: self.t2_idle / s,
                t_pulse: self.t_pulse / s,
                t_link_seconds: None,
                ..*self
            },
        }
    }

    /// With DD enabled, memory-qubit gate durations become the refocusing time.
    pub fn adjust_times(&self, times: &OperationTimes) -> OperationTimes {
        if !self.dd_enabled {
            return *times;
        }
        let t_dd = self.in_link_units().t_dd();
        OperationTimes { t_cz: t_dd, t_cx: t_dd, t_ciy: t_dd, t_swap: t_dd, ..*times }
    }
}
