//! Flat `key = value` experiment configuration.
//!
//! `#` starts a comment. `params_file = path` splices another file in place, relative to
//! the including file. Later assignments win. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::decoders::DecoderKind;
use crate::error::{Error, Result};
use crate::noise::{CoherenceSet, OperationTimes};
use crate::schemes::{lambda_from_phase_std, CarvingMode, CarvingParams, CarvingSource, EmissionParams, ReflectionParams};
use crate::superop::Architecture;

const MAX_INCLUDE_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmissionVariant {
    SingleClick,
    DoubleClick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    /// Depolarized GHZ with fixed fidelity and success probability.
    Werner,
    Emission(EmissionVariant),
    Reflection,
    Carving(CarvingSource),
}

impl SchemeKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "werner" => SchemeKind::Werner,
            "emission-single" => SchemeKind::Emission(EmissionVariant::SingleClick),
            "emission-double" => SchemeKind::Emission(EmissionVariant::DoubleClick),
            "reflection" => SchemeKind::Reflection,
            "carving-sps" => SchemeKind::Carving(CarvingSource::SinglePhoton),
            "carving-coherent" => SchemeKind::Carving(CarvingSource::Coherent),
            _ => return Err(Error::Config(format!("unknown scheme {s:?}"))),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Werner => "werner",
            SchemeKind::Emission(EmissionVariant::SingleClick) => "emission-single",
            SchemeKind::Emission(EmissionVariant::DoubleClick) => "emission-double",
            SchemeKind::Reflection => "reflection",
            SchemeKind::Carving(CarvingSource::SinglePhoton) => "carving-sps",
            SchemeKind::Carving(CarvingSource::Coherent) => "carving-coherent",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WernerParams {
    pub fidelity: f64,
    pub p_succ: f64,
    pub duration: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutoffSpec {
    /// Absolute cut-off in units of t_link.
    Time(f64),
    /// GHZ completion fraction x.
    Fraction(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub architecture: Architecture,
    pub scheme: SchemeKind,
    pub protocol: Option<PathBuf>,
    pub coherence_name: String,
    pub coherence: CoherenceSet,
    pub times: OperationTimes,
    pub distances: Vec<usize>,
    pub p_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub cutoff: CutoffSpec,
    pub decoder: DecoderKind,
    pub werner: WernerParams,
    pub emission: EmissionParams,
    pub reflection: ReflectionParams,
    pub carving: CarvingParams,
    /// `None` places ⌈n/2⌉ spins on the up arm.
    pub carving_n_u: Option<usize>,
    /// Use the analytic optimum cavity detuning instead of `carving.omega`.
    pub carving_omega_auto: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            architecture: Architecture::Wt4,
            scheme: SchemeKind::Werner,
            protocol: None,
            coherence_name: "Set-3".into(),
            coherence: CoherenceSet::resolve("Set-3").expect("known set"),
            times: OperationTimes::default(),
            distances: vec![4, 6, 8],
            p_values: vec![0.002, 0.004, 0.006, 0.008, 0.010],
            trials: 1000,
            seed: 1,
            cutoff: CutoffSpec::Fraction(0.99),
            decoder: DecoderKind::UnionFind,
            werner: WernerParams { fidelity: 1.0, p_succ: 1.0, duration: 1.0 },
            emission: EmissionParams::ideal(),
            reflection: ReflectionParams {
                c1: 20.0,
                kappa_c: 1.0,
                kappa_l: 0.05,
                gamma: 1.0,
                delta_big: 50.0,
                sigma: 0.0,
                eta_c: 1.0,
                p_dk: 0.0,
                omega: 0.0,
                delta1: 0.0,
            },
            carving: CarvingParams {
                mode: CarvingMode::Cavity,
                c2: 20.0,
                p_purcell: 10.0,
                kappa_c: 1.0,
                kappa_l: 0.05,
                gamma: 1.0,
                delta_big: 50.0,
                sigma: 0.0,
                omega: 0.0,
                delta1: 0.0,
                eta_f: 1.0,
                eta_det: 1.0,
                n_sc: 2,
                alpha_coherent: 0.1,
            },
            carving_n_u: None,
            carving_omega_auto: true,
        }
    }
}

/// Reads `key = value` pairs in file order with includes expanded.
fn collect(path: &Path, depth: usize, out: &mut Vec<(String, String, PathBuf)>) -> Result<()> {
    if depth > MAX_INCLUDE_DEPTH {
        return Err(Error::Config(format!("params_file nesting deeper than {MAX_INCLUDE_DEPTH} at {}", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for (key, value) in parse_pairs(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))? {
        if key == "params_file" {
            collect(&base.join(&value), depth + 1, out)?;
        } else {
            out.push((key, value, base.to_path_buf()));
        }
    }
    Ok(())
}

fn parse_pairs(text: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(format!("line {}: empty key or value", i + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| num(key, x.trim())).collect()
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        collect(path, 0, &mut pairs)?;
        Self::from_pairs(pairs)
    }

    /// Parses configuration text; includes resolve relative to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, v) in parse_pairs(text).map_err(Error::Config)? {
            if k == "params_file" {
                collect(&base.join(&v), 1, &mut pairs)?;
            } else {
                pairs.push((k, v, base.to_path_buf()));
            }
        }
        Self::from_pairs(pairs)
    }

    fn from_pairs(pairs: Vec<(String, String, PathBuf)>) -> Result<Self> {
        let mut map: BTreeMap<String, (String, PathBuf)> = BTreeMap::new();
        for (k, v, base) in pairs {
            map.insert(k, (v, base));
        }
        let mut cfg = ExperimentConfig::default();
        // the named set first so per-field overrides apply on top of it
        if let Some((name, _)) = map.remove("coherence_set") {
            cfg.coherence = CoherenceSet::resolve(&name)?;
            cfg.coherence_name = name;
        }
        let mut sigma_phi = None;
        for (key, (v, base)) in &map {
            let v = v.as_str();
            let k = key.as_str();
            match k {
                "arch" => cfg.architecture = Architecture::parse(v)?,
                "scheme" => cfg.scheme = SchemeKind::parse(v)?,
                "protocol" => cfg.protocol = Some(base.join(v)),
                "distances" => cfg.distances = list(k, v)?,
                "p_values" => cfg.p_values = list(k, v)?,
                "trials" => cfg.trials = num(k, v)?,
                "seed" => cfg.seed = num(k, v)?,
                "t_cut" => cfg.cutoff = CutoffSpec::Time(num(k, v)?),
                "cutoff_fraction" => cfg.cutoff = CutoffSpec::Fraction(num(k, v)?),
                "decoder" => cfg.decoder = DecoderKind::parse(v)?,
                "coherence.t1_link" => cfg.coherence.t1_link = num(k, v)?,
                "coherence.t2_link" => cfg.coherence.t2_link = num(k, v)?,
                "coherence.t1_idle" => cfg.coherence.t1_idle = num(k, v)?,
                "coherence.t2_idle" => cfg.coherence.t2_idle = num(k, v)?,
                "coherence.dd_enabled" => cfg.coherence.dd_enabled = boolean(k, v)?,
                "coherence.t_pulse" => cfg.coherence.t_pulse = num(k, v)?,
                "coherence.n_dd" => cfg.coherence.n_dd = num(k, v)?,
                "coherence.t_link_seconds" => cfg.coherence.t_link_seconds = Some(num(k, v)?),
                "times.t_link" => cfg.times.t_link = num(k, v)?,
                "times.t_meas" => cfg.times.t_meas = num(k, v)?,
                "times.t_single_gate" => cfg.times.t_single_gate = num(k, v)?,
                "times.t_cz" => cfg.times.t_cz = num(k, v)?,
                "times.t_cx" => cfg.times.t_cx = num(k, v)?,
                "times.t_ciy" => cfg.times.t_ciy = num(k, v)?,
                "times.t_swap" => cfg.times.t_swap = num(k, v)?,
                "werner.fidelity" => cfg.werner.fidelity = num(k, v)?,
                "werner.p_succ" => cfg.werner.p_succ = num(k, v)?,
                "werner.duration" => cfg.werner.duration = num(k, v)?,
                "emission.f_prep" => cfg.emission.f_prep = num(k, v)?,
                "emission.p_ee" => cfg.emission.p_ee = num(k, v)?,
                "emission.mu" => cfg.emission.mu = num(k, v)?,
                "emission.lambda_dephase" => cfg.emission.lambda_dephase = num(k, v)?,
                "emission.sigma_phi" => sigma_phi = Some(num::<f64>(k, v)?),
                "emission.eta_ph" => cfg.emission.eta_ph = num(k, v)?,
                "emission.alpha_bright" => cfg.emission.alpha_bright = num(k, v)?,
                "reflection.c1" => cfg.reflection.c1 = num(k, v)?,
                "reflection.kappa_c" => cfg.reflection.kappa_c = num(k, v)?,
                "reflection.kappa_l" => cfg.reflection.kappa_l = num(k, v)?,
                "reflection.gamma" => cfg.reflection.gamma = num(k, v)?,
                "reflection.delta_big" => cfg.reflection.delta_big = num(k, v)?,
                "reflection.sigma" => cfg.reflection.sigma = num(k, v)?,
                "reflection.eta_c" => cfg.reflection.eta_c = num(k, v)?,
                "reflection.p_dk" => cfg.reflection.p_dk = num(k, v)?,
                "reflection.omega" => cfg.reflection.omega = num(k, v)?,
                "reflection.delta1" => cfg.reflection.delta1 = num(k, v)?,
                "carving.mode" => {
                    cfg.carving.mode = match v {
                        "cavity" => CarvingMode::Cavity,
                        "waveguide" => CarvingMode::Waveguide,
                        _ => return Err(Error::Config(format!("{k}: expected cavity or waveguide, got {v:?}"))),
                    }
                }
                "carving.c2" => cfg.carving.c2 = num(k, v)?,
                "carving.p_purcell" => cfg.carving.p_purcell = num(k, v)?,
                "carving.kappa_c" => cfg.carving.kappa_c = num(k, v)?,
                "carving.kappa_l" => cfg.carving.kappa_l = num(k, v)?,
                "carving.gamma" => cfg.carving.gamma = num(k, v)?,
                "carving.delta_big" => cfg.carving.delta_big = num(k, v)?,
                "carving.sigma" => cfg.carving.sigma = num(k, v)?,
                "carving.omega" if v == "auto" => cfg.carving_omega_auto = true,
                "carving.omega" => {
                    cfg.carving.omega = num(k, v)?;
                    cfg.carving_omega_auto = false;
                }
                "carving.delta1" => cfg.carving.delta1 = num(k, v)?,
                "carving.eta_f" => cfg.carving.eta_f = num(k, v)?,
                "carving.eta_det" => cfg.carving.eta_det = num(k, v)?,
                "carving.n_sc" => cfg.carving.n_sc = num(k, v)?,
                "carving.alpha_coherent" => cfg.carving.alpha_coherent = num(k, v)?,
                "carving.n_u" => cfg.carving_n_u = Some(num(k, v)?),
                _ => return Err(Error::Config(format!("unknown key {k:?}"))),
            }
        }
        if let Some(s) = sigma_phi {
            if map.contains_key("emission.lambda_dephase") {
                return Err(Error::Config("set either emission.lambda_dephase or emission.sigma_phi, not both".into()));
            }
            cfg.emission.lambda_dephase = lambda_from_phase_std(s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.distances.is_empty() || self.distances.iter().any(|&d| d < 4 || d % 2 != 0) {
            return Err(Error::Config(format!("distances must be even and >= 4: {:?}", self.distances)));
        }
        if self.p_values.is_empty() || self.p_values.iter().any(|p| !(0.0..=0.05).contains(p)) {
            return Err(Error::Config(format!("p values must lie in [0, 0.05]: {:?}", self.p_values)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        match self.cutoff {
            CutoffSpec::Time(t) if !(t > 0.0) => return Err(Error::Config(format!("t_cut must be positive, got {t}"))),
            CutoffSpec::Fraction(x) if !(x > 0.0 && x < 1.0) => {
                return Err(Error::Config(format!("cutoff_fraction must lie in (0, 1), got {x}")))
            }
            _ => {}
        }
        if matches!(self.scheme, SchemeKind::Emission(_)) && self.protocol.is_none() {
            return Err(Error::Config("emission schemes need a protocol file".into()));
        }
        let w = self.werner;
        if !(0.0..=1.0).contains(&w.fidelity) || !(w.p_succ > 0.0 && w.p_succ <= 1.0) || !(w.duration > 0.0) {
            return Err(Error::Config(format!("invalid werner parameters {w:?}")));
        }
        self.coherence.validate()?;
        self.times.validate()?;
        self.emission.validate()?;
        self.reflection.validate()?;
        self.carving.validate()
    }
}
