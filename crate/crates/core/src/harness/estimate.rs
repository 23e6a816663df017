//! Monte Carlo estimation of logical error rates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decoders::{decode, DecoderKind, DefectGraph, UnionFindDecoder};
use crate::error::{Error, Result};
use crate::noise::CircuitNoise;
use crate::protocols::load_protocol;
use crate::quantum::DensityMatrix;
use crate::schemes::{
    carving_coherent_ghz, carving_sps_ghz, double_click, omega_star, reflection_ghz, single_click, CarvingParams, CarvingSource,
    SchemeResult,
};
use crate::superop::{build_table, StabilizerType, SuperoperatorTable};
use crate::surface::{check_logical, compute_defects, run_trial, type_index, ErrorSampler, PauliFrame, ToricLayout};

use super::config::{CutoffSpec, EmissionVariant, ExperimentConfig, SchemeKind};
use super::cutoff::cutoff_to_time;

/// GHZ state on `arch.ghz_size()` modules at physical error rate `p`.
pub fn ghz_source(cfg: &ExperimentConfig, p: f64) -> Result<SchemeResult> {
    let noise = CircuitNoise::uniform(p)?;
    let n = cfg.architecture.ghz_size();
    match cfg.scheme {
        SchemeKind::Werner => {
            let w = cfg.werner;
            let mut state = DensityMatrix::ghz(n).scaled(w.fidelity);
            state.add_scaled(&DensityMatrix::maximally_mixed(n), 1.0 - w.fidelity);
            Ok(SchemeResult { state, p_succ: w.p_succ, duration: w.duration })
        }
        SchemeKind::Emission(variant) => {
            let path = cfg.protocol.as_ref().ok_or_else(|| Error::Config("emission schemes need a protocol file".into()))?;
            let protocol = load_protocol(path)?;
            if protocol.modules().len() != n {
                return Err(Error::Config(format!(
                    "protocol spans {} modules but {} needs {n}",
                    protocol.modules().len(),
                    cfg.architecture
                )));
            }
            let bell = match variant {
                EmissionVariant::SingleClick => single_click(&cfg.emission, &noise)?,
                EmissionVariant::DoubleClick => double_click(&cfg.emission, &noise)?,
            };
            protocol.execute(&bell, &noise, &cfg.times, &cfg.coherence)
        }
        SchemeKind::Reflection => reflection_ghz(&cfg.reflection, n, &noise),
        SchemeKind::Carving(source) => {
            let params = carving_params(cfg);
            let n_u = cfg.carving_n_u.unwrap_or(n.div_ceil(2));
            if n_u == 0 || n_u >= n {
                return Err(Error::Config(format!("carving.n_u = {n_u} leaves an empty arm for n = {n}")));
            }
            match source {
                CarvingSource::SinglePhoton => carving_sps_ghz(&params, n_u, n - n_u, &noise),
                CarvingSource::Coherent => carving_coherent_ghz(&params, n_u, n - n_u, &noise),
            }
        }
    }
}

pub fn carving_params(cfg: &ExperimentConfig) -> CarvingParams {
    let mut params = cfg.carving;
    if cfg.carving_omega_auto {
        params.omega = omega_star(&params);
    }
    params
}

pub fn cutoff_time(cfg: &ExperimentConfig, ghz: &SchemeResult) -> Result<f64> {
    match cfg.cutoff {
        CutoffSpec::Time(t) => Ok(t),
        CutoffSpec::Fraction(x) => cutoff_to_time(x, ghz.p_succ, ghz.duration),
    }
}

/// Everything derived from one physical error rate.
#[derive(Clone, Debug)]
pub struct PointSetup {
    pub p: f64,
    pub ghz: SchemeResult,
    pub t_cut: f64,
    pub table: SuperoperatorTable,
}

pub fn build_point(cfg: &ExperimentConfig, p: f64) -> Result<PointSetup> {
    let ghz = ghz_source(cfg, p)?;
    let t_cut = cutoff_time(cfg, &ghz)?;
    let mut meta = BTreeMap::new();
    meta.insert("scheme".to_string(), cfg.scheme.as_str().to_string());
    meta.insert("set".to_string(), cfg.coherence_name.clone());
    meta.insert("p".to_string(), format!("{p}"));
    meta.insert("ghz_fidelity".to_string(), format!("{:.12}", ghz.fidelity()));
    meta.insert("ghz_p_succ".to_string(), format!("{:.12e}", ghz.p_succ));
    let table = build_table(cfg.architecture, &ghz, &CircuitNoise::uniform(p)?, &cfg.times, &cfg.coherence, t_cut, meta)?;
    Ok(PointSetup { p, ghz, t_cut, table })
}

/// Wilson score interval at 95 % confidence.
pub fn wilson_interval(failures: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let phat = failures as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointEstimate {
    pub trials: usize,
    pub failures: usize,
    pub p_l: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl PointEstimate {
    pub fn new(failures: usize, trials: usize) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(failures, trials);
        PointEstimate { trials, failures, p_l: failures as f64 / trials as f64, ci_lo, ci_hi }
    }

    /// Half-width of the interval, floored at one count so that zero-failure points keep a weight.
    pub fn sigma(&self) -> f64 {
        (0.5 * (self.ci_hi - self.ci_lo)).max(1.0 / self.trials as f64)
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream per (seed, distance, p index, trial).
pub fn trial_seed(seed: u64, d: usize, p_index: usize, trial: usize) -> u64 {
    [d as u64, p_index as u64, trial as u64].iter().fold(splitmix(seed), |acc, &x| splitmix(acc ^ x))
}

enum Decoders {
    UnionFind([UnionFindDecoder; 2]),
    Mwpm,
}

/// Samples one trial and reports whether any of the four logicals flipped.
fn trial_fails(layout: &ToricLayout, sampler: &ErrorSampler, decoders: &Decoders, rng: &mut ChaCha8Rng) -> Result<bool> {
    let (history, frame) = run_trial(layout, sampler, rng)?;
    let defects = compute_defects(&history, layout.d);
    let layers = history.outcomes.len();
    let mut correction = PauliFrame::new(layout.n_data());
    for stab in StabilizerType::BOTH {
        let t = type_index(stab);
        let graph = DefectGraph::new(layout.d, layers, stab, defects[t].clone())?;
        let c = match decoders {
            Decoders::UnionFind(uf) => uf[t].decode(&graph)?,
            Decoders::Mwpm => decode(DecoderKind::Mwpm, layout, &graph)?,
        };
        c.apply_to(&mut correction);
    }
    Ok(check_logical(&frame, &correction, layout).iter().any(|&f| f))
}

/// Runs `trials` trials in parallel; the count is independent of scheduling.
pub fn estimate_logical_error(
    layout: &ToricLayout,
    table: &SuperoperatorTable,
    decoder: DecoderKind,
    trials: usize,
    seed: u64,
    p_index: usize,
) -> Result<PointEstimate> {
    let sampler = ErrorSampler::new(table)?;
    let decoders = match decoder {
        DecoderKind::UnionFind => Decoders::UnionFind(
            StabilizerType::BOTH.map(|stab| UnionFindDecoder::new(layout, layout.d + 1, stab)),
        ),
        DecoderKind::Mwpm => Decoders::Mwpm,
    };
    let failures = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, layout.d, p_index, i));
            trial_fails(layout, &sampler, &decoders, &mut rng).map(usize::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(PointEstimate::new(failures, trials))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub arch: String,
    pub scheme: String,
    pub set: String,
    pub d: usize,
    pub p: f64,
    pub estimate: PointEstimate,
    pub seed: u64,
}

pub const RUNS_HEADER: &str = "arch,scheme,set,d,p,trials,failures,p_L,ci_lo,ci_hi,seed";

/// Sweeps every (p, d) pair in the config. Rows are ordered by p, then d.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<RunRow>> {
    run_sweep_with(cfg, cfg.trials)
}

pub fn run_sweep_with(cfg: &ExperimentConfig, trials: usize) -> Result<Vec<RunRow>> {
    let setups: Vec<PointSetup> = cfg.p_values.par_iter().map(|&p| build_point(cfg, p)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (pi, setup) in setups.iter().enumerate() {
        for &d in &cfg.distances {
            let layout = ToricLayout::new(cfg.architecture, d)?;
            let estimate = estimate_logical_error(&layout, &setup.table, cfg.decoder, trials, cfg.seed, pi)?;
            rows.push(RunRow {
                arch: cfg.architecture.to_string(),
                scheme: cfg.scheme.as_str().to_string(),
                set: cfg.coherence_name.clone(),
                d,
                p: setup.p,
                estimate,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

pub fn runs_csv(rows: &[RunRow]) -> String {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in rows {
        let e = &r.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.10e},{:.10e},{:.10e},{}",
            r.arch, r.scheme, r.set, r.d, r.p, e.trials, e.failures, e.p_l, e.ci_lo, e.ci_hi, r.seed
        );
    }
    out
}

pub fn parse_runs_csv(text: &str) -> Result<Vec<RunRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(RUNS_HEADER) {
        return Err(Error::Schema("runs.csv header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 11 {
                return Err(Error::Schema(format!("runs.csv line {}: expected 11 fields", i + 2)));
            }
            let bad = |name: &str| Error::Schema(format!("runs.csv line {}: bad {name}", i + 2));
            let trials: usize = f[5].parse().map_err(|_| bad("trials"))?;
            let failures: usize = f[6].parse().map_err(|_| bad("failures"))?;
            Ok(RunRow {
                arch: f[0].into(),
                scheme: f[1].into(),
                set: f[2].into(),
                d: f[3].parse().map_err(|_| bad("d"))?,
                p: f[4].parse().map_err(|_| bad("p"))?,
                estimate: PointEstimate::new(failures, trials),
                seed: f[10].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}
