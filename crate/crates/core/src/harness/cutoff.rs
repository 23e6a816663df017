//! GHZ cut-off times and the search over completion fractions.

use crate::error::{Error, Result};

/// Smallest k with 1 − (1 − p)^k ≥ x.
pub fn cutoff_attempts(x: f64, p_succ: f64) -> Result<usize> {
    if !(p_succ > 0.0 && p_succ <= 1.0) {
        return Err(Error::Parameter { name: "p_succ", reason: format!("{p_succ} not in (0, 1]") });
    }
    if p_succ == 1.0 {
        return if x <= 1.0 { Ok(1) } else { Err(Error::Parameter { name: "x", reason: format!("{x} > 1") }) };
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Parameter { name: "x", reason: format!("{x} not in (0, 1) for p_succ < 1") });
    }
    let reached = |k: usize| crate::superop::p_ghz_within_cutoff(p_succ, k) >= x;
    let mut k = ((1.0 - x).ln() / (1.0 - p_succ).ln()).ceil().max(1.0) as usize;
    while !reached(k) {
        k += 1;
    }
    while k > 1 && reached(k - 1) {
        k -= 1;
    }
    Ok(k)
}

pub fn cutoff_to_time(x: f64, p_succ: f64, attempt: f64) -> Result<f64> {
    Ok(cutoff_attempts(x, p_succ)? as f64 * attempt)
}

pub const X_MIN: f64 = 0.5;
pub const X_MAX: f64 = 0.999;
pub const CUTOFF_PROBES: usize = 12;

/// A fitted threshold and its standard error at one completion fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdProbe {
    pub x: f64,
    pub p_th: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CutoffOutcome {
    Threshold { x: f64, p_th: f64, sigma: f64, probes: Vec<ThresholdProbe> },
    /// No probe produced a threshold.
    NoThreshold { probed: Vec<f64> },
}

/// Golden-section search for the completion fraction with the highest threshold.
///
/// `eval` returns `None` where no threshold exists. Among probes whose intervals overlap
/// the best one, the smallest x is returned.
pub fn optimize_cutoff<F>(mut eval: F) -> Result<CutoffOutcome>
where
    F: FnMut(f64) -> Result<Option<(f64, f64)>>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut probes: Vec<ThresholdProbe> = Vec::new();
    let mut probed = Vec::new();
    let mut score = |x: f64, probes: &mut Vec<ThresholdProbe>, probed: &mut Vec<f64>| -> Result<f64> {
        probed.push(x);
        Ok(match eval(x)? {
            Some((p_th, sigma)) => {
                probes.push(ThresholdProbe { x, p_th, sigma });
                p_th
            }
            None => f64::NEG_INFINITY,
        })
    };
    let (mut a, mut b) = (X_MIN, X_MAX);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = score(c, &mut probes, &mut probed)?;
    let mut fd = score(d, &mut probes, &mut probed)?;
    for _ in 2..CUTOFF_PROBES {
        // ties move toward smaller x
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(c, &mut probes, &mut probed)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(d, &mut probes, &mut probed)?;
        }
    }
    let Some(best) = probes.iter().copied().max_by(|p, q| p.p_th.total_cmp(&q.p_th)) else {
        return Ok(CutoffOutcome::NoThreshold { probed });
    };
    let chosen = probes
        .iter()
        .copied()
        .filter(|p| p.p_th + p.sigma >= best.p_th - best.sigma)
        .min_by(|p, q| p.x.total_cmp(&q.x))
        .unwrap_or(best);
    probes.sort_by(|p, q| p.x.total_cmp(&q.x));
    Ok(CutoffOutcome::Threshold { x: chosen.x, p_th: chosen.p_th, sigma: chosen.sigma, probes })
}
