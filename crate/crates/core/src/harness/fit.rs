//! Finite-size-scaling threshold fit p_L = A + Bγ + Cγ², γ = (p − p_th)·d^{1/ν0}.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::estimate::RunRow;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPoint {
    pub d: usize,
    pub p: f64,
    pub p_l: f64,
    pub sigma: f64,
}

impl From<&RunRow> for FitPoint {
    fn from(r: &RunRow) -> Self {
        FitPoint { d: r.d, p: r.p, p_l: r.estimate.p_l, sigma: r.estimate.sigma() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p_th: f64,
    pub nu0: f64,
    /// Diagonal of the parameter covariance, ordered (A, B, C, p_th, ν0).
    pub covariance_diag: [f64; 5],
    /// Norm of the σ-weighted residual vector.
    pub residual_norm: f64,
    pub iterations: usize,
}

impl FitResult {
    pub fn p_th_sigma(&self) -> f64 {
        self.covariance_diag[3].max(0.0).sqrt()
    }

    pub fn predict(&self, d: usize, p: f64) -> f64 {
        model(&[self.a, self.b, self.c, self.p_th, self.nu0], d, p)
    }
}

fn model(theta: &[f64; 5], d: usize, p: f64) -> f64 {
    let g = (p - theta[3]) * (d as f64).powf(1.0 / theta[4]);
    theta[0] + theta[1] * g + theta[2] * g * g
}

fn residuals(theta: &[f64; 5], pts: &[FitPoint]) -> DVector<f64> {
    DVector::from_iterator(pts.len(), pts.iter().map(|x| (model(theta, x.d, x.p) - x.p_l) / x.sigma))
}

fn jacobian(theta: &[f64; 5], pts: &[FitPoint]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(pts.len(), 5);
    for (i, x) in pts.iter().enumerate() {
        let l = x.d as f64;
        let scale = l.powf(1.0 / theta[4]);
        let g = (x.p - theta[3]) * scale;
        let slope = theta[1] + 2.0 * theta[2] * g;
        let row = [1.0, g, g * g, -slope * scale, -slope * g * l.ln() / (theta[4] * theta[4])];
        for (k, v) in row.iter().enumerate() {
            j[(i, k)] = v / x.sigma;
        }
    }
    j
}

/// p where the two largest distances cross, by linear interpolation.
pub fn initial_crossing(pts: &[FitPoint]) -> Result<f64> {
    let mut ds: Vec<usize> = pts.iter().map(|x| x.d).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 2 {
        return Err(Error::NoCrossing);
    }
    let (big, small) = (ds[ds.len() - 1], ds[ds.len() - 2]);
    let mut ps: Vec<f64> = pts.iter().filter(|x| x.d == big).map(|x| x.p).collect();
    ps.sort_by(f64::total_cmp);
    let at = |d: usize, p: f64| pts.iter().find(|x| x.d == d && x.p == p).map(|x| x.p_l);
    let diffs: Vec<(f64, f64)> = ps.iter().filter_map(|&p| Some((p, at(big, p)? - at(small, p)?))).collect();
    for w in diffs.windows(2) {
        let ((p0, f0), (p1, f1)) = (w[0], w[1]);
        if f0 < 0.0 && f1 >= 0.0 {
            return Ok(p0 + (p1 - p0) * (-f0) / (f1 - f0));
        }
    }
    Err(Error::NoCrossing)
}

fn linear_init(pts: &[FitPoint], p_th: f64, nu0: f64) -> Result<[f64; 3]> {
    let n = pts.len();
    let mut m = DMatrix::zeros(n, 3);
    let mut y = DVector::zeros(n);
    for (i, x) in pts.iter().enumerate() {
        let g = (x.p - p_th) * (x.d as f64).powf(1.0 / nu0);
        m[(i, 0)] = 1.0 / x.sigma;
        m[(i, 1)] = g / x.sigma;
        m[(i, 2)] = g * g / x.sigma;
        y[i] = x.p_l / x.sigma;
    }
    let sol = m.svd(true, true).solve(&y, 1e-14).map_err(|_| Error::DegenerateJacobian)?;
    Ok([sol[0], sol[1], sol[2]])
}

const MAX_ITERATIONS: usize = 2000;

pub fn fit_threshold(pts: &[FitPoint]) -> Result<FitResult> {
    let mut ds: Vec<usize> = pts.iter().map(|x| x.d).collect();
    ds.sort_unstable();
    ds.dedup();
    let mut ps: Vec<f64> = pts.iter().map(|x| x.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    if ds.len() < 3 || ps.len() < 4 {
        return Err(Error::Parameter {
            name: "fit data",
            reason: format!("need >= 3 distances and >= 4 p values, got {} and {}", ds.len(), ps.len()),
        });
    }
    if pts.iter().any(|x| !(x.sigma > 0.0)) {
        return Err(Error::Parameter { name: "sigma", reason: "every point needs a positive uncertainty".into() });
    }
    let p_th0 = initial_crossing(pts)?;
    let [a, b, c] = linear_init(pts, p_th0, 1.0)?;
    let mut theta = [a, b, c, p_th0, 1.0];
    let mut r = residuals(&theta, pts);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && cost > 1e-30 {
        iterations += 1;
        let j = jacobian(&theta, pts);
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let mut damped = jtj.clone();
        for k in 0..5 {
            damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
        }
        let Some(chol) = damped.cholesky() else {
            lambda *= 10.0;
            if lambda > 1e20 {
                return Err(Error::DegenerateJacobian);
            }
            continue;
        };
        let step = chol.solve(&(-grad));
        let mut trial = theta;
        for k in 0..5 {
            trial[k] += step[k];
        }
        let trial_r = residuals(&trial, pts);
        let trial_cost = trial_r.norm_squared();
        if trial[4] > 0.0 && trial_cost.is_finite() && trial_cost <= cost {
            let small = (0..5).all(|k| step[k].abs() <= 1e-14 * (theta[k].abs() + 1e-14));
            theta = trial;
            r = trial_r;
            cost = trial_cost;
            lambda = (lambda / 3.0).max(1e-15);
            if small {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e20 {
                break;
            }
        }
    }
    let j = jacobian(&theta, pts);
    let cov = (j.transpose() * &j).try_inverse().ok_or(Error::DegenerateJacobian)?;
    let (p_min, p_max) = (ps[0], ps[ps.len() - 1]);
    if !(theta[3] >= p_min && theta[3] <= p_max) || !(theta[4] > 0.0) {
        return Err(Error::NoCrossing);
    }
    Ok(FitResult {
        a: theta[0],
        b: theta[1],
        c: theta[2],
        p_th: theta[3],
        nu0: theta[4],
        covariance_diag: [cov[(0, 0)], cov[(1, 1)], cov[(2, 2)], cov[(3, 3)], cov[(4, 4)]],
        residual_norm: cost.sqrt(),
        iterations,
    })
}

/// Every point saturated above 0.90: no threshold is worth searching for.
pub fn should_abandon(pts: &[FitPoint]) -> bool {
    !pts.is_empty() && pts.iter().all(|x| x.p_l > 0.90)
}
