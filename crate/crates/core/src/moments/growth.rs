use serde::Serialize;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::moments::replica::{check_replicas, mean_se, replica_log_partitions};

/// A straight-line fit of `value` against `n` over a window of the data.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    /// `(n, value, stderr)` for every input point.
    pub points: Vec<(usize, f64, f64)>,
    /// Inclusive `n` range used by the fit.
    pub window: (usize, usize),
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit inside the window.
    pub residual: f64,
}

impl GrowthFit {
    /// `slope / slope_stderr`; infinite for an exact nonzero slope.
    pub fn z_score(&self) -> f64 {
        if self.slope_stderr > 0.0 {
            self.slope / self.slope_stderr
        } else if self.slope == 0.0 {
            0.0
        } else {
            self.slope.signum() * f64::INFINITY
        }
    }
}

/// OLS weights `w_j` with `slope = Σ w_j y_j` over the points `xs`.
fn slope_weights(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    xs.iter().map(|x| (x - m) / sxx).collect()
}

/// Indices of the points with `n ≥ n_max / 2`, at least two of them.
fn tail_window(ns: &[usize]) -> Result<Vec<usize>> {
    if ns.len() < 2 {
        return Err(Error::param("n_list", "need at least two points for a slope"));
    }
    let n_max = *ns.last().unwrap();
    let mut idx: Vec<usize> = (0..ns.len()).filter(|&j| 2 * ns[j] >= n_max).collect();
    if idx.len() < 2 {
        idx = vec![ns.len() - 2, ns.len() - 1];
    }
    Ok(idx)
}

fn finish(points: Vec<(usize, f64, f64)>, idx: &[usize], slope_stderr: f64) -> GrowthFit {
    let xs: Vec<f64> = idx.iter().map(|&j| points[j].0 as f64).collect();
    let ys: Vec<f64> = idx.iter().map(|&j| points[j].1).collect();
    let w = slope_weights(&xs);
    let slope: f64 = w.iter().zip(&ys).map(|(w, y)| w * y).sum();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    GrowthFit {
        window: (points[idx[0]].0, points[*idx.last().unwrap()].0),
        points,
        slope,
        slope_stderr,
        intercept,
        residual,
    }
}

/// Slope of `E[log W_n]` against `n` over the upper half of `ns`, the
/// finite-`n` stand-in for the free energy.
///
/// The standard error comes from the per-replica slopes, whose mean is the
/// slope of the means.
pub fn free_energy_estimate(law: &DisorderLaw, beta: f64, d: usize, ns: &[usize], r: usize, seed: u64) -> Result<GrowthFit> {
    check_replicas(r)?;
    let rows = replica_log_partitions(law, beta, d, ns, r, seed)?;
    free_energy_from_rows(ns, &rows)
}

/// [`free_energy_estimate`] from precomputed `log W_n` rows.
pub fn free_energy_from_rows(ns: &[usize], rows: &[Vec<f64>]) -> Result<GrowthFit> {
    let idx = tail_window(ns)?;
    let points: Vec<(usize, f64, f64)> = ns
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let col: Vec<f64> = rows.iter().map(|row| row[j]).collect();
            let (m, se) = mean_se(&col);
            (n, m, se)
        })
        .collect();
    let xs: Vec<f64> = idx.iter().map(|&j| ns[j] as f64).collect();
    let w = slope_weights(&xs);
    let per_replica: Vec<f64> = rows
        .iter()
        .map(|row| idx.iter().zip(&w).map(|(&j, w)| w * row[j]).sum())
        .collect();
    let (_, se) = mean_se(&per_replica);
    Ok(finish(points, &idx, se))
}

/// Slope of `log E[W_n^p]` against `n` from a moment series.
///
/// `series` holds `(n, estimate, stderr)`; the slope error propagates the
/// per-point errors as if independent (`stderr/estimate` per point).
pub fn fp_growth_fit(series: &[(usize, f64, f64)], p: f64) -> Result<GrowthFit> {
    if !(p > 0.0) {
        return Err(Error::param("p", "must be positive"));
    }
    if series.iter().any(|s| !(s.1 > 0.0)) {
        return Err(Error::param("series", "moment estimates must be positive"));
    }
    let ns: Vec<usize> = series.iter().map(|s| s.0).collect();
    let idx = tail_window(&ns)?;
    let points: Vec<(usize, f64, f64)> = series.iter().map(|&(n, m, se)| (n, m.ln(), se / m)).collect();
    let xs: Vec<f64> = idx.iter().map(|&j| ns[j] as f64).collect();
    let w = slope_weights(&xs);
    let se = idx
        .iter()
        .zip(&w)
        .map(|(&j, w)| (w * points[j].2).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(finish(points, &idx, se))
}

/// Monte Carlo `f_p` proxy on common environments, with the slope error
/// from per-replica influence values of `log E[W_n^p]`.
pub fn fp_growth_fit_mc(
    law: &DisorderLaw,
    beta: f64,
    d: usize,
    ns: &[usize],
    p: f64,
    r: usize,
    seed: u64,
) -> Result<GrowthFit> {
    check_replicas(r)?;
    let rows = replica_log_partitions(law, beta, d, ns, r, seed)?;
    fp_from_rows(ns, &rows, p)
}

/// [`fp_growth_fit_mc`] from precomputed `log W_n` rows.
pub fn fp_from_rows(ns: &[usize], rows: &[Vec<f64>], p: f64) -> Result<GrowthFit> {
    fp_fit_weighted(ns, rows, p)
}

/// Slope of `log mean(W^q)` from `log W` rows.
pub(crate) fn fp_fit_weighted(ns: &[usize], rows: &[Vec<f64>], p: f64) -> Result<GrowthFit> {
    let idx = tail_window(ns)?;
    let r = rows.len() as f64;
    let mut points = Vec::with_capacity(ns.len());
    let mut means = Vec::with_capacity(ns.len());
    for (j, &n) in ns.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|row| (p * row[j]).exp()).collect();
        let (m, se) = mean_se(&col);
        points.push((n, m.ln(), se / m));
        means.push(m);
    }
    let xs: Vec<f64> = idx.iter().map(|&j| ns[j] as f64).collect();
    let w = slope_weights(&xs);
    // influence of replica i on log M_n is (W_{i,n}^p − M_n)/M_n
    let influence: Vec<f64> = rows
        .iter()
        .map(|row| {
            idx.iter()
                .zip(&w)
                .map(|(&j, w)| w * ((p * row[j]).exp() - means[j]) / means[j])
                .sum()
        })
        .collect();
    let var = influence.iter().map(|v| v * v).sum::<f64>() / (r - 1.0);
    Ok(finish(points, &idx, (var / r).sqrt()))
}

/// One point of the `f_p` proxy against `u` at `β* + u` (size-biased samples).
#[derive(Debug, Clone, Serialize)]
pub struct FpCurvePoint {
    pub u: f64,
    pub beta: f64,
    pub fit: GrowthFit,
}

/// `f_p` proxies along `β* + u` for each `u` in `u_grid`. Illustrative only:
/// `β*` is a computable stand-in for the critical point.
#[allow(clippy::too_many_arguments)]
pub fn fp_proxy_curve(
    law: &DisorderLaw,
    d: usize,
    beta_star: f64,
    u_grid: &[f64],
    p: f64,
    ns: &[usize],
    r: usize,
    seed: u64,
) -> Result<Vec<FpCurvePoint>> {
    u_grid
        .iter()
        .enumerate()
        .map(|(j, &u)| {
            let beta = beta_star + u;
            let fit = crate::moments::fp_growth_fit_spine(law, beta, d, ns, p, r, crate::rng::absorb(seed, j as u64))?;
            Ok(FpCurvePoint { u, beta, fit })
        })
        .collect()
}
