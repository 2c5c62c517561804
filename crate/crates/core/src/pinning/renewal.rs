use serde::Serialize;

use crate::error::{Error, Result};
use crate::pinning::{phi_of_v, KernelTable, PhiSolution};

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log 𝒵_{v,m}` for `m = 0..=n` from `𝒵_m = Σ_{j=1}^m v·𝒦(j)·𝒵_{m−j}`,
/// `𝒵_0 = 1`, in logs. `v = 0` is allowed.
pub fn renewal_log_series(table: &KernelTable, v: f64, n: usize) -> Result<Vec<f64>> {
    if n > table.len() {
        return Err(Error::KernelTooShort {
            available: table.len(),
            required: n,
        });
    }
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::param("v", format!("must be nonnegative, got {v}")));
    }
    let lv = v.ln();
    let lk: Vec<f64> = table.values().iter().map(|k| k.ln()).collect();
    let mut lz = vec![0.0];
    for m in 1..=n {
        let s = log_sum_exp((1..=m).map(|j| lv + lk[j - 1] + lz[m - j]));
        lz.push(s);
    }
    Ok(lz)
}

/// The renewal series `𝒵_{v,m}` and the checks on it.
#[derive(Debug, Clone, Serialize)]
pub struct RenewalBound {
    pub v: f64,
    pub phi: PhiSolution,
    pub n: usize,
    /// `log 𝒵_{v,m}`, `m = 0..=n`.
    pub log_z: Vec<f64>,
    /// Probability that the renewal with step law `K̃_v(j) = v e^{−jφ}𝒦(j)`
    /// visits `m`.
    pub visit: Vec<f64>,
    /// `log Σ_{m≤n} 𝒵_{v,m}`.
    pub log_cumulative: f64,
    /// `max_m (log 𝒵_{v,m} − φm)`; the bound `𝒵_{v,m} ≤ e^{φm}` says `≤ 0`.
    pub max_excess: f64,
    /// `max_m |log 𝒵_{v,m} − φm − log visit_m|` between the two routes.
    pub route_gap: f64,
    /// `Σ_{j≤N} K̃_v(j)` plus the fitted tail: 1 at the root.
    pub tilted_mass: f64,
}

impl RenewalBound {
    pub fn z(&self, m: usize) -> f64 {
        self.log_z[m].exp()
    }

    /// `max_m 𝒵_{v,m} e^{−φm}`.
    pub fn max_ratio(&self) -> f64 {
        self.max_excess.exp()
    }
}

/// `𝒵_{v,m}` for `m ≤ n` by the direct recursion, and again as
/// `e^{φm}·P(visit m)` under the tilted kernel.
pub fn renewal_series(table: &KernelTable, v: f64, n: usize) -> Result<RenewalBound> {
    let phi = phi_of_v(table, v)?;
    let log_z = renewal_log_series(table, v, n)?;
    let f = phi.phi;
    let tilted: Vec<f64> = (1..=table.len())
        .map(|j| v * (-(j as f64) * f).exp() * table.value(j))
        .collect();
    let mut visit = vec![1.0];
    for m in 1..=n {
        let u: f64 = (1..=m).map(|j| tilted[j - 1] * visit[m - j]).sum();
        visit.push(u);
    }
    let mut max_excess = f64::NEG_INFINITY;
    let mut route_gap: f64 = 0.0;
    for m in 0..=n {
        let e = log_z[m] - f * m as f64;
        max_excess = max_excess.max(e);
        route_gap = route_gap.max((e - visit[m].ln()).abs());
    }
    Ok(RenewalBound {
        v,
        n,
        log_cumulative: log_sum_exp(log_z.iter().copied()),
        max_excess,
        route_gap,
        tilted_mass: tilted.iter().sum::<f64>() + v * phi.tail,
        phi,
        log_z,
        visit,
    })
}
