use serde::Serialize;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::moments::replica::{check_replicas, mean_se, replica_log_partitions};
use crate::moments::spine::spine_log_partitions;
use crate::rng::absorb;

/// Multiple of the standard error allowed before an empirical check fails.
pub const SIGMAS: f64 = 4.0;

/// Outcome of a check with a vacuous branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl Verdict {
    pub(crate) fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// `P(Z ≥ θ)` against `(1−θ)^{p/(p−1)} E[Z^p]^{−1/(p−1)}`.
#[derive(Debug, Clone, Serialize)]
pub struct PaleyZygmundReport {
    pub theta: f64,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// Paley–Zygmund in `L^p` on samples of a positive variable. The samples
/// are divided by their mean first.
pub fn paley_zygmund_check(samples: &[f64], theta: f64, p: f64) -> Result<PaleyZygmundReport> {
    if !(0.0 < theta && theta < 1.0) {
        return Err(Error::param("theta", "must lie in (0, 1)"));
    }
    if !(p > 1.0) {
        return Err(Error::param("p", "must exceed 1"));
    }
    if samples.is_empty() || samples.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::param("samples", "need nonnegative samples"));
    }
    let (mean, _) = mean_se(samples);
    let z: Vec<f64> = samples.iter().map(|s| s / mean).collect();
    let hits: Vec<f64> = z.iter().map(|&v| if v >= theta { 1.0 } else { 0.0 }).collect();
    let (lhs, lhs_se) = mean_se(&hits);
    let zp: Vec<f64> = z.iter().map(|v| v.powf(p)).collect();
    let (mp, mp_se) = mean_se(&zp);
    let q = 1.0 / (p - 1.0);
    let rhs = (1.0 - theta).powf(p * q) * mp.powf(-q);
    let rhs_se = rhs * q * mp_se / mp;
    let allowance = SIGMAS * (lhs_se.powi(2) + rhs_se.powi(2)).sqrt();
    Ok(PaleyZygmundReport {
        theta,
        p,
        lhs,
        rhs,
        allowance,
        pass: lhs >= rhs - allowance,
    })
}

/// `φ_K(u)`: `u²/(4K)` up to `K`, then `u − K`.
pub fn phi_k(k: f64, u: f64) -> f64 {
    if u <= k {
        u * u / (4.0 * k)
    } else {
        u - k
    }
}

/// `K = 2e^{λ(β)+λ(−β)}`.
pub fn concentration_constant(law: &DisorderLaw, beta: f64) -> f64 {
    2.0 * (law.lambda(beta) + law.lambda(-beta)).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationRow {
    pub x: f64,
    pub empirical: f64,
    pub bound: f64,
    pub allowance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub k: f64,
    pub n: usize,
    pub rows: Vec<ConcentrationRow>,
    pub pass: bool,
}

/// Upper deviations of `log W_n` about the sample mean against
/// `e^{−n φ_K(x/n)}`.
pub fn concentration_check(log_w: &[f64], law: &DisorderLaw, beta: f64, n: usize, x_grid: &[f64]) -> Result<ConcentrationReport> {
    if log_w.len() < 2 {
        return Err(Error::TooFewReplicas {
            required: 2,
            got: log_w.len(),
        });
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let k = concentration_constant(law, beta);
    let (mean, _) = mean_se(log_w);
    let rows: Vec<ConcentrationRow> = x_grid
        .iter()
        .map(|&x| {
            let hits: Vec<f64> = log_w.iter().map(|l| if l - mean >= x { 1.0 } else { 0.0 }).collect();
            let (q, se) = mean_se(&hits);
            let bound = (-(n as f64) * phi_k(k, x / n as f64)).exp();
            let allowance = SIGMAS * se;
            ConcentrationRow {
                x,
                empirical: q,
                bound,
                allowance,
                pass: q <= bound + allowance,
            }
        })
        .collect();
    Ok(ConcentrationReport {
        k,
        n,
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `(|1+b|^p − 1 − pb) / min(b², |b|^p)`.
pub fn cp_ratio(p: f64, b: f64) -> f64 {
    let num = if b.abs() <= 0.5 {
        // Σ_{k≥2} C(p,k) b^k avoids the cancellation in (1+b)^p − 1 − pb
        let (mut c, mut bk, mut s) = (p * (p - 1.0) / 2.0, b * b, 0.0);
        for k in 2..200 {
            let t = c * bk;
            s += t;
            if t.abs() <= 1e-17 * s.abs() {
                break;
            }
            c *= (p - k as f64) / (k + 1) as f64;
            bk *= b;
        }
        s
    } else {
        (1.0 + b).abs().powf(p) - 1.0 - p * b
    };
    num / (b * b).min(b.abs().powf(p))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `c_p` and `C_p = 1 + 1/c_p` of the martingale-difference estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MartingaleConstant {
    pub p: f64,
    pub c_p: f64,
    pub big_c_p: f64,
    /// Where the infimum is attained; infinite when it is a limit.
    pub argmin_b: f64,
}

/// `c_p = inf_{b≠0} (|1+b|^p − 1 − pb)/min(b², |b|^p)` for `p ∈ (1, 2]`.
///
/// The ratio is searched on the four regimes split at `b = −1, 0, 1`:
/// a log-spaced scan of `|b|` from `1e−6` to `1e6` brackets the minimum of
/// each regime, golden-section refines it, and the limits `p(p−1)/2`
/// (`b → 0`) and `1` (`|b| → ∞`) are included.
pub fn martingale_cp(p: f64) -> Result<MartingaleConstant> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::param("p", format!("must lie in (1, 2], got {p}")));
    }
    let mut best = (f64::INFINITY, p * (p - 1.0) / 2.0);
    let mut consider = |b: f64, v: f64| {
        if v < best.1 {
            best = (b, v);
        }
    };
    consider(f64::INFINITY, 1.0);
    let f = |t: f64| cp_ratio(p, t);
    // t parametrizes |b| on a log scale within each regime
    let regimes: [(f64, f64, f64); 4] = [(-1.0, 1e-6, 1.0), (-1.0, 1.0, 1e6), (1.0, 1e-6, 1.0), (1.0, 1.0, 1e6)];
    for (sign, lo, hi) in regimes {
        let g = |s: f64| f(sign * s.exp());
        let (llo, lhi) = (lo.ln(), hi.ln());
        let m = 2000;
        let mut arg = 0usize;
        let mut val = f64::INFINITY;
        for i in 0..=m {
            let s = llo + (lhi - llo) * i as f64 / m as f64;
            let v = g(s);
            if v < val {
                val = v;
                arg = i;
            }
        }
        let h = (lhi - llo) / m as f64;
        let a = (llo + h * arg.saturating_sub(1) as f64).max(llo);
        let b = (llo + h * (arg + 1) as f64).min(lhi);
        consider(sign * (llo + h * arg as f64).exp(), val);
        let (s, v) = golden_min(g, a, b);
        consider(sign * s.exp(), v);
    }
    let (argmin_b, c_p) = best;
    Ok(MartingaleConstant {
        p,
        c_p,
        big_c_p: 1.0 + 1.0 / c_p,
        argmin_b,
    })
}

/// Hypothesis and conclusion of the martingale-difference estimate on paired
/// samples of `X` and `Y` (with `E[Y | X] = 0` assumed).
#[derive(Debug, Clone, Serialize)]
pub struct IncrementReport {
    pub p: f64,
    /// `E[|X+Y|^p − |X|^p]`
    pub growth: f64,
    /// `E[|X|^p]`
    pub base: f64,
    /// `E[|X+Y|^p − |X|^p] ≤ E[|X|^p]`; the bound is not claimed otherwise.
    pub hypothesis_holds: bool,
    /// `E[|Y|^p]`
    pub lhs: f64,
    /// `C_p E[|X|^p]^{1−p/2} E[|X+Y|^p − |X|^p]^{p/2}`
    pub rhs: f64,
}

pub fn martingale_increment_check(x: &[f64], y: &[f64], p: f64) -> Result<IncrementReport> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::param("samples", "X and Y need equal, nonzero length"));
    }
    let c = martingale_cp(p)?;
    let r = x.len() as f64;
    let base = x.iter().map(|v| v.abs().powf(p)).sum::<f64>() / r;
    let growth = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a + b).abs().powf(p) - a.abs().powf(p))
        .sum::<f64>()
        / r;
    let lhs = y.iter().map(|v| v.abs().powf(p)).sum::<f64>() / r;
    let rhs = c.big_c_p * base.powf(1.0 - p / 2.0) * growth.max(0.0).powf(p / 2.0);
    Ok(IncrementReport {
        p,
        growth,
        base,
        hypothesis_holds: growth <= base,
        lhs,
        rhs,
    })
}

/// `|𝔣| ≤ 2·sqrt(K₁/(p−1)·f_p)` at `β* + u` with finite-`n` proxies
/// `𝔣 ≈ E[log W_n]/n` and `f_p ≈ log E[W_n^p]/n`.
#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    pub beta_star: f64,
    pub u: f64,
    pub p: f64,
    pub n: usize,
    pub replicas: usize,
    pub k1: f64,
    pub free_energy: f64,
    pub free_energy_stderr: f64,
    pub fp: f64,
    pub fp_stderr: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub allowance: f64,
    pub verdict: Verdict,
}

/// `K₁ = 2e^{λ(β*+1)+λ(−β*−1)}`.
pub fn bridge_constant(law: &DisorderLaw, beta_star: f64) -> f64 {
    2.0 * (law.lambda(beta_star + 1.0) + law.lambda(-beta_star - 1.0)).exp()
}

#[allow(clippy::too_many_arguments)]
pub fn bridge_inequality_check(
    law: &DisorderLaw,
    d: usize,
    beta_star: f64,
    p: f64,
    u: f64,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<BridgeReport> {
    if !(p > 1.0) {
        return Err(Error::param("p", "must exceed 1"));
    }
    if !(u > 0.0) {
        return Err(Error::param("u", "must be positive"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    check_replicas(r)?;
    let col = |rows: Vec<Vec<f64>>| rows.into_iter().map(|row| row[0]).collect::<Vec<f64>>();
    let logs = col(replica_log_partitions(law, beta_star + u, d, &[n], r, seed)?);
    let biased = col(spine_log_partitions(law, beta_star + u, d, &[n], r, absorb(seed, 1))?);
    Ok(bridge_from_logs(law, beta_star, p, u, n, &logs, &biased))
}

/// [`bridge_inequality_check`] on precomputed samples at `β* + u`: `log W_n`
/// under `P` for the free energy, and under the size-biased law for `f_p`
/// (`E[W_n^p] = Ẽ[W_n^{p−1}]`).
pub fn bridge_from_logs(
    law: &DisorderLaw,
    beta_star: f64,
    p: f64,
    u: f64,
    n: usize,
    logs: &[f64],
    biased: &[f64],
) -> BridgeReport {
    let nf = n as f64;
    let k1 = bridge_constant(law, beta_star);
    let (lm, lm_se) = mean_se(logs);
    let pw: Vec<f64> = biased.iter().map(|l| ((p - 1.0) * l).exp()).collect();
    let (m, m_se) = mean_se(&pw);
    let free_energy = lm / nf;
    let free_energy_stderr = lm_se / nf;
    let fp = m.ln() / nf;
    let fp_stderr = m_se / m / nf;
    let lhs = free_energy.abs();
    let (rhs, allowance, verdict) = if fp > 0.0 {
        let rhs = 2.0 * (k1 / (p - 1.0) * fp).sqrt();
        let d_rhs = rhs / (2.0 * fp);
        let allowance = SIGMAS * (free_energy_stderr.powi(2) + (d_rhs * fp_stderr).powi(2)).sqrt();
        (rhs, allowance, Verdict::from_bool(lhs <= rhs + allowance))
    } else {
        (0.0, 0.0, Verdict::Skip)
    };
    BridgeReport {
        beta_star,
        u,
        p,
        n,
        replicas: logs.len(),
        k1,
        free_energy,
        free_energy_stderr,
        fp,
        fp_stderr,
        lhs,
        rhs,
        allowance,
        verdict,
    }
}
