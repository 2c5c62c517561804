use serde::Serialize;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::moments::{mc_moment_spine, Verdict, SIGMAS};
use crate::pinning::kernel::kernel_and_moments_mc;
use crate::pinning::{kernel_exact_beta0, renewal_log_series, KernelTable};
use crate::rng::absorb;

/// Left and right sides of the renewal upper bound on `E[W_n^p]` at
/// `β = √(β_base² + u)`, Gaussian disorder.
#[derive(Debug, Clone, Serialize)]
pub struct ChaosReport {
    pub d: usize,
    pub beta_base: f64,
    pub beta: f64,
    pub u: f64,
    pub p: f64,
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
    /// `(2u)^{p/2}`
    pub v: f64,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    pub allowance: f64,
    /// Kernels and base moments are exact (`β_base = 0`).
    pub exact_base: bool,
    pub verdict: Verdict,
}

/// `Σ_{m=0}^n 𝒵_{v,m}·M_{n−m}` with `M_0 = 1`.
fn rhs_value(table: &KernelTable, v: f64, n: usize, moments: &[f64]) -> Result<f64> {
    let lz = renewal_log_series(table, v, n)?;
    Ok((0..=n).map(|m| lz[m].exp() * moments[n - m]).sum())
}

/// Compares a Monte Carlo `E[(W_n^β)^p]` with
/// `Σ_{m≤n} 𝒵_{v,m} E[(W_{n−m}^{β_base})^p]`, `v = (2u)^{p/2}`, kernels at
/// `β_base`. PASS iff the left side is at most the right side plus
/// `SIGMAS` combined standard errors. The left side uses the size-biased
/// estimator, which does not miss the rare environments that carry `E[W^p]`.
///
/// At `β_base = 0` the right side is exact. Otherwise kernels and base
/// moments come from `r` further environments, and the right-side error adds
/// the moment errors linearly and the first-order kernel errors in absolute
/// value.
pub fn chaos_upper_bound_check(beta_base: f64, u: f64, p: f64, d: usize, n: usize, r: usize, seed: u64) -> Result<ChaosReport> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::param("p", format!("must lie in (1, 2], got {p}")));
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::param("u", format!("must be nonnegative, got {u}")));
    }
    if !(beta_base >= 0.0 && beta_base.is_finite()) {
        return Err(Error::param("beta_base", "must be nonnegative and finite"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let law = DisorderLaw::Gaussian;
    let beta = (beta_base * beta_base + u).sqrt();
    let v = (2.0 * u).powf(p / 2.0);
    let left = mc_moment_spine(&law, beta, d, n, p, r, absorb(seed, 0))?;

    let exact_base = beta_base == 0.0;
    let (table, moments, moment_se) = if exact_base {
        (kernel_exact_beta0(d, p, n)?, vec![1.0; n + 1], vec![0.0; n + 1])
    } else {
        let (t, ms) = kernel_and_moments_mc(&law, beta_base, d, p, n, r, absorb(seed, 1))?;
        let mut m = vec![1.0];
        let mut se = vec![0.0];
        for (a, b) in ms {
            m.push(a);
            se.push(b);
        }
        (t, m, se)
    };
    let rhs = rhs_value(&table, v, n, &moments)?;
    let mut rhs_stderr = 0.0;
    if !exact_base {
        let lz = renewal_log_series(&table, v, n)?;
        rhs_stderr += (0..=n).map(|m| lz[m].exp() * moment_se[n - m]).sum::<f64>();
        for j in 1..=n {
            let se = table.stderr(j);
            if se == 0.0 {
                continue;
            }
            let mut vals = table.values().to_vec();
            vals[j - 1] += se;
            let bumped = KernelTable::new(table.meta, vals, vec![0.0; table.len()])?;
            rhs_stderr += (rhs_value(&bumped, v, n, &moments)? - rhs).abs();
        }
    }
    let allowance = SIGMAS * (left.stderr.powi(2) + rhs_stderr.powi(2)).sqrt();
    Ok(ChaosReport {
        d,
        beta_base,
        beta,
        u,
        p,
        n,
        replicas: r,
        seed,
        v,
        lhs: left.estimate,
        lhs_stderr: left.stderr,
        rhs,
        rhs_stderr,
        allowance,
        exact_base,
        verdict: Verdict::from_bool(left.estimate <= rhs + allowance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_u_reduces_to_base_moment() {
        let r = chaos_upper_bound_check(0.0, 0.0, 1.5, 1, 8, 10, 1).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.rhs, 1.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn small_case_passes() {
        let r = chaos_upper_bound_check(0.0, 0.1, 1.5, 1, 12, 2000, 3).unwrap();
        assert!(r.lhs < r.rhs, "{r:?}");
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn nonzero_base_has_errors() {
        let r = chaos_upper_bound_check(0.3, 0.05, 1.5, 1, 6, 200, 9).unwrap();
        assert!(r.rhs_stderr > 0.0);
        assert!(!r.exact_base);
    }

    #[test]
    fn parameter_checks() {
        assert!(chaos_upper_bound_check(0.0, 0.1, 2.5, 1, 4, 10, 0).is_err());
        assert!(chaos_upper_bound_check(0.0, -0.1, 1.5, 1, 4, 10, 0).is_err());
    }
}
