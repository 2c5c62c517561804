use rayon::prelude::*;
use serde::Serialize;

use crate::disorder::{DisorderLaw, Environment};
use crate::error::{Error, Result};
use crate::polymer::{env_log_zeta, sweep, WeightField};
use crate::rng::replica_seed;

/// Runs `f` on replicas `0..r`, each with its own seed derived from
/// `master`. Output is in replica order whatever the thread count.
pub fn replicate<T, F>(r: usize, master: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..r as u64).into_par_iter().map(|i| f(replica_seed(master, i))).collect()
}

/// Sweeps one environment to `max(ns)` and records `observe(field)` at each
/// time in `ns` (sorted ascending).
pub fn observe_at<T, O>(law: &DisorderLaw, beta: f64, d: usize, ns: &[usize], seed: u64, mut observe: O) -> Result<Vec<T>>
where
    O: FnMut(&WeightField) -> T,
{
    let n_max = ns.last().copied().unwrap_or(0);
    let env = Environment::new(law.clone(), d, n_max, seed)?;
    let mut out = Vec::with_capacity(ns.len());
    let mut next = 0;
    sweep(d, n_max, env_log_zeta(&env, beta), |f| {
        while next < ns.len() && ns[next] == f.time() {
            out.push(observe(f));
            next += 1;
        }
    });
    Ok(out)
}

/// `log W_n` at each `n` in `ns` for replicas `0..r`; row `i` is replica `i`.
pub fn replica_log_partitions(
    law: &DisorderLaw,
    beta: f64,
    d: usize,
    ns: &[usize],
    r: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_sorted(ns)?;
    if beta == 0.0 {
        // ζ ≡ 1 and the walk kernel conserves mass: W_n = 1 identically
        return Ok(vec![vec![0.0; ns.len()]; r]);
    }
    replicate(r, seed, |s| observe_at(law, beta, d, ns, s, |f| f.log_partition()))
        .into_iter()
        .collect()
}

pub(crate) fn check_sorted(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::param("n_list", "must not be empty"));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n_list", "must be strictly increasing"));
    }
    Ok(())
}

pub(crate) fn check_replicas(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::TooFewReplicas { required: 2, got: r });
    }
    Ok(())
}

/// What a [`MomentEstimate`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Functional {
    /// `E[W_n^p]`
    Moment { p: f64 },
    /// `E[log W_n]`
    LogMean,
    /// `P(W_n ≥ threshold)`
    Tail { threshold: f64 },
}

impl Functional {
    pub fn tag(&self) -> &'static str {
        match self {
            Functional::Moment { .. } => "moment",
            Functional::LogMean => "log_mean",
            Functional::Tail { .. } => "tail",
        }
    }
}

/// Monte Carlo estimate over independent environments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub functional: Functional,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub seed: u64,
    pub n: usize,
    pub beta: f64,
    pub d: usize,
}

/// Sample mean and standard error of the mean, summed in index order.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

pub(crate) fn estimate_from(
    functional: Functional,
    logs: &[f64],
    meta: (u64, usize, f64, usize),
) -> MomentEstimate {
    let values: Vec<f64> = match functional {
        Functional::Moment { p } => logs.iter().map(|l| (p * l).exp()).collect(),
        Functional::LogMean => logs.to_vec(),
        Functional::Tail { threshold } => logs
            .iter()
            .map(|l| if l.exp() >= threshold { 1.0 } else { 0.0 })
            .collect(),
    };
    let (estimate, stderr) = mean_se(&values);
    let (seed, n, beta, d) = meta;
    MomentEstimate {
        functional,
        estimate,
        stderr,
        replicas: logs.len(),
        seed,
        n,
        beta,
        d,
    }
}

/// `E[W_n^p]` over `r` environments, via `exp(p·log W_n)`.
pub fn mc_moment(law: &DisorderLaw, beta: f64, d: usize, n: usize, p: f64, r: usize, seed: u64) -> Result<MomentEstimate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param("p", format!("must be positive, got {p}")));
    }
    mc_functional(law, beta, d, n, Functional::Moment { p }, r, seed)
}

/// Any [`Functional`] of `W_n` over `r` environments.
pub fn mc_functional(
    law: &DisorderLaw,
    beta: f64,
    d: usize,
    n: usize,
    functional: Functional,
    r: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    check_replicas(r)?;
    let logs: Vec<f64> = replica_log_partitions(law, beta, d, &[n], r, seed)?
        .into_iter()
        .map(|row| row[0])
        .collect();
    Ok(estimate_from(functional, &logs, (seed, n, beta, d)))
}

/// `E[W_n^p]` for each `n` in `ns`, on common environments.
pub fn mc_moment_series(
    law: &DisorderLaw,
    beta: f64,
    d: usize,
    ns: &[usize],
    p: f64,
    r: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    check_replicas(r)?;
    let rows = replica_log_partitions(law, beta, d, ns, r, seed)?;
    Ok(ns
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let logs: Vec<f64> = rows.iter().map(|row| row[j]).collect();
            estimate_from(Functional::Moment { p }, &logs, (seed, n, beta, d))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_and_time_zero() {
        let e = mc_moment(&DisorderLaw::Gaussian, 0.0, 2, 10, 1.5, 20, 1).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.stderr, 0.0);
        let e = mc_moment(&DisorderLaw::Gaussian, 1.0, 2, 0, 1.5, 20, 1).unwrap();
        assert_eq!(e.estimate, 1.0);
    }

    #[test]
    fn too_few_replicas() {
        assert!(matches!(
            mc_moment(&DisorderLaw::Gaussian, 1.0, 1, 4, 2.0, 1, 0),
            Err(Error::TooFewReplicas { .. })
        ));
    }

    #[test]
    fn deterministic_and_thread_count_free() {
        let a = mc_moment(&DisorderLaw::Gaussian, 0.8, 1, 20, 1.3, 64, 99).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| mc_moment(&DisorderLaw::Gaussian, 0.8, 1, 20, 1.3, 64, 99).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    }

    #[test]
    fn series_rows_follow_replicas() {
        let ns = [2, 5, 9];
        let rows = replica_log_partitions(&DisorderLaw::Rademacher, 0.7, 2, &ns, 5, 3).unwrap();
        assert_eq!(rows.len(), 5);
        let single = replica_log_partitions(&DisorderLaw::Rademacher, 0.7, 2, &[9], 5, 3).unwrap();
        for (row, s) in rows.iter().zip(&single) {
            assert_eq!(row[2], s[0]);
        }
        assert!(replica_log_partitions(&DisorderLaw::Rademacher, 0.7, 2, &[5, 2], 5, 3).is_err());
    }
}
