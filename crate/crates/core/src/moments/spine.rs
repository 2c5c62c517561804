//! Size-biased estimation of `E[W_n^p]`.
//!
//! Under `P̃ = W_n·P`, the environment is i.i.d. except along one simple
//! random walk path (the spine), where `ω` follows the tilted law
//! `e^{βω−λ(β)}P(dω)`. Then `E[W_n^p] = Ẽ[W_n^{p−1}]`, whose tails are much
//! lighter than those of `W_n^p` under `P`.

use rand::Rng;

use crate::disorder::{DisorderLaw, Environment};
use crate::error::{Error, Result};
use crate::lattice::unit_steps;
use crate::moments::growth::{fp_fit_weighted, GrowthFit};
use crate::moments::replica::{check_replicas, check_sorted, mean_se, replicate};
use crate::moments::{Functional, MomentEstimate};
use crate::polymer::sweep;
use crate::rng::{absorb, stream};

const SPINE_TAG: u64 = 0x5350_494e_4520_7631;

/// `log W_n` under the size-biased law at each `n` in `ns`, one environment
/// and spine per replica; row `i` is replica `i`.
pub fn spine_log_partitions(
    law: &DisorderLaw,
    beta: f64,
    d: usize,
    ns: &[usize],
    r: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_sorted(ns)?;
    if beta == 0.0 {
        return Ok(vec![vec![0.0; ns.len()]; r]);
    }
    let n_max = *ns.last().unwrap();
    let steps = unit_steps(d);
    let lambda = law.lambda(beta);
    replicate(r, seed, |s| {
        let env = Environment::new(law.clone(), d, n_max, s)?;
        let mut rng = stream(absorb(s, SPINE_TAG), 0);
        let mut spine = vec![[0i64; 3]; n_max + 1];
        let mut tilted = vec![0.0; n_max + 1];
        for k in 1..=n_max {
            let e = steps[rng.random_range(0..steps.len())];
            let x = spine[k - 1];
            spine[k] = [x[0] + e[0], x[1] + e[1], x[2] + e[2]];
            tilted[k] = law.sample_tilted(beta, &mut rng);
        }
        let log_zeta = |k: usize, x: &[i64; 3]| {
            let w = if *x == spine[k] { tilted[k] } else { env.omega(k, x) };
            beta * w - lambda
        };
        let mut out = Vec::with_capacity(ns.len());
        let mut next = 0;
        sweep(d, n_max, log_zeta, |f| {
            while next < ns.len() && ns[next] == f.time() {
                out.push(f.log_partition());
                next += 1;
            }
        });
        Ok(out)
    })
    .into_iter()
    .collect()
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", format!("size-biased estimator needs p ≥ 1, got {p}")));
    }
    Ok(())
}

/// `E[W_n^p]` as the size-biased mean of `W_n^{p−1}`.
pub fn mc_moment_spine(law: &DisorderLaw, beta: f64, d: usize, n: usize, p: f64, r: usize, seed: u64) -> Result<MomentEstimate> {
    check_p(p)?;
    check_replicas(r)?;
    let rows = spine_log_partitions(law, beta, d, &[n], r, seed)?;
    let vals: Vec<f64> = rows.iter().map(|row| ((p - 1.0) * row[0]).exp()).collect();
    let (estimate, stderr) = mean_se(&vals);
    Ok(MomentEstimate {
        functional: Functional::Moment { p },
        estimate,
        stderr,
        replicas: r,
        seed,
        n,
        beta,
        d,
    })
}

/// `f_p` proxy from size-biased samples: slope of `log Ẽ[W_n^{p−1}]`.
pub fn fp_growth_fit_spine(
    law: &DisorderLaw,
    beta: f64,
    d: usize,
    ns: &[usize],
    p: f64,
    r: usize,
    seed: u64,
) -> Result<GrowthFit> {
    check_p(p)?;
    check_replicas(r)?;
    let rows = spine_log_partitions(law, beta, d, ns, r, seed)?;
    fp_fit_weighted(ns, &rows, p - 1.0)
}
