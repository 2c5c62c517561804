use serde::Serialize;

use crate::disorder::Environment;
use crate::error::{Error, Result};
use crate::lattice::ConeBox;
use crate::polymer::field::{check_horizon, env_log_zeta, WeightField};

/// Largest tolerated `|Σ_x m_k(x) − 1|` before the path overlap is rejected.
pub const MARGINAL_TOLERANCE: f64 = 1e-8;

/// Endpoint coincidences and path overlaps of one polymer.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub n: usize,
    pub log_w: f64,
    /// `log B_{0,n}(0)`, i.e. `log W_n` recomputed by the backward pass.
    pub log_w_backward: Option<f64>,
    /// `c_k = Σ_x (Ŵ_k(x)/W_k)²` for `k = 1..=n`.
    pub coincidence: Vec<f64>,
    pub ep: f64,
    /// `o_k = Σ_x m_k(x)²` for `k = 1..=n`, present when the backward pass ran.
    pub overlap: Option<Vec<f64>>,
    pub ov: Option<f64>,
    /// Largest `|Σ_x m_k(x) − 1|` seen.
    pub max_marginal_error: Option<f64>,
}

fn cesaro(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// `EP_n` from a single forward sweep.
pub fn endpoint_overlap_with<Z>(d: usize, n: usize, log_zeta: Z) -> Result<LocalizationReport>
where
    Z: Fn(usize, &[i64; 3]) -> f64,
{
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let mut coincidence = Vec::with_capacity(n);
    let field = crate::polymer::sweep(d, n, log_zeta, |f| {
        if f.time() > 0 {
            coincidence.push(f.coincidence());
        }
    });
    Ok(LocalizationReport {
        n,
        log_w: field.log_partition(),
        log_w_backward: None,
        ep: cesaro(&coincidence),
        coincidence,
        overlap: None,
        ov: None,
        max_marginal_error: None,
    })
}

/// `EP_n` and `OV_n`. The time-`k` marginals of the length-`n` polymer come
/// from `m_k(x) = Ŵ_k(x)·B_{k,n}(x)/W_n`; forward slices are recomputed
/// from checkpoints every `⌈√n⌉` steps instead of being stored.
pub fn path_overlap_with<Z>(d: usize, n: usize, log_zeta: Z) -> Result<LocalizationReport>
where
    Z: Fn(usize, &[i64; 3]) -> f64,
{
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let block = (n as f64).sqrt().ceil() as usize;
    let mut checkpoints: Vec<WeightField> = Vec::new();
    let mut coincidence = Vec::with_capacity(n);
    let mut field = WeightField::origin(d, n);
    let mut scratch = Vec::new();
    checkpoints.push(field.clone());
    for k in 1..=n {
        field.forward_step(&mut scratch, &log_zeta);
        coincidence.push(field.coincidence());
        if k % block == 0 && k < n {
            checkpoints.push(field.clone());
        }
    }
    let log_w = field.log_partition();
    let geom = field.geometry().clone();
    drop(field);

    let mut back = vec![f64::NEG_INFINITY; geom.len()];
    let mut back_next = vec![f64::NEG_INFINITY; geom.len()];
    geom.for_each_site(n, |i, _| back[i] = 0.0);
    let mut overlap = vec![0.0; n];
    let mut worst = 0.0f64;

    for (j, cp) in checkpoints.iter().enumerate().rev() {
        let start = j * block;
        let end = ((j + 1) * block).min(n);
        // forward log slices for k in start+1..=end
        let mut slices: Vec<Vec<f64>> = Vec::with_capacity(end - start);
        let mut f = cp.clone();
        let mut scratch = Vec::new();
        for _ in start + 1..=end {
            f.forward_step(&mut scratch, &log_zeta);
            let mut s = Vec::with_capacity(geom.slice_size(f.time()));
            f.for_each_log(|_, lw| s.push(lw));
            slices.push(s);
        }
        for k in (start + 1..=end).rev() {
            let fwd = &slices[k - start - 1];
            let (mut total, mut sq) = (0.0, 0.0);
            let mut c = 0;
            geom.for_each_site(k, |i, _| {
                let m = (fwd[c] + back[i] - log_w).exp();
                c += 1;
                total += m;
                sq += m * m;
            });
            let dev = (total - 1.0).abs();
            worst = worst.max(dev);
            if !(dev <= MARGINAL_TOLERANCE) {
                return Err(Error::MarginalNormalization { time: k, deviation: dev });
            }
            overlap[k - 1] = sq;
            backward_step(&geom, k, &back, &mut back_next, &log_zeta);
            std::mem::swap(&mut back, &mut back_next);
        }
    }

    Ok(LocalizationReport {
        n,
        log_w,
        log_w_backward: Some(back[geom.index(&[0, 0, 0])]),
        ep: cesaro(&coincidence),
        coincidence,
        ov: Some(cesaro(&overlap)),
        overlap: Some(overlap),
        max_marginal_error: Some(worst),
    })
}

/// `log B_{k-1}` from `log B_k`:
/// `B_{k-1}(x) = (1/2d) Σ_e ζ(k, x+e) B_k(x+e)`.
fn backward_step<Z>(geom: &ConeBox, k: usize, back: &[f64], out: &mut [f64], log_zeta: &Z)
where
    Z: Fn(usize, &[i64; 3]) -> f64,
{
    let mut g = back.to_vec();
    geom.for_each_site(k, |i, x| g[i] += log_zeta(k, x));
    let offs = geom.neighbour_offsets();
    let ln_inv = -((offs.len() as f64).ln());
    geom.for_each_site(k - 1, |i, _| {
        let mut m = f64::NEG_INFINITY;
        for &o in &offs {
            m = m.max(g[(i as isize + o) as usize]);
        }
        let s: f64 = offs.iter().map(|&o| (g[(i as isize + o) as usize] - m).exp()).sum();
        out[i] = m + s.ln() + ln_inv;
    });
}

pub fn endpoint_overlap(env: &Environment, beta: f64, n: usize) -> Result<LocalizationReport> {
    check_horizon(env, n)?;
    endpoint_overlap_with(env.dim(), n, env_log_zeta(env, beta))
}

pub fn path_overlap(env: &Environment, beta: f64, n: usize) -> Result<LocalizationReport> {
    check_horizon(env, n)?;
    path_overlap_with(env.dim(), n, env_log_zeta(env, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample_environment, DisorderLaw};
    use crate::lattice::WalkSlice;

    #[test]
    fn one_step_at_beta_zero() {
        let env = sample_environment(&DisorderLaw::Gaussian, 1, 1, 0).unwrap();
        let r = path_overlap(&env, 0.0, 1).unwrap();
        assert!((r.ep - 0.5).abs() < 1e-15);
        assert!((r.ov.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn beta_zero_reduces_to_walk() {
        for d in 1..=3 {
            let n = 12;
            let env = sample_environment(&DisorderLaw::Gaussian, d, n, 0).unwrap();
            let r = path_overlap(&env, 0.0, n).unwrap();
            let mut walk = WalkSlice::origin(d, n).unwrap();
            let mut scratch = Vec::new();
            let mut want = 0.0;
            for _ in 0..n {
                walk.step_in_place(&mut scratch);
                want += walk.power_sum(2.0);
            }
            want /= n as f64;
            assert!((r.ep - want).abs() < 1e-13);
            // under β = 0 the time-k marginal of the path is the walk law
            assert!((r.ov.unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn forward_backward_partition_matches_direct() {
        for (d, n) in [(1, 64), (2, 64)] {
            let env = sample_environment(&DisorderLaw::Gaussian, d, n, 11).unwrap();
            let r = path_overlap(&env, 1.0, n).unwrap();
            let direct = crate::polymer::point_to_point(&env, 1.0, n).unwrap().log_partition();
            let w_back = r.log_w_backward.unwrap().exp();
            assert!((w_back - direct.exp()).abs() < 1e-10 * direct.exp().max(1.0));
            assert!(r.max_marginal_error.unwrap() < MARGINAL_TOLERANCE);
            let e = endpoint_overlap(&env, 1.0, n).unwrap();
            assert_eq!(e.ep, r.ep);
        }
    }

    #[test]
    fn block_edges_are_consistent() {
        // n a perfect square and off by one on either side
        for n in [15, 16, 17] {
            let env = sample_environment(&DisorderLaw::Rademacher, 2, n, 5).unwrap();
            let r = path_overlap(&env, 0.8, n).unwrap();
            let o = r.overlap.unwrap();
            assert!(o.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
            // the last marginal is the endpoint law
            assert!((o[n - 1] - r.coincidence[n - 1]).abs() < 1e-12);
        }
    }
}
