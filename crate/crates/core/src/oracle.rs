//! Exhaustive path enumeration.
//!
//! Exponential cost: `(2d)^n` paths, `(2d)^{2n}` pairs. These are the
//! reference values the fast recursions are tested against, for `n ≤ 6`
//! or so in `d = 1`.

use crate::disorder::DisorderLaw;
use crate::lattice::{collision_gamma, unit_steps};

/// Every nearest-neighbour path of length `n` from the origin, as the list
/// of positions at times `1..=n`.
pub fn paths(d: usize, n: usize) -> Vec<Vec<[i64; 3]>> {
    let steps = unit_steps(d);
    let mut out: Vec<Vec<[i64; 3]>> = vec![Vec::new()];
    for _ in 0..n {
        let mut grown = Vec::with_capacity(out.len() * steps.len());
        for p in &out {
            let last = p.last().copied().unwrap_or([0; 3]);
            for e in &steps {
                let mut q = p.clone();
                q.push([last[0] + e[0], last[1] + e[1], last[2] + e[2]]);
                grown.push(q);
            }
        }
        out = grown;
    }
    out
}

/// Path weight `(2d)^{-n} Π_k ζ(k, π_k)`, truncated to the first `n` steps.
fn weight<Z: Fn(usize, &[i64; 3]) -> f64>(path: &[[i64; 3]], n: usize, d: usize, log_zeta: &Z) -> f64 {
    let lz: f64 = path[..n].iter().enumerate().map(|(k, x)| log_zeta(k + 1, x)).sum();
    (lz - n as f64 * ((2 * d) as f64).ln()).exp()
}

/// `W_n` as a sum over paths.
pub fn partition<Z: Fn(usize, &[i64; 3]) -> f64>(d: usize, n: usize, log_zeta: Z) -> f64 {
    paths(d, n).iter().map(|p| weight(p, n, d, &log_zeta)).sum()
}

/// `Ŵ_n(x)` as a sum over paths ending at `x`.
pub fn point_to_point<Z: Fn(usize, &[i64; 3]) -> f64>(d: usize, n: usize, x: &[i64; 3], log_zeta: Z) -> f64 {
    if n == 0 {
        return if *x == [0; 3] { 1.0 } else { 0.0 };
    }
    paths(d, n)
        .iter()
        .filter(|p| p[n - 1] == *x)
        .map(|p| weight(p, n, d, &log_zeta))
        .sum()
}

/// `EP_n`: for each `k`, the probability that two replicas of the length-`k`
/// polymer in the same environment end at the same site.
pub fn endpoint_overlap<Z: Fn(usize, &[i64; 3]) -> f64>(d: usize, n: usize, log_zeta: Z) -> f64 {
    let mut total = 0.0;
    for k in 1..=n {
        let ps = paths(d, k);
        let w: Vec<f64> = ps.iter().map(|p| weight(p, k, d, &log_zeta)).collect();
        let z: f64 = w.iter().sum();
        let mut same = 0.0;
        for (a, pa) in ps.iter().enumerate() {
            for (b, pb) in ps.iter().enumerate() {
                if pa[k - 1] == pb[k - 1] {
                    same += w[a] * w[b];
                }
            }
        }
        total += same / (z * z);
    }
    total / n as f64
}

/// `OV_n`: expected fraction of times `1..=n` at which two replicas of the
/// length-`n` polymer occupy the same site.
pub fn path_overlap<Z: Fn(usize, &[i64; 3]) -> f64>(d: usize, n: usize, log_zeta: Z) -> f64 {
    let ps = paths(d, n);
    let w: Vec<f64> = ps.iter().map(|p| weight(p, n, d, &log_zeta)).collect();
    let z: f64 = w.iter().sum();
    let mut acc = 0.0;
    for (a, pa) in ps.iter().enumerate() {
        for (b, pb) in ps.iter().enumerate() {
            let shared = pa.iter().zip(pb).filter(|(x, y)| x == y).count();
            acc += w[a] * w[b] * shared as f64;
        }
    }
    acc / (z * z) / n as f64
}

/// `E[W_n²]` as an average of `e^{γ·#collisions}` over all path pairs.
pub fn second_moment(law: &DisorderLaw, beta: f64, d: usize, n: usize) -> f64 {
    let gamma = collision_gamma(law, beta);
    let ps = paths(d, n);
    let mut acc = 0.0;
    for pa in &ps {
        for pb in &ps {
            let c = pa.iter().zip(pb).filter(|(x, y)| x == y).count();
            acc += (gamma * c as f64).exp();
        }
    }
    acc / (ps.len() * ps.len()) as f64
}

/// `𝒵_{v,m}` as a sum over every subset `i_1 < … < i_ℓ = m` of `1..=m`,
/// weight `v^ℓ Π_j 𝒦(i_j − i_{j−1})`, `i_0 = 0`. `kernel[j-1]` is `𝒦(j)`.
pub fn renewal_by_subsets(kernel: &[f64], v: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    // subsets of 1..m-1; m itself is always the last point
    let mut total = 0.0;
    for mask in 0u64..(1u64 << (m - 1)) {
        let mut prev = 0;
        let mut w = 1.0;
        for i in 1..=m {
            if i == m || mask >> (i - 1) & 1 == 1 {
                w *= v * kernel[i - prev - 1];
                prev = i;
            }
        }
        total += w;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_counts() {
        assert_eq!(paths(1, 5).len(), 32);
        assert_eq!(paths(2, 3).len(), 64);
    }

    #[test]
    fn flat_weights() {
        assert!((partition(2, 4, |_, _| 0.0) - 1.0).abs() < 1e-14);
        assert!((endpoint_overlap(1, 1, |_, _| 0.0) - 0.5).abs() < 1e-15);
        assert!((path_overlap(1, 1, |_, _| 0.0) - 0.5).abs() < 1e-15);
        assert!((point_to_point(1, 2, &[0, 0, 0], |_, _| 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn subsets_constant_kernel() {
        // 𝒦 ≡ 1: Σ_ℓ C(m−1, ℓ−1) v^ℓ = v(1+v)^{m−1}
        let k = vec![1.0; 8];
        assert!((renewal_by_subsets(&k, 0.5, 8) - 0.5 * 1.5f64.powi(7)).abs() < 1e-14);
    }
}
