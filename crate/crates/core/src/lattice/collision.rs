//! Return probabilities of the two-replica difference walk, the collision
//! sum `S_∞ = Σ_{n≥1} P(Y_n = 0)`, and the L² threshold `β₂`.

use serde::Serialize;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::lattice::ConeBox;

/// Hard cap on `n_max` when `beta2_bound` refines the collision sum.
pub const MAX_COLLISION_HORIZON: usize = 40_000;

/// Law of `Y_1 = e − e'` for two independent nearest-neighbour steps.
#[derive(Debug, Clone)]
pub struct DifferenceKernel {
    d: usize,
    entries: Vec<([i64; 3], f64)>,
}

impl DifferenceKernel {
    /// Enumerates the `(2d)²` step pairs and merges equal displacements.
    pub fn new(d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::param("d", format!("difference kernel supports d = 1..=3, got {d}")));
        }
        let steps = unit_steps(d);
        let w = 1.0 / (steps.len() * steps.len()) as f64;
        let mut entries: Vec<([i64; 3], f64)> = Vec::new();
        for a in &steps {
            for b in &steps {
                let z = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                match entries.iter_mut().find(|(y, _)| *y == z) {
                    Some(e) => e.1 += w,
                    None => entries.push((z, w)),
                }
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { d, entries })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[([i64; 3], f64)] {
        &self.entries
    }

    pub fn prob(&self, z: &[i64; 3]) -> f64 {
        self.entries.iter().find(|(y, _)| y == z).map_or(0.0, |e| e.1)
    }
}

pub(crate) fn unit_steps(d: usize) -> Vec<[i64; 3]> {
    (0..d)
        .flat_map(|i| {
            let mut e = [0i64; 3];
            e[i] = 1;
            let mut f = [0i64; 3];
            f[i] = -1;
            [e, f]
        })
        .collect()
}

/// `P(Y_n = 0)` for `n = 0..=n_max` by iterating the difference kernel on a
/// dense box. Cost grows like `n^{d+1}`; meant as a cross-check for small `n`.
pub fn return_probabilities_dense(d: usize, n_max: usize) -> Result<Vec<f64>> {
    let kernel = DifferenceKernel::new(d)?;
    // Y_n lives on even-parity sites with |y|₁ ≤ 2n
    let geom = ConeBox::new(d, 2 * n_max + 2);
    let offs: Vec<(isize, f64)> = kernel
        .entries()
        .iter()
        .map(|(z, p)| {
            let shift = (0..d).map(|i| z[i] as isize * stride(&geom, i)).sum::<isize>();
            (shift, *p)
        })
        .collect();
    let origin = geom.index(&[0, 0, 0]);
    let mut cur = vec![0.0; geom.len()];
    let mut next = vec![0.0; geom.len()];
    cur[origin] = 1.0;
    let mut out = vec![1.0];
    for n in 1..=n_max {
        next.iter_mut().for_each(|v| *v = 0.0);
        geom.for_each_site(2 * n, |i, _| {
            next[i] = offs.iter().map(|&(o, p)| p * cur[(i as isize - o) as usize]).sum();
        });
        std::mem::swap(&mut cur, &mut next);
        out.push(cur[origin]);
    }
    Ok(out)
}

fn stride(geom: &ConeBox, axis: usize) -> isize {
    let mut x = [0i64; 3];
    x[axis] = 1;
    (geom.index(&x) - geom.index(&[0, 0, 0])) as isize
}

/// `P(Y_n = 0) = P(X_{2n} = 0)` for `n = 0..=n_max`, from the one-dimensional
/// return probabilities by splitting the `2n` steps among coordinates.
pub fn return_probabilities(d: usize, n_max: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&d) {
        return Err(Error::param("d", format!("supported dimensions are 1..=3, got {d}")));
    }
    let m = 2 * n_max;
    let mut ln_fact = Vec::with_capacity(m + 1);
    ln_fact.push(0.0f64);
    for k in 1..=m {
        ln_fact.push(ln_fact[k - 1] + (k as f64).ln());
    }
    // ln P(1d walk at 0 after 2j steps)
    let ln_p1: Vec<f64> = (0..=n_max)
        .map(|j| ln_fact[2 * j] - 2.0 * ln_fact[j] - 2.0 * j as f64 * std::f64::consts::LN_2)
        .collect();
    let out = match d {
        1 => ln_p1.iter().map(|l| l.exp()).collect(),
        2 => ln_p1.iter().map(|l| (2.0 * l).exp()).collect(),
        _ => {
            let (l13, l23) = ((1.0f64 / 3.0).ln(), (2.0f64 / 3.0).ln());
            (0..=n_max)
                .map(|n| {
                    // 2j of the 2n steps go to the first axis; j concentrates near n/3
                    let half = 12.0 * (n as f64).sqrt() + 10.0;
                    let lo = ((n as f64 / 3.0 - half).floor().max(0.0)) as usize;
                    let hi = ((n as f64 / 3.0 + half).ceil() as usize).min(n);
                    (lo..=hi)
                        .map(|j| {
                            let k = n - j;
                            let ln_binom = ln_fact[2 * n] - ln_fact[2 * j] - ln_fact[2 * k];
                            (ln_binom + 2.0 * j as f64 * l13 + 2.0 * k as f64 * l23 + ln_p1[j] + 2.0 * ln_p1[k]).exp()
                        })
                        .sum()
                })
                .collect()
        }
    };
    Ok(out)
}

/// Partial sums of difference-walk return probabilities, with a tail
/// completion for transient dimensions.
#[derive(Debug, Clone, Serialize)]
pub struct CollisionSum {
    pub d: usize,
    pub n_max: usize,
    /// `P(Y_n = 0)` for `n = 1..=n_max` (index `n-1`).
    pub returns: Vec<f64>,
    /// `S_n` for `n = 1..=n_max` (index `n-1`).
    pub partial: Vec<f64>,
    pub tail: Option<TailBand>,
}

/// Tail `Σ_{n>N} P(Y_n=0)` modelled as `c·n^{-d/2}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailBand {
    /// Last-decade least-squares fit of `c`.
    pub c_fit: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl CollisionSum {
    pub fn s_n(&self) -> f64 {
        self.partial.last().copied().unwrap_or(0.0)
    }

    /// `S_∞` estimate; `None` when the walk is recurrent.
    pub fn s_infty(&self) -> Option<f64> {
        self.tail.map(|t| self.s_n() + t.estimate)
    }

    /// Certified interval for `S_∞`.
    pub fn s_infty_band(&self) -> Option<(f64, f64)> {
        self.tail.map(|t| (self.s_n() + t.lower, self.s_n() + t.upper))
    }
}

/// Computes `S_{n_max}` and, for `d ≥ 3`, the tail band.
///
/// The tail constant is bracketed by the extremes of `P(Y_n=0)·n^{d/2}` over
/// the last decade together with the local-limit constant `2(d/4π)^{d/2}`;
/// the power sum is bracketed by the integrals over `[N+1,∞)` and `[N,∞)`.
pub fn collision_sum(d: usize, n_max: usize) -> Result<CollisionSum> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let probs = return_probabilities(d, n_max)?;
    let returns = probs[1..].to_vec();
    let mut partial = Vec::with_capacity(n_max);
    let mut s = 0.0;
    for &q in &returns {
        s += q;
        partial.push(s);
    }
    let tail = (d >= 3 && n_max >= 10).then(|| tail_band(d, &returns));
    Ok(CollisionSum {
        d,
        n_max,
        returns,
        partial,
        tail,
    })
}

fn tail_band(d: usize, returns: &[f64]) -> TailBand {
    let n_max = returns.len();
    let a = d as f64 / 2.0;
    let start = (n_max / 10).max(1);
    let (mut c_min, mut c_max) = (f64::INFINITY, 0.0f64);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for n in start..=n_max {
        let x = (n as f64).powf(-a);
        let y = returns[n - 1];
        let c = y / x;
        c_min = c_min.min(c);
        c_max = c_max.max(c);
        sxy += x * y;
        sxx += x * x;
    }
    let c_llt = 2.0 * (d as f64 / (4.0 * std::f64::consts::PI)).powf(a);
    c_min = c_min.min(c_llt);
    c_max = c_max.max(c_llt);
    let c_fit = sxy / sxx;
    let nn = n_max as f64;
    let int_from = |x: f64| x.powf(1.0 - a) / (a - 1.0);
    // Euler–Maclaurin: Σ_{n>N} n^{-a} ≈ ∫_N^∞ − f(N)/2 − f'(N)/12
    let em = int_from(nn) - 0.5 * nn.powf(-a) + a * nn.powf(-a - 1.0) / 12.0;
    TailBand {
        c_fit,
        c_min,
        c_max,
        estimate: c_fit * em,
        lower: c_min * int_from(nn + 1.0),
        upper: c_max * int_from(nn),
    }
}

/// Result of `beta2_bound`.
#[derive(Debug, Clone, Serialize)]
pub struct Beta2Report {
    pub d: usize,
    /// Set when the collision sum diverges (`d ≤ 2`); `beta2` is then 0.
    pub diverges: bool,
    pub n_max: usize,
    pub s_partial: f64,
    pub s_infty: f64,
    pub s_tail_bound: f64,
    pub s_lower: f64,
    pub s_upper: f64,
    /// `γ* = log(1 + 1/S_∞)`; the L² region is `λ(2β) − 2λ(β) < γ*`.
    pub gamma_threshold: f64,
    /// `f64::INFINITY` when `λ(2β) − 2λ(β)` never reaches `γ*`.
    pub beta2: f64,
    pub beta2_lower: f64,
    pub beta2_upper: f64,
}

const BETA_CAP: f64 = 1e3;

/// `γ(β) = λ(2β) − 2λ(β)`, the log of `E[ζ_β²]`.
pub fn collision_gamma(law: &DisorderLaw, beta: f64) -> f64 {
    law.lambda(2.0 * beta) - 2.0 * law.lambda(beta)
}

/// Largest `β` with `γ(β) ≤ target`, by bisection; infinite if `γ` stays below.
fn invert_gamma(law: &DisorderLaw, target: f64) -> f64 {
    let mut hi = 1.0;
    while collision_gamma(law, hi) < target {
        hi *= 2.0;
        if hi > BETA_CAP {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if collision_gamma(law, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The L² threshold `β₂ = sup{β : (e^{γ(β)} − 1)·S_∞ < 1}` to tolerance `tol`.
///
/// The collision sum starts at `n_max = 10⁴` and doubles while the band on
/// `β₂` induced by the tail band is wider than `tol`.
pub fn beta2_bound(law: &DisorderLaw, d: usize, tol: f64) -> Result<Beta2Report> {
    beta2_bound_from(law, d, tol, 10_000)
}

pub fn beta2_bound_from(law: &DisorderLaw, d: usize, tol: f64, n_start: usize) -> Result<Beta2Report> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    if !(1..=3).contains(&d) {
        return Err(Error::param("d", format!("supported dimensions are 1..=3, got {d}")));
    }
    if d <= 2 {
        return Ok(Beta2Report {
            d,
            diverges: true,
            n_max: 0,
            s_partial: f64::INFINITY,
            s_infty: f64::INFINITY,
            s_tail_bound: f64::INFINITY,
            s_lower: f64::INFINITY,
            s_upper: f64::INFINITY,
            gamma_threshold: 0.0,
            beta2: 0.0,
            beta2_lower: 0.0,
            beta2_upper: 0.0,
        });
    }
    let mut n_max = n_start.max(10);
    loop {
        let cs = collision_sum(d, n_max)?;
        let s = cs.s_infty().expect("d >= 3 has a tail");
        let (s_lo, s_hi) = cs.s_infty_band().expect("d >= 3 has a tail");
        let gamma_of = |s: f64| (1.0 + 1.0 / s).ln();
        let beta2 = invert_gamma(law, gamma_of(s));
        // larger S means a smaller threshold
        let beta2_lower = invert_gamma(law, gamma_of(s_hi));
        let beta2_upper = invert_gamma(law, gamma_of(s_lo));
        let width = if beta2_upper.is_infinite() && beta2_lower.is_infinite() {
            0.0
        } else {
            beta2_upper - beta2_lower
        };
        if width <= tol {
            let t = cs.tail.expect("d >= 3 has a tail");
            return Ok(Beta2Report {
                d,
                diverges: false,
                n_max,
                s_partial: cs.s_n(),
                s_infty: s,
                s_tail_bound: t.upper,
                s_lower: s_lo,
                s_upper: s_hi,
                gamma_threshold: gamma_of(s),
                beta2,
                beta2_lower,
                beta2_upper,
            });
        }
        if 2 * n_max > MAX_COLLISION_HORIZON {
            return Err(Error::CollisionSumNotConverged { width, tolerance: tol });
        }
        n_max *= 2;
    }
}
