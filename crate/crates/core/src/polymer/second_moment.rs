use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::lattice::{collision_gamma, ConeBox, DifferenceKernel};

/// `log E[W_n²]`.
///
/// `E[W_n²] = E^{⊗2}[e^{γ N_n}]` with `γ = λ(2β) − 2λ(β)` and `N_n` the number
/// of collisions of two independent walks up to time `n`. The difference walk
/// is propagated on a dense box, weighting the origin by `e^γ` after every
/// step; each slice is rescaled to unit mass and the scales accumulated in logs.
pub fn log_second_moment_exact(law: &DisorderLaw, beta: f64, d: usize, n: usize) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::param("beta", "must be finite"));
    }
    let kernel = DifferenceKernel::new(d)?;
    if n == 0 {
        return Ok(0.0);
    }
    let gamma = collision_gamma(law, beta);
    if !gamma.is_finite() {
        return Err(Error::param("beta", "λ(2β) is not finite"));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let e_gamma = gamma.exp();
    let geom = ConeBox::new(d, 2 * n + 2);
    let offs: Vec<(isize, f64)> = kernel
        .entries()
        .iter()
        .map(|(z, p)| {
            let shift = geom.index(z) as isize - geom.index(&[0, 0, 0]) as isize;
            (shift, *p)
        })
        .collect();
    let origin = geom.index(&[0, 0, 0]);
    let mut cur = vec![0.0; geom.len()];
    let mut next = vec![0.0; geom.len()];
    cur[origin] = 1.0;
    let mut log_mass = 0.0;
    for j in 1..=n {
        let mut total = 0.0;
        // Y_j sits on even sites with |y|₁ ≤ 2j
        geom.for_each_site(2 * j, |i, _| {
            let v: f64 = offs.iter().map(|&(o, p)| p * cur[(i as isize - o) as usize]).sum();
            next[i] = v;
            total += v;
        });
        total += (e_gamma - 1.0) * next[origin];
        next[origin] *= e_gamma;
        let inv = 1.0 / total;
        geom.for_each_site(2 * j, |i, _| next[i] *= inv);
        log_mass += total.ln();
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(log_mass)
}

/// `E[W_n²]`.
pub fn second_moment_exact(law: &DisorderLaw, beta: f64, d: usize, n: usize) -> Result<f64> {
    log_second_moment_exact(law, beta, d, n).map(f64::exp)
}
