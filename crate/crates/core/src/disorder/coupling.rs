//! The mixture variable `Z_v` and the constant `C_β` that makes
//! `ζ_{β+u} ≼ ζ_β · Z_{C_β u}` hold.

use rand::Rng;
use serde::Serialize;

use crate::disorder::convex::ScalarLaw;
use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-12;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Masses of `Z_v`: atom at 0, atom at 1, and the continuous part on `(1, ∞)`
/// with density `6v r⁻⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZvMasses {
    pub atom_zero: f64,
    pub atom_one: f64,
    pub continuous: f64,
}

fn check_v(v: f64) -> Result<()> {
    if !(0.0..=1.0 / 3.0).contains(&v) {
        return Err(Error::param("v", format!("must lie in [0, 1/3], got {v}")));
    }
    Ok(())
}

pub fn zv_masses(v: f64) -> Result<ZvMasses> {
    check_v(v)?;
    Ok(ZvMasses {
        atom_zero: v,
        atom_one: 1.0 - 3.0 * v,
        continuous: 2.0 * v,
    })
}

/// One draw of `Z_v`; the continuous part uses `r = (1 - U)^{-1/3}`.
pub fn sample_zv<R: Rng + ?Sized>(v: f64, rng: &mut R) -> Result<f64> {
    check_v(v)?;
    if v == 0.0 {
        return Ok(1.0);
    }
    let u: f64 = rng.random();
    Ok(if u < v {
        0.0
    } else if u < 1.0 - 2.0 * v {
        1.0
    } else {
        let w: f64 = rng.random();
        (1.0 - w).powf(-1.0 / 3.0)
    })
}

/// Parameters of the coupling `Y_u = ζ_β · Z_{C_β u}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CouplingParams {
    pub beta: f64,
    pub u: f64,
    pub c_beta: f64,
}

impl CouplingParams {
    pub fn new(beta: f64, u: f64, c_beta: f64) -> Result<Self> {
        if !(c_beta.is_finite() && c_beta > 0.0) {
            return Err(Error::param("c_beta", format!("must be positive and finite, got {c_beta}")));
        }
        if u < 0.0 {
            return Err(Error::param("u", "must be nonnegative"));
        }
        let p = Self { beta, u, c_beta };
        check_v(p.v())?;
        Ok(p)
    }

    pub fn v(&self) -> f64 {
        self.c_beta * self.u
    }

    /// Largest `u` for which `C_β u ≤ 1/3`.
    pub fn max_u(c_beta: f64) -> f64 {
        1.0 / (3.0 * c_beta)
    }

    /// Law of `Y_u ζ_β` as a call-function evaluator.
    pub fn coupled_law(&self, law: &DisorderLaw) -> ScalarLaw {
        ScalarLaw::ZetaTimesZv {
            law: law.clone(),
            beta: self.beta,
            v: self.v(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GValue {
    pub x: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub g: f64,
}

/// `P(ω₊ ≥ s)`.
fn positive_part_tail(law: &DisorderLaw, s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else {
        law.upper_tail(s)
    }
}

/// Threshold `t(x)` with `{ζ_β ≥ x} = {ω ≥ t(x)}` (β > 0).
fn zeta_threshold(lambda: f64, beta: f64, x: f64) -> f64 {
    (x.ln() + lambda) / beta
}

/// `E[ζ_β³ 1{ζ_β < x}]`.
fn zeta_cube_below(law: &DisorderLaw, beta: f64, x: f64) -> f64 {
    let lambda = law.lambda(beta);
    let t = zeta_threshold(lambda, beta, x);
    law.expect(
        |w| if w < t { (3.0 * (beta * w - lambda)).exp() } else { 0.0 },
        &[t],
        3.0 * beta,
        QUAD_TOL,
    )
}

/// `g(x)`: numerator `min(x, P(ω₊ ≥ log x/(β+1))^{1/2})`, denominator
/// `x P(ζ_β ≥ x) + ∫₁^∞ r⁻⁴ E[(rζ_β - x)₊ 1{ζ_β < x}] dr`.
///
/// The `r`-integral is done in closed form: for `z < x` it equals `z³/(6x²)`.
pub fn coupling_g(law: &DisorderLaw, beta: f64, x: f64) -> Result<GValue> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    if !(x > 0.0) {
        return Err(Error::param("x", "must be positive"));
    }
    let lambda = law.lambda(beta);
    let numerator = x.min(positive_part_tail(law, x.ln() / (beta + 1.0)).sqrt());
    let tail = law.upper_tail(zeta_threshold(lambda, beta, x));
    let denominator = x * tail + zeta_cube_below(law, beta, x) / (6.0 * x * x);
    Ok(GValue {
        x,
        numerator,
        denominator,
        g: numerator / denominator,
    })
}

/// Constant `C` in `E[(ζ_{β+u}-x)₊ - (ζ_β-x)₊] ≤ C u min(x, P(ω₊ ≥ log x/(β+1))^{1/2})`
/// for `u ∈ [0, 1]`: the larger of `E[ω₊² e^{2(β+1)ω₊}]^{1/2}` and `λ'(β+1) + E|ω|`.
pub fn increment_constant(law: &DisorderLaw, beta: f64) -> f64 {
    let c = beta + 1.0;
    let a = law
        .expect(
            |w| {
                let p = w.max(0.0);
                p * p * (2.0 * c * p).exp()
            },
            &[0.0],
            2.0 * c,
            QUAD_TOL,
        )
        .sqrt();
    let abs_mean = law.expect(f64::abs, &[0.0], 0.0, QUAD_TOL);
    a.max(law.dlog_mgf(c) + abs_mean)
}

#[derive(Debug, Clone, Serialize)]
pub struct GSupReport {
    pub beta: f64,
    pub values: Vec<GValue>,
    /// Largest `g` on the grid after golden-section refinement around the grid argmax.
    pub grid_sup: f64,
    pub argmax_x: f64,
    /// Analytic upper bound for `g` beyond the largest grid point.
    pub tail_bound: f64,
    /// `max(grid_sup, tail_bound)`.
    pub certified_sup: f64,
    /// `max g/(1/P(ζ ≥ x))` over the first grid points (should be ≤ 1).
    pub small_x_ratio: f64,
    pub increment_constant: f64,
    /// `C_β = increment_constant · certified_sup`.
    pub c_beta: f64,
}

/// Supremum of `g` over `x_grid` (log-spaced, increasing) plus tail control.
pub fn coupling_g_sup(law: &DisorderLaw, beta: f64, x_grid: &[f64]) -> Result<GSupReport> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    if x_grid.len() < 3 || x_grid.windows(2).any(|w| !(w[1] > w[0])) || x_grid[0] <= 0.0 {
        return Err(Error::param("x_grid", "need at least 3 positive increasing points"));
    }
    let values = x_grid
        .iter()
        .map(|&x| coupling_g(law, beta, x))
        .collect::<Result<Vec<_>>>()?;
    let (imax, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.g.total_cmp(&b.1.g))
        .expect("grid nonempty");
    if imax == 0 || imax == values.len() - 1 {
        return Err(Error::GridBoundaryMaximum { x: x_grid[imax] });
    }

    // Refine between the neighbours of the grid maximum (in log x).
    let g_at = |lx: f64| coupling_g(law, beta, lx.exp()).map(|v| v.g).unwrap_or(0.0);
    let (mut lo, mut hi) = (x_grid[imax - 1].ln(), x_grid[imax + 1].ln());
    let mut m1 = hi - GOLDEN * (hi - lo);
    let mut m2 = lo + GOLDEN * (hi - lo);
    let (mut g1, mut g2) = (g_at(m1), g_at(m2));
    for _ in 0..80 {
        if g1 < g2 {
            lo = m1;
            m1 = m2;
            g1 = g2;
            m2 = lo + GOLDEN * (hi - lo);
            g2 = g_at(m2);
        } else {
            hi = m2;
            m2 = m1;
            g2 = g1;
            m1 = hi - GOLDEN * (hi - lo);
            g1 = g_at(m1);
        }
    }
    let (refined_x, refined_g) = if g1 > g2 { (m1.exp(), g1) } else { (m2.exp(), g2) };
    let (argmax_x, grid_sup) = if refined_g > values[imax].g {
        (refined_x, refined_g)
    } else {
        (values[imax].x, values[imax].g)
    };

    let x_max = *x_grid.last().expect("grid nonempty");
    let tail_bound = g_tail_bound(law, beta, x_max);

    let lambda = law.lambda(beta);
    let small_x_ratio = values
        .iter()
        .take(3)
        .map(|v| v.g * law.upper_tail(zeta_threshold(lambda, beta, v.x)))
        .fold(0.0, f64::max);

    let certified_sup = grid_sup.max(tail_bound);
    let increment_constant = increment_constant(law, beta);
    Ok(GSupReport {
        beta,
        values,
        grid_sup,
        argmax_x,
        tail_bound,
        certified_sup,
        small_x_ratio,
        increment_constant,
        c_beta: increment_constant * certified_sup,
    })
}

/// Upper bound for `sup_{x ≥ x_max} g(x)`.
///
/// For `x ≥ x_max` the denominator is at least `E[ζ³ 1{ζ < x_max}]/(6x²)`.
/// The numerator is bounded by `e^{-s²/4}` (Gaussian Chernoff bound,
/// `s = log x/(β+1)`), or by the exact tail of a bounded law, which
/// vanishes once `s` exceeds the essential supremum.
fn g_tail_bound(law: &DisorderLaw, beta: f64, x_max: f64) -> f64 {
    let c = beta + 1.0;
    let floor = zeta_cube_below(law, beta, x_max) / 6.0;
    let l0 = x_max.ln();
    let sup = law.ess_sup();
    if sup.is_finite() {
        let l_cut = c * sup;
        if l0 > l_cut {
            return 0.0;
        }
        // numerator nonincreasing in x, x² at most e^{2 l_cut}
        let num = positive_part_tail(law, l0 / c).sqrt();
        return num * (2.0 * l_cut).exp() / floor;
    }
    // log of x² e^{-s²/4} is 2L - L²/(4c²), maximal at L = 4c²
    let l_star = 4.0 * c * c;
    let l = l0.max(l_star);
    let log_bound = 2.0 * l - l * l / (4.0 * c * c);
    log_bound.exp() / floor
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CouplingCertificate {
    pub u: f64,
    /// Smallest `v` with `ζ_{β+u} ≼ ζ_β Z_v` on the `a`-grid.
    pub v_min: f64,
    /// `v_min / u`: the empirically sufficient constant at this `u`.
    pub ratio: f64,
    /// Whether `v_min ≤ 1/3`, i.e. a valid `Z_v` exists.
    pub feasible: bool,
}

/// For each `u`, the smallest `v` making `ζ_{β+u} ≼ ζ_β Z_v` hold on `a_grid`.
///
/// `E[(ζ_β Z_v - a)₊]` is affine in `v`, so the minimum is a ratio of
/// call-function differences maximized over the grid.
pub fn certify_coupling(
    law: &DisorderLaw,
    beta: f64,
    u_grid: &[f64],
    a_grid: &[f64],
) -> Result<Vec<CouplingCertificate>> {
    if a_grid.is_empty() {
        return Err(Error::param("a_grid", "must be nonempty"));
    }
    let base = ScalarLaw::Zeta {
        law: law.clone(),
        beta,
    };
    let full = ScalarLaw::ZetaTimesZv {
        law: law.clone(),
        beta,
        v: 1.0 / 3.0,
    };
    let cols: Vec<(f64, f64, f64)> = a_grid
        .iter()
        .map(|&a| {
            let c0 = base.call(a);
            // slope in v of the mixture call function
            let slope = (full.call(a) - c0) * 3.0;
            (a, c0, slope)
        })
        .collect();
    u_grid
        .iter()
        .map(|&u| {
            if u < 0.0 {
                return Err(Error::param("u", "must be nonnegative"));
            }
            let target = ScalarLaw::Zeta {
                law: law.clone(),
                beta: beta + u,
            };
            let mut v_min: f64 = 0.0;
            for &(a, c0, slope) in &cols {
                let excess = target.call(a) - c0;
                if excess > 0.0 {
                    v_min = v_min.max(if slope > 0.0 { excess / slope } else { f64::INFINITY });
                }
            }
            Ok(CouplingCertificate {
                u,
                v_min,
                ratio: if u > 0.0 { v_min / u } else { 0.0 },
                feasible: v_min <= 1.0 / 3.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::convex::convex_order_check;
    use crate::rng::stream;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn degenerate_zv() {
        let mut rng = stream(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_zv(0.0, &mut rng).unwrap(), 1.0);
        }
        assert!(sample_zv(0.4, &mut rng).is_err());
        assert!(sample_zv(-0.1, &mut rng).is_err());
    }

    #[test]
    fn mass_split_at_one_third() {
        let m = zv_masses(1.0 / 3.0).unwrap();
        assert_eq!(m.atom_one, 0.0);
        assert!((m.atom_zero - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.continuous - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.atom_zero + m.atom_one + m.continuous - 1.0).abs() < 1e-15);
    }

    fn moments(v: f64, n: usize, seed: u64) -> (f64, f64, f64, f64) {
        let mut rng = stream(seed, 0);
        let (mut s1, mut s1s, mut s2, mut s2s) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = sample_zv(v, &mut rng).unwrap();
            s1 += z;
            s1s += z * z;
            s2 += z * z;
            s2s += z.powi(4);
        }
        let nf = n as f64;
        let m1 = s1 / nf;
        let m2 = s2 / nf;
        let se1 = ((s1s / nf - m1 * m1) / (nf - 1.0)).sqrt();
        let se2 = ((s2s / nf - m2 * m2) / (nf - 1.0)).sqrt();
        (m1, se1, m2, se2)
    }

    #[test]
    fn zv_moments() {
        for (i, &v) in [0.05, 0.2, 1.0 / 3.0].iter().enumerate() {
            let (m1, se1, m2, se2) = moments(v, 1_000_000, 100 + i as u64);
            assert!((m1 - 1.0).abs() < 4.0 * se1, "v {v}: mean {m1} se {se1}");
            assert!((m2 - (1.0 + 3.0 * v)).abs() < 4.0 * se2, "v {v}: m2 {m2} se {se2}");
        }
    }

    #[test]
    fn g_closed_form_matches_double_quadrature() {
        // Oracle: Gaussian β with the r-integral done numerically and the
        // ζ-expectations from the normal CDF.
        let beta = 1.0;
        let n = Normal::new(0.0, 1.0).unwrap();
        for &x in &[0.05, 0.7, 3.0, 40.0] {
            let g = coupling_g(&DisorderLaw::Gaussian, beta, x).unwrap();
            let t = (x.ln() + 0.5) / beta;
            let tail = 1.0 - n.cdf(t);
            let inner = crate::quadrature::integrate(
                |s: f64| {
                    // r = e^s, dr = e^s ds, integrand r^{-4} E[(rζ-x)₊ 1{ζ<x}]
                    let r = s.exp();
                    let e = DisorderLaw::Gaussian.expect(
                        |w| {
                            let z = (beta * w - 0.5).exp();
                            if z < x {
                                (r * z - x).max(0.0)
                            } else {
                                0.0
                            }
                        },
                        &[t, ((x / r).ln() + 0.5) / beta],
                        beta,
                        1e-12,
                    );
                    r.powi(-3) * e
                },
                0.0,
                60.0,
                1e-10,
            );
            let den = x * tail + inner;
            assert!((g.denominator - den).abs() < 1e-7 * den, "x {x}: {} vs {den}", g.denominator);
        }
    }

    #[test]
    fn g_near_zero_bounded_by_one() {
        let grid: Vec<f64> = (0..5).map(|i| 10f64.powf(-6.0 + 0.5 * i as f64)).collect();
        for law in [DisorderLaw::Gaussian, DisorderLaw::Rademacher] {
            for v in grid.iter().map(|&x| coupling_g(&law, 1.0, x).unwrap()) {
                assert!(v.g <= 1.0 + 1e-9, "{law:?} {v:?}");
            }
        }
    }

    #[test]
    fn g_vanishes_at_infinity() {
        let far = coupling_g(&DisorderLaw::Gaussian, 1.0, 1e40).unwrap();
        assert!(far.g < 1e-6, "{far:?}");
        let r = coupling_g(&DisorderLaw::Rademacher, 1.0, 1e3).unwrap();
        assert_eq!(r.g, 0.0);
    }

    #[test]
    fn boundary_maximum_flagged() {
        // The Gaussian maximum sits near x ≈ e^{16} for β = 1.
        let grid: Vec<f64> = (0..=48).map(|i| 10f64.powf(-6.0 + 0.25 * i as f64)).collect();
        assert!(matches!(
            coupling_g_sup(&DisorderLaw::Gaussian, 1.0, &grid),
            Err(Error::GridBoundaryMaximum { .. })
        ));
    }

    #[test]
    fn coupling_holds_at_computed_constant() {
        let law = DisorderLaw::Rademacher;
        let beta = 0.5;
        let grid: Vec<f64> = (0..=60).map(|i| 10f64.powf(-4.0 + 0.1 * i as f64)).collect();
        let rep = coupling_g_sup(&law, beta, &grid).unwrap();
        assert!(rep.c_beta.is_finite() && rep.c_beta > 0.0);
        let u = 0.5 * CouplingParams::max_u(rep.c_beta).min(1.0);
        let params = CouplingParams::new(beta, u, rep.c_beta).unwrap();
        let a_grid: Vec<f64> = (0..200).map(|i| 0.025 * i as f64).collect();
        let lhs = ScalarLaw::Zeta { law: law.clone(), beta: beta + u };
        let rhs = params.coupled_law(&law);
        let r = convex_order_check(&lhs, &rhs, &a_grid, 1e-12).unwrap();
        assert!(r.pass, "max violation {}", r.max_violation);
    }

    #[test]
    fn certified_ratio_below_proof_constant() {
        let law = DisorderLaw::Gaussian;
        let a_grid: Vec<f64> = (1..=100).map(|i| 0.05 * i as f64).collect();
        let certs = certify_coupling(&law, 1.0, &[1e-3, 1e-2, 0.05], &a_grid).unwrap();
        for c in &certs {
            assert!(c.feasible && c.v_min > 0.0, "{c:?}");
            // the v_min coupling passes the convex-order test
            let rhs = ScalarLaw::ZetaTimesZv { law: law.clone(), beta: 1.0, v: c.v_min };
            let lhs = ScalarLaw::Zeta { law: law.clone(), beta: 1.0 + c.u };
            assert!(convex_order_check(&lhs, &rhs, &a_grid, 1e-10).unwrap().pass);
        }
    }
}
