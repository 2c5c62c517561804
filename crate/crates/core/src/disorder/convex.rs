//! Convex-order comparisons through the call function `a ↦ E[(X - a)₊]`.
//!
//! For two laws with equal means, `X ≼ Y` in the convex order iff
//! `E[(X - a)₊] ≤ E[(Y - a)₊]` for every real `a`.

use serde::Serialize;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-13;

/// A real law whose call function can be evaluated.
#[derive(Debug, Clone)]
pub enum ScalarLaw {
    /// `ζ_β = e^{βω - λ(β)}`, evaluated by quadrature against the disorder law.
    Zeta { law: DisorderLaw, beta: f64 },
    /// `ζ_β · Z_v` with `Z_v` independent, evaluated by quadrature.
    ZetaTimesZv { law: DisorderLaw, beta: f64, v: f64 },
    /// Finitely many atoms `(value, probability)`.
    Discrete(Vec<(f64, f64)>),
    /// An i.i.d. sample; expectations carry standard errors.
    Empirical(Vec<f64>),
}

/// `E[(e^{βω-λ} - a)₊]` for `a > 0`.
fn zeta_call(law: &DisorderLaw, beta: f64, a: f64) -> f64 {
    if a <= 0.0 {
        return 1.0 - a;
    }
    let lambda = law.lambda(beta);
    if beta == 0.0 {
        return (1.0 - a).max(0.0);
    }
    let kink = (a.ln() + lambda) / beta;
    law.expect(
        |w| ((beta * w - lambda).exp() - a).max(0.0),
        &[kink],
        beta,
        QUAD_TOL,
    )
}

/// `∫₁^∞ 3 r⁻⁴ (r z - a)₊ dr`, i.e. `E[(R z - a)₊]` for `R` with density `3r⁻⁴` on `(1, ∞)`.
pub(crate) fn pareto3_call(z: f64, a: f64) -> f64 {
    if a <= 0.0 || z >= a {
        1.5 * z - a
    } else {
        z * z * z / (2.0 * a * a)
    }
}

fn zeta_zv_call(law: &DisorderLaw, beta: f64, v: f64, a: f64) -> f64 {
    if a <= 0.0 {
        return 1.0 - a;
    }
    let lambda = law.lambda(beta);
    let pareto = if beta == 0.0 {
        pareto3_call(1.0, a)
    } else {
        let kink = (a.ln() + lambda) / beta;
        law.expect(
            |w| pareto3_call((beta * w - lambda).exp(), a),
            &[kink],
            beta,
            QUAD_TOL,
        )
    };
    (1.0 - 3.0 * v) * zeta_call(law, beta, a) + 2.0 * v * pareto
}

impl ScalarLaw {
    pub fn mean(&self) -> f64 {
        match self {
            ScalarLaw::Zeta { .. } | ScalarLaw::ZetaTimesZv { .. } => 1.0,
            ScalarLaw::Discrete(atoms) => atoms.iter().map(|(x, p)| x * p).sum(),
            ScalarLaw::Empirical(s) => s.iter().sum::<f64>() / s.len() as f64,
        }
    }

    pub fn mean_se(&self) -> f64 {
        match self {
            ScalarLaw::Empirical(s) => sample_se(s.iter().copied()),
            _ => 0.0,
        }
    }

    /// `E[(X - a)₊]`.
    pub fn call(&self, a: f64) -> f64 {
        match self {
            ScalarLaw::Zeta { law, beta } => zeta_call(law, *beta, a),
            ScalarLaw::ZetaTimesZv { law, beta, v } => zeta_zv_call(law, *beta, *v, a),
            ScalarLaw::Discrete(atoms) => atoms.iter().map(|(x, p)| p * (x - a).max(0.0)).sum(),
            ScalarLaw::Empirical(s) => s.iter().map(|x| (x - a).max(0.0)).sum::<f64>() / s.len() as f64,
        }
    }

    /// Standard error of [`call`](Self::call); zero for exact laws.
    pub fn call_se(&self, a: f64) -> f64 {
        match self {
            ScalarLaw::Empirical(s) => sample_se(s.iter().map(|x| (x - a).max(0.0))),
            _ => 0.0,
        }
    }
}

fn sample_se(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (var / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct ConvexOrderOptions {
    /// Absolute slack for exact evaluations (and for the mean check).
    pub tolerance: f64,
    /// Additional allowance in units of the combined standard error,
    /// used only when a side is empirical.
    pub sigmas: f64,
}

impl Default for ConvexOrderOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            sigmas: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexOrderPoint {
    pub a: f64,
    pub lower: f64,
    pub upper: f64,
    pub allowance: f64,
    /// `lower - upper - allowance`; positive means the order is violated at `a`.
    pub violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexOrderReport {
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub points: Vec<ConvexOrderPoint>,
    pub max_violation: f64,
    pub worst_a: f64,
    pub pass: bool,
}

/// Tests the claim `lower ≼ upper` on the grid `a_grid`, with slack `tolerance`.
pub fn convex_order_check(
    lower: &ScalarLaw,
    upper: &ScalarLaw,
    a_grid: &[f64],
    tolerance: f64,
) -> Result<ConvexOrderReport> {
    convex_order_check_with(
        lower,
        upper,
        a_grid,
        ConvexOrderOptions {
            tolerance,
            ..Default::default()
        },
    )
}

pub fn convex_order_check_with(
    lower: &ScalarLaw,
    upper: &ScalarLaw,
    a_grid: &[f64],
    opts: ConvexOrderOptions,
) -> Result<ConvexOrderReport> {
    if a_grid.is_empty() {
        return Err(Error::param("a_grid", "must be nonempty"));
    }
    let (ml, mu) = (lower.mean(), upper.mean());
    let mean_slack = opts.tolerance + opts.sigmas * lower.mean_se().hypot(upper.mean_se());
    if (ml - mu).abs() > mean_slack {
        return Err(Error::UnequalMeans {
            difference: (ml - mu).abs(),
            tolerance: mean_slack,
        });
    }
    let points: Vec<ConvexOrderPoint> = a_grid
        .iter()
        .map(|&a| {
            let lo = lower.call(a);
            let up = upper.call(a);
            let allowance = opts.sigmas * lower.call_se(a).hypot(upper.call_se(a));
            ConvexOrderPoint {
                a,
                lower: lo,
                upper: up,
                allowance,
                violation: lo - up - allowance,
            }
        })
        .collect();
    let worst = points
        .iter()
        .max_by(|p, q| p.violation.total_cmp(&q.violation))
        .expect("grid nonempty");
    let max_violation = worst.violation.max(0.0);
    Ok(ConvexOrderReport {
        mean_lower: ml,
        mean_upper: mu,
        worst_a: worst.a,
        max_violation,
        pass: max_violation <= opts.tolerance,
        points,
    })
}

/// `E[φ(X₁, …, X_M)]` for independent discrete `X_i`, by enumerating the
/// product of the supports.
pub fn expect_product<F: Fn(&[f64]) -> f64>(laws: &[Vec<(f64, f64)>], phi: F) -> f64 {
    let m = laws.len();
    let mut idx = vec![0usize; m];
    let mut point = vec![0.0; m];
    let mut total = 0.0;
    if laws.iter().any(|l| l.is_empty()) {
        return 0.0;
    }
    loop {
        let mut w = 1.0;
        for i in 0..m {
            let (x, p) = laws[i][idx[i]];
            point[i] = x;
            w *= p;
        }
        total += w * phi(&point);
        let mut i = 0;
        loop {
            if i == m {
                return total;
            }
            idx[i] += 1;
            if idx[i] < laws[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Lognormal call price: E[(e^{βω-β²/2} - a)₊] = Φ(d₁) - aΦ(d₂).
    fn lognormal_call(beta: f64, a: f64) -> f64 {
        let n = Normal::new(0.0, 1.0).unwrap();
        let d1 = (-a.ln() + 0.5 * beta * beta) / beta;
        n.cdf(d1) - a * n.cdf(d1 - beta)
    }

    #[test]
    fn zeta_call_matches_lognormal_formula() {
        // Φ(d₁) − aΦ(d₁ − β), evaluated in 30-digit arithmetic
        let reference = [
            (0.3, 0.01, 0.99),
            (0.3, 0.5, 0.50074631730185296692),
            (0.3, 1.0, 0.11923538474048503592),
            (0.3, 2.0, 0.0014926346037059338352),
            (0.3, 7.0, 5.0949647744356200042e-12),
            (0.8, 0.01, 0.99000000005239662825),
            (0.8, 0.5, 0.55754734749284213449),
            (0.8, 1.0, 0.31084348322064833347),
            (0.8, 2.0, 0.11509469498568426898),
            (0.8, 7.0, 0.0048865839819680873876),
            (1.5, 0.01, 0.99003497855226876916),
            (1.5, 0.5, 0.69390712639794927104),
            (1.5, 1.0, 0.54674529524626360135),
            (1.5, 2.0, 0.38781425279589854208),
            (1.5, 7.0, 0.14988608942530936065),
        ];
        for (beta, a, want) in reference {
            let q = ScalarLaw::Zeta {
                law: DisorderLaw::Gaussian,
                beta,
            }
            .call(a);
            assert!((q - want).abs() < 1e-12, "beta {beta} a {a}: {q} vs {want}");
            // double-precision closed form, limited by the normal cdf
            assert!((q - lognormal_call(beta, a)).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_laws_pass_with_zero_violation() {
        let z = ScalarLaw::Zeta {
            law: DisorderLaw::Gaussian,
            beta: 0.7,
        };
        let r = convex_order_check(&z, &z, &grid(0.0, 5.0, 51), 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn zeta_increasing_in_beta() {
        let g = grid(0.0, 5.0, 51);
        let lo = ScalarLaw::Zeta {
            law: DisorderLaw::Gaussian,
            beta: 0.5,
        };
        let hi = ScalarLaw::Zeta {
            law: DisorderLaw::Gaussian,
            beta: 0.8,
        };
        assert!(convex_order_check(&lo, &hi, &g, 1e-9).unwrap().pass);
        assert!(!convex_order_check(&hi, &lo, &g, 1e-9).unwrap().pass);
    }

    #[test]
    fn two_point_spread_dominates_degenerate() {
        let spread = ScalarLaw::Discrete(vec![(0.0, 0.5), (2.0, 0.5)]);
        let point = ScalarLaw::Discrete(vec![(1.0, 1.0)]);
        let g = [0.0, 0.5, 1.0, 1.5, 2.0];
        let up = convex_order_check(&point, &spread, &g, 1e-12).unwrap();
        assert!(up.pass);
        let down = convex_order_check(&spread, &point, &g, 1e-12).unwrap();
        assert!(!down.pass);
        assert_eq!(down.worst_a, 1.0);
        assert!((down.max_violation - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unequal_means_rejected() {
        let a = ScalarLaw::Discrete(vec![(1.0, 1.0)]);
        let b = ScalarLaw::Discrete(vec![(2.0, 1.0)]);
        assert!(matches!(
            convex_order_check(&a, &b, &[0.0], 1e-9),
            Err(Error::UnequalMeans { .. })
        ));
        assert!(convex_order_check(&a, &a, &[], 1e-9).is_err());
    }

    #[test]
    fn pareto_call_matches_quadrature() {
        for &(z, a) in &[(0.3, 1.0), (2.0, 1.0), (1.0, 1.0), (0.5, -1.0)] {
            let q = crate::quadrature::integrate(
                |t: f64| {
                    // r = 1/(1-t)^(1/3) maps t ∈ [0,1) to r ∈ [1,∞) with dt = 3 r^{-4} dr
                    let r = (1.0 - t).powf(-1.0 / 3.0);
                    (r * z - a).max(0.0)
                },
                0.0,
                1.0 - 1e-12,
                1e-12,
            );
            let exact = pareto3_call(z, a);
            assert!((q - exact).abs() < 1e-3 * exact.abs().max(1e-3), "z {z} a {a}: {q} vs {exact}");
        }
    }

    fn spread(law: &[(f64, f64)], delta: f64) -> Vec<(f64, f64)> {
        law.iter()
            .flat_map(|&(x, p)| [(x - delta, p / 2.0), (x + delta, p / 2.0)])
            .collect()
    }

    proptest! {
        #[test]
        fn multivariate_convex_order_brute_force(
            xs in prop::collection::vec(-2.0f64..2.0, 2..4),
            ys in prop::collection::vec(-2.0f64..2.0, 2..4),
            d1 in 0.0f64..1.5,
            d2 in 0.0f64..1.5,
            a in -3.0f64..3.0,
        ) {
            let y1: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 1.0 / xs.len() as f64)).collect();
            let y2: Vec<(f64, f64)> = ys.iter().map(|&x| (x, 1.0 / ys.len() as f64)).collect();
            // mean-preserving spreads give Y_i ≼ Z_i
            let z1 = spread(&y1, d1);
            let z2 = spread(&y2, d2);
            let phis: [Box<dyn Fn(&[f64]) -> f64>; 3] = [
                Box::new(move |p: &[f64]| (p[0] * p[1] - a).max(0.0)),
                Box::new(|p: &[f64]| p[0].exp() * p[1] * p[1]),
                Box::new(move |p: &[f64]| (p[0] + p[1] - a).abs() + (p[0] - a).max(0.0) * (1.0 + p[1].powi(2))),
            ];
            for phi in phis.iter() {
                let ey = expect_product(&[y1.clone(), y2.clone()], |p| phi(p));
                let ez = expect_product(&[z1.clone(), z2.clone()], |p| phi(p));
                prop_assert!(ey <= ez + 1e-12 * (1.0 + ez.abs()));
            }
        }
    }
}
