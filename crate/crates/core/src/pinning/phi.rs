use serde::Serialize;

use crate::error::{Error, Result};
use crate::pinning::KernelTable;
use crate::quadrature::integrate_panels;

/// Power law `𝒦(n) ≈ c·n^{−a}` fitted on the last decade of a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub c: f64,
    pub a: f64,
    /// Inclusive `n` range of the fit.
    pub from: usize,
    pub to: usize,
}

/// Terms summed one by one past the table before switching to an integral.
const EXPLICIT_TERMS: usize = 256;

impl TailFit {
    /// Least squares of `log 𝒦(n)` on `log n` over `n ∈ [N/10, N]`.
    pub fn fit(table: &KernelTable) -> Result<TailFit> {
        let n = table.len();
        if n < 2 {
            return Err(Error::param("kernel", "need at least two entries for a tail fit"));
        }
        let from = (n / 10).clamp(1, n - 1);
        let pts: Vec<(f64, f64)> = (from..=n).map(|k| ((k as f64).ln(), table.value(k).ln())).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        Ok(TailFit {
            c: (my - slope * mx).exp(),
            a: -slope,
            from,
            to: n,
        })
    }

    pub fn at(&self, n: f64) -> f64 {
        self.c * n.powf(-self.a)
    }

    /// `Σ_{n>N} c·n^{−a}·e^{−nφ}`: a block of explicit terms, then the
    /// midpoint integral from `N + K + ½` with the first Euler–Maclaurin
    /// correction `+f′/24`. Infinite when it diverges.
    pub fn sum_beyond(&self, n: usize, phi: f64) -> f64 {
        let explicit: f64 = (n + 1..=n + EXPLICIT_TERMS)
            .map(|k| self.at(k as f64) * (-(k as f64) * phi).exp())
            .sum();
        let x0 = (n + EXPLICIT_TERMS) as f64 + 0.5;
        let rest = if phi <= 0.0 {
            if self.a <= 1.0 {
                f64::INFINITY
            } else {
                self.c * x0.powf(1.0 - self.a) / (self.a - 1.0)
            }
        } else {
            // y = φx: c·φ^{a−1}∫_{φx0}^∞ y^{−a}e^{−y} dy, the part below
            // y = 1 in log y
            let a = self.a;
            let y0 = phi * x0;
            let low = if y0 < 1.0 {
                integrate_panels(|s: f64| ((1.0 - a) * s - s.exp()).exp(), y0.ln(), 0.0, 0.25)
            } else {
                0.0
            };
            let y1 = y0.max(1.0);
            let high = integrate_panels(|y: f64| y.powf(-a) * (-y).exp(), y1, y1 + 45.0, 0.5);
            self.c * phi.powf(a - 1.0) * (low + high)
        };
        let f0 = self.at(x0) * (-x0 * phi).exp();
        explicit + rest - f0 * (self.a / x0 + phi) / 24.0
    }
}

/// Whether the sum defining `φ` runs past the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Complete `n > N` with the last-decade power-law fit.
    Fitted,
    /// Stop at `n = N`.
    Truncated,
}

/// Root of `Σ_n e^{−nφ}𝒦(n) = 1/v`.
#[derive(Debug, Clone, Serialize)]
pub struct PhiSolution {
    pub v: f64,
    pub phi: f64,
    pub mode: TailMode,
    /// `Σ_{n≤N} e^{−nφ}𝒦(n)` at the root.
    pub head: f64,
    /// Contribution of `n > N` at the root under the tail fit, whether or
    /// not it entered the equation.
    pub tail: f64,
    /// `|v·(left side) − 1|`.
    pub residual: f64,
    pub fit: Option<TailFit>,
    pub n: usize,
}

fn head_sum(table: &KernelTable, phi: f64) -> f64 {
    table
        .values()
        .iter()
        .enumerate()
        .map(|(j, k)| k * (-((j + 1) as f64) * phi).exp())
        .sum()
}

/// `φ(v)` with the tail completed by the fitted power law.
pub fn phi_of_v(table: &KernelTable, v: f64) -> Result<PhiSolution> {
    phi_of_v_with(table, v, TailMode::Fitted)
}

/// `φ(v)` by bisection on `φ ≥ 0`, to relative precision `1e−13`.
pub fn phi_of_v_with(table: &KernelTable, v: f64, mode: TailMode) -> Result<PhiSolution> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::param("v", format!("must be positive, got {v}")));
    }
    let fit = if table.len() >= 2 { Some(TailFit::fit(table)?) } else { None };
    let n = table.len();
    let tail = |phi: f64| fit.map_or(0.0, |f| f.sum_beyond(n, phi));
    let lhs = |phi: f64| match mode {
        TailMode::Fitted => head_sum(table, phi) + tail(phi),
        TailMode::Truncated => head_sum(table, phi),
    };
    let target = 1.0 / v;
    let mass = lhs(0.0);
    if mass <= target {
        return Err(Error::PhiNoRoot { mass: v * mass, n });
    }
    let mut hi = 1.0;
    while lhs(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * hi {
        let mid = if lo == 0.0 { 0.5 * hi } else { 0.5 * (lo + hi) };
        if lhs(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    let head = head_sum(table, phi);
    let t = tail(phi);
    let total = match mode {
        TailMode::Fitted => head + t,
        TailMode::Truncated => head,
    };
    Ok(PhiSolution {
        v,
        phi,
        mode,
        head,
        tail: t,
        residual: (v * total - 1.0).abs(),
        fit,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_kernel_is_geometric() {
        let t = KernelTable::from_fn(200, |_| 1.0).unwrap();
        for v in [0.05, 0.3, 1.0, 4.0] {
            let s = phi_of_v(&t, v).unwrap();
            assert!((s.phi - (1.0 + v).ln()).abs() < 1e-12, "v={v}: {}", s.phi);
            assert!(s.residual < 1e-10);
        }
    }

    #[test]
    fn tail_sum_matches_direct() {
        let fit = TailFit {
            c: 1.3,
            a: 0.4,
            from: 1,
            to: 100,
        };
        let phi = 2e-3;
        let direct: f64 = (101..40_000).map(|k| fit.at(k as f64) * (-(k as f64) * phi).exp()).sum();
        let got = fit.sum_beyond(100, phi);
        assert!((got - direct).abs() < 1e-9 * direct, "{got} vs {direct}");
        let fit = TailFit { a: 1.7, ..fit };
        let m = 2_000_000f64;
        let direct = (101..2_000_000).map(|k| fit.at(k as f64)).sum::<f64>() + 1.3 * (m - 0.5).powf(-0.7) / 0.7;
        let got = fit.sum_beyond(100, 0.0);
        assert!((got - direct).abs() < 1e-9 * direct, "{got} vs {direct}");
    }

    #[test]
    fn monotone_in_v() {
        let t = KernelTable::from_fn(500, |n| (n as f64).powf(-0.5)).unwrap();
        let a = phi_of_v(&t, 0.01).unwrap().phi;
        let b = phi_of_v(&t, 0.02).unwrap().phi;
        assert!(0.0 < a && a < b);
    }

    #[test]
    fn no_root_is_an_error() {
        // summable kernel: Σ n^{-2} = π²/6
        let t = KernelTable::from_fn(100, |n| (n as f64).powi(-2)).unwrap();
        assert!(matches!(phi_of_v(&t, 0.5), Err(Error::PhiNoRoot { .. })));
        assert!(phi_of_v(&t, 0.7).is_ok());
        let t = KernelTable::from_fn(10, |_| 1.0).unwrap();
        assert!(matches!(phi_of_v_with(&t, 0.05, TailMode::Truncated), Err(Error::PhiNoRoot { .. })));
    }
}
