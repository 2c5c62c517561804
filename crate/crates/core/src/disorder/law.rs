use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::quadrature;

/// Half-width, in standard deviations, of the window used for Gaussian
/// expectations. `exp(-40^2/2)` is far below double precision.
const GAUSS_WINDOW: f64 = 40.0;

/// Distribution of a single disorder variable `ω`, standardized to mean zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawSpec", into = "LawSpec")]
pub enum DisorderLaw {
    /// Standard normal.
    Gaussian,
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Finite support with given probabilities.
    Table(TableLaw),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableLaw {
    support: Vec<f64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TableLaw {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::InvalidLaw(
                "support and probs must be nonempty and of equal length".into(),
            ));
        }
        if support.iter().chain(&probs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidLaw("non-finite entry in table".into()));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidLaw("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidLaw(format!("probabilities sum to {total}, not 1")));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let mean: f64 = support.iter().zip(&probs).map(|(s, p)| s * p).sum();
        let scale = support.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if mean.abs() > 1e-9 * scale.max(1.0) {
            return Err(Error::InvalidLaw(format!("mean is {mean:.3e}, expected 0")));
        }
        let var: f64 = support.iter().zip(&probs).map(|(s, p)| p * s * s).sum();
        if var <= 0.0 {
            return Err(Error::InvalidLaw("degenerate law (zero variance)".into()));
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { support, probs, cdf })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    fn log_mgf(&self, beta: f64) -> f64 {
        let m = self
            .atoms()
            .filter(|&(_, p)| p > 0.0)
            .map(|(s, _)| beta * s)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self
            .atoms()
            .map(|(s, p)| p * (beta * s - m).exp())
            .sum();
        m + s.ln()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.support.len() - 1);
        self.support[i]
    }
}

/// Configuration form of a law: `"gaussian"`, `"rademacher"`, or
/// `{ support = [...], probs = [...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LawSpec {
    Name(String),
    Table { support: Vec<f64>, probs: Vec<f64> },
}

impl TryFrom<LawSpec> for DisorderLaw {
    type Error = Error;

    fn try_from(spec: LawSpec) -> Result<Self> {
        match spec {
            LawSpec::Name(name) => name.parse(),
            LawSpec::Table { support, probs } => Ok(DisorderLaw::Table(TableLaw::new(support, probs)?)),
        }
    }
}

impl From<DisorderLaw> for LawSpec {
    fn from(law: DisorderLaw) -> Self {
        match law {
            DisorderLaw::Gaussian => LawSpec::Name("gaussian".into()),
            DisorderLaw::Rademacher => LawSpec::Name("rademacher".into()),
            DisorderLaw::Table(t) => LawSpec::Table {
                support: t.support,
                probs: t.probs,
            },
        }
    }
}

impl std::str::FromStr for DisorderLaw {
    type Err = Error;

    /// Accepts `gaussian`, `rademacher`, or `table:s1,s2,..;p1,p2,..`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => return Ok(DisorderLaw::Gaussian),
            "rademacher" => return Ok(DisorderLaw::Rademacher),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("table:") {
            let (sup, pr) = rest
                .split_once(';')
                .ok_or_else(|| Error::InvalidLaw("table law needs `support;probs`".into()))?;
            let parse = |txt: &str| -> Result<Vec<f64>> {
                txt.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidLaw(format!("bad number `{v}`: {e}")))
                    })
                    .collect()
            };
            return Ok(DisorderLaw::Table(TableLaw::new(parse(sup)?, parse(pr)?)?));
        }
        Err(Error::InvalidLaw(format!("unknown law `{s}`")))
    }
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

impl DisorderLaw {
    pub fn table(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Ok(DisorderLaw::Table(TableLaw::new(support, probs)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            DisorderLaw::Gaussian => "gaussian",
            DisorderLaw::Rademacher => "rademacher",
            DisorderLaw::Table(_) => "table",
        }
    }

    /// `λ(β) = log E[e^{βω}]`.
    pub fn log_mgf(&self, beta: f64) -> Result<f64> {
        if !beta.is_finite() {
            return Err(Error::param("beta", format!("must be finite, got {beta}")));
        }
        Ok(self.lambda(beta))
    }

    /// `λ(β)` without the finiteness check.
    pub(crate) fn lambda(&self, beta: f64) -> f64 {
        match self {
            DisorderLaw::Gaussian => 0.5 * beta * beta,
            DisorderLaw::Rademacher => {
                // log cosh without overflow
                let a = beta.abs();
                a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
            }
            DisorderLaw::Table(t) => t.log_mgf(beta),
        }
    }

    /// `λ(β)` evaluated by integrating against the law rather than through
    /// its closed form (quadrature for the Gaussian density, atom sums
    /// otherwise).
    pub fn log_mgf_numeric(&self, beta: f64) -> Result<f64> {
        if !beta.is_finite() {
            return Err(Error::param("beta", format!("must be finite, got {beta}")));
        }
        Ok(match self {
            DisorderLaw::Gaussian => {
                // Center the window on the tilted mode to keep the integrand O(1).
                let shift = beta;
                let v = quadrature::integrate(
                    |w| (beta * w - beta * shift).exp() * std_normal_pdf(w),
                    shift - GAUSS_WINDOW,
                    shift + GAUSS_WINDOW,
                    1e-14,
                );
                beta * shift + v.ln()
            }
            DisorderLaw::Rademacher => {
                let m = beta.abs();
                m + (0.5 * ((beta - m).exp() + (-beta - m).exp())).ln()
            }
            DisorderLaw::Table(t) => t.log_mgf(beta),
        })
    }

    /// `λ'(β)`.
    pub fn dlog_mgf(&self, beta: f64) -> f64 {
        match self {
            DisorderLaw::Gaussian => beta,
            DisorderLaw::Rademacher => beta.tanh(),
            DisorderLaw::Table(t) => {
                let l = t.log_mgf(beta);
                t.atoms().map(|(s, p)| p * s * (beta * s - l).exp()).sum()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            DisorderLaw::Gaussian | DisorderLaw::Rademacher => 1.0,
            DisorderLaw::Table(t) => t.atoms().map(|(s, p)| p * s * s).sum(),
        }
    }

    /// Essential supremum of `ω` (`+∞` for the Gaussian).
    pub fn ess_sup(&self) -> f64 {
        match self {
            DisorderLaw::Gaussian => f64::INFINITY,
            DisorderLaw::Rademacher => 1.0,
            DisorderLaw::Table(t) => t
                .atoms()
                .filter(|&(_, p)| p > 0.0)
                .map(|(s, _)| s)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `P(ω ≥ t)`.
    pub fn upper_tail(&self, t: f64) -> f64 {
        match self {
            DisorderLaw::Gaussian => 0.5 * erfc(t / SQRT_2),
            DisorderLaw::Rademacher => {
                if t <= -1.0 {
                    1.0
                } else if t <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            DisorderLaw::Table(t_law) => t_law.atoms().filter(|&(s, _)| s >= t).map(|(_, p)| p).sum(),
        }
    }

    /// `E[f(ω)]`. For the Gaussian this is a quadrature split at `kinks`
    /// (points where `f` is not smooth) and centered at `center`, which
    /// should sit near the bulk of `f(ω)·density`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, kinks: &[f64], center: f64, rel_tol: f64) -> f64 {
        match self {
            DisorderLaw::Gaussian => {
                let lo = center.min(0.0) - GAUSS_WINDOW;
                let hi = center.max(0.0) + GAUSS_WINDOW;
                quadrature::integrate_split(|w| f(w) * std_normal_pdf(w), lo, hi, kinks, rel_tol)
            }
            DisorderLaw::Rademacher => 0.5 * (f(-1.0) + f(1.0)),
            DisorderLaw::Table(t) => t.atoms().map(|(s, p)| if p > 0.0 { p * f(s) } else { 0.0 }).sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DisorderLaw::Gaussian => StandardNormal.sample(rng),
            DisorderLaw::Rademacher => {
                if rng.next_u64() >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            DisorderLaw::Table(t) => t.sample(rng),
        }
    }

    /// One draw from the tilted law `e^{βω − λ(β)} P(dω)`.
    pub fn sample_tilted<R: Rng + ?Sized>(&self, beta: f64, rng: &mut R) -> f64 {
        match self {
            DisorderLaw::Gaussian => beta + Distribution::<f64>::sample(&StandardNormal, rng),
            DisorderLaw::Rademacher => {
                let up = 1.0 / (1.0 + (-2.0 * beta).exp());
                if rng.random::<f64>() < up {
                    1.0
                } else {
                    -1.0
                }
            }
            DisorderLaw::Table(t) => {
                let lambda = t.log_mgf(beta);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (s, p) in t.atoms() {
                    acc += p * (beta * s - lambda).exp();
                    if u < acc {
                        return s;
                    }
                }
                t.atoms().filter(|a| a.1 > 0.0).last().map_or(0.0, |a| a.0)
            }
        }
    }

    /// One draw of `ζ_β = e^{βω - λ(β)}`.
    pub fn sample_zeta<R: Rng + ?Sized>(&self, beta: f64, rng: &mut R) -> f64 {
        let lambda = self.lambda(beta);
        (beta * self.sample(rng) - lambda).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn tilted_means() {
        // E_tilted[ω] = λ'(β)
        let mut rng = stream(5, 0);
        for law in [
            DisorderLaw::Gaussian,
            DisorderLaw::Rademacher,
            DisorderLaw::table(vec![-1.0, 0.0, 2.0], vec![0.4, 0.4, 0.2]).unwrap(),
        ] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| law.sample_tilted(0.7, &mut rng)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
            let want = law.dlog_mgf(0.7);
            assert!((m - want).abs() < 5.0 * (v / n as f64).sqrt(), "{}: {m} vs {want}", law.name());
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(DisorderLaw::Gaussian.log_mgf(1.0).unwrap(), 0.5);
        let r = DisorderLaw::Rademacher.log_mgf(1.0).unwrap();
        assert!((r - 1f64.cosh().ln()).abs() < 1e-15);
        assert!((r - 0.433781).abs() < 1e-6);
        for law in [DisorderLaw::Gaussian, DisorderLaw::Rademacher] {
            assert_eq!(law.log_mgf(0.0).unwrap(), 0.0);
        }
        let t = DisorderLaw::table(vec![-1.0, 0.0, 2.0], vec![0.4, 0.4, 0.2]).unwrap();
        assert!(t.log_mgf(0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rademacher_large_beta_is_finite() {
        let v = DisorderLaw::Rademacher.log_mgf(800.0).unwrap();
        assert!((v - (800.0 - std::f64::consts::LN_2)).abs() < 1e-9);
    }

    #[test]
    fn non_finite_beta_rejected() {
        assert!(DisorderLaw::Gaussian.log_mgf(f64::NAN).is_err());
        assert!(DisorderLaw::Rademacher.log_mgf(f64::INFINITY).is_err());
    }

    #[test]
    fn numeric_route_matches_closed_form() {
        for &b in &[-3.0, -1.0, -0.2, 0.0, 0.4, 1.0, 2.5, 5.0] {
            for law in [DisorderLaw::Gaussian, DisorderLaw::Rademacher] {
                let exact = law.log_mgf(b).unwrap();
                let num = law.log_mgf_numeric(b).unwrap();
                assert!((exact - num).abs() <= 1e-10, "{law:?} beta={b}: {exact} vs {num}");
            }
        }
    }

    #[test]
    fn lambda_sum_is_nonnegative() {
        let t = DisorderLaw::table(vec![-1.0, 0.5], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        for law in [DisorderLaw::Gaussian, DisorderLaw::Rademacher, t] {
            assert_eq!(law.lambda(0.0) + law.lambda(-0.0), 0.0);
            for &b in &[0.01, 0.3, 1.0, 4.0] {
                assert!(law.lambda(b) + law.lambda(-b) > 0.0);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let t = DisorderLaw::table(vec![-1.0, 0.5], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        for law in [DisorderLaw::Gaussian, DisorderLaw::Rademacher, t] {
            for &b in &[0.0, 0.7, 2.0] {
                let h = 1e-5;
                let fd = (law.lambda(b + h) - law.lambda(b - h)) / (2.0 * h);
                assert!((fd - law.dlog_mgf(b)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn table_validation() {
        assert!(DisorderLaw::table(vec![1.0, 2.0], vec![0.5, 0.5]).is_err());
        assert!(DisorderLaw::table(vec![1.0], vec![1.0, 0.0]).is_err());
        assert!(DisorderLaw::table(vec![-1.0, 1.0], vec![0.7, 0.7]).is_err());
        assert!(DisorderLaw::table(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn parses_config_forms() {
        let law: DisorderLaw = "gaussian".parse().unwrap();
        assert_eq!(law, DisorderLaw::Gaussian);
        let law: DisorderLaw = "table:-1,1;0.5,0.5".parse().unwrap();
        assert!(matches!(law, DisorderLaw::Table(_)));
        #[derive(Deserialize)]
        struct Cfg {
            law: DisorderLaw,
        }
        let c: Cfg = toml::from_str("law = { support = [-1.0, 2.0], probs = [0.6666666666666666, 0.3333333333333333] }").unwrap();
        assert!(matches!(c.law, DisorderLaw::Table(_)));
        let c: Cfg = toml::from_str("law = \"rademacher\"").unwrap();
        assert_eq!(c.law, DisorderLaw::Rademacher);
        assert!(toml::from_str::<Cfg>("law = \"cauchy\"").is_err());
    }

    #[test]
    fn zeta_at_zero_beta_is_one() {
        let mut rng = stream(3, 0);
        for _ in 0..100 {
            assert_eq!(DisorderLaw::Gaussian.sample_zeta(0.0, &mut rng), 1.0);
        }
    }

    #[test]
    fn rademacher_zeta_two_point_support() {
        let mut rng = stream(4, 0);
        let l = 1f64.cosh().ln();
        let hi = (1.0 - l).exp();
        let lo = (-1.0 - l).exp();
        let mut seen = [false, false];
        for _ in 0..1000 {
            let z = DisorderLaw::Rademacher.sample_zeta(1.0, &mut rng);
            if (z - hi).abs() < 1e-14 {
                seen[0] = true;
            } else if (z - lo).abs() < 1e-14 {
                seen[1] = true;
            } else {
                panic!("unexpected value {z}");
            }
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn gaussian_zeta_has_mean_one() {
        let mut rng = stream(5, 0);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = DisorderLaw::Gaussian.sample_zeta(1.0, &mut rng);
            s += z;
            s2 += z * z;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / (n as f64 - 1.0)).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn gaussian_tail() {
        assert!((DisorderLaw::Gaussian.upper_tail(0.0) - 0.5).abs() < 1e-15);
        assert!((DisorderLaw::Gaussian.upper_tail(1.96) - 0.024997895).abs() < 1e-8);
    }
}
