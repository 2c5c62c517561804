use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::rng::{site_key, SiteStream};

/// Largest dimension supported by the dense lattice code.
pub const MAX_DIM: usize = 3;

/// One realization of the i.i.d. field `ω_{k,x}` on the space-time cone
/// `{(k, x): 1 ≤ k ≤ horizon, |x|₁ ≤ k}`.
///
/// Values are never stored: `ω_{k,x}` is drawn from a generator keyed by
/// `(seed, k, x)`, so two environments with the same seed agree everywhere
/// and a shift only changes the addresses that get hashed.
#[derive(Debug, Clone)]
pub struct Environment {
    law: DisorderLaw,
    d: usize,
    horizon: usize,
    seed: u64,
    time_offset: i64,
    space_offset: [i64; 3],
}

impl Environment {
    pub fn new(law: DisorderLaw, d: usize, horizon: usize, seed: u64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::param("d", format!("must be in 1..={MAX_DIM}, got {d}")));
        }
        Ok(Self {
            law,
            d,
            horizon,
            seed,
            time_offset: 0,
            space_offset: [0; 3],
        })
    }

    pub fn law(&self) -> &DisorderLaw {
        &self.law
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `ω_{k,x}`. Coordinates beyond `dim()` must be zero.
    #[inline]
    pub fn omega(&self, k: usize, x: &[i64; 3]) -> f64 {
        debug_assert!(k >= 1);
        let abs = [
            x[0] + self.space_offset[0],
            x[1] + self.space_offset[1],
            x[2] + self.space_offset[2],
        ];
        let mut stream = SiteStream::new(site_key(self.seed, k as i64 + self.time_offset, &abs));
        self.law.sample(&mut stream)
    }

    /// The environment `θ_{k0,z} ω`, i.e. `(k, x) ↦ ω_{k+k0, x+z}`.
    /// The horizon shrinks by `k0`.
    pub fn shifted(&self, k0: usize, z: &[i64; 3]) -> Environment {
        let mut out = self.clone();
        out.time_offset += k0 as i64;
        for i in 0..3 {
            out.space_offset[i] += z[i];
        }
        out.horizon = self.horizon.saturating_sub(k0);
        out
    }

    /// Same addressing, horizon extended or cut to `horizon`.
    pub fn with_horizon(&self, horizon: usize) -> Environment {
        let mut out = self.clone();
        out.horizon = horizon;
        out
    }
}

/// Realizes an environment for `law` in dimension `d` up to time `n`.
pub fn sample_environment(law: &DisorderLaw, d: usize, n: usize, seed: u64) -> Result<Environment> {
    Environment::new(law.clone(), d, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = sample_environment(&DisorderLaw::Gaussian, 2, 10, 42).unwrap();
        let b = sample_environment(&DisorderLaw::Gaussian, 2, 10, 42).unwrap();
        for k in 1..=10usize {
            for x0 in -(k as i64)..=(k as i64) {
                let x = [x0, 0, 0];
                assert_eq!(a.omega(k, &x).to_bits(), b.omega(k, &x).to_bits());
            }
        }
    }

    #[test]
    fn different_seeds_uncorrelated() {
        let a = sample_environment(&DisorderLaw::Gaussian, 3, 100, 1).unwrap();
        let b = sample_environment(&DisorderLaw::Gaussian, 3, 100, 2).unwrap();
        let mut n = 0usize;
        let (mut sxy, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        'outer: for k in 1..=100usize {
            for x0 in -20i64..=20 {
                for x1 in -20i64..=20 {
                    let x = [x0, x1, (k as i64) % 3];
                    let (u, v) = (a.omega(k, &x), b.omega(k, &x));
                    sxy += u * v;
                    sx += u;
                    sy += v;
                    sxx += u * u;
                    syy += v * v;
                    n += 1;
                    if n == 100_000 {
                        break 'outer;
                    }
                }
            }
        }
        let nf = n as f64;
        let cov = sxy / nf - sx * sy / nf / nf;
        let corr = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
        // Under independence the sample correlation has sd ≈ 1/sqrt(n).
        assert!(corr.abs() < 4.0 / nf.sqrt(), "corr {corr}");
    }

    #[test]
    fn shift_readdresses_exactly() {
        let base = sample_environment(&DisorderLaw::Rademacher, 2, 30, 9).unwrap();
        let z = [3, -2, 0];
        let s = base.shifted(5, &z);
        assert_eq!(s.horizon(), 25);
        for k in 1..=10usize {
            for x0 in -4i64..=4 {
                for x1 in -4i64..=4 {
                    let x = [x0, x1, 0];
                    let moved = [x0 + z[0], x1 + z[1], 0];
                    assert_eq!(s.omega(k, &x), base.omega(k + 5, &moved));
                }
            }
        }
        let twice = s.shifted(2, &[1, 1, 0]);
        assert_eq!(twice.omega(1, &[0, 0, 0]), base.omega(8, &[4, -1, 0]));
    }

    #[test]
    fn gaussian_site_values_are_standard() {
        let env = sample_environment(&DisorderLaw::Gaussian, 1, 200_000, 11).unwrap();
        let n = 200_000usize;
        let vals: Vec<f64> = (1..=n).map(|k| env.omega(k, &[0, 0, 0])).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn rejects_unsupported_dimension() {
        assert!(sample_environment(&DisorderLaw::Gaussian, 0, 5, 1).is_err());
        assert!(sample_environment(&DisorderLaw::Gaussian, 4, 5, 1).is_err());
    }
}
