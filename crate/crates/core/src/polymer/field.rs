use crate::disorder::Environment;
use crate::error::{Error, Result};
use crate::lattice::ConeBox;

/// Below this ratio between the smallest and largest entry of a slice the
/// scaled representation would lose entries to underflow, so the sweep
/// switches to log values.
const LOG_SWITCH_RATIO: f64 = 1e-280;

/// Point-to-point weights `Ŵ_k(x)` on one time slice of the cone.
///
/// Entries are held either as `values[i]·e^{log_scale}` with the slice
/// maximum scaled to one, or, after a slice spans more than ~280 decades,
/// directly as `log Ŵ_k(x)`. Both read back through the log accessors.
#[derive(Debug, Clone)]
pub struct WeightField {
    geom: ConeBox,
    time: usize,
    values: Vec<f64>,
    log_scale: f64,
    log_mode: bool,
}

impl WeightField {
    /// `Ŵ_0 = δ₀`, in a box with room for `capacity` steps.
    pub fn origin(d: usize, capacity: usize) -> Self {
        let geom = ConeBox::new(d, capacity + 1);
        let mut values = vec![0.0; geom.len()];
        values[geom.index(&[0, 0, 0])] = 1.0;
        Self {
            geom,
            time: 0,
            values,
            log_scale: 0.0,
            log_mode: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.geom.dim()
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn geometry(&self) -> &ConeBox {
        &self.geom
    }

    /// True once the sweep fell back to storing logarithms.
    pub fn is_log_mode(&self) -> bool {
        self.log_mode
    }

    #[inline]
    fn ln_at(&self, i: usize) -> f64 {
        if self.log_mode {
            self.values[i]
        } else {
            self.values[i].ln() + self.log_scale
        }
    }

    /// `log Ŵ_k(x)`; `-∞` off the slice.
    pub fn log_weight(&self, x: &[i64; 3]) -> f64 {
        let l1: i64 = x.iter().map(|c| c.abs()).sum();
        let k = self.time as i64;
        if !self.geom.contains(x) || l1 > k || (x[0] + x[1] + x[2] - k).rem_euclid(2) != 0 {
            return f64::NEG_INFINITY;
        }
        self.ln_at(self.geom.index(x))
    }

    /// Visits `(x, log Ŵ_k(x))` over the slice.
    pub fn for_each_log<F: FnMut(&[i64; 3], f64)>(&self, mut f: F) {
        self.geom.for_each_site(self.time, |i, x| f(x, self.ln_at(i)));
    }

    /// `log Σ_x Ŵ_k(x)^p`.
    pub fn log_power_sum(&self, p: f64) -> f64 {
        if self.log_mode {
            let mut m = f64::NEG_INFINITY;
            self.geom.for_each_site(self.time, |i, _| m = m.max(self.values[i]));
            let mut s = 0.0;
            self.geom.for_each_site(self.time, |i, _| s += (p * (self.values[i] - m)).exp());
            p * m + s.ln()
        } else {
            let mut s = 0.0;
            if p == 1.0 {
                self.geom.for_each_site(self.time, |i, _| s += self.values[i]);
            } else if p == 2.0 {
                self.geom.for_each_site(self.time, |i, _| s += self.values[i] * self.values[i]);
            } else {
                self.geom.for_each_site(self.time, |i, _| {
                    let v = self.values[i];
                    if v > 0.0 {
                        s += v.powf(p);
                    }
                });
            }
            s.ln() + p * self.log_scale
        }
    }

    /// `log W_k = log Σ_x Ŵ_k(x)`.
    pub fn log_partition(&self) -> f64 {
        self.log_power_sum(1.0)
    }

    /// Endpoint coincidence `Σ_x (Ŵ_k(x)/W_k)²`.
    pub fn coincidence(&self) -> f64 {
        (self.log_power_sum(2.0) - 2.0 * self.log_partition()).exp()
    }

    fn to_log_mode(&mut self) {
        let s = self.log_scale;
        self.values.iter_mut().for_each(|v| *v = v.ln() + s);
        self.log_scale = 0.0;
        self.log_mode = true;
    }

    /// Advances to `k+1`: average the `2d` neighbours, then multiply by
    /// `e^{log_zeta(k+1, x)}`. A scaled step whose slice would span more
    /// than ~280 decades is redone in logs.
    pub(crate) fn forward_step<Z: FnMut(usize, &[i64; 3]) -> f64>(&mut self, scratch: &mut Vec<f64>, mut log_zeta: Z) {
        let t = self.time + 1;
        assert!(t < self.geom.radius(), "weight field box too small for time {t}");
        if scratch.len() != self.values.len() {
            scratch.clear();
            scratch.resize(self.values.len(), if self.log_mode { f64::NEG_INFINITY } else { 0.0 });
        }
        let offs = self.geom.neighbour_offsets();
        if !self.log_mode {
            let inv = 1.0 / offs.len() as f64;
            let prev = &self.values;
            let (mut max, mut min) = (0.0f64, f64::INFINITY);
            self.geom.for_each_site(t, |i, x| {
                let s: f64 = offs.iter().map(|&o| prev[(i as isize + o) as usize]).sum();
                let v = s * inv * log_zeta(t, x).exp();
                scratch[i] = v;
                max = max.max(v);
                min = min.min(v);
            });
            if max.is_finite() && min > max * LOG_SWITCH_RATIO {
                std::mem::swap(&mut self.values, scratch);
                self.time = t;
                let inv = 1.0 / max;
                let v = &mut self.values;
                self.geom.for_each_site(t, |i, _| v[i] *= inv);
                self.log_scale += max.ln();
                return;
            }
            self.to_log_mode();
            scratch.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        }
        let ln_inv = -((offs.len() as f64).ln());
        let prev = &self.values;
        self.geom.for_each_site(t, |i, x| {
            let mut m = f64::NEG_INFINITY;
            for &o in &offs {
                m = m.max(prev[(i as isize + o) as usize]);
            }
            let s: f64 = offs.iter().map(|&o| (prev[(i as isize + o) as usize] - m).exp()).sum();
            scratch[i] = m + s.ln() + ln_inv + log_zeta(t, x);
        });
        std::mem::swap(&mut self.values, scratch);
        self.time = t;
    }
}

/// Log-weight `βω_{k,x} − λ(β)` of the environment at inverse temperature `beta`.
pub fn env_log_zeta(env: &Environment, beta: f64) -> impl Fn(usize, &[i64; 3]) -> f64 + '_ {
    let lambda = env.law().lambda(beta);
    move |k, x| {
        if beta == 0.0 {
            0.0
        } else {
            beta * env.omega(k, x) - lambda
        }
    }
}

/// Runs `Ŵ_0 → Ŵ_n`, calling `observe` on every slice `k = 0..=n`.
pub fn sweep<Z, O>(d: usize, n: usize, log_zeta: Z, mut observe: O) -> WeightField
where
    Z: Fn(usize, &[i64; 3]) -> f64,
    O: FnMut(&WeightField),
{
    let mut field = WeightField::origin(d, n);
    let mut scratch = Vec::new();
    observe(&field);
    for _ in 0..n {
        field.forward_step(&mut scratch, &log_zeta);
        observe(&field);
    }
    field
}

pub(crate) fn check_horizon(env: &Environment, n: usize) -> Result<()> {
    if env.horizon() < n {
        return Err(Error::param(
            "n",
            format!("environment horizon {} is shorter than {n}", env.horizon()),
        ));
    }
    Ok(())
}

/// `Ŵ_n(x)` for every `x`, by the forward recursion from `δ₀`.
pub fn point_to_point(env: &Environment, beta: f64, n: usize) -> Result<WeightField> {
    check_horizon(env, n)?;
    Ok(sweep(env.dim(), n, env_log_zeta(env, beta), |_| {}))
}

/// `log W_n` of a field.
pub fn normalized_partition(field: &WeightField) -> f64 {
    field.log_partition()
}

/// `log W_k` for `k = 0..=n` from one sweep.
pub fn log_partition_path(env: &Environment, beta: f64, n: usize) -> Result<Vec<f64>> {
    check_horizon(env, n)?;
    let mut out = Vec::with_capacity(n + 1);
    sweep(env.dim(), n, env_log_zeta(env, beta), |f| out.push(f.log_partition()));
    Ok(out)
}
