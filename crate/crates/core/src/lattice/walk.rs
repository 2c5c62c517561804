use crate::error::{Error, Result};
use crate::lattice::ConeBox;

/// Law of the simple random walk `X_n` on `ℤ^d` at a fixed time.
#[derive(Debug, Clone)]
pub struct WalkSlice {
    geom: ConeBox,
    time: usize,
    probs: Vec<f64>,
}

impl WalkSlice {
    /// `δ₀` at time 0, in a box large enough for `capacity` further steps.
    pub fn origin(d: usize, capacity: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::param("d", format!("dense slices support d = 1..=3, got {d}")));
        }
        let geom = ConeBox::new(d, capacity + 1);
        let mut probs = vec![0.0; geom.len()];
        probs[geom.index(&[0, 0, 0])] = 1.0;
        Ok(Self { geom, time: 0, probs })
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

    /// `P(X_n = x)`; zero outside the box.
    pub fn prob(&self, x: &[i64; 3]) -> f64 {
        if self.geom.contains(x) {
            self.probs[self.geom.index(x)]
        } else {
            0.0
        }
    }

    pub fn total(&self) -> f64 {
        let mut s = 0.0;
        self.geom.for_each_site(self.time, |i, _| s += self.probs[i]);
        s
    }

    /// `Σ_x P(X_n = x)^p`.
    pub fn power_sum(&self, p: f64) -> f64 {
        let mut s = 0.0;
        self.geom.for_each_site(self.time, |i, _| {
            let q = self.probs[i];
            if q > 0.0 {
                s += q.powf(p);
            }
        });
        s
    }

    /// Visits `(x, P(X_n = x))` over the time-`n` cone slice.
    pub fn for_each<F: FnMut(&[i64; 3], f64)>(&self, mut f: F) {
        self.geom.for_each_site(self.time, |i, x| f(x, self.probs[i]));
    }

    /// Advances one step in place, growing the box when it is full.
    pub fn step_in_place(&mut self, scratch: &mut Vec<f64>) {
        // neighbours of the time-(n+1) slice reach |x_i| = n + 2
        if self.time + 2 > self.geom.radius() {
            *self = self.regrown(2 * self.geom.radius() + 1);
        }
        scratch.clear();
        scratch.resize(self.probs.len(), 0.0);
        let offs = self.geom.neighbour_offsets();
        let inv = 1.0 / offs.len() as f64;
        let prev = &self.probs;
        self.geom.for_each_site(self.time + 1, |i, _| {
            let s: f64 = offs.iter().map(|&o| prev[(i as isize + o) as usize]).sum();
            scratch[i] = s * inv;
        });
        std::mem::swap(&mut self.probs, scratch);
        self.time += 1;
    }

    fn regrown(&self, radius: usize) -> Self {
        let geom = ConeBox::new(self.geom.dim(), radius);
        let mut probs = vec![0.0; geom.len()];
        self.geom.for_each_site(self.time, |i, x| probs[geom.index(x)] = self.probs[i]);
        Self {
            geom,
            time: self.time,
            probs,
        }
    }
}

/// One step of the walk: each site averages its `2d` neighbours.
pub fn srw_step(slice: &WalkSlice) -> WalkSlice {
    let mut out = slice.clone();
    let mut scratch = Vec::new();
    out.step_in_place(&mut scratch);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_in_d1() {
        let s = srw_step(&WalkSlice::origin(1, 0).unwrap());
        assert_eq!(s.prob(&[-1, 0, 0]), 0.5);
        assert_eq!(s.prob(&[1, 0, 0]), 0.5);
        assert_eq!(s.prob(&[0, 0, 0]), 0.0);
    }

    #[test]
    fn d2_two_step_return() {
        // enumerate the 16 step pairs
        let steps = [[1i64, 0], [-1, 0], [0, 1], [0, -1]];
        let back = steps
            .iter()
            .flat_map(|a| steps.iter().map(move |b| (a[0] + b[0], a[1] + b[1])))
            .filter(|&s| s == (0, 0))
            .count();
        let s = srw_step(&srw_step(&WalkSlice::origin(2, 2).unwrap()));
        assert_eq!(s.prob(&[0, 0, 0]), back as f64 / 16.0);
        assert_eq!(s.prob(&[0, 0, 0]), 0.25);
    }

    #[test]
    fn mass_conserved() {
        for d in 1..=3 {
            let n = if d == 3 { 60 } else { 200 };
            let mut s = WalkSlice::origin(d, n).unwrap();
            let mut scratch = Vec::new();
            for _ in 0..n {
                let before = s.total();
                s.step_in_place(&mut scratch);
                assert!((s.total() - before).abs() < 1e-12);
                assert!((s.total() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grows_past_capacity() {
        let mut s = WalkSlice::origin(2, 1).unwrap();
        let mut scratch = Vec::new();
        for _ in 0..7 {
            s.step_in_place(&mut scratch);
        }
        assert_eq!(s.time(), 7);
        assert!((s.total() - 1.0).abs() < 1e-14);
        assert_eq!(s.prob(&[7, 0, 0]), 0.25f64.powi(7));
    }
}
