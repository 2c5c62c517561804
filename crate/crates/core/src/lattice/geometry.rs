/// Dense box `[-R, R]^d` (d ≤ 3) holding one time slice of a cone.
///
/// Only sites with `|x|₁ ≤ k` and `x₁+…+x_d ≡ k (mod 2)` are touched at
/// time `k`; neighbour lookups at distance one stay inside the box as long
/// as `k < R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeBox {
    d: usize,
    radius: usize,
    strides: [usize; 3],
    len: usize,
}

impl ConeBox {
    pub fn new(d: usize, radius: usize) -> Self {
        assert!((1..=3).contains(&d), "dense boxes support d = 1..=3");
        let side = 2 * radius + 1;
        let mut strides = [0usize; 3];
        let mut s = 1;
        for i in (0..d).rev() {
            strides[i] = s;
            s *= side;
        }
        Self {
            d,
            radius,
            strides,
            len: s,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn index(&self, x: &[i64; 3]) -> usize {
        let r = self.radius as i64;
        (0..self.d)
            .map(|i| {
                debug_assert!(x[i].abs() <= r);
                (x[i] + r) as usize * self.strides[i]
            })
            .sum()
    }

    /// Index offsets of the `2d` nearest neighbours.
    pub fn neighbour_offsets(&self) -> Vec<isize> {
        (0..self.d)
            .flat_map(|i| [self.strides[i] as isize, -(self.strides[i] as isize)])
            .collect()
    }

    pub fn contains(&self, x: &[i64; 3]) -> bool {
        (0..self.d).all(|i| x[i].unsigned_abs() as usize <= self.radius) && x[self.d..].iter().all(|&c| c == 0)
    }

    /// Calls `f(index, x)` for every site of the time-`k` cone slice.
    /// Within a row the index advances by 2 along the last axis.
    #[inline]
    pub fn for_each_site<F: FnMut(usize, &[i64; 3])>(&self, k: usize, mut f: F) {
        debug_assert!(k <= self.radius);
        let k = k as i64;
        match self.d {
            1 => {
                let mut x = [-k, 0, 0];
                while x[0] <= k {
                    f(self.index(&x), &x);
                    x[0] += 2;
                }
            }
            2 => {
                for x0 in -k..=k {
                    let rem = k - x0.abs();
                    let mut x = [x0, -rem, 0];
                    let mut idx = self.index(&x);
                    while x[1] <= rem {
                        f(idx, &x);
                        x[1] += 2;
                        idx += 2;
                    }
                }
            }
            _ => {
                for x0 in -k..=k {
                    let r1 = k - x0.abs();
                    for x1 in -r1..=r1 {
                        let r2 = r1 - x1.abs();
                        let mut x = [x0, x1, -r2];
                        let mut idx = self.index(&x);
                        while x[2] <= r2 {
                            f(idx, &x);
                            x[2] += 2;
                            idx += 2;
                        }
                    }
                }
            }
        }
    }

    /// Number of sites in the time-`k` cone slice.
    pub fn slice_size(&self, k: usize) -> usize {
        let mut n = 0;
        self.for_each_site(k, |_, _| n += 1);
        n
    }
}
