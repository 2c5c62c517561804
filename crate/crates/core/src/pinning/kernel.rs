use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::lattice::WalkSlice;
use crate::moments::{mean_se, observe_at, replicate};

/// Where a [`KernelTable`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub p: f64,
    pub beta: f64,
    pub d: usize,
}

/// `𝒦(n) = E[Σ_y Ŵ_n(y)^p]` for `n = 1..=N`, with partial sums `J_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelTable {
    pub meta: Option<KernelMeta>,
    values: Vec<f64>,
    stderr: Vec<f64>,
    partial: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    n: usize,
    kernel_value: f64,
    stderr: f64,
    partial_sum: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaRow {
    n: usize,
    kernel_value: f64,
    stderr: f64,
    partial_sum: f64,
    p: f64,
    beta: f64,
    d: usize,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("kernel table csv: {e}"))
}

impl KernelTable {
    /// `values[j]` is `𝒦(j+1)`. Values must be positive and finite.
    pub fn new(meta: Option<KernelMeta>, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("kernel", "table is empty"));
        }
        if stderr.len() != values.len() {
            return Err(Error::param("kernel", "stderr length differs from values"));
        }
        if let Some(n) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::param("kernel", format!("value at n = {} is not positive", n + 1)));
        }
        let mut acc = 0.0;
        let partial = values
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        Ok(KernelTable {
            meta,
            values,
            stderr,
            partial,
        })
    }

    /// Exact table `𝒦(n) = f(n)`, no metadata.
    pub fn from_fn<F: Fn(usize) -> f64>(len: usize, f: F) -> Result<Self> {
        let values: Vec<f64> = (1..=len).map(f).collect();
        KernelTable::new(None, values, vec![0.0; len])
    }

    /// Table length `N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `𝒦(n)`, `1 ≤ n ≤ N`.
    pub fn value(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn stderr(&self, n: usize) -> f64 {
        self.stderr[n - 1]
    }

    /// `J_n = Σ_{k≤n} 𝒦(k)`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.partial[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        self.stderr.iter().all(|s| *s == 0.0)
    }

    /// First `n` entries.
    pub fn truncated(&self, n: usize) -> Result<KernelTable> {
        if n > self.len() {
            return Err(Error::KernelTooShort {
                available: self.len(),
                required: n,
            });
        }
        KernelTable::new(self.meta, self.values[..n].to_vec(), self.stderr[..n].to_vec())
    }

    /// `(N, (log J_N − log J_{N/2}) / log 2)` for dyadic `N ≤ len`.
    pub fn dyadic_slopes(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut n = 2;
        while n <= self.len() {
            let s = (self.partial_sum(n).ln() - self.partial_sum(n / 2).ln()) / std::f64::consts::LN_2;
            out.push((n, s));
            n *= 2;
        }
        out
    }

    /// Least-squares slope of `log J_N` on `log N` over the dyadic points
    /// `N_top/2^k, k = 0..=decades`, where `N_top` is the largest power of
    /// two in the table.
    pub fn dyadic_exponent(&self, decades: u32) -> Result<f64> {
        let top = 1usize << (usize::BITS - 1 - self.len().leading_zeros());
        if decades == 0 || top >> decades == 0 {
            return Err(Error::param(
                "decades",
                format!("table of length {} has fewer than {decades} dyadic decades", self.len()),
            ));
        }
        let pts: Vec<(f64, f64)> = (0..=decades)
            .map(|k| {
                let n = top >> k;
                ((n as f64).ln(), self.partial_sum(n).ln())
            })
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }

    /// CSV with columns `n, kernel_value, stderr, partial_sum`, followed by
    /// `p, beta, d` when `with_meta` is set and metadata is present.
    pub fn write_csv<W: Write>(&self, w: W, with_meta: bool) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for n in 1..=self.len() {
            let (kernel_value, stderr, partial_sum) = (self.value(n), self.stderr(n), self.partial_sum(n));
            match (with_meta, self.meta) {
                (true, Some(m)) => wr.serialize(MetaRow {
                    n,
                    kernel_value,
                    stderr,
                    partial_sum,
                    p: m.p,
                    beta: m.beta,
                    d: m.d,
                }),
                _ => wr.serialize(Row {
                    n,
                    kernel_value,
                    stderr,
                    partial_sum,
                }),
            }
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads what [`KernelTable::write_csv`] writes. Rows must be `n = 1, 2, …`.
    pub fn read_csv<R: Read>(r: R) -> Result<KernelTable> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers().map_err(csv_err)?.clone();
        let has_meta = ["p", "beta", "d"].iter().all(|h| headers.iter().any(|x| x == *h));
        let mut values = Vec::new();
        let mut stderr = Vec::new();
        let mut meta = None;
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let (n, v, se) = if has_meta {
                let row: MetaRow = rec.deserialize(Some(&headers)).map_err(csv_err)?;
                meta = Some(KernelMeta {
                    p: row.p,
                    beta: row.beta,
                    d: row.d,
                });
                (row.n, row.kernel_value, row.stderr)
            } else {
                let row: Row = rec.deserialize(Some(&headers)).map_err(csv_err)?;
                (row.n, row.kernel_value, row.stderr)
            };
            if n != values.len() + 1 {
                return Err(Error::Config(format!("kernel table csv: expected n = {}, got {n}", values.len() + 1)));
            }
            values.push(v);
            stderr.push(se);
        }
        KernelTable::new(meta, values, stderr)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", format!("must be at least 1, got {p}")));
    }
    Ok(())
}

/// `𝒦(n) = Σ_x P(X_n = x)^p` from exact walk slices: the `β = 0` kernel.
pub fn kernel_exact_beta0(d: usize, p: f64, n_max: usize) -> Result<KernelTable> {
    check_p(p)?;
    if n_max == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let mut slice = WalkSlice::origin(d, n_max)?;
    let mut scratch = Vec::new();
    let mut values = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        slice.step_in_place(&mut scratch);
        values.push(if p == 1.0 { slice.total() } else { slice.power_sum(p) });
    }
    KernelTable::new(Some(KernelMeta { p, beta: 0.0, d }), values, vec![0.0; n_max])
}

/// Monte Carlo `𝒦(n)` over `r` environments, one sweep per environment.
pub fn kernel_mc(law: &DisorderLaw, beta: f64, d: usize, p: f64, n_max: usize, r: usize, seed: u64) -> Result<KernelTable> {
    let (table, _) = kernel_and_moments_mc(law, beta, d, p, n_max, r, seed)?;
    Ok(table)
}

/// [`kernel_mc`] together with `(E[W_n^p], stderr)` for `n = 1..=N` from the
/// same environments.
#[allow(clippy::type_complexity)]
pub(crate) fn kernel_and_moments_mc(
    law: &DisorderLaw,
    beta: f64,
    d: usize,
    p: f64,
    n_max: usize,
    r: usize,
    seed: u64,
) -> Result<(KernelTable, Vec<(f64, f64)>)> {
    check_p(p)?;
    crate::moments::check_replicas(r)?;
    if n_max == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let ns: Vec<usize> = (1..=n_max).collect();
    let rows: Vec<Vec<(f64, f64)>> = replicate(r, seed, |s| {
        observe_at(law, beta, d, &ns, s, |f| (f.log_power_sum(p).exp(), (p * f.log_partition()).exp()))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(n_max);
    let mut stderr = Vec::with_capacity(n_max);
    let mut moments = Vec::with_capacity(n_max);
    for j in 0..n_max {
        let k: Vec<f64> = rows.iter().map(|row| row[j].0).collect();
        let w: Vec<f64> = rows.iter().map(|row| row[j].1).collect();
        let (m, se) = mean_se(&k);
        values.push(m);
        stderr.push(se);
        moments.push(mean_se(&w));
    }
    let table = KernelTable::new(Some(KernelMeta { p, beta, d }), values, stderr)?;
    Ok((table, moments))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_value_and_p_one() {
        for d in 1..=3 {
            let t = kernel_exact_beta0(d, 1.5, 3).unwrap();
            let want = ((2 * d) as f64).powf(-0.5);
            assert!((t.value(1) - want).abs() < 1e-15);
            let t = kernel_exact_beta0(d, 1.0, 10).unwrap();
            assert!(t.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
        }
    }

    #[test]
    fn d1_second_value() {
        // P(X_2 = 0) = 1/2, P(X_2 = ±2) = 1/4
        let t = kernel_exact_beta0(1, 2.0, 2).unwrap();
        assert!((t.value(2) - (0.25 + 2.0 / 16.0)).abs() < 1e-15);
        assert!((t.partial_sum(2) - (0.5 + 0.375)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let t = kernel_exact_beta0(2, 1.3, 12).unwrap();
        for with_meta in [false, true] {
            let mut buf = Vec::new();
            t.write_csv(&mut buf, with_meta).unwrap();
            let back = KernelTable::read_csv(buf.as_slice()).unwrap();
            assert_eq!(back.values(), t.values());
            assert_eq!(back.meta.is_some(), with_meta);
        }
        let text = "n,kernel_value,stderr,partial_sum\n1,0.5,0,0.5\n3,0.2,0,0.7\n";
        assert!(KernelTable::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(KernelTable::from_fn(4, |n| 2.0 - n as f64).is_err());
    }

    #[test]
    fn dyadic_exponent_of_power_law() {
        let t = KernelTable::from_fn(1024, |n| (n as f64).powf(-0.25)).unwrap();
        let s = t.dyadic_exponent(3).unwrap();
        assert!((s - 0.75).abs() < 0.01, "{s}");
        assert!(t.dyadic_exponent(11).is_err());
        assert_eq!(t.dyadic_slopes().len(), 10);
    }

    #[test]
    fn mc_first_value_closed_form() {
        // n = 1: E[ζ^p] (2d)^{1−p} with E[ζ^p] = e^{λ(pβ) − pλ(β)}
        let (beta, p, d) = (0.6, 1.5, 2);
        let t = kernel_mc(&DisorderLaw::Gaussian, beta, d, p, 3, 4000, 11).unwrap();
        let want = ((p * p - p) * beta * beta / 2.0).exp() * ((2 * d) as f64).powf(1.0 - p);
        assert!((t.value(1) - want).abs() < 4.0 * t.stderr(1));
    }
}
