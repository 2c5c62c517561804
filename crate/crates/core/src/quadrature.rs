//! Adaptive Gauss–Legendre quadrature.

use std::sync::OnceLock;

const ORDER: usize = 20;
/// Cap on the number of subintervals of one integral.
const MAX_INTERVALS: usize = 4000;

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(ORDER))
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// One subinterval: its two-half estimate and the disagreement with the
/// one-panel estimate.
struct Piece {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl Piece {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64) -> Piece {
        let m = 0.5 * (a + b);
        let (left, right) = (fixed(f, a, m), fixed(f, m, b));
        let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
        let err = ((left + right - whole).abs() - floor).max(0.0);
        Piece { a, b, left, right, err }
    }
}

/// Globally adaptive: always bisect the piece with the largest error
/// estimate until the total meets `abs_tol` or the interval cap is hit.
fn adapt<F: Fn(f64) -> f64>(f: &F, mut pieces: Vec<Piece>, abs_tol: f64) -> f64 {
    loop {
        let total: f64 = pieces.iter().map(|p| p.err).sum();
        if total <= abs_tol || pieces.len() >= MAX_INTERVALS {
            return pieces.iter().map(|p| p.left + p.right).sum();
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.err > acc.1 { (i, p.err) } else { acc });
        let p = pieces.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        pieces.push(Piece::new(f, p.a, m, p.left));
        pieces.push(Piece::new(f, m, p.b, p.right));
    }
}

/// Integral of `f` over `[a, b]` to relative tolerance `rel_tol`
/// (absolute floor `1e-300`).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    integrate_split(f, a, b, &[], rel_tol)
}

/// Composite 20-point rule on equal panels no wider than `width`. Fixed
/// cost, for smooth integrands where an error target is not reachable.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, width: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let k = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / k as f64;
    (0..k).map(|i| fixed(&f, a + i as f64 * h, a + (i + 1) as f64 * h)).sum()
}

/// Integral over `[a, b]` split at the interior points `breaks`
/// (kinks of the integrand).
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    cuts.extend(inner);
    cuts.push(b);
    // A coarse pass over every piece sets one absolute scale for the error
    // budget, so a negligible piece is not refined to its own relative error.
    let pieces = 8;
    let coarse: Vec<Piece> = cuts
        .windows(2)
        .flat_map(|w| {
            let h = (w[1] - w[0]) / pieces as f64;
            (0..pieces).map(move |i| (w[0] + i as f64 * h, w[0] + (i + 1) as f64 * h))
        })
        .map(|(x, y)| Piece::new(&f, x, y, fixed(&f, x, y)))
        .collect();
    let scale: f64 = coarse.iter().map(|p| (p.left + p.right).abs()).sum::<f64>().max(1e-300);
    adapt(&f, coarse, rel_tol * scale)
}
