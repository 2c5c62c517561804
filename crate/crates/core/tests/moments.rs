use dpre::disorder::{DisorderLaw, Environment};
use dpre::moments::*;
use dpre::polymer::{log_partition_path, second_moment_exact};
use dpre::rng::replica_seed;

#[test]
fn martingale_mean_d2() {
    let e = mc_moment(&DisorderLaw::Gaussian, 0.5, 2, 16, 1.0, 20_000, 1).unwrap();
    assert!((e.estimate - 1.0).abs() <= SIGMAS * e.stderr, "{e:?}");
}

#[test]
fn second_moment_mc_vs_exact() {
    let law = DisorderLaw::Gaussian;
    let exact = second_moment_exact(&law, 0.7, 1, 10).unwrap();
    let e = mc_moment(&law, 0.7, 1, 10, 2.0, 100_000, 5).unwrap();
    assert!((e.estimate - exact).abs() <= SIGMAS * e.stderr, "{} vs {exact} ± {}", e.estimate, e.stderr);
}

#[test]
fn jensen_ordering_in_p() {
    // on common samples E[W^p]^{1/p} is nondecreasing in p exactly
    let rows = replica_log_partitions(&DisorderLaw::Rademacher, 0.8, 1, &[20], 500, 3).unwrap();
    let logs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let norm = |p: f64| (logs.iter().map(|l| (p * l).exp()).sum::<f64>() / logs.len() as f64).powf(1.0 / p);
    let ps = [0.3, 0.7, 1.0, 1.3, 1.7, 2.0];
    for w in ps.windows(2) {
        assert!(norm(w[0]) <= norm(w[1]) * (1.0 + 1e-12));
    }
}

#[test]
fn fractional_moment_monotone_in_n() {
    // W_n^p is a sub- (p > 1) or super- (p < 1) martingale
    let ns = [4, 8, 16, 32];
    let up = mc_moment_series(&DisorderLaw::Gaussian, 0.9, 1, &ns, 1.5, 4000, 9).unwrap();
    let down = mc_moment_series(&DisorderLaw::Gaussian, 0.9, 1, &ns, 0.5, 4000, 9).unwrap();
    for j in 1..ns.len() {
        let se = (up[j].stderr.powi(2) + up[j - 1].stderr.powi(2)).sqrt();
        assert!(up[j].estimate >= up[j - 1].estimate - SIGMAS * se);
        let se = (down[j].stderr.powi(2) + down[j - 1].stderr.powi(2)).sqrt();
        assert!(down[j].estimate <= down[j - 1].estimate + SIGMAS * se);
    }
}

#[test]
fn convex_order_in_beta() {
    // E[W_n^p] grows with β for p > 1 (convex order of W_n in β)
    let law = DisorderLaw::Gaussian;
    let lo = mc_moment(&law, 0.3, 1, 12, 1.8, 20_000, 4).unwrap();
    let hi = mc_moment(&law, 0.6, 1, 12, 1.8, 20_000, 4).unwrap();
    let se = (lo.stderr.powi(2) + hi.stderr.powi(2)).sqrt();
    assert!(hi.estimate >= lo.estimate - SIGMAS * se);
    let e_lo = second_moment_exact(&law, 0.3, 1, 12).unwrap();
    let e_hi = second_moment_exact(&law, 0.6, 1, 12).unwrap();
    assert!(e_hi > e_lo);
}

#[test]
fn martingale_increments() {
    let law = DisorderLaw::Gaussian;
    let (n, r, p) = (12, 4000, 1.5);
    let mut x = Vec::with_capacity(r);
    let mut y = Vec::with_capacity(r);
    for i in 0..r as u64 {
        let env = Environment::new(law.clone(), 1, n + 1, replica_seed(17, i)).unwrap();
        let path = log_partition_path(&env, 0.6, n + 1).unwrap();
        let (a, b) = (path[n].exp(), path[n + 1].exp());
        x.push(a);
        y.push(b - a);
    }
    let rep = martingale_increment_check(&x, &y, p).unwrap();
    assert!(rep.hypothesis_holds, "{rep:?}");
    assert!(rep.lhs <= rep.rhs, "{rep:?}");
    let c = martingale_cp(p).unwrap();
    assert!(c.c_p > 0.0);
}

#[test]
fn fp_positive_d1() {
    let ns: Vec<usize> = (8..=64).step_by(8).collect();
    // plain Monte Carlo of W^p is dominated by rare environments here
    let fit = fp_growth_fit_spine(&DisorderLaw::Gaussian, 1.0, 1, &ns, 1.3, 20_000, 21).unwrap();
    eprintln!("fp slope {} ± {}", fit.slope, fit.slope_stderr);
    assert!(fit.slope > SIGMAS * fit.slope_stderr, "{} ± {}", fit.slope, fit.slope_stderr);
}

#[test]
fn bridge_d1() {
    let rep = bridge_inequality_check(&DisorderLaw::Gaussian, 1, 0.0, 1.5, 1.0, 128, 2000, 13).unwrap();
    eprintln!("{rep:?}");
    assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
}

#[test]
fn paley_zygmund_and_concentration_on_mean_samples() {
    let law = DisorderLaw::Gaussian;
    let rows = replica_log_partitions(&law, 0.5, 2, &[16], 2000, 1).unwrap();
    let logs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let w: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    assert!(paley_zygmund_check(&w, 0.5, 1.5).unwrap().pass);
    assert!(concentration_check(&logs, &law, 0.5, 16, &[1.0, 2.0, 4.0, 8.0]).unwrap().pass);
}

#[test]
fn cp_grid() {
    assert!((martingale_cp(2.0).unwrap().c_p - 1.0).abs() < 1e-6);
    for k in 1..=9 {
        let p = 1.0 + 0.1 * k as f64;
        assert!(martingale_cp(p).unwrap().c_p > 0.0);
    }
}
