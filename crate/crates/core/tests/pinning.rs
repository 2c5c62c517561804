use dpre::moments::Verdict;
use dpre::oracle::renewal_by_subsets;
use dpre::pinning::*;

#[test]
fn beta0_exponent_d1() {
    let t = kernel_exact_beta0(1, 1.5, 4096).unwrap();
    let s = t.dyadic_exponent(3).unwrap();
    eprintln!("d=1 p=1.5 slope {s}");
    assert!((s - 0.75).abs() < 0.1);
}

#[test]
fn beta0_exponent_grid() {
    // (d, p, N): slope near (d+2−dp)/2 and never above d+2−dp
    for (d, p, n) in [(1, 1.2, 4096), (2, 1.2, 512), (2, 1.5, 512), (3, 1.2, 128), (3, 1.5, 128)] {
        let t = kernel_exact_beta0(d, p, n).unwrap();
        let s = t.dyadic_exponent(3).unwrap();
        let half = (d as f64 + 2.0 - d as f64 * p) / 2.0;
        eprintln!("d={d} p={p} N={n}: slope {s} target {half}");
        assert!(s <= 2.0 * half + 0.1);
        let tol = if d == 3 { 0.15 } else { 0.1 };
        assert!((s - half).abs() < tol, "d={d} p={p}: {s} vs {half}");
    }
}

#[test]
fn phi_constant_kernel() {
    let t = KernelTable::from_fn(1000, |_| 1.0).unwrap();
    for v in [1e-3, 1e-2, 0.1, 1.0, 10.0] {
        let s = phi_of_v(&t, v).unwrap();
        assert!((s.phi - v.ln_1p()).abs() < 1e-10, "v={v}");
        assert!(s.residual <= 1e-10);
    }
}

#[test]
fn phi_square_root_kernel_slope() {
    let t = KernelTable::from_fn(10_000, |n| (n as f64).powf(-0.5)).unwrap();
    let vs: Vec<f64> = (0..=8).map(|k| 10f64.powf(-4.0 + 0.25 * k as f64)).collect();
    let pts: Vec<(f64, f64)> = vs.iter().map(|&v| (v.ln(), phi_of_v(&t, v).unwrap().phi.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    eprintln!("slope {slope}");
    assert!((slope - 2.0).abs() < 0.05);
    // direct summation oracle at one v where the table is long enough
    let v = 0.05;
    let phi = phi_of_v(&t, v).unwrap().phi;
    let direct: f64 = (1..2_000_000).map(|n| (n as f64).powf(-0.5) * (-(n as f64) * phi).exp()).sum();
    assert!((direct * v - 1.0).abs() < 1e-8, "{direct}");
}

#[test]
fn renewal_bound_synthetic() {
    for t in [
        KernelTable::from_fn(400, |_| 1.0).unwrap(),
        KernelTable::from_fn(400, |n| (n as f64).powf(-0.5)).unwrap(),
    ] {
        for v in [1e-3, 0.05, 0.5, 3.0] {
            let r = renewal_series(&t, v, 200).unwrap();
            assert!(r.max_ratio() <= 1.0 + 1e-10, "v={v}: {}", r.max_ratio());
        }
        for v in [0.3, 1.7] {
            let lz = renewal_log_series(&t, v, 12).unwrap();
            for (m, l) in lz.iter().enumerate() {
                let want = renewal_by_subsets(t.values(), v, m);
                assert!((l.exp() - want).abs() <= 1e-12 * want.max(1.0), "m={m}");
            }
        }
    }
}

#[test]
fn chaos_bound_d1() {
    let r = chaos_upper_bound_check(0.0, 0.1, 1.5, 1, 32, 100_000, 2024).unwrap();
    eprintln!("{r:?}");
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn chaos_bound_d2() {
    let r = chaos_upper_bound_check(0.0, 0.05, 1.8, 2, 24, 20_000, 7).unwrap();
    eprintln!("{r:?}");
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn mc_kernel_matches_exact_at_beta0() {
    let exact = kernel_exact_beta0(2, 1.5, 10).unwrap();
    let mc = kernel_mc(&dpre::disorder::DisorderLaw::Gaussian, 0.0, 2, 1.5, 10, 5, 1).unwrap();
    for n in 1..=10 {
        assert!((mc.value(n) - exact.value(n)).abs() <= 1e-12 + 4.0 * mc.stderr(n));
    }
}

#[test]
fn mc_kernel_decreases_in_p() {
    let law = dpre::disorder::DisorderLaw::Gaussian;
    let a = kernel_mc(&law, 0.5, 1, 1.2, 16, 500, 3).unwrap();
    let b = kernel_mc(&law, 0.5, 1, 1.6, 16, 500, 3).unwrap();
    for n in 1..=16 {
        let se = (a.stderr(n).powi(2) + b.stderr(n).powi(2)).sqrt();
        assert!(b.value(n) <= a.value(n) + 4.0 * se);
    }
}
