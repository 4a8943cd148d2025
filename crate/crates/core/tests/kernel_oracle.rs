//! Green-kernel envelope against Romberg integration in `u = ln t`, done
//! separately on each side of the kink at `u = 0`.

use embedconst_core::gamma;
use embedconst_core::kernel::{green_kernel_upper, local_bound_constant, local_bound_constant_tol, GreenKernelParams};

fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut prev_row = vec![0.5 * (b - a) * (f(a) + f(b))];
    for level in 1..22 {
        let n = 1usize << level;
        let h = (b - a) / n as f64;
        let mid: f64 = (0..n / 2).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let mut row = vec![0.5 * prev_row[0] + h * mid];
        for m in 1..=level {
            let fac = 4f64.powi(m as i32);
            let next = (fac * row[m - 1] - prev_row[m - 1]) / (fac - 1.0);
            row.push(next);
        }
        let best = *row.last().unwrap();
        let old = *prev_row.last().unwrap();
        if level > 5 && (best - old).abs() <= 1e-13 * best.abs() {
            return best;
        }
        prev_row = row;
    }
    panic!("romberg did not converge on [{a}, {b}]");
}

fn oracle(r: f64, alpha: f64, d: u32, a: f64, b: f64) -> f64 {
    let br2 = b * r * r;
    let g = |u: f64| (0.5 * alpha * u - 0.5 * d as f64 * u.min(0.0) - a * u.exp() - br2 * (-u).exp()).exp();
    (romberg(g, -80.0, 0.0) + romberg(g, 0.0, 8.0)) / gamma(0.5 * alpha).unwrap()
}

#[test]
fn envelope_matches_romberg() {
    let cases = [
        (1.0, 1.0, 3, 1.0, 1.0),
        (0.01, 0.5, 1, 1.0, 1.0),
        (1e-4, 2.5, 3, 2.0, 0.5),
        (5.0, 1.5, 2, 12.5, 1.0),
        (0.3, 3.2, 4, 1.0, 3.0),
        (2.0, 0.1, 1, 1.0, 4.0),
    ];
    for (r, alpha, d, a, b) in cases {
        let kp = GreenKernelParams::new(alpha, d, a, b).unwrap();
        let got = green_kernel_upper(r, &kp).unwrap();
        let want = oracle(r, alpha, d, a, b);
        let err = ((got - want) / want).abs();
        assert!(err < 1e-8, "r={r} alpha={alpha} d={d}: {got} vs {want} ({err:e})");
    }
}

#[test]
fn local_bound_refinement_stable() {
    for d in 1..=3u32 {
        for j in [1, 5, 9] {
            let alpha = 0.1 * j as f64 * d as f64;
            let kp = GreenKernelParams::new(alpha, d, 1.0, 1.0).unwrap();
            let coarse = local_bound_constant(&kp).unwrap();
            let fine = local_bound_constant_tol(&kp, 1e-9).unwrap();
            assert!(coarse.is_finite());
            assert!(((coarse - fine) / fine).abs() < 0.02, "d={d} alpha={alpha}");
        }
    }
}

#[test]
fn local_profile_bounded_near_origin() {
    let kp = GreenKernelParams::new(1.0, 3, 1.0, 1.0).unwrap();
    let norm = |r: f64| green_kernel_upper(r, &kp).unwrap() * r.powf(2.0) * 2.0;
    let (a, b) = (norm(1e-6), norm(1e-5));
    assert!(((a - b) / b).abs() < 1e-3);
}
