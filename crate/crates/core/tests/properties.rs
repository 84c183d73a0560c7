mod common;

use std::f64::consts::PI;

use common::*;
use invcurve_core::arithmetic::{continued_fraction, dist_to_z, reduced_phase, twisted_divisor};
use invcurve_core::cohomology::{
    apply_m_alpha, apply_m_alpha_beta, classical_residual, solve_classical, solve_twisted, twisted_residual,
    DEFAULT_DELTA_MIN,
};
use invcurve_core::transversality::kronecker_index;
use invcurve_core::{Complex64, FiberedMap, PeriodicFunction};
use proptest::prelude::*;

/// Same bound as the acceptance suite.
const MAX_TAME_CONSTANT: f64 = 4.0;

fn sizes() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![8usize, 16, 32, 64])
}

fn smooth_fn(seed: u64, size: usize, amplitude: f64) -> PeriodicFunction {
    random_function(&mut rng(seed), size, amplitude)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dist_to_z_is_periodic_and_bounded(x in -1e3..1e3f64, k in -100i32..100) {
        let d = dist_to_z(x);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((dist_to_z(x + k as f64) - d).abs() <= 1e-9);
        prop_assert!((dist_to_z(-x) - d).abs() <= 1e-12);
    }

    #[test]
    fn reduced_phase_is_a_representative(n in -10_000i64..10_000, alpha in 0.0..1.0f64, beta in 0.0..1.0f64) {
        let x = reduced_phase(n, alpha, beta);
        prop_assert!((-0.5..=0.5).contains(&x));
        prop_assert!(dist_to_z(x - (n as f64 * alpha - beta)) <= 1e-9);
    }

    #[test]
    fn divisor_bounds(n in -1000i64..1000, alpha in 0.0..1.0f64, beta in 0.0..1.0f64) {
        let d = twisted_divisor(n, alpha, beta);
        let x = dist_to_z(reduced_phase(n, alpha, beta));
        let m = d.norm();
        prop_assert!(4.0 * x <= m * (1.0 + 1e-12));
        prop_assert!(m <= 2.0 * PI * x * (1.0 + 1e-12) && m <= 2.0 + 1e-12);
        let direct = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * alpha)
            - Complex64::from_polar(1.0, 2.0 * PI * beta);
        prop_assert!((d - direct).norm() <= 1e-9);
    }

    #[test]
    fn convergents_are_good_approximations(x in 1e-3..(1.0 - 1e-3f64)) {
        let cf = continued_fraction(x, 30);
        for &(p, q) in cf.convergents.iter().take_while(|c| c.1 <= 1_000_000) {
            let q = q as f64;
            prop_assert!((x - p as f64 / q).abs() < 1.0 / (q * q));
        }
    }

    #[test]
    fn sample_round_trip(size in sizes(), raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64)) {
        let samples: Vec<_> = raw[..size].iter().map(|&(a, b)| c(a, b)).collect();
        let f = PeriodicFunction::from_samples(&samples).unwrap();
        for (x, y) in f.samples().iter().zip(&samples) {
            prop_assert!((x - y).norm() <= 1e-14);
        }
        let g = PeriodicFunction::from_centered(&f.centered()).unwrap();
        prop_assert_eq!(g, f);
    }

    #[test]
    fn winding_degree_is_additive(k1 in -5i64..=5, k2 in -5i64..=5, seed in 0u64..1000) {
        let perturb = |s: u64, k: i64| {
            PeriodicFunction::mode(64, k, c(1.0, 0.0))
                .unwrap()
                .mul(&smooth_fn(s, 64, 0.3).exp())
                .unwrap()
        };
        let f = perturb(seed, k1);
        let g = perturb(seed + 1, k2);
        prop_assert_eq!(f.winding_degree().unwrap(), k1);
        prop_assert_eq!(g.winding_degree().unwrap(), k2);
        prop_assert_eq!(f.mul(&g).unwrap().winding_degree().unwrap(), k1 + k2);
    }

    #[test]
    fn exp_inverts_log(seed in 0u64..1000, amplitude in 0.01..2.0f64) {
        // Degree-zero functions form the domain of the logarithm.
        let f = smooth_fn(seed, 128, amplitude).exp();
        let back = f.log_nonvanishing().unwrap().exp();
        prop_assert!((&back - &f).c0_norm() <= 1e-10 * f.c0_norm());
    }

    #[test]
    fn grid_shifts_preserve_seminorms(seed in 0u64..1000, shift in 0usize..64, r in 0u32..=4) {
        let f = smooth_fn(seed, 64, 1.0);
        let a = f.cr_seminorm(r).unwrap();
        let b = f.rotate(shift as f64 / 64.0).cr_seminorm(r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn rotation_preserves_seminorms(seed in 0u64..1000, alpha in 0.0..1.0f64, r in 0u32..=4) {
        // Grid maxima of a degree-K polynomial sampled at N points lie within
        // a factor cos(πK/N) of the sup, which bounds the gap between shifts.
        let f = smooth_fn(seed, 64, 1.0);
        let a = f.cr_seminorm(r).unwrap();
        let b = f.rotate(alpha).cr_seminorm(r).unwrap();
        let k = f.modes().filter(|(_, c)| c.norm() > 0.0).map(|(n, _)| n.abs()).max().unwrap();
        let slack = 1.0 / (PI * k as f64 / 64.0).cos() - 1.0;
        prop_assert!((a - b).abs() <= slack * a.max(b));
    }

    #[test]
    fn smoothing_estimates(seed in 0u64..1000, t in 2.0..16.0f64, k in 0u32..=3, gap in 0u32..=3) {
        let n = k + gap;
        let f = random_rough(&mut rng(seed), 128, 3.0);
        let s = f.smooth(t).unwrap();
        let cr = |g: &PeriodicFunction, r| g.cr_seminorm(r).unwrap();
        let cs = cr(&s, n) / (t.powi(gap as i32) * cr(&f, k)) / (2.0 * PI).powi(gap as i32);
        let cb = cr(&(&f - &s), k) / (t.powi(-(gap as i32)) * cr(&f, n)) * PI.powi(gap as i32);
        prop_assert!(cs <= MAX_TAME_CONSTANT, "S_t constant {}", cs);
        prop_assert!(cb <= MAX_TAME_CONSTANT, "1 - S_t constant {}", cb);
    }

    #[test]
    fn hadamard_interpolation(seed in 0u64..1000, decay in 1.5..5.0f64, triple in 0usize..2) {
        let (k, l, n) = [(0, 1, 2), (0, 2, 4)][triple];
        let f = random_rough(&mut rng(seed), 128, decay);
        let cr = |r| f.cr_seminorm(r).unwrap();
        let a = (l - k) as f64 / (n - k) as f64;
        let h = cr(l) / (cr(k).powf(1.0 - a) * cr(n).powf(a));
        prop_assert!(h <= MAX_TAME_CONSTANT, "constant {}", h);
    }

    #[test]
    fn solvers_are_linear(s1 in 0u64..1000, s2 in 0u64..1000, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let f = random_mean_zero(&mut rng(s1), 64, 1.0);
        let g = random_mean_zero(&mut rng(s2), 64, 1.0);
        let combo = &(&f * a) + &(&g * b);
        let solve = |h: &PeriodicFunction| solve_classical(h, GOLDEN, DEFAULT_DELTA_MIN).unwrap().psi;
        let lhs = solve(&combo);
        let rhs = &(&solve(&f) * a) + &(&solve(&g) * b);
        prop_assert!((&lhs - &rhs).c0_norm() <= 1e-12 * (1.0 + rhs.c0_norm()));

        let twist = |h: &PeriodicFunction| solve_twisted(h, GOLDEN, 0.5, DEFAULT_DELTA_MIN).unwrap().psi;
        let lhs = twist(&combo);
        let rhs = &(&twist(&f) * a) + &(&twist(&g) * b);
        prop_assert!((&lhs - &rhs).c0_norm() <= 1e-12 * (1.0 + rhs.c0_norm()));
    }

    #[test]
    fn solvers_invert_their_operators(seed in 0u64..1000, beta in 0.05..0.95f64) {
        let phi = random_mean_zero(&mut rng(seed), 64, 1.0);
        let psi = solve_classical(&phi, GOLDEN, DEFAULT_DELTA_MIN).unwrap().psi;
        prop_assert!(classical_residual(&psi, &phi, GOLDEN).unwrap() <= 1e-12);
        prop_assert!(psi.mean().norm() <= 1e-15);
        // Feeding the coboundary back recovers ψ.
        let again = solve_classical(&(&psi.rotate(GOLDEN) - &psi), GOLDEN, DEFAULT_DELTA_MIN).unwrap().psi;
        prop_assert!((&again - &psi).c0_norm() <= 1e-10 * psi.c0_norm().max(1.0));
        let m = apply_m_alpha(&phi, GOLDEN).unwrap();
        prop_assert!((&m + &psi).c0_norm() <= 1e-14 * psi.c0_norm().max(1.0));

        let phi = smooth_fn(seed, 64, 1.0);
        let psi = solve_twisted(&phi, GOLDEN, beta, DEFAULT_DELTA_MIN).unwrap().psi;
        prop_assert!(twisted_residual(&psi, &phi, GOLDEN, beta).unwrap() <= 1e-10);
        let m = apply_m_alpha_beta(&phi, GOLDEN, beta).unwrap();
        prop_assert!((&m + &psi).c0_norm() <= 1e-14 * psi.c0_norm().max(1.0));
    }

    #[test]
    fn rescaling_keeps_rotation_number(seed in 0u64..1000, m in 1.0..100.0f64) {
        let f = perturbed_map(seed, 32, 0.05, 0.5);
        let u = smooth_fn(seed + 7, 32, 0.3);
        let g = f.rescale(m).unwrap();
        let a = f.rotation_number_integral(&u).unwrap();
        let b = g.rotation_number_integral(&(&u * m)).unwrap();
        prop_assert!((a - b).norm() <= 1e-10);
    }

    #[test]
    fn first_order_eval_matches_difference_quotient(seed in 0u64..1000) {
        let mut r = rng(seed);
        let rho = (0..4).map(|_| random_function(&mut r, 32, 0.2)).collect();
        let f = FiberedMap::new(GOLDEN, 0.5, rho, 2.0).unwrap();
        let u = random_function(&mut r, 32, 0.5);
        let h = 1e-5;
        let up = f.eval(0, &u.add_constant(c(h, 0.0))).unwrap();
        let dn = f.eval(0, &u.add_constant(c(-h, 0.0))).unwrap();
        let fd = &(&up - &dn) * (0.5 / h);
        prop_assert!((&fd - &f.eval(1, &u).unwrap()).c0_norm() <= 1e-8);
    }

    #[test]
    fn kronecker_index_counts_enclosed_roots(
        roots in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, any::<bool>()), 0..5)
    ) {
        // Inside roots sit in |s| ≤ 0.7, outside roots in 1.4 ≤ |s| ≤ 2.
        let roots: Vec<(Complex64, bool)> = roots
            .iter()
            .map(|&(r, phi, inside)| {
                let radius = if inside { 0.7 * r } else { 1.4 + 0.6 * r };
                (Complex64::from_polar(radius, 2.0 * PI * phi), inside)
            })
            .collect();
        let poly = |s: Complex64| roots.iter().map(|(z, _)| s - z).product::<Complex64>();
        let idx = kronecker_index(|s| Ok(poly(s)), c(0.0, 0.0), 1.0, 512).unwrap().index;
        let expected = roots.iter().filter(|(_, inside)| *inside).count() as i64;
        prop_assert_eq!(idx, expected);
    }
}
