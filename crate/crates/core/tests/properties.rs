use num_complex::Complex64;
use proptest::prelude::*;
use ringlaw::freeconv::{solve_delta_conv, solve_phi_system, ImaginaryAxis, DEFAULT_MAX_ITER, DEFAULT_TOL};
use ringlaw::linalg::{haar_unitary, hermitian_eigensystem, log_abs_det, ComplexDenseMatrix};
use ringlaw::measure::{levy_distance, nevanlinna_rep};
use ringlaw::models::{hermitization, SingleRingEnsemble, Symmetry};
use ringlaw::rng::{complex_normal, rng_from_seed};
use ringlaw::DiscreteMeasure;

fn positive_measure() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0.1f64..3.0, 0.05f64..1.0), 2..6).prop_filter_map("distinct atoms", |pairs| {
        let atoms: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let mu = DiscreteMeasure::from_unsorted(&atoms, &weights).ok()?;
        (mu.len() >= 2).then_some(mu)
    })
}

fn real_measure() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..6).prop_map(|pairs| {
        let atoms: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        DiscreteMeasure::from_unsorted(&atoms, &weights).unwrap()
    })
}

fn random_matrix(n: usize, seed: u64) -> ComplexDenseMatrix {
    let mut rng = rng_from_seed(seed);
    ComplexDenseMatrix::from_fn(n, n, |_, _| complex_normal(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetric_transform_is_imaginary_on_axis(mu in positive_measure(), eta in 0.01f64..10.0) {
        let m = mu.symmetrize().stieltjes(Complex64::new(0.0, eta)).unwrap();
        prop_assert!(m.re.abs() <= 1e-14 * m.norm().max(1.0));
        prop_assert!(m.im > 0.0);
    }

    #[test]
    fn transform_decays_like_minus_inverse(mu in real_measure()) {
        let z = Complex64::new(0.0, 1e12);
        let m = mu.stieltjes(z).unwrap();
        prop_assert!((z * m + 1.0).norm() < 1e-9);
    }

    #[test]
    fn nevanlinna_measure_reconstructs_f(mu in positive_measure(), re in -2.0f64..2.0, im in 0.05f64..2.0) {
        let sym = mu.symmetrize();
        let rep = nevanlinna_rep(&sym).unwrap();
        let w = Complex64::new(re, im);
        let lhs = sym.neg_recip_stieltjes(w).unwrap() - w;
        prop_assert!((lhs - rep.mu_hat.cauchy(w)).norm() < 1e-8 * (1.0 + lhs.norm()));
        let radii = mu.radii().unwrap();
        prop_assert!((rep.mu_hat.mass() - radii.r_plus.powi(2)).abs() < 1e-9);
        prop_assert!((rep.r_minus_sq - radii.r_minus.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn radii_scale_linearly(mu in positive_measure(), c in 0.1f64..10.0) {
        let a = mu.radii().unwrap();
        let b = mu.scaled(c).unwrap().radii().unwrap();
        prop_assert!((b.r_minus - c * a.r_minus).abs() < 1e-12 * c * a.r_minus);
        prop_assert!((b.r_plus - c * a.r_plus).abs() < 1e-12 * c * a.r_plus);
        prop_assert!(a.r_minus <= a.r_plus);
    }

    #[test]
    fn levy_distance_is_a_metric(a in real_measure(), b in real_measure(), c in real_measure()) {
        let ab = levy_distance(&a, &b);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - levy_distance(&b, &a)).abs() < 1e-9);
        prop_assert!(levy_distance(&a, &a) < 1e-9);
        prop_assert!(levy_distance(&a, &c) <= ab + levy_distance(&b, &c) + 1e-9);
    }

    #[test]
    fn general_solver_agrees_with_delta_solver(
        mu in positive_measure(),
        r in 0.2f64..3.0,
        re in -2.0f64..2.0,
        im in 0.05f64..2.0,
    ) {
        let sym = mu.symmetrize();
        let z = Complex64::new(re, im);
        let a = solve_delta_conv(&sym, r, z, DEFAULT_TOL).unwrap();
        let b = solve_phi_system(&sym, &DiscreteMeasure::point_mass(r).symmetrize(), z, DEFAULT_TOL, DEFAULT_MAX_ITER)
            .unwrap();
        prop_assert!((a.m - b.m).norm() < 1e-8 * (1.0 + a.m.norm()), "{} vs {}", a.m, b.m);
        prop_assert!(a.m.im > 0.0 && a.omega1.im >= im * (1.0 - 1e-9) && a.omega2.im >= im * (1.0 - 1e-9));
    }

    #[test]
    fn axis_solution_is_symmetric_and_bounded(mu in positive_measure(), r in 0.2f64..3.0, eta in 0.01f64..5.0) {
        let sym = mu.symmetrize();
        let st = solve_delta_conv(&sym, r, Complex64::new(0.0, eta), DEFAULT_TOL).unwrap();
        prop_assert!(st.m.re.abs() < 1e-12 && st.omega2.re.abs() < 1e-12);
        // |ω₂(iη) − iη| ≤ r²/η
        prop_assert!((st.omega2 - Complex64::new(0.0, eta)).norm() <= r * r / eta * (1.0 + 1e-9));
        // off-axis mirror: m(−z̄) = −conj(m(z))
        let z = Complex64::new(0.7, eta);
        let p = solve_delta_conv(&sym, r, z, DEFAULT_TOL).unwrap().m;
        let q = solve_delta_conv(&sym, r, Complex64::new(-0.7, eta), DEFAULT_TOL).unwrap().m;
        prop_assert!((p + q.conj()).norm() < 1e-9);
    }

    #[test]
    fn eta_im_m_is_monotone(mu in positive_measure(), r in 0.2f64..3.0) {
        let axis = ImaginaryAxis::new(&mu.symmetrize()).unwrap();
        let mut last = 0.0;
        for k in 0..12 {
            let eta = 0.01 * 2f64.powi(k);
            let v = eta * axis.solve(r, eta).unwrap().im_m();
            prop_assert!(v >= last - 1e-12 && v <= 1.0 + 1e-12);
            last = v;
        }
    }

    #[test]
    fn eigen_trace_identities(n in 1usize..24, seed in any::<u64>()) {
        let g = random_matrix(n, seed);
        let h = g.matmul(&g.adjoint()).unwrap().sub(&ComplexDenseMatrix::identity(n)).unwrap();
        let mut h = h;
        for i in 0..n {
            for j in i..n {
                let a = 0.5 * (h[(i, j)] + h[(j, i)].conj());
                h[(i, j)] = a;
                h[(j, i)] = a.conj();
            }
        }
        let s = hermitian_eigensystem(&h, true).unwrap();
        let scale = h.frobenius_norm().max(1.0);
        prop_assert!((s.eigenvalues.iter().sum::<f64>() - h.trace().re).abs() < 1e-10 * scale);
        let sq: f64 = s.eigenvalues.iter().map(|l| l * l).sum();
        prop_assert!((sq - h.frobenius_norm().powi(2)).abs() < 1e-10 * scale * scale);
        prop_assert!(s.residual < 1e-10 * scale);
    }

    #[test]
    fn log_det_is_multiplicative(n in 1usize..16, seed in any::<u64>()) {
        let a = random_matrix(n, seed);
        let b = random_matrix(n, seed.wrapping_add(1));
        let ab = log_abs_det(&a.matmul(&b).unwrap()).unwrap().value;
        let sum = log_abs_det(&a).unwrap().value + log_abs_det(&b).unwrap().value;
        prop_assert!((ab - sum).abs() < 1e-9 * (1.0 + sum.abs()));
    }

    #[test]
    fn hermitization_spectrum_is_symmetric(n in 1usize..12, seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let sigma: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 / n as f64).collect();
        let e = SingleRingEnsemble::new(sigma, Symmetry::Unitary, seed).unwrap();
        let x = e.sample_x(&mut rng_from_seed(seed));
        let eig = hermitian_eigensystem(&hermitization(&x, Complex64::new(re, im)).unwrap(), false).unwrap().eigenvalues;
        for k in 0..n {
            prop_assert!((eig[k] + eig[2 * n - 1 - k]).abs() < 1e-10);
        }
    }
}

#[test]
fn haar_second_moments() {
    let mut rng = rng_from_seed(77);
    let n = 6;
    let trials = 4000;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for _ in 0..trials {
        let u = haar_unitary(n, &mut rng);
        let a = u[(1, 2)].norm_sqr();
        m2 += a;
        m4 += a * a;
    }
    m2 /= trials as f64;
    m4 /= trials as f64;
    // E|U_ij|² = 1/n, E|U_ij|⁴ = 2/(n(n+1))
    assert!((m2 - 1.0 / 6.0).abs() < 0.01, "{m2}");
    assert!((m4 - 2.0 / 42.0).abs() < 0.006, "{m4}");
}
