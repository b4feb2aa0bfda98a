use kclose_core::operators::{fejer_smooth, harmonic_conjugate, riesz_neg, riesz_pos};
use kclose_core::{lp_norm, weak_l1, Axis, Complex64, DistributionFunction, GridDomain, GridFunction, Spectrum};
use proptest::prelude::*;

fn poly(m: usize, coeffs: &[(f64, f64)]) -> GridFunction {
    // Frequencies -len/2 .. len/2, all well inside the window.
    let d = GridDomain::circle(m).unwrap();
    let half = (coeffs.len() / 2) as isize;
    let spec = Spectrum::from_fn(d, |k, _| {
        let idx = k + half;
        if idx >= 0 && (idx as usize) < coeffs.len() {
            let (re, im) = coeffs[idx as usize];
            Complex64::new(re, im)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .unwrap();
    spec.to_grid()
}

fn real_poly(m: usize, coeffs: &[(f64, f64)]) -> GridFunction {
    let f = poly(m, coeffs);
    f.add(&f.conj()).unwrap().scale_real(0.5)
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(c in coeffs()) {
        let f = poly(64, &c);
        let energy = f.to_spectrum().energy();
        let l2 = lp_norm(&f, 2.0).unwrap();
        prop_assert!((l2 * l2 - energy).abs() <= 1e-12 * (1.0 + energy));
    }

    #[test]
    fn riesz_projections_are_complementary_and_idempotent(c in coeffs()) {
        let f = poly(64, &c);
        let n = riesz_neg(&f, Axis::First).unwrap();
        let p = riesz_pos(&f, Axis::First).unwrap();
        prop_assert!(n.add(&p).unwrap().max_abs_diff(&f).unwrap() <= 1e-12);
        prop_assert!(riesz_neg(&n, Axis::First).unwrap().max_abs_diff(&n).unwrap() <= 1e-12);
        prop_assert!(riesz_neg(&p, Axis::First).unwrap().sup_norm() <= 1e-12);
    }

    #[test]
    fn conjugation_is_linear(a in coeffs(), b in coeffs(), s in -3.0..3.0f64) {
        let u = real_poly(64, &a);
        let v = real_poly(64, &b);
        let lhs = harmonic_conjugate(&u.scale_real(s).add(&v).unwrap(), Axis::First).unwrap();
        let rhs = harmonic_conjugate(&u, Axis::First).unwrap().scale_real(s)
            .add(&harmonic_conjugate(&v, Axis::First).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn double_conjugation_removes_the_mean(a in coeffs()) {
        // Band-limited away from the Nyquist mode.
        let u = real_poly(64, &a);
        let hh = harmonic_conjugate(&harmonic_conjugate(&u, Axis::First).unwrap(), Axis::First).unwrap();
        let mean = u.mean();
        let expect = u.map(|z| -(z - mean)).unwrap();
        prop_assert!(hh.max_abs_diff(&expect).unwrap() <= 1e-12);
    }

    #[test]
    fn chebyshev_and_lp_monotonicity(v in prop::collection::vec(-5.0..5.0f64, 32)) {
        let d = GridDomain::circle(32).unwrap();
        let f = GridFunction::from_real(d, v).unwrap();
        let l1 = lp_norm(&f, 1.0).unwrap();
        prop_assert!(weak_l1(&f) <= l1 * (1.0 + 1e-14));
        let ps = [1.0, 1.5, 2.0, 3.0, 7.5, f64::INFINITY];
        for w in ps.windows(2) {
            prop_assert!(lp_norm(&f, w[0]).unwrap() <= lp_norm(&f, w[1]).unwrap() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn distribution_integral_reproduces_lq(v in prop::collection::vec(0.0..4.0f64, 1..80), q in 1.1..6.0f64) {
        // Pad to a valid grid length with repeated values so ties occur.
        let mut vals = v.clone();
        while vals.len() < 128 {
            vals.push(v[vals.len() % v.len()]);
        }
        vals.truncate(128);
        let d = GridDomain::circle(128).unwrap();
        let f = GridFunction::from_real(d, vals).unwrap();
        let dist = DistributionFunction::of(&f);
        let lq = lp_norm(&f, q).unwrap().powf(q);
        prop_assert!((dist.power_integral(q) - lq).abs() <= 1e-10 * lq.max(1e-300));
        prop_assert!((dist.weak_l1() - weak_l1(&f)).abs() <= 1e-14 * (1.0 + weak_l1(&f)));
    }
}

#[test]
fn single_level_functions_attain_chebyshev() {
    let d = GridDomain::circle(64).unwrap();
    let f = GridFunction::from_fn_1d(d, |t| Complex64::new(if t < 1.0 { 2.5 } else { 0.0 }, 0.0)).unwrap();
    assert!((weak_l1(&f) - lp_norm(&f, 1.0).unwrap()).abs() < 1e-15);
}

#[test]
fn fejer_mean_of_nonnegative_function_is_nonnegative() {
    let d = GridDomain::circle(256).unwrap();
    // Rough nonnegative data: indicator pieces and a spike.
    let u = GridFunction::from_fn_1d(d, |t| {
        let v = if (1.0..1.3).contains(&t) { 5.0 } else { 0.0 } + if t > 4.0 { (t - 4.0).sqrt() } else { 0.0 };
        Complex64::new(v, 0.0)
    })
    .unwrap();
    let s = fejer_smooth(&u, 32, Axis::First).unwrap();
    let min = s.samples().iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    assert!(min >= -1e-12, "min = {min:e}");
}
