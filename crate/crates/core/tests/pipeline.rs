use kclose_core::cutoff::{gamma_for, pointwise_slack};
use kclose_core::kclose::{verify_report, Degenerate};
use kclose_core::operators::half_line_residual;
use kclose_core::{
    build_cutoff, decompose, lp_norm, split, truncate, weak_l1, Annihilator, Axis, Complex64, CutoffParams,
    DecomposeOptions, DistributionFunction, DualDecompositionInput, GridDomain, GridFunction, InnerFunction, Setting,
    Side, Smoothing, Space, Spectrum,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}

/// Random polynomial with spectrum in `lo..=hi`.
fn band(d: GridDomain, lo: isize, hi: isize, seed: u64) -> GridFunction {
    let mut s = seed;
    let mut coef = Vec::new();
    for _ in lo..=hi {
        coef.push(c(lcg(&mut s), lcg(&mut s)));
    }
    Spectrum::from_fn(d, |k, _| if k >= lo && k <= hi { coef[(k - lo) as usize] } else { c(0.0, 0.0) })
        .unwrap()
        .to_grid()
}

fn window(d: GridDomain, centre: f64, beta: f64) -> GridFunction {
    GridFunction::from_fn_1d(d, |t| c((beta * ((t - centre).cos() - 1.0)).exp(), 0.0)).unwrap()
}

fn model(m: usize) -> Setting {
    Setting::model_space(InnerFunction::monomial(GridDomain::circle(m).unwrap(), 2).unwrap())
}

/// Naive quadrature, independent of `lp_norm`.
fn mean_pow(v: impl Iterator<Item = f64>, n: usize, p: f64) -> f64 {
    (v.map(|x| x.abs().powf(p)).sum::<f64>() / n as f64).powf(1.0 / p)
}

#[test]
fn cutoff_of_clipped_cosine() {
    let d = GridDomain::circle(1024).unwrap();
    let phi = GridFunction::from_fn_1d(d, |t| c((2.0 * t.cos().abs()).max(1.0), 0.0)).unwrap();
    let params = CutoffParams::for_exponent(2.0, Side::Analytic, Axis::First).unwrap();
    assert_eq!(params.gamma, 3);
    let r = build_cutoff(&phi, &params).unwrap();
    assert!(r.pointwise_slack >= -1e-12);
    let num = mean_pow(r.phi.samples().iter().map(|z| (c(1.0, 0.0) - z).norm()), 1024, 2.0);
    let den = mean_pow(phi.samples().iter().map(|z| z.re - 1.0), 1024, 2.0);
    assert!((r.o1_ratio - num / den).abs() <= 1e-12 * (num / den));
    assert!(r.phi.sup_norm() <= 1.0 + 1e-15);
}

#[test]
fn pointwise_slack_on_random_inputs() {
    let d = GridDomain::circle(512).unwrap();
    let params = CutoffParams::for_exponent(2.0, Side::Analytic, Axis::First).unwrap();
    let mut worst = f64::INFINITY;
    for case in 0..60u64 {
        let f = band(d, -12, 12, 1000 + case);
        let scale = 0.5 + (case % 7) as f64;
        let phi = f.map(|z| c(1.0 + scale * z.norm(), 0.0)).unwrap();
        let r = build_cutoff(&phi, &params).unwrap();
        worst = worst.min(r.pointwise_slack);
        assert!(r.phi.sup_norm() <= 1.0 + 1e-12);
        // Recompute the slack directly from the witness.
        let direct = r
            .phi
            .samples()
            .iter()
            .zip(r.witness.samples())
            .map(|(p, w)| (1.0 + w.re).powi(-3) - p.norm())
            .fold(f64::INFINITY, f64::min);
        assert!((direct - pointwise_slack(&r.phi, &r.witness, 3)).abs() < 1e-15);
    }
    assert!(worst >= -1e-12, "worst slack {worst:e}");
}

#[test]
fn algebra_residual_small_for_moderate_degree() {
    for m in [256usize, 1024, 4096] {
        let d = GridDomain::circle(m).unwrap();
        let bump = band(d, -6, 6, 77);
        let peak = bump.sup_norm();
        let phi = bump.map(|z| c(1.0 + 2.0 * z.norm() / peak, 0.0)).unwrap();
        for side in [Side::Analytic, Side::AntiAnalytic] {
            for n in [4usize, m / 32, m / 16] {
                let p = CutoffParams::for_exponent(2.0, side, Axis::First)
                    .unwrap()
                    .with_smoothing(Smoothing::Fixed(n));
                let r = build_cutoff(&phi, &p).unwrap();
                assert!(r.algebra_residual <= 1e-8, "M={m} n={n} {side:?}: {:e}", r.algebra_residual);
                assert!((half_line_residual(&r.phi, side, Axis::First).unwrap() - r.algebra_residual).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn algebra_residual_vanishes_as_grid_grows() {
    // Large, kinked φ: leakage is pure aliasing and falls off with M at fixed n.
    let mut prev = f64::INFINITY;
    for m in [256usize, 512, 1024, 2048] {
        let d = GridDomain::circle(m).unwrap();
        let phi = band(d, -6, 6, 77).map(|z| c(1.0 + 2.0 * z.norm(), 0.0)).unwrap();
        let p = CutoffParams::for_exponent(2.0, Side::Analytic, Axis::First)
            .unwrap()
            .with_smoothing(Smoothing::Fixed(16));
        let res = build_cutoff(&phi, &p).unwrap().algebra_residual;
        assert!(res <= prev.max(1e-14), "M={m}: {res:e} after {prev:e}");
        prev = res;
    }
    assert!(prev <= 1e-12, "{prev:e}");
}

#[test]
fn limit_form_excess_decreases_with_degree() {
    let d = GridDomain::circle(1024).unwrap();
    let phi = GridFunction::from_fn_1d(d, |t| c(2.6 + t.cos() + 0.5 * (2.0 * t).sin(), 0.0)).unwrap();
    let gamma = 3;
    let mut prev = f64::INFINITY;
    let mut seen = Vec::new();
    for n in [4usize, 8, 16, 32, 64, 128, 256, 511] {
        let p = CutoffParams::for_exponent(2.0, Side::Analytic, Axis::First)
            .unwrap()
            .with_smoothing(Smoothing::Fixed(n));
        let r = build_cutoff(&phi, &p).unwrap();
        let excess = r
            .phi
            .samples()
            .iter()
            .zip(phi.samples())
            .map(|(cut, f)| cut.norm() - f.re.powi(-gamma))
            .fold(f64::NEG_INFINITY, f64::max);
        seen.push((n, excess));
        assert!(excess <= prev + 1e-15, "{seen:?}");
        prev = excess;
    }
    assert!(prev < 0.02 * seen[0].1.abs().max(1e-3), "{seen:?}");
}

#[test]
fn truncation_norm_bound() {
    let d = GridDomain::circle(2048).unwrap();
    for case in 0..10u64 {
        let f = band(d, -40, -1, 500 + case);
        let fw = weak_l1(&f);
        for lam in [0.1, 0.5, 1.0, 3.0] {
            let (alpha, beta) = truncate(&f, lam).unwrap();
            for q in [1.25, 2.0, 4.0] {
                let p = q / (q - 1.0);
                let aq = lp_norm(&alpha, q).unwrap();
                let bound = p.powf(1.0 / q) * lam.powf(1.0 / p) * fw.powf(1.0 / q);
                assert!(aq <= bound * (1.0 + 1e-12), "case {case} λ {lam} q {q}");
                // Distribution-function route to the same norm.
                let via = DistributionFunction::of(&alpha).power_integral(q).powf(1.0 / q);
                assert!((via - aq).abs() <= 1e-10 * aq);
            }
            assert!(alpha.sup_norm() <= lam * (1.0 + 1e-15));
            for ((a, b), z) in alpha.samples().iter().zip(beta.samples()).zip(f.samples()) {
                assert!((a + b - z).norm() <= 1e-15 * (1.0 + z.norm()));
                if z.norm() <= lam {
                    assert_eq!(*b, c(0.0, 0.0));
                }
            }
        }
    }
}

#[test]
fn split_identity_membership_and_ratios() {
    let s = model(1024);
    let d = *s.domain();
    let params = CutoffParams::for_exponent(2.0, Side::Analytic, Axis::First).unwrap();
    for case in 0..10u64 {
        let f = band(d, -30, -1, 900 + case).mul(&window(d, case as f64, 4.0)).unwrap();
        let f = kclose_core::operators::riesz_neg(&f, Axis::First).unwrap();
        let mut moduli: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        let median = moduli[moduli.len() / 2];
        let r = split(&f, median, &s, Annihilator::CPerp, &params).unwrap();
        let scale = f.sup_norm();
        assert!(r.a.add(&r.b).unwrap().max_abs_diff(&f).unwrap() <= 1e-12 * scale);
        assert!(r.membership_residual_a <= 1e-8, "case {case}: {:e} degree {} conv {}", r.membership_residual_a, r.cutoff.degree, r.cutoff.converged);
        for (e, z) in r.exceed.iter().zip(f.samples()) {
            assert_eq!(*e, z.norm() > median);
        }
        // Ratios against hand-rolled quadrature.
        let n = f.len() as f64;
        let fw = {
            let mut v = moduli.clone();
            v.reverse();
            v.iter().enumerate().map(|(i, x)| x * (i + 1) as f64 / n).fold(0.0, f64::max)
        };
        let q = 2.0;
        let u1 = mean_pow(r.a.samples().iter().map(|z| z.norm()), f.len(), q) / (median.sqrt() * fw.sqrt());
        let u2 = r
            .b
            .samples()
            .iter()
            .zip(&r.exceed)
            .filter(|(_, e)| !**e)
            .map(|(z, _)| z.norm())
            .sum::<f64>()
            / n
            / fw;
        let u3 = r.exceed.iter().filter(|e| **e).count() as f64 / n * median / fw;
        let u4 = weak_l1(&r.b) / fw;
        let m = r.measured;
        for (got, want) in [(m.u1, u1), (m.u2, u2), (m.u3, u3), (m.u4, u4)] {
            assert!((got - want).abs() <= 1e-12 * (1.0 + want), "{m:?}");
        }
        // |b| ≤ 2|f| so the weak bound passes to b with constant 2.
        assert!(m.u4 <= 2.0 + 1e-12);
    }
}

fn two_part_input(m: usize, p: f64, kappa: f64, seed: u64) -> DualDecompositionInput {
    let s = model(m);
    let d = *s.domain();
    let a0 = band(d, -8, -1, seed);
    let d0 = band(d, 3, 10, seed + 1);
    let f = a0.add(&d0).unwrap();
    let g = f.mul(&window(d, 1.0 + seed as f64, 10.0)).unwrap().scale_real(kappa);
    let h = f.sub(&g).unwrap();
    DualDecompositionInput::new(f, g, h, s, p).unwrap()
}

#[test]
fn decompose_end_to_end_for_each_exponent() {
    for p in [4.0 / 3.0, 2.0, 4.0] {
        let input = two_part_input(1024, p, 3.0, 40);
        assert!(input.setting.membership_residual(&input.f.sub(&band(*input.f.domain(), 3, 10, 41)).unwrap(), Space::CPerp).unwrap() < 1e-12);
        let opts = DecomposeOptions::for_exponent(p);
        assert_eq!(opts.gamma, gamma_for(p));
        let rep = decompose(&input, &opts).unwrap();
        assert!(rep.residuals.identity <= 1e-12);
        assert!(rep.residuals.phi_u <= 1e-8 && rep.residuals.ph <= 1e-8 && rep.residuals.a <= 1e-8, "{:?}", rep.residuals);
        assert!(rep.constants.cg.is_finite() && rep.constants.ch.is_finite());
        assert!(rep.constants.cut_slack >= -1e-12);
        let v = verify_report(&rep, &input);
        assert!(v.passed, "{:?}", v.failed_clauses().collect::<Vec<_>>());
    }
}

#[test]
fn bitorus_decomposition_certifies() {
    let d = GridDomain::torus(64).unwrap();
    let s = Setting::bitorus(d).unwrap();
    let spec = |lo1: isize, hi1: isize, lo2: isize, hi2: isize, seed: u64| {
        Spectrum::from_fn(d, |k, l| {
            let mut st = seed ^ ((k + 100) as u64) << 20 ^ ((l + 100) as u64) << 40;
            lcg(&mut st);
            let v = c(lcg(&mut st), 0.0);
            if (lo1..=hi1).contains(&k) && (lo2..=hi2).contains(&l) {
                v * c(1.0 / (1.0 + (k * k + l * l) as f64), 0.3)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap()
        .to_grid()
    };
    let a0 = spec(-5, -1, -4, 4, 3);
    let d0 = spec(-4, 4, -5, -1, 9);
    let f = a0.add(&d0).unwrap();
    let win = GridFunction::from_fn_2d(d, |x, y| c((6.0 * ((x - 1.0).cos() + (y - 2.0).cos() - 2.0)).exp(), 0.0)).unwrap();
    let g = f.mul(&win).unwrap();
    let h = f.sub(&g).unwrap();
    let input = DualDecompositionInput::new(f, g, h, s, 2.0).unwrap();
    let rep = decompose(&input, &DecomposeOptions::for_exponent(2.0)).unwrap();
    assert!(rep.residuals.phi_u <= 1e-8 && rep.residuals.ph <= 1e-8 && rep.residuals.a <= 1e-8, "{:?}", rep.residuals);
    let v = verify_report(&rep, &input);
    assert!(v.passed, "{:?}", v.failed_clauses().collect::<Vec<_>>());
}

#[test]
fn scale_covariance() {
    // h is the windowed piece here, so λ is small and both cut-offs act.
    let base_input = two_part_input(512, 2.0, 0.05, 60);
    let input = DualDecompositionInput::new(
        base_input.f.clone(),
        base_input.h.clone(),
        base_input.g.clone(),
        base_input.setting.clone(),
        2.0,
    )
    .unwrap();
    let opts = DecomposeOptions::for_exponent(2.0);
    let base = decompose(&input, &opts).unwrap();
    let im = base.intermediates.as_ref().unwrap();
    assert!(im.exceed.iter().any(|&e| e));
    assert!(im.phi.samples().iter().any(|z| z.re > 1.0));
    assert!(base.constants.cg > 1e-3);
    for kappa in [1e-3, 0.5, 7.0, 1e4] {
        let rep = decompose(&input.scaled(kappa).unwrap(), &opts).unwrap();
        let scale = kappa * base.g1.sup_norm().max(base.h1.sup_norm());
        assert!(rep.g1.max_abs_diff(&base.g1.scale_real(kappa)).unwrap() <= 1e-12 * scale);
        assert!(rep.h1.max_abs_diff(&base.h1.scale_real(kappa)).unwrap() <= 1e-12 * scale);
        assert!((rep.constants.cg - base.constants.cg).abs() <= 1e-12 * base.constants.cg);
        assert!((rep.constants.ch - base.constants.ch).abs() <= 1e-12 * base.constants.ch);
    }
}

#[test]
fn degenerate_branches_and_hand_built_certificate() {
    let input = two_part_input(256, 2.0, 1.0, 80);
    let d = *input.f.domain();
    let zero = GridFunction::zeros(d);
    let only_g = DualDecompositionInput::new(input.f.clone(), input.f.clone(), zero.clone(), input.setting.clone(), 2.0).unwrap();
    let rep = decompose(&only_g, &DecomposeOptions::for_exponent(2.0)).unwrap();
    assert_eq!(rep.degenerate, Some(Degenerate::ZeroLqPart));
    assert_eq!(rep.g1, only_g.f);
    assert_eq!(rep.constants.cg, 1.0);

    // The same certificate written by hand, norms from direct quadrature.
    let r = input.f.samples().iter().map(|z| z.norm()).sum::<f64>() / d.len() as f64;
    let mut hand = rep.clone();
    hand.g1 = only_g.f.clone();
    hand.h1 = zero.clone();
    hand.r = r;
    hand.s = 0.0;
    hand.constants = Default::default();
    hand.constants.cg = 1.0;
    assert!(verify_report(&hand, &only_g).passed);

    let only_h = DualDecompositionInput::new(input.f.clone(), zero, input.f.clone(), input.setting.clone(), 2.0).unwrap();
    let rep = decompose(&only_h, &DecomposeOptions::for_exponent(2.0)).unwrap();
    assert_eq!(rep.degenerate, Some(Degenerate::ZeroL1Part));
    assert_eq!(rep.h1, only_h.f);
    assert!((rep.constants.ch - 1.0).abs() < 1e-15);
    assert!(verify_report(&rep, &only_h).passed);
}

#[test]
fn tampered_g1_is_rejected() {
    let input = two_part_input(256, 2.0, 1.0, 90);
    let rep = decompose(&input, &DecomposeOptions::for_exponent(2.0)).unwrap();
    assert!(verify_report(&rep, &input).passed);
    for j in [0usize, 17, 255] {
        let mut bad = rep.clone();
        let mut s = bad.g1.samples().to_vec();
        s[j] += c(1e-3, 0.0);
        bad.g1 = GridFunction::new(d_of(&input), s).unwrap();
        let v = verify_report(&bad, &input);
        assert!(!v.passed);
        assert!(v.failed_clauses().any(|d| d.clause == "identity residual"));
    }
}

fn d_of(input: &DualDecompositionInput) -> GridDomain {
    *input.f.domain()
}
