//! Norms and quasi-norms on the normalized grid measure, distribution
//! functions, and empirical operator constants.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, GridFunction};

/// `(∫|f|^p dμ)^{1/p}`; `p = ∞` gives `max |f|`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm_of_moduli(f.domain(), f.samples().iter().map(|z| z.norm()), p)
}

/// [`lp_norm`] for moduli that were already computed.
pub fn lp_norm_of_moduli<I: Iterator<Item = f64>>(domain: &GridDomain, moduli: I, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("L^p norm needs p ≥ 1, got {p}")));
    }
    if p == f64::INFINITY {
        return Ok(moduli.fold(0.0, f64::max));
    }
    if p == 1.0 {
        return Ok(domain.quadrature(moduli));
    }
    if p == 2.0 {
        return Ok(libm::sqrt(domain.quadrature(moduli.map(|v| v * v))));
    }
    Ok(libm::pow(domain.quadrature(moduli.map(|v| libm::pow(v, p))), 1.0 / p))
}

fn sorted_moduli_desc(f: &GridFunction) -> Vec<f64> {
    let mut v: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    v
}

/// Weak-L¹ quasi-norm `sup_t t·μ{|f| > t}`.
///
/// The supremum is approached just below each jump of the distribution
/// function, so it equals `max_k |f|_(k)·k/N` with `|f|_(1) ≥ |f|_(2) ≥ …`.
pub fn weak_l1(f: &GridFunction) -> f64 {
    let n = f.len() as f64;
    sorted_moduli_desc(f)
        .iter()
        .enumerate()
        .fold(0.0, |m, (i, &v)| m.max(v * (i + 1) as f64 / n))
}

/// Step function `σ(t) = μ{|f| > t}`, stored at the distinct values of
/// `|f|` in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFunction {
    thresholds: Vec<f64>,
    /// Number of samples strictly above each threshold.
    counts_above: Vec<usize>,
    /// Number of samples with nonzero modulus.
    support: usize,
    total: usize,
}

impl DistributionFunction {
    pub fn of(f: &GridFunction) -> Self {
        let mut v: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
        v.sort_unstable_by(f64::total_cmp);
        let total = v.len();
        let support = v.iter().filter(|&&x| x > 0.0).count();
        let mut thresholds = Vec::new();
        let mut counts_above = Vec::new();
        let mut i = 0;
        while i < v.len() {
            let t = v[i];
            let mut j = i;
            while j < v.len() && v[j] == t {
                j += 1;
            }
            thresholds.push(t);
            counts_above.push(total - j);
            i = j;
        }
        Self {
            thresholds,
            counts_above,
            support,
            total,
        }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `μ{|f| > t}` at each stored threshold.
    pub fn masses(&self) -> Vec<f64> {
        self.counts_above
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    /// `σ(t)` at an arbitrary level.
    pub fn mass_above(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        // First stored threshold strictly greater than t.
        let idx = self.thresholds.partition_point(|&x| x <= t);
        let count = if idx == 0 {
            // t lies below every stored value, all samples exceed it.
            self.total
        } else {
            self.counts_above[idx - 1]
        };
        count as f64 / self.total as f64
    }

    /// `q ∫₀^∞ t^{q-1} σ(t) dt`, integrated exactly over the steps. Equals
    /// `‖f‖_q^q`.
    pub fn power_integral(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        let mut above_prev = self.support;
        for (&t, &above) in self.thresholds.iter().zip(&self.counts_above) {
            if t > 0.0 {
                acc += (libm::pow(t, q) - libm::pow(prev, q)) * above_prev as f64;
                prev = t;
            }
            above_prev = above;
        }
        acc / self.total as f64
    }

    /// `sup_t t·σ(t)`, read off the steps.
    pub fn weak_l1(&self) -> f64 {
        // Just below threshold t the mass is the count of samples ≥ t.
        let mut best = 0.0_f64;
        let mut at_least = self.total;
        for (&t, &above) in self.thresholds.iter().zip(&self.counts_above) {
            best = best.max(t * at_least as f64 / self.total as f64);
            at_least = above;
        }
        best
    }
}

/// A ratio whose supremum over a corpus estimates an operator constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub numerator: f64,
    pub denominator: f64,
}

impl Ratio {
    pub fn new(numerator: f64, denominator: f64) -> Self {
        Self {
            numerator,
            denominator,
        }
    }

    /// `None` for the indeterminate `0/0`.
    pub fn value(&self) -> Option<f64> {
        if self.numerator == 0.0 && self.denominator == 0.0 {
            None
        } else if self.denominator == 0.0 {
            Some(f64::INFINITY)
        } else {
            Some(self.numerator / self.denominator)
        }
    }
}

/// Result of [`estimate_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimate {
    pub sup_ratio: f64,
    pub argmax_case: Option<usize>,
    /// Case ids whose ratio was `0/0`.
    pub skipped: Vec<usize>,
    pub evaluated: usize,
}

/// Supremum over `corpus` of `functional(input, op(input))`.
pub fn estimate_constant<'a, I, O, F>(corpus: I, op: O, functional: F) -> Result<ConstantEstimate>
where
    I: IntoIterator<Item = (usize, &'a GridFunction)>,
    O: Fn(&GridFunction) -> Result<GridFunction>,
    F: Fn(&GridFunction, &GridFunction) -> Result<Ratio>,
{
    let mut est = ConstantEstimate {
        sup_ratio: 0.0,
        argmax_case: None,
        skipped: Vec::new(),
        evaluated: 0,
    };
    let mut seen = 0usize;
    for (id, input) in corpus {
        seen += 1;
        let output = op(input)?;
        match functional(input, &output)?.value() {
            None => est.skipped.push(id),
            Some(v) => {
                est.evaluated += 1;
                if est.argmax_case.is_none() || v > est.sup_ratio {
                    est.sup_ratio = v;
                    est.argmax_case = Some(id);
                }
            }
        }
    }
    if seen == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(est)
}

/// `‖Tf‖_{p_out} / ‖f‖_{p_in}`.
pub fn lp_ratio(p_in: f64, p_out: f64) -> impl Fn(&GridFunction, &GridFunction) -> Result<Ratio> {
    move |input, output| Ok(Ratio::new(lp_norm(output, p_out)?, lp_norm(input, p_in)?))
}

/// `sup_λ λ·μ{|Tf| > λ} / ‖f‖₁`, the weak-(1,1) ratio. The supremum over λ
/// is taken over the jump points of the distribution of `|Tf|`.
pub fn weak_type_ratio(input: &GridFunction, output: &GridFunction) -> Result<Ratio> {
    Ok(Ratio::new(weak_l1(output), lp_norm(input, 1.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{riesz_neg, Axis};
    use alloc::vec;
    use num_complex::Complex64;

    fn d(m: usize) -> GridDomain {
        GridDomain::circle(m).unwrap()
    }

    fn from_real(m: usize, v: Vec<f64>) -> GridFunction {
        GridFunction::from_real(d(m), v).unwrap()
    }

    #[test]
    fn constant_one_has_unit_norm_for_every_p() {
        let f = GridFunction::constant(d(16), Complex64::new(1.0, 0.0));
        for p in [1.0, 1.5, 2.0, 3.0, 7.0, f64::INFINITY] {
            assert!((lp_norm(&f, p).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unimodular_function_has_unit_l2_norm() {
        let f = GridFunction::monomial(d(64), 1, 0);
        assert!((lp_norm(&f, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn p_below_one_is_rejected() {
        let f = GridFunction::zeros(d(8));
        assert!(matches!(lp_norm(&f, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn weak_norm_of_scaled_indicator() {
        // 3 · χ_E with μ(E) = 5/16.
        let mut v = vec![0.0; 16];
        for x in v.iter_mut().take(5) {
            *x = 3.0;
        }
        let f = from_real(16, v);
        assert!((weak_l1(&f) - 3.0 * 5.0 / 16.0).abs() < 1e-15);
        assert!((weak_l1(&GridFunction::constant(d(8), Complex64::new(-2.0, 0.0))) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn weak_norm_of_two_level_function() {
        // c1 = 4 on mass 2/16, c2 = 1 on mass 6/16: max(4·2/16, 1·8/16).
        let mut v = vec![0.0; 16];
        v[0] = 4.0;
        v[1] = 4.0;
        for x in v.iter_mut().skip(2).take(6) {
            *x = 1.0;
        }
        let f = from_real(16, v);
        let expect = f64::max(4.0 * 2.0 / 16.0, 1.0 * 8.0 / 16.0);
        assert!((weak_l1(&f) - expect).abs() < 1e-15);
        assert!((DistributionFunction::of(&f).weak_l1() - expect).abs() < 1e-15);
    }

    #[test]
    fn distribution_function_steps() {
        let f = from_real(8, vec![0.0, 1.0, 1.0, 2.0, 0.0, 3.0, 0.0, 0.0]);
        let df = DistributionFunction::of(&f);
        assert_eq!(df.thresholds(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(df.masses(), vec![4.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0, 0.0]);
        assert_eq!(df.mass_above(-1.0), 1.0);
        assert_eq!(df.mass_above(0.5), 0.5);
        assert_eq!(df.mass_above(1.0), 0.25);
        assert_eq!(df.mass_above(10.0), 0.0);
        let q = 2.5;
        let direct = (libm::pow(1.0, q) * 2.0 + libm::pow(2.0, q) + libm::pow(3.0, q)) / 8.0;
        assert!((df.power_integral(q) - direct).abs() < 1e-14);
    }

    #[test]
    fn identity_and_zero_operator_constants() {
        let dom = d(32);
        let corpus: Vec<GridFunction> = (1..4).map(|k| GridFunction::monomial(dom, -k, 0)).collect();
        let id = estimate_constant(corpus.iter().enumerate(), |f| Ok(f.clone()), lp_ratio(2.0, 2.0)).unwrap();
        assert!((id.sup_ratio - 1.0).abs() < 1e-14);
        let zero = estimate_constant(
            corpus.iter().enumerate(),
            |f| Ok(GridFunction::zeros(*f.domain())),
            lp_ratio(2.0, 2.0),
        )
        .unwrap();
        assert_eq!(zero.sup_ratio, 0.0);
    }

    #[test]
    fn riesz_neg_constant_on_small_corpus() {
        // z̄ and z̄² pass through; for z + z̄ only z̄ survives: ratio 1/√2.
        let dom = d(32);
        let zb = GridFunction::monomial(dom, -1, 0);
        let zb2 = GridFunction::monomial(dom, -2, 0);
        let mixed = GridFunction::monomial(dom, 1, 0).add(&zb).unwrap();
        let ratio = lp_ratio(2.0, 2.0);
        let mixed_ratio = ratio(&mixed, &riesz_neg(&mixed, Axis::First).unwrap()).unwrap().value().unwrap();
        assert!((mixed_ratio - 1.0 / libm::sqrt(2.0)).abs() < 1e-14);
        let corpus = [zb, zb2, mixed];
        let est = estimate_constant(corpus.iter().enumerate(), |f| riesz_neg(f, Axis::First), ratio).unwrap();
        assert!((est.sup_ratio - 1.0).abs() < 1e-14);
        assert!(matches!(est.argmax_case, Some(0) | Some(1)));
    }

    #[test]
    fn indeterminate_cases_are_skipped_and_empty_corpus_errors() {
        let dom = d(8);
        let z = GridFunction::zeros(dom);
        let est = estimate_constant([(7usize, &z)], |f| Ok(f.clone()), lp_ratio(2.0, 2.0)).unwrap();
        assert_eq!(est.skipped, vec![7]);
        assert_eq!(est.argmax_case, None);
        let empty: [(usize, &GridFunction); 0] = [];
        assert_eq!(
            estimate_constant(empty, |f| Ok(f.clone()), lp_ratio(2.0, 2.0)),
            Err(Error::EmptyCorpus)
        );
    }
}
