//! The two concrete instantiations of the algebra/module quadruple
//! `(A, B, C, D)` with the projection `P` onto `C^{⊥,q}`.
//!
//! * `model_space` on `𝕋`: `A = H^∞`, `B = conj(H^∞)`, `C = A`, `D = θB`.
//!   Then `C^⊥ = z̄·conj(H¹)` (spectrum in `k ≤ -1`) and `D^⊥ = θzH¹`
//!   (`θ̄f` has spectrum in `k ≥ 1`). `P` is the negative Riesz projection,
//!   and `P(D^{⊥,q}) = {0}`.
//! * `bitorus` on `𝕋²`: `A` is analytic in the first variable, `B` in the
//!   second, `C = A`, `D = B`. `P` is the negative Riesz projection in the
//!   first variable and maps `D^{⊥,q}` into itself without killing it.
//!
//! Membership is measured as the relative `ℓ²` spectral mass outside the
//! admissible support.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, GridFunction};
use crate::operators::{riesz_neg, Axis, Side};

/// Inner function data for the model-space setting.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerKind {
    /// `θ = z^k`.
    Monomial(u32),
    /// `θ(z) = c·Π (z - a_i)/(1 - conj(a_i) z)`, `|a_i| < 1`, `|c| = 1`.
    Blaschke { zeros: Vec<Complex64>, unimodular: Complex64 },
}

/// An inner function with its samples on a fixed circle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunction {
    kind: InnerKind,
    samples: GridFunction,
}

impl InnerFunction {
    pub fn monomial(domain: GridDomain, k: u32) -> Result<Self> {
        require_circle(&domain)?;
        Ok(Self {
            kind: InnerKind::Monomial(k),
            samples: GridFunction::monomial(domain, k as i64, 0),
        })
    }

    /// Finite Blaschke product evaluated in closed form at the grid points.
    pub fn blaschke(domain: GridDomain, zeros: Vec<Complex64>, unimodular: Complex64) -> Result<Self> {
        require_circle(&domain)?;
        if let Some(a) = zeros.iter().find(|a| a.norm() >= 1.0 || a.norm().is_nan()) {
            return Err(Error::Domain(format!(
                "Blaschke zeros must lie in the open unit disc, got {a}"
            )));
        }
        if (unimodular.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "Blaschke constant must be unimodular, got |c| = {}",
                unimodular.norm()
            )));
        }
        let m = domain.size();
        let samples = (0..m as i64)
            .map(|j| {
                let z = crate::grid::unit_root(m, j);
                zeros
                    .iter()
                    .fold(unimodular, |acc, &a| acc * (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z))
            })
            .collect();
        Ok(Self {
            kind: InnerKind::Blaschke { zeros, unimodular },
            samples: GridFunction::new(domain, samples)?,
        })
    }

    pub fn kind(&self) -> &InnerKind {
        &self.kind
    }

    pub fn samples(&self) -> &GridFunction {
        &self.samples
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self.kind, InnerKind::Monomial(_))
    }

    /// `max_j ||θ(x_j)| - 1|`.
    pub fn modulus_defect(&self) -> f64 {
        self.samples
            .samples()
            .iter()
            .fold(0.0, |m, z| m.max((z.norm() - 1.0).abs()))
    }
}

fn require_circle(domain: &GridDomain) -> Result<()> {
    if domain.dimension() != 1 {
        return Err(Error::Domain("inner functions live on the circle".into()));
    }
    Ok(())
}

/// The spaces a membership query can name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    A,
    B,
    C,
    D,
    CPerp,
    DPerp,
}

/// The two annihilators the splitting and the decomposition work in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Annihilator {
    CPerp,
    DPerp,
}

impl From<Annihilator> for Space {
    fn from(a: Annihilator) -> Space {
        match a {
            Annihilator::CPerp => Space::CPerp,
            Annihilator::DPerp => Space::DPerp,
        }
    }
}

/// Admissible support: frequencies in `[min, max]` along `axis` (all
/// frequencies in the other variable), tested on `θ̄f` when `twisted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportMask {
    pub axis: Axis,
    pub min: Option<isize>,
    pub max: Option<isize>,
    pub twisted: bool,
}

impl SupportMask {
    const fn at_least(axis: Axis, k: isize) -> Self {
        Self {
            axis,
            min: Some(k),
            max: None,
            twisted: false,
        }
    }

    const fn at_most(axis: Axis, k: isize) -> Self {
        Self {
            axis,
            min: None,
            max: Some(k),
            twisted: false,
        }
    }

    const fn twisted(self) -> Self {
        Self { twisted: true, ..self }
    }

    pub fn admits(&self, k: isize, l: isize) -> bool {
        let f = self.axis.select(k, l);
        self.min.is_none_or(|m| f >= m) && self.max.is_none_or(|m| f <= m)
    }
}

/// Which quadruple a [`Setting`] instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SettingKind {
    ModelSpace,
    Bitorus,
}

impl SettingKind {
    pub fn name(self) -> &'static str {
        match self {
            SettingKind::ModelSpace => "model_space",
            SettingKind::Bitorus => "bitorus",
        }
    }
}

/// A full instantiation of `(A, B, C, D, P)` on a grid. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    kind: SettingKind,
    domain: GridDomain,
    theta: Option<InnerFunction>,
}

impl Setting {
    pub fn model_space(theta: InnerFunction) -> Self {
        Self {
            kind: SettingKind::ModelSpace,
            domain: *theta.samples().domain(),
            theta: Some(theta),
        }
    }

    pub fn bitorus(domain: GridDomain) -> Result<Self> {
        if domain.dimension() != 2 {
            return Err(Error::Domain("the bi-torus setting needs a two-dimensional grid".into()));
        }
        Ok(Self {
            kind: SettingKind::Bitorus,
            domain,
            theta: None,
        })
    }

    pub fn kind(&self) -> SettingKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn theta(&self) -> Option<&InnerFunction> {
        self.theta.as_ref()
    }

    /// Whether every membership in this setting is exact in the discrete
    /// model (no spectral truncation of θ).
    pub fn is_exact(&self) -> bool {
        self.theta.as_ref().is_none_or(InnerFunction::is_monomial)
    }

    /// Support descriptor of `space`.
    pub fn mask(&self, space: Space) -> SupportMask {
        use Axis::{First, Second};
        match (self.kind, space) {
            (SettingKind::ModelSpace, Space::A | Space::C) => SupportMask::at_least(First, 0),
            (SettingKind::ModelSpace, Space::B) => SupportMask::at_most(First, 0),
            (SettingKind::ModelSpace, Space::D) => SupportMask::at_most(First, 0).twisted(),
            (SettingKind::ModelSpace, Space::CPerp) => SupportMask::at_most(First, -1),
            (SettingKind::ModelSpace, Space::DPerp) => SupportMask::at_least(First, 1).twisted(),
            (SettingKind::Bitorus, Space::A | Space::C) => SupportMask::at_least(First, 0),
            (SettingKind::Bitorus, Space::B | Space::D) => SupportMask::at_least(Second, 0),
            (SettingKind::Bitorus, Space::CPerp) => SupportMask::at_most(First, -1),
            (SettingKind::Bitorus, Space::DPerp) => SupportMask::at_most(Second, -1),
        }
    }

    /// Conjugation structure `(side, axis)` of algebra `A`.
    pub fn algebra_a(&self) -> (Side, Axis) {
        (Side::Analytic, Axis::First)
    }

    /// Conjugation structure `(side, axis)` of algebra `B`.
    pub fn algebra_b(&self) -> (Side, Axis) {
        match self.kind {
            SettingKind::ModelSpace => (Side::AntiAnalytic, Axis::First),
            SettingKind::Bitorus => (Side::Analytic, Axis::Second),
        }
    }

    /// The algebra an annihilator is a module over: `conj(A)` for `C^⊥`,
    /// `conj(B)` for `D^⊥`.
    pub fn module_algebra(&self, target: Annihilator) -> (Side, Axis) {
        let (side, axis) = match target {
            Annihilator::CPerp => self.algebra_a(),
            Annihilator::DPerp => self.algebra_b(),
        };
        (side.conjugate(), axis)
    }

    fn check_domain(&self, f: &GridFunction) -> Result<()> {
        self.domain.check_same(f.domain())
    }

    /// Relative spectral mass of `f` outside the support of `space`. Zero
    /// means membership.
    pub fn membership_residual(&self, f: &GridFunction, space: Space) -> Result<f64> {
        self.check_domain(f)?;
        let mask = self.mask(space);
        let twisted;
        let target = if mask.twisted {
            let theta = self
                .theta
                .as_ref()
                .ok_or_else(|| Error::Domain("twisted mask without an inner function".into()))?;
            twisted = f.mul(&theta.samples().conj())?;
            &twisted
        } else {
            f
        };
        Ok(masked_residual(target, &mask))
    }

    /// Residual of `f` in `conj(A)` (for `C^⊥`) or `conj(B)` (for `D^⊥`).
    pub fn module_algebra_residual(&self, phi: &GridFunction, target: Annihilator) -> Result<f64> {
        let space = match target {
            Annihilator::CPerp => Space::A,
            Annihilator::DPerp => Space::B,
        };
        self.membership_residual(&phi.conj(), space)
    }

    /// The projection `P` onto `C^{⊥,q}`.
    pub fn project_p(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check_domain(f)?;
        riesz_neg(f, Axis::First)
    }

    /// Pointwise product `Φ·f` of a module-algebra element with an element of
    /// `target`, checked to stay in `target`.
    pub fn multiply_into_module(
        &self,
        phi: &GridFunction,
        f: &GridFunction,
        target: Annihilator,
    ) -> Result<GridFunction> {
        const INPUT_TOL: f64 = 1e-8;
        let multiplier = self.module_algebra_residual(phi, target)?;
        let operand = self.membership_residual(f, target.into())?;
        let product = phi.mul(f)?;
        let product_res = self.membership_residual(&product, target.into())?;
        if multiplier > INPUT_TOL || operand > INPUT_TOL || product_res > multiplier.max(operand) * 10.0 + 1e-10 {
            return Err(Error::ModuleStructure {
                multiplier,
                operand,
                product: product_res,
            });
        }
        Ok(product)
    }
}

/// Relative `ℓ²` mass of the spectrum of `f` outside `mask` (the twist is
/// the caller's business).
pub fn masked_residual(f: &GridFunction, mask: &SupportMask) -> f64 {
    let s = f.to_spectrum();
    let (mut outside, mut total) = (0.0, 0.0);
    for (k, l, c) in s.iter() {
        let e = c.norm_sqr();
        total += e;
        if !mask.admits(k, l) {
            outside += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        libm::sqrt(outside / total)
    }
}
