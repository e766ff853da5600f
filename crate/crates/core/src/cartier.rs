//! Frobenius roots, twisted Cartier images and the ascending chains built
//! from them.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{ceil_scale, PAdicRational, Prime};
use crate::error::{Error, Result};
use crate::groebner::Ideal;
use crate::poly::{Ring, SparsePoly};

/// How much is known about F-regularity of a Cartier module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FRegularStatus {
    Proven,
    Assumed,
    Unknown,
}

impl FRegularStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FRegularStatus::Proven => "proven",
            FRegularStatus::Assumed => "assumed",
            FRegularStatus::Unknown => "unknown",
        }
    }
}

/// The Cartier module `R` with structure map `h ↦ κ(g·h)`, where `κ` is the
/// standard trace-like map on `F_*R`.
#[derive(Debug, Clone)]
pub struct CartierModuleSpec {
    ring: Arc<Ring>,
    g: SparsePoly,
    f_pure_verified: bool,
    f_regular_status: FRegularStatus,
}

impl CartierModuleSpec {
    pub fn new(g: SparsePoly) -> Result<Self> {
        if g.is_zero() {
            return Err(Error::ZeroTwist);
        }
        Ok(CartierModuleSpec {
            ring: g.ring().clone(),
            g,
            f_pure_verified: false,
            f_regular_status: FRegularStatus::Unknown,
        })
    }

    /// `g = 1`.
    pub fn standard(ring: &Arc<Ring>) -> Self {
        CartierModuleSpec::new(SparsePoly::one(ring)).expect("1 is nonzero")
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn prime(&self) -> Prime {
        self.ring.prime()
    }

    pub fn twist(&self) -> &SparsePoly {
        &self.g
    }

    pub fn f_pure_verified(&self) -> bool {
        self.f_pure_verified
    }

    pub fn f_regular_status(&self) -> FRegularStatus {
        self.f_regular_status
    }

    pub fn set_f_regular_status(&mut self, status: FRegularStatus) {
        self.f_regular_status = status;
    }
}

/// `1 + p + ... + p^(e-1)`, the power of `g` absorbed by `e` iterations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistExponent {
    e: u32,
    value: BigUint,
}

impl TwistExponent {
    pub fn new(e: u32, p: Prime) -> Self {
        let value = (p.pow_big(e) - 1u32) / (p.get() - 1);
        TwistExponent { e, value }
    }

    pub fn level(&self) -> u32 {
        self.e
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }
}

/// The smallest ideal `I` with `J ⊆ I^[p^e]`, generated by the coefficients
/// of every generator of `J` over the basis `{x^α : α_i < p^e}`.
pub fn frobenius_root(j: &Ideal, e: u32) -> Ideal {
    if e == 0 {
        return j.clone();
    }
    let mut gens = Vec::new();
    for h in j.generators() {
        gens.extend(h.decompose_over_pe(e).into_values());
    }
    gens.sort_by_key(|a| a.to_string());
    gens.dedup();
    Ideal::with_order(j.ring(), gens, j.order().clone())
}

/// `κ_g^e(J)` straight from the definition: the root of
/// `g^(1 + p + ... + p^(e-1)) · J`.
pub fn cartier_image(spec: &CartierModuleSpec, j: &Ideal, e: u32) -> Result<Ideal> {
    let twist = TwistExponent::new(e, spec.prime());
    let gk = spec.g.pow_big(twist.value())?;
    Ok(frobenius_root(&j.scale(&gk)?, e))
}

/// Single-step image `I_1(g · f^digit · J)`, returned canonically.
fn step(spec: &CartierModuleSpec, f: &SparsePoly, digit: u32, j: &Ideal) -> Result<Ideal> {
    let mut mult = spec.g.clone();
    if digit > 0 {
        mult = mult.mul(&f.pow(digit as u64)?)?;
    }
    let scaled = if mult.is_unit() {
        j.clone()
    } else {
        j.scale(&mult)?
    };
    frobenius_root(&scaled, 1).canonical()
}

/// `κ_g^e(f^m · J)`, computed one Frobenius level at a time from the base-p
/// digits of `m`, so no intermediate degree exceeds roughly `p·deg f`.
pub fn power_image(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    m: &BigUint,
    j: &Ideal,
    e: u32,
) -> Result<Ideal> {
    if e == 0 {
        return j.scale(&f.pow_big(m)?);
    }
    let q = spec.prime().pow_big(e);
    let (outer, mut rest) = (m / &q, m % &q);
    let p = spec.prime().big();
    let mut cur = j.clone();
    for _ in 0..e {
        let digit = (&rest % &p).to_u32().expect("digit below p");
        rest /= &p;
        cur = step(spec, f, digit, &cur)?;
    }
    if outer.is_zero() {
        Ok(cur)
    } else {
        cur.scale(&f.pow_big(&outer)?)?.canonical()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilizationCriterion {
    /// Equality across the configured number of consecutive level steps.
    Window,
    /// The level reached the bound after which equality is guaranteed.
    EffectiveBound,
}

impl StabilizationCriterion {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilizationCriterion::Window => "window",
            StabilizationCriterion::EffectiveBound => "effective_bound",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StableImage {
    pub ideal: Ideal,
    /// First level of the final constant run.
    pub level: u32,
    pub criterion: StabilizationCriterion,
}

/// Default number of consecutive equal steps required by the window rule.
pub const DEFAULT_WINDOW: u32 = 2;

/// Stable value of the ascending chain `N_e = κ_g^e(f^⌈t p^e⌉ · base)`.
///
/// Stabilization is accepted after `window` consecutive equalities among
/// levels `e ≥ s` (below `s` the rounding in `⌈t p^e⌉` makes the chain
/// non-monotone), or, when
/// F-purity has been verified, once `e ≥ 2·max(s, 1)` for `t = a/p^s`
/// (past that point every level carries the same exact exponent data).
pub fn stable_chain(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    t: &PAdicRational,
    base: &Ideal,
    e_max: u32,
    window: u32,
) -> Result<StableImage> {
    if e_max < 1 {
        return Err(Error::Range {
            value: e_max.to_string(),
            reason: "e_max must be at least 1".into(),
        });
    }
    let window = window.max(1);
    let bound = 2 * t.exponent().max(1);
    let mut prev: Option<Ideal> = None;
    let mut run_start = 1u32;
    let mut run_len = 0u32;
    for e in 1..=e_max {
        let m = ceil_scale(t, e);
        let cur = power_image(spec, f, &m, base, e)?;
        if let Some(p) = &prev {
            if e > t.exponent() && p.ideal_equal(&cur)? {
                run_len += 1;
            } else {
                run_start = e;
                run_len = 0;
            }
        }
        if spec.f_pure_verified && e >= bound {
            return Ok(StableImage {
                ideal: cur,
                level: run_start,
                criterion: StabilizationCriterion::EffectiveBound,
            });
        }
        if run_len >= window {
            return Ok(StableImage {
                ideal: cur,
                level: run_start,
                criterion: StabilizationCriterion::Window,
            });
        }
        if e == e_max {
            return Err(Error::NonStabilized {
                e_max,
                last: Box::new(cur),
                previous: prev.map(Box::new),
            });
        }
        prev = Some(cur);
    }
    unreachable!("loop returns at e_max")
}

/// Stable image `κ_g^e(f^⌈t p^e⌉ R)` of the Cartier algebra generated in
/// each degree by `κ_g^e f^⌈t p^e⌉`.
pub fn stable_image(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    t: &PAdicRational,
    e_max: u32,
) -> Result<StableImage> {
    stable_chain(spec, f, t, &Ideal::unit(&spec.ring), e_max, DEFAULT_WINDOW)
}

/// Whether the structure map is surjective, i.e. `I_1(g) = R`. Records a
/// positive answer in `spec`.
pub fn check_f_pure(spec: &mut CartierModuleSpec) -> bool {
    let root = frobenius_root(&Ideal::principal(spec.g.clone()), 1);
    let pure = root.is_unit_ideal().unwrap_or(false);
    if pure {
        spec.f_pure_verified = true;
    }
    pure
}

/// Sufficient test for F-regularity with test element `g`: some
/// `κ_g^e(g·R)` with `e ≤ e_max` is the unit ideal. Never disproves.
pub fn check_f_regular(spec: &CartierModuleSpec, e_max: u32) -> (FRegularStatus, Option<u32>) {
    if spec.g.is_unit() {
        return (FRegularStatus::Proven, Some(1));
    }
    let unit = Ideal::unit(&spec.ring);
    for e in 1..=e_max {
        let image = power_image(spec, &spec.g, &BigUint::from(1u32), &unit, e);
        if let Ok(img) = image {
            if img.is_unit_ideal().unwrap_or(false) {
                return (FRegularStatus::Proven, Some(e));
            }
        }
    }
    (FRegularStatus::Unknown, None)
}
