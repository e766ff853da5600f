//! Test modules `τ(M, f^t)` and the search for their jumping numbers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{
    base_p_digits_u64, ceil_scale_rational, expansion_shape, rational_from_periodic, truncated_expansion,
    PAdicRational, Prime, Rational,
};
use crate::cartier::{
    self, stable_chain, CartierModuleSpec, FRegularStatus, StabilizationCriterion, DEFAULT_WINDOW,
};
use crate::error::{Error, Result};
use crate::groebner::Ideal;
use crate::poly::SparsePoly;

/// Tuning knobs for the searches in this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub e_max: u32,
    /// Level at which a full sweep double-checks the refined jump set.
    pub audit_level: u32,
    /// Longest digit window a repeating block (two copies) may occupy.
    pub period_window: usize,
    /// Consecutive equal levels required to accept stabilization.
    pub window: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            e_max: 6,
            audit_level: 3,
            period_window: 8,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestModuleResult {
    pub ideal: Ideal,
    pub t: PAdicRational,
    pub e_used: u32,
    pub stabilization_criterion: StabilizationCriterion,
    /// Power of `f` split off by the Briançon–Skoda reduction.
    pub f_power: BigUint,
}

/// Splits `t` as `n + t'` with `t' ∈ (0, 1]`, or `t' = 0` when `t = 0`.
pub fn briancon_skoda_reduce(t: &PAdicRational) -> (BigUint, PAdicRational) {
    let p = t.prime();
    let q = p.pow_big(t.exponent());
    let ceil = Integer::div_ceil(t.numerator(), &q);
    if ceil <= BigUint::one() {
        return (BigUint::zero(), t.clone());
    }
    let n = ceil - 1u32;
    let shift = PAdicRational::new(&n * &q, t.exponent(), p);
    let rest = t.checked_sub(&shift).expect("n < t");
    (n, rest)
}

fn require_nonzero(f: &SparsePoly) -> Result<()> {
    if f.is_zero() {
        Err(Error::ZeroHypersurface)
    } else {
        Ok(())
    }
}

/// `τ(M, f^t)` as the stable value of `κ_g^e(f^⌈t p^e⌉ R)`.
pub fn tau(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    t: &PAdicRational,
    config: &SearchConfig,
) -> Result<TestModuleResult> {
    require_nonzero(f)?;
    let (n, reduced) = briancon_skoda_reduce(t);
    let stable = stable_chain(
        spec,
        f,
        &reduced,
        &Ideal::unit(spec.ring()),
        config.e_max,
        config.window,
    )?;
    let ideal = if n.is_zero() {
        stable.ideal
    } else {
        stable.ideal.scale(&f.pow_big(&n)?)?.canonical()?
    };
    Ok(TestModuleResult {
        ideal,
        t: t.clone(),
        e_used: stable.level,
        stabilization_criterion: stable.criterion,
        f_power: n,
    })
}

/// Independent evaluation of `τ(M, f^t)` as the union of
/// `κ_g^n(f^⌈t p^n⌉ · f · U)` over `n ≥ 1`, where `U` is the stable image of
/// `M`. Partial sums are accumulated until they stay constant for the
/// configured window, counted only past the preperiod plus one period of
/// the base-p expansion of `t`.
pub fn tau_via_sum(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    t: &Rational,
    config: &SearchConfig,
) -> Result<Ideal> {
    require_nonzero(f)?;
    if t.is_negative() {
        return Err(Error::Domain(t.to_string()));
    }
    let p = spec.prime();
    let zero = PAdicRational::zero(p);
    let base = stable_chain(
        spec,
        f,
        &zero,
        &Ideal::unit(spec.ring()),
        config.e_max,
        config.window,
    )?
    .ideal;
    let base_f = base.scale(f)?;
    // Equalities only count once the digits of t have become periodic.
    let (pre, period) = expansion_shape(t, p);
    let start = (pre + period) as u32;
    let mut sum: Option<Ideal> = None;
    let mut run = 0u32;
    let mut prev: Option<Ideal> = None;
    for n in 1..=config.e_max {
        let m = ceil_scale_rational(t, n, p);
        let term = cartier::power_image(spec, f, &m, &base_f, n)?;
        let next = match &sum {
            None => term.canonical()?,
            Some(acc) => acc.sum(&term)?.canonical()?,
        };
        if let Some(old) = &sum {
            if n > start && old.ideal_equal(&next)? {
                run += 1;
            } else {
                run = 0;
            }
        }
        if n >= start && run >= config.window {
            return Ok(next);
        }
        prev = sum.replace(next);
    }
    Err(Error::NonStabilized {
        e_max: config.e_max,
        last: Box::new(sum.expect("e_max ≥ 1")),
        previous: prev.map(Box::new),
    })
}

/// Result of a jumping-number search.
#[derive(Debug, Clone)]
pub struct JumpingNumberReport {
    /// Jumping numbers in `(0, 1]`, ascending.
    pub resolved: Vec<Rational>,
    /// Intervals `(lo, hi]` known to contain a jumping number that could not
    /// be pinned down.
    pub unresolved: Vec<(Rational, Rational)>,
    pub e_reached: u32,
    /// Jump positions `m` at every computed level.
    pub jump_sets: BTreeMap<u32, Vec<u64>>,
    pub audit_level: Option<u32>,
    /// Whether the full sweep at the audit level agreed with refinement.
    pub audit_consistent: bool,
}

impl JumpingNumberReport {
    fn empty(e_reached: u32) -> Self {
        JumpingNumberReport {
            resolved: Vec::new(),
            unresolved: Vec::new(),
            e_reached,
            jump_sets: BTreeMap::new(),
            audit_level: None,
            audit_consistent: true,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// Memoized chain `J_m = κ_g^e(f^m R)`.
///
/// The first `l` Frobenius steps only see `m mod p^l`, so partial results
/// are shared across all levels.
struct ImageChain<'a> {
    spec: &'a CartierModuleSpec,
    f: &'a SparsePoly,
    p: u64,
    partial: Mutex<HashMap<(u32, u64), Ideal>>,
}

impl<'a> ImageChain<'a> {
    fn new(spec: &'a CartierModuleSpec, f: &'a SparsePoly) -> Self {
        ImageChain {
            spec,
            f,
            p: spec.prime().as_u64(),
            partial: Mutex::new(HashMap::new()),
        }
    }

    /// Ideal after `l` steps driven by the digits of `r < p^l`.
    fn partial(&self, l: u32, r: u64) -> Result<Ideal> {
        if l == 0 {
            return Ok(Ideal::unit(self.spec.ring()));
        }
        if let Some(hit) = self.partial.lock().expect("poisoned").get(&(l, r)) {
            return Ok(hit.clone());
        }
        let low = self.p.pow(l - 1);
        let prev = self.partial(l - 1, r % low)?;
        let digit = (r / low) as u32;
        let img = cartier::power_image(self.spec, self.f, &BigUint::from(digit), &prev, 1)?;
        self.partial.lock().expect("poisoned").insert((l, r), img.clone());
        Ok(img)
    }

    fn image(&self, e: u32, m: u64) -> Result<Ideal> {
        let q = self.p.pow(e);
        let base = self.partial(e, m % q)?;
        let outer = m / q;
        if outer == 0 {
            Ok(base)
        } else {
            base.scale(&self.f.pow(outer)?)?.canonical()
        }
    }

    fn differs(&self, e: u32, a: u64, b: u64) -> Result<bool> {
        Ok(!self.image(e, a)?.ideal_equal(&self.image(e, b)?)?)
    }

    /// Jumps in `[a, b)`: positions `m` with `J_m ≠ J_{m+1}`.
    fn sweep(&self, e: u32, a: u64, b: u64) -> Result<Vec<u64>> {
        if a >= b || !self.differs(e, a, b)? {
            return Ok(Vec::new());
        }
        if b == a + 1 {
            return Ok(vec![a]);
        }
        let mid = a + (b - a) / 2;
        let (left, right) = rayon::join(|| self.sweep(e, a, mid), || self.sweep(e, mid, b));
        let mut out = left?;
        out.extend(right?);
        Ok(out)
    }

    fn full_sweep(&self, e: u32) -> Result<Vec<u64>> {
        self.sweep(e, 0, self.p.pow(e))
    }

    /// Jumps at level `e + 1` among the children of level-`e` jumps.
    fn refine(&self, e: u32, parents: &[u64]) -> Result<Vec<u64>> {
        let p = self.p;
        let candidates: Vec<u64> = parents
            .iter()
            .flat_map(|&m| (m * p..m * p + p).collect::<Vec<_>>())
            .collect();
        let flags = candidates
            .par_iter()
            .map(|&c| self.differs(e + 1, c, c + 1))
            .collect::<Result<Vec<bool>>>()?;
        Ok(candidates
            .into_iter()
            .zip(flags)
            .filter_map(|(c, jump)| jump.then_some(c))
            .collect())
    }
}

/// All jump positions of the level-`e` chain, by a full divide-and-conquer
/// sweep. A unit `f` gives a constant chain.
pub(crate) fn chain_jumps(spec: &CartierModuleSpec, f: &SparsePoly, e: u32) -> Result<Vec<u64>> {
    require_nonzero(f)?;
    if e == 0 {
        return Err(Error::Range {
            value: "0".into(),
            reason: "level must be at least 1".into(),
        });
    }
    let pu = spec.prime().as_u64();
    if pu.checked_pow(e + 1).is_none() {
        return Err(Error::Budget(format!("{pu}^{} does not fit in 64 bits", e + 1)));
    }
    if f.is_unit() {
        return Ok(Vec::new());
    }
    ImageChain::new(spec, f).full_sweep(e)
}

fn check_search_preconditions(spec: &CartierModuleSpec, f: &SparsePoly) -> Result<()> {
    require_nonzero(f)?;
    if !spec.f_pure_verified() {
        return Err(Error::NotFPure);
    }
    if spec.f_regular_status() == FRegularStatus::Unknown {
        return Err(Error::FRegularityUnchecked);
    }
    Ok(())
}

/// Finds the F-jumping numbers of `τ(M, f^t)` in `(0, 1]`.
///
/// Level 1 is swept in full; deeper levels only probe the `p` children of
/// known jumps, with a second full sweep at the audit level. The base-p
/// digits of each deepest jump are then matched against eventually
/// periodic patterns; a pattern is accepted only if it leaves at least one
/// digit of confirmation and its rational reproduces the jump sets at every
/// computed level.
pub fn jumping_numbers(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    config: &SearchConfig,
) -> Result<JumpingNumberReport> {
    check_search_preconditions(spec, f)?;
    if config.e_max < 1 {
        return Err(Error::Range {
            value: "0".into(),
            reason: "e_max must be at least 1".into(),
        });
    }
    if Ideal::principal(f.clone()).is_unit_ideal()? {
        return Ok(JumpingNumberReport::empty(0));
    }
    let p = spec.prime();
    let pu = p.as_u64();
    if pu.checked_pow(config.e_max + 1).is_none() {
        return Err(Error::Budget(format!(
            "{pu}^{} does not fit in 64 bits",
            config.e_max + 1
        )));
    }
    let chain = ImageChain::new(spec, f);
    let mut sets: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    let mut current = chain.full_sweep(1)?;
    sets.insert(1, current.clone());
    let mut audit_level = None;
    let mut audit_consistent = true;
    if config.audit_level == 1 {
        audit_level = Some(1);
    }
    for e in 2..=config.e_max {
        let mut next = chain.refine(e - 1, &current)?;
        if e == config.audit_level {
            let full = chain.full_sweep(e)?;
            audit_level = Some(e);
            audit_consistent = full == next;
            let merged: BTreeSet<u64> = next.into_iter().chain(full).collect();
            next = merged.into_iter().collect();
        }
        sets.insert(e, next.clone());
        current = next;
    }
    let e_reached = config.e_max;
    let mut resolved = BTreeSet::new();
    let mut unresolved = Vec::new();
    for &m in &current {
        match detect_period(m, e_reached, p, config.period_window, &sets)? {
            Some(lambda) => {
                resolved.insert(lambda);
            }
            None => unresolved.push((
                Rational::scaled(m, p, e_reached),
                Rational::scaled(m + 1, p, e_reached),
            )),
        }
    }
    Ok(JumpingNumberReport {
        resolved: resolved.into_iter().collect(),
        unresolved,
        e_reached,
        jump_sets: sets,
        audit_level,
        audit_consistent,
    })
}

/// The rational recovered from the digits of the jump `m` at level `e`, if
/// some short eventually periodic pattern explains them and agrees with all
/// computed jump sets.
fn detect_period(
    m: u64,
    e: u32,
    p: Prime,
    period_window: usize,
    sets: &BTreeMap<u32, Vec<u64>>,
) -> Result<Option<Rational>> {
    let digits = base_p_digits_u64(m, p, e)?.reversed();
    let len = e as usize;
    let mut candidates = Vec::new();
    for period in 1..len {
        if 2 * period > period_window {
            break;
        }
        for pre in 0..len {
            if pre + 2 * period < len {
                candidates.push((pre, period));
            }
        }
    }
    candidates.sort_by_key(|&(q, per)| (q + per, per));
    for (pre, period) in candidates {
        let Ok(lambda) = rational_from_periodic(&digits, pre, period) else {
            continue;
        };
        if lambda.is_zero() || lambda > Rational::one() {
            continue;
        }
        if consistent_with_sets(&lambda, p, sets)? {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}

fn consistent_with_sets(lambda: &Rational, p: Prime, sets: &BTreeMap<u32, Vec<u64>>) -> Result<bool> {
    for (&level, jumps) in sets {
        let pos = truncated_expansion(lambda, level, p)?.reversed().to_int();
        let pos = pos.to_u64().expect("below p^level");
        if jumps.binary_search(&pos).is_err() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The F-pure threshold: the least jumping number, or the interval that
/// must contain it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    Exact(Rational),
    Interval(Rational, Rational),
    /// `f` is a unit, so the filtration never drops.
    None,
}

pub fn fpt(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    config: &SearchConfig,
) -> Result<(Threshold, JumpingNumberReport)> {
    let report = jumping_numbers(spec, f, config)?;
    let first_exact = report.resolved.first();
    let first_open = report.unresolved.first();
    let threshold = match (first_exact, first_open) {
        (Some(l), Some((lo, hi))) if lo < l => Threshold::Interval(lo.clone(), hi.clone()),
        (Some(l), _) => Threshold::Exact(l.clone()),
        (None, Some((lo, hi))) => Threshold::Interval(lo.clone(), hi.clone()),
        (None, None) => Threshold::None,
    };
    Ok((threshold, report))
}
