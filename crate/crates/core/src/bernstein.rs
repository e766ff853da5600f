//! Bernstein-Sato polynomials `b^e(s)` read off the jump sets of the
//! Frobenius-root chain, their limit, and the left/right eigenvalue pairing.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use crate::arith::{base_p_digits_u64, truncated_expansion, DigitVector, Prime, Rational};
use crate::cartier::CartierModuleSpec;
use crate::error::{Error, Result};
use crate::poly::SparsePoly;
use crate::testmodule::{chain_jumps, jumping_numbers, SearchConfig};

/// Digit vectors `(i_1, ..., i_e)` with a nonzero eigenspace, stored as the
/// integers `m = Σ i_l p^(l-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaSet {
    pub e: u32,
    pub p: Prime,
    pub members: Vec<u64>,
}

impl GammaSet {
    pub fn digit_vectors(&self) -> Vec<DigitVector> {
        self.members
            .iter()
            .map(|&m| base_p_digits_u64(m, self.p, self.e).expect("member below p^e"))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A monic polynomial in `s` given by its rational roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BSPoly {
    /// Roots in ascending order, with multiplicity.
    pub roots: Vec<Rational>,
    /// The level `e`, or `None` for the limit polynomial.
    pub level: Option<u32>,
}

impl BSPoly {
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    /// Coefficients of `∏ (s - r)` from the constant term up.
    pub fn coefficients(&self) -> Vec<Rational> {
        let mut c = vec![Rational::one()];
        for r in &self.roots {
            let mut next = vec![Rational::zero(); c.len() + 1];
            for (k, a) in c.iter().enumerate() {
                next[k + 1] = &next[k + 1] + a;
                next[k] = &next[k] - &(a * r);
            }
            c = next;
        }
        c
    }
}

impl fmt::Display for BSPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.roots.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.roots.iter().map(|r| format!("(s - {r})")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

pub fn gamma_set(spec: &CartierModuleSpec, f: &SparsePoly, e: u32) -> Result<GammaSet> {
    Ok(GammaSet {
        e,
        p: spec.prime(),
        members: chain_jumps(spec, f, e)?,
    })
}

/// `b^e(s) = ∏_{m ∈ Γ^e} (s - m/p^e)`.
pub fn bs_poly(spec: &CartierModuleSpec, f: &SparsePoly, e: u32) -> Result<BSPoly> {
    let gamma = gamma_set(spec, f, e)?;
    Ok(poly_from_gamma(&gamma))
}

fn poly_from_gamma(gamma: &GammaSet) -> BSPoly {
    BSPoly {
        roots: gamma
            .members
            .iter()
            .map(|&m| Rational::scaled(m, gamma.p, gamma.e))
            .collect(),
        level: Some(gamma.e),
    }
}

/// The limit polynomial, whose roots are the jumping numbers in `(0, 1]`.
pub fn limit_bs_poly(spec: &CartierModuleSpec, f: &SparsePoly, config: &SearchConfig) -> Result<BSPoly> {
    let report = jumping_numbers(spec, f, config)?;
    if !report.is_complete() {
        return Err(Error::Unresolved(Box::new(report)));
    }
    Ok(BSPoly {
        roots: report.resolved,
        level: None,
    })
}

/// One eigenvalue pair at level `e`: the right expansion `λ` (a jump
/// position) and its left partner `μ`, obtained digitwise by
/// `i ↦ p - 1 - i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StadnikPair {
    pub lambda: u64,
    pub mu: u64,
    pub lambda_digits: DigitVector,
    pub mu_digits: DigitVector,
}

#[derive(Debug, Clone)]
pub struct StadnikReport {
    pub e: u32,
    pub pairs: Vec<StadnikPair>,
    /// Whether `μ + λ = p^e - 1` for every pair, checked both on digits and
    /// on the integers.
    pub relation_verified: bool,
    pub b_tilde: BSPoly,
}

pub fn stadnik_report(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    e: u32,
    config: &SearchConfig,
) -> Result<StadnikReport> {
    let gamma = gamma_set(spec, f, e)?;
    let p = spec.prime();
    let top = p.as_u64().pow(e) - 1;
    let mut verified = true;
    let mut pairs = Vec::with_capacity(gamma.len());
    for (&lambda, lambda_digits) in gamma.members.iter().zip(gamma.digit_vectors()) {
        let mu_digits = lambda_digits.complement();
        let mu = mu_digits.to_int().try_into().expect("below p^e");
        let digitwise = lambda_digits
            .digits()
            .iter()
            .zip(mu_digits.digits())
            .all(|(a, b)| a + b == p.get() - 1);
        verified &= digitwise && lambda + mu == top;
        pairs.push(StadnikPair {
            lambda,
            mu,
            lambda_digits,
            mu_digits,
        });
    }
    let b_tilde = if f.is_unit() {
        BSPoly {
            roots: Vec::new(),
            level: None,
        }
    } else {
        limit_bs_poly(spec, f, config)?
    };
    Ok(StadnikReport {
        e,
        pairs,
        relation_verified: verified,
        b_tilde,
    })
}

/// Comparison of `p^e · roots(b^e)` with `{⌈λ p^e⌉ - 1}` at one level;
/// `equal` also requires the truncations of distinct `λ` to be distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessRow {
    pub e: u32,
    pub gamma: Vec<u64>,
    pub predicted: Vec<u64>,
    pub equal: bool,
}

#[derive(Debug, Clone)]
pub struct MainTheoremReport {
    pub holds: bool,
    pub jumping_numbers: Vec<Rational>,
    pub rows: Vec<WitnessRow>,
    /// First level from which equality holds through the end of the range.
    pub stabilization_level: Option<u32>,
    /// Number of levels past stabilization required for `holds`.
    pub window: u32,
}

/// Checks that for all large enough `e` in `levels` the roots of `b^e` are
/// exactly `(⌈λ p^e⌉ - 1)/p^e` over the jumping numbers `λ`. Equality must
/// persist for at least `config.window` levels past the first level where
/// it starts to hold for good.
pub fn verify_main_theorem(
    spec: &CartierModuleSpec,
    f: &SparsePoly,
    levels: RangeInclusive<u32>,
    config: &SearchConfig,
) -> Result<MainTheoremReport> {
    if levels.is_empty() || *levels.start() == 0 {
        return Err(Error::Range {
            value: format!("{}..={}", levels.start(), levels.end()),
            reason: "level range must be nonempty and start at 1 or later".into(),
        });
    }
    let lambdas = if f.is_unit() {
        Vec::new()
    } else {
        let report = jumping_numbers(spec, f, config)?;
        if !report.is_complete() {
            return Err(Error::Unresolved(Box::new(report)));
        }
        report.resolved
    };
    let p = spec.prime();
    let mut rows = Vec::new();
    for e in levels.clone() {
        let gamma = gamma_set(spec, f, e)?.members;
        let mut predicted = BTreeSet::new();
        for l in &lambdas {
            let m = truncated_expansion(l, e, p)?.reversed().to_int();
            predicted.insert(u64::try_from(m).expect("below p^e"));
        }
        let predicted: Vec<u64> = predicted.into_iter().collect();
        rows.push(WitnessRow {
            e,
            // Distinct jumping numbers must also have distinct truncations.
            equal: gamma == predicted && predicted.len() == lambdas.len(),
            gamma,
            predicted,
        });
    }
    let mut stabilization_level = None;
    for row in rows.iter().rev() {
        if !row.equal {
            break;
        }
        stabilization_level = Some(row.e);
    }
    let holds = stabilization_level.is_some_and(|s| levels.end() - s >= config.window);
    Ok(MainTheoremReport {
        holds,
        jumping_numbers: lambdas,
        rows,
        stabilization_level,
        window: config.window,
    })
}
