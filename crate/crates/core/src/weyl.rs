//! Divided-power differential operators in one variable `t` over `R`,
//! acting on the truncated spaces `⊕_{k<D} R t^k`.
//!
//! Every generator sends a basis vector `t^n` to a scalar multiple of a
//! single basis vector, so operators are evaluated by action and never by
//! symbolic rewriting; only [`normalize`] builds normal forms
//! `Σ r t^a ∂^[b]`, under an explicit step budget.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::arith::{binom_mod_p, DigitVector, Prime};
use crate::error::{Error, Result};
use crate::groebner::Ideal;
use crate::poly::{same_ring, Monomial, Ring, SparsePoly};

/// Generators of the operator algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gen {
    /// Multiplication by `t^k`.
    T(u64),
    /// `∂_t^[m]`: `t^n ↦ C(n, m) t^(n-m)`.
    D(u64),
    /// `θ_m = t^m ∂_t^[m]`: `t^n ↦ C(n, m) t^n`.
    Theta(u64),
    /// `ϑ_m = ∂_t^[m] t^m`: `t^n ↦ C(n+m, m) t^n`.
    VarTheta(u64),
    /// Multiplication by an element of `R`.
    Ring(SparsePoly),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::T(1) => write!(f, "t"),
            Gen::T(k) => write!(f, "t^{k}"),
            Gen::D(m) => write!(f, "d[{m}]"),
            Gen::Theta(m) => write!(f, "theta[{m}]"),
            Gen::VarTheta(m) => write!(f, "vartheta[{m}]"),
            Gen::Ring(r) => write!(f, "({r})"),
        }
    }
}

/// An integer multiple of a product of generators, read left to right as
/// composition (the rightmost generator acts first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub coeff: i64,
    pub gens: Vec<Gen>,
}

/// A formal integer combination of words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OperatorExpr {
    words: Vec<Word>,
}

impl OperatorExpr {
    pub fn zero() -> Self {
        OperatorExpr::default()
    }

    pub fn scalar(c: i64) -> Self {
        OperatorExpr {
            words: vec![Word {
                coeff: c,
                gens: Vec::new(),
            }],
        }
    }

    pub fn identity() -> Self {
        Self::scalar(1)
    }

    pub fn gen(g: Gen) -> Self {
        OperatorExpr {
            words: vec![Word {
                coeff: 1,
                gens: vec![g],
            }],
        }
    }

    pub fn t(k: u64) -> Self {
        Self::gen(Gen::T(k))
    }

    pub fn d(m: u64) -> Self {
        Self::gen(Gen::D(m))
    }

    pub fn theta(m: u64) -> Self {
        Self::gen(Gen::Theta(m))
    }

    pub fn vartheta(m: u64) -> Self {
        Self::gen(Gen::VarTheta(m))
    }

    pub fn ring(r: SparsePoly) -> Self {
        Self::gen(Gen::Ring(r))
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn add(&self, other: &OperatorExpr) -> OperatorExpr {
        let mut words = self.words.clone();
        words.extend(other.words.iter().cloned());
        OperatorExpr { words }
    }

    pub fn sub(&self, other: &OperatorExpr) -> OperatorExpr {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, c: i64) -> OperatorExpr {
        OperatorExpr {
            words: self
                .words
                .iter()
                .map(|w| Word {
                    coeff: w.coeff * c,
                    gens: w.gens.clone(),
                })
                .collect(),
        }
    }

    /// Composition `self ∘ other`.
    pub fn mul(&self, other: &OperatorExpr) -> OperatorExpr {
        let mut words = Vec::with_capacity(self.words.len() * other.words.len());
        for a in &self.words {
            for b in &other.words {
                let mut gens = a.gens.clone();
                gens.extend(b.gens.iter().cloned());
                words.push(Word {
                    coeff: a.coeff * b.coeff,
                    gens,
                });
            }
        }
        OperatorExpr { words }
    }

    pub fn pow(&self, k: u32) -> OperatorExpr {
        (0..k).fold(Self::identity(), |acc, _| acc.mul(self))
    }

    /// `[self, other] = self·other - other·self`.
    pub fn commutator(&self, other: &OperatorExpr) -> OperatorExpr {
        self.mul(other).sub(&other.mul(self))
    }

    /// Largest total power of `t` any word multiplies by; bounds how far the
    /// action can raise degrees.
    pub fn degree_raise(&self) -> u64 {
        self.words
            .iter()
            .map(|w| {
                w.gens
                    .iter()
                    .map(|g| match g {
                        Gen::T(k) => *k,
                        _ => 0,
                    })
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.words.is_empty() {
            return write!(f, "0");
        }
        for (k, w) in self.words.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", w.coeff)?;
            for g in &w.gens {
                write!(f, "*{g}")?;
            }
        }
        Ok(())
    }
}

/// An element `Σ_{k<D} a_k t^k` of `R[t]` truncated below degree `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedElement {
    ring: Arc<Ring>,
    coeffs: Vec<SparsePoly>,
}

impl TruncatedElement {
    pub fn zero(ring: &Arc<Ring>, bound: usize) -> Self {
        TruncatedElement {
            ring: ring.clone(),
            coeffs: vec![SparsePoly::zero(ring); bound],
        }
    }

    /// `t^n`.
    pub fn basis(ring: &Arc<Ring>, bound: usize, n: usize) -> Result<Self> {
        let mut v = Self::zero(ring, bound);
        v.set(n, SparsePoly::one(ring))?;
        Ok(v)
    }

    pub fn from_coeffs(ring: &Arc<Ring>, bound: usize, coeffs: Vec<SparsePoly>) -> Result<Self> {
        let mut v = Self::zero(ring, bound);
        for (k, c) in coeffs.into_iter().enumerate() {
            if !c.is_zero() {
                v.set(k, c)?;
            }
        }
        Ok(v)
    }

    pub fn bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn coeff(&self, k: usize) -> &SparsePoly {
        &self.coeffs[k]
    }

    pub fn set(&mut self, k: usize, c: SparsePoly) -> Result<()> {
        if k >= self.coeffs.len() {
            return Err(Error::TruncationOverflow {
                degree: k as u64,
                bound: self.coeffs.len() as u64,
            });
        }
        if !same_ring(&self.ring, c.ring()) {
            return Err(Error::RingMismatch);
        }
        self.coeffs[k] = c;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(SparsePoly::is_zero)
    }

    /// Largest `k` with `a_k ≠ 0`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn add(&self, other: &TruncatedElement) -> Result<TruncatedElement> {
        if self.bound() != other.bound() {
            return Err(Error::Invalid("truncation bounds differ".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(TruncatedElement {
            ring: self.ring.clone(),
            coeffs,
        })
    }
}

/// Action of one word on `t^n`: the target degree and scalar, or `None`
/// when the image is zero.
fn act_word(gens: &[Gen], n: u64, bound: u64, p: Prime) -> Result<Option<(u64, u32)>> {
    let mut deg = n;
    let mut scalar = 1u32;
    for g in gens.iter().rev() {
        match g {
            Gen::T(k) => {
                deg += k;
                if deg >= bound {
                    return Err(Error::TruncationOverflow { degree: deg, bound });
                }
            }
            Gen::D(m) => {
                if *m > deg {
                    return Ok(None);
                }
                scalar = p.mul(scalar, binom_mod_p(deg, *m, p));
                deg -= m;
            }
            Gen::Theta(m) => scalar = p.mul(scalar, binom_mod_p(deg, *m, p)),
            Gen::VarTheta(m) => scalar = p.mul(scalar, binom_mod_p(deg + m, *m, p)),
            Gen::Ring(_) => {}
        }
        if scalar == 0 {
            return Ok(None);
        }
    }
    Ok(Some((deg, scalar)))
}

fn ring_factor(gens: &[Gen], ring: &Arc<Ring>) -> Result<SparsePoly> {
    let mut acc = SparsePoly::one(ring);
    for g in gens {
        if let Gen::Ring(r) = g {
            acc = acc.mul(r)?;
        }
    }
    Ok(acc)
}

/// `op(v)`, exactly; any image term at degree `≥ D` is an error.
pub fn apply(op: &OperatorExpr, v: &TruncatedElement) -> Result<TruncatedElement> {
    let p = v.ring.prime();
    let bound = v.bound() as u64;
    let mut out = TruncatedElement::zero(&v.ring, v.bound());
    for w in &op.words {
        let c = p.reduce_i64(w.coeff);
        if c == 0 {
            continue;
        }
        let factor = ring_factor(&w.gens, &v.ring)?.scale(c);
        for (n, a) in v.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if let Some((deg, s)) = act_word(&w.gens, n as u64, bound, p)? {
                let term = a.mul(&factor)?.scale(s);
                let k = deg as usize;
                out.coeffs[k] = out.coeffs[k].add(&term)?;
            }
        }
    }
    Ok(out)
}

/// `op(t^n)` for an operator with scalar coefficients, as a sparse map
/// from degree to coefficient in `F_p`.
pub fn apply_basis(op: &OperatorExpr, n: u64, bound: u64, p: Prime) -> Result<BTreeMap<u64, u32>> {
    let mut out: BTreeMap<u64, u32> = BTreeMap::new();
    for w in &op.words {
        let mut c = p.reduce_i64(w.coeff);
        for g in &w.gens {
            if let Gen::Ring(r) = g {
                if !r.is_constant() {
                    return Err(Error::Invalid(format!("`{r}` is not a scalar")));
                }
                c = p.mul(c, r.coefficient(&Monomial::one(r.ring().arity())));
            }
        }
        if c == 0 {
            continue;
        }
        if let Some((deg, s)) = act_word(&w.gens, n, bound, p)? {
            let e = out.entry(deg).or_insert(0);
            *e = p.add(*e, p.mul(c, s));
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

/// `Σ r_(a,b) t^a ∂^[b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    ring: Arc<Ring>,
    terms: BTreeMap<(u64, u64), SparsePoly>,
}

impl NormalForm {
    fn constant(ring: &Arc<Ring>, r: SparsePoly) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert((0, 0), r);
        }
        NormalForm {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u64, u64), SparsePoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: (u64, u64), r: SparsePoly) -> Result<()> {
        let entry = self
            .terms
            .entry(key)
            .or_insert_with(|| SparsePoly::zero(&self.ring));
        *entry = entry.add(&r)?;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
        Ok(())
    }

    fn add(&mut self, other: &NormalForm) -> Result<()> {
        for (&k, r) in &other.terms {
            self.add_term(k, r.clone())?;
        }
        Ok(())
    }

    /// `self ∘ other`, charging one budget step per elementary product.
    fn mul(&self, other: &NormalForm, steps: &mut usize, budget: usize) -> Result<NormalForm> {
        let p = self.ring.prime();
        let mut out = NormalForm::constant(&self.ring, SparsePoly::zero(&self.ring));
        for (&(a, b), r) in &self.terms {
            for (&(c, d), s) in &other.terms {
                let rs = r.mul(s)?;
                // ∂^[b] t^c = Σ_j C(c, j) t^(c-j) ∂^[b-j]
                for j in 0..=b.min(c) {
                    *steps += 1;
                    if *steps > budget {
                        return Err(Error::NormalizationBudget(budget));
                    }
                    let coeff = p.mul(binom_mod_p(c, j, p), binom_mod_p(b - j + d, d, p));
                    if coeff != 0 {
                        out.add_term((a + c - j, b - j + d), rs.scale(coeff))?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The normal form as an operator expression.
    pub fn to_expr(&self) -> OperatorExpr {
        let mut out = OperatorExpr::zero();
        for (&(a, b), r) in &self.terms {
            let mut gens = Vec::new();
            if !r.is_one_constant() {
                gens.push(Gen::Ring(r.clone()));
            }
            if a > 0 {
                gens.push(Gen::T(a));
            }
            if b > 0 {
                gens.push(Gen::D(b));
            }
            out.words.push(Word { coeff: 1, gens });
        }
        out
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl SparsePoly {
    fn is_one_constant(&self) -> bool {
        self.is_constant() && self.coefficient(&Monomial::one(self.ring().arity())) == 1
    }
}

fn gen_normal_form(g: &Gen, ring: &Arc<Ring>) -> NormalForm {
    let one = SparsePoly::one(ring);
    let mut nf = NormalForm::constant(ring, SparsePoly::zero(ring));
    match g {
        Gen::T(k) => nf.terms.insert((*k, 0), one),
        Gen::D(m) => nf.terms.insert((0, *m), one),
        Gen::Theta(m) => nf.terms.insert((*m, *m), one),
        Gen::VarTheta(m) => {
            // ∂^[m] t^m = Σ_k C(m, k) t^k ∂^[k]
            let p = ring.prime();
            for k in 0..=*m {
                let c = binom_mod_p(*m, k, p);
                if c != 0 {
                    nf.terms.insert((k, k), SparsePoly::constant(ring, c as i64));
                }
            }
            None
        }
        Gen::Ring(r) => {
            if !r.is_zero() {
                nf.terms.insert((0, 0), r.clone());
            }
            None
        }
    };
    nf
}

/// Default cap on elementary products performed by [`normalize`].
pub const DEFAULT_NORMALIZATION_BUDGET: usize = 1_000_000;

/// Normal form `Σ r t^a ∂^[b]` of `op` over `ring`.
pub fn normalize(op: &OperatorExpr, ring: &Arc<Ring>, budget: usize) -> Result<NormalForm> {
    let p = ring.prime();
    let mut steps = 0usize;
    let mut total = NormalForm::constant(ring, SparsePoly::zero(ring));
    for w in &op.words {
        let c = p.reduce_i64(w.coeff);
        if c == 0 {
            continue;
        }
        let mut acc = NormalForm::constant(ring, SparsePoly::constant(ring, c as i64));
        for g in &w.gens {
            if let Gen::Ring(r) = g {
                if !same_ring(r.ring(), ring) {
                    return Err(Error::RingMismatch);
                }
            }
            acc = acc.mul(&gen_normal_form(g, ring), &mut steps, budget)?;
        }
        total.add(&acc)?;
    }
    Ok(total)
}

/// Formal transpose: `t ↦ t`, `∂^[m] ↦ (-1)^m ∂^[m]`, `r ↦ r`, extended
/// anti-multiplicatively. Hence `θ_m ↦ (-1)^m ϑ_m` and `ϑ_m ↦ (-1)^m θ_m`.
pub fn adjoint(op: &OperatorExpr) -> OperatorExpr {
    let sign = |m: u64| if m.is_multiple_of(2) { 1 } else { -1 };
    OperatorExpr {
        words: op
            .words
            .iter()
            .map(|w| {
                let mut coeff = w.coeff;
                let gens = w
                    .gens
                    .iter()
                    .rev()
                    .map(|g| match g {
                        Gen::D(m) => {
                            coeff *= sign(*m);
                            Gen::D(*m)
                        }
                        Gen::Theta(m) => {
                            coeff *= sign(*m);
                            Gen::VarTheta(*m)
                        }
                        Gen::VarTheta(m) => {
                            coeff *= sign(*m);
                            Gen::Theta(*m)
                        }
                        other => other.clone(),
                    })
                    .collect();
                Word { coeff, gens }
            })
            .collect(),
    }
}

/// Normal form of the transpose of `op`, within `budget` elementary steps.
pub fn adjoint_normal(op: &OperatorExpr, ring: &Arc<Ring>, budget: usize) -> Result<NormalForm> {
    normalize(&adjoint(op), ring, budget)
}

/// Keeps only the `t^j` component with `j = Σ i_l p^(l-1)`.
pub fn eigenprojection(v: &TruncatedElement, digits: &DigitVector) -> Result<TruncatedElement> {
    let p = v.ring.prime();
    if digits.prime() != p {
        return Err(Error::Invalid("digit vector uses a different prime".into()));
    }
    let q = p.pow_u64(digits.len() as u32).ok_or_else(|| Error::Range {
        value: digits.len().to_string(),
        reason: "p^e does not fit in 64 bits".into(),
    })?;
    if let Some(d) = v.degree() {
        if d as u64 >= q {
            return Err(Error::TruncationOverflow {
                degree: d as u64,
                bound: q,
            });
        }
    }
    let j = u64::try_from(digits.to_int()).expect("below p^e") as usize;
    let mut out = TruncatedElement::zero(&v.ring, v.bound());
    if j < v.bound() {
        out.coeffs[j] = v.coeffs[j].clone();
    }
    Ok(out)
}

/// One line of the identity suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub statement: &'static str,
    /// Number of (parameter, basis vector) evaluations.
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub p: Prime,
    pub e_max: u32,
    pub bound: u64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

struct Checker {
    p: Prime,
    bound: u64,
    n_limit: u64,
    check: IdentityCheck,
}

impl Checker {
    fn new(p: Prime, bound: u64, n_limit: u64, name: &'static str, statement: &'static str) -> Self {
        Checker {
            p,
            bound,
            n_limit,
            check: IdentityCheck {
                name,
                statement,
                cases: 0,
                failures: 0,
                first_failure: None,
            },
        }
    }

    /// Compares both sides on every `t^n` whose images stay below the bound.
    fn compare(&mut self, label: &str, lhs: &OperatorExpr, rhs: &OperatorExpr) -> Result<()> {
        let raise = lhs.degree_raise().max(rhs.degree_raise());
        let top = self.n_limit.min(self.bound.saturating_sub(raise));
        for n in 0..top {
            let a = apply_basis(lhs, n, self.bound, self.p)?;
            let b = apply_basis(rhs, n, self.bound, self.p)?;
            self.check.cases += 1;
            if a != b {
                self.check.failures += 1;
                if self.check.first_failure.is_none() {
                    self.check.first_failure = Some(format!("{label}, on t^{n}: {a:?} vs {b:?}"));
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> IdentityCheck {
        self.check
    }
}

/// `(sr)!/(s!)^r mod p`, as `∏_{k=1}^{r} C(ks, s)`.
fn multinomial_mod_p(s: u64, r: u64, p: Prime) -> u32 {
    (1..=r).fold(1, |acc, k| p.mul(acc, binom_mod_p(k * s, s, p)))
}

/// `x(x-1)...(x-k+1)/k!` evaluated at the operator `x`, for `k < p`.
fn binomial_poly(x: &OperatorExpr, k: u64, p: Prime) -> OperatorExpr {
    let mut acc = OperatorExpr::identity();
    let mut fact = 1u32;
    for j in 0..k {
        acc = acc.mul(&x.sub(&OperatorExpr::scalar(j as i64)));
        fact = p.mul(fact, (j + 1) as u32);
    }
    acc.scale(p.inv(fact) as i64)
}

/// Evaluates the operator identities on every admissible basis vector
/// `t^n` with `n < D - p^e_max`, for all prime-power indices up to
/// `p^e_max`. Identities that raise degree are only evaluated where no
/// intermediate image reaches `D`.
///
/// Besides the identities as usually stated, the report includes two
/// corrected commutator rules, `[t, θ_m] = -t θ_(m-1)` and
/// `[t, ϑ_m] = -ϑ_(m-1) t`, which hold for all `m ≥ 1`.
pub fn identity_suite(p: Prime, e_max: u32, bound: u64) -> Result<IdentityReport> {
    let top = p.pow_u64(e_max + 1).ok_or_else(|| Error::Range {
        value: e_max.to_string(),
        reason: "p^(e_max+1) does not fit in 64 bits".into(),
    })?;
    if bound <= top {
        return Err(Error::Range {
            value: bound.to_string(),
            reason: format!("degree bound must exceed p^(e_max+1) = {top}"),
        });
    }
    let pu = p.as_u64();
    let n_limit = bound - top / pu;
    let qs: Vec<u64> = (0..=e_max).map(|i| pu.pow(i)).collect();
    let ck = |name, statement| Checker::new(p, bound, n_limit, name, statement);
    let op = OperatorExpr::scalar;
    let mut checks = Vec::new();

    let mut c = ck("divided_power_commutator", "[d[q], t^q] = 1 for q = p^i");
    for &q in &qs {
        let lhs = OperatorExpr::d(q).commutator(&OperatorExpr::t(q));
        c.compare(&format!("q={q}"), &lhs, &OperatorExpr::identity())?;
    }
    checks.push(c.finish());

    let mut c = ck("divided_power_composition", "(sr)!/(s!)^r d[sr] = d[s]^r");
    let mut ss: Vec<u64> = vec![1, 2, 3];
    ss.extend(qs.iter().copied());
    ss.sort_unstable();
    ss.dedup();
    for &s in &ss {
        for r in 1..=pu + 1 {
            let coeff = multinomial_mod_p(s, r, p) as i64;
            let lhs = OperatorExpr::d(s * r).scale(coeff);
            let rhs = OperatorExpr::d(s).pow(r as u32);
            c.compare(&format!("s={s} r={r}"), &lhs, &rhs)?;
        }
    }
    checks.push(c.finish());

    let mut c = ck("euler_product", "prod_{j=1..r} (theta[q] + j) = d[q]^r t^(qr)");
    for &q in &qs {
        for r in 1..=pu {
            let lhs = (1..=r).fold(OperatorExpr::identity(), |acc, j| {
                acc.mul(&OperatorExpr::theta(q).add(&op(j as i64)))
            });
            let rhs = OperatorExpr::d(q)
                .pow(r as u32)
                .mul(&OperatorExpr::t(q).pow(r as u32));
            c.compare(&format!("q={q} r={r}"), &lhs, &rhs)?;
        }
    }
    checks.push(c.finish());

    let t = OperatorExpr::t(1);
    let mut c = ck(
        "t_commutator_prime_power",
        "[t, theta[q]] = -theta[q-1] t - t for q = p^i",
    );
    for &q in &qs {
        let lhs = t.commutator(&OperatorExpr::theta(q));
        let rhs = OperatorExpr::theta(q - 1).mul(&t).scale(-1).sub(&t);
        c.compare(&format!("q={q}"), &lhs, &rhs)?;
    }
    checks.push(c.finish());

    let mut c = ck("euler_operators_commute", "[theta[i], theta[j]] = 0");
    let mut idx: Vec<u64> = (0..=2 * pu).collect();
    for &q in &qs {
        idx.push(q);
        idx.push(q.saturating_sub(1));
        idx.push(q + 1);
    }
    idx.sort_unstable();
    idx.dedup();
    for &i in &idx {
        for &j in &idx {
            if i < j {
                let lhs = OperatorExpr::theta(i).commutator(&OperatorExpr::theta(j));
                c.compare(&format!("i={i} j={j}"), &lhs, &OperatorExpr::zero())?;
            }
        }
    }
    checks.push(c.finish());

    let max_m = (qs[qs.len() - 1] + 1).min(64);
    let mut c = ck(
        "t_commutator_general",
        "[t, theta[m]] = -m t - t sum_{j<m} theta[j]",
    );
    for m in 1..=max_m {
        let lhs = t.commutator(&OperatorExpr::theta(m));
        let sum = (0..m).fold(OperatorExpr::zero(), |acc, j| acc.add(&OperatorExpr::theta(j)));
        let rhs = t.scale(-(m as i64)).sub(&t.mul(&sum));
        c.compare(&format!("m={m}"), &lhs, &rhs)?;
    }
    checks.push(c.finish());

    let mut c = ck("t_commutator_shift", "[t, theta[m]] = -t theta[m-1]");
    for m in 1..=max_m {
        let lhs = t.commutator(&OperatorExpr::theta(m));
        let rhs = t.mul(&OperatorExpr::theta(m - 1)).scale(-1);
        c.compare(&format!("m={m}"), &lhs, &rhs)?;
    }
    checks.push(c.finish());

    let mut c = ck("t_commutator_shift_dual", "[t, vartheta[m]] = -vartheta[m-1] t");
    for m in 1..=max_m {
        let lhs = t.commutator(&OperatorExpr::vartheta(m));
        let rhs = OperatorExpr::vartheta(m - 1).mul(&t).scale(-1);
        c.compare(&format!("m={m}"), &lhs, &rhs)?;
    }
    checks.push(c.finish());

    let mut c = ck(
        "lucas_factorization",
        "theta[m] = prod_l binom(theta[p^l], m_l) for m < p^e",
    );
    let q_top = qs[qs.len() - 1];
    for m in 0..q_top {
        let digits = crate::arith::base_p_digits_u64(m, p, e_max.max(1))?;
        let mut rhs = OperatorExpr::identity();
        for (l, &d) in digits.digits().iter().enumerate() {
            rhs = rhs.mul(&binomial_poly(
                &OperatorExpr::theta(pu.pow(l as u32)),
                d as u64,
                p,
            ));
        }
        c.compare(&format!("m={m}"), &OperatorExpr::theta(m), &rhs)?;
    }
    checks.push(c.finish());

    let mut c = ck("nilpotence", "d[q]^p = 0 for q = p^i");
    for &q in &qs {
        c.compare(
            &format!("q={q}"),
            &OperatorExpr::d(q).pow(pu as u32),
            &OperatorExpr::zero(),
        )?;
    }
    checks.push(c.finish());

    Ok(IdentityReport {
        p,
        e_max,
        bound,
        checks,
    })
}

/// Names of the checks that restate the operator lemma as usually written;
/// the corrected commutator rules are reported separately.
pub const STATED_IDENTITIES: [&str; 8] = [
    "divided_power_commutator",
    "divided_power_composition",
    "euler_product",
    "t_commutator_prime_power",
    "euler_operators_commute",
    "t_commutator_general",
    "lucas_factorization",
    "nilpotence",
];

/// Largest `p^e · D` accepted by [`dmodule_closure_bruteforce`].
pub const BRUTEFORCE_LIMIT: u64 = 1 << 12;

/// Brute-force image of `f^m · R` under the level-`e` trace map, for a
/// univariate ring.
///
/// The trace sends `x^k` to `x^((k+1)/p^e - 1)` when `k ≡ -1 mod p^e` and
/// to zero otherwise. The result is the ideal generated by the traces of
/// `x^b · f^m · x^k` for every monomial multiplier `x^b` with `b < p^e` and
/// every `k < D`; it is an independent route to the Frobenius root of
/// `(f^m)`.
pub fn dmodule_closure_bruteforce(f: &SparsePoly, m: u64, e: u32, bound: u64) -> Result<Ideal> {
    let ring = f.ring();
    if ring.arity() != 1 {
        return Err(Error::Invalid(
            "brute-force closure needs a univariate ring".into(),
        ));
    }
    let q = ring.prime().pow_u64(e).unwrap_or(u64::MAX);
    if q.saturating_mul(bound) > BRUTEFORCE_LIMIT {
        return Err(Error::Budget(format!(
            "p^e * D = {} exceeds {BRUTEFORCE_LIMIT}",
            q.saturating_mul(bound)
        )));
    }
    if bound < q {
        return Err(Error::Range {
            value: bound.to_string(),
            reason: format!("degree bound must be at least p^e = {q}"),
        });
    }
    let fm = f.pow(m)?;
    let trace = |h: &SparsePoly| {
        SparsePoly::from_terms(
            ring,
            h.terms().filter_map(|(mono, c)| {
                let k = mono.exponents()[0] as u64;
                (k + 1)
                    .is_multiple_of(q)
                    .then(|| (Monomial::from_exponents(&[((k + 1) / q - 1) as u32]), c))
            }),
        )
    };
    let mut gens = Vec::new();
    for b in 0..q {
        for k in 0..bound {
            let shift = Monomial::from_exponents(&[(b + k) as u32]);
            let image = trace(&fm.mul_monomial(&shift, 1)?);
            if !image.is_zero() {
                gens.push(image);
            }
        }
    }
    Ideal::new(ring, gens).canonical()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64) -> Arc<Ring> {
        Ring::new(Prime::new(p).unwrap(), &["x"]).unwrap()
    }

    fn on_basis(op: &OperatorExpr, n: u64, p: u64) -> BTreeMap<u64, u32> {
        apply_basis(op, n, 1000, Prime::new(p).unwrap()).unwrap()
    }

    #[test]
    fn action_examples() {
        assert_eq!(on_basis(&OperatorExpr::d(2), 5, 3), BTreeMap::from([(3, 1)]));
        for n in 0..10 {
            let got = on_basis(&OperatorExpr::theta(1), n, 5);
            let want = if n % 5 == 0 {
                BTreeMap::new()
            } else {
                BTreeMap::from([(n, (n % 5) as u32)])
            };
            assert_eq!(got, want);
        }
        assert_eq!(
            on_basis(&OperatorExpr::vartheta(2), 0, 7),
            BTreeMap::from([(0, 1)])
        );
    }

    #[test]
    fn truncation_is_an_error() {
        let r = ring(3);
        let v = TruncatedElement::basis(&r, 4, 3).unwrap();
        assert!(matches!(
            apply(&OperatorExpr::t(1), &v),
            Err(Error::TruncationOverflow { .. })
        ));
        let w = TruncatedElement::basis(&r, 4, 2).unwrap();
        let image = apply(&OperatorExpr::t(1), &w).unwrap();
        assert_eq!(image, TruncatedElement::basis(&r, 4, 3).unwrap());
    }

    #[test]
    fn ring_coefficients_act() {
        let r = ring(5);
        let x = SparsePoly::var(&r, 0);
        let v = TruncatedElement::basis(&r, 8, 2).unwrap();
        let op = OperatorExpr::ring(x.clone()).mul(&OperatorExpr::d(1));
        let image = apply(&op, &v).unwrap();
        assert_eq!(image.coeff(1), &x.scale(2));
    }

    #[test]
    fn commutator_example() {
        // [d[2], t^2] t^2 = (C(4,2) - C(2,2)) t^2 = t^2 over F_2.
        let op = OperatorExpr::d(2).commutator(&OperatorExpr::t(2));
        assert_eq!(on_basis(&op, 2, 2), BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn nilpotence_example() {
        let op = OperatorExpr::d(1).pow(2);
        for n in 0..20 {
            assert!(on_basis(&op, n, 2).is_empty());
        }
    }

    #[test]
    fn eigenprojection_examples() {
        let r = ring(2);
        let p = Prime::new(2).unwrap();
        let coeffs: Vec<SparsePoly> = ["1", "x", "x+1", "x^2"]
            .iter()
            .map(|s| SparsePoly::parse(s, &r).unwrap())
            .collect();
        let v = TruncatedElement::from_coeffs(&r, 4, coeffs.clone()).unwrap();
        let proj = eigenprojection(&v, &DigitVector::new(vec![1, 0], p).unwrap()).unwrap();
        assert_eq!(proj.coeff(1), &coeffs[1]);
        assert_eq!(proj.degree(), Some(1));
        let mut sum = TruncatedElement::zero(&r, 4);
        for m in 0..4 {
            let i = crate::arith::base_p_digits_u64(m, p, 2).unwrap();
            sum = sum.add(&eigenprojection(&v, &i).unwrap()).unwrap();
        }
        assert_eq!(sum, v);
        let t3 = TruncatedElement::basis(&r, 4, 3).unwrap();
        let proj = eigenprojection(&t3, &DigitVector::new(vec![1, 1], p).unwrap()).unwrap();
        assert_eq!(apply(&OperatorExpr::theta(1), &proj).unwrap(), t3);
        let big = TruncatedElement::basis(&r, 8, 5).unwrap();
        assert!(eigenprojection(&big, &DigitVector::new(vec![1, 0], p).unwrap()).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let r = ring(5);
        let nf = |op: &OperatorExpr| normalize(op, &r, DEFAULT_NORMALIZATION_BUDGET).unwrap();
        let euler = OperatorExpr::t(1).mul(&OperatorExpr::d(1));
        let expected = OperatorExpr::identity().add(&OperatorExpr::theta(1)).scale(-1);
        assert_eq!(nf(&adjoint(&euler)), nf(&expected));
        assert_eq!(nf(&adjoint(&euler)), nf(&OperatorExpr::vartheta(1).scale(-1)));
        let s = OperatorExpr::ring(SparsePoly::parse("x+2", &r).unwrap());
        assert_eq!(adjoint(&s), s);
        let dd = OperatorExpr::d(1).mul(&OperatorExpr::d(1));
        assert_eq!(nf(&adjoint(&dd)), nf(&dd));
        assert_eq!(adjoint(&adjoint(&euler)), euler);
    }

    #[test]
    fn normal_form_matches_action() {
        let r = ring(3);
        let p = Prime::new(3).unwrap();
        let op = OperatorExpr::d(2)
            .mul(&OperatorExpr::t(3))
            .add(&OperatorExpr::vartheta(4))
            .mul(&OperatorExpr::theta(2));
        let nf = normalize(&op, &r, DEFAULT_NORMALIZATION_BUDGET).unwrap();
        let back = nf.to_expr();
        for n in 0..60 {
            assert_eq!(
                apply_basis(&op, n, 100, p).unwrap(),
                apply_basis(&back, n, 100, p).unwrap()
            );
        }
    }

    #[test]
    fn normalization_budget() {
        let r = ring(3);
        let op = OperatorExpr::vartheta(30).pow(4);
        assert!(matches!(
            normalize(&op, &r, 10),
            Err(Error::NormalizationBudget(10))
        ));
    }

    #[test]
    fn bruteforce_examples() {
        let r = ring(2);
        let poly = |s: &str| SparsePoly::parse(s, &r).unwrap();
        assert!(dmodule_closure_bruteforce(&poly("x"), 1, 1, 8)
            .unwrap()
            .is_unit_ideal()
            .unwrap());
        let got = dmodule_closure_bruteforce(&poly("x^2"), 1, 1, 8).unwrap();
        assert!(got.ideal_equal(&Ideal::principal(poly("x"))).unwrap());
        let got = dmodule_closure_bruteforce(&poly("x^3"), 2, 2, 8).unwrap();
        assert!(got.ideal_equal(&Ideal::principal(poly("x"))).unwrap());
        assert!(matches!(
            dmodule_closure_bruteforce(&poly("x"), 1, 2, 2048),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn suite_reports_each_identity() {
        let rep = identity_suite(Prime::new(2).unwrap(), 2, 64).unwrap();
        for name in [
            "divided_power_commutator",
            "divided_power_composition",
            "euler_product",
            "euler_operators_commute",
            "lucas_factorization",
            "nilpotence",
            "t_commutator_shift",
            "t_commutator_shift_dual",
        ] {
            let c = rep.check(name).unwrap();
            assert!(c.passed(), "{name}: {:?}", c.first_failure);
            assert!(c.cases > 0);
        }
        assert!(identity_suite(Prime::new(2).unwrap(), 2, 8).is_err());
    }
}
