//! Sparse multivariate polynomials over `F_p`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use smallvec::SmallVec;

use crate::arith::Prime;
use crate::error::{Error, Result};

mod parse;

/// Resource limits shared by every object over a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest total degree any polynomial may reach.
    pub max_total_degree: u64,
    /// Maximum number of S-pair reductions per Gröbner basis.
    pub groebner_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_total_degree: 10_000_000,
            groebner_budget: 200_000,
        }
    }
}

/// `F_p[x_1, ..., x_n]` with named variables.
#[derive(Debug, PartialEq, Eq)]
pub struct Ring {
    p: Prime,
    vars: Vec<String>,
    limits: Limits,
}

impl Ring {
    pub fn new(p: Prime, vars: &[&str]) -> Result<Arc<Ring>> {
        Self::with_limits(p, vars, Limits::default())
    }

    pub fn with_limits(p: Prime, vars: &[&str], limits: Limits) -> Result<Arc<Ring>> {
        if vars.is_empty() {
            return Err(Error::InvalidRing("at least one variable is required".into()));
        }
        for (k, v) in vars.iter().enumerate() {
            let mut chars = v.chars();
            let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(Error::InvalidRing(format!("`{v}` is not a valid variable name")));
            }
            if vars[..k].contains(v) {
                return Err(Error::InvalidRing(format!("duplicate variable `{v}`")));
            }
        }
        if limits.max_total_degree > u32::MAX as u64 {
            return Err(Error::InvalidRing("degree limit must fit in 32 bits".into()));
        }
        Ok(Arc::new(Ring {
            p,
            vars: vars.iter().map(|s| s.to_string()).collect(),
            limits,
        }))
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    fn check_degree(&self, degree: u64) -> Result<()> {
        if degree > self.limits.max_total_degree {
            Err(Error::DegreeOverflow {
                degree,
                limit: self.limits.max_total_degree,
            })
        } else {
            Ok(())
        }
    }
}

pub(crate) fn same_ring(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// An exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(SmallVec<[u32; 4]>);

impl Monomial {
    pub fn one(arity: usize) -> Self {
        Monomial(SmallVec::from_elem(0, arity))
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn var(arity: usize, index: usize, exp: u32) -> Self {
        let mut m = Self::one(arity);
        m.0[index] = exp;
        m
    }

    #[inline]
    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Product; the caller guarantees the exponents fit.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(&a, &b)| a.max(b)).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| a == 0 || b == 0)
    }
}

/// Graded reverse lexicographic comparison with `x_1 > x_2 > ... > x_n`.
pub fn grevlex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    a.total_degree().cmp(&b.total_degree()).then_with(|| {
        for (x, y) in a.0.iter().zip(&b.0).rev() {
            match x.cmp(y) {
                Ordering::Equal => continue,
                other => return other.reverse(),
            }
        }
        Ordering::Equal
    })
}

/// A polynomial over `F_p`: a map from monomials to nonzero coefficients in
/// `0..p`.
#[derive(Clone)]
pub struct SparsePoly {
    ring: Arc<Ring>,
    terms: BTreeMap<Monomial, u32>,
}

impl PartialEq for SparsePoly {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

impl Eq for SparsePoly {}

impl std::hash::Hash for SparsePoly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly({self})")
    }
}

impl SparsePoly {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        SparsePoly {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<Ring>, c: i64) -> Self {
        let c = ring.p.reduce_i64(c);
        Self::monomial(ring, Monomial::one(ring.arity()), c)
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        Self::constant(ring, 1)
    }

    /// `c * m`, with `c` already reduced mod p.
    pub fn monomial(ring: &Arc<Ring>, m: Monomial, c: u32) -> Self {
        debug_assert_eq!(m.0.len(), ring.arity());
        let mut terms = BTreeMap::new();
        let c = c % ring.p.get();
        if c != 0 {
            terms.insert(m, c);
        }
        SparsePoly {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn var(ring: &Arc<Ring>, index: usize) -> Self {
        Self::monomial(ring, Monomial::var(ring.arity(), index, 1), 1)
    }

    pub fn from_terms(ring: &Arc<Ring>, terms: impl IntoIterator<Item = (Monomial, u32)>) -> Self {
        let mut out = Self::zero(ring);
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn parse(text: &str, ring: &Arc<Ring>) -> Result<Self> {
        parse::parse(text, ring)
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn prime(&self) -> Prime {
        self.ring.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Nonzero constant.
    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.is_constant()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    /// Largest exponent of variable `index`.
    pub fn degree_in(&self, index: usize) -> u32 {
        self.terms.keys().map(|m| m.0[index]).max().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: u32) {
        let p = self.ring.p;
        let c = c % p.get();
        if c == 0 {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = p.add(*o.get(), c);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_ring(&self, other: &SparsePoly) -> Result<()> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SparsePoly {
        let p = self.ring.p;
        SparsePoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, &c)| (m.clone(), p.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: u32) -> SparsePoly {
        let p = self.ring.p;
        let c = c % p.get();
        if c == 0 {
            return Self::zero(&self.ring);
        }
        SparsePoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &a)| (m.clone(), p.mul(a, c)))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: u32) -> Result<SparsePoly> {
        self.ring.check_degree(self.total_degree() + m.total_degree())?;
        let p = self.ring.p;
        let c = c % p.get();
        if c == 0 || self.is_zero() {
            return Ok(Self::zero(&self.ring));
        }
        Ok(SparsePoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(t, &a)| (t.mul(m), p.mul(a, c))).collect(),
        })
    }

    pub fn mul(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.check_ring(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.ring));
        }
        self.ring
            .check_degree(self.total_degree() + other.total_degree())?;
        let p = self.ring.p;
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Self::zero(&self.ring);
        for (ma, &ca) in &small.terms {
            for (mb, &cb) in &large.terms {
                out.add_term(ma.mul(mb), p.mul(ca, cb));
            }
        }
        Ok(out)
    }

    /// `f^k`, splitting `k` into base-p digits so that every `p^l` factor is
    /// a Frobenius power.
    pub fn pow(&self, k: u64) -> Result<SparsePoly> {
        if k == 0 {
            return Ok(Self::one(&self.ring));
        }
        if self.is_zero() {
            return Ok(Self::zero(&self.ring));
        }
        let deg = (self.total_degree() as u128) * (k as u128);
        self.ring.check_degree(deg.min(u64::MAX as u128) as u64)?;
        let p = self.ring.p.as_u64();
        let mut acc = Self::one(&self.ring);
        let mut rest = k;
        let mut level = 0u32;
        while rest > 0 {
            let digit = rest % p;
            if digit > 0 {
                let part = self.pow_small(digit)?.frobenius_power(level)?;
                acc = acc.mul(&part)?;
            }
            rest /= p;
            level += 1;
        }
        Ok(acc)
    }

    /// Plain square-and-multiply.
    fn pow_small(&self, mut k: u64) -> Result<SparsePoly> {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ring);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `f^k` for an arbitrary-precision exponent.
    pub fn pow_big(&self, k: &BigUint) -> Result<SparsePoly> {
        match u64::try_from(k) {
            Ok(k) => self.pow(k),
            Err(_) if self.is_zero() => Ok(Self::zero(&self.ring)),
            Err(_) if self.is_constant() => {
                let c = self.coefficient(&Monomial::one(self.ring.arity()));
                // Fermat: c^k = c^(k mod (p-1)) with the exponent kept positive.
                let pm1 = BigUint::from(self.ring.p.get() - 1);
                let r = u64::try_from(&(k % &pm1)).expect("small residue") + (self.ring.p.get() as u64 - 1);
                Ok(Self::constant(&self.ring, self.ring.p.pow(c, r) as i64))
            }
            Err(_) => Err(Error::DegreeOverflow {
                degree: u64::MAX,
                limit: self.ring.limits.max_total_degree,
            }),
        }
    }

    /// `f^(p^e)`: every exponent vector is scaled by `p^e`; coefficients in
    /// `F_p` are fixed by Frobenius.
    pub fn frobenius_power(&self, e: u32) -> Result<SparsePoly> {
        if e == 0 || self.is_constant() {
            return Ok(self.clone());
        }
        let q = self.ring.p.pow_u64(e).ok_or(Error::DegreeOverflow {
            degree: u64::MAX,
            limit: self.ring.limits.max_total_degree,
        })?;
        let deg = (self.total_degree() as u128) * (q as u128);
        self.ring.check_degree(deg.min(u64::MAX as u128) as u64)?;
        let q = q as u32;
        Ok(SparsePoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (Monomial(m.0.iter().map(|&a| a * q).collect()), c))
                .collect(),
        })
    }

    /// Writes `f = sum_alpha g_alpha^(p^e) x^alpha` with every exponent of
    /// `alpha` below `p^e`, returning the nonzero `g_alpha` keyed by `alpha`.
    pub fn decompose_over_pe(&self, e: u32) -> BTreeMap<Monomial, SparsePoly> {
        let mut buckets: BTreeMap<Monomial, SparsePoly> = BTreeMap::new();
        let q = self.ring.p.pow_u64(e).filter(|&q| q <= u32::MAX as u64);
        for (m, &c) in &self.terms {
            let (alpha, root) = match q {
                Some(q) => {
                    let q = q as u32;
                    let alpha = Monomial(m.0.iter().map(|&a| a % q).collect());
                    let root = Monomial(m.0.iter().map(|&a| a / q).collect());
                    (alpha, root)
                }
                // p^e exceeds every representable exponent.
                None => (m.clone(), Monomial::one(self.ring.arity())),
            };
            buckets
                .entry(alpha)
                .or_insert_with(|| SparsePoly::zero(&self.ring))
                .add_term(root, c);
        }
        buckets.retain(|_, g| !g.is_zero());
        buckets
    }

    /// Terms in descending grevlex order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, u32)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by(|a, b| grevlex_cmp(b.0, a.0));
        v
    }

    /// Makes the grevlex-leading coefficient 1.
    pub fn monic(&self) -> SparsePoly {
        match self.sorted_terms().first() {
            Some(&(_, c)) => self.scale(self.ring.p.inv(c)),
            None => self.clone(),
        }
    }

    /// Evaluates the polynomial after substituting each variable by a
    /// polynomial of the same ring.
    pub fn substitute(&self, images: &[SparsePoly]) -> Result<SparsePoly> {
        let mut out = Self::zero(&self.ring);
        for (m, &c) in &self.terms {
            let mut term = Self::constant(&self.ring, c as i64);
            for (k, &a) in m.0.iter().enumerate() {
                if a > 0 {
                    term = term.mul(&images[k].pow(a as u64)?)?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let mut factors = Vec::new();
            for (i, &a) in m.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(self.ring.vars[i].clone()),
                    _ => factors.push(format!("{}^{}", self.ring.vars[i], a)),
                }
            }
            if factors.is_empty() {
                write!(f, "{c}")?;
            } else if c == 1 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", c, factors.join("*"))?;
            }
        }
        Ok(())
    }
}
