//! Prime-field arithmetic, Lucas binomials, base-p digit combinatorics and
//! exact rationals.
//!
//! Digit vectors follow one convention everywhere: `(i_1, ..., i_e)` with
//! `i_1` least significant, so `m = i_1 + i_2 p + ... + i_e p^(e-1)`. The
//! truncated expansion of a rational returns `(c_1, ..., c_e)` where `c_1` is
//! the first digit after the radix point; read as an integer that is the
//! *reversed* vector.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A verified prime `p < 2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..1 << 31).contains(&p) || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_u64(self) -> u64 {
        self.0 as u64
    }

    pub fn big(self) -> BigUint {
        BigUint::from(self.0)
    }

    /// `p^e` as an arbitrary-precision integer.
    pub fn pow_big(self, e: u32) -> BigUint {
        Pow::pow(self.big(), e)
    }

    /// `p^e` when it fits in a `u64`.
    pub fn pow_u64(self, e: u32) -> Option<u64> {
        self.as_u64().checked_pow(e)
    }

    /// Reduces an integer to its canonical representative in `0..p`.
    pub fn reduce_i64(self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    pub fn reduce_big(self, v: &BigUint) -> u32 {
        (v % self.big()).to_u32().expect("residue below p")
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        (s % self.0 as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        self.add(a, self.0 - b % self.0)
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, mut a: u32, mut k: u64) -> u32 {
        let mut acc = 1u32 % self.0;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.0), "inverse of zero in F_{}", self.0);
        self.pow(a, self.0 as u64 - 2)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `C(n, m) mod p` via Lucas' theorem. `C(n, m) = 0` for `m > n`.
pub fn binom_mod_p(mut n: u64, mut m: u64, p: Prime) -> u32 {
    let pp = p.as_u64();
    let mut acc = 1u32;
    while m > 0 || n > 0 {
        let (a, b) = (n % pp, m % pp);
        if b > a {
            return 0;
        }
        acc = p.mul(acc, small_binom(a as u32, b as u32, p));
        if acc == 0 {
            return 0;
        }
        n /= pp;
        m /= pp;
    }
    acc
}

/// `C(a, b) mod p` for `b <= a < p`.
fn small_binom(a: u32, b: u32, p: Prime) -> u32 {
    let b = b.min(a - b);
    let mut num = 1u32;
    let mut den = 1u32;
    for k in 0..b {
        num = p.mul(num, a - k);
        den = p.mul(den, k + 1);
    }
    p.mul(num, p.inv(den))
}

/// A non-negative number `a / p^s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicRational {
    numerator: BigUint,
    exponent: u32,
    p: Prime,
}

impl PAdicRational {
    pub fn new(numerator: impl Into<BigUint>, exponent: u32, p: Prime) -> Self {
        let mut numerator = numerator.into();
        let mut exponent = exponent;
        let pb = p.big();
        while exponent > 0 && !numerator.is_zero() && (&numerator % &pb).is_zero() {
            numerator /= &pb;
            exponent -= 1;
        }
        if numerator.is_zero() {
            exponent = 0;
        }
        PAdicRational {
            numerator,
            exponent,
            p,
        }
    }

    pub fn zero(p: Prime) -> Self {
        Self::new(0u32, 0, p)
    }

    pub fn integer(n: u64, p: Prime) -> Self {
        Self::new(n, 0, p)
    }

    /// Interprets a rational as `a / p^s`, failing for other denominators or
    /// negative values.
    pub fn from_rational(r: &Rational, p: Prime) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::NotPAdic(r.to_string()));
        }
        let mut den = r.denom_big();
        let pb = p.big();
        let mut s = 0u32;
        while !den.is_one() {
            let (q, rem) = den.div_rem(&pb);
            if !rem.is_zero() {
                return Err(Error::NotPAdic(r.to_string()));
            }
            den = q;
            s += 1;
        }
        Ok(Self::new(r.numer_big(), s, p))
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_big(
            BigInt::from(self.numerator.clone()),
            BigInt::from(self.p.pow_big(self.exponent)),
        )
    }

    pub fn add(&self, other: &PAdicRational) -> PAdicRational {
        let s = self.exponent.max(other.exponent);
        let a = &self.numerator * self.p.pow_big(s - self.exponent)
            + &other.numerator * self.p.pow_big(s - other.exponent);
        PAdicRational::new(a, s, self.p)
    }

    /// `self - other`, or `None` when negative.
    pub fn checked_sub(&self, other: &PAdicRational) -> Option<PAdicRational> {
        let s = self.exponent.max(other.exponent);
        let a = &self.numerator * self.p.pow_big(s - self.exponent);
        let b = &other.numerator * self.p.pow_big(s - other.exponent);
        (a >= b).then(|| PAdicRational::new(a - b, s, self.p))
    }
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_rational().fmt(f)
    }
}

impl PartialOrd for PAdicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PAdicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_rational().cmp(&other.to_rational())
    }
}

/// `ceil(t * p^e)`, computed exactly.
pub fn ceil_scale(t: &PAdicRational, e: u32) -> BigUint {
    let p = t.prime();
    if e >= t.exponent {
        &t.numerator * p.pow_big(e - t.exponent)
    } else {
        Integer::div_ceil(&t.numerator, &p.pow_big(t.exponent - e))
    }
}

/// `ceil(t * p^e)` for an arbitrary non-negative rational.
pub fn ceil_scale_rational(t: &Rational, e: u32, p: Prime) -> BigUint {
    let num = t.numer_big() * p.pow_big(e);
    Integer::div_ceil(&num, &t.denom_big())
}

/// An exact rational in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        Rational(BigRational::new(num, den))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    fn numer_big(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    fn denom_big(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    /// `m / p^e`.
    pub fn scaled(m: u64, p: Prime, e: u32) -> Self {
        Rational(BigRational::new(BigInt::from(m), BigInt::from(p.pow_big(e))))
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl std::ops::Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl std::ops::Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// Canonical `num/den`, or just `num` for integers.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `a` or `a/b` with integers `a`, `b` (b nonzero).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("`{s}` is not a rational of the form a/b"));
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}

/// A vector of base-p digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitVector {
    digits: Vec<u32>,
    p: Prime,
}

impl DigitVector {
    pub fn new(digits: Vec<u32>, p: Prime) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Range {
                value: "[]".into(),
                reason: "digit vectors have length at least 1".into(),
            });
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= p.get()) {
            return Err(Error::Range {
                value: d.to_string(),
                reason: format!("digits must lie in 0..{}", p),
            });
        }
        Ok(DigitVector { digits, p })
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// `i_1 + i_2 p + ... + i_e p^(e-1)`.
    pub fn to_int(&self) -> BigUint {
        digits_to_int(self)
    }

    /// The digitwise complement `i_l -> p - 1 - i_l`.
    pub fn complement(&self) -> DigitVector {
        DigitVector {
            digits: self.digits.iter().map(|&d| self.p.get() - 1 - d).collect(),
            p: self.p,
        }
    }

    pub fn reversed(&self) -> DigitVector {
        let mut digits = self.digits.clone();
        digits.reverse();
        DigitVector { digits, p: self.p }
    }
}

impl fmt::Display for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, d) in self.digits.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Base-p digits of `m` with `i_1` least significant. Requires `m < p^e`.
pub fn base_p_digits(m: &BigUint, p: Prime, e: u32) -> Result<DigitVector> {
    if e == 0 || *m >= p.pow_big(e) {
        return Err(Error::Range {
            value: m.to_string(),
            reason: format!("needs {m} < {p}^{e} with e >= 1"),
        });
    }
    let pb = p.big();
    let mut rest = m.clone();
    let mut digits = Vec::with_capacity(e as usize);
    for _ in 0..e {
        let (q, r) = rest.div_rem(&pb);
        digits.push(r.to_u32().expect("digit below p"));
        rest = q;
    }
    Ok(DigitVector { digits, p })
}

/// `u64` convenience wrapper around [`base_p_digits`].
pub fn base_p_digits_u64(m: u64, p: Prime, e: u32) -> Result<DigitVector> {
    base_p_digits(&BigUint::from(m), p, e)
}

pub fn digits_to_int(v: &DigitVector) -> BigUint {
    let pb = v.p.big();
    v.digits
        .iter()
        .rev()
        .fold(BigUint::zero(), |acc, &d| acc * &pb + BigUint::from(d))
}

/// The first `e` digits `(c_1, ..., c_e)` of the base-p expansion of
/// `lambda` in `(0, 1]` that has infinitely many nonzero digits.
///
/// Satisfies `sum c_i / p^i = (ceil(lambda p^e) - 1) / p^e`.
pub fn truncated_expansion(lambda: &Rational, e: u32, p: Prime) -> Result<DigitVector> {
    if lambda.0 <= BigRational::zero() || lambda.0 > BigRational::one() {
        return Err(Error::Domain(lambda.to_string()));
    }
    if e == 0 {
        return Err(Error::Range {
            value: "0".into(),
            reason: "expansion length must be at least 1".into(),
        });
    }
    let m = ceil_scale_rational(lambda, e, p) - BigUint::one();
    Ok(base_p_digits(&m, p, e)?.reversed())
}

/// Recovers the rational in `(0, 1]` whose expansion (with infinitely many
/// nonzero digits) starts with `digits`, given that those digits consist of
/// `preperiod` leading digits followed by a block of length `period` that
/// repeats for the rest of the sequence.
pub fn rational_from_periodic(digits: &DigitVector, preperiod: usize, period: usize) -> Result<Rational> {
    let d = digits.digits();
    if period == 0 || d.len() < preperiod + 2 * period {
        return Err(Error::InconsistentPeriod { preperiod, period });
    }
    for k in preperiod + period..d.len() {
        if d[k] != d[k - period] {
            return Err(Error::InconsistentPeriod { preperiod, period });
        }
    }
    let block = &d[preperiod..preperiod + period];
    if block.iter().all(|&b| b == 0) {
        return Err(Error::TerminatingExpansion);
    }
    let p = BigInt::from(digits.prime().get());
    let as_int = |ds: &[u32]| {
        ds.iter()
            .fold(BigInt::zero(), |acc, &x| acc * &p + BigInt::from(x))
    };
    let head = as_int(&d[..preperiod]);
    let rep = as_int(block);
    let cycle = Pow::pow(&p, period) - BigInt::one();
    // value = (head + rep / (p^P - 1)) / p^Q
    let num = head * &cycle + rep;
    let den = cycle * Pow::pow(&p, preperiod);
    Ok(Rational::from_big(num, den))
}

/// Preperiod and period of the expansion of `lambda` in `(0, 1]`, read off
/// the denominator: `den = p^k * d'` gives preperiod `k` and period the
/// multiplicative order of `p` modulo `d'`.
pub fn expansion_shape(lambda: &Rational, p: Prime) -> (usize, usize) {
    let mut den = lambda.denom_big();
    let pb = p.big();
    let mut k = 0;
    while (&den % &pb).is_zero() {
        den /= &pb;
        k += 1;
    }
    if den.is_one() {
        return (k, 1);
    }
    let mut order = 1;
    let mut acc = &pb % &den;
    while !acc.is_one() {
        acc = (acc * &pb) % &den;
        order += 1;
    }
    (k, order)
}
