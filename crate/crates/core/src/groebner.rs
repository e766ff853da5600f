//! Buchberger's algorithm over `F_p` and the ideal-level decisions built on it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use smallvec::SmallVec;

use crate::arith::Prime;
use crate::error::{Error, Result};
use crate::poly::{same_ring, Monomial, Ring, SparsePoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderKind {
    Grevlex,
    Lex,
}

/// A monomial order together with the variable priority (`perm[0]` is the
/// largest variable).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonomialOrder {
    kind: OrderKind,
    perm: Vec<usize>,
}

type OrderKey = SmallVec<[i64; 6]>;

impl MonomialOrder {
    pub fn grevlex(arity: usize) -> Self {
        MonomialOrder {
            kind: OrderKind::Grevlex,
            perm: (0..arity).collect(),
        }
    }

    pub fn lex(arity: usize) -> Self {
        MonomialOrder {
            kind: OrderKind::Lex,
            perm: (0..arity).collect(),
        }
    }

    pub fn with_permutation(kind: OrderKind, perm: Vec<usize>) -> Result<Self> {
        let mut seen = perm.clone();
        seen.sort_unstable();
        if seen != (0..perm.len()).collect::<Vec<_>>() {
            return Err(Error::Invalid(format!("{perm:?} is not a permutation")));
        }
        Ok(MonomialOrder { kind, perm })
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// A vector whose lexicographic order is the monomial order.
    fn key(&self, m: &Monomial) -> OrderKey {
        let a = m.exponents();
        match self.kind {
            OrderKind::Grevlex => {
                let mut k = OrderKey::with_capacity(a.len() + 1);
                k.push(m.total_degree() as i64);
                k.extend(self.perm.iter().rev().map(|&i| -(a[i] as i64)));
                k
            }
            OrderKind::Lex => self.perm.iter().map(|&i| a[i] as i64).collect(),
        }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }

    /// Leading monomial and coefficient.
    pub fn leading_term<'a>(&self, f: &'a SparsePoly) -> Option<(&'a Monomial, u32)> {
        f.terms().max_by(|x, y| self.cmp(x.0, y.0))
    }
}

/// Monomial tagged with its order key; sorts by the key.
#[derive(Clone, Debug)]
struct Keyed {
    key: OrderKey,
    mono: Monomial,
}

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Keyed {}
impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

/// Polynomial with terms in descending order.
#[derive(Clone, Debug)]
struct OrdPoly {
    terms: Vec<(Keyed, u32)>,
}

impl OrdPoly {
    fn from_poly(f: &SparsePoly, order: &MonomialOrder) -> Self {
        let mut terms: Vec<_> = f
            .terms()
            .map(|(m, c)| {
                (
                    Keyed {
                        key: order.key(m),
                        mono: m.clone(),
                    },
                    c,
                )
            })
            .collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        OrdPoly { terms }
    }

    fn to_poly(&self, ring: &Arc<Ring>) -> SparsePoly {
        SparsePoly::from_terms(ring, self.terms.iter().map(|(k, c)| (k.mono.clone(), *c)))
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0.mono
    }

    fn lc(&self) -> u32 {
        self.terms[0].1
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn monic(mut self, p: Prime) -> Self {
        if let Some(&(_, c)) = self.terms.first() {
            let inv = p.inv(c);
            for t in &mut self.terms {
                t.1 = p.mul(t.1, inv);
            }
        }
        self
    }
}

/// Working accumulator for reductions, keyed by order so the leading term
/// is the last entry.
struct Accum {
    map: BTreeMap<Keyed, u32>,
    p: Prime,
}

impl Accum {
    fn new(f: &OrdPoly, p: Prime) -> Self {
        Accum {
            map: f.terms.iter().cloned().collect(),
            p,
        }
    }

    /// Subtracts `c * mono * g`.
    fn sub_scaled(&mut self, g: &OrdPoly, c: u32, mono: &Monomial, order: &MonomialOrder) {
        let p = self.p;
        for (k, gc) in &g.terms {
            let m = k.mono.mul(mono);
            let key = Keyed {
                key: order.key(&m),
                mono: m,
            };
            let delta = p.neg(p.mul(c, *gc));
            match self.map.entry(key) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(delta);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let s = p.add(*o.get(), delta);
                    if s == 0 {
                        o.remove();
                    } else {
                        *o.get_mut() = s;
                    }
                }
            }
        }
    }
}

/// Fully reduces `f` modulo `basis`, returning the remainder.
fn reduce_ord(f: &OrdPoly, basis: &[OrdPoly], order: &MonomialOrder, p: Prime) -> OrdPoly {
    let mut acc = Accum::new(f, p);
    let mut rem = Vec::new();
    while let Some((k, c)) = acc.map.pop_last() {
        match basis.iter().find(|g| g.lm().divides(&k.mono)) {
            Some(g) => {
                let q = g.lm().quotient_of(&k.mono);
                let coeff = p.mul(c, p.inv(g.lc()));
                // The leading term cancels exactly; skip it.
                let tail = OrdPoly {
                    terms: g.terms[1..].to_vec(),
                };
                acc.sub_scaled(&tail, coeff, &q, order);
            }
            None => rem.push((k, c)),
        }
    }
    OrdPoly { terms: rem }
}

fn s_poly_ord(f: &OrdPoly, g: &OrdPoly, order: &MonomialOrder, p: Prime) -> OrdPoly {
    let l = f.lm().lcm(g.lm());
    let mf = f.lm().quotient_of(&l);
    let mg = g.lm().quotient_of(&l);
    let mut acc = Accum {
        map: BTreeMap::new(),
        p,
    };
    acc.sub_scaled(f, p.neg(p.inv(f.lc())), &mf, order);
    acc.sub_scaled(g, p.inv(g.lc()), &mg, order);
    let mut terms: Vec<_> = acc.map.into_iter().collect();
    terms.reverse();
    OrdPoly { terms }
}

fn check_degree(ring: &Ring, f: &OrdPoly) -> std::result::Result<(), GbFailure> {
    let degree = f.terms.iter().map(|t| t.0.mono.total_degree()).max().unwrap_or(0);
    let limit = ring.limits().max_total_degree;
    if degree > limit {
        Err(GbFailure::Degree { degree, limit })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum GbFailure {
    Budget(usize),
    Degree { degree: u64, limit: u64 },
}

impl From<GbFailure> for Error {
    fn from(f: GbFailure) -> Self {
        match f {
            GbFailure::Budget(budget) => Error::ResourceLimit { budget },
            GbFailure::Degree { degree, limit } => Error::DegreeOverflow { degree, limit },
        }
    }
}

/// Reduced Gröbner basis, sorted by descending leading monomial.
fn buchberger(
    gens: &[SparsePoly],
    ring: &Arc<Ring>,
    order: &MonomialOrder,
) -> std::result::Result<Vec<OrdPoly>, GbFailure> {
    let p = ring.prime();
    let budget = ring.limits().groebner_budget;
    let mut basis: Vec<OrdPoly> = gens
        .iter()
        .map(|g| OrdPoly::from_poly(g, order).monic(p))
        .filter(|g| !g.is_zero())
        .collect();
    if let Some(u) = basis.iter().find(|g| g.lm().is_one()) {
        return Ok(vec![u.clone()]);
    }
    // Pair queue ordered by (lcm degree, lcm order key, i, j).
    type PairKey = (u64, OrderKey, usize, usize);
    let mut queue: BTreeSet<PairKey> = BTreeSet::new();
    let mut live: BTreeSet<(usize, usize)> = BTreeSet::new();
    let push = |queue: &mut BTreeSet<PairKey>,
                live: &mut BTreeSet<(usize, usize)>,
                b: &[OrdPoly],
                i: usize,
                j: usize| {
        let l = b[i].lm().lcm(b[j].lm());
        queue.insert((l.total_degree(), order.key(&l), i, j));
        live.insert((i, j));
    };
    for j in 0..basis.len() {
        for i in 0..j {
            push(&mut queue, &mut live, &basis, i, j);
        }
    }
    let mut reductions = 0usize;
    while let Some((_, _, i, j)) = queue.pop_first() {
        live.remove(&(i, j));
        let (li, lj) = (basis[i].lm(), basis[j].lm());
        if li.is_coprime(lj) {
            continue;
        }
        let l = li.lcm(lj);
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].lm().divides(&l)
                && !live.contains(&(i.min(k), i.max(k)))
                && !live.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        reductions += 1;
        if reductions > budget {
            return Err(GbFailure::Budget(budget));
        }
        let s = s_poly_ord(&basis[i], &basis[j], order, p);
        let h = reduce_ord(&s, &basis, order, p);
        if h.is_zero() {
            continue;
        }
        check_degree(ring, &h)?;
        let h = h.monic(p);
        if h.lm().is_one() {
            return Ok(vec![h]);
        }
        basis.push(h);
        let t = basis.len() - 1;
        for k in 0..t {
            push(&mut queue, &mut live, &basis, k, t);
        }
    }
    // Minimalize.
    let mut minimal: Vec<OrdPoly> = Vec::new();
    for (k, g) in basis.iter().enumerate() {
        let redundant = basis
            .iter()
            .enumerate()
            .any(|(l, h)| l != k && h.lm().divides(g.lm()) && (h.lm() != g.lm() || l < k));
        if !redundant {
            minimal.push(g.clone());
        }
    }
    // Interreduce.
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<OrdPoly> = minimal
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != k)
            .map(|(_, g)| g.clone())
            .collect();
        let head = OrdPoly {
            terms: minimal[k].terms[..1].to_vec(),
        };
        let tail = OrdPoly {
            terms: minimal[k].terms[1..].to_vec(),
        };
        let mut r = reduce_ord(&tail, &others, order, p);
        let mut terms = head.terms;
        terms.append(&mut r.terms);
        reduced.push(OrdPoly { terms });
    }
    reduced.sort_by(|a, b| b.terms[0].0.cmp(&a.terms[0].0));
    Ok(reduced)
}

/// The S-polynomial of `f` and `g` under `order`.
pub fn s_polynomial(f: &SparsePoly, g: &SparsePoly, order: &MonomialOrder) -> SparsePoly {
    let p = f.prime();
    let (a, b) = (OrdPoly::from_poly(f, order), OrdPoly::from_poly(g, order));
    if a.is_zero() || b.is_zero() {
        return SparsePoly::zero(f.ring());
    }
    s_poly_ord(&a, &b, order, p).to_poly(f.ring())
}

/// Full multivariate division remainder of `f` by the polynomials `divisors`,
/// in list order.
pub fn reduce(f: &SparsePoly, divisors: &[SparsePoly], order: &MonomialOrder) -> SparsePoly {
    let ds: Vec<OrdPoly> = divisors
        .iter()
        .map(|g| OrdPoly::from_poly(g, order))
        .filter(|g| !g.is_zero())
        .collect();
    reduce_ord(&OrdPoly::from_poly(f, order), &ds, order, f.prime()).to_poly(f.ring())
}

#[derive(Debug)]
struct Basis {
    ord: Vec<OrdPoly>,
    polys: Vec<SparsePoly>,
}

/// A finitely generated ideal with a lazily computed reduced Gröbner basis.
pub struct Ideal {
    ring: Arc<Ring>,
    order: MonomialOrder,
    generators: Vec<SparsePoly>,
    basis: OnceLock<std::result::Result<Arc<Basis>, GbFailure>>,
}

impl Clone for Ideal {
    fn clone(&self) -> Self {
        Ideal {
            ring: self.ring.clone(),
            order: self.order.clone(),
            generators: self.generators.clone(),
            basis: self.basis.clone(),
        }
    }
}

impl fmt::Debug for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ideal{self}")
    }
}

impl fmt::Display for Ideal {
    /// Generators as given; use [`Ideal::display_reduced`] for a canonical form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_generators(f, &self.generators)
    }
}

fn write_generators(f: &mut impl fmt::Write, gens: &[SparsePoly]) -> fmt::Result {
    if gens.is_empty() {
        return write!(f, "(0)");
    }
    write!(f, "(")?;
    for (k, g) in gens.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{g}")?;
    }
    write!(f, ")")
}

impl Ideal {
    pub fn new(ring: &Arc<Ring>, generators: Vec<SparsePoly>) -> Self {
        Self::with_order(ring, generators, MonomialOrder::grevlex(ring.arity()))
    }

    pub fn with_order(ring: &Arc<Ring>, generators: Vec<SparsePoly>, order: MonomialOrder) -> Self {
        let mut generators: Vec<SparsePoly> = generators.into_iter().filter(|g| !g.is_zero()).collect();
        generators.dedup();
        Ideal {
            ring: ring.clone(),
            order,
            generators,
            basis: OnceLock::new(),
        }
    }

    pub fn principal(f: SparsePoly) -> Self {
        let ring = f.ring().clone();
        Self::new(&ring, vec![f])
    }

    pub fn unit(ring: &Arc<Ring>) -> Self {
        Self::new(ring, vec![SparsePoly::one(ring)])
    }

    pub fn zero(ring: &Arc<Ring>) -> Self {
        Self::new(ring, Vec::new())
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn generators(&self) -> &[SparsePoly] {
        &self.generators
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.generators.is_empty()
    }

    fn basis(&self) -> Result<&Arc<Basis>> {
        let b = self.basis.get_or_init(|| {
            buchberger(&self.generators, &self.ring, &self.order).map(|ord| {
                let polys = ord.iter().map(|g| g.to_poly(&self.ring)).collect();
                Arc::new(Basis { ord, polys })
            })
        });
        b.as_ref().map_err(|&e| e.into())
    }

    /// Reduced Gröbner basis sorted by descending leading monomial.
    pub fn groebner_basis(&self) -> Result<&[SparsePoly]> {
        Ok(&self.basis()?.polys)
    }

    fn reduced_ideal(&self) -> Result<Ideal> {
        let gens = self.groebner_basis()?.to_vec();
        let out = Ideal::with_order(&self.ring, gens, self.order.clone());
        let _ = out.basis.set(Ok(self.basis()?.clone()));
        Ok(out)
    }

    /// Canonical representative: the same ideal generated by its reduced basis.
    pub fn canonical(&self) -> Result<Ideal> {
        self.reduced_ideal()
    }

    pub fn display_reduced(&self) -> Result<String> {
        let mut s = String::new();
        write_generators(&mut s, self.groebner_basis()?).expect("string write");
        Ok(s)
    }

    pub fn normal_form(&self, f: &SparsePoly) -> Result<SparsePoly> {
        if !same_ring(&self.ring, f.ring()) {
            return Err(Error::RingMismatch);
        }
        let b = self.basis()?;
        let r = reduce_ord(
            &OrdPoly::from_poly(f, &self.order),
            &b.ord,
            &self.order,
            self.ring.prime(),
        );
        Ok(r.to_poly(&self.ring))
    }

    pub fn contains(&self, f: &SparsePoly) -> Result<bool> {
        if f.is_zero() {
            return Ok(true);
        }
        Ok(self.normal_form(f)?.is_zero())
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Ideal) -> Result<bool> {
        self.check_compatible(other)?;
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_compatible(&self, other: &Ideal) -> Result<()> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(Error::RingMismatch);
        }
        if self.order != other.order {
            return Err(Error::Invalid("ideals use different monomial orders".into()));
        }
        Ok(())
    }

    /// Equality as ideals, decided by comparing reduced bases.
    pub fn ideal_equal(&self, other: &Ideal) -> Result<bool> {
        self.check_compatible(other)?;
        if self.generators == other.generators {
            return Ok(true);
        }
        Ok(self.groebner_basis()? == other.groebner_basis()?)
    }

    pub fn is_unit_ideal(&self) -> Result<bool> {
        if self.generators.iter().any(SparsePoly::is_unit) {
            return Ok(true);
        }
        if self.generators.is_empty() {
            return Ok(false);
        }
        let b = self.groebner_basis()?;
        Ok(b.len() == 1 && b[0].is_unit())
    }

    pub fn sum(&self, other: &Ideal) -> Result<Ideal> {
        self.check_compatible(other)?;
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Ok(Ideal::with_order(&self.ring, gens, self.order.clone()))
    }

    pub fn product(&self, other: &Ideal) -> Result<Ideal> {
        self.check_compatible(other)?;
        let mut gens = Vec::with_capacity(self.generators.len() * other.generators.len());
        for a in &self.generators {
            for b in &other.generators {
                gens.push(a.mul(b)?);
            }
        }
        Ok(Ideal::with_order(&self.ring, gens, self.order.clone()))
    }

    /// `f · I`.
    pub fn scale(&self, f: &SparsePoly) -> Result<Ideal> {
        let gens = self
            .generators
            .iter()
            .map(|g| g.mul(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ideal::with_order(&self.ring, gens, self.order.clone()))
    }
}

/// Free-function forms of the ideal decisions.
pub fn groebner_basis(ideal: &Ideal) -> Result<Vec<SparsePoly>> {
    ideal.groebner_basis().map(<[SparsePoly]>::to_vec)
}

pub fn normal_form(f: &SparsePoly, ideal: &Ideal) -> Result<SparsePoly> {
    ideal.normal_form(f)
}

pub fn ideal_equal(a: &Ideal, b: &Ideal) -> Result<bool> {
    a.ideal_equal(b)
}

pub fn is_unit_ideal(ideal: &Ideal) -> Result<bool> {
    ideal.is_unit_ideal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Limits;

    fn ring(p: u64, vars: &[&str]) -> Arc<Ring> {
        Ring::new(Prime::new(p).unwrap(), vars).unwrap()
    }

    fn ideal(r: &Arc<Ring>, gens: &[&str]) -> Ideal {
        Ideal::new(r, gens.iter().map(|g| SparsePoly::parse(g, r).unwrap()).collect())
    }

    fn strs(b: &[SparsePoly]) -> Vec<String> {
        b.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn basis_examples() {
        let r = ring(2, &["x", "y"]);
        assert_eq!(strs(ideal(&r, &["x", "y"]).groebner_basis().unwrap()), ["x", "y"]);
        assert_eq!(strs(ideal(&r, &["x^2", "x"]).groebner_basis().unwrap()), ["x"]);
        let r5 = ring(5, &["x", "y"]);
        assert_eq!(
            strs(ideal(&r5, &["x+y", "x-y"]).groebner_basis().unwrap()),
            ["x", "y"]
        );
    }

    #[test]
    fn normal_form_examples() {
        let r = ring(3, &["x", "y"]);
        let x = ideal(&r, &["x"]);
        assert!(x
            .normal_form(&SparsePoly::parse("x^2", &r).unwrap())
            .unwrap()
            .is_zero());
        assert_eq!(
            x.normal_form(&SparsePoly::parse("y", &r).unwrap())
                .unwrap()
                .to_string(),
            "y"
        );
        let i = ideal(&r, &["x-y"]);
        let nf = i.normal_form(&SparsePoly::parse("x^2+y", &r).unwrap()).unwrap();
        assert_eq!(nf, SparsePoly::parse("y^2+y", &r).unwrap());
    }

    #[test]
    fn equality_and_units() {
        let r = ring(2, &["x", "y"]);
        assert!(ideal(&r, &["x", "y"])
            .ideal_equal(&ideal(&r, &["x", "y"]))
            .unwrap());
        assert!(!ideal(&r, &["x"]).ideal_equal(&ideal(&r, &["x^2"])).unwrap());
        assert!(ideal(&r, &["x+y", "y"])
            .ideal_equal(&ideal(&r, &["x", "y"]))
            .unwrap());
        assert!(ideal(&r, &["x", "x+1"]).is_unit_ideal().unwrap());
        assert!(!ideal(&r, &["x"]).is_unit_ideal().unwrap());
        assert!(!ideal(&r, &["x^2+1"]).is_unit_ideal().unwrap());
        assert!(!Ideal::zero(&r).is_unit_ideal().unwrap());
    }

    #[test]
    fn lex_elimination() {
        let r = ring(7, &["x", "y"]);
        let gens = ["x^2+y", "x*y-1"]
            .iter()
            .map(|g| SparsePoly::parse(g, &r).unwrap())
            .collect();
        let i = Ideal::with_order(&r, gens, MonomialOrder::lex(2));
        let b = i.groebner_basis().unwrap();
        // The smallest element under lex lies in F_7[y]: y^3 + 1.
        assert_eq!(b[b.len() - 1], SparsePoly::parse("y^3+1", &r).unwrap());
    }

    #[test]
    fn budget_is_reported() {
        let limits = Limits {
            groebner_budget: 0,
            ..Limits::default()
        };
        let r = Ring::with_limits(Prime::new(3).unwrap(), &["x", "y"], limits).unwrap();
        let i = ideal(&r, &["x^2+y", "x*y+1"]);
        assert!(matches!(
            i.groebner_basis(),
            Err(Error::ResourceLimit { budget: 0 })
        ));
    }

    #[test]
    fn permutation_validated() {
        assert!(MonomialOrder::with_permutation(OrderKind::Lex, vec![0, 0]).is_err());
        let o = MonomialOrder::with_permutation(OrderKind::Lex, vec![1, 0]).unwrap();
        let y = Monomial::from_exponents(&[0, 1]);
        let x2 = Monomial::from_exponents(&[2, 0]);
        assert_eq!(o.cmp(&y, &x2), Ordering::Greater);
    }
}
