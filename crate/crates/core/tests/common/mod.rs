//! Shared fixtures and strategies for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;

use bsf_core::arith::Prime;
use bsf_core::cartier::{check_f_pure, check_f_regular, CartierModuleSpec};
use bsf_core::groebner::Ideal;
use bsf_core::poly::{Monomial, Ring, SparsePoly};

pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

pub fn ring(p: u64, nvars: usize) -> Arc<Ring> {
    Ring::new(prime(p), &VARS[..nvars]).unwrap()
}

pub fn poly(s: &str, r: &Arc<Ring>) -> SparsePoly {
    SparsePoly::parse(s, r).unwrap()
}

/// `R` with `g = 1`, purity and regularity checked.
pub fn checked_spec(r: &Arc<Ring>) -> CartierModuleSpec {
    let mut spec = CartierModuleSpec::standard(r);
    assert!(check_f_pure(&mut spec));
    let (status, _) = check_f_regular(&spec, 2);
    spec.set_f_regular_status(status);
    spec
}

/// Raw terms: exponent vectors and coefficients, reduced mod `p` on use.
pub type RawPoly = Vec<(Vec<u32>, u32)>;

pub fn raw_poly(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = RawPoly> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_deg, nvars), 1u32..1000),
        1..=max_terms,
    )
}

pub fn build(r: &Arc<Ring>, raw: &RawPoly) -> SparsePoly {
    SparsePoly::from_terms(r, raw.iter().map(|(e, c)| (Monomial::from_exponents(e), *c)))
}

pub fn build_ideal(r: &Arc<Ring>, raws: &[RawPoly]) -> Ideal {
    Ideal::new(r, raws.iter().map(|raw| build(r, raw)).collect())
}

pub fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

/// Hypersurfaces in two variables whose jumping numbers resolve quickly.
pub const POOL: [&str; 9] = [
    "x",
    "x^2",
    "x^3",
    "x*y",
    "x^2*y",
    "x^2+y^3",
    "x^2+y^2",
    "x^2*y+x*y^2",
    "x^2+x*y^3",
];
