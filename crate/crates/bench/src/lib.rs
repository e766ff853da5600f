//! Benchmark fixtures.

use std::sync::Arc;

use bsf_core::cartier::{check_f_pure, check_f_regular};
use bsf_core::{CartierModuleSpec, Prime, Ring, SparsePoly};

pub fn ring(p: u64, vars: &[&str]) -> Arc<Ring> {
    Ring::new(Prime::new(p).expect("prime"), vars).expect("valid ring")
}

pub fn poly(text: &str, ring: &Arc<Ring>) -> SparsePoly {
    SparsePoly::parse(text, ring).expect("valid polynomial")
}

/// `R` with `g = 1`, purity and regularity checked, as the searches require.
pub fn checked_spec(ring: &Arc<Ring>) -> CartierModuleSpec {
    let mut spec = CartierModuleSpec::standard(ring);
    assert!(check_f_pure(&mut spec));
    let (status, _) = check_f_regular(&spec, 2);
    spec.set_f_regular_status(status);
    spec
}
