//! Shared fixtures for the criterion benchmarks.

use num::bigint::BigInt;
use rigadic::laurent::{LaurentElement, RingTag};
use rigadic::weyl::OperatorElement;
use rigadic::{Config, DensePAdic, PAdicScalar, SparsePAdic};

pub fn config(p: u64) -> Config {
    Config::new(p, 256).unwrap()
}

pub fn half_p3() -> (Config, PAdicScalar) {
    let c = config(3);
    let lam = PAdicScalar::parse(&c, "rat:1/2").unwrap();
    (c, lam)
}

pub fn tower_p2() -> SparsePAdic {
    SparsePAdic::lebras(2, 4).unwrap()
}

/// Dense polynomial 1 + 2x + ... on the disk, degree `deg`.
pub fn poly(c: &Config, deg: i64) -> LaurentElement {
    let entries = (0..=deg)
        .map(|k| (k, DensePAdic::from_integer(c, BigInt::from(k % 7 + 1))))
        .collect();
    LaurentElement::from_coeffs(c, RingTag::Disk, entries).unwrap()
}

pub fn operator(c: &Config, order: u32, deg: i64) -> OperatorElement {
    let terms = (0..=order).map(|i| (i, poly(c, deg))).collect();
    OperatorElement::from_terms(c, terms).unwrap()
}
