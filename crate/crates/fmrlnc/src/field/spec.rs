//! Exact arithmetic over F_q for prime q and binary extensions GF(2^m), m <= 16.
//!
//! Binary-extension multiplication goes through log/antilog tables built once
//! at construction, so the per-symbol cost on the coding hot path is a pair of
//! lookups. Elements are always canonical integers in `[0, q)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported prime modulus.
pub const MAX_PRIME: u64 = 1 << 31;
/// Largest supported binary-extension degree.
pub const MAX_BINARY_DEGREE: u32 = 16;

/// Default reduction polynomials (bitmask form, degree = index) for
/// GF(2^m), m = 1..=16. All are irreducible with x primitive.
const DEFAULT_REDUCTION: [u64; 17] = [
    0,       // unused
    0x3,     // x + 1
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25, 0x43, 0x83, 0x11D, // m = 5..8 (0x11D for GF(256))
    0x211, 0x409, 0x805, 0x1053, // m = 9..12
    0x201B, 0x402B, 0x8003, 0x1002D, // m = 13..16
];

/// A single element of F_q, canonical in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(pub u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Prime,
    BinaryExtension,
}

/// Log/antilog tables for a binary extension field.
#[derive(Debug)]
struct LogTables {
    /// `log[a]` for a in 1..q; index 0 unused.
    log: Vec<u32>,
    /// `exp[i] = g^i`, doubled so `exp[log a + log b]` needs no wraparound.
    exp: Vec<u32>,
}

/// The arithmetic domain: field order, representation, and (for binary
/// extensions) the reduction polynomial and multiplication tables.
#[derive(Clone)]
pub struct FieldSpec {
    kind: FieldKind,
    q: u64,
    /// Reduction polynomial bitmask; 0 for prime fields.
    reduction: u64,
    /// Extension degree m (binary kind only).
    degree: u32,
    tables: Option<Arc<LogTables>>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Prime => write!(f, "GF({})", self.q),
            FieldKind::BinaryExtension => {
                write!(f, "GF(2^{}, reduction={:#x})", self.degree, self.reduction)
            }
        }
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.q == other.q && self.reduction == other.reduction
    }
}
impl Eq for FieldSpec {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn poly_degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Carry-less polynomial multiplication over GF(2).
fn poly_mul(a: u64, b: u64) -> u64 {
    let mut out = 0u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 != 0 {
            out ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    out
}

/// Remainder of polynomial division over GF(2).
fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = poly_degree(m);
    while poly_degree(a) >= dm && a != 0 {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

/// Irreducibility by trial division against every polynomial of degree
/// 1..=m/2. Fine for m <= 16.
fn poly_irreducible(p: u64) -> bool {
    let deg = poly_degree(p);
    if deg < 1 {
        return false;
    }
    for d in 1..=(deg / 2) {
        for tail in 0..(1u64 << d) {
            let divisor = (1u64 << d) | tail;
            if poly_rem(p, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// Prime field GF(p).
    pub fn prime(p: u64) -> Result<FieldSpec> {
        if p > MAX_PRIME {
            return Err(Error::validation(format!(
                "prime modulus {p} exceeds the supported maximum {MAX_PRIME}"
            )));
        }
        if !is_prime(p) {
            return Err(Error::validation(format!("{p} is not prime")));
        }
        Ok(FieldSpec {
            kind: FieldKind::Prime,
            q: p,
            reduction: 0,
            degree: 0,
            tables: None,
        })
    }

    /// Binary extension GF(2^m) with the default reduction polynomial.
    pub fn binary(m: u32) -> Result<FieldSpec> {
        if m == 0 || m > MAX_BINARY_DEGREE {
            return Err(Error::validation(format!(
                "extension degree must be in 1..={MAX_BINARY_DEGREE}, got {m}"
            )));
        }
        Self::binary_with_reduction(m, DEFAULT_REDUCTION[m as usize])
    }

    /// Binary extension GF(2^m) with an explicit reduction polynomial
    /// (bitmask, degree m, irreducible).
    pub fn binary_with_reduction(m: u32, reduction: u64) -> Result<FieldSpec> {
        if m == 0 || m > MAX_BINARY_DEGREE {
            return Err(Error::validation(format!(
                "extension degree must be in 1..={MAX_BINARY_DEGREE}, got {m}"
            )));
        }
        if poly_degree(reduction) != m as i32 {
            return Err(Error::validation(format!(
                "reduction polynomial {reduction:#x} does not have degree {m}"
            )));
        }
        if !poly_irreducible(reduction) {
            return Err(Error::validation(format!(
                "reduction polynomial {reduction:#x} is reducible"
            )));
        }
        let q = 1u64 << m;
        let tables = build_tables(q, reduction)?;
        Ok(FieldSpec {
            kind: FieldKind::BinaryExtension,
            q,
            reduction,
            degree: m,
            tables: Some(Arc::new(tables)),
        })
    }

    /// Parse a field order: powers of two become binary extensions with the
    /// default reduction, primes become prime fields.
    pub fn for_order(q: u64) -> Result<FieldSpec> {
        if q < 2 {
            return Err(Error::validation(format!("field order must be >= 2, got {q}")));
        }
        if q == 2 {
            return FieldSpec::prime(2);
        }
        if q.is_power_of_two() {
            return FieldSpec::binary(q.trailing_zeros());
        }
        FieldSpec::prime(q)
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn reduction(&self) -> u64 {
        self.reduction
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    /// Validated constructor for a canonical element.
    pub fn element(&self, value: u64) -> Result<FieldElement> {
        if value >= self.q {
            return Err(Error::validation(format!(
                "element {value} not canonical in [0, {})",
                self.q
            )));
        }
        Ok(FieldElement(value))
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 < self.q
    }

    /// All q elements in canonical order (for exhaustive tests; q must be small).
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::Prime => {
                let s = a.0 + b.0;
                FieldElement(if s >= self.q { s - self.q } else { s })
            }
            FieldKind::BinaryExtension => FieldElement(a.0 ^ b.0),
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::Prime => {
                FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.q - b.0 })
            }
            FieldKind::BinaryExtension => FieldElement(a.0 ^ b.0),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.sub(FieldElement(0), a)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::Prime => FieldElement(a.0 * b.0 % self.q),
            FieldKind::BinaryExtension => {
                if a.0 == 0 || b.0 == 0 {
                    return FieldElement(0);
                }
                let t = self.tables.as_ref().expect("binary field has tables");
                let idx = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
                FieldElement(t.exp[idx] as u64)
            }
        }
    }

    /// Multiplicative inverse; inverting zero is a domain error.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::domain("multiplicative inverse of zero".to_string()));
        }
        if !self.contains(a) {
            return Err(Error::validation(format!(
                "element {} not canonical in [0, {})",
                a.0, self.q
            )));
        }
        match self.kind {
            FieldKind::Prime => Ok(FieldElement(mod_inverse(a.0, self.q))),
            FieldKind::BinaryExtension => {
                let t = self.tables.as_ref().expect("binary field has tables");
                let la = t.log[a.0 as usize] as usize;
                Ok(FieldElement(t.exp[(self.q as usize - 1) - la] as u64))
            }
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Uniform sample over all q elements, including zero.
    #[inline]
    pub fn sample_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(0..self.q))
    }

    /// Uniform sample over the q-1 nonzero elements.
    pub fn sample_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(1..self.q))
    }

    /// Slow reference product: modular for primes, carry-less multiply plus
    /// reduction for binary extensions. Used by table construction and kept
    /// public so tests can cross-check the table path against it.
    pub fn mul_slow(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match self.kind {
            FieldKind::Prime => FieldElement(a.0 * b.0 % self.q),
            FieldKind::BinaryExtension => {
                FieldElement(poly_rem(poly_mul(a.0, b.0), self.reduction))
            }
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on signed accumulators
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    debug_assert_eq!(old_r, 1, "inverse requires gcd 1");
    (old_s.rem_euclid(p as i128)) as u64
}

/// Build log/antilog tables from a primitive element. The default reduction
/// polynomials all have x primitive, but user-supplied irreducible polynomials
/// may not, so candidates are scanned until one with full multiplicative order
/// is found.
fn build_tables(q: u64, reduction: u64) -> Result<LogTables> {
    let order = (q - 1) as usize;
    if q == 2 {
        // GF(2^1): the multiplicative group is trivial
        return Ok(LogTables { log: vec![0, 0], exp: vec![1, 1] });
    }
    'candidate: for g in 2..q {
        let mut log = vec![0u32; q as usize];
        let mut exp = vec![0u32; 2 * order];
        let mut x = 1u64;
        for (i, slot) in exp.iter_mut().enumerate().take(order) {
            if x == 1 && i > 0 {
                continue 'candidate; // order of g divides i < q-1: not primitive
            }
            *slot = x as u32;
            log[x as usize] = i as u32;
            x = poly_rem(poly_mul(x, g), reduction);
        }
        if x != 1 {
            continue; // should not happen for irreducible reduction
        }
        let (lo, hi) = exp.split_at_mut(order);
        hi.copy_from_slice(lo);
        return Ok(LogTables { log, exp });
    }
    Err(Error::configuration(format!(
        "no primitive element found for reduction {reduction:#x}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u64) -> FieldSpec {
        FieldSpec::for_order(q).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(FieldSpec::prime(6).is_err());
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime((1 << 31) + 11).is_err());
        assert!(FieldSpec::binary(0).is_err());
        assert!(FieldSpec::binary(17).is_err());
        // x^4 + 1 = (x+1)^4 over GF(2): reducible
        assert!(FieldSpec::binary_with_reduction(4, 0b10001).is_err());
        // wrong degree
        assert!(FieldSpec::binary_with_reduction(4, 0b1011).is_err());
        assert!(FieldSpec::for_order(1).is_err());
        assert!(FieldSpec::for_order(12).is_err());
        assert_eq!(gf(2).kind(), FieldKind::Prime);
        assert_eq!(gf(16).kind(), FieldKind::BinaryExtension);
        assert_eq!(gf(65536).order(), 65536);
        assert_eq!(gf(2147483647).order(), 2147483647); // Mersenne prime 2^31 - 1
    }

    #[test]
    fn default_reductions_are_irreducible() {
        for m in 1..=16 {
            assert!(
                poly_irreducible(DEFAULT_REDUCTION[m as usize]),
                "default reduction for m={m} must be irreducible"
            );
            FieldSpec::binary(m).unwrap();
        }
    }

    #[test]
    fn gf2_add_is_xor() {
        let f = gf(2);
        assert_eq!(f.add(FieldElement(1), FieldElement(1)), FieldElement(0));
        assert_eq!(f.add(FieldElement(1), FieldElement(0)), FieldElement(1));
    }

    #[test]
    fn gf5_mul() {
        let f = gf(5);
        assert_eq!(f.mul(FieldElement(3), FieldElement(4)), FieldElement(2));
    }

    /// Frozen from the repeated-shift-and-add product oracle: in GF(16) with
    /// reduction x^4+x+1, x^3 * x = x^4 = x + 1 = 0x3.
    #[test]
    fn gf16_mul_against_slow_oracle() {
        let f = gf(16);
        assert_eq!(f.reduction(), 0b10011);
        assert_eq!(f.mul(FieldElement(0x8), FieldElement(0x2)), FieldElement(0x3));
        // full 16x16 table must agree with the carry-less oracle
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b), f.mul_slow(a, b), "{a} * {b}");
            }
        }
    }

    #[test]
    fn table_path_matches_slow_path_in_gf256_and_gf65536() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in [FieldSpec::binary(8).unwrap(), FieldSpec::binary(16).unwrap()] {
            for _ in 0..20_000 {
                let a = f.sample_element(&mut rng);
                let b = f.sample_element(&mut rng);
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
            }
        }
    }

    fn check_axioms_exhaustive(f: &FieldSpec) {
        let els: Vec<_> = f.elements().collect();
        for &a in &els {
            assert_eq!(f.add(a, f.zero()), a);
            assert_eq!(f.mul(a, f.one()), a);
            assert_eq!(f.add(a, f.neg(a)), f.zero());
            for &b in &els {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for &c in &els {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(
                        f.mul(a, f.add(b, c)),
                        f.add(f.mul(a, b), f.mul(a, c)),
                        "distributivity in {f:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [2u64, 3, 4, 5, 7, 8, 16, 31, 32, 61, 64] {
            check_axioms_exhaustive(&gf(q));
        }
    }

    #[test]
    fn field_axioms_random_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in [gf(65536), gf(65521), gf(2147483647)] {
            for _ in 0..10_000 {
                let a = f.sample_element(&mut rng);
                let b = f.sample_element(&mut rng);
                let c = f.sample_element(&mut rng);
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.sub(f.add(a, b), b), a);
            }
        }
    }

    #[test]
    fn inverses_exhaustive_up_to_256() {
        for q in [2u64, 3, 5, 16, 64, 128, 251, 256] {
            let f = gf(q);
            assert!(f.inv(f.zero()).is_err());
            for a in f.elements().skip(1) {
                let ai = f.inv(a).unwrap();
                assert_eq!(f.mul(a, ai), f.one(), "a * inv(a) in {f:?}");
                assert_eq!(f.div(f.one(), a).unwrap(), ai);
            }
        }
    }

    #[test]
    fn non_canonical_input_rejected() {
        let f = gf(5);
        assert!(f.element(5).is_err());
        assert!(f.element(4).is_ok());
        assert!(f.inv(FieldElement(9)).is_err());
    }

    #[test]
    fn sampling_is_uniform_and_deterministic() {
        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let ones: u64 = (0..n).map(|_| f.sample_element(&mut rng).value()).sum();
        let freq = ones as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq), "GF(2) frequency of 1 was {freq}");

        // determinism: same seed, same stream
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let f16 = gf(16);
        for _ in 0..1000 {
            assert_eq!(f16.sample_element(&mut r1), f16.sample_element(&mut r2));
        }
    }

    #[test]
    fn sampling_covers_all_values() {
        // coupon-collector style check: all q values in 50*q draws
        for q in [2u64, 3, 16, 64] {
            let f = gf(q);
            let mut rng = ChaCha8Rng::seed_from_u64(q);
            let mut seen = vec![false; q as usize];
            for _ in 0..(50 * q) {
                seen[f.sample_element(&mut rng).value() as usize] = true;
            }
            assert!(seen.iter().all(|&s| s), "not all of GF({q}) drawn");
        }
    }
}
