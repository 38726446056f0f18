//! Sampled direction sets for projection instrumentation.
//!
//! The analysis tracks knowledge of every direction in F_q^k; the harness
//! tracks the k unit vectors plus a uniform sample of further nonzero
//! directions.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, FieldVector};

/// Number of nonzero directions in F_q^k, saturating at u64::MAX.
fn nonzero_direction_count(q: u64, k: usize) -> u64 {
    let mut total: u128 = 1;
    for _ in 0..k {
        total = total.saturating_mul(q as u128);
        if total > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    (total - 1) as u64
}

/// The k unit vectors plus `count - k` further distinct uniform nonzero
/// directions, in a deterministic order for a fixed seed.
pub fn sample_directions<R: Rng + ?Sized>(
    k: usize,
    spec: &FieldSpec,
    count: usize,
    rng: &mut R,
) -> Result<Vec<FieldVector>> {
    if count < 1 {
        return Err(Error::validation("direction count must be >= 1".to_string()));
    }
    if count < k {
        return Err(Error::validation(format!(
            "direction count {count} cannot cover the {k} unit vectors"
        )));
    }
    let available = nonzero_direction_count(spec.order(), k);
    if count as u64 > available {
        return Err(Error::validation(format!(
            "requested {count} distinct directions but F_{}^{k} has only {available} nonzero vectors",
            spec.order()
        )));
    }
    let mut dirs: Vec<FieldVector> = (0..k).map(|i| FieldVector::unit(k, i)).collect();
    while dirs.len() < count {
        let v = FieldVector::random(k, spec, rng);
        if !v.is_zero() && !dirs.contains(&v) {
            dirs.push(v);
        }
    }
    Ok(dirs)
}
