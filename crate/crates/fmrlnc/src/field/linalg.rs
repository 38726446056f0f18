//! Vectors and matrices over F_q: dot products, axpy updates, rank and
//! solving by row elimination, plus an incremental echelon basis used by
//! decoders and innovative-packet filters.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::spec::{FieldElement, FieldSpec};

/// Fixed-length vector of canonical field elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    elems: Vec<FieldElement>,
}

impl FieldVector {
    pub fn new(elems: Vec<FieldElement>) -> FieldVector {
        FieldVector { elems }
    }

    pub fn zeros(len: usize) -> FieldVector {
        FieldVector { elems: vec![FieldElement::ZERO; len] }
    }

    /// i-th unit vector (0-based) of the given dimension.
    pub fn unit(len: usize, i: usize) -> FieldVector {
        let mut v = FieldVector::zeros(len);
        v.elems[i] = FieldElement::ONE;
        v
    }

    pub fn from_raw(values: &[u64]) -> FieldVector {
        FieldVector { elems: values.iter().map(|&v| FieldElement(v)).collect() }
    }

    pub fn to_raw(&self) -> Vec<u64> {
        self.elems.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn get(&self, i: usize) -> FieldElement {
        self.elems[i]
    }

    pub fn set(&mut self, i: usize, v: FieldElement) {
        self.elems[i] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.elems.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|e| e.is_zero())
    }

    /// Uniform random vector over F_q^len, zero coordinates included.
    pub fn random<R: Rng + ?Sized>(len: usize, spec: &FieldSpec, rng: &mut R) -> FieldVector {
        FieldVector { elems: (0..len).map(|_| spec.sample_element(rng)).collect() }
    }

    /// Dot product <a, b> in F_q.
    pub fn dot(&self, other: &FieldVector, spec: &FieldSpec) -> Result<FieldElement> {
        if self.len() != other.len() {
            return Err(Error::validation(format!(
                "dot product length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let mut acc = FieldElement::ZERO;
        for (a, b) in self.elems.iter().zip(other.elems.iter()) {
            acc = spec.add(acc, spec.mul(*a, *b));
        }
        Ok(acc)
    }

    /// In-place y += alpha * x.
    pub fn axpy(&mut self, alpha: FieldElement, x: &FieldVector, spec: &FieldSpec) -> Result<()> {
        if self.len() != x.len() {
            return Err(Error::validation(format!(
                "axpy length mismatch: {} vs {}",
                self.len(),
                x.len()
            )));
        }
        if alpha.is_zero() {
            return Ok(());
        }
        for (y, x) in self.elems.iter_mut().zip(x.elems.iter()) {
            *y = spec.add(*y, spec.mul(alpha, *x));
        }
        Ok(())
    }

    /// In-place scaling by alpha.
    pub fn scale(&mut self, alpha: FieldElement, spec: &FieldSpec) {
        for e in self.elems.iter_mut() {
            *e = spec.mul(alpha, *e);
        }
    }
}

/// Rectangular matrix, stored as rows of uniform length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: Vec<FieldVector>,
    cols: usize,
}

impl FieldMatrix {
    pub fn from_rows(rows: Vec<FieldVector>) -> Result<FieldMatrix> {
        let cols = rows.first().map_or(0, FieldVector::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::validation("matrix rows have unequal lengths".to_string()));
        }
        Ok(FieldMatrix { rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> FieldMatrix {
        FieldMatrix { rows: vec![FieldVector::zeros(cols); rows], cols }
    }

    pub fn identity(n: usize) -> FieldMatrix {
        let rows = (0..n).map(|i| FieldVector::unit(n, i)).collect();
        FieldMatrix { rows, cols: n }
    }

    pub fn from_raw(rows: &[&[u64]]) -> FieldMatrix {
        let rows: Vec<FieldVector> = rows.iter().map(|r| FieldVector::from_raw(r)).collect();
        FieldMatrix::from_rows(rows).expect("raw rows must be rectangular")
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &FieldVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[FieldVector] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.rows[i].set(j, v);
    }

    pub fn random<R: Rng + ?Sized>(
        rows: usize,
        cols: usize,
        spec: &FieldSpec,
        rng: &mut R,
    ) -> FieldMatrix {
        FieldMatrix {
            rows: (0..rows).map(|_| FieldVector::random(cols, spec, rng)).collect(),
            cols,
        }
    }

    /// Matrix product self * other.
    pub fn mat_mul(&self, other: &FieldMatrix, spec: &FieldSpec) -> Result<FieldMatrix> {
        if self.cols != other.n_rows() {
            return Err(Error::validation(format!(
                "matrix product shape mismatch: {}x{} * {}x{}",
                self.n_rows(),
                self.cols,
                other.n_rows(),
                other.n_cols()
            )));
        }
        let mut out = FieldMatrix::zeros(self.n_rows(), other.n_cols());
        for i in 0..self.n_rows() {
            for (kk, coef) in self.rows[i].iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for j in 0..other.n_cols() {
                    let add = spec.mul(coef, other.get(kk, j));
                    out.set(i, j, spec.add(out.get(i, j), add));
                }
            }
        }
        Ok(out)
    }

    /// Row vector * matrix, the packet-conservation product mu * M.
    pub fn left_mul_vec(&self, v: &FieldVector, spec: &FieldSpec) -> Result<FieldVector> {
        if v.len() != self.n_rows() {
            return Err(Error::validation(format!(
                "vector-matrix shape mismatch: len {} vs {} rows",
                v.len(),
                self.n_rows()
            )));
        }
        let mut out = FieldVector::zeros(self.cols);
        for (i, coef) in v.iter().enumerate() {
            out.axpy(coef, &self.rows[i], spec)?;
        }
        Ok(out)
    }

    /// Rank over F_q. The input is not mutated; elimination runs on a copy.
    /// Pivots are chosen by first nonzero column, ties broken by lowest row
    /// index, so the elimination order is deterministic.
    pub fn rank(&self, spec: &FieldSpec) -> usize {
        let mut rows = self.rows.clone();
        row_echelon(&mut rows, spec)
    }

    /// Solve coeffs * M = payloads for M, where self is a full-rank k x k
    /// coefficient matrix and payloads is k x l.
    pub fn solve(&self, payloads: &FieldMatrix, spec: &FieldSpec) -> Result<FieldMatrix> {
        let k = self.n_rows();
        if self.cols != k {
            return Err(Error::validation(format!(
                "solve requires a square coefficient matrix, got {}x{}",
                k, self.cols
            )));
        }
        if payloads.n_rows() != k {
            return Err(Error::validation(format!(
                "payload rows {} do not match coefficient rows {k}",
                payloads.n_rows()
            )));
        }
        if k == 0 {
            return Ok(FieldMatrix::zeros(0, payloads.n_cols()));
        }
        // Gauss-Jordan on the augmented system [coeffs | payloads].
        let l = payloads.n_cols();
        let mut aug: Vec<FieldVector> = (0..k)
            .map(|i| {
                let mut row: Vec<FieldElement> = self.rows[i].iter().collect();
                row.extend(payloads.rows[i].iter());
                FieldVector::new(row)
            })
            .collect();

        let mut pivot_row = 0usize;
        for col in 0..k {
            let Some(src) = (pivot_row..k).find(|&r| !aug[r].get(col).is_zero()) else {
                continue;
            };
            aug.swap(pivot_row, src);
            let inv = spec.inv(aug[pivot_row].get(col))?;
            aug[pivot_row].scale(inv, spec);
            for r in 0..k {
                if r != pivot_row {
                    let factor = aug[r].get(col);
                    if !factor.is_zero() {
                        let minus = spec.neg(factor);
                        let pivot = aug[pivot_row].clone();
                        aug[r].axpy(minus, &pivot, spec)?;
                    }
                }
            }
            pivot_row += 1;
        }
        if pivot_row < k {
            return Err(Error::SingularMatrix { rank: pivot_row, expected: k });
        }
        // Rows are now a permuted identity on the left; order by pivot column.
        let mut out = FieldMatrix::zeros(k, l);
        for row in &aug {
            let pivot_col = (0..k).find(|&c| !row.get(c).is_zero()).expect("full-rank row");
            for j in 0..l {
                out.set(pivot_col, j, row.get(k + j));
            }
        }
        Ok(out)
    }
}

/// In-place forward elimination; returns the rank. Rows end up in echelon
/// order (pivot columns strictly increasing over the first `rank` rows).
pub(crate) fn row_echelon(rows: &mut [FieldVector], spec: &FieldSpec) -> usize {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, FieldVector::len);
    let mut pivot_row = 0usize;
    for col in 0..n_cols {
        if pivot_row == n_rows {
            break;
        }
        let Some(src) = (pivot_row..n_rows).find(|&r| !rows[r].get(col).is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let inv = spec.inv(rows[pivot_row].get(col)).expect("pivot is nonzero");
        rows[pivot_row].scale(inv, spec);
        for r in (pivot_row + 1)..n_rows {
            let factor = rows[r].get(col);
            if !factor.is_zero() {
                let minus = spec.neg(factor);
                let pivot = rows[pivot_row].clone();
                rows[r].axpy(minus, &pivot, spec).expect("equal lengths");
            }
        }
        pivot_row += 1;
    }
    pivot_row
}

/// Incrementally maintained reduced echelon basis. Used for innovative-packet
/// detection and decode-buffer rank without re-eliminating from scratch.
#[derive(Debug, Clone)]
pub struct Echelon {
    dim: usize,
    /// Rows with strictly increasing pivot columns, each normalized to a
    /// leading 1 and fully reduced.
    rows: Vec<FieldVector>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(dim: usize) -> Echelon {
        Echelon { dim, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the basis; returns the (possibly zero) residual.
    pub fn reduce(&self, v: &FieldVector, spec: &FieldSpec) -> FieldVector {
        let mut res = v.clone();
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            let c = res.get(p);
            if !c.is_zero() {
                res.axpy(spec.neg(c), row, spec).expect("equal lengths");
            }
        }
        res
    }

    /// True iff `v` is not in the span of the basis.
    pub fn is_innovative(&self, v: &FieldVector, spec: &FieldSpec) -> bool {
        if self.rows.len() == self.dim {
            return false; // span is already the full space
        }
        !self.reduce(v, spec).is_zero()
    }

    /// Insert `v`; returns true when the rank grew.
    pub fn insert(&mut self, v: &FieldVector, spec: &FieldSpec) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        if self.rows.len() == self.dim {
            return false;
        }
        let mut res = self.reduce(v, spec);
        let Some(pivot) = (0..self.dim).find(|&c| !res.get(c).is_zero()) else {
            return false;
        };
        let inv = spec.inv(res.get(pivot)).expect("pivot is nonzero");
        res.scale(inv, spec);
        // back-substitute into existing rows to keep the basis reduced
        for row in self.rows.iter_mut() {
            let c = row.get(pivot);
            if !c.is_zero() {
                row.axpy(spec.neg(c), &res, spec).expect("equal lengths");
            }
        }
        let at = self.pivots.partition_point(|&p| p < pivot);
        self.rows.insert(at, res);
        self.pivots.insert(at, pivot);
        true
    }
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
    fn dot_examples() {
        let f2 = gf(2);
        let a = FieldVector::from_raw(&[1, 0]);
        let b = FieldVector::from_raw(&[1, 1]);
        assert_eq!(a.dot(&b, &f2).unwrap(), FieldElement(1));

        // zero annihilator in any field
        let f16 = gf(16);
        let v = FieldVector::from_raw(&[7, 3, 9]);
        let z = FieldVector::zeros(3);
        assert_eq!(v.dot(&z, &f16).unwrap(), FieldElement(0));

        // term-by-term oracle over GF(3): 1*2 + 2*2 + 2*1 = 8 = 2 mod 3
        let f3 = gf(3);
        let a = FieldVector::from_raw(&[1, 2, 2]);
        let b = FieldVector::from_raw(&[2, 2, 1]);
        assert_eq!(a.dot(&b, &f3).unwrap(), FieldElement(2));

        assert!(a.dot(&FieldVector::zeros(2), &f3).is_err());
    }

    #[test]
    fn axpy_examples() {
        let f5 = gf(5);
        // alpha = 0 leaves y unchanged
        let mut y = FieldVector::from_raw(&[1, 2]);
        y.axpy(FieldElement(0), &FieldVector::from_raw(&[4, 4]), &f5).unwrap();
        assert_eq!(y, FieldVector::from_raw(&[1, 2]));

        // componentwise oracle: (1 + 3*4, 2 + 3*4) mod 5 = (3, 4)
        y.axpy(FieldElement(3), &FieldVector::from_raw(&[4, 4]), &f5).unwrap();
        assert_eq!(y, FieldVector::from_raw(&[3, 4]));

        let f2 = gf(2);
        let mut y = FieldVector::from_raw(&[1, 0]);
        y.axpy(FieldElement(1), &FieldVector::from_raw(&[0, 1]), &f2).unwrap();
        assert_eq!(y, FieldVector::from_raw(&[1, 1]));

        assert!(y.axpy(FieldElement(1), &FieldVector::zeros(3), &f2).is_err());
    }

    #[test]
    fn rank_basics() {
        let f2 = gf(2);
        assert_eq!(FieldMatrix::identity(4).rank(&f2), 4);

        let m = FieldMatrix::from_raw(&[&[1, 1, 0], &[1, 1, 0]]);
        assert_eq!(m.rank(&f2), 1);

        // third row is the sum of the first two
        let m = FieldMatrix::from_raw(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        assert_eq!(m.rank(&f2), 2);

        // rank() must not mutate its input
        let before = m.clone();
        let _ = m.rank(&f2);
        assert_eq!(m, before);
    }

    /// Brute-force rank oracle: |span{rows}| = q^rank, where the span is
    /// enumerated by walking every coefficient tuple.
    fn rank_by_span_enumeration(m: &FieldMatrix, spec: &FieldSpec) -> usize {
        let q = spec.order();
        let rows = m.n_rows();
        let mut span = std::collections::HashSet::new();
        let mut coeffs = vec![0u64; rows];
        loop {
            let mut acc = FieldVector::zeros(m.n_cols());
            for (i, &c) in coeffs.iter().enumerate() {
                acc.axpy(FieldElement(c), m.row(i), spec).unwrap();
            }
            span.insert(acc.to_raw());
            // odometer increment over F_q^rows
            let mut i = 0;
            loop {
                if i == rows {
                    let size = span.len() as u64;
                    let mut rank = 0;
                    let mut p = 1u64;
                    while p < size {
                        p *= q;
                        rank += 1;
                    }
                    assert_eq!(p, size, "span size must be a power of q");
                    return rank;
                }
                coeffs[i] += 1;
                if coeffs[i] < q {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn rank_matches_span_oracle_gf2_exhaustive() {
        let f2 = gf(2);
        // every GF(2) matrix with up to 4 rows and up to 4 columns
        for rows in 1..=4usize {
            for cols in 1..=4usize {
                let cells = rows * cols;
                for bits in 0..(1u64 << cells) {
                    let mut m = FieldMatrix::zeros(rows, cols);
                    for c in 0..cells {
                        if bits >> c & 1 == 1 {
                            m.set(c / cols, c % cols, FieldElement(1));
                        }
                    }
                    assert_eq!(m.rank(&f2), rank_by_span_enumeration(&m, &f2));
                }
            }
        }
    }

    #[test]
    fn rank_matches_span_oracle_gf3() {
        let f3 = gf(3);
        // exhaustive up to 9 cells; 4x4 and friends by seeded sampling
        for rows in 1..=3usize {
            for cols in 1..=3usize {
                let cells = rows * cols;
                for mut code in 0..3u64.pow(cells as u32) {
                    let mut m = FieldMatrix::zeros(rows, cols);
                    for c in 0..cells {
                        m.set(c / cols, c % cols, FieldElement(code % 3));
                        code /= 3;
                    }
                    assert_eq!(m.rank(&f3), rank_by_span_enumeration(&m, &f3));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let m = FieldMatrix::random(4, 4, &f3, &mut rng);
            assert_eq!(m.rank(&f3), rank_by_span_enumeration(&m, &f3));
        }
    }

    #[test]
    fn solve_identity_and_triangular() {
        let f2 = gf(2);
        let payloads = FieldMatrix::from_raw(&[&[1, 0, 1], &[0, 1, 1]]);
        let id = FieldMatrix::identity(2);
        assert_eq!(id.solve(&payloads, &f2).unwrap(), payloads);

        // coeffs [[1,1],[0,1]] with payload rows (b1+b2, b2) recovers (b1, b2)
        let b1 = FieldVector::from_raw(&[1, 0, 1]);
        let b2 = FieldVector::from_raw(&[0, 1, 1]);
        let mut sum = b1.clone();
        sum.axpy(FieldElement(1), &b2, &f2).unwrap();
        let coeffs = FieldMatrix::from_raw(&[&[1, 1], &[0, 1]]);
        let rhs = FieldMatrix::from_rows(vec![sum, b2.clone()]).unwrap();
        let m = coeffs.solve(&rhs, &f2).unwrap();
        assert_eq!(m.row(0), &b1);
        assert_eq!(m.row(1), &b2);
    }

    #[test]
    fn solve_roundtrip_random_full_rank() {
        // construct-then-solve round trips, 100 instances per field
        for q in [2u64, 3, 16, 65536, 65521] {
            let f = gf(q);
            let mut rng = ChaCha8Rng::seed_from_u64(q);
            let mut done = 0;
            while done < 100 {
                let k = 4;
                let coeffs = FieldMatrix::random(k, k, &f, &mut rng);
                if coeffs.rank(&f) < k {
                    continue;
                }
                let m = FieldMatrix::random(k, 3, &f, &mut rng);
                let payloads = coeffs.mat_mul(&m, &f).unwrap();
                let solved = coeffs.solve(&payloads, &f).unwrap();
                assert_eq!(solved, m);
                // and the solution reproduces the right-hand side exactly
                assert_eq!(coeffs.mat_mul(&solved, &f).unwrap(), payloads);
                done += 1;
            }
        }
    }

    #[test]
    fn solve_rejects_singular() {
        let f2 = gf(2);
        let coeffs = FieldMatrix::from_raw(&[&[1, 1], &[1, 1]]);
        let payloads = FieldMatrix::from_raw(&[&[1], &[1]]);
        match coeffs.solve(&payloads, &f2) {
            Err(Error::SingularMatrix { rank, expected }) => {
                assert_eq!((rank, expected), (1, 2));
            }
            other => panic!("expected singular-matrix error, got {other:?}"),
        }
    }

    #[test]
    fn echelon_tracks_rank_incrementally() {
        for q in [2u64, 3, 16] {
            let f = gf(q);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + q);
            for _ in 0..200 {
                let dim = 5;
                let mut ech = Echelon::new(dim);
                let mut rows: Vec<FieldVector> = Vec::new();
                for _ in 0..7 {
                    let v = FieldVector::random(dim, &f, &mut rng);
                    let innovative = ech.is_innovative(&v, &f);
                    let grew = ech.insert(&v, &f);
                    assert_eq!(innovative, grew);
                    rows.push(v);
                    let direct = FieldMatrix::from_rows(rows.clone()).unwrap().rank(&f);
                    assert_eq!(ech.rank(), direct);
                }
            }
        }
    }

    #[test]
    fn left_mul_vec_matches_mat_mul() {
        let f = gf(16);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = FieldMatrix::random(4, 3, &f, &mut rng);
            let v = FieldVector::random(4, &f, &mut rng);
            let as_row = FieldMatrix::from_rows(vec![v.clone()]).unwrap();
            let via_mat = as_row.mat_mul(&m, &f).unwrap();
            let via_vec = m.left_mul_vec(&v, &f).unwrap();
            assert_eq!(via_mat.row(0), &via_vec);
        }
    }
}
