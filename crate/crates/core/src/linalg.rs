//! Dense linear algebra over a [`Field`].
//!
//! Exact matrices are reduced fraction-free (Bareiss) on integer rows; the
//! approximate backend uses partial pivoting with the precision's zero
//! tolerance after scaling each row to unit max-norm.

use std::fmt;

use dashu_int::{IBig, UBig};

use crate::error::{Error, Result};
use crate::scalar::{Field, Rational};

#[derive(Clone, PartialEq)]
pub struct Matrix<T: Field> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    ctx: T::Ctx,
}

impl<T: Field> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T: Field> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>, ctx: T::Ctx) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data, ctx }
    }

    pub fn zeros(rows: usize, cols: usize, ctx: &T::Ctx) -> Self {
        Matrix::new(rows, cols, vec![T::zero(ctx); rows * cols], ctx.clone())
    }

    pub fn identity(n: usize, ctx: &T::Ctx) -> Self {
        let mut m = Matrix::zeros(n, n, ctx);
        for i in 0..n {
            m.set(i, i, T::one(ctx));
        }
        m
    }

    /// Build from row vectors; all rows must have length `cols`.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize, ctx: &T::Ctx) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r);
        }
        Matrix::new(n, cols, data, ctx.clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> &T::Ctx {
        &self.ctx
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix::new(self.cols, self.rows, data, self.ctx.clone())
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = T::zero(&self.ctx);
                for k in 0..self.cols {
                    let a = self.get(r, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(other.get(k, c)));
                }
                data.push(acc);
            }
        }
        Ok(Matrix::new(self.rows, other.cols, data, self.ctx.clone()))
    }

    /// `M · v`.
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    /// `vᵀ · M`.
    pub fn vec_mul(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![T::zero(&self.ctx); self.cols];
        for (r, vr) in v.iter().enumerate() {
            if vr.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o = o.add(&vr.mul(self.get(r, c)));
            }
        }
        Ok(out)
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix::new(self.rows + other.rows, self.cols, data, self.ctx.clone()))
    }

    pub fn map<U: Field>(&self, ctx: &U::Ctx, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix::new(self.rows, self.cols, self.data.iter().map(f).collect(), ctx.clone())
    }
}

impl Matrix<Rational> {
    /// Convenience constructor from small integers.
    pub fn from_i64(rows: &[&[i64]]) -> Matrix<Rational> {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from(x)).collect())
            .collect();
        Matrix::from_rows(data, cols, &())
    }

    pub fn to_approx(&self, prec: crate::scalar::Precision) -> Matrix<crate::scalar::Approx> {
        self.map(&prec, |x| crate::scalar::Approx::from_rational(&prec, x))
    }
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut it = a.iter().zip(b);
    let Some((x, y)) = it.next() else {
        panic!("dot product of empty vectors has no backend context");
    };
    let mut acc = x.mul(y);
    for (x, y) in it {
        if x.is_zero() {
            continue;
        }
        acc = acc.add(&x.mul(y));
    }
    acc
}

/// Reduced row echelon form: only the nonzero rows are kept.
#[derive(Clone, Debug)]
pub struct Echelon<T: Field> {
    pub rows: Vec<Vec<T>>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl<T: Field> Echelon<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Null space basis read off the reduced form: one vector per free column.
    pub fn kernel(&self, ctx: &T::Ctx) -> Vec<Vec<T>> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![T::zero(ctx); self.cols];
            v[free] = T::one(ctx);
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                v[p] = row[free].neg();
            }
            basis.push(v);
        }
        basis
    }
}

/// Gauss-Jordan with partial pivoting and tolerance-based zero detection.
pub fn pivoted_rref<T: Field>(m: &Matrix<T>) -> Echelon<T> {
    let ctx = m.ctx().clone();
    let mut rows: Vec<Vec<T>> = m.row_vecs();
    for row in rows.iter_mut() {
        let scale = row
            .iter()
            .max_by(|a, b| a.cmp_abs(b))
            .cloned()
            .unwrap_or_else(|| T::zero(&ctx));
        if !scale.is_zero() {
            for x in row.iter_mut() {
                *x = x.div(&scale);
            }
        }
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols() {
        if r == rows.len() {
            break;
        }
        let best = (r..rows.len())
            .max_by(|&a, &b| rows[a][c].cmp_abs(&rows[b][c]))
            .expect("nonempty range");
        if rows[best][c].is_zero() {
            continue;
        }
        rows.swap(r, best);
        let pivot = rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.div(&pivot);
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c].clone();
            if factor.is_zero() {
                row[c] = T::zero(&ctx);
                continue;
            }
            for (x, p) in row.iter_mut().zip(&prow) {
                *x = x.sub(&factor.mul(p));
            }
            row[c] = T::zero(&ctx);
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    Echelon {
        rows,
        pivots,
        cols: m.cols(),
    }
}

fn lcm(a: &UBig, b: &UBig) -> UBig {
    let g = dashu_int::ops::Gcd::gcd(a, b);
    a / g * b
}

/// Scale each rational row to a primitive integer row (same row space).
pub fn integer_rows(m: &Matrix<Rational>) -> Vec<Vec<IBig>> {
    (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            let l = row.iter().fold(UBig::ONE, |acc, x| lcm(&acc, x.denominator()));
            row.iter()
                .map(|x| x.numerator() * IBig::from(&l / x.denominator()))
                .collect()
        })
        .collect()
}

/// Result of fraction-free forward elimination.
#[derive(Clone, Debug)]
pub struct BareissOutcome {
    /// Row echelon form; rows past `pivots.len()` are zero.
    pub rows: Vec<Vec<IBig>>,
    pub pivots: Vec<usize>,
    /// Every division performed was exact. Always true for integer input.
    pub all_divisions_exact: bool,
}

/// Bareiss fraction-free elimination on integer rows.
///
/// After `k` pivots every remaining entry is a `(k+1)`-minor of the input, so
/// the division by the previous pivot never leaves a remainder.
pub fn bareiss(mut rows: Vec<Vec<IBig>>, cols: usize) -> BareissOutcome {
    let mut pivots = Vec::new();
    let mut prev = IBig::ONE;
    let mut r = 0;
    let mut exact = true;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != IBig::ZERO) else {
            continue;
        };
        rows.swap(r, p);
        let (head, tail) = rows.split_at_mut(r + 1);
        let prow = &head[r];
        for row in tail.iter_mut() {
            let lead = row[c].clone();
            for j in c + 1..cols {
                let num = &prow[c] * &row[j] - &lead * &prow[j];
                let (q, rem) = dashu_int::ops::DivRem::div_rem(num, &prev);
                if rem != IBig::ZERO {
                    exact = false;
                }
                row[j] = q;
            }
            row[c] = IBig::ZERO;
        }
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    BareissOutcome {
        rows,
        pivots,
        all_divisions_exact: exact,
    }
}

pub fn exact_rank(m: &Matrix<Rational>) -> usize {
    bareiss(integer_rows(m), m.cols()).pivots.len()
}

/// Exact reduced row echelon form: Bareiss forward pass, rational back substitution.
pub fn exact_rref(m: &Matrix<Rational>) -> Echelon<Rational> {
    let cols = m.cols();
    let outcome = bareiss(integer_rows(m), cols);
    let rank = outcome.pivots.len();
    let mut rows: Vec<Vec<Rational>> = outcome
        .rows
        .into_iter()
        .take(rank)
        .map(|r| r.into_iter().map(Rational::from).collect())
        .collect();
    for (i, &c) in outcome.pivots.iter().enumerate().rev() {
        let pivot = rows[i][c].clone();
        for x in rows[i].iter_mut() {
            *x = &*x / &pivot;
        }
        let prow = rows[i].clone();
        for row in rows.iter_mut().take(i) {
            let factor = row[c].clone();
            if factor == Rational::ZERO {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&prow).skip(c) {
                if *p != Rational::ZERO {
                    *x = &*x - &factor * p;
                }
            }
        }
    }
    Echelon {
        rows,
        pivots: outcome.pivots,
        cols,
    }
}

pub fn rank<T: Field>(m: &Matrix<T>) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    T::rank(m)
}

/// Basis of the right null space; length is `cols - rank`.
pub fn kernel_basis<T: Field>(m: &Matrix<T>) -> Vec<Vec<T>> {
    if m.rows() == 0 {
        return (0..m.cols())
            .map(|i| {
                let mut v = vec![T::zero(m.ctx()); m.cols()];
                v[i] = T::one(m.ctx());
                v
            })
            .collect();
    }
    T::reduce(m).kernel(m.ctx())
}

/// Rank of a list of row vectors of a common length.
pub fn rank_of_rows<T: Field>(rows: &[Vec<T>], ctx: &T::Ctx) -> usize {
    let Some(first) = rows.first() else { return 0 };
    rank(&Matrix::from_rows(rows.to_vec(), first.len(), ctx))
}

/// Affine solution set of `A x = b`.
#[derive(Clone, Debug)]
pub enum Solution<T: Field> {
    NoSolution,
    Unique(Vec<T>),
    Family {
        particular: Vec<T>,
        kernel: Vec<Vec<T>>,
    },
    /// The approximate backend could not separate a pivot from zero.
    Inconclusive,
}

pub fn solve_linear<T: Field>(a: &Matrix<T>, b: &[T]) -> Result<Solution<T>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    let n = a.cols();
    let ctx = a.ctx().clone();
    let aug_rows: Vec<Vec<T>> = (0..a.rows())
        .map(|r| {
            let mut row = a.row(r).to_vec();
            row.push(b[r].clone());
            row
        })
        .collect();
    let aug = Matrix::from_rows(aug_rows, n + 1, &ctx);
    let ech = T::reduce(&aug);
    let inconsistent = ech.pivots.last() == Some(&n);
    let exact = std::any::TypeId::of::<T>() == std::any::TypeId::of::<Rational>();
    if !exact && (inconsistent || ech.rank() < n) {
        return Ok(Solution::Inconclusive);
    }
    if inconsistent {
        return Ok(Solution::NoSolution);
    }
    let mut particular = vec![T::zero(&ctx); n];
    for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
        particular[p] = row[n].clone();
    }
    if ech.rank() == n {
        return Ok(Solution::Unique(particular));
    }
    let coeff = Echelon {
        rows: ech.rows.iter().map(|r| r[..n].to_vec()).collect(),
        pivots: ech.pivots.clone(),
        cols: n,
    };
    Ok(Solution::Family {
        particular,
        kernel: coeff.kernel(&ctx),
    })
}

/// Row space membership: does `v` lie in the span of `rows`?
pub fn in_span<T: Field>(rows: &[Vec<T>], v: &[T], ctx: &T::Ctx) -> bool {
    let base = rank_of_rows(rows, ctx);
    let mut all = rows.to_vec();
    all.push(v.to_vec());
    rank_of_rows(&all, ctx) == base
}

pub mod modular {
    //! Kernel computation modulo word-size primes with exact verification.
    //!
    //! The reconstructed rational kernel is checked against the original integer
    //! system. Since reduction mod p can only lower the rank, a verified set of
    //! `dim ker_p` independent rational vectors is exactly the rational kernel.

    use dashu_int::{IBig, UBig};

    use crate::scalar::Rational;

    pub const PRIMES: [u64; 2] = [MERSENNE, (1 << 62) - 57];

    const MERSENNE: u64 = (1 << 61) - 1;

    fn mulmod(a: u64, b: u64, p: u64) -> u64 {
        let x = a as u128 * b as u128;
        if p == MERSENNE {
            let r = (x as u64 & MERSENNE) + (x >> 61) as u64;
            if r >= MERSENNE {
                r - MERSENNE
            } else {
                r
            }
        } else {
            (x % p as u128) as u64
        }
    }

    fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a, p);
            }
            a = mulmod(a, a, p);
            e >>= 1;
        }
        acc
    }

    fn inv(a: u64, p: u64) -> u64 {
        powmod(a, p - 2, p)
    }

    pub fn residue(x: &IBig, p: u64) -> u64 {
        let m = IBig::from(p);
        let r = x % &m;
        let r = if r < IBig::ZERO { r + m } else { r };
        u64::try_from(r).expect("residue fits")
    }

    /// Reduced row echelon form mod p; returns the pivot columns.
    pub fn rref(rows: &mut Vec<Vec<u64>>, cols: usize, p: u64) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows.len() {
                break;
            }
            let Some(k) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
                continue;
            };
            rows.swap(r, k);
            let iv = inv(rows[r][c], p);
            for x in rows[r].iter_mut() {
                *x = mulmod(*x, iv, p);
            }
            let prow = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row[c] == 0 {
                    continue;
                }
                let f = row[c];
                for (x, &q) in row.iter_mut().zip(&prow).skip(c) {
                    if q != 0 {
                        *x = (*x + p - mulmod(f, q, p)) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        pivots
    }

    /// Smallest-height rational congruent to `a` mod `p`, if one with both
    /// numerator and denominator below `sqrt(p/2)` exists.
    pub fn reconstruct(a: u64, p: u64) -> Option<Rational> {
        let bound = ((p / 2) as f64).sqrt() as i128;
        let (mut r0, mut r1) = (p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 > bound {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if t1 == 0 || t1.abs() > bound {
            return None;
        }
        let (num, den) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
        Some(Rational::from_parts(IBig::from(num), UBig::from(den as u128)))
    }

    /// Rational null space of an integer matrix, or `None` if the modular
    /// route could not certify it (the caller then falls back to exact elimination).
    pub fn kernel(rows: &[Vec<IBig>], cols: usize) -> Option<Vec<Vec<Rational>>> {
        'primes: for &p in &PRIMES {
            let mut reduced: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| residue(x, p)).collect()).collect();
            let pivots = rref(&mut reduced, cols, p);
            let mut is_pivot = vec![false; cols];
            for &c in &pivots {
                is_pivot[c] = true;
            }
            let mut basis = Vec::new();
            for free in (0..cols).filter(|&c| !is_pivot[c]) {
                let mut v = vec![Rational::ZERO; cols];
                v[free] = Rational::ONE;
                for (row, &pc) in reduced.iter().zip(&pivots) {
                    let neg = (p - row[free]) % p;
                    match reconstruct(neg, p) {
                        Some(q) => v[pc] = q,
                        None => continue 'primes,
                    }
                }
                basis.push(v);
            }
            // Exact verification against every original equation.
            for v in &basis {
                for row in rows {
                    let mut acc = Rational::ZERO;
                    for (a, x) in row.iter().zip(v) {
                        if *a != IBig::ZERO && *x != Rational::ZERO {
                            acc += Rational::from(a.clone()) * x;
                        }
                    }
                    if acc != Rational::ZERO {
                        continue 'primes;
                    }
                }
            }
            // Free-column unit structure makes the basis independent.
            return Some(basis);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Approx, Precision};

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_i64(rows)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::<Rational>::identity(3, &())), 3);
        assert_eq!(rank(&q(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank(&q(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&Matrix::<Rational>::identity(2, &())).is_empty());
        let k = kernel_basis(&q(&[&[1, -1]]));
        assert_eq!(k, vec![vec![rat(1, 1), rat(1, 1)]]);
        let k = kernel_basis(&q(&[&[1, 2], &[2, 4]]));
        assert_eq!(k.len(), 1);
        // proportional to (2, -1)
        assert_eq!(&k[0][0] * rat(-1, 1), &k[0][1] * rat(2, 1));
    }

    #[test]
    fn solve_examples() {
        let sol = solve_linear(&Matrix::<Rational>::identity(2, &()), &[rat(3, 1), rat(5, 1)]).unwrap();
        assert!(matches!(sol, Solution::Unique(v) if v == vec![rat(3, 1), rat(5, 1)]));

        let sol = solve_linear(&q(&[&[1, 1]]), &[rat(0, 1)]).unwrap();
        match sol {
            Solution::Family { particular, kernel } => {
                assert_eq!(particular, vec![rat(0, 1), rat(0, 1)]);
                assert_eq!(kernel, vec![vec![rat(-1, 1), rat(1, 1)]]);
            }
            other => panic!("expected family, got {other:?}"),
        }

        let sol = solve_linear(&q(&[&[1], &[1]]), &[rat(0, 1), rat(1, 1)]).unwrap();
        assert!(matches!(sol, Solution::NoSolution));
    }

    #[test]
    fn solve_dimension_mismatch() {
        assert!(solve_linear(&q(&[&[1, 1]]), &[rat(0, 1), rat(1, 1)]).is_err());
    }

    #[test]
    fn approx_solve_is_inconclusive_when_singular() {
        let p = Precision::new(100);
        let a = q(&[&[1, 2], &[2, 4]]).to_approx(p);
        let b = vec![Approx::from_i64(&p, 1), Approx::from_i64(&p, 2)];
        assert!(matches!(solve_linear(&a, &b).unwrap(), Solution::Inconclusive));
        let a = q(&[&[2, 1], &[1, 3]]).to_approx(p);
        match solve_linear(&a, &b).unwrap() {
            Solution::Unique(x) => {
                // x = (1/5, 3/5)
                let e0 = x[0].sub(&Approx::from_rational(&p, &rat(1, 5)));
                assert!(e0.is_zero());
            }
            other => panic!("expected unique, got {other:?}"),
        }
    }

    #[test]
    fn modular_kernel_matches_exact() {
        let m = q(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[1, 0, -1, 5]]);
        let ints = integer_rows(&m);
        let k = modular::kernel(&ints, 4).unwrap();
        let exact = kernel_basis(&m);
        assert_eq!(k, exact);
    }

    #[test]
    fn reconstruction_of_small_rationals() {
        let p = modular::PRIMES[0];
        let third = (2 * p + 1) / 3; // p ≡ 1 mod 3
        assert_eq!((third as u128 * 3 % p as u128) as u64, 1);
        assert_eq!(modular::reconstruct(third, p), Some(rat(1, 3)));
        assert_eq!(modular::reconstruct(p - 5, p), Some(rat(-5, 1)));
    }
}
