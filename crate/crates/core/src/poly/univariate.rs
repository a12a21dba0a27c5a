//! Dense univariate polynomials and certified real root isolation.
//!
//! Roots are isolated per square-free factor with Sturm sequences. Rational
//! roots are detected exactly: once an isolating interval is narrower than
//! `1/a_n` (for the primitive integer form with leading coefficient `a_n`) it
//! contains at most one candidate `m/a_n`, which is tested by evaluation.

use dashu_int::ops::{Abs, UnsignedAbs};
use dashu_int::{IBig, UBig};

use super::MultiPoly;
use crate::error::{Error, Result};
use crate::scalar::{primitive, Approx, Field, Precision, Rational};

/// Coefficients from the constant term upward, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last() == Some(&Rational::ZERO) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or(Rational::ZERO)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_field<T: Field>(&self, x: &T, ctx: &T::Ctx) -> T {
        let mut acc = T::zero(ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&T::from_rational(ctx, c));
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from(k))
                .collect(),
        )
    }

    fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &UniPoly, k: usize| p.coeffs.get(k).cloned().unwrap_or(Rational::ZERO);
        UniPoly::new((0..n).map(|k| get(self, k) - get(other, k)).collect())
    }

    fn scale(&self, c: &Rational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Euclidean division: `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.coeffs.len() - 1;
        let lead = d.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![Rational::ZERO; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if c != Rational::ZERO {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rational::ONE / self.leading()))
    }

    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Yun's algorithm: `[(g_1, 1), (g_2, 2), ...]` with square-free, pairwise
    /// coprime monic `g_i` such that `self = c·∏ g_i^i`. Constant factors are omitted.
    pub fn square_free_factors(&self) -> Vec<(UniPoly, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let (mut b, _) = f.div_rem(&a0);
        let (c, _) = df.div_rem(&a0);
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            let (nb, _) = b.div_rem(&a);
            b = nb;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            let (c, _) = d.div_rem(&a);
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Sturm sequence `f, f', -rem(f, f'), ...`.
    fn sturm(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-Rational::ONE));
        }
        seq
    }

    /// Bound `B` with every real root strictly inside `(-B, B)`.
    fn cauchy_bound(&self) -> Rational {
        let lead = self.leading().abs();
        let max = self
            .coeffs
            .iter()
            .map(|c| c.clone().abs() / &lead)
            .max()
            .unwrap_or(Rational::ZERO);
        max + Rational::ONE
    }
}

fn sign(x: &Rational) -> i8 {
    match x.cmp(&Rational::ZERO) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

fn variations(seq: &[UniPoly], x: &Rational) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for p in seq {
        let s = sign(&p.eval(x));
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Location of a real root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootValue {
    Exact(Rational),
    /// Open interval containing exactly one root of the square-free `factor`,
    /// which changes sign across it.
    Interval {
        lo: Rational,
        hi: Rational,
        factor: UniPoly,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealRoot {
    pub value: RootValue,
    pub multiplicity: u32,
}

impl RealRoot {
    pub fn exact(&self) -> Option<&Rational> {
        match &self.value {
            RootValue::Exact(q) => Some(q),
            RootValue::Interval { .. } => None,
        }
    }

    /// Closed enclosure `[lo, hi]` (degenerate for exact roots).
    pub fn bounds(&self) -> (Rational, Rational) {
        match &self.value {
            RootValue::Exact(q) => (q.clone(), q.clone()),
            RootValue::Interval { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    /// Bisect until the enclosure is narrower than `width`.
    pub fn refine(&mut self, width: &Rational) {
        if let RootValue::Interval { lo, hi, factor } = &mut self.value {
            let s_lo = sign(&factor.eval(lo));
            while &(hi.clone() - lo.clone()) >= width {
                let mid = (lo.clone() + hi.clone()) / Rational::from(2);
                let s = sign(&factor.eval(&mid));
                if s == 0 {
                    self.value = RootValue::Exact(mid);
                    return;
                }
                if s == s_lo {
                    *lo = mid;
                } else {
                    *hi = mid;
                }
            }
        }
    }

    /// Approximation at the given precision: Newton on the square-free factor
    /// from the interval midpoint, safeguarded to stay inside the enclosure.
    pub fn approximate(&self, prec: Precision) -> Approx {
        match &self.value {
            RootValue::Exact(q) => Approx::from_rational(&prec, q),
            RootValue::Interval { lo, hi, factor } => {
                let df = factor.derivative();
                let lo_a = Approx::from_rational(&prec, lo);
                let hi_a = Approx::from_rational(&prec, hi);
                let two = Approx::from_i64(&prec, 2);
                let mut x = lo_a.add(&hi_a).div(&two);
                let stop = Approx::pow2(prec, -(prec.bits as isize) + 4);
                for _ in 0..64 {
                    let fx = factor.eval_field(&x, &prec);
                    let dfx = df.eval_field(&x, &prec);
                    if dfx.abs_lt(&Approx::pow2(prec, -(prec.bits as isize))) {
                        break;
                    }
                    let step = fx.div(&dfx);
                    let next = x.sub(&step);
                    let inside = !next.sub(&lo_a).is_negative() && !hi_a.sub(&next).is_negative();
                    if !inside {
                        break;
                    }
                    x = next;
                    if step.abs_lt(&stop) {
                        break;
                    }
                }
                x
            }
        }
    }
}

/// Sorted, pairwise disjoint isolating enclosures for all distinct real roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootIsolation {
    pub roots: Vec<RealRoot>,
}

impl RootIsolation {
    pub fn rational_roots(&self) -> Vec<Rational> {
        self.roots.iter().filter_map(|r| r.exact().cloned()).collect()
    }

    pub fn approximations(&self, prec: Precision) -> Vec<Approx> {
        self.roots.iter().map(|r| r.approximate(prec)).collect()
    }
}

/// Default refinement width of isolating intervals, `2^-64`.
pub fn default_width() -> Rational {
    Rational::from_parts(IBig::ONE, UBig::ONE << 64)
}

/// Isolate the real roots of a nonzero polynomial in at most one variable.
pub fn isolate_real_roots(p: &MultiPoly) -> Result<RootIsolation> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let occurring = p.occurring_vars();
    let u = match occurring.as_slice() {
        [] => return Ok(RootIsolation { roots: Vec::new() }),
        [i] => p.to_univariate(*i)?,
        _ => return Err(Error::NotUnivariate),
    };
    Ok(isolate_uni(&u, &default_width()))
}

/// Isolation for a univariate polynomial, refined to `width`.
pub fn isolate_uni(u: &UniPoly, width: &Rational) -> RootIsolation {
    let mut roots = Vec::new();
    for (g, mult) in u.square_free_factors() {
        for value in isolate_square_free(&g) {
            roots.push(RealRoot {
                value,
                multiplicity: mult,
            });
        }
    }
    for r in roots.iter_mut() {
        r.refine(width);
    }
    separate(&mut roots);
    roots.sort_by(|a, b| a.bounds().0.cmp(&b.bounds().0));
    RootIsolation { roots }
}

/// Rational roots of a univariate polynomial (distinct, ascending).
pub fn rational_roots(u: &UniPoly) -> Vec<Rational> {
    if u.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    if u.degree() == Some(1) {
        return vec![-(&u.coeffs[0] / &u.coeffs[1])];
    }
    let mut roots: Vec<Rational> = u
        .square_free_factors()
        .iter()
        .flat_map(|(g, _)| isolate_square_free(g))
        .filter_map(|v| match v {
            RootValue::Exact(q) => Some(q),
            RootValue::Interval { .. } => None,
        })
        .collect();
    roots.sort();
    roots
}

fn isolate_square_free(g: &UniPoly) -> Vec<RootValue> {
    let seq = g.sturm();
    let b = g.cauchy_bound();
    let lead_int = primitive(&g.coeffs)
        .map(|v| v.last().cloned().unwrap_or(IBig::ONE))
        .unwrap_or(IBig::ONE);
    let lead = Rational::from(lead_int.unsigned_abs());
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let count = variations(&seq, &lo) - variations(&seq, &hi);
        match count {
            0 => {}
            1 => out.push(settle(g, lo, hi, &lead)),
            _ => {
                let mid = (lo.clone() + hi.clone()) / Rational::from(2);
                if g.eval(&mid) == Rational::ZERO {
                    // Shrink a gap around the exact root that excludes all others.
                    let mut delta = (hi.clone() - lo.clone()) / Rational::from(4);
                    loop {
                        let a = mid.clone() - delta.clone();
                        let c = mid.clone() + delta.clone();
                        if g.eval(&a) != Rational::ZERO
                            && g.eval(&c) != Rational::ZERO
                            && variations(&seq, &a) - variations(&seq, &c) == 1
                        {
                            stack.push((lo, a));
                            stack.push((c, hi));
                            break;
                        }
                        delta /= Rational::from(2);
                    }
                    out.push(RootValue::Exact(mid));
                } else {
                    stack.push((lo, mid.clone()));
                    stack.push((mid, hi));
                }
            }
        }
    }
    out
}

/// Narrow a single-root interval until it holds at most one candidate
/// `m/lead`, then decide rationality exactly.
fn settle(g: &UniPoly, mut lo: Rational, mut hi: Rational, lead: &Rational) -> RootValue {
    let s_lo = sign(&g.eval(&lo));
    while (hi.clone() - lo.clone()) * lead >= Rational::ONE {
        let mid = (lo.clone() + hi.clone()) / Rational::from(2);
        let s = sign(&g.eval(&mid));
        if s == 0 {
            return RootValue::Exact(mid);
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = (lo.clone() * lead).ceil();
    let cand = Rational::from(m) / lead;
    if cand > lo && cand < hi && g.eval(&cand) == Rational::ZERO {
        return RootValue::Exact(cand);
    }
    RootValue::Interval {
        lo,
        hi,
        factor: g.clone(),
    }
}

/// Refine overlapping enclosures of roots from different factors until disjoint.
fn separate(roots: &mut [RealRoot]) {
    loop {
        let mut changed = false;
        for i in 0..roots.len() {
            for j in (i + 1)..roots.len() {
                let (a_lo, a_hi) = roots[i].bounds();
                let (b_lo, b_hi) = roots[j].bounds();
                if a_lo <= b_hi && b_lo <= a_hi {
                    for k in [i, j] {
                        let (lo, hi) = roots[k].bounds();
                        if lo != hi {
                            roots[k].refine(&((hi - lo) / Rational::from(2)));
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, var_names};
    use crate::scalar::rat;

    fn iso(text: &str) -> RootIsolation {
        isolate_real_roots(&parse_poly(text, &var_names(&["t"])).unwrap()).unwrap()
    }

    #[test]
    fn rational_roots_are_exact() {
        let r = iso("t^2 - 1");
        assert_eq!(r.roots.len(), 2);
        assert_eq!(r.rational_roots(), vec![rat(-1, 1), rat(1, 1)]);
        assert!(r.roots.iter().all(|x| x.multiplicity == 1));
    }

    #[test]
    fn irrational_roots_are_bracketed() {
        let r = iso("t^2 - 2");
        assert_eq!(r.roots.len(), 2);
        let (lo, hi) = r.roots[1].bounds();
        assert!(lo.clone() * &lo < rat(2, 1) && hi.clone() * &hi > rat(2, 1));
        assert!(hi - lo < default_width());
        let approx = r.roots[1].approximate(Precision::new(128)).to_f64();
        assert!((approx - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn multiplicities_and_empty_cases() {
        let r = iso("t^3");
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.roots[0].exact(), Some(&rat(0, 1)));
        assert_eq!(r.roots[0].multiplicity, 3);
        assert!(iso("t^2 + 1").roots.is_empty());
        let zero = MultiPoly::zero(&var_names(&["t"]));
        assert_eq!(isolate_real_roots(&zero), Err(Error::ZeroPolynomial));
        let two = parse_poly("x*y", &var_names(&["x", "y"])).unwrap();
        assert_eq!(isolate_real_roots(&two), Err(Error::NotUnivariate));
    }

    #[test]
    fn mixed_factors() {
        // (t - 1/3)^2 (t^2 - 3) (2t + 5)
        let r = iso("(t - 1/3)^2*(t^2 - 3)*(2*t + 5)");
        assert_eq!(r.roots.len(), 4);
        assert_eq!(r.roots[0].exact(), Some(&rat(-5, 2)));
        assert_eq!(r.roots[2].exact(), Some(&rat(1, 3)));
        assert_eq!(r.roots[2].multiplicity, 2);
        assert!(r.roots[1].exact().is_none() && r.roots[3].exact().is_none());
    }

    #[test]
    fn rational_roots_helper() {
        let u = UniPoly::new(vec![rat(-6, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(rational_roots(&u), vec![rat(-3, 1), rat(2, 1)]);
    }
}
