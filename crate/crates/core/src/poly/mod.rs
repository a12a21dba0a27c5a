//! Sparse multivariate polynomials over exact rationals.
//!
//! Terms are kept in a map keyed by exponent vectors under graded
//! lexicographic order; zero coefficients are never stored, so structural
//! equality is polynomial equality.

mod parse;
pub mod univariate;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{Field, Rational};

pub use parse::parse_poly;
pub use univariate::{isolate_real_roots, RealRoot, RootIsolation, RootValue, UniPoly};

/// Exponent vector ordered by total degree, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Arc<[String]>,
    terms: BTreeMap<Monomial, Rational>,
}

/// Value bound to a variable by [`MultiPoly::substitute`].
#[derive(Clone, Debug)]
pub enum Binding {
    Value(Rational),
    Poly(MultiPoly),
}

impl MultiPoly {
    pub fn zero(vars: &[String]) -> Self {
        MultiPoly {
            vars: vars.into(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[String], c: Rational) -> Self {
        let mut p = MultiPoly::zero(vars);
        if c != Rational::ZERO {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    /// The coordinate function of the `index`-th variable.
    pub fn var(vars: &[String], index: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[index] = 1;
        let mut p = MultiPoly::zero(vars);
        p.terms.insert(Monomial(e), Rational::ONE);
        p
    }

    pub fn from_terms(vars: &[String], terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = MultiPoly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent length mismatch");
            p.add_term(Monomial(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c == Rational::ZERO {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if *existing == Rational::ZERO {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or(Rational::ZERO)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, index: usize) -> u32 {
        self.terms.keys().map(|m| m.0[index]).max().unwrap_or(0)
    }

    /// Homogeneous and nonzero.
    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => false,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    /// Indices of variables that occur in some term.
    pub fn occurring_vars(&self) -> Vec<usize> {
        (0..self.nvars())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    fn check_vars(&self, other: &MultiPoly) {
        assert!(
            self.vars == other.vars,
            "polynomials over different variable lists: {:?} vs {:?}",
            self.vars,
            other.vars
        );
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if *c == Rational::ZERO {
            return MultiPoly::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(&self.vars, Rational::ONE);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative in the `index`-th variable.
    pub fn partial_index(&self, index: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[index] -= 1;
            out.add_term(m2, c * Rational::from(e));
        }
        out
    }

    pub fn partial(&self, var: &str) -> Result<MultiPoly> {
        Ok(self.partial_index(self.var_index(var)?))
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars()).map(|i| self.partial_index(i)).collect()
    }

    /// Evaluate at a point given positionally (one value per variable).
    pub fn eval<T: Field>(&self, point: &[T], ctx: &T::Ctx) -> T {
        assert_eq!(point.len(), self.nvars(), "point has wrong arity");
        let table = PowerTable::new(point, &self.max_degrees(), ctx);
        self.eval_with(&table, ctx)
    }

    fn max_degrees(&self) -> Vec<u32> {
        (0..self.nvars()).map(|i| self.degree_in(i)).collect()
    }

    pub(crate) fn eval_with<T: Field>(&self, table: &PowerTable<T>, ctx: &T::Ctx) -> T {
        let mut acc = T::zero(ctx);
        for (m, c) in &self.terms {
            let mut t = T::from_rational(ctx, c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(table.get(i, e));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Evaluate with a name-keyed assignment, which must cover every variable.
    pub fn evaluate<T: Field>(&self, assignment: &[(&str, T)], ctx: &T::Ctx) -> Result<T> {
        let point = self
            .vars
            .iter()
            .map(|v| {
                assignment
                    .iter()
                    .find(|(n, _)| *n == v.as_str())
                    .map(|(_, x)| x.clone())
                    .ok_or_else(|| Error::MissingVariable(v.clone()))
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(self.eval(&point, ctx))
    }

    /// Substitute values or polynomials for variables.
    ///
    /// Polynomial bindings must all live over one variable list, which becomes
    /// the result's list; unbound variables of `self` must appear in it. With
    /// only value bindings the result keeps the unbound variables in order.
    pub fn substitute(&self, bindings: &[(&str, Binding)]) -> Result<MultiPoly> {
        for (name, _) in bindings {
            self.var_index(name)?;
        }
        let mut target: Option<Arc<[String]>> = None;
        for (_, b) in bindings {
            if let Binding::Poly(p) = b {
                match &target {
                    None => target = Some(p.vars.clone()),
                    Some(t) if *t == p.vars => {}
                    Some(t) => {
                        return Err(Error::VariableMismatch(format!(
                            "binding polynomials over {:?} and {:?}",
                            t, p.vars
                        )))
                    }
                }
            }
        }
        let bound = |v: &str| bindings.iter().find(|(n, _)| *n == v).map(|(_, b)| b);
        let target: Arc<[String]> = match target {
            Some(t) => t,
            None => self
                .vars
                .iter()
                .filter(|v| bound(v).is_none())
                .cloned()
                .collect::<Vec<_>>()
                .into(),
        };
        // Image of each source variable as a polynomial over `target`.
        let images = self
            .vars
            .iter()
            .map(|v| match bound(v) {
                Some(Binding::Value(c)) => Ok(MultiPoly::constant(&target, c.clone())),
                Some(Binding::Poly(p)) => Ok(p.clone()),
                None => target
                    .iter()
                    .position(|t| t == v)
                    .map(|i| MultiPoly::var(&target, i))
                    .ok_or_else(|| Error::VariableMismatch(format!("unbound variable `{v}` not in target list"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|p| vec![MultiPoly::constant(&target, Rational::ONE), p.clone()])
            .collect();
        let mut out = MultiPoly::zero(&target);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                let e = e as usize;
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Re-express over a larger variable list containing all current names.
    pub fn embed(&self, vars: &[String]) -> Result<MultiPoly> {
        let map = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|t| t == v)
                    .ok_or_else(|| Error::UnknownVariable(v.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = MultiPoly::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &k) in map.iter().enumerate() {
                e[k] = m.0[i];
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// View as a univariate polynomial in the variable at `index`; every
    /// other variable must be absent.
    pub fn to_univariate(&self, index: usize) -> Result<UniPoly> {
        let mut coeffs = vec![Rational::ZERO; self.degree_in(index) as usize + 1];
        for (m, c) in &self.terms {
            if m.0.iter().enumerate().any(|(i, &e)| i != index && e > 0) {
                return Err(Error::NotUnivariate);
            }
            coeffs[m.0[index] as usize] = c.clone();
        }
        Ok(UniPoly::new(coeffs))
    }

    /// Restriction to the line `base + λ·dir`, as a univariate polynomial in λ.
    pub fn restrict_to_line(&self, base: &[Rational], dir: &[Rational]) -> UniPoly {
        let lam = vec!["λ".to_string()];
        let images: Vec<(&str, Binding)> = self
            .vars
            .iter()
            .zip(base.iter().zip(dir))
            .map(|(v, (b, d))| {
                let p = MultiPoly::from_terms(&lam, [(vec![0], b.clone()), (vec![1], d.clone())]);
                (v.as_str(), Binding::Poly(p))
            })
            .collect();
        self.substitute(&images)
            .expect("line substitution is well formed")
            .to_univariate(0)
            .expect("result is univariate")
    }

    /// Canonical text: terms in descending graded-lex order.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = *c < Rational::ZERO;
            let abs = if negative { -c.clone() } else { c.clone() };
            match (k, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mono: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            self.vars[i].clone()
                        } else {
                            format!("{}^{}", self.vars[i], e)
                        }
                    })
                    .collect();
            if mono.is_empty() {
                out.push_str(&abs.to_string());
            } else if abs == Rational::ONE {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{}*{}", abs, mono.join("*")));
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.vars.join(","), self.to_text())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_vars(rhs);
        let mut out = MultiPoly::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rational::ONE)
    }
}

/// Cached powers `x_i^e` of a point, shared across many evaluations.
pub(crate) struct PowerTable<T> {
    powers: Vec<Vec<T>>,
}

impl<T: Field> PowerTable<T> {
    pub(crate) fn new(point: &[T], max_degrees: &[u32], ctx: &T::Ctx) -> Self {
        let powers = point
            .iter()
            .zip(max_degrees)
            .map(|(x, &d)| {
                let mut v = vec![T::one(ctx)];
                for k in 1..=d as usize {
                    v.push(v[k - 1].mul(x));
                }
                v
            })
            .collect();
        PowerTable { powers }
    }

    fn get(&self, var: usize, e: u32) -> &T {
        &self.powers[var][e as usize]
    }
}

/// A list of polynomials over one variable list, evaluated together.
#[derive(Clone, Debug)]
pub struct PolyMap {
    vars: Vec<String>,
    polys: Vec<MultiPoly>,
    max_degrees: Vec<u32>,
}

impl PolyMap {
    pub fn new(vars: &[String], polys: Vec<MultiPoly>) -> Result<Self> {
        for p in &polys {
            if p.vars() != vars {
                return Err(Error::VariableMismatch(format!(
                    "expected {:?}, found {:?}",
                    vars,
                    p.vars()
                )));
            }
        }
        let max_degrees = (0..vars.len())
            .map(|i| polys.iter().map(|p| p.degree_in(i)).max().unwrap_or(0))
            .collect();
        Ok(PolyMap {
            vars: vars.to_vec(),
            polys,
            max_degrees,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn polys(&self) -> &[MultiPoly] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn eval<T: Field>(&self, point: &[T], ctx: &T::Ctx) -> Vec<T> {
        let table = PowerTable::new(point, &self.max_degrees, ctx);
        self.polys.iter().map(|p| p.eval_with(&table, ctx)).collect()
    }

    /// Partial derivatives of every component in the `index`-th variable.
    pub fn partial(&self, index: usize) -> PolyMap {
        let polys = self.polys.iter().map(|p| p.partial_index(index)).collect();
        PolyMap::new(&self.vars, polys).expect("same variables")
    }
}

pub fn var_names(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn p(text: &str, vars: &[&str]) -> MultiPoly {
        parse_poly(text, &var_names(vars)).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let t3 = p("t^3", &["t"]);
        assert_eq!(t3.evaluate(&[("t", rat(2, 1))], &()).unwrap(), rat(8, 1));
        let xy = p("x*y + 3", &["x", "y"]);
        assert_eq!(
            xy.evaluate(&[("x", rat(2, 1)), ("y", rat(5, 1))], &()).unwrap(),
            rat(13, 1)
        );
        let seven = p("7", &["x"]);
        assert_eq!(seven.evaluate(&[("x", rat(-4, 9))], &()).unwrap(), rat(7, 1));
        assert_eq!(
            xy.evaluate(&[("x", rat(2, 1))], &()),
            Err(Error::MissingVariable("y".into()))
        );
    }

    #[test]
    fn partial_examples() {
        assert_eq!(p("t^3", &["t"]).partial("t").unwrap(), p("3*t^2", &["t"]));
        assert_eq!(p("x*y + 3", &["x", "y"]).partial("x").unwrap(), p("y", &["x", "y"]));
        assert!(p("7", &["x", "y"]).partial("y").unwrap().is_zero());
        assert_eq!(p("x", &["x"]).partial("z"), Err(Error::UnknownVariable("z".into())));
    }

    #[test]
    fn substitute_examples() {
        let ts = p("t*s - 1", &["t", "s"]);
        let out = ts.substitute(&[("s", Binding::Value(rat(2, 1)))]).unwrap();
        assert_eq!(out, p("2*t - 1", &["t"]));

        let t = p("t", &["t"]);
        let q = p("x^2 + y", &["x", "y"]);
        let out = q
            .substitute(&[("x", Binding::Poly(t.clone())), ("y", Binding::Poly(t.clone()))])
            .unwrap();
        assert_eq!(out, p("t^2 + t", &["t"]));

        let x = p("x", &["x"]);
        assert!(x.substitute(&[("x", Binding::Value(rat(0, 1)))]).unwrap().is_zero());
    }

    #[test]
    fn substitute_rejects_mixed_variable_lists() {
        let q = p("x + y", &["x", "y"]);
        let a = Binding::Poly(p("t", &["t"]));
        let b = Binding::Poly(p("u", &["u"]));
        assert!(matches!(
            q.substitute(&[("x", a), ("y", b)]),
            Err(Error::VariableMismatch(_))
        ));
    }

    #[test]
    fn canonical_text() {
        assert_eq!(p("1 - t^2", &["t"]).to_text(), "-t^2 + 1");
        assert_eq!(p("3/4*x*y^2 + x - 2", &["x", "y"]).to_text(), "3/4*x*y^2 + x - 2");
        assert_eq!(p("x - x", &["x"]).to_text(), "0");
    }

    #[test]
    fn line_restriction() {
        let f = p("x*z - y^2", &["x", "y", "z"]);
        // base (1,0,0) lies on the conic; λ = 0 is a root
        let u = f.restrict_to_line(&[rat(1, 1), rat(0, 1), rat(0, 1)], &[rat(0, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(u, UniPoly::new(vec![rat(0, 1), rat(1, 1), rat(-1, 1)]));
    }

    #[test]
    fn homogeneity() {
        assert!(p("x*z - y^2", &["x", "y", "z"]).is_homogeneous());
        assert!(!p("x*z - y", &["x", "y", "z"]).is_homogeneous());
        assert!(!MultiPoly::zero(&var_names(&["x"])).is_homogeneous());
    }
}
