//! Varieties with sampled cone tangent frames.
//!
//! Every variety exposes the same three things: a parameter space, a cone
//! tangent frame at given parameters (point first), and seeded samplers for
//! generic points and for points on linear sections. Parameters are whatever
//! determines a point: polynomial parameters for parametrized varieties,
//! ambient coordinates for hypersurfaces, with fiber coordinates appended for
//! conormal lifts.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;

use crate::conormal::ConormalLift;
use crate::error::{Error, Result};
use crate::legendrian::ReducedVariety;
use crate::linalg::{self, kernel_basis, rank_of_rows, Matrix, Solution};
use crate::poly::univariate::{isolate_uni, rational_roots, UniPoly};
use crate::poly::{Binding, MultiPoly, PolyMap};
use crate::rng::{self, Rng};
use crate::scalar::{convert_vec, primitive_rational, Approx, Backend, Field, Precision, Rational};

/// Cone tangent frame at a point: `vectors[0]` is the point itself.
#[derive(Clone, Debug)]
pub struct TangentFrame<T: Field> {
    pub params: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

impl<T: Field> TangentFrame<T> {
    pub fn point(&self) -> &[T] {
        &self.vectors[0]
    }

    pub fn rank(&self, ctx: &T::Ctx) -> usize {
        rank_of_rows(&self.vectors, ctx)
    }
}

/// Budgets for the samplers.
#[derive(Clone, Debug)]
pub struct SampleConfig {
    /// Bound on numerators and denominators of random rationals.
    pub height: u64,
    /// Draw attempts allowed per requested sample.
    pub attempts_per_sample: usize,
    /// Draws used to establish the generic frame rank.
    pub rank_probe: usize,
    /// Drop draws whose frame rank is below the generic rank.
    pub discard_deficient: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            height: 100,
            attempts_per_sample: 50,
            rank_probe: 20,
            discard_deficient: true,
        }
    }
}

/// Polynomial parametrization `t ↦ p(t)` of a cone.
#[derive(Clone, Debug)]
pub struct ParamVariety {
    name: String,
    params: Vec<String>,
    fiber: Vec<usize>,
    coords: PolyMap,
    partials: Vec<PolyMap>,
}

impl ParamVariety {
    pub fn new(name: &str, params: Vec<String>, fiber: &[&str], coords: Vec<MultiPoly>) -> Result<Self> {
        if coords.is_empty() || coords.iter().all(MultiPoly::is_zero) {
            return Err(Error::InvalidArgument("all coordinates are zero".into()));
        }
        let coords = PolyMap::new(&params, coords)?;
        let fiber = fiber
            .iter()
            .map(|f| {
                params
                    .iter()
                    .position(|p| p == f)
                    .ok_or_else(|| Error::UnknownVariable(f.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let partials = (0..params.len()).map(|i| coords.partial(i)).collect();
        let v = ParamVariety {
            name: name.to_string(),
            params,
            fiber,
            coords,
            partials,
        };
        if !v.jointly_affine(&v.fiber) {
            return Err(Error::InvalidArgument(
                "declared fiber parameters do not enter linearly".into(),
            ));
        }
        Ok(v)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn fiber_params(&self) -> Vec<String> {
        self.fiber.iter().map(|&i| self.params[i].clone()).collect()
    }

    pub fn coords(&self) -> &[MultiPoly] {
        self.coords.polys()
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    /// Point `p(t)` without the base-point check.
    pub fn point<T: Field>(&self, t: &[T], ctx: &T::Ctx) -> Vec<T> {
        self.coords.eval(t, ctx)
    }

    /// `{p(t)} ∪ {∂p/∂tᵢ(t)}`.
    pub fn cone_tangent_frame<T: Field>(&self, t: &[T], ctx: &T::Ctx) -> Result<TangentFrame<T>> {
        if t.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: t.len(),
            });
        }
        let p = self.coords.eval(t, ctx);
        if p.iter().all(Field::is_zero) {
            return Err(Error::BasePoint);
        }
        let mut vectors = vec![p];
        vectors.extend(self.partials.iter().map(|d| d.eval(t, ctx)));
        Ok(TangentFrame {
            params: t.to_vec(),
            vectors,
        })
    }

    pub fn jacobian_rank_at<T: Field>(&self, t: &[T], ctx: &T::Ctx) -> Result<usize> {
        Ok(self.cone_tangent_frame(t, ctx)?.rank(ctx))
    }

    /// Second partials `∂²p/∂tᵢ∂tⱼ` at `t`.
    pub fn second_partial<T: Field>(&self, i: usize, j: usize, t: &[T], ctx: &T::Ctx) -> Vec<T> {
        self.partials[i].partial(j).eval(t, ctx)
    }

    /// No monomial of any coordinate has total degree above one in `set`.
    fn jointly_affine(&self, set: &[usize]) -> bool {
        self.coords
            .polys()
            .iter()
            .all(|p| p.terms().all(|(m, _)| set.iter().map(|&i| m.0[i]).sum::<u32>() <= 1))
    }

    /// Up to `k` parameters that enter every coordinate jointly affinely,
    /// declared fiber parameters first.
    pub fn affine_set(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = self.fiber.clone();
        order.extend((0..self.params.len()).filter(|i| !self.fiber.contains(i)));
        let mut set = Vec::new();
        for i in order {
            if set.len() == k {
                break;
            }
            if self.coords.polys().iter().all(|p| p.degree_in(i) == 0) {
                continue;
            }
            set.push(i);
            if !self.jointly_affine(&set) {
                set.pop();
            }
        }
        set
    }

    fn random_params(&self, rng: &mut Rng, height: u64) -> Vec<Rational> {
        (0..self.params.len()).map(|_| rng::rational(rng, height)).collect()
    }

    /// Exact parameter values whose point satisfies `c·p(t) = 0` for every
    /// row `c`. `Ok(empty)` means an unlucky draw; `Err` means no strategy applies.
    pub fn draw_section(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
    ) -> Result<Vec<Vec<Rational>>> {
        let k = constraints.len();
        let mut t = self.random_params(rng, cfg.height);
        if k == 0 {
            return Ok(vec![t]);
        }
        let set = self.affine_set(k);
        if set.len() == k {
            // Linear in the affine parameters once the others are fixed.
            for &i in &set {
                t[i] = Rational::ZERO;
            }
            let p0 = self.coords.eval(&t, &());
            let cols: Vec<Vec<Rational>> = set.iter().map(|&i| self.partials[i].eval(&t, &())).collect();
            let m: Vec<Vec<Rational>> = constraints
                .iter()
                .map(|c| cols.iter().map(|col| linalg::dot(c, col)).collect())
                .collect();
            let b: Vec<Rational> = constraints.iter().map(|c| -linalg::dot(c, &p0)).collect();
            return Ok(match linalg::solve_linear(&Matrix::from_rows(m, k, &()), &b)? {
                Solution::Unique(x) => {
                    for (&i, v) in set.iter().zip(x) {
                        t[i] = v;
                    }
                    vec![t]
                }
                _ => Vec::new(),
            });
        }
        if k == 1 {
            let (free, g) = self.univariate_constraint(&constraints[0], &t)?;
            return Ok(rational_roots(&g)
                .into_iter()
                .map(|r| {
                    let mut u = t.clone();
                    u[free] = r;
                    u
                })
                .collect());
        }
        Err(Error::BudgetExhausted(format!(
            "no exact section strategy for {k} constraints on `{}`",
            self.name
        )))
    }

    /// Restrict `c·p` to the parameter of least positive degree, with the
    /// others fixed at `t`.
    fn univariate_constraint(&self, c: &[Rational], t: &[Rational]) -> Result<(usize, UniPoly)> {
        let mut g = MultiPoly::zero(&self.params);
        for (ci, p) in c.iter().zip(self.coords.polys()) {
            if *ci != Rational::ZERO {
                g = &g + &p.scale(ci);
            }
        }
        let free = (0..self.params.len())
            .filter(|&i| g.degree_in(i) > 0)
            .min_by_key(|&i| g.degree_in(i))
            .ok_or_else(|| Error::BudgetExhausted("constraint does not involve any parameter".into()))?;
        let bindings: Vec<(&str, Binding)> = self
            .params
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != free)
            .map(|(i, name)| (name.as_str(), Binding::Value(t[i].clone())))
            .collect();
        let u = g.substitute(&bindings)?.to_univariate(0)?;
        Ok((free, u))
    }

    /// Approximate section points: irrational roots of the univariate
    /// constraint refined at the working precision.
    pub fn draw_section_approx(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
        prec: Precision,
    ) -> Result<Vec<Vec<Approx>>> {
        if constraints.len() != 1 || self.affine_set(1).len() == 1 {
            let exact = self.draw_section(rng, constraints, cfg)?;
            return Ok(exact.iter().map(|t| convert_vec(&prec, t)).collect());
        }
        let t = self.random_params(rng, cfg.height);
        let (free, g) = self.univariate_constraint(&constraints[0], &t)?;
        if g.is_zero() {
            return Ok(Vec::new());
        }
        let iso = isolate_uni(&g, &crate::poly::univariate::default_width());
        Ok(iso
            .approximations(prec)
            .into_iter()
            .map(|r| {
                let mut u: Vec<Approx> = convert_vec(&prec, &t);
                u[free] = r;
                u
            })
            .collect())
    }
}

/// Hypersurface `Z = V(F) ⊂ P(W)` for a homogeneous `F`.
#[derive(Clone, Debug)]
pub struct ImplicitHypersurface {
    name: String,
    f: MultiPoly,
    gradient: PolyMap,
    hessian: Vec<PolyMap>,
    singular: Vec<Vec<Rational>>,
    pool: Vec<Vec<Rational>>,
}

impl ImplicitHypersurface {
    /// `singular` lists known singular points (kept as sampler seeds and
    /// probe inputs); each must satisfy `∇F = 0`.
    pub fn new(name: &str, f: MultiPoly, singular: Vec<Vec<Rational>>) -> Result<Self> {
        if !f.is_homogeneous() {
            return Err(Error::InvalidArgument(
                "equation must be homogeneous and nonzero".into(),
            ));
        }
        let vars = f.vars().to_vec();
        let gradient = PolyMap::new(&vars, f.gradient())?;
        let hessian = (0..vars.len()).map(|i| gradient.partial(i)).collect();
        let mut z = ImplicitHypersurface {
            name: name.to_string(),
            f,
            gradient,
            hessian,
            singular: Vec::new(),
            pool: Vec::new(),
        };
        for s in &singular {
            if s.len() != z.dim_w() || !z.gradient.eval(s, &()).iter().all(Field::is_zero) {
                return Err(Error::InvalidArgument("listed singular point is not singular".into()));
            }
        }
        z.singular = singular.iter().map(|s| primitive_rational(s)).collect();
        z.pool = z.rational_pool();
        Ok(z)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn equation(&self) -> &MultiPoly {
        &self.f
    }

    pub fn vars(&self) -> &[String] {
        self.f.vars()
    }

    pub fn dim_w(&self) -> usize {
        self.f.nvars()
    }

    pub fn singular_points(&self) -> &[Vec<Rational>] {
        &self.singular
    }

    pub fn value<T: Field>(&self, w: &[T], ctx: &T::Ctx) -> T {
        self.f.eval(w, ctx)
    }

    pub fn gradient_at<T: Field>(&self, w: &[T], ctx: &T::Ctx) -> Vec<T> {
        self.gradient.eval(w, ctx)
    }

    /// Hessian rows at `w`.
    pub fn hessian_at<T: Field>(&self, w: &[T], ctx: &T::Ctx) -> Vec<Vec<T>> {
        self.hessian.iter().map(|h| h.eval(w, ctx)).collect()
    }

    /// Whether `w` lies on `Z`: exact zero, or `|F(w)| < τ‖∇F(w)‖‖w‖` (max norms).
    pub fn contains<T: Field>(&self, w: &[T], ctx: &T::Ctx) -> bool {
        let v = self.value(w, ctx);
        if T::EXACT {
            return v.is_zero();
        }
        let g = self.gradient_at(w, ctx);
        let scale = max_abs(&g) * max_abs(w);
        v.abs_f64() <= T::tolerance_f64(ctx) * scale.max(1e-300) || v.is_zero()
    }

    /// `α = ∇F(w)`, which annihilates `w` and `T_w Ẑ`.
    pub fn conormal_covector<T: Field>(&self, w: &[T], ctx: &T::Ctx) -> Result<Vec<T>> {
        if w.len() != self.dim_w() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_w(),
                found: w.len(),
            });
        }
        if !self.contains(w, ctx) {
            return Err(Error::NotOnVariety(self.name.clone()));
        }
        let g = self.gradient_at(w, ctx);
        if g.iter().all(Field::is_zero) {
            return Err(Error::SingularPoint);
        }
        Ok(g)
    }

    /// Cone tangent frame `{w} ∪ ker ∇F(w)`.
    pub fn cone_tangent_frame<T: Field>(&self, w: &[T], ctx: &T::Ctx) -> Result<TangentFrame<T>> {
        let g = self.conormal_covector(w, ctx)?;
        let mut vectors = vec![w.to_vec()];
        vectors.extend(kernel_basis(&Matrix::from_rows(vec![g], w.len(), ctx)));
        Ok(TangentFrame {
            params: w.to_vec(),
            vectors,
        })
    }

    /// Small rational points: the listed singular points plus an exhaustive
    /// search over a small integer box.
    fn rational_pool(&self) -> Vec<Vec<Rational>> {
        let d = self.dim_w();
        let bound: i64 = match d {
            0..=4 => 2,
            5..=7 => 1,
            _ => 0,
        };
        let mut pool: Vec<Vec<Rational>> = self.singular.clone();
        let mut seen: HashSet<Vec<Rational>> = pool.iter().cloned().collect();
        if bound > 0 {
            let side = (2 * bound + 1) as usize;
            for code in 0..side.pow(d as u32) {
                let mut c = code;
                let v: Vec<Rational> = (0..d)
                    .map(|_| {
                        let x = (c % side) as i64 - bound;
                        c /= side;
                        Rational::from(x)
                    })
                    .collect();
                if v.iter().all(|x| *x == Rational::ZERO) || !self.value(&v, &()).is_zero() {
                    continue;
                }
                let p = primitive_rational(&v);
                if seen.insert(p.clone()) {
                    pool.push(p);
                }
            }
        }
        pool
    }

    /// One exact point: a line through a known rational point meets `Z` in
    /// the roots of a univariate polynomial; the known root is divided out.
    pub fn draw_exact(&self, rng: &mut Rng, cfg: &SampleConfig) -> Result<Vec<Vec<Rational>>> {
        if self.pool.is_empty() {
            return Err(Error::BudgetExhausted(format!(
                "no rational points known on `{}`",
                self.name
            )));
        }
        let base = &self.pool[rng.gen_range(0..self.pool.len())];
        let bound = cfg.height.clamp(1, 20) as i64;
        let dir = rng::integer_vector(rng, self.dim_w(), bound);
        let u = self.f.restrict_to_line(base, &dir);
        let shift = u.coeffs().iter().take_while(|c| **c == Rational::ZERO).count();
        if u.is_zero() {
            return Ok(Vec::new());
        }
        let g = UniPoly::new(u.coeffs()[shift..].to_vec());
        Ok(rational_roots(&g)
            .into_iter()
            .filter(|r| *r != Rational::ZERO)
            .map(|r| {
                let v: Vec<Rational> = base.iter().zip(&dir).map(|(b, d)| b + &r * d).collect();
                primitive_rational(&v)
            })
            .filter(|v| v.iter().any(|x| *x != Rational::ZERO))
            .collect())
    }

    /// Approximate points from random rational lines, normalized to max-norm 1.
    pub fn draw_approx(&self, rng: &mut Rng, prec: Precision) -> Vec<Vec<Approx>> {
        let d = self.dim_w();
        let base = rng::integer_vector(rng, d, 9);
        let dir = rng::integer_vector(rng, d, 9);
        let u = self.f.restrict_to_line(&base, &dir);
        if u.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let iso = isolate_uni(&u, &crate::poly::univariate::default_width());
        iso.approximations(prec)
            .into_iter()
            .filter_map(|lam| {
                let w: Vec<Approx> = base
                    .iter()
                    .zip(&dir)
                    .map(|(b, dd)| Approx::from_rational(&prec, b).add(&lam.mul(&Approx::from_rational(&prec, dd))))
                    .collect();
                let w = normalize_max(&w, &prec)?;
                self.contains(&w, &prec).then_some(w)
            })
            .collect()
    }

    /// `count` points on `Z`; the exact backend returns only rational points.
    pub fn sample_points_exact(&self, count: usize, seed: u64, cfg: &SampleConfig) -> Result<Vec<Vec<Rational>>> {
        if count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        let mut rng = rng::stream(seed, "hypersurface");
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for _ in 0..count * cfg.attempts_per_sample {
            for p in self.draw_exact(&mut rng, cfg)? {
                if seen.insert(p.clone()) {
                    out.push(p);
                }
            }
            if out.len() >= count {
                out.truncate(count);
                return Ok(out);
            }
        }
        Err(Error::BudgetExhausted(format!(
            "found {} of {count} rational points on `{}`",
            out.len(),
            self.name
        )))
    }

    pub fn sample_points_approx(
        &self,
        count: usize,
        seed: u64,
        prec: Precision,
        cfg: &SampleConfig,
    ) -> Result<Vec<Vec<Approx>>> {
        if count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        let mut rng = rng::stream(seed, "hypersurface");
        let mut out = Vec::new();
        for _ in 0..count * cfg.attempts_per_sample {
            out.extend(self.draw_approx(&mut rng, prec));
            if out.len() >= count {
                out.truncate(count);
                return Ok(out);
            }
        }
        Err(Error::BudgetExhausted(format!("found {} of {count} points", out.len())))
    }
}

pub(crate) fn max_abs<T: Field>(v: &[T]) -> f64 {
    v.iter().map(Field::abs_f64).fold(0.0, f64::max)
}

/// Scale to max-norm 1, or `None` for a vector that is zero within tolerance.
pub(crate) fn normalize_max(v: &[Approx], prec: &Precision) -> Option<Vec<Approx>> {
    let big = v.iter().max_by(|a, b| a.cmp_abs(b))?.clone();
    if big.is_zero() {
        return None;
    }
    let inv = Approx::one(prec).div(&big.abs());
    Some(v.iter().map(|x| x.mul(&inv)).collect())
}

/// The sum type of everything that can be sampled and verified.
#[derive(Clone, Debug)]
pub enum Variety {
    Param(Arc<ParamVariety>),
    Hypersurface(Arc<ImplicitHypersurface>),
    Conormal(Arc<ConormalLift>),
    Reduced(Arc<ReducedVariety>),
}

impl Variety {
    pub fn name(&self) -> String {
        match self {
            Variety::Param(p) => p.name.clone(),
            Variety::Hypersurface(h) => h.name.clone(),
            Variety::Conormal(c) => c.name().to_string(),
            Variety::Reduced(r) => r.name().to_string(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Variety::Param(p) => p.ambient_dim(),
            Variety::Hypersurface(h) => h.dim_w(),
            Variety::Conormal(c) => c.ambient_dim(),
            Variety::Reduced(r) => r.ambient_dim(),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            Variety::Param(p) => p.params.clone(),
            Variety::Hypersurface(h) => h.vars().to_vec(),
            Variety::Conormal(c) => c.param_names(),
            Variety::Reduced(r) => r.source().param_names(),
        }
    }

    pub fn frame_at<T: Field>(&self, params: &[T], ctx: &T::Ctx) -> Result<TangentFrame<T>> {
        match self {
            Variety::Param(p) => p.cone_tangent_frame(params, ctx),
            Variety::Hypersurface(h) => h.cone_tangent_frame(params, ctx),
            Variety::Conormal(c) => c.lift_tangent_frame(params, ctx),
            Variety::Reduced(r) => r.frame_at(params, ctx),
        }
    }

    /// Exact parameters of points satisfying `c·x = 0` for every row `c`
    /// (with no rows, one generic draw).
    pub fn draw_section(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
    ) -> Result<Vec<Vec<Rational>>> {
        match self {
            Variety::Param(p) => p.draw_section(rng, constraints, cfg),
            Variety::Hypersurface(h) => {
                if !constraints.is_empty() {
                    return Err(Error::BudgetExhausted(
                        "sections of implicit hypersurfaces are not sampled".into(),
                    ));
                }
                h.draw_exact(rng, cfg)
            }
            Variety::Conormal(c) => c.draw_section(rng, constraints, cfg),
            Variety::Reduced(r) => r.draw_section(rng, constraints, cfg),
        }
    }

    pub fn draw_section_approx(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
        prec: Precision,
    ) -> Result<Vec<Vec<Approx>>> {
        match self {
            Variety::Param(p) => p.draw_section_approx(rng, constraints, cfg, prec),
            Variety::Hypersurface(h) => {
                if !constraints.is_empty() {
                    return Err(Error::BudgetExhausted(
                        "sections of implicit hypersurfaces are not sampled".into(),
                    ));
                }
                Ok(h.draw_approx(rng, prec))
            }
            Variety::Conormal(c) => c.draw_section_approx(rng, constraints, cfg, prec),
            Variety::Reduced(r) => r.draw_section_approx(rng, constraints, cfg, prec),
        }
    }

    /// Known exact parameters to try before random draws.
    pub fn anchors(&self) -> Vec<Vec<Rational>> {
        match self {
            Variety::Reduced(r) => r.anchors_on_variety(),
            _ => Vec::new(),
        }
    }

    /// Largest number of linear conditions that exact section sampling can
    /// impose on this variety.
    pub fn section_capacity(&self) -> usize {
        match self {
            Variety::Param(p) => p.affine_set(usize::MAX).len().max(1),
            Variety::Hypersurface(_) => 0,
            Variety::Conormal(c) => c.section_capacity(),
            Variety::Reduced(r) => r.source().section_capacity().saturating_sub(1),
        }
    }

    /// Generic rank the frames should have when the variety is Legendrian:
    /// half the ambient dimension.
    pub fn lagrangian_rank(&self) -> usize {
        self.ambient_dim() / 2
    }
}

/// Backends that can drive the samplers.
pub trait SampleScalar: Field {
    fn draw(v: &Variety, rng: &mut Rng, cfg: &SampleConfig, ctx: &Self::Ctx) -> Result<Vec<Vec<Self>>>;
    fn convert(ctx: &Self::Ctx, v: &[Rational]) -> Vec<Self> {
        convert_vec(ctx, v)
    }
    fn key(v: &[Self]) -> Option<Vec<String>>;
    fn backend(ctx: &Self::Ctx) -> Backend;
}

impl SampleScalar for Rational {
    fn draw(v: &Variety, rng: &mut Rng, cfg: &SampleConfig, _: &()) -> Result<Vec<Vec<Rational>>> {
        v.draw_section(rng, &[], cfg)
    }

    fn key(v: &[Rational]) -> Option<Vec<String>> {
        Some(v.iter().map(|x| x.to_string()).collect())
    }

    fn backend(_: &()) -> Backend {
        Backend::Exact
    }
}

impl SampleScalar for Approx {
    fn draw(v: &Variety, rng: &mut Rng, cfg: &SampleConfig, ctx: &Precision) -> Result<Vec<Vec<Approx>>> {
        v.draw_section_approx(rng, &[], cfg, *ctx)
    }

    fn key(_: &[Approx]) -> Option<Vec<String>> {
        None
    }

    fn backend(ctx: &Precision) -> Backend {
        Backend::Approx {
            precision_bits: ctx.bits,
        }
    }
}

/// A sampled point with its frame.
#[derive(Clone, Debug)]
pub struct Sample<T: Field> {
    pub frame: TangentFrame<T>,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct SampleSet<T: Field> {
    pub samples: Vec<Sample<T>>,
    /// Most frequent rank among the probe draws.
    pub generic_rank: usize,
    /// Rank histogram of every evaluated draw.
    pub histogram: BTreeMap<usize, usize>,
    pub discarded: usize,
    /// Set when the sampler ran out of draws before reaching the count.
    pub shortfall: Option<String>,
}

/// Seeded sampler: draws are generated sequentially from one stream and their
/// frames evaluated in parallel, so results do not depend on thread count.
///
/// With `strict`, fewer than `count` samples is an error; otherwise any
/// nonzero number of samples is returned with the shortfall recorded.
pub fn sample<T: SampleScalar>(
    v: &Variety,
    count: usize,
    seed: u64,
    cfg: &SampleConfig,
    ctx: &T::Ctx,
    strict: bool,
) -> Result<SampleSet<T>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, "points");
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut pending: Vec<Vec<T>> = v.anchors().iter().map(|a| T::convert(ctx, a)).collect();
    let mut evaluated: Vec<Sample<T>> = Vec::new();
    let mut histogram = BTreeMap::new();
    let mut generic_rank: Option<usize> = None;
    let mut accepted: Vec<Sample<T>> = Vec::new();
    let mut discarded = 0;
    let mut attempts = 0;
    let budget = count.max(cfg.rank_probe) * cfg.attempts_per_sample;
    let mut shortfall = None;
    loop {
        // Top up the pending batch from the stream.
        let want = if generic_rank.is_none() {
            cfg.rank_probe.max(1)
        } else {
            count - accepted.len()
        };
        while pending.len() < want && attempts < budget {
            attempts += 1;
            match T::draw(v, &mut rng, cfg, ctx) {
                Ok(cands) => pending.extend(cands),
                Err(e) => {
                    shortfall = Some(e.to_string());
                    attempts = budget;
                }
            }
        }
        if pending.is_empty() {
            break;
        }
        let batch: Vec<Vec<T>> = std::mem::take(&mut pending)
            .into_iter()
            .filter(|p| match T::key(p) {
                Some(k) => seen.insert(k),
                None => true,
            })
            .collect();
        let frames: Vec<Option<Sample<T>>> = batch
            .par_iter()
            .map(|p| {
                let frame = v.frame_at(p, ctx).ok()?;
                let rank = frame.rank(ctx);
                Some(Sample { frame, rank })
            })
            .collect();
        for s in frames.into_iter().flatten() {
            *histogram.entry(s.rank).or_insert(0) += 1;
            evaluated.push(s);
        }
        if generic_rank.is_none() {
            if evaluated.len() < cfg.rank_probe && attempts < budget {
                continue;
            }
            let mode = histogram
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
                .map(|(r, _)| *r);
            let Some(mode) = mode else { break };
            generic_rank = Some(mode);
        }
        let g = generic_rank.expect("set above");
        for s in evaluated.drain(..) {
            if accepted.len() == count {
                break;
            }
            if cfg.discard_deficient && s.rank < g {
                discarded += 1;
            } else {
                accepted.push(s);
            }
        }
        if accepted.len() == count || attempts >= budget {
            break;
        }
    }
    let generic_rank = generic_rank.unwrap_or(0);
    if accepted.is_empty() || (strict && accepted.len() < count) {
        return Err(Error::BudgetExhausted(format!(
            "{} of {count} samples on `{}`{}",
            accepted.len(),
            v.name(),
            shortfall.map(|s| format!(" ({s})")).unwrap_or_default()
        )));
    }
    if accepted.len() < count && shortfall.is_none() {
        shortfall = Some(format!("{} of {count} samples found", accepted.len()));
    }
    Ok(SampleSet {
        samples: accepted,
        generic_rank,
        histogram,
        discarded,
        shortfall,
    })
}

/// Strict exact sampler for parametrized varieties: `count` parameter
/// assignments with heights bounded by `height`.
pub fn sample_points(v: &ParamVariety, count: usize, seed: u64, height: u64) -> Result<Vec<Vec<Rational>>> {
    let cfg = SampleConfig {
        height,
        ..SampleConfig::default()
    };
    let var = Variety::Param(Arc::new(v.clone()));
    let set = sample::<Rational>(&var, count, seed, &cfg, &(), true)?;
    Ok(set.samples.into_iter().map(|s| s.frame.params).collect())
}

/// Projective dimension estimate with its rank histogram.
#[derive(Clone, Debug)]
pub struct DimensionEstimate {
    pub dimension: Option<usize>,
    pub histogram: BTreeMap<usize, usize>,
    pub samples: usize,
}

/// `(max frame rank over samples) - 1`.
pub fn dimension_estimate(v: &Variety, nsamples: usize, seed: u64) -> DimensionEstimate {
    let cfg = SampleConfig {
        discard_deficient: false,
        rank_probe: nsamples.min(20),
        ..SampleConfig::default()
    };
    match sample::<Rational>(v, nsamples, seed, &cfg, &(), false) {
        Ok(set) => DimensionEstimate {
            dimension: set.samples.iter().map(|s| s.rank).max().map(|r| r.saturating_sub(1)),
            histogram: set.histogram,
            samples: set.samples.len(),
        },
        Err(_) => DimensionEstimate {
            dimension: None,
            histogram: BTreeMap::new(),
            samples: 0,
        },
    }
}

/// Approximate-backend variant of [`dimension_estimate`].
pub fn dimension_estimate_approx(v: &Variety, nsamples: usize, seed: u64, prec: Precision) -> DimensionEstimate {
    let cfg = SampleConfig {
        discard_deficient: false,
        rank_probe: nsamples.min(20),
        ..SampleConfig::default()
    };
    match sample::<Approx>(v, nsamples, seed, &cfg, &prec, false) {
        Ok(set) => DimensionEstimate {
            dimension: set.samples.iter().map(|s| s.rank).max().map(|r| r.saturating_sub(1)),
            histogram: set.histogram,
            samples: set.samples.len(),
        },
        Err(_) => DimensionEstimate {
            dimension: None,
            histogram: BTreeMap::new(),
            samples: 0,
        },
    }
}

/// Particular solution of `A x = b` (free variables set to zero), or `None`
/// if inconsistent. Works on either backend.
pub(crate) fn particular_solution<T: Field>(a: &[Vec<T>], b: &[T], cols: usize, ctx: &T::Ctx) -> Option<Vec<T>> {
    let rows: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let ech = T::reduce(&Matrix::from_rows(rows, cols + 1, ctx));
    if ech.pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![T::zero(ctx); cols];
    for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
        x[p] = row[cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, var_names};
    use crate::scalar::rat;

    fn cubic() -> ParamVariety {
        let t = var_names(&["t"]);
        let coords = ["1", "t", "t^2", "t^3"]
            .iter()
            .map(|c| parse_poly(c, &t).unwrap())
            .collect();
        ParamVariety::new("twisted_cubic", t, &[], coords).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn twisted_cubic_frame_and_rank() {
        let x = cubic();
        let f = x.cone_tangent_frame(&[rat(2, 1)], &()).unwrap();
        assert_eq!(f.vectors, vec![ints(&[1, 2, 4, 8]), ints(&[0, 1, 4, 12])]);
        assert_eq!(x.jacobian_rank_at(&[rat(1, 1)], &()).unwrap(), 2);
    }

    #[test]
    fn base_points_are_rejected() {
        let t = var_names(&["t"]);
        let coords = vec![parse_poly("t", &t).unwrap(), parse_poly("t^2", &t).unwrap()];
        let x = ParamVariety::new("line", t, &[], coords).unwrap();
        assert!(matches!(x.cone_tangent_frame(&[rat(0, 1)], &()), Err(Error::BasePoint)));
    }

    #[test]
    fn constant_map_has_rank_one() {
        let t = var_names(&["t"]);
        let coords = vec![parse_poly("1", &t).unwrap(), MultiPoly::zero(&t)];
        let x = ParamVariety::new("e0", t, &[], coords).unwrap();
        assert_eq!(x.jacobian_rank_at(&[rat(5, 1)], &()).unwrap(), 1);
    }

    #[test]
    fn sampler_is_deterministic() {
        let x = cubic();
        let a = sample_points(&x, 5, 42, 100).unwrap();
        let b = sample_points(&x, 5, 42, 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        let small = sample_points(&x, 3, 1, 1).unwrap();
        assert_eq!(small.len(), 3);
        assert!(sample_points(&x, 0, 1, 100).is_err());
    }

    #[test]
    fn twisted_cubic_dimension() {
        let est = dimension_estimate(&Variety::Param(Arc::new(cubic())), 20, 3);
        assert_eq!(est.dimension, Some(1));
    }

    fn nodal() -> ImplicitHypersurface {
        let f = parse_poly("z*y^2 - x^3 - x^2*z", &var_names(&["x", "y", "z"])).unwrap();
        ImplicitHypersurface::new("nodal_cubic", f, vec![ints(&[0, 0, 1])]).unwrap()
    }

    #[test]
    fn conormal_covectors() {
        let conic = parse_poly("x0*x2 - x1^2", &var_names(&["x0", "x1", "x2"])).unwrap();
        let z = ImplicitHypersurface::new("conic", conic, vec![]).unwrap();
        let a = z.conormal_covector(&ints(&[1, 2, 4]), &()).unwrap();
        assert_eq!(a, ints(&[4, -4, 1]));
        let n = nodal();
        assert_eq!(n.conormal_covector(&ints(&[0, 0, 1]), &()), Err(Error::SingularPoint));
        let a = n.conormal_covector(&ints(&[3, 6, 1]), &()).unwrap();
        assert_eq!(a, ints(&[-33, 12, 27]));
        assert_eq!(linalg::dot(&a, &ints(&[3, 6, 1])), rat(0, 1));
        assert!(matches!(
            n.conormal_covector(&ints(&[1, 1, 1]), &()),
            Err(Error::NotOnVariety(_))
        ));
    }

    #[test]
    fn exact_hypersurface_points() {
        let n = nodal();
        let pts = n.sample_points_exact(10, 5, &SampleConfig::default()).unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            assert_eq!(n.value(p, &()), rat(0, 1));
        }
    }

    #[test]
    fn approx_hypersurface_points() {
        let f = parse_poly("x^4 + y^4 + z^4 - w^4", &var_names(&["x", "y", "z", "w"])).unwrap();
        let z = ImplicitHypersurface::new("fermat", f, vec![]).unwrap();
        let prec = Precision::new(100);
        let pts = z.sample_points_approx(5, 1, prec, &SampleConfig::default()).unwrap();
        for p in &pts {
            assert!(z.value(p, &prec).abs_f64() < 2f64.powi(-50));
        }
    }

    #[test]
    fn affine_sets() {
        let ts = var_names(&["t", "s"]);
        let coords = ["1", "t", "t^2", "s*t^2", "-2*s*t", "s"]
            .iter()
            .map(|c| parse_poly(c, &ts).unwrap())
            .collect();
        let x = ParamVariety::new("conic_lift", ts.clone(), &["s"], coords).unwrap();
        assert_eq!(x.affine_set(1), vec![1]);
        let bad = vec![parse_poly("s^2", &ts).unwrap()];
        assert!(ParamVariety::new("bad", ts, &["s"], bad).is_err());
    }
}
