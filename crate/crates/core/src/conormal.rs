//! Conormal lifts `Z ⊂ P(W)` to `X ⊂ P(W ⊕ W*)`.
//!
//! Lift points are `(w, α)` with `α` annihilating the cone tangent space of
//! `Z` at `w`. The relative scale of `α` is an explicit fiber parameter, so
//! sections by hyperplanes become linear in it. Coordinates on `W ⊕ W*` are
//! `(x₀..xₙ, y⁰..yⁿ)` and the attached form is `ω((w₁,α₁),(w₂,α₂)) = α₂(w₁) − α₁(w₂)`.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::legendrian::{hyperplane_reduce_with_chart, section_sampler, ReducedVariety};
use crate::linalg::{self, kernel_basis, rank_of_rows, Matrix, Solution};
use crate::poly::PolyMap;
use crate::report::{
    strings, AgreementReport, AgreementWitness, LiftReport, ProbeEntry, SingularityReport, Verdict, SCHEMA_VERSION,
};
use crate::rng::{self, Rng};
use crate::scalar::{convert_vec, primitive_rational, Approx, Field, Precision, Rational};
use crate::symplectic::{induced_form_with_basis, Hyperplane, QuotientChart, SymplecticForm};
use crate::variety::{
    max_abs, particular_solution, sample, ImplicitHypersurface, ParamVariety, SampleConfig, SampleScalar, TangentFrame,
    Variety,
};

/// Rows of vectors: a frame or a basis.
type Rows<T> = Vec<Vec<T>>;

#[derive(Clone, Debug)]
pub enum LiftSource {
    Param(Arc<ParamVariety>),
    Hypersurface(Arc<ImplicitHypersurface>),
}

#[derive(Clone, Debug)]
pub struct ConormalLift {
    name: String,
    source: LiftSource,
    w_dim: usize,
    /// Number of fiber scale parameters (the codimension of `Z`).
    codim: usize,
    form: SymplecticForm,
    names: Vec<String>,
    /// `∂²p/∂tₖ∂tₗ` for parametrized sources.
    second: Vec<Vec<PolyMap>>,
}

/// Build the lift of a parametrized variety or hypersurface.
pub fn build_conormal_lift(z: &Variety) -> Result<ConormalLift> {
    match z {
        Variety::Param(p) => {
            let est = crate::variety::dimension_estimate(z, 20, 0);
            let rank = est
                .dimension
                .map(|d| d + 1)
                .ok_or_else(|| Error::DegenerateSource(format!("`{}` could not be sampled", p.name())))?;
            let w_dim = p.ambient_dim();
            if rank >= w_dim {
                return Err(Error::DegenerateSource(format!(
                    "`{}` fills its ambient space",
                    p.name()
                )));
            }
            let codim = w_dim - rank;
            let mut names = p.params().to_vec();
            let base = if names.iter().any(|n| n.starts_with('s')) {
                "s_"
            } else {
                "s"
            };
            if codim == 1 {
                names.push(base.to_string());
            } else {
                names.extend((1..=codim).map(|j| format!("{base}{j}")));
            }
            let m = p.params().len();
            let partials: Vec<PolyMap> = (0..m)
                .map(|i| PolyMap::new(p.params(), p.coords().to_vec()).map(|pm| pm.partial(i)))
                .collect::<Result<_>>()?;
            let second = partials
                .iter()
                .map(|d| (0..m).map(|l| d.partial(l)).collect())
                .collect();
            Ok(ConormalLift {
                name: format!("conormal({})", p.name()),
                source: LiftSource::Param(p.clone()),
                w_dim,
                codim,
                form: SymplecticForm::standard(w_dim)?,
                names,
                second,
            })
        }
        Variety::Hypersurface(h) => {
            if h.equation().total_degree() == 0 {
                return Err(Error::DegenerateSource("constant equation".into()));
            }
            let mut names = h.vars().to_vec();
            names.push(if names.iter().any(|n| n == "s") {
                "s_".into()
            } else {
                "s".into()
            });
            Ok(ConormalLift {
                name: format!("conormal({})", h.name()),
                source: LiftSource::Hypersurface(h.clone()),
                w_dim: h.dim_w(),
                codim: 1,
                form: SymplecticForm::standard(h.dim_w())?,
                names,
                second: Vec::new(),
            })
        }
        _ => Err(Error::DegenerateSource(
            "lifts are built from parametrized varieties or hypersurfaces".into(),
        )),
    }
}

impl ConormalLift {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Rename (catalog entries use their own names).
    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn source(&self) -> &LiftSource {
        &self.source
    }

    pub fn w_dim(&self) -> usize {
        self.w_dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.w_dim
    }

    /// The split form on `W ⊕ W*`.
    pub fn form(&self) -> &SymplecticForm {
        &self.form
    }

    pub fn param_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn split_params<'a, T>(&self, params: &'a [T]) -> Result<(&'a [T], &'a [T])> {
        if params.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                found: params.len(),
            });
        }
        Ok(params.split_at(self.names.len() - self.codim))
    }

    /// Source frame `J = {p, ∂p}` and conormal basis `β` at `t`.
    fn param_data<T: Field>(&self, p: &ParamVariety, t: &[T], ctx: &T::Ctx) -> Result<(Rows<T>, Rows<T>)> {
        let frame = p.cone_tangent_frame(t, ctx)?;
        let j = frame.vectors;
        let beta = kernel_basis(&Matrix::from_rows(j.clone(), self.w_dim, ctx));
        if beta.len() != self.codim {
            return Err(Error::SingularPoint);
        }
        Ok((j, beta))
    }

    /// `α̇ₖ` with `J α̇ₖ = −(∂ₖJ) α`.
    fn alpha_dot<T: Field>(&self, j: &[Vec<T>], alpha: &[T], k: usize, t: &[T], ctx: &T::Ctx) -> Result<Vec<T>> {
        let mut dj = vec![j[k + 1].clone()];
        dj.extend(self.second[k].iter().map(|d| d.eval(t, ctx)));
        let rhs: Vec<T> = dj.iter().map(|r| linalg::dot(r, alpha).neg()).collect();
        particular_solution(j, &rhs, self.w_dim, ctx).ok_or(Error::SingularPoint)
    }

    /// Point `(w, α)` at the given parameters.
    pub fn lift_point<T: Field>(&self, params: &[T], ctx: &T::Ctx) -> Result<Vec<T>> {
        Ok(self.lift_tangent_frame(params, ctx)?.vectors.swap_remove(0))
    }

    /// Frame spanning `T Ẑ ⊕ N*`, point first.
    pub fn lift_tangent_frame<T: Field>(&self, params: &[T], ctx: &T::Ctx) -> Result<TangentFrame<T>> {
        let (t, s) = self.split_params(params)?;
        let zero = vec![T::zero(ctx); self.w_dim];
        let join = |a: &[T], b: &[T]| -> Vec<T> { a.iter().chain(b).cloned().collect() };
        let vectors = match &self.source {
            LiftSource::Param(p) => {
                let (j, beta) = self.param_data(p, t, ctx)?;
                let alpha = combine(&beta, s, ctx);
                let mut vectors = vec![join(&j[0], &alpha)];
                for k in 0..t.len() {
                    let ad = self.alpha_dot(&j, &alpha, k, t, ctx)?;
                    vectors.push(join(&j[k + 1], &ad));
                }
                vectors.extend(beta.iter().map(|b| join(&zero, b)));
                vectors
            }
            LiftSource::Hypersurface(h) => {
                let alpha = h.conormal_covector(t, ctx)?;
                let hess = h.hessian_at(t, ctx);
                let scale = |v: &[T]| -> Vec<T> { v.iter().map(|x| x.mul(&s[0])).collect() };
                let mut vectors = vec![join(t, &scale(&alpha))];
                for wd in kernel_basis(&Matrix::from_rows(vec![alpha.clone()], self.w_dim, ctx)) {
                    let hw: Vec<T> = hess.iter().map(|r| linalg::dot(r, &wd)).collect();
                    vectors.push(join(&wd, &scale(&hw)));
                }
                vectors.push(join(&zero, &alpha));
                vectors
            }
        };
        if vectors[0].iter().all(Field::is_zero) {
            return Err(Error::BasePoint);
        }
        Ok(TangentFrame {
            params: params.to_vec(),
            vectors,
        })
    }

    /// Largest number of linear conditions exact section sampling can impose.
    pub fn section_capacity(&self) -> usize {
        self.codim
    }

    fn random_scales(&self, rng: &mut Rng, height: u64) -> Vec<Rational> {
        (0..self.codim).map(|_| rng::nonzero_rational(rng, height)).collect()
    }

    pub fn draw_section(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
    ) -> Result<Vec<Vec<Rational>>> {
        let k = constraints.len();
        if k > self.codim {
            return Err(Error::BudgetExhausted(format!(
                "no exact section strategy for {k} constraints on `{}`",
                self.name
            )));
        }
        let bases: Vec<(Vec<Rational>, Vec<Rational>, Rows<Rational>)> = match &self.source {
            LiftSource::Param(p) => {
                let t: Vec<Rational> = (0..p.params().len()).map(|_| rng::rational(rng, cfg.height)).collect();
                match self.param_data(p, &t, &()) {
                    Ok((j, beta)) => vec![(t, j[0].clone(), beta)],
                    Err(Error::BasePoint | Error::SingularPoint) => Vec::new(),
                    Err(e) => return Err(e),
                }
            }
            LiftSource::Hypersurface(h) => h
                .draw_exact(rng, cfg)?
                .into_iter()
                .filter_map(|w| {
                    let a = h.conormal_covector(&w, &()).ok()?;
                    Some((w.clone(), w, vec![a]))
                })
                .collect(),
        };
        let mut out = Vec::new();
        for (t, w, beta) in bases {
            let mut s = self.random_scales(rng, cfg.height);
            if k > 0 {
                // c·(w, Σ sⱼβⱼ) = 0 is linear in the first k scales.
                let n = self.w_dim;
                let rows: Vec<Vec<Rational>> = constraints
                    .iter()
                    .map(|c| beta[..k].iter().map(|b| linalg::dot(&c[n..], b)).collect())
                    .collect();
                let rhs: Vec<Rational> = constraints
                    .iter()
                    .map(|c| {
                        let fixed = beta[k..]
                            .iter()
                            .zip(&s[k..])
                            .map(|(b, sj)| linalg::dot(&c[n..], b) * sj)
                            .fold(Rational::ZERO, |acc, x| acc + x);
                        -(linalg::dot(&c[..n], &w) + fixed)
                    })
                    .collect();
                match linalg::solve_linear(&Matrix::from_rows(rows, k, &()), &rhs)? {
                    Solution::Unique(x) => s[..k].clone_from_slice(&x),
                    _ => continue,
                }
            }
            out.push(t.into_iter().chain(s).collect());
        }
        Ok(out)
    }

    pub fn draw_section_approx(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
        prec: Precision,
    ) -> Result<Vec<Vec<Approx>>> {
        let LiftSource::Hypersurface(h) = &self.source else {
            let exact = self.draw_section(rng, constraints, cfg)?;
            return Ok(exact.iter().map(|p| convert_vec(&prec, p)).collect());
        };
        let k = constraints.len();
        if k > 1 {
            return Err(Error::BudgetExhausted(format!(
                "no section strategy for {k} constraints on `{}`",
                self.name
            )));
        }
        let n = self.w_dim;
        let mut out = Vec::new();
        for w in h.draw_approx(rng, prec) {
            let Ok(alpha) = h.conormal_covector(&w, &prec) else {
                continue;
            };
            let s = if k == 0 {
                Approx::from_rational(&prec, &rng::nonzero_rational(rng, cfg.height))
            } else {
                let c: Vec<Approx> = convert_vec(&prec, &constraints[0]);
                let den = linalg::dot(&c[n..], &alpha);
                if den.is_zero() {
                    continue;
                }
                linalg::dot(&c[..n], &w).neg().div(&den)
            };
            let mut p = w;
            p.push(s);
            out.push(p);
        }
        Ok(out)
    }
}

fn combine<T: Field>(basis: &[Vec<T>], coeffs: &[T], ctx: &T::Ctx) -> Vec<T> {
    let n = basis.first().map_or(0, Vec::len);
    let mut out = vec![T::zero(ctx); n];
    for (b, c) in basis.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(b) {
            *o = o.add(&x.mul(c));
        }
    }
    out
}

/// `Σ xᵢ yⁱ`, the pairing `α(w)`.
pub fn incidence_quadric_residual<T: Field>(point: &[T], ctx: &T::Ctx) -> Result<T> {
    if !point.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument("point length must be even".into()));
    }
    let (w, a) = point.split_at(point.len() / 2);
    let _ = ctx;
    Ok(linalg::dot(w, a))
}

/// Whether `(t·w, t⁻¹·α)` is again a lift point: it is the lift with fiber
/// scales divided by `t²`, up to projective equivalence.
pub fn torus_action_check<T: Field>(l: &ConormalLift, params: &[T], t: &T, ctx: &T::Ctx) -> Result<bool> {
    if t.is_zero() {
        return Err(Error::InvalidArgument("torus parameter must be nonzero".into()));
    }
    let point = l.lift_point(params, ctx)?;
    let n = l.w_dim;
    let inv = T::one(ctx).div(t);
    let acted: Vec<T> = point
        .iter()
        .enumerate()
        .map(|(i, x)| if i < n { x.mul(t) } else { x.mul(&inv) })
        .collect();
    let t2 = t.mul(t);
    let k = params.len() - l.codim;
    let rescaled: Vec<T> = params
        .iter()
        .enumerate()
        .map(|(i, x)| if i < k { x.clone() } else { x.div(&t2) })
        .collect();
    let other = l.lift_point(&rescaled, ctx)?;
    Ok(rank_of_rows(&[acted, other], ctx) == 1)
}

/// `[x₁..xₙ, y⁰..yⁿ⁻¹] ↦ [y¹..yⁿ⁻¹, y⁰ − xₙ, x₁..xₙ₋₁, 1]` on the chart
/// `x₀ = yⁿ = 1`.
pub fn phi_chart_map(n: usize, chart: &[Rational]) -> Result<Vec<Rational>> {
    if n == 0 || chart.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: chart.len(),
        });
    }
    let x = &chart[..n]; // x₁..xₙ
    let y = &chart[n..]; // y⁰..yⁿ⁻¹
    let mut out: Vec<Rational> = y[1..].to_vec();
    out.push(&y[0] - &x[n - 1]);
    out.extend(x[..n - 1].iter().cloned());
    out.push(Rational::ONE);
    Ok(out)
}

/// [`phi_chart_map`] of a full point `(x₀..xₙ, y⁰..yⁿ)` on `x₀ = yⁿ`.
pub fn phi_of_point(n: usize, point: &[Rational]) -> Result<Vec<Rational>> {
    if point.len() != 2 * n + 2 {
        return Err(Error::DimensionMismatch {
            expected: 2 * n + 2,
            found: point.len(),
        });
    }
    let (x0, yn) = (&point[0], &point[2 * n + 1]);
    if *x0 == Rational::ZERO || *yn == Rational::ZERO {
        return Err(Error::OutsideChart);
    }
    if x0 != yn {
        return Err(Error::InvalidArgument("point is not on x0 = y^n".into()));
    }
    let chart: Vec<Rational> = point[1..=n]
        .iter()
        .chain(&point[n + 1..2 * n + 1])
        .map(|v| v / x0)
        .collect();
    phi_chart_map(n, &chart)
}

/// Chart for `H = {x₀ = yⁿ}` whose coordinates match the φ target order.
pub fn split_agreement_chart(n: usize) -> Result<(SymplecticForm, QuotientChart)> {
    if n == 0 {
        return Err(Error::InvalidArgument("need dim W >= 2".into()));
    }
    let d = 2 * n + 2;
    let form = SymplecticForm::standard(n + 1)?;
    let unit = |i: usize| -> Vec<Rational> {
        (0..d)
            .map(|j| if i == j { Rational::ONE } else { Rational::ZERO })
            .collect()
    };
    let (x, y) = (|i: usize| i, |i: usize| n + 1 + i);
    let mut a = vec![Rational::ZERO; d];
    a[x(0)] = Rational::ONE;
    a[y(n)] = -Rational::ONE;
    let hyperplane = Hyperplane::new(&form, &a)?;
    let mut basis: Vec<Vec<Rational>> = (1..n).map(|i| unit(y(i))).collect();
    basis.push(unit(y(0)));
    basis.extend((1..n).map(|i| unit(x(i))));
    let mut last = unit(x(0));
    last[y(n)] = Rational::ONE;
    basis.push(last);
    let chart = induced_form_with_basis(&form, &hyperplane, basis)?;
    Ok((form, chart))
}

/// Reduction by `x₀ − yⁿ` in the φ-matched chart.
pub fn agreement_reduction(l: &Arc<ConormalLift>) -> Result<Arc<ReducedVariety>> {
    let (form, chart) = split_agreement_chart(l.w_dim - 1)?;
    Ok(Arc::new(hyperplane_reduce_with_chart(
        &Variety::Conormal(l.clone()),
        &form,
        chart,
        Vec::new(),
    )?))
}

/// Compare reduce-then-project with φ at exact section points.
pub fn reduction_agreement_check(
    l: &Arc<ConormalLift>,
    nsamples: usize,
    seed: u64,
    negative_control: bool,
) -> Result<AgreementReport> {
    let start = Instant::now();
    let n = l.w_dim - 1;
    let r = agreement_reduction(l)?;
    let samples = section_sampler::<Rational>(&r, nsamples, seed, &())?;
    let mut report = AgreementReport {
        schema: SCHEMA_VERSION,
        kind: "agreement",
        variety: l.name.clone(),
        seed,
        samples_requested: nsamples,
        sections_evaluated: samples.len(),
        outside_chart: 0,
        agreements: 0,
        disagreements: 0,
        negative_control,
        witnesses: Vec::new(),
        notes: Vec::new(),
        verdict: Verdict::Inconclusive,
        elapsed: Default::default(),
    };
    for s in &samples {
        let mut phi = match phi_of_point(n, &s.source_point) {
            Ok(p) => p,
            Err(Error::OutsideChart) => {
                report.outside_chart += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if negative_control {
            let j = if phi.len() > 2 { 2 } else { 1 };
            phi.swap(0, j);
        }
        let reduced = primitive_rational(s.projected.point());
        let phi = primitive_rational(&phi);
        if reduced == phi {
            report.agreements += 1;
        } else {
            report.disagreements += 1;
            if report.witnesses.len() < 10 {
                report.witnesses.push(AgreementWitness {
                    params: strings(&s.params),
                    reduced: strings(&reduced),
                    phi: strings(&phi),
                });
            }
        }
    }
    if samples.len() < nsamples {
        report
            .notes
            .push(format!("{} of {nsamples} section points found", samples.len()));
    }
    report.verdict = if report.disagreements > 0 {
        Verdict::Fail
    } else if report.agreements == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    report.elapsed = start.elapsed();
    Ok(report)
}

/// The sum type `Variety` wraps lifts behind an `Arc`.
pub fn lift_variety(l: ConormalLift) -> (Arc<ConormalLift>, Variety) {
    let l = Arc::new(l);
    (l.clone(), Variety::Conormal(l))
}

/// Incidence residuals and torus invariance at sampled lift points.
pub fn lift_checks<T: SampleScalar>(
    l: &Arc<ConormalLift>,
    nsamples: usize,
    seed: u64,
    torus_trials: usize,
    ctx: &T::Ctx,
) -> Result<LiftReport> {
    let start = Instant::now();
    let backend = T::backend(ctx);
    let v = Variety::Conormal(l.clone());
    let set = sample::<T>(&v, nsamples, seed, &SampleConfig::default(), ctx, false)?;
    let mut rng = rng::stream(seed, "torus");
    let ts: Vec<Vec<Rational>> = set
        .samples
        .iter()
        .map(|_| {
            (0..torus_trials)
                .map(|_| rng::nonzero_rational(&mut rng, 100))
                .collect()
        })
        .collect();
    let tau = T::tolerance_f64(ctx);
    let per_sample: Vec<(f64, bool, usize)> = set
        .samples
        .par_iter()
        .zip(&ts)
        .map(|(s, ts)| {
            let p = s.frame.point();
            let r = incidence_quadric_residual(p, ctx).expect("even length");
            let (w, a) = p.split_at(p.len() / 2);
            let rel = if T::EXACT {
                if r.is_zero() {
                    0.0
                } else {
                    1.0
                }
            } else {
                r.abs_f64() / (max_abs(w) * max_abs(a) * w.len() as f64).max(f64::MIN_POSITIVE)
            };
            let violation = if T::EXACT { !r.is_zero() } else { rel > tau };
            let failures = ts
                .iter()
                .filter(|t| !torus_action_check(l, &s.frame.params, &T::from_rational(ctx, t), ctx).unwrap_or(false))
                .count();
            (rel, violation, failures)
        })
        .collect();
    let incidence_violations = per_sample.iter().filter(|x| x.1).count();
    let torus_failures: usize = per_sample.iter().map(|x| x.2).sum();
    let worst = per_sample.iter().map(|x| x.0).fold(0.0, f64::max);
    let mut notes = Vec::new();
    if let Some(s) = set.shortfall {
        notes.push(format!("sampling stopped early: {s}"));
    }
    let verdict = if incidence_violations > 0 || torus_failures > 0 {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(LiftReport {
        schema: SCHEMA_VERSION,
        kind: "lift",
        variety: l.name.clone(),
        backend: backend.name(),
        precision_bits: backend.precision_bits(),
        seed,
        samples_evaluated: set.samples.len(),
        incidence_violations,
        worst_incidence_residual: (!T::EXACT).then(|| format!("{worst:e}")),
        torus_checks: set.samples.len() * torus_trials,
        torus_failures,
        notes,
        verdict,
        elapsed: start.elapsed(),
    })
}

struct Probe<T: Field> {
    stratum: &'static str,
    point: Vec<T>,
    expected_drop: bool,
    rank: usize,
}

/// Fixed generic covector used to cut tangent spaces to a fixed slot count.
fn slicing_covector(len: usize, seed: u64) -> Vec<Rational> {
    let mut rng = rng::stream(seed, "slice");
    (0..len).map(|_| rng::nonzero_rational(&mut rng, 100)).collect()
}

/// First `count` vectors of `ker [rows]` (fewer if the kernel is smaller).
fn kernel_slots<T: Field>(rows: Vec<Vec<T>>, cols: usize, count: usize, ctx: &T::Ctx) -> Vec<Vec<T>> {
    let mut k = kernel_basis(&Matrix::from_rows(rows, cols, ctx));
    k.truncate(count);
    k
}

fn join<T: Clone>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().chain(b).cloned().collect()
}

/// Rank probes on the strata `[w, 0]` (A), `[0, α]` (B) and general points (C).
///
/// Frames at `[w, 0]` and `[0, α]` are assembled from the tangent data of
/// the two sides with a fixed number of slots, so a degenerate side shows up
/// as a rank drop. A drop is expected at listed singular points of `Z` (A)
/// and at dual points of parabolic points of `Z` (B), the latter detected
/// independently from the second fundamental form.
pub fn singularity_classification_probe<T: SampleScalar>(
    l: &Arc<ConormalLift>,
    nsamples: usize,
    seed: u64,
    ctx: &T::Ctx,
) -> Result<SingularityReport> {
    let start = Instant::now();
    let backend = T::backend(ctx);
    let n1 = l.w_dim;
    let expected = n1;
    let zero = vec![T::zero(ctx); n1];
    let c: Vec<T> = convert_vec(ctx, &slicing_covector(n1, seed));
    let mut notes = Vec::new();
    let mut probes: Vec<Probe<T>> = Vec::new();
    let cfg = SampleConfig {
        discard_deficient: false,
        ..SampleConfig::default()
    };
    let general = sample::<T>(&Variety::Conormal(l.clone()), nsamples, seed, &cfg, ctx, false)?;
    let k = l.names.len() - l.codim;
    match &l.source {
        LiftSource::Hypersurface(h) => {
            let mut pts: Vec<(Vec<T>, bool)> = h
                .singular_points()
                .iter()
                .map(|p| (convert_vec(ctx, p), true))
                .collect();
            pts.extend(general.samples.iter().map(|s| (s.frame.params[..k].to_vec(), false)));
            let rows: Vec<Probe<T>> = pts
                .par_iter()
                .flat_map_iter(|(w, known)| {
                    let g = h.gradient_at(w, ctx);
                    let mut a_frame = vec![join(w, &zero)];
                    for v in kernel_slots(vec![g.clone(), c.clone()], n1, n1 - 2, ctx) {
                        a_frame.push(join(&v, &zero));
                    }
                    a_frame.push(join(&zero, &g));
                    let mut out = vec![Probe {
                        stratum: "A",
                        point: join(w, &zero),
                        expected_drop: *known,
                        rank: rank_of_rows(&a_frame, ctx),
                    }];
                    if !*known {
                        let hess = h.hessian_at(w, ctx);
                        let slots = kernel_slots(vec![g.clone(), c.clone()], n1, n1 - 2, ctx);
                        let mut b_frame = vec![join(&zero, &g)];
                        for v in &slots {
                            let hv: Vec<T> = hess.iter().map(|r| linalg::dot(r, v)).collect();
                            b_frame.push(join(&zero, &hv));
                        }
                        b_frame.push(join(w, &zero));
                        out.push(Probe {
                            stratum: "B",
                            point: join(&zero, &g),
                            expected_drop: parabolic(&hess, &slots, ctx),
                            rank: rank_of_rows(&b_frame, ctx),
                        });
                    }
                    out
                })
                .collect();
            probes.extend(rows);
        }
        LiftSource::Param(p) => {
            let rows: Vec<Probe<T>> = general
                .samples
                .par_iter()
                .flat_map_iter(|s| {
                    let t = &s.frame.params[..k];
                    let Ok(j) = p.cone_tangent_frame(t, ctx).map(|f| f.vectors) else {
                        return Vec::new();
                    };
                    let mut beta = kernel_basis(&Matrix::from_rows(j.clone(), n1, ctx));
                    beta.truncate(l.codim);
                    let mut a_frame: Vec<Vec<T>> = j.iter().map(|v| join(v, &zero)).collect();
                    a_frame.extend(beta.iter().map(|b| join(&zero, b)));
                    let mut out = vec![Probe {
                        stratum: "A",
                        point: join(&j[0], &zero),
                        expected_drop: false,
                        rank: rank_of_rows(&a_frame, ctx),
                    }];
                    if l.codim == 1 && beta.len() == 1 {
                        let mut b_frame = vec![join(&zero, &beta[0])];
                        for kk in 0..t.len() {
                            if let Ok(ad) = l.alpha_dot(&j, &beta[0], kk, t, ctx) {
                                b_frame.push(join(&zero, &ad));
                            }
                        }
                        b_frame.push(join(&j[0], &zero));
                        out.push(Probe {
                            stratum: "B",
                            point: join(&zero, &beta[0]),
                            expected_drop: false,
                            rank: rank_of_rows(&b_frame, ctx),
                        });
                    }
                    out
                })
                .collect();
            probes.extend(rows);
            if l.codim > 1 {
                notes.push("stratum B skipped: dual data needs a codimension-one source".into());
            }
        }
    }
    probes.extend(general.samples.iter().map(|s| Probe {
        stratum: "C",
        point: s.frame.point().to_vec(),
        expected_drop: false,
        rank: s.rank,
    }));
    let mut entries = Vec::new();
    let mut rank_drops = 0;
    let mut unexpected = 0;
    let mut missed = 0;
    let mut flagged: Vec<Vec<T>> = Vec::new();
    for p in &probes {
        let drop = p.rank < expected;
        if drop {
            rank_drops += 1;
            if !p.expected_drop {
                unexpected += 1;
            }
            if !flagged.iter().any(|q| same_projective_point(q, &p.point, ctx)) {
                flagged.push(p.point.clone());
            }
        } else if p.expected_drop {
            missed += 1;
        }
        entries.push(ProbeEntry {
            stratum: p.stratum,
            point: p.point.iter().map(|x| x.to_string()).collect(),
            expected_drop: p.expected_drop,
            rank: p.rank,
            expected_rank: expected,
            outcome: if drop { "rank_drop" } else { "full_rank" },
        });
    }
    let verdict = if unexpected == 0 && missed == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(SingularityReport {
        schema: SCHEMA_VERSION,
        kind: "singularity",
        variety: l.name.clone(),
        backend: backend.name(),
        precision_bits: backend.precision_bits(),
        seed,
        expected_rank: expected,
        probes: entries,
        rank_drops,
        unexpected_drops: unexpected,
        missed_singular: missed,
        flagged_clusters: flagged.len(),
        notes,
        verdict,
        elapsed: start.elapsed(),
    })
}

/// Whether the second fundamental form `vᵀHu` on `T_w Z / ⟨w⟩` (represented
/// by `slots`) is degenerate. Then the Gauss map drops rank and the dual
/// point is singular on the dual variety (a flex, for plane curves).
fn parabolic<T: Field>(hess: &[Vec<T>], slots: &[Vec<T>], ctx: &T::Ctx) -> bool {
    let hu: Vec<Vec<T>> = slots
        .iter()
        .map(|u| hess.iter().map(|r| linalg::dot(r, u)).collect())
        .collect();
    let m: Vec<Vec<T>> = slots
        .iter()
        .map(|v| hu.iter().map(|h| linalg::dot(v, h)).collect())
        .collect();
    rank_of_rows(&m, ctx) < slots.len()
}

fn same_projective_point<T: Field>(a: &[T], b: &[T], ctx: &T::Ctx) -> bool {
    rank_of_rows(&[a.to_vec(), b.to_vec()], ctx) <= 1
}

/// Hyperplane `a = Ω(x₁ + x₂)` through two ω-orthogonal lift points, so
/// that the center lies on their secant line; the two points are kept as
/// anchors. Codimension-one sources only.
pub fn secant_through_center(l: &Arc<ConormalLift>, seed: u64) -> Result<Arc<ReducedVariety>> {
    if l.codim != 1 {
        return Err(Error::InvalidArgument("needs a codimension-one source".into()));
    }
    let mut rng = rng::stream(seed, "secant-control");
    let cfg = SampleConfig::default();
    let v = Variety::Conormal(l.clone());
    let n = l.w_dim;
    for _ in 0..cfg.attempts_per_sample {
        let mut draws = Vec::new();
        for _ in 0..cfg.attempts_per_sample {
            if draws.len() >= 2 {
                break;
            }
            draws.extend(l.draw_section(&mut rng, &[], &cfg)?);
        }
        if draws.len() < 2 {
            continue;
        }
        let (p1, mut p2) = (draws[0].clone(), draws[1].clone());
        let (Ok(x1), Ok(x2)) = (l.lift_point(&p1, &()), l.lift_point(&p2, &())) else {
            continue;
        };
        // ω(x₁, x₂) = α₂(w₁) − α₁(w₂) vanishes after rescaling s₂.
        let a2w1 = linalg::dot(&x2[n..], &x1[..n]);
        let a1w2 = linalg::dot(&x1[n..], &x2[..n]);
        if a2w1 == Rational::ZERO || a1w2 == Rational::ZERO {
            continue;
        }
        let last = p2.len() - 1;
        p2[last] = &p2[last] * &a1w2 / &a2w1;
        let x2 = l.lift_point(&p2, &())?;
        let h: Vec<Rational> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        if rank_of_rows(&[x1.clone(), x2.clone()], &()) < 2 {
            continue;
        }
        let a = l.form.pairing_covector(&h);
        let hyperplane = Hyperplane::new(&l.form, &a)?;
        let chart = crate::symplectic::induced_form(&l.form, &hyperplane)?;
        return Ok(Arc::new(hyperplane_reduce_with_chart(
            &v,
            &l.form,
            chart,
            vec![p1, p2],
        )?));
    }
    Err(Error::BudgetExhausted("no ω-orthogonal pair found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, var_names};
    use crate::scalar::rat;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    fn conic_lift() -> Arc<ConormalLift> {
        let t = var_names(&["t"]);
        let coords = ["1", "t", "t^2"].iter().map(|c| parse_poly(c, &t).unwrap()).collect();
        let z = Variety::Param(Arc::new(ParamVariety::new("conic", t, &[], coords).unwrap()));
        Arc::new(build_conormal_lift(&z).unwrap())
    }

    #[test]
    fn conic_lift_point() {
        let l = conic_lift();
        assert_eq!(l.codim(), 1);
        let p = l.lift_point(&[rat(2, 1), rat(1, 1)], &()).unwrap();
        let p = primitive_rational(&p);
        assert_eq!(p, primitive_rational(&ints(&[1, 2, 4, 4, -4, 1])));
        assert_eq!(incidence_quadric_residual(&p, &()).unwrap(), rat(0, 1));
        let f = l.lift_tangent_frame(&[rat(2, 1), rat(1, 1)], &()).unwrap();
        assert_eq!(f.rank(&()), 3);
    }

    #[test]
    fn incidence_residual_examples() {
        let e = ints(&[1, 0, 0, 1, 0, 0]);
        assert_eq!(incidence_quadric_residual(&e, &()).unwrap(), rat(1, 1));
    }

    #[test]
    fn torus_examples() {
        let l = conic_lift();
        let p = [rat(2, 1), rat(1, 1)];
        for t in [3, 1, -1] {
            assert!(torus_action_check(&l, &p, &rat(t, 1), &()).unwrap());
        }
        assert!(torus_action_check(&l, &p, &rat(0, 1), &()).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_chart_map(2, &ints(&[1, 2, 3, 5])).unwrap(), ints(&[5, 1, 1, 1]));
        assert_eq!(phi_chart_map(1, &ints(&[4, 4])).unwrap(), ints(&[0, 1]));
        assert_eq!(phi_of_point(1, &ints(&[0, 1, 1, 0])), Err(Error::OutsideChart));
    }

    #[test]
    fn conic_agreement() {
        let l = conic_lift();
        let r = reduction_agreement_check(&l, 20, 0, false).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.agreements >= 20);
        let neg = reduction_agreement_check(&l, 20, 0, true).unwrap();
        assert_eq!(neg.verdict, Verdict::Fail);
    }
}
