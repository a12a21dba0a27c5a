//! Legendrian verification and the hyperplane-section-and-project reduction.
//!
//! For a hyperplane `H = ker a` with center `h = Ω⁻¹a`, the reduced variety
//! is the image of `X ∩ H` in `P(H/h)`. Reductions are lazy: a
//! [`ReducedVariety`] holds its chart, and points are drawn on demand as
//! section points of the source.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, kernel_basis, rank_of_rows, Matrix};
use crate::report::{
    histogram_entries, strings, SecantReport, Verdict, VerificationReport, Witness, WitnessReport, SCHEMA_VERSION,
};
use crate::rng::{self, Rng};
use crate::scalar::{convert_vec, Approx, Field, Precision, Rational};
use crate::symplectic::{induced_form, Hyperplane, QuotientChart, SymplecticForm};
use crate::variety::{max_abs, sample, Sample, SampleConfig, SampleScalar, TangentFrame, Variety};

/// Witnesses kept per report.
const MAX_WITNESSES: usize = 10;

/// Sample budget shared by the checks.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub sampling: SampleConfig,
}

impl CheckOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        CheckOptions {
            samples,
            seed,
            sampling: SampleConfig::default(),
        }
    }
}

struct FrameOutcome {
    violations: Vec<([usize; 2], String)>,
    count: usize,
    gray: usize,
    worst: f64,
}

/// All pairwise products `ω(u, v)` of one frame.
fn evaluate_frame<T: Field>(frame: &TangentFrame<T>, omega: &Matrix<T>, ctx: &T::Ctx) -> FrameOutcome {
    let mut out = FrameOutcome {
        violations: Vec::new(),
        count: 0,
        gray: 0,
        worst: 0.0,
    };
    if T::EXACT {
        let images: Vec<Vec<T>> = frame
            .vectors
            .iter()
            .map(|v| omega.mul_vec(v).expect("frame length matches form"))
            .collect();
        for (i, u) in frame.vectors.iter().enumerate() {
            for (j, image) in images.iter().enumerate().skip(i + 1) {
                let value = linalg::dot(u, image);
                if !value.is_zero() {
                    out.count += 1;
                    if out.violations.len() < MAX_WITNESSES {
                        out.violations.push(([i, j], value.to_string()));
                    }
                }
            }
        }
        return out;
    }
    // Approximate: normalize vectors, then compare |ω| / (d·max|Ω|) with τ
    // (pass) and √τ (fail); values in between are inconclusive.
    let tau = T::tolerance_f64(ctx);
    let fail_at = tau.sqrt();
    let scale = (omega.rows() as f64) * omega.row_vecs().iter().map(|r| max_abs(r)).fold(0.0, f64::max);
    let vectors: Vec<Vec<T>> = frame.vectors.iter().filter_map(|v| normalize_field(v, ctx)).collect();
    let images: Vec<Vec<T>> = vectors
        .iter()
        .map(|v| omega.mul_vec(v).expect("frame length matches form"))
        .collect();
    for (i, u) in vectors.iter().enumerate() {
        for (j, image) in images.iter().enumerate().skip(i + 1) {
            let r = linalg::dot(u, image).abs_f64() / scale;
            out.worst = out.worst.max(r);
            if r > fail_at {
                out.count += 1;
                if out.violations.len() < MAX_WITNESSES {
                    out.violations.push(([i, j], format!("{r:e}")));
                }
            } else if r > tau {
                out.gray += 1;
            }
        }
    }
    out
}

/// Scale to max-norm 1 on any backend (exact vectors are returned unchanged).
fn normalize_field<T: Field>(v: &[T], ctx: &T::Ctx) -> Option<Vec<T>> {
    let big = v.iter().max_by(|a, b| a.cmp_abs(b))?.clone();
    if big.is_zero() {
        return None;
    }
    if T::EXACT {
        return Some(v.to_vec());
    }
    let inv = T::one(ctx).div(&big);
    Some(v.iter().map(|x| x.mul(&inv)).collect())
}

/// Verify that sampled cone tangent spaces are Lagrangian for `form`.
pub fn check_legendrian<T: SampleScalar>(
    x: &Variety,
    form: &SymplecticForm,
    opts: &CheckOptions,
    ctx: &T::Ctx,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if form.dim() != x.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: x.ambient_dim(),
            found: form.dim(),
        });
    }
    let backend = T::backend(ctx);
    let expected = form.half_dim();
    let mut report = VerificationReport {
        schema: SCHEMA_VERSION,
        kind: "legendrian",
        variety: x.name(),
        backend: backend.name(),
        precision_bits: backend.precision_bits(),
        seed: opts.seed,
        samples_requested: opts.samples,
        samples_evaluated: 0,
        samples_discarded: 0,
        ambient_dim: form.dim(),
        expected_rank: expected,
        rank_histogram: Vec::new(),
        isotropy_violations: 0,
        rank_violations: 0,
        suspected_singular: 0,
        worst_residual: None,
        source_ambient_dim: None,
        source_dimension: None,
        dimension: None,
        stages: None,
        witnesses: Vec::new(),
        notes: Vec::new(),
        verdict: Verdict::Inconclusive,
        elapsed: Default::default(),
    };
    let set = match sample::<T>(x, opts.samples, opts.seed, &opts.sampling, ctx, false) {
        Ok(set) => set,
        Err(e) => {
            report.notes.push(format!("sampling failed: {e}"));
            report.elapsed = start.elapsed();
            return Ok(report);
        }
    };
    if let Some(s) = &set.shortfall {
        report.notes.push(format!("sampling stopped early: {s}"));
    }
    let omega: Matrix<T> = form.matrix().map(ctx, |q| T::from_rational(ctx, q));
    let outcomes: Vec<FrameOutcome> = set
        .samples
        .par_iter()
        .map(|s| evaluate_frame(&s.frame, &omega, ctx))
        .collect();
    let mut histogram = std::collections::BTreeMap::new();
    let mut gray = 0;
    let mut worst: f64 = 0.0;
    for (k, (s, o)) in set.samples.iter().zip(&outcomes).enumerate() {
        *histogram.entry(s.rank).or_insert(0) += 1;
        let params: Vec<String> = s.frame.params.iter().map(|p| p.to_string()).collect();
        report.isotropy_violations += o.count;
        gray += o.gray;
        worst = worst.max(o.worst);
        for (pair, value) in &o.violations {
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(Witness {
                    kind: "isotropy".into(),
                    sample: k,
                    params: params.clone(),
                    pair: Some(*pair),
                    value: value.clone(),
                });
            }
        }
        if s.rank != expected {
            if s.rank < expected && set.generic_rank == expected {
                report.suspected_singular += 1;
            } else {
                report.rank_violations += 1;
                if report.witnesses.len() < MAX_WITNESSES {
                    report.witnesses.push(Witness {
                        kind: "rank".into(),
                        sample: k,
                        params,
                        pair: None,
                        value: s.rank.to_string(),
                    });
                }
            }
        }
    }
    report.samples_evaluated = set.samples.len();
    report.samples_discarded = set.discarded;
    report.rank_histogram = histogram_entries(&histogram);
    report.dimension = Some(set.generic_rank.saturating_sub(1));
    if !T::EXACT {
        report.worst_residual = Some(format!("{worst:e}"));
    }
    if report.suspected_singular > 0 {
        report.notes.push(format!(
            "{} samples with rank below {expected} (suspected singular points)",
            report.suspected_singular
        ));
    }
    report.verdict = if report.isotropy_violations > 0 || report.rank_violations > 0 {
        Verdict::Fail
    } else if gray > 0 {
        report
            .notes
            .push(format!("{gray} products between the pass and fail thresholds"));
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Points `x₁, x₂` of `X` with `ω(x₁, x₂) ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonIsotropicPair {
    pub first: Vec<Rational>,
    pub second: Vec<Rational>,
    pub value: Rational,
}

/// Search for two points spanning a non-isotropic plane. Parametrized
/// varieties try the constant assignments 0 and 1 before random draws.
pub fn witness_nonisotropic_pair(
    x: &Variety,
    form: &SymplecticForm,
    budget: usize,
    seed: u64,
) -> Result<(Option<NonIsotropicPair>, usize)> {
    if form.dim() != x.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: x.ambient_dim(),
            found: form.dim(),
        });
    }
    let mut rng = rng::stream(seed, "witness");
    let cfg = SampleConfig::default();
    let mut seen: Vec<(Vec<Rational>, Vec<Rational>)> = Vec::new();
    let mut queue: std::collections::VecDeque<Vec<Rational>> = Default::default();
    if let Variety::Param(p) = x {
        for c in [0, 1] {
            queue.push_back(vec![Rational::from(c); p.params().len()]);
        }
    }
    let mut draws = 0;
    while draws < budget {
        if queue.is_empty() {
            match x.draw_section(&mut rng, &[], &cfg) {
                Ok(c) => queue.extend(c),
                Err(_) => break,
            }
            if queue.is_empty() {
                draws += 1;
                continue;
            }
        }
        let params = queue.pop_front().expect("nonempty");
        draws += 1;
        let Ok(frame) = x.frame_at(&params, &()) else {
            continue;
        };
        let point = frame.point().to_vec();
        let image = form.pairing_covector(&point);
        for (p, q) in &seen {
            let value = linalg::dot(&image, q);
            if value != Rational::ZERO {
                return Ok((
                    Some(NonIsotropicPair {
                        first: p.clone(),
                        second: params,
                        value,
                    }),
                    draws,
                ));
            }
        }
        seen.push((params, point));
    }
    Ok((None, draws))
}

/// Witness search packaged as a report; finding a witness passes.
pub fn witness_report(x: &Variety, form: &SymplecticForm, budget: usize, seed: u64) -> Result<WitnessReport> {
    let start = Instant::now();
    let (found, draws) = witness_nonisotropic_pair(x, form, budget, seed)?;
    Ok(WitnessReport {
        schema: SCHEMA_VERSION,
        kind: "witness",
        variety: x.name(),
        seed,
        budget,
        draws,
        found: found.is_some(),
        first: found.as_ref().map(|w| strings(&w.first)),
        second: found.as_ref().map(|w| strings(&w.second)),
        value: found.as_ref().map(|w| w.value.to_string()),
        verdict: if found.is_some() { Verdict::Pass } else { Verdict::Fail },
        elapsed: start.elapsed(),
    })
}

/// `π(X ∩ H) ⊂ P(H/h)` with its chart and the induced form.
#[derive(Clone, Debug)]
pub struct ReducedVariety {
    name: String,
    source: Variety,
    source_form: SymplecticForm,
    chart: QuotientChart,
    /// Hyperplanes of every stage, outermost last.
    ancestry: Vec<Hyperplane>,
    /// Exact parameters of known points on the section.
    anchors: Vec<Vec<Rational>>,
}

impl ReducedVariety {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Variety {
        &self.source
    }

    pub fn source_form(&self) -> &SymplecticForm {
        &self.source_form
    }

    pub fn chart(&self) -> &QuotientChart {
        &self.chart
    }

    pub fn hyperplane(&self) -> &Hyperplane {
        &self.chart.hyperplane
    }

    /// The induced form `Ω'`.
    pub fn form(&self) -> &SymplecticForm {
        &self.chart.induced
    }

    pub fn ancestry(&self) -> &[Hyperplane] {
        &self.ancestry
    }

    pub fn ambient_dim(&self) -> usize {
        self.chart.q.len()
    }

    pub fn anchors(&self) -> &[Vec<Rational>] {
        &self.anchors
    }

    /// Anchors whose section point is valid at every stage.
    pub fn anchors_on_variety(&self) -> Vec<Vec<Rational>> {
        self.anchors
            .iter()
            .filter(|a| self.frame_at::<Rational>(a, &()).is_ok())
            .cloned()
            .collect()
    }

    /// Projected frame: `q·(frame ∩ ker a)`, point first.
    pub fn frame_at<T: Field>(&self, params: &[T], ctx: &T::Ctx) -> Result<TangentFrame<T>> {
        let sf = self.source.frame_at(params, ctx)?;
        let a: Vec<T> = convert_vec(ctx, &self.chart.hyperplane.covector);
        let values: Vec<T> = sf.vectors.iter().map(|v| linalg::dot(&a, v)).collect();
        let on_h = if T::EXACT {
            values[0].is_zero()
        } else {
            let scale = max_abs(&a) * max_abs(sf.point()) * a.len() as f64;
            values[0].abs_f64() <= T::tolerance_f64(ctx) * scale.max(f64::MIN_POSITIVE)
        };
        if !on_h {
            return Err(Error::NotOnVariety(format!("{} (point off the hyperplane)", self.name)));
        }
        let point = self.chart.project_field(sf.point(), ctx);
        if point.iter().all(Field::is_zero) {
            return Err(Error::BasePoint);
        }
        let m = values.len();
        let combos: Vec<Vec<T>> = if values.iter().all(Field::is_zero) {
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| if i == j { T::one(ctx) } else { T::zero(ctx) })
                        .collect()
                })
                .collect()
        } else {
            // Normalize the single row so the approximate threshold is relative.
            let row = normalize_field(&values, ctx).expect("nonzero row");
            kernel_basis(&Matrix::from_rows(vec![row], m, ctx))
        };
        let mut vectors = vec![point];
        for c in combos {
            let mut v = vec![T::zero(ctx); sf.point().len()];
            for (ci, fv) in c.iter().zip(&sf.vectors) {
                if !ci.is_zero() {
                    for (x, y) in v.iter_mut().zip(fv) {
                        *x = x.add(&ci.mul(y));
                    }
                }
            }
            vectors.push(self.chart.project_field(&v, ctx));
        }
        Ok(TangentFrame {
            params: params.to_vec(),
            vectors,
        })
    }

    /// Section constraints `[a] ∪ {c·q}` passed down to the source.
    fn pulled(&self, constraints: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let mut all = vec![self.chart.hyperplane.covector.clone()];
        all.extend(constraints.iter().map(|c| self.chart.pull_back(c)));
        all
    }

    pub fn draw_section(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
    ) -> Result<Vec<Vec<Rational>>> {
        self.source.draw_section(rng, &self.pulled(constraints), cfg)
    }

    pub fn draw_section_approx(
        &self,
        rng: &mut Rng,
        constraints: &[Vec<Rational>],
        cfg: &SampleConfig,
        prec: Precision,
    ) -> Result<Vec<Vec<Approx>>> {
        self.source
            .draw_section_approx(rng, &self.pulled(constraints), cfg, prec)
    }
}

/// Error if `h` lies in the tangent span at every probe sample (a cone with vertex `h`).
fn vertex_probe(x: &Variety, h: &[Rational], seed: u64) -> Result<Option<String>> {
    let cfg = SampleConfig {
        rank_probe: 10,
        discard_deficient: false,
        ..SampleConfig::default()
    };
    let set = match sample::<Rational>(x, 10, seed, &cfg, &(), false) {
        Ok(set) => set,
        Err(e) => return Ok(Some(format!("vertex probe skipped: {e}"))),
    };
    let all_through_h = set.samples.iter().all(|s| linalg::in_span(&s.frame.vectors, h, &()));
    if all_through_h {
        return Err(Error::VertexHyperplane);
    }
    Ok(None)
}

/// Reduce along `H = ker a` with the default chart.
pub fn hyperplane_reduce(x: &Variety, form: &SymplecticForm, a: &[Rational]) -> Result<ReducedVariety> {
    let hyperplane = Hyperplane::new(form, a)?;
    let chart = induced_form(form, &hyperplane)?;
    hyperplane_reduce_with_chart(x, form, chart, Vec::new())
}

/// Reduce with a caller-built chart and optional anchor parameters.
pub fn hyperplane_reduce_with_chart(
    x: &Variety,
    form: &SymplecticForm,
    chart: QuotientChart,
    anchors: Vec<Vec<Rational>>,
) -> Result<ReducedVariety> {
    if form.dim() != x.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: x.ambient_dim(),
            found: form.dim(),
        });
    }
    vertex_probe(x, &chart.hyperplane.center, 0)?;
    let mut ancestry = match x {
        Variety::Reduced(r) => r.ancestry.clone(),
        _ => Vec::new(),
    };
    ancestry.push(chart.hyperplane.clone());
    Ok(ReducedVariety {
        name: format!("{}/H", x.name()),
        source: x.clone(),
        source_form: form.clone(),
        chart,
        ancestry,
        anchors,
    })
}

/// A sampled section point with its image.
#[derive(Clone, Debug)]
pub struct SectionSample<T: Field> {
    pub params: Vec<T>,
    /// Point of `X ∩ H` in the source ambient space.
    pub source_point: Vec<T>,
    pub projected: TangentFrame<T>,
}

pub fn section_sampler<T: SampleScalar>(
    r: &Arc<ReducedVariety>,
    count: usize,
    seed: u64,
    ctx: &T::Ctx,
) -> Result<Vec<SectionSample<T>>> {
    let cfg = SampleConfig {
        discard_deficient: false,
        ..SampleConfig::default()
    };
    let v = Variety::Reduced(r.clone());
    let set = sample::<T>(&v, count, seed, &cfg, ctx, false)?;
    set.samples
        .into_iter()
        .map(|Sample { frame, .. }| {
            let source_point = r.source.frame_at(&frame.params, ctx)?.point().to_vec();
            Ok(SectionSample {
                params: frame.params.clone(),
                source_point,
                projected: frame,
            })
        })
        .collect()
}

/// Legendrian check of the reduced variety under `Ω'` plus the dimension drop.
pub fn verify_reduction<T: SampleScalar>(
    r: &Arc<ReducedVariety>,
    opts: &CheckOptions,
    ctx: &T::Ctx,
) -> Result<VerificationReport> {
    verify_reduction_with_form::<T>(r, r.form(), opts, ctx)
}

/// [`verify_reduction`] against an arbitrary form (negative controls).
pub fn verify_reduction_with_form<T: SampleScalar>(
    r: &Arc<ReducedVariety>,
    form: &SymplecticForm,
    opts: &CheckOptions,
    ctx: &T::Ctx,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut opts = opts.clone();
    opts.sampling.discard_deficient = false;
    let v = Variety::Reduced(r.clone());
    let mut report = check_legendrian::<T>(&v, form, &opts, ctx)?;
    report.kind = "reduction";
    report.source_ambient_dim = Some(r.source.ambient_dim());
    report.stages = Some(r.ancestry.len());
    if report.source_ambient_dim != Some(report.ambient_dim + 2) {
        report.notes.push("ambient dimension did not drop by 2".into());
        report.verdict = Verdict::Fail;
    }
    // Source dimension from generic samples of the source (sections for chains).
    let src_cfg = SampleConfig {
        discard_deficient: false,
        ..opts.sampling.clone()
    };
    let src = sample::<T>(&r.source, opts.samples.min(20), opts.seed, &src_cfg, ctx, false);
    match (src, report.dimension) {
        (Ok(set), Some(d)) if report.samples_evaluated > 0 => {
            let sd = set.generic_rank.saturating_sub(1);
            report.source_dimension = Some(sd);
            if sd != d + 1 {
                report.witnesses.push(Witness {
                    kind: "dimension".into(),
                    sample: 0,
                    params: Vec::new(),
                    pair: None,
                    value: format!("{sd} -> {d}"),
                });
                report.verdict = Verdict::Fail;
            }
        }
        (Err(e), _) => report.notes.push(format!("source dimension unavailable: {e}")),
        _ => {}
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Count sampled pairs of section points whose secant line passes through `h`.
pub fn secant_avoidance_probe(r: &Arc<ReducedVariety>, npairs: usize, seed: u64) -> Result<SecantReport> {
    let start = Instant::now();
    // Smallest pool with at least `npairs` pairs.
    let mut pool = 2;
    while pool * (pool - 1) / 2 < npairs {
        pool += 1;
    }
    let samples = section_sampler::<Rational>(r, pool, seed, &()).map_err(|e| match e {
        Error::BudgetExhausted(_) => Error::TooFewPoints,
        e => e,
    })?;
    if samples.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let h = &r.chart.hyperplane.center;
    let pts: Vec<&Vec<Rational>> = samples.iter().map(|s| &s.source_point).collect();
    let mut pairs = Vec::new();
    'outer: for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pairs.len() == npairs {
                break 'outer;
            }
            pairs.push([i, j]);
        }
    }
    let results: Vec<Option<bool>> = pairs
        .par_iter()
        .map(|&[i, j]| {
            if rank_of_rows(&[pts[i].clone(), pts[j].clone()], &()) < 2 {
                return None;
            }
            Some(rank_of_rows(&[pts[i].clone(), pts[j].clone(), h.clone()], &()) == 2)
        })
        .collect();
    let mut notes = Vec::new();
    if samples.len() < pool {
        notes.push(format!("only {} section points available", samples.len()));
    }
    let tested = results.iter().filter(|r| r.is_some()).count();
    let hit_pairs: Vec<[usize; 2]> = pairs
        .iter()
        .zip(&results)
        .filter(|(_, r)| **r == Some(true))
        .map(|(p, _)| *p)
        .collect();
    let hits = hit_pairs.len();
    Ok(SecantReport {
        schema: SCHEMA_VERSION,
        kind: "secant",
        variety: r.name.clone(),
        seed,
        points: samples.len(),
        pairs_requested: npairs,
        pairs_tested: tested,
        hits,
        hit_pairs,
        injective_on_sample: hits == 0,
        notes,
        verdict: if tested == 0 {
            Verdict::Inconclusive
        } else if hits == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        elapsed: start.elapsed(),
    })
}

/// `k` successive reductions by random hyperplanes in the current ambient
/// space.
///
/// When exact section sampling cannot impose `k` linear conditions on the
/// root parametrization, the hyperplanes are instead drawn at random among
/// those containing a fixed set of exact anchor points of `X`, which then
/// serve as the exact samples of the final section.
pub fn coisotropic_reduce(x: &Variety, form: &SymplecticForm, k: usize, seed: u64) -> Result<ReducedVariety> {
    let est = crate::variety::dimension_estimate(x, 20, seed);
    let dim = est
        .dimension
        .ok_or_else(|| Error::BudgetExhausted("no exact samples to estimate dimension".into()))?;
    if k == 0 || k > dim {
        return Err(Error::InvalidArgument(format!(
            "codimension must be between 1 and {dim}, got {k}"
        )));
    }
    let mut rng = rng::stream(seed, "coisotropic");
    let anchored = x.section_capacity() < k;
    let mut anchors: Vec<Vec<Rational>> = Vec::new();
    if anchored {
        let m = (x.ambient_dim() - 2 * k + 1).min(8);
        let set = sample::<Rational>(x, m, seed, &SampleConfig::default(), &(), true)?;
        anchors = set.samples.into_iter().map(|s| s.frame.params).collect();
    }
    let mut current = x.clone();
    let mut current_form = form.clone();
    for _ in 0..k {
        let hyperplane = if anchored {
            // Random covector vanishing on the anchors' current images.
            let points: Vec<Vec<Rational>> = anchors
                .iter()
                .map(|a| current.frame_at::<Rational>(a, &()).map(|f| f.point().to_vec()))
                .collect::<Result<_>>()?;
            let d = current.ambient_dim();
            let kernel = kernel_basis(&Matrix::from_rows(points, d, &()));
            let mut a = vec![Rational::ZERO; d];
            for b in &kernel {
                let c = rng::nonzero_rational(&mut rng, 10);
                for (x, y) in a.iter_mut().zip(b) {
                    *x += &c * y;
                }
            }
            Hyperplane::new(&current_form, &a)?
        } else {
            Hyperplane::random(&current_form, &mut rng, 10)
        };
        let chart = induced_form(&current_form, &hyperplane)?;
        let next_form = chart.induced.clone();
        let r = hyperplane_reduce_with_chart(&current, &current_form, chart, anchors.clone())?;
        current = Variety::Reduced(Arc::new(r));
        current_form = next_form;
    }
    match current {
        Variety::Reduced(r) => Ok(Arc::try_unwrap(r).unwrap_or_else(|r| (*r).clone())),
        _ => unreachable!("k >= 1 stages"),
    }
}
