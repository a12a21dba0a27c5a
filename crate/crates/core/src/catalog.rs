//! Built-in varieties: the cubic-form family, Grassmannian and spinor
//! entries, and sources for conormal lifts.
//!
//! Entries built from a cubic form `N` use the parametrization
//! `(1, w, ∇N(w), N(w))`. Their symplectic form is not hand-coded: it is fitted
//! from sampled frames on first use and must come out unique and
//! nondegenerate. Conormal lifts carry the split form on `W ⊕ W*`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use crate::conormal::{build_conormal_lift, ConormalLift};
use crate::error::{Error, Result};
use crate::legendrian::{check_legendrian, CheckOptions};
use crate::poly::{parse_poly, var_names, MultiPoly};
use crate::report::{FitReport, Verdict, VerificationReport, SCHEMA_VERSION};
use crate::scalar::{Approx, Backend, Precision, Rational};
use crate::symplectic::{fit_symplectic_form, FitResult, SymplecticForm};
use crate::variety::{sample, ImplicitHypersurface, ParamVariety, SampleConfig, Variety};

/// Seed of the frames used for form fitting.
const FIT_SEED: u64 = 0;

/// `(1, w, ∇N(w), N(w))` for a cubic form `N`.
pub fn cubic_form_variety(name: &str, n: &MultiPoly) -> Result<ParamVariety> {
    if n.is_zero() || n.total_degree() != 3 || !n.is_homogeneous() {
        return Err(Error::InvalidArgument("N must be a nonzero cubic form".into()));
    }
    let vars = n.vars().to_vec();
    let mut coords = vec![MultiPoly::constant(&vars, Rational::ONE)];
    coords.extend((0..vars.len()).map(|i| MultiPoly::var(&vars, i)));
    coords.extend(n.gradient());
    coords.push(n.clone());
    ParamVariety::new(name, vars, &[], coords)
}

/// Pfaffian of the antisymmetric matrix with upper entries `x_ij` (1-based names).
fn pfaffian(indices: &[usize], vars: &[String]) -> MultiPoly {
    if indices.is_empty() {
        return MultiPoly::constant(vars, Rational::ONE);
    }
    let mut out = MultiPoly::zero(vars);
    let first = indices[0];
    for (k, &j) in indices.iter().enumerate().skip(1) {
        let name = format!("x{first}{j}");
        let index = vars.iter().position(|v| *v == name).expect("pfaffian variable");
        let rest: Vec<usize> = indices.iter().copied().filter(|&i| i != first && i != j).collect();
        let term = &MultiPoly::var(vars, index) * &pfaffian(&rest, vars);
        out = if k % 2 == 1 { &out + &term } else { &out - &term };
    }
    out
}

fn det3(entries: [[&str; 3]; 3]) -> String {
    let perms = [
        ([0, 1, 2], "+"),
        ([1, 2, 0], "+"),
        ([2, 0, 1], "+"),
        ([0, 2, 1], "-"),
        ([2, 1, 0], "-"),
        ([1, 0, 2], "-"),
    ];
    perms
        .iter()
        .map(|(p, sign)| format!("{sign} {}*{}*{}", entries[0][p[0]], entries[1][p[1]], entries[2][p[2]]))
        .collect::<Vec<_>>()
        .join(" ")
        .trim_start_matches("+ ")
        .to_string()
}

/// Hudson's form of a Kummer quartic: the quartic in the classical four
/// coefficient family singular at `node` and its images under the group
/// generated by even sign changes and the three double transpositions.
pub fn kummer_surface(node: [i64; 4]) -> Result<ImplicitHypersurface> {
    let vars = var_names(&["x", "y", "z", "t"]);
    let base = parse_poly("x^4 + y^4 + z^4 + t^4", &vars)?;
    let families = [
        parse_poly("x^2*t^2 + y^2*z^2", &vars)?,
        parse_poly("x^2*z^2 + y^2*t^2", &vars)?,
        parse_poly("x^2*y^2 + z^2*t^2", &vars)?,
        parse_poly("x*y*z*t", &vars)?,
    ];
    let p: Vec<Rational> = node.iter().map(|&v| Rational::from(v)).collect();
    // ∇F(p) = ∇base(p) + Σ cₖ ∇familyₖ(p) = 0, linear in the cₖ.
    let grad = |f: &MultiPoly| -> Vec<Rational> { f.gradient().iter().map(|g| g.eval(&p, &())).collect() };
    let gb = grad(&base);
    let cols: Vec<Vec<Rational>> = families.iter().map(grad).collect();
    let a: Vec<Vec<Rational>> = (0..4).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let b: Vec<Rational> = gb.iter().map(|x| -x.clone()).collect();
    let coeffs = match crate::linalg::solve_linear(&crate::Matrix::from_rows(a, 4, &()), &b)? {
        crate::linalg::Solution::Unique(c) => c,
        _ => {
            return Err(Error::InvalidArgument(
                "node does not determine a Kummer quartic".into(),
            ))
        }
    };
    let mut f = base;
    for (fam, c) in families.iter().zip(&coeffs) {
        f = &f + &fam.scale(c);
    }
    let [a, b, c, d] = node;
    let mut nodes = Vec::new();
    for perm in [[a, b, c, d], [b, a, d, c], [c, d, a, b], [d, c, b, a]] {
        for signs in [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]] {
            nodes.push(
                perm.iter()
                    .zip(signs)
                    .map(|(&v, s)| Rational::from(v * s))
                    .collect::<Vec<_>>(),
            );
        }
    }
    ImplicitHypersurface::new("kummer", f, nodes)
}

/// A served catalog entry.
#[derive(Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    /// The Legendrian variety itself.
    pub variety: Variety,
    /// Source of a lift entry.
    pub source: Option<Variety>,
    pub expected_dim: usize,
    pub expected_ambient: usize,
    /// Form carried by the construction (lifts); otherwise fitted.
    pub attached_form: Option<SymplecticForm>,
    pub recommended: Backend,
    fit: OnceLock<Result<FitResult>>,
}

/// Names served by [`catalog_get`], with a one-line description.
pub fn catalog_list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("twisted_cubic", "rational normal curve (1, t, t^2, t^3) in P^3"),
        ("p1xQ(m)", "cubic form t0*(x1^2+...+xm^2): (m+1)-fold in P^(2m+3)"),
        ("gr36", "cubic form det of a 3x3 matrix: 9-fold in P^19"),
        ("lg36", "cubic form det of a symmetric 3x3 matrix: 6-fold in P^13"),
        (
            "spinor6",
            "cubic form Pfaffian of a 6x6 antisymmetric matrix: 15-fold in P^31",
        ),
        (
            "conic_conormal_demo",
            "conormal lift of the conic (1, t, t^2): surface in P^5",
        ),
        ("nodal_cubic", "conormal lift of z*y^2 - x^3 - x^2*z: surface in P^5"),
        (
            "kummer(a,b,c,d)",
            "conormal lift of the Kummer quartic with a node at (a:b:c:d): 3-fold in P^7",
        ),
    ]
}

fn parse_args(name: &str) -> Result<(String, Vec<i64>)> {
    let Some(open) = name.find('(') else {
        return Ok((name.to_string(), Vec::new()));
    };
    if !name.ends_with(')') {
        return Err(Error::UnknownEntry(name.to_string()));
    }
    let args = name[open + 1..name.len() - 1]
        .split(',')
        .map(|a| {
            a.trim()
                .parse::<i64>()
                .map_err(|_| Error::UnknownEntry(name.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((name[..open].to_string(), args))
}

fn param_entry(name: &str, description: String, v: ParamVariety, dim: usize) -> CatalogEntry {
    let ambient = v.ambient_dim();
    CatalogEntry {
        name: name.to_string(),
        description,
        variety: Variety::Param(Arc::new(v)),
        source: None,
        expected_dim: dim,
        expected_ambient: ambient,
        attached_form: None,
        recommended: Backend::Exact,
        fit: OnceLock::new(),
    }
}

fn lift_entry(
    name: &str,
    description: String,
    source: Variety,
    dim: usize,
    recommended: Backend,
) -> Result<CatalogEntry> {
    let lift: ConormalLift = build_conormal_lift(&source)?.with_name(name);
    let form = lift.form().clone();
    let ambient = lift.ambient_dim();
    Ok(CatalogEntry {
        name: name.to_string(),
        description,
        variety: Variety::Conormal(Arc::new(lift)),
        source: Some(source),
        expected_dim: dim,
        expected_ambient: ambient,
        attached_form: Some(form),
        recommended,
        fit: OnceLock::new(),
    })
}

/// Construct an entry without consulting the registry.
pub fn build_entry(name: &str) -> Result<CatalogEntry> {
    let (base, args) = parse_args(name)?;
    let unknown = || Error::UnknownEntry(name.to_string());
    let description = catalog_list()
        .iter()
        .find(|(n, _)| n.split('(').next() == Some(base.as_str()))
        .map(|(_, d)| d.to_string())
        .ok_or_else(unknown)?;
    match (base.as_str(), args.as_slice()) {
        ("twisted_cubic", []) => {
            let t = var_names(&["t"]);
            let coords = ["1", "t", "t^2", "t^3"]
                .iter()
                .map(|c| parse_poly(c, &t))
                .collect::<Result<_>>()?;
            Ok(param_entry(
                name,
                description,
                ParamVariety::new(name, t, &[], coords)?,
                1,
            ))
        }
        ("p1xQ", [m]) if (1..=12).contains(m) => {
            let m = *m as usize;
            let mut names = vec!["t0".to_string()];
            names.extend((1..=m).map(|i| format!("x{i}")));
            let q = (1..=m).map(|i| format!("x{i}^2")).collect::<Vec<_>>().join(" + ");
            let n = parse_poly(&format!("t0*({q})"), &names)?;
            Ok(param_entry(name, description, cubic_form_variety(name, &n)?, m + 1))
        }
        ("gr36", []) => {
            let names: Vec<String> = (1..=3).flat_map(|i| (1..=3).map(move |j| format!("x{i}{j}"))).collect();
            let e = |i: usize, j: usize| ["x11", "x12", "x13", "x21", "x22", "x23", "x31", "x32", "x33"][3 * i + j];
            let n = parse_poly(
                &det3([
                    [e(0, 0), e(0, 1), e(0, 2)],
                    [e(1, 0), e(1, 1), e(1, 2)],
                    [e(2, 0), e(2, 1), e(2, 2)],
                ]),
                &names,
            )?;
            Ok(param_entry(name, description, cubic_form_variety(name, &n)?, 9))
        }
        ("lg36", []) => {
            let names = var_names(&["a", "b", "c", "d", "e", "f"]);
            let n = parse_poly(&det3([["a", "d", "e"], ["d", "b", "f"], ["e", "f", "c"]]), &names)?;
            Ok(param_entry(name, description, cubic_form_variety(name, &n)?, 6))
        }
        ("spinor6", []) => {
            let names: Vec<String> = (1..=6)
                .flat_map(|i| (i + 1..=6).map(move |j| format!("x{i}{j}")))
                .collect();
            let n = pfaffian(&[1, 2, 3, 4, 5, 6], &names);
            Ok(param_entry(name, description, cubic_form_variety(name, &n)?, 15))
        }
        ("conic_conormal_demo", []) => {
            let t = var_names(&["t"]);
            let coords = ["1", "t", "t^2"]
                .iter()
                .map(|c| parse_poly(c, &t))
                .collect::<Result<_>>()?;
            let conic = Variety::Param(Arc::new(ParamVariety::new("conic", t, &[], coords)?));
            lift_entry(name, description, conic, 2, Backend::Exact)
        }
        ("nodal_cubic", []) => {
            let vars = var_names(&["x", "y", "z"]);
            let f = parse_poly("z*y^2 - x^3 - x^2*z", &vars)?;
            let node = vec![Rational::ZERO, Rational::ZERO, Rational::ONE];
            let z = Variety::Hypersurface(Arc::new(ImplicitHypersurface::new("nodal_cubic", f, vec![node])?));
            lift_entry(name, description, z, 2, Backend::Exact)
        }
        ("kummer", []) | ("kummer", [_, _, _, _]) => {
            let node = match args.as_slice() {
                [a, b, c, d] => [*a, *b, *c, *d],
                _ => [1, 2, 3, 5],
            };
            let z = Variety::Hypersurface(Arc::new(kummer_surface(node)?));
            lift_entry(name, description, z, 3, Backend::Approx { precision_bits: 128 })
        }
        _ => Err(unknown()),
    }
}

fn registry() -> &'static Mutex<HashMap<String, Arc<CatalogEntry>>> {
    static REGISTRY: OnceLock<Mutex<HashMap<String, Arc<CatalogEntry>>>> = OnceLock::new();
    REGISTRY.get_or_init(Default::default)
}

/// Look up (building on first use) a catalog entry by name, e.g. `lg36` or `p1xQ(3)`.
pub fn catalog_get(name: &str) -> Result<Arc<CatalogEntry>> {
    if let Some(e) = registry().lock().expect("registry lock").get(name) {
        return Ok(e.clone());
    }
    let entry = Arc::new(build_entry(name)?);
    let mut reg = registry().lock().expect("registry lock");
    Ok(reg.entry(name.to_string()).or_insert(entry).clone())
}

/// Number of frames so that the fit has at least three equations per unknown.
pub fn fit_frame_count(ambient: usize, frame_len: usize) -> usize {
    let unknowns = ambient * (ambient - 1) / 2;
    let pairs = (frame_len * (frame_len.saturating_sub(1)) / 2).max(1);
    (3 * unknowns).div_ceil(pairs)
}

/// Fit forms for `v` from seeded exact frames.
pub fn fit_variety(v: &Variety, seed: u64) -> Result<(FitResult, usize)> {
    let probe = sample::<Rational>(v, 1, seed, &SampleConfig::default(), &(), true)?;
    let frame_len = probe.samples[0].frame.vectors.len();
    let count = fit_frame_count(v.ambient_dim(), frame_len);
    let set = sample::<Rational>(v, count, seed, &SampleConfig::default(), &(), true)?;
    let frames: Vec<Vec<Vec<Rational>>> = set.samples.into_iter().map(|s| s.frame.vectors).collect();
    let n = frames.len();
    Ok((fit_symplectic_form(&frames)?, n))
}

impl CatalogEntry {
    /// The fitted solution space (computed once).
    pub fn fit(&self) -> Result<&FitResult> {
        self.fit
            .get_or_init(|| fit_variety(&self.variety, FIT_SEED).map(|(f, _)| f))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// The form the entry is verified against: the attached one for lifts,
    /// otherwise the unique fitted form.
    pub fn form(&self) -> Result<SymplecticForm> {
        if let Some(f) = &self.attached_form {
            return Ok(f.clone());
        }
        let fit = self.fit()?;
        if fit.dim != 1 || !fit.nondegenerate {
            return Err(Error::SelfCheckFailed {
                name: self.name.clone(),
                reason: format!(
                    "fitted form space has dimension {} ({})",
                    fit.dim,
                    if fit.nondegenerate {
                        "nondegenerate"
                    } else {
                        "degenerate"
                    }
                ),
            });
        }
        fit.generator().ok_or_else(|| Error::SelfCheckFailed {
            name: self.name.clone(),
            reason: "fitted generator is degenerate".into(),
        })
    }
}

/// Fit report for any variety (the `fit-form` command).
pub fn fit_report(v: &Variety, seed: u64) -> Result<FitReport> {
    let start = Instant::now();
    let (fit, frames) = fit_variety(v, seed)?;
    let generator = fit.generator().map(|g| {
        g.rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect()
    });
    let ok = fit.dim == 1 && fit.nondegenerate;
    Ok(FitReport {
        schema: SCHEMA_VERSION,
        kind: "fit",
        variety: v.name(),
        seed,
        frames,
        equations: fit.equations,
        unknowns: fit.unknowns,
        dimension: fit.dim,
        nondegenerate: fit.nondegenerate,
        generator,
        notes: Vec::new(),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        elapsed: start.elapsed(),
    })
}

/// Fit on exact frames (unique nondegenerate generator required, and
/// proportional to the attached form when there is one), then the Legendrian
/// check at 50 samples on the entry's recommended backend. Approximate-only
/// entries without enough exact smooth points skip the fit.
pub fn self_check(entry: &CatalogEntry) -> Result<VerificationReport> {
    let fail = |reason: String| Error::SelfCheckFailed {
        name: entry.name.clone(),
        reason,
    };
    let mut notes = Vec::new();
    match entry.fit() {
        Ok(fit) => {
            if fit.dim != 1 || !fit.nondegenerate {
                return Err(fail(format!("fitted form space has dimension {}", fit.dim)));
            }
            if let Some(attached) = &entry.attached_form {
                let g = fit
                    .generator()
                    .ok_or_else(|| fail("fitted generator is degenerate".into()))?;
                if !proportional(attached, &g) {
                    return Err(fail("fitted form differs from the attached form".into()));
                }
            }
        }
        Err(Error::BudgetExhausted(_)) if entry.recommended != Backend::Exact => {
            notes.push("form fit skipped: too few exact smooth points".to_string());
        }
        Err(e) => return Err(e),
    }
    let form = entry.form()?;
    let opts = CheckOptions::new(50, 0);
    let mut report = match entry.recommended {
        Backend::Exact => check_legendrian::<Rational>(&entry.variety, &form, &opts, &())?,
        Backend::Approx { precision_bits } => {
            check_legendrian::<Approx>(&entry.variety, &form, &opts, &Precision::new(precision_bits))?
        }
    };
    report.notes.extend(notes);
    if report.verdict != Verdict::Pass {
        return Err(fail(format!("Legendrian check verdict {}", report.verdict.as_str())));
    }
    Ok(report)
}

fn proportional(a: &SymplecticForm, b: &SymplecticForm) -> bool {
    let flat = |f: &SymplecticForm| -> Vec<Rational> { f.rows().iter().flatten().cloned().collect() };
    crate::scalar::primitive(&flat(a)) == crate::scalar::primitive(&flat(b))
}
