//! Acceptance criteria, one pass/fail line each. Tolerances and time limits
//! are pinned below; run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{anyhow, ensure, Result};
use leglab::catalog::{build_entry, catalog_get, fit_variety, self_check};
use leglab::conormal::{lift_checks, reduction_agreement_check, singularity_classification_probe, ConormalLift};
use leglab::legendrian::{
    check_legendrian, coisotropic_reduce, secant_avoidance_probe, verify_reduction, witness_report, CheckOptions,
};
use leglab::linalg::exact_rank;
use leglab::report::Verdict;
use leglab::rng;
use leglab::scalar::primitive_rational;
use leglab::symplectic::{induced_form, Hyperplane};
use leglab::variety::{dimension_estimate, Variety};
use leglab::{Approx, Field, Matrix, Precision, Rational, SymplecticForm};
use leglab_cli::run_command;

const TWISTED_CUBIC_LIMIT: Duration = Duration::from_secs(1);
const CONIC_EXTEND_LIMIT: Duration = Duration::from_secs(5);
const CATALOG_LIMIT: Duration = Duration::from_secs(120);
const KUMMER_BITS: usize = 100;
const KUMMER_RESIDUAL: f64 = 8.881_784_197_001_252e-16; // 2^-50
const SECANT_SEEDS: [u64; 3] = [1, 2, 3];
const SECANT_PAIRS: usize = 100;
const WITNESS_BUDGET: usize = 100;
const FORM_INSTANCES: usize = 1000;

fn lift(name: &str) -> Result<Arc<ConormalLift>> {
    match &catalog_get(name)?.variety {
        Variety::Conormal(l) => Ok(l.clone()),
        _ => Err(anyhow!("{name} is not a conormal lift")),
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration> {
    let t = start.elapsed();
    ensure!(t < limit, "took {:.2} s, limit {} s", t.as_secs_f64(), limit.as_secs());
    Ok(t)
}

fn twisted_cubic() -> Result<String> {
    let start = Instant::now();
    let entry = build_entry("twisted_cubic")?;
    let (fit, _) = fit_variety(&entry.variety, 0)?;
    ensure!(
        fit.dim == 1 && fit.nondegenerate,
        "fitted form space has dimension {}",
        fit.dim
    );
    let g = fit.generator().ok_or_else(|| anyhow!("degenerate generator"))?;
    let flat: Vec<Rational> = g.rows().iter().flatten().cloned().collect();
    let expected: Vec<Rational> = [0, 0, 0, 1, 0, 0, -3, 0, 0, 3, 0, 0, -1, 0, 0, 0]
        .map(Rational::from)
        .to_vec();
    ensure!(
        primitive_rational(&flat) == primitive_rational(&expected),
        "unexpected generator"
    );
    let r = check_legendrian::<Rational>(&entry.variety, &g, &CheckOptions::new(50, 0), &())?;
    ensure!(
        r.verdict == Verdict::Pass && r.samples_evaluated == 50,
        "verify: {}",
        r.verdict.as_str()
    );
    let bad = check_legendrian::<Rational>(
        &entry.variety,
        &SymplecticForm::standard(2)?,
        &CheckOptions::new(50, 0),
        &(),
    )?;
    ensure!(
        bad.verdict == Verdict::Fail && !bad.witnesses.is_empty(),
        "standard form was not rejected"
    );
    let t = within(start, TWISTED_CUBIC_LIMIT)?;
    Ok(format!(
        "unique form, 50/50 Lagrangian, standard form rejected, {:.3} s < 1 s",
        t.as_secs_f64()
    ))
}

fn conic_extend() -> Result<String> {
    let start = Instant::now();
    let l = lift("conic_conormal_demo")?;
    let v = Variety::Conormal(l.clone());
    let r = check_legendrian::<Rational>(&v, l.form(), &CheckOptions::new(100, 0), &())?;
    ensure!(
        r.verdict == Verdict::Pass && r.samples_evaluated == 100,
        "verify: {}",
        r.verdict.as_str()
    );
    let c = lift_checks::<Rational>(&l, 100, 0, 10, &())?;
    ensure!(
        c.incidence_violations == 0 && c.torus_failures == 0,
        "lift checks failed"
    );
    ensure!(c.torus_checks == 1000, "{} torus checks", c.torus_checks);
    let s = singularity_classification_probe::<Rational>(&l, 100, 0, &())?;
    ensure!(s.rank_drops == 0, "{} rank drops", s.rank_drops);
    let t = within(start, CONIC_EXTEND_LIMIT)?;
    Ok(format!(
        "100 samples, 1000 torus checks, 0 drops, {:.2} s < 5 s",
        t.as_secs_f64()
    ))
}

fn agreement() -> Result<String> {
    let l = lift("conic_conormal_demo")?;
    let r = reduction_agreement_check(&l, 25, 0, false)?;
    ensure!(
        r.verdict == Verdict::Pass && r.agreements >= 20,
        "{} agreements",
        r.agreements
    );
    let neg = reduction_agreement_check(&l, 25, 0, true)?;
    ensure!(neg.verdict == Verdict::Fail, "negative control did not fail");
    Ok(format!("{} agreements >= 20, negative control fails", r.agreements))
}

fn catalog_dimensions() -> Result<String> {
    let start = Instant::now();
    for (name, dim) in [("gr36", 9), ("spinor6", 15), ("lg36", 6)] {
        let entry = catalog_get(name)?;
        let est = dimension_estimate(&entry.variety, 20, 0);
        ensure!(
            est.dimension == Some(dim),
            "{name}: dimension {:?}, expected {dim}",
            est.dimension
        );
        let r = self_check(&entry)?;
        ensure!(r.verdict == Verdict::Pass, "{name}: self-check {}", r.verdict.as_str());
    }
    let t = within(start, CATALOG_LIMIT)?;
    Ok(format!(
        "gr36 = 9, spinor6 = 15, lg36 = 6, self-checks pass, {:.1} s < 120 s",
        t.as_secs_f64()
    ))
}

fn hyperplane_reductions() -> Result<String> {
    let mut most_draws = 0;
    for name in ["conic_conormal_demo", "lg36", "p1xQ(3)"] {
        let entry = catalog_get(name)?;
        let form = entry.form()?;
        for seed in SECANT_SEEDS {
            let r = Arc::new(coisotropic_reduce(&entry.variety, &form, 1, seed)?);
            let v = verify_reduction::<Rational>(&r, &CheckOptions::new(30, seed), &())?;
            ensure!(
                v.verdict == Verdict::Pass,
                "{name} seed {seed}: reduction {}",
                v.verdict.as_str()
            );
            ensure!(
                v.dimension.map(|d| d + 1) == v.source_dimension,
                "{name}: dimension did not drop by 1"
            );
            let s = secant_avoidance_probe(&r, SECANT_PAIRS, seed)?;
            ensure!(
                s.pairs_tested == SECANT_PAIRS && s.hits == 0,
                "{name} seed {seed}: {} secant hits",
                s.hits
            );
        }
        let w = witness_report(&entry.variety, &form, WITNESS_BUDGET, 0)?;
        ensure!(w.found, "{name}: no witness in {WITNESS_BUDGET} draws");
        most_draws = most_draws.max(w.draws);
    }
    Ok(format!(
        "3 varieties x 3 seeds: Legendrian, dimension -1, 0/100 secant hits; witnesses within {most_draws} <= 100 draws"
    ))
}

fn lg36_iterated() -> Result<String> {
    let entry = catalog_get("lg36")?;
    let r = Arc::new(coisotropic_reduce(&entry.variety, &entry.form()?, 4, 0)?);
    ensure!(r.ambient_dim() == 6, "ambient {}", r.ambient_dim());
    let v = verify_reduction::<Rational>(&r, &CheckOptions::new(20, 0), &())?;
    ensure!(v.verdict == Verdict::Pass, "verdict {}", v.verdict.as_str());
    ensure!(
        v.dimension == Some(2) && v.isotropy_violations == 0,
        "dimension {:?}",
        v.dimension
    );
    Ok(format!(
        "k = 4: surface in P^5, Lagrangian at {} samples",
        v.samples_evaluated
    ))
}

fn nodal_singularity() -> Result<String> {
    let l = lift("nodal_cubic")?;
    let s = singularity_classification_probe::<Rational>(&l, 50, 0, &())?;
    ensure!(
        s.unexpected_drops == 0 && s.missed_singular == 0,
        "{} unexpected, {} missed",
        s.unexpected_drops,
        s.missed_singular
    );
    let smooth = s
        .probes
        .iter()
        .filter(|p| p.stratum == "A" && !p.expected_drop && p.rank == p.expected_rank)
        .count();
    ensure!(smooth >= 10, "{smooth} smooth stratum A probes at full rank");
    let node: Vec<String> = ["0", "0", "1", "0", "0", "0"].map(String::from).to_vec();
    ensure!(
        s.probes.iter().any(|p| p.point == node && p.rank < p.expected_rank),
        "no rank drop at the node"
    );
    Ok(format!(
        "{smooth} smooth points at full rank, drop at the node, 0 unexpected drops"
    ))
}

fn kummer() -> Result<String> {
    let l = lift("kummer")?;
    let ctx = Precision::new(KUMMER_BITS);
    let v = Variety::Conormal(l.clone());
    let r = check_legendrian::<Approx>(&v, l.form(), &CheckOptions::new(50, 0), &ctx)?;
    ensure!(
        r.verdict == Verdict::Pass && r.samples_evaluated >= 50,
        "verify: {}",
        r.verdict.as_str()
    );
    let worst: f64 = r.worst_residual.as_deref().unwrap_or("inf").parse()?;
    ensure!(worst < KUMMER_RESIDUAL, "worst residual {worst:e}");
    let s = singularity_classification_probe::<Approx>(&l, 50, 0, &ctx)?;
    ensure!(s.flagged_clusters >= 1, "no node cluster flagged");
    Ok(format!(
        "{} samples at {KUMMER_BITS} bits, worst residual {worst:.1e} < 2^-50, {} clusters",
        r.samples_evaluated, s.flagged_clusters
    ))
}

fn cli_json(args: &[&str], threads: usize) -> Result<String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let t = threads.to_string();
    let argv = ["leglab", "--threads", &t].into_iter().chain(args.iter().copied());
    let code = run_command(argv, &mut out, &mut err);
    ensure!(code != 2, "{args:?}: {}", String::from_utf8_lossy(&err));
    Ok(String::from_utf8(out)?)
}

fn determinism() -> Result<String> {
    let commands: [&[&str]; 9] = [
        &["verify", "--catalog", "twisted_cubic"],
        &["extend", "--catalog", "conic_conormal_demo", "--samples", "100"],
        &["agree", "--catalog", "conic_conormal_demo", "--samples", "25"],
        &["catalog", "build", "spinor6", "--samples", "20"],
        &["reduce", "--catalog", "p1xQ(3)", "--seed", "2", "--samples", "30"],
        &["reduce", "--catalog", "lg36", "--codim", "4", "--samples", "20"],
        &["extend", "--catalog", "nodal_cubic"],
        &[
            "extend",
            "--catalog",
            "kummer",
            "--backend",
            "approx",
            "--precision",
            "100",
        ],
        &["fit-form", "--catalog", "twisted_cubic"],
    ];
    for args in commands {
        let first = cli_json(args, 1)?;
        ensure!(cli_json(args, 1)? == first, "{args:?}: two runs differ");
        ensure!(cli_json(args, 8)? == first, "{args:?}: 1 and 8 threads differ");
    }
    Ok(format!(
        "{} commands byte-identical across runs and 1/8 threads",
        commands.len()
    ))
}

/// Random `PᵀJP` with `P` invertible, for `2·half` between 4 and 12.
fn random_form(r: &mut rng::Rng, half: usize) -> Result<SymplecticForm> {
    let n = 2 * half;
    loop {
        let rows: Vec<Vec<Rational>> = (0..n).map(|_| rng::integer_vector(r, n, 2)).collect();
        let p = Matrix::from_rows(rows, n, &());
        if exact_rank(&p) < n {
            continue;
        }
        let j = SymplecticForm::standard(half)?.matrix();
        return Ok(SymplecticForm::from_matrix(&p.transpose().mul(&j)?.mul(&p)?)?);
    }
}

fn into_hyperplane(a: &[Rational], v: &[Rational]) -> Vec<Rational> {
    let e = a.iter().position(|x| !x.is_zero()).expect("nonzero covector");
    let av = leglab::linalg::dot(a, v);
    let mut out = v.to_vec();
    out[e] = &out[e] - &(av / &a[e]);
    out
}

fn form_preservation() -> Result<String> {
    let mut r = rng::stream(0, "acceptance-forms");
    for i in 0..FORM_INSTANCES {
        let half = 2 + i % 5;
        let n = 2 * half;
        let form = random_form(&mut r, half)?;
        let a = rng::integer_vector(&mut r, n, 5);
        let chart = induced_form(&form, &Hyperplane::new(&form, &a)?)?;
        let v = into_hyperplane(&a, &rng::integer_vector(&mut r, n, 9));
        let w = into_hyperplane(&a, &rng::integer_vector(&mut r, n, 9));
        ensure!(
            chart.induced.eval(&chart.project(&v), &chart.project(&w))? == form.eval(&v, &w)?,
            "instance {i}: ω'(q v, q w) != ω(v, w)"
        );
        ensure!(
            chart.project(&chart.hyperplane.center).iter().all(Field::is_zero),
            "instance {i}: q(h) != 0"
        );
    }
    Ok(format!(
        "{FORM_INSTANCES} random instances in dimensions 4..12, exact equality"
    ))
}

type Criterion = (&'static str, fn() -> Result<String>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("twisted cubic end to end", twisted_cubic),
        ("conic conormal extension", conic_extend),
        ("reduction agrees with phi", agreement),
        ("subadjoint catalog dimensions", catalog_dimensions),
        ("hyperplane reductions", hyperplane_reductions),
        ("lg36 iterated reduction", lg36_iterated),
        ("nodal cubic singularities", nodal_singularity),
        ("kummer in floating point", kummer),
        ("byte-identical reports", determinism),
        ("form preservation", form_preservation),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} {title}: PASS ({detail})", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} {title}: FAIL ({e:#})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
