//! Command-line front end: argument handling, variety loading and report
//! rendering for the `leglab` binary.

pub mod dsl;

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use leglab::catalog::{self, CatalogEntry};
use leglab::conormal::{
    build_conormal_lift, lift_checks, reduction_agreement_check, singularity_classification_probe, ConormalLift,
};
use leglab::legendrian::{
    check_legendrian, coisotropic_reduce, secant_avoidance_probe, verify_reduction, witness_report, CheckOptions,
};
use leglab::report::{histogram_entries, DimensionReport, Report, Verdict, SCHEMA_VERSION};
use leglab::variety::{dimension_estimate, dimension_estimate_approx, Variety};
use leglab::{Approx, Backend, Precision, Rational, SymplecticForm};

use crate::dsl::{export_definition, parse_definition, FormSpec};

/// Entries checked by `catalog self-check` without a name.
const SELF_CHECK_ENTRIES: [&str; 8] = [
    "twisted_cubic",
    "p1xQ(3)",
    "lg36",
    "gr36",
    "spinor6",
    "conic_conormal_demo",
    "nodal_cubic",
    "kummer",
];

#[derive(Parser, Debug)]
#[command(name = "leglab", version, about = "Construct and verify Legendrian varieties")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Arithmetic backend.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    /// Working precision of the approx backend, in bits.
    #[arg(long, global = true, default_value_t = 128)]
    precision: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample budget per check.
    #[arg(long, global = true, default_value_t = 50)]
    samples: usize,
    /// Write the rendered result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "LEGLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Exact,
    Approx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Standard,
    Fit,
    Explicit,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Catalog entry name, e.g. `lg36` or `p1xQ(3)`.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    catalog: Option<String>,
    /// Variety definition file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Symplectic form to verify against (default: attached, else fitted).
    #[arg(long, value_enum)]
    form: Option<FormArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that sampled cone tangent spaces are Lagrangian.
    Verify(SourceArgs),
    /// Fit the antisymmetric forms making sampled tangent frames isotropic.
    FitForm(SourceArgs),
    /// Hyperplane (or iterated coisotropic) reduction with its checks.
    Reduce {
        #[command(flatten)]
        source: SourceArgs,
        /// Number of successive hyperplane reductions.
        #[arg(long, default_value_t = 1)]
        codim: usize,
        /// Section point pairs for the secant probe.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Draw budget for the non-isotropic witness search.
        #[arg(long, default_value_t = 100)]
        budget: usize,
    },
    /// Conormal lift with incidence, torus and singularity probes.
    Extend {
        #[command(flatten)]
        source: SourceArgs,
        /// Random scalings tested per sample.
        #[arg(long, default_value_t = 10)]
        torus_trials: usize,
    },
    /// Compare reduction of a lift with the explicit chart map.
    Agree {
        #[command(flatten)]
        source: SourceArgs,
        /// Run the permuted-coordinate control instead.
        #[arg(long)]
        negative_control: bool,
    },
    /// Inspect the built-in catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    /// List entry names.
    List,
    /// Build an entry and estimate its dimension.
    Build { name: String },
    /// Fit and verify an entry (all default entries without a name).
    SelfCheck { name: Option<String> },
    /// Print an entry in the definition format.
    Export { name: String },
}

#[derive(Clone, Debug, Serialize)]
struct ConfigOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    backend: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    precision_bits: Option<usize>,
    seed: u64,
    samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ListEntry {
    pub name: &'static str,
    pub description: &'static str,
}

/// Everything a command produced.
#[derive(Debug)]
pub struct Outcome {
    command: String,
    config: ConfigOut,
    pub reports: Vec<Report>,
    entries: Option<Vec<ListEntry>>,
    /// Raw text output (definition export).
    raw: Option<String>,
}

impl Outcome {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn verdict(&self) -> Verdict {
        self.reports.iter().fold(Verdict::Pass, |v, r| v.combine(r.verdict()))
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: u32,
    command: &'a str,
    config: &'a ConfigOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<&'a [ListEntry]>,
    reports: &'a [Report],
    verdict: Verdict,
}

/// Render one report: compact canonical JSON, or a human summary with timing.
pub fn render_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(report).expect("reports serialize"),
        Format::Text => {
            let mut out = format!(
                "{} {}: {} ({:.1} ms)\n",
                report.kind(),
                report.variety(),
                report.verdict().as_str(),
                report.elapsed().as_secs_f64() * 1e3
            );
            let value = serde_json::to_value(report).expect("reports serialize");
            if let serde_json::Value::Object(map) = value {
                for (k, v) in map {
                    if matches!(k.as_str(), "schema" | "kind" | "variety" | "verdict") {
                        continue;
                    }
                    let shown = match v {
                        serde_json::Value::String(s) => s,
                        other => other.to_string(),
                    };
                    out.push_str(&format!("  {k}: {shown}\n"));
                }
            }
            out
        }
    }
}

/// Render a whole command result.
pub fn render_outcome(o: &Outcome, format: Format) -> String {
    if let Some(raw) = &o.raw {
        return raw.clone();
    }
    match format {
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA_VERSION,
                command: &o.command,
                config: &o.config,
                entries: o.entries.as_deref(),
                reports: &o.reports,
                verdict: o.verdict(),
            };
            let mut s = serde_json::to_string(&env).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            if let Some(entries) = &o.entries {
                for e in entries {
                    out.push_str(&format!("{:<22} {}\n", e.name, e.description));
                }
                return out;
            }
            for r in &o.reports {
                out.push_str(&render_report(r, Format::Text));
            }
            out.push_str(&format!("verdict: {}\n", o.verdict().as_str()));
            out
        }
    }
}

/// A loaded variety with whatever form information came with it.
struct Target {
    name: String,
    variety: Variety,
    entry: Option<Arc<CatalogEntry>>,
    file_form: Option<FormSpec>,
    describe: String,
}

fn load(args: &SourceArgs) -> Result<Target> {
    if let Some(name) = &args.catalog {
        let entry = catalog::catalog_get(name)?;
        return Ok(Target {
            name: entry.name.clone(),
            variety: entry.variety.clone(),
            entry: Some(entry),
            file_form: None,
            describe: format!("catalog:{name}"),
        });
    }
    let path = args
        .file
        .as_ref()
        .ok_or_else(|| anyhow!("--catalog or --file is required"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let def = parse_definition(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Target {
        name: def.name,
        variety: def.variety,
        entry: None,
        file_form: def.form,
        describe: format!(
            "file:{}",
            path.file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default()
        ),
    })
}

fn fitted_form(t: &Target) -> Result<SymplecticForm> {
    if let Some(e) = &t.entry {
        if e.attached_form.is_none() {
            return Ok(e.form()?);
        }
    }
    let (fit, _) = catalog::fit_variety(&t.variety, 0)?;
    if fit.dim != 1 || !fit.nondegenerate {
        bail!("no unique nondegenerate form: fitted space has dimension {}", fit.dim);
    }
    fit.generator().ok_or_else(|| anyhow!("fitted generator is degenerate"))
}

fn select_form(t: &Target, choice: Option<FormArg>) -> Result<SymplecticForm> {
    let spec = match choice {
        Some(FormArg::Standard) => Some(FormSpec::Standard),
        Some(FormArg::Fit) => Some(FormSpec::Fit),
        Some(FormArg::Explicit) => match &t.file_form {
            Some(f @ FormSpec::Explicit(_)) => Some(f.clone()),
            _ => bail!("--form explicit needs a definition file with `form explicit`"),
        },
        None => t.file_form.clone(),
    };
    match spec {
        Some(FormSpec::Standard) => {
            let d = t.variety.ambient_dim();
            if !d.is_multiple_of(2) {
                bail!("ambient dimension {d} is odd; no standard form");
            }
            Ok(SymplecticForm::standard(d / 2)?)
        }
        Some(FormSpec::Fit) => fitted_form(t),
        Some(FormSpec::Explicit(f)) => Ok(f),
        None => match (&t.variety, &t.entry) {
            (Variety::Conormal(l), _) => Ok(l.form().clone()),
            (_, Some(e)) => Ok(e.form()?),
            _ => fitted_form(t),
        },
    }
}

/// The lift of a target, or the target itself when it already is one.
fn lift_of(t: &Target) -> Result<Arc<ConormalLift>> {
    match &t.variety {
        Variety::Conormal(l) => Ok(l.clone()),
        Variety::Reduced(_) => bail!("reduced varieties cannot be lifted"),
        v => Ok(Arc::new(
            build_conormal_lift(v)?.with_name(&format!("{}_conormal", t.name)),
        )),
    }
}

/// Evaluate `$body` with `$t` bound to the scalar type of `$backend` and
/// `$ctx` to its context.
macro_rules! dispatch {
    ($backend:expr, $t:ident, $ctx:ident => $body:expr) => {
        match $backend {
            Backend::Exact => {
                type $t = Rational;
                let $ctx = &();
                $body
            }
            Backend::Approx { precision_bits } => {
                type $t = Approx;
                let $ctx = &Precision::new(precision_bits);
                $body
            }
        }
    };
}

fn dimension_report(entry: &CatalogEntry, backend: Backend, samples: usize, seed: u64) -> DimensionReport {
    let start = std::time::Instant::now();
    let est = match backend {
        Backend::Exact => dimension_estimate(&entry.variety, samples, seed),
        Backend::Approx { precision_bits } => {
            dimension_estimate_approx(&entry.variety, samples, seed, Precision::new(precision_bits))
        }
    };
    let ambient = entry.variety.ambient_dim();
    let verdict = match est.dimension {
        None => Verdict::Inconclusive,
        Some(d) if d == entry.expected_dim && ambient == entry.expected_ambient => Verdict::Pass,
        Some(_) => Verdict::Fail,
    };
    DimensionReport {
        schema: SCHEMA_VERSION,
        kind: "dimension",
        variety: entry.name.clone(),
        seed,
        samples: est.samples,
        ambient_dim: ambient,
        expected_ambient_dim: Some(entry.expected_ambient),
        dimension: est.dimension,
        expected_dimension: Some(entry.expected_dim),
        rank_histogram: histogram_entries(&est.histogram),
        verdict,
        elapsed: start.elapsed(),
    }
}

impl Cli {
    fn backend(&self) -> Backend {
        match self.backend {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Approx => Backend::Approx {
                precision_bits: self.precision,
            },
        }
    }

    fn config(&self, source: Option<String>) -> ConfigOut {
        let b = self.backend();
        ConfigOut {
            source,
            backend: b.name(),
            precision_bits: b.precision_bits(),
            seed: self.seed,
            samples: self.samples,
        }
    }

    fn outcome(&self, command: &str, source: Option<String>, reports: Vec<Report>) -> Outcome {
        Outcome {
            command: command.to_string(),
            config: self.config(source),
            reports,
            entries: None,
            raw: None,
        }
    }

    /// Run the parsed command and collect its reports.
    pub fn execute(&self) -> Result<Outcome> {
        let backend = self.backend();
        let opts = CheckOptions::new(self.samples, self.seed);
        let seed = self.seed;
        match &self.command {
            Command::Verify(src) => {
                let t = load(src)?;
                let form = select_form(&t, src.form)?;
                let r = dispatch!(backend, T, ctx => check_legendrian::<T>(&t.variety, &form, &opts, ctx))?;
                Ok(self.outcome("verify", Some(t.describe), vec![Report::Verification(r)]))
            }
            Command::FitForm(src) => {
                let t = load(src)?;
                let r = catalog::fit_report(&t.variety, seed)?;
                Ok(self.outcome("fit-form", Some(t.describe), vec![Report::Fit(r)]))
            }
            Command::Reduce {
                source,
                codim,
                pairs,
                budget,
            } => {
                let t = load(source)?;
                let form = select_form(&t, source.form)?;
                let reduced = Arc::new(coisotropic_reduce(&t.variety, &form, *codim, seed)?);
                let mut reports = vec![Report::Verification(
                    dispatch!(backend, T, ctx => verify_reduction::<T>(&reduced, &opts, ctx))?,
                )];
                if *codim == 1 {
                    reports.push(Report::Secant(secant_avoidance_probe(&reduced, *pairs, seed)?));
                    reports.push(Report::Witness(witness_report(&t.variety, &form, *budget, seed)?));
                }
                Ok(self.outcome("reduce", Some(t.describe), reports))
            }
            Command::Extend { source, torus_trials } => {
                let t = load(source)?;
                let lift = lift_of(&t)?;
                let v = Variety::Conormal(lift.clone());
                let reports = dispatch!(backend, T, ctx => {
                    vec![
                        Report::Verification(check_legendrian::<T>(&v, lift.form(), &opts, ctx)?),
                        Report::Lift(lift_checks::<T>(&lift, self.samples, seed, *torus_trials, ctx)?),
                        Report::Singularity(singularity_classification_probe::<T>(&lift, self.samples, seed, ctx)?),
                    ]
                });
                Ok(self.outcome("extend", Some(t.describe), reports))
            }
            Command::Agree {
                source,
                negative_control,
            } => {
                let t = load(source)?;
                let lift = lift_of(&t)?;
                let r = reduction_agreement_check(&lift, self.samples, seed, *negative_control)?;
                Ok(self.outcome("agree", Some(t.describe), vec![Report::Agreement(r)]))
            }
            Command::Catalog { action } => self.catalog(action),
        }
    }

    fn catalog(&self, action: &CatalogAction) -> Result<Outcome> {
        match action {
            CatalogAction::List => {
                let mut o = self.outcome("catalog list", None, Vec::new());
                o.entries = Some(
                    catalog::catalog_list()
                        .into_iter()
                        .map(|(name, description)| ListEntry { name, description })
                        .collect(),
                );
                Ok(o)
            }
            CatalogAction::Build { name } => {
                let entry = catalog::catalog_get(name)?;
                let r = dimension_report(&entry, self.backend(), self.samples, self.seed);
                Ok(self.outcome(
                    "catalog build",
                    Some(format!("catalog:{name}")),
                    vec![Report::Dimension(r)],
                ))
            }
            CatalogAction::SelfCheck { name } => {
                let names: Vec<&str> = match name {
                    Some(n) => vec![n.as_str()],
                    None => SELF_CHECK_ENTRIES.to_vec(),
                };
                let mut reports = Vec::new();
                for n in &names {
                    let entry = catalog::catalog_get(n)?;
                    reports.push(Report::Verification(catalog::self_check(&entry)?));
                }
                Ok(self.outcome(
                    "catalog self-check",
                    name.as_ref().map(|n| format!("catalog:{n}")),
                    reports,
                ))
            }
            CatalogAction::Export { name } => {
                let entry = catalog::catalog_get(name)?;
                let form = match entry.variety {
                    Variety::Conormal(_) => None,
                    _ => Some(FormSpec::Fit),
                };
                let mut o = self.outcome("catalog export", Some(format!("catalog:{name}")), Vec::new());
                o.raw = Some(export_definition(&entry.variety, form.as_ref())?);
                Ok(o)
            }
        }
    }
}

/// Exit status for an error: failed self-checks are failures, everything
/// else is a usage or budget problem.
fn error_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<leglab::Error>() {
        Some(leglab::Error::SelfCheckFailed { .. }) => 1,
        _ => 2,
    }
}

fn run_parsed(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let outcome = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the thread pool")?
            .install(|| cli.execute())?,
        None => cli.execute()?,
    };
    let rendered = render_outcome(&outcome, cli.format);
    match &cli.output {
        Some(path) => std::fs::write(path, &rendered).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(rendered.as_bytes())?,
    }
    Ok(outcome.verdict().exit_code())
}

/// Parse `argv` (including the program name), run, and return the exit code:
/// 0 pass, 1 fail, 2 inconclusive or usage error.
pub fn run_command<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match run_parsed(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            error_code(&e)
        }
    }
}
