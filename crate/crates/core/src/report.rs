//! Structured verdicts emitted by every check.
//!
//! Field order in these structs is the serialized key order. Exact values are
//! carried as strings (`p/q`); counts are plain integers. Wall-clock timings
//! are kept out of the serialized form so identical configurations produce
//! identical bytes.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;

use crate::scalar::{rational_string, Backend, Rational};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

pub fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational_string).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RankCount {
    pub rank: usize,
    pub count: usize,
}

pub fn histogram_entries(h: &BTreeMap<usize, usize>) -> Vec<RankCount> {
    h.iter().map(|(&rank, &count)| RankCount { rank, count }).collect()
}

/// A concrete reason for failure, located at a sample.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub kind: String,
    pub sample: usize,
    pub params: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<[usize; 2]>,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub backend: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<usize>,
    pub seed: u64,
    pub samples_requested: usize,
    pub samples_evaluated: usize,
    pub samples_discarded: usize,
    pub ambient_dim: usize,
    pub expected_rank: usize,
    pub rank_histogram: Vec<RankCount>,
    pub isotropy_violations: usize,
    pub rank_violations: usize,
    pub suspected_singular: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_ambient_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

pub fn backend_fields(b: Backend) -> (&'static str, Option<usize>) {
    (b.name(), b.precision_bits())
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub seed: u64,
    pub frames: usize,
    pub equations: usize,
    pub unknowns: usize,
    pub dimension: usize,
    pub nondegenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<Vec<String>>>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub seed: u64,
    pub budget: usize,
    pub draws: usize,
    pub found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecantReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub seed: u64,
    pub points: usize,
    pub pairs_requested: usize,
    pub pairs_tested: usize,
    pub hits: usize,
    pub hit_pairs: Vec<[usize; 2]>,
    pub injective_on_sample: bool,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementWitness {
    pub params: Vec<String>,
    pub reduced: Vec<String>,
    pub phi: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub seed: u64,
    pub samples_requested: usize,
    pub sections_evaluated: usize,
    pub outside_chart: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub negative_control: bool,
    pub witnesses: Vec<AgreementWitness>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub backend: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<usize>,
    pub seed: u64,
    pub samples_evaluated: usize,
    pub incidence_violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_incidence_residual: Option<String>,
    pub torus_checks: usize,
    pub torus_failures: usize,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeEntry {
    pub stratum: &'static str,
    pub point: Vec<String>,
    /// Listed singular point, or dual point of a parabolic point.
    pub expected_drop: bool,
    pub rank: usize,
    pub expected_rank: usize,
    pub outcome: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub backend: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<usize>,
    pub seed: u64,
    pub expected_rank: usize,
    pub probes: Vec<ProbeEntry>,
    pub rank_drops: usize,
    pub unexpected_drops: usize,
    pub missed_singular: usize,
    pub flagged_clusters: usize,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub schema: u32,
    pub kind: &'static str,
    pub variety: String,
    pub seed: u64,
    pub samples: usize,
    pub ambient_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_ambient_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_dimension: Option<usize>,
    pub rank_histogram: Vec<RankCount>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Any report, serialized without a wrapper tag (each carries `kind`).
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Verification(VerificationReport),
    Fit(FitReport),
    Witness(WitnessReport),
    Secant(SecantReport),
    Agreement(AgreementReport),
    Lift(LiftReport),
    Singularity(SingularityReport),
    Dimension(DimensionReport),
}

impl Report {
    pub fn verdict(&self) -> Verdict {
        match self {
            Report::Verification(r) => r.verdict,
            Report::Fit(r) => r.verdict,
            Report::Witness(r) => r.verdict,
            Report::Secant(r) => r.verdict,
            Report::Agreement(r) => r.verdict,
            Report::Lift(r) => r.verdict,
            Report::Singularity(r) => r.verdict,
            Report::Dimension(r) => r.verdict,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Report::Verification(r) => r.kind,
            Report::Fit(r) => r.kind,
            Report::Witness(r) => r.kind,
            Report::Secant(r) => r.kind,
            Report::Agreement(r) => r.kind,
            Report::Lift(r) => r.kind,
            Report::Singularity(r) => r.kind,
            Report::Dimension(r) => r.kind,
        }
    }

    pub fn variety(&self) -> &str {
        match self {
            Report::Verification(r) => &r.variety,
            Report::Fit(r) => &r.variety,
            Report::Witness(r) => &r.variety,
            Report::Secant(r) => &r.variety,
            Report::Agreement(r) => &r.variety,
            Report::Lift(r) => &r.variety,
            Report::Singularity(r) => &r.variety,
            Report::Dimension(r) => &r.variety,
        }
    }

    pub fn elapsed(&self) -> Duration {
        match self {
            Report::Verification(r) => r.elapsed,
            Report::Fit(r) => r.elapsed,
            Report::Witness(r) => r.elapsed,
            Report::Secant(r) => r.elapsed,
            Report::Agreement(r) => r.elapsed,
            Report::Lift(r) => r.elapsed,
            Report::Singularity(r) => r.elapsed,
            Report::Dimension(r) => r.elapsed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_combine() {
        use Verdict::*;
        assert_eq!(Pass.combine(Pass), Pass);
        assert_eq!(Pass.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Fail), Fail);
        assert_eq!(Fail.exit_code(), 1);
    }
}
