//! Verification report types and their CSV/JSON renderings.

use serde::Serialize;

use crate::error::Result;
use crate::harness::stats::BinEstimate;
use crate::pmf::Pmf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Flagged,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Flagged => "flagged",
        })
    }
}

/// One CSV line: an identity measured at one cutoff against one prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub identity: String,
    pub target: String,
    pub cutoff: u64,
    pub n_returned: u64,
    pub censored_frac: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub analytic: Option<f64>,
    pub tv: Option<f64>,
    pub chi2: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub label: String,
    pub tv: f64,
    pub chi2: f64,
    pub chi2_p_value: f64,
    pub pmf: Pmf,
}

/// Empirical law at the largest cutoff next to every candidate prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawDetail {
    pub cutoff: u64,
    pub n: u64,
    pub empirical: Vec<BinEstimate>,
    pub predictions: Vec<Prediction>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub target: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub rows: Vec<ReportRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub laws: Vec<LawDetail>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub dimension: usize,
    pub walk: String,
    pub seed: u64,
    pub cutoff_ladder: Vec<u64>,
    pub excursions: u64,
    /// Normal quantile used for every interval in the report.
    pub z: f64,
    pub identities: Vec<IdentityReport>,
}

impl VerificationReport {
    pub fn rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.identities.iter().flat_map(|i| &i.rows)
    }

    pub fn has_failures(&self) -> bool {
        self.identities.iter().any(|i| i.verdict == Verdict::Fail)
    }

    pub fn find(&self, identity: &str, target: &str) -> Option<&IdentityReport> {
        self.identities.iter().find(|i| i.identity == identity && i.target == target)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        for row in self.rows() {
            w.serialize(row).map_err(std::io::Error::from)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
