//! Monte Carlo verification of the analytic laws.

pub mod adjudicate;
pub mod config;
pub mod mc;
pub mod oracle;
pub mod report;
pub mod stats;

pub use adjudicate::{simulate_birth_death, verify};
pub use config::{ExperimentConfig, Identity, Tolerances, VerifyConfig};
pub use mc::{run_mc, AuditSpec, LinearSum, McResult, Probe, RungResult, TargetSet};
pub use oracle::{d1_exhaustive_oracle, D1OracleLaws};
pub use report::{IdentityReport, ReportRow, Verdict, VerificationReport};
pub use stats::{empirical_pmf, EmpiricalDist};
