//! Experiment and verification configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{Direction, KernelFamily};
use crate::error::{Error, Result};
use crate::lattice::LatticeVector;
use crate::walk::WalkKind;

/// Smallest quota considered statistically meaningful; smaller quotas run
/// but log a warning.
pub const MIN_QUOTA: u64 = 1_000;

/// Simulation settings shared by all identities of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub walk: WalkKind,
    /// Strictly increasing `t_max` values.
    pub cutoff_ladder: Vec<u64>,
    /// Excursions simulated; every rung sees the same excursions.
    pub excursions: u64,
    pub seed: u64,
    /// `0` uses all available cores.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |pointer: &str, message: &str| Error::Config { pointer: pointer.into(), message: message.into() };
        if self.dimension == 0 {
            return Err(bad("/dimension", "must be at least 1"));
        }
        self.walk.validate().map_err(|e| bad("/walk", &e.to_string()))?;
        if self.cutoff_ladder.is_empty() {
            return Err(bad("/cutoff_ladder", "must not be empty"));
        }
        if self.cutoff_ladder[0] < 2 {
            return Err(bad("/cutoff_ladder/0", "cutoffs must be at least 2"));
        }
        if let Some(i) = self.cutoff_ladder.windows(2).position(|w| w[1] <= w[0]) {
            return Err(bad(&format!("/cutoff_ladder/{}", i + 1), "ladder must be strictly increasing"));
        }
        if self.excursions == 0 {
            return Err(bad("/excursions_per_cutoff", "must be positive"));
        }
        if self.excursions < MIN_QUOTA {
            log::warn!("excursion quota {} is below {MIN_QUOTA}; estimates will be noisy", self.excursions);
        }
        Ok(())
    }

    pub fn max_cutoff(&self) -> u64 {
        *self.cutoff_ladder.last().expect("validated ladder")
    }
}

/// Which parent crossing sum a kernel row conditions on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conditioning {
    /// Directed crossings of the parents, in the kernel's direction.
    Directed,
    /// All visits to the parents.
    Total,
}

fn default_m() -> u64 {
    1
}

fn default_audit_shells() -> u64 {
    5
}

fn default_bd_levels() -> usize {
    4
}

fn default_bd_jumps() -> u64 {
    1_000_000
}

/// One named check of the verification matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Identity {
    /// Shell crossing law against the `R_n` chain.
    ShellLaw { n: u64, direction: Direction },
    /// Mean single-state crossing count.
    StateExpectation { v: LatticeVector, #[serde(default = "total")] direction: Direction },
    /// Mean X-class crossing count.
    XclassExpectation { v: LatticeVector, #[serde(default = "total")] direction: Direction },
    /// One-dimensional level law.
    D1LevelLaw { n: i64, direction: Direction },
    /// Conditional kernel given the parent crossing sum.
    StateKernel {
        v: LatticeVector,
        direction: Direction,
        #[serde(default = "state_family")]
        family: KernelFamily,
        #[serde(default = "default_m")]
        m: u64,
    },
    /// A-directed crossings against binomial thinning of the directed law.
    Thinning { v: LatticeVector, a: Vec<LatticeVector> },
    /// Returned fraction at the largest cutoff.
    ReturnFraction { min: f64, max: f64 },
    /// Exact per-path invariants.
    PathAudit {
        #[serde(default = "default_audit_shells")]
        shells: u64,
        #[serde(default)]
        xclasses: Vec<LatticeVector>,
    },
    /// Standalone birth-death simulation.
    BirthDeath {
        lambdas: Vec<f64>,
        mus: Vec<f64>,
        #[serde(default = "default_bd_levels")]
        levels: usize,
        /// Defaults to `excursions_per_cutoff`.
        #[serde(default)]
        runs: Option<u64>,
        #[serde(default = "default_bd_jumps")]
        max_jumps: u64,
    },
}

fn total() -> Direction {
    Direction::Total
}

fn state_family() -> KernelFamily {
    KernelFamily::State
}

impl Identity {
    pub fn name(&self) -> &'static str {
        match self {
            Identity::ShellLaw { .. } => "shell_law",
            Identity::StateExpectation { .. } => "state_expectation",
            Identity::XclassExpectation { .. } => "xclass_expectation",
            Identity::D1LevelLaw { .. } => "d1_level_law",
            Identity::StateKernel { .. } => "state_kernel",
            Identity::Thinning { .. } => "thinning",
            Identity::ReturnFraction { .. } => "return_fraction",
            Identity::PathAudit { .. } => "path_audit",
            Identity::BirthDeath { .. } => "birth_death",
        }
    }
}

/// Acceptance thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// TV bound for shell and level laws.
    pub tv: f64,
    /// TV bound for kernel rows that receive a verdict.
    pub kernel_tv: f64,
    /// Relative error bound for expectations.
    pub expectation: f64,
    pub thinning_tv: f64,
    pub birth_death_tv: f64,
    /// Fewest conditioned samples a kernel row needs.
    pub min_conditioned: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tv: 0.05,
            kernel_tv: 0.03,
            expectation: 0.10,
            thinning_tv: 0.05,
            birth_death_tv: 0.02,
            min_conditioned: 500,
        }
    }
}

/// Top-level layout of `verify.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub dimension: usize,
    pub walk: WalkKind,
    pub cutoff_ladder: Vec<u64>,
    pub excursions_per_cutoff: u64,
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
    pub identities: Vec<Identity>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl VerifyConfig {
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            dimension: self.dimension,
            walk: self.walk,
            cutoff_ladder: self.cutoff_ladder.clone(),
            excursions: self.excursions_per_cutoff,
            seed: self.seed,
            workers: self.workers,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: VerifyConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            pointer: json_pointer(e.path()),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment().validate()?;
        if self.identities.is_empty() {
            return Err(Error::Config { pointer: "/identities".into(), message: "at least one identity is required".into() });
        }
        for (i, id) in self.identities.iter().enumerate() {
            let at = |field: &str, message: String| Error::Config { pointer: format!("/identities/{i}{field}"), message };
            let dim_ok = |v: &LatticeVector, field: &str| {
                if v.dim() != self.dimension {
                    Err(at(field, format!("vector {v} has dimension {}, expected {}", v.dim(), self.dimension)))
                } else if v.is_zero() {
                    Err(at(field, "vector must be nonzero".into()))
                } else {
                    Ok(())
                }
            };
            match id {
                Identity::ShellLaw { n, direction } => {
                    if *n == 0 && *direction != Direction::Down {
                        return Err(at("/n", "shell 0 supports only the down direction".into()));
                    }
                }
                Identity::StateExpectation { v, .. } | Identity::XclassExpectation { v, .. } => dim_ok(v, "/v")?,
                Identity::D1LevelLaw { n, .. } => {
                    if self.dimension != 1 {
                        return Err(at("", "d1_level_law needs dimension 1".into()));
                    }
                    if *n == 0 {
                        return Err(at("/n", "level must be nonzero".into()));
                    }
                }
                Identity::StateKernel { v, direction, m, .. } => {
                    dim_ok(v, "/v")?;
                    if *direction == Direction::Total {
                        return Err(at("/direction", "kernels exist only for up and down".into()));
                    }
                    if *m == 0 {
                        return Err(at("/m", "conditioning sum must be at least 1".into()));
                    }
                }
                Identity::Thinning { v, a } => {
                    dim_ok(v, "/v")?;
                    let lower = v.lower_set()?;
                    let upper = v.upper_set();
                    let in_lower = a.iter().all(|w| lower.contains(w));
                    let in_upper = a.iter().all(|w| upper.contains(w));
                    if a.is_empty() || !(in_lower || in_upper) {
                        return Err(at("/a", "A must be a nonempty subset of the lower set or of the upper set".into()));
                    }
                }
                Identity::ReturnFraction { min, max } => {
                    if !(0.0 <= *min && min <= max && *max <= 1.0) {
                        return Err(at("", "need 0 <= min <= max <= 1".into()));
                    }
                }
                Identity::PathAudit { xclasses, .. } => {
                    for (j, v) in xclasses.iter().enumerate() {
                        dim_ok(v, &format!("/xclasses/{j}"))?;
                    }
                }
                Identity::BirthDeath { lambdas, mus, levels, .. } => {
                    crate::analytic::BirthDeathRates::new(lambdas.clone(), mus.clone())
                        .map_err(|e| at("/lambdas", e.to_string()))?;
                    if *levels == 0 {
                        return Err(at("/levels", "must be at least 1".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}
