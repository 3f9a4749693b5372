//! Closed-form and recursively computed crossing laws.
//!
//! Chains such as `R_n`, `Z_n` and `V_n` are inhomogeneous branching chains
//! with geometric offspring: given the previous value `m`, the next value is
//! the `m`-fold convolution of the step's offspring law. Laws of sums of
//! consecutive chain values are computed by propagating that dependence, not
//! by convolving marginals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_shell, serialize_rational, shell_combinatorics, LatticeVector, Rational};
use crate::pmf::{convolution_power, convolve_to, Pmf};

/// Crossing direction of a count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Total,
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            "total" | "undirected" => Ok(Direction::Total),
            _ => Err(Error::Parse(format!("unknown direction {s:?}"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Total => "total",
        })
    }
}

/// Which level's rates drive the step into generation `j` of a chain.
///
/// `Destination` uses level `j`. `Source` uses level `j - 1`, as the chain
/// recursions are literally indexed; level 0 has no rates, so its step is taken
/// as the deterministic single up-move out of the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateIndexing {
    #[default]
    Destination,
    Source,
}

/// Neighbor family of a conditional kernel: single states or X-classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    State,
    Xclass,
}

impl FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state" => Ok(KernelFamily::State),
            "xclass" => Ok(KernelFamily::Xclass),
            _ => Err(Error::Parse(format!("unknown kernel family {s:?}"))),
        }
    }
}

/// `P{k} = (1 - ratio) ratio^k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricKernel {
    pub ratio: f64,
    pub label: String,
}

impl GeometricKernel {
    pub fn new(ratio: f64, label: impl Into<String>) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::domain(format!("geometric ratio {ratio} outside (0,1)")));
        }
        Ok(GeometricKernel { ratio, label: label.into() })
    }

    pub fn mean(&self) -> f64 {
        self.ratio / (1.0 - self.ratio)
    }

    pub fn pmf(&self, k_max: usize) -> Pmf {
        let p = self.ratio;
        let masses = (0..=k_max).map(|k| (1.0 - p) * p.powi(k as i32)).collect();
        Pmf::from_parts(masses, p.powi(k_max as i32 + 1), format!("geometric({p})"))
            .expect("geometric masses are valid")
    }
}

pub fn geometric_pmf(kernel: &GeometricKernel, k_max: usize) -> Pmf {
    kernel.pmf(k_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixtureKernel {
    pub components: Vec<(f64, GeometricKernel)>,
}

impl MixtureKernel {
    pub fn new(components: Vec<(f64, GeometricKernel)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if components.is_empty() || (total - 1.0).abs() > 1e-12 || components.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::domain("mixture weights must be nonnegative and sum to 1"));
        }
        Ok(MixtureKernel { components })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Geometric(GeometricKernel),
    Mixture(MixtureKernel),
}

impl Kernel {
    pub fn mean(&self) -> f64 {
        match self {
            Kernel::Geometric(g) => g.mean(),
            Kernel::Mixture(m) => m.components.iter().map(|(w, g)| w * g.mean()).sum(),
        }
    }

    pub fn pmf(&self, k_max: usize) -> Pmf {
        match self {
            Kernel::Geometric(g) => g.pmf(k_max),
            Kernel::Mixture(m) => {
                let parts: Vec<(f64, Pmf)> = m.components.iter().map(|(w, g)| (*w, g.pmf(k_max))).collect();
                let refs: Vec<(f64, &Pmf)> = parts.iter().map(|(w, p)| (*w, p)).collect();
                Pmf::mixture(&refs, "mixture").expect("validated mixture")
            }
        }
    }
}

fn step_law(law: &Pmf, offspring: &Pmf, k_max: usize, shift_by_parent: bool) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    let mut power = Pmf::point_mass(0);
    let last = law.masses().iter().rposition(|&m| m > 0.0).unwrap_or(0);
    for m in 0..=last {
        let w = law.mass(m);
        if w > 0.0 {
            let shift = if shift_by_parent { m } else { 0 };
            for (k, &pk) in power.masses().iter().enumerate() {
                if k + shift <= k_max {
                    out[k + shift] += w * pk;
                }
            }
        }
        if m < last {
            power = convolve_to(&power, offspring, k_max);
        }
    }
    out
}

/// Law of generation `n` of a branching chain started from one individual,
/// where `offspring[j]` is the per-individual law for the step from
/// generation `j` to `j + 1`.
pub fn branching_pmf(offspring: &[Pmf], n: usize, k_max: usize) -> Result<Pmf> {
    if offspring.len() < n {
        return Err(Error::domain(format!("need {n} offspring laws, got {}", offspring.len())));
    }
    let mut law = Pmf::point_mass(1).truncate(k_max);
    for off in &offspring[..n] {
        law = Pmf::with_residual_tail(step_law(&law, off, k_max, false), "");
    }
    Ok(law.with_label(format!("branching(n={n})")).warn_if_truncated())
}

/// Law of `X_{n-1} + X_n` for the chain of [`branching_pmf`], `n >= 1`.
pub fn branching_pair_sum_pmf(offspring: &[Pmf], n: usize, k_max: usize) -> Result<Pmf> {
    if n < 1 {
        return Err(Error::domain("pair sum needs n >= 1"));
    }
    let prev = branching_pmf(offspring, n - 1, k_max)?;
    let masses = step_law(&prev, &offspring[n - 1], k_max, true);
    Ok(Pmf::with_residual_tail(masses, format!("branching_pair_sum(n={n})")).warn_if_truncated())
}

fn geometric_offspring(ratio: f64, k_max: usize) -> Pmf {
    GeometricKernel::new(ratio, "").expect("ratio in (0,1)").pmf(k_max)
}

/// Critical Galton-Watson chain with `P{Z_1 = k} = 2^-(k+1)`.
pub fn gw_pmf(n: usize, k_max: usize) -> Result<Pmf> {
    let off = vec![geometric_offspring(0.5, k_max); n];
    Ok(branching_pmf(&off, n, k_max)?.with_label(format!("Z_{n}")))
}

fn gw_pair_sum(n: usize, k_max: usize) -> Result<Pmf> {
    let off = vec![geometric_offspring(0.5, k_max); n];
    branching_pair_sum_pmf(&off, n, k_max)
}

fn r_offspring(d: usize, generation: usize, indexing: RateIndexing, k_max: usize) -> Result<Pmf> {
    let level = match indexing {
        RateIndexing::Destination => generation,
        RateIndexing::Source => generation - 1,
    };
    if level == 0 {
        return Ok(Pmf::point_mass(1));
    }
    let s = shell_combinatorics(d, level as u64)?;
    Ok(geometric_offspring(rational_to_f64(&s.p_up), k_max))
}

fn r_offspring_list(d: usize, n: usize, indexing: RateIndexing, k_max: usize) -> Result<Vec<Pmf>> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    (1..=n).map(|j| r_offspring(d, j, indexing, k_max)).collect()
}

/// Law of `R_n`, the chain whose values give shell crossing counts.
pub fn r_pmf(d: usize, n: usize, k_max: usize, indexing: RateIndexing) -> Result<Pmf> {
    let off = r_offspring_list(d, n, indexing, k_max)?;
    Ok(branching_pmf(&off, n, k_max)?.with_label(format!("R_{n}(d={d})")))
}

/// Law of the up-, down- or total crossing count of the norm shell `N(n)`.
pub fn shell_law(d: usize, n: usize, direction: Direction, k_max: usize, indexing: RateIndexing) -> Result<Pmf> {
    let label = format!("shell_{direction}(d={d},n={n})");
    match direction {
        Direction::Down => Ok(r_pmf(d, n, k_max, indexing)?.with_label(label)),
        Direction::Up if n >= 1 => Ok(r_pmf(d, n - 1, k_max, indexing)?.with_label(label)),
        Direction::Total if n >= 1 => {
            let off = r_offspring_list(d, n, indexing, k_max)?;
            Ok(branching_pair_sum_pmf(&off, n, k_max)?.with_label(label))
        }
        _ => Err(Error::domain(format!("shell level {n} is undefined for direction {direction}"))),
    }
}

/// Rates of a birth-death process; entry `i` holds the rates at population
/// `i + 1`, and the last entry extends to all higher populations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathRates {
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
}

impl BirthDeathRates {
    pub fn new(lambdas: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != mus.len() {
            return Err(Error::domain("birth and death rate lists must be nonempty and equally long"));
        }
        if lambdas.iter().chain(&mus).any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::domain("birth and death rates must be positive"));
        }
        Ok(BirthDeathRates { lambdas, mus })
    }

    pub fn constant(lambda: f64, mu: f64) -> Result<Self> {
        Self::new(vec![lambda], vec![mu])
    }

    /// `(λ, μ)` at population `n >= 1`.
    pub fn at(&self, population: usize) -> (f64, f64) {
        let i = (population.max(1) - 1).min(self.lambdas.len() - 1);
        (self.lambdas[i], self.mus[i])
    }

    /// Probability that the next jump at `population` is a birth.
    pub fn birth_probability(&self, population: usize) -> f64 {
        let (l, m) = self.at(population);
        l / (l + m)
    }
}

/// Law of `V_n`, the count of births out of population `n` before extinction.
pub fn v_chain_pmf(rates: &BirthDeathRates, n: usize, k_max: usize, indexing: RateIndexing) -> Result<Pmf> {
    let off: Vec<Pmf> = (1..=n)
        .map(|j| {
            let level = match indexing {
                RateIndexing::Destination => j,
                RateIndexing::Source => j - 1,
            };
            if level == 0 {
                Pmf::point_mass(1)
            } else {
                geometric_offspring(rates.birth_probability(level), k_max)
            }
        })
        .collect();
    Ok(branching_pmf(&off, n, k_max)?.with_label(format!("V_{n}")))
}

/// Conditional law of a single-state or X-class crossing count given that the
/// relevant neighbor crossing sum equals one.
pub fn state_kernel(v: &LatticeVector, direction: Direction, family: KernelFamily) -> Result<Kernel> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let d = v.dim() as f64;
    let (d0, d1) = v.count_profile();
    let (d0, d1) = (d0 as f64, d1 as f64);
    let geom = |ratio: f64, label: &str| GeometricKernel::new(ratio, label);
    match (family, direction) {
        (KernelFamily::State, Direction::Up) => Ok(Kernel::Geometric(geom(1.0 / (d - d0 + 1.0), "state-up")?)),
        (KernelFamily::State, Direction::Down) => Ok(Kernel::Geometric(geom(1.0 / (d + d0 + 1.0), "state-down")?)),
        (KernelFamily::Xclass, Direction::Up) => {
            let m = d - d0;
            let denom = 2.0 * m - d1;
            mixture(vec![
                (2.0 * (m - d1) / denom, 1.0 / (m + 1.0), "xclass-up-same"),
                (d1 / denom, 2.0 / (m + 1.0), "xclass-up-unit"),
            ])
        }
        (KernelFamily::Xclass, Direction::Down) => mixture(vec![
            (2.0 * d0 / (d + d0), 2.0 / (d + d0 + 1.0), "xclass-down-range2"),
            ((d - d0) / (d + d0), 1.0 / (d + d0 + 1.0), "xclass-down-range1"),
        ]),
        (_, Direction::Total) => Err(Error::domain("kernels exist only for up and down directions")),
    }
}

fn mixture(parts: Vec<(f64, f64, &str)>) -> Result<Kernel> {
    let mut components = Vec::new();
    for (w, ratio, label) in parts {
        if w > 0.0 {
            components.push((w, GeometricKernel::new(ratio, label)?));
        }
    }
    Ok(Kernel::Mixture(MixtureKernel::new(components)?))
}

/// Single geometric kernel whose composition with the expected neighbor
/// up-crossing (or down-crossing) sum reproduces the expected crossing count
/// of `v`. Reported next to [`state_kernel`] as an alternative prediction.
pub fn expectation_matched_kernel(v: &LatticeVector, direction: Direction) -> Result<GeometricKernel> {
    let e = expected_crossings(v)?;
    let (target, parents) = match direction {
        Direction::Up => (e.e_up, v.lower_set()?),
        Direction::Down => (e.e_down, v.upper_set()),
        Direction::Total => return Err(Error::domain("kernels exist only for up and down directions")),
    };
    let parent_sum: Rational = parents
        .iter()
        .map(|m| {
            if m.is_zero() {
                // the origin is left exactly once per excursion
                Ok(Rational::from_integer(1))
            } else {
                let em = expected_crossings(m)?;
                Ok(if direction == Direction::Up { em.e_up } else { em.e_down })
            }
        })
        .sum::<Result<Rational>>()?;
    let mean = rational_to_f64(&(target / parent_sum));
    GeometricKernel::new(mean / (1.0 + mean), format!("expectation-matched-{direction}"))
}

/// `m`-fold convolution of the kernel law.
pub fn conditional_count_pmf(kernel: &Kernel, m: usize, k_max: usize) -> Result<Pmf> {
    if m < 1 {
        return Err(Error::domain("conditioning sum must be at least 1"));
    }
    Ok(convolution_power(&kernel.pmf(k_max), m, k_max)?.warn_if_truncated())
}

/// One-dimensional level-crossing law at `level != 0`.
pub fn d1_crossing_law(level: i64, direction: Direction, k_max: usize) -> Result<Pmf> {
    if level == 0 {
        return Err(Error::ZeroVector);
    }
    let n = level.unsigned_abs() as usize;
    let base = match direction {
        Direction::Up => gw_pmf(n - 1, k_max)?,
        Direction::Down => gw_pmf(n, k_max)?,
        Direction::Total => gw_pair_sum(n, k_max)?,
    };
    let mut masses: Vec<f64> = base.masses().iter().map(|p| 0.5 * p).collect();
    masses[0] = 0.5 + 0.5 * base.mass(0);
    Pmf::from_parts(masses, 0.5 * base.tail(), format!("d1_{direction}(level={level})"))
}

/// Conditional expectations of single-state and X-class crossing counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectedCrossings {
    #[serde(serialize_with = "serialize_rational")]
    pub e_up: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub e_down: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub e_total: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub e_up_xclass: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub e_down_xclass: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub e_total_xclass: Rational,
}

pub fn expected_crossings(v: &LatticeVector) -> Result<ExpectedCrossings> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let d = v.dim() as i128;
    let d0 = v.d0() as i128;
    let class_size = Rational::from_integer(1i128 << (d - d0));
    let e_up = Rational::new(d - d0, 2 * d);
    let e_down = Rational::new(d + d0, 2 * d);
    let e_total = e_up + e_down;
    Ok(ExpectedCrossings {
        e_up,
        e_down,
        e_total,
        e_up_xclass: e_up * class_size,
        e_down_xclass: e_down * class_size,
        e_total_xclass: e_total * class_size,
    })
}

/// `Σ_{‖m‖ = n}` of the per-state expectation, by explicit shell enumeration.
pub fn shell_expectation_sum(d: usize, n: u64, direction: Direction) -> Result<Rational> {
    if n == 0 {
        return Ok(Rational::from_integer(1));
    }
    enumerate_shell(d, n)
        .iter()
        .map(|m| {
            let e = expected_crossings(m)?;
            Ok(match direction {
                Direction::Up => e.e_up,
                Direction::Down => e.e_down,
                Direction::Total => e.e_total,
            })
        })
        .sum()
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
