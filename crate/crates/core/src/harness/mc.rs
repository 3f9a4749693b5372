//! Parallel excursion sampling over a nested cutoff ladder.
//!
//! Excursion `i` always runs on substream `i` up to the largest cutoff. A
//! smaller cutoff `c` treats it as returned iff `τ <= c`, with the same
//! tallies, so rungs share their random numbers and differ only by the
//! censoring threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::Direction;
use crate::crossing::{CrossingTally, Target, Tracker};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::stats::EmpiricalDist;
use crate::lattice::LatticeVector;
use crate::walk::{run_excursion, ExcursionStatus, RngStreamSpec};

/// `constant + Σ counts[target][direction]` over tracked targets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSum {
    pub terms: Vec<(usize, Direction)>,
    pub constant: u64,
}

impl LinearSum {
    pub fn single(target: usize, direction: Direction) -> Self {
        LinearSum { terms: vec![(target, direction)], constant: 0 }
    }

    fn eval(&self, tallies: &[CrossingTally]) -> u64 {
        self.constant + self.terms.iter().map(|&(i, dir)| tallies[i].get(dir)).sum::<u64>()
    }
}

/// A per-excursion statistic, optionally restricted to excursions where a
/// second statistic takes a given value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probe {
    pub value: LinearSum,
    pub condition: Option<(LinearSum, u64)>,
}

impl Probe {
    pub fn count(target: usize, direction: Direction) -> Self {
        Probe { value: LinearSum::single(target, direction), condition: None }
    }

    fn eval(&self, tallies: &[CrossingTally]) -> Option<u64> {
        match &self.condition {
            Some((sum, m)) if sum.eval(tallies) != *m => None,
            _ => Some(self.value.eval(tallies)),
        }
    }
}

/// Deduplicating registry of tracked targets.
#[derive(Clone, Debug, Default)]
pub struct TargetSet {
    targets: Vec<Target>,
}

impl TargetSet {
    pub fn index(&mut self, t: Target) -> usize {
        if let Some(i) = self.targets.iter().position(|x| *x == t) {
            return i;
        }
        self.targets.push(t);
        self.targets.len() - 1
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }
}

/// Exact per-path checks applied to every returned excursion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditSpec {
    /// Flow conservation is checked for `n < shells`.
    pub shells: Vec<usize>,
    /// `(class target, member state targets)`.
    pub xclasses: Vec<(usize, Vec<usize>)>,
    pub origin_down: Option<usize>,
}

impl AuditSpec {
    /// Registers shell `0..=shells` and the X-classes with their members.
    pub fn build(set: &mut TargetSet, shells: u64, xclasses: &[LatticeVector]) -> Self {
        let shells = (0..=shells).map(|n| set.index(Target::Shell(n))).collect::<Vec<_>>();
        let xclasses = xclasses
            .iter()
            .map(|v| {
                let class = set.index(Target::XClass(v.clone()));
                let members = v.x_class().into_iter().map(|w| set.index(Target::State(w))).collect();
                (class, members)
            })
            .collect();
        AuditSpec { origin_down: shells.first().copied(), shells, xclasses }
    }

    fn check(&self, targets: &[Target], tallies: &[CrossingTally], tau: u64) -> Option<String> {
        for (t, c) in targets.iter().zip(tallies) {
            if !matches!(t, Target::ADirected { .. }) && c.undirected != c.up + c.down {
                return Some(format!("{t}: f={} but f→+f←={}", c.undirected, c.up + c.down));
            }
            if c.undirected > 0 && 2 * t.level() > tau {
                return Some(format!("{t} visited at level {} within τ={tau}", t.level()));
            }
        }
        for w in self.shells.windows(2) {
            let (down, up) = (tallies[w[0]].down, tallies[w[1]].up);
            if down != up {
                return Some(format!("flow {}: f←={down} but f→ of next shell={up}", targets[w[0]]));
            }
        }
        for (class, members) in &self.xclasses {
            let sum: u64 = members.iter().map(|&i| tallies[i].undirected).sum();
            if tallies[*class].undirected != sum {
                return Some(format!("{}: f={} but member sum={sum}", targets[*class], tallies[*class].undirected));
            }
        }
        if let Some(i) = self.origin_down {
            if tallies[i].down != 1 {
                return Some(format!("origin entered {} times from above", tallies[i].down));
            }
        }
        None
    }
}

/// Path-audit tallies for one rung.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditResult {
    pub audited: u64,
    pub violations: u64,
    pub first_violation: Option<(u64, String)>,
}

impl AuditResult {
    fn merge(&mut self, other: AuditResult) {
        self.audited += other.audited;
        self.violations += other.violations;
        self.first_violation = match (self.first_violation.take(), other.first_violation) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
    }
}

/// Everything measured at one cutoff.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RungResult {
    pub cutoff: u64,
    pub excursions: u64,
    pub returned: u64,
    /// One distribution per probe; `censored` counts censored excursions.
    pub dists: Vec<EmpiricalDist>,
    pub audit: AuditResult,
}

impl RungResult {
    pub fn censored_fraction(&self) -> f64 {
        if self.excursions == 0 {
            0.0
        } else {
            (self.excursions - self.returned) as f64 / self.excursions as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    pub targets: Vec<Target>,
    pub rungs: Vec<RungResult>,
}

impl McResult {
    pub fn last(&self) -> &RungResult {
        self.rungs.last().expect("at least one rung")
    }
}

struct Partial {
    rungs: Vec<RungResult>,
}

impl Partial {
    fn new(ladder: &[u64], probes: usize) -> Self {
        Partial {
            rungs: ladder
                .iter()
                .map(|&cutoff| RungResult { cutoff, dists: vec![EmpiricalDist::default(); probes], ..Default::default() })
                .collect(),
        }
    }

    fn merge(mut self, other: Partial) -> Self {
        for (a, b) in self.rungs.iter_mut().zip(other.rungs) {
            a.excursions += b.excursions;
            a.returned += b.returned;
            for (x, y) in a.dists.iter_mut().zip(&b.dists) {
                x.merge(y);
            }
            a.audit.merge(b.audit);
        }
        self
    }
}

const CHUNK: u64 = 256;

/// Runs `config.excursions` excursions and evaluates every probe at every rung.
pub fn run_mc(config: &ExperimentConfig, targets: &[Target], probes: &[Probe], audit: Option<&AuditSpec>) -> Result<McResult> {
    config.validate()?;
    let tracker = Tracker::new(targets.to_vec(), config.dimension)?;
    let ladder = &config.cutoff_ladder;
    let t_max = config.max_cutoff();
    let chunks = config.excursions.div_ceil(CHUNK);

    let body = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut part = Partial::new(ladder, probes.len());
                let mut tracker = tracker.clone();
                let mut values: Vec<Option<u64>> = vec![None; probes.len()];
                for i in c * CHUNK..((c + 1) * CHUNK).min(config.excursions) {
                    tracker.reset();
                    let mut rng = RngStreamSpec::new(config.seed, i).rng();
                    let ex = run_excursion(&mut rng, config.walk, config.dimension, t_max, &mut tracker);
                    let returned = ex.status == ExcursionStatus::Returned;
                    let violation = match (returned, audit) {
                        (true, Some(a)) => Some(a.check(targets, tracker.tallies(), ex.length)),
                        _ => None,
                    };
                    if returned {
                        for (v, p) in values.iter_mut().zip(probes) {
                            *v = p.eval(tracker.tallies());
                        }
                    }
                    for rung in part.rungs.iter_mut() {
                        rung.excursions += 1;
                        if !ex.returned_within(rung.cutoff) {
                            rung.dists.iter_mut().for_each(|d| d.censored += 1);
                            continue;
                        }
                        rung.returned += 1;
                        for (d, v) in rung.dists.iter_mut().zip(&values) {
                            if let Some(k) = v {
                                d.push(*k);
                            }
                        }
                        if let Some(found) = &violation {
                            rung.audit.audited += 1;
                            if let Some(msg) = found {
                                rung.audit.violations += 1;
                                rung.audit.first_violation.get_or_insert_with(|| (i, msg.clone()));
                            }
                        }
                    }
                }
                part
            })
            .reduce(|| Partial::new(ladder, probes.len()), Partial::merge)
    };

    let part = if config.workers == 0 {
        body()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::domain(format!("cannot build worker pool: {e}")))?
            .install(body)
    };
    for rung in &part.rungs {
        if rung.returned == 0 {
            log::warn!("no excursion returned within cutoff {}", rung.cutoff);
        }
    }
    Ok(McResult { targets: targets.to_vec(), rungs: part.rungs })
}
