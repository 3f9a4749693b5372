//! Streaming crossing counters.
//!
//! A [`Tracker`] sees every transition of one excursion and counts, per
//! target, entries into the target (undirected), entries from one norm level
//! below (up) and entries from one level above (down). Blocked steps never
//! count. The closing step into the origin is observed, so a tracked
//! `Shell(0)` records exactly one down-entry on a returned excursion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{norm_of, LatticeVector};
use crate::walk::{ExcursionStatus, StepObserver, Transition};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    State(LatticeVector),
    Shell(u64),
    XClass(LatticeVector),
    /// Entries into `v` whose previous state lies in `a`.
    ADirected { v: LatticeVector, a: Vec<LatticeVector> },
}

impl Target {
    pub fn kind(&self) -> &'static str {
        match self {
            Target::State(_) => "state",
            Target::Shell(_) => "shell",
            Target::XClass(_) => "xclass",
            Target::ADirected { .. } => "adirected",
        }
    }

    /// Norm shared by every member of the target.
    pub fn level(&self) -> u64 {
        match self {
            Target::State(v) | Target::XClass(v) | Target::ADirected { v, .. } => v.norm(),
            Target::Shell(n) => *n,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |reason: &str| Error::InvalidTarget { target: self.to_string(), reason: reason.into() };
        match self {
            Target::Shell(_) => Ok(()),
            Target::State(v) | Target::XClass(v) => {
                if v.dim() != d {
                    Err(bad("dimension mismatch"))
                } else if v.is_zero() {
                    Err(bad("target vector must be nonzero"))
                } else {
                    Ok(())
                }
            }
            Target::ADirected { v, a } => {
                if v.dim() != d {
                    return Err(bad("dimension mismatch"));
                }
                if v.is_zero() {
                    return Err(bad("target vector must be nonzero"));
                }
                if a.is_empty() {
                    return Err(bad("A must be nonempty"));
                }
                let lower = v.lower_set()?;
                let upper = v.upper_set();
                if let Some(w) = a.iter().find(|w| !lower.contains(w) && !upper.contains(w)) {
                    return Err(bad(&format!("{w} is not a neighbor of {v}")));
                }
                Ok(())
            }
        }
    }
}

fn join_vec(v: &LatticeVector) -> String {
    v.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::State(v) => write!(f, "state:{}", join_vec(v)),
            Target::Shell(n) => write!(f, "shell:{n}"),
            Target::XClass(v) => write!(f, "xclass:{}", join_vec(v)),
            Target::ADirected { v, a } => {
                let a: Vec<String> = a.iter().map(join_vec).collect();
                write!(f, "adirected:{}|A={}", join_vec(v), a.join(";"))
            }
        }
    }
}

/// `state:v`, `shell:n`, `xclass:v`, `adirected:v|A=w1;w2`.
impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("target {s:?} has no kind prefix")))?;
        match kind.trim() {
            "state" => Ok(Target::State(rest.parse()?)),
            "xclass" => Ok(Target::XClass(rest.parse()?)),
            "shell" => rest
                .trim()
                .parse()
                .map(Target::Shell)
                .map_err(|e| Error::Parse(format!("bad shell level {rest:?}: {e}"))),
            "adirected" => {
                let (v, a) = rest
                    .split_once("|A=")
                    .ok_or_else(|| Error::Parse(format!("adirected target {s:?} lacks |A=")))?;
                let a = a.split(';').map(str::parse).collect::<Result<Vec<_>>>()?;
                Ok(Target::ADirected { v: v.parse()?, a })
            }
            other => Err(Error::Parse(format!("unknown target kind {other:?}"))),
        }
    }
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingTally {
    pub up: u64,
    pub down: u64,
    pub undirected: u64,
}

impl CrossingTally {
    pub fn merge(&mut self, other: &CrossingTally) {
        self.up += other.up;
        self.down += other.down;
        self.undirected += other.undirected;
    }

    pub fn get(&self, direction: crate::analytic::Direction) -> u64 {
        use crate::analytic::Direction::*;
        match direction {
            Up => self.up,
            Down => self.down,
            Total => self.undirected,
        }
    }
}

/// Export row for one target of one excursion (or of an aggregate).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyRow {
    pub target: String,
    pub kind: String,
    pub up: u64,
    pub down: u64,
    pub undirected: u64,
    pub censored: bool,
}

/// Finalized tallies of one excursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TallyReport {
    pub status: ExcursionStatus,
    pub tallies: Vec<(Target, CrossingTally)>,
}

impl TallyReport {
    pub fn rows(&self) -> Vec<TallyRow> {
        self.tallies
            .iter()
            .map(|(t, c)| TallyRow {
                target: t.to_string(),
                kind: t.kind().to_string(),
                up: c.up,
                down: c.down,
                undirected: c.undirected,
                censored: self.status == ExcursionStatus::Censored,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Matcher {
    State { coords: Vec<i64>, norm: u64 },
    Shell { norm: u64 },
    XClass { abs: Vec<i64>, norm: u64 },
    ADirected { coords: Vec<i64>, norm: u64, a: Vec<Vec<i64>> },
}

#[derive(Clone, Debug)]
pub struct Tracker {
    d: usize,
    targets: Vec<Target>,
    matchers: Vec<Matcher>,
    tallies: Vec<CrossingTally>,
    max_level: u64,
}

impl Tracker {
    pub fn new(targets: Vec<Target>, d: usize) -> Result<Self> {
        let mut matchers = Vec::with_capacity(targets.len());
        for t in &targets {
            t.validate(d)?;
            matchers.push(match t {
                Target::State(v) => Matcher::State { coords: v.coords().to_vec(), norm: v.norm() },
                Target::Shell(n) => Matcher::Shell { norm: *n },
                Target::XClass(v) => Matcher::XClass { abs: v.modulus().into_coords(), norm: v.norm() },
                Target::ADirected { v, a } => Matcher::ADirected {
                    coords: v.coords().to_vec(),
                    norm: v.norm(),
                    a: a.iter().map(|w| w.coords().to_vec()).collect(),
                },
            });
        }
        let n = targets.len();
        let max_level = targets.iter().map(Target::level).max().unwrap_or(0);
        Ok(Tracker { d, targets, matchers, tallies: vec![CrossingTally::default(); n], max_level })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn tallies(&self) -> &[CrossingTally] {
        &self.tallies
    }

    pub fn reset(&mut self) {
        self.tallies.iter_mut().for_each(|t| *t = CrossingTally::default());
    }

    /// Feeds a transition given as two explicit states.
    pub fn observe(&mut self, prev: &LatticeVector, next: &LatticeVector) -> Result<()> {
        if prev.dim() != self.d || next.dim() != self.d {
            return Err(Error::domain("transition dimension does not match tracker"));
        }
        let diff: Vec<usize> = (0..self.d).filter(|&i| prev.coords()[i] != next.coords()[i]).collect();
        let (axis, moved) = match diff.as_slice() {
            [] => (0, false),
            [i] if (prev.coords()[*i] - next.coords()[*i]).abs() == 1 => (*i, true),
            _ => return Err(Error::domain(format!("{prev} -> {next} is not a nearest-neighbor step"))),
        };
        self.record(&Transition {
            next: next.coords(),
            axis,
            prev_coord: prev.coords()[axis],
            prev_norm: prev.norm(),
            next_norm: next.norm(),
            moved,
        });
        Ok(())
    }

    #[inline]
    fn record(&mut self, t: &Transition<'_>) {
        if !t.moved || t.next_norm > self.max_level {
            return;
        }
        for (m, tally) in self.matchers.iter().zip(self.tallies.iter_mut()) {
            let level = match m {
                Matcher::State { norm, .. }
                | Matcher::Shell { norm }
                | Matcher::XClass { norm, .. }
                | Matcher::ADirected { norm, .. } => *norm,
            };
            if t.next_norm != level {
                continue;
            }
            let hit = match m {
                Matcher::Shell { .. } => true,
                Matcher::State { coords, .. } => coords.as_slice() == t.next,
                Matcher::XClass { abs, .. } => abs.iter().zip(t.next).all(|(a, c)| *a == c.abs()),
                Matcher::ADirected { coords, a, .. } => {
                    coords.as_slice() == t.next && a.iter().any(|w| t.prev_equals(w))
                }
            };
            if hit {
                tally.undirected += 1;
                if t.prev_norm + 1 == level {
                    tally.up += 1;
                } else if t.prev_norm == level + 1 {
                    tally.down += 1;
                }
            }
        }
    }

    pub fn finalize(&self, status: ExcursionStatus) -> TallyReport {
        TallyReport {
            status,
            tallies: self.targets.iter().cloned().zip(self.tallies.iter().copied()).collect(),
        }
    }
}

impl StepObserver for Tracker {
    #[inline]
    fn observe(&mut self, t: &Transition<'_>) {
        self.record(t);
    }
}

/// Brute-force count used to cross-check the tracker: walks an explicit path.
pub fn count_on_path(path: &[LatticeVector], target: &Target) -> CrossingTally {
    let mut tally = CrossingTally::default();
    for w in path.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        if prev == next {
            continue;
        }
        let member = match target {
            Target::State(v) => next == v,
            Target::Shell(n) => norm_of(next.coords()) == *n,
            Target::XClass(v) => next.modulus() == v.modulus(),
            Target::ADirected { v, a } => next == v && a.contains(prev),
        };
        if member {
            tally.undirected += 1;
            let level = target.level();
            if prev.norm() + 1 == level {
                tally.up += 1;
            } else if prev.norm() == level + 1 {
                tally.down += 1;
            }
        }
    }
    tally
}
