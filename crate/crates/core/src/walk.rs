//! Seeded lattice walks and excursion sampling.
//!
//! Randomness comes from ChaCha8 keyed by the 64-bit seed (expanded with
//! SplitMix64) with the 64-bit ChaCha stream id set to the substream index.
//! Distinct substreams never overlap, and the harness gives every excursion
//! its own substream, so results do not depend on how work is split across
//! threads. Each step consumes exactly one `u32`; the step index is the high
//! part of `u32 * 2d`, which is exactly uniform when `2d` is a power of two.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::BirthDeathRates;
use crate::crossing::{TallyReport, Tracker};
use crate::error::{Error, Result};
use crate::lattice::{norm_of, LatticeVector};

pub type WalkRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkKind {
    /// Unconstrained walk on `Z^d`.
    Free,
    /// Walk on `Z^d_+`; a step that would make a coordinate `-1` is flipped.
    Reflected,
    /// Walk on `{‖x‖ <= N}`; steps leaving the ball are blocked.
    Box(u64),
    /// Reflected walk with the same norm cap.
    ReflectedBox(u64),
}

impl WalkKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            WalkKind::Box(0) | WalkKind::ReflectedBox(0) => Err(Error::domain("box capacity must be at least 1")),
            _ => Ok(()),
        }
    }

    fn cap(&self) -> Option<u64> {
        match self {
            WalkKind::Box(n) | WalkKind::ReflectedBox(n) => Some(*n),
            _ => None,
        }
    }

    fn reflects(&self) -> bool {
        matches!(self, WalkKind::Reflected | WalkKind::ReflectedBox(_))
    }

    pub fn admits(&self, state: &[i64]) -> bool {
        (!self.reflects() || state.iter().all(|&c| c >= 0)) && self.cap().is_none_or(|n| norm_of(state) <= n)
    }
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkKind::Free => write!(f, "free"),
            WalkKind::Reflected => write!(f, "reflected"),
            WalkKind::Box(n) => write!(f, "box:{n}"),
            WalkKind::ReflectedBox(n) => write!(f, "reflected-box:{n}"),
        }
    }
}

/// `free`, `reflected`, `box:N`, `reflected-box:N`.
impl FromStr for WalkKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let cap = |t: &str| {
            t.parse::<u64>()
                .map_err(|e| Error::Parse(format!("bad box capacity {t:?}: {e}")))
        };
        let kind = match s.split_once(':') {
            None if s == "free" => WalkKind::Free,
            None if s == "reflected" => WalkKind::Reflected,
            Some(("box", n)) => WalkKind::Box(cap(n)?),
            Some(("reflected-box", n)) => WalkKind::ReflectedBox(cap(n)?),
            _ => return Err(Error::Parse(format!("unknown walk kind {s:?}"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl Serialize for WalkKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for WalkKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Identifies one reproducible random substream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamSpec {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStreamSpec {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        RngStreamSpec { seed, stream_index }
    }

    pub fn rng(&self) -> WalkRng {
        let mut key = [0u8; 32];
        let mut state = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A unit step `delta * 1_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub axis: usize,
    pub delta: i64,
}

impl Step {
    pub fn to_vector(self, d: usize) -> LatticeVector {
        LatticeVector::unit(d, self.axis, self.delta)
    }
}

#[inline]
pub fn draw_step<R: RngCore + ?Sized>(rng: &mut R, d: usize) -> Step {
    let idx = ((u64::from(rng.next_u32()) * (2 * d as u64)) >> 32) as usize;
    Step { axis: idx >> 1, delta: if idx & 1 == 0 { 1 } else { -1 } }
}

/// One transition as seen by observers. Only `axis` can differ between the
/// previous and next state.
#[derive(Clone, Copy, Debug)]
pub struct Transition<'a> {
    pub next: &'a [i64],
    pub axis: usize,
    pub prev_coord: i64,
    pub prev_norm: u64,
    pub next_norm: u64,
    /// `false` for a blocked step, where the state repeats.
    pub moved: bool,
}

impl Transition<'_> {
    #[inline]
    pub fn prev_equals(&self, w: &[i64]) -> bool {
        w.len() == self.next.len()
            && w.iter()
                .zip(self.next)
                .enumerate()
                .all(|(i, (&a, &b))| if i == self.axis { a == self.prev_coord } else { a == b })
    }

    pub fn prev(&self) -> Vec<i64> {
        let mut p = self.next.to_vec();
        p[self.axis] = self.prev_coord;
        p
    }
}

pub trait StepObserver {
    fn observe(&mut self, t: &Transition<'_>);
}

impl StepObserver for () {
    fn observe(&mut self, _: &Transition<'_>) {}
}

impl<T: StepObserver + ?Sized> StepObserver for &mut T {
    #[inline]
    fn observe(&mut self, t: &Transition<'_>) {
        (**self).observe(t)
    }
}

impl<A: StepObserver, B: StepObserver> StepObserver for (A, B) {
    #[inline]
    fn observe(&mut self, t: &Transition<'_>) {
        self.0.observe(t);
        self.1.observe(t);
    }
}

impl StepObserver for [&mut dyn StepObserver] {
    fn observe(&mut self, t: &Transition<'_>) {
        for o in self.iter_mut() {
            o.observe(t);
        }
    }
}

/// Applies `step` in place and returns whether the state changed.
#[inline]
fn step_in_place(kind: WalkKind, state: &mut [i64], norm: &mut u64, step: Step) -> bool {
    let Step { axis, mut delta } = step;
    if kind.reflects() && state[axis] + delta == -1 {
        delta = -delta;
    }
    let old = state[axis];
    let new_norm = *norm - old.unsigned_abs() + (old + delta).unsigned_abs();
    if let Some(cap) = kind.cap() {
        if new_norm > cap {
            return false;
        }
    }
    state[axis] = old + delta;
    *norm = new_norm;
    true
}

/// Next state of a walk of the given kind after drawing step `e`.
pub fn apply_step(kind: WalkKind, state: &LatticeVector, e: Step) -> Result<LatticeVector> {
    kind.validate()?;
    if !kind.admits(state.coords()) {
        return Err(Error::InvalidState { state: state.to_string(), walk: kind.to_string() });
    }
    if e.axis >= state.dim() || e.delta.abs() != 1 {
        return Err(Error::domain("step must be a signed unit vector of matching dimension"));
    }
    let mut coords = state.coords().to_vec();
    let mut norm = state.norm();
    step_in_place(kind, &mut coords, &mut norm, e);
    LatticeVector::new(coords)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcursionStatus {
    Returned,
    Censored,
}

/// Status and length of one excursion: `τ` if returned, `t_max` if censored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Excursion {
    pub status: ExcursionStatus,
    pub length: u64,
}

impl Excursion {
    pub fn returned_within(&self, cutoff: u64) -> bool {
        self.status == ExcursionStatus::Returned && self.length <= cutoff
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcursionOutcome {
    pub status: ExcursionStatus,
    pub length: u64,
    pub tallies: TallyReport,
}

/// Runs from the origin until the first return (inclusive) or `t_max` steps.
pub fn run_excursion<R, O>(rng: &mut R, kind: WalkKind, d: usize, t_max: u64, observer: &mut O) -> Excursion
where
    R: RngCore + ?Sized,
    O: StepObserver + ?Sized,
{
    let mut state = vec![0i64; d];
    let mut norm = 0u64;
    for t in 1..=t_max {
        let step = draw_step(rng, d);
        let prev_coord = state[step.axis];
        let prev_norm = norm;
        let moved = step_in_place(kind, &mut state, &mut norm, step);
        observer.observe(&Transition { next: &state, axis: step.axis, prev_coord, prev_norm, next_norm: norm, moved });
        if norm == 0 {
            return Excursion { status: ExcursionStatus::Returned, length: t };
        }
    }
    Excursion { status: ExcursionStatus::Censored, length: t_max }
}

/// [`run_excursion`] with a fresh tracker pass, returning finalized tallies.
pub fn run_tracked_excursion<R: RngCore + ?Sized>(
    rng: &mut R,
    kind: WalkKind,
    t_max: u64,
    tracker: &mut Tracker,
) -> ExcursionOutcome {
    tracker.reset();
    let ex = run_excursion(rng, kind, tracker.dim(), t_max, tracker);
    ExcursionOutcome { status: ex.status, length: ex.length, tallies: tracker.finalize(ex.status) }
}

/// Birth counts of one birth-death excursion from population 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BdOutcome {
    pub status: ExcursionStatus,
    pub jumps: u64,
    /// `g[0] = 1`; `g[n]` counts births out of population `n`.
    pub g: Vec<u64>,
}

impl BdOutcome {
    pub fn g(&self, n: usize) -> u64 {
        self.g.get(n).copied().unwrap_or(0)
    }
}

/// Embedded jump chain of a birth-death process started at population 1, run
/// until extinction or `t_max` jumps. One `u64` draw per jump.
pub fn run_bd_excursion<R: RngCore + ?Sized>(rng: &mut R, rates: &BirthDeathRates, t_max: u64) -> BdOutcome {
    let mut g = vec![1u64, 0];
    let mut pop = 1usize;
    for jump in 1..=t_max {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u < rates.birth_probability(pop) {
            if g.len() <= pop {
                g.resize(pop + 1, 0);
            }
            g[pop] += 1;
            pop += 1;
        } else {
            pop -= 1;
            if pop == 0 {
                return BdOutcome { status: ExcursionStatus::Returned, jumps: jump, g };
            }
        }
    }
    BdOutcome { status: ExcursionStatus::Censored, jumps: t_max, g }
}
