//! Exact enumeration of one-dimensional first-return paths.

use serde::Serialize;

use crate::error::{Error, Result};

/// Levels `±1..=±ORACLE_LEVELS` are tallied.
pub const ORACLE_LEVELS: i64 = 3;
pub const ORACLE_MAX_LENGTH: usize = 24;

/// Sub-probability masses of the crossing counts at one level, accumulated
/// over first-return paths of length at most `L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct D1LevelMasses {
    pub level: i64,
    pub total: Vec<f64>,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct D1OracleLaws {
    pub max_length: usize,
    /// `P{τ <= L}`.
    pub returned_mass: f64,
    pub levels: Vec<D1LevelMasses>,
}

impl D1OracleLaws {
    pub fn level(&self, level: i64) -> Option<&D1LevelMasses> {
        self.levels.iter().find(|l| l.level == level)
    }
}

const SLOTS: usize = (2 * ORACLE_LEVELS + 1) as usize;

struct Walker {
    max_length: usize,
    counts: [[u8; 3]; SLOTS],
    returned: f64,
    masses: Vec<[Vec<f64>; 3]>,
}

impl Walker {
    fn slot(pos: i64) -> Option<usize> {
        (pos != 0 && pos.abs() <= ORACLE_LEVELS).then(|| (pos + ORACLE_LEVELS) as usize)
    }

    fn descend(&mut self, pos: i64, len: usize) {
        for step in [1i64, -1] {
            let next = pos + step;
            let len = len + 1;
            if next.unsigned_abs() as usize > self.max_length - len {
                continue;
            }
            if next == 0 {
                self.close(len);
                continue;
            }
            let slot = Self::slot(next);
            let dir = if next.abs() > pos.abs() { 1 } else { 2 };
            if let Some(s) = slot {
                self.counts[s][0] += 1;
                self.counts[s][dir] += 1;
            }
            self.descend(next, len);
            if let Some(s) = slot {
                self.counts[s][0] -= 1;
                self.counts[s][dir] -= 1;
            }
        }
    }

    fn close(&mut self, len: usize) {
        let w = 0.5f64.powi(len as i32);
        self.returned += w;
        for (slot, masses) in self.masses.iter_mut().enumerate() {
            for (dir, m) in masses.iter_mut().enumerate() {
                let k = self.counts[slot][dir] as usize;
                if m.len() <= k {
                    m.resize(k + 1, 0.0);
                }
                m[k] += w;
            }
        }
    }
}

/// Exhaustive laws of `f(n)`, `f→(n)`, `f←(n)` for `0 < |n| <= 3`, restricted
/// to excursions of length at most `max_length`. Every mass is a lower bound
/// of the corresponding unrestricted value.
pub fn d1_exhaustive_oracle(max_length: usize) -> Result<D1OracleLaws> {
    if !max_length.is_multiple_of(2) || max_length == 0 || max_length > ORACLE_MAX_LENGTH {
        return Err(Error::domain(format!(
            "oracle length must be even and in 2..={ORACLE_MAX_LENGTH}, got {max_length}"
        )));
    }
    let mut w = Walker {
        max_length,
        counts: [[0; 3]; SLOTS],
        returned: 0.0,
        masses: vec![Default::default(); SLOTS],
    };
    w.descend(0, 0);
    let levels = (-ORACLE_LEVELS..=ORACLE_LEVELS)
        .filter(|&l| l != 0)
        .map(|level| {
            let [total, up, down] = w.masses[Walker::slot(level).unwrap()].clone();
            D1LevelMasses { level, total, up, down }
        })
        .collect();
    Ok(D1OracleLaws { max_length, returned_mass: w.returned, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_paths() {
        let o = d1_exhaustive_oracle(2).unwrap();
        assert_eq!(o.returned_mass, 0.5);
        let l1 = o.level(1).unwrap();
        assert_eq!(l1.total, vec![0.25, 0.25]);
        assert_eq!(l1.up, vec![0.25, 0.25]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(d1_exhaustive_oracle(3).is_err());
        assert!(d1_exhaustive_oracle(26).is_err());
        assert!(d1_exhaustive_oracle(0).is_err());
    }

    #[test]
    fn returned_mass_matches_first_return_law() {
        // P{τ = 2m} = 2 C_{m-1} / 4^m with Catalan numbers C
        let mut catalan = vec![1u64];
        for m in 1..12u64 {
            let c = catalan[m as usize - 1] * 2 * (2 * m - 1) / (m + 1);
            catalan.push(c);
        }
        let o = d1_exhaustive_oracle(12).unwrap();
        let exact: f64 = (1..=6).map(|m| 2.0 * catalan[m - 1] as f64 / 4f64.powi(m as i32)).sum();
        assert!((o.returned_mass - exact).abs() < 1e-15);
        for l in &o.levels {
            let s: f64 = l.total.iter().sum();
            assert!((s - o.returned_mass).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_in_sign() {
        let o = d1_exhaustive_oracle(10).unwrap();
        for n in 1..=3 {
            assert_eq!(o.level(n).unwrap().total, o.level(-n).unwrap().total);
        }
    }
}
