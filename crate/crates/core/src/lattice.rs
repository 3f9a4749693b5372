//! Exact lattice geometry on `Z^d` under the l1 norm.
//!
//! Everything here is integer or exact-rational arithmetic. The sign of a zero
//! coordinate is `+1`; vectors are compared coordinate-wise, so a "negative
//! zero" produced by reflecting a `-1` coordinate is the same vector as `0`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for every combinatorial and expectation quantity.
pub type Rational = Ratio<i128>;

/// A point of `Z^d`, `d >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct LatticeVector(Vec<i64>);

/// Per-coordinate signs, each `+1` or `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector(Vec<i8>);

/// Lower, upper and modulus-of-upper neighbor sets of a nonzero vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSets {
    pub lower: Vec<LatticeVector>,
    pub upper: Vec<LatticeVector>,
    /// Distinct moduli of `upper`, each with its range (1 or 2).
    pub abs_upper: Vec<(LatticeVector, u8)>,
}

/// Shell counts `C(n)`, `C0(n)` and the up-probability of the norm process at level `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShellCombinatorics {
    pub d: usize,
    pub n: u64,
    pub c: u128,
    pub c0: u128,
    #[serde(serialize_with = "serialize_rational")]
    pub p_up: Rational,
}

pub(crate) fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// `"3/4"`, or `"2"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("lattice dimension must be at least 1"));
        }
        Ok(LatticeVector(coords))
    }

    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        LatticeVector(vec![0; d])
    }

    /// `sign * 1_axis` in dimension `d`.
    pub fn unit(d: usize, axis: usize, sign: i64) -> Self {
        let mut v = Self::zero(d);
        v.0[axis] = sign;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn norm(&self) -> u64 {
        norm_of(&self.0)
    }

    /// Coordinate-wise absolute value.
    pub fn modulus(&self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|c| c.abs()).collect())
    }

    pub fn sign(&self) -> SignVector {
        SignVector(self.0.iter().map(|&c| if c < 0 { -1 } else { 1 }).collect())
    }

    pub fn decompose(&self) -> (LatticeVector, SignVector) {
        (self.modulus(), self.sign())
    }

    /// Inverse of [`decompose`](Self::decompose).
    pub fn compose(abs: &LatticeVector, sign: &SignVector) -> Result<LatticeVector> {
        if abs.dim() != sign.0.len() {
            return Err(Error::domain("modulus and sign vector differ in dimension"));
        }
        if !abs.is_nonnegative() {
            return Err(Error::domain("modulus must be componentwise nonnegative"));
        }
        Ok(LatticeVector(
            abs.0.iter().zip(&sign.0).map(|(&a, &s)| a * i64::from(s)).collect(),
        ))
    }

    /// `(d0, d1)`: number of zero coordinates and of coordinates with `|c| = 1`.
    pub fn count_profile(&self) -> (usize, usize) {
        let d0 = self.0.iter().filter(|&&c| c == 0).count();
        let d1 = self.0.iter().filter(|&&c| c.abs() == 1).count();
        (d0, d1)
    }

    pub fn d0(&self) -> usize {
        self.count_profile().0
    }

    /// Neighbors at norm `‖v‖ - 1`, one per nonzero coordinate, in coordinate order.
    pub fn lower_set(&self) -> Result<Vec<LatticeVector>> {
        if self.is_zero() {
            return Err(Error::ZeroVector);
        }
        let mut out = Vec::with_capacity(self.dim());
        for (i, &c) in self.0.iter().enumerate() {
            if c != 0 {
                let mut m = self.0.clone();
                m[i] -= c.signum();
                out.push(LatticeVector(m));
            }
        }
        Ok(out)
    }

    /// Neighbors at norm `‖v‖ + 1`. Zero coordinates contribute `+1` then `-1`.
    pub fn upper_set(&self) -> Vec<LatticeVector> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                for s in [1, -1] {
                    let mut m = self.0.clone();
                    m[i] = s;
                    out.push(LatticeVector(m));
                }
            } else {
                let mut m = self.0.clone();
                m[i] += c.signum();
                out.push(LatticeVector(m));
            }
        }
        out
    }

    /// Moduli of the upper set with their multiplicities.
    pub fn abs_upper_set(&self) -> Result<Vec<(LatticeVector, u8)>> {
        if self.is_zero() {
            return Err(Error::ZeroVector);
        }
        let base = self.modulus();
        Ok(self
            .0
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut m = base.0.clone();
                m[i] += 1;
                (LatticeVector(m), if c == 0 { 2 } else { 1 })
            })
            .collect())
    }

    pub fn neighbor_sets(&self) -> Result<NeighborSets> {
        Ok(NeighborSets {
            lower: self.lower_set()?,
            upper: self.upper_set(),
            abs_upper: self.abs_upper_set()?,
        })
    }

    /// All vectors sharing this vector's modulus. The first nonzero coordinate's
    /// sign varies fastest, starting from the modulus itself.
    pub fn x_class(&self) -> Vec<LatticeVector> {
        let base = self.modulus();
        let nonzero: Vec<usize> = (0..self.dim()).filter(|&i| base.0[i] != 0).collect();
        (0u64..1 << nonzero.len())
            .map(|mask| {
                let mut w = base.0.clone();
                for (bit, &i) in nonzero.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        w[i] = -w[i];
                    }
                }
                LatticeVector(w)
            })
            .collect()
    }
}

pub(crate) fn norm_of(coords: &[i64]) -> u64 {
    coords.iter().map(|c| c.unsigned_abs()).sum()
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Parses `"a,b,c"`, optionally wrapped in parentheses.
impl FromStr for LatticeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
        let coords = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad coordinate {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LatticeVector::new(coords)
    }
}

impl TryFrom<Vec<i64>> for LatticeVector {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        LatticeVector::new(v)
    }
}

impl From<LatticeVector> for Vec<i64> {
    fn from(v: LatticeVector) -> Self {
        v.0
    }
}

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::domain("sign entries must be +1 or -1"));
        }
        Ok(SignVector(signs))
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }
}

/// `binom(n, k)` with `binom(0,0) = 1` and zero whenever `k < 0`, `n < 0` or `n < k`.
pub fn binom(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        let num = acc * (n - i);
        acc = num / (i + 1);
    }
    acc
}

fn shell_term(d: usize, n: u64, i: usize) -> u128 {
    binom(d as i64, i as i64) * binom(n as i64 - 1, i as i64 - 1)
}

pub fn shell_combinatorics(d: usize, n: u64) -> Result<ShellCombinatorics> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if n < 1 {
        return Err(Error::domain("shell level must be at least 1"));
    }
    let c: u128 = (1..=d).map(|i| (i as u128) * (1u128 << i) * shell_term(d, n, i)).sum();
    let c0: u128 = (1..d)
        .map(|i| ((d - i) as u128) * (1u128 << (i + 1)) * shell_term(d, n, i))
        .sum();
    let p_up = Rational::new((c0 + c) as i128, (c0 + 2 * c) as i128);
    Ok(ShellCombinatorics { d, n, c, c0, p_up })
}

/// Number of lattice points of norm `n`, in all of `Z^d` or only in the
/// nonnegative orthant.
pub fn shell_size(d: usize, n: u64, nonneg_only: bool) -> u128 {
    if n == 0 {
        return 1;
    }
    (1..=d)
        .map(|i| {
            let w = if nonneg_only { 1 } else { 1u128 << i };
            w * shell_term(d, n, i)
        })
        .sum()
}

/// Stationary probability of `v` for `d` independent reflected queues of
/// capacity `N` each.
pub fn box_stationary(capacity: u64, v: &LatticeVector) -> Result<Rational> {
    if v.coords().iter().any(|&c| c < 0 || c as u64 > capacity) {
        return Err(Error::domain(format!("{v} lies outside [0,{capacity}]^d")));
    }
    let d = v.dim() as u32;
    let occupied = d - v.d0() as u32;
    let denom = (2 * capacity as i128 + 1).pow(d);
    Ok(Rational::new(1i128 << occupied, denom))
}

/// Nonnegative compositions of `n` into `d` parts, lexicographic.
fn compositions(d: usize, n: u64) -> Vec<Vec<i64>> {
    fn rec(rest: usize, n: u64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if rest == 1 {
            prefix.push(n as i64);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=n {
            prefix.push(first as i64);
            rec(rest - 1, n - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, n, &mut Vec::with_capacity(d), &mut out);
    out
}

/// All points of norm `n` in `Z^d`, sorted lexicographically.
pub fn enumerate_shell(d: usize, n: u64) -> Vec<LatticeVector> {
    let mut out: Vec<LatticeVector> = compositions(d, n)
        .into_iter()
        .flat_map(|c| LatticeVector(c).x_class())
        .collect();
    out.sort();
    out
}

/// Points of norm `n` in the nonnegative orthant, lexicographic.
pub fn enumerate_shell_nonneg(d: usize, n: u64) -> Vec<LatticeVector> {
    compositions(d, n).into_iter().map(LatticeVector).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> LatticeVector {
        LatticeVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn norms() {
        assert_eq!(v(&[0, 0, 0]).norm(), 0);
        assert_eq!(v(&[-2, 3]).norm(), 5);
        assert_eq!(v(&[-1, 0, 1]).norm(), 2);
    }

    #[test]
    fn decompose_and_compose() {
        let (abs, sign) = v(&[-2, 3]).decompose();
        assert_eq!(abs, v(&[2, 3]));
        assert_eq!(sign.signs(), &[-1, 1]);
        let (abs, sign) = v(&[0, 5]).decompose();
        assert_eq!(abs, v(&[0, 5]));
        assert_eq!(sign.signs(), &[1, 1]);
        let sign = SignVector::new(vec![-1, 1]).unwrap();
        assert_eq!(LatticeVector::compose(&v(&[2, 3]), &sign).unwrap(), v(&[-2, 3]));
    }

    #[test]
    fn profiles() {
        assert_eq!(v(&[0, 1, 0, 0, 1, 5]).count_profile(), (3, 2));
        assert_eq!(v(&[0, 0, 0, 0]).count_profile(), (4, 0));
        assert_eq!(v(&[-1, 0, 1]).count_profile(), (1, 2));
    }

    #[test]
    fn lower_and_upper_sets() {
        assert_eq!(v(&[-2, 3]).lower_set().unwrap(), vec![v(&[-1, 3]), v(&[-2, 2])]);
        assert_eq!(v(&[-1, 0, 1]).lower_set().unwrap(), vec![v(&[0, 0, 1]), v(&[-1, 0, 0])]);
        assert_eq!(v(&[1, 0]).lower_set().unwrap(), vec![v(&[0, 0])]);
        assert!(matches!(v(&[0, 0]).lower_set(), Err(Error::ZeroVector)));

        assert_eq!(v(&[-2, 3]).upper_set(), vec![v(&[-3, 3]), v(&[-2, 4])]);
        assert_eq!(
            v(&[-1, 0, 1]).upper_set(),
            vec![v(&[-2, 0, 1]), v(&[-1, 1, 1]), v(&[-1, -1, 1]), v(&[-1, 0, 2])]
        );
        assert_eq!(
            v(&[0, 0]).upper_set(),
            vec![v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])]
        );
    }

    #[test]
    fn abs_upper_ranges() {
        assert_eq!(
            v(&[-1, 0, 1]).abs_upper_set().unwrap(),
            vec![(v(&[2, 0, 1]), 1), (v(&[1, 1, 1]), 2), (v(&[1, 0, 2]), 1)]
        );
        assert_eq!(v(&[1, 1]).abs_upper_set().unwrap(), vec![(v(&[2, 1]), 1), (v(&[1, 2]), 1)]);
        assert_eq!(v(&[1, 0]).abs_upper_set().unwrap(), vec![(v(&[2, 0]), 1), (v(&[1, 1]), 2)]);
        assert!(v(&[0, 0, 0]).abs_upper_set().is_err());
    }

    #[test]
    fn x_classes() {
        assert_eq!(
            v(&[1, 2]).x_class(),
            vec![v(&[1, 2]), v(&[-1, 2]), v(&[1, -2]), v(&[-1, -2])]
        );
        assert_eq!(v(&[0, 0]).x_class(), vec![v(&[0, 0])]);
        assert_eq!(v(&[1, 0, 3]).x_class().len(), 4);
    }

    #[test]
    fn binomial_conventions() {
        assert_eq!(binom(0, 0), 1);
        assert_eq!(binom(2, 3), 0);
        assert_eq!(binom(-1, 0), 0);
        assert_eq!(binom(63, 7), 553_270_671);
        assert_eq!(binom(100, 50), 100_891_344_545_564_193_334_812_497_256);
    }

    #[test]
    fn shell_combinatorics_values() {
        for n in 1..=12 {
            let s = shell_combinatorics(1, n).unwrap();
            assert_eq!((s.c, s.c0), (2, 0));
            assert_eq!(s.p_up, Rational::new(1, 2));
        }
        let s = shell_combinatorics(2, 1).unwrap();
        assert_eq!((s.c, s.c0, s.p_up), (4, 8, Rational::new(3, 4)));
        let s = shell_combinatorics(2, 2).unwrap();
        assert_eq!((s.c, s.c0, s.p_up), (12, 8, Rational::new(5, 8)));
        assert!(shell_combinatorics(2, 0).is_err());
        // widest supported case stays exact
        let s = shell_combinatorics(8, 64).unwrap();
        assert_eq!(shell_size(8, 64, false) * 16, s.c0 + 2 * s.c);
    }

    #[test]
    fn shell_sizes() {
        assert_eq!(shell_size(2, 1, false), 4);
        assert_eq!(shell_size(2, 2, false), 8);
        assert_eq!(shell_size(3, 1, true), 3);
        assert_eq!(shell_size(5, 0, false), 1);
        for d in 1..=3 {
            for n in 0..=6 {
                assert_eq!(enumerate_shell(d, n).len() as u128, shell_size(d, n, false));
                assert_eq!(enumerate_shell_nonneg(d, n).len() as u128, shell_size(d, n, true));
            }
        }
    }

    #[test]
    fn box_stationary_values() {
        assert_eq!(box_stationary(3, &v(&[0])).unwrap(), Rational::new(1, 7));
        assert_eq!(box_stationary(3, &v(&[2])).unwrap(), Rational::new(2, 7));
        for n in 1..=6 {
            let a = box_stationary(n, &v(&[1, 1])).unwrap();
            let b = box_stationary(n, &v(&[0, 1])).unwrap();
            assert_eq!(a / b, Rational::from_integer(2));
        }
        assert!(box_stationary(3, &v(&[4, 0])).is_err());
        assert!(box_stationary(3, &v(&[-1, 0])).is_err());
    }

    #[test]
    fn parse_and_display() {
        let p: LatticeVector = "1,-2,0".parse().unwrap();
        assert_eq!(p, v(&[1, -2, 0]));
        assert_eq!(p.to_string(), "(1,-2,0)");
        assert_eq!("(3)".parse::<LatticeVector>().unwrap(), v(&[3]));
        assert!("1,x".parse::<LatticeVector>().is_err());
        assert!("".parse::<LatticeVector>().is_err());
    }
}
