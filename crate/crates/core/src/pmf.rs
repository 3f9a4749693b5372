//! Truncated probability mass functions on `{0, 1, ..., K}`.
//!
//! A [`Pmf`] never silently drops probability: whatever is not resolved in
//! `masses` lives in `tail`, so `Σ masses + tail = 1` up to rounding. Every
//! mass entry is a lower bound on the true probability of that value.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Tail mass above which an operation reports truncation.
pub const TRUNCATION_WARNING: f64 = 1e-6;

/// Default support cutoff.
pub const DEFAULT_K: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    masses: Vec<f64>,
    tail: f64,
    label: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PmfRepr {
    k_max: usize,
    masses: Vec<f64>,
    tail: f64,
    #[serde(default)]
    label: String,
}

impl Serialize for Pmf {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PmfRepr {
            k_max: self.k_max(),
            masses: self.masses.clone(),
            tail: self.tail,
            label: self.label.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pmf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PmfRepr::deserialize(d)?;
        if r.masses.len() != r.k_max + 1 {
            return Err(serde::de::Error::custom(format!(
                "k_max is {} but {} masses were given",
                r.k_max,
                r.masses.len()
            )));
        }
        Pmf::from_parts(r.masses, r.tail, r.label).map_err(serde::de::Error::custom)
    }
}

impl Pmf {
    /// Builds a pmf, checking nonnegativity and total mass.
    pub fn from_parts(masses: Vec<f64>, tail: f64, label: impl Into<String>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::domain("a pmf needs at least one mass entry"));
        }
        if masses.iter().chain(Some(&tail)).any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::domain("pmf masses must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum::<f64>() + tail;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("pmf total mass is {total}, not 1")));
        }
        Ok(Pmf { masses, tail, label: label.into() })
    }

    /// Builds a pmf whose tail absorbs `1 - Σ masses`.
    pub(crate) fn with_residual_tail(masses: Vec<f64>, label: impl Into<String>) -> Self {
        let total: f64 = masses.iter().sum();
        Pmf { masses, tail: (1.0 - total).max(0.0), label: label.into() }
    }

    pub fn point_mass(k: usize) -> Self {
        let mut masses = vec![0.0; k + 1];
        masses[k] = 1.0;
        Pmf { masses, tail: 0.0, label: format!("pointmass({k})") }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Mass at `k`; zero beyond the cutoff.
    pub fn mass(&self, k: usize) -> f64 {
        self.masses.get(k).copied().unwrap_or(0.0)
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn k_max(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_truncated(&self) -> bool {
        self.tail > TRUNCATION_WARNING
    }

    pub(crate) fn warn_if_truncated(self) -> Self {
        if self.is_truncated() {
            log::warn!("{}: truncation tail {:.3e} exceeds {:.0e}", self.label, self.tail, TRUNCATION_WARNING);
        }
        self
    }

    /// `(Σ k·p_k, K·tail)`: the resolved mean and the size of the unresolved part.
    pub fn mean(&self) -> (f64, f64) {
        let mean = self.masses.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        (mean, self.k_max() as f64 * self.tail)
    }

    /// Restricts to `{0..k_max}`, moving the cut mass into the tail.
    pub fn truncate(&self, k_max: usize) -> Pmf {
        if k_max >= self.k_max() {
            return self.clone();
        }
        let cut: f64 = self.masses[k_max + 1..].iter().sum();
        Pmf {
            masses: self.masses[..=k_max].to_vec(),
            tail: self.tail + cut,
            label: self.label.clone(),
        }
    }

    /// Mixture `Σ w_i p_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &Pmf)], label: impl Into<String>) -> Result<Pmf> {
        let wsum: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.is_empty() || (wsum - 1.0).abs() > 1e-12 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::domain("mixture weights must be nonnegative and sum to 1"));
        }
        let k_max = parts.iter().map(|(_, p)| p.k_max()).min().unwrap_or(0);
        let mut masses = vec![0.0; k_max + 1];
        let mut tail = 0.0;
        for (w, p) in parts {
            let t = p.truncate(k_max);
            for (m, x) in masses.iter_mut().zip(&t.masses) {
                *m += w * x;
            }
            tail += w * t.tail;
        }
        Ok(Pmf { masses, tail, label: label.into() })
    }
}

/// Convolution truncated at `k_max`. Every product that involves a tail or
/// lands above `k_max` is charged to the output tail.
pub fn convolve_to(a: &Pmf, b: &Pmf, k_max: usize) -> Pmf {
    let mut masses = vec![0.0; k_max + 1];
    let mut overflow = 0.0;
    for (i, &pa) in a.masses.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (j, &pb) in b.masses.iter().enumerate() {
            let k = i + j;
            if k <= k_max {
                masses[k] += pa * pb;
            } else {
                overflow += pa * pb;
            }
        }
    }
    let a_res: f64 = a.masses.iter().sum();
    let b_res: f64 = b.masses.iter().sum();
    let tail = overflow + a.tail * b_res + b.tail * a_res + a.tail * b.tail;
    Pmf { masses, tail, label: format!("{} * {}", a.label, b.label) }
}

/// Convolution on the larger of the two cutoffs.
pub fn convolve(a: &Pmf, b: &Pmf) -> Pmf {
    convolve_to(a, b, a.k_max().max(b.k_max()))
}

/// `m`-fold self-convolution, `m >= 1`.
pub fn convolution_power(p: &Pmf, m: usize, k_max: usize) -> Result<Pmf> {
    if m < 1 {
        return Err(Error::domain("convolution power needs m >= 1"));
    }
    let base = p.truncate(k_max);
    let mut acc = base.clone();
    for _ in 1..m {
        acc = convolve_to(&acc, &base, k_max);
    }
    Ok(acc.with_label(format!("{}^*{m}", p.label)))
}

/// Binomial thinning: each unit of the count survives independently with
/// probability `z`.
pub fn thin_pmf(p: &Pmf, z: f64, k_max: usize) -> Result<Pmf> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain(format!("thinning probability {z} outside [0,1]")));
    }
    let out_k = k_max.min(p.k_max());
    let mut masses = vec![0.0; out_k + 1];
    let mut overflow = 0.0;
    let (ln_z, ln_1z) = (z.ln(), (1.0 - z).ln());
    for (l, &pl) in p.masses.iter().enumerate() {
        if pl == 0.0 {
            continue;
        }
        #[allow(clippy::needless_range_loop)]
        for k in 0..=l {
            let b = if z == 0.0 {
                if k == 0 { 1.0 } else { 0.0 }
            } else if z == 1.0 {
                if k == l { 1.0 } else { 0.0 }
            } else {
                (ln_binomial(l as u64, k as u64) + k as f64 * ln_z + (l - k) as f64 * ln_1z).exp()
            };
            if k <= out_k {
                masses[k] += b * pl;
            } else {
                overflow += b * pl;
            }
        }
    }
    Ok(Pmf {
        masses,
        tail: p.tail + overflow,
        label: format!("thin({}, {z})", p.label),
    })
}

/// `½ Σ |p_k - q_k| + ½ |tail_p - tail_q|`, padding the shorter support with zeros.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> f64 {
    let n = p.masses.len().max(q.masses.len());
    let body: f64 = (0..n).map(|k| (p.mass(k) - q.mass(k)).abs()).sum();
    0.5 * body + 0.5 * (p.tail - q.tail).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(p: f64, k: usize) -> Pmf {
        let masses = (0..=k).map(|i| (1.0 - p) * p.powi(i as i32)).collect();
        Pmf::from_parts(masses, p.powi(k as i32 + 1), "geom").unwrap()
    }

    #[test]
    fn convolution_identities() {
        let q = geom(0.5, 30);
        let c = convolve(&Pmf::point_mass(0), &q);
        assert_eq!(c.masses(), q.masses());
        assert!((c.tail() - q.tail()).abs() < 1e-15);
        let two = convolve_to(&Pmf::point_mass(1), &Pmf::point_mass(1), 2);
        assert_eq!(two.masses(), Pmf::point_mass(2).masses());
        let clipped = convolve(&Pmf::point_mass(1), &Pmf::point_mass(1));
        assert_eq!(clipped.tail(), 1.0);
        let nb = convolve(&geom(0.5, 40), &geom(0.5, 40));
        for k in 0..=40 {
            let exact = (k as f64 + 1.0) / 2f64.powi(k as i32 + 2);
            assert!((nb.mass(k) - exact).abs() < 1e-15, "k={k}");
        }
        let total: f64 = nb.masses().iter().sum::<f64>() + nb.tail();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_scales_mean() {
        let g = geom(0.5, 300);
        let p3 = convolution_power(&g, 3, 300).unwrap();
        assert!((p3.mean().0 - 3.0 * g.mean().0).abs() < 1e-12);
        assert!(convolution_power(&g, 0, 10).is_err());
    }

    #[test]
    fn thinning_edges() {
        let g = geom(0.5, 200);
        let same = thin_pmf(&g, 1.0, 200).unwrap();
        assert_eq!(same.masses(), g.masses());
        let none = thin_pmf(&g, 0.0, 200).unwrap();
        assert!((none.mass(0) - 1.0).abs() < 1e-15);
        let half = thin_pmf(&g, 0.5, 200).unwrap();
        assert!((half.mean().0 - 0.5).abs() < 1e-12);
        assert!(thin_pmf(&g, 1.5, 10).is_err());
        assert!(thin_pmf(&g, -0.1, 10).is_err());
    }

    #[test]
    fn tv_examples() {
        let g = geom(0.5, 200);
        assert_eq!(tv_distance(&g, &g), 0.0);
        assert_eq!(tv_distance(&Pmf::point_mass(0), &Pmf::point_mass(1)), 1.0);
        assert!((tv_distance(&g, &geom(0.75, 200)) - 5.0 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn mean_and_gap() {
        assert_eq!(Pmf::point_mass(3).mean(), (3.0, 0.0));
        let (m, gap) = geom(0.5, 200).mean();
        assert!((m - 1.0).abs() < 1e-12 && gap < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let g = geom(0.3, 25).with_label("g");
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"k_max\":25"));
        let back: Pmf = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Pmf>(r#"{"k_max":3,"masses":[1.0],"tail":0}"#).is_err());
    }

    fn arb_pmf() -> impl Strategy<Value = Pmf> {
        (prop::collection::vec(0.0f64..1.0, 1..12), 0.0f64..0.3).prop_map(|(w, t)| {
            let s: f64 = w.iter().sum::<f64>() + 1e-9;
            let masses: Vec<f64> = w.iter().map(|x| x / s * (1.0 - t)).collect();
            Pmf::with_residual_tail(masses, "arb")
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(p in arb_pmf(), q in arb_pmf(), r in arb_pmf()) {
            let pq = tv_distance(&p, &q);
            prop_assert!((pq - tv_distance(&q, &p)).abs() < 1e-15);
            prop_assert!(pq <= tv_distance(&p, &r) + tv_distance(&r, &q) + 1e-12);
            prop_assert!(tv_distance(&p, &p) == 0.0);
        }

        #[test]
        fn thinning_composes(p in arb_pmf(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let two = thin_pmf(&thin_pmf(&p, a, 50).unwrap(), b, 50).unwrap();
            let one = thin_pmf(&p, a * b, 50).unwrap();
            prop_assert!(tv_distance(&two, &one) < 1e-12);
        }

        #[test]
        fn convolution_conserves_mass(p in arb_pmf(), q in arb_pmf(), k in 0usize..20) {
            let c = convolve_to(&p, &q, k);
            let total: f64 = c.masses().iter().sum::<f64>() + c.tail();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(c.masses().iter().all(|&m| m >= 0.0));
        }
    }
}
