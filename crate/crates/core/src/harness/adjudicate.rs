//! Turns identities into probes, runs the experiment and assigns verdicts.

use rayon::prelude::*;

use crate::analytic::{
    conditional_count_pmf, d1_crossing_law, expectation_matched_kernel, expected_crossings, rational_to_f64,
    shell_law, state_kernel, v_chain_pmf, BirthDeathRates, Direction, GeometricKernel, Kernel, KernelFamily,
    RateIndexing,
};
use crate::crossing::Target;
use crate::error::{Error, Result};
use crate::harness::config::{Conditioning, Identity, Tolerances, VerifyConfig};
use crate::harness::mc::{run_mc, AuditSpec, LinearSum, McResult, Probe, TargetSet};
use crate::harness::report::{IdentityReport, LawDetail, Prediction, ReportRow, Verdict, VerificationReport};
use crate::harness::stats::{bonferroni_z, chi_square, empirical_pmf, tv_noise, trend_ok, wilson, EmpiricalDist, ALPHA};
use crate::lattice::LatticeVector;
use crate::pmf::{thin_pmf, tv_distance, Pmf, DEFAULT_K};
use crate::walk::{run_bd_excursion, ExcursionStatus, RngStreamSpec};

/// Substreams from here on drive the birth-death simulator, keeping them
/// disjoint from walk excursions under the same seed.
const BD_STREAM_BASE: u64 = 1 << 63;

/// Shown in law details; larger bins are summed into the pmf tail.
const DETAIL_K: usize = 40;

enum Plan {
    Law { probe: usize, target: String, predictions: Vec<(String, Pmf)> },
    Expectation { probe: usize, target: String, analytic: f64 },
    Kernel { probes: [usize; 2], target: String, open: Option<&'static str>, m: u64, predictions: Vec<(String, Pmf)> },
    Thinning { fa: usize, base: usize, target: String, z: f64 },
    ReturnFraction { min: f64, max: f64 },
    Audit,
    BirthDeath { rates: BirthDeathRates, levels: usize, runs: u64, max_jumps: u64, target: String },
}

/// Runs every identity of `config` and adjudicates it.
pub fn verify(config: &VerifyConfig) -> Result<VerificationReport> {
    config.validate()?;
    let d = config.dimension;
    let mut set = TargetSet::default();
    let mut probes: Vec<Probe> = Vec::new();
    let mut audit: Option<AuditSpec> = None;
    let mut plans = Vec::with_capacity(config.identities.len());
    let mut add = |p: Probe| {
        probes.push(p);
        probes.len() - 1
    };

    for id in &config.identities {
        let plan = match id {
            Identity::ShellLaw { n, direction } => {
                let t = set.index(Target::Shell(*n));
                let k = *n as usize;
                Plan::Law {
                    probe: add(Probe::count(t, *direction)),
                    target: format!("shell:{n} {direction}"),
                    predictions: vec![
                        ("destination".into(), shell_law(d, k, *direction, DEFAULT_K, RateIndexing::Destination)?),
                        ("source".into(), shell_law(d, k, *direction, DEFAULT_K, RateIndexing::Source)?),
                    ],
                }
            }
            Identity::D1LevelLaw { n, direction } => {
                let t = set.index(Target::State(LatticeVector::new(vec![*n])?));
                Plan::Law {
                    probe: add(Probe::count(t, *direction)),
                    target: format!("state:{n} {direction}"),
                    predictions: vec![("closed_form".into(), d1_crossing_law(*n, *direction, DEFAULT_K)?)],
                }
            }
            Identity::StateExpectation { v, direction } => {
                let e = expected_crossings(v)?;
                let analytic = pick(direction, [&e.e_up, &e.e_down, &e.e_total]);
                let t = set.index(Target::State(v.clone()));
                Plan::Expectation {
                    probe: add(Probe::count(t, *direction)),
                    target: format!("{} {direction}", Target::State(v.clone())),
                    analytic,
                }
            }
            Identity::XclassExpectation { v, direction } => {
                let e = expected_crossings(v)?;
                let analytic = pick(direction, [&e.e_up_xclass, &e.e_down_xclass, &e.e_total_xclass]);
                let t = set.index(Target::XClass(v.clone()));
                Plan::Expectation {
                    probe: add(Probe::count(t, *direction)),
                    target: format!("{} {direction}", Target::XClass(v.clone())),
                    analytic,
                }
            }
            Identity::StateKernel { v, direction, family, m } => {
                let (value, directed, total) = kernel_sums(&mut set, v, *direction, *family)?;
                let stated = conditional_count_pmf(&state_kernel(v, *direction, *family)?, *m as usize, DEFAULT_K)?;
                let alt = Kernel::Geometric(matched_kernel(v, *direction, *family)?);
                let alt = conditional_count_pmf(&alt, *m as usize, DEFAULT_K)?;
                let p_dir = add(Probe { value: value.clone(), condition: Some((directed, *m)) });
                let p_tot = add(Probe { value, condition: Some((total, *m)) });
                Plan::Kernel {
                    probes: [p_dir, p_tot],
                    target: format!("{}:{} {direction} m={m}", family_name(*family), Target::State(v.clone()).to_string().trim_start_matches("state:")),
                    open: match (d, direction) {
                        (1, Direction::Up) => None,
                        (1, _) => Some("the stated down kernel differs from the one-dimensional conditional law; evidence only"),
                        _ => Some("consistency of the stated kernel with the expectation identities is open; evidence only"),
                    },
                    m: *m,
                    predictions: vec![("stated".into(), stated), ("expectation_matched".into(), alt)],
                }
            }
            Identity::Thinning { v, a } => {
                let lower = v.lower_set()?;
                let (dir, set_size) = if a.iter().all(|w| lower.contains(w)) {
                    (Direction::Up, lower.len())
                } else {
                    (Direction::Down, v.upper_set().len())
                };
                let target = Target::ADirected { v: v.clone(), a: a.clone() };
                let label = target.to_string();
                let fa = set.index(target);
                let base = set.index(Target::State(v.clone()));
                Plan::Thinning {
                    fa: add(Probe::count(fa, Direction::Total)),
                    base: add(Probe::count(base, dir)),
                    target: label,
                    z: a.len() as f64 / set_size as f64,
                }
            }
            Identity::ReturnFraction { min, max } => Plan::ReturnFraction { min: *min, max: *max },
            Identity::PathAudit { shells, xclasses } => {
                audit = Some(AuditSpec::build(&mut set, *shells, xclasses));
                Plan::Audit
            }
            Identity::BirthDeath { lambdas, mus, levels, runs, max_jumps } => Plan::BirthDeath {
                rates: BirthDeathRates::new(lambdas.clone(), mus.clone())?,
                levels: *levels,
                runs: runs.unwrap_or(config.excursions_per_cutoff),
                max_jumps: *max_jumps,
                target: format!("lambdas={lambdas:?} mus={mus:?}"),
            },
        };
        plans.push(plan);
    }

    let needs_walk = plans.iter().any(|p| !matches!(p, Plan::BirthDeath { .. }));
    let mc = if needs_walk {
        Some(run_mc(&config.experiment(), set.targets(), &probes, audit.as_ref())?)
    } else {
        None
    };

    let z = bonferroni_z(ALPHA, config.identities.len());
    let tol = &config.tolerances;
    let mut identities = Vec::with_capacity(plans.len());
    for (id, plan) in config.identities.iter().zip(plans) {
        let name = id.name();
        let report = match plan {
            Plan::BirthDeath { rates, levels, runs, max_jumps, target } => {
                birth_death(name, &target, &rates, levels, runs, max_jumps, config.seed, config.workers, z, tol)?
            }
            plan => {
                let mc = mc.as_ref().expect("walk experiment ran");
                match plan {
                    Plan::Law { probe, target, predictions } => law(name, &target, mc, probe, &predictions, z, tol.tv),
                    Plan::Expectation { probe, target, analytic } => expectation(name, &target, mc, probe, analytic, z, tol),
                    Plan::Kernel { probes, target, open, m, predictions } => {
                        kernel(name, &target, mc, probes, open, m, &predictions, z, tol)
                    }
                    Plan::Thinning { fa, base, target, z: ratio } => thinning(name, &target, mc, fa, base, ratio, z, tol)?,
                    Plan::ReturnFraction { min, max } => return_fraction(name, mc, min, max, z),
                    Plan::Audit => path_audit(name, mc),
                    Plan::BirthDeath { .. } => unreachable!(),
                }
            }
        };
        identities.push(report);
    }

    Ok(VerificationReport {
        dimension: d,
        walk: config.walk.to_string(),
        seed: config.seed,
        cutoff_ladder: config.cutoff_ladder.clone(),
        excursions: config.excursions_per_cutoff,
        z,
        identities,
    })
}

fn pick(direction: &Direction, [up, down, total]: [&crate::lattice::Rational; 3]) -> f64 {
    rational_to_f64(match direction {
        Direction::Up => up,
        Direction::Down => down,
        Direction::Total => total,
    })
}

fn family_name(f: KernelFamily) -> &'static str {
    match f {
        KernelFamily::State => "state",
        KernelFamily::Xclass => "xclass",
    }
}

fn class_members(v: &LatticeVector, family: KernelFamily) -> Vec<LatticeVector> {
    match family {
        KernelFamily::State => vec![v.clone()],
        KernelFamily::Xclass => v.x_class(),
    }
}

fn parents(v: &LatticeVector, direction: Direction, family: KernelFamily) -> Result<Vec<LatticeVector>> {
    let mut out: Vec<LatticeVector> = Vec::new();
    for x in class_members(v, family) {
        let ns = if direction == Direction::Up { x.lower_set()? } else { x.upper_set() };
        for w in ns {
            if !out.contains(&w) {
                out.push(w);
            }
        }
    }
    Ok(out)
}

/// Target count plus the directed and total parent sums. The origin is left
/// exactly once per excursion and contributes a constant one.
fn kernel_sums(
    set: &mut TargetSet,
    v: &LatticeVector,
    direction: Direction,
    family: KernelFamily,
) -> Result<(LinearSum, LinearSum, LinearSum)> {
    let value = match family {
        KernelFamily::State => LinearSum::single(set.index(Target::State(v.clone())), direction),
        KernelFamily::Xclass => LinearSum::single(set.index(Target::XClass(v.clone())), direction),
    };
    let mut directed = LinearSum::default();
    let mut total = LinearSum::default();
    for w in parents(v, direction, family)? {
        if w.is_zero() {
            directed.constant += 1;
            total.constant += 1;
        } else {
            let i = set.index(Target::State(w));
            directed.terms.push((i, direction));
            total.terms.push((i, Direction::Total));
        }
    }
    Ok((value, directed, total))
}

/// Geometric kernel whose mean is `E target / Σ E parents` in the kernel's direction.
fn matched_kernel(v: &LatticeVector, direction: Direction, family: KernelFamily) -> Result<GeometricKernel> {
    if family == KernelFamily::State {
        return expectation_matched_kernel(v, direction);
    }
    let e = |w: &LatticeVector| -> Result<f64> {
        if w.is_zero() {
            return Ok(1.0);
        }
        let x = expected_crossings(w)?;
        Ok(pick(&direction, [&x.e_up, &x.e_down, &x.e_total]))
    };
    let target: f64 = class_members(v, family).iter().map(e).sum::<Result<f64>>()?;
    let parent: f64 = parents(v, direction, family)?.iter().map(e).sum::<Result<f64>>()?;
    let mean = target / parent;
    GeometricKernel::new(mean / (1.0 + mean), format!("expectation-matched-{direction}"))
}

fn law_detail(e: &EmpiricalDist, cutoff: u64, predictions: &[(String, Pmf)]) -> Option<LawDetail> {
    let (_, bins) = empirical_pmf(e).ok()?;
    let k = DETAIL_K.max(bins.len().saturating_sub(1));
    Some(LawDetail {
        cutoff,
        n: e.n_returned,
        empirical: bins,
        predictions: predictions
            .iter()
            .map(|(label, p)| {
                let c = chi_square(e, p);
                Prediction {
                    label: label.clone(),
                    tv: tv_distance(&e.pmf("empirical").expect("nonempty"), p),
                    chi2: c.statistic,
                    chi2_p_value: c.p_value,
                    pmf: p.truncate(k),
                }
            })
            .collect(),
    })
}

struct RungStats {
    mean: f64,
    lo: f64,
    hi: f64,
    tv: f64,
    noise: f64,
    chi2: f64,
}

fn law_stats(e: &EmpiricalDist, prediction: &Pmf, z: f64) -> Option<RungStats> {
    let (mean, lo, hi) = e.mean_ci(z)?;
    let tv = tv_distance(&e.pmf("empirical").ok()?, prediction);
    Some(RungStats { mean, lo, hi, tv, noise: tv_noise(e, z), chi2: chi_square(e, prediction).statistic })
}

#[allow(clippy::too_many_arguments)]
fn row(identity: &str, target: &str, cutoff: u64, n: u64, censored: f64, s: Option<&RungStats>, analytic: Option<f64>, with_tv: bool, verdict: Verdict) -> ReportRow {
    let nan = f64::NAN;
    ReportRow {
        identity: identity.into(),
        target: target.into(),
        cutoff,
        n_returned: n,
        censored_frac: censored,
        estimate: s.map_or(nan, |s| s.mean),
        ci_low: s.map_or(nan, |s| s.lo),
        ci_high: s.map_or(nan, |s| s.hi),
        analytic,
        tv: s.filter(|_| with_tv).map(|s| s.tv),
        chi2: s.filter(|_| with_tv).map(|s| s.chi2),
        verdict,
    }
}

/// Pass requires the last rung within `tol` and a TV trend that never rises
/// by more than the combined noise of neighboring rungs.
fn law_verdict(stats: &[Option<RungStats>], tol: f64) -> (Verdict, Option<String>) {
    let Some(Some(last)) = stats.last() else {
        return (Verdict::Fail, Some("no returned excursions at the largest cutoff".into()));
    };
    let present: Vec<&RungStats> = stats.iter().flatten().collect();
    let tvs: Vec<f64> = present.iter().map(|s| s.tv).collect();
    let noise: Vec<f64> = present.iter().map(|s| s.noise).collect();
    if last.tv > tol {
        (Verdict::Fail, Some(format!("TV {:.4} exceeds {tol}", last.tv)))
    } else if !trend_ok(&tvs, &noise) {
        (Verdict::Fail, Some(format!("TV rises across the ladder: {tvs:?}")))
    } else {
        (Verdict::Pass, None)
    }
}

fn law(identity: &str, target: &str, mc: &McResult, probe: usize, predictions: &[(String, Pmf)], z: f64, tol: f64) -> IdentityReport {
    let mut per_prediction = Vec::new();
    for (label, p) in predictions {
        let stats: Vec<Option<RungStats>> = mc.rungs.iter().map(|r| law_stats(&r.dists[probe], p, z)).collect();
        per_prediction.push((label, p, stats));
    }
    let (verdict, note) = law_verdict(&per_prediction[0].2, tol);
    let mut rows = Vec::new();
    for (i, (label, p, stats)) in per_prediction.iter().enumerate() {
        let v = if i == 0 { verdict } else { Verdict::Flagged };
        let t = if predictions.len() > 1 { format!("{target} [{label}]") } else { target.to_string() };
        for (r, s) in mc.rungs.iter().zip(stats) {
            rows.push(row(identity, &t, r.cutoff, r.dists[probe].n_returned, r.censored_fraction(), s.as_ref(), Some(p.mean().0), true, v));
        }
    }
    let last = mc.last();
    IdentityReport {
        identity: identity.into(),
        target: target.into(),
        verdict,
        note,
        rows,
        laws: law_detail(&last.dists[probe], last.cutoff, predictions).into_iter().collect(),
    }
}

fn expectation(identity: &str, target: &str, mc: &McResult, probe: usize, analytic: f64, z: f64, tol: &Tolerances) -> IdentityReport {
    let cis: Vec<Option<(f64, f64, f64)>> = mc.rungs.iter().map(|r| r.dists[probe].mean_ci(z)).collect();
    let (verdict, note) = match cis.last() {
        Some(Some((m, _, _))) => {
            let present: Vec<&(f64, f64, f64)> = cis.iter().flatten().collect();
            let disc: Vec<f64> = present.iter().map(|c| (c.0 - analytic).abs()).collect();
            let hw: Vec<f64> = present.iter().map(|c| (c.2 - c.1) / 2.0).collect();
            let rel = (m - analytic).abs() / analytic;
            if rel > tol.expectation {
                (Verdict::Fail, Some(format!("relative error {rel:.4} exceeds {}", tol.expectation)))
            } else if !trend_ok(&disc, &hw) {
                (Verdict::Fail, Some(format!("bias grows across the ladder: {disc:?}")))
            } else {
                (Verdict::Pass, None)
            }
        }
        _ => (Verdict::Fail, Some("no returned excursions at the largest cutoff".into())),
    };
    let rows = mc
        .rungs
        .iter()
        .zip(&cis)
        .map(|(r, c)| {
            let s = c.map(|(mean, lo, hi)| RungStats { mean, lo, hi, tv: f64::NAN, noise: 0.0, chi2: f64::NAN });
            row(identity, target, r.cutoff, r.dists[probe].n_returned, r.censored_fraction(), s.as_ref(), Some(analytic), false, verdict)
        })
        .collect();
    IdentityReport { identity: identity.into(), target: target.into(), verdict, note, rows, laws: vec![] }
}

#[allow(clippy::too_many_arguments)]
fn kernel(
    identity: &str,
    target: &str,
    mc: &McResult,
    probes: [usize; 2],
    open: Option<&'static str>,
    m: u64,
    predictions: &[(String, Pmf)],
    z: f64,
    tol: &Tolerances,
) -> IdentityReport {
    let last = mc.last();
    let got = last.dists[probes[0]].n_returned;
    let mut notes = Vec::new();
    let verdict = if got < tol.min_conditioned {
        let e = Error::InsufficientConditionedSample { got, need: tol.min_conditioned };
        log::warn!("{identity} {target}: {e}");
        notes.push(e.to_string());
        Verdict::Flagged
    } else if let Some(why) = open {
        notes.push(why.into());
        Verdict::Flagged
    } else {
        let stats: Vec<Option<RungStats>> = mc.rungs.iter().map(|r| law_stats(&r.dists[probes[0]], &predictions[0].1, z)).collect();
        let (v, note) = law_verdict(&stats, tol.kernel_tv);
        notes.extend(note);
        v
    };

    let mut rows = Vec::new();
    let mut laws = Vec::new();
    for (probe, cond) in probes.iter().zip([Conditioning::Directed, Conditioning::Total]) {
        let cond_name = match cond {
            Conditioning::Directed => "directed",
            Conditioning::Total => "total",
        };
        for (i, (label, p)) in predictions.iter().enumerate() {
            let v = if i == 0 && cond == Conditioning::Directed { verdict } else { Verdict::Flagged };
            let t = format!("{target} | parents={cond_name} [{label}]");
            for r in &mc.rungs {
                let e = &r.dists[*probe];
                let s = law_stats(e, p, z);
                rows.push(row(identity, &t, r.cutoff, e.n_returned, r.censored_fraction(), s.as_ref(), Some(p.mean().0), true, v));
            }
        }
        if let Some(mut detail) = law_detail(&last.dists[*probe], last.cutoff, predictions) {
            for p in &mut detail.predictions {
                p.label = format!("{} | parents={cond_name} m={m}", p.label);
            }
            laws.push(detail);
        }
    }
    IdentityReport {
        identity: identity.into(),
        target: target.into(),
        verdict,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
        rows,
        laws,
    }
}

#[allow(clippy::too_many_arguments)]
fn thinning(identity: &str, target: &str, mc: &McResult, fa: usize, base: usize, ratio: f64, z: f64, tol: &Tolerances) -> Result<IdentityReport> {
    let mut stats = Vec::new();
    let mut preds = Vec::new();
    for r in &mc.rungs {
        let b = &r.dists[base];
        if b.n_returned == 0 {
            stats.push(None);
            preds.push(None);
            continue;
        }
        let k = b.counts.len().max(1) - 1;
        let thinned = thin_pmf(&b.pmf("base")?, ratio, k)?.with_label(format!("thin(empirical, {ratio})"));
        stats.push(law_stats(&r.dists[fa], &thinned, z));
        preds.push(Some(thinned));
    }
    let (verdict, note) = law_verdict(&stats, tol.thinning_tv);
    let rows = mc
        .rungs
        .iter()
        .zip(&stats)
        .zip(&preds)
        .map(|((r, s), p)| {
            row(identity, target, r.cutoff, r.dists[fa].n_returned, r.censored_fraction(), s.as_ref(), p.as_ref().map(|p| p.mean().0), true, verdict)
        })
        .collect();
    let last = mc.last();
    let laws = match preds.last() {
        Some(Some(p)) => law_detail(&last.dists[fa], last.cutoff, &[("thinned".into(), p.clone())]).into_iter().collect(),
        _ => vec![],
    };
    Ok(IdentityReport { identity: identity.into(), target: target.into(), verdict, note, rows, laws })
}

fn return_fraction(identity: &str, mc: &McResult, min: f64, max: f64, z: f64) -> IdentityReport {
    let target = format!("returned in [{min}, {max}]");
    let last = mc.last();
    let frac = last.returned as f64 / last.excursions as f64;
    let (verdict, note) = if (min..=max).contains(&frac) {
        (Verdict::Pass, None)
    } else {
        (Verdict::Fail, Some(format!("returned fraction {frac:.4} outside [{min}, {max}]")))
    };
    let rows = mc
        .rungs
        .iter()
        .map(|r| {
            let (lo, hi) = wilson(r.returned, r.excursions, z);
            ReportRow {
                identity: identity.into(),
                target: target.clone(),
                cutoff: r.cutoff,
                n_returned: r.returned,
                censored_frac: r.censored_fraction(),
                estimate: r.returned as f64 / r.excursions as f64,
                ci_low: lo,
                ci_high: hi,
                analytic: None,
                tv: None,
                chi2: None,
                verdict,
            }
        })
        .collect();
    IdentityReport { identity: identity.into(), target, verdict, note, rows, laws: vec![] }
}

fn path_audit(identity: &str, mc: &McResult) -> IdentityReport {
    let last = mc.last();
    let (verdict, note) = match &last.audit.first_violation {
        None => (Verdict::Pass, None),
        Some((i, msg)) => {
            log::error!("path audit violation in excursion {i}: {msg}");
            (Verdict::Fail, Some(format!("{} violations; first in excursion {i}: {msg}", last.audit.violations)))
        }
    };
    let rows = mc
        .rungs
        .iter()
        .map(|r| ReportRow {
            identity: identity.into(),
            target: "violations".into(),
            cutoff: r.cutoff,
            n_returned: r.audit.audited,
            censored_frac: r.censored_fraction(),
            estimate: r.audit.violations as f64,
            ci_low: r.audit.violations as f64,
            ci_high: r.audit.violations as f64,
            analytic: Some(0.0),
            tv: None,
            chi2: None,
            verdict,
        })
        .collect();
    IdentityReport { identity: identity.into(), target: "violations".into(), verdict, note, rows, laws: vec![] }
}

/// Empirical `g(n)` laws, `n = 1..=levels`, over extinct runs.
pub fn simulate_birth_death(
    rates: &BirthDeathRates,
    levels: usize,
    runs: u64,
    max_jumps: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<EmpiricalDist>> {
    let body = || {
        (0..runs.div_ceil(1024))
            .into_par_iter()
            .map(|c| {
                let mut dists = vec![EmpiricalDist::default(); levels];
                for i in c * 1024..((c + 1) * 1024).min(runs) {
                    let mut rng = RngStreamSpec::new(seed, BD_STREAM_BASE + i).rng();
                    let out = run_bd_excursion(&mut rng, rates, max_jumps);
                    for (n, d) in dists.iter_mut().enumerate() {
                        match out.status {
                            ExcursionStatus::Returned => d.push(out.g(n + 1)),
                            ExcursionStatus::Censored => d.censored += 1,
                        }
                    }
                }
                dists
            })
            .reduce(
                || vec![EmpiricalDist::default(); levels],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| x.merge(y));
                    a
                },
            )
    };
    if workers == 0 {
        Ok(body())
    } else {
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::domain(format!("cannot build worker pool: {e}")))?
            .install(body))
    }
}

#[allow(clippy::too_many_arguments)]
fn birth_death(
    identity: &str,
    target: &str,
    rates: &BirthDeathRates,
    levels: usize,
    runs: u64,
    max_jumps: u64,
    seed: u64,
    workers: usize,
    z: f64,
    tol: &Tolerances,
) -> Result<IdentityReport> {
    let dists = simulate_birth_death(rates, levels, runs, max_jumps, seed, workers)?;
    let mut rows = Vec::new();
    let mut laws = Vec::new();
    let mut worst: f64 = 0.0;
    let mut empty = false;
    for (i, e) in dists.iter().enumerate() {
        let n = i + 1;
        let p = v_chain_pmf(rates, n, DEFAULT_K, RateIndexing::Destination)?;
        let s = law_stats(e, &p, z);
        match &s {
            Some(s) => worst = worst.max(s.tv),
            None => empty = true,
        }
        rows.push(row(identity, &format!("g({n})"), max_jumps, e.n_returned, e.censored_fraction(), s.as_ref(), Some(p.mean().0), true, Verdict::Pass));
        laws.extend(law_detail(e, max_jumps, &[(format!("V_{n}"), p)]));
    }
    let (verdict, note) = if empty {
        (Verdict::Fail, Some("no extinct runs".into()))
    } else if worst > tol.birth_death_tv {
        (Verdict::Fail, Some(format!("largest TV {worst:.4} exceeds {}", tol.birth_death_tv)))
    } else {
        (Verdict::Pass, None)
    };
    rows.iter_mut().for_each(|r| r.verdict = verdict);
    Ok(IdentityReport { identity: identity.into(), target: target.into(), verdict, note, rows, laws })
}
