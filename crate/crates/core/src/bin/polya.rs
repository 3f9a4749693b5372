use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polya_core::analytic::{
    conditional_count_pmf, d1_crossing_law, expected_crossings, shell_law, state_kernel, Direction, KernelFamily,
    RateIndexing,
};
use polya_core::chart::{pmf_chart, Series};
use polya_core::crossing::Target;
use polya_core::harness::stats::{wilson, Z99};
use polya_core::harness::{run_mc, verify, ExperimentConfig, Probe, TargetSet, VerificationReport, VerifyConfig};
use polya_core::lattice::{format_rational, shell_combinatorics, shell_size};
use polya_core::pmf::{thin_pmf, Pmf, DEFAULT_K};
use polya_core::walk::WalkKind;
use polya_core::{Error, LatticeVector};

#[derive(Parser)]
#[command(name = "polya", version, about = "Crossing laws of Polya walk excursions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyticKind {
    Shell,
    StateKernel,
    D1,
    Expect,
    Thin,
}

#[derive(Subcommand)]
enum Command {
    /// Shell sizes and the counts C(n), C0(n), p_n.
    Shells {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        /// Count only the nonnegative orthant.
        #[arg(long)]
        nonneg: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Analytic laws and expectations.
    Analytic {
        #[arg(long, value_enum)]
        kind: AnalyticKind,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<LatticeVector>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[arg(long, default_value = "up")]
        direction: Direction,
        #[arg(long, default_value_t = DEFAULT_K)]
        kmax: usize,
        /// Parent crossing sum for kernel laws.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Retention probability for thinning.
        #[arg(long)]
        z: Option<f64>,
        #[arg(long, default_value = "state")]
        family: KernelFamily,
        #[arg(long, value_enum, default_value_t = Indexing::Destination)]
        indexing: Indexing,
        /// Pmf JSON to thin instead of the shell law.
        #[arg(long)]
        pmf: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Also write an SVG chart.
        #[arg(long)]
        chart: Option<PathBuf>,
    },
    /// Simulate excursions and tabulate crossing counts.
    Simulate {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "free")]
        walk: WalkKind,
        #[arg(long)]
        tmax: u64,
        #[arg(long)]
        excursions: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Target such as state:1,1 or adirected:1,0|A=1,1 (repeatable).
        #[arg(long, required = true)]
        track: Vec<Target>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        chart: Option<PathBuf>,
    },
    /// Run a verification suite and write report.csv and report.json.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Write one SVG per compared law into this directory.
        #[arg(long)]
        charts: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Indexing {
    Destination,
    Source,
}

impl From<Indexing> for RateIndexing {
    fn from(i: Indexing) -> Self {
        match i {
            Indexing::Destination => RateIndexing::Destination,
            Indexing::Source => RateIndexing::Source,
        }
    }
}

enum Failure {
    Usage(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Shells { d, n, nonneg, format } => shells(d, n, nonneg, format)?,
        Command::Analytic { kind, d, v, n, direction, kmax, m, z, family, indexing, pmf, format, chart } => {
            let a = AnalyticArgs { d, v, n, direction, kmax, m, z, family, indexing: indexing.into(), pmf };
            analytic(kind, &a, format, chart.as_deref())?
        }
        Command::Simulate { d, walk, tmax, excursions, seed, workers, track, out, format, chart } => {
            let cfg = ExperimentConfig { dimension: d, walk, cutoff_ladder: vec![tmax], excursions, seed, workers };
            simulate(&cfg, track, &out, format, chart.as_deref())?
        }
        Command::Verify { config, out_dir, charts } => {
            let cfg = VerifyConfig::load(&config)?;
            let report = verify(&cfg)?;
            write_atomic(&out_dir.join("report.csv"), report.to_csv()?.as_bytes())?;
            write_atomic(&out_dir.join("report.json"), report.to_json()?.as_bytes())?;
            if let Some(dir) = charts {
                report_charts(&report, &dir)?;
            }
            for id in &report.identities {
                eprintln!("{:<8} {} {}{}", id.verdict, id.identity, id.target, id.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default());
            }
            if report.has_failures() {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

/// Writes through a sibling temporary file so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String, Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn print(text: &str) {
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
}

#[derive(Serialize)]
struct ShellRow {
    d: usize,
    n: u64,
    nonneg: bool,
    size: String,
    c: String,
    c0: String,
    p: String,
}

fn shells(d: usize, n: u64, nonneg: bool, format: Format) -> Result<(), Error> {
    let s = shell_combinatorics(d, n)?;
    let row = ShellRow {
        d,
        n,
        nonneg,
        size: shell_size(d, n, nonneg).to_string(),
        c: s.c.to_string(),
        c0: s.c0.to_string(),
        p: format_rational(&s.p_up),
    };
    match format {
        Format::Json => print(&serde_json::to_string_pretty(&row)?),
        Format::Csv => print(&csv_string(&[row])?),
    }
    Ok(())
}

struct AnalyticArgs {
    d: Option<usize>,
    v: Option<LatticeVector>,
    n: Option<i64>,
    direction: Direction,
    kmax: usize,
    m: usize,
    z: Option<f64>,
    family: KernelFamily,
    indexing: RateIndexing,
    pmf: Option<PathBuf>,
}

impl AnalyticArgs {
    fn vector(&self) -> Result<LatticeVector, Error> {
        let v = self.v.clone().ok_or_else(|| Error::Parse("--v is required".into()))?;
        match self.d {
            Some(d) if d != v.dim() => Err(Error::Parse(format!("--d {d} does not match --v {v}"))),
            _ => Ok(v),
        }
    }

    fn d(&self) -> Result<usize, Error> {
        self.d.ok_or_else(|| Error::Parse("--d is required".into()))
    }

    fn n(&self) -> Result<i64, Error> {
        self.n.ok_or_else(|| Error::Parse("--n is required".into()))
    }

    fn level(&self) -> Result<usize, Error> {
        usize::try_from(self.n()?).map_err(|_| Error::Parse("--n must be nonnegative".into()))
    }
}

#[derive(Serialize)]
struct PmfRow {
    k: String,
    mass: f64,
}

fn pmf_rows(p: &Pmf) -> Vec<PmfRow> {
    let mut rows: Vec<PmfRow> = p.masses().iter().enumerate().map(|(k, &mass)| PmfRow { k: k.to_string(), mass }).collect();
    rows.push(PmfRow { k: "tail".into(), mass: p.tail() });
    rows
}

#[derive(Serialize)]
struct ExpectRow {
    quantity: &'static str,
    value: String,
}

fn analytic(kind: AnalyticKind, a: &AnalyticArgs, format: Format, chart: Option<&Path>) -> Result<(), Error> {
    let pmf = match kind {
        AnalyticKind::Expect => {
            let e = expected_crossings(&a.vector()?)?;
            let rows = [
                ("up", &e.e_up),
                ("down", &e.e_down),
                ("total", &e.e_total),
                ("up_xclass", &e.e_up_xclass),
                ("down_xclass", &e.e_down_xclass),
                ("total_xclass", &e.e_total_xclass),
            ]
            .map(|(quantity, r)| ExpectRow { quantity, value: format_rational(r) });
            match format {
                Format::Json => print(&serde_json::to_string_pretty(&e)?),
                Format::Csv => print(&csv_string(&rows)?),
            }
            return Ok(());
        }
        AnalyticKind::Shell => shell_law(a.d()?, a.level()?, a.direction, a.kmax, a.indexing)?,
        AnalyticKind::D1 => d1_crossing_law(a.n()?, a.direction, a.kmax)?,
        AnalyticKind::StateKernel => {
            let kernel = state_kernel(&a.vector()?, a.direction, a.family)?;
            conditional_count_pmf(&kernel, a.m, a.kmax)?
        }
        AnalyticKind::Thin => {
            let z = a.z.ok_or_else(|| Error::Parse("--z is required".into()))?;
            let base = match &a.pmf {
                Some(path) => serde_json::from_str::<Pmf>(&fs::read_to_string(path)?)?,
                None => shell_law(a.d()?, a.level()?, a.direction, a.kmax, a.indexing)?,
            };
            thin_pmf(&base, z, a.kmax)?
        }
    };
    if pmf.is_truncated() {
        eprintln!("warning: unassigned tail mass {:.3e} at kmax {}", pmf.tail(), pmf.k_max());
    }
    match format {
        Format::Json => print(&serde_json::to_string_pretty(&pmf)?),
        Format::Csv => print(&csv_string(&pmf_rows(&pmf))?),
    }
    if let Some(path) = chart {
        let s = Series { label: pmf.label().to_string(), points: pmf.masses().iter().copied().enumerate().collect() };
        pmf_chart(path, pmf.label(), &[s])?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimRow {
    target: String,
    direction: String,
    k: usize,
    count: u64,
    frequency: f64,
    ci_low: f64,
    ci_high: f64,
    n_returned: u64,
    censored_frac: f64,
}

fn simulate(cfg: &ExperimentConfig, track: Vec<Target>, out: &Path, format: Format, chart: Option<&Path>) -> Result<(), Error> {
    let mut set = TargetSet::default();
    let mut probes = Vec::new();
    let mut labels = Vec::new();
    for t in track {
        let dirs: &[Direction] = match t {
            Target::ADirected { .. } => &[Direction::Total],
            _ => &[Direction::Up, Direction::Down, Direction::Total],
        };
        let label = t.to_string();
        let i = set.index(t);
        for &dir in dirs {
            probes.push(Probe::count(i, dir));
            labels.push((label.clone(), dir));
        }
    }
    let result = run_mc(cfg, set.targets(), &probes, None)?;
    let rung = result.last();
    let mut rows = Vec::new();
    for ((target, dir), e) in labels.iter().zip(&rung.dists) {
        for (k, &count) in e.counts.iter().enumerate() {
            let (lo, hi) = wilson(count, e.n_returned, Z99);
            rows.push(SimRow {
                target: target.clone(),
                direction: dir.to_string(),
                k,
                count,
                frequency: count as f64 / e.n_returned as f64,
                ci_low: lo,
                ci_high: hi,
                n_returned: e.n_returned,
                censored_frac: rung.censored_fraction(),
            });
        }
    }
    if rung.returned == 0 {
        eprintln!("warning: no excursion returned within {} steps", cfg.max_cutoff());
    }
    let text = match format {
        Format::Csv => csv_string(&rows)?,
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    write_atomic(out, text.as_bytes())?;
    if let Some(path) = chart {
        let series: Vec<Series> = labels
            .iter()
            .map(|(t, dir)| Series {
                label: format!("{t} {dir}"),
                points: rows.iter().filter(|r| &r.target == t && r.direction == dir.to_string()).map(|r| (r.k, r.frequency)).collect(),
            })
            .collect();
        pmf_chart(path, &format!("empirical laws, t_max = {}", cfg.max_cutoff()), &series)?;
    }
    Ok(())
}

fn report_charts(report: &VerificationReport, dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let mut i = 0;
    for id in &report.identities {
        for law in &id.laws {
            let mut series = vec![Series {
                label: format!("empirical (n = {})", law.n),
                points: law.empirical.iter().map(|b| (b.k, b.mass)).collect(),
            }];
            let k_max = law.empirical.len().saturating_sub(1).max(10);
            for p in &law.predictions {
                series.push(Series {
                    label: p.label.clone(),
                    points: p.pmf.masses().iter().copied().enumerate().take(k_max + 1).collect(),
                });
            }
            let name = format!("{i:02}_{}.svg", id.identity);
            pmf_chart(&dir.join(name), &format!("{} {}", id.identity, id.target), &series)?;
            i += 1;
        }
    }
    Ok(())
}
