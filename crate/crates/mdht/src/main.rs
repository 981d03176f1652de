use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mdht_core::certifier::{certify, soundness_audit, verify_certificate, Strategy};
use mdht_core::directions::{DirectionSet, SampledCurve};
use mdht_core::geometry::{
    curve_cover, grid_cover_by_interval_count, grid_cover_for_product, partition_points_2d, stab_count, stab_sup,
    StabMode,
};
use mdht_core::probe::{band_limited_noise, build_sharpness_field, SharpnessSpec};
use serde::Serialize;

use mdht::check::{check_all, AuditFixture};
use mdht::families::{build, natural_strategy, parse_params, spec_of};
use mdht::fit::{fit_growth, points_from_rows, Model};
use mdht::formats::{
    certificate_from_json, certificate_to_json, cover_from_json, cover_to_json, direction_set_from_json,
    direction_set_to_json, field_from_bytes, field_to_bytes, read_input, report_from_json, report_to_json, Meta,
};
use mdht::maximal::apply_maximal_par;
use mdht::suite::{choose_grid, parse_list, run_suite, BoxChoice, Suite, DEFAULT_CUTOFF};
use mdht::sweep::{read_sweep_csv, run_sweep, SweepPlan};
use mdht::RustFft;

/// Maximal directional Hilbert transforms: probes, covers and certificates.
///
/// Exit status: 0 on success, 1 on IO errors, 2 when an input violates a
/// precondition, 3 when a soundness audit fails.
#[derive(Parser)]
#[command(name = "mdht", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a direction set or a probe field.
    #[command(subcommand)]
    Gen(Gen),
    /// Apply H_Ω to a field.
    Apply {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        dirs: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Measure Rayleigh quotients of a probe suite.
    Estimate(EstimateArgs),
    /// Build a cell cover of a direction set.
    Partition(PartitionArgs),
    /// Supremum of the stabbing statistic of a cover.
    Stab {
        #[arg(long)]
        cover: PathBuf,
        /// Exact maximum over all hyperplanes instead of sampling.
        #[arg(long)]
        exact: bool,
        /// With --exact, skip hyperplanes through cell vertices.
        #[arg(long, requires = "exact")]
        generic: bool,
        #[arg(long, default_value_t = 100_000)]
        lines: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Build and self-check a bound certificate.
    Certify {
        #[arg(long)]
        dirs: PathBuf,
        /// trivial, dyadic-1d, curve-pairs, product-grid, hamsandwich-2d[:rounds] or lacunary-mixed.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Compare a certificate with a probe report.
    Audit {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Run a parameter sweep and write CSV.
    Sweep(SweepArgs),
    /// Fit a growth model to a sweep CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        /// logN, sqrtlogN, power or constant.
        #[arg(long)]
        model: String,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Check {
        /// Also audit this certificate against --report.
        #[arg(long, requires = "report")]
        cert: Option<PathBuf>,
        #[arg(long, requires = "cert")]
        report: Option<PathBuf>,
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// A named family: uniform, grid, product, lacunary, theta, boustrophedon, prescribed.
    Dirs {
        family: String,
        /// Family parameters as key=value.
        params: Vec<String>,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// A sampled probe field.
    Field {
        /// sharpness or noise.
        #[arg(long)]
        kind: String,
        /// Sizes N1xN2x... of the product the sharpness probe targets.
        #[arg(long)]
        sizes: Option<String>,
        /// Dimension n of Ω when no sizes are given.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value = "64")]
        grid: String,
        #[arg(long = "box")]
        box_len: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
        #[arg(short)]
        o: PathBuf,
    },
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    dirs: PathBuf,
    /// Parts joined by '+': sharpness, random[:k], refined[:iters], cutoff:c.
    #[arg(long)]
    suite: Option<String>,
    /// Samples per axis, one value or one per axis; powers of two.
    #[arg(long, default_value = "64")]
    grid: String,
    /// Box lengths, or auto.
    #[arg(long = "box")]
    box_len: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sizes N1xN2x... for the sharpness probe, when Ω is not a uniform product.
    #[arg(long)]
    sizes: Option<String>,
    /// Also report the energy of H_v f on each S_v.
    #[arg(long)]
    regions: bool,
    #[arg(short)]
    o: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    dirs: PathBuf,
    /// grid, intervals, curve or hamsandwich.
    #[arg(long)]
    strategy: String,
    /// hamsandwich: number of rounds.
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// grid: points per block along each axis; intervals: number of intervals.
    #[arg(long)]
    group: Option<String>,
    /// curve: consecutive samples per cell.
    #[arg(long, default_value_t = 2)]
    pair: usize,
    #[arg(short)]
    o: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON plan; replaces the flags below.
    #[arg(long, conflicts_with_all = ["family", "values"])]
    plan: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    /// Swept parameter; the family's main one by default.
    #[arg(long)]
    key: Option<String>,
    /// Comma separated values of the swept parameter.
    #[arg(long)]
    values: Option<String>,
    /// Fixed parameters as key=value.
    #[arg(long)]
    fixed: Vec<String>,
    #[arg(long, default_value = "random:8")]
    suite: String,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, default_value = "64")]
    grid: String,
    /// auto, shared or lengths.
    #[arg(long = "box", default_value = "auto")]
    box_len: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short)]
    o: Option<PathBuf>,
}

/// Error raised for a failed soundness audit.
#[derive(Debug)]
struct AuditFailed(String);

impl std::fmt::Display for AuditFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "soundness audit failed: {}", self.0)
    }
}

impl std::error::Error for AuditFailed {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<AuditFailed>().is_some() {
        3
    } else if e.chain().any(|c| c.is::<std::io::Error>()) {
        1
    } else {
        2
    }
}

fn emit(o: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match o {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json_line<T: Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn load_dirs(p: &Path) -> anyhow::Result<(DirectionSet, mdht::formats::InputDigest)> {
    let (b, d) = read_input(p)?;
    Ok((direction_set_from_json(&b).with_context(|| format!("parsing {}", p.display()))?, d))
}

fn parse_sizes(s: &str) -> anyhow::Result<SharpnessSpec> {
    Ok(SharpnessSpec::new(parse_list(s)?)?)
}

fn cmd_gen(g: Gen) -> anyhow::Result<()> {
    match g {
        Gen::Dirs { family, params, o } => {
            let inst = build(&family, &parse_params(&params)?)?;
            let bytes = direction_set_to_json(&inst.omega, Meta::new(vec![]))?;
            emit(o.as_deref(), &bytes)
        }
        Gen::Field { kind, sizes, dim, grid, box_len, seed, cutoff, o } => {
            let spec = sizes.as_deref().map(parse_sizes).transpose()?;
            let n = match (&spec, dim) {
                (Some(s), None) => s.n(),
                (Some(s), Some(d)) if d == s.n() => d,
                (Some(s), Some(d)) => bail!("--dim {d} disagrees with {} sizes", s.n()),
                (None, Some(d)) => d,
                (None, None) => bail!("give --sizes or --dim"),
            };
            let g = choose_grid(spec.as_ref(), n + 1, &parse_list(&grid)?, &BoxChoice::parse(box_len.as_deref())?)?;
            let f = match kind.as_str() {
                "sharpness" => build_sharpness_field(spec.as_ref().context("the sharpness probe needs --sizes")?, &g)?,
                "noise" => band_limited_noise(&g, cutoff, seed, &RustFft::new())?,
                _ => bail!("unknown field kind {kind:?}; use sharpness or noise"),
            };
            emit(Some(&o), &field_to_bytes(&f, Meta::new(vec![]))?)
        }
    }
}

fn cmd_estimate(a: EstimateArgs) -> anyhow::Result<()> {
    let (omega, d) = load_dirs(&a.dirs)?;
    let spec = match &a.sizes {
        Some(s) => Some(parse_sizes(s)?),
        None => spec_of(&omega),
    };
    let suite = match &a.suite {
        Some(s) => Suite::parse(s)?,
        None if spec.is_some() => Suite::parse("sharpness+random:8")?,
        None => Suite::parse("random:8")?,
    };
    let grid = choose_grid(spec.as_ref(), omega.dim() + 1, &parse_list(&a.grid)?, &BoxChoice::parse(a.box_len.as_deref())?)?;
    let report = run_suite(&omega, spec.as_ref(), &suite, &grid, a.seed, a.regions, &RustFft::new())?;
    emit(a.o.as_deref(), &report_to_json(&report, Meta::new(vec![d]))?)
}

fn cmd_partition(a: PartitionArgs) -> anyhow::Result<()> {
    let (omega, d) = load_dirs(&a.dirs)?;
    let cover = match a.strategy.as_str() {
        "grid" => {
            let g: Vec<usize> = parse_list(a.group.as_deref().unwrap_or("2"))?;
            let g = mdht::suite::per_axis(&g, omega.dim(), "group")?;
            grid_cover_for_product(&omega, &g)?
        }
        "intervals" => {
            let count: usize = a.group.as_deref().context("intervals needs --group <count>")?.parse()?;
            grid_cover_by_interval_count(&omega, count)?
        }
        "curve" => curve_cover(&omega, &SampledCurve::through(&omega), a.pair)?,
        "hamsandwich" => partition_points_2d(&omega, a.rounds)?.cover,
        s => bail!("unknown partition strategy {s:?}; use grid, intervals, curve or hamsandwich"),
    };
    emit(a.o.as_deref(), &cover_to_json(&cover, Meta::new(vec![d]))?)
}

#[derive(Serialize)]
struct StabOut {
    e_sup: usize,
    witness: Vec<String>,
    exact: bool,
    mode: String,
    witness_recount: usize,
    meta: Meta,
}

fn cmd_stab(cover: &Path, exact: bool, generic: bool, lines: usize, seed: u64, o: Option<&Path>) -> anyhow::Result<()> {
    let (b, d) = read_input(cover)?;
    let cover = cover_from_json(&b)?;
    let (mode, name) = match (exact, generic) {
        (true, true) => (StabMode::ExactGeneric, "exact-generic".to_string()),
        (true, false) => (StabMode::Exact, "exact".to_string()),
        _ => (StabMode::Sampled { lines, seed }, format!("sampled(lines={lines},seed={seed})")),
    };
    let s = stab_sup(&cover, mode)?;
    let out = StabOut {
        e_sup: s.e_sup,
        witness: s.witness.coeffs().iter().map(|c| c.to_string()).collect(),
        exact: s.exact,
        mode: name,
        witness_recount: stab_count(&cover, &s.witness),
        meta: Meta::new(vec![d]),
    };
    emit(o, &json_line(&out)?)
}

fn cmd_certify(dirs: &Path, strategy: Option<&str>, o: Option<&Path>) -> anyhow::Result<()> {
    let (omega, d) = load_dirs(dirs)?;
    let strategy = match strategy {
        Some(s) => Strategy::parse(s)?,
        None => natural_strategy(&omega),
    };
    let cert = certify(&omega, &strategy)?;
    if let Some(i) = verify_certificate(&cert).first() {
        bail!("certificate failed its own check at {:?}: {}", i.path, i.message);
    }
    emit(o, &certificate_to_json(&cert, Meta::new(vec![d]))?)
}

#[derive(Serialize)]
struct AuditOut {
    sound: bool,
    certified: f64,
    measured: f64,
    issues: Vec<IssueOut>,
    meta: Meta,
}

#[derive(Serialize)]
struct IssueOut {
    path: Vec<usize>,
    message: String,
}

fn cmd_audit(cert: &Path, report: &Path, o: Option<&Path>) -> anyhow::Result<()> {
    let (cb, cd) = read_input(cert)?;
    let (rb, rd) = read_input(report)?;
    let c = certificate_from_json(&cb)?;
    let r = report_from_json(&rb)?;
    let a = soundness_audit(&c, &r)?;
    let out = AuditOut {
        sound: a.sound,
        certified: a.certified,
        measured: a.measured,
        issues: a.issues.iter().map(|i| IssueOut { path: i.path.clone(), message: i.message.clone() }).collect(),
        meta: Meta::new(vec![cd, rd]),
    };
    emit(o, &json_line(&out)?)?;
    if !a.sound {
        let why = match a.issues.first() {
            Some(i) => format!("{} at {:?}", i.message, i.path),
            None => format!("certified {} < measured {}", a.certified, a.measured),
        };
        return Err(AuditFailed(why).into());
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<()> {
    let plan = match &a.plan {
        Some(p) => {
            let (b, _) = read_input(p)?;
            serde_json::from_slice::<SweepPlan>(&b).with_context(|| format!("parsing plan {}", p.display()))?
        }
        None => SweepPlan {
            family: a.family.context("give --plan or --family")?,
            key: a.key,
            values: match a.values.as_deref() {
                Some(v) if !v.is_empty() => v.split(',').map(|s| s.trim().to_string()).collect(),
                _ => vec![],
            },
            fixed: parse_params(&a.fixed)?,
            suite: a.suite,
            strategy: a.strategy,
            grid: parse_list(&a.grid)?,
            box_choice: a.box_len,
            seed: a.seed,
        },
    };
    let out = run_sweep(&plan, &RustFft::new())?;
    emit(a.o.as_deref(), &out.csv)
}

#[derive(Serialize)]
struct FitOut {
    #[serde(flatten)]
    fit: mdht::fit::Fit,
    meta: Meta,
}

fn cmd_fit(csv: &Path, model: &str, o: Option<&Path>) -> anyhow::Result<()> {
    let (b, d) = read_input(csv)?;
    let rows = read_sweep_csv(&b)?;
    let fit = fit_growth(&points_from_rows(&rows), Model::parse(model)?)?;
    emit(o, &json_line(&FitOut { fit, meta: Meta::new(vec![d]) })?)
}

#[derive(Serialize)]
struct CheckOut {
    #[serde(flatten)]
    summary: mdht::check::CheckSummary,
    meta: Meta,
}

fn cmd_check(cert: Option<&Path>, report: Option<&Path>, o: Option<&Path>) -> anyhow::Result<()> {
    let mut fixtures = Vec::new();
    let mut inputs = Vec::new();
    if let (Some(c), Some(r)) = (cert, report) {
        let (cb, cd) = read_input(c)?;
        let (rb, rd) = read_input(r)?;
        fixtures.push(AuditFixture {
            name: cd.name.clone(),
            cert: certificate_from_json(&cb)?,
            report: report_from_json(&rb)?,
        });
        inputs.extend([cd, rd]);
    }
    let summary = check_all(&RustFft::new(), &fixtures);
    for c in &summary.checks {
        eprintln!("{} {}/{}: {}", if c.passed { "ok  " } else { "FAIL" }, c.module, c.name, c.detail);
    }
    emit(o, &json_line(&CheckOut { summary, meta: Meta::new(inputs) })?)
}

fn cmd_apply(field: &Path, dirs: &Path, o: &Path) -> anyhow::Result<()> {
    let (fb, fd) = read_input(field)?;
    let f = field_from_bytes(&fb)?;
    let (omega, dd) = load_dirs(dirs)?;
    let g = apply_maximal_par(&f, &omega, &RustFft::new())?;
    emit(Some(o), &field_to_bytes(&g, Meta::new(vec![fd, dd]))?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    mdht::init_threads()?;
    match cli.cmd {
        Cmd::Gen(g) => cmd_gen(g),
        Cmd::Apply { field, dirs, o } => cmd_apply(&field, &dirs, &o),
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::Partition(a) => cmd_partition(a),
        Cmd::Stab { cover, exact, generic, lines, seed, o } => cmd_stab(&cover, exact, generic, lines, seed, o.as_deref()),
        Cmd::Certify { dirs, strategy, o } => cmd_certify(&dirs, strategy.as_deref(), o.as_deref()),
        Cmd::Audit { cert, report, o } => cmd_audit(&cert, &report, o.as_deref()),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Fit { csv, model, o } => cmd_fit(&csv, &model, o.as_deref()),
        Cmd::Check { cert, report, o } => cmd_check(cert.as_deref(), report.as_deref(), o.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
