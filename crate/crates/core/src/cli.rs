//! Batch command-line frontend.
//!
//! Exit codes: 0 success, 1 validation or domain error (including malformed
//! command lines), 2 I/O error. Diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::derive::{builtin_standards, compare_to_standard, standard, DEFAULT_TOLERANCE_DB};
use crate::error::{Error, Result};
use crate::ingest::{parse_config, parse_dataset, RunConfig, SweepDataset};
use crate::model::{RcsTriple, Validate};
use crate::pipeline::{fit_groups, load_sidecar, sample_sets, GroupFit};
use crate::reference_data;
use crate::report::{
    csv_string, derive_triples, format_deviation, read_fit_table, read_triple_table, sample_rows,
    CurveRow, FitRow, TripleRow,
};
use crate::sampler::{
    sample_rcs, seeded_rng, B2Interpretation, CapMode, SampleGeometry, SamplerOptions,
};
use crate::statfit::{fit_curves, CURVE_POINTS};
use crate::synth::{generate_campaign, write_campaign, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "inf-rcs",
    version,
    about = "RCS characterization and sampling for indoor-factory sensing targets"
)]
pub struct Cli {
    /// Run configuration (geometry, carriers, cap, calibration sidecar).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file, or output directory for `synth` and `report`. Stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized commands; required by `sample` and `synth`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comparison tolerance in dB.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE_DB)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit per-(target, carrier) log-normal models to a sweep dataset.
    Fit {
        dataset: PathBuf,
        /// Also write PDF/CDF curves next to `--out` as `<stem>.curves.csv`.
        #[arg(long)]
        curves: bool,
    },
    /// Consolidate a fit table into one (A, B1, B2) triple per target.
    Derive { fit_table: PathBuf },
    /// Compare a triple against a standardized one.
    Compare {
        /// Triple as JSON, or a `derive` CSV together with `--target`.
        triple: PathBuf,
        #[arg(long)]
        standard: String,
        /// Row of a derive CSV to compare.
        #[arg(long)]
        target: Option<String>,
    },
    /// Draw RCS realizations from a triple.
    Sample(SampleArgs),
    /// Generate a synthetic sounding campaign with ground truth.
    Synth {
        /// Scenario JSON; built-in defaults when omitted.
        scenario: Option<PathBuf>,
    },
    /// Fit, derive, and compare in one pass, writing every table to `--out`.
    Report { dataset: PathBuf },
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Builtin standard or published measured target.
    #[arg(long, conflicts_with = "triple", required_unless_present = "triple")]
    pub target: Option<String>,
    /// Triple JSON file.
    #[arg(long)]
    pub triple: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    /// `THETA` for monostatic or `INCIDENT,SCATTERED` for bistatic, degrees.
    #[arg(long, default_value = "0")]
    pub angles: String,
    #[arg(long, value_enum, default_value_t = InterpretationArg::CoefficientOfVariation)]
    pub b2_interpretation: InterpretationArg,
    #[arg(long, value_enum, default_value_t = CapArg::MeanRelative)]
    pub cap_mode: CapArg,
    /// Disable B2 fluctuations.
    #[arg(long)]
    pub bypass_b2: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InterpretationArg {
    CoefficientOfVariation,
    LogStdDevDb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CapArg {
    MeanRelative,
    AboveUnitMean,
    Disabled,
}

/// Parses `args` (including the program name), runs the command, and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    if !(cli.tol >= 0.0) || !cli.tol.is_finite() {
        return Err(Error::invalid(format!(
            "--tol must be >= 0, got {}",
            cli.tol
        )));
    }
    match &cli.command {
        Command::Fit { dataset, curves } => cmd_fit(cli, dataset, *curves),
        Command::Derive { fit_table } => cmd_derive(cli, fit_table),
        Command::Compare {
            triple,
            standard,
            target,
        } => cmd_compare(cli, triple, standard, target.as_deref()),
        Command::Sample(args) => cmd_sample(cli, args),
        Command::Synth { scenario } => cmd_synth(cli, scenario.as_deref()),
        Command::Report { dataset } => cmd_report(cli, dataset),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(p) => parse_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_dataset(path: &Path, cfg: &RunConfig) -> Result<SweepDataset> {
    parse_dataset(path)?.with_geometry(cfg.geometry)
}

struct FitRun {
    fits: Vec<GroupFit>,
    curves: Vec<CurveRow>,
}

fn fit_dataset(cli: &Cli, dataset: &Path, with_curves: bool) -> Result<(RunConfig, FitRun)> {
    let cfg = load_config(cli)?;
    let ds = load_dataset(dataset, &cfg)?;
    let sidecar = load_sidecar(&cfg)?;
    let sets = sample_sets(&ds, &cfg, sidecar.as_ref())?;
    let fits = fit_groups(&sets)?;
    let mut curves = Vec::new();
    if with_curves {
        for (set, g) in sets.iter().zip(&fits) {
            if g.fit.degenerate {
                continue;
            }
            for p in fit_curves(&set.samples, &g.fit, CURVE_POINTS)? {
                curves.push(CurveRow::new(&g.target, g.freq, &p));
            }
        }
    }
    Ok((cfg, FitRun { fits, curves }))
}

fn curves_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.curves.csv"))
}

fn cmd_fit(cli: &Cli, dataset: &Path, curves: bool) -> Result<()> {
    if curves && cli.out.is_none() {
        return Err(Error::invalid(
            "--curves needs --out to name the curve file",
        ));
    }
    let (_, run) = fit_dataset(cli, dataset, curves)?;
    let rows: Vec<FitRow> = run.fits.iter().map(FitRow::from).collect();
    write_output(cli.out.as_deref(), &csv_string(&rows))?;
    if let (true, Some(out)) = (curves, &cli.out) {
        write_output(Some(&curves_path(out)), &csv_string(&run.curves))?;
    }
    Ok(())
}

fn cmd_derive(cli: &Cli, fit_table: &Path) -> Result<()> {
    let cfg = load_config(cli)?;
    let rows = read_fit_table(fit_table)?;
    let triples = derive_triples(&rows, cfg.cap_k)?;
    write_output(cli.out.as_deref(), &csv_string(&triples))
}

fn load_triple_json(path: &Path) -> Result<RcsTriple> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let triple: RcsTriple = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    triple.validate()?;
    Ok(triple)
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn cmd_compare(cli: &Cli, path: &Path, standard_name: &str, target: Option<&str>) -> Result<()> {
    let std_triple = standard(standard_name).ok_or_else(|| {
        let known: Vec<&str> = builtin_standards().into_keys().collect();
        Error::invalid(format!(
            "no standardized values for `{standard_name}` (known: {})",
            known.join(", ")
        ))
    })?;
    let (label, triple) = if is_json(path) {
        (path.display().to_string(), load_triple_json(path)?)
    } else {
        let rows = read_triple_table(path)?;
        let row = match target {
            Some(name) => rows.iter().find(|r| r.target == name).ok_or_else(|| {
                Error::invalid(format!("no row for target `{name}` in {}", path.display()))
            })?,
            None if rows.len() == 1 => &rows[0],
            None => {
                return Err(Error::invalid(format!(
                    "{} has {} rows; pick one with --target",
                    path.display(),
                    rows.len()
                )))
            }
        };
        (row.target.clone(), row.triple())
    };
    let d = compare_to_standard(&triple, &std_triple, cli.tol)?;
    write_output(
        cli.out.as_deref(),
        &format_deviation(&label, standard_name, &d),
    )
}

fn require_seed(cli: &Cli, command: &str) -> Result<u64> {
    cli.seed
        .ok_or_else(|| Error::invalid(format!("`{command}` needs an explicit --seed")))
}

/// Builtin standards first, then published measured triples.
fn named_triple(name: &str) -> Result<RcsTriple> {
    if let Some(t) = standard(name) {
        return Ok(t);
    }
    reference_data::target(name)
        .map(|t| RcsTriple::flat(t.triple.0, t.triple.2))
        .ok_or_else(|| Error::invalid(format!("unknown target `{name}`")))
}

fn parse_angles(text: &str) -> Result<SampleGeometry> {
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("--angles: `{s}` is not a number")))
    };
    let geom = match text.split(',').collect::<Vec<_>>().as_slice() {
        [theta] => SampleGeometry::monostatic(parse(theta)?),
        [inc, sca] => SampleGeometry::bistatic(parse(inc)?, parse(sca)?),
        _ => return Err(Error::invalid("--angles takes THETA or INCIDENT,SCATTERED")),
    };
    geom.validate()?;
    Ok(geom)
}

fn cmd_sample(cli: &Cli, args: &SampleArgs) -> Result<()> {
    let seed = require_seed(cli, "sample")?;
    let triple = match (&args.target, &args.triple) {
        (Some(name), _) => named_triple(name)?,
        (None, Some(path)) => load_triple_json(path)?,
        (None, None) => return Err(Error::invalid("give --target or --triple")),
    };
    let geom = parse_angles(&args.angles)?;
    let opts = SamplerOptions {
        interpretation: match args.b2_interpretation {
            InterpretationArg::CoefficientOfVariation => B2Interpretation::CoefficientOfVariation,
            InterpretationArg::LogStdDevDb => B2Interpretation::LogStdDevDb,
        },
        cap: match args.cap_mode {
            CapArg::MeanRelative => CapMode::MeanRelative,
            CapArg::AboveUnitMean => CapMode::AboveUnitMean,
            CapArg::Disabled => CapMode::Disabled,
        },
        bypass_b2: args.bypass_b2,
    };
    let draws = sample_rcs(&triple, &geom, &mut seeded_rng(seed), args.n, &opts)?;
    write_output(cli.out.as_deref(), &csv_string(&sample_rows(&draws)))
}

fn cmd_synth(cli: &Cli, scenario: Option<&Path>) -> Result<()> {
    let seed = require_seed(cli, "synth")?;
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| Error::invalid("`synth` needs --out DIR"))?;
    let scenario = match scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    let campaign = generate_campaign(&scenario, seed)?;
    write_campaign(&campaign, out)
}

pub const REPORT_FITS: &str = "fits.csv";
pub const REPORT_CURVES: &str = "fits.curves.csv";
pub const REPORT_TRIPLES: &str = "triples.csv";
pub const REPORT_COMPARISON: &str = "comparison.txt";

fn cmd_report(cli: &Cli, dataset: &Path) -> Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| Error::invalid("`report` needs --out DIR"))?;
    let (cfg, run) = fit_dataset(cli, dataset, true)?;
    let rows: Vec<FitRow> = run.fits.iter().map(FitRow::from).collect();
    let triples: Vec<TripleRow> = derive_triples(&rows, cfg.cap_k)?;
    let mut comparison = String::new();
    for t in &triples {
        if let Some(std_triple) = standard(&t.target) {
            let d = compare_to_standard(&t.triple(), &std_triple, cli.tol)?;
            comparison.push_str(&format_deviation(&t.target, &t.target, &d));
            comparison.push('\n');
        }
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_output(Some(&out.join(REPORT_FITS)), &csv_string(&rows))?;
    write_output(Some(&out.join(REPORT_CURVES)), &csv_string(&run.curves))?;
    write_output(Some(&out.join(REPORT_TRIPLES)), &csv_string(&triples))?;
    write_output(Some(&out.join(REPORT_COMPARISON)), &comparison)?;
    Ok(())
}
