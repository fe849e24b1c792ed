//! The `twinterf` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 oracle verification
//! failure, 3 internal invariant violation. Errors are reported on stderr
//! as a single JSON object.

mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde_json::{json, Map, Value};
use thiserror::Error;

pub use config::{
    parse_config, Cli, Command, CommonArgs, Experiment, ExperimentConfig, Format, HbtArgs,
    OutputSpec, Units,
};

use crate::amplitudes::CoincidenceDistribution;
use crate::experiments::{analyze_fringes, run_splitter, DiscretePattern, Topology};
use crate::hbt::{fringe_spacing, hbt_from_nport, scan, ContinuousPattern, HbtModel};
use crate::oracle::oracle_coincidences;
use crate::splitters::{alternating_profile, compile_network, SplitterSpec};
use output::Metadata;

/// Largest accepted engine/oracle difference for `--verify`.
pub const VERIFY_THRESHOLD: f64 = 1e-10;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Engine(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) if e.is_internal() => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Engine(e) if e.is_internal() => "internal",
            CliError::Engine(_) => "engine",
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub max_deviation: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= VERIFY_THRESHOLD
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_VERIFY
        }
    }
}

/// Compares an engine distribution with the oracle evaluated on `spec`.
pub fn verify_distribution(
    dist: &CoincidenceDistribution,
    spec: &SplitterSpec,
) -> Result<VerifyReport, crate::Error> {
    let oracle = oracle_coincidences(spec.col_a().as_slice(), spec.col_b().as_slice())?;
    if oracle.dim != dist.dim() {
        return Err(crate::Error::DimensionMismatch {
            left: dist.dim(),
            right: oracle.dim,
        });
    }
    let max_deviation = dist
        .events()
        .zip(oracle.events())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(VerifyReport { max_deviation })
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: String,
    /// Serialized data file contents.
    pub data: String,
    pub verify: Option<VerifyReport>,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.verify.map_or(EXIT_OK, |v| v.exit_code())
    }
}

fn discrete_spec(experiment: &Experiment) -> Result<(SplitterSpec, Map<String, Value>), CliError> {
    let mut params = Map::new();
    let spec = match experiment {
        Experiment::Hom { .. } => {
            params.insert("n".into(), json!(2));
            alternating_profile(2)?
        }
        Experiment::ExtendedHom { topology, .. } => {
            params.insert("n".into(), json!(4));
            params.insert("topology".into(), json!(topology.to_string()));
            topology.splitter()?
        }
        Experiment::Nport { n, .. } => {
            params.insert("n".into(), json!(n));
            alternating_profile(*n)?
        }
        Experiment::Network {
            network,
            allow_nonphysical,
            ..
        } => {
            params.insert(
                "network".into(),
                serde_json::to_value(network).expect("json"),
            );
            params.insert("allow_nonphysical".into(), json!(allow_nonphysical));
            compile_network(network)?.spec
        }
        Experiment::Hbt { .. } => unreachable!("continuous experiment"),
    };
    Ok((spec, params))
}

fn discrete_reference(experiment: &Experiment) -> usize {
    match experiment {
        Experiment::Hom { reference }
        | Experiment::ExtendedHom { reference, .. }
        | Experiment::Nport { reference, .. }
        | Experiment::Network { reference, .. } => *reference,
        Experiment::Hbt { .. } => 0,
    }
}

fn discrete_summary(
    cfg: &ExperimentConfig,
    spec: &SplitterSpec,
    dist: &CoincidenceDistribution,
    pattern: &DiscretePattern,
) -> String {
    let r = pattern.reference + 1;
    let mut s = String::new();
    writeln!(
        s,
        "experiment: {} (n = {})",
        cfg.experiment.name(),
        pattern.n
    )
    .unwrap();
    if let Experiment::ExtendedHom { topology, .. } = &cfg.experiment {
        if *topology != Topology::Eq6 {
            let perm: Vec<usize> = topology.eq6_relabeling().iter().map(|d| d + 1).collect();
            writeln!(s, "detector relabeling to eq6: {perm:?}").unwrap();
        }
    }
    writeln!(s, "column overlap |<a|b>|: {:.3e}", spec.overlap()).unwrap();
    let paper = cfg.output.units == Units::Paper;
    let scaled = pattern.paper_units();
    writeln!(
        s,
        "{:<12} {:>22}{}",
        "event",
        "probability",
        if paper { "       paper units" } else { "" }
    )
    .unwrap();
    for (k, p) in pattern.counts.iter().enumerate() {
        let label = format!("P({r},{})", k + 1);
        write!(s, "{label:<12} {p:>22.15e}").unwrap();
        if paper {
            write!(s, " {:>17.12}", scaled[k]).unwrap();
        }
        s.push('\n');
    }
    if let Ok(report) = analyze_fringes(pattern, 1e-12) {
        let dark: Vec<usize> = report.dark_indices.iter().map(|d| d + 1).collect();
        writeln!(s, "dark detectors: {dark:?}").unwrap();
        match report.visibility {
            Some(v) => writeln!(s, "visibility: {v:.6}").unwrap(),
            None => writeln!(s, "visibility: n/a").unwrap(),
        }
    }
    writeln!(s, "total probability: {:.15}", dist.total()).unwrap();
    s
}

fn run_discrete(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let (spec, params) = discrete_spec(&cfg.experiment)?;
    let allow = matches!(
        cfg.experiment,
        Experiment::Network {
            allow_nonphysical: true,
            ..
        }
    );
    let dist = run_splitter(&spec, allow)?;
    let total = dist.total();
    if (total - 1.0).abs() > crate::PROBABILITY_TOL {
        return Err(crate::Error::Invariant(format!("distribution sums to {total}")).into());
    }
    let pattern = DiscretePattern::from_distribution(&dist, discrete_reference(&cfg.experiment))?;
    let meta = Metadata::new(
        cfg.experiment.name(),
        params,
        cfg.output.units,
        spec.overlap(),
    );
    let data = match cfg.output.format {
        Format::Csv => output::discrete_csv(&pattern, cfg.output.units),
        Format::Json => output::discrete_json(&meta, &pattern, &dist, cfg.output.units),
    };
    let mut summary = discrete_summary(cfg, &spec, &dist, &pattern);
    let verify = if cfg.verify {
        let report = verify_distribution(&dist, &spec)?;
        writeln!(
            summary,
            "verify: max |engine - oracle| = {:.3e} (threshold {:e}): {}",
            report.max_deviation,
            VERIFY_THRESHOLD,
            if report.passed() { "PASS" } else { "FAIL" }
        )
        .unwrap();
        Some(report)
    } else {
        None
    };
    Ok(RunOutcome {
        summary,
        data,
        verify,
        warnings: Vec::new(),
    })
}

fn run_hbt(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let Experiment::Hbt {
        geometry,
        envelope,
        grid,
        slice_x1,
    } = &cfg.experiment
    else {
        unreachable!("continuous experiment")
    };
    let mut warnings = Vec::new();
    if geometry.paraxial_warning() {
        warnings.push(format!(
            "2 x0 / L = {:.3} exceeds {}; the linear phase model may be inaccurate",
            geometry.paraxial_ratio(),
            crate::hbt::PARAXIAL_WARN_RATIO
        ));
    }
    let model = HbtModel::new(*geometry, *envelope);
    let pattern: ContinuousPattern = scan(&model, grid, *slice_x1)?;
    let fringe = geometry.fringe_spacing();

    let mut params = Map::new();
    params.insert("x0".into(), json!(geometry.x0()));
    params.insert("wavelength".into(), json!(geometry.wavelength()));
    params.insert("L".into(), json!(geometry.distance()));
    params.insert("sigma".into(), json!(envelope.sigma()));
    params.insert("center".into(), json!(envelope.center()));
    params.insert(
        "grid".into(),
        json!({ "min": grid.min, "max": grid.max, "points": grid.points }),
    );
    params.insert("slice_x1".into(), json!(slice_x1));
    let meta = Metadata::new("hbt", params, cfg.output.units, pattern.overlap());
    let data = match cfg.output.format {
        Format::Csv => output::continuous_csv(&pattern, cfg.output.units, fringe),
        Format::Json => output::continuous_json(&meta, &pattern, cfg.output.units, fringe),
    };

    let mut s = String::new();
    writeln!(s, "experiment: hbt").unwrap();
    writeln!(
        s,
        "x0 = {:e}, wavelength = {:e}, L = {:e}, sigma = {:e}",
        geometry.x0(),
        geometry.wavelength(),
        geometry.distance(),
        envelope.sigma()
    )
    .unwrap();
    writeln!(s, "fringe spacing lambda L / (2 x0): {fringe:.6e}").unwrap();
    writeln!(s, "overlap |s|: {:.3e}", pattern.overlap()).unwrap();
    writeln!(s, "grid: {} points, step {:.3e}", grid.points, grid.step()).unwrap();
    writeln!(s, "peak density: {:.6e}", pattern.peak()).unwrap();
    if pattern.is_slice() {
        match fringe_spacing(&pattern) {
            Ok(est) => writeln!(s, "measured dark-fringe spacing: {est:.6e}").unwrap(),
            Err(e) => writeln!(s, "measured dark-fringe spacing: n/a ({e})").unwrap(),
        }
    } else if let Some(total) = pattern.integral() {
        writeln!(s, "integrated probability on grid: {total:.6}").unwrap();
    }
    Ok(RunOutcome {
        summary: s,
        data,
        verify: None,
        warnings,
    })
}

/// Runs a validated configuration without touching the filesystem.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    if cfg.experiment.is_discrete() {
        run_discrete(cfg)
    } else {
        run_hbt(cfg)
    }
}

/// The discrete n-port route for the continuous geometry; exposed for
/// comparison runs.
pub fn run_hbt_nport(cfg: &ExperimentConfig) -> Result<ContinuousPattern, CliError> {
    match &cfg.experiment {
        Experiment::Hbt {
            geometry,
            envelope,
            grid,
            ..
        } => Ok(hbt_from_nport(geometry, envelope, grid)?),
        _ => Err(CliError::Usage("not an hbt configuration".into())),
    }
}

fn write_data(path: &Path, data: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        stdout
            .write_all(data.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))
    } else {
        fs::write(path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Parses `args`, runs, writes output, and returns the process exit code.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.exit_code();
        }
    };
    let result = parse_config(cli).and_then(|(cfg, warnings)| {
        for w in &warnings {
            let _ = writeln!(stderr, "warning: {w}");
        }
        let outcome = run(&cfg)?;
        for w in &outcome.warnings {
            let _ = writeln!(stderr, "warning: {w}");
        }
        match &cfg.output.path {
            Some(path) if path.as_os_str() == "-" => write_data(path, &outcome.data, stdout)?,
            Some(path) => {
                write_data(path, &outcome.data, stdout)?;
                let _ = write!(stdout, "{}", outcome.summary);
            }
            None => {
                let _ = write!(stdout, "{}", outcome.summary);
            }
        }
        Ok(outcome.exit_code())
    });
    match result {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "{}", err.to_json());
            err.exit_code()
        }
    }
}
