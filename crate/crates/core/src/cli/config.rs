//! Command-line flags, config files, and their merge into a validated
//! [`ExperimentConfig`].

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use super::CliError;
use crate::experiments::Topology;
use crate::hbt::{Envelope, GridSpec, HbtGeometry};
use crate::splitters::NetworkDescription;

#[derive(Debug, Parser)]
#[command(
    name = "twinterf",
    version,
    about = "Two-particle interference in n-port interferometers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hong-Ou-Mandel: two sources on one balanced beam splitter.
    Hom {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Four-port extended HOM experiment.
    ExtendedHom {
        /// eq6, fig5 or fig6
        #[arg(long)]
        topology: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Alternating-phase n-port splitter.
    Nport {
        /// Number of channels (even).
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Continuous-position (HBT) coincidence density.
    Hbt {
        #[command(flatten)]
        hbt: HbtArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Custom beam-splitter network read from a JSON file.
    Network {
        /// Network description file.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Run even if the two input columns overlap.
        #[arg(long)]
        allow_nonphysical: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Subcommand-specific flags, separated from the shared ones.
enum Specific {
    Hom,
    ExtendedHom {
        topology: Option<String>,
    },
    Nport {
        n: Option<usize>,
    },
    Hbt(HbtArgs),
    Network {
        file: Option<PathBuf>,
        allow_nonphysical: bool,
    },
}

impl Specific {
    fn name(&self) -> &'static str {
        match self {
            Specific::Hom => "hom",
            Specific::ExtendedHom { .. } => "extended-hom",
            Specific::Nport { .. } => "nport",
            Specific::Hbt(_) => "hbt",
            Specific::Network { .. } => "network",
        }
    }
}

impl Command {
    fn split(self) -> (CommonArgs, Specific) {
        match self {
            Command::Hom { common } => (common, Specific::Hom),
            Command::ExtendedHom { topology, common } => {
                (common, Specific::ExtendedHom { topology })
            }
            Command::Nport { n, common } => (common, Specific::Nport { n }),
            Command::Hbt { hbt, common } => (common, Specific::Hbt(hbt)),
            Command::Network {
                file,
                allow_nonphysical,
                common,
            } => (
                common,
                Specific::Network {
                    file,
                    allow_nonphysical,
                },
            ),
        }
    }
}

#[derive(Debug, Args)]
pub struct HbtArgs {
    /// Half separation of the sources.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub wavelength: Option<f64>,
    /// Source-to-screen distance.
    #[arg(long = "L", allow_hyphen_values = true)]
    pub distance: Option<f64>,
    /// Envelope width (standard deviation of |psi|^2).
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    /// min:max:points
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Fix the first detector here and emit a 1-D cut.
    #[arg(long, allow_hyphen_values = true)]
    pub slice_x1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Data output path (`-` for stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// Reference detector (1-based) for discrete bar data.
    #[arg(long)]
    pub reference: Option<usize>,
    /// Cross-check the engine against the closed-form oracle.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Absolute,
    Paper,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    experiment: Option<String>,
    n: Option<usize>,
    reference: Option<usize>,
    topology: Option<String>,
    x0: Option<f64>,
    wavelength: Option<f64>,
    #[serde(rename = "L")]
    distance: Option<f64>,
    sigma: Option<f64>,
    center: Option<f64>,
    grid: Option<String>,
    slice_x1: Option<f64>,
    network: Option<PathBuf>,
    allow_nonphysical: Option<bool>,
    verify: Option<bool>,
    output: Option<FileOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOutput {
    format: Option<Format>,
    path: Option<PathBuf>,
    units: Option<Units>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Hom {
        reference: usize,
    },
    ExtendedHom {
        topology: Topology,
        reference: usize,
    },
    Nport {
        n: usize,
        reference: usize,
    },
    Hbt {
        geometry: HbtGeometry,
        envelope: Envelope,
        grid: GridSpec,
        slice_x1: Option<f64>,
    },
    Network {
        network: NetworkDescription,
        path: PathBuf,
        reference: usize,
        allow_nonphysical: bool,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Hom { .. } => "hom",
            Experiment::ExtendedHom { .. } => "extended-hom",
            Experiment::Nport { .. } => "nport",
            Experiment::Hbt { .. } => "hbt",
            Experiment::Network { .. } => "network",
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, Experiment::Hbt { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub format: Format,
    /// `None`: summary only. `Some("-")`: data to stdout.
    pub path: Option<PathBuf>,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub output: OutputSpec,
    pub verify: bool,
}

/// Collects precedence warnings while merging flags over file values.
#[derive(Default)]
struct Merger {
    warnings: Vec<String>,
}

impl Merger {
    fn pick<T: PartialEq + Display>(
        &mut self,
        name: &str,
        flag: Option<T>,
        file: Option<T>,
    ) -> Option<T> {
        match (flag, file) {
            (Some(f), Some(c)) => {
                if f != c {
                    self.warnings
                        .push(format!("--{name} {f} overrides config value {c}"));
                }
                Some(f)
            }
            (f, c) => f.or(c),
        }
    }

    fn pick_path(
        &mut self,
        name: &str,
        flag: Option<PathBuf>,
        file: Option<PathBuf>,
    ) -> Option<PathBuf> {
        self.pick(name, flag.map(DisplayPath), file.map(DisplayPath))
            .map(|p| p.0)
    }
}

#[derive(PartialEq)]
struct DisplayPath(PathBuf);

impl Display for DisplayPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.display().fmt(f)
    }
}

impl Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl Display for Units {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Units::Absolute => "absolute",
            Units::Paper => "paper",
        })
    }
}

fn required<T>(name: &str, value: Option<T>) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required parameter `{name}`")))
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {}", path.display(), e.message())))
}

/// Paths inside a config file are relative to the file's directory.
fn resolve_relative(config: &Path, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        return path;
    }
    match config.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(path),
        _ => path,
    }
}

fn reference_index(reference: Option<usize>, n: usize) -> Result<usize, CliError> {
    let r = reference.unwrap_or(1);
    if r == 0 || r > n {
        return Err(CliError::Config(format!(
            "reference detector {r} outside 1..={n}"
        )));
    }
    Ok(r - 1)
}

fn engine_config(e: crate::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Merges flags over an optional config file and validates the result.
/// Returns the config and any precedence warnings.
pub fn parse_config(cli: Cli) -> Result<(ExperimentConfig, Vec<String>), CliError> {
    let (common, command) = cli.command.split();
    let kind = command.name();
    let file = match &common.config {
        Some(path) => {
            let mut file = read_file_config(path)?;
            file.network = file.network.map(|p| resolve_relative(path, p));
            if let Some(out) = file.output.as_mut() {
                out.path = out.path.take().map(|p| resolve_relative(path, p));
            }
            file
        }
        None => FileConfig::default(),
    };
    if let Some(exp) = &file.experiment {
        if exp != kind {
            return Err(CliError::Config(format!(
                "config file is for experiment `{exp}`, but `{kind}` was requested"
            )));
        }
    }

    let mut m = Merger::default();
    let file_out = file.output.unwrap_or_default();
    let path = m.pick_path("out", common.out, file_out.path);
    let format = m.pick("format", common.format, file_out.format);
    let format = format.unwrap_or_else(|| match &path {
        Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    });
    let units = m
        .pick("units", common.units, file_out.units)
        .unwrap_or_default();
    let verify = common.verify || file.verify.unwrap_or(false);
    let reference = m.pick("reference", common.reference, file.reference);

    let experiment = match command {
        Specific::Hom => Experiment::Hom {
            reference: reference_index(reference, 2)?,
        },
        Specific::ExtendedHom { topology } => {
            let topology = m
                .pick("topology", topology, file.topology)
                .unwrap_or_else(|| "eq6".to_string())
                .parse()
                .map_err(engine_config)?;
            Experiment::ExtendedHom {
                topology,
                reference: reference_index(reference, 4)?,
            }
        }
        Specific::Nport { n } => {
            let n = required("n", m.pick("n", n, file.n))?;
            if n < 2 || n % 2 != 0 {
                return Err(CliError::Config(format!(
                    "n must be even and at least 2, got {n}"
                )));
            }
            Experiment::Nport {
                n,
                reference: reference_index(reference, n)?,
            }
        }
        Specific::Hbt(hbt) => {
            if verify {
                return Err(CliError::Config(
                    "--verify is only available for discrete experiments".into(),
                ));
            }
            let x0 = required("x0", m.pick("x0", hbt.x0, file.x0))?;
            let wavelength = required(
                "wavelength",
                m.pick("wavelength", hbt.wavelength, file.wavelength),
            )?;
            let distance = required("L", m.pick("L", hbt.distance, file.distance))?;
            let sigma = required("sigma", m.pick("sigma", hbt.sigma, file.sigma))?;
            let center = m.pick("center", hbt.center, file.center).unwrap_or(0.0);
            let grid: GridSpec = required("grid", m.pick("grid", hbt.grid, file.grid))?
                .parse()
                .map_err(engine_config)?;
            let slice_x1 = m.pick("slice-x1", hbt.slice_x1, file.slice_x1);
            Experiment::Hbt {
                geometry: HbtGeometry::new(x0, wavelength, distance).map_err(engine_config)?,
                envelope: Envelope::gaussian(sigma, center).map_err(engine_config)?,
                grid,
                slice_x1,
            }
        }
        Specific::Network {
            file: flag_file,
            allow_nonphysical,
        } => {
            let path = required("network", m.pick_path("file", flag_file, file.network))?;
            let text = fs::read_to_string(&path).map_err(|e| {
                CliError::Config(format!("cannot read network {}: {e}", path.display()))
            })?;
            let network = NetworkDescription::from_json(&text).map_err(engine_config)?;
            network.validate().map_err(engine_config)?;
            Experiment::Network {
                reference: reference_index(reference, network.dim)?,
                network,
                path,
                allow_nonphysical: allow_nonphysical || file.allow_nonphysical.unwrap_or(false),
            }
        }
    };

    Ok((
        ExperimentConfig {
            experiment,
            output: OutputSpec {
                format,
                path,
                units,
            },
            verify,
        },
        m.warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(args: &[&str]) -> Result<(ExperimentConfig, Vec<String>), CliError> {
        let mut full = vec!["twinterf"];
        full.extend_from_slice(args);
        parse_config(Cli::try_parse_from(full).expect("flags parse"))
    }

    #[test]
    fn hom_with_csv_out() {
        let (cfg, warnings) = parse(&["hom", "--out", "hom.csv"]).unwrap();
        assert_eq!(cfg.experiment, Experiment::Hom { reference: 0 });
        assert_eq!(cfg.output.format, Format::Csv);
        assert_eq!(cfg.output.path, Some(PathBuf::from("hom.csv")));
        assert!(warnings.is_empty());
    }

    #[test]
    fn format_follows_extension() {
        let (cfg, _) = parse(&["hom", "--out", "hom.json"]).unwrap();
        assert_eq!(cfg.output.format, Format::Json);
        let (cfg, _) = parse(&["hom", "--out", "hom.json", "--format", "csv"]).unwrap();
        assert_eq!(cfg.output.format, Format::Csv);
    }

    #[test]
    fn hbt_slice_flags() {
        let (cfg, _) = parse(&[
            "hbt",
            "--x0",
            "1e-3",
            "--wavelength",
            "8e-7",
            "--L",
            "1.0",
            "--sigma",
            "2e-3",
            "--grid",
            "-0.005:0.005:2048",
            "--slice-x1",
            "0",
        ])
        .unwrap();
        match cfg.experiment {
            Experiment::Hbt {
                geometry,
                grid,
                slice_x1,
                ..
            } => {
                assert!((geometry.fringe_spacing() - 4e-4).abs() < 1e-15);
                assert_eq!(grid.points, 2048);
                assert_eq!(slice_x1, Some(0.0));
                // at least 16 points per fringe
                assert!(grid.step() * 16.0 <= geometry.fringe_spacing());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn odd_n_rejected() {
        match parse(&["nport", "--n", "7"]) {
            Err(CliError::Config(msg)) => assert!(msg.contains("n must be even")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_parameter_named() {
        match parse(&["nport"]) {
            Err(CliError::Config(msg)) => assert!(msg.contains("`n`")),
            other => panic!("{other:?}"),
        }
        match parse(&[
            "hbt",
            "--x0",
            "1e-3",
            "--wavelength",
            "8e-7",
            "--sigma",
            "1e-3",
        ]) {
            Err(CliError::Config(msg)) => assert!(msg.contains("`L`")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verify_rejected_for_hbt() {
        let r = parse(&[
            "hbt",
            "--x0",
            "1e-3",
            "--wavelength",
            "8e-7",
            "--L",
            "1",
            "--sigma",
            "2e-3",
            "--grid",
            "-0.005:0.005:2048",
            "--verify",
        ]);
        assert!(matches!(r, Err(CliError::Config(_))));
    }

    #[test]
    fn config_file_and_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(
            f,
            "experiment = \"nport\"\nn = 8\nreference = 3\n[output]\nunits = \"paper\"\npath = \"bars.csv\""
        )
        .unwrap();
        let p = path.to_str().unwrap();

        let (cfg, warnings) = parse(&["nport", "--config", p]).unwrap();
        assert_eq!(cfg.experiment, Experiment::Nport { n: 8, reference: 2 });
        assert_eq!(cfg.output.units, Units::Paper);
        assert_eq!(cfg.output.path, Some(dir.path().join("bars.csv")));
        assert!(warnings.is_empty());

        let (cfg, warnings) = parse(&["nport", "--config", p, "--n", "16"]).unwrap();
        assert_eq!(
            cfg.experiment,
            Experiment::Nport {
                n: 16,
                reference: 2
            }
        );
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("--n 16"));

        assert!(matches!(
            parse(&["hom", "--config", p]),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn unknown_config_key_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        fs::write(&path, "n = 4\nwavelenght = 1.0\n").unwrap();
        match parse(&["nport", "--config", path.to_str().unwrap()]) {
            Err(CliError::Config(msg)) => assert!(msg.contains("wavelenght"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reference_bounds() {
        assert!(parse(&["hom", "--reference", "3"]).is_err());
        assert!(parse(&["nport", "--n", "4", "--reference", "0"]).is_err());
        let (cfg, _) = parse(&["extended-hom", "--topology", "fig6", "--reference", "4"]).unwrap();
        assert_eq!(
            cfg.experiment,
            Experiment::ExtendedHom {
                topology: Topology::Fig6,
                reference: 3
            }
        );
        assert!(parse(&["extended-hom", "--topology", "fig9"]).is_err());
    }
}
