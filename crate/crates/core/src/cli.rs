//! `atomloc` command-line front end: config in, CSV/JSON data files and a run
//! manifest out.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::distributions::{momentum_distribution, position_distribution, DistributionTable, Num};
use crate::error::{Error, Result};
use crate::filters::FilterSample;
use crate::mechanics::{curves, popper_report, sweep};
use crate::model::Convention;
use crate::sampler::{outcome_density, summarize, ChiGrid, RecordSampler, GENERATOR};
use crate::validate::run_validation;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    PaperFigure,
    StrictK0,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PaperFigure => Convention::PaperFigure,
            ConventionArg::StrictK0 => Convention::StrictK0,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "atomloc",
    version,
    about = "Atomic position localization by dual quadrature and internal-state measurement"
)]
pub struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Mapping of wavelength-unit positions to the phase φ.
    #[arg(long, global = true, value_enum, default_value = "paper-figure")]
    pub convention: ConventionArg,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitude, phase and interference filters at χ₀ = 2α, 0, −2α.
    Filters {
        /// Samples over φ ∈ [0, π].
        #[arg(long, default_value_t = 1025)]
        points: usize,
    },
    /// Near-region position distributions.
    Posdist,
    /// Far-region momentum distributions.
    Momdist,
    /// Potentials, transferred-momentum sweep and localization report.
    Mechanics,
    /// Monte Carlo measurement records.
    Sample {
        /// Number of records.
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        /// Generator seed; required so every run is reproducible.
        #[arg(long)]
        seed: u64,
    },
    /// Closed form versus number-basis checks and invariants.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Filters { .. } => "filters",
            Command::Posdist => "posdist",
            Command::Momdist => "momdist",
            Command::Mechanics => "mechanics",
            Command::Sample { .. } => "sample",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub convention: Convention,
    pub config: Config,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub created_unix: u64,
    pub files: Vec<OutputFile>,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("manifest at `{}`: {}", e.path(), e.inner())))
    }

    /// Recomputes every checksum under `dir`; returns the paths that differ.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for f in &self.files {
            let bytes = fs::read(dir.join(&f.path))?;
            if hex::encode(Sha256::digest(&bytes)) != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }
}

/// Collects output files for one run.
struct Output {
    dir: PathBuf,
    header: String,
    files: Vec<OutputFile>,
}

impl Output {
    fn new(dir: &Path, convention: Convention, config_hash: &str) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header: format!(
                "# atomloc {VERSION} convention={} config={config_hash}\n",
                convention.name()
            ),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(OutputFile {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// CSV with the metadata line in front of `body`.
    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("{}{body}", self.header);
        self.write(name, text.as_bytes())
    }

    fn table(&mut self, name: &str, table: &DistributionTable) -> Result<()> {
        let mut buf = self.header.clone().into_bytes();
        table.write_csv(&mut buf)?;
        self.write(name, &buf)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::from_path(p),
        None => Ok(Config::default()),
    }
}

fn mode_name(ramsey_on: bool) -> &'static str {
    if ramsey_on {
        "dual"
    } else {
        "field_only"
    }
}

/// Runs the parsed command line; the manifest is written last.
pub fn run(cli: &Cli) -> Result<RunManifest> {
    let convention = Convention::from(cli.convention);
    let config = load_config(cli.config.as_deref())?;
    let resolved = config.resolve(convention)?;
    if let Some(report) = config.regime_report()? {
        if !report.passed() {
            eprintln!("warning: physical regime outside the dispersive/balanced limit: {report:?}");
        }
    }
    let cfg = resolved.interaction;
    let mut out = Output::new(&cli.out, convention, &config.hash())?;
    let mut seed = None;
    let mut generator = None;

    match &cli.command {
        Command::Filters { points } => {
            if *points < 2 {
                return Err(Error::InvalidParameter {
                    name: "points",
                    reason: "at least 2 samples are needed".into(),
                });
            }
            for (label, chi0) in [
                ("plus2alpha", 2.0 * cfg.alpha),
                ("zero", 0.0),
                ("minus2alpha", -2.0 * cfg.alpha),
            ] {
                let c = cfg.with_chi0(chi0);
                let mut body = String::from("phi,d,f_a,f_b,envelope\n");
                for i in 0..*points {
                    let phi = PI * i as f64 / (*points - 1) as f64;
                    let s = FilterSample::evaluate(phi, &c);
                    let (fa, fb) = (s.f_a(), s.f_b());
                    writeln!(
                        body,
                        "{},{},{},{},{}",
                        Num(phi),
                        Num(s.d),
                        Num(fa),
                        Num(fb),
                        Num(fa + fb)
                    )
                    .unwrap();
                }
                out.csv(&format!("filters_chi0_{label}.csv"), &body)?;
            }
        }
        Command::Posdist => {
            let wp = resolved.wavepacket()?;
            let table = position_distribution(&wp, &cfg)?;
            out.table(&format!("posdist_{}.csv", mode_name(cfg.ramsey_on)), &table)?;
        }
        Command::Momdist => {
            let wp = resolved.wavepacket()?;
            let table = momentum_distribution(&wp, &cfg)?;
            out.table(&format!("momdist_{}.csv", mode_name(cfg.ramsey_on)), &table)?;
        }
        Command::Mechanics => {
            let phis: Vec<f64> = (0..=1024).map(|i| PI * i as f64 / 1024.0).collect();
            let c = curves(&phis, &cfg);
            let mut body = String::from("phi,u_a,u_b,p_t_a,p_t_b\n");
            for i in 0..phis.len() {
                writeln!(
                    body,
                    "{},{},{},{},{}",
                    Num(c.phi[i]),
                    Num(c.u_a[i]),
                    Num(c.u_b[i]),
                    Num(c.p_t_a[i]),
                    Num(c.p_t_b[i])
                )
                .unwrap();
            }
            out.csv("curves.csv", &body)?;

            let phi0s: Vec<f64> = (0..=4).map(|k| PI * k as f64 / 8.0).collect();
            let sigmas = [0.4, 0.2, 0.1, 0.05, 0.025];
            let mut body = String::from("phi0,sigma,dpt_numeric,dpt_closed,dpt_smallsigma\n");
            for r in sweep(&phi0s, &sigmas, &cfg)? {
                writeln!(
                    body,
                    "{},{},{},{},{}",
                    Num(r.phi0),
                    Num(r.sigma),
                    Num(r.dpt_numeric),
                    Num(r.dpt_closed),
                    Num(r.dpt_smallsigma)
                )
                .unwrap();
            }
            out.csv("sweep.csv", &body)?;

            let wp = resolved.wavepacket()?;
            let configs = [
                ("dual".to_string(), cfg.with_ramsey(true)),
                ("field_only".to_string(), cfg.with_ramsey(false)),
                (
                    "dual_theta_half_pi".to_string(),
                    cfg.with_ramsey(true).with_theta(PI / 2.0),
                ),
            ];
            out.json("popper_report.json", &popper_report(&configs, &wp)?)?;
        }
        Command::Sample { count, seed: s } => {
            if *count == 0 {
                return Err(Error::InvalidParameter {
                    name: "count",
                    reason: "at least one record is required".into(),
                });
            }
            let wp = resolved.wavepacket()?;
            let density = outcome_density(&wp, &cfg, ChiGrid::default_for(cfg.alpha))?;
            let sampler = RecordSampler::new(density)?;
            let records = sampler.sample(*count, *s);
            let mut body = String::with_capacity(32 * records.len());
            body.push_str("chi,state\n");
            for r in &records {
                writeln!(body, "{},{}", Num(r.chi), r.state.label()).unwrap();
            }
            out.csv("samples.csv", &body)?;
            out.json("sample_summary.json", &summarize(&sampler, &records, *s)?)?;
            seed = Some(*s);
            generator = Some(GENERATOR.to_string());
        }
        Command::Validate => {
            let report = run_validation()?;
            for c in &report.checks {
                eprintln!(
                    "{} {:<40} max error {:.3e} (tolerance {:.1e}, {} samples)",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_error,
                    c.tolerance,
                    c.samples
                );
            }
            let mut stable = report.clone();
            stable.elapsed_seconds = 0.0;
            out.json("validation_report.json", &stable)?;
            eprintln!(
                "{} checks in {:.2} s",
                report.checks.len(),
                report.elapsed_seconds
            );
            if !report.passed() {
                finish(&cli.command, convention, config, seed, generator, out)?;
                return Err(Error::Validation(report.failures()));
            }
        }
    }
    finish(&cli.command, convention, config, seed, generator, out)
}

fn finish(
    command: &Command,
    convention: Convention,
    config: Config,
    seed: Option<u64>,
    generator: Option<String>,
    out: Output,
) -> Result<RunManifest> {
    let manifest = RunManifest {
        tool: "atomloc".into(),
        version: VERSION.into(),
        command: command.name().into(),
        convention,
        config_hash: config.hash(),
        config,
        seed,
        generator,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        files: out.files,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(out.dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from([
            "atomloc",
            "--convention",
            "strict-k0",
            "sample",
            "--seed",
            "3",
        ])
        .unwrap();
        assert_eq!(cli.convention, ConventionArg::StrictK0);
        assert!(matches!(
            cli.command,
            Command::Sample {
                count: 100_000,
                seed: 3
            }
        ));
        assert!(Cli::try_parse_from(["atomloc", "sample"]).is_err());
        assert!(Cli::try_parse_from(["atomloc", "--convention", "k0", "filters"]).is_err());
    }

    #[test]
    fn manifest_rejects_garbage() {
        assert!(RunManifest::from_json("{}").is_err());
        assert!(RunManifest::from_json("[").is_err());
    }
}
