//! `nhim certify | sweep | manifold`.
//!
//! Exit status: 0 certified (or the command completed), 1 not certified or
//! inconclusive, 2 configuration or runtime error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nhim_core::verify::certify;

use crate::config::RunConfig;
use crate::export::{parse_point, run_manifold, Target};
use crate::report::CertificateDoc;
use crate::sweep::{csv, parse_partition, run_sweep, table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nhim", version, about = "Certify and construct normally hyperbolic invariant manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the rate, covering and backward cone conditions and write a certificate.
    Certify {
        #[arg(long)]
        config: PathBuf,
        /// requested smoothness order, overriding the config
        #[arg(long)]
        k: Option<u32>,
    },
    /// Certify each ε interval of a partition file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Construct a manifold or fiber and write its nodes.
    Manifold {
        #[arg(long)]
        config: PathBuf,
        /// wcu, wcs, lambda_star, fiber_u or fiber_s
        #[arg(long)]
        target: Target,
        /// base point λ,x,y of a fiber
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: Option<[f64; 3]>,
        /// depth of center-stable or fiber solves
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> Result<RunConfig> {
    Ok(RunConfig::load(path)?)
}

pub fn cmd_certify(config: &Path, k: Option<u32>) -> Result<(CertificateDoc, PathBuf)> {
    let mut cfg = load(config)?;
    if let Some(k) = k {
        cfg.certify.k = k;
        cfg.validate()?;
    }
    let model = cfg.build_model()?;
    let domain = cfg.domain_box(model.as_ref())?;
    let cert = certify(model.as_ref(), &domain, &cfg.certify_options());
    let doc = CertificateDoc::new(&cert, &cfg).stamped();
    let path = cfg.certificate_path();
    write(&path, &doc.to_json())?;
    Ok((doc, path))
}

pub fn cmd_sweep(config: &Path, partition: &Path) -> Result<String> {
    let cfg = load(config)?;
    let text = fs::read_to_string(partition).with_context(|| format!("reading partition {}", partition.display()))?;
    let intervals = parse_partition(&text).map_err(anyhow::Error::msg).context("bad partition")?;
    let rows = run_sweep(&cfg, &intervals);
    write(&cfg.sweep_csv_path(), &csv(&rows))?;
    Ok(table(&rows))
}

pub fn cmd_manifold(config: &Path, target: Target, z: Option<[f64; 3]>, n: Option<usize>, out: &Path) -> Result<(PathBuf, PathBuf)> {
    let cfg = load(config)?;
    let result = run_manifold(&cfg, target, z, n).map_err(anyhow::Error::msg).with_context(|| format!("building {}", target.as_str()))?;
    let csv_path = out.join(format!("{}.csv", target.as_str()));
    let json_path = out.join(format!("{}.json", target.as_str()));
    write(&csv_path, &result.csv)?;
    let mut json = serde_json::to_string_pretty(&result.diagnostics)?;
    json.push('\n');
    write(&json_path, &json)?;
    Ok((csv_path, json_path))
}

/// Parse arguments, run, and return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Certify { config, k } => cmd_certify(&config, k).map(|(doc, path)| {
            print!("{}", doc.summary());
            println!("certificate written to {}", path.display());
            if doc.certified {
                EXIT_OK
            } else {
                EXIT_NOT_CERTIFIED
            }
        }),
        Command::Sweep { config, partition } => cmd_sweep(&config, &partition).map(|t| {
            print!("{t}");
            EXIT_OK
        }),
        Command::Manifold { config, target, z, n, out } => {
            if target.needs_base_point() && z.is_none() {
                Err(anyhow::anyhow!("target {} needs --z λ,x,y", target.as_str()))
            } else {
                cmd_manifold(&config, target, z, n, &out).map(|(c, j)| {
                    println!("wrote {} and {}", c.display(), j.display());
                    EXIT_OK
                })
            }
        }
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_ERROR
    })
}
