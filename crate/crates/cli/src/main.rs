mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supergauss_core::io::{write_bundle, write_field_file};
use supergauss_core::{integrate_case, verify_case, Error, IntegrateOptions, ResidualReport};

use config::{parse_complex, CaseArgs};

#[derive(Debug, Parser)]
#[command(
    name = "supergauss",
    version,
    about = "Structural-equation checks and frame integration for supersurfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check Gauss–Codazzi, zero-curvature and structural equations.
    Verify {
        #[command(flatten)]
        case: CaseArgs,
        /// Write the JSON report here (it is always printed to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transport the frame, reconstruct F and check the recovered geometry.
    Integrate {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        integrate: IntegrateArgs,
        /// Output directory for report.json and the F component CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a solved bundle (manifest and field CSVs).
    Family {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value = "bundle")]
        out: PathBuf,
    },
    /// Summarize JSON reports.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
struct IntegrateArgs {
    /// θ order kept per active variable.
    #[arg(long, default_value_t = supergauss_core::integrator::DEFAULT_THETA_ORDER)]
    theta_order: usize,
    /// Add δ to U1 entry (i, j), 1-based: `i,j,δ` or `i,j,re,im`.
    #[arg(long, value_name = "I,J,DELTA", allow_hyphen_values = true)]
    perturb: Option<String>,
}

/// Failure category deciding the exit code.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let verification = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<Error>(),
                    Some(
                        Error::Constraint { .. }
                            | Error::Singular { .. }
                            | Error::NonFinite(_)
                            | Error::PathDependence { .. }
                            | Error::Frame(_)
                    )
                )
            });
            ExitCode::from(if verification { 1 } else { 2 })
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Verify { case, out } => {
            let cfg = case.resolve()?;
            let report = verify_case(&cfg.spec, &cfg.bundle, cfg.tol)?;
            emit(&report, out.as_deref())?;
            Ok(outcome(&report))
        }
        Command::Integrate {
            case,
            integrate,
            out,
        } => {
            let cfg = case.resolve()?;
            let coarse = if cfg.regenerable {
                Some(case.inputs_at(&cfg.spec, &cfg.grid, cfg.grid.n().div_ceil(2))?)
            } else {
                None
            };
            let dim = cfg.spec.tag().dim();
            let opts = IntegrateOptions {
                theta_order: integrate.theta_order,
                tol: cfg.tol,
                gauge: Some(random_gauge(dim, cfg.seed)),
                perturb_u1: integrate
                    .perturb
                    .as_deref()
                    .map(parse_perturb)
                    .transpose()?,
            };
            let result = integrate_case(&cfg.spec, &cfg.bundle, coarse.as_ref(), &opts)?;
            if let Some(w) = result.report.extra.get("warning") {
                eprintln!("warning: {}", w.as_str().unwrap_or_default());
                eprintln!(
                    "holonomy: max {:e}, mean {:e} over {} plaquettes",
                    result.holonomy.max, result.holonomy.mean, result.holonomy.plaquettes
                );
            }
            if let Some(dir) = &out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for (k, f) in result.f.iter().enumerate() {
                    write_field_file(&dir.join(format!("F{k}.csv")), f)?;
                }
                emit(&result.report, Some(&dir.join("report.json")))?;
            } else {
                emit(&result.report, None)?;
            }
            Ok(outcome(&result.report))
        }
        Command::Family { case, out } => {
            let cfg = case.resolve()?;
            let full = supergauss_core::cases::complete_bundle(&cfg.spec, &cfg.bundle)?;
            let manifest = write_bundle(&out, &cfg.spec, &full)?;
            say(&manifest.display().to_string());
            Ok(Outcome::Pass)
        }
        Command::Report { files } => {
            let mut all = true;
            say(&format!(
                "{:<12} {:>5} {:>10} {:>12}  {:<5} failing",
                "case", "n", "h", "overall_max", "pass"
            ));
            for path in files {
                let text = fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let r: ResidualReport = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                let failing: Vec<String> = r
                    .pairs
                    .iter()
                    .filter(|e| !e.passes(&r.tolerance))
                    .map(|e| format!("{}{:?}", e.label, e.sector))
                    .chain(r.failures())
                    .collect();
                all &= r.pass;
                say(&format!(
                    "{:<12} {:>5} {:>10.3e} {:>12.3e}  {:<5} {}",
                    r.case,
                    r.grid.n,
                    r.grid.h,
                    r.overall_max,
                    r.pass,
                    failing.join(" ")
                ));
            }
            Ok(if all { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

fn outcome(r: &ResidualReport) -> Outcome {
    if r.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn emit(report: &ResidualReport, out: Option<&Path>) -> Result<()> {
    let json = report.to_json();
    if let Some(path) = out {
        fs::write(path, format!("{json}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    say(&json);
    Ok(())
}

/// Prints a line to stdout; a closed pipe is not an error.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn parse_perturb(s: &str) -> Result<(usize, usize, Complex64)> {
    let parts: Vec<&str> = s.splitn(3, ',').collect();
    if parts.len() != 3 {
        bail!("--perturb expects i,j,delta");
    }
    let i: usize = parts[0].trim().parse().context("perturb row")?;
    let j: usize = parts[1].trim().parse().context("perturb column")?;
    if i == 0 || j == 0 {
        bail!("--perturb indices are 1-based");
    }
    Ok((i - 1, j - 1, parse_complex(parts[2])?))
}

/// Well-conditioned random ambient matrix `I + 0.3·R`, R uniform in [−1, 1].
fn random_gauge(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim * dim)
        .map(|k| {
            let diag = if k % (dim + 1) == 0 { 1.0 } else { 0.0 };
            Complex64::new(diag + 0.3 * rng.gen_range(-1.0..1.0), 0.0)
        })
        .collect()
}
