//! Command-line front end.
//!
//! Exit status: 0 when every gating check passed, 1 when one failed, 2 on
//! usage errors or invalid input files.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::protocols::{discriminate, sample_outcomes};
use crate::report::Report;
use crate::states::{bell_state, build_rho, resource_state, BellIndex, ResourceSpec};
use crate::suite::{
    basis_checks, discrimination_checks, distill_checks, haar_inputs, rho_checks, run_suite, teleport_checks, RhoCheck,
    Suite, SuiteConfig, Tolerances, RHO_MAX_D, TELEPORT_INPUTS,
};
use crate::tensor::json::{read_state_file, state_to_json, write_density_file, write_state_file};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mes-locc", version, about = "Local discrimination of maximally entangled qudit states")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Seed for random inputs and sampling.
    #[arg(long, global = true, env = "MES_LOCC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Tolerance for construction-level identities.
    #[arg(long, global = true)]
    pub tol_exact: Option<f64>,
    /// Tolerance below zero for eigenvalues counted as nonnegative.
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,
    /// Tolerance for identities computed through an eigensolver.
    #[arg(long, global = true)]
    pub tol_spectral: Option<f64>,
}

impl GlobalOpts {
    fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_exact {
            t.exact = v;
        }
        if let Some(v) = self.tol_psd {
            t.psd = v;
        }
        if let Some(v) = self.tol_spectral {
            t.spectral = v;
        }
        t
    }
}

fn dim_arg(text: &str) -> std::result::Result<usize, String> {
    let d: usize = text.parse().map_err(|e| format!("{e}"))?;
    if (2..=6).contains(&d) {
        Ok(d)
    } else {
        Err(format!("d must be in 2..=6, got {d}"))
    }
}

#[derive(Debug, Args)]
pub struct IndexSelection {
    #[arg(long, requires = "n", conflicts_with = "all", required_unless_present = "all")]
    pub m: Option<usize>,
    #[arg(long, requires = "m")]
    pub n: Option<usize>,
    /// Every index of the basis.
    #[arg(long)]
    pub all: bool,
}

impl IndexSelection {
    fn indices(&self, d: usize) -> Result<Vec<BellIndex>> {
        match (self.m, self.n, self.all) {
            (Some(m), Some(n), false) => Ok(vec![BellIndex::new(d, m, n)?]),
            _ => Ok(BellIndex::all(d).collect()),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one state of the canonical maximally entangled basis.
    Bell {
        #[arg(long, value_parser = dim_arg)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check orthonormality, completeness and maximal entanglement of the basis.
    Basis {
        #[arg(long, value_parser = dim_arg)]
        d: usize,
    },
    /// Teleport qudit states through a shared resource.
    Teleport {
        #[arg(long, value_parser = dim_arg)]
        d: usize,
        /// mes | mes:D | schmidt:c0,c1,... | file:PATH
        #[arg(long, default_value = "mes")]
        resource: String,
        /// State file holding the single qudit to teleport; Haar-random inputs otherwise.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of Haar-random inputs.
        #[arg(long, default_value_t = TELEPORT_INPUTS)]
        inputs: usize,
    },
    /// Identify a hidden basis state by LOCC with the help of a resource.
    Discriminate {
        #[arg(long, value_parser = dim_arg)]
        d: usize,
        #[command(flatten)]
        select: IndexSelection,
        #[arg(long, default_value = "mes")]
        resource: String,
        /// Also draw this many sampled outcomes per index (demonstration only).
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Build the flagged mixture and run diagnostics on it.
    Rho {
        #[arg(long, value_parser = dim_arg)]
        d: usize,
        #[arg(long, default_value = "mes")]
        resource: String,
        /// ppt | reorder | lognegativity | smolin | all
        #[arg(long, default_value = "all")]
        check: String,
        /// Write the mixture as a density state file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the single-copy distillation protocol on mixture components.
    Distill {
        #[arg(long, value_parser = dim_arg)]
        d: usize,
        #[command(flatten)]
        select: IndexSelection,
        #[arg(long, default_value = "mes")]
        resource: String,
    },
    /// Run verification suites.
    Verify {
        /// Comma-separated: basis, teleport, discriminate, necessity, all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_parser = dim_arg, default_value_t = 3)]
        max_d: usize,
    },
}

fn resource_label(spec: &ResourceSpec) -> String {
    match spec {
        ResourceSpec::Schmidt(c) => {
            let parts: Vec<String> = c.iter().map(|x| format!("{x:.6}")).collect();
            format!("schmidt:{}", parts.join(","))
        }
        other => other.to_string(),
    }
}

fn load_resource(text: &str, d: usize) -> Result<(crate::tensor::StateVector, String)> {
    let spec = ResourceSpec::parse(text, d)?;
    Ok((resource_state(&spec)?, resource_label(&spec)))
}

/// Report of a subcommand plus the lines printed before it.
struct Outcome {
    report: Report,
    lines: Vec<String>,
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.global.tolerances();
    let mut lines = Vec::new();
    let report = match &cli.command {
        Command::Bell { d, m, n, out } => {
            let state = bell_state(BellIndex::new(*d, *m, *n)?);
            match out {
                Some(path) => {
                    write_state_file(path, &state)?;
                    lines.push(format!("wrote |φ_{{{m},{n}}}⟩ (d={d}) to {}", path.display()));
                }
                None => lines.push(state_to_json(&state)?),
            }
            Report::new()
        }
        Command::Basis { d } => basis_checks(*d, &tol)?,
        Command::Teleport { d, resource, input, inputs } => {
            let (res, label) = load_resource(resource, *d)?;
            let chis = match input {
                Some(path) => vec![read_state_file(path)?.into_state()?.relabeled(&["C"])?],
                None => haar_inputs(*d, *inputs, cli.global.seed)?,
            };
            teleport_checks(*d, &res, &chis, &tol, &label)?
        }
        Command::Discriminate { d, select, resource, shots } => {
            let (res, label) = load_resource(resource, *d)?;
            let hidden = select.indices(*d)?;
            if let Some(shots) = shots {
                for (k, h) in hidden.iter().enumerate() {
                    let dist = discriminate(*h, &res)?.distribution();
                    let counts = sample_outcomes(&dist, *shots, cli.global.seed.wrapping_add(k as u64))?;
                    let parts: Vec<String> = counts.iter().map(|(i, c)| format!("{i}:{c}")).collect();
                    lines.push(format!("sampled hidden={h} shots={shots} -> {}", parts.join(" ")));
                }
            }
            discrimination_checks(*d, &hidden, &res, &tol, &label)?
        }
        Command::Rho { d, resource, check, out } => {
            if *d > RHO_MAX_D {
                return Err(Error::UnsupportedDimension(*d));
            }
            let which: RhoCheck = check.parse()?;
            let (psi, label) = load_resource(resource, *d)?;
            if let Some(path) = out {
                write_density_file(path, &build_rho(*d, &psi)?)?;
                lines.push(format!("wrote ρ (d={d}, ψ={label}) to {}", path.display()));
            }
            rho_checks(*d, &psi, &label, which, &tol)?
        }
        Command::Distill { d, select, resource } => {
            let (psi, label) = load_resource(resource, *d)?;
            distill_checks(*d, &select.indices(*d)?, &psi, &label, &tol)?
        }
        Command::Verify { suite, max_d } => {
            let config = SuiteConfig {
                suites: Suite::parse_list(suite)?,
                max_d: *max_d,
                seed: cli.global.seed,
                tolerances: tol,
            };
            run_suite(&config)?
        }
    };
    lines.extend(report.human_lines());
    Ok(Outcome { report, lines })
}

/// Runs the CLI on `args` (including the program name), writing the human
/// summary to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    for line in &outcome.lines {
        let _ = writeln!(out, "{line}");
    }
    let s = &outcome.report.summary;
    if !outcome.report.checks.is_empty() {
        let _ = writeln!(
            out,
            "{} checks: {} passed, {} failed, {} informational",
            s.total, s.passed, s.failed, s.informational
        );
    }
    if let Some(path) = &cli.global.report {
        if let Err(e) = outcome.report.write(path) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    if outcome.report.all_pass() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
