//! Argument parsing and the exit-code contract: 0 when every check passes,
//! 1 when a check fails, 2 on configuration or runtime errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{run, Command};
use crate::config::RunConfig;
use crate::report::Report;

/// Environment variable naming a directory that receives `<command>.json`
/// and `<command>.txt` for every run.
pub const REPORT_DIR_ENV: &str = "HDSECTOR_REPORT_DIR";

#[derive(Debug, Parser)]
#[command(name = "hdsector", version, about = "Reduced Hamiltonian sector of L = qd^2/2 - w^2 q^2/2 - g V(q, qd, qdd)")]
pub struct Cli {
    /// TOML configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Oscillator frequency used by numeric stages.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Power of q in V.
    #[arg(long)]
    pub k: Option<u32>,
    /// Power of qd in V.
    #[arg(long)]
    pub l: Option<u32>,
    /// Power of qdd in V.
    #[arg(long)]
    pub m: Option<u32>,
    /// Truncation order N in g.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Solve for qdd = f(q, qd) on the constraint surface.
    SolveF(ModelArgs),
    /// Reduced momenta, symplectic factor, Dirac bracket and Hamiltonian.
    Reduce(ModelArgs),
    /// Normal-form transformation under a gauge policy.
    Darboux {
        #[command(flatten)]
        model: ModelArgs,
        /// minimal, parity or beta=<rational>.
        #[arg(long)]
        gauge: Option<String>,
    },
    /// Energies through g^2 with a Fock-basis cross-check.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        gauge: Option<String>,
        /// Member of the beta family for V = q qdd^2; `none` uses the model's normal form.
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        basis: Option<usize>,
        #[arg(long)]
        hbar: Option<f64>,
        /// Allowed ground-state gap and basis-convergence change.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Numeric scaling study over two couplings.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        gauge: Option<String>,
        /// Two couplings, comma separated.
        #[arg(long, value_delimiter = ',')]
        couplings: Option<Vec<f64>>,
        /// Truncation orders, comma separated.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Integrator tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        q0: Option<f64>,
        #[arg(long)]
        qdot0: Option<f64>,
        #[arg(long)]
        drift_bound: Option<f64>,
    },
    /// Compare against the published coefficient tables and spectra.
    ReproducePaper,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl ModelArgs {
    fn apply(self, c: &mut RunConfig) {
        let touched = self.k.is_some() || self.l.is_some() || self.m.is_some();
        set(&mut c.model.k, self.k);
        set(&mut c.model.l, self.l);
        set(&mut c.model.m, self.m);
        set(&mut c.model.order, self.order);
        if touched {
            c.model.terms.clear();
        }
    }
}

impl Cli {
    /// Merge flags into `base` and return the command to run.
    pub fn merge(self, mut c: RunConfig) -> (Command, RunConfig) {
        set(&mut c.numeric.omega, self.omega);
        let cmd = match self.command {
            Sub::SolveF(m) => {
                m.apply(&mut c);
                Command::SolveF
            }
            Sub::Reduce(m) => {
                m.apply(&mut c);
                Command::Reduce
            }
            Sub::Darboux { model, gauge } => {
                model.apply(&mut c);
                set(&mut c.model.gauge, gauge);
                Command::Darboux
            }
            Sub::Spectrum { model, gauge, beta, g, levels, basis, hbar, tol } => {
                model.apply(&mut c);
                set(&mut c.model.gauge, gauge);
                if let Some(b) = beta {
                    c.spectrum.beta = (b != "none").then_some(b);
                }
                set(&mut c.spectrum.g, g);
                set(&mut c.spectrum.levels, levels);
                set(&mut c.spectrum.basis, basis);
                set(&mut c.spectrum.hbar, hbar);
                set(&mut c.spectrum.tol, tol);
                Command::Spectrum
            }
            Sub::Verify { model, gauge, couplings, orders, horizon, tol, dt, q0, qdot0, drift_bound } => {
                model.apply(&mut c);
                set(&mut c.model.gauge, gauge);
                let n = &mut c.numeric;
                set(&mut n.couplings, couplings);
                set(&mut n.orders, orders);
                set(&mut n.horizon, horizon);
                set(&mut n.tol, tol);
                set(&mut n.dt, dt);
                set(&mut n.q0, q0);
                set(&mut n.qdot0, qdot0);
                set(&mut n.drift_bound, drift_bound);
                Command::Verify
            }
            Sub::ReproducePaper => Command::ReproducePaper,
        };
        (cmd, c)
    }
}

fn write_reports(dir: &Path, r: &Report) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{}.json", r.command)), r.to_json())?;
    std::fs::write(dir.join(format!("{}.txt", r.command)), r.to_text())
}

pub fn exit_code(r: &Report) -> i32 {
    if r.error.is_some() {
        2
    } else if r.passed {
        0
    } else {
        1
    }
}

/// Run a parsed command line; returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let base = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(err, "error: {e:#}");
                return 2;
            }
        },
        None => RunConfig::default(),
    };
    let format = cli.format;
    let (cmd, cfg) = cli.merge(base);
    let validated = match cfg.validate() {
        Ok(v) => v,
        Err(e) => {
            let _ = write!(err, "{e}");
            return 2;
        }
    };
    let report = run(cmd, &cfg, &validated);
    let text = match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    let _ = out.write_all(text.as_bytes());
    if let Some(dir) = std::env::var_os(REPORT_DIR_ENV) {
        if let Err(e) = write_reports(Path::new(&dir), &report) {
            let _ = writeln!(err, "error: cannot write reports to {}: {e}", Path::new(&dir).display());
            return 2;
        }
    }
    exit_code(&report)
}
