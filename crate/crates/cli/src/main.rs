//! `dunkl`: runs the verification suites and square function evaluations.
//!
//! Exit status: 0 when every check passes, 1 when a check fails (failures are
//! written to stderr as JSON), 2 for usage, configuration and I/O errors.

mod eval;
mod output;
mod run;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dunkl_core::report::VerificationReport;

use settings::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "dunkl",
    version,
    about = "Dunkl harmonic oscillator semigroups, square functions and kernel audits"
)]
struct Cli {
    /// `key = value` settings file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory [default: dunkl-out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<String>,
    #[command(flatten)]
    flags: RunFlags,
    #[command(subcommand)]
    command: Command,
}

/// Run settings. Lists are comma-separated; each subcommand reads only the
/// settings it needs and rejects the other flags.
#[derive(Args, Debug)]
struct RunFlags {
    /// Dimensions (a single dimension for cz-audit and squarefn eval).
    #[arg(long, global = true, value_name = "LIST")]
    d: Option<String>,
    /// Multiplicities.
    #[arg(long, global = true, value_name = "LIST")]
    alpha: Option<String>,
    /// Parity vectors as 0/1 strings (`01,10`), or `all`; `full` selects the full space in squarefn eval.
    #[arg(long, global = true, value_name = "LIST")]
    eps: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<String>,
    /// Number of random test functions.
    #[arg(long, global = true, value_name = "N")]
    functions: Option<String>,
    /// Hermite modes per random function.
    #[arg(long, global = true, value_name = "N")]
    modes: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    max_degree: Option<String>,
    /// Tolerance override.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<String>,
    /// Truncation order of the kernel series.
    #[arg(long, global = true, value_name = "N")]
    series_order: Option<String>,
    /// Dyadic grid levels of the kernel audit.
    #[arg(long, global = true, value_name = "N")]
    levels: Option<String>,
    /// Cone aperture.
    #[arg(long, global = true, value_name = "X")]
    beta: Option<String>,
    /// Kernel families such as `gV`, `gH:1`, `SH*:2`, `SV_T`, `SH_Ttilde:1,2`.
    #[arg(long, global = true, value_name = "LIST")]
    family: Option<String>,
    /// Smoothness exponent override.
    #[arg(long, global = true, value_name = "X")]
    delta: Option<String>,
    /// Square function: `gV`, `gH:j`, `gH*:j`, `SV`, `SH:j`, `SH*:j`.
    #[arg(long, global = true, value_name = "NAME")]
    kind: Option<String>,
    /// `heat` or `poisson`.
    #[arg(long, global = true, value_name = "NAME")]
    semigroup: Option<String>,
    /// Exponents.
    #[arg(long, global = true, value_name = "LIST")]
    p: Option<String>,
    /// Powers of the radial weights `|x|^gamma`.
    #[arg(long, global = true, value_name = "LIST")]
    gamma: Option<String>,
    /// Hermite expansion as `m=c` terms separated by `;`, e.g. `0,2=1;1,1=-0.5`.
    #[arg(long, global = true, value_name = "TERMS")]
    terms: Option<String>,
    /// First diagonal parameter `s` of the evaluation line.
    #[arg(long, global = true, value_name = "X")]
    from: Option<String>,
    /// Last diagonal parameter `s` of the evaluation line.
    #[arg(long, global = true, value_name = "X")]
    to: Option<String>,
    /// Number of evaluation points.
    #[arg(long, global = true, value_name = "N")]
    points: Option<String>,
    /// Suite checked by `determinism`.
    #[arg(long, global = true, value_name = "NAME")]
    suite: Option<String>,
}

impl RunFlags {
    fn pairs(&self) -> [(&'static str, Option<&String>); 22] {
        [
            ("d", self.d.as_ref()),
            ("alpha", self.alpha.as_ref()),
            ("eps", self.eps.as_ref()),
            ("seed", self.seed.as_ref()),
            ("functions", self.functions.as_ref()),
            ("modes", self.modes.as_ref()),
            ("max-degree", self.max_degree.as_ref()),
            ("tol", self.tol.as_ref()),
            ("series-order", self.series_order.as_ref()),
            ("levels", self.levels.as_ref()),
            ("beta", self.beta.as_ref()),
            ("family", self.family.as_ref()),
            ("delta", self.delta.as_ref()),
            ("kind", self.kind.as_ref()),
            ("semigroup", self.semigroup.as_ref()),
            ("p", self.p.as_ref()),
            ("gamma", self.gamma.as_ref()),
            ("terms", self.terms.as_ref()),
            ("from", self.from.as_ref()),
            ("to", self.to.as_ref()),
            ("points", self.points.as_ref()),
            ("suite", self.suite.as_ref()),
        ]
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Orthonormality of the generalized Hermite functions.
    Ortho,
    /// Ladder relations and the factorization of the oscillator.
    Ladder,
    /// Semigroup laws, contractivity, kernel composition and subordination.
    Semigroup,
    /// Heat kernel: truncated series and integral representation against the Bessel form.
    KernelXcheck,
    /// L^2 identity for the vertical g-function.
    GvIdentity,
    /// Comparability of the vertical area integral and g-function.
    Comparability,
    /// Pointwise reduction of area integrals to g-functions.
    Reduce,
    /// Grid stability of empirical weighted L^p and weak-(1,1) constants (d = 1).
    LpStability,
    /// Empirical A_p constants of radial power weights.
    Ap,
    /// Growth and smoothness audits of square function kernels.
    CzAudit,
    /// Square function evaluation.
    Squarefn {
        #[command(subcommand)]
        action: SquarefnCommand,
    },
    /// Reruns a suite single-threaded and in parallel and compares the reports.
    Determinism,
}

#[derive(Subcommand, Debug)]
enum SquarefnCommand {
    /// Values along the diagonal, written as CSV, SVG and JSON.
    Eval,
}

fn suite_name(c: &Command) -> Option<&'static str> {
    Some(match c {
        Command::Ortho => "ortho",
        Command::Ladder => "ladder",
        Command::Semigroup => "semigroup",
        Command::KernelXcheck => "kernel-xcheck",
        Command::GvIdentity => "gv-identity",
        Command::Comparability => "comparability",
        Command::Reduce => "reduce",
        Command::LpStability => "lp-stability",
        Command::Ap => "ap",
        Command::CzAudit => "cz-audit",
        Command::Squarefn { .. } | Command::Determinism => return None,
    })
}

fn finish(report: &VerificationReport, out: &std::path::Path) -> Result<bool> {
    output::write_report(out, report)?;
    output::print_summary(report);
    if !report.pass {
        eprintln!("{}", output::failure_detail(report)?);
    }
    Ok(report.pass)
}

fn execute(cli: Cli) -> Result<bool> {
    let mut s = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    s.overlay(
        cli.flags
            .pairs()
            .into_iter()
            .chain([("out", cli.out.as_ref()), ("threads", cli.threads.as_ref())]),
    );
    if let Some(n) = s.get::<usize>("threads")? {
        if n == 0 {
            bail!("threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out = PathBuf::from(s.raw("out").unwrap_or("dunkl-out"));
    match &cli.command {
        Command::Squarefn {
            action: SquarefnCommand::Eval,
        } => {
            let plan = eval::Plan::from_settings(&s)?;
            s.reject_unused_flags("squarefn eval")?;
            let hash = plan.run(&out)?;
            println!("wrote {} (config {})", out.display(), &hash[..12]);
            Ok(true)
        }
        Command::Determinism => {
            let Some(name) = s.raw("suite").map(str::to_string) else {
                bail!(
                    "determinism needs --suite (one of {})",
                    run::SUITES.join(", ")
                );
            };
            let runner = run::build(&name, &s)?;
            s.reject_unused_flags("determinism")?;
            let report = dunkl_core::suites::determinism(&name, runner)?;
            finish(&report, &out)
        }
        command => {
            let name = suite_name(command).expect("suite subcommand");
            let runner = run::build(name, &s)?;
            s.reject_unused_flags(name)?;
            finish(&runner()?, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
