use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cshd_core::experiment::{exit_code, run_approx, run_limit_study, run_sweep, RunConfig, EXIT_REPRODUCTION_FAILED};
use cshd_core::reproduce::{reproduce, Target};
use cshd_core::{Error, Format};

/// Centered simplex gradients and Hessian diagonals from function values.
#[derive(Parser, Debug)]
#[command(name = "cshd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Approximate the gradient and Hessian diagonal at one point and step size.
    Approx(RunArgs),
    /// Repeat the approximation over a geometric grid of step sizes.
    Sweep(RunArgs),
    /// Estimate the small-h limit and the infimum of the relative error.
    LimitStudy(RunArgs),
    /// Re-run a published experiment and compare against its reference values.
    Reproduce {
        /// table1, table2, table3 or example41
        target: String,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Registry function (rosenbrock2, expprod3).
    #[arg(long)]
    function: Option<String>,
    /// Comma-separated coordinates, or a named point such as x1.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Direction set: cb, rb, cmpb, rmpb or custom:PATH. A custom file holds
    /// `n k` then n rows of k numbers; entries below 1e-14 times the set
    /// radius count as zero when testing for a lonely matrix.
    #[arg(long)]
    set: Option<String>,
    /// Step size scaling the direction set.
    #[arg(long)]
    h: Option<f64>,
    /// Geometric grid START:STOP:FACTOR.
    #[arg(long)]
    h_grid: Option<String>,
    /// Known f(x0); saves one evaluation.
    #[arg(long, allow_hyphen_values = true)]
    f0: Option<f64>,
    /// Also evaluate the a-priori error bound.
    #[arg(long)]
    with_bound: bool,
    /// csv (default) or md.
    #[arg(long)]
    format: Option<String>,
    /// Write output to this file instead of standard output.
    #[arg(long)]
    out: Option<String>,
    /// `key = value` file supplying any of the options above.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, Error> {
        let flags = RunConfig {
            function: self.function,
            point: self.point,
            set: self.set,
            h: self.h,
            h_grid: self.h_grid,
            f0: self.f0,
            with_bound: self.with_bound,
            format: self.format.as_deref().map(str::parse).transpose()?,
            out: self.out,
        };
        match self.config {
            Some(path) => Ok(flags.or(RunConfig::load(path)?)),
            None => Ok(flags),
        }
    }
}

fn emit(text: &str, out: Option<&str>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: PathBuf::from(path),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Approx(args) => {
            let cfg = args.resolve()?;
            let func = cfg.function()?;
            let x0 = cfg.point(func)?;
            let outcome = run_approx(func, &x0, &cfg.set()?, cfg.h()?, cfg.f0, cfg.with_bound)?;
            emit(&outcome.render(cfg.format()), cfg.out.as_deref())?;
        }
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            let func = cfg.function()?;
            let x0 = cfg.point(func)?;
            let hs = cfg.h_grid()?.values();
            let sweep = run_sweep(func, &x0, &cfg.set()?, &hs, cfg.f0, cfg.with_bound, cfg.format())?;
            emit(&sweep.render(), cfg.out.as_deref())?;
        }
        Command::LimitStudy(args) => {
            let cfg = args.resolve()?;
            let func = cfg.function()?;
            let x0 = cfg.point(func)?;
            let set = cfg.set()?;
            let study = run_limit_study(func, &x0, &set)?;
            emit(&study.render(func.name, &x0, &set, cfg.format()), cfg.out.as_deref())?;
        }
        Command::Reproduce { target, format, out } => {
            let target: Target = target.parse()?;
            let format: Format = format.as_deref().map(str::parse).transpose()?.unwrap_or_default();
            let result = reproduce(target)?;
            emit(&result.render(format), out.as_ref().and_then(|p| p.to_str()))?;
            if !result.passed() {
                return Ok(EXIT_REPRODUCTION_FAILED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
