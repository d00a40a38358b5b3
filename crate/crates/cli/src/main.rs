//! `sdfkit` command-line driver.

mod output;
mod report;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sdfkit::Exec;

#[derive(Parser)]
#[command(name = "sdfkit", version, about = "Pricing-kernel lattices, bond curves, information filtering and monetary economies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write every output file.
    Simulate(Common),
    /// Run a scenario and write only the invariant report.
    Verify(Common),
    /// Print the discount curve at one index.
    Curve {
        #[command(flatten)]
        common: Common,
        /// Time index of the curve.
        #[arg(long, default_value_t = 0)]
        at_index: usize,
        /// Node at that index; the probability-weighted mean curve when omitted.
        #[arg(long)]
        node: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override `name=value`; may be repeated.
    #[arg(long = "tol-override", value_name = "NAME=VALUE")]
    tol_override: Vec<String>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn execute(c: &Common) -> Result<run::Outputs> {
    let sc = scenario::load(&c.scenario)?;
    let mut tol = sc.tolerances;
    for o in &c.tol_override {
        let (name, value) = o.split_once('=').ok_or_else(|| anyhow!("tolerance override {o:?} is not name=value"))?;
        let v: f64 = value.trim().parse().with_context(|| format!("tolerance override {o:?}"))?;
        tol.set(name.trim(), v)?;
    }
    let exec = if c.sequential { Exec::Sequential } else { Exec::Parallel };
    let start = Instant::now();
    let out = run::run(&sc, c.seed.unwrap_or(sc.seed), c.paths.unwrap_or(sc.paths), tol, exec)?;
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    Ok(out)
}

fn summarize(out: &run::Outputs) {
    for c in &out.report.invariants {
        println!("[{}] {} max_deviation={:e} tolerance={:e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.max_deviation, c.tolerance);
    }
    for t in &out.report.tails {
        let bound = t.bound.map_or("none".to_string(), |b| b.to_string());
        println!("[{}] tail {} value={:e} bound={}", if t.exceeded { "FAIL" } else { "PASS" }, t.name, t.value, bound);
    }
}

fn real_main() -> Result<bool> {
    match Cli::parse().command {
        Command::Simulate(c) => {
            let out = execute(&c)?;
            let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
            output::write_all(&out, &dir)?;
            summarize(&out);
            Ok(out.report.passed)
        }
        Command::Verify(c) => {
            let out = execute(&c)?;
            if let Some(dir) = &c.out {
                output::write_report(&out, dir)?;
            }
            summarize(&out);
            Ok(out.report.passed)
        }
        Command::Curve { common, at_index, node } => {
            let out = execute(&common)?;
            let surface = out.surface.as_ref().context("this scenario has no bond surface")?;
            let quotes = match node {
                Some(n) => surface.curve_at(at_index, n)?,
                None => surface.mean_curve(at_index)?,
            };
            if quotes.is_empty() {
                bail!("no maturities after index {at_index}");
            }
            let grid = surface.space().grid();
            let mut text = String::from("j,t,P,R\n");
            for q in &quotes {
                text.push_str(&format!("{},{},{},{}\n", q.j, grid.time(q.j), q.price, q.rate));
            }
            print!("{text}");
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("curve.csv"), &text)?;
            }
            Ok(out.report.passed)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
