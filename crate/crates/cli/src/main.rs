use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swlab::runner::{self, ExperimentConfig, ExperimentReport, Suite};

#[derive(Parser)]
#[command(name = "swlab", version, about = "Finite-N Schur-Weyl duality laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        experiment: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
        /// Output directory; defaults to $SWLAB_OUT_DIR, then ./swlab-out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tolerance override, `check=value`; may be repeated.
        #[arg(long = "tol", value_parser = parse_tol)]
        tolerances: Vec<(String, f64)>,
    },
    /// Run a whole suite.
    RunAll {
        #[arg(long, default_value = "smoke", value_parser = ["smoke", "full"])]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered experiments.
    List,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected check=value")?;
    let value: f64 = value.parse().map_err(|e| format!("bad tolerance `{value}`: {e}"))?;
    Ok((name.to_string(), value))
}

fn print_report(report: &ExperimentReport) {
    let c = &report.config;
    println!(
        "{} {} (N={}, p={}, q={}, seed={}, samples={}) in {:.2}s",
        if report.pass { "PASS" } else { "FAIL" },
        c.experiment,
        c.n,
        c.p,
        c.q,
        c.seed,
        c.samples,
        report.duration_seconds
    );
    for check in &report.checks {
        println!(
            "  {} {:<44} measured {:<12.6e} predicted {:<12.6e} tol {:.1e}",
            if check.pass { "ok  " } else { "FAIL" },
            check.name,
            check.measured,
            check.predicted,
            check.tolerance
        );
    }
    for (name, value) in &report.observations {
        println!("  obs  {name:<44} {value}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> swlab::Result<bool> {
    match command {
        Command::List => {
            for spec in runner::registry() {
                let d = spec.defaults;
                println!(
                    "{:<18} N={} p={} q={} samples={:<6} {}",
                    spec.name, d.n, d.p, d.q, d.samples, spec.description
                );
            }
            Ok(true)
        }
        Command::Run { experiment, n, p, q, seed, samples, out, tolerances } => {
            let mut config = ExperimentConfig::new(&experiment)?;
            let (dn, dp, dq) = (config.n, config.p, config.q);
            config = config.with_size(n.unwrap_or(dn), p.unwrap_or(dp), q.unwrap_or(dq)).with_seed(seed);
            if let Some(s) = samples {
                config = config.with_samples(s);
            }
            for (name, value) in tolerances {
                config = config.with_tolerance(&name, value);
            }
            let dir = runner::resolve_out_dir(out.as_deref());
            config = config.with_out(&dir);
            let report = runner::run(&config)?;
            let path = runner::emit(&report, &dir)?;
            print_report(&report);
            println!("report: {}", path.display());
            Ok(report.pass)
        }
        Command::RunAll { suite, seed, out } => {
            let suite: Suite = suite.parse()?;
            let dir = runner::resolve_out_dir(out.as_deref());
            let summary = runner::run_all(suite, seed, Some(&dir))?;
            for report in &summary.reports {
                print_report(report);
            }
            for failure in &summary.failures {
                println!(
                    "ERROR {} (N={}, p={}, q={}): {}",
                    failure.experiment, failure.config.n, failure.config.p, failure.config.q, failure.error
                );
            }
            let passed = summary.reports.iter().filter(|r| r.pass).count();
            println!(
                "{}: {passed}/{} experiments passed, {} errors; output in {}",
                if summary.pass { "PASS" } else { "FAIL" },
                summary.reports.len(),
                summary.failures.len(),
                dir.display()
            );
            Ok(summary.pass)
        }
    }
}
