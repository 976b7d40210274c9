use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use capwave::runner::{
    dispersion_campaign, gain_campaign, load_config, operators_campaign, output_root, report, run, DispersionSetup,
    OperatorsConfig, RunManifest,
};

/// Capillary water-wave solver and diagnostics.
///
/// Outputs go under $CAPWAVE_OUTPUT_ROOT (default ./capwave-output).
/// Exit status: 0 all checks pass, 1 a check failed or a run aborted,
/// 2 usage or configuration error.
#[derive(Parser)]
#[command(name = "capwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a TOML run configuration.
    Run { config: PathBuf },
    /// Tabulate checks from manifests (files or run directories).
    Report {
        manifests: Vec<PathBuf>,
        /// Where to write the JSON summary [default: <root>/report.json].
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Measure standing-wave frequencies of modes 1..=kmax.
    Dispersion {
        #[arg(long)]
        kmax: u32,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 1e-5)]
        amplitude: f64,
    },
    /// Operator oracles and bound checks.
    OperatorsTest {
        #[arg(long)]
        seed: u64,
        /// Bound checks use seeds 1..=bound-seeds.
        #[arg(long, default_value_t = 100)]
        bound_seeds: u64,
    },
    /// Refinement study of the weighted gain norm of order k.
    Gain {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        k: u32,
        #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096")]
        ns: Vec<usize>,
    },
}

fn summarize(manifests: &[RunManifest]) -> ExitCode {
    let mut ok = true;
    for m in manifests {
        println!("{} termination: {}", m.kind, m.termination.reason.as_str());
        for c in &m.checks {
            let measured = c.measured.map_or_else(|| "non-finite".into(), |v| format!("{v:.3e}"));
            println!(
                "  {} {}: {} (tolerance {:.3e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                measured,
                c.tolerance
            );
        }
        ok &= m.passed();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = output_root();
    let outcome = match cli.command {
        Command::Run { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            run(&cfg).map(|m| summarize(&[m]))
        }
        Command::Report { manifests, json } => match report(&manifests) {
            Ok(r) => {
                print!("{}", r.to_text());
                let path = json.unwrap_or_else(|| root.join("report.json"));
                let written = path
                    .parent()
                    .map_or(Ok(()), std::fs::create_dir_all)
                    .and_then(|_| std::fs::write(&path, serde_json::to_string_pretty(&r).expect("report serializes")));
                match written {
                    Ok(()) => Ok(if r.pass { ExitCode::SUCCESS } else { ExitCode::from(1) }),
                    Err(e) => Err(e.into()),
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        Command::Dispersion { kmax, n, amplitude } => {
            let setup = DispersionSetup {
                n,
                amplitude,
                ..Default::default()
            };
            dispersion_campaign(kmax, setup, &root.join("dispersion")).map(|ms| {
                for m in &ms {
                    if let Some(d) = m.results.get("dispersion") {
                        println!("{d}");
                    }
                }
                summarize(&ms)
            })
        }
        Command::OperatorsTest { seed, bound_seeds } => {
            let cfg = OperatorsConfig {
                bound_seeds,
                ..Default::default()
            };
            operators_campaign(seed, &cfg, &root.join(format!("operators-test/seed{seed}"))).map(|m| summarize(&[m]))
        }
        Command::Gain { k, ns } => gain_campaign(k, &ns, &root.join(format!("gain/k{k}"))).map(|m| summarize(&[m])),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}
