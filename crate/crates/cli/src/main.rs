use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coview_core::sim::{replay_transcript, run_scenario_with_transcript, LatencyModel, ScenarioConfig, ScenarioReport};

#[derive(Debug, Parser)]
#[command(name = "coview", version, about = "Simulate and replay shared mesh viewing sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a seeded multi-peer session on a virtual clock.
    Simulate {
        #[arg(long, default_value_t = 5)]
        peers: usize,
        #[arg(long, default_value_t = 1000)]
        messages: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-link latency range in ms, `min:max`.
        #[arg(long, default_value = "0:0", value_parser = parse_latency)]
        latency: (u64, u64),
        /// Let relay-to-client frames overtake each other.
        #[arg(long)]
        reorder: bool,
        /// Chance that a relay-to-client frame is delivered twice.
        #[arg(long, default_value_t = 0.0)]
        dup_prob: f64,
        /// Write the report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the relay's sequenced envelopes here, one per line.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Fold a recorded envelope stream into a fresh replica.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

fn parse_latency(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected min:max")?;
    let min = a.trim().parse::<u64>().map_err(|e| format!("min: {e}"))?;
    let max = b.trim().parse::<u64>().map_err(|e| format!("max: {e}"))?;
    if min > max {
        return Err("min must not exceed max".into());
    }
    Ok((min, max))
}

fn write_report(path: &PathBuf, report: &ScenarioReport) -> Result<(), String> {
    let mut json = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    json.push('\n');
    std::fs::write(path, json).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Simulate {
            peers,
            messages,
            seed,
            latency: (min_ms, max_ms),
            reorder,
            dup_prob,
            report,
            transcript,
        } => {
            let config = ScenarioConfig {
                peer_count: peers,
                message_count: messages,
                seed,
                latency: LatencyModel {
                    min_ms,
                    max_ms,
                    reorder,
                    duplicate_prob: dup_prob,
                },
                ..ScenarioConfig::default()
            };
            let (r, lines) = run_scenario_with_transcript(&config).map_err(|e| e.to_string())?;
            println!("{r}");
            if let Some(path) = report {
                write_report(&path, &r)?;
            }
            if let Some(path) = transcript {
                let mut text = lines.join("\n");
                text.push('\n');
                std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            Ok(r.converged(1e-9))
        }
        Command::Replay { transcript, json } => {
            let r = replay_transcript(&transcript).map_err(|e| e.to_string())?;
            if json {
                println!("{}", serde_json::to_string(&r).map_err(|e| e.to_string())?);
            } else {
                println!("{r}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("replicas did not converge");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
