use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evsite_core::pipeline::{cmd_evaluate, cmd_export_map, cmd_recommend, cmd_synth, cmd_validate};
use evsite_core::Error;

/// Site EV charging stations from vehicle trips and geographic constraints.
///
/// Exit codes: 0 success, 1 invalid input or configuration, 2 internal error.
#[derive(Debug, Parser)]
#[command(name = "evsite", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and check every layer named in a run config; print counts.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the pipeline and write recommendations.geojson, stations.geojson,
    /// run_summary.json and run_timing.json.
    ///
    /// Config defaults: cleaning.max_speed_mps 60; demand.dwell_radius_m 100,
    /// dwell_min_s 600; constraints.base_eps_m 800, base_minpts 10,
    /// poi_near_m 200, route_near_m 100, eps_factor_poi 0.75,
    /// minpts_factor_poi 0.6, minpts_factor_route 0.8, flood_alt_m 5,
    /// minpts_factor_flood 1.5, ffdi_threshold 2, minpts_factor_fire 1.5,
    /// eps_min_m 100, eps_max_m 2000, minpts_min 2; recommend.poi_snap_m 300,
    /// route_snap_m 1000, min_sep_m 500, dedup true, corridor_span_m 10000;
    /// evaluate.align_m 1000, coverage_radius_m 3000.
    Recommend {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Recompute the pipeline and write evaluation.json and evaluation.txt.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Generate a seeded synthetic scenario (layers, config.json, manifest.json).
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render recommend outputs into one self-contained HTML map.
    ExportMap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Validate { config } => Ok(cmd_validate(&config)?.to_text()),
        Command::Recommend { config, out, threads } => {
            let s = cmd_recommend(&config, &out, threads)?;
            Ok(format!(
                "{} demand points, {} recommendations ({} fast, {} destination; {} before dedup) written to {}\n",
                s.demand_points,
                s.recommendations,
                s.recommended_fast,
                s.recommended_destination,
                s.recommendations_before_dedup,
                out.display()
            ))
        }
        Command::Evaluate { config, out, threads } => {
            let report = cmd_evaluate(&config, &out, threads)?;
            Ok(report.to_table())
        }
        Command::Synth { spec, out } => {
            let m = cmd_synth(&spec, &out)?;
            Ok(format!(
                "{} hotspots, {} trips, {} demand points written to {}\n",
                m.hotspots.len(),
                m.counts.trips,
                m.counts.demand_points,
                out.display()
            ))
        }
        Command::ExportMap { input, out } => {
            let n = cmd_export_map(&input, &out)?;
            Ok(format!("{n} markers written to {}\n", out.display()))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
