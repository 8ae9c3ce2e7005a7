//! Command-line front end: single runs, campaigns, report regeneration, and
//! predictor training. Exit codes: 0 success, 2 configuration error, 3 I/O
//! error.

use adasim::campaign::{
    aggregate, expand_grid, parse_runs_csv, run_campaign, write_reports, CampaignConfig,
    ReportFormat,
};
use adasim::error::SimError;
use adasim::mitigation::{predictor_train, Predictor, Trace};
use adasim::perception::{FaultKind, FaultSpec};
use adasim::runner::{
    generate_training_traces, run_single, run_single_scenario, RunParams, RunSpec,
};
use adasim::safety::InterventionConfig;
use adasim::scenario::ScenarioId;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "sim",
    about = "Closed-loop ADAS resilience simulator: perception-fault attacks vs. layered safety interventions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one run and print its outcome and metrics.
    Run {
        /// Scenario S1..S6 (built-in script).
        #[arg(long, required_unless_present = "scenario_file")]
        scenario: Option<ScenarioId>,
        /// Scenario TOML file; overrides --scenario and --gap.
        #[arg(long)]
        scenario_file: Option<PathBuf>,
        /// Initial bumper-to-bumper gap to the lead (m).
        #[arg(long, default_value_t = 60.0)]
        gap: f64,
        /// Fault kind: rd, curvature, or mixed. Omit for fault-free.
        #[arg(long)]
        fault: Option<FaultKind>,
        /// Comma-separated layers: driver,check,aeb-comp,aeb-indep,ml or none.
        #[arg(long, default_value = "none")]
        interventions: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Road friction factor in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        friction: f64,
        /// Driver reaction time (s); defaults to 2.5.
        #[arg(long)]
        t_react: Option<f64>,
        /// Predictor model file (required when interventions include ml).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Write the per-step event log CSV to this file.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Expand a campaign config, run every cell, and write reports.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
    },
    /// Re-aggregate a results directory and rewrite the summary files.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
    /// Train the actuation predictor on fault-free traces.
    TrainPredictor {
        /// Directory of trace CSV files; omitted to generate traces by
        /// running the six scenarios fault-free in-process.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fault-free runs per scenario when generating traces.
        #[arg(long, default_value_t = 2)]
        reps: usize,
        /// Ridge regularization strength.
        #[arg(long, default_value_t = 1e-6)]
        ridge: f64,
    },
}

fn load_model(path: &Path) -> Result<Predictor, SimError> {
    Predictor::load(path)
}

fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Run {
            scenario,
            scenario_file,
            gap,
            fault,
            interventions,
            seed,
            friction,
            t_react,
            model,
            events,
        } => {
            let custom = scenario_file
                .as_deref()
                .map(adasim::scenario::ScenarioSpec::load)
                .transpose()?;
            let id = match (&custom, scenario) {
                (Some(s), _) => s.id,
                (None, Some(id)) => id,
                (None, None) => unreachable!("clap enforces one of the two"),
            };
            let mut spec = RunSpec::new(id, gap);
            spec.fault = fault.map(FaultSpec::new);
            spec.interventions = InterventionConfig::parse_list(&interventions)?;
            if let Some(t) = t_react {
                spec.interventions.driver_t_react = t;
            }
            spec.seed = seed;
            spec.friction = friction;
            spec.keep_events = events.is_some();
            let predictor = model.as_deref().map(load_model).transpose()?;
            let params = RunParams::default();
            let result = match &custom {
                Some(s) => run_single_scenario(s, &spec, &params, predictor.as_ref())?,
                None => run_single(&spec, &params, predictor.as_ref())?,
            };
            if let Some(path) = events {
                let mut csv = String::from("step,t,signal,source,value\n");
                for e in &result.events {
                    csv.push_str(&format!(
                        "{},{:.2},{},{},{:.6}\n",
                        e.step, e.t, e.signal, e.source, e.value
                    ));
                }
                std::fs::write(&path, csv)
                    .map_err(|e| SimError::io(path.display().to_string(), e))?;
            }
            println!(
                "scenario {} fault {} interventions {} seed {}",
                result.scenario,
                result
                    .fault
                    .map(|f| f.to_string())
                    .unwrap_or_else(|| "none".into()),
                result.interventions.label(),
                result.seed
            );
            println!(
                "outcome {} after {} steps ({:.2} s)",
                result.outcome, result.steps, result.end_t
            );
            println!(
                "min TTC {:.3} s, hardest brake {:.0}%, min lane distance {:.3} m",
                result.min_ttc,
                100.0 * result.hardest_brake,
                result.min_lane_distance
            );
            for (name, rec) in [
                ("aeb", &result.aeb),
                ("driver-brake", &result.driver_brake),
                ("driver-steer", &result.driver_steer),
                ("ml", &result.ml),
            ] {
                if rec.fired {
                    let mit = rec
                        .mitigation_time
                        .map(|m| format!(", mitigation time {m:.2} s"))
                        .unwrap_or_default();
                    println!("trigger {name} at {:.2} s{mit}", rec.first_t.unwrap());
                }
            }
            Ok(())
        }
        Command::Campaign {
            config,
            out,
            format,
        } => {
            let cfg = CampaignConfig::load(&config)?;
            let predictor = match (&cfg.model_path, cfg.needs_model()) {
                (Some(path), _) => Some(load_model(Path::new(path))?),
                (None, true) => {
                    return Err(SimError::config(
                        "campaign uses ML mitigation but sets no model path",
                    ))
                }
                (None, false) => None,
            };
            let specs = expand_grid(&cfg)?;
            eprintln!("running {} simulations...", specs.len());
            let results = run_campaign(&specs, &cfg.params, predictor.as_ref())?;
            let summary = aggregate(&results)?;
            let files = write_reports(&summary, &results, &out, format)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Report { input, format } => {
            let runs_path = input.join("runs.csv");
            let text = std::fs::read_to_string(&runs_path)
                .map_err(|e| SimError::io(runs_path.display().to_string(), e))?;
            let results = parse_runs_csv(&text)?;
            let summary = aggregate(&results)?;
            let files = write_reports(&summary, &results, &input, format)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::TrainPredictor {
            traces,
            out,
            seed,
            reps,
            ridge,
        } => {
            let traces: Vec<Trace> = match traces {
                Some(dir) => {
                    let mut loaded = Vec::new();
                    let entries = std::fs::read_dir(&dir)
                        .map_err(|e| SimError::io(dir.display().to_string(), e))?;
                    let mut paths: Vec<PathBuf> =
                        entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
                    paths.sort();
                    for path in paths {
                        if path.extension().is_some_and(|e| e == "csv") {
                            let text = std::fs::read_to_string(&path)
                                .map_err(|e| SimError::io(path.display().to_string(), e))?;
                            loaded.push(Trace::from_csv_str(&text)?);
                        }
                    }
                    loaded
                }
                None => {
                    eprintln!("generating {} fault-free traces...", reps * 6);
                    generate_training_traces(reps, seed, &RunParams::default())?
                }
            };
            let trained = predictor_train(&traces, ridge, seed)?;
            trained.predictor.save(&out)?;
            println!(
                "trained on {} traces; held-out RMSE accel {:.4} m/s^2, curvature {:.6} 1/m",
                traces.len(),
                trained.rmse_accel,
                trained.rmse_curvature
            );
            println!("model written to {}", out.display());
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
