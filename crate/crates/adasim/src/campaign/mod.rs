//! Campaign execution: grid construction over faults × gaps × scenarios ×
//! repetitions, seeded deterministic parallel runs, and aggregation into
//! summary rows.

mod report;

pub use report::{
    fault_free_csv, parse_runs_csv, runs_csv, summary_csv, write_reports, ReportFormat,
};

use crate::error::{Result, SimError};
use crate::hazard::{finalize_metrics, Outcome, RunIdentity, RunLog, RunResult, TriggerRecord};
use crate::mitigation::Predictor;
use crate::perception::{FaultKind, FaultSpec};
use crate::runner::{run_single, RunParams, RunSpec};
use crate::safety::InterventionConfig;
use crate::scenario::ScenarioId;
use rayon::prelude::*;
use serde::Deserialize;
use std::str::FromStr;

/// Campaign definition, loadable from TOML.
#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub faults: Vec<FaultKind>,
    pub init_gaps: Vec<f64>,
    pub scenarios: Vec<ScenarioId>,
    pub repetitions: usize,
    /// Intervention rows run against the full fault grid.
    pub interventions: Vec<InterventionConfig>,
    /// Driver-only reaction-time sweep (curvature faults), empty to skip.
    pub reaction_times: Vec<f64>,
    /// Driver-only road-friction sweep (curvature faults), empty to skip.
    pub frictions: Vec<f64>,
    pub base_seed: u64,
    /// Also run the fault-free per-scenario baseline (20 seeded runs each).
    pub fault_free: bool,
    pub fault_free_repetitions: usize,
    pub model_path: Option<String>,
    pub params: RunParams,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            faults: FaultKind::ALL.to_vec(),
            init_gaps: vec![60.0, 230.0],
            scenarios: ScenarioId::ALL.to_vec(),
            repetitions: 10,
            interventions: vec![InterventionConfig::none()],
            reaction_times: Vec::new(),
            frictions: Vec::new(),
            base_seed: 1,
            fault_free: false,
            fault_free_repetitions: 20,
            model_path: None,
            params: RunParams::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RawCampaign {
    faults: Option<Vec<String>>,
    init_gaps: Option<Vec<f64>>,
    scenarios: Option<Vec<String>>,
    repetitions: Option<usize>,
    interventions: Option<Vec<String>>,
    reaction_times: Option<Vec<f64>>,
    frictions: Option<Vec<f64>>,
    base_seed: Option<u64>,
    fault_free: Option<bool>,
    fault_free_repetitions: Option<usize>,
    model: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(default)]
struct RawFile {
    campaign: RawCampaign,
    #[serde(flatten)]
    params: RunParams,
}

impl CampaignConfig {
    pub fn from_toml_str(text: &str) -> Result<CampaignConfig> {
        let raw: RawFile =
            toml::from_str(text).map_err(|e| SimError::config(format!("campaign TOML: {e}")))?;
        let mut cfg = CampaignConfig {
            params: raw.params,
            ..CampaignConfig::default()
        };
        let c = raw.campaign;
        if let Some(v) = c.faults {
            cfg.faults = v
                .iter()
                .map(|s| FaultKind::from_str(s))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = c.init_gaps {
            cfg.init_gaps = v;
        }
        if let Some(v) = c.scenarios {
            cfg.scenarios = v
                .iter()
                .map(|s| ScenarioId::from_str(s))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = c.repetitions {
            cfg.repetitions = v;
        }
        if let Some(v) = c.interventions {
            cfg.interventions = v
                .iter()
                .map(|s| InterventionConfig::parse_list(s))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = c.reaction_times {
            cfg.reaction_times = v;
        }
        if let Some(v) = c.frictions {
            cfg.frictions = v;
        }
        if let Some(v) = c.base_seed {
            cfg.base_seed = v;
        }
        if let Some(v) = c.fault_free {
            cfg.fault_free = v;
        }
        if let Some(v) = c.fault_free_repetitions {
            cfg.fault_free_repetitions = v;
        }
        cfg.model_path = c.model;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<CampaignConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.faults.is_empty()
            || self.init_gaps.is_empty()
            || self.scenarios.is_empty()
            || self.repetitions == 0
            || self.interventions.is_empty()
        {
            return Err(SimError::config(
                "campaign grid dimensions must all be non-empty",
            ));
        }
        Ok(())
    }

    /// Requires ML mitigation in any row or sweep.
    pub fn needs_model(&self) -> bool {
        self.interventions.iter().any(|i| i.ml)
    }
}

/// 64-bit FNV-1a over the grid-cell key, giving each cell a stable seed
/// offset independent of intervention row and sweep point (paired seeding).
fn stable_hash(key: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in key.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn cell_seed(base: u64, fault: &str, gap: f64, scenario: ScenarioId, rep: usize) -> u64 {
    base.wrapping_add(stable_hash(&format!("{fault}|{gap:.1}|{scenario}|{rep}")))
}

/// Deterministically enumerate every run in the campaign.
pub fn expand_grid(config: &CampaignConfig) -> Result<Vec<RunSpec>> {
    config.validate()?;
    let mut specs = Vec::new();

    if config.fault_free {
        // Baseline rows run with the firmware check only.
        let interventions = InterventionConfig {
            safety_check: true,
            ..InterventionConfig::none()
        };
        for &scenario in &config.scenarios {
            for rep in 0..config.fault_free_repetitions {
                let gap = config.init_gaps[rep % config.init_gaps.len()];
                let mut spec = RunSpec::new(scenario, gap);
                spec.interventions = interventions;
                spec.seed = cell_seed(config.base_seed, "faultfree", gap, scenario, rep);
                specs.push(spec);
            }
        }
    }

    for &interventions in &config.interventions {
        for &fault in &config.faults {
            for &gap in &config.init_gaps {
                for &scenario in &config.scenarios {
                    for rep in 0..config.repetitions {
                        let mut spec = RunSpec::new(scenario, gap);
                        spec.fault = Some(FaultSpec::new(fault));
                        spec.interventions = interventions;
                        spec.seed =
                            cell_seed(config.base_seed, &fault.to_string(), gap, scenario, rep);
                        specs.push(spec);
                    }
                }
            }
        }
    }

    // Reaction-time sweep: driver-only rows against the curvature fault.
    for &t_react in &config.reaction_times {
        for &gap in &config.init_gaps {
            for &scenario in &config.scenarios {
                for rep in 0..config.repetitions {
                    let mut spec = RunSpec::new(scenario, gap);
                    spec.fault = Some(FaultSpec::new(FaultKind::DesiredCurvature));
                    spec.interventions = InterventionConfig {
                        driver: true,
                        driver_t_react: t_react,
                        ..InterventionConfig::none()
                    };
                    spec.seed = cell_seed(config.base_seed, "curvature", gap, scenario, rep);
                    specs.push(spec);
                }
            }
        }
    }

    // Friction sweep: driver-only rows against the curvature fault.
    for &mu in &config.frictions {
        for &gap in &config.init_gaps {
            for &scenario in &config.scenarios {
                for rep in 0..config.repetitions {
                    let mut spec = RunSpec::new(scenario, gap);
                    spec.fault = Some(FaultSpec::new(FaultKind::DesiredCurvature));
                    spec.friction = mu;
                    spec.interventions = InterventionConfig {
                        driver: true,
                        ..InterventionConfig::none()
                    };
                    spec.seed = cell_seed(config.base_seed, "curvature", gap, scenario, rep);
                    specs.push(spec);
                }
            }
        }
    }

    Ok(specs)
}

fn invalid_result(spec: &RunSpec) -> RunResult {
    finalize_metrics(
        RunLog::new(false),
        RunIdentity {
            scenario: spec.scenario,
            init_gap: spec.init_gap,
            fault: spec.fault.as_ref().map(|f| f.kind),
            interventions: spec.interventions,
            seed: spec.seed,
            friction: spec.friction,
            t_react: spec.interventions.driver_t_react(),
        },
        Outcome::Invalid,
        TriggerRecord::default(),
        TriggerRecord::default(),
        TriggerRecord::default(),
        TriggerRecord::default(),
    )
}

/// Thread count: SIM_THREADS env var when set, otherwise rayon's default.
pub fn thread_count() -> Option<usize> {
    std::env::var("SIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Execute all specs in parallel. Results keep spec order regardless of
/// execution order; runs failing on harness faults are marked Invalid.
pub fn run_campaign(
    specs: &[RunSpec],
    params: &RunParams,
    predictor: Option<&Predictor>,
) -> Result<Vec<RunResult>> {
    let execute = || {
        specs
            .par_iter()
            .map(|spec| {
                run_single(spec, params, predictor).unwrap_or_else(|_| invalid_result(spec))
            })
            .collect::<Vec<_>>()
    };
    match thread_count() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SimError::Other(format!("thread pool: {e}")))?;
            Ok(pool.install(execute))
        }
        None => Ok(execute()),
    }
}

/// One aggregated summary row: an intervention row at one sweep point and
/// fault kind.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStats {
    pub interventions: String,
    pub fault: Option<FaultKind>,
    pub t_react: f64,
    pub friction: f64,
    pub runs: usize,
    pub invalid: usize,
    pub a1_pct: f64,
    pub a2_pct: f64,
    pub prevented_pct: f64,
    pub avg_mitigation_aeb: Option<f64>,
    pub avg_mitigation_driver_brake: Option<f64>,
    pub avg_mitigation_driver_steer: Option<f64>,
    pub avg_mitigation_ml: Option<f64>,
    pub trigger_aeb_pct: f64,
    pub trigger_driver_brake_pct: f64,
    pub trigger_driver_steer_pct: f64,
    pub trigger_ml_pct: f64,
}

/// Fault-free per-scenario baseline row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioStats {
    pub scenario: ScenarioId,
    pub runs: usize,
    pub accidents: usize,
    pub hazard_runs: usize,
    pub min_ttc: f64,
    pub min_t_fcw: f64,
    pub max_hard_brake: f64,
    pub avg_following_distance: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CampaignSummary {
    pub fault_free: Vec<ScenarioStats>,
    pub rows: Vec<RowStats>,
    pub invalid_total: usize,
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Aggregate run results into summary rows. Permutation-invariant: rows are
/// keyed and sorted, rates computed over valid runs only.
pub fn aggregate(results: &[RunResult]) -> Result<CampaignSummary> {
    if results.is_empty() {
        return Err(SimError::config("no results to aggregate"));
    }
    let mut summary = CampaignSummary::default();

    // Fault-free baseline grouped per scenario.
    let mut scenarios: Vec<ScenarioId> = results
        .iter()
        .filter(|r| r.fault.is_none())
        .map(|r| r.scenario)
        .collect();
    scenarios.sort_by_key(|s| s.to_string());
    scenarios.dedup();
    for scenario in scenarios {
        let group: Vec<&RunResult> = results
            .iter()
            .filter(|r| {
                r.fault.is_none() && r.scenario == scenario && r.outcome != Outcome::Invalid
            })
            .collect();
        if group.is_empty() {
            continue;
        }
        let following: Vec<f64> = group
            .iter()
            .map(|r| r.following_distance)
            .filter(|v| v.is_finite())
            .collect();
        summary.fault_free.push(ScenarioStats {
            scenario,
            runs: group.len(),
            accidents: group
                .iter()
                .filter(|r| matches!(r.outcome, Outcome::A1 | Outcome::A2))
                .count(),
            hazard_runs: group.iter().filter(|r| !r.hazards.is_empty()).count(),
            min_ttc: group
                .iter()
                .map(|r| r.min_ttc)
                .fold(f64::INFINITY, f64::min),
            min_t_fcw: group
                .iter()
                .map(|r| r.min_t_fcw)
                .fold(f64::INFINITY, f64::min),
            max_hard_brake: group.iter().map(|r| r.hardest_brake).fold(0.0, f64::max),
            avg_following_distance: mean(&following).unwrap_or(f64::NAN),
        });
    }

    // Fault-armed rows keyed by (interventions, fault, t_react, friction).
    let mut keys: Vec<(String, FaultKind, u64, u64)> = results
        .iter()
        .filter_map(|r| {
            r.fault.map(|f| {
                (
                    r.interventions.label(),
                    f,
                    r.t_react.to_bits(),
                    r.friction.to_bits(),
                )
            })
        })
        .collect();
    keys.sort_by(|a, b| (&a.0, a.1.to_string(), a.2, a.3).cmp(&(&b.0, b.1.to_string(), b.2, b.3)));
    keys.dedup();

    for (label, fault, t_react_bits, friction_bits) in keys {
        let t_react = f64::from_bits(t_react_bits);
        let friction = f64::from_bits(friction_bits);
        let all: Vec<&RunResult> = results
            .iter()
            .filter(|r| {
                r.fault == Some(fault)
                    && r.interventions.label() == label
                    && r.t_react.to_bits() == t_react_bits
                    && r.friction.to_bits() == friction_bits
            })
            .collect();
        let invalid = all.iter().filter(|r| r.outcome == Outcome::Invalid).count();
        summary.invalid_total += invalid;
        let valid: Vec<&&RunResult> = all
            .iter()
            .filter(|r| r.outcome != Outcome::Invalid)
            .collect();
        if valid.is_empty() {
            continue;
        }
        let n = valid.len();
        let collect_mit = |get: fn(&RunResult) -> &TriggerRecord| -> (Option<f64>, f64) {
            let times: Vec<f64> = valid
                .iter()
                .filter_map(|r| get(r).mitigation_time)
                .collect();
            let fired = valid.iter().filter(|r| get(r).fired).count();
            (mean(&times), pct(fired, n))
        };
        let (avg_aeb, trig_aeb) = collect_mit(|r| &r.aeb);
        let (avg_db, trig_db) = collect_mit(|r| &r.driver_brake);
        let (avg_ds, trig_ds) = collect_mit(|r| &r.driver_steer);
        let (avg_ml, trig_ml) = collect_mit(|r| &r.ml);
        summary.rows.push(RowStats {
            interventions: label,
            fault: Some(fault),
            t_react,
            friction,
            runs: n,
            invalid,
            a1_pct: pct(valid.iter().filter(|r| r.outcome == Outcome::A1).count(), n),
            a2_pct: pct(valid.iter().filter(|r| r.outcome == Outcome::A2).count(), n),
            prevented_pct: pct(valid.iter().filter(|r| r.prevented).count(), n),
            avg_mitigation_aeb: avg_aeb,
            avg_mitigation_driver_brake: avg_db,
            avg_mitigation_driver_steer: avg_ds,
            avg_mitigation_ml: avg_ml,
            trigger_aeb_pct: trig_aeb,
            trigger_driver_brake_pct: trig_db,
            trigger_driver_steer_pct: trig_ds,
            trigger_ml_pct: trig_ml,
        });
    }
    Ok(summary)
}
