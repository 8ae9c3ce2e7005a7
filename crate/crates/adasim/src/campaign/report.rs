//! Report emission: per-run CSV, aggregated summary tables (CSV and
//! markdown), and per-run time-series event logs for external plotting.

use super::{CampaignSummary, RowStats, ScenarioStats};
use crate::error::{Result, SimError};
use crate::hazard::RunResult;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(SimError::config(format!("unknown report format {other:?}"))),
        }
    }
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| SimError::io(parent.display().to_string(), e))?;
    }
    std::fs::write(path, content).map_err(|e| SimError::io(path.display().to_string(), e))
}

/// Per-run rows: one line per run, stable order.
pub fn runs_csv(results: &[RunResult]) -> String {
    let mut out = String::from(
        "index,scenario,init_gap,fault,interventions,t_react,friction,seed,outcome,steps,end_t,\
         min_ttc,min_t_fcw,hardest_brake,following_distance,min_lane_distance,hazards,fault_t,\
         aeb_fired,aeb_mitigation,driver_brake_fired,driver_brake_mitigation,\
         driver_steer_fired,driver_steer_mitigation,ml_fired,ml_mitigation,prevented\n",
    );
    for (i, r) in results.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            fmt_f(r.init_gap),
            r.fault.map(|f| f.to_string()).unwrap_or_default(),
            r.interventions.label(),
            fmt_f(r.t_react),
            fmt_f(r.friction),
            r.seed,
            r.outcome,
            r.steps,
            fmt_f(r.end_t),
            fmt_f(r.min_ttc),
            fmt_f(r.min_t_fcw),
            fmt_f(r.hardest_brake),
            fmt_f(r.following_distance),
            fmt_f(r.min_lane_distance),
            r.hazards.len(),
            fmt_opt(r.fault_activation_t),
            r.aeb.fired,
            fmt_opt(r.aeb.mitigation_time),
            r.driver_brake.fired,
            fmt_opt(r.driver_brake.mitigation_time),
            r.driver_steer.fired,
            fmt_opt(r.driver_steer.mitigation_time),
            r.ml.fired,
            fmt_opt(r.ml.mitigation_time),
            r.prevented,
        );
    }
    out
}

/// Aggregated intervention-matrix and sweep rows.
pub fn summary_csv(summary: &CampaignSummary) -> String {
    let mut out = String::from(
        "interventions,fault,t_react,friction,runs,invalid,a1_pct,a2_pct,prevented_pct,\
         avg_mitigation_aeb,avg_mitigation_driver_brake,avg_mitigation_driver_steer,\
         avg_mitigation_ml,trigger_aeb_pct,trigger_driver_brake_pct,\
         trigger_driver_steer_pct,trigger_ml_pct\n",
    );
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.interventions,
            r.fault.map(|f| f.to_string()).unwrap_or_default(),
            fmt_f(r.t_react),
            fmt_f(r.friction),
            r.runs,
            r.invalid,
            fmt_f(r.a1_pct),
            fmt_f(r.a2_pct),
            fmt_f(r.prevented_pct),
            fmt_opt(r.avg_mitigation_aeb),
            fmt_opt(r.avg_mitigation_driver_brake),
            fmt_opt(r.avg_mitigation_driver_steer),
            fmt_opt(r.avg_mitigation_ml),
            fmt_f(r.trigger_aeb_pct),
            fmt_f(r.trigger_driver_brake_pct),
            fmt_f(r.trigger_driver_steer_pct),
            fmt_f(r.trigger_ml_pct),
        );
    }
    out
}

/// Fault-free per-scenario baseline table.
pub fn fault_free_csv(summary: &CampaignSummary) -> String {
    let mut out = String::from(
        "scenario,runs,accidents,hazard_runs,min_ttc,min_t_fcw,max_hard_brake,\
         avg_following_distance\n",
    );
    for s in &summary.fault_free {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.scenario,
            s.runs,
            s.accidents,
            s.hazard_runs,
            fmt_f(s.min_ttc),
            fmt_f(s.min_t_fcw),
            fmt_f(s.max_hard_brake),
            fmt_f(s.avg_following_distance),
        );
    }
    out
}

/// Parse a `runs.csv` back into results for re-aggregation (`report`
/// subcommand). Event rows and hazard details are not round-tripped; hazard
/// presence is preserved as placeholder entries.
pub fn parse_runs_csv(text: &str) -> Result<Vec<RunResult>> {
    use crate::hazard::{HazardEvent, HazardKind, Outcome, TriggerRecord};
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("index,scenario,") {
        return Err(SimError::config("runs.csv missing expected header"));
    }
    let mut results = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 27 {
            return Err(SimError::config(format!(
                "runs.csv line {}: expected 27 columns, got {}",
                lineno + 2,
                cells.len()
            )));
        }
        let bad =
            |what: &str| SimError::config(format!("runs.csv line {}: bad {what}", lineno + 2));
        let num = |i: usize, what: &str| -> Result<f64> {
            if cells[i].is_empty() {
                Ok(f64::NAN)
            } else {
                cells[i].parse::<f64>().map_err(|_| bad(what))
            }
        };
        let opt = |i: usize| -> Option<f64> { cells[i].parse::<f64>().ok() };
        let flag = |i: usize| cells[i] == "true";
        let outcome = match cells[8] {
            "no-accident" => Outcome::NoAccident,
            "A1" => Outcome::A1,
            "A2" => Outcome::A2,
            "invalid" => Outcome::Invalid,
            _ => return Err(bad("outcome")),
        };
        let hazard_count = cells[16].parse::<usize>().map_err(|_| bad("hazards"))?;
        let record = |fired_i: usize, mit_i: usize| TriggerRecord {
            fired: flag(fired_i),
            first_t: None,
            mitigation_time: opt(mit_i),
            trigger_to_end: None,
        };
        results.push(RunResult {
            scenario: cells[1].parse()?,
            init_gap: num(2, "init_gap")?,
            fault: if cells[3].is_empty() {
                None
            } else {
                Some(cells[3].parse()?)
            },
            interventions: crate::safety::InterventionConfig::parse_list(cells[4])?,
            t_react: num(5, "t_react")?,
            friction: num(6, "friction")?,
            seed: cells[7].parse().map_err(|_| bad("seed"))?,
            outcome,
            steps: cells[9].parse().map_err(|_| bad("steps"))?,
            end_t: num(10, "end_t")?,
            min_ttc: if cells[11] == "inf" {
                f64::INFINITY
            } else {
                num(11, "min_ttc")?
            },
            min_t_fcw: if cells[12] == "inf" {
                f64::INFINITY
            } else {
                num(12, "min_t_fcw")?
            },
            hardest_brake: num(13, "hardest_brake")?,
            following_distance: num(14, "following_distance")?,
            min_lane_distance: num(15, "min_lane_distance")?,
            fault_activation_t: opt(17),
            aeb: record(18, 19),
            driver_brake: record(20, 21),
            driver_steer: record(22, 23),
            ml: record(24, 25),
            prevented: flag(26),
            hazards: (0..hazard_count)
                .map(|_| HazardEvent {
                    t: 0.0,
                    kind: HazardKind::H1,
                    detail: String::new(),
                    truth_rd: f64::NAN,
                    lane_offset: f64::NAN,
                })
                .collect(),
            events: Vec::new(),
        });
    }
    Ok(results)
}

fn summary_markdown(summary: &CampaignSummary) -> String {
    let mut out = String::from("# Campaign summary\n\n");
    if !summary.fault_free.is_empty() {
        out.push_str("## Fault-free baseline\n\n");
        out.push_str(
            "| Scenario | Runs | Accidents | Hazard runs | Min TTC (s) | Min FCW lead (s) | Max brake | Following (m) |\n\
             |---|---|---|---|---|---|---|---|\n",
        );
        for s in &summary.fault_free {
            let ScenarioStats { .. } = s;
            let _ = writeln!(
                out,
                "| {} | {} | {}/{} | {} | {} | {} | {} | {} |",
                s.scenario,
                s.runs,
                s.accidents,
                s.runs,
                s.hazard_runs,
                fmt_f(s.min_ttc),
                fmt_f(s.min_t_fcw),
                fmt_f(s.max_hard_brake),
                fmt_f(s.avg_following_distance),
            );
        }
        out.push('\n');
    }
    if !summary.rows.is_empty() {
        out.push_str("## Intervention matrix\n\n");
        out.push_str(
            "| Interventions | Fault | T_react (s) | mu | Runs | A1 % | A2 % | Prevented % | \
             AEB trig % | Driver brake trig % | Driver steer trig % | ML trig % |\n\
             |---|---|---|---|---|---|---|---|---|---|---|---|\n",
        );
        for r in &summary.rows {
            let RowStats { .. } = r;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                r.interventions,
                r.fault.map(|f| f.to_string()).unwrap_or_default(),
                fmt_f(r.t_react),
                fmt_f(r.friction),
                r.runs,
                fmt_f(r.a1_pct),
                fmt_f(r.a2_pct),
                fmt_f(r.prevented_pct),
                fmt_f(r.trigger_aeb_pct),
                fmt_f(r.trigger_driver_brake_pct),
                fmt_f(r.trigger_driver_steer_pct),
                fmt_f(r.trigger_ml_pct),
            );
        }
    }
    if summary.invalid_total > 0 {
        let _ = writeln!(out, "\nExcluded invalid runs: {}", summary.invalid_total);
    }
    out
}

fn events_csv(result: &RunResult) -> String {
    let mut out = String::from("step,t,signal,source,value\n");
    for e in &result.events {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.step,
            fmt_f(e.t),
            e.signal,
            e.source,
            fmt_f(e.value)
        );
    }
    out
}

/// Write all report artifacts under `out_dir`; returns the files written.
pub fn write_reports(
    summary: &CampaignSummary,
    results: &[RunResult],
    out_dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut emit = |name: &str, content: String| -> Result<()> {
        let path = out_dir.join(name);
        write_file(&path, &content)?;
        written.push(path);
        Ok(())
    };
    emit("runs.csv", runs_csv(results))?;
    emit("summary.csv", summary_csv(summary))?;
    emit("fault_free.csv", fault_free_csv(summary))?;
    if format == ReportFormat::Markdown {
        emit("summary.md", summary_markdown(summary))?;
    }
    for (i, result) in results.iter().enumerate() {
        if !result.events.is_empty() {
            emit(&format!("runs/run_{i:04}.csv"), events_csv(result))?;
        }
    }
    Ok(written)
}
