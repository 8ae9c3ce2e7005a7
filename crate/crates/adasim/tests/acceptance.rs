//! Acceptance gate: end-to-end checks of the simulator's safety-critical
//! behavior. Each test prints one PASS/FAIL line; a FAIL line accompanies the
//! assertion failure so the gate report stays honest.

use adasim::campaign::{
    aggregate, expand_grid, run_campaign, runs_csv, summary_csv, CampaignConfig, CampaignSummary,
    RowStats,
};
use adasim::mitigation::{cusum_step, predictor_train, CusumParams, CusumState, Predictor};
use adasim::perception::FaultKind;
use adasim::runner::{generate_training_traces, RunParams};
use adasim::safety::{aebs_thresholds, AebMode, InterventionConfig};
use adasim::scenario::ScenarioId;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::Instant;

fn check(name: &str, pass: bool, detail: &str) {
    println!("{name}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

fn predictor() -> &'static Predictor {
    static MODEL: OnceLock<Predictor> = OnceLock::new();
    MODEL.get_or_init(|| {
        let traces =
            generate_training_traces(4, 1, &RunParams::default()).expect("trace generation");
        predictor_train(&traces, 1e-6, 1)
            .expect("training")
            .predictor
    })
}

fn run_cfg(cfg: &CampaignConfig, predictor: Option<&Predictor>) -> CampaignSummary {
    let specs = expand_grid(cfg).expect("grid");
    let results = run_campaign(&specs, &cfg.params, predictor).expect("campaign");
    aggregate(&results).expect("aggregate")
}

fn row<'a>(summary: &'a CampaignSummary, label: &str, fault: FaultKind) -> &'a RowStats {
    summary
        .rows
        .iter()
        .find(|r| r.interventions == label && r.fault == Some(fault))
        .unwrap_or_else(|| panic!("missing summary row {label}/{fault}"))
}

#[test]
fn ac01_aebs_threshold_oracle() {
    // (speed m/s, t_fcw, t_pb1, t_pb2, t_fb) hand-evaluated against
    // t_react + v/4.5, v/3.8, v/5.8, v/9.8.
    let oracle = [
        (
            5.0,
            3.611111111111111,
            1.3157894736842106,
            0.8620689655172413,
            0.5102040816326531,
        ),
        (
            13.411,
            5.480222222222222,
            3.5292105263157894,
            2.312241379310345,
            1.3684693877551021,
        ),
        (
            22.352,
            7.467111111111111,
            5.882105263157895,
            3.8537931034482758,
            2.2808163265306123,
        ),
        (
            30.0,
            9.166666666666666,
            7.894736842105263,
            5.172413793103448,
            3.061224489795918,
        ),
    ];
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &(v, fcw, pb1, pb2, fb) in &oracle {
        let th = aebs_thresholds(v, 4.5, 2.5).unwrap();
        for (got, want) in [
            (th.t_fcw, fcw),
            (th.t_pb1, pb1),
            (th.t_pb2, pb2),
            (th.t_fb, fb),
        ] {
            worst = worst.max((got - want).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        "AC1",
        worst < 1e-9 && elapsed.as_secs_f64() < 1.0,
        &format!("threshold oracle max error {worst:.2e}, {elapsed:?}"),
    );
}

#[test]
fn ac02_firmware_clamp_and_aeb_bypass() {
    // Full 360-run fault grid with the firmware check enabled and independent
    // AEB armed, event logs retained; processed in chunks to bound memory.
    let cfg = CampaignConfig {
        interventions: vec![InterventionConfig {
            safety_check: true,
            aeb: AebMode::Independent,
            ..InterventionConfig::none()
        }],
        ..CampaignConfig::default()
    };
    let mut specs = expand_grid(&cfg).unwrap();
    assert_eq!(specs.len(), 360);
    for spec in &mut specs {
        spec.keep_events = true;
    }

    let mut violations = 0usize;
    let mut worst = 0.0f64;
    let mut bypass_runs = 0usize;
    let mut total = 0usize;
    for chunk in specs.chunks(24) {
        let results = run_campaign(chunk, &cfg.params, None).unwrap();
        total += results.len();
        for r in &results {
            let mut bypassed = false;
            for e in &r.events {
                if e.signal != "exec_accel" {
                    continue;
                }
                match e.source.as_str() {
                    "adas" | "ml" => {
                        if e.value < -3.5 - 1e-9 || e.value > 2.0 + 1e-9 {
                            violations += 1;
                            worst = worst.max((e.value + 3.5).abs().max((e.value - 2.0).abs()));
                        }
                    }
                    "aeb" if e.value < -3.5 => bypassed = true,
                    _ => {}
                }
            }
            if bypassed {
                bypass_runs += 1;
            }
        }
    }
    check(
        "AC2",
        violations == 0 && bypass_runs >= 1 && total == 360,
        &format!(
            "{total} runs, {violations} clamp violations, {bypass_runs} runs with AEB decel beyond 3.5 m/s^2"
        ),
    );
}

#[test]
fn ac03_detector_replay_bit_exact() {
    // Replay 10,000-step synthetic command sequences through the detector and
    // through an independent scalar recursion; S trajectories, executed
    // commands, trigger steps, and recovery exits must agree bit-for-bit.
    let channels = [
        CusumParams { b0: 0.05, tau: 0.5 }, // longitudinal (m/s^2)
        CusumParams {
            b0: 0.0025,
            tau: 0.025,
        }, // lateral (1/m)
    ];
    let mut mismatches = 0usize;
    let mut total_triggers = 0usize;
    let mut total_exits = 0usize;
    for (ci, params) in channels.iter().enumerate() {
        for seq in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * ci as u64 + seq);
            let scale = if ci == 0 { 1.0 } else { 0.01 };
            let mut state = CusumState::new(*params);
            let (mut s, mut recovery) = (0.0f64, false);
            let mut was_recovery = false;
            for step in 0..10_000usize {
                let diverging = (2000..2600).contains(&step) || (7000..7900).contains(&step);
                let y_ml = 0.1 * scale * (step as f64 * 0.002).sin();
                let noise: f64 = rng.gen_range(-0.3..0.3) * params.b0;
                let y_op = y_ml + noise + if diverging { 0.8 * scale } else { 0.0 };

                let exec = cusum_step(&mut state, y_ml, y_op).unwrap();

                // Independent recursion.
                let delta = (y_ml - y_op).abs();
                let exec_ref = if recovery {
                    if delta <= params.b0 {
                        recovery = false;
                        s = 0.0;
                        y_op
                    } else {
                        s = (s + delta - params.b0).max(0.0);
                        y_ml
                    }
                } else {
                    s = (s + delta - params.b0).max(0.0);
                    if s > params.tau {
                        recovery = true;
                        y_ml
                    } else {
                        y_op
                    }
                };

                if state.s.to_bits() != s.to_bits()
                    || exec.to_bits() != exec_ref.to_bits()
                    || state.recovery_mode != recovery
                    || state.s < 0.0
                {
                    mismatches += 1;
                }
                if recovery && !was_recovery {
                    total_triggers += 1;
                }
                if !recovery && was_recovery {
                    total_exits += 1;
                }
                was_recovery = recovery;
            }
        }
    }
    check(
        "AC3",
        mismatches == 0 && total_triggers == 20 && total_exits == 20,
        &format!(
            "100,000 replayed steps, {mismatches} mismatches, {total_triggers} triggers, {total_exits} recovery exits"
        ),
    );
}

#[test]
fn ac04_fault_free_baseline() {
    // 20 seeded fault-free runs per scenario with the firmware check only.
    let cfg = CampaignConfig {
        fault_free: true,
        ..CampaignConfig::default()
    };
    let specs: Vec<_> = expand_grid(&cfg)
        .unwrap()
        .into_iter()
        .filter(|s| s.fault.is_none())
        .collect();
    assert_eq!(specs.len(), 120);
    let results = run_campaign(&specs, &cfg.params, None).unwrap();
    let summary = aggregate(&results).unwrap();

    let stat = |id: ScenarioId| {
        summary
            .fault_free
            .iter()
            .find(|s| s.scenario == id)
            .unwrap_or_else(|| panic!("missing baseline row {id}"))
    };
    let clean = [ScenarioId::S1, ScenarioId::S2, ScenarioId::S6]
        .iter()
        .map(|&id| stat(id).accidents)
        .sum::<usize>();
    let s4 = stat(ScenarioId::S4);
    let s4_stressed = s4.accidents >= 1 || s4.hazard_runs as f64 >= 0.05 * s4.runs as f64;
    check(
        "AC4",
        clean == 0 && s4_stressed,
        &format!(
            "S1/S2/S6 accidents {clean}/60; S4 accidents {}, hazard runs {}/{}",
            s4.accidents, s4.hazard_runs, s4.runs
        ),
    );
}

#[test]
fn ac05_unprotected_faults_cause_accidents() {
    let cfg = CampaignConfig {
        faults: vec![FaultKind::RelativeDistance, FaultKind::DesiredCurvature],
        ..CampaignConfig::default()
    };
    let summary = run_cfg(&cfg, None);
    let rd = row(&summary, "none", FaultKind::RelativeDistance);
    let curv = row(&summary, "none", FaultKind::DesiredCurvature);
    let rd_accidents = rd.a1_pct + rd.a2_pct;
    check(
        "AC5",
        rd.runs == 120 && rd_accidents == 100.0 && curv.a2_pct >= 95.0,
        &format!(
            "rd fault: {rd_accidents:.1}% accidents over {} runs; curvature fault: {:.1}% lane-departure accidents",
            rd.runs, curv.a2_pct
        ),
    );
}

#[test]
fn ac06_independent_aeb_beats_compromised() {
    let cfg = CampaignConfig {
        faults: vec![FaultKind::RelativeDistance],
        interventions: vec![
            InterventionConfig {
                safety_check: true,
                aeb: AebMode::Independent,
                ..InterventionConfig::none()
            },
            InterventionConfig {
                safety_check: true,
                aeb: AebMode::Compromised,
                ..InterventionConfig::none()
            },
        ],
        ..CampaignConfig::default()
    };
    let summary = run_cfg(&cfg, None);
    let indep = row(&summary, "check+aeb-indep", FaultKind::RelativeDistance);
    let comp = row(&summary, "check+aeb-comp", FaultKind::RelativeDistance);
    check(
        "AC6",
        indep.prevented_pct == 100.0
            && indep.trigger_aeb_pct == 100.0
            && comp.prevented_pct <= indep.prevented_pct - 30.0,
        &format!(
            "independent-channel AEB prevented {:.1}% (trigger {:.1}%); compromised-channel AEB prevented {:.1}%",
            indep.prevented_pct, indep.trigger_aeb_pct, comp.prevented_pct
        ),
    );
}

fn sweep_summary() -> &'static CampaignSummary {
    static SUMMARY: OnceLock<CampaignSummary> = OnceLock::new();
    SUMMARY.get_or_init(|| {
        let cfg = CampaignConfig {
            faults: vec![FaultKind::DesiredCurvature],
            interventions: vec![InterventionConfig {
                driver: true,
                ..InterventionConfig::none()
            }],
            reaction_times: vec![1.0, 1.5, 2.0, 3.0, 3.5],
            frictions: vec![0.5, 0.25],
            ..CampaignConfig::default()
        };
        run_cfg(&cfg, None)
    })
}

#[test]
fn ac07_slower_driver_prevents_less() {
    let summary = sweep_summary();
    let rate = |t_react: f64| {
        summary
            .rows
            .iter()
            .find(|r| {
                r.interventions == "driver"
                    && r.friction == 1.0
                    && (r.t_react - t_react).abs() < 1e-9
            })
            .unwrap_or_else(|| panic!("missing t_react row {t_react}"))
            .prevented_pct
    };
    let points: Vec<f64> = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5]
        .iter()
        .map(|&t| rate(t))
        .collect();
    let non_increasing = points.windows(2).all(|w| w[1] <= w[0] + 5.0);
    let spread = points[0] - points[5];
    check(
        "AC7",
        non_increasing && spread >= 15.0,
        &format!(
            "prevention over reaction times 1.0..3.5 s: {:?} (spread {spread:.1} points)",
            points.iter().map(|p| format!("{p:.1}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn ac08_low_friction_prevents_less() {
    let summary = sweep_summary();
    let rate = |mu: f64| {
        summary
            .rows
            .iter()
            .find(|r| {
                r.interventions == "driver" && r.friction == mu && (r.t_react - 2.5).abs() < 1e-9
            })
            .unwrap_or_else(|| panic!("missing friction row {mu}"))
            .prevented_pct
    };
    let (dry, icy) = (rate(1.0), rate(0.25));
    check(
        "AC8",
        icy <= dry - 15.0,
        &format!("driver prevention {dry:.1}% at mu 1.0 vs {icy:.1}% at mu 0.25"),
    );
}

#[test]
fn ac09_ml_mitigation_near_total_prevention() {
    let cfg = CampaignConfig {
        faults: vec![FaultKind::RelativeDistance],
        interventions: vec![InterventionConfig {
            safety_check: true,
            ml: true,
            ..InterventionConfig::none()
        }],
        ..CampaignConfig::default()
    };
    let summary = run_cfg(&cfg, Some(predictor()));
    let ml = row(&summary, "check+ml", FaultKind::RelativeDistance);
    check(
        "AC9",
        ml.runs == 120 && ml.a1_pct <= 5.0 && ml.prevented_pct < 100.0,
        &format!(
            "rd fault under detector+predictor: {:.2}% collisions, {:.2}% prevented ({:.1}% detector trigger)",
            ml.a1_pct, ml.prevented_pct, ml.trigger_ml_pct
        ),
    );
}

#[test]
fn ac10_campaign_reproducible_and_fast() {
    let cfg = CampaignConfig::default();
    let start = Instant::now();
    let specs = expand_grid(&cfg).unwrap();
    assert_eq!(specs.len(), 360);
    let results_a = run_campaign(&specs, &cfg.params, None).unwrap();
    let elapsed = start.elapsed();
    let results_b = run_campaign(&specs, &cfg.params, None).unwrap();
    let summary_a = aggregate(&results_a).unwrap();
    let summary_b = aggregate(&results_b).unwrap();
    let identical = summary_csv(&summary_a) == summary_csv(&summary_b)
        && runs_csv(&results_a) == runs_csv(&results_b);
    check(
        "AC10",
        identical && elapsed.as_secs_f64() <= 300.0,
        &format!("360-run campaign in {elapsed:?}; re-run byte-identical: {identical}"),
    );
}
