//! Closed-loop execution of a single run: scripted world, perception with
//! optional fault injection, surrogate controllers, the intervention stack,
//! hazard monitoring, and metric collection.

use crate::control::{acc_step, alc_step, AccParams, AlcParams, AlcState};
use crate::error::{Result, SimError};
use crate::hazard::{
    finalize_metrics, monitor_step, MonitorState, Outcome, RunIdentity, RunLog, RunResult,
    TriggerRecord,
};
use crate::mitigation::{ml_step, MlParams, MlState, Predictor, Trace, WindowFrame};
use crate::perception::{
    independent_sense, inject_fault, sense_ground_truth, FaultSpec, FaultState,
};
use crate::safety::{
    aebs_step, aebs_thresholds, arbitrate, compute_ttc, driver_step, AebMode, AebsParams,
    AebsState, ArbiterInput, DriverObservations, DriverParams, DriverState, InterventionConfig,
    SafetyCheckParams,
};
use crate::scenario::{ScenarioId, ScenarioSpec};
use crate::units::{self, DT, RUN_STEPS};
use crate::world::{InitJitter, WorldState};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Full specification of one run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub scenario: ScenarioId,
    pub init_gap: f64,
    pub fault: Option<FaultSpec>,
    pub interventions: InterventionConfig,
    pub seed: u64,
    pub friction: f64,
    /// Retain per-step event rows in the result (memory-heavy; off for
    /// campaigns unless logging is requested).
    pub keep_events: bool,
    /// Apply seeded initial-condition jitter (on for campaign repetitions).
    pub jitter: bool,
}

impl RunSpec {
    pub fn new(scenario: ScenarioId, init_gap: f64) -> RunSpec {
        RunSpec {
            scenario,
            init_gap,
            fault: None,
            interventions: InterventionConfig::none(),
            seed: 0,
            friction: 1.0,
            keep_events: false,
            jitter: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(fault) = &self.fault {
            fault.validate()?;
        }
        if !(0.0..=1.0).contains(&self.friction) || self.friction <= 0.0 {
            return Err(SimError::config("friction must be in (0, 1]"));
        }
        if self.init_gap <= 0.0 {
            return Err(SimError::config("initial gap must be positive"));
        }
        Ok(())
    }
}

/// Tunable controller/safety parameters shared across runs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunParams {
    pub acc: AccParams,
    pub alc: AlcParams,
    pub aebs: AebsParams,
    pub driver: DriverParams,
    pub check: SafetyCheckParams,
    pub ml: MlParams,
}

fn jitter_for(seed: u64, enabled: bool) -> (InitJitter, f64) {
    if !enabled {
        return (InitJitter::default(), 1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = InitJitter {
        ego_speed: rng.gen_range(-0.5..0.5),
        gap: rng.gen_range(-2.0..2.0),
        lead_speed: rng.gen_range(-0.3..0.3),
        lateral: rng.gen_range(-0.1..0.1),
    };
    // Run-to-run spread of the simulated driver's reaction time.
    let react_scale = rng.gen_range(0.8..1.2);
    (init, react_scale)
}

/// Execute one run to completion (accident or 10,000 steps).
pub fn run_single(
    spec: &RunSpec,
    params: &RunParams,
    predictor: Option<&Predictor>,
) -> Result<RunResult> {
    run_single_with_trace(spec, params, predictor, false).map(|(result, _)| result)
}

/// As `run_single`, but on a caller-supplied scenario (e.g. loaded from a
/// scenario TOML file) instead of the built-in scripts. The spec's scenario
/// id and initial gap are taken from the supplied scenario.
pub fn run_single_scenario(
    scenario: &ScenarioSpec,
    spec: &RunSpec,
    params: &RunParams,
    predictor: Option<&Predictor>,
) -> Result<RunResult> {
    let mut spec = spec.clone();
    spec.scenario = scenario.id;
    spec.init_gap = scenario.init_gap;
    spec.friction = scenario.friction;
    run_inner(scenario.clone(), &spec, params, predictor, false).map(|(result, _)| result)
}

/// As `run_single`, optionally collecting the per-step observation/actuation
/// trace used for predictor training.
pub fn run_single_with_trace(
    spec: &RunSpec,
    params: &RunParams,
    predictor: Option<&Predictor>,
    collect_trace: bool,
) -> Result<(RunResult, Option<Trace>)> {
    let mut scenario = ScenarioSpec::builtin(spec.scenario, spec.init_gap);
    scenario.friction = spec.friction;
    run_inner(scenario, spec, params, predictor, collect_trace)
}

fn run_inner(
    scenario: ScenarioSpec,
    spec: &RunSpec,
    params: &RunParams,
    predictor: Option<&Predictor>,
    collect_trace: bool,
) -> Result<(RunResult, Option<Trace>)> {
    spec.validate()?;
    scenario.validate()?;
    if spec.interventions.ml && predictor.is_none() {
        return Err(SimError::config(
            "ML mitigation enabled but no predictor model supplied",
        ));
    }

    let (init_jitter, react_scale) = jitter_for(spec.seed, spec.jitter);
    let mut world = WorldState::init(&scenario, spec.seed, init_jitter);

    let mut log = RunLog::new(spec.keep_events);
    let mut monitor = MonitorState::default();
    let mut alc_state = AlcState::default();
    let mut aebs_state = AebsState::default();
    let mut driver_state = DriverState::default();
    let mut fault_state = FaultState::default();
    let mut ml_state = MlState::new(&params.ml);
    let mut aeb_record = TriggerRecord::default();
    let t_react = spec.interventions.driver_t_react() * react_scale;
    let check = spec.interventions.safety_check.then_some(&params.check);

    let mut prev_exec_accel = 0.0;
    let mut prev_exec_curvature = 0.0;
    let mut prev_ego_lat = world.ego_lat;
    let mut prev_true_rd: Option<f64> = None;
    let mut trace_steps: Vec<WindowFrame> = Vec::new();
    let mut outcome = Outcome::NoAccident;

    for step in 0..RUN_STEPS {
        let t = world.t;
        let truth = sense_ground_truth(&world, &scenario);
        let indep = independent_sense(&world, &scenario);
        let frame = match &spec.fault {
            Some(fault) => inject_fault(&truth, fault, &mut fault_state, &world),
            None => truth,
        };
        if fault_state.any_active() && log.fault_activation_t.is_none() {
            log.fault_activation_t = Some(t);
            log.event(step, t, "fault_active", "fault", 1.0);
        }

        // Ground-truth quantities feeding the driver and the monitor. The
        // perception floor does not blind the human or the monitor.
        let true_rd = world.lead().map(|l| world.gap_to(l));
        let true_rs = world.lead().map(|l| world.ego.speed - l.speed);
        let true_ttc = match (true_rd, true_rs) {
            (Some(rd), Some(rs)) => compute_ttc(rd.max(0.0), rs),
            _ => f64::INFINITY,
        };
        let thresholds =
            aebs_thresholds(world.ego.speed, params.aebs.a_driver, params.aebs.t_react)?;

        // Software controllers on the (possibly spoofed) frame.
        let adas_accel = acc_step(&frame, &world.ego, &params.acc);
        let adas_curvature = alc_step(
            &frame,
            &world.ego,
            &params.alc,
            &mut alc_state,
            units::kappa_max(),
            DT,
        );

        // AEBS on its configured channel.
        let (aeb_accel, fcw) = match spec.interventions.aeb {
            AebMode::Off => (None, false),
            AebMode::Compromised => aebs_step(
                &mut aebs_state,
                &frame,
                world.ego.speed,
                spec.friction,
                &params.aebs,
            )?,
            AebMode::Independent => aebs_step(
                &mut aebs_state,
                &indep,
                world.ego.speed,
                spec.friction,
                &params.aebs,
            )?,
        };
        if aeb_accel.is_some() {
            aeb_record.observe(Some(t));
        }

        // Simulated driver watching the road.
        let driver_out = if spec.interventions.driver {
            let gap_target = params.acc.gap_target(world.ego.speed);
            let shrinking = matches!(
                (true_rd, prev_true_rd),
                (Some(now), Some(prev)) if now < prev
            );
            let unexpected = prev_exec_accel > params.driver.unexpected_accel
                && matches!(true_rd, Some(rd) if rd < gap_target)
                && shrinking;
            let obs = DriverObservations {
                t,
                fcw_alert: fcw,
                v_ego: world.ego.speed,
                speed_limit: scenario.speed_limit,
                unexpected_accel: unexpected,
                rd: true_rd.unwrap_or(f64::INFINITY),
                rs: true_rs.unwrap_or(0.0),
                t_fcw: thresholds.t_fcw,
                lane_left: truth.lane_left,
                lane_right: truth.lane_right,
                center_offset: world.ego_lat,
                offset_rate: (world.ego_lat - prev_ego_lat) / DT,
                cut_in: world.cut_in_visible(),
                friction: scenario.friction,
            };
            driver_step(&mut driver_state, &obs, t_react, &params.driver)
        } else {
            Default::default()
        };

        // ML mitigation against the raw controller requests.
        let ml_out = if spec.interventions.ml {
            let predictor = predictor.expect("checked above");
            ml_step(&mut ml_state, predictor, adas_accel, adas_curvature, t)?
        } else {
            Default::default()
        };

        let exec = arbitrate(
            &ArbiterInput {
                t,
                adas_accel,
                adas_curvature,
                aeb_accel,
                driver_accel: driver_out.accel,
                driver_curvature: driver_out.curvature,
                driver_hold_steering: driver_out.hold_steering,
                held_curvature: prev_exec_curvature,
                ml_accel: ml_out.accel,
                ml_curvature: ml_out.curvature,
            },
            check,
        );

        let lane_distance = truth.lane_left.min(truth.lane_right);
        log.record_step(
            step,
            t,
            true_ttc,
            thresholds.t_fcw,
            exec.accel,
            spec.friction,
            true_rd,
            true_rs,
            lane_distance,
        );
        if spec.keep_events {
            log.event(step, t, "exec_accel", exec.accel_source.label(), exec.accel);
            log.event(
                step,
                t,
                "exec_curvature",
                exec.curvature_source.label(),
                exec.curvature,
            );
            log.event(step, t, "ego_speed", "world", world.ego.speed);
            log.event(
                step,
                t,
                "true_rd",
                "world",
                true_rd.unwrap_or(f64::INFINITY),
            );
            log.event(step, t, "reported_rd", "perception", frame.rd);
            log.event(step, t, "lane_offset", "world", world.ego_lat);
        }
        if collect_trace {
            trace_steps.push(WindowFrame {
                speed: world.ego.speed,
                rd: indep.rd,
                rs: indep.rs,
                lane_left: indep.lane_left,
                lane_right: indep.lane_right,
                road_curvature: indep.curvature,
                accel: exec.accel,
                curvature: exec.curvature,
            });
        }
        if spec.interventions.ml {
            ml_state.window.push(WindowFrame {
                speed: world.ego.speed,
                rd: indep.rd,
                rs: indep.rs,
                lane_left: indep.lane_left,
                lane_right: indep.lane_right,
                road_curvature: indep.curvature,
                accel: exec.accel,
                curvature: exec.curvature,
            });
        }

        prev_exec_accel = exec.accel;
        prev_exec_curvature = exec.curvature;
        prev_ego_lat = world.ego_lat;
        prev_true_rd = true_rd;

        world.script_step(&scenario);
        world.ego_step(exec.accel, exec.curvature, &scenario)?;

        for event in monitor_step(&mut monitor, &world, &scenario) {
            log.hazard(event);
        }
        if let Some(terminal) = monitor.terminal {
            outcome = terminal;
            break;
        }
    }

    let mut driver_brake = TriggerRecord::default();
    driver_brake.observe(driver_state.first_brake_trigger);
    let mut driver_steer = TriggerRecord::default();
    driver_steer.observe(driver_state.first_steer_trigger);
    let mut ml_record = TriggerRecord::default();
    ml_record.observe(ml_state.first_trigger);

    let identity = RunIdentity {
        scenario: spec.scenario,
        init_gap: spec.init_gap,
        fault: spec.fault.as_ref().map(|f| f.kind),
        interventions: spec.interventions,
        seed: spec.seed,
        friction: spec.friction,
        t_react: spec.interventions.driver_t_react(),
    };
    let result = finalize_metrics(
        log,
        identity,
        outcome,
        aeb_record,
        driver_brake,
        driver_steer,
        ml_record,
    );
    let trace = collect_trace.then_some(Trace {
        scenario: spec.scenario,
        steps: trace_steps,
    });
    Ok((result, trace))
}

/// Produce fault-free training traces covering all six scenarios:
/// `reps_per_scenario` runs each, alternating the two grid gaps, executed
/// with the firmware check only.
pub fn generate_training_traces(
    reps_per_scenario: usize,
    base_seed: u64,
    params: &RunParams,
) -> Result<Vec<Trace>> {
    let gaps = [60.0, 230.0];
    let mut traces = Vec::new();
    for (si, &scenario) in ScenarioId::ALL.iter().enumerate() {
        for rep in 0..reps_per_scenario {
            let mut spec = RunSpec::new(scenario, gaps[rep % gaps.len()]);
            spec.interventions.safety_check = true;
            spec.seed = base_seed
                .wrapping_add(1000 * si as u64)
                .wrapping_add(rep as u64);
            let (_, trace) = run_single_with_trace(&spec, params, None, true)?;
            traces.push(trace.expect("trace requested"));
        }
    }
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::{FaultKind, FaultSpec};

    #[test]
    fn fault_free_s1_no_accident_full_length() {
        let spec = RunSpec::new(ScenarioId::S1, 60.0);
        let result = run_single(&spec, &RunParams::default(), None).unwrap();
        assert_eq!(result.outcome, Outcome::NoAccident);
        assert_eq!(result.steps, RUN_STEPS);
        assert!(!result.prevented);
    }

    #[test]
    fn rd_fault_without_interventions_collides() {
        let mut spec = RunSpec::new(ScenarioId::S1, 60.0);
        spec.fault = Some(FaultSpec::new(FaultKind::RelativeDistance));
        let result = run_single(&spec, &RunParams::default(), None).unwrap();
        assert_eq!(result.outcome, Outcome::A1);
        assert!(result.fault_activation_t.is_some());
        assert!(result.steps < RUN_STEPS);
    }

    #[test]
    fn curvature_fault_without_interventions_departs_lane() {
        let mut spec = RunSpec::new(ScenarioId::S1, 60.0);
        spec.fault = Some(FaultSpec::new(FaultKind::DesiredCurvature));
        let result = run_single(&spec, &RunParams::default(), None).unwrap();
        assert_eq!(result.outcome, Outcome::A2);
    }

    #[test]
    fn determinism_same_seed_same_result() {
        let mut spec = RunSpec::new(ScenarioId::S3, 60.0);
        spec.fault = Some(FaultSpec::new(FaultKind::Mixed));
        spec.seed = 9;
        let a = run_single(&spec, &RunParams::default(), None).unwrap();
        let b = run_single(&spec, &RunParams::default(), None).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.min_ttc.to_bits(), b.min_ttc.to_bits());
    }

    #[test]
    fn aeb_independent_prevents_rd_fault_collision() {
        let mut spec = RunSpec::new(ScenarioId::S1, 60.0);
        spec.fault = Some(FaultSpec::new(FaultKind::RelativeDistance));
        spec.interventions.aeb = AebMode::Independent;
        let result = run_single(&spec, &RunParams::default(), None).unwrap();
        assert_eq!(result.outcome, Outcome::NoAccident);
        assert!(result.aeb.fired);
        assert!(result.prevented);
    }

    #[test]
    fn ml_without_model_is_config_error() {
        let mut spec = RunSpec::new(ScenarioId::S1, 60.0);
        spec.interventions.ml = true;
        let err = run_single(&spec, &RunParams::default(), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
