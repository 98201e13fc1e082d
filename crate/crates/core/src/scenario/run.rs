//! Shared-clock simulation: thermal sequencing first, then body dynamics on
//! the same step grid.

use super::{Calibration, RobotDesign, Scenario, ScenarioError, SimSettings};
use crate::actuation::{ActuationEvent, Sequencer};
use crate::hydro::{self, BodyState, HydroParams, ImpulseTrain, ScheduledImpulse};
use crate::mech::SnapDirection;
use crate::scenario::Environment;

/// Relative speed below which a stroke counts as finished.
const STROKE_REST_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: BodyState<f64>,
    pub water_temp: f64,
}

/// Actuation events stamped with the index of the step that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub events: Vec<(usize, ActuationEvent<f64>)>,
    /// Last step after which no further event can occur.
    pub settled_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSummary {
    pub pair: usize,
    pub direction: SnapDirection,
    pub t_start: f64,
    pub t_end: f64,
    pub displacement_bl: f64,
    pub dtheta_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Final distance from the start (body lengths).
    pub displacement_bl: f64,
    pub final_heading_deg: f64,
    /// Farthest distance from the start reached (body lengths).
    pub max_excursion_bl: f64,
    pub strokes: Vec<StrokeSummary>,
    /// Final distance from the start, reported once a reverse stroke has fired.
    pub return_error_bl: Option<f64>,
    pub cargo_released: bool,
    /// No pair snapped at all.
    pub no_snap: bool,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trajectory: Vec<TrajectorySample>,
    pub events: Vec<ActuationEvent<f64>>,
    pub summary: Summary,
}

/// Steps the actuation sequencer until nothing more can happen or the horizon.
pub fn actuate(design: &RobotDesign, env: &Environment, sim: &SimSettings) -> Result<Timeline, ScenarioError> {
    let mut seq = Sequencer::new(design.pairs.clone(), design.gripper.clone(), design.topology)?;
    let mut events = Vec::new();
    let mut settled_step = None;
    for k in 0..sim.steps() {
        let t = k as f64 * sim.dt;
        for ev in seq.step(&env.schedule, t, sim.dt)? {
            events.push((k, ev));
        }
        if seq.settled(&env.schedule, (k + 1) as f64 * sim.dt) {
            settled_step = Some(k);
            break;
        }
    }
    Ok(Timeline { events, settled_step })
}

fn with_cargo(base: &HydroParams<f64>, cargo: f64) -> HydroParams<f64> {
    if cargo > 0.0 {
        base.with_extra_mass(cargo)
    } else {
        *base
    }
}

/// Integrates the body under the snaps of `timeline`.
pub fn propel(
    design: &RobotDesign,
    env: &Environment,
    sim: &SimSettings,
    timeline: &Timeline,
    base: &HydroParams<f64>,
) -> Result<Vec<TrajectorySample>, ScenarioError> {
    base.validate()?;
    let cargo = design.gripper.as_ref().map_or(0.0, |g| g.cargo_mass);
    let mut params = with_cargo(base, cargo);
    let fins: Vec<_> = (0..design.pairs.len()).map(|i| design.fins_of(i)).collect();
    let duration = base.snap_duration;
    let dt = sim.dt;
    let stride = ((sim.sample_interval / dt).round() as usize).max(1);
    let sample = |t: f64, state: BodyState<f64>| TrajectorySample {
        t,
        state,
        water_temp: env.schedule.temperature_at(t),
    };

    let mut state = BodyState::default();
    let mut train = ImpulseTrain::new();
    let mut out = vec![sample(0.0, state)];
    let mut next_event = 0;
    let n = sim.steps();
    for k in 0..n {
        let t = k as f64 * dt;
        let mut forced = false;
        let mut release = false;
        while let Some((step, ev)) = timeline.events.get(next_event) {
            if *step != k {
                break;
            }
            match ev {
                ActuationEvent::Snap(snap) => {
                    let impulse = hydro::snap_impulse(snap, &fins[snap.pair_id], &params);
                    train.push(ScheduledImpulse {
                        start: snap.time,
                        impulse,
                    });
                    forced = true;
                }
                ActuationEvent::CargoRelease { .. } => {
                    release = true;
                    forced = true;
                }
                ActuationEvent::MuscleActive { .. } => {}
            }
            next_event += 1;
        }
        if forced && out.last().is_none_or(|s| s.t < t) {
            out.push(sample(t, state));
        }
        let (force, torque) = train.mean_load(t, dt, duration);
        state = hydro::step(&state, &params, force, torque, dt);
        if release {
            params = *base;
        }
        let t_next = (k + 1) as f64 * dt;
        train.retire(t_next, duration);
        if !state.is_finite() {
            return Err(ScenarioError::Diverged { t: t_next });
        }
        let quiet = timeline.settled_step.is_some_and(|s| k >= s)
            && next_event == timeline.events.len()
            && train.is_empty()
            && state.at_rest();
        if (k + 1) % stride == 0 || quiet || k + 1 == n {
            out.push(sample(t_next, state));
        }
        if quiet {
            break;
        }
    }
    Ok(out)
}

fn distance(a: &BodyState<f64>, b: &BodyState<f64>) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Per-stroke and overall metrics, recomputable from the trajectory and events.
///
/// A stroke starts at the sample preceding its snap and ends at the next
/// snap, or once every speed has fallen below `1e-4` of the stroke's peak.
pub fn summarize(
    trajectory: &[TrajectorySample],
    events: &[ActuationEvent<f64>],
    reference_length: f64,
    snap_duration: f64,
) -> Summary {
    let snaps: Vec<_> = events
        .iter()
        .filter_map(|e| match e {
            ActuationEvent::Snap(s) => Some(s),
            _ => None,
        })
        .collect();
    let start_index = |t: f64| trajectory.partition_point(|s| s.t <= t).saturating_sub(1);
    let mut strokes = Vec::with_capacity(snaps.len());
    for (i, snap) in snaps.iter().enumerate() {
        let a = start_index(snap.time);
        let limit = snaps
            .get(i + 1)
            .map_or(trajectory.len() - 1, |n| start_index(n.time).max(a));
        let (mut peak_v, mut peak_w) = (0.0f64, 0.0f64);
        let mut b = limit;
        for (j, s) in trajectory.iter().enumerate().take(limit + 1).skip(a) {
            peak_v = peak_v.max(s.state.speed());
            peak_w = peak_w.max(s.state.omega.abs());
            if s.t >= snap.time + snap_duration
                && s.state.speed() <= STROKE_REST_FRACTION * peak_v
                && s.state.omega.abs() <= STROKE_REST_FRACTION * peak_w
            {
                b = j;
                break;
            }
        }
        let (sa, sb) = (&trajectory[a], &trajectory[b]);
        strokes.push(StrokeSummary {
            pair: snap.pair_id,
            direction: snap.direction,
            t_start: snap.time,
            t_end: sb.t,
            displacement_bl: distance(&sa.state, &sb.state) / reference_length,
            dtheta_deg: (sb.state.theta - sa.state.theta).to_degrees(),
        });
    }
    let origin = BodyState::default();
    let last = trajectory.last().map_or(origin, |s| s.state);
    let displacement_bl = distance(&last, &origin) / reference_length;
    let max_excursion_bl = trajectory
        .iter()
        .map(|s| distance(&s.state, &origin))
        .fold(0.0, f64::max)
        / reference_length;
    let reversed = snaps.iter().any(|s| s.direction == SnapDirection::Reverse);
    Summary {
        displacement_bl,
        final_heading_deg: last.theta.to_degrees(),
        max_excursion_bl,
        no_snap: snaps.is_empty(),
        return_error_bl: reversed.then_some(displacement_bl),
        cargo_released: events.iter().any(|e| matches!(e, ActuationEvent::CargoRelease { .. })),
        strokes,
        duration_s: trajectory.last().map_or(0.0, |s| s.t),
    }
}

/// Runs a scenario with the given drag calibration.
pub fn run(scenario: &Scenario, calibration: &Calibration) -> Result<RunResult, ScenarioError> {
    let design = &scenario.design;
    let env = &scenario.environment;
    let params = design.hydro_params(env, calibration);
    let timeline = actuate(design, env, &scenario.sim)?;
    let trajectory = propel(design, env, &scenario.sim, &timeline, &params)?;
    let events: Vec<_> = timeline.events.into_iter().map(|(_, e)| e).collect();
    let summary = summarize(
        &trajectory,
        &events,
        design.hydro.reference_length_m,
        params.snap_duration,
    );
    Ok(RunResult {
        trajectory,
        events,
        summary,
    })
}
