//! Planar rigid-body dynamics of the swimmer.
//!
//! Body frame: `x` forward, `y` to the left, heading `θ` counter-clockwise.
//! A snap paddles the attached fins for `snap_duration`, producing a constant
//! body-frame force and torque over that window. Drag has a linear skin-friction
//! part and a quadratic form-drag part, both treated implicitly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuation::SnapEvent;
use crate::mech::SnapDirection;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HydroError {
    #[error("simulation diverged at t = {t} s: non-finite body state")]
    NonFinite { t: f64 },
    #[error("invalid hydrodynamic parameter `{0}`: must be positive and finite")]
    InvalidParam(&'static str),
    #[error("time step {0} s exceeds the 10 ms limit")]
    StepTooLarge(f64),
}

pub type Result<T> = std::result::Result<T, HydroError>;

/// Fin mounting slot. Declaration order is the lexicographic order of the names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinSlot {
    FrontLeft,
    FrontRight,
    RearLeft,
    RearRight,
}

impl FinSlot {
    pub const ALL: [FinSlot; 4] = [
        FinSlot::FrontLeft,
        FinSlot::FrontRight,
        FinSlot::RearLeft,
        FinSlot::RearRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FinSlot::FrontLeft => "front_left",
            FinSlot::FrontRight => "front_right",
            FinSlot::RearLeft => "rear_left",
            FinSlot::RearRight => "rear_right",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_left(self) -> bool {
        matches!(self, FinSlot::FrontLeft | FinSlot::RearLeft)
    }

    pub fn is_front(self) -> bool {
        matches!(self, FinSlot::FrontLeft | FinSlot::FrontRight)
    }

    /// Rear fins ride on the first pair, front fins on the second.
    pub fn pair_index(self) -> usize {
        if self.is_front() {
            1
        } else {
            0
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            FinSlot::FrontLeft => FinSlot::FrontRight,
            FinSlot::FrontRight => FinSlot::FrontLeft,
            FinSlot::RearLeft => FinSlot::RearRight,
            FinSlot::RearRight => FinSlot::RearLeft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fin<T> {
    pub slot: FinSlot,
    /// Pivot offset from the centre of mass, body frame (m).
    pub offset: [T; 2],
    /// Paddle area (m²).
    pub area: T,
    pub paddle_drag_coeff: T,
    pub present: bool,
}

impl<T: Scalar> Fin<T> {
    /// Fin in `slot` with offsets mirrored across the centreline for left/right.
    pub fn in_slot(slot: FinSlot, front_x: T, rear_x: T, lateral: T, area: T, paddle_drag_coeff: T) -> Self {
        let x = if slot.is_front() { front_x } else { rear_x };
        let y = if slot.is_left() { lateral } else { -lateral };
        Self {
            slot,
            offset: [x, y],
            area,
            paddle_drag_coeff,
            present: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroParams<T> {
    /// Mass including added mass (kg).
    pub body_mass: T,
    /// Yaw inertia (kg·m²).
    pub rotational_inertia: T,
    /// kg/m³.
    pub water_density: T,
    /// Quadratic form-drag coefficient `C_D`.
    pub body_drag_coeff: T,
    /// Quadratic yaw drag `c_r` (N·m·s²).
    pub rotational_drag_coeff: T,
    /// Frontal reference area for form drag (m²).
    pub reference_area: T,
    /// Duration of the paddle stroke (s).
    pub snap_duration: T,
    /// Fraction of released strain energy that can end up as body kinetic energy.
    pub efficiency: T,
    /// Linear skin-friction coefficient (N·s/m).
    pub linear_drag: T,
    /// Linear yaw damping (N·m·s).
    pub rotational_damping: T,
}

impl<T: Scalar> HydroParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        let non_negative = |v: T| v.is_finite() && v >= T::zero();
        let checks: [(&'static str, bool); 10] = [
            ("body_mass", positive(self.body_mass)),
            ("rotational_inertia", positive(self.rotational_inertia)),
            ("water_density", positive(self.water_density)),
            ("body_drag_coeff", non_negative(self.body_drag_coeff)),
            ("rotational_drag_coeff", non_negative(self.rotational_drag_coeff)),
            ("reference_area", positive(self.reference_area)),
            ("snap_duration", positive(self.snap_duration)),
            ("efficiency", positive(self.efficiency) && self.efficiency <= T::one()),
            ("linear_drag", non_negative(self.linear_drag)),
            ("rotational_damping", non_negative(self.rotational_damping)),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(HydroError::InvalidParam(name)),
            None => Ok(()),
        }
    }

    /// Same parameters with `extra` kg added to the body, inertia scaled with it.
    pub fn with_extra_mass(&self, extra: T) -> Self {
        let scale = (self.body_mass + extra) / self.body_mass;
        Self {
            body_mass: self.body_mass + extra,
            rotational_inertia: self.rotational_inertia * scale,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
    pub vx: T,
    pub vy: T,
    pub omega: T,
}

impl<T: Scalar> BodyState<T> {
    pub fn speed(&self) -> T {
        self.vx.hypot(self.vy)
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.vx, self.vy, self.omega]
            .iter()
            .all(|v| v.is_finite())
    }

    /// All velocity magnitudes below `tol`.
    pub fn at_rest_within(&self, tol: T) -> bool {
        self.speed() < tol && self.omega.abs() < tol
    }

    pub fn at_rest(&self) -> bool {
        self.at_rest_within(T::lit(1e-6))
    }

    pub fn kinetic_energy(&self, params: &HydroParams<T>) -> T {
        let half = T::lit(0.5);
        half * params.body_mass * (self.vx * self.vx + self.vy * self.vy)
            + half * params.rotational_inertia * self.omega * self.omega
    }

    /// Reflection across the x axis.
    pub fn mirrored(&self) -> Self {
        Self {
            x: self.x,
            y: -self.y,
            theta: -self.theta,
            vx: self.vx,
            vy: -self.vy,
            omega: -self.omega,
        }
    }
}

/// Linear impulse (body frame, N·s) and angular impulse (N·m·s) of one snap.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SnapImpulse<T> {
    pub linear: [T; 2],
    pub angular: T,
}

/// Impulse delivered by the fins attached to a snapping pair.
///
/// Each fin sweeps at `stroke_length / snap_duration` and pushes with
/// `½ρ C A v²`; the force acts at the fin pivot. If the resulting kinetic
/// energy from rest would exceed `η · released_energy`, the impulse is scaled
/// down onto that budget.
pub fn snap_impulse<T: Scalar>(event: &SnapEvent<T>, fins: &[Fin<T>], params: &HydroParams<T>) -> SnapImpulse<T> {
    let milli = T::lit(1e-3);
    let sign = match event.direction {
        SnapDirection::Forward => T::one(),
        SnapDirection::Reverse => -T::one(),
    };
    let v_fin = event.stroke_length * milli / params.snap_duration;
    let half = T::lit(0.5);
    let mut out = SnapImpulse::default();
    for fin in fins.iter().filter(|f| f.present) {
        let thrust = half * params.water_density * fin.paddle_drag_coeff * fin.area * v_fin * v_fin;
        let fx = sign * thrust * params.snap_duration;
        out.linear[0] = out.linear[0] + fx;
        // r × F with F along body x
        out.angular = out.angular - fin.offset[1] * fx;
    }
    let ke = half * (out.linear[0] * out.linear[0] + out.linear[1] * out.linear[1]) / params.body_mass
        + half * out.angular * out.angular / params.rotational_inertia;
    let budget = params.efficiency * event.released_energy.max(T::zero()) * milli;
    if ke > budget && ke > T::zero() {
        let s = (budget / ke).sqrt();
        out.linear = [out.linear[0] * s, out.linear[1] * s];
        out.angular = out.angular * s;
    }
    out
}

/// Snap impulse delivered as a constant load over `[start, start + duration]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledImpulse<T> {
    pub start: T,
    pub impulse: SnapImpulse<T>,
}

/// Active paddle loads; averages them exactly over each integration step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImpulseTrain<T> {
    pulses: Vec<ScheduledImpulse<T>>,
}

impl<T: Scalar> ImpulseTrain<T> {
    pub fn new() -> Self {
        Self { pulses: Vec::new() }
    }

    pub fn push(&mut self, pulse: ScheduledImpulse<T>) {
        self.pulses.push(pulse);
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Mean body-frame force and torque over `[t, t + dt]`.
    pub fn mean_load(&self, t: T, dt: T, duration: T) -> ([T; 2], T) {
        let mut force = [T::zero(), T::zero()];
        let mut torque = T::zero();
        for p in &self.pulses {
            let overlap = ((t + dt).min(p.start + duration) - t.max(p.start)).max(T::zero());
            if overlap > T::zero() {
                let w = overlap / (duration * dt);
                force[0] = force[0] + p.impulse.linear[0] * w;
                force[1] = force[1] + p.impulse.linear[1] * w;
                torque = torque + p.impulse.angular * w;
            }
        }
        (force, torque)
    }

    /// Drops pulses that finished before `t`.
    pub fn retire(&mut self, t: T, duration: T) {
        self.pulses.retain(|p| p.start + duration > t);
    }
}

/// One semi-implicit Euler step: velocities first (drag implicit), then poses.
pub fn step<T: Scalar>(
    state: &BodyState<T>,
    params: &HydroParams<T>,
    force_body: [T; 2],
    torque: T,
    dt: T,
) -> BodyState<T> {
    let (s, c) = state.theta.sin_cos();
    let fx = c * force_body[0] - s * force_body[1];
    let fy = s * force_body[0] + c * force_body[1];
    let quad = T::lit(0.5) * params.water_density * params.body_drag_coeff * params.reference_area;
    let m = params.body_mass;
    let damp = T::one() + dt * (params.linear_drag + quad * state.speed()) / m;
    let vx = (state.vx + dt * fx / m) / damp;
    let vy = (state.vy + dt * fy / m) / damp;
    let inertia = params.rotational_inertia;
    let rot_damp =
        T::one() + dt * (params.rotational_damping + params.rotational_drag_coeff * state.omega.abs()) / inertia;
    let omega = (state.omega + dt * torque / inertia) / rot_damp;
    BodyState {
        x: state.x + vx * dt,
        y: state.y + vy * dt,
        theta: state.theta + omega * dt,
        vx,
        vy,
        omega,
    }
}

/// Trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub state: BodyState<T>,
}

/// Integrates a body under scheduled snap impulses until it comes to rest after
/// the last pulse, or until `horizon`.
pub fn integrate<T: Scalar>(
    initial: BodyState<T>,
    params: &HydroParams<T>,
    pulses: &[ScheduledImpulse<T>],
    dt: T,
    horizon: T,
) -> Result<Vec<Sample<T>>> {
    params.validate()?;
    if !(dt > T::zero()) || dt > T::lit(0.01) + T::tiny() {
        return Err(HydroError::StepTooLarge(dt.as_f64()));
    }
    let mut train = ImpulseTrain::new();
    for p in pulses {
        train.push(*p);
    }
    let last_pulse_end = pulses
        .iter()
        .fold(T::zero(), |m, p| m.max(p.start + params.snap_duration));
    let mut state = initial;
    let mut out = vec![Sample { t: T::zero(), state }];
    let mut k: usize = 0;
    loop {
        let t = T::lit(k as f64) * dt;
        if t >= horizon {
            break;
        }
        let (f, tau) = train.mean_load(t, dt, params.snap_duration);
        state = step(&state, params, f, tau, dt);
        k += 1;
        let t_next = T::lit(k as f64) * dt;
        if !state.is_finite() {
            return Err(HydroError::NonFinite { t: t_next.as_f64() });
        }
        out.push(Sample { t: t_next, state });
        if t_next >= last_pulse_end && state.at_rest() {
            break;
        }
    }
    Ok(out)
}
