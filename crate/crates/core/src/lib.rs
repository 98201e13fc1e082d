//! Bistable snap-through swimmer: truss mechanics, shape-memory muscles,
//! actuation sequencing, planar hydrodynamics, scenarios and mission synthesis.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuation;
pub mod hydro;
pub mod io;
pub mod mech;
pub mod mission;
pub mod muscle;
pub mod scalar;
pub mod scenario;
pub mod schedule;

pub use scalar::Scalar;

pub type TrussGeometry = mech::TrussGeometry<f64>;
pub type BistableProfile = mech::BistableProfile<f64>;
pub type MuscleSpec = muscle::MuscleSpec<f64>;
pub type Material = muscle::Material<f64>;
pub type ActuatorPair = actuation::ActuatorPair<f64>;
pub type SnapEvent = actuation::SnapEvent<f64>;
pub type Sequencer = actuation::Sequencer<f64>;
pub type TemperatureSchedule = schedule::TemperatureSchedule<f64>;
pub type HydroParams = hydro::HydroParams<f64>;
pub type BodyState = hydro::BodyState<f64>;
pub type Fin = hydro::Fin<f64>;

pub type TrussGeometryF32 = mech::TrussGeometry<f32>;
pub type BistableProfileF32 = mech::BistableProfile<f32>;
pub type HydroParamsF32 = hydro::HydroParams<f32>;
pub type BodyStateF32 = hydro::BodyState<f32>;
