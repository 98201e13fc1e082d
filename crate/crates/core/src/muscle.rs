//! Lumped shape-memory-polymer muscle model.
//!
//! A programmed muscle recovers its printed shape once the surrounding water
//! heats it past the glass transition. While recovering against the bistable
//! element it acts as a blocked-force spring: full force at the programmed
//! position `x = -1`, no force at the printed shape `x = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mech::{BistableProfile, SnapDirection};
use crate::scalar::Scalar;

/// Programming / ambient temperature (°C).
pub const AMBIENT_C: f64 = 20.0;
/// Thickness range (mm) over which the force calibration is trusted.
pub const THICKNESS_RANGE_MM: (f64, f64) = (0.5, 2.0);
/// Calibration anchors read off the blocked-force curve: (mm, N).
pub const FORCE_ANCHORS: [(f64, f64); 2] = [(0.6, 0.2), (1.6, 2.1)];
/// Points on the normalized sweep `x ∈ [-1, 0]` checked by [`can_trigger`].
pub const TRIGGER_GRID: usize = 256;
/// Default width of the glass-transition band (°C).
pub const DEFAULT_TRANSITION_BAND_C: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MuscleError {
    #[error("beam thickness {0} mm outside the calibrated range [0.5, 2.0] mm")]
    ThicknessOutOfRange(f64),
    #[error("normalized position {0} outside [-1, 0]")]
    PositionOutOfRange(f64),
    #[error("invalid muscle: {0}")]
    Invalid(String),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("material database: {0}")]
    Database(String),
}

pub type Result<T> = std::result::Result<T, MuscleError>;

/// Printable SMP material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Material<T> {
    pub name: String,
    #[serde(rename = "tg_c")]
    pub glass_transition_c: T,
    /// Heating time constant per squared thickness (s/mm²).
    #[serde(rename = "diffusivity_s_per_mm2")]
    pub diffusivity_coeff: T,
    /// The muscle counts as recovered once its core is within this many °C of `Tg`.
    #[serde(rename = "transition_band_c", default = "default_band")]
    pub transition_band_c: T,
}

fn default_band<T: Scalar>() -> T {
    T::lit(DEFAULT_TRANSITION_BAND_C)
}

impl<T: Scalar> Material<T> {
    pub fn new(name: impl Into<String>, glass_transition_c: T, diffusivity_coeff: T) -> Self {
        Self {
            name: name.into(),
            glass_transition_c,
            diffusivity_coeff,
            transition_band_c: default_band(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.glass_transition_c.is_finite() {
            return Err(MuscleError::Invalid(format!("{}: tg_c must be finite", self.name)));
        }
        if !(self.diffusivity_coeff > T::zero()) || !self.diffusivity_coeff.is_finite() {
            return Err(MuscleError::Invalid(format!(
                "{}: diffusivity_s_per_mm2 must be positive",
                self.name
            )));
        }
        if !(self.transition_band_c >= T::zero()) {
            return Err(MuscleError::Invalid(format!(
                "{}: transition_band_c must be non-negative",
                self.name
            )));
        }
        Ok(())
    }
}

/// Which side of the bistable element the muscle pushes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuscleOrientation {
    ForwardDriver,
    ReverseDriver,
}

impl MuscleOrientation {
    pub fn direction(self) -> SnapDirection {
        match self {
            MuscleOrientation::ForwardDriver => SnapDirection::Forward,
            MuscleOrientation::ReverseDriver => SnapDirection::Reverse,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuscleSpec<T> {
    /// Thickness of each curved SMP beam (mm).
    pub beam_thickness: T,
    pub material: Material<T>,
    /// Programmed deformation (mm).
    pub programmed_stroke: T,
    pub orientation: MuscleOrientation,
}

impl<T: Scalar> MuscleSpec<T> {
    pub fn new(beam_thickness: T, material: Material<T>, orientation: MuscleOrientation) -> Self {
        Self {
            beam_thickness,
            material,
            programmed_stroke: T::lit(6.0),
            orientation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.beam_thickness;
        let (lo, hi) = THICKNESS_RANGE_MM;
        if !t.is_finite() || t < T::lit(lo) || t > T::lit(hi) {
            return Err(MuscleError::ThicknessOutOfRange(t.as_f64()));
        }
        if !(self.programmed_stroke > T::zero()) {
            return Err(MuscleError::Invalid("programmed stroke must be positive".into()));
        }
        self.material.validate()
    }
}

/// Blocked recovery force (N), linear through the two calibration anchors.
pub fn recovery_force<T: Scalar>(spec: &MuscleSpec<T>) -> Result<T> {
    spec.validate()?;
    let [(t0, f0), (t1, f1)] = FORCE_ANCHORS;
    let slope = T::lit((f1 - f0) / (t1 - t0));
    Ok(T::lit(f0) + slope * (spec.beam_thickness - T::lit(t0)))
}

/// Force exerted at normalized position `x` (`-1` programmed, `0` printed shape).
pub fn force_profile<T: Scalar>(spec: &MuscleSpec<T>, x: T) -> Result<T> {
    if !(x >= -T::one() && x <= T::zero()) {
        return Err(MuscleError::PositionOutOfRange(x.as_f64()));
    }
    Ok(recovery_force(spec)? * -x)
}

/// Time (s) until the muscle recovers when immersed in water at `water_temp_c`,
/// or `None` if it never does. First-mode slab conduction from ambient: the core
/// reaches the lower edge of the transition band after `c t² ln((T_w − T_a)/(T_w − T_g + band))`.
pub fn activation_time<T: Scalar>(spec: &MuscleSpec<T>, water_temp_c: T) -> Result<Option<T>> {
    spec.validate()?;
    let m = &spec.material;
    let ambient = T::lit(AMBIENT_C);
    if !(water_temp_c >= m.glass_transition_c) || water_temp_c <= ambient {
        return Ok(None);
    }
    let ratio = (water_temp_c - ambient) / (water_temp_c - m.glass_transition_c + m.transition_band_c);
    let t = spec.beam_thickness;
    let tau = m.diffusivity_coeff * t * t * ratio.ln();
    if !tau.is_finite() {
        return Ok(None);
    }
    Ok(Some(tau.max(T::zero())))
}

/// Shuttle position for normalized muscle position `x` on the sweep in `direction`.
/// Forward sweeps map `[first stable, unstable]`, reverse sweeps `[second stable, unstable]`.
pub fn sweep_position<T: Scalar>(profile: &BistableProfile<T>, direction: SnapDirection, x: T) -> T {
    let start = match direction {
        SnapDirection::Forward => profile.first_stable(),
        SnapDirection::Reverse => profile.second_stable(),
    };
    start + (x + T::one()) * (profile.unstable() - start)
}

/// Load the bistable element opposes a muscle sweeping in `direction` with, at shuttle `v`.
pub fn resisting_force<T: Scalar>(profile: &BistableProfile<T>, direction: SnapDirection, v: T) -> T {
    match direction {
        SnapDirection::Forward => profile.load(v),
        SnapDirection::Reverse => -profile.load(v),
    }
}

/// Normalized grid `x_i = -1 + i/(n-1)` without the `x = 0` endpoint, where
/// muscle force and bistable load both vanish.
pub fn trigger_grid<T: Scalar>() -> impl Iterator<Item = T> {
    let last = T::lit((TRIGGER_GRID - 1) as f64);
    (0..TRIGGER_GRID - 1).map(move |i| -T::one() + T::lit(i as f64) / last)
}

/// True iff `F_SMP(x) > F_Bi(x)` at every sweep grid point.
pub fn can_trigger<T: Scalar>(spec: &MuscleSpec<T>, profile: &BistableProfile<T>) -> bool {
    let Ok(force) = recovery_force(spec) else {
        return false;
    };
    let direction = spec.orientation.direction();
    trigger_grid::<T>().all(|x| {
        let v = sweep_position(profile, direction, x);
        force * -x > resisting_force(profile, direction, v)
    })
}

/// Smallest blocked force that triggers the profile in `direction`:
/// `max_x F_Bi(x) / (−x)` over the sweep grid.
pub fn trigger_threshold<T: Scalar>(profile: &BistableProfile<T>, direction: SnapDirection) -> T {
    trigger_grid::<T>().fold(T::zero(), |acc, x| {
        let v = sweep_position(profile, direction, x);
        acc.max(resisting_force(profile, direction, v) / -x)
    })
}

/// Named materials loaded from the material database file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialDb {
    #[serde(rename = "material")]
    pub materials: Vec<Material<f64>>,
}

/// Shipped database: VeroWhitePlus, FLX9895, Agilus30, RGD525.
pub const BUILTIN_MATERIALS: &str = include_str!("../../../scenarios/materials.toml");

impl MaterialDb {
    pub fn parse(text: &str) -> Result<Self> {
        let db: MaterialDb = toml::from_str(text).map_err(|e| MuscleError::Database(e.to_string()))?;
        for m in &db.materials {
            m.validate()?;
        }
        Ok(db)
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_MATERIALS).expect("shipped material database is valid")
    }

    pub fn get(&self, name: &str) -> Result<&Material<f64>> {
        self.materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| MuscleError::UnknownMaterial(name.to_string()))
    }
}
