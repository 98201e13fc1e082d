//! Muscle/bistable pair state machine and thermal sequencing.
//!
//! Before the snap the shuttle tracks force balance between the recovering
//! muscle and the truss load; once no balance point remains below the
//! unstable equilibrium the element snaps and releases its stored energy.

use thiserror::Error;

use crate::hydro::FinSlot;
use crate::mech::{BistableProfile, MechError, SnapDirection, TrussGeometry};
use crate::muscle::{
    self, activation_time, recovery_force, resisting_force, sweep_position, Material, MuscleError, MuscleSpec,
};
use crate::scalar::Scalar;
use crate::schedule::TemperatureSchedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActuationError {
    #[error("pair {pair}: cannot advance in phase {phase:?}")]
    WrongPhase { pair: usize, phase: Phase },
    #[error("pair {pair}: no reverse muscle")]
    NoReverseMuscle { pair: usize },
    #[error("muscle extent {0} outside [0, 1]")]
    ExtentOutOfRange(f64),
    #[error(transparent)]
    Mech(#[from] MechError),
    #[error(transparent)]
    Muscle(#[from] MuscleError),
}

pub type Result<T> = std::result::Result<T, ActuationError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Programmed,
    Relaxing,
    Snapped,
    Reversed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorPair<T> {
    pub id: usize,
    pub truss: TrussGeometry<T>,
    pub forward_muscle: MuscleSpec<T>,
    pub reverse_muscle: Option<MuscleSpec<T>>,
    /// Shuttle displacement `V` (mm).
    pub shuttle_position: T,
    pub phase: Phase,
    pub attached_fins: Vec<FinSlot>,
    /// Time (s) for an activated muscle to go from programmed to fully recovered.
    pub recovery_duration: T,
}

impl<T: Scalar> ActuatorPair<T> {
    pub fn new(id: usize, truss: TrussGeometry<T>, forward_muscle: MuscleSpec<T>) -> Self {
        Self {
            id,
            truss,
            forward_muscle,
            reverse_muscle: None,
            shuttle_position: T::zero(),
            phase: Phase::Programmed,
            attached_fins: Vec::new(),
            recovery_duration: T::lit(5.0),
        }
    }

    /// Direction the next sweep would drive, if the pair can still move.
    pub fn pending_direction(&self) -> Option<SnapDirection> {
        match self.phase {
            Phase::Programmed | Phase::Relaxing => Some(SnapDirection::Forward),
            Phase::Snapped if self.reverse_muscle.is_some() => Some(SnapDirection::Reverse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapEvent<T> {
    pub time: T,
    pub pair_id: usize,
    pub direction: SnapDirection,
    /// Strain energy released (N·mm).
    pub released_energy: T,
    /// Shuttle travel from the unstable point to the destination (mm).
    pub stroke_length: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gripper<T> {
    pub material: Material<T>,
    /// Cargo mass (kg).
    pub cargo_mass: T,
    pub held: bool,
}

/// Force-balance residual `e·F·(−x) − F_Bi(V(x))` along the sweep.
fn balance<T: Scalar>(force: T, extent: T, profile: &BistableProfile<T>, dir: SnapDirection, x: T) -> T {
    let v = sweep_position(profile, dir, x);
    extent * force * -x - resisting_force(profile, dir, v)
}

/// Quasi-static sweep: the first balance point on the grid, or `None` when the
/// muscle overpowers the truss everywhere before the unstable point.
fn balance_point<T: Scalar>(force: T, extent: T, profile: &BistableProfile<T>, dir: SnapDirection) -> Option<T> {
    let scan = crate::mech::RootScan::default();
    let mut prev: Option<T> = None;
    for x in muscle::trigger_grid::<T>() {
        let g = balance(force, extent, profile, dir, x);
        if g <= T::zero() {
            return Some(match prev {
                None => x,
                Some(xp) => crate::mech::bisect(|x| balance(force, extent, profile, dir, x), xp, x, &scan),
            });
        }
        prev = Some(x);
    }
    None
}

fn driving_muscle<T: Scalar>(pair: &ActuatorPair<T>) -> Result<(&MuscleSpec<T>, SnapDirection)> {
    match pair.phase {
        Phase::Relaxing => Ok((&pair.forward_muscle, SnapDirection::Forward)),
        Phase::Snapped => pair
            .reverse_muscle
            .as_ref()
            .map(|m| (m, SnapDirection::Reverse))
            .ok_or(ActuationError::NoReverseMuscle { pair: pair.id }),
        phase => Err(ActuationError::WrongPhase { pair: pair.id, phase }),
    }
}

/// Moves the shuttle to force balance for muscle recovery `extent ∈ [0, 1]`.
///
/// A relaxing pair is driven forward by its forward muscle; a snapped pair with
/// a reverse muscle is driven back. Crossing the unstable point emits a
/// [`SnapEvent`] (with `time = 0`, the caller stamps it) and moves the phase on.
pub fn advance_pair<T: Scalar>(
    pair: &ActuatorPair<T>,
    extent: T,
    profile: &BistableProfile<T>,
) -> Result<(ActuatorPair<T>, Option<SnapEvent<T>>)> {
    if !(extent >= T::zero() && extent <= T::one()) {
        return Err(ActuationError::ExtentOutOfRange(extent.as_f64()));
    }
    let (muscle, dir) = driving_muscle(pair)?;
    let force = recovery_force(muscle)?;
    let mut next = pair.clone();
    match balance_point(force, extent, profile, dir) {
        Some(x) => {
            next.shuttle_position = sweep_position(profile, dir, x);
            Ok((next, None))
        }
        None => {
            next.shuttle_position = profile.destination(dir);
            next.phase = match dir {
                SnapDirection::Forward => Phase::Snapped,
                SnapDirection::Reverse => Phase::Reversed,
            };
            let event = SnapEvent {
                time: T::zero(),
                pair_id: pair.id,
                direction: dir,
                released_energy: profile.released_energy(dir),
                stroke_length: profile.stroke_length(dir),
            };
            Ok((next, Some(event)))
        }
    }
}

/// Smallest recovery extent at which `pair` snaps, located by bisection on the
/// snap predicate. `None` when even full recovery stalls.
pub fn critical_extent<T: Scalar>(pair: &ActuatorPair<T>, profile: &BistableProfile<T>) -> Result<Option<T>> {
    let snaps = |e: T| -> Result<bool> { Ok(advance_pair(pair, e, profile)?.1.is_some()) };
    if !snaps(T::one())? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    let half = T::lit(0.5);
    for _ in 0..64 {
        let mid = lo + half * (hi - lo);
        if snaps(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::epsilon() {
            break;
        }
    }
    Ok(Some(hi))
}

/// Series chain predicate `F_Act,1 + |F_Bi,max| > F_Act,2 > |F_Bi,min|`:
/// the rear muscle plus its snapped element must outpush the front muscle,
/// which in turn must beat the front element.
pub fn chain_condition<T: Scalar>(
    rear: &ActuatorPair<T>,
    rear_profile: &BistableProfile<T>,
    front: &ActuatorPair<T>,
    front_profile: &BistableProfile<T>,
) -> bool {
    let (Ok(f1), Ok(f2)) = (
        recovery_force(&rear.forward_muscle),
        recovery_force(&front.forward_muscle),
    ) else {
        return false;
    };
    f1 + rear_profile.forward_peak_force.abs() > f2 && f2 > front_profile.reverse_peak_force.abs()
}

/// Reverse muscle beats the reverse barrier plus whatever the forward muscle
/// still pushes at the current shuttle position.
pub fn reverse_condition<T: Scalar>(pair: &ActuatorPair<T>, profile: &BistableProfile<T>) -> bool {
    let Some(reverse) = &pair.reverse_muscle else {
        return false;
    };
    let Ok(f_rev) = recovery_force(reverse) else {
        return false;
    };
    let (r1, r2) = (profile.first_stable(), profile.unstable());
    let x = (-T::one() + (pair.shuttle_position - r1) / (r2 - r1))
        .max(-T::one())
        .min(T::zero());
    let residual = muscle::force_profile(&pair.forward_muscle, x).unwrap_or_else(|_| T::zero());
    f_rev > profile.reverse_peak_force.abs() + residual
}

/// How multiple pairs are mechanically coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Independent,
    /// Pair `n+1`'s muscle only engages after pair `n` has snapped.
    Series,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActuationEvent<T> {
    MuscleActive {
        time: T,
        pair: usize,
        direction: SnapDirection,
    },
    Snap(SnapEvent<T>),
    CargoRelease {
        time: T,
    },
}

impl<T: Scalar> ActuationEvent<T> {
    pub fn time(&self) -> T {
        match self {
            ActuationEvent::MuscleActive { time, .. } | ActuationEvent::CargoRelease { time } => *time,
            ActuationEvent::Snap(s) => s.time,
        }
    }

    /// Ordering within one instant: by pair index, gripper last.
    fn rank(&self) -> (usize, u8) {
        match self {
            ActuationEvent::MuscleActive { pair, .. } => (*pair, 0),
            ActuationEvent::Snap(s) => (s.pair_id, 1 + (s.direction == SnapDirection::Reverse) as u8),
            ActuationEvent::CargoRelease { .. } => (usize::MAX, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct MuscleClock<T> {
    /// Fraction of the activation time accumulated so far.
    exposure: T,
    activated_at: Option<T>,
}

impl<T: Scalar> MuscleClock<T> {
    fn new() -> Self {
        Self {
            exposure: T::zero(),
            activated_at: None,
        }
    }

    /// Accumulates exposure over `[start, end]`; returns the activation instant if reached.
    fn accumulate(
        &mut self,
        spec: &MuscleSpec<T>,
        schedule: &TemperatureSchedule<T>,
        start: T,
        end: T,
    ) -> Result<Option<T>> {
        if self.activated_at.is_some() || end <= start {
            return Ok(None);
        }
        let mid = start + T::lit(0.5) * (end - start);
        let Some(tau) = activation_time(spec, schedule.temperature_at(mid))? else {
            return Ok(None);
        };
        let activated = if tau <= T::zero() {
            start
        } else {
            let gained = (end - start) / tau;
            let before = self.exposure;
            self.exposure = before + gained;
            if self.exposure < T::one() {
                return Ok(None);
            }
            start + (T::one() - before) * tau
        };
        self.activated_at = Some(activated);
        Ok(Some(activated))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PairRuntime<T> {
    pair: ActuatorPair<T>,
    profile: BistableProfile<T>,
    forward: MuscleClock<T>,
    reverse: MuscleClock<T>,
    /// Earliest time the forward muscle's clock may run (series gating).
    gate_open_at: Option<T>,
    snapped_at: Option<T>,
}

/// Sequencer for all pairs and the gripper of one robot.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequencer<T> {
    pairs: Vec<PairRuntime<T>>,
    gripper: Option<Gripper<T>>,
    topology: Topology,
}

impl<T: Scalar> Sequencer<T> {
    pub fn new(pairs: Vec<ActuatorPair<T>>, gripper: Option<Gripper<T>>, topology: Topology) -> Result<Self> {
        let pairs = pairs
            .into_iter()
            .enumerate()
            .map(|(i, pair)| {
                let profile = pair.truss.barriers()?;
                pair.forward_muscle.validate()?;
                if let Some(r) = &pair.reverse_muscle {
                    r.validate()?;
                }
                let gate_open_at = if i == 0 || topology == Topology::Independent {
                    Some(T::zero())
                } else {
                    None
                };
                Ok(PairRuntime {
                    pair,
                    profile,
                    forward: MuscleClock::new(),
                    reverse: MuscleClock::new(),
                    gate_open_at,
                    snapped_at: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            pairs,
            gripper,
            topology,
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = &ActuatorPair<T>> {
        self.pairs.iter().map(|p| &p.pair)
    }

    pub fn profile(&self, pair: usize) -> &BistableProfile<T> {
        &self.pairs[pair].profile
    }

    pub fn gripper(&self) -> Option<&Gripper<T>> {
        self.gripper.as_ref()
    }

    /// Cargo mass still on board (kg).
    pub fn carried_mass(&self) -> T {
        self.gripper
            .as_ref()
            .filter(|g| g.held)
            .map_or(T::zero(), |g| g.cargo_mass)
    }

    fn extent(activated_at: T, engaged_at: T, now: T, duration: T) -> T {
        let start = activated_at.max(engaged_at);
        if duration <= T::zero() {
            return if now >= start { T::one() } else { T::zero() };
        }
        ((now - start) / duration).max(T::zero()).min(T::one())
    }

    /// Advances every muscle, pair and the gripper over `[t, t + dt]`.
    /// Events come back sorted by time, then pair index, gripper last.
    pub fn step(&mut self, schedule: &TemperatureSchedule<T>, t: T, dt: T) -> Result<Vec<ActuationEvent<T>>> {
        let end = t + dt;
        let mut events = Vec::new();
        for i in 0..self.pairs.len() {
            let rt = &mut self.pairs[i];

            if rt.pair.phase == Phase::Programmed {
                if let Some(gate) = rt.gate_open_at {
                    if let Some(at) = rt
                        .forward
                        .accumulate(&rt.pair.forward_muscle, schedule, t.max(gate), end)?
                    {
                        rt.pair.phase = Phase::Relaxing;
                        events.push(ActuationEvent::MuscleActive {
                            time: at,
                            pair: i,
                            direction: SnapDirection::Forward,
                        });
                    }
                }
            }

            if rt.pair.phase == Phase::Relaxing {
                let act = rt.forward.activated_at.expect("relaxing muscle has an activation time");
                let e = Self::extent(act, act, end, rt.pair.recovery_duration);
                let (next, snap) = advance_pair(&rt.pair, e, &rt.profile)?;
                if let Some(mut snap) = snap {
                    let e_crit = critical_extent(&rt.pair, &rt.profile)?.unwrap_or(e);
                    snap.time = (act + e_crit * rt.pair.recovery_duration).max(t).min(end);
                    rt.snapped_at = Some(snap.time);
                    if self.topology == Topology::Series {
                        if let Some(nx) = self.pairs.get_mut(i + 1) {
                            nx.gate_open_at = Some(snap.time);
                        }
                    }
                    let rt = &mut self.pairs[i];
                    rt.pair = next;
                    events.push(ActuationEvent::Snap(snap));
                } else {
                    rt.pair = next;
                }
            }

            let rt = &mut self.pairs[i];
            if let Some(reverse) = rt.pair.reverse_muscle.clone() {
                if matches!(rt.pair.phase, Phase::Programmed | Phase::Relaxing | Phase::Snapped) {
                    if let Some(at) = rt.reverse.accumulate(&reverse, schedule, t, end)? {
                        events.push(ActuationEvent::MuscleActive {
                            time: at,
                            pair: i,
                            direction: SnapDirection::Reverse,
                        });
                    }
                }
                if rt.pair.phase == Phase::Snapped {
                    if let (Some(act), Some(snapped)) = (rt.reverse.activated_at, rt.snapped_at) {
                        let engaged = act.max(snapped);
                        let e = Self::extent(act, snapped, end, rt.pair.recovery_duration);
                        let (next, snap) = advance_pair(&rt.pair, e, &rt.profile)?;
                        if let Some(mut snap) = snap {
                            let e_crit = critical_extent(&rt.pair, &rt.profile)?.unwrap_or(e);
                            snap.time = (engaged + e_crit * rt.pair.recovery_duration).max(t).min(end);
                            events.push(ActuationEvent::Snap(snap));
                        }
                        rt.pair = next;
                    }
                }
            }
        }

        if let Some(g) = self.gripper.as_mut().filter(|g| g.held) {
            let tg = g.material.glass_transition_c;
            let (t0, t1) = (schedule.temperature_at(t), schedule.temperature_at(end));
            if t1 >= tg {
                let at = if t0 >= tg || t1 == t0 {
                    t
                } else {
                    t + (tg - t0) / (t1 - t0) * dt
                };
                g.held = false;
                events.push(ActuationEvent::CargoRelease {
                    time: at.max(t).min(end),
                });
            }
        }

        events.sort_by(|a, b| {
            a.time()
                .partial_cmp(&b.time())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.rank().cmp(&b.rank()))
        });
        Ok(events)
    }

    /// True when nothing further can happen, given the rest of the schedule.
    pub fn settled(&self, schedule: &TemperatureSchedule<T>, t: T) -> bool {
        let future_max = schedule.max_temperature_from(t);
        let mut previous_done_without_snap = false;
        let mut all = true;
        for (i, rt) in self.pairs.iter().enumerate() {
            let recovery_done =
                |act: Option<T>, from: T| act.is_some_and(|a| t - a.max(from) >= rt.pair.recovery_duration);
            let unreachable = |m: &MuscleSpec<T>| future_max < m.material.glass_transition_c;
            let done = match rt.pair.phase {
                Phase::Programmed => {
                    let gate_closed_forever = rt.gate_open_at.is_none() && i > 0 && previous_done_without_snap;
                    gate_closed_forever || unreachable(&rt.pair.forward_muscle)
                }
                Phase::Relaxing => recovery_done(rt.forward.activated_at, T::zero()),
                Phase::Snapped => match &rt.pair.reverse_muscle {
                    None => true,
                    Some(r) => {
                        (rt.reverse.activated_at.is_none() && unreachable(r))
                            || recovery_done(rt.reverse.activated_at, rt.snapped_at.unwrap_or(t))
                    }
                },
                Phase::Reversed => true,
            };
            previous_done_without_snap = done && rt.snapped_at.is_none();
            all &= done;
        }
        let gripper_done = self
            .gripper
            .as_ref()
            .is_none_or(|g| !g.held || future_max < g.material.glass_transition_c);
        all && gripper_done
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::muscle::{MaterialDb, MuscleOrientation};

    fn truss() -> TrussGeometry<f64> {
        TrussGeometry::new(5.0, 20.0, 4.0, 2.0).unwrap()
    }

    fn spec(t: f64, material: &str, orientation: MuscleOrientation) -> MuscleSpec<f64> {
        let m = MaterialDb::builtin().get(material).unwrap().clone();
        MuscleSpec::new(t, m, orientation)
    }

    fn pair(id: usize, t: f64) -> ActuatorPair<f64> {
        let mut p = ActuatorPair::new(id, truss(), spec(t, "VeroWhitePlus", MuscleOrientation::ForwardDriver));
        p.phase = Phase::Relaxing;
        p
    }

    #[test]
    fn zero_extent_stays_in_state_one() {
        let profile = truss().barriers().unwrap();
        let (next, ev) = advance_pair(&pair(0, 1.4), 0.0, &profile).unwrap();
        assert!(ev.is_none());
        assert_eq!(next.shuttle_position, profile.first_stable());
        assert_eq!(next.phase, Phase::Relaxing);
    }

    #[test]
    fn weak_muscle_stalls_below_unstable_point() {
        let profile = truss().barriers().unwrap();
        let (next, ev) = advance_pair(&pair(0, 1.0), 1.0, &profile).unwrap();
        assert!(ev.is_none());
        assert!(next.shuttle_position > profile.first_stable());
        assert!(next.shuttle_position < profile.unstable());
        let p = profile.load(next.shuttle_position);
        let x = -1.0 + next.shuttle_position / profile.unstable();
        let f = recovery_force(&next.forward_muscle).unwrap() * -x;
        assert!((p - f).abs() < 1e-9, "force balance {p} vs {f}");
    }

    #[test]
    fn wrong_phase_is_an_error() {
        let profile = truss().barriers().unwrap();
        let mut p = pair(3, 1.4);
        p.phase = Phase::Programmed;
        assert_eq!(
            advance_pair(&p, 0.5, &profile),
            Err(ActuationError::WrongPhase {
                pair: 3,
                phase: Phase::Programmed
            })
        );
        p.phase = Phase::Snapped;
        assert_eq!(
            advance_pair(&p, 0.5, &profile),
            Err(ActuationError::NoReverseMuscle { pair: 3 })
        );
        assert!(advance_pair(&pair(0, 1.4), 1.5, &profile).is_err());
    }

    #[test]
    fn exactly_one_snap_over_dense_extent_sweep() {
        let profile = truss().barriers().unwrap();
        let mut p = pair(0, 1.4);
        let mut snaps = Vec::new();
        let mut last_v = p.shuttle_position;
        for i in 0..=2000 {
            if p.phase != Phase::Relaxing {
                break;
            }
            let e = i as f64 / 2000.0;
            let (next, ev) = advance_pair(&p, e, &profile).unwrap();
            assert!(next.shuttle_position >= last_v - 1e-12, "shuttle moved backwards");
            last_v = next.shuttle_position;
            if let Some(ev) = ev {
                snaps.push((e, ev));
            }
            p = next;
        }
        assert_eq!(snaps.len(), 1);
        let (e_dense, ev) = &snaps[0];
        assert_eq!(ev.direction, SnapDirection::Forward);
        assert!(ev.released_energy > 0.0);
        let e_crit = critical_extent(&pair(0, 1.4), &profile).unwrap().unwrap();
        assert!(e_crit <= *e_dense && *e_dense - e_crit <= 1.0 / 2000.0 + 1e-12);
        // closed form from the trigger threshold
        let f = recovery_force(&pair(0, 1.4).forward_muscle).unwrap();
        let closed = muscle::trigger_threshold(&profile, SnapDirection::Forward) / f;
        assert!((e_crit - closed).abs() < 1e-9, "{e_crit} vs {closed}");
        assert_eq!(p.phase, Phase::Snapped);
        assert_eq!(p.shuttle_position, profile.second_stable());
    }

    #[test]
    fn released_energy_matches_strain_energy() {
        let profile = truss().barriers().unwrap();
        let (_, ev) = advance_pair(&pair(0, 1.6), 1.0, &profile).unwrap();
        let ev = ev.unwrap();
        let g = truss();
        let expected = g.strain_energy(profile.unstable()).unwrap() - g.strain_energy(profile.second_stable()).unwrap();
        assert!((ev.released_energy - expected).abs() <= 1e-8 * expected.abs());
        assert!((ev.stroke_length - (profile.second_stable() - profile.unstable())).abs() < 1e-12);
    }

    #[test]
    fn chain_condition_cases() {
        let profile = truss().barriers().unwrap();
        let chain = |t1: f64, t2: f64| chain_condition(&pair(0, t1), &profile, &pair(1, t2), &profile);
        assert!(chain(1.2, 1.2));
        assert!(chain(1.2, 1.4));
        assert!(chain(1.4, 1.6));
        // weaker than |F_Bi,min|
        assert!(!chain(1.2, 0.6));
        // stronger than rear muscle plus |F_Bi,max|
        assert!(!chain(0.6, 1.6));
    }

    #[test]
    fn reverse_condition_cases() {
        let profile = truss().barriers().unwrap();
        let mut p = pair(0, 1.2);
        p.phase = Phase::Snapped;
        p.shuttle_position = profile.second_stable();
        assert!(!reverse_condition(&p, &profile));
        p.reverse_muscle = Some(spec(1.6, "VeroWhitePlus", MuscleOrientation::ReverseDriver));
        assert!(reverse_condition(&p, &profile));
        p.reverse_muscle = Some(spec(0.6, "VeroWhitePlus", MuscleOrientation::ReverseDriver));
        assert!(!reverse_condition(&p, &profile));
        // forward muscle still loaded: residual counts against the reverse muscle
        let mut q = pair(0, 1.6);
        q.reverse_muscle = Some(spec(1.0, "VeroWhitePlus", MuscleOrientation::ReverseDriver));
        q.shuttle_position = profile.first_stable();
        assert!(!reverse_condition(&q, &profile));
    }

    fn sequencer(ts: &[f64], topology: Topology) -> Sequencer<f64> {
        let pairs = ts
            .iter()
            .enumerate()
            .map(|(i, &t)| ActuatorPair::new(i, truss(), spec(t, "VeroWhitePlus", MuscleOrientation::ForwardDriver)))
            .collect();
        Sequencer::new(pairs, None, topology).unwrap()
    }

    fn run_events(
        seq: &mut Sequencer<f64>,
        schedule: &TemperatureSchedule<f64>,
        dt: f64,
        horizon: f64,
    ) -> Vec<ActuationEvent<f64>> {
        let mut out = Vec::new();
        let steps = (horizon / dt).round() as usize;
        for k in 0..steps {
            out.extend(seq.step(schedule, k as f64 * dt, dt).unwrap());
        }
        out
    }

    #[test]
    fn cold_water_never_activates() {
        let schedule = TemperatureSchedule::constant(30.0);
        let mut seq = sequencer(&[1.2, 1.6], Topology::Independent);
        assert!(run_events(&mut seq, &schedule, 0.01, 300.0).is_empty());
        assert!(seq.settled(&schedule, 300.0));
    }

    #[test]
    fn thinner_rear_muscle_snaps_first() {
        let schedule = TemperatureSchedule::constant(60.0);
        for topology in [Topology::Independent, Topology::Series] {
            let mut seq = sequencer(&[1.2, 1.6], topology);
            let snaps: Vec<_> = run_events(&mut seq, &schedule, 0.005, 200.0)
                .into_iter()
                .filter_map(|e| match e {
                    ActuationEvent::Snap(s) => Some(s),
                    _ => None,
                })
                .collect();
            assert_eq!(snaps.len(), 2);
            assert_eq!(snaps[0].pair_id, 0);
            assert!(snaps[0].time < snaps[1].time);
        }
    }

    #[test]
    fn series_gate_delays_front_clock() {
        let schedule = TemperatureSchedule::constant(60.0);
        let mut seq = sequencer(&[1.6, 1.2], Topology::Series);
        let ev = run_events(&mut seq, &schedule, 0.01, 300.0);
        let snaps: Vec<_> = ev
            .iter()
            .filter_map(|e| match e {
                ActuationEvent::Snap(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(snaps.len(), 2);
        assert_eq!(snaps[0].pair_id, 0);
        // front clock starts at the rear snap, so the gap is at least its activation time
        let front_tau = activation_time(&spec(1.2, "VeroWhitePlus", MuscleOrientation::ForwardDriver), 60.0)
            .unwrap()
            .unwrap();
        assert!(snaps[1].time - snaps[0].time >= front_tau);
    }

    #[test]
    fn activation_time_is_honoured() {
        let schedule = TemperatureSchedule::constant(60.0);
        let mut seq = sequencer(&[1.2], Topology::Independent);
        let ev = run_events(&mut seq, &schedule, 0.01, 60.0);
        let ActuationEvent::MuscleActive { time, .. } = ev[0] else {
            panic!("expected activation first: {ev:?}");
        };
        assert!((time - 30.0).abs() < 1e-6, "{time}");
    }
}
