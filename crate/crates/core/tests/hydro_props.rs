use proptest::prelude::*;

use snapswim::hydro::{integrate, snap_impulse, FinSlot, ScheduledImpulse};
use snapswim::mech::SnapDirection;
use snapswim::{BodyState, Fin, HydroParams, SnapEvent};

fn params() -> HydroParams {
    HydroParams {
        body_mass: 0.05,
        rotational_inertia: 0.05 * (0.1 * 0.1 + 0.04 * 0.04) / 12.0,
        water_density: 1000.0,
        body_drag_coeff: 0.75,
        rotational_drag_coeff: 2.9e-4,
        reference_area: 4.5e-4,
        snap_duration: 0.05,
        efficiency: 0.5,
        linear_drag: 3e-3,
        rotational_damping: 6e-6,
    }
}

fn fins(slots: &[FinSlot], area: f64) -> Vec<Fin> {
    slots
        .iter()
        .map(|&s| Fin::in_slot(s, 0.03, -0.03, 0.025, area, 2.0))
        .collect()
}

fn layout() -> impl Strategy<Value = Vec<FinSlot>> {
    prop::sample::subsequence(FinSlot::ALL.to_vec(), 0..=4)
}

fn snap(time: f64, energy: f64, stroke: f64, direction: SnapDirection) -> SnapEvent {
    SnapEvent {
        time,
        pair_id: 0,
        direction,
        released_energy: energy,
        stroke_length: stroke,
    }
}

fn pulses() -> impl Strategy<Value = Vec<(f64, f64, f64, bool)>> {
    prop::collection::vec((0.0..2.0f64, 0.05..2.0f64, 1.0..6.0f64, any::<bool>()), 1..4)
}

fn schedule(spec: &[(f64, f64, f64, bool)], fins: &[Fin], p: &HydroParams) -> Vec<ScheduledImpulse<f64>> {
    spec.iter()
        .map(|&(t, e, s, fwd)| {
            let dir = if fwd {
                SnapDirection::Forward
            } else {
                SnapDirection::Reverse
            };
            ScheduledImpulse {
                start: t,
                impulse: snap_impulse(&snap(t, e, s, dir), fins, p),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirrored_layout_mirrors_trajectory(slots in layout(), spec in pulses(), area in 2e-4..1e-3f64) {
        let p = params();
        let mirrored: Vec<FinSlot> = slots.iter().map(|s| s.mirrored()).collect();
        let a = integrate(BodyState::default(), &p, &schedule(&spec, &fins(&slots, area), &p), 1e-3, 20.0).unwrap();
        let b = integrate(BodyState::default(), &p, &schedule(&spec, &fins(&mirrored, area), &p), 1e-3, 20.0).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (sa, sb) in a.iter().zip(&b) {
            let m = sa.state.mirrored();
            for (u, v) in [(m.x, sb.state.x), (m.y, sb.state.y), (m.theta, sb.state.theta)] {
                prop_assert!((u - v).abs() <= 1e-9, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn symmetric_layouts_swim_straight(
        spec in pulses(),
        pick in prop::sample::select(vec![0usize, 1, 2]),
    ) {
        use FinSlot::*;
        let slots: &[FinSlot] = [&[RearLeft, RearRight][..], &[FrontLeft, FrontRight], &FinSlot::ALL][pick];
        let p = params();
        let traj = integrate(BodyState::default(), &p, &schedule(&spec, &fins(slots, 5e-4), &p), 1e-3, 20.0).unwrap();
        let end = traj.last().unwrap().state;
        prop_assert!(end.theta.to_degrees().abs() < 0.5);
    }

    #[test]
    fn kinetic_energy_stays_within_budget(
        slots in layout(), energy in 0.01..2.0f64, stroke in 1.0..6.0f64, area in 1e-4..2e-3f64
    ) {
        let p = params();
        let ev = snap(0.0, energy, stroke, SnapDirection::Forward);
        let pulse = ScheduledImpulse { start: 0.0, impulse: snap_impulse(&ev, &fins(&slots, area), &p) };
        let traj = integrate(BodyState::default(), &p, &[pulse], 1e-3, 5.0).unwrap();
        let budget = p.efficiency * energy * 1e-3;
        let ke = traj.iter().map(|s| s.state.kinetic_energy(&p)).fold(0.0, f64::max);
        prop_assert!(ke <= budget * (1.0 + 1e-9), "{ke} > {budget}");
    }

    #[test]
    fn missing_left_fin_turns_left(spec in pulses(), front in any::<bool>()) {
        use FinSlot::*;
        let slots: Vec<FinSlot> = if front {
            vec![FrontRight, RearLeft, RearRight]
        } else {
            vec![FrontLeft, FrontRight, RearRight]
        };
        let spec: Vec<_> = spec.into_iter().map(|(t, e, s, _)| (t, e, s, true)).collect();
        let p = params();
        let traj = integrate(BodyState::default(), &p, &schedule(&spec, &fins(&slots, 5e-4), &p), 1e-3, 20.0).unwrap();
        prop_assert!(traj.last().unwrap().state.theta > 0.0);
    }
}

#[test]
fn generic_core_runs_in_f32() {
    use snapswim::hydro::Fin as GFin;
    let p = snapswim::HydroParamsF32 {
        body_mass: 0.05,
        rotational_inertia: 4.8e-5,
        water_density: 1000.0,
        body_drag_coeff: 0.75,
        rotational_drag_coeff: 2.9e-4,
        reference_area: 4.5e-4,
        snap_duration: 0.05,
        efficiency: 0.5,
        linear_drag: 3e-3,
        rotational_damping: 6e-6,
    };
    let f32_fins: Vec<GFin<f32>> = [FinSlot::RearLeft, FinSlot::RearRight]
        .iter()
        .map(|&s| GFin::in_slot(s, 0.03, -0.03, 0.025, 5e-4, 2.0))
        .collect();
    let ev = snapswim::actuation::SnapEvent {
        time: 0.0f32,
        pair_id: 0,
        direction: SnapDirection::Forward,
        released_energy: 0.585,
        stroke_length: 4.6,
    };
    let pulse = ScheduledImpulse {
        start: 0.0,
        impulse: snap_impulse(&ev, &f32_fins, &p),
    };
    let traj = integrate(snapswim::BodyStateF32::default(), &p, &[pulse], 1e-3, 10.0).unwrap();
    let end = traj.last().unwrap().state;
    assert!(end.x > 0.0 && end.y == 0.0 && end.theta == 0.0);
}
