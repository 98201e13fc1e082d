use proptest::prelude::*;

use snapswim::actuation::{chain_condition, reverse_condition, Phase, Topology};
use snapswim::hydro::FinSlot;
use snapswim::mission::{self, candidate_from_config, emit_design, rescore, Mission, Statement, SynthesisOptions};
use snapswim::muscle::can_trigger;
use snapswim::scenario::{Calibration, Scenario, ScenarioConfig};

fn options() -> SynthesisOptions {
    SynthesisOptions::staged(Calibration::embedded())
}

fn check_predicates(text: &str) {
    let sc = Scenario::parse(text).unwrap();
    let pairs = &sc.design.pairs;
    let profiles: Vec<_> = pairs.iter().map(|p| p.truss.barriers().unwrap()).collect();
    for (p, prof) in pairs.iter().zip(&profiles) {
        assert!(can_trigger(&p.forward_muscle, prof), "pair {} cannot trigger", p.id);
        if p.reverse_muscle.is_some() {
            let mut snapped = p.clone();
            snapped.phase = Phase::Snapped;
            snapped.shuttle_position = prof.second_stable();
            assert!(reverse_condition(&snapped, prof), "pair {} cannot reverse", p.id);
        }
    }
    if sc.design.topology == Topology::Series {
        for i in 1..pairs.len() {
            assert!(chain_condition(
                &pairs[i - 1],
                &profiles[i - 1],
                &pairs[i],
                &profiles[i]
            ));
        }
    }
}

#[test]
fn turn_mission_round_trips_and_mirrors() {
    let opts = options();
    let m = mission::parse("FORWARD 0.5; TURN 23").unwrap();
    let report = mission::synthesize_with(&m, &opts).unwrap();
    assert!(report.evaluated > 0);

    for cand in report.ranking.iter().take(3) {
        let text = emit_design(cand, &m, &opts);
        check_predicates(&text);
        let cfg = ScenarioConfig::parse(&text).unwrap();
        let back = candidate_from_config(&cfg).unwrap();
        assert_eq!(&back, cand);
        let again = rescore(&m, &back, &opts).unwrap();
        assert!((again - cand.score).abs() < 1e-9, "{again} vs {}", cand.score);
    }

    let mirrored = mission::synthesize_with(&m.mirrored(), &opts).unwrap();
    let mut want: Vec<FinSlot> = report.best.layout.iter().map(|s| s.mirrored()).collect();
    want.sort();
    assert_eq!(mirrored.best.layout, want);
    assert!((mirrored.best.score - report.best.score).abs() < 1e-9);
}

#[test]
fn synthesis_is_deterministic() {
    let opts = options();
    let m = mission::parse("TURN 21; TURN -21").unwrap();
    let a = mission::synthesize_with(&m, &opts).unwrap();
    let b = mission::synthesize_with(&m, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(emit_design(&a.best, &m, &opts), emit_design(&b.best, &m, &opts));
    check_predicates(&emit_design(&a.best, &m, &opts));
}

fn statement() -> impl Strategy<Value = Statement> {
    prop_oneof![
        (0.01..10.0f64).prop_map(Statement::Forward),
        (-180.0..180.0f64).prop_map(Statement::Turn),
    ]
}

fn any_mission() -> impl Strategy<Value = Mission> {
    (
        prop::collection::vec(statement(), 1..6),
        any::<Option<usize>>(),
        any::<bool>(),
    )
        .prop_map(|(mut s, drop_at, ret)| {
            if let Some(i) = drop_at {
                let i = i % (s.len() + 1);
                s.insert(i, Statement::Drop);
            }
            if ret {
                s.push(Statement::Return);
            }
            Mission { statements: s }
        })
}

proptest! {
    #[test]
    fn mission_text_round_trips(m in any_mission()) {
        prop_assert_eq!(mission::parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn mirroring_twice_is_identity(m in any_mission()) {
        prop_assert_eq!(m.mirrored().mirrored(), m);
    }
}
