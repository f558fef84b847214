//! Randomized lab-session scripts shared by the integration and acceptance
//! tests.
#![allow(dead_code)]

use chrono::{DateTime, TimeZone, Utc};
use lightswim::core::{Algorithm, AlgorithmConfig, ParameterSpace};
use lightswim::session::{recover, JournalEvent, MeasurementInput, Session};
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub enum Op {
    Measure {
        robot: usize,
        input: MeasurementInput,
        overwrite: bool,
    },
    /// Measure every robot still missing, speeds from `speeds` cyclically.
    FillMissing {
        speeds: Vec<f64>,
    },
    Advance,
}

#[derive(Debug, Clone)]
pub struct Script {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub max_generations: u32,
    pub ops: Vec<Op>,
}

fn input() -> impl Strategy<Value = MeasurementInput> {
    prop_oneof![
        (0.0..20.0f64).prop_map(MeasurementInput::direct),
        (-1.0..0.0f64).prop_map(MeasurementInput::direct),
        (prop::collection::vec(-5.0..5.0f64, 1..6), prop::collection::vec(-5.0..5.0f64, 1..6))
            .prop_map(|(a, b)| MeasurementInput::slopes(a, b)),
        prop::collection::vec(-5.0..5.0f64, 1..4).prop_map(|a| MeasurementInput::slopes(a, vec![])),
    ]
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        6 => (0usize..9, input(), prop::bool::weighted(0.2))
            .prop_map(|(robot, input, overwrite)| Op::Measure { robot, input, overwrite }),
        2 => prop::collection::vec(0.0..15.0f64, 1..8).prop_map(|speeds| Op::FillMissing { speeds }),
        3 => Just(Op::Advance),
    ]
}

pub fn script() -> impl Strategy<Value = Script> {
    (prop_oneof![Just(Algorithm::Ga), Just(Algorithm::Pso)], any::<u64>(), 1u32..6, prop::collection::vec(op(), 0..80))
        .prop_map(|(algorithm, seed, max_generations, ops)| Script { algorithm, seed, max_generations, ops })
}

pub fn at(step: usize) -> DateTime<Utc> {
    Utc.timestamp_opt(1_750_000_000 + step as i64, 123_456_789).unwrap()
}

/// Run `script` against a live session, keeping every emitted event.
/// Rejected commands must leave the session untouched.
pub fn drive(script: &Script) -> (Session, Vec<JournalEvent>) {
    let (mut session, mut events) = Session::create(
        "script".into(),
        "script".into(),
        AlgorithmConfig::default_for(script.algorithm),
        ParameterSpace::default_space(),
        script.seed,
        script.max_generations,
        at(0),
    )
    .unwrap();
    for (step, op) in script.ops.iter().enumerate() {
        let t = at(step + 1);
        let before = session.clone();
        let result = match op {
            Op::Measure { robot, input, overwrite } => session.record_measurement(*robot, input, *overwrite, t),
            Op::Advance => session.advance(t),
            Op::FillMissing { speeds } => {
                let missing = session.current().map(|g| g.missing()).unwrap_or_default();
                for (k, robot) in missing.into_iter().enumerate() {
                    let input = MeasurementInput::direct(speeds[k % speeds.len()]);
                    events.extend(session.record_measurement(robot, &input, false, t).unwrap());
                }
                Ok(Vec::new())
            }
        };
        match result {
            Ok(ev) => events.extend(ev),
            Err(_) => assert_eq!(session, before, "rejected command changed state"),
        }
    }
    (session, events)
}

/// Replay the journal of `script` (through its JSON line form) and compare
/// with the live session.
pub fn replay_matches(script: &Script) -> Result<(), String> {
    let (live, events) = drive(script);
    let mut lines = String::new();
    for e in &events {
        lines.push_str(&serde_json::to_string(e).map_err(|e| e.to_string())?);
        lines.push('\n');
    }
    let parsed = lightswim::session::read_journal(lines.as_bytes());
    if parsed.stopped.is_some() || parsed.events != events {
        return Err(format!("journal lines did not round-trip: {:?}", parsed.stopped));
    }
    let recovered = recover(&parsed.events).map_err(|e| e.to_string())?;
    if recovered.stopped.is_some() || recovered.events_kept != events.len() {
        return Err(format!("replay stopped early: {:?}", recovered.stopped));
    }
    if recovered.session != live {
        return Err("recovered session differs from live session".into());
    }
    let again = recover(&parsed.events).map_err(|e| e.to_string())?;
    if again != recovered {
        return Err("recovery is not repeatable".into());
    }
    Ok(())
}
