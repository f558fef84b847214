use chrono::{DateTime, Utc};
use lightswim_core::{Algorithm, AlgorithmConfig, GaConfig, Genotype, Optimizer, ParameterSpace, PsoConfig};
use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::csv::f9;

pub const DEFAULT_MAX_GENERATIONS: u32 = 5;

/// Speed of one robot from its signed per-run slopes in the two scan
/// directions: the larger of the two absolute direction means.
pub fn compute_speed(slopes_a: &[f64], slopes_b: &[f64]) -> Result<f64, SessionError> {
    fn abs_mean(xs: &[f64], which: &str) -> Result<f64, SessionError> {
        if xs.is_empty() {
            return Err(SessionError::InvalidRequest(format!("{which} has no slopes")));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(SessionError::InvalidRequest(format!("{which} contains a non-finite slope")));
        }
        Ok((xs.iter().sum::<f64>() / xs.len() as f64).abs())
    }
    Ok(abs_mean(slopes_a, "slopes_dir_a")?.max(abs_mean(slopes_b, "slopes_dir_b")?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Collecting,
    Complete,
}

/// Operator input for one robot: both slope lists, or a direct speed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementInput {
    #[serde(default)]
    pub slopes_dir_a: Vec<f64>,
    #[serde(default)]
    pub slopes_dir_b: Vec<f64>,
    #[serde(default)]
    pub speed: Option<f64>,
}

impl MeasurementInput {
    pub fn slopes(a: Vec<f64>, b: Vec<f64>) -> Self {
        MeasurementInput { slopes_dir_a: a, slopes_dir_b: b, speed: None }
    }

    pub fn direct(speed: f64) -> Self {
        MeasurementInput { speed: Some(speed), ..Default::default() }
    }

    fn resolve(&self) -> Result<f64, SessionError> {
        let has_slopes = !(self.slopes_dir_a.is_empty() && self.slopes_dir_b.is_empty());
        match (has_slopes, self.speed) {
            (true, Some(_)) => {
                Err(SessionError::InvalidRequest("give either slope lists or a direct speed, not both".into()))
            }
            (true, None) => compute_speed(&self.slopes_dir_a, &self.slopes_dir_b),
            (false, Some(s)) if s.is_finite() && s >= 0.0 => Ok(s),
            (false, Some(s)) => {
                Err(SessionError::InvalidRequest(format!("direct speed must be finite and nonnegative, got {s}")))
            }
            (false, None) => Err(SessionError::InvalidRequest("measurement has neither slopes nor a speed".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub robot_index: usize,
    pub slopes_dir_a: Vec<f64>,
    pub slopes_dir_b: Vec<f64>,
    pub speed: f64,
    pub entered_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub genotypes: Vec<Genotype>,
    pub measurements: Vec<Option<MeasurementRecord>>,
    /// Speeds were handed to the optimizer.
    pub completed: bool,
}

impl GenerationRecord {
    pub fn missing(&self) -> Vec<usize> {
        self.measurements.iter().enumerate().filter(|(_, m)| m.is_none()).map(|(i, _)| i).collect()
    }

    /// `(robot_index, speed)` of the fastest measured robot, lowest index on
    /// ties.
    pub fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, m) in self.measurements.iter().enumerate() {
            if let Some(m) = m {
                if best.is_none_or(|(_, s)| m.speed > s) {
                    best = Some((i, m.speed));
                }
            }
        }
        best
    }
}

/// One journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEvent {
    pub seq: u64,
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    SessionCreated {
        id: String,
        name: String,
        config: AlgorithmConfig,
        space: ParameterSpace,
        seed: u64,
        max_generations: u32,
    },
    GenerationProposed {
        generation: u32,
        genotypes: Vec<Genotype>,
    },
    MeasurementRecorded {
        generation: u32,
        robot_index: usize,
        slopes_dir_a: Vec<f64>,
        slopes_dir_b: Vec<f64>,
        speed: f64,
        overwrite: bool,
    },
    GenerationCompleted {
        generation: u32,
        speeds: Vec<f64>,
    },
    SessionCompleted {
        generations: u32,
    },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::SessionCreated { .. } => "session_created",
            EventBody::GenerationProposed { .. } => "generation_proposed",
            EventBody::MeasurementRecorded { .. } => "measurement_recorded",
            EventBody::GenerationCompleted { .. } => "generation_completed",
            EventBody::SessionCompleted { .. } => "session_completed",
        }
    }
}

/// Body of a create call. `config` holds the algorithm's fields only and may
/// be partial; missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub name: String,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub config: Option<serde_json::Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub max_generations: Option<u32>,
    #[serde(default)]
    pub space: Option<ParameterSpace>,
}

impl CreateRequest {
    pub fn new(name: impl Into<String>, algorithm: Algorithm) -> Self {
        CreateRequest { name: name.into(), algorithm, config: None, seed: None, max_generations: None, space: None }
    }

    pub fn algorithm_config(&self) -> Result<AlgorithmConfig, SessionError> {
        let mut value = self.config.clone().unwrap_or_else(|| serde_json::json!({}));
        if let Some(obj) = value.as_object_mut() {
            if let Some(tag) = obj.remove("algorithm") {
                if tag.as_str() != Some(self.algorithm.as_str()) {
                    return Err(SessionError::InvalidConfig {
                        field: "algorithm".into(),
                        message: format!("config is tagged {tag} but algorithm is {}", self.algorithm.as_str()),
                    });
                }
            }
        }
        let bad = |e: serde_json::Error| SessionError::InvalidConfig { field: "config".into(), message: e.to_string() };
        let config = match self.algorithm {
            Algorithm::Ga => AlgorithmConfig::Ga(serde_json::from_value::<GaConfig>(value).map_err(bad)?),
            Algorithm::Pso => AlgorithmConfig::Pso(serde_json::from_value::<PsoConfig>(value).map_err(bad)?),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub name: String,
    pub config: AlgorithmConfig,
    pub space: ParameterSpace,
    pub seed: u64,
    pub max_generations: u32,
    pub status: SessionStatus,
    pub created_at: DateTime<Utc>,
    pub generations: Vec<GenerationRecord>,
    pub optimizer: Optimizer,
    pub last_seq: u64,
}

impl Session {
    /// A new session with generation 0 proposed, and the events recording
    /// it.
    #[allow(clippy::too_many_arguments)]
    pub fn create(
        id: String,
        name: String,
        config: AlgorithmConfig,
        space: ParameterSpace,
        seed: u64,
        max_generations: u32,
        at: DateTime<Utc>,
    ) -> Result<(Session, Vec<JournalEvent>), SessionError> {
        if name.trim().is_empty() {
            return Err(SessionError::InvalidConfig { field: "name".into(), message: "must not be empty".into() });
        }
        if max_generations == 0 {
            return Err(SessionError::InvalidConfig {
                field: "max_generations".into(),
                message: "must be at least 1".into(),
            });
        }
        let created = JournalEvent {
            seq: 1,
            at,
            body: EventBody::SessionCreated { id, name, config, space, seed, max_generations },
        };
        let mut session = Session::from_created(&created)?;
        let proposed = session.propose(at)?;
        Ok((session, vec![created, proposed]))
    }

    /// State right after a `session_created` event, before any proposal.
    pub fn from_created(event: &JournalEvent) -> Result<Session, SessionError> {
        let EventBody::SessionCreated { id, name, config, space, seed, max_generations } = &event.body else {
            return Err(SessionError::Journal(format!("first event is {}, not session_created", event.body.kind())));
        };
        if event.seq != 1 {
            return Err(SessionError::Journal(format!("session_created has seq {}", event.seq)));
        }
        let optimizer = Optimizer::new(space.clone(), config.clone(), *seed)?;
        Ok(Session {
            id: id.clone(),
            name: name.clone(),
            config: config.clone(),
            space: space.clone(),
            seed: *seed,
            max_generations: *max_generations,
            status: SessionStatus::Collecting,
            created_at: event.at,
            generations: Vec::new(),
            optimizer,
            last_seq: 1,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm()
    }

    pub fn population(&self) -> usize {
        self.config.population()
    }

    pub fn current(&self) -> Option<&GenerationRecord> {
        self.generations.last()
    }

    /// The current generation can be advanced.
    pub fn completable(&self) -> bool {
        self.status == SessionStatus::Collecting
            && self.current().is_some_and(|g| !g.completed && g.measurements.iter().all(Option::is_some))
    }

    /// Record one robot's measurement in the current generation.
    pub fn record_measurement(
        &mut self,
        robot_index: usize,
        input: &MeasurementInput,
        overwrite: bool,
        at: DateTime<Utc>,
    ) -> Result<Vec<JournalEvent>, SessionError> {
        Ok(vec![self.measure(robot_index, input, overwrite, at)?])
    }

    /// Feed the current generation's speeds to the optimizer, then propose
    /// the next generation or finish the session.
    pub fn advance(&mut self, at: DateTime<Utc>) -> Result<Vec<JournalEvent>, SessionError> {
        let mut next = self.clone();
        let mut events = vec![next.complete(at)?];
        if next.generations.len() < next.max_generations as usize {
            events.push(next.propose(at)?);
        } else {
            events.push(next.finish(at)?);
        }
        *self = next;
        Ok(events)
    }

    /// Re-execute the command behind `event` and check that it reproduces
    /// the event exactly. On error `self` may be partially updated.
    pub fn apply(&mut self, event: &JournalEvent) -> Result<(), SessionError> {
        let produced = match &event.body {
            EventBody::SessionCreated { .. } => {
                return Err(SessionError::Journal(format!("session_created repeated at seq {}", event.seq)))
            }
            EventBody::GenerationProposed { .. } => self.propose(event.at)?,
            EventBody::MeasurementRecorded { robot_index, slopes_dir_a, slopes_dir_b, speed, overwrite, .. } => {
                let input = if slopes_dir_a.is_empty() && slopes_dir_b.is_empty() {
                    MeasurementInput::direct(*speed)
                } else {
                    MeasurementInput::slopes(slopes_dir_a.clone(), slopes_dir_b.clone())
                };
                self.measure(*robot_index, &input, *overwrite, event.at)?
            }
            EventBody::GenerationCompleted { .. } => self.complete(event.at)?,
            EventBody::SessionCompleted { .. } => self.finish(event.at)?,
        };
        if &produced != event {
            return Err(SessionError::Journal(format!(
                "event {} ({}) does not match its replay",
                event.seq,
                event.body.kind()
            )));
        }
        Ok(())
    }

    fn emit(&mut self, at: DateTime<Utc>, body: EventBody) -> JournalEvent {
        self.last_seq += 1;
        JournalEvent { seq: self.last_seq, at, body }
    }

    fn propose(&mut self, at: DateTime<Utc>) -> Result<JournalEvent, SessionError> {
        if self.status == SessionStatus::Complete {
            return Err(SessionError::StateConflict("session is complete".into()));
        }
        if self.current().is_some_and(|g| !g.completed) {
            return Err(SessionError::StateConflict("a generation is still collecting".into()));
        }
        if self.generations.len() >= self.max_generations as usize {
            return Err(SessionError::StateConflict("all generations have been proposed".into()));
        }
        let genotypes = self.optimizer.ask()?;
        let generation = self.generations.len() as u32;
        self.generations.push(GenerationRecord {
            generation,
            genotypes: genotypes.clone(),
            measurements: vec![None; genotypes.len()],
            completed: false,
        });
        Ok(self.emit(at, EventBody::GenerationProposed { generation, genotypes }))
    }

    fn measure(
        &mut self,
        robot_index: usize,
        input: &MeasurementInput,
        overwrite: bool,
        at: DateTime<Utc>,
    ) -> Result<JournalEvent, SessionError> {
        if self.status == SessionStatus::Complete {
            return Err(SessionError::StateConflict("session is complete".into()));
        }
        let Some(current) = self.generations.last().filter(|g| !g.completed) else {
            return Err(SessionError::StateConflict("no generation is collecting".into()));
        };
        if robot_index >= current.measurements.len() {
            return Err(SessionError::InvalidRequest(format!(
                "robot index {robot_index} out of range 0..{}",
                current.measurements.len()
            )));
        }
        if current.measurements[robot_index].is_some() && !overwrite {
            return Err(SessionError::StateConflict(format!(
                "robot {robot_index} already has a measurement; pass overwrite=true to replace it"
            )));
        }
        let speed = input.resolve()?;
        let generation = current.generation;
        let current = self.generations.last_mut().expect("checked above");
        current.measurements[robot_index] = Some(MeasurementRecord {
            robot_index,
            slopes_dir_a: input.slopes_dir_a.clone(),
            slopes_dir_b: input.slopes_dir_b.clone(),
            speed,
            entered_at: at,
        });
        Ok(self.emit(
            at,
            EventBody::MeasurementRecorded {
                generation,
                robot_index,
                slopes_dir_a: input.slopes_dir_a.clone(),
                slopes_dir_b: input.slopes_dir_b.clone(),
                speed,
                overwrite,
            },
        ))
    }

    fn complete(&mut self, at: DateTime<Utc>) -> Result<JournalEvent, SessionError> {
        if self.status == SessionStatus::Complete {
            return Err(SessionError::StateConflict("session is already complete".into()));
        }
        let Some(current) = self.generations.last().filter(|g| !g.completed) else {
            return Err(SessionError::StateConflict("no generation is collecting".into()));
        };
        let missing = current.missing();
        if !missing.is_empty() {
            return Err(SessionError::Incomplete { missing });
        }
        let speeds: Vec<f64> = current.measurements.iter().flatten().map(|m| m.speed).collect();
        let generation = current.generation;
        self.optimizer.tell(&speeds)?;
        self.generations.last_mut().expect("checked above").completed = true;
        Ok(self.emit(at, EventBody::GenerationCompleted { generation, speeds }))
    }

    fn finish(&mut self, at: DateTime<Utc>) -> Result<JournalEvent, SessionError> {
        if self.status == SessionStatus::Complete {
            return Err(SessionError::StateConflict("session is already complete".into()));
        }
        if self.generations.len() < self.max_generations as usize || self.current().is_some_and(|g| !g.completed) {
            return Err(SessionError::StateConflict("generations remain to be run".into()));
        }
        self.status = SessionStatus::Complete;
        let generations = self.generations.len() as u32;
        Ok(self.emit(at, EventBody::SessionCompleted { generations }))
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            name: self.name.clone(),
            algorithm: self.algorithm(),
            status: self.status.clone(),
            current_generation: self.current().map_or(0, |g| g.generation),
            max_generations: self.max_generations,
            created_at: self.created_at,
            best_speed: self.optimizer.best().map(|(_, f)| f),
        }
    }

    pub fn view(&self) -> SessionView {
        let robots = self
            .current()
            .map(|g| {
                g.genotypes
                    .iter()
                    .zip(&g.measurements)
                    .enumerate()
                    .map(|(i, (genotype, m))| RobotView {
                        robot_index: i,
                        genotype: genotype.clone(),
                        values: self.space.values_of(genotype),
                        labels: self.space.labels(genotype),
                        measurement: m.clone(),
                    })
                    .collect()
            })
            .unwrap_or_default();
        let history = self
            .generations
            .iter()
            .filter(|g| g.completed)
            .map(|g| {
                let (best_robot_index, best_speed) = g.best().expect("completed generations are fully measured");
                GenerationSummary { generation: g.generation, best_robot_index, best_speed }
            })
            .collect();
        SessionView {
            summary: self.summary(),
            seed: self.seed,
            config: self.config.clone(),
            population: self.population(),
            dimensions: self
                .space
                .dimensions()
                .iter()
                .map(|d| DimensionView { name: d.name.clone(), unit: d.unit.clone() })
                .collect(),
            measured: self.current().map_or(0, |g| g.measurements.iter().flatten().count()),
            missing: self.current().map(GenerationRecord::missing).unwrap_or_default(),
            completable: self.completable(),
            robots,
            history,
        }
    }

    /// One row per proposed robot: generation, robot index, raw parameter
    /// values, speed (blank until measured) and whether the row is its
    /// generation's fastest.
    pub fn export_csv(&self) -> String {
        let mut out = String::from("generation,robot_index");
        for d in self.space.dimensions() {
            out.push(',');
            out.push_str(&d.name);
        }
        out.push_str(",speed,is_generation_best\n");
        for g in &self.generations {
            let best = g.best().map(|(i, _)| i);
            for (i, (genotype, m)) in g.genotypes.iter().zip(&g.measurements).enumerate() {
                out.push_str(&format!("{},{}", g.generation, i));
                for v in self.space.values_of(genotype) {
                    out.push(',');
                    out.push_str(&f9(v));
                }
                out.push(',');
                if let Some(m) = m {
                    out.push_str(&f9(m.speed));
                }
                out.push_str(if best == Some(i) { ",true\n" } else { ",false\n" });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub id: String,
    pub name: String,
    pub algorithm: Algorithm,
    pub status: SessionStatus,
    pub current_generation: u32,
    pub max_generations: u32,
    pub created_at: DateTime<Utc>,
    pub best_speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionView {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobotView {
    pub robot_index: usize,
    pub genotype: Genotype,
    pub values: Vec<f64>,
    pub labels: Vec<String>,
    pub measurement: Option<MeasurementRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationSummary {
    pub generation: u32,
    pub best_robot_index: usize,
    pub best_speed: f64,
}

/// Full session document served to the console.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    #[serde(flatten)]
    pub summary: SessionSummary,
    pub seed: u64,
    pub config: AlgorithmConfig,
    pub population: usize,
    pub dimensions: Vec<DimensionView>,
    pub measured: usize,
    pub missing: Vec<usize>,
    pub completable: bool,
    pub robots: Vec<RobotView>,
    /// Fastest robot of each completed generation.
    pub history: Vec<GenerationSummary>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t(s: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + s, 0).unwrap()
    }

    fn new_session(max_generations: u32) -> (Session, Vec<JournalEvent>) {
        Session::create(
            "s1".into(),
            "bench".into(),
            AlgorithmConfig::default_for(Algorithm::Ga),
            ParameterSpace::default_space(),
            42,
            max_generations,
            t(0),
        )
        .unwrap()
    }

    #[test]
    fn speed_rule() {
        assert_eq!(compute_speed(&[1.0, 1.1, 0.9, 1.0, 1.0], &[-0.2; 5]).unwrap(), 1.0);
        assert_eq!(compute_speed(&[0.0; 5], &[0.0; 5]).unwrap(), 0.0);
        assert_eq!(compute_speed(&[-2.0, -2.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert!(compute_speed(&[], &[1.0]).is_err());
        assert!(compute_speed(&[1.0], &[]).is_err());
    }

    #[test]
    fn creation_proposes_distinct_generation_zero() {
        let (s, events) = new_session(5);
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].body.kind(), "session_created");
        assert_eq!(events[1].body.kind(), "generation_proposed");
        let g = &s.current().unwrap().genotypes;
        assert_eq!(g.len(), 8);
        let distinct: std::collections::BTreeSet<_> = g.iter().collect();
        assert_eq!(distinct.len(), 8);
        assert_eq!(new_session(5).0, s);
    }

    #[test]
    fn measurement_rules() {
        let (mut s, _) = new_session(5);
        s.record_measurement(0, &MeasurementInput::direct(10.0), false, t(1)).unwrap();
        assert!(matches!(
            s.record_measurement(0, &MeasurementInput::direct(3.0), false, t(2)),
            Err(SessionError::StateConflict(_))
        ));
        s.record_measurement(0, &MeasurementInput::direct(3.0), true, t(2)).unwrap();
        assert_eq!(s.current().unwrap().measurements[0].as_ref().unwrap().speed, 3.0);
        assert!(matches!(
            s.record_measurement(8, &MeasurementInput::direct(1.0), false, t(3)),
            Err(SessionError::InvalidRequest(_))
        ));
        assert!(s.record_measurement(1, &MeasurementInput::direct(-1.0), false, t(3)).is_err());
        let both = MeasurementInput { speed: Some(1.0), ..MeasurementInput::slopes(vec![1.0], vec![1.0]) };
        assert!(s.record_measurement(1, &both, false, t(3)).is_err());
        for i in 1..7 {
            s.record_measurement(
                i,
                &MeasurementInput::slopes(vec![1.0, 1.1, 0.9, 1.0, 1.0], vec![-0.2; 5]),
                false,
                t(4),
            )
            .unwrap();
            assert!(!s.completable());
        }
        match s.advance(t(5)) {
            Err(SessionError::Incomplete { missing }) => assert_eq!(missing, vec![7]),
            other => panic!("{other:?}"),
        }
        s.record_measurement(7, &MeasurementInput::direct(0.5), false, t(6)).unwrap();
        assert!(s.completable());
    }

    #[test]
    fn runs_to_completion() {
        let (mut s, mut journal) = new_session(5);
        let mut seen = std::collections::BTreeSet::new();
        for gen in 0..5 {
            assert_eq!(s.current().unwrap().generation, gen);
            for g in &s.current().unwrap().genotypes {
                assert!(seen.insert(g.clone()), "genotype repeated across generations");
            }
            for i in 0..8 {
                let speed = (gen as f64) + i as f64 * 0.25;
                journal.extend(s.record_measurement(i, &MeasurementInput::direct(speed), false, t(10)).unwrap());
            }
            journal.extend(s.advance(t(11)).unwrap());
        }
        assert_eq!(s.status, SessionStatus::Complete);
        assert_eq!(journal.last().unwrap().body.kind(), "session_completed");
        assert!(matches!(s.advance(t(12)), Err(SessionError::StateConflict(_))));
        assert!(s.record_measurement(0, &MeasurementInput::direct(1.0), true, t(12)).is_err());
        assert!(journal.iter().enumerate().all(|(i, e)| e.seq == i as u64 + 1));
        let measured = journal.iter().filter(|e| e.body.kind() == "measurement_recorded").count();
        assert_eq!(measured, 40);

        let csv = s.export_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 41);
        assert_eq!(
            lines[0],
            "generation,robot_index,laser_power,scan_frequency,polarization_angle,thickness,length,curl_length,\
             tail_direction,dye_concentration,speed,is_generation_best"
        );
        assert!(lines[8].ends_with(",1.75,true"));
        assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 5);
        let view = s.view();
        assert_eq!(view.history.len(), 5);
        assert_eq!(view.history[4].best_speed, 5.75);
    }

    #[test]
    fn ties_flag_lowest_index() {
        let (mut s, _) = new_session(1);
        for i in 0..8 {
            s.record_measurement(i, &MeasurementInput::direct(if i == 2 || i == 5 { 4.0 } else { 1.0 }), false, t(1))
                .unwrap();
        }
        let csv = s.export_csv();
        let flagged: Vec<&str> = csv.lines().filter(|l| l.ends_with(",true")).collect();
        assert_eq!(flagged.len(), 1);
        assert!(flagged[0].starts_with("0,2,"));
        let unmeasured = new_session(1).0.export_csv();
        assert!(unmeasured.lines().nth(1).unwrap().ends_with(",,false"));
    }

    #[test]
    fn journal_event_line_format() {
        let (mut s, _) = new_session(5);
        let ev = s
            .record_measurement(3, &MeasurementInput::slopes(vec![1.0, 1.2], vec![-0.5, -0.4]), false, t(1))
            .unwrap()
            .remove(0);
        let line = serde_json::to_string(&ev).unwrap();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["seq"], 3);
        assert_eq!(v["kind"], "measurement_recorded");
        assert_eq!(v["at"], "2023-11-14T22:13:21Z");
        assert_eq!(v["payload"]["robot_index"], 3);
        assert_eq!(serde_json::from_str::<JournalEvent>(&line).unwrap(), ev);
    }

    #[test]
    fn create_request_config() {
        let mut req = CreateRequest::new("x", Algorithm::Pso);
        req.config = Some(serde_json::json!({"w": 0.4, "c2": 1.0}));
        match req.algorithm_config().unwrap() {
            AlgorithmConfig::Pso(c) => assert_eq!((c.w, c.c1, c.c2), (0.4, 0.2, 1.0)),
            _ => panic!(),
        }
        req.config = Some(serde_json::json!({"swarm": 1}));
        match req.algorithm_config() {
            Err(SessionError::InvalidConfig { field, .. }) => assert_eq!(field, "swarm"),
            other => panic!("{other:?}"),
        }
        req.config = Some(serde_json::json!({"bogus": 1}));
        assert!(matches!(req.algorithm_config(), Err(SessionError::InvalidConfig { .. })));
        req.config = Some(serde_json::json!({"algorithm": "ga"}));
        assert!(matches!(req.algorithm_config(), Err(SessionError::InvalidConfig { .. })));
    }
}
