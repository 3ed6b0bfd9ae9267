//! Transport-independent session hub behind the JSON service protocol.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::activation::ActivationEvent;
use crate::geometry::{Point, Polygon};
use crate::scene::Scene;
use crate::simulator::{Command, SimConfig, Simulation};

/// Protocol version carried in every server message as `"v"`.
pub const PROTOCOL_VERSION: u32 = 1;
/// Outbox capacity; snapshots beyond it are dropped oldest first.
pub const DEFAULT_OUTBOX: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Steer { velocity: Point },
    SetSpeedCap { r: f64 },
    Reset {
        #[serde(default)]
        position: Option<Point>,
    },
    LoadPolygon { vertices: Vec<Point> },
}

impl ClientMessage {
    fn name(&self) -> &'static str {
        match self {
            Self::Steer { .. } => "steer",
            Self::SetSpeedCap { .. } => "set_speed_cap",
            Self::Reset { .. } => "reset",
            Self::LoadPolygon { .. } => "load_polygon",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventBody {
    /// A command was applied; `applied` is the value actually used.
    Ack {
        command: String,
        applied: serde_json::Value,
        clamped: bool,
    },
    Rejected { command: String, reason: String },
    Activation { event: ActivationEvent },
    Violation { covered: bool, visible: bool },
    PolygonLoaded {
        vertices: usize,
        diagonal_guards: usize,
        vertex_guards: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: u64,
    pub p_i: Point,
    pub velocity: Point,
    pub v_e: f64,
    pub r: f64,
    pub speed_cap: Option<f64>,
    pub guards: Vec<Point>,
    pub active: Vec<usize>,
    pub vertex_guards: Vec<Point>,
    pub triangle: usize,
    pub covered: bool,
    pub visible: bool,
    /// Polygon, deployment, triangle labels and critical regions; shared between
    /// snapshots until the configuration changes.
    pub layout: Arc<serde_json::Value>,
}

/// Everything needed to draw the current configuration.
pub fn layout(scene: &Scene, sim: &Simulation) -> serde_json::Value {
    let dep = &scene.deployment;
    serde_json::json!({
        "polygon": scene.polygon.vertices(),
        "triangles": scene.tri.triangles(),
        "diagonal_guards": dep.diagonal_guards.iter().map(|g| g.endpoints).collect::<Vec<_>>(),
        "vertex_guards": dep.vertex_guards.iter().map(|g| g.vertex).collect::<Vec<_>>(),
        "configuration": sim.activation().configuration(scene),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Snapshot {
        v: u32,
        session: u64,
        seq: u64,
        #[serde(flatten)]
        snapshot: Snapshot,
    },
    Event {
        v: u32,
        session: u64,
        seq: u64,
        #[serde(flatten)]
        body: EventBody,
    },
}

impl ServerMessage {
    pub fn seq(&self) -> u64 {
        match self {
            Self::Snapshot { seq, .. } | Self::Event { seq, .. } => *seq,
        }
    }

    pub fn is_snapshot(&self) -> bool {
        matches!(self, Self::Snapshot { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub version: &'static str,
    pub protocol: u32,
    pub sessions: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(u64),
    #[error("malformed message: {0}")]
    Malformed(String),
}

pub struct Session {
    id: u64,
    sim: Simulation,
    config: SimConfig,
    velocity: Point,
    speed_cap: Option<f64>,
    pending: VecDeque<ClientMessage>,
    outbox: VecDeque<ServerMessage>,
    capacity: usize,
    seq: u64,
    dropped: u64,
    layout: Option<Arc<serde_json::Value>>,
}

impl Session {
    fn new(id: u64, scene: Arc<Scene>, config: SimConfig, capacity: usize) -> Self {
        let start = start_point(&scene);
        Self {
            id,
            sim: Simulation::new(scene, config.clone(), start, 0.0),
            config,
            velocity: Point::default(),
            speed_cap: None,
            pending: VecDeque::new(),
            outbox: VecDeque::new(),
            capacity: capacity.max(1),
            seq: 0,
            dropped: 0,
            layout: None,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    /// Snapshots discarded by backpressure so far.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    fn push(&mut self, make: impl FnOnce(u64) -> ServerMessage) {
        self.seq += 1;
        let msg = make(self.seq);
        self.outbox.push_back(msg);
        while self.outbox.len() > self.capacity {
            match self.outbox.iter().take(self.outbox.len() - 1).position(ServerMessage::is_snapshot) {
                Some(i) => {
                    self.outbox.remove(i);
                    self.dropped += 1;
                }
                None => break,
            }
        }
    }

    fn event(&mut self, body: EventBody) {
        let session = self.id;
        self.push(|seq| ServerMessage::Event {
            v: PROTOCOL_VERSION,
            session,
            seq,
            body,
        });
    }

    fn max_speed(&self) -> f64 {
        match self.speed_cap {
            Some(r) => r * self.config.guard_speed,
            None => self.config.max_speed,
        }
    }

    fn apply(&mut self, msg: ClientMessage) -> Option<f64> {
        let name = msg.name().to_string();
        match msg {
            ClientMessage::Steer { velocity } => {
                if !velocity.is_finite() {
                    self.event(EventBody::Rejected {
                        command: name,
                        reason: "velocity must be finite".into(),
                    });
                    return None;
                }
                let cap = self.max_speed();
                let speed = velocity.norm();
                let clamped = speed > cap;
                let applied = if clamped {
                    if speed > 0.0 {
                        velocity * (cap / speed)
                    } else {
                        Point::default()
                    }
                } else {
                    velocity
                };
                self.velocity = applied;
                self.event(EventBody::Ack {
                    command: name,
                    applied: serde_json::json!({ "velocity": applied }),
                    clamped,
                });
                None
            }
            ClientMessage::SetSpeedCap { r } => {
                if !r.is_finite() {
                    self.event(EventBody::Rejected {
                        command: name,
                        reason: "r must be finite".into(),
                    });
                    return None;
                }
                let applied = r.max(0.0);
                self.speed_cap = Some(applied);
                let clamped = applied != r;
                self.event(EventBody::Ack {
                    command: name,
                    applied: serde_json::json!({ "r": applied }),
                    clamped,
                });
                let cap = self.max_speed();
                let speed = self.velocity.norm();
                if speed > cap {
                    self.velocity = self.velocity * (cap / speed);
                }
                Some(applied)
            }
            ClientMessage::Reset { position } => {
                let scene = Arc::clone(self.sim.scene());
                let start = match position {
                    Some(p) if scene.polygon.contains(p) => p,
                    _ => start_point(&scene),
                };
                let clamped = position.is_some_and(|p| p != start);
                self.sim = Simulation::new(scene, self.config.clone(), start, 0.0);
                self.velocity = Point::default();
                self.speed_cap = None;
                self.layout = None;
                self.event(EventBody::Ack {
                    command: name,
                    applied: serde_json::json!({ "position": start }),
                    clamped,
                });
                None
            }
            ClientMessage::LoadPolygon { vertices } => {
                match Polygon::load(vertices).map_err(|e| e.to_string()).and_then(|l| {
                    Scene::new(l.polygon).map_err(|e| e.to_string())
                }) {
                    Ok(scene) => {
                        let scene = Arc::new(scene);
                        let start = start_point(&scene);
                        self.event(EventBody::PolygonLoaded {
                            vertices: scene.polygon.len(),
                            diagonal_guards: scene.diagonal_guard_count(),
                            vertex_guards: scene.vertex_guard_count(),
                        });
                        self.sim = Simulation::new(scene, self.config.clone(), start, 0.0);
                        self.velocity = Point::default();
                        self.speed_cap = None;
                        self.layout = None;
                    }
                    Err(reason) => self.event(EventBody::Rejected { command: name, reason }),
                }
                None
            }
        }
    }

    /// Applies every queued command in order, then advances one step with the
    /// latest velocity and emits events followed by a snapshot.
    pub fn tick(&mut self) {
        let mut announce = None;
        while let Some(msg) = self.pending.pop_front() {
            if let Some(r) = self.apply(msg) {
                announce = Some(r);
            }
        }
        let cmd = Command {
            velocity: self.velocity,
            announce,
            teleport: None,
        };
        let rec = self.sim.step(&cmd);
        for event in rec.events.iter().cloned() {
            self.event(EventBody::Activation { event });
        }
        if !rec.covered || !rec.visible {
            self.event(EventBody::Violation {
                covered: rec.covered,
                visible: rec.visible,
            });
        }
        let scene = Arc::clone(self.sim.scene());
        if !rec.events.is_empty() {
            self.layout = None;
        }
        let layout = match &self.layout {
            Some(l) => Arc::clone(l),
            None => {
                let l = Arc::new(layout(&scene, &self.sim));
                self.layout = Some(Arc::clone(&l));
                l
            }
        };
        let snapshot = Snapshot {
            t: rec.t,
            step: rec.step,
            p_i: rec.p_i,
            velocity: self.velocity,
            v_e: rec.v_e,
            r: rec.r,
            speed_cap: self.speed_cap,
            guards: rec.guards,
            active: rec.active.clone(),
            vertex_guards: rec
                .active
                .iter()
                .map(|&g| scene.polygon.vertex(scene.deployment.vertex_guards[g].vertex))
                .collect(),
            triangle: rec.triangle,
            covered: rec.covered,
            visible: rec.visible,
            layout,
        };
        let session = self.id;
        self.push(|seq| ServerMessage::Snapshot {
            v: PROTOCOL_VERSION,
            session,
            seq,
            snapshot,
        });
    }

    pub fn drain(&mut self) -> Vec<ServerMessage> {
        self.outbox.drain(..).collect()
    }
}

fn start_point(scene: &Scene) -> Point {
    scene.tri.centroid(&scene.polygon, 0)
}

/// All live sessions.
pub struct Hub {
    scene: Arc<Scene>,
    config: SimConfig,
    capacity: usize,
    next_id: u64,
    sessions: BTreeMap<u64, Session>,
}

impl Hub {
    pub fn new(scene: Arc<Scene>, config: SimConfig) -> Self {
        Self {
            scene,
            config,
            capacity: DEFAULT_OUTBOX,
            next_id: 1,
            sessions: BTreeMap::new(),
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity.max(1);
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn open(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        let session = Session::new(id, Arc::clone(&self.scene), self.config.clone(), self.capacity);
        self.sessions.insert(id, session);
        id
    }

    pub fn close(&mut self, id: u64) -> bool {
        self.sessions.remove(&id).is_some()
    }

    pub fn session(&self, id: u64) -> Option<&Session> {
        self.sessions.get(&id)
    }

    pub fn session_ids(&self) -> Vec<u64> {
        self.sessions.keys().copied().collect()
    }

    pub fn submit(&mut self, id: u64, msg: ClientMessage) -> Result<(), ServiceError> {
        let s = self.sessions.get_mut(&id).ok_or(ServiceError::UnknownSession(id))?;
        s.pending.push_back(msg);
        Ok(())
    }

    /// Parses and queues one JSON text message. A malformed message is also
    /// answered with a `rejected` event in the session stream.
    pub fn submit_json(&mut self, id: u64, text: &str) -> Result<(), ServiceError> {
        let s = self.sessions.get_mut(&id).ok_or(ServiceError::UnknownSession(id))?;
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => {
                s.pending.push_back(msg);
                Ok(())
            }
            Err(e) => {
                s.event(EventBody::Rejected {
                    command: "unknown".into(),
                    reason: e.to_string(),
                });
                Err(ServiceError::Malformed(e.to_string()))
            }
        }
    }

    pub fn tick(&mut self, id: u64) -> Result<(), ServiceError> {
        self.sessions.get_mut(&id).ok_or(ServiceError::UnknownSession(id))?.tick();
        Ok(())
    }

    pub fn tick_all(&mut self) {
        for s in self.sessions.values_mut() {
            s.tick();
        }
    }

    pub fn drain(&mut self, id: u64) -> Result<Vec<ServerMessage>, ServiceError> {
        Ok(self.sessions.get_mut(&id).ok_or(ServiceError::UnknownSession(id))?.drain())
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok",
            version: env!("CARGO_PKG_VERSION"),
            protocol: PROTOCOL_VERSION,
            sessions: self.sessions.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn hub() -> Hub {
        Hub::new(Arc::new(Scene::new(corpus::l_shape()).unwrap()), SimConfig::default())
    }

    #[test]
    fn messages_carry_version_and_increasing_seq() {
        let mut h = hub();
        let id = h.open();
        h.submit(id, ClientMessage::Steer { velocity: Point::new(0.1, 0.0) }).unwrap();
        for _ in 0..5 {
            h.tick(id).unwrap();
        }
        let out = h.drain(id).unwrap();
        let seqs: Vec<u64> = out.iter().map(ServerMessage::seq).collect();
        assert!(seqs.windows(2).all(|w| w[1] > w[0]));
        for m in &out {
            let v = serde_json::to_value(m).unwrap();
            assert_eq!(v["v"], PROTOCOL_VERSION);
            assert_eq!(v["session"], id);
        }
    }

    #[test]
    fn activation_events_follow_simulator_log() {
        let mut h = Hub::new(Arc::new(Scene::new(corpus::example_one()).unwrap()), SimConfig::default());
        let id = h.open();
        let mut out = Vec::new();
        for (vx, vy) in [(0.4, 0.1), (1.5, -0.2), (-0.05, 0.02), (-2.0, 0.5), (0.1, 0.0)] {
            h.submit(id, ClientMessage::Steer { velocity: Point::new(vx, vy) }).unwrap();
            for _ in 0..40 {
                h.tick(id).unwrap();
            }
            out.extend(h.drain(id).unwrap());
        }
        let sent: Vec<ActivationEvent> = out
            .iter()
            .filter_map(|m| match m {
                ServerMessage::Event {
                    body: EventBody::Activation { event },
                    ..
                } => Some(event.clone()),
                _ => None,
            })
            .collect();
        let log = &h.session(id).unwrap().simulation().activation().events;
        assert!(!sent.is_empty());
        assert_eq!(&sent, log);
        // Each step's events precede its snapshot.
        let mut pending = false;
        for m in &out {
            match m {
                ServerMessage::Event {
                    body: EventBody::Activation { .. },
                    ..
                } => pending = true,
                ServerMessage::Snapshot { .. } => pending = false,
                _ => {}
            }
        }
        assert!(!pending);
    }

    #[test]
    fn steer_is_clamped_to_speed_cap() {
        let mut h = hub();
        let id = h.open();
        h.submit(id, ClientMessage::SetSpeedCap { r: 0.5 }).unwrap();
        h.submit(id, ClientMessage::Steer { velocity: Point::new(3.0, 4.0) }).unwrap();
        h.tick(id).unwrap();
        let acks: Vec<serde_json::Value> = h
            .drain(id)
            .unwrap()
            .iter()
            .map(|m| serde_json::to_value(m).unwrap())
            .filter(|v| v["kind"] == "ack" && v["command"] == "steer")
            .collect();
        assert_eq!(acks.len(), 1);
        assert_eq!(acks[0]["clamped"], true);
        let applied: Point = serde_json::from_value(acks[0]["applied"]["velocity"].clone()).unwrap();
        assert!((applied.norm() - 0.5).abs() < 1e-12);
        assert!((applied.x / applied.y - 0.75).abs() < 1e-12);
    }

    #[test]
    fn latest_velocity_wins_and_acks_are_kept() {
        let mut h = hub().with_capacity(8);
        let id = h.open();
        for i in 0..100 {
            let v = Point::new(0.001 * i as f64, 0.0);
            h.submit(id, ClientMessage::Steer { velocity: v }).unwrap();
        }
        h.tick(id).unwrap();
        let out = h.drain(id).unwrap();
        let acks = out.iter().filter(|m| !m.is_snapshot()).count();
        assert!(acks >= 100);
        let snap = out.iter().rev().find(|m| m.is_snapshot()).unwrap();
        let v = serde_json::to_value(snap).unwrap();
        assert_eq!(v["velocity"], serde_json::json!([0.099, 0.0]));
    }

    #[test]
    fn backpressure_drops_oldest_snapshots() {
        let mut h = hub().with_capacity(4);
        let id = h.open();
        for _ in 0..10 {
            h.tick(id).unwrap();
        }
        let out = h.drain(id).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(out.last().unwrap().seq(), 10);
        assert_eq!(h.session(id).unwrap().dropped(), 6);
    }

    #[test]
    fn first_snapshot_is_self_contained() {
        let mut h = hub();
        let id = h.open();
        h.tick(id).unwrap();
        let out = h.drain(id).unwrap();
        let v = serde_json::to_value(out.last().unwrap()).unwrap();
        assert_eq!(v["type"], "snapshot");
        assert_eq!(v["layout"]["polygon"].as_array().unwrap().len(), 6);
        assert_eq!(v["layout"]["triangles"].as_array().unwrap().len(), 4);
        assert!(v["layout"]["configuration"]["labels"].is_object());
        assert!(v["layout"]["configuration"]["regions"].is_array());
    }

    #[test]
    fn health_counts_sessions() {
        let mut h = hub();
        assert_eq!(h.health().sessions, 0);
        let a = h.open();
        h.open();
        assert_eq!(h.health().sessions, 2);
        h.close(a);
        assert_eq!(h.health().sessions, 1);
        assert_eq!(h.health().version, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn malformed_json_is_rejected() {
        let mut h = hub();
        let id = h.open();
        assert!(matches!(h.submit_json(id, "{\"type\":\"fly\"}"), Err(ServiceError::Malformed(_))));
        let out = h.drain(id).unwrap();
        let v = serde_json::to_value(&out[0]).unwrap();
        assert_eq!(v["kind"], "rejected");
        assert_eq!(v["seq"], 1);
        h.submit_json(id, "{\"type\":\"steer\",\"velocity\":[0.1,0.2]}").unwrap();
        assert!(matches!(h.tick(99), Err(ServiceError::UnknownSession(99))));
    }

    #[test]
    fn load_polygon_replaces_scene() {
        let mut h = hub();
        let id = h.open();
        let square = corpus::square(2.0);
        h.submit(id, ClientMessage::LoadPolygon { vertices: square.vertices().to_vec() }).unwrap();
        h.tick(id).unwrap();
        let out = h.drain(id).unwrap();
        let v = serde_json::to_value(&out[0]).unwrap();
        assert_eq!(v["kind"], "polygon_loaded");
        assert_eq!(v["vertices"], 4);
        assert_eq!(h.session(id).unwrap().simulation().scene().polygon.len(), 4);
    }
}
