//! Discrete-time pursuit: intruder kinematics, reactive guard motion, activation
//! driven by measured speed and a per-step tracking audit.

use std::collections::{BTreeSet, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command as ProcessCommand, Stdio};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationEvent, ActivationState};
use crate::geometry::{visible, Point, PointLocation, Polygon, Segment};
use crate::guard_model::GuardType;
use crate::scene::Scene;

pub const DEFAULT_DT: f64 = 1.0 / 60.0;
pub const DEFAULT_GUARD_SPEED: f64 = 1.0;
/// Change in measured speed ratio that triggers an activation update.
pub const DEFAULT_DELTA_R: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    pub guard_speed: f64,
    pub delta_r: f64,
    /// Samples spanned by the speed estimate.
    pub speed_window: usize,
    /// Cap on commanded intruder speed.
    pub max_speed: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            guard_speed: DEFAULT_GUARD_SPEED,
            delta_r: DEFAULT_DELTA_R,
            speed_window: 1,
            max_speed: 100.0,
        }
    }
}

/// Intruder input for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub velocity: Point,
    /// Speed ratio the intruder promises not to exceed from now on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub announce: Option<f64>,
    /// Unobserved jump, used to inject audit faults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teleport: Option<Point>,
}

impl Command {
    pub fn velocity(v: Point) -> Self {
        Self {
            velocity: v,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationState {
    pub step: u64,
    pub t: f64,
    pub p_i: Point,
    pub v_e: f64,
    pub r: f64,
    /// Position of each diagonal guard along its diagonal, 0 at the candidate vertex.
    pub guards: Vec<f64>,
    pub announced: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u64,
    pub t: f64,
    pub p_i: Point,
    pub v_e: f64,
    pub r: f64,
    pub guards: Vec<Point>,
    pub active: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lingering: Vec<usize>,
    pub triangle: usize,
    pub covered: bool,
    pub visible: bool,
    pub clipped: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<ActivationEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub step: u64,
    pub t: f64,
    pub p_i: Point,
    pub triangle: usize,
    pub covered: bool,
    pub visible: bool,
}

/// Violations kept verbatim in a report; the counters keep counting past it.
pub const MAX_LISTED_VIOLATIONS: usize = 1000;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub steps: u64,
    pub coverage_violations: u64,
    pub visibility_violations: u64,
    pub activations: u64,
    pub deactivations: u64,
    pub clipped_steps: u64,
    pub max_r: f64,
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn absorb(&mut self, rec: &StepRecord) {
        self.steps += 1;
        self.max_r = self.max_r.max(rec.r);
        if rec.clipped {
            self.clipped_steps += 1;
        }
        for e in &rec.events {
            match e {
                ActivationEvent::Activated { .. } | ActivationEvent::StaticOn { .. } => self.activations += 1,
                ActivationEvent::Deactivated { .. } | ActivationEvent::StaticOff { .. } => self.deactivations += 1,
            }
        }
        if !rec.covered {
            self.coverage_violations += 1;
        }
        if !rec.visible {
            self.visibility_violations += 1;
        }
        if (!rec.covered || !rec.visible) && self.violations.len() < MAX_LISTED_VIOLATIONS {
            self.violations.push(Violation {
                step: rec.step,
                t: rec.t,
                p_i: rec.p_i,
                triangle: rec.triangle,
                covered: rec.covered,
                visible: rec.visible,
            });
        }
    }

    pub fn is_clean(&self) -> bool {
        self.coverage_violations == 0 && self.visibility_violations == 0
    }
}

/// Windowed displacement over elapsed time; 0 with fewer than two samples.
pub fn measure_speed(history: &[(f64, Point)], window: usize) -> f64 {
    if history.len() < 2 {
        return 0.0;
    }
    let last = history.len() - 1;
    let first = last.saturating_sub(window.max(1));
    let (t0, p0) = history[first];
    let (t1, p1) = history[last];
    if t1 <= t0 {
        return 0.0;
    }
    p0.dist(p1) / (t1 - t0)
}

/// Moves `p` by `d`, sliding along walls instead of leaving the polygon.
/// Returns the new position and whether a wall was hit.
pub fn advance(polygon: &Polygon, p: Point, d: Point) -> (Point, bool) {
    let start = p;
    let margin = 10.0 * polygon.eps();
    let mut p = p;
    let mut d = d;
    let mut clipped = false;
    for _ in 0..4 {
        let len = d.norm();
        if len <= 1e-15 {
            break;
        }
        let dir = d * (1.0 / len);
        let go = polygon.ray_exit(p, dir, len);
        if go >= len {
            p = p + d;
            break;
        }
        clipped = true;
        let hit = p + dir * go;
        let stop = p + dir * (go - margin).max(0.0);
        let wall = polygon
            .edges()
            .min_by(|a, b| a.distance_to(hit).total_cmp(&b.distance_to(hit)))
            .expect("polygon has edges");
        let u = (wall.b - wall.a).normalized();
        let rest = d * (1.0 - go / len);
        p = stop;
        d = u * rest.dot(u);
    }
    if polygon.locate_exact(p) == PointLocation::Outside {
        return (start, true);
    }
    (p, clipped)
}

/// Diagonal guard positions and active vertex guards covering `p`: a guard covers
/// it when it stands on the boundary of a triangle containing `p`.
pub fn covering_guards(scene: &Scene, p: Point, guards: &[Point], active_vertices: &[usize]) -> Vec<usize> {
    let eps = 10.0 * scene.polygon.eps();
    let mut tris = scene.tri.containing(&scene.polygon, p);
    if tris.is_empty() {
        tris.extend(scene.tri.locate(&scene.polygon, p));
    }
    let mut out = Vec::new();
    for (g, &q) in guards.iter().enumerate() {
        let on = tris.iter().any(|&t| {
            let pts = scene.tri.triangle_points(&scene.polygon, t);
            (0..3).any(|i| Segment::new(pts[i], pts[(i + 1) % 3]).distance_to(q) <= eps)
        });
        if on {
            out.push(g);
        }
    }
    let vertex_cover = active_vertices
        .iter()
        .any(|&v| tris.iter().any(|&t| scene.tri.triangle_has_vertex(t, v)));
    if vertex_cover {
        out.push(usize::MAX);
    }
    out
}

pub struct Simulation {
    scene: Arc<Scene>,
    pub config: SimConfig,
    state: SimulationState,
    activation: ActivationState,
    history: VecDeque<(f64, Point)>,
    /// Deactivated vertex guards kept watching until the diagonal guards reach
    /// their new targets.
    lingering: BTreeSet<usize>,
}

impl Simulation {
    /// Starts at rest at `start` with guards at their reactive targets for `r0`.
    pub fn new(scene: Arc<Scene>, config: SimConfig, start: Point, r0: f64) -> Self {
        let mut activation = ActivationState::new(&scene, r0);
        activation.update_active_guards(&scene, r0);
        activation.events.clear();
        let mut sim = Self {
            config,
            state: SimulationState {
                step: 0,
                t: 0.0,
                p_i: start,
                v_e: 0.0,
                r: r0,
                guards: vec![0.0; scene.diagonal_guard_count()],
                announced: None,
            },
            activation,
            history: VecDeque::new(),
            lingering: BTreeSet::new(),
            scene,
        };
        for g in 0..sim.state.guards.len() {
            sim.state.guards[g] = sim.target_param(g);
        }
        sim.history.push_back((0.0, start));
        sim
    }

    pub fn scene(&self) -> &Arc<Scene> {
        &self.scene
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn activation(&self) -> &ActivationState {
        &self.activation
    }

    pub fn guard_points(&self) -> Vec<Point> {
        self.state
            .guards
            .iter()
            .enumerate()
            .map(|(g, &s)| self.guard_point(g, s))
            .collect()
    }

    fn guard_point(&self, g: usize, s: f64) -> Point {
        let dg = &self.scene.deployment.diagonal_guards[g];
        let a = self.scene.polygon.vertex(dg.endpoints[0]);
        let b = self.scene.polygon.vertex(dg.endpoints[1]);
        if s <= 0.0 {
            a
        } else if s >= 1.0 {
            b
        } else {
            a.lerp(b, s)
        }
    }

    /// Reactive target of guard `g` for the current intruder position.
    fn target_param(&self, g: usize) -> f64 {
        let region = &self.activation.model().regions[g];
        let dg = &self.scene.deployment.diagonal_guards[g];
        let t = match region.ty {
            GuardType::Type0 => 0.0,
            _ => region.reactive_param(&self.scene, self.state.p_i),
        };
        if region.resident == dg.endpoints[0] {
            t
        } else {
            1.0 - t
        }
    }

    /// Reactive targets of the diagonal guards for the current intruder position.
    pub fn target_points(&self) -> Vec<Point> {
        (0..self.state.guards.len())
            .map(|g| self.guard_point(g, self.target_param(g)))
            .collect()
    }

    /// Every diagonal guard is at its target and no deactivated guard lingers.
    pub fn settled(&self) -> bool {
        self.lingering.is_empty() && (0..self.state.guards.len()).all(|g| self.state.guards[g] == self.target_param(g))
    }

    /// Vertex guards deactivated but still watching.
    pub fn lingering(&self) -> Vec<usize> {
        self.lingering.iter().copied().collect()
    }

    fn active_vertices(&self) -> Vec<usize> {
        let mut ids: BTreeSet<usize> = self.activation.active_vertex_guards().into_iter().collect();
        ids.extend(self.lingering.iter().copied());
        ids.into_iter()
            .map(|g| self.scene.deployment.vertex_guards[g].vertex)
            .collect()
    }

    pub fn step(&mut self, cmd: &Command) -> StepRecord {
        let dt = self.config.dt;
        let scene = Arc::clone(&self.scene);
        let mut v = cmd.velocity;
        let speed = v.norm();
        if !speed.is_finite() {
            v = Point::new(0.0, 0.0);
        } else if speed > self.config.max_speed {
            v = v * (self.config.max_speed / speed);
        }
        self.state.step += 1;
        self.state.t = self.state.step as f64 * dt;
        let mut clipped = false;
        match cmd.teleport {
            Some(q) if scene.polygon.contains(q) => {
                self.state.p_i = q;
                self.history.clear();
            }
            _ => {
                let (p, c) = advance(&scene.polygon, self.state.p_i, v * dt);
                self.state.p_i = p;
                clipped = c;
            }
        }
        self.history.push_back((self.state.t, self.state.p_i));
        while self.history.len() > self.config.speed_window + 1 {
            self.history.pop_front();
        }
        let hist: Vec<(f64, Point)> = self.history.iter().copied().collect();
        self.state.v_e = measure_speed(&hist, self.config.speed_window);
        let measured = self.state.v_e / self.config.guard_speed;

        // Activation before guard motion.
        if let Some(a) = cmd.announce {
            self.state.announced = Some(a.max(0.0));
        }
        let target_r = match self.state.announced {
            Some(a) if measured <= a + self.config.delta_r => a,
            _ => measured,
        };
        let before = self.activation.events.len();
        let needs = match self.state.announced {
            Some(_) => target_r != self.state.r,
            None => (target_r - self.state.r).abs() > self.config.delta_r,
        };
        if needs {
            let was: BTreeSet<usize> = self.activation.active_vertex_guards().into_iter().collect();
            self.state.r = target_r;
            self.activation.update_active_guards(&scene, target_r);
            let now: BTreeSet<usize> = self.activation.active_vertex_guards().into_iter().collect();
            self.lingering.extend(was.difference(&now));
            self.lingering.retain(|g| !now.contains(g));
        }
        let events: Vec<ActivationEvent> = self.activation.events[before..].to_vec();

        // Guards move toward their targets at capped speed; a guard that alone
        // covers the intruder holds until another one takes over.
        let old: Vec<Point> = self.guard_points();
        let cap = self.config.guard_speed * dt;
        let mut next = self.state.guards.clone();
        let targets: Vec<f64> = (0..next.len()).map(|g| self.target_param(g)).collect();
        for (g, s) in next.iter_mut().enumerate() {
            let len = scene.deployment.diagonal_guards[g].length;
            let max_ds = if len > 0.0 { cap / len } else { 1.0 };
            let ds = targets[g] - *s;
            *s = if ds.abs() <= max_ds { targets[g] } else { *s + max_ds * ds.signum() };
        }
        let active = self.active_vertices();
        let new_points: Vec<Point> = next.iter().enumerate().map(|(g, &s)| self.guard_point(g, s)).collect();
        let p = self.state.p_i;
        if covering_guards(&scene, p, &new_points, &active).is_empty() {
            if let Some(&g) = covering_guards(&scene, p, &old, &active).first() {
                if g != usize::MAX {
                    next[g] = self.state.guards[g];
                }
            }
        }
        if next.iter().zip(&targets).all(|(s, t)| s == t) {
            self.lingering.clear();
        }
        self.state.guards = next;
        self.record(clipped, events)
    }

    /// Audit record of the current state.
    pub fn record(&self, clipped: bool, events: Vec<ActivationEvent>) -> StepRecord {
        let scene = &self.scene;
        let p = self.state.p_i;
        let guards = self.guard_points();
        let active = self.active_vertices();
        let coverers = covering_guards(scene, p, &guards, &active);
        let triangle = scene.tri.locate(&scene.polygon, p).unwrap_or(usize::MAX);
        let covered = !coverers.is_empty();
        let seen = |q: Point| visible(&scene.polygon, q, p);
        let visible = coverers.iter().any(|&g| {
            if g == usize::MAX {
                active.iter().any(|&v| seen(scene.polygon.vertex(v)))
            } else {
                seen(guards[g])
            }
        }) || guards.iter().any(|&q| seen(q))
            || active.iter().any(|&v| seen(scene.polygon.vertex(v)));
        StepRecord {
            step: self.state.step,
            t: self.state.t,
            p_i: p,
            v_e: self.state.v_e,
            r: self.state.r,
            guards,
            active: self.activation.active_vertex_guards(),
            lingering: self.lingering(),
            triangle,
            covered,
            visible,
            clipped,
            events,
        }
    }
}

/// Intruder behaviour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Visits the points in order at constant speed.
    Waypoints {
        points: Vec<Point>,
        speed: f64,
        #[serde(default)]
        looped: bool,
    },
    /// Constant speed with a heading that drifts randomly and resets at walls.
    RandomWalk {
        speed: f64,
        #[serde(default = "default_turn")]
        turn: f64,
    },
    /// Announces each speed ratio in `levels` and rests for at least `settle_steps`
    /// and until the guards have settled, then random-walks for `phase_steps` with
    /// speed ramping up to the announced bound.
    Ramp {
        levels: Vec<f64>,
        phase_steps: u64,
        settle_steps: u64,
    },
    /// Child process reading one state JSON line per step on stdin and answering
    /// with one command JSON line on stdout.
    #[serde(rename = "external-command")]
    External {
        program: String,
        #[serde(default)]
        args: Vec<String>,
    },
    /// Standing still.
    Still,
}

struct External {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl External {
    fn spawn(program: &str, args: &[String]) -> std::io::Result<Self> {
        let mut child = ProcessCommand::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self { child, stdin, stdout })
    }

    fn exchange(&mut self, state: &SimulationState, clipped: bool) -> std::io::Result<Command> {
        let line = serde_json::json!({
            "step": state.step,
            "t": state.t,
            "p_i": state.p_i,
            "v_e": state.v_e,
            "r": state.r,
            "guards": state.guards,
            "clipped": clipped,
        });
        writeln!(self.stdin, "{line}")?;
        self.stdin.flush()?;
        let mut reply = String::new();
        if self.stdout.read_line(&mut reply)? == 0 {
            return Err(std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "policy closed its output"));
        }
        serde_json::from_str(reply.trim()).map_err(std::io::Error::other)
    }
}

impl Drop for External {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn default_turn() -> f64 {
    0.5
}

#[derive(Default)]
struct RampProgress {
    level: usize,
    /// Steps spent at rest since the last announcement; `None` before it.
    waited: Option<u64>,
    moving: Option<u64>,
}

pub struct Policy {
    spec: PolicySpec,
    rng: ChaCha8Rng,
    heading: f64,
    waypoint: usize,
    external: Option<External>,
    ramp: RampProgress,
    /// First I/O failure of an external policy; the intruder stops afterwards.
    pub error: Option<String>,
}

impl Policy {
    /// Panics for [`PolicySpec::External`] when the program cannot be started;
    /// use [`Policy::spawn`] to handle that.
    pub fn new(spec: PolicySpec, seed: u64) -> Self {
        Self::spawn(spec, seed).expect("policy process")
    }

    pub fn spawn(spec: PolicySpec, seed: u64) -> std::io::Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let heading = rng.random_range(0.0..std::f64::consts::TAU);
        let external = match &spec {
            PolicySpec::External { program, args } => Some(External::spawn(program, args)?),
            _ => None,
        };
        Ok(Self {
            spec,
            rng,
            heading,
            waypoint: 0,
            external,
            ramp: RampProgress::default(),
            error: None,
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    fn wander(&mut self, speed: f64, turn: f64, last_clipped: bool) -> Point {
        if last_clipped {
            self.heading = self.rng.random_range(0.0..std::f64::consts::TAU);
        } else {
            self.heading += self.rng.random_range(-turn..=turn);
        }
        Point::new(self.heading.cos(), self.heading.sin()) * speed
    }

    /// Command for the next step given the current state and whether the last
    /// step hit a wall.
    pub fn command(&mut self, sim: &Simulation, last_clipped: bool) -> Command {
        let dt = sim.config.dt;
        match self.spec.clone() {
            PolicySpec::Still => Command::default(),
            PolicySpec::External { .. } => {
                if self.error.is_some() {
                    return Command::default();
                }
                let ext = self.external.as_mut().expect("spawned");
                match ext.exchange(sim.state(), last_clipped) {
                    Ok(c) => c,
                    Err(e) => {
                        self.error = Some(e.to_string());
                        Command::default()
                    }
                }
            }
            PolicySpec::RandomWalk { speed, turn } => Command::velocity(self.wander(speed, turn, last_clipped)),
            PolicySpec::Waypoints { points, speed, looped } => {
                if points.is_empty() || speed <= 0.0 {
                    return Command::default();
                }
                let p = sim.state().p_i;
                loop {
                    if self.waypoint >= points.len() {
                        if !looped {
                            return Command::default();
                        }
                        self.waypoint = 0;
                    }
                    let goal = points[self.waypoint];
                    let d = goal - p;
                    let dist = d.norm();
                    if dist <= 1e-12 {
                        self.waypoint += 1;
                        continue;
                    }
                    let v = if dist <= speed * dt { d * (1.0 / dt) } else { d * (speed / dist) };
                    return Command::velocity(v);
                }
            }
            PolicySpec::Ramp {
                levels,
                phase_steps,
                settle_steps,
            } => {
                if levels.is_empty() {
                    return Command::default();
                }
                let level = levels[self.ramp.level % levels.len()];
                let Some(waited) = self.ramp.waited else {
                    self.ramp.waited = Some(0);
                    self.ramp.moving = None;
                    return Command {
                        announce: Some(level),
                        ..Command::default()
                    };
                };
                let moved = match self.ramp.moving {
                    Some(m) => m + 1,
                    None if waited + 1 < settle_steps || !sim.settled() => {
                        self.ramp.waited = Some(waited + 1);
                        return Command::default();
                    }
                    None => 1,
                };
                if moved > phase_steps {
                    self.ramp.level += 1;
                    self.ramp.waited = None;
                    return self.command(sim, last_clipped);
                }
                self.ramp.moving = Some(moved);
                let frac = moved as f64 / phase_steps.max(1) as f64;
                let speed = level * sim.config.guard_speed * frac;
                Command::velocity(self.wander(speed, 0.5, last_clipped))
            }
        }
    }
}

/// Random ramp schedule: `count` speed ratios drawn from `[0, r_max]`.
pub fn ramp_levels(count: usize, r_max: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0.0..=r_max)).collect()
}

/// Runs a policy for `steps` steps, handing every record to `sink`.
pub fn run_with(
    sim: &mut Simulation,
    policy: &mut Policy,
    steps: u64,
    mut sink: impl FnMut(&StepRecord),
) -> ViolationReport {
    let mut report = ViolationReport::default();
    let mut clipped = false;
    for _ in 0..steps {
        let cmd = policy.command(sim, clipped);
        let rec = sim.step(&cmd);
        clipped = rec.clipped;
        report.absorb(&rec);
        sink(&rec);
    }
    report
}

/// Runs for `duration` seconds and returns the full trace and the report.
pub fn run(sim: &mut Simulation, policy: &mut Policy, duration: f64) -> (Vec<StepRecord>, ViolationReport) {
    let steps = (duration / sim.config.dt).round().max(0.0) as u64;
    let mut trace = Vec::with_capacity(steps as usize);
    let report = run_with(sim, policy, steps, |r| trace.push(r.clone()));
    (trace, report)
}
