//! Vertex guard activation as the reaction ratio changes.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::guard_model::{classify, CriticalRegionExport, GuardClass, GuardModel, TriangleLabels, TriangleTag};
use crate::geometry::{GeometryError, Point, Segment};
use crate::scene::Scene;

/// Resolution of threshold bisection.
pub const THRESHOLD_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Activate { guard: usize },
    /// All diagonal guards parked at their candidate vertices.
    Static,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActivationEvent {
    Activated {
        r: f64,
        guard: usize,
        vertex: usize,
        path: Vec<usize>,
        via: Vec<usize>,
        fallback: bool,
    },
    Deactivated {
        r: f64,
        guard: usize,
        vertex: usize,
    },
    StaticOn {
        r: f64,
    },
    StaticOff {
        r: f64,
    },
}

/// Outcome of the activation search for one failing triangle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Activation {
    pub action: Action,
    /// Triangles visited by the search, starting at the failing one.
    pub path: Vec<usize>,
    /// Diagonal guards followed between consecutive triangles of `path`.
    pub via: Vec<usize>,
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct ActivationState {
    pub r: f64,
    pub stack: Vec<Action>,
    pub events: Vec<ActivationEvent>,
    model: GuardModel,
}

fn active_vertices(scene: &Scene, stack: &[Action]) -> BTreeSet<usize> {
    stack
        .iter()
        .filter_map(|a| match *a {
            Action::Activate { guard } => Some(scene.deployment.vertex_guards[guard].vertex),
            Action::Static => None,
        })
        .collect()
}

fn is_static(scene: &Scene, stack: &[Action]) -> bool {
    let count = stack.iter().filter(|a| matches!(a, Action::Activate { .. })).count();
    stack.contains(&Action::Static) || (count > 0 && count == scene.vertex_guard_count())
}

fn build_model(scene: &Scene, stack: &[Action], r: f64) -> GuardModel {
    let active = active_vertices(scene, stack);
    let c = classify(&scene.tri, &scene.deployment, &active, is_static(scene, stack));
    GuardModel::new(scene, c, r)
}

fn safe_for(labels: &TriangleLabels, guard: usize, t: usize) -> bool {
    match labels.tags[t] {
        TriangleTag::Safe => true,
        TriangleTag::Unsafe { guard: g, .. } => g != guard,
        TriangleTag::Regular => false,
    }
}

/// Search from a failing triangle through the guards covering it for an inactive
/// vertex guard whose activation frees one of them. Guards and triangles are never
/// revisited, so the path is simple.
pub fn activate_guard(scene: &Scene, model: &GuardModel, active: &BTreeSet<usize>, triangle: usize) -> Activation {
    let mut search = Search {
        scene,
        model,
        active,
        guards: BTreeSet::new(),
        triangles: BTreeSet::new(),
        path: Vec::new(),
        via: Vec::new(),
    };
    if let Some(guard) = search.visit(triangle) {
        return Activation {
            action: Action::Activate { guard },
            path: search.path,
            via: search.via,
            fallback: false,
        };
    }
    let inactive = scene
        .deployment
        .vertex_guards
        .iter()
        .find(|g| !active.contains(&g.vertex));
    Activation {
        action: match inactive {
            Some(g) => Action::Activate { guard: g.id },
            None => Action::Static,
        },
        path: vec![triangle],
        via: Vec::new(),
        fallback: true,
    }
}

struct Search<'a> {
    scene: &'a Scene,
    model: &'a GuardModel,
    active: &'a BTreeSet<usize>,
    guards: BTreeSet<usize>,
    triangles: BTreeSet<usize>,
    path: Vec<usize>,
    via: Vec<usize>,
}

impl Search<'_> {
    fn visit(&mut self, t: usize) -> Option<usize> {
        self.triangles.insert(t);
        self.path.push(t);
        let mut verts = self.scene.tri.triangle(t);
        verts.sort_unstable();
        for v in verts {
            if !self.active.contains(&v) {
                if let Some(g) = self.scene.deployment.vertex_guards.iter().find(|g| g.vertex == v) {
                    return Some(g.id);
                }
            }
        }
        let labels = &self.model.classification.labels;
        for c in &labels.covering[t] {
            if !self.guards.insert(c.guard) {
                continue;
            }
            self.via.push(c.guard);
            let w = self.scene.deployment.diagonal_guards[c.guard].other(c.vertex);
            for &next in self.scene.tri.vertex_triangles(w) {
                if self.triangles.contains(&next) || safe_for(labels, c.guard, next) {
                    continue;
                }
                if let Some(found) = self.visit(next) {
                    return Some(found);
                }
            }
            self.via.pop();
        }
        self.path.pop();
        None
    }
}

impl ActivationState {
    /// State at `r` with no vertex guard active, before any update.
    pub fn new(scene: &Scene, r: f64) -> Self {
        Self {
            r,
            stack: Vec::new(),
            events: Vec::new(),
            model: build_model(scene, &[], r),
        }
    }

    pub fn model(&self) -> &GuardModel {
        &self.model
    }

    pub fn active_vertex_guards(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .stack
            .iter()
            .filter_map(|a| match *a {
                Action::Activate { guard } => Some(guard),
                Action::Static => None,
            })
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn active_count(&self) -> usize {
        self.stack.iter().filter(|a| matches!(a, Action::Activate { .. })).count()
    }

    pub fn is_static(&self, scene: &Scene) -> bool {
        is_static(scene, &self.stack)
    }

    fn record(&mut self, scene: &Scene, action: Action, on: bool, detail: Option<&Activation>) {
        let r = self.r;
        self.events.push(match (action, on) {
            (Action::Activate { guard }, true) => {
                let a = detail.expect("activation detail");
                ActivationEvent::Activated {
                    r,
                    guard,
                    vertex: scene.deployment.vertex_guards[guard].vertex,
                    path: a.path.clone(),
                    via: a.via.clone(),
                    fallback: a.fallback,
                }
            }
            (Action::Activate { guard }, false) => ActivationEvent::Deactivated {
                r,
                guard,
                vertex: scene.deployment.vertex_guards[guard].vertex,
            },
            (Action::Static, true) => ActivationEvent::StaticOn { r },
            (Action::Static, false) => ActivationEvent::StaticOff { r },
        });
    }

    /// Brings the active set to a fixed point at `r`: when `r` decreases, the most
    /// recent activations are undone while coverage still holds; then guards are
    /// activated until no triangle fails. Returns the number of new events.
    pub fn update_active_guards(&mut self, scene: &Scene, r: f64) -> usize {
        let before = self.events.len();
        let lowering = r < self.r;
        self.r = r;
        self.model = build_model(scene, &self.stack, r);
        if lowering {
            while let Some(&top) = self.stack.last() {
                let trial = &self.stack[..self.stack.len() - 1];
                let m = build_model(scene, trial, r);
                if !m.failing(scene).is_empty() {
                    break;
                }
                self.stack.pop();
                self.model = m;
                self.record(scene, top, false, None);
            }
        }
        loop {
            let failing = self.model.failing(scene);
            let Some(&t) = failing.first() else { break };
            let active = active_vertices(scene, &self.stack);
            let a = activate_guard(scene, &self.model, &active, t);
            if a.action == Action::Static && self.stack.contains(&Action::Static) {
                // Nothing left to add.
                break;
            }
            self.stack.push(a.action);
            self.record(scene, a.action, true, Some(&a));
            self.model = build_model(scene, &self.stack, r);
        }
        self.events.len() - before
    }

    /// Guards whose current target position lies on the boundary of the triangle
    /// containing `p`, with that position.
    pub fn resolve_tracking_assignment(&self, scene: &Scene, p: Point) -> Result<Vec<Tracker>, GeometryError> {
        let t = scene.tri.locate(&scene.polygon, p)?;
        let pts = scene.tri.triangle_points(&scene.polygon, t);
        let eps = scene.polygon.eps();
        let on_boundary = |q: Point| (0..3).any(|i| Segment::new(pts[i], pts[(i + 1) % 3]).distance_to(q) <= eps);
        let mut out = Vec::new();
        for v in self.active_vertex_guards() {
            let vertex = scene.deployment.vertex_guards[v].vertex;
            if scene.tri.triangle_has_vertex(t, vertex) {
                out.push(Tracker::Vertex {
                    guard: v,
                    position: scene.polygon.vertex(vertex),
                });
            }
        }
        for g in 0..scene.diagonal_guard_count() {
            let position = self.model.reactive_position(scene, g, p);
            let h = scene.deployment.diagonal_guards[g].edge();
            if scene.tri.triangle_has_edge(t, h) || on_boundary(position) {
                out.push(Tracker::Diagonal { guard: g, position });
            }
        }
        Ok(out)
    }

    /// Guard classes, labels and regions of the current configuration.
    pub fn configuration(&self, scene: &Scene) -> Configuration {
        let c = &self.model.classification;
        Configuration {
            r: self.r,
            active_vertex_guards: self.active_vertex_guards(),
            static_regime: c.static_regime,
            labels: c.labels.clone(),
            guards: c.guards.clone(),
            regions: self.model.regions.iter().map(|g| g.export(scene)).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Configuration {
    pub r: f64,
    pub active_vertex_guards: Vec<usize>,
    pub static_regime: bool,
    pub labels: TriangleLabels,
    pub guards: Vec<GuardClass>,
    pub regions: Vec<CriticalRegionExport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tracker {
    Vertex { guard: usize, position: Point },
    Diagonal { guard: usize, position: Point },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StaircasePoint {
    pub r: f64,
    pub active: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    /// Smallest ratio (within [`THRESHOLD_TOLERANCE`]) reaching `active` guards.
    pub r: f64,
    pub active: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Staircase {
    pub points: Vec<StaircasePoint>,
    pub thresholds: Vec<Threshold>,
    pub vertex_guards: usize,
    pub events: Vec<ActivationEvent>,
}

impl Staircase {
    pub fn saturation(&self) -> usize {
        self.points.last().map_or(0, |p| p.active)
    }
}

/// Active vertex guard count as `r` rises from 0 to `r_max` in steps of `r_step`,
/// with each increase located by bisection.
pub fn threshold_sweep(scene: &Scene, r_max: f64, r_step: f64) -> Staircase {
    assert!(r_step > 0.0 && r_max >= 0.0);
    let mut state = ActivationState::new(scene, 0.0);
    state.update_active_guards(scene, 0.0);
    let mut points = vec![StaircasePoint {
        r: 0.0,
        active: state.active_count(),
    }];
    let mut thresholds = Vec::new();
    let steps = (r_max / r_step - 1e-9).ceil().max(0.0) as usize;
    for i in 1..=steps {
        let r = (i as f64 * r_step).min(r_max);
        let prev = state.clone();
        state.update_active_guards(scene, r);
        let target = state.active_count();
        let mut lo = prev.r;
        let mut lo_count = prev.active_count();
        while lo_count < target {
            let (mut a, mut b) = (lo, r);
            let mut b_count = target;
            while b - a > THRESHOLD_TOLERANCE {
                let mid = 0.5 * (a + b);
                let mut probe = prev.clone();
                probe.update_active_guards(scene, mid);
                let c = probe.active_count();
                if c > lo_count {
                    b = mid;
                    b_count = c;
                } else {
                    a = mid;
                }
            }
            thresholds.push(Threshold { r: b, active: b_count });
            lo = b;
            lo_count = b_count;
        }
        points.push(StaircasePoint { r, active: target });
    }
    Staircase {
        points,
        thresholds,
        vertex_guards: scene.vertex_guard_count(),
        events: state.events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn scenes() -> Vec<Scene> {
        [corpus::example_one(), corpus::comb(4), corpus::random_polygon(24, 3)]
            .into_iter()
            .map(|p| Scene::new(p).unwrap())
            .collect()
    }

    #[test]
    fn zero_ratio_activates_nothing() {
        for scene in scenes() {
            let mut s = ActivationState::new(&scene, 0.0);
            assert_eq!(s.update_active_guards(&scene, 0.0), 0);
            assert_eq!(s.active_count(), 0);
        }
    }

    #[test]
    fn large_ratio_makes_every_triangle_safe() {
        for scene in scenes() {
            let mut s = ActivationState::new(&scene, 0.0);
            s.update_active_guards(&scene, 50.0);
            let labels = &s.model().classification.labels;
            assert_eq!(labels.safe_count(), scene.tri.triangle_count());
            assert!(s.model().failing(&scene).is_empty());
        }
    }

    #[test]
    fn update_is_idempotent() {
        for scene in scenes() {
            for r in [0.1, 0.4, 1.0] {
                let mut s = ActivationState::new(&scene, 0.0);
                s.update_active_guards(&scene, r);
                let active = s.active_vertex_guards();
                assert_eq!(s.update_active_guards(&scene, r), 0);
                assert_eq!(s.active_vertex_guards(), active);
            }
        }
    }

    #[test]
    fn raise_then_lower_restores_active_set() {
        for scene in scenes() {
            for (lo, hi) in [(0.05, 0.5), (0.2, 1.5), (0.0, 3.0)] {
                let mut s = ActivationState::new(&scene, 0.0);
                s.update_active_guards(&scene, lo);
                let before = s.active_vertex_guards();
                s.update_active_guards(&scene, hi);
                assert!(s.active_count() >= before.len());
                s.update_active_guards(&scene, lo);
                assert_eq!(s.active_vertex_guards(), before, "{lo} -> {hi} -> {lo}");
                assert!(s.model().failing(&scene).is_empty());
            }
        }
    }

    #[test]
    fn traces_are_simple_paths() {
        for scene in scenes() {
            let mut s = ActivationState::new(&scene, 0.0);
            s.update_active_guards(&scene, 5.0);
            for e in &s.events {
                if let ActivationEvent::Activated { path, via, .. } = e {
                    let p: BTreeSet<usize> = path.iter().copied().collect();
                    let v: BTreeSet<usize> = via.iter().copied().collect();
                    assert_eq!(p.len(), path.len());
                    assert_eq!(v.len(), via.len());
                    assert!(via.len() <= scene.diagonal_guard_count());
                }
            }
        }
    }

    #[test]
    fn staircase_is_monotone_and_saturates() {
        let scene = Scene::new(corpus::example_one()).unwrap();
        let s = threshold_sweep(&scene, 2.0, 0.02);
        assert!(s.points.windows(2).all(|w| w[0].active <= w[1].active));
        assert_eq!(s.thresholds.len(), 2);
        assert!(s.thresholds.windows(2).all(|w| w[0].r < w[1].r));
        let mut top = ActivationState::new(&scene, 0.0);
        top.update_active_guards(&scene, 2.0);
        assert_eq!(top.model().classification.labels.safe_count(), scene.tri.triangle_count());
    }

    #[test]
    fn tracking_assignment_includes_incident_guards() {
        let scene = Scene::new(corpus::example_one()).unwrap();
        let mut s = ActivationState::new(&scene, 0.0);
        s.update_active_guards(&scene, 0.3);
        for t in 0..scene.tri.triangle_count() {
            let c = scene.tri.centroid(&scene.polygon, t);
            let trackers = s.resolve_tracking_assignment(&scene, c).unwrap();
            for g in &scene.deployment.diagonal_guards {
                if scene.tri.triangle_has_edge(t, g.edge()) {
                    assert!(trackers.iter().any(|k| matches!(k, Tracker::Diagonal { guard, .. } if *guard == g.id)));
                }
            }
        }
    }
}
