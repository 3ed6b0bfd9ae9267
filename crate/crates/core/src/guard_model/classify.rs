use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::deployment::Deployment;
use crate::geometry::{Edge, TriangulationGraph};

/// A guard able to cover a triangle from one of its endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cover {
    pub guard: usize,
    pub vertex: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum TriangleTag {
    Safe,
    Unsafe { guard: usize, vertex: usize },
    Regular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleLabels {
    pub tags: Vec<TriangleTag>,
    /// Guard endpoints able to cover each triangle (empty for safe triangles).
    pub covering: Vec<Vec<Cover>>,
}

impl TriangleLabels {
    pub fn is_safe(&self, t: usize) -> bool {
        self.tags[t] == TriangleTag::Safe
    }

    pub fn non_safe(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.tags.len()).filter(|&t| !self.is_safe(t))
    }

    pub fn safe_count(&self) -> usize {
        self.tags.iter().filter(|t| **t == TriangleTag::Safe).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardType {
    Type0,
    Type1,
    Type2,
}

/// Per-guard triangle sets, endpoint `k` meaning `endpoints[k]` of the guard.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GuardZones {
    /// Triangles having the guard's diagonal as an edge.
    pub a: Vec<usize>,
    /// Largest edge-connected set of triangles safe for this guard containing `a`.
    pub b: Vec<usize>,
    /// Triangles only this guard can cover, per endpoint.
    pub u: [Vec<usize>; 2],
    /// Regular triangles per endpoint.
    pub regular: [Vec<usize>; 2],
    /// Incident triangles per endpoint.
    pub t: [Vec<usize>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuardClass {
    pub guard: usize,
    pub ty: GuardType,
    /// Vertex the guard holds while the intruder is in its owned region (v_1);
    /// for type 0 guards, where it is parked.
    pub resident: usize,
    pub far: usize,
    pub zones: GuardZones,
    /// Type 1: triangles of the owned region; type 2: unsafe triangles at `resident`.
    pub owned: Vec<usize>,
    /// Type 1: diagonals separating the owned region from the rest.
    pub cut: Vec<Edge>,
    /// Type 2: regular triangles at `resident` shared with other guards.
    pub shared: Vec<usize>,
    /// Type 2: guards whose regions must exist first.
    pub depends_on: Vec<usize>,
}

/// Regular triangles at one endpoint converted to unsafe to break a dependency cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Resolution {
    pub guard: usize,
    pub vertex: usize,
    pub triangles: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub labels: TriangleLabels,
    pub guards: Vec<GuardClass>,
    /// Order in which regions can be built (type 2 guards after their dependencies).
    pub order: Vec<usize>,
    pub resolutions: Vec<Resolution>,
    /// All diagonal guards parked at their candidate vertices.
    pub static_regime: bool,
}

fn base_safe(tri: &TriangulationGraph, dep: &Deployment, active: &BTreeSet<usize>) -> Vec<bool> {
    let sh: BTreeSet<Edge> = dep.dominating_diagonals.iter().map(|d| d.edge).collect();
    (0..tri.triangle_count())
        .map(|t| {
            tri.triangle_edges(t).iter().any(|e| sh.contains(e))
                || tri.triangle(t).iter().any(|v| active.contains(v))
        })
        .collect()
}

fn covers_of(tri: &TriangulationGraph, dep: &Deployment, t: usize) -> Vec<Cover> {
    let mut out = Vec::new();
    for g in &dep.diagonal_guards {
        for &v in &g.endpoints {
            if tri.triangle_has_vertex(t, v) {
                out.push(Cover { guard: g.id, vertex: v });
            }
        }
    }
    out
}

/// Labels before any guard classification: triangles with a dominating diagonal
/// as an edge or an active vertex guard at a vertex are safe; the rest are unsafe
/// when exactly one guard endpoint can cover them and regular otherwise.
/// `active` holds the vertices of active vertex guards.
pub fn classify_triangles(
    tri: &TriangulationGraph,
    dep: &Deployment,
    active: &BTreeSet<usize>,
) -> TriangleLabels {
    let safe = base_safe(tri, dep, active);
    let m = tri.triangle_count();
    let mut tags = Vec::with_capacity(m);
    let mut covering = Vec::with_capacity(m);
    for (t, &is_safe) in safe.iter().enumerate() {
        if is_safe {
            tags.push(TriangleTag::Safe);
            covering.push(Vec::new());
            continue;
        }
        let c = covers_of(tri, dep, t);
        tags.push(match c.as_slice() {
            [only] => TriangleTag::Unsafe {
                guard: only.guard,
                vertex: only.vertex,
            },
            _ => TriangleTag::Regular,
        });
        covering.push(c);
    }
    TriangleLabels { tags, covering }
}

/// Full classification for the given active vertex guards: the type 0 cascade,
/// types 1 and 2, and cycle resolution until every guard has a type.
pub fn classify(
    tri: &TriangulationGraph,
    dep: &Deployment,
    active: &BTreeSet<usize>,
    static_regime: bool,
) -> Classification {
    let m = tri.triangle_count();
    let guards = &dep.diagonal_guards;
    if static_regime {
        let labels = TriangleLabels {
            tags: vec![TriangleTag::Safe; m],
            covering: vec![Vec::new(); m],
        };
        let classes = guards
            .iter()
            .map(|g| GuardClass {
                guard: g.id,
                ty: GuardType::Type0,
                resident: g.candidate,
                far: g.other(g.candidate),
                zones: GuardZones::default(),
                owned: Vec::new(),
                cut: Vec::new(),
                shared: Vec::new(),
                depends_on: Vec::new(),
            })
            .collect();
        return Classification {
            labels,
            guards: classes,
            order: (0..guards.len()).collect(),
            resolutions: Vec::new(),
            static_regime,
        };
    }
    let base = base_safe(tri, dep, active);
    let mut assigned: BTreeMap<usize, Cover> = BTreeMap::new();
    let mut resolutions = Vec::new();
    loop {
        // Type 0 cascade.
        let mut safe = base.clone();
        let mut parked: Vec<Option<usize>> = vec![None; guards.len()];
        let safe_for = |safe: &[bool], assigned: &BTreeMap<usize, Cover>, g: usize, t: usize| {
            safe[t] || assigned.get(&t).is_some_and(|c| c.guard != g)
        };
        loop {
            let mut changed = false;
            for g in guards {
                if parked[g.id].is_some() {
                    continue;
                }
                for &e in &g.endpoints {
                    if tri
                        .vertex_triangles(e)
                        .iter()
                        .all(|&t| safe_for(&safe, &assigned, g.id, t))
                    {
                        let p = g.other(e);
                        parked[g.id] = Some(p);
                        for &t in tri.vertex_triangles(p) {
                            safe[t] = true;
                        }
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // Labels with parked guards removed from covering sets.
        let mut tags = Vec::with_capacity(m);
        let mut covering = Vec::with_capacity(m);
        for (t, &is_safe) in safe.iter().enumerate() {
            if is_safe {
                tags.push(TriangleTag::Safe);
                covering.push(Vec::new());
                continue;
            }
            if let Some(&c) = assigned.get(&t) {
                tags.push(TriangleTag::Unsafe {
                    guard: c.guard,
                    vertex: c.vertex,
                });
                covering.push(vec![c]);
                continue;
            }
            let c: Vec<Cover> = covers_of(tri, dep, t)
                .into_iter()
                .filter(|c| parked[c.guard].is_none())
                .collect();
            tags.push(match c.as_slice() {
                [only] => TriangleTag::Unsafe {
                    guard: only.guard,
                    vertex: only.vertex,
                },
                _ => TriangleTag::Regular,
            });
            covering.push(c);
        }
        let labels = TriangleLabels { tags, covering };

        let mut classes: Vec<Option<GuardClass>> = vec![None; guards.len()];
        let mut zones_of: Vec<GuardZones> = Vec::with_capacity(guards.len());
        for g in guards {
            let a: Vec<usize> = tri.edge_triangles(g.edge()).to_vec();
            let t_sets = [
                tri.vertex_triangles(g.endpoints[0]).to_vec(),
                tri.vertex_triangles(g.endpoints[1]).to_vec(),
            ];
            let in_tg: BTreeSet<usize> = t_sets.iter().flatten().copied().collect();
            let sf = |t: usize| safe_for(&safe, &assigned, g.id, t);
            let mut b: BTreeSet<usize> = a.iter().copied().filter(|&t| sf(t)).collect();
            let mut queue: VecDeque<usize> = b.iter().copied().collect();
            while let Some(t) = queue.pop_front() {
                for nb in tri.dual().neighbors(t) {
                    if in_tg.contains(&nb) && sf(nb) && b.insert(nb) {
                        queue.push_back(nb);
                    }
                }
            }
            let mut u: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            let mut regular: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            for k in 0..2 {
                for &t in &t_sets[k] {
                    match labels.tags[t] {
                        TriangleTag::Unsafe { guard, vertex } if guard == g.id && vertex == g.endpoints[k] => {
                            u[k].push(t)
                        }
                        TriangleTag::Regular if !sf(t) => regular[k].push(t),
                        _ => {}
                    }
                }
            }
            zones_of.push(GuardZones {
                a,
                b: b.into_iter().collect(),
                u,
                regular,
                t: t_sets,
            });
        }

        let mut order = Vec::new();
        for g in guards {
            let zones = zones_of[g.id].clone();
            if let Some(p) = parked[g.id] {
                classes[g.id] = Some(GuardClass {
                    guard: g.id,
                    ty: GuardType::Type0,
                    resident: p,
                    far: g.other(p),
                    zones,
                    owned: Vec::new(),
                    cut: Vec::new(),
                    shared: Vec::new(),
                    depends_on: Vec::new(),
                });
                order.push(g.id);
                continue;
            }
            let b: BTreeSet<usize> = zones.b.iter().copied().collect();
            for k in 0..2 {
                if zones.u[k].is_empty() {
                    continue;
                }
                let touches_b = zones.regular[k]
                    .iter()
                    .any(|&t| tri.dual().neighbors(t).any(|nb| b.contains(&nb)));
                if touches_b {
                    continue;
                }
                let (owned, cut) = owned_region(tri, &zones.u[k], &b);
                classes[g.id] = Some(GuardClass {
                    guard: g.id,
                    ty: GuardType::Type1,
                    resident: g.endpoints[k],
                    far: g.endpoints[1 - k],
                    zones,
                    owned,
                    cut,
                    shared: Vec::new(),
                    depends_on: Vec::new(),
                });
                order.push(g.id);
                break;
            }
        }
        // Type 2 in dependency order.
        loop {
            let mut changed = false;
            for g in guards {
                if classes[g.id].is_some() {
                    continue;
                }
                let zones = &zones_of[g.id];
                for k in 0..2 {
                    if zones.regular[k].is_empty() && zones.u[k].is_empty() {
                        continue;
                    }
                    let deps: BTreeSet<usize> = zones.regular[k]
                        .iter()
                        .flat_map(|&t| labels.covering[t].iter())
                        .map(|c| c.guard)
                        .filter(|&l| l != g.id)
                        .collect();
                    if deps.iter().all(|&l| classes[l].is_some()) {
                        classes[g.id] = Some(GuardClass {
                            guard: g.id,
                            ty: GuardType::Type2,
                            resident: g.endpoints[k],
                            far: g.endpoints[1 - k],
                            zones: zones.clone(),
                            owned: zones.u[k].clone(),
                            cut: Vec::new(),
                            shared: zones.regular[k].clone(),
                            depends_on: deps.into_iter().collect(),
                        });
                        order.push(g.id);
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if classes.iter().all(Option::is_some) {
            return Classification {
                labels,
                guards: classes.into_iter().map(Option::unwrap).collect(),
                order,
                resolutions,
                static_regime,
            };
        }
        // Break a cycle: convert the largest regular set at an unresolved endpoint.
        let mut pick: Option<(usize, usize, usize)> = None;
        for g in guards {
            if classes[g.id].is_some() {
                continue;
            }
            for k in 0..2 {
                let cnt = zones_of[g.id].regular[k].len();
                if cnt > 0 && pick.is_none_or(|p| cnt > p.0) {
                    pick = Some((cnt, g.id, k));
                }
            }
        }
        let (_, gid, k) = pick.expect("unresolved guard has regular triangles");
        let vertex = guards[gid].endpoints[k];
        let triangles = zones_of[gid].regular[k].clone();
        for &t in &triangles {
            assigned.insert(t, Cover { guard: gid, vertex });
        }
        resolutions.push(Resolution {
            guard: gid,
            vertex,
            triangles,
        });
    }
}

/// Dual components holding `unsafe_tris` once every edge between them and `b` is cut.
fn owned_region(
    tri: &TriangulationGraph,
    unsafe_tris: &[usize],
    b: &BTreeSet<usize>,
) -> (Vec<usize>, Vec<Edge>) {
    let u: BTreeSet<usize> = unsafe_tris.iter().copied().collect();
    let mut cut = Vec::new();
    for de in &tri.dual().edges {
        if (u.contains(&de.a) && b.contains(&de.b)) || (u.contains(&de.b) && b.contains(&de.a)) {
            cut.push(de.diagonal);
        }
    }
    let mut owned: BTreeSet<usize> = u.clone();
    let mut queue: VecDeque<usize> = u.iter().copied().collect();
    while let Some(t) = queue.pop_front() {
        for nb in tri.dual().neighbors(t) {
            if b.contains(&nb) && u.contains(&t) {
                continue;
            }
            if owned.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    cut.sort_unstable();
    (owned.into_iter().collect(), cut)
}
