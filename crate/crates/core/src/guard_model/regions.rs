use std::sync::OnceLock;

use serde::Serialize;

use super::classify::{Classification, GuardClass, GuardType};
use crate::geometry::{offset_from_field, Point, Region, RegionLoops, Segment, SourceField};
use crate::scene::Scene;

/// Relative area below which a failure region counts as empty.
pub const AREA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
enum Owned {
    Nothing,
    Triangles(Vec<bool>),
    Area,
}

/// Owned region, interface and critical offset of one diagonal guard at a given `r`.
#[derive(Clone, Debug)]
pub struct CriticalRegion {
    pub guard: usize,
    pub ty: GuardType,
    pub resident: usize,
    pub far: usize,
    /// Reaction distance `r * length`.
    pub d_max: f64,
    pub owned: Region,
    /// Boundary of the owned region inside the polygon.
    pub interface: Vec<Segment>,
    kind: Owned,
    field: Option<SourceField>,
    ball: OnceLock<Region>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalRegionExport {
    pub guard: usize,
    pub ty: GuardType,
    pub resident: usize,
    pub far: usize,
    pub d_max: f64,
    pub owned: RegionLoops,
    pub interface: Vec<[Point; 2]>,
    pub critical: RegionLoops,
}

fn triangle_region(scene: &Scene, t: usize) -> Region {
    Region::from_ring(&scene.tri.triangle_points(&scene.polygon, t))
}

fn interior_segments(scene: &Scene, segs: Vec<Segment>) -> Vec<Segment> {
    let eps = scene.polygon.eps();
    segs.into_iter()
        .filter(|s| s.length() > eps && scene.polygon.boundary_distance(s.midpoint()) > eps)
        .collect()
}

impl CriticalRegion {
    /// Closed membership in the owned region.
    pub fn owns(&self, scene: &Scene, x: Point) -> bool {
        match &self.kind {
            Owned::Nothing => false,
            Owned::Triangles(member) => scene.tri.containing(&scene.polygon, x).iter().any(|&t| member[t]),
            Owned::Area => self.owned.touches(x),
        }
    }

    /// Geodesic distance from `x` to the owned region.
    pub fn distance_to_owned(&self, scene: &Scene, x: Point) -> f64 {
        if self.ty == GuardType::Type0 {
            return 0.0;
        }
        if self.owns(scene, x) {
            return 0.0;
        }
        match &self.field {
            Some(f) => f.distance(&scene.index, x),
            None => f64::INFINITY,
        }
    }

    /// Position parameter from `resident` (0) towards `far` (1) for an intruder at `x`.
    pub fn reactive_param(&self, scene: &Scene, x: Point) -> f64 {
        if self.ty == GuardType::Type0 || self.owns(scene, x) {
            return 0.0;
        }
        let euclid = self.interface.iter().map(|s| s.distance_to(x)).fold(f64::INFINITY, f64::min);
        if euclid >= self.d_max {
            return 1.0;
        }
        let d = self.distance_to_owned(scene, x);
        if d == 0.0 {
            return 0.0;
        }
        (d / self.d_max).clamp(0.0, 1.0)
    }

    /// Points within `d_max` of the owned region, owned region included.
    pub fn ball(&self, scene: &Scene) -> &Region {
        self.ball.get_or_init(|| match &self.field {
            Some(f) => self
                .owned
                .union(&offset_from_field(&scene.index, f, self.d_max))
                .simplified(scene.polygon.eps()),
            None => self.owned.clone(),
        })
    }

    /// Critical region: the ball minus the owned region.
    pub fn critical(&self, scene: &Scene) -> Region {
        self.ball(scene).difference(&self.owned)
    }

    /// Part of triangle `t` (as `tri_region`) where the intruder is not covered by
    /// this guard from vertex `v`.
    pub fn failure(&self, scene: &Scene, t: usize, tri_region: &Region, v: usize) -> Region {
        if self.ty == GuardType::Type0 {
            return if v == self.resident {
                Region::empty()
            } else {
                tri_region.clone()
            };
        }
        if v == self.resident {
            match &self.kind {
                Owned::Triangles(member) if member[t] => Region::empty(),
                Owned::Triangles(_) | Owned::Nothing => tri_region.clone(),
                Owned::Area => tri_region.difference(&self.owned),
            }
        } else if v == self.far {
            self.ball(scene).intersect(tri_region)
        } else {
            tri_region.clone()
        }
    }

    pub fn export(&self, scene: &Scene) -> CriticalRegionExport {
        CriticalRegionExport {
            guard: self.guard,
            ty: self.ty,
            resident: self.resident,
            far: self.far,
            d_max: self.d_max,
            owned: self.owned.to_loops(),
            interface: self.interface.iter().map(|s| [s.a, s.b]).collect(),
            critical: self.critical(scene).to_loops(),
        }
    }
}

/// Classification plus critical regions for a reaction ratio `r`.
#[derive(Clone, Debug)]
pub struct GuardModel {
    pub r: f64,
    pub classification: Classification,
    pub regions: Vec<CriticalRegion>,
}

/// Owned region and critical offset of one guard; type 2 guards need the regions
/// of the guards they depend on in `built`.
pub fn critical_region(
    scene: &Scene,
    class: &GuardClass,
    classification: &Classification,
    built: &[Option<CriticalRegion>],
    r: f64,
) -> CriticalRegion {
    let g = &scene.deployment.diagonal_guards[class.guard];
    let d_max = r * g.length;
    let base = |kind, owned, interface: Vec<Segment>| {
        let field = (!interface.is_empty()).then(|| SourceField::new(&scene.index, interface.clone()));
        CriticalRegion {
            guard: class.guard,
            ty: class.ty,
            resident: class.resident,
            far: class.far,
            d_max,
            owned,
            interface,
            kind,
            field,
            ball: OnceLock::new(),
        }
    };
    match class.ty {
        GuardType::Type0 => base(Owned::Nothing, Region::empty(), Vec::new()),
        GuardType::Type1 => {
            let mut member = vec![false; scene.tri.triangle_count()];
            let regions: Vec<Region> = class
                .owned
                .iter()
                .map(|&t| {
                    member[t] = true;
                    triangle_region(scene, t)
                })
                .collect();
            let owned = Region::union_all(&regions);
            let interface = class
                .cut
                .iter()
                .map(|&(a, b)| Segment::new(scene.polygon.vertex(a), scene.polygon.vertex(b)))
                .collect();
            base(Owned::Triangles(member), owned, interface)
        }
        GuardType::Type2 => {
            let mut parts: Vec<Region> = class.owned.iter().map(|&t| triangle_region(scene, t)).collect();
            for &t in &class.shared {
                let tr = triangle_region(scene, t);
                let mut rest = tr.clone();
                for c in &classification.labels.covering[t] {
                    if c.guard == class.guard {
                        continue;
                    }
                    let other = built[c.guard].as_ref().expect("dependency built first");
                    rest = rest.intersect(&other.failure(scene, t, &tr, c.vertex));
                    if rest.is_empty() {
                        break;
                    }
                }
                if rest.area() > AREA_TOLERANCE * tr.area() {
                    parts.push(rest);
                }
            }
            let owned = Region::union_all(&parts);
            let interface = interior_segments(scene, owned.boundary_segments());
            let kind = if owned.is_empty() { Owned::Nothing } else { Owned::Area };
            base(kind, owned, interface)
        }
    }
}

impl GuardModel {
    pub fn new(scene: &Scene, classification: Classification, r: f64) -> Self {
        let k = scene.diagonal_guard_count();
        let mut built: Vec<Option<CriticalRegion>> = (0..k).map(|_| None).collect();
        for &g in &classification.order {
            let region = critical_region(scene, &classification.guards[g], &classification, &built, r);
            built[g] = Some(region);
        }
        Self {
            r,
            regions: built.into_iter().map(|b| b.expect("every guard classified")).collect(),
            classification,
        }
    }

    /// Whether the intruder is covered everywhere in triangle `t`.
    pub fn coverage_check(&self, scene: &Scene, t: usize) -> bool {
        let labels = &self.classification.labels;
        if labels.is_safe(t) {
            return true;
        }
        let tr = triangle_region(scene, t);
        let tol = AREA_TOLERANCE * tr.area();
        let mut rest = tr.clone();
        for c in &labels.covering[t] {
            rest = rest.intersect(&self.regions[c.guard].failure(scene, t, &tr, c.vertex));
            if rest.area() <= tol {
                return true;
            }
        }
        rest.area() <= tol
    }

    /// Triangles failing the coverage check, in increasing order.
    pub fn failing(&self, scene: &Scene) -> Vec<usize> {
        self.classification
            .labels
            .non_safe()
            .filter(|&t| !self.coverage_check(scene, t))
            .collect()
    }

    /// Where guard `g` stands while the intruder is at `x`.
    pub fn reactive_position(&self, scene: &Scene, g: usize, x: Point) -> Point {
        let reg = &self.regions[g];
        let t = reg.reactive_param(scene, x);
        scene.polygon.vertex(reg.resident).lerp(scene.polygon.vertex(reg.far), t)
    }
}
