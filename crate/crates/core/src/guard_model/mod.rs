//! Triangle and guard classification, critical regions and coverage checks.

mod classify;
mod regions;

pub use classify::{
    classify, classify_triangles, Classification, Cover, GuardClass, GuardType, GuardZones, Resolution,
    TriangleLabels, TriangleTag,
};
pub use regions::{critical_region, CriticalRegion, CriticalRegionExport, GuardModel, AREA_TOLERANCE};

/// Guard classes for the given active vertex guards (vertex indices).
pub fn classify_guards(
    scene: &crate::scene::Scene,
    active: &std::collections::BTreeSet<usize>,
    static_regime: bool,
) -> Classification {
    classify(&scene.tri, &scene.deployment, active, static_regime)
}
