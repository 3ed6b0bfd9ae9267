//! A polygon together with everything derived from it once.

use crate::deployment::{deploy, Deployment, DeploymentError};
use crate::geometry::{triangulate, GeodesicIndex, GeometryError, Polygon, TriangulationGraph};

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Deployment(#[from] DeploymentError),
}

#[derive(Debug)]
pub struct Scene {
    pub polygon: Polygon,
    pub tri: TriangulationGraph,
    pub index: GeodesicIndex,
    pub deployment: Deployment,
}

impl Scene {
    pub fn new(polygon: Polygon) -> Result<Self, SceneError> {
        let tri = triangulate(&polygon)?;
        let deployment = deploy(&polygon, &tri)?;
        Ok(Self::with_deployment(polygon, tri, deployment))
    }

    pub fn with_deployment(polygon: Polygon, tri: TriangulationGraph, deployment: Deployment) -> Self {
        let index = GeodesicIndex::new(&polygon);
        Self {
            polygon,
            tri,
            index,
            deployment,
        }
    }

    pub fn diagonal_guard_count(&self) -> usize {
        self.deployment.diagonal_guards.len()
    }

    pub fn vertex_guard_count(&self) -> usize {
        self.deployment.vertex_guards.len()
    }
}
