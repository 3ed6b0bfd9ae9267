//! Candidate vertices, dominating diagonals and the guard roster.

mod basic;
mod exact;
mod partition;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use exact::{exact_deployment, ExactSolution};
pub use basic::{solve_basic_polygon, PieceConstraints, PieceSolution};
pub use partition::{find_splitting_diagonal, partition, BasicPolygonPartition, Piece, Split};

use crate::geometry::{Edge, Polygon, TriangulationGraph};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DeploymentError {
    #[error("no feasible guard choice covers triangle {triangle}")]
    Infeasible { triangle: usize },
}

/// A mobile guard confined to one triangulation edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGuard {
    pub id: usize,
    /// Candidate endpoint first.
    pub endpoints: [usize; 2],
    pub candidate: usize,
    /// Euclidean length of the diagonal.
    pub length: f64,
}

impl DiagonalGuard {
    pub fn edge(&self) -> Edge {
        crate::geometry::edge_key(self.endpoints[0], self.endpoints[1])
    }

    pub fn other(&self, v: usize) -> usize {
        if self.endpoints[0] == v {
            self.endpoints[1]
        } else {
            self.endpoints[0]
        }
    }

    pub fn has_endpoint(&self, v: usize) -> bool {
        self.endpoints.contains(&v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGuard {
    pub id: usize,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatingDiagonal {
    pub edge: Edge,
    pub candidate: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub n: usize,
    pub candidate_vertices: Vec<usize>,
    pub dominating_diagonals: Vec<DominatingDiagonal>,
    pub diagonal_guards: Vec<DiagonalGuard>,
    pub vertex_guards: Vec<VertexGuard>,
    pub candidate_vertices_of_diagonals: Vec<usize>,
}

/// Cardinality and domination checks for a deployment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub candidates: usize,
    pub candidate_bound: usize,
    pub diagonals: usize,
    pub diagonal_bound: usize,
    pub candidates_dominate: bool,
    pub diagonals_dominate: bool,
    pub distinct_candidates: bool,
}

impl BoundsReport {
    pub fn ok(&self) -> bool {
        self.candidates <= self.candidate_bound
            && self.diagonals <= self.diagonal_bound
            && self.candidates_dominate
            && self.diagonals_dominate
            && self.distinct_candidates
    }
}

impl Deployment {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("deployment serializes")
    }

    pub fn check(&self, tri: &TriangulationGraph) -> BoundsReport {
        let sc: BTreeSet<usize> = self.candidate_vertices.iter().copied().collect();
        let ends: BTreeSet<usize> = self
            .dominating_diagonals
            .iter()
            .flat_map(|d| [d.edge.0, d.edge.1])
            .collect();
        let cands: Vec<usize> = self.dominating_diagonals.iter().map(|d| d.candidate).collect();
        let distinct: BTreeSet<usize> = cands.iter().copied().collect();
        let (bound_c, bound_h) = if self.n >= 5 {
            (self.n / 3, self.n / 4)
        } else {
            (1, 0)
        };
        BoundsReport {
            n: self.n,
            candidates: sc.len(),
            candidate_bound: bound_c,
            diagonals: self.dominating_diagonals.len(),
            diagonal_bound: bound_h,
            candidates_dominate: tri.triangles().iter().all(|t| t.iter().any(|v| sc.contains(v))),
            diagonals_dominate: self.n < 5
                || tri.triangles().iter().all(|t| t.iter().any(|v| ends.contains(v))),
            distinct_candidates: distinct.len() == cands.len()
                && self
                    .dominating_diagonals
                    .iter()
                    .all(|d| sc.contains(&d.candidate) && (d.edge.0 == d.candidate || d.edge.1 == d.candidate)),
        }
    }
}

/// Guard deployment over a triangulation of `polygon`.
pub fn deploy(polygon: &Polygon, tri: &TriangulationGraph) -> Result<Deployment, DeploymentError> {
    let n = tri.vertex_count();
    let m = tri.triangle_count();
    if n < 5 {
        let v = (0..n)
            .find(|&v| tri.vertex_triangles(v).len() == m)
            .expect("some vertex touches every triangle");
        return Ok(Deployment {
            n,
            candidate_vertices: vec![v],
            dominating_diagonals: Vec::new(),
            diagonal_guards: Vec::new(),
            vertex_guards: vec![VertexGuard { id: 0, vertex: v }],
            candidate_vertices_of_diagonals: Vec::new(),
        });
    }
    let part = partition(tri);
    let k = part.pieces.len();
    let mut c = PieceConstraints::fresh(m);
    for p in &part.pieces {
        for &t in &p.triangles {
            c.unprocessed[t] = true;
        }
    }
    let mut marked = vec![false; k];
    let mut chosen: Vec<DominatingDiagonal> = Vec::new();
    for _ in 0..k {
        let next = (0..k)
            .find(|&i| !marked[i] && part.adjacency[i].iter().filter(|&&j| !marked[j]).count() <= 1)
            .expect("piece graph is a tree");
        marked[next] = true;
        let piece = &part.pieces[next];
        for &t in &piece.triangles {
            c.unprocessed[t] = false;
        }
        let sol = solve_basic_polygon(tri, &piece.triangles, &c)?;
        for &v in &sol.vertices {
            c.candidates.insert(v);
            c.free_candidates.insert(v);
            for &t in tri.vertex_triangles(v) {
                c.covered[t] = true;
            }
        }
        for &(e, cand) in &sol.diagonals {
            c.free_candidates.remove(&cand);
            c.chosen.insert(e);
            for v in [e.0, e.1] {
                for &t in tri.vertex_triangles(v) {
                    c.dominated[t] = true;
                }
            }
            chosen.push(DominatingDiagonal { edge: e, candidate: cand });
        }
    }
    let greedy = assemble(polygon, n, c.candidates.iter().copied().collect(), chosen);
    if greedy.check(tri).ok() {
        return Ok(greedy);
    }
    match exact_deployment(tri, n / 3, n / 4) {
        Some(sol) => {
            let mut diagonals: Vec<DominatingDiagonal> = sol
                .diagonals
                .into_iter()
                .map(|(edge, candidate)| DominatingDiagonal { edge, candidate })
                .collect();
            diagonals.sort_by_key(|d| d.edge);
            Ok(assemble(polygon, n, sol.candidates, diagonals))
        }
        None => Ok(greedy),
    }
}

fn assemble(
    polygon: &Polygon,
    n: usize,
    candidate_vertices: Vec<usize>,
    chosen: Vec<DominatingDiagonal>,
) -> Deployment {
    let diagonal_guards: Vec<DiagonalGuard> = chosen
        .iter()
        .enumerate()
        .map(|(id, d)| {
            let other = if d.edge.0 == d.candidate { d.edge.1 } else { d.edge.0 };
            DiagonalGuard {
                id,
                endpoints: [d.candidate, other],
                candidate: d.candidate,
                length: polygon.vertex(d.edge.0).dist(polygon.vertex(d.edge.1)),
            }
        })
        .collect();
    let mut di: Vec<usize> = chosen.iter().map(|d| d.candidate).collect();
    di.sort_unstable();
    let vertex_guards = candidate_vertices
        .iter()
        .filter(|v| di.binary_search(v).is_err())
        .enumerate()
        .map(|(id, &vertex)| VertexGuard { id, vertex })
        .collect();
    Deployment {
        n,
        candidate_vertices,
        dominating_diagonals: chosen,
        diagonal_guards,
        vertex_guards,
        candidate_vertices_of_diagonals: di,
    }
}
