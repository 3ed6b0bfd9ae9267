use serde::Serialize;

use crate::geometry::{Edge, TriangulationGraph};

/// Triangles of one basic polygon (or of the residual piece).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub triangles: Vec<usize>,
    pub vertices: Vec<usize>,
    pub residual: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasicPolygonPartition {
    pub separating_diagonals: Vec<Edge>,
    pub pieces: Vec<Piece>,
    /// Pieces sharing a separating diagonal.
    pub adjacency: Vec<Vec<usize>>,
}

/// A separating diagonal and the triangles of the basic polygon it cuts off.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub diagonal: Edge,
    pub side: Vec<usize>,
}

/// Finds the diagonal of the sub-triangulation `alive` cutting off the smallest
/// basic polygon (3 to 7 triangles), ties broken by lowest diagonal.
pub fn find_splitting_diagonal(tri: &TriangulationGraph, alive: &[bool]) -> Option<Split> {
    let total = alive.iter().filter(|&&a| a).count();
    if total + 2 < 10 {
        return None;
    }
    let root = alive.iter().position(|&a| a)?;
    let dual = tri.dual();
    let m = tri.triangle_count();
    let mut parent = vec![usize::MAX; m];
    let mut parent_edge = vec![usize::MAX; m];
    let mut order = Vec::with_capacity(total);
    let mut stack = vec![root];
    parent[root] = root;
    while let Some(t) = stack.pop() {
        order.push(t);
        for &e in &dual.adjacency[t] {
            let de = dual.edges[e];
            let u = if de.a == t { de.b } else { de.a };
            if alive[u] && parent[u] == usize::MAX {
                parent[u] = t;
                parent_edge[u] = e;
                stack.push(u);
            }
        }
    }
    let mut size = vec![1usize; m];
    for &t in order.iter().rev() {
        if t != root {
            size[parent[t]] += size[t];
        }
    }
    let mut best: Option<(usize, Edge, usize, bool)> = None;
    for &t in &order {
        if t == root {
            continue;
        }
        let diag = dual.edges[parent_edge[t]].diagonal;
        for (side, below) in [(size[t], true), (total - size[t], false)] {
            if (3..=7).contains(&side) {
                let key = (side, diag);
                if best.is_none_or(|b| key < (b.0, b.1)) {
                    best = Some((side, diag, t, below));
                }
            }
        }
    }
    let (_, diagonal, child, below) = best?;
    let in_subtree = |mut u: usize| loop {
        if u == child {
            return true;
        }
        if u == root {
            return false;
        }
        u = parent[u];
    };
    let mut side: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&u| in_subtree(u) == below)
        .collect();
    side.sort_unstable();
    Some(Split { diagonal, side })
}

fn piece_of(tri: &TriangulationGraph, triangles: Vec<usize>, residual: bool) -> Piece {
    let mut vertices: Vec<usize> = triangles.iter().flat_map(|&t| tri.triangle(t)).collect();
    vertices.sort_unstable();
    vertices.dedup();
    Piece {
        triangles,
        vertices,
        residual,
    }
}

/// Splits the triangulation into basic polygons plus one residual piece.
pub fn partition(tri: &TriangulationGraph) -> BasicPolygonPartition {
    let m = tri.triangle_count();
    let mut alive = vec![true; m];
    let mut pieces = Vec::new();
    let mut separating = Vec::new();
    while let Some(split) = find_splitting_diagonal(tri, &alive) {
        for &t in &split.side {
            alive[t] = false;
        }
        separating.push(split.diagonal);
        pieces.push(piece_of(tri, split.side, false));
    }
    let rest: Vec<usize> = (0..m).filter(|&t| alive[t]).collect();
    pieces.push(piece_of(tri, rest, true));
    let mut owner = vec![0; m];
    for (i, p) in pieces.iter().enumerate() {
        for &t in &p.triangles {
            owner[t] = i;
        }
    }
    let mut adjacency = vec![Vec::new(); pieces.len()];
    for &d in &separating {
        let ts = tri.edge_triangles(d);
        let (a, b) = (owner[ts[0]], owner[ts[1]]);
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    BasicPolygonPartition {
        separating_diagonals: separating,
        pieces,
        adjacency,
    }
}
