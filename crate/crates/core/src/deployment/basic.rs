use std::collections::BTreeSet;

use crate::geometry::{Edge, TriangulationGraph};

use super::DeploymentError;

/// What earlier pieces already provide.
#[derive(Clone, Debug, Default)]
pub struct PieceConstraints {
    /// Triangles with a vertex already in the candidate set.
    pub covered: Vec<bool>,
    /// Triangles with a vertex that is an endpoint of a chosen diagonal.
    pub dominated: Vec<bool>,
    /// Current candidate vertices.
    pub candidates: BTreeSet<usize>,
    /// Candidates not yet used as the candidate endpoint of a diagonal.
    pub free_candidates: BTreeSet<usize>,
    /// Diagonals already chosen.
    pub chosen: BTreeSet<Edge>,
    /// Triangles of pieces not processed yet (used for tie-breaking only).
    pub unprocessed: Vec<bool>,
}

impl PieceConstraints {
    pub fn fresh(triangles: usize) -> Self {
        Self {
            covered: vec![false; triangles],
            dominated: vec![false; triangles],
            unprocessed: vec![false; triangles],
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceSolution {
    pub vertices: Vec<usize>,
    /// Each diagonal with its candidate endpoint.
    pub diagonals: Vec<(Edge, usize)>,
}

/// Exhaustive minimum (fewest new candidates, then fewest diagonals) for one piece.
pub fn solve_basic_polygon(
    tri: &TriangulationGraph,
    triangles: &[usize],
    constraints: &PieceConstraints,
) -> Result<PieceSolution, DeploymentError> {
    let mut vertices: Vec<usize> = triangles.iter().flat_map(|&t| tri.triangle(t)).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let mut edges: Vec<Edge> = triangles.iter().flat_map(|&t| tri.triangle_edges(t)).collect();
    edges.sort_unstable();
    edges.dedup();
    edges.retain(|e| !constraints.chosen.contains(e));

    let need_cover: Vec<usize> = triangles
        .iter()
        .copied()
        .filter(|&t| !constraints.covered[t])
        .collect();
    let need_dom: Vec<usize> = triangles
        .iter()
        .copied()
        .filter(|&t| !constraints.dominated[t])
        .collect();
    let vertex_options: Vec<usize> = vertices
        .iter()
        .copied()
        .filter(|v| !constraints.candidates.contains(v))
        .collect();

    for kx in 0..=vertex_options.len() {
        let mut best: Option<(Score, PieceSolution)> = None;
        let mut best_ky = usize::MAX;
        for x in combinations(&vertex_options, kx) {
            if !need_cover
                .iter()
                .all(|&t| tri.triangle(t).iter().any(|v| x.contains(v)))
            {
                continue;
            }
            let mut pool: Vec<usize> = constraints.free_candidates.iter().copied().collect();
            pool.extend_from_slice(&x);
            pool.sort_unstable();
            for ky in 0..=edges.len().min(best_ky) {
                let mut found = false;
                for y in combinations(&edges, ky) {
                    let dominates = need_dom.iter().all(|&t| {
                        tri.triangle(t)
                            .iter()
                            .any(|&v| y.iter().any(|e| e.0 == v || e.1 == v))
                    });
                    if !dominates {
                        continue;
                    }
                    let Some(assign) = assign_candidates(&y, &pool) else {
                        continue;
                    };
                    found = true;
                    let sol = PieceSolution {
                        vertices: x.clone(),
                        diagonals: y.iter().copied().zip(assign).collect(),
                    };
                    let score = score(tri, constraints, &sol);
                    if ky < best_ky || best.as_ref().is_none_or(|(s, _)| score > *s) {
                        best_ky = ky;
                        best = Some((score, sol));
                    }
                }
                if found {
                    break;
                }
            }
        }
        if let Some((_, sol)) = best {
            return Ok(sol);
        }
    }
    Err(DeploymentError::Infeasible {
        triangle: need_cover.first().or(need_dom.first()).copied().unwrap_or(0),
    })
}

/// Larger is better. Ties resolve to the lexicographically first solution since
/// candidates are enumerated in increasing order and only strict improvements win.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    newly_dominated: usize,
    ahead_covered: usize,
}

fn score(tri: &TriangulationGraph, c: &PieceConstraints, sol: &PieceSolution) -> Score {
    let ends: BTreeSet<usize> = sol.diagonals.iter().flat_map(|(e, _)| [e.0, e.1]).collect();
    let newly_dominated = (0..tri.triangle_count())
        .filter(|&t| !c.dominated[t] && tri.triangle(t).iter().any(|v| ends.contains(v)))
        .count();
    let ahead_covered = (0..tri.triangle_count())
        .filter(|&t| {
            c.unprocessed[t] && !c.covered[t] && tri.triangle(t).iter().any(|v| sol.vertices.contains(v))
        })
        .count();
    Score {
        newly_dominated,
        ahead_covered,
    }
}

/// Distinct candidate endpoint for every diagonal, preferring lower vertex ids.
fn assign_candidates(diagonals: &[Edge], pool: &[usize]) -> Option<Vec<usize>> {
    fn go(diagonals: &[Edge], pool: &[usize], used: &mut Vec<usize>) -> bool {
        let Some(&(a, b)) = diagonals.get(used.len()) else {
            return true;
        };
        for v in [a, b] {
            if pool.binary_search(&v).is_ok() && !used.contains(&v) {
                used.push(v);
                if go(diagonals, pool, used) {
                    return true;
                }
                used.pop();
            }
        }
        false
    }
    let mut used = Vec::with_capacity(diagonals.len());
    go(diagonals, pool, &mut used).then_some(used)
}

/// All `k`-subsets of `items` in lexicographic order.
fn combinations<T: Copy>(items: &[T], k: usize) -> impl Iterator<Item = Vec<T>> + '_ {
    let n = items.len();
    let mut idx: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let cur = idx.as_ref()?;
        let out: Vec<T> = cur.iter().map(|&i| items[i]).collect();
        let mut next = cur.clone();
        let mut i = k;
        loop {
            if i == 0 {
                idx = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                idx = Some(next);
                break;
            }
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        let v: Vec<usize> = (0..6).collect();
        assert_eq!(combinations(&v, 0).count(), 1);
        assert_eq!(combinations(&v, 2).count(), 15);
        assert_eq!(combinations(&v, 6).count(), 1);
        assert_eq!(combinations(&v, 7).count(), 0);
        assert_eq!(combinations(&v, 2).next().unwrap(), vec![0, 1]);
    }

    #[test]
    fn assignment_is_distinct() {
        assert_eq!(assign_candidates(&[(0, 1), (0, 2)], &[0, 2]), Some(vec![0, 2]));
        assert_eq!(assign_candidates(&[(0, 1), (0, 2)], &[0]), None);
    }
}
