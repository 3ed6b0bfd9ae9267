//! Exact search over the rooted dual tree for a candidate set and dominating
//! diagonals that meet both cardinality bounds.

use std::collections::HashMap;

use crate::geometry::{edge_key, Edge, TriangulationGraph};

/// Per-vertex status crossing a dual edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Vs {
    /// In the candidate set.
    c: bool,
    /// 0: never an endpoint of a chosen edge, 1: endpoint, 2: endpoint still owed.
    x: u8,
    /// Candidate not yet consumed by a chosen edge (on this branch).
    tok: bool,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    /// Parent edge (p0, p1) and the vertex new to this triangle.
    p0: usize,
    p1: usize,
    w: usize,
    child1: Option<usize>,
    child2: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Choice {
    cw: bool,
    xw: u8,
    e1: u8,
    e2: u8,
    w_tok_to: u8,
    w_owe_to: u8,
    k1: u32,
    k2: u32,
}

#[derive(Clone, Copy, Debug)]
struct Opt {
    c: u16,
    h: u16,
    choice: Choice,
}

struct Solver<'a> {
    tri: &'a TriangulationGraph,
    nodes: Vec<Node>,
    max_c: u16,
    max_h: u16,
    memo: HashMap<(usize, Vs, Vs), Vec<Opt>>,
}

/// Candidate vertices and diagonals with their candidate endpoints.
pub struct ExactSolution {
    pub candidates: Vec<usize>,
    pub diagonals: Vec<(Edge, usize)>,
}

fn push_pareto(list: &mut Vec<Opt>, o: Opt) {
    if list.iter().any(|p| p.c <= o.c && p.h <= o.h) {
        return;
    }
    list.retain(|p| !(o.c <= p.c && o.h <= p.h));
    list.push(o);
}

/// Edge choice: 0 off, 1 on with candidate `a`, 2 on with candidate `b`.
fn apply_edge(choice: u8, a: &mut Vs, b: &mut Vs) -> bool {
    if choice == 0 {
        return true;
    }
    if a.x == 0 || b.x == 0 {
        return false;
    }
    let cand = if choice == 1 { &mut *a } else { &mut *b };
    if !(cand.c && cand.tok) {
        return false;
    }
    cand.tok = false;
    a.x = 1;
    b.x = 1;
    true
}

impl<'a> Solver<'a> {
    fn solve(&mut self, t: usize, s0: Vs, s1: Vs) -> Vec<Opt> {
        if let Some(v) = self.memo.get(&(t, s0, s1)) {
            return v.clone();
        }
        let node = self.nodes[t];
        let mut out: Vec<Opt> = Vec::new();
        for cw in [false, true] {
            for xw in [0u8, 2] {
                for e1 in 0..3u8 {
                    for e2 in 0..3u8 {
                        let (mut u, mut v) = (s0, s1);
                        let mut w = Vs { c: cw, x: xw, tok: cw };
                        if !apply_edge(e1, &mut u, &mut w) || !apply_edge(e2, &mut v, &mut w) {
                            continue;
                        }
                        if !(u.c || v.c || w.c) || (u.x == 0 && v.x == 0 && w.x == 0) {
                            continue;
                        }
                        if (node.child1.is_none() && u.x == 2) || (node.child2.is_none() && v.x == 2) {
                            continue;
                        }
                        let cost_c = cw as u16;
                        let cost_h = (e1 != 0) as u16 + (e2 != 0) as u16;
                        let tok_opts: &[u8] = if w.tok { &[1, 2] } else { &[0] };
                        let owe_opts: &[u8] = if w.x == 2 { &[1, 2] } else { &[0] };
                        for &tt in tok_opts {
                            for &oo in owe_opts {
                                let mk = |side: u8| -> Option<Vs> {
                                    let exists = if side == 1 { node.child1 } else { node.child2 };
                                    exists?;
                                    Some(Vs {
                                        c: w.c,
                                        x: if w.x == 2 {
                                            if oo == side {
                                                2
                                            } else {
                                                1
                                            }
                                        } else {
                                            w.x
                                        },
                                        tok: w.tok && tt == side,
                                    })
                                };
                                if tt != 0 && mk(tt).is_none() {
                                    continue;
                                }
                                if oo != 0 && mk(oo).is_none() {
                                    continue;
                                }
                                let l1 = match node.child1 {
                                    Some(c1) => self.solve(c1, u, mk(1).unwrap()),
                                    None => vec![Opt { c: 0, h: 0, choice: dummy() }],
                                };
                                let l2 = match node.child2 {
                                    Some(c2) => self.solve(c2, v, mk(2).unwrap()),
                                    None => vec![Opt { c: 0, h: 0, choice: dummy() }],
                                };
                                for (k1, a) in l1.iter().enumerate() {
                                    for (k2, b) in l2.iter().enumerate() {
                                        let c = cost_c + a.c + b.c;
                                        let h = cost_h + a.h + b.h;
                                        if c > self.max_c || h > self.max_h {
                                            continue;
                                        }
                                        push_pareto(
                                            &mut out,
                                            Opt {
                                                c,
                                                h,
                                                choice: Choice {
                                                    cw,
                                                    xw,
                                                    e1,
                                                    e2,
                                                    w_tok_to: tt,
                                                    w_owe_to: oo,
                                                    k1: k1 as u32,
                                                    k2: k2 as u32,
                                                },
                                            },
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        self.memo.insert((t, s0, s1), out.clone());
        out
    }

    fn rebuild(&mut self, t: usize, s0: Vs, s1: Vs, k: usize, sol: &mut ExactSolution) {
        let node = self.nodes[t];
        let o = self.memo[&(t, s0, s1)][k];
        let ch = o.choice;
        let (mut u, mut v) = (s0, s1);
        let mut w = Vs { c: ch.cw, x: ch.xw, tok: ch.cw };
        apply_edge(ch.e1, &mut u, &mut w);
        apply_edge(ch.e2, &mut v, &mut w);
        if ch.cw {
            sol.candidates.push(node.w);
        }
        for (e, a, b) in [(ch.e1, node.p0, node.w), (ch.e2, node.p1, node.w)] {
            if e != 0 {
                sol.diagonals.push((edge_key(a, b), if e == 1 { a } else { b }));
            }
        }
        let mk = |side: u8| Vs {
            c: w.c,
            x: if w.x == 2 {
                if ch.w_owe_to == side {
                    2
                } else {
                    1
                }
            } else {
                w.x
            },
            tok: w.tok && ch.w_tok_to == side,
        };
        if let Some(c1) = node.child1 {
            self.rebuild(c1, u, mk(1), ch.k1 as usize, sol);
        }
        if let Some(c2) = node.child2 {
            self.rebuild(c2, v, mk(2), ch.k2 as usize, sol);
        }
    }
}

fn dummy() -> Choice {
    Choice {
        cw: false,
        xw: 0,
        e1: 0,
        e2: 0,
        w_tok_to: 0,
        w_owe_to: 0,
        k1: 0,
        k2: 0,
    }
}

/// Searches for a candidate set of at most `max_c` vertices and at most `max_h`
/// dominating edges, each with a distinct candidate endpoint. Among feasible
/// results the one with fewest candidates, then fewest edges, is returned.
pub fn exact_deployment(tri: &TriangulationGraph, max_c: usize, max_h: usize) -> Option<ExactSolution> {
    let m = tri.triangle_count();
    let dual = tri.dual();
    // Root at a dual leaf, entering through one of its boundary edges.
    let root = (0..m).find(|&t| dual.adjacency[t].len() <= 1)?;
    let [a, b, c] = tri.triangle(root);
    let (r0, r1) = [(a, b), (b, c), (c, a)]
        .into_iter()
        .find(|&(x, y)| !tri.is_diagonal(edge_key(x, y)))?;
    let mut nodes = vec![
        Node {
            p0: 0,
            p1: 0,
            w: 0,
            child1: None,
            child2: None
        };
        m
    ];
    let mut stack = vec![(root, r0, r1)];
    let mut seen = vec![false; m];
    while let Some((t, p0, p1)) = stack.pop() {
        seen[t] = true;
        let w = tri.triangle(t).into_iter().find(|&x| x != p0 && x != p1).unwrap();
        let across = |x: usize| -> Option<usize> {
            tri.edge_triangles(edge_key(x, w))
                .iter()
                .copied()
                .find(|&o| o != t && !seen[o])
        };
        let child1 = across(p0);
        let child2 = across(p1);
        nodes[t] = Node { p0, p1, w, child1, child2 };
        if let Some(c1) = child1 {
            stack.push((c1, p0, w));
        }
        if let Some(c2) = child2 {
            stack.push((c2, p1, w));
        }
    }
    let mut solver = Solver {
        tri,
        nodes,
        max_c: max_c as u16,
        max_h: max_h as u16,
        memo: HashMap::new(),
    };
    let _ = solver.tri;
    let mut best: Option<(u16, u16, Vs, Vs, u8, usize)> = None;
    for c0 in [false, true] {
        for c1 in [false, true] {
            for x0 in [0u8, 2] {
                for x1 in [0u8, 2] {
                    for e in 0..3u8 {
                        let mut s0 = Vs { c: c0, x: x0, tok: c0 };
                        let mut s1 = Vs { c: c1, x: x1, tok: c1 };
                        if !apply_edge(e, &mut s0, &mut s1) {
                            continue;
                        }
                        let base_c = c0 as u16 + c1 as u16;
                        let base_h = (e != 0) as u16;
                        let list = solver.solve(root, s0, s1);
                        for (k, o) in list.iter().enumerate() {
                            let key = (base_c + o.c, base_h + o.h);
                            if key.0 as usize > max_c || key.1 as usize > max_h {
                                continue;
                            }
                            if best.is_none_or(|b| key < (b.0, b.1)) {
                                best = Some((key.0, key.1, s0, s1, e, k));
                            }
                        }
                    }
                }
            }
        }
    }
    let (_, _, s0, s1, e, k) = best?;
    let mut sol = ExactSolution {
        candidates: Vec::new(),
        diagonals: Vec::new(),
    };
    if s0.c {
        sol.candidates.push(r0);
    }
    if s1.c {
        sol.candidates.push(r1);
    }
    if e != 0 {
        sol.diagonals.push((edge_key(r0, r1), if e == 1 { r0 } else { r1 }));
    }
    solver.rebuild(root, s0, s1, k, &mut sol);
    sol.candidates.sort_unstable();
    Some(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::edge_key;

    fn convex_triangulations(i: usize, j: usize) -> Vec<Vec<[usize; 3]>> {
        if j < i + 2 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for k in i + 1..j {
            for left in convex_triangulations(i, k) {
                for right in convex_triangulations(k, j) {
                    let mut t = left.clone();
                    t.extend(right);
                    t.push([i, k, j]);
                    out.push(t);
                }
            }
        }
        out
    }

    fn dominates(tri: &TriangulationGraph, verts: &[usize]) -> bool {
        tri.triangles().iter().all(|t| t.iter().any(|v| verts.contains(v)))
    }

    fn subsets<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            for mut rest in subsets(&items[i + 1..], k - 1) {
                rest.insert(0, x);
                out.push(rest);
            }
        }
        out
    }

    fn assignable(edges: &[Edge], cands: &[usize], used: &mut Vec<usize>) -> bool {
        let Some((&(a, b), rest)) = edges.split_first() else { return true };
        for v in [a, b] {
            if cands.contains(&v) && !used.contains(&v) {
                used.push(v);
                if assignable(rest, cands, used) {
                    return true;
                }
                used.pop();
            }
        }
        false
    }

    /// Lexicographically smallest (candidates, edges) by exhaustive search.
    fn brute(tri: &TriangulationGraph, max_c: usize, max_h: usize) -> Option<(usize, usize)> {
        let verts: Vec<usize> = (0..tri.vertex_count()).collect();
        let edges: Vec<Edge> = tri.edges().collect();
        for c in 0..=max_c {
            let mut best_h = None;
            for cands in subsets(&verts, c).into_iter().filter(|s| dominates(tri, s)) {
                for h in 0..=max_h {
                    if best_h.is_some_and(|b| h >= b) {
                        break;
                    }
                    let hit = subsets(&edges, h).into_iter().any(|hs| {
                        let ends: Vec<usize> = hs.iter().flat_map(|e| [e.0, e.1]).collect();
                        dominates(tri, &ends) && assignable(&hs, &cands, &mut Vec::new())
                    });
                    if hit {
                        best_h = Some(h);
                    }
                }
            }
            if let Some(h) = best_h {
                return Some((c, h));
            }
        }
        None
    }

    fn valid(tri: &TriangulationGraph, sol: &ExactSolution) -> bool {
        let ends: Vec<usize> = sol.diagonals.iter().flat_map(|(e, _)| [e.0, e.1]).collect();
        let mut cands: Vec<usize> = sol.diagonals.iter().map(|d| d.1).collect();
        let all_on_edges = sol
            .diagonals
            .iter()
            .all(|&(e, c)| tri.has_edge(e) && (e.0 == c || e.1 == c) && sol.candidates.contains(&c));
        cands.sort_unstable();
        cands.dedup();
        dominates(tri, &sol.candidates)
            && dominates(tri, &ends)
            && all_on_edges
            && cands.len() == sol.diagonals.len()
    }

    #[test]
    fn matches_brute_force_on_convex_triangulations() {
        for n in 5..=9 {
            for tris in convex_triangulations(0, n - 1) {
                let tri = TriangulationGraph::from_triangles(n, tris);
                let got = exact_deployment(&tri, n / 3, n / 4);
                let want = brute(&tri, n / 3, n / 4);
                match (got, want) {
                    (Some(sol), Some((c, h))) => {
                        assert!(valid(&tri, &sol));
                        assert_eq!((sol.candidates.len(), sol.diagonals.len()), (c, h));
                    }
                    (None, None) => {}
                    (g, w) => panic!("n = {n}: exact {:?} vs brute {w:?}", g.map(|s| s.candidates)),
                }
            }
        }
    }

    #[test]
    fn fan_needs_one_candidate_and_one_edge() {
        let tris: Vec<[usize; 3]> = (1..6).map(|i| [0, i, i + 1]).collect();
        let tri = TriangulationGraph::from_triangles(7, tris);
        let sol = exact_deployment(&tri, 2, 1).unwrap();
        assert_eq!(sol.candidates, vec![0]);
        assert_eq!(sol.diagonals.len(), 1);
        assert_eq!(sol.diagonals[0].1, 0);
        assert!(tri.has_edge(edge_key(sol.diagonals[0].0 .0, sol.diagonals[0].0 .1)));
    }
}
