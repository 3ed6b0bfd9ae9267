mod oracle;

use std::collections::BTreeSet;

use polyguard_core::activation::ActivationState;
use polyguard_core::corpus;
use polyguard_core::geometry::{triangulate, visibility_polygon, GeodesicIndex};
use polyguard_core::guard_model::{classify_guards, GuardModel};
use polyguard_core::{Point, Scene};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracle::{sample_inside, Walls};

fn tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangulation_tiles_polygon(n in 3usize..50, seed in any::<u64>()) {
        let p = corpus::random_polygon(n, seed);
        let t = triangulate(&p).unwrap();
        prop_assert_eq!(t.triangle_count(), n - 2);
        let mut total = 0.0;
        for k in 0..t.triangle_count() {
            let [a, b, c] = t.triangle_points(&p, k);
            let ar = tri_area(a, b, c);
            prop_assert!(ar > 0.0);
            total += ar;
        }
        let walls = Walls::new(p.vertices());
        prop_assert!((total - walls.area()).abs() <= 1e-9 * walls.area());
        prop_assert_eq!(t.diagonals().len(), n - 3);
    }

    #[test]
    fn deployment_bounds_hold(n in 5usize..61, seed in any::<u64>()) {
        let p = corpus::random_polygon(n, seed);
        let scene = Scene::new(p).unwrap();
        let report = scene.deployment.check(&scene.tri);
        prop_assert!(report.ok(), "{:?}", report);
        let tris = scene.tri.triangles();
        let cands: BTreeSet<usize> = scene.deployment.candidate_vertices.iter().copied().collect();
        prop_assert!(tris.iter().all(|t| t.iter().any(|v| cands.contains(v))));
        prop_assert_eq!(
            scene.deployment.diagonal_guards.len() + scene.deployment.vertex_guards.len(),
            cands.len()
        );
    }

    #[test]
    fn geodesic_is_a_metric_above_euclid(n in 5usize..40, seed in any::<u64>(), s in any::<u64>()) {
        let p = corpus::random_polygon(n, seed);
        let index = GeodesicIndex::new(&p);
        let walls = Walls::new(p.vertices());
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut draw = || sample_inside(&walls, &mut || rng.random());
        let (a, b, c) = (draw(), draw(), draw());
        let ab = index.distance(a, b);
        prop_assert!((ab - index.distance(b, a)).abs() <= 1e-9 * (1.0 + ab));
        prop_assert!(ab >= a.dist(b) - 1e-12);
        prop_assert!(ab <= index.distance(a, c) + index.distance(c, b) + 1e-9);
        let path = index.shortest_path(a, b);
        let len: f64 = path.windows(2).map(|w| w[0].dist(w[1])).sum();
        prop_assert!((len - ab).abs() <= 1e-7 * (1.0 + ab));
    }

    #[test]
    fn visibility_polygon_matches_segment_scan(n in 5usize..40, seed in any::<u64>(), s in any::<u64>()) {
        let p = corpus::random_polygon(n, seed);
        let walls = Walls::new(p.vertices());
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let x = sample_inside(&walls, &mut || rng.random());
        let vis = visibility_polygon(&p, x).unwrap();
        // Region booleans snap coordinates on the order of the polygon tolerance.
        let perimeter: f64 = p.edges().map(|e| e.length()).sum();
        prop_assert!(vis.area() <= walls.area() + perimeter * 10.0 * p.eps());
        for _ in 0..40 {
            let q = sample_inside(&walls, &mut || rng.random());
            let seen = walls.clear(x, q) && walls.inside(x.lerp(q, 0.5));
            // Skip samples grazing the visibility boundary.
            let near_edge = vis.boundary_segments().iter().any(|e| e.distance_to(q) < 1e-6);
            if !near_edge {
                prop_assert_eq!(vis.contains(q), seen, "q = {:?}", q);
            }
        }
    }

    #[test]
    fn reactive_positions_stay_on_diagonal(seed in any::<u64>(), r in 0.0f64..2.0, s in any::<u64>()) {
        let scene = Scene::new(corpus::random_polygon(20, seed)).unwrap();
        let c = classify_guards(&scene, &BTreeSet::new(), false);
        let m = GuardModel::new(&scene, c, r);
        let walls = Walls::new(scene.polygon.vertices());
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        for _ in 0..10 {
            let x = sample_inside(&walls, &mut || rng.random());
            for g in &scene.deployment.diagonal_guards {
                let pos = m.reactive_position(&scene, g.id, x);
                let a = scene.polygon.vertex(g.endpoints[0]);
                let b = scene.polygon.vertex(g.endpoints[1]);
                prop_assert!((b - a).cross(pos - a).abs() <= 1e-9 * a.dist(b).powi(2));
                prop_assert!(pos.dist(a) + pos.dist(b) <= a.dist(b) * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn tracking_assignment_is_never_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for (k, p) in corpus::random_corpus(10, 8, 40, 17).into_iter().enumerate() {
        let scene = Scene::new(p).unwrap();
        let walls = Walls::new(scene.polygon.vertices());
        for r in [0.05, 0.3, 0.9, 2.0] {
            let mut state = ActivationState::new(&scene, 0.0);
            state.update_active_guards(&scene, r);
            assert!(state.model().failing(&scene).is_empty(), "polygon {k} r {r}");
            for _ in 0..250 {
                let x = sample_inside(&walls, &mut || rng.random());
                let trackers = state.resolve_tracking_assignment(&scene, x).unwrap();
                assert!(!trackers.is_empty(), "polygon {k} r {r} at {x:?}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 10_000);
}
