use super::*;
use crate::fixtures;

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn two_disjoint_balls() {
    let b = vec![Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [5.0, 0.0, 0.0], 1.5)];
    let vd = construct_awvd(&b, &tol()).unwrap();
    assert_eq!(vd.counts(), (2, 1, 0, 0));
    assert!(validate_reds(&vd).is_empty());
    assert_eq!(vd.faces[0].loops.len(), 1);
    assert!(vd.loops[vd.faces[0].loops[0]].is_outer);
}

#[test]
fn three_balls_one_trisector() {
    let b = vec![Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [4.0, 0.0, 0.0], 1.0), Ball::new(2, [1.0, 3.0, 0.0], 1.0)];
    let vd = construct_awvd(&b, &tol()).unwrap();
    assert_eq!(vd.counts(), (3, 3, 1, 0));
    assert!(validate_reds(&vd).is_empty());
    compare_diagrams(&vd, &construct_awvd_bruteforce(&b, &tol()).unwrap(), 1e-9).unwrap();
}

#[test]
fn tetrahedron_single_vertex() {
    let vd = construct_awvd(&fixtures::tetrahedron(), &tol()).unwrap();
    assert_eq!(vd.vertices.len(), 1);
    let s = vd.vertices[0].tangent;
    assert!((s.radius - (1.5f64.sqrt() - 1.0)).abs() < 1e-9);
    assert!(s.center.norm() < 1e-9);
    assert_eq!(vd.edges.len(), 4);
    assert!(vd.edges.iter().all(|e| e.is_unbounded()));
    assert_eq!(vd.faces.len(), 6);
    assert!(validate_reds(&vd).is_empty());
}

#[test]
fn traced_matches_exhaustive_on_random_sets() {
    for seed in 0..12 {
        let b = fixtures::random_balls(seed, 6 + (seed as usize % 7), 10.0, 0.5, 2.0);
        let a = construct_awvd(&b, &tol()).unwrap();
        let c = construct_awvd_bruteforce(&b, &tol()).unwrap();
        if let Err(e) = compare_diagrams(&a, &c, 1e-6) {
            panic!("seed {seed}: {e}");
        }
    }
}

#[test]
fn exhaustive_rejects_large_inputs() {
    let b = fixtures::random_balls(1, 17, 10.0, 0.5, 1.0);
    assert!(matches!(construct_awvd_bruteforce(&b, &tol()), Err(GeomError::Precondition(_))));
}

#[test]
fn corrupted_radial_cycle_is_reported() {
    let mut vd = construct_awvd(&fixtures::tetrahedron(), &tol()).unwrap();
    let e = 2;
    let [p0, _, p2] = vd.radial_cycle(e);
    vd.partial_edges[p0].radial_next = p2;
    let report = validate_reds(&vd);
    assert_eq!(report.len(), 1, "{report:?}");
    assert_eq!(report[0].entity, "edge");
    assert_eq!(report[0].balls, vd.edges[e].equidistant_balls.to_vec());
}

/// Empty-circumsphere tetrahedra of a point set, by direct enumeration.
fn delaunay_quads(p: &[Vec3]) -> Vec<[usize; 4]> {
    let n = p.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let a = nalgebra::Matrix3::from_rows(&[
                        (p[j] - p[i]).transpose(),
                        (p[k] - p[i]).transpose(),
                        (p[l] - p[i]).transpose(),
                    ]);
                    let rhs = Vec3::new(
                        (p[j] - p[i]).norm_squared() / 2.0,
                        (p[k] - p[i]).norm_squared() / 2.0,
                        (p[l] - p[i]).norm_squared() / 2.0,
                    );
                    let Some(x) = a.lu().solve(&rhs) else { continue };
                    let c = p[i] + x;
                    let r = x.norm();
                    if (0..n).all(|m| [i, j, k, l].contains(&m) || (p[m] - c).norm() > r) {
                        out.push([i, j, k, l]);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn equal_radii_reproduce_point_diagram() {
    for seed in 0..5 {
        let b: Vec<Ball> = fixtures::random_balls(100 + seed, 10, 10.0, 0.7, 0.7);
        let vd = construct_awvd(&b, &tol()).unwrap();
        let mut got: Vec<[usize; 4]> = vd.vertices.iter().map(|v| v.balls).collect();
        got.sort();
        let pts: Vec<Vec3> = b.iter().map(|x| x.center).collect();
        let mut want = delaunay_quads(&pts);
        want.sort();
        assert_eq!(got, want, "seed {seed}");
    }
}

#[test]
fn equal_radii_beyond_full_sweep_size() {
    let b: Vec<Ball> = fixtures::random_balls(7, 48, 14.0, 0.8, 0.8);
    let vd = construct_awvd(&b, &tol()).unwrap();
    let mut got: Vec<[usize; 4]> = vd.vertices.iter().map(|v| v.balls).collect();
    got.sort();
    let pts: Vec<Vec3> = b.iter().map(|x| x.center).collect();
    let mut want = delaunay_quads(&pts);
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn small_ball_between_large_ones() {
    // a small ball in the gap of two large ones has a face with an inner loop
    let mut b = vec![
        Ball::new(0, [-3.2, 0.0, 0.0], 3.0),
        Ball::new(1, [3.2, 0.0, 0.0], 3.0),
        Ball::new(2, [0.0, 0.0, 0.0], 0.15),
    ];
    let a = construct_awvd(&b, &tol()).unwrap();
    let c = construct_awvd_bruteforce(&b, &tol()).unwrap();
    compare_diagrams(&a, &c, 1e-9).unwrap();
    assert!(validate_reds(&a).is_empty());
    // pad with distant balls so the large-input sweep is used
    for i in 0..45 {
        let ang = i as f64 * 0.7;
        b.push(Ball::new(3 + i, [30.0 + 3.0 * ang.cos(), 0.5 + 3.0 * ang.sin(), 0.3 + i as f64 * 1.1], 1.0));
    }
    let big = construct_awvd(&b, &tol()).unwrap();
    assert!(validate_reds(&big).is_empty());
    let f = big.face_of_pair(0, 2).unwrap();
    assert!(!big.faces[f].loops.is_empty());
    assert!(big.edges.iter().any(|e| e.equidistant_balls == [0, 1, 2]));
}
