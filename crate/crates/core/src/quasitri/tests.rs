use super::*;
use crate::fixtures;
use crate::model::{Ball, Vec3};
use crate::predicates::Tolerances;

fn qt_of(b: &[Ball]) -> QuasiTriangulation {
    build_quasi_triangulation(b, &Tolerances::default()).unwrap()
}

fn duality_holds(qt: &QuasiTriangulation) {
    let (c, f, e, v) = qt.vd.counts();
    assert_eq!(qt.counts(), (c, f, e, v));
}

#[test]
fn two_balls_dual() {
    let qt = qt_of(&[Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [4.0, 0.0, 0.0], 1.0)]);
    assert_eq!(qt.counts(), (2, 1, 0, 0));
    assert!((qt.edges[0].beta.lower - 1.0).abs() < 1e-12);
    assert_eq!(qt.worlds.len(), 1);
}

#[test]
fn overlapping_pair_is_always_present() {
    let qt = qt_of(&[Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [1.0, 0.0, 0.0], 1.0)]);
    assert!((qt.edges[0].beta.lower + 0.5).abs() < 1e-12);
    assert!(qt.edges[0].beta.contains(0.0));
}

#[test]
fn three_balls_dual() {
    let b = [Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [4.0, 0.0, 0.0], 1.2), Ball::new(2, [1.0, 3.0, 0.0], 0.8)];
    let qt = qt_of(&b);
    assert_eq!(qt.counts(), (3, 3, 1, 0));
    let brute = dual_transform(crate::awvd::construct_awvd_bruteforce(&b, &Tolerances::default()).unwrap()).unwrap();
    assert_eq!(brute.counts(), qt.counts());
}

#[test]
fn tetrahedron_thresholds() {
    let b = crate::awvd::jitter_balls(&fixtures::tetrahedron(), 11, 1e-9);
    let qt = qt_of(&b);
    assert_eq!(qt.counts(), (4, 6, 4, 1));
    let cell = 1.5f64.sqrt() - 1.0;
    let face = 2.0 / 3f64.sqrt() - 1.0;
    assert!((qt.cells[0].beta.l1 - cell).abs() < 1e-6, "{}", qt.cells[0].beta.l1);
    assert!((cell - 0.224745).abs() < 1e-6);
    assert!((face - 0.154701).abs() < 1e-6);
    for f in &qt.faces {
        assert!((f.beta.l1 - face).abs() < 1e-6);
        assert_eq!(f.beta.state(0.2), Some(SimplexState::Singular));
        assert_eq!(f.beta.state(0.3), Some(SimplexState::Regular));
    }
    for e in &qt.edges {
        assert!(e.beta.l1.abs() < 1e-6);
    }
    for c in &qt.cells {
        for v in c.vertices {
            assert!(c.tangent.residual(&qt.vd.balls[qt.vertices[v].ball_id]) < 1e-7);
        }
    }
}

#[test]
fn closure_holds_across_beta_sweep() {
    for seed in 0..6 {
        let b = fixtures::random_balls(300 + seed, 12, 8.0, 0.5, 1.5);
        let qt = qt_of(&b);
        duality_holds(&qt);
        for step in 0..50 {
            let beta = -0.5 + step as f64 * 0.1;
            for c in &qt.cells {
                if c.beta.contains(beta) {
                    assert!(c.faces.iter().all(|&f| qt.faces[f].beta.contains(beta)));
                }
            }
            for f in &qt.faces {
                if f.beta.contains(beta) {
                    assert!(f.edges.iter().all(|&e| qt.edges[e].beta.contains(beta)));
                }
            }
            for x in qt.vertices.iter().map(|v| v.beta).chain(qt.edges.iter().map(|e| e.beta)).chain(qt.faces.iter().map(|f| f.beta)) {
                let next = beta + 0.1;
                if let Some(s) = x.state(beta) {
                    assert!(x.state(next).unwrap() >= s);
                }
            }
        }
    }
}

#[test]
fn equal_radii_give_delaunay_tetrahedra() {
    let b = fixtures::random_balls(77, 10, 10.0, 1.0, 1.0);
    let qt = qt_of(&b);
    let mut got: Vec<[usize; 4]> = qt.cells.iter().map(|c| c.vertices.map(|v| qt.vertices[v].ball_id)).collect();
    got.iter_mut().for_each(|q| q.sort_unstable());
    got.sort();
    let p: Vec<Vec3> = b.iter().map(|x| x.center).collect();
    let mut want = Vec::new();
    for i in 0..10 {
        for j in i + 1..10 {
            for k in j + 1..10 {
                for l in k + 1..10 {
                    let m = nalgebra::Matrix4::from_rows(&[
                        nalgebra::RowVector4::new(p[i].x, p[i].y, p[i].z, 1.0),
                        nalgebra::RowVector4::new(p[j].x, p[j].y, p[j].z, 1.0),
                        nalgebra::RowVector4::new(p[k].x, p[k].y, p[k].z, 1.0),
                        nalgebra::RowVector4::new(p[l].x, p[l].y, p[l].z, 1.0),
                    ]);
                    let rhs = nalgebra::Vector4::new(-p[i].norm_squared(), -p[j].norm_squared(), -p[k].norm_squared(), -p[l].norm_squared());
                    let Some(x) = m.lu().solve(&rhs) else { continue };
                    let c = Vec3::new(-x[0] / 2.0, -x[1] / 2.0, -x[2] / 2.0);
                    let r = (p[i] - c).norm();
                    if (0..10).all(|n| [i, j, k, l].contains(&n) || (p[n] - c).norm() > r) {
                        want.push([i, j, k, l]);
                    }
                }
            }
        }
    }
    assert_eq!(got, want);
}

#[test]
fn small_world_is_linked_from_its_face() {
    // two large balls with a ring of small balls in their gap
    let mut b = vec![Ball::new(0, [-3.3, 0.0, 0.0], 3.0), Ball::new(1, [3.3, 0.0, 0.0], 3.0)];
    for k in 0..5 {
        let a = k as f64 * 2.0 * std::f64::consts::PI / 5.0 + 0.1;
        b.push(Ball::new(2 + k, [0.01 * k as f64, 1.3 * a.cos(), 1.3 * a.sin()], 0.25));
    }
    let qt = qt_of(&b);
    duality_holds(&qt);
    let e = qt.edge_between(0, 1).expect("large balls share a face");
    let small: Vec<_> = qt.worlds.iter().filter(|w| !w.is_root).collect();
    assert!(!small.is_empty(), "{:?}", qt.worlds);
    assert!(qt.edges[e].world_links.len() >= 2);
    assert!(small.iter().any(|w| w.entrances.contains(&e)));
}

#[test]
fn cache_round_trip() {
    for b in [fixtures::tetrahedron(), fixtures::random_balls(5, 20, 9.0, 0.6, 1.6), fixtures::cube_corners([0.0; 3])] {
        let qt = qt_of(&b);
        let text = cache::render_str(&qt);
        let back = cache::parse_str(&text).unwrap();
        assert_eq!(back.source_vd_hash, qt.source_vd_hash);
        assert_eq!(back.counts(), qt.counts());
        for (a, c) in qt.cells.iter().zip(&back.cells) {
            assert_eq!(a.vertices, c.vertices);
            assert_eq!(a.beta, c.beta);
            assert_eq!(a.tangent.center, c.tangent.center);
        }
        for (a, c) in qt.vd.edges.iter().zip(&back.vd.edges) {
            assert_eq!(a.arc, c.arc);
            assert_eq!(a.ends, c.ends);
        }
        for (a, c) in qt.faces.iter().zip(&back.faces) {
            assert_eq!(a.beta, c.beta);
        }
        assert_eq!(cache::render_str(&back), text);
    }
}

#[test]
fn cache_rejects_bad_files() {
    let qt = qt_of(&fixtures::random_balls(9, 12, 8.0, 0.6, 1.4));
    let text = cache::render_str(&qt);
    let err = cache::parse_str(&text.replacen("MGQT 1", "MGQT 2", 1)).unwrap_err().to_string();
    assert!(err.contains("missing magic"), "{err}");
    let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
    let err = cache::parse_str(&cut).unwrap_err().to_string();
    assert!(err.contains("record"), "{err}");
    let tampered = text.replacen("CELLS", "CELLS ", 1);
    let err = cache::parse_str(&tampered).unwrap_err().to_string();
    assert!(err.contains("checksum"), "{err}");
}

#[test]
fn cache_file_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let qt = qt_of(&fixtures::tetrahedron());
    let path = cache_path(std::path::Path::new("/data/1abc.pdb"), dir.path());
    assert!(path.ends_with("1abc.mgqt"));
    save_qt(&qt, &path).unwrap();
    let back = load_qt(&path).unwrap();
    assert_eq!(back.counts(), qt.counts());
}
