//! Synthetic arrangements used by tests, examples and the benchmark.

use crate::model::{Atom, Ball, Molecule, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Four unit balls on a regular tetrahedron with edge 2, centered at the origin.
pub fn tetrahedron() -> Vec<Ball> {
    let s = 2.0 / 8f64.sqrt();
    vec![
        Ball::new(0, [s, s, s], 1.0),
        Ball::new(1, [s, -s, -s], 1.0),
        Ball::new(2, [-s, s, -s], 1.0),
        Ball::new(3, [-s, -s, s], 1.0),
    ]
}

/// Eight unit balls at (+-1, +-1, +-1), optionally shifted.
pub fn cube_corners(offset: [f64; 3]) -> Vec<Ball> {
    (0..8)
        .map(|i| {
            let p = [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64];
            Ball::new(i, [2.0 * p[0] - 1.0 + offset[0], 2.0 * p[1] - 1.0 + offset[1], 2.0 * p[2] - 1.0 + offset[2]], 1.0)
        })
        .collect()
}

/// Balls with uniform centers in a cube of side `size` and uniform radii.
pub fn random_balls(seed: u64, n: usize, size: f64, r_min: f64, r_max: f64) -> Vec<Ball> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let c = [rng.random::<f64>() * size, rng.random::<f64>() * size, rng.random::<f64>() * size];
            Ball::new(i, c, r_min + (r_max - r_min) * rng.random::<f64>())
        })
        .collect()
}

/// A closed cage of unit balls on the faces of a cube with `k` balls per edge
/// and spacing `gap`; encloses one cavity whose size grows with `k`.
/// Centers carry a fixed pseudo-random offset of up to 0.02 A so that no
/// three centers are collinear.
pub fn cube_cage(k: usize, gap: f64, offset: [f64; 3]) -> Vec<Ball> {
    let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
    let mut out = Vec::new();
    for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                let on_face = [x, y, z].iter().any(|&c| c == 0 || c == k - 1);
                if on_face {
                    let mut c = [x as f64 * gap + offset[0], y as f64 * gap + offset[1], z as f64 * gap + offset[2]];
                    for v in &mut c {
                        *v += 0.02 * (rng.random::<f64>() - 0.5);
                    }
                    out.push(Ball::new(out.len(), c, 1.0));
                }
            }
        }
    }
    out
}

/// A compact branched chain of atoms (bond 1.5 A, non-bonded floor 2.4 A)
/// grown inside a sphere; a stand-in for a folded protein.
pub fn pseudo_protein(seed: u64, n: usize) -> Molecule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = (22.0 * n as f64 * 3.0 / (4.0 * std::f64::consts::PI)).cbrt() + 1.5;
    let elements = [("C", 1.70), ("N", 1.55), ("O", 1.52), ("C", 1.70), ("S", 1.80)];
    let mut pts: Vec<Vec3> = vec![Vec3::zeros()];
    let mut anchor = 0;
    let mut fails = 0;
    while pts.len() < n && fails < 100_000 {
        let d = loop {
            let v = Vec3::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
            if v.norm() > 0.2 && v.norm() <= 1.0 {
                break v.normalize();
            }
        };
        let p = pts[anchor] + d * 1.5;
        let clash = p.norm() > radius || pts.iter().enumerate().any(|(i, q)| i != anchor && (q - p).norm() < 2.4);
        if clash {
            fails += 1;
            if fails % 30 == 0 {
                anchor = rng.random_range(0..pts.len());
            }
            continue;
        }
        pts.push(p);
        anchor = pts.len() - 1;
    }
    let atoms = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (el, r) = elements[rng.random_range(0..elements.len())];
            Atom {
                ball: Ball { center: *p, radius: r, id: i },
                serial: i as i64 + 1,
                name: el.to_string(),
                element: el.to_string(),
                residue_name: "GLY".into(),
                chain: 'A',
                residue_seq: (i / 4) as i64 + 1,
                is_hetero: false,
            }
        })
        .collect();
    Molecule::new(format!("pseudo{seed}"), atoms)
}

/// Arrangements whose Lee-Richards voids at probe 0.5 are smaller than one
/// cubic angstrom.
pub fn sub_cell_void_suite() -> Vec<(String, Molecule)> {
    let scaled = |s: f64| -> Vec<Ball> {
        cube_corners([0.0; 3]).into_iter().map(|b| Ball { center: b.center * s, ..b }).collect()
    };
    let mut pair = cube_corners([0.0; 3]);
    pair.extend(cube_corners([6.0, 0.3, 0.1]).into_iter().map(|b| Ball { id: b.id + 8, ..b }));
    vec![
        ("cube".into(), Molecule::from_balls("cube", &cube_corners([0.0; 3]))),
        ("cube-shifted".into(), Molecule::from_balls("cube-shifted", &cube_corners([0.31, 0.17, 0.23]))),
        ("cube-wide".into(), Molecule::from_balls("cube-wide", &scaled(1.05))),
        ("cube-pair".into(), Molecule::from_balls("cube-pair", &pair)),
    ]
}
