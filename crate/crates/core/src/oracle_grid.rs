//! Grid counting and Monte-Carlo references for voids and volume.
//!
//! The grid oracle classifies lattice points against the model's balls,
//! flood-fills the exterior from the padded boundary and reports each
//! remaining empty component as a void of `count * resolution^3`.

use crate::error::GeomError;
use crate::model::{effective_balls, Ball, Molecule, RadiusModel, Vec3};
use crate::spatial::SpatialGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Default cap on lattice points (one byte each).
pub const DEFAULT_POINT_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub resolution: f64,
    /// Margin around the van der Waals bounding box.
    pub padding: f64,
}

impl GridSpec {
    pub fn new(resolution: f64, padding: f64) -> Self {
        GridSpec { resolution, padding }
    }

    /// Smallest padding allowed for `probe`.
    pub fn for_probe(resolution: f64, probe: f64) -> Self {
        GridSpec { resolution, padding: probe + resolution }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Six,
    TwentySix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridVoids {
    pub count: usize,
    pub total_volume: f64,
    /// Largest first.
    pub volumes: Vec<f64>,
    pub points: u64,
}

const EMPTY: u8 = 0;
const FULL: u8 = 1;
const SEEN: u8 = 2;

pub fn grid_voids(molecule: &Molecule, model: RadiusModel, grid: GridSpec) -> Result<GridVoids, GeomError> {
    grid_voids_with(molecule, model, grid, Connectivity::Six, DEFAULT_POINT_BUDGET)
}

pub fn grid_voids_with(
    molecule: &Molecule,
    model: RadiusModel,
    grid: GridSpec,
    connectivity: Connectivity,
    budget: u64,
) -> Result<GridVoids, GeomError> {
    if !(grid.resolution > 0.0) {
        return Err(GeomError::Precondition("grid resolution must be positive".into()));
    }
    if grid.padding < model.probe() + grid.resolution {
        return Err(GeomError::Precondition(format!(
            "padding {} is below probe radius plus resolution ({})",
            grid.padding,
            model.probe() + grid.resolution
        )));
    }
    let vdw = molecule.balls();
    if vdw.is_empty() {
        return Ok(GridVoids { count: 0, total_volume: 0.0, volumes: vec![], points: 0 });
    }
    let lo = vdw.iter().fold(Vec3::repeat(f64::INFINITY), |m, b| m.inf(&b.center.add_scalar(-b.radius)));
    let hi = vdw.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |m, b| m.sup(&b.center.add_scalar(b.radius)));
    let origin = lo.add_scalar(-grid.padding);
    let h = grid.resolution;
    let dims: [usize; 3] = std::array::from_fn(|k| ((hi[k] + grid.padding - origin[k]) / h).ceil() as usize + 1);
    let points = dims.iter().map(|&d| d as u64).product::<u64>();
    if points > budget {
        return Err(GeomError::GridTooLarge { points, budget });
    }
    let balls = effective_balls(molecule, model).balls;
    let mut state = classify(&balls, origin, h, dims);

    let (nx, ny, nz) = (dims[0], dims[1], dims[2]);
    let idx = |x: usize, y: usize, z: usize| (z * ny + y) * nx + x;
    let offsets: Vec<[i64; 3]> = match connectivity {
        Connectivity::Six => vec![[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
        Connectivity::TwentySix => {
            let mut v = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if (dx, dy, dz) != (0, 0, 0) {
                            v.push([dx, dy, dz]);
                        }
                    }
                }
            }
            v
        }
    };
    let mut stack = Vec::new();
    let fill = |start: usize, state: &mut [u8], stack: &mut Vec<usize>| -> usize {
        let mut n = 0;
        state[start] = SEEN;
        stack.push(start);
        while let Some(i) = stack.pop() {
            n += 1;
            let (x, y, z) = (i % nx, (i / nx) % ny, i / (nx * ny));
            for o in &offsets {
                let (a, b, c) = (x as i64 + o[0], y as i64 + o[1], z as i64 + o[2]);
                if a < 0 || b < 0 || c < 0 || a >= nx as i64 || b >= ny as i64 || c >= nz as i64 {
                    continue;
                }
                let j = idx(a as usize, b as usize, c as usize);
                if state[j] == EMPTY {
                    state[j] = SEEN;
                    stack.push(j);
                }
            }
        }
        n
    };
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let border = x == 0 || y == 0 || z == 0 || x == nx - 1 || y == ny - 1 || z == nz - 1;
                let i = idx(x, y, z);
                if border && state[i] == EMPTY {
                    fill(i, &mut state, &mut stack);
                }
            }
        }
    }
    let cell = h * h * h;
    let mut volumes = Vec::new();
    for i in 0..state.len() {
        if state[i] == EMPTY {
            volumes.push(fill(i, &mut state, &mut stack) as f64 * cell);
        }
    }
    volumes.sort_by(|a, b| b.total_cmp(a));
    Ok(GridVoids { count: volumes.len(), total_volume: volumes.iter().sum(), volumes, points })
}

/// Occupancy by z-slab: each plane marks the discs of the balls crossing it.
fn classify(balls: &[Ball], origin: Vec3, h: f64, dims: [usize; 3]) -> Vec<u8> {
    let (nx, ny, nz) = (dims[0], dims[1], dims[2]);
    let mut by_plane: Vec<Vec<usize>> = vec![Vec::new(); nz];
    for (i, b) in balls.iter().enumerate() {
        let z0 = ((b.center.z - b.radius - origin.z) / h).floor().max(0.0) as usize;
        let z1 = (((b.center.z + b.radius - origin.z) / h).ceil() as usize).min(nz - 1);
        for list in &mut by_plane[z0..=z1] {
            list.push(i);
        }
    }
    let mut state = vec![EMPTY; nx * ny * nz];
    state.par_chunks_mut(nx * ny).enumerate().for_each(|(z, plane)| {
        let pz = origin.z + z as f64 * h;
        for &i in &by_plane[z] {
            let b = &balls[i];
            let dz = pz - b.center.z;
            let r2 = b.radius * b.radius - dz * dz;
            if r2 <= 0.0 {
                continue;
            }
            let rr = r2.sqrt();
            let y0 = ((b.center.y - rr - origin.y) / h).ceil().max(0.0) as usize;
            let y1 = (((b.center.y + rr - origin.y) / h).floor().max(-1.0) + 1.0) as usize;
            for y in y0..y1.min(ny) {
                let dy = origin.y + y as f64 * h - b.center.y;
                let s2 = r2 - dy * dy;
                if s2 <= 0.0 {
                    continue;
                }
                let s = s2.sqrt();
                let x0 = ((b.center.x - s - origin.x) / h).ceil().max(0.0) as usize;
                let x1 = (((b.center.x + s - origin.x) / h).floor().max(-1.0) + 1.0) as usize;
                for x in x0..x1.min(nx) {
                    let dx = origin.x + x as f64 * h - b.center.x;
                    if dx * dx + dy * dy + dz * dz < b.radius * b.radius {
                        plane[y * nx + x] = FULL;
                    }
                }
            }
        }
    });
    state
}

/// Uniform rejection sampling of the union volume in the bounding box of the
/// model's balls. Returns (estimate, standard error); deterministic per seed.
pub fn mc_volume(molecule: &Molecule, model: RadiusModel, samples: u64, seed: u64) -> (f64, f64) {
    assert!(samples >= 1, "at least one sample");
    let balls = effective_balls(molecule, model).balls;
    mc_volume_of(&balls, samples, seed)
}

pub fn mc_volume_of(balls: &[Ball], samples: u64, seed: u64) -> (f64, f64) {
    if balls.is_empty() {
        return (0.0, 0.0);
    }
    let lo = balls.iter().fold(Vec3::repeat(f64::INFINITY), |m, b| m.inf(&b.center.add_scalar(-b.radius)));
    let hi = balls.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |m, b| m.sup(&b.center.add_scalar(b.radius)));
    let ext = hi - lo;
    let box_volume = ext.x * ext.y * ext.z;
    let r_max = balls.iter().map(|b| b.radius).fold(0.0, f64::max);
    let grid = SpatialGrid::new(balls, 2.0 * r_max);
    const CHUNK: u64 = 1 << 16;
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut buf = Vec::new();
            let mut hit = 0;
            for _ in 0..n {
                let p = lo + Vec3::new(rng.random::<f64>() * ext.x, rng.random::<f64>() * ext.y, rng.random::<f64>() * ext.z);
                grid.query(&p, r_max, &mut buf);
                if buf.iter().any(|&k| (p - balls[k].center).norm_squared() < balls[k].radius * balls[k].radius) {
                    hit += 1;
                }
            }
            hit
        })
        .sum();
    let f = hits as f64 / samples as f64;
    (f * box_volume, box_volume * (f * (1.0 - f) / samples as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::PI;

    fn mol(b: &[Ball]) -> Molecule {
        Molecule::from_balls("t", b)
    }

    #[test]
    fn single_ball_has_no_void() {
        let m = mol(&[Ball::new(0, [0.0; 3], 1.5)]);
        let g = grid_voids(&m, RadiusModel::lee_richards(1.4), GridSpec::for_probe(0.1, 1.4)).unwrap();
        assert_eq!(g.count, 0);
    }

    #[test]
    fn cube_corner_voids() {
        let m = mol(&fixtures::cube_corners([0.0; 3]));
        let g = grid_voids(&m, RadiusModel::lee_richards(0.5), GridSpec::for_probe(0.05, 0.5)).unwrap();
        assert_eq!(g.count, 1);
        let g = grid_voids(&m, RadiusModel::lee_richards(0.3), GridSpec::for_probe(0.05, 0.3)).unwrap();
        assert_eq!(g.count, 0);
    }

    #[test]
    fn connectivity_can_only_merge() {
        let m = mol(&fixtures::cube_corners([0.0; 3]));
        let six = grid_voids_with(&m, RadiusModel::lee_richards(0.45), GridSpec::for_probe(0.1, 0.45), Connectivity::Six, DEFAULT_POINT_BUDGET).unwrap();
        let all = grid_voids_with(&m, RadiusModel::lee_richards(0.45), GridSpec::for_probe(0.1, 0.45), Connectivity::TwentySix, DEFAULT_POINT_BUDGET).unwrap();
        assert!(all.count <= six.count);
    }

    #[test]
    fn budget_and_padding_are_enforced() {
        let m = mol(&[Ball::new(0, [0.0; 3], 1.0)]);
        let e = grid_voids_with(&m, RadiusModel::van_der_waals(), GridSpec::new(0.01, 1.0), Connectivity::Six, 1000).unwrap_err();
        assert!(matches!(e, GeomError::GridTooLarge { .. }));
        assert!(grid_voids(&m, RadiusModel::lee_richards(1.4), GridSpec::new(0.1, 1.0)).is_err());
    }

    #[test]
    fn mc_single_ball_and_determinism() {
        let m = mol(&[Ball::new(0, [0.0; 3], 1.0)]);
        let (v, se) = mc_volume(&m, RadiusModel::van_der_waals(), 1_000_000, 7);
        assert!((v - 4.0 * PI / 3.0).abs() < 3.0 * se);
        assert_eq!(mc_volume(&m, RadiusModel::van_der_waals(), 1000, 7), mc_volume(&m, RadiusModel::van_der_waals(), 1000, 7));
    }
}
