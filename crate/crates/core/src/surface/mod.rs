//! Boundary of a union of balls: exposed spherical patches, closed shells,
//! volume and area by the divergence theorem, and voids.
//!
//! Each sphere's exposed region is the complement of the caps cut by its
//! overlapping neighbours. Patch areas come from Gauss-Bonnet with
//! small-circle boundaries and vector areas from (1/2) of the boundary
//! integral of x cross dx, both in closed form per arc. Patches sharing an
//! arc are stitched into shells; a shell enclosing negative volume bounds a
//! void.

mod arrangement;

use crate::awvd::jitter_balls;
use crate::error::GeomError;
use crate::model::{effective_balls, hash_balls, Ball, Molecule, RadiusModel, Vec3};
use crate::predicates::Tolerances;
use crate::spatial::SpatialGrid;
use rayon::prelude::*;
use std::f64::consts::PI;

/// A circle on a sphere, parameterized by `center + radius (u cos phi + w sin phi)`
/// with `w = axis x u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec3,
    pub axis: Vec3,
    pub u: Vec3,
    pub radius: f64,
}

impl Circle {
    pub fn point(&self, phi: f64) -> Vec3 {
        let w = self.axis.cross(&self.u);
        self.center + (self.u * phi.cos() + w * phi.sin()) * self.radius
    }

    pub fn phi_of(&self, x: &Vec3) -> f64 {
        let d = x - self.center;
        d.dot(&self.axis.cross(&self.u)).atan2(d.dot(&self.u))
    }
}

/// One boundary arc of a patch. The arc runs counterclockwise about
/// `circle.axis` from `phi[0]` to `phi[1]`, keeping the patch on its left.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryArc {
    pub neighbor: usize,
    pub circle: Circle,
    pub phi: [f64; 2],
    /// `None` for a whole circle.
    pub endpoints: Option<[Vec3; 2]>,
}

impl BoundaryArc {
    pub fn midpoint(&self) -> Vec3 {
        self.circle.point(0.5 * (self.phi[0] + self.phi[1]))
    }

    pub fn contains_phi(&self, phi: f64) -> bool {
        let span = self.phi[1] - self.phi[0];
        span >= 2.0 * PI || (phi - self.phi[0]).rem_euclid(2.0 * PI) <= span
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPatch {
    pub ball_id: usize,
    pub arcs: Vec<BoundaryArc>,
    pub area: f64,
    pub vector_area: Vec3,
    pub shell_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShellKind {
    Outer,
    VoidShell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub id: usize,
    pub patches: Vec<usize>,
    pub kind: ShellKind,
    pub enclosed_volume: f64,
    pub area: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryPatchSet {
    /// Geometry the patches were computed on (jittered if `perturbed`).
    pub balls: Vec<Ball>,
    pub redundant: Vec<bool>,
    pub patches: Vec<BoundaryPatch>,
    pub shells: Vec<Shell>,
    pub perturbed: bool,
    /// Signed shell volumes: positive for outer shells.
    signed_volume: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassProperty {
    /// Volume of the union, void interiors excluded.
    pub volume: f64,
    /// Volume enclosed by the outer shells, voids included.
    pub volume_with_voids: f64,
    pub area: f64,
    /// Exposed area per atom id; zero for redundant atoms.
    pub per_atom_area: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MolecularVoid {
    pub shell: usize,
    pub volume: f64,
    pub area: f64,
    pub contributing_atoms: Vec<usize>,
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

fn all_patches(balls: &[Ball], redundant: &[bool], strict: bool) -> Result<Vec<(usize, arrangement::LocalPatch)>, GeomError> {
    let active: Vec<Ball> = balls.iter().zip(redundant).filter(|(_, r)| !**r).map(|(b, _)| *b).collect();
    if active.is_empty() {
        return Ok(vec![]);
    }
    let r_max = active.iter().map(|b| b.radius).fold(0.0, f64::max);
    let grid = SpatialGrid::new(&active, 2.0 * r_max);
    let per_ball: Result<Vec<Vec<(usize, arrangement::LocalPatch)>>, GeomError> = active
        .par_iter()
        .map(|b| {
            let mut hit = Vec::new();
            grid.query(&b.center, b.radius + r_max, &mut hit);
            let nbrs: Vec<usize> = hit.iter().map(|&k| active[k].id).filter(|&j| j != b.id).collect();
            let ps = arrangement::sphere_patches(b.id, balls, &nbrs, strict)?;
            Ok(ps.into_iter().map(|p| (b.id, p)).collect())
        })
        .collect();
    Ok(per_ball?.into_iter().flatten().collect())
}

/// Exposed patches of every non-redundant ball, stitched into shells.
///
/// `balls` are indexed by id. Near-tangencies are resolved by one retry on
/// deterministically jittered centers.
pub fn build_boundary_patches(balls: &[Ball], redundant: &[bool], tol: &Tolerances) -> Result<BoundaryPatchSet, GeomError> {
    if let Some(b) = balls.iter().find(|b| !b.is_valid()) {
        return Err(GeomError::Precondition(format!("ball {} has invalid geometry", b.id)));
    }
    let balls: Vec<Ball> = balls.iter().enumerate().map(|(i, b)| Ball { id: i, ..*b }).collect();
    let (geometry, local, perturbed) = match all_patches(&balls, redundant, true) {
        Ok(p) => (balls, p, false),
        Err(_) => {
            let jittered = jitter_balls(&balls, hash_balls(&balls), tol.jitter_magnitude);
            let p = all_patches(&jittered, redundant, false)?;
            (jittered, p, true)
        }
    };

    let mut patches: Vec<BoundaryPatch> = local
        .into_iter()
        .map(|(b, p)| BoundaryPatch { ball_id: b, arcs: p.arcs, area: p.area, vector_area: p.vector_area, shell_id: 0 })
        .collect();

    // stitch: each arc is shared with the patch across the same circle
    let mut of_ball: Vec<Vec<usize>> = vec![Vec::new(); geometry.len()];
    for (p, patch) in patches.iter().enumerate() {
        of_ball[patch.ball_id].push(p);
    }
    let mut parent: Vec<usize> = (0..patches.len()).collect();
    for p in 0..patches.len() {
        for arc in &patches[p].arcs {
            if arc.neighbor < patches[p].ball_id {
                continue;
            }
            let x = arc.midpoint();
            let mut best: Option<(f64, usize)> = None;
            for &q in &of_ball[arc.neighbor] {
                for other in patches[q].arcs.iter().filter(|o| o.neighbor == patches[p].ball_id) {
                    let phi = other.circle.phi_of(&x);
                    let miss = if other.contains_phi(phi) { 0.0 } else { (other.midpoint() - x).norm() };
                    if best.is_none_or(|(m, _)| miss < m) {
                        best = Some((miss, q));
                    }
                }
            }
            let Some((_, q)) = best else {
                return Err(GeomError::DegenerateTangency { ball: patches[p].ball_id, reason: "unmatched boundary arc".into() });
            };
            let (a, b) = (find(&mut parent, p), find(&mut parent, q));
            parent[a] = b;
        }
    }

    let origin = centroid(&geometry, redundant);
    let mut shell_of_root = std::collections::HashMap::new();
    let mut shells: Vec<Shell> = Vec::new();
    let mut signed_volume = Vec::new();
    for p in 0..patches.len() {
        let root = find(&mut parent, p);
        let s = *shell_of_root.entry(root).or_insert_with(|| {
            shells.push(Shell { id: shells.len(), patches: vec![], kind: ShellKind::Outer, enclosed_volume: 0.0, area: 0.0 });
            signed_volume.push(0.0);
            shells.len() - 1
        });
        let patch = &mut patches[p];
        patch.shell_id = s;
        let b = &geometry[patch.ball_id];
        signed_volume[s] += ((b.center - origin).dot(&patch.vector_area) + b.radius * patch.area) / 3.0;
        shells[s].area += patch.area;
        shells[s].patches.push(p);
    }
    for (s, shell) in shells.iter_mut().enumerate() {
        shell.enclosed_volume = signed_volume[s].abs();
        shell.kind = if signed_volume[s] >= 0.0 { ShellKind::Outer } else { ShellKind::VoidShell };
    }
    Ok(BoundaryPatchSet { balls: geometry, redundant: redundant.to_vec(), patches, shells, perturbed, signed_volume })
}

fn centroid(balls: &[Ball], redundant: &[bool]) -> Vec3 {
    let mut sum = Vec3::zeros();
    let mut n = 0.0;
    for (b, r) in balls.iter().zip(redundant) {
        if !r {
            sum += b.center;
            n += 1.0;
        }
    }
    if n > 0.0 { sum / n } else { sum }
}

impl BoundaryPatchSet {
    pub fn mass_properties(&self) -> MassProperty {
        let mut per_atom_area = vec![0.0; self.balls.len()];
        for p in &self.patches {
            per_atom_area[p.ball_id] += p.area;
        }
        let area = per_atom_area.iter().sum();
        let volume = self.signed_volume.iter().sum();
        let volume_with_voids = self.signed_volume.iter().filter(|v| **v >= 0.0).sum();
        MassProperty { volume, volume_with_voids, area, per_atom_area }
    }

    /// One void per void shell, biggest first.
    pub fn voids(&self) -> Vec<MolecularVoid> {
        let mut out: Vec<MolecularVoid> = self
            .shells
            .iter()
            .filter(|s| s.kind == ShellKind::VoidShell)
            .map(|s| {
                let mut atoms: Vec<usize> = s.patches.iter().map(|&p| self.patches[p].ball_id).collect();
                atoms.sort_unstable();
                atoms.dedup();
                MolecularVoid { shell: s.id, volume: s.enclosed_volume, area: s.area, contributing_atoms: atoms }
            })
            .collect();
        out.sort_by(|a, b| b.volume.total_cmp(&a.volume).then(a.shell.cmp(&b.shell)));
        out
    }

    pub fn outer_shells(&self) -> impl Iterator<Item = &Shell> {
        self.shells.iter().filter(|s| s.kind == ShellKind::Outer)
    }

    /// Atoms owning a patch on an outer shell.
    pub fn outer_atoms(&self) -> Vec<usize> {
        let mut atoms: Vec<usize> =
            self.outer_shells().flat_map(|s| s.patches.iter().map(|&p| self.patches[p].ball_id)).collect();
        atoms.sort_unstable();
        atoms.dedup();
        atoms
    }

    /// Whether a point lies inside some non-redundant ball.
    pub fn in_union(&self, x: &Vec3) -> bool {
        self.balls.iter().zip(&self.redundant).any(|(b, r)| !r && (x - b.center).norm() < b.radius)
    }
}

/// Patches of a molecule under a radius model.
pub fn patches_for(molecule: &Molecule, model: RadiusModel, tol: &Tolerances) -> Result<BoundaryPatchSet, GeomError> {
    let eb = effective_balls(molecule, model);
    build_boundary_patches(&eb.balls, &eb.redundant, tol)
}

pub fn compute_mass_properties(molecule: &Molecule, model: RadiusModel) -> Result<MassProperty, GeomError> {
    Ok(patches_for(molecule, model, &Tolerances::default())?.mass_properties())
}

pub fn compute_voids(molecule: &Molecule, model: RadiusModel) -> Result<Vec<MolecularVoid>, GeomError> {
    Ok(patches_for(molecule, model, &Tolerances::default())?.voids())
}
