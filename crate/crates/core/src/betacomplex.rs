//! Probe-radius queries over an annotated quasi-triangulation: beta-complex
//! extraction, boundary and buried atoms, adjacency and neighbour sets.

use crate::error::GeomError;
use crate::model::{effective_balls, Molecule, RadiusModel};
use crate::predicates::Tolerances;
use crate::quasitri::{BetaInterval, QuasiTriangulation, SimplexState};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Member {
    pub id: usize,
    pub state: SimplexState,
}

/// Simplices of the quasi-triangulation present at one probe radius.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaComplex {
    pub beta: f64,
    pub vertices: Vec<Member>,
    pub edges: Vec<Member>,
    pub faces: Vec<Member>,
    pub cells: Vec<Member>,
}

/// Ids of the beta-shape boundary simplices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BetaBoundary {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub faces: Vec<usize>,
}

fn members<'a>(intervals: impl Iterator<Item = &'a BetaInterval>, beta: f64) -> Vec<Member> {
    intervals.enumerate().filter_map(|(id, iv)| iv.state(beta).map(|state| Member { id, state })).collect()
}

pub fn extract_beta_complex(qt: &QuasiTriangulation, beta: f64) -> Result<BetaComplex, GeomError> {
    if !qt.annotated {
        return Err(GeomError::Precondition("quasi-triangulation has no beta intervals".into()));
    }
    Ok(BetaComplex {
        beta,
        vertices: members(qt.vertices.iter().map(|v| &v.beta), beta),
        edges: members(qt.edges.iter().map(|e| &e.beta), beta),
        faces: members(qt.faces.iter().map(|f| &f.beta), beta),
        cells: members(qt.cells.iter().map(|c| &c.beta), beta),
    })
}

impl BetaComplex {
    /// Members on the boundary: everything singular or regular.
    pub fn boundary(&self) -> BetaBoundary {
        let on = |m: &[Member]| m.iter().filter(|m| m.state != SimplexState::Interior).map(|m| m.id).collect();
        BetaBoundary { vertices: on(&self.vertices), edges: on(&self.edges), faces: on(&self.faces) }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Atoms with exposed area on an outer shell of the model's union.
pub fn find_boundary_atoms(molecule: &Molecule, model: RadiusModel) -> Result<BTreeSet<usize>, GeomError> {
    let set = crate::surface::patches_for(molecule, model, &Tolerances::default())?;
    Ok(set.outer_atoms().into_iter().collect())
}

pub fn find_buried_atoms(molecule: &Molecule, model: RadiusModel) -> Result<BTreeSet<usize>, GeomError> {
    let boundary = find_boundary_atoms(molecule, model)?;
    Ok((0..molecule.number_of_atoms()).filter(|a| !boundary.contains(a)).collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Adjacency {
    /// Inflated balls overlap or touch.
    #[default]
    Overlap,
    /// The atoms share a Voronoi face.
    VoronoiFace,
}

/// Adjacency and neighbour queries for one molecule under one radius model.
///
/// The Voronoi-face mode uses a quasi-triangulation of the van der Waals
/// balls; a uniform probe inflation leaves the diagram unchanged.
pub struct Neighborhood<'a> {
    molecule: &'a Molecule,
    model: RadiusModel,
    mode: Adjacency,
    qt: Option<&'a QuasiTriangulation>,
    tol: Tolerances,
    lists: Vec<Vec<usize>>,
}

impl<'a> Neighborhood<'a> {
    pub fn overlap(molecule: &'a Molecule, model: RadiusModel) -> Self {
        let mut n = Neighborhood { molecule, model, mode: Adjacency::Overlap, qt: None, tol: Tolerances::default(), lists: vec![] };
        n.lists = n.build();
        n
    }

    pub fn voronoi(molecule: &'a Molecule, model: RadiusModel, qt: &'a QuasiTriangulation) -> Self {
        let mut n = Neighborhood { molecule, model, mode: Adjacency::VoronoiFace, qt: Some(qt), tol: Tolerances::default(), lists: vec![] };
        n.lists = n.build();
        n
    }

    pub fn mode(&self) -> Adjacency {
        self.mode
    }

    fn build(&self) -> Vec<Vec<usize>> {
        let n = self.molecule.number_of_atoms();
        let mut lists = vec![Vec::new(); n];
        match self.qt {
            Some(qt) => {
                for e in &qt.edges {
                    let [a, b] = e.vertices.map(|v| qt.vertices[v].ball_id);
                    if a < n && b < n && a != b {
                        lists[a].push(b);
                        lists[b].push(a);
                    }
                }
            }
            None => {
                let balls = effective_balls(self.molecule, self.model).balls;
                let r_max = balls.iter().map(|b| b.radius).fold(0.0, f64::max);
                if balls.is_empty() {
                    return lists;
                }
                let grid = crate::spatial::SpatialGrid::new(&balls, (2.0 * r_max).max(1e-6));
                let mut hit = Vec::new();
                for b in &balls {
                    grid.query(&b.center, b.radius + r_max + self.tol.eps_geom, &mut hit);
                    for &k in &hit {
                        let o = &balls[k];
                        if o.id != b.id && (o.center - b.center).norm() <= o.radius + b.radius + self.tol.eps_geom {
                            lists[b.id].push(o.id);
                        }
                    }
                }
            }
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        lists
    }

    fn check(&self, a: usize) -> Result<(), GeomError> {
        if a < self.lists.len() { Ok(()) } else { Err(GeomError::UnknownAtomId(a)) }
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> Result<bool, GeomError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.lists[a].binary_search(&b).is_ok())
    }

    /// Neighbours of order 1 or 2; order 2 excludes order 1 and the atom.
    pub fn find_neighbors(&self, a: usize, order: u8) -> Result<BTreeSet<usize>, GeomError> {
        self.find_neighbors_of_set(&[a], order)
    }

    /// Neighbours of a set of atoms, excluding the set itself.
    pub fn find_neighbors_of_set(&self, atoms: &[usize], order: u8) -> Result<BTreeSet<usize>, GeomError> {
        for &a in atoms {
            self.check(a)?;
        }
        if !(1..=2).contains(&order) {
            return Err(GeomError::Precondition(format!("neighbour order {order} not in 1..=2")));
        }
        let own: BTreeSet<usize> = atoms.iter().copied().collect();
        let first: BTreeSet<usize> =
            atoms.iter().flat_map(|&a| self.lists[a].iter().copied()).filter(|x| !own.contains(x)).collect();
        if order == 1 {
            return Ok(first);
        }
        Ok(first
            .iter()
            .flat_map(|&a| self.lists[a].iter().copied())
            .filter(|x| !own.contains(x) && !first.contains(x))
            .collect())
    }

    pub fn number_of_neighbors(&self, a: usize, order: u8) -> Result<usize, GeomError> {
        Ok(self.find_neighbors(a, order)?.len())
    }
}

/// Overlap adjacency of two atoms under a model.
pub fn are_adjacent(molecule: &Molecule, a: usize, b: usize, model: RadiusModel) -> Result<bool, GeomError> {
    Neighborhood::overlap(molecule, model).are_adjacent(a, b)
}

pub fn find_neighbors(molecule: &Molecule, a: usize, order: u8, model: RadiusModel) -> Result<BTreeSet<usize>, GeomError> {
    Neighborhood::overlap(molecule, model).find_neighbors(a, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Ball;
    use crate::quasitri::build_quasi_triangulation;

    fn qt(balls: &[Ball]) -> QuasiTriangulation {
        build_quasi_triangulation(balls, &Tolerances::default()).unwrap()
    }

    #[test]
    fn disjoint_balls_at_zero_are_vertices_only() {
        let b = [Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [5.0, 0.0, 0.0], 1.0), Ball::new(2, [0.0, 6.0, 0.0], 1.2)];
        let bc = extract_beta_complex(&qt(&b), 0.0).unwrap();
        assert_eq!(bc.vertices.len(), 3);
        assert!(bc.edges.is_empty() && bc.faces.is_empty() && bc.cells.is_empty());
        assert!(bc.vertices.iter().all(|m| m.state == SimplexState::Singular));
    }

    #[test]
    fn tetrahedron_membership() {
        let q = qt(&crate::awvd::jitter_balls(&fixtures::tetrahedron(), 3, 1e-9));
        let above = extract_beta_complex(&q, 0.3).unwrap();
        assert_eq!((above.vertices.len(), above.edges.len(), above.faces.len(), above.cells.len()), (4, 6, 4, 1));
        assert!(above.boundary().faces.len() == 4);
        let below = extract_beta_complex(&q, 0.2).unwrap();
        assert!(below.cells.is_empty());
        assert_eq!(below.faces.len(), 4);
        assert!(below.faces.iter().all(|m| m.state == SimplexState::Singular));
    }

    #[test]
    fn boundary_faces_have_one_member_cell() {
        let m = fixtures::pseudo_protein(3, 120);
        let q = qt(&m.balls());
        for beta in [0.5, 1.0, 1.4, 2.0] {
            let bc = extract_beta_complex(&q, beta).unwrap();
            let cells: BTreeSet<usize> = bc.cells.iter().map(|c| c.id).collect();
            for f in &bc.faces {
                let n = q.faces[f.id].cells.iter().flatten().filter(|c| cells.contains(c)).count();
                let on = f.state != SimplexState::Interior;
                assert_eq!(on, n < 2 || f.state == SimplexState::Singular, "face {} at {beta}", f.id);
                if f.state == SimplexState::Regular {
                    assert_eq!(n, 1);
                }
            }
        }
    }

    #[test]
    fn large_beta_keeps_root_world_cells() {
        let m = fixtures::pseudo_protein(4, 80);
        let q = qt(&m.balls());
        let bc = extract_beta_complex(&q, 1e6).unwrap();
        let cells: BTreeSet<usize> = bc.cells.iter().map(|c| c.id).collect();
        assert!(q.worlds[q.root_world].cells.iter().all(|c| cells.contains(c)));
    }

    #[test]
    fn unannotated_is_rejected() {
        let vd = crate::awvd::construct_awvd(&fixtures::tetrahedron(), &Tolerances::default()).unwrap();
        let q = crate::quasitri::dual_transform(vd).unwrap();
        assert!(extract_beta_complex(&q, 1.0).is_err());
    }

    #[test]
    fn boundary_and_buried_atoms() {
        let one = Molecule::from_balls("one", &[Ball::new(0, [0.0; 3], 1.0)]);
        assert_eq!(find_boundary_atoms(&one, RadiusModel::van_der_waals()).unwrap(), BTreeSet::from([0]));
        assert!(find_buried_atoms(&one, RadiusModel::van_der_waals()).unwrap().is_empty());
        let nested = Molecule::from_balls("nested", &[Ball::new(0, [0.0; 3], 2.0), Ball::new(1, [0.3, 0.0, 0.0], 1.0)]);
        assert_eq!(find_buried_atoms(&nested, RadiusModel::van_der_waals()).unwrap(), BTreeSet::from([1]));
        let cube = Molecule::from_balls("cube", &fixtures::cube_corners([0.0; 3]));
        assert_eq!(find_boundary_atoms(&cube, RadiusModel::lee_richards(0.5)).unwrap().len(), 8);
    }

    #[test]
    fn atoms_facing_only_a_void_are_buried() {
        let mut balls = fixtures::cube_cage(3, 2.2, [0.0; 3]);
        let n = balls.len();
        balls.iter_mut().for_each(|b| b.radius += 0.7);
        let m = Molecule::from_balls("cage", &balls);
        let vdw = RadiusModel::van_der_waals();
        let boundary = find_boundary_atoms(&m, vdw).unwrap();
        let buried = find_buried_atoms(&m, vdw).unwrap();
        assert_eq!(boundary.len() + buried.len(), n);
        assert!(boundary.is_disjoint(&buried));
        assert!(!crate::surface::compute_voids(&m, vdw).unwrap().is_empty());
    }

    #[test]
    fn adjacency_examples() {
        let near = Molecule::from_balls("p", &[Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [1.9, 0.0, 0.0], 1.0)]);
        assert!(are_adjacent(&near, 0, 1, RadiusModel::van_der_waals()).unwrap());
        let far = Molecule::from_balls("p", &[Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [2.5, 0.0, 0.0], 1.0)]);
        assert!(!are_adjacent(&far, 0, 1, RadiusModel::van_der_waals()).unwrap());
        assert!(are_adjacent(&far, 0, 1, RadiusModel::lee_richards(0.5)).unwrap());
        assert!(matches!(are_adjacent(&far, 0, 7, RadiusModel::van_der_waals()), Err(GeomError::UnknownAtomId(7))));
    }

    #[test]
    fn chain_second_order() {
        let chain = Molecule::from_balls(
            "chain",
            &[Ball::new(0, [0.0; 3], 1.0), Ball::new(1, [2.0, 0.0, 0.0], 1.0), Ball::new(2, [4.0, 0.0, 0.0], 1.0)],
        );
        let nb = Neighborhood::overlap(&chain, RadiusModel::van_der_waals());
        assert_eq!(nb.find_neighbors(0, 1).unwrap(), BTreeSet::from([1]));
        assert_eq!(nb.find_neighbors(0, 2).unwrap(), BTreeSet::from([2]));
        assert_eq!(nb.find_neighbors_of_set(&[0, 1], 1).unwrap(), BTreeSet::from([2]));
        assert!(nb.find_neighbors(0, 3).is_err());
    }

    #[test]
    fn voronoi_mode_misses_only_dominated_overlaps() {
        let m = fixtures::pseudo_protein(9, 150);
        let balls = m.balls();
        let q = qt(&balls);
        let vor = Neighborhood::voronoi(&m, RadiusModel::van_der_waals(), &q);
        let ov = Neighborhood::overlap(&m, RadiusModel::van_der_waals());
        for a in 0..m.number_of_atoms() {
            for b in vor.find_neighbors(a, 1).unwrap() {
                assert!(vor.are_adjacent(b, a).unwrap());
            }
            for b in ov.find_neighbors(a, 1).unwrap() {
                if vor.are_adjacent(a, b).unwrap() {
                    continue;
                }
                // some third ball is nearer than both at their bisector point
                let (ba, bb) = (&balls[a], &balls[b]);
                let d = (bb.center - ba.center).norm();
                let t = 0.5 * (d + ba.radius - bb.radius);
                let x = ba.center + (bb.center - ba.center) * (t / d);
                assert!(balls.iter().any(|k| k.power_distance(&x) < t - ba.radius), "{a} {b}");
            }
        }
    }
}
