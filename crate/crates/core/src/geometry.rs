//! One molecule with its diagram and quasi-triangulation built once, and
//! the probe-dependent queries on top.

use crate::betacomplex::{extract_beta_complex, BetaComplex, Neighborhood};
use crate::channels::{build_clearance_graph, compute_channels, ClearanceGraph, MolecularChannel, DEFAULT_ENVELOPE_PROBE};
use crate::error::{Error, GeomError};
use crate::model::{hash_balls, Molecule, RadiusModel};
use crate::predicates::Tolerances;
use crate::quasitri::{build_quasi_triangulation, load_qt, save_qt, QuasiTriangulation};
use crate::surface::{patches_for, BoundaryPatchSet, MassProperty, MolecularVoid};
use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

pub struct MolecularGeometry {
    pub molecule: Molecule,
    pub tol: Tolerances,
    qt: QuasiTriangulation,
    graph: OnceLock<ClearanceGraph>,
    envelope_probe: f64,
    /// Whether the quasi-triangulation came from a cache file.
    pub from_cache: bool,
}

impl MolecularGeometry {
    /// Builds the diagram and quasi-triangulation of the van der Waals balls.
    pub fn preprocess(molecule: Molecule) -> Result<Self, GeomError> {
        let tol = Tolerances::default();
        let qt = build_quasi_triangulation(&molecule.balls(), &tol)?;
        Ok(Self::with_qt(molecule, qt))
    }

    pub fn with_qt(molecule: Molecule, qt: QuasiTriangulation) -> Self {
        MolecularGeometry {
            molecule,
            tol: qt.vd.tol,
            qt,
            graph: OnceLock::new(),
            envelope_probe: DEFAULT_ENVELOPE_PROBE,
            from_cache: false,
        }
    }

    /// Reuses `cache` when it holds this molecule's balls, otherwise builds
    /// and writes it.
    pub fn preprocess_cached(molecule: Molecule, cache: &Path) -> Result<Self, Error> {
        if cache.is_file() {
            if let Ok(qt) = load_qt(cache) {
                if hash_balls(&qt.vd.input_balls) == molecule.geometry_hash() {
                    let mut g = Self::with_qt(molecule, qt);
                    g.from_cache = true;
                    return Ok(g);
                }
            }
        }
        let g = Self::preprocess(molecule)?;
        if let Some(dir) = cache.parent() {
            std::fs::create_dir_all(dir)?;
        }
        save_qt(&g.qt, cache)?;
        Ok(g)
    }

    pub fn set_envelope_probe(&mut self, probe: f64) {
        self.envelope_probe = probe;
        self.graph = OnceLock::new();
    }

    pub fn qt(&self) -> &QuasiTriangulation {
        &self.qt
    }

    pub fn clearance_graph(&self) -> &ClearanceGraph {
        self.graph.get_or_init(|| build_clearance_graph(&self.qt.vd, self.envelope_probe))
    }

    pub fn beta_complex(&self, beta: f64) -> Result<BetaComplex, GeomError> {
        extract_beta_complex(&self.qt, beta)
    }

    pub fn patches(&self, model: RadiusModel) -> Result<BoundaryPatchSet, GeomError> {
        patches_for(&self.molecule, model, &self.tol)
    }

    pub fn mass_properties(&self, model: RadiusModel) -> Result<MassProperty, GeomError> {
        Ok(self.patches(model)?.mass_properties())
    }

    pub fn voids(&self, model: RadiusModel) -> Result<Vec<MolecularVoid>, GeomError> {
        Ok(self.patches(model)?.voids())
    }

    /// Channels for a probe, widest bottleneck first.
    pub fn channels(&self, probe: f64, gate_size: f64) -> Vec<MolecularChannel> {
        compute_channels(&self.qt.vd, self.clearance_graph(), probe, gate_size)
    }

    pub fn boundary_atoms(&self, model: RadiusModel) -> Result<BTreeSet<usize>, GeomError> {
        Ok(self.patches(model)?.outer_atoms().into_iter().collect())
    }

    pub fn buried_atoms(&self, model: RadiusModel) -> Result<BTreeSet<usize>, GeomError> {
        let b = self.boundary_atoms(model)?;
        Ok((0..self.molecule.number_of_atoms()).filter(|a| !b.contains(a)).collect())
    }

    pub fn neighborhood(&self, model: RadiusModel) -> Neighborhood<'_> {
        Neighborhood::overlap(&self.molecule, model)
    }

    pub fn voronoi_neighborhood(&self) -> Neighborhood<'_> {
        Neighborhood::voronoi(&self.molecule, RadiusModel::van_der_waals(), &self.qt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn cube_corner_queries() {
        let g = MolecularGeometry::preprocess(Molecule::from_balls("cube", &fixtures::cube_corners([0.0; 3]))).unwrap();
        assert_eq!(g.voids(RadiusModel::lee_richards(0.5)).unwrap().len(), 1);
        assert!(g.voids(RadiusModel::lee_richards(0.3)).unwrap().is_empty());
        let ch = g.channels(0.3, 0.3);
        assert!((ch[0].bottleneck_radius - (2f64.sqrt() - 1.0)).abs() < 0.01);
        assert_eq!(g.boundary_atoms(RadiusModel::lee_richards(0.5)).unwrap().len(), 8);
        assert_eq!(g.beta_complex(10.0).unwrap().vertices.len(), 8);
    }

    #[test]
    fn cache_is_reused_only_for_the_same_balls() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.mgqt");
        let m = fixtures::pseudo_protein(2, 40);
        let first = MolecularGeometry::preprocess_cached(m.clone(), &path).unwrap();
        assert!(!first.from_cache);
        let again = MolecularGeometry::preprocess_cached(m, &path).unwrap();
        assert!(again.from_cache);
        assert_eq!(again.qt().counts(), first.qt().counts());
        let other = MolecularGeometry::preprocess_cached(fixtures::pseudo_protein(3, 40), &path).unwrap();
        assert!(!other.from_cache);
    }
}
