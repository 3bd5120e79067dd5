//! Voids of a closed cage, analytic against a flood-filled grid.
use molgeom::fixtures::cube_cage;
use molgeom::oracle_grid::{grid_voids, GridSpec};
use molgeom::surface::compute_voids;
use molgeom::{Molecule, RadiusModel};

fn main() {
    let cage = Molecule::from_balls("cage", &cube_cage(3, 2.2, [0.0; 3]));
    for probe in [0.3, 0.7, 1.0] {
        let model = RadiusModel::lee_richards(probe);
        let voids = compute_voids(&cage, model).expect("patches");
        let grid = grid_voids(&cage, model, GridSpec::for_probe(0.1, probe)).expect("grid");
        println!("probe {probe}: {} voids, grid finds {}", voids.len(), grid.count);
        for v in &voids {
            println!("  volume {:.4} area {:.4} from {} atoms; grid volume {:.4}", v.volume, v.area, v.contributing_atoms.len(), grid.total_volume);
        }
    }
}
