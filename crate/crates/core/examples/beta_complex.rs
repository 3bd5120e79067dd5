//! Beta-complex sizes over a probe sweep, boundary atoms and neighbours.
use molgeom::betacomplex::{find_boundary_atoms, Neighborhood};
use molgeom::fixtures::pseudo_protein;
use molgeom::geometry::MolecularGeometry;
use molgeom::RadiusModel;

fn main() {
    let molecule = pseudo_protein(5, 300);
    let geom = MolecularGeometry::preprocess(molecule.clone()).expect("preprocess");
    for beta in [0.0, 0.5, 1.0, 1.4, 2.0, 3.0] {
        let bc = geom.beta_complex(beta).expect("annotated");
        let boundary = bc.boundary();
        println!(
            "beta {beta:.1}: {} edges, {} faces, {} cells; {} boundary faces",
            bc.edges.len(),
            bc.faces.len(),
            bc.cells.len(),
            boundary.faces.len()
        );
    }
    let water = RadiusModel::lee_richards(1.4);
    let exposed = find_boundary_atoms(&molecule, water).expect("patches");
    println!("{} of {} atoms are exposed to a 1.4 A probe", exposed.len(), molecule.number_of_atoms());
    let nb = Neighborhood::overlap(&molecule, RadiusModel::van_der_waals());
    println!("atom 0: {} first-order and {} second-order neighbours", nb.number_of_neighbors(0, 1).unwrap(), nb.number_of_neighbors(0, 2).unwrap());
}
