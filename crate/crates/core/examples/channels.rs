//! The channel through eight balls on cube corners.
use molgeom::fixtures::cube_corners;
use molgeom::geometry::MolecularGeometry;
use molgeom::Molecule;

fn main() {
    let geom = MolecularGeometry::preprocess(Molecule::from_balls("cube", &cube_corners([0.0; 3]))).expect("preprocess");
    for probe in [0.2, 0.3, 0.45] {
        let channels = geom.channels(probe, probe);
        println!("probe {probe}: {} channels", channels.len());
        for c in &channels {
            println!("  bottleneck {:.6}, spine length {:.4}, {} gates, atoms {:?}", c.bottleneck_radius, c.length, c.gates.len(), c.contributing_atoms);
        }
    }
    let voids = geom.clearance_graph().bounded_components(0.5);
    println!("probe 0.5: {} enclosed diagram components", voids.len());
}
