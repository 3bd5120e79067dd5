//! Quasi-triangulation with beta intervals, saved to and reloaded from a cache.
use molgeom::fixtures::pseudo_protein;
use molgeom::quasitri::{build_quasi_triangulation, load_qt, save_qt};
use molgeom::Tolerances;

fn main() {
    let molecule = pseudo_protein(3, 400);
    let qt = build_quasi_triangulation(&molecule.balls(), &Tolerances::default()).expect("quasi-triangulation");
    let (v, e, f, c) = qt.counts();
    println!("{v} vertices, {e} edges, {f} faces, {c} cells, {} worlds", qt.worlds.len());
    let cell = &qt.cells[0];
    println!("cell 0 on balls {:?} enters the complex at beta {:.4}", cell.vertices.map(|v| qt.vertices[v].ball_id), cell.beta.l1);

    let path = std::env::temp_dir().join("pseudo_protein.mgqt");
    save_qt(&qt, &path).expect("save");
    let back = load_qt(&path).expect("load");
    println!("reloaded {:?} from {}", back.counts(), path.display());
}
