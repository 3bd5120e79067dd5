//! Union volume and area, analytic and sampled.
use molgeom::fixtures::pseudo_protein;
use molgeom::oracle_grid::mc_volume;
use molgeom::surface::compute_mass_properties;
use molgeom::RadiusModel;

fn main() {
    let molecule = pseudo_protein(11, 500);
    for model in [RadiusModel::van_der_waals(), RadiusModel::lee_richards(1.4)] {
        let mp = compute_mass_properties(&molecule, model).expect("patches");
        let (mc, sigma) = mc_volume(&molecule, model, 2_000_000, 1);
        println!("{model:?}: volume {:.2} (sampled {mc:.2} +- {sigma:.2}), area {:.2}", mp.volume, mp.area);
        let top = mp.per_atom_area.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        println!("  most exposed atom {} with {:.2} A^2", top.0, top.1);
    }
}
