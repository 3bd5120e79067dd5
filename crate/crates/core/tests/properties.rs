use molgeom::awvd::construct_awvd;
use molgeom::betacomplex::{extract_beta_complex, Neighborhood};
use molgeom::fixtures::random_balls;
use molgeom::model::mark_redundant;
use molgeom::pdb_io::{parse_pdb_str, serialize_minimal, ParseOptions};
use molgeom::quasitri::build_quasi_triangulation;
use molgeom::surface::build_boundary_patches;
use molgeom::{Atom, Ball, Molecule, RadiusModel, Tolerances, Vec3};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn balls(seed: u64, n: usize) -> Vec<Ball> {
    random_balls(seed, n, 6.0, 0.8, 1.8)
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn volume_and_area_scale(seed in 0u64..10_000, n in 2usize..14, s in 0.3f64..4.0) {
        let b = balls(seed, n);
        let (red, _) = mark_redundant(&b);
        let tol = Tolerances::default();
        let base = build_boundary_patches(&b, &red, &tol).unwrap();
        let big: Vec<Ball> = b.iter().map(|x| Ball { center: x.center * s, radius: x.radius * s, id: x.id }).collect();
        let scaled = build_boundary_patches(&big, &red, &tol).unwrap();
        prop_assume!(!base.perturbed && !scaled.perturbed);
        let (m0, m1) = (base.mass_properties(), scaled.mass_properties());
        prop_assert!((m1.area - m0.area * s * s).abs() <= 1e-9 * m1.area);
        prop_assert!((m1.volume - m0.volume * s * s * s).abs() <= 1e-9 * m1.volume);
    }

    #[test]
    fn shells_close_and_areas_add_up(seed in 0u64..10_000, n in 2usize..20) {
        let b = balls(seed, n);
        let (red, _) = mark_redundant(&b);
        let set = build_boundary_patches(&b, &red, &Tolerances::default()).unwrap();
        let mp = set.mass_properties();
        prop_assert!((mp.per_atom_area.iter().sum::<f64>() - mp.area).abs() <= 1e-9 * mp.area);
        for shell in &set.shells {
            let va: Vec3 = shell.patches.iter().map(|&p| set.patches[p].vector_area).sum();
            prop_assert!(va.norm() <= 1e-6 * shell.area.max(1.0));
        }
        prop_assert!(mp.volume <= mp.volume_with_voids + 1e-9);
    }

    #[test]
    fn translation_leaves_volume(seed in 0u64..10_000, n in 2usize..12, dx in -50.0f64..50.0) {
        let b = balls(seed, n);
        let (red, _) = mark_redundant(&b);
        let tol = Tolerances::default();
        let moved: Vec<Ball> = b.iter().map(|x| Ball { center: x.center + Vec3::new(dx, -dx, 0.5 * dx), ..*x }).collect();
        let a = build_boundary_patches(&b, &red, &tol).unwrap();
        let c = build_boundary_patches(&moved, &red, &tol).unwrap();
        prop_assume!(!a.perturbed && !c.perturbed);
        let (v0, v1) = (a.mass_properties().volume, c.mass_properties().volume);
        prop_assert!((v0 - v1).abs() <= 1e-8 * v0);
    }

    #[test]
    fn diagram_and_dual_counts_agree(seed in 0u64..10_000, n in 4usize..16) {
        let b = balls(seed, n);
        let vd = construct_awvd(&b, &Tolerances::default()).unwrap();
        let qt = build_quasi_triangulation(&b, &Tolerances::default()).unwrap();
        let (cells, faces, edges, vertices) = vd.counts();
        prop_assert_eq!(cells, mark_redundant(&b).0.iter().filter(|r| !**r).count());
        prop_assert_eq!(qt.counts(), (cells, faces, edges, vertices));
    }

    #[test]
    fn beta_complexes_are_nested(seed in 0u64..10_000, n in 4usize..16, lo in 0.0f64..2.0, step in 0.0f64..2.0) {
        let qt = build_quasi_triangulation(&balls(seed, n), &Tolerances::default()).unwrap();
        let small = extract_beta_complex(&qt, lo).unwrap();
        let big = extract_beta_complex(&qt, lo + step).unwrap();
        for (a, b) in [(&small.vertices, &big.vertices), (&small.edges, &big.edges), (&small.faces, &big.faces), (&small.cells, &big.cells)] {
            let ids: std::collections::HashSet<usize> = b.iter().map(|m| m.id).collect();
            prop_assert!(a.iter().all(|m| ids.contains(&m.id)));
        }
    }

    #[test]
    fn neighbours_are_symmetric_and_grow_with_probe(seed in 0u64..10_000, n in 2usize..25, probe in 0.01f64..2.0) {
        let m = Molecule::from_balls("r", &random_balls(seed, n, 10.0, 0.5, 2.0));
        let vdw = Neighborhood::overlap(&m, RadiusModel::van_der_waals());
        let lr = Neighborhood::overlap(&m, RadiusModel::lee_richards(probe));
        for a in 0..n {
            for b in vdw.find_neighbors(a, 1).unwrap() {
                prop_assert!(vdw.find_neighbors(b, 1).unwrap().contains(&a));
                prop_assert!(lr.are_adjacent(a, b).unwrap());
            }
        }
    }

    #[test]
    fn boundary_and_buried_partition_atoms(seed in 0u64..10_000, n in 1usize..30, probe in 0.0f64..1.5) {
        let m = Molecule::from_balls("r", &random_balls(seed, n, 7.0, 0.8, 1.8));
        let model = RadiusModel::lee_richards(probe);
        let boundary = molgeom::betacomplex::find_boundary_atoms(&m, model).unwrap();
        let buried = molgeom::betacomplex::find_buried_atoms(&m, model).unwrap();
        prop_assert!(boundary.is_disjoint(&buried));
        prop_assert_eq!(boundary.len() + buried.len(), n);
    }
}

const ELEMENTS: [&str; 6] = ["C", "N", "O", "S", "H", "FE"];

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn pdb_round_trip(coords in prop::collection::vec((-999.0f64..999.0, -999.0f64..999.0, -999.0f64..999.0, 0usize..6), 1..40)) {
        let opts = ParseOptions::default();
        let atoms: Vec<Atom> = coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z, e))| {
                let element = ELEMENTS[e].to_string();
                let name = if element.len() == 2 { element.clone() } else { format!("{element}{}", i % 9) };
                Atom {
                    ball: Ball::new(i, [x, y, z], opts.radii.radius(&element)),
                    serial: i as i64 + 1,
                    name,
                    element,
                    residue_name: "GLY".into(),
                    chain: 'B',
                    residue_seq: i as i64,
                    is_hetero: false,
                }
            })
            .collect();
        let m = Molecule::new("m", atoms);
        let back = parse_pdb_str(&serialize_minimal(&m), "m", &opts).unwrap();
        prop_assert_eq!(back.number_of_atoms(), m.number_of_atoms());
        for (a, b) in m.atoms.iter().zip(&back.atoms) {
            prop_assert!((a.ball.center - b.ball.center).amax() <= 5e-4 + 1e-9);
            prop_assert_eq!(a.ball.radius, b.ball.radius);
            prop_assert_eq!(&a.element, &b.element);
        }
    }
}
