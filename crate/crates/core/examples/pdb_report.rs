//! Parse PDB records and print the analysis report.
use molgeom::geometry::MolecularGeometry;
use molgeom::pdb_io::{parse_pdb_str, ParseOptions};
use molgeom::pipeline::analyze;

const RECORDS: &str = "\
ATOM      1  N   GLY A   1      -1.195   0.101   0.023  1.00  0.00           N
ATOM      2  CA  GLY A   1       0.253   0.052  -0.032  1.00  0.00           C
ATOM      3  C   GLY A   1       0.789   1.467  -0.013  1.00  0.00           C
ATOM      4  O   GLY A   1       0.022   2.427   0.042  1.00  0.00           O
ATOM      5  N   ALA A   2       2.109   1.587  -0.051  1.00  0.00           N
ATOM      6  CA  ALA A   2       2.741   2.902  -0.036  1.00  0.00           C
ATOM      7  CB  ALA A   2       2.341   3.671  -1.293  1.00  0.00           C
ATOM      8  C   ALA A   2       4.255   2.742  -0.012  1.00  0.00           C
ATOM      9  O   ALA A   2       4.792   1.634  -0.042  1.00  0.00           O
HETATM   10  O   HOH A 101       7.000   0.000   0.000  1.00  0.00           O
END
";

fn main() {
    let path = std::env::args().nth(1);
    let opts = ParseOptions::default();
    let molecule = match &path {
        Some(p) => molgeom::pdb_io::read_pdb_file(p.as_ref(), &opts).expect("readable PDB file"),
        None => parse_pdb_str(RECORDS, "dipeptide", &opts).expect("records"),
    };
    let geom = MolecularGeometry::preprocess(molecule).expect("preprocess");
    print!("{}", analyze(&geom, 1.4, 1.4).expect("analysis"));
}
