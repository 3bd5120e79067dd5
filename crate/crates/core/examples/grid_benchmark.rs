//! Analytic voids against grid voids at several resolutions.
use molgeom::fixtures::sub_cell_void_suite;
use molgeom::pipeline::{benchmark_default, BENCH_HEADER};

fn main() {
    println!("{BENCH_HEADER}");
    for (code, molecule) in sub_cell_void_suite() {
        for row in benchmark_default(&code, &molecule, 0.5, &[1.0, 0.5, 0.1, 0.05]) {
            println!("{}", row.csv());
        }
    }
}
