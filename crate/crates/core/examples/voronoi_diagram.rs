//! Voronoi diagram of random spheres, checked against brute force.
use molgeom::awvd::{compare_diagrams, construct_awvd, construct_awvd_bruteforce};
use molgeom::fixtures::random_balls;
use molgeom::Tolerances;

fn main() {
    let balls = random_balls(7, 12, 10.0, 0.5, 2.0);
    let tol = Tolerances::default();
    let vd = construct_awvd(&balls, &tol).expect("diagram");
    let (cells, faces, edges, vertices) = vd.counts();
    println!("{cells} cells, {faces} faces, {edges} edges, {vertices} vertices");
    for v in vd.vertices.iter().take(5) {
        let c = v.tangent.center;
        println!("vertex at ({:.3}, {:.3}, {:.3}) clearance {:.4}", c.x, c.y, c.z, v.tangent.radius);
    }
    let brute = construct_awvd_bruteforce(&balls, &tol).expect("reference");
    match compare_diagrams(&vd, &brute, 1e-6) {
        Ok(()) => println!("matches the brute-force enumeration"),
        Err(e) => println!("differs from brute force: {e}"),
    }
}
