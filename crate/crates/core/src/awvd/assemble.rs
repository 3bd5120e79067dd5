//! Builds the radial-edge structure from raw vertex and edge lists.

use super::raw::{interior_param, RawDiagram, RawEnd};
use super::*;
use std::collections::HashMap;
use std::f64::consts::PI;

fn topo(msg: String) -> GeomError {
    GeomError::InvalidTopology(msg)
}

pub(super) fn assemble(
    balls: Vec<Ball>,
    input_balls: Vec<Ball>,
    redundant: Vec<bool>,
    work: &[Ball],
    raw: RawDiagram,
    tol: Tolerances,
    perturbation: Option<Perturbation>,
) -> Result<VoronoiDiagram, GeomError> {
    let id = |i: usize| work[i].id;
    let mut cell_of_ball = vec![None; balls.len()];
    let mut cells = Vec::with_capacity(work.len());
    for b in work {
        cell_of_ball[b.id] = Some(cells.len());
        cells.push(VDCell { generator: b.id, faces: Vec::new() });
    }

    let mut vertices: Vec<VDVertex> = raw
        .vertices
        .iter()
        .map(|v| VDVertex { tangent: v.sphere, balls: v.quad.map(id), incident_edges: [usize::MAX; 4] })
        .collect();

    let mut edges = Vec::with_capacity(raw.edges.len());
    for (e, re) in raw.edges.iter().enumerate() {
        let triple = re.triple.map(id);
        let conv = |x: RawEnd| match x {
            RawEnd::Vertex(v) => EdgeEnd::Vertex(v),
            RawEnd::Infinite => EdgeEnd::Infinite,
        };
        let ends = re.ends.map(|(a, b)| (conv(a), conv(b)));
        if let Some((a, b)) = ends {
            if a == b && a != EdgeEnd::Infinite {
                return Err(topo(format!("edge {triple:?} starts and ends at one vertex")));
            }
            for end in [a, b] {
                if let EdgeEnd::Vertex(v) = end {
                    let q = vertices[v].balls;
                    let slot = (0..4).find(|&k| !triple.contains(&q[k])).ok_or_else(|| topo(format!("edge {triple:?} not incident to vertex {q:?}")))?;
                    if vertices[v].incident_edges[slot] != usize::MAX {
                        return Err(topo(format!("vertex {q:?} has two edges with triple {triple:?}")));
                    }
                    vertices[v].incident_edges[slot] = e;
                }
            }
        }
        edges.push(VDEdge { ends, partial_edge: usize::MAX, equidistant_balls: triple, arc: [re.s0, re.s1] });
    }
    if let Some(v) = vertices.iter().find(|v| v.incident_edges.contains(&usize::MAX)) {
        return Err(topo(format!("vertex {:?} lacks an incident edge", v.balls)));
    }

    let mut faces: Vec<VDFace> = Vec::new();
    let mut face_index: HashMap<[usize; 2], FaceId> = HashMap::new();
    let mut get_face = |pair: [usize; 2], faces: &mut Vec<VDFace>| -> FaceId {
        *face_index.entry(pair).or_insert_with(|| {
            faces.push(VDFace {
                left_cell: cell_of_ball[pair[0]].unwrap(),
                right_cell: cell_of_ball[pair[1]].unwrap(),
                loops: Vec::new(),
                defining_pair: pair,
            });
            faces.len() - 1
        })
    };
    let mut partial_edges: Vec<PartialEdge> = Vec::with_capacity(3 * edges.len());
    let mut edge_partials: Vec<[PartialEdgeId; 3]> = Vec::with_capacity(edges.len());
    let mut face_partials: Vec<Vec<PartialEdgeId>> = Vec::new();
    for (e, edge) in edges.iter().enumerate() {
        let [a, b, c] = edge.equidistant_balls;
        let mut ps = [0; 3];
        for (k, pair) in [[a, b], [a, c], [b, c]].into_iter().enumerate() {
            let f = get_face(pair, &mut faces);
            if face_partials.len() <= f {
                face_partials.resize(f + 1, Vec::new());
            }
            let p = partial_edges.len();
            partial_edges.push(PartialEdge {
                parent_edge: e,
                face: f,
                owning_loop: usize::MAX,
                next_in_loop: usize::MAX,
                prev_in_loop: usize::MAX,
                radial_next: usize::MAX,
                forward: true,
            });
            face_partials[f].push(p);
            ps[k] = p;
        }
        edge_partials.push(ps);
    }
    for pair in &raw.free_pairs {
        get_face(pair.map(id), &mut faces);
    }
    face_partials.resize(faces.len(), Vec::new());
    for (f, face) in faces.iter().enumerate() {
        cells[face.left_cell].faces.push(f);
        cells[face.right_cell].faces.push(f);
    }

    // radial order: counterclockwise around the edge direction
    for (e, edge) in edges.iter_mut().enumerate() {
        let [a, b, c] = edge.equidistant_balls;
        let tri = Trisector::new([&balls[a], &balls[b], &balls[c]], &tol).map_err(|err| topo(format!("edge {:?}: {err}", edge.equidistant_balls)))?;
        let s = interior_param(edge.arc[0], edge.arc[1]);
        let (x, _) = tri.point(s);
        let tan = tri.tangent(s).normalize();
        let g = |m: usize| (x - balls[m].center).normalize();
        let dirs: Vec<Vec3> = [(a, b, c), (a, c, b), (b, c, a)]
            .iter()
            .map(|&(i, j, k)| {
                let w = tan.cross(&(g(i) - g(j)));
                if (g(k) - g(i)).dot(&w) < 0.0 { -w } else { w }
            })
            .collect();
        let e1 = dirs[0].normalize();
        let e2 = tan.cross(&e1);
        let mut order: Vec<(f64, usize)> = dirs
            .iter()
            .enumerate()
            .map(|(k, w)| ((w.dot(&e2)).atan2(w.dot(&e1)).rem_euclid(2.0 * PI), k))
            .collect();
        order.sort_by(|p, q| p.0.total_cmp(&q.0));
        let ps = edge_partials[e];
        for i in 0..3 {
            partial_edges[ps[order[i].1]].radial_next = ps[order[(i + 1) % 3].1];
        }
        edge.partial_edge = ps[order[0].1];
    }

    let mut loops: Vec<Loop> = Vec::new();
    let centers: Vec<Vec3> = work.iter().map(|b| b.center).collect();
    for f in 0..faces.len() {
        let pair = faces[f].defining_pair;
        let partner = |p: PartialEdgeId, v: VertexId| -> Result<(PartialEdgeId, bool), GeomError> {
            let e = partial_edges[p].parent_edge;
            let k = *edges[e].equidistant_balls.iter().find(|x| !pair.contains(x)).unwrap();
            let q = vertices[v].balls;
            let slot = q.iter().position(|&x| x == k).ok_or_else(|| topo(format!("vertex {q:?} lacks ball {k}")))?;
            let e2 = vertices[v].incident_edges[slot];
            let p2 = *edge_partials[e2].iter().find(|&&p| partial_edges[p].face == f).ok_or_else(|| topo(format!("face {pair:?} broken at vertex {q:?}")))?;
            let fwd = matches!(edges[e2].ends, Some((EdgeEnd::Vertex(s), _)) if s == v);
            Ok((p2, fwd))
        };
        let exit = |p: PartialEdgeId, fwd: bool| -> Option<EdgeEnd> {
            edges[partial_edges[p].parent_edge].ends.map(|(a, b)| if fwd { b } else { a })
        };
        let mut visited: HashMap<PartialEdgeId, bool> = HashMap::new();
        let limit = face_partials[f].len() + 1;
        let mut chains: Vec<Vec<(PartialEdgeId, bool)>> = Vec::new();
        for &p in &face_partials[f] {
            if visited.contains_key(&p) {
                continue;
            }
            let Some((a, b)) = edges[partial_edges[p].parent_edge].ends else { continue };
            if a != EdgeEnd::Infinite && b != EdgeEnd::Infinite {
                continue;
            }
            let mut fwd = a == EdgeEnd::Infinite;
            let mut cur = p;
            let mut chain = Vec::new();
            loop {
                if visited.insert(cur, fwd).is_some() || chain.len() > limit {
                    return Err(topo(format!("face {pair:?}: chain revisits an edge")));
                }
                chain.push((cur, fwd));
                match exit(cur, fwd) {
                    Some(EdgeEnd::Infinite) => break,
                    Some(EdgeEnd::Vertex(v)) => {
                        let (n, nf) = partner(cur, v)?;
                        cur = n;
                        fwd = nf;
                    }
                    None => return Err(topo(format!("face {pair:?}: closed edge inside chain"))),
                }
            }
            chains.push(chain);
        }
        let mut cycles: Vec<Vec<(PartialEdgeId, bool)>> = Vec::new();
        for &p in &face_partials[f] {
            if visited.contains_key(&p) {
                continue;
            }
            let mut cur = p;
            let mut fwd = true;
            let mut cycle = Vec::new();
            loop {
                if visited.insert(cur, fwd).is_some() {
                    if cur == p {
                        break;
                    }
                    return Err(topo(format!("face {pair:?}: cycle revisits an edge")));
                }
                cycle.push((cur, fwd));
                match exit(cur, fwd) {
                    None => break,
                    Some(EdgeEnd::Infinite) => return Err(topo(format!("face {pair:?}: cycle reaches infinity"))),
                    Some(EdgeEnd::Vertex(v)) => {
                        let (n, nf) = partner(cur, v)?;
                        if n == p {
                            if !nf {
                                return Err(topo(format!("face {pair:?}: inconsistent cycle orientation")));
                            }
                            break;
                        }
                        cur = n;
                        fwd = nf;
                    }
                }
                if cycle.len() > limit {
                    return Err(topo(format!("face {pair:?}: cycle does not close")));
                }
            }
            cycles.push(cycle);
        }

        let (ci, cj) = (balls[pair[0]].center, balls[pair[1]].center);
        let axis = (cj - ci).normalize();
        let (u, w) = crate::predicates::perpendicular_basis(&axis);
        let mut outer: Option<Vec<(PartialEdgeId, bool)>> = None;
        if !chains.is_empty() {
            let mut keyed: Vec<(f64, Vec<(PartialEdgeId, bool)>)> = chains
                .into_iter()
                .map(|c| {
                    let (p, fwd) = c[0];
                    let e = partial_edges[p].parent_edge;
                    let [a, b, cc] = edges[e].equidistant_balls;
                    let tri = Trisector::new([&balls[a], &balls[b], &balls[cc]], &tol).unwrap();
                    let d = tri.asymptote(!fwd);
                    (d.dot(&w).atan2(d.dot(&u)), c)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
            outer = Some(keyed.into_iter().flat_map(|(_, c)| c).collect());
        } else if !cycles.is_empty() {
            let unbounded = sheet_reaches_infinity(&balls, &centers, work, pair, &u);
            if !unbounded {
                let reach = |c: &Vec<(PartialEdgeId, bool)>| -> f64 {
                    c.iter()
                        .map(|&(p, _)| {
                            let e = partial_edges[p].parent_edge;
                            let [a, b, cc] = edges[e].equidistant_balls;
                            let tri = Trisector::new([&balls[a], &balls[b], &balls[cc]], &tol).unwrap();
                            let [s0, s1] = edges[e].arc;
                            tri.sample(s0, s1, 16)
                                .iter()
                                .map(|(x, _)| {
                                    let r = x - ci;
                                    (r - axis * r.dot(&axis)).norm()
                                })
                                .fold(0.0, f64::max)
                        })
                        .fold(0.0, f64::max)
                };
                let best = (0..cycles.len()).max_by(|&a, &b| reach(&cycles[a]).total_cmp(&reach(&cycles[b]))).unwrap();
                outer = Some(cycles.remove(best));
            }
        }
        let mut make = |seq: &[(PartialEdgeId, bool)], is_outer: bool, loops: &mut Vec<Loop>, faces: &mut Vec<VDFace>| {
            let l = loops.len();
            loops.push(Loop { owning_face: f, partial_edge: seq.first().map(|x| x.0), is_outer });
            let n = seq.len();
            for i in 0..n {
                let (p, fwd) = seq[i];
                let pe = &mut partial_edges[p];
                pe.owning_loop = l;
                pe.forward = fwd;
                pe.next_in_loop = seq[(i + 1) % n].0;
                pe.prev_in_loop = seq[(i + n - 1) % n].0;
            }
            faces[f].loops.push(l);
        };
        match outer {
            Some(seq) => make(&seq, true, &mut loops, &mut faces),
            None => make(&[], true, &mut loops, &mut faces),
        }
        for c in &cycles {
            make(c, false, &mut loops, &mut faces);
        }
    }

    Ok(VoronoiDiagram {
        cells,
        faces,
        loops,
        partial_edges,
        edges,
        vertices,
        infinite_vertex: EdgeEnd::Infinite,
        balls,
        input_balls,
        redundant,
        cell_of_ball,
        perturbation,
        tol,
    })
}

/// Whether the bisector sheet of `pair` belongs to the face far from the balls.
fn sheet_reaches_infinity(balls: &[Ball], centers: &[Vec3], work: &[Ball], pair: [usize; 2], q: &Vec3) -> bool {
    let (bi, bj) = (&balls[pair[0]], &balls[pair[1]]);
    let d = (bj.center - bi.center).norm();
    let axis = (bj.center - bi.center) / d;
    let delta = bi.radius - bj.radius;
    let (lo, hi) = crate::spatial::bbox(centers);
    let rho = 1e3 * ((hi - lo).norm() + d + 1.0);
    let mid = (bi.center + bj.center) / 2.0;
    let x_at = |z: f64| mid + axis * z + q * rho;
    let g = |z: f64| {
        let x = x_at(z);
        (x - bi.center).norm() - (x - bj.center).norm() - delta
    };
    let (mut a, mut b) = (-rho, rho);
    while g(a) > 0.0 {
        a *= 2.0;
    }
    while g(b) < 0.0 {
        b *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let x = x_at(0.5 * (a + b));
    let t = bi.power_distance(&x);
    work.iter().all(|m| m.id == bi.id || m.id == bj.id || balls[m.id].power_distance(&x) >= t - 1e-9 * rho)
}
