use super::*;
use crate::spatial::SpatialGrid;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub entity: String,
    pub balls: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}: {}", self.entity, self.balls, self.message)
    }
}

fn v(entity: &str, balls: &[usize], message: impl Into<String>) -> Violation {
    Violation { entity: entity.into(), balls: balls.to_vec(), message: message.into() }
}

/// Checks the structural and geometric invariants; an empty report means valid.
pub fn validate_reds(vd: &VoronoiDiagram) -> Vec<Violation> {
    let mut out = Vec::new();
    let np = vd.partial_edges.len();

    for (e, edge) in vd.edges.iter().enumerate() {
        let t = &edge.equidistant_balls;
        let p0 = edge.partial_edge;
        if p0 >= np {
            out.push(v("edge", t, "missing partial edge"));
            continue;
        }
        let p1 = vd.partial_edges[p0].radial_next;
        let p2 = if p1 < np { vd.partial_edges[p1].radial_next } else { usize::MAX };
        let p3 = if p2 < np { vd.partial_edges[p2].radial_next } else { usize::MAX };
        let ok = p3 == p0
            && p0 != p1
            && p1 != p2
            && p0 != p2
            && [p0, p1, p2].iter().all(|&p| vd.partial_edges[p].parent_edge == e);
        if !ok {
            out.push(v("edge", t, "radial cycle is not a 3-cycle of its own partial edges"));
            continue;
        }
        let mut fs = [p0, p1, p2].map(|p| vd.partial_edges[p].face);
        fs.sort_unstable();
        if fs[0] == fs[1] || fs[1] == fs[2] {
            out.push(v("edge", t, "radial cycle repeats a face"));
        }
        for p in [p0, p1, p2] {
            let pair = vd.faces[vd.partial_edges[p].face].defining_pair;
            if !(t.contains(&pair[0]) && t.contains(&pair[1])) {
                out.push(v("edge", t, format!("incident face {pair:?} not defined by the triple")));
            }
        }
    }

    let mut seen = vec![0u32; np];
    for (l, lp) in vd.loops.iter().enumerate() {
        let pair = vd.faces[lp.owning_face].defining_pair;
        let Some(start) = lp.partial_edge else { continue };
        let mut p = start;
        let mut steps = 0;
        loop {
            let pe = &vd.partial_edges[p];
            seen[p] += 1;
            if pe.owning_loop != l || pe.face != lp.owning_face {
                out.push(v("loop", &pair, format!("partial edge {p} owned elsewhere")));
            }
            if pe.next_in_loop >= np || vd.partial_edges[pe.next_in_loop].prev_in_loop != p {
                out.push(v("loop", &pair, format!("next/prev mismatch at partial edge {p}")));
                break;
            }
            p = pe.next_in_loop;
            steps += 1;
            if p == start {
                break;
            }
            if steps > np {
                out.push(v("loop", &pair, "walk does not close"));
                break;
            }
        }
    }
    for (p, &n) in seen.iter().enumerate() {
        if n != 1 {
            let t = vd.edges[vd.partial_edges[p].parent_edge].equidistant_balls;
            out.push(v("partial edge", &t, format!("owned by {n} loops")));
        }
    }

    for (f, face) in vd.faces.iter().enumerate() {
        let outer = face.loops.iter().filter(|&&l| vd.loops[l].is_outer).count();
        if outer != 1 {
            out.push(v("face", &face.defining_pair, format!("{outer} outer loops")));
        }
        if face.left_cell == face.right_cell {
            out.push(v("face", &face.defining_pair, "left and right cell coincide"));
        }
        if face.loops.iter().any(|&l| vd.loops[l].owning_face != f) {
            out.push(v("face", &face.defining_pair, "loop owned by another face"));
        }
    }

    let active: Vec<Ball> = vd.cells.iter().map(|c| vd.balls[c.generator]).collect();
    let r_max = active.iter().map(|b| b.radius).fold(0.0, f64::max);
    let grid = SpatialGrid::new(&active, 2.0 * r_max.max(1e-9));
    let mut hit = Vec::new();
    for (id, vx) in vd.vertices.iter().enumerate() {
        let mut es = vx.incident_edges;
        es.sort_unstable();
        if es.windows(2).any(|w| w[0] == w[1]) || es.iter().any(|&e| e >= vd.edges.len()) {
            out.push(v("vertex", &vx.balls, "incident edges are not four distinct edges"));
            continue;
        }
        for e in vx.incident_edges {
            let touches = matches!(vd.edges[e].ends, Some((a, b)) if a == EdgeEnd::Vertex(id) || b == EdgeEnd::Vertex(id));
            if !touches {
                out.push(v("vertex", &vx.balls, format!("edge {e} does not end at the vertex")));
            }
        }
        let s = &vx.tangent;
        let eps = vd.tol.eps_geom * (1.0 + s.radius.abs());
        for b in vx.balls {
            if s.residual(&vd.balls[b]) > eps {
                out.push(v("vertex", &vx.balls, format!("not tangent to ball {b}")));
            }
        }
        grid.query(&s.center, s.radius.max(0.0) + r_max + 1e-9, &mut hit);
        if let Some(&i) = hit.iter().find(|&&i| active[i].power_distance(&s.center) < s.radius - eps) {
            out.push(v("vertex", &vx.balls, format!("tangent sphere intersects ball {}", active[i].id)));
        }
    }

    let mut count = vec![0; vd.balls.len()];
    for c in &vd.cells {
        count[c.generator] += 1;
    }
    for (b, &n) in count.iter().enumerate() {
        let want = if vd.redundant[b] { 0 } else { 1 };
        if n != want {
            out.push(v("cell", &[b], format!("{n} cells, expected {want}")));
        }
    }
    out
}
