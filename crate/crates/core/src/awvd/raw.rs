//! Flat vertex/edge lists produced by the constructors before REDS assembly.
//!
//! Ball indices are local to the working ball slice. Edge arcs run from `s0`
//! to `s1` in increasing curve parameter; closed curves may have `s1 > 2pi`.

use crate::error::GeomError;
use crate::model::Ball;
use crate::predicates::{wrap_angle, TangentSphere, Tolerances, Trisector};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub(crate) struct RawVertex {
    pub quad: [usize; 4],
    pub sphere: TangentSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawEnd {
    Vertex(usize),
    Infinite,
}

#[derive(Debug, Clone)]
pub(crate) struct RawEdge {
    pub triple: [usize; 3],
    /// `None` for a closed curve carrying no vertex.
    pub ends: Option<(RawEnd, RawEnd)>,
    pub s0: f64,
    pub s1: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct RawDiagram {
    pub vertices: Vec<RawVertex>,
    pub edges: Vec<RawEdge>,
    pub free_pairs: Vec<[usize; 2]>,
}

/// Whether the arc contains the curve's minimum point (parameter 0).
pub(crate) fn covers_zero(e: &RawEdge, tri: &Trisector) -> bool {
    arc_contains(e.s0, e.s1, tri.is_closed(), 0.0)
}

pub(crate) fn arc_contains(s0: f64, s1: f64, closed: bool, s: f64) -> bool {
    if closed {
        if s1 - s0 >= 2.0 * PI - 1e-15 {
            return true;
        }
        let a = wrap_angle(s0);
        let x = wrap_angle(s);
        let x = if x < a { x + 2.0 * PI } else { x };
        x <= a + (s1 - s0)
    } else {
        s0 <= s && s <= s1
    }
}

/// A finite parameter inside the arc, away from its ends.
pub(crate) fn interior_param(s0: f64, s1: f64) -> f64 {
    match (s0.is_finite(), s1.is_finite()) {
        (true, true) => 0.5 * (s0 + s1),
        (false, true) => s1 - 1.0 - s1.abs() * 0.5,
        (true, false) => s0 + 1.0 + s0.abs() * 0.5,
        (false, false) => 0.0,
    }
}

/// Sign of the parameter direction that leaves the region of ball `l` at the
/// point of parameter `s` on the curve of `triple`.
pub(crate) fn away_sign(balls: &[Ball], tri: &Trisector, triple: [usize; 3], l: usize, s: f64) -> f64 {
    let (x, _) = tri.point(s);
    let ga = (x - balls[triple[0]].center).normalize();
    let gl = (x - balls[l].center).normalize();
    (gl - ga).dot(&tri.tangent(s)).signum()
}

fn end_key(e: RawEnd) -> usize {
    match e {
        RawEnd::Vertex(v) => v,
        RawEnd::Infinite => usize::MAX,
    }
}

/// Sorts vertices and edges into a canonical order and recomputes arc
/// parameters from the vertex spheres, so equal diagrams compare bitwise.
pub(crate) fn canonicalize(raw: RawDiagram, balls: &[Ball], tol: &Tolerances) -> Result<RawDiagram, GeomError> {
    let mut order: Vec<usize> = (0..raw.vertices.len()).collect();
    let key = |v: &RawVertex| (v.quad, [v.sphere.center.x, v.sphere.center.y, v.sphere.center.z]);
    order.sort_by(|&a, &b| {
        let (qa, ca) = key(&raw.vertices[a]);
        let (qb, cb) = key(&raw.vertices[b]);
        qa.cmp(&qb).then(ca[0].total_cmp(&cb[0])).then(ca[1].total_cmp(&cb[1])).then(ca[2].total_cmp(&cb[2]))
    });
    let mut new_id = vec![0; order.len()];
    for (n, &o) in order.iter().enumerate() {
        new_id[o] = n;
    }
    let vertices: Vec<RawVertex> = order.iter().map(|&o| raw.vertices[o].clone()).collect();
    let remap = |e: RawEnd| match e {
        RawEnd::Vertex(v) => RawEnd::Vertex(new_id[v]),
        RawEnd::Infinite => RawEnd::Infinite,
    };
    let mut edges = Vec::with_capacity(raw.edges.len());
    for e in raw.edges {
        let t = e.triple;
        let tri = Trisector::new([&balls[t[0]], &balls[t[1]], &balls[t[2]]], tol)?;
        let ends = e.ends.map(|(a, b)| (remap(a), remap(b)));
        let at = |end: RawEnd, fallback: f64| match end {
            RawEnd::Vertex(v) => {
                let s = &vertices[v].sphere;
                tri.param_of(&s.center, s.radius)
            }
            RawEnd::Infinite => fallback,
        };
        let (s0, s1) = match ends {
            None => (0.0, 2.0 * PI),
            Some((a, b)) if tri.is_closed() => {
                let s0 = wrap_angle(at(a, 0.0));
                (s0, s0 + wrap_angle(at(b, 0.0) - s0))
            }
            Some((a, b)) => (at(a, f64::NEG_INFINITY), at(b, f64::INFINITY)),
        };
        edges.push(RawEdge { triple: t, ends, s0, s1 });
    }
    edges.sort_by(|a, b| {
        let ka = (a.triple, a.ends.map(|(x, y)| (end_key(x), end_key(y))));
        let kb = (b.triple, b.ends.map(|(x, y)| (end_key(x), end_key(y))));
        ka.cmp(&kb).then(a.s0.total_cmp(&b.s0))
    });
    let mut free_pairs = raw.free_pairs;
    free_pairs.sort_unstable();
    Ok(RawDiagram { vertices, edges, free_pairs })
}
