//! Probe passages on the Voronoi edge graph.
//!
//! Nodes are diagram vertices plus one exterior sentinel; arcs are bounded
//! or unbounded diagram edges weighted by their minimum clearance. A node is
//! inside when it lies within the outer shell of the envelope model (balls
//! inflated by the envelope probe). A channel is a connected set of inside
//! nodes, joined by arcs a probe can pass, that reaches outside through at
//! least two gate arcs.

use crate::awvd::{EdgeEnd, EdgeId, VoronoiDiagram};
use crate::model::Vec3;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Envelope probe radius used when none is given.
pub const DEFAULT_ENVELOPE_PROBE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ClearanceArc {
    pub edge: EdgeId,
    /// Node ids; the exterior sentinel is `ClearanceGraph::exterior()`.
    pub ends: [usize; 2],
    pub min_clearance: f64,
    pub inside: [bool; 2],
}

#[derive(Debug, Clone)]
pub struct ClearanceGraph {
    /// Clearance of each vertex node; the sentinel has infinite clearance.
    pub node_clearance: Vec<f64>,
    pub inside: Vec<bool>,
    pub arcs: Vec<ClearanceArc>,
    pub envelope_probe: f64,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpineSegment {
    pub edge: EdgeId,
    /// Curve parameters walked, in spine order.
    pub from: f64,
    pub to: f64,
    pub points: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MolecularChannel {
    pub spine: Vec<SpineSegment>,
    pub bottleneck_radius: f64,
    pub length: f64,
    /// Gate arcs (diagram edges crossing the envelope), widest first.
    pub gates: Vec<EdgeId>,
    pub contributing_atoms: Vec<usize>,
    /// Vertex nodes of the channel component.
    pub nodes: Vec<usize>,
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

impl ClearanceGraph {
    pub fn exterior(&self) -> usize {
        self.node_clearance.len() - 1
    }

    /// Node components over arcs with clearance at least `probe`.
    fn components(&self, probe: f64) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.node_clearance.len()).collect();
        for a in &self.arcs {
            if a.min_clearance >= probe {
                let (x, y) = (find(&mut parent, a.ends[0]), find(&mut parent, a.ends[1]));
                parent[x] = y;
            }
        }
        (0..parent.len()).map(|i| find(&mut parent, i)).collect()
    }

    /// Sets of vertex nodes that admit the probe but cannot reach the exterior.
    pub fn bounded_components(&self, probe: f64) -> Vec<Vec<usize>> {
        let comp = self.components(probe);
        let ext = comp[self.exterior()];
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.exterior() {
            if self.node_clearance[v] >= probe && comp[v] != ext {
                groups.entry(comp[v]).or_default().push(v);
            }
        }
        groups.into_values().collect()
    }
}

/// Parameter of the curve's clearance minimum within the arc.
fn apex(tri: &crate::predicates::Trisector, s0: f64, s1: f64) -> f64 {
    if tri.is_closed() {
        let k = (s0 / (2.0 * std::f64::consts::PI)).ceil() * 2.0 * std::f64::consts::PI;
        if k <= s1 {
            return k;
        }
    } else if s0 <= 0.0 && 0.0 <= s1 {
        return 0.0;
    }
    if tri.radius_at(s0) <= tri.radius_at(s1) { s0 } else { s1 }
}

/// First parameter walking from `from` toward `to` where the clearance
/// reaches `level`, or `to` if it never does. The clearance along the walk
/// must not decrease past the first crossing (true from an apex outward).
fn rise_to(tri: &crate::predicates::Trisector, from: f64, to: f64, level: f64) -> f64 {
    if tri.radius_at(from) >= level {
        return from;
    }
    let mut far = to;
    if far.is_infinite() {
        let dir = far.signum();
        let mut step = 1.0;
        far = from + dir * step;
        while tri.radius_at(far) < level && step < 1e12 {
            step *= 2.0;
            far = from + dir * step;
        }
    }
    if tri.radius_at(far) < level {
        return to;
    }
    let (mut a, mut b) = (from, far);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if tri.radius_at(m) < level {
            a = m;
        } else {
            b = m;
        }
    }
    b
}

/// Clearance graph of a diagram with inside flags from the envelope model.
///
/// A vertex is outside when a ball of radius `envelope_probe` placed in the
/// exterior without touching any atom covers it. Placements are sampled at
/// the diagram's exterior vertices and where exterior edges reach the
/// envelope clearance.
pub fn build_clearance_graph(vd: &VoronoiDiagram, envelope_probe: f64) -> ClearanceGraph {
    let nv = vd.vertices.len();
    let mut node_clearance: Vec<f64> = vd.vertices.iter().map(|v| v.tangent.radius).collect();
    node_clearance.push(f64::INFINITY);
    let node = |e: EdgeEnd| match e {
        EdgeEnd::Vertex(v) => v,
        EdgeEnd::Infinite => nv,
    };
    let mut arcs = Vec::new();
    for (e, edge) in vd.edges.iter().enumerate() {
        let Some((a, b)) = edge.ends else { continue };
        arcs.push(ClearanceArc { edge: e, ends: [node(a), node(b)], min_clearance: vd.edge_min_clearance(e), inside: [false; 2] });
    }
    let mut g = ClearanceGraph { node_clearance, inside: vec![false; nv + 1], arcs, envelope_probe, adjacency: vec![Vec::new(); nv + 1] };
    let comp = g.components(envelope_probe);
    let ext = comp[nv];
    let open = |v: usize| comp[v] == ext && g.node_clearance[v] >= envelope_probe;

    let mut probes: Vec<Vec3> = (0..nv).filter(|&v| open(v)).map(|v| vd.vertices[v].tangent.center).collect();
    for a in &g.arcs {
        let tri = vd.trisector(a.edge);
        let [s0, s1] = vd.edges[a.edge].arc;
        let low = apex(&tri, s0, s1);
        if a.min_clearance >= envelope_probe {
            if comp[a.ends[0]] == ext {
                let (lo, hi) = (if s0.is_finite() { s0 } else { low - 8.0 }, if s1.is_finite() { s1 } else { low + 8.0 });
                probes.extend(tri.sample(lo, hi, 8).into_iter().map(|p| p.0));
            }
            continue;
        }
        for (end, s_end) in [(a.ends[0], s0), (a.ends[1], s1)] {
            if open(end) || end == nv {
                probes.push(tri.point(rise_to(&tri, low, s_end, envelope_probe)).0);
            }
        }
    }
    let cloud: Vec<crate::model::Ball> = probes.iter().enumerate().map(|(i, p)| crate::model::Ball { center: *p, radius: 0.0, id: i }).collect();
    let grid = (!cloud.is_empty()).then(|| crate::spatial::SpatialGrid::new(&cloud, envelope_probe.max(1e-6)));
    let mut hit = Vec::new();
    for v in 0..nv {
        let x = vd.vertices[v].tangent.center;
        let reached = open(v)
            || grid.as_ref().is_some_and(|grid| {
                grid.query(&x, envelope_probe, &mut hit);
                hit.iter().any(|&k| (probes[k] - x).norm() <= envelope_probe)
            });
        g.inside[v] = !reached;
    }
    for (k, a) in g.arcs.iter_mut().enumerate() {
        a.inside = [g.inside[a.ends[0]], g.inside[a.ends[1]]];
        g.adjacency[a.ends[0]].push(k);
        if a.ends[1] != a.ends[0] {
            g.adjacency[a.ends[1]].push(k);
        }
    }
    g
}

#[derive(PartialEq)]
struct Widest(f64, f64, usize);

impl Eq for Widest {}

impl PartialOrd for Widest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Widest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.total_cmp(&self.1)).then(other.2.cmp(&self.2))
    }
}

fn other_end(a: &ClearanceArc, n: usize) -> usize {
    if a.ends[0] == n { a.ends[1] } else { a.ends[0] }
}

/// Inside end and exit parameter of a gate arc: the walk stops at the
/// outside vertex or where the clearance reaches the envelope probe.
fn gate_span(vd: &VoronoiDiagram, arc: &ClearanceArc, envelope: f64) -> (f64, f64) {
    let tri = vd.trisector(arc.edge);
    let [s0, s1] = vd.edges[arc.edge].arc;
    let (s_in, s_out) = if arc.inside[0] { (s0, s1) } else { (s1, s0) };
    let low = apex(&tri, s0.min(s1), s0.max(s1));
    (s_in, rise_to(&tri, low, s_out, envelope))
}

fn segment(vd: &VoronoiDiagram, edge: EdgeId, from: f64, to: f64) -> (SpineSegment, f64) {
    let tri = vd.trisector(edge);
    let points = tri.sample(from, to, 16).into_iter().map(|p| p.0).collect();
    (SpineSegment { edge, from, to, points }, tri.arc_length(from.min(to), from.max(to)))
}

/// Channels admitting `probe` whose gates have clearance at least `gate_size`,
/// ordered by bottleneck radius and then by length.
pub fn compute_channels(vd: &VoronoiDiagram, graph: &ClearanceGraph, probe: f64, gate_size: f64) -> Vec<MolecularChannel> {
    let n = graph.node_clearance.len();
    let ext = graph.exterior();
    let mut parent: Vec<usize> = (0..n).collect();
    for a in &graph.arcs {
        if a.min_clearance >= probe && a.inside[0] && a.inside[1] {
            let (x, y) = (find(&mut parent, a.ends[0]), find(&mut parent, a.ends[1]));
            parent[x] = y;
        }
    }
    let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..ext {
        if graph.inside[v] && graph.node_clearance[v] >= probe {
            members.entry(find(&mut parent, v)).or_default().push(v);
        }
    }
    let gate_min = probe.max(gate_size);
    let mut out = Vec::new();
    for nodes in members.into_values() {
        let mut gates: Vec<usize> = nodes
            .iter()
            .flat_map(|&v| graph.adjacency[v].iter().copied())
            .filter(|&k| {
                let a = &graph.arcs[k];
                a.inside[0] != a.inside[1] && a.min_clearance >= gate_min
            })
            .collect();
        gates.sort_unstable();
        gates.dedup();
        if gates.len() < 2 {
            continue;
        }
        gates.sort_by(|&x, &y| graph.arcs[y].min_clearance.total_cmp(&graph.arcs[x].min_clearance).then(x.cmp(&y)));
        let inner = |k: usize| {
            let a = &graph.arcs[k];
            if a.inside[0] { a.ends[0] } else { a.ends[1] }
        };
        // gates through the same inside vertex open into the same mouth
        let g1 = gates[0];
        let Some(&g2) = gates.iter().find(|&&k| inner(k) != inner(g1)) else { continue };
        let (start, goal) = (inner(g1), inner(g2));

        // widest path between the gates' inside ends, shortest among ties
        let mut best: std::collections::HashMap<usize, (f64, f64, Option<usize>)> = Default::default();
        let mut heap = BinaryHeap::new();
        best.insert(start, (f64::INFINITY, 0.0, None));
        heap.push(Widest(f64::INFINITY, 0.0, start));
        while let Some(Widest(w, d, v)) = heap.pop() {
            if best.get(&v).is_some_and(|b| (b.0, -b.1) > (w, -d)) {
                continue;
            }
            if v == goal {
                break;
            }
            for &k in &graph.adjacency[v] {
                let a = &graph.arcs[k];
                if !(a.inside[0] && a.inside[1]) || a.min_clearance < probe {
                    continue;
                }
                let u = other_end(a, v);
                let nw = w.min(a.min_clearance);
                let [s0, s1] = vd.edges[a.edge].arc;
                let nd = d + vd.trisector(a.edge).arc_length(s0, s1);
                let better = match best.get(&u) {
                    None => true,
                    Some(&(bw, bd, _)) => nw > bw || (nw == bw && nd < bd),
                };
                if better {
                    best.insert(u, (nw, nd, Some(k)));
                    heap.push(Widest(nw, nd, u));
                }
            }
        }
        let mut path = Vec::new();
        let mut v = goal;
        while let Some(&(_, _, Some(k))) = best.get(&v) {
            path.push(k);
            v = other_end(&graph.arcs[k], v);
            if v == start {
                break;
            }
        }
        path.reverse();

        let mut spine = Vec::new();
        let mut length = 0.0;
        let mut bottleneck = graph.arcs[g1].min_clearance.min(graph.arcs[g2].min_clearance);
        let (s_in, s_cross) = gate_span(vd, &graph.arcs[g1], graph.envelope_probe);
        let (seg, l) = segment(vd, graph.arcs[g1].edge, s_cross, s_in);
        spine.push(seg);
        length += l;
        let mut at = start;
        for &k in &path {
            let a = &graph.arcs[k];
            let [s0, s1] = vd.edges[a.edge].arc;
            let (from, to) = if a.ends[0] == at { (s0, s1) } else { (s1, s0) };
            let (seg, l) = segment(vd, a.edge, from, to);
            spine.push(seg);
            length += l;
            bottleneck = bottleneck.min(a.min_clearance);
            at = other_end(a, at);
        }
        let (s_in, s_cross) = gate_span(vd, &graph.arcs[g2], graph.envelope_probe);
        let (seg, l) = segment(vd, graph.arcs[g2].edge, s_in, s_cross);
        spine.push(seg);
        length += l;

        let mut atoms: Vec<usize> = spine.iter().flat_map(|s| vd.edges[s.edge].equidistant_balls).collect();
        atoms.sort_unstable();
        atoms.dedup();
        out.push(MolecularChannel {
            spine,
            bottleneck_radius: bottleneck,
            length,
            gates: gates.iter().map(|&k| graph.arcs[k].edge).collect(),
            contributing_atoms: atoms,
            nodes,
        });
    }
    out.sort_by(|a, b| b.bottleneck_radius.total_cmp(&a.bottleneck_radius).then(b.length.total_cmp(&a.length)));
    out
}
