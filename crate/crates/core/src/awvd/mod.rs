//! Voronoi diagram of balls under the additive distance |p - c| - r,
//! stored in a radial-edge structure.
//!
//! The main constructor traces edges from an initial vertex; the exhaustive
//! constructor enumerates every 4-subset and serves as the reference on
//! small inputs.

mod assemble;
mod brute;
pub(crate) mod raw;
mod trace;
mod validate;

pub use validate::{validate_reds, Violation};

use crate::error::GeomError;
use crate::model::{hash_balls, mark_redundant, Ball, Vec3};
use crate::predicates::{TangentSphere, Tolerances, Trisector};

pub type CellId = usize;
pub type FaceId = usize;
pub type LoopId = usize;
pub type PartialEdgeId = usize;
pub type EdgeId = usize;
pub type VertexId = usize;

pub const BRUTEFORCE_MAX_BALLS: usize = 16;

/// Edge endpoint; `Infinite` is the sentinel vertex at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeEnd {
    Vertex(VertexId),
    Infinite,
}

#[derive(Debug, Clone)]
pub struct VDVertex {
    pub tangent: TangentSphere,
    /// Generator ids, ascending.
    pub balls: [usize; 4],
    /// Slot k holds the edge whose triple omits `balls[k]`.
    pub incident_edges: [EdgeId; 4],
}

#[derive(Debug, Clone)]
pub struct VDEdge {
    /// `None` for a closed curve without vertices.
    pub ends: Option<(EdgeEnd, EdgeEnd)>,
    pub partial_edge: PartialEdgeId,
    pub equidistant_balls: [usize; 3],
    /// Curve parameters of start and end (see `Trisector`).
    pub arc: [f64; 2],
}

impl VDEdge {
    pub fn start_vertex(&self) -> Option<EdgeEnd> {
        self.ends.map(|e| e.0)
    }

    pub fn end_vertex(&self) -> Option<EdgeEnd> {
        self.ends.map(|e| e.1)
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self.ends, Some((EdgeEnd::Infinite, _)) | Some((_, EdgeEnd::Infinite)))
    }
}

#[derive(Debug, Clone)]
pub struct PartialEdge {
    pub parent_edge: EdgeId,
    pub face: FaceId,
    pub owning_loop: LoopId,
    pub next_in_loop: PartialEdgeId,
    pub prev_in_loop: PartialEdgeId,
    pub radial_next: PartialEdgeId,
    /// Whether the loop walks the edge from start to end.
    pub forward: bool,
}

#[derive(Debug, Clone)]
pub struct Loop {
    pub owning_face: FaceId,
    /// `None` for a loop without edges (a sheet with no boundary curve).
    pub partial_edge: Option<PartialEdgeId>,
    pub is_outer: bool,
}

#[derive(Debug, Clone)]
pub struct VDFace {
    pub left_cell: CellId,
    pub right_cell: CellId,
    pub loops: Vec<LoopId>,
    pub defining_pair: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct VDCell {
    pub generator: usize,
    pub faces: Vec<FaceId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub key: u64,
    pub magnitude: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct VoronoiDiagram {
    pub cells: Vec<VDCell>,
    pub faces: Vec<VDFace>,
    pub loops: Vec<Loop>,
    pub partial_edges: Vec<PartialEdge>,
    pub edges: Vec<VDEdge>,
    pub vertices: Vec<VDVertex>,
    pub infinite_vertex: EdgeEnd,
    /// Geometry the diagram was built on, indexed by ball id (jittered if perturbed).
    pub balls: Vec<Ball>,
    pub input_balls: Vec<Ball>,
    pub redundant: Vec<bool>,
    pub cell_of_ball: Vec<Option<CellId>>,
    pub perturbation: Option<Perturbation>,
    pub tol: Tolerances,
}

impl VoronoiDiagram {
    pub fn trisector(&self, e: EdgeId) -> Trisector {
        let [a, b, c] = self.edges[e].equidistant_balls;
        Trisector::new([&self.balls[a], &self.balls[b], &self.balls[c]], &self.tol)
            .expect("edge triple has a trisector")
    }

    pub fn face_of_pair(&self, a: usize, b: usize) -> Option<FaceId> {
        let pair = if a < b { [a, b] } else { [b, a] };
        let cell = self.cell_of_ball.get(pair[0]).copied().flatten()?;
        self.cells[cell].faces.iter().copied().find(|&f| self.faces[f].defining_pair == pair)
    }

    /// The three partial edges of an edge in radial order.
    pub fn radial_cycle(&self, e: EdgeId) -> [PartialEdgeId; 3] {
        let p0 = self.edges[e].partial_edge;
        let p1 = self.partial_edges[p0].radial_next;
        [p0, p1, self.partial_edges[p1].radial_next]
    }

    /// Partial edges of a loop in walking order.
    pub fn loop_partials(&self, l: LoopId) -> Vec<PartialEdgeId> {
        let mut out = Vec::new();
        if let Some(p0) = self.loops[l].partial_edge {
            let mut p = p0;
            loop {
                out.push(p);
                p = self.partial_edges[p].next_in_loop;
                if p == p0 || out.len() > self.partial_edges.len() {
                    break;
                }
            }
        }
        out
    }

    /// Minimum tangent radius along an edge.
    pub fn edge_min_clearance(&self, e: EdgeId) -> f64 {
        let [s0, s1] = self.edges[e].arc;
        self.trisector(e).min_radius_on(s0, s1)
    }

    /// Edges on any loop of a face.
    pub fn face_edges(&self, f: FaceId) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.faces[f]
            .loops
            .iter()
            .flat_map(|&l| self.loop_partials(l))
            .map(|p| self.partial_edges[p].parent_edge)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether a face reaches infinity (an edge-free outer loop or an unbounded edge).
    pub fn face_is_unbounded(&self, f: FaceId) -> bool {
        self.faces[f].loops.iter().any(|&l| self.loops[l].is_outer && self.loops[l].partial_edge.is_none())
            || self.face_edges(f).iter().any(|&e| self.edges[e].is_unbounded())
    }

    /// FNV-1a hash of the combinatorial structure.
    pub fn structure_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        let end = |e: EdgeEnd| match e {
            EdgeEnd::Vertex(v) => v as u64,
            EdgeEnd::Infinite => u64::MAX,
        };
        for v in &self.vertices {
            v.balls.iter().for_each(|&b| eat(b as u64));
        }
        for e in &self.edges {
            e.equidistant_balls.iter().for_each(|&b| eat(b as u64));
            match e.ends {
                Some((a, b)) => {
                    eat(end(a));
                    eat(end(b));
                }
                None => eat(u64::MAX - 1),
            }
        }
        for f in &self.faces {
            eat(f.defining_pair[0] as u64);
            eat(f.defining_pair[1] as u64);
        }
        h
    }

    /// (cells, faces, edges, vertices)
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (self.cells.len(), self.faces.len(), self.edges.len(), self.vertices.len())
    }
}

#[derive(Clone, Copy)]
enum Method {
    Trace,
    Brute,
}

/// Whether parameter `s` lies on an edge arc.
pub fn arc_covers(closed: bool, arc: [f64; 2], s: f64) -> bool {
    raw::arc_contains(arc[0], arc[1], closed, s)
}

pub fn construct_awvd(balls: &[Ball], tol: &Tolerances) -> Result<VoronoiDiagram, GeomError> {
    build(balls, tol, Method::Trace)
}

pub fn construct_awvd_bruteforce(balls: &[Ball], tol: &Tolerances) -> Result<VoronoiDiagram, GeomError> {
    if balls.len() > BRUTEFORCE_MAX_BALLS {
        return Err(GeomError::Precondition(format!(
            "exhaustive construction takes at most {BRUTEFORCE_MAX_BALLS} balls, got {}",
            balls.len()
        )));
    }
    build(balls, tol, Method::Brute)
}

/// Deterministic offsets of magnitude `mag`, keyed by (arrangement hash, ball id).
pub fn jitter_balls(balls: &[Ball], key: u64, mag: f64) -> Vec<Ball> {
    balls
        .iter()
        .map(|b| {
            let mut s = key ^ (b.id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let dir = loop {
                let v = Vec3::new(unit(&mut s), unit(&mut s), unit(&mut s));
                let n = v.norm();
                if n > 0.1 && n <= 1.0 {
                    break v / n;
                }
            };
            Ball { center: b.center + dir * mag, ..*b }
        })
        .collect()
}

fn splitmix(s: &mut u64) -> u64 {
    *s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *s;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit(s: &mut u64) -> f64 {
    (splitmix(s) >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

const LENIENT_EPS_DET: f64 = 1e-24;

fn build(balls: &[Ball], tol: &Tolerances, method: Method) -> Result<VoronoiDiagram, GeomError> {
    if let Some(b) = balls.iter().find(|b| !b.is_valid()) {
        return Err(GeomError::Precondition(format!("ball {} has invalid geometry", b.id)));
    }
    let input: Vec<Ball> = balls.iter().enumerate().map(|(i, b)| Ball { id: i, ..*b }).collect();
    let (redundant, _) = mark_redundant(&input);
    if redundant.iter().all(|r| *r) {
        return Err(GeomError::Precondition("no non-redundant ball".into()));
    }
    let first = attempt(&input, &input, &redundant, tol, method, None);
    let err = match first {
        Ok(vd) => return Ok(vd),
        Err(e) => e,
    };
    let key = hash_balls(&input);
    let jittered = jitter_balls(&input, key, tol.jitter_magnitude);
    let pert = Perturbation { key, magnitude: tol.jitter_magnitude, reason: err.to_string() };
    // jitter lifts exact collinearity only to about the jitter magnitude
    let lenient = Tolerances { eps_det: tol.eps_det.min(LENIENT_EPS_DET), ..*tol };
    attempt(&input, &jittered, &redundant, &lenient, method, Some(pert)).map_err(|e| match e {
        GeomError::DegenerateInput { .. } => e,
        other => GeomError::DegenerateInput { balls: vec![], reason: other.to_string() },
    })
}

fn attempt(
    input: &[Ball],
    geometry: &[Ball],
    redundant: &[bool],
    tol: &Tolerances,
    method: Method,
    pert: Option<Perturbation>,
) -> Result<VoronoiDiagram, GeomError> {
    let strict = pert.is_none();
    let work = working_balls(geometry, redundant);
    let raw = match method {
        Method::Trace => trace::Tracer::new(&work, *tol, strict).run()?,
        Method::Brute => brute::brute(&work, tol, strict)?,
    };
    finish(input, geometry, redundant, tol, pert, &work, raw)
}

/// Working balls: the non-redundant ones, in id order.
pub(crate) fn working_balls(geometry: &[Ball], redundant: &[bool]) -> Vec<Ball> {
    geometry.iter().zip(redundant).filter(|(_, r)| !**r).map(|(b, _)| *b).collect()
}

/// Canonicalizes, assembles and validates a raw diagram over `work`.
pub(crate) fn finish(
    input: &[Ball],
    geometry: &[Ball],
    redundant: &[bool],
    tol: &Tolerances,
    pert: Option<Perturbation>,
    work: &[Ball],
    raw: raw::RawDiagram,
) -> Result<VoronoiDiagram, GeomError> {
    let raw = raw::canonicalize(raw, work, tol)?;
    let vd = assemble::assemble(geometry.to_vec(), input.to_vec(), redundant.to_vec(), work, raw, *tol, pert)?;
    let report = validate_reds(&vd);
    if let Some(v) = report.first() {
        return Err(GeomError::DegenerateInput { balls: v.balls.clone(), reason: v.to_string() });
    }
    Ok(vd)
}

/// Canonical, order-independent description of a diagram's combinatorics.
#[derive(Debug, Clone)]
pub struct DiagramSignature {
    /// (generators, tangent center, tangent radius), sorted.
    pub vertices: Vec<([usize; 4], Vec3, f64)>,
    /// (triple, endpoint keys as indices into `vertices`, `usize::MAX` for infinity).
    pub edges: Vec<([usize; 3], Option<[usize; 2]>)>,
    pub faces: Vec<[usize; 2]>,
    pub cells: Vec<usize>,
}

pub fn signature(vd: &VoronoiDiagram) -> DiagramSignature {
    let mut order: Vec<usize> = (0..vd.vertices.len()).collect();
    let key = |v: usize| {
        let t = &vd.vertices[v].tangent;
        (vd.vertices[v].balls, [t.center.x, t.center.y, t.center.z])
    };
    order.sort_by(|&a, &b| {
        let (qa, ca) = key(a);
        let (qb, cb) = key(b);
        qa.cmp(&qb).then(ca.partial_cmp(&cb).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut rank = vec![0; vd.vertices.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let vertices = order.iter().map(|&v| (vd.vertices[v].balls, vd.vertices[v].tangent.center, vd.vertices[v].tangent.radius)).collect();
    let end_key = |e: EdgeEnd| match e {
        EdgeEnd::Vertex(v) => rank[v],
        EdgeEnd::Infinite => usize::MAX,
    };
    let mut edges: Vec<([usize; 3], Option<[usize; 2]>)> = vd
        .edges
        .iter()
        .map(|e| {
            let ends = e.ends.map(|(a, b)| {
                let mut k = [end_key(a), end_key(b)];
                k.sort_unstable();
                k
            });
            (e.equidistant_balls, ends)
        })
        .collect();
    edges.sort();
    let mut faces: Vec<[usize; 2]> = vd.faces.iter().map(|f| f.defining_pair).collect();
    faces.sort();
    let mut cells: Vec<usize> = vd.cells.iter().map(|c| c.generator).collect();
    cells.sort();
    DiagramSignature { vertices, edges, faces, cells }
}

/// Compares two diagrams; vertex centers must agree within `center_tol`.
pub fn compare_diagrams(a: &VoronoiDiagram, b: &VoronoiDiagram, center_tol: f64) -> Result<(), String> {
    let sa = signature(a);
    let sb = signature(b);
    if sa.vertices.len() != sb.vertices.len() {
        return Err(format!("vertex count {} vs {}", sa.vertices.len(), sb.vertices.len()));
    }
    for (va, vb) in sa.vertices.iter().zip(&sb.vertices) {
        if va.0 != vb.0 || (va.1 - vb.1).norm() > center_tol {
            return Err(format!("vertex {:?} at {:?} vs {:?} at {:?}", va.0, va.1, vb.0, vb.1));
        }
    }
    if sa.edges != sb.edges {
        let first = sa.edges.iter().zip(&sb.edges).find(|(x, y)| x != y);
        return Err(format!("edge sets differ ({} vs {}); first difference {:?}", sa.edges.len(), sb.edges.len(), first));
    }
    if sa.faces != sb.faces {
        return Err(format!("face sets differ ({} vs {})", sa.faces.len(), sb.faces.len()));
    }
    if sa.cells != sb.cells {
        return Err("cell sets differ".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests;
