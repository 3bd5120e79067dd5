//! Quasi-triangulation: the dual of the Voronoi diagram of balls, split into
//! worlds, with beta-interval annotation and an on-disk cache.
//!
//! Ids are shared with the primal diagram: QT vertex i is VD cell i, QT edge
//! i is VD face i, QT face i is VD edge i and QT cell i is VD vertex i.

mod cache;

pub use cache::{cache_path, load_qt, save_qt, MAGIC};

use crate::awvd::{EdgeEnd, VoronoiDiagram};
use crate::error::GeomError;
use crate::predicates::{min_tangent_sphere_to_two_balls, TangentSphere};
use crate::spatial::SpatialGrid;

pub type QtVertexId = usize;
pub type QtEdgeId = usize;
pub type QtFaceId = usize;
pub type QtCellId = usize;
pub type WorldId = usize;

/// Membership thresholds in the probe radius beta.
///
/// A simplex is absent below `l1`, singular on `[l1, l2)`, regular on
/// `[l2, l3)` and interior from `l3` on. `lower` equals `l1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaInterval {
    pub lower: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimplexState {
    Singular,
    Regular,
    Interior,
}

impl BetaInterval {
    /// Never a member; the value before annotation.
    pub const UNSET: BetaInterval =
        BetaInterval { lower: f64::INFINITY, l1: f64::INFINITY, l2: f64::INFINITY, l3: f64::INFINITY };

    pub fn new(l1: f64, l2: f64, l3: f64) -> Self {
        let l2 = l2.max(l1);
        let l3 = l3.max(l2);
        BetaInterval { lower: l1, l1, l2, l3 }
    }

    pub fn state(&self, beta: f64) -> Option<SimplexState> {
        if beta < self.l1 {
            None
        } else if beta < self.l2 {
            Some(SimplexState::Singular)
        } else if beta < self.l3 {
            Some(SimplexState::Regular)
        } else {
            Some(SimplexState::Interior)
        }
    }

    pub fn contains(&self, beta: f64) -> bool {
        beta >= self.l1
    }
}

#[derive(Debug, Clone)]
pub struct QTVertex {
    pub ball_id: usize,
    pub edge: Option<QtEdgeId>,
    pub cell: Option<QtCellId>,
    pub beta: BetaInterval,
}

#[derive(Debug, Clone)]
pub struct QTEdge {
    pub vertices: [QtVertexId; 2],
    /// The edge's own world first, then each small world entered through it.
    pub world_links: Vec<WorldId>,
    pub beta: BetaInterval,
}

#[derive(Debug, Clone)]
pub struct QTFace {
    pub edges: [QtEdgeId; 3],
    /// Cells on either side; `None` where the dual edge runs to infinity or closes on itself.
    pub cells: [Option<QtCellId>; 2],
    pub beta: BetaInterval,
}

#[derive(Debug, Clone)]
pub struct QTCell {
    /// Face k is opposite vertex k.
    pub faces: [QtFaceId; 4],
    pub vertices: [QtVertexId; 4],
    pub dual_vd_vertex: usize,
    pub tangent: TangentSphere,
    pub beta: BetaInterval,
}

/// A connected component of the dual edge graph.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub faces: Vec<QtFaceId>,
    pub cells: Vec<QtCellId>,
    /// QT edges whose dual faces hold an inner loop belonging to this world.
    pub entrances: Vec<QtEdgeId>,
    pub is_root: bool,
}

#[derive(Debug, Clone)]
pub struct QuasiTriangulation {
    pub vertices: Vec<QTVertex>,
    pub edges: Vec<QTEdge>,
    pub faces: Vec<QTFace>,
    pub cells: Vec<QTCell>,
    pub worlds: Vec<World>,
    pub root_world: WorldId,
    pub source_vd_hash: u64,
    pub annotated: bool,
    /// The primal diagram.
    pub vd: VoronoiDiagram,
}

impl QuasiTriangulation {
    /// (vertices, edges, faces, cells)
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (self.vertices.len(), self.edges.len(), self.faces.len(), self.cells.len())
    }

    /// QT vertex of a ball id, if the ball is not redundant.
    pub fn vertex_of_ball(&self, ball: usize) -> Option<QtVertexId> {
        self.vd.cell_of_ball.get(ball).copied().flatten()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<QtEdgeId> {
        self.vd.face_of_pair(a, b)
    }

    pub fn balls(&self) -> &[crate::model::Ball] {
        &self.vd.balls
    }
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

/// Builds the dual of a valid diagram.
pub fn dual_transform(vd: VoronoiDiagram) -> Result<QuasiTriangulation, GeomError> {
    let topo = |m: String| GeomError::InvalidTopology(m);
    let nv = vd.vertices.len();
    let ne = vd.edges.len();

    // worlds: components over VD vertices, edges and the point at infinity
    let inf = nv + ne;
    let mut parent: Vec<usize> = (0..=inf).collect();
    for (e, edge) in vd.edges.iter().enumerate() {
        if let Some((a, b)) = edge.ends {
            for end in [a, b] {
                let other = match end {
                    EdgeEnd::Vertex(v) => v,
                    EdgeEnd::Infinite => inf,
                };
                let (x, y) = (find(&mut parent, nv + e), find(&mut parent, other));
                parent[x] = y;
            }
        }
    }
    let mut world_of_root = std::collections::HashMap::new();
    let mut worlds: Vec<World> = Vec::new();
    let mut face_world = vec![0; ne];
    let mut world_id = |root: usize, worlds: &mut Vec<World>| {
        *world_of_root.entry(root).or_insert_with(|| {
            worlds.push(World { faces: vec![], cells: vec![], entrances: vec![], is_root: false });
            worlds.len() - 1
        })
    };
    let inf_root = find(&mut parent, inf);
    for e in 0..ne {
        let r = find(&mut parent, nv + e);
        let w = world_id(r, &mut worlds);
        worlds[w].faces.push(e);
        face_world[e] = w;
    }
    for v in 0..nv {
        let r = find(&mut parent, v);
        let w = world_id(r, &mut worlds);
        worlds[w].cells.push(v);
    }
    let root_world = match world_of_root.get(&inf_root) {
        Some(&w) => w,
        None if worlds.is_empty() => {
            worlds.push(World { faces: vec![], cells: vec![], entrances: vec![], is_root: false });
            0
        }
        None => (0..worlds.len()).max_by_key(|&w| (worlds[w].faces.len() + worlds[w].cells.len(), usize::MAX - w)).unwrap(),
    };
    worlds[root_world].is_root = true;

    let mut vertices: Vec<QTVertex> = vd
        .cells
        .iter()
        .map(|c| QTVertex { ball_id: c.generator, edge: c.faces.first().copied(), cell: None, beta: BetaInterval::UNSET })
        .collect();

    let mut edges = Vec::with_capacity(vd.faces.len());
    for (f, face) in vd.faces.iter().enumerate() {
        let mut links = Vec::new();
        let loop_world = |l: usize| vd.loop_partials(l).first().map(|&p| face_world[vd.partial_edges[p].parent_edge]);
        let outer = face.loops.iter().find(|&&l| vd.loops[l].is_outer).ok_or_else(|| topo(format!("face {:?} has no outer loop", face.defining_pair)))?;
        links.push(loop_world(*outer).unwrap_or(root_world));
        for &l in &face.loops {
            if vd.loops[l].is_outer {
                continue;
            }
            if let Some(w) = loop_world(l) {
                if !links.contains(&w) {
                    links.push(w);
                    worlds[w].entrances.push(f);
                }
            }
        }
        edges.push(QTEdge { vertices: [face.left_cell, face.right_cell], world_links: links, beta: BetaInterval::UNSET });
    }

    let mut faces = Vec::with_capacity(ne);
    for (e, edge) in vd.edges.iter().enumerate() {
        let pes = vd.radial_cycle(e);
        let fs = pes.map(|p| vd.partial_edges[p].face);
        if fs[0] == fs[1] || fs[1] == fs[2] || fs[0] == fs[2] {
            return Err(topo(format!("edge {:?} repeats a face", edge.equidistant_balls)));
        }
        let cell = |x: EdgeEnd| match x {
            EdgeEnd::Vertex(v) => Some(v),
            EdgeEnd::Infinite => None,
        };
        let cells = match edge.ends {
            Some((a, b)) => [cell(a), cell(b)],
            None => [None, None],
        };
        faces.push(QTFace { edges: fs, cells, beta: BetaInterval::UNSET });
    }

    let mut cells = Vec::with_capacity(nv);
    for (v, vx) in vd.vertices.iter().enumerate() {
        let mut vs = [0; 4];
        for k in 0..4 {
            vs[k] = vd.cell_of_ball[vx.balls[k]].ok_or_else(|| topo(format!("vertex {:?} uses a redundant ball", vx.balls)))?;
            vertices[vs[k]].cell.get_or_insert(v);
        }
        cells.push(QTCell { faces: vx.incident_edges, vertices: vs, dual_vd_vertex: v, tangent: vx.tangent, beta: BetaInterval::UNSET });
    }

    for w in &mut worlds {
        w.entrances.sort_unstable();
    }
    let source_vd_hash = vd.structure_hash();
    Ok(QuasiTriangulation { vertices, edges, faces, cells, worlds, root_world, source_vd_hash, annotated: false, vd })
}

/// Fills the beta intervals of every simplex, top-down from cells.
pub fn annotate_beta_intervals(mut qt: QuasiTriangulation) -> QuasiTriangulation {
    let vd = &qt.vd;
    for c in &mut qt.cells {
        let r = c.tangent.radius;
        c.beta = BetaInterval::new(r, r, r);
    }

    for (e, f) in qt.faces.iter_mut().enumerate() {
        let edge = &vd.edges[e];
        let tri = vd.trisector(e);
        let rho = tri.point(0.0).1;
        let unattached = edge.ends.is_none() || crate::awvd::arc_covers(tri.is_closed(), edge.arc, 0.0);
        let entries: Vec<f64> = f.cells.iter().flatten().map(|&c| qt.cells[c].beta.l1).collect();
        let lo = entries.iter().copied().fold(f64::INFINITY, f64::min);
        let bounded = f.cells.iter().all(|c| c.is_some());
        let hi = if bounded { entries.iter().copied().fold(f64::NEG_INFINITY, f64::max) } else { f64::INFINITY };
        let l1 = if unattached { rho.min(lo) } else { lo };
        f.beta = BetaInterval::new(l1, lo, hi);
    }

    let r_max = vd.balls.iter().map(|b| b.radius).fold(0.0, f64::max);
    let active: Vec<_> = vd.cells.iter().map(|c| vd.balls[c.generator]).collect();
    let grid = SpatialGrid::new(&active, 2.0 * r_max.max(1e-9));
    let mut hit = Vec::new();
    for (f, q) in qt.edges.iter_mut().enumerate() {
        let [a, b] = vd.faces[f].defining_pair;
        let s = min_tangent_sphere_to_two_balls(&vd.balls[a], &vd.balls[b]).expect("distinct generators");
        grid.query(&s.center, s.radius.max(0.0) + r_max + 1e-9, &mut hit);
        let eps = 1e-12 * (1.0 + s.radius.abs());
        let unattached = hit.iter().all(|&i| {
            let g = active[i].id;
            g == a || g == b || active[i].power_distance(&s.center) >= s.radius - eps
        });
        let cof = vd.face_edges(f);
        let lo = cof.iter().map(|&e| qt.faces[e].beta.l1).fold(f64::INFINITY, f64::min);
        let hi = if vd.face_is_unbounded(f) {
            f64::INFINITY
        } else {
            cof.iter().map(|&e| qt.faces[e].beta.l1).fold(f64::NEG_INFINITY, f64::max)
        };
        let l1 = if unattached { s.radius.min(lo) } else { lo };
        q.beta = BetaInterval::new(l1, lo, hi);
    }

    for (c, v) in qt.vertices.iter_mut().enumerate() {
        let fs = &vd.cells[c].faces;
        let lo = fs.iter().map(|&f| qt.edges[f].beta.l1).fold(f64::INFINITY, f64::min);
        let hi = if fs.iter().any(|&f| vd.face_is_unbounded(f)) || fs.is_empty() {
            f64::INFINITY
        } else {
            fs.iter().map(|&f| qt.edges[f].beta.l1).fold(f64::NEG_INFINITY, f64::max)
        };
        v.beta = BetaInterval::new(f64::NEG_INFINITY, lo, hi);
    }
    qt.annotated = true;
    qt
}

/// Diagram, dual and annotation in one call.
pub fn build_quasi_triangulation(balls: &[crate::model::Ball], tol: &crate::predicates::Tolerances) -> Result<QuasiTriangulation, GeomError> {
    let vd = crate::awvd::construct_awvd(balls, tol)?;
    Ok(annotate_beta_intervals(dual_transform(vd)?))
}

#[cfg(test)]
mod tests;
