//! Edge tracing over the Voronoi edge graph.

use super::raw::{covers_zero, RawDiagram, RawEdge, RawEnd, RawVertex};
use crate::error::GeomError;
use crate::model::{Ball, Vec3};
use crate::predicates::{centers_collinear, collinear_circle_point, refine_four, wrap_angle, CurveHit, TangentSphere, Tolerances, Trisector};
use crate::spatial::SpatialGrid;
use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

/// Balls whose gap is at most twice this are sweep neighbours.
const SWEEP_RADIUS: f64 = 2.0;
/// Below this size every triple and pair is swept.
const FULL_SWEEP_MAX: usize = 40;
const PARAM_TOL: f64 = 1e-9;
const LENIENT_PARAM_TOL: f64 = 1e-14;
const SEED_EPS: f64 = 1e-12;

enum Next {
    Vertex { m: usize, hit: CurveHit, delta: f64 },
    Infinite,
    /// A closed curve that meets no fourth ball.
    Loop,
}

pub(super) struct Tracer<'a> {
    balls: &'a [Ball],
    tol: Tolerances,
    strict: bool,
    grid: SpatialGrid,
    r_max: f64,
    far: f64,
    center: Vec3,
    tris: HashMap<[usize; 3], Option<Trisector>>,
    vertices: Vec<RawVertex>,
    slots: Vec<[Option<usize>; 4]>,
    by_quad: HashMap<[usize; 4], Vec<usize>>,
    edges: Vec<RawEdge>,
    by_triple: HashMap<[usize; 3], Vec<usize>>,
    queue: Vec<(usize, usize)>,
    scratch: Vec<usize>,
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

fn sorted4(mut q: [usize; 4]) -> [usize; 4] {
    q.sort_unstable();
    q
}

fn degenerate(balls: &[usize], reason: impl Into<String>) -> GeomError {
    GeomError::DegenerateInput { balls: balls.to_vec(), reason: reason.into() }
}

impl<'a> Tracer<'a> {
    pub(super) fn new(balls: &'a [Ball], tol: Tolerances, strict: bool) -> Self {
        let r_max = balls.iter().map(|b| b.radius).fold(0.0, f64::max);
        let centers: Vec<Vec3> = balls.iter().map(|b| b.center).collect();
        let (lo, hi) = crate::spatial::bbox(&centers);
        let center = (lo + hi) / 2.0;
        let far = (hi - lo).norm() / 2.0 + r_max;
        Tracer {
            balls,
            tol,
            strict,
            grid: SpatialGrid::new(balls, 2.0 * r_max),
            r_max,
            far,
            center,
            tris: HashMap::new(),
            vertices: Vec::new(),
            slots: Vec::new(),
            by_quad: HashMap::new(),
            edges: Vec::new(),
            by_triple: HashMap::new(),
            queue: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub(super) fn run(mut self) -> Result<RawDiagram, GeomError> {
        let n = self.balls.len();
        if n >= 3 {
            let nearest = self.nearest_pairs();
            if let Some(t) = self.initial_triple(&nearest)? {
                self.seed(t)?;
                self.drain()?;
            }
            if n <= FULL_SWEEP_MAX {
                for t in self.full_sweep_triples()? {
                    self.seed(t)?;
                    self.drain()?;
                }
            } else {
                self.face_sweep(&nearest)?;
            }
        }
        let free_pairs = self.free_pairs();
        Ok(RawDiagram { vertices: self.vertices, edges: self.edges, free_pairs })
    }

    fn trisector(&mut self, t: [usize; 3]) -> Option<&Trisector> {
        let balls = self.balls;
        let tol = self.tol;
        self.tris
            .entry(t)
            .or_insert_with(|| Trisector::new([&balls[t[0]], &balls[t[1]], &balls[t[2]]], &tol).ok())
            .as_ref()
    }

    /// Whether the sphere (x, t) is free of all balls except `skip`.
    fn is_empty(&mut self, x: &Vec3, t: f64, skip: &[usize]) -> bool {
        self.is_empty_within(x, t, skip, self.tol.eps_geom)
    }

    /// Seeds must be empty up to rounding only; a looser test admits points
    /// already covered by a nearby fifth ball.
    fn is_seed_empty(&mut self, x: &Vec3, t: f64, skip: &[usize]) -> bool {
        self.is_empty_within(x, t, skip, SEED_EPS)
    }

    fn is_empty_within(&mut self, x: &Vec3, t: f64, skip: &[usize], eps: f64) -> bool {
        let mut hit = std::mem::take(&mut self.scratch);
        self.grid.query(x, t.max(0.0) + self.r_max + 1e-9, &mut hit);
        let eps = eps * (1.0 + t.abs());
        let ok = hit.iter().all(|&i| skip.contains(&i) || self.balls[i].power_distance(x) >= t - eps);
        self.scratch = hit;
        ok
    }

    /// Balls other than `skip` that are (nearly) tangent to the sphere.
    fn near_tangent(&mut self, x: &Vec3, t: f64, skip: &[usize]) -> Vec<usize> {
        let mut hit = std::mem::take(&mut self.scratch);
        self.grid.query(x, t.max(0.0) + self.r_max + 1e-6, &mut hit);
        let eps = 1e-8 * (1.0 + t.abs());
        let out = hit
            .iter()
            .copied()
            .filter(|i| !skip.contains(i) && (self.balls[*i].power_distance(x) - t).abs() < eps)
            .collect();
        self.scratch = hit;
        out
    }

    /// For each ball, the ball with the smallest gap; such a pair always shares a face.
    fn nearest_pairs(&mut self) -> Vec<(f64, [usize; 2])> {
        let n = self.balls.len();
        let mut out = Vec::new();
        let mut hit = Vec::new();
        for i in 0..n {
            let bi = self.balls[i];
            let mut reach = 2.0 * self.r_max + 1.0;
            let best = loop {
                self.grid.query(&bi.center, reach, &mut hit);
                let best = hit
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| ((self.balls[j].center - bi.center).norm() - bi.radius - self.balls[j].radius, j))
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                // any closer ball would have its center within gap + r_i + r_max
                match best {
                    Some((g, j)) if g + bi.radius + self.r_max <= reach => break Some((g, j)),
                    _ if reach > 2.0 * (self.far + (bi.center - self.center).norm()) => break best,
                    _ => reach *= 2.0,
                }
            };
            if let Some((g, j)) = best {
                out.push((g, [i.min(j), i.max(j)]));
            }
        }
        out.sort_by_key(|a| a.1);
        out.dedup_by(|a, b| a.1 == b.1);
        out
    }

    /// In strict mode, a collinear triple whose circular trisector is empty
    /// cannot be represented and is reported as degenerate.
    fn collinear_guard(&mut self, t: [usize; 3]) -> Result<(), GeomError> {
        if !self.strict {
            return Ok(());
        }
        let b = [&self.balls[t[0]], &self.balls[t[1]], &self.balls[t[2]]];
        if !centers_collinear(b, &self.tol) {
            return Ok(());
        }
        if let Some(s) = collinear_circle_point(b) {
            if self.is_empty(&s.center, s.radius, &t) {
                return Err(degenerate(&t, "collinear triple with an empty circular trisector"));
            }
        }
        Ok(())
    }

    /// Nearest pair plus the third ball giving the smallest empty minimum sphere.
    fn initial_triple(&mut self, nearest: &[(f64, [usize; 2])]) -> Result<Option<[usize; 3]>, GeomError> {
        let n = self.balls.len();
        let mut order: Vec<&(f64, [usize; 2])> = nearest.iter().collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, [i, j]) in order {
            let mut cands: Vec<(f64, [usize; 3])> = Vec::new();
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let t = sorted3([i, j, k]);
                match self.trisector(t) {
                    Some(tri) => cands.push((tri.point(0.0).1, t)),
                    None => self.collinear_guard(t)?,
                }
            }
            cands.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (_, t) in cands {
                let (x, r) = self.trisector(t).unwrap().point(0.0);
                if self.is_seed_empty(&x, r, &t) {
                    return Ok(Some(t));
                }
            }
        }
        Ok(None)
    }

    fn covered(&self, t: &[usize; 3]) -> bool {
        match self.by_triple.get(t) {
            Some(list) => list.iter().any(|&e| covers_zero(&self.edges[e], self.tris[t].as_ref().unwrap())),
            None => false,
        }
    }

    fn full_sweep_triples(&mut self) -> Result<Vec<[usize; 3]>, GeomError> {
        let n = self.balls.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let t = [i, j, k];
                    if self.covered(&t) {
                        continue;
                    }
                    let Some(tri) = self.trisector(t) else {
                        self.collinear_guard(t)?;
                        continue;
                    };
                    let (x, r) = tri.point(0.0);
                    if self.is_seed_empty(&x, r, &t) {
                        out.push(t);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Seeds uncovered empty minimum points of triples that share a pair with
    /// a face already found, until no new face appears.
    fn face_sweep(&mut self, nearest: &[(f64, [usize; 2])]) -> Result<(), GeomError> {
        let n = self.balls.len();
        let mut hit = Vec::new();
        let mut neigh: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let bi = self.balls[i];
            self.grid.query(&bi.center, 2.0 * self.r_max + 2.0 * SWEEP_RADIUS, &mut hit);
            neigh[i] = hit
                .iter()
                .copied()
                .filter(|&j| {
                    j != i && (self.balls[j].center - bi.center).norm() <= bi.radius + self.balls[j].radius + 2.0 * SWEEP_RADIUS
                })
                .collect();
            neigh[i].sort_unstable();
        }
        let mut pairs_seen = HashSet::new();
        let mut tried = HashSet::new();
        let mut work: Vec<[usize; 2]> = nearest.iter().map(|p| p.1).collect();
        let mut scanned = 0;
        loop {
            while scanned < self.edges.len() {
                let [a, b, c] = self.edges[scanned].triple;
                work.extend([[a, b], [a, c], [b, c]]);
                scanned += 1;
            }
            let Some([i, j]) = work.pop() else { break };
            if !pairs_seen.insert([i, j]) {
                continue;
            }
            let (ni, nj) = (&neigh[i], &neigh[j]);
            let (mut x, mut y) = (0, 0);
            let mut common = Vec::new();
            while x < ni.len() && y < nj.len() {
                match ni[x].cmp(&nj[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        common.push(ni[x]);
                        x += 1;
                        y += 1;
                    }
                }
            }
            for k in common {
                let t = sorted3([i, j, k]);
                if !tried.insert(t) || self.covered(&t) {
                    continue;
                }
                let Ok(tri) = Trisector::new([&self.balls[t[0]], &self.balls[t[1]], &self.balls[t[2]]], &self.tol) else {
                    self.collinear_guard(t)?;
                    continue;
                };
                let (x, r) = tri.point(0.0);
                if !self.is_seed_empty(&x, r, &t) {
                    continue;
                }
                self.seed(t)?;
                self.drain()?;
            }
        }
        Ok(())
    }

    fn free_pairs(&mut self) -> Vec<[usize; 2]> {
        let n = self.balls.len();
        let mut used = HashSet::new();
        for e in &self.edges {
            let [a, b, c] = e.triple;
            used.insert([a, b]);
            used.insert([a, c]);
            used.insert([b, c]);
        }
        let mut out = Vec::new();
        let mut hit = Vec::new();
        for i in 0..n {
            let cand: Vec<usize> = if n <= FULL_SWEEP_MAX {
                (i + 1..n).collect()
            } else {
                self.grid.query(&self.balls[i].center, 2.0 * self.r_max + 2.0 * SWEEP_RADIUS, &mut hit);
                let mut v: Vec<usize> = hit.iter().copied().filter(|&j| j > i).collect();
                v.sort_unstable();
                v
            };
            for j in cand {
                if used.contains(&[i, j]) {
                    continue;
                }
                let Ok(s) = crate::predicates::min_tangent_sphere_to_two_balls(&self.balls[i], &self.balls[j]) else {
                    continue;
                };
                if self.is_seed_empty(&s.center, s.radius, &[i, j]) {
                    out.push([i, j]);
                }
            }
        }
        out
    }

    fn drain(&mut self) -> Result<(), GeomError> {
        while let Some((v, k)) = self.queue.pop() {
            if self.slots[v][k].is_some() {
                continue;
            }
            self.trace_slot(v, k)?;
        }
        Ok(())
    }

    /// Bound on how far from `x0` a ball touching the arc can be centered.
    fn arc_reach(tri: &Trisector, x0: &Vec3, s0: f64, s1: f64, r_max: f64) -> f64 {
        let n = 48;
        let mut m: f64 = 0.0;
        let mut prev: Option<Vec3> = None;
        let mut step: f64 = 0.0;
        for (x, t) in tri.sample(s0, s1, n) {
            m = m.max((x - x0).norm() + t);
            if let Some(p) = prev {
                step = step.max((x - p).norm());
            }
            prev = Some(x);
        }
        m * 1.05 + step + r_max + 1e-6
    }

    /// Walks the curve of `t` from `s0` in direction `sigma` to the first new tangency.
    fn next_event(&mut self, t: [usize; 3], s0: f64, sigma: f64, exclude: Option<usize>) -> Result<Next, GeomError> {
        let tri = self.trisector(t).cloned().ok_or_else(|| degenerate(&t, "collinear triple"))?;
        let (x0, t0) = tri.point(s0);
        let all_reach = (x0 - self.center).norm() + self.far + 1.0;
        let mut reach = if tri.is_closed() {
            Self::arc_reach(&tri, &x0, 0.0, 2.0 * PI, self.r_max)
        } else {
            t0.max(0.0) + 2.0 * self.r_max + 1.0
        };
        let mut cand = Vec::new();
        loop {
            self.grid.query(&x0, reach, &mut cand);
            let mut best: Option<(f64, usize, CurveHit)> = None;
            let mut second: Option<f64> = None;
            for &m in &cand {
                if t.contains(&m) {
                    continue;
                }
                let hits = match tri.intersect(&self.balls[m], self.tol.eps_geom) {
                    Ok(h) => h,
                    Err(_) => return Err(degenerate(&[t[0], t[1], t[2], m], "ball equidistant along a trisector")),
                };
                let mut deltas: Vec<(f64, CurveHit)> = hits
                    .into_iter()
                    .map(|h| {
                        let d = if tri.is_closed() { wrap_angle(sigma * (h.s - s0)) } else { sigma * (h.s - s0) };
                        (d, h)
                    })
                    .collect();
                if exclude == Some(m) && !deltas.is_empty() {
                    let circ = |d: f64| if tri.is_closed() { d.min(2.0 * PI - d) } else { d.abs() };
                    let (idx, _) = deltas
                        .iter()
                        .enumerate()
                        .min_by(|a, b| circ(a.1 .0).total_cmp(&circ(b.1 .0)))
                        .unwrap();
                    deltas.remove(idx);
                }
                for (d, h) in deltas {
                    let dd = if tri.is_closed() && d > 2.0 * PI - PARAM_TOL { d - 2.0 * PI } else { d };
                    // after jitter, distinct events can lie closer than PARAM_TOL
                    let ptol = if self.strict { PARAM_TOL } else { LENIENT_PARAM_TOL };
                    if dd.abs() <= ptol * (1.0 + s0.abs()) {
                        if self.strict {
                            return Err(degenerate(&[t[0], t[1], t[2], m], "five balls share a tangent sphere"));
                        }
                        continue;
                    }
                    if dd < 0.0 {
                        continue;
                    }
                    match best {
                        Some((bd, _, _)) if d >= bd => {
                            second = Some(second.map_or(d, |s: f64| s.min(d)));
                        }
                        _ => {
                            if let Some((bd, _, _)) = best {
                                second = Some(second.map_or(bd, |s: f64| s.min(bd)));
                            }
                            best = Some((d, m, h));
                        }
                    }
                }
            }
            if let Some((d, m, h)) = best {
                if self.strict {
                    if let Some(s2) = second {
                        if (s2 - d).abs() <= 1e-9 * (1.0 + d.abs()) {
                            return Err(degenerate(&[t[0], t[1], t[2], m], "simultaneous tangencies"));
                        }
                    }
                }
                let need = Self::arc_reach(&tri, &x0, s0, s0 + sigma * d, self.r_max);
                if need <= reach || reach >= all_reach {
                    return Ok(Next::Vertex { m, hit: h, delta: d });
                }
                reach = need.min(all_reach);
                continue;
            }
            if reach >= all_reach {
                return Ok(if tri.is_closed() { Next::Loop } else { Next::Infinite });
            }
            reach = (reach * 2.0).min(all_reach);
        }
    }

    /// Registers (or finds) the vertex at a hit and returns its id.
    fn vertex_at(&mut self, t: [usize; 3], m: usize, hit: &CurveHit) -> Result<usize, GeomError> {
        let quad = sorted4([t[0], t[1], t[2], m]);
        let b = [&self.balls[quad[0]], &self.balls[quad[1]], &self.balls[quad[2]], &self.balls[quad[3]]];
        let s = refine_four(b, TangentSphere { center: hit.center, radius: hit.radius });
        let match_tol = 1e-9 * (1.0 + s.radius.abs());
        if let Some(list) = self.by_quad.get(&quad) {
            for &v in list {
                if (self.vertices[v].sphere.center - s.center).norm() <= match_tol {
                    return Ok(v);
                }
            }
        }
        if !self.is_empty(&s.center, s.radius, &quad) {
            return Err(degenerate(&quad, "traced vertex sphere is not empty"));
        }
        if self.strict {
            let extra = self.near_tangent(&s.center, s.radius, &quad);
            if !extra.is_empty() {
                let mut ids = quad.to_vec();
                ids.extend(extra);
                return Err(degenerate(&ids, "five or more balls share a tangent sphere"));
            }
        }
        let id = self.vertices.len();
        self.vertices.push(RawVertex { quad, sphere: s });
        self.slots.push([None; 4]);
        self.by_quad.entry(quad).or_default().push(id);
        for k in 0..4 {
            self.queue.push((id, k));
        }
        Ok(id)
    }

    fn slot_of(&self, v: usize, t: &[usize; 3]) -> usize {
        let q = self.vertices[v].quad;
        (0..4).find(|&k| !t.contains(&q[k])).unwrap()
    }

    fn attach(&mut self, v: usize, t: &[usize; 3], e: usize) -> Result<(), GeomError> {
        let k = self.slot_of(v, t);
        match self.slots[v][k] {
            None => {
                self.slots[v][k] = Some(e);
                Ok(())
            }
            Some(old) if old == e => Ok(()),
            Some(_) => Err(degenerate(&self.vertices[v].quad, "vertex reached twice along one trisector")),
        }
    }

    fn direction_away(&mut self, v: usize, t: [usize; 3], l: usize) -> Result<(f64, f64), GeomError> {
        let sph = self.vertices[v].sphere;
        let tri = self.trisector(t).ok_or_else(|| degenerate(&t, "collinear triple"))?;
        let s = tri.param_of(&sph.center, sph.radius);
        let tan = tri.tangent(s);
        let ga = (sph.center - self.balls[t[0]].center).normalize();
        let gl = (sph.center - self.balls[l].center).normalize();
        let rate = (gl - ga).dot(&tan);
        let floor = if self.strict { 1e-12 } else { 0.0 };
        if rate.abs() <= floor * tan.norm() {
            return Err(degenerate(&self.vertices[v].quad, "tangential vertex"));
        }
        Ok((s, rate.signum()))
    }

    fn trace_slot(&mut self, v: usize, k: usize) -> Result<(), GeomError> {
        let q = self.vertices[v].quad;
        let l = q[k];
        let t = sorted3([q[(k + 1) % 4], q[(k + 2) % 4], q[(k + 3) % 4]]);
        let (s, sigma) = self.direction_away(v, t, l)?;
        let next = self.next_event(t, s, sigma, Some(l))?;
        let closed = self.tris[&t].as_ref().unwrap().is_closed();
        let (end, s_end) = match next {
            Next::Vertex { m, hit, delta } => {
                let w = self.vertex_at(t, m, &hit)?;
                (RawEnd::Vertex(w), s + sigma * delta)
            }
            Next::Infinite => (RawEnd::Infinite, sigma * f64::INFINITY),
            Next::Loop => return Err(degenerate(&q, "closed trisector without a return tangency")),
        };
        let (start, s0, stop, s1) = if sigma > 0.0 { (RawEnd::Vertex(v), s, end, s_end) } else { (end, s_end, RawEnd::Vertex(v), s) };
        let (s0, s1) = if closed {
            let a = wrap_angle(s0);
            (a, a + (s1 - s0).abs())
        } else {
            (s0, s1)
        };
        self.push_edge(t, Some((start, stop)), s0, s1)
    }

    fn push_edge(&mut self, t: [usize; 3], ends: Option<(RawEnd, RawEnd)>, s0: f64, s1: f64) -> Result<(), GeomError> {
        let e = self.edges.len();
        self.edges.push(RawEdge { triple: t, ends, s0, s1 });
        self.by_triple.entry(t).or_default().push(e);
        if let Some((a, b)) = ends {
            for end in [a, b] {
                if let RawEnd::Vertex(v) = end {
                    self.attach(v, &t, e)?;
                }
            }
        }
        Ok(())
    }

    /// Traces the edge through the minimum point of `t`.
    fn seed(&mut self, t: [usize; 3]) -> Result<(), GeomError> {
        if let Some(list) = self.by_triple.get(&t) {
            let tri = self.tris[&t].as_ref().unwrap();
            if list.iter().any(|&e| covers_zero(&self.edges[e], tri)) {
                return Ok(());
            }
        }
        let fwd = self.next_event(t, 0.0, 1.0, None)?;
        let bwd = self.next_event(t, 0.0, -1.0, None)?;
        let closed = self.tris[&t].as_ref().unwrap().is_closed();
        let resolve = |this: &mut Self, ev: Next, sign: f64| -> Result<(Option<RawEnd>, f64), GeomError> {
            Ok(match ev {
                Next::Vertex { m, hit, delta } => (Some(RawEnd::Vertex(this.vertex_at(t, m, &hit)?)), sign * delta),
                Next::Infinite => (Some(RawEnd::Infinite), sign * f64::INFINITY),
                Next::Loop => (None, 0.0),
            })
        };
        let (e1, s1) = resolve(self, fwd, 1.0)?;
        let (e0, s0) = resolve(self, bwd, -1.0)?;
        match (e0, e1) {
            (Some(a), Some(b)) => {
                let (s0, s1) = if closed { (wrap_angle(s0), wrap_angle(s0) + (s1 - s0)) } else { (s0, s1) };
                self.push_edge(t, Some((a, b)), s0, s1)
            }
            (None, None) => self.push_edge(t, None, 0.0, 2.0 * PI),
            _ => Err(degenerate(&t, "inconsistent closed trisector")),
        }
    }
}
