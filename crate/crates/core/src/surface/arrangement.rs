//! Exposed region of one sphere under the caps cut by its overlapping
//! neighbours, computed on the unit sphere and scaled back.

use super::{BoundaryArc, Circle};
use crate::error::GeomError;
use crate::model::{Ball, Vec3};
use crate::predicates::perpendicular_basis;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Plane-distance band treated as "on the circle" in strict mode (unit sphere).
const DEGENERATE_BAND: f64 = 1e-9;

/// A neighbour's cap {x : n.x > h} on the unit sphere. Its circle is walked
/// counterclockwise about `m = -n`, which keeps the exposed side on the left.
struct Cap {
    nb: usize,
    n: Vec3,
    h: f64,
    rho: f64,
    u: Vec3,
    w: Vec3,
}

impl Cap {
    fn point(&self, phi: f64) -> Vec3 {
        self.n * self.h + (self.u * phi.cos() + self.w * phi.sin()) * self.rho
    }

    fn tangent(&self, phi: f64) -> Vec3 {
        self.w * phi.cos() - self.u * phi.sin()
    }

    fn phi(&self, x: &Vec3) -> f64 {
        x.dot(&self.w).atan2(x.dot(&self.u))
    }

    fn covers(&self, x: &Vec3) -> bool {
        self.n.dot(x) > self.h
    }
}

struct Vertex {
    x: Vec3,
    circles: [usize; 2],
}

#[derive(Clone)]
struct Arc {
    cap: usize,
    phi0: f64,
    phi1: f64,
    start: Option<usize>,
    end: Option<usize>,
}

pub(super) struct LocalPatch {
    pub arcs: Vec<BoundaryArc>,
    pub area: f64,
    pub vector_area: Vec3,
}

fn degenerate(ball: usize, reason: &str) -> GeomError {
    GeomError::DegenerateTangency { ball, reason: reason.into() }
}

/// Patches of ball `i`; `nbrs` lists every other non-redundant ball.
/// Strict mode reports near-coincidences instead of resolving them by sign.
pub(super) fn sphere_patches(i: usize, balls: &[Ball], nbrs: &[usize], strict: bool) -> Result<Vec<LocalPatch>, GeomError> {
    let bi = &balls[i];
    let r = bi.radius;
    let mut caps = Vec::new();
    for &j in nbrs {
        let bj = &balls[j];
        let d_vec = bj.center - bi.center;
        let d = d_vec.norm();
        if d >= r + bj.radius {
            if strict && d - r - bj.radius < DEGENERATE_BAND * r {
                return Err(degenerate(i, "tangent neighbour"));
            }
            continue;
        }
        if strict && (d - (r - bj.radius).abs()).abs() < DEGENERATE_BAND * r {
            return Err(degenerate(i, "internally tangent neighbour"));
        }
        if d <= bj.radius - r {
            return Ok(vec![]);
        }
        if d <= r - bj.radius {
            continue;
        }
        let n = d_vec / d;
        let h = (d * d + r * r - bj.radius * bj.radius) / (2.0 * d * r);
        let (u, w) = perpendicular_basis(&-n);
        caps.push(Cap { nb: j, n, h, rho: (1.0 - h * h).max(0.0).sqrt(), u, w });
    }
    if caps.is_empty() {
        return Ok(vec![LocalPatch { arcs: vec![], area: 4.0 * PI * r * r, vector_area: Vec3::zeros() }]);
    }

    let exposed = |x: &Vec3, skip: &[usize]| caps.iter().enumerate().all(|(l, c)| skip.contains(&l) || !c.covers(x));

    // crossings of circle pairs that no third cap covers
    let mut verts: Vec<Vertex> = Vec::new();
    let mut on_circle: Vec<Vec<(f64, usize)>> = vec![Vec::new(); caps.len()];
    for j in 0..caps.len() {
        for k in j + 1..caps.len() {
            let (a, b) = (&caps[j], &caps[k]);
            let c = a.n.dot(&b.n);
            let s2 = 1.0 - c * c;
            if s2 < 1e-14 {
                if strict && (a.h - c.signum() * b.h).abs() < DEGENERATE_BAND {
                    return Err(degenerate(i, "coincident cap circles"));
                }
                continue;
            }
            let alpha = (a.h - c * b.h) / s2;
            let beta = (b.h - c * a.h) / s2;
            let g2 = (1.0 - (alpha * alpha + beta * beta + 2.0 * alpha * beta * c)) / s2;
            if strict && g2.abs() < DEGENERATE_BAND {
                return Err(degenerate(i, "tangent cap circles"));
            }
            if g2 <= 0.0 {
                continue;
            }
            let base = a.n * alpha + b.n * beta;
            let g = a.n.cross(&b.n) * g2.sqrt();
            for x in [base + g, base - g] {
                if strict {
                    let s = caps.iter().enumerate().filter(|(l, _)| *l != j && *l != k).map(|(_, cap)| cap.n.dot(&x) - cap.h);
                    let worst = s.fold(f64::NEG_INFINITY, f64::max);
                    if worst > DEGENERATE_BAND {
                        continue;
                    }
                    if worst >= -DEGENERATE_BAND {
                        return Err(degenerate(i, "three cap circles meet"));
                    }
                } else if !exposed(&x, &[j, k]) {
                    continue;
                }
                let v = verts.len();
                verts.push(Vertex { x, circles: [j, k] });
                on_circle[j].push((a.phi(&x), v));
                on_circle[k].push((b.phi(&x), v));
            }
        }
    }

    let mut arcs: Vec<Arc> = Vec::new();
    for (j, list) in on_circle.iter_mut().enumerate() {
        let cap = &caps[j];
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        if list.is_empty() {
            if exposed(&cap.point(0.3), &[j]) {
                arcs.push(Arc { cap: j, phi0: 0.0, phi1: 2.0 * PI, start: None, end: None });
            }
            continue;
        }
        for t in 0..list.len() {
            let (p0, v0) = list[t];
            let (p1, v1) = if t + 1 < list.len() { list[t + 1] } else { (list[0].0 + 2.0 * PI, list[0].1) };
            if strict && p1 - p0 < DEGENERATE_BAND {
                return Err(degenerate(i, "coincident arc endpoints"));
            }
            if exposed(&cap.point(0.5 * (p0 + p1)), &[j]) {
                arcs.push(Arc { cap: j, phi0: p0, phi1: p1, start: Some(v0), end: Some(v1) });
            }
        }
    }
    if arcs.is_empty() {
        return Ok(vec![]);
    }

    // chain arcs into cycles
    let mut starting: HashMap<(usize, usize), usize> = HashMap::new();
    for (a, arc) in arcs.iter().enumerate() {
        if let Some(v) = arc.start {
            if starting.insert((v, arc.cap), a).is_some() {
                return Err(degenerate(i, "two arcs leave one vertex"));
            }
        }
    }
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; arcs.len()];
    for a0 in 0..arcs.len() {
        if seen[a0] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut a = a0;
        loop {
            seen[a] = true;
            cyc.push(a);
            let Some(v) = arcs[a].end else { break };
            let other = if verts[v].circles[0] == arcs[a].cap { verts[v].circles[1] } else { verts[v].circles[0] };
            let next = *starting.get(&(v, other)).ok_or_else(|| degenerate(i, "open boundary cycle"))?;
            if next == a0 {
                break;
            }
            if seen[next] {
                return Err(degenerate(i, "boundary cycles merge"));
            }
            a = next;
        }
        cycles.push(cyc);
    }

    // Gauss-Bonnet area of the region left of each cycle, taken as a disc
    let disc_area: Vec<f64> = cycles
        .iter()
        .map(|cyc| {
            let mut total = 2.0 * PI;
            for (t, &a) in cyc.iter().enumerate() {
                let arc = &arcs[a];
                let cap = &caps[arc.cap];
                total += cap.h * (arc.phi1 - arc.phi0);
                if let Some(v) = arc.end {
                    let next = &arcs[cyc[(t + 1) % cyc.len()]];
                    let t_in = cap.tangent(arc.phi1);
                    let t_out = caps[next.cap].tangent(next.phi0);
                    let x = verts[v].x;
                    total -= x.dot(&t_in.cross(&t_out)).atan2(t_in.dot(&t_out));
                }
            }
            total
        })
        .collect();

    // group cycles bounding the same face by their side of every cycle
    let faces: Vec<Vec<usize>> = if cycles.len() == 1 {
        vec![vec![0]]
    } else {
        let probe: Vec<Vec3> = cycles.iter().map(|cyc| {
            let arc = &arcs[cyc[0]];
            caps[arc.cap].point(0.5 * (arc.phi0 + arc.phi1))
        }).collect();
        let sides: Vec<Vec<bool>> = (0..cycles.len())
            .map(|q| (0..cycles.len()).map(|c| c == q || left_of(&caps, &arcs, &cycles[c], &probe[q])).collect())
            .collect();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut key: Vec<&Vec<bool>> = Vec::new();
        for (q, s) in sides.iter().enumerate() {
            match key.iter().position(|k| *k == s) {
                Some(g) => groups[g].push(q),
                None => {
                    key.push(s);
                    groups.push(vec![q]);
                }
            }
        }
        groups
    };

    let r2 = r * r;
    let mut out = Vec::with_capacity(faces.len());
    for face in faces {
        let mut area = face.iter().map(|&c| disc_area[c]).sum::<f64>() - 4.0 * PI * (face.len() - 1) as f64;
        area = area.max(0.0) * r2;
        let mut va = Vec3::zeros();
        let mut out_arcs = Vec::new();
        for &c in &face {
            for &a in &cycles[c] {
                let arc = &arcs[a];
                let cap = &caps[arc.cap];
                let (m, p0) = (-cap.n, cap.n * cap.h);
                let dc = arc.phi1.cos() - arc.phi0.cos();
                let ds = arc.phi1.sin() - arc.phi0.sin();
                va += (p0.cross(&(cap.u * dc + cap.w * ds)) * cap.rho + m * (cap.rho * cap.rho * (arc.phi1 - arc.phi0))) * 0.5;
                out_arcs.push(BoundaryArc {
                    neighbor: cap.nb,
                    circle: Circle { center: bi.center + cap.n * (cap.h * r), axis: m, u: cap.u, radius: cap.rho * r },
                    phi: [arc.phi0, arc.phi1],
                    endpoints: arc.start.zip(arc.end).map(|(s, e)| [bi.center + verts[s].x * r, bi.center + verts[e].x * r]),
                });
            }
        }
        out.push(LocalPatch { arcs: out_arcs, area, vector_area: va * r2 });
    }
    Ok(out)
}

/// Whether `q` lies on the left of cycle `cyc`, by the parity of crossings
/// along a great arc from a covered point of one of the cycle's caps.
fn left_of(caps: &[Cap], arcs: &[Arc], cyc: &[usize], q: &Vec3) -> bool {
    let q = q.normalize();
    let cap = cyc.iter().map(|&a| &caps[arcs[a].cap]).max_by(|a, b| a.n.dot(&q).total_cmp(&b.n.dot(&q))).unwrap();
    let mut z = cap.n;
    if z.dot(&q) < -1.0 + 1e-9 {
        let tilt = 0.5 * cap.h.clamp(-1.0, 1.0).acos();
        z = (cap.n * tilt.cos() + cap.u * tilt.sin()).normalize();
    }
    let e = (q - z * z.dot(&q)).normalize();
    let total = z.dot(&q).clamp(-1.0, 1.0).acos();
    let mut crossings = 0;
    for &a in cyc {
        let arc = &arcs[a];
        let c = &caps[arc.cap];
        let (ca, cb) = (c.n.dot(&z), c.n.dot(&e));
        let amp = ca.hypot(cb);
        if amp <= c.h.abs() {
            continue;
        }
        let delta = cb.atan2(ca);
        let kappa = (c.h / amp).acos();
        for t in [delta + kappa, delta - kappa] {
            let t = t.rem_euclid(2.0 * PI);
            if t <= 0.0 || t >= total {
                continue;
            }
            let x = z * t.cos() + e * t.sin();
            let span = arc.phi1 - arc.phi0;
            if span >= 2.0 * PI || (c.phi(&x) - arc.phi0).rem_euclid(2.0 * PI) < span {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}
