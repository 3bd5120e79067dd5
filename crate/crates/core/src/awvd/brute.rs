//! Exhaustive construction over all 4-subsets; the reference for small inputs.

use super::raw::{away_sign, interior_param, RawDiagram, RawEdge, RawEnd, RawVertex};
use crate::error::GeomError;
use crate::model::{Ball, Vec3};
use crate::predicates::{centers_collinear, collinear_circle_point, min_tangent_sphere_to_two_balls, tangent_spheres_to_four_balls, TangentSphere, Tolerances, Trisector};
use std::collections::HashSet;
use std::f64::consts::PI;

/// Emptiness up to rounding; near-degenerate (jittered) inputs have genuine
/// gaps far below the geometric tolerance.
fn empty(balls: &[Ball], x: &Vec3, t: f64, skip: &[usize]) -> bool {
    let eps = 1e-12 * (1.0 + t.abs());
    balls.iter().enumerate().all(|(i, b)| skip.contains(&i) || b.power_distance(x) >= t - eps)
}

fn degenerate(balls: &[usize], reason: &str) -> GeomError {
    GeomError::DegenerateInput { balls: balls.to_vec(), reason: reason.into() }
}

fn four_ball_spheres(balls: &[Ball], q: [usize; 4], tol: &Tolerances) -> Result<Vec<TangentSphere>, GeomError> {
    let b = [&balls[q[0]], &balls[q[1]], &balls[q[2]], &balls[q[3]]];
    match tangent_spheres_to_four_balls(b, tol) {
        Ok(s) => Ok(s),
        Err(_) => {
            // coplanar centers: intersect the first trisector with the fourth ball
            let Ok(tri) = Trisector::new([b[0], b[1], b[2]], tol) else { return Ok(vec![]) };
            let hits = tri.intersect(b[3], tol.eps_geom).map_err(|_| degenerate(&q, "cocircular balls"))?;
            Ok(hits
                .into_iter()
                .map(|h| crate::predicates::refine_four(b, TangentSphere { center: h.center, radius: h.radius }))
                .collect())
        }
    }
}

/// Whether moving from vertex `end` along the curve (direction `sign`) leaves
/// the region of the vertex's fourth ball.
fn leaves_cell(balls: &[Ball], verts: &[RawVertex], tri: &Trisector, ids: [usize; 3], end: RawEnd, s: f64, sign: f64) -> bool {
    let RawEnd::Vertex(v) = end else { return true };
    let q = verts[v].quad;
    let l = *q.iter().find(|x| !ids.contains(x)).unwrap();
    away_sign(balls, tri, ids, l, s) * sign > 0.0
}

pub(super) fn brute(balls: &[Ball], tol: &Tolerances, strict: bool) -> Result<RawDiagram, GeomError> {
    let n = balls.len();
    let mut raw = RawDiagram::default();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let q = [i, j, k, l];
                    for s in four_ball_spheres(balls, q, tol)? {
                        if !empty(balls, &s.center, s.radius, &q) {
                            continue;
                        }
                        if strict {
                            let eps = 1e-8 * (1.0 + s.radius.abs());
                            if let Some(m) = (0..n).find(|m| !q.contains(m) && (balls[*m].power_distance(&s.center) - s.radius).abs() < eps) {
                                return Err(degenerate(&[i, j, k, l, m], "five or more balls share a tangent sphere"));
                            }
                        }
                        raw.vertices.push(RawVertex { quad: q, sphere: s });
                    }
                }
            }
        }
    }
    let mut used = HashSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let t = [i, j, k];
                let on: Vec<usize> = (0..raw.vertices.len())
                    .filter(|&v| t.iter().all(|x| raw.vertices[v].quad.contains(x)))
                    .collect();
                let tri = match Trisector::new([&balls[i], &balls[j], &balls[k]], tol) {
                    Ok(tri) => tri,
                    Err(_) if on.is_empty() => {
                        let b3 = [&balls[i], &balls[j], &balls[k]];
                        if strict && centers_collinear(b3, tol) {
                            if let Some(s) = collinear_circle_point(b3) {
                                if empty(balls, &s.center, s.radius, &t) {
                                    return Err(degenerate(&t, "collinear triple with an empty circular trisector"));
                                }
                            }
                        }
                        continue;
                    }
                    Err(_) => return Err(degenerate(&t, "collinear triple carries vertices")),
                };
                let mut at: Vec<(f64, usize)> = on
                    .iter()
                    .map(|&v| {
                        let s = &raw.vertices[v].sphere;
                        (tri.param_of(&s.center, s.radius), v)
                    })
                    .collect();
                at.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut arcs: Vec<(f64, f64, Option<(RawEnd, RawEnd)>)> = Vec::new();
                if tri.is_closed() {
                    if at.is_empty() {
                        arcs.push((0.0, 2.0 * PI, None));
                    }
                    for w in 0..at.len() {
                        let (sa, va) = at[w];
                        let (sb, vb) = at[(w + 1) % at.len()];
                        let sb = if w + 1 == at.len() { sb + 2.0 * PI } else { sb };
                        arcs.push((sa, sb, Some((RawEnd::Vertex(va), RawEnd::Vertex(vb)))));
                    }
                } else {
                    let mut prev = (f64::NEG_INFINITY, RawEnd::Infinite);
                    for &(s, v) in &at {
                        arcs.push((prev.0, s, Some((prev.1, RawEnd::Vertex(v)))));
                        prev = (s, RawEnd::Vertex(v));
                    }
                    arcs.push((prev.0, f64::INFINITY, Some((prev.1, RawEnd::Infinite))));
                }
                for (s0, s1, ends) in arcs {
                    if let Some((a, b)) = ends {
                        if !leaves_cell(balls, &raw.vertices, &tri, t, a, s0, 1.0) || !leaves_cell(balls, &raw.vertices, &tri, t, b, s1, -1.0) {
                            continue;
                        }
                    }
                    let mid = interior_param(s0, s1);
                    let (x, r) = tri.point(mid);
                    let mut skip = t.to_vec();
                    for end in ends.iter().flat_map(|(a, b)| [a, b]) {
                        if let RawEnd::Vertex(v) = end {
                            skip.extend(raw.vertices[*v].quad);
                        }
                    }
                    if empty(balls, &x, r, &skip) {
                        raw.edges.push(RawEdge { triple: t, ends, s0, s1 });
                        used.insert([i, j]);
                        used.insert([i, k]);
                        used.insert([j, k]);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if used.contains(&[i, j]) {
                continue;
            }
            let Ok(s) = min_tangent_sphere_to_two_balls(&balls[i], &balls[j]) else { continue };
            if empty(balls, &s.center, s.radius, &[i, j]) {
                raw.free_pairs.push([i, j]);
            }
        }
    }
    Ok(raw)
}

