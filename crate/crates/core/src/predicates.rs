//! Tangent-sphere solvers, the three-ball equidistant curve and clearance.
//!
//! Distances are additive: d(p, B) = |p - c| - r. A tangent sphere of radius
//! `t` centered at `x` satisfies |x - c_i| = r_i + t for each generator.

use crate::error::GeomError;
use crate::model::{Ball, Vec3};
use nalgebra::{Matrix3, Matrix4, Vector4};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eps_geom: f64,
    pub eps_det: f64,
    pub jitter_magnitude: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_geom: 1e-7, eps_det: 1e-10, jitter_magnitude: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentSphere {
    pub center: Vec3,
    pub radius: f64,
}

impl TangentSphere {
    pub fn residual(&self, b: &Ball) -> f64 {
        ((self.center - b.center).norm() - b.radius - self.radius).abs()
    }
}

pub fn clearance(point: &Vec3, balls: &[Ball]) -> f64 {
    balls.iter().map(|b| b.power_distance(point)).fold(f64::INFINITY, f64::min)
}

/// Roots of a t^2 + b t + c in ascending order; handles the linear case.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return vec![];
    }
    if a.abs() <= 1e-14 * scale {
        if b == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc > -1e-12 * b * b.max(1e-300) {
            return vec![-b / (2.0 * a)];
        }
        return vec![];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    if r1 <= r2 { vec![r1, r2] } else { vec![r2, r1] }
}

pub fn min_tangent_sphere_to_two_balls(b1: &Ball, b2: &Ball) -> Result<TangentSphere, GeomError> {
    let d = b2.center - b1.center;
    let len = d.norm();
    if len == 0.0 {
        return Err(GeomError::CoincidentCenters);
    }
    let t = (len - b1.radius - b2.radius) / 2.0;
    let center = b1.center + d * ((b1.radius + t) / len);
    Ok(TangentSphere { center, radius: t })
}

/// Spheres externally tangent to four balls, sorted by radius.
pub fn tangent_spheres_to_four_balls(balls: [&Ball; 4], tol: &Tolerances) -> Result<Vec<TangentSphere>, GeomError> {
    let c1 = balls[0].center;
    let r1 = balls[0].radius;
    let mut m = Matrix3::zeros();
    let mut k = Vec3::zeros();
    let mut dl = Vec3::zeros();
    let mut norms = 1.0;
    for i in 0..3 {
        let d = balls[i + 1].center - c1;
        let delta = balls[i + 1].radius - r1;
        m.set_row(i, &d.transpose());
        k[i] = (d.norm_squared() - delta * (balls[i + 1].radius + r1)) / 2.0;
        dl[i] = delta;
        norms *= d.norm();
    }
    let det = m.determinant();
    if !(det.abs() > tol.eps_det * norms) {
        return Err(GeomError::DegenerateConfiguration("coplanar centers".into()));
    }
    let inv = m.try_inverse().ok_or_else(|| GeomError::DegenerateConfiguration("singular system".into()))?;
    let x0 = inv * k;
    let x1 = -(inv * dl);
    let roots = quadratic_roots(x1.norm_squared() - 1.0, 2.0 * (x0.dot(&x1) - r1), x0.norm_squared() - r1 * r1);
    let mut out = Vec::new();
    for t in roots {
        if balls.iter().any(|b| b.radius + t < -tol.eps_geom) {
            continue;
        }
        let s = refine_four(balls, TangentSphere { center: c1 + x0 + x1 * t, radius: t });
        if balls.iter().all(|b| s.residual(b) <= tol.eps_geom * (1.0 + s.radius.abs())) {
            out.push(s);
        }
    }
    out.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    Ok(out)
}

/// Newton polish of |x - c_i| - r_i - t = 0.
pub fn refine_four(balls: [&Ball; 4], mut s: TangentSphere) -> TangentSphere {
    let resid = |s: &TangentSphere| balls.iter().map(|b| s.residual(b)).fold(0.0, f64::max);
    let mut best = resid(&s);
    for _ in 0..3 {
        if best == 0.0 {
            break;
        }
        let mut j = Matrix4::zeros();
        let mut f = Vector4::zeros();
        for (i, b) in balls.iter().enumerate() {
            let d = s.center - b.center;
            let n = d.norm();
            if n == 0.0 {
                return s;
            }
            let g = d / n;
            j[(i, 0)] = g.x;
            j[(i, 1)] = g.y;
            j[(i, 2)] = g.z;
            j[(i, 3)] = -1.0;
            f[i] = n - b.radius - s.radius;
        }
        let Some(step) = j.lu().solve(&f) else { break };
        let cand = TangentSphere {
            center: s.center - Vec3::new(step[0], step[1], step[2]),
            radius: s.radius - step[3],
        };
        let r = resid(&cand);
        if r < best {
            s = cand;
            best = r;
        } else {
            break;
        }
    }
    s
}

/// Smallest sphere tangent to three balls and the attached flag.
///
/// The flag is set when some pair's minimum tangent sphere is reached by the
/// third ball, so the pair cannot be witnessed by its own smallest sphere.
pub fn min_tangent_sphere_to_three_balls(balls: [&Ball; 3], tol: &Tolerances) -> Result<(TangentSphere, bool), GeomError> {
    let tri = Trisector::new(balls, tol)?;
    let (center, radius) = tri.point(0.0);
    let mut attached = false;
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let s = min_tangent_sphere_to_two_balls(balls[i], balls[j])?;
        if balls[k].power_distance(&s.center) < s.radius {
            attached = true;
        }
    }
    Ok((TangentSphere { center, radius }, attached))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// Open branch, parameterized by the signed offset `u` from the center plane.
    Open,
    /// Closed curve, parameterized by an angle in [0, 2pi).
    Closed,
}

/// Outcome of intersecting the curve with a fourth ball's tangency condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveHit {
    pub s: f64,
    pub center: Vec3,
    pub radius: f64,
}

/// The curve of points equidistant (additively) from three balls.
///
/// Points are `ca + p0 + p1 t + u n` with `u^2 = A t^2 + B t + C`; the
/// minimum of `t` along the curve is at parameter 0.
#[derive(Debug, Clone)]
pub struct Trisector {
    pub balls: [Ball; 3],
    pub kind: CurveKind,
    ca: Vec3,
    p0: Vec3,
    p1: Vec3,
    n: Vec3,
    qa: f64,
    qb: f64,
    qc: f64,
    disc: f64,
    // closed curves: t = tc - h cos(theta), u = h k sin(theta)
    tc: f64,
    h: f64,
    k: f64,
}

impl Trisector {
    pub fn new(balls: [&Ball; 3], tol: &Tolerances) -> Result<Self, GeomError> {
        let [a, b, c] = balls;
        let ca = a.center;
        let ra = a.radius;
        let db = b.center - ca;
        let dc = c.center - ca;
        let (gbb, gbc, gcc) = (db.dot(&db), db.dot(&dc), dc.dot(&dc));
        let cross = db.cross(&dc);
        let det = cross.norm_squared();
        if gbb == 0.0 || gcc == 0.0 || det <= tol.eps_det * gbb * gcc {
            return Err(GeomError::DegenerateConfiguration("collinear centers".into()));
        }
        let (dlb, dlc) = (b.radius - ra, c.radius - ra);
        let kb = (gbb - dlb * (b.radius + ra)) / 2.0;
        let kc = (gcc - dlc * (c.radius + ra)) / 2.0;
        let solve = |x: f64, y: f64| ((gcc * x - gbc * y) / det, (gbb * y - gbc * x) / det);
        let (a0, b0) = solve(kb, kc);
        let (a1, b1) = solve(dlb, dlc);
        let p0 = db * a0 + dc * b0;
        let p1 = -(db * a1 + dc * b1);
        let n = cross / det.sqrt();
        let qa = 1.0 - p1.norm_squared();
        let qb = 2.0 * (ra - p0.dot(&p1));
        let qc = ra * ra - p0.norm_squared();
        let disc = qb * qb - 4.0 * qa * qc;
        let r_min = a.radius.min(b.radius).min(c.radius);
        let mut tri = Trisector {
            balls: [*a, *b, *c],
            kind: CurveKind::Open,
            ca,
            p0,
            p1,
            n,
            qa,
            qb,
            qc,
            disc,
            tc: 0.0,
            h: 0.0,
            k: 0.0,
        };
        const EPS_A: f64 = 1e-9;
        if qa < -EPS_A {
            let roots = quadratic_roots(qa, qb, qc);
            if roots.len() != 2 || roots[1] - roots[0] <= 0.0 {
                return Err(GeomError::DegenerateConfiguration("empty closed trisector".into()));
            }
            tri.kind = CurveKind::Closed;
            tri.tc = (roots[0] + roots[1]) / 2.0;
            tri.h = (roots[1] - roots[0]) / 2.0;
            tri.k = (-qa).sqrt();
        } else if qa <= EPS_A {
            if qb <= 0.0 {
                return Err(GeomError::DegenerateConfiguration("no valid trisector branch".into()));
            }
        } else if disc < 0.0 {
            return Err(GeomError::DegenerateConfiguration("no valid trisector branch".into()));
        }
        let (_, t0) = tri.point(0.0);
        if t0 + r_min < -tol.eps_geom * 10.0 {
            return Err(GeomError::DegenerateConfiguration("nested balls".into()));
        }
        Ok(tri)
    }

    pub fn ids(&self) -> [usize; 3] {
        [self.balls[0].id, self.balls[1].id, self.balls[2].id]
    }

    fn t_of_u(&self, u: f64) -> f64 {
        let d = (self.disc + 4.0 * self.qa * u * u).max(0.0).sqrt();
        if self.qb >= 0.0 {
            -2.0 * (self.qc - u * u) / (self.qb + d)
        } else {
            (-self.qb + d) / (2.0 * self.qa)
        }
    }

    fn tu(&self, s: f64) -> (f64, f64) {
        match self.kind {
            CurveKind::Open => (self.t_of_u(s), s),
            CurveKind::Closed => (self.tc - self.h * s.cos(), self.h * self.k * s.sin()),
        }
    }

    /// Center and tangent radius at parameter `s`.
    pub fn point(&self, s: f64) -> (Vec3, f64) {
        let (t, u) = self.tu(s);
        (self.ca + self.p0 + self.p1 * t + self.n * u, t)
    }

    /// Derivative of the center with respect to the parameter.
    pub fn tangent(&self, s: f64) -> Vec3 {
        match self.kind {
            CurveKind::Open => {
                let d = (self.disc + 4.0 * self.qa * s * s).max(1e-300).sqrt();
                self.p1 * (2.0 * s / d) + self.n
            }
            CurveKind::Closed => {
                self.p1 * (self.h * s.sin()) + self.n * (self.h * self.k * s.cos())
            }
        }
    }

    pub fn dt_ds(&self, s: f64) -> f64 {
        match self.kind {
            CurveKind::Open => 2.0 * s / (self.disc + 4.0 * self.qa * s * s).max(1e-300).sqrt(),
            CurveKind::Closed => self.h * s.sin(),
        }
    }

    /// Parameter of a point known to lie on the curve.
    pub fn param_of(&self, x: &Vec3, t: f64) -> f64 {
        let u = (x - self.ca).dot(&self.n);
        match self.kind {
            CurveKind::Open => u,
            CurveKind::Closed => wrap_angle((u / (self.h * self.k)).atan2((self.tc - t) / self.h)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.kind == CurveKind::Closed
    }

    /// Points where ball `m` is tangent to the curve's sphere family.
    ///
    /// Returns `Err` when the fourth ball is equidistant along the whole curve.
    pub fn intersect(&self, m: &Ball, eps: f64) -> Result<Vec<CurveHit>, GeomError> {
        let dm = m.center - self.ca;
        let ra = self.balls[0].radius;
        let dl = m.radius - ra;
        let km = (dm.norm_squared() - dl * (m.radius + ra)) / 2.0;
        let et = self.p1.dot(&dm) + dl;
        let eu = self.n.dot(&dm);
        let f = km - self.p0.dot(&dm);
        let e2 = et * et + eu * eu;
        let scale = dm.norm() + 1.0;
        if e2.sqrt() <= 1e-12 * scale {
            if f.abs() <= 1e-9 * scale * scale {
                return Err(GeomError::DegenerateConfiguration(format!(
                    "ball {} equidistant along trisector {:?}",
                    m.id,
                    self.ids()
                )));
            }
            return Ok(vec![]);
        }
        let inv = 1.0 / e2.sqrt();
        let (wt, wu) = (-eu * inv, et * inv);
        let (t0, u0) = (f * et / e2, f * eu / e2);
        let (qa, qb, qc) = (self.qa, self.qb, self.qc);
        let a2 = wu * wu - qa * wt * wt;
        let a1 = 2.0 * u0 * wu - 2.0 * qa * t0 * wt - qb * wt;
        let a0 = u0 * u0 - qa * t0 * t0 - qb * t0 - qc;
        let mut out = Vec::new();
        for lam in quadratic_roots(a2, a1, a0) {
            let t = t0 + lam * wt;
            let u = u0 + lam * wu;
            if t + m.radius < -eps {
                continue;
            }
            if self.kind == CurveKind::Open {
                // reject the mirror branch of an open conic
                let slope = 2.0 * qa * t + qb;
                if slope < -1e-9 * (qb.abs() + 1.0) {
                    continue;
                }
            }
            let x = self.ca + self.p0 + self.p1 * t + self.n * u;
            out.push(CurveHit { s: self.param_of(&x, t), center: x, radius: t });
        }
        Ok(out)
    }

    /// Sample points for bounding the swept region of an arc.
    pub fn sample(&self, s0: f64, s1: f64, n: usize) -> Vec<(Vec3, f64)> {
        (0..=n).map(|i| self.point(s0 + (s1 - s0) * i as f64 / n as f64)).collect()
    }

    /// Minimum tangent radius over the arc from `s0` to `s1` (s1 >= s0).
    pub fn min_radius_on(&self, s0: f64, s1: f64) -> f64 {
        let contains_zero = match self.kind {
            CurveKind::Open => s0 <= 0.0 && s1 >= 0.0,
            CurveKind::Closed => {
                let a = wrap_angle(s0);
                s1 - s0 >= 2.0 * PI - 1e-15 || a == 0.0 || a + (s1 - s0) >= 2.0 * PI
            }
        };
        if contains_zero {
            return self.point(0.0).1;
        }
        self.radius_at(s0).min(self.radius_at(s1))
    }

    pub fn radius_at(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return f64::INFINITY;
        }
        self.tu(s).0
    }

    /// Unit direction of the curve as the parameter goes to +/- infinity.
    pub fn asymptote(&self, positive: bool) -> Vec3 {
        let sign = if positive { 1.0 } else { -1.0 };
        let dtdu = if self.qa > 0.0 { 1.0 / self.qa.sqrt() } else { 0.0 };
        let d = self.p1 * dtdu + self.n;
        if self.qa > 1e-9 {
            (d * sign).normalize()
        } else {
            // parabola: direction dominated by p1
            let s = 1e6 * sign;
            let (x1, _) = self.point(s);
            let (x0, _) = self.point(s * 0.5);
            (x1 - x0).normalize()
        }
    }

    /// Arc length between parameters, by Gauss-Legendre quadrature on subintervals.
    pub fn arc_length(&self, s0: f64, s1: f64) -> f64 {
        if !s0.is_finite() || !s1.is_finite() {
            return f64::INFINITY;
        }
        const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        const W: [f64; 5] = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let pieces = 16;
        let h = (s1 - s0) / pieces as f64;
        let mut sum = 0.0;
        for p in 0..pieces {
            let mid = s0 + h * (p as f64 + 0.5);
            for (x, w) in X.iter().zip(W) {
                sum += w * self.tangent(mid + x * h / 2.0).norm() * h / 2.0;
            }
        }
        sum.abs()
    }
}

/// Two unit vectors completing `axis` (unit) to a right-handed frame.
pub fn perpendicular_basis(axis: &Vec3) -> (Vec3, Vec3) {
    let pick = if axis.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let u = axis.cross(&pick).normalize();
    let w = axis.cross(&u);
    (u, w)
}

/// Whether the three centers are collinear under `tol.eps_det`.
pub fn centers_collinear(balls: [&Ball; 3], tol: &Tolerances) -> bool {
    let db = balls[1].center - balls[0].center;
    let dc = balls[2].center - balls[0].center;
    let (gbb, gcc) = (db.norm_squared(), dc.norm_squared());
    gbb == 0.0 || gcc == 0.0 || db.cross(&dc).norm_squared() <= tol.eps_det * gbb * gcc
}

/// For balls on a common axis, one point of the circle equidistant from all
/// three, with its tangent radius. `None` when no such circle exists.
pub fn collinear_circle_point(balls: [&Ball; 3]) -> Option<TangentSphere> {
    let c0 = balls[0].center;
    let far = if (balls[1].center - c0).norm() >= (balls[2].center - c0).norm() { 1 } else { 2 };
    let axis = (balls[far].center - c0).try_normalize(0.0)?;
    let a: Vec<f64> = balls.iter().map(|b| (b.center - c0).dot(&axis)).collect();
    let r: Vec<f64> = balls.iter().map(|b| b.radius).collect();
    // (x - a_i)^2 + rho^2 = (T + r_i)^2, differenced against ball 0: linear in x and T
    let row = |i: usize| (2.0 * (a[i] - a[0]), 2.0 * (r[i] - r[0]), a[i] * a[i] - a[0] * a[0] - (r[i] * r[i] - r[0] * r[0]));
    let (p, q, u) = row(1);
    let (p2, q2, u2) = row(2);
    let det = p * q2 - q * p2;
    let scale = (p.abs() + q.abs()) * (p2.abs() + q2.abs());
    if det.abs() <= 1e-12 * scale {
        return None;
    }
    let x = (u * q2 - q * u2) / det;
    let t = (p * u2 - u * p2) / det;
    let rho2 = (t + r[0]).powi(2) - x * x;
    if rho2 <= 0.0 || balls.iter().any(|b| t + b.radius < 0.0) {
        return None;
    }
    let perp = perpendicular_basis(&axis).0;
    Some(TangentSphere { center: c0 + axis * x + perp * rho2.sqrt(), radius: t })
}

pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI { 0.0 } else { r }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(id: usize, c: [f64; 3]) -> Ball {
        Ball::new(id, c, 1.0)
    }

    fn tetra() -> [Ball; 4] {
        let s = 2.0 / 8f64.sqrt();
        [
            unit(0, [s, s, s]),
            unit(1, [s, -s, -s]),
            unit(2, [-s, s, -s]),
            unit(3, [-s, -s, s]),
        ]
    }

    #[test]
    fn tetrahedron_sphere() {
        let b = tetra();
        let out = tangent_spheres_to_four_balls([&b[0], &b[1], &b[2], &b[3]], &Tolerances::default()).unwrap();
        // edge 2 => circumradius sqrt(3/8)*2
        let want = 1.5f64.sqrt() - 1.0;
        assert!(out.iter().any(|s| (s.radius - want).abs() < 1e-12 && s.center.norm() < 1e-12));
    }

    #[test]
    fn two_ball_cases() {
        let a = unit(0, [0.0; 3]);
        for (d, t) in [(4.0, 1.0), (1.0, -0.5), (2.0, 0.0)] {
            let s = min_tangent_sphere_to_two_balls(&a, &unit(1, [d, 0.0, 0.0])).unwrap();
            assert!((s.radius - t).abs() < 1e-15);
            assert!((s.center.x - d / 2.0).abs() < 1e-15);
        }
        assert_eq!(min_tangent_sphere_to_two_balls(&a, &a), Err(GeomError::CoincidentCenters));
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt();
        let b = [unit(0, [0.0, 0.0, 0.0]), unit(1, [2.0, 0.0, 0.0]), unit(2, [1.0, h, 0.0])];
        let (s, attached) = min_tangent_sphere_to_three_balls([&b[0], &b[1], &b[2]], &Tolerances::default()).unwrap();
        assert!((s.radius - (2.0 / h - 1.0)).abs() < 1e-12);
        assert!((s.center - Vec3::new(1.0, h / 3.0, 0.0)).norm() < 1e-12);
        assert!(!attached);
    }

    #[test]
    fn collinear_is_degenerate() {
        let b = [unit(0, [0.0; 3]), unit(1, [3.0, 0.0, 0.0]), unit(2, [6.0, 0.0, 0.0])];
        assert!(matches!(
            min_tangent_sphere_to_three_balls([&b[0], &b[1], &b[2]], &Tolerances::default()),
            Err(GeomError::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn clearance_examples() {
        let o = unit(0, [0.0; 3]);
        assert_eq!(clearance(&Vec3::zeros(), &[o]), -1.0);
        assert_eq!(clearance(&Vec3::new(3.0, 0.0, 0.0), &[o]), 2.0);
        let cube: Vec<Ball> = (0..8)
            .map(|i| unit(i, [[-1.0, 1.0][i & 1], [-1.0, 1.0][(i >> 1) & 1], [-1.0, 1.0][(i >> 2) & 1]]))
            .collect();
        assert!((clearance(&Vec3::zeros(), &cube) - (3f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn trisector_points_are_equidistant() {
        let b = [
            Ball::new(0, [0.0, 0.0, 0.0], 1.2),
            Ball::new(1, [3.0, 0.2, 0.0], 1.7),
            Ball::new(2, [1.0, 2.5, 0.4], 0.9),
        ];
        let tri = Trisector::new([&b[0], &b[1], &b[2]], &Tolerances::default()).unwrap();
        for s in [-5.0, -0.3, 0.0, 0.7, 4.0] {
            let (x, t) = tri.point(s);
            for bb in &b {
                assert!((bb.power_distance(&x) - t).abs() < 1e-10);
            }
            assert!((tri.param_of(&x, t) - s).abs() < 1e-9);
            let (x2, _) = tri.point(s + 1e-6);
            let fd = (x2 - x) / 1e-6;
            assert!((fd - tri.tangent(s)).norm() < 1e-4);
        }
    }

    #[test]
    fn closed_trisector_roundtrip() {
        // small ball between two large ones gives a closed curve
        let b = [
            Ball::new(0, [0.0, 0.0, 0.0], 3.0),
            Ball::new(1, [5.5, 0.0, 0.0], 3.0),
            Ball::new(2, [2.75, 2.2, 0.0], 0.4),
        ];
        let tri = Trisector::new([&b[0], &b[1], &b[2]], &Tolerances::default()).unwrap();
        assert!(tri.is_closed());
        for s in [0.0, 0.5, 2.0, 3.5, 6.0] {
            let (x, t) = tri.point(s);
            for bb in &b {
                assert!((bb.power_distance(&x) - t).abs() < 1e-10);
            }
            assert!((tri.param_of(&x, t) - wrap_angle(s)).abs() < 1e-9);
        }
    }
}
