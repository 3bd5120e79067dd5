//! Uniform grid over ball centers.

use crate::model::{Ball, Vec3};

#[derive(Debug, Clone)]
pub struct SpatialGrid {
    origin: Vec3,
    cell: f64,
    dims: [usize; 3],
    starts: Vec<usize>,
    items: Vec<usize>,
    centers: Vec<Vec3>,
}

impl SpatialGrid {
    pub fn new(balls: &[Ball], cell_size: f64) -> Self {
        let centers: Vec<Vec3> = balls.iter().map(|b| b.center).collect();
        let (lo, hi) = bbox(&centers);
        let ext = hi - lo;
        let mut cell = if cell_size.is_finite() && cell_size > 0.0 { cell_size } else { 1.0 };
        // keep the dense table proportional to the ball count
        loop {
            let n = dims_for(&ext, cell).iter().product::<usize>();
            if n <= 8 * centers.len() + 4096 {
                break;
            }
            cell *= 1.5;
        }
        let dims = dims_for(&ext, cell);
        let ncell = dims.iter().product::<usize>();
        let mut counts = vec![0usize; ncell + 1];
        let idx: Vec<usize> = centers.iter().map(|c| flat(&cell_of(c, &lo, cell, &dims), &dims)).collect();
        for &k in &idx {
            counts[k + 1] += 1;
        }
        for k in 0..ncell {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut items = vec![0usize; centers.len()];
        for (i, &k) in idx.iter().enumerate() {
            items[fill[k]] = i;
            fill[k] += 1;
        }
        SpatialGrid { origin: lo, cell, dims, starts: counts, items, centers }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Indices of centers within `reach` of `p`, appended to `out` (cleared first).
    pub fn query(&self, p: &Vec3, reach: f64, out: &mut Vec<usize>) {
        out.clear();
        if self.centers.is_empty() {
            return;
        }
        let r2 = reach * reach;
        let lo = cell_of(&(p - Vec3::repeat(reach)), &self.origin, self.cell, &self.dims);
        let hi = cell_of(&(p + Vec3::repeat(reach)), &self.origin, self.cell, &self.dims);
        let span = (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) * (hi[2] - lo[2] + 1);
        if span >= self.starts.len() - 1 || reach.is_infinite() {
            for (i, c) in self.centers.iter().enumerate() {
                if (c - p).norm_squared() <= r2 {
                    out.push(i);
                }
            }
            return;
        }
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let k = flat(&[x, y, z], &self.dims);
                    for &i in &self.items[self.starts[k]..self.starts[k + 1]] {
                        if (self.centers[i] - p).norm_squared() <= r2 {
                            out.push(i);
                        }
                    }
                }
            }
        }
    }
}

pub fn bbox(points: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if points.is_empty() {
        return (Vec3::zeros(), Vec3::zeros());
    }
    (lo, hi)
}

fn dims_for(ext: &Vec3, cell: f64) -> [usize; 3] {
    [0, 1, 2].map(|k| ((ext[k] / cell).floor() as usize + 1).max(1))
}

fn cell_of(p: &Vec3, lo: &Vec3, cell: f64, dims: &[usize; 3]) -> [usize; 3] {
    [0, 1, 2].map(|k| {
        let v = ((p[k] - lo[k]) / cell).floor();
        if v.is_nan() || v < 0.0 {
            0
        } else {
            (v as usize).min(dims[k] - 1)
        }
    })
}

fn flat(c: &[usize; 3], dims: &[usize; 3]) -> usize {
    (c[0] * dims[1] + c[1]) * dims[2] + c[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_matches_linear_scan() {
        let balls: Vec<Ball> = (0..200)
            .map(|i| {
                let f = i as f64;
                Ball::new(i, [(f * 0.37).sin() * 9.0, (f * 0.91).cos() * 7.0, (f * 0.13).sin() * 11.0], 1.0)
            })
            .collect();
        let g = SpatialGrid::new(&balls, 2.0);
        let mut out = Vec::new();
        for probe in [Vec3::zeros(), Vec3::new(3.0, -2.0, 5.0), Vec3::new(40.0, 0.0, 0.0)] {
            for reach in [0.5, 3.0, 12.0, 100.0] {
                g.query(&probe, reach, &mut out);
                out.sort();
                let want: Vec<usize> =
                    (0..200).filter(|&i| (balls[i].center - probe).norm() <= reach).collect();
                assert_eq!(out, want);
            }
        }
    }
}
