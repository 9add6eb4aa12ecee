use super::{Aabb, Point};
use crate::Real;

/// Uniform bucket grid for point and box lookups.
#[derive(Debug, Clone)]
pub struct BucketGrid<T> {
    origin: Point<T>,
    cell: T,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<T: Real> BucketGrid<T> {
    /// Grid over `bounds` with roughly `target` buckets.
    pub fn new(bounds: Aabb<T>, target: usize) -> Self {
        let w = bounds.width().max(T::epsilon());
        let h = bounds.height().max(T::epsilon());
        let cell = (w * h / T::from_usize_lossy(target.max(1))).sqrt().max(T::epsilon());
        let nx = ((w / cell).ceil().to_usize().unwrap_or(1)).clamp(1, 4096);
        let ny = ((h / cell).ceil().to_usize().unwrap_or(1)).clamp(1, 4096);
        let cell = (w / T::from_usize_lossy(nx)).max(h / T::from_usize_lossy(ny));
        Self { origin: bounds.min, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] }
    }

    #[inline]
    pub fn cell_size(&self) -> T {
        self.cell
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Bucket coordinates of `p`, clamped to the grid.
    #[inline]
    pub fn locate(&self, p: Point<T>) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.cell).floor();
        let fy = ((p.y - self.origin.y) / self.cell).floor();
        let clamp = |f: T, n: usize| -> usize {
            if !(f > T::zero()) {
                0
            } else {
                f.to_usize().unwrap_or(n - 1).min(n - 1)
            }
        };
        (clamp(fx, self.nx), clamp(fy, self.ny))
    }

    pub fn insert_point(&mut self, p: Point<T>, id: usize) {
        let (i, j) = self.locate(p);
        self.buckets[j * self.nx + i].push(id);
    }

    pub fn insert_aabb(&mut self, b: &Aabb<T>, id: usize) {
        let (i0, j0) = self.locate(b.min);
        let (i1, j1) = self.locate(b.max);
        for j in j0..=j1 {
            for i in i0..=i1 {
                self.buckets[j * self.nx + i].push(id);
            }
        }
    }

    #[inline]
    pub fn bucket(&self, i: usize, j: usize) -> &[usize] {
        &self.buckets[j * self.nx + i]
    }

    /// Ids stored in the bucket containing `p`.
    #[inline]
    pub fn query(&self, p: Point<T>) -> &[usize] {
        let (i, j) = self.locate(p);
        self.bucket(i, j)
    }

    /// Visits the buckets at Chebyshev distance exactly `r` from `(ci, cj)`.
    /// Returns false once the ring lies completely outside the grid.
    pub fn visit_ring(&self, ci: usize, cj: usize, r: usize, mut f: impl FnMut(&[usize])) -> bool {
        let (ci, cj, r) = (ci as isize, cj as isize, r as isize);
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        if ci - r < 0 && cj - r < 0 && ci + r >= nx && cj + r >= ny {
            return false;
        }
        for j in (cj - r)..=(cj + r) {
            if j < 0 || j >= ny {
                continue;
            }
            let edge_row = j == cj - r || j == cj + r;
            let mut i = ci - r;
            while i <= ci + r {
                if i >= 0 && i < nx {
                    f(self.bucket(i as usize, j as usize));
                }
                if edge_row || r == 0 {
                    i += 1;
                } else {
                    i += 2 * r;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rings_partition_the_grid() {
        let b = Aabb { min: Point::new(0.0, 0.0), max: Point::new(1.0, 1.0) };
        let mut g = BucketGrid::new(b, 25);
        let mut id = 0;
        let (nx, ny) = g.dims();
        for j in 0..ny {
            for i in 0..nx {
                let p = Point::new((i as f64 + 0.5) * g.cell_size(), (j as f64 + 0.5) * g.cell_size());
                g.insert_point(p, id);
                id += 1;
            }
        }
        let mut seen = vec![0usize; id];
        let mut r = 0;
        while g.visit_ring(1, 3, r, |ids| ids.iter().for_each(|&k| seen[k] += 1)) {
            r += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}
