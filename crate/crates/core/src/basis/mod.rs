//! Mollified cell bases: scaled monomials on each cell, convolved with the
//! mollifier and restricted to the cell.

mod eval1d;
mod eval2d;
mod reproduction;

pub use eval1d::{eval_1d, support_1d, Interval};
pub use eval2d::{eval_2d, eval_2d_triangulated, support};
pub use reproduction::{
    local_coefficients_1d, local_coefficients_2d, reproduction_coefficients, reproduction_coefficients_2d,
};

use crate::geometry::Point;
use crate::Real;

/// Scaled, shifted monomial basis of one cell: entries `ξ^a η^b` with
/// `ξ = 2 (x - c) / h` and total degree at most `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellBasis<T> {
    pub cell_id: usize,
    pub center: Point<T>,
    pub scale: T,
    pub degree: usize,
    dim: usize,
    exponents: Vec<(usize, usize)>,
}

impl<T: Real> CellBasis<T> {
    pub fn new_1d(cell_id: usize, center: T, scale: T, degree: usize) -> Self {
        Self {
            cell_id,
            center: Point::new(center, T::zero()),
            scale,
            degree,
            dim: 1,
            exponents: (0..=degree).map(|a| (a, 0)).collect(),
        }
    }

    pub fn new_2d(cell_id: usize, center: Point<T>, scale: T, degree: usize) -> Self {
        Self { cell_id, center, scale, degree, dim: 2, exponents: exponents_2d(degree) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// `(a, b)` exponents in basis order; `b = 0` throughout in 1D.
    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exponents
    }

    pub fn scaled(&self, p: Point<T>) -> Point<T> {
        (p - self.center) * (T::lit(2.0) / self.scale)
    }

    /// Monomial values and gradients at `p`.
    pub fn monomials(&self, p: Point<T>) -> BasisValue<T> {
        let xi = self.scaled(p);
        let s = T::lit(2.0) / self.scale;
        let pw = |v: T, k: usize| if k == 0 { T::one() } else { v.powi(k as i32) };
        let mut out = BasisValue::zeros(self.len());
        for (k, &(a, b)) in self.exponents.iter().enumerate() {
            out.values[k] = pw(xi.x, a) * pw(xi.y, b);
            let gx = if a > 0 { T::from_usize_lossy(a) * pw(xi.x, a - 1) * pw(xi.y, b) } else { T::zero() };
            let gy = if b > 0 { T::from_usize_lossy(b) * pw(xi.x, a) * pw(xi.y, b - 1) } else { T::zero() };
            out.grads[k] = [gx * s, gy * s];
        }
        out
    }
}

/// Exponents of all monomials of total degree `<= degree`, graded.
pub fn exponents_2d(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(|d| (0..=d).rev().map(move |a| (a, d - a))).collect()
}

/// Values and gradients of every basis function of a cell at one point.
/// In 1D only the first gradient component is used.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValue<T> {
    pub values: Vec<T>,
    pub grads: Vec<[T; 2]>,
}

impl<T: Real> BasisValue<T> {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![T::zero(); n], grads: vec![[T::zero(); 2]; n] }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero()) && self.grads.iter().all(|g| g[0] == T::zero() && g[1] == T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_layout() {
        let cb = CellBasis::new_2d(0, Point::<f64>::new(0.3, 0.1), 0.4, 1);
        let v = cb.monomials(Point::<f64>::new(0.3 + 0.2, 0.1 + 0.4));
        assert_eq!(cb.exponents(), &[(0, 0), (1, 0), (0, 1)]);
        for (a, b) in v.values.iter().zip([1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let at_center = cb.monomials(cb.center);
        assert_eq!(at_center.values, vec![1.0, 0.0, 0.0]);
        assert_eq!(exponents_2d(2).len(), 6);
        assert_eq!(CellBasis::new_1d(0, 0.0f64, 1.0, 3).len(), 4);
    }

    #[test]
    fn monomial_gradients() {
        let cb = CellBasis::new_2d(0, Point::<f64>::new(-0.2, 0.5), 0.3, 3);
        let p = Point::<f64>::new(0.07, 0.61);
        let g = cb.monomials(p);
        let h = 1e-6;
        let px = cb.monomials(Point::<f64>::new(p.x + h, p.y));
        let mx = cb.monomials(Point::<f64>::new(p.x - h, p.y));
        let py = cb.monomials(Point::<f64>::new(p.x, p.y + h));
        let my = cb.monomials(Point::<f64>::new(p.x, p.y - h));
        for k in 0..cb.len() {
            let fx = (px.values[k] - mx.values[k]) / (2.0 * h);
            let fy = (py.values[k] - my.values[k]) / (2.0 * h);
            assert!((fx - g.grads[k][0]).abs() <= 1e-8 * fx.abs().max(1.0));
            assert!((fy - g.grads[k][1]).abs() <= 1e-8 * fy.abs().max(1.0));
        }
    }
}
