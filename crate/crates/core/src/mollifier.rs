//! Compactly supported, symmetric, unit-volume mollifiers.
//!
//! A mollifier of width `h_m` is stored as polynomial pieces `P_k(t)` in the
//! normalized variable `t = 2x / h_m` on uniform spans of `[-1, 1]`, so that
//! `m(x) = (2 / h_m) P(t)`.

use crate::geometry::{Point, SquareBox};
use crate::poly::Poly1;
use crate::quadrature::gauss_interval;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierKind {
    /// Uniform B-spline of the given degree on `degree + 1` spans.
    BSpline { degree: usize },
    /// Single-piece C¹ quartic `15/16 (1 - t²)²`.
    Quartic,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MollifierError {
    #[error("mollifier width must be positive and finite")]
    InvalidWidth,
    #[error("unsupported B-spline degree {0}")]
    UnsupportedDegree(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier1D<T> {
    kind: MollifierKind,
    width: T,
    pieces: Vec<Poly1<T>>,
}

impl<T: Real> Mollifier1D<T> {
    pub fn new(kind: MollifierKind, width: T) -> Result<Self, MollifierError> {
        if !(width > T::zero() && width.is_finite()) {
            return Err(MollifierError::InvalidWidth);
        }
        let pieces = match kind {
            MollifierKind::Quartic => {
                let c = T::lit(15.0 / 16.0);
                vec![Poly1::new(vec![c, T::zero(), -c - c, T::zero(), c])]
            }
            MollifierKind::BSpline { degree } => {
                if degree == 0 || degree > 6 {
                    return Err(MollifierError::UnsupportedDegree(degree));
                }
                bspline_pieces(degree)
            }
        };
        let mut m = Self { kind, width, pieces };
        let mass = m.unit_moment(0);
        for p in &mut m.pieces {
            *p = p.scale(T::one() / mass);
        }
        Ok(m)
    }

    pub fn bspline(degree: usize, width: T) -> Result<Self, MollifierError> {
        Self::new(MollifierKind::BSpline { degree }, width)
    }

    pub fn quartic(width: T) -> Result<Self, MollifierError> {
        Self::new(MollifierKind::Quartic, width)
    }

    /// Same shape with a different width.
    pub fn with_width(&self, width: T) -> Result<Self, MollifierError> {
        if !(width > T::zero() && width.is_finite()) {
            return Err(MollifierError::InvalidWidth);
        }
        Ok(Self { width, ..self.clone() })
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn halfwidth(&self) -> T {
        self.width * T::lit(0.5)
    }

    /// Polynomial degree of the pieces.
    pub fn degree(&self) -> usize {
        self.pieces.iter().map(Poly1::degree).max().unwrap_or(0)
    }

    /// Highest derivative order that is continuous everywhere.
    pub fn smoothness(&self) -> usize {
        match self.kind {
            MollifierKind::Quartic => 1,
            MollifierKind::BSpline { degree } => degree.saturating_sub(1),
        }
    }

    /// Pieces in the normalized variable; piece `k` lives on
    /// `[piece_knots()[k], piece_knots()[k + 1]]`.
    pub fn pieces(&self) -> &[Poly1<T>] {
        &self.pieces
    }

    pub fn piece_knots(&self) -> Vec<T> {
        let n = self.pieces.len();
        (0..=n).map(|k| T::from_usize_lossy(2 * k) / T::from_usize_lossy(n) - T::one()).collect()
    }

    /// Abscissae where the piecewise representation changes, including the
    /// support ends.
    pub fn breakpoints(&self) -> Vec<T> {
        self.piece_knots().into_iter().map(|t| t * self.halfwidth()).collect()
    }

    fn locate(&self, t: T, from_right: bool) -> Option<usize> {
        let one = T::one();
        if t < -one || t > one || (t == -one && !from_right) || (t == one && from_right) {
            return None;
        }
        let n = self.pieces.len();
        let s = (t + one) * T::from_usize_lossy(n) * T::lit(0.5);
        let mut k = s.floor().to_usize().unwrap_or(0);
        if !from_right && T::from_usize_lossy(k) == s && k > 0 {
            k -= 1;
        }
        Some(k.min(n - 1))
    }

    fn value(&self, x: T, k: usize, from_right: bool) -> T {
        let t = x / self.halfwidth();
        match self.locate(t, from_right) {
            None => T::zero(),
            Some(i) => {
                let mut p = self.pieces[i].clone();
                for _ in 0..k {
                    p = p.derivative();
                }
                let s = T::one() / self.halfwidth();
                p.eval(t) * s.powi(k as i32 + 1)
            }
        }
    }

    pub fn eval(&self, x: T) -> T {
        self.deriv(x, 0)
    }

    /// `k`-th derivative; zero outside the open support.
    pub fn deriv(&self, x: T, k: usize) -> T {
        let t = x / self.halfwidth();
        if t.abs() >= T::one() {
            return T::zero();
        }
        let s = (t + T::one()) * T::from_usize_lossy(self.pieces.len()) * T::lit(0.5);
        if k > 0 && s == s.round() {
            // kink of the piecewise form: symmetric mean of the one-sided limits
            return (self.value(x, k, false) + self.value(x, k, true)) * T::lit(0.5);
        }
        self.value(x, k, true)
    }

    /// Limit of the `k`-th derivative approaching `x` from the left or right.
    pub fn deriv_one_sided(&self, x: T, k: usize, from_right: bool) -> T {
        self.value(x, k, from_right)
    }

    fn unit_moment(&self, s: usize) -> T {
        let knots = self.piece_knots();
        let n = (self.degree() + s) / 2 + 1;
        let rule = gauss_interval::<T>(n).expect("gauss rule");
        let half = T::lit(0.5);
        let mut sum = T::zero();
        for (k, p) in self.pieces.iter().enumerate() {
            let (a, b) = (knots[k], knots[k + 1]);
            let (mid, hl) = ((a + b) * half, (b - a) * half);
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let t = mid + hl * q[0];
                sum += *w * hl * p.eval(t) * t.powi(s as i32);
            }
        }
        sum
    }

    /// `∫ m(x) x^s dx`.
    pub fn moments(&self, s: usize) -> T {
        self.unit_moment(s) * self.halfwidth().powi(s as i32)
    }
}

fn bspline_pieces<T: Real>(degree: usize) -> Vec<Poly1<T>> {
    // Cox–de Boor on integer knots 0..=degree+1, piecewise per span in u
    let spans = degree + 1;
    let mut basis: Vec<Vec<Poly1<T>>> = (0..spans)
        .map(|i| (0..spans).map(|j| Poly1::constant(if i == j { T::one() } else { T::zero() })).collect())
        .collect();
    for p in 1..=degree {
        let pf = T::from_usize_lossy(p);
        let mut next = Vec::with_capacity(spans - p);
        for i in 0..(spans - p) {
            let fi = T::from_usize_lossy(i);
            let left = Poly1::linear(-fi / pf, T::one() / pf);
            let right = Poly1::linear(T::from_usize_lossy(i + p + 1) / pf, -T::one() / pf);
            next.push((0..spans).map(|j| left.mul(&basis[i][j]).add(&right.mul(&basis[i + 1][j]))).collect());
        }
        basis = next;
    }
    // u = (t + 1) / δ with δ = 2 / spans; the density gains the factor 1/δ
    let delta = T::lit(2.0) / T::from_usize_lossy(spans);
    basis
        .swap_remove(0)
        .into_iter()
        .map(|piece| piece.compose_affine(T::one() / delta, T::one() / delta).scale(T::one() / delta))
        .collect()
}

/// Tensor-product mollifier `m(x) m(y)` in two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierTensor<T> {
    pub factor: Mollifier1D<T>,
}

impl<T: Real> MollifierTensor<T> {
    pub fn new(factor: Mollifier1D<T>) -> Self {
        Self { factor }
    }

    pub fn width(&self) -> T {
        self.factor.width()
    }

    pub fn halfwidth(&self) -> T {
        self.factor.halfwidth()
    }

    pub fn eval(&self, p: Point<T>) -> T {
        self.factor.eval(p.x) * self.factor.eval(p.y)
    }

    pub fn grad(&self, p: Point<T>) -> Point<T> {
        let (mx, my) = (self.factor.eval(p.x), self.factor.eval(p.y));
        Point::new(self.factor.deriv(p.x, 1) * my, mx * self.factor.deriv(p.y, 1))
    }

    /// Support of the mollifier translated to `center`.
    pub fn support_box(&self, center: Point<T>) -> SquareBox<T> {
        SquareBox::new(center, self.halfwidth()).expect("positive width")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(width: f64) -> Vec<Mollifier1D<f64>> {
        let mut v: Vec<_> = (1..=3).map(|q| Mollifier1D::bspline(q, width).unwrap()).collect();
        v.push(Mollifier1D::quartic(width).unwrap());
        v
    }

    #[test]
    fn quartic_values() {
        let m = Mollifier1D::<f64>::quartic(2.0).unwrap();
        assert!((m.eval(0.0) - 0.9375).abs() < 1e-15);
        assert_eq!(m.eval(1.0), 0.0);
        assert_eq!(m.eval(-1.0), 0.0);
        assert!(m.deriv_one_sided(1.0, 1, false).abs() < 1e-14);
        assert!(m.deriv_one_sided(-1.0, 1, true).abs() < 1e-14);
        assert_eq!(m.breakpoints(), vec![-1.0, 1.0]);
        let m3 = Mollifier1D::<f64>::quartic(0.5).unwrap();
        assert!((m3.eval(0.1) - 15.0 / 4.0 * (1.0 - 8.0 * 0.04 + 16.0 * 0.0016)).abs() < 1e-13);
    }

    #[test]
    fn hat_values() {
        let m = Mollifier1D::<f64>::bspline(1, 2.0).unwrap();
        assert!((m.eval(0.0) - 1.0).abs() < 1e-14);
        assert!((m.eval(0.5) - 0.5).abs() < 1e-14);
        assert_eq!(m.breakpoints(), vec![-1.0, 0.0, 1.0]);
        let h = 0.7;
        let m = Mollifier1D::<f64>::bspline(1, h).unwrap();
        assert!((m.moments(2) - h * h / 24.0).abs() < 1e-15);
        let b3 = Mollifier1D::<f64>::bspline(3, 2.0).unwrap().breakpoints();
        assert_eq!(b3.len(), 5);
        for w in b3.windows(2) {
            assert!((w[1] - w[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_mass_and_symmetry() {
        for m in all(0.8) {
            assert!((m.moments(0) - 1.0).abs() < 1e-13);
            assert!(m.moments(1).abs() < 1e-13);
            assert!(m.moments(3).abs() < 1e-13);
            for k in 0..50 {
                let x = -0.45 + 0.9 * k as f64 / 49.0;
                assert!((m.eval(x) - m.eval(-x)).abs() < 1e-12);
                assert!(m.eval(x) >= 0.0);
            }
            assert!(m.deriv(0.0, 1).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for m in all(1.3) {
            let h = 1e-6 * m.width();
            for k in 0..40 {
                let x = -0.6 + 1.2 * (k as f64 + 0.37) / 40.0;
                let fd = (m.eval(x + h) - m.eval(x - h)) / (2.0 * h);
                let d = m.deriv(x, 1);
                assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0), "{:?} {x} {fd} {d}", m.kind());
            }
        }
    }

    #[test]
    fn smoothness_at_breakpoints() {
        for m in all(1.0) {
            let scale = m.eval(0.0);
            for b in m.breakpoints() {
                for k in 0..=m.smoothness() {
                    let l = m.deriv_one_sided(b, k, false);
                    let r = m.deriv_one_sided(b, k, true);
                    let s = scale * m.halfwidth().powi(-(k as i32));
                    assert!((l - r).abs() <= 1e-9 * s, "{:?} k={k} at {b}: {l} vs {r}", m.kind());
                }
            }
        }
    }

    #[test]
    fn tensor_product() {
        let m = MollifierTensor::new(Mollifier1D::<f64>::quartic(2.0).unwrap());
        assert!((m.eval(Point::origin()) - 0.87890625).abs() < 1e-15);
        assert_eq!(m.eval(Point::new(1.2, 0.0)), 0.0);
        assert_eq!(m.grad(Point::new(0.0, -1.5)), Point::origin());
        let p = Point::new(0.3, -0.45);
        let h = 1e-6;
        let g = m.grad(p);
        let fx = (m.eval(Point::new(p.x + h, p.y)) - m.eval(Point::new(p.x - h, p.y))) / (2.0 * h);
        let fy = (m.eval(Point::new(p.x, p.y + h)) - m.eval(Point::new(p.x, p.y - h))) / (2.0 * h);
        assert!((g.x - fx).abs() < 1e-6 * g.x.abs() && (g.y - fy).abs() < 1e-6 * g.y.abs());
    }

    #[test]
    fn f32_mollifier() {
        let m = Mollifier1D::<f32>::bspline(2, 1.0).unwrap();
        assert!((m.moments(0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(Mollifier1D::quartic(0.0).is_err());
        assert!(Mollifier1D::quartic(f64::NAN).is_err());
    }
}
