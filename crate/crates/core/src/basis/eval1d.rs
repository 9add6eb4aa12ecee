use super::{BasisValue, CellBasis};
use crate::mollifier::Mollifier1D;
use crate::quadrature::gauss_interval;
use crate::Real;

/// Closed interval `[a, b]`, a one-dimensional cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> Interval<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a: a.min(b), b: a.max(b) }
    }

    pub fn len(&self) -> T {
        self.b - self.a
    }

    pub fn midpoint(&self) -> T {
        (self.a + self.b) * T::lit(0.5)
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.a && x <= self.b
    }
}

/// Support of the mollified basis of `cell`.
pub fn support_1d<T: Real>(cell: &Interval<T>, m: &Mollifier1D<T>) -> Interval<T> {
    Interval::new(cell.a - m.halfwidth(), cell.b + m.halfwidth())
}

/// `N_k(x) = ∫_cell m(x - y) ξ(y)^k dy` and its derivative, integrated
/// piecewise between the translated mollifier breakpoints.
pub fn eval_1d<T: Real>(cb: &CellBasis<T>, cell: &Interval<T>, m: &Mollifier1D<T>, x: T) -> BasisValue<T> {
    let n = cb.len();
    let mut out = BasisValue::zeros(n);
    let lo = cell.a.max(x - m.halfwidth());
    let hi = cell.b.min(x + m.halfwidth());
    if !(hi > lo) {
        return out;
    }
    let mut cuts: Vec<T> = vec![lo, hi];
    cuts.extend(m.breakpoints().into_iter().map(|b| x - b).filter(|y| *y > lo && *y < hi));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    let rule = gauss_interval::<T>((m.degree() + cb.degree) / 2 + 1).expect("gauss rule");
    let s = T::lit(2.0) / cb.scale;
    let c = cb.center.x;
    let half = T::lit(0.5);
    for w in cuts.windows(2) {
        let (mid, hl) = ((w[0] + w[1]) * half, (w[1] - w[0]) * half);
        for (q, wq) in rule.points.iter().zip(&rule.weights) {
            let y = mid + hl * q[0];
            let (mv, md) = (m.eval(x - y), m.deriv(x - y, 1));
            let xi = (y - c) * s;
            let mut pk = *wq * hl;
            for k in 0..n {
                out.values[k] += mv * pk;
                out.grads[k][0] += md * pk;
                pk *= xi;
            }
        }
    }
    out
}
