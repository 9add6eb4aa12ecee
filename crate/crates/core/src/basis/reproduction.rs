use super::CellBasis;
use crate::mollifier::Mollifier1D;
use crate::poly::{binomial, Poly1, Poly2};
use crate::Real;

/// Upper triangular map `g -> m * g` on monomial coefficients of degree
/// `< n`: `m * x^k = Σ_j C(k, j) (-1)^j m_j x^(k-j)`.
fn moment_map<T: Real>(m: &Mollifier1D<T>, n: usize) -> Vec<Vec<T>> {
    let moments: Vec<T> = (0..n).map(|s| m.moments(s)).collect();
    let mut a = vec![vec![T::zero(); n]; n];
    for k in 0..n {
        for i in 0..=k {
            let j = k - i;
            let sign = if j % 2 == 1 { -T::one() } else { T::one() };
            a[i][k] = T::lit(binomial(k, j)) * sign * moments[j];
        }
        a[k][k] = T::one();
    }
    a
}

fn back_substitute<T: Real>(a: &[Vec<T>], rhs: &[T]) -> Vec<T> {
    let n = rhs.len();
    let mut g = rhs.to_vec();
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let t = a[i][k] * g[k];
            g[i] -= t;
        }
    }
    g
}

/// Polynomial `g` with `m * g = target`.
pub fn reproduction_coefficients<T: Real>(target: &Poly1<T>, m: &Mollifier1D<T>) -> Poly1<T> {
    let n = target.coeffs.len();
    Poly1::new(back_substitute(&moment_map(m, n), &target.coeffs))
}

/// Bivariate version for the tensor-product mollifier `m(x) m(y)`.
pub fn reproduction_coefficients_2d<T: Real>(target: &Poly2<T>, m: &Mollifier1D<T>) -> Poly2<T> {
    let n = target.degree() + 1;
    let a = moment_map(m, n);
    let inv: Vec<Vec<T>> = (0..n)
        .map(|k| {
            let mut e = vec![T::zero(); n];
            e[k] = T::one();
            back_substitute(&a, &e)
        })
        .collect();
    // inv[k][i] is row i of column k of the inverse
    let mut g = Poly2::new();
    for (&(i, j), c) in &target.terms {
        for (ia, ca) in inv[i].iter().enumerate() {
            for (jb, cb) in inv[j].iter().enumerate() {
                let v = *c * *ca * *cb;
                if v != T::zero() {
                    g.add_term((ia, jb), v);
                }
            }
        }
    }
    g
}

/// Coefficients of `g` in the scaled monomials of `cb`. Terms above the
/// cell degree are dropped, so `g` should not exceed it.
pub fn local_coefficients_1d<T: Real>(g: &Poly1<T>, cb: &CellBasis<T>) -> Vec<T> {
    let local = g.compose_affine(cb.center.x, cb.scale * T::lit(0.5));
    (0..cb.len()).map(|k| local.coeffs.get(k).copied().unwrap_or_else(T::zero)).collect()
}

/// Coefficients of `g` in the scaled monomials of `cb`, in basis order.
pub fn local_coefficients_2d<T: Real>(g: &Poly2<T>, cb: &CellBasis<T>) -> Vec<T> {
    let local = g.shift_scale(cb.center.x, cb.center.y, cb.scale * T::lit(0.5));
    cb.exponents().iter().map(|e| local.coeff(*e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mollify(m: &Mollifier1D<f64>, g: &Poly1<f64>, x: f64) -> f64 {
        let hw = m.halfwidth();
        let n = 20000;
        let h = 2.0 * hw / n as f64;
        // composite Simpson, kinks of the B-spline fall on grid nodes
        let f = |z: f64| m.eval(z) * g.eval(x - z);
        let mut s = f(-hw) + f(hw);
        for k in 1..n {
            s += f(-hw + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn low_degree_terms_unchanged() {
        let m = Mollifier1D::<f64>::quartic(0.4).unwrap();
        let t = Poly1::new(vec![0.3, -1.2]);
        assert_eq!(reproduction_coefficients(&t, &m), t);
        let g = reproduction_coefficients(&Poly1::monomial(2), &m);
        assert!((g.coeffs[0] + m.moments(2)).abs() < 1e-15);
        assert!(g.coeffs[1].abs() < 1e-15 && (g.coeffs[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_is_reproduced_after_mollification() {
        for m in [Mollifier1D::<f64>::bspline(1, 0.5).unwrap(), Mollifier1D::<f64>::bspline(2, 0.5).unwrap(), Mollifier1D::<f64>::quartic(0.5).unwrap()] {
            let target = Poly1::new(vec![0.2, -0.7, 1.1, 2.0]);
            let g = reproduction_coefficients(&target, &m);
            for x in [-0.4, 0.0, 0.3, 1.7] {
                assert!((mollify(&m, &g, x) - target.eval(x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bivariate_is_tensor_inverse() {
        let m = Mollifier1D::<f64>::bspline(2, 0.6).unwrap();
        let target = Poly2::from_terms(&[((0, 0), 1.0), ((1, 1), 0.5), ((2, 0), -2.0), ((0, 2), 3.0), ((2, 1), 1.0)]);
        let g = reproduction_coefficients_2d(&target, &m);
        let m2 = m.moments(2);
        // m * (x² y) = (x² + m2) y
        assert!((g.coeff((0, 0)) - (1.0 + 2.0 * m2 - 3.0 * m2)).abs() < 1e-14);
        assert!((g.coeff((0, 1)) + m2).abs() < 1e-14);
        assert!((g.coeff((2, 1)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn local_coefficients_reexpand() {
        let cb = CellBasis::new_2d(0, crate::geometry::Point::new(0.3, -0.1), 0.2, 2);
        let g = Poly2::from_terms(&[((0, 0), 1.0), ((1, 0), 2.0), ((1, 1), -1.0), ((0, 2), 0.5)]);
        let c = local_coefficients_2d(&g, &cb);
        let p = crate::geometry::Point::new(0.41, 0.05);
        let mono = cb.monomials(p);
        let v: f64 = c.iter().zip(&mono.values).map(|(a, b)| a * b).sum();
        assert!((v - g.eval(p.x, p.y)).abs() < 1e-13);
    }
}
