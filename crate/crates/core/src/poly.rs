//! Dense univariate and sparse bivariate polynomials with the handful of
//! operations the basis construction needs.

use std::collections::BTreeMap;

use crate::Real;

/// Univariate polynomial, `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly1<T> {
    pub coeffs: Vec<T>,
}

impl<T: Real> Poly1<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `a + b x`
    pub fn linear(a: T, b: T) -> Self {
        Self { coeffs: vec![a, b] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        horner(&self.coeffs, x)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(T::zero());
        }
        Self {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, c)| *c * T::from_usize_lossy(k)).collect(),
        }
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, c)| *c / T::from_usize_lossy(k + 1)));
        Self { coeffs }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::default();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] += *a * *b;
            }
        }
        Self { coeffs }
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &Vec<T>, k: usize| v.get(k).copied().unwrap_or_else(T::zero);
        Self { coeffs: (0..n).map(|k| get(&self.coeffs, k) + get(&o.coeffs, k)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    pub fn powi(&self, k: usize) -> Self {
        let mut out = Self::constant(T::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `p(a + b x)` expanded in powers of `x`.
    pub fn compose_affine(&self, a: T, b: T) -> Self {
        let inner = Self::linear(a, b);
        let mut out = Self::constant(T::zero());
        for c in self.coeffs.iter().rev() {
            out = out.mul(&inner).add(&Self::constant(*c));
        }
        out
    }

    /// `p(-x)`
    pub fn reflect(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -*c } else { *c }).collect(),
        }
    }
}

#[inline]
pub fn horner<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x + *c)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bivariate polynomial stored as `(i, j) -> coefficient of x^i y^j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2<T> {
    pub terms: BTreeMap<(usize, usize), T>,
}

impl<T: Real> Poly2<T> {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn from_terms(terms: &[((usize, usize), T)]) -> Self {
        let mut p = Self::new();
        for (e, c) in terms {
            p.add_term(*e, *c);
        }
        p
    }

    pub fn add_term(&mut self, e: (usize, usize), c: T) {
        *self.terms.entry(e).or_insert_with(T::zero) += c;
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, x: T, y: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, ((i, j), c)| acc + *c * x.powi(*i as i32) * y.powi(*j as i32))
    }

    pub fn grad(&self, x: T, y: T) -> [T; 2] {
        let mut g = [T::zero(); 2];
        for ((i, j), c) in &self.terms {
            if *i > 0 {
                g[0] += *c * T::from_usize_lossy(*i) * x.powi(*i as i32 - 1) * y.powi(*j as i32);
            }
            if *j > 0 {
                g[1] += *c * T::from_usize_lossy(*j) * x.powi(*i as i32) * y.powi(*j as i32 - 1);
            }
        }
        g
    }

    pub fn laplacian(&self, x: T, y: T) -> T {
        let mut s = T::zero();
        for ((i, j), c) in &self.terms {
            if *i > 1 {
                s += *c * T::from_usize_lossy(i * (i - 1)) * x.powi(*i as i32 - 2) * y.powi(*j as i32);
            }
            if *j > 1 {
                s += *c * T::from_usize_lossy(j * (j - 1)) * x.powi(*i as i32) * y.powi(*j as i32 - 2);
            }
        }
        s
    }

    /// Re-expands `p(x0 + s u, y0 + s v)` in powers of `(u, v)`.
    pub fn shift_scale(&self, x0: T, y0: T, s: T) -> Self {
        let mut out = Self::new();
        for ((i, j), c) in &self.terms {
            let px = Poly1::linear(x0, s).powi(*i);
            let py = Poly1::linear(y0, s).powi(*j);
            for (a, ca) in px.coeffs.iter().enumerate() {
                for (b, cb) in py.coeffs.iter().enumerate() {
                    out.add_term((a, b), *c * *ca * *cb);
                }
            }
        }
        out
    }

    pub fn coeff(&self, e: (usize, usize)) -> T {
        self.terms.get(&e).copied().unwrap_or_else(T::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calculus_roundtrip() {
        let p = Poly1::<f64>::new(vec![1.0, -2.0, 0.5, 3.0]);
        let q = p.antiderivative().derivative();
        for (a, b) in p.coeffs.iter().zip(&q.coeffs) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn affine_composition() {
        let p = Poly1::<f64>::new(vec![0.3, -1.0, 2.0, 0.7]);
        let q = p.compose_affine(0.4, -1.5);
        for x in [-1.0, 0.0, 0.3, 2.0] {
            assert!((q.eval(x) - p.eval(0.4 - 1.5 * x)).abs() < 1e-12);
        }
        let r = p.reflect();
        assert!((r.eval(0.6) - p.eval(-0.6)).abs() < 1e-15);
    }

    #[test]
    fn bivariate_shift() {
        let p = Poly2::<f64>::from_terms(&[((0, 0), 1.0), ((1, 0), 1.0), ((1, 1), 2.0), ((0, 2), -1.0)]);
        let q = p.shift_scale(0.3, -0.2, 0.5);
        for (u, v) in [(0.1, 0.4), (-1.0, 2.0)] {
            assert!((q.eval(u, v) - p.eval(0.3 + 0.5 * u, -0.2 + 0.5 * v)).abs() < 1e-14);
        }
        assert!((p.laplacian(0.0, 0.0) + 2.0).abs() < 1e-15);
    }
}
