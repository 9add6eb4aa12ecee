use super::FemError;
use crate::geometry::Point;
use crate::Real;

/// Isotropic plane-stress material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material<T> {
    pub young: T,
    pub poisson: T,
}

impl<T: Real> Material<T> {
    pub fn new(young: T, poisson: T) -> Result<Self, FemError> {
        if !(young > T::zero()) || poisson < T::zero() || poisson >= T::lit(0.5) {
            return Err(FemError::InvalidConfig("material requires E > 0 and 0 <= nu < 0.5".into()));
        }
        Ok(Self { young, poisson })
    }

    /// Plane-stress Lamé pair `(λ', μ)`.
    pub fn lame(&self) -> (T, T) {
        let (e, nu) = (self.young, self.poisson);
        (e * nu / (T::one() - nu * nu), e / (T::lit(2.0) * (T::one() + nu)))
    }

    /// Stress `[σxx, σyy, σxy]` of a displacement gradient (`grad[c]` is `∇u_c`).
    pub fn stress(&self, grad: &[[T; 2]; 2]) -> [T; 3] {
        let (l, mu) = self.lame();
        let div = grad[0][0] + grad[1][1];
        let two = T::lit(2.0);
        [l * div + two * mu * grad[0][0], l * div + two * mu * grad[1][1], mu * (grad[0][1] + grad[1][0])]
    }

    /// `σ : ε` for a displacement gradient.
    pub fn energy_density(&self, grad: &[[T; 2]; 2]) -> T {
        let s = self.stress(grad);
        s[0] * grad[0][0] + s[1] * grad[1][1] + s[2] * (grad[0][1] + grad[1][0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind<T> {
    Poisson,
    Elasticity(Material<T>),
}

impl<T: Real> ProblemKind<T> {
    pub fn components(&self) -> usize {
        match self {
            Self::Poisson => 1,
            Self::Elasticity(_) => 2,
        }
    }
}

/// Manufactured and closed-form solutions used by the studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSolution<T> {
    /// `sin(3πx)` on the unit interval.
    Sin1d,
    /// `sin(πx) sin(πy)`.
    Sin2d,
    /// A constant field.
    Constant(T),
    /// `x + 2y`.
    PatchLinear,
    /// `x + 2y + x² + 2xy + y²`.
    PatchQuadratic,
    /// Infinite plate with a circular hole at the origin under remote
    /// vertical tension `sigma`.
    PlateHole { radius: T, sigma: T, material: Material<T> },
}

impl<T: Real> ExactSolution<T> {
    pub fn from_name(name: &str) -> Result<Self, FemError> {
        Ok(match name {
            "sin1d" => Self::Sin1d,
            "sin2d" => Self::Sin2d,
            "patch_linear" => Self::PatchLinear,
            "patch_quadratic" => Self::PatchQuadratic,
            "plate_hole" => Self::plate_hole(),
            _ => return Err(FemError::UnknownSolution(name.to_string())),
        })
    }

    /// Hole radius 0.25, `σ∞ = 1e6`, `E = 70e6`, `ν = 0.3`.
    pub fn plate_hole() -> Self {
        Self::PlateHole {
            radius: T::lit(0.25),
            sigma: T::lit(1e6),
            material: Material { young: T::lit(70e6), poisson: T::lit(0.3) },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sin1d => "sin1d",
            Self::Sin2d => "sin2d",
            Self::Constant(_) => "constant",
            Self::PatchLinear => "patch_linear",
            Self::PatchQuadratic => "patch_quadratic",
            Self::PlateHole { .. } => "plate_hole",
        }
    }

    pub fn kind(&self) -> ProblemKind<T> {
        match self {
            Self::PlateHole { material, .. } => ProblemKind::Elasticity(*material),
            _ => ProblemKind::Poisson,
        }
    }

    /// Solution components (second entry zero for scalar problems).
    pub fn value(&self, p: Point<T>) -> [T; 2] {
        self.eval(p).0
    }

    /// Gradients of the components, `grad[c] = ∇u_c`.
    pub fn grad(&self, p: Point<T>) -> [[T; 2]; 2] {
        self.eval(p).1
    }

    /// Source `-Δu` for Poisson, body force `-div σ` for elasticity.
    pub fn source(&self, p: Point<T>) -> [T; 2] {
        let z = T::zero();
        let pi = T::PI();
        match self {
            Self::Sin1d => [T::lit(9.0) * pi * pi * (T::lit(3.0) * pi * p.x).sin(), z],
            Self::Sin2d => [T::lit(2.0) * pi * pi * (pi * p.x).sin() * (pi * p.y).sin(), z],
            Self::Constant(_) | Self::PatchLinear => [z, z],
            Self::PatchQuadratic => [T::lit(-4.0), z],
            Self::PlateHole { .. } => [z, z],
        }
    }

    fn eval(&self, p: Point<T>) -> ([T; 2], [[T; 2]; 2]) {
        let z = T::zero();
        let (one, two) = (T::one(), T::lit(2.0));
        let pi = T::PI();
        match self {
            Self::Sin1d => {
                let k = T::lit(3.0) * pi;
                ([(k * p.x).sin(), z], [[k * (k * p.x).cos(), z], [z, z]])
            }
            Self::Sin2d => {
                let (sx, cx) = (pi * p.x).sin_cos();
                let (sy, cy) = (pi * p.y).sin_cos();
                ([sx * sy, z], [[pi * cx * sy, pi * sx * cy], [z, z]])
            }
            Self::Constant(c) => ([*c, z], [[z, z], [z, z]]),
            Self::PatchLinear => ([p.x + two * p.y, z], [[one, two], [z, z]]),
            Self::PatchQuadratic => {
                let (x, y) = (p.x, p.y);
                let u = x + two * y + x * x + two * x * y + y * y;
                ([u, z], [[one + two * x + two * y, two + two * x + two * y], [z, z]])
            }
            Self::PlateHole { radius, sigma, material } => kirsch_displacement(p, *radius, *sigma, material),
        }
    }

    /// Traction `σ n` (elasticity) or flux `n · ∇u` (first entry, Poisson).
    pub fn traction(&self, p: Point<T>, n: Point<T>) -> [T; 2] {
        let g = self.grad(p);
        match self.kind() {
            ProblemKind::Poisson => [g[0][0] * n.x + g[0][1] * n.y, T::zero()],
            ProblemKind::Elasticity(m) => {
                let s = m.stress(&g);
                [s[0] * n.x + s[2] * n.y, s[2] * n.x + s[1] * n.y]
            }
        }
    }
}

/// Value and gradient of `r^k cos(nθ)` (`sine = false`) or `r^k sin(nθ)`.
fn polar_term<T: Real>(r: T, c: T, s: T, theta: T, k: i32, n: T, sine: bool) -> (T, [T; 2]) {
    let kk = T::lit(k as f64);
    let rk1 = r.powi(k - 1);
    let (sn, cn) = (n * theta).sin_cos();
    if sine {
        (rk1 * r * sn, [rk1 * (kk * c * sn - n * s * cn), rk1 * (kk * s * sn + n * c * cn)])
    } else {
        (rk1 * r * cn, [rk1 * (kk * c * cn + n * s * sn), rk1 * (kk * s * cn - n * c * sn)])
    }
}

/// Kirsch displacement for remote tension along `x` in plane stress.
fn kirsch_x<T: Real>(p: Point<T>, radius: T, sigma: T, mat: &Material<T>) -> ([T; 2], [[T; 2]; 2]) {
    let nu = mat.poisson;
    let (_, mu) = mat.lame();
    let kappa = (T::lit(3.0) - nu) / (T::one() + nu);
    let r = p.norm();
    let theta = p.y.atan2(p.x);
    let (c, s) = (p.x / r, p.y / r);
    let big = radius;
    let two = T::lit(2.0);
    let (one_n, three_n) = (T::one(), T::lit(3.0));
    let ux_terms = [
        ((kappa + T::one()) / big, 1, one_n),
        (two * big * (T::one() + kappa), -1, one_n),
        (two * big, -1, three_n),
        (-two * big * big * big, -3, three_n),
    ];
    let uy_terms = [
        ((kappa - three_n) / big, 1, one_n),
        (two * big * (T::one() - kappa), -1, one_n),
        (two * big, -1, three_n),
        (-two * big * big * big, -3, three_n),
    ];
    let f = sigma * big / (T::lit(8.0) * mu);
    let mut u = [T::zero(); 2];
    let mut g = [[T::zero(); 2]; 2];
    for (comp, terms, sine) in [(0, &ux_terms, false), (1, &uy_terms, true)] {
        for &(coef, k, n) in terms.iter() {
            let (v, d) = polar_term(r, c, s, theta, k, n, sine);
            u[comp] += f * coef * v;
            g[comp][0] += f * coef * d[0];
            g[comp][1] += f * coef * d[1];
        }
    }
    (u, g)
}

/// Kirsch displacement for remote tension along `y`: the `x` solution in a
/// frame rotated by a quarter turn.
fn kirsch_displacement<T: Real>(p: Point<T>, radius: T, sigma: T, mat: &Material<T>) -> ([T; 2], [[T; 2]; 2]) {
    // x' = y, y' = -x; u_x = -u'_y, u_y = u'_x; ∂x = -∂y', ∂y = ∂x'
    let (u, g) = kirsch_x(Point::new(p.y, -p.x), radius, sigma, mat);
    ([-u[1], u[0]], [[g[1][1], -g[1][0]], [-g[0][1], g[0][0]]])
}

/// Closed-form Kirsch stresses `[σxx, σyy, σxy]` for remote vertical tension.
pub fn kirsch_stress<T: Real>(p: Point<T>, radius: T, sigma: T) -> [T; 3] {
    let r = p.norm();
    let (c, s) = (p.x / r, p.y / r);
    let (cos2, sin2) = (c * c - s * s, T::lit(2.0) * s * c);
    // vertical load: θ measured from the load axis shifts by a quarter turn
    let (cos2, sin2) = (-cos2, -sin2);
    let q2 = (radius / r).powi(2);
    let q4 = q2 * q2;
    let half = sigma * T::lit(0.5);
    let one = T::one();
    let srr = half * (one - q2) + half * (one - T::lit(4.0) * q2 + T::lit(3.0) * q4) * cos2;
    let stt = half * (one + q2) - half * (one + T::lit(3.0) * q4) * cos2;
    let srt = -half * (one + T::lit(2.0) * q2 - T::lit(3.0) * q4) * sin2;
    [
        srr * c * c + stt * s * s - T::lit(2.0) * srt * c * s,
        srr * s * s + stt * c * c + T::lit(2.0) * srt * c * s,
        (srr - stt) * c * s + srt * (c * c - s * s),
    ]
}

/// Boundary value problem: an exact solution supplies source and boundary
/// data. The boundary is Dirichlet unless `neumann` selects a point.
#[derive(Debug, Clone, Copy)]
pub struct Problem<T> {
    pub kind: ProblemKind<T>,
    pub exact: ExactSolution<T>,
    pub neumann: Option<fn(Point<T>) -> bool>,
}

impl<T: Real> Problem<T> {
    pub fn dirichlet(exact: ExactSolution<T>) -> Self {
        Self { kind: exact.kind(), exact, neumann: None }
    }

    pub fn is_neumann(&self, p: Point<T>) -> bool {
        self.neumann.is_some_and(|f| f(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(e: &ExactSolution<f64>, p: Point<f64>) -> [[f64; 2]; 2] {
        let h = 1e-6;
        let mut g = [[0.0; 2]; 2];
        for (d, off) in [Point::new(h, 0.0), Point::new(0.0, h)].into_iter().enumerate() {
            let a = e.value(p + off);
            let b = e.value(p - off);
            for c in 0..2 {
                g[c][d] = (a[c] - b[c]) / (2.0 * h);
            }
        }
        g
    }

    #[test]
    fn gradients_match_differences() {
        let p = Point::new(0.37, 0.61);
        for name in ["sin1d", "sin2d", "patch_linear", "patch_quadratic", "plate_hole"] {
            let e = ExactSolution::<f64>::from_name(name).unwrap();
            let g = e.grad(p);
            let f = fd_grad(&e, p);
            let scale = g.iter().flatten().fold(1e-30f64, |a, v| a.max(v.abs()));
            for c in 0..2 {
                for d in 0..2 {
                    assert!((g[c][d] - f[c][d]).abs() <= 1e-7 * scale, "{name} {c} {d}");
                }
            }
        }
        assert!(ExactSolution::<f64>::from_name("bunny").is_err());
    }

    #[test]
    fn sin1d_source() {
        let e = ExactSolution::<f64>::Sin1d;
        let x = 0.23;
        let pi = std::f64::consts::PI;
        assert!((e.source(Point::new(x, 0.0))[0] - 9.0 * pi * pi * (3.0 * pi * x).sin()).abs() < 1e-12);
    }

    #[test]
    fn kirsch_displacement_matches_closed_form_stress() {
        let e = ExactSolution::<f64>::plate_hole();
        let ExactSolution::PlateHole { radius, sigma, material } = e else { unreachable!() };
        for p in [Point::new(0.3, 0.1), Point::new(0.5, 0.7), Point::new(0.02, 0.9), Point::new(1.0, 1.0)] {
            let s = material.stress(&e.grad(p));
            let k = kirsch_stress(p, radius, sigma);
            for i in 0..3 {
                assert!((s[i] - k[i]).abs() < 1e-6 * sigma, "{p:?} {i} {} {}", s[i], k[i]);
            }
        }
        // concentration factor 3 at the equator of the hole
        let eq = kirsch_stress(Point::new(radius, 0.0), radius, sigma);
        assert!((eq[1] - 3.0 * sigma).abs() < 1e-9 * sigma);
        // traction-free hole and far field
        let q = Point::new(radius * 0.6, radius * 0.8);
        let t = e.traction(q, q * (-1.0 / radius));
        assert!(t[0].abs() < 1e-6 * sigma && t[1].abs() < 1e-6 * sigma);
        let far = kirsch_stress(Point::new(300.0, 400.0), radius, sigma);
        assert!((far[1] - sigma).abs() < 1e-5 * sigma && far[0].abs() < 1e-5 * sigma);
    }

    #[test]
    fn material_validation() {
        assert!(Material::new(1.0, 0.5).is_err());
        assert!(Material::new(-1.0, 0.2).is_err());
        let m = Material::<f64>::new(70e6, 0.3).unwrap();
        let (l, mu) = m.lame();
        assert!((l - 70e6 * 0.3 / 0.91).abs() < 1e-6 && (mu - 70e6 / 2.6).abs() < 1e-6);
    }
}
