//! Cylindrical adjustments of the cusp metric and the capped metrics that
//! close the cusp off to a solid torus.
//!
//! Everything here lives in cusp coordinates `(a, x, y)` with `z = e^a`, in
//! which the hyperbolic metric reads `da² + e^{−2a}(dx² + dy²)`. Metrics are
//! returned as 3×3 matrices in that coordinate order.

use nalgebra::{Matrix3, Vector3};
use quadrature::double_exponential;

use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-15;

/// The smooth step `τ₀,₁`: 1 for `u ≤ 0`, 0 for `u ≥ 1`.
pub fn tau01(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        1.0 / (1.0 + (1.0 / (1.0 - u) - 1.0 / u).exp())
    }
}

/// Derivative of [`tau01`].
pub fn tau01_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let phi = 1.0 / (1.0 - u) - 1.0 / u;
    let dphi = 1.0 / (1.0 - u).powi(2) + 1.0 / (u * u);
    // τ(1 − τ) without cancellation
    let t1t = 1.0 / (2.0 + phi.exp() + (-phi).exp());
    -t1t * dphi
}

/// `τ_{lo,hi}(t) = τ₀,₁((t − lo)/(hi − lo))`.
pub fn tau(lo: f64, hi: f64, t: f64) -> f64 {
    tau01((t - lo) / (hi - lo))
}

pub fn tau_prime(lo: f64, hi: f64, t: f64) -> f64 {
    tau01_prime((t - lo) / (hi - lo)) / (hi - lo)
}

/// `E(s) = 1 + e^{−1/s}` for `s > 0`, extended by 1.
pub fn bump_e(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else {
        1.0 + (-1.0 / s).exp()
    }
}

pub fn bump_e_prime(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp() / (s * s)
    }
}

/// The bump `A_{i,ε}` and its derivative, for a real level `i`.
fn bump_a(i: f64, eps: f64, t: f64) -> (f64, f64) {
    if t <= i - 0.5 {
        return (1.0, 0.0);
    }
    if t >= i {
        return (0.0, 0.0);
    }
    let s = t - i + 0.5;
    let (e, de) = (bump_e(s), bump_e_prime(s));
    if t <= i - eps {
        (e, de)
    } else {
        let (tv, dt) = (tau(i - eps, i, t), tau_prime(i - eps, i, t));
        (e * tv, de * tv + e * dt)
    }
}

/// `∫ A_{i,ε}` over `[i − ½, upper]`, split where the cut-off starts.
fn bump_integral(i: f64, eps: f64, upper: f64) -> f64 {
    let lo = i - 0.5;
    let upper = upper.min(i);
    if upper <= lo {
        return 0.0;
    }
    let f = |t: f64| bump_a(i, eps, t).0;
    let cut = (i - eps).max(lo);
    if upper <= cut {
        return double_exponential::integrate(f, lo, upper, QUAD_TOL).integral;
    }
    let head = if cut > lo {
        double_exponential::integrate(f, lo, cut, QUAD_TOL).integral
    } else {
        0.0
    };
    head + double_exponential::integrate(f, cut, upper, QUAD_TOL).integral
}

/// Solves `∫₀^i A_{i,ε} = i` for ε by bisection on `(0, 1)`. The answer does
/// not depend on `i`.
pub fn find_epsilon0() -> Result<f64> {
    let excess = |eps: f64| bump_integral(1.0, eps, 1.0) - 0.5;
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    let (flo, fhi) = (excess(lo), excess(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::Bisection(format!(
            "no sign change: F({lo}) = {flo}, F({hi}) = {fhi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hyperbolic metric in `(a, x, y)`.
pub fn hyperbolic_metric(a: f64) -> Matrix3<f64> {
    let w = (-2.0 * a).exp();
    Matrix3::from_diagonal(&Vector3::new(1.0, w, w))
}

/// Product metric `da² + e^{−2c}(dx² + dy²)`.
pub fn cylinder_metric(c: f64) -> Matrix3<f64> {
    hyperbolic_metric(c)
}

/// The cylindrical adjustment `h_i = da² + ρ_i²(dx² + dy²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylMetric {
    pub level: u32,
    pub eps0: f64,
}

impl CylMetric {
    pub fn new(level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidParams("level must be ≥ 1".into()));
        }
        Ok(Self { level, eps0: find_epsilon0()? })
    }

    /// Same as [`CylMetric::new`] with a precomputed ε₀.
    pub fn with_eps(level: u32, eps0: f64) -> Self {
        Self { level, eps0 }
    }

    fn i(&self) -> f64 {
        self.level as f64
    }

    pub fn bump(&self, t: f64) -> f64 {
        bump_a(self.i(), self.eps0, t).0
    }

    pub fn bump_prime(&self, t: f64) -> f64 {
        bump_a(self.i(), self.eps0, t).1
    }

    /// `B_i(a) = ∫₀^a A`, exactly `a` below `i − ½` and exactly `i` from `i` on.
    pub fn b(&self, a: f64) -> f64 {
        let i = self.i();
        if a <= i - 0.5 {
            a
        } else if a >= i {
            i
        } else {
            i - 0.5 + bump_integral(i, self.eps0, a)
        }
    }

    pub fn rho(&self, a: f64) -> f64 {
        (-self.b(a)).exp()
    }

    pub fn rho_prime(&self, a: f64) -> f64 {
        -self.bump(a) * self.rho(a)
    }

    pub fn rho_second(&self, a: f64) -> f64 {
        let (v, d) = bump_a(self.i(), self.eps0, a);
        (v * v - d) * self.rho(a)
    }

    /// `K(∂x, ∂y) = −(ρ′/ρ)²`.
    pub fn curvature_xy(&self, a: f64) -> f64 {
        -self.bump(a).powi(2)
    }

    /// `K(∂a, ∂x) = K(∂a, ∂y) = −ρ″/ρ`.
    pub fn curvature_ax(&self, a: f64) -> f64 {
        let (v, d) = bump_a(self.i(), self.eps0, a);
        -(v * v - d)
    }

    pub fn metric(&self, a: f64) -> Matrix3<f64> {
        let r2 = self.rho(a).powi(2);
        Matrix3::from_diagonal(&Vector3::new(1.0, r2, r2))
    }
}

/// The capped metric `g[i]`, which agrees with `h_i` on `a ≤ i` and is
/// `e^{−2a}da² + e^{−2a}dx² + e^{−2i}dy²` from `a = i + ¼` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedMetric {
    pub cyl: CylMetric,
}

impl CappedMetric {
    pub fn new(level: u32) -> Result<Self> {
        Ok(Self { cyl: CylMetric::new(level)? })
    }

    pub fn with_eps(level: u32, eps0: f64) -> Self {
        Self { cyl: CylMetric::with_eps(level, eps0) }
    }

    pub fn level(&self) -> u32 {
        self.cyl.level
    }

    fn cap(&self, a: f64) -> Matrix3<f64> {
        let i = self.cyl.level as f64;
        let w = (-2.0 * a).exp();
        Matrix3::from_diagonal(&Vector3::new(w, w, (-2.0 * i).exp()))
    }

    pub fn metric(&self, a: f64) -> Matrix3<f64> {
        let i = self.cyl.level as f64;
        if a <= i {
            return self.cyl.metric(a);
        }
        if a >= i + 0.25 {
            return self.cap(a);
        }
        let s = 1.0 - tau(i, i + 0.25, a);
        self.cyl.metric(a) * (1.0 - s) + self.cap(a) * s
    }

    /// `g[i]_j`: equal to `g[i]` up to `a = i + j − ½` and to the product
    /// metric at level `i + j` from `a = i + j` on. `j = 0` gives `h_i`.
    pub fn adjusted(&self, j: u32, a: f64) -> Matrix3<f64> {
        if j == 0 {
            return self.cyl.metric(a);
        }
        let top = (self.cyl.level + j) as f64;
        if a <= top - 0.5 {
            return self.metric(a);
        }
        let flat = cylinder_metric(top);
        if a >= top {
            return flat;
        }
        let s = 1.0 - tau(top - 0.5, top, a);
        self.metric(a) * (1.0 - s) + flat * s
    }
}

/// Translation part of the cusp holonomy with the meridian along `x`:
/// `m = (m1, 0)`, `l = (l1, l2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspShape {
    pub m1: f64,
    pub l1: f64,
    pub l2: f64,
}

impl CuspShape {
    pub fn figure_eight() -> Self {
        Self { m1: 1.0, l1: 0.0, l2: 2.0 * 3f64.sqrt() }
    }
}

/// Pulls a metric given in `(a, x, y)` back along
/// `(z, x, y) = (1/r, m1 θ/2π + l1 φ/2π, l2 φ/2π)`; the result is in
/// `(r, θ, φ)`.
pub fn polar_pullback<F>(metric: F, shape: &CuspShape, r: f64) -> Matrix3<f64>
where
    F: Fn(f64) -> Matrix3<f64>,
{
    let two_pi = 2.0 * std::f64::consts::PI;
    let a = -r.ln();
    let mut jac = Matrix3::zeros();
    jac[(0, 0)] = -1.0 / r;
    jac[(1, 1)] = shape.m1 / two_pi;
    jac[(1, 2)] = shape.l1 / two_pi;
    jac[(2, 2)] = shape.l2 / two_pi;
    jac.transpose() * metric(a) * jac
}

/// `g1(v, v) − g2(v, v)`; nonnegative when `g1 ≥ g2` in direction `v`.
pub fn quad_gap(g1: &Matrix3<f64>, g2: &Matrix3<f64>, v: &Vector3<f64>) -> f64 {
    (v.transpose() * (g1 - g2) * v)[(0, 0)]
}

/// Smallest value of `g1(v,v) − g2(v,v)` over the sample set, with the `a` and
/// `v` where it occurs.
pub fn worst_gap<F1, F2>(g1: F1, g2: F2, samples: &[(f64, Vector3<f64>)]) -> (f64, f64, Vector3<f64>)
where
    F1: Fn(f64) -> Matrix3<f64>,
    F2: Fn(f64) -> Matrix3<f64>,
{
    let mut worst = (f64::INFINITY, 0.0, Vector3::zeros());
    for (a, v) in samples {
        let gap = quad_gap(&g1(*a), &g2(*a), v);
        if gap < worst.0 {
            worst = (gap, *a, *v);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{fd_christoffel, fd_riemann, sectional_curvature};

    #[test]
    fn epsilon_is_in_range() {
        let e = find_epsilon0().unwrap();
        assert!(e > 0.0 && e < 0.5, "{e}");
        let excess = bump_integral(3.0, e, 3.0) - 0.5;
        assert!(excess.abs() < 1e-12, "{excess}");
    }

    #[test]
    fn regimes() {
        let h = CylMetric::new(3).unwrap();
        assert_eq!(h.rho(2.0), (-2.0f64).exp());
        assert_eq!(h.rho(8.0), (-3.0f64).exp());
        assert!((h.rho(2.999_999) - (-3.0f64).exp()).abs() < 1e-12);
        assert_eq!(h.curvature_xy(1.0), -1.0);
        assert_eq!(h.curvature_ax(1.0), -1.0);
    }

    #[test]
    fn derivatives_match_differences() {
        let h = CylMetric::new(2).unwrap();
        let step = 1e-5;
        for k in 0..40 {
            let a = 1.45 + k as f64 * 0.0145;
            let fd1 = (h.rho(a + step) - h.rho(a - step)) / (2.0 * step);
            let fd2 = (h.rho(a + step) - 2.0 * h.rho(a) + h.rho(a - step)) / (step * step);
            assert!((fd1 - h.rho_prime(a)).abs() < 1e-6, "a={a}");
            assert!((fd2 - h.rho_second(a)).abs() < 1e-3 * (1.0 + h.rho_second(a).abs()), "a={a}");
        }
    }

    #[test]
    fn curvature_formulas_against_differences() {
        let h = CylMetric::new(1).unwrap();
        let g = |q: &Vector3<f64>| h.metric(q[0]);
        for a in [0.2, 0.6, 0.75, 0.9, 0.95, 1.3] {
            let q = Vector3::new(a, 0.3, -0.1);
            let step = 2e-4;
            let r = fd_riemann(|p| fd_christoffel(g, p, step), &q, step);
            let (ea, ex, ey) = (Vector3::x(), Vector3::y(), Vector3::z());
            let kxy = sectional_curvature(&r, &g(&q), &ex, &ey);
            let kax = sectional_curvature(&r, &g(&q), &ea, &ex);
            assert!((kxy - h.curvature_xy(a)).abs() < 1e-4 * (1.0 + kxy.abs()), "a={a}");
            assert!((kax - h.curvature_ax(a)).abs() < 2e-3 * (1.0 + kax.abs()), "a={a}: {kax}");
        }
    }

    #[test]
    fn capped_branches() {
        let g = CappedMetric::new(2).unwrap();
        assert_eq!(g.metric(1.7), g.cyl.metric(1.7));
        let far = g.metric(4.0);
        assert_eq!(far[(0, 0)], (-8.0f64).exp());
        assert_eq!(far[(2, 2)], (-4.0f64).exp());
        assert_eq!(g.adjusted(0, 1.8), g.cyl.metric(1.8));
        assert_eq!(g.adjusted(2, 3.2), g.metric(3.2));
        assert_eq!(g.adjusted(2, 5.0), cylinder_metric(4.0));
        for k in 0..100 {
            let a = 1.0 + k as f64 * 0.04;
            let m = g.adjusted(1, a);
            assert!(m.symmetric_eigenvalues().min() > 0.0);
        }
    }

    #[test]
    fn pullback_is_bounded_near_core() {
        let g = CappedMetric::new(1).unwrap();
        let shape = CuspShape::figure_eight();
        let at = |r: f64| polar_pullback(|a| g.metric(a), &shape, r);
        let m = at(1e-6);
        assert!((m[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(m.iter().all(|v| v.is_finite() && v.abs() < 10.0));
        assert!((at(1e-9)[(2, 2)] - at(1e-6)[(2, 2)]).abs() < 1e-9);
    }
}
