//! Upper half-space primitives: metric, Levi-Civita connection, curvature,
//! distance, Busemann function and closed-form geodesics.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `gamma[a][i][j]` is the Christoffel symbol Γᵃᵢⱼ.
pub type Christoffel = [[[f64; 3]; 3]; 3];

/// `riem[a][b][i][j]` is Rᵃ_bij, so that R(∂ᵢ, ∂ⱼ)∂_b = Rᵃ_bij ∂ₐ.
pub type Riemann = [[[[f64; 3]; 3]; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointH3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PointH3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if z > 0.0 && z.is_finite() && x.is_finite() && y.is_finite() {
            Ok(Self { x, y, z })
        } else {
            Err(Error::InvalidPoint(z))
        }
    }

    pub fn from_vec(v: Vector3<f64>) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn vec(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Horizontal projection as a boundary coordinate.
    pub fn w(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// A point of the sphere at infinity ℂ ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ideal {
    Finite(Complex64),
    Infinity,
}

impl Ideal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Ideal::Infinity)
    }

    pub fn approx_eq(&self, other: &Ideal, tol: f64) -> bool {
        match (self, other) {
            (Ideal::Infinity, Ideal::Infinity) => true,
            (Ideal::Finite(a), Ideal::Finite(b)) => (a - b).norm() <= tol * (1.0 + a.norm()),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVec {
    pub base: PointH3,
    pub v: Vector3<f64>,
}

impl TangentVec {
    pub fn new(base: PointH3, v: Vector3<f64>) -> Self {
        Self { base, v }
    }

    pub fn norm(&self) -> f64 {
        self.v.norm() / self.base.z
    }

    pub fn inner(&self, other: &TangentVec) -> Result<f64> {
        same_base(self, other)?;
        Ok(self.v.dot(&other.v) / (self.base.z * self.base.z))
    }
}

fn same_base(a: &TangentVec, b: &TangentVec) -> Result<()> {
    if a.base == b.base {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

/// Metric and connection at a point.
#[derive(Clone, Copy, Debug)]
pub struct MetricData {
    pub g: Matrix3<f64>,
    pub gamma: Christoffel,
}

impl MetricData {
    pub fn at(q: &PointH3) -> Self {
        Self {
            g: metric_tensor(q),
            gamma: christoffel(q),
        }
    }
}

pub fn metric_tensor(q: &PointH3) -> Matrix3<f64> {
    Matrix3::identity() / (q.z * q.z)
}

pub fn christoffel(q: &PointH3) -> Christoffel {
    let k = 1.0 / q.z;
    let mut g = [[[0.0; 3]; 3]; 3];
    g[2][0][0] = k;
    g[2][1][1] = k;
    g[0][0][2] = -k;
    g[0][2][0] = -k;
    g[1][1][2] = -k;
    g[1][2][1] = -k;
    g[2][2][2] = -k;
    g
}

/// Γ(u, v)ᵃ = Γᵃᵢⱼ uⁱ vʲ.
pub fn contract(gamma: &Christoffel, u: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    let mut out = Vector3::zeros();
    for a in 0..3 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += gamma[a][i][j] * u[i] * v[j];
            }
        }
        out[a] = s;
    }
    out
}

/// R(X,Y)Z = ⟨Z,X⟩Y − ⟨Z,Y⟩X.
pub fn riemann(x: &TangentVec, y: &TangentVec, z: &TangentVec) -> Result<TangentVec> {
    same_base(x, y)?;
    same_base(x, z)?;
    let zx = z.inner(x)?;
    let zy = z.inner(y)?;
    Ok(TangentVec::new(x.base, y.v * zx - x.v * zy))
}

/// Levi-Civita symbols of an arbitrary coordinate metric by central differences.
pub fn fd_christoffel<F>(metric: F, q: &Vector3<f64>, step: f64) -> Christoffel
where
    F: Fn(&Vector3<f64>) -> Matrix3<f64>,
{
    let mut dg = [Matrix3::zeros(); 3];
    for (k, d) in dg.iter_mut().enumerate() {
        let mut e = Vector3::zeros();
        e[k] = step;
        *d = (metric(&(q + e)) - metric(&(q - e))) / (2.0 * step);
    }
    let ginv = metric(q).try_inverse().expect("metric must be invertible");
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for b in 0..3 {
                    s += ginv[(a, b)] * (dg[i][(b, j)] + dg[j][(b, i)] - dg[b][(i, j)]);
                }
                gamma[a][i][j] = 0.5 * s;
            }
        }
    }
    gamma
}

/// Riemann tensor from a connection by central differences of Γ.
pub fn fd_riemann<F>(gamma_at: F, q: &Vector3<f64>, step: f64) -> Riemann
where
    F: Fn(&Vector3<f64>) -> Christoffel,
{
    let g0 = gamma_at(q);
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3]; // dgam[k][a][i][j] = ∂ₖΓᵃᵢⱼ
    for k in 0..3 {
        let mut e = Vector3::zeros();
        e[k] = step;
        let gp = gamma_at(&(q + e));
        let gm = gamma_at(&(q - e));
        for a in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dgam[k][a][i][j] = (gp[a][i][j] - gm[a][i][j]) / (2.0 * step);
                }
            }
        }
    }
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = dgam[i][a][j][b] - dgam[j][a][i][b];
                    for e in 0..3 {
                        s += g0[a][i][e] * g0[e][j][b] - g0[a][j][e] * g0[e][i][b];
                    }
                    r[a][b][i][j] = s;
                }
            }
        }
    }
    r
}

/// ⟨R(X,Y)Y, X⟩ / (|X|²|Y|² − ⟨X,Y⟩²) for a tensor in the `Riemann` layout.
pub fn sectional_curvature(
    r: &Riemann,
    g: &Matrix3<f64>,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
) -> f64 {
    let mut ryy = Vector3::zeros();
    for a in 0..3 {
        let mut s = 0.0;
        for b in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    s += r[a][b][i][j] * y[b] * x[i] * y[j];
                }
            }
        }
        ryy[a] = s;
    }
    let ip = |u: &Vector3<f64>, v: &Vector3<f64>| (u.transpose() * g * v)[(0, 0)];
    ip(&ryy, x) / (ip(x, x) * ip(y, y) - ip(x, y).powi(2))
}

pub fn distance(q1: &PointH3, q2: &PointH3) -> f64 {
    let d2 = (q1.vec() - q2.vec()).norm_squared();
    let s = d2 / (2.0 * q1.z * q2.z);
    // acosh(1 + s) without cancellation for small s
    (s + (s * (s + 2.0)).sqrt()).ln_1p()
}

pub fn busemann(q: &PointH3) -> f64 {
    -q.z.ln()
}

/// Direction data of the geodesic through `q` along `v`: unit horizontal
/// direction, `m = sin` of the angle to the vertical, and `1 ∓ cos` of it,
/// each computed without cancellation.
struct GeodesicShape {
    ex: f64,
    ey: f64,
    m: f64,
    one_minus_w: f64,
    one_plus_w: f64,
}

impl GeodesicShape {
    fn new(v: &Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        let h = v[0].hypot(v[1]);
        let (m, w) = (h / n, v[2] / n);
        let (ex, ey) = if h > 0.0 { (v[0] / h, v[1] / h) } else { (0.0, 0.0) };
        let m2 = m * m;
        let (one_minus_w, one_plus_w) = if w > 0.0 {
            (m2 / (1.0 + w), 1.0 + w)
        } else {
            (1.0 - w, m2 / (1.0 - w))
        };
        Ok(Self { ex, ey, m, one_minus_w, one_plus_w })
    }

    /// `cosh t − w sinh t` and its derivative.
    fn denominators(&self, t: f64) -> (f64, f64) {
        let (ep, em) = (t.exp(), (-t).exp());
        (
            0.5 * (self.one_minus_w * ep + self.one_plus_w * em),
            0.5 * (self.one_minus_w * ep - self.one_plus_w * em),
        )
    }
}

/// Closed-form geodesic: vertical lines and semicircles orthogonal to the boundary.
/// `v` is normalized to unit hyperbolic speed.
pub fn geodesic_point(q: &PointH3, v: &Vector3<f64>, t: f64) -> Result<PointH3> {
    let g = GeodesicShape::new(v)?;
    let (d, _) = g.denominators(t);
    let s = q.z * g.m * t.sinh() / d;
    PointH3::new(q.x + s * g.ex, q.y + s * g.ey, q.z / d)
}

/// Velocity of the unit-speed geodesic of `geodesic_point` at time `t`.
pub fn geodesic_velocity(q: &PointH3, v: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
    let g = GeodesicShape::new(v)?;
    let (d, e) = g.denominators(t);
    let ds = q.z * g.m / (d * d);
    Ok(Vector3::new(ds * g.ex, ds * g.ey, -q.z * e / (d * d)))
}

/// Ideal endpoints (backward, forward) of the geodesic through `q` with direction `v`.
pub fn geodesic_ends(q: &PointH3, v: &Vector3<f64>) -> Result<(Ideal, Ideal)> {
    let speed = v.norm() / q.z;
    if speed == 0.0 || !speed.is_finite() {
        return Err(Error::ZeroVector);
    }
    let u = v / speed;
    let h = (u[0] * u[0] + u[1] * u[1]).sqrt();
    if h <= 1e-15 * q.z {
        let foot = Ideal::Finite(q.w());
        return Ok(if u[2] > 0.0 {
            (foot, Ideal::Infinity)
        } else {
            (Ideal::Infinity, foot)
        });
    }
    let e = Complex64::new(u[0] / h, u[1] / h);
    let sc = q.z * u[2] / h;
    let r = sc.hypot(q.z);
    Ok((
        Ideal::Finite(q.w() + e * (sc - r)),
        Ideal::Finite(q.w() + e * (sc + r)),
    ))
}

/// Unit initial direction at `q0` of the geodesic towards `q1`, and the distance.
pub fn geodesic_between(q0: &PointH3, q1: &PointH3) -> Result<(Vector3<f64>, f64)> {
    let d = distance(q0, q1);
    if d == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dw = q1.w() - q0.w();
    let s1 = dw.norm();
    if s1 <= 1e-14 * (q0.z + q1.z) {
        let sg = (q1.z - q0.z).signum();
        return Ok((Vector3::new(0.0, 0.0, sg * q0.z), d));
    }
    let e = dw / s1;
    let sc = (s1 * s1 + q1.z * q1.z - q0.z * q0.z) / (2.0 * s1);
    let dir = Vector3::new(q0.z * e.re, q0.z * e.im, sc);
    let dir = dir * (q0.z / dir.norm());
    Ok((dir, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(x: f64, y: f64, z: f64) -> PointH3 {
        PointH3::new(x, y, z).unwrap()
    }

    #[test]
    fn metric_examples() {
        assert_eq!(metric_tensor(&p(0.0, 0.0, 1.0)), Matrix3::identity());
        assert_relative_eq!(metric_tensor(&p(5.0, -3.0, 2.0)), Matrix3::identity() * 0.25);
        let dz = TangentVec::new(p(0.0, 0.0, 3.0), Vector3::z());
        assert_relative_eq!(dz.norm(), 1.0 / 3.0);
    }

    #[test]
    fn christoffel_examples() {
        let g = christoffel(&p(0.0, 0.0, 2.0));
        assert_eq!(g[2][0][0], 0.5);
        assert_eq!(g[0][0][2], -0.5);
        assert_eq!(g[0][1][2], 0.0);
    }

    #[test]
    fn riemann_examples() {
        let q = p(0.3, 0.1, 2.0);
        let x = TangentVec::new(q, Vector3::new(2.0, 0.0, 0.0));
        let y = TangentVec::new(q, Vector3::new(0.0, 0.0, 2.0));
        let zz = TangentVec::new(q, Vector3::new(0.0, 2.0, 0.0));
        assert_eq!(riemann(&x, &x, &y).unwrap().v, Vector3::zeros());
        let ryy = riemann(&x, &y, &y).unwrap();
        assert_relative_eq!(ryy.inner(&x).unwrap(), -1.0);
        assert_eq!(riemann(&x, &y, &zz).unwrap().v, Vector3::zeros());
        let other = TangentVec::new(p(0.0, 0.0, 1.0), Vector3::x());
        assert!(matches!(riemann(&x, &other, &y), Err(Error::BaseMismatch)));
    }

    #[test]
    fn distance_examples() {
        assert_relative_eq!(
            distance(&p(0.0, 0.0, 1.0), &p(0.0, 0.0, std::f64::consts::E)),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(distance(&p(1.0, 2.0, 3.0), &p(1.0, 2.0, 3.0)), 0.0);
    }

    #[test]
    fn busemann_examples() {
        assert_eq!(busemann(&p(0.0, 0.0, 1.0)), 0.0);
        assert_relative_eq!(busemann(&p(0.0, 0.0, 2f64.exp())), -2.0);
        assert_relative_eq!(busemann(&p(7.0, -1.0, std::f64::consts::E)), -1.0);
        let q = p(0.4, 0.2, 0.7);
        assert_eq!(busemann(&p(q.x + 3.5, q.y - 1.25, q.z)), busemann(&q));
    }

    #[test]
    fn geodesic_examples() {
        let q = p(0.0, 0.0, 1.0);
        let up = geodesic_point(&q, &Vector3::z(), 1.3).unwrap();
        assert_relative_eq!(up.z, 1.3f64.exp(), epsilon = 1e-14);
        assert_eq!(geodesic_point(&q, &Vector3::x(), 0.0).unwrap(), q);
        assert!(geodesic_point(&q, &Vector3::zeros(), 1.0).is_err());
        let q = p(0.2, -0.4, 0.8);
        let v = Vector3::new(0.3, -0.5, 0.2);
        for &t in &[-2.0, -0.3, 0.7, 3.0] {
            let r = geodesic_point(&q, &v, t).unwrap();
            assert_relative_eq!(distance(&q, &r), t.abs(), epsilon = 1e-10);
        }
    }

    #[test]
    fn nearly_vertical_directions() {
        let q = p(-0.36, 0.12, 0.07);
        for tilt in [0.0, 1e-16, 1e-12, 1e-6] {
            for sign in [1.0, -1.0] {
                let v = Vector3::new(tilt, 0.0, sign * 0.07);
                for t in [0.0, 0.5, 3.3] {
                    let r = geodesic_point(&q, &v, t).unwrap();
                    if tilt <= 1e-12 {
                        assert_relative_eq!(r.z, q.z * (sign * t).exp(), max_relative = 1e-9);
                    }
                    assert_relative_eq!(distance(&q, &r), t, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn geodesic_velocity_matches_difference_quotient() {
        let q = p(0.2, -0.4, 0.8);
        let v = Vector3::new(0.3, -0.5, 0.2);
        let h = 1e-6;
        for &t in &[-1.0, 0.0, 0.5] {
            let a = geodesic_point(&q, &v, t + h).unwrap().vec();
            let b = geodesic_point(&q, &v, t - h).unwrap().vec();
            let fd = (a - b) / (2.0 * h);
            let an = geodesic_velocity(&q, &v, t).unwrap();
            assert!((fd - an).norm() < 1e-8);
        }
    }

    #[test]
    fn geodesic_between_hits_target() {
        let q0 = p(0.1, 0.2, 0.5);
        let q1 = p(-0.7, 0.9, 1.4);
        let (dir, d) = geodesic_between(&q0, &q1).unwrap();
        let r = geodesic_point(&q0, &dir, d).unwrap();
        assert!((r.vec() - q1.vec()).norm() < 1e-12);
    }

    #[test]
    fn ends_of_vertical_geodesic() {
        let q = p(0.0, 0.0, 1.0);
        let (a, b) = geodesic_ends(&q, &-Vector3::z()).unwrap();
        assert_eq!(a, Ideal::Infinity);
        assert_eq!(b, Ideal::Finite(Complex64::new(0.0, 0.0)));
    }
}
