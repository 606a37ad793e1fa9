//! Discrete energy on paths between two horospheres, its first and second
//! variation, Jacobi fields, Morse index and nullity of cords, and the
//! linearization at constant chords.
//!
//! The discrete energy is E = (N/2) Σ |q_{k+1} − q_k|² / (z_k z_{k+1}),
//! i.e. the segment metric taken at the geometric mean height. Since
//! |Δq|²/(2 z z′) = cosh d − 1 it only depends on hyperbolic distances, so
//! uniformly sampled geodesics are exact discrete critical points.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector3};

use crate::cords::Cord;
use crate::group::Horoball;
use crate::hyperbolic::{christoffel, contract, metric_tensor, riemann, PointH3, TangentVec};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct DiscretePath {
    pub nodes: Vec<PointH3>,
    pub from: Horoball,
    pub to: Horoball,
}

impl DiscretePath {
    /// Samples the cord at t = k/N.
    pub fn from_cord(cord: &Cord, n: usize) -> Self {
        Self {
            nodes: (0..=n).map(|k| cord.point(k as f64 / n as f64)).collect(),
            from: cord.from,
            to: cord.to,
        }
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Nodes displaced by `s·v_k` in coordinates.
    pub fn displaced(&self, v: &[Vector3<f64>], s: f64) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .zip(v)
            .map(|(q, d)| PointH3::from_vec(q.vec() + d * s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes, ..self.clone() })
    }
}

pub fn energy(path: &DiscretePath) -> f64 {
    let n = path.segments() as f64;
    path.nodes
        .windows(2)
        .map(|w| (w[1].vec() - w[0].vec()).norm_squared() / (w[0].z * w[1].z))
        .sum::<f64>()
        * (n / 2.0)
}

/// ∂E/∂q_k for every node.
pub fn energy_gradient(path: &DiscretePath) -> Vec<Vector3<f64>> {
    let n = path.segments() as f64;
    let mut g = vec![Vector3::zeros(); path.nodes.len()];
    for (k, w) in path.nodes.windows(2).enumerate() {
        let d = w[1].vec() - w[0].vec();
        let zz = w[0].z * w[1].z;
        let d2 = d.norm_squared();
        let lin = d * (n / zz);
        g[k] -= lin;
        g[k + 1] += lin;
        g[k][2] -= 0.5 * n * d2 / (zz * w[0].z);
        g[k + 1][2] -= 0.5 * n * d2 / (zz * w[1].z);
    }
    g
}

fn tangency_defect(b: &Horoball, q: &PointH3, v: &Vector3<f64>) -> f64 {
    let vn = v.norm();
    if vn == 0.0 {
        return 0.0;
    }
    b.inward_normal(q).normalize().dot(&(v / vn)).abs()
}

/// dE(V) for a nodal field whose end values are tangent to the horospheres.
pub fn first_variation(path: &DiscretePath, v: &[Vector3<f64>]) -> Result<f64> {
    if v.len() != path.nodes.len() {
        return Err(Error::InvalidParams("field length differs from path".into()));
    }
    let last = path.nodes.len() - 1;
    for (b, k) in [(&path.from, 0), (&path.to, last)] {
        let d = tangency_defect(b, &path.nodes[k], &v[k]);
        if d > 1e-9 {
            return Err(Error::NotTangent(d));
        }
    }
    Ok(energy_gradient(path)
        .iter()
        .zip(v)
        .map(|(g, x)| g.dot(x))
        .sum())
}

/// Parallel orthonormal frame (E1, E2) of the normal bundle of a cord, in
/// coordinates. E1 = z·n with n the horizontal unit normal to the vertical
/// plane of the geodesic; E2 is the unit tangent turned a right angle inside
/// that plane.
pub fn normal_frame(cord: &Cord, t: f64) -> (Vector3<f64>, Vector3<f64>) {
    let e = horizontal_direction(cord);
    let q = cord.point(t);
    // Euclidean length z
    let u = cord.velocity(t) / cord.length;
    let uh = u[0] * e[0] + u[1] * e[1];
    let e1 = Vector3::new(-e[1], e[0], 0.0) * q.z;
    let e2 = Vector3::new(u[2] * e[0], u[2] * e[1], -uh);
    (e1, e2)
}

fn horizontal_direction(cord: &Cord) -> Vector3<f64> {
    let d = cord.direction;
    let h = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if h <= 1e-13 * cord.start.z {
        Vector3::x()
    } else {
        Vector3::new(d[0] / h, d[1] / h, 0.0)
    }
}

/// −∇_X N for the inward unit normal field of a horoball, as a matrix on
/// coordinate vectors.
pub fn shape_operator(b: &Horoball, q: &PointH3) -> Matrix3<f64> {
    let jac = b.normal_jacobian(q);
    let n = b.inward_normal(q);
    let gam = christoffel(q);
    let mut s = Matrix3::zeros();
    for j in 0..3 {
        let mut x = Vector3::zeros();
        x[j] = 1.0;
        let col = -(jac * x + contract(&gam, &x, &n));
        s.set_column(j, &col);
    }
    s
}

/// Principal curvatures of a horosphere at a point on it.
pub fn principal_curvatures(b: &Horoball, q: &PointH3) -> (f64, f64) {
    let n = b.inward_normal(q).normalize();
    let a = if n[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let t1 = (a - n * a.dot(&n)).normalize() * q.z;
    let t2 = n.cross(&t1).normalize() * q.z;
    let s = shape_operator(b, q);
    let g = metric_tensor(q);
    let ip = |x: &Vector3<f64>, y: &Vector3<f64>| (x.transpose() * g * y)[(0, 0)];
    let m = Matrix2::new(
        ip(&(s * t1), &t1),
        ip(&(s * t2), &t1),
        ip(&(s * t1), &t2),
        ip(&(s * t2), &t2),
    );
    let m = (m + m.transpose()) * 0.5;
    let ev = m.symmetric_eigenvalues();
    (ev[0].min(ev[1]), ev[0].max(ev[1]))
}

/// Mean curvature of the horosphere {z = z0}.
pub fn mean_curvature(z0: f64) -> Result<f64> {
    let q = PointH3::new(0.0, 0.0, z0)?;
    let (a, b) = principal_curvatures(&Horoball::at_infinity(z0), &q);
    Ok(0.5 * (a + b))
}

/// How the boundary and curvature terms of the second variation are built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Closed forms ℓ²|V|² and ℓ|V|² at the ends.
    Direct,
    /// −⟨R(V, ċ)ċ, V⟩ from the curvature tensor and ⟨S V, V⟩⟨N, ċ⟩ from the
    /// horosphere shape operators.
    General,
}

#[derive(Clone, Copy, Debug)]
pub struct HessianOptions {
    pub route: Route,
    pub boundary: bool,
    /// Multiplier of the curvature term.
    pub potential_sign: f64,
}

impl Default for HessianOptions {
    fn default() -> Self {
        Self {
            route: Route::Direct,
            boundary: true,
            potential_sign: 1.0,
        }
    }
}

/// Second variation on normal fields V_k = α_k E1 + β_k E2, as a matrix over
/// x = (α_0, β_0, …, α_N, β_N), together with the trapezoid L² mass.
#[derive(Clone, Debug)]
pub struct HessianForm {
    pub matrix: DMatrix<f64>,
    pub mass: DVector<f64>,
    pub ell: f64,
    pub n: usize,
}

impl HessianForm {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.matrix * x)[(0, 0)]
    }

    pub fn l2_norm_sq(&self, x: &DVector<f64>) -> f64 {
        x.iter().zip(self.mass.iter()).map(|(a, m)| a * a * m).sum()
    }

    /// Eigenvalues of M^{-1/2} Q M^{-1/2}, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let s = self.mass.map(|m| 1.0 / m.sqrt());
        let mut a = self.matrix.clone();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                a[(i, j)] *= s[i] * s[j];
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }
}

pub fn hessian(cord: &Cord, n: usize) -> Result<HessianForm> {
    hessian_with(cord, n, HessianOptions::default())
}

pub fn hessian_with(cord: &Cord, n: usize, opts: HessianOptions) -> Result<HessianForm> {
    if cord.length <= crate::cords::DEGENERATE_LENGTH {
        return Err(Error::ConstantCord);
    }
    if n < 2 {
        return Err(Error::InvalidParams(format!("mesh {n}")));
    }
    let ell = cord.length;
    let dt = 1.0 / n as f64;
    let dim = 2 * (n + 1);
    let nodes: Vec<PointH3> = (0..=n).map(|k| cord.point(k as f64 * dt)).collect();
    let frames: Vec<(Vector3<f64>, Vector3<f64>)> =
        (0..=n).map(|k| normal_frame(cord, k as f64 * dt)).collect();
    let mut q = DMatrix::zeros(dim, dim);
    // kinetic part: Δt |DV|² at segment midpoints
    for k in 0..n {
        let (qa, qb) = (nodes[k].vec(), nodes[k + 1].vec());
        let mid = PointH3::from_vec((qa + qb) * 0.5)?;
        let cdot = (qb - qa) / dt;
        let gam = christoffel(&mid);
        let w = 1.0 / (mid.z * mid.z);
        // columns: α_k, β_k, α_{k+1}, β_{k+1}
        let basis = [frames[k].0, frames[k].1, frames[k + 1].0, frames[k + 1].1];
        let mut b = [Vector3::zeros(); 4];
        for (j, e) in basis.iter().enumerate() {
            let sign = if j < 2 { -1.0 } else { 1.0 };
            b[j] = e * (sign / dt) + contract(&gam, &cdot, e) * 0.5;
        }
        let idx = [2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3];
        for a in 0..4 {
            for c in 0..4 {
                q[(idx[a], idx[c])] += dt * w * b[a].dot(&b[c]);
            }
        }
    }
    // curvature part, trapezoid weights
    let mut mass = DVector::zeros(dim);
    for k in 0..=n {
        let wk = if k == 0 || k == n { 0.5 * dt } else { dt };
        mass[2 * k] = wk;
        mass[2 * k + 1] = wk;
        let p = match opts.route {
            Route::Direct => Matrix2::identity() * (ell * ell),
            Route::General => {
                let t = k as f64 * dt;
                let base = nodes[k];
                let cd = TangentVec::new(base, cord.velocity(t));
                let es = [
                    TangentVec::new(base, frames[k].0),
                    TangentVec::new(base, frames[k].1),
                ];
                let mut m = Matrix2::zeros();
                for a in 0..2 {
                    for c in 0..2 {
                        let r = riemann(&es[a], &cd, &cd)?;
                        m[(a, c)] = -r.inner(&es[c])?;
                    }
                }
                (m + m.transpose()) * 0.5
            }
        };
        for a in 0..2 {
            for c in 0..2 {
                q[(2 * k + a, 2 * k + c)] += opts.potential_sign * wk * p[(a, c)];
            }
        }
    }
    if opts.boundary {
        for (k, ball, t, sign) in [(0, &cord.from, 0.0, -1.0), (n, &cord.to, 1.0, 1.0)] {
            let p = match opts.route {
                Route::Direct => Matrix2::identity() * ell,
                Route::General => {
                    let base = nodes[k];
                    let s = shape_operator(ball, &base);
                    let g = metric_tensor(&base);
                    let nrm = ball.inward_normal(&base);
                    let along = (nrm.transpose() * g * cord.velocity(t))[(0, 0)];
                    let es = [frames[k].0, frames[k].1];
                    let mut m = Matrix2::zeros();
                    for a in 0..2 {
                        for c in 0..2 {
                            m[(a, c)] = sign * (es[c].transpose() * g * (s * es[a]))[(0, 0)] * along;
                        }
                    }
                    (m + m.transpose()) * 0.5
                }
            };
            for a in 0..2 {
                for c in 0..2 {
                    q[(2 * k + a, 2 * k + c)] += p[(a, c)];
                }
            }
        }
    }
    let q = (&q + q.transpose()) * 0.5;
    Ok(HessianForm {
        matrix: q,
        mass,
        ell,
        n,
    })
}

/// Nodal coordinate field of frame coefficients x = (α_k, β_k).
pub fn field_from_coeffs(cord: &Cord, x: &DVector<f64>) -> Vec<Vector3<f64>> {
    let n = x.len() / 2 - 1;
    (0..=n)
        .map(|k| {
            let (e1, e2) = normal_frame(cord, k as f64 / n as f64);
            e1 * x[2 * k] + e2 * x[2 * k + 1]
        })
        .collect()
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct IndexReport {
    pub index: usize,
    pub nullity: usize,
    pub min_eigenvalue: f64,
    pub zero_band: f64,
    /// Smallest eigenvalue of the tangential (reparameterization) block, which
    /// has Dirichlet ends and is not counted.
    pub tangential_min: f64,
}

/// Negative and near-zero eigenvalue counts, with the band |λ| < 10/N².
pub fn index_nullity(h: &HessianForm) -> Result<IndexReport> {
    let ev = h.eigenvalues();
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen);
    }
    let band = 10.0 / (h.n as f64 * h.n as f64);
    let index = ev.iter().filter(|&&v| v <= -band).count();
    let nullity = ev.iter().filter(|&&v| v.abs() < band).count();
    let nn = h.n as f64;
    Ok(IndexReport {
        index,
        nullity,
        min_eigenvalue: ev[0],
        zero_band: band,
        tangential_min: 4.0 * nn * nn * (std::f64::consts::PI / (2.0 * nn)).sin().powi(2),
    })
}

/// Jacobi field in a parallel frame: V(t) = V0 cosh(ℓt) + (dV0/ℓ) sinh(ℓt).
#[derive(Clone, Copy, Debug)]
pub struct JacobiField {
    pub ell: f64,
    pub v0: Vector3<f64>,
    pub dv0: Vector3<f64>,
}

pub fn jacobi_solve(ell: f64, v0: Vector3<f64>, dv0: Vector3<f64>) -> JacobiField {
    JacobiField { ell, v0, dv0 }
}

impl JacobiField {
    pub fn eval(&self, t: f64) -> Vector3<f64> {
        let lt = self.ell * t;
        if self.ell.abs() < 1e-12 {
            self.v0 + self.dv0 * t
        } else {
            self.v0 * lt.cosh() + self.dv0 * (lt.sinh() / self.ell)
        }
    }

    pub fn derivative(&self, t: f64) -> Vector3<f64> {
        let lt = self.ell * t;
        if self.ell.abs() < 1e-12 {
            self.dv0
        } else {
            self.v0 * (self.ell * lt.sinh()) + self.dv0 * lt.cosh()
        }
    }

    /// Realizes the first two components along a cord in its normal frame.
    pub fn along(&self, cord: &Cord, t: f64) -> Vector3<f64> {
        let (e1, e2) = normal_frame(cord, t);
        let c = self.eval(t);
        e1 * c[0] + e2 * c[1]
    }
}

/// Relative residual of D²V/dt² − ℓ²V for a Jacobi field carried along a
/// cord, with covariant derivatives from central differences.
pub fn jacobi_residual(cord: &Cord, j: &JacobiField, samples: usize) -> f64 {
    let h = 1e-3;
    let cov = |t: f64| -> Vector3<f64> {
        let d = (j.along(cord, t - 2.0 * h) - j.along(cord, t - h) * 8.0
            + j.along(cord, t + h) * 8.0
            - j.along(cord, t + 2.0 * h))
            / (12.0 * h);
        let q = cord.point(t);
        d + contract(&christoffel(&q), &cord.velocity(t), &j.along(cord, t))
    };
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let t = 0.1 + 0.8 * k as f64 / (samples - 1).max(1) as f64;
        let q = cord.point(t);
        let dd = (cov(t - 2.0 * h) - cov(t - h) * 8.0 + cov(t + h) * 8.0 - cov(t + 2.0 * h))
            / (12.0 * h)
            + contract(&christoffel(&q), &cord.velocity(t), &cov(t));
        let v = j.along(cord, t);
        let r = dd - v * (j.ell * j.ell);
        let scale = (v.norm() * j.ell * j.ell).max(1e-300);
        worst = worst.max(r.norm() / scale);
    }
    worst
}

/// Dimension of the space of normal Jacobi fields satisfying the boundary
/// conditions V′(0) = ℓV(0), V′(1) = −ℓV(1) that the free-boundary second
/// variation imposes.
pub fn jacobi_nullity(ell: f64) -> usize {
    let (c, s) = (ell.cosh(), ell.sinh());
    // rows: conditions on (V(0), V′(0)) for one component
    let m = Matrix2::new(-ell, 1.0, ell * (s + c), c + s);
    let rank = m.rank(1e-12 * (1.0 + ell.abs() * c));
    2 * (2 - rank)
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct BottReport {
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    /// Zero-eigenvalue count of the symmetric staggered form.
    pub symmetric_kernel_dim: usize,
    pub smallest_nonzero_singular: f64,
    /// Kernel vectors are constant tangent fields with vanishing momentum.
    pub kernel_is_constant_tangent: bool,
    /// Cokernel vectors have vanishing position part.
    pub cokernel_is_momentum: bool,
}

fn tangent_basis(ball: &Horoball, q: &PointH3) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let n = ball.inward_normal(q).normalize();
    let a = if n[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let t1 = (a - n * a.dot(&n)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2, n)
}

/// Linearized Hamilton equations at the constant chord at `q` on the
/// horosphere of `ball`: u̇♭ = β, β̇ = 0, with u tangent and β conormal at
/// both ends. Returns kernel and cokernel dimensions of the square
/// discretization with N segments.
pub fn constant_chord_hessian(q: &PointH3, ball: &Horoball, n: usize) -> Result<BottReport> {
    if ball.defect(q).abs() > 1e-9 {
        return Err(Error::InvalidParams("point is not on the horosphere".into()));
    }
    let (t1, t2, nrm) = tangent_basis(ball, q);
    let g = metric_tensor(q);
    let dt = 1.0 / n as f64;
    // unknown layout: u_0 (2), u_1..u_{N-1} (3 each), u_N (2), β_0 (1), β_1..β_{N-1} (3), β_N (1)
    let nu = 4 + 3 * (n - 1);
    let dim = nu + 2 + 3 * (n - 1);
    assert_eq!(dim, 6 * n);
    let u_col = |k: usize| -> Vec<(usize, Vector3<f64>)> {
        if k == 0 {
            vec![(0, t1), (1, t2)]
        } else if k == n {
            vec![(nu - 2, t1), (nu - 1, t2)]
        } else {
            let b = 2 + 3 * (k - 1);
            vec![(b, Vector3::x()), (b + 1, Vector3::y()), (b + 2, Vector3::z())]
        }
    };
    // conormal covectors at the ends: multiples of g·N
    let conormal = g * nrm;
    let b_col = |k: usize| -> Vec<(usize, Vector3<f64>)> {
        if k == 0 {
            vec![(nu, conormal)]
        } else if k == n {
            vec![(dim - 1, conormal)]
        } else {
            let b = nu + 1 + 3 * (k - 1);
            vec![(b, Vector3::x()), (b + 1, Vector3::y()), (b + 2, Vector3::z())]
        }
    };
    let mut a: DMatrix<f64> = DMatrix::zeros(dim, dim);
    for k in 0..n {
        let r0 = 6 * k;
        // (u_{k+1} − u_k)♭/Δt − (β_k + β_{k+1})/2
        for (c, v) in u_col(k + 1) {
            let w = g * v / dt;
            for i in 0..3 {
                a[(r0 + i, c)] += w[i];
            }
        }
        for (c, v) in u_col(k) {
            let w = g * v / dt;
            for i in 0..3 {
                a[(r0 + i, c)] -= w[i];
            }
        }
        for kk in [k, k + 1] {
            for (c, v) in b_col(kk) {
                for i in 0..3 {
                    a[(r0 + i, c)] -= 0.5 * v[i];
                }
            }
        }
        // (β_{k+1} − β_k)/Δt
        for (c, v) in b_col(k + 1) {
            for i in 0..3 {
                a[(r0 + 3 + i, c)] += v[i] / dt;
            }
        }
        for (c, v) in b_col(k) {
            for i in 0..3 {
                a[(r0 + 3 + i, c)] -= v[i] / dt;
            }
        }
    }
    // scale columns to comparable units
    let z = q.z;
    for c in 0..dim {
        let s = if c < nu { z } else { 1.0 / z };
        for r in 0..dim {
            a[(r, c)] *= s;
        }
    }
    let svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> = a.clone().svd(true, true);
    let tol = 1e-6;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
    let kernel_dim = order.iter().filter(|&&i| svd.singular_values[i] < tol).count();
    let smallest_nonzero = order
        .iter()
        .map(|&i| svd.singular_values[i])
        .find(|&s| s >= tol)
        .unwrap_or(f64::INFINITY);
    let vt = svd.v_t.as_ref().ok_or(Error::Eigen)?;
    let uu = svd.u.as_ref().ok_or(Error::Eigen)?;
    let mut kernel_ok = true;
    let mut cokernel_ok = true;
    for &i in order.iter().take(kernel_dim) {
        let v = vt.row(i);
        // momentum part vanishes and interior u values agree with the ends
        let mom: f64 = (nu..dim).map(|c| v[c] * v[c]).sum();
        kernel_ok &= mom.sqrt() < 1e-8;
        let u0 = t1 * v[0] + t2 * v[1];
        for k in 1..n {
            let b = 2 + 3 * (k - 1);
            let uk = Vector3::new(v[b], v[b + 1], v[b + 2]);
            kernel_ok &= (uk - u0).norm() < 1e-8;
        }
        // left singular vectors pair with the momentum rows
        let w = uu.column(i);
        let pos: f64 = (0..n).map(|k| (0..3).map(|j| w[6 * k + j].powi(2)).sum::<f64>()).sum();
        cokernel_ok &= pos.sqrt() < 1e-8;
    }
    // staggered symmetric form Σ 2 β_{k+½}·Δu_k − Δt β_{k+½}ᵀ g⁻¹ β_{k+½}
    let ns = nu + 3 * n;
    let mut qs: DMatrix<f64> = DMatrix::zeros(ns, ns);
    let ginv = g.try_inverse().ok_or(Error::Eigen)?;
    for k in 0..n {
        let bb = nu + 3 * k;
        for (c, v) in u_col(k + 1) {
            for i in 0..3 {
                qs[(bb + i, c)] += v[i];
                qs[(c, bb + i)] += v[i];
            }
        }
        for (c, v) in u_col(k) {
            for i in 0..3 {
                qs[(bb + i, c)] -= v[i];
                qs[(c, bb + i)] -= v[i];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                qs[(bb + i, bb + j)] -= dt * ginv[(i, j)] / (z * z);
            }
        }
    }
    let ev: DVector<f64> = qs.symmetric_eigenvalues();
    let symmetric_kernel_dim = ev.iter().filter(|v| v.abs() < tol).count();
    Ok(BottReport {
        kernel_dim,
        cokernel_dim: dim - a.rank(tol),
        symmetric_kernel_dim,
        smallest_nonzero_singular: smallest_nonzero,
        kernel_is_constant_tangent: kernel_ok,
        cokernel_is_momentum: cokernel_ok,
    })
}

/// Whether a path is a discrete critical point: zero gradient at interior
/// nodes and gradient normal to the horospheres at the ends.
pub fn is_critical(path: &DiscretePath, tol: f64) -> bool {
    let g = energy_gradient(path);
    let last = g.len() - 1;
    let interior = g[1..last]
        .iter()
        .zip(&path.nodes[1..last])
        .all(|(v, q)| v.norm() * q.z < tol);
    let ends = [(&path.from, 0), (&path.to, last)].iter().all(|(b, k)| {
        let n = b.inward_normal(&path.nodes[*k]).normalize();
        (g[*k] - n * g[*k].dot(&n)).norm() < tol * (1.0 + g[*k].norm())
    });
    interior && ends
}
