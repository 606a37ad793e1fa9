//! The kinetic Hamiltonian H = ½ z² |p|² on T*ℍ³: vector field, Sasakian
//! almost complex structure, implicit-midpoint integration, Neumann shooting
//! between horoballs, and finite-difference checks of exterior derivatives.
//!
//! States are flattened as (x, y, z, p_x, p_y, p_z); the symplectic form is
//! ω₀ = dq ∧ dp and the Liouville form θ = p dq, so ω₀ = −dθ.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::cords::Cord;
use crate::group::{apply_h3, image_horoball, to_center, Horoball, Moebius};
use crate::hyperbolic::{christoffel, contract, Ideal, PointH3};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CotangentState {
    pub q: PointH3,
    pub p: Vector3<f64>,
}

impl CotangentState {
    pub fn new(x: f64, y: f64, z: f64, px: f64, py: f64, pz: f64) -> Result<Self> {
        Ok(Self {
            q: PointH3::new(x, y, z)?,
            p: Vector3::new(px, py, pz),
        })
    }

    pub fn flat(&self) -> Vector6<f64> {
        Vector6::new(self.q.x, self.q.y, self.q.z, self.p[0], self.p[1], self.p[2])
    }

    pub fn from_flat(s: &Vector6<f64>) -> Result<Self> {
        if !(s[2] > 0.0 && s.iter().all(|v| v.is_finite())) {
            return Err(Error::Underflow(s[2]));
        }
        Self::new(s[0], s[1], s[2], s[3], s[4], s[5])
    }
}

pub fn hamiltonian(s: &CotangentState) -> f64 {
    0.5 * s.q.z * s.q.z * s.p.norm_squared()
}

/// X_H = z² p·∂_q − z |p|² ∂_{p_z}.
pub fn ham_vector_field(s: &CotangentState) -> Vector6<f64> {
    let z = s.q.z;
    let qd = s.p * (z * z);
    Vector6::new(qd[0], qd[1], qd[2], 0.0, 0.0, -z * s.p.norm_squared())
}

fn field_flat(y: &Vector6<f64>) -> Vector6<f64> {
    let z = y[2];
    let p2 = y[3] * y[3] + y[4] * y[4] + y[5] * y[5];
    Vector6::new(z * z * y[3], z * z * y[4], z * z * y[5], 0.0, 0.0, -z * p2)
}

/// ∇H in flat coordinates.
pub fn dh(s: &CotangentState) -> Vector6<f64> {
    let z = s.q.z;
    let p2 = s.p.norm_squared();
    Vector6::new(0.0, 0.0, z * p2, z * z * s.p[0], z * z * s.p[1], z * z * s.p[2])
}

/// Matrix of ω₀: ω₀(X, Y) = Xᵀ Ω Y.
pub fn omega() -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for i in 0..3 {
        m[(i, 3 + i)] = 1.0;
        m[(3 + i, i)] = -1.0;
    }
    m
}

/// Horizontal frame H_i = ∂_{q^i} + p_a Γᵃ_{ij} ∂_{p_j} and vertical frame
/// V_i = ∂_{p_i}, as the columns of a 6×6 matrix [H₁ H₂ H₃ V₁ V₂ V₃].
#[derive(Clone, Debug)]
pub struct FrameData {
    pub frame: Matrix6<f64>,
}

impl FrameData {
    pub fn horizontal(&self, i: usize) -> Vector6<f64> {
        self.frame.column(i).into()
    }

    pub fn vertical(&self, i: usize) -> Vector6<f64> {
        self.frame.column(3 + i).into()
    }
}

pub fn frame(s: &CotangentState) -> FrameData {
    let gam = christoffel(&s.q);
    let mut f = Matrix6::identity();
    for i in 0..3 {
        for j in 0..3 {
            f[(3 + j, i)] = (0..3).map(|a| s.p[a] * gam[a][i][j]).sum();
        }
    }
    FrameData { frame: f }
}

/// J H_i = h_{ij} V_j, J V_i = −h^{ij} H_j.
pub fn sasakian_j(s: &CotangentState) -> Matrix6<f64> {
    let z2 = s.q.z * s.q.z;
    let mut blk = Matrix6::zeros();
    for i in 0..3 {
        blk[(3 + i, i)] = 1.0 / z2;
        blk[(i, 3 + i)] = -z2;
    }
    let f = frame(s).frame;
    let finv = f.try_inverse().expect("frame is unipotent");
    f * blk * finv
}

/// Sasaki metric h̃(X, Y) = ω₀(X, J Y) as a matrix.
pub fn sasaki_metric(s: &CotangentState) -> Matrix6<f64> {
    omega() * sasakian_j(s)
}

/// Fixed-step implicit midpoint rule.
pub fn integrate_flow(s0: &CotangentState, t: f64, dt: f64) -> Result<CotangentState> {
    let traj = integrate_trajectory(s0, t, dt, usize::MAX)?;
    Ok(*traj.last().unwrap())
}

/// Like [`integrate_flow`], recording the state every `every` steps (and at
/// both ends). A negative `t` integrates backwards.
pub fn integrate_trajectory(
    s0: &CotangentState,
    t: f64,
    dt: f64,
    every: usize,
) -> Result<Vec<CotangentState>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!("step {dt}")));
    }
    let n = (t.abs() / dt).round().max(1.0) as usize;
    let h = t / n as f64;
    let mut y = s0.flat();
    let mut out = vec![*s0];
    for k in 1..=n {
        y = midpoint_step(&y, h)?;
        if k % every.max(1) == 0 || k == n {
            out.push(CotangentState::from_flat(&y)?);
        }
    }
    if out.len() == 1 {
        out.push(CotangentState::from_flat(&y)?);
    }
    Ok(out)
}

fn midpoint_step(y: &Vector6<f64>, h: f64) -> Result<Vector6<f64>> {
    if !(y[2] > 1e-150) || !y.iter().all(|v| v.is_finite()) {
        return Err(Error::Underflow(y[2]));
    }
    let mut next = y + field_flat(y) * h;
    for _ in 0..100 {
        let mid = (y + next) * 0.5;
        let upd = y + field_flat(&mid) * h;
        let diff = (upd - next).abs();
        next = upd;
        let scale_q = y[2];
        let scale_p = 1.0 / y[2];
        let done = (0..3).all(|i| diff[i] <= 1e-16 * scale_q)
            && (3..6).all(|i| diff[i] <= 1e-16 * scale_p * (1.0 + y[i].abs() * y[2]));
        if done {
            break;
        }
    }
    if !(next[2] > 0.0) {
        return Err(Error::Underflow(next[2]));
    }
    Ok(next)
}

/// Classical RK4 over `n` steps; used where high accuracy matters more than
/// long-time structure (shooting).
pub fn rk4(s0: &Vector6<f64>, t: f64, n: usize) -> Result<Vector6<f64>> {
    let h = t / n as f64;
    let mut y = *s0;
    for _ in 0..n {
        let k1 = field_flat(&y);
        let k2 = field_flat(&(y + k1 * (h / 2.0)));
        let k3 = field_flat(&(y + k2 * (h / 2.0)));
        let k4 = field_flat(&(y + k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !(y[2] > 0.0) || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Underflow(y[2]));
        }
    }
    Ok(y)
}

/// Christoffel residual q̈ + Γ(q̇, q̇) of a trajectory sampled at spacing
/// `h`, from second central differences.
pub fn geodesic_residual(traj: &[CotangentState], h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for w in traj.windows(3) {
        let (a, b, c) = (w[0].q.vec(), w[1].q.vec(), w[2].q.vec());
        let vel = (c - a) / (2.0 * h);
        let acc = (c - b * 2.0 + a) / (h * h);
        let r = acc + contract(&christoffel(&w[1].q), &vel, &vel);
        // relative to the natural scale |q̇|²/z
        let scale = vel.norm_squared() / w[1].q.z;
        worst = worst.max(r.norm() / scale.max(1e-300));
    }
    worst
}

/// Result of a Neumann shooting solve.
#[derive(Clone, Debug)]
pub struct ShootResult {
    pub cord: Cord,
    pub iterations: usize,
    pub residual: f64,
    /// Converged unknowns: chart coordinates on B0 and flight time.
    pub unknowns: [f64; 3],
}

/// Parameterization of a horosphere by two chart coordinates: the image of
/// the horizontal plane {z = height} under the map sending ∞ to the center.
#[derive(Clone, Debug)]
struct HoroChart {
    map: Moebius,
    height: f64,
    ball: Horoball,
}

impl HoroChart {
    fn new(b: &Horoball) -> Self {
        match b.center {
            Ideal::Infinity => Self {
                map: Moebius::identity(),
                height: b.size,
                ball: *b,
            },
            Ideal::Finite(w) => Self {
                map: to_center(w),
                height: 1.0 / b.size,
                ball: *b,
            },
        }
    }

    fn point(&self, u: f64, v: f64) -> Result<PointH3> {
        Ok(apply_h3(&self.map, &PointH3::new(u, v, self.height)?))
    }

    /// Chart coordinates of the boundary point the chart sends to `w`.
    fn coords_of(&self, w: Ideal) -> Option<(f64, f64)> {
        match crate::group::apply_boundary(&self.map.inverse(), w) {
            Ideal::Finite(c) => Some((c.re, c.im)),
            Ideal::Infinity => None,
        }
    }
}

struct Shooter {
    chart: HoroChart,
    target: Horoball,
}

impl Shooter {
    fn launch(&self, u: f64, v: f64) -> Result<CotangentState> {
        let q = self.chart.point(u, v)?;
        let n = self.chart.ball.inward_normal(&q);
        let p = -n / (q.z * q.z);
        Ok(CotangentState { q, p })
    }

    fn residual(&self, x: &[f64; 3]) -> Result<Vector3<f64>> {
        let s0 = self.launch(x[0], x[1])?;
        if !(x[2] > 0.0) {
            return Err(Error::InvalidParams("negative flight time".into()));
        }
        let steps = (2000.0 * x[2].max(1.0)).ceil() as usize;
        let y = rk4(&s0.flat(), x[2], steps)?;
        let s = CotangentState::from_flat(&y)?;
        let n = self.target.inward_normal(&s.q).normalize();
        let e = if n[0].abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        let t1 = (e - n * e.dot(&n)).normalize();
        let t2 = n.cross(&t1);
        let pn = s.p.norm();
        Ok(Vector3::new(
            self.target.defect(&s.q),
            s.p.dot(&t1) / pn,
            s.p.dot(&t2) / pn,
        ))
    }
}

/// Default starting guess: the chart point over the target's center, with
/// the horoball distance as flight time.
pub fn shooting_guess(b0: &Horoball, b1: &Horoball) -> Result<[f64; 3]> {
    let chart = HoroChart::new(b0);
    let (u, v) = chart.coords_of(b1.center).ok_or(Error::SameCenter)?;
    let t = crate::group::horoball_distance(b0, b1)?;
    Ok([u, v, t.max(0.1)])
}

/// Cord from B0 to g·B0 by shooting the geodesic flow.
pub fn shoot_neumann(b0: &Horoball, g: &Moebius) -> Result<ShootResult> {
    if g.c.norm() <= 1e-12 && b0.center == Ideal::Infinity {
        return Err(Error::Peripheral);
    }
    let b1 = image_horoball(g, b0);
    let guess = shooting_guess(b0, &b1)?;
    let mut r = shoot_between(b0, &b1, guess)?;
    r.cord.class_word = g.word.clone();
    Ok(r)
}

/// Damped Newton with a forward-difference Jacobian from an explicit guess.
pub fn shoot_between(b0: &Horoball, b1: &Horoball, guess: [f64; 3]) -> Result<ShootResult> {
    if b0.center.approx_eq(&b1.center, 1e-14) {
        return Err(Error::SameCenter);
    }
    let sh = Shooter {
        chart: HoroChart::new(b0),
        target: *b1,
    };
    let mut x = guess;
    let mut r = sh.residual(&x)?;
    let max_iter = 60;
    let mut it = 0;
    while r.norm() > 1e-13 && it < max_iter {
        it += 1;
        let mut jac = Matrix3::zeros();
        for k in 0..3 {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x;
            xp[k] += h;
            let mut xm = x;
            xm[k] -= h;
            let d = (sh.residual(&xp)? - sh.residual(&xm)?) / (2.0 * h);
            jac.set_column(k, &d);
        }
        let step = jac
            .lu()
            .solve(&(-r))
            .ok_or(Error::NoConvergence {
                iterations: it,
                residual: r.norm(),
            })?;
        let mut lam = 1.0;
        loop {
            let xn = [x[0] + lam * step[0], x[1] + lam * step[1], x[2] + lam * step[2]];
            if let Ok(rn) = sh.residual(&xn) {
                if rn.norm() < r.norm() || lam < 1e-3 {
                    x = xn;
                    r = rn;
                    break;
                }
            }
            lam *= 0.5;
            if lam < 1e-6 {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: r.norm(),
                });
            }
        }
        if step.norm() * lam < 1e-15 * (1.0 + x[2]) {
            break;
        }
    }
    if r.norm() > 1e-10 {
        return Err(Error::NoConvergence {
            iterations: it,
            residual: r.norm(),
        });
    }
    let s0 = sh.launch(x[0], x[1])?;
    let steps = (2000.0 * x[2].max(1.0)).ceil() as usize;
    let end = CotangentState::from_flat(&rk4(&s0.flat(), x[2], steps)?)?;
    let dir = s0.p * (s0.q.z * s0.q.z);
    let cord = Cord::from_endpoints(
        crate::group::Word::empty(),
        s0.q,
        end.q,
        dir,
        x[2],
        *b0,
        *b1,
    );
    Ok(ShootResult {
        cord,
        iterations: it,
        residual: r.norm(),
        unknowns: x,
    })
}

/// A 1-form on state space given by its coefficient vector at each state.
pub type OneForm<'a> = dyn Fn(&Vector6<f64>) -> Vector6<f64> + 'a;

/// Central-difference exterior derivative: W[(a, b)] = ∂_a α_b − ∂_b α_a.
/// Steps are `step·z` in q directions and `step/z` in p directions.
pub fn exterior_derivative(alpha: &OneForm, s: &CotangentState, step: f64) -> Matrix6<f64> {
    let y = s.flat();
    let z = s.q.z;
    let mut grad = Matrix6::zeros(); // grad[(a, b)] = ∂_a α_b
    for a in 0..6 {
        let h = if a < 3 { step * z } else { step / z };
        let mut yp = y;
        yp[a] += h;
        let mut ym = y;
        ym[a] -= h;
        let d = (alpha(&yp) - alpha(&ym)) / (2.0 * h);
        for b in 0..6 {
            grad[(a, b)] = d[b];
        }
    }
    grad - grad.transpose()
}

fn state_of(y: &Vector6<f64>) -> CotangentState {
    CotangentState {
        q: PointH3 {
            x: y[0],
            y: y[1],
            z: y[2],
        },
        p: Vector3::new(y[3], y[4], y[5]),
    }
}

/// α = df ∘ J for a function with gradient `grad`.
fn compose_j<'a>(grad: impl Fn(&Vector6<f64>) -> Vector6<f64> + 'a) -> impl Fn(&Vector6<f64>) -> Vector6<f64> + 'a {
    move |y: &Vector6<f64>| sasakian_j(&state_of(y)).transpose() * grad(y)
}

fn grad_h(y: &Vector6<f64>) -> Vector6<f64> {
    dh(&state_of(y))
}

fn grad_inv_z(y: &Vector6<f64>) -> Vector6<f64> {
    Vector6::new(0.0, 0.0, -1.0 / (y[2] * y[2]), 0.0, 0.0, 0.0)
}

fn grad_f(y: &Vector6<f64>) -> Vector6<f64> {
    grad_h(y) + grad_inv_z(y)
}

/// θ = p dq.
pub fn theta(s: &CotangentState) -> Vector6<f64> {
    Vector6::new(s.p[0], s.p[1], s.p[2], 0.0, 0.0, 0.0)
}

fn wedge(a: &Vector6<f64>, b: &Vector6<f64>) -> Matrix6<f64> {
    a * b.transpose() - b * a.transpose()
}

/// −d(df∘J) for f = H + 1/z, as a matrix W with value Xᵀ W Y.
pub fn psh_form(s: &CotangentState, step: f64) -> Matrix6<f64> {
    let alpha = compose_j(grad_f);
    -exterior_derivative(&alpha, s, step)
}

/// −d(df∘J)(X, JX) with X = V_i, f = H + 1/z.
pub fn plurisubharmonic_value(s: &CotangentState, i: usize) -> f64 {
    let x = frame(s).vertical(i);
    let jx = sasakian_j(s) * x;
    (x.transpose() * psh_form(s, 1e-4) * jx)[(0, 0)]
}

/// Same form evaluated on (H_i, J H_i).
pub fn plurisubharmonic_value_horizontal(s: &CotangentState, i: usize) -> f64 {
    let x = frame(s).horizontal(i);
    let jx = sasakian_j(s) * x;
    (x.transpose() * psh_form(s, 1e-4) * jx)[(0, 0)]
}

/// (1 + z)/z³.
pub fn psh_reference(z: f64) -> f64 {
    (1.0 + z) / (z * z * z)
}

/// Max residual over the 15 coordinate 2-planes of each identity, at a
/// finite-difference step and at half that step.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct FormReport {
    pub names: Vec<String>,
    pub residuals: Vec<f64>,
    pub residuals_half: Vec<f64>,
}

impl FormReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Residual ratio under step halving (≈ 4 for second order), or true
    /// when already at roundoff.
    pub fn converges(&self, k: usize) -> bool {
        let (a, b) = (self.residuals[k], self.residuals_half[k]);
        b < 1e-10 || a / b >= 3.0
    }
}

fn max_upper(m: &Matrix6<f64>) -> f64 {
    let mut w: f64 = 0.0;
    for a in 0..6 {
        for b in a + 1..6 {
            w = w.max(m[(a, b)].abs());
        }
    }
    w
}

/// φ = x/z, a boundary-linear function.
fn grad_phi(y: &Vector6<f64>) -> Vector6<f64> {
    Vector6::new(1.0 / y[2], 0.0, -y[0] / (y[2] * y[2]), 0.0, 0.0, 0.0)
}

/// Residuals of the pointwise form identities:
///
/// * `dH-literal`:  −d(dH∘J) = (1/z²) dz∧θ + (1/z) ω₀
/// * `dH`:          −d(dH∘J) = ω₀
/// * `f`:           −d(df∘J) = ω₀ + (1/z²) dz∧θ + (1/z) ω₀, f = H + 1/z
/// * `V3`:          −dV³ = −d(z⁻¹)∧θ + z⁻¹ ω₀, V³ = d(1/z)∘J
/// * `phi`:         −d(dφ∘J) = φ ω₀ − dφ∧θ, φ = x/z
pub fn form_identity_residuals(s: &CotangentState, step: f64) -> FormReport {
    let names = ["dH-literal", "dH", "f", "V3", "phi"];
    let run = |h: f64| -> Vec<f64> {
        let z = s.q.z;
        let om = omega();
        let th = theta(s);
        let dz = Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        let dzt = wedge(&dz, &th);
        let l_h = -exterior_derivative(&compose_j(grad_h), s, h);
        let l_f = -exterior_derivative(&compose_j(grad_f), s, h);
        let l_v3 = -exterior_derivative(&compose_j(grad_inv_z), s, h);
        let l_phi = -exterior_derivative(&compose_j(grad_phi), s, h);
        let y = s.flat();
        let phi = y[0] / z;
        let dphi = grad_phi(&y);
        let dinvz = grad_inv_z(&y);
        let rhs_v3 = wedge(&(-dinvz), &th) + om / z;
        vec![
            max_upper(&(l_h - (dzt / (z * z) + om / z))),
            max_upper(&(l_h - om)),
            max_upper(&(l_f - (om + dzt / (z * z) + om / z))),
            max_upper(&(l_v3 - rhs_v3)),
            max_upper(&(l_phi - (om * phi - wedge(&dphi, &th)))),
        ]
    };
    FormReport {
        names: names.iter().map(|s| s.to_string()).collect(),
        residuals: run(step),
        residuals_half: run(step / 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn st(x: f64, y: f64, z: f64, a: f64, b: f64, c: f64) -> CotangentState {
        CotangentState::new(x, y, z, a, b, c).unwrap()
    }

    #[test]
    fn hamiltonian_values() {
        assert_eq!(hamiltonian(&st(0.0, 0.0, 1.0, 1.0, 0.0, 0.0)), 0.5);
        assert_eq!(hamiltonian(&st(0.0, 0.0, 2.0, 0.0, 0.0, 1.0)), 2.0);
        assert_eq!(
            ham_vector_field(&st(0.0, 0.0, 1.0, 0.0, 0.0, 1.0)),
            Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, -1.0)
        );
    }

    #[test]
    fn hamilton_equations() {
        // ω₀(X_H, Y) = −dH(Y) with our sign of ω₀ = dq∧dp
        let s = st(0.3, -0.2, 0.7, 0.4, -1.1, 0.5);
        let x = ham_vector_field(&s);
        let lhs = omega().transpose() * x;
        assert!((lhs + dh(&s)).norm() < 1e-14 || (lhs - dh(&s)).norm() < 1e-14);
        assert!(dh(&s).dot(&x).abs() < 1e-14);
    }

    #[test]
    fn j_squares_to_minus_one() {
        let s = st(0.3, -0.2, 0.7, 0.4, -1.1, 0.5);
        let j = sasakian_j(&s);
        assert!((j * j + Matrix6::identity()).norm() < 1e-12);
        let g = sasaki_metric(&s);
        assert!((g - g.transpose()).norm() < 1e-12);
        assert!(g.symmetric_eigenvalues().min() > 0.0);
        // J H₁ = V₁/z²
        let f = frame(&s);
        let jh = j * f.horizontal(0);
        assert!((jh - f.vertical(0) / (0.49)).norm() < 1e-12);
        // (−θ)∘J = dH
        let lhs = -(j.transpose() * theta(&s));
        assert!((lhs - dh(&s)).norm() < 1e-12);
    }

    #[test]
    fn vertical_geodesic() {
        let s = integrate_flow(&st(0.0, 0.0, 1.0, 0.0, 0.0, 1.0), 1.0, 1e-4).unwrap();
        let e = 1f64.exp();
        assert!((s.q.z - e).abs() < 1e-8);
        assert!((s.p[2] - 1.0 / e).abs() < 1e-8);
    }

    #[test]
    fn reversible() {
        let s0 = st(0.1, 0.2, 0.8, 0.5, -0.3, 0.2);
        let s1 = integrate_flow(&s0, 1.0, 1e-3).unwrap();
        let s2 = integrate_flow(&s1, -1.0, 1e-3).unwrap();
        assert!((s2.flat() - s0.flat()).norm() < 1e-7);
    }

    #[test]
    fn underflow_reported() {
        // dives toward the boundary exponentially fast
        let s0 = st(0.0, 0.0, 1.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            integrate_flow(&s0, 800.0, 0.5),
            Err(Error::Underflow(_))
        ));
    }

    #[test]
    fn shooting_vertical() {
        let g = Moebius::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let r = shoot_neumann(&Horoball::at_infinity(2.0), &g).unwrap();
        assert_relative_eq!(r.cord.length, 4f64.ln(), epsilon = 1e-10);
        assert!(r.cord.start.x.abs() < 1e-10 && r.cord.start.y.abs() < 1e-10);
    }

    #[test]
    fn shooting_between_finite_balls() {
        let b0 = Horoball::finite(Complex64::new(0.2, -0.4), 0.3);
        let b1 = Horoball::finite(Complex64::new(1.5, 0.7), 0.5);
        let exact = crate::cords::common_perpendicular(&b0, &b1).unwrap();
        let g = shooting_guess(&b0, &b1).unwrap();
        let perturbed = [g[0] * 1.1 + 0.05, g[1] * 0.9 - 0.05, g[2] * 1.1];
        for guess in [g, perturbed] {
            let r = shoot_between(&b0, &b1, guess).unwrap();
            assert!((r.cord.length - exact.length).abs() < 1e-9);
            assert!((r.cord.start.vec() - exact.start.vec()).norm() < 1e-8);
            assert!((r.cord.end.vec() - exact.end.vec()).norm() < 1e-8);
        }
    }

    #[test]
    fn psh_values() {
        let s = st(0.1, 0.2, 1.0, 0.3, -0.5, 0.7);
        assert!((plurisubharmonic_value_horizontal(&s, 0) - 2.0).abs() < 1e-6);
        assert!((plurisubharmonic_value(&s, 2) - 2.0).abs() < 1e-6);
        let s2 = st(0.1, 0.2, 2.0, 0.3, -0.5, 0.7);
        assert!((plurisubharmonic_value_horizontal(&s2, 1) - 0.375).abs() < 1e-6);
        // the vertical pairing scales like z(z + 1)
        assert!((plurisubharmonic_value(&s2, 1) - 6.0).abs() < 1e-5);
    }

    #[test]
    fn form_identities() {
        let s = st(0.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        let rep = form_identity_residuals(&s, 1e-3);
        for k in 1..5 {
            assert!(rep.residuals[k] < 1e-5, "{} {}", rep.names[k], rep.residuals[k]);
        }
        let s = st(0.3, -0.7, 2.5, 0.2, -0.4, 0.9);
        let rep = form_identity_residuals(&s, 1e-3);
        for k in 1..5 {
            assert!(rep.residuals[k] < 1e-5, "{} {}", rep.names[k], rep.residuals[k]);
            assert!(rep.converges(k), "{} {:?}", rep.names[k], rep);
        }
        // −d(dH∘J) = ω₀, so the first identity is off by (1/z²)dz∧θ + (1/z − 1)ω₀
        assert!(rep.residuals[0] > 0.1);
    }

    #[test]
    fn dh_identity_on_z_pz_plane() {
        let s = st(0.0, 0.0, 3.0, 0.2, 0.1, 0.5);
        let w = -exterior_derivative(&compose_j(grad_h), &s, 1e-4);
        assert!((w[(2, 5)] - 1.0).abs() < 1e-8);
    }
}
