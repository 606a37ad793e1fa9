//! PSL(2,ℂ) isometries, group presentations, horoballs and double cosets of
//! the cusp subgroup.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hyperbolic::{Ideal, PointH3};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for |tr² − 4| when deciding parabolicity.
pub const PARABOLIC_TOL: f64 = 1e-8;

/// A word over generators; `k + 1` is generator `k`, `-(k + 1)` its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<i8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(gen: usize, inverse: bool) -> Self {
        let k = gen as i8 + 1;
        Word(vec![if inverse { -k } else { k }])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Concatenation followed by free reduction at the seam.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    pub fn parse(s: &str) -> Result<Word> {
        let mut w = Word::empty();
        for ch in s.chars() {
            let l = if ch.is_ascii_lowercase() {
                (ch as u8 - b'a') as i8 + 1
            } else if ch.is_ascii_uppercase() {
                -((ch as u8 - b'A') as i8 + 1)
            } else {
                return Err(Error::Parse(format!("bad letter {ch:?} in word {s:?}")));
            };
            w = w.concat(&Word(vec![l]));
        }
        Ok(w)
    }

    /// Sum of exponents of generator `gen`.
    pub fn exponent_sum(&self, gen: usize) -> i64 {
        let k = gen as i8 + 1;
        self.0
            .iter()
            .map(|&l| if l == k { 1 } else if l == -k { -1 } else { 0 })
            .sum()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            let c = if l > 0 {
                (b'a' + (l - 1) as u8) as char
            } else {
                (b'A' + (-l - 1) as u8) as char
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// An element of PSL(2,ℂ) with the word it was built from.
#[derive(Clone, Debug)]
pub struct Moebius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub word: Word,
}

impl Moebius {
    /// Normalizes to determinant one and applies the sign rule.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self::with_word(a, b, c, d, Word::empty())
    }

    pub fn with_word(a: Complex64, b: Complex64, c: Complex64, d: Complex64, word: Word) -> Self {
        let det = a * d - b * c;
        let s = det.sqrt();
        let mut m = Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
            word,
        };
        m.fix_sign();
        m
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn translation(t: Complex64) -> Self {
        Self::new(ONE, t, ZERO, ONE)
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    /// First nonzero entry in (a, b, c, d) order gets argument in (−π/2, π/2].
    fn fix_sign(&mut self) {
        let scale = self.a.norm() + self.b.norm() + self.c.norm() + self.d.norm();
        let eps = 1e-14 * scale;
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|e| e.norm() > eps)
            .unwrap_or(ONE);
        let flip = lead.re < 0.0 || (lead.re.abs() <= eps && lead.im < 0.0);
        if flip {
            self.a = -self.a;
            self.b = -self.b;
            self.c = -self.c;
            self.d = -self.d;
        }
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn mul(&self, o: &Moebius) -> Moebius {
        Moebius::with_word(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
            self.word.concat(&o.word),
        )
    }

    pub fn inverse(&self) -> Moebius {
        Moebius::with_word(self.d, -self.b, -self.c, self.a, self.word.inverse())
    }

    pub fn trace_sq(&self) -> Complex64 {
        let t = self.a + self.d;
        t * t
    }

    /// Distance to `other` in PSL(2,ℂ): min over the sign of the max entry difference.
    pub fn dist(&self, other: &Moebius) -> f64 {
        let e = self.entries();
        let f = other.entries();
        let plus = (0..4).map(|i| (e[i] - f[i]).norm()).fold(0.0, f64::max);
        let minus = (0..4).map(|i| (e[i] + f[i]).norm()).fold(0.0, f64::max);
        plus.min(minus)
    }

    pub fn approx_eq(&self, other: &Moebius, tol: f64) -> bool {
        self.dist(other) <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Moebius::identity(), tol)
    }

    pub fn is_peripheral(&self, tol: f64) -> bool {
        self.c.norm() <= tol
    }

    pub fn conjugate_by(&self, h: &Moebius) -> Moebius {
        h.mul(self).mul(&h.inverse())
    }
}

impl PartialEq for Moebius {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 1e-12)
    }
}

pub fn apply_boundary(g: &Moebius, w: Ideal) -> Ideal {
    match w {
        Ideal::Infinity => {
            if g.c.norm() <= 1e-14 * (g.a.norm() + g.d.norm()) {
                Ideal::Infinity
            } else {
                Ideal::Finite(g.a / g.c)
            }
        }
        Ideal::Finite(w) => {
            let den = g.c * w + g.d;
            // a pole up to rounding in c·w + d
            if den.norm() <= 1e-14 * ((g.c * w).norm() + g.d.norm()) {
                Ideal::Infinity
            } else {
                Ideal::Finite((g.a * w + g.b) / den)
            }
        }
    }
}

/// Poincaré extension.
pub fn apply_h3(g: &Moebius, q: &PointH3) -> PointH3 {
    let w = q.w();
    let z2 = q.z * q.z;
    let cwd = g.c * w + g.d;
    let den = cwd.norm_sqr() + g.c.norm_sqr() * z2;
    let nw = ((g.a * w + g.b) * cwd.conj() + g.a * g.c.conj() * z2) / den;
    PointH3 {
        x: nw.re,
        y: nw.im,
        z: q.z / den,
    }
}

/// Differential of the Poincaré extension applied to a coordinate vector.
pub fn push_vector(g: &Moebius, q: &PointH3, v: &Vector3<f64>) -> Vector3<f64> {
    let h = 1e-6 * q.z;
    let f = |s: f64| {
        apply_h3(
            g,
            &PointH3 {
                x: q.x + s * v[0],
                y: q.y + s * v[1],
                z: q.z + s * v[2],
            },
        )
        .vec()
    };
    let scale = v.norm().max(1e-300);
    let hs = h / scale;
    (f(-2.0 * hs) - f(2.0 * hs) + (f(hs) - f(-hs)) * 8.0) / (12.0 * hs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

pub fn classify(g: &Moebius) -> Kind {
    if g.is_identity(1e-12) {
        return Kind::Identity;
    }
    let t2 = g.trace_sq();
    if (t2 - 4.0).norm() < PARABOLIC_TOL {
        Kind::Parabolic
    } else if t2.im.abs() < PARABOLIC_TOL && t2.re >= 0.0 && t2.re < 4.0 {
        Kind::Elliptic
    } else {
        Kind::Loxodromic
    }
}

/// A horoball: `size` is the height when centered at ∞, else the Euclidean diameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horoball {
    pub center: Ideal,
    pub size: f64,
}

impl Horoball {
    pub fn at_infinity(height: f64) -> Self {
        Self {
            center: Ideal::Infinity,
            size: height,
        }
    }

    pub fn finite(center: Complex64, diameter: f64) -> Self {
        Self {
            center: Ideal::Finite(center),
            size: diameter,
        }
    }

    /// Signed defect: zero on the horosphere, negative inside the ball.
    pub fn defect(&self, q: &PointH3) -> f64 {
        match self.center {
            Ideal::Infinity => (self.size / q.z).ln(),
            Ideal::Finite(w) => (((q.w() - w).norm_sqr() + q.z * q.z) / (self.size * q.z)).ln(),
        }
    }

    /// Unit normal (hyperbolic length one) pointing into the ball.
    pub fn inward_normal(&self, q: &PointH3) -> Vector3<f64> {
        let z = q.z;
        match self.center {
            Ideal::Infinity => Vector3::new(0.0, 0.0, z),
            Ideal::Finite(w) => {
                let dw = q.w() - w;
                let s = dw.norm_sqr() + z * z;
                let g = Vector3::new(2.0 * dw.re / s, 2.0 * dw.im / s, 2.0 * z / s - 1.0 / z);
                -g * (z * z)
            }
        }
    }

    /// Jacobian ∂ⱼNᵃ of the inward normal field, `jac[(a, j)]`.
    pub fn normal_jacobian(&self, q: &PointH3) -> nalgebra::Matrix3<f64> {
        let z = q.z;
        match self.center {
            Ideal::Infinity => {
                let mut m = nalgebra::Matrix3::zeros();
                m[(2, 2)] = 1.0;
                m
            }
            Ideal::Finite(w) => {
                let dw = q.w() - w;
                let d = [dw.re, dw.im, z];
                let s = dw.norm_sqr() + z * z;
                let g = Vector3::new(2.0 * d[0] / s, 2.0 * d[1] / s, 2.0 * z / s - 1.0 / z);
                // Hessian of ln((|Δ|² + z²)/z)
                let mut hg = nalgebra::Matrix3::zeros();
                for a in 0..3 {
                    for j in 0..3 {
                        let delta = if a == j { 1.0 } else { 0.0 };
                        hg[(a, j)] = 2.0 * delta / s - 4.0 * d[a] * d[j] / (s * s);
                    }
                }
                hg[(2, 2)] += 1.0 / (z * z);
                let mut jac = -hg * (z * z);
                for a in 0..3 {
                    jac[(a, 2)] -= 2.0 * z * g[a];
                }
                jac
            }
        }
    }
}

/// Distance between disjoint horoballs (negative when they overlap).
pub fn horoball_distance(b0: &Horoball, b1: &Horoball) -> Result<f64> {
    match (b0.center, b1.center) {
        (Ideal::Infinity, Ideal::Infinity) => Err(Error::SameCenter),
        (Ideal::Infinity, Ideal::Finite(_)) => Ok((b0.size / b1.size).ln()),
        (Ideal::Finite(_), Ideal::Infinity) => Ok((b1.size / b0.size).ln()),
        (Ideal::Finite(u), Ideal::Finite(v)) => {
            let d2 = (u - v).norm_sqr();
            if d2 == 0.0 {
                return Err(Error::SameCenter);
            }
            Ok((d2 / (b0.size * b1.size)).ln())
        }
    }
}

/// An element sending ∞ to `w`: w ↦ w − 1/u, i.e. [[w, −1], [1, 0]].
pub fn to_center(w: Complex64) -> Moebius {
    Moebius::new(w, -ONE, ONE, ZERO)
}

pub fn image_horoball(g: &Moebius, b: &Horoball) -> Horoball {
    match b.center {
        Ideal::Infinity => {
            if g.c.norm() <= 1e-14 * (g.a.norm() + g.d.norm()) {
                Horoball::at_infinity(b.size * g.a.norm_sqr())
            } else {
                Horoball::finite(g.a / g.c, 1.0 / (g.c.norm_sqr() * b.size))
            }
        }
        Ideal::Finite(w) => {
            // b = h(B∞) with height 1/diameter
            let h = to_center(w);
            image_horoball(&g.mul(&h), &Horoball::at_infinity(1.0 / b.size))
        }
    }
}

/// Lattice of translations fixing ∞: `mu` (real meridian) and `lambda`.
/// A rank-one lattice has `lambda = None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspLattice {
    pub mu: Complex64,
    pub lambda: Option<Complex64>,
}

impl CuspLattice {
    /// Coordinates of `w` in the lattice basis.
    pub fn coords(&self, w: Complex64) -> (f64, f64) {
        match self.lambda {
            None => ((w / self.mu).re, 0.0),
            Some(l) => {
                // w = u mu + v lambda
                let det = self.mu.re * l.im - self.mu.im * l.re;
                let u = (w.re * l.im - w.im * l.re) / det;
                let v = (self.mu.re * w.im - self.mu.im * w.re) / det;
                (u, v)
            }
        }
    }

    pub fn point(&self, u: f64, v: f64) -> Complex64 {
        self.mu * u + self.lambda.unwrap_or(ZERO) * v
    }

    /// Lattice shift (i, j) bringing `w` into the fundamental parallelogram.
    pub fn reduce(&self, w: Complex64) -> (i64, i64) {
        let (u, v) = self.coords(w);
        let fl = |t: f64| {
            let f = t.floor();
            // snap values a hair below an integer onto it
            if t - f > 1.0 - 1e-9 {
                f as i64 + 1
            } else {
                f as i64
            }
        };
        let j = if self.lambda.is_some() { fl(v) } else { 0 };
        (fl(u), j)
    }

    pub fn rank(&self) -> usize {
        if self.lambda.is_some() {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GeneratorJson {
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    d: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PresentationJson {
    name: String,
    generators: Vec<GeneratorJson>,
    relators: Vec<String>,
    meridian: String,
    longitude: String,
    cusp_lattice: [[f64; 2]; 2],
}

#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub name: String,
    pub generators: Vec<Moebius>,
    pub relators: Vec<Word>,
    pub meridian: Word,
    pub longitude: Word,
    pub lattice: CuspLattice,
}

impl GroupPresentation {
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PresentationJson = serde_json::from_str(s)?;
        let c = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        let generators = raw
            .generators
            .iter()
            .enumerate()
            .map(|(k, g)| Moebius::with_word(c(g.a), c(g.b), c(g.c), c(g.d), Word::letter(k, false)))
            .collect::<Vec<_>>();
        if generators.is_empty() || generators.len() > 26 {
            return Err(Error::Parse("need between 1 and 26 generators".into()));
        }
        let relators = raw
            .relators
            .iter()
            .map(|r| Word::parse(r))
            .collect::<Result<Vec<_>>>()?;
        let meridian = Word::parse(&raw.meridian)?;
        let longitude = Word::parse(&raw.longitude)?;
        let n = generators.len() as i8;
        for w in relators.iter().chain([&meridian, &longitude]) {
            if w.0.iter().any(|l| l.abs() > n) {
                return Err(Error::Parse(format!("word {w} uses an unknown generator")));
            }
        }
        Ok(Self {
            name: raw.name,
            generators,
            relators,
            meridian,
            longitude,
            lattice: CuspLattice {
                mu: c(raw.cusp_lattice[0]),
                lambda: Some(c(raw.cusp_lattice[1])),
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let p = |z: Complex64| [z.re, z.im];
        let raw = PresentationJson {
            name: self.name.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorJson {
                    a: p(g.a),
                    b: p(g.b),
                    c: p(g.c),
                    d: p(g.d),
                })
                .collect(),
            relators: self.relators.iter().map(|w| w.to_string()).collect(),
            meridian: self.meridian.to_string(),
            longitude: self.longitude.to_string(),
            cusp_lattice: [p(self.lattice.mu), p(self.lattice.lambda.unwrap_or(ZERO))],
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn figure_eight() -> Self {
        Self::from_json(crate::FIGURE_EIGHT_JSON).expect("bundled holonomy parses")
    }

    pub fn evaluate(&self, w: &Word) -> Moebius {
        let mut m = Moebius::identity();
        for &l in &w.0 {
            let g = &self.generators[(l.unsigned_abs() - 1) as usize];
            let g = if l > 0 { g.clone() } else { g.inverse() };
            m = m.mul(&g);
        }
        m.word = w.clone();
        m
    }

    /// Generators followed by their inverses.
    pub fn symmetric_generators(&self) -> Vec<Moebius> {
        let mut out = self.generators.clone();
        out.extend(self.generators.iter().map(|g| g.inverse()));
        out
    }

    /// Translation by `i·mu + j·lambda` with its word in meridian and longitude.
    pub fn peripheral(&self, i: i64, j: i64) -> Moebius {
        let t = self.lattice.point(i as f64, j as f64);
        let w = self.meridian.pow(i).concat(&self.longitude.pow(j));
        let mut m = Moebius::translation(t);
        m.word = w;
        m
    }

    /// Conjugates so that the meridian fixes ∞ and translates by a positive real.
    pub fn normalized(&self) -> Result<Self> {
        let m = self.evaluate(&self.meridian);
        if classify(&m) != Kind::Parabolic {
            return Err(Error::InvalidParams("meridian is not parabolic".into()));
        }
        // fixed point of a parabolic: (a − d)/(2c), or ∞ when c = 0
        let mut h = if m.c.norm() > 1e-12 {
            let fix = (m.a - m.d) / (m.c * 2.0);
            to_center(fix).inverse()
        } else {
            Moebius::identity()
        };
        let m1 = m.conjugate_by(&h);
        let t = m1.b / m1.d;
        // scale w ↦ w/t: [[1/√t, 0], [0, √t]]
        let s = t.sqrt();
        h = Moebius::new(ONE / s, ZERO, ZERO, s).mul(&h);
        let generators = self
            .generators
            .iter()
            .map(|g| {
                let mut c = g.conjugate_by(&h);
                c.word = g.word.clone();
                c
            })
            .collect::<Vec<_>>();
        let mut out = Self {
            generators,
            ..self.clone()
        };
        let mt = out.evaluate(&out.meridian);
        let lt = out.evaluate(&out.longitude);
        out.lattice = CuspLattice {
            mu: mt.b / mt.d,
            lambda: Some(lt.b / lt.d),
        };
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresentationReport {
    pub relator_residuals: Vec<f64>,
    pub meridian_parabolic: bool,
    pub longitude_parabolic: bool,
    pub peripheral_fix_infinity: bool,
    pub commutator_residual: f64,
    pub lattice_residual: f64,
    pub passed: bool,
}

pub fn verify_presentation(rep: &GroupPresentation, tol: f64) -> PresentationReport {
    let relator_residuals = rep
        .relators
        .iter()
        .map(|r| rep.evaluate(r).dist(&Moebius::identity()))
        .collect::<Vec<_>>();
    let m = rep.evaluate(&rep.meridian);
    let l = rep.evaluate(&rep.longitude);
    let meridian_parabolic = classify(&m) == Kind::Parabolic;
    let longitude_parabolic = classify(&l) == Kind::Parabolic;
    let peripheral_fix_infinity = m.c.norm() <= tol && l.c.norm() <= tol;
    let commutator_residual = m.mul(&l).dist(&l.mul(&m));
    let lattice_residual = if peripheral_fix_infinity {
        let tm = m.b / m.d;
        let tl = l.b / l.d;
        let lam = rep.lattice.lambda.unwrap_or(ZERO);
        (tm - rep.lattice.mu).norm().max((tl - lam).norm())
    } else {
        f64::INFINITY
    };
    let passed = relator_residuals.iter().all(|&r| r <= tol)
        && meridian_parabolic
        && longitude_parabolic
        && peripheral_fix_infinity
        && commutator_residual <= tol
        && lattice_residual <= tol
        && rep.lattice.mu.im.abs() <= tol;
    PresentationReport {
        relator_residuals,
        meridian_parabolic,
        longitude_parabolic,
        peripheral_fix_infinity,
        commutator_residual,
        lattice_residual,
        passed,
    }
}

/// Canonical representative of Γ∞ g Γ∞: both g(∞) and g⁻¹(∞) in the
/// fundamental parallelogram of the cusp lattice.
pub fn double_coset_canonical(g: &Moebius, rep: &GroupPresentation) -> Result<Moebius> {
    canonical_in(g, &rep.lattice, |i, j| rep.peripheral(i, j))
}

pub(crate) fn canonical_in<F>(g: &Moebius, lattice: &CuspLattice, peripheral: F) -> Result<Moebius>
where
    F: Fn(i64, i64) -> Moebius,
{
    if g.is_peripheral(1e-12 * (g.a.norm() + g.d.norm() + 1.0)) {
        return Err(Error::Peripheral);
    }
    let (i, j) = lattice.reduce(g.a / g.c);
    let left = peripheral(-i, -j);
    let g1 = left.mul(g);
    let back = -g1.d / g1.c;
    let (k, l) = lattice.reduce(back);
    let right = peripheral(k, l);
    Ok(g1.mul(&right))
}

/// Limits for the breadth-first word enumeration.
#[derive(Clone, Copy, Debug)]
pub struct EnumLimits {
    pub max_word_len: usize,
    pub max_elements: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        Self {
            max_word_len: 8,
            max_elements: 500_000,
        }
    }
}

/// Key for de-duplicating elements of PSL(2,ℂ) up to rounding.
fn element_key(m: &Moebius) -> [i64; 8] {
    let q = |x: f64| (x * 1e7).round() as i64;
    let e = m.entries();
    [
        q(e[0].re),
        q(e[0].im),
        q(e[1].re),
        q(e[1].im),
        q(e[2].re),
        q(e[2].im),
        q(e[3].re),
        q(e[3].im),
    ]
}

/// Distinct group elements reachable by freely reduced words, breadth-first,
/// pruning prefixes whose cord length at unit height `2 ln|c|` exceeds
/// `max_radius`. The result is closed under inversion and sorted by
/// (word length, word).
pub fn enumerate_elements(
    rep: &GroupPresentation,
    max_radius: f64,
    limits: EnumLimits,
) -> Result<Vec<Moebius>> {
    enumerate_words(rep, limits, |m| {
        m.c.norm() == 0.0 || 2.0 * m.c.norm().ln() <= max_radius || m.c.norm() < 1e-12
    })
}

/// Every distinct element up to the word-length cap, no pruning.
pub fn enumerate_exhaustive(rep: &GroupPresentation, limits: EnumLimits) -> Result<Vec<Moebius>> {
    enumerate_words(rep, limits, |_| true)
}

fn enumerate_words<F>(rep: &GroupPresentation, limits: EnumLimits, keep: F) -> Result<Vec<Moebius>>
where
    F: Fn(&Moebius) -> bool,
{
    let gens = rep.generators.len();
    let mut seen: HashMap<[i64; 8], Moebius> = HashMap::new();
    let id = Moebius::identity();
    seen.insert(element_key(&id), id.clone());
    let mut frontier = VecDeque::from([id]);
    while let Some(m) = frontier.pop_front() {
        if m.word.len() >= limits.max_word_len {
            continue;
        }
        for k in 0..gens {
            for inv in [false, true] {
                let letter = Word::letter(k, inv);
                if m.word.0.last() == Some(&-letter.0[0]) {
                    continue;
                }
                let g = if inv {
                    rep.generators[k].inverse()
                } else {
                    rep.generators[k].clone()
                };
                let next = m.mul(&g);
                if !keep(&next) {
                    continue;
                }
                let key = element_key(&next);
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key, next.clone());
                if seen.len() > limits.max_elements {
                    return Err(Error::Budget(format!(
                        "more than {} elements",
                        limits.max_elements
                    )));
                }
                frontier.push_back(next);
            }
        }
    }
    // close under inversion
    let inverses: Vec<Moebius> = seen.values().map(|m| m.inverse()).collect();
    for m in inverses {
        seen.entry(element_key(&m)).or_insert(m);
    }
    let mut out: Vec<Moebius> = seen.into_values().collect();
    out.sort_by(|a, b| {
        (a.word.len(), &a.word).cmp(&(b.word.len(), &b.word))
    });
    out.dedup_by(|a, b| a.approx_eq(b, 1e-9));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn word_parse_and_reduce() {
        let w = Word::parse("abBA").unwrap();
        assert!(w.is_empty());
        let w = Word::parse("aBc").unwrap();
        assert_eq!(w.to_string(), "aBc");
        assert_eq!(w.inverse().to_string(), "CbA");
        assert!(Word::parse("a1").is_err());
    }

    #[test]
    fn sign_rule() {
        let m = Moebius::real(-1.0, 0.0, 0.0, -1.0);
        assert_eq!(m.a, ONE);
        let m = Moebius::new(c(0.0, -1.0), ZERO, ZERO, c(0.0, 1.0));
        assert!(m.a.im > 0.0);
        let m = Moebius::new(c(0.0, 0.0), c(-2.0, 0.0), c(0.5, 0.0), c(1.0, 0.0));
        assert!(m.b.re > 0.0);
        assert_relative_eq!((m.a * m.d - m.b * m.c).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn boundary_action() {
        let t = Moebius::real(1.0, 1.0, 0.0, 1.0);
        assert_eq!(apply_boundary(&Moebius::identity(), Ideal::Finite(c(0.3, 1.0))), Ideal::Finite(c(0.3, 1.0)));
        assert_eq!(apply_boundary(&t, Ideal::Finite(ZERO)), Ideal::Finite(ONE));
        let g = Moebius::new(c(2.0, 1.0), c(1.0, 0.0), c(1.0, -1.0), c(1.0, 0.0));
        assert_eq!(apply_boundary(&g, Ideal::Infinity), Ideal::Finite(g.a / g.c));
        assert_eq!(apply_boundary(&g, Ideal::Finite(-g.d / g.c)), Ideal::Infinity);
    }

    #[test]
    fn h3_action() {
        let q = PointH3::new(0.0, 0.0, 1.0).unwrap();
        let t = Moebius::real(1.0, 1.0, 0.0, 1.0);
        let r = apply_h3(&t, &q);
        assert_relative_eq!(r.x, 1.0);
        assert_relative_eq!(r.z, 1.0);
        assert_eq!(apply_h3(&Moebius::identity(), &q), q);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&Moebius::real(1.0, 1.0, 0.0, 1.0)), Kind::Parabolic);
        assert_eq!(classify(&Moebius::identity()), Kind::Identity);
        let e = std::f64::consts::E;
        assert_eq!(classify(&Moebius::real(e, 0.0, 0.0, 1.0 / e)), Kind::Loxodromic);
        let th = 0.4f64;
        assert_eq!(
            classify(&Moebius::real(th.cos(), -th.sin(), th.sin(), th.cos())),
            Kind::Elliptic
        );
    }

    #[test]
    fn horoball_images() {
        let b = Horoball::at_infinity(1.0);
        assert_eq!(image_horoball(&Moebius::identity(), &b), b);
        let s = Moebius::real(0.0, -1.0, 1.0, 0.0);
        let img = image_horoball(&s, &b);
        assert_eq!(img.center, Ideal::Finite(ZERO));
        assert_relative_eq!(img.size, 1.0);
        let img2 = image_horoball(&s, &Horoball::at_infinity(2.0));
        assert_relative_eq!(img2.size, 0.5);
    }

    #[test]
    fn horoball_image_fits_sampled_sphere() {
        let g = Moebius::new(c(1.0, 0.5), c(0.2, -0.3), c(0.7, 0.4), c(1.5, 0.1));
        let a0 = 1.7;
        let img = image_horoball(&g, &Horoball::at_infinity(a0));
        let Ideal::Finite(w) = img.center else { panic!() };
        for k in 0..20 {
            let t = k as f64 * 0.37;
            let q = PointH3::new(3.0 * t.cos(), 2.0 * t.sin() - 1.0, a0).unwrap();
            let r = apply_h3(&g, &q);
            let centre = Vector3::new(w.re, w.im, img.size / 2.0);
            assert_relative_eq!((r.vec() - centre).norm(), img.size / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn image_horoball_commutes_with_composition() {
        let g = Moebius::new(c(1.0, 0.5), c(0.2, -0.3), c(0.7, 0.4), c(1.5, 0.1));
        let h = Moebius::new(c(0.3, 0.0), c(-1.0, 0.2), c(1.0, 1.0), c(0.5, -2.0));
        let b = Horoball::at_infinity(1.3);
        let lhs = image_horoball(&g.mul(&h), &b);
        let rhs = image_horoball(&g, &image_horoball(&h, &b));
        assert!(lhs.center.approx_eq(&rhs.center, 1e-12));
        assert_relative_eq!(lhs.size, rhs.size, max_relative = 1e-12);
    }

    #[test]
    fn normal_jacobian_matches_difference_quotient() {
        let b = Horoball::finite(c(0.3, -0.2), 0.8);
        let q = PointH3::new(0.1, 0.05, 0.5).unwrap();
        let jac = b.normal_jacobian(&q);
        let h = 1e-6;
        for j in 0..3 {
            let mut e = Vector3::zeros();
            e[j] = h;
            let qp = PointH3::from_vec(q.vec() + e).unwrap();
            let qm = PointH3::from_vec(q.vec() - e).unwrap();
            let fd = (b.inward_normal(&qp) - b.inward_normal(&qm)) / (2.0 * h);
            for a in 0..3 {
                assert!((fd[a] - jac[(a, j)]).abs() < 1e-8);
            }
        }
        let n = b.inward_normal(&q);
        assert_relative_eq!(n.norm() / q.z, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn figure_eight_verifies() {
        let rep = GroupPresentation::figure_eight();
        let r = verify_presentation(&rep, 1e-9);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn perturbed_presentation_fails() {
        let mut rep = GroupPresentation::figure_eight();
        rep.generators[1].c += 1e-3;
        let r = verify_presentation(&rep, 1e-9);
        assert!(r.relator_residuals[0] > 1e-9);
        assert!(!r.passed);
    }

    #[test]
    fn trivial_group_flags_parabolicity_only() {
        let json = r#"{"name":"trivial","generators":[{"a":[1,0],"b":[0,0],"c":[0,0],"d":[1,0]}],
            "relators":["a"],"meridian":"a","longitude":"a","cusp_lattice":[[1,0],[0,1]]}"#;
        let rep = GroupPresentation::from_json(json).unwrap();
        let r = verify_presentation(&rep, 1e-9);
        assert!(r.relator_residuals.iter().all(|&x| x < 1e-12));
        assert!(!r.meridian_parabolic);
        assert!(r.commutator_residual < 1e-12);
        assert!(!r.passed);
    }

    #[test]
    fn json_round_trip() {
        let rep = GroupPresentation::figure_eight();
        let back = GroupPresentation::from_json(&rep.to_json().unwrap()).unwrap();
        for (a, b) in rep.generators.iter().zip(&back.generators) {
            assert!(a.approx_eq(b, 1e-15));
        }
        assert_eq!(rep.longitude, back.longitude);
    }

    #[test]
    fn normalization_is_idempotent_on_normal_form() {
        let rep = GroupPresentation::figure_eight();
        let n = rep.normalized().unwrap();
        assert!((n.lattice.mu - rep.lattice.mu).norm() < 1e-12);
        assert!((n.lattice.lambda.unwrap() - rep.lattice.lambda.unwrap()).norm() < 1e-12);
    }

    #[test]
    fn normalization_undoes_conjugation() {
        let rep = GroupPresentation::figure_eight();
        let h = Moebius::new(c(0.7, 0.2), c(0.1, 1.0), c(-0.4, 0.3), c(1.2, 0.0));
        let mut conj = rep.clone();
        for g in conj.generators.iter_mut() {
            let w = g.word.clone();
            *g = g.conjugate_by(&h);
            g.word = w;
        }
        let n = conj.normalized().unwrap();
        assert!(verify_presentation(&n, 1e-9).passed);
        assert!((n.lattice.mu - 1.0).norm() < 1e-9);
        assert!((n.lattice.lambda.unwrap().im.abs() - 2.0 * 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn canonical_examples() {
        let rep = GroupPresentation::figure_eight();
        let g = rep.evaluate(&Word::parse("bAb").unwrap());
        let k = double_coset_canonical(&g, &rep).unwrap();
        let k2 = double_coset_canonical(&k, &rep).unwrap();
        assert!(k.approx_eq(&k2, 1e-12));
        let m = rep.peripheral(3, -1);
        let l = rep.peripheral(-2, 2);
        let k3 = double_coset_canonical(&m.mul(&g).mul(&l), &rep).unwrap();
        assert!(k.approx_eq(&k3, 1e-10));
        assert_relative_eq!(k.c.norm(), g.c.norm(), max_relative = 1e-12);
        assert!(matches!(
            double_coset_canonical(&rep.peripheral(1, 0), &rep),
            Err(Error::Peripheral)
        ));
        // the class word evaluates to the canonical matrix
        let again = rep.evaluate(&k.word);
        assert!(again.approx_eq(&k, 1e-9));
    }

    #[test]
    fn enumeration_below_shortest_cord_is_peripheral() {
        let rep = GroupPresentation::figure_eight();
        let els = enumerate_elements(&rep, -0.5, EnumLimits { max_word_len: 6, max_elements: 100_000 }).unwrap();
        assert!(!els.is_empty());
        assert!(els.iter().all(|m| m.c.norm() < 1e-12));
    }

    #[test]
    fn enumeration_closed_under_inverse() {
        let rep = GroupPresentation::figure_eight();
        let els = enumerate_elements(&rep, 2.0, EnumLimits { max_word_len: 6, max_elements: 100_000 }).unwrap();
        for m in &els {
            let inv = m.inverse();
            assert!(els.iter().any(|e| e.approx_eq(&inv, 1e-9)));
        }
    }

    #[test]
    fn enumeration_budget_is_reported() {
        let rep = GroupPresentation::figure_eight();
        let r = enumerate_elements(&rep, 10.0, EnumLimits { max_word_len: 10, max_elements: 100 });
        assert!(matches!(r, Err(Error::Budget(_))));
    }
}
