//! ℍ²×ℝ structures on torus-knot complements: the 2p-gon, its face pairings,
//! and the cord families between lifts of the semi-horo-torus.
//!
//! The ℍ² factor is built in the Poincaré disk with `v₀` at `w = 1`, then moved
//! to the upper half-plane by `z = i(1 + w)/(1 − w)`, which sends `v₀` to ∞.
//! Half-plane isometries are real [`Moebius`] elements; ℍ² sits inside ℍ³ as the
//! vertical plane over ℝ, so the horoball conventions of [`crate::group`] carry
//! over unchanged.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{apply_boundary, canonical_in, classify, CuspLattice, Kind, Moebius, Word};
use crate::hyperbolic::Ideal;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    S3,
    S2xS1,
}

impl std::str::FromStr for Ambient {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s3" => Ok(Ambient::S3),
            "s2xs1" | "s1xs2" => Ok(Ambient::S2xS1),
            _ => Err(Error::Parse(format!("unknown ambient {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusKnotParams {
    pub p: i64,
    pub q: i64,
    pub ambient: Ambient,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl TorusKnotParams {
    pub fn new(p: i64, q: i64, ambient: Ambient) -> Result<Self> {
        let ok = gcd(p, q) == 1
            && match ambient {
                Ambient::S3 => p >= 2 && q >= 2,
                Ambient::S2xS1 => p > q.abs() && q.abs() >= 2,
            };
        if !ok {
            return Err(Error::InvalidParams(format!(
                "({p},{q}) is not an admissible torus knot in {ambient:?}"
            )));
        }
        Ok(Self { p, q, ambient })
    }

    /// `(p, q)` as used for the polygon. In S³ the knots `T(p,q)` and `T(q,p)`
    /// agree, and a 4-gon with straight angles is degenerate, so `p = 2` is
    /// swapped out.
    pub fn polygon_pair(&self) -> (i64, i64) {
        match self.ambient {
            Ambient::S3 if self.p == 2 => (self.q, self.p),
            _ => (self.p, self.q),
        }
    }

    /// ℝ-shifts of `φᵢ` and of `τ_q` in the face pairings.
    pub fn shifts(&self) -> (f64, f64) {
        let (p, q) = self.polygon_pair();
        match self.ambient {
            Ambient::S3 => (1.0, q as f64),
            Ambient::S2xS1 => (0.0, p as f64),
        }
    }

    /// ℝ-shift of the longitude holonomy `(τ_q)^p`: the period of each cord family.
    pub fn longitude_shift(&self) -> f64 {
        self.polygon_pair().0 as f64 * self.shifts().1
    }

    /// Number of copies of the polygon glued into one surface `S_t`.
    pub fn copies(&self) -> i64 {
        match self.ambient {
            Ambient::S3 => self.polygon_pair().1,
            Ambient::S2xS1 => 1,
        }
    }
}

/// `2p + q − pq`.
pub fn euler_char(params: &TorusKnotParams) -> i64 {
    let (p, q) = (params.p, params.q);
    2 * p + q - p * q
}

/// The symmetric 2p-gon in the disk: even vertices ideal at the `p`-th roots of
/// unity, odd vertices at radius `radius` halfway between.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolygonP {
    pub p: usize,
    /// Euclidean radius of the compact vertices.
    pub radius: f64,
    /// Hyperbolic distance from the center to a compact vertex.
    pub center_distance: f64,
    /// `vertices[j]` is `v_j`; `v_{2p} = v_0`.
    pub vertices: Vec<Complex64>,
}

/// Finite side of a triangle with angles `(α, β, 0)`.
fn finite_side(alpha: f64, beta: f64) -> f64 {
    ((1.0 + alpha.cos() * beta.cos()) / (alpha.sin() * beta.sin())).acosh()
}

pub fn build_polygon(p: usize) -> Result<PolygonP> {
    if p < 2 {
        return Err(Error::InvalidParams(format!("polygon needs p ≥ 2, got {p}")));
    }
    let a = PI / p as f64;
    let c = finite_side(a, a);
    let radius = (0.5 * c).tanh();
    let vertices = (0..2 * p)
        .map(|j| {
            let r = if j % 2 == 0 { 1.0 } else { radius };
            Complex64::from_polar(r, j as f64 * a)
        })
        .collect();
    Ok(PolygonP { p, radius, center_distance: c, vertices })
}

impl PolygonP {
    pub fn vertex(&self, j: i64) -> Complex64 {
        self.vertices[j.rem_euclid(2 * self.p as i64) as usize]
    }

    pub fn is_ideal(&self, j: i64) -> bool {
        j.rem_euclid(2) == 0
    }

    /// Interior angle at `v_j` measured between the two sides leaving it.
    pub fn interior_angle(&self, j: i64) -> f64 {
        let a = self.vertex(j);
        // move v_j to the origin, where geodesics are diameters
        let m = |w: Complex64| (w - a) / (Complex64::new(1.0, 0.0) - a.conj() * w);
        let (u, v) = (m(self.vertex(j - 1)), m(self.vertex(j + 1)));
        (v / u).arg().abs()
    }

    /// Sum of interior angles at the compact vertices.
    pub fn angle_sum(&self) -> f64 {
        (0..self.p as i64).map(|i| self.interior_angle(2 * i + 1)).sum()
    }

    pub fn half_plane_vertex(&self, j: i64) -> Ideal {
        if self.is_ideal(j) {
            cayley_ideal(self.vertex(j))
        } else {
            Ideal::Finite(cayley(self.vertex(j)))
        }
    }
}

/// Disk to upper half-plane.
pub fn cayley(w: Complex64) -> Complex64 {
    I * (1.0 + w) / (1.0 - w)
}

pub fn cayley_ideal(w: Complex64) -> Ideal {
    if (w - 1.0).norm() < 1e-12 {
        Ideal::Infinity
    } else {
        Ideal::Finite(Complex64::new(cayley(w).re, 0.0))
    }
}

/// A Möbius map with real coefficients acting on the upper half-plane.
pub fn act(g: &Moebius, z: Complex64) -> Complex64 {
    (g.a * z + g.b) / (g.c * z + g.d)
}

fn real_moebius(a: f64, b: f64, c: f64, d: f64, word: Word) -> Moebius {
    let mut m = Moebius::real(a, b, c, d);
    m.word = word;
    m
}

/// A real element sending the ideal point `xi` to ∞.
fn to_infinity(xi: Ideal) -> Moebius {
    match xi {
        Ideal::Infinity => Moebius::identity(),
        Ideal::Finite(x) => Moebius::real(0.0, -1.0, 1.0, -x.re),
    }
}

/// Rotation by `theta` about `i`, the image of the disk center.
pub fn rotation(theta: f64) -> Moebius {
    let (s, c) = (0.5 * theta).sin_cos();
    Moebius::real(c, s, -s, c)
}

/// An isometry of ℍ² paired with a shift of the ℝ factor.
#[derive(Clone, Debug)]
pub struct FacePairing {
    pub h2: Moebius,
    pub shift: f64,
}

#[derive(Clone, Debug)]
pub struct PairingSet {
    /// `φ₁, …, φ_p`.
    pub phis: Vec<FacePairing>,
    /// `τ_q` with its shift.
    pub tau: FacePairing,
}

/// `φᵢ`: fixes `v_{2i}` and carries `v_{2i−1}` to `v_{2i+1}`.
pub fn phi(poly: &PolygonP, i: i64) -> Moebius {
    let xi = poly.half_plane_vertex(2 * i);
    let m = to_infinity(xi);
    let (from, to) = match (poly.half_plane_vertex(2 * i - 1), poly.half_plane_vertex(2 * i + 1)) {
        (Ideal::Finite(a), Ideal::Finite(b)) => (act(&m, a), act(&m, b)),
        _ => unreachable!("odd vertices are interior"),
    };
    let lam = to.im / from.im;
    let mu = to.re - lam * from.re;
    let s = lam.sqrt();
    let affine = Moebius::real(s, mu / s, 0.0, 1.0 / s);
    let g = m.inverse().mul(&affine).mul(&m);
    let letter = Word::letter((i - 1).rem_euclid(poly.p as i64) as usize, false);
    real_moebius(g.a.re, g.b.re, g.c.re, g.d.re, letter)
}

/// `τ_k`: rotation by `2πk/p`, sending `v_j` to `v_{j+2k}`.
pub fn tau_k(poly: &PolygonP, k: i64) -> Moebius {
    let g = rotation(2.0 * PI * k as f64 / poly.p as f64);
    let word = Word::letter(poly.p, false).pow(k);
    real_moebius(g.a.re, g.b.re, g.c.re, g.d.re, word)
}

pub fn face_pairings(params: &TorusKnotParams, poly: &PolygonP) -> PairingSet {
    let (phi_shift, tau_shift) = params.shifts();
    let q = params.polygon_pair().1;
    PairingSet {
        phis: (1..=poly.p as i64)
            .map(|i| FacePairing { h2: phi(poly, i), shift: phi_shift })
            .collect(),
        tau: FacePairing { h2: tau_k(poly, q), shift: tau_shift },
    }
}

/// Product `φ_p ∘ ⋯ ∘ φ₁`, which walks `v₁` once around the compact vertex cycle.
pub fn vertex_cycle(poly: &PolygonP) -> Moebius {
    (1..=poly.p as i64).fold(Moebius::identity(), |acc, i| phi(poly, i).mul(&acc))
}

pub fn all_parabolic(pairings: &PairingSet) -> bool {
    pairings.phis.iter().all(|f| classify(&f.h2) == Kind::Parabolic)
}

/// A lift of the cusp horoball: `element · B∞` has center `center` on ℝ and
/// Euclidean diameter `diameter`.
#[derive(Clone, Debug)]
pub struct Ball2 {
    pub element: Moebius,
    pub center: f64,
    pub diameter: f64,
}

/// The ℍ² projection of the deck group, `⟨φ₁, …, φ_p, τ⟩`, with its cusp at ∞
/// stabilized by the translation `φ_p`.
#[derive(Clone, Debug)]
pub struct SurfaceGroup {
    pub generators: Vec<Moebius>,
    pub translation: f64,
}

impl SurfaceGroup {
    pub fn new(poly: &PolygonP) -> Self {
        let mut generators: Vec<Moebius> = (1..=poly.p as i64).map(|i| phi(poly, i)).collect();
        generators.push(tau_k(poly, 1));
        let t = &generators[poly.p - 1];
        let translation = (t.b / t.d).re;
        Self { generators, translation }
    }

    fn lattice(&self) -> CuspLattice {
        CuspLattice { mu: Complex64::new(self.translation, 0.0), lambda: None }
    }

    fn period(&self) -> f64 {
        self.translation.abs()
    }

    fn peripheral(&self, i: i64) -> Moebius {
        let t = &self.generators[self.generators.len() - 2];
        let mut m = Moebius::translation(Complex64::new(self.translation * i as f64, 0.0));
        m.word = t.word.pow(i);
        m
    }

    /// Representative of `Γ∞ g Γ∞` with center and pole in `[0, L)`.
    pub fn canonical(&self, g: &Moebius) -> Result<Moebius> {
        canonical_in(g, &self.lattice(), |i, _| self.peripheral(i))
    }

    fn reduce(&self, x: f64) -> (f64, i64) {
        let l = self.period();
        let k = (x / l).floor() as i64;
        let mut r = x - k as f64 * l;
        let mut k = k;
        if r >= l * (1.0 - 1e-12) {
            r -= l;
            k += 1;
        }
        (r, k)
    }

    fn translate(&self, g: &Moebius, k: i64) -> Moebius {
        // the peripheral generator may translate by −L
        let sign = self.translation.signum() as i64;
        self.peripheral(sign * k).mul(g)
    }

    /// Distinct elements of word length ≤ `len` in `gens` and their inverses.
    fn ball_of_words(gens: &[Moebius], len: usize, cap: usize) -> Vec<Moebius> {
        let mut all_gens = gens.to_vec();
        all_gens.extend(gens.iter().map(|g| g.inverse()));
        let mut seen: HashMap<[i64; 4], ()> = HashMap::new();
        let mut frontier = vec![Moebius::identity()];
        seen.insert(element_key(&frontier[0]), ());
        let mut all = Vec::new();
        for _ in 0..len {
            let mut next = Vec::new();
            for m in &frontier {
                for g in &all_gens {
                    let e = m.mul(g);
                    if seen.insert(element_key(&e), ()).is_none() {
                        next.push(e);
                    }
                }
            }
            all.extend(next.iter().cloned());
            if all.len() > cap {
                break;
            }
            frontier = next;
        }
        all
    }

    /// Non-peripheral elements of word length ≤ `len`, one per isometric
    /// interval modulo translation, widest first.
    fn candidates(&self, len: usize) -> Vec<Moebius> {
        let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
        let mut all: Vec<Moebius> = Self::ball_of_words(&self.generators, len, 200_000)
            .into_iter()
            .filter(|e| e.c.norm() > 1e-10)
            .filter(|e| {
                let (pole, _) = self.reduce((-e.d / e.c).re);
                let key = ((pole * 1e8).round() as i64, (e.c.norm() * 1e8).round() as i64);
                seen.insert(key, ()).is_none()
            })
            .collect();
        all.sort_by(|a, b| a.c.norm().partial_cmp(&b.c.norm()).unwrap());
        all
    }

    fn intervals_cover(&self, set: &[Moebius]) -> bool {
        let l = self.period();
        let mut iv: Vec<(f64, f64)> = Vec::new();
        for g in set {
            let (pole, _) = self.reduce((-g.d / g.c).re);
            let r = 1.0 / g.c.norm();
            for k in -1..=1 {
                let c = pole + k as f64 * l;
                iv.push((c - r, c + r));
            }
        }
        iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // open intervals must overlap, not merely touch
        let margin = 1e-9 * l;
        let mut reach = f64::NEG_INFINITY;
        let mut started = false;
        for (lo, hi) in iv {
            if !started {
                if lo < -margin {
                    reach = reach.max(hi);
                    continue;
                }
                started = true;
                if reach <= 0.0 {
                    return false;
                }
            }
            if reach > l + margin {
                return true;
            }
            if lo >= reach - margin {
                return false;
            }
            reach = reach.max(hi);
        }
        reach > l + margin
    }

    /// Smallest prefix of the candidate list whose open isometric intervals
    /// cover a period of ℝ, closed under inversion.
    pub fn covering_set(&self, max_len: usize) -> Result<Vec<Moebius>> {
        for len in 2..=max_len {
            let cand = self.candidates(len);
            for n in 1..=cand.len() {
                if self.intervals_cover(&cand[..n]) {
                    let mut s = cand[..n].to_vec();
                    s.extend(cand[..n].iter().map(|g| g.inverse()));
                    return Ok(s);
                }
            }
        }
        Err(Error::Certificate(format!(
            "isometric intervals from words of length ≤ {max_len} do not cover a period"
        )))
    }

    /// Largest height at which the cusp horoball is embedded: `1/min |c|`.
    pub fn max_embedded_height(&self) -> Result<f64> {
        let s = self.covering_set(8)?;
        let c = s.iter().map(|g| g.c.norm()).fold(f64::INFINITY, f64::min);
        Ok(1.0 / c)
    }

    /// All lifts of the cusp horoball at height `y0` with diameter ≥
    /// `min_diameter`, one per translation class.
    pub fn horoballs(&self, y0: f64, min_diameter: f64, max_balls: usize) -> Result<Vec<Ball2>> {
        let cover = self.covering_set(8)?;
        let key = |x: f64, d: f64| ((x * 1e9).round() as i64, (d.ln() * 1e9).round() as i64);
        let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
        let mut out: Vec<Ball2> = Vec::new();
        let mut queue: Vec<Option<Ball2>> = vec![None];
        while let Some(item) = queue.pop() {
            for s in &cover {
                let si = s.inverse();
                let images: Vec<Moebius> = match &item {
                    None => vec![si.clone()],
                    Some(b) => {
                        // s⁻¹ Tᵏ b with diameter ≥ min: |c'(x + kL) + d'| ≤ √(D/δ)
                        let reach = (b.diameter / min_diameter).sqrt() / si.c.norm().max(1e-300);
                        if si.c.norm() < 1e-12 {
                            continue;
                        }
                        let pole = (-si.d / si.c).re;
                        let l = self.period();
                        let k0 = ((pole - reach - b.center) / l).floor() as i64;
                        let k1 = ((pole + reach - b.center) / l).ceil() as i64;
                        (k0..=k1).map(|k| si.mul(&self.translate(&b.element, k))).collect()
                    }
                };
                for g in images {
                    if g.c.norm() < 1e-12 {
                        continue;
                    }
                    let diameter = 1.0 / (g.c.norm_sqr() * y0);
                    if diameter < min_diameter * (1.0 - 1e-12) {
                        continue;
                    }
                    let (center, k) = self.reduce((g.a / g.c).re);
                    if seen.insert(key(center, diameter), ()).is_some() {
                        continue;
                    }
                    let element = self.translate(&g, -k);
                    let ball = Ball2 { element, center, diameter };
                    out.push(ball.clone());
                    if out.len() > max_balls {
                        return Err(Error::Budget(format!("more than {max_balls} horoballs")));
                    }
                    queue.push(Some(ball));
                }
            }
        }
        Ok(out)
    }

    /// Unpruned word search over the generators `φ_p` and `τ`, which already
    /// generate the group: every ball reached by a word of length ≤ `len`.
    pub fn horoballs_by_words(&self, y0: f64, min_diameter: f64, len: usize) -> Vec<Ball2> {
        let n = self.generators.len();
        let gens = [self.generators[n - 2].clone(), self.generators[n - 1].clone()];
        let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
        let mut out = Vec::new();
        for e in Self::ball_of_words(&gens, len, usize::MAX) {
            if e.c.norm() < 1e-12 {
                continue;
            }
            let diameter = 1.0 / (e.c.norm_sqr() * y0);
            let (center, k) = self.reduce((e.a / e.c).re);
            let key = ((center * 1e9).round() as i64, (diameter.ln() * 1e9).round() as i64);
            if diameter >= min_diameter * (1.0 - 1e-12) && seen.insert(key, ()).is_none() {
                out.push(Ball2 { element: self.translate(&e, -k), center, diameter });
            }
        }
        out
    }
}

/// Key identifying `±g`.
fn element_key(g: &Moebius) -> [i64; 4] {
    let v = [g.a.re, g.b.re, g.c.re, g.d.re];
    let first = v.iter().find(|x| x.abs() > 1e-9).copied().unwrap_or(1.0);
    let s = first.signum();
    v.map(|x| (s * x * 1e7).round() as i64)
}

/// One S¹-family of cords: the vertical segment from `B∞` down to a lift of the
/// horoball, swept along the ℝ factor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CordFamily {
    pub class_word: String,
    pub length: f64,
    pub center: f64,
    pub diameter: f64,
    /// Period of the ℝ-parameter of the family (the longitude shift).
    pub circle_period: f64,
}

impl CordFamily {
    /// Endpoints of the member at level `t` in `(x, y, t)` coordinates of ℍ²×ℝ.
    pub fn member(&self, height: f64, t: f64) -> [[f64; 3]; 2] {
        [[self.center, height, t], [self.center, self.diameter, t]]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceSpectrum {
    pub params: TorusKnotParams,
    pub polygon_order: usize,
    pub height: f64,
    pub embedded_height: f64,
    pub translation: f64,
    pub cutoff: f64,
    /// Polygon copies in one surface `S_t`; each family is counted once, not
    /// once per copy.
    pub copies: i64,
    pub families: Vec<CordFamily>,
}

impl SurfaceSpectrum {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for f in &self.families {
            wr.serialize(f)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Cord families of length ≤ `lmax`. `height` defaults to twice the largest
/// embedded height.
pub fn enumerate_surface_cords(
    params: &TorusKnotParams,
    lmax: f64,
    height: Option<f64>,
) -> Result<SurfaceSpectrum> {
    let (p, _) = params.polygon_pair();
    let poly = build_polygon(p as usize)?;
    let group = SurfaceGroup::new(&poly);
    let embedded = group.max_embedded_height()?;
    let y0 = height.unwrap_or(2.0 * embedded);
    if y0 < embedded * (1.0 - 1e-12) {
        return Err(Error::NotEmbedded { height: y0, embedded });
    }
    let balls = group.horoballs(y0, y0 * (-lmax).exp(), 2_000_000)?;
    let period = params.longitude_shift();
    let mut families: Vec<CordFamily> = balls
        .iter()
        .map(|b| {
            let canon = group.canonical(&b.element)?;
            Ok(CordFamily {
                class_word: canon.word.to_string(),
                length: (y0 / b.diameter).ln(),
                center: b.center,
                diameter: b.diameter,
                circle_period: period,
            })
        })
        .collect::<Result<_>>()?;
    families.retain(|f| f.length <= lmax);
    families.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap().then(a.center.partial_cmp(&b.center).unwrap()));
    Ok(SurfaceSpectrum {
        params: *params,
        polygon_order: p as usize,
        height: y0,
        embedded_height: embedded,
        translation: group.translation,
        cutoff: lmax,
        copies: params.copies(),
        families,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub counts: BTreeMap<i32, usize>,
    pub cutoff: f64,
}

impl RankTable {
    /// Each family carries a Morse function on its circle with one minimum
    /// (degree 0) and one maximum (degree 1).
    pub fn from_families(families: &[CordFamily], cutoff: f64) -> Self {
        let n = families.iter().filter(|f| f.length <= cutoff).count();
        let mut counts = BTreeMap::new();
        counts.insert(0, n);
        counts.insert(1, n);
        Self { counts, cutoff }
    }

    pub fn count(&self, degree: i32) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }
}

pub fn hw_rank_table(params: &TorusKnotParams, lmax: f64) -> Result<RankTable> {
    let spec = enumerate_surface_cords(params, lmax, None)?;
    Ok(RankTable::from_families(&spec.families, lmax))
}

/// Checks that `g` sends ideal point `a` to `b`.
pub fn maps_ideal(g: &Moebius, a: Ideal, b: Ideal, tol: f64) -> bool {
    apply_boundary(g, a).approx_eq(&b, tol)
}
