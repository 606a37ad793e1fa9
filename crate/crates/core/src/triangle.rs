//! Ideal triangles spanned by horoball centers and the right-angled hexagons
//! left after removing the horoballs.

use num_complex::Complex64;
use quadrature::double_exponential;
use serde::{Deserialize, Serialize};

use crate::cords::{common_perpendicular, ActionSpectrum, Cord};
use crate::error::{Error, Result};
use crate::group::{apply_boundary, apply_h3, horoball_distance, image_horoball, to_center, Horoball, Moebius};
use crate::hyperbolic::{Ideal, PointH3};
use crate::packing::CuspGroup;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Vertical half-plane that reductions aim for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    /// `{x = 0}`, over the imaginary axis.
    X0,
    /// `{y = 0}`, over ℝ̂.
    Y0,
}

impl Plane {
    pub fn defect(&self, q: &PointH3) -> f64 {
        match self {
            Plane::X0 => q.x.abs(),
            Plane::Y0 => q.y.abs(),
        }
    }

    fn boundary_defect(&self, w: &Ideal) -> f64 {
        match (self, w) {
            (_, Ideal::Infinity) => 0.0,
            (Plane::X0, Ideal::Finite(w)) => w.re.abs() / (1.0 + w.norm()),
            (Plane::Y0, Ideal::Finite(w)) => w.im.abs() / (1.0 + w.norm()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealTriangle {
    pub vertices: [Ideal; 3],
}

impl IdealTriangle {
    pub fn new(vertices: [Ideal; 3]) -> Result<Self> {
        for j in 0..3 {
            if vertices[j].approx_eq(&vertices[(j + 1) % 3], 1e-12) {
                return Err(Error::SameCenter);
            }
        }
        Ok(Self { vertices })
    }
}

/// The element sending `(p, q, r)` to `(0, 1, ∞)`.
fn to_zero_one_infinity(p: Ideal, q: Ideal, r: Ideal) -> Moebius {
    use Ideal::*;
    match (p, q, r) {
        (Infinity, Finite(q), Finite(r)) => Moebius::new(ZERO, q - r, ONE, -r),
        (Finite(p), Infinity, Finite(r)) => Moebius::new(ONE, -p, ONE, -r),
        (Finite(p), Finite(q), Infinity) => Moebius::new(ONE, -p, ZERO, q - p),
        (Finite(p), Finite(q), Finite(r)) => {
            Moebius::new(q - r, -p * (q - r), q - p, -r * (q - p))
        }
        _ => unreachable!("vertices are distinct"),
    }
}

/// An isometry carrying the three vertices onto the boundary of `plane`.
/// Triangles already in place get the identity; triangles with a vertex at ∞
/// get a Euclidean motion.
pub fn reduction_map(tri: &IdealTriangle, plane: Plane) -> Moebius {
    if tri.vertices.iter().all(|v| plane.boundary_defect(v) <= 1e-14) {
        return Moebius::identity();
    }
    let quarter = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let spin = match plane {
        Plane::Y0 => Moebius::identity(),
        Plane::X0 => Moebius::new(quarter, ZERO, ZERO, quarter.conj()),
    };
    let finite: Vec<Complex64> = tri
        .vertices
        .iter()
        .filter_map(|v| match v {
            Ideal::Finite(w) => Some(*w),
            Ideal::Infinity => None,
        })
        .collect();
    if finite.len() == 2 {
        let (p, q) = (finite[0], finite[1]);
        let rot = Complex64::from_polar(1.0, -0.5 * (q - p).arg());
        let euclid = Moebius::new(rot, -p * rot, ZERO, rot.conj());
        return spin.mul(&euclid);
    }
    let [p, q, r] = tri.vertices;
    spin.mul(&to_zero_one_infinity(p, q, r))
}

/// Finds an isometry placing the three cords in `plane`. The cords must use
/// exactly three horoball centers (or more, if those happen to be concyclic).
pub fn coplanar_reduce(cords: [&Cord; 3], plane: Plane) -> Result<Moebius> {
    let mut centers: Vec<Ideal> = Vec::new();
    for c in cords {
        for w in [c.from.center, c.to.center] {
            if !centers.iter().any(|u| u.approx_eq(&w, 1e-10)) {
                centers.push(w);
            }
        }
    }
    if centers.len() < 3 {
        return Err(Error::NotCoplanar);
    }
    let tri = IdealTriangle::new([centers[0], centers[1], centers[2]])?;
    let g = reduction_map(&tri, plane);
    let off = centers[3..]
        .iter()
        .map(|w| plane.boundary_defect(&apply_boundary(&g, *w)))
        .fold(0.0, f64::max);
    if off > 1e-9 {
        return Err(Error::NotCoplanar);
    }
    Ok(g)
}

/// Largest distance from `plane` of the image of sample points on the cords.
pub fn plane_defect(g: &Moebius, cords: &[&Cord], plane: Plane, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for c in cords {
        for k in 0..=samples {
            let q = apply_h3(g, &c.point(k as f64 / samples as f64));
            worst = worst.max(plane.defect(&q));
        }
    }
    worst
}

/// Length along the horosphere `ball` between two of its points in a common
/// vertical plane through its center.
pub fn horocyclic_length(ball: &Horoball, p: &PointH3, q: &PointH3) -> f64 {
    let (p, q) = match ball.center {
        Ideal::Infinity => (*p, *q),
        Ideal::Finite(w) => {
            let h = to_center(w).inverse();
            (apply_h3(&h, p), apply_h3(&h, q))
        }
    };
    (p.w() - q.w()).norm() / (0.5 * (p.z + q.z))
}

/// A right-angled hexagon: three geodesic sides alternating with three
/// horocyclic arcs. Side `j` joins vertex `j` to vertex `j + 1`; arc `j` sits on
/// the horoball at vertex `j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncatedTriangle {
    pub triangle: IdealTriangle,
    pub horoballs: [Horoball; 3],
    pub sides: [f64; 3],
    pub arcs: [f64; 3],
    /// Endpoints of side `j`, on the horoballs at vertices `j` and `j + 1`.
    pub corners: [[PointH3; 2]; 3],
    /// Hyperbolic area by quadrature.
    pub area: f64,
}

impl TruncatedTriangle {
    pub fn arc_sum(&self) -> f64 {
        self.arcs.iter().sum()
    }

    /// `area − (π + Σ arcs)`.
    pub fn excess_plus(&self) -> f64 {
        self.area - std::f64::consts::PI - self.arc_sum()
    }

    /// `area − (π − Σ arcs)`, the Gauss–Bonnet balance for concave horocyclic
    /// sides.
    pub fn excess_minus(&self) -> f64 {
        self.area - std::f64::consts::PI + self.arc_sum()
    }

    pub fn side_cords(&self) -> Result<[Cord; 3]> {
        let b = &self.horoballs;
        Ok([
            common_perpendicular(&b[0], &b[1])?,
            common_perpendicular(&b[1], &b[2])?,
            common_perpendicular(&b[2], &b[0])?,
        ])
    }

    /// Largest deviation from a right angle where sides meet arcs, measured
    /// as the tangential part of the unit side direction.
    pub fn corner_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for c in self.side_cords()? {
            let (d0, d1) = c.orthogonality_defect();
            worst = worst.max(d0).max(d1);
        }
        Ok(worst)
    }
}

/// Horocyclic arc lengths from side lengths: the arc at a vertex is
/// `exp((opposite − adjacent − adjacent)/2)`.
pub fn arcs_from_sides(sides: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|j| {
        let opp = sides[(j + 1) % 3];
        let adj = sides[j] + sides[(j + 2) % 3];
        (0.5 * (opp - adj)).exp()
    })
}

/// Area of the hexagon with the given geodesic side lengths, integrated in
/// the upper half-plane with vertex 0 at ∞ and the other two at 0 and 1.
pub fn hexagon_area(sides: [f64; 3]) -> Result<f64> {
    let arcs = arcs_from_sides(sides);
    if let Some(a) = arcs.iter().find(|a| **a > 2.0) {
        return Err(Error::NotHexagon(*a));
    }
    let top = (0.5 * sides[1]).exp() * (0.5 * (sides[0] + sides[2])).exp().recip();
    let height = top.recip();
    let d1 = (-sides[0]).exp() * height;
    let d2 = (-sides[2]).exp() * height;
    let radius = 0.5;
    // vertical extent of a disk tangent to the axis, `off` away from its center
    let slice = |off: f64, dia: f64| {
        let r = 0.5 * dia;
        let s = r * r - off * off;
        (s > 0.0).then(|| (r - s.sqrt(), r + s.sqrt()))
    };
    // x = R(1 − cos θ) along the side from 0 to 1, so the side sits at height
    // R sin θ and dz/z² integrates against dx to a slice weight
    let f = |th: f64| {
        let (half_s, half_c) = (0.5 * th).sin_cos();
        let from0 = 2.0 * radius * half_s * half_s;
        let from1 = 2.0 * radius * half_c * half_c;
        let semi = radius * th.sin();
        let mut w = 1.0 - semi / height;
        for (off, dia) in [(from0, d1), (from1, d2)] {
            if let Some((bot, top)) = slice(off, dia) {
                if top > semi {
                    let lo = bot.max(semi);
                    w -= semi / lo - semi / top;
                }
            }
        }
        w
    };
    let angle = |x: f64| 2.0 * (x / (2.0 * radius)).sqrt().asin();
    // where the side leaves each disk, and where each disk ends horizontally
    let exit = |dia: f64| 2.0 * radius * dia * dia / (dia * dia + 4.0 * radius * radius);
    let pi = std::f64::consts::PI;
    let mut cuts = vec![0.0, angle(exit(d1)), pi - angle(exit(d2)), pi];
    if d1 < 2.0 {
        cuts.push(angle(0.5 * d1));
    }
    if d2 < 2.0 {
        cuts.push(pi - angle(0.5 * d2));
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let a = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| double_exponential::integrate(f, w[0], w[1], 1e-15).integral)
        .sum();
    Ok(a)
}

/// The hexagon cut from `tri` by horoballs centered at its vertices.
pub fn truncate(tri: &IdealTriangle, horoballs: [Horoball; 3]) -> Result<TruncatedTriangle> {
    for j in 0..3 {
        if !horoballs[j].center.approx_eq(&tri.vertices[j], 1e-10) {
            return Err(Error::InvalidParams(format!("horoball {j} is not centered at vertex {j}")));
        }
    }
    let mut sides = [0.0; 3];
    for j in 0..3 {
        let d = horoball_distance(&horoballs[j], &horoballs[(j + 1) % 3])?;
        if d <= crate::cords::DEGENERATE_LENGTH {
            return Err(Error::Overlapping(d));
        }
        sides[j] = d;
    }
    let cords: Vec<Cord> = (0..3)
        .map(|j| common_perpendicular(&horoballs[j], &horoballs[(j + 1) % 3]))
        .collect::<Result<_>>()?;
    let corners: [[PointH3; 2]; 3] = std::array::from_fn(|j| [cords[j].start, cords[j].end]);
    // arc j runs from the end of side j−1 to the start of side j
    let arcs: [f64; 3] = std::array::from_fn(|j| {
        horocyclic_length(&horoballs[j], &corners[(j + 2) % 3][1], &corners[j][0])
    });
    let area = hexagon_area(sides)?;
    Ok(TruncatedTriangle {
        triangle: *tri,
        horoballs,
        sides,
        arcs,
        corners,
        area,
    })
}

/// A candidate triangle for a class triple together with the element
/// realizing the third vertex.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub triangle: TruncatedTriangle,
    /// Group elements whose images of the cusp horoball are the vertices.
    pub vertex_elements: [Moebius; 3],
}

fn find_class<'a>(spectrum: &'a ActionSpectrum, word: &str) -> Result<&'a Moebius> {
    spectrum
        .entries
        .iter()
        .position(|e| e.class_word == word)
        .map(|i| &spectrum.elements[i])
        .ok_or_else(|| Error::InvalidParams(format!("class {word} is not in the spectrum")))
}

/// Triangles with vertices `B∞`, `g₁B∞`, `g₁ p g₂ B∞` for peripheral `p` with
/// `|i|, |j| ≤ radius`, kept when the side from `B∞` to the third vertex lies in
/// class `e0` and the horocyclic arcs stay clear of the opposite sides. Sides
/// then run through classes `e1`, `e2` and `e0`.
pub fn triangle_catalog(
    group: &CuspGroup,
    spectrum: &ActionSpectrum,
    classes: [&str; 3],
    radius: i64,
) -> Result<Vec<CatalogEntry>> {
    let [e0, e1, e2] = [
        find_class(spectrum, classes[0])?,
        find_class(spectrum, classes[1])?,
        find_class(spectrum, classes[2])?,
    ];
    for e in [e0, e1, e2] {
        if e.is_peripheral(1e-10) {
            return Err(Error::ConstantCord);
        }
    }
    let a0 = spectrum.horoball_height;
    let cusp = Horoball::at_infinity(a0);
    let lambda = if group.lattice.lambda.is_some() { radius } else { 0 };
    let mut out = Vec::new();
    let mut skipped = None;
    for i in -radius..=radius {
        for j in -lambda..=lambda {
            let third = e1.mul(&group.peripheral(i, j)).mul(e2);
            if third.is_peripheral(1e-10) {
                continue;
            }
            let canon = group.canonical(&third)?;
            if !canon.approx_eq(e0, 1e-8) {
                continue;
            }
            let balls = [cusp, image_horoball(e1, &cusp), image_horoball(&third, &cusp)];
            let tri = IdealTriangle::new([balls[0].center, balls[1].center, balls[2].center])?;
            let triangle = match truncate(&tri, balls) {
                Ok(t) => t,
                // a side dips into the opposite horoball
                Err(Error::NotHexagon(a)) => {
                    skipped = Some(a);
                    continue;
                }
                Err(e) => return Err(e),
            };
            out.push(CatalogEntry {
                triangle,
                vertex_elements: [Moebius::identity(), e1.clone(), third],
            });
        }
    }
    match (out.is_empty(), skipped) {
        (true, Some(a)) => Err(Error::NotHexagon(a)),
        (true, None) => Err(Error::NotComposable),
        _ => Ok(out),
    }
}

/// Spectrum classes `e0` reachable as `g₁ p g₂` for the given `e1`, `e2`.
pub fn composable_classes(
    group: &CuspGroup,
    spectrum: &ActionSpectrum,
    e1: &str,
    e2: &str,
    radius: i64,
) -> Result<Vec<String>> {
    let (g1, g2) = (find_class(spectrum, e1)?, find_class(spectrum, e2)?);
    let lambda = if group.lattice.lambda.is_some() { radius } else { 0 };
    let mut out: Vec<String> = Vec::new();
    for i in -radius..=radius {
        for j in -lambda..=lambda {
            let third = g1.mul(&group.peripheral(i, j)).mul(g2);
            if third.is_peripheral(1e-10) {
                continue;
            }
            let canon = group.canonical(&third)?;
            if let Some(k) = spectrum.elements.iter().position(|e| e.approx_eq(&canon, 1e-8)) {
                let w = &spectrum.entries[k].class_word;
                if !out.contains(w) {
                    out.push(w.clone());
                }
            }
        }
    }
    Ok(out)
}
