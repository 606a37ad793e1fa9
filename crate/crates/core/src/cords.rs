//! Geodesic cords between horoballs, their z-profiles, Hamiltonian lifts and
//! the action spectrum of a cusp.

use std::io::Write;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{ham_vector_field, hamiltonian, CotangentState};
use crate::group::{apply_h3, GroupPresentation, Horoball, Moebius, Word};
use crate::hyperbolic::{geodesic_ends, geodesic_point, geodesic_velocity, Ideal, PointH3};
use crate::packing::{CuspGroup, SearchLimits};
use crate::{Error, Result};

/// Lengths at or below this are treated as tangent horoballs.
pub const DEGENERATE_LENGTH: f64 = 1e-9;

/// A geodesic arc meeting two horospheres orthogonally, parameterized on
/// [0, 1] with constant speed `length`.
#[derive(Clone, Debug)]
pub struct Cord {
    pub class_word: Word,
    pub length: f64,
    pub start: PointH3,
    pub end: PointH3,
    /// Unit (hyperbolic) direction at `start`.
    pub direction: Vector3<f64>,
    pub from: Horoball,
    pub to: Horoball,
    /// f(t) = 1/z(c(t)) = f0 cosh(ℓt) + b0 sinh(ℓt).
    pub profile: (f64, f64),
}

impl Cord {
    pub(crate) fn from_endpoints(
        class_word: Word,
        start: PointH3,
        end: PointH3,
        direction: Vector3<f64>,
        length: f64,
        from: Horoball,
        to: Horoball,
    ) -> Self {
        let f0 = 1.0 / start.z;
        let b0 = -direction[2] / (start.z * start.z);
        Self {
            class_word,
            length,
            start,
            end,
            direction,
            from,
            to,
            profile: (f0, b0),
        }
    }

    pub fn point(&self, t: f64) -> PointH3 {
        geodesic_point(&self.start, &self.direction, self.length * t)
            .expect("cord direction is nonzero")
    }

    /// dc/dt for the [0, 1] parameterization.
    pub fn velocity(&self, t: f64) -> Vector3<f64> {
        geodesic_velocity(&self.start, &self.direction, self.length * t)
            .expect("cord direction is nonzero")
            * self.length
    }

    pub fn profile_at(&self, t: f64) -> f64 {
        let (f0, b0) = self.profile;
        let lt = self.length * t;
        f0 * lt.cosh() + b0 * lt.sinh()
    }

    /// Max deviation of 1/z(c(t)) from the cosh/sinh profile on `samples` points.
    pub fn profile_residual(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                let t = k as f64 / (samples - 1) as f64;
                (1.0 / self.point(t).z - self.profile_at(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// The a-priori bound f0 cosh ℓ + |b0| sinh ℓ on max f.
    pub fn profile_bound(&self) -> f64 {
        let (f0, b0) = self.profile;
        f0 * self.length.cosh() + b0.abs() * self.length.sinh()
    }

    /// Angle defects (sine of the angle between ċ and the horosphere normal)
    /// at both ends.
    pub fn orthogonality_defect(&self) -> (f64, f64) {
        let d = |b: &Horoball, q: &PointH3, v: Vector3<f64>| {
            let n = b.inward_normal(q);
            v.normalize().cross(&n.normalize()).norm()
        };
        (
            d(&self.from, &self.start, self.velocity(0.0)),
            d(&self.to, &self.end, self.velocity(1.0)),
        )
    }
}

/// The unique common perpendicular of two horoballs with distinct centers.
pub fn common_perpendicular(b0: &Horoball, b1: &Horoball) -> Result<Cord> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // h sends the center of b0 to ∞ and the center of b1 to 0
    let h = match (b0.center, b1.center) {
        (Ideal::Infinity, Ideal::Infinity) => return Err(Error::SameCenter),
        (Ideal::Infinity, Ideal::Finite(w1)) => Moebius::new(one, -w1, zero, one),
        (Ideal::Finite(w0), Ideal::Infinity) => Moebius::new(zero, -one, one, -w0),
        (Ideal::Finite(w0), Ideal::Finite(w1)) => {
            if (w0 - w1).norm() <= 1e-14 * (1.0 + w0.norm()) {
                return Err(Error::SameCenter);
            }
            Moebius::new(one, -w1, one, -w0)
        }
    };
    let top = crate::group::image_horoball(&h, b0);
    let bottom = crate::group::image_horoball(&h, b1);
    let (a, d) = (top.size, bottom.size);
    let length = (a / d).ln();
    if length <= DEGENERATE_LENGTH {
        return Err(Error::Overlapping(length));
    }
    let hi = h.inverse();
    let start = apply_h3(&hi, &PointH3::new(0.0, 0.0, a)?);
    let end = apply_h3(&hi, &PointH3::new(0.0, 0.0, d)?);
    let direction = b0.inward_normal(&start) * -1.0;
    Ok(Cord::from_endpoints(
        Word::empty(),
        start,
        end,
        direction,
        length,
        *b0,
        *b1,
    ))
}

/// ℓ = 2 ln(a0 |c|), the length of the cord from {z ≥ a0} to g·{z ≥ a0}.
pub fn cord_length(g: &Moebius, a0: f64) -> Result<f64> {
    let c = g.c.norm();
    if c <= 1e-12 {
        return Err(Error::Peripheral);
    }
    let l = 2.0 * (a0 * c).ln();
    if l <= DEGENERATE_LENGTH {
        return Err(Error::Overlapping(l));
    }
    Ok(l)
}

/// The vertical cord from {z ≥ a0} down to g·{z ≥ a0}.
pub fn cord_of_element(g: &Moebius, a0: f64) -> Result<Cord> {
    let length = cord_length(g, a0)?;
    let w = g.a / g.c;
    let diameter = 1.0 / (g.c.norm_sqr() * a0);
    let start = PointH3::new(w.re, w.im, a0)?;
    let end = PointH3::new(w.re, w.im, diameter)?;
    Ok(Cord::from_endpoints(
        g.word.clone(),
        start,
        end,
        Vector3::new(0.0, 0.0, -a0),
        length,
        Horoball::at_infinity(a0),
        Horoball::finite(w, diameter),
    ))
}

pub fn z_profile(cord: &Cord) -> (f64, f64) {
    cord.profile
}

/// Ideal endpoints (backward, forward) of the geodesic extending the cord.
pub fn extend_to_tame(cord: &Cord) -> Result<(Ideal, Ideal)> {
    if cord.length <= DEGENERATE_LENGTH {
        return Err(Error::ConstantCord);
    }
    geodesic_ends(&cord.start, &cord.direction)
}

/// The lift t ↦ (c(t), ċ(t)♭) of a cord to T*ℍ³.
#[derive(Clone, Debug)]
pub struct HamiltonianChord {
    pub cord: Cord,
}

pub fn lift_to_chord(cord: &Cord) -> HamiltonianChord {
    HamiltonianChord { cord: cord.clone() }
}

impl HamiltonianChord {
    pub fn state(&self, t: f64) -> CotangentState {
        let q = self.cord.point(t);
        let p = self.cord.velocity(t) / (q.z * q.z);
        CotangentState { q, p }
    }

    pub fn project(&self, t: f64) -> PointH3 {
        self.state(t).q
    }

    pub fn energy(&self) -> f64 {
        hamiltonian(&self.state(0.0))
    }

    /// Max |d/dt state − X_H(state)| over `samples` interior points, with the
    /// derivative from a fourth-order central difference.
    pub fn flow_residual(&self, samples: usize) -> f64 {
        let h = 1e-3;
        let flat = |t: f64| {
            let s = self.state(t);
            [s.q.x, s.q.y, s.q.z, s.p[0], s.p[1], s.p[2]]
        };
        let mut worst: f64 = 0.0;
        for k in 0..samples {
            let t = 0.05 + 0.9 * k as f64 / (samples - 1).max(1) as f64;
            let (a, b, c, d) = (flat(t - 2.0 * h), flat(t - h), flat(t + h), flat(t + 2.0 * h));
            let x = ham_vector_field(&self.state(t));
            for i in 0..6 {
                let der = (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h);
                worst = worst.max((der - x[i]).abs() / (1.0 + x[i].abs()));
            }
        }
        worst
    }

    /// Relative size of the momentum component tangent to the horosphere at
    /// each end; zero on the conormal.
    pub fn conormal_defect(&self) -> (f64, f64) {
        let d = |b: &Horoball, s: CotangentState| {
            let n = b.inward_normal(&s.q).normalize();
            let tang = s.p - n * s.p.dot(&n);
            tang.norm() / s.p.norm()
        };
        (
            d(&self.cord.from, self.state(0.0)),
            d(&self.cord.to, self.state(1.0)),
        )
    }
}

pub fn action(chord: &HamiltonianChord) -> f64 {
    -0.5 * chord.cord.length * chord.cord.length
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumEntry {
    pub class_word: String,
    pub length: f64,
    pub energy: f64,
    pub action: f64,
    pub f0: f64,
    pub b0: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumHeader {
    pub cutoff: f64,
    pub horoball_height: f64,
    pub degenerate: usize,
}

/// Cords up to a length cutoff, one per double coset, sorted by action
/// descending (length ascending, then word).
#[derive(Clone, Debug)]
pub struct ActionSpectrum {
    pub entries: Vec<SpectrumEntry>,
    pub cords: Vec<Cord>,
    pub elements: Vec<Moebius>,
    pub cutoff: f64,
    pub horoball_height: f64,
    /// Classes skipped because their horoballs are tangent to B∞.
    pub degenerate: usize,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    header: SpectrumHeader,
    entries: Vec<SpectrumEntry>,
}

impl ActionSpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn header(&self) -> SpectrumHeader {
        SpectrumHeader {
            cutoff: self.cutoff,
            horoball_height: self.horoball_height,
            degenerate: self.degenerate,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for e in &self.entries {
            wr.serialize(e)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SpectrumJson {
            header: self.header(),
            entries: self.entries.clone(),
        })?)
    }

    /// Parses the JSON mirror back into header and rows.
    pub fn parse_json(s: &str) -> Result<(SpectrumHeader, Vec<SpectrumEntry>)> {
        let j: SpectrumJson = serde_json::from_str(s)?;
        Ok((j.header, j.entries))
    }
}

pub fn max_embedded_height(rep: &GroupPresentation) -> Result<f64> {
    CuspGroup::from_presentation(rep).max_embedded_height(&SearchLimits::default())
}

pub fn enumerate_cords(rep: &GroupPresentation, a0: f64, lmax: f64) -> Result<ActionSpectrum> {
    enumerate_group_cords(
        &CuspGroup::from_presentation(rep),
        a0,
        lmax,
        &SearchLimits::default(),
    )
}

pub fn enumerate_group_cords(
    group: &CuspGroup,
    a0: f64,
    lmax: f64,
    limits: &SearchLimits,
) -> Result<ActionSpectrum> {
    if !(a0 > 0.0 && lmax.is_finite()) {
        return Err(Error::InvalidParams(format!("height {a0}, cutoff {lmax}")));
    }
    let embedded = group.max_embedded_height(limits)?;
    if a0 < embedded * (1.0 - 1e-12) {
        return Err(Error::NotEmbedded {
            height: a0,
            embedded,
        });
    }
    let mut balls = group.horoballs(a0, a0 * (-lmax).exp(), limits)?;
    // prefer short words for the same ball when a brief word search finds one
    let short = group.horoballs_by_words(a0, a0 * (-lmax).exp(), 7);
    for b in balls.iter_mut() {
        if let Some(s) = short.iter().find(|s| {
            let du = (s.coords.0 - b.coords.0).abs();
            let dv = (s.coords.1 - b.coords.1).abs();
            du.min(1.0 - du) < 1e-8 && dv.min(1.0 - dv) < 1e-8
        }) {
            if s.element.word.len() < b.element.word.len() {
                b.element = s.element.clone();
            }
        }
    }
    let canon = balls
        .par_iter()
        .map(|b| group.canonical(&b.element))
        .collect::<Result<Vec<_>>>()?;
    let mut degenerate = 0;
    let mut rows: Vec<(Moebius, Cord)> = Vec::new();
    for g in canon {
        match cord_of_element(&g, a0) {
            Ok(c) if c.length <= lmax => rows.push((g, c)),
            Ok(_) => {}
            Err(Error::Overlapping(_)) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    rows.sort_by(|a, b| {
        a.1.length
            .partial_cmp(&b.1.length)
            .unwrap()
            .then_with(|| a.0.word.to_string().cmp(&b.0.word.to_string()))
    });
    let entries = rows
        .iter()
        .map(|(g, c)| {
            let energy = 0.5 * c.length * c.length;
            SpectrumEntry {
                class_word: g.word.to_string(),
                length: c.length,
                energy,
                action: -energy,
                f0: c.profile.0,
                b0: c.profile.1,
            }
        })
        .collect();
    let (elements, cords) = rows.into_iter().unzip();
    Ok(ActionSpectrum {
        entries,
        cords,
        elements,
        cutoff: lmax,
        horoball_height: a0,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::image_horoball;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vertical_perpendicular() {
        let cord = common_perpendicular(
            &Horoball::at_infinity(2.0),
            &Horoball::finite(c(0.0, 0.0), 1.0),
        )
        .unwrap();
        assert_relative_eq!(cord.length, 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(cord.start.z, 2.0, epsilon = 1e-14);
        assert_relative_eq!(cord.end.z, 1.0, epsilon = 1e-14);
        assert_relative_eq!(cord.point(0.5).z, 2f64.sqrt(), epsilon = 1e-13);
        // downward from z0: f = e^{ℓt}/z0
        assert_relative_eq!(cord.profile.0, cord.profile.1, epsilon = 1e-15);
    }

    #[test]
    fn tangent_balls_rejected() {
        let r = common_perpendicular(
            &Horoball::at_infinity(1.0),
            &Horoball::finite(c(0.3, 0.0), 1.0),
        );
        assert!(matches!(r, Err(Error::Overlapping(_))));
        assert!(matches!(
            common_perpendicular(&Horoball::at_infinity(1.0), &Horoball::at_infinity(2.0)),
            Err(Error::SameCenter)
        ));
    }

    #[test]
    fn closed_form_length() {
        let g = Moebius::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert_relative_eq!(cord_length(&g, 2.0).unwrap(), 4f64.ln(), epsilon = 1e-15);
        let b0 = Horoball::at_infinity(2.0);
        let cp = common_perpendicular(&b0, &image_horoball(&g, &b0)).unwrap();
        assert_relative_eq!(cp.length, 4f64.ln(), epsilon = 1e-12);
        let l3 = cord_length(&g, 6.0).unwrap();
        assert_relative_eq!(l3 - 4f64.ln(), 2.0 * 3f64.ln(), epsilon = 1e-14);
        assert!(cord_length(&g, 1.0 + 1e-6).unwrap() < 1e-5);
    }

    #[test]
    fn finite_pair_is_orthogonal() {
        let b0 = Horoball::finite(c(0.2, -0.4), 0.3);
        let b1 = Horoball::finite(c(1.5, 0.7), 0.5);
        let cord = common_perpendicular(&b0, &b1).unwrap();
        assert!(b0.defect(&cord.start).abs() < 1e-12);
        assert!(b1.defect(&cord.end).abs() < 1e-12);
        let (d0, d1) = cord.orthogonality_defect();
        assert!(d0 < 1e-9 && d1 < 1e-9, "{d0} {d1}");
        assert!(cord.profile_residual(100) < 1e-10);
        let q = cord.point(1.0);
        assert!((q.vec() - cord.end.vec()).norm() < 1e-10);
    }

    #[test]
    fn tame_extension() {
        let cord = common_perpendicular(
            &Horoball::at_infinity(2.0),
            &Horoball::finite(c(0.0, 0.0), 1.0),
        )
        .unwrap();
        let (a, b) = extend_to_tame(&cord).unwrap();
        assert!(a.approx_eq(&Ideal::Infinity, 1e-12));
        assert!(b.approx_eq(&Ideal::Finite(c(0.0, 0.0)), 1e-12));
    }

    #[test]
    fn lift_energy_and_action() {
        let cord = common_perpendicular(
            &Horoball::at_infinity(1.0),
            &Horoball::finite(c(0.0, 0.0), (-2f64).exp()),
        )
        .unwrap();
        let ch = lift_to_chord(&cord);
        assert_relative_eq!(ch.energy(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(action(&ch), -2.0, epsilon = 1e-12);
        assert!(ch.flow_residual(20) < 1e-7);
        let (a, b) = ch.conormal_defect();
        assert!(a < 1e-12 && b < 1e-12);
    }

    #[test]
    fn spectrum_below_shortest_is_empty() {
        let rep = GroupPresentation::figure_eight();
        let s = enumerate_cords(&rep, 2.0, 0.5).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn spectrum_rejects_low_height() {
        let rep = GroupPresentation::figure_eight();
        assert!(matches!(
            enumerate_cords(&rep, 0.9, 3.0),
            Err(Error::NotEmbedded { .. })
        ));
    }

    #[test]
    fn spectrum_is_sorted_and_consistent() {
        let rep = GroupPresentation::figure_eight();
        let s = enumerate_cords(&rep, 2.0, 3.0).unwrap();
        assert!(!s.is_empty());
        for w in s.entries.windows(2) {
            assert!(w[0].action >= w[1].action);
        }
        for e in &s.entries {
            assert_eq!(e.action, -e.energy);
            assert_eq!(e.energy, 0.5 * e.length * e.length);
        }
        let json = s.to_json().unwrap();
        let (h, rows) = ActionSpectrum::parse_json(&json).unwrap();
        assert_eq!(h, s.header());
        assert_eq!(rows, s.entries);
    }
}
