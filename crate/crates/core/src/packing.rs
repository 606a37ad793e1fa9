//! Horoball orbits Γ·B∞ modulo the cusp subgroup.
//!
//! The search runs breadth-first from B∞ over a finite symmetric set S of
//! group elements composed with cusp translations, keeping horoballs whose
//! Euclidean diameter is at least a threshold. It is complete once the open
//! isometric disks {w : |c w + d| < 1} of S, together with their lattice
//! translates, cover the boundary plane: then every horoball other than B∞
//! can be pushed to a strictly larger one by an element of S, and reversing
//! that chain from B∞ reaches it without ever dropping below the threshold.
//! The cover is checked on the fundamental domain by recursive subdivision.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;

use crate::group::{canonical_in, CuspLattice, GroupPresentation, Moebius, Word};
use crate::{Error, Result};

/// A discrete group with a cusp at ∞ whose stabilizer is the given lattice.
#[derive(Clone, Debug)]
pub struct CuspGroup {
    /// Generators (not necessarily closed under inversion).
    pub generators: Vec<Moebius>,
    pub lattice: CuspLattice,
    /// Words for the lattice basis translations.
    pub meridian: Word,
    pub longitude: Word,
}

/// One horoball of the orbit, normalized so its center lies in the
/// fundamental domain of the cusp lattice.
#[derive(Clone, Debug)]
pub struct FoundBall {
    pub element: Moebius,
    pub center: Complex64,
    pub diameter: f64,
    /// Lattice coordinates of the center in [0, 1).
    pub coords: (f64, f64),
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_balls: usize,
    pub cover_word_len: usize,
    pub max_depth: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_balls: 2_000_000,
            cover_word_len: 6,
            max_depth: 16,
        }
    }
}

impl CuspGroup {
    pub fn from_presentation(rep: &GroupPresentation) -> Self {
        Self {
            generators: rep.generators.clone(),
            lattice: rep.lattice,
            meridian: rep.meridian.clone(),
            longitude: rep.longitude.clone(),
        }
    }

    pub fn peripheral(&self, i: i64, j: i64) -> Moebius {
        let t = self.lattice.point(i as f64, j as f64);
        let mut m = Moebius::translation(t);
        m.word = self.meridian.pow(i).concat(&self.longitude.pow(j));
        m
    }

    /// Canonical representative of the double coset Γ∞ g Γ∞.
    pub fn canonical(&self, g: &Moebius) -> Result<Moebius> {
        canonical_in(g, &self.lattice, |i, j| self.peripheral(i, j))
    }

    fn symmetric(&self) -> Vec<Moebius> {
        let mut v = self.generators.clone();
        v.extend(self.generators.iter().map(|g| g.inverse()));
        v
    }

    /// Distinct non-peripheral elements of word length ≤ `len`, one per
    /// isometric disk modulo the lattice, largest disks first.
    fn candidates(&self, len: usize) -> Vec<Moebius> {
        let gens = self.symmetric();
        let mut frontier = vec![Moebius::identity()];
        let mut all: Vec<Moebius> = Vec::new();
        let mut seen = HashMap::new();
        for _ in 0..len {
            let mut next = Vec::new();
            for m in &frontier {
                for g in &gens {
                    if m.word.0.last().is_some_and(|&l| g.word.0 == [-l]) {
                        continue;
                    }
                    let p = m.mul(g);
                    if p.c.norm() < 1e-10 {
                        next.push(p);
                        continue;
                    }
                    let e = -p.d / p.c;
                    let (i, j) = self.lattice.reduce(e);
                    let e0 = e - self.lattice.point(i as f64, j as f64);
                    let key = (
                        (e0.re * 1e8).round() as i64,
                        (e0.im * 1e8).round() as i64,
                        (p.c.norm() * 1e8).round() as i64,
                    );
                    if seen.insert(key, ()).is_none() {
                        all.push(p.clone());
                    }
                    next.push(p);
                }
            }
            if next.len() > 400_000 {
                break;
            }
            frontier = next;
        }
        all.sort_by(|a, b| {
            a.c.norm()
                .partial_cmp(&b.c.norm())
                .unwrap()
                .then_with(|| (a.word.len(), &a.word).cmp(&(b.word.len(), &b.word)))
        });
        all
    }

    /// Smallest prefix of the candidate list whose isometric disks cover the
    /// fundamental domain; returned closed under inversion.
    pub fn covering_set(&self, limits: &SearchLimits) -> Result<Vec<Moebius>> {
        let cands = self.candidates(limits.cover_word_len);
        if cands.is_empty() {
            return Err(Error::Certificate("no element moves ∞".into()));
        }
        let mut k = 2.min(cands.len());
        loop {
            let mut s: Vec<Moebius> = cands[..k].to_vec();
            s.extend(cands[..k].iter().map(|g| g.inverse()));
            if self.covers(&s, limits.max_depth) {
                return Ok(s);
            }
            if k == cands.len() {
                return Err(Error::Certificate(format!(
                    "{} disks from words of length ≤ {} do not cover",
                    cands.len(),
                    limits.cover_word_len
                )));
            }
            k = (k * 2).min(cands.len());
        }
    }

    /// Strict cover of the closed fundamental domain by open disks.
    pub fn covers(&self, s: &[Moebius], max_depth: usize) -> bool {
        let lat = self.lattice;
        let reach = match lat.lambda {
            None => lat.mu.norm(),
            Some(l) => lat.mu.norm().min(l.im.abs()),
        };
        let mut disks: Vec<(Complex64, f64)> = Vec::new();
        for g in s {
            if g.c.norm() < 1e-12 {
                continue;
            }
            let r = 1.0 / g.c.norm();
            let e = -g.d / g.c;
            let (i, j) = lat.reduce(e);
            let e0 = e - lat.point(i as f64, j as f64);
            let n = (r / reach).ceil() as i64 + 2;
            let jr = if lat.lambda.is_some() { -n..=n } else { 0..=0 };
            for jj in jr {
                for ii in -n..=n {
                    disks.push((e0 + lat.point(ii as f64, jj as f64), r));
                }
            }
        }
        let corner = |u: f64, v: f64| lat.point(u, v);
        let mut stack = vec![(0.0, 1.0, 0.0, 1.0, 0usize)];
        let two_d = lat.lambda.is_some();
        while let Some((u0, u1, v0, v1, depth)) = stack.pop() {
            let (v0, v1) = if two_d { (v0, v1) } else { (0.0, 0.0) };
            let mid = corner(0.5 * (u0 + u1), 0.5 * (v0 + v1));
            let rad = [corner(u0, v0), corner(u1, v0), corner(u0, v1), corner(u1, v1)]
                .iter()
                .map(|p| (p - mid).norm())
                .fold(0.0, f64::max);
            if disks
                .iter()
                .any(|(c, r)| (mid - c).norm() + rad < r * (1.0 - 1e-9))
            {
                continue;
            }
            if depth >= max_depth * if two_d { 1 } else { 2 } {
                return false;
            }
            let um = 0.5 * (u0 + u1);
            if two_d {
                let vm = 0.5 * (v0 + v1);
                stack.push((u0, um, v0, vm, depth + 1));
                stack.push((um, u1, v0, vm, depth + 1));
                stack.push((u0, um, vm, v1, depth + 1));
                stack.push((um, u1, vm, v1, depth + 1));
            } else {
                stack.push((u0, um, 0.0, 0.0, depth + 1));
                stack.push((um, u1, 0.0, 0.0, depth + 1));
            }
        }
        true
    }

    /// Brings the horoball center of `g` into the fundamental domain.
    fn normalize(&self, g: &Moebius) -> (Moebius, Complex64, (f64, f64)) {
        let w = g.a / g.c;
        let (i, j) = self.lattice.reduce(w);
        let g1 = self.peripheral(-i, -j).mul(g);
        let w1 = g1.a / g1.c;
        let (u, v) = self.lattice.coords(w1);
        (g1, w1, (u.clamp(0.0, 1.0) % 1.0, v.clamp(0.0, 1.0) % 1.0))
    }

    /// All horoballs g·{z ≥ a0}, g ∉ Γ∞, of diameter ≥ `min_diameter`,
    /// one per Γ∞-orbit, sorted by decreasing diameter.
    pub fn horoballs(
        &self,
        a0: f64,
        min_diameter: f64,
        limits: &SearchLimits,
    ) -> Result<Vec<FoundBall>> {
        let s = self.covering_set(limits)?;
        self.horoballs_with(&s, a0, min_diameter, limits)
    }

    pub fn horoballs_with(
        &self,
        s: &[Moebius],
        a0: f64,
        min_diameter: f64,
        limits: &SearchLimits,
    ) -> Result<Vec<FoundBall>> {
        let threshold = min_diameter * (1.0 - 1e-12);
        let mut store = BallStore::new(self.lattice.rank());
        let mut found: Vec<FoundBall> = Vec::new();
        let mut queue = VecDeque::new();
        let mut push = |g: Moebius, found: &mut Vec<FoundBall>, queue: &mut VecDeque<usize>| -> Result<()> {
            let diameter = 1.0 / (g.c.norm_sqr() * a0);
            if diameter < threshold {
                return Ok(());
            }
            let (g1, w, uv) = self.normalize(&g);
            if store.find(uv).is_some() {
                return Ok(());
            }
            store.insert(uv, found.len());
            found.push(FoundBall {
                element: g1,
                center: w,
                diameter,
                coords: uv,
            });
            queue.push_back(found.len() - 1);
            if found.len() > limits.max_balls {
                return Err(Error::Budget(format!("more than {} horoballs", limits.max_balls)));
            }
            Ok(())
        };
        for g in s {
            if g.c.norm() > 1e-12 {
                push(g.clone(), &mut found, &mut queue)?;
            }
        }
        while let Some(idx) = queue.pop_front() {
            let (w, dia, g) = {
                let b = &found[idx];
                (b.center, b.diameter, b.element.clone())
            };
            let reach = (dia / threshold).sqrt();
            for f in s {
                if f.c.norm() < 1e-12 {
                    continue;
                }
                let e = -f.d / f.c;
                let radius = reach / f.c.norm();
                for (i, j) in self.lattice_points_near(e - w, radius) {
                    let t = self.peripheral(i, j);
                    let m = (f.c * (w + t.b) + f.d).norm();
                    if m < 1e-9 {
                        continue;
                    }
                    let g2 = f.mul(&t).mul(&g);
                    if g2.c.norm() < 1e-9 {
                        continue;
                    }
                    push(g2, &mut found, &mut queue)?;
                }
            }
        }
        found.sort_by(|a, b| {
            b.diameter
                .partial_cmp(&a.diameter)
                .unwrap()
                .then(a.coords.0.partial_cmp(&b.coords.0).unwrap())
                .then(a.coords.1.partial_cmp(&b.coords.1).unwrap())
        });
        Ok(found)
    }

    /// Lattice points t with |t − p| ≤ r.
    fn lattice_points_near(&self, p: Complex64, r: f64) -> Vec<(i64, i64)> {
        let mu = self.lattice.mu.re;
        let mut out = Vec::new();
        match self.lattice.lambda {
            None => {
                if p.im.abs() > r {
                    return out;
                }
                let h = (r * r - p.im * p.im).sqrt();
                let lo = ((p.re - h) / mu).ceil() as i64;
                let hi = ((p.re + h) / mu).floor() as i64;
                for i in lo..=hi {
                    out.push((i, 0));
                }
            }
            Some(l) => {
                let jlo = ((p.im - r) / l.im).ceil().min(((p.im + r) / l.im).ceil()) as i64;
                let jhi = ((p.im - r) / l.im).floor().max(((p.im + r) / l.im).floor()) as i64;
                for j in jlo..=jhi {
                    let dy = j as f64 * l.im - p.im;
                    if dy.abs() > r {
                        continue;
                    }
                    let h = (r * r - dy * dy).sqrt();
                    let x0 = p.re - j as f64 * l.re;
                    let lo = ((x0 - h) / mu).ceil() as i64;
                    let hi = ((x0 + h) / mu).floor() as i64;
                    for i in lo..=hi {
                        out.push((i, j));
                    }
                }
            }
        }
        out
    }

    /// Largest horoball height a0 with Γ·{z ≥ a0} pairwise disjoint (tangent
    /// at equality): 1 / min |c| over g ∉ Γ∞. Returns 1 when no element
    /// moves ∞.
    pub fn max_embedded_height(&self, limits: &SearchLimits) -> Result<f64> {
        let s = match self.covering_set(limits) {
            Ok(s) => s,
            Err(Error::Certificate(_)) if self.candidates(limits.cover_word_len).is_empty() => {
                return Ok(1.0)
            }
            Err(e) => return Err(e),
        };
        let cmin = s
            .iter()
            .filter(|g| g.c.norm() > 1e-12)
            .map(|g| g.c.norm())
            .fold(f64::INFINITY, f64::min);
        // at height 1 the diameter is 1/|c|², so this finds every |c| ≤ cmin
        let balls = self.horoballs_with(&s, 1.0, 1.0 / (cmin * cmin), limits)?;
        let best = balls.iter().map(|b| b.diameter).fold(0.0, f64::max);
        Ok(best.sqrt())
    }

    /// Oracle: horoballs reached by every freely reduced word up to `len`,
    /// deduplicated modulo the lattice, with diameter ≥ `min_diameter`.
    pub fn horoballs_by_words(&self, a0: f64, min_diameter: f64, len: usize) -> Vec<FoundBall> {
        let gens = self.symmetric();
        let mut store = BallStore::new(self.lattice.rank());
        let mut found = Vec::new();
        let mut frontier = vec![Moebius::identity()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(frontier.len() * gens.len());
            for m in &frontier {
                for g in &gens {
                    if m.word.0.last().is_some_and(|&l| g.word.0 == [-l]) {
                        continue;
                    }
                    let p = m.mul(g);
                    if p.c.norm() > 1e-9 {
                        let diameter = 1.0 / (p.c.norm_sqr() * a0);
                        if diameter >= min_diameter * (1.0 - 1e-12) {
                            let (g1, w, uv) = self.normalize(&p);
                            if store.find(uv).is_none() {
                                store.insert(uv, found.len());
                                found.push(FoundBall {
                                    element: g1,
                                    center: w,
                                    diameter,
                                    coords: uv,
                                });
                            }
                        }
                    }
                    next.push(p);
                }
            }
            frontier = next;
        }
        found.sort_by(|a: &FoundBall, b: &FoundBall| b.diameter.partial_cmp(&a.diameter).unwrap());
        found
    }
}

/// Spatial hash on the lattice torus [0,1)².
struct BallStore {
    cells: HashMap<(i64, i64), Vec<(f64, f64, usize)>>,
    rank: usize,
}

const GRID: f64 = 1.0e6;
const SAME: f64 = 1.0e-8;

impl BallStore {
    fn new(rank: usize) -> Self {
        Self {
            cells: HashMap::new(),
            rank,
        }
    }

    fn cell(&self, uv: (f64, f64)) -> (i64, i64) {
        let n = GRID as i64;
        (
            ((uv.0 * GRID).floor() as i64).rem_euclid(n),
            if self.rank == 2 {
                ((uv.1 * GRID).floor() as i64).rem_euclid(n)
            } else {
                0
            },
        )
    }

    fn find(&self, uv: (f64, f64)) -> Option<usize> {
        let n = GRID as i64;
        let (ci, cj) = self.cell(uv);
        let js: &[i64] = if self.rank == 2 { &[-1, 0, 1] } else { &[0] };
        for di in [-1, 0, 1] {
            for &dj in js {
                let key = ((ci + di).rem_euclid(n), (cj + dj).rem_euclid(n));
                if let Some(list) = self.cells.get(&key) {
                    for &(u, v, idx) in list {
                        let du = (u - uv.0).abs();
                        let dv = (v - uv.1).abs();
                        if du.min(1.0 - du) < SAME && dv.min(1.0 - dv) < SAME {
                            return Some(idx);
                        }
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, uv: (f64, f64), idx: usize) {
        let key = self.cell(uv);
        self.cells.entry(key).or_default().push((uv.0, uv.1, idx));
    }
}
