//! Residual suites behind `cordspec verify`.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{hyperbolic_metric, worst_gap, CappedMetric, CylMetric};
use crate::error::{Error, Result};
use crate::flow::{
    form_identity_residuals, hamiltonian, integrate_flow, integrate_trajectory, geodesic_residual,
    plurisubharmonic_value, plurisubharmonic_value_horizontal, psh_reference, CotangentState,
};
use crate::hyperbolic::{
    christoffel, fd_christoffel, fd_riemann, metric_tensor, sectional_curvature, PointH3,
};
use crate::variational::mean_curvature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Curvature,
    Forms,
    Flow,
    Cylmetric,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Curvature, Suite::Forms, Suite::Flow, Suite::Cylmetric];
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "curvature" => Ok(Suite::Curvature),
            "forms" => Ok(Suite::Forms),
            "flow" => Ok(Suite::Flow),
            "cylmetric" => Ok(Suite::Cylmetric),
            _ => Err(Error::Config(format!("unknown suite {s:?}"))),
        }
    }
}

/// Per-check tolerances, keyed by check family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let t = [
            ("sectional", 1e-6),
            ("christoffel", 1e-6),
            ("mean_curvature", 1e-8),
            ("forms", 1e-5),
            ("energy", 1e-5),
            ("geodesic", 1e-6),
            ("vertical", 1e-8),
            ("psh", 1e-5),
            ("rho_second", 1e-12),
            ("cyl_curvature", 1e-12),
            ("monotone", 1e-12),
        ];
        Self(t.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    /// Applies `key=value`, or a bare `value` to every key.
    pub fn apply(&mut self, spec: &str) -> Result<()> {
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x >= 0.0)
                .ok_or_else(|| Error::Config(format!("bad tolerance {v:?}")))
        };
        match spec.split_once('=') {
            Some((k, v)) => {
                let k = k.trim();
                if !self.0.contains_key(k) {
                    return Err(Error::Config(format!("unknown tolerance {k:?}")));
                }
                self.0.insert(k.to_string(), parse(v)?);
            }
            None => {
                let v = parse(spec)?;
                self.0.values_mut().for_each(|x| *x = v);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Non-gating checks record identities that are known not to hold as
    /// literally stated; they are reported but do not fail the suite.
    pub gating: bool,
}

impl Check {
    fn new(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            gating: true,
        }
    }

    fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass || !c.gating);
        Self { suite, checks, pass }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    pub max_gating_residual: f64,
}

pub fn run_suites(suites: &[Suite], tol: &Tolerances, seed: u64) -> Result<VerifyReport> {
    let suites = suites
        .iter()
        .map(|s| run_suite(*s, tol, seed))
        .collect::<Result<Vec<_>>>()?;
    let max_gating_residual = suites
        .iter()
        .flat_map(|s| s.checks.iter())
        .filter(|c| c.gating)
        .map(|c| c.max_residual)
        .fold(0.0, f64::max);
    Ok(VerifyReport {
        pass: suites.iter().all(|s| s.pass),
        suites,
        max_gating_residual,
    })
}

pub fn run_suite(suite: Suite, tol: &Tolerances, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ suite as u64);
    match suite {
        Suite::Curvature => curvature_suite(tol, &mut rng),
        Suite::Forms => forms_suite(tol, &mut rng),
        Suite::Flow => flow_suite(tol, &mut rng),
        Suite::Cylmetric => cylmetric_suite(tol, &mut rng),
    }
}

fn random_point(rng: &mut ChaCha8Rng, zlo: f64, zhi: f64) -> PointH3 {
    let z = (rng.gen_range(zlo.ln()..zhi.ln())).exp();
    PointH3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), z).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_state(rng: &mut ChaCha8Rng, zlo: f64, zhi: f64) -> CotangentState {
    let q = random_point(rng, zlo, zhi);
    let p = random_vec(rng) / q.z;
    CotangentState::new(q.x, q.y, q.z, p[0], p[1], p[2]).unwrap()
}

/// Point samples drawn for the curvature checks.
pub const CURVATURE_POINTS: usize = 100;

fn curvature_suite(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut worst_k: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    for _ in 0..CURVATURE_POINTS {
        let q = random_point(rng, 0.1, 10.0);
        let h = 1e-4 * q.z;
        let metric = |v: &Vector3<f64>| metric_tensor(&PointH3 { x: v[0], y: v[1], z: v[2] });
        let gamma_fd = fd_christoffel(metric, &q.vec(), h);
        let gamma = christoffel(&q);
        for a in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    // Γ scales like 1/z
                    worst_g = worst_g.max((gamma_fd[a][i][j] - gamma[a][i][j]).abs() * q.z);
                }
            }
        }
        let r = fd_riemann(|v| fd_christoffel(metric, v, h), &q.vec(), h);
        let (x, y) = (random_vec(rng), random_vec(rng));
        let k = sectional_curvature(&r, &metric_tensor(&q), &x, &y);
        worst_k = worst_k.max((k + 1.0).abs());
    }
    let mut worst_h: f64 = 0.0;
    for z0 in [0.1, 1.0, 10.0] {
        worst_h = worst_h.max((mean_curvature(z0)? - 1.0).abs());
    }
    Ok(SuiteReport::new(
        Suite::Curvature,
        vec![
            Check::new("sectional_curvature", worst_k, tol.get("sectional")),
            Check::new("christoffel_fd", worst_g, tol.get("christoffel")),
            Check::new("horosphere_mean_curvature", worst_h, tol.get("mean_curvature")),
        ],
    ))
}

fn forms_suite(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let states: Vec<CotangentState> = (0..20).map(|_| random_state(rng, 0.5, 3.0)).collect();
    let reports: Vec<_> = states.par_iter().map(|s| form_identity_residuals(s, 1e-3)).collect();
    let names = reports[0].names.clone();
    let mut checks = Vec::new();
    for (k, name) in names.iter().enumerate() {
        let worst = reports.iter().map(|r| r.residuals[k]).fold(0.0, f64::max);
        let c = Check::new(&format!("identity_{name}"), worst, tol.get("forms"));
        checks.push(if name.ends_with("literal") { c.informational() } else { c });
    }
    // step-halving ratio of the gating identities: ≥ 3 means second order
    let mut worst_ratio = f64::INFINITY;
    for r in &reports {
        for (k, name) in names.iter().enumerate() {
            if name.ends_with("literal") || r.residuals_half[k] < 1e-10 {
                continue;
            }
            worst_ratio = worst_ratio.min(r.residuals[k] / r.residuals_half[k]);
        }
    }
    let order_defect = if worst_ratio.is_finite() { (3.0 - worst_ratio).max(0.0) } else { 0.0 };
    checks.push(Check::new("step_halving_order", order_defect, 0.0));
    Ok(SuiteReport::new(Suite::Forms, checks))
}

fn flow_suite(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let starts: Vec<CotangentState> = (0..4).map(|_| random_state(rng, 0.5, 2.0)).collect();
    let drift = starts
        .par_iter()
        .map(|s| {
            let h0 = hamiltonian(s);
            let s1 = integrate_flow(s, 10.0, 1e-3)?;
            Ok((hamiltonian(&s1) - h0).abs() / h0)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let geo = starts
        .par_iter()
        .map(|s| {
            let traj = integrate_trajectory(s, 2.0, 1e-3, 1)?;
            Ok(geodesic_residual(&traj, 1e-3))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let v = integrate_flow(&CotangentState::new(0.0, 0.0, 1.0, 0.0, 0.0, 1.0)?, 1.0, 1e-4)?;
    let e = 1f64.exp();
    let vertical = (v.q.z - e).abs().max((v.p[2] - 1.0 / e).abs()).max(v.q.x.abs()).max(v.q.y.abs());

    let mut psh_h: f64 = 0.0;
    let mut psh_v: f64 = 0.0;
    let mut states: Vec<CotangentState> = (0..99).map(|_| random_state(rng, 0.5, 4.0)).collect();
    states.push(CotangentState::new(0.0, 0.0, 1.0, 0.3, -0.2, 0.5)?);
    for s in &states {
        let want = psh_reference(s.q.z);
        for i in 0..3 {
            psh_h = psh_h.max((plurisubharmonic_value_horizontal(s, i) - want).abs() / want.max(1.0));
            psh_v = psh_v.max((plurisubharmonic_value(s, i) - want).abs() / want.max(1.0));
        }
    }
    Ok(SuiteReport::new(
        Suite::Flow,
        vec![
            Check::new("energy_conservation", drift, tol.get("energy")),
            Check::new("geodesic_equation", geo, tol.get("geodesic")),
            Check::new("vertical_solution", vertical, tol.get("vertical")),
            Check::new("psh_horizontal", psh_h, tol.get("psh")),
            Check::new("psh_vertical_literal", psh_v, tol.get("psh")).informational(),
        ],
    ))
}

/// Grid size for the convexity check of ρᵢ.
pub const RHO_GRID: usize = 10_000;

fn cylmetric_suite(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let eps = crate::cylinder::find_epsilon0()?;
    let levels = [1u32, 2, 3];
    let mut rho2: f64 = 0.0;
    let mut curv: f64 = 0.0;
    for &i in &levels {
        let m = CylMetric::with_eps(i, eps);
        let top = i as f64 + 1.0;
        for k in 0..=RHO_GRID {
            let a = top * k as f64 / RHO_GRID as f64;
            rho2 = rho2.max(-m.rho_second(a) + 0.0);
            curv = curv.max(m.curvature_xy(a) + 0.0).max(m.curvature_ax(a) + 0.0);
        }
    }
    let samples: Vec<(f64, Vector3<f64>)> = (0..2000)
        .map(|_| {
            let a = rng.gen_range(0.0..4.5);
            (a, random_vec(rng))
        })
        .collect();
    // deficits are relative to the larger side of the comparison
    let deficit = |g1: &dyn Fn(f64) -> nalgebra::Matrix3<f64>, g2: &dyn Fn(f64) -> nalgebra::Matrix3<f64>| {
        samples
            .iter()
            .map(|(a, v)| {
                let (gap, _, _) = worst_gap(g1, g2, &[(*a, *v)]);
                let scale = (v.transpose() * g1(*a) * v)[(0, 0)].max(1e-300);
                (-gap / scale).max(0.0)
            })
            .fold(0.0, f64::max)
    };
    let mut h_le_hi: f64 = 0.0;
    let mut hj_le_hi: f64 = 0.0;
    let mut capped: f64 = 0.0;
    for &i in &levels {
        let gi = CappedMetric::with_eps(i, eps);
        for &k in levels.iter().filter(|&&k| k >= i) {
            let gk = CappedMetric::with_eps(k, eps);
            capped = capped.max(deficit(&|a| gi.adjusted(0, a), &|a| gk.adjusted(0, a)));
        }
        let mi = CylMetric::with_eps(i, eps);
        h_le_hi = h_le_hi.max(deficit(&|a| mi.metric(a), &hyperbolic_metric));
        for &j in levels.iter().filter(|&&j| j > i) {
            let mj = CylMetric::with_eps(j, eps);
            hj_le_hi = hj_le_hi.max(deficit(&|a| mi.metric(a), &|a| mj.metric(a)));
        }
    }
    Ok(SuiteReport::new(
        Suite::Cylmetric,
        vec![
            Check::new("rho_convex", rho2, tol.get("rho_second")),
            Check::new("sectional_nonpositive", curv, tol.get("cyl_curvature")),
            Check::new("h_le_hi", h_le_hi, tol.get("monotone")).informational(),
            Check::new("hj_le_hi", hj_le_hi, tol.get("monotone")).informational(),
            Check::new("capped_adjusted_monotone", capped, tol.get("monotone")).informational(),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.apply("psh=1e-3").unwrap();
        assert_eq!(t.get("psh"), 1e-3);
        t.apply("1e-20").unwrap();
        assert!(t.0.values().all(|v| *v == 1e-20));
        assert!(t.apply("nope=1").is_err());
        assert!(t.apply("-1").is_err());
    }

    #[test]
    fn tiny_tolerance_fails() {
        let mut t = Tolerances::default();
        t.apply("1e-20").unwrap();
        let r = run_suites(&[Suite::Forms], &t, 7).unwrap();
        assert!(!r.pass);
        assert!(r.max_gating_residual > 1e-20);
    }
}
