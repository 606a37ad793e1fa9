//! Command-line front end: argument parsing, configuration checks, file I/O
//! and reporting for the `cordspec` binary.
//!
//! Exit codes: 0 when every check passes, 1 on an assertion failure, 2 on an
//! I/O or configuration error.

pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cords::{enumerate_cords, max_embedded_height, ActionSpectrum};
use crate::error::{Error, Result};
use crate::group::{verify_presentation, GroupPresentation, Horoball};
use crate::hyperbolic::{Ideal, PointH3};
use crate::packing::CuspGroup;
use crate::torus::{enumerate_surface_cords, Ambient, RankTable, TorusKnotParams};
use crate::triangle::{coplanar_reduce, plane_defect, triangle_catalog, Plane};
use crate::variational::{constant_chord_hessian, hessian, index_nullity, BottReport};

use verify::{run_suites, Suite, Tolerances, VerifyReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cordspec", version, about = "Geodesic cords and their Morse data on cusped hyperbolic manifolds")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CORDSPEC_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run residual suites and print a JSON report.
    Verify(VerifyArgs),
    /// Enumerate cords up to a length cutoff.
    Spectrum(SpectrumArgs),
    /// Morse index and nullity of every cord.
    Index(IndexArgs),
    /// Cord families of a torus-knot complement.
    Torus(TorusArgs),
    /// Truncated triangles for three cord classes.
    Triangle(TriangleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// `auto` or a positive number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Height {
    Auto,
    Value(f64),
}

impl std::str::FromStr for Height {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Height::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Height::Value(v)),
            _ => Err(format!("expected `auto` or a positive height, got {s:?}")),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// Holonomy file (JSON); the bundled figure-eight group when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Cusp horoball height, or `auto` for the largest embedded one.
    #[arg(long, default_value = "auto")]
    pub height: Height,
    #[arg(long, default_value_t = 4.0)]
    pub cutoff: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Restrict to one suite (repeatable).
    #[arg(long, value_parser = parse_suite)]
    pub suite: Vec<Suite>,
    /// `name=value`, or a bare value applied to every tolerance (repeatable).
    #[arg(long)]
    pub tol: Vec<String>,
    #[arg(long, default_value_t = 20240611)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Mesh size N, a power of two ≥ 64.
    #[arg(long, default_value_t = 256)]
    pub mesh: usize,
    /// Report without failing on nonzero index or nullity.
    #[arg(long)]
    pub no_assert: bool,
    /// Also linearize at a constant chord on the cusp horosphere.
    #[arg(long)]
    pub constant_chord: bool,
}

#[derive(Args, Debug)]
pub struct TorusArgs {
    #[arg(long)]
    pub p: i64,
    #[arg(long)]
    pub q: i64,
    #[arg(long, default_value = "s3", value_parser = parse_ambient)]
    pub ambient: Ambient,
    #[arg(long, default_value_t = 8.0)]
    pub max_length: f64,
    /// Horoball height in the ℍ² factor; twice the embedded height by default.
    #[arg(long)]
    pub height: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Also write the family spectrum as CSV here.
    #[arg(long)]
    pub families: Option<PathBuf>,
}

fn parse_ambient(s: &str) -> std::result::Result<Ambient, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum PlaneArg {
    X0,
    Y0,
}

#[derive(Args, Debug)]
pub struct TriangleArgs {
    /// Class words e0 e1 e2; the sides run through e1, e2 and e0.
    #[arg(num_args = 3, required = true)]
    pub classes: Vec<String>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Arcs at the embedded height are often too long for a hexagon, so the
    /// default sits higher.
    #[arg(long, default_value = "2")]
    pub height: Height,
    #[arg(long, default_value_t = 4.0)]
    pub cutoff: f64,
    /// Range of peripheral translations tried between e1 and e2.
    #[arg(long, default_value_t = 4)]
    pub radius: i64,
    #[arg(long, value_enum, default_value_t = PlaneArg::X0)]
    pub plane: PlaneArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Resolved settings shared by the subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub input: Option<PathBuf>,
    pub height: Height,
    pub cutoff: f64,
    pub mesh: usize,
    pub format: Format,
    pub tolerances: Tolerances,
    pub threads: usize,
}

impl RunConfig {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.into(),
            input: None,
            height: Height::Auto,
            cutoff: 4.0,
            mesh: 256,
            format: Format::Json,
            tolerances: Tolerances::default(),
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::Config(format!("cutoff must be positive, got {}", self.cutoff)));
        }
        if self.mesh < 64 || !self.mesh.is_power_of_two() {
            return Err(Error::Config(format!("mesh must be a power of two ≥ 64, got {}", self.mesh)));
        }
        if self.threads == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Exit code for an error: configuration and I/O problems are 2, everything
/// else counts as a failed check.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::Parse(_)
        | Error::Config(_)
        | Error::InvalidParams(_)
        | Error::NotEmbedded { .. } => EXIT_CONFIG,
        _ => EXIT_ASSERT,
    }
}

/// Serializes and re-parses a report, failing unless it survives unchanged.
pub fn roundtrip_json<T: Serialize + DeserializeOwned + PartialEq>(v: &T) -> Result<String> {
    let s = serde_json::to_string_pretty(v)?;
    let back: T = serde_json::from_str(&s)?;
    if &back != v {
        return Err(Error::Config("report does not survive a JSON round trip".into()));
    }
    Ok(s)
}

fn emit(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn with_newline(mut s: String) -> Vec<u8> {
    s.push('\n');
    s.into_bytes()
}

pub fn load_presentation(input: Option<&Path>) -> Result<GroupPresentation> {
    let text = match input {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None => crate::FIGURE_EIGHT_JSON.to_string(),
    };
    let rep = GroupPresentation::from_json(&text)?.normalized()?;
    let check = verify_presentation(&rep, 1e-9);
    if !check.passed {
        return Err(Error::Certificate(format!("holonomy fails its own checks: {check:?}")));
    }
    Ok(rep)
}

fn resolve_height(rep: &GroupPresentation, h: Height) -> Result<f64> {
    match h {
        Height::Auto => max_embedded_height(rep),
        Height::Value(v) => Ok(v),
    }
}

/// Loads the group and enumerates its cords.
pub fn spectrum_for(cfg: &RunConfig) -> Result<ActionSpectrum> {
    cfg.validate()?;
    let rep = load_presentation(cfg.input.as_deref())?;
    let a0 = resolve_height(&rep, cfg.height)?;
    enumerate_cords(&rep, a0, cfg.cutoff)
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cordspec: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let threads = cli.threads;
    let base = |name: &str| {
        let mut cfg = RunConfig::new(name);
        if let Some(t) = threads {
            cfg.threads = t;
        }
        cfg
    };
    match cli.command {
        Command::Verify(a) => {
            let mut cfg = base("verify");
            for t in &a.tol {
                cfg.tolerances.apply(t)?;
            }
            run_verify(&cfg, &a.suite, a.seed, a.output.as_deref())
        }
        Command::Spectrum(a) => {
            let mut cfg = base("spectrum");
            apply_group(&mut cfg, &a.group, &a.out);
            run_spectrum(&cfg, a.out.output.as_deref())
        }
        Command::Index(a) => {
            let mut cfg = base("index");
            apply_group(&mut cfg, &a.group, &a.out);
            cfg.mesh = a.mesh;
            run_index(&cfg, &a, a.out.output.as_deref())
        }
        Command::Torus(a) => {
            let mut cfg = base("torus");
            cfg.cutoff = a.max_length;
            cfg.format = a.out.format;
            run_torus(&cfg, &a)
        }
        Command::Triangle(a) => {
            let mut cfg = base("triangle");
            cfg.input = a.input.clone();
            cfg.height = a.height;
            cfg.cutoff = a.cutoff;
            run_triangle(&cfg, &a)
        }
    }
}

fn apply_group(cfg: &mut RunConfig, g: &GroupArgs, o: &OutputArgs) {
    cfg.input = g.input.clone();
    cfg.height = g.height;
    cfg.cutoff = g.cutoff;
    cfg.format = o.format;
}

pub fn run_verify(cfg: &RunConfig, suites: &[Suite], seed: u64, output: Option<&Path>) -> Result<i32> {
    cfg.validate()?;
    let mut chosen: Vec<Suite> = if suites.is_empty() { Suite::ALL.to_vec() } else { suites.to_vec() };
    chosen.sort();
    chosen.dedup();
    let report: VerifyReport = cfg.pool()?.install(|| run_suites(&chosen, &cfg.tolerances, seed))?;
    emit(output, &with_newline(roundtrip_json(&report)?))?;
    if !report.pass {
        for s in &report.suites {
            for c in s.checks.iter().filter(|c| c.gating && !c.pass) {
                eprintln!(
                    "cordspec: {:?}/{} residual {:.3e} exceeds {:.3e}",
                    s.suite, c.name, c.max_residual, c.tolerance
                );
            }
        }
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_ASSERT })
}

pub fn run_spectrum(cfg: &RunConfig, output: Option<&Path>) -> Result<i32> {
    let spec = cfg.pool()?.install(|| spectrum_for(cfg))?;
    let bad: Vec<&str> = spec
        .cords
        .iter()
        .zip(&spec.entries)
        .filter(|(c, _)| c.profile_residual(64) > 1e-8)
        .map(|(_, e)| e.class_word.as_str())
        .collect();
    match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            spec.write_csv(&mut buf)?;
            emit(output, &buf)?;
        }
        Format::Json => {
            let s = spec.to_json()?;
            let (header, rows) = ActionSpectrum::parse_json(&s)?;
            if header != spec.header() || rows != spec.entries {
                return Err(Error::Config("spectrum does not survive a JSON round trip".into()));
            }
            emit(output, &with_newline(s))?;
        }
    }
    if !bad.is_empty() {
        eprintln!("cordspec: z-profile residual too large for {}", bad.join(", "));
        return Ok(EXIT_ASSERT);
    }
    Ok(EXIT_PASS)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    pub class_word: String,
    pub length: f64,
    pub min_eigenvalue: f64,
    pub index: usize,
    pub nullity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantChordRow {
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    pub kernel_is_constant_tangent: bool,
    pub cokernel_is_momentum: bool,
}

impl From<BottReport> for ConstantChordRow {
    fn from(b: BottReport) -> Self {
        Self {
            kernel_dim: b.kernel_dim,
            cokernel_dim: b.cokernel_dim,
            kernel_is_constant_tangent: b.kernel_is_constant_tangent,
            cokernel_is_momentum: b.cokernel_is_momentum,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexOutput {
    pub mesh: usize,
    pub cutoff: f64,
    pub horoball_height: f64,
    pub rows: Vec<IndexRow>,
    pub constant_chord: Option<ConstantChordRow>,
}

/// Index rows for every cord of `spec`, in spectrum order.
pub fn index_rows(spec: &ActionSpectrum, mesh: usize) -> Result<Vec<IndexRow>> {
    spec.cords
        .par_iter()
        .zip(spec.entries.par_iter())
        .map(|(c, e)| {
            let r = index_nullity(&hessian(c, mesh)?)?;
            Ok(IndexRow {
                class_word: e.class_word.clone(),
                length: e.length,
                min_eigenvalue: r.min_eigenvalue,
                index: r.index,
                nullity: r.nullity,
            })
        })
        .collect()
}

pub fn run_index(cfg: &RunConfig, a: &IndexArgs, output: Option<&Path>) -> Result<i32> {
    let pool = cfg.pool()?;
    let (spec, rows) = pool.install(|| -> Result<_> {
        let spec = spectrum_for(cfg)?;
        let rows = index_rows(&spec, cfg.mesh)?;
        Ok((spec, rows))
    })?;
    let constant_chord = if a.constant_chord {
        let a0 = spec.horoball_height;
        let q = PointH3::new(0.0, 0.0, a0)?;
        Some(constant_chord_hessian(&q, &Horoball::at_infinity(a0), cfg.mesh.min(128))?.into())
    } else {
        None
    };
    let out = IndexOutput {
        mesh: cfg.mesh,
        cutoff: spec.cutoff,
        horoball_height: spec.horoball_height,
        rows,
        constant_chord,
    };
    match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &out.rows {
                w.serialize(r)?;
            }
            let buf = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
            emit(output, &buf)?;
        }
        Format::Json => emit(output, &with_newline(roundtrip_json(&out)?))?,
    }
    if a.no_assert {
        return Ok(EXIT_PASS);
    }
    let mut ok = true;
    for r in out.rows.iter().filter(|r| r.index != 0 || r.nullity != 0) {
        eprintln!("cordspec: {} has index {} nullity {}", r.class_word, r.index, r.nullity);
        ok = false;
    }
    if let Some(c) = &out.constant_chord {
        if c.kernel_dim != 2 || c.cokernel_dim != 2 {
            eprintln!("cordspec: constant chord kernel {} cokernel {}", c.kernel_dim, c.cokernel_dim);
            ok = false;
        }
    }
    Ok(if ok { EXIT_PASS } else { EXIT_ASSERT })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusOutput {
    pub params: TorusKnotParams,
    pub euler_characteristic: i64,
    pub polygon_order: usize,
    pub height: f64,
    pub embedded_height: f64,
    pub copies: i64,
    pub rank_table: RankTable,
}

pub fn run_torus(cfg: &RunConfig, a: &TorusArgs) -> Result<i32> {
    cfg.validate()?;
    let params = TorusKnotParams::new(a.p, a.q, a.ambient)?;
    let spec = cfg.pool()?.install(|| enumerate_surface_cords(&params, a.max_length, a.height))?;
    let table = RankTable::from_families(&spec.families, a.max_length);
    if let Some(path) = &a.families {
        spec.write_csv(fs::File::create(path)?)?;
    }
    match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            spec.write_csv(&mut buf)?;
            emit(a.out.output.as_deref(), &buf)?;
        }
        Format::Json => {
            let out = TorusOutput {
                params,
                euler_characteristic: crate::torus::euler_char(&params),
                polygon_order: spec.polygon_order,
                height: spec.height,
                embedded_height: spec.embedded_height,
                copies: spec.copies,
                rank_table: table.clone(),
            };
            emit(a.out.output.as_deref(), &with_newline(roundtrip_json(&out)?))?;
        }
    }
    let ok = table.count(0) == table.count(1) && table.counts.iter().all(|(d, n)| *d <= 1 || *n == 0);
    Ok(if ok { EXIT_PASS } else { EXIT_ASSERT })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleRow {
    pub vertices: [Ideal; 3],
    pub sides: [f64; 3],
    /// Cord lengths of classes e1, e2, e0.
    pub class_lengths: [f64; 3],
    pub arcs: [f64; 3],
    pub area: f64,
    /// `area − π + Σ arcs`.
    pub gauss_bonnet_residual: f64,
    /// `area − π − Σ arcs`.
    pub excess_plus: f64,
    pub plane_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleOutput {
    pub classes: [String; 3],
    pub horoball_height: f64,
    pub plane: PlaneArg,
    pub triangles: Vec<TriangleRow>,
}

pub fn triangle_rows(
    spec: &ActionSpectrum,
    group: &CuspGroup,
    classes: [&str; 3],
    radius: i64,
    plane: Plane,
) -> Result<Vec<TriangleRow>> {
    let length = |w: &str| {
        spec.entries
            .iter()
            .find(|e| e.class_word == w)
            .map(|e| e.length)
            .ok_or_else(|| Error::InvalidParams(format!("class {w} is not in the spectrum")))
    };
    let class_lengths = [length(classes[1])?, length(classes[2])?, length(classes[0])?];
    triangle_catalog(group, spec, classes, radius)?
        .into_iter()
        .map(|e| {
            let t = e.triangle;
            let cords = t.side_cords()?;
            let g = coplanar_reduce([&cords[0], &cords[1], &cords[2]], plane)?;
            Ok(TriangleRow {
                vertices: t.triangle.vertices,
                sides: t.sides,
                class_lengths,
                arcs: t.arcs,
                area: t.area,
                gauss_bonnet_residual: t.excess_minus(),
                excess_plus: t.excess_plus(),
                plane_defect: plane_defect(&g, &[&cords[0], &cords[1], &cords[2]], plane, 32),
            })
        })
        .collect()
}

pub fn run_triangle(cfg: &RunConfig, a: &TriangleArgs) -> Result<i32> {
    cfg.validate()?;
    let rep = load_presentation(cfg.input.as_deref())?;
    let a0 = resolve_height(&rep, cfg.height)?;
    let spec = enumerate_cords(&rep, a0, cfg.cutoff)?;
    let group = CuspGroup::from_presentation(&rep);
    let classes = [a.classes[0].as_str(), a.classes[1].as_str(), a.classes[2].as_str()];
    let plane = match a.plane {
        PlaneArg::X0 => Plane::X0,
        PlaneArg::Y0 => Plane::Y0,
    };
    let rows = triangle_rows(&spec, &group, classes, a.radius, plane)?;
    let out = TriangleOutput {
        classes: [a.classes[0].clone(), a.classes[1].clone(), a.classes[2].clone()],
        horoball_height: a0,
        plane: a.plane,
        triangles: rows,
    };
    emit(a.output.as_deref(), &with_newline(roundtrip_json(&out)?))?;
    let ok = out.triangles.iter().all(|r| {
        r.gauss_bonnet_residual.abs() <= 1e-6
            && r.plane_defect <= 1e-8
            && r.sides.iter().zip(&r.class_lengths).all(|(s, l)| (s - l).abs() <= 1e-7)
    });
    Ok(if ok { EXIT_PASS } else { EXIT_ASSERT })
}
