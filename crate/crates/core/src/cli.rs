//! Command-line front end.
//!
//! ```text
//! hsk norm --kind herz-slice --input expr:gaussian(1) --u 2,3 --v 2 --t 0.25 --beta 0.5 --s 2
//! hsk maximal --input field.hsf --geometry ball --radii dyadic --output m.hsf
//! hsk decompose --input field.hsf --u 2 --v 2 --t 0.25 --beta 0 --s 2 --output blocks/
//! hsk reconstruct --blocks blocks/ --output back.hsf --reference field.hsf
//! hsk verify --suite holder --seed 7 --trials 200 --dim 2
//! ```
//!
//! Exit codes: 0 success, 1 I/O, 2 usage or parameters, 3 verification failure.
//! Floating-point output carries 17 significant digits.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::blocks::{self, VolumeConvention};
use crate::error::{Error, Result};
use crate::fmt::Sig17;
use crate::grid::{hsf, sample_expression, AnnulusMode, Exponent, ExponentVector, GridSpec, SampledField};
use crate::herz::{herz_report, herz_slice_report, HerzNorm, HerzSliceParams};
use crate::maximal::{hl_maximal, Geometry, MaximalConfig};
use crate::mixed_norm::mixed_lebesgue_norm;
use crate::slice::{slice_norm, SliceParams};
use crate::verify::{run_suite, FamilyKind, FieldFamily, SuiteConfig, Support, VerificationReport, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Samples per axis for expression inputs without an explicit grid.
pub const DEFAULT_EXPR_SAMPLES: usize = 257;

#[derive(Parser, Debug)]
#[command(name = "hsk", version, about = "Mixed-norm Herz-slice norms, maximal operator, block decompositions and property suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a norm of a field.
    Norm(NormArgs),
    /// Apply the Hardy-Littlewood maximal operator.
    Maximal(MaximalArgs),
    /// Canonical central-block decomposition.
    Decompose(DecomposeArgs),
    /// Sum a decomposition back into a field.
    Reconstruct(ReconstructArgs),
    /// Run a property suite and write its JSON report.
    Verify(VerifyArgs),
    /// Sample an expression to a field file.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Mixed,
    Slice,
    Herz,
    HerzSlice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Hom,
    Nonhom,
}

impl From<ModeArg> for AnnulusMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Hom => AnnulusMode::Homogeneous,
            ModeArg::Nonhom => AnnulusMode::NonHomogeneous,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Ball,
    Cube,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Ball => Geometry::Ball,
            GeometryArg::Cube => Geometry::Cube,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Dyadic,
    Euclidean,
}

impl From<ConventionArg> for VolumeConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Dyadic => VolumeConvention::Dyadic,
            ConventionArg::Euclidean => VolumeConvention::Euclidean,
        }
    }
}

/// Grid bounds `lo,hi,N` shared by every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

fn parse_bounds(s: &str) -> std::result::Result<Bounds, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected lo,hi,N, got `{s}`"));
    };
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("not a number: `{x}`"));
    let samples = n.parse::<usize>().map_err(|_| format!("not a sample count: `{n}`"))?;
    Ok(Bounds { lo: num(lo)?, hi: num(hi)?, samples })
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Field file (HSF1) or `expr:<expression>`.
    #[arg(long)]
    pub input: String,
    /// Expression grid: N samples from lo to hi inclusive on every axis.
    #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true, conflicts_with = "grid_cells")]
    pub grid: Option<Bounds>,
    /// Expression grid: midpoints of N equal cells tiling [lo, hi] on every axis.
    #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
    pub grid_cells: Option<Bounds>,
    /// Expression dimension (default: length of --u/--v, else 1).
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    /// Outer exponents, comma separated; a single value applies to every axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Vec<Exponent>,
    /// Inner exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub v: Vec<Exponent>,
    /// Slice ball radius.
    #[arg(long)]
    pub t: Option<f64>,
    /// Annulus weight exponent.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Outer sequence exponent (`inf` allowed).
    #[arg(long)]
    pub s: Option<Exponent>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Largest shell index; defaults to the grid extent.
    #[arg(long, allow_hyphen_values = true)]
    pub k_max: Option<i32>,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long, value_enum)]
    pub kind: NormKind,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Args, Debug)]
pub struct MaximalArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_enum, default_value = "ball")]
    pub geometry: GeometryArg,
    /// `dyadic` or a comma-separated list of radii.
    #[arg(long, default_value = "dyadic")]
    pub radii: String,
    /// Only windows centered at the evaluation point.
    #[arg(long)]
    pub centered: bool,
    /// Also evaluate the other geometry and report how often this one dominates.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "dyadic")]
    pub convention: ConventionArg,
    /// Directory for the manifest and block files.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Directory written by `decompose`.
    #[arg(long)]
    pub blocks: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Field to compare the reconstruction against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// N samples from lo to hi inclusive on every axis.
    #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
    pub grid: Option<Bounds>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value = "smooth_bumps")]
    pub family: String,
    /// Support radius of generated fields (default: the grid interior).
    #[arg(long)]
    pub support_radius: Option<f64>,
    /// Restrict generated fields to shell k.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "support_radius")]
    pub shell: Option<i32>,
    #[arg(long, value_enum, default_value = "ball")]
    pub geometry: GeometryArg,
    /// Refinement factor for the reduction convergence study [default: 4]
    #[arg(long)]
    pub refinement: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub output: PathBuf,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// [`run_with`] on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Norm(a) => cmd_norm(a, out),
        Command::Maximal(a) => cmd_maximal(a, out),
        Command::Decompose(a) => cmd_decompose(a, out),
        Command::Reconstruct(a) => cmd_reconstruct(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Sample(a) => {
            let f = load_field(&a.field, None)?;
            hsf::save(&f, &a.output)?;
            emit(out, &json!({ "output": a.output, "grid": f.spec() }))
        }
    }
}

fn emit(out: &mut dyn Write, v: &Value) -> Result<i32> {
    out.write_all(crate::fmt::to_json(v)?.as_bytes())?;
    Ok(EXIT_OK)
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParam(msg.into())
}

/// Field from a file, or from an expression on the requested grid.
pub fn load_field(a: &FieldArgs, implied_dim: Option<usize>) -> Result<SampledField> {
    match a.input.strip_prefix("expr:") {
        Some(src) => {
            let dim = a.dim.or(implied_dim).unwrap_or(1);
            let spec = match (a.grid, a.grid_cells) {
                (Some(b), _) => GridSpec::spanning(dim, b.lo, b.hi, b.samples)?,
                (None, Some(b)) => GridSpec::tiling(dim, b.lo, b.hi, b.samples)?,
                (None, None) => GridSpec::spanning(dim, -4.0, 4.0, DEFAULT_EXPR_SAMPLES)?,
            };
            sample_expression(src, &spec)
        }
        None => {
            if a.grid.is_some() || a.grid_cells.is_some() || a.dim.is_some() {
                return Err(usage("--grid, --grid-cells and --dim apply to expression inputs only"));
            }
            hsf::load(&a.input)
        }
    }
}

fn implied_dim(p: &ParamArgs) -> Option<usize> {
    let n = p.u.len().max(p.v.len());
    (n > 1).then_some(n)
}

fn broadcast(name: &str, e: &[Exponent], dim: usize) -> Result<ExponentVector> {
    match e.len() {
        0 => Err(usage(format!("--{name} is required"))),
        1 => ExponentVector::new(vec![e[0]; dim]),
        n if n == dim => ExponentVector::new(e.to_vec()),
        n => Err(Error::DimensionMismatch { expected: dim, got: n }),
    }
}

fn slice_params(p: &ParamArgs, dim: usize) -> Result<SliceParams> {
    let t = p.t.ok_or_else(|| usage("--t is required for slice norms"))?;
    SliceParams::new(t, broadcast("u", &p.u, dim)?, broadcast("v", &p.v, dim)?)
}

fn herz_slice_params(p: &ParamArgs, dim: usize) -> Result<HerzSliceParams> {
    let beta = p.beta.ok_or_else(|| usage("--beta is required for Herz norms"))?;
    let s = p.s.ok_or_else(|| usage("--s is required for Herz norms"))?;
    let mode = p.mode.unwrap_or(ModeArg::Hom).into();
    Ok(HerzSliceParams::new(beta, s, slice_params(p, dim)?, mode)?.with_k_max(p.k_max))
}

fn annulus_range(h: &HerzNorm) -> Value {
    json!({ "k_min": h.k_min, "k_max": h.k_max, "residual_shell": h.residual_shell })
}

fn cmd_norm(a: NormArgs, out: &mut dyn Write) -> Result<i32> {
    let f = load_field(&a.field, implied_dim(&a.params))?;
    let dim = f.spec().dim();
    let p = &a.params;
    let (kind, params, value, range) = match a.kind {
        NormKind::Mixed => {
            let u = broadcast("u", &p.u, dim)?;
            let value = mixed_lebesgue_norm(&f, &u)?;
            ("mixed", json!({ "u": u }), value, Value::Null)
        }
        NormKind::Slice => {
            let sp = slice_params(p, dim)?;
            let value = slice_norm(&f, &sp)?;
            ("slice", serde_json::to_value(&sp)?, value, Value::Null)
        }
        NormKind::Herz => {
            let beta = p.beta.ok_or_else(|| usage("--beta is required for Herz norms"))?;
            let s = p.s.ok_or_else(|| usage("--s is required for Herz norms"))?;
            let u = match p.u.as_slice() {
                [u] => *u,
                [] => return Err(usage("--u is required")),
                _ => return Err(usage("the classical Herz norm takes a single exponent --u")),
            };
            let mode: AnnulusMode = p.mode.unwrap_or(ModeArg::Hom).into();
            let h = herz_report(&f, beta, s, u, mode, p.k_max)?;
            let params = json!({ "beta": beta, "s": s, "u": u, "mode": mode });
            ("herz", params, h.value, annulus_range(&h))
        }
        NormKind::HerzSlice => {
            let hp = herz_slice_params(p, dim)?;
            let h = herz_slice_report(&f, &hp)?;
            ("herz-slice", serde_json::to_value(&hp)?, h.value, annulus_range(&h))
        }
    };
    emit(
        out,
        &json!({
            "kind": kind,
            "params": params,
            "value": Sig17(value),
            "annulus_range": range,
            "grid": f.spec(),
        }),
    )
}

fn parse_radii(s: &str, spec: &GridSpec, geometry: Geometry) -> Result<MaximalConfig> {
    if s == "dyadic" {
        return Ok(MaximalConfig::dyadic(spec, geometry));
    }
    let radii = s
        .split(',')
        .map(|r| r.trim().parse::<f64>().map_err(|_| usage(format!("not a radius: `{r}`"))))
        .collect::<Result<Vec<_>>>()?;
    MaximalConfig::with_radii(geometry, radii)
}

fn cmd_maximal(a: MaximalArgs, out: &mut dyn Write) -> Result<i32> {
    let f = load_field(&a.field, None)?;
    let geometry: Geometry = a.geometry.into();
    let cfg = parse_radii(&a.radii, f.spec(), geometry)?.centered(a.centered);
    let m = hl_maximal(&f, &cfg)?;
    hsf::save(&m, &a.output)?;
    let (argmax, max) = m
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let point: Vec<Sig17> = f.spec().point(argmax)[..f.spec().dim()].iter().map(|&x| Sig17(x)).collect();
    let mut summary = json!({
        "output": a.output,
        "geometry": geometry,
        "centered": a.centered,
        "radii": cfg.radii.iter().map(|&r| Sig17(r)).collect::<Vec<_>>(),
        "max": Sig17(max),
        "argmax": point,
    });
    if a.compare {
        let other = match geometry {
            Geometry::Ball => Geometry::Cube,
            Geometry::Cube => Geometry::Ball,
        };
        let ocfg = MaximalConfig { geometry: other, ..cfg.clone() };
        let om = hl_maximal(&f, &ocfg)?;
        let at_or_above = m.values().iter().zip(om.values()).filter(|(a, b)| a >= b).count();
        summary["comparison"] = json!({
            "other_geometry": other,
            "samples_at_or_above_other": at_or_above,
            "samples": m.len(),
        });
    }
    emit(out, &summary)
}

fn max_abs_difference(a: &SampledField, b: &SampledField) -> Result<f64> {
    if a.spec() != b.spec() {
        return Err(Error::SpecMismatch);
    }
    Ok(a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn cmd_decompose(a: DecomposeArgs, out: &mut dyn Write) -> Result<i32> {
    let f = load_field(&a.field, implied_dim(&a.params))?;
    let p = herz_slice_params(&a.params, f.spec().dim())?;
    let d = blocks::decompose(&f, &p, a.convention.into())?;
    let manifest = blocks::export(&d, &a.output)?;
    let reloaded = blocks::load(&a.output)?;
    let back = blocks::reconstruct(&reloaded)?;
    emit(
        out,
        &json!({
            "manifest": manifest,
            "levels": d.levels(),
            "etas": d.etas().into_iter().map(Sig17).collect::<Vec<_>>(),
            "coefficient_norm": Sig17(blocks::coefficient_norm(&d.etas(), p.s)),
            "roundtrip_max_abs_error": Sig17(max_abs_difference(&back, &f)?),
        }),
    )
}

fn cmd_reconstruct(a: ReconstructArgs, out: &mut dyn Write) -> Result<i32> {
    let d = blocks::load(&a.blocks)?;
    let f = blocks::reconstruct(&d)?;
    hsf::save(&f, &a.output)?;
    let mut summary = json!({ "output": a.output, "blocks": d.entries.len() });
    if let Some(r) = &a.reference {
        summary["max_abs_difference"] = json!(Sig17(max_abs_difference(&f, &hsf::load(r)?)?));
    }
    emit(out, &summary)
}

/// Suite configuration from defaults for `dim`, overridden by explicit flags.
pub fn suite_config(a: &VerifyArgs) -> Result<SuiteConfig> {
    let mut cfg = SuiteConfig::default_for(a.dim)?;
    let dim = a.dim;
    let p = &a.params;
    if let Some(b) = a.grid {
        cfg.grid = GridSpec::spanning(dim, b.lo, b.hi, b.samples)?;
    }
    let slice = &mut cfg.params.slice;
    if !p.u.is_empty() {
        slice.u = broadcast("u", &p.u, dim)?;
    }
    if !p.v.is_empty() {
        slice.v = broadcast("v", &p.v, dim)?;
    }
    if let Some(t) = p.t {
        slice.t = t;
    }
    if let Some(beta) = p.beta {
        cfg.params.beta = beta;
    }
    if let Some(s) = p.s {
        cfg.params.s = s;
    }
    if let Some(m) = p.mode {
        cfg.params.mode = m.into();
    }
    // revalidate the combination
    let params = HerzSliceParams::new(cfg.params.beta, cfg.params.s, cfg.params.slice, cfg.params.mode)?.with_k_max(p.k_max);
    let mut checked = SuiteConfig::new(cfg.grid, params)?;
    checked.geometry = a.geometry.into();
    if let Some(r) = a.refinement {
        checked.refinement = r;
    }
    Ok(checked)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let names: Vec<&str> = if a.suite == "all" {
        SUITES.to_vec()
    } else {
        vec![a.suite.as_str()]
    };
    let cfg = suite_config(&a)?;
    let kind: FamilyKind = a.family.parse()?;
    let support = match (a.shell, a.support_radius) {
        (Some(k), _) => Support::Shell(k),
        (None, Some(r)) => Support::Radius(r),
        (None, None) => Support::Radius(cfg.interior_radius()),
    };
    let family = FieldFamily::new(kind, a.seed, a.trials, support);
    let reports = names
        .iter()
        .map(|name| run_suite(name, &cfg, &family))
        .collect::<Result<Vec<VerificationReport>>>()?;
    let text = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        crate::fmt::to_json(&reports)?
    };
    match &a.report {
        Some(path) => std::fs::write(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(if reports.iter().all(VerificationReport::passed) { EXIT_OK } else { EXIT_VERIFY })
}
