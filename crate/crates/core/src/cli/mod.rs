//! Batch front end: read a manifest, run classification and residual suites,
//! and emit a deterministic report.
//!
//! Exit status is 0 when every gated residual is within tolerance, 1 when
//! some residual is not, and 2 on any input or evaluation error.

pub mod manifest;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args as ClapArgs, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::expr::ScalarExpr;
use crate::geometry::{conformal_weyl_divergence, LocalGeometry, MetricField};
use crate::gray::{
    classify, scalar_identity_residual, theorem_residual, GrayClassReport, TheoremId,
    TheoremTarget, Tolerances,
};
use crate::warped::{compare_spacetime_ricci, Factor, ProductSpec, SigmaDiamond, TtFinding};

pub use manifest::{Kind, Manifest, Model};
pub use report::{render_json, render_text};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("manifest is not valid JSON for the schema: {0}")]
    Json(String),
    #[error("manifest field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("evaluating {object}: {message}")]
    Eval { object: String, message: String },
}

impl CliError {
    fn eval(object: impl Into<String>, e: impl std::fmt::Display) -> CliError {
        CliError::Eval {
            object: object.into(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Classify,
    Verify,
    Theorems,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Json,
    #[default]
    Text,
}

/// Command-line overrides of manifest settings.
#[derive(Debug, Clone, Default, PartialEq, ClapArgs)]
pub struct Overrides {
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Number of sample points.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, ClapArgs)]
pub struct Flags {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum CommandArg {
    /// Gray-class verdicts of the manifest's metric.
    Classify(Flags),
    /// Residuals of the curvature identities.
    Verify(Flags),
    /// Residuals of the inheritance identities.
    Theorems(Flags),
    /// Everything in one document.
    Report(Flags),
}

#[derive(Debug, Parser)]
#[command(name = "warpcurv", version, about = "Curvature and Einstein-like class checks for doubly warped products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    /// Reported but not gated.
    Info,
    Member,
    NonMember,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: CheckVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ResidualFailure,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub manifest_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: Kind,
    pub coords: Vec<String>,
    pub tolerances: Tolerances,
    pub samples: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<GrayClassReport>,
    pub status: Status,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::ResidualFailure => 1,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Per-point measurement feeding one check.
struct Sample {
    name: String,
    residual: f64,
    scale: f64,
    gated: bool,
    detail: Option<String>,
}

impl Sample {
    fn gated(name: impl Into<String>, residual: f64, scale: f64) -> Sample {
        Sample {
            name: name.into(),
            residual,
            scale,
            gated: true,
            detail: None,
        }
    }

    fn info(name: impl Into<String>, residual: f64, scale: f64) -> Sample {
        Sample {
            gated: false,
            ..Sample::gated(name, residual, scale)
        }
    }
}

/// Max-reduces per-point samples into checks, keeping first-seen order.
fn aggregate(per_point: Vec<Vec<Sample>>, tol: Tolerances) -> Vec<Check> {
    let mut order: Vec<String> = Vec::new();
    let mut acc: std::collections::HashMap<String, (f64, f64, bool, Vec<String>)> =
        std::collections::HashMap::new();
    for pt in per_point {
        for s in pt {
            let e = acc.entry(s.name.clone()).or_insert_with(|| {
                order.push(s.name.clone());
                (0.0, 0.0, s.gated, Vec::new())
            });
            e.0 = e.0.max(s.residual);
            if s.residual.is_nan() {
                e.0 = f64::NAN;
            }
            e.1 = e.1.max(s.scale);
            if let Some(d) = s.detail {
                if !e.3.contains(&d) {
                    e.3.push(d);
                }
            }
        }
    }
    order
        .into_iter()
        .map(|name| {
            let (residual, scale, gated, details) = acc.remove(&name).expect("present");
            let tolerance = tol.threshold(scale.max(1.0));
            let verdict = if !gated {
                CheckVerdict::Info
            } else if residual <= tolerance {
                CheckVerdict::Pass
            } else {
                CheckVerdict::Fail
            };
            Check {
                name,
                residual,
                tolerance,
                verdict,
                detail: if details.is_empty() {
                    None
                } else {
                    Some(details.join(","))
                },
            }
        })
        .collect()
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn max_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `ḡ = g₁/f₁² ⊕ g₂/f₂²` and `φ = f₁f₂`, so that the product is `φ² ḡ`.
fn product_conformal_split(spec: &ProductSpec) -> (MetricField, ScalarExpr) {
    let chart = spec.assembled().coord_names().clone();
    let n = chart.len();
    let r1 = spec.range(Factor::First);
    let f1 = spec.factor(Factor::First);
    let f2 = spec.factor(Factor::Second);
    let w1 = f1.warping().embed(&chart, 0);
    let w2 = f2.warping().embed(&chart, r1.end);
    let rows: Vec<Vec<ScalarExpr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = if i < r1.end && j < r1.end {
                        w1.powi(-2).mul(&f1.metric().component(i, j).embed(&chart, 0))
                    } else if i >= r1.end && j >= r1.end {
                        w2.powi(-2)
                            .mul(&f2.metric().component(i - r1.end, j - r1.end).embed(&chart, r1.end))
                    } else {
                        ScalarExpr::constant(0.0, chart.clone())
                    };
                    c
                })
                .collect()
        })
        .collect();
    let gbar = MetricField::new(chart, rows, spec.assembled().signature())
        .expect("block-diagonal split is symmetric")
        .require_positive(w1.clone())
        .require_positive(w2.clone());
    (gbar, w1.mul(&w2))
}

fn verify_point(
    model: &Model,
    split: Option<&(MetricField, ScalarExpr)>,
    p: &[f64],
    tol: Tolerances,
) -> Result<Vec<Sample>, CliError> {
    let metric = model.metric();
    let pack = LocalGeometry::new(metric, p)
        .map_err(|e| CliError::eval("curvature", e))?
        .pack();
    let n = pack.dim();
    let nf = n as f64;
    let mut out = Vec::new();
    let ric_scale = max_abs(&pack.ricci);
    let nr_scale = max_abs(&pack.nabla_ricci);

    if let Some(spec) = model.product() {
        let pp = spec.at(p).map_err(|e| CliError::eval("factor data", e))?;
        let blocks = pp.ricci_blocks();
        out.push(Sample::gated("block_ricci", max_diff(&blocks.full, &pack.ricci), ric_scale));
        for i in [Factor::First, Factor::Second] {
            let t = pp.nabla_ricci_restriction_tensor(i);
            let r = spec.range(i);
            let mut res = 0.0f64;
            for (a, x) in r.clone().enumerate() {
                for (b, y) in r.clone().enumerate() {
                    for (c, z) in r.clone().enumerate() {
                        res = res.max((t[[a, b, c]] - pack.nabla_ricci[[x, y, z]]).abs());
                    }
                }
            }
            let name = format!("restriction_formula[{}]", spec.factor(i).name());
            out.push(Sample::gated(name, res, nr_scale));
        }
    }

    let mut bianchi = 0.0f64;
    for j in 0..n {
        let mut div = 0.0;
        for k in 0..n {
            for i in 0..n {
                div += pack.g_inv[[k, i]] * pack.nabla_ricci[[k, i, j]];
            }
        }
        bianchi = bianchi.max((div - 0.5 * pack.d_scalar[j]).abs());
    }
    out.push(Sample::gated("contracted_bianchi", bianchi, nr_scale));

    if pack.weyl_defined {
        let mut trace = 0.0f64;
        for b in 0..n {
            for d in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for c in 0..n {
                        s += pack.g_inv[[a, c]] * pack.weyl[[a, b, c, d]];
                    }
                }
                trace = trace.max(s.abs());
            }
        }
        out.push(Sample::gated("weyl_tracelessness", trace, max_abs(&pack.weyl)));
        let ratio = (nf - 3.0) / (nf - 2.0);
        let res = pack
            .weyl_div
            .iter()
            .zip(pack.cotton.iter())
            .fold(0.0f64, |m, (w, c)| m.max((w - ratio * c).abs()));
        out.push(Sample::gated("divergence_cotton", res, max_abs(&pack.cotton)));

        let conformal = match (model, split) {
            (Model::Plain { conformal_factor: Some(phi), .. }, _) => {
                Some(conformal_weyl_divergence(metric, phi, p))
            }
            (_, Some((gbar, phi))) => Some(conformal_weyl_divergence(gbar, phi, p)),
            _ => None,
        };
        if let Some(c) = conformal {
            let c = c.map_err(|e| CliError::eval("conformal Weyl divergence", e))?;
            out.push(Sample::gated("conformal_weyl_divergence", c.residual, c.scale));
            out.push(Sample::info("conformal_weyl_divergence.literal", c.literal_residual, c.scale));
        }
    }

    if let Model::Spacetime(st) = model {
        let cmp = compare_spacetime_ricci(st, p, tol.rtol.max(1e-12))
            .map_err(|e| CliError::eval("spacetime Ricci", e))?;
        let scale = max_abs(&cmp.intrinsic.uv);
        for (reading, res) in &cmp.uv_residuals {
            let name = match reading {
                SigmaDiamond::Signed => "spacetime_uv".to_string(),
                SigmaDiamond::Unsigned => "spacetime_uv.unsigned".to_string(),
                SigmaDiamond::UnsignedNPlusOne => "spacetime_uv.unsigned_n_plus_1".to_string(),
            };
            if *reading == SigmaDiamond::Signed {
                out.push(Sample::gated(name, *res, scale));
            } else {
                out.push(Sample::info(name, *res, scale));
            }
        }
        out.push(Sample::gated("spacetime_tu", cmp.tu_residual, max_abs(&cmp.intrinsic.tu)));
        let finding = match cmp.tt_finding {
            TtFinding::Agree => "agree",
            TtFinding::SignFlip => "sign_flip",
            TtFinding::Mismatch => "mismatch",
        };
        let mut s = Sample::info("spacetime_tt", cmp.tt_difference.abs(), cmp.intrinsic.tt.abs());
        s.detail = Some(finding.to_string());
        out.push(s);
    }
    Ok(out)
}

fn theorem_point(
    model: &Model,
    p: &[f64],
    vectors: &[Vec<Vec<f64>>; 2],
) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<Sample>, name: String, t: crate::gray::TheoremResidual| {
        let scale = t
            .lhs
            .abs()
            .max(t.condition_lhs.abs())
            .max(t.factor_deviation.abs());
        if let Some(pr) = t.printed_residual {
            out.push(Sample::info(format!("{name}.printed"), pr, scale));
        }
        out.push(Sample::gated(name, t.residual, scale));
    };
    match model {
        Model::Plain { .. } => {}
        Model::Product(spec) => {
            for i in [Factor::First, Factor::Second] {
                for id in [TheoremId::Th1, TheoremId::Th2, TheoremId::Th3, TheoremId::ThIa] {
                    let t = theorem_residual(id, TheoremTarget::Product(spec, i), p, &vectors[i.index()])
                        .map_err(|e| CliError::eval(id.name(), e))?;
                    push(&mut out, format!("{}[{}]", id.name(), spec.factor(i).name()), t);
                }
            }
        }
        Model::Spacetime(st) => {
            for id in [TheoremId::StA, TheoremId::StB, TheoremId::StP] {
                let t = theorem_residual(id, TheoremTarget::Spacetime(st), p, &vectors[1])
                    .map_err(|e| CliError::eval(id.name(), e))?;
                push(&mut out, id.name().to_string(), t);
            }
        }
    }
    if let Some(spec) = model.product() {
        let s = scalar_identity_residual(spec, p).map_err(|e| CliError::eval("scalar identity", e))?;
        let scale = s.intrinsic_r.abs();
        out.push(Sample::gated("scalar_identity.derived", s.derived_residual, scale));
        out.push(Sample::info("scalar_identity.printed", s.residual, scale));
        out.push(Sample::info("scalar_identity.swapped", s.swapped_residual, scale));
    }
    Ok(out)
}

fn factor_vectors(spec: &ProductSpec, rng: &mut ChaCha8Rng) -> [Vec<Vec<f64>>; 2] {
    let mut one = |i: Factor| -> Vec<Vec<f64>> {
        (0..3)
            .map(|_| {
                let mut v = vec![0.0; spec.dim()];
                for k in spec.range(i) {
                    v[k] = rng.gen_range(-1.0..1.0);
                }
                v
            })
            .collect()
    };
    let a = one(Factor::First);
    let b = one(Factor::Second);
    [a, b]
}

fn collect<T>(results: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    results.into_iter().collect()
}

/// Runs `command` on a manifest given as raw bytes.
pub fn execute(src: &[u8], command: Command, ov: &Overrides) -> Result<Report, CliError> {
    let mut manifest = Manifest::parse(src)?;
    if let Some(c) = ov.samples {
        manifest.sampling.count = c;
    }
    if let Some(s) = ov.seed {
        manifest.sampling.seed = Some(s);
    }
    let mut tol = manifest.tolerances();
    if let Some(a) = ov.atol {
        tol.atol = a;
    }
    if let Some(r) = ov.rtol {
        tol.rtol = r;
    }
    if !(tol.atol >= 0.0 && tol.rtol >= 0.0) {
        return Err(CliError::Field {
            field: "tolerances".into(),
            message: "atol and rtol must be non-negative".into(),
        });
    }
    let model = manifest.model()?;
    let coords: Vec<String> = model.metric().coord_names().to_vec();
    let samples = manifest.sampling.points(&coords)?;

    let mut checks = Vec::new();
    let mut classification = None;
    if matches!(command, Command::Classify | Command::Report) {
        let r = classify(model.metric(), &samples, tol).map_err(|e| CliError::eval("classification", e))?;
        for c in &r.classes {
            checks.push(Check {
                name: format!("class:{}", c.class),
                residual: c.residual,
                tolerance: c.tolerance,
                verdict: match c.verdict {
                    crate::gray::Verdict::Member => CheckVerdict::Member,
                    crate::gray::Verdict::NonMember => CheckVerdict::NonMember,
                    crate::gray::Verdict::Indeterminate => CheckVerdict::Indeterminate,
                },
                detail: None,
            });
        }
        classification = Some(r);
    }
    if matches!(command, Command::Verify | Command::Report) {
        let split = match &model {
            Model::Plain { .. } => None,
            _ => model.product().map(product_conformal_split),
        };
        let per_point = collect(
            samples
                .par_iter()
                .map(|p| verify_point(&model, split.as_ref(), p, tol))
                .collect(),
        )?;
        checks.extend(aggregate(per_point, tol));
    }
    if matches!(command, Command::Theorems | Command::Report) {
        let vectors: Vec<[Vec<Vec<f64>>; 2]> = match model.product() {
            Some(spec) => {
                let mut rng = ChaCha8Rng::seed_from_u64(manifest.sampling.seed.unwrap_or(0) ^ 0x7468_6d73);
                samples.iter().map(|_| factor_vectors(spec, &mut rng)).collect()
            }
            None => samples.iter().map(|_| [Vec::new(), Vec::new()]).collect(),
        };
        let per_point = collect(
            samples
                .par_iter()
                .zip(vectors.par_iter())
                .map(|(p, v)| theorem_point(&model, p, v))
                .collect(),
        )?;
        checks.extend(aggregate(per_point, tol));
    }

    let failed = checks.iter().any(|c| c.verdict == CheckVerdict::Fail);
    Ok(Report {
        tool: "warpcurv",
        version: env!("CARGO_PKG_VERSION"),
        command,
        manifest_sha256: hex::encode(Sha256::digest(src)),
        name: manifest.name.clone(),
        kind: manifest.kind,
        coords,
        tolerances: tol,
        samples,
        checks,
        classification,
        status: if failed { Status::ResidualFailure } else { Status::Ok },
    })
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let (command, flags) = match cli.command {
        CommandArg::Classify(f) => (Command::Classify, f),
        CommandArg::Verify(f) => (Command::Verify, f),
        CommandArg::Theorems(f) => (Command::Theorems, f),
        CommandArg::Report(f) => (Command::Report, f),
    };
    let result = read(&flags.manifest).and_then(|src| execute(&src, command, &flags.overrides));
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let body = match flags.format {
        Format::Json => render_json(&report),
        Format::Text => render_text(&report),
    };
    let written = match &flags.out {
        Some(path) => std::fs::write(path, body.as_bytes()).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        }),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            }),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    report.exit_code()
}
