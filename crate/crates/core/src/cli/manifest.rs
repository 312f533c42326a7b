//! JSON manifests describing a metric, a doubly warped product or a spacetime,
//! together with sampling and tolerance settings.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::expr::ScalarExpr;
use crate::geometry::{MetricField, Signature};
use crate::gray::Tolerances;
use crate::warped::{build_doubly_warped, FactorSpec, ProductSpec, SpacetimeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    PlainMetric,
    DoublyWarped,
    Spacetime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignatureSpec {
    #[default]
    Riemannian,
    Lorentzian,
    Unchecked,
}

impl From<SignatureSpec> for Signature {
    fn from(s: SignatureSpec) -> Signature {
        match s {
            SignatureSpec::Riemannian => Signature::Riemannian,
            SignatureSpec::Lorentzian => Signature::Lorentzian,
            SignatureSpec::Unchecked => Signature::Unchecked,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub coords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<String>>,
    #[serde(default)]
    pub signature: SignatureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorEntry {
    pub name: String,
    pub metric: MetricSpec,
    pub warping: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Grid,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub mode: SamplingMode,
    pub ranges: BTreeMap<String, [f64; 2]>,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub atol: f64,
    pub rtol: f64,
}

/// The manifest document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: Kind,
    /// `plain_metric` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    /// `doubly_warped` only: exactly two entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorEntry>>,
    /// `spacetime` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_coord: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<MetricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warping: Option<String>,
    /// `plain_metric` only: `φ` for the conformal Weyl-divergence check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal_factor: Option<String>,
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
}

/// A validated geometric model.
#[derive(Debug, Clone)]
pub enum Model {
    Plain {
        metric: MetricField,
        conformal_factor: Option<ScalarExpr>,
    },
    Product(ProductSpec),
    Spacetime(SpacetimeSpec),
}

impl Model {
    pub fn metric(&self) -> &MetricField {
        match self {
            Model::Plain { metric, .. } => metric,
            Model::Product(p) => p.assembled(),
            Model::Spacetime(s) => s.product().assembled(),
        }
    }

    /// The product structure, if any; a spacetime is a product whose first
    /// factor is the time line.
    pub fn product(&self) -> Option<&ProductSpec> {
        match self {
            Model::Plain { .. } => None,
            Model::Product(p) => Some(p),
            Model::Spacetime(s) => Some(s.product()),
        }
    }
}

fn field_err(field: impl Into<String>, message: impl std::fmt::Display) -> CliError {
    CliError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

fn build_metric(spec: &MetricSpec, field: &str) -> Result<MetricField, CliError> {
    let sig: Signature = spec.signature.into();
    let m = match (&spec.components, &spec.diagonal) {
        (Some(rows), None) => MetricField::parse(&spec.coords, rows, sig),
        (None, Some(diag)) => {
            let d: Vec<&str> = diag.iter().map(String::as_str).collect();
            MetricField::diagonal(&spec.coords, &d, sig)
        }
        _ => {
            return Err(field_err(
                field,
                "exactly one of `components` or `diagonal` is required",
            ))
        }
    };
    m.map_err(|e| field_err(field, e))
}

fn require<'a, T>(v: &'a Option<T>, field: &str, kind: Kind) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| field_err(field, format!("required for kind {kind:?}")))
}

fn forbid<T>(v: &Option<T>, field: &str, kind: Kind) -> Result<(), CliError> {
    if v.is_some() {
        Err(field_err(field, format!("not allowed for kind {kind:?}")))
    } else {
        Ok(())
    }
}

impl Manifest {
    pub fn parse(src: &[u8]) -> Result<Manifest, CliError> {
        serde_json::from_slice(src).map_err(|e| CliError::Json(e.to_string()))
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let k = self.kind;
        match k {
            Kind::PlainMetric => {
                forbid(&self.factors, "factors", k)?;
                forbid(&self.base, "base", k)?;
                forbid(&self.sigma, "sigma", k)?;
                forbid(&self.time_coord, "time_coord", k)?;
                forbid(&self.warping, "warping", k)?;
                let metric = build_metric(require(&self.metric, "metric", k)?, "metric")?;
                let conformal_factor = self
                    .conformal_factor
                    .as_ref()
                    .map(|s| ScalarExpr::parse(s, metric.coord_names()))
                    .transpose()
                    .map_err(|e| field_err("conformal_factor", e))?;
                Ok(Model::Plain {
                    metric,
                    conformal_factor,
                })
            }
            Kind::DoublyWarped => {
                forbid(&self.metric, "metric", k)?;
                forbid(&self.base, "base", k)?;
                forbid(&self.sigma, "sigma", k)?;
                forbid(&self.time_coord, "time_coord", k)?;
                forbid(&self.warping, "warping", k)?;
                forbid(&self.conformal_factor, "conformal_factor", k)?;
                let fs = require(&self.factors, "factors", k)?;
                if fs.len() != 2 {
                    return Err(field_err("factors", format!("expected 2 factors, got {}", fs.len())));
                }
                let mut built = Vec::with_capacity(2);
                for (i, f) in fs.iter().enumerate() {
                    let field = format!("factors[{i}]");
                    let m = build_metric(&f.metric, &format!("{field}.metric"))?;
                    let spec = FactorSpec::parse(f.name.clone(), m, &f.warping)
                        .map_err(|e| field_err(format!("{field}.warping"), e))?;
                    built.push(spec);
                }
                let f2 = built.pop().expect("two factors");
                let f1 = built.pop().expect("two factors");
                Ok(Model::Product(
                    build_doubly_warped(f1, f2).map_err(|e| field_err("factors", e))?,
                ))
            }
            Kind::Spacetime => {
                forbid(&self.metric, "metric", k)?;
                forbid(&self.factors, "factors", k)?;
                forbid(&self.conformal_factor, "conformal_factor", k)?;
                let base = build_metric(require(&self.base, "base", k)?, "base")?;
                let t = require(&self.time_coord, "time_coord", k)?;
                let sigma = require(&self.sigma, "sigma", k)?;
                let f = require(&self.warping, "warping", k)?;
                let st = SpacetimeSpec::new(t, sigma, base, f).map_err(|e| field_err("spacetime", e))?;
                Ok(Model::Spacetime(st))
            }
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
            .map(|t| Tolerances {
                atol: t.atol,
                rtol: t.rtol,
            })
            .unwrap_or_default()
    }
}

impl Sampling {
    /// Sample points in chart order.
    pub fn points(&self, coords: &[String]) -> Result<Vec<Vec<f64>>, CliError> {
        if self.count == 0 {
            return Err(field_err("sampling.count", "must be positive"));
        }
        for name in self.ranges.keys() {
            if !coords.iter().any(|c| c == name) {
                return Err(field_err(
                    format!("sampling.ranges.{name}"),
                    "not a coordinate of the chart",
                ));
            }
        }
        let mut ranges = Vec::with_capacity(coords.len());
        for c in coords {
            let r = self
                .ranges
                .get(c)
                .ok_or_else(|| field_err(format!("sampling.ranges.{c}"), "missing range"))?;
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                return Err(field_err(format!("sampling.ranges.{c}"), "need finite lo ≤ hi"));
            }
            ranges.push(*r);
        }
        let n = coords.len();
        match self.mode {
            SamplingMode::Grid => {
                let per_axis = ((self.count as f64).powf(1.0 / n as f64).round() as usize).max(1);
                let axes: Vec<Vec<f64>> = ranges
                    .iter()
                    .map(|&[lo, hi]| {
                        let pad = 0.05 * (hi - lo);
                        let (lo, hi) = (lo + pad, hi - pad);
                        if per_axis == 1 {
                            vec![0.5 * (lo + hi)]
                        } else {
                            (0..per_axis)
                                .map(|k| lo + (hi - lo) * k as f64 / (per_axis - 1) as f64)
                                .collect()
                        }
                    })
                    .collect();
                let total = per_axis.pow(n as u32);
                Ok((0..total)
                    .map(|mut idx| {
                        let mut p = vec![0.0; n];
                        for d in (0..n).rev() {
                            p[d] = axes[d][idx % per_axis];
                            idx /= per_axis;
                        }
                        p
                    })
                    .collect())
            }
            SamplingMode::Random => {
                let seed = self
                    .seed
                    .ok_or_else(|| field_err("sampling.seed", "required when mode = random"))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..self.count)
                    .map(|_| {
                        ranges
                            .iter()
                            .map(|&[lo, hi]| if lo == hi { lo } else { rng.gen_range(lo..hi) })
                            .collect()
                    })
                    .collect())
            }
        }
    }
}
