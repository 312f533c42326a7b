//! Doubly warped products `f₂² g₁ ⊕ f₁² g₂` and doubly warped spacetimes
//! `−f² dt² ⊕ σ² g`, with their block curvature formulas evaluated from
//! factor-intrinsic data only.
//!
//! A spacetime is handled as the product whose first factor is the time line
//! with metric `−dt²` and warping `σ`, and whose second factor is the base
//! with warping `f`. Applying the factor quantities with the sign of `−dt²`
//! (so `Δσ = −σ̈` and `|∇σ|² = −σ̇²`) makes every product formula valid on the
//! Lorentzian side as well.

use std::sync::Arc;

use ndarray::{Array1, Array2, Array3};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{ExprError, Node, ScalarExpr};
use crate::geometry::{CurvaturePack, GeometryError, LocalGeometry, MetricField, Signature};
use crate::jet::Jet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WarpedError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("coordinate `{name}` appears in both factors")]
    CoordinateCollision { name: String },
    #[error("warping of factor `{factor}` is not expressed on that factor's chart")]
    WarpingChart { factor: String },
    #[error("vector has {got} components, expected {expected}")]
    VectorLength { expected: usize, got: usize },
    #[error("vector is not tangent to factor {factor}: component {index} is {value}")]
    NotTangent {
        factor: usize,
        index: usize,
        value: f64,
    },
    #[error("time factor must be one-dimensional, got chart {0:?}")]
    TimeChart(Vec<String>),
}

/// One of the two factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Factor {
    First,
    Second,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::First => Factor::Second,
            Factor::Second => Factor::First,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Factor::First => 0,
            Factor::Second => 1,
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }
}

/// A factor manifold `(M_i, g_i)` with its warping function `f_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSpec {
    name: String,
    metric: MetricField,
    warping: ScalarExpr,
}

impl FactorSpec {
    pub fn new(
        name: impl Into<String>,
        metric: MetricField,
        warping: ScalarExpr,
    ) -> Result<FactorSpec, WarpedError> {
        let name = name.into();
        if warping.coord_names() != metric.coord_names() {
            return Err(WarpedError::WarpingChart { factor: name });
        }
        let metric = metric.require_positive(warping.clone());
        Ok(FactorSpec {
            name,
            metric,
            warping,
        })
    }

    /// Parses the warping expression on the metric's chart.
    pub fn parse(
        name: impl Into<String>,
        metric: MetricField,
        warping: &str,
    ) -> Result<FactorSpec, WarpedError> {
        let w = ScalarExpr::parse(warping, metric.coord_names())?;
        FactorSpec::new(name, metric, w)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn warping(&self) -> &ScalarExpr {
        &self.warping
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

/// A doubly warped product and its assembled metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpec {
    factors: [FactorSpec; 2],
    assembled: MetricField,
}

fn is_one(e: &ScalarExpr) -> bool {
    matches!(e.root(), Node::Num(v) if *v == 1.0)
}

/// Assembles `f₂² g₁ ⊕ f₁² g₂` on the concatenated chart.
pub fn build_doubly_warped(f1: FactorSpec, f2: FactorSpec) -> Result<ProductSpec, WarpedError> {
    for name in f1.metric.coord_names().iter() {
        if f2.metric.coord_names().iter().any(|m| m == name) {
            return Err(WarpedError::CoordinateCollision { name: name.clone() });
        }
    }
    let n1 = f1.dim();
    let n2 = f2.dim();
    let n = n1 + n2;
    let chart: Arc<[String]> = f1
        .metric
        .coord_names()
        .iter()
        .chain(f2.metric.coord_names().iter())
        .cloned()
        .collect();
    let zero = ScalarExpr::constant(0.0, chart.clone());
    let w1 = f1.warping.embed(&chart, 0);
    let w2 = f2.warping.embed(&chart, n1);
    let scale = |w: &ScalarExpr, c: ScalarExpr| {
        if c.is_zero_literal() || is_one(w) {
            c
        } else {
            w.powi(2).mul(&c)
        }
    };
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let e = if j < n1 {
                scale(&f2.warping.embed(&chart, n1), f1.metric.component(i, j).embed(&chart, 0))
            } else if i >= n1 {
                scale(
                    &f1.warping.embed(&chart, 0),
                    f2.metric.component(i - n1, j - n1).embed(&chart, n1),
                )
            } else {
                zero.clone()
            };
            upper.push(e);
        }
    }
    let signature = match (f1.metric.signature(), f2.metric.signature()) {
        (Signature::Riemannian, Signature::Riemannian) => Signature::Riemannian,
        (Signature::Lorentzian, Signature::Riemannian)
        | (Signature::Riemannian, Signature::Lorentzian) => Signature::Lorentzian,
        _ => Signature::Unchecked,
    };
    let mut guards = vec![w1, w2];
    guards.extend(f1.metric.positivity_guards().iter().map(|g| g.embed(&chart, 0)));
    guards.extend(f2.metric.positivity_guards().iter().map(|g| g.embed(&chart, n1)));
    let assembled = MetricField::from_parts(chart, upper, signature, guards);
    Ok(ProductSpec {
        factors: [f1, f2],
        assembled,
    })
}

impl ProductSpec {
    pub fn factor(&self, i: Factor) -> &FactorSpec {
        &self.factors[i.index()]
    }

    pub fn assembled(&self) -> &MetricField {
        &self.assembled
    }

    pub fn dim(&self) -> usize {
        self.assembled.dim()
    }

    /// Index range of factor `i` inside the product chart.
    pub fn range(&self, i: Factor) -> std::ops::Range<usize> {
        let n1 = self.factors[0].dim();
        match i {
            Factor::First => 0..n1,
            Factor::Second => n1..self.dim(),
        }
    }

    /// The coordinates of factor `i` within a product point.
    pub fn split<'a>(&self, point: &'a [f64], i: Factor) -> &'a [f64] {
        &point[self.range(i)]
    }

    /// Restricts a product-chart vector to factor `i`, rejecting any component
    /// along the other factor.
    pub fn restrict_vector(&self, v: &[f64], i: Factor) -> Result<Vec<f64>, WarpedError> {
        if v.len() != self.dim() {
            return Err(WarpedError::VectorLength {
                expected: self.dim(),
                got: v.len(),
            });
        }
        for idx in self.range(i.other()) {
            if v[idx] != 0.0 {
                return Err(WarpedError::NotTangent {
                    factor: i.number(),
                    index: idx,
                    value: v[idx],
                });
            }
        }
        Ok(v[self.range(i)].to_vec())
    }

    /// Factor-intrinsic data at a product point.
    pub fn at(&self, point: &[f64]) -> Result<ProductPoint, WarpedError> {
        if point.len() != self.dim() {
            return Err(GeometryError::PointLength {
                expected: self.dim(),
                got: point.len(),
            }
            .into());
        }
        let n = self.dim();
        let n1 = self.factors[0].dim();
        let n2 = self.factors[1].dim();
        let d1 = FactorData::new(&self.factors[0], &point[..n1], n2)?;
        let d2 = FactorData::new(&self.factors[1], &point[n1..], n1)?;
        Ok(ProductPoint {
            point: point.to_vec(),
            n,
            data: [d1, d2],
        })
    }
}

/// Everything about one factor needed by the block formulas, evaluated on
/// that factor alone.
#[derive(Debug, Clone, Serialize)]
pub struct FactorData {
    /// Dimension of this factor.
    pub n_i: usize,
    /// Dimension of the other factor.
    pub n_j: usize,
    pub pack: CurvaturePack,
    /// `f_i`.
    pub f: f64,
    /// `∂f_i`.
    pub df: Array1<f64>,
    /// `g_i(∇f_i, ∇f_i)`.
    pub grad_norm2: f64,
    pub laplacian: f64,
    /// `H^{f_i}`.
    pub hessian: Array2<f64>,
    /// `f_i^◇ = f_i Δf_i + (n_j − 1) g_i(∇f_i, ∇f_i)`.
    pub diamond: f64,
    /// `𝓕^i = (n_j / f_i) H^{f_i}`.
    pub f_tensor: Array2<f64>,
    /// `(D^i_k 𝓕^i)_{ab}`, indexed `[k, a, b]`.
    pub d_f_tensor: Array3<f64>,
}

impl FactorData {
    fn new(
        spec: &FactorSpec,
        point: &[f64],
        n_j: usize,
    ) -> Result<FactorData, WarpedError> {
        let geom = LocalGeometry::new(&spec.metric, point)?;
        let n_i = spec.dim();
        let fjet = spec.warping.eval_jet(point, 3)?;
        let sf = geom.scalar_field_from_jet(&fjet);
        let h = geom.hessian_jets(&fjet);
        let inv_f = fjet.truncate(1).recip().map_err(ExprError::from)?;
        let ftens_jets: Vec<Jet> = h
            .iter()
            .map(|hj| hj.mul(&inv_f).map(|p| p.scale(n_j as f64)))
            .collect::<Result<_, _>>()
            .map_err(ExprError::from)?;
        let d_f_tensor = geom.covariant_derivative_2tensor(&ftens_jets);
        let f = fjet.value();
        let f_tensor = sf.hessian.mapv(|v| v * n_j as f64 / f);
        let diamond = f * sf.laplacian + (n_j as f64 - 1.0) * sf.grad_norm2;
        Ok(FactorData {
            n_i,
            n_j,
            pack: geom.pack(),
            f,
            df: sf.differential,
            grad_norm2: sf.grad_norm2,
            laplacian: sf.laplacian,
            hessian: sf.hessian,
            diamond,
            f_tensor,
            d_f_tensor,
        })
    }
}

/// Both factors' data at one product point.
#[derive(Debug, Clone, Serialize)]
pub struct ProductPoint {
    pub point: Vec<f64>,
    pub n: usize,
    pub data: [FactorData; 2],
}

/// Ricci tensor of the product assembled from the block formulas.
#[derive(Debug, Clone, Serialize)]
pub struct RicciBlocks {
    /// `Ric(X₁, Y₁)`, `n₁ × n₁`.
    pub block11: Array2<f64>,
    /// `Ric(X₂, Y₂)`, `n₂ × n₂`.
    pub block22: Array2<f64>,
    /// `Ric(X₁, Y₂)`, `n₁ × n₂`.
    pub mixed: Array2<f64>,
    /// The blocks placed into the full `n × n` matrix.
    pub full: Array2<f64>,
}

impl ProductPoint {
    pub fn factor(&self, i: Factor) -> &FactorData {
        &self.data[i.index()]
    }

    /// `Ric^i − 𝓕^i − (f_j^◇ / f_i²) g_i`.
    pub fn ricci_block(&self, i: Factor) -> Array2<f64> {
        let a = self.factor(i);
        let b = self.factor(i.other());
        let c = b.diamond / (a.f * a.f);
        &a.pack.ricci - &a.f_tensor - &a.pack.g.mapv(|v| c * v)
    }

    /// `(n − 2) ∂_a ln f₁ ∂_c ln f₂`.
    pub fn mixed_block(&self) -> Array2<f64> {
        let a = &self.data[0];
        let b = &self.data[1];
        let k = self.n as f64 - 2.0;
        Array2::from_shape_fn((a.n_i, b.n_i), |(p, q)| k * (a.df[p] / a.f) * (b.df[q] / b.f))
    }

    pub fn ricci_blocks(&self) -> RicciBlocks {
        let block11 = self.ricci_block(Factor::First);
        let block22 = self.ricci_block(Factor::Second);
        let mixed = self.mixed_block();
        let n1 = block11.nrows();
        let n = self.n;
        let mut full = Array2::zeros((n, n));
        for p in 0..n {
            for q in 0..n {
                full[[p, q]] = match (p < n1, q < n1) {
                    (true, true) => block11[[p, q]],
                    (false, false) => block22[[p - n1, q - n1]],
                    (true, false) => mixed[[p, q - n1]],
                    (false, true) => mixed[[q, p - n1]],
                };
            }
        }
        RicciBlocks {
            block11,
            block22,
            mixed,
            full,
        }
    }

    /// The correction tensor `K` with
    /// `(D_X Ric)(Y, Z) = (D^i_X Ric^i)(Y, Z) − K(X, Y, Z)` for factor-tangent
    /// `X, Y, Z`:
    ///
    /// `K = (D^i_X 𝓕^i)(Y, Z) − 2 (f_j^◇ / f_i³) X(f_i) g_i(Y, Z)
    ///      − ((n − 2) / f_i³) [g_i(X, Y) Z(f_i) + g_i(X, Z) Y(f_i)] |∇f_j|²`.
    pub fn correction_tensor(&self, i: Factor) -> Array3<f64> {
        let a = self.factor(i);
        let b = self.factor(i.other());
        let f3 = a.f.powi(3);
        let c1 = 2.0 * b.diamond / f3;
        let c2 = (self.n as f64 - 2.0) * b.grad_norm2 / f3;
        let g = &a.pack.g;
        let df = &a.df;
        Array3::from_shape_fn((a.n_i, a.n_i, a.n_i), |(x, y, z)| {
            a.d_f_tensor[[x, y, z]]
                - c1 * df[x] * g[[y, z]]
                - c2 * (g[[x, y]] * df[z] + g[[x, z]] * df[y])
        })
    }

    /// `(D_X Ric)(Y, Z)` on factor-`i` slots from factor data alone,
    /// indexed `[x, y, z]`.
    pub fn nabla_ricci_restriction_tensor(&self, i: Factor) -> Array3<f64> {
        &self.factor(i).pack.nabla_ricci - &self.correction_tensor(i)
    }
}

/// Contracts `t[[a, b, c]] X^a Y^b Z^c`.
pub fn contract3(t: &Array3<f64>, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, &xa) in x.iter().enumerate() {
        if xa == 0.0 {
            continue;
        }
        for (b, &yb) in y.iter().enumerate() {
            if yb == 0.0 {
                continue;
            }
            for (c, &zc) in z.iter().enumerate() {
                acc += xa * yb * zc * t[[a, b, c]];
            }
        }
    }
    acc
}

/// `f_i^◇` at a point of factor `i`.
pub fn f_diamond(spec: &ProductSpec, i: Factor, point_i: &[f64]) -> Result<f64, WarpedError> {
    let f = spec.factor(i);
    let geom = LocalGeometry::new(f.metric(), point_i)?;
    let d = geom.scalar_field(f.warping())?;
    let n_j = spec.factor(i.other()).dim() as f64;
    Ok(d.value * d.laplacian + (n_j - 1.0) * d.grad_norm2)
}

/// `𝓕^i = (n_j / f_i) H^{f_i}` at a point of factor `i`.
pub fn f_tensor(spec: &ProductSpec, i: Factor, point_i: &[f64]) -> Result<Array2<f64>, WarpedError> {
    let f = spec.factor(i);
    let geom = LocalGeometry::new(f.metric(), point_i)?;
    let d = geom.scalar_field(f.warping())?;
    let n_j = spec.factor(i.other()).dim() as f64;
    Ok(d.hessian.mapv(|v| v * n_j / d.value))
}

pub fn product_ricci_blocks(spec: &ProductSpec, point: &[f64]) -> Result<RicciBlocks, WarpedError> {
    Ok(spec.at(point)?.ricci_blocks())
}

/// `(D_X Ric)(Y, Z)` for vectors tangent to factor `i`, given in the product
/// chart, evaluated by the restriction formula.
pub fn nabla_ricci_restriction(
    spec: &ProductSpec,
    i: Factor,
    point: &[f64],
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<f64, WarpedError> {
    let (x, y, z) = (
        spec.restrict_vector(x, i)?,
        spec.restrict_vector(y, i)?,
        spec.restrict_vector(z, i)?,
    );
    let t = spec.at(point)?.nabla_ricci_restriction_tensor(i);
    Ok(contract3(&t, &x, &y, &z))
}

/// A doubly warped spacetime `−f² dt² ⊕ σ² g` over a Riemannian base.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeSpec {
    sigma: ScalarExpr,
    f: ScalarExpr,
    product: ProductSpec,
}

impl SpacetimeSpec {
    /// `sigma` lives on the one-coordinate chart `[time_coord]`; `f` on the
    /// base chart.
    pub fn new(
        time_coord: &str,
        sigma: &str,
        base: MetricField,
        f: &str,
    ) -> Result<SpacetimeSpec, WarpedError> {
        let time = MetricField::diagonal(&[time_coord], &["-1"], Signature::Lorentzian)?;
        let sigma = ScalarExpr::parse(sigma, time.coord_names())?;
        let f = ScalarExpr::parse(f, base.coord_names())?;
        SpacetimeSpec::from_parts(time, sigma, base, f)
    }

    pub fn from_parts(
        time: MetricField,
        sigma: ScalarExpr,
        base: MetricField,
        f: ScalarExpr,
    ) -> Result<SpacetimeSpec, WarpedError> {
        if time.dim() != 1 {
            return Err(WarpedError::TimeChart(time.coord_names().to_vec()));
        }
        let i = FactorSpec::new("I", time, sigma.clone())?;
        let m = FactorSpec::new("M", base, f.clone())?;
        let product = build_doubly_warped(i, m)?;
        Ok(SpacetimeSpec { sigma, f, product })
    }

    pub fn sigma(&self) -> &ScalarExpr {
        &self.sigma
    }

    pub fn f(&self) -> &ScalarExpr {
        &self.f
    }

    pub fn base(&self) -> &MetricField {
        self.product.factor(Factor::Second).metric()
    }

    /// The spacetime as a doubly warped product: first factor the time line,
    /// second factor the base.
    pub fn product(&self) -> &ProductSpec {
        &self.product
    }

    /// Dimension of the base.
    pub fn base_dim(&self) -> usize {
        self.base().dim()
    }
}

/// The assembled Lorentzian metric.
pub fn build_spacetime(s: &SpacetimeSpec) -> MetricField {
    s.product.assembled().clone()
}

/// How `σ^◇` is evaluated on the time line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaDiamond {
    /// Notation-4 with the factor metric `−dt²`: `−σσ̈ − (n−1)σ̇²`.
    Signed,
    /// `σσ̈ + (n−1)σ̇²`.
    Unsigned,
    /// `σσ̈ + nσ̇²`.
    UnsignedNPlusOne,
}

impl SigmaDiamond {
    pub const ALL: [SigmaDiamond; 3] = [
        SigmaDiamond::Signed,
        SigmaDiamond::Unsigned,
        SigmaDiamond::UnsignedNPlusOne,
    ];
}

/// Ricci components of a spacetime split along `∂t` and the base.
#[derive(Debug, Clone, Serialize)]
pub struct SpacetimeBlocks {
    pub tt: f64,
    pub uv: Array2<f64>,
    pub tu: Array1<f64>,
}

/// Time-line quantities at a point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeData {
    pub sigma: f64,
    pub sigma_dot: f64,
    pub sigma_ddot: f64,
}

impl TimeData {
    pub fn diamond(&self, n: usize, reading: SigmaDiamond) -> f64 {
        let n = n as f64;
        let (s, d, dd) = (self.sigma, self.sigma_dot, self.sigma_ddot);
        match reading {
            SigmaDiamond::Signed => -s * dd - (n - 1.0) * d * d,
            SigmaDiamond::Unsigned => s * dd + (n - 1.0) * d * d,
            SigmaDiamond::UnsignedNPlusOne => s * dd + n * d * d,
        }
    }
}

impl SpacetimeSpec {
    pub fn time_data(&self, point: &[f64]) -> Result<TimeData, WarpedError> {
        let j = self.sigma.eval_jet(&point[..1], 2)?;
        Ok(TimeData {
            sigma: j.value(),
            sigma_dot: j.d1(0),
            sigma_ddot: j.partial(&[2]).map_err(ExprError::from)?,
        })
    }
}

/// The printed spacetime Ricci formulas
/// `Ric(∂t,∂t) = (n/σ)σ̈ + f^◇/σ²`, `Ric(U,V) = Ric − (1/f)H^f − (σ^◇/f²)g`,
/// `Ric(∂t,U) = (n−1)(σ̇/σ)U(ln f)`, with `f^◇ = fΔf` and `σ^◇` per `reading`.
pub fn spacetime_ricci_blocks(
    s: &SpacetimeSpec,
    point: &[f64],
    reading: SigmaDiamond,
) -> Result<SpacetimeBlocks, WarpedError> {
    let pp = s.product.at(point)?;
    let t = s.time_data(point)?;
    Ok(printed_blocks(&pp, &t, reading))
}

fn printed_blocks(pp: &ProductPoint, t: &TimeData, reading: SigmaDiamond) -> SpacetimeBlocks {
    let m = pp.factor(Factor::Second);
    let n = m.n_i;
    let nf = n as f64;
    let f_diamond = m.f * m.laplacian;
    let tt = nf / t.sigma * t.sigma_ddot + f_diamond / (t.sigma * t.sigma);
    let sd = t.diamond(n, reading);
    let uv = Array2::from_shape_fn((n, n), |(a, b)| {
        m.pack.ricci[[a, b]] - m.hessian[[a, b]] / m.f - sd / (m.f * m.f) * m.pack.g[[a, b]]
    });
    let tu = Array1::from_shape_fn(n, |a| (nf - 1.0) * t.sigma_dot / t.sigma * m.df[a] / m.f);
    SpacetimeBlocks { tt, uv, tu }
}

/// Outcome of comparing the printed `Ric(∂t,∂t)` with the intrinsic value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TtFinding {
    Agree,
    SignFlip,
    Mismatch,
}

/// Printed spacetime blocks against the intrinsic Lorentzian Ricci tensor.
#[derive(Debug, Clone, Serialize)]
pub struct SpacetimeComparison {
    pub intrinsic: SpacetimeBlocks,
    /// Printed blocks under the signed `σ^◇`.
    pub printed: SpacetimeBlocks,
    /// Max `(U,V)`-block residual for each `σ^◇` reading.
    pub uv_residuals: Vec<(SigmaDiamond, f64)>,
    pub tu_residual: f64,
    pub tt_difference: f64,
    pub tt_sum: f64,
    pub tt_finding: TtFinding,
}

/// Compares printed and intrinsic blocks; `tol` decides the `tt` finding.
pub fn compare_spacetime_ricci(
    s: &SpacetimeSpec,
    point: &[f64],
    tol: f64,
) -> Result<SpacetimeComparison, WarpedError> {
    let pp = s.product.at(point)?;
    let t = s.time_data(point)?;
    let pack = LocalGeometry::new(s.product.assembled(), point)?.pack();
    let n = s.base_dim();
    let intrinsic = SpacetimeBlocks {
        tt: pack.ricci[[0, 0]],
        uv: Array2::from_shape_fn((n, n), |(a, b)| pack.ricci[[a + 1, b + 1]]),
        tu: Array1::from_shape_fn(n, |a| pack.ricci[[0, a + 1]]),
    };
    let max_diff = |a: &Array2<f64>, b: &Array2<f64>| {
        a.iter()
            .zip(b.iter())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let uv_residuals = SigmaDiamond::ALL
        .iter()
        .map(|&r| (r, max_diff(&printed_blocks(&pp, &t, r).uv, &intrinsic.uv)))
        .collect();
    let printed = printed_blocks(&pp, &t, SigmaDiamond::Signed);
    let tu_residual = printed
        .tu
        .iter()
        .zip(intrinsic.tu.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let tt_difference = printed.tt - intrinsic.tt;
    let tt_sum = printed.tt + intrinsic.tt;
    let scale = tol * printed.tt.abs().max(intrinsic.tt.abs()).max(1.0);
    let tt_finding = if tt_difference.abs() <= scale {
        TtFinding::Agree
    } else if tt_sum.abs() <= scale {
        TtFinding::SignFlip
    } else {
        TtFinding::Mismatch
    };
    Ok(SpacetimeComparison {
        intrinsic,
        printed,
        uv_residuals,
        tu_residual,
        tt_difference,
        tt_sum,
        tt_finding,
    })
}
