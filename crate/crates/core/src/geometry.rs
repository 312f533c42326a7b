//! Intrinsic curvature of a metric given on a single chart.
//!
//! Every object is obtained from the order-3 Taylor jets of the metric
//! components at the evaluation point, so derivatives are exact to roundoff.
//! Conventions:
//!
//! * `gamma[[k, i, j]] = Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`
//! * `riemann[[l, i, j, k]] = R^l_{ijk} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}`
//!   (antisymmetric in `i, j`)
//! * `ricci[[j, k]] = R^i_{ijk}`, so the unit sphere has `R = +2`
//! * `nabla_ricci[[k, i, j]] = ∇_k R_{ij}`
//! * `weyl[[a, b, c, d]] = C_{abcd}`, all indices lowered, with the usual
//!   symmetries (antisymmetric in `ab` and in `cd`, pair-symmetric) and
//!   `g^{ac} C_{abcd} = 0`; defined as zero for `n ≤ 3`
//! * `cotton[[i, j, k]] = ∇_k R_{ij} − ∇_i R_{kj} − (∂_k R g_{ij} − ∂_i R g_{kj}) / (2(n−1))`
//! * `weyl_div[[i, j, k]] = g^{ae} ∇_e C_{ajki}`, normalised so that
//!   `weyl_div = (n−3)/(n−2) · cotton`

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Array3, Array4};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{validate_coord_names, ExprError, ScalarExpr};
use crate::jet::{layout, Jet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("metric is singular at {point:?} (det = {det:e})")]
    Singular { point: Vec<f64>, det: f64 },
    #[error("metric at {point:?} has {found} negative directions, declared {expected}")]
    Signature {
        point: Vec<f64>,
        expected: Signature,
        found: usize,
    },
    #[error("component ({i}, {j}) differs from ({j}, {i})")]
    NotSymmetric { i: usize, j: usize },
    #[error("expected a {expected}×{expected} component matrix")]
    Shape { expected: usize },
    #[error("`{expr}` must be positive but is {value} at {point:?}")]
    NotPositive {
        expr: String,
        value: f64,
        point: Vec<f64>,
    },
    #[error("point has {got} coordinates, chart has {expected}")]
    PointLength { expected: usize, got: usize },
}

/// Declared sign pattern of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    /// All eigenvalues positive.
    Riemannian,
    /// Exactly one negative eigenvalue.
    Lorentzian,
    /// No check performed.
    Unchecked,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Signature::Riemannian => "riemannian",
            Signature::Lorentzian => "lorentzian",
            Signature::Unchecked => "unchecked",
        })
    }
}

impl Signature {
    fn admits(self, negatives: usize) -> bool {
        match self {
            Signature::Riemannian => negatives == 0,
            Signature::Lorentzian => negatives == 1,
            Signature::Unchecked => true,
        }
    }
}

/// Metric components as closed-form expressions on one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    coords: Arc<[String]>,
    /// Upper triangle, row-major.
    upper: Vec<ScalarExpr>,
    signature: Signature,
    /// Expressions that must be positive wherever the metric is evaluated.
    positive: Vec<ScalarExpr>,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricField {
    /// Builds a metric from a full symmetric component matrix.
    pub fn new(
        coords: Arc<[String]>,
        components: Vec<Vec<ScalarExpr>>,
        signature: Signature,
    ) -> Result<MetricField, GeometryError> {
        validate_coord_names(&coords)?;
        let n = coords.len();
        if components.len() != n || components.iter().any(|r| r.len() != n) {
            return Err(GeometryError::Shape { expected: n });
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                if components[i][j] != components[j][i] {
                    return Err(GeometryError::NotSymmetric { i, j });
                }
                let c = &components[i][j];
                assert!(
                    c.coord_names() == &coords,
                    "component expression is over a different chart"
                );
                upper.push(c.clone());
            }
        }
        Ok(MetricField {
            coords,
            upper,
            signature,
            positive: Vec::new(),
        })
    }

    /// Parses a full component matrix of expression strings.
    pub fn parse<S: AsRef<str>>(
        coords: &[S],
        rows: &[Vec<String>],
        signature: Signature,
    ) -> Result<MetricField, GeometryError> {
        validate_coord_names(coords)?;
        let chart: Arc<[String]> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        let n = chart.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(GeometryError::Shape { expected: n });
        }
        let comps = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| ScalarExpr::parse(s, &chart).map(|e| e.embed(&chart, 0)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        MetricField::new(chart, comps, signature)
    }

    /// Parses a diagonal metric.
    pub fn diagonal<S: AsRef<str>>(
        coords: &[S],
        diag: &[&str],
        signature: Signature,
    ) -> Result<MetricField, GeometryError> {
        let n = coords.len();
        if diag.len() != n {
            return Err(GeometryError::Shape { expected: n });
        }
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i].to_string() } else { "0".to_string() })
                    .collect()
            })
            .collect();
        MetricField::parse(coords, &rows, signature)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_names(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn with_signature(mut self, signature: Signature) -> MetricField {
        self.signature = signature;
        self
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.upper[upper_index(self.dim(), i, j)]
    }

    /// Adds a positivity requirement checked at every evaluation.
    pub fn require_positive(mut self, expr: ScalarExpr) -> MetricField {
        assert!(expr.coord_names() == &self.coords);
        self.positive.push(expr);
        self
    }

    pub fn positivity_guards(&self) -> &[ScalarExpr] {
        &self.positive
    }

    pub(crate) fn from_parts(
        coords: Arc<[String]>,
        upper: Vec<ScalarExpr>,
        signature: Signature,
        positive: Vec<ScalarExpr>,
    ) -> MetricField {
        debug_assert_eq!(upper.len(), coords.len() * (coords.len() + 1) / 2);
        MetricField {
            coords,
            upper,
            signature,
            positive,
        }
    }

    pub(crate) fn upper(&self) -> &[ScalarExpr] {
        &self.upper
    }

    /// Component values at a point.
    pub fn values(&self, point: &[f64]) -> Result<Array2<f64>, GeometryError> {
        self.check_point(point)?;
        let n = self.dim();
        let mut g = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = self.component(i, j).eval(point)?;
                g[[i, j]] = v;
                g[[j, i]] = v;
            }
        }
        Ok(g)
    }

    fn check_point(&self, point: &[f64]) -> Result<(), GeometryError> {
        if point.len() != self.dim() {
            Err(GeometryError::PointLength {
                expected: self.dim(),
                got: point.len(),
            })
        } else {
            Ok(())
        }
    }

    fn check_positive(&self, point: &[f64]) -> Result<(), GeometryError> {
        for e in &self.positive {
            let value = e.eval(point)?;
            if value <= 0.0 {
                return Err(GeometryError::NotPositive {
                    expr: e.to_string(),
                    value,
                    point: point.to_vec(),
                });
            }
        }
        Ok(())
    }
}

/// Metric, inverse and determinant at a point.
#[derive(Debug, Clone, Serialize)]
pub struct MetricValues {
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub det: f64,
}

/// Evaluates and inverts the metric, checking nondegeneracy and signature.
pub fn metric_eval(m: &MetricField, point: &[f64]) -> Result<MetricValues, GeometryError> {
    let g = m.values(point)?;
    m.check_positive(point)?;
    invert_checked(m.signature(), &g, point)
}

fn invert_checked(
    signature: Signature,
    g: &Array2<f64>,
    point: &[f64],
) -> Result<MetricValues, GeometryError> {
    let n = g.nrows();
    let mat = DMatrix::from_fn(n, n, |i, j| g[[i, j]]);
    let lu = mat.clone().lu();
    let det = lu.determinant();
    let scale = g.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if !det.is_finite() || det.abs() < 1e-12 * scale.powi(n as i32) || scale == 0.0 {
        return Err(GeometryError::Singular {
            point: point.to_vec(),
            det,
        });
    }
    let inv = lu.try_inverse().ok_or_else(|| GeometryError::Singular {
        point: point.to_vec(),
        det,
    })?;
    if signature != Signature::Unchecked {
        let negatives = SymmetricEigen::new(mat)
            .eigenvalues
            .iter()
            .filter(|&&e| e < 0.0)
            .count();
        if !signature.admits(negatives) {
            return Err(GeometryError::Signature {
                point: point.to_vec(),
                expected: signature,
                found: negatives,
            });
        }
    }
    let mut g_inv = Array2::from_shape_fn((n, n), |(i, j)| inv[(i, j)]);
    // symmetrise away LU roundoff
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (g_inv[[i, j]] + g_inv[[j, i]]);
            g_inv[[i, j]] = v;
            g_inv[[j, i]] = v;
        }
    }
    Ok(MetricValues {
        g: g.clone(),
        g_inv,
        det,
    })
}

/// All curvature objects at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvaturePack {
    pub point: Vec<f64>,
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub gamma: Array3<f64>,
    pub riemann: Array4<f64>,
    pub ricci: Array2<f64>,
    pub scalar: f64,
    /// `∂_k R`.
    pub d_scalar: Array1<f64>,
    pub nabla_ricci: Array3<f64>,
    pub weyl: Array4<f64>,
    pub cotton: Array3<f64>,
    pub weyl_div: Array3<f64>,
    /// False for `n ≤ 3`, where the Weyl tensor is identically zero.
    pub weyl_defined: bool,
}

impl CurvaturePack {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }
}

/// First and second covariant derivatives of a scalar field.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarFieldDerivatives {
    pub value: f64,
    /// `∂_k f`.
    pub differential: Array1<f64>,
    /// `(∇f)^k = g^{kl} ∂_l f`.
    pub grad: Array1<f64>,
    /// `H^f_{ij} = ∂_i∂_j f − Γ^k_{ij} ∂_k f`.
    pub hessian: Array2<f64>,
    pub laplacian: f64,
    /// `g(∇f, ∇f)`.
    pub grad_norm2: f64,
}

#[inline]
fn i3(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

#[inline]
fn i4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

/// Jet-valued geometric fields at one point, from which every curvature
/// object and every covariant derivative used elsewhere is assembled.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    point: Vec<f64>,
    values: MetricValues,
    /// Order-3 metric jets, `n × n`.
    g: Vec<Jet>,
    /// Order-2 Christoffel jets, `[k, i, j]`.
    gamma: Vec<Jet>,
    /// Order-1 Riemann jets, `[l, i, j, k]`.
    riemann: Vec<Jet>,
    /// Order-1 Ricci jets.
    ricci: Vec<Jet>,
    /// Order-1 scalar curvature jet.
    scalar: Jet,
}

impl LocalGeometry {
    pub fn new(m: &MetricField, point: &[f64]) -> Result<LocalGeometry, GeometryError> {
        m.check_point(point)?;
        m.check_positive(point)?;
        let n = m.dim();
        let mut g = vec![Jet::constant_unchecked(0.0, layout(n, 3)); n * n];
        for i in 0..n {
            for j in i..n {
                let jet = m.component(i, j).eval_jet(point, 3)?;
                g[i * n + j] = jet.clone();
                g[j * n + i] = jet;
            }
        }
        let g0 = Array2::from_shape_fn((n, n), |(i, j)| g[i * n + j].value());
        let values = invert_checked(m.signature(), &g0, point)?;

        let l2 = layout(n, 2);
        let zero2 = Jet::constant_unchecked(0.0, l2.clone());

        // g⁻¹ = (I − M + M²) A with A = g(p)⁻¹ and M = A (g − g(p)); M has no
        // constant term so the series terminates at order 2.
        let a = &values.g_inv;
        let mut m_mat = vec![zero2.clone(); n * n];
        for i in 0..n {
            for k in 0..n {
                let mut acc = zero2.clone();
                for j in 0..n {
                    let mut nj = g[j * n + k].truncate(2);
                    nj.coeffs_mut()[0] = 0.0;
                    acc.axpy(a[[i, j]], &nj);
                }
                m_mat[i * n + k] = acc;
            }
        }
        let mut m2 = vec![zero2.clone(); n * n];
        for i in 0..n {
            for k in 0..n {
                let mut acc = zero2.clone();
                for j in 0..n {
                    acc.add_product(&m_mat[i * n + j], &m_mat[j * n + k]);
                }
                m2[i * n + k] = acc;
            }
        }
        let mut g_inv = vec![zero2.clone(); n * n];
        for i in 0..n {
            for k in 0..n {
                let mut acc = Jet::constant_unchecked(a[[i, k]], l2.clone());
                for j in 0..n {
                    let c = a[[j, k]];
                    acc.axpy(-c, &m_mat[i * n + j]);
                    acc.axpy(c, &m2[i * n + j]);
                }
                g_inv[i * n + k] = acc;
            }
        }

        // dg[l, i, j] = ∂_l g_ij
        let mut dg = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for ij in 0..n * n {
                dg.push(g[ij].derivative(l));
            }
        }

        // Γ_{l,ij} of the first kind, then raise.
        let mut first = vec![zero2.clone(); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut acc = dg[i3(n, i, j, l)].clone();
                    acc.axpy(1.0, &dg[i3(n, j, i, l)]);
                    acc.axpy(-1.0, &dg[i3(n, l, i, j)]);
                    let acc = acc.scale(0.5);
                    first[i3(n, l, j, i)] = acc.clone();
                    first[i3(n, l, i, j)] = acc;
                }
            }
        }
        let mut gamma = vec![zero2.clone(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut acc = zero2.clone();
                    for l in 0..n {
                        acc.add_product(&g_inv[k * n + l], &first[i3(n, l, i, j)]);
                    }
                    gamma[i3(n, k, j, i)] = acc.clone();
                    gamma[i3(n, k, i, j)] = acc;
                }
            }
        }

        let l1 = layout(n, 1);
        let zero1 = Jet::constant_unchecked(0.0, l1.clone());
        let gamma1: Vec<Jet> = gamma.iter().map(|j| j.truncate(1)).collect();
        // dgamma[m, k, i, j] = ∂_m Γ^k_ij
        let mut dgamma = Vec::with_capacity(n * n * n * n);
        for mvar in 0..n {
            for g in &gamma {
                dgamma.push(g.derivative(mvar));
            }
        }
        let mut riemann = vec![zero1.clone(); n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in 0..n {
                        let mut acc = dgamma[i * n * n * n + i3(n, l, j, k)].clone();
                        acc.axpy(-1.0, &dgamma[j * n * n * n + i3(n, l, i, k)]);
                        for m in 0..n {
                            acc.add_product(&gamma1[i3(n, l, i, m)], &gamma1[i3(n, m, j, k)]);
                            let neg = gamma1[i3(n, l, j, m)].neg();
                            acc.add_product(&neg, &gamma1[i3(n, m, i, k)]);
                        }
                        riemann[i4(n, l, j, i, k)] = acc.neg();
                        riemann[i4(n, l, i, j, k)] = acc;
                    }
                }
            }
        }

        let mut ricci = vec![zero1.clone(); n * n];
        for j in 0..n {
            for k in 0..n {
                let mut acc = zero1.clone();
                for i in 0..n {
                    acc.axpy(1.0, &riemann[i4(n, i, i, j, k)]);
                }
                ricci[j * n + k] = acc;
            }
        }
        // exact symmetry; the two halves differ only by roundoff
        for j in 0..n {
            for k in (j + 1)..n {
                let avg = ricci[j * n + k].add(&ricci[k * n + j]).expect("same shape").scale(0.5);
                ricci[j * n + k] = avg.clone();
                ricci[k * n + j] = avg;
            }
        }
        let mut scalar = zero1.clone();
        for j in 0..n {
            for k in 0..n {
                scalar.add_product(&g_inv[j * n + k].truncate(1), &ricci[j * n + k]);
            }
        }

        Ok(LocalGeometry {
            point: point.to_vec(),
            values,
            g,
            gamma,
            riemann,
            ricci,
            scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.g.nrows()
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn metric(&self) -> &MetricValues {
        &self.values
    }

    pub fn christoffel(&self) -> Array3<f64> {
        let n = self.dim();
        Array3::from_shape_fn((n, n, n), |(k, i, j)| self.gamma[i3(n, k, i, j)].value())
    }

    /// `Γ^k_{ij}` value.
    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[i3(self.dim(), k, i, j)].value()
    }

    /// Order-1 jets of the Ricci tensor, row-major `n × n`.
    pub fn ricci_jets(&self) -> &[Jet] {
        &self.ricci
    }

    /// Order-1 jet of the scalar curvature.
    pub fn scalar_jet(&self) -> &Jet {
        &self.scalar
    }

    /// `∇_k T_{ij}` for a symmetric or general 2-tensor given by jets of order
    /// at least 1. Output is indexed `[k, i, j]`.
    pub fn covariant_derivative_2tensor(&self, t: &[Jet]) -> Array3<f64> {
        let n = self.dim();
        assert_eq!(t.len(), n * n);
        let vals: Vec<f64> = t.iter().map(|j| j.value()).collect();
        Array3::from_shape_fn((n, n, n), |(k, i, j)| {
            let mut acc = t[i * n + j].d1(k);
            for l in 0..n {
                acc -= self.gamma(l, k, i) * vals[l * n + j] + self.gamma(l, k, j) * vals[i * n + l];
            }
            acc
        })
    }

    /// Hessian `∂_i∂_j f − Γ^k_{ij}∂_k f` as jets one order below `f`'s
    /// order minus one; `f` must have order ≥ 2.
    pub fn hessian_jets(&self, f: &Jet) -> Vec<Jet> {
        let n = self.dim();
        assert!(f.order() >= 2 && f.dim() == n);
        let out_order = f.order() - 2;
        let df: Vec<Jet> = (0..n).map(|k| f.derivative(k)).collect();
        let dfo: Vec<Jet> = df.iter().map(|d| d.truncate(out_order)).collect();
        let mut h = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = df[i].derivative(j);
                for k in 0..n {
                    let gk = self.gamma[i3(n, k, i, j)].truncate(out_order).neg();
                    acc.add_product(&gk, &dfo[k]);
                }
                h.push(acc);
            }
        }
        h
    }

    /// Gradient, Hessian and Laplacian of `f` at the point.
    pub fn scalar_field(&self, f: &ScalarExpr) -> Result<ScalarFieldDerivatives, GeometryError> {
        let jet = f.eval_jet(&self.point, 2)?;
        Ok(self.scalar_field_from_jet(&jet))
    }

    pub fn scalar_field_from_jet(&self, jet: &Jet) -> ScalarFieldDerivatives {
        let n = self.dim();
        let gi = &self.values.g_inv;
        let differential = Array1::from_shape_fn(n, |k| jet.d1(k));
        let grad = Array1::from_shape_fn(n, |k| (0..n).map(|l| gi[[k, l]] * differential[l]).sum());
        let h = self.hessian_jets(&jet.truncate(2));
        let hessian = Array2::from_shape_fn((n, n), |(i, j)| {
            0.5 * (h[i * n + j].value() + h[j * n + i].value())
        });
        let laplacian = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| gi[[i, j]] * hessian[[i, j]])
            .sum();
        let grad_norm2 = (0..n).map(|k| grad[k] * differential[k]).sum();
        ScalarFieldDerivatives {
            value: jet.value(),
            differential,
            grad,
            hessian,
            laplacian,
            grad_norm2,
        }
    }

    /// Assembles the full curvature pack.
    pub fn pack(&self) -> CurvaturePack {
        let n = self.dim();
        let g = &self.values.g;
        let gi = &self.values.g_inv;
        let gamma = self.christoffel();
        let riemann = Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
            self.riemann[i4(n, l, i, j, k)].value()
        });
        let ricci = Array2::from_shape_fn((n, n), |(i, j)| self.ricci[i * n + j].value());
        let scalar = self.scalar.value();
        let d_scalar = Array1::from_shape_fn(n, |k| if n > 0 { self.scalar.d1(k) } else { 0.0 });
        let nabla_ricci = self.covariant_derivative_2tensor(&self.ricci);

        let mut cotton = Array3::zeros((n, n, n));
        if n >= 2 {
            let c = 1.0 / (2.0 * (n as f64 - 1.0));
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        cotton[[i, j, k]] = nabla_ricci[[k, i, j]] - nabla_ricci[[i, k, j]]
                            - c * (d_scalar[k] * g[[i, j]] - d_scalar[i] * g[[k, j]]);
                    }
                }
            }
        }

        let (weyl, weyl_div) = if n >= 4 {
            let cj = self.weyl_jets();
            let weyl = Array4::from_shape_fn((n, n, n, n), |(a, b, c, d)| cj[i4(n, a, b, c, d)].value());
            let wv: Vec<f64> = cj.iter().map(|j| j.value()).collect();
            let mut div = Array3::zeros((n, n, n));
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = 0.0;
                        for a in 0..n {
                            for e in 0..n {
                                let gae = gi[[a, e]];
                                if gae == 0.0 {
                                    continue;
                                }
                                // ∇_e C_{a j k i}
                                let mut nab = cj[i4(n, a, j, k, i)].d1(e);
                                for m in 0..n {
                                    nab -= self.gamma(m, e, a) * wv[i4(n, m, j, k, i)]
                                        + self.gamma(m, e, j) * wv[i4(n, a, m, k, i)]
                                        + self.gamma(m, e, k) * wv[i4(n, a, j, m, i)]
                                        + self.gamma(m, e, i) * wv[i4(n, a, j, k, m)];
                                }
                                acc += gae * nab;
                            }
                        }
                        div[[i, j, k]] = acc;
                    }
                }
            }
            (weyl, div)
        } else {
            (Array4::zeros((n, n, n, n)), Array3::zeros((n, n, n)))
        };

        CurvaturePack {
            point: self.point.clone(),
            g: g.clone(),
            g_inv: gi.clone(),
            gamma,
            riemann,
            ricci,
            scalar,
            d_scalar,
            nabla_ricci,
            weyl,
            cotton,
            weyl_div,
            weyl_defined: n >= 4,
        }
    }

    /// Order-1 jets of the all-lower Weyl tensor (`n ≥ 4`).
    fn weyl_jets(&self) -> Vec<Jet> {
        let n = self.dim();
        let nf = n as f64;
        let l1 = layout(n, 1);
        let zero1 = Jet::constant_unchecked(0.0, l1);
        let g1: Vec<Jet> = self.g.iter().map(|j| j.truncate(1)).collect();
        // R_{abcd} = g_{ae} R^e_{bcd} in the standard slot order; the stored
        // R^e_{ijk} equals the standard R^e_{kij}.
        let mut rlow = vec![zero1.clone(); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in (c + 1)..n {
                        let mut acc = zero1.clone();
                        for e in 0..n {
                            acc.add_product(&g1[a * n + e], &self.riemann[i4(n, e, c, d, b)]);
                        }
                        rlow[i4(n, a, b, d, c)] = acc.neg();
                        rlow[i4(n, a, b, c, d)] = acc;
                    }
                }
            }
        }
        let ric = &self.ricci;
        let s1 = 1.0 / (nf - 2.0);
        let s2 = 1.0 / ((nf - 1.0) * (nf - 2.0));
        let mut weyl = vec![zero1.clone(); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut acc = rlow[i4(n, a, b, c, d)].clone();
                        let mut ricci_part = zero1.clone();
                        ricci_part.add_product(&g1[a * n + c], &ric[b * n + d]);
                        ricci_part.add_product(&g1[a * n + d], &ric[b * n + c].neg());
                        ricci_part.add_product(&g1[b * n + c], &ric[a * n + d].neg());
                        ricci_part.add_product(&g1[b * n + d], &ric[a * n + c]);
                        acc.axpy(-s1, &ricci_part);
                        let mut gg = zero1.clone();
                        gg.add_product(&g1[a * n + c], &g1[b * n + d]);
                        gg.add_product(&g1[a * n + d], &g1[b * n + c].neg());
                        acc.add_product(&self.scalar.scale(s2), &gg);
                        weyl[i4(n, a, b, c, d)] = acc;
                    }
                }
            }
        }
        weyl
    }
}

/// Metric, inverse and determinant at `point`.
pub fn christoffel(m: &MetricField, point: &[f64]) -> Result<Array3<f64>, GeometryError> {
    Ok(LocalGeometry::new(m, point)?.christoffel())
}

/// Full curvature pack at `point`.
pub fn curvature(m: &MetricField, point: &[f64]) -> Result<CurvaturePack, GeometryError> {
    Ok(LocalGeometry::new(m, point)?.pack())
}

/// Gradient, Hessian and Laplacian of `f` with respect to `m`.
pub fn scalar_field_calculus(
    m: &MetricField,
    f: &ScalarExpr,
    point: &[f64],
) -> Result<ScalarFieldDerivatives, GeometryError> {
    LocalGeometry::new(m, point)?.scalar_field(f)
}

/// The metric `φ² m`. Positivity of `φ` is checked whenever the result is
/// evaluated.
pub fn conformal_rescale(m: &MetricField, phi: &ScalarExpr) -> MetricField {
    assert!(phi.coord_names() == m.coord_names(), "φ must live on the metric's chart");
    let phi2 = phi.powi(2);
    let upper = m
        .upper()
        .iter()
        .map(|c| if c.is_zero_literal() { c.clone() } else { phi2.mul(c) })
        .collect();
    let mut positive = m.positivity_guards().to_vec();
    positive.push(phi.clone());
    MetricField::from_parts(m.coord_names().clone(), upper, m.signature(), positive)
}

/// Both sides of the conformal transformation law for the divergence of the
/// Weyl tensor under `g = φ² ḡ`.
///
/// With `δC_{abc} = −∇_e C_{abc}{}^e` the law reads
/// `δC = δ̄C̄ − ((n−3)/φ) (∂_e φ) C̄_{abc}{}^e`, each side raised with its own
/// metric. `literal_residual` is the mismatch when the same equation is read
/// with `+∇_e` in place of `δ`.
#[derive(Debug, Clone, Serialize)]
pub struct ConformalWeylCheck {
    pub lhs: Array3<f64>,
    pub rhs: Array3<f64>,
    pub residual: f64,
    pub literal_residual: f64,
    pub scale: f64,
}

pub fn conformal_weyl_divergence(
    gbar: &MetricField,
    phi: &ScalarExpr,
    point: &[f64],
) -> Result<ConformalWeylCheck, GeometryError> {
    let g = conformal_rescale(gbar, phi);
    let a = curvature(&g, point)?;
    let b = curvature(gbar, point)?;
    let n = a.dim();
    let phi_jet = phi.eval_jet(point, 1)?;
    let phiv = phi_jet.value();
    let nf = n as f64;
    let mut lhs = Array3::zeros((n, n, n));
    let mut rhs = Array3::zeros((n, n, n));
    let mut literal_rhs = Array3::zeros((n, n, n));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // ∇_e C_{ijk}^e = −weyl_div[j, k, i]
                let d_g = -a.weyl_div[[j, k, i]];
                let d_bar = -b.weyl_div[[j, k, i]];
                let mut x = 0.0;
                for e in 0..n {
                    for d in 0..n {
                        x += phi_jet.d1(e) * b.g_inv[[e, d]] * b.weyl[[i, j, k, d]];
                    }
                }
                x *= (nf - 3.0) / phiv;
                lhs[[i, j, k]] = -d_g;
                rhs[[i, j, k]] = -d_bar - x;
                literal_rhs[[i, j, k]] = d_bar - x;
            }
        }
    }
    let residual = lhs
        .iter()
        .zip(rhs.iter())
        .fold(0.0f64, |m, (l, r)| m.max((l - r).abs()));
    let literal_residual = lhs
        .iter()
        .zip(literal_rhs.iter())
        .fold(0.0f64, |m, (l, r)| m.max((-l - r).abs()));
    let scale = lhs.iter().chain(rhs.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ConformalWeylCheck {
        lhs,
        rhs,
        residual,
        literal_residual,
        scale,
    })
}
