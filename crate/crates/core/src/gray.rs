//! Gray's Einstein-like classes, tested through deviation tensors built from
//! `∇Ric`, and residual checks of the inheritance identities for doubly
//! warped products and spacetimes.
//!
//! Class `I` (traceless Ricci) has no computable defining identity here and is
//! reported as not evaluated.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::{Array1, Array3};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{CurvaturePack, GeometryError, LocalGeometry, MetricField};
use crate::warped::{contract3, Factor, ProductPoint, ProductSpec, SpacetimeSpec, WarpedError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrayError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Warped(#[from] WarpedError),
    #[error("no sample points given")]
    NoSamples,
    #[error("expected 3 vectors, got {0}")]
    VectorCount(usize),
    #[error("theorem {0} applies to a spacetime, not a product")]
    WrongTarget(TheoremId),
}

/// Einstein-like classes with a computable defining identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GrayClass {
    P,
    A,
    B,
    AB,
    IA,
    IB,
}

impl GrayClass {
    pub const ALL: [GrayClass; 6] = [
        GrayClass::P,
        GrayClass::A,
        GrayClass::B,
        GrayClass::AB,
        GrayClass::IA,
        GrayClass::IB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GrayClass::P => "P",
            GrayClass::A => "A",
            GrayClass::B => "B",
            GrayClass::AB => "A+B",
            GrayClass::IA => "I+A",
            GrayClass::IB => "I+B",
        }
    }

    /// Immediate superclasses in the inclusion lattice.
    pub fn parents(self) -> &'static [GrayClass] {
        match self {
            GrayClass::P => &[GrayClass::A, GrayClass::B],
            GrayClass::A => &[GrayClass::AB, GrayClass::IA],
            GrayClass::B => &[GrayClass::AB, GrayClass::IB],
            GrayClass::AB | GrayClass::IA | GrayClass::IB => &[],
        }
    }

    /// True when `self ⊆ other`.
    pub fn is_subclass_of(self, other: GrayClass) -> bool {
        self == other || self.parents().iter().any(|p| p.is_subclass_of(other))
    }
}

impl fmt::Display for GrayClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for GrayClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
    Indeterminate,
}

/// Absolute and relative tolerance; the threshold is `atol + rtol · scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol: 1e-9,
            rtol: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn threshold(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }

    pub fn verdict(&self, residual: f64, scale: f64) -> Verdict {
        let tol = self.threshold(scale);
        if residual <= tol {
            Verdict::Member
        } else if residual < 10.0 * tol {
            Verdict::Indeterminate
        } else {
            Verdict::NonMember
        }
    }
}

/// Deviation tensors at one point; each vanishes exactly on its class.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationTensors {
    /// `∇_k R_ij`.
    pub p: Array3<f64>,
    /// `∇_k R_ij + ∇_i R_jk + ∇_j R_ki`.
    pub a: Array3<f64>,
    /// `∇_k R_ij − ∇_i R_kj`.
    pub b: Array3<f64>,
    /// Cyclic sum of `∇_k (R_ij − 2R/(n+2) g_ij)`.
    pub ia: Array3<f64>,
    /// `∇_k H_ij − ∇_i H_kj` with `H = Ric − R/(2(n−1)) g`.
    pub ib: Array3<f64>,
    /// `∂_k R`.
    pub ab: Array1<f64>,
    /// `weyl_div` for `n ≥ 4`, `cotton` for `n = 3`.
    pub ib_crosscheck: Option<Array3<f64>>,
}

impl DeviationTensors {
    pub fn from_pack(pack: &CurvaturePack) -> DeviationTensors {
        let n = pack.dim();
        let nf = n as f64;
        let nr = &pack.nabla_ricci;
        let g = &pack.g;
        let dr = &pack.d_scalar;
        let a = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
            nr[[k, i, j]] + nr[[i, j, k]] + nr[[j, k, i]]
        });
        let b = Array3::from_shape_fn((n, n, n), |(k, i, j)| nr[[k, i, j]] - nr[[i, k, j]]);
        let c = 2.0 / (nf + 2.0);
        let ia = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
            a[[k, i, j]] - c * (dr[k] * g[[i, j]] + dr[i] * g[[j, k]] + dr[j] * g[[k, i]])
        });
        let ib = if n >= 2 {
            let h = 1.0 / (2.0 * (nf - 1.0));
            Array3::from_shape_fn((n, n, n), |(k, i, j)| {
                b[[k, i, j]] - h * (dr[k] * g[[i, j]] - dr[i] * g[[k, j]])
            })
        } else {
            Array3::zeros((n, n, n))
        };
        let ib_crosscheck = match n {
            3 => Some(pack.cotton.clone()),
            n if n >= 4 => Some(pack.weyl_div.clone()),
            _ => None,
        };
        DeviationTensors {
            p: nr.clone(),
            a,
            b,
            ia,
            ib,
            ab: dr.clone(),
            ib_crosscheck,
        }
    }

    /// Euclidean component norm of the deviation for `class`.
    pub fn norm(&self, class: GrayClass) -> f64 {
        let n3 = |t: &Array3<f64>| t.iter().map(|v| v * v).sum::<f64>().sqrt();
        match class {
            GrayClass::P => n3(&self.p),
            GrayClass::A => n3(&self.a),
            GrayClass::B => n3(&self.b),
            GrayClass::IA => n3(&self.ia),
            GrayClass::IB => n3(&self.ib),
            GrayClass::AB => self.ab.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

pub fn deviation_tensors(m: &MetricField, point: &[f64]) -> Result<DeviationTensors, GrayError> {
    let pack = LocalGeometry::new(m, point)?.pack();
    Ok(DeviationTensors::from_pack(&pack))
}

/// Result for one class.
#[derive(Debug, Clone, Serialize)]
pub struct ClassResult {
    pub class: GrayClass,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Max norm of the Weyl-divergence or Cotton tensor, for `I+B`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosscheck_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrayClassReport {
    pub dim: usize,
    pub classes: Vec<ClassResult>,
    /// The unique smallest member class, if any.
    pub finest_class: Option<GrayClass>,
    /// Member classes with no member subclass.
    pub minimal_classes: Vec<GrayClass>,
    pub class_i: &'static str,
    pub sample_points: Vec<Vec<f64>>,
    pub tolerances: Tolerances,
}

impl GrayClassReport {
    pub fn get(&self, class: GrayClass) -> &ClassResult {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .expect("all classes present")
    }

    pub fn verdict(&self, class: GrayClass) -> Verdict {
        self.get(class).verdict
    }
}

/// Classifies `m` from deviation norms aggregated by max over `samples`.
pub fn classify(
    m: &MetricField,
    samples: &[Vec<f64>],
    tol: Tolerances,
) -> Result<GrayClassReport, GrayError> {
    if samples.is_empty() {
        return Err(GrayError::NoSamples);
    }
    let per_point: Vec<Result<(DeviationTensors, f64), GrayError>> = samples
        .par_iter()
        .map(|p| {
            let pack = LocalGeometry::new(m, p)?.pack();
            let nr = pack.nabla_ricci.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ric = pack.ricci.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok((DeviationTensors::from_pack(&pack), nr.max(ric)))
        })
        .collect();
    let mut devs = Vec::with_capacity(samples.len());
    for r in per_point {
        devs.push(r?);
    }
    let scale = devs.iter().fold(1.0f64, |s, (_, v)| s.max(*v));
    let tolerance = tol.threshold(scale);
    let mut verdicts: BTreeMap<GrayClass, Verdict> = BTreeMap::new();
    let mut classes = Vec::new();
    for class in GrayClass::ALL {
        let residual = devs.iter().fold(0.0f64, |s, (d, _)| s.max(d.norm(class)));
        let crosscheck_residual = if class == GrayClass::IB {
            devs.iter()
                .map(|(d, _)| {
                    d.ib_crosscheck
                        .as_ref()
                        .map(|t| t.iter().fold(0.0f64, |m, v| m.max(v.abs())))
                })
                .try_fold(0.0f64, |s, v| v.map(|v| s.max(v)))
        } else {
            None
        };
        let verdict = tol.verdict(residual, scale);
        verdicts.insert(class, verdict);
        classes.push(ClassResult {
            class,
            residual,
            scale,
            tolerance,
            verdict,
            crosscheck_residual,
        });
    }
    // a member whose superclass is not a member is numerically inconsistent
    loop {
        let mut changed = false;
        for class in GrayClass::ALL {
            if verdicts[&class] == Verdict::Member
                && class.parents().iter().any(|p| verdicts[p] != Verdict::Member)
            {
                verdicts.insert(class, Verdict::Indeterminate);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for c in &mut classes {
        c.verdict = verdicts[&c.class];
    }
    let members: Vec<GrayClass> = GrayClass::ALL
        .into_iter()
        .filter(|c| verdicts[c] == Verdict::Member)
        .collect();
    let minimal_classes: Vec<GrayClass> = members
        .iter()
        .copied()
        .filter(|&c| !members.iter().any(|&d| d != c && d.is_subclass_of(c)))
        .collect();
    let finest_class = if minimal_classes.len() == 1 {
        Some(minimal_classes[0])
    } else {
        None
    };
    Ok(GrayClassReport {
        dim: m.dim(),
        classes,
        finest_class,
        minimal_classes,
        class_i: "not_evaluated",
        sample_points: samples.to_vec(),
        tolerances: tol,
    })
}

/// Inheritance identities for products (`Th*`) and spacetimes (`St*`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    Th1,
    Th2,
    Th3,
    ThIa,
    StA,
    StB,
    StP,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::Th1,
        TheoremId::Th2,
        TheoremId::Th3,
        TheoremId::ThIa,
        TheoremId::StA,
        TheoremId::StB,
        TheoremId::StP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Th1 => "TH1",
            TheoremId::Th2 => "TH2",
            TheoremId::Th3 => "TH3",
            TheoremId::ThIa => "TH_IA",
            TheoremId::StA => "ST_A",
            TheoremId::StB => "ST_B",
            TheoremId::StP => "ST_P",
        }
    }

    pub fn from_name(s: &str) -> Option<TheoremId> {
        TheoremId::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }

    pub fn is_spacetime(self) -> bool {
        matches!(self, TheoremId::StA | TheoremId::StB | TheoremId::StP)
    }

    /// Product theorem whose identity a spacetime theorem specialises.
    fn product_form(self) -> TheoremId {
        match self {
            TheoremId::StA => TheoremId::Th1,
            TheoremId::StB => TheoremId::Th2,
            TheoremId::StP => TheoremId::Th3,
            t => t,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// What a theorem is evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum TheoremTarget<'a> {
    /// A product and the factor whose class is in question.
    Product(&'a ProductSpec, Factor),
    /// A spacetime; the factor in question is the base.
    Spacetime(&'a SpacetimeSpec),
}

/// Both sides of an inheritance identity.
///
/// `lhs` is the product's class deviation on factor-tangent slots, computed
/// intrinsically on the product chart. `rhs` is the factor's class deviation
/// minus `(condition_lhs − condition_rhs)`, computed from factor data. The
/// theorem's condition is `condition_lhs = condition_rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremResidual {
    pub id: TheoremId,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub product_deviation: f64,
    pub factor_deviation: f64,
    pub condition_lhs: f64,
    pub condition_rhs: f64,
    /// The condition's right side exactly as printed, where it differs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_condition_rhs: Option<f64>,
    /// `|lhs − rhs|` with the printed condition in place of the derived one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_residual: Option<f64>,
}

struct Slots<'a> {
    pack: &'a CurvaturePack,
    pp: &'a ProductPoint,
    i: Factor,
    full: [&'a [f64]; 3],
    local: [Vec<f64>; 3],
}

impl Slots<'_> {
    fn fac(&self) -> &crate::warped::FactorData {
        self.pp.factor(self.i)
    }

    fn other(&self) -> &crate::warped::FactorData {
        self.pp.factor(self.i.other())
    }

    /// Applies `f(a, b, c)` to the slot permutations `(0,1,2), (1,2,0), (2,0,1)`
    /// and averages.
    fn cyc(&self, f: impl Fn(usize, usize, usize) -> f64) -> f64 {
        (f(0, 1, 2) + f(1, 2, 0) + f(2, 0, 1)) / 3.0
    }

    fn prod_nr(&self, a: usize, b: usize, c: usize) -> f64 {
        contract3(&self.pack.nabla_ricci, self.full[a], self.full[b], self.full[c])
    }

    fn fac_nr(&self, a: usize, b: usize, c: usize) -> f64 {
        contract3(&self.fac().pack.nabla_ricci, &self.local[a], &self.local[b], &self.local[c])
    }

    fn d_f(&self, a: usize, b: usize, c: usize) -> f64 {
        contract3(&self.fac().d_f_tensor, &self.local[a], &self.local[b], &self.local[c])
    }

    fn gi(&self, a: usize, b: usize) -> f64 {
        bilinear(&self.fac().pack.g, &self.local[a], &self.local[b])
    }

    fn g(&self, a: usize, b: usize) -> f64 {
        bilinear(&self.pack.g, self.full[a], self.full[b])
    }

    /// `X(f_i)`.
    fn vf(&self, a: usize) -> f64 {
        dot(&self.fac().df, &self.local[a])
    }

    /// `X(R)` on the product.
    fn vr(&self, a: usize) -> f64 {
        dot(&self.pack.d_scalar, self.full[a])
    }

    /// `X(R^i)` on the factor.
    fn vri(&self, a: usize) -> f64 {
        dot(&self.fac().pack.d_scalar, &self.local[a])
    }
}

fn dot(v: &Array1<f64>, x: &[f64]) -> f64 {
    v.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn bilinear(g: &ndarray::Array2<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, &xa) in x.iter().enumerate() {
        for (b, &yb) in y.iter().enumerate() {
            acc += xa * g[[a, b]] * yb;
        }
    }
    acc
}

/// Evaluates both sides of the identity behind theorem `id` at `point` for
/// the three factor-tangent vectors `vectors` (product-chart components).
pub fn theorem_residual(
    id: TheoremId,
    target: TheoremTarget<'_>,
    point: &[f64],
    vectors: &[Vec<f64>],
) -> Result<TheoremResidual, GrayError> {
    if vectors.len() != 3 {
        return Err(GrayError::VectorCount(vectors.len()));
    }
    let (spec, i, spacetime) = match target {
        TheoremTarget::Product(s, i) => {
            if id.is_spacetime() {
                return Err(GrayError::WrongTarget(id));
            }
            (s, i, None)
        }
        TheoremTarget::Spacetime(s) => (s.product(), Factor::Second, Some(s)),
    };
    let local = [
        spec.restrict_vector(&vectors[0], i)?,
        spec.restrict_vector(&vectors[1], i)?,
        spec.restrict_vector(&vectors[2], i)?,
    ];
    let pp = spec.at(point)?;
    let pack = LocalGeometry::new(spec.assembled(), point)?.pack();
    let s = Slots {
        pack: &pack,
        pp: &pp,
        i,
        full: [&vectors[0], &vectors[1], &vectors[2]],
        local,
    };
    let n = pp.n as f64;
    let f3 = s.fac().f.powi(3);
    let diamond = s.other().diamond;
    let grad2 = s.other().grad_norm2;
    let n_i = s.fac().n_i as f64;

    let (product_deviation, factor_deviation, condition_lhs, condition_rhs, printed) =
        match id.product_form() {
            TheoremId::Th1 => {
                let sym = s.cyc(|a, b, c| s.vf(a) * s.gi(b, c));
                let rhs = 2.0 / f3 * (diamond + (n - 2.0) * grad2) * sym;
                (
                    s.cyc(|a, b, c| s.prod_nr(a, b, c)),
                    s.cyc(|a, b, c| s.fac_nr(a, b, c)),
                    s.cyc(|a, b, c| s.d_f(a, b, c)),
                    rhs,
                    spacetime.map(|st| {
                        st.time_data(point).map(|t| {
                            let nb = st.base_dim() as f64;
                            let sd = t.sigma * t.sigma_ddot + (nb - 1.0) * t.sigma_dot.powi(2);
                            ((nb - 1.0) * t.sigma_dot.powi(2) + sd) * 2.0 / f3 * sym
                        })
                    }),
                )
            }
            TheoremId::Th2 => {
                let k = (2.0 * diamond - (n - 2.0) * grad2) / f3;
                let rhs = k * (s.vf(0) * s.gi(1, 2) - s.vf(1) * s.gi(0, 2));
                (
                    s.prod_nr(0, 1, 2) - s.prod_nr(1, 0, 2),
                    s.fac_nr(0, 1, 2) - s.fac_nr(1, 0, 2),
                    s.d_f(0, 1, 2) - s.d_f(1, 0, 2),
                    rhs,
                    spacetime.map(|st| {
                        st.time_data(point).map(|t| {
                            let nb = st.base_dim() as f64;
                            let sd2 = t.sigma_dot.powi(2);
                            let sd = t.sigma * t.sigma_ddot + (nb - 1.0) * sd2;
                            (2.0 * sd - (nb - 1.0) * sd2) / f3 * s.vf(0) * s.gi(1, 2)
                                - (2.0 * sd + (nb - 1.0) * sd2) / f3 * s.vf(1) * s.gi(0, 2)
                        })
                    }),
                )
            }
            TheoremId::Th3 => {
                let rhs = (n - 2.0) / f3 * (s.gi(0, 1) * s.vf(2) + s.gi(0, 2) * s.vf(1)) * grad2
                    + 2.0 * diamond / f3 * s.vf(0) * s.gi(1, 2);
                (
                    s.prod_nr(0, 1, 2),
                    s.fac_nr(0, 1, 2),
                    s.d_f(0, 1, 2),
                    rhs,
                    spacetime.map(|st| {
                        st.time_data(point).map(|t| {
                            let nb = st.base_dim() as f64;
                            let sd2 = t.sigma_dot.powi(2);
                            let sd = t.sigma * t.sigma_ddot + (nb - 1.0) * sd2;
                            2.0 * sd / f3 * s.vf(0) * s.gi(1, 2)
                                + sd2 / f3 * (nb - 1.0) * (s.gi(0, 2) * s.vf(1) + s.gi(0, 1) * s.vf(2))
                        })
                    }),
                )
            }
            TheoremId::ThIa => {
                let sym = s.cyc(|a, b, c| s.vf(a) * s.gi(b, c));
                let base = 2.0 / f3 * (diamond + (n - 2.0) * grad2) * sym;
                let scalar_term = s.cyc(|a, b, c| s.vr(a) * s.g(b, c));
                let factor_term = s.cyc(|a, b, c| s.vri(a) * s.gi(b, c));
                let rhs = base - 2.0 / (n + 2.0) * scalar_term + 2.0 / (n_i + 2.0) * factor_term;
                let printed = base
                    - 2.0 / (n + 2.0)
                        * s.cyc(|a, b, c| (s.vr(a) - (n + 2.0) / (n_i + 2.0) * s.vri(a)) * s.gi(b, c));
                (
                    s.cyc(|a, b, c| s.prod_nr(a, b, c) - 2.0 / (n + 2.0) * s.vr(a) * s.g(b, c)),
                    s.cyc(|a, b, c| s.fac_nr(a, b, c) - 2.0 / (n_i + 2.0) * s.vri(a) * s.gi(b, c)),
                    s.cyc(|a, b, c| s.d_f(a, b, c)),
                    rhs,
                    Some(Ok(printed)),
                )
            }
            _ => unreachable!(),
        };
    let printed_condition_rhs = printed.transpose()?;
    let lhs = product_deviation;
    let rhs = factor_deviation - (condition_lhs - condition_rhs);
    let printed_residual =
        printed_condition_rhs.map(|p| (lhs - (factor_deviation - (condition_lhs - p))).abs());
    Ok(TheoremResidual {
        id,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        product_deviation,
        factor_deviation,
        condition_lhs,
        condition_rhs,
        printed_condition_rhs,
        printed_residual,
    })
}

/// Scalar curvature of a product from factor data, three ways, against the
/// intrinsic value.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarIdentity {
    /// The printed left-hand side with `c_i` the factor scalar curvatures.
    pub printed_value: f64,
    /// The printed form with `n_i` and `n_j` exchanged in the warping terms.
    pub swapped_value: f64,
    /// The trace of the block Ricci formulas.
    pub derived_value: f64,
    pub intrinsic_r: f64,
    pub residual: f64,
    pub swapped_residual: f64,
    pub derived_residual: f64,
}

pub fn scalar_identity_residual(spec: &ProductSpec, point: &[f64]) -> Result<ScalarIdentity, GrayError> {
    let pp = spec.at(point)?;
    let intrinsic_r = LocalGeometry::new(spec.assembled(), point)?.scalar_jet().value();
    let a = pp.factor(Factor::First);
    let b = pp.factor(Factor::Second);
    let (ni, nj) = (a.n_i as f64, b.n_i as f64);
    let (fi, fj) = (a.f, b.f);
    let (ci, cj) = (a.pack.scalar, b.pack.scalar);
    let (li, lj) = (a.laplacian, b.laplacian);
    let printed_value = ci / (fj * fj) + cj / (fi * fi)
        - ni * (ni - 1.0) / (fj * fj) * lj
        - nj * (nj - 1.0) / (fi * fi) * li
        - 2.0 * ni / fj * lj
        - 2.0 * nj / fi * li;
    let swapped_value = ci / (fj * fj) + cj / (fi * fi)
        - nj * (nj - 1.0) / (fj * fj) * lj
        - ni * (ni - 1.0) / (fi * fi) * li
        - 2.0 * nj / fj * lj
        - 2.0 * ni / fi * li;
    let ff = fi * fi * fj * fj;
    let derived_value = ci / (fj * fj) + cj / (fi * fi)
        - 2.0 * ni * lj / (fi * fi * fj)
        - 2.0 * nj * li / (fj * fj * fi)
        - ni * (ni - 1.0) * b.grad_norm2 / ff
        - nj * (nj - 1.0) * a.grad_norm2 / ff;
    Ok(ScalarIdentity {
        printed_value,
        swapped_value,
        derived_value,
        intrinsic_r,
        residual: (printed_value - intrinsic_r).abs(),
        swapped_residual: (swapped_value - intrinsic_r).abs(),
        derived_residual: (derived_value - intrinsic_r).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Signature;
    use crate::warped::{build_doubly_warped, FactorSpec};

    fn sphere2() -> MetricField {
        MetricField::diagonal(&["theta", "phi"], &["1", "sin(theta)^2"], Signature::Riemannian)
            .unwrap()
    }

    #[test]
    fn sphere_is_in_every_class() {
        let r = classify(&sphere2(), &[vec![0.7, 0.1], vec![1.9, 2.0]], Tolerances::default())
            .unwrap();
        for c in &r.classes {
            assert_eq!(c.verdict, Verdict::Member, "{}", c.class);
        }
        assert_eq!(r.finest_class, Some(GrayClass::P));
    }

    #[test]
    fn no_samples() {
        assert_eq!(
            classify(&sphere2(), &[], Tolerances::default()).unwrap_err(),
            GrayError::NoSamples
        );
    }

    #[test]
    fn lattice() {
        assert!(GrayClass::P.is_subclass_of(GrayClass::IB));
        assert!(GrayClass::A.is_subclass_of(GrayClass::AB));
        assert!(!GrayClass::A.is_subclass_of(GrayClass::IB));
        assert!(!GrayClass::AB.is_subclass_of(GrayClass::A));
    }

    #[test]
    fn verdict_bands() {
        let t = Tolerances { atol: 1.0, rtol: 0.0 };
        assert_eq!(t.verdict(1.0, 0.0), Verdict::Member);
        assert_eq!(t.verdict(5.0, 0.0), Verdict::Indeterminate);
        assert_eq!(t.verdict(10.0, 0.0), Verdict::NonMember);
    }

    #[test]
    fn direct_product_identities() {
        let f1 = FactorSpec::parse("S2", sphere2(), "1").unwrap();
        let m = MetricField::diagonal(&["x", "y"], &["1", "exp(2*x)"], Signature::Riemannian).unwrap();
        let f2 = FactorSpec::parse("H2", m, "1").unwrap();
        let p = build_doubly_warped(f1, f2).unwrap();
        let pt = [1.0, 0.3, 0.2, -0.4];
        let s = scalar_identity_residual(&p, &pt).unwrap();
        assert!((s.intrinsic_r - 0.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
        let v = vec![vec![0.3, -1.0, 0.0, 0.0], vec![1.0, 0.5, 0.0, 0.0], vec![0.2, 0.2, 0.0, 0.0]];
        for id in [TheoremId::Th1, TheoremId::Th2, TheoremId::Th3, TheoremId::ThIa] {
            let r = theorem_residual(id, TheoremTarget::Product(&p, Factor::First), &pt, &v).unwrap();
            assert!(r.residual < 1e-12, "{id}: {r:?}");
            assert!(r.lhs.abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_scalar_identity() {
        let l = |c: &str, w: &str| {
            FactorSpec::parse(c, MetricField::diagonal(&[c], &["1"], Signature::Riemannian).unwrap(), w)
                .unwrap()
        };
        let p = build_doubly_warped(l("x", "exp(x)"), l("y", "1")).unwrap();
        let s = scalar_identity_residual(&p, &[0.3, 0.9]).unwrap();
        assert!((s.intrinsic_r + 2.0).abs() < 1e-12);
        assert!(s.derived_residual < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn spacetime_theorem_needs_spacetime() {
        let l = |c: &str| {
            FactorSpec::parse(c, MetricField::diagonal(&[c], &["1"], Signature::Riemannian).unwrap(), "1")
                .unwrap()
        };
        let p = build_doubly_warped(l("x"), l("y")).unwrap();
        let v = vec![vec![1.0, 0.0]; 3];
        assert_eq!(
            theorem_residual(TheoremId::StA, TheoremTarget::Product(&p, Factor::First), &[0.0, 0.0], &v)
                .unwrap_err(),
            GrayError::WrongTarget(TheoremId::StA)
        );
    }
}
