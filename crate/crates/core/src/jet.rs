//! Truncated multivariate Taylor polynomials ("jets") of order at most 3.
//!
//! A [`Jet`] in `dim` variables of order `k` stores the Taylor coefficients
//! `c_α = ∂^α f / α!` for every multi-index `|α| ≤ k`, densely, in graded
//! lexicographic order: all degree-0 terms, then degree 1, and so on, with
//! `e_0` ranked before `e_1` inside a degree. Because lower degrees come
//! first, the layout of order `k` is a prefix of the layout of order `k + 1`,
//! which makes truncation a slice operation.
//!
//! Arithmetic propagates derivatives exactly (up to floating-point roundoff):
//! there is no step size and no truncation error for `|α| ≤ order`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Highest supported jet order.
pub const MAX_ORDER: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("variable index {index} out of range for a jet in {dim} variables")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("jet order {0} exceeds the supported maximum of 3")]
    OrderTooHigh(usize),
    #[error("jet shape mismatch: (dim {left_dim}, order {left_order}) vs (dim {right_dim}, order {right_order})")]
    ShapeMismatch {
        left_dim: usize,
        left_order: usize,
        right_dim: usize,
        right_order: usize,
    },
    #[error("expected {expected} coefficients, got {got}")]
    CoeffCount { expected: usize, got: usize },
    #[error("division by a jet with zero constant term")]
    DivisionByZero,
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("multi-index {alpha:?} does not fit a jet in {dim} variables of order {order}")]
    BadMultiIndex {
        alpha: Vec<usize>,
        dim: usize,
        order: usize,
    },
}

/// Coefficient layout and product tables for one `(dim, order)` pair.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(a, b, c)` with `α_a + α_b = α_c`, all within this layout.
    products: Vec<(u32, u32, u32)>,
    /// Offset of the first coefficient of each degree, plus the total length.
    degree_start: Vec<usize>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let mut exponents = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for degree in 0..=order {
            degree_start.push(exponents.len());
            let mut current = vec![0u8; dim];
            push_compositions(&mut exponents, &mut current, 0, degree);
        }
        degree_start.push(exponents.len());

        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();

        let mut products = Vec::new();
        let mut sum = vec![0u8; dim];
        for (a, ea) in exponents.iter().enumerate() {
            let da: usize = ea.iter().map(|&x| x as usize).sum();
            for (b, eb) in exponents.iter().enumerate() {
                let db: usize = eb.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    continue;
                }
                for k in 0..dim {
                    sum[k] = ea[k] + eb[k];
                }
                let c = index[&sum];
                products.push((a as u32, b as u32, c as u32));
            }
        }

        Layout {
            dim,
            order,
            exponents,
            index,
            products,
            degree_start,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Multi-index of coefficient `i`.
    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exponents[i]
    }

    pub fn position(&self, alpha: &[u8]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

// Generates every exponent vector of total degree `remaining` over variables
// `var..dim`, earlier variables taking the larger share first.
fn push_compositions(out: &mut Vec<Vec<u8>>, current: &mut [u8], var: usize, remaining: usize) {
    let dim = current.len();
    if var + 1 == dim {
        current[var] = remaining as u8;
        out.push(current.to_vec());
        current[var] = 0;
        return;
    }
    if dim == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for take in (0..=remaining).rev() {
        current[var] = take as u8;
        push_compositions(out, current, var + 1, remaining - take);
    }
    current[var] = 0;
}

type LayoutCache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;

/// Shared layout for `(dim, order)`; built once per process.
pub fn layout(dim: usize, order: usize) -> Arc<Layout> {
    static CACHE: OnceLock<LayoutCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet layout cache poisoned");
    guard
        .entry((dim, order))
        .or_insert_with(|| Arc::new(Layout::build(dim, order)))
        .clone()
}

/// Binomial coefficient `C(n, k)`; the coefficient count of a jet is
/// `C(dim + order, order)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    /// `x ↦ x^p` for a constant real `p`, defined for `x > 0`.
    PowConst(f64),
}

impl Elementary {
    pub fn name(&self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Tan => "tan",
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Sinh => "sinh",
            Elementary::Cosh => "cosh",
            Elementary::Tanh => "tanh",
            Elementary::Sqrt => "sqrt",
            Elementary::PowConst(_) => "pow",
        }
    }

    /// Value and first three derivatives at `x`, or a domain error.
    pub fn derivatives(&self, x: f64, order: usize) -> Result<[f64; 4], JetError> {
        let domain = |func| Err(JetError::Domain { func, value: x });
        let d = match *self {
            Elementary::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            Elementary::Cos => {
                let (s, c) = x.sin_cos();
                [c, -s, -c, s]
            }
            Elementary::Tan => {
                // Poles: cos(x) vanishes to within roundoff of an odd multiple of π/2.
                if x.cos().abs() < 1e-15 {
                    return domain("tan");
                }
                let t = x.tan();
                let sec2 = 1.0 + t * t;
                [t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t)]
            }
            Elementary::Exp => {
                let e = x.exp();
                [e, e, e, e]
            }
            Elementary::Log => {
                if x <= 0.0 {
                    return domain("log");
                }
                let r = 1.0 / x;
                [x.ln(), r, -r * r, 2.0 * r * r * r]
            }
            Elementary::Sinh => {
                let (s, c) = (x.sinh(), x.cosh());
                [s, c, s, c]
            }
            Elementary::Cosh => {
                let (s, c) = (x.sinh(), x.cosh());
                [c, s, c, s]
            }
            Elementary::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                [t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)]
            }
            Elementary::Sqrt => {
                if x < 0.0 || (x == 0.0 && order > 0) {
                    return domain("sqrt");
                }
                let r = x.sqrt();
                if order == 0 {
                    [r, 0.0, 0.0, 0.0]
                } else {
                    [r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)]
                }
            }
            Elementary::PowConst(p) => {
                if x <= 0.0 {
                    return domain("pow");
                }
                let v = x.powf(p);
                [
                    v,
                    p * v / x,
                    p * (p - 1.0) * v / (x * x),
                    p * (p - 1.0) * (p - 2.0) * v / (x * x * x),
                ]
            }
        };
        Ok(d)
    }
}

/// Truncated multivariate Taylor polynomial.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

fn check_order(order: usize) -> Result<(), JetError> {
    if order > MAX_ORDER {
        Err(JetError::OrderTooHigh(order))
    } else {
        Ok(())
    }
}

impl Jet {
    /// Constant jet.
    pub fn constant(value: f64, dim: usize, order: usize) -> Result<Jet, JetError> {
        check_order(order)?;
        Ok(Jet::constant_unchecked(value, layout(dim, order)))
    }

    pub(crate) fn constant_unchecked(value: f64, layout: Arc<Layout>) -> Jet {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    /// The coordinate function `x_var` expanded about `value`.
    pub fn variable(var: usize, value: f64, dim: usize, order: usize) -> Result<Jet, JetError> {
        check_order(order)?;
        if var >= dim {
            return Err(JetError::IndexOutOfRange { index: var, dim });
        }
        let mut jet = Jet::constant_unchecked(value, layout(dim, order));
        if order >= 1 {
            jet.coeffs[1 + var] = 1.0;
        }
        Ok(jet)
    }

    /// Builds a jet from raw Taylor coefficients in layout order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        check_order(order)?;
        let layout = layout(dim, order);
        if coeffs.len() != layout.len() {
            return Err(JetError::CoeffCount {
                expected: layout.len(),
                got: coeffs.len(),
            });
        }
        Ok(Jet { layout, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Constant term.
    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `c_α`.
    pub fn coeff(&self, alpha: &[usize]) -> Result<f64, JetError> {
        let key = self.multi_index_key(alpha)?;
        Ok(self.coeffs[self.layout.index[&key]])
    }

    fn multi_index_key(&self, alpha: &[usize]) -> Result<Vec<u8>, JetError> {
        let bad = || JetError::BadMultiIndex {
            alpha: alpha.to_vec(),
            dim: self.dim(),
            order: self.order(),
        };
        if alpha.len() != self.dim() || alpha.iter().sum::<usize>() > self.order() {
            return Err(bad());
        }
        Ok(alpha.iter().map(|&a| a as u8).collect())
    }

    /// The partial derivative `∂^α` at the expansion point, i.e. `α! · c_α`.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64, JetError> {
        let c = self.coeff(alpha)?;
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        Ok(c * fact)
    }

    /// First partial derivative along `var`.
    pub fn d1(&self, var: usize) -> f64 {
        debug_assert!(self.order() >= 1 && var < self.dim());
        self.coeffs[1 + var]
    }

    /// Whether every coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_shape(&self, other: &Jet) -> Result<(), JetError> {
        if Arc::ptr_eq(&self.layout, &other.layout)
            || (self.dim() == other.dim() && self.order() == other.order())
        {
            Ok(())
        } else {
            Err(JetError::ShapeMismatch {
                left_dim: self.dim(),
                left_order: self.order(),
                right_dim: other.dim(),
                right_order: other.order(),
            })
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        let inv = other.recip()?;
        Ok(self.mul_unchecked(&inv))
    }

    /// Multiplicative inverse by truncated power series; requires a nonzero
    /// constant term.
    pub fn recip(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if a0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        // 1/(a0 + h) = (1/a0) Σ (-h/a0)^k
        let r = 1.0 / a0;
        Ok(self.compose_series(&[r, -r * r, r * r * r, -r * r * r * r]))
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &Jet) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(a, b, c) in &self.layout.products {
            coeffs[c as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// In-place `self += s · other`; shapes must agree.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// In-place `self += a · b`.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        debug_assert_eq!(a.coeffs.len(), self.coeffs.len());
        debug_assert_eq!(b.coeffs.len(), self.coeffs.len());
        for &(i, j, k) in &self.layout.products {
            self.coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
    }

    /// Integer power by repeated multiplication; negative exponents go
    /// through [`Jet::recip`].
    pub fn powi(&self, n: i64) -> Result<Jet, JetError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Jet::constant_unchecked(1.0, self.layout.clone());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul_unchecked(&sq);
            }
        }
        Ok(acc)
    }

    /// `fn ∘ self`, by composing the univariate Taylor series of `fn` about
    /// the constant term with the nonconstant part of `self`.
    pub fn compose(&self, func: Elementary) -> Result<Jet, JetError> {
        let d = func.derivatives(self.value(), self.order())?;
        let series = [d[0], d[1], d[2] / 2.0, d[3] / 6.0];
        Ok(self.compose_series(&series))
    }

    /// Evaluates `Σ_k series[k] · h^k` with `h = self − self.value()`.
    fn compose_series(&self, series: &[f64; 4]) -> Jet {
        let order = self.order();
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        // Horner in h, truncated by the product table.
        let mut acc = Jet::constant_unchecked(series[order], self.layout.clone());
        for k in (0..order).rev() {
            acc = acc.mul_unchecked(&h);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = layout(self.dim(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    /// The jet of `∂f/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        assert!(var < self.dim(), "variable index out of range");
        let lower = layout(self.dim(), self.order() - 1);
        let mut coeffs = Vec::with_capacity(lower.len());
        let mut key = vec![0u8; self.dim()];
        for e in &lower.exponents {
            key.copy_from_slice(e);
            key[var] += 1;
            let src = self.layout.index[&key];
            coeffs.push(self.coeffs[src] * key[var] as f64);
        }
        Jet {
            layout: lower,
            coeffs,
        }
    }

    /// All coefficients of total degree `degree`.
    pub fn degree_part(&self, degree: usize) -> &[f64] {
        let s = &self.layout.degree_start;
        &self.coeffs[s[degree]..s[degree + 1]]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Arithmetic selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Binary jet arithmetic.
pub fn arith(op: ArithOp, a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
    }
}
