#![allow(dead_code)]

pub mod oracle;
pub mod schema;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use warpcurv::geometry::{MetricField, Signature};
use warpcurv::warped::{build_doubly_warped, Factor, FactorSpec, ProductSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn num(v: f64) -> String {
    if v < 0.0 {
        format!("(-{:.4})", -v)
    } else {
        format!("{v:.4}")
    }
}

/// A smooth positive-definite metric on `coords`, diagonally dominant on the
/// box `[-1, 1]^n`.
pub fn random_metric(rng: &mut ChaCha8Rng, coords: &[String]) -> MetricField {
    let n = coords.len();
    let off = if n <= 1 { 0.0 } else { 0.3 / (n as f64 - 1.0) };
    let mut rows = vec![vec!["0".to_string(); n]; n];
    for i in 0..n {
        let c = &coords[rng.gen_range(0..n)];
        let d = &coords[rng.gen_range(0..n)];
        rows[i][i] = match rng.gen_range(0..3) {
            0 => format!(
                "{} + {}*sin({}*{c} + {})",
                num(rng.gen_range(1.6..2.4)),
                num(rng.gen_range(-0.4..0.4)),
                num(rng.gen_range(0.5..1.5)),
                num(rng.gen_range(-1.0..1.0))
            ),
            1 => format!(
                "{}*exp({}*{c} + {}*{d})",
                num(rng.gen_range(1.5..2.5)),
                num(rng.gen_range(-0.2..0.2)),
                num(rng.gen_range(-0.2..0.2))
            ),
            _ => format!(
                "{} + {}*{c}^2 + {}*{c}*{d}",
                num(rng.gen_range(1.6..2.4)),
                num(rng.gen_range(0.0..0.3)),
                num(rng.gen_range(-0.2..0.2))
            ),
        };
        for j in (i + 1)..n {
            let c = &coords[rng.gen_range(0..n)];
            let e = if rng.gen_bool(0.5) {
                format!(
                    "{}*cos({}*{c} + {})",
                    num(rng.gen_range(-off..off)),
                    num(rng.gen_range(0.5..1.5)),
                    num(rng.gen_range(-1.0..1.0))
                )
            } else {
                format!("{}*{c}", num(rng.gen_range(-off..off)))
            };
            rows[i][j] = e.clone();
            rows[j][i] = e;
        }
    }
    MetricField::parse(coords, &rows, Signature::Riemannian).expect("generated metric parses")
}

/// A positive warping function on `coords`.
pub fn random_warping(rng: &mut ChaCha8Rng, coords: &[String]) -> String {
    let n = coords.len();
    let c = &coords[rng.gen_range(0..n)];
    let d = &coords[rng.gen_range(0..n)];
    match rng.gen_range(0..3) {
        0 => format!(
            "{} + {}*sin({}*{c} + {}*{d} + {})",
            num(rng.gen_range(1.2..1.8)),
            num(rng.gen_range(-0.5..0.5)),
            num(rng.gen_range(0.5..1.5)),
            num(rng.gen_range(-0.8..0.8)),
            num(rng.gen_range(-1.0..1.0))
        ),
        1 => format!(
            "exp({}*{c} + {}*{d})",
            num(rng.gen_range(-0.6..0.6)),
            num(rng.gen_range(-0.4..0.4))
        ),
        _ => format!(
            "{} + {}*{c}^2 + {}*{d}^3",
            num(rng.gen_range(1.0..1.5)),
            num(rng.gen_range(0.0..0.5)),
            num(rng.gen_range(-0.2..0.2))
        ),
    }
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A random doubly warped product with factor charts `x0..` and `y0..`.
pub fn random_product(rng: &mut ChaCha8Rng, n1: usize, n2: usize) -> ProductSpec {
    let c1 = names("x", n1);
    let c2 = names("y", n2);
    let m1 = random_metric(rng, &c1);
    let w1 = random_warping(rng, &c1);
    let m2 = random_metric(rng, &c2);
    let w2 = random_warping(rng, &c2);
    build_doubly_warped(
        FactorSpec::parse("M1", m1, &w1).unwrap(),
        FactorSpec::parse("M2", m2, &w2).unwrap(),
    )
    .unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect()
}

/// A random product-chart vector tangent to factor `i`.
pub fn random_factor_vector(rng: &mut ChaCha8Rng, spec: &ProductSpec, i: Factor) -> Vec<f64> {
    let mut v = vec![0.0; spec.dim()];
    for k in spec.range(i) {
        v[k] = rng.gen_range(-1.0..1.0);
    }
    v
}

pub fn max_abs_diff<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    a.into_iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs<'a>(a: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
