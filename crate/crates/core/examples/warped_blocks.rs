//! Ricci blocks of a doubly warped product from factor data, compared with
//! the Ricci tensor of the assembled metric.

use warpcurv::geometry::{curvature, MetricField, Signature};
use warpcurv::warped::{build_doubly_warped, Factor, FactorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m1 = MetricField::diagonal(&["u", "v"], &["1", "1 + 0.2*u^2"], Signature::Riemannian)?;
    let m2 = MetricField::diagonal(&["p", "q"], &["2", "2 + sin(p)"], Signature::Riemannian)?;
    let spec = build_doubly_warped(
        FactorSpec::parse("B", m1, "1.3 + 0.2*sin(u + v)")?,
        FactorSpec::parse("F", m2, "exp(0.3*p)")?,
    )?;
    let p = [0.2, -0.4, 0.5, 0.1];
    let pp = spec.at(&p)?;
    let blocks = pp.ricci_blocks();
    let intrinsic = curvature(spec.assembled(), &p)?;

    println!("chart: {:?}", spec.assembled().coord_names());
    println!("block M1:\n{:.6}", blocks.block11);
    println!("block M2:\n{:.6}", blocks.block22);
    println!("mixed:\n{:.6}", blocks.mixed);
    let diff = blocks
        .full
        .iter()
        .zip(intrinsic.ricci.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("max |blocks - intrinsic Ric| = {diff:.2e}");

    for i in [Factor::First, Factor::Second] {
        let d = pp.factor(i);
        println!("factor {:?}: f = {:.6}, f^diamond = {:.6}", i, d.f, d.diamond);
    }
    Ok(())
}
