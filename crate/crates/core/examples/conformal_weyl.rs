//! The divergence of the Weyl tensor under a conformal change g = phi^2 gbar.

use warpcurv::expr::ScalarExpr;
use warpcurv::geometry::{conformal_weyl_divergence, curvature, MetricField, Signature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coords = ["x", "y", "z", "w"];
    let gbar = MetricField::diagonal(
        &coords,
        &["2 + 0.3*sin(y)", "1 + 0.2*x^2", "exp(0.1*w)", "1.5 + 0.1*x*z"],
        Signature::Riemannian,
    )?;
    let phi = ScalarExpr::parse("exp(x)", &coords)?;
    for p in [[0.1, 0.2, -0.3, 0.4], [-0.5, 0.7, 0.2, -0.1]] {
        let c = conformal_weyl_divergence(&gbar, &phi, &p)?;
        println!(
            "at {p:?}: residual {:.2e}, sign-as-printed residual {:.2e}, scale {:.3}",
            c.residual, c.literal_residual, c.scale
        );
    }
    let k = curvature(&gbar, &[0.1, 0.2, -0.3, 0.4])?;
    let ratio = k
        .weyl_div
        .iter()
        .zip(k.cotton.iter())
        .filter(|(_, c)| c.abs() > 1e-8)
        .map(|(w, c)| w / c)
        .next();
    println!("div C / Cotton = {ratio:?} (n = 4 gives 1/2)");
    Ok(())
}
