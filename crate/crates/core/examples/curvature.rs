//! Full curvature pack of the round sphere and of the Schwarzschild exterior.

use warpcurv::geometry::{curvature, MetricField, Signature};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s2 = MetricField::diagonal(&["th", "ph"], &["1", "sin(th)^2"], Signature::Riemannian)?;
    let k = curvature(&s2, &[1.0, 0.2])?;
    println!("S2: R = {:.15}", k.scalar);
    println!("S2: Ric = {:.6}", k.ricci);

    let schw = MetricField::diagonal(
        &["t", "r", "th", "ph"],
        &["-(1 - 2/r)", "1/(1 - 2/r)", "r^2", "r^2*sin(th)^2"],
        Signature::Lorentzian,
    )?;
    let k = curvature(&schw, &[0.0, 4.0, 1.2, 0.3])?;
    let ricci_max = k.ricci.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let weyl_max = k.weyl.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("Schwarzschild at r = 4: max |Ric| = {ricci_max:.2e}, max |C| = {weyl_max:.4}");
    println!("Gamma^r_tt = {:.6} (expected m(r - 2m)/r^3 = {:.6})", k.gamma[[1, 0, 0]], 2.0 / 64.0);

    if let Err(e) = curvature(&schw, &[0.0, 2.0, 1.2, 0.3]) {
        println!("at the horizon: {e}");
    }
    Ok(())
}
