//! Ricci blocks of doubly warped spacetimes -f^2 dt^2 + sigma^2 g against the
//! intrinsic Lorentzian Ricci tensor.

use warpcurv::geometry::{MetricField, Signature};
use warpcurv::warped::{compare_spacetime_ricci, SpacetimeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("de Sitter, flat slicing", "exp(t)", "1", vec!["1", "1", "1"]),
        ("GRW with sigma = cosh(t)", "cosh(t)", "1", vec!["1", "1", "1"]),
        ("static, f = 2 + sin(x)cos(y)", "1", "2 + sin(x)*cos(y)", vec!["1", "1", "1"]),
        ("doubly warped", "1 + 0.3*t^2", "2 + sin(x)*cos(y)", vec!["1", "1 + 0.2*x^2", "1"]),
    ];
    for (label, sigma, f, diag) in cases {
        let base = MetricField::diagonal(&["x", "y", "z"], &diag, Signature::Riemannian)?;
        let st = SpacetimeSpec::new("t", sigma, base, f)?;
        let c = compare_spacetime_ricci(&st, &[0.4, 0.3, -0.2, 0.1], 1e-9)?;
        println!("{label}");
        for (reading, r) in &c.uv_residuals {
            println!("  (U,V) residual, {reading:?} sigma-diamond: {r:.2e}");
        }
        println!("  (t,U) residual: {:.2e}", c.tu_residual);
        println!(
            "  (t,t): intrinsic {:+.6}, printed {:+.6}, finding {:?}",
            c.intrinsic.tt, c.printed.tt, c.tt_finding
        );
    }
    Ok(())
}
