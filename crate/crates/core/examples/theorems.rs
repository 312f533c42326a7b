//! Residuals of the inheritance identities on a random-looking doubly warped
//! product, for random factor-tangent vectors.

use warpcurv::geometry::{MetricField, Signature};
use warpcurv::gray::{scalar_identity_residual, theorem_residual, TheoremId, TheoremTarget};
use warpcurv::warped::{build_doubly_warped, Factor, FactorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m1 = MetricField::parse(
        &["x0", "x1"],
        &[
            vec!["2.1 + 0.3*sin(0.8*x0)".into(), "0.1*x1".into()],
            vec!["0.1*x1".into(), "1.9*exp(0.15*x0)".into()],
        ],
        Signature::Riemannian,
    )?;
    let m2 = MetricField::diagonal(&["y0"], &["2 + 0.2*y0^2"], Signature::Riemannian)?;
    let spec = build_doubly_warped(
        FactorSpec::parse("M1", m1, "1.4 + 0.3*sin(0.9*x0 + 0.5*x1)")?,
        FactorSpec::parse("M2", m2, "exp(0.4*y0)")?,
    )?;
    let p = [0.3, -0.2, 0.6];
    let vectors = |i: Factor| -> Vec<Vec<f64>> {
        let seeds = [[0.7, -0.3, 0.5], [0.2, 0.9, -0.4], [-0.6, 0.1, 0.8]];
        seeds
            .iter()
            .map(|s| {
                let mut v = vec![0.0; spec.dim()];
                for (k, c) in spec.range(i).zip(s) {
                    v[k] = *c;
                }
                v
            })
            .collect()
    };
    for i in [Factor::First, Factor::Second] {
        let v = vectors(i);
        for id in [TheoremId::Th1, TheoremId::Th2, TheoremId::Th3, TheoremId::ThIa] {
            let t = theorem_residual(id, TheoremTarget::Product(&spec, i), &p, &v)?;
            print!("{:<6} on {:?}: lhs {:+.6e}  residual {:.2e}", id.name(), i, t.lhs, t.residual);
            if let Some(pr) = t.printed_residual {
                print!("  (printed form {pr:.2e})");
            }
            println!();
        }
    }
    let s = scalar_identity_residual(&spec, &p)?;
    println!(
        "scalar curvature: intrinsic {:.6}, derived residual {:.2e}, printed residual {:.2e}",
        s.intrinsic_r, s.derived_residual, s.residual
    );
    Ok(())
}
