//! Einstein-like class verdicts for a few metrics.

use warpcurv::geometry::{MetricField, Signature};
use warpcurv::gray::{classify, Tolerances};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("round S2", vec!["th", "ph"], vec!["1", "sin(th)^2"]),
        ("hyperbolic plane", vec!["x", "y"], vec!["1", "exp(2*x)"]),
        ("flat R3, spherical chart", vec!["r", "th", "ph"], vec!["1", "r^2", "r^2*sin(th)^2"]),
        ("rotation surface", vec!["s", "t"], vec!["1", "(2 + cos(s))^2"]),
        ("generic 3-metric", vec!["x", "y", "z"], vec!["1 + 0.3*y^2", "2 + sin(x)", "exp(0.2*x*z)"]),
    ];
    let samples_for = |n: usize| -> Vec<Vec<f64>> {
        (0..6).map(|k| (0..n).map(|d| 0.4 + 0.15 * ((k * 3 + d * 5) % 7) as f64).collect()).collect()
    };
    for (label, coords, diag) in cases {
        let m = MetricField::diagonal(&coords, &diag, Signature::Riemannian)?;
        let r = classify(&m, &samples_for(coords.len()), Tolerances::default())?;
        let verdicts: Vec<String> = r
            .classes
            .iter()
            .map(|c| format!("{}:{:?}({:.1e})", c.class, c.verdict, c.residual))
            .collect();
        let finest = r.finest_class.map(|c| c.to_string()).unwrap_or_else(|| "none".into());
        println!("{label:<26} finest {finest:<5} {}", verdicts.join(" "));
    }
    Ok(())
}
