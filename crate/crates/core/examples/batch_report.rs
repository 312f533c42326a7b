//! The batch front end driven from code: run a bundled manifest and print
//! the JSON report.
//!
//! `cargo run --example batch_report -- fixtures/desitter-flat.json`

use warpcurv::cli::{execute, render_json, render_text, Command, Overrides};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/s2xs2.json").to_string());
    let src = std::fs::read(&path)?;
    let overrides = Overrides {
        samples: Some(16),
        ..Default::default()
    };
    let report = execute(&src, Command::Report, &overrides)?;
    print!("{}", render_text(&report));
    let json = render_json(&report);
    println!("JSON report: {} bytes, first lines:", json.len());
    for line in json.lines().take(8) {
        println!("{line}");
    }
    std::process::exit(report.exit_code());
}
