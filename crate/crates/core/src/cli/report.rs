use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::{CheckVerdict, Report, Status};

/// Pretty JSON with every float written as `{:.16e}`, so reports are
/// byte-identical across runs and round-trip exactly.
struct SciFormatter(PrettyFormatter<'static>);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON rendering; non-finite floats become `null`.
pub fn render_json(report: &Report) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    report.serialize(&mut ser).expect("report serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn verdict_word(v: CheckVerdict) -> &'static str {
    match v {
        CheckVerdict::Pass => "pass",
        CheckVerdict::Fail => "FAIL",
        CheckVerdict::Info => "info",
        CheckVerdict::Member => "member",
        CheckVerdict::NonMember => "non-member",
        CheckVerdict::Indeterminate => "indeterminate",
    }
}

pub fn render_text(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "warpcurv {} {:?} {}",
        report.version,
        report.command,
        report.name.as_deref().unwrap_or("(unnamed)")
    );
    let _ = writeln!(s, "manifest sha256 {}", report.manifest_sha256);
    let _ = writeln!(
        s,
        "chart ({})  samples {}  atol {:.1e}  rtol {:.1e}",
        report.coords.join(", "),
        report.samples.len(),
        report.tolerances.atol,
        report.tolerances.rtol
    );
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &report.checks {
        let _ = write!(
            s,
            "  {:<width$}  {:>10.3e}  tol {:>9.2e}  {}",
            c.name,
            c.residual,
            c.tolerance,
            verdict_word(c.verdict)
        );
        if let Some(d) = &c.detail {
            let _ = write!(s, "  ({d})");
        }
        s.push('\n');
    }
    if let Some(cl) = &report.classification {
        let finest = cl
            .finest_class
            .map(|c| c.to_string())
            .unwrap_or_else(|| "none".into());
        let minimal: Vec<String> = cl.minimal_classes.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "finest class {finest}  minimal [{}]", minimal.join(", "));
    }
    let _ = writeln!(
        s,
        "status {}",
        match report.status {
            Status::Ok => "ok",
            Status::ResidualFailure => "residual failure",
        }
    );
    s
}
