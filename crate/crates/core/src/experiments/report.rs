//! CSV and plain-text output for the experiment drivers.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::plane_source::Diagnostic;
use super::ConvergenceRow;

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn fmt_order(order: Option<f64>) -> String {
    order.map_or_else(String::new, |o| format!("{o:.4}"))
}

/// Columns `resolution,error,order`; the first order is left empty.
pub fn write_convergence_csv<W: io::Write>(out: W, rows: &[ConvergenceRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["resolution", "error", "order"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            format!("{}", r.resolution),
            format!("{:.6e}", r.error),
            fmt_order(r.order),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// Columns `x,u0,...,u{n-1}`.
pub fn write_profile_csv<W: io::Write>(out: W, profile: &[(f64, Vec<f64>)]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = profile.first().map_or(0, |p| p.1.len());
    let mut header = vec!["x".to_string()];
    header.extend((0..n).map(|i| format!("u{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for (x, u) in profile {
        let mut rec = vec![format!("{x:.10}")];
        rec.extend(u.iter().map(|v| format!("{v:.12e}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
}

/// Columns `time,mass,entropy`.
pub fn write_diagnostics_csv<W: io::Write>(out: W, diagnostics: &[Diagnostic]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "mass", "entropy"]).map_err(csv_err)?;
    for d in diagnostics {
        w.write_record([
            format!("{:.10}", d.time),
            format!("{:.15e}", d.mass),
            format!("{:.15e}", d.entropy),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// Two-column-per-table layout: resolution, error and order, one block per
/// labelled series.
pub fn render_convergence_table(
    title: &str,
    resolution_label: &str,
    series: &[(String, Vec<ConvergenceRow>)],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = write!(s, "{resolution_label:>12}");
    for (label, _) in series {
        let _ = write!(s, " | {:>12} {:>6}", label, "order");
    }
    s.push('\n');
    let rows = series.iter().map(|(_, r)| r.len()).max().unwrap_or(0);
    for i in 0..rows {
        let res = series
            .iter()
            .find_map(|(_, r)| r.get(i).map(|x| x.resolution))
            .unwrap_or(f64::NAN);
        let _ = write!(s, "{:>12}", format_resolution(res));
        for (_, r) in series {
            match r.get(i) {
                Some(row) => {
                    let _ = write!(
                        s,
                        " | {:>12.3e} {:>6}",
                        row.error,
                        row.order.map_or("-".into(), |o| format!("{o:.2}"))
                    );
                }
                None => {
                    let _ = write!(s, " | {:>12} {:>6}", "", "");
                }
            }
        }
        s.push('\n');
    }
    s
}

fn format_resolution(r: f64) -> String {
    if r >= 1.0 && r.fract() == 0.0 {
        format!("{r}")
    } else {
        let p = -r.log2();
        if (p - p.round()).abs() < 1e-12 {
            format!("2^-{}", p.round())
        } else {
            format!("{r:.4e}")
        }
    }
}

pub fn write_file(path: &Path, f: impl FnOnce(std::fs::File) -> io::Result<()>) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    f(std::fs::File::create(path)?)
}
