//! Experiment drivers: static closure accuracy, manufactured-solution
//! convergence, the plane-source benchmark and the bound probes.

pub mod manufactured;
pub mod plane_source;
pub mod probes;
pub mod reference;
pub mod report;
pub mod static_accuracy;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use manufactured::{run_manufactured, ManufacturedConfig};
pub use plane_source::{run_plane_source, PlaneSourceConfig};
pub use static_accuracy::{run_static_accuracy, StaticTestConfig};

/// How a regularization or tolerance parameter depends on the mesh width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamRule {
    Fixed(f64),
    /// `factor * dx^k`.
    DxPowK {
        factor: f64,
    },
}

impl ParamRule {
    pub fn eval(&self, dx: f64, k: usize) -> f64 {
        match *self {
            ParamRule::Fixed(v) => v,
            ParamRule::DxPowK { factor } => factor * dx.powi(k as i32),
        }
    }
}

impl fmt::Display for ParamRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamRule::Fixed(v) => write!(f, "fixed({v:e})"),
            ParamRule::DxPowK { factor } if *factor == 1.0 => f.write_str("dx^k"),
            ParamRule::DxPowK { factor } => write!(f, "{factor}*dx^k"),
        }
    }
}

/// Parses the rule names accepted on the command line: `fixed`, `dx^k` and
/// `<factor>*dx^k`. `fixed` needs the value supplied separately.
pub fn parse_rule(s: &str, fixed_value: Option<f64>) -> Result<ParamRule> {
    let s = s.trim();
    if s == "fixed" {
        return fixed_value
            .map(ParamRule::Fixed)
            .ok_or_else(|| Error::argument("rule 'fixed' needs an explicit value"));
    }
    if s == "dx^k" {
        return Ok(ParamRule::DxPowK { factor: 1.0 });
    }
    if let Some(f) = s.strip_suffix("*dx^k") {
        let factor = f64::from_str(f.trim()).map_err(|_| Error::argument(format!("bad rule factor in '{s}'")))?;
        return Ok(ParamRule::DxPowK { factor });
    }
    Err(Error::argument(format!("unknown parameter rule '{s}'")))
}

/// One line of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// Mesh width or cell count, whichever the table is indexed by.
    pub resolution: f64,
    pub error: f64,
    /// `log2` of the ratio of successive errors; absent on the first row.
    pub order: Option<f64>,
}

/// Attaches observed orders to `(resolution, error)` pairs. Resolutions are
/// assumed to double (cell counts) or halve (widths) between rows.
pub fn with_orders(rows: Vec<(f64, f64)>, resolution_is_width: bool) -> Vec<ConvergenceRow> {
    let mut out: Vec<ConvergenceRow> = Vec::with_capacity(rows.len());
    for (i, &(resolution, error)) in rows.iter().enumerate() {
        let order = (i > 0).then(|| {
            let (r0, e0) = rows[i - 1];
            let ratio = if resolution_is_width {
                r0 / resolution
            } else {
                resolution / r0
            };
            (e0 / error).ln() / ratio.ln()
        });
        out.push(ConvergenceRow {
            resolution,
            error,
            order,
        });
    }
    out
}
