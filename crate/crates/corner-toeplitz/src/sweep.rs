//! Deterministic parameter sweeps producing phase-diagram tables.
//!
//! A sweep evaluates one invariant over a 1- or 2-axis linear parameter grid
//! and renders the outcomes as a CSV table (and optionally an SVG heatmap).
//! Grid points are independent, so evaluation fans out across a thread pool;
//! rows are always emitted in row-major grid order — the last axis fastest —
//! regardless of completion order, and identical invocations produce
//! byte-identical output.
//!
//! Failures are split into two classes.  Pointwise failures — an uncertified
//! or closed edge gap, window disagreement, a filter rejection — are expected
//! on and near phase boundaries, and turn into `NA` rows carrying the reason.
//! Structural failures (an invalid model or region) abort the whole sweep,
//! since every other row would be equally meaningless.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::invariants::{InvariantReport, InvariantValue};

/// One sweep axis: a named model parameter scanned over an inclusive,
/// uniformly spaced grid.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    name: String,
    start: f64,
    stop: f64,
    count: usize,
}

impl SweepAxis {
    pub fn new(name: &str, start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidSpec(format!(
                "sweep axis `{name}` needs at least 2 points, got {count}"
            )));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "sweep axis `{name}` has a non-finite endpoint"
            )));
        }
        Ok(SweepAxis { name: name.to_string(), start, stop, count })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The inclusive grid `start, …, stop` with `count` points.
    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

/// A row-major product grid over one or two axes.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    axes: Vec<SweepAxis>,
}

impl SweepGrid {
    pub fn new(axes: Vec<SweepAxis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidSpec(format!(
                "sweeps support 1 or 2 axes, got {}",
                axes.len()
            )));
        }
        Ok(SweepGrid { axes })
    }

    pub fn axes(&self) -> &[SweepAxis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(SweepAxis::count).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All grid points in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self.axes.len() {
            1 => self.axes[0].values().into_iter().map(|v| vec![v]).collect(),
            _ => {
                let a = self.axes[0].values();
                let b = self.axes[1].values();
                let mut out = Vec::with_capacity(a.len() * b.len());
                for &x in &a {
                    for &y in &b {
                        out.push(vec![x, y]);
                    }
                }
                out
            }
        }
    }
}

/// Outcome of one grid point.  `value` is `None` when the point failed
/// pointwise; `reason` then carries the failure text.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub value: Option<InvariantValue>,
    pub converged: bool,
    pub min_gap: Option<f64>,
    pub reason: String,
}

/// Failures that invalidate a single grid point but not the sweep.
fn is_pointwise(err: &Error) -> bool {
    matches!(
        err,
        Error::Gapless(_)
            | Error::Precondition(_)
            | Error::MethodDisagreement(_)
            | Error::NonConvergence(_)
            | Error::FilterFailure(_)
            | Error::Numerical(_)
    )
}

/// Evaluates `eval` on every grid point concurrently and collects the rows in
/// deterministic row-major order.
pub fn run_sweep<F>(grid: &SweepGrid, eval: F) -> Result<Vec<SweepRow>>
where
    F: Fn(&[f64]) -> Result<InvariantReport> + Sync,
{
    let points = grid.points();
    let rows: Vec<Result<SweepRow>> = points
        .par_iter()
        .map(|p| match eval(p) {
            Ok(report) => Ok(SweepRow {
                params: p.clone(),
                value: Some(report.value),
                converged: report.diagnostics.converged,
                min_gap: report.diagnostics.min_edge_gap,
                reason: String::new(),
            }),
            Err(err) if is_pointwise(&err) => Ok(SweepRow {
                params: p.clone(),
                value: None,
                converged: false,
                min_gap: None,
                reason: err.to_string(),
            }),
            Err(err) => Err(err),
        })
        .collect();
    rows.into_iter().collect()
}

/// Fixed scientific float formatting: 12 significant digits, for byte-exact
/// golden files.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Quotes a CSV field when it contains a separator, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders sweep rows as CSV: one header row, `.` decimals, comma separators,
/// LF line endings.  Schema: the axis names, then `value`, `converged`,
/// `min_gap`, `reason`.
pub fn render_csv(grid: &SweepGrid, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = grid.axes().iter().map(SweepAxis::name).collect();
    let _ = writeln!(out, "{},value,converged,min_gap,reason", names.join(","));
    for row in rows {
        let params: Vec<String> = row.params.iter().map(|&v| fmt_float(v)).collect();
        let value = row.value.as_ref().map_or_else(|| "NA".to_string(), |v| v.to_string());
        let gap = row.min_gap.map_or_else(|| "NA".to_string(), fmt_float);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            params.join(","),
            csv_field(&value),
            row.converged,
            gap,
            csv_field(&row.reason)
        );
    }
    out
}

/// Diverging cell color: white at zero, red for positive values, blue for
/// negative ones, saturating at the largest magnitude present.
fn cell_color(value: i64, vmax: i64) -> String {
    if value == 0 {
        return "#ffffff".to_string();
    }
    let t = (value.unsigned_abs() as f64 / vmax.max(1) as f64).min(1.0);
    let mix = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
    if value > 0 {
        format!("#{:02x}{:02x}{:02x}", mix(255.0, 178.0), mix(255.0, 24.0), mix(255.0, 43.0))
    } else {
        format!("#{:02x}{:02x}{:02x}", mix(255.0, 33.0), mix(255.0, 102.0), mix(255.0, 172.0))
    }
}

/// Renders a 2-axis sweep as a static SVG heatmap.  The first axis runs top
/// to bottom, the second left to right; `NA` rows are grey and non-converged
/// values are dimmed.  Pair-valued invariants cannot be drawn.
pub fn render_heatmap_svg(grid: &SweepGrid, rows: &[SweepRow]) -> Result<String> {
    if grid.axes().len() != 2 {
        return Err(Error::InvalidSpec("heatmap rendering needs a 2-axis sweep".into()));
    }
    if rows.len() != grid.len() {
        return Err(Error::InvalidSpec(format!(
            "row count {} does not match the {}-point grid",
            rows.len(),
            grid.len()
        )));
    }
    let mut vmax = 1i64;
    for row in rows {
        match row.value {
            Some(InvariantValue::Int(v)) => vmax = vmax.max(v.abs()),
            Some(InvariantValue::Pair(..)) => {
                return Err(Error::InvalidSpec(
                    "heatmap rendering needs a scalar-valued invariant".into(),
                ))
            }
            None => {}
        }
    }
    let (rows_n, cols_n) = (grid.axes()[0].count(), grid.axes()[1].count());
    let cell = 12usize;
    let margin = 46usize;
    let width = margin + cols_n * cell + 10;
    let height = margin + rows_n * cell + 10;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");
    for (k, row) in rows.iter().enumerate() {
        let (i, j) = (k / cols_n, k % cols_n);
        let x = margin + j * cell;
        let y = margin + i * cell;
        let (fill, opacity) = match row.value {
            Some(InvariantValue::Int(v)) => {
                (cell_color(v, vmax), if row.converged { 1.0 } else { 0.45 })
            }
            _ => ("#bbbbbb".to_string(), 1.0),
        };
        let _ = writeln!(
            svg,
            "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{fill}\" \
             fill-opacity=\"{opacity:.2}\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>"
        );
    }
    let a0 = &grid.axes()[0];
    let a1 = &grid.axes()[1];
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
        margin + cols_n * cell / 2,
        margin - 30,
        a1.name()
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\" \
         transform=\"rotate(-90 {} {})\">{}</text>",
        margin - 30,
        margin + rows_n * cell / 2,
        margin - 30,
        margin + rows_n * cell / 2,
        a0.name()
    );
    for (value, x, anchor) in [
        (a1.values()[0], margin, "start"),
        (a1.values()[cols_n - 1], margin + cols_n * cell, "end"),
    ] {
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{}\" font-size=\"8\" text-anchor=\"{anchor}\">{value}</text>",
            margin - 14
        );
    }
    for (value, y) in [
        (a0.values()[0], margin + 8),
        (a0.values()[rows_n - 1], margin + rows_n * cell),
    ] {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{y}\" font-size=\"8\" text-anchor=\"end\">{value}</text>",
            margin - 4
        );
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::InvariantKind;

    fn axis(name: &str, count: usize) -> SweepAxis {
        SweepAxis::new(name, -1.0, 1.0, count).unwrap()
    }

    #[test]
    fn grid_points_are_row_major_with_last_axis_fastest() {
        let grid = SweepGrid::new(vec![axis("a", 2), axis("b", 3)]).unwrap();
        let pts = grid.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![-1.0, -1.0]);
        assert_eq!(pts[1], vec![-1.0, 0.0]);
        assert_eq!(pts[2], vec![-1.0, 1.0]);
        assert_eq!(pts[3], vec![1.0, -1.0]);
    }

    #[test]
    fn axis_rejects_degenerate_grids() {
        assert!(SweepAxis::new("a", 0.0, 1.0, 1).is_err());
        assert!(SweepAxis::new("a", 0.0, f64::NAN, 4).is_err());
        assert!(SweepGrid::new(vec![]).is_err());
        assert!(SweepGrid::new(vec![axis("a", 2), axis("b", 2), axis("c", 2)]).is_err());
    }

    #[test]
    fn pointwise_failures_become_na_rows_and_structural_ones_abort() {
        let grid = SweepGrid::new(vec![axis("g", 3)]).unwrap();
        let rows = run_sweep(&grid, |p| {
            if p[0] == 0.0 {
                Err(Error::Gapless("closed at the midpoint".into()))
            } else {
                Ok(InvariantReport::winding(p[0] as i64))
            }
        })
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].value, Some(InvariantValue::Int(-1)));
        assert!(rows[1].value.is_none());
        assert!(rows[1].reason.contains("midpoint"));
        assert!(!rows[1].converged);
        assert_eq!(rows[2].value, Some(InvariantValue::Int(1)));
        assert_eq!(rows[0].reason, "");

        let aborted = run_sweep(&grid, |p| {
            if p[0] > 0.0 {
                Err(Error::InvalidSpec("bad model".into()))
            } else {
                Ok(InvariantReport::winding(0))
            }
        });
        assert!(matches!(aborted, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn csv_schema_is_stable_and_quoted() {
        let grid = SweepGrid::new(vec![axis("gx", 2), axis("gy", 2)]).unwrap();
        let rows = run_sweep(&grid, |p| {
            if p[0] < 0.0 {
                Ok(InvariantReport::winding(1))
            } else {
                Err(Error::Precondition("edge gap failed, certification".into()))
            }
        })
        .unwrap();
        let csv = render_csv(&grid, &rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "gx,gy,value,converged,min_gap,reason");
        assert_eq!(lines[1], "-1.00000000000e0,-1.00000000000e0,1,true,NA,");
        assert!(lines[3].ends_with(",NA,false,NA,\"precondition failed: edge gap failed, certification\""));
        assert_eq!(lines.len(), 5);
        // Byte-identical on re-render.
        assert_eq!(csv, render_csv(&grid, &run_sweep(&grid, |p| {
            if p[0] < 0.0 {
                Ok(InvariantReport::winding(1))
            } else {
                Err(Error::Precondition("edge gap failed, certification".into()))
            }
        }).unwrap()));
    }

    #[test]
    fn heatmap_svg_draws_one_cell_per_point() {
        let grid = SweepGrid::new(vec![axis("gx", 3), axis("gy", 4)]).unwrap();
        let rows = run_sweep(&grid, |p| {
            if p[0] == 0.0 && p[1] == 1.0 {
                Err(Error::Gapless("boundary".into()))
            } else {
                Ok(InvariantReport {
                    kind: InvariantKind::CornerSignature,
                    value: InvariantValue::Int(if p[0] < 0.0 { -1 } else { 1 }),
                    diagnostics: crate::invariants::InvariantReport::winding(0).diagnostics,
                })
            }
        })
        .unwrap();
        let svg = render_heatmap_svg(&grid, &rows).unwrap();
        assert_eq!(svg.matches("<rect x=").count(), 12);
        assert!(svg.contains("#bbbbbb"));
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(render_heatmap_svg(&SweepGrid::new(vec![axis("a", 2)]).unwrap(), &rows).is_err());
    }
}
