//! Per-cell results with their anchor, tolerance and verdict.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use ctxwb_solver::Status;
use serde::Serialize;

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
        Status::NumericalTrouble => "numerical-trouble",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Check {
    Near { anchor: f64, tol: f64 },
    AtMost { bound: f64, tol: f64 },
    AtLeast { bound: f64, tol: f64 },
    /// Infeasible counts as a pass.
    InfeasibleOrAtMost { bound: f64, tol: f64 },
    /// Boolean property decided by the caller.
    Holds,
}

impl Check {
    fn describe(&self) -> String {
        let slack = |tol: f64| if tol == 0.0 { String::new() } else { format!(" ± {tol:e}") };
        match *self {
            Check::Near { anchor, tol } => format!("= {anchor} ± {tol:e}"),
            Check::AtMost { bound, tol } => format!("<= {bound}{}", slack(tol)),
            Check::AtLeast { bound, tol } => format!(">= {bound}{}", slack(tol)),
            Check::InfeasibleOrAtMost { bound, tol } => format!("infeasible or <= {bound:.7}{}", slack(tol)),
            Check::Holds => "holds".into(),
        }
    }

    fn anchor(&self) -> Option<f64> {
        match *self {
            Check::Near { anchor, .. } => Some(anchor),
            Check::AtMost { bound, .. } | Check::AtLeast { bound, .. } | Check::InfeasibleOrAtMost { bound, .. } => {
                Some(bound)
            }
            Check::Holds => None,
        }
    }

    fn tol(&self) -> Option<f64> {
        match *self {
            Check::Near { tol, .. }
            | Check::AtMost { tol, .. }
            | Check::AtLeast { tol, .. }
            | Check::InfeasibleOrAtMost { tol, .. } => Some(tol),
            Check::Holds => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported without an anchor.
    Info,
}

/// A computed number (or its absence) with the solver status and wall time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub value: Option<f64>,
    pub status: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn measure(f: impl FnOnce() -> anyhow::Result<(f64, String)>) -> Self {
        let start = Instant::now();
        let r = f();
        let seconds = start.elapsed().as_secs_f64();
        match r {
            Ok((v, status)) => {
                let value = v.is_finite().then_some(v);
                Outcome { value, status, seconds }
            }
            Err(e) => Outcome { value: None, status: format!("error: {e:#}"), seconds },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub row: String,
    pub column: String,
    pub value: Option<f64>,
    pub status: String,
    pub check: Option<Check>,
    pub verdict: Verdict,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Cell {
    pub fn info(row: impl Into<String>, column: impl Into<String>, o: Outcome) -> Self {
        Cell {
            row: row.into(),
            column: column.into(),
            value: o.value,
            status: o.status,
            check: None,
            verdict: Verdict::Info,
            seconds: o.seconds,
            note: None,
        }
    }

    pub fn checked(row: impl Into<String>, column: impl Into<String>, o: Outcome, check: Check) -> Self {
        let mut c = Cell::info(row, column, o);
        c.verdict = if c.passes(check) { Verdict::Pass } else { Verdict::Fail };
        c.check = Some(check);
        c
    }

    /// Property cell; `value` is whatever quantity witnesses it.
    pub fn holds(row: impl Into<String>, column: impl Into<String>, ok: bool, value: Option<f64>, note: String) -> Self {
        Cell {
            row: row.into(),
            column: column.into(),
            value,
            status: if ok { "holds".into() } else { "violated".into() },
            check: Some(Check::Holds),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            seconds: 0.0,
            note: (!note.is_empty()).then_some(note),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn passes(&self, check: Check) -> bool {
        let optimal = self.status == "optimal" || self.status == "lower-bound";
        match (check, self.value) {
            (Check::InfeasibleOrAtMost { .. }, _) if self.status == "infeasible" => true,
            (_, None) => false,
            (_, Some(_)) if !optimal => false,
            (Check::Near { anchor, tol }, Some(v)) => (v - anchor).abs() <= tol,
            (Check::AtMost { bound, tol }, Some(v)) | (Check::InfeasibleOrAtMost { bound, tol }, Some(v)) => {
                v <= bound + tol
            }
            (Check::AtLeast { bound, tol }, Some(v)) => v >= bound - tol,
            (Check::Holds, _) => self.verdict == Verdict::Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub file: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetReport {
    pub preset: String,
    pub anchors_version: u32,
    pub backend: String,
    pub cells: Vec<Cell>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub curves: Vec<Curve>,
    pub seconds: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    preset: &'a str,
    row: &'a str,
    column: &'a str,
    value: Option<f64>,
    status: &'a str,
    check: String,
    anchor: Option<f64>,
    tol: Option<f64>,
    verdict: Verdict,
    seconds: f64,
    note: &'a str,
}

impl PresetReport {
    pub fn new(preset: &str, anchors_version: u32) -> Self {
        let backend = std::env::var(ctxwb_solver::BACKEND_ENV).unwrap_or_else(|_| "clarabel".into());
        PresetReport {
            preset: preset.into(),
            anchors_version,
            backend,
            cells: Vec::new(),
            notes: Vec::new(),
            curves: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| c.verdict == Verdict::Fail).collect()
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row && c.column == column)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "preset {} (anchors v{}, backend {}, {:.1}s)",
            self.preset, self.anchors_version, self.backend, self.seconds
        );
        let w_row = self.cells.iter().map(|c| c.row.len()).max().unwrap_or(3).max(3);
        let w_col = self.cells.iter().map(|c| c.column.len()).max().unwrap_or(6).max(6);
        let _ = writeln!(out, "{:w_row$}  {:w_col$}  {:>13}  {:<34}  {:7}  {:>8}", "row", "column", "value", "check", "verdict", "time");
        for c in &self.cells {
            let value = c.value.map_or_else(|| c.status.clone(), |v| format!("{v:.7}"));
            let check = c.check.map_or_else(String::new, |k| k.describe());
            let verdict = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Info => "-",
            };
            let _ = write!(
                out,
                "{:w_row$}  {:w_col$}  {:>13}  {:<34}  {:7}  {:>7.2}s",
                c.row, c.column, value, check, verdict, c.seconds
            );
            if let Some(n) = &c.note {
                let _ = write!(out, "  ({n})");
            }
            out.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(CsvRow {
                preset: &self.preset,
                row: &c.row,
                column: &c.column,
                value: c.value,
                status: &c.status,
                check: c.check.map_or_else(String::new, |k| k.describe()),
                anchor: c.check.and_then(|k| k.anchor()),
                tol: c.check.and_then(|k| k.tol()),
                verdict: c.verdict,
                seconds: c.seconds,
                note: c.note.as_deref().unwrap_or(""),
            })?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// `<preset>.csv`, `<preset>.json` and any curve files.
    pub fn write_to(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.preset)), self.to_csv()?)?;
        std::fs::write(dir.join(format!("{}.json", self.preset)), serde_json::to_string_pretty(self)?)?;
        for c in &self.curves {
            std::fs::write(dir.join(&c.file), &c.csv)?;
        }
        Ok(())
    }
}

/// Cell asserting that `values` are nondecreasing up to `tol`; the value is
/// the smallest consecutive slack.
pub fn ordering(row: &str, column: &str, values: &[(&str, Option<f64>)], tol: f64) -> Cell {
    let chain = values.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(" <= ");
    let missing: Vec<&str> = values.iter().filter(|(_, v)| v.is_none()).map(|(n, _)| *n).collect();
    if !missing.is_empty() {
        return Cell::holds(row, column, false, None, format!("{chain}; missing {}", missing.join(", ")));
    }
    let slack = values
        .windows(2)
        .map(|w| w[1].1.unwrap() - w[0].1.unwrap())
        .fold(f64::INFINITY, f64::min);
    Cell::holds(row, column, slack >= -tol, Some(slack), format!("{chain} within {tol:e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(v: f64) -> Outcome {
        Outcome { value: Some(v), status: "optimal".into(), seconds: 0.0 }
    }

    #[test]
    fn verdicts() {
        assert_eq!(Cell::checked("r", "c", ok(1.0), Check::Near { anchor: 1.0 + 1e-8, tol: 1e-7 }).verdict, Verdict::Pass);
        assert_eq!(Cell::checked("r", "c", ok(1.0), Check::Near { anchor: 1.1, tol: 1e-7 }).verdict, Verdict::Fail);
        assert_eq!(Cell::checked("r", "c", ok(0.5), Check::AtMost { bound: 0.4, tol: 0.2 }).verdict, Verdict::Pass);
        let inf = Outcome { value: None, status: "infeasible".into(), seconds: 0.0 };
        assert_eq!(Cell::checked("r", "c", inf.clone(), Check::InfeasibleOrAtMost { bound: 0.0, tol: 0.0 }).verdict, Verdict::Pass);
        assert_eq!(Cell::checked("r", "c", inf, Check::AtMost { bound: 1.0, tol: 0.0 }).verdict, Verdict::Fail);
    }

    #[test]
    fn ordering_cells() {
        assert_eq!(ordering("r", "o", &[("a", Some(1.0)), ("b", Some(1.0 - 1e-9))], 1e-8).verdict, Verdict::Pass);
        assert_eq!(ordering("r", "o", &[("a", Some(1.0)), ("b", Some(0.9))], 1e-8).verdict, Verdict::Fail);
        assert_eq!(ordering("r", "o", &[("a", None), ("b", Some(0.9))], 1e-8).verdict, Verdict::Fail);
    }

    #[test]
    fn csv_has_one_line_per_cell() {
        let mut r = PresetReport::new("t", 1);
        r.cells.push(Cell::checked("a", "S", ok(1.0), Check::Near { anchor: 1.0, tol: 0.0 }));
        r.cells.push(Cell::info("a", "T", ok(2.0)));
        assert_eq!(r.to_csv().unwrap().lines().count(), 3);
        assert!(r.render().contains("pass"));
    }
}
