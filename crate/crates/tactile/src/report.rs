//! Cross-validation reports laid out like the paper-style RMSE table:
//! one column per method, mean and standard deviation rows per axis.

use std::fmt::Write as _;

use tactile_core::calib::{CvReport, ModelSpec, AXIS_NAMES};

/// Label for the model-complexity row: parameter count for lines, hidden
/// layer sizes for networks.
pub fn complexity_label(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::Ransac(_) => "2".to_string(),
        ModelSpec::MlpFeatures(s) | ModelSpec::MlpRaw(s) => {
            s.hidden.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
        }
    }
}

pub struct ReportColumn<'a> {
    pub spec: &'a ModelSpec,
    pub report: &'a CvReport,
}

pub fn table_csv(columns: &[ReportColumn<'_>]) -> String {
    let mut s = String::from("rmse,stat");
    for c in columns {
        let _ = write!(s, ",{}", c.spec.name());
    }
    s.push_str("\nmodel,complexity");
    for c in columns {
        let _ = write!(s, ",{}", complexity_label(c.spec));
    }
    s.push('\n');
    for (a, axis) in AXIS_NAMES.iter().enumerate() {
        for (stat, pick) in [("mean", 0), ("stdv", 1)] {
            let _ = write!(s, "{axis},{stat}");
            for c in columns {
                let v = if pick == 0 { c.report.mean[a] } else { c.report.std[a] };
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
    }
    s
}

/// One row per method and fold: `method,fold,objects,normal,tangential,torsion`.
pub fn folds_csv(columns: &[ReportColumn<'_>]) -> String {
    let mut s = String::from("method,fold,objects,normal,tangential,torsion\n");
    for c in columns {
        for (k, f) in c.report.folds.iter().enumerate() {
            let objects = f.objects.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            let _ = writeln!(s, "{},{k},{objects},{},{},{}", c.spec.name(), f.rmse[0], f.rmse[1], f.rmse[2]);
        }
    }
    s
}

/// Plain-text rendering for the terminal.
pub fn table_text(columns: &[ReportColumn<'_>]) -> String {
    let mut s = format!("{:<24}", "RMSE");
    for c in columns {
        let _ = write!(s, "{:>14}", c.spec.name());
    }
    let _ = write!(s, "\n{:<24}", "complexity");
    for c in columns {
        let _ = write!(s, "{:>14}", complexity_label(c.spec));
    }
    s.push('\n');
    for (a, axis) in AXIS_NAMES.iter().enumerate() {
        for (stat, pick) in [("mean", 0), ("stdv", 1)] {
            let _ = write!(s, "{:<24}", format!("{axis} {stat}"));
            for c in columns {
                let v = if pick == 0 { c.report.mean[a] } else { c.report.std[a] };
                let _ = write!(s, "{v:>14.6}");
            }
            s.push('\n');
        }
    }
    s
}
