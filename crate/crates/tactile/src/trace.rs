//! Grasp trace CSV: `t,d_g,f_n_l,f_t_l,f_n_r,f_t_r,ratio_l,ratio_r,phase_l,phase_r,slip_flag`.

use std::fmt::Write as _;
use std::path::Path;

use tactile_core::grasp::GraspState;

use crate::error::{CliError, Result};

pub const HEADER: &str = "t,d_g,f_n_l,f_t_l,f_n_r,f_t_r,ratio_l,ratio_r,phase_l,phase_r,slip_flag";

/// Forces are the plant's true values; ratios are the values the controller
/// saw, written as `nan` when undefined.
pub fn to_csv(trace: &[GraspState]) -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for st in trace {
        let r = |x: f64| if x.is_finite() { x.to_string() } else { "nan".to_string() };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            st.time,
            st.d_g,
            st.f_left.f_n,
            st.f_left.f_t,
            st.f_right.f_n,
            st.f_right.f_t,
            r(st.sensed_ratio[0]),
            r(st.sensed_ratio[1]),
            st.phase[0].name(),
            st.phase[1].name(),
            u8::from(st.slipping)
        );
    }
    s
}

/// The columns needed for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub ratio: [f64; 2],
    pub slip: bool,
}

pub fn parse(text: &str, path: &Path) -> Result<Vec<TraceRow>> {
    let err = |line: usize, message: String| CliError::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(err(1, format!("expected header {HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = k + 1;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 11 {
            return Err(err(ln, format!("expected 11 columns, found {}", parts.len())));
        }
        let num = |s: &str| -> Result<f64> { s.trim().parse().map_err(|_| err(ln, format!("not a number: {s:?}"))) };
        rows.push(TraceRow {
            t: num(parts[0])?,
            ratio: [num(parts[6])?, num(parts[7])?],
            slip: parts[10].trim() == "1",
        });
    }
    Ok(rows)
}
