//! Marker-centroid streams: CSV rows `frame_idx,marker_x,marker_y`.
//!
//! A stream is a directory of such files (or a single file). Rows are
//! grouped by frame index; frames come out in ascending order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::fieldio;

pub const HEADER: &str = "frame_idx,marker_x,marker_y";

pub type Frames = BTreeMap<u64, Vec<[f64; 2]>>;

pub fn parse_into(text: &str, path: &Path, frames: &mut Frames) -> Result<()> {
    let err = |line: usize, message: String| CliError::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(err(1, format!("expected header {HEADER:?}"))),
    }
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = k + 1;
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(err(ln, format!("expected 3 columns, found {}", parts.len())));
        }
        let frame: u64 = parts[0].parse().map_err(|_| err(ln, format!("bad frame index {:?}", parts[0])))?;
        let mut p = [0.0f64; 2];
        for (c, cell) in parts[1..].iter().enumerate() {
            p[c] = cell.parse().map_err(|_| err(ln, format!("not a number: {cell:?}")))?;
            if !p[c].is_finite() {
                return Err(err(ln, "marker coordinates must be finite".into()));
            }
        }
        frames.entry(frame).or_default().push(p);
    }
    Ok(())
}

/// Every `*.csv` in `path` (sorted by name), or `path` itself when it is a file.
pub fn read_stream(path: &Path) -> Result<Frames> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| CliError::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut frames = Frames::new();
    for f in &files {
        parse_into(&fieldio::read_text(f)?, f, &mut frames)?;
    }
    if frames.is_empty() {
        return Err(CliError::Config(format!("{}: stream holds no marker rows", path.display())));
    }
    Ok(frames)
}

pub fn frame_to_string(frame: u64, markers: &[[f64; 2]]) -> String {
    let mut s = format!("{HEADER}\n");
    for p in markers {
        let _ = writeln!(s, "{frame},{},{}", p[0], p[1]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_group_by_frame() {
        let mut frames = Frames::new();
        let text = "frame_idx,marker_x,marker_y\n1,0.5,1\n0,0,0\n1,2,3\n";
        parse_into(text, Path::new("s.csv"), &mut frames).unwrap();
        assert_eq!(frames[&0], vec![[0.0, 0.0]]);
        assert_eq!(frames[&1], vec![[0.5, 1.0], [2.0, 3.0]]);
        let back = frame_to_string(1, &frames[&1]);
        assert_eq!(back, "frame_idx,marker_x,marker_y\n1,0.5,1\n1,2,3\n");
    }

    #[test]
    fn bad_rows_name_their_line() {
        let mut frames = Frames::new();
        let e = parse_into("frame_idx,marker_x,marker_y\n0,1,2\n0,x,2\n", Path::new("s.csv"), &mut frames).unwrap_err();
        assert!(e.to_string().starts_with("s.csv:3:"), "{e}");
    }
}
