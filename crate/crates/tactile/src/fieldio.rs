//! Field CSV files.
//!
//! The first line holds `nx,ny,spacing,origin_x,origin_y`, followed by one
//! line per cell in scan order: `i,j,u,v` for vector fields or `i,j,value`
//! for scalar fields. Floats are written with Rust's shortest round-trip
//! formatting, so load followed by save reproduces a file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tactile_core::field::{GridSpec, ScalarField2D, VectorField2D};

use crate::error::{CliError, Result};

fn header(g: &GridSpec) -> String {
    let o = g.origin();
    format!("{},{},{},{},{}\n", g.nx(), g.ny(), g.spacing(), o[0], o[1])
}

pub fn vector_to_string(f: &VectorField2D) -> String {
    let g = f.grid();
    let mut s = header(g);
    for (k, (i, j)) in g.cells().enumerate() {
        let _ = writeln!(s, "{i},{j},{},{}", f.u()[k], f.v()[k]);
    }
    s
}

pub fn scalar_to_string(f: &ScalarField2D) -> String {
    let g = f.grid();
    let mut s = header(g);
    for (k, (i, j)) in g.cells().enumerate() {
        let _ = writeln!(s, "{i},{j},{}", f.values()[k]);
    }
    s
}

struct Parser<'a> {
    path: &'a Path,
}

impl Parser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Parse { path: self.path.to_path_buf(), line, message: message.into() }
    }

    fn fields<'l>(&self, line_no: usize, line: &'l str, n: usize) -> Result<Vec<&'l str>> {
        let parts: Vec<&str> = line.trim_end_matches('\r').split(',').map(str::trim).collect();
        if parts.len() != n {
            return Err(self.err(line_no, format!("expected {n} comma-separated values, found {}", parts.len())));
        }
        Ok(parts)
    }

    fn float(&self, line_no: usize, s: &str) -> Result<f64> {
        let x: f64 = s.parse().map_err(|_| self.err(line_no, format!("not a number: {s:?}")))?;
        if !x.is_finite() {
            return Err(self.err(line_no, format!("non-finite value {s:?}")));
        }
        Ok(x)
    }

    fn int(&self, line_no: usize, s: &str) -> Result<usize> {
        s.parse().map_err(|_| self.err(line_no, format!("not a non-negative integer: {s:?}")))
    }

    /// Grid plus per-cell value columns, checked against scan order.
    fn parse(&self, text: &str, columns: usize) -> Result<(GridSpec, Vec<Vec<f64>>)> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
        let (hl, head) = lines.next().ok_or_else(|| self.err(1, "empty file, expected a grid header"))?;
        let h = self.fields(hl, head, 5)?;
        let grid = GridSpec::new(
            self.int(hl, h[0])?,
            self.int(hl, h[1])?,
            self.float(hl, h[2])?,
            [self.float(hl, h[3])?, self.float(hl, h[4])?],
        )
        .map_err(|e| self.err(hl, e.to_string()))?;
        let mut values = vec![Vec::with_capacity(grid.len()); columns];
        let mut last_line = hl;
        for (i, j) in grid.cells() {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| self.err(last_line + 1, format!("missing row for cell ({i}, {j}); expected {} rows", grid.len())))?;
            last_line = ln;
            let parts = self.fields(ln, line, columns + 2)?;
            let (ci, cj) = (self.int(ln, parts[0])?, self.int(ln, parts[1])?);
            if (ci, cj) != (i, j) {
                return Err(self.err(ln, format!("expected cell ({i}, {j}), found ({ci}, {cj})")));
            }
            for (c, col) in values.iter_mut().enumerate() {
                col.push(self.float(ln, parts[c + 2])?);
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(self.err(ln, format!("unexpected extra row after {} cells", grid.len())));
        }
        Ok((grid, values))
    }
}

pub fn parse_vector(text: &str, path: &Path) -> Result<VectorField2D> {
    let (grid, mut cols) = Parser { path }.parse(text, 2)?;
    let v = cols.pop().unwrap();
    let u = cols.pop().unwrap();
    Ok(VectorField2D::new(grid, u, v)?)
}

pub fn parse_scalar(text: &str, path: &Path) -> Result<ScalarField2D> {
    let (grid, mut cols) = Parser { path }.parse(text, 1)?;
    Ok(ScalarField2D::new(grid, cols.pop().unwrap())?)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn load_vector(path: &Path) -> Result<VectorField2D> {
    parse_vector(&read_text(path)?, path)
}

pub fn load_scalar(path: &Path) -> Result<ScalarField2D> {
    parse_scalar(&read_text(path)?, path)
}

pub fn save_vector(path: &Path, f: &VectorField2D) -> Result<()> {
    write_text(path, &vector_to_string(f))
}

pub fn save_scalar(path: &Path, f: &ScalarField2D) -> Result<()> {
    write_text(path, &scalar_to_string(f))
}

/// `dir/stem_suffix.csv`.
pub fn sibling(dir: &Path, stem: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{stem}_{suffix}.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> VectorField2D {
        let g = GridSpec::new(3, 2, 0.5, [-1.0, 2.25]).unwrap();
        VectorField2D::from_fn(g, |p| [p[0] * 0.1 + 1e-17, -p[1] / 3.0]).unwrap()
    }

    #[test]
    fn vector_round_trip_is_exact() {
        let f = field();
        let text = vector_to_string(&f);
        let back = parse_vector(&text, Path::new("x.csv")).unwrap();
        assert_eq!(back, f);
        assert_eq!(vector_to_string(&back), text);
        assert!(text.starts_with("3,2,0.5,-1,2.25\n0,0,"));
    }

    #[test]
    fn scalar_round_trip_is_exact() {
        let g = GridSpec::new(2, 2, 1.0, [0.0, 0.0]).unwrap();
        let s = ScalarField2D::new(g, vec![0.1, -2.0, 3e-300, 7.0]).unwrap();
        let text = scalar_to_string(&s);
        assert_eq!(parse_scalar(&text, Path::new("s.csv")).unwrap(), s);
    }

    fn parse_err(text: &str) -> (usize, String) {
        match parse_vector(text, Path::new("bad.csv")).unwrap_err() {
            CliError::Parse { line, message, .. } => (line, message),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_err("").0, 1);
        assert_eq!(parse_err("2,2,1,0,0\n0,0,1,1\n1,0,x,1\n").0, 3);
        assert_eq!(parse_err("2,2,1,0,0\n0,0,1,1\n0,1,1,1\n").0, 3);
        assert_eq!(parse_err("2,2,1,0,0\n0,0,1,1\n1,0,1\n").0, 3);
        assert_eq!(parse_err("2,2,1,0,0\n0,0,1,1\n").0, 3);
        assert_eq!(parse_err("2,2,0,0,0\n").0, 1);
        let (line, msg) = parse_err("2,2,1,0,0\n0,0,1,1\n1,0,1,1\n0,1,1,1\n1,1,1,1\n9,9,9,9\n");
        assert_eq!(line, 6);
        assert!(msg.contains("extra"));
    }
}
