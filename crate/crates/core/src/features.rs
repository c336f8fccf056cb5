//! Reduction of a displacement field to the three contact features.
//!
//! * `s_t`: norm of the vector sum over the raw field (shear).
//! * `s_n`: sum of vector norms over the curl-free component (pressure).
//! * `s_tau`: moments of the divergence-free component about the rotation
//!   centers found in the rotational potential, summed over all centers
//!   (torsion).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{self, VectorField2D};
use crate::math;
use crate::nhhd::{self, Decomposition, PoissonSolver, RotationCenter, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureTriple {
    /// Sum of norms over the curl-free component (mm).
    pub s_n: f64,
    /// Norm of the raw vector sum (mm).
    pub s_t: f64,
    /// Unit direction of the raw vector sum, `None` when `s_t == 0`.
    pub s_t_direction: Option<[f64; 2]>,
    /// Signed total moment about the rotation centers (mm²).
    pub s_tau: f64,
}

impl FeatureTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.s_n, self.s_t, self.s_tau]
    }
}

/// Features plus the intermediate results they were computed from.
#[derive(Debug, Clone)]
pub struct FeatureReport {
    pub features: FeatureTriple,
    pub decomposition: Decomposition,
    pub centers: Vec<RotationCenter>,
}

/// Runs the full pipeline with the default Poisson solver.
pub fn compute_features(f: &VectorField2D, significance: f64) -> Result<FeatureTriple> {
    let solver = PoissonSolver::new(*f.grid(), &SolverConfig::default())?;
    Ok(compute_features_using(f, significance, &solver)?.features)
}

pub fn compute_features_using(f: &VectorField2D, significance: f64, solver: &PoissonSolver) -> Result<FeatureReport> {
    let sum = field::norm_of_sum(f);
    let decomposition = nhhd::decompose_using(f, solver)?;
    let s_n = field::sum_norms(&decomposition.d);
    let centers = nhhd::locate_rotation_centers(&decomposition.potential_r, significance);
    let s_tau = centers.iter().map(|c| field::moment_sum(&decomposition.r, c.position)).sum();
    Ok(FeatureReport {
        features: FeatureTriple { s_n, s_t: sum.magnitude, s_t_direction: sum.direction, s_tau },
        decomposition,
        centers,
    })
}

/// Load pattern a field was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PatternKind {
    Divergence,
    Unidirectional,
    Rotational,
}

impl PatternKind {
    pub const ALL: [PatternKind; 3] = [PatternKind::Divergence, PatternKind::Unidirectional, PatternKind::Rotational];

    fn index(self) -> usize {
        match self {
            PatternKind::Divergence => 0,
            PatternKind::Unidirectional => 1,
            PatternKind::Rotational => 2,
        }
    }
}

/// Feature responses to the three pure patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosstalkReport {
    /// Mean raw `(s_n, s_t, |s_tau|)` per pattern row.
    pub raw: [[f64; 3]; 3],
    /// `raw[i][j] / raw[j][j]`: response of feature `j` to pattern `i`
    /// relative to its response to its own pattern. The diagonal is 1.
    pub normalized: [[f64; 3]; 3],
}

impl CrosstalkReport {
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    m = m.max(self.normalized[i][j]);
                }
            }
        }
        m
    }
}

/// Measures how strongly each feature responds to the wrong pattern.
///
/// Every pattern kind must appear at least once; repeated kinds are averaged.
/// Features carry different units (mm vs mm²), so each column is normalized
/// by the feature's response to its matching pattern.
pub fn feature_crosstalk_report(patterns: &[(PatternKind, VectorField2D)], significance: f64) -> Result<CrosstalkReport> {
    let mut raw = [[0.0; 3]; 3];
    let mut counts = [0usize; 3];
    let mut solver: Option<PoissonSolver> = None;
    for (kind, f) in patterns {
        let s = match &solver {
            Some(s) if s.grid() == f.grid() => s,
            _ => solver.insert(PoissonSolver::new(*f.grid(), &SolverConfig::default())?),
        };
        let t = compute_features_using(f, significance, s)?.features;
        let row = kind.index();
        raw[row][0] += t.s_n;
        raw[row][1] += t.s_t;
        raw[row][2] += t.s_tau.abs();
        counts[row] += 1;
    }
    for (row, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(Error::InvalidInput(alloc::format!(
                "missing {:?} pattern",
                PatternKind::ALL[row]
            )));
        }
        for x in raw[row].iter_mut() {
            *x /= n as f64;
        }
    }
    let mut normalized = [[0.0; 3]; 3];
    for j in 0..3 {
        let diag = raw[j][j];
        for i in 0..3 {
            normalized[i][j] = if diag > 0.0 { raw[i][j] / diag } else { 0.0 };
        }
    }
    Ok(CrosstalkReport { raw, normalized })
}

/// Relative change `|a - b| / |b|`, or `|a|` when `b` is zero.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Norm of a feature's direction vector, 1 or 0.
pub fn direction_norm(t: &FeatureTriple) -> f64 {
    t.s_t_direction.map_or(0.0, |d| math::hypot(d[0], d[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sum_norms, GridSpec};
    use crate::surrogate::{self, SurrogateConfig};

    fn grid() -> GridSpec {
        GridSpec::centered(24, 24, 1.0).unwrap()
    }

    #[test]
    fn zero_field_has_zero_features() {
        let t = compute_features(&VectorField2D::zeros(grid()), 0.1).unwrap();
        assert_eq!((t.s_n, t.s_t, t.s_tau), (0.0, 0.0, 0.0));
        assert!(t.s_t_direction.is_none());
        assert_eq!(direction_norm(&t), 0.0);
    }

    #[test]
    fn unidirectional_pattern_drives_only_shear() {
        let g = grid();
        let cfg = SurrogateConfig::default();
        let raw = surrogate::gen_unidirectional_pattern(&cfg, g.center(), [0.0, 1.0], 1.0, g).unwrap();
        let sum = crate::field::norm_of_sum(&raw).magnitude;
        let f = raw.scaled(50.0 / sum);
        let t = compute_features(&f, 0.1).unwrap();
        assert!((t.s_t - 50.0).abs() < 1e-9);
        let d = t.s_t_direction.unwrap();
        assert!(d[0].abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
        assert!(t.s_n <= 0.15 * sum_norms(&f), "s_n {} vs {}", t.s_n, sum_norms(&f));

        let rot = surrogate::gen_rotational_pattern(g.center(), 1.0, 2.5, g).unwrap();
        let rot = surrogate::with_energy(&rot, f.energy());
        let t_rot = compute_features(&rot, 0.1).unwrap();
        assert!(t.s_tau.abs() <= 0.05 * t_rot.s_tau.abs());
    }

    #[test]
    fn counter_clockwise_rotation_gives_positive_torsion() {
        let g = grid();
        let f = surrogate::gen_rotational_pattern(g.center(), 0.4, 2.5, g).unwrap();
        let t = compute_features(&f, 0.1).unwrap();
        assert!(t.s_tau > 0.0);
        assert!(t.s_t <= 0.05 * sum_norms(&f));
        let cw = compute_features(&f.scaled(-1.0), 0.1).unwrap();
        assert!(cw.s_tau < 0.0);
    }

    #[test]
    fn features_scale_with_the_field() {
        let g = grid();
        let f = surrogate::random_smooth_field(g, 4).unwrap();
        let t = compute_features(&f, 0.1).unwrap();
        let a = 3.5;
        let ts = compute_features(&f.scaled(a), 0.1).unwrap();
        assert!(relative_change(ts.s_n, a * t.s_n) < 1e-12);
        assert!(relative_change(ts.s_t, a * t.s_t) < 1e-12);
        assert!(relative_change(ts.s_tau, a * t.s_tau) < 1e-12);
    }

    #[test]
    fn crosstalk_requires_every_pattern() {
        let g = grid();
        let f = surrogate::gen_rotational_pattern(g.center(), 1.0, 2.5, g).unwrap();
        assert!(feature_crosstalk_report(&[(PatternKind::Rotational, f)], 0.1).is_err());
    }
}
