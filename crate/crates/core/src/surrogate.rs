//! Analytic displacement fields standing in for the elastomer simulation and
//! the physical sensor.
//!
//! Each load axis produces one pattern: normal force a radial (diverging)
//! bump, tangential force a Gaussian-enveloped translation, torsion a
//! tangential (rotating) bump. The surrogate is linear in the loads unless
//! saturation is enabled, and deterministic for a given seed.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::field::{GridSpec, VectorField2D};
use crate::math;

/// Contact load in sensor coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoadTriple {
    /// Normal force (N), never negative.
    pub f_n: f64,
    /// Tangential force vector (N).
    pub f_t: [f64; 2],
    /// Torsion about the surface normal (N·mm), counter-clockwise positive.
    pub f_tau: f64,
    /// Contact center (mm).
    pub contact_center: [f64; 2],
    /// Contact radius (mm).
    pub contact_radius: f64,
}

impl LoadTriple {
    pub fn zero(contact_center: [f64; 2], contact_radius: f64) -> Self {
        Self { f_n: 0.0, f_t: [0.0, 0.0], f_tau: 0.0, contact_center, contact_radius }
    }

    pub fn f_t_magnitude(&self) -> f64 {
        math::hypot(self.f_t[0], self.f_t[1])
    }

    /// `[f_n, |f_t|, f_tau]`, the quantities the regressors predict.
    pub fn axes(&self) -> [f64; 3] {
        [self.f_n, self.f_t_magnitude(), self.f_tau]
    }

    pub fn validate(&self, max_friction: Option<f64>) -> Result<()> {
        let finite = self.f_n.is_finite()
            && self.f_t.iter().all(|x| x.is_finite())
            && self.f_tau.is_finite()
            && self.contact_center.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput("load has non-finite components".into()));
        }
        if self.f_n < 0.0 {
            return Err(Error::InvalidInput(format!("normal force must be >= 0, got {}", self.f_n)));
        }
        if self.contact_radius.is_nan() || self.contact_radius <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "contact radius must be > 0, got {}",
                self.contact_radius
            )));
        }
        if let Some(mu) = max_friction {
            let limit = mu * self.f_n;
            let f_t = self.f_t_magnitude();
            if f_t > limit {
                return Err(Error::PhysicalConsistency { f_t, limit });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurrogateConfig {
    /// Divergence-pattern amplitude per newton of normal force (mm/N).
    pub k_n: f64,
    /// Unidirectional-pattern amplitude per newton of shear (mm/N).
    pub k_t: f64,
    /// Rotational-pattern amplitude per N·mm of torsion (mm/(N·mm)).
    pub k_tau: f64,
    /// Width of the unidirectional Gaussian envelope (mm).
    pub falloff_sigma: f64,
    /// Standard deviation of per-component additive noise (mm).
    pub noise_sigma: f64,
    pub seed: u64,
    /// Amplitudes pass through `s * tanh(a / s)` when set.
    pub saturation: Option<f64>,
    /// Friction ceiling `μ_max` enforced on rendered loads when set.
    pub max_friction: Option<f64>,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            k_n: 0.05,
            k_t: 0.02,
            k_tau: 0.01,
            falloff_sigma: 16.0,
            noise_sigma: 0.0,
            seed: 0,
            saturation: None,
            max_friction: None,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        let gains = [self.k_n, self.k_t, self.k_tau];
        if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidInput("surrogate gains must be > 0".into()));
        }
        if !(self.falloff_sigma.is_finite() && self.falloff_sigma > 0.0) {
            return Err(Error::InvalidInput("falloff_sigma must be > 0".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidInput("noise_sigma must be >= 0".into()));
        }
        if let Some(s) = self.saturation {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidInput("saturation scale must be > 0".into()));
            }
        }
        Ok(())
    }

    fn shape(&self, amplitude: f64) -> f64 {
        match self.saturation {
            Some(s) => s * math::tanh(amplitude / s),
            None => amplitude,
        }
    }
}

/// Radial profile `ρ(r) = (r/R) exp(1 - r/R)`: zero at the center, peak 1 at `r = R`.
pub fn bump(r: f64, radius: f64) -> f64 {
    let x = r / radius;
    x * math::exp(1.0 - x)
}

fn radial_pattern(
    center: [f64; 2],
    amplitude: f64,
    radius: f64,
    grid: GridSpec,
    rotate: bool,
) -> Result<VectorField2D> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidInput(format!("radius must be > 0, got {radius}")));
    }
    VectorField2D::from_fn(grid, |p| {
        let dx = p[0] - center[0];
        let dy = p[1] - center[1];
        let r = math::hypot(dx, dy);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let s = amplitude * bump(r, radius) / r;
        if rotate {
            [-s * dy, s * dx]
        } else {
            [s * dx, s * dy]
        }
    })
}

/// Radial field pushing away from `center`, the normal-load pattern.
pub fn gen_divergence_pattern(center: [f64; 2], amplitude: f64, radius: f64, grid: GridSpec) -> Result<VectorField2D> {
    if amplitude < 0.0 {
        return Err(Error::InvalidInput("divergence amplitude must be >= 0".into()));
    }
    radial_pattern(center, amplitude, radius, grid, false)
}

/// Gaussian-enveloped translation along `direction`, the shear pattern.
pub fn gen_unidirectional_pattern(
    cfg: &SurrogateConfig,
    center: [f64; 2],
    direction: [f64; 2],
    amplitude: f64,
    grid: GridSpec,
) -> Result<VectorField2D> {
    let norm = math::hypot(direction[0], direction[1]);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("direction must be a unit vector, |d| = {norm}")));
    }
    let two_s2 = 2.0 * cfg.falloff_sigma * cfg.falloff_sigma;
    VectorField2D::from_fn(grid, |p| {
        let dx = p[0] - center[0];
        let dy = p[1] - center[1];
        let w = amplitude * math::exp(-(dx * dx + dy * dy) / two_s2);
        [w * direction[0], w * direction[1]]
    })
}

/// Tangential bump about `center`, the torsion pattern. Positive amplitude
/// rotates counter-clockwise.
pub fn gen_rotational_pattern(center: [f64; 2], amplitude: f64, radius: f64, grid: GridSpec) -> Result<VectorField2D> {
    radial_pattern(center, amplitude, radius, grid, true)
}

/// Renders the three single-axis patterns for `load` and adds seeded noise.
pub fn render_load(cfg: &SurrogateConfig, load: &LoadTriple, grid: GridSpec) -> Result<VectorField2D> {
    cfg.validate()?;
    load.validate(cfg.max_friction)?;
    let c = load.contact_center;
    let mut field = gen_divergence_pattern(c, cfg.shape(cfg.k_n * load.f_n), load.contact_radius, grid)?;
    let f_t = load.f_t_magnitude();
    if f_t > 0.0 {
        let dir = [load.f_t[0] / f_t, load.f_t[1] / f_t];
        let shear = gen_unidirectional_pattern(cfg, c, dir, cfg.shape(cfg.k_t * f_t), grid)?;
        field = field.add(&shear)?;
    }
    let twist = gen_rotational_pattern(c, cfg.shape(cfg.k_tau * load.f_tau), load.contact_radius, grid)?;
    field = field.add(&twist)?;
    if cfg.noise_sigma > 0.0 {
        field = add_noise(&field, cfg.noise_sigma, cfg.seed)?;
    }
    Ok(field)
}

fn add_noise(field: &VectorField2D, sigma: f64, seed: u64) -> Result<VectorField2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|_| Error::InvalidInput("bad noise sigma".into()))?;
    let u = field.u().iter().map(|x| x + normal.sample(&mut rng)).collect();
    let v = field.v().iter().map(|x| x + normal.sample(&mut rng)).collect();
    VectorField2D::new(*field.grid(), u, v)
}

/// Sampling ranges for [`gen_calibration_dataset`]. Each `[lo, hi]` pair is
/// drawn uniformly; equal bounds pin the value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetRanges {
    /// Normal force (N).
    pub f_n: [f64; 2],
    /// Tangential force magnitude (N); direction is uniform on the circle.
    pub f_t: [f64; 2],
    /// Torsion (N·mm).
    pub f_tau: [f64; 2],
    /// Per-object contact radius (mm).
    pub contact_radius: [f64; 2],
    /// Per-object unidirectional envelope width (mm).
    pub falloff_sigma: [f64; 2],
    /// Per-object relative gain perturbation, each gain scaled by `1 + U(-g, g)`.
    pub gain_perturbation: f64,
    /// Per-sample uniform jitter of the contact center around the grid center (mm).
    pub center_jitter: f64,
    /// Fraction of samples whose recorded label is grossly corrupted.
    pub outlier_fraction: f64,
}

impl Default for DatasetRanges {
    fn default() -> Self {
        Self {
            f_n: [1.0, 10.0],
            f_t: [0.0, 3.0],
            f_tau: [5.0, 30.0],
            contact_radius: [2.5, 2.5],
            falloff_sigma: [16.0, 16.0],
            gain_perturbation: 0.0,
            center_jitter: 0.0,
            outlier_fraction: 0.0,
        }
    }
}

/// One calibration sample: a rendered field plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub field: VectorField2D,
    /// Load the field was rendered from.
    pub load: LoadTriple,
    /// Recorded `[f_n, |f_t|, f_tau]`; differs from the truth for outliers.
    pub label: [f64; 3],
    pub object_id: usize,
    pub outlier: bool,
}

impl Sample {
    pub fn truth(&self) -> [f64; 3] {
        self.load.axes()
    }
}

fn draw(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        rng.random_range(range[0]..range[1])
    } else {
        range[0]
    }
}

/// Per-object parameters drawn once in [`gen_calibration_dataset`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectProfile {
    pub contact_radius: f64,
    pub config: SurrogateConfig,
}

/// Generates `n_objects * per_object` samples. Each object perturbs the
/// contact radius, envelope width and gains once; loads are then drawn
/// uniformly per sample. Sample `k` uses noise stream `k` of the seed.
pub fn gen_calibration_dataset(
    cfg: &SurrogateConfig,
    grid: GridSpec,
    n_objects: usize,
    per_object: usize,
    ranges: &DatasetRanges,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<ObjectProfile>)> {
    cfg.validate()?;
    if n_objects == 0 || per_object == 0 {
        return Err(Error::InvalidInput("need at least one object and one sample per object".into()));
    }
    if !(0.0..=1.0).contains(&ranges.outlier_fraction) {
        return Err(Error::InvalidInput("outlier_fraction must be in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = [
        ranges.f_n[1] - ranges.f_n[0],
        ranges.f_t[1] - ranges.f_t[0],
        ranges.f_tau[1] - ranges.f_tau[0],
    ];
    let g = ranges.gain_perturbation;
    let mut samples = Vec::with_capacity(n_objects * per_object);
    let mut profiles = Vec::with_capacity(n_objects);
    for object_id in 0..n_objects {
        let perturb = |rng: &mut ChaCha8Rng| if g > 0.0 { 1.0 + rng.random_range(-g..g) } else { 1.0 };
        let mut ocfg = *cfg;
        ocfg.k_n *= perturb(&mut rng);
        ocfg.k_t *= perturb(&mut rng);
        ocfg.k_tau *= perturb(&mut rng);
        ocfg.falloff_sigma = draw(&mut rng, ranges.falloff_sigma);
        let contact_radius = draw(&mut rng, ranges.contact_radius);
        profiles.push(ObjectProfile { contact_radius, config: ocfg });

        for _ in 0..per_object {
            let index = samples.len() as u64;
            let f_n = draw(&mut rng, ranges.f_n);
            let mut t_range = ranges.f_t;
            if let Some(mu) = cfg.max_friction {
                t_range[1] = t_range[1].min(mu * f_n);
                t_range[0] = t_range[0].min(t_range[1]);
            }
            let f_t_mag = draw(&mut rng, t_range);
            let angle = rng.random_range(0.0..core::f64::consts::TAU);
            let f_tau = draw(&mut rng, ranges.f_tau);
            let center = grid.center();
            let jitter = ranges.center_jitter;
            let contact_center = if jitter > 0.0 {
                [
                    center[0] + rng.random_range(-jitter..jitter),
                    center[1] + rng.random_range(-jitter..jitter),
                ]
            } else {
                center
            };
            let load = LoadTriple {
                f_n,
                f_t: [f_t_mag * math::cos(angle), f_t_mag * math::sin(angle)],
                f_tau,
                contact_center,
                contact_radius,
            };
            let outlier = ranges.outlier_fraction > 0.0 && rng.random::<f64>() < ranges.outlier_fraction;
            let mut label = load.axes();
            if outlier {
                for (axis, value) in label.iter_mut().enumerate() {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let width = span[axis].max(1e-3);
                    *value += sign * rng.random_range(0.5..1.0) * width;
                }
            }
            let mut scfg = ocfg;
            scfg.seed = derive_seed(seed, index);
            let field = render_load(&scfg, &load, grid)?;
            samples.push(Sample { field, load, label, object_id, outlier });
        }
    }
    Ok((samples, profiles))
}

/// Median per-cell displacement magnitude over all samples, the reference
/// scale for relative noise levels.
pub fn median_cell_magnitude(samples: &[Sample]) -> f64 {
    let mut norms = Vec::new();
    for s in samples {
        norms.extend(s.field.u().iter().zip(s.field.v()).map(|(u, v)| math::hypot(*u, *v)));
    }
    if norms.is_empty() {
        return 0.0;
    }
    math::median(&norms)
}

/// Independent per-sample seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng.random()
}

/// Random smooth field: a few Gaussian blobs with random vector weights,
/// placed inside the grid, plus a small uniform drift.
pub fn random_smooth_field(grid: GridSpec, seed: u64) -> Result<VectorField2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = grid.spacing();
    let o = grid.origin();
    let w = (grid.nx() - 1) as f64 * h;
    let ht = (grid.ny() - 1) as f64 * h;
    let extent = w.min(ht);
    let blobs: Vec<([f64; 2], f64, [f64; 2])> = (0..4)
        .map(|_| {
            let c = [o[0] + rng.random_range(0.25..0.75) * w, o[1] + rng.random_range(0.25..0.75) * ht];
            let s = rng.random_range(0.08..0.16) * extent;
            let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            (c, s, a)
        })
        .collect();
    let drift = [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)];
    VectorField2D::from_fn(grid, |p| {
        let mut out = drift;
        for (c, s, a) in &blobs {
            let dx = p[0] - c[0];
            let dy = p[1] - c[1];
            let g = math::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
            out[0] += a[0] * g;
            out[1] += a[1] * g;
        }
        out
    })
}

/// Rescales `f` so that its energy (sum of squared norms) equals `energy`.
pub fn with_energy(f: &VectorField2D, energy: f64) -> VectorField2D {
    let e = f.energy();
    if e == 0.0 {
        return f.clone();
    }
    f.scaled(math::sqrt(energy / e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{moment_sum, norm_of_sum, sum_norms};

    fn grid() -> GridSpec {
        GridSpec::centered(25, 25, 1.0).unwrap()
    }

    fn load(f_n: f64, f_t: [f64; 2], f_tau: f64) -> LoadTriple {
        LoadTriple { f_n, f_t, f_tau, contact_center: [0.0, 0.0], contact_radius: 3.0 }
    }

    #[test]
    fn zero_amplitude_patterns_are_zero() {
        let g = grid();
        let cfg = SurrogateConfig::default();
        assert_eq!(gen_divergence_pattern([0.0, 0.0], 0.0, 3.0, g).unwrap().max_norm(), 0.0);
        assert_eq!(gen_rotational_pattern([0.0, 0.0], 0.0, 3.0, g).unwrap().max_norm(), 0.0);
        assert_eq!(
            gen_unidirectional_pattern(&cfg, [0.0, 0.0], [1.0, 0.0], 0.0, g).unwrap().max_norm(),
            0.0
        );
    }

    #[test]
    fn divergence_pattern_properties() {
        let g = grid();
        for (amp, radius) in [(1.0, 2.0), (0.3, 3.5), (2.0, 5.0)] {
            let f = gen_divergence_pattern([0.0, 0.0], amp, radius, g).unwrap();
            let s = sum_norms(&f);
            assert!(norm_of_sum(&f).magnitude <= 0.02 * s);
            assert!(moment_sum(&f, [0.0, 0.0]).abs() <= 0.02 * s * radius);
            // the center cell carries no vector
            assert_eq!(f.at(12, 12), [0.0, 0.0]);
        }
        assert!(gen_divergence_pattern([0.0, 0.0], -1.0, 2.0, g).is_err());
    }

    #[test]
    fn unidirectional_pattern_properties() {
        let g = grid();
        let cfg = SurrogateConfig { falloff_sigma: 4.0, ..Default::default() };
        let f = gen_unidirectional_pattern(&cfg, [0.0, 0.0], [1.0, 0.0], 0.7, g).unwrap();
        let sum = norm_of_sum(&f);
        assert_eq!(sum.direction, Some([1.0, 0.0]));
        assert!(moment_sum(&f, [0.0, 0.0]).abs() <= 0.02 * sum_norms(&f) * cfg.falloff_sigma);
        // brute-force envelope integral
        let mut envelope = 0.0;
        for (i, j) in g.cells() {
            let p = g.position(i, j);
            envelope += (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * 16.0)).exp();
        }
        assert!((sum.magnitude - 0.7 * envelope).abs() < 1e-12 * sum.magnitude);
        let (k, _) = f
            .u()
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bk, bv), (k, &x)| if x > bv { (k, x) } else { (bk, bv) });
        assert_eq!(g.cell(k), (12, 12));
        assert!(gen_unidirectional_pattern(&cfg, [0.0, 0.0], [1.0, 1.0], 1.0, g).is_err());
    }

    #[test]
    fn rotational_pattern_properties() {
        let g = grid();
        let f = gen_rotational_pattern([0.0, 0.0], 1.0, 3.0, g).unwrap();
        assert!(norm_of_sum(&f).magnitude <= 0.02 * sum_norms(&f));
        let m = moment_sum(&f, [0.0, 0.0]);
        assert!(m > 0.0);
        let cw = gen_rotational_pattern([0.0, 0.0], -1.0, 3.0, g).unwrap();
        assert_eq!(moment_sum(&cw, [0.0, 0.0]), -m);
    }

    #[test]
    fn render_zero_and_single_axis_loads() {
        let g = grid();
        let cfg = SurrogateConfig::default();
        assert_eq!(render_load(&cfg, &load(0.0, [0.0, 0.0], 0.0), g).unwrap().max_norm(), 0.0);
        let f = render_load(&cfg, &load(5.0, [0.0, 0.0], 0.0), g).unwrap();
        let want = gen_divergence_pattern([0.0, 0.0], cfg.k_n * 5.0, 3.0, g).unwrap();
        assert_eq!(f, want);
    }

    #[test]
    fn render_is_deterministic_and_superposes() {
        let g = grid();
        let noisy = SurrogateConfig { noise_sigma: 0.01, seed: 9, ..Default::default() };
        let l = load(3.0, [0.5, -1.0], 12.0);
        assert_eq!(render_load(&noisy, &l, g).unwrap(), render_load(&noisy, &l, g).unwrap());

        let cfg = SurrogateConfig::default();
        let total = render_load(&cfg, &l, g).unwrap();
        let parts = [load(3.0, [0.0, 0.0], 0.0), load(0.0, [0.5, -1.0], 0.0), load(0.0, [0.0, 0.0], 12.0)];
        let mut sum = VectorField2D::zeros(g);
        for p in parts {
            sum = sum.add(&render_load(&cfg, &p, g).unwrap()).unwrap();
        }
        let diff = total.sub(&sum).unwrap();
        assert!(diff.max_norm() < 1e-15 * total.max_norm().max(1.0) * 10.0);
    }

    #[test]
    fn physical_consistency_is_enforced_when_enabled() {
        let g = grid();
        let cfg = SurrogateConfig { max_friction: Some(0.5), ..Default::default() };
        assert!(matches!(
            render_load(&cfg, &load(1.0, [1.0, 0.0], 0.0), g),
            Err(Error::PhysicalConsistency { .. })
        ));
        assert!(render_load(&cfg, &load(4.0, [1.0, 0.0], 0.0), g).is_ok());
        assert!(render_load(&cfg, &load(-1.0, [0.0, 0.0], 0.0), g).is_err());
    }

    #[test]
    fn dataset_shape_and_determinism() {
        let g = GridSpec::centered(12, 12, 1.0).unwrap();
        let cfg = SurrogateConfig { noise_sigma: 0.001, ..Default::default() };
        let ranges = DatasetRanges { gain_perturbation: 0.15, outlier_fraction: 0.1, ..Default::default() };
        let (a, profiles) = gen_calibration_dataset(&cfg, g, 6, 50, &ranges, 7).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(profiles.len(), 6);
        assert!(a.iter().all(|s| s.object_id < 6));
        for id in 0..6 {
            assert_eq!(a.iter().filter(|s| s.object_id == id).count(), 50);
        }
        let (b, _) = gen_calibration_dataset(&cfg, g, 6, 50, &ranges, 7).unwrap();
        assert_eq!(a, b);
        for p in &profiles {
            assert!((p.config.k_n / cfg.k_n - 1.0).abs() <= 0.15);
        }
        assert!(a.iter().any(|s| s.outlier));
        assert!(a.iter().filter(|s| !s.outlier).all(|s| s.label == s.truth()));
    }

    #[test]
    fn pinned_ranges_repeat_per_object() {
        let g = GridSpec::centered(10, 10, 1.0).unwrap();
        let cfg = SurrogateConfig::default();
        let ranges = DatasetRanges { f_n: [2.0, 2.0], f_t: [0.0, 0.0], f_tau: [3.0, 3.0], ..Default::default() };
        let (s, _) = gen_calibration_dataset(&cfg, g, 3, 1, &ranges, 1).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].field, s[1].field);
        assert_eq!(s[1].field, s[2].field);
    }
}
