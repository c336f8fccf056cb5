use super::*;
use crate::field::{curl_z, divergence, gradient, GridSpec};
use crate::surrogate::{gen_divergence_pattern, gen_rotational_pattern, random_smooth_field};

fn fft_config() -> SolverConfig {
    SolverConfig { method: SolverMethod::Fft, ..SolverConfig::default() }
}

#[test]
fn self_term_constant_matches_quadrature() {
    // midpoint rule for the mean of ln|x| over the centered unit square,
    // using the 8-fold symmetry: integrate over [0, 1/2]² and keep the mean
    let n = 4000;
    let step = 0.5 / n as f64;
    let mut acc = 0.0;
    for a in 0..n {
        let x = (a as f64 + 0.5) * step;
        for b in 0..n {
            let y = (b as f64 + 0.5) * step;
            acc += 0.5 * (x * x + y * y).ln();
        }
    }
    let mean = acc / (n * n) as f64;
    assert!((mean - green_self_term_constant()).abs() < 1e-6, "quadrature {mean}");
}

#[test]
fn zero_rhs_gives_zero_potential() {
    let g = GridSpec::centered(9, 7, 0.5).unwrap();
    let phi = solve_poisson_freespace(&ScalarField2D::zeros(g), &SolverConfig::default()).unwrap();
    assert!(phi.values().iter().all(|&x| x == 0.0));
}

#[test]
fn impulse_response_follows_log_profile() {
    let h = 0.5;
    let g = GridSpec::new(33, 33, h, [0.0, 0.0]).unwrap();
    let mut values = alloc::vec![0.0; g.len()];
    values[g.index(16, 16)] = 1.0;
    let rhs = ScalarField2D::new(g, values).unwrap();
    for config in [SolverConfig::default(), fft_config()] {
        let phi = solve_poisson_freespace(&rhs, &config).unwrap();
        let diff = phi.at(16 + 8, 16) - phi.at(16 + 4, 16);
        let want = h * h / (2.0 * core::f64::consts::PI) * core::f64::consts::LN_2;
        assert!((diff - want).abs() <= 0.05 * want, "{diff} vs {want}");
    }
}

#[test]
fn laplacian_of_solution_reproduces_smooth_rhs() {
    let g = GridSpec::centered(16, 16, 0.25).unwrap();
    let rhs = ScalarField2D::from_fn(g, |p| {
        (-(p[0] * p[0] + p[1] * p[1]) / 2.0).exp() - 0.6 * (-((p[0] - 0.4).powi(2) + (p[1] + 0.3).powi(2)) / 1.5).exp()
    })
    .unwrap();
    let phi = solve_poisson_freespace(&rhs, &SolverConfig::default()).unwrap();
    let lap = divergence(&gradient(&phi));
    let mut err = 0.0f64;
    for (i, j) in g.cells() {
        if g.is_interior(i, j, 2) {
            err = err.max((lap.at(i, j) - rhs.at(i, j)).abs());
        }
    }
    assert!(err <= 0.05 * rhs.max_abs(), "max interior Laplacian error {err}");
}

#[test]
fn direct_limit_is_enforced_without_fft() {
    let g = GridSpec::centered(20, 20, 1.0).unwrap();
    let cfg = SolverConfig { method: SolverMethod::Direct, direct_limit: 100 };
    assert!(matches!(
        PoissonSolver::new(g, &cfg),
        Err(crate::Error::DirectSolveTooLarge { cells: 400, limit: 100 })
    ));
    let cfg = SolverConfig { method: SolverMethod::Fft, direct_limit: 100 };
    assert!(PoissonSolver::new(g, &cfg).is_ok());
}

#[test]
fn fft_matches_direct_on_rectangular_grid() {
    let g = GridSpec::new(13, 21, 0.3, [1.0, -2.0]).unwrap();
    let rhs = divergence(&random_smooth_field(g, 5).unwrap());
    let a = solve_poisson_freespace(&rhs, &SolverConfig::default()).unwrap();
    let b = solve_poisson_freespace(&rhs, &fft_config()).unwrap();
    let scale = a.max_abs();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() <= 1e-10 * scale);
    }
}

#[test]
fn decomposing_zero_gives_zero() {
    let g = GridSpec::centered(8, 8, 1.0).unwrap();
    let dec = decompose(&VectorField2D::zeros(g)).unwrap();
    for f in [&dec.d, &dec.r, &dec.h] {
        assert_eq!(f.max_norm(), 0.0);
    }
    assert_eq!(dec.potential_d.max_abs(), 0.0);
    assert_eq!(dec.potential_r.max_abs(), 0.0);
}

#[test]
fn reconstruction_and_purity_on_smooth_fields() {
    let g = GridSpec::centered(32, 32, 0.5).unwrap();
    for seed in 0..5 {
        let f = random_smooth_field(g, seed).unwrap();
        let dec = decompose(&f).unwrap();
        let rebuilt = dec.d.add(&dec.r).unwrap().add(&dec.h).unwrap();
        assert!(f.sub(&rebuilt).unwrap().max_norm() <= 1e-12 * f.max_norm());

        let curl_f = curl_z(&f).interior_rms(1);
        let div_f = divergence(&f).interior_rms(1);
        assert!(curl_z(&dec.d).interior_rms(1) <= 0.05 * curl_f);
        assert!(divergence(&dec.r).interior_rms(1) <= 0.05 * div_f);
        assert!(divergence(&dec.h).interior_rms(2) <= 0.10 * div_f, "seed {seed}");
        assert!(curl_z(&dec.h).interior_rms(2) <= 0.10 * curl_f, "seed {seed}");
    }
}

#[test]
fn potentials_are_linear_in_the_input() {
    let g = GridSpec::centered(16, 16, 1.0).unwrap();
    let f = random_smooth_field(g, 1).unwrap();
    let k = random_smooth_field(g, 2).unwrap();
    let (a, b) = (0.8, -2.5);
    let lhs = decompose(&f.combine(a, &k, b).unwrap()).unwrap();
    let (df, dk) = (decompose(&f).unwrap(), decompose(&k).unwrap());
    let scale = lhs.potential_d.max_abs().max(lhs.potential_r.max_abs());
    for idx in 0..g.len() {
        let want_d = a * df.potential_d.values()[idx] + b * dk.potential_d.values()[idx];
        let want_r = a * df.potential_r.values()[idx] + b * dk.potential_r.values()[idx];
        assert!((lhs.potential_d.values()[idx] - want_d).abs() <= 1e-12 * scale);
        assert!((lhs.potential_r.values()[idx] - want_r).abs() <= 1e-12 * scale);
    }
}

fn interior_ratio(num: &VectorField2D, den: &VectorField2D) -> f64 {
    num.interior_energy(2) / den.interior_energy(2)
}

#[test]
fn diverging_pattern_lands_in_curl_free_part() {
    let g = GridSpec::centered(32, 32, 1.0).unwrap();
    let f = gen_divergence_pattern([0.0, 0.0], 1.0, 3.0, g).unwrap();
    let dec = decompose(&f).unwrap();
    assert!(interior_ratio(&dec.r, &dec.d) <= 0.05);
    assert!(interior_ratio(&dec.h, &dec.d) <= 0.15);
}

#[test]
fn rotational_pattern_lands_in_divergence_free_part() {
    let g = GridSpec::centered(32, 32, 1.0).unwrap();
    let f = gen_rotational_pattern([0.0, 0.0], 1.0, 3.0, g).unwrap();
    let dec = decompose(&f).unwrap();
    assert!(interior_ratio(&dec.d, &dec.r) <= 0.05);
}

#[test]
fn uniform_translation_is_harmonic() {
    let g = GridSpec::centered(24, 24, 1.0).unwrap();
    let f = VectorField2D::from_fn(g, |_| [0.4, -0.3]).unwrap();
    let dec = decompose(&f).unwrap();
    assert!(interior_ratio(&dec.d, &dec.h) <= 0.05);
    assert!(interior_ratio(&dec.r, &dec.h) <= 0.05);
}

#[test]
fn decomposing_curl_free_part_leaves_little_rotation() {
    let g = GridSpec::centered(32, 32, 0.5).unwrap();
    let f = random_smooth_field(g, 3).unwrap();
    let d = decompose(&f).unwrap().d;
    let again = decompose(&d).unwrap();
    assert!(again.r.interior_energy(2) <= 0.05 * d.interior_energy(2));
}

fn bump_field(g: GridSpec, centers: &[([f64; 2], f64)]) -> ScalarField2D {
    ScalarField2D::from_fn(g, |p| {
        centers
            .iter()
            .map(|(c, s)| s * (-((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / 4.0).exp())
            .sum()
    })
    .unwrap()
}

#[test]
fn rotation_centers_of_flat_potential() {
    let g = GridSpec::new(17, 17, 1.0, [0.0, 0.0]).unwrap();
    assert!(locate_rotation_centers(&ScalarField2D::zeros(g), 0.1).is_empty());
}

#[test]
fn single_bump_yields_one_positive_center() {
    let g = GridSpec::new(17, 17, 1.0, [0.0, 0.0]).unwrap();
    let r = bump_field(g, &[([8.0, 8.0], 1.0)]);
    let centers = locate_rotation_centers(&r, 0.1);
    assert_eq!(centers.len(), 1);
    assert_eq!(centers[0].polarity, Polarity::Positive);
    assert_eq!(centers[0].position, [8.0, 8.0]);
    assert_eq!(centers[0].potential_value, 1.0);
}

#[test]
fn bump_pair_yields_both_polarities() {
    let g = GridSpec::new(17, 17, 1.0, [0.0, 0.0]).unwrap();
    let r = bump_field(g, &[([4.0, 4.0], 1.0), ([12.0, 12.0], -1.0)]);
    let centers = locate_rotation_centers(&r, 0.1);
    assert_eq!(centers.len(), 2);
    assert_eq!(centers[0].polarity, Polarity::Positive);
    assert_eq!(centers[0].position, [4.0, 4.0]);
    assert_eq!(centers[1].polarity, Polarity::Negative);
    assert_eq!(centers[1].position, [12.0, 12.0]);
}

#[test]
fn ties_go_to_lowest_scan_index() {
    let g = GridSpec::new(4, 4, 1.0, [0.0, 0.0]).unwrap();
    let mut values = alloc::vec![0.0; 16];
    values[5] = 2.0;
    values[10] = 2.0;
    values[3] = -2.0;
    values[12] = -2.0;
    let centers = locate_rotation_centers(&ScalarField2D::new(g, values).unwrap(), 0.1);
    assert_eq!(centers[0].position, g.position(1, 1));
    assert_eq!(centers[1].position, g.position(3, 0));
}
