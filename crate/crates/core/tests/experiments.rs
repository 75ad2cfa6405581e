use kacjl::fjlt::{derive_params, Algorithm, ConstantsConfig};
use kacjl::points::PointSet;
use kacjl::verify::*;
use kacjl::walk::{WalkKind, WalkSpec};
use nalgebra::{DMatrix, DVector};

#[test]
fn contraction_matches_exact_factor() {
    let r = contraction_experiment(10, 1, 2000, 3).unwrap();
    assert!(r.factor_within_3se, "{} vs {}", r.one_step_ratio, r.factor_exact);
    assert_eq!(r.series[0].mean_gap, 2.0);
}

#[test]
fn contraction_stays_under_envelope() {
    let r = contraction_experiment(12, 96, 500, 4).unwrap();
    assert!(r.envelope_ok);
    let csv = r.to_csv();
    assert!(csv.starts_with("t,mean_gap"));
    assert_eq!(csv.lines().count(), 98);
}

#[test]
fn first_moment_is_deterministic() {
    let r = moment_experiment(30, 1, 2.25, 200, 5).unwrap();
    assert!((r.estimate - 0.5).abs() < 1e-12);
    assert!(r.std_error < 1e-12);
    assert!(r.pass);
}

#[test]
fn second_moment_under_bound_at_d25() {
    let r = moment_experiment(25, 2, 2.25, 2000, 6).unwrap();
    assert!(r.hypothesis_ok);
    // The bound is 2^0 * 25^-1 / 2! = 0.02; the tighter 0.01 also holds.
    assert!((r.bound - 0.02).abs() < 1e-15);
    assert!(r.estimate <= 0.01 + 3.0 * r.std_error, "{}", r.estimate);
    assert!(r.pass);
}

#[test]
fn small_dimension_is_flagged() {
    let r = moment_experiment(10, 2, 2.25, 50, 0).unwrap();
    assert!(!r.hypothesis_ok);
}

/// `E[S_k(Rx)]` over all ordered pairs, computed exactly.
fn one_step_exact(x: &[f64], k: u32) -> f64 {
    let d = x.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut y = x.to_vec();
                y[i] = (x[i] + x[j]) * s;
                y[j] = (x[i] - x[j]) * s;
                total += s_k(&y, k);
            }
        }
    }
    total / (d * (d - 1)) as f64
}

#[test]
fn one_step_moment_recursion() {
    let mut e1 = vec![0.0; 5];
    e1[0] = 1.0;
    let r = moment_step_check(&e1, 2, 20_000, 7).unwrap();
    assert!(r.pass);
    let exact = one_step_exact(&e1, 2);
    assert!((exact - (0.6 / 24.0 + 0.4 / 48.0)).abs() < 1e-15);
    assert!(exact <= r.bound);
    assert!((r.estimate - exact).abs() <= 4.0 * r.std_error);
}

#[test]
fn one_step_bound_holds_for_generic_vectors() {
    let x = [0.5, -0.1, 0.7, 0.2, -0.3, 0.33];
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let x: Vec<f64> = x.iter().map(|v| v / norm).collect();
    for k in 1..5 {
        assert!(one_step_exact(&x, k) <= moment_step_bound(&x, k) + 1e-15, "k = {k}");
    }
}

#[test]
fn max_coordinate_at_ten_thousand() {
    let r = max_coord_experiment(10_000, 4.0, 1000, 8, None).unwrap();
    assert!(!r.vacuous);
    assert!(r.frequency <= 0.005, "{}", r.frequency);
}

#[test]
fn subset_mass_concentrates() {
    let r = subset_concentration_experiment(512, 100, 0.5, 8.0, 2.25, 1000, 9).unwrap();
    assert_eq!(r.k, 148);
    assert!(r.frequency <= 1e-2, "{}", r.frequency);
}

#[test]
fn gaussian_baseline_is_a_jl_map() {
    let (d, n, eps) = (512, 100, 0.3);
    let k = (8.0 * (n as f64).ln() / (eps * eps)).ceil() as usize;
    let pts = PointSet::random_unit(n, d, 10).unwrap();
    let passes = (0..50)
        .filter(|&seed| {
            let a = gaussian_baseline(d, k, seed).unwrap();
            let f = |x: &[f64]| Ok((&a * DVector::from_column_slice(x)).as_slice().to_vec());
            jl_distortion(f, &pts, eps).unwrap().pass
        })
        .count();
    assert!(passes * 3 >= 50 * 2, "{passes}/50");
}

#[test]
fn gaussian_baseline_preserves_norm_in_mean() {
    let (d, k) = (64, 16);
    let x: Vec<f64> = (0..d).map(|i| ((i as f64) * 0.7).sin()).collect();
    let nx2: f64 = x.iter().map(|v| v * v).sum();
    let xv = DVector::from_column_slice(&x);
    let vals: Vec<f64> = (0..10_000)
        .map(|seed| (gaussian_baseline(d, k, seed).unwrap() * &xv).norm_squared() / nx2)
        .collect();
    let (mean, se) = mean_and_se(&vals);
    assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} ± {se}");

    let cols: Vec<f64> = (0..200)
        .flat_map(|seed| {
            let a = gaussian_baseline(d, k, seed).unwrap();
            (0..d).map(move |c| a.column(c).norm_squared()).collect::<Vec<_>>()
        })
        .collect();
    let (mean, se) = mean_and_se(&cols);
    assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn symmetry_holds_after_mixing_and_fails_at_zero() {
    let ok = (0..10)
        .filter(|rep| {
            sign_symmetry_test(8, 200, WalkKind::Uniform, 400, 500 + rep)
                .unwrap()
                .indistinguishable
        })
        .count();
    assert!(ok >= 9, "{ok}/10");
    let r = sign_symmetry_test(8, 0, WalkKind::Uniform, 400, 7).unwrap();
    assert!(r.min_p_value < 0.01);
    let sora = sign_symmetry_test(8, 200, WalkKind::Sora, 400, 1).unwrap();
    assert_eq!(sora.statistics.len(), 3);
}

#[test]
fn permutation_walk_mixes() {
    let r = perm_mixing_tv(3, 200, 100_000, 11, 1.0).unwrap();
    assert!(r.tv <= 0.05, "{}", r.tv);
    let d = 4usize;
    let early = perm_mixing_tv(d, d as u64, 100_000, 12, 1.0).unwrap();
    let late_t = (5.0 * d as f64 * (d as f64).ln()).ceil() as u64;
    let late = perm_mixing_tv(d, late_t, 100_000, 12, 1.0).unwrap();
    assert!(late.tv <= early.tv - 2.0 * early.sigma.max(late.sigma) || late.tv < early.tv);
}

#[test]
fn krahmer_ward_instances() {
    let pts = PointSet::cube_vertices(8, 16, 13).unwrap();
    let orth = krahmer_ward_check(&DMatrix::identity(16, 16), 2, &pts, 0.6, 100, 1).unwrap();
    assert_eq!(orth.pass_rate, 1.0);
    let a = rademacher_matrix(64, 16, 13);
    let r = krahmer_ward_check(&a, 2, &pts, 0.6, 200, 13).unwrap();
    assert!(r.pass_rate >= 0.75, "{}", r.pass_rate);
}

#[test]
fn dirksen_trend() {
    let full = dirksen_subsample_check(16, 2, &[16], 5, 1, None).unwrap();
    assert!(full.rows[0].median_delta_s < 1e-12);
    let r = dirksen_subsample_check(16, 2, &[4, 12], 50, 14, None).unwrap();
    assert!(r.rows[1].median_delta_s <= r.rows[0].median_delta_s);
}

#[test]
fn distortion_of_identity_spec() {
    let spec = derive_params(100, 100, 0.1, Algorithm::Kac, &ConstantsConfig::default(), 0).unwrap();
    let pts = PointSet::random_unit(10, 100, 1).unwrap();
    let r = jl_distortion(|x| spec.map(x), &pts, 0.001).unwrap();
    assert!(r.pass && r.max_abs_distortion == 0.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    serde_json::to_string(&contraction_experiment(6, 10, 300, 1).unwrap()).unwrap(),
                    serde_json::to_string(&moment_experiment(25, 2, 2.25, 300, 1).unwrap()).unwrap(),
                    serde_json::to_string(&perm_mixing_tv(4, 10, 5000, 1, 1.0).unwrap()).unwrap(),
                )
            })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn walk_spec_json_keeps_full_seed() {
    let spec = WalkSpec::new(WalkKind::Sora, 5, 3, u64::MAX).unwrap();
    let back: WalkSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
}
