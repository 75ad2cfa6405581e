//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with its own `main` so the lines are printed even when everything
//! passes. Seeds are fixed: criterion `k` uses base seed `10 + k`.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use kacjl::bench::{scaling_experiment, ScalingOptions};
use kacjl::fjlt::{apply, apply_batch, derive_params, Algorithm, ConstantsConfig};
use kacjl::points::PointSet;
use kacjl::verify::*;
use kacjl::walk::WalkKind;
use nalgebra::DMatrix;

struct Counting;

thread_local! {
    static ALLOCS: Cell<u64> = const { Cell::new(0) };
}

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        ALLOCS.with(|c| c.set(c.get() + 1));
        System.alloc(layout)
    }
    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout)
    }
    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        ALLOCS.with(|c| c.set(c.get() + 1));
        System.realloc(ptr, layout, new_size)
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

fn allocations() -> u64 {
    ALLOCS.with(|c| c.get())
}

/// Heap allocations `apply` may make, whatever `d` is.
const APPLY_ALLOC_BUDGET: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_contraction_factor() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [5, 10, 25] {
        let r = contraction_experiment(d, 1, 2000, 11).unwrap();
        let z = (r.one_step_ratio - r.factor_exact) / r.one_step_std_error;
        pass &= r.factor_within_3se;
        parts.push(format!(
            "d={d}: {:.5} vs {:.5} (z={z:+.2})",
            r.one_step_ratio, r.factor_exact
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c2_envelope() -> Outcome {
    let d = 20u64;
    let r = contraction_experiment(d as usize, 8 * d, 2000, 12).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [0, d, 2 * d, 4 * d, 8 * d] {
        let p = &r.series[t as usize];
        pass &= p.mean_gap <= p.envelope + 3.0 * p.std_error;
        parts.push(format!("t={t}: {:.4} <= {:.4}", p.mean_gap, p.envelope));
    }
    outcome(pass, parts.join("; "))
}

fn c3_moments() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, p) in [(25, 2), (25, 3), (50, 2)] {
        let m = moment_experiment(d, p, 2.25, 5000, 13).unwrap();
        pass &= m.estimate <= m.bound + 3.0 * m.std_error;
        parts.push(format!(
            "(d={d},p={p}) t={} {:.3e}±{:.1e} <= {:.3e}",
            m.t, m.estimate, m.std_error, m.bound
        ));
    }
    let m = moment_experiment(25, 1, 2.25, 5000, 13).unwrap();
    let exact = (m.estimate - 0.5).abs() <= 1e-12 && m.std_error <= 1e-12;
    pass &= exact;
    parts.push(format!("p=1: {} se={:.1e}", m.estimate, m.std_error));
    outcome(pass, parts.join("; "))
}

fn c4_jl_success() -> Outcome {
    let (d, n, eps) = (1024, 500u64, 0.3);
    let c = ConstantsConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for alg in [Algorithm::Kac, Algorithm::Sora] {
        let mut ok = 0;
        let mut worst = 0.0f64;
        let mut k_out = 0;
        for i in 0..30u64 {
            let seed = 14_000 + i;
            let spec = derive_params(d, n, eps, alg, &c, seed).unwrap();
            assert_eq!(spec.algorithm, alg);
            k_out = spec.k_out;
            let pts = PointSet::random_unit(n as usize, d, seed).unwrap();
            let img = apply_batch(&spec, &pts).unwrap();
            let rows: Vec<&[f64]> = img.rows().collect();
            let r = distortion_from_images(&pts, &rows, eps).unwrap();
            worst = worst.max(r.max_abs_distortion);
            ok += r.pass as usize;
        }
        pass &= ok * 3 >= 30 * 2;
        parts.push(format!("{alg}: {ok}/30 (k_out~{k_out}, worst {worst:.3})"));
    }
    outcome(pass, parts.join("; "))
}

fn c5_memory_time() -> Outcome {
    let c = ConstantsConfig::default();
    let d_list: Vec<usize> = (12..=16).map(|e| 1usize << e).collect();
    let mut worst_allocs = 0;
    for &d in &d_list {
        for alg in [Algorithm::Kac, Algorithm::Ora, Algorithm::Sora] {
            let spec = derive_params(d, 10_000, 0.3, alg, &c, 15).unwrap();
            let mut buf: Vec<f64> = (0..d).map(|i| ((i % 17) as f64) - 8.0).collect();
            let before = allocations();
            let out = apply(&spec, &mut buf).unwrap();
            std::hint::black_box(out);
            worst_allocs = worst_allocs.max(allocations() - before);
        }
    }
    let report = scaling_experiment(
        &d_list,
        10_000,
        0.3,
        Algorithm::Kac,
        &c,
        15,
        ScalingOptions { reps: 5, gaussian: false },
    )
    .unwrap();
    let norms: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{:.2}", r.normalized))
        .collect();
    outcome(
        worst_allocs <= APPLY_ALLOC_BUDGET && report.within_2x,
        format!(
            "allocations per apply <= {worst_allocs} (budget {APPLY_ALLOC_BUDGET}); ns/(d ln d) = [{}], spread {:.2}x",
            norms.join(", "),
            report.normalized_spread
        ),
    )
}

fn c6_rip() -> Outcome {
    let exact_zero = (1..=3).all(|s| delta_s_exact(&DMatrix::identity(16, 16), s).unwrap().delta_s == 0.0);
    let a = rademacher_matrix(24, 12, 16);
    let reports: Vec<RipReport> = (1..=4).map(|s| delta_s_exact(&a, s).unwrap()).collect();
    let monotone = reports.windows(2).all(|w| w[1].delta_s >= w[0].delta_s);
    let mut worst_scale = 0.0f64;
    for r in &reports {
        for c in [0.5, 2.0] {
            let scaled = delta_s_exact(&(a.clone() * c), r.s).unwrap().delta_s;
            let c2 = c * c;
            let want = (c2 * r.lambda_max - 1.0).max(1.0 - c2 * r.lambda_min);
            worst_scale = worst_scale.max((scaled - want).abs());
        }
    }
    let dk = dirksen_subsample_check(16, 2, &[4, 8, 12, 16], 50, 16, None).unwrap();
    let medians: Vec<String> = dk.rows.iter().map(|r| format!("m={}:{:.3}", r.m, r.median_delta_s)).collect();
    outcome(
        exact_zero && monotone && worst_scale <= 1e-8 && dk.monotone,
        format!(
            "orthogonal 0: {exact_zero}; monotone in s: {monotone}; scale-law error {worst_scale:.1e}; subsample medians [{}]",
            medians.join(", ")
        ),
    )
}

fn c7_krahmer_ward() -> Outcome {
    let pts = PointSet::cube_vertices(8, 16, 17).unwrap();
    let orth = krahmer_ward_check(&DMatrix::identity(16, 16), 2, &pts, 0.6, 200, 17).unwrap();
    let a = rademacher_matrix(64, 16, 17);
    let r = krahmer_ward_check(&a, 2, &pts, 0.6, 200, 17).unwrap();
    outcome(
        orth.pass_rate == 1.0 && r.pass_rate >= 0.75,
        format!(
            "orthogonal rate {}; 64x16 rate {:.3} (delta_2 = {:.3}, precondition delta_2 <= eps/4 met: {})",
            orth.pass_rate, r.pass_rate, r.delta_s, r.precondition_met
        ),
    )
}

fn c8_symmetry() -> Outcome {
    let ps: Vec<f64> = (0..10)
        .map(|rep| {
            sign_symmetry_test(8, 200, WalkKind::Uniform, 400, 18_000 + rep)
                .unwrap()
                .min_p_value
        })
        .collect();
    let ok = ps.iter().filter(|&&p| p > 0.01).count();
    let zero = sign_symmetry_test(8, 0, WalkKind::Uniform, 400, 18).unwrap();
    outcome(
        ok >= 9 && zero.min_p_value < 0.01,
        format!(
            "T=200: {ok}/10 with all p > 0.01 (min p per rep {:?}); T=0 min p {}",
            ps, zero.min_p_value
        ),
    )
}

fn c9_perm_mixing() -> Outcome {
    let d = 5usize;
    let dl = d as f64 * (d as f64).ln();
    let ts = [d as u64, (3.0 * dl).ceil() as u64, (10.0 * dl).ceil() as u64];
    let rs: Vec<PermTvReport> = ts
        .iter()
        .map(|&t| perm_mixing_tv(d, t, 1_000_000, 19, 1.0).unwrap())
        .collect();
    let decreasing = rs
        .windows(2)
        .all(|w| w[1].tv <= w[0].tv + 2.0 * w[0].sigma.max(w[1].sigma));
    let last = rs.last().unwrap();
    let parts: Vec<String> = rs
        .iter()
        .map(|r| format!("T={}: {:.4}±{:.4}", r.t, r.tv, r.sigma))
        .collect();
    outcome(
        last.tv <= 0.1 && decreasing,
        format!("{}; bias scale {:.4}", parts.join(", "), last.bias_scale),
    )
}

fn cli_pipelines(dir: &Path, threads: &str) -> Vec<(String, Vec<u8>)> {
    let exe = env!("CARGO_BIN_EXE_kacjl");
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("spec_kac.json", vec!["build", "--d", "1024", "--n", "500", "--epsilon", "0.3", "--alg", "kac", "--seed", "14000"]),
        ("spec_sora.json", vec!["build", "--d", "1024", "--n", "500", "--epsilon", "0.3", "--alg", "sora", "--seed", "14000"]),
        ("", vec!["generate", "--n", "500", "--d", "1024", "--seed", "14000", "--output", "pts.bin"]),
        ("", vec!["apply", "--spec", "spec_kac.json", "--input", "pts.bin", "--output", "img_kac.bin"]),
        ("", vec!["apply", "--spec", "spec_sora.json", "--input", "pts.bin", "--output", "img_sora.csv"]),
        ("dist_kac.json", vec!["distortion", "--spec", "spec_kac.json", "--input", "pts.bin", "--epsilon", "0.3"]),
        ("dist_sora.json", vec!["distortion", "--spec", "spec_sora.json", "--input", "pts.bin", "--epsilon", "0.3"]),
        ("c1.json", vec!["verify", "contraction", "--d", "10", "--trials", "2000", "--seed", "11"]),
        ("c2.json", vec!["verify", "contraction", "--d", "20", "--t-max", "160", "--trials", "2000", "--seed", "12", "--csv", "c2.csv"]),
        ("c3.json", vec!["verify", "moments", "--d", "25", "--p", "3", "--trials", "5000", "--seed", "13"]),
        ("", vec!["generate", "--n", "24", "--d", "12", "--kind", "cube", "--seed", "16", "--output", "a.csv"]),
        ("c6_rip.json", vec!["rip", "--matrix", "a.csv", "--s", "3"]),
        ("c6_spec.json", vec!["rip", "--d", "1024", "--s", "4", "--delta", "0.5", "--seed", "16"]),
        ("c6_dirksen.json", vec!["verify", "dirksen", "--d", "16", "--s", "2", "--m", "4,8,12,16", "--trials", "50", "--seed", "16", "--csv", "c6.csv"]),
        ("c7.json", vec!["verify", "krahmerward", "--s", "2", "--epsilon", "0.6", "--trials", "200", "--seed", "17"]),
        ("c8.json", vec!["verify", "symmetry", "--d", "8", "--t", "200", "--trials", "400", "--seed", "18000"]),
        ("c9.json", vec!["verify", "permtv", "--d", "5", "--t", "5,25,81", "--trials", "1000000", "--seed", "19", "--csv", "c9.csv"]),
        ("maxcoord.json", vec!["verify", "maxcoord", "--d", "1000", "--trials", "50", "--seed", "20"]),
        ("subset.json", vec!["verify", "subset", "--d", "512", "--n", "100", "--epsilon", "0.5", "--trials", "200", "--seed", "20"]),
    ];
    let mut outputs = Vec::new();
    for (stdout_name, args) in runs {
        let o = Command::new(exe)
            .args(&args)
            .current_dir(dir)
            .env("KACJL_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.code().unwrap() <= 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        if !stdout_name.is_empty() {
            std::fs::write(dir.join(stdout_name), &o.stdout).unwrap();
        }
    }
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    for name in names {
        outputs.push((name.clone(), std::fs::read(dir.join(&name)).unwrap()));
    }
    outputs
}

fn c10_determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = cli_pipelines(a.path(), "1");
    let second = cli_pipelines(b.path(), "4");
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    outcome(
        first.len() == second.len() && differing.is_empty(),
        format!(
            "{} output files compared across reruns (1 vs 4 threads); differing: {:?}",
            first.len(),
            differing
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("contraction factor (exact, d = 5, 10, 25)", c1_contraction_factor),
        ("contraction envelope (d = 20)", c2_envelope),
        ("even-moment bound", c3_moments),
        ("JL success, d = 1024, n = 500, eps = 0.3", c4_jl_success),
        ("memory and time contracts", c5_memory_time),
        ("restricted isometry oracle", c6_rip),
        ("random-sign JL from small delta_s", c7_krahmer_ward),
        ("signed-permutation symmetry", c8_symmetry),
        ("permutation walk mixing", c9_perm_mixing),
        ("CLI determinism", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| *f == id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("acceptance {id:>2} {tag}: {name} [{secs:.1}s] {}", o.detail);
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
}
