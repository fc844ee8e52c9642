//! Acceptance suite. Each test checks one exit criterion and prints a
//! single PASS/FAIL line; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use divisor_circle::arcs::build_arc_family;
use divisor_circle::arith::{sieve_divisor, Fraction};
use divisor_circle::cli;
use divisor_circle::expsum::{eval_direct, eval_hyperbola, grid_eval, rational_tau_sum, PhasePoint};
use divisor_circle::moments::{kernel_moment_even_exact, moment_even_exact, singular_series};
use divisor_circle::verify::{grows_monotonically_beyond, pointwise_bound_scan, scan_grid_size, theorem_ratio_table};

/// `4 ×` the X = 2^10, ν = 0.25, N = 4X oracle values of the two sup ratios.
const ORACLE_SUP_MINOR_2_10: f64 = 0.300313948133;
const ORACLE_SUP_MAJOR_2_10: f64 = 0.504827097122;
const C0: f64 = 4.0 * ORACLE_SUP_MINOR_2_10;
const C1: f64 = 4.0 * ORACLE_SUP_MAJOR_2_10;

fn verdict(id: u32, name: &str, ok: bool, detail: String) -> bool {
    println!("[{}] criterion {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

#[test]
fn criterion_01_hyperbola_identity() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for x in [100usize, 1_000, 10_000] {
        let table = sieve_divisor(x).unwrap();
        let scale = table.total() as f64;
        for _ in 0..200 {
            let alpha = PhasePoint::new(rng.gen::<f64>());
            let direct = eval_direct(&table, alpha);
            let split = eval_hyperbola(x as u64, alpha).m;
            worst = worst.max((direct - split).norm() / scale);
        }
    }
    let t = clock.elapsed();
    let ok = worst <= 1e-9 && within(t, 5.0);
    assert!(verdict(1, "hyperbola identity", ok, format!("max rel diff {worst:.3e} (tol 1e-9), {t:?} (< 5 s)")));
}

#[test]
fn criterion_02_parseval_exactness() {
    let clock = Instant::now();
    let table = sieve_divisor(1_000).unwrap();
    let exact = table.sum_of_squares() as f64;
    let grid = grid_eval(&table, 2048).unwrap();
    let rel = ((grid.power_mean(2.0) - exact) / exact).abs();
    let t = clock.elapsed();
    let ok = rel <= 1e-6 && within(t, 1.0);
    assert!(verdict(2, "grid Parseval", ok, format!("Σ τ² = {exact}, rel err {rel:.3e} (tol 1e-6), {t:?} (< 1 s)")));
}

#[test]
fn criterion_03_even_moment_oracle() {
    let clock = Instant::now();
    let table = sieve_divisor(512).unwrap();
    let exact = moment_even_exact(&table, 2).unwrap();
    let quad = grid_eval(&table, 4096).unwrap().power_mean(4.0);
    let rel = ((quad - exact.value) / exact.value).abs();
    let t = clock.elapsed();
    let ok = rel <= 1e-6 && within(t, 5.0);
    let detail = format!("exact {} vs quadrature {quad:.6e}, rel err {rel:.3e} (tol 1e-6), {t:?} (< 5 s)", exact.exact.unwrap());
    assert!(verdict(3, "even-moment oracle", ok, detail));
}

fn brute_fourth_moment(x: u64) -> u64 {
    let mut count = 0;
    for x1 in 1..=x {
        for x2 in 1..=x {
            for y1 in 1..=x {
                for y2 in 1..=x {
                    if x1 + x2 == y1 + y2 {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[test]
fn criterion_04_kernel_fourth_moment() {
    let clock = Instant::now();
    let mut ok = true;
    for x in 1..=50u64 {
        let exact = kernel_moment_even_exact(x, 2).unwrap().exact.unwrap();
        ok &= exact == BigUint::from(brute_fourth_moment(x));
    }
    for x in 1..=1_000u64 {
        let exact = kernel_moment_even_exact(x, 2).unwrap().exact.unwrap();
        ok &= exact == BigUint::from((2 * x * x * x + x) / 3);
    }
    let t = clock.elapsed();
    let ok = ok && within(t, 10.0);
    assert!(verdict(4, "kernel fourth moment", ok, format!("brute force X <= 50, closed form X <= 1000, {t:?} (< 10 s)")));
}

fn theorem_sweep() -> Vec<u64> {
    (10..=16).map(|k| 1u64 << k).collect()
}

#[test]
fn criterion_05_theorem_surrogate() {
    let rep = theorem_ratio_table(3.0, &theorem_sweep(), 0.2, 1e-3).unwrap();
    let rs: Vec<f64> = rep.rows.iter().map(|r| r.r).collect();
    let max = rs.iter().cloned().fold(f64::MIN, f64::max);
    let min = rs.iter().cloned().fold(f64::MAX, f64::min);
    let last = rep.rows.last().unwrap();
    let major_share = last.i_major / last.i_total;
    for row in &rep.rows {
        println!(
            "    X={:>6} N={:>8} R={:.6} major/total={:.4} minor_ratio={:.3e} (log^(p+1): {:.3e}) prediction/major={:.3}",
            row.x,
            row.grid_n,
            row.r,
            row.i_major / row.i_total,
            row.minor_ratio,
            row.minor_ratio_alt,
            row.major_prediction / row.i_major
        );
    }
    let ok = max / min <= 3.0 && major_share >= 0.5 && rs.iter().all(|&r| r > 0.0);
    let detail = format!("R spread {:.4} (<= 3), I_major/I_total at 2^16 = {major_share:.4} (>= 0.5), {} ms", max / min, rep.meta.wall_ms);
    assert!(verdict(5, "moment ratio stability", ok, detail));
}

fn pointwise_sweep() -> Vec<(u64, f64, f64)> {
    [1u64 << 12, 1 << 14, 1 << 16]
        .iter()
        .map(|&x| {
            let s = pointwise_bound_scan(x, 0.25, scan_grid_size(x)).unwrap();
            (x, s.sup_minor, s.sup_major_resid)
        })
        .collect()
}

#[test]
fn criterion_06_minor_arc_pointwise_bound() {
    let oracle = pointwise_bound_scan(1 << 10, 0.25, scan_grid_size(1 << 10)).unwrap();
    let reproduced = ((oracle.sup_minor - ORACLE_SUP_MINOR_2_10) / ORACLE_SUP_MINOR_2_10).abs() < 1e-9;
    let sweep = pointwise_sweep();
    let bounded = sweep.iter().all(|&(_, s, _)| s <= C0);
    let stable = {
        let (a, b) = (sweep[0].1, sweep[2].1);
        a.max(b) / a.min(b) <= 4.0
    };
    let sups: Vec<String> = sweep.iter().map(|(x, s, _)| format!("{x}:{s:.4}")).collect();
    let ok = reproduced && bounded && stable;
    let detail = format!("C0 = {C0:.6}, sups [{}], 2^16/2^12 = {:.3} (<= 4)", sups.join(", "), sweep[2].1 / sweep[0].1);
    assert!(verdict(6, "minor-arc pointwise bound", ok, detail));
}

#[test]
fn criterion_07_major_arc_approximation() {
    let oracle = pointwise_bound_scan(1 << 10, 0.25, scan_grid_size(1 << 10)).unwrap();
    let reproduced = ((oracle.sup_major_resid - ORACLE_SUP_MAJOR_2_10) / ORACLE_SUP_MAJOR_2_10).abs() < 1e-9;
    let sweep = pointwise_sweep();
    let resid: Vec<f64> = sweep.iter().map(|&(_, _, r)| r).collect();
    let bounded = resid.iter().all(|&r| r <= C1);
    let drift = grows_monotonically_beyond(&resid, 2.0);
    let ok = reproduced && bounded && !drift;
    let detail = format!("C1 = {C1:.6}, residuals {resid:.4?}, end-to-end ratio {:.3} (monotone growth must stay <= 2)", resid[2] / resid[0]);
    assert!(verdict(7, "major-arc approximation", ok, detail));
}

#[test]
fn criterion_08_singular_series_estimate() {
    let clock = Instant::now();
    let mut ratios = Vec::new();
    for x in [1_000u64, 10_000, 100_000, 1_000_000] {
        let s = singular_series(x, (x as f64).powf(0.2), 3.0).unwrap();
        ratios.push(s.value / (x as f64).ln().powi(3));
    }
    let t = clock.elapsed();
    let ok = ratios.iter().all(|&r| (1.0..=2.5).contains(&r)) && within(t, 1.0);
    assert!(verdict(8, "singular series", ok, format!("S/(ln X)^3 = {ratios:.4?} in [1, 2.5], {t:?} (< 1 s)")));
}

#[test]
fn criterion_09_rational_main_term() {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    for x in [1_000usize, 10_000, 100_000] {
        let table = sieve_divisor(x).unwrap();
        let sx = (x as f64).sqrt();
        for q in [1u64, 2, 3, 5, 10] {
            for a in 1..=q {
                let Ok(frac) = Fraction::new(a, q) else { continue };
                let r = rational_tau_sum(&table, frac);
                let scale = (sx + q as f64) * (2.0 * q as f64).ln() + sx;
                worst = worst.max(r.residual.norm() / scale);
            }
        }
    }
    let t = clock.elapsed();
    let ok = worst <= 20.0 && within(t, 10.0);
    assert!(verdict(9, "rational main term", ok, format!("max |exact − main| / scale = {worst:.4} (<= 20), {t:?} (< 10 s)")));
}

fn run_cli_to_file(args: &[&str], threads: usize, dir: &std::path::Path, name: &str) -> Vec<u8> {
    let path = dir.join(name);
    let mut argv: Vec<String> = std::iter::once("divcircle").chain(args.iter().copied()).map(String::from).collect();
    argv.extend(["--threads".into(), threads.to_string(), "--out".into(), path.display().to_string()]);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(&argv, &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    std::fs::read(path).unwrap()
}

#[test]
fn criterion_10_determinism_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let theorem = ["verify", "--p", "3", "--nu", "0.2", "--x-list", "1024,2048,4096,8192,16384,32768,65536", "--tol", "1e-3"];
    let scan = ["verify", "--p", "3", "--nu", "0.25", "--x-list", "4096,16384,65536"];
    let mut ok = true;
    for (label, args) in [("theorem", &theorem[..]), ("scan", &scan[..])] {
        let one = run_cli_to_file(args, 1, dir.path(), &format!("{label}-1.csv"));
        let eight = run_cli_to_file(args, 8, dir.path(), &format!("{label}-8.csv"));
        ok &= one == eight && !one.is_empty();
    }
    // Thread-count independence of the bare arc split as well.
    let family = build_arc_family(1 << 12, 0.2).unwrap();
    let grid = grid_eval(&sieve_divisor(1 << 12).unwrap(), 1 << 15).unwrap();
    let split = |t| {
        divisor_circle::par::with_threads(t, || divisor_circle::moments::moment_on_arcs(&grid, &family, 3.0).unwrap())
    };
    let (a, b) = (split(1), split(8));
    ok &= a.0.value.to_bits() == b.0.value.to_bits() && a.1.value.to_bits() == b.1.value.to_bits();
    assert!(verdict(10, "determinism", ok, "CSV byte-identical for --threads 1 and 8".into()));
}
