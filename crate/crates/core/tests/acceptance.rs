//! Acceptance suite. One line per criterion; exits non-zero if any is red.

use std::time::{Duration, Instant};

use hsk::grid::{AnnulusMode, Exponent, ExponentVector, GridSpec, SampledField};
use hsk::herz::HerzSliceParams;
use hsk::maximal::{hl_maximal, Geometry, MaximalConfig};
use hsk::slice::SliceParams;
use hsk::verify::{run_suite, Status, SuiteConfig, VerificationReport, SUITES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn config(grid: &GridSpec, u: &[f64], v: &[f64], beta: f64, s: Exponent, mode: AnnulusMode) -> SuiteConfig {
    let slice = SliceParams::new(0.25, ExponentVector::finite(u).unwrap(), ExponentVector::finite(v).unwrap()).unwrap();
    SuiteConfig::new(grid.clone(), HerzSliceParams::new(beta, s, slice, mode).unwrap()).unwrap()
}

fn line() -> GridSpec {
    GridSpec::spanning(1, -4.0, 4.0, 257).unwrap()
}

fn square(n: usize) -> GridSpec {
    GridSpec::spanning(2, -4.0, 4.0, n).unwrap()
}

fn fin(s: f64) -> Exponent {
    Exponent::Finite(s)
}

fn run(suite: &str, cfg: &SuiteConfig, trials: usize) -> VerificationReport {
    run_suite(suite, cfg, &cfg.default_family(SEED, trials)).unwrap_or_else(|e| panic!("{suite}: {e}"))
}

/// Largest measured/tolerance ratio over the non-skipped checks, plus any failures.
struct Tally {
    worst: f64,
    failed: Vec<String>,
    ran: usize,
}

impl Tally {
    fn new() -> Self {
        Self { worst: 0.0, failed: Vec::new(), ran: 0 }
    }

    fn add(&mut self, label: &str, report: &VerificationReport) {
        for c in &report.checks {
            match c.status {
                Status::Skipped => continue,
                Status::Fail => self.failed.push(format!("{label}/{}", c.name)),
                Status::Pass => {}
            }
            self.ran += 1;
            let tol = c.tolerance.0;
            if tol > 0.0 && tol < f64::MAX {
                self.worst = self.worst.max(c.measured.0 / tol);
            }
        }
    }

    fn outcome(self, extra: String) -> Outcome {
        let pass = self.failed.is_empty() && self.ran > 0;
        let mut detail = format!("{} checks, worst measured/tol {:.3e}", self.ran, self.worst);
        if !extra.is_empty() {
            detail.push_str(", ");
            detail.push_str(&extra);
        }
        if !pass {
            detail.push_str(&format!(", failed: {}", self.failed.join(" ")));
        }
        Outcome { pass, detail }
    }
}

type Shape = (&'static [f64], &'static [f64], f64, Exponent, AnnulusMode);

fn power_identity() -> Outcome {
    let shapes: [Shape; 5] = [
        (&[2.0], &[2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        (&[3.0], &[1.5], -0.2, fin(1.0), AnnulusMode::Homogeneous),
        (&[4.0], &[2.0], 0.5, Exponent::Inf, AnnulusMode::NonHomogeneous),
        (&[1.5], &[3.0], 0.0, fin(3.0), AnnulusMode::NonHomogeneous),
        (&[2.5], &[2.5], 1.0, fin(0.5), AnnulusMode::Homogeneous),
    ];
    let mut tally = Tally::new();
    let mut times = Vec::new();
    for dim in [1usize, 2] {
        let grid = if dim == 1 { line() } else { square(129) };
        let start = Instant::now();
        for (i, (u, v, beta, s, mode)) in shapes.iter().enumerate() {
            let u: Vec<f64> = (0..dim).map(|a| u[0] + a as f64 * 0.5).collect();
            let v = vec![v[0]; dim];
            let cfg = config(&grid, &u, &v, *beta, *s, *mode);
            tally.add(&format!("{dim}d#{i}"), &run("power_identity", &cfg, 50));
        }
        times.push(start.elapsed());
    }
    let slow = times.iter().any(|t| *t > Duration::from_secs(10));
    if slow {
        tally.failed.push("runtime".into());
    }
    tally.outcome(format!("runtime 1-D {:.2?}, 2-D {:.2?} (limit 10 s each)", times[0], times[1]))
}

fn holder() -> Outcome {
    let mut tally = Tally::new();
    let grid1 = line();
    let grid2 = square(65);
    let cases = [
        config(&grid1, &[2.0], &[2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid1, &[3.0], &[1.5], -0.3, fin(1.0), AnnulusMode::NonHomogeneous),
        config(&grid2, &[2.0, 3.0], &[2.0, 2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid2, &[1.5, 4.0], &[3.0, 3.0], 0.5, Exponent::Inf, AnnulusMode::NonHomogeneous),
    ];
    for (i, cfg) in cases.iter().enumerate() {
        tally.add(&format!("#{i}"), &run("holder", cfg, 200));
    }
    tally.outcome("200 pairs per config".into())
}

fn duality() -> Outcome {
    let mut tally = Tally::new();
    let grid1 = line();
    let grid2 = square(65);
    let cases = [
        config(&grid1, &[2.0], &[2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid1, &[3.0], &[1.5], -0.1, fin(0.75), AnnulusMode::Homogeneous),
        config(&grid2, &[2.0, 3.0], &[2.0, 2.0], 0.25, fin(1.0), AnnulusMode::NonHomogeneous),
        config(&grid2, &[4.0, 1.5], &[3.0, 3.0], 0.0, fin(4.0), AnnulusMode::Homogeneous),
    ];
    let mut sup_branch = 0;
    for (i, cfg) in cases.iter().enumerate() {
        let report = run("duality_pairing", cfg, 200);
        if report.checks.iter().any(|c| c.note.as_deref().is_some_and(|n| n.contains("inf"))) {
            sup_branch += 1;
        }
        tally.add(&format!("#{i}"), &report);
    }
    if sup_branch < 2 {
        tally.failed.push("s <= 1 branch not exercised".into());
    }
    tally.outcome(format!("200 pairs per config, {sup_branch} configs with s' = inf"))
}

fn embeddings() -> Outcome {
    let mut tally = Tally::new();
    let grid1 = line();
    let grid2 = square(65);
    for mode in [AnnulusMode::Homogeneous, AnnulusMode::NonHomogeneous] {
        let cases = [
            config(&grid1, &[2.0], &[2.0], 0.25, fin(1.0), mode),
            config(&grid1, &[3.0], &[1.5], -0.2, fin(2.0), mode),
            config(&grid2, &[2.0, 3.0], &[2.0, 2.0], 0.5, fin(2.0), mode),
        ];
        for (i, cfg) in cases.iter().enumerate() {
            tally.add(&format!("{mode:?}#{i}"), &run("embeddings", cfg, 50));
        }
    }
    tally.outcome("50 trials per config".into())
}

fn char_bounds() -> Outcome {
    let mut tally = Tally::new();
    let grid1 = line();
    let grid2 = square(65);
    let cases = [
        config(&grid1, &[2.0], &[2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid1, &[4.0], &[1.5], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid2, &[2.0, 3.0], &[2.0, 2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid2, &[1.5, 4.0], &[3.0, 1.5], 0.25, fin(2.0), AnnulusMode::Homogeneous),
    ];
    for (i, cfg) in cases.iter().enumerate() {
        tally.add(&format!("#{i}"), &run("char_bounds", cfg, 1));
    }
    tally.outcome("spread over lambda in {1, 2, 4} below 25%".into())
}

fn reduction() -> Outcome {
    let mut tally = Tally::new();
    let mut notes = Vec::new();
    for dim in [1usize, 2] {
        let grid = if dim == 1 { line() } else { square(129) };
        for q in [2.0, 3.0] {
            for mode in [AnnulusMode::Homogeneous, AnnulusMode::NonHomogeneous] {
                let cfg = config(&grid, &vec![q; dim], &vec![q; dim], 0.5, fin(2.0), mode);
                let report = run("reduction", &cfg, 10);
                let worst = |suffix: &str| {
                    report
                        .checks
                        .iter()
                        .filter(|c| c.name.starts_with("unit ball") && c.name.ends_with(suffix))
                        .map(|c| c.measured.0)
                        .fold(0.0, f64::max)
                };
                notes.push(format!("{dim}d q={q} {mode:?}: {:.2}% -> {:.3}%", 100.0 * worst("L^q").max(worst("Herz")), 100.0 * worst("(refined)")));
                tally.add(&format!("{dim}d q={q} {mode:?}"), &report);
            }
        }
    }
    tally.outcome(notes.join("; "))
}

fn blocks() -> Outcome {
    let mut tally = Tally::new();
    let grid1 = line();
    let grid2 = square(65);
    let cases = [
        config(&grid1, &[2.0], &[2.0], 0.5, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid1, &[3.0], &[1.5], 0.25, fin(1.0), AnnulusMode::NonHomogeneous),
        config(&grid2, &[2.0, 3.0], &[2.0, 2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid2, &[2.0, 4.0], &[1.5, 1.5], -0.25, Exponent::Inf, AnnulusMode::NonHomogeneous),
    ];
    let mut maxima = Vec::new();
    for (i, cfg) in cases.iter().enumerate() {
        tally.add(&format!("#{i}"), &run("blocks_roundtrip", cfg, 50));
        tally.add(&format!("#{i}"), &run("blocks_equality", cfg, 50));
        let sufficiency = run("blocks_sufficiency", cfg, 100);
        maxima.push(format!("{:.4}", sufficiency.check("synthetic decompositions bounded").unwrap().measured.0));
        tally.add(&format!("#{i}"), &sufficiency);
    }
    tally.outcome(format!("sufficiency max norm per config [{}]", maxima.join(", ")))
}

fn ball_count(h: &[f64], r: f64) -> f64 {
    let reach: Vec<isize> = h.iter().map(|&h| (r / h).ceil() as isize).collect();
    let mut count = 0usize;
    match h.len() {
        1 => {
            for a in -reach[0]..=reach[0] {
                count += usize::from(dist2(&[a], h) < r * r);
            }
        }
        _ => {
            for a in -reach[0]..=reach[0] {
                for b in -reach[1]..=reach[1] {
                    count += usize::from(dist2(&[a, b], h) < r * r);
                }
            }
        }
    }
    count as f64
}

fn dist2(d: &[isize], h: &[f64]) -> f64 {
    d.iter().zip(h).map(|(&d, &h)| (d as f64 * h) * (d as f64 * h)).fold(0.0, |a, x| a + x)
}

fn inside(geometry: Geometry, d: &[isize], h: &[f64], r: f64) -> bool {
    match geometry {
        Geometry::Ball => dist2(d, h) < r * r,
        Geometry::Cube => d.iter().zip(h).all(|(&d, &h)| (d as f64 * h).abs() < r),
    }
}

/// Uncentered maximal function by direct search over every center and radius.
/// Window sums visit points with axis 0 innermost.
fn brute_maximal(f: &SampledField, geometry: Geometry, radii: &[f64]) -> Vec<f64> {
    let spec = f.spec();
    let h = spec.spacing();
    let dim = spec.dim();
    let n = spec.len();
    let coords: Vec<Vec<isize>> = (0..n).map(|i| spec.unravel(i)[..dim].iter().map(|&c| c as isize).collect()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| coords[i].iter().rev().copied().collect::<Vec<_>>());
    let mut out = vec![0.0f64; n];
    for &r in radii {
        let count = match geometry {
            Geometry::Ball => ball_count(h, r),
            Geometry::Cube => h
                .iter()
                .map(|&h| {
                    let mut w = 0isize;
                    while ((w + 1) as f64 * h) < r {
                        w += 1;
                    }
                    (2 * w + 1) as f64
                })
                .product(),
        };
        let avg: Vec<f64> = (0..n)
            .map(|y| {
                let mut sum = 0.0;
                for &z in &order {
                    let d: Vec<isize> = (0..dim).map(|a| coords[z][a] - coords[y][a]).collect();
                    if inside(geometry, &d, h, r) {
                        sum += f.values()[z].abs();
                    }
                }
                sum / count
            })
            .collect();
        for x in 0..n {
            for y in 0..n {
                let d: Vec<isize> = (0..dim).map(|a| coords[x][a] - coords[y][a]).collect();
                if inside(geometry, &d, h, r) {
                    out[x] = out[x].max(avg[y]);
                }
            }
        }
    }
    out
}

/// Random field on a grid; dyadic values make every window sum exact in any order.
fn random_field(spec: &GridSpec, rng: &mut ChaCha8Rng, dyadic: bool) -> SampledField {
    let values = (0..spec.len())
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else if dyadic {
                rng.gen_range(-512i32..512) as f64 / 64.0
            } else {
                rng.gen_range(-3.0..3.0)
            }
        })
        .collect();
    SampledField::new(spec.clone(), values).unwrap()
}

fn maximal() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut compared = 0usize;
    let mut mismatched = 0usize;
    let grids = [
        GridSpec::uniform(1, 64, 0.125).unwrap(),
        GridSpec::uniform(1, 37, 0.3).unwrap(),
        GridSpec::new(vec![24, 32], vec![0.25, 0.2], vec![0.1, -0.3]).unwrap(),
        GridSpec::uniform(2, 20, 0.5).unwrap(),
    ];
    for spec in &grids {
        for (geometry, dyadic) in [(Geometry::Ball, false), (Geometry::Ball, true), (Geometry::Cube, true)] {
            let f = random_field(spec, &mut rng, dyadic);
            let cfg = MaximalConfig::dyadic(spec, geometry);
            let fast = hl_maximal(&f, &cfg).unwrap();
            let slow = brute_maximal(&f, geometry, &cfg.radii);
            compared += slow.len();
            mismatched += fast.values().iter().zip(&slow).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
        }
    }

    let mut tally = Tally::new();
    let grid = square(65);
    let configs = [
        config(&grid, &[2.0, 2.0], &[2.0, 2.0], 0.0, fin(2.0), AnnulusMode::Homogeneous),
        config(&grid, &[2.0, 4.0], &[2.0, 2.0], 0.25, fin(1.0), AnnulusMode::Homogeneous),
        config(&grid, &[3.0, 3.0], &[2.0, 2.0], -0.25, fin(4.0), AnnulusMode::Homogeneous),
    ];
    let mut spreads = Vec::new();
    for (i, cfg) in configs.iter().enumerate() {
        let bounded = run("maximal_bounded", cfg, 50);
        if bounded.checks.iter().any(|c| c.status == Status::Skipped) {
            tally.failed.push(format!("#{i} outside window"));
        }
        if let Some(c) = bounded.check("ratio stability") {
            spreads.push(format!("{:.3}", c.measured.0));
        }
        tally.add(&format!("bounded#{i}"), &bounded);
        tally.add(&format!("decay#{i}"), &run("maximal_decay", cfg, 20));
    }
    let elapsed = start.elapsed();
    if mismatched > 0 {
        tally.failed.push(format!("oracle mismatches {mismatched}/{compared}"));
    }
    if elapsed > Duration::from_secs(120) {
        tally.failed.push("runtime".into());
    }
    tally.outcome(format!(
        "oracle bit-identical at {compared} points, max/median [{}], runtime {elapsed:.2?} (limit 120 s)",
        spreads.join(", ")
    ))
}

fn determinism() -> Outcome {
    let cfgs = [
        config(&line(), &[2.0], &[2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
        config(&square(33), &[2.0, 3.0], &[2.0, 2.0], 0.25, fin(2.0), AnnulusMode::Homogeneous),
    ];
    let pool = |n: usize| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let (one, four) = (pool(1), pool(4));
    let mut differing = Vec::new();
    let mut compared = 0;
    for cfg in &cfgs {
        for suite in SUITES {
            let go = || run(suite, cfg, 8).to_json();
            let a = one.install(go);
            let b = four.install(go);
            let c = four.install(go);
            compared += 1;
            if a != b || b != c {
                differing.push(format!("{}d/{suite}", cfg.grid.dim()));
            }
        }
    }
    Outcome {
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            format!("{compared} reports byte-identical at 1 and 4 threads")
        } else {
            format!("differing: {}", differing.join(" "))
        },
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("power identity", power_identity),
        ("discrete Hölder", holder),
        ("dual pairing", duality),
        ("embeddings", embeddings),
        ("characteristic bounds", char_bounds),
        ("reduction identities", reduction),
        ("block decomposition", blocks),
        ("maximal operator", maximal),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let mark = if out.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!out.pass);
        println!("[{mark}] {}. {name} ({:.1?}): {}", i + 1, start.elapsed(), out.detail);
    }
    if failed > 0 {
        println!("{failed} criteria red");
        std::process::exit(1);
    }
}
