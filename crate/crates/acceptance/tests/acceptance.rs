//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sysolve::files::read_network;
use sysolve::sweep::{run, stream_to_file, thread_count};
use sysolve_core::rational::to_f64;
use sysolve_core::{
    emulate_gemm, emulate_network, energy_cost, execute_gemm, pareto::dominates, pareto_front,
    reference, ArrayConfig, DesignPoint, EnergyWeights, GemmWorkload, GridSweepSpec, LoweredModel,
    Matrix, MovementCounters, Operands, Rational, RatioSweepSpec, SweepRecord,
};

type Outcome = Result<String, String>;

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn canned(name: &str) -> LoweredModel {
    let net = read_network(&models_dir().join(format!("{name}.json"))).unwrap();
    LoweredModel::from_network(&net).unwrap()
}

fn all_canned() -> Vec<LoweredModel> {
    let mut names: Vec<String> = std::fs::read_dir(models_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names.iter().map(|n| canned(n)).collect()
}

fn threads() -> usize {
    thread_count().unwrap_or(1)
}

fn grid_points() -> Vec<DesignPoint> {
    GridSweepSpec::default().points().unwrap()
}

fn energy_model_exactness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let weights = EnergyWeights::default();
    let mut mismatches = 0;
    for i in 0..10_000 {
        // Mix small counts with ones near the top of the u64 range.
        let bound = if i % 2 == 0 { 1u64 << 20 } else { u64::MAX };
        let c = MovementCounters {
            m_ub: rng.gen_range(0..bound),
            m_inter_pe: rng.gen_range(0..bound),
            m_intra_pe: rng.gen_range(0..bound),
            m_aa: rng.gen_range(0..bound),
            ..MovementCounters::default()
        };
        let direct = 6 * i128::from(c.m_ub)
            + 2 * (i128::from(c.m_inter_pe) + i128::from(c.m_aa))
            + i128::from(c.m_intra_pe);
        if energy_cost(&c, &weights).value() != Rational::from_integer(direct) {
            mismatches += 1;
        }
    }
    if mismatches == 0 {
        Ok("10000 random counter tuples, exact".into())
    } else {
        Err(format!("{mismatches} of 10000 tuples differ"))
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    let mut first_mismatch = None;
    for height in 1..=4 {
        for width in 1..=4 {
            for depth in [1, 2, 8] {
                let cfg = ArrayConfig {
                    accumulator_depth: depth,
                    ..ArrayConfig::new(height, width).unwrap()
                };
                for m in 1..=5 {
                    for k in 1..=5 {
                        for n in 1..=5 {
                            let w = GemmWorkload::new(m, k, n, 1).unwrap();
                            cases += 1;
                            let fast = emulate_gemm(&w, &cfg).unwrap();
                            let slow = reference::simulate(&w, &cfg).unwrap();
                            if fast != slow && first_mismatch.is_none() {
                                first_mismatch = Some(format!(
                                    "{height}x{width} depth {depth} ({m},{k},{n}): {:?} vs {:?}",
                                    fast.counters, slow.counters
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("{cases} cases in {:.2}s", elapsed.as_secs_f64());
    match first_mismatch {
        Some(m) => Err(format!("{detail}; first mismatch {m}")),
        None if elapsed >= Duration::from_secs(60) => Err(format!("{detail}, limit 60s")),
        None => Ok(detail),
    }
}

fn random_case(rng: &mut StdRng) -> (GemmWorkload, ArrayConfig) {
    let cfg = ArrayConfig {
        accumulator_depth: rng.gen_range(1..=128),
        ..ArrayConfig::new(rng.gen_range(1..=64), rng.gen_range(1..=64)).unwrap()
    };
    let w = GemmWorkload::new(
        rng.gen_range(1..=96),
        rng.gen_range(1..=160),
        rng.gen_range(1..=160),
        rng.gen_range(1..=2),
    )
    .unwrap();
    (w, cfg)
}

fn product<T>(lhs: &Matrix<T>, rhs: &Matrix<T>, zero: T, mac: impl Fn(T, T, T) -> T) -> Matrix<T>
where
    T: Copy + Default + PartialEq + std::fmt::Debug,
{
    Matrix::from_fn(lhs.rows(), rhs.cols(), |r, c| {
        (0..lhs.cols()).fold(zero, |acc, i| mac(acc, lhs.get(r, i), rhs.get(i, c)))
    })
}

fn functional_correctness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut failures = Vec::new();
    for case in 0..200 {
        let (w, cfg) = random_case(&mut rng);
        let (m, k, n) = (w.m as usize, w.k as usize, w.n as usize);
        let groups: Vec<_> = (0..w.repeat)
            .map(|_| {
                (
                    Matrix::from_fn(m, k, |_, _| rng.gen_range(-128i64..=127)),
                    Matrix::from_fn(k, n, |_, _| rng.gen_range(-128i64..=127)),
                )
            })
            .collect();
        let run = execute_gemm(&w, &cfg, Operands::PerGroup(&groups)).unwrap();
        for (out, (lhs, rhs)) in run.outputs.iter().zip(&groups) {
            if *out != product(lhs, rhs, 0, |a, x, y| a + x * y) {
                failures.push(format!("integer case {case}"));
            }
        }
    }
    let mut worst = 0.0f64;
    for case in 0..200 {
        let (w, cfg) = random_case(&mut rng);
        let (m, k, n) = (w.m as usize, w.k as usize, w.n as usize);
        let lhs = Matrix::from_fn(m, k, |_, _| rng.gen_range(-1.0..1.0));
        let rhs = Matrix::from_fn(k, n, |_, _| rng.gen_range(-1.0..1.0));
        let run = execute_gemm(&w, &cfg, Operands::Shared { lhs: &lhs, rhs: &rhs }).unwrap();
        let expected = product(&lhs, &rhs, 0.0, |a, x, y| a + x * y);
        for out in &run.outputs {
            for (got, want) in out.as_slice().iter().zip(expected.as_slice()) {
                let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                if rel > 1e-6 {
                    failures.push(format!("real case {case}: {got} vs {want}"));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("200 integer cases exact, 200 real cases within 1e-6 (worst {worst:.1e})"))
    } else {
        Err(format!("{} mismatches, first: {}", failures.len(), failures[0]))
    }
}

fn utilization_and_mac_invariance() -> Outcome {
    let points = grid_points();
    let mut checked = 0;
    for model in all_canned() {
        let total: u128 = model.workloads.iter().map(|w| w.macs()).sum();
        let records = run(
            std::slice::from_ref(&model),
            &points,
            &ArrayConfig::default(),
            &EnergyWeights::default(),
            threads(),
        )
        .unwrap();
        if records.len() != 961 {
            return Err(format!("{}: {} records", model.name, records.len()));
        }
        for r in &records {
            let cfg = ArrayConfig::default().with_dims(r.height, r.width);
            let report = emulate_network(&model.workloads, &cfg).unwrap();
            let slots = Rational::from_integer(i128::from(cfg.pe_count()) * i128::from(r.cycles));
            let identity = r.utilization * slots == Rational::from_integer(report.counters.macs.into());
            let invariant = u128::from(report.counters.macs) == total;
            let consistent = report.counters.cycles == r.cycles && report.utilization == r.utilization;
            if !(identity && invariant && consistent) {
                return Err(format!("{} at {}x{}", model.name, r.height, r.width));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} records over 9 models, exact"))
}

fn brute_force_front(points: &[(usize, f64, f64)]) -> BTreeSet<usize> {
    points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates((q.1, q.2), (p.1, p.2))))
        .map(|p| p.0)
        .collect()
}

fn front(points: &[(usize, f64, f64)]) -> BTreeSet<usize> {
    pareto_front(points)
        .unwrap()
        .into_iter()
        .filter(|p| p.rank == 1)
        .map(|p| p.id)
        .collect()
}

fn pareto_correctness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut total = 0;
    for set in 0..100 {
        let n = if set % 10 == 0 { 1000 } else { rng.gen_range(1..=1000) };
        total += n;
        let coarse = set % 2 == 0;
        let points: Vec<(usize, f64, f64)> = (0..n)
            .map(|i| {
                if coarse {
                    (i, f64::from(rng.gen_range(0..40)), f64::from(rng.gen_range(0..40)))
                } else {
                    let a: f64 = rng.gen_range(0.0..1.0);
                    (i, a, (1.0 - a) * rng.gen_range(0.5..2.0))
                }
            })
            .collect();
        let ranked = front(&points);
        if ranked != brute_force_front(&points) {
            return Err(format!("set {set} (n = {n}) differs from the pairwise oracle"));
        }
        let transformed: Vec<_> = points
            .iter()
            .map(|&(i, a, b)| (i, (a / 8.0).exp() + a * a * a, (1.0 + b).ln() - 7.0))
            .collect();
        if front(&transformed) != ranked {
            return Err(format!("set {set}: frontier changed under a monotone transform"));
        }
    }
    Ok(format!("100 sets, {total} points, oracle and transform invariance hold"))
}

fn desk_scale_sweep() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let model = canned("resnet152");
    let points = grid_points();
    let sweep = |threads: usize, name: &str| {
        let out = dir.path().join(name);
        let start = Instant::now();
        let models = [model.clone()];
        stream_to_file(&out, &models, &points, &ArrayConfig::default(), &EnergyWeights::default(), threads, false)
            .unwrap();
        (start.elapsed(), std::fs::read(out).unwrap())
    };
    let (elapsed, bytes) = sweep(threads(), "a.csv");
    let text = String::from_utf8(bytes.clone()).unwrap();
    let data_rows = text.lines().skip(1).filter(|l| !l.starts_with('#')).count();
    let repeat = sweep(threads(), "b.csv").1;
    let serial = sweep(1, "c.csv").1;
    let wide = sweep(8, "d.csv").1;
    let detail = format!(
        "{data_rows} rows in {:.2}s, threads: {}",
        elapsed.as_secs_f64(),
        threads()
    );
    if elapsed >= Duration::from_secs(300) {
        Err(format!("{detail}, limit 300s"))
    } else if data_rows != 961 {
        Err(format!("{detail}, expected 961 rows"))
    } else if repeat != bytes || serial != bytes || wide != bytes {
        Err(format!("{detail}, output differs between runs or thread counts"))
    } else {
        Ok(format!("{detail}; byte-identical across reruns and 1/8 threads"))
    }
}

fn min_energy_points(records: &[SweepRecord]) -> Vec<&SweepRecord> {
    let best = records.iter().map(|r| r.energy).min().unwrap();
    records.iter().filter(|r| r.energy == best).collect()
}

fn breakdown(r: &SweepRecord) -> String {
    format!(
        "{}x{}: E={} = 6*{} + 2*({} + {}) + {}",
        r.height, r.width, r.energy, r.m_ub, r.m_inter_pe, r.m_aa, r.m_intra_pe
    )
}

fn group_convolution_trend() -> Outcome {
    let models = [canned("mobilenet_v3_large"), canned("resnet152")];
    let records = run(&models, &grid_points(), &ArrayConfig::default(), &EnergyWeights::default(), threads()).unwrap();
    let (mobile, resnet): (Vec<_>, Vec<_>) = records.into_iter().partition(|r| r.model_name.starts_with("mobilenet"));
    let smallest = |optimal: &[&SweepRecord]| {
        optimal
            .iter()
            .min_by_key(|r| (r.design_point().pe_count(), r.height))
            .map(|r| (*r).clone())
            .unwrap()
    };
    let mobile_opt = min_energy_points(&mobile);
    let resnet_opt = min_energy_points(&resnet);
    let (m, r) = (smallest(&mobile_opt), smallest(&resnet_opt));
    let detail = format!(
        "mobilenet_v3_large {} PEs ({} tied optima) [{}]; resnet152 {} PEs ({} tied optima) [{}]",
        m.design_point().pe_count(),
        mobile_opt.len(),
        breakdown(&m),
        r.design_point().pe_count(),
        resnet_opt.len(),
        breakdown(&r)
    );
    if m.design_point().pe_count() <= r.design_point().pe_count() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn equal_pe_interior_optimum() -> Outcome {
    let spec = RatioSweepSpec::default();
    let dims = spec.dimensions().unwrap();
    let points: Vec<DesignPoint> = dims.iter().map(|(_, p)| *p).collect();
    let models = all_canned();
    let records = run(&models, &points, &spec.base, &EnergyWeights::default(), threads()).unwrap();
    let mut interior = 0;
    let mut lines = Vec::new();
    for chunk in records.chunks(points.len()) {
        let best = chunk.iter().map(|r| r.energy).min().unwrap();
        let norm: Vec<f64> = chunk.iter().map(|r| to_f64(&(r.energy / best))).collect();
        let extremes_not_below = chunk[0].energy >= best && chunk[points.len() - 1].energy >= best;
        let argmin: Vec<usize> = (0..chunk.len()).filter(|&i| chunk[i].energy == best).collect();
        let is_interior = argmin.iter().all(|&i| i != 0 && i != points.len() - 1);
        if is_interior && extremes_not_below {
            interior += 1;
        }
        let ratios: Vec<String> = argmin.iter().map(|&i| dims[i].0.to_string()).collect();
        let norm: Vec<String> = norm.iter().map(|v| format!("{v:.4}")).collect();
        lines.push(format!(
            "    {:<20} argmin {:<5} normalized [{}]",
            chunk[0].model_name,
            ratios.join("/"),
            norm.join(", ")
        ));
    }
    let detail = format!(
        "interior argmin for {interior} of {} models at {} PEs (ratios {})\n{}",
        models.len(),
        spec.pe_count,
        dims.iter().map(|(r, _)| r.to_string()).collect::<Vec<_>>().join(" "),
        lines.join("\n")
    );
    if 2 * interior > models.len() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("energy-model-exactness", energy_model_exactness),
        ("oracle-equivalence", oracle_equivalence),
        ("functional-correctness", functional_correctness),
        ("utilization-identity-and-mac-invariance", utilization_and_mac_invariance),
        ("pareto-correctness", pareto_correctness),
        ("desk-scale-sweep", desk_scale_sweep),
        ("group-convolution-trend", group_convolution_trend),
        ("equal-pe-interior-optimum", equal_pe_interior_optimum),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
