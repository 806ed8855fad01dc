use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use sysolve_core::{
    emulate_gemm, emulate_gemm_traced, execute_gemm, plan_tiles, reference, ArrayConfig,
    GemmWorkload, Matrix, Operands, Rational,
};

fn config(height: u32, width: u32, depth: u32) -> ArrayConfig {
    ArrayConfig {
        accumulator_depth: depth,
        ..ArrayConfig::new(height, width).unwrap()
    }
}

#[test]
fn analytical_matches_reference_on_small_grid() {
    for height in 1..=4 {
        for width in 1..=4 {
            for depth in [1, 2, 8] {
                let cfg = config(height, width, depth);
                for m in 1..=5 {
                    for k in 1..=5 {
                        for n in 1..=5 {
                            let w = GemmWorkload::new(m, k, n, 1).unwrap();
                            let fast = emulate_gemm(&w, &cfg).unwrap();
                            let slow = reference::simulate(&w, &cfg).unwrap();
                            assert_eq!(fast, slow, "{height}x{width} depth {depth} ({m},{k},{n})");
                        }
                    }
                }
            }
        }
    }
}

fn naive<T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<Output = T>>(
    lhs: &Matrix<T>,
    rhs: &Matrix<T>,
) -> Matrix<T> {
    Matrix::from_fn(lhs.rows(), rhs.cols(), |r, c| {
        (0..lhs.cols()).fold(T::default(), |acc, i| acc + lhs.get(r, i) * rhs.get(i, c))
    })
}

#[test]
fn reference_and_tiled_outputs_agree() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let (m, k, n) = (rng.gen_range(1..7), rng.gen_range(1..9), rng.gen_range(1..7));
        let cfg = config(rng.gen_range(1..5), rng.gen_range(1..5), rng.gen_range(1..4));
        let w = GemmWorkload::new(m, k, n, 2).unwrap();
        let groups: Vec<_> = (0..2)
            .map(|_| {
                (
                    Matrix::from_fn(m as usize, k as usize, |_, _| rng.gen_range(-128i64..128)),
                    Matrix::from_fn(k as usize, n as usize, |_, _| rng.gen_range(-128i64..128)),
                )
            })
            .collect();
        let tiled = execute_gemm(&w, &cfg, Operands::PerGroup(&groups)).unwrap();
        let slow = reference::execute(&w, &cfg, Operands::PerGroup(&groups)).unwrap();
        assert_eq!(tiled, slow);
        for (out, (lhs, rhs)) in tiled.outputs.iter().zip(&groups) {
            assert_eq!(out, &naive(lhs, rhs));
        }
    }
}

fn workload() -> impl Strategy<Value = GemmWorkload> {
    (1u64..300, 1u64..600, 1u64..600, 1u64..4)
        .prop_map(|(m, k, n, r)| GemmWorkload::new(m, k, n, r).unwrap())
}

fn array() -> impl Strategy<Value = ArrayConfig> {
    (1u32..80, 1u32..80, 1u32..400).prop_map(|(h, w, d)| config(h, w, d))
}

fn activation_reads(w: &GemmWorkload, cfg: &ArrayConfig) -> u64 {
    let plan = plan_tiles(w, cfg).unwrap();
    plan.tiles().map(|(_, h_t, _, _)| w.m * h_t).sum::<u64>() * w.repeat
}

fn weight_reads(w: &GemmWorkload, cfg: &ArrayConfig) -> u64 {
    let plan = plan_tiles(w, cfg).unwrap();
    plan.tiles().map(|(_, h_t, _, w_t)| h_t * w_t).sum::<u64>() * w.repeat
}

proptest! {
    #[test]
    fn utilization_identity(w in workload(), cfg in array()) {
        let r = emulate_gemm(&w, &cfg).unwrap();
        let c = &r.counters;
        let slots = Rational::from_integer(i128::from(cfg.pe_count()) * i128::from(c.cycles));
        prop_assert_eq!(r.utilization * slots, Rational::from_integer(i128::from(c.macs)));
        prop_assert!(r.utilization <= Rational::from_integer(1));
        prop_assert!(u128::from(c.macs) <= u128::from(cfg.pe_count()) * u128::from(c.cycles));
    }

    #[test]
    fn macs_do_not_depend_on_the_array(w in workload(), a in array(), b in array()) {
        let ra = emulate_gemm(&w, &a).unwrap();
        let rb = emulate_gemm(&w, &b).unwrap();
        prop_assert_eq!(ra.counters.macs, rb.counters.macs);
        prop_assert_eq!(u128::from(ra.counters.macs), w.macs());
    }

    #[test]
    fn wider_arrays_reread_fewer_activations(w in workload(), cfg in array(), extra in 1u32..64) {
        let wider = cfg.with_dims(cfg.height, cfg.width + extra);
        prop_assert!(activation_reads(&w, &wider) <= activation_reads(&w, &cfg));
        prop_assert_eq!(weight_reads(&w, &cfg), w.k * w.n * w.repeat);
        prop_assert_eq!(weight_reads(&w, &wider), w.k * w.n * w.repeat);
    }

    #[test]
    fn no_stall_when_every_load_fits_its_window(w in workload(), cfg in array()) {
        let r = emulate_gemm_traced(&w, &cfg).unwrap();
        let trace = r.trace.unwrap();
        let mut tiles: Vec<(u64, u64)> = Vec::new();
        for t in &trace {
            match tiles.last_mut() {
                Some((id, compute)) if *id == t.tile_id => *compute += t.compute_cycles,
                _ => tiles.push((t.tile_id, t.compute_cycles)),
            }
        }
        let heights: Vec<u64> = {
            let mut seen = Vec::new();
            for t in &trace {
                if seen.len() as u64 == t.tile_id { seen.push(t.h_t); }
            }
            seen
        };
        let fits = (1..tiles.len()).all(|i| heights[i] <= tiles[i - 1].1);
        if fits {
            prop_assert_eq!(r.counters.stall_cycles, 0);
        }
        let sum: u64 = trace.iter().map(|t| t.compute_cycles + t.exposed_load_cycles + t.stalls).sum();
        prop_assert_eq!(sum * w.repeat, r.counters.cycles);
    }
}
