//! Cycle-by-cycle register-transfer model of the weight-stationary array.
//!
//! Every PE holds four registers (shadow weight, active weight, activation,
//! partial sum). Each cycle the weight fetcher writes one row of the shadow
//! registers, the data setup unit pushes one activation row into the row
//! FIFOs, every PE on the current wavefront performs one MAC, and the bottom
//! row hands last cycle's partial sums to the accumulator array. Counters
//! are incremented per register or buffer event, and cycle totals fall out
//! of the clock. Slow by construction; meant for small shapes and as the
//! oracle for [`crate::emulator`].

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::ArrayConfig;
use crate::counters::MovementCounters;
use crate::emulator::{EmulationReport, Execution, Operands};
use crate::error::{Error, Result};
use crate::matrix::{Element, Matrix};
use crate::rational::Rational;
use crate::workload::GemmWorkload;

#[derive(Debug, Clone, Copy)]
struct Tile {
    k0: usize,
    h: usize,
    n0: usize,
    w: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Pe<T> {
    shadow: T,
    active: T,
    act: T,
    psum: T,
}

#[derive(Debug, Default)]
struct Tally {
    ub: u64,
    inter: u64,
    intra: u64,
    aa: u64,
    macs: u64,
    cycles: u64,
    exposed: u64,
    stalls: u64,
}

struct Computing {
    tile: usize,
    chunk: usize,
    local: usize,
    drained: usize,
    started: u64,
}

fn schedule(k: usize, n: usize, height: usize, width: usize) -> Vec<Tile> {
    let mut tiles = Vec::new();
    let mut n0 = 0;
    while n0 < n {
        let w = width.min(n - n0);
        let mut k0 = 0;
        while k0 < k {
            let h = height.min(k - k0);
            tiles.push(Tile { k0, h, n0, w });
            k0 += h;
        }
        n0 += w;
    }
    tiles
}

fn chunking(m: usize, depth: usize) -> Vec<(usize, usize)> {
    let mut chunks = Vec::new();
    let mut r0 = 0;
    while r0 < m {
        let len = depth.min(m - r0);
        chunks.push((r0, len));
        r0 += len;
    }
    chunks
}

/// Row of the chunk a PE works on at `local` cycle, if any.
fn wavefront_row(local: usize, offset: usize, m_c: usize) -> Option<usize> {
    local.checked_sub(offset).filter(|&r| r < m_c)
}

struct GroupRun<T> {
    output: Matrix<T>,
    tally: Tally,
    peak: Rational,
}

fn run_group<T: Element>(
    cfg: &ArrayConfig,
    tiles: &[Tile],
    chunks: &[(usize, usize)],
    lhs: &Matrix<T>,
    rhs: &Matrix<T>,
) -> Result<GroupRun<T>> {
    let bits = cfg.accumulator_bits;
    let width = cfg.width as usize;
    let mut grid = vec![Pe::<T>::default(); cfg.height as usize * width];
    let at = |i: usize, j: usize| i * width + j;
    let mut fifos: Vec<VecDeque<T>> = vec![VecDeque::new(); cfg.height as usize];
    let mut acc = Matrix::filled(lhs.rows(), rhs.cols(), T::default());
    let mut output = Matrix::filled(lhs.rows(), rhs.cols(), T::default());
    let mut tally = Tally::default();

    let mut next_load = 0usize;
    let mut loading: Option<(usize, usize)> = None;
    let mut shadow_ready: Option<usize> = None;
    let mut computing: Option<Computing> = None;
    let mut loaded_words = vec![0u64; tiles.len()];
    let mut compute_span = vec![0u64; tiles.len()];
    let mut finished = 0usize;
    let mut clock = 0u64;

    while finished < tiles.len() {
        // swap a fully loaded shadow tile in as soon as the array is free
        if computing.is_none() {
            if let Some(t) = shadow_ready.take() {
                let tile = tiles[t];
                for i in 0..tile.h {
                    for j in 0..tile.w {
                        let pe = &mut grid[at(i, j)];
                        pe.active = pe.shadow;
                        tally.intra += 1;
                    }
                }
                computing = Some(Computing {
                    tile: t,
                    chunk: 0,
                    local: 0,
                    drained: 0,
                    started: clock,
                });
            }
        }

        // the weight fetcher refills the shadow registers one row per cycle
        if loading.is_none() && shadow_ready.is_none() && next_load < tiles.len() {
            loading = Some((next_load, 0));
            next_load += 1;
        }
        if let Some((t, row)) = loading {
            let tile = tiles[t];
            for j in 0..tile.w {
                grid[at(row, j)].shadow = rhs.get(tile.k0 + row, tile.n0 + j);
                tally.ub += 1;
                tally.intra += 1;
                loaded_words[t] += 1;
            }
            if row + 1 == tile.h {
                loading = None;
                shadow_ready = Some(t);
            } else {
                loading = Some((t, row + 1));
            }
        }

        match computing.as_mut() {
            None if finished == 0 => tally.exposed += 1,
            None => tally.stalls += 1,
            Some(state) => {
                let tile = tiles[state.tile];
                let (r0, m_c) = chunks[state.chunk];
                let c = state.local;

                // bottom row hands over what it computed last cycle
                for j in 0..tile.w {
                    let offset = 1 + (tile.h - 1) + j;
                    if let Some(r) = wavefront_row(c, offset, m_c) {
                        let value = grid[at(tile.h - 1, j)].psum;
                        let (row, col) = (r0 + r, tile.n0 + j);
                        acc.set(row, col, T::accumulate(acc.get(row, col), value, bits)?);
                        tally.aa += 1;
                        state.drained += 1;
                    }
                }

                if c < m_c {
                    for (i, fifo) in fifos.iter_mut().enumerate().take(tile.h) {
                        fifo.push_back(lhs.get(r0 + c, tile.k0 + i));
                        tally.ub += 1;
                    }
                }

                // bottom-right first, so neighbour registers still hold last cycle's values
                for i in (0..tile.h).rev() {
                    for j in (0..tile.w).rev() {
                        if wavefront_row(c, i + j, m_c).is_none() {
                            continue;
                        }
                        let activation = if j == 0 {
                            fifos[i].pop_front().expect("activation FIFO underrun")
                        } else {
                            tally.inter += 1;
                            grid[at(i, j - 1)].act
                        };
                        let above = if i == 0 {
                            T::default()
                        } else {
                            tally.inter += 1;
                            grid[at(i - 1, j)].psum
                        };
                        let pe = &mut grid[at(i, j)];
                        pe.act = activation;
                        tally.intra += 1;
                        let weight = pe.active;
                        tally.intra += 1;
                        pe.psum = T::mac(above, activation, weight, bits)?;
                        tally.intra += 1;
                        tally.macs += 1;
                    }
                }

                state.local += 1;
                if state.drained == m_c * tile.w {
                    state.chunk += 1;
                    state.local = 0;
                    state.drained = 0;
                }
                if state.chunk == chunks.len() {
                    compute_span[state.tile] = clock + 1 - state.started;
                    if tile.k0 + tile.h == lhs.cols() {
                        for r in 0..lhs.rows() {
                            for j in tile.n0..tile.n0 + tile.w {
                                // accumulator readback, then unified-buffer write
                                let value = acc.get(r, j);
                                tally.ub += 1;
                                output.set(r, j, value);
                                tally.ub += 1;
                            }
                        }
                    }
                    computing = None;
                    finished += 1;
                }
            }
        }
        clock += 1;
    }
    tally.cycles = clock;

    let mut peak = Rational::from_integer(0);
    for t in 1..tiles.len() {
        let window = compute_span[t - 1].max(1);
        let candidate = Rational::new(i128::from(loaded_words[t]), i128::from(window));
        peak = peak.max(candidate);
    }
    Ok(GroupRun {
        output,
        tally,
        peak,
    })
}

/// Reference run with functional outputs.
pub fn execute<T: Element>(
    w: &GemmWorkload,
    cfg: &ArrayConfig,
    operands: Operands<'_, T>,
) -> Result<Execution<T>> {
    w.validate()?;
    cfg.validate()?;
    operands.validate(w, cfg)?;
    let tiles = schedule(
        w.k as usize,
        w.n as usize,
        cfg.height as usize,
        cfg.width as usize,
    );
    let chunks = chunking(w.m as usize, cfg.accumulator_depth as usize);

    let mut counters = MovementCounters::default();
    let mut outputs = Vec::with_capacity(w.repeat as usize);
    for g in 0..w.repeat as usize {
        let (lhs, rhs) = operands.group(g);
        let run = run_group(cfg, &tiles, &chunks, lhs, rhs)?;
        let t = run.tally;
        let group = MovementCounters {
            m_ub: t.ub,
            m_inter_pe: t.inter,
            m_intra_pe: t.intra,
            m_aa: t.aa,
            macs: t.macs,
            cycles: t.cycles,
            stall_cycles: t.stalls,
            peak_weight_words_per_cycle: run.peak,
        };
        debug_assert_eq!(t.exposed, tiles[0].h as u64);
        counters = counters
            .checked_add(&group)
            .ok_or_else(|| Error::CounterOverflow(w.source_layer.clone()))?;
        outputs.push(run.output);
    }
    Ok(Execution {
        report: EmulationReport::from_counters(counters, cfg),
        outputs,
    })
}

/// Reference counters for a workload, streaming zero-valued operands.
pub fn simulate(w: &GemmWorkload, cfg: &ArrayConfig) -> Result<EmulationReport> {
    w.validate()?;
    let lhs = Matrix::filled(w.m as usize, w.k as usize, 0i64);
    let rhs = Matrix::filled(w.k as usize, w.n as usize, 0i64);
    execute(w, cfg, Operands::Shared { lhs: &lhs, rhs: &rhs }).map(|run| run.report)
}
