//! Analytical weight-stationary emulator.
//!
//! Counts are produced per resident tile in closed form instead of stepping
//! the array cycle by cycle; [`crate::reference`] steps it and must agree.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::config::ArrayConfig;
use crate::counters::MovementCounters;
use crate::error::{Error, OverflowSite, Result};
use crate::matrix::{Element, Matrix};
use crate::plan::{plan_tiles, TilePlan};
use crate::rational::Rational;
use crate::workload::GemmWorkload;

/// One (tile, chunk) step of the schedule of a single group.
///
/// The exposed load and stall of a tile are attributed to its first chunk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileTrace {
    pub tile_id: u64,
    pub h_t: u64,
    pub w_t: u64,
    pub m_chunk: u64,
    pub compute_cycles: u64,
    pub exposed_load_cycles: u64,
    pub stalls: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmulationReport {
    pub counters: MovementCounters,
    /// `macs / (height * width * cycles)`.
    pub utilization: Rational,
    pub trace: Option<Vec<TileTrace>>,
}

impl EmulationReport {
    pub(crate) fn from_counters(counters: MovementCounters, cfg: &ArrayConfig) -> Self {
        let slots = u128::from(cfg.pe_count()) * u128::from(counters.cycles);
        let utilization = if slots == 0 {
            Rational::from_integer(0)
        } else {
            Rational::new(i128::from(counters.macs), slots as i128)
        };
        EmulationReport {
            counters,
            utilization,
            trace: None,
        }
    }
}

/// Matrices for a functional run.
///
/// `Shared` feeds the same operands to every group of a grouped workload;
/// `PerGroup` must hold exactly `repeat` pairs.
#[derive(Debug, Clone, Copy)]
pub enum Operands<'a, T> {
    Shared {
        lhs: &'a Matrix<T>,
        rhs: &'a Matrix<T>,
    },
    PerGroup(&'a [(Matrix<T>, Matrix<T>)]),
}

impl<'a, T: Element> Operands<'a, T> {
    pub(crate) fn validate(&self, w: &GemmWorkload, cfg: &ArrayConfig) -> Result<()> {
        let groups = match *self {
            Operands::Shared { .. } => 1,
            Operands::PerGroup(groups) => {
                if groups.len() as u64 != w.repeat {
                    return Err(Error::InvalidWorkload(
                        "per-group operands must supply exactly `repeat` pairs",
                    ));
                }
                groups.len()
            }
        };
        for g in 0..groups {
            let (lhs, rhs) = self.group(g);
            check_shape("lhs", lhs, w.m, w.k)?;
            check_shape("rhs", rhs, w.k, w.n)?;
            for &a in lhs.as_slice() {
                a.check_operand(cfg.activation_bits, OverflowSite::Activation)?;
            }
            for &b in rhs.as_slice() {
                b.check_operand(cfg.weight_bits, OverflowSite::Weight)?;
            }
        }
        Ok(())
    }

    pub(crate) fn group(&self, g: usize) -> (&'a Matrix<T>, &'a Matrix<T>) {
        match *self {
            Operands::Shared { lhs, rhs } => (lhs, rhs),
            Operands::PerGroup(groups) => (&groups[g].0, &groups[g].1),
        }
    }
}

fn check_shape<T: Copy>(operand: &'static str, mat: &Matrix<T>, rows: u64, cols: u64) -> Result<()> {
    if mat.rows() as u64 != rows || mat.cols() as u64 != cols {
        return Err(Error::ShapeMismatch {
            operand,
            expected_rows: rows as usize,
            expected_cols: cols as usize,
            found_rows: mat.rows(),
            found_cols: mat.cols(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution<T> {
    pub report: EmulationReport,
    /// One product per group.
    pub outputs: Vec<Matrix<T>>,
}

#[derive(Default)]
struct GroupTotals {
    m_ub: u128,
    inter: u128,
    intra: u128,
    aa: u128,
    macs: u128,
    cycles: u128,
    stalls: u128,
    /// Largest (words, window) seen, compared by cross multiplication.
    peak: Option<(u128, u128)>,
}

fn schedule_group(
    w: &GemmWorkload,
    plan: &TilePlan,
    mut trace: Option<&mut Vec<TileTrace>>,
) -> GroupTotals {
    let m = u128::from(w.m);
    let chunks = plan.m_chunks.len() as u128;
    let mut t = GroupTotals::default();
    let mut previous_compute: Option<u128> = None;

    for (tile_id, (_, h_t, _, w_t)) in plan.tiles().enumerate() {
        let (h, wd) = (u128::from(h_t), u128::from(w_t));
        let compute = m + chunks * (h + wd - 1);
        let (exposed, stall) = match previous_compute {
            None => (h, 0),
            Some(window) => {
                let words = h * wd;
                let window = window.max(1);
                let beats = match t.peak {
                    Some((best_words, best_window)) => words * best_window > best_words * window,
                    None => true,
                };
                if beats {
                    t.peak = Some((words, window));
                }
                (0, h.saturating_sub(window))
            }
        };

        let tile_macs = m * h * wd;
        t.m_ub += m * h + h * wd;
        t.inter += m * (h * (wd - 1) + wd * (h - 1));
        t.aa += m * wd;
        t.macs += tile_macs;
        t.intra += 3 * tile_macs + 2 * h * wd;
        t.cycles += compute + exposed + stall;
        t.stalls += stall;

        if let Some(out) = trace.as_deref_mut() {
            for (i, (_, m_c)) in plan.chunks().enumerate() {
                let first = i == 0;
                out.push(TileTrace {
                    tile_id: tile_id as u64,
                    h_t,
                    w_t,
                    m_chunk: m_c,
                    compute_cycles: m_c + h_t + w_t - 1,
                    exposed_load_cycles: if first { exposed as u64 } else { 0 },
                    stalls: if first { stall as u64 } else { 0 },
                });
            }
        }
        previous_compute = Some(compute);
    }
    // output writeback and accumulator readback, once per group
    t.m_ub += 2 * m * u128::from(w.n);
    t
}

fn to_counters(w: &GemmWorkload, t: GroupTotals) -> Result<MovementCounters> {
    let overflow = || Error::CounterOverflow(w.source_layer.to_string());
    let repeat = u128::from(w.repeat);
    let total = |v: u128| -> Result<u64> {
        v.checked_mul(repeat)
            .and_then(|v| u64::try_from(v).ok())
            .ok_or_else(overflow)
    };
    let peak = match t.peak {
        Some((words, window)) => Rational::new(words as i128, window as i128),
        None => Rational::from_integer(0),
    };
    Ok(MovementCounters {
        m_ub: total(t.m_ub)?,
        m_inter_pe: total(t.inter)?,
        m_intra_pe: total(t.intra)?,
        m_aa: total(t.aa)?,
        macs: total(t.macs)?,
        cycles: total(t.cycles)?,
        stall_cycles: total(t.stalls)?,
        peak_weight_words_per_cycle: peak,
    })
}

/// Every counter is bounded by a small multiple of the MAC count, so a
/// MAC count that fits comfortably in `u64` keeps the u128 sums safe.
fn check_size(w: &GemmWorkload) -> Result<()> {
    let macs = u128::from(w.m)
        .checked_mul(u128::from(w.k))
        .and_then(|v| v.checked_mul(u128::from(w.n)))
        .and_then(|v| v.checked_mul(u128::from(w.repeat)));
    match macs {
        Some(v) if v <= u128::from(u64::MAX / 8) => Ok(()),
        _ => Err(Error::CounterOverflow(w.source_layer.to_string())),
    }
}

fn run(w: &GemmWorkload, cfg: &ArrayConfig, traced: bool) -> Result<EmulationReport> {
    w.validate()?;
    check_size(w)?;
    let plan = plan_tiles(w, cfg)?;
    let mut trace = traced.then(Vec::new);
    let totals = schedule_group(w, &plan, trace.as_mut());
    let counters = to_counters(w, totals)?;
    let mut report = EmulationReport::from_counters(counters, cfg);
    report.trace = trace;
    Ok(report)
}

/// Cycles, utilization and data-movement counts for one GEMM workload.
pub fn emulate_gemm(w: &GemmWorkload, cfg: &ArrayConfig) -> Result<EmulationReport> {
    run(w, cfg, false)
}

/// Like [`emulate_gemm`], additionally recording one [`TileTrace`] per
/// (tile, chunk) of a single group.
pub fn emulate_gemm_traced(w: &GemmWorkload, cfg: &ArrayConfig) -> Result<EmulationReport> {
    run(w, cfg, true)
}

/// Runs the workload functionally through the same tile schedule.
///
/// Partial sums are formed top to bottom inside a tile and added into the
/// accumulator tile by tile; integer overflow at either step is an error.
pub fn execute_gemm<T: Element>(
    w: &GemmWorkload,
    cfg: &ArrayConfig,
    operands: Operands<'_, T>,
) -> Result<Execution<T>> {
    w.validate()?;
    cfg.validate()?;
    operands.validate(w, cfg)?;
    let report = emulate_gemm(w, cfg)?;
    let plan = plan_tiles(w, cfg)?;

    let outputs = match operands {
        Operands::Shared { lhs, rhs } => {
            let out = tiled_product(&plan, cfg, lhs, rhs)?;
            alloc::vec![out; w.repeat as usize]
        }
        Operands::PerGroup(_) => (0..w.repeat as usize)
            .map(|g| {
                let (lhs, rhs) = operands.group(g);
                tiled_product(&plan, cfg, lhs, rhs)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(Execution { report, outputs })
}

fn tiled_product<T: Element>(
    plan: &TilePlan,
    cfg: &ArrayConfig,
    lhs: &Matrix<T>,
    rhs: &Matrix<T>,
) -> Result<Matrix<T>> {
    let bits = cfg.accumulator_bits;
    let mut acc = Matrix::filled(lhs.rows(), rhs.cols(), T::default());
    for (k0, h_t, n0, w_t) in plan.tiles() {
        let (k0, h_t, n0, w_t) = (k0 as usize, h_t as usize, n0 as usize, w_t as usize);
        for (r0, m_c) in plan.chunks() {
            for r in r0 as usize..(r0 + m_c) as usize {
                for j in n0..n0 + w_t {
                    let mut psum = T::default();
                    for i in k0..k0 + h_t {
                        psum = T::mac(psum, lhs.get(r, i), rhs.get(i, j), bits)?;
                    }
                    acc.set(r, j, T::accumulate(acc.get(r, j), psum, bits)?);
                }
            }
        }
    }
    Ok(acc)
}

/// Aggregate over a whole model: counters summed, peak bandwidth maximised,
/// utilization recomputed from the totals.
pub fn emulate_network(workloads: &[GemmWorkload], cfg: &ArrayConfig) -> Result<EmulationReport> {
    if workloads.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = MovementCounters::default();
    for w in workloads {
        let report = emulate_gemm(w, cfg)?;
        total = total
            .checked_add(&report.counters)
            .ok_or_else(|| Error::CounterOverflow(w.source_layer.to_string()))?;
    }
    Ok(EmulationReport::from_counters(total, cfg))
}
