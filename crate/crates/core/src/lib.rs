//! Weight-stationary systolic array emulator.
//!
//! The crate lowers DNN layers to GEMM workloads, schedules them as weight
//! tiles on an `height x width` processing-element array and reports cycles,
//! utilization and four classes of data movement:
//!
//! - unified-buffer accesses (`m_ub`)
//! - reads of neighbouring PE registers (`m_inter_pe`)
//! - register accesses inside a PE (`m_intra_pe`)
//! - transfers from the array into the accumulator array (`m_aa`)
//!
//! These counters feed a weighted, dimensionless energy score. On top of the
//! emulator sit design-space exploration helpers (rectangular grids,
//! equal-PE-count aspect-ratio sweeps, cross-model robustness averaging) and
//! an exact non-dominated sort for extracting Pareto frontiers.
//!
//! # Counting rules
//!
//! Tiles are visited n-tile outer, k-tile inner. Each tile of `h_t x w_t`
//! weights stays resident while every accumulator chunk of `m_c` activation
//! rows streams through it:
//!
//! - compute cycles per (tile, chunk) = `m_c + h_t + w_t - 1`
//! - the first tile's weight load (`h_t` cycles) is exposed; later loads
//!   overlap the previous tile's compute and stall only by the excess
//! - everything is multiplied by the workload's `repeat` (group count)
//!
//! [`reference`] implements the same rules as a cycle-by-cycle register
//! transfer model and serves as the oracle for [`emulator`].
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod config;
pub mod counters;
pub mod emulator;
pub mod energy;
pub mod error;
pub mod explore;
pub mod matrix;
pub mod pareto;
pub mod plan;
pub mod rational;
pub mod reference;
pub mod workload;

pub use config::ArrayConfig;
pub use counters::MovementCounters;
pub use emulator::{
    emulate_gemm, emulate_gemm_traced, emulate_network, execute_gemm, EmulationReport, Execution,
    Operands, TileTrace,
};
pub use energy::{energy_cost, normalize_per_model, EnergyCost, EnergyWeights};
pub use error::{Error, OverflowSite, Result};
pub use explore::{
    grid_sweep, ratio_sweep, robustness_table, sweep_point, AspectRatio, AxisRange, DesignPoint,
    GridSweepSpec, LoweredModel, RatioSweepSpec, RobustRow, SweepRecord,
};
pub use matrix::{Element, Matrix};
pub use pareto::{orient_objectives, pareto_front, Objective, ObjectiveSource, ParetoPoint};
pub use plan::{plan_tiles, TilePlan};
pub use rational::Rational;
pub use workload::{lower_layer, lower_network, GemmWorkload, LayerKind, LayerSpec, NetworkSpec};
