use alloc::vec::Vec;

use crate::config::ArrayConfig;
use crate::error::Result;
use crate::workload::GemmWorkload;

/// How a GEMM is cut into resident weight tiles and accumulator chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    /// Tile heights along K, each at most `config.height`.
    pub k_tiles: Vec<u64>,
    /// Tile widths along N, each at most `config.width`.
    pub n_tiles: Vec<u64>,
    /// Activation rows per streaming pass, each at most `accumulator_depth`.
    pub m_chunks: Vec<u64>,
}

/// Greedy full-size-first split; only the last part may be short.
pub(crate) fn split(total: u64, cap: u64) -> Vec<u64> {
    let full = total / cap;
    let rest = total % cap;
    let mut parts = Vec::with_capacity(full as usize + usize::from(rest > 0));
    parts.extend(core::iter::repeat_n(cap, full as usize));
    if rest > 0 {
        parts.push(rest);
    }
    parts
}

pub fn plan_tiles(w: &GemmWorkload, cfg: &ArrayConfig) -> Result<TilePlan> {
    w.validate()?;
    cfg.validate()?;
    Ok(TilePlan {
        k_tiles: split(w.k, u64::from(cfg.height)),
        n_tiles: split(w.n, u64::from(cfg.width)),
        m_chunks: split(w.m, u64::from(cfg.accumulator_depth)),
    })
}

impl TilePlan {
    pub fn tile_count(&self) -> usize {
        self.k_tiles.len() * self.n_tiles.len()
    }

    /// Resident tiles in execution order: n-tile outer, k-tile inner.
    /// Yields `(k_offset, h_t, n_offset, w_t)`.
    pub fn tiles(&self) -> impl Iterator<Item = (u64, u64, u64, u64)> + '_ {
        offsets(&self.n_tiles).flat_map(move |(n0, w_t)| {
            offsets(&self.k_tiles).map(move |(k0, h_t)| (k0, h_t, n0, w_t))
        })
    }

    /// `(row_offset, m_c)` for each accumulator chunk.
    pub fn chunks(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        offsets(&self.m_chunks)
    }
}

fn offsets(parts: &[u64]) -> impl Iterator<Item = (u64, u64)> + '_ {
    parts.iter().scan(0u64, |start, &len| {
        let at = *start;
        *start += len;
        Some((at, len))
    })
}
