use crate::rational::Rational;

/// Access counts for one emulation, classified the way the energy model
/// weighs them, plus MAC and cycle totals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MovementCounters {
    /// Unified-buffer reads and writes.
    pub m_ub: u64,
    /// Reads of a neighbouring PE's register.
    pub m_inter_pe: u64,
    /// Register reads and writes inside a PE.
    pub m_intra_pe: u64,
    /// Partial sums leaving the array into the accumulator array.
    pub m_aa: u64,
    pub macs: u64,
    pub cycles: u64,
    pub stall_cycles: u64,
    /// Weight words per cycle the fetcher must sustain to hide every tile
    /// load behind the previous tile's compute.
    pub peak_weight_words_per_cycle: Rational,
}

impl MovementCounters {
    /// Field-wise sum, peak bandwidth as a maximum. `None` on overflow.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        Some(MovementCounters {
            m_ub: self.m_ub.checked_add(other.m_ub)?,
            m_inter_pe: self.m_inter_pe.checked_add(other.m_inter_pe)?,
            m_intra_pe: self.m_intra_pe.checked_add(other.m_intra_pe)?,
            m_aa: self.m_aa.checked_add(other.m_aa)?,
            macs: self.macs.checked_add(other.macs)?,
            cycles: self.cycles.checked_add(other.cycles)?,
            stall_cycles: self.stall_cycles.checked_add(other.stall_cycles)?,
            peak_weight_words_per_cycle: self
                .peak_weight_words_per_cycle
                .max(other.peak_weight_words_per_cycle),
        })
    }

    /// Every count multiplied by `factor`; peak bandwidth unchanged.
    pub fn checked_scale(&self, factor: u64) -> Option<Self> {
        Some(MovementCounters {
            m_ub: self.m_ub.checked_mul(factor)?,
            m_inter_pe: self.m_inter_pe.checked_mul(factor)?,
            m_intra_pe: self.m_intra_pe.checked_mul(factor)?,
            m_aa: self.m_aa.checked_mul(factor)?,
            macs: self.macs.checked_mul(factor)?,
            cycles: self.cycles.checked_mul(factor)?,
            stall_cycles: self.stall_cycles.checked_mul(factor)?,
            peak_weight_words_per_cycle: self.peak_weight_words_per_cycle,
        })
    }
}
