//! Dimensionless data-movement energy score.
//!
//! `E = 6 M_ub + 2 (M_inter_pe + M_aa) + M_intra_pe` with the default
//! weights: a unified-buffer access costs six register accesses, a
//! neighbour-PE or accumulator transfer two.

use alloc::vec::Vec;

use crate::counters::MovementCounters;
use crate::error::{Error, Result};
use crate::rational::{from_count, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyWeights {
    pub ub: Rational,
    pub inter_pe: Rational,
    pub aa: Rational,
    pub intra_pe: Rational,
}

impl Default for EnergyWeights {
    fn default() -> Self {
        EnergyWeights {
            ub: Rational::from_integer(6),
            inter_pe: Rational::from_integer(2),
            aa: Rational::from_integer(2),
            intra_pe: Rational::from_integer(1),
        }
    }
}

impl EnergyWeights {
    pub fn new(ub: Rational, inter_pe: Rational, aa: Rational, intra_pe: Rational) -> Result<Self> {
        let zero = Rational::from_integer(0);
        if [ub, inter_pe, aa, intra_pe].iter().any(|w| *w <= zero) {
            return Err(Error::NonPositiveMetric);
        }
        Ok(EnergyWeights {
            ub,
            inter_pe,
            aa,
            intra_pe,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnergyCost(pub Rational);

impl EnergyCost {
    pub fn value(&self) -> Rational {
        self.0
    }
}

pub fn energy_cost(c: &MovementCounters, w: &EnergyWeights) -> EnergyCost {
    EnergyCost(
        w.ub * from_count(c.m_ub)
            + w.inter_pe * from_count(c.m_inter_pe)
            + w.aa * from_count(c.m_aa)
            + w.intra_pe * from_count(c.m_intra_pe),
    )
}

/// Divides every value by the smallest one, so the best entry maps to 1.
pub fn normalize_per_model<I: Clone>(records: &[(I, Rational)]) -> Result<Vec<(I, Rational)>> {
    let min = records
        .iter()
        .map(|(_, v)| *v)
        .min()
        .ok_or(Error::EmptyInput)?;
    if min <= Rational::from_integer(0) {
        return Err(Error::NonPositiveMetric);
    }
    Ok(records
        .iter()
        .map(|(id, v)| (id.clone(), *v / min))
        .collect())
}
