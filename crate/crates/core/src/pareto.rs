//! Two-objective Pareto ranking by fast non-dominated sorting.
//!
//! Both objectives are minimized. `a` dominates `b` when it is no worse in
//! both and strictly better in at least one, so points with identical
//! objectives never dominate each other and share a rank.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::explore::{DesignPoint, RobustRow, SweepRecord};
use crate::rational::{from_count, to_f64};

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint<I> {
    pub id: I,
    pub objectives: (f64, f64),
    /// 1 for the non-dominated frontier, 2 for the frontier once rank 1 is
    /// removed, and so on.
    pub rank: u32,
}

pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Ranks every point; output is in input order.
pub fn pareto_front<I: Clone>(points: &[(I, f64, f64)]) -> Result<Vec<ParetoPoint<I>>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if points.iter().any(|(_, a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::NonFiniteObjective);
    }
    let n = points.len();
    let obj = |i: usize| (points[i].1, points[i].2);

    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(obj(p), obj(q)) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates(obj(q), obj(p)) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut rank = vec![0u32; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    let mut current = 1;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &p in &front {
            rank[p] = current;
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        front = next;
        current += 1;
    }

    Ok(points
        .iter()
        .zip(rank)
        .map(|((id, a, b), rank)| ParetoPoint {
            id: id.clone(),
            objectives: (*a, *b),
            rank,
        })
        .collect())
}

/// A named, minimization-oriented metric of a sweep or robustness row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Cycles,
    Energy,
    /// Oriented as `1 - utilization`.
    Utilization,
    MUb,
    MInterPe,
    MIntraPe,
    MAa,
    StallCycles,
    PeakWeightWordsPerCycle,
    AvgNormEnergy,
    AvgNormCycles,
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::Cycles => "cycles",
            Objective::Energy => "energy",
            Objective::Utilization => "utilization",
            Objective::MUb => "m_ub",
            Objective::MInterPe => "m_inter_pe",
            Objective::MIntraPe => "m_intra_pe",
            Objective::MAa => "m_aa",
            Objective::StallCycles => "stall_cycles",
            Objective::PeakWeightWordsPerCycle => "peak_weight_words_per_cycle",
            Objective::AvgNormEnergy => "avg_norm_energy",
            Objective::AvgNormCycles => "avg_norm_cycles",
        }
    }

    const ALL: [Objective; 11] = [
        Objective::Cycles,
        Objective::Energy,
        Objective::Utilization,
        Objective::MUb,
        Objective::MInterPe,
        Objective::MIntraPe,
        Objective::MAa,
        Objective::StallCycles,
        Objective::PeakWeightWordsPerCycle,
        Objective::AvgNormEnergy,
        Objective::AvgNormCycles,
    ];
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::UnknownObjective(s.to_string()))
    }
}

/// Rows that can be ranked: a design point plus named metrics.
pub trait ObjectiveSource {
    fn design_point(&self) -> DesignPoint;
    /// Raw (not yet oriented) value, `None` if the row has no such metric.
    fn raw_objective(&self, objective: Objective) -> Option<f64>;
}

impl ObjectiveSource for SweepRecord {
    fn design_point(&self) -> DesignPoint {
        SweepRecord::design_point(self)
    }

    fn raw_objective(&self, objective: Objective) -> Option<f64> {
        let count = |v: u64| to_f64(&from_count(v));
        Some(match objective {
            Objective::Cycles => count(self.cycles),
            Objective::Energy => to_f64(&self.energy),
            Objective::Utilization => to_f64(&self.utilization),
            Objective::MUb => count(self.m_ub),
            Objective::MInterPe => count(self.m_inter_pe),
            Objective::MIntraPe => count(self.m_intra_pe),
            Objective::MAa => count(self.m_aa),
            Objective::StallCycles => count(self.stall_cycles),
            Objective::PeakWeightWordsPerCycle => to_f64(&self.peak_weight_words_per_cycle),
            Objective::AvgNormEnergy | Objective::AvgNormCycles => return None,
        })
    }
}

impl ObjectiveSource for RobustRow {
    fn design_point(&self) -> DesignPoint {
        RobustRow::design_point(self)
    }

    fn raw_objective(&self, objective: Objective) -> Option<f64> {
        match objective {
            Objective::AvgNormEnergy => Some(self.avg_norm_energy),
            Objective::AvgNormCycles => Some(self.avg_norm_cycles),
            _ => None,
        }
    }
}

fn oriented<R: ObjectiveSource>(row: &R, objective: Objective) -> Result<f64> {
    let raw = row
        .raw_objective(objective)
        .ok_or_else(|| Error::UnknownObjective(String::from(objective.name())))?;
    Ok(match objective {
        Objective::Utilization => 1.0 - raw,
        _ => raw,
    })
}

/// Extracts `(design point, a, b)` with both objectives to be minimized.
pub fn orient_objectives<R: ObjectiveSource>(
    rows: &[R],
    objectives: (Objective, Objective),
) -> Result<Vec<(DesignPoint, f64, f64)>> {
    rows.iter()
        .map(|row| {
            Ok((
                row.design_point(),
                oriented(row, objectives.0)?,
                oriented(row, objectives.1)?,
            ))
        })
        .collect()
}
