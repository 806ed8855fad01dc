//! Design-space enumeration and sweep bookkeeping.
//!
//! The functions here run sequentially; callers that want parallelism can
//! fan out over [`sweep_tasks`] and call [`sweep_point`] per task, which
//! yields the same records in the same canonical order.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::config::ArrayConfig;
use crate::emulator::{emulate_network, EmulationReport};
use crate::energy::{energy_cost, normalize_per_model, EnergyWeights};
use crate::error::{Error, Result};
use crate::rational::{from_count, to_f64, Rational};
use crate::workload::{lower_network, GemmWorkload, NetworkSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DesignPoint {
    pub height: u32,
    pub width: u32,
}

impl DesignPoint {
    pub fn new(height: u32, width: u32) -> Self {
        DesignPoint { height, width }
    }

    pub fn pe_count(&self) -> u64 {
        u64::from(self.height) * u64::from(self.width)
    }
}

/// Inclusive `min..=max` in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisRange {
    pub min: u32,
    pub max: u32,
    pub step: u32,
}

impl AxisRange {
    pub fn new(min: u32, max: u32, step: u32) -> Result<Self> {
        let range = AxisRange { min, max, step };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min == 0 || self.step == 0 {
            return Err(Error::InvalidSweep("axis bounds and step must be positive"));
        }
        if self.min > self.max {
            return Err(Error::InvalidSweep("axis min exceeds max"));
        }
        if !(self.max - self.min).is_multiple_of(self.step) {
            return Err(Error::InvalidSweep("axis span is not a multiple of the step"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> impl Iterator<Item = u32> {
        (self.min..=self.max).step_by(self.step as usize)
    }
}

/// Rectangular grid of array dimensions sharing one configuration template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSweepSpec {
    pub height: AxisRange,
    pub width: AxisRange,
    pub base: ArrayConfig,
}

impl Default for GridSweepSpec {
    /// 16 to 256 in steps of 8 on both axes: 31 x 31 = 961 design points.
    fn default() -> Self {
        let axis = AxisRange {
            min: 16,
            max: 256,
            step: 8,
        };
        GridSweepSpec {
            height: axis,
            width: axis,
            base: ArrayConfig::default(),
        }
    }
}

impl GridSweepSpec {
    /// Height-major, both axes ascending.
    pub fn points(&self) -> Result<Vec<DesignPoint>> {
        self.height.validate()?;
        self.width.validate()?;
        self.base.with_dims(self.height.min, self.width.min).validate()?;
        Ok(self
            .height
            .values()
            .flat_map(|h| self.width.values().map(move |w| DesignPoint::new(h, w)))
            .collect())
    }
}

/// `height_part : width_part`, e.g. `4:1` for an array four times taller
/// than wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AspectRatio {
    pub height_part: u64,
    pub width_part: u64,
}

impl core::fmt::Display for AspectRatio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}", self.height_part, self.width_part)
    }
}

impl core::str::FromStr for AspectRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (h, w) = s
            .split_once(':')
            .ok_or(Error::InvalidSweep("ratio must look like `H:W`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidSweep("ratio parts must be positive integers"))
        };
        Ok(AspectRatio {
            height_part: parse(h)?,
            width_part: parse(w)?,
        })
    }
}

/// Arrays with a fixed PE count and varying aspect ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioSweepSpec {
    pub pe_count: u64,
    pub ratios: Vec<AspectRatio>,
    pub base: ArrayConfig,
}

pub const DEFAULT_RATIO_PE_COUNT: u64 = 4096;

impl Default for RatioSweepSpec {
    /// 4096 PEs, power-of-two ratios from 64:1 to 1:64.
    fn default() -> Self {
        let r = |h, w| AspectRatio {
            height_part: h,
            width_part: w,
        };
        RatioSweepSpec {
            pe_count: DEFAULT_RATIO_PE_COUNT,
            ratios: alloc::vec![
                r(64, 1),
                r(16, 1),
                r(4, 1),
                r(1, 1),
                r(1, 4),
                r(1, 16),
                r(1, 64)
            ],
            base: ArrayConfig::default(),
        }
    }
}

fn isqrt(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut x = v;
    let mut y = x.div_ceil(2);
    while y < x {
        x = y;
        y = (x + v / x) / 2;
    }
    x
}

impl RatioSweepSpec {
    /// Dimensions for each ratio, in the order the ratios are listed.
    pub fn dimensions(&self) -> Result<Vec<(AspectRatio, DesignPoint)>> {
        if !self.pe_count.is_power_of_two() {
            return Err(Error::InvalidSweep("pe_count must be a power of two"));
        }
        if self.ratios.is_empty() {
            return Err(Error::InvalidSweep("no ratios given"));
        }
        self.ratios
            .iter()
            .map(|&ratio| {
                if !ratio.height_part.is_power_of_two() || !ratio.width_part.is_power_of_two() {
                    return Err(Error::InvalidSweep("ratio parts must be powers of two"));
                }
                let non_square = Error::NonSquareDecomposition {
                    pe_count: self.pe_count,
                    height_part: ratio.height_part,
                    width_part: ratio.width_part,
                };
                // height^2 = pe_count * height_part / width_part
                let scaled = u128::from(self.pe_count) * u128::from(ratio.height_part);
                let den = u128::from(ratio.width_part);
                if scaled % den != 0 {
                    return Err(non_square);
                }
                let squared = scaled / den;
                let height = isqrt(squared);
                if height * height != squared || height == 0 {
                    return Err(non_square);
                }
                let width = u128::from(self.pe_count) / height;
                let fits = |v: u128| u32::try_from(v).ok();
                match (fits(height), fits(width)) {
                    (Some(h), Some(w)) if u128::from(self.pe_count) % height == 0 => {
                        Ok((ratio, DesignPoint::new(h, w)))
                    }
                    _ => Err(non_square),
                }
            })
            .collect()
    }
}

/// A model already lowered to GEMM workloads, reusable across design points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredModel {
    pub name: String,
    pub workloads: Vec<GemmWorkload>,
}

impl LoweredModel {
    pub fn from_network(net: &NetworkSpec) -> Result<Self> {
        Ok(LoweredModel {
            name: net.model_name.clone(),
            workloads: lower_network(net)?,
        })
    }
}

/// One row of a sweep: a model evaluated at a design point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRecord {
    pub model_name: String,
    pub height: u32,
    pub width: u32,
    pub cycles: u64,
    pub utilization: Rational,
    pub energy: Rational,
    pub m_ub: u64,
    pub m_inter_pe: u64,
    pub m_intra_pe: u64,
    pub m_aa: u64,
    pub stall_cycles: u64,
    pub peak_weight_words_per_cycle: Rational,
}

impl SweepRecord {
    pub fn from_report(
        model_name: &str,
        point: DesignPoint,
        report: &EmulationReport,
        weights: &EnergyWeights,
    ) -> Self {
        let c = &report.counters;
        SweepRecord {
            model_name: String::from(model_name),
            height: point.height,
            width: point.width,
            cycles: c.cycles,
            utilization: report.utilization,
            energy: energy_cost(c, weights).value(),
            m_ub: c.m_ub,
            m_inter_pe: c.m_inter_pe,
            m_intra_pe: c.m_intra_pe,
            m_aa: c.m_aa,
            stall_cycles: c.stall_cycles,
            peak_weight_words_per_cycle: c.peak_weight_words_per_cycle,
        }
    }

    pub fn design_point(&self) -> DesignPoint {
        DesignPoint::new(self.height, self.width)
    }
}

pub fn sweep_point(
    model: &LoweredModel,
    point: DesignPoint,
    base: &ArrayConfig,
    weights: &EnergyWeights,
) -> Result<SweepRecord> {
    let cfg = base.with_dims(point.height, point.width);
    let at_point = |e: Error| Error::AtDesignPoint {
        height: point.height,
        width: point.width,
        source: Box::new(e),
    };
    cfg.validate().map_err(at_point)?;
    let report = emulate_network(&model.workloads, &cfg).map_err(at_point)?;
    Ok(SweepRecord::from_report(&model.name, point, &report, weights))
}

/// Every (model, point) pair in canonical output order: models by name
/// (stable for equal names), then the points in the order given.
pub fn sweep_tasks<'m>(
    models: &'m [LoweredModel],
    points: &[DesignPoint],
) -> Vec<(&'m LoweredModel, DesignPoint)> {
    let mut ordered: Vec<&LoweredModel> = models.iter().collect();
    ordered.sort_by(|a, b| a.name.cmp(&b.name));
    ordered
        .into_iter()
        .flat_map(|m| points.iter().map(move |&p| (m, p)))
        .collect()
}

pub fn grid_sweep(
    models: &[LoweredModel],
    spec: &GridSweepSpec,
    weights: &EnergyWeights,
) -> Result<Vec<SweepRecord>> {
    let points = spec.points()?;
    sweep_tasks(models, &points)
        .into_iter()
        .map(|(model, point)| sweep_point(model, point, &spec.base, weights))
        .collect()
}

pub fn ratio_sweep(
    models: &[LoweredModel],
    spec: &RatioSweepSpec,
    weights: &EnergyWeights,
) -> Result<Vec<SweepRecord>> {
    let points: Vec<DesignPoint> = spec.dimensions()?.into_iter().map(|(_, p)| p).collect();
    sweep_tasks(models, &points)
        .into_iter()
        .map(|(model, point)| sweep_point(model, point, &spec.base, weights))
        .collect()
}

/// Cross-model averages of per-model min-normalized energy and cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustRow {
    pub height: u32,
    pub width: u32,
    pub avg_norm_energy: f64,
    pub avg_norm_cycles: f64,
}

impl RobustRow {
    pub fn design_point(&self) -> DesignPoint {
        DesignPoint::new(self.height, self.width)
    }
}

/// Normalizes energy and cycles per model (best design point = 1) and
/// averages them across models per design point.
///
/// Every model must cover exactly the same set of design points.
pub fn robustness_table(records: &[SweepRecord]) -> Result<Vec<RobustRow>> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut by_model: BTreeMap<&str, BTreeMap<DesignPoint, &SweepRecord>> = BTreeMap::new();
    for r in records {
        let points = by_model.entry(r.model_name.as_str()).or_default();
        if points.insert(r.design_point(), r).is_some() {
            return Err(Error::DuplicatePoint {
                model: r.model_name.clone(),
                height: r.height,
                width: r.width,
            });
        }
    }
    let all_points: BTreeSet<DesignPoint> = by_model
        .values()
        .flat_map(|points| points.keys().copied())
        .collect();
    for (model, points) in &by_model {
        if let Some(missing) = all_points.iter().find(|p| !points.contains_key(p)) {
            return Err(Error::MissingDesignPoint {
                model: String::from(*model),
                height: missing.height,
                width: missing.width,
            });
        }
    }

    let mut sums: BTreeMap<DesignPoint, (f64, f64)> =
        all_points.iter().map(|&p| (p, (0.0, 0.0))).collect();
    for points in by_model.values() {
        let energy: Vec<(DesignPoint, Rational)> =
            points.iter().map(|(&p, r)| (p, r.energy)).collect();
        let cycles: Vec<(DesignPoint, Rational)> =
            points.iter().map(|(&p, r)| (p, from_count(r.cycles))).collect();
        for (p, v) in normalize_per_model(&energy)? {
            sums.get_mut(&p).expect("covered point").0 += to_f64(&v);
        }
        for (p, v) in normalize_per_model(&cycles)? {
            sums.get_mut(&p).expect("covered point").1 += to_f64(&v);
        }
    }
    let count = by_model.len() as f64;
    Ok(sums
        .into_iter()
        .map(|(p, (e, c))| RobustRow {
            height: p.height,
            width: p.width,
            avg_norm_energy: e / count,
            avg_norm_cycles: c / count,
        })
        .collect())
}
