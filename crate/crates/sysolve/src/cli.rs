//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for unreadable or invalid input, 2 when the
//! emulator itself fails (accumulator overflow, counter overflow).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sysolve_core::rational::to_f64;
use sysolve_core::{
    emulate_gemm_traced, emulate_network, energy_cost, execute_gemm, lower_network,
    orient_objectives, pareto_front, robustness_table, ArrayConfig, AspectRatio, AxisRange,
    DesignPoint, EnergyWeights, GridSweepSpec, LoweredModel, Matrix, Objective, Operands,
    ParetoPoint, Rational, RatioSweepSpec,
};

use crate::error::{Error, Result};
use crate::files::{read_network, read_weights};
use crate::sweep::{stream_to_file, thread_count};
use crate::tables::{self, RawTable};

#[derive(Debug, Parser)]
#[command(name = "sysolve", version, about = "Weight-stationary systolic array emulator and design-space explorer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emulate one model on one array and print a JSON report.
    Emulate(EmulateArgs),
    /// Sweep models over a rectangular grid of array dimensions.
    Sweep(SweepArgs),
    /// Sweep models over aspect ratios at a fixed PE count.
    RatioSweep(RatioSweepArgs),
    /// Average per-model normalized energy and cycles of a sweep.
    Robust(RobustArgs),
    /// Pareto frontier of a sweep or robustness table.
    Pareto(ParetoArgs),
    /// Reshape one metric of a sweep into a height x width matrix.
    Heatmap(HeatmapArgs),
}

/// Array parameters other than its dimensions.
#[derive(Debug, Clone, Args)]
pub struct ArrayArgs {
    #[arg(long, default_value_t = sysolve_core::config::DEFAULT_WEIGHT_BITS)]
    pub weight_bits: u32,
    #[arg(long, default_value_t = sysolve_core::config::DEFAULT_ACTIVATION_BITS)]
    pub activation_bits: u32,
    #[arg(long, default_value_t = sysolve_core::config::DEFAULT_ACCUMULATOR_BITS)]
    pub accumulator_bits: u32,
    /// Output rows the accumulator array holds per tile pass.
    #[arg(long, default_value_t = sysolve_core::config::DEFAULT_ACCUMULATOR_DEPTH)]
    pub accumulator_depth: u32,
    #[arg(long, default_value_t = sysolve_core::config::DEFAULT_FIFO_DEPTH)]
    pub fifo_depth: u32,
    /// JSON energy weights, e.g. {"ub":6,"inter_pe":2,"aa":2,"intra_pe":1}.
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
}

impl ArrayArgs {
    fn config(&self, height: u32, width: u32) -> ArrayConfig {
        ArrayConfig {
            height,
            width,
            weight_bits: self.weight_bits,
            activation_bits: self.activation_bits,
            accumulator_bits: self.accumulator_bits,
            accumulator_depth: self.accumulator_depth,
            fifo_depth: self.fifo_depth,
        }
    }

    fn weights(&self) -> Result<EnergyWeights> {
        self.weights_file
            .as_deref()
            .map_or(Ok(EnergyWeights::default()), read_weights)
    }
}

#[derive(Debug, Args)]
pub struct EmulateArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub height: u32,
    #[arg(long)]
    pub width: u32,
    #[command(flatten)]
    pub array: ArrayArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the tile schedule of one layer as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Layer to trace; may be omitted for single-layer models.
    #[arg(long, requires = "trace")]
    pub trace_layer: Option<String>,
    /// Also run every layer functionally on worst-case operands (the most
    /// negative representable values) to check the accumulator width.
    #[arg(long)]
    pub execute: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(required = true)]
    pub models: Vec<PathBuf>,
    /// hmin:hmax:hstep,wmin:wmax:wstep
    #[arg(long, default_value = "16:256:8,16:256:8", value_parser = parse_grid)]
    pub grid: (AxisRange, AxisRange),
    #[command(flatten)]
    pub array: ArrayArgs,
    #[command(flatten)]
    pub output: SweepOutput,
}

#[derive(Debug, Args)]
pub struct SweepOutput {
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep the rows of an interrupted `--out` file and compute the rest.
    #[arg(long, requires = "out")]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct RatioSweepArgs {
    #[arg(required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long, default_value_t = sysolve_core::explore::DEFAULT_RATIO_PE_COUNT)]
    pub pe_count: u64,
    /// Comma-separated height:width ratios.
    #[arg(long, value_delimiter = ',', default_value = "64:1,16:1,4:1,1:1,1:4,1:16,1:64")]
    pub ratios: Vec<AspectRatio>,
    #[command(flatten)]
    pub array: ArrayArgs,
    #[command(flatten)]
    pub output: SweepOutput,
}

#[derive(Debug, Args)]
pub struct RobustArgs {
    pub sweep: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    /// Sweep CSV or robustness CSV.
    pub table: PathBuf,
    /// Two objectives to minimize; `utilization` is ranked as 1 - utilization.
    /// Defaults to cycles,energy for sweeps and avg_norm_cycles,avg_norm_energy
    /// for robustness tables.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub objectives: Option<Vec<Objective>>,
    /// Model to rank when the sweep holds several.
    #[arg(long)]
    pub model: Option<String>,
    /// Emit every point with its rank instead of the frontier only.
    #[arg(long)]
    pub all_ranks: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    pub sweep: PathBuf,
    /// Any numeric sweep column, e.g. energy, cycles or utilization.
    #[arg(long)]
    pub metric: String,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_axis(text: &str) -> std::result::Result<AxisRange, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [min, max, step] = parts[..] else {
        return Err(format!("`{text}` is not min:max:step"));
    };
    let num = |v: &str| v.trim().parse::<u32>().map_err(|_| format!("`{v}` is not a positive integer"));
    AxisRange::new(num(min)?, num(max)?, num(step)?).map_err(|e| e.to_string())
}

pub fn parse_grid(text: &str) -> std::result::Result<(AxisRange, AxisRange), String> {
    let (h, w) = text
        .split_once(',')
        .ok_or_else(|| format!("`{text}` is not hmin:hmax:hstep,wmin:wmax:wstep"))?;
    Ok((parse_axis(h)?, parse_axis(w)?))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn load_models(paths: &[PathBuf]) -> Result<Vec<LoweredModel>> {
    paths
        .iter()
        .map(|p| Ok(LoweredModel::from_network(&read_network(p)?)?))
        .collect()
}

#[derive(Serialize)]
struct CountersJson {
    macs: u64,
    cycles: u64,
    stall_cycles: u64,
    m_ub: u64,
    m_inter_pe: u64,
    m_intra_pe: u64,
    m_aa: u64,
    peak_weight_words_per_cycle: f64,
    peak_weight_words_per_cycle_exact: String,
}

#[derive(Serialize)]
struct EmulateJson {
    model: String,
    height: u32,
    width: u32,
    layers: usize,
    counters: CountersJson,
    utilization: f64,
    utilization_exact: String,
    energy: f64,
    energy_exact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    executed: Option<bool>,
}

fn exact(r: &Rational) -> String {
    r.to_string()
}

fn worst_case_execution(net: &sysolve_core::NetworkSpec, cfg: &ArrayConfig) -> Result<()> {
    let most_negative = |bits: u32| -(1i64 << (bits - 1));
    for layer in &net.layers {
        let in_layer = |e| sysolve_core::Error::InLayer {
            layer: layer.name.clone(),
            source: Box::new(e),
        };
        let w = sysolve_core::lower_layer(layer).map_err(in_layer)?;
        let (m, k, n) = (w.m as usize, w.k as usize, w.n as usize);
        let lhs = Matrix::filled(m, k, most_negative(cfg.activation_bits));
        let rhs = Matrix::filled(k, n, most_negative(cfg.weight_bits));
        let single = sysolve_core::GemmWorkload { repeat: 1, ..w };
        execute_gemm(&single, cfg, Operands::Shared { lhs: &lhs, rhs: &rhs }).map_err(in_layer)?;
    }
    Ok(())
}

fn emulate(args: &EmulateArgs) -> Result<()> {
    let net = read_network(&args.model)?;
    let cfg = args.array.config(args.height, args.width);
    cfg.validate()?;
    let weights = args.array.weights()?;
    let workloads = lower_network(&net)?;
    let report = emulate_network(&workloads, &cfg)?;

    if let Some(trace_path) = &args.trace {
        let index = match &args.trace_layer {
            Some(name) => net
                .layers
                .iter()
                .position(|l| &l.name == name)
                .ok_or_else(|| Error::Usage(format!("no layer named `{name}`")))?,
            None if net.layers.len() == 1 => 0,
            None => return Err(Error::Usage("--trace-layer is required for multi-layer models".into())),
        };
        let traced = emulate_gemm_traced(&workloads[index], &cfg)?;
        let rows = traced.trace.expect("traced run carries a trace");
        emit(Some(trace_path), &tables::trace_csv(&rows))?;
    }
    if args.execute {
        worst_case_execution(&net, &cfg)?;
    }

    let c = &report.counters;
    let energy = energy_cost(c, &weights).value();
    let json = EmulateJson {
        model: net.model_name.clone(),
        height: cfg.height,
        width: cfg.width,
        layers: workloads.len(),
        counters: CountersJson {
            macs: c.macs,
            cycles: c.cycles,
            stall_cycles: c.stall_cycles,
            m_ub: c.m_ub,
            m_inter_pe: c.m_inter_pe,
            m_intra_pe: c.m_intra_pe,
            m_aa: c.m_aa,
            peak_weight_words_per_cycle: to_f64(&c.peak_weight_words_per_cycle),
            peak_weight_words_per_cycle_exact: exact(&c.peak_weight_words_per_cycle),
        },
        utilization: to_f64(&report.utilization),
        utilization_exact: exact(&report.utilization),
        energy: to_f64(&energy),
        energy_exact: exact(&energy),
        executed: args.execute.then_some(true),
    };
    let mut text = serde_json::to_string_pretty(&json).expect("report serializes");
    text.push('\n');
    emit(args.out.as_deref(), text.as_bytes())
}

fn run_sweep(
    models: &[PathBuf],
    points: &[DesignPoint],
    base: &ArrayConfig,
    weights: &EnergyWeights,
    output: &SweepOutput,
) -> Result<()> {
    let models = load_models(models)?;
    let threads = thread_count()?;
    match &output.out {
        Some(path) => {
            let summary = stream_to_file(path, &models, points, base, weights, threads, output.resume)?;
            if summary.reused > 0 {
                eprintln!(
                    "resumed {}: kept {} of {} rows",
                    path.display(),
                    summary.reused,
                    summary.total
                );
            }
            Ok(())
        }
        None => {
            let records = crate::sweep::run(&models, points, base, weights, threads)?;
            emit(None, &tables::sweep_csv(&records))
        }
    }
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let spec = GridSweepSpec {
        height: args.grid.0,
        width: args.grid.1,
        base: args.array.config(args.grid.0.min, args.grid.1.min),
    };
    let points = spec.points()?;
    run_sweep(&args.models, &points, &spec.base, &args.array.weights()?, &args.output)
}

fn ratio_sweep(args: &RatioSweepArgs) -> Result<()> {
    let spec = RatioSweepSpec {
        pe_count: args.pe_count,
        ratios: args.ratios.clone(),
        base: args.array.config(1, 1),
    };
    let points: Vec<DesignPoint> = spec.dimensions()?.into_iter().map(|(_, p)| p).collect();
    spec.base.validate()?;
    run_sweep(&args.models, &points, &spec.base, &args.array.weights()?, &args.output)
}

fn robust(args: &RobustArgs) -> Result<()> {
    let records = RawTable::read(&args.sweep)?.sweep_records()?;
    let rows = robustness_table(&records)?;
    emit(args.out.as_deref(), &tables::robust_csv(&rows))
}

fn frontier<R: sysolve_core::ObjectiveSource>(
    rows: &[R],
    objectives: (Objective, Objective),
    all_ranks: bool,
) -> Result<Vec<u8>> {
    let oriented = orient_objectives(rows, objectives)?;
    let ranked: Vec<ParetoPoint<DesignPoint>> = pareto_front(&oriented)?
        .into_iter()
        .filter(|p| all_ranks || p.rank == 1)
        .collect();
    Ok(tables::frontier_csv(&ranked, |p| (p.height, p.width)))
}

fn pareto(args: &ParetoArgs) -> Result<()> {
    let table = RawTable::read(&args.table)?;
    let robust = table.is_robustness_table();
    let objectives = match args.objectives.as_deref() {
        Some([a, b]) => (*a, *b),
        Some(other) => {
            return Err(Error::Usage(format!(
                "--objectives takes exactly two names, got {}",
                other.len()
            )))
        }
        None if robust => (Objective::AvgNormCycles, Objective::AvgNormEnergy),
        None => (Objective::Cycles, Objective::Energy),
    };
    let bytes = if robust {
        if args.model.is_some() {
            return Err(Error::Usage("--model does not apply to robustness tables".into()));
        }
        frontier(&table.robust_rows()?, objectives, args.all_ranks)?
    } else {
        let model = table.select_model(args.model.as_deref())?;
        let records: Vec<_> = table
            .sweep_records()?
            .into_iter()
            .filter(|r| r.model_name == model)
            .collect();
        frontier(&records, objectives, args.all_ranks)?
    };
    emit(args.out.as_deref(), &bytes)
}

fn heatmap(args: &HeatmapArgs) -> Result<()> {
    if ["model", "height", "width"].contains(&args.metric.as_str())
        || !tables::SWEEP_HEADER.contains(&args.metric.as_str())
    {
        return Err(Error::Usage(format!("`{}` is not a sweep metric", args.metric)));
    }
    let table = RawTable::read(&args.sweep)?;
    table.sweep_records()?;
    let model = table.select_model(args.model.as_deref())?;
    emit(args.out.as_deref(), &table.heatmap(&model, &args.metric)?)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Emulate(a) => emulate(a),
        Command::Sweep(a) => sweep(a),
        Command::RatioSweep(a) => ratio_sweep(a),
        Command::Robust(a) => robust(a),
        Command::Pareto(a) => pareto(a),
        Command::Heatmap(a) => heatmap(a),
    }
}
