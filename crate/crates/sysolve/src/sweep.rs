//! Parallel sweeps with streamed, resumable CSV output.
//!
//! Tasks run in batches on a rayon pool and each batch is written in
//! canonical order before the next starts, so the bytes on disk never depend
//! on the thread count. An interrupted file is a valid prefix (header plus
//! whole rows, no footer) and `resume` continues it from the first missing
//! design point.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use sysolve_core::explore::sweep_tasks;
use sysolve_core::{sweep_point, ArrayConfig, DesignPoint, EnergyWeights, LoweredModel, SweepRecord};

use crate::error::{Error, Result};
use crate::tables::{self, RawTable};

pub const THREADS_ENV: &str = "SYSOLVE_THREADS";

/// `SYSOLVE_THREADS` if set, else the machine's available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Threads(v)),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, usize::from)),
    }
}

pub fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

fn batch_len(threads: usize) -> usize {
    (threads * 16).max(64)
}

/// Evaluates every (model, point) pair in canonical order.
pub fn run(
    models: &[LoweredModel],
    points: &[DesignPoint],
    base: &ArrayConfig,
    weights: &EnergyWeights,
    threads: usize,
) -> Result<Vec<SweepRecord>> {
    let tasks = sweep_tasks(models, points);
    let records = pool(threads).install(|| {
        tasks
            .par_iter()
            .map(|(model, point)| sweep_point(model, *point, base, weights))
            .collect::<sysolve_core::Result<Vec<_>>>()
    })?;
    Ok(records)
}

/// Progress of a streamed sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSummary {
    pub total: usize,
    pub reused: usize,
}

/// Writes the sweep to `out`, flushing after every batch. With `resume`, an
/// existing file's rows must match the canonical prefix of this sweep; they
/// are kept and only the remainder is computed.
pub fn stream_to_file(
    out: &Path,
    models: &[LoweredModel],
    points: &[DesignPoint],
    base: &ArrayConfig,
    weights: &EnergyWeights,
    threads: usize,
    resume: bool,
) -> Result<StreamSummary> {
    let tasks = sweep_tasks(models, points);
    let io = |e| Error::io(out, e);

    let reused = if resume && out.exists() {
        prepare_resume(out, &tasks)?
    } else {
        None
    };
    let (mut file, done) = match reused {
        Some(Resumed::Complete) => {
            return Ok(StreamSummary {
                total: tasks.len(),
                reused: tasks.len(),
            })
        }
        Some(Resumed::Partial(done)) => (OpenOptions::new().append(true).open(out).map_err(io)?, done),
        None => {
            let mut file = File::create(out).map_err(io)?;
            file.write_all(&tables::sweep_header()).map_err(io)?;
            (file, 0)
        }
    };

    let pool = pool(threads);
    for batch in tasks[done..].chunks(batch_len(threads)) {
        let records = pool.install(|| {
            batch
                .par_iter()
                .map(|(model, point)| sweep_point(model, *point, base, weights))
                .collect::<sysolve_core::Result<Vec<_>>>()
        })?;
        file.write_all(&tables::sweep_rows(&records)).map_err(io)?;
        file.flush().map_err(io)?;
    }
    file.write_all(&tables::sweep_footer(tasks.len())).map_err(io)?;
    file.sync_all().map_err(io)?;
    Ok(StreamSummary {
        total: tasks.len(),
        reused: done,
    })
}

enum Resumed {
    Complete,
    Partial(usize),
}

/// Checks an existing output against the task list and trims any torn last
/// line.
fn prepare_resume(out: &Path, tasks: &[(&LoweredModel, DesignPoint)]) -> Result<Option<Resumed>> {
    let refuse = |reason: String| Error::Resume {
        path: out.to_path_buf(),
        reason,
    };
    let bytes = fs::read(out).map_err(|e| Error::io(out, e))?;
    let header = tables::sweep_header();
    if !bytes.starts_with(&header) {
        if header.starts_with(&bytes) {
            return Ok(None);
        }
        return Err(refuse("header differs from a sweep header".into()));
    }
    let whole = bytes
        .iter()
        .rposition(|&b| b == b'\n')
        .map_or(0, |i| i + 1);
    let table = RawTable::parse(&bytes[..whole], out)?;
    let records = table.sweep_records()?;
    if records.len() > tasks.len() {
        return Err(refuse(format!(
            "file holds {} rows but this sweep has {}",
            records.len(),
            tasks.len()
        )));
    }
    for (i, (r, (model, point))) in records.iter().zip(tasks).enumerate() {
        if r.model_name != model.name || r.design_point() != *point {
            return Err(refuse(format!(
                "row {} is {} {}x{}, expected {} {}x{}",
                i + 1,
                r.model_name,
                r.height,
                r.width,
                model.name,
                point.height,
                point.width
            )));
        }
    }
    if table.footer_rows.is_some() {
        if records.len() != tasks.len() {
            return Err(refuse("file is complete for a different sweep".into()));
        }
        return Ok(Some(Resumed::Complete));
    }
    if whole < bytes.len() {
        let file = OpenOptions::new()
            .write(true)
            .open(out)
            .map_err(|e| Error::io(out, e))?;
        file.set_len(whole as u64).map_err(|e| Error::io(out, e))?;
    }
    Ok(Some(Resumed::Partial(records.len())))
}
