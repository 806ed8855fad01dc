//! CSV tables: sweep records, robustness rows, Pareto frontiers, heatmaps
//! and tile traces.
//!
//! Every table is UTF-8 with a header row and LF line endings. Sweep files
//! end with a `# complete rows=N` footer once every design point is written;
//! readers skip `#` lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use sysolve_core::{ParetoPoint, RobustRow, SweepRecord, TileTrace};

use crate::error::{Error, Result};
use crate::number::{format_f64, format_rational, parse_f64, parse_rational, parse_u64};

pub const SWEEP_HEADER: [&str; 12] = [
    "model",
    "height",
    "width",
    "cycles",
    "utilization",
    "energy",
    "m_ub",
    "m_inter_pe",
    "m_intra_pe",
    "m_aa",
    "stall_cycles",
    "peak_weight_words_per_cycle",
];

pub const ROBUST_HEADER: [&str; 4] = ["height", "width", "avg_norm_energy", "avg_norm_cycles"];

pub const FRONTIER_HEADER: [&str; 5] = ["height", "width", "obj_a", "obj_b", "rank"];

pub const TRACE_HEADER: [&str; 7] = [
    "tile_id",
    "h_t",
    "w_t",
    "m_chunk",
    "compute_cycles",
    "exposed_load_cycles",
    "stalls",
];

pub const FOOTER_PREFIX: &str = "# complete rows=";

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

fn encode<I, R>(header: Option<&[&str]>, rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer();
    if let Some(header) = header {
        w.write_record(header).expect("in-memory write");
    }
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    finish(w)
}

pub fn sweep_header() -> Vec<u8> {
    encode(Some(&SWEEP_HEADER), std::iter::empty::<Vec<String>>())
}

pub fn sweep_row(r: &SweepRecord) -> Vec<String> {
    vec![
        r.model_name.clone(),
        r.height.to_string(),
        r.width.to_string(),
        r.cycles.to_string(),
        format_rational(&r.utilization),
        format_rational(&r.energy),
        r.m_ub.to_string(),
        r.m_inter_pe.to_string(),
        r.m_intra_pe.to_string(),
        r.m_aa.to_string(),
        r.stall_cycles.to_string(),
        format_rational(&r.peak_weight_words_per_cycle),
    ]
}

/// Data rows only, no header or footer.
pub fn sweep_rows(records: &[SweepRecord]) -> Vec<u8> {
    encode(None, records.iter().map(sweep_row))
}

pub fn sweep_footer(rows: usize) -> Vec<u8> {
    format!("{FOOTER_PREFIX}{rows}\n").into_bytes()
}

/// A whole sweep file: header, rows and footer.
pub fn sweep_csv(records: &[SweepRecord]) -> Vec<u8> {
    let mut out = sweep_header();
    out.extend(sweep_rows(records));
    out.extend(sweep_footer(records.len()));
    out
}

pub fn robust_csv(rows: &[RobustRow]) -> Vec<u8> {
    encode(
        Some(&ROBUST_HEADER),
        rows.iter().map(|r| {
            vec![
                r.height.to_string(),
                r.width.to_string(),
                format_f64(r.avg_norm_energy),
                format_f64(r.avg_norm_cycles),
            ]
        }),
    )
}

pub fn frontier_csv<I>(points: &[ParetoPoint<I>], id: impl Fn(&I) -> (u32, u32)) -> Vec<u8> {
    encode(
        Some(&FRONTIER_HEADER),
        points.iter().map(|p| {
            let (h, w) = id(&p.id);
            vec![
                h.to_string(),
                w.to_string(),
                format_f64(p.objectives.0),
                format_f64(p.objectives.1),
                p.rank.to_string(),
            ]
        }),
    )
}

pub fn trace_csv(trace: &[TileTrace]) -> Vec<u8> {
    encode(
        Some(&TRACE_HEADER),
        trace.iter().map(|t| {
            [
                t.tile_id,
                t.h_t,
                t.w_t,
                t.m_chunk,
                t.compute_cycles,
                t.exposed_load_cycles,
                t.stalls,
            ]
            .map(|v| v.to_string())
        }),
    )
}

/// A parsed CSV file: header plus rows of raw cells with their line numbers.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<(u64, Vec<String>)>,
    /// Row count announced by a completeness footer, if present.
    pub footer_rows: Option<usize>,
}

impl RawTable {
    pub fn parse(bytes: &[u8], path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(bytes);
        let header: Vec<String> = reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record.iter().map(str::to_string).collect()));
        }
        let footer_rows = std::str::from_utf8(bytes)
            .ok()
            .and_then(|text| text.lines().rev().find(|l| !l.trim().is_empty()))
            .and_then(|last| last.strip_prefix(FOOTER_PREFIX))
            .map(|n| {
                n.trim().parse().map_err(|_| Error::Table {
                    path: path.to_path_buf(),
                    line: 0,
                    reason: format!("malformed footer `{FOOTER_PREFIX}{n}`"),
                })
            })
            .transpose()?;
        if let Some(n) = footer_rows {
            if n != rows.len() {
                return Err(Error::Table {
                    path: path.to_path_buf(),
                    line: 0,
                    reason: format!("footer announces {n} rows but the file holds {}", rows.len()),
                });
            }
        }
        Ok(RawTable {
            path: path.to_path_buf(),
            header,
            rows,
            footer_rows,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&bytes, path)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn require_columns(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                self.column(name).ok_or_else(|| Error::Table {
                    path: self.path.clone(),
                    line: 1,
                    reason: format!("missing column `{name}`"),
                })
            })
            .collect()
    }

    fn cell_error(&self, line: u64, column: &str, e: Error) -> Error {
        Error::Table {
            path: self.path.clone(),
            line,
            reason: format!("column `{column}`: {e}"),
        }
    }

    pub fn is_robustness_table(&self) -> bool {
        self.column("avg_norm_energy").is_some() && self.column("model").is_none()
    }

    pub fn sweep_records(&self) -> Result<Vec<SweepRecord>> {
        let cols = self.require_columns(&SWEEP_HEADER)?;
        self.rows
            .iter()
            .map(|(line, cells)| {
                let cell = |i: usize| cells[cols[i]].as_str();
                let at = |i: usize, e| self.cell_error(*line, SWEEP_HEADER[i], e);
                let int = |i: usize| parse_u64(cell(i)).map_err(|e| at(i, e));
                let dim = |i: usize| {
                    int(i).and_then(|v| {
                        u32::try_from(v).map_err(|_| at(i, Error::Number(cell(i).to_string())))
                    })
                };
                let rat = |i: usize| parse_rational(cell(i)).map_err(|e| at(i, e));
                Ok(SweepRecord {
                    model_name: cell(0).to_string(),
                    height: dim(1)?,
                    width: dim(2)?,
                    cycles: int(3)?,
                    utilization: rat(4)?,
                    energy: rat(5)?,
                    m_ub: int(6)?,
                    m_inter_pe: int(7)?,
                    m_intra_pe: int(8)?,
                    m_aa: int(9)?,
                    stall_cycles: int(10)?,
                    peak_weight_words_per_cycle: rat(11)?,
                })
            })
            .collect()
    }

    pub fn robust_rows(&self) -> Result<Vec<RobustRow>> {
        let cols = self.require_columns(&ROBUST_HEADER)?;
        self.rows
            .iter()
            .map(|(line, cells)| {
                let cell = |i: usize| cells[cols[i]].as_str();
                let at = |i: usize, e| self.cell_error(*line, ROBUST_HEADER[i], e);
                let dim = |i: usize| {
                    cell(i)
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| at(i, Error::Number(cell(i).to_string())))
                };
                Ok(RobustRow {
                    height: dim(0)?,
                    width: dim(1)?,
                    avg_norm_energy: parse_f64(cell(2)).map_err(|e| at(2, e))?,
                    avg_norm_cycles: parse_f64(cell(3)).map_err(|e| at(3, e))?,
                })
            })
            .collect()
    }

    /// Model names in first-appearance order.
    pub fn models(&self) -> Result<Vec<String>> {
        let col = self.require_columns(&["model"])?[0];
        let mut seen = Vec::new();
        for (_, cells) in &self.rows {
            if !seen.contains(&cells[col]) {
                seen.push(cells[col].clone());
            }
        }
        Ok(seen)
    }

    /// The one model to use: `requested` if given, else the only model present.
    pub fn select_model(&self, requested: Option<&str>) -> Result<String> {
        let models = self.models()?;
        match requested {
            Some(m) if models.iter().any(|x| x == m) => Ok(m.to_string()),
            Some(m) => Err(Error::UnknownModel {
                path: self.path.clone(),
                model: m.to_string(),
            }),
            None if models.len() == 1 => Ok(models[0].clone()),
            None if models.is_empty() => Err(Error::Core(sysolve_core::Error::EmptyInput)),
            None => Err(Error::AmbiguousModel {
                path: self.path.clone(),
                models,
            }),
        }
    }

    /// Rows of one model as a height x width matrix of raw `metric` cells.
    pub fn heatmap(&self, model: &str, metric: &str) -> Result<Vec<u8>> {
        let cols = self.require_columns(&["model", "height", "width", metric])?;
        let ragged = |reason: String| Error::RaggedGrid {
            path: self.path.clone(),
            model: model.to_string(),
            reason,
        };
        let mut cells: BTreeMap<(u32, u32), &str> = BTreeMap::new();
        for (line, row) in self.rows.iter().filter(|(_, r)| r[cols[0]] == model) {
            let dim = |i: usize, name: &str| {
                row[cols[i]]
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| self.cell_error(*line, name, Error::Number(row[cols[i]].clone())))
            };
            let key = (dim(1, "height")?, dim(2, "width")?);
            if cells.insert(key, row[cols[3]].as_str()).is_some() {
                return Err(ragged(format!("{}x{} appears twice", key.0, key.1)));
            }
        }
        let heights: BTreeSet<u32> = cells.keys().map(|k| k.0).collect();
        let widths: BTreeSet<u32> = cells.keys().map(|k| k.1).collect();
        if let Some((h, w)) = heights
            .iter()
            .flat_map(|&h| widths.iter().map(move |&w| (h, w)))
            .find(|k| !cells.contains_key(k))
        {
            return Err(ragged(format!("{h}x{w} is missing")));
        }
        let mut header = vec![String::from("height\\width")];
        header.extend(widths.iter().map(u32::to_string));
        let rows = heights.iter().map(|&h| {
            std::iter::once(h.to_string())
                .chain(widths.iter().map(|&w| cells[&(h, w)].to_string()))
                .collect::<Vec<_>>()
        });
        Ok(encode(None, std::iter::once(header).chain(rows)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sysolve_core::Rational;

    fn record(model: &str, h: u32, w: u32) -> SweepRecord {
        SweepRecord {
            model_name: model.into(),
            height: h,
            width: w,
            cycles: u64::from(h * 1000 + w),
            utilization: Rational::new(16, 36),
            energy: Rational::from_integer(35),
            m_ub: 1,
            m_inter_pe: 2,
            m_intra_pe: 3,
            m_aa: 4,
            stall_cycles: 5,
            peak_weight_words_per_cycle: Rational::new(4, 5),
        }
    }

    fn grid(model: &str) -> Vec<SweepRecord> {
        [8, 16]
            .iter()
            .flat_map(|&h| [8, 16, 24].map(|w| record(model, h, w)))
            .collect()
    }

    #[test]
    fn sweep_file_layout() {
        let text = String::from_utf8(sweep_csv(&grid("m"))).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER.join(","));
        assert_eq!(lines[1], "m,8,8,8008,0.4444444444444444,35,1,2,3,4,5,0.8");
        assert_eq!(lines[7], "# complete rows=6");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn sweep_round_trip() {
        let records = grid("a,b");
        let table = RawTable::parse(&sweep_csv(&records), Path::new("s.csv")).unwrap();
        assert_eq!(table.footer_rows, Some(6));
        let back = table.sweep_records().unwrap();
        assert_eq!(back.len(), 6);
        assert_eq!(back[0].model_name, "a,b");
        assert_eq!(sweep_csv(&back), sweep_csv(&records));
    }

    #[test]
    fn footer_must_match() {
        let mut bytes = sweep_header();
        bytes.extend(sweep_rows(&grid("m")));
        bytes.extend(sweep_footer(7));
        assert!(RawTable::parse(&bytes, Path::new("s.csv")).is_err());
    }

    #[test]
    fn bad_cell_names_line_and_column() {
        let text = sweep_csv(&grid("m"));
        let text = String::from_utf8(text).unwrap().replacen("8008", "eight", 1);
        let err = RawTable::parse(text.as_bytes(), Path::new("s.csv"))
            .unwrap()
            .sweep_records()
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2") && err.contains("cycles"), "{err}");
    }

    #[test]
    fn heatmap_shape() {
        let table = RawTable::parse(&sweep_csv(&grid("m")), Path::new("s.csv")).unwrap();
        let text = String::from_utf8(table.heatmap("m", "cycles").unwrap()).unwrap();
        assert_eq!(text, "height\\width,8,16,24\n8,8008,8016,8024\n16,16008,16016,16024\n");
    }

    #[test]
    fn heatmap_rejects_ragged_grids() {
        let mut records = grid("m");
        records.remove(3);
        let table = RawTable::parse(&sweep_csv(&records), Path::new("s.csv")).unwrap();
        assert!(matches!(table.heatmap("m", "energy"), Err(Error::RaggedGrid { .. })));
    }

    #[test]
    fn model_selection() {
        let mut records = grid("a");
        records.extend(grid("b"));
        let table = RawTable::parse(&sweep_csv(&records), Path::new("s.csv")).unwrap();
        assert!(matches!(table.select_model(None), Err(Error::AmbiguousModel { .. })));
        assert_eq!(table.select_model(Some("b")).unwrap(), "b");
        assert!(matches!(table.select_model(Some("c")), Err(Error::UnknownModel { .. })));
    }

    #[test]
    fn robust_round_trip() {
        let rows = vec![RobustRow {
            height: 16,
            width: 32,
            avg_norm_energy: 1.25,
            avg_norm_cycles: 1.0,
        }];
        let bytes = robust_csv(&rows);
        assert_eq!(
            String::from_utf8(bytes.clone()).unwrap(),
            "height,width,avg_norm_energy,avg_norm_cycles\n16,32,1.25,1\n"
        );
        let table = RawTable::parse(&bytes, Path::new("r.csv")).unwrap();
        assert!(table.is_robustness_table());
        assert_eq!(table.robust_rows().unwrap(), rows);
    }
}
