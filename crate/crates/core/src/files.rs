//! On-disk artifact formats shared by the library and the command-line
//! tool.
//!
//! Dataset and partial-order files are JSON lines with a leading header
//! object carrying the full run configuration, so every artifact records
//! how it was produced. Total orders are written both as JSON and as a
//! 16-integers-per-row text table. All writers are byte-deterministic
//! for identical inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::code::TotalOrder;
use crate::design::{DatasetRecord, PartialOrder};
use crate::error::{Error, Result};

/// Provenance header embedded in every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "polarseq".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: None,
            threads: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    run_config: RunConfig,
}

/// Write a dataset file: header line, then one record per line.
pub fn write_dataset(path: &Path, config: &RunConfig, records: &[DatasetRecord]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut out, &Header { run_config: config.clone() })?;
    out.write_all(b"\n")?;
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a dataset file; the header is optional so hand-written files
/// work too.
pub fn read_dataset(path: &Path) -> Result<(Option<RunConfig>, Vec<DatasetRecord>)> {
    let text = fs::read_to_string(path)?;
    let mut config = None;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| {
            Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        if value.get("run_config").is_some() {
            let header: Header = serde_json::from_value(value)?;
            config = Some(header.run_config);
        } else {
            records.push(serde_json::from_value(value).map_err(|e| {
                Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?);
        }
    }
    Ok((config, records))
}

#[derive(Serialize, Deserialize)]
struct GroupsLine {
    #[serde(rename = "N")]
    block_len: usize,
    groups: Vec<Vec<u16>>,
}

/// Write a partial order: header line, then one `{"N":..,"groups":..}`
/// line per designed block length (ascending N).
pub fn write_partial_order(path: &Path, config: &RunConfig, p: &PartialOrder) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut out, &Header { run_config: config.clone() })?;
    out.write_all(b"\n")?;
    for block_len in p.lengths() {
        let line = GroupsLine {
            block_len,
            groups: p.groups_for(block_len).expect("length listed").to_vec(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_partial_order(path: &Path) -> Result<(Option<RunConfig>, PartialOrder)> {
    let text = fs::read_to_string(path)?;
    let mut config = None;
    let mut p = PartialOrder::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| {
            Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        if value.get("run_config").is_some() {
            let header: Header = serde_json::from_value(value)?;
            config = Some(header.run_config);
        } else {
            let line: GroupsLine = serde_json::from_value(value).map_err(|e| {
                Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
            p.insert(line.block_len, line.groups)?;
        }
    }
    Ok((config, p))
}

/// Total order as a text table, 16 integers per row.
pub fn total_order_text(order: &TotalOrder) -> String {
    let mut out = String::new();
    for row in order.q.chunks(16) {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Parse a whitespace-separated total order; the entry count fixes `n`.
pub fn parse_total_order_text(text: &str) -> Result<TotalOrder> {
    let entries: Vec<u16> = text
        .split_whitespace()
        .map(|tok| tok.parse::<u16>().map_err(|e| Error::Parse(format!("bad entry {tok:?}: {e}"))))
        .collect::<Result<_>>()?;
    if entries.is_empty() || !entries.len().is_power_of_two() {
        return Err(Error::Parse(format!(
            "expected a power-of-two entry count, got {}",
            entries.len()
        )));
    }
    let n = entries.len().trailing_zeros() as usize;
    TotalOrder::new(n, entries).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct TotalOrderFile {
    run_config: RunConfig,
    #[serde(flatten)]
    order: TotalOrder,
}

/// Write both the JSON form (at `path`) and the text table (same stem,
/// `.txt`).
pub fn write_total_order(path: &Path, config: &RunConfig, order: &TotalOrder) -> Result<()> {
    let json = serde_json::to_string(&TotalOrderFile {
        run_config: config.clone(),
        order: order.clone(),
    })?;
    fs::write(path, json + "\n")?;
    fs::write(path.with_extension("txt"), total_order_text(order))?;
    Ok(())
}

/// Read a total order from either format, detected by the first byte.
pub fn read_total_order(path: &Path) -> Result<TotalOrder> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        let order = value
            .as_object()
            .and_then(|map| {
                let mut stripped = map.clone();
                stripped.remove("run_config");
                serde_json::from_value::<TotalOrder>(Value::Object(stripped)).ok()
            })
            .ok_or_else(|| Error::Parse("not a total-order JSON object".into()))?;
        Ok(order)
    } else {
        parse_total_order_text(&text)
    }
}

/// One row of a BLER sweep.
#[derive(Clone, Debug, Serialize)]
pub struct BlerRow {
    pub es_n0_db: f64,
    pub eb_n0_db: f64,
    pub errors: u64,
    pub trials: u64,
    pub bler: f64,
    pub ci95: f64,
}

/// CSV with the run configuration in `#` comment lines.
pub fn write_bler_csv(path: &Path, config: &RunConfig, rows: &[BlerRow]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# {}", serde_json::to_string(&Header { run_config: config.clone() })?)?;
    writeln!(out, "es_n0_db,eb_n0_db,errors,trials,bler,ci95")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.es_n0_db, r.eb_n0_db, r.errors, r.trials, r.bler, r.ci95
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::InformationSet;
    use crate::design::SimMeta;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("polarseq-files-test");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn dataset_round_trip_is_byte_stable() {
        let path = tmp("dataset.jsonl");
        let config = RunConfig::new("enumerate").with_seed(7).with_param("n", 3);
        let records = vec![
            DatasetRecord::skeleton(InformationSet::from_indices(3, &[3, 5, 6, 7]).unwrap()),
            DatasetRecord {
                info: InformationSet::empty(3),
                mu_db: Some(0.0),
                meta: Some(SimMeta {
                    decoder: "SC".into(),
                    m: 1,
                    epsilon: 0.001,
                    seed: 7,
                    trials: 0,
                    error: None,
                }),
            },
        ];
        write_dataset(&path, &config, &records).unwrap();
        let first = fs::read(&path).unwrap();
        let (read_config, read_records) = read_dataset(&path).unwrap();
        assert_eq!(read_config.unwrap(), config);
        assert_eq!(read_records, records);
        write_dataset(&path, &config, &read_records).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
        // the skeleton line spells out the null metric
        let text = String::from_utf8(first).unwrap();
        assert!(text.lines().nth(1).unwrap().contains("\"mu_db\":null"));
    }

    #[test]
    fn partial_order_file_round_trip() {
        let path = tmp("order.jsonl");
        let mut p = PartialOrder::single(4, vec![vec![0], vec![1], vec![2, 3]]).unwrap();
        p.insert(8, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap();
        let config = RunConfig::new("design");
        write_partial_order(&path, &config, &p).unwrap();
        let (_, back) = read_partial_order(&path).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn total_order_formats() {
        let order = TotalOrder::new(5, (0..32).collect()).unwrap();
        let text = total_order_text(&order);
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("0 1 2 3"));
        assert_eq!(parse_total_order_text(&text).unwrap(), order);

        let path = tmp("q.json");
        write_total_order(&path, &RunConfig::new("disambiguate"), &order).unwrap();
        assert_eq!(read_total_order(&path).unwrap(), order);
        assert_eq!(read_total_order(&path.with_extension("txt")).unwrap(), order);

        assert!(parse_total_order_text("0 1 2").is_err());
        assert!(parse_total_order_text("0 1 2 x").is_err());
        assert!(parse_total_order_text("0 1 2 2").is_err());
    }

    #[test]
    fn bler_csv_shape() {
        let path = tmp("sweep.csv");
        let rows = vec![BlerRow {
            es_n0_db: 1.0,
            eb_n0_db: 4.0103,
            errors: 10,
            trials: 1000,
            bler: 0.01,
            ci95: 0.006,
        }];
        write_bler_csv(&path, &RunConfig::new("bler"), &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# {"));
        assert_eq!(lines.next().unwrap(), "es_n0_db,eb_n0_db,errors,trials,bler,ci95");
        assert_eq!(lines.next().unwrap(), "1,4.0103,10,1000,0.01,0.006");
    }
}
