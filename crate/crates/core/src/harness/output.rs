//! CSV and JSON emission.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::campaign::CampaignResult;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config(
                "format",
                format!("unknown format `{other}` (csv or json)"),
            )),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One row per (sweep point, drop): `[sweep parameter], drop, sum_se, ul_se, dl_se`.
pub fn write_csv<W: Write>(result: &CampaignResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = Vec::new();
    if let Some(p) = result.sweep_parameter {
        header.push(p.label());
    }
    header.extend(["drop", "sum_se", "ul_se", "dl_se"]);
    w.write_record(&header)?;
    for point in &result.points {
        for d in &point.drops {
            let mut row = Vec::with_capacity(5);
            if let Some(v) = point.value {
                row.push(v.to_string());
            }
            row.push(d.drop.to_string());
            row.push(d.sum_se.to_string());
            row.push(d.ul_se.to_string());
            row.push(d.dl_se.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(result: &CampaignResult) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn write_json<W: Write>(result: &CampaignResult, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, result)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<CampaignResult> {
    let f = File::open(path).map_err(io_err(path))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

/// Writes `results.csv` or `results.json` into `dir`, creating it if needed.
pub fn emit_results(result: &CampaignResult, format: OutputFormat, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(match format {
        OutputFormat::Csv => "results.csv",
        OutputFormat::Json => "results.json",
    });
    let f = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(f);
    match format {
        OutputFormat::Csv => write_csv(result, &mut w)?,
        OutputFormat::Json => write_json(result, &mut w)?,
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}
