//! File formats: frame JSON (canonical) and real CSV, norm-spec JSON, trace
//! CSV and run manifests.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FrameError, Result};
use crate::flow::{FlowConfig, TraceSample};
use crate::frame::{Field, FrameMatrix, Scalar};
use crate::spec::NormSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFile {
    pub field: Field,
    pub d: usize,
    pub n: usize,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

impl From<&FrameMatrix> for FrameFile {
    fn from(f: &FrameMatrix) -> Self {
        FrameFile {
            field: f.field(),
            d: f.d(),
            n: f.n(),
            entries: f.row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<FrameFile> for FrameMatrix {
    type Error = FrameError;

    fn try_from(file: FrameFile) -> Result<Self> {
        if file.entries.len() != file.d * file.n {
            return Err(FrameError::Parse(format!(
                "frame file declares {}x{} but holds {} entries",
                file.d,
                file.n,
                file.entries.len()
            )));
        }
        let data = nalgebra::DMatrix::from_row_iterator(
            file.d,
            file.n,
            file.entries.iter().map(|[re, im]| Scalar::new(*re, *im)),
        );
        FrameMatrix::new(file.field, data)
    }
}

pub fn frame_to_json(frame: &FrameMatrix) -> String {
    serde_json::to_string_pretty(&FrameFile::from(frame)).expect("frame serialization cannot fail") + "\n"
}

pub fn frame_from_json(text: &str) -> Result<FrameMatrix> {
    let file: FrameFile = serde_json::from_str(text).map_err(|e| FrameError::Parse(e.to_string()))?;
    file.try_into()
}

/// Real frame as d lines of n comma-separated values.
pub fn frame_from_csv(text: &str) -> Result<FrameMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FrameError::Parse(e.to_string()))?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| FrameError::Parse(format!("bad number {s:?} in CSV"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let d = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if d == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(FrameError::Parse("CSV frame must have equal-length, non-empty rows".into()));
    }
    FrameMatrix::from_real_rows(d, n, &rows.concat())
}

pub fn frame_to_csv(frame: &FrameMatrix) -> Result<String> {
    if frame.field() != Field::Real {
        return Err(FrameError::Parse("CSV output is only defined for real frames".into()));
    }
    let mut out = String::new();
    for i in 0..frame.d() {
        let row: Vec<String> = (0..frame.n()).map(|j| format!("{:?}", frame.get(i, j).re)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Reads a frame, choosing CSV for `.csv` files and JSON otherwise.
pub fn read_frame(path: &Path) -> Result<FrameMatrix> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        frame_from_csv(&text)
    } else {
        frame_from_json(&text)
    }
}

pub fn write_frame(path: &Path, frame: &FrameMatrix) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        frame_to_csv(frame)?
    } else {
        frame_to_json(frame)
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn spec_from_json(text: &str) -> Result<NormSpec> {
    serde_json::from_str(text).map_err(|e| FrameError::Parse(e.to_string()))
}

/// Reads a norm spec and returns it with the hex SHA-256 of the file bytes.
pub fn read_spec(path: &Path) -> Result<(NormSpec, String)> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| FrameError::Parse(e.to_string()))?;
    Ok((spec_from_json(&text)?, content_hash(&bytes)))
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn trace_to_csv(trace: &[TraceSample]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "energy", "grad_norm"]).expect("in-memory write");
    for s in trace {
        w.write_record([s.iteration.to_string(), format!("{:e}", s.energy), format!("{:e}", s.grad_norm)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn trace_from_csv(text: &str) -> Result<Vec<TraceSample>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|row| row.map_err(|e| FrameError::Parse(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub spec_hash: String,
    pub seed: u64,
    pub config: FlowConfig,
    pub outcome: String,
    /// ISO-8601
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, spec_hash: &str, seed: u64, config: FlowConfig, outcome: String) -> Self {
        Self {
            command: command.to_string(),
            spec_hash: spec_hash.to_string(),
            seed,
            config,
            outcome,
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self).expect("manifest serialization") + "\n")?;
        Ok(())
    }
}
