//! Take files: UTF-8 TSV with an optional `#MARKERS` header line, plus a JSON sidecar
//! `{frame_rate, participant_id, stimulus_id}` stored next to the TSV as `<stem>.json`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::take::{MarkerTake, MARKER_COUNT, MARKER_LABELS};
use crate::error::{Error, Result};

/// Frame rate assumed when a sidecar omits it.
pub const DEFAULT_FRAME_RATE: f64 = 120.0;

const MARKER_HEADER: &str = "#MARKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TakeMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_rate: Option<f64>,
    pub participant_id: String,
    pub stimulus_id: String,
}

impl TakeMeta {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

/// Sidecar path for a take file.
pub fn sidecar_path(take_path: &Path) -> PathBuf {
    take_path.with_extension("json")
}

/// Reads a take using the sidecar next to it.
pub fn load_take_with_sidecar(path: &Path) -> Result<MarkerTake> {
    let meta = TakeMeta::from_json_file(&sidecar_path(path))?;
    load_take(path, &meta)
}

pub fn load_take(path: &Path, meta: &TakeMeta) -> Result<MarkerTake> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_take(&text, path, meta)
}

/// Parses TSV text; `origin` only labels error messages.
pub fn parse_take(text: &str, origin: &Path, meta: &TakeMeta) -> Result<MarkerTake> {
    let frame_rate = match meta.frame_rate {
        Some(fr) => fr,
        None => {
            log::warn!(
                "event=default_frame_rate file={} frame_rate={DEFAULT_FRAME_RATE}",
                origin.display()
            );
            DEFAULT_FRAME_RATE
        }
    };
    if !(frame_rate > 0.0) || !frame_rate.is_finite() {
        return Err(Error::FrameRate(frame_rate));
    }

    let mut markers: Option<Vec<String>> = None;
    let mut values = Vec::new();
    let mut frames = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(MARKER_HEADER) {
            markers = Some(
                rest.split('\t')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect(),
            );
            continue;
        }
        let expected = 3 * markers.as_ref().map_or(MARKER_COUNT, Vec::len);
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != expected {
            return Err(Error::ColumnCount {
                path: origin.to_path_buf(),
                line: lineno,
                expected,
                found: fields.len(),
            });
        }
        for (col, tok) in fields.iter().enumerate() {
            let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
                path: origin.to_path_buf(),
                line: lineno,
                token: tok.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    path: origin.to_path_buf(),
                    line: lineno,
                    column: col,
                });
            }
            values.push(v);
        }
        frames += 1;
    }
    let markers =
        markers.unwrap_or_else(|| MARKER_LABELS.iter().map(|s| s.to_string()).collect());
    if frames < 2 {
        return Err(Error::TooFewFrames {
            required: 2,
            found: frames,
        });
    }
    let data = DMatrix::from_row_slice(frames, 3 * markers.len(), &values);
    let take = MarkerTake::new(
        frame_rate,
        markers,
        data,
        meta.participant_id.clone(),
        meta.stimulus_id.clone(),
    )?;
    if !take.is_conformant() {
        log::warn!(
            "event=non_conformant_take file={} markers={}",
            origin.display(),
            take.markers().len()
        );
    }
    Ok(take)
}

/// Serializes a take to TSV text (header plus rows, shortest round-trip float formatting).
pub fn format_take(take: &MarkerTake) -> String {
    let mut out = String::new();
    out.push_str(MARKER_HEADER);
    for m in take.markers() {
        out.push('\t');
        out.push_str(m);
    }
    out.push('\n');
    let data = take.data();
    for r in 0..data.nrows() {
        for c in 0..data.ncols() {
            if c > 0 {
                out.push('\t');
            }
            let _ = write!(out, "{}", data[(r, c)]);
        }
        out.push('\n');
    }
    out
}

/// Writes `<path>` and its sidecar.
pub fn write_take(path: &Path, take: &MarkerTake) -> Result<()> {
    std::fs::write(path, format_take(take)).map_err(|e| Error::io(path, e))?;
    let meta = TakeMeta {
        frame_rate: Some(take.frame_rate()),
        participant_id: take.participant_id().to_string(),
        stimulus_id: take.stimulus_id().to_string(),
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::json(&side, e))?;
    std::fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}
