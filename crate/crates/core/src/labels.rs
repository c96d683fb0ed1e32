//! Label files: tab-separated text or JSON Lines, one record per line.
//!
//! TSV columns are `unit_id`, `scenes`, `actions`, then optional
//! `confidences`, `evidence` and `flagged`. List columns are `;`-separated;
//! map columns are `action=value` pairs. Backslash escapes `\\ \t \n \r \; \=`
//! protect free text. Lines starting with `#` are comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::record::LabelRecord;
use crate::taxonomy::{Action, Scene};

pub const TSV_HEADER: &str = "# unit_id\tscenes\tactions\tconfidences\tevidence\tflagged";

#[derive(Debug, thiserror::Error)]
pub enum LabelFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelFormat {
    Tsv,
    JsonLines,
}

impl LabelFormat {
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => LabelFormat::JsonLines,
            _ => LabelFormat::Tsv,
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            ';' => out.push_str("\\;"),
            '=' => out.push_str("\\="),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Splits on `sep` unless it is backslash-escaped; pieces keep their escapes.
fn split_unescaped(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == sep {
            parts.push(&s[start..i]);
            start = i + c.len_utf8();
        }
    }
    parts.push(&s[start..]);
    parts
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";")
}

pub fn format_tsv_line(r: &LabelRecord) -> String {
    let confidences = join(r.confidences.iter().map(|(a, c)| format!("{a}={c}")));
    let evidence = join(r.evidence.iter().map(|(a, e)| format!("{a}={}", escape(e))));
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        escape(&r.unit_id),
        join(&r.scenes),
        join(&r.actions),
        confidences,
        evidence,
        u8::from(r.flagged)
    )
}

fn list_items(field: &str) -> impl Iterator<Item = &str> {
    split_unescaped(field, ';').into_iter().map(str::trim).filter(|s| !s.is_empty() && *s != "-")
}

pub fn parse_tsv_line(line: &str) -> Result<LabelRecord, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() < 3 {
        return Err(format!("expected at least 3 tab-separated columns, found {}", cols.len()));
    }
    let unit_id = unescape(cols[0].trim());
    if unit_id.is_empty() {
        return Err("empty unit_id".into());
    }
    let scenes = list_items(cols[1])
        .map(|s| s.parse::<Scene>().map_err(|e| e.to_string()))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let actions = list_items(cols[2])
        .map(|s| s.parse::<Action>().map_err(|e| e.to_string()))
        .collect::<Result<BTreeSet<_>, _>>()?;

    let mut confidences = BTreeMap::new();
    if let Some(field) = cols.get(3) {
        for item in list_items(field) {
            let (a, v) = item.split_once('=').ok_or_else(|| format!("bad confidence {item:?}"))?;
            let action = a.trim().parse::<Action>().map_err(|e| e.to_string())?;
            let value: f64 = v.trim().parse().map_err(|_| format!("bad confidence value {v:?}"))?;
            confidences.insert(action, value);
        }
    }
    let mut evidence = BTreeMap::new();
    if let Some(field) = cols.get(4) {
        for item in split_unescaped(field, ';').into_iter().filter(|s| !s.is_empty()) {
            let parts = split_unescaped(item, '=');
            if parts.len() < 2 {
                return Err(format!("bad evidence {item:?}"));
            }
            let action = parts[0].trim().parse::<Action>().map_err(|e| e.to_string())?;
            evidence.insert(action, unescape(&parts[1..].join("=")));
        }
    }
    let flagged = match cols.get(5).map(|s| s.trim()) {
        None | Some("") | Some("0") | Some("false") => false,
        Some("1") | Some("true") => true,
        Some(other) => return Err(format!("bad flagged value {other:?}")),
    };
    let record = LabelRecord { unit_id, scenes, actions, confidences, evidence, flagged };
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

pub fn parse_labels(text: &str, format: LabelFormat, path: &Path) -> Result<Vec<LabelRecord>, LabelFileError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed = match format {
            LabelFormat::Tsv => parse_tsv_line(trimmed),
            LabelFormat::JsonLines => serde_json::from_str::<LabelRecord>(trimmed)
                .map_err(|e| e.to_string())
                .and_then(|r| r.validate().map(|_| r).map_err(|e| e.to_string())),
        };
        records.push(parsed.map_err(|message| LabelFileError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        })?);
    }
    Ok(records)
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRecord>, LabelFileError> {
    let text = fs::read_to_string(path)
        .map_err(|source| LabelFileError::Io { path: path.to_path_buf(), source })?;
    parse_labels(&text, LabelFormat::for_path(path), path)
}

pub fn render_labels(records: &[LabelRecord], format: LabelFormat) -> String {
    let mut out = String::new();
    match format {
        LabelFormat::Tsv => {
            out.push_str(TSV_HEADER);
            out.push('\n');
            for r in records {
                out.push_str(&format_tsv_line(r));
                out.push('\n');
            }
        }
        LabelFormat::JsonLines => {
            for r in records {
                out.push_str(&serde_json::to_string(r).expect("label records always serialize"));
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_labels(path: &Path, records: &[LabelRecord]) -> Result<(), LabelFileError> {
    let io = |source| LabelFileError::Io { path: path.to_path_buf(), source };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(render_labels(records, LabelFormat::for_path(path)).as_bytes()).map_err(io)
}
