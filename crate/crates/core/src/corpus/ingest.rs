use std::collections::HashSet;
use std::io::BufRead;

use serde::Deserialize;

use super::{CorpusError, Document, DocumentKind};
use crate::month::YearMonth;
use crate::relations::Proposition;

/// Ingestion fails when more than this fraction of non-blank lines is malformed.
pub const MAX_MALFORMED_FRACTION: f64 = 0.5;

#[derive(Debug, Default)]
pub struct IngestReport {
    pub documents: Vec<Document>,
    /// Lines skipped for any reason (bad JSON, missing fields, bad date, duplicate id).
    pub skipped: usize,
    /// Subset of `skipped` whose only problem was a missing or unparseable date.
    pub missing_date: usize,
    pub diagnostics: Vec<String>,
}

#[derive(Deserialize)]
struct RawDocument {
    id: Option<String>,
    kind: Option<DocumentKind>,
    source: Option<String>,
    published_at: Option<String>,
    title: Option<String>,
    body: Option<String>,
    #[serde(default)]
    propositions: Option<Vec<Proposition>>,
}

enum LineError {
    Malformed(String),
    MissingDate(String),
}

fn parse_line(line: &str) -> Result<Document, LineError> {
    let raw: RawDocument =
        serde_json::from_str(line).map_err(|e| LineError::Malformed(format!("invalid JSON: {e}")))?;
    let missing = |field: &str| LineError::Malformed(format!("missing field `{field}`"));
    let id = raw.id.filter(|s| !s.is_empty()).ok_or_else(|| missing("id"))?;
    let kind = raw.kind.ok_or_else(|| missing("kind"))?;
    let source = raw.source.ok_or_else(|| missing("source"))?;
    let title = raw.title.ok_or_else(|| missing("title"))?;
    let body = raw.body.ok_or_else(|| missing("body"))?;
    let published_month = match raw.published_at {
        None => return Err(LineError::MissingDate(format!("document {id} has no published_at"))),
        Some(s) => YearMonth::from_iso_date(&s)
            .map_err(|e| LineError::MissingDate(format!("document {id}: {e}")))?,
    };
    Ok(Document {
        id,
        kind,
        source,
        published_month,
        title,
        body,
        sentences: Vec::new(),
        propositions: raw.propositions,
    })
}

/// Read JSONL documents. Blank lines are ignored; malformed lines are
/// skipped and counted.
pub fn ingest_documents<R: BufRead>(reader: R) -> Result<IngestReport, CorpusError> {
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut total = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        match parse_line(&line) {
            Ok(doc) => {
                if seen.insert(doc.id.clone()) {
                    report.documents.push(doc);
                } else {
                    report.skipped += 1;
                    report
                        .diagnostics
                        .push(format!("line {}: duplicate id `{}`", lineno + 1, doc.id));
                }
            }
            Err(LineError::Malformed(msg)) => {
                report.skipped += 1;
                report.diagnostics.push(format!("line {}: {msg}", lineno + 1));
            }
            Err(LineError::MissingDate(msg)) => {
                report.skipped += 1;
                report.missing_date += 1;
                report.diagnostics.push(format!("line {}: {msg}", lineno + 1));
            }
        }
    }
    if total > 0 && report.skipped as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(CorpusError::TooManyMalformed {
            malformed: report.skipped,
            total,
            first: report.diagnostics.first().cloned().unwrap_or_default(),
        });
    }
    Ok(report)
}
