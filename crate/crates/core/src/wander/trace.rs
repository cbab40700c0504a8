//! JSON Lines trace files, one [`Round`] per line.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{pick_focus, sort_ranked, Round};
use crate::logic::SymbolSet;

pub const TRACE_SCHEMA: &str = "hyperwander-trace/1";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("trace line {line}: unsupported schema `{schema}`")]
    Schema { line: usize, schema: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_trace<W: Write>(rounds: &[Round], mut out: W) -> Result<(), TraceError> {
    for r in rounds {
        let line = serde_json::to_string(r).map_err(|source| TraceError::Json { line: r.round, source })?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(source: R) -> Result<Vec<Round>, TraceError> {
    let mut out = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Round = serde_json::from_str(&line).map_err(|source| TraceError::Json { line: n + 1, source })?;
        if r.schema != TRACE_SCHEMA {
            return Err(TraceError::Schema { line: n + 1, schema: r.schema });
        }
        out.push(r);
    }
    Ok(out)
}

/// Recomputes a round's focus from its recorded clusters and similarities.
pub fn replay_focus(round: &Round) -> Option<SymbolSet> {
    let mut ranked = round.clusters.clone();
    sort_ranked(&mut ranked);
    pick_focus(ranked.len(), round.pick).map(|i| ranked[i].members.clone())
}
