//! Hypertableau saturation of range-restricted clause sets.
//!
//! A branch is extended with a clause when all body atoms match the branch
//! simultaneously; the ground head disjuncts become children and an empty
//! head closes the branch. Search is depth-first on the leftmost open branch.
//! An open branch with no applicable extension is a model of the clause set.

mod matching;
mod tableau;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{check_range_restricted, Atom, Clause, LogicError, RangeViolation, Signature};

pub use matching::{check_model, hyper_extend, match_body, Branch, Extension, ModelViolation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("clause set is not range-restricted: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotRangeRestricted(Vec<RangeViolation>),
    #[error("inconsistent arity: {0}")]
    Arity(LogicError),
    #[error("invalid limits: {0}")]
    InvalidLimits(&'static str),
}

/// Resource bounds for one saturation run.
#[derive(Clone, Debug, PartialEq)]
pub struct Limits {
    /// Wall-clock bound; `None` disables it.
    pub timeout: Option<Duration>,
    /// Head instances containing deeper terms are not added.
    pub max_term_depth: usize,
    pub max_branch_atoms: usize,
    /// Deterministic budget on extension steps.
    pub max_steps: Option<u64>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            timeout: Some(Duration::from_secs(30)),
            max_term_depth: 5,
            max_branch_atoms: 1_000_000,
            max_steps: None,
        }
    }
}

impl Limits {
    /// Step-budgeted limits with no wall clock, for reproducible runs.
    pub fn steps(max_steps: u64) -> Self {
        Limits { timeout: None, max_steps: Some(max_steps), ..Limits::default() }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.timeout.is_some_and(|t| t.is_zero()) {
            return Err(EngineError::InvalidLimits("timeout must be positive"));
        }
        if self.max_term_depth == 0 {
            return Err(EngineError::InvalidLimits("max_term_depth must be positive"));
        }
        if self.max_branch_atoms == 0 {
            return Err(EngineError::InvalidLimits("max_branch_atoms must be positive"));
        }
        if self.max_steps == Some(0) {
            return Err(EngineError::InvalidLimits("max_steps must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Refuted,
    Saturated,
    ResourcesExhausted,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Refuted => "refuted",
            Status::Saturated => "saturated",
            Status::ResourcesExhausted => "resources_exhausted",
        })
    }
}

/// Which bound ended a `ResourcesExhausted` run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exhaustion {
    Steps,
    Timeout,
    BranchAtoms,
    /// The branch is complete except for instances beyond `max_term_depth`.
    TermDepth,
}

impl std::fmt::Display for Exhaustion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Exhaustion::Steps => "steps",
            Exhaustion::Timeout => "timeout",
            Exhaustion::BranchAtoms => "branch_atoms",
            Exhaustion::TermDepth => "term_depth",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SaturationStats {
    pub extensions: u64,
    pub splits: u64,
    pub branches_opened: u64,
    pub branches_closed: u64,
    pub elapsed: Duration,
}

/// A closed branch, identified by the disjuncts chosen at each split above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedBranch {
    pub choices: Vec<Atom>,
    pub closed_by: usize,
}

#[derive(Clone, Debug)]
pub struct SaturationResult {
    pub status: Status,
    pub exhausted_by: Option<Exhaustion>,
    /// Atoms of the reported open branch in derivation order; empty if refuted.
    pub model: Vec<Atom>,
    pub stats: SaturationStats,
    pub closed_branches: Vec<ClosedBranch>,
}

impl SaturationResult {
    /// Model atoms rendered and sorted lexicographically.
    pub fn sorted_model(&self) -> Vec<String> {
        let mut v: Vec<String> = self.model.iter().map(|a| a.to_string()).collect();
        v.sort();
        v
    }
}

pub fn check_signature(cs: &[Clause]) -> Result<(), EngineError> {
    let mut sig = Signature::default();
    cs.iter().try_for_each(|c| sig.check_clause(c)).map_err(EngineError::Arity)
}

/// Saturates `cs` under `limits`.
///
/// When several branches remain open at exhaustion the current (leftmost)
/// branch is reported; it always has the most atoms.
pub fn saturate(cs: &[Clause], limits: &Limits) -> Result<SaturationResult, EngineError> {
    limits.validate()?;
    let violations = check_range_restricted(cs);
    if !violations.is_empty() {
        return Err(EngineError::NotRangeRestricted(violations));
    }
    check_signature(cs)?;
    Ok(tableau::Prover::new(cs, limits).run())
}
