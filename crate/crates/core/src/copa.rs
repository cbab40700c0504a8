//! Two-alternative cause/effect problems scored by wandering from each
//! alternative and measuring how close the resulting focus is to the premise.
//!
//! Problem file format, one directive per line, `%` comments:
//!
//! ```text
//! problem 65
//! asks cause
//! premise {family, take, dog, veterinarian}
//! alt1 exists A (dog(A) & exists B (bone(B) & chew_on(A,B)))
//! alt2 {dog, injure, paw}
//! gold 2
//! ```
//!
//! Statements are either a closed formula or a `{a, b}` symbol set, which
//! stands for the formula `exists X (a(X) & b(X))`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::embed::{cosine_unit, EmbeddingStore};
use crate::kb::KnowledgeBase;
use crate::logic::{canonical_symbol, is_reserved_symbol, symbols_of, Formula, Parser, SymbolSet};
use crate::wander::{focus_formula, render_chain, wander, WanderError, WanderParams};

#[derive(Debug, Error)]
pub enum CopaError {
    #[error("problem {}line {line}: {message}", .problem.map(|p| format!("{p}, ")).unwrap_or_default())]
    Format { problem: Option<u32>, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Asks {
    Cause,
    Effect,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Formula(Formula),
    Symbols(SymbolSet),
}

impl Statement {
    pub fn symbols(&self) -> SymbolSet {
        match self {
            Statement::Formula(f) => symbols_of(f),
            Statement::Symbols(s) => s.clone(),
        }
    }

    pub fn formula(&self) -> Result<Formula, WanderError> {
        match self {
            Statement::Formula(f) => Ok(f.clone()),
            Statement::Symbols(s) => focus_formula(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CopaProblem {
    pub id: u32,
    pub asks: Asks,
    pub premise: Statement,
    pub alternatives: [Statement; 2],
    /// 1 or 2.
    pub gold: Option<u8>,
}

fn parse_symbol_set(text: &str) -> Result<SymbolSet, String> {
    let inner = text.strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or("expected `{...}`")?;
    let mut out = SymbolSet::new();
    for raw in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let s = canonical_symbol(raw);
        let mut cs = s.chars();
        let ok = matches!(cs.next(), Some(c) if c.is_ascii_lowercase())
            && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !is_reserved_symbol(&s);
        if !ok {
            return Err(format!("invalid symbol `{raw}`"));
        }
        out.insert(crate::logic::Symbol::new(&s));
    }
    if out.is_empty() {
        return Err("empty symbol set".into());
    }
    Ok(out)
}

#[derive(Default)]
struct Draft {
    id: u32,
    line: usize,
    asks: Option<Asks>,
    premise: Option<Statement>,
    alt1: Option<Statement>,
    alt2: Option<Statement>,
    gold: Option<u8>,
}

impl Draft {
    fn finish(self) -> Result<CopaProblem, CopaError> {
        let missing = |what: &str| CopaError::Format {
            problem: Some(self.id),
            line: self.line,
            message: format!("missing {what}"),
        };
        Ok(CopaProblem {
            id: self.id,
            asks: self.asks.ok_or_else(|| missing("asks"))?,
            premise: self.premise.clone().ok_or_else(|| missing("premise"))?,
            alternatives: [
                self.alt1.clone().ok_or_else(|| missing("alt1"))?,
                self.alt2.clone().ok_or_else(|| missing("alt2"))?,
            ],
            gold: self.gold,
        })
    }
}

pub fn parse_copa<R: BufRead>(source: R) -> Result<Vec<CopaProblem>, CopaError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    let mut current: Option<Draft> = None;
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        let text = line.split('%').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (key, value) = text.split_once(char::is_whitespace).map(|(k, v)| (k, v.trim())).unwrap_or((text, ""));
        let problem = current.as_ref().map(|d| d.id);
        let err = |message: String| CopaError::Format { problem, line: line_no, message };
        if key == "problem" {
            if let Some(d) = current.take() {
                out.push(d.finish()?);
            }
            let id: u32 = value.parse().map_err(|_| err(format!("bad problem id `{value}`")))?;
            if !ids.insert(id) {
                return Err(CopaError::Format {
                    problem: Some(id),
                    line: line_no,
                    message: "duplicate problem id".into(),
                });
            }
            current = Some(Draft { id, line: line_no, ..Draft::default() });
            continue;
        }
        let Some(d) = current.as_mut() else {
            return Err(err(format!("`{key}` before any `problem` line")));
        };
        let statement = |v: &str| -> Result<Statement, CopaError> {
            if v.starts_with('{') {
                parse_symbol_set(v).map(Statement::Symbols).map_err(err)
            } else {
                Parser::new().parse_formula(v).map(Statement::Formula).map_err(|e| err(e.to_string()))
            }
        };
        let slot_taken = |taken: bool| if taken { Err(err(format!("repeated `{key}`"))) } else { Ok(()) };
        match key {
            "asks" => {
                slot_taken(d.asks.is_some())?;
                d.asks = Some(match value {
                    "cause" => Asks::Cause,
                    "effect" => Asks::Effect,
                    _ => return Err(err(format!("asks must be cause or effect, got `{value}`"))),
                });
            }
            "premise" => {
                slot_taken(d.premise.is_some())?;
                d.premise = Some(statement(value)?);
            }
            "alt1" => {
                slot_taken(d.alt1.is_some())?;
                d.alt1 = Some(statement(value)?);
            }
            "alt2" => {
                slot_taken(d.alt2.is_some())?;
                d.alt2 = Some(statement(value)?);
            }
            "gold" => {
                slot_taken(d.gold.is_some())?;
                d.gold = Some(parse_label(value).ok_or_else(|| err(format!("gold must be 1 or 2, got `{value}`")))?);
            }
            _ => return Err(err(format!("unknown directive `{key}`"))),
        }
    }
    if let Some(d) = current.take() {
        out.push(d.finish()?);
    }
    Ok(out)
}

fn parse_label(s: &str) -> Option<u8> {
    match s.trim() {
        "1" => Some(1),
        "2" => Some(2),
        _ => None,
    }
}

/// Gold labels as `<id> <1|2>` lines.
pub fn parse_gold<R: BufRead>(source: R) -> Result<BTreeMap<u32, u8>, CopaError> {
    let mut out = BTreeMap::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let text = line.split('%').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let bad = || CopaError::Format {
            problem: None,
            line: n + 1,
            message: format!("expected `<id> <1|2>`, got `{text}`"),
        };
        let mut parts = text.split_whitespace();
        let id: u32 = parts.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
        let label = parts.next().and_then(parse_label).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        out.insert(id, label);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringStrategy {
    /// Symbols of the last focus set.
    #[default]
    FinalFocus,
    /// Union of every focus set after the head.
    ChainUnion,
    /// Per-element scores weighted by 1/2 per step back from the end.
    RoundDiscounted,
}

impl std::str::FromStr for ScoringStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "final" | "final-focus" => Ok(ScoringStrategy::FinalFocus),
            "union" | "chain-union" => Ok(ScoringStrategy::ChainUnion),
            "discounted" | "round-discounted" => Ok(ScoringStrategy::RoundDiscounted),
            _ => Err(format!("unknown scoring `{s}` (final, union, discounted)")),
        }
    }
}

/// Mean over `symbols` of the best cosine to any premise symbol. Symbols
/// without vectors are skipped; `None` if no pair has vectors.
pub fn proximity(symbols: &SymbolSet, premise: &SymbolSet, store: &EmbeddingStore) -> Option<f64> {
    let pv: Vec<_> = premise.iter().filter_map(|p| store.lookup_vector(p.as_str())).collect();
    if pv.is_empty() {
        return None;
    }
    let best: Vec<f64> = symbols
        .iter()
        .filter_map(|s| store.lookup_vector(s.as_str()))
        .map(|v| pv.iter().map(|p| cosine_unit(&v, p)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    (!best.is_empty()).then(|| (best.iter().sum::<f64>() / best.len() as f64).clamp(-1.0, 1.0))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error(transparent)]
    Wander(#[from] WanderError),
    #[error("no embedded symbols to compare with the premise")]
    NoEvidence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AltScore {
    pub score: f64,
    pub chain: Vec<SymbolSet>,
}

/// Scores a chain against the premise.
pub fn score_chain(
    chain: &[SymbolSet],
    premise: &SymbolSet,
    store: &EmbeddingStore,
    strategy: ScoringStrategy,
) -> Option<f64> {
    let last = chain.last()?;
    match strategy {
        ScoringStrategy::FinalFocus => {
            let target =
                if last.is_empty() { chain.iter().fold(SymbolSet::new(), |acc, s| acc.union(s)) } else { last.clone() };
            proximity(&target, premise, store)
        }
        ScoringStrategy::ChainUnion => {
            let foci = if chain.len() > 1 { &chain[1..] } else { chain };
            proximity(&foci.iter().fold(SymbolSet::new(), |acc, s| acc.union(s)), premise, store)
        }
        ScoringStrategy::RoundDiscounted => {
            let (mut total, mut weight) = (0.0, 0.0);
            for (back, s) in chain.iter().rev().enumerate() {
                if let Some(p) = proximity(s, premise, store) {
                    let w = 0.5f64.powi(back as i32);
                    total += w * p;
                    weight += w;
                }
            }
            (weight > 0.0).then(|| (total / weight).clamp(-1.0, 1.0))
        }
    }
}

pub fn score_alternative(
    premise: &SymbolSet,
    alt: &Formula,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &WanderParams,
    strategy: ScoringStrategy,
) -> Result<AltScore, ScoreError> {
    let out = wander(alt, kb, store, params)?;
    let score = score_chain(&out.chain, premise, store, strategy).ok_or(ScoreError::NoEvidence)?;
    Ok(AltScore { score, chain: out.chain })
}

/// Argmax with ties going to alternative 1: `(choice, tie)`.
pub fn choose(scores: [f64; 2]) -> (u8, bool) {
    if scores[1] > scores[0] {
        (2, false)
    } else {
        (1, scores[0] == scores[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AltReport {
    pub score: Option<f64>,
    pub chain: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProblemReport {
    pub id: u32,
    pub asks: Asks,
    pub premise: SymbolSet,
    pub alternatives: [AltReport; 2],
    pub choice: Option<u8>,
    pub tie: bool,
    pub gold: Option<u8>,
    pub correct: Option<bool>,
}

fn alt_report(r: &Result<AltScore, ScoreError>) -> AltReport {
    match r {
        Ok(s) => AltReport { score: Some(s.score), chain: render_chain(&s.chain), error: None },
        Err(e) => AltReport { score: None, chain: String::new(), error: Some(e.to_string()) },
    }
}

/// Scores both alternatives (concurrently) and picks the closer one.
pub fn solve(
    problem: &CopaProblem,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &WanderParams,
    strategy: ScoringStrategy,
) -> ProblemReport {
    let premise = problem.premise.symbols();
    let run = |alt: &Statement| {
        alt.formula()
            .map_err(ScoreError::from)
            .and_then(|f| score_alternative(&premise, &f, kb, store, params, strategy))
    };
    let (r1, r2) = std::thread::scope(|s| {
        let h = s.spawn(|| run(&problem.alternatives[1]));
        let r1 = run(&problem.alternatives[0]);
        (r1, h.join().expect("scoring thread panicked"))
    });
    let alternatives = [alt_report(&r1), alt_report(&r2)];
    let (choice, tie) = match (&r1, &r2) {
        (Ok(a), Ok(b)) => {
            let (c, t) = choose([a.score, b.score]);
            (Some(c), t)
        }
        _ => (None, false),
    };
    ProblemReport {
        id: problem.id,
        asks: problem.asks,
        premise,
        alternatives,
        choice,
        tie,
        gold: problem.gold,
        correct: problem.gold.zip(choice).map(|(g, c)| g == c),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CopaSummary {
    pub problems: usize,
    pub scored: usize,
    pub unscored: usize,
    pub ties: usize,
    pub labelled: usize,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CopaReport {
    pub rows: Vec<ProblemReport>,
    pub summary: CopaSummary,
}

/// Solves every problem. `gold` overrides labels given in the problem file.
/// Rows are ordered by problem id.
pub fn evaluate(
    problems: &[CopaProblem],
    gold: &BTreeMap<u32, u8>,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &WanderParams,
    strategy: ScoringStrategy,
) -> CopaReport {
    let mut rows: Vec<ProblemReport> = problems
        .iter()
        .map(|p| {
            let mut p = p.clone();
            if let Some(&g) = gold.get(&p.id) {
                p.gold = Some(g);
            }
            solve(&p, kb, store, params, strategy)
        })
        .collect();
    rows.sort_by_key(|r| r.id);
    let scored = rows.iter().filter(|r| r.choice.is_some()).count();
    let judged: Vec<bool> = rows.iter().filter_map(|r| r.correct).collect();
    let summary = CopaSummary {
        problems: rows.len(),
        scored,
        unscored: rows.len() - scored,
        ties: rows.iter().filter(|r| r.tie).count(),
        labelled: rows.iter().filter(|r| r.gold.is_some()).count(),
        accuracy: (!judged.is_empty()).then(|| judged.iter().filter(|&&c| c).count() as f64 / judged.len() as f64),
    };
    CopaReport { rows, summary }
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ReportLine<'a> {
    Problem(&'a ProblemReport),
    Summary(&'a CopaSummary),
}

/// JSON Lines: one `problem` line per row, then one `summary` line.
pub fn write_report<W: Write>(report: &CopaReport, mut out: W) -> std::io::Result<()> {
    for r in &report.rows {
        writeln!(out, "{}", serde_json::to_string(&ReportLine::Problem(r)).map_err(std::io::Error::other)?)?;
    }
    writeln!(out, "{}", serde_json::to_string(&ReportLine::Summary(&report.summary)).map_err(std::io::Error::other)?)?;
    out.flush()
}

/// Problem ids that appear in the file in order, for completeness checks.
pub fn problem_ids(problems: &[CopaProblem]) -> BTreeSet<u32> {
    problems.iter().map(|p| p.id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
% sample
problem 65
asks cause
premise {family, take, dog, veterinarian}
alt1 exists A (dog(A) & exists B, C (r1on(C,B) & bone(B) & r1agent(C,A) & chew(C)))
alt2 {dog, injure, paw}
gold 2

problem 66
asks effect
premise {rain}
alt1 {wet}
alt2 {dry}
";

    #[test]
    fn parses_sample() {
        let ps = parse_copa(SAMPLE.as_bytes()).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].id, 65);
        assert_eq!(ps[0].asks, Asks::Cause);
        assert_eq!(ps[0].gold, Some(2));
        assert!(matches!(ps[0].alternatives[0], Statement::Formula(_)));
        assert_eq!(ps[0].alternatives[1].symbols().to_string(), "{dog, injure, paw}");
        assert_eq!(ps[1].gold, None);
        assert_eq!(ps[1].asks, Asks::Effect);
    }

    #[test]
    fn empty_file() {
        assert!(parse_copa("".as_bytes()).unwrap().is_empty());
        assert!(parse_copa("% nothing\n\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn missing_alternative_names_problem() {
        let text = "problem 7\nasks cause\npremise {a}\nalt1 {b}\n";
        let e = parse_copa(text.as_bytes()).unwrap_err();
        assert!(matches!(e, CopaError::Format { problem: Some(7), .. }));
        assert!(e.to_string().contains("problem 7") && e.to_string().contains("alt2"));
    }

    #[test]
    fn format_errors() {
        for bad in [
            "asks cause\n",
            "problem x\n",
            "problem 1\nasks why\n",
            "problem 1\nasks cause\nasks cause\n",
            "problem 1\npremise {}\n",
            "problem 1\npremise {sk1}\n",
            "problem 1\npremise dog(X)\n",
            "problem 1\ngold 3\n",
            "problem 1\nfoo bar\n",
            "problem 1\nasks cause\npremise {a}\nalt1 {b}\nalt2 {c}\nproblem 1\n",
        ] {
            assert!(parse_copa(bad.as_bytes()).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn gold_file() {
        let g = parse_gold("65 2\n% c\n66 1\n".as_bytes()).unwrap();
        assert_eq!(g.get(&65), Some(&2));
        assert!(parse_gold("65 3\n".as_bytes()).is_err());
        assert!(parse_gold("65\n".as_bytes()).is_err());
    }

    #[test]
    fn choice_rules() {
        assert_eq!(choose([0.3, 0.7]), (2, false));
        assert_eq!(choose([0.7, 0.3]), (1, false));
        assert_eq!(choose([0.5, 0.5]), (1, true));
    }

    #[test]
    fn argmax_invariance() {
        let pairs = [[0.3, 0.7], [0.7, 0.3], [0.5, 0.5], [-0.2, -0.1], [-1.0, 1.0], [0.0, -0.0]];
        let shims: [fn(f64) -> f64; 3] = [|x| x + 0.1, |x| x * 2.0, |x| x.exp()];
        for p in pairs {
            for f in shims {
                assert_eq!(choose(p), choose([f(p[0]), f(p[1])]));
            }
        }
    }

    #[test]
    fn proximity_identity() {
        let s = EmbeddingStore::from_vectors(2, vec![("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]).unwrap().0;
        let ab: SymbolSet = ["a", "b"].into_iter().collect();
        assert!((proximity(&ab, &ab, &s).unwrap() - 1.0).abs() < 1e-6);
        let none: SymbolSet = ["zzz"].into_iter().collect();
        assert_eq!(proximity(&none, &ab, &s), None);
        assert_eq!(proximity(&ab, &none, &s), None);
    }

    #[test]
    fn chain_strategies() {
        let s =
            EmbeddingStore::from_vectors(2, vec![("p", vec![1.0, 0.0]), ("x", vec![0.0, 1.0]), ("y", vec![1.0, 1.0])])
                .unwrap()
                .0;
        let p: SymbolSet = ["p"].into_iter().collect();
        let chain: Vec<SymbolSet> =
            vec![["x"].into_iter().collect(), ["y"].into_iter().collect(), ["x"].into_iter().collect()];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(score_chain(&chain, &p, &s, ScoringStrategy::FinalFocus).unwrap().abs() < 1e-6);
        assert!((score_chain(&chain, &p, &s, ScoringStrategy::ChainUnion).unwrap() - h / 2.0).abs() < 1e-6);
        // weights 1, 1/2, 1/4 from the end
        let want = (0.0 + 0.5 * h + 0.25 * 0.0) / 1.75;
        assert!((score_chain(&chain, &p, &s, ScoringStrategy::RoundDiscounted).unwrap() - want).abs() < 1e-6);
        assert_eq!(score_chain(&[], &p, &s, ScoringStrategy::FinalFocus), None);
    }
}
