//! Triple knowledge base: ingestion, axiom translation, symbol index and
//! persistence.
//!
//! A triple `(subject, relation, object)` becomes the axiom
//! `all X (subject(X) => exists Y (relation(X,Y) & object(Y)))`. Triples are
//! stored compactly and clausified on first use; each axiom draws Skolem
//! names from its own namespace so cached clause sets can be combined freely.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use thiserror::Error;

use crate::logic::{
    clausify_with, is_reserved_symbol, Atom, Clause, Formula, LogicError, Parser, Signature, SkolemNamer, Symbol,
    SymbolSet, Term,
};

pub const KB_HEADER: &str = "% hyperwander-kb v1";

#[derive(Debug, Error)]
pub enum KbError {
    #[error("record {record}: {reason}")]
    Malformed { record: usize, reason: String },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: LogicError },
    #[error("axiom rejected: {0}")]
    Axiom(LogicError),
    #[error("not a knowledge base file: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct AxiomId(pub u32);

impl std::fmt::Display for AxiomId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Triple {
    pub subject: Symbol,
    pub relation: Symbol,
    pub object: Symbol,
}

fn valid_concept(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_lowercase())
        && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !is_reserved_symbol(s)
}

fn valid_relation(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_lowercase())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved_symbol(s)
}

/// Outcome of canonicalizing one concept field.
#[derive(Debug, PartialEq, Eq)]
pub enum Concept {
    Ok(String),
    /// A ConceptNet URI for a language other than English.
    Foreign,
    Invalid(String),
}

/// `/c/en/dog_food/n` and `Dog Food` both become `dog_food`.
pub fn canonical_concept(raw: &str) -> Concept {
    let raw = raw.trim();
    let text = if let Some(rest) = raw.strip_prefix("/c/") {
        let mut parts = rest.split('/');
        if parts.next() != Some("en") {
            return Concept::Foreign;
        }
        parts.next().unwrap_or("")
    } else {
        raw
    };
    let c = crate::logic::canonical_symbol(text);
    if valid_concept(&c) {
        Concept::Ok(c)
    } else {
        Concept::Invalid(format!("invalid concept `{raw}`"))
    }
}

/// `/r/HasA`, `HasA` and `hasA` all become `hasA`.
pub fn canonical_relation(raw: &str) -> Result<String, String> {
    let raw = raw.trim();
    let text = raw.strip_prefix("/r/").unwrap_or(raw);
    let mut cs = text.chars();
    let r = match cs.next() {
        Some(first) => first.to_ascii_lowercase().to_string() + cs.as_str(),
        None => String::new(),
    };
    if valid_relation(&r) {
        Ok(r)
    } else {
        Err(format!("invalid relation `{raw}`"))
    }
}

impl Triple {
    /// Builds a triple from already-canonical names.
    pub fn new(subject: &str, relation: &str, object: &str) -> Self {
        Triple { subject: Symbol::new(subject), relation: Symbol::new(relation), object: Symbol::new(object) }
    }

    /// The predicate symbols of the axiom: subject, relation, object.
    pub fn symbols(&self) -> [&Symbol; 3] {
        [&self.subject, &self.relation, &self.object]
    }

    /// Recognizes a formula produced by [`triple_to_axiom`].
    pub fn from_axiom(f: &Formula) -> Option<Triple> {
        let Formula::Forall(xs, body) = f else { return None };
        let [x] = xs.as_slice() else { return None };
        let Formula::Implies(lhs, rhs) = body.as_ref() else { return None };
        let Formula::Atom(subj) = lhs.as_ref() else { return None };
        let Formula::Exists(ys, conj) = rhs.as_ref() else { return None };
        let [y] = ys.as_slice() else { return None };
        let Formula::And(parts) = conj.as_ref() else { return None };
        let [Formula::Atom(rel), Formula::Atom(obj)] = parts.as_slice() else { return None };
        let (vx, vy) = (Term::Var(x.clone()), Term::Var(y.clone()));
        (x != y && subj.args == [vx.clone()] && rel.args == [vx, vy.clone()] && obj.args == [vy]).then(|| Triple {
            subject: subj.predicate.clone(),
            relation: rel.predicate.clone(),
            object: obj.predicate.clone(),
        })
    }
}

pub fn triple_to_axiom(t: &Triple) -> Formula {
    let x = || Term::var("X");
    let y = || Term::var("Y");
    Formula::forall(
        &["X"],
        Formula::implies(
            Formula::Atom(Atom { predicate: t.subject.clone(), args: vec![x()] }),
            Formula::exists(
                &["Y"],
                Formula::And(vec![
                    Formula::Atom(Atom { predicate: t.relation.clone(), args: vec![x(), y()] }),
                    Formula::Atom(Atom { predicate: t.object.clone(), args: vec![y()] }),
                ]),
            ),
        ),
    )
}

#[derive(Debug)]
enum Source {
    Triple(Triple),
    Formula(Formula),
}

#[derive(Debug)]
pub struct Axiom {
    pub id: AxiomId,
    source: Source,
    symbols: Vec<Symbol>,
    clauses: OnceLock<Vec<Clause>>,
}

impl Axiom {
    pub fn formula(&self) -> Formula {
        match &self.source {
            Source::Triple(t) => triple_to_axiom(t),
            Source::Formula(f) => f.clone(),
        }
    }

    pub fn triple(&self) -> Option<&Triple> {
        match &self.source {
            Source::Triple(t) => Some(t),
            Source::Formula(_) => None,
        }
    }

    /// Distinct predicate symbols in first-occurrence order.
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn contains(&self, s: &str) -> bool {
        self.symbols.iter().any(|x| x.as_str() == s)
    }

    /// Clausified form, computed on first access.
    pub fn clauses(&self) -> &[Clause] {
        self.clauses.get_or_init(|| {
            clausify_with(&self.formula(), &mut SkolemNamer::for_axiom(self.id.0 as usize))
                .expect("axioms are validated on insertion")
        })
    }

    pub fn is_cached(&self) -> bool {
        self.clauses.get().is_some()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IngestOptions {
    /// Count malformed records instead of failing on the first one.
    pub skip_bad: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub records: usize,
    pub added: usize,
    pub duplicates: usize,
    pub foreign: usize,
    pub malformed: usize,
    /// First few malformed records, `(record number, reason)`.
    pub errors: Vec<(usize, String)>,
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} records: {} added, {} duplicate, {} non-English, {} malformed",
            self.records, self.added, self.duplicates, self.foreign, self.malformed
        )
    }
}

#[derive(Debug, Default)]
pub struct KnowledgeBase {
    axioms: Vec<Axiom>,
    index: BTreeMap<Symbol, Vec<AxiomId>>,
    triples: HashMap<Triple, AxiomId>,
    formulas: HashMap<String, AxiomId>,
    interned: HashSet<Symbol>,
    signature: Signature,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn axiom(&self, id: AxiomId) -> &Axiom {
        &self.axioms[id.0 as usize]
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Axiom> + '_ {
        self.axioms.iter()
    }

    pub fn formula(&self, id: AxiomId) -> Formula {
        self.axiom(id).formula()
    }

    pub fn clauses(&self, id: AxiomId) -> &[Clause] {
        self.axiom(id).clauses()
    }

    /// Axioms whose symbol set contains `s`, ascending by id.
    pub fn formulas_containing(&self, s: &str) -> &[AxiomId] {
        self.index.get(s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn occurrence_count(&self, s: &str) -> usize {
        self.formulas_containing(s).len()
    }

    /// Every predicate symbol in the KB, sorted.
    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> + '_ {
        self.index.keys()
    }

    pub fn symbol_set(&self) -> SymbolSet {
        self.index.keys().cloned().collect()
    }

    pub fn contains_symbol(&self, s: &str) -> bool {
        self.index.contains_key(s)
    }

    /// Number of axioms whose clause set has been materialized.
    pub fn cached_clause_sets(&self) -> usize {
        self.axioms.iter().filter(|a| a.is_cached()).count()
    }

    fn intern(&mut self, s: &Symbol) -> Symbol {
        if let Some(x) = self.interned.get(s) {
            return x.clone();
        }
        self.interned.insert(s.clone());
        s.clone()
    }

    fn push(&mut self, source: Source, symbols: Vec<Symbol>, clauses: Option<Vec<Clause>>) -> AxiomId {
        let id = AxiomId(self.axioms.len() as u32);
        for s in &symbols {
            self.index.entry(s.clone()).or_default().push(id);
        }
        let cache = OnceLock::new();
        if let Some(cs) = clauses {
            let _ = cache.set(cs);
        }
        self.axioms.push(Axiom { id, source, symbols, clauses: cache });
        id
    }

    /// Adds a triple axiom; `None` if it is already present.
    pub fn add_triple(&mut self, t: Triple) -> Result<Option<AxiomId>, LogicError> {
        if self.triples.contains_key(&t) {
            return Ok(None);
        }
        self.signature.check_atoms(&[
            Atom { predicate: t.subject.clone(), args: vec![Term::var("X")] },
            Atom { predicate: t.relation.clone(), args: vec![Term::var("X"), Term::var("Y")] },
            Atom { predicate: t.object.clone(), args: vec![Term::var("Y")] },
        ])?;
        let t = Triple {
            subject: self.intern(&t.subject),
            relation: self.intern(&t.relation),
            object: self.intern(&t.object),
        };
        let mut symbols: Vec<Symbol> = Vec::with_capacity(3);
        for s in t.symbols() {
            if !symbols.contains(s) {
                symbols.push(s.clone());
            }
        }
        let id = self.push(Source::Triple(t.clone()), symbols, None);
        self.triples.insert(t, id);
        Ok(Some(id))
    }

    /// Adds an arbitrary closed formula as an axiom; `None` if already present.
    /// Triple-shaped formulas are stored as triples.
    pub fn add_formula(&mut self, f: Formula) -> Result<Option<AxiomId>, LogicError> {
        if let Some(t) = Triple::from_axiom(&f) {
            return self.add_triple(t);
        }
        let key = f.to_string();
        if self.formulas.contains_key(&key) {
            return Ok(None);
        }
        let id = self.axioms.len();
        let clauses = clausify_with(&f, &mut SkolemNamer::for_axiom(id))?;
        self.signature.check_atoms(f.atoms())?;
        let mut symbols: Vec<Symbol> = Vec::new();
        for a in f.atoms() {
            if !symbols.contains(&a.predicate) {
                symbols.push(a.predicate.clone());
            }
        }
        let symbols = symbols.iter().map(|s| self.intern(s)).collect();
        let id = self.push(Source::Formula(f), symbols, Some(clauses));
        self.formulas.insert(key, id);
        Ok(Some(id))
    }

    /// Streams `relation,subject,object` records (comma or tab separated).
    /// ConceptNet assertion rows (`/a/...` URI first) are also accepted.
    pub fn ingest_triples<R: BufRead>(&mut self, source: R, opts: IngestOptions) -> Result<IngestReport, KbError> {
        let mut report = IngestReport::default();
        for (n, line) in source.lines().enumerate() {
            let line = line?;
            let record = n + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            report.records += 1;
            match parse_record(trimmed) {
                Ok(Some(t)) => match self.add_triple(t) {
                    Ok(Some(_)) => report.added += 1,
                    Ok(None) => report.duplicates += 1,
                    Err(e) => bad(&mut report, opts, record, e.to_string())?,
                },
                Ok(None) => report.foreign += 1,
                Err(reason) => bad(&mut report, opts, record, reason)?,
            }
        }
        Ok(report)
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<(), KbError> {
        writeln!(out, "{KB_HEADER}")?;
        writeln!(out, "% {} axioms", self.axioms.len())?;
        for a in &self.axioms {
            writeln!(out, "{}\t{}", a.id, a.formula())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load<R: BufRead>(source: R) -> Result<KnowledgeBase, KbError> {
        let mut kb = KnowledgeBase::new();
        let mut parser = Parser::new();
        let mut header_seen = false;
        for (n, line) in source.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if !header_seen {
                if trimmed.is_empty() {
                    continue;
                }
                if trimmed != KB_HEADER {
                    return Err(KbError::Header(trimmed.chars().take(60).collect()));
                }
                header_seen = true;
                continue;
            }
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            let (id, text) = trimmed
                .split_once('\t')
                .ok_or_else(|| KbError::Malformed { record: n + 1, reason: "expected `<id>\\t<formula>`".into() })?;
            if id.trim().parse::<usize>().ok() != Some(kb.len()) {
                return Err(KbError::Malformed { record: n + 1, reason: format!("expected axiom id {}", kb.len()) });
            }
            let f = parser.parse_formula(text).map_err(|source| KbError::Parse { line: n + 1, source })?;
            match kb.add_formula(f) {
                Ok(Some(_)) => {}
                Ok(None) => return Err(KbError::Malformed { record: n + 1, reason: "duplicate axiom".into() }),
                Err(e) => return Err(KbError::Axiom(e)),
            }
        }
        if !header_seen {
            return Err(KbError::Header("empty file".into()));
        }
        Ok(kb)
    }
}

fn bad(report: &mut IngestReport, opts: IngestOptions, record: usize, reason: String) -> Result<(), KbError> {
    if !opts.skip_bad {
        return Err(KbError::Malformed { record, reason });
    }
    report.malformed += 1;
    if report.errors.len() < 20 {
        report.errors.push((record, reason));
    }
    Ok(())
}

/// `Ok(None)` for non-English records.
fn parse_record(line: &str) -> Result<Option<Triple>, String> {
    let fields: Vec<&str> = if line.contains('\t') { line.split('\t').collect() } else { line.split(',').collect() };
    let (rel, subj, obj) = match fields.as_slice() {
        [r, s, o] => (*r, *s, *o),
        [uri, r, s, o, ..] if uri.starts_with("/a/") => (*r, *s, *o),
        _ => return Err(format!("expected 3 fields, found {}", fields.len())),
    };
    if rel.trim().is_empty() || subj.trim().is_empty() || obj.trim().is_empty() {
        return Err("empty field".into());
    }
    let relation = canonical_relation(rel)?;
    let subject = match canonical_concept(subj) {
        Concept::Ok(s) => s,
        Concept::Foreign => return Ok(None),
        Concept::Invalid(e) => return Err(e),
    };
    let object = match canonical_concept(obj) {
        Concept::Ok(s) => s,
        Concept::Foreign => return Ok(None),
        Concept::Invalid(e) => return Err(e),
    };
    Ok(Some(Triple::new(&subject, &relation, &object)))
}

/// Builds a fresh KB from one triple stream.
pub fn ingest_triples<R: BufRead>(source: R, opts: IngestOptions) -> Result<(KnowledgeBase, IngestReport), KbError> {
    let mut kb = KnowledgeBase::new();
    let report = kb.ingest_triples(source, opts)?;
    Ok((kb, report))
}
