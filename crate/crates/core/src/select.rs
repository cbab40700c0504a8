//! Premise selection over a [`KnowledgeBase`].
//!
//! Semantic selection keeps axioms whose non-context symbols lie within a
//! similarity interval of the context. Syntactic selection is SInE-style
//! triggering weighted by symbol occurrence counts.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::embed::{cosine_unit, EmbeddingStore};
use crate::kb::{AxiomId, KnowledgeBase};
use crate::logic::{Symbol, SymbolSet};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid selection parameters: {0}")]
pub struct SelectError(pub String);

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SelectionParams {
    pub sim_low: f64,
    pub sim_high: f64,
    pub expand_threshold: f64,
    pub sine_tolerance: f64,
    pub sine_depth: usize,
    pub max_axioms: usize,
    /// Let symbols without a vector pass the interval test.
    pub oov_pass: bool,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            sim_low: 0.4,
            sim_high: 1.0,
            expand_threshold: 0.6,
            sine_tolerance: 1.5,
            sine_depth: 2,
            max_axioms: 2000,
            oov_pass: false,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<(), SelectError> {
        let unit = -1.0..=1.0;
        if !(unit.contains(&self.sim_low) && unit.contains(&self.sim_high) && self.sim_low <= self.sim_high) {
            return Err(SelectError(format!("need -1 <= lo <= hi <= 1, got [{}, {}]", self.sim_low, self.sim_high)));
        }
        if !unit.contains(&self.expand_threshold) {
            return Err(SelectError(format!("expand threshold {} outside [-1, 1]", self.expand_threshold)));
        }
        if self.sine_tolerance.is_nan() || self.sine_tolerance < 1.0 {
            return Err(SelectError(format!("tolerance {} must be >= 1", self.sine_tolerance)));
        }
        if self.sine_depth == 0 || self.max_axioms == 0 {
            return Err(SelectError("depth and max must be positive".into()));
        }
        Ok(())
    }
}

/// `ctx` plus every KB symbol whose cosine to some context symbol is at
/// least `threshold`. Context symbols without a vector are kept but expand
/// nothing.
pub fn expand_context(ctx: &SymbolSet, kb: &KnowledgeBase, store: &EmbeddingStore, threshold: f64) -> SymbolSet {
    let ctx_vecs: Vec<_> = ctx.iter().filter_map(|c| store.lookup_vector(c.as_str())).collect();
    let mut out = ctx.clone();
    if ctx_vecs.is_empty() {
        return out;
    }
    for s in kb.symbols() {
        if ctx.contains(s.as_str()) {
            continue;
        }
        if let Some(v) = store.lookup_vector(s.as_str()) {
            if ctx_vecs.iter().any(|c| cosine_unit(c, &v) >= threshold) {
                out.insert(s.clone());
            }
        }
    }
    out
}

/// Semantic selection with per-axiom scores, ordered by score descending
/// then axiom id. An axiom's score is the highest context similarity among
/// its non-context symbols, or 1 when all its symbols are in the context.
pub fn semantic_select_scored(
    ctx: &SymbolSet,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &SelectionParams,
) -> Result<Vec<(AxiomId, f64)>, SelectError> {
    params.validate()?;
    let expanded = expand_context(ctx, kb, store, params.expand_threshold);
    filter_by_interval(&expanded, kb, store, params)
}

/// The interval filter over an already expanded context. Used by callers
/// that maintain their own expanded context between rounds.
pub fn filter_by_interval(
    expanded: &SymbolSet,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &SelectionParams,
) -> Result<Vec<(AxiomId, f64)>, SelectError> {
    params.validate()?;
    let ctx_vecs: Vec<_> = expanded.iter().filter_map(|c| store.lookup_vector(c.as_str())).collect();
    let candidates: BTreeSet<AxiomId> =
        expanded.iter().flat_map(|s| kb.formulas_containing(s.as_str()).iter().copied()).collect();
    let mut memo: HashMap<Symbol, Option<f64>> = HashMap::new();
    let mut best_sim = |s: &Symbol| -> Option<f64> {
        *memo.entry(s.clone()).or_insert_with(|| {
            let v = store.lookup_vector(s.as_str())?;
            ctx_vecs.iter().map(|c| cosine_unit(c, &v)).reduce(f64::max)
        })
    };
    let mut out = Vec::new();
    'axioms: for id in candidates {
        let mut score: Option<f64> = None;
        for s in kb.axiom(id).symbols() {
            if expanded.contains(s.as_str()) {
                continue;
            }
            match best_sim(s) {
                Some(c) if c >= params.sim_low && c <= params.sim_high => {
                    score = Some(score.map_or(c, |x: f64| x.max(c)));
                }
                None if params.oov_pass => {}
                _ => continue 'axioms,
            }
        }
        out.push((id, score.unwrap_or(1.0)));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out.truncate(params.max_axioms);
    Ok(out)
}

pub fn semantic_select(
    ctx: &SymbolSet,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &SelectionParams,
) -> Result<Vec<AxiomId>, SelectError> {
    Ok(semantic_select_scored(ctx, kb, store, params)?.into_iter().map(|(id, _)| id).collect())
}

/// SInE selection with the level (1-based) at which each axiom was
/// triggered, ordered by level then axiom id.
pub fn syntactic_select_levels(
    ctx: &SymbolSet,
    kb: &KnowledgeBase,
    params: &SelectionParams,
) -> Result<Vec<(AxiomId, usize)>, SelectError> {
    params.validate()?;
    let mut seen_symbols = ctx.clone();
    let mut frontier: Vec<Symbol> = ctx.iter().cloned().collect();
    let mut selected: BTreeSet<AxiomId> = BTreeSet::new();
    let mut out = Vec::new();
    for level in 1..=params.sine_depth {
        let mut triggered: BTreeSet<AxiomId> = BTreeSet::new();
        for s in &frontier {
            let count = kb.occurrence_count(s.as_str()) as f64;
            for &id in kb.formulas_containing(s.as_str()) {
                if selected.contains(&id) || triggered.contains(&id) {
                    continue;
                }
                let rarest = kb.axiom(id).symbols().iter().map(|x| kb.occurrence_count(x.as_str())).min().unwrap_or(0);
                if count <= params.sine_tolerance * rarest as f64 {
                    triggered.insert(id);
                }
            }
        }
        if triggered.is_empty() {
            break;
        }
        frontier.clear();
        for &id in &triggered {
            for s in kb.axiom(id).symbols() {
                if seen_symbols.insert(s.clone()) {
                    frontier.push(s.clone());
                }
            }
            out.push((id, level));
        }
        selected.extend(triggered);
    }
    out.truncate(params.max_axioms);
    Ok(out)
}

pub fn syntactic_select(
    ctx: &SymbolSet,
    kb: &KnowledgeBase,
    params: &SelectionParams,
) -> Result<Vec<AxiomId>, SelectError> {
    Ok(syntactic_select_levels(ctx, kb, params)?.into_iter().map(|(id, _)| id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{ingest_triples, IngestOptions};
    use crate::logic::parse_formula;
    use proptest::prelude::*;

    fn kb_of(text: &str) -> KnowledgeBase {
        ingest_triples(text.as_bytes(), IngestOptions::default()).unwrap().0
    }

    fn set(xs: &[&str]) -> SymbolSet {
        xs.iter().copied().collect()
    }

    fn store(rows: &[(&str, Vec<f64>)]) -> EmbeddingStore {
        EmbeddingStore::from_vectors(rows[0].1.len(), rows.iter().map(|(k, v)| (*k, v.clone()))).unwrap().0
    }

    #[test]
    fn params_validation() {
        assert!(SelectionParams::default().validate().is_ok());
        assert!(SelectionParams { sim_low: 0.5, sim_high: 0.4, ..Default::default() }.validate().is_err());
        assert!(SelectionParams { sine_tolerance: 0.9, ..Default::default() }.validate().is_err());
        assert!(SelectionParams { expand_threshold: 1.5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn expansion_examples() {
        let kb = kb_of("isA,chew,action\nisA,manducate,action\nisA,weather,state\n");
        let s = store(&[
            ("chew", vec![1.0, 0.0, 0.0]),
            ("manducate", vec![0.9, (1.0f64 - 0.81).sqrt(), 0.0]),
            ("weather", vec![0.1, 0.0, 0.99f64.sqrt()]),
        ]);
        assert_eq!(expand_context(&set(&["chew"]), &kb, &s, 0.6), set(&["chew", "manducate"]));
        assert_eq!(expand_context(&set(&["chew"]), &kb, &s, 1.0), set(&["chew"]));
        assert_eq!(expand_context(&SymbolSet::new(), &kb, &s, 0.0), SymbolSet::new());
        // unembedded context symbols pass through
        assert_eq!(expand_context(&set(&["zzz"]), &kb, &s, -1.0), set(&["zzz"]));
    }

    #[test]
    fn interval_keeps_fur_drops_related_to() {
        // hasA and fur are near the context, relatedTo and poodle are not
        let kb = kb_of("hasA,dog,fur\nrelatedTo,poodle,dog\n");
        let s = store(&[
            ("dog", vec![1.0, 0.0, 0.0, 0.0]),
            ("chew", vec![0.8, 0.6, 0.0, 0.0]),
            ("bone", vec![0.8, 0.0, 0.6, 0.0]),
            ("fur", vec![0.5, 0.5, 0.5, 0.5]),
            ("has_a", vec![0.5, 0.0, 0.5, 0.7]),
            ("related_to", vec![0.0, 0.0, 0.0, 1.0]),
            ("poodle", vec![0.1, -0.2, -0.2, 0.95]),
        ]);
        let params = SelectionParams { sim_low: 0.4, sim_high: 1.0, expand_threshold: 0.99, ..Default::default() };
        let got = semantic_select(&set(&["dog", "chew", "bone"]), &kb, &s, &params).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(kb.formula(got[0]), parse_formula("all X (dog(X) => exists Y (hasA(X,Y) & fur(Y)))").unwrap());
    }

    #[test]
    fn empty_kb_selects_nothing() {
        let kb = KnowledgeBase::new();
        let s = store(&[("dog", vec![1.0, 0.0])]);
        assert!(semantic_select(&set(&["dog"]), &kb, &s, &SelectionParams::default()).unwrap().is_empty());
    }

    #[test]
    fn oov_symbols_fail_unless_flagged() {
        let kb = kb_of("hasA,dog,qwxz\n");
        let s = store(&[("dog", vec![1.0, 0.0]), ("has_a", vec![0.8, 0.6])]);
        let params = SelectionParams::default();
        assert!(semantic_select(&set(&["dog"]), &kb, &s, &params).unwrap().is_empty());
        let pass = SelectionParams { oov_pass: true, ..params };
        assert_eq!(semantic_select(&set(&["dog"]), &kb, &s, &pass).unwrap().len(), 1);
    }

    #[test]
    fn cap_orders_by_score_then_id() {
        let kb = kb_of("isA,dog,near\nisA,dog,far\nisA,dog,mid\n");
        let s = store(&[
            ("dog", vec![1.0, 0.0]),
            ("is_a", vec![1.0, 0.0]),
            ("near", vec![0.9, 0.1]),
            ("mid", vec![0.7, 0.7]),
            ("far", vec![0.1, 0.9]),
        ]);
        let params = SelectionParams { sim_low: -1.0, expand_threshold: 1.0, max_axioms: 2, ..Default::default() };
        let got = semantic_select_scored(&set(&["dog"]), &kb, &s, &params).unwrap();
        assert_eq!(got.iter().map(|x| x.0).collect::<Vec<_>>(), vec![AxiomId(0), AxiomId(2)]);
    }

    #[test]
    fn sine_depth_one() {
        let kb = kb_of("hasA,dog,fur\nhasA,cat,whiskers\n");
        let params = SelectionParams { sine_depth: 1, ..Default::default() };
        assert_eq!(syntactic_select(&set(&["dog"]), &kb, &params).unwrap(), vec![AxiomId(0)]);
    }

    #[test]
    fn sine_frequent_symbol_never_triggers() {
        // isA in 90 of 100 axioms, dog in 3
        let mut text = String::new();
        for kind in ["pet", "mammal", "canine"] {
            text.push_str(&format!("isA,dog,{kind}\nisA,other_{kind},{kind}\n"));
        }
        for i in 0..84 {
            text.push_str(&format!("isA,thing{i},kind{i}\n"));
        }
        for i in 0..10 {
            text.push_str(&format!("hasA,other{i},part{i}\n"));
        }
        let kb = kb_of(&text);
        assert_eq!(kb.len(), 100);
        assert_eq!(kb.occurrence_count("isA"), 90);
        assert_eq!(kb.occurrence_count("dog"), 3);
        let params = SelectionParams { sine_tolerance: 2.0, sine_depth: 1, ..Default::default() };
        let got = syntactic_select(&set(&["dog"]), &kb, &params).unwrap();
        assert_eq!(got, vec![AxiomId(0), AxiomId(2), AxiomId(4)]);
        assert!(syntactic_select(&set(&["isA"]), &kb, &params).unwrap().is_empty());
        for a in kb.axioms().filter(|a| a.contains("isA")) {
            let rarest = a.symbols().iter().map(|s| kb.occurrence_count(s.as_str())).min().unwrap();
            assert!(90.0 > params.sine_tolerance * rarest as f64);
        }
    }

    #[test]
    fn sine_two_levels() {
        let kb = kb_of("hasA,dog,fur\nisA,fur,hair\nisA,cat,pet\n");
        // fur occurs twice, hair once: fur triggers the hair axiom only at tolerance >= 2
        let params = SelectionParams { sine_tolerance: 2.0, ..Default::default() };
        let got = syntactic_select_levels(&set(&["dog"]), &kb, &params).unwrap();
        assert_eq!(got, vec![(AxiomId(0), 1), (AxiomId(1), 2)]);
        let strict = SelectionParams { sine_tolerance: 1.5, ..Default::default() };
        assert_eq!(syntactic_select(&set(&["dog"]), &kb, &strict).unwrap(), vec![AxiomId(0)]);
        let shallow = SelectionParams { sine_depth: 1, ..params };
        assert_eq!(syntactic_select(&set(&["dog"]), &kb, &shallow).unwrap(), vec![AxiomId(0)]);
    }

    fn random_kb(rows: &[(u8, u8, u8)]) -> KnowledgeBase {
        let text: String = rows.iter().map(|(r, s, o)| format!("rel{},c{},c{}\n", r % 3, s % 12, o % 12)).collect();
        kb_of(&text)
    }

    fn random_store(dims: &[(f64, f64, f64)]) -> EmbeddingStore {
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        for (i, (a, b, c)) in dims.iter().enumerate() {
            let name = if i < 12 { format!("c{i}") } else { format!("rel{}", i - 12) };
            rows.push((name, vec![*a, *b, *c + 0.01]));
        }
        EmbeddingStore::from_vectors(3, rows).unwrap().0
    }

    proptest! {
        #[test]
        fn interval_widening_is_monotone(
            rows in proptest::collection::vec((0u8..3, 0u8..12, 0u8..12), 1..40),
            dims in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0), 15),
            lo in -1.0f64..1.0, hi in -1.0f64..1.0, widen in 0.0f64..1.0,
            c in 0u8..12,
        ) {
            let kb = random_kb(&rows);
            let s = random_store(&dims);
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let narrow = SelectionParams { sim_low: lo, sim_high: hi, max_axioms: usize::MAX, ..Default::default() };
            let wide = SelectionParams { sim_low: (lo - widen).max(-1.0), sim_high: (hi + widen).min(1.0), ..narrow.clone() };
            let ctx = set(&[&format!("c{c}")]);
            let a = semantic_select(&ctx, &kb, &s, &narrow).unwrap();
            let b = semantic_select(&ctx, &kb, &s, &wide).unwrap();
            prop_assert!(a.iter().all(|x| b.contains(x)));
            let expanded = expand_context(&ctx, &kb, &s, narrow.expand_threshold);
            for id in &a {
                prop_assert!(kb.axiom(*id).symbols().iter().any(|x| expanded.contains(x.as_str())));
            }
            prop_assert_eq!(a, semantic_select(&ctx, &kb, &s, &narrow).unwrap());
        }

        #[test]
        fn full_interval_returns_candidates(
            rows in proptest::collection::vec((0u8..3, 0u8..12, 0u8..12), 1..40),
            dims in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0), 15),
            c in 0u8..12,
        ) {
            let kb = random_kb(&rows);
            let s = random_store(&dims);
            let params = SelectionParams { sim_low: -1.0, sim_high: 1.0, max_axioms: usize::MAX, ..Default::default() };
            let ctx = set(&[&format!("c{c}")]);
            let mut got = semantic_select(&ctx, &kb, &s, &params).unwrap();
            got.sort();
            let expanded = expand_context(&ctx, &kb, &s, params.expand_threshold);
            let want: BTreeSet<AxiomId> =
                expanded.iter().flat_map(|x| kb.formulas_containing(x.as_str()).iter().copied()).collect();
            prop_assert_eq!(got, want.into_iter().collect::<Vec<_>>());
        }

        #[test]
        fn sine_monotone_in_tolerance_and_depth(
            rows in proptest::collection::vec((0u8..3, 0u8..12, 0u8..12), 1..40),
            t1 in 1.0f64..4.0, dt in 0.0f64..3.0, d1 in 1usize..4, dd in 0usize..3,
            c in 0u8..12,
        ) {
            let kb = random_kb(&rows);
            let ctx = set(&[&format!("c{c}")]);
            let base = SelectionParams { sine_tolerance: t1, sine_depth: d1, max_axioms: usize::MAX, ..Default::default() };
            let a = syntactic_select(&ctx, &kb, &base).unwrap();
            let more_tol = syntactic_select(&ctx, &kb, &SelectionParams { sine_tolerance: t1 + dt, ..base.clone() }).unwrap();
            let more_depth = syntactic_select(&ctx, &kb, &SelectionParams { sine_depth: d1 + dd, ..base.clone() }).unwrap();
            prop_assert!(a.iter().all(|x| more_tol.contains(x)));
            prop_assert!(a.iter().all(|x| more_depth.contains(x)));
        }
    }
}
