//! The refocusing loop. Each round selects axioms for the current context,
//! saturates them together with the focus formula, extracts the new unary
//! predicate symbols of the model, clusters them, and picks one cluster as
//! the next focus.

pub mod kmeans;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{cosine_unit, EmbeddingStore};
use crate::engine::{saturate, Exhaustion, Limits, Status};
use crate::kb::{AxiomId, KnowledgeBase};
use crate::logic::{
    check_range_restricted, clausify, symbols_of, Atom, Formula, LogicError, RangeViolation, Symbol, SymbolSet, Term,
};
use crate::select::{expand_context, filter_by_interval, SelectionParams};

pub use kmeans::{kmeans, Cluster, KmeansError};
pub use trace::{read_trace, replay_focus, write_trace, TraceError, TRACE_SCHEMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WanderError {
    #[error("invalid wander parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Formula(#[from] LogicError),
    #[error("formula does not clausify to range-restricted clauses: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotRangeRestricted(Vec<RangeViolation>),
    #[error("focus set is empty")]
    EmptyFocus,
    #[error(transparent)]
    Kmeans(#[from] KmeansError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterPick {
    Middle,
    Nearest,
    Farthest,
    Index(usize),
}

impl std::str::FromStr for ClusterPick {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "middle" => Ok(ClusterPick::Middle),
            "nearest" => Ok(ClusterPick::Nearest),
            "farthest" => Ok(ClusterPick::Farthest),
            other => other
                .strip_prefix("index:")
                .unwrap_or(other)
                .parse()
                .map(ClusterPick::Index)
                .map_err(|_| format!("unknown pick `{s}` (middle, nearest, farthest or an index)")),
        }
    }
}

/// Cluster-to-context similarity aggregate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterScoring {
    /// Mean cosine over all (member, context symbol) pairs.
    #[default]
    MeanPairwise,
    /// Cosine between the member centroid and the context centroid.
    Centroid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WanderParams {
    pub selection: SelectionParams,
    pub limits: Limits,
    pub max_rounds: usize,
    pub cluster_divisor: usize,
    pub cluster_pick: ClusterPick,
    pub scoring: ClusterScoring,
    pub seed: u64,
    /// Also subtract every earlier context from the extracted symbols.
    pub accumulate_visited: bool,
}

impl Default for WanderParams {
    fn default() -> Self {
        WanderParams {
            selection: SelectionParams::default(),
            limits: Limits::default(),
            max_rounds: 10,
            cluster_divisor: 4,
            cluster_pick: ClusterPick::Middle,
            scoring: ClusterScoring::MeanPairwise,
            seed: 42,
            accumulate_visited: false,
        }
    }
}

impl WanderParams {
    pub fn validate(&self) -> Result<(), WanderError> {
        if self.max_rounds == 0 {
            return Err(WanderError::InvalidParams("max_rounds must be at least 1".into()));
        }
        if self.cluster_divisor == 0 {
            return Err(WanderError::InvalidParams("cluster_divisor must be at least 1".into()));
        }
        self.selection.validate().map_err(|e| WanderError::InvalidParams(e.to_string()))?;
        self.limits.validate().map_err(|e| WanderError::InvalidParams(e.to_string()))
    }

    fn round_seed(&self, round: usize) -> u64 {
        self.seed.wrapping_add((round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

pub fn choose_k(n: usize, divisor: usize) -> usize {
    if n == 0 {
        0
    } else {
        (n / divisor.max(1)).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCluster {
    pub members: SymbolSet,
    pub similarity: f64,
}

fn normalized_mean<'a>(vs: impl Iterator<Item = &'a [f32]>) -> Option<Vec<f32>> {
    let mut acc: Vec<f64> = Vec::new();
    for v in vs {
        if acc.is_empty() {
            acc = vec![0.0; v.len()];
        }
        acc.iter_mut().zip(v).for_each(|(a, x)| *a += f64::from(*x));
    }
    let n = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0).then(|| acc.iter().map(|x| (x / n) as f32).collect())
}

/// Similarity of `members` to `ctx`; symbols without vectors contribute
/// nothing, and no evidence at all scores 0.
pub fn cluster_similarity(
    members: &SymbolSet,
    ctx: &SymbolSet,
    store: &EmbeddingStore,
    scoring: ClusterScoring,
) -> f64 {
    let mv: Vec<_> = members.iter().filter_map(|s| store.lookup_vector(s.as_str())).collect();
    let cv: Vec<_> = ctx.iter().filter_map(|s| store.lookup_vector(s.as_str())).collect();
    if mv.is_empty() || cv.is_empty() {
        return 0.0;
    }
    match scoring {
        ClusterScoring::MeanPairwise => {
            let total: f64 = mv.iter().flat_map(|m| cv.iter().map(move |c| cosine_unit(m, c))).sum();
            total / (mv.len() * cv.len()) as f64
        }
        ClusterScoring::Centroid => {
            match (normalized_mean(mv.iter().map(|v| v.as_ref())), normalized_mean(cv.iter().map(|v| v.as_ref()))) {
                (Some(a), Some(b)) => cosine_unit(&a, &b),
                _ => 0.0,
            }
        }
    }
}

/// Descending similarity, ties by smallest member symbol.
pub fn sort_ranked(clusters: &mut [ScoredCluster]) {
    clusters.sort_by(|a, b| {
        b.similarity.total_cmp(&a.similarity).then_with(|| a.members.iter().next().cmp(&b.members.iter().next()))
    });
}

pub fn rank_clusters(
    clusters: &[SymbolSet],
    ctx: &SymbolSet,
    store: &EmbeddingStore,
    scoring: ClusterScoring,
) -> Vec<ScoredCluster> {
    let mut out: Vec<ScoredCluster> = clusters
        .iter()
        .map(|m| ScoredCluster { members: m.clone(), similarity: cluster_similarity(m, ctx, store, scoring) })
        .collect();
    sort_ranked(&mut out);
    out
}

/// Index into a ranked list of length `m`; `None` when `m` is 0.
pub fn pick_focus(m: usize, pick: ClusterPick) -> Option<usize> {
    if m == 0 {
        return None;
    }
    Some(match pick {
        ClusterPick::Middle => m / 2,
        ClusterPick::Nearest => 0,
        ClusterPick::Farthest => m - 1,
        ClusterPick::Index(i) => i.min(m - 1),
    })
}

/// `exists X (s1(X) & s2(X) & ...)` over the focus in sorted order.
pub fn focus_formula(focus: &SymbolSet) -> Result<Formula, WanderError> {
    let mut atoms: Vec<Formula> =
        focus.iter().map(|s| Formula::Atom(Atom { predicate: s.clone(), args: vec![Term::var("X")] })).collect();
    let body = match atoms.len() {
        0 => return Err(WanderError::EmptyFocus),
        1 => atoms.pop().expect("one atom"),
        _ => Formula::And(atoms),
    };
    Ok(Formula::exists(&["X"], body))
}

/// Clusters `symbols` (all with vectors) into `choose_k` groups, scores each
/// against `ctx`, and returns the clusters in k-means order with the index
/// of the picked one in ranked order.
pub fn cluster_symbols(
    symbols: &SymbolSet,
    ctx: &SymbolSet,
    store: &EmbeddingStore,
    params: &WanderParams,
    seed: u64,
) -> Result<(Vec<ScoredCluster>, Option<SymbolSet>), WanderError> {
    let points: Vec<(Symbol, Vec<f64>)> = symbols
        .iter()
        .filter_map(|s| store.lookup_vector(s.as_str()).map(|v| (s.clone(), v.iter().map(|x| f64::from(*x)).collect())))
        .collect();
    let k = choose_k(points.len(), params.cluster_divisor);
    if k == 0 {
        return Ok((Vec::new(), None));
    }
    let clusters: Vec<SymbolSet> =
        kmeans(&points, k, seed)?.into_iter().map(|c| c.members.into_iter().collect()).collect();
    let scored: Vec<ScoredCluster> = clusters
        .iter()
        .map(|m| ScoredCluster { members: m.clone(), similarity: cluster_similarity(m, ctx, store, params.scoring) })
        .collect();
    let mut ranked = scored.clone();
    sort_ranked(&mut ranked);
    let focus = pick_focus(ranked.len(), params.cluster_pick).map(|i| ranked[i].members.clone());
    Ok((scored, focus))
}

/// One trace record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub schema: String,
    pub round: usize,
    pub formula: String,
    pub context: SymbolSet,
    pub selected: Vec<AxiomId>,
    pub status: Option<Status>,
    pub exhausted_by: Option<Exhaustion>,
    pub model_size: usize,
    pub extensions: u64,
    /// New unary symbols with vectors; these are clustered.
    pub extracted: SymbolSet,
    /// New unary symbols without vectors; excluded from clustering.
    pub unembedded: SymbolSet,
    pub k: usize,
    /// Clusters in k-means order with their context similarity.
    pub clusters: Vec<ScoredCluster>,
    pub pick: ClusterPick,
    pub focus: Option<SymbolSet>,
    pub terminated: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WanderState {
    pub round: usize,
    pub formula: Formula,
    pub context: SymbolSet,
    pub visited: SymbolSet,
    pub chain: Vec<SymbolSet>,
    pub trace: Vec<Round>,
    pub terminated: bool,
}

impl WanderState {
    /// Round-0 state for `f`: context is the symbols of `f` and their
    /// expansion.
    pub fn new(
        f: &Formula,
        kb: &KnowledgeBase,
        store: &EmbeddingStore,
        params: &WanderParams,
    ) -> Result<Self, WanderError> {
        params.validate()?;
        let clauses = clausify(f)?;
        let violations = check_range_restricted(&clauses);
        if !violations.is_empty() {
            return Err(WanderError::NotRangeRestricted(violations));
        }
        let head = symbols_of(f);
        let context = head.union(&expand_context(&head, kb, store, params.selection.expand_threshold));
        Ok(WanderState {
            round: 0,
            formula: f.clone(),
            visited: context.clone(),
            context,
            chain: vec![head],
            trace: Vec::new(),
            terminated: false,
        })
    }

    pub fn is_done(&self, params: &WanderParams) -> bool {
        self.terminated || self.round >= params.max_rounds
    }
}

fn unary_predicates(model: &[Atom]) -> SymbolSet {
    model.iter().filter(|a| a.args.len() == 1).map(|a| a.predicate.clone()).collect()
}

pub fn wander_step(
    mut state: WanderState,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &WanderParams,
) -> WanderState {
    if state.is_done(params) {
        return state;
    }
    state.round += 1;
    let mut rec = Round {
        schema: TRACE_SCHEMA.to_string(),
        round: state.round,
        formula: state.formula.to_string(),
        context: state.context.clone(),
        selected: Vec::new(),
        status: None,
        exhausted_by: None,
        model_size: 0,
        extensions: 0,
        extracted: SymbolSet::new(),
        unembedded: SymbolSet::new(),
        k: 0,
        clusters: Vec::new(),
        pick: params.cluster_pick,
        focus: None,
        terminated: false,
        error: None,
    };
    match run_round(&state, &mut rec, kb, store, params) {
        Ok(Some(focus)) => {
            let next = focus.union(&expand_context(&focus, kb, store, params.selection.expand_threshold));
            state.visited = state.visited.union(&next);
            state.context = next;
            state.formula = focus_formula(&focus).expect("clusters are non-empty");
            state.chain.push(focus);
        }
        Ok(None) => {
            rec.terminated = true;
            state.terminated = true;
        }
        Err(e) => {
            rec.error = Some(e);
            rec.terminated = true;
            state.terminated = true;
        }
    }
    state.trace.push(rec);
    state
}

fn run_round(
    state: &WanderState,
    rec: &mut Round,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &WanderParams,
) -> Result<Option<SymbolSet>, String> {
    let selected = filter_by_interval(&state.context, kb, store, &params.selection).map_err(|e| e.to_string())?;
    rec.selected = selected.iter().map(|(id, _)| *id).collect();
    let mut problem = clausify(&state.formula).map_err(|e| e.to_string())?;
    for &id in &rec.selected {
        problem.extend(kb.clauses(id).iter().cloned());
    }
    let result = saturate(&problem, &params.limits).map_err(|e| e.to_string())?;
    rec.status = Some(result.status);
    rec.exhausted_by = result.exhausted_by;
    rec.model_size = result.model.len();
    rec.extensions = result.stats.extensions;
    let mut new = unary_predicates(&result.model).difference(&state.context);
    if params.accumulate_visited {
        new = new.difference(&state.visited);
    }
    for s in new.iter() {
        if store.has_vector(s.as_str()) {
            rec.extracted.insert(s.clone());
        } else {
            rec.unembedded.insert(s.clone());
        }
    }
    rec.k = choose_k(rec.extracted.len(), params.cluster_divisor);
    let (clusters, focus) =
        cluster_symbols(&rec.extracted, &state.context, store, params, params.round_seed(state.round))
            .map_err(|e| e.to_string())?;
    rec.clusters = clusters;
    rec.focus = focus.clone();
    Ok(focus)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WanderOutcome {
    /// Focus sets, starting with the symbols of the initial formula.
    pub chain: Vec<SymbolSet>,
    pub rounds: Vec<Round>,
}

pub fn wander(
    f: &Formula,
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    params: &WanderParams,
) -> Result<WanderOutcome, WanderError> {
    let mut state = WanderState::new(f, kb, store, params)?;
    while !state.is_done(params) {
        state = wander_step(state, kb, store, params);
    }
    Ok(WanderOutcome { chain: state.chain, rounds: state.trace })
}

/// `{dog, chew, bone} -> {animal, animals}` style rendering.
pub fn render_chain(chain: &[SymbolSet]) -> String {
    chain.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" -> ")
}
