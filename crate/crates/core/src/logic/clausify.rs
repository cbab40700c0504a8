//! Clausal normal form: negation normal form, Skolemization, distribution.

use std::collections::HashMap;

use super::formula::Formula;
use super::term::{Atom, Clause, Symbol, Term};
use super::LogicError;

/// Generates Skolem names `<prefix><n>` with `n` counting from 1.
#[derive(Clone, Debug)]
pub struct SkolemNamer {
    prefix: String,
    next: usize,
}

impl SkolemNamer {
    /// The default namespace: `sk1`, `sk2`, ...
    pub fn new() -> Self {
        Self::with_prefix("sk")
    }

    /// Namespace for one knowledge-base axiom: `sk<id>_1`, `sk<id>_2`, ...
    pub fn for_axiom(id: usize) -> Self {
        Self::with_prefix(&format!("sk{id}_"))
    }

    fn with_prefix(prefix: &str) -> Self {
        SkolemNamer { prefix: prefix.to_string(), next: 1 }
    }

    fn fresh(&mut self) -> Symbol {
        let s = Symbol::from(format!("{}{}", self.prefix, self.next));
        self.next += 1;
        s
    }
}

impl Default for SkolemNamer {
    fn default() -> Self {
        Self::new()
    }
}

enum Nnf {
    True,
    False,
    Lit(bool, Atom),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
    All(Vec<Symbol>, Box<Nnf>),
    Ex(Vec<Symbol>, Box<Nnf>),
}

enum Qf {
    True,
    False,
    Lit(bool, Atom),
    And(Vec<Qf>),
    Or(Vec<Qf>),
}

fn contains_iff(f: &Formula) -> bool {
    match f {
        Formula::Iff(..) => true,
        Formula::True | Formula::False | Formula::Atom(_) => false,
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => contains_iff(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().any(contains_iff),
        Formula::Implies(a, b) => contains_iff(a) || contains_iff(b),
    }
}

fn nnf(f: &Formula, positive: bool) -> Result<Nnf, LogicError> {
    Ok(match (f, positive) {
        (Formula::True, true) | (Formula::False, false) => Nnf::True,
        (Formula::True, false) | (Formula::False, true) => Nnf::False,
        (Formula::Atom(a), pol) => Nnf::Lit(pol, a.clone()),
        (Formula::Not(g), pol) => nnf(g, !pol)?,
        (Formula::And(gs), true) | (Formula::Or(gs), false) => {
            Nnf::And(gs.iter().map(|g| nnf(g, positive)).collect::<Result<_, _>>()?)
        }
        (Formula::Or(gs), true) | (Formula::And(gs), false) => {
            Nnf::Or(gs.iter().map(|g| nnf(g, positive)).collect::<Result<_, _>>()?)
        }
        (Formula::Implies(a, b), true) => Nnf::Or(vec![nnf(a, false)?, nnf(b, true)?]),
        (Formula::Implies(a, b), false) => Nnf::And(vec![nnf(a, true)?, nnf(b, false)?]),
        (Formula::Iff(a, b), pol) => {
            if contains_iff(a) || contains_iff(b) {
                return Err(LogicError::Fragment("nested equivalences are not supported".into()));
            }
            let forward = Formula::Implies(a.clone(), b.clone());
            let backward = Formula::Implies(b.clone(), a.clone());
            nnf(&Formula::And(vec![forward, backward]), pol)?
        }
        (Formula::Forall(vs, g), true) | (Formula::Exists(vs, g), false) => {
            Nnf::All(vs.clone(), Box::new(nnf(g, positive)?))
        }
        (Formula::Exists(vs, g), true) | (Formula::Forall(vs, g), false) => {
            Nnf::Ex(vs.clone(), Box::new(nnf(g, positive)?))
        }
    })
}

struct Skolemizer<'a> {
    namer: &'a mut SkolemNamer,
    used_vars: Vec<Symbol>,
}

impl Skolemizer<'_> {
    fn universal_name(&mut self, v: &Symbol) -> Symbol {
        let mut name = v.clone();
        let mut n = 1;
        while self.used_vars.contains(&name) {
            name = Symbol::from(format!("{v}{n}"));
            n += 1;
        }
        self.used_vars.push(name.clone());
        name
    }

    fn run(&mut self, f: Nnf, scope: &mut Vec<Symbol>, env: &mut HashMap<Symbol, Term>) -> Qf {
        match f {
            Nnf::True => Qf::True,
            Nnf::False => Qf::False,
            Nnf::Lit(pol, a) => {
                let args = a.args.iter().map(|t| substitute(t, env)).collect();
                Qf::Lit(pol, Atom { predicate: a.predicate, args })
            }
            Nnf::And(gs) => Qf::And(gs.into_iter().map(|g| self.run(g, scope, env)).collect()),
            Nnf::Or(gs) => Qf::Or(gs.into_iter().map(|g| self.run(g, scope, env)).collect()),
            Nnf::All(vs, g) => {
                let saved: Vec<_> = vs.iter().map(|v| (v.clone(), env.get(v).cloned())).collect();
                let depth = scope.len();
                for v in &vs {
                    let name = self.universal_name(v);
                    scope.push(name.clone());
                    env.insert(v.clone(), Term::Var(name));
                }
                let out = self.run(*g, scope, env);
                scope.truncate(depth);
                restore(env, saved);
                out
            }
            Nnf::Ex(vs, g) => {
                let saved: Vec<_> = vs.iter().map(|v| (v.clone(), env.get(v).cloned())).collect();
                for v in &vs {
                    let sk = self.namer.fresh();
                    let args = scope.iter().map(|u| Term::Var(u.clone())).collect();
                    env.insert(v.clone(), Term::App(sk, args));
                }
                let out = self.run(*g, scope, env);
                restore(env, saved);
                out
            }
        }
    }
}

fn restore(env: &mut HashMap<Symbol, Term>, saved: Vec<(Symbol, Option<Term>)>) {
    for (v, old) in saved.into_iter().rev() {
        match old {
            Some(t) => env.insert(v, t),
            None => env.remove(&v),
        };
    }
}

fn substitute(t: &Term, env: &HashMap<Symbol, Term>) -> Term {
    match t {
        Term::Var(v) => env.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| substitute(a, env)).collect()),
    }
}

type Lits = Vec<(bool, Atom)>;

fn cnf(f: Qf) -> Vec<Lits> {
    match f {
        Qf::True => vec![],
        Qf::False => vec![vec![]],
        Qf::Lit(pol, a) => vec![vec![(pol, a)]],
        Qf::And(gs) => gs.into_iter().flat_map(cnf).collect(),
        Qf::Or(gs) => {
            let mut acc: Vec<Lits> = vec![vec![]];
            for g in gs {
                let part = cnf(g);
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for left in &acc {
                    for right in &part {
                        let mut c = left.clone();
                        c.extend(right.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Clausify with the default `sk1, sk2, ...` Skolem namespace.
pub fn clausify(f: &Formula) -> Result<Vec<Clause>, LogicError> {
    clausify_with(f, &mut SkolemNamer::new())
}

/// Clausify drawing Skolem names from `namer`. Skolem symbols are allocated
/// in left-to-right order of the existential binders.
pub fn clausify_with(f: &Formula, namer: &mut SkolemNamer) -> Result<Vec<Clause>, LogicError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(LogicError::FreeVariable(free.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")));
    }
    let n = nnf(f, true)?;
    let mut sk = Skolemizer { namer, used_vars: Vec::new() };
    let qf = sk.run(n, &mut Vec::new(), &mut HashMap::new());
    let mut out: Vec<Clause> = Vec::new();
    for lits in cnf(qf) {
        let mut head: Vec<Atom> = Vec::new();
        let mut body: Vec<Atom> = Vec::new();
        for (pol, a) in lits {
            let side = if pol { &mut head } else { &mut body };
            if !side.contains(&a) {
                side.push(a);
            }
        }
        if head.iter().any(|a| body.contains(a)) {
            continue;
        }
        let c = Clause::new(head, body);
        if !out.iter().any(|o| o.same_shape(&c)) {
            out.push(c);
        }
    }
    for (i, c) in out.iter_mut().enumerate() {
        c.id = i + 1;
    }
    Ok(out)
}

/// A clause whose head mentions variables missing from its body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeViolation {
    /// Position in the checked list.
    pub index: usize,
    pub clause_id: usize,
    pub unbound: Vec<Symbol>,
}

impl std::fmt::Display for RangeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vars: Vec<_> = self.unbound.iter().map(|v| v.as_str()).collect();
        write!(f, "clause {} (#{}): unbound head variable(s) {}", self.clause_id, self.index, vars.join(", "))
    }
}

pub fn check_range_restricted(cs: &[Clause]) -> Vec<RangeViolation> {
    cs.iter()
        .enumerate()
        .filter_map(|(index, c)| {
            let unbound = c.unbound_head_vars();
            (!unbound.is_empty()).then_some(RangeViolation { index, clause_id: c.id, unbound })
        })
        .collect()
}
