//! Depth-first hypertableau construction over hash-consed ground terms.
//!
//! The open branch is kept as a trail of atoms. Candidate extensions
//! (clause, ground head) are appended to a FIFO log as atoms arrive; every
//! split stores the trail length and log position so that backtracking to the
//! next disjunct is a truncation.

use std::collections::HashMap;
use std::collections::HashSet;
use std::time::Instant;

use crate::logic::{Atom, Clause, Symbol, Term};

use super::{ClosedBranch, Exhaustion, Limits, SaturationResult, SaturationStats, Status};

type TermId = u32;

#[derive(Default)]
struct Interner {
    names: Vec<Symbol>,
    ids: HashMap<Symbol, u32>,
}

impl Interner {
    fn intern(&mut self, s: &Symbol) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.clone());
        self.ids.insert(s.clone(), id);
        id
    }
}

#[derive(Default)]
struct TermBank {
    nodes: Vec<(u32, Box<[TermId]>)>,
    depth: Vec<u32>,
    ids: HashMap<(u32, Box<[TermId]>), TermId>,
}

impl TermBank {
    fn intern(&mut self, f: u32, args: Box<[TermId]>) -> TermId {
        if let Some(&id) = self.ids.get(&(f, args.clone())) {
            return id;
        }
        let id = self.nodes.len() as TermId;
        let d = 1 + args.iter().map(|&a| self.depth[a as usize]).max().unwrap_or(0);
        self.nodes.push((f, args.clone()));
        self.depth.push(d);
        self.ids.insert((f, args), id);
        id
    }
}

enum Pat {
    Var(usize),
    Ground(TermId),
    App(u32, Vec<Pat>),
}

struct Lit {
    pred: u32,
    args: Vec<Pat>,
}

struct Compiled {
    id: usize,
    head: Vec<Lit>,
    body: Vec<Lit>,
    nvars: usize,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct GAtom {
    pred: u32,
    args: Box<[TermId]>,
}

struct Candidate {
    clause: usize,
    head: Vec<GAtom>,
    depth: u32,
}

struct ChoicePoint {
    atoms_len: usize,
    queue_len: usize,
    cursor: usize,
    depth_cut: bool,
    path_len: usize,
    remaining: Vec<GAtom>,
}

pub(super) struct Prover<'a> {
    limits: &'a Limits,
    preds: Interner,
    funcs: Interner,
    bank: TermBank,
    clauses: Vec<Compiled>,
    /// pred -> (clause index, body literal index)
    body_occurrences: Vec<Vec<(usize, usize)>>,
    atoms: Vec<GAtom>,
    on_branch: HashSet<GAtom>,
    by_pred: Vec<Vec<usize>>,
    queue: Vec<Candidate>,
    cursor: usize,
    choices: Vec<ChoicePoint>,
    path: Vec<GAtom>,
    depth_cut: bool,
    stats: SaturationStats,
    closed: Vec<ClosedBranch>,
}

impl<'a> Prover<'a> {
    pub(super) fn new(cs: &[Clause], limits: &'a Limits) -> Self {
        let mut p = Prover {
            limits,
            preds: Interner::default(),
            funcs: Interner::default(),
            bank: TermBank::default(),
            clauses: Vec::with_capacity(cs.len()),
            body_occurrences: Vec::new(),
            atoms: Vec::new(),
            on_branch: HashSet::new(),
            by_pred: Vec::new(),
            queue: Vec::new(),
            cursor: 0,
            choices: Vec::new(),
            path: Vec::new(),
            depth_cut: false,
            stats: SaturationStats::default(),
            closed: Vec::new(),
        };
        for c in cs {
            let compiled = p.compile(c);
            p.clauses.push(compiled);
        }
        p.body_occurrences = vec![Vec::new(); p.preds.names.len()];
        p.by_pred = vec![Vec::new(); p.preds.names.len()];
        for (ci, c) in p.clauses.iter().enumerate() {
            for (j, lit) in c.body.iter().enumerate() {
                p.body_occurrences[lit.pred as usize].push((ci, j));
            }
        }
        p
    }

    fn compile(&mut self, c: &Clause) -> Compiled {
        let mut vars: Vec<Symbol> = Vec::new();
        let body: Vec<Lit> = c.body.iter().map(|a| self.compile_lit(a, &mut vars)).collect();
        let head: Vec<Lit> = c.head.iter().map(|a| self.compile_lit(a, &mut vars)).collect();
        Compiled { id: c.id, head, body, nvars: vars.len() }
    }

    fn compile_lit(&mut self, a: &Atom, vars: &mut Vec<Symbol>) -> Lit {
        let pred = self.preds.intern(&a.predicate);
        let args = a.args.iter().map(|t| self.compile_term(t, vars)).collect();
        Lit { pred, args }
    }

    fn compile_term(&mut self, t: &Term, vars: &mut Vec<Symbol>) -> Pat {
        match t {
            Term::Var(v) => match vars.iter().position(|x| x == v) {
                Some(i) => Pat::Var(i),
                None => {
                    vars.push(v.clone());
                    Pat::Var(vars.len() - 1)
                }
            },
            Term::App(f, args) => {
                let fid = self.funcs.intern(f);
                let ps: Vec<Pat> = args.iter().map(|a| self.compile_term(a, vars)).collect();
                if ps.iter().all(|p| matches!(p, Pat::Ground(_))) {
                    let ids = ps.iter().map(|p| if let Pat::Ground(g) = p { *g } else { unreachable!() }).collect();
                    Pat::Ground(self.bank.intern(fid, ids))
                } else {
                    Pat::App(fid, ps)
                }
            }
        }
    }

    fn match_pat(bank: &TermBank, p: &Pat, t: TermId, binds: &mut [Option<TermId>], trail: &mut Vec<usize>) -> bool {
        match p {
            Pat::Var(i) => match binds[*i] {
                Some(b) => b == t,
                None => {
                    binds[*i] = Some(t);
                    trail.push(*i);
                    true
                }
            },
            Pat::Ground(g) => *g == t,
            Pat::App(f, ps) => {
                let (tf, targs) = &bank.nodes[t as usize];
                tf == f
                    && targs.len() == ps.len()
                    && ps.iter().zip(targs.iter()).all(|(p, &a)| Self::match_pat(bank, p, a, binds, trail))
            }
        }
    }

    fn match_lit(&self, lit: &Lit, atom: &GAtom, binds: &mut [Option<TermId>], trail: &mut Vec<usize>) -> bool {
        lit.pred == atom.pred
            && lit.args.len() == atom.args.len()
            && lit.args.iter().zip(atom.args.iter()).all(|(p, &t)| Self::match_pat(&self.bank, p, t, binds, trail))
    }

    fn instantiate(&mut self, p: &Pat, binds: &[Option<TermId>]) -> TermId {
        match p {
            Pat::Var(i) => binds[*i].expect("range-restricted head variable is bound by the body"),
            Pat::Ground(g) => *g,
            Pat::App(f, ps) => {
                let args = ps.iter().map(|q| self.instantiate(q, binds)).collect();
                self.bank.intern(*f, args)
            }
        }
    }

    fn make_candidate(&mut self, ci: usize, binds: &[Option<TermId>]) -> Candidate {
        // Temporarily take the head to satisfy the borrow checker.
        let head_lits = std::mem::take(&mut self.clauses[ci].head);
        let mut head: Vec<GAtom> = Vec::with_capacity(head_lits.len());
        let mut depth = 0;
        for lit in &head_lits {
            let args: Box<[TermId]> = lit.args.iter().map(|p| self.instantiate(p, binds)).collect();
            depth = depth.max(args.iter().map(|&a| self.bank.depth[a as usize]).max().unwrap_or(0));
            let g = GAtom { pred: lit.pred, args };
            if !head.contains(&g) {
                head.push(g);
            }
        }
        self.clauses[ci].head = head_lits;
        Candidate { clause: ci, head, depth }
    }

    /// Joins the remaining body literals of clause `ci` around literal `j`,
    /// which is bound to the atom at `pos`. Literals before `j` only match
    /// older atoms, literals after `j` may also match `pos`, so each body
    /// instance is produced exactly once over the run.
    fn join(
        &self,
        ci: usize,
        j: usize,
        pos: usize,
        k: usize,
        binds: &mut Vec<Option<TermId>>,
        out: &mut Vec<Vec<Option<TermId>>>,
    ) {
        let body = &self.clauses[ci].body;
        if k == body.len() {
            out.push(binds.clone());
            return;
        }
        if k == j {
            return self.join(ci, j, pos, k + 1, binds, out);
        }
        let lit = &body[k];
        let limit = if k < j { pos } else { pos + 1 };
        for &q in &self.by_pred[lit.pred as usize] {
            if q >= limit {
                break;
            }
            let mut trail = Vec::new();
            if self.match_lit(lit, &self.atoms[q], binds, &mut trail) {
                self.join(ci, j, pos, k + 1, binds, out);
            }
            for v in trail {
                binds[v] = None;
            }
        }
    }

    fn add_atom(&mut self, atom: GAtom) {
        let pos = self.atoms.len();
        self.on_branch.insert(atom.clone());
        self.by_pred[atom.pred as usize].push(pos);
        self.atoms.push(atom);
        let occurrences = self.body_occurrences[self.atoms[pos].pred as usize].clone();
        let mut found = Vec::new();
        for (ci, j) in occurrences {
            let mut binds = vec![None; self.clauses[ci].nvars];
            let mut trail = Vec::new();
            if !self.match_lit(&self.clauses[ci].body[j], &self.atoms[pos], &mut binds, &mut trail) {
                continue;
            }
            let mut matches = Vec::new();
            self.join(ci, j, pos, 0, &mut binds, &mut matches);
            found.extend(matches.into_iter().map(|b| (ci, b)));
        }
        for (ci, b) in found {
            let cand = self.make_candidate(ci, &b);
            self.queue.push(cand);
        }
    }

    fn truncate_to(&mut self, atoms_len: usize) {
        while self.atoms.len() > atoms_len {
            let a = self.atoms.pop().unwrap();
            self.by_pred[a.pred as usize].pop();
            self.on_branch.remove(&a);
        }
    }

    /// Moves to the next untried disjunct; false when every branch is closed.
    fn backtrack(&mut self) -> bool {
        while let Some(cp) = self.choices.last_mut() {
            if cp.remaining.is_empty() {
                self.choices.pop();
                continue;
            }
            let next = cp.remaining.remove(0);
            let (atoms_len, queue_len, cursor, depth_cut, path_len) =
                (cp.atoms_len, cp.queue_len, cp.cursor, cp.depth_cut, cp.path_len);
            if cp.remaining.is_empty() {
                self.choices.pop();
            }
            self.truncate_to(atoms_len);
            self.queue.truncate(queue_len);
            self.cursor = cursor;
            self.depth_cut = depth_cut;
            self.path.truncate(path_len);
            self.path.push(next.clone());
            self.add_atom(next);
            return true;
        }
        false
    }

    fn to_atom(&self, g: &GAtom) -> Atom {
        Atom {
            predicate: self.preds.names[g.pred as usize].clone(),
            args: g.args.iter().map(|&t| self.to_term(t)).collect(),
        }
    }

    fn to_term(&self, t: TermId) -> Term {
        let (f, args) = &self.bank.nodes[t as usize];
        Term::App(self.funcs.names[*f as usize].clone(), args.iter().map(|&a| self.to_term(a)).collect())
    }

    fn finish(self, status: Status, exhausted_by: Option<Exhaustion>, started: Instant) -> SaturationResult {
        let model =
            if status == Status::Refuted { Vec::new() } else { self.atoms.iter().map(|a| self.to_atom(a)).collect() };
        let mut stats = self.stats;
        stats.elapsed = started.elapsed();
        SaturationResult { status, exhausted_by, model, stats, closed_branches: self.closed }
    }

    pub(super) fn run(mut self) -> SaturationResult {
        let started = Instant::now();
        self.stats.branches_opened = 1;
        for ci in 0..self.clauses.len() {
            if self.clauses[ci].body.is_empty() {
                let cand = self.make_candidate(ci, &[]);
                self.queue.push(cand);
            }
        }
        let mut iterations: u64 = 0;
        loop {
            iterations += 1;
            if let Some(max) = self.limits.max_steps {
                if self.stats.extensions >= max {
                    return self.finish(Status::ResourcesExhausted, Some(Exhaustion::Steps), started);
                }
            }
            if iterations.is_multiple_of(256) {
                if let Some(t) = self.limits.timeout {
                    if started.elapsed() >= t {
                        return self.finish(Status::ResourcesExhausted, Some(Exhaustion::Timeout), started);
                    }
                }
            }
            if self.cursor == self.queue.len() {
                // The open branch is finished; it is the leftmost open branch
                // and no pending sibling can hold more atoms than it does.
                return if self.depth_cut {
                    self.finish(Status::ResourcesExhausted, Some(Exhaustion::TermDepth), started)
                } else {
                    self.finish(Status::Saturated, None, started)
                };
            }
            let cand = &self.queue[self.cursor];
            self.cursor += 1;
            if cand.head.iter().any(|h| self.on_branch.contains(h)) {
                continue;
            }
            if cand.head.is_empty() {
                self.stats.extensions += 1;
                self.stats.branches_closed += 1;
                let closed_by = self.clauses[cand.clause].id;
                let choices = self.path.iter().map(|g| self.to_atom(g)).collect();
                self.closed.push(ClosedBranch { choices, closed_by });
                if !self.backtrack() {
                    return self.finish(Status::Refuted, None, started);
                }
                continue;
            }
            if cand.depth as usize > self.limits.max_term_depth {
                self.depth_cut = true;
                continue;
            }
            if self.atoms.len() >= self.limits.max_branch_atoms {
                return self.finish(Status::ResourcesExhausted, Some(Exhaustion::BranchAtoms), started);
            }
            self.stats.extensions += 1;
            let mut head = cand.head.clone();
            let first = head.remove(0);
            if !head.is_empty() {
                self.stats.splits += 1;
                self.stats.branches_opened += head.len() as u64;
                self.choices.push(ChoicePoint {
                    atoms_len: self.atoms.len(),
                    queue_len: self.queue.len(),
                    cursor: self.cursor,
                    depth_cut: self.depth_cut,
                    path_len: self.path.len(),
                    remaining: head,
                });
                self.path.push(first.clone());
            }
            self.add_atom(first);
        }
    }
}
