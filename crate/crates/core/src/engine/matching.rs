//! Reference-level body matching and single-step hyper extension over plain
//! [`Atom`] values. The saturation loop uses a compiled equivalent.

use crate::logic::{Atom, Clause, Substitution, Term};

fn match_term(pattern: &Term, ground: &Term, subst: &mut Substitution) -> bool {
    match (pattern, ground) {
        (Term::Var(v), _) => match subst.get(v) {
            Some(bound) => bound == ground,
            None => {
                subst.insert(v.clone(), ground.clone());
                true
            }
        },
        (Term::App(f, ps), Term::App(g, gs)) => {
            f == g && ps.len() == gs.len() && ps.iter().zip(gs).all(|(p, t)| match_term(p, t, subst))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

fn match_atom(pattern: &Atom, ground: &Atom, subst: &Substitution) -> Option<Substitution> {
    if pattern.predicate != ground.predicate || pattern.args.len() != ground.args.len() {
        return None;
    }
    let mut s = subst.clone();
    pattern.args.iter().zip(&ground.args).all(|(p, t)| match_term(p, t, &mut s)).then_some(s)
}

/// Every substitution that maps all of `body` into `atoms`.
///
/// Enumeration is depth-first over body literals left to right, trying
/// candidate atoms in their order in `atoms`.
pub fn match_body(body: &[Atom], atoms: &[Atom]) -> Vec<Substitution> {
    let mut out = Vec::new();
    extend_matches(body, atoms, Substitution::new(), &mut out);
    out
}

fn extend_matches(body: &[Atom], atoms: &[Atom], subst: Substitution, out: &mut Vec<Substitution>) {
    let Some((first, rest)) = body.split_first() else {
        out.push(subst);
        return;
    };
    for a in atoms {
        if let Some(s) = match_atom(first, a, &subst) {
            extend_matches(rest, atoms, s, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub atoms: Vec<Atom>,
    pub closed: bool,
}

impl Branch {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Branch { atoms, closed: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extension {
    /// One child per head disjunct, each extending the parent by one atom.
    Children(Vec<Branch>),
    Closed,
    NotApplicable,
}

/// One hyper-extension step of `branch` with `clause`, using the first body
/// match whose head instance is not already satisfied on the branch.
pub fn hyper_extend(branch: &Branch, clause: &Clause) -> Extension {
    if branch.closed {
        return Extension::NotApplicable;
    }
    for subst in match_body(&clause.body, &branch.atoms) {
        let mut head: Vec<Atom> = Vec::new();
        for h in clause.head.iter().map(|h| h.apply(&subst)) {
            if !head.contains(&h) {
                head.push(h);
            }
        }
        if head.is_empty() {
            return Extension::Closed;
        }
        if head.iter().any(|h| branch.atoms.contains(h)) {
            continue;
        }
        let children = head
            .into_iter()
            .map(|h| {
                let mut atoms = branch.atoms.clone();
                atoms.push(h);
                Branch::new(atoms)
            })
            .collect();
        return Extension::Children(children);
    }
    Extension::NotApplicable
}

/// A clause instance whose body holds in the model but whose head does not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelViolation {
    pub clause_id: usize,
    pub substitution: Substitution,
}

/// Checks every clause against `model` under every body match. For
/// range-restricted clauses this covers all ground substitutions over the
/// model's terms.
pub fn check_model(cs: &[Clause], model: &[Atom]) -> Vec<ModelViolation> {
    let mut out = Vec::new();
    for c in cs {
        for s in match_body(&c.body, model) {
            if !c.head.iter().any(|h| model.contains(&h.apply(&s))) {
                out.push(ModelViolation { clause_id: c.id, substitution: s });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_atom, parse_clause, parse_clauses, Symbol};

    fn atoms(texts: &[&str]) -> Vec<Atom> {
        texts.iter().map(|t| parse_atom(t).unwrap()).collect()
    }

    fn body(texts: &[&str]) -> Vec<Atom> {
        atoms(texts)
    }

    #[test]
    fn single_literal_match() {
        let subs = match_body(&body(&["dog(X)"]), &atoms(&["dog(a)"]));
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0][&Symbol::new("X")], Term::constant("a"));
        assert!(match_body(&body(&["dog(X)"]), &[]).is_empty());
    }

    #[test]
    fn dog_bone_clause_ten_join() {
        let subs = match_body(&body(&["agent(Y,X)", "on(Y,Z)"]), &atoms(&["agent(c,a)", "on(c,b)"]));
        assert_eq!(subs.len(), 1);
        let s = &subs[0];
        assert_eq!(s[&Symbol::new("Y")], Term::constant("c"));
        assert_eq!(s[&Symbol::new("X")], Term::constant("a"));
        assert_eq!(s[&Symbol::new("Z")], Term::constant("b"));
    }

    #[test]
    fn enumeration_order_follows_atom_order() {
        let subs = match_body(&body(&["p(X)", "q(Y)"]), &atoms(&["q(b)", "p(a)", "p(c)", "q(d)"]));
        let pairs: Vec<(String, String)> =
            subs.iter().map(|s| (s[&Symbol::new("X")].to_string(), s[&Symbol::new("Y")].to_string())).collect();
        let expect = [("a", "b"), ("a", "d"), ("c", "b"), ("c", "d")];
        assert_eq!(pairs, expect.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>());
    }

    #[test]
    fn repeated_variable_must_agree() {
        assert!(match_body(&body(&["r(X,X)"]), &atoms(&["r(a,b)"])).is_empty());
        assert_eq!(match_body(&body(&["r(X,X)"]), &atoms(&["r(a,b)", "r(b,b)"])).len(), 1);
        assert_eq!(match_body(&body(&["p(f(X))"]), &atoms(&["p(f(a))", "p(a)"])).len(), 1);
    }

    #[test]
    fn extension_splits_on_disjunction() {
        let c = parse_clause("herbivore(X) ; carnivore(X) :- animal(X).").unwrap();
        let Extension::Children(kids) = hyper_extend(&Branch::new(atoms(&["animal(a)"])), &c) else { panic!() };
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].atoms, atoms(&["animal(a)", "herbivore(a)"]));
        assert_eq!(kids[1].atoms, atoms(&["animal(a)", "carnivore(a)"]));
    }

    #[test]
    fn extension_closes_and_skips() {
        let c = parse_clause("false :- plant(X), bone(X).").unwrap();
        assert_eq!(hyper_extend(&Branch::new(atoms(&["bone(b)", "plant(b)"])), &c), Extension::Closed);
        let c9 = parse_clause("herbivore(X) ; carnivore(X) :- animal(X).").unwrap();
        assert_eq!(hyper_extend(&Branch::new(atoms(&["dog(a)"])), &c9), Extension::NotApplicable);
        let satisfied = Branch::new(atoms(&["animal(a)", "carnivore(a)"]));
        assert_eq!(hyper_extend(&satisfied, &c9), Extension::NotApplicable);
    }

    #[test]
    fn model_check_finds_violations() {
        let cs = parse_clauses("q(a).\np(X) ; r(X) :- q(X).\nfalse :- p(X).").unwrap();
        assert!(check_model(&cs, &atoms(&["q(a)", "r(a)"])).is_empty());
        assert_eq!(check_model(&cs, &atoms(&["q(a)"])).len(), 1);
        assert_eq!(check_model(&cs, &atoms(&["q(a)", "p(a)"]))[0].clause_id, 3);
    }
}
