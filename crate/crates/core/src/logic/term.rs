use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// An interned-by-sharing name: predicate, function, constant or variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl std::borrow::Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(Symbol::from)
    }
}

/// Skolem symbols are `sk` followed by a digit. Input formulas may not use them.
pub fn is_reserved_symbol(name: &str) -> bool {
    let b = name.as_bytes();
    b.len() > 2 && b.starts_with(b"sk") && b[2].is_ascii_digit()
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Symbol),
    /// A constant is a function application with no arguments.
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::App(Symbol::new(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Self {
        Term::App(Symbol::new(name), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables and constants have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Symbol>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn apply(&self, subst: &Substitution) -> Term {
        match self {
            Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(subst)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                write!(f, "{name}")?;
                write_args(f, args)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom { predicate: Symbol::new(predicate), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn depth(&self) -> usize {
        self.args.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn collect_vars(&self, out: &mut Vec<Symbol>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn apply(&self, subst: &Substitution) -> Atom {
        Atom { predicate: self.predicate.clone(), args: self.args.iter().map(|a| a.apply(subst)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        write_args(f, &self.args)
    }
}

/// Variable bindings produced by body matching.
pub type Substitution = BTreeMap<Symbol, Term>;

/// `head_1 ; ... ; head_n :- body_1, ..., body_m.`
///
/// An empty head is falsum; an empty body is truth.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    pub id: usize,
    pub head: Vec<Atom>,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Vec<Atom>, body: Vec<Atom>) -> Self {
        Clause { id: 0, head, body }
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// Head variables that never occur in the body.
    pub fn unbound_head_vars(&self) -> Vec<Symbol> {
        let mut body_vars = Vec::new();
        self.body.iter().for_each(|a| a.collect_vars(&mut body_vars));
        let mut head_vars = Vec::new();
        self.head.iter().for_each(|a| a.collect_vars(&mut head_vars));
        head_vars.retain(|v| !body_vars.contains(v));
        head_vars
    }

    pub fn is_range_restricted(&self) -> bool {
        self.unbound_head_vars().is_empty()
    }

    /// Head and body without the id, for structural comparisons.
    pub fn same_shape(&self, other: &Clause) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.head.is_empty() {
            f.write_str("false")?;
        }
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{a}")?;
        }
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, a) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
        }
        f.write_str(".")
    }
}

pub fn render_clause(c: &Clause) -> String {
    c.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_of_nested_terms() {
        let t = Term::app("f", vec![Term::constant("a"), Term::app("g", vec![Term::var("X")])]);
        assert_eq!(t.depth(), 3);
        assert_eq!(Term::constant("a").depth(), 1);
        assert_eq!(Term::var("X").depth(), 1);
    }

    #[test]
    fn reserved_names() {
        assert!(is_reserved_symbol("sk1"));
        assert!(is_reserved_symbol("sk12_3"));
        assert!(!is_reserved_symbol("sky"));
        assert!(!is_reserved_symbol("skin"));
        assert!(!is_reserved_symbol("sk"));
    }

    #[test]
    fn render_forms() {
        let c = Clause::new(
            vec![],
            vec![Atom::new("plant", vec![Term::var("X")]), Atom::new("bone", vec![Term::var("X")])],
        );
        assert_eq!(c.to_string(), "false :- plant(X), bone(X).");
        let c = Clause::new(vec![Atom::new("dog", vec![Term::constant("a")])], vec![]);
        assert_eq!(c.to_string(), "dog(a).");
        assert_eq!(Clause::new(vec![], vec![]).to_string(), "false.");
    }
}
