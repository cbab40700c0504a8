use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use super::term::{Clause, Symbol};

/// A sorted, deduplicated set of predicate symbols.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolSet(BTreeSet<Symbol>);

impl SymbolSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: Symbol) -> bool {
        self.0.insert(s)
    }

    pub fn contains(&self, s: &str) -> bool {
        self.0.contains(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> + '_ {
        self.0.iter()
    }

    pub fn union(&self, other: &SymbolSet) -> SymbolSet {
        SymbolSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &SymbolSet) -> SymbolSet {
        SymbolSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_disjoint(&self, other: &SymbolSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &SymbolSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn extend<I: IntoIterator<Item = Symbol>>(&mut self, it: I) {
        self.0.extend(it)
    }
}

impl FromIterator<Symbol> for SymbolSet {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        SymbolSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for SymbolSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        SymbolSet(iter.into_iter().map(Symbol::new).collect())
    }
}

impl IntoIterator for SymbolSet {
    type Item = Symbol;
    type IntoIter = std::collections::btree_set::IntoIter<Symbol>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a SymbolSet {
    type Item = &'a Symbol;
    type IntoIter = std::collections::btree_set::Iter<'a, Symbol>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Renders as `{a, b, c}`.
impl fmt::Display for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// Predicate symbols of a formula; function and constant symbols are excluded.
pub fn symbols_of(f: &Formula) -> SymbolSet {
    f.atoms().into_iter().map(|a| a.predicate.clone()).collect()
}

pub fn symbols_of_clauses(cs: &[Clause]) -> SymbolSet {
    cs.iter().flat_map(|c| c.head.iter().chain(&c.body)).map(|a| a.predicate.clone()).collect()
}

/// Lowercase with spaces replaced by underscores, e.g. `Dog Treat` -> `dog_treat`.
pub fn canonical_symbol(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join("_").to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_clauses, parse_formula};

    #[test]
    fn symbols_of_dog_sentence() {
        let f =
            parse_formula("exists A (dog(A) & exists B, C (r1on(C,B) & bone(B) & r1agent(C,A) & chew(C)))").unwrap();
        let expected: SymbolSet = ["dog", "r1on", "bone", "r1agent", "chew"].into_iter().collect();
        assert_eq!(symbols_of(&f), expected);
    }

    #[test]
    fn symbols_of_dog_bone_clauses() {
        assert!(symbols_of_clauses(&[]).is_empty());
        let cs = parse_clauses(crate::fixtures::DOG_BONE_CLAUSES).unwrap();
        let expected: SymbolSet = [
            "dog",
            "bone",
            "chew",
            "on",
            "agent",
            "manducate",
            "eat",
            "animal",
            "herbivore",
            "carnivore",
            "plant",
            "dog_treat",
            "dog_food",
        ]
        .into_iter()
        .collect();
        assert_eq!(symbols_of_clauses(&cs), expected);
    }

    #[test]
    fn constants_are_not_symbols() {
        let f = parse_formula("p(a, f(b))").unwrap();
        assert_eq!(symbols_of(&f).to_string(), "{p}");
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical_symbol("Dog Treat"), "dog_treat");
        assert_eq!(canonical_symbol("  dog  "), "dog");
    }
}
