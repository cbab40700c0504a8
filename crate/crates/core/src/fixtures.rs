//! Bundled desk-scale data used by tests, examples and the CLI smoke tests.
//!
//! `desk_corpus.csv` and `desk_embedding.txt` are produced by
//! `fixtures/gen_desk.py`; regenerate both together.

/// The thirteen clauses of the dog/bone tableau example, in order.
pub const DOG_BONE_CLAUSES: &str = include_str!("../fixtures/dog_bone.clauses");

/// Background rules of the same example as closed formulas, one per line.
pub const DOG_BONE_BACKGROUND: &str = include_str!("../fixtures/dog_bone_background.formulas");

/// 400 ConceptNet-style triples.
pub const DESK_CORPUS: &str = include_str!("../fixtures/desk_corpus.csv");

/// Word vectors for the desk corpus symbols.
pub const DESK_EMBEDDING: &str = include_str!("../fixtures/desk_embedding.txt");

/// A single cause question about a family taking their dog to the vet.
pub const COPA_65: &str = include_str!("../fixtures/copa65.problems");

/// "The dog chewed on a bone."
pub const DOG_CHEWED_BONE: &str = "exists A (dog(A) & exists B, C (r1on(C,B) & bone(B) & r1agent(C,A) & chew(C)))";

/// Non-comment lines of a `%`-commented text file.
pub fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(|l| l.split('%').next().unwrap_or("").trim()).filter(|l| !l.is_empty())
}
