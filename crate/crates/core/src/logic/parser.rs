//! Concrete syntax for clauses and formulas.
//!
//! Identifiers starting with a lowercase letter are predicates, functions and
//! constants; identifiers starting with an uppercase letter are variables.
//! See `docs/grammar.md` for the full EBNF.

use std::collections::HashMap;

use super::formula::Formula;
use super::term::{is_reserved_symbol, Atom, Clause, Symbol, Term};
use super::LogicError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Semi,
    Neck,
    Amp,
    Pipe,
    Arrow,
    Equiv,
    Tilde,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Equiv => "`<=>`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str, first_line: usize) -> Result<Vec<Spanned>, LogicError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, first_line, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: start.0, column: start.1 });
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            if c.is_ascii_uppercase() {
                push(&mut out, Tok::Upper(word));
            } else {
                push(&mut out, Tok::Lower(word));
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("<=>") {
            (Tok::Equiv, 3)
        } else if rest.starts_with(":-") {
            (Tok::Neck, 2)
        } else if rest.starts_with("=>") {
            (Tok::Arrow, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ';' => Tok::Semi,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '~' => Tok::Tilde,
                _ => {
                    return Err(LogicError::Syntax {
                        line,
                        column: col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            (t, 1)
        };
        push(&mut out, tok);
        i += len;
        col += len;
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Predicate and function arities seen so far. One session spans every
/// clause or formula parsed through the same [`Parser`].
#[derive(Default, Clone, Debug)]
pub struct Signature {
    predicates: HashMap<Symbol, usize>,
    functions: HashMap<Symbol, usize>,
}

impl Signature {
    pub fn predicate_arity(&self, p: &str) -> Option<usize> {
        self.predicates.get(p).copied()
    }

    pub fn function_arity(&self, f: &str) -> Option<usize> {
        self.functions.get(f).copied()
    }

    fn note(
        map: &mut HashMap<Symbol, usize>,
        kind: &'static str,
        name: &Symbol,
        arity: usize,
    ) -> Result<(), LogicError> {
        match map.get(name) {
            Some(&seen) if seen != arity => {
                Err(LogicError::ArityConflict { kind, symbol: name.to_string(), first: seen, second: arity })
            }
            Some(_) => Ok(()),
            None => {
                map.insert(name.clone(), arity);
                Ok(())
            }
        }
    }

    pub fn check_atom(&mut self, atom: &Atom) -> Result<(), LogicError> {
        Self::note(&mut self.predicates, "predicate", &atom.predicate, atom.arity())?;
        atom.args.iter().try_for_each(|t| self.check_term(t))
    }

    fn check_term(&mut self, t: &Term) -> Result<(), LogicError> {
        match t {
            Term::Var(_) => Ok(()),
            Term::App(f, args) => {
                Self::note(&mut self.functions, "function", f, args.len())?;
                args.iter().try_for_each(|a| self.check_term(a))
            }
        }
    }

    pub fn check_clause(&mut self, c: &Clause) -> Result<(), LogicError> {
        c.head.iter().chain(&c.body).try_for_each(|a| self.check_atom(a))
    }

    /// Checks all `atoms`, recording their symbols only if every one is
    /// consistent. On error the signature is unchanged.
    pub fn check_atoms<'a, I: IntoIterator<Item = &'a Atom>>(&mut self, atoms: I) -> Result<(), LogicError> {
        let mut probe = Signature::default();
        for a in atoms {
            probe.check_atom(a)?;
        }
        let conflict = |kind, mine: &HashMap<Symbol, usize>, theirs: &HashMap<Symbol, usize>| {
            theirs.iter().find_map(|(name, &n)| match mine.get(name) {
                Some(&seen) if seen != n => {
                    Some(LogicError::ArityConflict { kind, symbol: name.to_string(), first: seen, second: n })
                }
                _ => None,
            })
        };
        if let Some(e) = conflict("predicate", &self.predicates, &probe.predicates) {
            return Err(e);
        }
        if let Some(e) = conflict("function", &self.functions, &probe.functions) {
            return Err(e);
        }
        self.predicates.extend(probe.predicates);
        self.functions.extend(probe.functions);
        Ok(())
    }
}

/// A parse session: symbol arities must stay consistent across everything
/// parsed by one `Parser`.
#[derive(Default, Debug)]
pub struct Parser {
    signature: Signature,
}

impl Parser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn parse_clause(&mut self, text: &str) -> Result<Clause, LogicError> {
        let toks = lex(text, 1)?;
        let mut cur = Cursor { toks: &toks, pos: 0, allow_reserved: true };
        let clause = cur.clause()?;
        cur.expect_eof()?;
        self.signature.check_clause(&clause)?;
        Ok(clause)
    }

    /// One clause per line (clauses may span lines); `%` starts a comment.
    /// Clause ids are assigned 1, 2, ... in file order.
    pub fn parse_clauses(&mut self, text: &str) -> Result<Vec<Clause>, LogicError> {
        let toks = lex(text, 1)?;
        let mut cur = Cursor { toks: &toks, pos: 0, allow_reserved: true };
        let mut out = Vec::new();
        while cur.peek() != &Tok::Eof {
            let c = cur.clause()?.with_id(out.len() + 1);
            self.signature.check_clause(&c)?;
            out.push(c);
        }
        Ok(out)
    }

    pub fn parse_formula(&mut self, text: &str) -> Result<Formula, LogicError> {
        let toks = lex(text, 1)?;
        let mut cur = Cursor { toks: &toks, pos: 0, allow_reserved: false };
        let f = cur.formula()?;
        // a trailing terminator is tolerated
        if cur.peek() == &Tok::Dot {
            cur.pos += 1;
        }
        cur.expect_eof()?;
        let free = f.free_vars();
        if !free.is_empty() {
            return Err(LogicError::FreeVariable(free.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")));
        }
        self.signature.check_atoms(f.atoms())?;
        Ok(f)
    }
}

pub fn parse_clause(text: &str) -> Result<Clause, LogicError> {
    Parser::new().parse_clause(text)
}

pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, LogicError> {
    Parser::new().parse_clauses(text)
}

pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    Parser::new().parse_formula(text)
}

pub fn parse_atom(text: &str) -> Result<Atom, LogicError> {
    let toks = lex(text, 1)?;
    let mut cur = Cursor { toks: &toks, pos: 0, allow_reserved: true };
    let a = cur.atom()?;
    cur.expect_eof()?;
    Ok(a)
}

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    allow_reserved: bool,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn error<T>(&self, message: String) -> Result<T, LogicError> {
        let s = self.here();
        Err(LogicError::Syntax { line: s.line, column: s.column, message })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, LogicError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), LogicError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn expect_eof(&self) -> Result<(), LogicError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn lower(&mut self) -> Result<Symbol, LogicError> {
        match self.peek().clone() {
            Tok::Lower(s) => {
                if !self.allow_reserved && is_reserved_symbol(&s) {
                    return self.error(format!("`{s}` is reserved for Skolem symbols"));
                }
                self.pos += 1;
                Ok(Symbol::from(s))
            }
            _ => self.unexpected("a lowercase identifier"),
        }
    }

    fn clause(&mut self) -> Result<Clause, LogicError> {
        let mut head = Vec::new();
        let bare_false = matches!(self.peek(), Tok::Lower(s) if s == "false") && self.peek_at(1) != &Tok::LParen;
        if bare_false {
            self.pos += 1;
        } else {
            head.push(self.atom()?);
            while self.eat(&Tok::Semi) {
                head.push(self.atom()?);
            }
        }
        let mut body = Vec::new();
        if self.eat(&Tok::Neck) {
            let bare_true = matches!(self.peek(), Tok::Lower(s) if s == "true") && self.peek_at(1) != &Tok::LParen;
            if bare_true {
                self.pos += 1;
            } else {
                body.push(self.atom()?);
                while self.eat(&Tok::Comma) {
                    body.push(self.atom()?);
                }
            }
        }
        self.expect(Tok::Dot)?;
        Ok(Clause::new(head, body))
    }

    fn atom(&mut self) -> Result<Atom, LogicError> {
        let predicate = self.lower()?;
        let args = self.args()?;
        Ok(Atom { predicate, args })
    }

    fn args(&mut self) -> Result<Vec<Term>, LogicError> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            args.push(self.term()?);
            while self.eat(&Tok::Comma) {
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        if let Tok::Upper(v) = self.peek().clone() {
            self.pos += 1;
            return Ok(Term::Var(Symbol::from(v)));
        }
        let f = self.lower()?;
        let args = self.args()?;
        Ok(Term::App(f, args))
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        if self.eat(&Tok::Equiv) {
            let rhs = self.formula()?;
            return Ok(Formula::Iff(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let first = self.conjunction()?;
        if self.peek() != &Tok::Pipe {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Pipe) {
            parts.push(self.conjunction()?);
        }
        Ok(Formula::Or(parts))
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let first = self.unary()?;
        if self.peek() != &Tok::Amp {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary()?);
        }
        Ok(Formula::And(parts))
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            // `all`/`exists` followed by a variable is a quantifier; followed
            // by anything else it is an ordinary predicate name.
            Tok::Lower(kw) if (kw == "all" || kw == "exists") && matches!(self.peek_at(1), Tok::Upper(_)) => {
                self.pos += 1;
                let mut vars = Vec::new();
                loop {
                    match self.peek().clone() {
                        Tok::Upper(v) => {
                            self.pos += 1;
                            vars.push(Symbol::from(v));
                        }
                        _ => return self.unexpected("a variable"),
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                let body = Box::new(self.unary()?);
                Ok(if kw == "all" { Formula::Forall(vars, body) } else { Formula::Exists(vars, body) })
            }
            Tok::Lower(kw) if (kw == "true" || kw == "false") && self.peek_at(1) != &Tok::LParen => {
                self.pos += 1;
                Ok(if kw == "true" { Formula::True } else { Formula::False })
            }
            Tok::Lower(_) => Ok(Formula::Atom(self.atom()?)),
            _ => self.unexpected("a formula"),
        }
    }
}
