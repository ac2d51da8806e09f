use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{Formula, Term, LABEL, PRED, SUCC, ZERO};
use crate::error::FormulaError;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Signature {
    pub name: String,
    pub constants: Vec<String>,
    pub functions: Vec<(String, usize)>,
    pub relations: Vec<(String, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Constant,
    Function(usize),
    Relation(usize),
}

impl Signature {
    /// The fixed base language `{0, S, P, A}`.
    pub fn base() -> Signature {
        Signature {
            name: "L".to_string(),
            constants: alloc::vec![ZERO.to_string()],
            functions: alloc::vec![(SUCC.to_string(), 1), (PRED.to_string(), 1)],
            relations: alloc::vec![(LABEL.to_string(), 1)],
        }
    }

    pub fn new(name: &str) -> Signature {
        Signature { name: name.to_string(), constants: Vec::new(), functions: Vec::new(), relations: Vec::new() }
    }

    pub fn with_constant(mut self, c: &str) -> Self {
        self.constants.push(c.to_string());
        self
    }

    pub fn with_function(mut self, f: &str, arity: usize) -> Self {
        self.functions.push((f.to_string(), arity));
        self
    }

    pub fn with_relation(mut self, r: &str, arity: usize) -> Self {
        self.relations.push((r.to_string(), arity));
        self
    }

    pub fn lookup(&self, sym: &str) -> Option<SymbolKind> {
        if self.constants.iter().any(|c| c == sym) {
            return Some(SymbolKind::Constant);
        }
        if let Some((_, a)) = self.functions.iter().find(|(f, _)| f == sym) {
            return Some(SymbolKind::Function(*a));
        }
        self.relations.iter().find(|(r, _)| r == sym).map(|(_, a)| SymbolKind::Relation(*a))
    }

    /// True when the signature has the symbols needed for `(lit n)`.
    pub fn has_numerals(&self) -> bool {
        self.lookup(ZERO) == Some(SymbolKind::Constant)
            && self.lookup(SUCC) == Some(SymbolKind::Function(1))
            && self.lookup(PRED) == Some(SymbolKind::Function(1))
    }

    /// Symbol names must be unique across all three kinds.
    pub fn validate(&self) -> Result<(), FormulaError> {
        let mut seen: Vec<&str> = Vec::new();
        let names = self
            .constants
            .iter()
            .map(String::as_str)
            .chain(self.functions.iter().map(|(f, _)| f.as_str()))
            .chain(self.relations.iter().map(|(r, _)| r.as_str()));
        for n in names {
            if seen.contains(&n) {
                return Err(FormulaError::DuplicateSymbol(n.to_string()));
            }
            if crate::formula::parse::is_reserved(n) {
                return Err(FormulaError::ReservedSymbol(n.to_string()));
            }
            seen.push(n);
        }
        Ok(())
    }

    pub fn check_term(&self, t: &Term) -> Result<(), FormulaError> {
        match t {
            Term::Var(_) | Term::Handle(_) => Ok(()),
            Term::Const(c) => match self.lookup(c) {
                Some(SymbolKind::Constant) => Ok(()),
                _ => Err(FormulaError::UnknownSymbol(c.clone())),
            },
            Term::App(f, args) => {
                match self.lookup(f) {
                    Some(SymbolKind::Function(a)) if a == args.len() => {}
                    Some(SymbolKind::Function(a)) => {
                        return Err(FormulaError::Arity { symbol: f.clone(), expected: a, found: args.len() })
                    }
                    _ => return Err(FormulaError::UnknownSymbol(f.clone())),
                }
                args.iter().try_for_each(|a| self.check_term(a))
            }
        }
    }

    /// Well-sortedness of `f` against this signature.
    pub fn check(&self, f: &Formula) -> Result<(), FormulaError> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) => {
                self.check_term(a)?;
                self.check_term(b)
            }
            Formula::Rel(r, args) => {
                match self.lookup(r) {
                    Some(SymbolKind::Relation(a)) if a == args.len() => {}
                    Some(SymbolKind::Relation(a)) => {
                        return Err(FormulaError::Arity { symbol: r.clone(), expected: a, found: args.len() })
                    }
                    _ => return Err(FormulaError::UnknownSymbol(r.clone())),
                }
                args.iter().try_for_each(|a| self.check_term(a))
            }
            Formula::Not(a) | Formula::Quant(_, _, a) => self.check(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.check(a)?;
                self.check(b)
            }
        }
    }
}
