//! Formulas over the base language and its definitional partners.

mod ast;
mod dictionary;
mod parse;
mod prenex;
mod signature;

pub use ast::{Formula, FreshNames, Quantifier, Term, LABEL, PRED, SUCC, ZERO};
pub use dictionary::{builtin, DefBody, DefDictionary, Definition, Direction};
pub use parse::{is_reserved, parse, parse_term};
pub use prenex::{radius, radius_in, to_prenex};
pub use signature::{Signature, SymbolKind};
