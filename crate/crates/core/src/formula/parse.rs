use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{Formula, Quantifier, Term};
use super::signature::{Signature, SymbolKind};
use crate::error::FormulaError;

const RESERVED: &[&str] =
    &["=", "not", "and", "or", "implies", "iff", "exists", "forall", "lit", "handle", "true", "false"];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn syntax(pos: usize, msg: &str) -> FormulaError {
    FormulaError::Syntax { pos, msg: msg.to_string() }
}

fn read_sexp(text: &str) -> Result<Sexp, FormulaError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b';' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if done.is_some() {
            return Err(syntax(i, "trailing input"));
        }
        let item = match c {
            b'(' => {
                stack.push((Vec::new(), i));
                i += 1;
                continue;
            }
            b')' => {
                let (items, start) = stack.pop().ok_or_else(|| syntax(i, "unbalanced ')'"))?;
                i += 1;
                Sexp::List(items, start)
            }
            _ => {
                let start = i;
                while i < bytes.len() {
                    let b = bytes[i];
                    if b.is_ascii_whitespace() || b == b'(' || b == b')' || b == b';' {
                        break;
                    }
                    i += 1;
                }
                Sexp::Atom(text[start..i].to_string(), start)
            }
        };
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None => done = Some(item),
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed '('"));
    }
    done.ok_or_else(|| syntax(0, "empty input"))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

/// Parses a formula in s-expression syntax and checks it against `sig`.
pub fn parse(text: &str, sig: &Signature) -> Result<Formula, FormulaError> {
    let sexp = read_sexp(text)?;
    let f = Parser { sig }.formula(&sexp)?;
    Ok(f)
}

/// Parses a single term.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, FormulaError> {
    let sexp = read_sexp(text)?;
    Parser { sig }.term(&sexp)
}

struct Parser<'a> {
    sig: &'a Signature,
}

impl Parser<'_> {
    fn formula(&self, s: &Sexp) -> Result<Formula, FormulaError> {
        let (items, pos) = match s {
            Sexp::Atom(a, p) => {
                return match a.as_str() {
                    "true" => Ok(Formula::True),
                    "false" => Ok(Formula::False),
                    _ => Err(syntax(*p, "expected a formula")),
                }
            }
            Sexp::List(items, p) => (items, *p),
        };
        let head = match items.first() {
            Some(Sexp::Atom(h, _)) => h.as_str(),
            _ => return Err(syntax(pos, "expected an operator")),
        };
        let args = &items[1..];
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(pos, &alloc::format!("'{head}' takes {n} arguments")))
            }
        };
        match head {
            "=" => {
                want(2)?;
                Ok(Formula::Eq(self.term(&args[0])?, self.term(&args[1])?))
            }
            "not" => {
                want(1)?;
                Ok(Formula::not(self.formula(&args[0])?))
            }
            "and" | "or" => {
                if args.len() < 2 {
                    return Err(syntax(pos, &alloc::format!("'{head}' needs at least 2 arguments")));
                }
                let parts = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>, _>>()?;
                let join = if head == "and" { Formula::and } else { Formula::or };
                let mut it = parts.into_iter().rev();
                let last = it.next().unwrap();
                Ok(it.fold(last, |acc, f| join(f, acc)))
            }
            "implies" | "iff" => {
                want(2)?;
                let (a, b) = (Box::new(self.formula(&args[0])?), Box::new(self.formula(&args[1])?));
                Ok(if head == "implies" { Formula::Implies(a, b) } else { Formula::Iff(a, b) })
            }
            "exists" | "forall" => {
                want(2)?;
                let v = match &args[0] {
                    Sexp::Atom(v, p) => {
                        if !is_identifier(v) || is_reserved(v) || self.sig.lookup(v).is_some() {
                            return Err(syntax(*p, "bad bound variable"));
                        }
                        v.clone()
                    }
                    other => return Err(syntax(other.pos(), "bad bound variable")),
                };
                let q = if head == "exists" { Quantifier::Exists } else { Quantifier::Forall };
                Ok(Formula::Quant(q, v, Box::new(self.formula(&args[1])?)))
            }
            "lit" | "handle" | "true" | "false" => Err(syntax(pos, "expected a formula")),
            rel => match self.sig.lookup(rel) {
                Some(SymbolKind::Relation(a)) => {
                    if a != args.len() {
                        return Err(FormulaError::Arity { symbol: rel.to_string(), expected: a, found: args.len() });
                    }
                    let ts = args.iter().map(|t| self.term(t)).collect::<Result<Vec<_>, _>>()?;
                    Ok(Formula::Rel(rel.to_string(), ts))
                }
                Some(_) => Err(syntax(pos, &alloc::format!("'{rel}' is not a relation"))),
                None => Err(FormulaError::UnknownSymbol(rel.to_string())),
            },
        }
    }

    fn term(&self, s: &Sexp) -> Result<Term, FormulaError> {
        match s {
            Sexp::Atom(a, p) => match self.sig.lookup(a) {
                Some(SymbolKind::Constant) => Ok(Term::Const(a.clone())),
                Some(_) => Err(syntax(*p, &alloc::format!("'{a}' is not a constant"))),
                None if is_identifier(a) && !is_reserved(a) => Ok(Term::Var(a.clone())),
                None if a.chars().all(|c| c.is_ascii_digit()) => Err(FormulaError::UnknownSymbol(a.clone())),
                None => Err(syntax(*p, "expected a term")),
            },
            Sexp::List(items, pos) => {
                let head = match items.first() {
                    Some(Sexp::Atom(h, _)) => h.as_str(),
                    _ => return Err(syntax(*pos, "expected a function symbol")),
                };
                let args = &items[1..];
                match head {
                    "lit" => {
                        if !self.sig.has_numerals() {
                            return Err(FormulaError::UnknownSymbol("lit".to_string()));
                        }
                        let n = self.integer(args, *pos)?;
                        Ok(Term::numeral(n))
                    }
                    "handle" => {
                        let n = self.integer(args, *pos)?;
                        u32::try_from(n).map(Term::Handle).map_err(|_| syntax(*pos, "handle id out of range"))
                    }
                    f => match self.sig.lookup(f) {
                        Some(SymbolKind::Function(a)) => {
                            if a != args.len() {
                                return Err(FormulaError::Arity {
                                    symbol: f.to_string(),
                                    expected: a,
                                    found: args.len(),
                                });
                            }
                            let ts = args.iter().map(|t| self.term(t)).collect::<Result<Vec<_>, _>>()?;
                            Ok(Term::App(f.to_string(), ts))
                        }
                        Some(_) => Err(syntax(*pos, &alloc::format!("'{f}' is not a function"))),
                        None => Err(FormulaError::UnknownSymbol(f.to_string())),
                    },
                }
            }
        }
    }

    fn integer(&self, args: &[Sexp], pos: usize) -> Result<i64, FormulaError> {
        match args {
            [Sexp::Atom(a, p)] => a.parse::<i64>().map_err(|_| syntax(*p, "expected an integer")),
            _ => Err(syntax(pos, "expected one integer argument")),
        }
    }
}
