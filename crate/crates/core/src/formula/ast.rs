use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Names of the fixed base signature.
pub const ZERO: &str = "0";
pub const SUCC: &str = "S";
pub const PRED: &str = "P";
pub const LABEL: &str = "A";

/// A term. `Handle` is a parameter: an element named by id rather than by a
/// closed term. Handles compare by identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
    Handle(u32),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    pub fn zero() -> Term {
        Term::constant(ZERO)
    }

    /// `t + k̄`: `S^k(t)` for positive `k`, `P^{-k}(t)` for negative.
    pub fn shift(self, k: i64) -> Term {
        let sym = if k >= 0 { SUCC } else { PRED };
        let mut t = self;
        for _ in 0..k.unsigned_abs() {
            t = Term::app(sym, alloc::vec![t]);
        }
        t
    }

    /// The numeral `k̄`.
    pub fn numeral(k: i64) -> Term {
        Term::zero().shift(k)
    }

    /// If the term is a pure `S`/`P` word applied to `0`, returns its value.
    pub fn as_numeral(&self) -> Option<i64> {
        match self {
            Term::Const(c) if c == ZERO => Some(0),
            Term::App(f, args) if args.len() == 1 => {
                let step = match f.as_str() {
                    SUCC => 1,
                    PRED => -1,
                    _ => return None,
                };
                args[0].as_numeral().map(|k| k + step)
            }
            _ => None,
        }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_into(out)),
            Term::Const(_) | Term::Handle(_) => {}
        }
    }

    pub fn handles_into(&self, out: &mut BTreeSet<u32>) {
        match self {
            Term::Handle(h) => {
                out.insert(*h);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.handles_into(out)),
            Term::Const(_) | Term::Var(_) => {}
        }
    }

    /// Number of occurrences of the given function symbols.
    pub fn count_symbols(&self, syms: &[&str]) -> usize {
        match self {
            Term::App(f, args) => {
                let own = usize::from(syms.contains(&f.as_str()));
                own + args.iter().map(|a| a.count_symbols(syms)).sum::<usize>()
            }
            _ => 0,
        }
    }

    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect()),
            _ => self.clone(),
        }
    }

    pub fn map_handles(&self, map: &dyn Fn(u32) -> u32) -> Term {
        match self {
            Term::Handle(h) => Term::Handle(map(*h)),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.map_handles(map)).collect()),
            _ => self.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

/// A first-order formula over some signature. The formula itself does not
/// carry its signature; [`Formula::check`] validates it against one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant(Quantifier, String, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn rel(r: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(r.to_string(), args)
    }

    pub fn label(t: Term) -> Formula {
        Formula::rel(LABEL, alloc::vec![t])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Exists, v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Forall, v.to_string(), Box::new(body))
    }

    /// Balanced conjunction; `True` when empty.
    pub fn conjunction(parts: Vec<Formula>) -> Formula {
        balanced(parts, Formula::True, Formula::and)
    }

    /// Balanced disjunction; `False` when empty.
    pub fn disjunction(parts: Vec<Formula>) -> Formula {
        balanced(parts, Formula::False, Formula::or)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Quant(..) => false,
        }
    }

    /// Splits a prenex formula into its quantifier prefix and matrix.
    /// Returns `None` if the formula is not prenex.
    pub fn prenex_parts(&self) -> Option<(Vec<(Quantifier, &str)>, &Formula)> {
        let mut prefix = Vec::new();
        let mut cur = self;
        while let Formula::Quant(q, v, body) = cur {
            prefix.push((*q, v.as_str()));
            cur = body;
        }
        cur.is_quantifier_free().then_some((prefix, cur))
    }

    pub fn is_prenex(&self) -> bool {
        self.prenex_parts().is_some()
    }

    /// Prenex with an all-existential prefix.
    pub fn is_existential(&self) -> bool {
        self.prenex_parts().is_some_and(|(p, _)| p.iter().all(|(q, _)| *q == Quantifier::Exists))
    }

    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::Not(a) => a.quantifier_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_count() + b.quantifier_count()
            }
            Formula::Quant(_, _, body) => 1 + body.quantifier_count(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    /// Free variables in canonical (sorted) order; tuple coordinate `i`
    /// is bound to the `i`-th entry.
    pub fn free_var_list(&self) -> Vec<String> {
        self.free_vars().into_iter().collect()
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |t: &Term| {
            let mut vs = BTreeSet::new();
            t.vars_into(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                add(a);
                add(b);
            }
            Formula::Rel(_, args) => args.iter().for_each(add),
            Formula::Not(a) => a.free_vars_into(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::Quant(_, v, body) => {
                bound.push(v.clone());
                body.free_vars_into(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.vars_into(&mut out));
        self.visit_binders(&mut |v| {
            out.insert(v.to_string());
        });
        out
    }

    pub fn handles(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.handles_into(&mut out));
        out
    }

    pub fn visit_terms(&self, f: &mut dyn FnMut(&Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Rel(_, args) => {
                for t in args {
                    f(t);
                }
            }
            Formula::Not(a) | Formula::Quant(_, _, a) => a.visit_terms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
        }
    }

    fn visit_binders(&self, f: &mut dyn FnMut(&str)) {
        match self {
            Formula::Quant(_, v, body) => {
                f(v);
                body.visit_binders(f);
            }
            Formula::Not(a) => a.visit_binders(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
            _ => {}
        }
    }

    /// Applies `f` to every term in the formula, leaving binders alone.
    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(f(a), f(b)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(f).collect()),
            Formula::Not(a) => Formula::not(a.map_terms(f)),
            Formula::And(a, b) => Formula::and(a.map_terms(f), b.map_terms(f)),
            Formula::Or(a, b) => Formula::or(a.map_terms(f), b.map_terms(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_terms(f), b.map_terms(f)),
            Formula::Iff(a, b) => Formula::Iff(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Quant(q, v, body) => Formula::Quant(*q, v.clone(), Box::new(body.map_terms(f))),
        }
    }

    pub fn map_handles(&self, map: &dyn Fn(u32) -> u32) -> Formula {
        self.map_terms(&|t| t.map_handles(map))
    }

    /// Capture-avoiding substitution of terms for free variables. Bound
    /// variables that would capture a variable of the substituted terms are
    /// renamed to fresh names.
    pub fn substitute(&self, map: &[(String, Term)]) -> Formula {
        let mut avoid = self.all_vars();
        for (_, t) in map {
            t.vars_into(&mut avoid);
        }
        let mut fresh = FreshNames::new("v", avoid);
        subst_rec(self, map, &mut fresh)
    }

    /// Canonical renaming of bound variables (`_b0`, `_b1`, ... in binder
    /// pre-order), used for alpha-equivalence.
    pub fn canonical_bound_names(&self) -> Formula {
        let mut counter = 0usize;
        canon_rec(self, &mut Vec::new(), &mut counter)
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.canonical_bound_names() == other.canonical_bound_names()
    }

    /// Rewrites `implies` and `iff` in terms of `not`, `and`, `or`.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => self.clone(),
            Formula::Not(a) => Formula::not(a.desugar()),
            Formula::And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Formula::Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Formula::Implies(a, b) => Formula::or(Formula::not(a.desugar()), b.desugar()),
            Formula::Iff(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                Formula::and(Formula::or(Formula::not(a.clone()), b.clone()), Formula::or(Formula::not(b), a))
            }
            Formula::Quant(q, v, body) => Formula::Quant(*q, v.clone(), Box::new(body.desugar())),
        }
    }
}

fn balanced(mut parts: Vec<Formula>, empty: Formula, join: fn(Formula, Formula) -> Formula) -> Formula {
    match parts.len() {
        0 => empty,
        1 => parts.pop().unwrap(),
        n => {
            let right = parts.split_off(n / 2);
            join(balanced(parts, empty.clone(), join), balanced(right, empty, join))
        }
    }
}

fn subst_rec(f: &Formula, map: &[(String, Term)], fresh: &mut FreshNames) -> Formula {
    let lookup = |v: &str| map.iter().find(|(k, _)| k == v).map(|(_, t)| t.clone());
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => f.map_terms(&|t| t.substitute(&lookup)),
        Formula::Not(a) => Formula::not(subst_rec(a, map, fresh)),
        Formula::And(a, b) => Formula::and(subst_rec(a, map, fresh), subst_rec(b, map, fresh)),
        Formula::Or(a, b) => Formula::or(subst_rec(a, map, fresh), subst_rec(b, map, fresh)),
        Formula::Implies(a, b) => Formula::implies(subst_rec(a, map, fresh), subst_rec(b, map, fresh)),
        Formula::Iff(a, b) => Formula::Iff(Box::new(subst_rec(a, map, fresh)), Box::new(subst_rec(b, map, fresh))),
        Formula::Quant(q, v, body) => {
            let inner: Vec<(String, Term)> = map.iter().filter(|(k, _)| k != v).cloned().collect();
            let captures = inner.iter().any(|(_, t)| {
                let mut vs = BTreeSet::new();
                t.vars_into(&mut vs);
                vs.contains(v)
            });
            if captures {
                let nv = fresh.next();
                let mut renamed = inner;
                renamed.push((v.clone(), Term::Var(nv.clone())));
                Formula::Quant(*q, nv, Box::new(subst_rec(body, &renamed, fresh)))
            } else {
                Formula::Quant(*q, v.clone(), Box::new(subst_rec(body, &inner, fresh)))
            }
        }
    }
}

fn canon_rec(f: &Formula, scope: &mut Vec<(String, String)>, counter: &mut usize) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => f.map_terms(&|t| {
            t.substitute(&|v| scope.iter().rev().find(|(old, _)| old == v).map(|(_, new)| Term::Var(new.clone())))
        }),
        Formula::Not(a) => Formula::not(canon_rec(a, scope, counter)),
        Formula::And(a, b) => Formula::and(canon_rec(a, scope, counter), canon_rec(b, scope, counter)),
        Formula::Or(a, b) => Formula::or(canon_rec(a, scope, counter), canon_rec(b, scope, counter)),
        Formula::Implies(a, b) => Formula::implies(canon_rec(a, scope, counter), canon_rec(b, scope, counter)),
        Formula::Iff(a, b) => {
            Formula::Iff(Box::new(canon_rec(a, scope, counter)), Box::new(canon_rec(b, scope, counter)))
        }
        Formula::Quant(q, v, body) => {
            let name = alloc::format!("_b{}", *counter);
            *counter += 1;
            scope.push((v.clone(), name.clone()));
            let body = canon_rec(body, scope, counter);
            scope.pop();
            Formula::Quant(*q, name, Box::new(body))
        }
    }
}

/// Sequential fresh-name supply: `{base}{n}` for n = 0, 1, ..., skipping
/// names in the avoid set.
#[derive(Clone, Debug)]
pub struct FreshNames {
    base: String,
    next: usize,
    avoid: BTreeSet<String>,
}

impl FreshNames {
    pub fn new(base: &str, avoid: BTreeSet<String>) -> Self {
        FreshNames { base: base.to_string(), next: 0, avoid }
    }

    pub fn starting_at(base: &str, first: usize, avoid: BTreeSet<String>) -> Self {
        FreshNames { base: base.to_string(), next: first, avoid }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> String {
        loop {
            let name = alloc::format!("{}{}", self.base, self.next);
            self.next += 1;
            if self.avoid.insert(name.clone()) {
                return name;
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(k) = self.as_numeral() {
            if k.abs() >= 2 {
                return write!(f, "(lit {k})");
            }
        }
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::Handle(h) => write!(f, "(handle {h})"),
            Term::App(s, args) => {
                write!(f, "({s}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Rel(r, args) => {
                write!(f, "({r}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Formula::Not(a) => write!(f, "(not {a})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Implies(a, b) => write!(f, "(implies {a} {b})"),
            Formula::Iff(a, b) => write!(f, "(iff {a} {b})"),
            Formula::Quant(Quantifier::Exists, v, b) => write!(f, "(exists {v} {b})"),
            Formula::Quant(Quantifier::Forall, v, b) => write!(f, "(forall {v} {b})"),
        }
    }
}
