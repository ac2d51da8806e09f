use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{Formula, FreshNames, Term, LABEL, PRED, SUCC, ZERO};
use super::parse::{parse, parse_term};
use super::signature::{Signature, SymbolKind};
use crate::error::FormulaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    /// L to L': replace L-symbols by their L'-definitions.
    Forward,
    /// L' to L.
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DefBody {
    /// `f(x̄) := t`, substituted inline.
    Term(Term),
    /// For a function of arity k the parameters are `x1..xk, y` and the
    /// formula defines the graph. For a constant there is one parameter.
    /// For a relation the parameters are its arguments.
    Formula(Formula),
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Definition {
    pub symbol: String,
    pub params: Vec<String>,
    pub body: DefBody,
}

impl Definition {
    pub fn is_quantifier_free(&self) -> bool {
        match &self.body {
            DefBody::Term(_) => true,
            DefBody::Formula(f) => f.is_quantifier_free(),
        }
    }

    /// The definition as a formula in the parameters: the graph for
    /// functions and constants, the body for relations.
    pub fn as_formula(&self, result: &str) -> Formula {
        match &self.body {
            DefBody::Formula(f) => f.clone(),
            DefBody::Term(t) => Formula::eq(t.clone(), Term::var(result)),
        }
    }
}

/// Two-way symbol-to-formula mapping witnessing a definitional equivalence
/// between the base language and `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DefDictionary {
    pub name: String,
    pub target: Signature,
    pub forward: Vec<Definition>,
    pub backward: Vec<Definition>,
}

impl DefDictionary {
    pub fn new(name: &str, target: Signature) -> Self {
        DefDictionary { name: name.to_string(), target, forward: Vec::new(), backward: Vec::new() }
    }

    pub fn base(&self) -> Signature {
        Signature::base()
    }

    pub fn source_sig(&self, dir: Direction) -> Signature {
        match dir {
            Direction::Forward => Signature::base(),
            Direction::Backward => self.target.clone(),
        }
    }

    pub fn target_sig(&self, dir: Direction) -> Signature {
        match dir {
            Direction::Forward => self.target.clone(),
            Direction::Backward => Signature::base(),
        }
    }

    pub fn defs(&self, dir: Direction) -> &[Definition] {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }

    pub fn def(&self, dir: Direction, symbol: &str) -> Option<&Definition> {
        self.defs(dir).iter().find(|d| d.symbol == symbol)
    }

    /// Adds a definition given as text. A term body (`is_term`) is parsed as
    /// a term over the other signature; otherwise as a formula.
    pub fn define(
        &mut self,
        dir: Direction,
        symbol: &str,
        params: &[&str],
        body: &str,
        is_term: bool,
    ) -> Result<(), FormulaError> {
        let sig = self.target_sig(dir);
        let body = if is_term { DefBody::Term(parse_term(body, &sig)?) } else { DefBody::Formula(parse(body, &sig)?) };
        let def =
            Definition { symbol: symbol.to_string(), params: params.iter().map(|p| p.to_string()).collect(), body };
        self.push(dir, def)
    }

    pub fn push(&mut self, dir: Direction, def: Definition) -> Result<(), FormulaError> {
        if self.def(dir, &def.symbol).is_some() {
            return Err(FormulaError::Dictionary(alloc::format!("duplicate definition of {}", def.symbol)));
        }
        match dir {
            Direction::Forward => self.forward.push(def),
            Direction::Backward => self.backward.push(def),
        }
        Ok(())
    }

    /// Checks that every symbol on each side is defined with the right
    /// shape, and that every body is well-sorted with no stray free
    /// variables.
    pub fn validate(&self) -> Result<(), FormulaError> {
        self.target.validate()?;
        for dir in [Direction::Forward, Direction::Backward] {
            let src = self.source_sig(dir);
            let tgt = self.target_sig(dir);
            let symbols = src
                .constants
                .iter()
                .map(|c| (c.clone(), SymbolKind::Constant))
                .chain(src.functions.iter().map(|(f, a)| (f.clone(), SymbolKind::Function(*a))))
                .chain(src.relations.iter().map(|(r, a)| (r.clone(), SymbolKind::Relation(*a))));
            for (sym, kind) in symbols {
                let def = self.def(dir, &sym).ok_or_else(|| FormulaError::MissingDefinition(sym.clone()))?;
                let bad = |msg: &str| FormulaError::Dictionary(alloc::format!("{sym}: {msg}"));
                let arity = match kind {
                    SymbolKind::Constant => 0,
                    SymbolKind::Function(a) | SymbolKind::Relation(a) => a,
                };
                let want_params = match (&def.body, kind) {
                    (DefBody::Term(_), SymbolKind::Relation(_)) => {
                        return Err(bad("relations need a formula definition"))
                    }
                    (DefBody::Term(_), _) => arity,
                    (DefBody::Formula(_), SymbolKind::Relation(_)) => arity,
                    (DefBody::Formula(_), _) => arity + 1,
                };
                if def.params.len() != want_params {
                    return Err(bad("wrong number of parameters"));
                }
                let distinct: BTreeSet<&String> = def.params.iter().collect();
                if distinct.len() != def.params.len() {
                    return Err(bad("repeated parameter"));
                }
                let mut free = BTreeSet::new();
                match &def.body {
                    DefBody::Term(t) => {
                        tgt.check_term(t)?;
                        t.vars_into(&mut free);
                    }
                    DefBody::Formula(f) => {
                        tgt.check(f)?;
                        free = f.free_vars();
                        if !f.handles().is_empty() {
                            return Err(bad("definitions may not mention handles"));
                        }
                    }
                }
                if free.iter().any(|v| !def.params.contains(v)) {
                    return Err(bad("free variable not among the parameters"));
                }
            }
            if let Some(extra) = self.defs(dir).iter().find(|d| src.lookup(&d.symbol).is_none()) {
                return Err(FormulaError::Dictionary(alloc::format!("{} is not a source symbol", extra.symbol)));
            }
        }
        Ok(())
    }

    /// Maximum quantifier depth over all definition bodies.
    pub fn max_quantifier_depth(&self) -> usize {
        self.forward
            .iter()
            .chain(self.backward.iter())
            .map(|d| match &d.body {
                DefBody::Term(_) => 0,
                DefBody::Formula(f) => f.quantifier_count(),
            })
            .max()
            .unwrap_or(0)
    }

    /// Replaces each source symbol by its definition. Function and constant
    /// symbols with formula definitions are eliminated through fresh
    /// existentially quantified variables `z1, z2, ...`.
    pub fn translate(&self, f: &Formula, dir: Direction) -> Result<Formula, FormulaError> {
        let mut fresh = FreshNames::starting_at("z", 1, f.all_vars());
        Translator { dict: self, dir }.formula(f, &mut fresh)
    }

    /// The L'-formula `φ_S(x, y)` defining the successor, with free
    /// variables `x` and `y`.
    pub fn graph_formula(&self, dir: Direction, symbol: &str, vars: &[&str]) -> Result<Formula, FormulaError> {
        let sig = self.source_sig(dir);
        if let Some(Definition { params, body: DefBody::Formula(body), .. }) = self.def(dir, symbol) {
            if params.len() == vars.len() {
                let map = bind(params, vars.iter().map(|v| Term::var(v)).collect());
                return Ok(body.substitute(&map));
            }
        }
        let atom = match sig.lookup(symbol) {
            Some(SymbolKind::Constant) => Formula::eq(Term::constant(symbol), Term::var(vars[0])),
            Some(SymbolKind::Function(a)) => {
                let args = vars[..a].iter().map(|v| Term::var(v)).collect();
                Formula::eq(Term::app(symbol, args), Term::var(vars[a]))
            }
            Some(SymbolKind::Relation(a)) => Formula::rel(symbol, vars[..a].iter().map(|v| Term::var(v)).collect()),
            None => return Err(FormulaError::UnknownSymbol(symbol.to_string())),
        };
        self.translate(&atom, dir)
    }

    pub fn phi_succ(&self) -> Result<Formula, FormulaError> {
        self.graph_formula(Direction::Forward, SUCC, &["x", "y"])
    }

    pub fn phi_label(&self) -> Result<Formula, FormulaError> {
        self.graph_formula(Direction::Forward, LABEL, &["x"])
    }

    pub fn phi_zero(&self) -> Result<Formula, FormulaError> {
        self.graph_formula(Direction::Forward, ZERO, &["x"])
    }

    pub fn phi_pred(&self) -> Result<Formula, FormulaError> {
        self.graph_formula(Direction::Forward, PRED, &["x", "y"])
    }
}

struct Translator<'a> {
    dict: &'a DefDictionary,
    dir: Direction,
}

impl Translator<'_> {
    fn formula(&self, f: &Formula, fresh: &mut FreshNames) -> Result<Formula, FormulaError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Eq(a, b) => {
                let mut side = Vec::new();
                let a = self.term(a, fresh, &mut side)?;
                let b = self.term(b, fresh, &mut side)?;
                close(side, Formula::Eq(a, b))
            }
            Formula::Rel(r, args) => {
                let mut side = Vec::new();
                let args = args.iter().map(|t| self.term(t, fresh, &mut side)).collect::<Result<Vec<_>, _>>()?;
                let def = self.lookup(r)?;
                let atom = match &def.body {
                    DefBody::Formula(body) => body.substitute(&bind(&def.params, args)),
                    DefBody::Term(_) => {
                        return Err(FormulaError::Dictionary(alloc::format!("{r}: relation defined by a term")))
                    }
                };
                close(side, atom)
            }
            Formula::Not(a) => Formula::not(self.formula(a, fresh)?),
            Formula::And(a, b) => Formula::and(self.formula(a, fresh)?, self.formula(b, fresh)?),
            Formula::Or(a, b) => Formula::or(self.formula(a, fresh)?, self.formula(b, fresh)?),
            Formula::Implies(a, b) => Formula::implies(self.formula(a, fresh)?, self.formula(b, fresh)?),
            Formula::Iff(a, b) => Formula::Iff(
                alloc::boxed::Box::new(self.formula(a, fresh)?),
                alloc::boxed::Box::new(self.formula(b, fresh)?),
            ),
            Formula::Quant(q, v, body) => {
                Formula::Quant(*q, v.clone(), alloc::boxed::Box::new(self.formula(body, fresh)?))
            }
        })
    }

    fn lookup(&self, sym: &str) -> Result<&Definition, FormulaError> {
        self.dict.def(self.dir, sym).ok_or_else(|| FormulaError::MissingDefinition(sym.to_string()))
    }

    /// Translates a term; formula-defined symbols push `(z, φ(args, z))`
    /// onto `side` and return the fresh `z`.
    fn term(&self, t: &Term, fresh: &mut FreshNames, side: &mut Vec<(String, Formula)>) -> Result<Term, FormulaError> {
        match t {
            Term::Var(_) | Term::Handle(_) => Ok(t.clone()),
            Term::Const(c) => self.apply(c, Vec::new(), fresh, side),
            Term::App(f, args) => {
                let args = args.iter().map(|a| self.term(a, fresh, side)).collect::<Result<Vec<_>, _>>()?;
                self.apply(f, args, fresh, side)
            }
        }
    }

    fn apply(
        &self,
        sym: &str,
        args: Vec<Term>,
        fresh: &mut FreshNames,
        side: &mut Vec<(String, Formula)>,
    ) -> Result<Term, FormulaError> {
        let def = self.lookup(sym)?;
        match &def.body {
            DefBody::Term(body) => {
                let map = bind(&def.params, args);
                Ok(body.substitute(&|v| map.iter().find(|(k, _)| k == v).map(|(_, t)| t.clone())))
            }
            DefBody::Formula(body) => {
                let z = fresh.next();
                let mut all = args;
                all.push(Term::Var(z.clone()));
                side.push((z.clone(), body.substitute(&bind(&def.params, all))));
                Ok(Term::Var(z))
            }
        }
    }
}

fn bind(params: &[String], args: Vec<Term>) -> Vec<(String, Term)> {
    params.iter().cloned().zip(args).collect()
}

fn close(side: Vec<(String, Formula)>, atom: Formula) -> Formula {
    if side.is_empty() {
        return atom;
    }
    let vars: Vec<String> = side.iter().map(|(z, _)| z.clone()).collect();
    let mut parts: Vec<Formula> = side.into_iter().map(|(_, f)| f).collect();
    parts.push(atom);
    let mut it = parts.into_iter().rev();
    let last = it.next().unwrap();
    let body = it.fold(last, |acc, f| Formula::and(f, acc));
    vars.iter().rev().fold(body, |b, v| Formula::exists(v, b))
}

/// Built-in dictionaries over the primed signature `{0', S', P', A'}` and
/// one with relational successor structure.
pub mod builtin {
    use super::*;

    pub fn primed() -> Signature {
        Signature::new("L'").with_constant("0'").with_function("S'", 1).with_function("P'", 1).with_relation("A'", 1)
    }

    fn build(
        name: &str,
        target: Signature,
        forward: &[(&str, &[&str], &str, bool)],
        backward: &[(&str, &[&str], &str, bool)],
    ) -> DefDictionary {
        let mut d = DefDictionary::new(name, target);
        for (sym, params, body, is_term) in forward {
            d.define(Direction::Forward, sym, params, body, *is_term).expect("builtin forward definition");
        }
        for (sym, params, body, is_term) in backward {
            d.define(Direction::Backward, sym, params, body, *is_term).expect("builtin backward definition");
        }
        d.validate().expect("builtin dictionary");
        d
    }

    pub fn identity() -> DefDictionary {
        build(
            "identity",
            primed(),
            &[
                ("0", &[], "0'", true),
                ("S", &["x"], "(S' x)", true),
                ("P", &["x"], "(P' x)", true),
                ("A", &["x"], "(A' x)", false),
            ],
            &[
                ("0'", &[], "0", true),
                ("S'", &["x"], "(S x)", true),
                ("P'", &["x"], "(P x)", true),
                ("A'", &["x"], "(A x)", false),
            ],
        )
    }

    /// `S'` is the predecessor and `P'` the successor.
    pub fn swap() -> DefDictionary {
        build(
            "swap",
            primed(),
            &[
                ("0", &[], "0'", true),
                ("S", &["x"], "(P' x)", true),
                ("P", &["x"], "(S' x)", true),
                ("A", &["x"], "(A' x)", false),
            ],
            &[
                ("0'", &[], "0", true),
                ("S'", &["x"], "(P x)", true),
                ("P'", &["x"], "(S x)", true),
                ("A'", &["x"], "(A x)", false),
            ],
        )
    }

    /// `A'(x)` holds iff `A(x + 2)`.
    pub fn a_shift() -> DefDictionary {
        build(
            "a-shift",
            primed(),
            &[
                ("0", &[], "0'", true),
                ("S", &["x"], "(S' x)", true),
                ("P", &["x"], "(P' x)", true),
                ("A", &["x"], "(A' (P' (P' x)))", false),
            ],
            &[
                ("0'", &[], "0", true),
                ("S'", &["x"], "(S x)", true),
                ("P'", &["x"], "(P x)", true),
                ("A'", &["x"], "(A (S (S x)))", false),
            ],
        )
    }

    /// Successor recovered from the relations `Q(x, x+2)` and `H(x, x+3)`;
    /// its definition needs one existential quantifier.
    pub fn rel23() -> DefDictionary {
        let target =
            Signature::new("L23").with_constant("z").with_relation("Q", 2).with_relation("H", 2).with_relation("A'", 1);
        build(
            "rel23",
            target,
            &[
                ("0", &[], "z", true),
                ("S", &["x", "y"], "(exists w (and (H x w) (Q y w)))", false),
                ("P", &["x", "y"], "(exists w (and (H y w) (Q x w)))", false),
                ("A", &["x"], "(A' x)", false),
            ],
            &[
                ("z", &[], "0", true),
                ("Q", &["x", "y"], "(= (S (S x)) y)", false),
                ("H", &["x", "y"], "(= (S (S (S x))) y)", false),
                ("A'", &["x"], "(A x)", false),
            ],
        )
    }

    pub fn by_name(name: &str) -> Option<DefDictionary> {
        match name {
            "identity" => Some(identity()),
            "swap" => Some(swap()),
            "a-shift" => Some(a_shift()),
            "rel23" => Some(rel23()),
            _ => None,
        }
    }

    pub const NAMES: &[&str] = &["identity", "swap", "a-shift", "rel23"];
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{radius, radius_in, to_prenex};

    fn unary_f() -> (DefDictionary, Signature) {
        // L-side symbol f with an L'-definition φ(x, y) := R(x, y).
        let lp = Signature::new("Lf").with_relation("R", 2);
        let mut d = DefDictionary::new("f", lp.clone());
        d.forward.push(Definition {
            symbol: "f".into(),
            params: alloc::vec!["x".into(), "y".into()],
            body: DefBody::Formula(parse("(R x y)", &lp).unwrap()),
        });
        (d, lp)
    }

    #[test]
    fn nested_function_translation_introduces_fresh_witnesses() {
        let (d, lp) = unary_f();
        let src = Signature::new("Lsrc").with_function("f", 1);
        let f = parse("(forall x (forall y (= (f (f x)) (f y))))", &src).unwrap();
        let t = d.translate(&f, Direction::Forward).unwrap();
        let want = parse(
            "(forall x (forall y (exists z1 (exists z2 (exists z3 \
             (and (R x z1) (R z1 z2) (R y z3) (= z2 z3)))))))",
            &lp,
        )
        .unwrap();
        assert_eq!(t, want);
    }

    #[test]
    fn fresh_names_skip_used_ones() {
        let (d, lp) = unary_f();
        let src = Signature::new("Lsrc").with_function("f", 1);
        let f = parse("(= (f z1) z2)", &src).unwrap();
        let t = d.translate(&f, Direction::Forward).unwrap();
        assert_eq!(t, parse("(exists z3 (and (R z1 z3) (= z3 z2)))", &lp).unwrap());
    }

    #[test]
    fn identity_round_trip_is_exact() {
        let d = builtin::identity();
        let l = Signature::base();
        let f = parse("(exists y (and (= (S x) y) (A (P y))))", &l).unwrap();
        let fwd = d.translate(&f, Direction::Forward).unwrap();
        assert_eq!(d.translate(&fwd, Direction::Backward).unwrap(), f);
        let qf = parse("(= (S (S x)) (P y))", &l).unwrap();
        let qf_p = d.translate(&qf, Direction::Forward).unwrap();
        assert_eq!(radius_in(&qf_p, &d).unwrap(), radius(&qf).unwrap());
    }

    #[test]
    fn swap_maps_successor_to_predecessor() {
        let d = builtin::swap();
        let f = parse("(= (S' x) y)", &d.target).unwrap();
        let t = d.translate(&f, Direction::Backward).unwrap();
        assert_eq!(t, parse("(= (P x) y)", &Signature::base()).unwrap());
    }

    #[test]
    fn relational_successor_radius() {
        let d = builtin::rel23();
        let phi = d.phi_succ().unwrap();
        assert!(phi.is_prenex());
        assert_eq!(radius_in(&to_prenex(&phi), &d).unwrap(), 10);
    }

    #[test]
    fn builtins_validate() {
        for n in builtin::NAMES {
            builtin::by_name(n).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn missing_symbol_is_reported() {
        let mut d = builtin::identity();
        d.backward.retain(|def| def.symbol != "A'");
        assert_eq!(d.validate(), Err(FormulaError::MissingDefinition("A'".into())));
        let f = parse("(A' x)", &d.target).unwrap();
        assert_eq!(d.translate(&f, Direction::Backward), Err(FormulaError::MissingDefinition("A'".into())));
    }
}
