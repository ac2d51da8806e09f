use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::fragment::{Element, ModelFragment};
use super::window::Window;
use crate::error::ModelError;
use crate::formula::{Formula, Quantifier, Term, LABEL, PRED, SUCC, ZERO};

/// Values for free variables and handle parameters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub vars: BTreeMap<String, Element>,
    pub handles: BTreeMap<u32, Element>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, v: &str, e: Element) -> Self {
        self.vars.insert(v.to_string(), e);
        self
    }

    pub fn handle(mut self, h: u32, e: Element) -> Self {
        self.handles.insert(h, e);
        self
    }

    /// Binds `vars[i]` to `tuple[i]`.
    pub fn from_tuple(vars: &[String], tuple: &[Element]) -> Self {
        Assignment { vars: vars.iter().cloned().zip(tuple.iter().copied()).collect(), handles: BTreeMap::new() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Base {
    Slot(usize),
    Elem(Element),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct CTerm {
    base: Base,
    off: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Node {
    Const(bool),
    Eq(CTerm, CTerm),
    Label(CTerm),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Quant(Quantifier, usize, Box<Node>),
}

/// An L-formula compiled against a fragment: free variables become slots
/// `0..arity`, bound variables get further slots, and each term becomes a
/// base plus an integer offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiled {
    root: Node,
    arity: usize,
    slots: usize,
    quantifier_free: bool,
}

impl Compiled {
    /// `vars` fixes the slot order of the free variables; every free
    /// variable of `f` must appear in it. Handles are resolved through
    /// `handles`.
    pub fn new(
        m: &ModelFragment,
        f: &Formula,
        vars: &[String],
        handles: &dyn Fn(u32) -> Option<Element>,
    ) -> Result<Self, ModelError> {
        let mut c = Compiler { zero: m.zero(), scope: vars.to_vec(), next: vars.len(), max: vars.len(), handles };
        let root = c.node(&f.desugar())?;
        Ok(Compiled { root, arity: vars.len(), slots: c.max, quantifier_free: f.is_quantifier_free() })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_free
    }

    /// Evaluates at `tuple` with quantifiers ranging over `window`.
    pub fn eval(&self, m: &ModelFragment, tuple: &[Element], window: &Window) -> Result<bool, ModelError> {
        if tuple.len() < self.arity {
            return Err(ModelError::Arity { expected: self.arity, found: tuple.len() });
        }
        let mut env = Vec::with_capacity(self.slots);
        env.extend_from_slice(&tuple[..self.arity]);
        env.resize(self.slots, m.zero());
        eval_node(&self.root, m, &mut env, Some(window.elements()))
    }

    pub fn eval_qf(&self, m: &ModelFragment, tuple: &[Element]) -> Result<bool, ModelError> {
        if tuple.len() < self.arity {
            return Err(ModelError::Arity { expected: self.arity, found: tuple.len() });
        }
        let mut env = Vec::with_capacity(self.slots);
        env.extend_from_slice(&tuple[..self.arity]);
        env.resize(self.slots, m.zero());
        eval_node(&self.root, m, &mut env, None)
    }
}

struct Compiler<'a> {
    zero: Element,
    scope: Vec<String>,
    next: usize,
    max: usize,
    handles: &'a dyn Fn(u32) -> Option<Element>,
}

impl Compiler<'_> {
    fn term(&self, t: &Term) -> Result<CTerm, ModelError> {
        match t {
            Term::Var(v) => {
                let slot =
                    self.scope.iter().rposition(|s| s == v).ok_or_else(|| ModelError::UnboundVariable(v.clone()))?;
                Ok(CTerm { base: Base::Slot(slot), off: 0 })
            }
            Term::Const(c) if c == ZERO => Ok(CTerm { base: Base::Elem(self.zero), off: 0 }),
            Term::Handle(h) => {
                let e = (self.handles)(*h).ok_or(ModelError::UnknownHandle(*h))?;
                Ok(CTerm { base: Base::Elem(e), off: 0 })
            }
            Term::App(f, args) if args.len() == 1 && (f == SUCC || f == PRED) => {
                let inner = self.term(&args[0])?;
                let step = if f == SUCC { 1 } else { -1 };
                Ok(CTerm { base: inner.base, off: inner.off + step })
            }
            Term::Const(s) | Term::App(s, _) => Err(ModelError::Unsupported(alloc::format!("symbol '{s}' outside L"))),
        }
    }

    fn node(&mut self, f: &Formula) -> Result<Node, ModelError> {
        Ok(match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::Eq(a, b) => Node::Eq(self.term(a)?, self.term(b)?),
            Formula::Rel(r, args) if r == LABEL && args.len() == 1 => Node::Label(self.term(&args[0])?),
            Formula::Rel(r, _) => return Err(ModelError::Unsupported(alloc::format!("relation '{r}' outside L"))),
            Formula::Not(a) => Node::Not(Box::new(self.node(a)?)),
            Formula::And(a, b) => Node::And(Box::new(self.node(a)?), Box::new(self.node(b)?)),
            Formula::Or(a, b) => Node::Or(Box::new(self.node(a)?), Box::new(self.node(b)?)),
            Formula::Implies(..) | Formula::Iff(..) => self.node(&f.desugar())?,
            Formula::Quant(q, v, body) => {
                // scope index and slot index coincide
                let slot = self.next;
                self.next += 1;
                self.max = self.max.max(self.next);
                self.scope.push(v.clone());
                let body = self.node(body);
                self.scope.pop();
                self.next -= 1;
                Node::Quant(*q, slot, Box::new(body?))
            }
        })
    }
}

fn value(t: &CTerm, env: &[Element]) -> Element {
    match t.base {
        Base::Slot(s) => env[s].offset(t.off),
        Base::Elem(e) => e.offset(t.off),
    }
}

fn eval_node(
    n: &Node,
    m: &ModelFragment,
    env: &mut Vec<Element>,
    window: Option<&[Element]>,
) -> Result<bool, ModelError> {
    match n {
        Node::Const(b) => Ok(*b),
        Node::Eq(a, b) => Ok(value(a, env) == value(b, env)),
        Node::Label(t) => m.label(value(t, env)),
        Node::Not(a) => Ok(!eval_node(a, m, env, window)?),
        Node::And(a, b) => Ok(eval_node(a, m, env, window)? && eval_node(b, m, env, window)?),
        Node::Or(a, b) => Ok(eval_node(a, m, env, window)? || eval_node(b, m, env, window)?),
        Node::Quant(q, slot, body) => {
            let w = window.ok_or(ModelError::Formula(crate::error::FormulaError::NotQuantifierFree))?;
            let want = *q == Quantifier::Exists;
            for &e in w {
                env[*slot] = e;
                if eval_node(body, m, env, window)? == want {
                    return Ok(want);
                }
            }
            Ok(!want)
        }
    }
}

fn resolve(asg: &Assignment) -> (Vec<String>, Vec<Element>) {
    (asg.vars.keys().cloned().collect(), asg.vars.values().copied().collect())
}

/// Tarskian evaluation of a quantifier-free L-formula.
pub fn eval_qf(m: &ModelFragment, f: &Formula, asg: &Assignment) -> Result<bool, ModelError> {
    if !f.is_quantifier_free() {
        return Err(ModelError::Formula(crate::error::FormulaError::NotQuantifierFree));
    }
    let (vars, tuple) = resolve(asg);
    Compiled::new(m, f, &vars, &|h| asg.handles.get(&h).copied())?.eval_qf(m, &tuple)
}

/// Evaluation with every quantifier relativised to `window`.
pub fn eval_windowed(m: &ModelFragment, f: &Formula, asg: &Assignment, window: &Window) -> Result<bool, ModelError> {
    let (vars, tuple) = resolve(asg);
    Compiled::new(m, f, &vars, &|h| asg.handles.get(&h).copied())?.eval(m, &tuple, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Signature};
    use crate::model::ChainInterval;

    fn frag() -> ModelFragment {
        let a = ChainInterval::from_bits("a", -3, "0001011").unwrap();
        let b = ChainInterval::from_bits("b", 0, "000").unwrap();
        ModelFragment::new(alloc::vec![a, b], "a", 0).unwrap()
    }

    fn p(s: &str) -> Formula {
        parse(s, &Signature::base()).unwrap()
    }

    #[test]
    fn quantifier_free_atoms() {
        let m = frag();
        assert!(eval_qf(&m, &p("(A 0)"), &Assignment::new()).unwrap());
        let a = Element::new(0, 1);
        let asg = Assignment::new().bind("x", a).bind("y", a.offset(1));
        assert!(eval_qf(&m, &p("(= (S x) y)"), &asg).unwrap());
        let asg = Assignment::new().bind("x", a).bind("y", Element::new(1, 0));
        assert!(!eval_qf(&m, &p("(= (P x) y)"), &asg).unwrap());
        assert_eq!(
            eval_qf(&m, &p("(A (lit 9))"), &Assignment::new()),
            Err(ModelError::InteriorViolation { chain: 0, pos: 9 })
        );
        let asg = Assignment::new().handle(3, Element::new(0, 2));
        assert!(eval_qf(&m, &p("(A (handle 3))"), &asg).unwrap());
    }

    #[test]
    fn windowed_quantifiers() {
        let m = frag();
        let full = Window::full(&m);
        assert!(eval_windowed(&m, &p("(exists x (A x))"), &Assignment::new(), &full).unwrap());
        let zeros = Window::from_elements(&m, (0..3).map(|p| Element::new(1, p))).unwrap();
        assert!(!eval_windowed(&m, &p("(exists x (A x))"), &Assignment::new(), &zeros).unwrap());
        assert!(eval_windowed(&m, &p("(forall x (not (A x)))"), &Assignment::new(), &zeros).unwrap());
    }

    #[test]
    fn shadowing_uses_innermost_binder() {
        let m = frag();
        let w = Window::full(&m);
        let f = p("(exists x (and (A x) (exists x (not (A x)))))");
        assert!(eval_windowed(&m, &f, &Assignment::new(), &w).unwrap());
        let g = p("(forall x (exists y (and (= x y) (exists x (not (= x y))))))");
        assert!(eval_windowed(&m, &g, &Assignment::new(), &w).unwrap());
    }
}
