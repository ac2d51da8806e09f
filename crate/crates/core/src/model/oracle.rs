use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval::Compiled;
use super::fragment::{Element, ModelFragment};
use super::window::Window;
use crate::error::{FormulaError, ModelError};
use crate::formula::{DefBody, DefDictionary, Direction, Formula, Signature, SymbolKind, Term};

pub type Handle = u32;

/// Oracle access to a structure: enumerate elements, and evaluate
/// quantifier-free formulas at handle assignments.
pub trait Oracle {
    type Query;

    fn signature(&self) -> &Signature;

    /// The `i`-th enumerated handle, or `None` once enumeration is exhausted.
    fn enumerate(&self, i: usize) -> Option<Handle>;

    /// Prepares a quantifier-free formula whose free variables are bound,
    /// in order, to `vars`.
    fn prepare(&self, f: &Formula, vars: &[String]) -> Result<Self::Query, ModelError>;

    fn eval(&self, q: &Self::Query, args: &[Handle]) -> Result<bool, ModelError>;

    /// All handles in enumeration order.
    fn handles(&self) -> Vec<Handle> {
        (0..).map_while(|i| self.enumerate(i)).collect()
    }

    /// Convenience: prepare and evaluate once.
    fn check(&self, f: &Formula, vars: &[String], args: &[Handle]) -> Result<bool, ModelError> {
        let q = self.prepare(f, vars)?;
        self.eval(&q, args)
    }
}

/// A fragment presented as an L'-structure through a dictionary. Elements of
/// the domain window are hidden behind seed-permuted handles.
#[derive(Clone, Debug)]
pub struct OracleModel {
    fragment: ModelFragment,
    dict: DefDictionary,
    domain: Window,
    elem_of: Vec<Element>,
    handle_of: Vec<Option<Handle>>,
    seed: u64,
}

pub struct OracleQuery {
    compiled: Compiled,
}

impl OracleModel {
    /// Builds the oracle over `domain` after checking the dictionary there.
    pub fn new(fragment: ModelFragment, dict: DefDictionary, domain: Window, seed: u64) -> Result<Self, ModelError> {
        dict.validate()?;
        check_dictionary(&fragment, &dict, &domain)?;
        let mut order: Vec<Element> = domain.elements().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let mut handle_of = alloc::vec![None; fragment.len()];
        for (h, e) in order.iter().enumerate() {
            handle_of[fragment.id(*e).expect("domain element")] = Some(h as Handle);
        }
        Ok(OracleModel { fragment, dict, domain, elem_of: order, handle_of, seed })
    }

    pub fn len(&self) -> usize {
        self.elem_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elem_of.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dictionary(&self) -> &DefDictionary {
        &self.dict
    }

    /// Privileged access for the verification harness.
    pub fn hidden(&self) -> Hidden<'_> {
        Hidden { o: self }
    }
}

/// Ground-truth view of an [`OracleModel`].
#[derive(Clone, Copy)]
pub struct Hidden<'a> {
    o: &'a OracleModel,
}

impl<'a> Hidden<'a> {
    pub fn fragment(&self) -> &'a ModelFragment {
        &self.o.fragment
    }

    pub fn domain(&self) -> &'a Window {
        &self.o.domain
    }

    pub fn element(&self, h: Handle) -> Option<Element> {
        self.o.elem_of.get(h as usize).copied()
    }

    pub fn handle(&self, e: Element) -> Option<Handle> {
        self.o.fragment.id(e).and_then(|i| self.o.handle_of[i])
    }

    pub fn elements(&self, hs: &[Handle]) -> Result<Vec<Element>, ModelError> {
        hs.iter().map(|&h| self.element(h).ok_or(ModelError::UnknownHandle(h))).collect()
    }

    /// Truth of an L'-formula (quantifiers over the domain) at handles.
    pub fn truth(&self, f: &Formula, vars: &[String], args: &[Handle]) -> Result<bool, ModelError> {
        let lf = self.o.dict.translate(f, Direction::Backward)?;
        let tuple = self.elements(args)?;
        let c = Compiled::new(&self.o.fragment, &lf, vars, &|h| self.element(h))?;
        c.eval(&self.o.fragment, &tuple, &self.o.domain)
    }

    /// Truth of an L-formula at handles.
    pub fn truth_l(&self, f: &Formula, vars: &[String], args: &[Handle]) -> Result<bool, ModelError> {
        let tuple = self.elements(args)?;
        let c = Compiled::new(&self.o.fragment, f, vars, &|h| self.element(h))?;
        c.eval(&self.o.fragment, &tuple, &self.o.domain)
    }

    /// Signed distance between the elements behind two handles.
    pub fn distance(&self, a: Handle, b: Handle) -> Option<super::SignedDistance> {
        Some(super::SignedDistance::between(self.element(a)?, self.element(b)?))
    }
}

impl Oracle for OracleModel {
    type Query = OracleQuery;

    fn signature(&self) -> &Signature {
        &self.dict.target
    }

    fn enumerate(&self, i: usize) -> Option<Handle> {
        (i < self.elem_of.len()).then_some(i as Handle)
    }

    fn prepare(&self, f: &Formula, vars: &[String]) -> Result<OracleQuery, ModelError> {
        if !f.is_quantifier_free() {
            return Err(FormulaError::NotQuantifierFree.into());
        }
        self.dict.target.check(f)?;
        let lf = self.dict.translate(f, Direction::Backward)?;
        let hidden = self.hidden();
        let compiled = Compiled::new(&self.fragment, &lf, vars, &|h| hidden.element(h))?;
        Ok(OracleQuery { compiled })
    }

    fn eval(&self, q: &OracleQuery, args: &[Handle]) -> Result<bool, ModelError> {
        if args.len() != q.compiled.arity() {
            return Err(ModelError::Arity { expected: q.compiled.arity(), found: args.len() });
        }
        let tuple = self.hidden().elements(args)?;
        q.compiled.eval(&self.fragment, &tuple, &self.domain)
    }
}

/// Checks on `window` that the backward definitions of function and constant
/// symbols are functional and total, and that each forward definition,
/// translated back, agrees with the base symbol it defines.
pub fn check_dictionary(m: &ModelFragment, d: &DefDictionary, window: &Window) -> Result<(), ModelError> {
    let elems = window.elements();
    let var = |i: usize| alloc::format!("v{i}");
    for def in &d.backward {
        let body = match &def.body {
            DefBody::Formula(f) => f,
            DefBody::Term(_) => continue,
        };
        let kind = d.target.lookup(&def.symbol);
        let arity = match kind {
            Some(SymbolKind::Constant) => 0,
            Some(SymbolKind::Function(a)) => a,
            _ => continue,
        };
        let c = Compiled::new(m, body, &def.params, &|_| None)?;
        let mut args = alloc::vec![0usize; arity];
        loop {
            let mut tuple: Vec<Element> = args.iter().map(|&i| elems[i]).collect();
            tuple.push(m.zero());
            let mut hits = 0;
            for &y in elems {
                tuple[arity] = y;
                if c.eval(m, &tuple, window)? {
                    hits += 1;
                }
            }
            if hits != 1 {
                return Err(ModelError::Definition(alloc::format!(
                    "{} has {hits} values at {:?}",
                    def.symbol,
                    &tuple[..arity]
                )));
            }
            if !advance(&mut args, elems.len()) {
                break;
            }
        }
    }
    // Round trip: the base symbol and its translated definition agree.
    for (sym, arity) in [("0", 0usize), ("S", 1), ("P", 1)] {
        let vars: Vec<String> = (0..=arity).map(var).collect();
        let vrefs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let atom = match arity {
            0 => Formula::eq(Term::zero(), Term::Var(vars[0].clone())),
            _ => Formula::eq(Term::app(sym, alloc::vec![Term::Var(vars[0].clone())]), Term::Var(vars[1].clone())),
        };
        let back = d.translate(&d.graph_formula(Direction::Forward, sym, &vrefs)?, Direction::Backward)?;
        let near_only = arity == 1 && !back.is_quantifier_free();
        agree(m, window, &atom, &back, &vars, sym, near_only)?;
    }
    let x = alloc::vec![var(0)];
    let back = d.translate(&d.graph_formula(Direction::Forward, "A", &[x[0].as_str()])?, Direction::Backward)?;
    agree(m, window, &Formula::label(Term::Var(x[0].clone())), &back, &x, "A", false)?;
    Ok(())
}

fn agree(
    m: &ModelFragment,
    window: &Window,
    lhs: &Formula,
    rhs: &Formula,
    vars: &[String],
    sym: &str,
    near_only: bool,
) -> Result<(), ModelError> {
    let a = Compiled::new(m, lhs, vars, &|_| None)?;
    let b = Compiled::new(m, rhs, vars, &|_| None)?;
    let elems = window.elements();
    let mut args = alloc::vec![0usize; vars.len()];
    loop {
        let tuple: Vec<Element> = args.iter().map(|&i| elems[i]).collect();
        // quantified graph definitions are only checked near the diagonal
        let skip = near_only && super::SignedDistance::between(tuple[0], tuple[1]).within(2).is_none();
        if !skip && a.eval(m, &tuple, window)? != b.eval(m, &tuple, window)? {
            return Err(ModelError::Definition(alloc::format!("{sym} disagrees at {tuple:?}")));
        }
        if !advance(&mut args, elems.len()) {
            return Ok(());
        }
    }
}

fn advance(args: &mut [usize], n: usize) -> bool {
    for a in args.iter_mut().rev() {
        *a += 1;
        if *a < n {
            return true;
        }
        *a = 0;
    }
    false
}
