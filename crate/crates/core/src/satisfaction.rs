//! Deciding existential L'-formulas from a finite set of candidate
//! witnesses, and reducing arbitrary L'-formulas to Boolean combinations of
//! existential ones.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::Cell;

use crate::error::Error;
use crate::formula::{radius, radius_in, to_prenex, DefDictionary, Direction, Formula, FreshNames, Term};
use crate::indiscern::deep_elements;
use crate::model::{r_type, Compiled, Element, Handle, Hidden, ModelFragment, Oracle, RType, Window};

/// The finite witness set `V` and its neighbourhood closure `V'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessKit<T> {
    pub r: u64,
    pub n: usize,
    pub m: usize,
    pub quota: usize,
    pub v: Vec<T>,
    pub v_prime: Vec<T>,
    /// Types with fewer deep representatives than the quota while some
    /// representative is not deep; the kit may then miss witnesses.
    pub shortfalls: Vec<String>,
}

impl<T> WitnessKit<T> {
    pub fn is_adequate(&self) -> bool {
        self.shortfalls.is_empty()
    }
}

/// Picks, for every r-neighbourhood type realised in `window`, the first
/// `(2r+1)(n+m+1)` deep representatives (all of them if there are fewer),
/// plus zero. Fails only if zero is not deep; a type whose deep
/// representatives fall short of the quota is recorded in `shortfalls`.
pub fn build_witness_kit(
    m: &ModelFragment,
    window: &Window,
    r: u64,
    n: usize,
    mq: usize,
) -> Result<WitnessKit<Element>, Error> {
    let quota = (2 * r as usize + 1) * (n + mq + 1);
    if !window.is_deep(m, m.zero(), r) {
        return Err(Error::Kit(alloc::format!("zero is not {r}-deep in the window")));
    }
    let mut total: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    let mut reps: BTreeMap<Vec<bool>, Vec<Element>> = BTreeMap::new();
    for &e in window.elements() {
        let Ok(t) = m.nbhd_type(e, r) else { continue };
        *total.entry(t.clone()).or_insert(0) += 1;
        if window.is_deep(m, e, r) {
            reps.entry(t).or_default().push(e);
        }
    }
    let mut v = alloc::vec![m.zero()];
    let mut shortfalls = Vec::new();
    for (t, count) in &total {
        let deep = reps.get(t).map(Vec::as_slice).unwrap_or(&[]);
        if deep.len() < quota && deep.len() < *count {
            shortfalls.push(alloc::format!(
                "type {} has {} deep of {count} representatives, quota {quota}",
                crate::model::bits_to_string(t),
                deep.len()
            ));
        }
        v.extend(deep.iter().take(quota));
    }
    v.sort();
    v.dedup();
    let mut vp: Vec<Element> = v.iter().flat_map(|&e| (-(r as i64)..=r as i64).map(move |d| e.offset(d))).collect();
    vp.sort();
    vp.dedup();
    Ok(WitnessKit { r, n, m: mq, quota, v, v_prime: vp, shortfalls })
}

impl WitnessKit<Element> {
    /// The same kit in the handle space of an oracle.
    pub fn to_handles(&self, h: &Hidden<'_>) -> Result<WitnessKit<Handle>, Error> {
        let map = |xs: &[Element]| -> Result<Vec<Handle>, Error> {
            let mut out = xs
                .iter()
                .map(|&e| h.handle(e).ok_or_else(|| Error::Kit(alloc::format!("{e} outside the domain"))))
                .collect::<Result<Vec<_>, _>>()?;
            out.sort_unstable();
            Ok(out)
        };
        Ok(WitnessKit {
            r: self.r,
            n: self.n,
            m: self.m,
            quota: self.quota,
            v: map(&self.v)?,
            v_prime: map(&self.v_prime)?,
            shortfalls: self.shortfalls.clone(),
        })
    }
}

/// An oracle, a witness kit in its handle space, and an evaluation counter.
pub struct SatContext<'a, O: Oracle> {
    pub oracle: &'a O,
    pub kit: WitnessKit<Handle>,
    evals: Cell<u64>,
}

impl<'a, O: Oracle> SatContext<'a, O> {
    pub fn new(oracle: &'a O, kit: WitnessKit<Handle>) -> Self {
        SatContext { oracle, kit, evals: Cell::new(0) }
    }

    /// Oracle evaluations performed so far.
    pub fn evals(&self) -> u64 {
        self.evals.get()
    }

    pub(crate) fn eval(&self, q: &O::Query, args: &[Handle]) -> Result<bool, Error> {
        self.evals.set(self.evals.get() + 1);
        Ok(self.oracle.eval(q, args)?)
    }
}

fn sorted_union(a: &[Handle], b: &[Handle]) -> Vec<Handle> {
    let mut out: Vec<Handle> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Truth of the prenex existential L'-formula `f` at `args` (one per free
/// variable, sorted), searching witnesses in `U ∪ V'` in handle order.
pub fn sat_existential<O: Oracle>(
    ctx: &SatContext<'_, O>,
    f: &Formula,
    args: &[Handle],
    u: &[Handle],
) -> Result<bool, Error> {
    if !f.is_existential() {
        return Err(Error::Precondition("formula is not prenex existential".into()));
    }
    let (prefix, matrix) = f.prenex_parts().expect("prenex");
    let mut vars = f.free_var_list();
    if vars.len() != args.len() {
        return Err(Error::Precondition(alloc::format!("{} free variables, {} arguments", vars.len(), args.len())));
    }
    vars.extend(prefix.iter().map(|(_, v)| String::from(*v)));
    let q = ctx.oracle.prepare(matrix, &vars)?;
    let cands = sorted_union(u, &ctx.kit.v_prime);
    let k = prefix.len();
    let mut tuple: Vec<Handle> = args.to_vec();
    if k == 0 {
        return ctx.eval(&q, &tuple);
    }
    if cands.is_empty() {
        return Ok(false);
    }
    let mut idx = alloc::vec![0usize; k];
    tuple.resize(args.len() + k, 0);
    loop {
        for (j, &i) in idx.iter().enumerate() {
            tuple[args.len() + j] = cands[i];
        }
        if ctx.eval(&q, &tuple)? {
            return Ok(true);
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(false);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub component: usize,
    pub positive: bool,
}

/// A Boolean combination (in disjunctive normal form) of existential
/// L'-formulas equivalent to a given formula on deep tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatRadius {
    pub formula: Formula,
    /// Free variables of `formula`, sorted; arguments follow this order.
    pub vars: Vec<String>,
    pub params: Vec<Handle>,
    pub components: Vec<Formula>,
    pub dnf: Vec<Vec<Literal>>,
    /// Largest component radius.
    pub value: u64,
    /// Radius of the L-translation used to split tuples into types.
    pub type_radius: u64,
}

impl SatRadius {
    pub fn max_quantifiers(&self) -> usize {
        self.components.iter().map(Formula::quantifier_count).max().unwrap_or(0)
    }

    /// Kit dimensions `(r, n, m)` adequate for every component.
    pub fn kit_shape(&self) -> (u64, usize, usize) {
        (self.value, self.vars.len() + self.params.len(), self.max_quantifiers())
    }

    /// The decomposition as one L'-formula.
    pub fn to_formula(&self) -> Formula {
        Formula::disjunction(
            self.dnf
                .iter()
                .map(|c| {
                    Formula::conjunction(
                        c.iter()
                            .map(|l| {
                                let f = self.components[l.component].clone();
                                if l.positive {
                                    f
                                } else {
                                    Formula::not(f)
                                }
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Decomposes the L'-formula `f`. Quantifier-free formulas are their own
/// decomposition; otherwise the satisfying r-types of the L-translation
/// over deep tuples of `window` are turned, literal by literal, back into
/// L'. Handles in `f` are resolved by `resolve` and held fixed.
pub fn satisfaction_radius(
    f: &Formula,
    m: &ModelFragment,
    d: &DefDictionary,
    window: &Window,
    resolve: &dyn Fn(Handle) -> Option<Element>,
) -> Result<SatRadius, Error> {
    d.target.check(f)?;
    let vars = f.free_var_list();
    let params: Vec<Handle> = f.handles().into_iter().collect();
    if f.is_quantifier_free() {
        let value = radius_in(f, d)?;
        return Ok(SatRadius {
            formula: f.clone(),
            vars,
            params,
            components: alloc::vec![f.clone()],
            dnf: alloc::vec![alloc::vec![Literal { component: 0, positive: true }]],
            value,
            type_radius: value,
        });
    }
    let g = to_prenex(&d.translate(f, Direction::Backward)?);
    let r = radius(&g)?;
    let mut fresh = FreshNames::new("p", g.all_vars());
    let pvars: Vec<String> = params.iter().map(|_| fresh.next()).collect();
    let pelems: Vec<Element> = params
        .iter()
        .map(|&h| resolve(h).ok_or(Error::Model(crate::error::ModelError::UnknownHandle(h))))
        .collect::<Result<_, _>>()?;
    let c = Compiled::new(m, &g, &vars, &|h| resolve(h))?;
    let mut types: BTreeMap<RType, (bool, Vec<Element>)> = BTreeMap::new();
    for t in crate::indiscern::product(&deep_elements(m, window, r), vars.len()) {
        let truth = c.eval(m, &t, window)?;
        let mut full = t.clone();
        full.extend_from_slice(&pelems);
        let ty = r_type(m, &full, r)?;
        match types.get(&ty) {
            Some((prev, other)) if *prev != truth => {
                return Err(Error::Indiscernability {
                    formula: alloc::format!("{g}"),
                    left: alloc::format!("{other:?}"),
                    right: alloc::format!("{t:?}"),
                })
            }
            Some(_) => {}
            None => {
                types.insert(ty, (truth, t));
            }
        }
    }
    let mut all_vars = vars.clone();
    all_vars.extend(pvars.iter().cloned());
    let back: Vec<(String, Term)> = pvars.iter().cloned().zip(params.iter().map(|&h| Term::Handle(h))).collect();
    let mut index: BTreeMap<Formula, usize> = BTreeMap::new();
    let mut components = Vec::new();
    let mut dnf = Vec::new();
    for (ty, (truth, _)) in &types {
        if !truth {
            continue;
        }
        let mut conj = Vec::new();
        for (atom, positive) in ty.literals(&all_vars) {
            let atom = to_prenex(&d.translate(&atom.substitute(&back), Direction::Forward)?);
            let id = *index.entry(atom.clone()).or_insert_with(|| {
                components.push(atom);
                components.len() - 1
            });
            conj.push(Literal { component: id, positive });
        }
        conj.sort();
        conj.dedup();
        dnf.push(conj);
    }
    let mut value = 0;
    for comp in &components {
        if !comp.is_existential() {
            return Err(Error::Precondition(alloc::format!("component {comp} is not existential")));
        }
        value = value.max(radius_in(comp, d)?);
    }
    Ok(SatRadius { formula: f.clone(), vars, params, components, dnf, value, type_radius: r })
}

/// Evaluates the decomposition at `args`, deciding each component with
/// [`sat_existential`] over `U` together with the parameter support.
pub fn sat_general<O: Oracle>(
    ctx: &SatContext<'_, O>,
    sr: &SatRadius,
    args: &[Handle],
    u: &[Handle],
    param_support: &[Handle],
) -> Result<bool, Error> {
    if args.len() != sr.vars.len() {
        return Err(Error::Precondition(alloc::format!("{} free variables, {} arguments", sr.vars.len(), args.len())));
    }
    let u = sorted_union(u, param_support);
    let mut memo: Vec<Option<bool>> = alloc::vec![None; sr.components.len()];
    for conj in &sr.dnf {
        let mut ok = true;
        for lit in conj {
            let v = match memo[lit.component] {
                Some(v) => v,
                None => {
                    let comp = &sr.components[lit.component];
                    let cargs: Vec<Handle> = comp
                        .free_var_list()
                        .iter()
                        .map(|v| args[sr.vars.iter().position(|w| w == v).expect("component variable")])
                        .collect();
                    let v = sat_existential(ctx, comp, &cargs, &u)?;
                    memo[lit.component] = Some(v);
                    v
                }
            };
            if v != lit.positive {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The r-neighbourhoods of the parameters of `sr`, as handles.
pub fn param_support(h: &Hidden<'_>, params: &[Handle], r: u64) -> Result<Vec<Handle>, Error> {
    let mut out = BTreeSet::new();
    for &p in params {
        let e = h.element(p).ok_or(crate::error::ModelError::UnknownHandle(p))?;
        for d in -(r as i64)..=r as i64 {
            if let Some(x) = h.handle(e.offset(d)) {
                out.insert(x);
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn scan<O: Oracle>(ctx: &SatContext<'_, O>, q: &O::Query, fixed: &[Option<Handle>]) -> Result<Option<Handle>, Error> {
    for h in ctx.oracle.handles() {
        let args: Vec<Handle> = fixed.iter().map(|x| x.unwrap_or(h)).collect();
        if ctx.eval(q, &args)? {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

/// Reads `A(0) .. A(n)` through the oracle alone: zero is found by scanning
/// for `φ_0`, neighbours by scanning for `φ_S` (both must be
/// quantifier-free), and each label is decided by `sat_general` on the
/// decomposition of `φ_A` with `U` the walked segment.
pub fn warmup_compute_a<O: Oracle>(
    ctx: &SatContext<'_, O>,
    phi_0: &Formula,
    phi_s: &Formula,
    sr_a: &SatRadius,
    n: usize,
) -> Result<Vec<bool>, Error> {
    if !phi_0.is_quantifier_free() || !phi_s.is_quantifier_free() {
        return Err(Error::Precondition("zero and successor need quantifier-free definitions".into()));
    }
    let q0 = ctx.oracle.prepare(phi_0, &phi_0.free_var_list())?;
    let qs = ctx.oracle.prepare(phi_s, &phi_s.free_var_list())?;
    let zero =
        scan(ctx, &q0, &[None])?.ok_or_else(|| Error::Precondition("no element satisfies the zero formula".into()))?;
    let margin = sr_a.value as usize;
    let mut right = alloc::vec![zero];
    for _ in 0..n + margin {
        let cur = *right.last().expect("nonempty");
        let next =
            scan(ctx, &qs, &[Some(cur), None])?.ok_or_else(|| Error::Precondition("walk left the domain".into()))?;
        right.push(next);
    }
    let mut u = right.clone();
    let mut cur = zero;
    for _ in 0..margin {
        cur = scan(ctx, &qs, &[None, Some(cur)])?.ok_or_else(|| Error::Precondition("walk left the domain".into()))?;
        u.push(cur);
    }
    u.sort_unstable();
    u.dedup();
    right[..=n].iter().map(|&p| sat_general(ctx, sr_a, &[p], &u, &[])).collect()
}
