//! Mutual algebraicity decided exactly on a finite window, disjoint
//! families, and the rewriting of a DNF into a mutually algebraic formula
//! it implies.
//!
//! Handles in formulas handled here name fragment elements by dense id
//! (see [`element_handle`]).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::formula::{Formula, Term};
use crate::indiscern::product;
use crate::model::{Compiled, Element, ModelFragment, Window};

pub fn element_handle(m: &ModelFragment, e: Element) -> Option<u32> {
    m.id(e).map(|i| i as u32)
}

pub fn fragment_resolver(m: &ModelFragment) -> impl Fn(u32) -> Option<Element> + '_ {
    move |h| m.element(h as usize)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaWitness {
    /// Smallest bound that works.
    pub k: usize,
    pub arity: usize,
    pub satisfying: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaCounterexample {
    /// Coordinates held fixed.
    pub fixed: Vec<usize>,
    pub values: Vec<Element>,
    pub completions: Vec<Vec<Element>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaVerdict {
    Yes(MaWitness),
    No(MaCounterexample),
}

impl MaVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, MaVerdict::Yes(_))
    }
}

/// Free variables (sorted) and the tuples of `window` satisfying `f`.
pub fn satisfying_tuples(
    m: &ModelFragment,
    f: &Formula,
    window: &Window,
    resolve: &dyn Fn(u32) -> Option<Element>,
) -> Result<(Vec<String>, Vec<Vec<Element>>), Error> {
    let vars = f.free_var_list();
    let c = Compiled::new(m, f, &vars, resolve)?;
    let mut out = Vec::new();
    for t in product(window.elements(), vars.len()) {
        if c.eval(m, &t, window)? {
            out.push(t);
        }
    }
    Ok((vars, out))
}

/// Fixed coordinates and their values.
pub type Split = (Vec<usize>, Vec<Element>);

/// Largest number of completions of a partial tuple, over every split of
/// the coordinates into a nonempty fixed part and a nonempty free part,
/// with a split and partial tuple attaining it.
pub fn completion_bound(arity: usize, sat: &[Vec<Element>]) -> (usize, Option<Split>) {
    let mut best = (0, None);
    if arity < 2 {
        return best;
    }
    for mask in 1..(1u32 << arity) - 1 {
        let fixed: Vec<usize> = (0..arity).filter(|i| mask >> i & 1 == 1).collect();
        let mut counts: BTreeMap<Vec<Element>, usize> = BTreeMap::new();
        for t in sat {
            *counts.entry(fixed.iter().map(|&i| t[i]).collect()).or_insert(0) += 1;
        }
        for (vals, c) in counts {
            if c > best.0 {
                best = (c, Some((fixed.clone(), vals)));
            }
        }
    }
    best
}

/// Decides on `window` whether every split of the free variables leaves at
/// most `k` completions.
pub fn is_mutually_algebraic(
    m: &ModelFragment,
    f: &Formula,
    window: &Window,
    k: usize,
    resolve: &dyn Fn(u32) -> Option<Element>,
) -> Result<MaVerdict, Error> {
    let (vars, sat) = satisfying_tuples(m, f, window, resolve)?;
    Ok(verdict(vars.len(), &sat, k))
}

fn verdict(arity: usize, sat: &[Vec<Element>], k: usize) -> MaVerdict {
    let (best, at) = completion_bound(arity, sat);
    match at {
        Some((fixed, values)) if best > k => {
            let completions =
                sat.iter().filter(|t| fixed.iter().zip(&values).all(|(&i, v)| t[i] == *v)).cloned().collect();
            MaVerdict::No(MaCounterexample { fixed, values, completions })
        }
        _ => MaVerdict::Yes(MaWitness { k: best, arity, satisfying: sat.len() }),
    }
}

/// True when the verdicts on `small` and `large` agree.
pub fn ma_stable(
    m: &ModelFragment,
    f: &Formula,
    small: &Window,
    large: &Window,
    k: usize,
    resolve: &dyn Fn(u32) -> Option<Element>,
) -> Result<bool, Error> {
    Ok(is_mutually_algebraic(m, f, small, k, resolve)?.is_yes()
        == is_mutually_algebraic(m, f, large, k, resolve)?.is_yes())
}

/// Greedy pairwise-disjoint subfamily, scanning in lexicographic order.
pub fn greedy_disjoint(sat: &[Vec<Element>]) -> Vec<Vec<Element>> {
    let mut used: Vec<Element> = Vec::new();
    let mut out = Vec::new();
    for t in sat {
        if t.iter().all(|e| !used.contains(e)) {
            used.extend_from_slice(t);
            out.push(t.clone());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointReport {
    pub family: Vec<Vec<Element>>,
    pub threshold: usize,
    /// The family reaches the threshold, standing in for infinitude.
    pub large: bool,
}

/// Greedy disjoint family of solutions of `f`, compared with `3·k·arity`.
pub fn disjoint_family(
    m: &ModelFragment,
    f: &Formula,
    window: &Window,
    k: usize,
    resolve: &dyn Fn(u32) -> Option<Element>,
) -> Result<DisjointReport, Error> {
    let (vars, sat) = satisfying_tuples(m, f, window, resolve)?;
    let family = greedy_disjoint(&sat);
    let threshold = (3 * k * vars.len()).max(1);
    Ok(DisjointReport { large: family.len() >= threshold, family, threshold })
}

/// One disjunct `⋀ pos ∧ ⋀ ¬neg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disjunct {
    pub pos: Vec<Formula>,
    pub neg: Vec<Formula>,
}

impl Disjunct {
    pub fn to_formula(&self) -> Formula {
        let mut parts = self.pos.clone();
        parts.extend(self.neg.iter().cloned().map(Formula::not));
        Formula::conjunction(parts)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaPart {
    /// Solutions admit only a small disjoint family; spelled out.
    pub finite: bool,
    pub formula: Formula,
    pub satisfying: usize,
    pub family: usize,
    /// Completion bound of this part, if within its budget.
    pub ma_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qe1Result {
    pub vars: Vec<String>,
    pub gamma: Formula,
    pub parts: Vec<GammaPart>,
    pub implication_holds: bool,
    pub gamma_bound: usize,
    pub budget: usize,
}

impl Qe1Result {
    pub fn ok(&self) -> bool {
        self.implication_holds && self.gamma_bound <= self.budget && self.parts.iter().all(|p| p.ma_bound.is_some())
    }
}

/// Rewrites `⋁ disjuncts` into `γ = ⋁ γ_i`: a disjunct with few disjoint
/// solutions becomes the list of its solutions (as element handles),
/// otherwise it is replaced by its positive part. Checks on `window` that
/// the input implies `γ` and that `γ` is mutually algebraic within the
/// summed budgets.
pub fn qe1_construct(m: &ModelFragment, disjuncts: &[Disjunct], window: &Window, k: usize) -> Result<Qe1Result, Error> {
    let resolve = fragment_resolver(m);
    let phi = Formula::disjunction(disjuncts.iter().map(Disjunct::to_formula).collect());
    let vars = phi.free_var_list();
    let n = vars.len();
    let threshold = (3 * k * n).max(1);
    let eval_all = |f: &Formula| -> Result<Vec<Vec<Element>>, Error> {
        let c = Compiled::new(m, f, &vars, &resolve)?;
        let mut out = Vec::new();
        for t in product(window.elements(), n) {
            if c.eval(m, &t, window)? {
                out.push(t);
            }
        }
        Ok(out)
    };
    let mut parts = Vec::new();
    let mut budget = 0;
    for d in disjuncts {
        let sols = eval_all(&d.to_formula())?;
        let family = greedy_disjoint(&sols).len();
        if family < threshold {
            let formula = Formula::disjunction(
                sols.iter()
                    .map(|t| {
                        Formula::conjunction(
                            vars.iter()
                                .zip(t)
                                .map(|(v, &e)| {
                                    Formula::eq(
                                        Term::Var(v.clone()),
                                        Term::Handle(element_handle(m, e).expect("stored")),
                                    )
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            );
            budget += sols.len();
            parts.push(GammaPart {
                finite: true,
                formula,
                satisfying: sols.len(),
                family,
                ma_bound: Some(completion_bound(n, &sols).0),
            });
        } else {
            let formula = Formula::conjunction(d.pos.clone());
            let alpha = eval_all(&formula)?;
            let (b, _) = completion_bound(n, &alpha);
            budget += k;
            parts.push(GammaPart {
                finite: false,
                formula,
                satisfying: alpha.len(),
                family,
                ma_bound: (b <= k).then_some(b),
            });
        }
    }
    let gamma = Formula::disjunction(parts.iter().map(|p| p.formula.clone()).collect());
    let phi_sols = eval_all(&phi)?;
    let gamma_sols = eval_all(&gamma)?;
    let implication_holds = phi_sols.iter().all(|t| gamma_sols.binary_search(t).is_ok());
    let (gamma_bound, _) = completion_bound(n, &gamma_sols);
    Ok(Qe1Result { vars, gamma, parts, implication_holds, gamma_bound, budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Signature};
    use crate::model::ChainInterval;

    fn chain(len: usize) -> ModelFragment {
        let bits: String = (0..len).map(|i| if i % 3 == 0 { '1' } else { '0' }).collect();
        let c = ChainInterval::from_bits("a", 0, &bits).unwrap();
        ModelFragment::new(alloc::vec![c], "a", 0).unwrap()
    }

    fn p(s: &str) -> Formula {
        parse(s, &Signature::base()).unwrap()
    }

    #[test]
    fn successor_graph_is_ma() {
        let m = chain(10);
        let w = Window::full(&m);
        let v = is_mutually_algebraic(&m, &p("(= x (S y))"), &w, 1, &|_| None).unwrap();
        assert_eq!(v, MaVerdict::Yes(MaWitness { k: 1, arity: 2, satisfying: 9 }));
        let d = disjoint_family(&m, &p("(= x (S y))"), &w, 1, &|_| None).unwrap();
        assert!(d.family.len() >= 4);
        assert_eq!(d.threshold, 6);
    }

    #[test]
    fn disjoint_variables_are_not_ma() {
        let m = chain(8);
        let w = Window::full(&m);
        let v = is_mutually_algebraic(&m, &p("(and (A x) (A y))"), &w, 2, &|_| None).unwrap();
        match v {
            MaVerdict::No(c) => assert!(c.completions.len() > 2),
            other => panic!("{other:?}"),
        }
        let one = is_mutually_algebraic(&m, &p("(A x)"), &w, 0, &|_| None).unwrap();
        assert!(one.is_yes());
    }

    #[test]
    fn monotone_in_k() {
        let m = chain(12);
        let w = Window::full(&m);
        let f = p("(or (= x (S y)) (= x (S (S y))))");
        let ks: Vec<bool> = (0..5).map(|k| is_mutually_algebraic(&m, &f, &w, k, &|_| None).unwrap().is_yes()).collect();
        assert_eq!(ks, alloc::vec![false, false, true, true, true]);
    }

    #[test]
    fn qe1_spells_out_small_parts() {
        let m = chain(30);
        let w = Window::full(&m);
        let d = alloc::vec![
            Disjunct { pos: alloc::vec![p("(= x (S y))")], neg: alloc::vec![p("(A x)")] },
            Disjunct { pos: alloc::vec![p("(= x 0)"), p("(= y (S 0))")], neg: alloc::vec![] },
        ];
        let r = qe1_construct(&m, &d, &w, 1).unwrap();
        assert!(r.ok(), "{r:?}");
        assert!(!r.parts[0].finite);
        assert!(r.parts[1].finite);
        assert_eq!(r.parts[1].satisfying, 1);
    }
}
