//! Checking that same-r-type tuples agree on a formula, and the r-type
//! normal form this licenses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::formula::{radius, Formula};
use crate::model::{r_type, Compiled, Element, ModelFragment, RType, Window};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndiscernConfig {
    /// Above this many same-type pairs, pairs are sampled.
    pub max_pairs: usize,
    /// Above this many deep tuples, tuples are sampled.
    pub max_tuples: usize,
    pub seed: u64,
}

impl Default for IndiscernConfig {
    fn default() -> Self {
        IndiscernConfig { max_pairs: 10_000, max_tuples: 20_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub left: Vec<Element>,
    pub right: Vec<Element>,
    pub left_truth: bool,
    pub right_truth: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndiscernReport {
    pub formula: String,
    pub r: u64,
    pub arity: usize,
    pub tuples: usize,
    pub types: usize,
    pub pairs_checked: u64,
    pub tuples_sampled: bool,
    pub pairs_sampled: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl IndiscernReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Elements of `window` whose `r`-neighbourhood lies in `window`.
pub fn deep_elements(m: &ModelFragment, window: &Window, r: u64) -> Vec<Element> {
    window.elements().iter().copied().filter(|&e| window.is_deep(m, e, r)).collect()
}

/// All `arity`-tuples of deep elements, in lexicographic order.
pub fn deep_tuples(m: &ModelFragment, window: &Window, arity: usize, r: u64) -> Vec<Vec<Element>> {
    let deep = deep_elements(m, window, r);
    product(&deep, arity)
}

pub fn product(items: &[Element], arity: usize) -> Vec<Vec<Element>> {
    let mut out: Vec<Vec<Element>> = alloc::vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * items.len());
        for t in &out {
            for &e in items {
                let mut u = t.clone();
                u.push(e);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn nbhd_types(m: &ModelFragment, elems: impl Iterator<Item = Element>, r: u64) -> BTreeMap<Vec<bool>, usize> {
    let mut out = BTreeMap::new();
    for e in elems {
        if let Ok(t) = m.nbhd_type(e, r) {
            *out.entry(t).or_insert(0) += 1;
        }
    }
    out
}

/// Warnings about neighbourhood types that a Case-2 witness search inside
/// `window` could miss: types realised in the fragment but by no deep
/// window element, and types realised near the window edge with fewer than
/// `min_deep` deep representatives.
pub fn window_warnings(m: &ModelFragment, window: &Window, r: u64, min_deep: usize) -> Vec<String> {
    let deep = nbhd_types(m, deep_elements(m, window, r).into_iter(), r);
    let everywhere = nbhd_types(m, m.elements().filter(|e| m.is_interior(*e, r)), r);
    let shallow = nbhd_types(m, window.elements().iter().copied().filter(|&e| !window.is_deep(m, e, r)), r);
    let mut out = Vec::new();
    for t in everywhere.keys() {
        if !deep.contains_key(t) {
            out.push(alloc::format!(
                "type {} realised in the fragment but not deep in the window",
                crate::model::bits_to_string(t)
            ));
        }
    }
    for t in shallow.keys() {
        let d = deep.get(t).copied().unwrap_or(0);
        if d < min_deep && everywhere.contains_key(t) {
            out.push(alloc::format!(
                "type {} near the window edge has only {d} deep representatives",
                crate::model::bits_to_string(t)
            ));
        }
    }
    out.sort();
    out.dedup();
    out
}

fn compile(m: &ModelFragment, f: &Formula) -> Result<(Vec<String>, Compiled), Error> {
    let vars = f.free_var_list();
    if !f.handles().is_empty() {
        return Err(Error::Precondition("formula has parameters; bind them as coordinates".into()));
    }
    let c = Compiled::new(m, f, &vars, &|_| None)?;
    Ok((vars, c))
}

/// Groups deep tuples by r-type (r = rad f) and reports any pair of
/// same-type tuples on which `f` disagrees.
pub fn check_indiscernability(
    m: &ModelFragment,
    f: &Formula,
    window: &Window,
    cfg: &IndiscernConfig,
) -> Result<IndiscernReport, Error> {
    let r = radius(f)?;
    let (vars, c) = compile(m, f)?;
    let arity = vars.len();
    let mut tuples = deep_tuples(m, window, arity, r);
    let tuples_sampled = tuples.len() > cfg.max_tuples;
    if tuples_sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut idx = sample(&mut rng, tuples.len(), cfg.max_tuples).into_vec();
        idx.sort_unstable();
        tuples = idx.into_iter().map(|i| core::mem::take(&mut tuples[i])).collect();
    }
    let mut groups: BTreeMap<RType, Vec<(usize, bool)>> = BTreeMap::new();
    for (i, t) in tuples.iter().enumerate() {
        let ty = r_type(m, t, r)?;
        let truth = c.eval(m, t, window)?;
        groups.entry(ty).or_default().push((i, truth));
    }
    let total_pairs: u64 = groups.values().map(|g| (g.len() as u64) * (g.len() as u64 - 1) / 2).sum();
    let pairs_sampled = total_pairs > cfg.max_pairs as u64;
    let mut violations = Vec::new();
    let mut record = |a: (usize, bool), b: (usize, bool)| {
        if a.1 != b.1 && violations.len() < 32 {
            violations.push(Violation {
                left: tuples[a.0].clone(),
                right: tuples[b.0].clone(),
                left_truth: a.1,
                right_truth: b.1,
            });
        }
    };
    let pairs_checked = if pairs_sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
        let weights: Vec<(&Vec<(usize, bool)>, u64)> =
            groups.values().filter(|g| g.len() > 1).map(|g| (g, (g.len() as u64) * (g.len() as u64 - 1) / 2)).collect();
        for _ in 0..cfg.max_pairs {
            let mut pick = rng.gen_range(0..total_pairs);
            let g = weights
                .iter()
                .find(|(_, w)| {
                    if pick < *w {
                        true
                    } else {
                        pick -= w;
                        false
                    }
                })
                .map(|(g, _)| *g)
                .expect("pair index in range");
            let i = rng.gen_range(0..g.len());
            let mut j = rng.gen_range(0..g.len() - 1);
            if j >= i {
                j += 1;
            }
            record(g[i], g[j]);
        }
        cfg.max_pairs as u64
    } else {
        for g in groups.values() {
            for i in 0..g.len() {
                for j in (i + 1)..g.len() {
                    record(g[i], g[j]);
                }
            }
        }
        total_pairs
    };
    let min_deep = ((r as usize) + 1) * (arity + 1) + 1;
    Ok(IndiscernReport {
        formula: f.to_string(),
        r,
        arity,
        tuples: tuples.len(),
        types: groups.len(),
        pairs_checked,
        tuples_sampled,
        pairs_sampled,
        violations,
        warnings: window_warnings(m, window, r, min_deep),
    })
}

/// The r-types (r = rad f) of deep tuples satisfying `f`. Aborts with the
/// first disagreeing pair.
pub fn satisfying_rtypes(m: &ModelFragment, f: &Formula, window: &Window) -> Result<BTreeSet<RType>, Error> {
    let r = radius(f)?;
    let (_, c) = compile(m, f)?;
    satisfying_rtypes_with(m, &c, f, r, window)
}

/// As [`satisfying_rtypes`] with an explicit compiled formula and radius;
/// coordinates follow the compiled slot order.
pub fn satisfying_rtypes_with(
    m: &ModelFragment,
    c: &Compiled,
    f: &Formula,
    r: u64,
    window: &Window,
) -> Result<BTreeSet<RType>, Error> {
    let mut seen: BTreeMap<RType, (bool, Vec<Element>)> = BTreeMap::new();
    for t in deep_tuples(m, window, c.arity(), r) {
        let ty = r_type(m, &t, r)?;
        let truth = c.eval(m, &t, window)?;
        match seen.get(&ty) {
            Some((prev, other)) if *prev != truth => {
                return Err(Error::Indiscernability {
                    formula: f.to_string(),
                    left: alloc::format!("{other:?}"),
                    right: alloc::format!("{t:?}"),
                })
            }
            Some(_) => {}
            None => {
                seen.insert(ty, (truth, t));
            }
        }
    }
    Ok(seen.into_iter().filter(|(_, (t, _))| *t).map(|(ty, _)| ty).collect())
}

/// `⋁_{t ∈ types} rtype_to_formula(t)`.
pub fn qe_formula(types: &BTreeSet<RType>, vars: &[String]) -> Formula {
    Formula::disjunction(types.iter().map(|t| t.to_formula(vars)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QeReport {
    pub formula: String,
    pub r: u64,
    pub types: usize,
    pub checked: usize,
    pub disagreements: usize,
}

/// Evaluates `f` and its r-type normal form at every deep tuple.
pub fn check_qe(m: &ModelFragment, f: &Formula, window: &Window) -> Result<QeReport, Error> {
    let r = radius(f)?;
    let (vars, c) = compile(m, f)?;
    let types = satisfying_rtypes_with(m, &c, f, r, window)?;
    let qe = qe_formula(&types, &vars);
    let cq = Compiled::new(m, &qe, &vars, &|_| None)?;
    let mut checked = 0;
    let mut disagreements = 0;
    for t in deep_tuples(m, window, vars.len(), r) {
        checked += 1;
        if c.eval(m, &t, window)? != cq.eval_qf(m, &t)? {
            disagreements += 1;
        }
    }
    Ok(QeReport { formula: f.to_string(), r, types: types.len(), checked, disagreements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, to_prenex, Signature};
    use crate::model::{parse_bits, ChainInterval};

    fn p(s: &str) -> Formula {
        to_prenex(&parse(s, &Signature::base()).unwrap())
    }

    fn periodic(period: &str, len: usize) -> ModelFragment {
        let bits: String = period.chars().cycle().take(len).collect();
        let half = (len / 2) as i64;
        let c = ChainInterval::new("a", -half, parse_bits(&bits).unwrap());
        ModelFragment::new(alloc::vec![c], "a", 0).unwrap()
    }

    #[test]
    fn label_formula_agrees_by_type() {
        let m = periodic("1101000", 41);
        let w = Window::interior(&m, 2);
        let rep = check_indiscernability(&m, &p("(A x)"), &w, &IndiscernConfig::default()).unwrap();
        assert!(rep.ok());
        assert!(rep.pairs_checked > 0);
    }

    #[test]
    fn successor_existence_is_uniform() {
        let m = periodic("0", 31);
        let w = Window::interior(&m, 4);
        let f = p("(exists y (= (S x) y))");
        let rep = check_indiscernability(&m, &f, &w, &IndiscernConfig::default()).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.types, deep_elements(&m, &w, 2).len().min(rep.types));
    }

    #[test]
    fn periodic_shifted_label() {
        let m = periodic("10", 41);
        let w = Window::interior(&m, 2);
        let rep = check_indiscernability(&m, &p("(A (S x))"), &w, &IndiscernConfig::default()).unwrap();
        assert_eq!(rep.r, 1);
        assert!(rep.ok());
    }

    #[test]
    fn zero_formula_types() {
        let m = periodic("1101000", 41);
        let w = Window::interior(&m, 2);
        let types = satisfying_rtypes(&m, &p("(= x 0)"), &w).unwrap();
        assert!(!types.is_empty());
        assert!(types.iter().all(|t| t.entry(0, 1) == Some(0)));
        let a = satisfying_rtypes(&m, &p("(A x)"), &w).unwrap();
        assert!(a.iter().all(|t| t.nbhd[1] == alloc::vec![true]));
    }

    #[test]
    fn qe_matches_direct_evaluation() {
        let m = periodic("1101000", 41);
        let w = Window::interior(&m, 4);
        for f in ["(exists y (and (= (S x) y) (A y)))", "(forall y (or (= x y) (not (A y))))", "(A (P (P x)))"] {
            let rep = check_qe(&m, &p(f), &w).unwrap();
            assert_eq!(rep.disagreements, 0, "{f}");
        }
        let types = satisfying_rtypes(&m, &p("(exists y (and (= (S x) y) (A y)))"), &w).unwrap();
        assert!(types.iter().all(|t| t.nbhd[1][3]));
    }

    #[test]
    fn inadequate_window_is_caught() {
        // a window cut so that Case-2 witnesses are missing for one tuple
        let m = periodic("1000000000", 60);
        let w = Window::from_elements(&m, m.elements().filter(|e| e.pos >= -4 && e.pos <= 4)).unwrap();
        let f = p("(exists y (and (A (S y)) (not (= x y))))");
        let rep = check_indiscernability(&m, &f, &w, &IndiscernConfig::default()).unwrap();
        assert!(!rep.warnings.is_empty());
    }
}
