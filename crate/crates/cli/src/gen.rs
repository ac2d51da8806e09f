//! Seeded generators for fragments and formulas used by the suites.

use defeq_core::formula::{to_prenex, Formula, Quantifier, Term, LABEL, PRED, SUCC, ZERO};
use defeq_core::ma::Disjunct;
use defeq_core::model::{ChainInterval, ModelFragment};
use defeq_core::tree::Bits;
use rand::seq::SliceRandom;
use rand::Rng;

/// Shape of a generated fragment.
#[derive(Clone, Debug)]
pub struct FragmentSpec {
    /// Chain lengths; the first chain holds zero near its middle.
    pub lens: Vec<usize>,
    /// Width of the periodic band at each chain end.
    pub band: usize,
    pub period: Bits,
    /// Labels forced at positions `0, 1, ...` of the zero chain.
    pub path: Option<Bits>,
    /// Make every chain after the first entirely periodic.
    pub periodic_extra: bool,
}

/// Labels follow `period` (phased by absolute position) within `band` of
/// either end and are random in between. Every neighbourhood type met near
/// a window edge is then a band type, and band types recur deep inside.
pub fn banded_fragment(rng: &mut impl Rng, spec: &FragmentSpec) -> ModelFragment {
    let p = spec.period.len() as i64;
    let mut chains = Vec::new();
    for (ci, &len) in spec.lens.iter().enumerate() {
        let lo = if ci == 0 { -(len as i64 / 2) } else { 0 };
        let hi = lo + len as i64 - 1;
        let labels = (lo..=hi)
            .map(|pos| {
                let edge = (pos - lo).min(hi - pos) as usize;
                let band = edge < spec.band || (ci > 0 && spec.periodic_extra);
                if ci == 0 {
                    if let Some(path) = &spec.path {
                        if pos >= 0 && (pos as usize) < path.len() {
                            return path[pos as usize];
                        }
                    }
                }
                if band {
                    spec.period[pos.rem_euclid(p) as usize]
                } else {
                    rng.gen_bool(0.5)
                }
            })
            .collect();
        chains.push(ChainInterval::new(&format!("c{ci}"), lo, labels));
    }
    ModelFragment::new(chains, "c0", 0).expect("generated fragment")
}

pub fn random_period(rng: &mut impl Rng) -> Bits {
    const PERIODS: &[&str] = &["10", "110", "1000", "100", "1101", "0"];
    let s = PERIODS.choose(rng).expect("nonempty");
    s.chars().map(|c| c == '1').collect()
}

/// Names of the symbols a random formula is built from.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    pub zero: String,
    pub succ: String,
    pub pred: String,
    pub label: String,
}

impl Vocabulary {
    pub fn base() -> Self {
        Vocabulary { zero: ZERO.into(), succ: SUCC.into(), pred: PRED.into(), label: LABEL.into() }
    }

    pub fn primed() -> Self {
        Vocabulary { zero: "0'".into(), succ: "S'".into(), pred: "P'".into(), label: "A'".into() }
    }

    fn shift(&self, mut t: Term, k: i64) -> Term {
        let f = if k >= 0 { &self.succ } else { &self.pred };
        for _ in 0..k.unsigned_abs() {
            t = Term::app(f, vec![t]);
        }
        t
    }
}

#[derive(Clone, Debug)]
pub struct FormulaSpec {
    pub free: Vec<String>,
    pub quantifiers: usize,
    /// Allow universal quantifiers.
    pub universal: bool,
    /// Total S/P occurrences in the matrix.
    pub steps: usize,
    pub atoms: usize,
}

/// A random prenex formula whose matrix uses at most `steps` successor or
/// predecessor symbols, so its radius is at most `steps · 2^quantifiers`.
pub fn random_formula(rng: &mut impl Rng, voc: &Vocabulary, spec: &FormulaSpec) -> Formula {
    let bound: Vec<String> = (0..spec.quantifiers).map(|i| format!("u{i}")).collect();
    let mut pool: Vec<String> = spec.free.clone();
    pool.extend(bound.iter().cloned());
    let mut budget = spec.steps as i64;
    let term = |rng: &mut dyn rand::RngCore, budget: &mut i64| -> Term {
        let base = if pool.is_empty() || rng.gen_ratio(1, 6) {
            Term::constant(&voc.zero)
        } else {
            Term::var(pool.choose(rng).expect("nonempty"))
        };
        let k = if *budget > 0 && rng.gen_bool(0.6) { rng.gen_range(1..=(*budget).min(3)) } else { 0 };
        *budget -= k;
        let k = if rng.gen_bool(0.5) { k } else { -k };
        voc.shift(base, k)
    };
    let mut atoms = Vec::new();
    for _ in 0..spec.atoms.max(1) {
        let a = if rng.gen_bool(0.5) {
            Formula::rel(&voc.label, vec![term(rng, &mut budget)])
        } else {
            Formula::eq(term(rng, &mut budget), term(rng, &mut budget))
        };
        atoms.push(if rng.gen_bool(0.35) { Formula::not(a) } else { a });
    }
    // every bound variable should occur
    for v in &bound {
        if !atoms.iter().any(|a| a.free_vars().contains(v)) {
            let a = if rng.gen_bool(0.5) {
                Formula::rel(&voc.label, vec![Term::var(v)])
            } else {
                let other = pool.choose(rng).expect("nonempty").clone();
                Formula::not(Formula::eq(Term::var(v), Term::var(&other)))
            };
            atoms.push(a);
        }
    }
    let mut matrix = atoms.pop().expect("atom");
    while let Some(a) = atoms.pop() {
        matrix = if rng.gen_bool(0.5) { Formula::and(a, matrix) } else { Formula::or(a, matrix) };
    }
    let mut f = matrix;
    for v in bound.iter().rev() {
        let q = if spec.universal && rng.gen_bool(0.5) { Quantifier::Forall } else { Quantifier::Exists };
        f = Formula::Quant(q, v.clone(), Box::new(f));
    }
    to_prenex(&f)
}

/// A DNF over `vars` whose positive parts link all variables through
/// successor equalities, plus random label and equality noise.
pub fn random_dnf(rng: &mut impl Rng, vars: &[String], disjuncts: usize) -> Vec<Disjunct> {
    let voc = Vocabulary::base();
    (0..disjuncts.max(1))
        .map(|_| {
            let mut pos = Vec::new();
            let small = rng.gen_ratio(1, 3);
            if small {
                // pinned near zero: few solutions
                for v in vars {
                    pos.push(Formula::eq(Term::var(v), voc.shift(Term::zero(), rng.gen_range(0..6))));
                }
            } else {
                for w in vars.windows(2) {
                    let k = rng.gen_range(-2..=2);
                    pos.push(Formula::eq(Term::var(&w[1]), voc.shift(Term::var(&w[0]), k)));
                }
                if vars.len() == 1 {
                    pos.push(Formula::label(Term::var(&vars[0])));
                }
            }
            if rng.gen_bool(0.5) {
                let v = vars.choose(rng).expect("nonempty");
                pos.push(Formula::label(voc.shift(Term::var(v), rng.gen_range(-1..=1))));
            }
            let mut neg = Vec::new();
            for _ in 0..rng.gen_range(0..=2) {
                let v = vars.choose(rng).expect("nonempty");
                neg.push(if rng.gen_bool(0.5) {
                    Formula::label(voc.shift(Term::var(v), rng.gen_range(-1..=1)))
                } else {
                    Formula::eq(Term::var(v), voc.shift(Term::zero(), rng.gen_range(-3..=3)))
                });
            }
            Disjunct { pos, neg }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use defeq_core::formula::radius;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radius_budget_is_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for q in 0..=2 {
            for _ in 0..50 {
                let spec = FormulaSpec { free: vec!["x".into()], quantifiers: q, universal: true, steps: 2, atoms: 3 };
                let f = random_formula(&mut rng, &Vocabulary::base(), &spec);
                assert!(radius(&f).unwrap() <= 2 << q);
                assert!(f.free_vars().iter().all(|v| v == "x"));
            }
        }
    }

    #[test]
    fn bands_and_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = FragmentSpec {
            lens: vec![65, 40],
            band: 12,
            period: vec![true, false],
            path: Some(vec![true, true, false, true]),
            periodic_extra: true,
        };
        let m = banded_fragment(&mut rng, &spec);
        assert_eq!(m.extract_path(3).unwrap(), vec![true, true, false, true]);
        let c = m.chain(1);
        assert!(c.labels.iter().enumerate().all(|(i, &b)| b == (i % 2 == 0)));
    }
}
