use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Formula, FreshNames, Quantifier, Term, PRED, SUCC};
use super::dictionary::{DefDictionary, Direction};
use crate::error::FormulaError;

/// Prenex normal form. Implications are desugared first, every bound
/// variable is renamed to `x0, x1, ...` in binder pre-order (skipping names
/// free in `f`), and quantifiers are pulled out left to right.
pub fn to_prenex(f: &Formula) -> Formula {
    if f.is_quantifier_free() {
        return f.clone();
    }
    let d = f.desugar();
    let mut fresh = FreshNames::new("x", d.free_vars());
    let renamed = rename_bound(&d, &mut Vec::new(), &mut fresh);
    let (prefix, matrix) = pull(renamed);
    prefix.into_iter().rev().fold(matrix, |body, (q, v)| Formula::Quant(q, v, Box::new(body)))
}

fn rename_bound(f: &Formula, scope: &mut Vec<(String, String)>, fresh: &mut FreshNames) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => f.map_terms(&|t| {
            t.substitute(&|v| scope.iter().rev().find(|(old, _)| old == v).map(|(_, new)| Term::Var(new.clone())))
        }),
        Formula::Not(a) => Formula::not(rename_bound(a, scope, fresh)),
        Formula::And(a, b) => {
            let a = rename_bound(a, scope, fresh);
            Formula::and(a, rename_bound(b, scope, fresh))
        }
        Formula::Or(a, b) => {
            let a = rename_bound(a, scope, fresh);
            Formula::or(a, rename_bound(b, scope, fresh))
        }
        Formula::Implies(..) | Formula::Iff(..) => rename_bound(&f.desugar(), scope, fresh),
        Formula::Quant(q, v, body) => {
            let nv = fresh.next();
            scope.push((v.clone(), nv.clone()));
            let body = rename_bound(body, scope, fresh);
            scope.pop();
            Formula::Quant(*q, nv, Box::new(body))
        }
    }
}

type Prefix = Vec<(Quantifier, String)>;

fn pull(f: Formula) -> (Prefix, Formula) {
    match f {
        Formula::Quant(q, v, body) => {
            let (mut p, m) = pull(*body);
            p.insert(0, (q, v));
            (p, m)
        }
        Formula::Not(a) => {
            let (p, m) = pull(*a);
            (p.into_iter().map(|(q, v)| (q.dual(), v)).collect(), Formula::not(m))
        }
        Formula::And(a, b) => {
            let (mut pa, ma) = pull(*a);
            let (pb, mb) = pull(*b);
            pa.extend(pb);
            (pa, Formula::and(ma, mb))
        }
        Formula::Or(a, b) => {
            let (mut pa, ma) = pull(*a);
            let (pb, mb) = pull(*b);
            pa.extend(pb);
            (pa, Formula::or(ma, mb))
        }
        other => (Vec::new(), other),
    }
}

/// Radius of a prenex L-formula: S/P occurrences in the matrix, doubled
/// once per quantifier.
pub fn radius(f: &Formula) -> Result<u64, FormulaError> {
    let (prefix, matrix) = f.prenex_parts().ok_or(FormulaError::NotPrenex)?;
    let mut count = 0usize;
    matrix.visit_terms(&mut |t| count += t.count_symbols(&[SUCC, PRED]));
    Ok(double(count as u64, prefix.len()))
}

/// Radius of a prenex L'-formula: the matrix contributes the radius of its
/// prenexed L-translation.
pub fn radius_in(f: &Formula, d: &DefDictionary) -> Result<u64, FormulaError> {
    let (prefix, matrix) = f.prenex_parts().ok_or(FormulaError::NotPrenex)?;
    let base = radius(&to_prenex(&d.translate(matrix, Direction::Backward)?))?;
    Ok(double(base, prefix.len()))
}

fn double(base: u64, times: usize) -> u64 {
    let shift = u32::try_from(times).unwrap_or(u32::MAX).min(63);
    base.saturating_mul(1u64 << shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Signature};

    fn p(s: &str) -> Formula {
        parse(s, &Signature::base()).unwrap()
    }

    #[test]
    fn quantifier_free_is_unchanged() {
        let f = p("(implies (A x) (= (S x) y))");
        assert_eq!(to_prenex(&f), f);
    }

    #[test]
    fn negated_existential_dualizes() {
        let f = to_prenex(&p("(not (exists x (A x)))"));
        assert!(f.alpha_eq(&p("(forall x (not (A x)))")));
        assert_eq!(f, p("(forall x0 (not (A x0)))"));
    }

    #[test]
    fn clashing_binders_are_renamed() {
        let f = to_prenex(&p("(and (exists x (A x)) (exists x (not (A x))))"));
        assert_eq!(f, p("(exists x0 (exists x1 (and (A x0) (not (A x1)))))"));
    }

    #[test]
    fn fresh_names_skip_free_variables() {
        let f = to_prenex(&p("(exists y (= x0 y))"));
        assert_eq!(f, p("(exists x1 (= x0 x1))"));
    }

    #[test]
    fn implication_prefix_flips() {
        let f = to_prenex(&p("(implies (exists y (A y)) (A x))"));
        assert_eq!(f, p("(forall x0 (or (not (A x0)) (A x)))"));
    }

    #[test]
    fn radius_follows_definition() {
        assert_eq!(radius(&p("(= x y)")).unwrap(), 0);
        assert_eq!(radius(&p("(= (S (S x)) y)")).unwrap(), 2);
        assert_eq!(radius(&p("(exists y (and (= (S x) y) (= (P y) x)))")).unwrap(), 4);
        assert_eq!(radius(&p("(forall y (exists z (= (S y) z)))")).unwrap(), 4);
        assert_eq!(radius(&p("(A (lit 3))")).unwrap(), 3);
        assert_eq!(radius(&p("(not (exists y (A y)))")), Err(FormulaError::NotPrenex));
    }
}
