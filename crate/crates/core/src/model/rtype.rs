use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::fragment::{bits_to_string, Element, ModelFragment, SignedDistance};
use crate::error::ModelError;
use crate::formula::{Formula, Term};

/// The r-distance table and r-neighbourhood types of a tuple, with
/// coordinate 0 standing for the element zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RType {
    pub r: u64,
    /// Row-major `(n+1) x (n+1)`; `None` is infinity.
    pub table: Vec<Option<i64>>,
    pub nbhd: Vec<Vec<bool>>,
}

impl RType {
    /// Tuple length `n` (not counting zero).
    pub fn arity(&self) -> usize {
        self.nbhd.len() - 1
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<i64> {
        self.table[i * self.nbhd.len() + j]
    }

    /// Checks the structural invariants.
    pub fn is_well_formed(&self) -> bool {
        let w = self.nbhd.len();
        let r = self.r as i64;
        if self.table.len() != w * w || self.nbhd.iter().any(|b| b.len() as u64 != 2 * self.r + 1) {
            return false;
        }
        for i in 0..w {
            if self.entry(i, i) != Some(0) {
                return false;
            }
            for j in 0..w {
                match (self.entry(i, j), self.entry(j, i)) {
                    (Some(a), Some(b)) if a == -b && a.abs() <= r => {}
                    (None, None) => {}
                    _ => return false,
                }
                for k in 0..w {
                    if let (Some(a), Some(b)) = (self.entry(i, j), self.entry(j, k)) {
                        if (a + b).abs() <= r && self.entry(i, k) != Some(a + b) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// The conjuncts of [`RType::to_formula`] as `(atom, polarity)` pairs.
    pub fn literals(&self, vars: &[String]) -> Vec<(Formula, bool)> {
        let n = self.arity();
        assert_eq!(vars.len(), n, "one variable per coordinate");
        let r = self.r as i64;
        let point = |i: usize| if i == 0 { Term::zero() } else { Term::Var(vars[i - 1].clone()) };
        let mut out = Vec::new();
        for i in 0..=n {
            for j in (i + 1)..=n {
                match self.entry(i, j) {
                    Some(k) => out.push((Formula::eq(point(j), point(i).shift(k)), true)),
                    None => {
                        for k in -r..=r {
                            out.push((Formula::eq(point(j), point(i).shift(k)), false));
                        }
                    }
                }
            }
        }
        for (i, bits) in self.nbhd.iter().enumerate() {
            for (d, &b) in bits.iter().enumerate() {
                out.push((Formula::label(point(i).shift(d as i64 - r)), b));
            }
        }
        out
    }

    /// Quantifier-free L-formula in `vars` (one per coordinate) true of
    /// exactly the tuples with this type.
    pub fn to_formula(&self, vars: &[String]) -> Formula {
        Formula::conjunction(
            self.literals(vars).into_iter().map(|(a, b)| if b { a } else { Formula::not(a) }).collect(),
        )
    }
}

impl fmt::Display for RType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r={} table=[", self.r)?;
        for (i, e) in self.table.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match e {
                Some(k) => write!(f, "{k}")?,
                None => f.write_str("inf")?,
            }
        }
        f.write_str("] nbhd=[")?;
        for (i, b) in self.nbhd.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&bits_to_string(b))?;
        }
        f.write_str("]")
    }
}

/// The r-type of `tuple`. Every coordinate and zero need their
/// r-neighbourhood stored.
pub fn r_type(m: &ModelFragment, tuple: &[Element], r: u64) -> Result<RType, ModelError> {
    let mut pts = Vec::with_capacity(tuple.len() + 1);
    pts.push(m.zero());
    pts.extend_from_slice(tuple);
    let mut table = Vec::with_capacity(pts.len() * pts.len());
    for &a in &pts {
        for &b in &pts {
            table.push(SignedDistance::between(a, b).within(r));
        }
    }
    let nbhd = pts.iter().map(|&a| m.nbhd_type(a, r)).collect::<Result<Vec<_>, _>>()?;
    Ok(RType { r, table, nbhd })
}

/// Crude upper bound on the number of r-types of n-tuples, saturating.
pub fn rtype_count_bound(n: usize, r: u64) -> u128 {
    let w = (n + 1) as u32;
    let base = (2 * r as u128 + 2).checked_pow(w * w);
    let labels = 2u128.checked_pow((2 * r as u32 + 1) * w);
    match (base, labels) {
        (Some(a), Some(b)) => a.saturating_mul(b),
        _ => u128::MAX,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eval_qf, Assignment, ChainInterval};

    fn frag() -> ModelFragment {
        let a = ChainInterval::from_bits("a", -6, "1101001011010").unwrap();
        let b = ChainInterval::from_bits("b", 0, "0110100").unwrap();
        ModelFragment::new(alloc::vec![a, b], "a", 0).unwrap()
    }

    #[test]
    fn singleton_at_zero() {
        let c = ChainInterval::from_bits("a", -2, "01010").unwrap();
        let m = ModelFragment::new(alloc::vec![c], "a", 0).unwrap();
        let t = r_type(&m, &[m.zero()], 1).unwrap();
        assert_eq!(t.table, alloc::vec![Some(0); 4]);
        assert_eq!(t.nbhd, alloc::vec![alloc::vec![true, false, true]; 2]);
        assert!(t.is_well_formed());
    }

    #[test]
    fn far_and_near_pairs() {
        let m = frag();
        let a = Element::new(0, -3);
        let t = r_type(&m, &[a, a.offset(5)], 2).unwrap();
        assert_eq!(t.entry(1, 2), None);
        let t = r_type(&m, &[a, a.offset(2)], 2).unwrap();
        assert_eq!((t.entry(1, 2), t.entry(2, 1)), (Some(2), Some(-2)));
        assert!(t.is_well_formed());
        assert!(r_type(&m, &[Element::new(1, 0)], 1).is_err());
    }

    #[test]
    fn formula_characterises_type() {
        let m = frag();
        let r = 1;
        let vars: Vec<String> = alloc::vec!["x1".into(), "x2".into()];
        let deep: Vec<Element> = m.elements().filter(|e| m.is_interior(*e, r)).collect();
        for &a in &deep {
            for &b in &deep {
                let ta = r_type(&m, &[a, b], r).unwrap();
                let f = ta.to_formula(&vars);
                for &c in deep.iter().step_by(2) {
                    for &d in deep.iter().step_by(3) {
                        let same = r_type(&m, &[c, d], r).unwrap() == ta;
                        let asg = Assignment::from_tuple(&vars, &[c, d]);
                        assert_eq!(eval_qf(&m, &f, &asg).unwrap(), same);
                    }
                }
            }
        }
    }

    #[test]
    fn formula_encodes_atoms() {
        let m = frag();
        let t = r_type(&m, &[m.zero().offset(2), m.zero().offset(4)], 2).unwrap();
        let s = alloc::format!("{}", t.to_formula(&["x".into(), "y".into()]));
        assert!(s.contains("(= y (S (S x)))"));
        assert!(s.contains("(= x (lit 2))"));
        // label at position 1 is 0
        assert!(s.contains("(not (A (P x)))"));
        let far = r_type(&m, &[m.zero().offset(-4), Element::new(1, 3)], 2).unwrap();
        let s = alloc::format!("{}", far.to_formula(&["x".into(), "y".into()]));
        assert!(s.contains("(not (= y (S (S x))))"));
    }
}
