//! Computable binary trees, the label axioms they induce, and guessers.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::formula::{Formula, Term};

pub type Bits = Vec<bool>;

/// Largest level `level()` will enumerate.
pub const MAX_LEVEL_SIZE: usize = 1 << 16;

/// Levels of a diagonal tree keep at most this many members.
pub const DIAGONAL_WIDTH: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeRule {
    Full,
    /// The single path `bits` followed by zeros.
    SinglePath(Bits),
    /// The single path repeating `pattern`.
    Periodic(Bits),
    /// Explicit members per level `0..=depth`; beyond the last level every
    /// extension of a member is a member.
    Table(Vec<Vec<Bits>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryTree {
    rule: TreeRule,
    label: String,
}

impl BinaryTree {
    pub fn full() -> Self {
        BinaryTree { rule: TreeRule::Full, label: "full".to_string() }
    }

    pub fn single_path(bits: Bits) -> Self {
        let label = alloc::format!("single-path {}", crate::model::bits_to_string(&bits));
        BinaryTree { rule: TreeRule::SinglePath(bits), label }
    }

    pub fn periodic(pattern: Bits) -> Result<Self, Error> {
        if pattern.is_empty() {
            return Err(Error::Tree("empty periodic pattern".into()));
        }
        let label = alloc::format!("periodic {}", crate::model::bits_to_string(&pattern));
        Ok(BinaryTree { rule: TreeRule::Periodic(pattern), label })
    }

    /// Validates downward closure and per-level lengths.
    pub fn table(levels: Vec<Vec<Bits>>) -> Result<Self, Error> {
        Self::table_named(levels, "table")
    }

    fn table_named(mut levels: Vec<Vec<Bits>>, label: &str) -> Result<Self, Error> {
        if levels.is_empty() {
            levels.push(alloc::vec![Vec::new()]);
        }
        for (n, level) in levels.iter_mut().enumerate() {
            level.sort();
            level.dedup();
            if level.is_empty() {
                return Err(Error::Tree(alloc::format!("level {n} is empty")));
            }
            if let Some(s) = level.iter().find(|s| s.len() != n) {
                return Err(Error::Tree(alloc::format!("string of length {} listed at level {n}", s.len())));
            }
        }
        for n in 1..levels.len() {
            let (prev, cur) = (&levels[n - 1], &levels[n]);
            if let Some(s) = cur.iter().find(|s| prev.binary_search(&s[..n - 1].to_vec()).is_err()) {
                return Err(Error::Tree(alloc::format!(
                    "{} has no parent at level {}",
                    crate::model::bits_to_string(s),
                    n - 1
                )));
            }
        }
        Ok(BinaryTree { rule: TreeRule::Table(levels), label: label.to_string() })
    }

    pub fn rule(&self) -> &TreeRule {
        &self.rule
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn contains(&self, s: &[bool]) -> bool {
        match &self.rule {
            TreeRule::Full => true,
            TreeRule::SinglePath(bits) => {
                s.iter().enumerate().all(|(i, &b)| b == bits.get(i).copied().unwrap_or(false))
            }
            TreeRule::Periodic(p) => s.iter().enumerate().all(|(i, &b)| b == p[i % p.len()]),
            TreeRule::Table(levels) => {
                let d = (levels.len() - 1).min(s.len());
                levels[d].binary_search(&s[..d].to_vec()).is_ok()
            }
        }
    }

    /// Exactly the members of length `n`, in lexicographic order.
    pub fn level(&self, n: usize) -> Result<Vec<Bits>, Error> {
        match &self.rule {
            TreeRule::Full => {
                if n >= 16 {
                    return Err(Error::Tree(alloc::format!("level {n} of the full tree is too large")));
                }
                Ok((0..1u32 << n).map(|i| (0..n).map(|j| i >> (n - 1 - j) & 1 == 1).collect()).collect())
            }
            TreeRule::SinglePath(_) | TreeRule::Periodic(_) => Ok(alloc::vec![self.leftmost_path(n)]),
            TreeRule::Table(levels) => {
                let d = levels.len() - 1;
                if n <= d {
                    return Ok(levels[n].clone());
                }
                let extra = n - d;
                if levels[d].len().saturating_mul(1usize << extra.min(40)) > MAX_LEVEL_SIZE || extra > 40 {
                    return Err(Error::Tree(alloc::format!("level {n} is too large to enumerate")));
                }
                let mut out = Vec::new();
                for s in &levels[d] {
                    for i in 0..1u64 << extra {
                        let mut t = s.clone();
                        t.extend((0..extra).map(|j| i >> (extra - 1 - j) & 1 == 1));
                        out.push(t);
                    }
                }
                out.sort();
                Ok(out)
            }
        }
    }

    /// The leftmost member of length `n` found by depth-first search.
    pub fn leftmost_path(&self, n: usize) -> Bits {
        match &self.rule {
            TreeRule::Full => alloc::vec![false; n],
            TreeRule::SinglePath(bits) => (0..n).map(|i| bits.get(i).copied().unwrap_or(false)).collect(),
            TreeRule::Periodic(p) => (0..n).map(|i| p[i % p.len()]).collect(),
            TreeRule::Table(levels) => {
                // members of the last level extend to every depth
                let base = levels.last().and_then(|l| l.first()).cloned().unwrap_or_default();
                let mut s: Bits = base.into_iter().take(n).collect();
                s.resize(n, false);
                s
            }
        }
    }
}

impl fmt::Display for BinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// `⋁_{σ ∈ R_n} (⋀_{σ(i)=0} ¬A(ī) ∧ ⋀_{σ(i)=1} A(ī))`, disjuncts in
/// lexicographic order. Level 0 gives `true`.
pub fn axiom_for_level(t: &BinaryTree, n: usize) -> Result<Formula, Error> {
    let level = t.level(n)?;
    if level.is_empty() {
        return Err(Error::Tree(alloc::format!("level {n} is empty")));
    }
    let disjuncts = level
        .iter()
        .map(|s| {
            Formula::conjunction(
                s.iter()
                    .enumerate()
                    .map(|(i, &b)| {
                        let atom = Formula::label(Term::numeral(i as i64));
                        if b {
                            atom
                        } else {
                            Formula::not(atom)
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(Formula::disjunction(disjuncts))
}

pub type GuessFn = dyn Fn(usize) -> Vec<Bits> + Send + Sync;

/// Enumerates a list of candidate strings of length `n` for each `n`.
#[derive(Clone)]
pub struct Guesser {
    pub name: String,
    pub c: u64,
    generator: Arc<GuessFn>,
}

impl fmt::Debug for Guesser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Guesser({}, C={})", self.name, self.c)
    }
}

impl Guesser {
    pub fn new(name: &str, c: u64, generator: impl Fn(usize) -> Vec<Bits> + Send + Sync + 'static) -> Self {
        Guesser { name: name.to_string(), c, generator: Arc::new(generator) }
    }

    pub fn from_boxed(name: &str, c: u64, generator: Box<GuessFn>) -> Self {
        Guesser { name: name.to_string(), c, generator: Arc::from(generator) }
    }

    pub fn guesses(&self, n: usize) -> Vec<Bits> {
        (self.generator)(n)
    }

    /// `C · max(n, 1)²`.
    pub fn budget(&self, n: usize) -> u64 {
        let m = n.max(1) as u64;
        self.c.saturating_mul(m * m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuessVerdict {
    pub n: usize,
    pub hit: bool,
    pub count: usize,
    pub budget: u64,
    pub within_budget: bool,
}

pub fn check_guesser(g: &Guesser, p: &[bool]) -> GuessVerdict {
    let n = p.len();
    let list = g.guesses(n);
    let budget = g.budget(n);
    GuessVerdict {
        n,
        hit: list.iter().any(|s| s.as_slice() == p),
        count: list.len(),
        budget,
        within_budget: list.len() as u64 <= budget,
    }
}

/// Builds a tree to `depth` whose level-`n` members avoid every string
/// any guesser lists at `n`. A level the guessers cover completely is left
/// unpruned; a guesser only has to miss at infinitely many levels. Levels
/// are capped at [`DIAGONAL_WIDTH`] members (lexicographically least
/// survivors). Above `depth` every extension of a member is a member.
pub fn diagonal_tree(guessers: &[Guesser], depth: usize) -> Result<BinaryTree, Error> {
    let mut levels: Vec<Vec<Bits>> = alloc::vec![alloc::vec![Vec::new()]];
    for n in 1..=depth {
        let banned: BTreeSet<Bits> = guessers.iter().flat_map(|g| g.guesses(n)).collect();
        let extend = |skip: &BTreeSet<Bits>| {
            let mut next = Vec::new();
            for s in &levels[n - 1] {
                for b in [false, true] {
                    let mut t = s.clone();
                    t.push(b);
                    if !skip.contains(&t) {
                        next.push(t);
                        if next.len() == DIAGONAL_WIDTH {
                            return next;
                        }
                    }
                }
            }
            next
        };
        let mut next = extend(&banned);
        if next.is_empty() {
            next = extend(&BTreeSet::new());
        }
        levels.push(next);
    }
    let names: Vec<&str> = guessers.iter().map(|g| g.name.as_str()).collect();
    BinaryTree::table_named(levels, &alloc::format!("diagonal depth={depth} against [{}]", names.join(",")))
}

/// Levels `1..=depth` at which `t` avoids every guess of `g`.
pub fn missed_levels(t: &BinaryTree, g: &Guesser, depth: usize) -> Result<Vec<usize>, Error> {
    let mut out = Vec::new();
    for n in 1..=depth {
        let lv = t.level(n)?;
        if g.guesses(n).iter().all(|s| !lv.contains(s)) {
            out.push(n);
        }
    }
    Ok(out)
}

/// Built-in guessers usable by name in tree files.
pub fn builtin_guesser(name: &str) -> Option<Guesser> {
    Some(match name {
        "zeros" => Guesser::new("zeros", 1, |n| alloc::vec![alloc::vec![false; n]]),
        "ones" => Guesser::new("ones", 1, |n| alloc::vec![alloc::vec![true; n]]),
        "alternating" => Guesser::new("alternating", 2, |n| {
            alloc::vec![(0..n).map(|i| i % 2 == 1).collect(), (0..n).map(|i| i % 2 == 0).collect()]
        }),
        "sparse" => Guesser::new("sparse", 2, |n| {
            let mut out = alloc::vec![alloc::vec![false; n]];
            for i in 0..n {
                let mut s = alloc::vec![false; n];
                s[i] = true;
                out.push(s);
            }
            out
        }),
        "everything" => Guesser::new("everything", 1, |n| {
            if n > 16 {
                return Vec::new();
            }
            (0..1u32 << n).map(|i| (0..n).map(|j| i >> j & 1 == 1).collect()).collect()
        }),
        _ => return None,
    })
}

pub const BUILTIN_GUESSERS: &[&str] = &["zeros", "ones", "alternating", "sparse", "everything"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bits_to_string, parse_bits};

    fn strs(v: &[Bits]) -> Vec<String> {
        v.iter().map(|s| bits_to_string(s)).collect()
    }

    #[test]
    fn levels_of_simple_trees() {
        assert_eq!(strs(&BinaryTree::full().level(2).unwrap()), ["00", "01", "10", "11"]);
        let sp = BinaryTree::single_path(Vec::new());
        assert_eq!(strs(&sp.level(3).unwrap()), ["000"]);
        let p = BinaryTree::periodic(parse_bits("110").unwrap()).unwrap();
        assert_eq!(strs(&p.level(7).unwrap()), ["1101101"]);
        assert!(p.contains(&parse_bits("1101").unwrap()));
        assert!(!p.contains(&parse_bits("111").unwrap()));
    }

    #[test]
    fn axioms() {
        let sp = BinaryTree::single_path(Vec::new());
        let a = axiom_for_level(&sp, 2).unwrap();
        let want = Formula::and(
            Formula::not(Formula::label(Term::numeral(0))),
            Formula::not(Formula::label(Term::numeral(1))),
        );
        assert_eq!(a, want);
        let f = axiom_for_level(&BinaryTree::full(), 1).unwrap();
        let zero = Formula::label(Term::numeral(0));
        assert_eq!(f, Formula::or(Formula::not(zero.clone()), zero));
        assert_eq!(axiom_for_level(&BinaryTree::full(), 0).unwrap(), Formula::True);
    }

    #[test]
    fn diagonal_against_zeros_keeps_ones() {
        let t = diagonal_tree(&[builtin_guesser("zeros").unwrap()], 8).unwrap();
        for n in 1..=8 {
            assert!(t.contains(&alloc::vec![true; n]));
            assert!(!t.contains(&alloc::vec![false; n]));
        }
        let full = diagonal_tree(&[], 5).unwrap();
        assert_eq!(full.level(5).unwrap().len(), 32);
    }

    #[test]
    fn covered_levels_stay_unpruned() {
        let gs = [builtin_guesser("zeros").unwrap(), builtin_guesser("ones").unwrap()];
        let t = diagonal_tree(&gs, 6).unwrap();
        assert_eq!(t.level(1).unwrap().len(), 2);
        for g in &gs {
            assert_eq!(missed_levels(&t, g, 6).unwrap(), alloc::vec![2, 3, 4, 5, 6]);
        }
    }

    #[test]
    fn table_trees_must_be_closed() {
        let bad = alloc::vec![
            alloc::vec![Vec::new()],
            alloc::vec![parse_bits("1").unwrap()],
            alloc::vec![parse_bits("01").unwrap()]
        ];
        assert!(BinaryTree::table(bad).is_err());
        let ok = alloc::vec![alloc::vec![Vec::new()], alloc::vec![parse_bits("1").unwrap()]];
        let t = BinaryTree::table(ok).unwrap();
        assert_eq!(t.level(3).unwrap().len(), 4);
        assert_eq!(bits_to_string(&t.leftmost_path(3)), "100");
    }

    #[test]
    fn guesser_verdicts() {
        let p = parse_bits("101").unwrap();
        let exact = Guesser::new("exact", 1, move |_| alloc::vec![parse_bits("101").unwrap()]);
        let v = check_guesser(&exact, &p);
        assert!(v.hit && v.within_budget);
        let none = Guesser::new("none", 1, |_| Vec::new());
        assert!(!check_guesser(&none, &p).hit);
        let over = Guesser::new("over", 1, |n| alloc::vec![alloc::vec![false; n]; n * n + 1]);
        assert!(!check_guesser(&over, &p).within_budget);
    }
}
