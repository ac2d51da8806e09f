use defeq_core::formula::{builtin, parse, radius, to_prenex, Direction, Formula, Signature, Term};
use defeq_core::model::{eval_windowed, r_type, Assignment, ChainInterval, Element, ModelFragment, Window};
use defeq_core::tree::{axiom_for_level, BinaryTree};
use proptest::prelude::*;

fn term() -> impl Strategy<Value = Term> {
    (prop_oneof![Just("x"), Just("y"), Just("z"), Just("0")], -2i64..=2).prop_map(|(v, k)| {
        let base = if v == "0" { Term::zero() } else { Term::var(v) };
        base.shift(k)
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![term().prop_map(Formula::label), (term(), term()).prop_map(|(a, b)| Formula::eq(a, b)),];
    atom.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (prop_oneof![Just("y"), Just("z")], inner.clone()).prop_map(|(v, b)| Formula::exists(v, b)),
            (prop_oneof![Just("y"), Just("z")], inner).prop_map(|(v, b)| Formula::forall(v, b)),
        ]
    })
}

fn qf_formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![term().prop_map(Formula::label), (term(), term()).prop_map(|(a, b)| Formula::eq(a, b)),];
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

fn labels(n: usize) -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), n)
}

fn fragment(a: Vec<bool>, b: Vec<bool>) -> ModelFragment {
    let lo = -(a.len() as i64 / 2);
    ModelFragment::new(vec![ChainInterval::new("c0", lo, a), ChainInterval::new("c1", 0, b)], "c0", 0).unwrap()
}

/// Evaluates at `x`, `y`, `z`; `None` when the formula leaves the fragment.
fn value(m: &ModelFragment, f: &Formula, w: &Window, at: &[Element; 3]) -> Option<bool> {
    let asg = Assignment::new().bind("x", at[0]).bind("y", at[1]).bind("z", at[2]);
    eval_windowed(m, f, &asg, w).ok()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printing_then_parsing_is_identity(f in formula()) {
        let back = parse(&f.to_string(), &Signature::base()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn prenex_form_is_equivalent(f in formula(), a in labels(21), b in labels(9), i in 0usize..3, j in 0usize..3) {
        let m = fragment(a, b);
        let p = to_prenex(&f);
        prop_assert!(p.prenex_parts().is_some());
        let w = Window::interior(&m, 2);
        let at = [Element::new(0, i as i64 - 1), Element::new(0, j as i64), Element::new(1, 4)];
        if let (Some(x), Some(y)) = (value(&m, &f, &w, &at), value(&m, &p, &w, &at)) {
            prop_assert_eq!(x, y, "{} vs {}", f, p);
        }
    }

    #[test]
    fn dictionaries_round_trip_semantically(f in formula(), a in labels(31), b in labels(11), i in -3i64..=3) {
        let m = fragment(a, b);
        let w = Window::interior(&m, 6);
        let at = [Element::new(0, i), Element::new(0, -i), Element::new(1, 5)];
        for name in ["identity", "swap", "a-shift"] {
            let d = builtin::by_name(name).unwrap();
            let there = d.translate(&f, Direction::Forward).unwrap();
            let back = d.translate(&there, Direction::Backward).unwrap();
            if let (Some(x), Some(y)) = (value(&m, &f, &w, &at), value(&m, &back, &w, &at)) {
                prop_assert_eq!(x, y, "{}: {} vs {}", name, f, back);
            }
        }
    }

    #[test]
    fn quantifier_free_radius_bounds_dependence(f in qf_formula(), a in labels(25), flip in 0usize..25) {
        // flipping a label farther than the radius from x, y, z and 0 leaves the value unchanged
        let r = radius(&f).unwrap() as i64;
        let pos = flip as i64 - 12;
        let at = [Element::new(0, 1), Element::new(0, 2), Element::new(0, -1)];
        prop_assume!([0i64, 1, 2, -1].iter().all(|p| (p - pos).abs() > r));
        let m = fragment(a.clone(), vec![true]);
        let mut a2 = a;
        a2[flip] = !a2[flip];
        let m2 = fragment(a2, vec![true]);
        let w = Window::full(&m);
        if let (Some(x), Some(y)) = (value(&m, &f, &w, &at), value(&m2, &f, &Window::full(&m2), &at)) {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn rtypes_are_well_formed(a in labels(41), i in -10i64..=10, j in -10i64..=10, r in 0u64..4) {
        let m = fragment(a, vec![false; 12]);
        let t = r_type(&m, &[Element::new(0, i), Element::new(0, j), Element::new(1, 6)], r).unwrap();
        prop_assert!(t.is_well_formed());
        prop_assert_eq!(t.arity(), 3);
    }

    #[test]
    fn axioms_pick_out_tree_levels(p in labels(6), q in labels(6), n in 0usize..6) {
        let t = BinaryTree::single_path(q.clone());
        let ax = axiom_for_level(&t, n).unwrap();
        let mut l = vec![false; 8];
        l.extend(p.iter().copied());
        l.extend([false; 4]);
        let m = ModelFragment::new(vec![ChainInterval::new("c0", -8, l)], "c0", 0).unwrap();
        let holds = eval_windowed(&m, &ax, &Assignment::new(), &Window::full(&m)).unwrap();
        prop_assert_eq!(holds, p[..n] == q[..n]);
    }
}
