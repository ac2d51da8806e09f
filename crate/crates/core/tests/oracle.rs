use defeq_core::formula::{builtin, parse};
use defeq_core::model::{ChainInterval, ModelFragment, Oracle, OracleModel, Window};

fn fragment() -> ModelFragment {
    let labels: Vec<bool> = (0..61).map(|i| i % 3 == 0 || i % 7 == 2).collect();
    ModelFragment::new(
        vec![ChainInterval::new("c0", -30, labels), ChainInterval::new("c1", 0, [true, false].repeat(10))],
        "c0",
        0,
    )
    .unwrap()
}

#[test]
fn handles_enumerate_the_domain() {
    let m = fragment();
    let w = Window::interior(&m, 4);
    let o = OracleModel::new(m.clone(), builtin::swap(), w.clone(), 9).unwrap();
    let hs = o.handles();
    assert_eq!(hs, (0..w.len() as u32).collect::<Vec<_>>());
    assert_eq!(o.enumerate(w.len()), None);
    let h = o.hidden();
    let mut es: Vec<_> = hs.iter().map(|&x| h.element(x).unwrap()).collect();
    es.sort();
    assert_eq!(es, w.elements());
}

#[test]
fn seeds_relabel_but_answers_follow_elements() {
    let m = fragment();
    let w = Window::interior(&m, 4);
    let d = builtin::a_shift();
    let o1 = OracleModel::new(m.clone(), d.clone(), w.clone(), 1).unwrap();
    let o2 = OracleModel::new(m, d.clone(), w.clone(), 2).unwrap();
    let (h1, h2) = (o1.hidden(), o2.hidden());
    let relabelled = (0..w.len() as u32).filter(|&x| h1.element(x) != h2.element(x)).count();
    assert!(relabelled > w.len() / 2);

    let f = parse("(and (A' x) (not (A' (S' x))))", &d.target).unwrap();
    let vars = vec!["x".to_string()];
    let (q1, q2) = (o1.prepare(&f, &vars).unwrap(), o2.prepare(&f, &vars).unwrap());
    for x in o1.handles() {
        let y = h2.handle(h1.element(x).unwrap()).unwrap();
        assert_eq!(o1.eval(&q1, &[x]).unwrap(), o2.eval(&q2, &[y]).unwrap());
        assert_eq!(o1.eval(&q1, &[x]).unwrap(), h1.truth(&f, &vars, &[x]).unwrap());
    }
}

#[test]
fn target_formulas_agree_with_their_base_translation() {
    let m = fragment();
    let w = Window::interior(&m, 6);
    for d in [builtin::identity(), builtin::swap(), builtin::a_shift()] {
        let o = OracleModel::new(m.clone(), d.clone(), w.clone(), 4).unwrap();
        let h = o.hidden();
        let f = parse("(exists y (and (A' y) (= y (S' (S' x)))))", &d.target).unwrap();
        let back = d.translate(&f, defeq_core::formula::Direction::Backward).unwrap();
        let vars = vec!["x".to_string()];
        for x in o.handles().into_iter().filter(|&x| h.element(x).unwrap().pos.abs() < 10) {
            assert_eq!(h.truth(&f, &vars, &[x]).unwrap(), h.truth_l(&back, &vars, &[x]).unwrap(), "{}", d.name);
        }
    }
}

#[test]
fn unknown_handles_are_errors() {
    let m = fragment();
    let w = Window::interior(&m, 4);
    let o = OracleModel::new(m, builtin::identity(), w, 0).unwrap();
    let f = parse("(A' x)", &builtin::identity().target).unwrap();
    let q = o.prepare(&f, &["x".to_string()]).unwrap();
    assert!(o.eval(&q, &[100_000]).is_err());
    assert!(o.eval(&q, &[]).is_err());
}
