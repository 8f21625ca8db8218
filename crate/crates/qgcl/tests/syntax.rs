use proptest::prelude::*;
use qgcl::linalg::{CMatrix, TAU_EQ};
use qgcl::random::{self, ProgramGen};
use qgcl::registry::Registry;
use qgcl::semantics::channel_of;
use qgcl::syntax::*;
use qgcl::walks::{self, Variant, WalkSpec};

const WORKED: &str = "qvar c : 2; qvar q : 2;
qif [c] |0> -> H[q]; measure MZ[q : x] = 0 -> X[q] [] 1 -> Y[q] end
     [] |1> -> S[q]; measure MX[q : x] = + -> Y[q] [] - -> Z[q] end; X[q];
               measure MZ[q : y] = 0 -> Z[q] [] 1 -> X[q] end
fiq";

fn clauses(src: &str) -> Vec<Clause> {
    let f = parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
    check(&f.registry, &f.program).into_iter().map(|d| d.clause).collect()
}

#[test]
fn worked_example_structure() {
    let f = parse(WORKED).unwrap();
    assert!(check(&f.registry, &f.program).is_empty());
    let Program::QIf { coin, alpha, branches } = &f.program else { panic!("{:?}", f.program) };
    assert_eq!(coin, &["c"]);
    assert!(alpha.is_none());
    assert_eq!(branches.len(), 2);
    assert_eq!(branches[0].guard, Guard::Basis(0));
    let Program::Seq(first, rest) = &branches[1].body else { panic!() };
    assert!(matches!(first.as_ref(), Program::Unitary { gate, .. } if gate.name == "S"));
    let Program::Seq(m, _) = rest.as_ref() else { panic!() };
    let Program::Measure { meas, var, branches, .. } = m.as_ref() else { panic!() };
    assert_eq!((meas.name.as_str(), var.as_str()), ("MX", "x"));
    assert_eq!(branches.iter().map(|b| b.0.as_str()).collect::<Vec<_>>(), ["+", "-"]);
    assert_eq!(f.program.qvar().into_iter().collect::<Vec<_>>(), ["c", "q"]);
    assert_eq!(f.program.cvar().into_iter().collect::<Vec<_>>(), ["c"]);
    assert_eq!(f.program.var().into_iter().collect::<Vec<_>>(), ["x", "y"]);
}

#[test]
fn hadamard_step_matches_the_oracle() {
    let f = parse("qvar c : 2; qvar p : 4; [H[c]] (+) |0> -> TL[p] [] |1> -> TR[p] end").unwrap();
    assert!(check(&f.registry, &f.program).is_empty());
    let ch = channel_of(&f.registry, &f.program).unwrap();
    let oracle = walks::step_oracle(&WalkSpec::new(Variant::Hadamard, 4, 1)).unwrap();
    let o = qgcl::ovf::SuperOp::from_kraus(&f.registry, f.registry.all(), vec![oracle]).unwrap();
    assert!(ch.residual(&o).unwrap() < 1e-12);
}

#[test]
fn each_clause_has_a_witness() {
    let cases = [
        ("qvar a : 2; CNOT[a, a]", Clause::Unitary),
        ("qvar a : 2; gate G = [[1, 0], [0, 2]]; G[a]", Clause::Unitary),
        ("qvar a : 2; cvar x : {0}; measure MZ[a : x] = 0 -> skip [] 1 -> skip end", Clause::Measurement),
        ("qvar a : 2; meas M = {u: [[1, 0], [0, 0]]}; measure M[a : x] = u -> skip end", Clause::Measurement),
        (
            "qvar a : 2; measure MZ[a : x] = 0 -> measure MZ[a : x] = 0 -> skip [] 1 -> skip end [] 1 -> skip end",
            Clause::MeasureFresh,
        ),
        ("qvar a : 2; qif [a] |0> -> X[a] [] |1> -> skip fiq", Clause::CoinDisjoint),
        ("qvar a, b : 2; qif [a] |0> -> X[b] [] |(0.6, 0.8)> -> skip fiq", Clause::GuardBasis),
        (
            "qvar a, b : 2; measure MZ[a : x] = 0 -> skip [] 1 -> skip end; measure MZ[b : x] = 0 -> skip [] 1 -> skip end",
            Clause::SeqDisjoint,
        ),
        ("qvar a : 2; pchoice X[a] @ 0.7 [] skip @ 0.6 end", Clause::ProbWeights),
        ("qvar a, b : 2; begin local a := |0>; X[b] end", Clause::Block),
        ("qvar a, b : 2; qif [a] {|0>} -> X[b] [] {|0>} -> skip fiq", Clause::SubspaceBasis),
    ];
    for (src, clause) in cases {
        let got = clauses(src);
        assert!(got.contains(&clause), "{src}: expected {clause:?}, got {got:?}");
    }
}

#[test]
fn well_formed_corpus_checks_clean() {
    let ok = [
        "skip",
        "abort",
        "qvar a, b : 2; CNOT[b, a]",
        "qvar a : 3; GROVER[a]; PERM(2, 0, 1)[a]",
        "qvar a, b : 2; qif [a] |(1/sqrt(2), 1/sqrt(2))> -> X[b] [] |(1/sqrt(2), -1/sqrt(2))> -> Z[b] fiq",
        "qvar a, b : 2; qif (phase 0.5, 1.5) [a] |0> -> X[b] [] |1> -> skip fiq",
        "qvar a, b : 2; cvar x : {0, 1, 2}; measure MZ[a : x] = 0 -> skip [] 1 -> X[b] end",
        "qvar a, b : 2; begin local a := [[0.5, 0.5], [0.5, 0.5]]; CNOT[a, b] end",
        "qvar a : 2; pchoice X[a] @ 0.25 [] skip @ 0.5 end",
        "qvar a : 4; qvar b : 2; qif [a] {|0>, |1>} -> X[b] [] {|2>, |3>} -> skip fiq",
        "qvar a, b, c : 2; [H[a]; CNOT[a, b]] (+) |0> -> X[c] [] |1> -> skip [] |2> -> Y[c] [] |3> -> Z[c] end",
    ];
    for src in ok {
        assert_eq!(clauses(src), [], "{src}");
    }
}

#[test]
fn parse_errors_report_positions() {
    let bad = [
        ("qvar a : 2;\nX[b]", 2),
        ("qvar a : 2; X[a", 1),
        ("qvar a : 2;\n\nqif [a] |0> -> skip fiq", 3),
        ("qvar a : 2; qif [a] |2> -> skip [] |1> -> skip fiq", 1),
        ("qvar a : 2; FOO[a]", 1),
        ("qvar a : 2; qif (wobbly) [a] |0> -> skip [] |1> -> skip fiq", 1),
    ];
    for (src, line) in bad {
        let e = parse(src).expect_err(src);
        assert_eq!(e.line, line, "{src}: {e}");
    }
}

#[test]
fn variable_sets() {
    let f = parse("qvar a, b, c : 2; measure MZ[a : x] = 0 -> qif [b] |0> -> X[c] [] |1> -> skip fiq [] 1 -> skip end").unwrap();
    let p = &f.program;
    assert_eq!(p.qvar().into_iter().collect::<Vec<_>>(), ["a", "b", "c"]);
    assert_eq!(p.cvar().into_iter().collect::<Vec<_>>(), ["b"]);
    assert_eq!(p.var().into_iter().collect::<Vec<_>>(), ["x"]);
    assert!(p.has_measurement());
}

#[test]
fn quantum_choice_desugars_to_coin_then_alternation() {
    let f = parse("qvar a, b : 2; [H[a]] (+) |0> -> X[b] [] |1> -> skip end").unwrap();
    let d = desugar_qchoice(&f.registry, &f.program).unwrap();
    let Program::Seq(coin, rest) = &d else { panic!("{d:?}") };
    assert!(matches!(coin.as_ref(), Program::Unitary { .. }));
    assert!(matches!(rest.as_ref(), Program::QIf { .. }));
}

#[test]
fn nested_choice_keeps_its_channel() {
    let src = "qvar a, b, c, d : 2;
        [H[a]] (+) |0> -> ([H[b]] (+) |0> -> X[c] [] |1> -> measure MZ[c : x] = 0 -> skip [] 1 -> Y[d] end end)
                [] |1> -> Z[c]
        end";
    let f = parse(src).unwrap();
    assert!(check(&f.registry, &f.program).is_empty());
    let direct = channel_of(&f.registry, &f.program).unwrap();
    let sugar_free = desugar_qchoice(&f.registry, &f.program).unwrap();
    let via = channel_of(&f.registry, &sugar_free).unwrap();
    assert!(direct.residual(&via).unwrap() < TAU_EQ);
}

#[test]
fn printed_worked_example_reparses() {
    let f = parse(WORKED).unwrap();
    let text = print_file(&f.registry, &f.program);
    let g = parse(&text).unwrap();
    assert_eq!(g.program, f.program);
    assert_eq!(print_file(&g.registry, &g.program), text);
}

fn corpus_registry() -> Registry {
    let mut reg = Registry::new();
    for (n, d) in [("a", 2), ("b", 3), ("c", 2)] {
        reg.declare_qvar(n, d).unwrap();
    }
    reg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse(seed in any::<u64>(), depth in 1usize..4) {
        let mut rng = random::rng(seed);
        let mut gen = ProgramGen::new(&corpus_registry());
        gen.abort_weight = 1;
        let vars: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let p = gen.program(&mut rng, &vars, depth);
        let text = print_file(gen.registry(), &p);
        let back = parse(&text).unwrap();
        prop_assert!(check(&back.registry, &back.program).is_empty());
        prop_assert_eq!(print_file(&back.registry, &back.program), text.clone());
        prop_assert_eq!(print_program(&back.program), print_program(&p));
        let a = channel_of(gen.registry(), &p).unwrap();
        let b = channel_of(&back.registry, &back.program).unwrap();
        prop_assert!(a.residual(&b).unwrap() < 1e-10);
    }

    #[test]
    fn canonical_guards_survive_printing(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let u = random::unitary(&mut rng, 2);
        let body = |k: usize| if k == 0 { "X[b]" } else { "skip" };
        let guard = |k: usize| format!("|({}, {})>", qgcl::syntax::printer::scalar(u.get(0, k)), qgcl::syntax::printer::scalar(u.get(1, k)));
        let src = format!("qvar a, b : 2; qif [a] {} -> {} [] {} -> {} fiq", guard(0), body(0), guard(1), body(1));
        let f = parse(&src).unwrap();
        prop_assert!(check(&f.registry, &f.program).is_empty());
        let Program::QIf { branches, .. } = &f.program else { unreachable!() };
        let got = CMatrix::column(&branches[0].guard.vector(2));
        prop_assert!(got.approx_eq(&CMatrix::column(&u.col(0)), 1e-12));
    }
}
