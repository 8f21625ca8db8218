use qgcl::linalg::*;
use qgcl::ovf::SuperOp;
use qgcl::semantics::channel_of;
use qgcl::syntax::{library, parse, print_program};
use qgcl::walks::*;
use std::sync::Arc;

fn variants() -> Vec<Variant> {
    vec![
        Variant::Hadamard,
        Variant::Unidirectional,
        Variant::PositionTimeCoin(None),
        Variant::PositionTimeCoin(Some(Arc::new(|pos, t| {
            let phi = 0.4 * pos as f64 + 0.9 * t as f64;
            (r(2f64.sqrt() * phi.cos()), C64::from_polar(2f64.sqrt() * phi.sin(), 1.3 * t as f64), 0.0)
        }))),
        Variant::ThreeState,
        Variant::MultiCoin(3),
        Variant::TwoWalkerShared(library::cnot()),
    ]
}

fn step_residual(spec: &WalkSpec, t: usize) -> f64 {
    let reg = registry(spec);
    let ch = channel_of(&reg, &step_program(spec, t).unwrap()).unwrap().extend(&reg, &reg.all()).unwrap();
    let o = SuperOp::from_kraus(&reg, reg.all(), vec![step_oracle_at(spec, t).unwrap()]).unwrap();
    ch.residual(&o).unwrap()
}

#[test]
fn steps_match_oracles_at_n8() {
    for v in variants() {
        let spec = WalkSpec::new(v.clone(), 8, 4);
        for t in 0..4 {
            assert!(step_residual(&spec, t) < 1e-12, "{v:?} step {t}");
        }
    }
}

#[test]
fn step_channels_are_unitary() {
    for v in variants() {
        let spec = WalkSpec::new(v.clone(), 4, 1);
        let reg = registry(&spec);
        let ch = channel_of(&reg, &step_program(&spec, 0).unwrap()).unwrap();
        assert_eq!(ch.kraus().len(), 1, "{v:?}");
        assert!(ch.kraus()[0].is_unitary(TAU_EQ), "{v:?}");
    }
}

#[test]
fn time_dependence_is_visible() {
    let spec = WalkSpec::new(variants().swap_remove(3), 4, 2);
    let reg = registry(&spec);
    let step0 = channel_of(&reg, &step_program(&spec, 0).unwrap()).unwrap();
    let o1 = SuperOp::from_kraus(&reg, reg.all(), vec![step_oracle_at(&spec, 1).unwrap()]).unwrap();
    assert!(step0.residual(&o1).unwrap() > 1e-3);
}

fn single(variant: Variant, n: usize, steps: usize, coin: usize, pos: usize) -> Distribution {
    let mut spec = WalkSpec::new(variant, n, steps);
    spec.init = InitialState::Basis(vec![coin, pos]);
    position_distribution(&spec).unwrap()
}

fn assert_dist(d: &Distribution, expect: &[(usize, f64)]) {
    for (k, p) in d.probabilities.iter().enumerate() {
        let want = expect.iter().find(|e| e.0 == k).map_or(0.0, |e| e.1);
        assert!((p - want).abs() < 1e-12, "position {k}: {p} vs {want}");
    }
}

#[test]
fn hadamard_walk_by_hand() {
    assert_dist(&single(Variant::Hadamard, 8, 0, 0, 0), &[(0, 1.0)]);
    assert_dist(&single(Variant::Hadamard, 8, 1, 0, 0), &[(7, 0.5), (1, 0.5)]);
    // ½(|L,-2> + |R,0> + |L,0> - |R,2>)
    assert_dist(&single(Variant::Hadamard, 8, 2, 0, 0), &[(6, 0.25), (0, 0.5), (2, 0.25)]);
    // (|L,-3> + 2|L,-1> + |R,-1> - |L,1> + |R,3>) / 2√2
    assert_dist(&single(Variant::Hadamard, 8, 3, 0, 0), &[(5, 0.125), (7, 0.625), (1, 0.125), (3, 0.125)]);
}

#[test]
fn unidirectional_walk_by_hand() {
    assert_dist(&single(Variant::Unidirectional, 8, 1, 0, 3), &[(3, 0.5), (4, 0.5)]);
}

#[test]
fn three_state_walk_first_step() {
    // U|L> = (-1, 2, 2)/3
    assert_dist(&single(Variant::ThreeState, 8, 1, 0, 4), &[(3, 1.0 / 9.0), (4, 4.0 / 9.0), (5, 4.0 / 9.0)]);
}

#[test]
fn distributions_follow_oracle_powers() {
    for v in variants() {
        for steps in 0..=3 {
            let mut spec = WalkSpec::new(v.clone(), 6, steps);
            let u = library::hadamard();
            spec.init = InitialState::Vector({
                let d = registry(&spec).dim_of(&registry(&spec).all());
                let mut psi = vec![ZERO; d];
                // two basis states with Hadamard amplitudes
                psi[2] = u.get(0, 0);
                psi[2 + d / 2] = u.get(1, 0);
                psi
            });
            let got = position_distribution(&spec).unwrap();
            let want = oracle_distribution(&spec).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-10, "{v:?} T={steps}");
            assert!((got.total() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn multi_coin_cycles_through_coins() {
    let spec = WalkSpec::new(Variant::MultiCoin(2), 4, 3);
    let (reg, p) = build_walk_program(&spec).unwrap();
    assert_eq!(reg.names(&reg.all()), ["p", "c1", "c2"]);
    let text = print_program(&p);
    let order: Vec<usize> = text.match_indices("H[c").map(|(i, _)| i).collect();
    let coins: Vec<&str> = order.iter().map(|&i| &text[i + 2..i + 4]).collect();
    assert_eq!(coins, ["c1", "c2", "c1"]);
}

#[test]
fn two_walker_registry_and_oracle() {
    let spec = WalkSpec::new(Variant::TwoWalkerShared(library::cnot()), 2, 1);
    let reg = registry(&spec);
    assert_eq!(reg.names(&reg.all()), ["q1", "q2", "c1", "c2"]);
    let w = step_oracle(&spec).unwrap();
    assert_eq!(w.rows(), 16);
    assert!(w.is_unitary(1e-12));
}

#[test]
fn default_position_time_coin_is_hadamard() {
    assert!(position_time_coin(&None, 3, 5).unwrap().approx_eq(&library::hadamard(), 1e-15));
    let hook: CoinHook = Arc::new(|_, _| (C64::from_polar(2f64.sqrt() * 0.6, 0.4), r(2f64.sqrt() * 0.8), -0.8));
    assert!(position_time_coin(&Some(hook), 0, 0).unwrap().is_unitary(1e-12));
    let hook: CoinHook = Arc::new(|_, _| (r(1.0), r(1.0), 0.5));
    assert!(matches!(position_time_coin(&Some(hook), 2, 1), Err(WalkError::NonUnitaryCoin { position: 2, time: 1 })));
}

#[test]
fn invalid_initial_states() {
    let mut spec = WalkSpec::new(Variant::Hadamard, 4, 1);
    spec.init = InitialState::Vector(vec![ONE; 8]);
    assert!(spec.validate().is_err());
    spec.init = InitialState::Vector(vec![ONE; 3]);
    assert!(position_distribution(&spec).is_err());
}

#[test]
fn oracle_as_alternation() {
    // U_f|x1 x2, y> = |x1 x2, y ⊕ (x1 ∧ x2)>
    let f = parse("qvar x1, x2, y : 2; qif [x1, x2] |0> -> skip [] |1> -> skip [] |2> -> skip [] |3> -> X[y] fiq").unwrap();
    let ch = channel_of(&f.registry, &f.program).unwrap();
    let mut toffoli = CMatrix::zeros(8, 8);
    for k in 0..8 {
        let flip = if k >> 1 == 3 { 1 } else { 0 };
        toffoli[(k ^ flip, k)] = ONE;
    }
    let want = SuperOp::from_kraus(&f.registry, f.registry.all(), vec![toffoli]).unwrap();
    assert!(ch.residual(&want).unwrap() < 1e-14);
    let g = parse("qvar x1, x2, y : 2; qif [x1, x2] |0> -> skip [] |1> -> X[y] [] |2> -> X[y] [] |3> -> skip fiq").unwrap();
    let xor = channel_of(&g.registry, &g.program).unwrap();
    let cnots = parse("qvar x1, x2, y : 2; CNOT[x1, y]; CNOT[x2, y]").unwrap();
    let c = channel_of(&cnots.registry, &cnots.program).unwrap();
    assert!(xor.residual(&c).unwrap() < 1e-14);
}
