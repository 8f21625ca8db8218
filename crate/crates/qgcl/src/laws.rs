//! Numerical validation of the algebraic laws of alternation and choice,
//! with the coefficient families their proofs construct.

use crate::linalg::{self, CMatrix, C64, TAU_EQ};
use crate::ovf::{AlphaFamily, OpValuedFn, OvfError};
use crate::random::{self, ProgramGen, Rand};
use crate::registry::Registry;
use crate::semantics::{channel_of, semi_classical, Result, SemanticsError};
use crate::syntax::{library, AlphaEntry, AlphaSpec, BlockState, Gate, Guard, Program, QBranch};
use crate::wp::{coin_free_residual, equivalence_residual};
use rand::seq::SliceRandom;
use rand::Rng;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LawId {
    AltIdem,
    AltComm,
    AltAssoc,
    AltDist,
    ChoiceIdem,
    ChoiceComm,
    ChoiceAssoc,
    ChoiceDist,
    CoinLocalize,
    ProbImpl,
}

impl LawId {
    pub const ALL: [LawId; 10] = [
        LawId::AltIdem,
        LawId::AltComm,
        LawId::AltAssoc,
        LawId::AltDist,
        LawId::ChoiceIdem,
        LawId::ChoiceComm,
        LawId::ChoiceAssoc,
        LawId::ChoiceDist,
        LawId::CoinLocalize,
        LawId::ProbImpl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawId::AltIdem => "ALT_IDEM",
            LawId::AltComm => "ALT_COMM",
            LawId::AltAssoc => "ALT_ASSOC",
            LawId::AltDist => "ALT_DIST",
            LawId::ChoiceIdem => "CHOICE_IDEM",
            LawId::ChoiceComm => "CHOICE_COMM",
            LawId::ChoiceAssoc => "CHOICE_ASSOC",
            LawId::ChoiceDist => "CHOICE_DIST",
            LawId::CoinLocalize => "COIN_LOCALIZE",
            LawId::ProbImpl => "PROB_IMPL",
        }
    }

    pub fn parse(s: &str) -> Option<LawId> {
        LawId::ALL.into_iter().find(|l| l.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for LawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Equiv,
    EquivCf,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Equiv => "EQUIV",
            Relation::EquivCf => "EQUIV_CF",
        })
    }
}

#[derive(Clone, Debug)]
pub struct LawInstance {
    pub id: LawId,
    pub registry: Registry,
    pub lhs: Program,
    pub rhs: Program,
    pub relation: Relation,
    pub alpha: Option<AlphaFamily>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LawVerdict {
    pub pass: bool,
    pub residual: f64,
}

pub fn check_law(inst: &LawInstance, tol: f64) -> Result<LawVerdict> {
    let reg = &inst.registry;
    if inst.id == LawId::ChoiceIdem {
        choice_idem_hypothesis(reg, &inst.lhs)?;
    }
    let residual = match inst.relation {
        Relation::Equiv => equivalence_residual(reg, &inst.lhs, &inst.rhs)?,
        Relation::EquivCf => coin_free_residual(reg, &inst.lhs, &inst.rhs)?,
    };
    Ok(LawVerdict { pass: residual <= tol, residual })
}

/// tr⟦Q⟧(ρ) = 1 for the coin program Q of a block-wrapped choice.
fn choice_idem_hypothesis(reg: &Registry, lhs: &Program) -> Result<()> {
    let Program::Block { locals, init, body } = lhs else {
        return Err(SemanticsError::Unsupported("an idempotence instance without a block"));
    };
    let Program::QChoice { coin, .. } = body.as_ref() else {
        return Err(SemanticsError::Unsupported("an idempotence instance without a quantum choice"));
    };
    let d = locals.iter().map(|n| reg.qvar(reg.qvar_id(n).expect("declared")).dim).product();
    let ch = channel_of(reg, coin)?;
    let t = ch.apply(&init.density(d))?.trace();
    if (t.re - 1.0).abs() > TAU_EQ || t.im.abs() > TAU_EQ {
        return Err(SemanticsError::State(format!("coin program loses trace: {}", linalg::format_complex(t))));
    }
    Ok(())
}

/// Explicit coefficient syntax for a family over the given branch functions.
pub fn alpha_spec_of(alpha: &AlphaFamily, fs: &[OpValuedFn]) -> AlphaSpec {
    let labels: Vec<Vec<String>> = fs.iter().map(|f| f.states().map(|s| s.label()).collect()).collect();
    let sizes = alpha.sizes();
    let mut entries = Vec::new();
    for i in 0..sizes.len() {
        let mut others = sizes.to_vec();
        others[i] = 1;
        let total: usize = others.iter().product();
        for k in 0..total {
            let t = linalg::digits(k, &others);
            let value = alpha.get(i, &t);
            if value.norm() == 0.0 {
                continue;
            }
            let names = (0..sizes.len()).filter(|&j| j != i).map(|j| labels[j][t[j]].clone()).collect();
            entries.push(AlphaEntry { branch: i, others: names, value });
        }
    }
    AlphaSpec::Explicit(entries)
}

/// Coefficients for flattening `qif[c](|i> -> Q_i; qif[r](|l> -> R_il))`
/// into a single alternation over |i,l>: α = Γ_i Λ_il / Θ_i. The result must
/// not depend on the states of the Q_h; otherwise it is not a family.
pub fn synth_alpha_assoc(reg: &Registry, inner_coin: &[String], q: &[Program], r: &[Vec<Program>]) -> Result<AlphaFamily> {
    let m = q.len();
    let mut gamma = Vec::with_capacity(m);
    let mut theta = Vec::with_capacity(m);
    let mut lam: Vec<Vec<Vec<f64>>> = Vec::with_capacity(m);
    let mut inner_sizes: Vec<Vec<usize>> = Vec::with_capacity(m);
    for (qh, rh) in q.iter().zip(r) {
        let x = Program::QIf {
            coin: inner_coin.to_vec(),
            alpha: None,
            branches: rh.iter().enumerate().map(|(l, b)| QBranch { guard: Guard::Basis(l), body: b.clone() }).collect(),
        };
        let y = semi_classical(reg, &Program::seq(qh.clone(), x))?;
        gamma.push(y.lambdas());
        theta.push(semi_classical(reg, qh)?.lambdas());
        let fs = rh.iter().map(|b| semi_classical(reg, b)).collect::<Result<Vec<_>>>()?;
        inner_sizes.push(fs.iter().map(OpValuedFn::len).collect());
        lam.push(fs.iter().map(OpValuedFn::lambdas).collect());
    }
    let flat: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..r[i].len()).map(move |l| (i, l))).collect();
    let sizes: Vec<usize> = flat.iter().map(|&(i, l)| inner_sizes[i][l]).collect();
    let xs: Vec<usize> = inner_sizes.iter().map(|s| s.iter().product()).collect();
    let dq: Vec<usize> = theta.iter().map(Vec::len).collect();
    let offsets: Vec<usize> = (0..m).scan(0, |acc, i| {
        let o = *acc;
        *acc += r[i].len();
        Some(o)
    }).collect();

    let value = |b: usize, t: &[usize], deltas: &[usize]| -> Option<f64> {
        let (i, l) = flat[b];
        let mut num = 1.0;
        let mut den = 1.0;
        for h in (0..m).filter(|&h| h != i) {
            let sigma = &t[offsets[h]..offsets[h] + r[h].len()];
            let s = linalg::undigits(sigma, &inner_sizes[h]);
            num *= gamma[h][deltas[h] * xs[h] + s];
            den *= theta[h][deltas[h]];
        }
        if den == 0.0 {
            return None;
        }
        let big_lambda: f64 = (0..r[i].len()).filter(|&k| k != l).map(|k| lam[i][k][t[offsets[i] + k]]).product();
        Some(num * big_lambda / den)
    };

    let delta_tuples: Vec<Vec<usize>> = {
        let total: usize = dq.iter().product();
        (0..total).map(|k| linalg::digits(k, &dq)).collect()
    };
    let pick = |b: usize, t: &[usize]| -> f64 {
        let (i, _) = flat[b];
        delta_tuples
            .iter()
            .filter_map(|d| {
                let mut d = d.clone();
                d[i] = 0;
                value(b, t, &d)
            })
            .next()
            .unwrap_or(0.0)
    };
    let total: usize = sizes.iter().product();
    for b in 0..flat.len() {
        for k in 0..total {
            let mut t = linalg::digits(k, &sizes);
            t[b] = 0;
            let v0 = pick(b, &t);
            for d in &delta_tuples {
                if let Some(v) = value(b, &t, d) {
                    if (v - v0).abs() > TAU_EQ {
                        return Err(OvfError::AlphaDependence(b).into());
                    }
                }
            }
        }
    }
    Ok(AlphaFamily::from_fn(&sizes, |b, t| C64::new(pick(b, t), 0.0)))
}

/// Coefficients for `qif(α)(|i> -> P_i; Q)`: α^{(i)} = Λ_i / √(|Δ(Q)|^{n-1}).
pub fn synth_alpha_dist(reg: &Registry, p: &[Program], q: &Program) -> Result<AlphaFamily> {
    let lam = p.iter().map(|b| Ok(semi_classical(reg, b)?.lambdas())).collect::<Result<Vec<_>>>()?;
    let nq = semi_classical(reg, q)?.len();
    let n = p.len();
    let sizes: Vec<usize> = lam.iter().map(|l| l.len() * nq).collect();
    let norm = (nq as f64).powi(n as i32 - 1).sqrt();
    Ok(AlphaFamily::from_fn(&sizes, |i, t| {
        let big: f64 = (0..n).filter(|&k| k != i).map(|k| lam[k][t[k] / nq]).product();
        C64::new(big / norm, 0.0)
    }))
}

fn names(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

fn gate(name: &str, m: CMatrix, vars: &[&str]) -> Program {
    Program::Unitary { gate: Gate { name: name.into(), matrix: m, builtin: false }, qvars: names(vars) }
}

fn qif(coin: &[&str], alpha: Option<AlphaSpec>, guards: Vec<Guard>, bodies: Vec<Program>) -> Program {
    Program::QIf {
        coin: names(coin),
        alpha,
        branches: guards.into_iter().zip(bodies).map(|(guard, body)| QBranch { guard, body }).collect(),
    }
}

fn qchoice(coin: Program, alpha: Option<AlphaSpec>, guards: Vec<Guard>, bodies: Vec<Program>) -> Program {
    Program::QChoice {
        coin: Box::new(coin),
        alpha,
        branches: guards.into_iter().zip(bodies).map(|(guard, body)| QBranch { guard, body }).collect(),
    }
}

fn basis(d: usize) -> Vec<Guard> {
    (0..d).map(Guard::Basis).collect()
}

fn perm_gate(perm: &[usize]) -> Gate {
    let params = perm.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
    Gate { name: format!("PERM({params})"), matrix: library::permutation(perm), builtin: true }
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Variables of a generated instance: coin `c`, inner coin `r`, system `q`.
fn base_registry(coin_dim: usize) -> Registry {
    let mut reg = Registry::new();
    reg.declare_qvar("c", coin_dim).expect("fresh");
    reg.declare_qvar("r", 2).expect("fresh");
    reg.declare_qvar("q", 2).expect("fresh");
    reg
}

fn branches(gen: &mut ProgramGen, rng: &mut Rand, n: usize, measuring: bool) -> Vec<Program> {
    let q = names(&["q"]);
    (0..n)
        .map(|_| {
            if measuring && rng.gen_bool(0.5) {
                let a = gen.program(rng, &q, 0);
                let b = gen.program(rng, &q, 0);
                gen.measure(rng, "q", vec![a, b])
            } else {
                gen.gate(rng, &q)
            }
        })
        .collect()
}

fn coin_program(gen: &mut ProgramGen, rng: &mut Rand, measuring: bool) -> Program {
    let c = names(&["c"]);
    if measuring && rng.gen_bool(0.3) {
        let a = gen.gate(rng, &c);
        let b = gen.gate(rng, &c);
        let m = gen.measure(rng, "c", vec![a, b]);
        Program::seq(gen.gate(rng, &c), m)
    } else {
        gen.gate(rng, &c)
    }
}

/// One randomly drawn instance of `id`.
pub fn instance(id: LawId, rng: &mut Rand) -> Result<LawInstance> {
    let d = if rng.gen_bool(0.5) { 2 } else { 3 };
    let reg0 = base_registry(d);
    let mut gen = ProgramGen::new(&reg0);
    gen.abort_weight = 1;
    let mut relation = Relation::Equiv;
    let mut alpha = None;
    let (lhs, rhs) = match id {
        LawId::AltIdem => {
            let mf = ProgramGen::measurement_free(&reg0).program(rng, &names(&["q"]), 2);
            let guards = if rng.gen_bool(0.5) { basis(d) } else { gen.guards(rng, d, true) };
            (qif(&["c"], None, guards, vec![mf.clone(); d]), mf)
        }
        LawId::AltComm => {
            let ps = branches(&mut gen, rng, d, true);
            let mut tau: Vec<usize> = (0..d).collect();
            tau.shuffle(rng);
            let permuted = tau.iter().map(|&t| ps[t].clone()).collect();
            let lhs = qif(&["c"], None, basis(d), permuted);
            let rhs = Program::seq_all(vec![
                Program::Unitary { gate: perm_gate(&tau), qvars: names(&["c"]) },
                qif(&["c"], None, basis(d), ps),
                Program::Unitary { gate: perm_gate(&inverse(&tau)), qvars: names(&["c"]) },
            ]);
            (lhs, rhs)
        }
        LawId::AltAssoc | LawId::ChoiceAssoc => {
            let rs: Vec<Vec<Program>> = (0..d).map(|_| branches(&mut gen, rng, 2, true)).collect();
            let choice = id == LawId::ChoiceAssoc;
            let qs: Vec<Program> = if choice { (0..d).map(|_| gen.gate(rng, &names(&["r"]))).collect() } else { vec![Program::Skip; d] };
            let reg = gen.registry();
            let fam = synth_alpha_assoc(reg, &names(&["r"]), &qs, &rs)?;
            let fs = rs.iter().flatten().map(|b| semi_classical(reg, b)).collect::<Result<Vec<_>>>()?;
            let spec = alpha_spec_of(&fam, &fs);
            alpha = Some(fam);
            let flat_guards: Vec<Guard> = (0..2 * d).map(Guard::Basis).collect();
            let flat_bodies: Vec<Program> = rs.iter().flatten().cloned().collect();
            if choice {
                let p = coin_program(&mut gen, rng, true);
                let inner = qs
                    .iter()
                    .zip(&rs)
                    .map(|(qi, ri)| qchoice(qi.clone(), None, basis(2), ri.clone()))
                    .collect();
                let lhs = qchoice(p.clone(), None, basis(d), inner);
                let r_prog = qchoice(p, None, basis(d), qs);
                (lhs, qchoice(r_prog, Some(spec), flat_guards, flat_bodies))
            } else {
                let inner = rs.iter().map(|ri| qif(&["r"], None, basis(2), ri.clone())).collect();
                (qif(&["c"], None, basis(d), inner), qif(&["c", "r"], Some(spec), flat_guards, flat_bodies))
            }
        }
        LawId::AltDist | LawId::ChoiceDist => {
            let ps = branches(&mut gen, rng, d, true);
            let measuring = rng.gen_bool(0.6);
            let q = if measuring {
                let a = gen.gate(rng, &names(&["q"]));
                let b = gen.gate(rng, &names(&["q"]));
                gen.measure(rng, "q", vec![a, b])
            } else {
                gen.gate(rng, &names(&["q"]))
            };
            let bodies: Vec<Program> = ps.iter().map(|p| Program::seq(p.clone(), q.clone())).collect();
            let spec = if measuring {
                relation = Relation::EquivCf;
                let reg = gen.registry();
                let fam = synth_alpha_dist(reg, &ps, &q)?;
                let fs = bodies.iter().map(|b| semi_classical(reg, b)).collect::<Result<Vec<_>>>()?;
                let spec = alpha_spec_of(&fam, &fs);
                alpha = Some(fam);
                Some(spec)
            } else {
                None
            };
            if id == LawId::ChoiceDist {
                let p = coin_program(&mut gen, rng, true);
                (Program::seq(qchoice(p.clone(), None, basis(d), ps), q), qchoice(p, spec, basis(d), bodies))
            } else {
                (Program::seq(qif(&["c"], None, basis(d), ps), q), qif(&["c"], spec, basis(d), bodies))
            }
        }
        LawId::ChoiceIdem => {
            let p = gen.program(rng, &names(&["q"]), 2);
            let coin = coin_program(&mut gen, rng, true);
            let rho = random::density(rng, d);
            let body = qchoice(coin, None, basis(d), vec![p.clone(); d]);
            (Program::Block { locals: names(&["c"]), init: BlockState::Matrix(rho), body: Box::new(body) }, p)
        }
        LawId::ChoiceComm => {
            let ps = branches(&mut gen, rng, d, true);
            let p = coin_program(&mut gen, rng, true);
            let mut tau: Vec<usize> = (0..d).collect();
            tau.shuffle(rng);
            let permuted = tau.iter().map(|&t| ps[t].clone()).collect();
            let lhs = qchoice(p.clone(), None, basis(d), permuted);
            let coin = Program::seq(p, Program::Unitary { gate: perm_gate(&tau), qvars: names(&["c"]) });
            let rhs = Program::seq(
                qchoice(coin, None, basis(d), ps),
                Program::Unitary { gate: perm_gate(&inverse(&tau)), qvars: names(&["c"]) },
            );
            (lhs, rhs)
        }
        LawId::CoinLocalize => {
            let ps = branches(&mut gen, rng, d, true);
            let u = random::unitary(rng, d);
            let ud = u.adjoint();
            let guards = (0..d).map(|i| Guard::Vector(ud.col(i))).collect();
            let lhs = qchoice(gate("U", u.clone(), &["c"]), None, basis(d), ps.clone());
            (lhs, Program::seq(qif(&["c"], None, guards, ps), gate("U", u, &["c"])))
        }
        LawId::ProbImpl => {
            let ps = branches(&mut gen, rng, d, true);
            let p = coin_program(&mut gen, rng, true);
            let rho = random::density(rng, d);
            prob_impl_pair(gen.registry(), p, rho, ps)?
        }
    };
    Ok(LawInstance { id, registry: gen.registry().clone(), lhs, rhs, relation, alpha })
}

/// `begin local c := ρ; [P](⊕|i> -> P_i) end` and `∑ P_i @ p_i` with
/// p_i = <i|⟦P⟧(ρ)|i>; branches of weight zero are dropped.
pub fn prob_impl_pair(reg: &Registry, p: Program, rho: CMatrix, ps: Vec<Program>) -> Result<(Program, Program)> {
    let ch = channel_of(reg, &p)?;
    let out = ch.apply(&rho)?;
    let weights: Vec<f64> = (0..ps.len()).map(|i| out[(i, i)].re).collect();
    let coin: Vec<String> = reg.names(ch.vars());
    let lhs = Program::Block {
        locals: coin,
        init: BlockState::Matrix(rho),
        body: Box::new(qchoice(p, None, basis(ps.len()), ps.clone())),
    };
    let mix: Vec<(Program, f64)> = ps.into_iter().zip(weights).filter(|(_, w)| *w > 1e-14).collect();
    let rhs = if mix.is_empty() { Program::Abort } else { Program::ProbChoice(mix) };
    Ok((lhs, rhs))
}

/// `per_law` instances of every law, drawn from one seeded stream per law.
pub fn corpus(seed: u64, per_law: usize) -> Result<Vec<LawInstance>> {
    let mut out = Vec::new();
    for (k, id) in LawId::ALL.into_iter().enumerate() {
        let mut rng = random::rng(seed.wrapping_add(k as u64 * 0x9e37_79b9));
        for _ in 0..per_law {
            out.push(instance(id, &mut rng)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn every_law_on_a_small_corpus() {
        for inst in corpus(11, 3).unwrap() {
            let v = check_law(&inst, TAU_EQ).unwrap();
            assert!(v.pass, "{} {} residual {}", inst.id, inst.relation, v.residual);
        }
    }

    #[test]
    fn unitary_nest_flattens_with_unit_coefficients() {
        let f = parse("qvar c, r, q : 2; skip").unwrap();
        let reg = &f.registry;
        let rs: Vec<Vec<Program>> = ["X", "Y"]
            .iter()
            .map(|g| vec![parse(&format!("qvar q : 2; {g}[q]")).unwrap().program, Program::Skip])
            .collect();
        let fam = synth_alpha_assoc(reg, &names(&["r"]), &[Program::Skip, Program::Skip], &rs).unwrap();
        let total: usize = fam.sizes().iter().product();
        assert_eq!(total, 1);
        for i in 0..4 {
            assert_eq!(fam.get(i, &[0, 0, 0, 0]), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn binary_measurement_gives_half_weights() {
        let f = parse("qvar c, q : 2; measure MZ[q : x] = 0 -> skip [] 1 -> skip end").unwrap();
        let fam = synth_alpha_dist(&f.registry, &[Program::Skip, Program::Skip], &f.program).unwrap();
        assert_eq!(fam.sizes(), [2, 2]);
        assert!((fam.get(0, &[0, 1]).re - 0.5f64.sqrt()).abs() < 1e-15);
        fam.check_normalized(1e-12).unwrap();
    }

    #[test]
    fn law_names_round_trip() {
        for id in LawId::ALL {
            assert_eq!(LawId::parse(id.name()), Some(id));
        }
    }
}
