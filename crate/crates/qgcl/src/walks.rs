//! Coined quantum walks on the cycle Z_N, as generated programs, with step
//! matrices built directly for comparison.

use crate::linalg::{kron_all, partial_trace, CMatrix, C64, ONE, TAU_EQ, ZERO};
use crate::registry::Registry;
use crate::semantics::{channel_of, SemanticsError};
use crate::syntax::{library, Gate, Guard, Program, QBranch};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("invalid walk: {0}")]
    Spec(String),
    #[error("coin at position {position}, time {time} is not unitary")]
    NonUnitaryCoin { position: usize, time: usize },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

pub type Result<T> = std::result::Result<T, WalkError>;

/// (c, s, θ) of the coin (1/√2)[[c, s], [s*, -e^{iθ} c]] at (position, time).
pub type CoinHook = Arc<dyn Fn(usize, usize) -> (C64, C64, f64) + Send + Sync>;

#[derive(Clone)]
pub enum Variant {
    Hadamard,
    Unidirectional,
    /// `None` uses c = s = 1, θ = 0.
    PositionTimeCoin(Option<CoinHook>),
    ThreeState,
    MultiCoin(usize),
    /// Two walkers whose coins are entangled by the given 4×4 unitary.
    TwoWalkerShared(CMatrix),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Hadamard => "hadamard",
            Variant::Unidirectional => "unidirectional",
            Variant::PositionTimeCoin(_) => "position-time",
            Variant::ThreeState => "three-state",
            Variant::MultiCoin(_) => "multi-coin",
            Variant::TwoWalkerShared(_) => "two-walker",
        }
    }
}

impl fmt::Debug for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::PositionTimeCoin(h) => write!(f, "PositionTimeCoin({})", if h.is_some() { "hook" } else { "default" }),
            Variant::MultiCoin(m) => write!(f, "MultiCoin({m})"),
            Variant::TwoWalkerShared(u) => write!(f, "TwoWalkerShared({u:?})"),
            v => f.write_str(v.name()),
        }
    }
}

/// Starting state: one basis index per walk variable (registry order), or a
/// full state vector.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Basis(Vec<usize>),
    Vector(Vec<C64>),
}

#[derive(Clone, Debug)]
pub struct WalkSpec {
    pub variant: Variant,
    pub n: usize,
    pub steps: usize,
    pub init: InitialState,
}

impl WalkSpec {
    /// All walk variables start in |0>.
    pub fn new(variant: Variant, n: usize, steps: usize) -> Self {
        let k = variables(&variant).len();
        WalkSpec { variant, n, steps, init: InitialState::Basis(vec![0; k]) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(WalkError::Spec(format!("cycle size {} < 2", self.n)));
        }
        match &self.variant {
            Variant::MultiCoin(0) => return Err(WalkError::Spec("at least one coin is needed".into())),
            Variant::TwoWalkerShared(u) if u.rows() != 4 || !u.is_unitary(TAU_EQ) => {
                return Err(WalkError::Spec("the shared coin operator must be a 4x4 unitary".into()))
            }
            _ => {}
        }
        let reg = registry(self);
        let dims: Vec<usize> = reg.qvars().iter().map(|q| q.dim).collect();
        match &self.init {
            InitialState::Basis(ks) => {
                if ks.len() != dims.len() || ks.iter().zip(&dims).any(|(k, d)| k >= d) {
                    return Err(WalkError::Spec(format!("initial basis state {ks:?} does not fit dimensions {dims:?}")));
                }
            }
            InitialState::Vector(v) => {
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                if v.len() != dims.iter().product::<usize>() || (norm - 1.0).abs() > TAU_EQ {
                    return Err(WalkError::Spec("initial vector has the wrong length or is not normalized".into()));
                }
            }
        }
        Ok(())
    }
}

/// Walk variables with their roles, in declaration order.
fn variables(v: &Variant) -> Vec<(&'static str, bool)> {
    match v {
        Variant::MultiCoin(m) => {
            let mut out = vec![("p", false)];
            out.extend(COIN_NAMES.iter().take(*m).map(|c| (*c, true)));
            out
        }
        Variant::TwoWalkerShared(_) => vec![("q1", false), ("q2", false), ("c1", true), ("c2", true)],
        _ => vec![("c", true), ("p", false)],
    }
}

const COIN_NAMES: [&str; 16] = ["c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10", "c11", "c12", "c13", "c14", "c15", "c16"];

pub fn registry(spec: &WalkSpec) -> Registry {
    let mut reg = Registry::new();
    let coin_dim = if matches!(spec.variant, Variant::ThreeState) { 3 } else { 2 };
    for (name, coin) in variables(&spec.variant) {
        reg.declare_qvar(name, if coin { coin_dim } else { spec.n }).expect("fresh names");
    }
    reg
}

pub fn coin_variables(spec: &WalkSpec) -> Vec<String> {
    variables(&spec.variant).into_iter().filter(|(_, c)| *c).map(|(n, _)| n.to_string()).collect()
}

pub fn position_variables(spec: &WalkSpec) -> Vec<String> {
    variables(&spec.variant).into_iter().filter(|(_, c)| !*c).map(|(n, _)| n.to_string()).collect()
}

fn builtin(name: &str, m: CMatrix, vars: &[&str]) -> Program {
    Program::Unitary { gate: Gate { name: name.into(), matrix: m, builtin: true }, qvars: vars.iter().map(|s| s.to_string()).collect() }
}

fn shifts(n: usize, p: &str) -> (Program, Program) {
    (builtin(&format!("TL_{n}"), library::shift_left(n), &[p]), builtin(&format!("TR_{n}"), library::shift_right(n), &[p]))
}

fn choice(coin: Program, bodies: Vec<Program>) -> Program {
    Program::QChoice {
        coin: Box::new(coin),
        alpha: None,
        branches: bodies.into_iter().enumerate().map(|(k, body)| QBranch { guard: Guard::Basis(k), body }).collect(),
    }
}

/// C(n,t) for the position-time variant.
pub fn position_time_coin(hook: &Option<CoinHook>, position: usize, time: usize) -> Result<CMatrix> {
    let (c, s, theta) = match hook {
        Some(h) => h(position, time),
        None => (ONE, ONE, 0.0),
    };
    let k = C64::new(0.5f64.sqrt(), 0.0);
    let m = CMatrix::from_rows(&[vec![c * k, s * k], vec![s.conj() * k, -C64::from_polar(1.0, theta) * c * k]])
        .map_err(|_| WalkError::NonUnitaryCoin { position, time })?;
    if !m.is_unitary(TAU_EQ) {
        return Err(WalkError::NonUnitaryCoin { position, time });
    }
    Ok(m)
}

/// Elementary step `t` (0-based) as a program.
pub fn step_program(spec: &WalkSpec, t: usize) -> Result<Program> {
    let n = spec.n;
    let h = || builtin("H", library::hadamard(), &["c"]);
    Ok(match &spec.variant {
        Variant::Hadamard => {
            let (l, r) = shifts(n, "p");
            choice(h(), vec![l, r])
        }
        Variant::Unidirectional => {
            let (_, r) = shifts(n, "p");
            choice(h(), vec![Program::Skip, r])
        }
        Variant::PositionTimeCoin(hook) => {
            let coins = (0..n)
                .map(|pos| {
                    let m = position_time_coin(hook, pos, t)?;
                    let gate = Gate { name: format!("C_{pos}_{t}"), matrix: m, builtin: false };
                    Ok(QBranch { guard: Guard::Basis(pos), body: Program::Unitary { gate, qvars: vec!["c".into()] } })
                })
                .collect::<Result<Vec<_>>>()?;
            let (l, r) = shifts(n, "p");
            let shift = Program::QIf {
                coin: vec!["c".into()],
                alpha: None,
                branches: vec![QBranch { guard: Guard::Basis(0), body: l }, QBranch { guard: Guard::Basis(1), body: r }],
            };
            Program::seq(Program::QIf { coin: vec!["p".into()], alpha: None, branches: coins }, shift)
        }
        Variant::ThreeState => {
            let (l, r) = shifts(n, "p");
            choice(builtin("GROVER_3", library::grover(3), &["c"]), vec![l, Program::Skip, r])
        }
        Variant::MultiCoin(m) => {
            let coin = COIN_NAMES[t % m];
            let (l, r) = shifts(n, "p");
            choice(builtin("H", library::hadamard(), &[coin]), vec![l, r])
        }
        Variant::TwoWalkerShared(u) => {
            let (l1, r1) = shifts(n, "q1");
            let (l2, r2) = shifts(n, "q2");
            Program::seq_all(vec![
                Program::Unitary { gate: Gate { name: "U".into(), matrix: u.clone(), builtin: false }, qvars: vec!["c1".into(), "c2".into()] },
                choice(builtin("H", library::hadamard(), &["c1"]), vec![l1, r1]),
                choice(builtin("H", library::hadamard(), &["c2"]), vec![l2, r2]),
            ])
        }
    })
}

/// The first `spec.steps` steps in sequence.
pub fn build_walk_program(spec: &WalkSpec) -> Result<(Registry, Program)> {
    spec.validate()?;
    let steps = (0..spec.steps).map(|t| step_program(spec, t)).collect::<Result<Vec<_>>>()?;
    Ok((registry(spec), Program::seq_all(steps)))
}

fn projector(d: usize, k: usize) -> CMatrix {
    library::projector(d, k)
}

/// ∑_b T_b on the position factor ⊗ |b><b| C on the coin factor, identity
/// elsewhere; `dims` lists every factor.
fn controlled_shift(dims: &[usize], pos: usize, coin: usize, c: &CMatrix, moves: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::zeros(dims.iter().product(), dims.iter().product());
    for (b, t) in moves.iter().enumerate() {
        let factors: Vec<CMatrix> = dims
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                if k == pos {
                    t.clone()
                } else if k == coin {
                    &projector(d, b) * c
                } else {
                    CMatrix::identity(d)
                }
            })
            .collect();
        out = out + kron_all(&factors);
    }
    out
}

/// Step matrix of elementary step `t`, built from Kronecker products alone.
pub fn step_oracle_at(spec: &WalkSpec, t: usize) -> Result<CMatrix> {
    spec.validate()?;
    let n = spec.n;
    let (tl, tr, id) = (library::shift_left(n), library::shift_right(n), CMatrix::identity(n));
    let h = library::hadamard();
    Ok(match &spec.variant {
        Variant::Hadamard => controlled_shift(&[2, n], 1, 0, &h, &[tl, tr]),
        Variant::Unidirectional => controlled_shift(&[2, n], 1, 0, &h, &[id, tr]),
        Variant::ThreeState => controlled_shift(&[3, n], 1, 0, &library::grover(3), &[tl, id, tr]),
        Variant::PositionTimeCoin(hook) => {
            let mut coin = CMatrix::zeros(2 * n, 2 * n);
            for pos in 0..n {
                coin = coin + kron_all(&[position_time_coin(hook, pos, t)?, projector(n, pos)]);
            }
            controlled_shift(&[2, n], 1, 0, &CMatrix::identity(2), &[tl, tr]) * coin
        }
        Variant::MultiCoin(m) => {
            let dims: Vec<usize> = std::iter::once(n).chain(std::iter::repeat(2).take(*m)).collect();
            controlled_shift(&dims, 0, 1 + t % m, &h, &[tl, tr])
        }
        Variant::TwoWalkerShared(u) => {
            let dims = [n, n, 2, 2];
            let coins = kron_all(&[CMatrix::identity(n), CMatrix::identity(n), u.clone()]);
            let s1 = controlled_shift(&dims, 0, 2, &h, &[tl.clone(), tr.clone()]);
            let s2 = controlled_shift(&dims, 1, 3, &h, &[tl, tr]);
            s2 * s1 * coins
        }
    })
}

/// Step matrix of a time-independent walk (step 0).
pub fn step_oracle(spec: &WalkSpec) -> Result<CMatrix> {
    step_oracle_at(spec, 0)
}

pub fn initial_vector(spec: &WalkSpec) -> Vec<C64> {
    let reg = registry(spec);
    let dims: Vec<usize> = reg.qvars().iter().map(|q| q.dim).collect();
    match &spec.init {
        InitialState::Vector(v) => v.clone(),
        InitialState::Basis(ks) => {
            let mut v = vec![ZERO; dims.iter().product()];
            v[crate::linalg::undigits(ks, &dims)] = ONE;
            v
        }
    }
}

/// Probabilities over position tuples (one entry per walker), in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub walkers: Vec<String>,
    pub n: usize,
    pub probabilities: Vec<f64>,
}

impl Distribution {
    pub fn positions(&self, index: usize) -> Vec<usize> {
        crate::linalg::digits(index, &vec![self.n; self.walkers.len()])
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        if self.probabilities.len() != other.probabilities.len() {
            return f64::INFINITY;
        }
        self.probabilities.iter().zip(&other.probabilities).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn coin_factor_indices(spec: &WalkSpec) -> Vec<usize> {
    variables(&spec.variant).iter().enumerate().filter(|(_, (_, c))| *c).map(|(k, _)| k).collect()
}

fn distribution_of(spec: &WalkSpec, rho: &CMatrix) -> Result<Distribution> {
    let reg = registry(spec);
    let dims: Vec<usize> = reg.qvars().iter().map(|q| q.dim).collect();
    let reduced = partial_trace(rho, &dims, &coin_factor_indices(spec)).map_err(SemanticsError::from)?;
    Ok(Distribution {
        walkers: position_variables(spec),
        n: spec.n,
        probabilities: (0..reduced.rows()).map(|k| reduced[(k, k)].re).collect(),
    })
}

/// Runs the T-step program's channel on the initial state and traces out
/// the coins.
pub fn position_distribution(spec: &WalkSpec) -> Result<Distribution> {
    let (reg, prog) = build_walk_program(spec)?;
    let ch = channel_of(&reg, &prog)?.extend(&reg, &reg.all()).map_err(SemanticsError::from)?;
    let psi = initial_vector(spec);
    let rho = ch.apply(&CMatrix::outer(&psi, &psi)).map_err(SemanticsError::from)?;
    distribution_of(spec, &rho)
}

/// The same distribution by repeated multiplication with the step oracles.
pub fn oracle_distribution(spec: &WalkSpec) -> Result<Distribution> {
    spec.validate()?;
    let mut psi = CMatrix::column(&initial_vector(spec));
    for t in 0..spec.steps {
        psi = step_oracle_at(spec, t)? * psi;
    }
    let v = psi.data().to_vec();
    distribution_of(spec, &CMatrix::outer(&v, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ovf::SuperOp;

    fn all_variants() -> Vec<Variant> {
        vec![
            Variant::Hadamard,
            Variant::Unidirectional,
            Variant::PositionTimeCoin(None),
            Variant::ThreeState,
            Variant::MultiCoin(2),
            Variant::TwoWalkerShared(library::cnot()),
        ]
    }

    #[test]
    fn step_oracles_are_unitary() {
        for v in all_variants() {
            let m = step_oracle(&WalkSpec::new(v.clone(), 4, 1)).unwrap();
            assert!(m.is_unitary(1e-12), "{v:?}");
        }
    }

    #[test]
    fn step_program_matches_oracle_at_n2() {
        for v in all_variants() {
            let spec = WalkSpec::new(v.clone(), 2, 1);
            let (reg, p) = build_walk_program(&spec).unwrap();
            let ch = channel_of(&reg, &p).unwrap().extend(&reg, &reg.all()).unwrap();
            let o = SuperOp::from_kraus(&reg, reg.all(), vec![step_oracle(&spec).unwrap()]).unwrap();
            assert!(ch.residual(&o).unwrap() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn zero_steps_is_a_point_mass() {
        let mut spec = WalkSpec::new(Variant::Hadamard, 6, 0);
        spec.init = InitialState::Basis(vec![1, 3]);
        let d = position_distribution(&spec).unwrap();
        assert_eq!(d.probabilities[3], 1.0);
        assert_eq!(d.total(), 1.0);
    }

    #[test]
    fn non_unitary_hook_is_rejected() {
        let hook: CoinHook = Arc::new(|_, _| (ONE, ZERO, 0.0));
        let spec = WalkSpec::new(Variant::PositionTimeCoin(Some(hook)), 4, 1);
        assert!(matches!(step_program(&spec, 0), Err(WalkError::NonUnitaryCoin { .. })));
    }

    #[test]
    fn bad_specs() {
        assert!(WalkSpec::new(Variant::Hadamard, 1, 1).validate().is_err());
        assert!(WalkSpec::new(Variant::MultiCoin(0), 4, 1).validate().is_err());
        let mut s = WalkSpec::new(Variant::Hadamard, 4, 1);
        s.init = InitialState::Basis(vec![0, 4]);
        assert!(s.validate().is_err());
    }
}
