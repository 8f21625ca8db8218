//! Program trees. Variables are referred to by name; the registry that
//! accompanies a parsed file gives them dimensions and canonical order.

use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::registry::{Registry, RegistryError, VarSet};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    /// Name as written, including parameters, e.g. `PHASE(0.5)`.
    pub name: String,
    pub matrix: CMatrix,
    pub builtin: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub name: String,
    pub outcomes: Vec<(String, CMatrix)>,
    pub builtin: bool,
}

impl Measurement {
    pub fn labels(&self) -> Vec<String> {
        self.outcomes.iter().map(|(l, _)| l.clone()).collect()
    }
}

/// A coin state. Components follow the order in which the coin variables are
/// listed in the `qif`.
#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    Basis(usize),
    Vector(Vec<C64>),
}

impl Guard {
    pub fn vector(&self, dim: usize) -> Vec<C64> {
        match self {
            Guard::Basis(k) => (0..dim).map(|j| if j == *k { ONE } else { ZERO }).collect(),
            Guard::Vector(v) => v.clone(),
        }
    }
}

/// One explicit coefficient: branch index, labels of the other branches'
/// states (in branch order), value.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaEntry {
    pub branch: usize,
    pub others: Vec<String>,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaSpec {
    Lambda,
    Uniform,
    Phase(Vec<f64>),
    Explicit(Vec<AlphaEntry>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockState {
    Ket(usize),
    Matrix(CMatrix),
}

impl BlockState {
    pub fn density(&self, dim: usize) -> CMatrix {
        match self {
            BlockState::Ket(k) => {
                let mut m = CMatrix::zeros(dim, dim);
                if *k < dim {
                    m[(*k, *k)] = ONE;
                }
                m
            }
            BlockState::Matrix(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QBranch {
    pub guard: Guard,
    pub body: Program,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBranch {
    /// Chosen orthonormal basis of the guarding subspace.
    pub basis: Vec<Guard>,
    pub body: Program,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Program {
    Abort,
    Skip,
    Unitary { gate: Gate, qvars: Vec<String> },
    Measure { meas: Measurement, qvars: Vec<String>, var: String, branches: Vec<(String, Program)> },
    QIf { coin: Vec<String>, alpha: Option<AlphaSpec>, branches: Vec<QBranch> },
    Seq(Box<Program>, Box<Program>),
    Block { locals: Vec<String>, init: BlockState, body: Box<Program> },
    ProbChoice(Vec<(Program, f64)>),
    /// `[coin] (+) branches end`; the coin space is `qvar(coin)` in canonical order.
    QChoice { coin: Box<Program>, alpha: Option<AlphaSpec>, branches: Vec<QBranch> },
    SubspaceQIf { coin: Vec<String>, branches: Vec<SubspaceBranch> },
}

fn names(v: &[String]) -> BTreeSet<String> {
    v.iter().cloned().collect()
}

impl Program {
    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence of the given statements; `skip` when empty.
    pub fn seq_all(mut ps: Vec<Program>) -> Program {
        let Some(mut acc) = ps.pop() else { return Program::Skip };
        while let Some(p) = ps.pop() {
            acc = Program::seq(p, acc);
        }
        acc
    }

    pub fn unitary(gate: Gate, qvars: &[&str]) -> Program {
        Program::Unitary { gate, qvars: qvars.iter().map(|s| s.to_string()).collect() }
    }

    /// Classical variables.
    pub fn var(&self) -> BTreeSet<String> {
        match self {
            Program::Abort | Program::Skip | Program::Unitary { .. } => BTreeSet::new(),
            Program::Measure { var, branches, .. } => {
                let mut s: BTreeSet<String> = branches.iter().flat_map(|(_, p)| p.var()).collect();
                s.insert(var.clone());
                s
            }
            Program::QIf { branches, .. } => branches.iter().flat_map(|b| b.body.var()).collect(),
            Program::QChoice { coin, branches, .. } => {
                coin.var().into_iter().chain(branches.iter().flat_map(|b| b.body.var())).collect()
            }
            Program::Seq(a, b) => a.var().union(&b.var()).cloned().collect(),
            Program::Block { body, .. } => body.var(),
            Program::ProbChoice(bs) => bs.iter().flat_map(|(p, _)| p.var()).collect(),
            Program::SubspaceQIf { branches, .. } => branches.iter().flat_map(|b| b.body.var()).collect(),
        }
    }

    /// Quantum variables.
    pub fn qvar(&self) -> BTreeSet<String> {
        match self {
            Program::Abort | Program::Skip => BTreeSet::new(),
            Program::Unitary { qvars, .. } => names(qvars),
            Program::Measure { qvars, branches, .. } => {
                names(qvars).into_iter().chain(branches.iter().flat_map(|(_, p)| p.qvar())).collect()
            }
            Program::QIf { coin, branches, .. } => {
                names(coin).into_iter().chain(branches.iter().flat_map(|b| b.body.qvar())).collect()
            }
            Program::QChoice { coin, branches, .. } => {
                coin.qvar().into_iter().chain(branches.iter().flat_map(|b| b.body.qvar())).collect()
            }
            Program::Seq(a, b) => a.qvar().union(&b.qvar()).cloned().collect(),
            Program::Block { locals, body, .. } => body.qvar().difference(&names(locals)).cloned().collect(),
            Program::ProbChoice(bs) => bs.iter().flat_map(|(p, _)| p.qvar()).collect(),
            Program::SubspaceQIf { coin, branches } => {
                names(coin).into_iter().chain(branches.iter().flat_map(|b| b.body.qvar())).collect()
            }
        }
    }

    /// Coin variables.
    pub fn cvar(&self) -> BTreeSet<String> {
        match self {
            Program::Abort | Program::Skip | Program::Unitary { .. } => BTreeSet::new(),
            Program::Measure { branches, .. } => branches.iter().flat_map(|(_, p)| p.cvar()).collect(),
            Program::QIf { coin, branches, .. } => {
                names(coin).into_iter().chain(branches.iter().flat_map(|b| b.body.cvar())).collect()
            }
            Program::QChoice { coin, branches, .. } => coin
                .cvar()
                .into_iter()
                .chain(coin.qvar())
                .chain(branches.iter().flat_map(|b| b.body.cvar()))
                .collect(),
            Program::Seq(a, b) => a.cvar().union(&b.cvar()).cloned().collect(),
            Program::Block { locals, body, .. } => body.cvar().difference(&names(locals)).cloned().collect(),
            Program::ProbChoice(bs) => bs.iter().flat_map(|(p, _)| p.cvar()).collect(),
            Program::SubspaceQIf { coin, branches } => {
                names(coin).into_iter().chain(branches.iter().flat_map(|b| b.body.cvar())).collect()
            }
        }
    }

    pub fn qvar_set(&self, reg: &Registry) -> Result<VarSet, RegistryError> {
        to_varset(reg, &self.qvar())
    }

    pub fn cvar_set(&self, reg: &Registry) -> Result<VarSet, RegistryError> {
        to_varset(reg, &self.cvar())
    }

    pub fn has_measurement(&self) -> bool {
        match self {
            Program::Measure { .. } => true,
            Program::Abort | Program::Skip | Program::Unitary { .. } => false,
            Program::QIf { branches, .. } => branches.iter().any(|b| b.body.has_measurement()),
            Program::QChoice { coin, branches, .. } => {
                coin.has_measurement() || branches.iter().any(|b| b.body.has_measurement())
            }
            Program::Seq(a, b) => a.has_measurement() || b.has_measurement(),
            Program::Block { body, .. } => body.has_measurement(),
            Program::ProbChoice(bs) => bs.iter().any(|(p, _)| p.has_measurement()),
            Program::SubspaceQIf { branches, .. } => branches.iter().any(|b| b.body.has_measurement()),
        }
    }
}

pub fn to_varset(reg: &Registry, names: &BTreeSet<String>) -> Result<VarSet, RegistryError> {
    names
        .iter()
        .map(|n| reg.qvar_id(n).ok_or_else(|| RegistryError::UnknownVariable(n.clone())))
        .collect()
}

/// Canonically ordered names of `qvar(coin)`.
pub fn choice_coin(reg: &Registry, coin: &Program) -> Result<Vec<String>, RegistryError> {
    Ok(reg.names(&coin.qvar_set(reg)?))
}

/// Replaces every quantum choice by its coin program followed by a `qif`.
pub fn desugar_qchoice(reg: &Registry, p: &Program) -> Result<Program, RegistryError> {
    let d = |q: &Program| desugar_qchoice(reg, q);
    let dbranches = |bs: &[QBranch]| -> Result<Vec<QBranch>, RegistryError> {
        bs.iter().map(|b| Ok(QBranch { guard: b.guard.clone(), body: d(&b.body)? })).collect()
    };
    Ok(match p {
        Program::Abort | Program::Skip | Program::Unitary { .. } => p.clone(),
        Program::Measure { meas, qvars, var, branches } => Program::Measure {
            meas: meas.clone(),
            qvars: qvars.clone(),
            var: var.clone(),
            branches: branches.iter().map(|(l, b)| Ok((l.clone(), d(b)?))).collect::<Result<_, RegistryError>>()?,
        },
        Program::QIf { coin, alpha, branches } => {
            Program::QIf { coin: coin.clone(), alpha: alpha.clone(), branches: dbranches(branches)? }
        }
        Program::QChoice { coin, alpha, branches } => Program::seq(
            d(coin)?,
            Program::QIf { coin: choice_coin(reg, coin)?, alpha: alpha.clone(), branches: dbranches(branches)? },
        ),
        Program::Seq(a, b) => Program::seq(d(a)?, d(b)?),
        Program::Block { locals, init, body } => {
            Program::Block { locals: locals.clone(), init: init.clone(), body: Box::new(d(body)?) }
        }
        Program::ProbChoice(bs) => Program::ProbChoice(bs.iter().map(|(q, w)| Ok((d(q)?, *w))).collect::<Result<_, RegistryError>>()?),
        Program::SubspaceQIf { coin, branches } => Program::SubspaceQIf {
            coin: coin.clone(),
            branches: branches
                .iter()
                .map(|b| Ok(SubspaceBranch { basis: b.basis.clone(), body: d(&b.body)? }))
                .collect::<Result<_, RegistryError>>()?,
        },
    })
}
