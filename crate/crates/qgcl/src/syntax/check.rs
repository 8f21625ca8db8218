//! Static well-formedness checks. Each violation names the side condition
//! it breaks.

use super::ast::*;
use crate::linalg::{self, CMatrix, C64, ONE, TAU_EQ, ZERO};
use crate::registry::{Registry, VarSet};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    /// Gate targets are distinct declared variables and the gate is unitary.
    Unitary,
    /// Measurement targets distinct; operators complete; outcomes within D_x.
    Measurement,
    /// The outcome variable does not occur in any branch.
    MeasureFresh,
    /// Coin variables are distinct and disjoint from every branch's quantum variables.
    CoinDisjoint,
    /// Guards form an orthonormal basis of the coin space.
    GuardBasis,
    /// Sequenced programs use disjoint classical variables.
    SeqDisjoint,
    /// Probabilistic weights form a sub-probability distribution.
    ProbWeights,
    /// Local variables are used by the body and start in a density operator.
    Block,
    /// Guard subspaces are orthogonal, spanning, with orthonormal bases.
    SubspaceBasis,
}

impl Clause {
    pub fn name(self) -> &'static str {
        match self {
            Clause::Unitary => "unitary",
            Clause::Measurement => "measurement",
            Clause::MeasureFresh => "measure-fresh",
            Clause::CoinDisjoint => "coin-disjoint",
            Clause::GuardBasis => "guard-basis",
            Clause::SeqDisjoint => "seq-disjoint",
            Clause::ProbWeights => "prob-weights",
            Clause::Block => "block",
            Clause::SubspaceBasis => "subspace-basis",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub clause: Clause,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.clause.name(), self.message)
    }
}

/// Empty iff the program is well formed.
pub fn check(reg: &Registry, p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    walk(reg, p, &mut out);
    out
}

fn diag(out: &mut Vec<Diagnostic>, clause: Clause, message: String) {
    out.push(Diagnostic { clause, message });
}

fn distinct(vars: &[String]) -> Option<&String> {
    vars.iter().enumerate().find(|(k, v)| vars[..*k].contains(v)).map(|(_, v)| v)
}

fn list(s: &BTreeSet<String>) -> String {
    format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", "))
}

fn dim(reg: &Registry, vars: &[String]) -> Option<usize> {
    vars.iter().map(|v| reg.qvar_id(v).map(|id| reg.qvar(id).dim)).product()
}

fn check_basis(vectors: &[Vec<C64>], d: usize) -> Result<(), String> {
    for (i, a) in vectors.iter().enumerate() {
        if a.len() != d {
            return Err(format!("guard {i} has {} components, coin has dimension {d}", a.len()));
        }
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let want = if i == j { ONE } else { ZERO };
            if (ip - want).norm() > TAU_EQ {
                return Err(format!("<g{i}|g{j}> = {}", linalg::format_complex(ip)));
            }
        }
    }
    Ok(())
}

fn check_coin(coin: &[String], bodies: &[&Program], out: &mut Vec<Diagnostic>) {
    if let Some(v) = distinct(coin) {
        diag(out, Clause::CoinDisjoint, format!("coin variable '{v}' listed twice"));
    }
    let coin_set: BTreeSet<String> = coin.iter().cloned().collect();
    for (i, b) in bodies.iter().enumerate() {
        let clash: BTreeSet<String> = coin_set.intersection(&b.qvar()).cloned().collect();
        if !clash.is_empty() {
            diag(out, Clause::CoinDisjoint, format!("branch {i} uses coin variables {}", list(&clash)));
        }
    }
}

fn walk(reg: &Registry, p: &Program, out: &mut Vec<Diagnostic>) {
    for v in p.qvar() {
        if reg.qvar_id(&v).is_none() {
            diag(out, Clause::Unitary, format!("undeclared quantum variable '{v}'"));
            return;
        }
    }
    match p {
        Program::Abort | Program::Skip => {}
        Program::Unitary { gate, qvars } => {
            if let Some(v) = distinct(qvars) {
                diag(out, Clause::Unitary, format!("{} applied to '{v}' twice", gate.name));
            }
            let d = dim(reg, qvars).unwrap_or(0);
            if gate.matrix.rows() != d || !gate.matrix.is_unitary(TAU_EQ) {
                diag(out, Clause::Unitary, format!("{} is not a unitary of dimension {d}", gate.name));
            }
        }
        Program::Measure { meas, qvars, var, branches } => {
            if let Some(v) = distinct(qvars) {
                diag(out, Clause::Measurement, format!("{} measures '{v}' twice", meas.name));
            }
            let d = dim(reg, qvars).unwrap_or(0);
            let ok_shape = meas.outcomes.iter().all(|(_, m)| m.rows() == d && m.cols() == d);
            if !ok_shape {
                diag(out, Clause::Measurement, format!("{} does not act on dimension {d}", meas.name));
            } else {
                let sum = meas.outcomes.iter().fold(CMatrix::zeros(d, d), |acc, (_, m)| acc + m.adjoint() * m);
                if !sum.approx_eq(&CMatrix::identity(d), TAU_EQ) {
                    diag(out, Clause::Measurement, format!("{} is not complete: sum of M^dagger M is not I", meas.name));
                }
            }
            match reg.cvar(var) {
                Some(c) => {
                    for l in meas.labels() {
                        if !c.domain.contains(&l) {
                            diag(out, Clause::Measurement, format!("outcome '{l}' is not in the domain of '{var}'"));
                        }
                    }
                }
                None => diag(out, Clause::Measurement, format!("classical variable '{var}' is not registered")),
            }
            if branches.len() != meas.outcomes.len()
                || branches.iter().zip(&meas.outcomes).any(|((l, _), (m, _))| l != m)
            {
                diag(out, Clause::Measurement, format!("branches of {} do not match its outcomes", meas.name));
            }
            for (l, b) in branches {
                if b.var().contains(var) {
                    diag(out, Clause::MeasureFresh, format!("'{var}' is reused inside the branch for outcome {l}"));
                }
                walk(reg, b, out);
            }
        }
        Program::QIf { coin, branches, .. } => {
            let bodies: Vec<&Program> = branches.iter().map(|b| &b.body).collect();
            check_coin(coin, &bodies, out);
            let d = dim(reg, coin).unwrap_or(0);
            if branches.len() != d {
                diag(out, Clause::GuardBasis, format!("{} guards for a coin of dimension {d}", branches.len()));
            } else if let Err(e) = check_basis(&branches.iter().map(|b| b.guard.vector(d)).collect::<Vec<_>>(), d) {
                diag(out, Clause::GuardBasis, e);
            }
            bodies.iter().for_each(|b| walk(reg, b, out));
        }
        Program::QChoice { coin, branches, .. } => {
            walk(reg, coin, out);
            let names = match choice_coin(reg, coin) {
                Ok(n) => n,
                Err(_) => return,
            };
            let bodies: Vec<&Program> = branches.iter().map(|b| &b.body).collect();
            check_coin(&names, &bodies, out);
            let d = dim(reg, &names).unwrap_or(0);
            if branches.len() != d {
                diag(out, Clause::GuardBasis, format!("{} guards for a coin of dimension {d}", branches.len()));
            } else if let Err(e) = check_basis(&branches.iter().map(|b| b.guard.vector(d)).collect::<Vec<_>>(), d) {
                diag(out, Clause::GuardBasis, e);
            }
            let branch_vars: BTreeSet<String> = bodies.iter().flat_map(|b| b.var()).collect();
            let clash: BTreeSet<String> = coin.var().intersection(&branch_vars).cloned().collect();
            if !clash.is_empty() {
                diag(out, Clause::SeqDisjoint, format!("coin program and branches share classical variables {}", list(&clash)));
            }
            bodies.iter().for_each(|b| walk(reg, b, out));
        }
        Program::Seq(a, b) => {
            let clash: BTreeSet<String> = a.var().intersection(&b.var()).cloned().collect();
            if !clash.is_empty() {
                diag(out, Clause::SeqDisjoint, format!("both halves of a sequence use classical variables {}", list(&clash)));
            }
            walk(reg, a, out);
            walk(reg, b, out);
        }
        Program::Block { locals, init, body } => {
            if let Some(v) = distinct(locals) {
                diag(out, Clause::Block, format!("local variable '{v}' listed twice"));
            }
            let used = body.qvar();
            for l in locals {
                if !used.contains(l) {
                    diag(out, Clause::Block, format!("local variable '{l}' does not occur in the body"));
                }
            }
            let d = dim(reg, locals).unwrap_or(0);
            let rho = init.density(d);
            let psd = rho.rows() == d && linalg::is_psd(&rho, TAU_EQ).unwrap_or(false);
            if !psd || (rho.trace() - ONE).norm() > TAU_EQ {
                diag(out, Clause::Block, "initial state is not a density operator".into());
            }
            walk(reg, body, out);
        }
        Program::ProbChoice(bs) => {
            if bs.is_empty() {
                diag(out, Clause::ProbWeights, "empty probabilistic choice".into());
            }
            for (_, w) in bs {
                if !(*w > 0.0) {
                    diag(out, Clause::ProbWeights, format!("weight {w} is not positive"));
                }
            }
            let total: f64 = bs.iter().map(|(_, w)| w).sum();
            if total > 1.0 + TAU_EQ {
                diag(out, Clause::ProbWeights, format!("weights sum to {total} > 1"));
            }
            bs.iter().for_each(|(q, _)| walk(reg, q, out));
        }
        Program::SubspaceQIf { coin, branches } => {
            let bodies: Vec<&Program> = branches.iter().map(|b| &b.body).collect();
            check_coin(coin, &bodies, out);
            let d = dim(reg, coin).unwrap_or(0);
            let all: Vec<Vec<C64>> = branches.iter().flat_map(|b| b.basis.iter().map(|g| g.vector(d))).collect();
            if branches.iter().any(|b| b.basis.is_empty()) {
                diag(out, Clause::SubspaceBasis, "a guard subspace has an empty basis".into());
            }
            if all.len() != d {
                diag(out, Clause::SubspaceBasis, format!("{} basis vectors for a coin of dimension {d}", all.len()));
            } else if let Err(e) = check_basis(&all, d) {
                diag(out, Clause::SubspaceBasis, e);
            }
            bodies.iter().for_each(|b| walk(reg, b, out));
        }
    }
}

/// Coin space of a checked alternation, in canonical order.
pub fn coin_set(reg: &Registry, coin: &[String]) -> VarSet {
    coin.iter().filter_map(|c| reg.qvar_id(c)).collect()
}
