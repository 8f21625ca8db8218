//! The evaluator: semi-classical semantics by structural induction, and the
//! channel a program denotes.

use crate::linalg::{self, CMatrix, LinalgError, C64, ONE, TAU_EQ, ZERO};
use crate::ovf::{alpha_guarded_compose, guarded_compose, AlphaFamily, Branch, OpValuedFn, OvfError, SuperOp};
use crate::registry::{Registry, RegistryError, VarSet};
use crate::state::{ClassicalState, StateError};
use crate::syntax::{self, desugar_qchoice, AlphaSpec, Diagnostic, Guard, Program, QBranch};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error("ill-formed program: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Check(Vec<Diagnostic>),
    #[error("{0} has no semi-classical semantics")]
    Unsupported(&'static str),
    #[error("coefficient family: {0}")]
    Alpha(String),
    #[error("not a density operator: {0}")]
    State(String),
    #[error("probability weights: {0}")]
    Probability(String),
    #[error(transparent)]
    Ovf(#[from] OvfError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    ClassicalState(#[from] StateError),
}

pub type Result<T> = std::result::Result<T, SemanticsError>;

/// A checked program with its semi-classical semantics.
#[derive(Clone, Debug)]
pub struct SemResult {
    pub program: Program,
    pub semi: OpValuedFn,
}

impl SemResult {
    pub fn deltas(&self) -> Vec<&ClassicalState> {
        self.semi.states().collect()
    }

    pub fn channel(&self) -> SuperOp {
        self.semi.to_super_op()
    }
}

pub fn ensure_checked(reg: &Registry, p: &Program) -> Result<()> {
    let diags = syntax::check(reg, p);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(SemanticsError::Check(diags))
    }
}

/// Checks `p`, then computes its semi-classical semantics.
pub fn evaluate(reg: &Registry, p: &Program) -> Result<SemResult> {
    ensure_checked(reg, p)?;
    Ok(SemResult { program: p.clone(), semi: semi_classical(reg, p)? })
}

fn ids(reg: &Registry, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| reg.qvar_id(n).ok_or_else(|| RegistryError::UnknownVariable(n.clone()).into()))
        .collect()
}

/// Rewrites a coin vector given in listed-variable order into canonical order.
pub fn canonical_vector(reg: &Registry, coin: &[String], v: &[C64]) -> Result<Vec<C64>> {
    let listed = ids(reg, coin)?;
    let set = VarSet::from_ids(listed.iter().copied());
    let sp = reg.splitter(&listed, &set)?;
    let mut out = vec![ZERO; v.len()];
    for (a, z) in v.iter().enumerate() {
        out[sp.join(a, 0)] = *z;
    }
    Ok(out)
}

pub fn resolve_alpha(spec: &AlphaSpec, fs: &[OpValuedFn]) -> Result<AlphaFamily> {
    let lambdas: Vec<Vec<f64>> = fs.iter().map(|f| f.lambdas()).collect();
    let sizes: Vec<usize> = fs.iter().map(|f| f.len()).collect();
    Ok(match spec {
        AlphaSpec::Lambda => AlphaFamily::lambda(&lambdas),
        AlphaSpec::Uniform => AlphaFamily::uniform(&sizes),
        AlphaSpec::Phase(th) => {
            if th.len() != fs.len() {
                return Err(SemanticsError::Alpha(format!("{} phases for {} branches", th.len(), fs.len())));
            }
            AlphaFamily::phase(&lambdas, th)
        }
        AlphaSpec::Explicit(entries) => {
            let labels: Vec<Vec<String>> = fs.iter().map(|f| f.states().map(|s| s.label()).collect()).collect();
            for e in entries {
                if e.branch >= fs.len() || e.others.len() + 1 != fs.len() {
                    return Err(SemanticsError::Alpha(format!("entry for branch {} does not fit {} branches", e.branch, fs.len())));
                }
                let others = (0..fs.len()).filter(|&k| k != e.branch);
                if let Some((k, l)) = others.zip(&e.others).find(|(k, l)| !labels[*k].contains(l)) {
                    return Err(SemanticsError::Alpha(format!("branch {k} has no state '{l}'")));
                }
            }
            AlphaFamily::from_fn(&sizes, |i, t| {
                let key: Vec<&String> = (0..t.len()).filter(|&k| k != i).map(|k| &labels[k][t[k]]).collect();
                entries
                    .iter()
                    .find(|e| e.branch == i && e.others.iter().collect::<Vec<_>>() == key)
                    .map_or(ZERO, |e| e.value)
            })
        }
    })
}

fn compose_qif(reg: &Registry, coin: &[String], alpha: &Option<AlphaSpec>, branches: &[QBranch]) -> Result<OpValuedFn> {
    let coin_set = VarSet::from_ids(ids(reg, coin)?);
    let d = reg.dim_of(&coin_set);
    let fs = branches.iter().map(|b| semi_classical(reg, &b.body)).collect::<Result<Vec<_>>>()?;
    let bs = branches
        .iter()
        .zip(&fs)
        .map(|(b, f)| Ok(Branch { guard: canonical_vector(reg, coin, &b.guard.vector(d))?, f: f.clone() }))
        .collect::<Result<Vec<_>>>()?;
    Ok(match alpha {
        None | Some(AlphaSpec::Lambda) => guarded_compose(reg, &bs, &coin_set)?,
        Some(spec) => alpha_guarded_compose(reg, &bs, &coin_set, &resolve_alpha(spec, &fs)?)?,
    })
}

/// Branches of a subspace-guarded alternation flattened onto the union basis.
fn flatten_subspaces(p: &Program) -> Option<(Vec<String>, Vec<QBranch>)> {
    match p {
        Program::SubspaceQIf { coin, branches } => Some((
            coin.clone(),
            branches
                .iter()
                .flat_map(|b| b.basis.iter().map(move |g| QBranch { guard: g.clone(), body: b.body.clone() }))
                .collect(),
        )),
        _ => None,
    }
}

/// The semi-classical semantics ⌈P⌉ on `H_qvar(P)`. The program is assumed
/// to be checked; blocks and probabilistic choices have no such semantics.
pub fn semi_classical(reg: &Registry, p: &Program) -> Result<OpValuedFn> {
    match p {
        Program::Abort => Ok(OpValuedFn::constant(reg, VarSet::empty(), CMatrix::scalar(ZERO))?),
        Program::Skip => Ok(OpValuedFn::constant(reg, VarSet::empty(), CMatrix::scalar(ONE))?),
        Program::Unitary { gate, qvars } => {
            let listed = ids(reg, qvars)?;
            let vars = VarSet::from_ids(listed.iter().copied());
            let m = reg.embed_ordered(&gate.matrix, &listed, &vars)?;
            Ok(OpValuedFn::constant(reg, vars, m)?)
        }
        Program::Measure { meas, qvars, var, branches } => {
            let listed = ids(reg, qvars)?;
            let fs = branches.iter().map(|(_, b)| semi_classical(reg, b)).collect::<Result<Vec<_>>>()?;
            let v = fs.iter().fold(VarSet::from_ids(listed.iter().copied()), |acc, f| acc.union(f.vars()));
            let mut entries = Vec::new();
            for ((label, mm), f) in meas.outcomes.iter().zip(&fs) {
                let m = reg.embed_ordered(mm, &listed, &v)?;
                let tag = ClassicalState::assign(var, label);
                for (delta, op) in f.entries() {
                    let ext = reg.embed(op, f.vars(), &v)?;
                    entries.push((ClassicalState::concat(&tag, delta)?, ext * &m));
                }
            }
            Ok(OpValuedFn::from_parts(reg, v, entries)?)
        }
        Program::QIf { coin, alpha, branches } => compose_qif(reg, coin, alpha, branches),
        Program::SubspaceQIf { .. } => {
            let (coin, branches) = flatten_subspaces(p).unwrap();
            compose_qif(reg, &coin, &None, &branches)
        }
        Program::QChoice { .. } => semi_classical(reg, &desugar_qchoice(reg, p)?),
        Program::Seq(a, b) => {
            let (fa, fb) = (semi_classical(reg, a)?, semi_classical(reg, b)?);
            let v = fa.vars().union(fb.vars());
            let ea = fa.extend(reg, &v)?;
            let eb = fb.extend(reg, &v)?;
            let mut entries = Vec::with_capacity(ea.len() * eb.len());
            for (d1, m1) in ea.entries() {
                for (d2, m2) in eb.entries() {
                    entries.push((ClassicalState::concat(d1, d2)?, m2 * m1));
                }
            }
            Ok(OpValuedFn::from_parts(reg, v, entries)?)
        }
        Program::Block { .. } => Err(SemanticsError::Unsupported("a block")),
        Program::ProbChoice(_) => Err(SemanticsError::Unsupported("a probabilistic choice")),
    }
}

fn needs_structural(p: &Program) -> bool {
    match p {
        Program::Block { .. } | Program::ProbChoice(_) => true,
        Program::Abort | Program::Skip | Program::Unitary { .. } => false,
        Program::Measure { branches, .. } => branches.iter().any(|(_, b)| needs_structural(b)),
        Program::QIf { branches, .. } => branches.iter().any(|b| needs_structural(&b.body)),
        Program::QChoice { coin, branches, .. } => needs_structural(coin) || branches.iter().any(|b| needs_structural(&b.body)),
        Program::Seq(a, b) => needs_structural(a) || needs_structural(b),
        Program::SubspaceQIf { branches, .. } => branches.iter().any(|b| needs_structural(&b.body)),
    }
}

/// ⟦P⟧ on `H_qvar(P)`. The program is assumed to be checked.
pub fn channel_of(reg: &Registry, p: &Program) -> Result<SuperOp> {
    if !needs_structural(p) {
        return Ok(semi_classical(reg, p)?.to_super_op());
    }
    match p {
        Program::Seq(a, b) => {
            let v = a.qvar_set(reg)?.union(&b.qvar_set(reg)?);
            Ok(channel_of(reg, a)?.extend(reg, &v)?.then(&channel_of(reg, b)?.extend(reg, &v)?)?)
        }
        Program::Measure { meas, qvars, branches, .. } => {
            let listed = ids(reg, qvars)?;
            let v = branches
                .iter()
                .try_fold(VarSet::from_ids(listed.iter().copied()), |acc, (_, b)| Ok::<_, SemanticsError>(acc.union(&b.qvar_set(reg)?)))?;
            let mut kraus = Vec::new();
            for ((_, mm), (_, b)) in meas.outcomes.iter().zip(branches) {
                let m = reg.embed_ordered(mm, &listed, &v)?;
                for k in channel_of(reg, b)?.extend(reg, &v)?.kraus() {
                    kraus.push(k * &m);
                }
            }
            Ok(SuperOp::from_kraus(reg, v, kraus)?)
        }
        Program::Block { locals, init, body } => {
            let inner = channel_of(reg, body)?;
            let d = reg.dim_of(&VarSet::from_ids(ids(reg, locals)?));
            block_channel(reg, locals, &init.density(d), &inner)
        }
        Program::ProbChoice(bs) => {
            let weighted = bs.iter().map(|(q, w)| Ok((channel_of(reg, q)?, *w))).collect::<Result<Vec<_>>>()?;
            mix(reg, &weighted)
        }
        Program::QChoice { .. } => channel_of(reg, &desugar_qchoice(reg, p)?),
        _ => Err(SemanticsError::Unsupported("an alternation over blocks or probabilistic choices")),
    }
}

fn check_weights(ws: &[f64]) -> Result<()> {
    if ws.is_empty() {
        return Err(SemanticsError::Probability("no branches".into()));
    }
    if let Some(w) = ws.iter().find(|w| !(**w > 0.0)) {
        return Err(SemanticsError::Probability(format!("weight {w} is not positive")));
    }
    let total: f64 = ws.iter().sum();
    if total > 1.0 + TAU_EQ {
        return Err(SemanticsError::Probability(format!("weights sum to {total}")));
    }
    Ok(())
}

fn mix(reg: &Registry, weighted: &[(SuperOp, f64)]) -> Result<SuperOp> {
    check_weights(&weighted.iter().map(|(_, w)| *w).collect::<Vec<_>>())?;
    let v = weighted.iter().fold(VarSet::empty(), |acc, (e, _)| acc.union(e.vars()));
    let mut out = SuperOp::zero(reg, v.clone());
    for (e, w) in weighted {
        out = out.plus(&e.extend(reg, &v)?.scale(*w))?;
    }
    Ok(out)
}

/// ∑ p_i ⟦P_i⟧ with every channel extended to the union of the variables.
pub fn eval_prob_choice(reg: &Registry, branches: &[(Program, f64)]) -> Result<SuperOp> {
    check_weights(&branches.iter().map(|(_, w)| *w).collect::<Vec<_>>())?;
    for (q, _) in branches {
        ensure_checked(reg, q)?;
    }
    let weighted = branches.iter().map(|(q, w)| Ok((channel_of(reg, q)?, *w))).collect::<Result<Vec<_>>>()?;
    mix(reg, &weighted)
}

fn check_state(rho: &CMatrix, dim: usize) -> Result<()> {
    if rho.rows() != dim || rho.cols() != dim {
        return Err(SemanticsError::State(format!("{}x{} for dimension {dim}", rho.rows(), rho.cols())));
    }
    if !rho.is_hermitian(TAU_EQ) || !linalg::is_psd(rho, TAU_EQ)? {
        return Err(SemanticsError::State("not positive semidefinite".into()));
    }
    if (rho.trace() - ONE).norm() > TAU_EQ {
        return Err(SemanticsError::State(format!("trace {}", linalg::format_complex(rho.trace()))));
    }
    Ok(())
}

/// Kraus form of σ ↦ tr_locals(E(σ ⊗ ρ)), from a spectral decomposition of ρ.
fn block_channel(reg: &Registry, locals: &[String], rho: &CMatrix, inner: &SuperOp) -> Result<SuperOp> {
    let listed = ids(reg, locals)?;
    let l_set = VarSet::from_ids(listed.iter().copied());
    check_state(rho, reg.dim_of(&l_set))?;
    let v = inner.vars().union(&l_set);
    let inner = inner.extend(reg, &v)?;
    let outer = v.difference(&l_set);
    let sp = reg.splitter(&listed, &v)?;
    let (dl, dr) = (sp.part_dim(), sp.rest_dim());
    let (vals, vecs) = linalg::hermitian_eigen(rho)?;
    let mut kraus = Vec::new();
    for (m, &p) in vals.iter().enumerate() {
        if p <= TAU_EQ * 1e-3 {
            continue;
        }
        let sp_m = p.sqrt();
        let phi = vecs.col(m);
        for k in inner.kraus() {
            for out_l in 0..dl {
                let mut a = CMatrix::zeros(dr, dr);
                for r1 in 0..dr {
                    for r2 in 0..dr {
                        let mut s = ZERO;
                        for (l, z) in phi.iter().enumerate() {
                            if *z != ZERO {
                                s += k[(sp.join(out_l, r1), sp.join(l, r2))] * z;
                            }
                        }
                        a[(r1, r2)] = s * sp_m;
                    }
                }
                if a.max_abs() > 0.0 {
                    kraus.push(a);
                }
            }
        }
    }
    Ok(SuperOp::from_kraus(reg, outer, kraus)?)
}

/// tr_locals(⟦body⟧(σ ⊗ ρ)), with σ on `qvar(body) \ locals` and ρ on the
/// locals in their listed order.
pub fn eval_block(reg: &Registry, locals: &[String], rho: &CMatrix, body: &Program, sigma: &CMatrix) -> Result<CMatrix> {
    ensure_checked(reg, body)?;
    let listed = ids(reg, locals)?;
    let l_set = VarSet::from_ids(listed.iter().copied());
    check_state(rho, reg.dim_of(&l_set))?;
    let inner = channel_of(reg, body)?;
    let v = inner.vars().union(&l_set);
    let outer = v.difference(&l_set);
    let sp = reg.splitter(&listed, &v)?;
    let (dl, dr) = (sp.part_dim(), sp.rest_dim());
    if sigma.rows() != dr || sigma.cols() != dr {
        return Err(LinalgError::Dimension(format!("input is {}x{}, expected {dr}x{dr} on {}", sigma.rows(), sigma.cols(), reg.display(&outer))).into());
    }
    let n = sp.full_dim();
    let mut joint = CMatrix::zeros(n, n);
    for l1 in 0..dl {
        for l2 in 0..dl {
            let z = rho[(l1, l2)];
            if z == ZERO {
                continue;
            }
            for r1 in 0..dr {
                for r2 in 0..dr {
                    joint[(sp.join(l1, r1), sp.join(l2, r2))] = sigma[(r1, r2)] * z;
                }
            }
        }
    }
    let y = inner.extend(reg, &v)?.apply(&joint)?;
    let mut out = CMatrix::zeros(dr, dr);
    for r1 in 0..dr {
        for r2 in 0..dr {
            out[(r1, r2)] = (0..dl).map(|l| y[(sp.join(l, r1), sp.join(l, r2))]).sum();
        }
    }
    Ok(out)
}

/// The member of the subspace-guarded alternation's semantics selected by
/// the supplied bases.
pub fn subspace_qif(reg: &Registry, coin: &[String], subspaces: &[(Vec<Vec<C64>>, Program)]) -> Result<SuperOp> {
    let p = Program::SubspaceQIf {
        coin: coin.to_vec(),
        branches: subspaces
            .iter()
            .map(|(basis, body)| syntax::SubspaceBranch {
                basis: basis.iter().map(|v| Guard::Vector(v.clone())).collect(),
                body: body.clone(),
            })
            .collect(),
    };
    ensure_checked(reg, &p)?;
    channel_of(reg, &p)
}

/// Convenience: the dual channel wp.P.
pub fn wp_of(reg: &Registry, p: &Program) -> Result<SuperOp> {
    Ok(channel_of(reg, p)?.adjoint())
}
