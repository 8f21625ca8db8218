//! Weakest preconditions, Hoare triples, equivalence and refinement.

use crate::linalg::{self, choi_residual, CMatrix, ZERO};
use crate::ovf::SuperOp;
use crate::random::{self, Rand};
use crate::registry::{Registry, VarSet};
use crate::semantics::{channel_of, ensure_checked, Result, SemanticsError};
use crate::syntax::Program;

/// A bounded positive operator on `H_vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub vars: VarSet,
    pub matrix: CMatrix,
}

impl Observable {
    pub fn new(reg: &Registry, vars: VarSet, matrix: CMatrix, tol: f64) -> Result<Self> {
        let d = reg.dim_of(&vars);
        if matrix.rows() != d || matrix.cols() != d {
            return Err(linalg::LinalgError::Dimension(format!("{}x{} observable on dimension {d}", matrix.rows(), matrix.cols())).into());
        }
        if !linalg::is_psd(&matrix, tol)? {
            return Err(SemanticsError::State("observable is not positive semidefinite".into()));
        }
        Ok(Observable { vars, matrix })
    }

    pub fn extend(&self, reg: &Registry, to: &VarSet) -> Result<CMatrix> {
        Ok(reg.embed(&self.matrix, &self.vars, to)?)
    }
}

pub fn wp(reg: &Registry, p: &Program) -> Result<SuperOp> {
    ensure_checked(reg, p)?;
    Ok(channel_of(reg, p)?.adjoint())
}

#[derive(Clone, Debug, PartialEq)]
pub enum HoareVerdict {
    Satisfied,
    /// Smallest eigenvalue of wp.P(N2) − N1.
    Violated(f64),
}

/// {N1} P {N2}, decided by N1 ⊑ wp.P(N2).
pub fn check_hoare(reg: &Registry, n1: &Observable, p: &Program, n2: &Observable, tol: f64) -> Result<HoareVerdict> {
    let w = wp(reg, p)?;
    let v = w.vars().union(&n1.vars).union(&n2.vars);
    let pre = w.extend(reg, &v)?.apply(&n2.extend(reg, &v)?)?;
    let gap = &pre - &n1.extend(reg, &v)?;
    let min = linalg::min_eigenvalue(&gap, tol)?;
    Ok(if min >= -tol { HoareVerdict::Satisfied } else { HoareVerdict::Violated(min) })
}

fn both(reg: &Registry, p: &Program, q: &Program) -> Result<(SuperOp, SuperOp, VarSet)> {
    ensure_checked(reg, p)?;
    ensure_checked(reg, q)?;
    let (a, b) = (channel_of(reg, p)?, channel_of(reg, q)?);
    let v = a.vars().union(b.vars());
    Ok((a.extend(reg, &v)?, b.extend(reg, &v)?, v))
}

/// Max-abs Choi residual of ⟦P⟧ and ⟦Q⟧ on `H_qvar(P)∪qvar(Q)`.
pub fn equivalence_residual(reg: &Registry, p: &Program, q: &Program) -> Result<f64> {
    let (a, b, _) = both(reg, p, q)?;
    Ok(a.residual(&b)?)
}

pub fn equivalent(reg: &Registry, p: &Program, q: &Program, tol: f64) -> Result<bool> {
    Ok(equivalence_residual(reg, p, q)? <= tol)
}

/// Kraus operators of tr_coins ∘ E, as maps from `H_vars` to
/// `H_{vars \ coins}`.
pub fn trace_out_kraus(reg: &Registry, e: &SuperOp, coins: &VarSet) -> Result<Vec<CMatrix>> {
    let coins = coins.intersection(e.vars());
    let sp = reg.splitter(coins.ids(), e.vars())?;
    let (dc, dr, n) = (sp.part_dim(), sp.rest_dim(), sp.full_dim());
    let mut out = Vec::with_capacity(e.kraus().len() * dc);
    for k in e.kraus() {
        for j in 0..dc {
            let mut a = CMatrix::zeros(dr, n);
            for row in 0..dr {
                for col in 0..n {
                    a[(row, col)] = k[(sp.join(j, row), col)];
                }
            }
            if a.max_abs() > 0.0 {
                out.push(a);
            }
        }
    }
    Ok(out)
}

/// Residual of the coin-free comparison: both channels followed by the
/// partial trace over cvar(P) ∪ cvar(Q).
pub fn coin_free_residual(reg: &Registry, p: &Program, q: &Program) -> Result<f64> {
    let (a, b, v) = both(reg, p, q)?;
    let coins = p.cvar_set(reg)?.union(&q.cvar_set(reg)?);
    let ka = trace_out_kraus(reg, &a, &coins)?;
    let kb = trace_out_kraus(reg, &b, &coins)?;
    let dout = reg.dim_of(&v.difference(&coins));
    Ok(choi_residual(&ka, &kb, reg.dim_of(&v), dout)?)
}

pub fn coin_free_equivalent(reg: &Registry, p: &Program, q: &Program, tol: f64) -> Result<bool> {
    Ok(coin_free_residual(reg, p, q)? <= tol)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RefineVerdict {
    Refuted { witness: CMatrix, min_eigenvalue: f64 },
    Unrefuted(usize),
}

/// Candidate observables: I, computational projectors, then random pure
/// projectors and random mixtures.
pub fn witnesses(rng: &mut Rand, d: usize, samples: usize) -> Vec<CMatrix> {
    let mut out = vec![CMatrix::identity(d)];
    out.extend((0..d).map(|k| CMatrix::outer(&CMatrix::basis(d, k).data().to_vec(), &CMatrix::basis(d, k).data().to_vec())));
    for s in 0..samples {
        out.push(if s % 2 == 0 { random::pure_density(rng, d) } else { random::density(rng, d) });
    }
    out
}

/// Searches for N with wp.P(N) ⋢ wp.Q(N).
pub fn refines(reg: &Registry, p: &Program, q: &Program, samples: usize, seed: u64, tol: f64) -> Result<RefineVerdict> {
    let (a, b, v) = both(reg, p, q)?;
    let (wa, wb) = (a.adjoint(), b.adjoint());
    let mut rng = random::rng(seed);
    let ws = witnesses(&mut rng, reg.dim_of(&v), samples);
    let n = ws.len();
    for w in ws {
        let gap = wb.apply(&w)? - wa.apply(&w)?;
        let min = linalg::min_eigenvalue(&gap, tol)?;
        if min < -tol {
            return Ok(RefineVerdict::Refuted { witness: w, min_eigenvalue: min });
        }
    }
    Ok(RefineVerdict::Unrefuted(n))
}

/// tr(A B), used by the duality checks.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> linalg::C64 {
    let n = a.rows();
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..a.cols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}
