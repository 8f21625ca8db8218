//! Operator-valued functions, their guarded compositions, and the channels
//! they induce.

use crate::linalg::{self, choi_of, choi_residual, kron, ChoiMatrix, CMatrix, LinalgError, C64, ONE, TAU_EQ, ZERO};
use crate::registry::{Registry, RegistryError, VarId, VarSet};
use crate::state::ClassicalState;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OvfError {
    #[error("dimension: {0}")]
    Dimension(String),
    #[error("variable scope: {0}")]
    Scope(String),
    #[error("guards are not an orthonormal basis of the coin space: {0}")]
    GuardBasis(String),
    #[error("coefficient family for branch {branch} has squared norm {sum}, expected 1")]
    AlphaNormalization { branch: usize, sum: f64 },
    #[error("coefficient for branch {0} depends on that branch's own state")]
    AlphaDependence(usize),
    #[error("sum of F(d)^dagger F(d) exceeds the identity")]
    NotSubnormalized,
    #[error("classical state {0} listed twice")]
    DuplicateState(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, OvfError>;

/// A finite map from classical states to operators on `H_vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpValuedFn {
    vars: VarSet,
    dim: usize,
    entries: Vec<(ClassicalState, CMatrix)>,
}

impl OpValuedFn {
    /// Checked constructor: shapes, distinct states, and ∑F†F ⊑ I.
    pub fn new(reg: &Registry, vars: VarSet, entries: Vec<(ClassicalState, CMatrix)>) -> Result<Self> {
        let f = Self::from_parts(reg, vars, entries)?;
        if !f.is_subnormalized(TAU_EQ)? {
            return Err(OvfError::NotSubnormalized);
        }
        Ok(f)
    }

    /// Shape-checked constructor without the normalization test.
    pub fn from_parts(reg: &Registry, vars: VarSet, entries: Vec<(ClassicalState, CMatrix)>) -> Result<Self> {
        let dim = reg.dim_of(&vars);
        for (i, (s, m)) in entries.iter().enumerate() {
            if m.rows() != dim || m.cols() != dim {
                return Err(OvfError::Dimension(format!(
                    "F({}) is {}x{}, expected {dim}x{dim}",
                    s.label(),
                    m.rows(),
                    m.cols()
                )));
            }
            if entries[..i].iter().any(|(t, _)| t == s) {
                return Err(OvfError::DuplicateState(s.label()));
            }
        }
        Ok(OpValuedFn { vars, dim, entries })
    }

    /// Single-entry function at the empty state.
    pub fn constant(reg: &Registry, vars: VarSet, m: CMatrix) -> Result<Self> {
        Self::from_parts(reg, vars, vec![(ClassicalState::Empty, m)])
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(ClassicalState, CMatrix)] {
        &self.entries
    }

    pub fn states(&self) -> impl Iterator<Item = &ClassicalState> {
        self.entries.iter().map(|(s, _)| s)
    }

    pub fn get(&self, s: &ClassicalState) -> Option<&CMatrix> {
        self.entries.iter().find(|(t, _)| t == s).map(|(_, m)| m)
    }

    pub fn get_label(&self, label: &str) -> Option<&CMatrix> {
        self.entries.iter().find(|(t, _)| t.label() == label).map(|(_, m)| m)
    }

    pub fn gram_sum(&self) -> CMatrix {
        self.entries
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, (_, m)| acc + m.adjoint() * m)
    }

    pub fn is_subnormalized(&self, tol: f64) -> Result<bool> {
        Ok(linalg::loewner_leq(&self.gram_sum(), &CMatrix::identity(self.dim), tol)?)
    }

    pub fn is_full(&self, tol: f64) -> bool {
        self.gram_sum().approx_eq(&CMatrix::identity(self.dim), tol)
    }

    /// Cylindrical extension of every entry.
    pub fn extend(&self, reg: &Registry, to: &VarSet) -> Result<Self> {
        if &self.vars == to {
            return Ok(self.clone());
        }
        let entries = self
            .entries
            .iter()
            .map(|(s, m)| Ok((s.clone(), reg.embed(m, &self.vars, to)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(OpValuedFn { vars: to.clone(), dim: reg.dim_of(to), entries })
    }

    /// λ coefficients in entry order.
    pub fn lambdas(&self) -> Vec<f64> {
        let n = self.entries.len();
        if n == 1 {
            return vec![1.0];
        }
        let traces: Vec<f64> = self.entries.iter().map(|(_, m)| m.hs_norm_sqr()).collect();
        let total: f64 = traces.iter().sum();
        if total <= 0.0 {
            return vec![1.0 / (n as f64).sqrt(); n];
        }
        traces.iter().map(|t| (t / total).sqrt()).collect()
    }

    pub fn to_super_op(&self) -> SuperOp {
        SuperOp::from_kraus_unchecked(self.vars.clone(), self.dim, self.entries.iter().map(|(_, m)| m.clone()).collect())
    }
}

/// λ coefficient of one state: `sqrt(tr F(δ)†F(δ) / Σ_τ tr F(τ)†F(τ))`, with
/// λ = 1 on singleton domains and 1/√|Δ| when every operator vanishes.
pub fn lambda_coeff(f: &OpValuedFn, delta: &ClassicalState) -> Option<f64> {
    let k = f.entries.iter().position(|(s, _)| s == delta)?;
    Some(f.lambdas()[k])
}

/// Coefficients α^{(i)} indexed by the states of the other branches.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaFamily {
    sizes: Vec<usize>,
    coeffs: Vec<Vec<C64>>,
}

fn others_index(sizes: &[usize], i: usize, tuple: &[usize]) -> usize {
    sizes
        .iter()
        .zip(tuple)
        .enumerate()
        .filter(|(k, _)| *k != i)
        .fold(0, |acc, (_, (&d, &x))| acc * d + x)
}

fn tuples(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = sizes.iter().product();
    (0..total).map(move |k| linalg::digits(k, sizes))
}

impl AlphaFamily {
    /// `f(i, tuple)` is evaluated on full tuples; `tuple[i]` is always 0, so
    /// any dependence on the branch's own state is invisible by construction.
    pub fn from_fn(sizes: &[usize], f: impl Fn(usize, &[usize]) -> C64) -> Self {
        let coeffs = (0..sizes.len())
            .map(|i| {
                let mut others = sizes.to_vec();
                others[i] = 1;
                tuples(&others).map(|t| f(i, &t)).collect()
            })
            .collect();
        AlphaFamily { sizes: sizes.to_vec(), coeffs }
    }

    /// Like `from_fn`, but evaluates every full tuple and rejects families
    /// whose branch-i coefficient varies with δ_i.
    pub fn from_full_fn(sizes: &[usize], f: impl Fn(usize, &[usize]) -> C64, tol: f64) -> Result<Self> {
        let fam = Self::from_fn(sizes, &f);
        for i in 0..sizes.len() {
            for t in tuples(sizes) {
                if (f(i, &t) - fam.get(i, &t)).norm() > tol {
                    return Err(OvfError::AlphaDependence(i));
                }
            }
        }
        Ok(fam)
    }

    /// The coefficients of plain guarded composition: ∏_{k≠i} λ_{kδ_k}.
    pub fn lambda(lambdas: &[Vec<f64>]) -> Self {
        let sizes: Vec<usize> = lambdas.iter().map(Vec::len).collect();
        Self::from_fn(&sizes, |i, t| {
            C64::new((0..t.len()).filter(|&k| k != i).map(|k| lambdas[k][t[k]]).product(), 0.0)
        })
    }

    pub fn uniform(sizes: &[usize]) -> Self {
        Self::from_fn(sizes, |i, _| {
            let others: usize = sizes.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, d)| d).product();
            C64::new(1.0 / (others as f64).sqrt(), 0.0)
        })
    }

    /// e^{iθ_i} ∏_{k≠i} λ_{kδ_k}.
    pub fn phase(lambdas: &[Vec<f64>], thetas: &[f64]) -> Self {
        let base = Self::lambda(lambdas);
        let sizes = base.sizes.clone();
        Self::from_fn(&sizes, |i, t| base.get(i, t) * C64::from_polar(1.0, thetas.get(i).copied().unwrap_or(0.0)))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// α^{(i)} at the full state tuple (component i is ignored).
    pub fn get(&self, i: usize, tuple: &[usize]) -> C64 {
        self.coeffs[i][others_index(&self.sizes, i, tuple)]
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        for (i, c) in self.coeffs.iter().enumerate() {
            let sum: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            if (sum - 1.0).abs() > tol {
                return Err(OvfError::AlphaNormalization { branch: i, sum });
            }
        }
        Ok(())
    }
}

/// A guard vector in the coin space together with its branch.
#[derive(Clone, Debug)]
pub struct Branch {
    pub guard: Vec<C64>,
    pub f: OpValuedFn,
}

fn check_guards(branches: &[Branch], coin_dim: usize) -> Result<()> {
    if branches.len() != coin_dim {
        return Err(OvfError::GuardBasis(format!("{} guards for a coin of dimension {coin_dim}", branches.len())));
    }
    for (i, a) in branches.iter().enumerate() {
        if a.guard.len() != coin_dim {
            return Err(OvfError::GuardBasis(format!("guard {i} has {} components", a.guard.len())));
        }
        for (j, b) in branches.iter().enumerate().skip(i) {
            let ip: C64 = a.guard.iter().zip(&b.guard).map(|(x, y)| x.conj() * y).sum();
            let expect = if i == j { ONE } else { ZERO };
            if (ip - expect).norm() > TAU_EQ {
                return Err(OvfError::GuardBasis(format!("<g{i}|g{j}> = {ip}")));
            }
        }
    }
    Ok(())
}

/// Plain guarded composition along the given guards.
pub fn guarded_compose(reg: &Registry, branches: &[Branch], coin: &VarSet) -> Result<OpValuedFn> {
    let lambdas: Vec<Vec<f64>> = branches.iter().map(|b| b.f.lambdas()).collect();
    compose_with(reg, branches, coin, &AlphaFamily::lambda(&lambdas))
}

/// Guarded composition with an explicit coefficient family.
pub fn alpha_guarded_compose(reg: &Registry, branches: &[Branch], coin: &VarSet, alpha: &AlphaFamily) -> Result<OpValuedFn> {
    alpha.check_normalized(TAU_EQ)?;
    compose_with(reg, branches, coin, alpha)
}

fn compose_with(reg: &Registry, branches: &[Branch], coin: &VarSet, alpha: &AlphaFamily) -> Result<OpValuedFn> {
    let coin_dim = reg.dim_of(coin);
    check_guards(branches, coin_dim)?;
    let sizes: Vec<usize> = branches.iter().map(|b| b.f.len()).collect();
    if alpha.sizes() != sizes.as_slice() {
        return Err(OvfError::Dimension(format!("coefficients for domains {:?}, branches have {:?}", alpha.sizes(), sizes)));
    }
    let v = branches.iter().fold(VarSet::empty(), |acc, b| acc.union(b.f.vars()));
    if !coin.is_disjoint(&v) {
        return Err(OvfError::Scope(format!(
            "coin {} overlaps branch variables {}",
            reg.display(coin),
            reg.display(&coin.intersection(&v))
        )));
    }
    let extended = branches.iter().map(|b| b.f.extend(reg, &v)).collect::<Result<Vec<_>>>()?;
    let projectors: Vec<CMatrix> = branches.iter().map(|b| CMatrix::outer(&b.guard, &b.guard)).collect();
    let out_vars = coin.union(&v);
    let order: Vec<VarId> = coin.ids().iter().chain(v.ids()).copied().collect();
    let mut entries = Vec::with_capacity(sizes.iter().product());
    for t in tuples(&sizes) {
        let mut m = CMatrix::zeros(coin_dim * reg.dim_of(&v), coin_dim * reg.dim_of(&v));
        for (i, f) in extended.iter().enumerate() {
            let a = alpha.get(i, &t);
            if a == ZERO {
                continue;
            }
            m = m + kron(&projectors[i], &f.entries[t[i]].1).scale(a);
        }
        let state = ClassicalState::superpose(t.iter().zip(&extended).map(|(&k, f)| f.entries[k].0.clone()).collect())
            .expect("at least one branch");
        entries.push((state, reg.embed_ordered(&m, &order, &out_vars)?));
    }
    OpValuedFn::from_parts(reg, out_vars, entries)
}

/// A channel in Kraus form on `H_vars`.
#[derive(Clone, Debug)]
pub struct SuperOp {
    vars: VarSet,
    dim: usize,
    kraus: Vec<CMatrix>,
    choi: OnceLock<ChoiMatrix>,
}

impl SuperOp {
    pub fn from_kraus(reg: &Registry, vars: VarSet, kraus: Vec<CMatrix>) -> Result<Self> {
        let dim = reg.dim_of(&vars);
        if let Some(k) = kraus.iter().find(|k| k.rows() != dim || k.cols() != dim) {
            return Err(OvfError::Dimension(format!("{}x{} Kraus operator on dimension {dim}", k.rows(), k.cols())));
        }
        Ok(Self::from_kraus_unchecked(vars, dim, kraus))
    }

    pub(crate) fn from_kraus_unchecked(vars: VarSet, dim: usize, kraus: Vec<CMatrix>) -> Self {
        SuperOp { vars, dim, kraus, choi: OnceLock::new() }
    }

    pub fn identity(reg: &Registry, vars: VarSet) -> Self {
        let dim = reg.dim_of(&vars);
        Self::from_kraus_unchecked(vars, dim, vec![CMatrix::identity(dim)])
    }

    pub fn zero(reg: &Registry, vars: VarSet) -> Self {
        let dim = reg.dim_of(&vars);
        Self::from_kraus_unchecked(vars, dim, Vec::new())
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &ChoiMatrix {
        self.choi
            .get_or_init(|| choi_of(&self.kraus, self.dim, self.dim).expect("Kraus shapes checked at construction"))
    }

    /// ∑ K ρ K†
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(OvfError::Dimension(format!("{}x{} input to a channel on dimension {}", rho.rows(), rho.cols(), self.dim)));
        }
        Ok(self.kraus.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k * rho * k.adjoint()))
    }

    /// The dual (Heisenberg-picture) map with Kraus operators K†.
    pub fn adjoint(&self) -> Self {
        Self::from_kraus_unchecked(self.vars.clone(), self.dim, self.kraus.iter().map(CMatrix::adjoint).collect())
    }

    /// `self` followed by `next`, both on the same space.
    pub fn then(&self, next: &SuperOp) -> Result<Self> {
        self.same_space(next)?;
        let kraus = self.kraus.iter().flat_map(|a| next.kraus.iter().map(move |b| b * a)).collect();
        Ok(Self::from_kraus_unchecked(self.vars.clone(), self.dim, kraus))
    }

    pub fn scale(&self, p: f64) -> Self {
        let s = C64::new(p.sqrt(), 0.0);
        Self::from_kraus_unchecked(self.vars.clone(), self.dim, self.kraus.iter().map(|k| k.scale(s)).collect())
    }

    /// Pointwise sum of channels on the same space.
    pub fn plus(&self, other: &SuperOp) -> Result<Self> {
        self.same_space(other)?;
        let kraus = self.kraus.iter().chain(&other.kraus).cloned().collect();
        Ok(Self::from_kraus_unchecked(self.vars.clone(), self.dim, kraus))
    }

    pub fn extend(&self, reg: &Registry, to: &VarSet) -> Result<Self> {
        if &self.vars == to {
            return Ok(self.clone());
        }
        let kraus = self.kraus.iter().map(|k| reg.embed(k, &self.vars, to)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self::from_kraus_unchecked(to.clone(), reg.dim_of(to), kraus))
    }

    /// Max-abs Choi residual against a channel on the same space.
    pub fn residual(&self, other: &SuperOp) -> Result<f64> {
        self.same_space(other)?;
        Ok(choi_residual(&self.kraus, &other.kraus, self.dim, self.dim)?)
    }

    pub fn gram_sum(&self) -> CMatrix {
        self.kraus.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.gram_sum().approx_eq(&CMatrix::identity(self.dim), tol)
    }

    pub fn is_trace_nonincreasing(&self, tol: f64) -> Result<bool> {
        Ok(linalg::loewner_leq(&self.gram_sum(), &CMatrix::identity(self.dim), tol)?)
    }

    fn same_space(&self, other: &SuperOp) -> Result<()> {
        if self.vars != other.vars || self.dim != other.dim {
            return Err(OvfError::Dimension(format!("channels on {} and {} differ in space", self.vars, other.vars)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r, I};

    fn reg2() -> Registry {
        let mut reg = Registry::new();
        reg.declare_qvar("c", 2).unwrap();
        reg.declare_qvar("q", 2).unwrap();
        reg
    }

    fn comp(n: usize) -> Vec<Vec<C64>> {
        (0..n).map(|k| CMatrix::basis(n, k).data().to_vec()).collect()
    }

    fn meas(reg: &Registry, x: &str, m0: CMatrix, m1: CMatrix) -> OpValuedFn {
        let q = reg.varset(&["q"]).unwrap();
        OpValuedFn::new(
            reg,
            q,
            vec![(ClassicalState::assign(x, "0"), m0), (ClassicalState::assign(x, "1"), m1)],
        )
        .unwrap()
    }

    #[test]
    fn lambda_rules() {
        let reg = reg2();
        let q = reg.varset(&["q"]).unwrap();
        let abort = OpValuedFn::constant(&reg, VarSet::empty(), CMatrix::scalar(ZERO)).unwrap();
        assert_eq!(abort.lambdas(), vec![1.0]);
        let zeros = OpValuedFn::new(
            &reg,
            q.clone(),
            vec![(ClassicalState::assign("x", "0"), CMatrix::zeros(2, 2)), (ClassicalState::assign("x", "1"), CMatrix::zeros(2, 2))],
        )
        .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(zeros.lambdas().iter().all(|l| (l - s).abs() < 1e-15));
        let m = meas(&reg, "x", CMatrix::diag(&[ONE, ZERO]), CMatrix::diag(&[ZERO, ONE]));
        assert!((lambda_coeff(&m, &ClassicalState::assign("x", "1")).unwrap() - s).abs() < 1e-15);
        assert_eq!(lambda_coeff(&m, &ClassicalState::assign("x", "7")), None);
    }

    #[test]
    fn unitary_branches_give_a_multiplexor() {
        let reg = reg2();
        let q = reg.varset(&["q"]).unwrap();
        let c_ = reg.varset(&["c"]).unwrap();
        let u0 = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let u1 = CMatrix::diag(&[ONE, I]);
        let g = comp(2);
        let branches = vec![
            Branch { guard: g[0].clone(), f: OpValuedFn::constant(&reg, q.clone(), u0.clone()).unwrap() },
            Branch { guard: g[1].clone(), f: OpValuedFn::constant(&reg, q.clone(), u1.clone()).unwrap() },
        ];
        let f = guarded_compose(&reg, &branches, &c_).unwrap();
        assert_eq!(f.len(), 1);
        let m = &f.entries()[0].1;
        assert!(m.block(0, 0, 2, 2).approx_eq(&u0, 0.0) && m.block(2, 2, 2, 2).approx_eq(&u1, 0.0));
        assert!(m.block(0, 2, 2, 2).approx_eq(&CMatrix::zeros(2, 2), 0.0));
        assert!(m.is_unitary(1e-15));
        assert_eq!(f.entries()[0].0.label(), "(eps(+)eps)");
    }

    #[test]
    fn guarded_measurements_scale_by_inverse_sqrt2() {
        let reg = reg2();
        let c_ = reg.varset(&["c"]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mz = meas(&reg, "x", CMatrix::diag(&[ONE, ZERO]), CMatrix::diag(&[ZERO, ONE]));
        let plus = [r(s), r(s)];
        let minus = [r(s), r(-s)];
        let mx = meas(&reg, "y", CMatrix::outer(&plus, &plus), CMatrix::outer(&minus, &minus));
        let g = comp(2);
        let f = guarded_compose(
            &reg,
            &[Branch { guard: g[0].clone(), f: mz.clone() }, Branch { guard: g[1].clone(), f: mx.clone() }],
            &c_,
        )
        .unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.is_full(1e-14));
        for (k, (_, m)) in f.entries().iter().enumerate() {
            let (i, j) = (k / 2, k % 2);
            assert!(m.block(0, 0, 2, 2).approx_eq(&mz.entries()[i].1.scale(r(s)), 1e-15));
            assert!(m.block(2, 2, 2, 2).approx_eq(&mx.entries()[j].1.scale(r(s)), 1e-15));
        }
    }

    #[test]
    fn guard_and_scope_errors() {
        let reg = reg2();
        let q = reg.varset(&["q"]).unwrap();
        let c_ = reg.varset(&["c"]).unwrap();
        let id = OpValuedFn::constant(&reg, q.clone(), CMatrix::identity(2)).unwrap();
        let bad = vec![
            Branch { guard: vec![ONE, ZERO], f: id.clone() },
            Branch { guard: vec![ONE, ZERO], f: id.clone() },
        ];
        assert!(matches!(guarded_compose(&reg, &bad, &c_), Err(OvfError::GuardBasis(_))));
        let g = comp(2);
        let overlap = vec![Branch { guard: g[0].clone(), f: id.clone() }, Branch { guard: g[1].clone(), f: id.clone() }];
        assert!(matches!(guarded_compose(&reg, &overlap, &q), Err(OvfError::Scope(_))));
    }

    #[test]
    fn alpha_families() {
        let u = AlphaFamily::uniform(&[2, 2]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for t in tuples(&[2, 2]) {
            assert!((u.get(0, &t) - r(s)).norm() < 1e-15 && (u.get(1, &t) - r(s)).norm() < 1e-15);
        }
        u.check_normalized(1e-12).unwrap();
        let bad = AlphaFamily::from_fn(&[2, 2], |_, _| ONE);
        assert!(matches!(bad.check_normalized(1e-12), Err(OvfError::AlphaNormalization { .. })));
        let dependent = AlphaFamily::from_full_fn(&[2, 2], |i, t| r(t[i] as f64), 1e-12);
        assert_eq!(dependent, Err(OvfError::AlphaDependence(0)));
        let p = AlphaFamily::phase(&[vec![1.0], vec![1.0]], &[0.0, 0.5]);
        assert!((p.get(1, &[0, 0]) - C64::from_polar(1.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn superop_basics() {
        let reg = reg2();
        let q = reg.varset(&["q"]).unwrap();
        let p0 = CMatrix::diag(&[ONE, ZERO]);
        let p1 = CMatrix::diag(&[ZERO, ONE]);
        let e = SuperOp::from_kraus(&reg, q.clone(), vec![p0, p1]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CMatrix::outer(&[r(s), r(s)], &[r(s), r(s)]);
        assert!(e.apply(&plus).unwrap().approx_eq(&CMatrix::identity(2).scale(r(0.5)), 1e-15));
        assert!(e.is_trace_preserving(1e-15));
        let id = SuperOp::identity(&reg, q.clone());
        assert!(id.apply(&plus).unwrap().approx_eq(&plus, 0.0));
        let zero = SuperOp::zero(&reg, q.clone());
        assert_eq!(zero.apply(&plus).unwrap(), CMatrix::zeros(2, 2));
        assert!(e.then(&id).unwrap().residual(&e).unwrap() < 1e-15);
        assert!(id.residual(&e).unwrap() > 0.5);
        assert!(e.apply(&CMatrix::identity(3)).is_err());
        let k = CMatrix::from_rows(&[vec![ZERO, c(0.0, 1.0)], vec![ZERO, ZERO]]).unwrap();
        let e = SuperOp::from_kraus(&reg, q, vec![k.clone()]).unwrap();
        assert_eq!(e.adjoint().kraus()[0], k.adjoint());
    }
}
