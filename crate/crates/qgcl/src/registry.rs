//! Variable declarations and cylindrical extension.
//!
//! Tensor factors are always ordered by declaration order in the registry,
//! independent of where a variable first shows up in a program.

use crate::linalg::{digits, undigits, CMatrix, ZERO};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("variable '{0}' declared twice with conflicting types")]
    Duplicate(String),
    #[error("variable scope: {0}")]
    Scope(String),
    #[error("dimension: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, RegistryError>;

pub type VarId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct QVarDecl {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CVarDecl {
    pub name: String,
    pub domain: Vec<String>,
    /// Declared explicitly (as opposed to grown from the labels in use).
    pub declared: bool,
}

/// Quantum variables in canonical (declaration) order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(Vec<VarId>);

impl VarSet {
    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    pub fn from_ids(ids: impl IntoIterator<Item = VarId>) -> Self {
        let mut v: Vec<VarId> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VarSet(v)
    }

    pub fn ids(&self) -> &[VarId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: VarId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::from_ids(self.0.iter().chain(&other.0).copied())
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.iter().copied().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.intersection(other).is_empty()
    }

    pub fn position(&self, id: VarId) -> Option<usize> {
        self.0.binary_search(&id).ok()
    }
}

impl FromIterator<VarId> for VarSet {
    fn from_iter<T: IntoIterator<Item = VarId>>(iter: T) -> Self {
        VarSet::from_ids(iter)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Registry {
    qvars: Vec<QVarDecl>,
    cvars: Vec<CVarDecl>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a quantum variable; redeclaring with the same dimension is a no-op.
    pub fn declare_qvar(&mut self, name: &str, dim: usize) -> Result<VarId> {
        if dim == 0 {
            return Err(RegistryError::Dimension(format!("'{name}' has dimension 0")));
        }
        if self.cvar(name).is_some() {
            return Err(RegistryError::Duplicate(name.into()));
        }
        if let Some(id) = self.qvar_id(name) {
            return if self.qvars[id].dim == dim { Ok(id) } else { Err(RegistryError::Duplicate(name.into())) };
        }
        self.qvars.push(QVarDecl { name: name.into(), dim });
        Ok(self.qvars.len() - 1)
    }

    /// Declares a classical variable with an explicit domain.
    pub fn declare_cvar(&mut self, name: &str, domain: &[String]) -> Result<()> {
        if domain.is_empty() {
            return Err(RegistryError::Dimension(format!("'{name}' has an empty domain")));
        }
        if self.qvar_id(name).is_some() {
            return Err(RegistryError::Duplicate(name.into()));
        }
        match self.cvars.iter_mut().find(|c| c.name == name) {
            Some(c) if c.declared && c.domain != domain => Err(RegistryError::Duplicate(name.into())),
            Some(c) => {
                c.domain = domain.to_vec();
                c.declared = true;
                Ok(())
            }
            None => {
                self.cvars.push(CVarDecl { name: name.into(), domain: domain.to_vec(), declared: true });
                Ok(())
            }
        }
    }

    /// Records a classical variable used by a measurement; an undeclared
    /// variable's domain is the set of labels seen so far.
    pub fn use_cvar(&mut self, name: &str, labels: &[String]) -> Result<()> {
        if self.qvar_id(name).is_some() {
            return Err(RegistryError::Duplicate(name.into()));
        }
        match self.cvars.iter_mut().find(|c| c.name == name) {
            Some(c) if c.declared => match labels.iter().find(|l| !c.domain.contains(l)) {
                Some(l) => Err(RegistryError::Scope(format!("label '{l}' is not in the domain of '{name}'"))),
                None => Ok(()),
            },
            Some(c) => {
                for l in labels {
                    if !c.domain.contains(l) {
                        c.domain.push(l.clone());
                    }
                }
                Ok(())
            }
            None => {
                self.cvars.push(CVarDecl { name: name.into(), domain: labels.to_vec(), declared: false });
                Ok(())
            }
        }
    }

    pub fn qvar_id(&self, name: &str) -> Option<VarId> {
        self.qvars.iter().position(|q| q.name == name)
    }

    pub fn qvar(&self, id: VarId) -> &QVarDecl {
        &self.qvars[id]
    }

    pub fn qvars(&self) -> &[QVarDecl] {
        &self.qvars
    }

    pub fn cvar(&self, name: &str) -> Option<&CVarDecl> {
        self.cvars.iter().find(|c| c.name == name)
    }

    pub fn cvars(&self) -> &[CVarDecl] {
        &self.cvars
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.qvars[id].name
    }

    pub fn varset(&self, names: &[&str]) -> Result<VarSet> {
        names
            .iter()
            .map(|n| self.qvar_id(n).ok_or_else(|| RegistryError::UnknownVariable((*n).into())))
            .collect()
    }

    pub fn all(&self) -> VarSet {
        VarSet::from_ids(0..self.qvars.len())
    }

    pub fn dims(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|&v| self.qvars[v].dim).collect()
    }

    pub fn dim_of(&self, vars: &VarSet) -> usize {
        self.dims(vars.ids()).iter().product()
    }

    pub fn dim_of_names(&self, names: &[&str]) -> Result<usize> {
        Ok(self.dim_of(&self.varset(names)?))
    }

    pub fn names(&self, vars: &VarSet) -> Vec<String> {
        vars.ids().iter().map(|&v| self.qvars[v].name.clone()).collect()
    }

    pub fn display(&self, vars: &VarSet) -> String {
        format!("{{{}}}", self.names(vars).join(","))
    }

    /// Index helper for a set `to` split into the factors `part` (in the
    /// given order) and the remaining factors (in canonical order).
    pub fn splitter(&self, part: &[VarId], to: &VarSet) -> Result<Splitter> {
        let mut seen = Vec::new();
        for &p in part {
            if !to.contains(p) {
                return Err(RegistryError::Scope(format!(
                    "'{}' is not among {}",
                    self.name(p),
                    self.display(to)
                )));
            }
            if seen.contains(&p) {
                return Err(RegistryError::Scope(format!("'{}' listed twice", self.name(p))));
            }
            seen.push(p);
        }
        let rest: Vec<VarId> = to.ids().iter().copied().filter(|v| !part.contains(v)).collect();
        let part_pos: Vec<usize> = part.iter().map(|&p| to.position(p).unwrap()).collect();
        let rest_pos: Vec<usize> = rest.iter().map(|&p| to.position(p).unwrap()).collect();
        Ok(Splitter {
            dims: self.dims(to.ids()),
            part_dims: self.dims(part),
            rest_dims: self.dims(&rest),
            part_pos,
            rest_pos,
        })
    }

    /// Cylindrical extension of `op`, whose tensor factors are `from` in the
    /// listed order, to the canonical ordering of `to`.
    pub fn embed_ordered(&self, op: &CMatrix, from: &[VarId], to: &VarSet) -> Result<CMatrix> {
        let sp = self.splitter(from, to)?;
        let d = sp.part_dim();
        if op.rows() != d || op.cols() != d {
            return Err(RegistryError::Dimension(format!(
                "{}x{} operator on variables of total dimension {}",
                op.rows(),
                op.cols(),
                d
            )));
        }
        let n = sp.full_dim();
        let mut out = CMatrix::zeros(n, n);
        for rest in 0..sp.rest_dim() {
            for a in 0..d {
                for b in 0..d {
                    let z = op.get(a, b);
                    if z != ZERO {
                        out[(sp.join(a, rest), sp.join(b, rest))] = z;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn embed(&self, op: &CMatrix, from: &VarSet, to: &VarSet) -> Result<CMatrix> {
        if from == to {
            if op.rows() != self.dim_of(to) || !op.is_square() {
                return Err(RegistryError::Dimension(format!(
                    "{}x{} operator on {}",
                    op.rows(),
                    op.cols(),
                    self.display(to)
                )));
            }
            return Ok(op.clone());
        }
        if !from.is_subset(to) {
            return Err(RegistryError::Scope(format!(
                "{} is not a subset of {}",
                self.display(from),
                self.display(to)
            )));
        }
        self.embed_ordered(op, from.ids(), to)
    }
}

/// Splits indices of a product space into a chosen group of factors and the rest.
#[derive(Clone, Debug)]
pub struct Splitter {
    dims: Vec<usize>,
    part_dims: Vec<usize>,
    rest_dims: Vec<usize>,
    part_pos: Vec<usize>,
    rest_pos: Vec<usize>,
}

impl Splitter {
    pub fn full_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn part_dim(&self) -> usize {
        self.part_dims.iter().product()
    }

    pub fn rest_dim(&self) -> usize {
        self.rest_dims.iter().product()
    }

    pub fn join(&self, part: usize, rest: usize) -> usize {
        let pd = digits(part, &self.part_dims);
        let rd = digits(rest, &self.rest_dims);
        let mut full = vec![0; self.dims.len()];
        for (k, &p) in self.part_pos.iter().enumerate() {
            full[p] = pd[k];
        }
        for (k, &p) in self.rest_pos.iter().enumerate() {
            full[p] = rd[k];
        }
        undigits(&full, &self.dims)
    }

    pub fn split(&self, index: usize) -> (usize, usize) {
        let full = digits(index, &self.dims);
        let pd: Vec<usize> = self.part_pos.iter().map(|&p| full[p]).collect();
        let rd: Vec<usize> = self.rest_pos.iter().map(|&p| full[p]).collect();
        (undigits(&pd, &self.part_dims), undigits(&rd, &self.rest_dims))
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, r};

    fn x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn cnot() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[(i, j)] = r(1.0);
        }
        m
    }

    fn three_qubits() -> Registry {
        let mut reg = Registry::new();
        for q in ["q1", "q2", "q3"] {
            reg.declare_qvar(q, 2).unwrap();
        }
        reg
    }

    #[test]
    fn dims() {
        let mut reg = Registry::new();
        reg.declare_qvar("a", 2).unwrap();
        reg.declare_qvar("t", 3).unwrap();
        assert_eq!(reg.dim_of(&VarSet::empty()), 1);
        assert_eq!(reg.dim_of_names(&["a"]).unwrap(), 2);
        assert_eq!(reg.dim_of_names(&["t", "a"]).unwrap(), 6);
        assert_eq!(reg.dim_of_names(&["zz"]), Err(RegistryError::UnknownVariable("zz".into())));
    }

    #[test]
    fn embed_trivial_cases() {
        let reg = three_qubits();
        let q = reg.varset(&["q1"]).unwrap();
        assert_eq!(reg.embed(&x(), &q, &q).unwrap(), x());
        let q2 = reg.varset(&["q2"]).unwrap();
        let q12 = reg.varset(&["q1", "q2"]).unwrap();
        assert_eq!(reg.embed(&x(), &q2, &q12).unwrap(), kron(&CMatrix::identity(2), &x()));
        assert!(matches!(reg.embed(&x(), &q12, &q2), Err(RegistryError::Scope(_))));
    }

    #[test]
    fn embed_cnot_across_a_gap_acts_on_basis_vectors() {
        let reg = three_qubits();
        let all = reg.all();
        let m = reg.embed(&cnot(), &reg.varset(&["q1", "q3"]).unwrap(), &all).unwrap();
        for b in 0..8 {
            let (q1, q2, q3) = (b >> 2 & 1, b >> 1 & 1, b & 1);
            let target = q1 << 2 | q2 << 1 | (q3 ^ q1);
            let image = &m * &CMatrix::basis(8, b);
            assert_eq!(image, CMatrix::basis(8, target));
        }
        // control on q3, target q1
        let m = reg.embed_ordered(&cnot(), &[2, 0], &all).unwrap();
        for b in 0..8 {
            let (q1, q2, q3) = (b >> 2 & 1, b >> 1 & 1, b & 1);
            let target = (q1 ^ q3) << 2 | q2 << 1 | q3;
            assert_eq!(&m * &CMatrix::basis(8, b), CMatrix::basis(8, target));
        }
    }

    #[test]
    fn redeclaration_rules() {
        let mut reg = Registry::new();
        reg.declare_qvar("q", 2).unwrap();
        assert_eq!(reg.declare_qvar("q", 2).unwrap(), 0);
        assert!(reg.declare_qvar("q", 3).is_err());
        assert!(reg.declare_cvar("q", &["0".into()]).is_err());
        reg.use_cvar("x", &["0".into()]).unwrap();
        reg.use_cvar("x", &["1".into()]).unwrap();
        assert_eq!(reg.cvar("x").unwrap().domain, vec!["0", "1"]);
        reg.declare_cvar("y", &["a".into()]).unwrap();
        assert!(reg.use_cvar("y", &["b".into()]).is_err());
    }

    #[test]
    fn splitter_round_trip() {
        let mut reg = Registry::new();
        for (n, d) in [("a", 2), ("b", 3), ("c", 2)] {
            reg.declare_qvar(n, d).unwrap();
        }
        let sp = reg.splitter(&[2, 0], &reg.all()).unwrap();
        for k in 0..12 {
            let (p, rest) = sp.split(k);
            assert_eq!(sp.join(p, rest), k);
        }
    }
}
