//! Seeded random matrices, states and programs for property tests and the
//! law corpus.

use crate::linalg::{CMatrix, C64, ONE};
use crate::registry::Registry;
use crate::syntax::{Gate, Guard, Measurement, Program, QBranch};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut Rand) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rng: &mut Rand, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    CMatrix::new(rows, cols, data).expect("finite samples")
}

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt).
pub fn orthonormal_columns(m: &CMatrix) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let mut v = m.col(j);
        for u in &cols {
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= dot * y;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.iter().map(|z| z / n).collect());
    }
    let mut out = CMatrix::zeros(m.rows(), m.cols());
    for (j, v) in cols.iter().enumerate() {
        for (i, z) in v.iter().enumerate() {
            out[(i, j)] = *z;
        }
    }
    out
}

/// Haar-distributed unitary.
pub fn unitary(rng: &mut Rand, d: usize) -> CMatrix {
    orthonormal_columns(&ginibre(rng, d, d))
}

/// Isometry of shape rows × cols, rows ≥ cols.
pub fn isometry(rng: &mut Rand, rows: usize, cols: usize) -> CMatrix {
    orthonormal_columns(&ginibre(rng, rows, cols))
}

pub fn pure_state(rng: &mut Rand, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn pure_density(rng: &mut Rand, d: usize) -> CMatrix {
    let v = pure_state(rng, d);
    CMatrix::outer(&v, &v)
}

/// Random positive semidefinite matrix G G† of rank `rank`.
pub fn psd(rng: &mut Rand, d: usize, rank: usize) -> CMatrix {
    let g = ginibre(rng, d, rank);
    &g * &g.adjoint()
}

/// Random density operator of full rank.
pub fn density(rng: &mut Rand, d: usize) -> CMatrix {
    let p = psd(rng, d, d);
    let t = p.trace();
    p.scale(ONE / t)
}

pub fn hermitian(rng: &mut Rand, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    (&g + &g.adjoint()).scale(C64::new(0.5, 0.0))
}

/// A complete measurement with `outcomes` operators: blocks of an isometry.
pub fn measurement_ops(rng: &mut Rand, d: usize, outcomes: usize) -> Vec<CMatrix> {
    let v = isometry(rng, d * outcomes, d);
    (0..outcomes).map(|m| v.block(m * d, 0, d, d)).collect()
}

/// Sub-normalized family: a complete family scaled by `s` ≤ 1.
pub fn subnormalized_ops(rng: &mut Rand, d: usize, outcomes: usize, s: f64) -> Vec<CMatrix> {
    measurement_ops(rng, d, outcomes).into_iter().map(|m| m.scale(C64::new(s, 0.0))).collect()
}

/// Random well-formed programs over a fixed registry.
/// Owns a copy of the registry so that fresh classical variables can be
/// registered as they are generated.
pub struct ProgramGen {
    reg: Registry,
    counter: usize,
    pub measure_weight: u32,
    pub abort_weight: u32,
    pub qif_weight: u32,
}

impl ProgramGen {
    pub fn new(reg: &Registry) -> Self {
        ProgramGen { reg: reg.clone(), counter: 0, measure_weight: 2, abort_weight: 0, qif_weight: 2 }
    }

    pub fn measurement_free(reg: &Registry) -> Self {
        ProgramGen { measure_weight: 0, ..Self::new(reg) }
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn dim(&self, names: &[String]) -> usize {
        names.iter().map(|n| self.reg.qvar(self.reg.qvar_id(n).expect("declared")).dim).product()
    }

    pub fn gate(&mut self, rng: &mut Rand, vars: &[String]) -> Program {
        let m = unitary(rng, self.dim(vars));
        Program::Unitary { gate: Gate { name: self.fresh("G"), matrix: m, builtin: false }, qvars: vars.to_vec() }
    }

    pub fn measure(&mut self, rng: &mut Rand, q: &str, branches: Vec<Program>) -> Program {
        let d = self.dim(&[q.to_string()]);
        let ops = measurement_ops(rng, d, branches.len());
        let labels: Vec<String> = (0..branches.len()).map(|k| k.to_string()).collect();
        let var = self.fresh("x");
        self.reg.use_cvar(&var, &labels).expect("fresh variable");
        Program::Measure {
            meas: Measurement { name: self.fresh("M"), outcomes: labels.iter().cloned().zip(ops).collect(), builtin: false },
            qvars: vec![q.to_string()],
            var,
            branches: labels.into_iter().zip(branches).collect(),
        }
    }

    /// Computational guards when `random_basis` is false, otherwise the
    /// columns of a random unitary.
    pub fn guards(&self, rng: &mut Rand, d: usize, random_basis: bool) -> Vec<Guard> {
        if random_basis {
            let u = unitary(rng, d);
            (0..d).map(|j| Guard::Vector(u.col(j))).collect()
        } else {
            (0..d).map(Guard::Basis).collect()
        }
    }

    /// A program whose quantum variables are drawn from `vars`.
    pub fn program(&mut self, rng: &mut Rand, vars: &[String], depth: usize) -> Program {
        let leaf = depth == 0;
        let mut choices: Vec<(u32, u8)> = vec![(3, 0), (1, 1)];
        if self.abort_weight > 0 {
            choices.push((self.abort_weight, 2));
        }
        if !leaf {
            choices.push((2, 3));
            choices.push((self.measure_weight, 4));
            if vars.len() >= 2 {
                choices.push((self.qif_weight, 5));
            }
        }
        let kind = choices.choose_weighted(rng, |c| c.0).expect("positive weights").1;
        match kind {
            0 => {
                let k = if vars.len() >= 2 && rng.gen_bool(0.4) { 2 } else { 1 };
                let mut pick: Vec<String> = vars.choose_multiple(rng, k).cloned().collect();
                pick.shuffle(rng);
                self.gate(rng, &pick)
            }
            1 => Program::Skip,
            2 => Program::Abort,
            3 => {
                let a = self.program(rng, vars, depth - 1);
                let b = self.program(rng, vars, depth - 1);
                Program::seq(a, b)
            }
            4 => {
                let q = vars.choose(rng).expect("nonempty").clone();
                let branches = (0..2).map(|_| self.program(rng, vars, depth - 1)).collect();
                self.measure(rng, &q, branches)
            }
            _ => {
                let coin = vars.choose(rng).expect("nonempty").clone();
                let rest: Vec<String> = vars.iter().filter(|v| **v != coin).cloned().collect();
                let d = self.dim(&[coin.clone()]);
                let random_basis = rng.gen_bool(0.3);
                let guards = self.guards(rng, d, random_basis);
                let branches = guards.into_iter().map(|g| QBranch { guard: g, body: self.program(rng, &rest, depth - 1) }).collect();
                Program::QIf { coin: vec![coin], alpha: None, branches }
            }
        }
    }
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_psd, TAU_EQ};
    use crate::syntax::check;

    #[test]
    fn unitaries_and_measurements() {
        let mut g = rng(1);
        for d in 1..5 {
            assert!(unitary(&mut g, d).is_unitary(1e-12));
            let ops = measurement_ops(&mut g, d, 3);
            let sum = ops.iter().fold(CMatrix::zeros(d, d), |a, m| a + m.adjoint() * m);
            assert!(sum.approx_eq(&CMatrix::identity(d), 1e-12));
            let rho = density(&mut g, d);
            assert!((rho.trace() - ONE).norm() < 1e-12 && is_psd(&rho, TAU_EQ).unwrap());
        }
    }

    #[test]
    fn seeded_reproducibility() {
        assert_eq!(unitary(&mut rng(7), 3), unitary(&mut rng(7), 3));
    }

    #[test]
    fn generated_programs_check() {
        let mut reg = Registry::new();
        for (n, d) in [("a", 2), ("b", 3), ("c", 2)] {
            reg.declare_qvar(n, d).unwrap();
        }
        let vars: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut g = rng(3);
        let mut gen = ProgramGen::new(&reg);
        for _ in 0..50 {
            let p = gen.program(&mut g, &vars, 3);
            assert!(check(gen.registry(), &p).is_empty(), "{:?}", check(gen.registry(), &p));
        }
    }
}
