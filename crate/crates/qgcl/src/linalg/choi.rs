//! Choi matrices, with the input index as the first tensor factor:
//! `J = Σ_ij |i><j| ⊗ E(|i><j|)`, so `J[(i,a),(j,b)] = Σ_K K[a,i]·conj(K[b,j])`.

use super::{CMatrix, LinalgError, Result, C64, ZERO};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn max_abs_diff(&self, other: &ChoiMatrix) -> f64 {
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out) {
            return f64::INFINITY;
        }
        self.matrix.max_abs_diff(&other.matrix)
    }
}

fn check_shapes(kraus: &[CMatrix], dim_in: usize, dim_out: usize) -> Result<()> {
    for k in kraus {
        if k.rows() != dim_out || k.cols() != dim_in {
            return Err(LinalgError::Dimension(format!(
                "Kraus operator is {}x{}, expected {}x{}",
                k.rows(),
                k.cols(),
                dim_out,
                dim_in
            )));
        }
    }
    Ok(())
}

pub fn choi_of(kraus: &[CMatrix], dim_in: usize, dim_out: usize) -> Result<ChoiMatrix> {
    check_shapes(kraus, dim_in, dim_out)?;
    let n = dim_in * dim_out;
    let mut j = CMatrix::zeros(n, n);
    for k in kraus {
        // vec(K)[(i,a)] = K[a,i]
        let v: Vec<C64> = (0..n).map(|x| k.get(x % dim_out, x / dim_out)).collect();
        for x in 0..n {
            if v[x] == ZERO {
                continue;
            }
            for y in 0..n {
                j[(x, y)] += v[x] * v[y].conj();
            }
        }
    }
    Ok(ChoiMatrix { dim_in, dim_out, matrix: j })
}

/// Max-abs entry of `J(a) - J(b)` without building either Choi matrix.
///
/// Only rows/columns where some Kraus operator has a nonzero entry can be
/// nonzero, so the comparison runs over that support. This keeps the
/// 256-dimensional walk channels cheap.
pub fn choi_residual(ka: &[CMatrix], kb: &[CMatrix], dim_in: usize, dim_out: usize) -> Result<f64> {
    check_shapes(ka, dim_in, dim_out)?;
    check_shapes(kb, dim_in, dim_out)?;
    let mut support: BTreeMap<usize, usize> = BTreeMap::new();
    for k in ka.iter().chain(kb) {
        for a in 0..dim_out {
            for i in 0..dim_in {
                if k.get(a, i) != ZERO {
                    support.insert(i * dim_out + a, 0);
                }
            }
        }
    }
    for (pos, slot) in support.values_mut().enumerate() {
        *slot = pos;
    }
    let s = support.len();
    let vecs = |ks: &[CMatrix]| -> Vec<Vec<C64>> {
        ks.iter()
            .map(|k| {
                let mut v = vec![ZERO; s];
                for (&x, &p) in &support {
                    v[p] = k.get(x % dim_out, x / dim_out);
                }
                v
            })
            .collect()
    };
    let (va, vb) = (vecs(ka), vecs(kb));
    let mut worst: f64 = 0.0;
    let mut row = vec![ZERO; s];
    for x in 0..s {
        row.iter_mut().for_each(|z| *z = ZERO);
        for v in &va {
            if v[x] != ZERO {
                for (y, z) in row.iter_mut().enumerate() {
                    *z += v[x] * v[y].conj();
                }
            }
        }
        for v in &vb {
            if v[x] != ZERO {
                for (y, z) in row.iter_mut().enumerate() {
                    *z -= v[x] * v[y].conj();
                }
            }
        }
        worst = row.iter().map(|z| z.norm()).fold(worst, f64::max);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{r, I, ONE};

    #[test]
    fn identity_channel_choi_is_unnormalized_bell_projector() {
        let j = choi_of(&[CMatrix::identity(2)], 2, 2).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        for &x in &[0usize, 3] {
            for &y in &[0usize, 3] {
                expected[(x, y)] = ONE;
            }
        }
        assert_eq!(j.matrix, expected);
    }

    #[test]
    fn global_phase_cancels() {
        let u = CMatrix::from_rows(&[vec![r(0.6), r(0.8) * I], vec![r(0.8) * I, r(0.6)]]).unwrap();
        let phase = C64::from_polar(1.0, 0.7);
        let a = choi_of(&[u.clone()], 2, 2).unwrap();
        let b = choi_of(&[u.scale(phase)], 2, 2).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
        assert!(choi_residual(&[u.clone()], &[u.scale(phase)], 2, 2).unwrap() < 1e-15);
    }

    #[test]
    fn empty_list_is_zero() {
        let j = choi_of(&[], 2, 3).unwrap();
        assert_eq!(j.matrix, CMatrix::zeros(6, 6));
    }

    #[test]
    fn residual_matches_materialized_difference() {
        let a = CMatrix::from_rows(&[vec![r(1.0), I], vec![ZERO, r(0.5)], vec![r(0.25), ZERO]]).unwrap();
        let b = CMatrix::from_rows(&[vec![ZERO, r(0.5)], vec![I, ZERO], vec![ZERO, ZERO]]).unwrap();
        let ja = choi_of(&[a.clone(), b.clone()], 2, 3).unwrap();
        let jb = choi_of(&[a.clone()], 2, 3).unwrap();
        let res = choi_residual(&[a.clone(), b.clone()], &[a], 2, 3).unwrap();
        assert!((res - ja.max_abs_diff(&jb)).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_error() {
        assert!(choi_of(&[CMatrix::identity(3)], 2, 2).is_err());
    }
}
