//! Cyclic Jacobi eigensolver for Hermitian matrices.

use super::{CMatrix, LinalgError, Result, C64, ZERO};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and a unitary whose columns are the eigenvectors.
///
/// Only the Hermitian part `(m + m†)/2` is diagonalized; callers check
/// Hermiticity first if they care.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    let n = m.rows();
    let mut a = (m + &m.adjoint()).scale(C64::new(0.5, 0.0));
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for row in 0..n {
            vecs[(row, k)] = v[(row, i)];
        }
    }
    Ok((values, vecs))
}

// One complex Jacobi rotation zeroing a[p][q]. The (p,q) plane is first
// rephased so the pivot is real, then rotated as in the real symmetric case.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r; // e^{i phi}
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    // G restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    let ph = phase.conj();
    let g = [[C64::new(cs, 0.0), C64::new(sn, 0.0)], [ph * -sn, ph * cs]];
    let n = a.rows();
    // A <- A G
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * g[0][0] + akq * g[1][0];
        a[(k, q)] = akp * g[0][1] + akq * g[1][1];
    }
    // A <- G† A
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = g[0][0].conj() * apk + g[1][0].conj() * aqk;
        a[(q, k)] = g[0][1].conj() * apk + g[1][1].conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * g[0][0] + vkq * g[1][0];
        v[(k, q)] = vkp * g[0][1] + vkq * g[1][1];
    }
}

fn require_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    let dev = m.max_abs_diff(&m.adjoint());
    if dev > tol.max(1e-12) {
        return Err(LinalgError::Shape(format!("not Hermitian (deviation {dev:.3e})")));
    }
    Ok(())
}

pub fn min_eigenvalue(m: &CMatrix, tol: f64) -> Result<f64> {
    require_hermitian(m, tol)?;
    if m.rows() == 0 {
        return Ok(0.0);
    }
    Ok(hermitian_eigen(m)?.0[0])
}

pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    Ok(m.rows() == 0 || min_eigenvalue(m, tol)? >= -tol)
}

/// a ⊑ b in the Löwner order.
pub fn loewner_leq(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<bool> {
    require_hermitian(a, tol)?;
    require_hermitian(b, tol)?;
    is_psd(&b.try_sub(a)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r, I};

    #[test]
    fn diagonalizes_pauli_y() {
        let y = CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap();
        let (vals, vecs) = hermitian_eigen(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let d = vecs.adjoint() * &y * &vecs;
        assert!(d.approx_eq(&CMatrix::diag(&[r(-1.0), r(1.0)]), 1e-14));
    }

    #[test]
    fn reconstructs_dense_hermitian() {
        let m = CMatrix::from_rows(&[
            vec![r(2.0), c(1.0, 1.0), c(0.0, -0.5)],
            vec![c(1.0, -1.0), r(-1.0), c(0.25, 0.0)],
            vec![c(0.0, 0.5), c(0.25, 0.0), r(0.5)],
        ])
        .unwrap();
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        let d = CMatrix::diag(&vals.iter().map(|&x| r(x)).collect::<Vec<_>>());
        assert!((&vecs * &d * vecs.adjoint()).approx_eq(&m, 1e-13));
        assert!(vecs.is_unitary(1e-13));
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn loewner_examples() {
        let i2 = CMatrix::identity(2);
        assert!(loewner_leq(&CMatrix::zeros(2, 2), &i2, 1e-12).unwrap());
        assert!(!loewner_leq(&i2, &CMatrix::diag(&[r(1.0), r(0.5)]), 1e-12).unwrap());
        let p0 = CMatrix::diag(&[r(1.0), r(0.0)]);
        let p1 = CMatrix::diag(&[r(0.0), r(1.0)]);
        let sum = p0.adjoint() * &p0 + p1.adjoint() * &p1;
        assert!(loewner_leq(&sum, &i2, 1e-12).unwrap());
        assert!(loewner_leq(&i2, &sum, 1e-12).unwrap());
    }

    #[test]
    fn non_hermitian_is_shape_error() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(is_psd(&m, 1e-12), Err(LinalgError::Shape(_))));
    }
}
