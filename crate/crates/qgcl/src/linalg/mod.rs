//! Dense complex matrices and the handful of operations the evaluator needs.
//!
//! Tensor products put the left operand's indices in the more significant
//! position, so `kron(a, b)[(i*rb + k, j*cb + l)] = a[(i, j)] * b[(k, l)]`.

mod choi;
mod eigen;
mod io;

pub use choi::{choi_of, choi_residual, ChoiMatrix};
pub use eigen::{hermitian_eigen, is_psd, loewner_leq, min_eigenvalue};
pub use io::{format_complex, format_matrix, parse_complex, parse_matrix_text};

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use thiserror::Error;

pub type C64 = Complex64;

/// Semantic equality tolerance.
pub const TAU_EQ: f64 = 1e-10;
/// Regression tolerance for worked-example matrices.
pub const TAU_EXACT: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("matrix text: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::Dimension(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite(k / cols.max(1), k % cols.max(1)));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        CMatrix::new(n, m, rows.iter().flatten().copied().collect())
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        CMatrix { rows, cols, data: data.iter().map(|&x| r(x)).collect() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn scalar(z: C64) -> Self {
        CMatrix { rows: 1, cols: 1, data: vec![z] }
    }

    pub fn diag(d: &[C64]) -> Self {
        let n = d.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &z) in d.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    /// Column vector.
    pub fn column(v: &[C64]) -> Self {
        CMatrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = CMatrix::zeros(n, 1);
        v.data[k] = ONE;
        v
    }

    /// |v><w|
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        let mut m = CMatrix::zeros(v.len(), w.len());
        for (i, a) in v.iter().enumerate() {
            for (j, b) in w.iter().enumerate() {
                m.data[i * w.len() + j] = a * b.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        m
    }

    pub fn scale(&self, z: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * z).collect() }
    }

    pub fn try_mul(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &CMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// tr(A†A)
    pub fn hs_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-abs entrywise distance; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (self.adjoint() * self).approx_eq(&CMatrix::identity(self.rows), tol)
    }

    /// Sub-block copy.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = self.get(r0 + i, c0 + j);
            }
        }
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; use the try_ variants at API edges.
impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("matrix product shape")
    }
}

impl Mul<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

impl Mul<&CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        &self * rhs
    }
}

impl Mul<CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        self * &rhs
    }
}

impl Add<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum shape")
    }
}

impl Add<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        &self + &rhs
    }
}

impl Sub<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference shape")
    }
}

impl Sub<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        &self - &rhs
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(-ONE)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_matrix(self))
    }
}

impl fmt::Display for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_matrix(self))
    }
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![ZERO; rows * cols];
    for i in 0..a.rows {
        for j in 0..a.cols {
            let z = a.data[i * a.cols + j];
            if z == ZERO {
                continue;
            }
            for k in 0..b.rows {
                let base = (i * b.rows + k) * cols + j * b.cols;
                for l in 0..b.cols {
                    data[base + l] = z * b.data[k * b.cols + l];
                }
            }
        }
    }
    CMatrix { rows, cols, data }
}

pub fn kron_all<'a>(ms: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    ms.into_iter().fold(CMatrix::scalar(ONE), |acc, m| kron(&acc, m))
}

/// Mixed-radix digits of `index`, most significant first.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

pub fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Partial trace of a square matrix over the listed tensor factors.
pub fn partial_trace(m: &CMatrix, dims: &[usize], traced: &[usize]) -> Result<CMatrix> {
    let n: usize = dims.iter().product();
    if !m.is_square() || m.rows != n {
        return Err(LinalgError::Dimension(format!(
            "{}x{} matrix over factors {:?}",
            m.rows, m.cols, dims
        )));
    }
    if let Some(&t) = traced.iter().find(|&&t| t >= dims.len()) {
        return Err(LinalgError::Dimension(format!("no tensor factor {t}")));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let tr: Vec<usize> = (0..dims.len()).filter(|k| traced.contains(k)).collect();
    let kdims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let tdims: Vec<usize> = tr.iter().map(|&k| dims[k]).collect();
    let kn: usize = kdims.iter().product();
    let tn: usize = tdims.iter().product();
    let compose = |kd: &[usize], td: &[usize]| {
        let mut full = vec![0; dims.len()];
        for (p, &k) in kept.iter().enumerate() {
            full[k] = kd[p];
        }
        for (p, &k) in tr.iter().enumerate() {
            full[k] = td[p];
        }
        undigits(&full, dims)
    };
    let mut out = CMatrix::zeros(kn, kn);
    for a in 0..kn {
        let ad = digits(a, &kdims);
        for b in 0..kn {
            let bd = digits(b, &kdims);
            let mut s = ZERO;
            for t in 0..tn {
                let td = digits(t, &tdims);
                s += m.get(compose(&ad, &td), compose(&bd, &td));
            }
            out.data[a * kn + b] = s;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    #[test]
    fn rejects_wrong_entry_count_and_nan() {
        assert!(CMatrix::new(2, 2, vec![ONE; 3]).is_err());
        assert!(matches!(
            CMatrix::new(1, 2, vec![ONE, c(f64::NAN, 0.0)]),
            Err(LinalgError::NonFinite(0, 1))
        ));
    }

    #[test]
    fn identity_kron_identity() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
    }

    #[test]
    fn hadamard_kron_identity_has_block_form() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_real(2, 2, &[s, s, s, -s]);
        let m = kron(&h, &CMatrix::identity(2));
        let i2 = CMatrix::identity(2);
        assert!(m.block(0, 0, 2, 2).approx_eq(&i2.scale(r(s)), 0.0));
        assert!(m.block(0, 2, 2, 2).approx_eq(&i2.scale(r(s)), 0.0));
        assert!(m.block(2, 0, 2, 2).approx_eq(&i2.scale(r(s)), 0.0));
        assert!(m.block(2, 2, 2, 2).approx_eq(&i2.scale(r(-s)), 0.0));
    }

    #[test]
    fn x_kron_z_matches_elementwise_definition() {
        let (a, b) = (pauli_x(), pauli_z());
        let m = kron(&a, &b);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)], a[(i / 2, j / 2)] * b[(i % 2, j % 2)]);
            }
        }
    }

    #[test]
    fn product_and_adjoint() {
        let y = CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap();
        let xz = &pauli_x() * &pauli_z();
        // XZ = -iY
        assert!(xz.approx_eq(&y.scale(-I), 1e-15));
        assert_eq!(y.adjoint(), y);
        assert!(y.is_unitary(1e-15));
        assert!(CMatrix::identity(2).try_mul(&CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = CMatrix::from_real(2, 2, &[0.75, 0.25, 0.25, 0.25]);
        let sigma = CMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let pt = partial_trace(&kron(&rho, &sigma), &[2, 2], &[0]).unwrap();
        assert!(pt.approx_eq(&sigma, 1e-15));
        let pt = partial_trace(&kron(&rho, &sigma), &[2, 2], &[1]).unwrap();
        assert!(pt.approx_eq(&rho, 1e-15));
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [r(s), ZERO, ZERO, r(s)];
        let rho = CMatrix::outer(&psi, &psi);
        let pt = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(pt.approx_eq(&CMatrix::identity(2).scale(r(0.5)), 1e-15));
    }

    #[test]
    fn partial_trace_dimension_errors() {
        let m = CMatrix::identity(4);
        assert!(partial_trace(&m, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&m, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let dims = [2, 3, 4];
        for k in 0..24 {
            assert_eq!(undigits(&digits(k, &dims), &dims), k);
        }
        assert_eq!(digits(23, &dims), vec![1, 2, 3]);
    }
}
