//! Built-in gates and measurements.

use crate::linalg::{r, CMatrix, C64, I, ONE, ZERO};
use std::f64::consts::FRAC_1_SQRT_2;

/// Builtins whose dimension is taken from the target variables.
pub const SIZED_GATES: &[&str] = &["I", "TL", "TR", "GROVER"];
pub const FIXED_GATES: &[&str] = &["X", "Y", "Z", "H", "S", "T", "CNOT", "SWAP"];
pub const PARAM_GATES: &[&str] = &["PHASE", "PERM"];
pub const MEASUREMENTS: &[&str] = &["MZ", "MX"];

pub fn is_builtin_gate(name: &str) -> bool {
    SIZED_GATES.contains(&base_name(name)) || FIXED_GATES.contains(&name) || PARAM_GATES.contains(&name)
}

// "TL_8" -> "TL"
fn base_name(name: &str) -> &str {
    match name.split_once('_') {
        Some((b, n)) if SIZED_GATES.contains(&b) && n.parse::<usize>().is_ok() => b,
        _ => name,
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap()
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn hadamard() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    CMatrix::from_real(2, 2, &[s, s, s, -s])
}

pub fn phase_s() -> CMatrix {
    CMatrix::diag(&[ONE, I])
}

pub fn phase(theta: f64) -> CMatrix {
    CMatrix::diag(&[ONE, C64::from_polar(1.0, theta)])
}

pub fn cnot() -> CMatrix {
    permutation(&[0, 1, 3, 2])
}

pub fn swap() -> CMatrix {
    permutation(&[0, 2, 1, 3])
}

/// U|i> = |perm[i]>
pub fn permutation(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        m[(j, i)] = ONE;
    }
    m
}

/// T_L|n> = |n-1 mod N>
pub fn shift_left(n: usize) -> CMatrix {
    permutation(&(0..n).map(|k| (k + n - 1) % n).collect::<Vec<_>>())
}

/// T_R|n> = |n+1 mod N>
pub fn shift_right(n: usize) -> CMatrix {
    permutation(&(0..n).map(|k| (k + 1) % n).collect::<Vec<_>>())
}

/// 2|s><s| - I for the uniform superposition |s>; the symmetric three-state coin at d=3.
pub fn grover(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = r(2.0 / d as f64 - if i == j { 1.0 } else { 0.0 });
        }
    }
    m
}

pub fn projector(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = ONE;
    m
}

/// Computational-basis measurement with outcomes 0..d-1.
pub fn mz(d: usize) -> Vec<(String, CMatrix)> {
    (0..d).map(|k| (k.to_string(), projector(d, k))).collect()
}

/// Hadamard-basis measurement with outcomes + and -.
pub fn mx() -> Vec<(String, CMatrix)> {
    let s = FRAC_1_SQRT_2;
    let plus = [r(s), r(s)];
    let minus = [r(s), r(-s)];
    vec![("+".into(), CMatrix::outer(&plus, &plus)), ("-".into(), CMatrix::outer(&minus, &minus))]
}

/// Resolves a builtin gate for a target of dimension `dim`.
pub fn builtin_gate(name: &str, params: &[f64], dim: usize) -> Result<CMatrix, String> {
    let need = |d: usize| if dim == d { Ok(()) } else { Err(format!("{name} acts on dimension {d}, target has dimension {dim}")) };
    let base = base_name(name);
    if base != name {
        let n: usize = name[base.len() + 1..].parse().unwrap();
        need(n)?;
    }
    if !PARAM_GATES.contains(&base) && !params.is_empty() {
        return Err(format!("{name} takes no parameters"));
    }
    let m = match base {
        "I" => CMatrix::identity(dim),
        "TL" => shift_left(dim),
        "TR" => shift_right(dim),
        "GROVER" => grover(dim),
        "X" => need(2).map(|_| pauli_x())?,
        "Y" => need(2).map(|_| pauli_y())?,
        "Z" => need(2).map(|_| pauli_z())?,
        "H" => need(2).map(|_| hadamard())?,
        "S" => need(2).map(|_| phase_s())?,
        "T" => need(2).map(|_| phase(std::f64::consts::FRAC_PI_4))?,
        "CNOT" => need(4).map(|_| cnot())?,
        "SWAP" => need(4).map(|_| swap())?,
        "PHASE" => {
            need(2)?;
            match params {
                [theta] => phase(*theta),
                _ => return Err("PHASE takes one angle".into()),
            }
        }
        "PERM" => {
            let perm: Vec<usize> = params
                .iter()
                .map(|&p| if p >= 0.0 && p.fract() == 0.0 { Ok(p as usize) } else { Err(format!("PERM entry {p} is not an index")) })
                .collect::<Result<_, _>>()?;
            need(perm.len())?;
            let mut seen = vec![false; perm.len()];
            for &p in &perm {
                if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                    return Err(format!("PERM{perm:?} is not a permutation"));
                }
            }
            permutation(&perm)
        }
        _ => return Err(format!("unknown gate '{name}'")),
    };
    Ok(m)
}

pub fn builtin_measurement(name: &str, dim: usize) -> Result<Vec<(String, CMatrix)>, String> {
    match name {
        "MZ" => Ok(mz(dim)),
        "MX" if dim == 2 => Ok(mx()),
        "MX" => Err(format!("MX acts on dimension 2, target has dimension {dim}")),
        _ => Err(format!("unknown measurement '{name}'")),
    }
}
