//! Pretty-printer producing text that parses back to the same tree.

use super::ast::*;
use crate::linalg::{CMatrix, C64};
use crate::registry::Registry;
use std::collections::BTreeMap;

/// Scalar in source syntax; exact under re-parsing.
pub fn scalar(z: C64) -> String {
    match (z.re, z.im) {
        (re, im) if im == 0.0 => format!("{re}"),
        (re, im) if re == 0.0 => format!("{im}i"),
        (re, im) if im < 0.0 => format!("{re}-{}i", -im),
        (re, im) => format!("{re}+{im}i"),
    }
}

pub fn matrix(m: &CMatrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| format!("[{}]", (0..m.cols()).map(|j| scalar(m.get(i, j))).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn guard(g: &Guard) -> String {
    match g {
        Guard::Basis(k) => format!("|{k}>"),
        Guard::Vector(v) => format!("|({})>", v.iter().map(|z| scalar(*z)).collect::<Vec<_>>().join(", ")),
    }
}

fn alpha(a: &Option<AlphaSpec>) -> String {
    match a {
        None => String::new(),
        Some(AlphaSpec::Lambda) => " (lambda)".into(),
        Some(AlphaSpec::Uniform) => " (uniform)".into(),
        Some(AlphaSpec::Phase(th)) => {
            format!(" (phase {})", th.iter().map(|t| format!("{t}")).collect::<Vec<_>>().join(", "))
        }
        Some(AlphaSpec::Explicit(es)) => {
            let parts: Vec<String> = es
                .iter()
                .map(|e| {
                    let others = if e.others.is_empty() {
                        "[]".to_string()
                    } else {
                        format!("[{}]", e.others.iter().map(|o| format!("\"{o}\"")).collect::<Vec<_>>().join(", "))
                    };
                    format!("{} {} = {}", e.branch, others, scalar(e.value))
                })
                .collect();
            format!(" (alpha {})", parts.join("; "))
        }
    }
}

fn qbranches(bs: &[QBranch]) -> String {
    bs.iter()
        .enumerate()
        .map(|(k, b)| format!("{}{} -> {}", if k == 0 { "" } else { " [] " }, guard(&b.guard), print_program(&b.body)))
        .collect()
}

pub fn print_program(p: &Program) -> String {
    match p {
        Program::Abort => "abort".into(),
        Program::Skip => "skip".into(),
        Program::Unitary { gate, qvars } => format!("{}[{}]", gate.name, qvars.join(", ")),
        Program::Measure { meas, qvars, var, branches } => {
            let bs: String = branches
                .iter()
                .enumerate()
                .map(|(k, (l, b))| format!(" {} {l} -> {}", if k == 0 { "=" } else { "[]" }, print_program(b)))
                .collect();
            format!("measure {}[{} : {var}]{bs} end", meas.name, qvars.join(", "))
        }
        Program::QIf { coin, alpha: a, branches } => {
            format!("qif{} [{}] {} fiq", alpha(a), coin.join(", "), qbranches(branches))
        }
        Program::Seq(a, b) => {
            let left = print_program(a);
            let left = if matches!(**a, Program::Seq(..)) { format!("({left})") } else { left };
            format!("{left}; {}", print_program(b))
        }
        Program::Block { locals, init, body } => {
            let st = match init {
                BlockState::Ket(k) => format!("|{k}>"),
                BlockState::Matrix(m) => matrix(m),
            };
            format!("begin local {} := {st}; {} end", locals.join(", "), print_program(body))
        }
        Program::ProbChoice(bs) => {
            let parts: Vec<String> = bs.iter().map(|(q, w)| format!("{} @ {w}", print_program(q))).collect();
            format!("pchoice {} end", parts.join(" [] "))
        }
        Program::QChoice { coin, alpha: a, branches } => {
            format!("[{}] (+){} {} end", print_program(coin), alpha(a), qbranches(branches))
        }
        Program::SubspaceQIf { coin, branches } => {
            let bs: String = branches
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    format!(
                        "{}{{{}}} -> {}",
                        if k == 0 { "" } else { " [] " },
                        b.basis.iter().map(guard).collect::<Vec<_>>().join(", "),
                        print_program(&b.body)
                    )
                })
                .collect();
            format!("qif [{}] {bs} fiq", coin.join(", "))
        }
    }
}

fn collect_decls(p: &Program, gates: &mut BTreeMap<String, CMatrix>, meas: &mut BTreeMap<String, Vec<(String, CMatrix)>>) {
    let mut rec = |q: &Program| collect_decls(q, gates, meas);
    match p {
        Program::Abort | Program::Skip => {}
        Program::Unitary { gate, .. } => {
            if !gate.builtin {
                gates.insert(gate.name.clone(), gate.matrix.clone());
            }
        }
        Program::Measure { meas: m, branches, .. } => {
            for (_, b) in branches {
                rec(b);
            }
            if !m.builtin {
                meas.insert(m.name.clone(), m.outcomes.clone());
            }
        }
        Program::QIf { branches, .. } => branches.iter().for_each(|b| rec(&b.body)),
        Program::QChoice { coin, branches, .. } => {
            rec(coin);
            branches.iter().for_each(|b| rec(&b.body));
        }
        Program::Seq(a, b) => {
            rec(a);
            rec(b);
        }
        Program::Block { body, .. } => rec(body),
        Program::ProbChoice(bs) => bs.iter().for_each(|(q, _)| rec(q)),
        Program::SubspaceQIf { branches, .. } => branches.iter().for_each(|b| rec(&b.body)),
    }
}

/// Declarations for every registry variable and custom operator, then the program.
pub fn print_file(reg: &Registry, p: &Program) -> String {
    let mut out = String::new();
    for q in reg.qvars() {
        out.push_str(&format!("qvar {} : {};\n", q.name, q.dim));
    }
    for c in reg.cvars().iter().filter(|c| c.declared) {
        out.push_str(&format!("cvar {} : {{{}}};\n", c.name, c.domain.join(", ")));
    }
    let (mut gates, mut meas) = (BTreeMap::new(), BTreeMap::new());
    collect_decls(p, &mut gates, &mut meas);
    for (name, m) in &gates {
        out.push_str(&format!("gate {name} = {};\n", matrix(m)));
    }
    for (name, ops) in &meas {
        let parts: Vec<String> = ops.iter().map(|(l, m)| format!("{l}: {}", matrix(m))).collect();
        out.push_str(&format!("meas {name} = {{{}}};\n", parts.join(", ")));
    }
    out.push_str(&print_program(p));
    out.push('\n');
    out
}
