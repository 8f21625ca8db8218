//! Recursive-descent parser for program files.
//!
//! A file is a header of declarations followed by one program:
//!
//! ```text
//! qvar c, q : 2;
//! cvar x : {0, 1};
//! gate G = (1/sqrt(2)) * [[1, 1], [1, -1]];
//! meas M = {up: [[1, 0], [0, 0]], down: [[0, 0], [0, 1]]};
//! qif [c] |0> -> G[q] [] |1> -> measure M[q : x] = up -> skip [] down -> X[q] end fiq
//! ```

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::library;
use super::ParseError;
use crate::linalg::{CMatrix, C64, I, ONE};
use crate::registry::Registry;
use std::collections::BTreeMap;

const KEYWORDS: &[&str] =
    &["abort", "skip", "measure", "end", "qif", "fiq", "begin", "local", "pchoice", "qvar", "cvar", "gate", "meas"];

#[derive(Clone, Debug)]
pub struct ParsedFile {
    pub registry: Registry,
    pub program: Program,
}

pub fn parse(src: &str) -> Result<ParsedFile, ParseError> {
    parse_with(src, Registry::new())
}

/// Parses against an existing registry; redeclarations must agree with it.
pub fn parse_with(src: &str, base: Registry) -> Result<ParsedFile, ParseError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, reg: base, gates: BTreeMap::new(), meas: BTreeMap::new() };
    p.header()?;
    let program = p.prog()?;
    p.expect_eof()?;
    Ok(ParsedFile { registry: p.reg, program })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    reg: Registry,
    gates: BTreeMap<String, CMatrix>,
    meas: BTreeMap<String, Vec<(String, CMatrix)>>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = self.here();
        Err(ParseError::new(t.line, t.col, msg))
    }

    fn err_at<T>(&self, at: &Token, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::new(at.line, at.col, msg))
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{k}', found {}", describe(self.peek())))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => self.err(format!("unexpected {} after program", describe(t))),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn usize_lit(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Num(v, _) if v >= 0.0 && v.fract() == 0.0 => {
                self.bump();
                Ok(v as usize)
            }
            t => self.err(format!("expected a non-negative integer, found {}", describe(&t))),
        }
    }

    fn label(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Num(_, text) => {
                self.bump();
                Ok(text)
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::Sym(s @ ("+" | "-")) => {
                self.bump();
                Ok(s.to_string())
            }
            t => self.err(format!("expected an outcome label, found {}", describe(&t))),
        }
    }

    // ---- declarations ----

    fn header(&mut self) -> PResult<()> {
        loop {
            let at = self.here().clone();
            if self.is_kw("qvar") {
                self.bump();
                let mut names = vec![self.ident()?];
                while self.eat_sym(",") {
                    names.push(self.ident()?);
                }
                self.expect_sym(":")?;
                let dim = self.usize_lit()?;
                self.expect_sym(";")?;
                for n in names {
                    if self.gates.contains_key(&n) {
                        return self.err_at(&at, format!("'{n}' is already a gate"));
                    }
                    if let Err(e) = self.reg.declare_qvar(&n, dim) {
                        return self.err_at(&at, e.to_string());
                    }
                }
            } else if self.is_kw("cvar") {
                self.bump();
                let name = self.ident()?;
                self.expect_sym(":")?;
                self.expect_sym("{")?;
                let mut labels = vec![self.label()?];
                while self.eat_sym(",") {
                    labels.push(self.label()?);
                }
                self.expect_sym("}")?;
                self.expect_sym(";")?;
                if let Err(e) = self.reg.declare_cvar(&name, &labels) {
                    return self.err_at(&at, e.to_string());
                }
            } else if self.is_kw("gate") {
                self.bump();
                let name = self.ident()?;
                if library::is_builtin_gate(&name) || self.gates.contains_key(&name) {
                    return self.err_at(&at, format!("gate '{name}' is already defined"));
                }
                self.expect_sym("=")?;
                let m = self.matrix()?;
                self.expect_sym(";")?;
                self.gates.insert(name, m);
            } else if self.is_kw("meas") {
                self.bump();
                let name = self.ident()?;
                if library::MEASUREMENTS.contains(&name.as_str()) || self.meas.contains_key(&name) {
                    return self.err_at(&at, format!("measurement '{name}' is already defined"));
                }
                self.expect_sym("=")?;
                self.expect_sym("{")?;
                let mut outcomes = Vec::new();
                loop {
                    let l = self.label()?;
                    self.expect_sym(":")?;
                    let m = self.matrix()?;
                    if outcomes.iter().any(|(k, _): &(String, CMatrix)| *k == l) {
                        return self.err_at(&at, format!("outcome '{l}' listed twice"));
                    }
                    outcomes.push((l, m));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                self.expect_sym(";")?;
                let d = outcomes[0].1.rows();
                if outcomes.iter().any(|(_, m)| m.rows() != d || m.cols() != d) {
                    return self.err_at(&at, "measurement operators must be square and of equal size");
                }
                self.meas.insert(name, outcomes);
            } else {
                return Ok(());
            }
        }
    }

    // ---- scalars and matrices ----

    fn expr(&mut self) -> PResult<C64> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym("+") {
                v += self.term()?;
            } else if self.eat_sym("-") {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> PResult<C64> {
        let mut v = self.unary()?;
        loop {
            // `s * [[...]]` scales a matrix literal; leave the '*' for the caller
            if self.is_sym("*") && !matches!(self.peek_at(1), Tok::Sym("[")) {
                self.bump();
                v *= self.unary()?;
            } else if self.eat_sym("/") {
                let at = self.here().clone();
                let d = self.unary()?;
                if d.norm() == 0.0 {
                    return self.err_at(&at, "division by zero");
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> PResult<C64> {
        if self.eat_sym("-") {
            return Ok(-self.unary()?);
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<C64> {
        match self.peek().clone() {
            Tok::Num(v, _) => {
                self.bump();
                Ok(C64::new(v, 0.0))
            }
            Tok::Imag(v) => {
                self.bump();
                Ok(C64::new(0.0, v))
            }
            Tok::Sym("(") => {
                self.bump();
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "i" => Ok(I),
                    "pi" => Ok(C64::new(std::f64::consts::PI, 0.0)),
                    "sqrt" | "exp" | "cos" | "sin" => {
                        self.expect_sym("(")?;
                        let a = self.expr()?;
                        self.expect_sym(")")?;
                        Ok(match name.as_str() {
                            "sqrt" => a.sqrt(),
                            "exp" => a.exp(),
                            "cos" => a.cos(),
                            _ => a.sin(),
                        })
                    }
                    _ => self.err(format!("unknown constant or function '{name}'")),
                }
            }
            t => self.err(format!("expected a number, found {}", describe(&t))),
        }
    }

    fn real(&mut self) -> PResult<f64> {
        let at = self.here().clone();
        let v = self.expr()?;
        if v.im != 0.0 {
            return self.err_at(&at, "expected a real number");
        }
        Ok(v.re)
    }

    fn matrix(&mut self) -> PResult<CMatrix> {
        let at = self.here().clone();
        let scale = if self.is_sym("[") { ONE } else { self.expr()? };
        if !self.is_sym("[") {
            self.expect_sym("*")?;
        }
        self.expect_sym("[")?;
        let mut rows = Vec::new();
        loop {
            self.expect_sym("[")?;
            let mut row = vec![self.expr()? * scale];
            while self.eat_sym(",") {
                row.push(self.expr()? * scale);
            }
            self.expect_sym("]")?;
            rows.push(row);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        CMatrix::from_rows(&rows).or_else(|e| self.err_at(&at, e.to_string()))
    }

    // ---- programs ----

    fn prog(&mut self) -> PResult<Program> {
        let mut stmts = vec![self.stmt()?];
        while self.eat_sym(";") {
            stmts.push(self.stmt()?);
        }
        Ok(Program::seq_all(stmts))
    }

    fn qvars(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        loop {
            let at = self.here().clone();
            let n = self.ident()?;
            if self.reg.qvar_id(&n).is_none() {
                return self.err_at(&at, format!("undeclared quantum variable '{n}'"));
            }
            out.push(n);
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    fn dim_of(&self, names: &[String]) -> usize {
        names.iter().map(|n| self.reg.qvar(self.reg.qvar_id(n).unwrap()).dim).product()
    }

    fn stmt(&mut self) -> PResult<Program> {
        let at = self.here().clone();
        match self.peek().clone() {
            Tok::Ident(k) if k == "abort" => {
                self.bump();
                Ok(Program::Abort)
            }
            Tok::Ident(k) if k == "skip" => {
                self.bump();
                Ok(Program::Skip)
            }
            Tok::Ident(k) if k == "measure" => self.measure(),
            Tok::Ident(k) if k == "qif" => self.qif(),
            Tok::Ident(k) if k == "begin" => self.block(),
            Tok::Ident(k) if k == "pchoice" => self.pchoice(),
            Tok::Sym("[") => self.qchoice(),
            Tok::Sym("(") => {
                self.bump();
                let p = self.prog()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::Ident(k) if !KEYWORDS.contains(&k.as_str()) => self.gate_app(),
            t => self.err_at(&at, format!("expected a statement, found {}", describe(&t))),
        }
    }

    fn gate_app(&mut self) -> PResult<Program> {
        let at = self.here().clone();
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat_sym("(") {
            params.push(self.real()?);
            while self.eat_sym(",") {
                params.push(self.real()?);
            }
            self.expect_sym(")")?;
        }
        self.expect_sym("[")?;
        let qvars = self.qvars()?;
        self.expect_sym("]")?;
        let dim = self.dim_of(&qvars);
        let (full_name, matrix, builtin) = if let Some(m) = self.gates.get(&name) {
            if !params.is_empty() {
                return self.err_at(&at, format!("gate '{name}' takes no parameters"));
            }
            if m.rows() != dim {
                return self.err_at(&at, format!("gate '{name}' has dimension {}, target has dimension {dim}", m.rows()));
            }
            (name, m.clone(), false)
        } else {
            let m = library::builtin_gate(&name, &params, dim).or_else(|e| self.err_at(&at, e))?;
            let full = if params.is_empty() {
                name
            } else {
                format!("{name}({})", params.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(", "))
            };
            (full, m, true)
        };
        Ok(Program::Unitary { gate: Gate { name: full_name, matrix, builtin }, qvars })
    }

    fn measure(&mut self) -> PResult<Program> {
        self.expect_kw("measure")?;
        let at = self.here().clone();
        let name = self.ident()?;
        self.expect_sym("[")?;
        let qvars = self.qvars()?;
        self.expect_sym(":")?;
        let var_at = self.here().clone();
        let var = self.ident()?;
        self.expect_sym("]")?;
        let dim = self.dim_of(&qvars);
        let (outcomes, builtin) = match self.meas.get(&name) {
            Some(o) => {
                if o[0].1.rows() != dim {
                    return self.err_at(&at, format!("measurement '{name}' has dimension {}, target has dimension {dim}", o[0].1.rows()));
                }
                (o.clone(), false)
            }
            None => (library::builtin_measurement(&name, dim).or_else(|e| self.err_at(&at, e))?, true),
        };
        if self.reg.qvar_id(&var).is_some() {
            return self.err_at(&var_at, format!("'{var}' is a quantum variable"));
        }
        let labels: Vec<String> = outcomes.iter().map(|(l, _)| l.clone()).collect();
        if !self.reg.cvar(&var).is_some_and(|c| c.declared) {
            self.reg.use_cvar(&var, &labels).or_else(|e| self.err_at(&var_at, e.to_string()))?;
        }
        let mut written: Vec<(String, Program)> = Vec::new();
        while self.is_sym("=") || self.is_sym("[]") {
            self.bump();
            let lat = self.here().clone();
            let l = self.label()?;
            if !labels.contains(&l) {
                return self.err_at(&lat, format!("'{l}' is not an outcome of {name}"));
            }
            if written.iter().any(|(k, _)| *k == l) {
                return self.err_at(&lat, format!("outcome '{l}' has two branches"));
            }
            self.expect_sym("->")?;
            written.push((l, self.prog()?));
        }
        self.expect_kw("end")?;
        let mut branches = Vec::new();
        for l in &labels {
            match written.iter().position(|(k, _)| k == l) {
                Some(k) => branches.push(written.swap_remove(k)),
                None => return self.err_at(&at, format!("no branch for outcome '{l}' of {name}")),
            }
        }
        Ok(Program::Measure { meas: Measurement { name, outcomes, builtin }, qvars, var, branches })
    }

    fn alpha(&mut self) -> PResult<Option<AlphaSpec>> {
        if !self.is_sym("(") {
            return Ok(None);
        }
        self.bump();
        let at = self.here().clone();
        let kind = match self.peek().clone() {
            Tok::Ident(k) => k,
            t => return self.err(format!("expected a coefficient family, found {}", describe(&t))),
        };
        self.bump();
        let spec = match kind.as_str() {
            "lambda" => AlphaSpec::Lambda,
            "uniform" => AlphaSpec::Uniform,
            "phase" => {
                let mut th = vec![self.real()?];
                while self.eat_sym(",") {
                    th.push(self.real()?);
                }
                AlphaSpec::Phase(th)
            }
            "alpha" => {
                let mut entries = Vec::new();
                loop {
                    let branch = self.usize_lit()?;
                    let mut others = Vec::new();
                    if !self.eat_sym("[]") {
                        self.expect_sym("[")?;
                        loop {
                            match self.peek().clone() {
                                Tok::Str(s) => {
                                    self.bump();
                                    others.push(s);
                                }
                                t => return self.err(format!("expected a quoted state label, found {}", describe(&t))),
                            }
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                        self.expect_sym("]")?;
                    }
                    self.expect_sym("=")?;
                    let value = self.expr()?;
                    entries.push(AlphaEntry { branch, others, value });
                    if !self.eat_sym(";") {
                        break;
                    }
                }
                AlphaSpec::Explicit(entries)
            }
            _ => return self.err_at(&at, format!("unknown coefficient family '{kind}'")),
        };
        self.expect_sym(")")?;
        Ok(Some(spec))
    }

    fn guard(&mut self, dim: usize) -> PResult<Guard> {
        let at = self.here().clone();
        self.expect_sym("|")?;
        let g = if self.eat_sym("(") {
            let mut v = vec![self.expr()?];
            while self.eat_sym(",") {
                v.push(self.expr()?);
            }
            self.expect_sym(")")?;
            if v.len() != dim {
                return self.err_at(&at, format!("guard has {} components, coin has dimension {dim}", v.len()));
            }
            Guard::Vector(v)
        } else {
            let k = self.usize_lit()?;
            if k >= dim {
                return self.err_at(&at, format!("basis state |{k}> outside a coin of dimension {dim}"));
            }
            Guard::Basis(k)
        };
        self.expect_sym(">")?;
        Ok(g)
    }

    /// Branches up to (not including) the closing keyword. Returns ordinary
    /// branches, or subspace branches when any guard is a `{...}` set.
    fn qbranches(&mut self, dim: usize, close: &str) -> PResult<Result<Vec<QBranch>, Vec<SubspaceBranch>>> {
        let mut plain = Vec::new();
        let mut sub = Vec::new();
        let mut first = true;
        while !self.is_kw(close) {
            if !first || self.is_sym("[]") {
                self.expect_sym("[]")?;
            }
            first = false;
            if self.eat_sym("{") {
                let mut basis = vec![self.guard(dim)?];
                while self.eat_sym(",") {
                    basis.push(self.guard(dim)?);
                }
                self.expect_sym("}")?;
                self.expect_sym("->")?;
                sub.push(SubspaceBranch { basis, body: self.prog()? });
            } else {
                let guard = self.guard(dim)?;
                self.expect_sym("->")?;
                let body = self.prog()?;
                sub.push(SubspaceBranch { basis: vec![guard.clone()], body: body.clone() });
                plain.push(QBranch { guard, body });
            }
        }
        if plain.len() == sub.len() {
            Ok(Ok(plain))
        } else {
            Ok(Err(sub))
        }
    }

    fn qif(&mut self) -> PResult<Program> {
        let at = self.here().clone();
        self.expect_kw("qif")?;
        let alpha = self.alpha()?;
        self.expect_sym("[")?;
        let coin = self.qvars()?;
        self.expect_sym("]")?;
        let dim = self.dim_of(&coin);
        let branches = self.qbranches(dim, "fiq")?;
        self.expect_kw("fiq")?;
        match branches {
            Ok(branches) => {
                if branches.len() != dim {
                    return self.err_at(&at, format!("{} guards for a coin of dimension {dim}", branches.len()));
                }
                Ok(Program::QIf { coin, alpha, branches })
            }
            Err(branches) => {
                if alpha.is_some() {
                    return self.err_at(&at, "subspace-guarded alternation takes no coefficient family");
                }
                let total: usize = branches.iter().map(|b| b.basis.len()).sum();
                if total != dim {
                    return self.err_at(&at, format!("{total} basis vectors for a coin of dimension {dim}"));
                }
                Ok(Program::SubspaceQIf { coin, branches })
            }
        }
    }

    fn qchoice(&mut self) -> PResult<Program> {
        let at = self.here().clone();
        self.expect_sym("[")?;
        let coin = self.prog()?;
        self.expect_sym("]")?;
        self.expect_sym("(+)")?;
        let alpha = self.alpha()?;
        let coin_names = coin.qvar();
        let dim: usize = coin_names.iter().map(|n| self.reg.qvar(self.reg.qvar_id(n).unwrap()).dim).product();
        let branches = match self.qbranches(dim, "end")? {
            Ok(b) => b,
            Err(_) => return self.err_at(&at, "quantum choice takes one guard per branch"),
        };
        self.expect_kw("end")?;
        if branches.len() != dim {
            return self.err_at(&at, format!("{} guards for a coin of dimension {dim}", branches.len()));
        }
        Ok(Program::QChoice { coin: Box::new(coin), alpha, branches })
    }

    fn block(&mut self) -> PResult<Program> {
        self.expect_kw("begin")?;
        self.expect_kw("local")?;
        let locals = self.qvars()?;
        self.expect_sym(":=")?;
        let at = self.here().clone();
        let dim = self.dim_of(&locals);
        let init = if self.eat_sym("|") {
            let k = self.usize_lit()?;
            self.expect_sym(">")?;
            if k >= dim {
                return self.err_at(&at, format!("basis state |{k}> outside dimension {dim}"));
            }
            BlockState::Ket(k)
        } else {
            let m = self.matrix()?;
            if m.rows() != dim || m.cols() != dim {
                return self.err_at(&at, format!("initial state is {}x{}, locals have dimension {dim}", m.rows(), m.cols()));
            }
            BlockState::Matrix(m)
        };
        self.expect_sym(";")?;
        let body = self.prog()?;
        self.expect_kw("end")?;
        Ok(Program::Block { locals, init, body: Box::new(body) })
    }

    fn pchoice(&mut self) -> PResult<Program> {
        self.expect_kw("pchoice")?;
        let mut branches = Vec::new();
        loop {
            let p = self.prog()?;
            self.expect_sym("@")?;
            let w = self.real()?;
            branches.push((p, w));
            self.eat_sym("[]");
            if self.is_kw("end") {
                break;
            }
        }
        self.expect_kw("end")?;
        Ok(Program::ProbChoice(branches))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Num(_, s) => format!("'{s}'"),
        Tok::Imag(v) => format!("'{v}i'"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".into(),
    }
}
