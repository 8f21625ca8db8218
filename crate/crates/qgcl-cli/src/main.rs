use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use qgcl::laws::{self, LawId};
use qgcl::linalg::{format_complex, format_matrix, parse_matrix_text, r, CMatrix, TAU_EQ};
use qgcl::registry::Registry;
use qgcl::semantics::{channel_of, evaluate, SemanticsError};
use qgcl::syntax::{self, library, parse_with, ParsedFile, Program};
use qgcl::walks::{self, InitialState, Variant, WalkSpec};
use qgcl::wp::{self, HoareVerdict, Observable, RefineVerdict};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qgcl", version, about = "Semantics workbench for quantum guarded commands")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Equality tolerance.
    #[arg(long, default_value_t = TAU_EQ, global = true)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and run the static checks.
    Check { program: PathBuf },
    /// Print Δ(P) and ⌈P⌉(δ) for every δ.
    Semantics { program: PathBuf },
    /// Print the Kraus operators of ⟦P⟧.
    Kraus { program: PathBuf },
    /// Print wp.P(N), or the Kraus operators of wp.P when no observable is given.
    /// Observables act on all declared variables, in declaration order.
    Wp {
        program: PathBuf,
        #[arg(long)]
        obs: Option<PathBuf>,
    },
    /// Print ⟦P⟧(ρ) for a density matrix on all declared variables.
    Apply {
        program: PathBuf,
        #[arg(long)]
        rho: PathBuf,
    },
    /// ⟦P⟧ = ⟦Q⟧.
    Equiv { p: PathBuf, q: PathBuf },
    /// Equality after tracing out the coins of both programs.
    EquivCf { p: PathBuf, q: PathBuf },
    /// {pre} P {post}.
    Hoare {
        program: PathBuf,
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        post: PathBuf,
    },
    /// Search for an observable refuting P ⊑ Q.
    Refine {
        p: PathBuf,
        q: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Check random instances of the algebraic laws.
    Laws {
        #[arg(long, default_value_t = 10)]
        per_law: usize,
        /// Comma-separated law names; all laws by default.
        #[arg(long)]
        only: Option<String>,
    },
    /// Position distribution of a walk on a cycle.
    Walk {
        #[arg(long, value_enum)]
        variant: WalkKind,
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "T")]
        t: usize,
        /// Comma-separated basis indices, one per walk variable.
        #[arg(long)]
        init: Option<String>,
        /// Number of coins for multi-coin.
        #[arg(long, default_value_t = 2)]
        coins: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WalkKind {
    Hadamard,
    Unidirectional,
    PositionTime,
    ThreeState,
    MultiCoin,
    TwoWalker,
}

struct Report {
    text: String,
    verdict: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(rep) => {
            print!("{}", rep.text);
            if rep.verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_into(path: &Path, base: Registry) -> anyhow::Result<ParsedFile> {
    let src = read(path)?;
    let f = parse_with(&src, base).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    let diags = syntax::check(&f.registry, &f.program);
    if !diags.is_empty() {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", path.display())).collect();
        bail!("{}", lines.join("\n"));
    }
    Ok(f)
}

fn load(path: &Path) -> anyhow::Result<ParsedFile> {
    load_into(path, Registry::new())
}

/// Both programs over one registry; the second file's declarations must agree
/// with the first.
fn load_pair(p: &Path, q: &Path) -> anyhow::Result<(Registry, Program, Program)> {
    let a = load(p)?;
    let b = load_into(q, a.registry)?;
    Ok((b.registry, a.program, b.program))
}

fn load_matrix(path: &Path) -> anyhow::Result<CMatrix> {
    parse_matrix_text(&read(path)?).with_context(|| format!("reading a matrix from {}", path.display()))
}

fn matrix_record(out: &mut String, format: Format, label: &str, m: &CMatrix) {
    match format {
        Format::Human => {
            let _ = write!(out, "{label}\n{}", format_matrix(m));
        }
        Format::Tsv => {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let _ = writeln!(out, "{label}\t{i}\t{j}\t{}", format_complex(m.get(i, j)));
                }
            }
        }
    }
}

fn residual(x: f64) -> String {
    format!("{x:.3e}")
}

fn verdict_line(out: &mut String, format: Format, name: &str, ok: bool, value: Option<f64>) {
    let word = if ok { "true" } else { "false" };
    match (format, value) {
        (Format::Human, Some(res)) => {
            let _ = writeln!(out, "{name}: {word} (residual {})", residual(res));
        }
        (Format::Human, None) => {
            let _ = writeln!(out, "{name}: {word}");
        }
        (Format::Tsv, res) => {
            let res = res.map_or_else(String::new, residual);
            let _ = writeln!(out, "{name}\t{word}\t{res}");
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let mut out = String::new();
    let fmt = cli.format;
    let verdict = match &cli.command {
        Command::Check { program } => {
            let f = load(program)?;
            let vars = f.registry.display(&f.registry.all());
            let _ = writeln!(out, "ok: {vars}");
            true
        }
        Command::Semantics { program } => {
            let f = load(program)?;
            match evaluate(&f.registry, &f.program) {
                Ok(res) => {
                    let vars = f.registry.display(res.semi.vars());
                    let labels: Vec<String> = res.deltas().iter().map(|d| d.label()).collect();
                    if fmt == Format::Human {
                        let _ = writeln!(out, "vars {vars}\ndelta {}", labels.join(" "));
                    }
                    for (delta, m) in res.semi.entries() {
                        matrix_record(&mut out, fmt, &delta.label(), m);
                    }
                }
                Err(SemanticsError::Unsupported(what)) => {
                    let ch = channel_of(&f.registry, &f.program)?;
                    if fmt == Format::Human {
                        let _ = writeln!(out, "# {what} has no semi-classical semantics; Kraus operators follow");
                        let _ = writeln!(out, "vars {}", f.registry.display(ch.vars()));
                    }
                    for (k, m) in ch.kraus().iter().enumerate() {
                        matrix_record(&mut out, fmt, &format!("K{k}"), m);
                    }
                }
                Err(e) => return Err(e.into()),
            }
            true
        }
        Command::Kraus { program } => {
            let f = load(program)?;
            let ch = channel_of(&f.registry, &f.program)?;
            if fmt == Format::Human {
                let _ = writeln!(out, "vars {}", f.registry.display(ch.vars()));
            }
            for (k, m) in ch.kraus().iter().enumerate() {
                matrix_record(&mut out, fmt, &format!("K{k}"), m);
            }
            true
        }
        Command::Wp { program, obs } => {
            let f = load(program)?;
            let w = wp::wp(&f.registry, &f.program)?;
            match obs {
                Some(path) => {
                    let all = f.registry.all();
                    let n = Observable::new(&f.registry, all.clone(), load_matrix(path)?, cli.tol)?;
                    let pre = w.extend(&f.registry, &all)?.apply(&n.matrix)?;
                    matrix_record(&mut out, fmt, "wp", &pre);
                }
                None => {
                    if fmt == Format::Human {
                        let _ = writeln!(out, "vars {}", f.registry.display(w.vars()));
                    }
                    for (k, m) in w.kraus().iter().enumerate() {
                        matrix_record(&mut out, fmt, &format!("K{k}"), m);
                    }
                }
            }
            true
        }
        Command::Apply { program, rho } => {
            let f = load(program)?;
            let all = f.registry.all();
            let ch = channel_of(&f.registry, &f.program)?.extend(&f.registry, &all)?;
            let out_rho = ch.apply(&load_matrix(rho)?)?;
            matrix_record(&mut out, fmt, "rho", &out_rho);
            if fmt == Format::Human {
                let _ = writeln!(out, "trace {}", format_complex(out_rho.trace()));
            }
            true
        }
        Command::Equiv { p, q } => {
            let (reg, a, b) = load_pair(p, q)?;
            let res = wp::equivalence_residual(&reg, &a, &b)?;
            let ok = res <= cli.tol;
            verdict_line(&mut out, fmt, "equivalent", ok, Some(res));
            ok
        }
        Command::EquivCf { p, q } => {
            let (reg, a, b) = load_pair(p, q)?;
            let res = wp::coin_free_residual(&reg, &a, &b)?;
            let ok = res <= cli.tol;
            verdict_line(&mut out, fmt, "coin-free equivalent", ok, Some(res));
            ok
        }
        Command::Hoare { program, pre, post } => {
            let f = load(program)?;
            let all = f.registry.all();
            let n1 = Observable::new(&f.registry, all.clone(), load_matrix(pre)?, cli.tol)?;
            let n2 = Observable::new(&f.registry, all, load_matrix(post)?, cli.tol)?;
            match wp::check_hoare(&f.registry, &n1, &f.program, &n2, cli.tol)? {
                HoareVerdict::Satisfied => {
                    verdict_line(&mut out, fmt, "hoare", true, None);
                    true
                }
                HoareVerdict::Violated(min) => {
                    verdict_line(&mut out, fmt, "hoare", false, Some(min));
                    false
                }
            }
        }
        Command::Refine { p, q, samples } => {
            let (reg, a, b) = load_pair(p, q)?;
            match wp::refines(&reg, &a, &b, *samples, cli.seed, cli.tol)? {
                RefineVerdict::Unrefuted(n) => {
                    verdict_line(&mut out, fmt, &format!("refines (unrefuted by {n} observables)"), true, None);
                    true
                }
                RefineVerdict::Refuted { witness, min_eigenvalue } => {
                    verdict_line(&mut out, fmt, "refines", false, Some(min_eigenvalue));
                    matrix_record(&mut out, fmt, "witness", &witness);
                    false
                }
            }
        }
        Command::Laws { per_law, only } => run_laws(&mut out, cli, *per_law, only.as_deref())?,
        Command::Walk { variant, n, t, init, coins } => {
            let v = match variant {
                WalkKind::Hadamard => Variant::Hadamard,
                WalkKind::Unidirectional => Variant::Unidirectional,
                WalkKind::PositionTime => Variant::PositionTimeCoin(None),
                WalkKind::ThreeState => Variant::ThreeState,
                WalkKind::MultiCoin => Variant::MultiCoin(*coins),
                WalkKind::TwoWalker => Variant::TwoWalkerShared(library::cnot()),
            };
            let mut spec = WalkSpec::new(v, *n, *t);
            if let Some(s) = init {
                let ks = s
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .with_context(|| format!("bad --init '{s}'"))?;
                spec.init = InitialState::Basis(ks);
            }
            spec.validate()?;
            let d = walks::position_distribution(&spec)?;
            let _ = writeln!(out, "{}\tprobability", d.walkers.join("\t"));
            for (k, p) in d.probabilities.iter().enumerate() {
                let pos: Vec<String> = d.positions(k).iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "{}\t{}", pos.join("\t"), format_complex(r(*p)));
            }
            true
        }
    };
    Ok(Report { text: out, verdict })
}

fn run_laws(out: &mut String, cli: &Cli, per_law: usize, only: Option<&str>) -> anyhow::Result<bool> {
    let selected: Vec<LawId> = match only {
        None => LawId::ALL.to_vec(),
        Some(list) => list
            .split(',')
            .map(|s| LawId::parse(s.trim()).ok_or_else(|| anyhow!("unknown law '{}'", s.trim())))
            .collect::<anyhow::Result<_>>()?,
    };
    if per_law == 0 {
        bail!("--per-law must be positive");
    }
    let mut worst: BTreeMap<usize, (LawId, BTreeSet<String>, f64, bool)> = BTreeMap::new();
    for inst in laws::corpus(cli.seed, per_law)? {
        let Some(slot) = selected.iter().position(|&id| id == inst.id) else { continue };
        let v = laws::check_law(&inst, cli.tol)?;
        let e = worst.entry(slot).or_insert((inst.id, BTreeSet::new(), 0.0, true));
        e.1.insert(inst.relation.to_string());
        e.2 = e.2.max(v.residual);
        e.3 &= v.pass;
    }
    let mut all_pass = true;
    if cli.format == Format::Human {
        let _ = writeln!(out, "{:<14} {:<14} {:>9}  {:<20} verdict", "law", "relation", "instances", "max residual");
    }
    for (id, rels, res, pass) in worst.into_values() {
        all_pass &= pass;
        let word = if pass { "PASS" } else { "FAIL" };
        let rel = rels.into_iter().collect::<Vec<_>>().join("/");
        let res = residual(res);
        match cli.format {
            Format::Human => {
                let _ = writeln!(out, "{:<14} {:<14} {:>9}  {:<20} {word}", id.name(), rel, per_law, res);
            }
            Format::Tsv => {
                let _ = writeln!(out, "{}\t{rel}\t{per_law}\t{res}\t{word}", id.name());
            }
        }
    }
    Ok(all_pass)
}
