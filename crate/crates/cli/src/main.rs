use clap::{Parser, Subcommand};
use nst_core::cfst::{parse_cfst, tau_embed};
use nst_core::checker::check_all;
use nst_core::equality::{seed_and_validate, EqualityChecker, DEFAULT_DEPTH};
use nst_core::grammar::{fog, trace_compare, type_traces};
use nst_core::rename::rename_signature;
use nst_core::runtime::{ConfigTyper, Configuration, Machine, Policy, Status, DEFAULT_STEPS};
use nst_core::syntax::{parse_signature, parse_type, print_signature};
use nst_core::{Diagnostic, Signature};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// Kept in step with `nst_core::corpus::VERSION`; the CLI tests check this.
const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (corpus-1)");

#[derive(Parser)]
#[command(name = "nst", version = VERSION, about = "Nested session types: check, compare and run")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type check every process definition.
    Typecheck {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEPTH, value_parser = positive)]
        depth: usize,
        /// Print the signature after internal renaming.
        #[arg(long)]
        dump_renamed: bool,
    },
    /// Decide whether two types are equal.
    Equal {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH, value_parser = positive)]
        depth: usize,
        #[arg(long)]
        dump_renamed: bool,
    },
    /// Print grammar rules, or traces of a type, or compare two types by traces.
    Grammar {
        file: PathBuf,
        /// Print the traces of this type instead of the rules.
        #[arg(long, conflicts_with_all = ["left", "right"])]
        traces: Option<String>,
        #[arg(long, requires = "right")]
        left: Option<String>,
        #[arg(long, requires = "left")]
        right: Option<String>,
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Run a closed process and print what it sends on its channel.
    Exec {
        file: PathBuf,
        #[arg(long = "proc", default_value = "main")]
        name: String,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: u64,
        /// Print every rewrite as it fires.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_DEPTH, value_parser = positive)]
        depth: usize,
    },
    /// Translate context-free session types into a `.nst` signature.
    CfstEmbed { file: PathBuf },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

enum Failure {
    Usage(String),
    Check,
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn report(file: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}", d.render(&file.display().to_string()));
    }
}

fn load(file: &Path) -> Result<Signature, Failure> {
    let src = read(file)?;
    let (sig, diags) = parse_signature(&src);
    if !diags.is_empty() {
        report(file, &diags);
        return Err(Failure::Check);
    }
    Ok(sig)
}

fn typecheck(file: &Path, depth: usize, dump: bool) -> Outcome {
    let sig = load(file)?;
    let r = check_all(&sig, depth);
    if dump && r.violations.is_empty() {
        print!("{}", print_signature(&rename_signature(&sig).sig));
    }
    if r.is_ok() {
        println!("ok: {} definitions checked", r.checked.len());
        Ok(())
    } else {
        report(file, &r.diagnostics());
        Err(Failure::Check)
    }
}

fn equal(file: &Path, left: &str, right: &str, depth: usize, dump: bool) -> Outcome {
    let sig = load(file)?;
    let violations = nst_core::ast::validate_signature(&sig);
    if !violations.is_empty() {
        let diags: Vec<Diagnostic> = violations.into_iter().map(Diagnostic::from).collect();
        report(file, &diags);
        return Err(Failure::Check);
    }
    let parse = |s: &str| {
        parse_type(s, &sig).map_err(|d| {
            report(Path::new("<type>"), &[d]);
            Failure::Usage(format!("cannot parse type `{s}`"))
        })
    };
    let (a, b) = (parse(left)?, parse(right)?);
    let renamed = rename_signature(&sig);
    if dump {
        print!("{}", print_signature(&renamed.sig));
    }
    let seeds = match seed_and_validate(&renamed, depth) {
        Ok(s) => s,
        Err(bad) => {
            let diags: Vec<Diagnostic> =
                bad.iter().map(|e| Diagnostic::error(e.span(), "invalid-eqtype", e.message())).collect();
            report(file, &diags);
            return Err(Failure::Check);
        }
    };
    let mut vars = a.free_vars();
    for v in b.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let verdict = EqualityChecker::new(&renamed, depth).with_seeds(seeds).check(&vars, &a, &b);
    println!("{verdict}");
    if verdict.is_equal() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn grammar(file: &Path, traces: Option<&str>, pair: Option<(&str, &str)>, bound: usize) -> Outcome {
    let sig = load(file)?;
    let violations = nst_core::ast::validate_signature(&sig);
    if !violations.is_empty() {
        let diags: Vec<Diagnostic> = violations.into_iter().map(Diagnostic::from).collect();
        report(file, &diags);
        return Err(Failure::Check);
    }
    let parse = |s: &str| parse_type(s, &sig).map_err(|_| Failure::Usage(format!("cannot parse type `{s}`")));
    let internal = |e: nst_core::grammar::GrammarError| Failure::Usage(e.to_string());
    if let Some(t) = traces {
        let t = parse(t)?;
        for w in type_traces(&sig, &t, bound).map_err(internal)? {
            println!("{}", nst_core::equality::format_path(&w));
        }
        return Ok(());
    }
    if let Some((l, r)) = pair {
        let (a, b) = (parse(l)?, parse(r)?);
        return match trace_compare(&sig, &a, &b, bound).map_err(internal)? {
            None => {
                println!("equal-up-to-{bound}");
                Ok(())
            }
            Some(d) => {
                let side = if d.in_left { "left" } else { "right" };
                println!("differ {} (only {side})", nst_core::equality::format_path(&d.word));
                Err(Failure::Check)
            }
        };
    }
    let g = fog(&rename_signature(&sig).sig).map_err(internal)?;
    for rule in g.rules() {
        println!("{rule}");
    }
    Ok(())
}

fn exec(file: &Path, name: &str, steps: u64, trace: bool, depth: usize) -> Outcome {
    let sig = load(file)?;
    let r = check_all(&sig, depth);
    if !r.is_ok() {
        report(file, &r.diagnostics());
        return Err(Failure::Check);
    }
    let cfg = Configuration::spawn_main(&sig, name).map_err(|e| Failure::Usage(e.to_string()))?;
    let typer = ConfigTyper::new(&sig, depth).expect("eqtypes validated by the checker");
    if let Err(e) = typer.check(&cfg) {
        eprintln!("{}: initial configuration: {e}", file.display());
        return Err(Failure::Check);
    }
    let mut m = Machine::new(&sig, cfg, Policy::RoundRobin);
    let status = m.run(steps, |f, _| {
        if trace {
            println!("{f}");
        }
    });
    println!("{}", m.config.transcript());
    match status {
        Status::Poised => Ok(()),
        other => {
            eprintln!("{}: {other} after {} steps", file.display(), m.steps);
            Err(Failure::Check)
        }
    }
}

fn cfst_embed(file: &Path) -> Outcome {
    let src = read(file)?;
    let eqs = parse_cfst(&src).map_err(|d| {
        report(file, &d);
        Failure::Check
    })?;
    match tau_embed(&eqs) {
        Ok(sig) => {
            print!("{}", print_signature(&sig));
            Ok(())
        }
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            Err(Failure::Check)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Typecheck { file, depth, dump_renamed } => typecheck(file, *depth, *dump_renamed),
        Command::Equal { file, left, right, depth, dump_renamed } => {
            equal(file, left, right, *depth, *dump_renamed)
        }
        Command::Grammar { file, traces, left, right, bound } => {
            let pair = left.as_deref().zip(right.as_deref());
            grammar(file, traces.as_deref(), pair, *bound)
        }
        Command::Exec { file, name, steps, trace, depth } => exec(file, name, *steps, *trace, *depth),
        Command::CfstEmbed { file } => cfst_embed(file),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("nst: {msg}");
            ExitCode::from(2)
        }
    }
}
