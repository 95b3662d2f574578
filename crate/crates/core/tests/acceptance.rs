//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

mod common;

use nst_core::cfst::{parse_cfst, tau_embed};
use nst_core::checker::check_all;
use nst_core::corpus;
use nst_core::equality::{check_equal, seed_and_validate, Verdict};
use nst_core::grammar::fog;
use nst_core::rename::{check_alternation, rename_signature};
use nst_core::runtime::{ConfigTyper, Configuration, Machine, Policy, Status};
use nst_core::syntax::{parse_signature, parse_type, print_typedef};
use nst_core::{Signature, TypeExpr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn sig(src: &str) -> Signature {
    let (s, d) = parse_signature(src);
    assert!(d.is_empty(), "{d:?}");
    s
}

fn verdict(s: &Signature, depth: usize, a: &str, b: &str) -> Verdict {
    let r = rename_signature(s);
    let seeds = seed_and_validate(&r, depth).expect("valid eqtypes");
    let a = parse_type(a, s).unwrap();
    let b = parse_type(b, s).unwrap();
    let mut vars = a.free_vars();
    vars.extend(b.free_vars().into_iter().filter(|v| !a.free_vars().contains(v)));
    check_equal(&vars, &seeds, &a, &b, &r, depth)
}

fn expect(ok: bool, what: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn equality_suite() -> Outcome {
    let start = Instant::now();
    let lists = sig(corpus::LISTS);
    let v = verdict(&lists, 1, "list[1]", "list'[1]");
    expect(v.is_equal(), &format!("list[1] vs list'[1]: {v}"))?;
    let v = verdict(&lists, 1, "list[list'[1]]", "list'[list[1]]");
    expect(v.is_equal(), &format!("nested lists: {v}"))?;
    let v = verdict(&lists, 1, "R", "E");
    expect(matches!(&v, Verdict::NotEqual { path, .. } if path.is_empty()), &format!("R vs E: {v}"))?;
    let v = verdict(&sig(corpus::DYCK_NAMES), 1, "D", "D'");
    expect(v.is_inconclusive(), &format!("D vs D' without eqtype: {v}"))?;
    let v = verdict(&sig(corpus::DYCK), 1, "D", "D'");
    expect(v.is_equal(), &format!("D vs D' with eqtype: {v}"))?;
    let v = verdict(&sig(corpus::QUEUE), 1, "queue[bin]", "queue[bin]");
    expect(v.is_equal(), &format!("queue reflexivity: {v}"))?;
    let v = verdict(&sig(corpus::QUEUE), 1, "queue[a]", "queue[a]");
    expect(v.is_equal(), &format!("open queue reflexivity: {v}"))?;
    let t = start.elapsed();
    expect(t < Duration::from_secs(1), &format!("took {t:?}"))?;
    Ok(format!("7 verdicts in {t:?}"))
}

fn depth_one_suffices() -> Outcome {
    let mut queries = 0;
    for (name, src) in corpus::PROGRAMS {
        let s = sig(src);
        let report = check_all(&s, 1);
        expect(report.is_ok(), &format!("{name} does not check: {:?}", report.diagnostics()))?;
        for q in &report.queries {
            expect(
                !q.verdict.is_inconclusive(),
                &format!("{name}: inconclusive query {:?} vs {:?}", q.expected, q.found),
            )?;
        }
        queries += report.queries.len();
    }
    Ok(format!("{} programs, {queries} equality queries resolved", corpus::PROGRAMS.len()))
}

fn queue_grammar() -> Outcome {
    let s = sig("type queue[a] = &{ ins : a -o queue[a], del : +{ none : 1, some : a * queue[a] } }");
    let g = fog(&rename_signature(&s).sig).map_err(|e| e.to_string())?;
    let got: Vec<String> = g.rules().iter().map(ToString::to_string).collect();
    let want: BTreeSet<&str> = [
        "queue a --&ins--> %0 a",
        "queue a --&del--> %1 a",
        "%0 a ---o1--> a",
        "%0 a ---o2--> queue a",
        "%1 a --+none--> ⊥",
        "%1 a --+some--> %2 a",
        "%2 a --*1--> a",
        "%2 a --*2--> queue a",
    ]
    .into();
    let got_set: BTreeSet<&str> = got.iter().map(String::as_str).collect();
    expect(got.len() == 8 && got_set == want, &format!("rules: {got:?}"))?;
    Ok("8 rules".into())
}

fn differential_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e55_1011);
    let mut tally = common::Tally::default();
    let sigs = 1000;
    for _ in 0..sigs {
        let s = common::random_signature(&mut rng, &common::SMALL);
        let qs = common::random_queries(&mut rng, &s, 3);
        common::differential(&s, &qs, 8, false, &mut tally);
    }
    let t = start.elapsed();
    if let Some(v) = tally.violations.first() {
        return Err(format!("{}; first: {v}", tally.summary()));
    }
    expect(tally.equal > 0 && tally.not_equal > 0, &tally.summary())?;
    expect(t < Duration::from_secs(60), &format!("took {t:?}"))?;
    Ok(format!("{sigs} signatures, {} in {t:?}", tally.summary()))
}

fn monomorphic_completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a7_401e);
    let mut tally = common::Tally::default();
    let sigs = 500;
    for _ in 0..sigs {
        let s = common::random_signature(&mut rng, &common::MONO);
        let qs = common::random_queries(&mut rng, &s, 3);
        common::differential(&s, &qs, 12, true, &mut tally);
    }
    if let Some(v) = tally.violations.first() {
        return Err(format!("{}; first: {v}", tally.summary()));
    }
    expect(tally.equal > 0 && tally.not_equal > 0, &tally.summary())?;
    Ok(format!("{sigs} signatures, {}", tally.summary()))
}

/// Bits of `n`, least significant first, as the runtime prints them.
fn bits(n: u32) -> String {
    let mut out = String::new();
    let mut m = n;
    while m > 0 {
        out.push_str(if m % 2 == 1 { "b1 " } else { "b0 " });
        m /= 2;
    }
    out + "$ close"
}

/// Runs `main` and type-checks the configuration before the first step and
/// after each of the first `typed` steps.
fn run_typed(s: &Signature, main: &str, typed: u64) -> Result<(String, Status, u64), String> {
    let typer = ConfigTyper::new(s, 1).ok_or("invalid eqtypes")?;
    let cfg = Configuration::spawn_main(s, main).map_err(|e| e.to_string())?;
    typer.check(&cfg).map_err(|e| format!("initial configuration: {e}"))?;
    let mut m = Machine::new(s, cfg, Policy::RoundRobin);
    let mut broken = None;
    let mut n = 0;
    let status = m.run(100_000, |f, c| {
        n += 1;
        if broken.is_none() && n <= typed {
            if let Err(e) = typer.check(c) {
                broken = Some(format!("step {n}, after {f}: {e}"));
            }
        }
    });
    match broken {
        Some(b) => Err(b),
        None => Ok((m.config.transcript().to_string(), status, m.steps)),
    }
}

#[derive(Debug, Clone)]
enum Tree {
    Leaf,
    Node(Box<Tree>, u32, Box<Tree>),
}

fn random_tree(rng: &mut impl Rng, nodes: usize) -> Tree {
    if nodes == 0 {
        return Tree::Leaf;
    }
    let left = rng.gen_range(0..nodes);
    Tree::Node(
        Box::new(random_tree(rng, left)),
        rng.gen_range(0..8),
        Box::new(random_tree(rng, nodes - 1 - left)),
    )
}

/// The transcript of a tree sent as `Tree[bin]`.
fn tree_transcript(t: &Tree) -> String {
    match t {
        Tree::Leaf => "leaf close".into(),
        Tree::Node(l, n, r) => {
            format!("node send({}) send({}) {}", tree_transcript(l), bits(*n), tree_transcript(r))
        }
    }
}

/// Process lines that build `t` on a fresh channel; returns that channel.
fn build_tree(t: &Tree, lines: &mut Vec<String>, fresh: &mut usize) -> String {
    let mut name = |p: &str| {
        *fresh += 1;
        format!("{p}{fresh}")
    };
    match t {
        Tree::Leaf => {
            let c = name("l");
            lines.push(format!("{c} <- leaf[bin] ;"));
            c
        }
        Tree::Node(l, n, r) => {
            let mut c = name("e");
            lines.push(format!("{c} <- emp ;"));
            let digits: Vec<u32> = (0..32).rev().map(|i| (n >> i) & 1).skip_while(|&d| d == 0).collect();
            for d in digits {
                let next = name("n");
                lines.push(format!("{next} <- bit{d} {c} ;"));
                c = next;
            }
            let lc = build_tree(l, lines, fresh);
            let rc = build_tree(r, lines, fresh);
            let t = format!("t{fresh}");
            *fresh += 1;
            lines.push(format!("{t} <- node[bin] {lc} {c} {rc} ;"));
            t
        }
    }
}

fn round_trip_program(t: &Tree) -> String {
    let mut lines = Vec::new();
    let mut fresh = 0;
    let root = build_tree(t, &mut lines, &mut fresh);
    format!(
        "{}\ndecl trip : . |- (r : Tree[bin] * 1)\nproc r <- trip =\n  {}\n  u <- unit ;\n  s <- serialize[bin][1] {root} u ;\n  r <- deserialize[bin][1] s\n",
        corpus::TREE,
        lines.join("\n  ")
    )
}

fn runtime_safety() -> Outcome {
    let exp = sig(corpus::EXP);
    let (a, b) = (5u32, 3u32);
    let want = format!("send({}) close", bits(a + 2 * b));
    let (got, status, steps) = run_typed(&exp, "main", 100)?;
    expect(got == want, &format!("exp transcript `{got}`, expected `{want}`"))?;
    expect(status == Status::Poised, &format!("exp ended {status}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x7ee5);
    let trees = 40;
    for _ in 0..trees {
        let nodes = rng.gen_range(0..=7);
        let t = random_tree(&mut rng, nodes);
        let s = sig(&round_trip_program(&t));
        let (got, status, _) = run_typed(&s, "trip", u64::MAX)?;
        let want = format!("send({}) close", tree_transcript(&t));
        expect(status == Status::Poised, &format!("{t:?} ended {status}"))?;
        expect(got == want, &format!("{t:?}: got `{got}`, expected `{want}`"))?;
    }
    Ok(format!(
        "a+2b = {}, typed after each of {} steps, {trees} trees round-tripped",
        a + 2 * b,
        steps.min(100)
    ))
}

fn cfst_embedding() -> Outcome {
    let eqs = parse_cfst(corpus::ANBN).map_err(|d| format!("{d:?}"))?;
    let embedded = tau_embed(&eqs).map_err(|e| e.to_string())?;
    let text: Vec<String> = embedded.types.values().map(print_typedef).collect();
    for want in ["type A[x] = +{a : A[B[x]], b : x}", "type B[x] = +{b : x}"] {
        expect(text.iter().any(|t| t == want), &format!("missing `{want}` in {text:?}"))?;
    }
    let closed = TypeExpr::named("S", vec![TypeExpr::One]);
    let r = rename_signature(&embedded);
    let seeds = seed_and_validate(&r, 1).expect("no eqtypes");
    let target_s = parse_type("+{ a : A[1] }", &embedded).unwrap();
    let v = check_equal(&[], &seeds, &closed, &target_s, &r, 1);
    expect(v.is_equal(), &format!("[1/x]S[x] vs +{{a : A[1]}}: {v}"))?;

    // A separately written copy of the target side, related by eqtype hints.
    let src = format!(
        "{}type Sp = +{{ a : Ap[1] }}\ntype Ap[x] = +{{ a : Ap[Bp[x]], b : x }}\ntype Bp[x] = +{{ b : x }}\n\
         eqtype A[x] = Ap[x]\neqtype B[x] = Bp[x]\n",
        nst_core::syntax::print_signature(&embedded)
    );
    let both = sig(&src);
    let r = rename_signature(&both);
    let seeds = seed_and_validate(&r, 1).map_err(|e| format!("{e:?}"))?;
    let v = check_equal(&[], &seeds, &closed, &TypeExpr::named("Sp", vec![]), &r, 1);
    expect(v.is_equal(), &format!("[1/x]S[x] vs copy of S: {v}"))?;
    Ok("A[x], B[x] reproduced; [1/x]S[x] equal to S".into())
}

/// Prints definitions with internal names numbered by first occurrence in a
/// walk from the user-visible names, and parameters numbered by position.
fn canonical(s: &Signature, internal: impl Fn(&str) -> bool) -> BTreeSet<String> {
    fn walk(t: &TypeExpr, order: &mut Vec<String>, internal: &dyn Fn(&str) -> bool, s: &Signature) {
        match t {
            TypeExpr::Named(n, args) => {
                if internal(n) && !order.contains(n) {
                    order.push(n.clone());
                    walk(&s.types[n].body, order, internal, s);
                }
                for a in args {
                    walk(a, order, internal, s);
                }
            }
            TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
                for (_, b) in bs {
                    walk(b, order, internal, s);
                }
            }
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => {
                walk(a, order, internal, s);
                walk(b, order, internal, s);
            }
            TypeExpr::One | TypeExpr::Var(_) => {}
        }
    }
    fn rename(t: &TypeExpr, names: &HashMap<String, String>, vars: &HashMap<String, String>) -> TypeExpr {
        match t {
            TypeExpr::Named(n, args) => TypeExpr::Named(
                names.get(n).cloned().unwrap_or_else(|| n.clone()),
                args.iter().map(|a| rename(a, names, vars)).collect(),
            ),
            TypeExpr::Var(v) => TypeExpr::Var(vars.get(v).cloned().unwrap_or_else(|| v.clone())),
            TypeExpr::Internal(bs) => {
                TypeExpr::Internal(bs.iter().map(|(l, b)| (l.clone(), rename(b, names, vars))).collect())
            }
            TypeExpr::External(bs) => {
                TypeExpr::External(bs.iter().map(|(l, b)| (l.clone(), rename(b, names, vars))).collect())
            }
            TypeExpr::Tensor(a, b) => TypeExpr::tensor(rename(a, names, vars), rename(b, names, vars)),
            TypeExpr::Lolli(a, b) => TypeExpr::lolli(rename(a, names, vars), rename(b, names, vars)),
            TypeExpr::One => TypeExpr::One,
        }
    }
    let mut roots: Vec<&String> = s.types.keys().filter(|n| !internal(n)).collect();
    roots.sort();
    let mut order = Vec::new();
    for r in roots {
        walk(&s.types[r].body, &mut order, &internal, s);
    }
    let names: HashMap<String, String> =
        order.iter().enumerate().map(|(i, n)| (n.clone(), format!("N{i}"))).collect();
    s.types
        .values()
        .map(|d| {
            let vars: HashMap<String, String> =
                d.params.iter().enumerate().map(|(i, p)| (p.clone(), format!("p{i}"))).collect();
            let mut d = d.clone();
            d.name = names.get(&d.name).cloned().unwrap_or(d.name);
            d.params = (0..d.params.len()).map(|i| format!("p{i}")).collect();
            d.body = rename(&d.body, &names, &vars);
            print_typedef(&d)
        })
        .collect()
}

/// Inlines definitions whose body is a variable or `1`.
fn inline_trivial(s: &Signature) -> Signature {
    let trivial: HashMap<String, (Vec<String>, TypeExpr)> = s
        .types
        .values()
        .filter(|d| matches!(d.body, TypeExpr::Var(_) | TypeExpr::One))
        .map(|d| (d.name.clone(), (d.params.clone(), d.body.clone())))
        .collect();
    fn go(t: &TypeExpr, tr: &HashMap<String, (Vec<String>, TypeExpr)>) -> TypeExpr {
        match t {
            TypeExpr::Named(n, args) => match tr.get(n) {
                Some((ps, body)) => body.subst(&nst_core::ast::substitution(ps, args)),
                None => TypeExpr::Named(n.clone(), args.iter().map(|a| go(a, tr)).collect()),
            },
            TypeExpr::Internal(bs) => TypeExpr::Internal(bs.iter().map(|(l, b)| (l.clone(), go(b, tr))).collect()),
            TypeExpr::External(bs) => TypeExpr::External(bs.iter().map(|(l, b)| (l.clone(), go(b, tr))).collect()),
            TypeExpr::Tensor(a, b) => TypeExpr::tensor(go(a, tr), go(b, tr)),
            TypeExpr::Lolli(a, b) => TypeExpr::lolli(go(a, tr), go(b, tr)),
            TypeExpr::One | TypeExpr::Var(_) => t.clone(),
        }
    }
    let mut out = s.clone();
    out.types.retain(|n, _| !trivial.contains_key(n));
    for d in out.types.values_mut() {
        d.body = go(&d.body, &trivial);
    }
    out
}

fn renaming_fidelity() -> Outcome {
    let s = sig("type queue[a] = &{ ins : a -o queue[a], del : +{ none : 1, some : a * queue[a] } }");
    let r = rename_signature(&s);
    check_alternation(&r.sig)?;
    let fresh = |n: &str| r.fresh.iter().any(|f| f == n);
    let ours = canonical(&r.sig, fresh);

    // Reference renaming with fresh names X0..X2.
    let three = sig("type queue[a] = &{ ins : X0[a], del : X1[a] }\n\
                     type X0[a] = a -o queue[a]\n\
                     type X1[a] = +{ none : 1, some : X2[a] }\n\
                     type X2[a] = a * queue[a]");
    let x = |n: &str| n.starts_with('X');
    expect(ours == canonical(&three, x), &format!("{ours:?} vs {:?}", canonical(&three, x)))?;

    // The variant that also names leaves agrees once those are inlined.
    let six = sig("type queue[a] = &{ ins : X0[a], del : X2[a] }\n\
                   type X0[a] = X1[a] -o queue[a]\n\
                   type X1[a] = a\n\
                   type X2[a] = +{ none : X3, some : X4[a] }\n\
                   type X3 = 1\n\
                   type X4[a] = X5[a] * queue[a]\n\
                   type X5[a] = a");
    let six = inline_trivial(&six);
    expect(ours == canonical(&six, x), &format!("{ours:?} vs {:?}", canonical(&six, x)))?;
    Ok(format!("{} fresh names, alternation holds", r.fresh.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 equality suite", equality_suite),
        ("2 depth bound 1 suffices for the corpus", depth_one_suffices),
        ("3 queue grammar rules", queue_grammar),
        ("4 differential soundness", differential_soundness),
        ("5 monomorphic completeness", monomorphic_completeness),
        ("6 runtime preservation, progress, round trips", runtime_safety),
        ("7 context-free embedding", cfst_embedding),
        ("8 renaming fidelity", renaming_fidelity),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
