//! Random small signatures and equality queries, plus the oracle checks shared
//! by the property and acceptance tests.
#![allow(dead_code)]

use nst_core::equality::{check_equal, seed_and_validate, Verdict};
use nst_core::grammar::{bisim_up_to, trace_compare, type_traces, Action};
use nst_core::rename::rename_signature;
use nst_core::{Signature, Span, TypeDef, TypeExpr};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

pub struct Shape {
    pub max_defs: usize,
    pub max_params: usize,
    pub max_branches: usize,
}

pub const SMALL: Shape = Shape { max_defs: 4, max_params: 2, max_branches: 3 };
pub const MONO: Shape = Shape { max_defs: 4, max_params: 0, max_branches: 3 };

const LABELS: [&str; 4] = ["a", "b", "c", "d"];

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    names: Vec<(String, usize)>,
    shape: &'a Shape,
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self, params: &[String]) -> TypeExpr {
        if !params.is_empty() && self.rng.gen_bool(0.5) {
            TypeExpr::Var(params.choose(self.rng).unwrap().clone())
        } else {
            TypeExpr::One
        }
    }

    fn app(&mut self, params: &[String], depth: usize) -> TypeExpr {
        let (n, k) = self.names.choose(self.rng).unwrap().clone();
        let args = (0..k).map(|_| self.arg(params, depth)).collect();
        TypeExpr::Named(n, args)
    }

    /// A type argument: a leaf, an application or, rarely, a small structure.
    fn arg(&mut self, params: &[String], depth: usize) -> TypeExpr {
        match (depth, self.rng.gen_range(0..10)) {
            (0, _) | (_, 0..=4) => self.leaf(params),
            (_, 5..=8) => self.app(params, depth - 1),
            _ => self.structural(params, depth - 1),
        }
    }

    fn continuation(&mut self, params: &[String], depth: usize) -> TypeExpr {
        match (depth, self.rng.gen_range(0..10)) {
            (0, 0..=4) => self.leaf(params),
            (0, _) => self.app(params, 0),
            (_, 0..=2) => self.leaf(params),
            (_, 3..=7) => self.app(params, depth - 1),
            _ => self.structural(params, depth - 1),
        }
    }

    fn branches(&mut self, params: &[String], depth: usize) -> Vec<(String, TypeExpr)> {
        let n = self.rng.gen_range(1..=self.shape.max_branches);
        let mut labels = LABELS.to_vec();
        labels.shuffle(self.rng);
        labels.truncate(n);
        labels.sort();
        labels.into_iter().map(|l| (l.to_string(), self.continuation(params, depth))).collect()
    }

    fn structural(&mut self, params: &[String], depth: usize) -> TypeExpr {
        match self.rng.gen_range(0..6) {
            0 | 1 => TypeExpr::Internal(self.branches(params, depth)),
            2 | 3 => TypeExpr::External(self.branches(params, depth)),
            4 => TypeExpr::tensor(self.continuation(params, depth), self.continuation(params, depth)),
            _ => TypeExpr::lolli(self.continuation(params, depth), self.continuation(params, depth)),
        }
    }
}

fn params(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("x{i}")).collect()
}

fn twin_name(n: &str) -> String {
    format!("{n}'")
}

/// Replaces names by their twins, each occurrence independently.
fn twin_body(rng: &mut impl Rng, t: &TypeExpr) -> TypeExpr {
    match t {
        TypeExpr::Named(n, args) => {
            let n = if rng.gen_bool(0.5) { twin_name(n) } else { n.clone() };
            TypeExpr::Named(n, args.iter().map(|a| twin_body(rng, a)).collect())
        }
        TypeExpr::Internal(bs) => {
            TypeExpr::Internal(bs.iter().map(|(l, b)| (l.clone(), twin_body(rng, b))).collect())
        }
        TypeExpr::External(bs) => {
            TypeExpr::External(bs.iter().map(|(l, b)| (l.clone(), twin_body(rng, b))).collect())
        }
        TypeExpr::Tensor(a, b) => TypeExpr::tensor(twin_body(rng, a), twin_body(rng, b)),
        TypeExpr::Lolli(a, b) => TypeExpr::lolli(twin_body(rng, a), twin_body(rng, b)),
        TypeExpr::One | TypeExpr::Var(_) => t.clone(),
    }
}

/// One small local change at a random position.
fn mutate(rng: &mut impl Rng, t: &TypeExpr, params: &[String]) -> TypeExpr {
    let here = rng.gen_bool(0.35);
    match t {
        TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
            let internal = matches!(t, TypeExpr::Internal(_));
            let mut bs = bs.clone();
            if here {
                match rng.gen_range(0..3) {
                    0 => return if internal { TypeExpr::External(bs) } else { TypeExpr::Internal(bs) },
                    1 if bs.len() > 1 => {
                        bs.remove(rng.gen_range(0..bs.len()));
                    }
                    _ => {
                        let i = rng.gen_range(0..bs.len());
                        bs[i].0 = "z".to_string();
                        bs.sort_by(|a, b| a.0.cmp(&b.0));
                    }
                }
            } else {
                let i = rng.gen_range(0..bs.len());
                bs[i].1 = mutate(rng, &bs[i].1, params);
            }
            if internal {
                TypeExpr::Internal(bs)
            } else {
                TypeExpr::External(bs)
            }
        }
        TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => {
            let tensor = matches!(t, TypeExpr::Tensor(..));
            let (mut a, mut b) = ((**a).clone(), (**b).clone());
            if here {
                return if tensor { TypeExpr::lolli(a, b) } else { TypeExpr::tensor(a, b) };
            }
            if rng.gen_bool(0.5) {
                a = mutate(rng, &a, params);
            } else {
                b = mutate(rng, &b, params);
            }
            if tensor {
                TypeExpr::tensor(a, b)
            } else {
                TypeExpr::lolli(a, b)
            }
        }
        TypeExpr::One => match params.first() {
            Some(x) if rng.gen_bool(0.5) => TypeExpr::Var(x.clone()),
            _ => TypeExpr::Internal(vec![("a".into(), TypeExpr::One)]),
        },
        TypeExpr::Var(_) => TypeExpr::One,
        TypeExpr::Named(n, args) => {
            if args.is_empty() || here {
                TypeExpr::One
            } else {
                let mut args = args.clone();
                let i = rng.gen_range(0..args.len());
                args[i] = mutate(rng, &args[i], params);
                TypeExpr::Named(n.clone(), args)
            }
        }
    }
}

/// A signature of base definitions `V0, V1, ...` and, for some of them, a
/// twin `Vi'` that is either a faithful copy or a slightly mutated one.
pub fn random_signature(rng: &mut impl Rng, shape: &Shape) -> Signature {
    let n_base = rng.gen_range(1..=shape.max_defs.div_ceil(2));
    let base: Vec<(String, usize)> =
        (0..n_base).map(|i| (format!("V{i}"), rng.gen_range(0..=shape.max_params))).collect();
    let n_twins = rng.gen_range(0..=(shape.max_defs - n_base).min(n_base));
    let mut twinned: Vec<(String, usize)> = base.clone();
    twinned.shuffle(rng);
    twinned.truncate(n_twins);

    // Bodies may mention twins only if they exist.
    let mut names = base.clone();
    names.extend(twinned.iter().map(|(n, k)| (twin_name(n), *k)));

    let mut sig = Signature::default();
    let mut bodies = Vec::new();
    for (n, k) in &base {
        let ps = params(*k);
        let mut g = Gen { rng: &mut *rng, names: base.clone(), shape };
        let body = g.structural(&ps, 2);
        bodies.push((n.clone(), ps, body));
    }
    for (n, ps, body) in &bodies {
        sig.types.insert(n.clone(), TypeDef { name: n.clone(), params: ps.clone(), body: body.clone(), span: Span::default() });
    }
    for (n, _) in &twinned {
        let (_, ps, body) = bodies.iter().find(|(m, ..)| m == n).unwrap();
        let mut copy = twin_body(rng, body);
        copy = rename_missing_twins(&copy, &names);
        if rng.gen_bool(0.4) {
            copy = mutate(rng, &copy, ps);
        }
        let t = twin_name(n);
        sig.types.insert(t.clone(), TypeDef { name: t, params: ps.clone(), body: copy, span: Span::default() });
    }
    sig
}

fn rename_missing_twins(t: &TypeExpr, names: &[(String, usize)]) -> TypeExpr {
    let exists = |n: &str| names.iter().any(|(m, _)| m == n);
    match t {
        TypeExpr::Named(n, args) => {
            let n = if exists(n) { n.clone() } else { n.trim_end_matches('\'').to_string() };
            TypeExpr::Named(n, args.iter().map(|a| rename_missing_twins(a, names)).collect())
        }
        TypeExpr::Internal(bs) => {
            TypeExpr::Internal(bs.iter().map(|(l, b)| (l.clone(), rename_missing_twins(b, names))).collect())
        }
        TypeExpr::External(bs) => {
            TypeExpr::External(bs.iter().map(|(l, b)| (l.clone(), rename_missing_twins(b, names))).collect())
        }
        TypeExpr::Tensor(a, b) => TypeExpr::tensor(rename_missing_twins(a, names), rename_missing_twins(b, names)),
        TypeExpr::Lolli(a, b) => TypeExpr::lolli(rename_missing_twins(a, names), rename_missing_twins(b, names)),
        TypeExpr::One | TypeExpr::Var(_) => t.clone(),
    }
}

/// Closed query pairs over `sig`: twins against each other, names against
/// names, and a name against its own unfolding with a perturbed argument.
pub fn random_queries(rng: &mut impl Rng, sig: &Signature, n: usize) -> Vec<(TypeExpr, TypeExpr)> {
    let names: Vec<(String, usize)> = sig.types.values().map(|d| (d.name.clone(), d.params.len())).collect();
    let shape = Shape { max_defs: 0, max_params: 0, max_branches: 2 };
    let mut out = Vec::new();
    for _ in 0..n {
        let (a, ka) = names.choose(rng).unwrap().clone();
        let twin = twin_name(&a);
        let b = match rng.gen_range(0..4) {
            0..=1 if sig.types.contains_key(&twin) => (twin, ka),
            0..=1 => match a.strip_suffix('\'') {
                Some(base) => (base.to_string(), ka),
                None => names.choose(rng).unwrap().clone(),
            },
            2 => (a.clone(), ka),
            _ => names.choose(rng).unwrap().clone(),
        };
        let mut g = Gen { rng: &mut *rng, names: names.clone(), shape: &shape };
        let args_a: Vec<TypeExpr> = (0..ka).map(|_| g.arg(&[], 2)).collect();
        let args_b: Vec<TypeExpr> = if b.1 == ka && g.rng.gen_bool(0.7) {
            args_a.iter().map(|t| twin_body(g.rng, t)).map(|t| rename_missing_twins(&t, &names)).collect()
        } else {
            (0..b.1).map(|_| g.arg(&[], 2)).collect()
        };
        out.push((TypeExpr::Named(a, args_a), TypeExpr::Named(b.0, args_b)));
    }
    out
}

#[derive(Default, Debug)]
pub struct Tally {
    pub queries: usize,
    pub equal: usize,
    pub not_equal: usize,
    pub inconclusive: usize,
    pub violations: Vec<String>,
}

impl Tally {
    pub fn summary(&self) -> String {
        format!(
            "{} queries: {} equal, {} not-equal, {} inconclusive, {} violations",
            self.queries,
            self.equal,
            self.not_equal,
            self.inconclusive,
            self.violations.len()
        )
    }
}

/// A difference along `path`: some prefix of it is a trace of exactly one
/// side, or the two sides enable different actions after it.
pub fn confirms_path(sig: &Signature, a: &TypeExpr, b: &TypeExpr, path: &[Action]) -> bool {
    let k = path.len() + 1;
    let (Ok(ta), Ok(tb)) = (type_traces(sig, a, k), type_traces(sig, b, k)) else {
        return false;
    };
    if (0..=path.len()).any(|i| ta.contains(&path[..i]) != tb.contains(&path[..i])) {
        return true;
    }
    let next = |ts: &BTreeSet<Vec<Action>>| -> BTreeSet<Action> {
        ts.iter().filter(|w| w.len() == k && w.starts_with(path)).map(|w| w[path.len()].clone()).collect()
    };
    next(&ta) != next(&tb)
}

/// Runs the checker on each query and holds every verdict against the oracles.
/// With `mono`, Inconclusive is itself a violation and NotEqual must also be
/// visible to the bounded trace comparison.
pub fn differential(sig: &Signature, queries: &[(TypeExpr, TypeExpr)], k: usize, mono: bool, tally: &mut Tally) {
    let renamed = rename_signature(sig);
    let seeds = seed_and_validate(&renamed, 1).expect("no eqtypes");
    for (a, b) in queries {
        tally.queries += 1;
        let v = check_equal(&[], &seeds, a, b, &renamed, 1);
        let show = || format!("{} vs {} in {:?}", nst_core::syntax::print_type(a), nst_core::syntax::print_type(b), sig_text(sig));
        match &v {
            Verdict::Equal { .. } => {
                tally.equal += 1;
                if let Some(d) = trace_compare(sig, a, b, k).expect("grammar") {
                    tally.violations.push(format!("equal but traces differ at {:?}: {}", d.word, show()));
                }
                if let Some((p, why)) = bisim_up_to(sig, a, b, k) {
                    tally.violations.push(format!("equal but bisimulation fails at {p:?} ({why}): {}", show()));
                }
            }
            Verdict::NotEqual { path, .. } => {
                tally.not_equal += 1;
                if !confirms_path(sig, a, b, path) {
                    tally.violations.push(format!("unconfirmed path {path:?}: {}", show()));
                }
                if mono && path.len() < k && trace_compare(sig, a, b, k).expect("grammar").is_none() {
                    tally.violations.push(format!("not-equal but traces agree up to {k}: {}", show()));
                }
            }
            Verdict::Inconclusive { reason, .. } => {
                tally.inconclusive += 1;
                if mono {
                    tally.violations.push(format!("inconclusive ({reason}): {}", show()));
                }
            }
        }
    }
}

pub fn sig_text(sig: &Signature) -> String {
    sig.types.values().map(nst_core::syntax::print_typedef).collect::<Vec<_>>().join("; ")
}
