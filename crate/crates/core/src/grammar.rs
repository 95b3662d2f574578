//! Translation of renamed signatures into first-order grammars, plus two
//! bounded oracles for equality: trace comparison on the grammar and a
//! step-indexed bisimulation directly on type unfoldings.
//!
//! The trace embedding maps `1` to a term with no transitions, so `1`,
//! `+{}` and `&{}` all have the trace set `{ε}`. The bisimulation oracle
//! still tells them apart.

use crate::ast::{unfold, EqTypeDecl, Signature, Span, TypeDef, TypeEnv, TypeExpr};
use crate::rename::rename_signature;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// One observable step on a session type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Plus(String),
    With(String),
    Tensor1,
    Tensor2,
    Lolli1,
    Lolli2,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Plus(l) => write!(f, "+{l}"),
            Action::With(l) => write!(f, "&{l}"),
            Action::Tensor1 => f.write_str("*1"),
            Action::Tensor2 => f.write_str("*2"),
            Action::Lolli1 => f.write_str("-o1"),
            Action::Lolli2 => f.write_str("-o2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Bot,
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    fn subst(&self, sigma: &HashMap<&str, &Term>) -> Term {
        match self {
            Term::Bot => Term::Bot,
            Term::Var(v) => sigma.get(v.as_str()).map(|t| (*t).clone()).unwrap_or_else(|| self.clone()),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| a.subst(sigma)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Bot => f.write_str("⊥"),
            Term::Var(v) => f.write_str(v),
            Term::App(n, args) => {
                f.write_str(n)?;
                for a in args {
                    match a {
                        Term::App(_, inner) if !inner.is_empty() => write!(f, " ({a})")?,
                        _ => write!(f, " {a}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("type `{0}` is not in renamed form")]
    NotRenamed(String),
    #[error("nonterminal `{name}` has two rules for action `{action}`")]
    NonDeterministic { name: String, action: Action },
    #[error("undefined nonterminal `{0}`")]
    Undefined(String),
}

/// `⟦1⟧ = ⊥`, `⟦α⟧ = α`, `⟦V[B]⟧ = V ⟦B⟧`.
pub fn embed(t: &TypeExpr) -> Result<Term, GrammarError> {
    match t {
        TypeExpr::One => Ok(Term::Bot),
        TypeExpr::Var(v) => Ok(Term::Var(v.clone())),
        TypeExpr::Named(n, args) => {
            Ok(Term::App(n.clone(), args.iter().map(embed).collect::<Result<_, _>>()?))
        }
        _ => Err(GrammarError::NotRenamed(crate::syntax::print_type(t))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: String,
    pub params: Vec<String>,
    pub action: Action,
    pub rhs: Term,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lhs)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        write!(f, " --{}--> {}", self.action, self.rhs)
    }
}

#[derive(Debug, Clone, Default)]
struct Productions {
    params: Vec<String>,
    rules: Vec<(Action, Term)>,
}

/// A deterministic first-order grammar: at most one rule per nonterminal and action.
#[derive(Debug, Clone, Default)]
pub struct Grammar {
    nonterminals: HashMap<String, Productions>,
}

impl Grammar {
    /// All rules, sorted by their printed form.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out: Vec<Rule> = self
            .nonterminals
            .iter()
            .flat_map(|(n, p)| {
                p.rules.iter().map(move |(a, rhs)| Rule {
                    lhs: n.clone(),
                    params: p.params.clone(),
                    action: a.clone(),
                    rhs: rhs.clone(),
                })
            })
            .collect();
        out.sort_by_key(|r| r.to_string());
        out
    }

    pub fn enabled(&self, t: &Term) -> Vec<Action> {
        match t {
            Term::App(n, _) => {
                let mut acts: Vec<Action> = self
                    .nonterminals
                    .get(n)
                    .map(|p| p.rules.iter().map(|(a, _)| a.clone()).collect())
                    .unwrap_or_default();
                acts.sort();
                acts
            }
            Term::Bot | Term::Var(_) => Vec::new(),
        }
    }

    pub fn step(&self, t: &Term, action: &Action) -> Option<Term> {
        let Term::App(n, args) = t else { return None };
        let prods = self.nonterminals.get(n)?;
        let (_, rhs) = prods.rules.iter().find(|(a, _)| a == action)?;
        let sigma: HashMap<&str, &Term> =
            prods.params.iter().map(String::as_str).zip(args.iter()).collect();
        Some(rhs.subst(&sigma))
    }

    fn add(&mut self, def: &TypeDef) -> Result<(), GrammarError> {
        let mut rules: Vec<(Action, Term)> = Vec::new();
        match &def.body {
            TypeExpr::Internal(bs) => {
                for (l, b) in bs {
                    rules.push((Action::Plus(l.clone()), embed(b)?));
                }
            }
            TypeExpr::External(bs) => {
                for (l, b) in bs {
                    rules.push((Action::With(l.clone()), embed(b)?));
                }
            }
            TypeExpr::Tensor(a, b) => {
                rules.push((Action::Tensor1, embed(a)?));
                rules.push((Action::Tensor2, embed(b)?));
            }
            TypeExpr::Lolli(a, b) => {
                rules.push((Action::Lolli1, embed(a)?));
                rules.push((Action::Lolli2, embed(b)?));
            }
            TypeExpr::One => {}
            TypeExpr::Var(_) | TypeExpr::Named(..) => {
                return Err(GrammarError::NotRenamed(def.name.clone()))
            }
        }
        let mut seen = HashSet::new();
        for (a, _) in &rules {
            if !seen.insert(a.clone()) {
                return Err(GrammarError::NonDeterministic { name: def.name.clone(), action: a.clone() });
            }
        }
        self.nonterminals.insert(def.name.clone(), Productions { params: def.params.clone(), rules });
        Ok(())
    }
}

/// Builds the grammar of a renamed signature.
pub fn fog(sig: &Signature) -> Result<Grammar, GrammarError> {
    let mut g = Grammar::default();
    for def in sig.types.values() {
        g.add(def)?;
    }
    Ok(g)
}

/// Adds `A_x = +{ℓ_x : A_x}` for each variable and returns `x ↦ A_x`.
pub fn close_open(sig: &mut Signature, vars: &[String]) -> HashMap<String, TypeExpr> {
    let mut sigma = HashMap::new();
    for x in vars {
        let mut name = format!("%open_{x}");
        while sig.types.contains_key(&name) {
            name.push('\'');
        }
        let app = TypeExpr::Named(name.clone(), vec![]);
        let body = TypeExpr::Internal(vec![(format!("%{x}"), app.clone())]);
        sig.types.insert(
            name.clone(),
            TypeDef { name: name.clone(), params: vec![], body, span: Span::default() },
        );
        sigma.insert(x.clone(), app);
    }
    sigma
}

/// All words of length at most `k` from `t`.
pub fn traces(g: &Grammar, t: &Term, k: usize) -> BTreeSet<Vec<Action>> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![(Vec::new(), t.clone())];
    out.insert(Vec::new());
    for _ in 0..k {
        let mut next = Vec::new();
        for (w, term) in frontier {
            for a in g.enabled(&term) {
                let t2 = g.step(&term, &a).expect("enabled action steps");
                let mut w2 = w.clone();
                w2.push(a);
                out.insert(w2.clone());
                next.push((w2, t2));
            }
        }
        frontier = next;
    }
    out
}

/// A shortest word up to the bound that only one side can perform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Difference {
    pub word: Vec<Action>,
    pub in_left: bool,
}

/// Compares the trace sets of `a` and `b` up to length `k`.
pub fn bounded_trace_equal(g: &Grammar, a: &Term, b: &Term, k: usize) -> Option<Difference> {
    let mut queue = VecDeque::from([(a.clone(), b.clone(), Vec::new())]);
    let mut seen = HashSet::from([(a.clone(), b.clone())]);
    while let Some((x, y, w)) = queue.pop_front() {
        if w.len() >= k {
            continue;
        }
        let (ex, ey) = (g.enabled(&x), g.enabled(&y));
        if ex != ey {
            let only: BTreeSet<&Action> =
                ex.iter().collect::<BTreeSet<_>>().symmetric_difference(&ey.iter().collect()).copied().collect();
            let act = (*only.iter().next().expect("sets differ")).clone();
            let in_left = ex.contains(&act);
            let mut word = w;
            word.push(act);
            return Some(Difference { word, in_left });
        }
        for act in ex {
            let x2 = g.step(&x, &act).expect("enabled");
            let y2 = g.step(&y, &act).expect("enabled");
            if seen.insert((x2.clone(), y2.clone())) {
                let mut w2 = w.clone();
                w2.push(act);
                queue.push_back((x2, y2, w2));
            }
        }
    }
    None
}

/// Closes, renames and embeds two types of `sig`, then compares their traces.
pub fn trace_compare(
    sig: &Signature,
    a: &TypeExpr,
    b: &TypeExpr,
    k: usize,
) -> Result<Option<Difference>, GrammarError> {
    let mut s = Signature { types: sig.types.clone(), ..Signature::default() };
    let mut vars = a.free_vars();
    for v in b.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let sigma = close_open(&mut s, &vars);
    s.eqtypes.push(EqTypeDecl {
        vars: vec![],
        left: a.subst(&sigma),
        right: b.subst(&sigma),
        span: Span::default(),
    });
    let r = rename_signature(&s);
    let g = fog(&r.sig)?;
    let eq = &r.sig.eqtypes[0];
    Ok(bounded_trace_equal(&g, &embed(&eq.left)?, &embed(&eq.right)?, k))
}

/// Traces of a type of `sig` up to length `k`, after closing and renaming.
pub fn type_traces(sig: &Signature, t: &TypeExpr, k: usize) -> Result<BTreeSet<Vec<Action>>, GrammarError> {
    let mut s = Signature { types: sig.types.clone(), ..Signature::default() };
    let sigma = close_open(&mut s, &t.free_vars());
    let t = t.subst(&sigma);
    s.eqtypes.push(EqTypeDecl { vars: vec![], left: t.clone(), right: t, span: Span::default() });
    let r = rename_signature(&s);
    let g = fog(&r.sig)?;
    Ok(traces(&g, &embed(&r.sig.eqtypes[0].left)?, k))
}

/// Step-indexed bisimulation on unfoldings. Returns the path to the first
/// difference within `k` steps, if any.
pub fn bisim_up_to(
    env: &impl TypeEnv,
    a: &TypeExpr,
    b: &TypeExpr,
    k: usize,
) -> Option<(Vec<Action>, String)> {
    let mut memo = HashMap::new();
    let mut path = Vec::new();
    bisim(env, a, b, k, &mut memo, &mut path).err()
}

type BisimMemo = HashMap<(TypeExpr, TypeExpr), usize>;

fn bisim(
    env: &impl TypeEnv,
    a: &TypeExpr,
    b: &TypeExpr,
    k: usize,
    memo: &mut BisimMemo,
    path: &mut Vec<Action>,
) -> Result<(), (Vec<Action>, String)> {
    if k == 0 || memo.get(&(a.clone(), b.clone())).is_some_and(|&d| d >= k) {
        return Ok(());
    }
    let fail = |path: &Vec<Action>, why: String| Err((path.clone(), why));
    let ua = unfold(env, a).map_err(|e| (path.clone(), e.to_string()))?;
    let ub = unfold(env, b).map_err(|e| (path.clone(), e.to_string()))?;
    use TypeExpr::*;
    let mut sub: Vec<(TypeExpr, TypeExpr, Action)> = Vec::new();
    match (&ua, &ub) {
        (One, One) => {}
        (Var(x), Var(y)) if x == y => {}
        (Internal(b1), Internal(b2)) | (External(b1), External(b2)) => {
            if ua.labels() != ub.labels() {
                return fail(path, "label sets differ".into());
            }
            let internal = matches!(ua, Internal(_));
            for (l, t1) in b1 {
                let t2 = &b2.iter().find(|(m, _)| m == l).expect("same labels").1;
                let act = if internal { Action::Plus(l.clone()) } else { Action::With(l.clone()) };
                sub.push((t1.clone(), t2.clone(), act));
            }
        }
        (Tensor(a1, a2), Tensor(b1, b2)) => {
            sub.push(((**a1).clone(), (**b1).clone(), Action::Tensor1));
            sub.push(((**a2).clone(), (**b2).clone(), Action::Tensor2));
        }
        (Lolli(a1, a2), Lolli(b1, b2)) => {
            sub.push(((**a1).clone(), (**b1).clone(), Action::Lolli1));
            sub.push(((**a2).clone(), (**b2).clone(), Action::Lolli2));
        }
        _ => return fail(path, format!("`{}` against `{}`", ua.head(), ub.head())),
    }
    for (x, y, act) in sub {
        path.push(act);
        bisim(env, &x, &y, k - 1, memo, path)?;
        path.pop();
    }
    memo.insert((a.clone(), b.clone()), k);
    Ok(())
}
