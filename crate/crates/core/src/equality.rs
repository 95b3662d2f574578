//! Type equality for nested session types.
//!
//! The algorithm works on renamed signatures and compares either two
//! structural types or two name applications. For name pairs it tries, in
//! order: `refl` (same name, compare variant arguments), `def` (instantiate a
//! closure from the context, confirmed in rigid mode) and `expd` (record a
//! closure and compare the unfoldings). Expansion of a head pair is capped by
//! a depth bound; hitting it makes the verdict inconclusive.

use crate::ast::{unfold, EqTypeDecl, Span, TypeDef, TypeEnv, TypeExpr};
use crate::grammar::Action;
use crate::rename::{NameGen, RenamedSignature, Renamer};
use crate::syntax::print_type;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// Nesting cap for rigid `def` confirmations.
const MAX_DEF_DEPTH: usize = 64;

/// Prefix for names introduced while renaming query goals.
const GOAL_PREFIX: &str = "%g";

/// `<vars ; left ≡ right>` with both sides name applications.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub vars: Vec<String>,
    pub left: TypeExpr,
    pub right: TypeExpr,
}

impl Closure {
    fn heads(&self) -> (&str, &str) {
        (head_name(&self.left), head_name(&self.right))
    }
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{} ; {} == {}>",
            self.vars.join(", "),
            print_type(&self.left),
            print_type(&self.right)
        )
    }
}

fn head_name(t: &TypeExpr) -> &str {
    match t {
        TypeExpr::Named(n, _) => n,
        _ => "",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mismatch {
    Constructor { left: String, right: String },
    Labels { left: Vec<String>, right: Vec<String> },
    Variable { left: String, right: String },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Constructor { left, right } => write!(f, "`{left}` against `{right}`"),
            Mismatch::Labels { left, right } => {
                write!(f, "labels {{{}}} against {{{}}}", left.join(", "), right.join(", "))
            }
            Mismatch::Variable { left, right } => write!(f, "variable `{left}` against `{right}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equal { witness: Vec<Closure> },
    /// `path` leads from the root to the first observable difference.
    NotEqual { path: Vec<Action>, mismatch: Mismatch },
    Inconclusive { reason: String, blocking: Option<(String, String)> },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal { .. })
    }

    pub fn is_not_equal(&self) -> bool {
        matches!(self, Verdict::NotEqual { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }
}

pub fn format_path(path: &[Action]) -> String {
    if path.is_empty() {
        "ε".to_string()
    } else {
        path.iter().map(Action::to_string).collect::<Vec<_>>().join(".")
    }
}

/// `equal`, `not-equal PATH` or `inconclusive`.
impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equal { .. } => f.write_str("equal"),
            Verdict::NotEqual { path, .. } => write!(f, "not-equal {}", format_path(path)),
            Verdict::Inconclusive { .. } => f.write_str("inconclusive"),
        }
    }
}

/// Parameter positions that never reach an observable position.
#[derive(Debug, Clone, Default)]
pub struct Nonvariance {
    defined: HashMap<String, usize>,
    variant: HashSet<(String, usize)>,
}

impl Nonvariance {
    pub fn is_nonvariant(&self, name: &str, index: usize) -> bool {
        self.defined.get(name).is_some_and(|&k| index < k)
            && !self.variant.contains(&(name.to_string(), index))
    }
}

fn occurs_variant(x: &str, t: &TypeExpr, variant: &HashSet<(String, usize)>) -> bool {
    match t {
        TypeExpr::Var(y) => y == x,
        TypeExpr::One => false,
        TypeExpr::Internal(bs) | TypeExpr::External(bs) => {
            bs.iter().any(|(_, b)| occurs_variant(x, b, variant))
        }
        TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => {
            occurs_variant(x, a, variant) || occurs_variant(x, b, variant)
        }
        TypeExpr::Named(w, args) => args.iter().enumerate().any(|(j, a)| {
            variant.contains(&(w.clone(), j)) && occurs_variant(x, a, variant)
        }),
    }
}

/// Least fixed point: a position is variant when its variable occurs
/// structurally or flows into a variant position of another name.
pub fn compute_nonvariance<'a>(defs: impl IntoIterator<Item = &'a TypeDef> + Clone) -> Nonvariance {
    let mut variant = HashSet::new();
    loop {
        let mut changed = false;
        for def in defs.clone() {
            for (i, p) in def.params.iter().enumerate() {
                let key = (def.name.clone(), i);
                if !variant.contains(&key) && occurs_variant(p, &def.body, &variant) {
                    variant.insert(key);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let defined = defs.into_iter().map(|d| (d.name.clone(), d.params.len())).collect();
    Nonvariance { defined, variant }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Outcome {
    Equal,
    /// Path stored innermost-first while the result bubbles up.
    NotEqual(Vec<Action>, Mismatch),
    Inconclusive(String, Option<(String, String)>),
}

struct Env<'s> {
    sig: &'s RenamedSignature,
    local: HashMap<String, TypeDef>,
}

impl TypeEnv for Env<'_> {
    fn typedef(&self, name: &str) -> Option<&TypeDef> {
        self.local.get(name).or_else(|| self.sig.typedef(name))
    }
}

struct Session<'s> {
    env: Env<'s>,
    nv: &'s Nonvariance,
    depth_bound: usize,
    vars: Vec<String>,
    gamma: Vec<Closure>,
    counts: HashMap<(String, String), usize>,
    witness: Vec<Closure>,
    in_def: Vec<(TypeExpr, TypeExpr)>,
}

impl<'s> Session<'s> {
    fn new(
        sig: &'s RenamedSignature,
        nv: &'s Nonvariance,
        seeds: &[Closure],
        depth_bound: usize,
        vars: &[String],
    ) -> Self {
        Session {
            env: Env { sig, local: HashMap::new() },
            nv,
            depth_bound,
            vars: vars.to_vec(),
            gamma: seeds.to_vec(),
            counts: HashMap::new(),
            witness: Vec::new(),
            in_def: Vec::new(),
        }
    }

    /// Names compound goals so that the comparison starts on names.
    fn rename_goals(&mut self, a: &TypeExpr, b: &TypeExpr) -> (TypeExpr, TypeExpr) {
        let sig = self.env.sig;
        let taken = |n: &str| sig.typedef(n).is_some();
        let mut gen = NameGen::new(GOAL_PREFIX);
        let mut r = Renamer::new(&mut gen, &taken).with_sharing();
        let (a, b) = (r.name(a), r.name(b));
        for d in r.defs {
            self.env.local.insert(d.name.clone(), d);
        }
        (a, b)
    }

    fn unfold(&self, t: &TypeExpr) -> Result<TypeExpr, Outcome> {
        unfold(&self.env, t).map_err(|e| Outcome::Inconclusive(e.to_string(), None))
    }

    fn eq(&mut self, a: &TypeExpr, b: &TypeExpr, rigid: bool) -> Outcome {
        if a == b {
            return Outcome::Equal;
        }
        use TypeExpr::*;
        match (a, b) {
            (Named(..), Named(..)) => self.names(a, b, rigid),
            // A name against anything else: its unfolding is structural, so
            // one step decides the pair.
            (Named(..), _) => match self.unfold(a) {
                Ok(ua) => self.eq(&ua, b, rigid),
                Err(o) => o,
            },
            (_, Named(..)) => match self.unfold(b) {
                Ok(ub) => self.eq(a, &ub, rigid),
                Err(o) => o,
            },
            (Var(x), Var(y)) => Outcome::NotEqual(
                vec![],
                Mismatch::Variable { left: x.clone(), right: y.clone() },
            ),
            (Internal(b1), Internal(b2)) => self.choices(b1, b2, true, rigid),
            (External(b1), External(b2)) => self.choices(b1, b2, false, rigid),
            (Tensor(a1, a2), Tensor(b1, b2)) => {
                self.pairwise([(&**a1, &**b1, Action::Tensor1), (&**a2, &**b2, Action::Tensor2)], rigid)
            }
            (Lolli(a1, a2), Lolli(b1, b2)) => {
                self.pairwise([(&**a1, &**b1, Action::Lolli1), (&**a2, &**b2, Action::Lolli2)], rigid)
            }
            (Var(x), _) => Outcome::NotEqual(
                vec![],
                Mismatch::Variable { left: x.clone(), right: b.head().to_string() },
            ),
            (_, Var(y)) => Outcome::NotEqual(
                vec![],
                Mismatch::Variable { left: a.head().to_string(), right: y.clone() },
            ),
            _ => Outcome::NotEqual(
                vec![],
                Mismatch::Constructor { left: a.head().to_string(), right: b.head().to_string() },
            ),
        }
    }

    fn choices(
        &mut self,
        b1: &[(String, TypeExpr)],
        b2: &[(String, TypeExpr)],
        internal: bool,
        rigid: bool,
    ) -> Outcome {
        let l1: BTreeSet<&String> = b1.iter().map(|(l, _)| l).collect();
        let l2: BTreeSet<&String> = b2.iter().map(|(l, _)| l).collect();
        if l1 != l2 {
            return Outcome::NotEqual(
                vec![],
                Mismatch::Labels {
                    left: l1.into_iter().cloned().collect(),
                    right: l2.into_iter().cloned().collect(),
                },
            );
        }
        let triples: Vec<_> = b1
            .iter()
            .map(|(l, t1)| {
                let t2 = &b2.iter().find(|(m, _)| m == l).expect("same label set").1;
                let act = if internal { Action::Plus(l.clone()) } else { Action::With(l.clone()) };
                (t1, t2, act)
            })
            .collect();
        self.pairwise(triples, rigid)
    }

    /// All premises must hold. A definite difference wins over an inconclusive premise.
    fn pairwise<'t>(
        &mut self,
        premises: impl IntoIterator<Item = (&'t TypeExpr, &'t TypeExpr, Action)>,
        rigid: bool,
    ) -> Outcome {
        let mut pending = None;
        for (a, b, act) in premises {
            match self.eq(a, b, rigid) {
                Outcome::Equal => {}
                Outcome::NotEqual(mut path, m) => {
                    path.push(act);
                    return Outcome::NotEqual(path, m);
                }
                inc @ Outcome::Inconclusive(..) => {
                    pending.get_or_insert(inc);
                }
            }
        }
        pending.unwrap_or(Outcome::Equal)
    }

    fn names(&mut self, a: &TypeExpr, b: &TypeExpr, rigid: bool) -> Outcome {
        let (TypeExpr::Named(v1, as1), TypeExpr::Named(v2, as2)) = (a, b) else {
            unreachable!("names() called on non-names")
        };

        // refl
        if v1 == v2 && as1.len() == as2.len() {
            let mark = self.witness.len();
            let mut ok = true;
            for (i, (x, y)) in as1.iter().zip(as2).enumerate() {
                if self.nv.is_nonvariant(v1, i) {
                    continue;
                }
                if self.eq(x, y, rigid) != Outcome::Equal {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Outcome::Equal;
            }
            self.witness.truncate(mark);
        }

        // def
        let goal = (a.clone(), b.clone());
        if self.in_def.len() < MAX_DEF_DEPTH && !self.in_def.contains(&goal) {
            let candidates: Vec<Closure> = self
                .gamma
                .iter()
                .rev()
                .filter(|c| c.heads() == (v1.as_str(), v2.as_str()))
                .cloned()
                .collect();
            for c in candidates {
                let Some(sigma) = match_closure(&c, a, b) else { continue };
                let (l, r) = (c.left.subst(&sigma), c.right.subst(&sigma));
                self.in_def.push(goal.clone());
                let ok = self.eq(&l, a, true) == Outcome::Equal && self.eq(&r, b, true) == Outcome::Equal;
                self.in_def.pop();
                if ok {
                    return Outcome::Equal;
                }
            }
        }

        // expd
        let key = (v1.clone(), v2.clone());
        if rigid {
            return Outcome::Inconclusive(
                format!("`{v1}` against `{v2}` needs expansion in rigid mode"),
                Some(key),
            );
        }
        if self.counts.get(&key).copied().unwrap_or(0) >= self.depth_bound {
            return Outcome::Inconclusive(
                format!("depth bound {} reached for `{v1}` against `{v2}`", self.depth_bound),
                Some(key),
            );
        }
        self.expand(a, b)
    }

    fn expand(&mut self, a: &TypeExpr, b: &TypeExpr) -> Outcome {
        let closure = Closure { vars: self.vars.clone(), left: a.clone(), right: b.clone() };
        let key = (head_name(a).to_string(), head_name(b).to_string());
        let (ua, ub) = match (self.unfold(a), self.unfold(b)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(o), _) | (_, Err(o)) => return o,
        };
        self.gamma.push(closure.clone());
        *self.counts.entry(key.clone()).or_insert(0) += 1;
        let out = self.eq(&ua, &ub, false);
        *self.counts.get_mut(&key).expect("pushed above") -= 1;
        self.gamma.pop();
        if out == Outcome::Equal {
            self.witness.push(closure);
        }
        out
    }

    fn verdict(&mut self, out: Outcome) -> Verdict {
        match out {
            Outcome::Equal => Verdict::Equal { witness: std::mem::take(&mut self.witness) },
            Outcome::NotEqual(mut path, mismatch) => {
                path.reverse();
                Verdict::NotEqual { path, mismatch }
            }
            Outcome::Inconclusive(reason, blocking) => Verdict::Inconclusive { reason, blocking },
        }
    }
}

/// First-order matching of a closure's arguments against goal arguments.
///
/// Bindings come from the left side; the right side only fills variables the
/// left side did not bind. Conflicts between the sides are left to the rigid
/// confirmation that follows.
pub fn match_closure(
    c: &Closure,
    a: &TypeExpr,
    b: &TypeExpr,
) -> Option<HashMap<String, TypeExpr>> {
    let (TypeExpr::Named(n1, ps1), TypeExpr::Named(m1, ps2)) = (&c.left, &c.right) else {
        return None;
    };
    let (TypeExpr::Named(n, as1), TypeExpr::Named(m, as2)) = (a, b) else {
        return None;
    };
    if n1 != n || m1 != m || ps1.len() != as1.len() || ps2.len() != as2.len() {
        return None;
    }
    let mut left = HashMap::new();
    for (p, t) in ps1.iter().zip(as1) {
        pmatch(p, t, &c.vars, &mut left)?;
    }
    let mut right = HashMap::new();
    for (p, t) in ps2.iter().zip(as2) {
        pmatch(p, t, &c.vars, &mut right)?;
    }
    for (k, v) in right {
        left.entry(k).or_insert(v);
    }
    for v in &c.vars {
        left.entry(v.clone()).or_insert(TypeExpr::One);
    }
    Some(left)
}

fn pmatch(
    p: &TypeExpr,
    t: &TypeExpr,
    vars: &[String],
    binds: &mut HashMap<String, TypeExpr>,
) -> Option<()> {
    use TypeExpr::*;
    match (p, t) {
        (Var(x), _) if vars.contains(x) => match binds.get(x) {
            Some(prev) => (prev == t).then_some(()),
            None => {
                binds.insert(x.clone(), t.clone());
                Some(())
            }
        },
        (Var(x), Var(y)) => (x == y).then_some(()),
        (One, One) => Some(()),
        (Named(n, ps), Named(m, ts)) if n == m && ps.len() == ts.len() => {
            ps.iter().zip(ts).try_for_each(|(p, t)| pmatch(p, t, vars, binds))
        }
        (Internal(ps), Internal(ts)) | (External(ps), External(ts)) if ps.len() == ts.len() => {
            ps.iter().zip(ts).try_for_each(|((l, p), (k, t))| {
                (l == k).then_some(())?;
                pmatch(p, t, vars, binds)
            })
        }
        (Tensor(p1, p2), Tensor(t1, t2)) | (Lolli(p1, p2), Lolli(t1, t2)) => {
            pmatch(p1, t1, vars, binds)?;
            pmatch(p2, t2, vars, binds)
        }
        _ => None,
    }
}

/// Reusable equality checker over one renamed signature.
pub struct EqualityChecker<'s> {
    sig: &'s RenamedSignature,
    nonvariance: Nonvariance,
    seeds: Vec<Closure>,
    depth_bound: usize,
}

pub const DEFAULT_DEPTH: usize = 1;

impl<'s> EqualityChecker<'s> {
    pub fn new(sig: &'s RenamedSignature, depth_bound: usize) -> Self {
        EqualityChecker {
            sig,
            nonvariance: compute_nonvariance(sig.typedefs()),
            seeds: Vec::new(),
            depth_bound,
        }
    }

    pub fn with_seeds(mut self, seeds: Vec<Closure>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn seeds(&self) -> &[Closure] {
        &self.seeds
    }

    pub fn nonvariance(&self) -> &Nonvariance {
        &self.nonvariance
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    /// Decides `vars ; seeds ⊢ a ≡ b`.
    pub fn check(&self, vars: &[String], a: &TypeExpr, b: &TypeExpr) -> Verdict {
        let mut s = Session::new(self.sig, &self.nonvariance, &self.seeds, self.depth_bound, vars);
        let (a, b) = s.rename_goals(a, b);
        let out = s.eq(&a, &b, false);
        s.verdict(out)
    }

    /// Like [`check`](Self::check) but the first step on two names is always an
    /// expansion, so no closure can justify itself.
    fn check_guarded(&self, vars: &[String], a: &TypeExpr, b: &TypeExpr) -> Verdict {
        let mut s = Session::new(self.sig, &self.nonvariance, &self.seeds, self.depth_bound, vars);
        let (a, b) = s.rename_goals(a, b);
        let out = if matches!((&a, &b), (TypeExpr::Named(..), TypeExpr::Named(..))) {
            s.expand(&a, &b)
        } else {
            s.eq(&a, &b, false)
        };
        s.verdict(out)
    }
}

/// Convenience wrapper around [`EqualityChecker`].
pub fn check_equal(
    vars: &[String],
    seeds: &[Closure],
    a: &TypeExpr,
    b: &TypeExpr,
    sig: &RenamedSignature,
    depth_bound: usize,
) -> Verdict {
    EqualityChecker::new(sig, depth_bound).with_seeds(seeds.to_vec()).check(vars, a, b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidEqtype {
    pub decl: EqTypeDecl,
    pub verdict: Verdict,
}

impl InvalidEqtype {
    pub fn span(&self) -> Span {
        self.decl.span
    }

    pub fn message(&self) -> String {
        format!(
            "eqtype {} = {} does not hold: {}",
            print_type(&self.decl.left),
            print_type(&self.decl.right),
            self.verdict
        )
    }
}

/// Builds the initial closures from every `eqtype` and validates each one
/// under all of them.
pub fn seed_and_validate(
    sig: &RenamedSignature,
    depth_bound: usize,
) -> Result<Vec<Closure>, Vec<InvalidEqtype>> {
    let seeds: Vec<Closure> = sig
        .sig
        .eqtypes
        .iter()
        .filter(|e| matches!((&e.left, &e.right), (TypeExpr::Named(..), TypeExpr::Named(..))))
        .flat_map(|e| {
            let fwd = Closure { vars: e.vars.clone(), left: e.left.clone(), right: e.right.clone() };
            let back = Closure { vars: e.vars.clone(), left: e.right.clone(), right: e.left.clone() };
            [fwd, back]
        })
        .collect();
    let checker = EqualityChecker::new(sig, depth_bound).with_seeds(seeds.clone());
    let failures: Vec<InvalidEqtype> = sig
        .sig
        .eqtypes
        .iter()
        .filter_map(|e| {
            let verdict = checker.check_guarded(&e.vars, &e.left, &e.right);
            (!verdict.is_equal()).then(|| InvalidEqtype { decl: e.clone(), verdict })
        })
        .collect();
    if failures.is_empty() {
        Ok(seeds)
    } else {
        Err(failures)
    }
}
