//! Internal renaming: every compound subterm gets its own type name, so that
//! definitions alternate between one structural layer and name applications.
//!
//! Fresh names are `%0, %1, ...` allocated in a left-to-right, outside-in
//! traversal. A fresh name takes the free variables of the extracted subterm,
//! in first-occurrence order, as its parameters.

use crate::ast::{Signature, Span, TypeDef, TypeEnv, TypeExpr};
use std::collections::HashMap;

/// Source of fresh type names with a fixed prefix.
#[derive(Debug, Clone)]
pub struct NameGen {
    prefix: String,
    next: usize,
}

impl NameGen {
    pub fn new(prefix: &str) -> Self {
        NameGen { prefix: prefix.to_string(), next: 0 }
    }

    pub fn fresh(&mut self, taken: &dyn Fn(&str) -> bool) -> String {
        loop {
            let name = format!("{}{}", self.prefix, self.next);
            self.next += 1;
            if !taken(&name) {
                return name;
            }
        }
    }
}

/// Extracts compound subterms into fresh definitions.
pub struct Renamer<'a> {
    gen: &'a mut NameGen,
    taken: &'a dyn Fn(&str) -> bool,
    memo: Option<HashMap<TypeExpr, TypeExpr>>,
    pub defs: Vec<TypeDef>,
}

impl<'a> Renamer<'a> {
    pub fn new(gen: &'a mut NameGen, taken: &'a dyn Fn(&str) -> bool) -> Self {
        Renamer { gen, taken, memo: None, defs: Vec::new() }
    }

    /// Reuse one name for syntactically identical subterms.
    pub fn with_sharing(mut self) -> Self {
        self.memo = Some(HashMap::new());
        self
    }

    /// Rewrites `t` into a unit, a variable or a name application whose
    /// arguments are again of that form.
    pub fn name(&mut self, t: &TypeExpr) -> TypeExpr {
        match t {
            TypeExpr::One | TypeExpr::Var(_) => t.clone(),
            TypeExpr::Named(n, args) => {
                TypeExpr::Named(n.clone(), args.iter().map(|a| self.name(a)).collect())
            }
            _ => {
                if let Some(app) = self.memo.as_ref().and_then(|m| m.get(t)) {
                    return app.clone();
                }
                let params = t.free_vars();
                let fresh = self.gen.fresh(self.taken);
                let app =
                    TypeExpr::Named(fresh.clone(), params.iter().cloned().map(TypeExpr::Var).collect());
                if let Some(m) = self.memo.as_mut() {
                    m.insert(t.clone(), app.clone());
                }
                let slot = self.defs.len();
                self.defs.push(TypeDef {
                    name: fresh,
                    params,
                    body: TypeExpr::One,
                    span: Span::default(),
                });
                let body = self.layer(t);
                self.defs[slot].body = body;
                app
            }
        }
    }

    /// Keeps the top constructor of `t` and names its immediate subterms.
    pub fn layer(&mut self, t: &TypeExpr) -> TypeExpr {
        match t {
            TypeExpr::Internal(bs) => {
                TypeExpr::Internal(bs.iter().map(|(l, b)| (l.clone(), self.name(b))).collect())
            }
            TypeExpr::External(bs) => {
                TypeExpr::External(bs.iter().map(|(l, b)| (l.clone(), self.name(b))).collect())
            }
            TypeExpr::Tensor(a, b) => TypeExpr::tensor(self.name(a), self.name(b)),
            TypeExpr::Lolli(a, b) => TypeExpr::lolli(self.name(a), self.name(b)),
            TypeExpr::One | TypeExpr::Var(_) | TypeExpr::Named(..) => self.name(t),
        }
    }
}

/// Names a goal type. A compound goal receives exactly one top name.
pub fn rename_type(
    t: &TypeExpr,
    gen: &mut NameGen,
    taken: &dyn Fn(&str) -> bool,
) -> (TypeExpr, Vec<TypeDef>) {
    let mut r = Renamer::new(gen, taken);
    let out = r.name(t);
    (out, r.defs)
}

/// A signature whose type definitions satisfy the alternation invariant.
#[derive(Debug, Clone)]
pub struct RenamedSignature {
    /// Renamed typedefs (originals first, then fresh ones), renamed eqtype
    /// sides, and the untouched process declarations and definitions.
    pub sig: Signature,
    /// Fresh names in allocation order.
    pub fresh: Vec<String>,
}

impl TypeEnv for RenamedSignature {
    fn typedef(&self, name: &str) -> Option<&TypeDef> {
        self.sig.types.get(name)
    }
}

impl RenamedSignature {
    pub fn typedefs(&self) -> impl Iterator<Item = &TypeDef> + Clone {
        self.sig.types.values()
    }
}

pub const FRESH_PREFIX: &str = "%";

pub fn rename_signature(sig: &Signature) -> RenamedSignature {
    let mut gen = NameGen::new(FRESH_PREFIX);
    let taken = |n: &str| sig.types.contains_key(n);
    let mut r = Renamer::new(&mut gen, &taken);
    let mut out = sig.clone();
    for def in out.types.values_mut() {
        def.body = r.layer(&def.body);
    }
    for eq in &mut out.eqtypes {
        eq.left = r.name(&eq.left);
        eq.right = r.name(&eq.right);
    }
    let fresh: Vec<String> = r.defs.iter().map(|d| d.name.clone()).collect();
    for d in r.defs {
        out.types.insert(d.name.clone(), d);
    }
    RenamedSignature { sig: out, fresh }
}

fn in_fragment(t: &TypeExpr) -> bool {
    match t {
        TypeExpr::One | TypeExpr::Var(_) => true,
        TypeExpr::Named(_, args) => args.iter().all(in_fragment),
        _ => false,
    }
}

/// Every body is structural and each immediate sub-position is a unit, a
/// variable or a name application over the same fragment.
pub fn check_alternation(sig: &Signature) -> Result<(), String> {
    for def in sig.types.values() {
        let ok = match &def.body {
            TypeExpr::Named(..) | TypeExpr::Var(_) => false,
            TypeExpr::One => true,
            TypeExpr::Internal(bs) | TypeExpr::External(bs) => bs.iter().all(|(_, b)| in_fragment(b)),
            TypeExpr::Tensor(a, b) | TypeExpr::Lolli(a, b) => in_fragment(a) && in_fragment(b),
        };
        if !ok {
            return Err(format!("definition of `{}` breaks alternation", def.name));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_signature, print_typedef};
    use proptest::prelude::*;

    fn lines(r: &RenamedSignature) -> Vec<String> {
        r.typedefs().map(print_typedef).collect()
    }

    #[test]
    fn nested_tensor() {
        let (sig, _) = parse_signature("type W = +{ a : (1 * 1) * 1 }");
        let r = rename_signature(&sig);
        assert_eq!(
            lines(&r),
            vec!["type W = +{a : %0}", "type %0 = %1 * 1", "type %1 = 1 * 1"]
        );
    }

    #[test]
    fn already_alternating_is_untouched() {
        let (sig, _) = parse_signature("type V[a] = +{ a : 1 }");
        let r = rename_signature(&sig);
        assert!(r.fresh.is_empty());
        assert_eq!(r.sig.types, sig.types);
    }

    #[test]
    fn queue() {
        let (sig, _) = parse_signature(
            "type queue[a] = &{ ins : a -o queue[a], del : +{ none : 1, some : a * queue[a] } }",
        );
        let r = rename_signature(&sig);
        assert_eq!(
            lines(&r),
            vec![
                "type queue[a] = &{ins : %0[a], del : %1[a]}",
                "type %0[a] = a -o queue[a]",
                "type %1[a] = +{none : 1, some : %2[a]}",
                "type %2[a] = a * queue[a]",
            ]
        );
        assert!(check_alternation(&r.sig).is_ok());
    }

    #[test]
    fn arguments_are_renamed_and_params_follow_occurrence() {
        let (sig, _) = parse_signature("type V[a][b] = +{ l : V[b * a][1] }");
        let r = rename_signature(&sig);
        assert_eq!(lines(&r), vec!["type V[a][b] = +{l : V[%0[b][a]][1]}", "type %0[b][a] = b * a"]);
    }

    #[test]
    fn goal_gets_single_top_name() {
        let mut gen = NameGen::new("%g");
        let (t, defs) = rename_type(
            &TypeExpr::tensor(TypeExpr::var("x"), TypeExpr::One),
            &mut gen,
            &|_| false,
        );
        assert_eq!(t, TypeExpr::named("%g0", vec![TypeExpr::var("x")]));
        assert_eq!(defs.len(), 1);
        let (t, defs) = rename_type(&TypeExpr::One, &mut gen, &|_| false);
        assert_eq!((t, defs.len()), (TypeExpr::One, 0));
    }

    fn arb_body(names: Vec<(String, usize)>, params: usize) -> BoxedStrategy<TypeExpr> {
        let vars: Vec<TypeExpr> = (0..params).map(|i| TypeExpr::Var(format!("x{i}"))).collect();
        let mut leaves: Vec<BoxedStrategy<TypeExpr>> = vec![Just(TypeExpr::One).boxed()];
        if !vars.is_empty() {
            leaves.push(prop::sample::select(vars).boxed());
        }
        let leaf = prop::strategy::Union::new(leaves);
        leaf.prop_recursive(3, 16, 3, move |inner| {
            let names = names.clone();
            let branches = prop::collection::vec(inner.clone(), 1..3).prop_map(|ts| {
                ts.into_iter().enumerate().map(|(i, t)| (format!("l{i}"), t)).collect::<Vec<_>>()
            });
            let app = (prop::sample::select(names), prop::collection::vec(inner.clone(), 2))
                .prop_map(|((n, k), args)| TypeExpr::Named(n, args.into_iter().take(k).collect()));
            prop_oneof![
                branches.clone().prop_map(TypeExpr::Internal),
                branches.prop_map(TypeExpr::External),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| TypeExpr::tensor(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| TypeExpr::lolli(a, b)),
                app,
            ]
        })
        .prop_filter("structural body", TypeExpr::is_compound)
        .boxed()
    }

    fn arb_sig() -> impl Strategy<Value = Signature> {
        let arities = prop::collection::vec(0usize..3, 1..4);
        arities.prop_flat_map(|ar| {
            let names: Vec<(String, usize)> =
                ar.iter().enumerate().map(|(i, &k)| (format!("V{i}"), k)).collect();
            let bodies: Vec<_> = names.iter().map(|(_, k)| arb_body(names.clone(), *k)).collect();
            (Just(names), bodies)
        })
        .prop_map(|(names, bodies)| {
            let mut sig = Signature::default();
            for ((n, k), body) in names.into_iter().zip(bodies) {
                let params = (0..k).map(|i| format!("x{i}")).collect();
                sig.types.insert(n.clone(), TypeDef { name: n, params, body, span: Span::default() });
            }
            sig
        })
    }

    proptest! {
        #[test]
        fn renaming_is_idempotent_and_alternating(sig in arb_sig()) {
            let once = rename_signature(&sig);
            prop_assert!(check_alternation(&once.sig).is_ok());
            let twice = rename_signature(&once.sig);
            prop_assert!(twice.fresh.is_empty());
            prop_assert_eq!(&twice.sig.types, &once.sig.types);
            for d in once.typedefs() {
                prop_assert_eq!(d.body.free_vars().len() <= d.params.len(), true);
            }
        }
    }
}
