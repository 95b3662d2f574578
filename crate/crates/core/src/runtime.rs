//! Asynchronous execution by multiset rewriting.
//!
//! A configuration holds process objects `proc(c, P)` and message objects
//! `msg(c, M)`, each providing one channel. Runtime channels are named `#n`,
//! which no source identifier can be, so substituting them into process
//! bodies never captures.

use crate::ast::{substitution, unfold, Proc, ProcKind, Signature, Span, TypeExpr};
use crate::checker::{Checker, TypeError, TypingContext};
use crate::equality::{seed_and_validate, Closure};
use crate::rename::{rename_signature, RenamedSignature};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MsgForm {
    Label { label: String, cont: String },
    Chan { passed: String, cont: String },
    Close,
}

/// A message. Positive messages travel from provider to client and are sent
/// along the channel they provide; negative ones travel the other way and are
/// sent along their continuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Msg {
    pub provides: String,
    pub form: MsgForm,
    pub positive: bool,
}

impl Msg {
    fn uses(&self) -> Vec<&String> {
        match &self.form {
            MsgForm::Label { cont, .. } => vec![cont],
            MsgForm::Chan { passed, cont } => vec![passed, cont],
            MsgForm::Close => vec![],
        }
    }

    fn rename_used(&mut self, from: &str, to: &str) {
        let fix = |c: &mut String| {
            if c == from {
                *c = to.to_string();
            }
        };
        match &mut self.form {
            MsgForm::Label { cont, .. } => fix(cont),
            MsgForm::Chan { passed, cont } => {
                fix(passed);
                fix(cont);
            }
            MsgForm::Close => {}
        }
    }

    /// The message read as a process term.
    pub fn as_proc(&self) -> Proc {
        let p = |kind| Proc::new(kind, Span::default());
        let c = self.provides.clone();
        match &self.form {
            MsgForm::Close => p(ProcKind::Close { chan: c }),
            MsgForm::Label { label, cont } => {
                let fwd = p(ProcKind::Forward { offer: c.clone(), target: cont.clone() });
                let chan = if self.positive { c } else { cont.clone() };
                p(ProcKind::SendLabel { chan, label: label.clone(), cont: Box::new(fwd) })
            }
            MsgForm::Chan { passed, cont } => {
                let fwd = p(ProcKind::Forward { offer: c.clone(), target: cont.clone() });
                let chan = if self.positive { c } else { cont.clone() };
                p(ProcKind::SendChan { chan, payload: passed.clone(), cont: Box::new(fwd) })
            }
        }
    }
}

impl fmt::Display for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "msg({}, {})", self.provides, crate::syntax::print_proc(&self.as_proc()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Obj {
    Proc { provides: String, body: Proc },
    Msg(Msg),
}

impl Obj {
    pub fn provides(&self) -> &str {
        match self {
            Obj::Proc { provides, .. } => provides,
            Obj::Msg(m) => &m.provides,
        }
    }

    /// Channels this object is a client of.
    pub fn uses(&self) -> Vec<String> {
        match self {
            Obj::Proc { provides, body } => {
                body.free_channels().into_iter().filter(|c| c != provides).collect()
            }
            Obj::Msg(m) => m.uses().into_iter().cloned().collect(),
        }
    }

    /// Receiving on its own channel, sending along it, or forwarding.
    pub fn is_poised(&self) -> bool {
        match self {
            Obj::Msg(m) => m.positive,
            Obj::Proc { provides, body } => match &body.kind {
                ProcKind::Case { chan, .. } | ProcKind::RecvChan { chan, .. } => chan == provides,
                ProcKind::Forward { .. } => true,
                _ => false,
            },
        }
    }
}

impl fmt::Display for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obj::Proc { provides, body } => {
                write!(f, "proc({provides}, {})", crate::syntax::print_proc(body))
            }
            Obj::Msg(m) => m.fmt(f),
        }
    }
}

/// Objects keyed by creation order, with a type for every channel.
#[derive(Debug, Clone, Default)]
pub struct Configuration {
    objects: BTreeMap<u64, Obj>,
    next_obj: u64,
    next_chan: u64,
    pub types: HashMap<String, TypeExpr>,
    /// Channel observed from outside.
    pub external: String,
}

impl Configuration {
    pub fn objects(&self) -> impl Iterator<Item = &Obj> {
        self.objects.values()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn insert(&mut self, obj: Obj) -> u64 {
        let id = self.next_obj;
        self.next_obj += 1;
        self.objects.insert(id, obj);
        id
    }

    pub fn fresh_chan(&mut self) -> String {
        let c = format!("#{}", self.next_chan);
        self.next_chan += 1;
        c
    }

    pub fn is_poised(&self) -> bool {
        self.objects.values().all(Obj::is_poised)
    }

    /// The configuration `proc(#0, P)` for a closed process without arguments.
    pub fn spawn_main(sig: &Signature, name: &str) -> Result<Self, RuntimeError> {
        let decl = sig.decls.get(name).ok_or_else(|| RuntimeError::UnknownProcess(name.into()))?;
        let def = sig.defs.get(name).ok_or_else(|| RuntimeError::MissingDefinition(name.into()))?;
        if !decl.params.is_empty() || !decl.uses.is_empty() || !def.args.is_empty() {
            return Err(RuntimeError::NotClosed(name.into()));
        }
        let mut cfg = Configuration::default();
        let c = cfg.fresh_chan();
        let body = def.body.subst_chans(&HashMap::from([(def.offer.clone(), c.clone())]));
        cfg.types.insert(c.clone(), decl.offer.1.clone());
        cfg.external = c.clone();
        cfg.insert(Obj::Proc { provides: c, body });
        Ok(cfg)
    }

    fn provider_index(&self) -> HashMap<&str, u64> {
        self.objects.iter().map(|(id, o)| (o.provides(), *id)).collect()
    }

    /// Observable behaviour along the external channel.
    pub fn transcript(&self) -> Transcript {
        let providers = self.provider_index();
        self.observe(&self.external, &providers)
    }

    fn observe(&self, chan: &str, providers: &HashMap<&str, u64>) -> Transcript {
        let mut events = Vec::new();
        let mut c = chan.to_string();
        loop {
            let Some(Obj::Msg(m)) = providers.get(c.as_str()).map(|id| &self.objects[id]) else {
                events.push(Event::Pending);
                break;
            };
            if !m.positive {
                events.push(Event::Pending);
                break;
            }
            match &m.form {
                MsgForm::Close => {
                    events.push(Event::Close);
                    break;
                }
                MsgForm::Label { label, cont } => {
                    events.push(Event::Label(label.clone()));
                    c = cont.clone();
                }
                MsgForm::Chan { passed, cont } => {
                    events.push(Event::Send(self.observe(passed, providers)));
                    c = cont.clone();
                }
            }
        }
        Transcript(events)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in self.objects.values() {
            writeln!(f, "{o}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Label(String),
    Send(Transcript),
    Close,
    /// The provider has not sent anything further.
    Pending,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript(pub Vec<Event>);

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match e {
                Event::Label(l) => f.write_str(l)?,
                Event::Send(t) => write!(f, "send({t})")?,
                Event::Close => f.write_str("close")?,
                Event::Pending => f.write_str("...")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    PlusS,
    PlusC,
    WithS,
    WithC,
    TensorS,
    TensorC,
    LolliS,
    LolliC,
    OneS,
    OneC,
    IdPlusC,
    IdMinusC,
    DefC,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::PlusS => "⊕S",
            Rule::PlusC => "⊕C",
            Rule::WithS => "&S",
            Rule::WithC => "&C",
            Rule::TensorS => "⊗S",
            Rule::TensorC => "⊗C",
            Rule::LolliS => "⊸S",
            Rule::LolliC => "⊸C",
            Rule::OneS => "1S",
            Rule::OneC => "1C",
            Rule::IdPlusC => "id+C",
            Rule::IdMinusC => "id-C",
            Rule::DefC => "defC",
        })
    }
}

/// A rewrite that fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fired {
    pub rule: Rule,
    /// Channel provided by the object that drove the step.
    pub chan: String,
}

impl fmt::Display for Fired {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.rule, self.chan)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("process `{0}` has no definition")]
    MissingDefinition(String),
    #[error("process `{0}` must take no type parameters and no channels")]
    NotClosed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Objects in creation order, resuming after the last one that fired.
    #[default]
    RoundRobin,
    /// The object that has been enabled the longest fires first.
    Fifo,
}

/// Which object fires and with which partner.
#[derive(Debug, Clone, Copy)]
struct Plan {
    rule: Rule,
    actor: u64,
    partner: Option<u64>,
}

pub struct Machine<'s> {
    sig: &'s Signature,
    pub config: Configuration,
    policy: Policy,
    cursor: u64,
    enabled_since: HashMap<u64, u64>,
    pub steps: u64,
}

impl<'s> Machine<'s> {
    pub fn new(sig: &'s Signature, config: Configuration, policy: Policy) -> Self {
        Machine { sig, config, policy, cursor: 0, enabled_since: HashMap::new(), steps: 0 }
    }

    fn message_providing(&self, providers: &HashMap<&str, u64>, c: &str) -> Option<(u64, &Msg)> {
        let id = *providers.get(c)?;
        match &self.config.objects[&id] {
            Obj::Msg(m) => Some((id, m)),
            Obj::Proc { .. } => None,
        }
    }

    /// A negative message whose continuation is `c`.
    fn negative_on(&self, users: &HashMap<&str, u64>, c: &str) -> Option<(u64, &Msg)> {
        let id = *users.get(c)?;
        match &self.config.objects[&id] {
            Obj::Msg(m) if !m.positive && m.uses().last().is_some_and(|k| *k == c) => Some((id, m)),
            _ => None,
        }
    }

    fn plan_for(
        &self,
        id: u64,
        providers: &HashMap<&str, u64>,
        users: &HashMap<&str, u64>,
    ) -> Option<Plan> {
        let Obj::Proc { provides, body } = &self.config.objects[&id] else { return None };
        let plan = |rule, partner| Some(Plan { rule, actor: id, partner });
        match &body.kind {
            ProcKind::SendLabel { chan, .. } => plan(if chan == provides { Rule::PlusS } else { Rule::WithS }, None),
            ProcKind::SendChan { chan, .. } => plan(if chan == provides { Rule::TensorS } else { Rule::LolliS }, None),
            ProcKind::Close { .. } => plan(Rule::OneS, None),
            ProcKind::Spawn { .. } | ProcKind::TailCall { .. } => plan(Rule::DefC, None),
            ProcKind::Case { chan, .. } => {
                if chan == provides {
                    let (m, msg) = self.negative_on(users, chan)?;
                    matches!(msg.form, MsgForm::Label { .. }).then_some(Plan { rule: Rule::WithC, actor: id, partner: Some(m) })
                } else {
                    let (m, msg) = self.message_providing(providers, chan)?;
                    (msg.positive && matches!(msg.form, MsgForm::Label { .. }))
                        .then_some(Plan { rule: Rule::PlusC, actor: id, partner: Some(m) })
                }
            }
            ProcKind::RecvChan { chan, .. } => {
                if chan == provides {
                    let (m, msg) = self.negative_on(users, chan)?;
                    matches!(msg.form, MsgForm::Chan { .. }).then_some(Plan { rule: Rule::LolliC, actor: id, partner: Some(m) })
                } else {
                    let (m, msg) = self.message_providing(providers, chan)?;
                    (msg.positive && matches!(msg.form, MsgForm::Chan { .. }))
                        .then_some(Plan { rule: Rule::TensorC, actor: id, partner: Some(m) })
                }
            }
            ProcKind::Wait { chan, .. } => {
                let (m, msg) = self.message_providing(providers, chan)?;
                (msg.positive && msg.form == MsgForm::Close).then_some(Plan { rule: Rule::OneC, actor: id, partner: Some(m) })
            }
            ProcKind::Forward { offer, target } => {
                if let Some((m, msg)) = self.message_providing(providers, target) {
                    if msg.positive {
                        return plan(Rule::IdPlusC, Some(m));
                    }
                }
                let m = *users.get(offer.as_str())?;
                matches!(self.config.objects[&m], Obj::Msg(_)).then_some(Plan { rule: Rule::IdMinusC, actor: id, partner: Some(m) })
            }
        }
    }

    fn all_plans(&self) -> Vec<Plan> {
        let providers = self.config.provider_index();
        let mut users: HashMap<&str, u64> = HashMap::new();
        for (id, o) in &self.config.objects {
            if let Obj::Msg(m) = o {
                for u in m.uses() {
                    users.insert(u, *id);
                }
            }
        }
        self.config.objects.keys().filter_map(|&id| self.plan_for(id, &providers, &users)).collect()
    }

    /// Fires one enabled rule, or returns `None` when nothing is enabled.
    pub fn step(&mut self) -> Option<Fired> {
        let plans = self.all_plans();
        if plans.is_empty() {
            return None;
        }
        let chosen = match self.policy {
            Policy::RoundRobin => *plans
                .iter()
                .find(|p| p.actor >= self.cursor)
                .unwrap_or(&plans[0]),
            Policy::Fifo => {
                let live: HashSet<u64> = plans.iter().map(|p| p.actor).collect();
                self.enabled_since.retain(|id, _| live.contains(id));
                for p in &plans {
                    self.enabled_since.entry(p.actor).or_insert(self.steps);
                }
                *plans
                    .iter()
                    .min_by_key(|p| (self.enabled_since[&p.actor], p.actor))
                    .expect("nonempty")
            }
        };
        self.cursor = chosen.actor + 1;
        self.enabled_since.remove(&chosen.actor);
        self.steps += 1;
        Some(self.apply(chosen))
    }

    fn type_of(&self, c: &str) -> Option<TypeExpr> {
        let t = self.config.types.get(c)?;
        unfold(self.sig, t).ok()
    }

    fn set_type(&mut self, c: &str, t: Option<TypeExpr>) {
        if let Some(t) = t {
            self.config.types.insert(c.to_string(), t);
        }
    }

    fn take_msg(&mut self, id: Option<u64>) -> Msg {
        match self.config.objects.remove(&id.expect("rule has a partner")) {
            Some(Obj::Msg(m)) => m,
            _ => unreachable!("partner is a message"),
        }
    }

    fn apply(&mut self, plan: Plan) -> Fired {
        let Some(Obj::Proc { provides, body }) = self.config.objects.remove(&plan.actor) else {
            unreachable!("actor is a process")
        };
        let fired = Fired { rule: plan.rule, chan: provides.clone() };
        let rename = |p: &Proc, from: &str, to: &str| {
            p.subst_chans(&HashMap::from([(from.to_string(), to.to_string())]))
        };
        let put = |cfg: &mut Configuration, obj: Obj| {
            cfg.objects.insert(plan.actor, obj);
        };
        match (plan.rule, body.kind) {
            (Rule::PlusS | Rule::WithS, ProcKind::SendLabel { chan, label, cont }) => {
                let c2 = self.config.fresh_chan();
                let branch = |t: Option<TypeExpr>| match t {
                    Some(TypeExpr::Internal(bs) | TypeExpr::External(bs)) => {
                        bs.into_iter().find(|(l, _)| *l == label).map(|(_, t)| t)
                    }
                    _ => None,
                };
                let next = branch(self.type_of(&chan));
                self.set_type(&c2, next);
                let positive = plan.rule == Rule::PlusS;
                let msg = if positive {
                    Msg { provides: chan.clone(), form: MsgForm::Label { label, cont: c2.clone() }, positive }
                } else {
                    Msg { provides: c2.clone(), form: MsgForm::Label { label, cont: chan.clone() }, positive }
                };
                let proc_chan = if positive { c2.clone() } else { provides.clone() };
                put(&mut self.config, Obj::Proc { provides: proc_chan, body: rename(&cont, &chan, &c2) });
                self.config.insert(Obj::Msg(msg));
            }
            (Rule::TensorS | Rule::LolliS, ProcKind::SendChan { chan, payload, cont }) => {
                let c2 = self.config.fresh_chan();
                let next = match self.type_of(&chan) {
                    Some(TypeExpr::Tensor(_, b) | TypeExpr::Lolli(_, b)) => Some(*b),
                    _ => None,
                };
                self.set_type(&c2, next);
                let positive = plan.rule == Rule::TensorS;
                let msg = if positive {
                    Msg { provides: chan.clone(), form: MsgForm::Chan { passed: payload, cont: c2.clone() }, positive }
                } else {
                    Msg { provides: c2.clone(), form: MsgForm::Chan { passed: payload, cont: chan.clone() }, positive }
                };
                let proc_chan = if positive { c2.clone() } else { provides.clone() };
                put(&mut self.config, Obj::Proc { provides: proc_chan, body: rename(&cont, &chan, &c2) });
                self.config.insert(Obj::Msg(msg));
            }
            (Rule::OneS, ProcKind::Close { chan }) => {
                put(&mut self.config, Obj::Msg(Msg { provides: chan, form: MsgForm::Close, positive: true }));
            }
            (Rule::PlusC | Rule::WithC, ProcKind::Case { chan, branches }) => {
                let msg = self.take_msg(plan.partner);
                let MsgForm::Label { label, cont } = msg.form else { unreachable!() };
                let (_, p) = branches.into_iter().find(|(l, _)| *l == label).expect("checked program");
                if plan.rule == Rule::PlusC {
                    put(&mut self.config, Obj::Proc { provides, body: rename(&p, &chan, &cont) });
                } else {
                    let c2 = msg.provides;
                    put(&mut self.config, Obj::Proc { provides: c2.clone(), body: rename(&p, &chan, &c2) });
                }
            }
            (Rule::TensorC | Rule::LolliC, ProcKind::RecvChan { chan, bound, cont }) => {
                let msg = self.take_msg(plan.partner);
                let MsgForm::Chan { passed, cont: k } = msg.form else { unreachable!() };
                let (new_provides, new_chan) =
                    if plan.rule == Rule::TensorC { (provides, k) } else { (msg.provides.clone(), msg.provides) };
                let map = HashMap::from([(chan, new_chan), (bound, passed)]);
                put(&mut self.config, Obj::Proc { provides: new_provides, body: cont.subst_chans(&map) });
            }
            (Rule::OneC, ProcKind::Wait { cont, .. }) => {
                self.take_msg(plan.partner);
                put(&mut self.config, Obj::Proc { provides, body: *cont });
            }
            (Rule::IdPlusC, ProcKind::Forward { offer, .. }) => {
                let mut msg = self.take_msg(plan.partner);
                msg.provides = offer;
                put(&mut self.config, Obj::Msg(msg));
            }
            (Rule::IdMinusC, ProcKind::Forward { offer, target }) => {
                let id = plan.partner.expect("partner");
                if let Some(Obj::Msg(m)) = self.config.objects.get_mut(&id) {
                    m.rename_used(&offer, &target);
                }
            }
            (Rule::DefC, ProcKind::Spawn { bound, name, type_args, chan_args, cont }) => {
                let a = self.config.fresh_chan();
                let (body, offer_t) = self.instantiate(&name, &type_args, &chan_args, &a);
                self.set_type(&a, Some(offer_t));
                put(&mut self.config, Obj::Proc { provides, body: rename(&cont, &bound, &a) });
                self.config.insert(Obj::Proc { provides: a, body });
            }
            (Rule::DefC, ProcKind::TailCall { offer, name, type_args, chan_args }) => {
                let (body, _) = self.instantiate(&name, &type_args, &chan_args, &offer);
                put(&mut self.config, Obj::Proc { provides, body });
            }
            (rule, kind) => unreachable!("{rule} planned for {kind:?}"),
        }
        fired
    }

    /// The body of `name` with its offer at `at` and its arguments replaced.
    fn instantiate(&self, name: &str, type_args: &[TypeExpr], args: &[String], at: &str) -> (Proc, TypeExpr) {
        let decl = &self.sig.decls[name];
        let def = &self.sig.defs[name];
        let body = def.body.subst_types(&substitution(&def.params, type_args));
        let mut map: HashMap<String, String> =
            def.args.iter().cloned().zip(args.iter().cloned()).collect();
        map.insert(def.offer.clone(), at.to_string());
        let offer_t = decl.offer.1.subst(&substitution(&decl.params, type_args));
        (body.subst_chans(&map), offer_t)
    }

    pub fn run(&mut self, max_steps: u64, mut on_step: impl FnMut(&Fired, &Configuration)) -> Status {
        while self.steps < max_steps {
            match self.step() {
                Some(f) => on_step(&f, &self.config),
                None => {
                    let stuck: Vec<String> = self
                        .config
                        .objects()
                        .filter(|o| !o.is_poised())
                        .map(|o| o.to_string())
                        .collect();
                    return if stuck.is_empty() { Status::Poised } else { Status::Stuck(stuck) };
                }
            }
        }
        Status::StepLimit
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Poised,
    /// Objects that can neither step nor are poised.
    Stuck(Vec<String>),
    StepLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Poised => f.write_str("poised"),
            Status::Stuck(objs) => write!(f, "stuck: {}", objs.join("; ")),
            Status::StepLimit => f.write_str("step-limit"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub transcript: Transcript,
    pub status: Status,
    pub steps: u64,
    pub config: Configuration,
}

/// Runs `main` until nothing can step or the budget runs out.
pub fn run(sig: &Signature, main: &str, policy: Policy, max_steps: u64) -> Result<RunResult, RuntimeError> {
    let cfg = Configuration::spawn_main(sig, main)?;
    let mut m = Machine::new(sig, cfg, policy);
    let status = m.run(max_steps, |_, _| {});
    Ok(RunResult { transcript: m.config.transcript(), status, steps: m.steps, config: m.config })
}

pub const DEFAULT_STEPS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("channel `{0}` is provided by more than one object")]
    DuplicateProvider(String),
    #[error("channel `{0}` is used by more than one object")]
    SharedChannel(String),
    #[error("channel `{0}` is used but nothing provides it")]
    Unprovided(String),
    #[error("channel `{0}` has no recorded type")]
    Untyped(String),
    #[error("objects cannot be ordered providers before clients")]
    NoValidOrdering,
    #[error("object {object}: {error}", error = .error.kind)]
    Object { object: String, error: Box<TypeError> },
}

/// Types configurations against a signature: `· ⊩ 𝒮 :: Δ`.
pub struct ConfigTyper<'s> {
    sig: &'s Signature,
    renamed: RenamedSignature,
    seeds: Vec<Closure>,
    depth: usize,
}

impl<'s> ConfigTyper<'s> {
    /// Fails if the signature's eqtypes do not validate.
    pub fn new(sig: &'s Signature, depth: usize) -> Option<Self> {
        let renamed = rename_signature(sig);
        let seeds = seed_and_validate(&renamed, depth).ok()?;
        Some(ConfigTyper { sig, renamed, seeds, depth })
    }

    /// Checks that the objects can be ordered with providers before their
    /// clients, and types each one. Returns the channels left for the outside.
    pub fn check(&self, cfg: &Configuration) -> Result<Vec<String>, ConfigError> {
        let mut provided: HashMap<&str, usize> = HashMap::new();
        let objs: Vec<&Obj> = cfg.objects().collect();
        for (i, o) in objs.iter().enumerate() {
            if provided.insert(o.provides(), i).is_some() {
                return Err(ConfigError::DuplicateProvider(o.provides().into()));
            }
        }
        let uses: Vec<Vec<String>> = objs.iter().map(|o| o.uses()).collect();
        let mut used: HashSet<&str> = HashSet::new();
        let mut indegree = vec![0usize; objs.len()];
        let mut clients: Vec<Vec<usize>> = vec![Vec::new(); objs.len()];
        for (i, us) in uses.iter().enumerate() {
            for u in us {
                if !used.insert(u) {
                    return Err(ConfigError::SharedChannel(u.clone()));
                }
                let Some(&p) = provided.get(u.as_str()) else {
                    return Err(ConfigError::Unprovided(u.clone()));
                };
                clients[p].push(i);
                indegree[i] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..objs.len()).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = ready.pop() {
            seen += 1;
            for &c in &clients[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(c);
                }
            }
        }
        if seen != objs.len() {
            return Err(ConfigError::NoValidOrdering);
        }

        let mut checker = Checker::new(self.sig, &self.renamed, self.seeds.clone(), self.depth);
        for (o, us) in objs.iter().zip(&uses) {
            let ty = |c: &str| cfg.types.get(c).cloned().ok_or_else(|| ConfigError::Untyped(c.into()));
            let mut channels = indexmap::IndexMap::new();
            for u in us {
                channels.insert(u.clone(), ty(u)?);
            }
            let ctx = TypingContext {
                typevars: Vec::new(),
                channels,
                offered: (o.provides().to_string(), ty(o.provides())?),
            };
            let body = match o {
                Obj::Proc { body, .. } => body.clone(),
                Obj::Msg(m) => m.as_proc(),
            };
            checker.set_process(o.provides());
            checker
                .check_process(ctx, &body)
                .map_err(|error| ConfigError::Object { object: o.to_string(), error: Box::new(error) })?;
        }
        let mut external: Vec<String> =
            objs.iter().map(|o| o.provides().to_string()).filter(|c| !used.contains(c.as_str())).collect();
        external.sort();
        Ok(external)
    }
}
