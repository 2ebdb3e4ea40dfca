//! Dynamic pattern unification.
//!
//! Heterogeneous constraints are split into a type equation and a term
//! equation guarded by it. Homogeneous equations are simplified in a
//! type-directed way (η for functions and pairs), rigid structure is
//! decomposed, and a meta-variable applied to distinct variables is solved
//! by abstraction. Anything that cannot be decided yet goes to sleep on the
//! meta-variables that block it and is woken when one of them is solved.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::elaborate::Constraint;
use crate::normalize::{
    apply_meta_subst, elim_app, elim_fst, elim_snd, instantiate, whnf, Blocked, Env, NormError,
};
use crate::pretty::show;
use crate::syntax::{
    collect_metas, lookup_var, metas, rename_free, shift, Context, DefEnv, Elim, Head, MetaId,
    MetaSubst, Signature, Term,
};
use crate::typecheck::{check_meta_subst, convert, show_metas, Conv, TypeError, ValidityError};

/// Default bound on solver steps.
pub const DEFAULT_MAX_STEPS: usize = 10_000;

type EntryId = usize;

/// `Γ ⊢ t = u : A`, considered only once `guard` is solved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousEq {
    pub ctx: Context,
    pub lhs: Term,
    pub rhs: Term,
    pub ty: Term,
    pub guard: Option<EntryId>,
}

impl HomogeneousEq {
    pub fn show(&self) -> String {
        format!(
            "{} |- {} = {} : {}",
            crate::pretty::show_context(&self.ctx),
            show(&self.lhs, &self.ctx),
            show(&self.rhs, &self.ctx),
            show(&self.ty, &self.ctx)
        )
    }
}

/// `split`: the type equation and the term equation guarded on it. The
/// guard of the term equation refers to entry 0, the type equation.
pub fn split(c: &Constraint) -> (HomogeneousEq, HomogeneousEq) {
    let type_eq = HomogeneousEq {
        ctx: c.ctx.clone(),
        lhs: c.lhs_ty.clone(),
        rhs: c.rhs_ty.clone(),
        ty: Term::Set,
        guard: None,
    };
    let term_eq = HomogeneousEq {
        ctx: c.ctx.clone(),
        lhs: c.lhs.clone(),
        rhs: c.rhs.clone(),
        ty: c.lhs_ty.clone(),
        guard: Some(0),
    };
    (type_eq, term_eq)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    /// Distinct rigid heads or constructors.
    Clash,
    /// The meta-variable occurs rigidly in its candidate solution.
    Occurs(MetaId),
    /// An internal invariant broke (ill-typed input reached the solver).
    Internal(String),
}

/// A definite mismatch, with both sides in weak-head normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub ctx: Context,
    pub lhs: Term,
    pub rhs: Term,
    pub ty: Term,
    pub kind: FailureKind,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = (show(&self.lhs, &self.ctx), show(&self.rhs, &self.ctx));
        match &self.kind {
            FailureKind::Clash => write!(f, "cannot unify {} with {}", l, r),
            FailureKind::Occurs(m) => write!(f, "{} occurs in {}", m, r),
            FailureKind::Internal(msg) => write!(f, "internal error on {} = {}: {}", l, r, msg),
        }
    }
}

impl From<NormError> for FailureKind {
    fn from(e: NormError) -> Self {
        FailureKind::Internal(format!("{}", e))
    }
}

impl From<TypeError> for FailureKind {
    fn from(e: TypeError) -> Self {
        FailureKind::Internal(format!("{}", e))
    }
}

/// A constraint left over in a stuck run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Residual {
    /// A heterogeneous constraint whose types are not yet known equal.
    Hetero { constraint: Constraint, blockers: BTreeSet<MetaId> },
    Homo { eq: HomogeneousEq, blockers: BTreeSet<MetaId> },
}

impl Residual {
    pub fn blockers(&self) -> &BTreeSet<MetaId> {
        match self {
            Residual::Hetero { blockers, .. } | Residual::Homo { blockers, .. } => blockers,
        }
    }

    pub fn show(&self) -> String {
        let body = match self {
            Residual::Hetero { constraint, .. } => constraint.show(),
            Residual::Homo { eq, .. } => eq.show(),
        };
        format!("{}  [blocked on {}]", body, show_metas(self.blockers()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Every constraint solved. `signature` holds the meta-variables left
    /// uninstantiated, with instantiated types.
    Solved { theta: MetaSubst, signature: Signature },
    /// Some constraints postponed for good. `theta` holds the
    /// instantiations made.
    Stuck {
        theta: MetaSubst,
        signature: Signature,
        residuals: Vec<Residual>,
        step_limit_hit: bool,
    },
    Failed { theta: MetaSubst, failure: Failure },
}

impl Outcome {
    pub fn theta(&self) -> &MetaSubst {
        match self {
            Outcome::Solved { theta, .. } | Outcome::Stuck { theta, .. } | Outcome::Failed { theta, .. } => {
                theta
            }
        }
    }

    pub fn is_solved(&self) -> bool {
        matches!(self, Outcome::Solved { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Pop,
    Solve { meta: MetaId, value: Term },
    Wake { meta: MetaId, count: usize },
    Postpone(BTreeSet<MetaId>),
    Fail { lhs: String, rhs: String },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Pop => f.write_str("POP"),
            TraceEvent::Solve { meta, value } => write!(f, "SOLVE {} := {}", meta, value),
            TraceEvent::Wake { meta, count } => write!(f, "WAKE {} ({} constraints)", meta, count),
            TraceEvent::Postpone(ms) => write!(f, "POSTPONE on {}", show_metas(ms)),
            TraceEvent::Fail { lhs, rhs } => write!(f, "FAIL {} ≠ {}", lhs, rhs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveConfig {
    pub max_steps: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Hetero(Constraint),
    Homo(HomogeneousEq),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum State {
    Queued,
    Sleeping(BTreeSet<MetaId>),
    AwaitingGuard,
    /// Replaced by its children.
    Decomposed,
    Solved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Split {
    None,
    /// Children are the type equation and the guarded term equation.
    TypeThenTerm,
    /// Children are the componentwise heterogeneous constraints.
    Components,
}

#[derive(Debug, Clone)]
struct Entry {
    kind: Kind,
    parent: Option<EntryId>,
    children: Vec<EntryId>,
    pending: usize,
    split: Split,
    state: State,
}

/// A sub-equation produced by simplification; `guard` indexes an earlier
/// sibling.
struct Child {
    ctx: Context,
    lhs: Term,
    rhs: Term,
    ty: Term,
    guard: Option<usize>,
}

enum Step {
    Solved,
    Decompose(Vec<Child>),
    Block(BTreeSet<MetaId>),
    /// A meta-variable was η-expanded; look at the entry again.
    Retry,
    Fail(Failure),
}

struct Solver<'a, 't> {
    defs: &'a DefEnv,
    sig: Signature,
    theta: MetaSubst,
    entries: Vec<Entry>,
    queue: VecDeque<EntryId>,
    wake: BTreeMap<MetaId, Vec<EntryId>>,
    guard_waiters: BTreeMap<EntryId, Vec<EntryId>>,
    trace: &'t mut dyn FnMut(&TraceEvent),
}

fn singleton(m: MetaId) -> BTreeSet<MetaId> {
    let mut s = BTreeSet::new();
    s.insert(m);
    s
}

fn fail(ctx: &Context, lhs: &Term, rhs: &Term, ty: &Term, kind: FailureKind) -> Step {
    Step::Fail(Failure {
        ctx: ctx.clone(),
        lhs: lhs.clone(),
        rhs: rhs.clone(),
        ty: ty.clone(),
        kind,
    })
}

fn child(ctx: &Context, lhs: Term, rhs: Term, ty: Term, guard: Option<usize>) -> Child {
    Child {
        ctx: ctx.clone(),
        lhs,
        rhs,
        ty,
        guard,
    }
}

/// Whether `m` occurs in `t` outside the arguments of other meta-variables
/// and of unfoldable constants, where it could still disappear.
fn occurs_rigidly(defs: &DefEnv, t: &Term, m: MetaId) -> bool {
    match t {
        Term::Set | Term::Bool | Term::True | Term::False | Term::Nat | Term::Zero => false,
        Term::Suc(a) | Term::Lam(a) => occurs_rigidly(defs, a, m),
        Term::Pi(a, b) | Term::Prod(a, b) | Term::Pair(a, b) => {
            occurs_rigidly(defs, a, m) || occurs_rigidly(defs, b, m)
        }
        Term::Neutral(head, elims) => match head {
            Head::Meta(n) if *n == m => true,
            Head::Meta(_) => false,
            Head::Def(d) if defs.get(d).is_some_and(|def| def.body.is_some()) => false,
            _ => elims.iter().any(|e| match e {
                Elim::App(u) => occurs_rigidly(defs, u, m),
                Elim::If {
                    motive,
                    then_branch,
                    else_branch,
                } => {
                    occurs_rigidly(defs, motive, m)
                        || occurs_rigidly(defs, then_branch, m)
                        || occurs_rigidly(defs, else_branch, m)
                }
                Elim::Fst | Elim::Snd => false,
            }),
        },
    }
}

/// The variables of a Miller pattern spine, or `None` if the spine is not
/// a list of distinct variables.
fn pattern_vars(elims: &[Elim]) -> Option<Vec<usize>> {
    let mut vars = Vec::with_capacity(elims.len());
    for e in elims {
        match e {
            Elim::App(Term::Neutral(Head::Var(i), es)) if es.is_empty() && !vars.contains(i) => vars.push(*i),
            _ => return None,
        }
    }
    Some(vars)
}

fn abstract_over(n: usize, body: Term) -> Term {
    (0..n).fold(body, |t, _| Term::lam(t))
}

impl Solver<'_, '_> {
    fn env(&self) -> Env<'_> {
        Env {
            sig: &self.sig,
            defs: self.defs,
            solution: Some(&self.theta),
        }
    }

    fn zonk(&self, t: &Term) -> Result<Term, NormError> {
        apply_meta_subst(&self.theta, t)
    }

    fn zonk_ctx(&self, ctx: &Context) -> Result<Context, NormError> {
        ctx.try_map_types(|ty| self.zonk(ty))
    }

    fn emit(&mut self, e: TraceEvent) {
        (self.trace)(&e);
    }

    fn push_entry(&mut self, kind: Kind, parent: Option<EntryId>, guard: Option<EntryId>) -> EntryId {
        let id = self.entries.len();
        let ready = guard.is_none_or(|g| self.entries[g].state == State::Solved);
        self.entries.push(Entry {
            kind,
            parent,
            children: Vec::new(),
            pending: 0,
            split: Split::None,
            state: if ready { State::Queued } else { State::AwaitingGuard },
        });
        if ready {
            self.queue.push_back(id);
        } else if let Some(g) = guard {
            self.guard_waiters.entry(g).or_default().push(id);
        }
        id
    }

    fn instantiate_meta(&mut self, m: MetaId, value: Term) {
        self.emit(TraceEvent::Solve {
            meta: m,
            value: value.clone(),
        });
        self.theta.insert(m, value);
        let sleepers = self.wake.remove(&m).unwrap_or_default();
        let mut count = 0;
        for id in sleepers {
            if matches!(self.entries[id].state, State::Sleeping(_)) {
                self.entries[id].state = State::Queued;
                self.queue.push_back(id);
                count += 1;
            }
        }
        if count > 0 {
            self.emit(TraceEvent::Wake { meta: m, count });
        }
    }

    fn mark_solved(&mut self, id: EntryId) {
        let mut next = Some(id);
        while let Some(id) = next {
            self.entries[id].state = State::Solved;
            for w in self.guard_waiters.remove(&id).unwrap_or_default() {
                if self.entries[w].state == State::AwaitingGuard {
                    self.entries[w].state = State::Queued;
                    self.queue.push_back(w);
                }
            }
            next = None;
            if let Some(p) = self.entries[id].parent {
                self.entries[p].pending -= 1;
                if self.entries[p].pending == 0 {
                    next = Some(p);
                }
            }
        }
    }

    fn sleep(&mut self, id: EntryId, blockers: BTreeSet<MetaId>) {
        debug_assert!(!blockers.is_empty());
        self.emit(TraceEvent::Postpone(blockers.clone()));
        for m in &blockers {
            self.wake.entry(*m).or_default().push(id);
        }
        self.entries[id].state = State::Sleeping(blockers);
    }

    /// Processes one queued entry. Returns a failure to abort the run.
    fn process(&mut self, id: EntryId) -> Result<(), Failure> {
        match self.entries[id].kind.clone() {
            Kind::Hetero(c) => self.process_hetero(id, c),
            Kind::Homo(eq) => self.process_homo(id, eq),
        }
    }

    fn internal(ctx: &Context, lhs: &Term, rhs: &Term, kind: FailureKind) -> Failure {
        Failure {
            ctx: ctx.clone(),
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            ty: Term::Set,
            kind,
        }
    }

    fn zonk_constraint(&self, c: &Constraint) -> Result<Constraint, NormError> {
        Ok(Constraint {
            ctx: self.zonk_ctx(&c.ctx)?,
            lhs: self.zonk(&c.lhs)?,
            lhs_ty: self.zonk(&c.lhs_ty)?,
            rhs: self.zonk(&c.rhs)?,
            rhs_ty: self.zonk(&c.rhs_ty)?,
        })
    }

    fn process_hetero(&mut self, id: EntryId, c: Constraint) -> Result<(), Failure> {
        let err = |e: NormError| Self::internal(&c.ctx, &c.lhs, &c.rhs, e.into());
        let mut c = self.zonk_constraint(&c).map_err(err)?;
        let a = whnf(self.env(), &c.lhs_ty).map_err(err)?;
        let b = whnf(self.env(), &c.rhs_ty).map_err(err)?;
        if let (Blocked::NotBlocked(Term::Prod(a1, a2)), Blocked::NotBlocked(Term::Prod(b1, b2))) = (&a, &b) {
            // Pairs are compared componentwise before their types are known
            // equal, so that a pair meta-variable is expanded early.
            let mut expanded = false;
            for side in [&c.lhs, &c.rhs] {
                if let Blocked::BlockedOn(_, stuck) = whnf(self.env(), side).map_err(err)? {
                    if let Some(m) = stuck.meta_head() {
                        expanded |= self.eta_expand(m).map_err(err)?;
                    }
                }
            }
            if expanded {
                c = self.zonk_constraint(&c).map_err(err)?;
            }
            let comps = [
                (elim_fst(&c.lhs), (**a1).clone(), elim_fst(&c.rhs), (**b1).clone()),
                (elim_snd(&c.lhs), (**a2).clone(), elim_snd(&c.rhs), (**b2).clone()),
            ];
            let mut children = Vec::with_capacity(2);
            for (l, lt, r, rt) in comps {
                children.push(Constraint {
                    ctx: c.ctx.clone(),
                    lhs: l.map_err(err)?,
                    lhs_ty: lt,
                    rhs: r.map_err(err)?,
                    rhs_ty: rt,
                });
            }
            self.entries[id].kind = Kind::Hetero(c);
            self.entries[id].state = State::Decomposed;
            self.entries[id].split = Split::Components;
            self.entries[id].pending = 2;
            for ch in children {
                let cid = self.push_entry(Kind::Hetero(ch), Some(id), None);
                self.entries[id].children.push(cid);
            }
            return Ok(());
        }
        let (type_eq, term_eq) = split(&c);
        self.entries[id].kind = Kind::Hetero(c);
        self.entries[id].state = State::Decomposed;
        self.entries[id].split = Split::TypeThenTerm;
        self.entries[id].pending = 2;
        let tid = self.push_entry(Kind::Homo(type_eq), Some(id), None);
        let term_eq = HomogeneousEq {
            guard: Some(tid),
            ..term_eq
        };
        let eid = self.push_entry(Kind::Homo(term_eq), Some(id), Some(tid));
        self.entries[id].children = alloc::vec![tid, eid];
        Ok(())
    }

    fn process_homo(&mut self, id: EntryId, eq: HomogeneousEq) -> Result<(), Failure> {
        if let Some(g) = eq.guard {
            if self.entries[g].state != State::Solved {
                self.entries[id].state = State::AwaitingGuard;
                self.guard_waiters.entry(g).or_default().push(id);
                return Ok(());
            }
        }
        let err = |e: NormError| Self::internal(&eq.ctx, &eq.lhs, &eq.rhs, e.into());
        let zonked = HomogeneousEq {
            ctx: self.zonk_ctx(&eq.ctx).map_err(err)?,
            lhs: self.zonk(&eq.lhs).map_err(err)?,
            rhs: self.zonk(&eq.rhs).map_err(err)?,
            ty: self.zonk(&eq.ty).map_err(err)?,
            guard: eq.guard,
        };
        self.entries[id].kind = Kind::Homo(zonked.clone());
        let step = match self.simplify(&zonked) {
            Ok(step) => step,
            Err(kind) => fail(&zonked.ctx, &zonked.lhs, &zonked.rhs, &zonked.ty, kind),
        };
        match step {
            Step::Solved => self.mark_solved(id),
            Step::Retry => {
                self.entries[id].state = State::Queued;
                self.queue.push_back(id);
            }
            Step::Block(ms) => self.sleep(id, ms),
            Step::Fail(f) => {
                self.emit(TraceEvent::Fail {
                    lhs: show(&f.lhs, &f.ctx),
                    rhs: show(&f.rhs, &f.ctx),
                });
                return Err(f);
            }
            Step::Decompose(children) => {
                if children.is_empty() {
                    self.mark_solved(id);
                    return Ok(());
                }
                self.entries[id].state = State::Decomposed;
                self.entries[id].pending = children.len();
                let mut ids: Vec<EntryId> = Vec::with_capacity(children.len());
                for ch in children {
                    let guard = ch.guard.map(|i| ids[i]);
                    let eq = HomogeneousEq {
                        ctx: ch.ctx,
                        lhs: ch.lhs,
                        rhs: ch.rhs,
                        ty: ch.ty,
                        guard,
                    };
                    let cid = self.push_entry(Kind::Homo(eq), Some(id), guard);
                    ids.push(cid);
                }
                self.entries[id].children = ids;
            }
        }
        Ok(())
    }

    /// One simplification step on a zonked equation whose guard is solved.
    fn simplify(&mut self, eq: &HomogeneousEq) -> Result<Step, FailureKind> {
        let HomogeneousEq { ctx, lhs, rhs, ty, .. } = eq;
        if lhs == rhs {
            return Ok(Step::Solved);
        }
        let ty_whnf = whnf(self.env(), ty)?;
        match &ty_whnf {
            Blocked::NotBlocked(Term::Pi(dom, cod)) => {
                let ext = ctx.extend("x", (**dom).clone());
                let l = elim_app(&shift(lhs, 1), &Term::var(0))?;
                let r = elim_app(&shift(rhs, 1), &Term::var(0))?;
                Ok(Step::Decompose(alloc::vec![child(&ext, l, r, (**cod).clone(), None)]))
            }
            Blocked::NotBlocked(Term::Prod(a, b)) => {
                let mut expanded = false;
                for side in [lhs, rhs] {
                    if let Blocked::BlockedOn(_, stuck) = whnf(self.env(), side)? {
                        if let Some(m) = stuck.meta_head() {
                            if self.eta_expand(m)? {
                                expanded = true;
                            } else {
                                return Ok(Step::Block(self.type_blockers(m)));
                            }
                        }
                    }
                }
                if expanded {
                    return Ok(Step::Retry);
                }
                Ok(Step::Decompose(alloc::vec![
                    child(ctx, elim_fst(lhs)?, elim_fst(rhs)?, (**a).clone(), None),
                    child(ctx, elim_snd(lhs)?, elim_snd(rhs)?, (**b).clone(), None),
                ]))
            }
            _ => self.structural(ctx, lhs, rhs, &ty_whnf),
        }
    }

    /// Metas whose instantiation could let `m` be η-expanded.
    fn type_blockers(&self, m: MetaId) -> BTreeSet<MetaId> {
        let mut ms = singleton(m);
        if let Some(ty) = self.sig.get(m) {
            if let Ok(ty) = self.zonk(ty) {
                collect_metas(&ty, &mut ms);
            }
        }
        ms.retain(|x| !self.theta.contains(*x));
        if ms.is_empty() {
            ms.insert(m);
        }
        ms
    }

    fn structural(&mut self, ctx: &Context, lhs: &Term, rhs: &Term, ty: &Blocked) -> Result<Step, FailureKind> {
        let l = whnf(self.env(), lhs)?;
        let r = whnf(self.env(), rhs)?;
        if l.term() == r.term() {
            return Ok(Step::Solved);
        }
        let ty_term = ty.term().clone();
        match (&l, &r) {
            (Blocked::BlockedOn(ml, _), Blocked::BlockedOn(mr, _)) => {
                let mut ms = ml.clone();
                ms.extend(mr.iter().copied());
                return Ok(Step::Block(ms));
            }
            (Blocked::BlockedOn(_, flex), Blocked::NotBlocked(other))
            | (Blocked::NotBlocked(other), Blocked::BlockedOn(_, flex)) => {
                return self.try_solve(ctx, flex, other, &ty_term);
            }
            _ => {}
        }
        let (l, r) = (l.into_term(), r.into_term());
        let type_blocked = ty.is_blocked();
        let set = || Term::Set;
        Ok(match (&l, &r) {
            (Term::Set, Term::Set)
            | (Term::Bool, Term::Bool)
            | (Term::Nat, Term::Nat)
            | (Term::True, Term::True)
            | (Term::False, Term::False)
            | (Term::Zero, Term::Zero) => Step::Solved,
            (Term::Suc(m), Term::Suc(n)) => {
                Step::Decompose(alloc::vec![child(ctx, (**m).clone(), (**n).clone(), Term::Nat, None)])
            }
            (Term::Pi(a1, b1), Term::Pi(a2, b2)) => {
                let ext = ctx.extend("x", (**a1).clone());
                Step::Decompose(alloc::vec![
                    child(ctx, (**a1).clone(), (**a2).clone(), set(), None),
                    child(&ext, (**b1).clone(), (**b2).clone(), set(), Some(0)),
                ])
            }
            (Term::Prod(a1, b1), Term::Prod(a2, b2)) => Step::Decompose(alloc::vec![
                child(ctx, (**a1).clone(), (**a2).clone(), set(), None),
                child(ctx, (**b1).clone(), (**b2).clone(), set(), None),
            ]),
            (Term::Lam(_) | Term::Pair(..), _) | (_, Term::Lam(_) | Term::Pair(..)) if type_blocked => {
                Step::Block(ty.blockers())
            }
            (Term::Neutral(h1, es1), Term::Neutral(h2, es2)) => {
                if h1 != h2 || es1.len() != es2.len() {
                    fail(ctx, &l, &r, &ty_term, FailureKind::Clash)
                } else {
                    self.decompose_spines(ctx, h1, es1, es2, &l, &r, &ty_term)?
                }
            }
            _ => fail(ctx, &l, &r, &ty_term, FailureKind::Clash),
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn decompose_spines(
        &mut self,
        ctx: &Context,
        head: &Head,
        es1: &[Elim],
        es2: &[Elim],
        l: &Term,
        r: &Term,
        ty: &Term,
    ) -> Result<Step, FailureKind> {
        let mut head_ty = match head {
            Head::Var(i) => lookup_var(ctx, *i).map_err(TypeError::from)?,
            Head::Def(d) => match self.defs.get(d) {
                Some(def) => def.ty.clone(),
                None => return Err(TypeError::Scope(crate::syntax::ScopeError::UnknownDef(d.clone())).into()),
            },
            Head::Meta(_) => unreachable!("flexible heads are handled before decomposition"),
        };
        let mut cur = Term::Neutral(head.clone(), Vec::new());
        let mut children: Vec<Child> = Vec::new();
        for (e1, e2) in es1.iter().zip(es2) {
            let shape = match whnf(self.env(), &head_ty)? {
                Blocked::NotBlocked(a) => a,
                Blocked::BlockedOn(ms, _) => return Ok(Step::Block(ms)),
            };
            let prev = children.len().checked_sub(1);
            head_ty = match (e1, e2, shape) {
                (Elim::App(a), Elim::App(b), Term::Pi(dom, cod)) => {
                    children.push(child(ctx, a.clone(), b.clone(), *dom, prev));
                    instantiate(&cod, a)?
                }
                (
                    Elim::If {
                        motive: m1,
                        then_branch: t1,
                        else_branch: f1,
                    },
                    Elim::If {
                        motive: m2,
                        then_branch: t2,
                        else_branch: f2,
                    },
                    Term::Bool,
                ) => {
                    let ext = ctx.extend("x", Term::Bool);
                    children.push(child(&ext, m1.clone(), m2.clone(), Term::Set, prev));
                    let g = children.len() - 1;
                    children.push(child(ctx, t1.clone(), t2.clone(), instantiate(m1, &Term::True)?, Some(g)));
                    children.push(child(ctx, f1.clone(), f2.clone(), instantiate(m1, &Term::False)?, Some(g + 1)));
                    instantiate(m1, &cur)?
                }
                (Elim::Fst, Elim::Fst, Term::Prod(a, _)) => *a,
                (Elim::Snd, Elim::Snd, Term::Prod(_, b)) => *b,
                _ => return Ok(fail(ctx, l, r, ty, FailureKind::Clash)),
            };
            cur = cur.push_elim(e1.clone());
        }
        Ok(Step::Decompose(children))
    }

    /// Solves `α ē = t` when `ē` is a pattern, postponing otherwise.
    fn try_solve(&mut self, ctx: &Context, flex: &Term, other: &Term, ty: &Term) -> Result<Step, FailureKind> {
        let Term::Neutral(Head::Meta(m), elims) = flex else {
            return Err(FailureKind::Internal(format!("{} is not flexible", show(flex, ctx))));
        };
        let m = *m;
        let Some(vars) = pattern_vars(elims) else {
            let mut ms = singleton(m);
            for e in elims {
                collect_metas(&flex_elim_term(e), &mut ms);
            }
            return Ok(Step::Block(self.uninstantiated(ms)));
        };
        let rhs_metas = metas(other);
        if rhs_metas.contains(&m) {
            if occurs_rigidly(self.defs, other, m) {
                return Ok(fail(ctx, flex, other, ty, FailureKind::Occurs(m)));
            }
            let mut ms = rhs_metas;
            ms.insert(m);
            return Ok(Step::Block(self.uninstantiated(ms)));
        }
        let n = vars.len();
        let fv = crate::syntax::free_vars(other);
        if !fv.iter().all(|i| vars.contains(i)) {
            let mut ms = rhs_metas;
            ms.insert(m);
            return Ok(Step::Block(self.uninstantiated(ms)));
        }
        let body = rename_free(other, &|i| {
            let k = vars.iter().position(|v| *v == i).expect("free variable checked above");
            n - 1 - k
        });
        self.instantiate_meta(m, abstract_over(n, body));
        Ok(Step::Solved)
    }

    fn uninstantiated(&self, mut ms: BTreeSet<MetaId>) -> BTreeSet<MetaId> {
        ms.retain(|m| !self.theta.contains(*m));
        ms
    }

    /// Instantiates `m` with a pair of fresh meta-variables when its type,
    /// past all arguments, is a product. Returns whether it did.
    fn eta_expand(&mut self, m: MetaId) -> Result<bool, NormError> {
        let Some(ty) = self.sig.get(m) else { return Ok(false) };
        let ty = self.zonk(ty)?;
        let env = Env::new(&self.sig, self.defs);
        match eta_expansion(env, &ty)? {
            Some(Expansion::Pair { ctx, first, second }) => {
                let n = ctx.len();
                let a = crate::elaborate::fresh_meta(&self.sig, &ctx, &first);
                self.sig = a.0;
                let b = crate::elaborate::fresh_meta(&self.sig, &ctx, &second);
                self.sig = b.0;
                self.instantiate_meta(m, abstract_over(n, Term::pair(a.1, b.1)));
                Ok(true)
            }
            _ => Ok(false),
        }
    }
}

fn flex_elim_term(e: &Elim) -> Term {
    match e {
        Elim::App(u) => u.clone(),
        Elim::If {
            motive,
            then_branch,
            else_branch,
        } => Term::pair(motive.clone(), Term::pair(then_branch.clone(), else_branch.clone())),
        Elim::Fst | Elim::Snd => Term::Set,
    }
}

enum Expansion {
    Pair { ctx: Context, first: Term, second: Term },
    Lambda { ctx: Context, body_ty: Term },
}

fn eta_expansion(env: Env<'_>, ty: &Term) -> Result<Option<Expansion>, NormError> {
    let mut ctx = Context::new();
    let mut ty = ty.clone();
    loop {
        match whnf(env, &ty)? {
            Blocked::NotBlocked(Term::Pi(a, b)) => {
                ctx.push("x", *a);
                ty = *b;
            }
            Blocked::NotBlocked(Term::Prod(a, b)) => {
                return Ok(Some(Expansion::Pair {
                    ctx,
                    first: *a,
                    second: *b,
                }))
            }
            _ if !ctx.is_empty() => return Ok(Some(Expansion::Lambda { ctx, body_ty: ty })),
            _ => return Ok(None),
        }
    }
}

/// η-expands a meta-variable of function or product type: a product
/// becomes a pair of fresh meta-variables, a function becomes a λ over a
/// fresh meta-variable. Returns the extended signature and the
/// instantiation, or `None` at other types.
pub fn eta_expand_meta(
    sig: &Signature,
    defs: &DefEnv,
    m: MetaId,
) -> Result<Option<(Signature, Term)>, NormError> {
    let Some(ty) = sig.get(m) else { return Ok(None) };
    let env = Env::new(sig, defs);
    Ok(match eta_expansion(env, ty)? {
        None => None,
        Some(Expansion::Pair { ctx, first, second }) => {
            let (sig, a) = crate::elaborate::fresh_meta(sig, &ctx, &first);
            let (sig, b) = crate::elaborate::fresh_meta(&sig, &ctx, &second);
            Some((sig, abstract_over(ctx.len(), Term::pair(a, b))))
        }
        Some(Expansion::Lambda { ctx, body_ty }) => {
            let (sig, body) = crate::elaborate::fresh_meta(sig, &ctx, &body_ty);
            Some((sig, abstract_over(ctx.len(), body)))
        }
    })
}

/// Solves `constraints` in order, postponing and waking as needed.
pub fn solve_all(
    sig: &Signature,
    defs: &DefEnv,
    constraints: &[Constraint],
    config: SolveConfig,
    trace: &mut dyn FnMut(&TraceEvent),
) -> SolveResult {
    let mut s = Solver {
        defs,
        sig: sig.clone(),
        theta: MetaSubst::new(),
        entries: Vec::new(),
        queue: VecDeque::new(),
        wake: BTreeMap::new(),
        guard_waiters: BTreeMap::new(),
        trace,
    };
    let roots: Vec<EntryId> = constraints
        .iter()
        .map(|c| s.push_entry(Kind::Hetero(c.clone()), None, None))
        .collect();
    let mut steps = 0;
    let mut step_limit_hit = false;
    while let Some(id) = s.queue.pop_front() {
        if steps >= config.max_steps {
            s.queue.push_front(id);
            step_limit_hit = true;
            break;
        }
        if s.entries[id].state != State::Queued {
            continue;
        }
        steps += 1;
        s.emit(TraceEvent::Pop);
        if let Err(failure) = s.process(id) {
            let theta = s.zonked_theta();
            return SolveResult {
                outcome: Outcome::Failed { theta, failure },
                steps,
            };
        }
    }
    let theta = s.zonked_theta();
    let signature = s.remaining_signature();
    let outcome = if roots.iter().all(|r| s.entries[*r].state == State::Solved) {
        Outcome::Solved { theta, signature }
    } else {
        let mut residuals = Vec::new();
        for r in &roots {
            s.residuals(*r, &mut residuals);
        }
        Outcome::Stuck {
            theta,
            signature,
            residuals,
            step_limit_hit,
        }
    };
    SolveResult { outcome, steps }
}

/// [`solve_all`] with the default step bound and no tracing.
pub fn solve(sig: &Signature, defs: &DefEnv, constraints: &[Constraint]) -> SolveResult {
    solve_all(sig, defs, constraints, SolveConfig::default(), &mut |_| {})
}

impl Solver<'_, '_> {
    fn zonked_theta(&self) -> MetaSubst {
        self.theta
            .iter()
            .map(|(m, t)| (m, apply_meta_subst(&self.theta, t).unwrap_or_else(|_| t.clone())))
            .collect()
    }

    fn remaining_signature(&self) -> Signature {
        let mut sig = self.sig.clone();
        sig.retain(|m| !self.theta.contains(m));
        let updates: Vec<(MetaId, Term)> = sig
            .iter()
            .map(|(m, ty)| (m, apply_meta_subst(&self.theta, ty).unwrap_or_else(|_| ty.clone())))
            .collect();
        for (m, ty) in updates {
            sig.update_type(m, ty);
        }
        sig
    }

    fn sleeping_leaves(&self, id: EntryId, out: &mut BTreeSet<MetaId>) {
        match &self.entries[id].state {
            State::Sleeping(ms) => out.extend(ms.iter().filter(|m| !self.theta.contains(**m))),
            State::Decomposed => {
                for c in &self.entries[id].children {
                    self.sleeping_leaves(*c, out);
                }
            }
            _ => {}
        }
    }

    fn residuals(&self, id: EntryId, out: &mut Vec<Residual>) {
        let entry = &self.entries[id];
        match (&entry.kind, &entry.state) {
            (_, State::Solved) | (_, State::AwaitingGuard) => {}
            (Kind::Hetero(c), State::Decomposed) if entry.split == Split::TypeThenTerm => {
                let type_eq = entry.children[0];
                if self.entries[type_eq].state == State::Solved {
                    self.residuals(entry.children[1], out);
                } else {
                    let mut blockers = BTreeSet::new();
                    self.sleeping_leaves(id, &mut blockers);
                    let constraint = self.zonk_constraint(c).unwrap_or_else(|_| c.clone());
                    out.push(Residual::Hetero { constraint, blockers });
                }
            }
            (_, State::Decomposed) => {
                for c in &entry.children {
                    self.residuals(*c, out);
                }
            }
            (Kind::Hetero(c), state) => {
                let mut blockers = BTreeSet::new();
                if let State::Sleeping(ms) = state {
                    blockers.extend(ms.iter().copied());
                }
                let constraint = self.zonk_constraint(c).unwrap_or_else(|_| c.clone());
                out.push(Residual::Hetero { constraint, blockers });
            }
            (Kind::Homo(eq), state) => {
                let mut blockers = BTreeSet::new();
                if let State::Sleeping(ms) = state {
                    blockers.extend(ms.iter().filter(|m| !self.theta.contains(**m)));
                }
                let eq = HomogeneousEq {
                    ctx: self.zonk_ctx(&eq.ctx).unwrap_or_else(|_| eq.ctx.clone()),
                    lhs: self.zonk(&eq.lhs).unwrap_or_else(|_| eq.lhs.clone()),
                    rhs: self.zonk(&eq.rhs).unwrap_or_else(|_| eq.rhs.clone()),
                    ty: self.zonk(&eq.ty).unwrap_or_else(|_| eq.ty.clone()),
                    guard: None,
                };
                out.push(Residual::Homo { eq, blockers });
            }
        }
    }
}

/// Extends a partial instantiation to a substitution from `sigma`: metas
/// left open map to themselves.
pub fn complete_subst(theta: &MetaSubst, sigma: &Signature) -> MetaSubst {
    let mut full = theta.clone();
    for (m, _) in sigma.iter() {
        if !full.contains(m) {
            full.insert(m, Term::meta(m));
        }
    }
    full
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    Subst(ValidityError),
    /// Constraint `index` (in the given order) is not solved by θ.
    Unsolved { index: usize, reason: String },
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Subst(e) => write!(f, "ill-typed solution: {}", e),
            VerifyError::Unsolved { index, reason } => write!(f, "constraint {} not solved: {}", index, reason),
        }
    }
}

/// Re-checks a solver result with the declarative rules: the
/// instantiations are well typed, and for a solved run every constraint
/// has equal types and equal terms under θ.
pub fn verify_solution(
    sigma: &Signature,
    defs: &DefEnv,
    constraints: &[Constraint],
    outcome: &Outcome,
) -> Result<(), VerifyError> {
    let (theta, xi) = match outcome {
        Outcome::Solved { theta, signature } | Outcome::Stuck { theta, signature, .. } => (theta, signature),
        Outcome::Failed { .. } => return Ok(()),
    };
    let full = complete_subst(theta, sigma);
    check_meta_subst(xi, &full, sigma, defs).map_err(VerifyError::Subst)?;
    if !outcome.is_solved() {
        return Ok(());
    }
    let env = Env::new(xi, defs);
    for (index, c) in constraints.iter().enumerate() {
        let unsolved = |reason: String| VerifyError::Unsolved { index, reason };
        let z = |t: &Term| apply_meta_subst(theta, t).map_err(|e| unsolved(format!("{}", e)));
        let ctx = c
            .ctx
            .try_map_types(|ty| apply_meta_subst(theta, ty))
            .map_err(|e| unsolved(format!("{}", e)))?;
        let (a, b) = (z(&c.lhs_ty)?, z(&c.rhs_ty)?);
        let types = convert(env, &ctx, &a, &b, &Term::Set).map_err(|e| unsolved(format!("{}", e)))?;
        if types != Conv::Yes {
            return Err(unsolved(format!("types differ: {:?}", types)));
        }
        let terms = convert(env, &ctx, &z(&c.lhs)?, &z(&c.rhs)?, &a).map_err(|e| unsolved(format!("{}", e)))?;
        if terms != Conv::Yes {
            return Err(unsolved(format!("terms differ: {:?}", terms)));
        }
    }
    Ok(())
}
