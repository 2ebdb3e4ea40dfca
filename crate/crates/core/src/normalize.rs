//! Hereditary substitution and weak-head normalization.
//!
//! Substituting a term for a head re-normalizes on the fly: whenever the
//! substituted head carries a spine, the spine is eliminated against the
//! replacement (β for λ, ι for `if` over a literal, projections of pairs).
//! This keeps every term β-normal without a separate normalization pass.
//!
//! Each public entry point runs on a fresh budget of [`FUEL`] steps; running
//! out is reported as [`NormError::FuelExhausted`] rather than looping.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use thiserror::Error;

use crate::syntax::{shift, DefEnv, Elim, Head, Ident, MetaId, MetaSubst, Signature, Term};

/// Step budget of one normalization call.
pub const FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("ill-typed elimination: {elim} applied to canonical {term:?}")]
    IllTypedElim { term: Term, elim: &'static str },
    #[error("normalization exceeded {0} steps")]
    FuelExhausted(u64),
}

/// Nesting bound of hereditary substitutions, so that divergence is caught
/// before the native stack overflows.
const MAX_NESTING: usize = 128;

struct Fuel {
    steps: u64,
    nesting: usize,
}

impl Fuel {
    fn new() -> Self {
        Fuel {
            steps: FUEL,
            nesting: 0,
        }
    }

    fn tick(&mut self) -> Result<(), NormError> {
        if self.steps == 0 {
            return Err(NormError::FuelExhausted(FUEL));
        }
        self.steps -= 1;
        Ok(())
    }

    fn enter(&mut self) -> Result<(), NormError> {
        if self.nesting >= MAX_NESTING {
            return Err(NormError::FuelExhausted(FUEL));
        }
        self.nesting += 1;
        Ok(())
    }

    fn leave(&mut self) {
        self.nesting -= 1;
    }
}

/// What free variables become.
#[derive(Clone, Copy)]
enum VarAction<'a> {
    Keep,
    /// Index 0 becomes the term, every other index drops by one.
    Instantiate(&'a Term),
    /// Index `.0` becomes the term; the context is unchanged.
    Replace(usize, &'a Term),
}

/// What non-variable heads become.
#[derive(Clone, Copy)]
enum HeadAction<'a> {
    Keep,
    Meta(MetaId, &'a Term),
    Def(&'a Ident, &'a Term),
    /// Every instantiated meta-variable; values may mention other
    /// instantiated meta-variables and are substituted recursively.
    Solution(&'a MetaSubst),
}

#[derive(Clone, Copy)]
struct Action<'a> {
    vars: VarAction<'a>,
    heads: HeadAction<'a>,
}

fn go(t: &Term, depth: usize, act: Action<'_>, fuel: &mut Fuel) -> Result<Term, NormError> {
    fuel.tick()?;
    Ok(match t {
        Term::Set => Term::Set,
        Term::Bool => Term::Bool,
        Term::True => Term::True,
        Term::False => Term::False,
        Term::Nat => Term::Nat,
        Term::Zero => Term::Zero,
        Term::Suc(n) => Term::suc(go(n, depth, act, fuel)?),
        Term::Pi(a, b) => Term::pi(go(a, depth, act, fuel)?, go(b, depth + 1, act, fuel)?),
        Term::Prod(a, b) => Term::prod(go(a, depth, act, fuel)?, go(b, depth, act, fuel)?),
        Term::Pair(a, b) => Term::pair(go(a, depth, act, fuel)?, go(b, depth, act, fuel)?),
        Term::Lam(b) => Term::lam(go(b, depth + 1, act, fuel)?),
        Term::Neutral(head, elims) => {
            let mut new_elims = Vec::with_capacity(elims.len());
            for e in elims {
                new_elims.push(go_elim(e, depth, act, fuel)?);
            }
            let (head, replacement) = replace_head(head, depth, act, fuel)?;
            match replacement {
                Some(v) => eliminate_with(v, new_elims, fuel)?,
                None => Term::Neutral(head, new_elims),
            }
        }
    })
}

fn go_elim(e: &Elim, depth: usize, act: Action<'_>, fuel: &mut Fuel) -> Result<Elim, NormError> {
    Ok(match e {
        Elim::App(u) => Elim::App(go(u, depth, act, fuel)?),
        Elim::If {
            motive,
            then_branch,
            else_branch,
        } => Elim::If {
            motive: go(motive, depth + 1, act, fuel)?,
            then_branch: go(then_branch, depth, act, fuel)?,
            else_branch: go(else_branch, depth, act, fuel)?,
        },
        Elim::Fst => Elim::Fst,
        Elim::Snd => Elim::Snd,
    })
}

fn replace_head(
    head: &Head,
    depth: usize,
    act: Action<'_>,
    fuel: &mut Fuel,
) -> Result<(Head, Option<Term>), NormError> {
    Ok(match head {
        Head::Var(i) if *i < depth => (head.clone(), None),
        Head::Var(i) => match act.vars {
            VarAction::Keep => (head.clone(), None),
            VarAction::Instantiate(u) => {
                if *i == depth {
                    (head.clone(), Some(shift(u, depth)))
                } else {
                    (Head::Var(i - 1), None)
                }
            }
            VarAction::Replace(j, u) => {
                if *i == depth + j {
                    (head.clone(), Some(shift(u, depth)))
                } else {
                    (head.clone(), None)
                }
            }
        },
        Head::Meta(id) => match act.heads {
            HeadAction::Meta(target, u) if target == *id => (head.clone(), Some(u.clone())),
            HeadAction::Solution(theta) => match theta.get(*id) {
                Some(Term::Neutral(Head::Meta(m), es)) if m == id && es.is_empty() => (head.clone(), None),
                Some(v) => {
                    let inner = Action {
                        vars: VarAction::Keep,
                        heads: HeadAction::Solution(theta),
                    };
                    fuel.enter()?;
                    let v = go(v, 0, inner, fuel);
                    fuel.leave();
                    (head.clone(), Some(v?))
                }
                None => (head.clone(), None),
            },
            _ => (head.clone(), None),
        },
        Head::Def(name) => match act.heads {
            HeadAction::Def(target, u) if target == name => (head.clone(), Some(u.clone())),
            _ => (head.clone(), None),
        },
    })
}

fn eliminate_with(mut t: Term, elims: Vec<Elim>, fuel: &mut Fuel) -> Result<Term, NormError> {
    for e in elims {
        t = elim_one(t, e, fuel)?;
    }
    Ok(t)
}

fn elim_one(t: Term, e: Elim, fuel: &mut Fuel) -> Result<Term, NormError> {
    fuel.tick()?;
    match (t, e) {
        (Term::Neutral(h, mut es), e) => {
            es.push(e);
            Ok(Term::Neutral(h, es))
        }
        (Term::Lam(body), Elim::App(u)) => instantiate_with(&body, &u, fuel),
        (Term::True, Elim::If { then_branch, .. }) => Ok(then_branch),
        (Term::False, Elim::If { else_branch, .. }) => Ok(else_branch),
        (Term::Pair(a, _), Elim::Fst) => Ok(*a),
        (Term::Pair(_, b), Elim::Snd) => Ok(*b),
        (term, e) => Err(NormError::IllTypedElim {
            term,
            elim: match e {
                Elim::App(_) => "application",
                Elim::If { .. } => "if",
                Elim::Fst => "fst",
                Elim::Snd => "snd",
            },
        }),
    }
}

fn instantiate_with(body: &Term, u: &Term, fuel: &mut Fuel) -> Result<Term, NormError> {
    let act = Action {
        vars: VarAction::Instantiate(u),
        heads: HeadAction::Keep,
    };
    fuel.enter()?;
    let result = go(body, 0, act, fuel);
    fuel.leave();
    result
}

/// `t[h := u]`, hereditarily. For a variable head the context is unchanged
/// (the variable simply no longer occurs); `u` lives in the same context as
/// `t`. Meta-variable and constant replacements must be closed.
pub fn subst(t: &Term, head: &Head, u: &Term) -> Result<Term, NormError> {
    let act = match head {
        Head::Var(j) => Action {
            vars: VarAction::Replace(*j, u),
            heads: HeadAction::Keep,
        },
        Head::Meta(id) => Action {
            vars: VarAction::Keep,
            heads: HeadAction::Meta(*id, u),
        },
        Head::Def(name) => Action {
            vars: VarAction::Keep,
            heads: HeadAction::Def(name, u),
        },
    };
    go(t, 0, act, &mut Fuel::new())
}

/// `body[x := u]` where `body` is under one binder: index 0 is replaced and
/// the binder removed.
pub fn instantiate(body: &Term, u: &Term) -> Result<Term, NormError> {
    instantiate_with(body, u, &mut Fuel::new())
}

/// `t u`, eliminating the redex when `t` is a λ.
pub fn elim_app(t: &Term, u: &Term) -> Result<Term, NormError> {
    elim_one(t.clone(), Elim::App(u.clone()), &mut Fuel::new())
}

/// `if scrutinee / x. motive then then_branch else else_branch`.
pub fn elim_if(
    scrutinee: &Term,
    motive: &Term,
    then_branch: &Term,
    else_branch: &Term,
) -> Result<Term, NormError> {
    let e = Elim::If {
        motive: motive.clone(),
        then_branch: then_branch.clone(),
        else_branch: else_branch.clone(),
    };
    elim_one(scrutinee.clone(), e, &mut Fuel::new())
}

pub fn elim_fst(t: &Term) -> Result<Term, NormError> {
    elim_one(t.clone(), Elim::Fst, &mut Fuel::new())
}

pub fn elim_snd(t: &Term) -> Result<Term, NormError> {
    elim_one(t.clone(), Elim::Snd, &mut Fuel::new())
}

/// Applies a whole spine of eliminations to `t`.
pub fn eliminate(t: &Term, elims: &[Elim]) -> Result<Term, NormError> {
    eliminate_with(t.clone(), elims.to_vec(), &mut Fuel::new())
}

/// Replaces every instantiated meta-variable by its (recursively
/// instantiated) value. Entries mapping a meta-variable to itself leave it
/// in place; a cyclic substitution is reported as running out of fuel.
pub fn apply_meta_subst(theta: &MetaSubst, t: &Term) -> Result<Term, NormError> {
    if theta.is_empty() {
        return Ok(t.clone());
    }
    let act = Action {
        vars: VarAction::Keep,
        heads: HeadAction::Solution(theta),
    };
    go(t, 0, act, &mut Fuel::new())
}

/// Global environment for reduction: meta-variable types, constants, and
/// optionally the instantiations found so far.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub sig: &'a Signature,
    pub defs: &'a DefEnv,
    pub solution: Option<&'a MetaSubst>,
}

impl<'a> Env<'a> {
    pub fn new(sig: &'a Signature, defs: &'a DefEnv) -> Self {
        Env {
            sig,
            defs,
            solution: None,
        }
    }

    pub fn with_solution(self, theta: &'a MetaSubst) -> Self {
        Env {
            solution: Some(theta),
            ..self
        }
    }

    fn instantiation(&self, id: MetaId) -> Option<&'a Term> {
        self.solution.and_then(|theta| theta.get(id))
    }
}

/// Result of weak-head normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Blocked {
    /// Canonical, or neutral with a rigid head.
    NotBlocked(Term),
    /// Neutral with an uninstantiated meta-variable at its head (possibly
    /// after unfolding constants). The set holds that meta-variable.
    BlockedOn(BTreeSet<MetaId>, Term),
}

impl Blocked {
    pub fn term(&self) -> &Term {
        match self {
            Blocked::NotBlocked(t) | Blocked::BlockedOn(_, t) => t,
        }
    }

    pub fn into_term(self) -> Term {
        match self {
            Blocked::NotBlocked(t) | Blocked::BlockedOn(_, t) => t,
        }
    }

    pub fn is_blocked(&self) -> bool {
        matches!(self, Blocked::BlockedOn(..))
    }

    pub fn blockers(&self) -> BTreeSet<MetaId> {
        match self {
            Blocked::NotBlocked(_) => BTreeSet::new(),
            Blocked::BlockedOn(ms, _) => ms.clone(),
        }
    }
}

/// Weak-head normal form. Unfolds constants with bodies and instantiated
/// meta-variables at the head; reports the meta-variable that blocks
/// further progress, if any.
pub fn whnf(env: Env<'_>, t: &Term) -> Result<Blocked, NormError> {
    let mut fuel = Fuel::new();
    let mut t = t.clone();
    loop {
        fuel.tick()?;
        let (head, elims) = match t {
            Term::Neutral(head, elims) => (head, elims),
            canonical => return Ok(Blocked::NotBlocked(canonical)),
        };
        let unfolded = match &head {
            Head::Var(_) => None,
            Head::Meta(id) => match env.instantiation(*id) {
                Some(v) => Some(v),
                None => {
                    let mut blockers = BTreeSet::new();
                    blockers.insert(*id);
                    return Ok(Blocked::BlockedOn(blockers, Term::Neutral(head, elims)));
                }
            },
            Head::Def(name) => env.defs.get(name).and_then(|d| d.body.as_ref()),
        };
        match unfolded {
            Some(v) => t = eliminate_with(v.clone(), elims, &mut fuel)?,
            None => return Ok(Blocked::NotBlocked(Term::Neutral(head, elims))),
        }
    }
}

/// [`whnf`] without the blocking information.
pub fn whnf_term(env: Env<'_>, t: &Term) -> Result<Term, NormError> {
    whnf(env, t).map(Blocked::into_term)
}
