//! Bidirectional type checking, type-directed definitional equality with η,
//! and validity of contexts, signatures and meta-variable substitutions.
//!
//! Canonical terms are checked, neutral terms have their type inferred. A
//! meta-variable standing where a rule needs a particular shape makes the
//! judgment blocked, which is reported apart from a definite mismatch.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::normalize::{
    apply_meta_subst, elim_app, elim_fst, elim_snd, instantiate, whnf, Blocked, Env, NormError,
};
use crate::syntax::{lookup_var, shift, Context, DefEnv, Elim, Head, MetaId, MetaSubst, ScopeError, Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{term} does not have type {ty}")]
    Mismatch { term: Term, ty: Term },
    #[error("{ty} is not a {expected} type")]
    NotA { ty: Term, expected: &'static str },
    #[error("{lhs} and {rhs} are not equal at type {ty}")]
    NotConvertible { lhs: Term, rhs: Term, ty: Term },
    #[error("{0} is not a neutral term")]
    NotNeutral(Term),
    #[error("blocked on {}", show_metas(.0))]
    Blocked(BTreeSet<MetaId>),
    #[error(transparent)]
    Scope(#[from] ScopeError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

pub fn show_metas(ms: &BTreeSet<MetaId>) -> String {
    let parts: Vec<String> = ms.iter().map(|m| alloc::format!("{}", m)).collect();
    alloc::format!("{{{}}}", parts.join(","))
}

/// Outcome of a conversion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conv {
    Yes,
    No,
    Blocked(BTreeSet<MetaId>),
}

impl Conv {
    pub fn is_yes(&self) -> bool {
        matches!(self, Conv::Yes)
    }

    /// Conjunction: a definite `No` wins over blocking.
    pub fn and(self, other: Conv) -> Conv {
        match (self, other) {
            (Conv::No, _) | (_, Conv::No) => Conv::No,
            (Conv::Blocked(mut a), Conv::Blocked(b)) => {
                a.extend(b);
                Conv::Blocked(a)
            }
            (Conv::Blocked(a), Conv::Yes) | (Conv::Yes, Conv::Blocked(a)) => Conv::Blocked(a),
            (Conv::Yes, Conv::Yes) => Conv::Yes,
        }
    }
}

/// Outcome of comparing two neutral terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NeutralConv {
    /// Equal, at the given type.
    Equal(Term),
    No,
    Blocked(BTreeSet<MetaId>),
}

/// `Γ ⊢ t : A`.
pub fn check(env: Env<'_>, ctx: &Context, t: &Term, ty: &Term) -> Result<(), TypeError> {
    if let Term::Neutral(..) = t {
        let inferred = infer(env, ctx, t)?;
        return match convert(env, ctx, &inferred, ty, &Term::Set)? {
            Conv::Yes => Ok(()),
            Conv::No => Err(TypeError::Mismatch {
                term: t.clone(),
                ty: ty.clone(),
            }),
            Conv::Blocked(ms) => Err(TypeError::Blocked(ms)),
        };
    }
    let ty_whnf = match whnf(env, ty)? {
        Blocked::NotBlocked(a) => a,
        Blocked::BlockedOn(ms, _) => return Err(TypeError::Blocked(ms)),
    };
    let mismatch = || TypeError::Mismatch {
        term: t.clone(),
        ty: ty.clone(),
    };
    match (t, &ty_whnf) {
        (Term::Set | Term::Bool | Term::Nat, Term::Set) => Ok(()),
        (Term::Pi(a, b), Term::Set) => {
            check(env, ctx, a, &Term::Set)?;
            check(env, &ctx.extend("x", (**a).clone()), b, &Term::Set)
        }
        (Term::Prod(a, b), Term::Set) => {
            check(env, ctx, a, &Term::Set)?;
            check(env, ctx, b, &Term::Set)
        }
        (Term::True | Term::False, Term::Bool) => Ok(()),
        (Term::Zero, Term::Nat) => Ok(()),
        (Term::Suc(n), Term::Nat) => check(env, ctx, n, &Term::Nat),
        (Term::Lam(body), Term::Pi(a, b)) => check(env, &ctx.extend("x", (**a).clone()), body, b),
        (Term::Pair(x, y), Term::Prod(a, b)) => {
            check(env, ctx, x, a)?;
            check(env, ctx, y, b)
        }
        _ => Err(mismatch()),
    }
}

fn head_type(env: Env<'_>, ctx: &Context, head: &Head) -> Result<Term, TypeError> {
    Ok(match head {
        Head::Var(i) => lookup_var(ctx, *i)?,
        Head::Meta(m) => env.sig.get(*m).cloned().ok_or(ScopeError::UnknownMeta(*m))?,
        Head::Def(d) => env
            .defs
            .get(d)
            .map(|def| def.ty.clone())
            .ok_or_else(|| ScopeError::UnknownDef(d.clone()))?,
    })
}

fn whnf_shape(env: Env<'_>, ty: &Term) -> Result<Term, TypeError> {
    match whnf(env, ty)? {
        Blocked::NotBlocked(a) => Ok(a),
        Blocked::BlockedOn(ms, _) => Err(TypeError::Blocked(ms)),
    }
}

/// `Γ ⊢ n ⇒ A`.
pub fn infer(env: Env<'_>, ctx: &Context, n: &Term) -> Result<Term, TypeError> {
    let Term::Neutral(head, elims) = n else {
        return Err(TypeError::NotNeutral(n.clone()));
    };
    let mut ty = head_type(env, ctx, head)?;
    let mut cur = Term::Neutral(head.clone(), Vec::new());
    for e in elims {
        let shape = whnf_shape(env, &ty)?;
        ty = match (e, shape) {
            (Elim::App(u), Term::Pi(a, b)) => {
                check(env, ctx, u, &a)?;
                instantiate(&b, u)?
            }
            (
                Elim::If {
                    motive,
                    then_branch,
                    else_branch,
                },
                Term::Bool,
            ) => {
                check(env, &ctx.extend("x", Term::Bool), motive, &Term::Set)?;
                check(env, ctx, then_branch, &instantiate(motive, &Term::True)?)?;
                check(env, ctx, else_branch, &instantiate(motive, &Term::False)?)?;
                instantiate(motive, &cur)?
            }
            (Elim::Fst, Term::Prod(a, _)) => *a,
            (Elim::Snd, Term::Prod(_, b)) => *b,
            (Elim::App(_), other) => {
                return Err(TypeError::NotA {
                    ty: other,
                    expected: "function",
                })
            }
            (Elim::If { .. }, other) => {
                return Err(TypeError::NotA {
                    ty: other,
                    expected: "Bool",
                })
            }
            (Elim::Fst | Elim::Snd, other) => {
                return Err(TypeError::NotA {
                    ty: other,
                    expected: "product",
                })
            }
        };
        cur = cur.push_elim(e.clone());
    }
    Ok(ty)
}

/// `Γ ⊢ t ≡ u : A`, type-directed, with η for functions and pairs. Both
/// sides are assumed to have type `A`.
pub fn convert(env: Env<'_>, ctx: &Context, t: &Term, u: &Term, ty: &Term) -> Result<Conv, TypeError> {
    if t == u {
        return Ok(Conv::Yes);
    }
    let ty = match whnf(env, ty)? {
        Blocked::NotBlocked(a) => a,
        Blocked::BlockedOn(ms, _) => return Ok(Conv::Blocked(ms)),
    };
    match ty {
        Term::Pi(a, b) => {
            let ext = ctx.extend("x", (*a).clone());
            let t1 = elim_app(&shift(t, 1), &Term::var(0))?;
            let u1 = elim_app(&shift(u, 1), &Term::var(0))?;
            convert(env, &ext, &t1, &u1, &b)
        }
        Term::Prod(a, b) => {
            let first = convert(env, ctx, &elim_fst(t)?, &elim_fst(u)?, &a)?;
            if first == Conv::No {
                return Ok(Conv::No);
            }
            Ok(first.and(convert(env, ctx, &elim_snd(t)?, &elim_snd(u)?, &b)?))
        }
        ty => convert_whnf(env, ctx, t, u, &ty),
    }
}

fn convert_whnf(env: Env<'_>, ctx: &Context, t: &Term, u: &Term, ty: &Term) -> Result<Conv, TypeError> {
    let t = whnf(env, t)?;
    let u = whnf(env, u)?;
    if t.term() == u.term() {
        return Ok(Conv::Yes);
    }
    if t.is_blocked() || u.is_blocked() {
        let mut ms = t.blockers();
        ms.extend(u.blockers());
        return Ok(Conv::Blocked(ms));
    }
    let (t, u) = (t.into_term(), u.into_term());
    Ok(match (&t, &u) {
        (Term::Pi(a1, b1), Term::Pi(a2, b2)) => {
            let dom = convert(env, ctx, a1, a2, &Term::Set)?;
            if dom == Conv::No {
                return Ok(Conv::No);
            }
            let ext = ctx.extend("x", (**a1).clone());
            dom.and(convert(env, &ext, b1, b2, &Term::Set)?)
        }
        (Term::Prod(a1, b1), Term::Prod(a2, b2)) => {
            let first = convert(env, ctx, a1, a2, &Term::Set)?;
            if first == Conv::No {
                return Ok(Conv::No);
            }
            first.and(convert(env, ctx, b1, b2, &Term::Set)?)
        }
        (Term::Suc(m), Term::Suc(n)) => convert(env, ctx, m, n, &Term::Nat)?,
        (Term::Neutral(..), Term::Neutral(..)) => match convert_neutral(env, ctx, &t, &u)? {
            NeutralConv::Equal(_) => Conv::Yes,
            NeutralConv::No => Conv::No,
            NeutralConv::Blocked(ms) => Conv::Blocked(ms),
        },
        _ => {
            let _ = ty;
            Conv::No
        }
    })
}

/// `Γ ⊢ n ≡ n' ⇒ A` for neutral terms in weak-head normal form. The spine is
/// typed with the left-hand neutral.
pub fn convert_neutral(env: Env<'_>, ctx: &Context, n: &Term, m: &Term) -> Result<NeutralConv, TypeError> {
    let (Term::Neutral(h1, es1), Term::Neutral(h2, es2)) = (n, m) else {
        return Err(TypeError::NotNeutral(if n.is_neutral() { m.clone() } else { n.clone() }));
    };
    for h in [h1, h2] {
        if let Head::Meta(id) = h {
            if env.solution.and_then(|s| s.get(*id)).is_none() {
                let mut ms = BTreeSet::new();
                ms.insert(*id);
                return Ok(NeutralConv::Blocked(ms));
            }
        }
    }
    if h1 != h2 || es1.len() != es2.len() {
        return Ok(NeutralConv::No);
    }
    let mut ty = head_type(env, ctx, h1)?;
    let mut cur = Term::Neutral(h1.clone(), Vec::new());
    let mut acc = Conv::Yes;
    for (e1, e2) in es1.iter().zip(es2) {
        let shape = match whnf(env, &ty)? {
            Blocked::NotBlocked(a) => a,
            Blocked::BlockedOn(ms, _) => return Ok(NeutralConv::Blocked(ms)),
        };
        let (step, next) = match (e1, e2, shape) {
            (Elim::App(a), Elim::App(b), Term::Pi(dom, cod)) => {
                (convert(env, ctx, a, b, &dom)?, instantiate(&cod, a)?)
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
                let c = convert(env, &ext, m1, m2, &Term::Set)?
                    .and(convert(env, ctx, t1, t2, &instantiate(m1, &Term::True)?)?)
                    .and(convert(env, ctx, f1, f2, &instantiate(m1, &Term::False)?)?);
                (c, instantiate(m1, &cur)?)
            }
            (Elim::Fst, Elim::Fst, Term::Prod(a, _)) => (Conv::Yes, *a),
            (Elim::Snd, Elim::Snd, Term::Prod(_, b)) => (Conv::Yes, *b),
            _ => return Ok(NeutralConv::No),
        };
        acc = acc.and(step);
        if acc == Conv::No {
            return Ok(NeutralConv::No);
        }
        ty = next;
        cur = cur.push_elim(e1.clone());
    }
    Ok(match acc {
        Conv::Yes => NeutralConv::Equal(ty),
        Conv::No => NeutralConv::No,
        Conv::Blocked(ms) => NeutralConv::Blocked(ms),
    })
}

/// Failure of a validity judgment, naming the first bad entry.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidityError {
    #[error("context entry {name}: {source}")]
    Context { name: String, source: TypeError },
    #[error("signature entry {meta}: {source}")]
    Signature { meta: MetaId, source: TypeError },
    #[error("instantiation of {meta}: {source}")]
    Instantiation { meta: MetaId, source: TypeError },
    #[error("no instantiation for {0}")]
    Missing(MetaId),
}

/// `Σ ⊢ Γ`.
pub fn check_context(env: Env<'_>, ctx: &Context) -> Result<(), ValidityError> {
    let mut prefix = Context::new();
    for b in ctx.entries() {
        check(env, &prefix, &b.ty, &Term::Set).map_err(|source| ValidityError::Context {
            name: b.name.clone(),
            source,
        })?;
        prefix.push(b.name.clone(), b.ty.clone());
    }
    Ok(())
}

/// `⊢ Σ`: each type is a closed type over the entries before it.
pub fn check_signature(sig: &Signature, defs: &DefEnv) -> Result<(), ValidityError> {
    for (meta, ty) in sig.iter() {
        let mut prefix = sig.clone();
        prefix.retain(|m| m < meta);
        check(Env::new(&prefix, defs), &Context::new(), ty, &Term::Set)
            .map_err(|source| ValidityError::Signature { meta, source })?;
    }
    Ok(())
}

/// `Ξ ⊢ θ : Σ`: every meta-variable of `Σ` has an instantiation of the
/// θ-instantiated type, checked in `Ξ`.
pub fn check_meta_subst(
    xi: &Signature,
    theta: &MetaSubst,
    sigma: &Signature,
    defs: &DefEnv,
) -> Result<(), ValidityError> {
    let env = Env::new(xi, defs);
    for (meta, ty) in sigma.iter() {
        let t = theta.get(meta).ok_or(ValidityError::Missing(meta))?;
        let err = |source| ValidityError::Instantiation { meta, source };
        let ty = apply_meta_subst(theta, ty).map_err(|e| err(e.into()))?;
        check(env, &Context::new(), t, &ty).map_err(err)?;
    }
    Ok(())
}
