//! Elaboration: one traversal turns a checking problem `Σ; Γ ⊢ t : A` into
//! an extended signature, a well-typed term and a set of heterogeneous
//! constraints whose solution makes the term equal to the original.
//!
//! Every rule builds its term from the elaborated subterms at whatever type
//! the rule gives it, then adds a fresh meta-variable `α Γ : A` as the
//! result together with the constraint `Γ ⊢ built : B = α Γ : A`.
//! Applications elaborate their argument before the function.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::normalize::{elim_app, elim_fst, elim_if, elim_snd, instantiate, NormError};
use crate::pretty::{show, show_context};
use crate::syntax::{lookup_var, Context, DefEnv, Elim, Head, ScopeError, Signature, Term};

/// `Γ ⊢ t : A = u : B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub ctx: Context,
    pub lhs: Term,
    pub lhs_ty: Term,
    pub rhs: Term,
    pub rhs_ty: Term,
}

impl Constraint {
    /// `<ctx> |- <t> : <A> = <u> : <B>`.
    pub fn show(&self) -> String {
        alloc::format!(
            "{} |- {} : {} = {} : {}",
            show_context(&self.ctx),
            show(&self.lhs, &self.ctx),
            show(&self.lhs_ty, &self.ctx),
            show(&self.rhs, &self.ctx),
            show(&self.rhs_ty, &self.ctx),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error(transparent)]
    Scope(#[from] ScopeError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabOutput {
    /// The input signature extended with the fresh meta-variables.
    pub signature: Signature,
    pub term: Term,
    /// In emission order: a constraint comes after those of its subterms.
    pub constraints: Vec<Constraint>,
    /// The inferred type, for inference problems.
    pub inferred_type: Option<Term>,
}

impl ElabOutput {
    /// Constraints newest first, the conventional display order.
    pub fn listing(&self) -> impl Iterator<Item = &Constraint> + '_ {
        self.constraints.iter().rev()
    }

    /// Number of meta-variables added on top of `input`.
    pub fn fresh_count(&self, input: &Signature) -> usize {
        self.signature.len() - input.len()
    }
}

/// `Fresh(Γ, A)`: adds `α : Γ → A` and returns `α Γ`.
pub fn fresh_meta(sig: &Signature, ctx: &Context, ty: &Term) -> (Signature, Term) {
    let mut sig = sig.clone();
    let t = fresh_in(&mut sig, ctx, ty);
    (sig, t)
}

fn fresh_in(sig: &mut Signature, ctx: &Context, ty: &Term) -> Term {
    let id = sig.extend(ctx.close_over(ty.clone()));
    Term::neutral(Head::Meta(id), ctx.spine())
}

struct Elaborator<'a> {
    sig: Signature,
    defs: &'a DefEnv,
    constraints: Vec<Constraint>,
}

impl Elaborator<'_> {
    fn fresh(&mut self, ctx: &Context, ty: &Term) -> Term {
        fresh_in(&mut self.sig, ctx, ty)
    }

    fn check(&mut self, ctx: &Context, t: &Term, ty: &Term) -> Result<Term, ElabError> {
        let (built, built_ty) = match t {
            Term::Set | Term::Bool | Term::Nat => (t.clone(), Term::Set),
            Term::True | Term::False => (t.clone(), Term::Bool),
            Term::Zero => (Term::Zero, Term::Nat),
            Term::Suc(n) => (Term::suc(self.check(ctx, n, &Term::Nat)?), Term::Nat),
            Term::Pi(a, b) => {
                let a = self.check(ctx, a, &Term::Set)?;
                let b = self.check(&ctx.extend("x", a.clone()), b, &Term::Set)?;
                (Term::pi(a, b), Term::Set)
            }
            Term::Prod(a, b) => {
                let a = self.check(ctx, a, &Term::Set)?;
                let b = self.check(ctx, b, &Term::Set)?;
                (Term::prod(a, b), Term::Set)
            }
            Term::Lam(body) => {
                let dom = self.fresh(ctx, &Term::Set);
                let ext = ctx.extend("x", dom.clone());
                let cod = self.fresh(&ext, &Term::Set);
                let body = self.check(&ext, body, &cod)?;
                (Term::lam(body), Term::pi(dom, cod))
            }
            Term::Pair(x, y) => {
                let a = self.fresh(ctx, &Term::Set);
                let b = self.fresh(ctx, &Term::Set);
                let x = self.check(ctx, x, &a)?;
                let y = self.check(ctx, y, &b)?;
                (Term::pair(x, y), Term::prod(a, b))
            }
            Term::Neutral(head, elims) => self.infer(ctx, head, elims)?,
        };
        let result = self.fresh(ctx, ty);
        self.constraints.push(Constraint {
            ctx: ctx.clone(),
            lhs: built,
            lhs_ty: built_ty,
            rhs: result.clone(),
            rhs_ty: ty.clone(),
        });
        Ok(result)
    }

    fn infer(&mut self, ctx: &Context, head: &Head, elims: &[Elim]) -> Result<(Term, Term), ElabError> {
        let Some((last, init)) = elims.split_last() else {
            let ty = match head {
                Head::Var(i) => lookup_var(ctx, *i)?,
                Head::Meta(m) => self.sig.get(*m).cloned().ok_or(ScopeError::UnknownMeta(*m))?,
                Head::Def(d) => self
                    .defs
                    .get(d)
                    .map(|def| def.ty.clone())
                    .ok_or_else(|| ScopeError::UnknownDef(d.clone()))?,
            };
            return Ok((Term::Neutral(head.clone(), Vec::new()), ty));
        };
        let prefix = Term::Neutral(head.clone(), init.to_vec());
        Ok(match last {
            Elim::App(u) => {
                let dom = self.fresh(ctx, &Term::Set);
                let cod = self.fresh(&ctx.extend("x", dom.clone()), &Term::Set);
                let arg = self.check(ctx, u, &dom)?;
                let fun = self.check(ctx, &prefix, &Term::pi(dom, cod.clone()))?;
                (elim_app(&fun, &arg)?, instantiate(&cod, &arg)?)
            }
            Elim::If {
                motive,
                then_branch,
                else_branch,
            } => {
                let motive = self.check(&ctx.extend("x", Term::Bool), motive, &Term::Set)?;
                let scrutinee = self.check(ctx, &prefix, &Term::Bool)?;
                let then_branch = self.check(ctx, then_branch, &instantiate(&motive, &Term::True)?)?;
                let else_branch = self.check(ctx, else_branch, &instantiate(&motive, &Term::False)?)?;
                (
                    elim_if(&scrutinee, &motive, &then_branch, &else_branch)?,
                    instantiate(&motive, &scrutinee)?,
                )
            }
            Elim::Fst | Elim::Snd => {
                let a = self.fresh(ctx, &Term::Set);
                let b = self.fresh(ctx, &Term::Set);
                let pair = self.check(ctx, &prefix, &Term::prod(a.clone(), b.clone()))?;
                if matches!(last, Elim::Fst) {
                    (elim_fst(&pair)?, a)
                } else {
                    (elim_snd(&pair)?, b)
                }
            }
        })
    }

    fn finish(self, term: Term, inferred_type: Option<Term>) -> ElabOutput {
        ElabOutput {
            signature: self.sig,
            term,
            constraints: self.constraints,
            inferred_type,
        }
    }
}

fn elaborator<'a>(sig: &Signature, defs: &'a DefEnv) -> Elaborator<'a> {
    Elaborator {
        sig: sig.clone(),
        defs,
        constraints: Vec::new(),
    }
}

/// `⟦Σ; Γ ⊢ t : A⟧`.
pub fn elaborate_check(
    sig: &Signature,
    defs: &DefEnv,
    ctx: &Context,
    t: &Term,
    ty: &Term,
) -> Result<ElabOutput, ElabError> {
    let mut e = elaborator(sig, defs);
    let term = e.check(ctx, t, ty)?;
    Ok(e.finish(term, None))
}

/// `⟦Σ; Γ ⊢ n⟧ ⇒ A` for a neutral term; canonical terms are checked
/// against a fresh type instead.
pub fn elaborate_infer(sig: &Signature, defs: &DefEnv, ctx: &Context, n: &Term) -> Result<ElabOutput, ElabError> {
    let mut e = elaborator(sig, defs);
    let (term, ty) = match n {
        Term::Neutral(head, elims) => e.infer(ctx, head, elims)?,
        _ => {
            let ty = e.fresh(ctx, &Term::Set);
            (e.check(ctx, n, &ty)?, ty)
        }
    };
    Ok(e.finish(term, Some(ty)))
}

/// `⟦Σ; Γ ⊢ A : Set⟧`.
pub fn elaborate_type(sig: &Signature, defs: &DefEnv, ctx: &Context, ty: &Term) -> Result<ElabOutput, ElabError> {
    elaborate_check(sig, defs, ctx, ty, &Term::Set)
}

/// The trivial elaboration: the whole term goes into one constraint
/// `Γ ⊢ α Γ : A = t : β Γ` with `β` a fresh type. Useful only as a
/// baseline; the constraint is not well formed until `β` is known.
pub fn elaborate_opaque(sig: &Signature, ctx: &Context, t: &Term, ty: &Term) -> ElabOutput {
    let mut sig = sig.clone();
    let result = fresh_in(&mut sig, ctx, ty);
    let anything = fresh_in(&mut sig, ctx, &Term::Set);
    let c = Constraint {
        ctx: ctx.clone(),
        lhs: result.clone(),
        lhs_ty: ty.clone(),
        rhs: t.clone(),
        rhs_ty: anything,
    };
    ElabOutput {
        signature: sig,
        term: result,
        constraints: alloc::vec![c],
        inferred_type: None,
    }
}
