//! Seeded, type-directed generation of meta-free terms over the full
//! language (Nat, products and the standard definitions included).
//!
//! The generator aims for well-typed output but is not trusted: callers
//! filter candidates with the declarative checker.

use metacheck_core::normalize::{instantiate, whnf_term, Env};
use metacheck_core::syntax::{lookup_var, shift, Context, DefEnv, Elim, Head, Ident, Signature, Term};
use metacheck_core::typecheck::{convert, Conv};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{contexts, depth, std_defs, well_typed, Case};

pub const MAX_DEPTH: usize = 5;

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub defs: DefEnv,
    sig: Signature,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            defs: std_defs(),
            sig: Signature::new(),
        }
    }

    fn env(&self) -> Env<'_> {
        Env::new(&self.sig, &self.defs)
    }

    fn whnf(&self, t: &Term) -> Term {
        whnf_term(self.env(), t).unwrap_or_else(|_| t.clone())
    }

    fn same_type(&self, ctx: &Context, a: &Term, b: &Term) -> bool {
        matches!(convert(self.env(), ctx, a, b, &Term::Set), Ok(Conv::Yes))
    }

    /// A type well-formed in `ctx`.
    pub fn ty(&mut self, ctx: &Context, fuel: usize) -> Term {
        let set_vars: Vec<usize> = (0..ctx.len())
            .filter(|&i| matches!(lookup_var(ctx, i), Ok(Term::Set)))
            .collect();
        let pick = if fuel == 0 { self.rng.gen_range(0..4) } else { self.rng.gen_range(0..9) };
        match pick {
            0 => Term::Bool,
            1 => Term::Nat,
            2 => Term::Set,
            3 => match set_vars.choose(&mut self.rng) {
                Some(&i) => Term::var(i),
                None => Term::Bool,
            },
            4 | 5 => {
                let a = self.ty(ctx, fuel - 1);
                let inner = ctx.extend("x", a.clone());
                let b = self.ty(&inner, fuel - 1);
                Term::pi(a, b)
            }
            6 => Term::prod(self.ty(ctx, fuel - 1), self.ty(ctx, fuel - 1)),
            7 => {
                let b = self.term(ctx, &Term::Bool, fuel - 1).unwrap_or(Term::True);
                Term::neutral(Head::Def(Ident::new("BoolOrNat")), vec![Elim::App(b)])
            }
            _ => match self.neutral(ctx, &Term::Bool, fuel - 1) {
                Some(Term::Neutral(h, mut es)) => {
                    es.push(Elim::If {
                        motive: Term::Set,
                        then_branch: self.ty(ctx, fuel - 1),
                        else_branch: self.ty(ctx, fuel - 1),
                    });
                    Term::Neutral(h, es)
                }
                _ => Term::Nat,
            },
        }
    }

    /// A term of type `ty` in `ctx`, if one is found.
    pub fn term(&mut self, ctx: &Context, ty: &Term, fuel: usize) -> Option<Term> {
        let w = self.whnf(ty);
        let try_neutral = fuel > 0 && self.rng.gen_bool(0.3);
        if try_neutral {
            if let Some(n) = self.neutral(ctx, ty, fuel - 1) {
                return Some(n);
            }
        }
        let sub = fuel.saturating_sub(1);
        match &w {
            Term::Set => Some(self.ty(ctx, sub)),
            Term::Bool => Some(match self.rng.gen_range(0..3) {
                0 => Term::True,
                1 => Term::False,
                _ if fuel > 0 => {
                    let b = self.term(ctx, &Term::Bool, sub)?;
                    Term::neutral(Head::Def(Ident::new("not")), vec![Elim::App(b)])
                }
                _ => Term::True,
            }),
            Term::Nat => Some(match self.rng.gen_range(0..3) {
                0 => Term::Zero,
                1 if fuel > 0 => Term::suc(self.term(ctx, &Term::Nat, sub)?),
                2 if fuel > 0 => {
                    let m = self.term(ctx, &Term::Nat, sub)?;
                    let n = self.term(ctx, &Term::Nat, sub)?;
                    Term::neutral(Head::Def(Ident::new("add")), vec![Elim::App(m), Elim::App(n)])
                }
                _ => Term::Zero,
            }),
            Term::Pi(a, b) => {
                let inner = ctx.extend("x", (**a).clone());
                Some(Term::lam(self.term(&inner, b, sub)?))
            }
            Term::Prod(a, b) => Some(Term::pair(self.term(ctx, a, sub)?, self.term(ctx, b, sub)?)),
            _ => self.neutral(ctx, ty, sub),
        }
    }

    /// A neutral term of type `target`, built by eliminating a variable or a
    /// constant.
    pub fn neutral(&mut self, ctx: &Context, target: &Term, fuel: usize) -> Option<Term> {
        let mut heads: Vec<(Head, Term)> = (0..ctx.len())
            .map(|i| (Head::Var(i), lookup_var(ctx, i).expect("index in range")))
            .collect();
        for (name, d) in self.defs.iter() {
            heads.push((Head::Def(name.clone()), d.ty.clone()));
        }
        heads.shuffle(&mut self.rng);
        for (head, head_ty) in heads.into_iter().take(4) {
            if let Some(t) = self.eliminate(ctx, head, head_ty, target, fuel) {
                return Some(t);
            }
        }
        None
    }

    fn eliminate(&mut self, ctx: &Context, head: Head, head_ty: Term, target: &Term, fuel: usize) -> Option<Term> {
        let mut elims = Vec::new();
        let mut ty = head_ty;
        for _ in 0..4 {
            if self.same_type(ctx, &ty, target) && (!elims.is_empty() || self.rng.gen_bool(0.7)) {
                return Some(Term::Neutral(head, elims));
            }
            match self.whnf(&ty) {
                Term::Pi(a, b) => {
                    let arg = self.term(ctx, &a, fuel)?;
                    ty = instantiate(&b, &arg).ok()?;
                    elims.push(Elim::App(arg));
                }
                Term::Prod(a, b) => {
                    if self.rng.gen_bool(0.5) {
                        elims.push(Elim::Fst);
                        ty = *a;
                    } else {
                        elims.push(Elim::Snd);
                        ty = *b;
                    }
                }
                Term::Bool if fuel > 0 => {
                    let then_branch = self.term(ctx, target, fuel - 1)?;
                    let else_branch = self.term(ctx, target, fuel - 1)?;
                    elims.push(Elim::If {
                        motive: shift(target, 1),
                        then_branch,
                        else_branch,
                    });
                    return Some(Term::Neutral(head, elims));
                }
                _ => return None,
            }
        }
        None
    }

    /// A random well-typed case with depth at most [`MAX_DEPTH`].
    pub fn case(&mut self) -> Case {
        let ctxs = contexts();
        loop {
            let ctx = ctxs.choose(&mut self.rng).expect("nonempty").clone();
            let ty = self.ty(&ctx, 2);
            let fuel = self.rng.gen_range(2..=5);
            let Some(term) = self.term(&ctx, &ty, fuel) else { continue };
            if depth(&term) <= MAX_DEPTH && well_typed(&self.defs, &ctx, &term, &ty) {
                return Case { ctx, term, ty };
            }
        }
    }

    /// A scope-correct term that need not be well-typed.
    pub fn scoped(&mut self, ctx_len: usize, fuel: usize) -> Term {
        let leaf = fuel == 0;
        match self.rng.gen_range(0..if leaf { 7 } else { 14 }) {
            0 => Term::Set,
            1 => Term::Bool,
            2 => Term::True,
            3 => Term::Nat,
            4 => Term::Zero,
            5 | 6 if ctx_len > 0 => Term::var(self.rng.gen_range(0..ctx_len)),
            5 | 6 => Term::False,
            7 => Term::lam(self.scoped(ctx_len + 1, fuel - 1)),
            8 => Term::pi(self.scoped(ctx_len, fuel - 1), self.scoped(ctx_len + 1, fuel - 1)),
            9 => Term::pair(self.scoped(ctx_len, fuel - 1), self.scoped(ctx_len, fuel - 1)),
            10 => Term::suc(self.scoped(ctx_len, fuel - 1)),
            11 => Term::prod(self.scoped(ctx_len, fuel - 1), self.scoped(ctx_len, fuel - 1)),
            _ => {
                let head = if ctx_len > 0 && self.rng.gen_bool(0.6) {
                    Head::Var(self.rng.gen_range(0..ctx_len))
                } else {
                    let names = ["add", "not", "BoolOrNat"];
                    Head::Def(Ident::new(names.choose(&mut self.rng).expect("nonempty")))
                };
                let n = self.rng.gen_range(0..3);
                let elims = (0..n)
                    .map(|_| match self.rng.gen_range(0..5) {
                        0 => Elim::Fst,
                        1 => Elim::Snd,
                        2 => Elim::If {
                            motive: self.scoped(ctx_len + 1, fuel - 1),
                            then_branch: self.scoped(ctx_len, fuel - 1),
                            else_branch: self.scoped(ctx_len, fuel - 1),
                        },
                        _ => Elim::App(self.scoped(ctx_len, fuel - 1)),
                    })
                    .collect();
                Term::Neutral(head, elims)
            }
        }
    }
}
