//! Shared fixtures for the integration suites: a standard definition
//! environment, a seeded generator of well-typed terms and an exhaustive
//! enumerator for the Set/Bool/Pi fragment.

#![allow(dead_code)]

pub mod enumerate;
pub mod generate;
pub mod oracle;
pub mod suites;

use metacheck_core::normalize::Env;
use metacheck_core::syntax::{Context, DefEnv, Elim, Head, Signature, Term};
use metacheck_core::typecheck::check;

/// `add : Nat -> Nat -> Nat` (postulated), `not : Bool -> Bool` and
/// `BoolOrNat : Bool -> Set`.
pub fn std_defs() -> DefEnv {
    let mut defs = DefEnv::new();
    defs.postulate(
        "add",
        Term::arrow(Term::Nat, Term::arrow(Term::Nat, Term::Nat)),
    );
    defs.define(
        "not",
        Term::arrow(Term::Bool, Term::Bool),
        Term::lam(if_then(Term::var(0), Term::Bool, Term::False, Term::True)),
    );
    defs.define(
        "BoolOrNat",
        Term::arrow(Term::Bool, Term::Set),
        Term::lam(if_then(Term::var(0), Term::Set, Term::Bool, Term::Nat)),
    );
    defs
}

/// `if n / _. motive then t else e` where `motive` does not mention the
/// bound variable; `n` must be neutral.
pub fn if_then(n: Term, motive: Term, t: Term, e: Term) -> Term {
    let Term::Neutral(head, mut elims) = n else {
        panic!("if_then expects a neutral scrutinee");
    };
    elims.push(Elim::If {
        motive: metacheck_core::syntax::shift(&motive, 1),
        then_branch: t,
        else_branch: e,
    });
    Term::Neutral(head, elims)
}

pub fn app(head: Head, args: Vec<Term>) -> Term {
    Term::neutral(head, args.into_iter().map(Elim::App).collect())
}

/// A handful of valid contexts used by the random suites.
pub fn contexts() -> Vec<Context> {
    let empty = Context::new();
    let mut nat = Context::new();
    nat.push("x", Term::Nat);
    let mut mixed = Context::new();
    mixed.push("b", Term::Bool);
    mixed.push("n", Term::Nat);
    let mut poly = Context::new();
    poly.push("A", Term::Set);
    poly.push("a", Term::var(0));
    poly.push("f", Term::arrow(Term::var(1), Term::Bool));
    let mut pairs = Context::new();
    pairs.push("p", Term::prod(Term::Bool, Term::Nat));
    pairs.push("g", Term::arrow(Term::Nat, Term::prod(Term::Nat, Term::Bool)));
    vec![empty, nat, mixed, poly, pairs]
}

/// A well-typed checking problem.
#[derive(Debug, Clone)]
pub struct Case {
    pub ctx: Context,
    pub term: Term,
    pub ty: Term,
}

pub fn well_typed(defs: &DefEnv, ctx: &Context, t: &Term, ty: &Term) -> bool {
    let sig = Signature::new();
    check(Env::new(&sig, defs), ctx, t, ty).is_ok()
}

/// Height of the syntax tree. Leaves have depth 0.
pub fn depth(t: &Term) -> usize {
    match t {
        Term::Set | Term::Bool | Term::True | Term::False | Term::Nat | Term::Zero => 0,
        Term::Pi(a, b) | Term::Prod(a, b) | Term::Pair(a, b) => 1 + depth(a).max(depth(b)),
        Term::Lam(b) | Term::Suc(b) => 1 + depth(b),
        Term::Neutral(_, elims) => {
            let inner = elims
                .iter()
                .map(|e| match e {
                    Elim::App(u) => depth(u),
                    Elim::If {
                        motive,
                        then_branch,
                        else_branch,
                    } => depth(motive).max(depth(then_branch)).max(depth(else_branch)),
                    Elim::Fst | Elim::Snd => 0,
                })
                .max();
            inner.map_or(0, |d| d + 1)
        }
    }
}
