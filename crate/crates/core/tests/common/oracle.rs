//! A naive reference for hereditary substitution: raw syntax in which
//! redexes are representable, textbook capture-avoiding substitution, and
//! normalization by repeated contraction. Constants are not unfolded.

use metacheck_core::syntax::{Elim, Head, Term};

#[derive(Debug, Clone, PartialEq)]
pub enum Raw {
    Set,
    Bool,
    True,
    False,
    Nat,
    Zero,
    Suc(Box<Raw>),
    Pi(Box<Raw>, Box<Raw>),
    Lam(Box<Raw>),
    Prod(Box<Raw>, Box<Raw>),
    Pair(Box<Raw>, Box<Raw>),
    Atom(Head),
    App(Box<Raw>, Box<Raw>),
    If(Box<Raw>, Box<Raw>, Box<Raw>, Box<Raw>),
    Fst(Box<Raw>),
    Snd(Box<Raw>),
}

use Raw::*;

fn b(r: Raw) -> Box<Raw> {
    Box::new(r)
}

pub fn from_term(t: &Term) -> Raw {
    match t {
        Term::Set => Set,
        Term::Bool => Bool,
        Term::True => True,
        Term::False => False,
        Term::Nat => Nat,
        Term::Zero => Zero,
        Term::Suc(n) => Suc(b(from_term(n))),
        Term::Pi(a, c) => Pi(b(from_term(a)), b(from_term(c))),
        Term::Lam(c) => Lam(b(from_term(c))),
        Term::Prod(x, y) => Prod(b(from_term(x)), b(from_term(y))),
        Term::Pair(x, y) => Pair(b(from_term(x)), b(from_term(y))),
        Term::Neutral(h, es) => es.iter().fold(Atom(h.clone()), |acc, e| match e {
            Elim::App(u) => App(b(acc), b(from_term(u))),
            Elim::If {
                motive,
                then_branch,
                else_branch,
            } => If(
                b(acc),
                b(from_term(motive)),
                b(from_term(then_branch)),
                b(from_term(else_branch)),
            ),
            Elim::Fst => Fst(b(acc)),
            Elim::Snd => Snd(b(acc)),
        }),
    }
}

/// Converts a normal raw term back; `None` if a redex remains.
pub fn to_term(r: &Raw) -> Option<Term> {
    Some(match r {
        Set => Term::Set,
        Bool => Term::Bool,
        True => Term::True,
        False => Term::False,
        Nat => Term::Nat,
        Zero => Term::Zero,
        Suc(n) => Term::suc(to_term(n)?),
        Pi(a, c) => Term::pi(to_term(a)?, to_term(c)?),
        Lam(c) => Term::lam(to_term(c)?),
        Prod(x, y) => Term::prod(to_term(x)?, to_term(y)?),
        Pair(x, y) => Term::pair(to_term(x)?, to_term(y)?),
        Atom(h) => Term::neutral(h.clone(), Vec::new()),
        App(f, u) => push(to_term(f)?, Elim::App(to_term(u)?))?,
        If(s, m, t, e) => push(
            to_term(s)?,
            Elim::If {
                motive: to_term(m)?,
                then_branch: to_term(t)?,
                else_branch: to_term(e)?,
            },
        )?,
        Fst(p) => push(to_term(p)?, Elim::Fst)?,
        Snd(p) => push(to_term(p)?, Elim::Snd)?,
    })
}

fn push(t: Term, e: Elim) -> Option<Term> {
    match t {
        Term::Neutral(h, mut es) => {
            es.push(e);
            Some(Term::Neutral(h, es))
        }
        _ => None,
    }
}

/// Applies `f` to every free variable, passing the binder depth.
fn map_vars(r: &Raw, depth: usize, f: &impl Fn(usize, usize) -> Raw) -> Raw {
    let go = |x: &Raw| map_vars(x, depth, f);
    let under = |x: &Raw| map_vars(x, depth + 1, f);
    match r {
        Set | Bool | True | False | Nat | Zero => r.clone(),
        Suc(n) => Suc(b(go(n))),
        Pi(a, c) => Pi(b(go(a)), b(under(c))),
        Lam(c) => Lam(b(under(c))),
        Prod(x, y) => Prod(b(go(x)), b(go(y))),
        Pair(x, y) => Pair(b(go(x)), b(go(y))),
        Atom(Head::Var(i)) if *i >= depth => f(depth, *i),
        Atom(_) => r.clone(),
        App(x, y) => App(b(go(x)), b(go(y))),
        If(s, m, t, e) => If(b(go(s)), b(under(m)), b(go(t)), b(go(e))),
        Fst(p) => Fst(b(go(p))),
        Snd(p) => Snd(b(go(p))),
    }
}

fn var(i: usize) -> Raw {
    Atom(Head::Var(i))
}

pub fn shift(r: &Raw, by: usize) -> Raw {
    map_vars(r, 0, &|_, i| var(i + by))
}

/// Replaces free variable `j` by `u` (same context, nothing removed).
pub fn replace_var(r: &Raw, j: usize, u: &Raw) -> Raw {
    map_vars(r, 0, &|d, i| if i - d == j { shift(u, d) } else { var(i) })
}

/// Replaces a meta or constant head by the closed term `u`.
pub fn replace_head(r: &Raw, h: &Head, u: &Raw) -> Raw {
    let go = |x: &Raw| replace_head(x, h, u);
    match r {
        Atom(h2) if h2 == h => u.clone(),
        Set | Bool | True | False | Nat | Zero | Atom(_) => r.clone(),
        Suc(n) => Suc(b(go(n))),
        Pi(a, c) => Pi(b(go(a)), b(go(c))),
        Lam(c) => Lam(b(go(c))),
        Prod(x, y) => Prod(b(go(x)), b(go(y))),
        Pair(x, y) => Pair(b(go(x)), b(go(y))),
        App(x, y) => App(b(go(x)), b(go(y))),
        If(s, m, t, e) => If(b(go(s)), b(go(m)), b(go(t)), b(go(e))),
        Fst(p) => Fst(b(go(p))),
        Snd(p) => Snd(b(go(p))),
    }
}

/// `body[0 := u]`, removing the binder.
fn beta(body: &Raw, u: &Raw) -> Raw {
    map_vars(body, 0, &|d, i| {
        if i == d {
            shift(u, d)
        } else {
            var(i - 1)
        }
    })
}

/// Full normal form by contraction. Terminates on well-typed input.
pub fn normalize(r: &Raw) -> Raw {
    match r {
        Set | Bool | True | False | Nat | Zero | Atom(_) => r.clone(),
        Suc(n) => Suc(b(normalize(n))),
        Pi(a, c) => Pi(b(normalize(a)), b(normalize(c))),
        Lam(c) => Lam(b(normalize(c))),
        Prod(x, y) => Prod(b(normalize(x)), b(normalize(y))),
        Pair(x, y) => Pair(b(normalize(x)), b(normalize(y))),
        App(f, u) => match normalize(f) {
            Lam(body) => normalize(&beta(&body, u)),
            f => App(b(f), b(normalize(u))),
        },
        If(s, m, t, e) => match normalize(s) {
            True => normalize(t),
            False => normalize(e),
            s => If(b(s), b(normalize(m)), b(normalize(t)), b(normalize(e))),
        },
        Fst(p) => match normalize(p) {
            Pair(x, _) => *x,
            p => Fst(b(p)),
        },
        Snd(p) => match normalize(p) {
            Pair(_, y) => *y,
            p => Snd(b(p)),
        },
    }
}

/// The reference result of `t[h := u]`.
pub fn substitute(t: &Term, h: &Head, u: &Term) -> Option<Term> {
    let (t, u) = (from_term(t), from_term(u));
    let raw = match h {
        Head::Var(j) => replace_var(&t, *j, &u),
        other => replace_head(&t, other, &u),
    };
    to_term(&normalize(&raw))
}
