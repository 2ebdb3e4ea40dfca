//! Core syntax: β-normal terms, contexts, signatures, meta-variable
//! substitutions and the top-level definition environment.
//!
//! Terms are kept in β-normal form at all times. A term is either canonical
//! (a constructor or type former) or neutral, in which case it is a head
//! (variable, meta-variable or global constant) followed by a spine of
//! eliminations. Bound variables are de Bruijn indices; index 0 is the
//! innermost binder.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Identifier of a meta-variable. Dense, assigned by a per-run counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetaId(pub u32);

impl fmt::Display for MetaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// Name of a top-level postulate or definition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: &str) -> Self {
        Ident(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(name: &str) -> Self {
        Ident::new(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    /// de Bruijn index into the enclosing context.
    Var(usize),
    Meta(MetaId),
    Def(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Elim {
    App(Term),
    /// `if _ / x. motive then then_branch else else_branch`; the motive binds
    /// one variable of type `Bool`.
    If {
        motive: Term,
        then_branch: Term,
        else_branch: Term,
    },
    Fst,
    Snd,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Set,
    Bool,
    True,
    False,
    /// `(x : domain) -> codomain`, the codomain binds one variable.
    Pi(Box<Term>, Box<Term>),
    /// `\x -> body`, the body binds one variable.
    Lam(Box<Term>),
    Neutral(Head, Vec<Elim>),
    Nat,
    Zero,
    Suc(Box<Term>),
    /// Non-dependent product `A * B`.
    Prod(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(index: usize) -> Term {
        Term::Neutral(Head::Var(index), Vec::new())
    }

    pub fn meta(id: MetaId) -> Term {
        Term::Neutral(Head::Meta(id), Vec::new())
    }

    pub fn def(name: impl Into<Ident>) -> Term {
        Term::Neutral(Head::Def(name.into()), Vec::new())
    }

    pub fn pi(domain: Term, codomain: Term) -> Term {
        Term::Pi(Box::new(domain), Box::new(codomain))
    }

    /// Non-dependent function type; `codomain` lives in the same context as
    /// `domain` and is weakened under the binder.
    pub fn arrow(domain: Term, codomain: Term) -> Term {
        Term::pi(domain, shift(&codomain, 1))
    }

    pub fn lam(body: Term) -> Term {
        Term::Lam(Box::new(body))
    }

    pub fn suc(t: Term) -> Term {
        Term::Suc(Box::new(t))
    }

    pub fn prod(left: Term, right: Term) -> Term {
        Term::Prod(Box::new(left), Box::new(right))
    }

    pub fn pair(first: Term, second: Term) -> Term {
        Term::Pair(Box::new(first), Box::new(second))
    }

    /// Natural number literal as a tower of `Suc` over `Zero`.
    pub fn nat(n: u64) -> Term {
        let mut t = Term::Zero;
        for _ in 0..n {
            t = Term::suc(t);
        }
        t
    }

    pub fn neutral(head: Head, elims: Vec<Elim>) -> Term {
        Term::Neutral(head, elims)
    }

    pub fn is_neutral(&self) -> bool {
        matches!(self, Term::Neutral(..))
    }

    /// The meta-variable heading this term, if it is a meta-headed neutral.
    pub fn meta_head(&self) -> Option<MetaId> {
        match self {
            Term::Neutral(Head::Meta(id), _) => Some(*id),
            _ => None,
        }
    }

    /// Appends elimination `elim` to a neutral term. Callers must ensure no
    /// redex is formed; use `normalize::eliminate` otherwise.
    pub fn push_elim(self, elim: Elim) -> Term {
        match self {
            Term::Neutral(head, mut elims) => {
                elims.push(elim);
                Term::Neutral(head, elims)
            }
            other => panic!("push_elim on canonical term {:?}", other),
        }
    }
}

/// Number of syntax nodes. Every term node and every elimination counts one.
pub fn term_size(t: &Term) -> usize {
    match t {
        Term::Set | Term::Bool | Term::True | Term::False | Term::Nat | Term::Zero => 1,
        Term::Pi(a, b) | Term::Prod(a, b) | Term::Pair(a, b) => 1 + term_size(a) + term_size(b),
        Term::Lam(b) | Term::Suc(b) => 1 + term_size(b),
        Term::Neutral(_, elims) => 1 + elims.iter().map(elim_size).sum::<usize>(),
    }
}

fn elim_size(e: &Elim) -> usize {
    match e {
        Elim::App(u) => 1 + term_size(u),
        Elim::If {
            motive,
            then_branch,
            else_branch,
        } => 1 + term_size(motive) + term_size(then_branch) + term_size(else_branch),
        Elim::Fst | Elim::Snd => 1,
    }
}

/// Generic structural traversal of the variables of a term. `on_var` is
/// called with the binder depth and the index; it returns the new index.
fn map_vars(t: &Term, depth: usize, on_var: &impl Fn(usize, usize) -> usize) -> Term {
    match t {
        Term::Set => Term::Set,
        Term::Bool => Term::Bool,
        Term::True => Term::True,
        Term::False => Term::False,
        Term::Nat => Term::Nat,
        Term::Zero => Term::Zero,
        Term::Suc(n) => Term::suc(map_vars(n, depth, on_var)),
        Term::Pi(a, b) => Term::pi(map_vars(a, depth, on_var), map_vars(b, depth + 1, on_var)),
        Term::Prod(a, b) => Term::prod(map_vars(a, depth, on_var), map_vars(b, depth, on_var)),
        Term::Pair(a, b) => Term::pair(map_vars(a, depth, on_var), map_vars(b, depth, on_var)),
        Term::Lam(b) => Term::lam(map_vars(b, depth + 1, on_var)),
        Term::Neutral(head, elims) => {
            let head = match head {
                Head::Var(i) => Head::Var(on_var(depth, *i)),
                other => other.clone(),
            };
            let elims = elims
                .iter()
                .map(|e| match e {
                    Elim::App(u) => Elim::App(map_vars(u, depth, on_var)),
                    Elim::If {
                        motive,
                        then_branch,
                        else_branch,
                    } => Elim::If {
                        motive: map_vars(motive, depth + 1, on_var),
                        then_branch: map_vars(then_branch, depth, on_var),
                        else_branch: map_vars(else_branch, depth, on_var),
                    },
                    Elim::Fst => Elim::Fst,
                    Elim::Snd => Elim::Snd,
                })
                .collect();
            Term::Neutral(head, elims)
        }
    }
}

/// Weakens `t` by `by` binders: every free index is incremented.
pub fn shift(t: &Term, by: usize) -> Term {
    shift_from(t, by, 0)
}

/// Weakens free indices `>= cutoff` by `by`.
pub fn shift_from(t: &Term, by: usize, cutoff: usize) -> Term {
    if by == 0 {
        return t.clone();
    }
    map_vars(t, 0, &|depth, i| if i >= depth + cutoff { i + by } else { i })
}

/// Strengthens `t` by removing `by` binders below `cutoff`. Returns `None`
/// if one of the removed variables occurs.
pub fn unshift(t: &Term, by: usize) -> Option<Term> {
    if (0..by).any(|i| occurs_var(t, i)) {
        return None;
    }
    Some(map_vars(t, 0, &|depth, i| if i >= depth { i - by } else { i }))
}

/// Renames free variables with `rename(index) -> index`.
pub fn rename_free(t: &Term, rename: &impl Fn(usize) -> usize) -> Term {
    map_vars(t, 0, &|depth, i| {
        if i >= depth {
            rename(i - depth) + depth
        } else {
            i
        }
    })
}

/// Does free variable `index` occur in `t`?
pub fn occurs_var(t: &Term, index: usize) -> bool {
    free_vars(t).contains(&index)
}

/// Free de Bruijn indices of `t`, relative to its outermost context.
pub fn free_vars(t: &Term) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    collect_free(t, 0, &mut out);
    out
}

fn collect_free(t: &Term, depth: usize, out: &mut BTreeSet<usize>) {
    match t {
        Term::Set | Term::Bool | Term::True | Term::False | Term::Nat | Term::Zero => {}
        Term::Suc(n) => collect_free(n, depth, out),
        Term::Pi(a, b) => {
            collect_free(a, depth, out);
            collect_free(b, depth + 1, out);
        }
        Term::Prod(a, b) | Term::Pair(a, b) => {
            collect_free(a, depth, out);
            collect_free(b, depth, out);
        }
        Term::Lam(b) => collect_free(b, depth + 1, out),
        Term::Neutral(head, elims) => {
            if let Head::Var(i) = head {
                if *i >= depth {
                    out.insert(*i - depth);
                }
            }
            for e in elims {
                match e {
                    Elim::App(u) => collect_free(u, depth, out),
                    Elim::If {
                        motive,
                        then_branch,
                        else_branch,
                    } => {
                        collect_free(motive, depth + 1, out);
                        collect_free(then_branch, depth, out);
                        collect_free(else_branch, depth, out);
                    }
                    Elim::Fst | Elim::Snd => {}
                }
            }
        }
    }
}

/// Meta-variables occurring anywhere in `t`.
pub fn metas(t: &Term) -> BTreeSet<MetaId> {
    let mut out = BTreeSet::new();
    collect_metas(t, &mut out);
    out
}

pub fn collect_metas(t: &Term, out: &mut BTreeSet<MetaId>) {
    match t {
        Term::Set | Term::Bool | Term::True | Term::False | Term::Nat | Term::Zero => {}
        Term::Suc(n) | Term::Lam(n) => collect_metas(n, out),
        Term::Pi(a, b) | Term::Prod(a, b) | Term::Pair(a, b) => {
            collect_metas(a, out);
            collect_metas(b, out);
        }
        Term::Neutral(head, elims) => {
            if let Head::Meta(id) = head {
                out.insert(*id);
            }
            for e in elims {
                match e {
                    Elim::App(u) => collect_metas(u, out),
                    Elim::If {
                        motive,
                        then_branch,
                        else_branch,
                    } => {
                        collect_metas(motive, out);
                        collect_metas(then_branch, out);
                        collect_metas(else_branch, out);
                    }
                    Elim::Fst | Elim::Snd => {}
                }
            }
        }
    }
}

/// A violation of the normal-form invariants found by [`normal_form_violation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// A variable index that escapes the binders and the ambient context.
    UnboundIndex { index: usize, depth: usize },
}

/// Scans `t`, living in a context of `ctx_len` variables, for violations of
/// the normal-form invariants.
///
/// Redexes (an eliminated λ, a conditional on a literal, a projection of a
/// pair) are unrepresentable: a neutral term stores a [`Head`], never a
/// canonical term, as the subject of its spine. What remains to check is
/// scoping.
pub fn normal_form_violation(t: &Term, ctx_len: usize) -> Option<Violation> {
    scan(t, ctx_len, 0)
}

fn scan(t: &Term, ctx_len: usize, depth: usize) -> Option<Violation> {
    match t {
        Term::Set | Term::Bool | Term::True | Term::False | Term::Nat | Term::Zero => None,
        Term::Suc(n) => scan(n, ctx_len, depth),
        Term::Lam(n) => scan(n, ctx_len, depth + 1),
        Term::Pi(a, b) => scan(a, ctx_len, depth).or_else(|| scan(b, ctx_len, depth + 1)),
        Term::Prod(a, b) | Term::Pair(a, b) => {
            scan(a, ctx_len, depth).or_else(|| scan(b, ctx_len, depth))
        }
        Term::Neutral(head, elims) => {
            if let Head::Var(i) = head {
                if *i >= depth + ctx_len {
                    return Some(Violation::UnboundIndex { index: *i, depth });
                }
            }
            elims.iter().find_map(|e| match e {
                Elim::App(u) => scan(u, ctx_len, depth),
                Elim::If {
                    motive,
                    then_branch,
                    else_branch,
                } => scan(motive, ctx_len, depth + 1)
                    .or_else(|| scan(then_branch, ctx_len, depth))
                    .or_else(|| scan(else_branch, ctx_len, depth)),
                Elim::Fst | Elim::Snd => None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScopeError {
    #[error("variable #{index} is out of scope in a context of length {len}")]
    VarOutOfRange { index: usize, len: usize },
    #[error("meta-variable {0} is not in the signature")]
    UnknownMeta(MetaId),
    #[error("unknown constant `{0}`")]
    UnknownDef(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub name: String,
    pub ty: Term,
}

/// Ordered list of typed variables; each type lives in the prefix before it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Context {
    entries: Vec<Binding>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Binding] {
        &self.entries
    }

    pub fn push(&mut self, name: impl Into<String>, ty: Term) {
        self.entries.push(Binding {
            name: name.into(),
            ty,
        });
    }

    pub fn pop(&mut self) -> Option<Binding> {
        self.entries.pop()
    }

    /// A copy of this context extended with one binding.
    pub fn extend(&self, name: impl Into<String>, ty: Term) -> Context {
        let mut ctx = self.clone();
        ctx.push(name, ty);
        ctx
    }

    /// The binding for de Bruijn index `index`, as stored (not weakened).
    pub fn binding(&self, index: usize) -> Option<&Binding> {
        let len = self.entries.len();
        if index < len {
            Some(&self.entries[len - 1 - index])
        } else {
            None
        }
    }

    pub fn map_types(&self, mut f: impl FnMut(&Term) -> Term) -> Context {
        Context {
            entries: self
                .entries
                .iter()
                .map(|b| Binding {
                    name: b.name.clone(),
                    ty: f(&b.ty),
                })
                .collect(),
        }
    }

    pub fn try_map_types<E>(&self, mut f: impl FnMut(&Term) -> Result<Term, E>) -> Result<Context, E> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for b in &self.entries {
            entries.push(Binding {
                name: b.name.clone(),
                ty: f(&b.ty)?,
            });
        }
        Ok(Context { entries })
    }

    /// `Γ → A`: closes `ty` (living in this context) over every binding.
    pub fn close_over(&self, ty: Term) -> Term {
        self.entries
            .iter()
            .rev()
            .fold(ty, |acc, b| Term::pi(b.ty.clone(), acc))
    }

    /// `t Γ`: the spine applying a term to every variable of the context,
    /// outermost first.
    pub fn spine(&self) -> Vec<Elim> {
        let n = self.entries.len();
        (0..n).map(|k| Elim::App(Term::var(n - 1 - k))).collect()
    }
}

/// `x : A ∈ Γ`, with `A` weakened to the whole context.
pub fn lookup_var(ctx: &Context, index: usize) -> Result<Term, ScopeError> {
    ctx.binding(index)
        .map(|b| shift(&b.ty, index + 1))
        .ok_or(ScopeError::VarOutOfRange {
            index,
            len: ctx.len(),
        })
}

/// Insertion-ordered map from meta-variables to closed types. Entries are
/// only ever added.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    types: BTreeMap<MetaId, Term>,
    next: u32,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn get(&self, id: MetaId) -> Option<&Term> {
        self.types.get(&id)
    }

    pub fn contains(&self, id: MetaId) -> bool {
        self.types.contains_key(&id)
    }

    /// Entries in creation order.
    pub fn iter(&self) -> impl Iterator<Item = (MetaId, &Term)> + '_ {
        self.types.iter().map(|(id, ty)| (*id, ty))
    }

    /// Id that the next call to [`Signature::extend`] will return.
    pub fn next_id(&self) -> MetaId {
        MetaId(self.next)
    }

    /// Adds a fresh meta-variable of closed type `ty`.
    pub fn extend(&mut self, ty: Term) -> MetaId {
        let id = MetaId(self.next);
        self.next += 1;
        self.types.insert(id, ty);
        id
    }

    /// Replaces the stored type of an existing meta-variable by a
    /// definitionally equal one (used when applying solutions).
    pub fn update_type(&mut self, id: MetaId, ty: Term) {
        if let Some(slot) = self.types.get_mut(&id) {
            *slot = ty;
        }
    }

    /// Keeps only the entries satisfying `keep`; the id counter is preserved
    /// so ids stay unique.
    pub fn retain(&mut self, mut keep: impl FnMut(MetaId) -> bool) {
        self.types.retain(|id, _| keep(*id));
    }

    /// Is `self` a prefix-extension of `other` (every entry of `other`
    /// present and unchanged)?
    pub fn extends(&self, other: &Signature) -> bool {
        other.iter().all(|(id, ty)| self.get(id) == Some(ty))
    }
}

/// Functional form of [`Signature::extend`].
pub fn extend_signature(sig: &Signature, ty: Term) -> (Signature, MetaId) {
    let mut sig = sig.clone();
    let id = sig.extend(ty);
    (sig, id)
}

/// Instantiations for meta-variables. Values are closed terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetaSubst {
    map: BTreeMap<MetaId, Term>,
}

impl MetaSubst {
    pub fn new() -> Self {
        MetaSubst::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, id: MetaId) -> Option<&Term> {
        self.map.get(&id)
    }

    pub fn contains(&self, id: MetaId) -> bool {
        self.map.contains_key(&id)
    }

    pub fn insert(&mut self, id: MetaId, t: Term) {
        self.map.insert(id, t);
    }

    pub fn iter(&self) -> impl Iterator<Item = (MetaId, &Term)> + '_ {
        self.map.iter().map(|(id, t)| (*id, t))
    }
}

impl FromIterator<(MetaId, Term)> for MetaSubst {
    fn from_iter<I: IntoIterator<Item = (MetaId, Term)>>(iter: I) -> Self {
        MetaSubst {
            map: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub ty: Term,
    /// `None` for postulates.
    pub body: Option<Term>,
}

/// Top-level postulates and definitions. Types and bodies are closed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefEnv {
    defs: BTreeMap<Ident, Definition>,
}

impl DefEnv {
    pub fn new() -> Self {
        DefEnv::default()
    }

    pub fn postulate(&mut self, name: impl Into<Ident>, ty: Term) {
        self.defs.insert(name.into(), Definition { ty, body: None });
    }

    pub fn define(&mut self, name: impl Into<Ident>, ty: Term, body: Term) {
        self.defs.insert(
            name.into(),
            Definition {
                ty,
                body: Some(body),
            },
        );
    }

    pub fn get(&self, name: &Ident) -> Option<&Definition> {
        self.defs.get(name)
    }

    pub fn contains(&self, name: &Ident) -> bool {
        self.defs.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Definition)> + '_ {
        self.defs.iter()
    }
}
