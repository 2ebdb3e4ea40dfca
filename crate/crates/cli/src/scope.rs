//! Name resolution: surface expressions to de Bruijn core terms.
//!
//! Bound names become indices, declared constants become `Def` heads and
//! declared metas become `Meta` heads. Core terms are β-normal by
//! construction, so a redex in the input (applying a λ, projecting a pair,
//! branching on a literal) is rejected here.

use std::collections::HashMap;

use metacheck_core::syntax::{Elim, Ident, MetaId, Term};
use thiserror::Error;

use crate::ast::{Decl, Expr, Pos, SourceFile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: scope error: {message}")]
pub struct ScopeError {
    pub pos: Pos,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Global {
    Constant,
    Meta(MetaId),
}

/// Top-level names in scope.
#[derive(Debug, Clone, Default)]
pub struct Resolver {
    globals: HashMap<String, Global>,
}

impl Resolver {
    pub fn new() -> Self {
        Resolver::default()
    }

    pub fn get(&self, name: &str) -> Option<Global> {
        self.globals.get(name).copied()
    }

    pub fn declare(&mut self, name: &str, g: Global, pos: Pos) -> Result<(), ScopeError> {
        if self.globals.contains_key(name) {
            return Err(ScopeError {
                pos,
                message: format!("`{}` is already declared", name),
            });
        }
        self.globals.insert(name.to_string(), g);
        Ok(())
    }

    /// Resolves a closed expression.
    pub fn resolve(&self, e: &Expr) -> Result<Term, ScopeError> {
        Resolution {
            globals: &self.globals,
            locals: Vec::new(),
        }
        .term(e)
    }
}

struct Resolution<'a> {
    globals: &'a HashMap<String, Global>,
    /// Innermost last.
    locals: Vec<String>,
}

fn err(pos: Pos, message: impl Into<String>) -> ScopeError {
    ScopeError {
        pos,
        message: message.into(),
    }
}

impl Resolution<'_> {
    fn under<T>(&mut self, x: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        self.locals.push(x.to_string());
        let r = f(self);
        self.locals.pop();
        r
    }

    fn term(&mut self, e: &Expr) -> Result<Term, ScopeError> {
        Ok(match e {
            Expr::Ident(x, p) => {
                if let Some(i) = self.locals.iter().rev().position(|y| y == x) {
                    Term::var(i)
                } else {
                    match self.globals.get(x) {
                        Some(Global::Constant) => Term::def(Ident::new(x)),
                        Some(Global::Meta(m)) => Term::meta(*m),
                        None => return Err(err(*p, format!("`{}` is not in scope", x))),
                    }
                }
            }
            Expr::Set => Term::Set,
            Expr::Bool => Term::Bool,
            Expr::Nat => Term::Nat,
            Expr::True => Term::True,
            Expr::False => Term::False,
            Expr::Zero => Term::Zero,
            Expr::Suc(n) => Term::suc(self.term(n)?),
            Expr::Lam(x, body) => Term::lam(self.under(x, |s| s.term(body))?),
            Expr::Pi(x, a, b) => {
                let a = self.term(a)?;
                Term::pi(a, self.under(x, |s| s.term(b))?)
            }
            Expr::Prod(a, b) => Term::prod(self.term(a)?, self.term(b)?),
            Expr::Pair(a, b) => Term::pair(self.term(a)?, self.term(b)?),
            Expr::App(f, a, p) => {
                let a = self.term(a)?;
                self.eliminate(f, Elim::App(a), *p, "apply")?
            }
            Expr::Fst(n, p) => self.eliminate(n, Elim::Fst, *p, "project from")?,
            Expr::Snd(n, p) => self.eliminate(n, Elim::Snd, *p, "project from")?,
            Expr::If {
                scrutinee,
                binder,
                motive,
                then_branch,
                else_branch,
                pos: p,
            } => {
                let motive = self.under(binder, |s| s.term(motive))?;
                let e = Elim::If {
                    motive,
                    then_branch: self.term(then_branch)?,
                    else_branch: self.term(else_branch)?,
                };
                self.eliminate(scrutinee, e, *p, "branch on")?
            }
        })
    }

    fn eliminate(&mut self, subject: &Expr, elim: Elim, pos: Pos, verb: &str) -> Result<Term, ScopeError> {
        match self.term(subject)? {
            Term::Neutral(h, mut es) => {
                es.push(elim);
                Ok(Term::Neutral(h, es))
            }
            other => {
                let what = match other {
                    Term::Lam(_) | Term::Pair(..) | Term::True | Term::False => {
                        "the input must be in normal form, but this is a redex"
                    }
                    _ => "only variables, constants and metas can be eliminated",
                };
                Err(err(
                    pos,
                    format!("cannot {} `{}`: {}", verb, crate::printer::print_expr(subject), what),
                ))
            }
        }
    }
}

/// A resolved declaration. Declared metas are numbered by declaration
/// order here; the driver allocates real ids as it goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreDecl {
    Postulate { name: String, ty: Term },
    Define { name: String, ty: Term, body: Term },
    Meta { name: String, ty: Term },
    Check { term: Term, ty: Term },
}

/// Resolves a whole file, numbering declared metas `?0, ?1, ...` in
/// declaration order.
pub fn scope_check(file: &SourceFile) -> Result<Vec<CoreDecl>, ScopeError> {
    let mut r = Resolver::new();
    let mut metas = 0;
    let mut out = Vec::new();
    for d in &file.decls {
        out.push(resolve_decl(&mut r, d, &mut || {
            metas += 1;
            MetaId(metas - 1)
        })?);
    }
    Ok(out)
}

/// Resolves one declaration and brings its name into scope. `fresh`
/// supplies the id of a declared meta.
pub fn resolve_decl(r: &mut Resolver, d: &Decl, fresh: &mut dyn FnMut() -> MetaId) -> Result<CoreDecl, ScopeError> {
    let pos = d.pos();
    Ok(match d {
        Decl::Postulate { name, ty, .. } => {
            let ty = r.resolve(ty)?;
            r.declare(name, Global::Constant, pos)?;
            CoreDecl::Postulate { name: name.clone(), ty }
        }
        Decl::Define { name, ty, body, .. } => {
            let ty = r.resolve(ty)?;
            let body = r.resolve(body)?;
            r.declare(name, Global::Constant, pos)?;
            CoreDecl::Define {
                name: name.clone(),
                ty,
                body,
            }
        }
        Decl::Meta { name, ty, .. } => {
            let ty = r.resolve(ty)?;
            if r.get(name).is_some() {
                return Err(err(pos, format!("`{}` is already declared", name)));
            }
            r.declare(name, Global::Meta(fresh()), pos)?;
            CoreDecl::Meta { name: name.clone(), ty }
        }
        Decl::Check { term, ty, .. } => CoreDecl::Check {
            term: r.resolve(term)?,
            ty: r.resolve(ty)?,
        },
    })
}
