//! Printing terms in the surface syntax.
//!
//! Bound variables get fresh names that avoid every name already in scope and
//! every constant mentioned by the term. Variables not covered by the naming
//! context print as `#i`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::syntax::{occurs_var, Context, Elim, Head, Term};

const TOP: u8 = 0;
const PROD: u8 = 1;
const APP: u8 = 2;
const ATOM: u8 = 3;

/// Names for the variables in scope, innermost last.
#[derive(Debug, Clone, Default)]
pub struct Names {
    names: Vec<String>,
    reserved: BTreeSet<String>,
}

impl Names {
    pub fn new() -> Self {
        Names::default()
    }

    /// Names for a context; repeated display names are disambiguated.
    pub fn for_context(ctx: &Context) -> Self {
        let mut names = Names::new();
        for b in ctx.entries() {
            let name = names.fresh(&b.name);
            names.names.push(name);
        }
        names
    }

    /// Constant names bound variables must not capture.
    pub fn reserve(&mut self, name: &str) {
        self.reserved.insert(name.to_string());
    }

    pub fn as_slice(&self) -> &[String] {
        &self.names
    }

    fn taken(&self, name: &str) -> bool {
        self.reserved.contains(name) || self.names.iter().any(|n| n == name) || is_keyword(name)
    }

    fn fresh(&self, base: &str) -> String {
        let base = if base.is_empty() || base == "_" { "x" } else { base };
        if !self.taken(base) {
            return base.to_string();
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { "x" } else { stem };
        (1..)
            .map(|i| format!("{}{}", stem, i))
            .find(|n| !self.taken(n))
            .expect("unbounded name supply")
    }

    fn push(&mut self, base: &str) -> String {
        let name = self.fresh(base);
        self.names.push(name.clone());
        name
    }

    fn pop(&mut self) {
        self.names.pop();
    }

    fn lookup(&self, index: usize) -> Option<&str> {
        let len = self.names.len();
        if index < len {
            Some(&self.names[len - 1 - index])
        } else {
            None
        }
    }
}

pub fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "Set"
            | "Bool"
            | "Nat"
            | "true"
            | "false"
            | "zero"
            | "suc"
            | "fst"
            | "snd"
            | "if"
            | "then"
            | "else"
            | "postulate"
            | "define"
            | "meta"
            | "check"
    )
}

fn reserve_defs(t: &Term, names: &mut Names) {
    let mut go = |t: &Term| {
        if let Term::Neutral(Head::Def(d), _) = t {
            names.reserve(d.as_str());
        }
    };
    visit(t, &mut go);
}

fn visit(t: &Term, f: &mut impl FnMut(&Term)) {
    f(t);
    match t {
        Term::Pi(a, b) | Term::Prod(a, b) | Term::Pair(a, b) => {
            visit(a, f);
            visit(b, f);
        }
        Term::Lam(b) | Term::Suc(b) => visit(b, f),
        Term::Neutral(_, elims) => {
            for e in elims {
                match e {
                    Elim::App(u) => visit(u, f),
                    Elim::If {
                        motive,
                        then_branch,
                        else_branch,
                    } => {
                        visit(motive, f);
                        visit(then_branch, f);
                        visit(else_branch, f);
                    }
                    Elim::Fst | Elim::Snd => {}
                }
            }
        }
        _ => {}
    }
}

struct Printer<'n> {
    names: &'n mut Names,
}

impl Printer<'_> {
    fn term(&mut self, out: &mut String, t: &Term, prec: u8) -> fmt::Result {
        match t {
            Term::Set => out.write_str("Set"),
            Term::Bool => out.write_str("Bool"),
            Term::Nat => out.write_str("Nat"),
            Term::True => out.write_str("true"),
            Term::False => out.write_str("false"),
            Term::Zero => out.write_str("zero"),
            Term::Suc(n) => self.parens(out, prec > APP, |p, out| {
                out.write_str("suc ")?;
                p.term(out, n, ATOM)
            }),
            Term::Lam(body) => self.parens(out, prec > TOP, |p, out| {
                let x = p.names.push("x");
                write!(out, "\\{} -> ", x)?;
                let r = p.term(out, body, TOP);
                p.names.pop();
                r
            }),
            Term::Pi(a, b) => self.parens(out, prec > TOP, |p, out| {
                if occurs_var(b, 0) {
                    let x = p.names.fresh("x");
                    write!(out, "({} : ", x)?;
                    p.term(out, a, TOP)?;
                    out.write_str(") -> ")?;
                    p.names.names.push(x);
                } else {
                    p.term(out, a, PROD)?;
                    out.write_str(" -> ")?;
                    p.names.names.push("_".to_string());
                }
                let r = p.term(out, b, TOP);
                p.names.pop();
                r
            }),
            Term::Prod(a, b) => self.parens(out, prec > PROD, |p, out| {
                p.term(out, a, APP)?;
                out.write_str(" * ")?;
                p.term(out, b, PROD)
            }),
            Term::Pair(a, b) => {
                out.write_str("(")?;
                self.term(out, a, TOP)?;
                out.write_str(", ")?;
                self.term(out, b, TOP)?;
                out.write_str(")")
            }
            Term::Neutral(head, elims) => self.neutral(out, head, elims, prec),
        }
    }

    fn neutral(&mut self, out: &mut String, head: &Head, elims: &[Elim], prec: u8) -> fmt::Result {
        let Some((last, init)) = elims.split_last() else {
            return self.head(out, head);
        };
        match last {
            Elim::App(u) => self.parens(out, prec > APP, |p, out| {
                p.neutral(out, head, init, APP)?;
                out.write_str(" ")?;
                p.term(out, u, ATOM)
            }),
            Elim::Fst | Elim::Snd => self.parens(out, prec > APP, |p, out| {
                out.write_str(if matches!(last, Elim::Fst) { "fst " } else { "snd " })?;
                p.neutral(out, head, init, ATOM)
            }),
            Elim::If {
                motive,
                then_branch,
                else_branch,
            } => self.parens(out, prec > TOP, |p, out| {
                out.write_str("if ")?;
                p.neutral(out, head, init, APP)?;
                let x = p.names.push("x");
                write!(out, " / {}. ", x)?;
                let r = p.term(out, motive, TOP);
                p.names.pop();
                r?;
                out.write_str(" then ")?;
                p.term(out, then_branch, TOP)?;
                out.write_str(" else ")?;
                p.term(out, else_branch, TOP)
            }),
        }
    }

    fn head(&mut self, out: &mut String, head: &Head) -> fmt::Result {
        match head {
            Head::Var(i) => match self.names.lookup(*i) {
                Some(n) => out.write_str(n),
                None => write!(out, "#{}", i),
            },
            Head::Meta(m) => write!(out, "{}", m),
            Head::Def(d) => out.write_str(d.as_str()),
        }
    }

    fn parens(
        &mut self,
        out: &mut String,
        wrap: bool,
        body: impl FnOnce(&mut Self, &mut String) -> fmt::Result,
    ) -> fmt::Result {
        if wrap {
            out.write_str("(")?;
        }
        body(self, out)?;
        if wrap {
            out.write_str(")")?;
        }
        Ok(())
    }
}

/// Prints `t` with its free variables named by `names`.
pub fn show_with(t: &Term, names: &Names) -> String {
    let mut names = names.clone();
    reserve_defs(t, &mut names);
    let mut out = String::new();
    Printer { names: &mut names }
        .term(&mut out, t, TOP)
        .expect("writing to a string cannot fail");
    out
}

/// Prints `t` in context `ctx`.
pub fn show(t: &Term, ctx: &Context) -> String {
    show_with(t, &Names::for_context(ctx))
}

/// Prints a context as `x : A, y : B`, or `.` when empty.
pub fn show_context(ctx: &Context) -> String {
    if ctx.is_empty() {
        return ".".to_string();
    }
    let mut names = Names::new();
    let mut parts = Vec::with_capacity(ctx.len());
    for b in ctx.entries() {
        let ty = show_with(&b.ty, &names);
        let name = names.push(&b.name);
        parts.push(format!("{} : {}", name, ty));
    }
    parts.join(", ")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&show_with(self, &Names::new()))
    }
}
