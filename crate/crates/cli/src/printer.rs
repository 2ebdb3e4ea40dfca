//! Prints surface syntax so that the output parses back to the same AST.

use crate::ast::{Decl, Expr, SourceFile};

const TOP: u8 = 0;
const PROD: u8 = 1;
const APP: u8 = 2;
const ATOM: u8 = 3;

pub fn print_file(f: &SourceFile) -> String {
    f.decls.iter().map(|d| print_decl(d) + "\n").collect()
}

pub fn print_decl(d: &Decl) -> String {
    match d {
        Decl::Postulate { name, ty, .. } => format!("postulate {} : {}", name, print_expr(ty)),
        Decl::Define { name, ty, body, .. } => {
            format!("define {} : {} = {}", name, print_expr(ty), print_expr(body))
        }
        Decl::Meta { name, ty, .. } => format!("meta {} : {}", name, print_expr(ty)),
        Decl::Check { term, ty, .. } => format!("check {} : {}", print_expr(term), print_expr(ty)),
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    go(&mut out, e, TOP);
    out
}

/// `suc (... (suc zero))` as a number.
fn numeral(e: &Expr) -> Option<u64> {
    match e {
        Expr::Zero => Some(0),
        Expr::Suc(n) => numeral(n).map(|k| k + 1),
        _ => None,
    }
}

fn go(out: &mut String, e: &Expr, prec: u8) {
    let wrap = |out: &mut String, needed: u8, body: &dyn Fn(&mut String)| {
        if prec > needed {
            out.push('(');
            body(out);
            out.push(')');
        } else {
            body(out);
        }
    };
    if let Some(n) = numeral(e) {
        out.push_str(&n.to_string());
        return;
    }
    match e {
        Expr::Ident(x, _) => out.push_str(x),
        Expr::Set => out.push_str("Set"),
        Expr::Bool => out.push_str("Bool"),
        Expr::Nat => out.push_str("Nat"),
        Expr::True => out.push_str("true"),
        Expr::False => out.push_str("false"),
        Expr::Zero => out.push_str("zero"),
        Expr::Suc(n) => wrap(out, APP, &|out| {
            out.push_str("suc ");
            go(out, n, ATOM);
        }),
        Expr::Fst(n, _) | Expr::Snd(n, _) => wrap(out, APP, &|out| {
            out.push_str(if matches!(e, Expr::Fst(..)) { "fst " } else { "snd " });
            go(out, n, ATOM);
        }),
        Expr::App(f, a, _) => wrap(out, APP, &|out| {
            go(out, f, APP);
            out.push(' ');
            go(out, a, ATOM);
        }),
        Expr::Prod(a, b) => wrap(out, PROD, &|out| {
            go(out, a, APP);
            out.push_str(" * ");
            go(out, b, PROD);
        }),
        Expr::Pair(a, b) => {
            out.push('(');
            go(out, a, TOP);
            out.push_str(", ");
            go(out, b, TOP);
            out.push(')');
        }
        Expr::Lam(x, body) => wrap(out, TOP, &|out| {
            out.push('\\');
            out.push_str(x);
            out.push_str(" -> ");
            go(out, body, TOP);
        }),
        Expr::Pi(x, a, b) => wrap(out, TOP, &|out| {
            if x == "_" {
                go(out, a, PROD);
            } else {
                out.push('(');
                out.push_str(x);
                out.push_str(" : ");
                go(out, a, TOP);
                out.push(')');
            }
            out.push_str(" -> ");
            go(out, b, TOP);
        }),
        Expr::If {
            scrutinee,
            binder,
            motive,
            then_branch,
            else_branch,
            ..
        } => wrap(out, TOP, &|out| {
            out.push_str("if ");
            go(out, scrutinee, APP);
            out.push_str(" / ");
            out.push_str(binder);
            out.push_str(". ");
            go(out, motive, TOP);
            out.push_str(" then ");
            go(out, then_branch, TOP);
            out.push_str(" else ");
            go(out, else_branch, TOP);
        }),
    }
}
