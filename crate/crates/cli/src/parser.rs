//! Recursive-descent parser.
//!
//! ```text
//! file   ::= decl*
//! decl   ::= postulate x : expr | define x : expr = expr
//!          | meta x : expr | check expr : expr
//! expr   ::= \ binder+ -> expr
//!          | if app / binder . expr then expr else expr
//!          | ( binder+ : expr ) -> expr
//!          | prod [-> expr]
//! prod   ::= app [* prod]
//! app    ::= head atom*
//! head   ::= suc atom | fst atom | snd atom | atom
//! atom   ::= x | Set | Bool | Nat | true | false | zero | n
//!          | ( expr ) | ( expr , expr , ... )
//! ```
//!
//! Application is left associative, `->` and `*` are right associative and
//! `*` binds tighter than `->`. Number literals become towers of `suc`.

use crate::ast::{Binder, Decl, Expr, Pos, SourceFile};
use crate::lexer::{tokenize, SyntaxError, Tok};

pub fn parse(src: &str) -> Result<SourceFile, SyntaxError> {
    let toks = tokenize(src)?;
    let end = end_pos(src);
    let mut p = Parser { toks, at: 0, end };
    let mut decls = Vec::new();
    while !p.done() {
        decls.push(p.decl()?);
    }
    Ok(SourceFile { decls })
}

/// Parses a single expression, for tests and tools.
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: end_pos(src),
    };
    let e = p.expr()?;
    if !p.done() {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

fn end_pos(src: &str) -> Pos {
    let line = src.lines().count().max(1);
    let col = src.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Pos { line, col }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn done(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        let found = self.peek().map_or("end of input".to_string(), Tok::describe);
        SyntaxError {
            pos: self.pos(),
            message: format!("expected {}, found {}", wanted, found),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn name(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(x)) => {
                let x = x.clone();
                self.at += 1;
                Ok(x)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn binder(&mut self) -> Result<Binder, SyntaxError> {
        if self.peek() == Some(&Tok::Underscore) {
            self.at += 1;
            return Ok("_".into());
        }
        self.name()
    }

    fn is_binder(t: Option<&Tok>) -> bool {
        matches!(t, Some(Tok::Ident(_)) | Some(Tok::Underscore))
    }

    fn decl(&mut self) -> Result<Decl, SyntaxError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Keyword("postulate")) => {
                let name = self.name()?;
                self.expect(Tok::Colon)?;
                let ty = self.expr()?;
                Ok(Decl::Postulate { name, ty, pos })
            }
            Some(Tok::Keyword("define")) => {
                let name = self.name()?;
                self.expect(Tok::Colon)?;
                let ty = self.expr()?;
                self.expect(Tok::Equals)?;
                let body = self.expr()?;
                Ok(Decl::Define { name, ty, body, pos })
            }
            Some(Tok::Keyword("meta")) => {
                let name = self.name()?;
                self.expect(Tok::Colon)?;
                let ty = self.expr()?;
                Ok(Decl::Meta { name, ty, pos })
            }
            Some(Tok::Keyword("check")) => {
                let term = self.expr()?;
                self.expect(Tok::Colon)?;
                let ty = self.expr()?;
                Ok(Decl::Check { term, ty, pos })
            }
            _ => {
                self.at -= 1;
                Err(self.unexpected("a declaration (postulate, define, meta or check)"))
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Some(Tok::Backslash) => {
                self.at += 1;
                let mut binders = vec![self.binder()?];
                while Self::is_binder(self.peek()) {
                    binders.push(self.binder()?);
                }
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                Ok(binders
                    .into_iter()
                    .rev()
                    .fold(body, |b, x| Expr::Lam(x, Box::new(b))))
            }
            Some(Tok::Keyword("if")) => {
                let pos = self.pos();
                self.at += 1;
                let scrutinee = Box::new(self.app()?);
                self.expect(Tok::Slash)?;
                let binder = self.binder()?;
                self.expect(Tok::Dot)?;
                let motive = Box::new(self.expr()?);
                self.expect(Tok::Keyword("then"))?;
                let then_branch = Box::new(self.expr()?);
                self.expect(Tok::Keyword("else"))?;
                let else_branch = Box::new(self.expr()?);
                Ok(Expr::If {
                    scrutinee,
                    binder,
                    motive,
                    then_branch,
                    else_branch,
                    pos,
                })
            }
            Some(Tok::LParen) if self.telescope_ahead() => {
                self.at += 1;
                let mut binders = vec![self.binder()?];
                while Self::is_binder(self.peek()) {
                    binders.push(self.binder()?);
                }
                self.expect(Tok::Colon)?;
                let dom = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                let cod = self.expr()?;
                Ok(binders
                    .into_iter()
                    .rev()
                    .fold(cod, |b, x| Expr::Pi(x, Box::new(dom.clone()), Box::new(b))))
            }
            _ => {
                let left = self.prod()?;
                if self.peek() == Some(&Tok::Arrow) {
                    self.at += 1;
                    let right = self.expr()?;
                    Ok(Expr::Pi("_".into(), Box::new(left), Box::new(right)))
                } else {
                    Ok(left)
                }
            }
        }
    }

    /// `( binder+ :` starts a dependent function type.
    fn telescope_ahead(&self) -> bool {
        let mut k = 1;
        while Self::is_binder(self.peek_at(k)) {
            k += 1;
        }
        k > 1 && self.peek_at(k) == Some(&Tok::Colon)
    }

    fn prod(&mut self) -> Result<Expr, SyntaxError> {
        let left = self.app()?;
        if self.peek() == Some(&Tok::Star) {
            self.at += 1;
            let right = self.prod()?;
            return Ok(Expr::Prod(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn app(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.pos();
        let mut e = match self.peek() {
            Some(Tok::Keyword("suc")) => {
                self.at += 1;
                Expr::Suc(Box::new(self.atom()?))
            }
            Some(Tok::Keyword("fst")) => {
                self.at += 1;
                Expr::Fst(Box::new(self.atom()?), pos)
            }
            Some(Tok::Keyword("snd")) => {
                self.at += 1;
                Expr::Snd(Box::new(self.atom()?), pos)
            }
            _ => self.atom()?,
        };
        while self.atom_ahead() {
            let arg_pos = self.pos();
            let arg = self.atom()?;
            e = Expr::App(Box::new(e), Box::new(arg), arg_pos);
        }
        Ok(e)
    }

    fn atom_ahead(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_))
                | Some(Tok::Num(_))
                | Some(Tok::LParen)
                | Some(Tok::Keyword("Set"))
                | Some(Tok::Keyword("Bool"))
                | Some(Tok::Keyword("Nat"))
                | Some(Tok::Keyword("true"))
                | Some(Tok::Keyword("false"))
                | Some(Tok::Keyword("zero"))
        )
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.pos();
        let e = match self.peek() {
            Some(Tok::Ident(x)) => Expr::Ident(x.clone(), pos),
            Some(Tok::Num(n)) => (0..*n).fold(Expr::Zero, |e, _| Expr::Suc(Box::new(e))),
            Some(Tok::Keyword("Set")) => Expr::Set,
            Some(Tok::Keyword("Bool")) => Expr::Bool,
            Some(Tok::Keyword("Nat")) => Expr::Nat,
            Some(Tok::Keyword("true")) => Expr::True,
            Some(Tok::Keyword("false")) => Expr::False,
            Some(Tok::Keyword("zero")) => Expr::Zero,
            Some(Tok::LParen) => {
                self.at += 1;
                let first = self.expr()?;
                let mut rest = Vec::new();
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    rest.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                // (a, b, c) is (a, (b, c)).
                let mut items = std::iter::once(first).chain(rest).collect::<Vec<_>>();
                let mut e = items.pop().expect("at least one item");
                while let Some(x) = items.pop() {
                    e = Expr::Pair(Box::new(x), Box::new(e));
                }
                return Ok(e);
            }
            _ => return Err(self.unexpected("a term")),
        };
        self.at += 1;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(x: &str) -> Expr {
        Expr::Ident(x.into(), Pos::default())
    }

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn check_declaration() {
        let f = parse("check true : Bool").unwrap();
        assert_eq!(
            f.decls,
            vec![Decl::Check {
                term: Expr::True,
                ty: Expr::Bool,
                pos: Pos::default()
            }]
        );
    }

    #[test]
    fn postulate_with_curried_arrow() {
        let f = parse("postulate add : Nat -> Nat -> Nat").unwrap();
        let ty = Expr::Pi("_".into(), b(Expr::Nat), b(Expr::Pi("_".into(), b(Expr::Nat), b(Expr::Nat))));
        assert_eq!(
            f.decls,
            vec![Decl::Postulate {
                name: "add".into(),
                ty,
                pos: Pos::default()
            }]
        );
    }

    #[test]
    fn application_is_left_associative() {
        let e = parse_expr("f x y").unwrap();
        let fx = Expr::App(b(id("f")), b(id("x")), Pos::default());
        assert_eq!(e, Expr::App(b(fx), b(id("y")), Pos::default()));
    }

    #[test]
    fn product_binds_tighter_than_arrow() {
        let e = parse_expr("A * B -> C").unwrap();
        let ab = Expr::Prod(b(id("A")), b(id("B")));
        assert_eq!(e, Expr::Pi("_".into(), b(ab), b(id("C"))));
    }

    #[test]
    fn telescopes_and_lambdas_nest() {
        let e = parse_expr("(x y : Bool) -> Bool").unwrap();
        let inner = Expr::Pi("y".into(), b(Expr::Bool), b(Expr::Bool));
        assert_eq!(e, Expr::Pi("x".into(), b(Expr::Bool), b(inner)));
        let l = parse_expr("\\x _ -> x").unwrap();
        assert_eq!(l, Expr::Lam("x".into(), b(Expr::Lam("_".into(), b(id("x"))))));
    }

    #[test]
    fn parenthesised_application_is_not_a_telescope() {
        let e = parse_expr("(f x) -> Bool").unwrap();
        let fx = Expr::App(b(id("f")), b(id("x")), Pos::default());
        assert_eq!(e, Expr::Pi("_".into(), b(fx), b(Expr::Bool)));
    }

    #[test]
    fn literals_and_tuples() {
        assert_eq!(parse_expr("2").unwrap(), Expr::Suc(b(Expr::Suc(b(Expr::Zero)))));
        let t = parse_expr("(true, 0, zero)").unwrap();
        assert_eq!(t, Expr::Pair(b(Expr::True), b(Expr::Pair(b(Expr::Zero), b(Expr::Zero)))));
    }

    #[test]
    fn projections_and_conditionals() {
        let e = parse_expr("fst p x").unwrap();
        let fp = Expr::Fst(b(id("p")), Pos::default());
        assert_eq!(e, Expr::App(b(fp), b(id("x")), Pos::default()));
        let i = parse_expr("if b / _. Set then Bool else Nat").unwrap();
        assert!(matches!(i, Expr::If { .. }));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("check true :").unwrap_err();
        assert_eq!((e.pos.line, e.pos.col), (1, 13));
        assert!(e.message.contains("expected a term"));
        let e = parse("true : Bool").unwrap_err();
        assert!(e.message.contains("declaration"));
    }
}
