//! Named surface syntax produced by the parser.

use std::fmt;

/// A source position, 1-based. Positions do not take part in AST equality,
/// so a reparsed file compares equal to the original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A bound name; `_` binds nothing nameable.
pub type Binder = String;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ident(String, Pos),
    Set,
    Bool,
    Nat,
    True,
    False,
    Zero,
    Suc(Box<Expr>),
    Lam(Binder, Box<Expr>),
    /// `(x : A) -> B`; `A -> B` has binder `_`.
    Pi(Binder, Box<Expr>, Box<Expr>),
    Prod(Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    App(Box<Expr>, Box<Expr>, Pos),
    Fst(Box<Expr>, Pos),
    Snd(Box<Expr>, Pos),
    If {
        scrutinee: Box<Expr>,
        binder: Binder,
        motive: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Postulate { name: String, ty: Expr, pos: Pos },
    Define { name: String, ty: Expr, body: Expr, pos: Pos },
    Meta { name: String, ty: Expr, pos: Pos },
    Check { term: Expr, ty: Expr, pos: Pos },
}

impl Decl {
    pub fn pos(&self) -> Pos {
        match self {
            Decl::Postulate { pos, .. }
            | Decl::Define { pos, .. }
            | Decl::Meta { pos, .. }
            | Decl::Check { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}
