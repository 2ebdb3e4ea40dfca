//! Tokens of the surface language. `--` starts a comment running to the
//! end of the line. `λ`, `→` and `×` are accepted for `\`, `->` and `*`.

use thiserror::Error;

use crate::ast::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    /// `Set`, `Bool`, `if`, `check`, ...
    Keyword(&'static str),
    LParen,
    RParen,
    Comma,
    Colon,
    Equals,
    Backslash,
    Arrow,
    Star,
    Slash,
    Dot,
    Underscore,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Num(n) => format!("number {}", n),
            Tok::Keyword(k) => format!("`{}`", k),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Backslash => "`\\`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Underscore => "`_`".into(),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "Set", "Bool", "Nat", "true", "false", "zero", "suc", "fst", "snd", "if", "then", "else", "postulate",
    "define", "meta", "check",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: syntax error: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if (c.is_alphabetic() && c != 'λ') || c == '_' {
            let mut word = String::new();
            while let Some(&d) = chars.peek() {
                if (d.is_alphanumeric() && d != 'λ') || d == '_' || d == '\'' {
                    word.push(d);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Keyword(k),
                None if word == "_" => Tok::Underscore,
                None => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(d);
                bump(&mut chars);
            }
            let n = digits.parse().map_err(|_| SyntaxError {
                pos,
                message: format!("number {} is too large", digits),
            })?;
            out.push((Tok::Num(n), pos));
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '=' => Tok::Equals,
            '\\' | 'λ' => Tok::Backslash,
            '→' => Tok::Arrow,
            '*' | '×' => Tok::Star,
            '/' => Tok::Slash,
            '.' => Tok::Dot,
            '-' if chars.peek() == Some(&'>') => {
                bump(&mut chars);
                Tok::Arrow
            }
            '-' if chars.peek() == Some(&'-') => {
                while chars.peek().is_some_and(|&d| d != '\n') {
                    bump(&mut chars);
                }
                continue;
            }
            other => {
                return Err(SyntaxError {
                    pos,
                    message: format!("unexpected character `{}`", other),
                })
            }
        };
        out.push((tok, pos));
    }
    Ok(out)
}
