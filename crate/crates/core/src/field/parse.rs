//! Recursive-descent parser for the scalar-field grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' integer)?
//! base   := number | var | '(' expr ')' | func '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'log'
//! var    := 'x' digits
//! ```
//!
//! Whitespace is insignificant. Unary minus binds looser than `^`, so
//! `-x1^2` is `-(x1^2)`. Integer exponents may carry a sign.

use super::expr::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Func(Func),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn syntax<T>(&self, position: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position, message: message.into() })
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            let int_digits = self.digits();
            let mut frac_digits = 0;
            if self.src.get(self.pos) == Some(&b'.') {
                self.pos += 1;
                frac_digits = self.digits();
            }
            if int_digits + frac_digits == 0 {
                return self.syntax(start, "expected digits");
            }
            if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
                let mark = self.pos;
                self.pos += 1;
                if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                    self.pos += 1;
                }
                if self.digits() == 0 {
                    // not an exponent; leave the 'e' for the next token
                    self.pos = mark;
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
            return match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok((Tok::Num(v), start)),
                _ => self.syntax(start, format!("invalid number '{text}'")),
            };
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
            if let Some(f) = Func::from_name(word) {
                return Ok((Tok::Func(f), start));
            }
            if let Some(idx) = word.strip_prefix('x') {
                if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
                    return match idx.parse::<usize>() {
                        Ok(i) if i >= 1 => Ok((Tok::Var(i), start)),
                        _ => self.syntax(start, format!("invalid variable '{word}'")),
                    };
                }
            }
            return self.syntax(start, format!("unknown identifier '{word}'"));
        }
        self.syntax(start, format!("unexpected character '{}'", c as char))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    p: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, p: usize) -> Result<Self> {
        let mut lexer = Lexer { src: src.as_bytes(), pos: 0 };
        let (tok, tok_pos) = lexer.next()?;
        Ok(Parser { lexer, tok, tok_pos, p })
    }

    fn bump(&mut self) -> Result<()> {
        let (tok, pos) = self.lexer.next()?;
        self.tok = tok;
        self.tok_pos = pos;
        Ok(())
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position: self.tok_pos, message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.tok == tok {
            self.bump()
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    lhs = Expr::add(lhs, self.term()?)?;
                }
                Tok::Minus => {
                    self.bump()?;
                    lhs = Expr::sub(lhs, self.term()?)?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    lhs = Expr::mul(lhs, self.unary()?)?;
                }
                Tok::Slash => {
                    self.bump()?;
                    lhs = Expr::div(lhs, self.unary()?)?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Tok::Minus {
            self.bump()?;
            Expr::neg(self.unary()?)
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        let negative = if self.tok == Tok::Minus {
            self.bump()?;
            true
        } else {
            false
        };
        let Tok::Num(n) = self.tok else {
            return self.fail("expected integer exponent");
        };
        if n.fract() != 0.0 || n > i32::MAX as f64 {
            return self.fail("exponent must be an integer");
        }
        self.bump()?;
        let n = n as i32;
        Expr::pow(base, if negative { -n } else { n })
    }

    fn base(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Expr::constant(v)
            }
            Tok::Var(i) => {
                if i > self.p {
                    return Err(Error::VariableOutOfRange { index: i, p: self.p });
                }
                self.bump()?;
                Ok(Expr::var(i - 1))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Func(f) => {
                self.bump()?;
                self.expect(Tok::LParen, "'(' after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Expr::call(f, arg)
            }
            Tok::End => self.fail("unexpected end of input"),
            _ => self.fail("expected number, variable, function or '('"),
        }
    }
}

pub(crate) fn parse_expr(src: &str, p: usize) -> Result<Expr> {
    let mut parser = Parser::new(src, p)?;
    let e = parser.expr()?;
    if parser.tok != Tok::End {
        return parser.fail("unexpected trailing input");
    }
    Ok(e)
}
