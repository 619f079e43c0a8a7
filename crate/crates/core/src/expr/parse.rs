//! Recursive-descent parser for the plain-text expression grammar.
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := unary (('*'|'/') unary)*
//! unary    := ('-'|'+') unary | power
//! power    := base ('^' exponent)?
//! exponent := ('-'|'+')? power            -- must fold to a rational constant
//! base     := number | symbol | func | '(' expr ')'
//! func     := name '\''* '(' expr ')'
//! number   := integer | integer '/' integer | decimal
//! ```
//!
//! `^` binds tighter than unary minus, `+ - * /` associate to the left and
//! `^` to the right. `a / b` becomes `a * b^-1`.

use super::{Elementary, Expr, Node, Rational, Symbol};
use crate::error::{Error, Result};

/// Names that look like elementary functions but are not supported. They are
/// rejected rather than silently treated as opaque functions.
const UNSUPPORTED_ELEMENTARY: &[&str] = &[
    "tan", "cot", "sec", "csc", "log", "log10", "log2", "abs", "sign", "sinh", "cosh", "tanh",
    "asin", "acos", "atan", "arcsin", "arccos", "arctan", "pow", "floor", "ceil",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Decimal(Rational),
    Ident(String),
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '\'' => Some(Tok::Prime),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                text: c.to_string(),
                line: start_line,
                column: start_col,
            });
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = number_token(&text).ok_or_else(|| Error::Syntax {
                line: start_line,
                column: start_col,
                token: text.clone(),
                message: "malformed number".into(),
            })?;
            out.push(Token {
                tok,
                text,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(text.clone()),
                text,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        return Err(Error::Syntax {
            line: start_line,
            column: start_col,
            token: c.to_string(),
            message: "unexpected character".into(),
        });
    }
    out.push(Token {
        tok: Tok::End,
        text: "<end of input>".into(),
        line,
        column: col,
    });
    Ok(out)
}

fn number_token(text: &str) -> Option<Tok> {
    if text.bytes().all(|b| b.is_ascii_digit()) {
        return text.parse().ok().map(Tok::Int);
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(p) => (&text[..p], text[p + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = Rational::from_integer(10);
    let factor = super::rational_pow(ten, Rational::from_integer(scale as i64))?;
    Some(Tok::Decimal(Rational::from_integer(numer) * factor))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Set while reading a bare exponent, where `2/4` is `2` then `/ 4`.
    in_exponent: bool,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: &str) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax {
            line: t.line,
            column: t.column,
            token: t.text.clone(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::from_node(Node::Sum(terms))
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    factors.push(Expr::from_node(Node::Pow(
                        self.unary()?,
                        Rational::from_integer(-1),
                    )));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::from_node(Node::Product(factors))
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek().tok {
            Tok::Minus => {
                self.bump();
                let inner = self.unary()?;
                Ok(match inner.node() {
                    Node::Const(c) => Expr::constant(-*c),
                    _ => Expr::from_node(Node::Neg(inner)),
                })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        Ok(Expr::from_node(Node::Pow(base, exponent)))
    }

    fn exponent(&mut self) -> Result<Rational> {
        let (line, column, text) = {
            let t = self.peek();
            (t.line, t.column, t.text.clone())
        };
        let negate = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let outer = std::mem::replace(&mut self.in_exponent, true);
        let e = self.power();
        self.in_exponent = outer;
        let e = e?.simplify();
        match e.as_const() {
            Some(c) => Ok(if negate { -c } else { c }),
            None => Err(Error::Syntax {
                line,
                column,
                token: text,
                message: "exponent must be a rational constant".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Int(n) => {
                self.bump();
                // integer '/' integer is a single rational literal unless the
                // denominator is itself raised to a power.
                if self.peek().tok == Tok::Slash && !self.in_exponent {
                    if let Tok::Int(d) = *self.peek_at(1) {
                        if *self.peek_at(2) != Tok::Caret && d != 0 {
                            self.bump();
                            self.bump();
                            return Ok(Expr::constant(Rational::new(n, d)));
                        }
                    }
                }
                Ok(Expr::int(n))
            }
            Tok::Decimal(r) => {
                self.bump();
                Ok(Expr::constant(r))
            }
            Tok::LParen => {
                self.bump();
                let outer = std::mem::replace(&mut self.in_exponent, false);
                let e = self.expr();
                self.in_exponent = outer;
                let e = e?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                let mut order = 0u32;
                while self.peek().tok == Tok::Prime {
                    self.bump();
                    order += 1;
                }
                if self.peek().tok != Tok::LParen {
                    if order > 0 {
                        return self.error("expected `(` after derivative marks");
                    }
                    return Ok(Expr::symbol(&Symbol::new(&name)?));
                }
                if UNSUPPORTED_ELEMENTARY.contains(&name.as_str()) {
                    return Err(Error::UnknownFunction {
                        name,
                        line: tok.line,
                        column: tok.column,
                    });
                }
                let elementary = Elementary::from_name(&name);
                if elementary.is_some() && order > 0 {
                    return Err(Error::Syntax {
                        line: tok.line,
                        column: tok.column,
                        token: name,
                        message: "derivative marks are only allowed on opaque functions".into(),
                    });
                }
                self.bump();
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(match elementary {
                    Some(kind) => Expr::elementary(kind, arg),
                    None => Expr::apply(&Symbol::new(&name)?, order, arg),
                })
            }
            _ => self.error("expected a number, symbol, function call or `(`"),
        }
    }
}

/// Parse `src` into an expression tree.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        in_exponent: false,
    };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn opaque_call() {
        assert_eq!(parse("s1(t)").unwrap(), Expr::func_of("s1", 0, "t"));
    }

    #[test]
    fn rational_literal_times_derivative() {
        let e = parse("-1/2 * n3'(t)").unwrap();
        let expected = Expr::from_node(Node::Product(vec![
            Expr::constant(r(-1, 2)),
            Expr::func_of("n3", 1, "t"),
        ]));
        assert_eq!(e, expected);
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        let e = parse("-x^2").unwrap();
        assert!(matches!(e.node(), Node::Neg(_)));
        let e = parse("2^3^2").unwrap().simplify();
        assert_eq!(e, Expr::int(512));
    }

    #[test]
    fn exponent_is_not_followed_by_a_fraction() {
        assert_eq!(
            parse("t^2/2").unwrap().simplify(),
            parse("(1/2)*t^2").unwrap().simplify()
        );
        assert_eq!(
            parse("x^(1/2)").unwrap().simplify(),
            Expr::pow(Expr::var("x"), r(1, 2))
        );
        assert_eq!(parse("2^3/4").unwrap().simplify(), Expr::int(2));
    }

    #[test]
    fn denominator_power_is_not_a_literal() {
        assert_eq!(parse("2/3^2").unwrap().simplify(), Expr::constant(r(2, 9)));
        assert_eq!(parse("2/3").unwrap(), Expr::constant(r(2, 3)));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("9.5").unwrap(), Expr::constant(r(19, 2)));
        assert_eq!(parse("1e-3").unwrap(), Expr::constant(r(1, 1000)));
    }

    #[test]
    fn second_derivative_marks() {
        assert_eq!(parse("f''(t)").unwrap(), Expr::func_of("f", 2, "t"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("x +\n  * y") {
            Err(Error::Syntax {
                line,
                column,
                token,
                ..
            }) => {
                assert_eq!((line, column), (2, 3));
                assert_eq!(token, "*");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x^y"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("f'"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x $ y"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unsupported_elementary_names() {
        assert!(matches!(
            parse("tan(t)"),
            Err(Error::UnknownFunction { ref name, .. }) if name == "tan"
        ));
        assert!(matches!(parse("sin'(t)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn evaluates_polynomial_at_zero() {
        let e = parse("2*t^3 - sin(t)").unwrap();
        let mut b = super::super::Bindings::new();
        b.set_symbol("t", 0.0);
        assert_eq!(super::super::evaluate(&e, &b).unwrap(), 0.0);
    }
}
