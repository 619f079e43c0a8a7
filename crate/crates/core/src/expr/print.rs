//! Plain-text printing in the same grammar the parser accepts.

use std::fmt::{self, Write};

use num_traits::Signed;

use super::{Expr, Node, Rational};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if c.is_integer() && !c.is_negative() => PREC_ATOM,
        Node::Const(c) if c.is_negative() => PREC_UNARY,
        Node::Const(_) => PREC_PRODUCT,
        Node::Symbol(_) | Node::Apply { .. } | Node::Func(..) => PREC_ATOM,
        Node::Pow(_, e) if e.is_negative() => PREC_PRODUCT,
        Node::Pow(..) => PREC_POWER,
        Node::Neg(_) => PREC_UNARY,
        Node::Sum(_) => PREC_SUM,
        Node::Product(_) => PREC_PRODUCT,
    }
}

fn write_rational(out: &mut String, c: &Rational) {
    if c.is_integer() {
        write!(out, "{}", c.numer()).unwrap();
    } else {
        write!(out, "{}/{}", c.numer(), c.denom()).unwrap();
    }
}

fn write_wrapped(out: &mut String, e: &Expr, min_prec: u8) {
    if precedence(e) < min_prec {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_exponent(out: &mut String, e: &Rational) {
    if e.is_integer() && !e.is_negative() {
        write!(out, "{}", e.numer()).unwrap();
    } else {
        out.push('(');
        write_rational(out, e);
        out.push(')');
    }
}

/// Splits a term into (is_negative, magnitude form) for sum printing.
fn negated_view(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Const(c) if c.is_negative() => Some(Expr::constant(-*c)),
        Node::Neg(inner) => Some(inner.clone()),
        Node::Product(fs) => match fs.first().and_then(Expr::as_const) {
            Some(c) if c.is_negative() => {
                let mut rest = fs.clone();
                rest[0] = Expr::constant(-c);
                Some(Expr::from_node(Node::Product(
                    rest.into_iter().filter(|f| !f.is_one()).collect(),
                )))
                .map(|p| match p.node() {
                    Node::Product(v) if v.len() == 1 => v[0].clone(),
                    Node::Product(v) if v.is_empty() => Expr::one(),
                    _ => p,
                })
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_product(out: &mut String, factors: &[Expr]) {
    let mut coeff: Option<Rational> = None;
    let mut numer: Vec<&Expr> = Vec::new();
    let mut denom: Vec<Expr> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        match f.node() {
            Node::Const(c) if i == 0 => coeff = Some(*c),
            Node::Pow(b, e) if e.is_negative() => denom.push(Expr::pow(b.clone(), -*e)),
            _ => numer.push(f),
        }
    }
    let mut parts: Vec<String> = Vec::new();
    if let Some(c) = coeff {
        if c.is_negative() {
            out.push('-');
        }
        let mag = c.abs();
        if !mag.is_integer() || *mag.numer() != 1 || numer.is_empty() {
            let mut s = String::new();
            write_rational(&mut s, &mag);
            parts.push(s);
        }
    }
    for f in numer {
        let mut s = String::new();
        if f.as_const().is_some() {
            s.push('(');
            write_expr(&mut s, f);
            s.push(')');
        } else {
            write_wrapped(&mut s, f, PREC_PRODUCT + 1);
        }
        parts.push(s);
    }
    if parts.is_empty() {
        parts.push("1".into());
    }
    out.push_str(&parts.join("*"));
    match denom.len() {
        0 => {}
        1 => {
            out.push('/');
            write_wrapped(out, &denom[0], PREC_POWER);
        }
        _ => {
            out.push_str("/(");
            let items: Vec<String> = denom
                .iter()
                .map(|d| {
                    let mut s = String::new();
                    write_wrapped(&mut s, d, PREC_PRODUCT + 1);
                    s
                })
                .collect();
            out.push_str(&items.join("*"));
            out.push(')');
        }
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Const(c) => write_rational(out, c),
        Node::Symbol(s) => out.push_str(s.as_str()),
        Node::Apply { name, order, arg } => {
            out.push_str(name.as_str());
            for _ in 0..*order {
                out.push('\'');
            }
            out.push('(');
            write_expr(out, arg);
            out.push(')');
        }
        Node::Func(kind, arg) => {
            out.push_str(kind.name());
            out.push('(');
            write_expr(out, arg);
            out.push(')');
        }
        Node::Pow(base, exp) => {
            if exp.is_negative() {
                write_product(out, std::slice::from_ref(e));
            } else {
                write_wrapped(out, base, PREC_ATOM);
                out.push('^');
                write_exponent(out, exp);
            }
        }
        Node::Neg(inner) => {
            out.push('-');
            write_wrapped(out, inner, PREC_PRODUCT);
        }
        Node::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    write_wrapped(out, t, PREC_SUM + 1);
                    continue;
                }
                match negated_view(t) {
                    Some(mag) => {
                        out.push_str(" - ");
                        write_wrapped(out, &mag, PREC_PRODUCT);
                    }
                    None => {
                        out.push_str(" + ");
                        write_wrapped(out, t, PREC_SUM + 1);
                    }
                }
            }
        }
        Node::Product(factors) => write_product(out, factors),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}
