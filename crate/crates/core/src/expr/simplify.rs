//! Canonical simplification.
//!
//! Every expression is brought to an expanded sum of monomials with exact
//! rational coefficients. A monomial is a sorted list of `(atom, exponent)`
//! pairs. Atoms are symbols, opaque function applications, elementary
//! functions (with simplified arguments), irrational constant powers, and
//! sums that cannot be expanded (fractional, negative or large powers).
//! Such sums are stored divided by their leading coefficient so that equal
//! bases compare equal.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::rational::rational_pow;
use super::{Elementary, Expr, Node, Rational};

type Monomial = Vec<(Expr, Rational)>;
type Poly = BTreeMap<Monomial, Rational>;

/// Largest positive integer power of a sum that is expanded in place.
const MAX_EXPAND: i64 = 6;

/// Canonical form of `e`. Idempotent, and equal inputs up to the algebra of
/// commutative rings (with `x^a x^b = x^(a+b)`) map to the same tree.
pub fn simplify(e: &Expr) -> Expr {
    to_expr(&to_poly(e))
}

fn constant(c: Rational) -> Poly {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(Vec::new(), c);
    }
    p
}

fn atom(e: Expr) -> Poly {
    let mut p = Poly::new();
    p.insert(vec![(e, Rational::one())], Rational::one());
    p
}

fn as_constant(p: &Poly) -> Option<Rational> {
    match p.len() {
        0 => Some(Rational::zero()),
        1 => p.get(&Vec::new()).copied(),
        _ => None,
    }
}

fn add_into(acc: &mut Poly, other: Poly) {
    for (m, c) in other {
        let slot = acc.entry(m).or_insert_with(Rational::zero);
        *slot += c;
    }
    acc.retain(|_, c| !c.is_zero());
}

fn negate(p: Poly) -> Poly {
    p.into_iter().map(|(m, c)| (m, -c)).collect()
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut factors = ma.clone();
            factors.extend(mb.iter().cloned());
            add_into(&mut out, build_monomial(*ca * *cb, factors));
        }
    }
    out
}

/// Merges factors into one canonical monomial. Constant bases are folded into
/// the coefficient where exact, and sum atoms that reach a small positive
/// integer power are expanded, so the result may have several terms.
fn build_monomial(mut coeff: Rational, mut factors: Monomial) -> Poly {
    if coeff.is_zero() {
        return Poly::new();
    }
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Monomial = Vec::with_capacity(factors.len());
    for (base, exp) in factors {
        match merged.last_mut() {
            Some((b, e)) if *b == base => *e += exp,
            _ => merged.push((base, exp)),
        }
    }
    let mut kept: Monomial = Vec::with_capacity(merged.len());
    let mut expand: Vec<(Expr, i64)> = Vec::new();
    for (base, exp) in merged {
        if exp.is_zero() {
            continue;
        }
        match base.node() {
            // Every negative power of zero is the same undefined value.
            Node::Const(c) if c.is_zero() && exp < Rational::zero() => {
                kept.push((base, -Rational::one()))
            }
            Node::Const(c) => {
                let c = *c;
                let whole = exp.floor();
                let frac = exp - whole;
                match rational_pow(c, whole) {
                    Some(v) => coeff *= v,
                    None => {
                        kept.push((base, exp));
                        continue;
                    }
                }
                if frac.is_zero() {
                    continue;
                }
                match rational_pow(c, frac) {
                    Some(v) => coeff *= v,
                    None => kept.push((base, frac)),
                }
            }
            Node::Sum(_) if exp.is_integer() && (1..=MAX_EXPAND).contains(exp.numer()) => {
                expand.push((base, *exp.numer()));
            }
            _ => kept.push((base, exp)),
        }
    }
    if coeff.is_zero() {
        return Poly::new();
    }
    let mut out = Poly::new();
    out.insert(kept, coeff);
    for (base, n) in expand {
        let inner = to_poly(&base);
        for _ in 0..n {
            out = mul(&out, &inner);
        }
    }
    out
}

fn pow_poly(p: Poly, exp: Rational) -> Poly {
    if exp.is_zero() {
        return constant(Rational::one());
    }
    if exp.is_one() {
        return p;
    }
    if let Some(c) = as_constant(&p) {
        if c.is_zero() && exp < Rational::zero() {
            return build_monomial(Rational::one(), vec![(Expr::zero(), -Rational::one())]);
        }
        return match rational_pow(c, exp) {
            Some(v) => constant(v),
            None => build_monomial(Rational::one(), vec![(Expr::constant(c), exp)]),
        };
    }
    if p.len() == 1 {
        let (m, c) = p.into_iter().next().unwrap();
        let mut factors: Monomial = m.into_iter().map(|(b, e)| (b, e * exp)).collect();
        let coeff = match rational_pow(c, exp) {
            Some(v) => v,
            None => {
                factors.push((Expr::constant(c), exp));
                Rational::one()
            }
        };
        return build_monomial(coeff, factors);
    }
    if exp.is_integer() && (1..=MAX_EXPAND).contains(exp.numer()) {
        let mut out = p.clone();
        for _ in 1..*exp.numer() {
            out = mul(&out, &p);
        }
        return out;
    }
    // Opaque sum base, scaled so its leading coefficient is 1 (or -1 when a
    // fractional power would otherwise need the root of a negative number).
    let lead = *p.values().next().unwrap();
    let scale = if exp.is_integer() { lead } else { lead.abs() };
    let base: Poly = p.into_iter().map(|(m, c)| (m, c / scale)).collect();
    let base_expr = to_expr(&base);
    let factors = vec![(base_expr, exp)];
    match rational_pow(scale, exp) {
        Some(v) => build_monomial(v, factors),
        None => {
            let mut factors = factors;
            factors.push((Expr::constant(scale), exp));
            build_monomial(Rational::one(), factors)
        }
    }
}

fn to_poly(e: &Expr) -> Poly {
    match e.node() {
        Node::Const(c) => constant(*c),
        Node::Symbol(_) => atom(e.clone()),
        Node::Apply { name, order, arg } => atom(Expr::apply(name, *order, simplify(arg))),
        Node::Func(kind, arg) => {
            let inner = to_poly(arg);
            if let Some(c) = as_constant(&inner) {
                let folded = match kind {
                    Elementary::Sin if c.is_zero() => Some(Rational::zero()),
                    Elementary::Cos | Elementary::Exp if c.is_zero() => Some(Rational::one()),
                    Elementary::Ln if c.is_one() => Some(Rational::zero()),
                    _ => None,
                };
                if let Some(v) = folded {
                    return constant(v);
                }
            }
            if *kind == Elementary::Sqrt {
                return pow_poly(inner, Rational::new(1, 2));
            }
            atom(Expr::elementary(*kind, to_expr(&inner)))
        }
        Node::Pow(base, exp) => match base.node() {
            // (b^a)^k = b^(ak) for integer k, merged before b^a can expand.
            Node::Pow(inner, a) if exp.is_integer() => {
                to_poly(&Expr::pow(inner.clone(), *a * *exp))
            }
            _ => pow_poly(to_poly(base), *exp),
        },
        Node::Neg(inner) => negate(to_poly(inner)),
        Node::Sum(terms) => {
            let mut acc = Poly::new();
            for t in terms {
                add_into(&mut acc, to_poly(t));
            }
            acc
        }
        Node::Product(factors) => {
            let mut acc = constant(Rational::one());
            for f in factors {
                if acc.is_empty() {
                    break;
                }
                acc = mul(&acc, &to_poly(f));
            }
            acc
        }
    }
}

fn to_expr(p: &Poly) -> Expr {
    let mut terms: Vec<Expr> = p
        .iter()
        .map(|(m, c)| {
            let mut factors: Vec<Expr> = m.iter().map(|(b, e)| Expr::pow(b.clone(), *e)).collect();
            factors.sort();
            if !c.is_one() || factors.is_empty() {
                factors.insert(0, Expr::constant(*c));
            }
            if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                Expr::from_node(Node::Product(factors))
            }
        })
        .collect();
    terms.sort();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.pop().unwrap(),
        _ => Expr::from_node(Node::Sum(terms)),
    }
}
