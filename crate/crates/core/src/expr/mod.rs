//! Immutable symbolic expressions over coordinates and opaque functions.
//!
//! An [`Expr`] is a reference-counted tree. Constants are exact rationals,
//! opaque function symbols such as `s1(t)` carry a formal derivative order,
//! and every pass (differentiation, simplification, evaluation) produces a
//! new tree. Structural equality and the canonical total order come from the
//! derived `Ord` on [`Node`]: node kind first, then names, then children.

mod diff;
mod eval;
mod parse;
mod print;
mod probe;
mod rational;
mod simplify;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Zero};

pub use eval::{evaluate, Bindings, EvalError};
pub use parse::parse;
pub use probe::{
    equivalent, equivalent_many, probe_sign, seed_from_env, Atom, ProbeConfig, SignProbe, Verdict,
    DEFAULT_SEED,
};
pub(crate) use rational::rationalize;
pub use rational::{rational_pow, Rational};
pub use simplify::simplify;

use crate::error::{Error, Result};

/// An identifier naming a coordinate, a free constant, or an opaque function.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Result<Self> {
        if is_identifier(name) {
            Ok(Self(Arc::from(name)))
        } else {
            Err(Error::InvalidSymbol(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Built-in elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            "exp" => Elementary::Exp,
            "ln" => Elementary::Ln,
            "sqrt" => Elementary::Sqrt,
            _ => return None,
        })
    }
}

/// One node of an expression tree. Variant order is the canonical kind order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Symbol(Symbol),
    /// The `order`-th derivative of an opaque univariate function at `arg`.
    Apply {
        name: Symbol,
        order: u32,
        arg: Expr,
    },
    Func(Elementary, Expr),
    Pow(Expr, Rational),
    Neg(Expr),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.cmp(&other.0)
        }
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn from_node(node: Node) -> Self {
        Self(Arc::new(node))
    }

    pub fn constant(value: Rational) -> Self {
        Self::from_node(Node::Const(value))
    }

    pub fn int(value: i64) -> Self {
        Self::constant(Rational::from_integer(value))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::constant(Rational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn symbol(sym: &Symbol) -> Self {
        Self::from_node(Node::Symbol(sym.clone()))
    }

    /// Shorthand for a symbol from a name known to be valid.
    ///
    /// Panics on an invalid identifier; use [`Symbol::new`] for untrusted input.
    pub fn var(name: &str) -> Self {
        Self::symbol(&Symbol::new(name).expect("valid identifier"))
    }

    pub fn apply(name: &Symbol, order: u32, arg: Expr) -> Self {
        Self::from_node(Node::Apply {
            name: name.clone(),
            order,
            arg,
        })
    }

    /// `name^(order)(t)` with a fresh symbol `t`; panics on invalid names.
    pub fn func_of(name: &str, order: u32, arg: &str) -> Self {
        Self::apply(
            &Symbol::new(name).expect("valid identifier"),
            order,
            Self::var(arg),
        )
    }

    pub fn elementary(kind: Elementary, arg: Expr) -> Self {
        Self::from_node(Node::Func(kind, arg))
    }

    pub fn pow(base: Expr, exponent: Rational) -> Self {
        if exponent.is_one() {
            return base;
        }
        Self::from_node(Node::Pow(base, exponent))
    }

    pub fn powi(base: Expr, exponent: i64) -> Self {
        Self::pow(base, Rational::from_integer(exponent))
    }

    pub fn recip(self) -> Self {
        Self::powi(self, -1)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(-*c),
            _ => Self::from_node(Node::Neg(self)),
        }
    }

    /// N-ary sum; drops literal zeros and unwraps singletons.
    pub fn sum(terms: Vec<Expr>) -> Self {
        let mut kept: Vec<Expr> = terms.into_iter().filter(|e| !e.is_zero()).collect();
        match kept.len() {
            0 => Self::zero(),
            1 => kept.pop().unwrap(),
            _ => Self::from_node(Node::Sum(kept)),
        }
    }

    /// N-ary product; a literal zero factor collapses the product and unit
    /// factors are dropped.
    pub fn product(factors: Vec<Expr>) -> Self {
        if factors.iter().any(Expr::is_zero) {
            return Self::zero();
        }
        let mut kept: Vec<Expr> = factors.into_iter().filter(|e| !e.is_one()).collect();
        match kept.len() {
            0 => Self::one(),
            1 => kept.pop().unwrap(),
            _ => Self::from_node(Node::Product(kept)),
        }
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Const(c) if c.is_one())
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Symbol(_) => vec![],
            Node::Apply { arg, .. } => vec![arg],
            Node::Func(_, a) | Node::Pow(a, _) | Node::Neg(a) => vec![a],
            Node::Sum(xs) | Node::Product(xs) => xs.iter().collect(),
        }
    }

    pub fn differentiate(&self, var: &Symbol) -> Expr {
        diff::differentiate(self, var)
    }

    pub fn simplify(&self) -> Expr {
        simplify(self)
    }

    /// True when `var` occurs anywhere in the tree, including function arguments.
    pub fn depends_on(&self, var: &Symbol) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Symbol(s) => s == var,
            _ => self.children().into_iter().any(|c| c.depends_on(var)),
        }
    }

    /// Free symbols and opaque-function derivative pairs, in canonical order.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Symbol(s) => {
                out.insert(Atom::Symbol(s.clone()));
            }
            Node::Apply { name, order, arg } => {
                out.insert(Atom::Function(name.clone(), *order));
                arg.collect_atoms(out);
            }
            _ => {
                for c in self.children() {
                    c.collect_atoms(out);
                }
            }
        }
    }

    /// Replace symbols by expressions; function names are left untouched.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Expr>) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Symbol(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            Node::Apply { name, order, arg } => Expr::apply(name, *order, arg.substitute(map)),
            Node::Func(k, a) => Expr::elementary(*k, a.substitute(map)),
            Node::Pow(b, e) => Expr::pow(b.substitute(map), *e),
            Node::Neg(a) => a.substitute(map).neg(),
            Node::Sum(xs) => Expr::sum(xs.iter().map(|x| x.substitute(map)).collect()),
            Node::Product(xs) => Expr::product(xs.iter().map(|x| x.substitute(map)).collect()),
        }
    }

    /// Replace every opaque function `name` by a closed form in `var`.
    pub fn substitute_function(&self, name: &Symbol, var: &Symbol, body: &Expr) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Symbol(_) => self.clone(),
            Node::Apply {
                name: n,
                order,
                arg,
            } => {
                let arg = arg.substitute_function(name, var, body);
                if n == name {
                    let mut d = body.clone();
                    for _ in 0..*order {
                        d = d.differentiate(var);
                    }
                    let mut map = BTreeMap::new();
                    map.insert(var.clone(), arg);
                    d.substitute(&map)
                } else {
                    Expr::apply(n, *order, arg)
                }
            }
            Node::Func(k, a) => Expr::elementary(*k, a.substitute_function(name, var, body)),
            Node::Pow(b, e) => Expr::pow(b.substitute_function(name, var, body), *e),
            Node::Neg(a) => a.substitute_function(name, var, body).neg(),
            Node::Sum(xs) => Expr::sum(
                xs.iter()
                    .map(|x| x.substitute_function(name, var, body))
                    .collect(),
            ),
            Node::Product(xs) => Expr::product(
                xs.iter()
                    .map(|x| x.substitute_function(name, var, body))
                    .collect(),
            ),
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs.neg()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs.recip()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<Rational> for Expr {
    fn from(v: Rational) -> Self {
        Expr::constant(v)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}
