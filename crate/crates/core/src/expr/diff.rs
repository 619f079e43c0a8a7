use super::{Elementary, Expr, Node, Rational, Symbol};

/// Exact partial derivative of `e` with respect to `var`.
///
/// The result is only lightly tidied (zero and unit factors are dropped);
/// call [`Expr::simplify`] for the canonical form.
pub(crate) fn differentiate(e: &Expr, var: &Symbol) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Symbol(s) => {
            if s == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Apply { name, order, arg } => {
            let inner = differentiate(arg, var);
            Expr::product(vec![Expr::apply(name, order + 1, arg.clone()), inner])
        }
        Node::Func(kind, arg) => {
            let inner = differentiate(arg, var);
            let outer = match kind {
                Elementary::Sin => Expr::elementary(Elementary::Cos, arg.clone()),
                Elementary::Cos => Expr::elementary(Elementary::Sin, arg.clone()).neg(),
                Elementary::Exp => e.clone(),
                Elementary::Ln => arg.clone().recip(),
                Elementary::Sqrt => Expr::product(vec![
                    Expr::ratio(1, 2),
                    Expr::elementary(Elementary::Sqrt, arg.clone()).recip(),
                ]),
            };
            Expr::product(vec![outer, inner])
        }
        Node::Pow(base, exp) => {
            let inner = differentiate(base, var);
            Expr::product(vec![
                Expr::constant(*exp),
                Expr::pow(base.clone(), *exp - Rational::from_integer(1)),
                inner,
            ])
        }
        Node::Neg(inner) => differentiate(inner, var).neg(),
        Node::Sum(terms) => Expr::sum(terms.iter().map(|t| differentiate(t, var)).collect()),
        Node::Product(factors) => {
            let mut terms = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                let df = differentiate(f, var);
                if df.is_zero() {
                    continue;
                }
                let mut parts: Vec<Expr> = Vec::with_capacity(factors.len());
                for (j, g) in factors.iter().enumerate() {
                    parts.push(if i == j { df.clone() } else { g.clone() });
                }
                terms.push(Expr::product(parts));
            }
            Expr::sum(terms)
        }
    }
}
