use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Elementary, Expr, Node, Symbol};

/// Failure while evaluating an expression numerically.
///
/// `path` lists child indices from the root down to the offending node and
/// `expr` is that node printed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound {name} in `{expr}` (path {path:?})")]
    Unbound {
        name: String,
        path: Vec<usize>,
        expr: String,
    },
    #[error("division by zero in `{expr}` (path {path:?})")]
    DivisionByZero { path: Vec<usize>, expr: String },
    #[error("{message} in `{expr}` (path {path:?})")]
    Domain {
        message: String,
        path: Vec<usize>,
        expr: String,
    },
}

#[derive(Debug)]
struct ClosedForm {
    var: Symbol,
    derivatives: Mutex<Vec<Expr>>,
}

impl ClosedForm {
    fn derivative(&self, order: u32) -> Expr {
        let mut ds = self.derivatives.lock().unwrap_or_else(|p| p.into_inner());
        while ds.len() <= order as usize {
            let next = ds.last().unwrap().differentiate(&self.var).simplify();
            ds.push(next);
        }
        ds[order as usize].clone()
    }
}

/// Numeric values for symbols and opaque functions.
///
/// An opaque function derivative `f^(d)` is resolved first from a point
/// value keyed by `(f, d)` (its argument is then ignored), otherwise from a
/// closed form `f(var) = body` differentiated `d` times and evaluated at the
/// argument.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    symbols: BTreeMap<String, f64>,
    points: BTreeMap<(String, u32), f64>,
    closed: BTreeMap<String, Arc<ClosedForm>>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_symbol(&mut self, name: &str, value: f64) -> &mut Self {
        self.symbols.insert(name.to_string(), value);
        self
    }

    pub fn set_point(&mut self, name: &str, order: u32, value: f64) -> &mut Self {
        self.points.insert((name.to_string(), order), value);
        self
    }

    pub fn set_closed_form(&mut self, name: &str, var: &Symbol, body: Expr) -> &mut Self {
        let cf = ClosedForm {
            var: var.clone(),
            derivatives: Mutex::new(vec![body.simplify()]),
        };
        self.closed.insert(name.to_string(), Arc::new(cf));
        self
    }

    pub fn symbol(&self, name: &str) -> Option<f64> {
        self.symbols.get(name).copied()
    }

    pub fn point(&self, name: &str, order: u32) -> Option<f64> {
        self.points.get(&(name.to_string(), order)).copied()
    }

    pub fn has_function(&self, name: &str, order: u32) -> bool {
        self.point(name, order).is_some() || self.closed.contains_key(name)
    }

    /// The closed form of `name` differentiated `order` times, if one is bound.
    pub fn closed_form(&self, name: &str, order: u32) -> Option<(Symbol, Expr)> {
        self.closed
            .get(name)
            .map(|cf| (cf.var.clone(), cf.derivative(order)))
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, f64)> {
        self.symbols.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn points(&self) -> impl Iterator<Item = ((&str, u32), f64)> {
        self.points.iter().map(|((k, o), v)| ((k.as_str(), *o), *v))
    }
}

/// Evaluates `e` in IEEE double precision, children before parents.
pub fn evaluate(e: &Expr, bindings: &Bindings) -> Result<f64, EvalError> {
    let mut path = Vec::new();
    eval_at(e, bindings, &mut path)
}

fn eval_at(e: &Expr, b: &Bindings, path: &mut Vec<usize>) -> Result<f64, EvalError> {
    let domain = |message: &str, path: &[usize]| EvalError::Domain {
        message: message.to_string(),
        path: path.to_vec(),
        expr: e.to_string(),
    };
    let child = |i: usize, c: &Expr, path: &mut Vec<usize>| {
        path.push(i);
        let r = eval_at(c, b, path);
        path.pop();
        r
    };
    let value = match e.node() {
        Node::Const(c) => c.to_f64().unwrap_or(f64::NAN),
        Node::Symbol(s) => b.symbol(s.as_str()).ok_or_else(|| EvalError::Unbound {
            name: format!("symbol {s}"),
            path: path.clone(),
            expr: e.to_string(),
        })?,
        Node::Apply { name, order, arg } => {
            if let Some(v) = b.point(name.as_str(), *order) {
                v
            } else if let Some((var, body)) = b.closed_form(name.as_str(), *order) {
                let x = child(0, arg, path)?;
                let mut local = b.clone();
                local.set_symbol(var.as_str(), x);
                path.push(0);
                let r = eval_at(&body, &local, path);
                path.pop();
                r?
            } else {
                return Err(EvalError::Unbound {
                    name: format!("function {name} (derivative order {order})"),
                    path: path.clone(),
                    expr: e.to_string(),
                });
            }
        }
        Node::Func(kind, arg) => {
            let x = child(0, arg, path)?;
            match kind {
                Elementary::Sin => x.sin(),
                Elementary::Cos => x.cos(),
                Elementary::Exp => x.exp(),
                Elementary::Ln => {
                    if x <= 0.0 {
                        return Err(domain("ln of non-positive value", path));
                    }
                    x.ln()
                }
                Elementary::Sqrt => {
                    if x < 0.0 {
                        return Err(domain("sqrt of negative value", path));
                    }
                    x.sqrt()
                }
            }
        }
        Node::Pow(base, exp) => {
            let x = child(0, base, path)?;
            if exp.is_integer() {
                let n = *exp.numer();
                if x == 0.0 && n < 0 {
                    return Err(EvalError::DivisionByZero {
                        path: path.clone(),
                        expr: e.to_string(),
                    });
                }
                match i32::try_from(n) {
                    Ok(n) => x.powi(n),
                    Err(_) => x.powf(n as f64),
                }
            } else {
                if x < 0.0 {
                    return Err(domain("fractional power of negative value", path));
                }
                if x == 0.0 && *exp.numer() < 0 {
                    return Err(EvalError::DivisionByZero {
                        path: path.clone(),
                        expr: e.to_string(),
                    });
                }
                x.powf(exp.to_f64().unwrap_or(f64::NAN))
            }
        }
        Node::Neg(inner) => -child(0, inner, path)?,
        Node::Sum(terms) => {
            let mut acc = 0.0;
            for (i, t) in terms.iter().enumerate() {
                acc += child(i, t, path)?;
            }
            acc
        }
        Node::Product(factors) => {
            let mut acc = 1.0;
            for (i, f) in factors.iter().enumerate() {
                acc *= child(i, f, path)?;
            }
            acc
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain("non-finite result", path))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn at(src: &str, b: &Bindings) -> Result<f64, EvalError> {
        evaluate(&parse(src).unwrap(), b)
    }

    #[test]
    fn constants_and_powers() {
        let mut b = Bindings::new();
        b.set_symbol("x", 2.0);
        assert!((at("13/75", &b).unwrap() - 0.173_333_333_333).abs() < 1e-12);
        assert_eq!(at("x^3", &b).unwrap(), 8.0);
    }

    #[test]
    fn torsion_invariant_hand_substitution() {
        // -6 g^-1 s3 n3'^2 with g = s0 s1 s2 s3.
        let src =
            "-6*(s0(t)*s1(t)*s2(t)*s3(t))^(-1)*(s3(t)*n3'(t)^2 + s2(t)*n4'(t)^2 + s1(t)*n5'(t)^2)";
        let mut b = Bindings::new();
        b.set_point("n3", 1, 1.0)
            .set_point("n4", 1, 0.0)
            .set_point("n5", 1, 0.0)
            .set_point("s0", 0, -1.0)
            .set_point("s1", 0, 1.0)
            .set_point("s2", 0, 1.0)
            .set_point("s3", 0, 1.0);
        assert_eq!(at(src, &b).unwrap(), 6.0);
    }

    #[test]
    fn closed_forms_supply_derivatives() {
        let mut b = Bindings::new();
        b.set_symbol("t", 2.0).set_closed_form(
            "s",
            &Symbol::new("u").unwrap(),
            parse("u^3").unwrap(),
        );
        assert_eq!(at("s''(t)", &b).unwrap(), 12.0);
        assert_eq!(at("s(t^2)", &b).unwrap(), 64.0);
    }

    #[test]
    fn errors_carry_paths() {
        let mut b = Bindings::new();
        b.set_symbol("x", 0.0);
        match at("1 + ln(x)", &b) {
            Err(EvalError::Domain { path, expr, .. }) => {
                assert_eq!(path, vec![1]);
                assert_eq!(expr, "ln(x)");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            at("1/x", &b),
            Err(EvalError::DivisionByZero { .. })
        ));
        assert!(matches!(at("y", &b), Err(EvalError::Unbound { .. })));
        assert!(matches!(at("f'(x)", &b), Err(EvalError::Unbound { .. })));
        assert_eq!(at("sqrt(x)", &b).unwrap(), 0.0);
    }
}
