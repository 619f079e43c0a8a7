//! Randomised equality testing of expressions.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{evaluate, Bindings, Expr, Symbol};

/// Seed used when `GTORSION_SEED` is unset or unparsable.
pub const DEFAULT_SEED: u64 = 42;

/// A free leaf of an expression: a symbol, or one derivative order of an
/// opaque function (each order is an independent jet variable when probing).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Symbol(Symbol),
    Function(Symbol, u32),
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Atom::Symbol(s) => write!(f, "{s}"),
            Atom::Function(name, order) => {
                write!(f, "{name}")?;
                for _ in 0..*order {
                    f.write_str("'")?;
                }
                Ok(())
            }
        }
    }
}

/// Reads `GTORSION_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("GTORSION_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub probes: usize,
    /// Relative tolerance: `|a - b| <= tol * (1 + |a| + |b|)`.
    pub tol: f64,
    pub seed: u64,
    /// Default sampling interval for every atom.
    pub range: (f64, f64),
    /// Per-atom sampling intervals.
    pub ranges: BTreeMap<Atom, (f64, f64)>,
    /// Atoms pinned to a fixed value.
    pub fixed: BTreeMap<Atom, f64>,
    /// A probe is redrawn when any guard evaluates to (near) zero, e.g. a
    /// metric determinant.
    pub guards: Vec<Expr>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            probes: 16,
            tol: 1e-9,
            seed: seed_from_env(),
            range: (0.5, 2.0),
            ranges: BTreeMap::new(),
            fixed: BTreeMap::new(),
            guards: Vec::new(),
        }
    }
}

impl ProbeConfig {
    pub fn new(probes: usize, tol: f64) -> Self {
        Self {
            probes,
            tol,
            ..Self::default()
        }
    }

    pub fn with_range(mut self, atom: Atom, lo: f64, hi: f64) -> Self {
        self.ranges.insert(atom, (lo, hi));
        self
    }

    pub fn with_fixed(mut self, atom: Atom, value: f64) -> Self {
        self.fixed.insert(atom, value);
        self
    }

    pub fn with_guard(mut self, guard: Expr) -> Self {
        self.guards.push(guard);
        self
    }

    /// Deterministic sequence of `probes` binding sets covering `atoms` and
    /// the guards' atoms.
    pub fn binding_sets(&self, atoms: &BTreeSet<Atom>) -> Vec<(BTreeMap<Atom, f64>, Bindings)> {
        let mut all = atoms.clone();
        for g in &self.guards {
            g.collect_atoms(&mut all);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.probes);
        for _ in 0..self.probes {
            let mut drawn = None;
            for _ in 0..64 {
                let values: BTreeMap<Atom, f64> = all
                    .iter()
                    .map(|a| {
                        let v = match self.fixed.get(a) {
                            Some(v) => *v,
                            None => {
                                let (lo, hi) = self.ranges.get(a).copied().unwrap_or(self.range);
                                rng.random_range(lo..=hi)
                            }
                        };
                        (a.clone(), v)
                    })
                    .collect();
                let b = to_bindings(&values);
                let ok = self.guards.iter().all(|g| match evaluate(g, &b) {
                    Ok(v) => v.abs() > 1e-10,
                    Err(_) => false,
                });
                drawn = Some((values, b));
                if ok {
                    break;
                }
            }
            out.extend(drawn);
        }
        out
    }
}

pub(crate) fn to_bindings(values: &BTreeMap<Atom, f64>) -> Bindings {
    let mut b = Bindings::new();
    for (a, v) in values {
        match a {
            Atom::Symbol(s) => b.set_symbol(s.as_str(), *v),
            Atom::Function(f, o) => b.set_point(f.as_str(), *o, *v),
        };
    }
    b
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Equal,
    Different {
        witness: BTreeMap<Atom, f64>,
        lhs: f64,
        rhs: f64,
    },
    Inconclusive,
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }
}

/// Probe-equality of two expressions. Evaluation errors at a probe skip that
/// probe; only when every probe fails is the verdict inconclusive.
pub fn equivalent(a: &Expr, b: &Expr, cfg: &ProbeConfig) -> Verdict {
    equivalent_many(std::slice::from_ref(a), std::slice::from_ref(b), cfg)
}

/// Pairwise probe-equality of two equally long lists under shared bindings.
pub fn equivalent_many(a: &[Expr], b: &[Expr], cfg: &ProbeConfig) -> Verdict {
    assert_eq!(a.len(), b.len(), "equivalent_many needs equal lengths");
    let mut atoms = BTreeSet::new();
    for e in a.iter().chain(b) {
        e.collect_atoms(&mut atoms);
    }
    let mut evaluated = 0usize;
    for (values, bindings) in cfg.binding_sets(&atoms) {
        let mut pair_ok = true;
        for (x, y) in a.iter().zip(b) {
            let (vx, vy) = match (evaluate(x, &bindings), evaluate(y, &bindings)) {
                (Ok(vx), Ok(vy)) => (vx, vy),
                _ => {
                    pair_ok = false;
                    break;
                }
            };
            if (vx - vy).abs() > cfg.tol * (1.0 + vx.abs() + vy.abs()) {
                return Verdict::Different {
                    witness: values,
                    lhs: vx,
                    rhs: vy,
                };
            }
        }
        if pair_ok {
            evaluated += 1;
        }
    }
    if evaluated == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Equal
    }
}

/// Sign of an expression over the probe domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignProbe {
    Positive,
    Negative,
    /// Both signs occur.
    Mixed,
    /// Zero (or unevaluable) at every probe.
    Zero,
}

impl SignProbe {
    /// `+1` or `-1` for a definite sign.
    pub fn as_sign(self) -> Option<i8> {
        match self {
            SignProbe::Positive => Some(1),
            SignProbe::Negative => Some(-1),
            _ => None,
        }
    }
}

/// Samples `e` at the configured probes and reports its sign; values with
/// magnitude below `1e-12` count as zero.
pub fn probe_sign(e: &Expr, cfg: &ProbeConfig) -> SignProbe {
    if let Some(c) = e.as_const() {
        return match c.numer().signum() {
            1 => SignProbe::Positive,
            -1 => SignProbe::Negative,
            _ => SignProbe::Zero,
        };
    }
    let (mut pos, mut neg) = (false, false);
    for (_, b) in cfg.binding_sets(&e.atoms()) {
        if let Ok(v) = evaluate(e, &b) {
            if v > 1e-12 {
                pos = true;
            } else if v < -1e-12 {
                neg = true;
            }
        }
    }
    match (pos, neg) {
        (true, true) => SignProbe::Mixed,
        (true, false) => SignProbe::Positive,
        (false, true) => SignProbe::Negative,
        (false, false) => SignProbe::Zero,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn equal_and_different() {
        let cfg = ProbeConfig::new(16, 1e-9);
        assert_eq!(equivalent(&p("x+x"), &p("2*x"), &cfg), Verdict::Equal);
        match equivalent(&p("x^2"), &p("x^3"), &cfg) {
            Verdict::Different { witness, .. } => {
                assert!(witness.contains_key(&Atom::Symbol(Symbol::new("x").unwrap())))
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn derivative_orders_are_independent() {
        let cfg = ProbeConfig::new(8, 1e-9);
        assert!(!equivalent(&p("f(t)"), &p("f'(t)"), &cfg).is_equal());
    }

    #[test]
    fn all_errors_is_inconclusive() {
        let cfg = ProbeConfig::new(4, 1e-9);
        assert_eq!(
            equivalent(&p("ln(-x)"), &p("0"), &cfg),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = ProbeConfig {
            seed: 7,
            ..ProbeConfig::new(3, 1e-9)
        };
        let atoms = p("x*y").atoms();
        let a: Vec<_> = cfg.binding_sets(&atoms).into_iter().map(|s| s.0).collect();
        let b: Vec<_> = cfg.binding_sets(&atoms).into_iter().map(|s| s.0).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn guards_avoid_zeros() {
        let cfg = ProbeConfig::new(8, 1e-9)
            .with_range(Atom::Symbol(Symbol::new("x").unwrap()), -1.0, 1.0)
            .with_guard(p("x"));
        for (values, _) in cfg.binding_sets(&p("x").atoms()) {
            assert!(values.values().all(|v| v.abs() > 1e-10));
        }
    }
}
