use crate::error::{Error, Result};
use crate::expr::{
    equivalent, evaluate, probe_sign, rationalize, Expr, ProbeConfig, Rational, SignProbe,
};
use crate::geometry::{metric_trace, MetricBundle};
use crate::tensor::{valence, Tensor};

use super::AnsatzShape;

/// A unit observer velocity with `u_α u^α = eps`.
#[derive(Clone, Debug)]
pub struct Velocity {
    pub u_up: Tensor,
    pub u_down: Tensor,
    pub eps: i8,
}

impl Velocity {
    /// `u^0 = 1/sqrt|g_00|`, `eps = sign(g_00)`.
    pub fn comoving(b: &MetricBundle) -> Result<Self> {
        let mut comps = vec![Expr::zero(); b.dim];
        comps[0] = Expr::one();
        Self::from_components(b, comps)
    }

    /// Normalises contravariant components `v^a` by `sqrt|g_ab v^a v^b|`.
    pub fn from_components(b: &MetricBundle, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != b.dim {
            return Err(Error::DimMismatch(b.dim, comps.len()));
        }
        let v = Tensor::new(b.dim, &valence::U, comps)?;
        let v_down = v.lower(0, &b.gsym)?;
        let norm = v
            .product(&v_down)?
            .contract(0, 1)?
            .as_scalar()
            .expect("rank 0")
            .simplify();
        let eps: i8 = match probe_sign(&norm, &ProbeConfig::default()) {
            SignProbe::Positive => 1,
            SignProbe::Negative => -1,
            SignProbe::Zero => return Err(Error::Unnormalizable("u_a u^a vanishes".into())),
            SignProbe::Mixed => {
                return Err(Error::Unnormalizable(
                    "u_a u^a changes sign over the probe domain".into(),
                ))
            }
        };
        let scale = Expr::pow(Expr::int(eps as i64) * norm, Rational::new(-1, 2)).simplify();
        let u_up = v.scale(&scale).simplified();
        let u_down = v_down.scale(&scale).simplified();
        Ok(Self { u_up, u_down, eps })
    }
}

/// State parameter `ω = p/ρ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Omega {
    Exact(Rational),
    Expr(Expr),
    /// `ρ` vanishes at every probe.
    Undefined,
}

impl std::fmt::Display for Omega {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Omega::Exact(r) => write!(f, "{}", Expr::constant(*r)),
            Omega::Expr(e) => write!(f, "{e}"),
            Omega::Undefined => f.write_str("undefined"),
        }
    }
}

impl Omega {
    pub fn as_expr(&self) -> Option<Expr> {
        match self {
            Omega::Exact(r) => Some(Expr::constant(*r)),
            Omega::Expr(e) => Some(e.clone()),
            Omega::Undefined => None,
        }
    }

    /// Exact when `p - ω ρ` probes to zero for a rational `ω`.
    pub fn of(p: &Expr, rho: &Expr) -> Omega {
        let cfg = ProbeConfig::default();
        if rho.is_zero() || equivalent(rho, &Expr::zero(), &cfg).is_equal() {
            return Omega::Undefined;
        }
        let ratio = (p.clone() / rho.clone()).simplify();
        if let Some(c) = ratio.as_const() {
            return Omega::Exact(c);
        }
        let sample = cfg
            .binding_sets(&ratio.atoms())
            .into_iter()
            .find_map(|(_, b)| evaluate(&ratio, &b).ok());
        if let Some(r) = sample.and_then(|x| rationalize(x, 100_000)) {
            if equivalent(p, &(Expr::constant(r) * rho.clone()), &cfg).is_equal() {
                return Omega::Exact(r);
            }
        }
        Omega::Expr(ratio)
    }
}

#[derive(Clone, Debug)]
pub struct FluidState {
    pub rho: Expr,
    pub p: Expr,
    pub omega: Omega,
    pub q: Tensor,
    /// `Π_ij = -T_ab h^a_i h^b_j`.
    pub pi: Option<Tensor>,
    /// Trace-free part `Π_ij - p h_ij`.
    pub aniso: Option<Tensor>,
    pub h: Option<Tensor>,
    pub eps: i8,
}

/// Splits a symmetric `T_ij` along `u`.
pub fn fluid_decompose(b: &MetricBundle, t: &Tensor, u: &Velocity) -> Result<FluidState> {
    if t.valence() != valence::DD {
        return Err(Error::VarianceMismatch(format!(
            "stress tensor must be covariant rank 2, got {:?}",
            t.valence()
        )));
    }
    if t.dim() != b.dim {
        return Err(Error::DimMismatch(b.dim, t.dim()));
    }
    let cfg = ProbeConfig::default();
    if !t.probe_equal(&t.swap_slots(0, 1)?, &cfg)?.is_equal() {
        return Err(Error::NonSymmetric);
    }
    let n = b.dim;
    let eps = Expr::int(u.eps as i64);
    let up = |i: usize| u.u_up.get(&[i]).clone();
    let down = |i: usize| u.u_down.get(&[i]).clone();

    // h^a_i = δ^a_i - eps u^a u_i
    let hmix = Tensor::from_fn(n, &valence::UD, |ix| {
        let d = if ix[0] == ix[1] {
            Expr::one()
        } else {
            Expr::zero()
        };
        (d - eps.clone() * up(ix[0]) * down(ix[1])).simplify()
    });
    let mut rho_terms = Vec::new();
    for a in 0..n {
        for c in 0..n {
            rho_terms.push(t.get(&[a, c]).clone() * up(a) * up(c));
        }
    }
    let rho = Expr::sum(rho_terms).simplify();
    let q = Tensor::from_fn(n, &valence::D, |ix| {
        let mut terms = Vec::new();
        for a in 0..n {
            for c in 0..n {
                terms.push(t.get(&[a, c]).clone() * up(a) * hmix.get(&[c, ix[0]]).clone());
            }
        }
        Expr::sum(terms).simplify()
    });
    let pi = Tensor::from_fn(n, &valence::DD, |ix| {
        let mut terms = Vec::new();
        for a in 0..n {
            for c in 0..n {
                terms.push(
                    t.get(&[a, c]).clone()
                        * hmix.get(&[a, ix[0]]).clone()
                        * hmix.get(&[c, ix[1]]).clone(),
                );
            }
        }
        Expr::sum(terms).neg().simplify()
    });
    let h = Tensor::from_fn(n, &valence::DD, |ix| {
        (b.gsym.get(ix).clone() - eps.clone() * down(ix[0]) * down(ix[1])).simplify()
    });
    let p = (Expr::ratio(1, 3) * metric_trace(b, &pi)).simplify();
    let aniso = pi.sub(&h.scale(&p))?;
    let omega = Omega::of(&p, &rho);
    Ok(FluidState {
        rho,
        p,
        omega,
        q,
        pi: Some(pi),
        aniso: Some(aniso),
        h: Some(h),
        eps: u.eps,
    })
}

/// `ρ u_i u_j + eps (u_i q_j + q_i u_j) - Π_ij`.
pub fn reconstruct(state: &FluidState, u: &Velocity) -> Result<Tensor> {
    let pi = state
        .pi
        .as_ref()
        .ok_or_else(|| Error::Capability("state carries no anisotropic stress".into()))?;
    let eps = Expr::int(state.eps as i64);
    let down = |i: usize| u.u_down.get(&[i]).clone();
    let q = |i: usize| state.q.get(&[i]).clone();
    Ok(Tensor::from_fn(pi.dim(), &valence::DD, |ix| {
        let (i, j) = (ix[0], ix[1]);
        Expr::sum(vec![
            state.rho.clone() * down(i) * down(j),
            eps.clone() * (down(i) * q(j) + q(i) * down(j)),
            pi.get(ix).clone().neg(),
        ])
        .simplify()
    }))
}

/// The printed comoving closed forms for the ansatz, with `eps = +1`.
pub fn comoving_closed_forms(b: &MetricBundle) -> Result<FluidState> {
    let shape = AnsatzShape::of(b)?;
    let sigma = shape.sigma(&b.coords[0]);
    let s0 = shape.s[0].clone();
    let g_inv = b.det.clone().recip();
    let num = Expr::int(21) + Expr::int(8) * s0.clone();
    let den = Expr::int(9) - Expr::int(16) * s0.clone();
    let p = (Expr::ratio(-1, 18) * g_inv.clone() * num.clone() * sigma.clone()).simplify();
    let rho = (Expr::ratio(-1, 6) * g_inv * den.clone() * sigma).simplify();
    let omega = match (num.simplify().as_const(), den.simplify().as_const()) {
        (_, Some(d)) if d == Rational::from_integer(0) => Omega::Undefined,
        (Some(nv), Some(d)) => Omega::Exact(nv / (d * Rational::from_integer(3))),
        _ => Omega::Expr((Expr::ratio(1, 3) * num / den).simplify()),
    };
    let q = Tensor::from_fn(b.dim, &valence::D, |ix| {
        if ix[0] == 0 {
            rho.clone()
        } else {
            Expr::zero()
        }
    });
    Ok(FluidState {
        rho,
        p,
        omega,
        q,
        pi: None,
        aniso: None,
        h: None,
        eps: 1,
    })
}
