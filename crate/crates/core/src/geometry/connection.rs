use crate::error::Result;
use crate::expr::{Expr, ProbeConfig, Verdict};
use crate::tensor::{valence, Tensor};

use super::MetricBundle;

/// Generalised Christoffel symbols of a non-symmetric metric.
#[derive(Clone, Debug)]
pub struct Connection {
    /// `Γ_{i.jk}` from the full metric.
    pub gamma_first: Tensor,
    /// `Γ_{i.∨jk}`, the anti-symmetric part of `gamma_first` in `jk`.
    pub gamma_first_alt: Tensor,
    /// `Γ^i_jk = g^{iα} Γ_{α.jk}`.
    pub gamma: Tensor,
    pub gamma_sym: Tensor,
    pub gamma_alt: Tensor,
    /// `T^i_jk = Γ^i_jk - Γ^i_kj`.
    pub torsion: Tensor,
    /// `T_{i.jk} = Γ_{i.jk} - Γ_{i.kj}`.
    pub torsion_lower: Tensor,
}

/// Outcome of comparing the connection's parts against connections built
/// from `gsym` alone and from `galt` alone.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub sym: Verdict,
    pub alt: Verdict,
}

impl DecompositionCheck {
    pub fn holds(&self) -> bool {
        self.sym.is_equal() && self.alt.is_equal()
    }
}

/// `D[a][b][c] = ∂_c m_{ab}` for a rank-2 tensor.
fn metric_derivatives(b: &MetricBundle, m: &Tensor) -> Vec<Tensor> {
    b.coords.iter().map(|c| m.partial(c)).collect()
}

/// `½(∂_k m_{ji} - ∂_i m_{jk} + ∂_j m_{ik})` for each `(i, j, k)`.
fn first_kind(b: &MetricBundle, m: &Tensor) -> Tensor {
    let d = metric_derivatives(b, m);
    let half = Expr::ratio(1, 2);
    Tensor::from_fn(b.dim, &valence::DDD, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let e = d[k].get(&[j, i]).clone() - d[i].get(&[j, k]).clone() + d[j].get(&[i, k]).clone();
        (half.clone() * e).simplify()
    })
}

pub fn christoffel(b: &MetricBundle) -> Result<Connection> {
    let gamma_first = first_kind(b, &b.g);
    let gamma = gamma_first.raise(0, &b.ginv)?;
    let gamma_sym = gamma.symmetrize(1, 2)?;
    let gamma_alt = gamma.antisymmetrize(1, 2)?;
    let gamma_first_alt = gamma_first.antisymmetrize(1, 2)?;
    let torsion = gamma.sub(&gamma.swap_slots(1, 2)?)?;
    let torsion_lower = gamma_first.sub(&gamma_first.swap_slots(1, 2)?)?;
    let conn = Connection {
        gamma_first,
        gamma_first_alt,
        gamma,
        gamma_sym,
        gamma_alt,
        torsion,
        torsion_lower,
    };
    #[cfg(debug_assertions)]
    {
        let check = conn.verify_decomposition(b)?;
        debug_assert!(check.holds(), "connection split failed: {check:?}");
    }
    Ok(conn)
}

impl Connection {
    /// Checks that `gamma_sym` is the Levi-Civita connection of `gsym` and
    /// that `gamma_alt` is the same first-kind formula applied to `galt`,
    /// both raised with the inverse symmetric metric.
    pub fn verify_decomposition(&self, b: &MetricBundle) -> Result<DecompositionCheck> {
        let cfg = ProbeConfig::default();
        let levi_civita = first_kind(b, &b.gsym).raise(0, &b.ginv)?;
        let from_alt = first_kind(b, &b.galt).raise(0, &b.ginv)?;
        Ok(DecompositionCheck {
            sym: self.gamma_sym.probe_equal(&levi_civita, &cfg)?,
            alt: self.gamma_alt.probe_equal(&from_alt, &cfg)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }
}
