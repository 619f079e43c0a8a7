//! Torsion-sourced stress-energy, Einstein residuals and fluid decomposition.

mod fluid;

use crate::error::{Error, Result};
use crate::expr::{Expr, Rational};
use crate::geometry::{metric_trace, riemann, torsion_square, Connection, MetricBundle};
use crate::tensor::{valence, Tensor};

pub use fluid::{comoving_closed_forms, fluid_decompose, reconstruct, FluidState, Omega, Velocity};

/// The diagonal, time-only metric shape: `s_i` on the diagonal of the
/// symmetric part and `n_3, n_4, n_5` in the spatial anti-symmetric block.
#[derive(Clone, Debug)]
pub struct AnsatzShape {
    pub s: [Expr; 4],
    /// `n_3 = g_∨12`, `n_4 = g_∨13`, `n_5 = g_∨23`.
    pub n: [Expr; 3],
}

impl AnsatzShape {
    pub fn of(b: &MetricBundle) -> Result<Self> {
        if b.dim != 4 {
            return Err(Error::NotAnsatzShape(format!(
                "dimension {} is not 4",
                b.dim
            )));
        }
        if !b.is_diagonal() {
            return Err(Error::NotAnsatzShape(
                "symmetric part is not diagonal".into(),
            ));
        }
        for c in b.g.components() {
            for x in &b.coords[1..] {
                if c.depends_on(x) {
                    return Err(Error::NotAnsatzShape(format!("entry {c} depends on {x}")));
                }
            }
        }
        let s = std::array::from_fn(|i| b.gsym.get(&[i, i]).clone());
        let n = [[1, 2], [1, 3], [2, 3]].map(|ix| b.galt.get(&ix).clone());
        Ok(Self { s, n })
    }

    /// `Σ = s3 (n3')^2 + s2 (n4')^2 + s1 (n5')^2`.
    pub fn sigma(&self, time: &crate::expr::Symbol) -> Expr {
        let d = |e: &Expr| e.differentiate(time);
        Expr::sum(vec![
            self.s[3].clone() * Expr::powi(d(&self.n[0]), 2),
            self.s[2].clone() * Expr::powi(d(&self.n[1]), 2),
            self.s[1].clone() * Expr::powi(d(&self.n[2]), 2),
        ])
        .simplify()
    }
}

/// `TT_γδ = T^ζ_γε T^ε_δζ` by outer product and two contractions.
fn torsion_square_by_contraction(conn: &Connection) -> Result<Tensor> {
    let t = &conn.torsion;
    // Slots of T ⊗ T: (ζ, γ, ε, ε', δ, ζ').
    let tt = t.product(t)?;
    let once = tt.contract(3, 2)?; // (ζ, γ, δ, ζ')
    once.contract(0, 3)
}

/// `g^{γδ} T^ζ_γε T^ε_δζ`.
pub fn torsion_invariant(b: &MetricBundle, conn: &Connection) -> Result<Expr> {
    let tt = torsion_square_by_contraction(conn)?;
    let mixed = b.ginv.product(&tt)?; // (γ', δ', γ, δ)
    let s = mixed.contract(0, 2)?.contract(0, 1)?;
    Ok(s.as_scalar().expect("rank 0").clone())
}

/// `-6 g^{-1} Σ` for a metric of the ansatz shape.
pub fn torsion_invariant_closed_form(b: &MetricBundle) -> Result<Expr> {
    let shape = AnsatzShape::of(b)?;
    Ok((Expr::int(-6) * b.det.clone().recip() * shape.sigma(&b.coords[0])).simplify())
}

/// `T_ij = ¼ gTT g_ij - (4/3) T^γ_iδ T^δ_jγ`.
pub fn stress_energy(b: &MetricBundle, conn: &Connection) -> Result<Tensor> {
    let gtt = torsion_invariant(b, conn)?;
    let tt = torsion_square(b, conn);
    let quarter = Expr::ratio(1, 4) * gtt;
    let four_thirds = Expr::ratio(-4, 3);
    Ok(Tensor::from_fn(b.dim, &valence::DD, |ix| {
        (quarter.clone() * b.gsym.get(ix).clone() + four_thirds.clone() * tt.get(ix).clone())
            .simplify()
    }))
}

/// `T_ij = ¼ TT_γδ (g^{γδ} g_ij - (16/3) δ^γ_i δ^δ_j)`, the factored form.
pub fn stress_energy_factored(b: &MetricBundle, conn: &Connection) -> Result<Tensor> {
    let tt = torsion_square_by_contraction(conn)?;
    let n = b.dim;
    let quarter = Expr::ratio(1, 4);
    let sixteen_thirds = Expr::ratio(16, 3);
    Ok(Tensor::from_fn(n, &valence::DD, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut terms = Vec::new();
        for c in 0..n {
            for d in 0..n {
                let delta = if c == i && d == j {
                    sixteen_thirds.clone()
                } else {
                    Expr::zero()
                };
                let bracket = b.ginv.get(&[c, d]).clone() * b.gsym.get(&[i, j]).clone() - delta;
                terms.push(tt.get(&[c, d]).clone() * bracket);
            }
        }
        (quarter.clone() * Expr::sum(terms)).simplify()
    }))
}

/// `g^{ij} T_ij`.
pub fn stress_trace(b: &MetricBundle, t: &Tensor) -> Result<Expr> {
    if t.valence() != valence::DD {
        return Err(Error::VarianceMismatch(format!(
            "stress tensor must be covariant rank 2, got {:?}",
            t.valence()
        )));
    }
    Ok(metric_trace(b, t))
}

/// `2 g^{-1} Σ` for a metric of the ansatz shape.
pub fn stress_trace_closed_form(b: &MetricBundle) -> Result<Expr> {
    let shape = AnsatzShape::of(b)?;
    Ok((Expr::int(2) * b.det.clone().recip() * shape.sigma(&b.coords[0])).simplify())
}

/// `R_ij - ½ R g_ij`.
pub fn einstein_vacuum(b: &MetricBundle, conn: &Connection) -> Result<Tensor> {
    let ric = riemann(b, conn).contract(0, 3)?;
    let r = metric_trace(b, &ric);
    let half_r = Expr::ratio(-1, 2) * r;
    Ok(Tensor::from_fn(b.dim, &valence::DD, |ix| {
        (ric.get(ix).clone() + half_r.clone() * b.gsym.get(ix).clone()).simplify()
    }))
}

/// `R_ij - ½ R g_ij - κ T_ij`.
pub fn einstein_residual(b: &MetricBundle, conn: &Connection, kappa: &Expr) -> Result<Tensor> {
    let vacuum = einstein_vacuum(b, conn)?;
    let stress = stress_energy(b, conn)?;
    vacuum.sub(&stress.scale(kappa))
}

/// `sqrt|g| (R / (2κ) + ¼ gTT)`.
pub fn lagrangian_density(b: &MetricBundle, conn: &Connection, kappa: &Expr) -> Result<Expr> {
    let ric = riemann(b, conn).contract(0, 3)?;
    let r = metric_trace(b, &ric);
    let gtt = torsion_invariant(b, conn)?;
    let root = b.sqrt_abs_det()?;
    let inv_two_kappa = (Expr::int(2) * kappa.clone()).recip();
    Ok((root * (r * inv_two_kappa + Expr::constant(Rational::new(1, 4)) * gtt)).simplify())
}
