use crate::error::{Error, Result};
use crate::expr::{Expr, Rational};
use crate::tensor::{valence, Tensor, Variance};

use super::{Connection, MetricBundle};

/// Maps an index tuple and a summed index to the two torsion index triples.
type IndexPairs = fn(&[usize], usize) -> ([usize; 3], [usize; 3]);

/// Coefficients `(u, u', v, v', w)` of the curvature family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyCoeffs {
    pub u: Rational,
    pub u_prime: Rational,
    pub v: Rational,
    pub v_prime: Rational,
    pub w: Rational,
}

impl FamilyCoeffs {
    pub fn new(
        u: Rational,
        u_prime: Rational,
        v: Rational,
        v_prime: Rational,
        w: Rational,
    ) -> Self {
        Self {
            u,
            u_prime,
            v,
            v_prime,
            w,
        }
    }

    pub fn zero() -> Self {
        let z = Rational::from_integer(0);
        Self::new(z, z, z, z, z)
    }

    /// The six named members of the family.
    pub fn kind(k: usize) -> Result<Self> {
        let r = Rational::new;
        let (h, q) = (r(1, 2), r(1, 4));
        let z = r(0, 1);
        Ok(match k {
            0 => Self::new(h, -h, q, -q, z),
            1 => Self::new(-h, h, q, -q, z),
            2 => Self::new(h, h, -q, q, -h),
            3 => Self::new(h, h, -q, q, h),
            4 => Self::new(z, z, -q, q, z),
            5 => Self::new(z, z, q, q, z),
            _ => return Err(Error::KindOutOfRange(k)),
        })
    }

    pub fn as_array(&self) -> [Rational; 5] {
        [self.u, self.u_prime, self.v, self.v_prime, self.w]
    }
}

/// Covariant derivative of the associated (symmetric) connection for any
/// valence; the derivative index is appended as the last slot.
pub fn cov_deriv(t: &Tensor, b: &MetricBundle, conn: &Connection) -> Tensor {
    let n = b.dim;
    let rank = t.rank();
    let partials: Vec<Tensor> = b.coords.iter().map(|c| t.partial(c)).collect();
    let mut val = t.valence().to_vec();
    val.push(Variance::Down);
    let gs = &conn.gamma_sym;
    Tensor::from_fn(n, &val, |ix| {
        let k = ix[rank];
        let base = &ix[..rank];
        let mut terms = vec![partials[k].get(base).clone()];
        let mut src = base.to_vec();
        for (s, var) in t.valence().iter().enumerate() {
            for a in 0..n {
                src[s] = a;
                let comp = t.get(&src);
                if comp.is_zero() {
                    continue;
                }
                let term = match var {
                    Variance::Up => gs.get(&[base[s], a, k]).clone() * comp.clone(),
                    Variance::Down => (gs.get(&[a, base[s], k]).clone() * comp.clone()).neg(),
                };
                terms.push(term);
            }
            src[s] = base[s];
        }
        Expr::sum(terms).simplify()
    })
}

/// The four covariant derivatives of a (1,1) tensor built from the full
/// connection, differing in which lower index of `Γ` carries the
/// derivative direction.
pub fn cov_deriv_kind(
    kind: usize,
    t: &Tensor,
    b: &MetricBundle,
    conn: &Connection,
) -> Result<Tensor> {
    if kind > 3 {
        return Err(Error::DerivativeKindOutOfRange(kind));
    }
    if t.valence() != valence::UD {
        return Err(Error::Capability(format!(
            "covariant derivative kinds are defined for (1,1) tensors only, got {:?}",
            t.valence()
        )));
    }
    let n = b.dim;
    let g = &conn.gamma;
    let partials: Vec<Tensor> = b.coords.iter().map(|c| t.partial(c)).collect();
    Ok(Tensor::from_fn(
        n,
        &[Variance::Up, Variance::Down, Variance::Down],
        |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut terms = vec![partials[k].get(&[i, j]).clone()];
            for a in 0..n {
                let up = match kind {
                    0 | 2 => g.get(&[i, a, k]),
                    _ => g.get(&[i, k, a]),
                };
                let down = match kind {
                    0 | 3 => g.get(&[a, j, k]),
                    _ => g.get(&[a, k, j]),
                };
                terms.push(up.clone() * t.get(&[a, j]).clone());
                terms.push((down.clone() * t.get(&[i, a]).clone()).neg());
            }
            Expr::sum(terms).simplify()
        },
    ))
}

/// Curvature of the associated space:
/// `R^i_jmn = ∂_n Γ^i_jm - ∂_m Γ^i_jn + Γ^α_jm Γ^i_αn - Γ^α_jn Γ^i_αm` with the
/// symmetric connection.
pub fn riemann(b: &MetricBundle, conn: &Connection) -> Tensor {
    let n = b.dim;
    let gs = &conn.gamma_sym;
    let d: Vec<Tensor> = b.coords.iter().map(|c| gs.partial(c)).collect();
    Tensor::from_fn(n, &valence::UDDD, |ix| {
        let (i, j, m, nn) = (ix[0], ix[1], ix[2], ix[3]);
        let mut terms = vec![
            d[nn].get(&[i, j, m]).clone(),
            d[m].get(&[i, j, nn]).clone().neg(),
        ];
        for a in 0..n {
            terms.push(gs.get(&[a, j, m]).clone() * gs.get(&[i, a, nn]).clone());
            terms.push((gs.get(&[a, j, nn]).clone() * gs.get(&[i, a, m]).clone()).neg());
        }
        Expr::sum(terms).simplify()
    })
}

/// Building blocks shared by every member of the curvature family.
struct FamilyParts {
    riemann: Tensor,
    /// `∇_n T^i_jm` at index `(i, j, m, n)`.
    dtorsion: Tensor,
    /// `T^α_jm T^i_αn`, `T^α_jn T^i_αm`, `T^α_mn T^i_αj`.
    quad: [Tensor; 3],
}

impl FamilyParts {
    fn new(b: &MetricBundle, conn: &Connection) -> Self {
        let n = b.dim;
        let t = &conn.torsion;
        let quad_term = |f: IndexPairs| {
            Tensor::from_fn(n, &valence::UDDD, |ix| {
                let terms = (0..n)
                    .map(|a| {
                        let (p, q) = f(ix, a);
                        t.get(&p).clone() * t.get(&q).clone()
                    })
                    .collect();
                Expr::sum(terms).simplify()
            })
        };
        Self {
            riemann: riemann(b, conn),
            dtorsion: cov_deriv(t, b, conn),
            quad: [
                quad_term(|ix, a| ([a, ix[1], ix[2]], [ix[0], a, ix[3]])),
                quad_term(|ix, a| ([a, ix[1], ix[3]], [ix[0], a, ix[2]])),
                quad_term(|ix, a| ([a, ix[2], ix[3]], [ix[0], a, ix[1]])),
            ],
        }
    }

    fn family(&self, c: &FamilyCoeffs) -> Tensor {
        let n = self.riemann.dim();
        let k = |r: Rational| Expr::constant(r);
        Tensor::from_fn(n, &valence::UDDD, |ix| {
            let (i, j, m, nn) = (ix[0], ix[1], ix[2], ix[3]);
            Expr::sum(vec![
                self.riemann.get(ix).clone(),
                k(c.u) * self.dtorsion.get(&[i, j, m, nn]).clone(),
                k(c.u_prime) * self.dtorsion.get(&[i, j, nn, m]).clone(),
                k(c.v) * self.quad[0].get(ix).clone(),
                k(c.v_prime) * self.quad[1].get(ix).clone(),
                k(c.w) * self.quad[2].get(ix).clone(),
            ])
            .simplify()
        })
    }
}

/// `R̃^i_jmn = R^i_jmn + u ∇_n T^i_jm + u' ∇_m T^i_jn + v T^α_jm T^i_αn
/// + v' T^α_jn T^i_αm + w T^α_mn T^i_αj`.
pub fn curvature_family(b: &MetricBundle, conn: &Connection, c: &FamilyCoeffs) -> Tensor {
    FamilyParts::new(b, conn).family(c)
}

pub fn curvature_kind(kind: usize, b: &MetricBundle, conn: &Connection) -> Result<Tensor> {
    let c = FamilyCoeffs::kind(kind)?;
    Ok(curvature_family(b, conn, &c))
}

/// The six named curvature tensors written out term by term, without going
/// through the coefficient table. Used to cross-check [`curvature_kind`].
pub fn kind_expansion(kind: usize, b: &MetricBundle, conn: &Connection) -> Result<Tensor> {
    if kind > 5 {
        return Err(Error::KindOutOfRange(kind));
    }
    let n = b.dim;
    let r = riemann(b, conn);
    let dt = cov_deriv(&conn.torsion, b, conn);
    let t = &conn.torsion;
    let half = || Expr::ratio(1, 2);
    let quarter = || Expr::ratio(1, 4);
    Ok(Tensor::from_fn(n, &valence::UDDD, |ix| {
        let (i, j, m, nn) = (ix[0], ix[1], ix[2], ix[3]);
        let nabla_n = dt.get(&[i, j, m, nn]).clone();
        let nabla_m = dt.get(&[i, j, nn, m]).clone();
        let sum = |f: &dyn Fn(usize) -> Expr| Expr::sum((0..n).map(f).collect());
        let t_jm_n = sum(&|a| t.get(&[a, j, m]).clone() * t.get(&[i, a, nn]).clone());
        let t_jn_m = sum(&|a| t.get(&[a, j, nn]).clone() * t.get(&[i, a, m]).clone());
        let t_mn_j = sum(&|a| t.get(&[a, m, nn]).clone() * t.get(&[i, a, j]).clone());
        let rest = match kind {
            0 => vec![
                half() * nabla_n,
                (half() * nabla_m).neg(),
                quarter() * t_jm_n,
                (quarter() * t_jn_m).neg(),
            ],
            1 => vec![
                (half() * nabla_n).neg(),
                half() * nabla_m,
                quarter() * t_jm_n,
                (quarter() * t_jn_m).neg(),
            ],
            2 => vec![
                half() * nabla_n,
                half() * nabla_m,
                (quarter() * t_jm_n).neg(),
                quarter() * t_jn_m,
                (half() * t_mn_j).neg(),
            ],
            3 => vec![
                half() * nabla_n,
                half() * nabla_m,
                (quarter() * t_jm_n).neg(),
                quarter() * t_jn_m,
                half() * t_mn_j,
            ],
            4 => vec![(quarter() * t_jm_n).neg(), quarter() * t_jn_m],
            _ => vec![quarter() * t_jm_n, quarter() * t_jn_m],
        };
        let mut terms = vec![r.get(ix).clone()];
        terms.extend(rest);
        Expr::sum(terms).simplify()
    }))
}

/// `R̃_ij = R̃^α_ijα` for a named kind.
pub fn ricci(b: &MetricBundle, conn: &Connection, kind: usize) -> Result<Tensor> {
    curvature_kind(kind, b, conn)?.contract(0, 3)
}

pub fn ricci_family(b: &MetricBundle, conn: &Connection, c: &FamilyCoeffs) -> Result<Tensor> {
    curvature_family(b, conn, c).contract(0, 3)
}

/// `TT_ij = T^α_iβ T^β_jα`.
pub fn torsion_square(b: &MetricBundle, conn: &Connection) -> Tensor {
    let n = b.dim;
    let t = &conn.torsion;
    Tensor::from_fn(n, &valence::DD, |ix| {
        let mut terms = Vec::new();
        for a in 0..n {
            for c in 0..n {
                terms.push(t.get(&[a, ix[0], c]).clone() * t.get(&[c, ix[1], a]).clone());
            }
        }
        Expr::sum(terms).simplify()
    })
}

/// `R_ij + u ∇_α T^α_ij - (v' + w) T^α_iβ T^β_jα`.
pub fn ricci_closed_form(b: &MetricBundle, conn: &Connection, c: &FamilyCoeffs) -> Result<Tensor> {
    let r = riemann(b, conn).contract(0, 3)?;
    let div_t = cov_deriv(&conn.torsion, b, conn).contract(0, 3)?;
    let tt = torsion_square(b, conn);
    let tt_coeff = Expr::constant(-(c.v_prime + c.w));
    Ok(Tensor::from_fn(b.dim, &valence::DD, |ix| {
        Expr::sum(vec![
            r.get(ix).clone(),
            Expr::constant(c.u) * div_t.get(ix).clone(),
            tt_coeff.clone() * tt.get(ix).clone(),
        ])
        .simplify()
    }))
}

/// The printed Ricci table for each kind: `R_ij + a ∇_α T^α_ij + b TT_ij`.
pub fn ricci_printed(b: &MetricBundle, conn: &Connection, kind: usize) -> Result<Tensor> {
    let (a, bb) = printed_ricci_coefficients(kind)?;
    let r = riemann(b, conn).contract(0, 3)?;
    let div_t = cov_deriv(&conn.torsion, b, conn).contract(0, 3)?;
    let tt = torsion_square(b, conn);
    Ok(Tensor::from_fn(b.dim, &valence::DD, |ix| {
        Expr::sum(vec![
            r.get(ix).clone(),
            Expr::constant(a) * div_t.get(ix).clone(),
            Expr::constant(bb) * tt.get(ix).clone(),
        ])
        .simplify()
    }))
}

fn printed_ricci_coefficients(kind: usize) -> Result<(Rational, Rational)> {
    let r = Rational::new;
    Ok(match kind {
        0 => (r(1, 2), r(1, 4)),
        1 => (r(-1, 2), r(1, 4)),
        2 => (r(1, 2), r(1, 4)),
        3 => (r(1, 2), r(-3, 4)),
        4 => (r(0, 1), r(-1, 4)),
        5 => (r(0, 1), r(0, 1)),
        _ => return Err(Error::KindOutOfRange(kind)),
    })
}

fn trace_with_inverse(b: &MetricBundle, m: &Tensor) -> Expr {
    let mut terms = Vec::new();
    for i in 0..b.dim {
        for j in 0..b.dim {
            let gij = b.ginv.get(&[i, j]);
            if !gij.is_zero() {
                terms.push(gij.clone() * m.get(&[i, j]).clone());
            }
        }
    }
    Expr::sum(terms).simplify()
}

/// `g^{ij} R̃_ij` for a named kind.
pub fn scalar(b: &MetricBundle, conn: &Connection, kind: usize) -> Result<Expr> {
    Ok(trace_with_inverse(b, &ricci(b, conn, kind)?))
}

/// `R - (v' + w) g^{γδ} TT_γδ`.
pub fn scalar_closed_form(b: &MetricBundle, conn: &Connection, c: &FamilyCoeffs) -> Result<Expr> {
    let r = trace_with_inverse(b, &riemann(b, conn).contract(0, 3)?);
    let gtt = trace_with_inverse(b, &torsion_square(b, conn));
    Ok((r + Expr::constant(-(c.v_prime + c.w)) * gtt).simplify())
}

/// The printed scalar table: `R + ¼ gTT` (kinds 0-2), `R - ¾ gTT`, `R - ¼ gTT`, `R`.
pub fn scalar_printed(b: &MetricBundle, conn: &Connection, kind: usize) -> Result<Expr> {
    let (_, coeff) = printed_ricci_coefficients(kind)?;
    let r = trace_with_inverse(b, &riemann(b, conn).contract(0, 3)?);
    let gtt = trace_with_inverse(b, &torsion_square(b, conn));
    Ok((r + Expr::constant(coeff) * gtt).simplify())
}

/// `g^{ij} m_ij` with the inverse symmetric metric.
pub fn metric_trace(b: &MetricBundle, m: &Tensor) -> Expr {
    trace_with_inverse(b, m)
}

/// Both sides of the connection trace identities.
#[derive(Clone, Debug)]
pub struct TraceIdentities {
    /// `Γ^α_{iα}` of the symmetric connection.
    pub sym_trace: Tensor,
    /// `Γ^α_{∨iα}`, expected to be literally zero.
    pub alt_trace: Tensor,
    /// `∂_i|g| / (2g)` with `|g|` resolved from the probed sign.
    pub literal: Tensor,
    /// `∂_i|g| / (2|g|)`, equal to `∂_i g / (2g)` for either sign.
    pub consistent: Tensor,
}

pub fn trace_identities(b: &MetricBundle, conn: &Connection) -> Result<TraceIdentities> {
    let abs = b.abs_det()?;
    let n = b.dim;
    let two_g_inv = (Expr::int(2) * b.det.clone()).recip();
    let two_abs_inv = (Expr::int(2) * abs.clone()).recip();
    let literal = Tensor::from_fn(n, &valence::D, |ix| {
        (abs.differentiate(&b.coords[ix[0]]) * two_g_inv.clone()).simplify()
    });
    let consistent = Tensor::from_fn(n, &valence::D, |ix| {
        (abs.differentiate(&b.coords[ix[0]]) * two_abs_inv.clone()).simplify()
    });
    Ok(TraceIdentities {
        sym_trace: conn.gamma_sym.contract(0, 2)?,
        alt_trace: conn.gamma_alt.contract(0, 2)?,
        literal,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ProbeConfig};
    use crate::geometry::{bundle, christoffel, coords, metric_from_strings};

    fn build(rows: &[&[&str]]) -> (MetricBundle, Connection) {
        let entries: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect();
        let names = ["t", "x1", "x2", "x3"];
        let b = bundle(
            metric_from_strings(&entries).unwrap(),
            coords(&names[..rows.len()]).unwrap(),
        )
        .unwrap();
        let c = christoffel(&b).unwrap();
        (b, c)
    }

    const FLRW: [&[&str]; 4] = [
        &["-1", "0", "0", "0"],
        &["0", "s(t)", "0", "0"],
        &["0", "0", "s(t)", "0"],
        &["0", "0", "0", "s(t)"],
    ];

    #[test]
    fn flat_metric_has_zero_curvature() {
        let (b, c) = build(&[&["-1", "0"], &["0", "1"]]);
        assert!(riemann(&b, &c).is_zero());
    }

    #[test]
    fn flrw_riemann_component() {
        let (b, c) = build(&FLRW);
        let r = riemann(&b, &c);
        let expected = parse("s''(t)/(2*s(t)) - s'(t)^2/(4*s(t)^2)")
            .unwrap()
            .simplify();
        assert_eq!(r.get(&[1, 0, 1, 0]), &expected);
        let cfg = ProbeConfig::default();
        let v = crate::expr::equivalent(r.get(&[1, 0, 1, 0]), &expected, &cfg);
        assert!(v.is_equal(), "{v:?}");
    }

    #[test]
    fn riemann_antisymmetric_in_last_pair() {
        let (b, c) = build(&[
            &["-1 - t^2", "x1*t", "0"],
            &["2*t", "1 + x1^2", "x2"],
            &["t^2", "-x2", "2 + t*x2"],
        ]);
        let r = riemann(&b, &c);
        let swapped = r.swap_slots(2, 3).unwrap().scale(&Expr::int(-1));
        assert!(r
            .probe_equal(&swapped, &ProbeConfig::default())
            .unwrap()
            .is_equal());
    }

    #[test]
    fn metricity_of_associated_connection() {
        let (b, c) = build(&FLRW);
        assert!(cov_deriv(&b.gsym, &b, &c).is_zero());
    }

    #[test]
    fn kinds_out_of_range() {
        assert!(matches!(
            FamilyCoeffs::kind(6),
            Err(Error::KindOutOfRange(6))
        ));
        let (b, c) = build(&FLRW);
        let x = Tensor::identity(4);
        assert!(matches!(
            cov_deriv_kind(4, &x, &b, &c),
            Err(Error::DerivativeKindOutOfRange(4))
        ));
        assert!(cov_deriv_kind(0, &b.gsym, &b, &c).is_err());
    }

    #[test]
    fn zero_coefficients_give_riemann() {
        let (b, c) = build(&[
            &["-1", "0", "0", "0"],
            &["0", "s1(t)", "c(t)", "0"],
            &["0", "-c(t)", "s2(t)", "0"],
            &["0", "0", "0", "s3(t)"],
        ]);
        assert_eq!(
            curvature_family(&b, &c, &FamilyCoeffs::zero()),
            riemann(&b, &c)
        );
    }
}
