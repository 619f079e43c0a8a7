//! Connections, torsion and curvature of a non-symmetric metric.

mod connection;
mod curvature;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expr::{probe_sign, Expr, ProbeConfig, SignProbe, Symbol};
use crate::tensor::{valence, Tensor, Variance};

pub use connection::{christoffel, Connection, DecompositionCheck};
pub use curvature::{
    cov_deriv, cov_deriv_kind, curvature_family, curvature_kind, kind_expansion, metric_trace,
    ricci, ricci_closed_form, ricci_family, ricci_printed, riemann, scalar, scalar_closed_form,
    scalar_printed, torsion_square, trace_identities, FamilyCoeffs, TraceIdentities,
};

/// A non-symmetric metric with its symmetric/anti-symmetric split, the
/// inverse of the symmetric part and its determinant.
#[derive(Clone, Debug)]
pub struct MetricBundle {
    pub dim: usize,
    pub coords: Vec<Symbol>,
    pub g: Tensor,
    pub gsym: Tensor,
    pub galt: Tensor,
    pub ginv: Tensor,
    pub det: Expr,
    /// Sign of `det` when it is the same at every probe point.
    pub det_sign: Option<i8>,
}

/// Builds the metric bundle; the inverse is the exact adjugate of each
/// coupled block of the symmetric part, blocks of size at most 4.
pub fn bundle(metric: Tensor, coords: Vec<Symbol>) -> Result<MetricBundle> {
    if metric.rank() != 2 {
        return Err(Error::Shape(format!(
            "metric must have rank 2, got {}",
            metric.rank()
        )));
    }
    if metric.valence() != valence::DD {
        return Err(Error::VarianceMismatch(format!(
            "metric must be covariant, got {:?}",
            metric.valence()
        )));
    }
    let dim = metric.dim();
    if coords.len() != dim {
        return Err(Error::DimMismatch(dim, coords.len()));
    }
    let unique: BTreeSet<&Symbol> = coords.iter().collect();
    if unique.len() != coords.len() {
        return Err(Error::Shape("coordinate names must be unique".into()));
    }
    let g = metric.simplified();
    let gsym = g.symmetrize(0, 1)?;
    let galt = g.antisymmetrize(0, 1)?;
    let (det, ginv) = invert_symmetric(&gsym)?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let det_sign = probe_det_sign(&det)?;
    Ok(MetricBundle {
        dim,
        coords,
        g,
        gsym,
        galt,
        ginv,
        det,
        det_sign,
    })
}

impl MetricBundle {
    /// `sqrt(|g|)`, using the probed sign of the determinant.
    pub fn sqrt_abs_det(&self) -> Result<Expr> {
        let sign = self.det_sign.ok_or(Error::IndefiniteSign)?;
        Ok(Expr::pow(
            Expr::int(sign as i64) * self.det.clone(),
            crate::expr::Rational::new(1, 2),
        )
        .simplify())
    }

    /// `|g|` as an expression, using the probed sign of the determinant.
    pub fn abs_det(&self) -> Result<Expr> {
        let sign = self.det_sign.ok_or(Error::IndefiniteSign)?;
        Ok((Expr::int(sign as i64) * self.det.clone()).simplify())
    }

    /// True when the symmetric part has only literal-zero off-diagonal entries.
    pub fn is_diagonal(&self) -> bool {
        is_diagonal(&self.gsym)
    }

    /// Rebuilds the bundle from a new full metric over the same chart.
    pub fn with_metric(&self, metric: Tensor) -> Result<MetricBundle> {
        bundle(metric, self.coords.clone())
    }
}

fn is_diagonal(m: &Tensor) -> bool {
    m.nonzero().iter().all(|(ix, _)| ix[0] == ix[1])
}

/// Determinant of a square matrix of expressions by cofactor expansion.
pub(crate) fn determinant(rows: &[Vec<Expr>]) -> Expr {
    let n = rows.len();
    match n {
        0 => Expr::one(),
        1 => rows[0][0].clone(),
        2 => rows[0][0].clone() * rows[1][1].clone() - rows[0][1].clone() * rows[1][0].clone(),
        _ => {
            let mut terms = Vec::new();
            for col in 0..n {
                if rows[0][col].is_zero() {
                    continue;
                }
                let m = minor(rows, 0, col);
                let cof = determinant(&m);
                let term = rows[0][col].clone() * cof;
                terms.push(if col % 2 == 0 { term } else { term.neg() });
            }
            Expr::sum(terms)
        }
    }
}

fn minor(rows: &[Vec<Expr>], skip_row: usize, skip_col: usize) -> Vec<Vec<Expr>> {
    rows.iter()
        .enumerate()
        .filter(|(r, _)| *r != skip_row)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| *c != skip_col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

fn invert_symmetric(gsym: &Tensor) -> Result<(Expr, Tensor)> {
    let n = gsym.dim();
    if is_diagonal(gsym) {
        let diag: Vec<Expr> = (0..n).map(|i| gsym.get(&[i, i]).clone()).collect();
        let det = Expr::product(diag.clone()).simplify();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let ginv = Tensor::from_fn(n, &valence::UU, |ix| {
            if ix[0] == ix[1] {
                diag[ix[0]].clone().recip().simplify()
            } else {
                Expr::zero()
            }
        });
        return Ok((det, ginv));
    }
    // Inverting block by block keeps common factors of other blocks out of
    // the cofactors, which the simplifier cannot cancel.
    let blocks = diagonal_blocks(gsym);
    if let Some(big) = blocks.iter().find(|b| b.len() > 4) {
        return Err(Error::Capability(format!(
            "symbolic inverse of a coupled {0}x{0} block is not supported",
            big.len()
        )));
    }
    let mut dets = Vec::with_capacity(blocks.len());
    let mut inv = vec![vec![Expr::zero(); n]; n];
    for block in &blocks {
        let rows: Vec<Vec<Expr>> = block
            .iter()
            .map(|&i| block.iter().map(|&j| gsym.get(&[i, j]).clone()).collect())
            .collect();
        let det = determinant(&rows).simplify();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let inv_det = det.clone().recip();
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                // Adjugate entry (a, b) is the (b, a) cofactor.
                let cof = if rows.len() == 1 {
                    Expr::one()
                } else {
                    determinant(&minor(&rows, b, a))
                };
                let signed = if (a + b) % 2 == 0 { cof } else { cof.neg() };
                inv[i][j] = (signed * inv_det.clone()).simplify();
            }
        }
        dets.push(det);
    }
    let det = Expr::product(dets).simplify();
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let ginv = Tensor::from_fn(n, &valence::UU, |ix| inv[ix[0]][ix[1]].clone());
    Ok((det, ginv))
}

/// Index sets of the connected components of the non-zero pattern.
fn diagonal_blocks(m: &Tensor) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut comp: Vec<usize> = (0..n).collect();
    fn root(c: &mut [usize], mut i: usize) -> usize {
        while c[i] != i {
            c[i] = c[c[i]];
            i = c[i];
        }
        i
    }
    for (ix, _) in m.nonzero() {
        let (a, b) = (root(&mut comp, ix[0]), root(&mut comp, ix[1]));
        if a != b {
            comp[a.max(b)] = a.min(b);
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut comp, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

/// Sign of `det` over the probe domain: `Err(Singular)` if it vanishes at
/// every probe, `None` if the sign varies.
fn probe_det_sign(det: &Expr) -> Result<Option<i8>> {
    match probe_sign(det, &ProbeConfig::default()) {
        SignProbe::Zero => Err(Error::Singular),
        s => Ok(s.as_sign()),
    }
}

/// Parses a square array of expression strings into a covariant metric.
pub fn metric_from_strings(entries: &[Vec<String>]) -> Result<Tensor> {
    let n = entries.len();
    let mut comps = Vec::with_capacity(n * n);
    for (i, row) in entries.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for src in row {
            comps.push(crate::expr::parse(src)?);
        }
    }
    Tensor::new(n, &[Variance::Down, Variance::Down], comps)
}

/// Coordinate symbols from names.
pub fn coords(names: &[&str]) -> Result<Vec<Symbol>> {
    names.iter().map(|n| Symbol::new(n)).collect()
}
