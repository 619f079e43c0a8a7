//! Finite-difference check of the derivative of the quadratic torsion
//! scalar with respect to the metric.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::Bindings;
use crate::geometry::MetricBundle;

use super::oracle::{numeric_oracle, NumTensor};

/// Denominator floor of the relative error, so pairs where both sides
/// vanish do not divide by zero.
const REL_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    pub alpha: usize,
    pub beta: usize,
    pub h: f64,
    pub fd_value: f64,
    /// `6 T^γ_αδ T^δ_βγ`.
    pub analytic_value: f64,
    pub global_sign: i8,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Rounding bound of the central difference, `16 ε (|F+| + |F-|) / 2h`.
    pub noise_floor: f64,
}

/// `F = g^{εζ} g^{ργ} g^{σδ} T_{ρ.εδ} T_{σ.ζγ}` with the torsion held fixed.
fn quadratic_scalar(ginv: &DMatrix<f64>, tl: &NumTensor) -> f64 {
    let n = tl.dim;
    // A_{ρ.ζδ} = g^{εζ} T_{ρ.εδ}
    let mut a = NumTensor::zeros(n, 3);
    for r in 0..n {
        for z in 0..n {
            for d in 0..n {
                let v: f64 = (0..n).map(|e| ginv[(e, z)] * tl.get(&[r, e, d])).sum();
                a.set(&[r, z, d], v);
            }
        }
    }
    let mut f = 0.0;
    for r in 0..n {
        for z in 0..n {
            for d in 0..n {
                let ar = a.get(&[r, z, d]);
                if ar == 0.0 {
                    continue;
                }
                for s in 0..n {
                    for c in 0..n {
                        f += ar * ginv[(r, c)] * ginv[(s, d)] * tl.get(&[s, z, c]);
                    }
                }
            }
        }
    }
    f
}

struct Setup {
    ginv: DMatrix<f64>,
    tl: NumTensor,
    torsion: NumTensor,
}

fn setup(b: &MetricBundle, bindings: &Bindings) -> Result<Setup> {
    let o = numeric_oracle(b, bindings)?;
    let n = b.dim;
    Ok(Setup {
        ginv: DMatrix::from_fn(n, n, |i, j| o.ginv.get(&[i, j])),
        tl: o.torsion_lower,
        torsion: o.torsion,
    })
}

fn raw(s: &Setup, alpha: usize, beta: usize, h: f64) -> Result<(f64, f64, f64)> {
    let n = s.tl.dim;
    // Symmetric perturbation of the inverse metric along E_αβ + E_βα.
    let mut e = DMatrix::zeros(n, n);
    e[(alpha, beta)] += 1.0;
    e[(beta, alpha)] += 1.0;
    let plus = &s.ginv + &e * h;
    let minus = &s.ginv - &e * h;
    if plus.determinant() == 0.0 || minus.determinant() == 0.0 {
        return Err(Error::Singular);
    }
    let (fp, fm) = (
        quadratic_scalar(&plus, &s.tl),
        quadratic_scalar(&minus, &s.tl),
    );
    let fd = (fp - fm) / (2.0 * h);
    let noise = 16.0 * f64::EPSILON * (fp.abs() + fm.abs()) / (2.0 * h);
    let mut tt = 0.0;
    for c in 0..n {
        for d in 0..n {
            tt += s.torsion.get(&[c, alpha, d]) * s.torsion.get(&[d, beta, c]);
        }
    }
    Ok((fd, 6.0 * tt, noise))
}

fn errors(fd: f64, analytic: f64, sign: i8) -> (f64, f64) {
    let abs = (fd - sign as f64 * analytic).abs();
    (abs, abs / fd.abs().max(analytic.abs()).max(REL_FLOOR))
}

fn report(
    alpha: usize,
    beta: usize,
    h: f64,
    (fd, analytic, noise_floor): (f64, f64, f64),
    sign: i8,
) -> FdReport {
    let (abs_err, rel_err) = errors(fd, analytic, sign);
    FdReport {
        alpha,
        beta,
        h,
        fd_value: fd,
        analytic_value: analytic,
        global_sign: sign,
        abs_err,
        rel_err,
        noise_floor,
    }
}

fn check_indices(b: &MetricBundle, alpha: usize, beta: usize, h: f64) -> Result<()> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if v >= b.dim {
            return Err(Error::Spec {
                path: name.into(),
                message: format!("index {v} out of range for dimension {}", b.dim),
            });
        }
    }
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Spec {
            path: "step".into(),
            message: "must be positive".into(),
        });
    }
    Ok(())
}

/// One index pair, with the sign that best matches this pair alone.
pub fn fd_variation_check(
    b: &MetricBundle,
    bindings: &Bindings,
    alpha: usize,
    beta: usize,
    h: f64,
) -> Result<FdReport> {
    check_indices(b, alpha, beta, h)?;
    let s = setup(b, bindings)?;
    let r = raw(&s, alpha, beta, h)?;
    let sign = if errors(r.0, r.1, 1).0 <= errors(r.0, r.1, -1).0 {
        1
    } else {
        -1
    };
    Ok(report(alpha, beta, h, r, sign))
}

/// Every index pair at steps `h` and `h/2` under one global sign.
#[derive(Clone, Debug, PartialEq)]
pub struct FdRun {
    pub global_sign: i8,
    pub at_h: Vec<FdReport>,
    pub at_half_h: Vec<FdReport>,
}

impl FdRun {
    pub fn max_rel_err(&self) -> f64 {
        self.at_h.iter().map(|r| r.rel_err).fold(0.0, f64::max)
    }

    /// True when halving the step does not increase any pair's error,
    /// except where the error is already below the rounding floor.
    pub fn halving_reduces_error(&self) -> bool {
        self.at_h
            .iter()
            .zip(&self.at_half_h)
            .all(|(a, b)| b.abs_err <= a.abs_err || b.abs_err <= b.noise_floor)
    }
}

pub fn fd_variation_run(b: &MetricBundle, bindings: &Bindings, h: f64) -> Result<FdRun> {
    check_indices(b, 0, 0, h)?;
    let s = setup(b, bindings)?;
    let n = b.dim;
    let mut raw_h = Vec::new();
    let mut raw_half = Vec::new();
    for alpha in 0..n {
        for beta in alpha..n {
            raw_h.push((alpha, beta, raw(&s, alpha, beta, h)?));
            raw_half.push((alpha, beta, raw(&s, alpha, beta, h / 2.0)?));
        }
    }
    let worst = |sign: i8| {
        raw_h
            .iter()
            .map(|(_, _, (fd, an, _))| errors(*fd, *an, sign).1)
            .fold(0.0, f64::max)
    };
    let global_sign = if worst(1) <= worst(-1) { 1 } else { -1 };
    let build = |rows: &[(usize, usize, (f64, f64, f64))], step: f64| {
        rows.iter()
            .map(|&(a, b, r)| report(a, b, step, r, global_sign))
            .collect()
    };
    Ok(FdRun {
        global_sign,
        at_h: build(&raw_h, h),
        at_half_h: build(&raw_half, h / 2.0),
    })
}
