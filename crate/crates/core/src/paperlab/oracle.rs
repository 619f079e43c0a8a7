//! Floating-point recomputation of every derived quantity from point values
//! of the metric, with finite-difference partial derivatives.

use nalgebra::DMatrix;

use crate::cosmofluid::{fluid_decompose, stress_energy, torsion_invariant, Velocity};
use crate::error::{Error, Result};
use crate::expr::{evaluate, Bindings, EvalError, Expr};
use crate::geometry::{
    christoffel, curvature_kind, metric_trace, ricci, riemann, scalar, FamilyCoeffs, MetricBundle,
};
use crate::tensor::Tensor;

/// Maps an index tuple and a summed index to the two torsion index triples.
type IndexPairs = fn(&[usize], usize) -> ([usize; 3], [usize; 3]);

/// Step of the central difference for metric derivatives.
const H: f64 = 1e-5;
/// Step of the five-point stencil for derivatives of the connection, which
/// is itself a finite difference.
const H_OUTER: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct NumTensor {
    pub dim: usize,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl NumTensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self {
            dim,
            rank,
            data: vec![0.0; dim.pow(rank as u32)],
        }
    }

    fn offset(&self, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.rank);
        ix.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, ix: &[usize]) -> f64 {
        self.data[self.offset(ix)]
    }

    pub fn set(&mut self, ix: &[usize], v: f64) {
        let o = self.offset(ix);
        self.data[o] = v;
    }

    fn index_of(&self, mut flat: usize) -> Vec<usize> {
        let mut ix = vec![0; self.rank];
        for slot in (0..self.rank).rev() {
            ix[slot] = flat % self.dim;
            flat /= self.dim;
        }
        ix
    }

    fn from_fn(dim: usize, rank: usize, f: impl Fn(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, rank);
        for k in 0..t.data.len() {
            let ix = t.index_of(k);
            t.data[k] = f(&ix);
        }
        t
    }

    fn axpy(&mut self, a: f64, other: &NumTensor) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericFluid {
    pub rho: f64,
    pub p: f64,
    pub omega: Option<f64>,
    pub eps: i8,
}

/// Every quantity of the symbolic pipeline at one point.
#[derive(Clone, Debug)]
pub struct OracleBundle {
    pub gsym: NumTensor,
    pub ginv: NumTensor,
    pub gamma: NumTensor,
    pub gamma_sym: NumTensor,
    pub torsion: NumTensor,
    pub torsion_lower: NumTensor,
    pub riemann: NumTensor,
    pub curvature: Vec<NumTensor>,
    pub ricci: Vec<NumTensor>,
    pub scalars: Vec<f64>,
    pub levi_civita_scalar: f64,
    pub torsion_invariant: f64,
    pub stress: NumTensor,
    pub trace: f64,
    pub fluid: NumericFluid,
}

/// Connection data at one point.
struct Local {
    gsym: NumTensor,
    ginv: NumTensor,
    gamma: NumTensor,
    gamma_sym: NumTensor,
    torsion: NumTensor,
    torsion_lower: NumTensor,
}

struct Evaluator<'a> {
    b: &'a MetricBundle,
    base: &'a Bindings,
    x0: Vec<f64>,
    /// Coordinates the metric actually depends on.
    active: Vec<bool>,
}

fn gap(e: EvalError) -> Error {
    match e {
        EvalError::Unbound { .. } => Error::BindingGap(e.to_string()),
        other => Error::Eval(other),
    }
}

impl<'a> Evaluator<'a> {
    fn new(b: &'a MetricBundle, base: &'a Bindings) -> Result<Self> {
        let x0 = b
            .coords
            .iter()
            .map(|c| {
                base.symbol(c.as_str())
                    .ok_or_else(|| Error::BindingGap(format!("coordinate {c} has no value")))
            })
            .collect::<Result<Vec<_>>>()?;
        let active = b
            .coords
            .iter()
            .map(|c| b.g.components().iter().any(|e| e.depends_on(c)))
            .collect();
        Ok(Self {
            b,
            base,
            x0,
            active,
        })
    }

    fn metric_at(&self, x: &[f64]) -> Result<NumTensor> {
        let mut bind = self.base.clone();
        for (c, v) in self.b.coords.iter().zip(x) {
            bind.set_symbol(c.as_str(), *v);
        }
        let n = self.b.dim;
        let mut g = NumTensor::zeros(n, 2);
        for (k, e) in self.b.g.components().iter().enumerate() {
            g.data[k] = evaluate(e, &bind).map_err(gap)?;
        }
        Ok(g)
    }

    fn shifted(x: &[f64], k: usize, d: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        y[k] += d;
        y
    }

    fn local(&self, x: &[f64]) -> Result<Local> {
        let n = self.b.dim;
        let g = self.metric_at(x)?;
        let mut dg = Vec::with_capacity(n);
        for k in 0..n {
            if !self.active[k] {
                dg.push(NumTensor::zeros(n, 2));
                continue;
            }
            let plus = self.metric_at(&Self::shifted(x, k, H))?;
            let minus = self.metric_at(&Self::shifted(x, k, -H))?;
            let mut d = plus;
            d.axpy(-1.0, &minus);
            d.data.iter_mut().for_each(|v| *v /= 2.0 * H);
            dg.push(d);
        }
        let gsym = NumTensor::from_fn(n, 2, |ix| {
            0.5 * (g.get(&[ix[0], ix[1]]) + g.get(&[ix[1], ix[0]]))
        });
        let m = DMatrix::from_fn(n, n, |i, j| gsym.get(&[i, j]));
        let inv = m.try_inverse().ok_or(Error::Singular)?;
        let ginv = NumTensor::from_fn(n, 2, |ix| inv[(ix[0], ix[1])]);
        let first = NumTensor::from_fn(n, 3, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            0.5 * (dg[k].get(&[j, i]) - dg[i].get(&[j, k]) + dg[j].get(&[i, k]))
        });
        let gamma = NumTensor::from_fn(n, 3, |ix| {
            (0..n)
                .map(|a| ginv.get(&[ix[0], a]) * first.get(&[a, ix[1], ix[2]]))
                .sum()
        });
        let gamma_sym = NumTensor::from_fn(n, 3, |ix| {
            0.5 * (gamma.get(ix) + gamma.get(&[ix[0], ix[2], ix[1]]))
        });
        let torsion =
            NumTensor::from_fn(n, 3, |ix| gamma.get(ix) - gamma.get(&[ix[0], ix[2], ix[1]]));
        let torsion_lower =
            NumTensor::from_fn(n, 3, |ix| first.get(ix) - first.get(&[ix[0], ix[2], ix[1]]));
        Ok(Local {
            gsym,
            ginv,
            gamma,
            gamma_sym,
            torsion,
            torsion_lower,
        })
    }

    /// `∂_k` of the symmetric connection and the torsion, five-point stencil.
    fn connection_derivatives(&self) -> Result<Vec<(NumTensor, NumTensor)>> {
        let n = self.b.dim;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            if !self.active[k] {
                out.push((NumTensor::zeros(n, 3), NumTensor::zeros(n, 3)));
                continue;
            }
            let mut dgs = NumTensor::zeros(n, 3);
            let mut dt = NumTensor::zeros(n, 3);
            for (step, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
                let l = self.local(&Self::shifted(&self.x0, k, step * H_OUTER))?;
                let c = w / (12.0 * H_OUTER);
                dgs.axpy(c, &l.gamma_sym);
                dt.axpy(c, &l.torsion);
            }
            out.push((dgs, dt));
        }
        Ok(out)
    }
}

fn contract_ricci(r: &NumTensor) -> NumTensor {
    let n = r.dim;
    NumTensor::from_fn(n, 2, |ix| {
        (0..n).map(|a| r.get(&[a, ix[0], ix[1], a])).sum()
    })
}

fn trace(ginv: &NumTensor, m: &NumTensor) -> f64 {
    let n = m.dim;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += ginv.get(&[i, j]) * m.get(&[i, j]);
        }
    }
    s
}

/// Recomputes every quantity at the point given by `bindings`, which must
/// bind each coordinate and close each opaque function.
pub fn numeric_oracle(b: &MetricBundle, bindings: &Bindings) -> Result<OracleBundle> {
    let ev = Evaluator::new(b, bindings)?;
    let n = b.dim;
    let l = ev.local(&ev.x0)?;
    let d = ev.connection_derivatives()?;
    let gs = &l.gamma_sym;
    let t = &l.torsion;

    let riemann = NumTensor::from_fn(n, 4, |ix| {
        let (i, j, m, nn) = (ix[0], ix[1], ix[2], ix[3]);
        let mut v = d[nn].0.get(&[i, j, m]) - d[m].0.get(&[i, j, nn]);
        for a in 0..n {
            v +=
                gs.get(&[a, j, m]) * gs.get(&[i, a, nn]) - gs.get(&[a, j, nn]) * gs.get(&[i, a, m]);
        }
        v
    });
    // ∇_k T^i_jm at (i, j, m, k)
    let dtorsion = NumTensor::from_fn(n, 4, |ix| {
        let (i, j, m, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut v = d[k].1.get(&[i, j, m]);
        for a in 0..n {
            v += gs.get(&[i, a, k]) * t.get(&[a, j, m]);
            v -= gs.get(&[a, j, k]) * t.get(&[i, a, m]);
            v -= gs.get(&[a, m, k]) * t.get(&[i, j, a]);
        }
        v
    });
    let quad = |f: IndexPairs| {
        NumTensor::from_fn(n, 4, |ix| {
            (0..n)
                .map(|a| {
                    let (p, q) = f(ix, a);
                    t.get(&p) * t.get(&q)
                })
                .sum()
        })
    };
    let quads = [
        quad(|ix, a| ([a, ix[1], ix[2]], [ix[0], a, ix[3]])),
        quad(|ix, a| ([a, ix[1], ix[3]], [ix[0], a, ix[2]])),
        quad(|ix, a| ([a, ix[2], ix[3]], [ix[0], a, ix[1]])),
    ];
    let mut curvature = Vec::with_capacity(6);
    for kind in 0..6 {
        let c = FamilyCoeffs::kind(kind)?;
        let [u, u2, v, v2, w] = c.as_array().map(|r| *r.numer() as f64 / *r.denom() as f64);
        curvature.push(NumTensor::from_fn(n, 4, |ix| {
            let (i, j, m, nn) = (ix[0], ix[1], ix[2], ix[3]);
            riemann.get(ix)
                + u * dtorsion.get(&[i, j, m, nn])
                + u2 * dtorsion.get(&[i, j, nn, m])
                + v * quads[0].get(ix)
                + v2 * quads[1].get(ix)
                + w * quads[2].get(ix)
        }));
    }
    let ricci: Vec<NumTensor> = curvature.iter().map(contract_ricci).collect();
    let scalars = ricci.iter().map(|r| trace(&l.ginv, r)).collect();
    let levi_civita_scalar = trace(&l.ginv, &contract_ricci(&riemann));

    let tt = NumTensor::from_fn(n, 2, |ix| {
        let mut v = 0.0;
        for a in 0..n {
            for c in 0..n {
                v += t.get(&[a, ix[0], c]) * t.get(&[c, ix[1], a]);
            }
        }
        v
    });
    let gtt = trace(&l.ginv, &tt);
    let stress = NumTensor::from_fn(n, 2, |ix| {
        0.25 * gtt * l.gsym.get(ix) - 4.0 / 3.0 * tt.get(ix)
    });
    let tr = trace(&l.ginv, &stress);

    let g00 = l.gsym.get(&[0, 0]);
    if g00 == 0.0 {
        return Err(Error::Unnormalizable("g_00 vanishes".into()));
    }
    let eps: i8 = if g00 > 0.0 { 1 } else { -1 };
    // Comoving observer: u^0 = 1/sqrt|g_00|.
    let rho = stress.get(&[0, 0]) / g00.abs();
    let p = -(tr - eps as f64 * rho) / 3.0;
    let omega = (rho.abs() > 1e-14).then(|| p / rho);

    Ok(OracleBundle {
        gsym: l.gsym,
        ginv: l.ginv,
        gamma: l.gamma,
        gamma_sym: l.gamma_sym,
        torsion: l.torsion,
        torsion_lower: l.torsion_lower,
        riemann,
        curvature,
        ricci,
        scalars,
        levi_civita_scalar,
        torsion_invariant: gtt,
        stress,
        trace: tr,
        fluid: NumericFluid { rho, p, omega, eps },
    })
}

/// Largest deviation between the symbolic and the numeric pipeline for one
/// quantity over a set of bindings.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub quantity: String,
    /// `max |a - b| / (1 + |a| + |b|)`.
    pub max_deviation: f64,
    pub passed: bool,
}

fn deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs() + b.abs())
}

fn tensor_deviation(sym: &Tensor, num: &NumTensor, bind: &Bindings) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, e) in sym.components().iter().enumerate() {
        let v = evaluate(e, bind).map_err(gap)?;
        worst = worst.max(deviation(v, num.data[k]));
    }
    Ok(worst)
}

fn scalar_deviation(sym: &Expr, num: f64, bind: &Bindings) -> Result<f64> {
    Ok(deviation(evaluate(sym, bind).map_err(gap)?, num))
}

/// Builds every symbolic quantity once and compares it with the oracle at
/// each binding set.
pub fn compare_with_oracle(
    b: &MetricBundle,
    bindings: &[Bindings],
    tol: f64,
) -> Result<Vec<OracleCheck>> {
    let conn = christoffel(b)?;
    let riem = riemann(b, &conn);
    let kinds = (0..6)
        .map(|k| curvature_kind(k, b, &conn))
        .collect::<Result<Vec<_>>>()?;
    let riccis = (0..6)
        .map(|k| ricci(b, &conn, k))
        .collect::<Result<Vec<_>>>()?;
    let scalars = (0..6)
        .map(|k| scalar(b, &conn, k))
        .collect::<Result<Vec<_>>>()?;
    let lc = metric_trace(b, &riem.contract(0, 3)?);
    let gtt = torsion_invariant(b, &conn)?;
    let stress = stress_energy(b, &conn)?;
    let tr = metric_trace(b, &stress);
    let fluid = fluid_decompose(b, &stress, &Velocity::comoving(b)?)?;

    let mut worst: Vec<(String, f64)> = Vec::new();
    let mut record = |name: String, dev: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(entry) => entry.1 = entry.1.max(dev),
        None => worst.push((name, dev)),
    };
    for bind in bindings {
        let o = numeric_oracle(b, bind)?;
        record(
            "gamma".into(),
            tensor_deviation(&conn.gamma, &o.gamma, bind)?,
        );
        record(
            "torsion".into(),
            tensor_deviation(&conn.torsion, &o.torsion, bind)?,
        );
        record(
            "torsion_lower".into(),
            tensor_deviation(&conn.torsion_lower, &o.torsion_lower, bind)?,
        );
        record("riemann".into(), tensor_deviation(&riem, &o.riemann, bind)?);
        for k in 0..6 {
            record(
                format!("curvature_{k}"),
                tensor_deviation(&kinds[k], &o.curvature[k], bind)?,
            );
            record(
                format!("ricci_{k}"),
                tensor_deviation(&riccis[k], &o.ricci[k], bind)?,
            );
            record(
                format!("scalar_{k}"),
                scalar_deviation(&scalars[k], o.scalars[k], bind)?,
            );
        }
        record(
            "scalar_levi_civita".into(),
            scalar_deviation(&lc, o.levi_civita_scalar, bind)?,
        );
        record(
            "torsion_invariant".into(),
            scalar_deviation(&gtt, o.torsion_invariant, bind)?,
        );
        record("stress".into(), tensor_deviation(&stress, &o.stress, bind)?);
        record("trace".into(), scalar_deviation(&tr, o.trace, bind)?);
        record(
            "rho".into(),
            scalar_deviation(&fluid.rho, o.fluid.rho, bind)?,
        );
        record("p".into(), scalar_deviation(&fluid.p, o.fluid.p, bind)?);
        if let (Some(w), Some(num)) = (fluid.omega.as_expr(), o.fluid.omega) {
            record("omega".into(), scalar_deviation(&w, num, bind)?);
        }
    }
    Ok(worst
        .into_iter()
        .map(|(quantity, max_deviation)| OracleCheck {
            quantity,
            max_deviation,
            passed: max_deviation <= tol,
        })
        .collect())
}
