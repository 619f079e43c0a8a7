//! Reproduction reports: printed values against the general pipeline and
//! against the printed closed forms.

use std::cell::OnceCell;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::cosmofluid::{
    comoving_closed_forms, fluid_decompose, stress_energy, stress_trace, torsion_invariant,
    torsion_invariant_closed_form, AnsatzShape, FluidState, Velocity,
};
use crate::error::{Error, Result};
use crate::expr::{evaluate, parse, Expr, ProbeConfig};
use crate::geometry::{
    christoffel, metric_trace, riemann, scalar, torsion_square, Connection, MetricBundle,
};
use crate::io::format_g;
use crate::tensor::{valence, Tensor};

use super::Preset;

const MANIFEST: &str = include_str!("../../data/printed_values.json");

/// Which computed value a printed entry is judged against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// The general formulas.
    #[default]
    Derived,
    /// The printed closed forms.
    PaperForm,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Derived => "derived",
            Pipeline::PaperForm => "paper_form",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub quantity: String,
    pub printed: String,
    #[serde(default)]
    pub compare: Pipeline,
    /// Alternative readings of an ambiguous printed value.
    #[serde(default)]
    pub readings: BTreeMap<String, String>,
    /// Set for entries known to disagree with the general formulas.
    #[serde(default)]
    pub conflict: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub cases: BTreeMap<String, Vec<ManifestEntry>>,
}

pub fn manifest() -> Result<Manifest> {
    serde_json::from_str(MANIFEST).map_err(|e| Error::Manifest(e.to_string()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReportVerdict {
    Match,
    Mismatch {
        max_rel_deviation: f64,
    },
    PaperInternalConflict {
        max_rel_deviation: f64,
        note: String,
    },
}

impl ReportVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            ReportVerdict::Match => "match",
            ReportVerdict::Mismatch { .. } => "mismatch",
            ReportVerdict::PaperInternalConflict { .. } => "paper_internal_conflict",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reading {
    pub name: String,
    pub value: Expr,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseReport {
    pub case: String,
    pub quantity: String,
    pub paper_value: Expr,
    /// `None` when the quantity is undefined (a vanishing density).
    pub derived_value: Option<Expr>,
    pub paper_form_value: Option<Expr>,
    pub compared_against: Pipeline,
    pub readings: Vec<Reading>,
    pub verdict: ReportVerdict,
    pub probes: usize,
    pub seed: u64,
    pub tol: f64,
}

fn num(x: f64) -> Value {
    format_g(x)
        .parse::<f64>()
        .map(Value::from)
        .unwrap_or(Value::Null)
}

impl CaseReport {
    pub fn to_json(&self) -> Value {
        let show = |e: &Option<Expr>| {
            e.as_ref()
                .map_or("undefined".to_string(), |e| e.to_string())
        };
        let mut v = json!({
            "case": self.case,
            "quantity": self.quantity,
            "paper_value": self.paper_value.to_string(),
            "derived_value": show(&self.derived_value),
            "compared_against": self.compared_against.name(),
            "verdict": self.verdict.name(),
            "probe": { "count": self.probes, "seed": self.seed, "tol": num(self.tol) },
        });
        let obj = v.as_object_mut().expect("object");
        if let Some(pf) = &self.paper_form_value {
            obj.insert("paper_form_value".into(), Value::from(pf.to_string()));
        }
        if !self.readings.is_empty() {
            let r: Vec<Value> = self
                .readings
                .iter()
                .map(
                    |r| json!({ "name": r.name, "value": r.value.to_string(), "agrees": r.agrees }),
                )
                .collect();
            obj.insert("readings".into(), Value::from(r));
        }
        match &self.verdict {
            ReportVerdict::Match => {}
            ReportVerdict::Mismatch { max_rel_deviation } => {
                obj.insert("max_rel_deviation".into(), num(*max_rel_deviation));
            }
            ReportVerdict::PaperInternalConflict {
                max_rel_deviation,
                note,
            } => {
                obj.insert("max_rel_deviation".into(), num(*max_rel_deviation));
                obj.insert("note".into(), Value::from(note.clone()));
            }
        }
        v
    }

    pub fn text_line(&self) -> String {
        let target = match self.compared_against {
            Pipeline::Derived => self.derived_value.as_ref(),
            Pipeline::PaperForm => self.paper_form_value.as_ref(),
        };
        let shown = target.map_or("undefined".to_string(), |e| e.to_string());
        format!(
            "{:<24} {:<24} {:<24} printed {}  {} {}",
            self.case,
            self.quantity,
            self.verdict.name(),
            self.paper_value,
            self.compared_against.name(),
            shown
        )
    }
}

/// Lazily computed quantities of one case.
struct Context {
    b: MetricBundle,
    conn: Connection,
    stress: OnceCell<Result<Tensor>>,
    fluid: OnceCell<Result<FluidState>>,
    closed: OnceCell<Result<FluidState>>,
    sigma_over_g: OnceCell<Result<Expr>>,
}

fn shared<T: Clone>(r: &Result<T>) -> Result<T> {
    match r {
        Ok(v) => Ok(v.clone()),
        Err(e) => Err(Error::Capability(e.to_string())),
    }
}

impl Context {
    fn new(b: MetricBundle) -> Result<Self> {
        let conn = christoffel(&b)?;
        Ok(Self {
            b,
            conn,
            stress: OnceCell::new(),
            fluid: OnceCell::new(),
            closed: OnceCell::new(),
            sigma_over_g: OnceCell::new(),
        })
    }

    fn stress(&self) -> Result<Tensor> {
        shared(
            self.stress
                .get_or_init(|| stress_energy(&self.b, &self.conn)),
        )
    }

    fn fluid(&self) -> Result<FluidState> {
        shared(self.fluid.get_or_init(|| {
            let u = Velocity::comoving(&self.b)?;
            fluid_decompose(&self.b, &self.stress()?, &u)
        }))
    }

    fn closed(&self) -> Result<FluidState> {
        shared(self.closed.get_or_init(|| comoving_closed_forms(&self.b)))
    }

    fn sigma_over_g(&self) -> Result<Expr> {
        shared(self.sigma_over_g.get_or_init(|| {
            let shape = AnsatzShape::of(&self.b)?;
            Ok((shape.sigma(&self.b.coords[0]) / self.b.det.clone()).simplify())
        }))
    }

    /// `(derived, paper_form)` values of a quantity.
    fn values(&self, quantity: &str) -> Result<(Option<Expr>, Option<Expr>)> {
        let (name, idx) = parse_quantity(quantity)?;
        let b = &self.b;
        let c = &self.conn;
        let entry = |t: &Tensor, rank: usize| -> Result<Expr> {
            if idx.len() != rank || idx.iter().any(|&i| i >= b.dim) {
                return Err(Error::Manifest(format!("bad index in {quantity:?}")));
            }
            Ok(t.get(&idx).clone())
        };
        let scaled = |k: Expr| -> Result<Expr> { Ok((k * self.sigma_over_g()?).simplify()) };
        Ok(match name {
            "gsym" => (Some(entry(&b.gsym, 2)?), None),
            "galt" => (Some(entry(&b.galt, 2)?), None),
            "det" => (Some(b.det.clone()), None),
            "gamma_first_alt" => (Some(entry(&c.gamma_first_alt, 3)?), None),
            "gamma_alt" => (Some(entry(&c.gamma_alt, 3)?), None),
            "gamma_gamma" => {
                let gg = gamma_gamma(b, c);
                (Some(entry(&gg, 2)?), None)
            }
            "torsion_square" => (Some(entry(&torsion_square(b, c), 2)?), None),
            "torsion_invariant" => (
                Some(torsion_invariant(b, c)?),
                Some(torsion_invariant_closed_form(b)?),
            ),
            "scalar_shift" => {
                let r = metric_trace(b, &riemann(b, c).contract(0, 3)?);
                let shift = (scalar(b, c, 0)? - r).simplify();
                (Some(shift), Some(scaled(Expr::ratio(-3, 2))?))
            }
            "trace" => (
                Some(stress_trace(b, &self.stress()?)?),
                Some(scaled(Expr::int(2))?),
            ),
            "stress" => {
                let derived = entry(&self.stress()?, 2)?;
                let paper_form = if idx == [0, 0] {
                    self.closed()?.rho
                } else {
                    let tt = torsion_square(b, c);
                    (Expr::ratio(-3, 2) * self.sigma_over_g()? * b.gsym.get(&idx).clone()
                        + Expr::ratio(-4, 3) * tt.get(&idx).clone())
                    .simplify()
                };
                (Some(derived), Some(paper_form))
            }
            "rho" => (Some(self.fluid()?.rho), Some(self.closed()?.rho)),
            "p" => (Some(self.fluid()?.p), Some(self.closed()?.p)),
            "q" => (
                Some(entry(&self.fluid()?.q, 1)?),
                Some(entry(&self.closed()?.q, 1)?),
            ),
            "omega" => (
                self.fluid()?.omega.as_expr(),
                self.closed()?.omega.as_expr(),
            ),
            _ => return Err(Error::Manifest(format!("unknown quantity {quantity:?}"))),
        })
    }
}

/// `Γ^γ_{∨iδ} Γ^δ_{∨jγ}`.
fn gamma_gamma(b: &MetricBundle, c: &Connection) -> Tensor {
    let n = b.dim;
    let ga = &c.gamma_alt;
    Tensor::from_fn(n, &valence::DD, |ix| {
        let mut terms = Vec::new();
        for g in 0..n {
            for d in 0..n {
                terms.push(ga.get(&[g, ix[0], d]).clone() * ga.get(&[d, ix[1], g]).clone());
            }
        }
        Expr::sum(terms).simplify()
    })
}

fn parse_quantity(q: &str) -> Result<(&str, Vec<usize>)> {
    let bad = || Error::Manifest(format!("malformed quantity {q:?}"));
    match q.split_once('[') {
        None => Ok((q, Vec::new())),
        Some((name, rest)) => {
            let inner = rest.strip_suffix(']').ok_or_else(bad)?;
            let idx = inner
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            Ok((name, idx))
        }
    }
}

/// Largest `|a - b| / max(|a|, |b|)` over the probes that evaluate.
fn max_rel_deviation(a: &Expr, b: &Expr, cfg: &ProbeConfig) -> f64 {
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    let mut worst: f64 = 0.0;
    for (_, bind) in cfg.binding_sets(&atoms) {
        if let (Ok(x), Ok(y)) = (evaluate(a, &bind), evaluate(b, &bind)) {
            let scale = x.abs().max(y.abs());
            if scale > 0.0 {
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    worst
}

/// Exact comparison for two constants, probe equality otherwise.
fn agrees(a: &Expr, b: &Expr, cfg: &ProbeConfig) -> bool {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => x == y,
        _ => crate::expr::equivalent(a, b, cfg).is_equal(),
    }
}

fn report_entry(
    case: &str,
    ctx: &Context,
    e: &ManifestEntry,
    cfg: &ProbeConfig,
) -> Result<CaseReport> {
    let printed = parse(&e.printed)
        .map_err(|err| Error::Manifest(format!("{case}/{}: {err}", e.quantity)))?
        .simplify();
    let (derived, paper_form) = ctx.values(&e.quantity)?;
    let target = match e.compare {
        Pipeline::Derived => derived.clone(),
        Pipeline::PaperForm => paper_form.clone(),
    };
    let readings = e
        .readings
        .iter()
        .map(|(name, src)| {
            let value = parse(src)
                .map_err(|err| Error::Manifest(format!("{case}/{}: {err}", e.quantity)))?
                .simplify();
            let ok = target.as_ref().is_some_and(|t| agrees(&value, t, cfg));
            Ok(Reading {
                name: name.clone(),
                value,
                agrees: ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = match &target {
        Some(t) if agrees(&printed, t, cfg) => ReportVerdict::Match,
        _ => {
            let dev = target
                .as_ref()
                .map_or(f64::INFINITY, |t| max_rel_deviation(&printed, t, cfg));
            match &e.conflict {
                Some(note) => ReportVerdict::PaperInternalConflict {
                    max_rel_deviation: dev,
                    note: note.clone(),
                },
                None => ReportVerdict::Mismatch {
                    max_rel_deviation: dev,
                },
            }
        }
    };
    Ok(CaseReport {
        case: case.to_string(),
        quantity: e.quantity.clone(),
        paper_value: printed,
        derived_value: derived,
        paper_form_value: paper_form,
        compared_against: e.compare,
        readings,
        verdict,
        probes: cfg.probes,
        seed: cfg.seed,
        tol: cfg.tol,
    })
}

/// One report per printed quantity of a case, in manifest order.
pub fn reproduce(case: &str) -> Result<Vec<CaseReport>> {
    let preset = Preset::from_id(case).map_err(|_| Error::UnknownCase(case.to_string()))?;
    let m = manifest()?;
    let entries = m
        .cases
        .get(case)
        .ok_or_else(|| Error::UnknownCase(case.to_string()))?;
    let ctx = Context::new(preset.bundle()?)?;
    let cfg = preset.probe_config();
    entries
        .iter()
        .map(|e| report_entry(case, &ctx, e, &cfg))
        .collect()
}

/// Every case, computed in parallel, in preset order.
pub fn reproduce_all() -> Result<Vec<CaseReport>> {
    let per_case: Vec<Result<Vec<CaseReport>>> =
        Preset::ALL.par_iter().map(|p| reproduce(p.id())).collect();
    let mut out = Vec::new();
    for r in per_case {
        out.extend(r?);
    }
    Ok(out)
}
