//! JSON metric specs and tensor serialisation.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cosmofluid::Velocity;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Symbol};
use crate::geometry::{bundle, MetricBundle};
use crate::tensor::Tensor;

fn default_kappa() -> String {
    "kappa".to_string()
}

/// Observer velocity of a spec: comoving, or contravariant components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Comoving,
    Components(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub dimension: usize,
    /// The first coordinate is time.
    pub coordinates: Vec<String>,
    pub entries: Vec<Vec<String>>,
    #[serde(default = "default_kappa")]
    pub kappa: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Frame>,
}

fn spec_err(path: impl Into<String>, message: impl std::fmt::Display) -> Error {
    Error::Spec {
        path: path.into(),
        message: message.to_string(),
    }
}

impl MetricSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            spec_err(
                if path == "." { "$".to_string() } else { path },
                e.into_inner(),
            )
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    pub fn coordinate_symbols(&self) -> Result<Vec<Symbol>> {
        let mut out: Vec<Symbol> = Vec::with_capacity(self.coordinates.len());
        for (k, name) in self.coordinates.iter().enumerate() {
            let path = format!("coordinates[{k}]");
            let s = Symbol::new(name).map_err(|e| spec_err(&path, e))?;
            if out.contains(&s) {
                return Err(spec_err(path, format!("duplicate coordinate {name:?}")));
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Parses and validates every entry, reporting the offending field path.
    pub fn metric(&self) -> Result<Tensor> {
        let n = self.dimension;
        if n == 0 {
            return Err(spec_err("dimension", "must be positive"));
        }
        if self.coordinates.len() != n {
            return Err(spec_err(
                "coordinates",
                format!("expected {n} names, got {}", self.coordinates.len()),
            ));
        }
        if self.entries.len() != n {
            return Err(spec_err(
                "entries",
                format!("expected {n} rows, got {}", self.entries.len()),
            ));
        }
        let mut comps = Vec::with_capacity(n * n);
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != n {
                return Err(spec_err(
                    format!("entries[{i}]"),
                    format!("expected {n} entries, got {}", row.len()),
                ));
            }
            for (j, src) in row.iter().enumerate() {
                comps.push(parse(src).map_err(|e| spec_err(format!("entries[{i}][{j}]"), e))?);
            }
        }
        Tensor::new(n, &crate::tensor::valence::DD, comps)
    }

    pub fn bundle(&self) -> Result<MetricBundle> {
        let coords = self.coordinate_symbols()?;
        bundle(self.metric()?, coords)
    }

    pub fn kappa(&self) -> Result<Expr> {
        parse(&self.kappa).map_err(|e| spec_err("kappa", e))
    }

    /// The spec's velocity, comoving when no frame is given.
    pub fn velocity(&self, b: &MetricBundle) -> Result<Velocity> {
        match &self.frame {
            None | Some(Frame::Comoving) => Velocity::comoving(b),
            Some(Frame::Components(cs)) => {
                let mut comps = Vec::with_capacity(cs.len());
                for (k, src) in cs.iter().enumerate() {
                    comps.push(
                        parse(src).map_err(|e| spec_err(format!("frame.components[{k}]"), e))?,
                    );
                }
                if comps.len() != b.dim {
                    return Err(spec_err(
                        "frame.components",
                        format!("expected {} components, got {}", b.dim, comps.len()),
                    ));
                }
                Velocity::from_components(b, comps)
            }
        }
    }
}

/// `{"dim", "valence", "components": [{"index", "value"}]}` with only the
/// nonzero entries, in lexicographic index order.
pub fn tensor_json(t: &Tensor) -> Value {
    let components: Vec<Value> = t
        .nonzero()
        .into_iter()
        .map(|(ix, e)| json!({ "index": ix, "value": e.to_string() }))
        .collect();
    json!({
        "dim": t.dim(),
        "valence": t.valence().iter().map(|v| v.name()).collect::<Vec<_>>(),
        "components": components,
    })
}

/// One `index = value` line per nonzero entry, or `0` for the zero tensor.
pub fn tensor_text(t: &Tensor) -> String {
    let nz = t.nonzero();
    if t.rank() == 0 {
        return t.as_scalar().expect("rank 0").to_string();
    }
    if nz.is_empty() {
        return "0".to_string();
    }
    nz.iter()
        .map(|(ix, e)| {
            let idx: Vec<String> = ix.iter().map(|i| i.to_string()).collect();
            format!("[{}] = {e}", idx.join(","))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// C-style `%.12g`.
pub fn format_g(x: f64) -> String {
    const P: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Serialises with sorted keys and two-space indentation.
pub fn to_canonical_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serialises")
}
