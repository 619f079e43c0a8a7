//! Command-line front end for the `gtorsion` library.

use std::collections::BTreeSet;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use gtorsion::cosmofluid::{
    einstein_residual, fluid_decompose, lagrangian_density, stress_energy, stress_trace,
    torsion_invariant, FluidState,
};
use gtorsion::expr::{evaluate, parse, seed_from_env, Atom, Bindings, Expr, Rational};
use gtorsion::geometry::{
    christoffel, curvature_family, curvature_kind, metric_trace, ricci, ricci_family, riemann,
    scalar, FamilyCoeffs, MetricBundle,
};
use gtorsion::io::{format_g, tensor_json, tensor_text, to_canonical_string, MetricSpec};
use gtorsion::paperlab::{
    fd_variation_check, preset_bindings, random_point_bindings, reproduce, reproduce_all, Preset,
    ReportVerdict,
};
use gtorsion::tensor::Tensor;
use gtorsion::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MATH: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "gtorsion",
    version,
    about = "Tensor calculus for non-symmetric metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive a quantity from a metric spec.
    Derive {
        /// Spec file, or `preset:<id>`.
        spec: String,
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// Curvature kind for curvature, ricci and scalar.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=5))]
        kind: Option<u8>,
        /// Family coefficients `u,u',v,v',w`; overrides `--kind`.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Run one more simplification pass over the result.
        #[arg(long)]
        simplify: bool,
    },
    /// Compare printed values with the derived ones.
    CheckPaper {
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Finite-difference check of the metric variation of the torsion scalar.
    FdCheck {
        spec: String,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        beta: usize,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        /// Point and function bindings `k=v,...`; presets are bound automatically.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Evaluate a derived quantity numerically.
    Eval {
        spec: String,
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=5))]
        kind: Option<u8>,
        #[arg(long)]
        coeffs: Option<String>,
        /// `k=v,...`: metric functions take a closed form in the time
        /// coordinate, other symbols a number.
        #[arg(long)]
        bind: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Split,
    Christoffel,
    ChristoffelFirst,
    Torsion,
    Riemann,
    Curvature,
    Ricci,
    Scalar,
    StressEnergy,
    Trace,
    Fluid,
    Residual,
    Lagrangian,
    TorsionInvariant,
}

enum Derived {
    Scalar(Expr),
    Tensor(Tensor),
    Split { sym: Tensor, alt: Tensor },
    Fluid(Box<FluidState>),
}

/// Failure of a command, carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() || matches!(e, Error::Eval(_) | Error::BindingGap(_)) {
            EXIT_USAGE
        } else {
            EXIT_MATH
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Runs the CLI with `argv` (program name first), writing to the given streams.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Derive {
            spec,
            quantity,
            kind,
            coeffs,
            format,
            simplify,
        } => {
            let spec = load_spec(&spec)?;
            let coeffs = family(kind, coeffs.as_deref())?;
            let mut d = derive(&spec, quantity, &coeffs)?;
            if simplify {
                d = resimplify(d);
            }
            let text = match format {
                Format::Text => derived_text(&d),
                Format::Json => to_canonical_string(&derived_json(&d)),
            };
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::CheckPaper { case, json } => check_paper(case.as_deref(), json, out),
        Command::FdCheck {
            spec,
            alpha,
            beta,
            step,
            bind,
        } => {
            let (spec, preset) = load_spec_and_preset(&spec)?;
            let b = spec.bundle()?;
            let mut bindings = match preset {
                Some(p) => preset_bindings(p, seed_from_env(), 1).remove(0),
                None => random_point_bindings(b.dim, seed_from_env(), 1).remove(0),
            };
            if let Some(src) = bind {
                apply_bindings(&mut bindings, &src, &b)?;
            }
            let r = fd_variation_check(&b, &bindings, alpha, beta, step)?;
            let v = json!({
                "alpha": r.alpha,
                "beta": r.beta,
                "h": num(r.h),
                "fd_value": num(r.fd_value),
                "analytic_value": num(r.analytic_value),
                "global_sign": r.global_sign,
                "abs_err": num(r.abs_err),
                "rel_err": num(r.rel_err),
            });
            emit(out, &to_canonical_string(&v))?;
            Ok(EXIT_OK)
        }
        Command::Eval {
            spec,
            quantity,
            kind,
            coeffs,
            bind,
        } => {
            let spec = load_spec(&spec)?;
            let b = spec.bundle()?;
            let coeffs = family(kind, coeffs.as_deref())?;
            let d = derive(&spec, quantity, &coeffs)?;
            let mut bindings = Bindings::new();
            apply_bindings(&mut bindings, &bind, &b)?;
            let v = eval_json(&d, &bindings)?;
            emit(out, &to_canonical_string(&v))?;
            Ok(EXIT_OK)
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure {
        code: EXIT_MATH,
        message: format!("write failed: {e}"),
    })
}

fn num(x: f64) -> Value {
    format_g(x)
        .parse::<f64>()
        .map(Value::from)
        .unwrap_or(Value::Null)
}

fn load_spec_and_preset(arg: &str) -> std::result::Result<(MetricSpec, Option<Preset>), Failure> {
    if let Some(id) = arg.strip_prefix("preset:") {
        let p = Preset::from_id(id)?;
        return Ok((p.spec(), Some(p)));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| usage(format!("{arg}: {e}")))?;
    Ok((MetricSpec::from_json(&text)?, None))
}

fn load_spec(arg: &str) -> std::result::Result<MetricSpec, Failure> {
    Ok(load_spec_and_preset(arg)?.0)
}

fn family(kind: Option<u8>, coeffs: Option<&str>) -> std::result::Result<FamilyCoeffs, Failure> {
    let Some(src) = coeffs else {
        return Ok(FamilyCoeffs::kind(kind.unwrap_or(0) as usize)?);
    };
    let parts: Vec<&str> = src.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(usage(format!(
            "--coeffs expects 5 values, got {}",
            parts.len()
        )));
    }
    let mut c = [Rational::from_integer(0); 5];
    for (slot, p) in c.iter_mut().zip(&parts) {
        *slot = parse(p)?
            .simplify()
            .as_const()
            .ok_or_else(|| usage(format!("--coeffs: {p:?} is not a rational constant")))?;
    }
    Ok(FamilyCoeffs::new(c[0], c[1], c[2], c[3], c[4]))
}

fn derive(
    spec: &MetricSpec,
    q: Quantity,
    coeffs: &FamilyCoeffs,
) -> std::result::Result<Derived, Failure> {
    let b = spec.bundle()?;
    if q == Quantity::Split {
        return Ok(Derived::Split {
            sym: b.gsym.clone(),
            alt: b.galt.clone(),
        });
    }
    let c = christoffel(&b)?;
    let kind = kind_of(coeffs);
    Ok(match q {
        Quantity::Split => unreachable!("handled above"),
        Quantity::Christoffel => Derived::Tensor(c.gamma.clone()),
        Quantity::ChristoffelFirst => Derived::Tensor(c.gamma_first.clone()),
        Quantity::Torsion => Derived::Tensor(c.torsion.clone()),
        Quantity::Riemann => Derived::Tensor(riemann(&b, &c)),
        Quantity::Curvature => Derived::Tensor(match kind {
            Some(k) => curvature_kind(k, &b, &c)?,
            None => curvature_family(&b, &c, coeffs),
        }),
        Quantity::Ricci => Derived::Tensor(match kind {
            Some(k) => ricci(&b, &c, k)?,
            None => ricci_family(&b, &c, coeffs)?,
        }),
        Quantity::Scalar => Derived::Scalar(match kind {
            Some(k) => scalar(&b, &c, k)?,
            None => metric_trace(&b, &ricci_family(&b, &c, coeffs)?).simplify(),
        }),
        Quantity::StressEnergy => Derived::Tensor(stress_energy(&b, &c)?),
        Quantity::Trace => Derived::Scalar(stress_trace(&b, &stress_energy(&b, &c)?)?),
        Quantity::Fluid => {
            let u = spec.velocity(&b)?;
            Derived::Fluid(Box::new(fluid_decompose(&b, &stress_energy(&b, &c)?, &u)?))
        }
        Quantity::Residual => Derived::Tensor(einstein_residual(&b, &c, &spec.kappa()?)?),
        Quantity::Lagrangian => Derived::Scalar(lagrangian_density(&b, &c, &spec.kappa()?)?),
        Quantity::TorsionInvariant => Derived::Scalar(torsion_invariant(&b, &c)?),
    })
}

/// The named kind whose coefficients these are, if any.
fn kind_of(c: &FamilyCoeffs) -> Option<usize> {
    (0..6).find(|&k| FamilyCoeffs::kind(k).is_ok_and(|f| f.as_array() == c.as_array()))
}

fn resimplify(d: Derived) -> Derived {
    match d {
        Derived::Scalar(e) => Derived::Scalar(e.simplify()),
        Derived::Tensor(t) => Derived::Tensor(t.simplified()),
        Derived::Split { sym, alt } => Derived::Split {
            sym: sym.simplified(),
            alt: alt.simplified(),
        },
        Derived::Fluid(f) => Derived::Fluid(f),
    }
}

fn derived_text(d: &Derived) -> String {
    match d {
        Derived::Scalar(e) => e.to_string(),
        Derived::Tensor(t) => tensor_text(t),
        Derived::Split { sym, alt } => format!(
            "symmetric:\n{}\nantisymmetric:\n{}",
            tensor_text(sym),
            tensor_text(alt)
        ),
        Derived::Fluid(f) => {
            let mut lines = vec![
                format!("eps = {}", f.eps),
                format!("rho = {}", f.rho),
                format!("p = {}", f.p),
                format!("omega = {}", f.omega),
                format!("q:\n{}", tensor_text(&f.q)),
            ];
            if let Some(a) = &f.aniso {
                lines.push(format!("anisotropic:\n{}", tensor_text(a)));
            }
            lines.join("\n")
        }
    }
}

fn derived_json(d: &Derived) -> Value {
    match d {
        Derived::Scalar(e) => json!({ "value": e.to_string() }),
        Derived::Tensor(t) => tensor_json(t),
        Derived::Split { sym, alt } => {
            json!({ "symmetric": tensor_json(sym), "antisymmetric": tensor_json(alt) })
        }
        Derived::Fluid(f) => {
            let mut m = Map::new();
            m.insert("eps".into(), json!(f.eps));
            m.insert("rho".into(), json!(f.rho.to_string()));
            m.insert("p".into(), json!(f.p.to_string()));
            m.insert("omega".into(), json!(f.omega.to_string()));
            m.insert("q".into(), tensor_json(&f.q));
            if let Some(pi) = &f.pi {
                m.insert("pi".into(), tensor_json(pi));
            }
            if let Some(a) = &f.aniso {
                m.insert("anisotropic".into(), tensor_json(a));
            }
            Value::Object(m)
        }
    }
}

fn eval_expr(e: &Expr, b: &Bindings) -> std::result::Result<Value, Failure> {
    Ok(num(evaluate(e, b).map_err(Error::from)?))
}

fn eval_tensor(t: &Tensor, b: &Bindings) -> std::result::Result<Value, Failure> {
    let mut comps = Vec::new();
    for (ix, e) in t.nonzero() {
        comps.push(json!({ "index": ix, "value": eval_expr(e, b)? }));
    }
    Ok(json!({
        "dim": t.dim(),
        "valence": t.valence().iter().map(|v| v.name()).collect::<Vec<_>>(),
        "components": comps,
    }))
}

fn eval_json(d: &Derived, b: &Bindings) -> std::result::Result<Value, Failure> {
    Ok(match d {
        Derived::Scalar(e) => json!({ "value": eval_expr(e, b)? }),
        Derived::Tensor(t) => eval_tensor(t, b)?,
        Derived::Split { sym, alt } => {
            json!({ "symmetric": eval_tensor(sym, b)?, "antisymmetric": eval_tensor(alt, b)? })
        }
        Derived::Fluid(f) => {
            let omega = match f.omega.as_expr() {
                Some(e) => eval_expr(&e, b)?,
                None => Value::Null,
            };
            json!({
                "eps": f.eps,
                "rho": eval_expr(&f.rho, b)?,
                "p": eval_expr(&f.p, b)?,
                "omega": omega,
                "q": eval_tensor(&f.q, b)?,
            })
        }
    })
}

/// `k=v` pairs. Functions of the metric are bound to `v` as a closed form in
/// the first coordinate; other keys must be numbers and bind symbols.
fn apply_bindings(
    bindings: &mut Bindings,
    src: &str,
    b: &MetricBundle,
) -> std::result::Result<(), Failure> {
    let functions: BTreeSet<String> =
        b.g.components()
            .iter()
            .flat_map(|e| e.atoms())
            .filter_map(|a| match a {
                Atom::Function(name, _) => Some(name.as_str().to_string()),
                Atom::Symbol(_) => None,
            })
            .collect();
    for pair in src.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("--bind: expected k=v, got {pair:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if functions.contains(k) {
            bindings.set_closed_form(k, &b.coords[0], parse(v)?);
        } else {
            let x = v.parse::<f64>().map_err(|_| {
                usage(format!(
                    "--bind: {k} is not a function of the metric, expected a number"
                ))
            })?;
            bindings.set_symbol(k, x);
        }
    }
    Ok(())
}

fn check_paper(case: Option<&str>, as_json: bool, out: &mut dyn Write) -> CmdResult {
    let reports = match case {
        Some(c) => reproduce(c)?,
        None => reproduce_all()?,
    };
    let count = |name: &str| reports.iter().filter(|r| r.verdict.name() == name).count();
    let mismatches = reports
        .iter()
        .filter(|r| matches!(r.verdict, ReportVerdict::Mismatch { .. }))
        .count();
    let text = if as_json {
        to_canonical_string(&json!({
            "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "summary": {
                "match": count("match"),
                "paper_internal_conflict": count("paper_internal_conflict"),
                "mismatch": mismatches,
            },
        }))
    } else {
        let mut lines: Vec<String> = reports.iter().map(|r| r.text_line()).collect();
        lines.push(format!(
            "{} match, {} paper_internal_conflict, {} mismatch",
            count("match"),
            count("paper_internal_conflict"),
            mismatches
        ));
        lines.join("\n")
    };
    emit(out, &text)?;
    Ok(if mismatches > 0 {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    })
}
