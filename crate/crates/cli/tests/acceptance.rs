//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use gtorsion::cosmofluid::{
    comoving_closed_forms, fluid_decompose, reconstruct, torsion_invariant,
    torsion_invariant_closed_form, Omega, Velocity,
};
use gtorsion::expr::{equivalent, evaluate, Expr, ProbeConfig, Rational};
use gtorsion::geometry::{
    christoffel, cov_deriv, curvature_kind, metric_trace, ricci, ricci_closed_form, ricci_family,
    ricci_printed, riemann, scalar, scalar_printed, trace_identities, FamilyCoeffs, MetricBundle,
};
use gtorsion::paperlab::{
    compare_with_oracle, fd_variation_check, fd_variation_run, preset_bindings, random_metric,
    Preset, RandomMetric,
};
use gtorsion::tensor::{valence, Tensor};
use gtorsion::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn cfg(probes: usize, tol: f64) -> ProbeConfig {
    ProbeConfig::new(probes, tol)
}

fn preset_cfg(p: Preset, probes: usize, tol: f64) -> ProbeConfig {
    let mut c = p.probe_config();
    c.probes = probes;
    c.tol = tol;
    c
}

fn tensors_equal(a: &Tensor, b: &Tensor, cfg: &ProbeConfig) -> Result<bool> {
    Ok(a.probe_equal(b, cfg)?.is_equal())
}

fn seeded_metrics(count: usize, salt: u64, shape: &RandomMetric) -> Vec<MetricBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(gtorsion::expr::seed_from_env() ^ salt);
    (0..count)
        .map(|_| {
            random_metric(rng.random(), shape)
                .bundle()
                .expect("random metric")
        })
        .collect()
}

fn c01_scalar_shift() -> Result<Outcome> {
    let start = Instant::now();
    let p = Preset::AnsatzGeneral;
    let b = p.bundle()?;
    let c = christoffel(&b)?;
    let r = metric_trace(&b, &riemann(&b, &c).contract(0, 3)?);
    let shift = (scalar(&b, &c, 0)? - r).simplify();
    let sigma = gtorsion::paperlab::ansatz_sigma();
    let expected = (Expr::ratio(-3, 2) * b.det.clone().recip() * sigma).simplify();
    let eq = equivalent(&shift, &expected, &preset_cfg(p, 16, 1e-9)).is_equal();
    let elapsed = start.elapsed();
    outcome(
        eq && elapsed < Duration::from_secs(5),
        format!("probe-equal {eq}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn c02_omega_exact() -> Result<Outcome> {
    let mut notes = Vec::new();
    let mut pass = true;
    for p in [
        Preset::FriedmannN3,
        Preset::FriedmannN2,
        Preset::BianchiI,
        Preset::Flrw,
    ] {
        let w = comoving_closed_forms(&p.bundle()?)?.omega;
        pass &= w == Omega::Exact(Rational::new(13, 75));
        notes.push(format!("{} {w}", p.id()));
    }
    outcome(pass, notes.join(", "))
}

fn c03_torsion_invariant() -> Result<Outcome> {
    let mut failed = Vec::new();
    for p in Preset::ALL {
        let b = p.bundle()?;
        let c = christoffel(&b)?;
        let direct = torsion_invariant(&b, &c)?;
        let closed = torsion_invariant_closed_form(&b)?;
        if !equivalent(&direct, &closed, &preset_cfg(p, 16, 1e-9)).is_equal() {
            failed.push(p.id());
        }
    }
    outcome(
        failed.is_empty(),
        format!("{} presets, failing {failed:?}", Preset::ALL.len()),
    )
}

fn c04_torsion_antisymmetry() -> Result<Outcome> {
    let b = Preset::AnsatzGeneral.bundle()?;
    let tl = christoffel(&b)?.torsion_lower;
    let exact = [[0, 2, 1], [1, 0, 2], [2, 1, 0]].iter().all(|perm| {
        let sum = tl.add(&tl.permute(perm).expect("perm")).expect("shape");
        sum.components().iter().all(|e| e.simplify().is_zero())
    });
    let mut random_ok = 0;
    let metrics = seeded_metrics(100, 4, &RandomMetric::new(4).sym_offdiag(2));
    let zero = Tensor::zeros(4, &valence::DDD);
    for m in &metrics {
        let tl = christoffel(m)?.torsion_lower;
        let all = [[0, 2, 1], [1, 0, 2], [2, 1, 0]]
            .iter()
            .map(|perm| tensors_equal(&tl.add(&tl.permute(perm)?)?, &zero, &cfg(16, 1e-9)))
            .collect::<Result<Vec<_>>>()?;
        if all.iter().all(|&x| x) {
            random_ok += 1;
        }
    }
    outcome(
        exact && random_ok == metrics.len(),
        format!(
            "ansatz exact zero {exact}, random {random_ok}/{}",
            metrics.len()
        ),
    )
}

fn c05_zero_torsion_collapse() -> Result<Outcome> {
    let metrics = seeded_metrics(20, 5, &RandomMetric::new(4).symmetric().sym_offdiag(2));
    let mut ok = 0;
    for b in &metrics {
        let c = christoffel(b)?;
        let r = riemann(b, &c);
        let s0 = scalar(b, &c, 0)?;
        let mut good = c.torsion.is_zero();
        for k in 0..6 {
            good &= tensors_equal(&curvature_kind(k, b, &c)?, &r, &cfg(16, 1e-9))?;
            good &= equivalent(&scalar(b, &c, k)?, &s0, &cfg(16, 1e-9)).is_equal();
        }
        ok += good as usize;
    }
    outcome(
        ok == metrics.len(),
        format!("{ok}/{} symmetric metrics", metrics.len()),
    )
}

fn c06_family_tables() -> Result<Outcome> {
    let metrics = seeded_metrics(3, 6, &RandomMetric::new(4).sym_offdiag(1));
    let mut bad = std::collections::BTreeSet::new();
    for b in &metrics {
        let c = christoffel(b)?;
        for k in 0..6 {
            let f = FamilyCoeffs::kind(k)?;
            let fam = ricci_family(b, &c, &f)?;
            let ok = tensors_equal(&fam, &ricci_closed_form(b, &c, &f)?, &cfg(16, 1e-9))?
                && tensors_equal(&ricci_printed(b, &c, k)?, &ricci(b, &c, k)?, &cfg(16, 1e-9))?
                && equivalent(
                    &scalar_printed(b, &c, k)?,
                    &scalar(b, &c, k)?,
                    &cfg(16, 1e-9),
                )
                .is_equal();
            if !ok {
                bad.insert(k);
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("kinds failing the printed tables: {bad:?}"),
    )
}

fn c07_trace_identities() -> Result<Outcome> {
    let mut alt_zero = true;
    let mut literal_ok = Vec::new();
    let mut consistent_ok = true;
    let mut cases: Vec<(String, MetricBundle, ProbeConfig)> = Preset::ALL
        .iter()
        .map(|p| Ok((p.id().to_string(), p.bundle()?, preset_cfg(*p, 16, 1e-9))))
        .collect::<Result<_>>()?;
    for (k, b) in seeded_metrics(3, 7, &RandomMetric::new(4))
        .into_iter()
        .enumerate()
    {
        cases.push((format!("random{k}"), b, cfg(16, 1e-9)));
    }
    for (name, b, pc) in &cases {
        let c = christoffel(b)?;
        let ti = trace_identities(b, &c)?;
        alt_zero &= ti.alt_trace.components().iter().all(Expr::is_zero);
        consistent_ok &= tensors_equal(&ti.sym_trace, &ti.consistent, pc)?;
        if tensors_equal(&ti.sym_trace, &ti.literal, pc)? {
            literal_ok.push(name.clone());
        }
    }
    let detail = format!(
        "alt trace literal 0 {alt_zero}; d|g|/(2g) holds on {}/{} {literal_ok:?} (g < 0 throughout, so it holds only where the trace vanishes); d|g|/(2|g|) holds everywhere {consistent_ok}",
        literal_ok.len(),
        cases.len()
    );
    outcome(alt_zero && literal_ok.len() == cases.len(), detail)
}

fn c08_metricity() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for p in Preset::ALL {
        let b = p.bundle()?;
        let c = christoffel(&b)?;
        let d = cov_deriv(&b.gsym, &b, &c);
        for (_, bind) in p
            .probe_config()
            .binding_sets(&d.components().iter().flat_map(|e| e.atoms()).collect())
        {
            for e in d.components() {
                worst = worst.max(evaluate(e, &bind)?.abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max |nabla g| = {worst:e}"))
}

fn c09_reconstruction() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(gtorsion::expr::seed_from_env() ^ 9);
    let metrics = seeded_metrics(20, 9, &RandomMetric::new(4).symmetric().sym_offdiag(1));
    let vars = ["t", "x1", "x2", "x3"];
    let mut ok = 0;
    let mut total = 0;
    for b in &metrics {
        let mut upper = Vec::new();
        for _ in 0..16 {
            let c: i64 = rng.random_range(-3..=3);
            let v = vars[rng.random_range(0..4)];
            let k: i64 = rng.random_range(0..=2);
            upper.push(
                (Expr::int(c) * Expr::powi(Expr::var(v), k)
                    + Expr::ratio(rng.random_range(1..5), 3))
                .simplify(),
            );
        }
        let t = Tensor::from_fn(4, &valence::DD, |ix| {
            upper[4 * ix[0].min(ix[1]) + ix[0].max(ix[1])].clone()
        });
        for axis in [0usize, 1] {
            let comps = (0..4)
                .map(|i| if i == axis { Expr::one() } else { Expr::zero() })
                .collect();
            let u = Velocity::from_components(b, comps)?;
            let st = fluid_decompose(b, &t, &u)?;
            total += 1;
            if u.eps == if axis == 0 { -1 } else { 1 }
                && tensors_equal(&reconstruct(&st, &u)?, &t, &cfg(16, 1e-9))?
            {
                ok += 1;
            }
        }
    }
    outcome(
        ok == total,
        format!("{ok}/{total} decompositions (eps -1 and +1)"),
    )
}

fn c10_fd_variation() -> Result<Outcome> {
    let p = Preset::AnsatzGeneral;
    let b = p.bundle()?;
    let bind = &preset_bindings(p, gtorsion::expr::seed_from_env(), 1)[0];
    let run = fd_variation_run(&b, bind, 1e-4)?;
    let max = run.max_rel_err();
    let halving = run.halving_reduces_error();
    // Per-pair best signs must agree with the global one wherever the pair is coupled.
    let mut consistent = true;
    for r in &run.at_h {
        if r.analytic_value.abs() > 1e-9 {
            consistent &=
                fd_variation_check(&b, bind, r.alpha, r.beta, 1e-4)?.global_sign == run.global_sign;
        }
    }
    outcome(
        max <= 1e-3 && halving && consistent,
        format!(
            "sign {}, max rel err {max:e} over {} pairs, halving ok {halving}, sign consistent {consistent}",
            run.global_sign,
            run.at_h.len()
        ),
    )
}

fn c11_printed_value_audit() -> Result<Outcome> {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = gtorsion_cli::run_with(["gtorsion", "check-paper", "--json"], &mut out, &mut err);
    let elapsed = start.elapsed();
    let v: Value = serde_json::from_slice(&out).expect("check-paper emits JSON");
    let reports = v["reports"].as_array().expect("reports").clone();
    let verdict = |case: &str, q: &str| -> Option<String> {
        reports
            .iter()
            .find(|r| r["case"] == case && r["quantity"] == q)
            .map(|r| r["verdict"].as_str().unwrap_or("").to_string())
    };
    let mut missing = Vec::new();
    let mut required_match: Vec<(String, String)> = Vec::new();
    for r in &reports {
        let q = r["quantity"].as_str().unwrap_or("");
        let case = r["case"].as_str().unwrap_or("");
        let table = [
            "gamma_first_alt[",
            "gamma_alt[",
            "gamma_gamma[",
            "torsion_square[",
        ]
        .iter()
        .any(|p| q.starts_with(p));
        if (case == "ansatz_general" && (table || q == "torsion_invariant" || q == "scalar_shift"))
            || (q == "omega" && r["compared_against"] == "paper_form")
        {
            required_match.push((case.into(), q.into()));
        }
    }
    let omega_count = required_match.iter().filter(|(_, q)| q == "omega").count();
    for (case, q) in &required_match {
        if verdict(case, q).as_deref() != Some("match") {
            missing.push(format!("{case}/{q} not match"));
        }
    }
    let conflicts = [
        ("friedmann_n3", "stress[0,0]"),
        ("friedmann_n2", "stress[0,0]"),
        ("friedmann_n3", "p"),
        ("friedmann_n3", "rho"),
    ];
    for (case, q) in conflicts {
        let r = reports
            .iter()
            .find(|r| r["case"] == case && r["quantity"] == q);
        let ok = r.is_some_and(|r| {
            r["verdict"] == "paper_internal_conflict"
                && r.get("derived_value").is_some()
                && (r.get("paper_form_value").is_some() || r.get("readings").is_some())
        });
        if !ok {
            missing.push(format!("{case}/{q} not a recorded conflict"));
        }
    }
    let pass =
        code == 0 && missing.is_empty() && omega_count == 4 && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "exit {code}, {} required matches ({omega_count} omega), summary {}, {:.1} s{}",
            required_match.len(),
            v["summary"],
            elapsed.as_secs_f64(),
            if missing.is_empty() {
                String::new()
            } else {
                format!(", problems {missing:?}")
            }
        ),
    )
}

fn c12_oracle() -> Result<Outcome> {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut pass = true;
    for p in Preset::ALL {
        let b = p.bundle()?;
        let checks = compare_with_oracle(
            &b,
            &preset_bindings(p, gtorsion::expr::seed_from_env(), 8),
            1e-5,
        )?;
        for c in checks {
            pass &= c.passed;
            if c.max_deviation > worst.0 {
                worst = (c.max_deviation, format!("{}/{}", p.id(), c.quantity));
            }
        }
    }
    outcome(
        pass,
        format!("worst deviation {:e} at {}", worst.0, worst.1),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("scalar curvature shift on the ansatz", c01_scalar_shift),
        ("omega = 13/75 exactly on four presets", c02_omega_exact),
        ("torsion invariant closed form", c03_torsion_invariant),
        (
            "total antisymmetry of lowered torsion",
            c04_torsion_antisymmetry,
        ),
        ("zero-torsion collapse", c05_zero_torsion_collapse),
        ("curvature family and printed tables", c06_family_tables),
        ("connection trace identities", c07_trace_identities),
        ("metricity of the associated connection", c08_metricity),
        ("fluid decomposition reassembly", c09_reconstruction),
        ("finite-difference metric variation", c10_fd_variation),
        ("printed value audit", c11_printed_value_audit),
        ("symbolic against numeric oracle", c12_oracle),
    ];
    let mut failures = 0;
    for (k, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let (pass, detail) = match result {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        failures += !pass as usize;
        println!(
            "{} {:>2} {title}: {detail} [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
