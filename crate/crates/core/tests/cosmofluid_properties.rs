//! Stress-energy and fluid decomposition invariants.

use gtorsion::cosmofluid::{
    comoving_closed_forms, fluid_decompose, reconstruct, stress_energy, stress_energy_factored,
    stress_trace, Omega, Velocity,
};
use gtorsion::expr::{equivalent, Atom, Expr, ProbeConfig, Symbol};
use gtorsion::geometry::{christoffel, metric_trace, MetricBundle};
use gtorsion::io::MetricSpec;
use gtorsion::paperlab::{random_metric, Preset, RandomMetric};
use gtorsion::tensor::{valence, Tensor};
use proptest::prelude::*;

fn cfg() -> ProbeConfig {
    ProbeConfig::new(16, 1e-9)
}

fn equal(a: &Tensor, b: &Tensor, cfg: &ProbeConfig) -> bool {
    a.probe_equal(b, cfg).unwrap().is_equal()
}

fn component() -> impl Strategy<Value = Expr> {
    let mono = (-3i64..=3, 0i64..=2, 0i64..=1).prop_map(|(c, a, b)| {
        Expr::int(c) * Expr::powi(Expr::var("t"), a) * Expr::powi(Expr::var("x2"), b)
    });
    prop::collection::vec(mono, 1..3).prop_map(|v| Expr::sum(v).simplify())
}

/// Random symmetric covariant rank-2 tensor in four dimensions.
fn symmetric_stress() -> impl Strategy<Value = Tensor> {
    prop::collection::vec(component(), 16).prop_map(|c| {
        Tensor::from_fn(4, &valence::DD, |ix| {
            c[4 * ix[0].min(ix[1]) + ix[0].max(ix[1])].clone()
        })
    })
}

fn lorentz_metric(seed: u64) -> MetricBundle {
    random_metric(seed, &RandomMetric::new(4).symmetric().sym_offdiag(1))
        .bundle()
        .unwrap()
}

/// Timelike (`eps = -1`) and spacelike (`eps = +1`) observers.
fn velocities(b: &MetricBundle) -> Vec<Velocity> {
    let e = |k: usize| {
        (0..4)
            .map(|i| if i == k { Expr::one() } else { Expr::zero() })
            .collect::<Vec<_>>()
    };
    vec![
        Velocity::from_components(b, e(0)).unwrap(),
        Velocity::from_components(b, e(1)).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn decomposition_reassembles(t in symmetric_stress(), seed in any::<u64>()) {
        let b = lorentz_metric(seed);
        let us = velocities(&b);
        prop_assert_eq!(us.iter().map(|u| u.eps).collect::<Vec<_>>(), vec![-1, 1]);
        for u in &us {
            let st = fluid_decompose(&b, &t, u).unwrap();
            prop_assert!(equal(&reconstruct(&st, u).unwrap(), &t, &cfg()));
        }
    }

    #[test]
    fn projector_is_idempotent_and_orthogonal(t in symmetric_stress(), seed in any::<u64>()) {
        let b = lorentz_metric(seed);
        for u in velocities(&b) {
            let st = fluid_decompose(&b, &t, &u).unwrap();
            let h = st.h.as_ref().unwrap().raise(0, &b.ginv).unwrap();
            let hh = h.product(&h).unwrap().contract(2, 1).unwrap();
            prop_assert!(equal(&hh, &h, &cfg()));
            let hu = h.product(&u.u_up).unwrap().contract(2, 1).unwrap();
            prop_assert!(equal(&hu, &Tensor::zeros(4, &valence::U), &cfg()));
            // q is orthogonal to u.
            let qu = st.q.product(&u.u_up).unwrap().contract(1, 0).unwrap();
            prop_assert!(equivalent(qu.as_scalar().unwrap(), &Expr::zero(), &cfg()).is_equal());
        }
    }

    #[test]
    fn pressure_is_a_third_of_the_projected_trace(t in symmetric_stress(), seed in any::<u64>()) {
        let b = lorentz_metric(seed);
        for u in velocities(&b) {
            let st = fluid_decompose(&b, &t, &u).unwrap();
            let third = (Expr::ratio(1, 3) * metric_trace(&b, st.pi.as_ref().unwrap())).simplify();
            prop_assert!(equivalent(&st.p, &third, &cfg()).is_equal());
            let trace_form = (Expr::ratio(-1, 3)
                * (metric_trace(&b, &t) - Expr::int(u.eps as i64) * st.rho.clone()))
            .simplify();
            prop_assert!(equivalent(&st.p, &trace_form, &cfg()).is_equal());
        }
    }

    #[test]
    fn stress_is_symmetric_and_matches_factored_form(seed in any::<u64>()) {
        let b = random_metric(seed, &RandomMetric::new(4)).bundle().unwrap();
        let c = christoffel(&b).unwrap();
        let t = stress_energy(&b, &c).unwrap();
        prop_assert!(equal(&t, &t.swap_slots(0, 1).unwrap(), &cfg()));
        prop_assert!(equal(&t, &stress_energy_factored(&b, &c).unwrap(), &cfg()));
    }
}

fn ansatz_with(edit: impl Fn(&str) -> String) -> MetricBundle {
    let mut spec = Preset::AnsatzGeneral.spec();
    for row in spec.entries.iter_mut() {
        for e in row.iter_mut() {
            *e = edit(e);
        }
    }
    spec.bundle().unwrap()
}

#[test]
fn stress_is_quadratic_in_the_antisymmetric_part() {
    let pc = Preset::AnsatzGeneral.probe_config();
    let base = ansatz_with(|e| e.to_string());
    let t = stress_energy(&base, &christoffel(&base).unwrap()).unwrap();
    for lambda in [2i64, 3] {
        let scaled = ansatz_with(|e| {
            if e.contains('n') {
                format!("{lambda}*({e})")
            } else {
                e.to_string()
            }
        });
        let ts = stress_energy(&scaled, &christoffel(&scaled).unwrap()).unwrap();
        assert!(
            equal(&ts, &t.scale(&Expr::int(lambda * lambda)), &pc),
            "lambda {lambda}"
        );
    }
}

#[test]
fn closed_form_omega_depends_on_s0_only() {
    let base = comoving_closed_forms(&ansatz_with(|e| e.to_string())).unwrap();
    let Omega::Expr(w) = &base.omega else {
        panic!("{:?}", base.omega)
    };
    let s0 = Atom::Function(Symbol::new("s0").unwrap(), 0);
    assert!(
        w.atoms()
            .iter()
            .all(|a| *a == s0 || matches!(a, Atom::Symbol(_))),
        "{w}"
    );
    let moved = ansatz_with(|e| match e {
        "s1(t)" => "2*s1(t) + t".into(),
        "s3(t)" => "s3(t)^2".into(),
        "n3(t)" => "n3(t) + t^2".into(),
        "-n3(t)" => "-(n3(t) + t^2)".into(),
        _ => e.to_string(),
    });
    let w2 = comoving_closed_forms(&moved)
        .unwrap()
        .omega
        .as_expr()
        .unwrap();
    assert!(equivalent(w, &w2, &cfg()).is_equal());
}

#[test]
fn ansatz_trace_matches_closed_form() {
    let b = ansatz_with(|e| e.to_string());
    let c = christoffel(&b).unwrap();
    let tr = stress_trace(&b, &stress_energy(&b, &c).unwrap()).unwrap();
    let closed = gtorsion::cosmofluid::stress_trace_closed_form(&b).unwrap();
    assert!(equivalent(&tr, &closed, &Preset::AnsatzGeneral.probe_config()).is_equal());
}

#[test]
fn spec_frame_drives_the_velocity() {
    let s = r#"{"dimension": 2, "coordinates": ["t", "x"], "entries": [["-1", "0"], ["0", "1"]],
                "frame": {"components": ["0", "3"]}}"#;
    let spec = MetricSpec::from_json(s).unwrap();
    let b = spec.bundle().unwrap();
    let u = spec.velocity(&b).unwrap();
    assert_eq!(u.eps, 1);
    assert_eq!(u.u_up.get(&[1]), &Expr::one());
}
