//! Preset metrics, an independent floating-point oracle, the finite-difference
//! variation check and reproduction reports against printed values.

mod oracle;
mod report;
mod variation;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{parse, Atom, Bindings, Expr, ProbeConfig, Symbol};
use crate::geometry::MetricBundle;
use crate::io::MetricSpec;

pub use oracle::{
    compare_with_oracle, numeric_oracle, NumTensor, NumericFluid, OracleBundle, OracleCheck,
};
pub use report::{
    manifest, reproduce, reproduce_all, CaseReport, Manifest, ManifestEntry, Pipeline, Reading,
    ReportVerdict,
};
pub use variation::{fd_variation_check, fd_variation_run, FdReport, FdRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preset {
    AnsatzGeneral,
    FriedmannN3,
    FriedmannN2,
    BianchiI,
    Flrw,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::AnsatzGeneral,
        Preset::FriedmannN3,
        Preset::FriedmannN2,
        Preset::BianchiI,
        Preset::Flrw,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::AnsatzGeneral => "ansatz_general",
            Preset::FriedmannN3 => "friedmann_n3",
            Preset::FriedmannN2 => "friedmann_n2",
            Preset::BianchiI => "bianchi_I",
            Preset::Flrw => "flrw",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.id() == id)
            .ok_or_else(|| Error::UnknownPreset(id.to_string()))
    }

    fn rows(self) -> [[&'static str; 4]; 4] {
        match self {
            Preset::AnsatzGeneral => [
                ["s0(t)", "n0(t)", "n1(t)", "n2(t)"],
                ["-n0(t)", "s1(t)", "n3(t)", "n4(t)"],
                ["-n1(t)", "-n3(t)", "s2(t)", "n5(t)"],
                ["-n2(t)", "-n4(t)", "-n5(t)", "s3(t)"],
            ],
            Preset::FriedmannN3 => [
                ["-1", "0", "0", "0"],
                ["0", "s(t)", "n(t)", "n(t)"],
                ["0", "-n(t)", "s(t)", "n(t)"],
                ["0", "-n(t)", "-n(t)", "s(t)"],
            ],
            Preset::FriedmannN2 => [
                ["-1", "0", "0", "0"],
                ["0", "s(t)", "n(t)", "n(t)"],
                ["0", "-n(t)", "s(t)", "0"],
                ["0", "-n(t)", "0", "s(t)"],
            ],
            Preset::BianchiI => [
                ["-1", "0", "0", "0"],
                ["0", "s1(t)", "c(t)", "0"],
                ["0", "-c(t)", "s2(t)", "0"],
                ["0", "0", "0", "s3(t)"],
            ],
            Preset::Flrw => [
                ["-1", "0", "0", "0"],
                ["0", "s(t)", "c(t)", "0"],
                ["0", "-c(t)", "s(t)", "0"],
                ["0", "0", "0", "s(t)"],
            ],
        }
    }

    pub fn spec(self) -> MetricSpec {
        MetricSpec {
            dimension: 4,
            coordinates: ["t", "x1", "x2", "x3"].map(String::from).to_vec(),
            entries: self
                .rows()
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
            kappa: "kappa".into(),
            frame: None,
        }
    }

    pub fn bundle(self) -> Result<MetricBundle> {
        self.spec().bundle()
    }

    /// Opaque functions of time appearing in the preset.
    pub fn functions(self) -> Vec<&'static str> {
        match self {
            Preset::AnsatzGeneral => {
                vec!["s0", "s1", "s2", "s3", "n0", "n1", "n2", "n3", "n4", "n5"]
            }
            Preset::FriedmannN3 | Preset::FriedmannN2 => vec!["s", "n"],
            Preset::BianchiI => vec!["s1", "s2", "s3", "c"],
            Preset::Flrw => vec!["s", "c"],
        }
    }

    /// Scale factors sampled in `[0.5, 2]`, anti-symmetric rates in `[-1, 1]`.
    pub fn probe_config(self) -> ProbeConfig {
        let mut cfg = ProbeConfig::default();
        for f in self.functions() {
            if is_scale_factor(f) {
                continue;
            }
            let name = Symbol::new(f).expect("preset function name");
            cfg = cfg.with_range(Atom::Function(name, 1), -1.0, 1.0);
        }
        cfg
    }
}

fn is_scale_factor(name: &str) -> bool {
    name.starts_with('s')
}

/// Closed-form bindings for a preset's functions: `a + b t^2` for scale
/// factors, `c + a t + b t^2` for anti-symmetric entries, with `t` and the
/// spatial coordinates in `[0.5, 2]`.
pub fn preset_bindings(preset: Preset, seed: u64, count: usize) -> Vec<Bindings> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = Symbol::new("t").expect("t");
    (0..count)
        .map(|_| {
            let mut b = Bindings::new();
            for f in preset.functions() {
                let body = if is_scale_factor(f) {
                    format!(
                        "{:.3} + {:.3}*t^2",
                        rng.random_range(0.5..1.5),
                        rng.random_range(0.1..0.5)
                    )
                } else {
                    format!(
                        "{:.3} + {:.3}*t + {:.3}*t^2",
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0)
                    )
                };
                b.set_closed_form(f, &t, parse(&body).expect("closed form"));
            }
            for x in ["t", "x1", "x2", "x3"] {
                b.set_symbol(x, rng.random_range(0.5..2.0));
            }
            b
        })
        .collect()
}

/// Shape of a generated metric.
#[derive(Clone, Debug)]
pub struct RandomMetric {
    pub dim: usize,
    /// No anti-symmetric part when set.
    pub symmetric: bool,
    /// Number of nonzero off-diagonal entries of the symmetric part.
    pub sym_offdiag: usize,
    /// Negative `g_00`.
    pub lorentzian: bool,
}

impl RandomMetric {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            symmetric: false,
            sym_offdiag: 1,
            lorentzian: true,
        }
    }

    pub fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn sym_offdiag(mut self, k: usize) -> Self {
        self.sym_offdiag = k;
        self
    }
}

pub fn coordinate_names(dim: usize) -> Vec<String> {
    (0..dim)
        .map(|i| {
            if i == 0 {
                "t".to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// A polynomial metric whose symmetric part is diagonally dominant on
/// `[0.5, 2]^N`, so its determinant never changes sign on the probe domain.
pub fn random_metric(seed: u64, shape: &RandomMetric) -> MetricSpec {
    let n = shape.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = coordinate_names(n);
    let var = |rng: &mut ChaCha8Rng| names[rng.random_range(0..n)].clone();
    let mut sym = vec![vec!["0".to_string(); n]; n];
    for (i, row) in sym.iter_mut().enumerate() {
        let c = [1, 2][rng.random_range(0..2)];
        let base = 4 + rng.random_range(0..3);
        let sign = if i == 0 && shape.lorentzian { "-" } else { "" };
        row[i] = format!("{sign}({base} + {c}/4*{}^2)", var(&mut rng));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    for _ in 0..shape.sym_offdiag.min(pairs.len()) {
        let (i, j) = pairs[rng.random_range(0..pairs.len())];
        let term = format!("1/4*{}", var(&mut rng));
        sym[i][j] = term.clone();
        sym[j][i] = term;
    }
    let mut entries = sym.clone();
    if !shape.symmetric {
        for &(i, j) in &pairs {
            if rng.random_range(0.0..1.0) < 0.3 {
                continue;
            }
            let c = [-3, -2, -1, 1, 2, 3][rng.random_range(0..6)];
            let (a, b) = (var(&mut rng), var(&mut rng));
            let alt = match rng.random_range(0..3) {
                0 => format!("{c}/2*{a}"),
                1 => format!("{c}/2*{a}*{b}"),
                _ => format!("{c}/2*{a}^2"),
            };
            entries[i][j] = format!("{} + {alt}", sym[i][j]);
            entries[j][i] = format!("{} - ({alt})", sym[j][i]);
        }
    }
    MetricSpec {
        dimension: n,
        coordinates: names.clone(),
        entries,
        kappa: "kappa".into(),
        frame: None,
    }
}

/// Random point bindings for the coordinates of a generated metric.
pub fn random_point_bindings(dim: usize, seed: u64, count: usize) -> Vec<Bindings> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut b = Bindings::new();
            for x in coordinate_names(dim) {
                b.set_symbol(&x, rng.random_range(0.5..2.0));
            }
            b
        })
        .collect()
}

/// `Σ = s3 (n3')^2 + s2 (n4')^2 + s1 (n5')^2` written out for the general ansatz.
pub fn ansatz_sigma() -> Expr {
    parse("s3(t)*n3'(t)^2 + s2(t)*n4'(t)^2 + s1(t)*n5'(t)^2").expect("sigma")
}
