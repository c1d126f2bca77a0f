//! Flat `key = value` experiment configuration with dotted section names.
//! Unknown keys are hard errors: silent misconfiguration is the main
//! reproducibility hazard in a batch harness.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relsmooth::algorithms::StepsizeSchedule;
use relsmooth::io::{parse_kv, problem_from_text, split_floats};
use relsmooth::presets::{figure1, figure2, random_normalized_gram};
use relsmooth::problems::{self, EsoCertificate, Problem, RowMatrix};
use relsmooth::sampling::Sampling;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<relsmooth::Error> for ConfigError {
    fn from(e: relsmooth::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// Key/value view that tracks consumption so leftovers can fail loudly.
struct Reader {
    map: BTreeMap<String, String>,
    consumed: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Reader {
    fn new(text: &str) -> ConfigResult<Self> {
        let kv = parse_kv(text).map_err(|e| ConfigError(e.to_string()))?;
        let mut map = BTreeMap::new();
        for (k, v) in kv {
            if map.insert(k.clone(), v).is_some() {
                return Err(ConfigError(format!("duplicate key {k}")));
            }
        }
        Ok(Self {
            map,
            consumed: Default::default(),
        })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.consumed.borrow_mut().insert(key.to_string());
        self.map.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &str) -> ConfigResult<&str> {
        self.get(key)
            .ok_or_else(|| ConfigError(format!("missing key {key}")))
    }

    fn f64(&self, key: &str) -> ConfigResult<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| ConfigError(format!("{key}: bad float {v:?}")))
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> ConfigResult<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| ConfigError(format!("{key}: bad integer {v:?}")))
            })
            .transpose()
    }

    fn u64(&self, key: &str) -> ConfigResult<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| ConfigError(format!("{key}: bad integer {v:?}")))
            })
            .transpose()
    }

    fn finish(&self) -> ConfigResult<()> {
        let consumed = self.consumed.borrow();
        for key in self.map.keys() {
            if !consumed.contains(key) {
                return Err(ConfigError(format!("unknown key {key}")));
            }
        }
        Ok(())
    }
}

/// One algorithm to run, with everything resolved.
#[derive(Debug, Clone)]
pub struct AlgorithmSpec {
    pub name: String,
    pub kind: AlgorithmKind,
    pub problem: Arc<Problem>,
    pub x0: Arc<Vec<f64>>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
#[allow(clippy::enum_variant_names)] // the algorithm family shares the rel- prefix
pub enum AlgorithmKind {
    RelGd {
        l: f64,
    },
    RelRcds {
        l: f64,
        tau: usize,
    },
    RelRcd {
        cert: EsoCertificate,
    },
    RelSgd {
        schedule: StepsizeSchedule,
        tau: usize,
    },
}

/// Fully resolved experiment.
#[derive(Debug)]
pub struct Experiment {
    pub algorithms: Vec<AlgorithmSpec>,
    pub replicates: usize,
    pub base_seed: u64,
    pub thin: usize,
    pub workers: usize,
    pub reference_multiplier: usize,
    pub output_dir: std::path::PathBuf,
    pub check: CheckSpec,
    /// Annotations surfaced in the manifest (preset facts, realized values).
    pub notes: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub pairs: usize,
    pub points: usize,
    pub mc: usize,
    pub seed: u64,
    pub l_scale: f64,
}

pub const ENV_OUTPUT_DIR: &str = "RELSMOOTH_OUT";

pub fn resolve(text: &str, config_dir: &std::path::Path) -> ConfigResult<Experiment> {
    let r = Reader::new(text)?;

    let mut notes: Vec<(String, String)> = Vec::new();
    let mut algorithms: Vec<AlgorithmSpec> = Vec::new();

    let replicates = r.usize("run.replicates")?.unwrap_or(1);
    if replicates == 0 {
        return Err(ConfigError("run.replicates must be >= 1".into()));
    }
    let base_seed = r.u64("run.base_seed")?.unwrap_or(0);
    let thin = r.usize("run.thin")?.unwrap_or(1).max(1);
    let workers = r.usize("run.workers")?.unwrap_or(0);
    let reference_multiplier = r.usize("run.reference_multiplier")?.unwrap_or(10);

    let output_dir = match r.get("output.dir") {
        Some(d) => std::path::PathBuf::from(d),
        None => std::env::var(ENV_OUTPUT_DIR)
            .map(std::path::PathBuf::from)
            .unwrap_or_else(|_| std::path::PathBuf::from("out")),
    };

    let check = CheckSpec {
        pairs: r.usize("check.pairs")?.unwrap_or(1000),
        points: r.usize("check.points")?.unwrap_or(20),
        mc: r.usize("check.mc")?.unwrap_or(2000),
        seed: r.u64("check.seed")?.unwrap_or(0),
        l_scale: r.f64("check.l_scale")?.unwrap_or(1.0),
    };

    if let Some(preset) = r.get("preset") {
        let preset = preset.to_string();
        match preset.as_str() {
            "figure1" => {
                let n = r.usize("preset.n")?.unwrap_or(100);
                let instance_seed = r.u64("preset.instance_seed")?.unwrap_or(1);
                let epochs = r.usize("preset.epochs")?.unwrap_or(60);
                let f1 = figure1(n, instance_seed)?;
                let x0 = Arc::new(f1.x0.clone());
                let rel = Arc::new(f1.problem.clone());
                let gd = Arc::new(f1.gd_problem.clone());
                notes.push(("preset".into(), "figure1".into()));
                notes.push(("preset.n".into(), n.to_string()));
                notes.push(("preset.instance_seed".into(), instance_seed.to_string()));
                let vmax = f1.eso.v.iter().cloned().fold(0.0f64, f64::max);
                notes.push(("eso_v_max".into(), format!("{vmax:?}")));
                notes.push(("gd_smoothness".into(), format!("{:?}", f1.gd_smoothness)));
                algorithms.push(AlgorithmSpec {
                    name: "gd".into(),
                    kind: AlgorithmKind::RelGd {
                        l: f1.gd_smoothness,
                    },
                    problem: gd,
                    x0: x0.clone(),
                    iterations: epochs,
                });
                algorithms.push(AlgorithmSpec {
                    name: "relgd".into(),
                    kind: AlgorithmKind::RelGd {
                        l: f1.problem.smoothness,
                    },
                    problem: rel.clone(),
                    x0: x0.clone(),
                    iterations: epochs,
                });
                algorithms.push(AlgorithmSpec {
                    name: "relrcd".into(),
                    kind: AlgorithmKind::RelRcd { cert: f1.eso },
                    problem: rel,
                    x0,
                    iterations: epochs * n,
                });
            }
            "figure2" => {
                let m = r.usize("preset.m")?.unwrap_or(60);
                let n = r.usize("preset.n")?.unwrap_or(12);
                let instance_seed = r.u64("preset.instance_seed")?.unwrap_or(4);
                let epochs = r.usize("preset.epochs")?.unwrap_or(100);
                let f2 = figure2(m, n, instance_seed)?;
                let problem = Arc::new(f2.problem.clone());
                let x0 = Arc::new(f2.x0.clone());
                notes.push(("preset".into(), "figure2".into()));
                notes.push(("preset.m".into(), m.to_string()));
                notes.push(("preset.n".into(), n.to_string()));
                notes.push(("preset.instance_seed".into(), instance_seed.to_string()));
                notes.push(("smoothness".into(), format!("{:?}", problem.smoothness)));
                algorithms.push(AlgorithmSpec {
                    name: "relgd".into(),
                    kind: AlgorithmKind::RelGd {
                        l: problem.smoothness,
                    },
                    problem: problem.clone(),
                    x0: x0.clone(),
                    iterations: epochs,
                });
                for (name, schedule) in f2.schedules {
                    algorithms.push(AlgorithmSpec {
                        name: format!("relsgd_{name}"),
                        kind: AlgorithmKind::RelSgd { schedule, tau: 1 },
                        problem: problem.clone(),
                        x0: x0.clone(),
                        iterations: epochs * m,
                    });
                }
            }
            other => {
                return Err(ConfigError(format!(
                    "unknown preset {other} (available: figure1, figure2)"
                )))
            }
        }
        r.finish()?;
        return Ok(Experiment {
            algorithms,
            replicates,
            base_seed,
            thin,
            workers,
            reference_multiplier,
            output_dir,
            check,
            notes,
        });
    }

    // Explicit problem + algorithm sections.
    let problem = Arc::new(build_problem(&r, config_dir)?);
    let x0 = Arc::new(build_x0(&r, &problem)?);

    let mut idx = 0;
    loop {
        let prefix = format!("algorithm.{idx}");
        let name_key = format!("{prefix}.name");
        let Some(name) = r.get(&name_key) else {
            break;
        };
        let name = name.to_string();
        let k = r
            .usize(&format!("{prefix}.k"))?
            .ok_or_else(|| ConfigError(format!("{prefix}.k is required")))?;
        if k == 0 {
            return Err(ConfigError(format!("{prefix}.k must be >= 1")));
        }
        let l_override = r.f64(&format!("{prefix}.l"))?;
        let l = l_override.unwrap_or(problem.smoothness);
        if !l.is_finite() || l <= 0.0 {
            return Err(ConfigError(format!(
                "{prefix}: stepsize parameter L = {l} must be positive and finite \
                 (set {prefix}.l)"
            )));
        }
        let kind = match name.as_str() {
            "gd" | "relgd" => AlgorithmKind::RelGd { l },
            "relrcds" => {
                let tau = r.usize(&format!("{prefix}.tau"))?.unwrap_or(1);
                AlgorithmKind::RelRcds { l, tau }
            }
            "relrcd" => {
                let tau = r.usize(&format!("{prefix}.tau"))?.unwrap_or(1);
                let sampling = Sampling::tau_nice(problem.dim(), tau)?;
                let cert = problem.eso_certificate(sampling)?;
                AlgorithmKind::RelRcd { cert }
            }
            "relsgd" => {
                let tau = r.usize(&format!("{prefix}.tau"))?.unwrap_or(1);
                let schedule = match r.get(&format!("{prefix}.schedule")).unwrap_or("constant") {
                    "constant" => StepsizeSchedule::constant(l)?,
                    "linear" => {
                        let alpha = r
                            .f64(&format!("{prefix}.alpha"))?
                            .ok_or_else(|| ConfigError(format!("{prefix}.alpha required")))?;
                        StepsizeSchedule::linear(l, alpha)?
                    }
                    "sqrt_growth" => {
                        let coeff = r.f64(&format!("{prefix}.coeff"))?.unwrap_or(l / 10.0);
                        StepsizeSchedule::sqrt_growth(coeff)?
                    }
                    "fixed_horizon" => {
                        let sigma2 = r
                            .f64(&format!("{prefix}.sigma2"))?
                            .or(problem.noise_level)
                            .ok_or_else(|| {
                                ConfigError(format!(
                                    "{prefix}.sigma2 required (no noise level on the problem)"
                                ))
                            })?;
                        let d0 = r.f64(&format!("{prefix}.d0"))?.unwrap_or(1.0);
                        StepsizeSchedule::fixed_horizon_optimal(sigma2, l, d0, k)?
                    }
                    other => {
                        return Err(ConfigError(format!("unknown schedule {other}")));
                    }
                };
                AlgorithmKind::RelSgd { schedule, tau }
            }
            other => {
                return Err(ConfigError(format!(
                    "unknown algorithm {other} (gd, relgd, relrcds, relrcd, relsgd)"
                )))
            }
        };
        algorithms.push(AlgorithmSpec {
            name,
            kind,
            problem: problem.clone(),
            x0: x0.clone(),
            iterations: k,
        });
        idx += 1;
    }
    if algorithms.is_empty() {
        return Err(ConfigError(
            "no algorithms configured (need algorithm.0.name = ...)".into(),
        ));
    }

    r.finish()?;
    Ok(Experiment {
        algorithms,
        replicates,
        base_seed,
        thin,
        workers,
        reference_multiplier,
        output_dir,
        check,
        notes,
    })
}

fn build_problem(r: &Reader, config_dir: &std::path::Path) -> ConfigResult<Problem> {
    if let Some(path) = r.get("problem.path") {
        let full = config_dir.join(path);
        let text = std::fs::read_to_string(&full)
            .map_err(|e| ConfigError(format!("reading {}: {e}", full.display())))?;
        let mut p = problem_from_text(&text)?;
        if let Some(l) = r.f64("problem.l")? {
            p = p.with_smoothness(l);
        }
        return Ok(p);
    }
    let builder = r.require("problem.builder")?.to_string();
    let instance_seed = r.u64("problem.instance_seed")?.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
    let mut p = match builder.as_str() {
        "quad_quartic" => {
            let n = r
                .usize("problem.n")?
                .ok_or_else(|| ConfigError("problem.n required".into()))?;
            let a = r.f64("problem.a")?.unwrap_or(0.1);
            let a_ref = r.f64("problem.a_ref")?.unwrap_or(a);
            let m = random_normalized_gram(n, &mut rng);
            problems::quad_quartic_split(m, a, a_ref)?
        }
        "poisson_kl" | "regularized_poisson" => {
            let m = r
                .usize("problem.m")?
                .ok_or_else(|| ConfigError("problem.m required".into()))?;
            let n = r
                .usize("problem.n")?
                .ok_or_else(|| ConfigError("problem.n required".into()))?;
            let a = RowMatrix::from_fn(m, n, |_, _| abs_normal(&mut rng));
            let b: Vec<f64> = (0..m).map(|_| abs_normal(&mut rng).max(1e-3)).collect();
            if builder == "regularized_poisson" {
                let mu = r
                    .f64("problem.mu_reg")?
                    .ok_or_else(|| ConfigError("problem.mu_reg required".into()))?;
                problems::regularized_poisson(a, b, mu)?
            } else {
                problems::poisson_kl(a, b)?
            }
        }
        "d_optimal_design" => {
            let m = r
                .usize("problem.m")?
                .ok_or_else(|| ConfigError("problem.m required".into()))?;
            let n = r
                .usize("problem.n")?
                .ok_or_else(|| ConfigError("problem.n required".into()))?;
            let h = RowMatrix::from_fn(m, n, |_, _| std_normal(&mut rng));
            problems::d_optimal_design(h)?
        }
        "noisy_quadratic" => {
            let n = r
                .usize("problem.n")?
                .ok_or_else(|| ConfigError("problem.n required".into()))?;
            let sigma = r.f64("problem.sigma")?.unwrap_or(1.0);
            let diag: Vec<f64> = (0..n).map(|_| 0.1 + 0.9 * uniform(&mut rng)).collect();
            problems::noisy_quadratic(diag, sigma)?
        }
        other => {
            return Err(ConfigError(format!("unknown problem name {other}")));
        }
    };
    if let Some(l) = r.f64("problem.l")? {
        p = p.with_smoothness(l);
    }
    Ok(p)
}

fn build_x0(r: &Reader, p: &Problem) -> ConfigResult<Vec<f64>> {
    let n = p.dim();
    let kind = r.get("x0.kind").unwrap_or("ones").to_string();
    let scale = r.f64("x0.scale")?.unwrap_or(1.0);
    let seed = r.u64("x0.seed")?.unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = match kind.as_str() {
        "ones" => vec![scale; n],
        "normal" => (0..n).map(|_| scale * std_normal(&mut rng)).collect(),
        "abs_normal" => (0..n)
            .map(|_| (scale * std_normal(&mut rng)).abs().max(1e-6 * scale))
            .collect(),
        "simplex_uniform" => vec![1.0 / n as f64; n],
        "value" => {
            let raw = r.require("x0.value")?;
            let v = split_floats(raw)?;
            if v.len() != n {
                return Err(ConfigError(format!(
                    "x0.value has {} entries, problem dimension is {n}",
                    v.len()
                )));
            }
            v
        }
        other => return Err(ConfigError(format!("unknown x0.kind {other}"))),
    };
    p.h.check_domain(&x0)
        .map_err(|e| ConfigError(format!("x0 outside domain: {e}")))?;
    Ok(x0)
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand_distr::Distribution;
    rand_distr::StandardNormal.sample(rng)
}

fn abs_normal(rng: &mut ChaCha8Rng) -> f64 {
    std_normal(rng).abs()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    rng.random_range(0.0..1.0)
}
