//! The run / bounds / check subcommands: execute replicate batches, tabulate
//! theoretical overlays, and drive the verification suite, writing plain-text
//! artifacts plus a manifest.

use std::fmt::Write as _;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use relsmooth::algorithms::{
    relgd, relgd_with, relrcd_with, relrcds_with, relsgd_with, RunOptions, RunTrace,
};
use relsmooth::bregman::{bregman, weighted_bregman};
use relsmooth::io::{bounds_to_csv, check_report_to_text, trace_to_csv};
use relsmooth::parallel::{run_replicates, with_worker_limit};
use relsmooth::problems::{estimate_sigma2, Problem};
use relsmooth::sampling::stream_rng;
use relsmooth::theory;
use relsmooth::verify::{
    check_eso_sampled, check_gradient_fd, check_relative_smoothness,
    check_relative_strong_convexity, check_three_point, check_three_point_weighted,
    sample_domain_point, CheckReport, ConvexityCertificate,
};

use crate::config::{AlgorithmKind, AlgorithmSpec, ConfigError, Experiment};

pub type CmdResult<T> = Result<T, ConfigError>;

fn io_err(e: std::io::Error, what: &str) -> ConfigError {
    ConfigError(format!("{what}: {e}"))
}

/// Reference optimum for algorithms whose problem has no known `f*`: a relGD
/// run at the certificate stepsize with `multiplier` times the largest
/// iteration budget. Returns `(value, point, exact)`.
fn reference_for(
    spec: &AlgorithmSpec,
    max_k: usize,
    multiplier: usize,
) -> CmdResult<(f64, Vec<f64>, bool)> {
    let p = &spec.problem;
    if let (Some(v), Some(pt)) = (p.optimum_value, p.optimum_point.clone()) {
        return Ok((v, pt, true));
    }
    let trace = relgd(p, &spec.x0, p.smoothness, max_k * multiplier)?;
    let value = p.optimum_value.unwrap_or(trace.final_objective());
    Ok((value, trace.final_point.clone(), false))
}

fn run_one(
    spec: &AlgorithmSpec,
    rng: &mut rand_chacha::ChaCha8Rng,
    options: &RunOptions,
) -> relsmooth::Result<RunTrace> {
    match &spec.kind {
        AlgorithmKind::RelGd { l } => {
            relgd_with(&spec.problem, &spec.x0, *l, spec.iterations, options)
        }
        AlgorithmKind::RelRcds { l, tau } => relrcds_with(
            &spec.problem,
            &spec.x0,
            *l,
            *tau,
            spec.iterations,
            rng,
            options,
        ),
        AlgorithmKind::RelRcd { cert } => {
            relrcd_with(&spec.problem, &spec.x0, cert, spec.iterations, rng, options)
        }
        AlgorithmKind::RelSgd { schedule, tau } => relsgd_with(
            &spec.problem,
            &spec.x0,
            schedule,
            *tau,
            spec.iterations,
            rng,
            options,
        ),
    }
}

pub fn cmd_run(exp: &Experiment, config_text: &str) -> CmdResult<()> {
    std::fs::create_dir_all(&exp.output_dir).map_err(|e| io_err(e, "creating output directory"))?;

    let max_k = exp
        .algorithms
        .iter()
        .map(|a| a.iterations)
        .max()
        .unwrap_or(1);

    // One reference per distinct problem object.
    type Reference = (f64, Vec<f64>, bool);
    let mut references: Vec<(usize, Reference)> = Vec::new();
    let mut manifest_lines: Vec<(String, String)> = Vec::new();
    for spec in &exp.algorithms {
        let key = Arc::as_ptr(&spec.problem) as usize;
        if references.iter().any(|(k, _)| *k == key) {
            continue;
        }
        let r = reference_for(spec, max_k, exp.reference_multiplier)?;
        manifest_lines.push((
            format!("f_star.{}", spec.problem.name),
            format!(
                "{:?} ({})",
                r.0,
                if r.2 { "exact" } else { "reference, not exact" }
            ),
        ));
        references.push((key, r));
    }
    let lookup = |p: &Arc<Problem>| -> &Reference {
        let key = Arc::as_ptr(p) as usize;
        &references.iter().find(|(k, _)| *k == key).unwrap().1
    };

    struct RunOut {
        file: String,
        status: String,
    }

    let results: Vec<Vec<RunOut>> = with_worker_limit(exp.workers, || {
        exp.algorithms
            .iter()
            .enumerate()
            .map(|(ai, spec)| {
                let (f_star, _, _) = lookup(&spec.problem);
                let f_star = *f_star;
                run_replicates(exp.base_seed, exp.replicates, |rep, rng| {
                    let stream = (ai * 100_000 + rep) as u64;
                    *rng = stream_rng(exp.base_seed, stream);
                    let result = run_one(spec, rng, &RunOptions::default());
                    let file = format!("trace_{}_rep{rep}.csv", spec.name);
                    match result {
                        Ok(mut trace) => {
                            trace.seed = Some(stream);
                            trace.set_reference_optimum(f_star);
                            let csv = trace_to_csv(&trace, exp.thin);
                            let status = match &trace.abort {
                                Some(a) => format!("aborted: {a:?}"),
                                None => "ok".to_string(),
                            };
                            let path = exp.output_dir.join(&file);
                            std::fs::write(&path, csv)
                                .map(|_| RunOut { file, status })
                                .unwrap_or_else(|e| RunOut {
                                    file: String::new(),
                                    status: format!("write error: {e}"),
                                })
                        }
                        Err(e) => RunOut {
                            file: String::new(),
                            status: format!("error: {e}"),
                        },
                    }
                })
            })
            .collect()
    });

    // Bound overlays, where the certificates permit; a failure here is
    // recorded rather than fatal (e.g. no noise level for a stochastic run).
    let mut bound_lines: Vec<(String, String)> = Vec::new();
    for spec in &exp.algorithms {
        let (f_star, x_star, _) = lookup(&spec.problem);
        match bound_values(spec, exp.check.seed, *f_star, x_star) {
            Ok(values) => {
                let file = format!("bounds_{}.csv", spec.name);
                std::fs::write(exp.output_dir.join(&file), bounds_to_csv(&values))
                    .map_err(|e| io_err(e, "writing bounds"))?;
                bound_lines.push((format!("bounds.{}", spec.name), file));
            }
            Err(e) => {
                bound_lines.push((format!("bounds.{}", spec.name), format!("skipped: {e}")));
            }
        }
    }

    // Manifest, written once after all workers finish.
    let mut manifest = String::new();
    let _ = writeln!(manifest, "format = relsmooth-manifest-v1");
    let _ = writeln!(manifest, "version = {}", env!("CARGO_PKG_VERSION"));
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let _ = writeln!(manifest, "config_sha256 = {hex}");
    let _ = writeln!(
        manifest,
        "created_unix = {}",
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    );
    let _ = writeln!(manifest, "base_seed = {}", exp.base_seed);
    let _ = writeln!(manifest, "replicates = {}", exp.replicates);
    let _ = writeln!(manifest, "thin = {}", exp.thin);
    for (k, v) in &exp.notes {
        let _ = writeln!(manifest, "{k} = {v}");
    }
    for (k, v) in &manifest_lines {
        let _ = writeln!(manifest, "{k} = {v}");
    }
    for (k, v) in &bound_lines {
        let _ = writeln!(manifest, "{k} = {v}");
    }
    for (ai, spec) in exp.algorithms.iter().enumerate() {
        let _ = writeln!(manifest, "algorithm.{ai}.name = {}", spec.name);
        let _ = writeln!(manifest, "algorithm.{ai}.k = {}", spec.iterations);
        let _ = writeln!(manifest, "algorithm.{ai}.problem = {}", spec.problem.name);
        for (rep, out) in results[ai].iter().enumerate() {
            let _ = writeln!(manifest, "run.{}.{rep}.status = {}", spec.name, out.status);
            if !out.file.is_empty() {
                let _ = writeln!(manifest, "run.{}.{rep}.file = {}", spec.name, out.file);
            }
        }
    }
    std::fs::write(exp.output_dir.join("manifest.txt"), manifest)
        .map_err(|e| io_err(e, "writing manifest"))?;
    Ok(())
}

/// Theoretical bound values for one algorithm on its iteration grid, using a
/// reference optimum `(f*, x*)`.
fn bound_values(
    spec: &AlgorithmSpec,
    check_seed: u64,
    f_star: f64,
    x_star: &[f64],
) -> Result<Vec<(usize, f64)>, relsmooth::Error> {
    let p = &spec.problem;
    let d0 = bregman(&p.h, x_star, &spec.x0)?;
    // Valid certificates always satisfy mu < L; the clamp keeps overridden
    // stepsize parameters from tripping the evaluators.
    let mu = p.strong_convexity;
    let f0_gap = (p.eval(&spec.x0)? - f_star).max(0.0);
    let ks = 1..=spec.iterations;
    match &spec.kind {
        AlgorithmKind::RelGd { l } => ks
            .map(|k| Ok((k, theory::bound_relgd(*l, mu.min(l * 0.999), d0, k)?.value)))
            .collect(),
        AlgorithmKind::RelRcds { l, tau } => ks
            .map(|k| {
                Ok((
                    k,
                    theory::bound_relrcds(*l, mu.min(l * 0.999), *tau, p.dim(), d0, f0_gap, k)?
                        .value,
                ))
            })
            .collect(),
        AlgorithmKind::RelRcd { cert } => {
            let w = p
                .strong_convexity_weights
                .clone()
                .unwrap_or_else(|| vec![mu; p.dim()]);
            let d0_v = weighted_bregman(&p.h, x_star, &spec.x0, &cert.v)?;
            ks.map(|k| {
                Ok((
                    k,
                    theory::bound_relrcd_eso(&cert.v, &w, cert.sampling.p0(), d0_v, f0_gap, k)?
                        .value,
                ))
            })
            .collect()
        }
        AlgorithmKind::RelSgd { schedule, tau } => {
            let sigma2 = match p.noise_level {
                Some(s) => s,
                None => {
                    let mut rng = stream_rng(check_seed, 9);
                    estimate_sigma2(p, &spec.x0, 2000, &mut rng)?
                }
            };
            ks.map(|k| {
                Ok((
                    k,
                    theory::bound_relsgd_minibatch(
                        schedule,
                        p.smoothness,
                        mu.min(p.smoothness * 0.999),
                        sigma2,
                        *tau,
                        d0,
                        k,
                    )?
                    .value,
                ))
            })
            .collect()
        }
    }
}

/// Theoretical bound columns aligned with each algorithm's iteration grid.
pub fn cmd_bounds(exp: &Experiment) -> CmdResult<()> {
    std::fs::create_dir_all(&exp.output_dir).map_err(|e| io_err(e, "creating output directory"))?;
    let max_k = exp
        .algorithms
        .iter()
        .map(|a| a.iterations)
        .max()
        .unwrap_or(1);

    for spec in &exp.algorithms {
        let (f_star, x_star, _) = reference_for(spec, max_k, exp.reference_multiplier)?;
        let values = bound_values(spec, exp.check.seed, f_star, &x_star)?;
        let path = exp.output_dir.join(format!("bounds_{}.csv", spec.name));
        std::fs::write(&path, bounds_to_csv(&values)).map_err(|e| io_err(e, "writing bounds"))?;
    }
    Ok(())
}

/// Verification suite over the configured problem; returns false when any
/// check fails.
pub fn cmd_check(exp: &Experiment) -> CmdResult<bool> {
    std::fs::create_dir_all(&exp.output_dir).map_err(|e| io_err(e, "creating output directory"))?;
    let spec = &exp.algorithms[0];
    let p = &spec.problem;
    let cfg = &exp.check;
    let mut rng = stream_rng(cfg.seed, 0);

    let mut reports: Vec<CheckReport> = Vec::new();

    let points: Vec<Vec<f64>> = (0..cfg.points)
        .map(|_| sample_domain_point(p, 1.0, &mut rng))
        .collect();
    reports.push(check_gradient_fd(p, &points, 1e-6, 1e-5)?);

    let l = p.smoothness * cfg.l_scale;
    reports.push(check_relative_smoothness(p, l, cfg.pairs, &mut rng)?);

    let convexity = match &p.strong_convexity_weights {
        Some(w) => check_relative_strong_convexity(
            p,
            ConvexityCertificate::Vector(w),
            cfg.pairs,
            &mut rng,
        )?,
        None => check_relative_strong_convexity(
            p,
            ConvexityCertificate::Scalar(p.strong_convexity),
            cfg.pairs,
            &mut rng,
        )?,
    };
    reports.push(convexity);

    // ESO and weighted three-point checks run against the first configured
    // algorithm that carries an ESO certificate.
    let eso_cert = exp.algorithms.iter().find_map(|a| match &a.kind {
        AlgorithmKind::RelRcd { cert } => Some(cert),
        _ => None,
    });
    if let Some(cert) = eso_cert {
        reports.push(check_eso_sampled(p, cert, cfg.points, cfg.mc, &mut rng)?);
        let z = sample_domain_point(p, 1.0, &mut rng);
        let c = p.grad(&z)?;
        let tps: Vec<Vec<f64>> = (0..cfg.pairs)
            .map(|_| sample_domain_point(p, 1.0, &mut rng))
            .collect();
        reports.push(check_three_point_weighted(
            &p.h,
            &p.feasible_set,
            &z,
            &c,
            &cert.v,
            &tps,
        )?);
    }

    let z = sample_domain_point(p, 1.0, &mut rng);
    let c = p.grad(&z)?;
    let tps: Vec<Vec<f64>> = (0..cfg.pairs)
        .map(|_| sample_domain_point(p, 1.0, &mut rng))
        .collect();
    reports.push(check_three_point(&p.h, &p.feasible_set, &z, &c, &tps)?);

    let mut all_pass = true;
    for r in &reports {
        all_pass &= r.pass;
        let path = exp.output_dir.join(format!("check_{}.txt", r.name));
        std::fs::write(&path, check_report_to_text(r))
            .map_err(|e| io_err(e, "writing check report"))?;
        println!(
            "check {:<28} {} (worst slack {:+.3e}, {} samples)",
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.worst_slack,
            r.samples
        );
    }
    Ok(all_pass)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "figure1" => Some(
            "# Coordinate-descent comparison on the quadratic-plus-quartic objective\n\
             preset = figure1\n\
             preset.n = 100\n\
             preset.instance_seed = 1\n\
             preset.epochs = 60\n\
             run.replicates = 10\n\
             run.base_seed = 0\n\
             run.thin = 100\n",
        ),
        "figure2" => Some(
            "# Stochastic-descent schedule comparison on the Poisson inverse problem\n\
             preset = figure2\n\
             preset.m = 60\n\
             preset.n = 12\n\
             preset.instance_seed = 4\n\
             preset.epochs = 100\n\
             run.replicates = 10\n\
             run.base_seed = 0\n\
             run.thin = 60\n",
        ),
        _ => None,
    }
}

pub fn cmd_presets(show: Option<&str>) -> CmdResult<()> {
    match show {
        None => {
            println!("figure1  quadratic-plus-quartic: gd vs relgd vs relrcd");
            println!("figure2  poisson inverse problem: relgd vs relsgd stepsize schedules");
            Ok(())
        }
        Some(name) => match preset_text(name) {
            Some(text) => {
                print!("{text}");
                Ok(())
            }
            None => Err(ConfigError(format!("unknown preset {name}"))),
        },
    }
}
