//! Numerical verification of the defining inequalities and oracles behind
//! every certificate: finite-difference gradients, relative smoothness and
//! strong convexity, ESO overapproximation, and the three-point property.
//!
//! Every check samples points, reports the worst signed slack in the
//! inequality's own units (normalized by a problem scale), and keeps the
//! offending sample as a witness so failures are reproducible.

use rand::Rng;

use crate::bregman::{
    bregman, bregman_component, mirror_step, weighted_bregman, Component, FeasibleSet,
    ReferenceFunction, StepSizes,
};
use crate::error::{Error, Result};
use crate::problems::{dot, EsoCertificate, Problem};

const SLACK_TOL: f64 = 1e-9;
/// Largest subset count for exact ESO enumeration before Monte Carlo.
const ENUM_LIMIT: u128 = 4000;

/// Worst sample found by a failing check.
#[derive(Debug, Clone)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub detail: String,
}

/// Outcome of one sampled inequality check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    /// Most adverse signed slack (negative means the inequality failed by
    /// that much, in normalized units).
    pub worst_slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl CheckReport {
    fn from_worst(
        name: &str,
        samples: usize,
        tolerance: f64,
        worst: f64,
        witness: Option<Witness>,
    ) -> Self {
        let pass = worst >= -tolerance;
        CheckReport {
            name: name.to_string(),
            samples,
            worst_slack: worst,
            tolerance,
            pass,
            witness: if pass { None } else { witness },
        }
    }
}

/// Draws a point from the interior of the problem's domain: log-uniform over
/// `[1e-3, 1e3]` per coordinate for Burg components (to probe the boundary),
/// centered normal with the given scale elsewhere, renormalized onto the
/// simplex when the feasible set demands it.
pub fn sample_domain_point<R: Rng + ?Sized>(p: &Problem, scale: f64, rng: &mut R) -> Vec<f64> {
    let n = p.dim();
    let mut x: Vec<f64> = (0..n)
        .map(|i| match p.h.component(i) {
            Component::BurgLog => {
                let e: f64 = rng.random_range(-3.0..3.0);
                10f64.powf(e)
            }
            _ => {
                let u: f64 = rand_distr::StandardNormal.sample(rng);
                scale * u
            }
        })
        .collect();
    if matches!(p.feasible_set, FeasibleSet::Simplex) {
        let total: f64 = x.iter().sum();
        for z in x.iter_mut() {
            *z /= total;
        }
    }
    x
}

use rand_distr::Distribution;

/// Central finite differences against the analytic gradient at each point;
/// the error is measured relative to `max(1, ‖∇f‖∞)`.
pub fn check_gradient_fd(
    p: &Problem,
    points: &[Vec<f64>],
    step: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    if !(step > 0.0) {
        return Err(Error::InvalidParams("fd step must be positive".into()));
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for x in points {
        let g = p.grad(x)?;
        let gscale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..x.len() {
            let mut hi = x.clone();
            let mut lo = x.clone();
            hi[i] += step;
            lo[i] -= step;
            let fd = (p.eval(&hi)? - p.eval(&lo)?) / (2.0 * step);
            let err = (fd - g[i]).abs() / gscale;
            let slack = tolerance - err;
            if slack < worst {
                worst = slack;
                witness = Some(Witness {
                    x: x.clone(),
                    y: None,
                    detail: format!("coordinate {i}: fd {fd} vs analytic {}", g[i]),
                });
            }
        }
    }
    // Slack here is already in tolerance units; pass needs worst >= 0.
    Ok(CheckReport::from_worst(
        "gradient_fd",
        points.len(),
        0.0,
        worst,
        witness,
    ))
}

/// Relative smoothness `f(x) ≤ f(y) + ⟨∇f(y), x−y⟩ + L D_h(x, y)` on sampled
/// pairs; slack is `(rhs − lhs)/(1 + |f(y)|)`.
pub fn check_relative_smoothness<R: Rng + ?Sized>(
    p: &Problem,
    l: f64,
    n_pairs: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for _ in 0..n_pairs {
        let x = sample_domain_point(p, 1.0, rng);
        let y = sample_domain_point(p, 1.0, rng);
        let fy = p.eval(&y)?;
        let gy = p.grad(&y)?;
        let lin: f64 = gy
            .iter()
            .zip(x.iter().zip(&y))
            .map(|(g, (xi, yi))| g * (xi - yi))
            .sum();
        let rhs = fy + lin + l * bregman(&p.h, &x, &y)?;
        let lhs = p.eval(&x)?;
        let slack = (rhs - lhs) / (1.0 + fy.abs());
        if slack < worst {
            worst = slack;
            witness = Some(Witness {
                x: x.clone(),
                y: Some(y.clone()),
                detail: format!("lhs {lhs} vs rhs {rhs}"),
            });
        }
    }
    Ok(CheckReport::from_worst(
        "relative_smoothness",
        n_pairs,
        SLACK_TOL,
        worst,
        witness,
    ))
}

/// Strong convexity certificate: scalar `mu` or per-coordinate vector `w`.
#[derive(Debug, Clone)]
pub enum ConvexityCertificate<'a> {
    Scalar(f64),
    Vector(&'a [f64]),
}

/// Relative strong convexity `f(y) ≥ f(x) + ⟨∇f(x), y−x⟩ + μ D_h(y, x)` (or
/// the `w`-weighted form) on sampled pairs.
pub fn check_relative_strong_convexity<R: Rng + ?Sized>(
    p: &Problem,
    cert: ConvexityCertificate<'_>,
    n_pairs: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for _ in 0..n_pairs {
        let x = sample_domain_point(p, 1.0, rng);
        let y = sample_domain_point(p, 1.0, rng);
        let fx = p.eval(&x)?;
        let gx = p.grad(&x)?;
        let lin: f64 = gx
            .iter()
            .zip(y.iter().zip(&x))
            .map(|(g, (yi, xi))| g * (yi - xi))
            .sum();
        let curvature = match &cert {
            ConvexityCertificate::Scalar(mu) => mu * bregman(&p.h, &y, &x)?,
            ConvexityCertificate::Vector(w) => weighted_bregman(&p.h, &y, &x, w)?,
        };
        let slack = (p.eval(&y)? - fx - lin - curvature) / (1.0 + fx.abs());
        if slack < worst {
            worst = slack;
            witness = Some(Witness {
                x: x.clone(),
                y: Some(y.clone()),
                detail: "strong convexity slack".into(),
            });
        }
    }
    Ok(CheckReport::from_worst(
        "relative_strong_convexity",
        n_pairs,
        SLACK_TOL,
        worst,
        witness,
    ))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > ENUM_LIMIT * 1000 {
            return u128::MAX;
        }
    }
    acc
}

fn for_each_subset(
    n: usize,
    tau: usize,
    mut visit: impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut idx: Vec<usize> = (0..tau).collect();
    loop {
        visit(&idx)?;
        // Advance lexicographically.
        let mut i = tau;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] != i + n - tau {
                break;
            }
            if i == 0 {
                return Ok(());
            }
        }
        idx[i] += 1;
        for j in i + 1..tau {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact `E f(x + Σ_{i∈Ŝ} qᵢ eᵢ)` by enumerating every size-`tau` subset.
fn eso_lhs_enumerated(p: &Problem, x: &[f64], xq: &[f64], tau: usize) -> Result<(f64, f64, usize)> {
    let n = x.len();
    let count = binomial(n, tau);
    let mut total = 0.0;
    let mut patched = x.to_vec();
    for_each_subset(n, tau, |subset| {
        for &i in subset {
            patched[i] = xq[i];
        }
        total += p.eval(&patched)?;
        for &i in subset {
            patched[i] = x[i];
        }
        Ok(())
    })?;
    Ok((total / count as f64, 0.0, count as usize))
}

/// Monte-Carlo `E f(x + Σ_{i∈Ŝ} qᵢ eᵢ)` with a three-standard-error margin.
fn eso_lhs_monte_carlo<R: Rng + ?Sized>(
    p: &Problem,
    cert: &EsoCertificate,
    x: &[f64],
    xq: &[f64],
    n_mc: usize,
    rng: &mut R,
) -> Result<(f64, f64, usize)> {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut patched = x.to_vec();
    for _ in 0..n_mc {
        let subset = cert.sampling.draw(rng);
        for &i in &subset {
            patched[i] = xq[i];
        }
        let f = p.eval(&patched)?;
        for &i in &subset {
            patched[i] = x[i];
        }
        sum += f;
        sum_sq += f * f;
    }
    let mean = sum / n_mc as f64;
    let var = (sum_sq / n_mc as f64 - mean * mean).max(0.0);
    Ok((mean, 3.0 * (var / n_mc as f64).sqrt(), n_mc))
}

/// ESO inequality at one `(x, q)`:
/// `E f(x + Σ_{i∈Ŝ} qᵢ eᵢ) ≤ f(x) + ⟨∇f(x), q⟩_p + D_h(x+q, x)_{p∘v}`.
///
/// The expectation is exact by subset enumeration whenever `C(n, τ)` is small
/// enough; otherwise Monte Carlo with a three-standard-error margin.
pub fn check_eso<R: Rng + ?Sized>(
    p: &Problem,
    cert: &EsoCertificate,
    x: &[f64],
    q: &[f64],
    n_mc: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let n = p.dim();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.len(),
        });
    }
    let xq: Vec<f64> = x.iter().zip(q).map(|(a, b)| a + b).collect();
    p.h.check_domain(x)?;
    p.h.check_domain(&xq)?;

    let p0 = cert.sampling.p0();
    let fx = p.eval(x)?;
    let g = p.grad(x)?;
    let mut rhs = fx + p0 * dot(&g, q);
    for i in 0..n {
        rhs += p0 * cert.v[i] * bregman_component(p.h.component(i), xq[i], x[i]);
    }

    let tau = cert.sampling.tau();
    let count = binomial(n, tau);
    let (lhs, margin, samples) = if count <= ENUM_LIMIT {
        eso_lhs_enumerated(p, x, &xq, tau)?
    } else {
        eso_lhs_monte_carlo(p, cert, x, &xq, n_mc, rng)?
    };

    let scale = 1.0 + fx.abs();
    let slack = (rhs - lhs + margin) / scale;
    let witness = Witness {
        x: x.to_vec(),
        y: Some(q.to_vec()),
        detail: format!("E f = {lhs}, rhs = {rhs}, margin = {margin}"),
    };
    Ok(CheckReport::from_worst(
        "eso",
        samples,
        SLACK_TOL,
        slack,
        Some(witness),
    ))
}

/// ESO check over sampled `(x, q)` pairs; `q` is a domain-preserving
/// displacement toward another sampled point.
pub fn check_eso_sampled<R: Rng + ?Sized>(
    p: &Problem,
    cert: &EsoCertificate,
    n_points: usize,
    n_mc: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut samples = 0;
    for _ in 0..n_points {
        let x = sample_domain_point(p, 1.0, rng);
        let target = sample_domain_point(p, 1.0, rng);
        let q: Vec<f64> = target.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        let report = check_eso(p, cert, &x, &q, n_mc, rng)?;
        samples += report.samples;
        if report.worst_slack < worst {
            worst = report.worst_slack;
            witness = report.witness.or(Some(Witness {
                x,
                y: Some(q),
                detail: "eso sample".into(),
            }));
        }
    }
    Ok(CheckReport::from_worst(
        "eso_sampled",
        samples,
        SLACK_TOL,
        worst,
        witness,
    ))
}

/// Three-point property at `z₊ = argmin ⟨c, x⟩ + D_h(x, z)` over `Q`:
/// `φ(x) + D_h(x, z) ≥ φ(z₊) + D_h(z₊, z) + D_h(x, z₊)` for every test point.
pub fn check_three_point(
    h: &ReferenceFunction,
    set: &FeasibleSet,
    z: &[f64],
    c: &[f64],
    test_points: &[Vec<f64>],
) -> Result<CheckReport> {
    let z_plus = mirror_step(h, set, z, c, StepSizes::Uniform(1.0), None)?.point;
    let phi = |x: &[f64]| dot(c, x);
    let base = phi(&z_plus) + bregman(h, &z_plus, z)?;
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for x in test_points {
        let lhs = phi(x) + bregman(h, x, z)?;
        let rhs = base + bregman(h, x, &z_plus)?;
        let scale = 1.0 + phi(x).abs() + bregman(h, x, z)?;
        let slack = (lhs - rhs) / scale;
        if slack < worst {
            worst = slack;
            witness = Some(Witness {
                x: x.clone(),
                y: None,
                detail: format!("lhs {lhs} vs rhs {rhs}"),
            });
        }
    }
    Ok(CheckReport::from_worst(
        "three_point",
        test_points.len(),
        SLACK_TOL,
        worst,
        witness,
    ))
}

/// Weighted three-point property for the per-coordinate-stepsize mirror step
/// (the equal-marginal probability factor scales out of both sides).
pub fn check_three_point_weighted(
    h: &ReferenceFunction,
    set: &FeasibleSet,
    z: &[f64],
    c: &[f64],
    v: &[f64],
    test_points: &[Vec<f64>],
) -> Result<CheckReport> {
    let z_plus = mirror_step(h, set, z, c, StepSizes::PerCoord(v), None)?.point;
    let phi = |x: &[f64]| dot(c, x);
    let base = phi(&z_plus) + weighted_bregman(h, &z_plus, z, v)?;
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for x in test_points {
        let lhs = phi(x) + weighted_bregman(h, x, z, v)?;
        let rhs = base + weighted_bregman(h, x, &z_plus, v)?;
        let scale = 1.0 + phi(x).abs() + weighted_bregman(h, x, z, v)?;
        let slack = (lhs - rhs) / scale;
        if slack < worst {
            worst = slack;
            witness = Some(Witness {
                x: x.clone(),
                y: None,
                detail: format!("lhs {lhs} vs rhs {rhs}"),
            });
        }
    }
    Ok(CheckReport::from_worst(
        "three_point_weighted",
        test_points.len(),
        SLACK_TOL,
        worst,
        witness,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        d_optimal_design, poisson_kl, quad_quartic, quadratic, regularized_poisson,
        scaled_reference, RowMatrix,
    };
    use crate::sampling::{stream_rng, Sampling};

    fn small_quad_quartic(n: usize, seed: u64) -> Problem {
        let mut rng = stream_rng(seed, 0);
        let a = RowMatrix::from_fn(n, n, |_, _| {
            let u: f64 = rand_distr::StandardNormal.sample(&mut rng);
            u
        });
        // Symmetrize and normalize to unit spectral radius.
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a.get(k, i) * a.get(k, j);
                }
                g[i * n + j] = acc;
            }
        }
        let gm = RowMatrix::new(n, n, g).unwrap();
        let eig = gm.to_nalgebra().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let m = RowMatrix::from_fn(n, n, |i, j| gm.get(i, j) / lmax);
        quad_quartic(m, 0.1).unwrap()
    }

    #[test]
    fn gradient_fd_quadratic_is_exact() {
        let m = RowMatrix::from_fn(
            3,
            3,
            |i, j| if i == j { 0.5 + i as f64 * 0.1 } else { 0.05 },
        );
        let p = quadratic(m).unwrap();
        let points = vec![vec![1.0, -2.0, 0.5], vec![0.1, 0.1, 0.1]];
        let report = check_gradient_fd(&p, &points, 1e-6, 1e-6).unwrap();
        assert!(report.pass, "worst slack {}", report.worst_slack);
    }

    #[test]
    fn gradient_fd_poisson_and_d_optimal() {
        let a = RowMatrix::new(3, 2, vec![1.0, 0.3, 0.4, 2.0, 0.7, 0.9]).unwrap();
        let p = poisson_kl(a, vec![1.0, 0.5, 2.0]).unwrap();
        let report = check_gradient_fd(&p, &[vec![1.0, 1.0], vec![0.4, 2.5]], 1e-6, 1e-6).unwrap();
        assert!(report.pass);

        let h = RowMatrix::new(2, 4, vec![1.0, 0.2, -0.5, 0.9, 0.1, 1.3, 0.8, -0.2]).unwrap();
        let p = d_optimal_design(h).unwrap();
        let mut rng = stream_rng(5, 0);
        let pts: Vec<Vec<f64>> = (0..4)
            .map(|_| sample_domain_point(&p, 1.0, &mut rng))
            .collect();
        let report = check_gradient_fd(&p, &pts, 1e-6, 1e-6).unwrap();
        assert!(report.pass, "worst slack {}", report.worst_slack);
    }

    #[test]
    fn relative_smoothness_certificates_pass() {
        let mut rng = stream_rng(11, 0);
        let qq = small_quad_quartic(5, 3);
        let r = check_relative_smoothness(&qq, qq.smoothness, 500, &mut rng).unwrap();
        assert!(r.pass, "quad_quartic slack {}", r.worst_slack);

        let a = RowMatrix::new(3, 3, vec![1.0, 0.2, 0.0, 0.5, 1.5, 0.3, 0.0, 0.4, 0.8]).unwrap();
        let poisson = poisson_kl(a.clone(), vec![1.0, 2.0, 0.5]).unwrap();
        let r = check_relative_smoothness(&poisson, poisson.smoothness, 500, &mut rng).unwrap();
        assert!(r.pass, "poisson slack {}", r.worst_slack);

        let reg = regularized_poisson(a, vec![1.0, 2.0, 0.5], 0.1).unwrap();
        let r = check_relative_smoothness(&reg, reg.smoothness, 500, &mut rng).unwrap();
        assert!(r.pass, "regularized slack {}", r.worst_slack);

        let h = RowMatrix::new(2, 4, vec![1.0, 0.2, -0.5, 0.9, 0.1, 1.3, 0.8, -0.2]).unwrap();
        let dopt = d_optimal_design(h).unwrap();
        let r = check_relative_smoothness(&dopt, 1.0, 1000, &mut rng).unwrap();
        assert!(r.pass, "d-optimal slack {}", r.worst_slack);
    }

    #[test]
    fn relative_smoothness_broken_certificate_fails_with_witness() {
        let mut rng = stream_rng(13, 0);
        let qq = small_quad_quartic(5, 3);
        let r = check_relative_smoothness(&qq, qq.smoothness / 10.0, 500, &mut rng).unwrap();
        assert!(!r.pass);
        assert!(r.worst_slack < 0.0);
        assert!(r.witness.is_some());
    }

    #[test]
    fn exact_model_has_zero_smoothness_slack() {
        // f = L h: both sides of the inequality agree exactly.
        let h = ReferenceFunction::quad_quartic(3, 0.2);
        let p = scaled_reference(h, 2.0, FeasibleSet::FullSpace).unwrap();
        let mut rng = stream_rng(17, 0);
        let r = check_relative_smoothness(&p, 2.0, 200, &mut rng).unwrap();
        assert!(r.pass);
        assert!(r.worst_slack.abs() <= 1e-10, "slack {}", r.worst_slack);
    }

    #[test]
    fn strong_convexity_checks() {
        let mut rng = stream_rng(19, 0);
        // mu = 0 is plain convexity and passes everywhere.
        let qq = small_quad_quartic(4, 7);
        let r =
            check_relative_strong_convexity(&qq, ConvexityCertificate::Scalar(0.0), 400, &mut rng)
                .unwrap();
        assert!(r.pass);

        let a = RowMatrix::new(2, 2, vec![1.0, 0.5, 0.3, 1.2]).unwrap();
        let reg = regularized_poisson(a, vec![1.0, 0.7], 0.25).unwrap();
        let r = check_relative_strong_convexity(
            &reg,
            ConvexityCertificate::Scalar(reg.strong_convexity),
            400,
            &mut rng,
        )
        .unwrap();
        assert!(r.pass, "regularized poisson mu slack {}", r.worst_slack);

        // Vector w = mu 1 agrees with the scalar check.
        let w = vec![reg.strong_convexity; 2];
        let mut rng_a = stream_rng(23, 0);
        let mut rng_b = stream_rng(23, 0);
        let scalar = check_relative_strong_convexity(
            &reg,
            ConvexityCertificate::Scalar(reg.strong_convexity),
            200,
            &mut rng_a,
        )
        .unwrap();
        let vector = check_relative_strong_convexity(
            &reg,
            ConvexityCertificate::Vector(&w),
            200,
            &mut rng_b,
        )
        .unwrap();
        assert!((scalar.worst_slack - vector.worst_slack).abs() < 1e-12);
    }

    #[test]
    fn eso_full_sampling_reduces_to_smoothness() {
        let qq = small_quad_quartic(4, 9);
        let cert = qq
            .eso_certificate(Sampling::tau_nice(4, 4).unwrap())
            .unwrap();
        let mut rng = stream_rng(29, 0);
        let x = vec![0.5, -0.2, 0.1, 0.3];
        let q = vec![0.2, 0.4, -0.1, 0.0];
        let r = check_eso(&qq, &cert, &x, &q, 100, &mut rng).unwrap();
        assert!(r.pass);
        assert_eq!(r.samples, 1); // single deterministic subset
    }

    #[test]
    fn eso_single_uniform_enumeration_passes() {
        let qq = small_quad_quartic(4, 9);
        let cert = qq
            .eso_certificate(Sampling::single_uniform(4).unwrap())
            .unwrap();
        let mut rng = stream_rng(31, 0);
        let r = check_eso_sampled(&qq, &cert, 40, 0, &mut rng).unwrap();
        assert!(r.pass, "worst slack {}", r.worst_slack);
        assert_eq!(r.samples, 40 * 4);
    }

    #[test]
    fn eso_shrunken_v_fails_along_top_eigenvector() {
        // Correlated quadratic with halved v: at small scale the inequality
        // survives coordinate-aligned displacements but breaks along the
        // dominant eigenvector, which couples the coordinates.
        let n = 4;
        let m = RowMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.9 });
        let eig = m.to_nalgebra().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let mnorm = RowMatrix::from_fn(n, n, |i, j| m.get(i, j) / lmax);
        let p = quad_quartic(mnorm.clone(), 0.1).unwrap();
        // Full sampling makes the check the deterministic overapproximation.
        let sampling = Sampling::tau_nice(n, n).unwrap();
        let good = p.eso_vector(&sampling).unwrap();
        let bad: Vec<f64> = good.iter().map(|v| 0.5 * v).collect();
        let cert = EsoCertificate::new(sampling, bad, p.smoothness).unwrap();

        // Oracle for the violating direction: power iteration on M.
        let mut q = vec![1.0; n];
        for _ in 0..100 {
            let next = mnorm.matvec(&q);
            let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
            q = next.into_iter().map(|v| v / norm).collect();
        }
        let scale = 0.1;
        let q_top: Vec<f64> = q.iter().map(|v| scale * v).collect();
        let x = vec![0.0; n];
        let mut rng = stream_rng(37, 0);
        let r = check_eso(&p, &cert, &x, &q_top, 0, &mut rng).unwrap();
        assert!(!r.pass, "expected violation, slack {}", r.worst_slack);

        // The same scale along a coordinate axis stays feasible.
        let mut q_axis = vec![0.0; n];
        q_axis[0] = scale;
        let r = check_eso(&p, &cert, &x, &q_axis, 0, &mut rng).unwrap();
        assert!(
            r.pass,
            "axis displacement should pass, slack {}",
            r.worst_slack
        );
    }

    #[test]
    fn eso_enumeration_and_monte_carlo_agree() {
        let qq = small_quad_quartic(6, 21);
        let sampling = Sampling::tau_nice(6, 2).unwrap();
        let cert = qq.eso_certificate(sampling).unwrap();
        let x = vec![0.4, -0.2, 0.7, 0.1, -0.5, 0.3];
        let q = vec![0.3, 0.5, -0.2, 0.4, 0.1, -0.3];
        let xq: Vec<f64> = x.iter().zip(&q).map(|(a, b)| a + b).collect();
        let (exact, _, n_subsets) = eso_lhs_enumerated(&qq, &x, &xq, 2).unwrap();
        assert_eq!(n_subsets, 15);
        let mut rng = stream_rng(53, 0);
        let (mc, margin, _) = eso_lhs_monte_carlo(&qq, &cert, &x, &xq, 4000, &mut rng).unwrap();
        assert!(
            (mc - exact).abs() <= margin.max(1e-12),
            "MC mean {mc} vs exact {exact} (3se margin {margin})"
        );
    }

    #[test]
    fn eso_poisson_certificate_passes_any_sampling() {
        let a = RowMatrix::new(2, 3, vec![1.0, 0.4, 0.2, 0.3, 1.5, 0.8]).unwrap();
        let p = poisson_kl(a, vec![1.0, 0.6]).unwrap();
        let cert = p
            .eso_certificate(Sampling::tau_nice(3, 2).unwrap())
            .unwrap();
        let mut rng = stream_rng(41, 0);
        let r = check_eso_sampled(&p, &cert, 30, 0, &mut rng).unwrap();
        assert!(r.pass, "worst slack {}", r.worst_slack);
    }

    #[test]
    fn three_point_property_euclidean_and_burg() {
        // Euclidean case: the inequality is the cosine-law identity.
        let h = ReferenceFunction::squared_half(3);
        let z = vec![0.5, -0.2, 1.0];
        let c = vec![1.0, 0.3, -0.7];
        let mut rng = stream_rng(43, 0);
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let u: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        2.0 * u
                    })
                    .collect()
            })
            .collect();
        let r = check_three_point(&h, &FeasibleSet::FullSpace, &z, &c, &pts).unwrap();
        assert!(r.pass);
        assert!(
            r.worst_slack.abs() <= 1e-10,
            "euclidean slack {}",
            r.worst_slack
        );

        // Burg + simplex exercises the dual bisection inside the step.
        let h = ReferenceFunction::burg_log(3);
        let z = vec![0.3, 0.3, 0.4];
        let c = vec![0.5, -1.0, 0.2];
        let simplex_pts: Vec<Vec<f64>> = (0..1000)
            .map(|_| {
                let mut x: Vec<f64> = (0..3)
                    .map(|_| {
                        let e: f64 = rng.random_range(-2.0..2.0);
                        10f64.powf(e)
                    })
                    .collect();
                let s: f64 = x.iter().sum();
                for v in x.iter_mut() {
                    *v /= s;
                }
                x
            })
            .collect();
        let r = check_three_point(&h, &FeasibleSet::Simplex, &z, &c, &simplex_pts).unwrap();
        assert!(r.pass, "burg simplex slack {}", r.worst_slack);
    }

    #[test]
    fn three_point_at_the_minimizer_is_tight() {
        let h = ReferenceFunction::burg_log(2);
        let z = vec![1.0, 2.0];
        let c = vec![0.4, 0.1];
        let z_plus = mirror_step(
            &h,
            &FeasibleSet::PositiveOrthant,
            &z,
            &c,
            StepSizes::Uniform(1.0),
            None,
        )
        .unwrap()
        .point;
        let r = check_three_point(
            &h,
            &FeasibleSet::PositiveOrthant,
            &z,
            &c,
            std::slice::from_ref(&z_plus),
        )
        .unwrap();
        assert!(r.pass);
        assert!(r.worst_slack.abs() <= 1e-12);
    }

    #[test]
    fn weighted_three_point_holds() {
        let h = ReferenceFunction::quad_quartic(3, 0.15);
        let z = vec![0.4, -0.8, 0.2];
        let c = vec![1.0, -0.5, 0.3];
        let v = vec![0.5, 1.0, 2.0];
        let mut rng = stream_rng(47, 0);
        let pts: Vec<Vec<f64>> = (0..500)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let u: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        1.5 * u
                    })
                    .collect()
            })
            .collect();
        let r = check_three_point_weighted(&h, &FeasibleSet::FullSpace, &z, &c, &v, &pts).unwrap();
        assert!(r.pass, "weighted tpp slack {}", r.worst_slack);
    }
}
