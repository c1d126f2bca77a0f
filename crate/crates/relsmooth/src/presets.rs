//! Built-in experiment presets: the two standard comparison setups,
//! coordinate descent on a quadratic-plus-quartic objective and stochastic
//! descent on a Poisson inverse problem.

use rand_distr::{Distribution, StandardNormal};

use crate::algorithms::{relgd, StepsizeSchedule};
use crate::error::Result;
use crate::problems::{
    poisson_kl, quad_quartic_euclidean, quad_quartic_split, EsoCertificate, Problem, RowMatrix,
};
use crate::sampling::{stream_rng, Sampling};

/// Coordinate-descent comparison: relGD and relRCD in the quartic geometry
/// against classical gradient descent with its restricted-domain Lipschitz
/// constant.
#[derive(Debug, Clone)]
pub struct Figure1 {
    /// `f(x) = ½xᵀMx + 0.1 Σ xᵢ⁴` with reference `½‖x‖² + Σ xᵢ⁴`, `L = 1`.
    pub problem: Problem,
    /// The same objective in the Euclidean geometry, carrying the
    /// restricted-domain smoothness constant (order `‖x₀‖∞²`).
    pub gd_problem: Problem,
    pub x0: Vec<f64>,
    /// Single-coordinate ESO certificate with `vᵢ = max(0.1, Mᵢᵢ)`.
    pub eso: EsoCertificate,
    pub gd_smoothness: f64,
}

/// `AᵀA / λmax(AᵀA)` for a square standard-normal `A`: a random positive
/// semidefinite matrix with unit spectral radius.
pub fn random_normalized_gram<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> RowMatrix {
    let a = RowMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a.get(k, i) * a.get(k, j);
            }
            gram[i * n + j] = acc;
            gram[j * n + i] = acc;
        }
    }
    let gram = RowMatrix::new(n, n, gram).expect("square gram");
    let eig = gram.to_nalgebra().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    RowMatrix::from_fn(n, n, |i, j| gram.get(i, j) / lmax)
}

/// `M = AᵀA / λmax(AᵀA)` for a square standard-normal `A`, plus an initial
/// point with per-coordinate variance `1e6`.
pub fn figure1(n: usize, instance_seed: u64) -> Result<Figure1> {
    let mut rng = stream_rng(instance_seed, 0);
    let m = random_normalized_gram(n, &mut rng);

    // Quartic coefficient 0.1 in the objective and 1 in the reference keeps
    // the single-coordinate stepsizes v_i = max(0.1, M_ii) certified.
    let quartic = 0.1;
    let problem = quad_quartic_split(m.clone(), quartic, 1.0)?;

    let mut x_rng = stream_rng(instance_seed, 1);
    let x0: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = StandardNormal.sample(&mut x_rng);
            1e3 * u
        })
        .collect();

    // Classical smoothness on the box ||x||_inf^2 <= 2 ||x0||_inf^2:
    // lambda_max(M) + 12 * 0.1 * sup |x|^2.
    let x0_inf = x0.iter().fold(0.0f64, |mx, z| mx.max(z.abs()));
    let gd_smoothness = 1.0 + 12.0 * quartic * 2.0 * x0_inf * x0_inf;
    let gd_problem = quad_quartic_euclidean(m, quartic, gd_smoothness)?;

    let eso = problem.eso_certificate(Sampling::single_uniform(n)?)?;
    Ok(Figure1 {
        problem,
        gd_problem,
        x0,
        eso,
        gd_smoothness,
    })
}

/// Stochastic-descent comparison on the Poisson inverse problem, with the
/// stepsize schedules the study contrasts.
#[derive(Debug, Clone)]
pub struct Figure2 {
    pub problem: Problem,
    pub x0: Vec<f64>,
    /// Named schedules: constant `L`, constant `10L`, and `(L/10)√t`.
    pub schedules: Vec<(String, StepsizeSchedule)>,
}

/// `A`, `b`, `x₀` are absolute values of standard-normal draws.
pub fn figure2(m: usize, n: usize, instance_seed: u64) -> Result<Figure2> {
    let mut rng = stream_rng(instance_seed, 0);
    let a = RowMatrix::from_fn(m, n, |_, _| {
        let u: f64 = StandardNormal.sample(&mut rng);
        u.abs()
    });
    let mut b_rng = stream_rng(instance_seed, 1);
    let b: Vec<f64> = (0..m)
        .map(|_| {
            let u: f64 = StandardNormal.sample(&mut b_rng);
            u.abs().max(1e-3)
        })
        .collect();
    let mut x_rng = stream_rng(instance_seed, 2);
    let x0: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = StandardNormal.sample(&mut x_rng);
            u.abs().max(1e-3)
        })
        .collect();
    let problem = poisson_kl(a, b)?;
    let l = problem.smoothness;
    let schedules = vec![
        ("constant_l".to_string(), StepsizeSchedule::constant(l)?),
        (
            "constant_10l".to_string(),
            StepsizeSchedule::constant(10.0 * l)?,
        ),
        (
            "sqrt_l_over_10".to_string(),
            StepsizeSchedule::sqrt_growth(l / 10.0)?,
        ),
    ];
    Ok(Figure2 {
        problem,
        x0,
        schedules,
    })
}

/// Reference optimal value from a long relGD run at the certificate stepsize
/// (`multiplier` times the nominal budget); a surrogate, not exact.
pub fn reference_optimum(p: &Problem, x0: &[f64], budget: usize, multiplier: usize) -> Result<f64> {
    let trace = relgd(p, x0, p.smoothness, budget * multiplier)?;
    Ok(trace.final_objective())
}
