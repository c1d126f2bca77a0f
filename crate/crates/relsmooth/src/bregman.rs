//! Reference functions, Bregman distances and mirror-step subproblem solvers.
//!
//! A reference function is a separable, strictly convex `h(x) = Σᵢ hᵢ(xᵢ)`.
//! It induces the Bregman distance `D_h(x, y) = h(x) − h(y) − ⟨∇h(y), x − y⟩`,
//! which is nonnegative and zero exactly at `x = y`, but generally asymmetric.
//! Mirror steps minimize `⟨g, z⟩ + Σᵢ Lᵢ D_{hᵢ}(zᵢ, xᵢ)` over a feasible set;
//! for separable `h` this reduces to inverting the component gradients, plus a
//! scalar dual solve on the simplex.

use crate::error::{Error, Result};

/// Residual tolerance for inverting a component gradient, relative to `1 + |c|`.
const INVERT_TOL: f64 = 1e-14;
/// Constraint tolerance for the simplex multiplier solve.
const SIMPLEX_TOL: f64 = 1e-12;
const MAX_BISECT: usize = 200;

/// One separable component of a reference function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    /// `h(z) = z²/2` on all of ℝ.
    SquaredHalf,
    /// Burg entropy component `h(z) = −log z` on `z > 0`.
    BurgLog,
    /// `h(z) = z²/2 + a·z⁴` with `a > 0`, on all of ℝ.
    QuadraticPlusQuartic(f64),
}

impl Component {
    pub fn contains(&self, z: f64) -> bool {
        match self {
            Component::BurgLog => z > 0.0,
            _ => z.is_finite(),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Component::SquaredHalf => 0.5 * z * z,
            Component::BurgLog => -z.ln(),
            Component::QuadraticPlusQuartic(a) => 0.5 * z * z + a * z.powi(4),
        }
    }

    pub fn grad(&self, z: f64) -> f64 {
        match self {
            Component::SquaredHalf => z,
            Component::BurgLog => -1.0 / z,
            Component::QuadraticPlusQuartic(a) => z + 4.0 * a * z.powi(3),
        }
    }

    /// Second derivative, used for local strong-convexity estimates.
    pub fn grad2(&self, z: f64) -> f64 {
        match self {
            Component::SquaredHalf => 1.0,
            Component::BurgLog => 1.0 / (z * z),
            Component::QuadraticPlusQuartic(a) => 1.0 + 12.0 * a * z * z,
        }
    }

    /// Supremum of the gradient range (`0` for Burg, `+∞` otherwise).
    /// The gradient equation `h'(z) = c` is solvable iff `c` lies below it.
    pub fn grad_range_sup(&self) -> f64 {
        match self {
            Component::BurgLog => 0.0,
            _ => f64::INFINITY,
        }
    }

    pub fn target_feasible(&self, c: f64) -> bool {
        c < self.grad_range_sup()
    }

    /// Solves `h'(z) = c` for `z` in the component domain.
    ///
    /// SquaredHalf and BurgLog invert in closed form. The quartic component
    /// solves the strictly increasing cubic `z + 4a·z³ = c` by safeguarded
    /// Newton on the bracket `[min(0,c), max(0,c)]`, which always contains the
    /// root since `sign(c + 4ac³ − c) = sign(c)`.
    pub fn invert_grad(&self, c: f64) -> Result<f64> {
        match self {
            Component::SquaredHalf => Ok(c),
            Component::BurgLog => {
                if c >= 0.0 {
                    Err(Error::OutOfRange { value: c })
                } else {
                    Ok(-1.0 / c)
                }
            }
            Component::QuadraticPlusQuartic(a) => Ok(invert_cubic(*a, c)),
        }
    }
}

/// Root of `z + 4a·z³ = c` by safeguarded Newton with bisection fallback.
fn invert_cubic(a: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = if c > 0.0 { (0.0, c) } else { (c, 0.0) };
    // For large |c| the cubic term dominates; start near its root.
    let mut z = if 4.0 * a * c * c > 1.0 {
        (c / (4.0 * a)).cbrt()
    } else {
        c
    };
    let tol = INVERT_TOL * (1.0 + c.abs());
    for _ in 0..MAX_BISECT {
        let resid = z + 4.0 * a * z.powi(3) - c;
        if resid.abs() <= tol {
            return z;
        }
        if resid > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let deriv = 1.0 + 12.0 * a * z * z;
        let newton = z - resid / deriv;
        z = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * (1.0 + z.abs()) {
            return z;
        }
    }
    z
}

/// Separable strictly convex reference function, one component per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFunction {
    components: Vec<Component>,
}

impl ReferenceFunction {
    pub fn new(components: Vec<Component>) -> Self {
        assert!(!components.is_empty(), "reference function needs n >= 1");
        Self { components }
    }

    pub fn uniform(n: usize, component: Component) -> Self {
        Self::new(vec![component; n])
    }

    pub fn squared_half(n: usize) -> Self {
        Self::uniform(n, Component::SquaredHalf)
    }

    pub fn burg_log(n: usize) -> Self {
        Self::uniform(n, Component::BurgLog)
    }

    pub fn quad_quartic(n: usize, a: f64) -> Self {
        assert!(a > 0.0, "quartic coefficient must be positive");
        Self::uniform(n, Component::QuadraticPlusQuartic(a))
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> Component {
        self.components[i]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Closed-form symmetry measure where known: 1 for pure Euclidean geometry.
    pub fn symmetry_closed_form(&self) -> Option<f64> {
        if self
            .components
            .iter()
            .all(|c| matches!(c, Component::SquaredHalf))
        {
            Some(1.0)
        } else {
            None
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x.len())?;
        for (i, (&z, comp)) in x.iter().zip(&self.components).enumerate() {
            if !comp.contains(z) {
                return Err(Error::Domain { index: i, value: z });
            }
        }
        Ok(())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

/// Evaluates `h(x) = Σᵢ hᵢ(xᵢ)`.
pub fn eval_h(h: &ReferenceFunction, x: &[f64]) -> Result<f64> {
    h.check_domain(x)?;
    Ok(x.iter().zip(h.components()).map(|(&z, c)| c.eval(z)).sum())
}

/// Gradient of `h`, coordinate `i` equal to `hᵢ'(xᵢ)`.
pub fn grad_h(h: &ReferenceFunction, x: &[f64]) -> Result<Vec<f64>> {
    h.check_domain(x)?;
    Ok(x.iter()
        .zip(h.components())
        .map(|(&z, c)| c.grad(z))
        .collect())
}

/// Bregman distance of a single component.
pub fn bregman_component(comp: Component, x: f64, y: f64) -> f64 {
    let d = comp.eval(x) - comp.eval(y) - comp.grad(y) * (x - y);
    // Nonnegative by convexity; negative values are rounding noise.
    d.max(0.0)
}

/// Bregman distance `D_h(x, y) = h(x) − h(y) − ⟨∇h(y), x − y⟩`.
pub fn bregman(h: &ReferenceFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    h.check_domain(x)?;
    h.check_domain(y)?;
    Ok(x.iter()
        .zip(y)
        .zip(h.components())
        .map(|((&xi, &yi), c)| bregman_component(*c, xi, yi))
        .sum())
}

/// Coordinate-weighted Bregman distance `D_h(x, y)_v = Σᵢ vᵢ D_{hᵢ}(xᵢ, yᵢ)`.
pub fn weighted_bregman(h: &ReferenceFunction, x: &[f64], y: &[f64], v: &[f64]) -> Result<f64> {
    h.check_domain(x)?;
    h.check_domain(y)?;
    if v.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: v.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .zip(v)
        .zip(h.components())
        .map(|(((&xi, &yi), &vi), c)| vi * bregman_component(*c, xi, yi))
        .sum())
}

/// Solves `hᵢ'(z) = c` for the given component; see [`Component::invert_grad`].
pub fn invert_grad_coordinate(component: Component, c: f64) -> Result<f64> {
    component.invert_grad(c)
}

/// Closed convex feasible set, block separable except for the simplex.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    FullSpace,
    PositiveOrthant,
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `⟨1, x⟩ = 1, x > 0`; only meaningful with Burg components.
    Simplex,
}

impl FeasibleSet {
    /// Per-coordinate closed interval; the simplex has no such description.
    fn bounds(&self, i: usize) -> (f64, f64) {
        match self {
            FeasibleSet::FullSpace => (f64::NEG_INFINITY, f64::INFINITY),
            FeasibleSet::PositiveOrthant => (0.0, f64::INFINITY),
            FeasibleSet::Box { lower, upper } => (lower[i], upper[i]),
            FeasibleSet::Simplex => unreachable!("simplex has no box bounds"),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let FeasibleSet::Box { lower, upper } = self {
            if lower.len() != n || upper.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: lower.len().min(upper.len()),
                });
            }
            for i in 0..n {
                if lower[i] > upper[i] {
                    return Err(Error::Data(format!("empty box interval at {i}")));
                }
            }
        }
        Ok(())
    }
}

/// Per-coordinate stepsize parameters of a mirror step.
#[derive(Debug, Clone, Copy)]
pub enum StepSizes<'a> {
    /// One `L` for every coordinate (relGD / relRCDs).
    Uniform(f64),
    /// Coordinate-dependent `vᵢ`, indexed by full coordinate index (relRCD).
    PerCoord(&'a [f64]),
}

impl StepSizes<'_> {
    fn at(&self, i: usize) -> f64 {
        match self {
            StepSizes::Uniform(l) => *l,
            StepSizes::PerCoord(v) => v[i],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            StepSizes::Uniform(l) => {
                if !(*l > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "stepsize L = {l} must be > 0"
                    )));
                }
            }
            StepSizes::PerCoord(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: v.len(),
                    });
                }
                if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
                    return Err(Error::InvalidParams(format!(
                        "stepsize vector entry {bad} must be > 0"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Result of a mirror step: the minimizer and, on the simplex, the multiplier.
#[derive(Debug, Clone)]
pub struct MirrorStep {
    pub point: Vec<f64>,
    /// Dual multiplier of `⟨1, z⟩ = 1`; `None` off the simplex.
    pub multiplier: Option<f64>,
}

/// Exact minimizer of `⟨g, z⟩ + Σᵢ Lᵢ D_{hᵢ}(zᵢ, xᵢ)` over `Q`, restricted to
/// the coordinates in `coords` (all coordinates when `None`).
///
/// Box-like sets solve `∇hᵢ(z) = ∇hᵢ(x) − gᵢ/Lᵢ` per coordinate and clip to
/// the nearest interval endpoint, valid by convexity and separability. The
/// simplex introduces a multiplier `λ` with `∇hᵢ(z) = ∇hᵢ(x) − (gᵢ + λ)/Lᵢ`,
/// and `λ` is found by bisection on the strictly monotone map `λ ↦ ⟨1, z(λ)⟩`.
///
/// Errors with [`Error::StepOutOfDomain`] when the subproblem infimum sits at
/// an open domain boundary (Burg components with `∇hᵢ(x) − gᵢ/Lᵢ ≥ 0` and no
/// finite upper bound to clip against).
pub fn mirror_step(
    h: &ReferenceFunction,
    set: &FeasibleSet,
    x: &[f64],
    g: &[f64],
    step: StepSizes<'_>,
    coords: Option<&[usize]>,
) -> Result<MirrorStep> {
    let n = h.dim();
    h.check_domain(x)?;
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.len(),
        });
    }
    set.validate(n)?;
    step.validate(n)?;

    let all: Vec<usize>;
    let moving: &[usize] = match coords {
        Some(c) => c,
        None => {
            all = (0..n).collect();
            &all
        }
    };

    if let FeasibleSet::Simplex = set {
        return simplex_step(h, x, g, step, moving);
    }

    let mut z = x.to_vec();
    for &i in moving {
        let comp = h.component(i);
        let li = step.at(i);
        let target = comp.grad(x[i]) - g[i] / li;
        let (lo, hi) = set.bounds(i);
        let unconstrained = if comp.target_feasible(target) {
            comp.invert_grad(target)?
        } else {
            // Objective strictly decreasing toward +inf; only a finite upper
            // bound can stop it.
            f64::INFINITY
        };
        let clipped = unconstrained.clamp(lo, hi);
        if !clipped.is_finite() {
            return Err(Error::StepOutOfDomain { index: i });
        }
        if !comp.contains(clipped) {
            return Err(Error::StepOutOfDomain { index: i });
        }
        z[i] = clipped;
    }
    Ok(MirrorStep {
        point: z,
        multiplier: None,
    })
}

/// Simplex-constrained mirror step via dual bisection.
fn simplex_step(
    h: &ReferenceFunction,
    x: &[f64],
    g: &[f64],
    step: StepSizes<'_>,
    moving: &[usize],
) -> Result<MirrorStep> {
    let fixed_sum: f64 = {
        let mut in_moving = vec![false; h.dim()];
        for &i in moving {
            in_moving[i] = true;
        }
        x.iter()
            .enumerate()
            .filter(|(i, _)| !in_moving[*i])
            .map(|(_, &v)| v)
            .sum()
    };

    if moving.is_empty() {
        return Ok(MirrorStep {
            point: x.to_vec(),
            multiplier: Some(0.0),
        });
    }

    // Lambda must keep each per-coordinate target inside the gradient range.
    let mut lambda_min = f64::NEG_INFINITY;
    for &i in moving {
        let comp = h.component(i);
        let sup = comp.grad_range_sup();
        if sup.is_finite() {
            let li = step.at(i);
            lambda_min = lambda_min.max(li * (comp.grad(x[i]) - sup) - g[i]);
        }
    }

    // Sum of the coordinates at multiplier lambda; +inf below lambda_min.
    let eval_sum = |lambda: f64| -> f64 {
        if lambda <= lambda_min {
            return f64::INFINITY;
        }
        let mut s = fixed_sum;
        for &i in moving {
            let comp = h.component(i);
            let li = step.at(i);
            let target = comp.grad(x[i]) - (g[i] + lambda) / li;
            match comp.invert_grad(target) {
                Ok(z) => s += z,
                Err(_) => return f64::INFINITY,
            }
        }
        s
    };

    // Bracket: s is strictly decreasing in lambda, so double outward from 0
    // (clamped above lambda_min) until the sum straddles 1.
    let start = if lambda_min.is_finite() && lambda_min >= -1.0 {
        lambda_min + 1.0
    } else {
        0.0
    };
    let s0 = eval_sum(start);
    let (mut lo, mut hi) = if s0 >= 1.0 {
        let mut lo = start;
        let mut stepw = 1.0 + start.abs();
        let mut hi = start + stepw;
        let mut its = 0;
        while eval_sum(hi) >= 1.0 {
            lo = hi;
            stepw *= 2.0;
            hi += stepw;
            its += 1;
            if its > MAX_BISECT {
                return Err(Error::NonConvergence(
                    "simplex multiplier bracket (upward)".into(),
                ));
            }
        }
        (lo, hi)
    } else {
        let hi = start;
        let mut lo;
        if lambda_min.is_finite() {
            let mut delta = start - lambda_min;
            let mut its = 0;
            loop {
                delta *= 0.5;
                lo = lambda_min + delta;
                if eval_sum(lo) > 1.0 {
                    break;
                }
                its += 1;
                if its > MAX_BISECT {
                    return Err(Error::NonConvergence(
                        "simplex multiplier bracket (toward lambda_min)".into(),
                    ));
                }
            }
        } else {
            let mut stepw = 1.0 + start.abs();
            lo = start - stepw;
            let mut its = 0;
            while eval_sum(lo) <= 1.0 {
                stepw *= 2.0;
                lo -= stepw;
                its += 1;
                if its > MAX_BISECT {
                    return Err(Error::NonConvergence(
                        "simplex multiplier bracket (downward)".into(),
                    ));
                }
            }
        }
        (lo, hi)
    };

    let mut lambda = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..MAX_BISECT {
        lambda = 0.5 * (lo + hi);
        let s = eval_sum(lambda);
        if (s - 1.0).abs() <= SIMPLEX_TOL {
            converged = true;
            break;
        }
        if s > 1.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
    }
    if !converged {
        let s = eval_sum(lambda);
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NonConvergence(format!(
                "simplex multiplier bisection stalled at |sum-1| = {:.3e}",
                (s - 1.0).abs()
            )));
        }
    }

    let mut z = x.to_vec();
    for &i in moving {
        let comp = h.component(i);
        let li = step.at(i);
        let target = comp.grad(x[i]) - (g[i] + lambda) / li;
        z[i] = comp.invert_grad(target)?;
    }
    Ok(MirrorStep {
        point: z,
        multiplier: Some(lambda),
    })
}

/// Sample-based upper bound on the symmetry measure
/// `α(h) = inf_{x≠y} D_h(x,y) / D_h(y,x)`.
///
/// This is an estimate over `n_samples` sampled pairs, not the infimum.
pub fn symmetry_measure_estimate<R, S>(
    h: &ReferenceFunction,
    mut domain_sampler: S,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64>
where
    R: rand::Rng,
    S: FnMut(&mut R) -> (Vec<f64>, Vec<f64>),
{
    assert!(n_samples >= 1);
    let mut best = f64::INFINITY;
    for _ in 0..n_samples {
        let (x, y) = domain_sampler(rng);
        let forward = bregman(h, &x, &y)?;
        let backward = bregman(h, &y, &x)?;
        if backward == 0.0 {
            continue;
        }
        best = best.min(forward / backward);
    }
    Ok(best)
}
