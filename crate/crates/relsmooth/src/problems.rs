//! Concrete objectives with gradient oracles and certificates: relative
//! smoothness `L`, relative strong convexity `mu` (or a per-coordinate vector
//! `w`), ESO stepsize vectors per sampling, and stochastic-noise levels.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bregman::{eval_h, grad_h, FeasibleSet, ReferenceFunction};
use crate::error::{Error, Result};
use crate::sampling::Sampling;

const SINGULAR_COND_LIMIT: f64 = 1e14;

/// Dense row-major matrix, the storage used by problem data and serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::Data(format!(
                "matrix shape {rows}x{cols} does not match {} entries",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`.
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (j, &aij) in self.row(i).iter().enumerate() {
                out[j] += aij * yi;
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Extreme eigenvalues of a symmetric matrix.
fn sym_eigen_range(m: &RowMatrix) -> (f64, f64) {
    let eig = m.to_nalgebra().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in eig.eigenvalues.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    (lo, hi)
}

/// The objective function kinds shipped with the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `f(x) = ½ xᵀMx + a Σᵢ xᵢ⁴` with reference `½‖x‖² + a_ref Σᵢ xᵢ⁴`
    /// (`a_ref = 0` means a Euclidean reference).
    QuadQuartic { m: RowMatrix, a: f64, a_ref: f64 },
    /// Poisson linear inverse problem `KL(Ax ‖ b)`, optionally with the
    /// logarithmic regularizer `mu_reg · (−Σ log xᵢ)`.
    PoissonKl {
        a: RowMatrix,
        b: Vec<f64>,
        mu_reg: f64,
    },
    /// D-optimal design `f(x) = −log det(H Diag(x) Hᵀ)` on the simplex.
    DOptimalDesign { h_mat: RowMatrix },
    /// Separable quadratic `½ Σ dᵢxᵢ²` with an additive-Gaussian-noise
    /// stochastic oracle of per-coordinate deviation `sigma`.
    NoisyQuadratic { diag: Vec<f64>, sigma: f64 },
    /// `f = factor · h`, the exact-model objective.
    ScaledReference { factor: f64 },
}

/// An objective bundled with its Bregman geometry and certificates.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub objective: Objective,
    pub h: ReferenceFunction,
    pub feasible_set: FeasibleSet,
    /// Relative smoothness certificate `L`.
    pub smoothness: f64,
    /// Relative strong convexity certificate `mu >= 0`.
    pub strong_convexity: f64,
    /// Per-coordinate strong convexity vector `w`, when sharper than `mu·1`.
    pub strong_convexity_weights: Option<Vec<f64>>,
    /// Noise level `sigma²` for the relSGD variance assumption, when known or
    /// estimated.
    pub noise_level: Option<f64>,
    pub optimum_value: Option<f64>,
    pub optimum_point: Option<Vec<f64>>,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.smoothness = l;
        self
    }

    pub fn with_noise_level(mut self, sigma2: f64) -> Self {
        self.noise_level = Some(sigma2);
        self
    }

    pub fn with_optimum(mut self, value: Option<f64>, point: Option<Vec<f64>>) -> Self {
        self.optimum_value = value;
        self.optimum_point = point;
        self
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.h.check_domain(x)?;
        match &self.objective {
            Objective::QuadQuartic { m, a, .. } => {
                let mx = m.matvec(x);
                let quad = 0.5 * dot(x, &mx);
                let quart: f64 = x.iter().map(|z| z.powi(4)).sum();
                Ok(quad + a * quart)
            }
            Objective::PoissonKl { a, b, mu_reg } => {
                let ax = a.matvec(x);
                let mut f = 0.0;
                for (i, (&axi, &bi)) in ax.iter().zip(b).enumerate() {
                    if axi <= 0.0 {
                        return Err(Error::Domain {
                            index: i,
                            value: axi,
                        });
                    }
                    f += bi * (bi / axi).ln() + axi - bi;
                }
                if *mu_reg > 0.0 {
                    f += mu_reg * x.iter().map(|z| -z.ln()).sum::<f64>();
                }
                Ok(f)
            }
            Objective::DOptimalDesign { h_mat } => {
                let (log_det, _) = d_optimal_factor(h_mat, x)?;
                Ok(-log_det)
            }
            Objective::NoisyQuadratic { diag, .. } => {
                Ok(0.5 * x.iter().zip(diag).map(|(z, d)| d * z * z).sum::<f64>())
            }
            Objective::ScaledReference { factor } => Ok(factor * eval_h(&self.h, x)?),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.h.check_domain(x)?;
        match &self.objective {
            Objective::QuadQuartic { m, a, .. } => {
                let mut g = m.matvec(x);
                for (gi, &z) in g.iter_mut().zip(x) {
                    *gi += 4.0 * a * z.powi(3);
                }
                Ok(g)
            }
            Objective::PoissonKl { a, b, mu_reg } => {
                let ax = a.matvec(x);
                let mut resid = vec![0.0; b.len()];
                for (i, (&axi, &bi)) in ax.iter().zip(b).enumerate() {
                    if axi <= 0.0 {
                        return Err(Error::Domain {
                            index: i,
                            value: axi,
                        });
                    }
                    resid[i] = 1.0 - bi / axi;
                }
                let mut g = a.tr_matvec(&resid);
                if *mu_reg > 0.0 {
                    for (gj, &z) in g.iter_mut().zip(x) {
                        *gj -= mu_reg / z;
                    }
                }
                Ok(g)
            }
            Objective::DOptimalDesign { h_mat } => {
                let (_, s_inv_quad) = d_optimal_factor(h_mat, x)?;
                Ok(s_inv_quad.iter().map(|&q| -q).collect())
            }
            Objective::NoisyQuadratic { diag, .. } => {
                Ok(x.iter().zip(diag).map(|(z, d)| d * z).collect())
            }
            Objective::ScaledReference { factor } => {
                let g = grad_h(&self.h, x)?;
                Ok(g.into_iter().map(|v| factor * v).collect())
            }
        }
    }

    /// Gradient restricted to `coords`, returned as a full-length vector with
    /// untouched coordinates left at zero.
    pub fn partial_grad(&self, x: &[f64], coords: &[usize]) -> Result<Vec<f64>> {
        self.h.check_domain(x)?;
        let n = self.dim();
        let mut g = vec![0.0; n];
        match &self.objective {
            Objective::QuadQuartic { m, a, .. } => {
                for &j in coords {
                    g[j] = dot(m.row(j), x) + 4.0 * a * x[j].powi(3);
                }
                Ok(g)
            }
            Objective::PoissonKl { a, b, mu_reg } => {
                let ax = a.matvec(x);
                for &j in coords {
                    let mut gj = 0.0;
                    for i in 0..a.rows() {
                        if ax[i] <= 0.0 {
                            return Err(Error::Domain {
                                index: i,
                                value: ax[i],
                            });
                        }
                        gj += a.get(i, j) * (1.0 - b[i] / ax[i]);
                    }
                    if *mu_reg > 0.0 {
                        gj -= mu_reg / x[j];
                    }
                    g[j] = gj;
                }
                Ok(g)
            }
            // Dense factorization dominates; reuse the full gradient.
            Objective::DOptimalDesign { .. } => {
                let full = self.grad(x)?;
                for &j in coords {
                    g[j] = full[j];
                }
                Ok(g)
            }
            Objective::NoisyQuadratic { diag, .. } => {
                for &j in coords {
                    g[j] = diag[j] * x[j];
                }
                Ok(g)
            }
            Objective::ScaledReference { factor } => {
                for &j in coords {
                    g[j] = factor * self.h.component(j).grad(x[j]);
                }
                Ok(g)
            }
        }
    }

    pub fn has_stochastic_oracle(&self) -> bool {
        matches!(
            self.objective,
            Objective::PoissonKl { .. } | Objective::NoisyQuadratic { .. }
        )
    }

    /// One unbiased stochastic-gradient draw.
    pub fn stochastic_grad_single<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        self.h.check_domain(x)?;
        match &self.objective {
            // m * gradient of a uniformly random row term; the deterministic
            // regularizer enters exactly.
            Objective::PoissonKl { a, b, mu_reg } => {
                let m_rows = a.rows();
                let i = rng.random_range(0..m_rows);
                let axi = dot(a.row(i), x);
                if axi <= 0.0 {
                    return Err(Error::Domain {
                        index: i,
                        value: axi,
                    });
                }
                let scale = m_rows as f64 * (1.0 - b[i] / axi);
                let mut g: Vec<f64> = a.row(i).iter().map(|&aij| aij * scale).collect();
                if *mu_reg > 0.0 {
                    for (gj, &z) in g.iter_mut().zip(x) {
                        *gj -= mu_reg / z;
                    }
                }
                Ok(g)
            }
            Objective::NoisyQuadratic { diag, sigma } => Ok(x
                .iter()
                .zip(diag)
                .map(|(z, d)| {
                    let noise: f64 = StandardNormal.sample(rng);
                    d * z + sigma * noise
                })
                .collect()),
            _ => Err(Error::OracleUnavailable),
        }
    }

    /// ESO stepsize vector for the given sampling, when certified.
    ///
    /// Single-coordinate sampling admits the componentwise-max rule on the
    /// quadratic-plus-quartic family; everything else falls back to the
    /// always-valid `L·1` (and the problems with sampling-independent
    /// certificates keep them for every sampling).
    pub fn eso_vector(&self, sampling: &Sampling) -> Option<Vec<f64>> {
        let n = self.dim();
        if sampling.dim() != n {
            return None;
        }
        match &self.objective {
            Objective::QuadQuartic { m, a, a_ref } => {
                if sampling.tau() == 1 && *a_ref > 0.0 {
                    let ratio = a / a_ref;
                    Some((0..n).map(|i| m.get(i, i).max(ratio)).collect())
                } else if self.smoothness.is_finite() {
                    Some(vec![self.smoothness; n])
                } else {
                    None
                }
            }
            Objective::PoissonKl { .. } => Some(vec![self.smoothness; n]),
            Objective::DOptimalDesign { .. } => Some(vec![1.0; n]),
            Objective::NoisyQuadratic { .. } | Objective::ScaledReference { .. } => {
                Some(vec![self.smoothness; n])
            }
        }
    }

    pub fn eso_certificate(&self, sampling: Sampling) -> Result<EsoCertificate> {
        let v = self
            .eso_vector(&sampling)
            .ok_or_else(|| Error::Certificate("no ESO vector for this sampling".into()))?;
        EsoCertificate::new(sampling, v, self.smoothness)
    }
}

/// `log det(H Diag(x) Hᵀ)` together with the quadratic forms `hᵢᵀ S⁻¹ hᵢ`.
#[allow(clippy::needless_range_loop)]
fn d_optimal_factor(h_mat: &RowMatrix, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = h_mat.rows();
    let n = h_mat.cols();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut s = DMatrix::<f64>::zeros(m, m);
    for j in 0..n {
        let xj = x[j];
        for r in 0..m {
            let hrj = h_mat.get(r, j);
            for c in 0..m {
                s[(r, c)] += xj * hrj * h_mat.get(c, j);
            }
        }
    }
    let eig = s.symmetric_eigen();
    let mut lmin = f64::INFINITY;
    let mut lmax = f64::NEG_INFINITY;
    for &l in eig.eigenvalues.iter() {
        lmin = lmin.min(l);
        lmax = lmax.max(l);
    }
    if lmin <= 0.0 || lmax / lmin > SINGULAR_COND_LIMIT {
        return Err(Error::Singular {
            cond: if lmin > 0.0 {
                lmax / lmin
            } else {
                f64::INFINITY
            },
        });
    }
    let log_det: f64 = eig.eigenvalues.iter().map(|l| l.ln()).sum();

    // hᵢᵀ S⁻¹ hᵢ = Σ_k (qₖᵀ hᵢ)² / λₖ
    let mut quad = vec![0.0; n];
    for k in 0..m {
        let qk = eig.eigenvectors.column(k);
        let lk = eig.eigenvalues[k];
        for j in 0..n {
            let mut proj = 0.0;
            for r in 0..m {
                proj += qk[r] * h_mat.get(r, j);
            }
            quad[j] += proj * proj / lk;
        }
    }
    Ok((log_det, quad))
}

/// Minibatch stochastic gradient: the average of `tau` independent draws.
pub fn stochastic_grad<R: Rng + ?Sized>(
    p: &Problem,
    x: &[f64],
    tau: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if tau == 0 {
        return Err(Error::InvalidParams("minibatch tau must be >= 1".into()));
    }
    let mut acc = p.stochastic_grad_single(x, rng)?;
    for _ in 1..tau {
        let g = p.stochastic_grad_single(x, rng)?;
        for (a, b) in acc.iter_mut().zip(g) {
            *a += b;
        }
    }
    let inv = 1.0 / tau as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    Ok(acc)
}

/// Heuristic noise level for the relSGD variance assumption: the Monte-Carlo
/// mean of `‖∇f − g̃‖²` divided by a local strong-convexity value of `h` at
/// `x`. Exact only where `h` is globally strongly convex; callers may
/// override.
pub fn estimate_sigma2<R: Rng + ?Sized>(
    p: &Problem,
    x: &[f64],
    n_mc: usize,
    rng: &mut R,
) -> Result<f64> {
    let full = p.grad(x)?;
    let mut mean_sq = 0.0;
    for _ in 0..n_mc {
        let g = p.stochastic_grad_single(x, rng)?;
        let sq: f64 = g.iter().zip(&full).map(|(a, b)| (a - b) * (a - b)).sum();
        mean_sq += sq;
    }
    mean_sq /= n_mc as f64;
    let mu_h_local = x
        .iter()
        .enumerate()
        .map(|(i, &z)| p.h.component(i).grad2(z))
        .fold(f64::INFINITY, f64::min);
    if !(mu_h_local > 0.0) {
        return Err(Error::InvalidParams(
            "reference function has no positive local curvature".into(),
        ));
    }
    Ok(mean_sq / mu_h_local)
}

/// ESO certificate `(f, Ŝ) ∼ ESO_h(v)` for a concrete sampling.
#[derive(Debug, Clone)]
pub struct EsoCertificate {
    pub sampling: Sampling,
    pub v: Vec<f64>,
}

impl EsoCertificate {
    /// Validates positivity and `vᵢ ≤ L` (relative smoothness always yields
    /// `v = L·1`, so anything above `L` is a certificate bug).
    pub fn new(sampling: Sampling, v: Vec<f64>, smoothness: f64) -> Result<Self> {
        if v.len() != sampling.dim() {
            return Err(Error::DimensionMismatch {
                expected: sampling.dim(),
                got: v.len(),
            });
        }
        if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
            return Err(Error::Certificate(format!(
                "ESO vector entry {bad} must be positive"
            )));
        }
        if smoothness.is_finite() {
            if let Some(bad) = v.iter().find(|x| **x > smoothness * (1.0 + 1e-9)) {
                return Err(Error::Certificate(format!(
                    "ESO vector entry {bad} exceeds smoothness {smoothness}"
                )));
            }
        }
        Ok(Self { sampling, v })
    }

    /// `Δ = minᵢ wᵢ / vᵢ`, zero when `w` has zeros.
    pub fn delta(&self, w: &[f64]) -> f64 {
        w.iter()
            .zip(&self.v)
            .map(|(wi, vi)| wi / vi)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Plain quadratic `½ xᵀMx` with the Euclidean reference; `L = λmax(M)`.
pub fn quadratic(m: RowMatrix) -> Result<Problem> {
    if m.rows() != m.cols() {
        return Err(Error::Data("quadratic matrix must be square".into()));
    }
    let n = m.rows();
    let (lmin, lmax) = sym_eigen_range(&m);
    if lmin < -1e-9 * lmax.abs().max(1.0) {
        return Err(Error::Data(format!(
            "matrix not positive semidefinite (lambda_min = {lmin:.3e})"
        )));
    }
    Ok(Problem {
        name: "quadratic".into(),
        objective: Objective::QuadQuartic {
            m,
            a: 0.0,
            a_ref: 0.0,
        },
        h: ReferenceFunction::squared_half(n),
        feasible_set: FeasibleSet::FullSpace,
        smoothness: lmax,
        strong_convexity: lmin.max(0.0),
        strong_convexity_weights: None,
        noise_level: None,
        optimum_value: Some(0.0),
        optimum_point: Some(vec![0.0; n]),
    })
}

/// `f(x) = ½ xᵀMx + a Σ xᵢ⁴` with reference `h(x) = ½‖x‖² + a Σ xᵢ⁴`.
///
/// Expects `M` normalized to `λmax(M) ≤ 1`, giving `L = 1`. The quartic parts
/// of `f` and `h` coincide, so the single-coordinate ESO rule reduces to
/// `vᵢ = max(1, Mᵢᵢ)`.
pub fn quad_quartic(m: RowMatrix, a: f64) -> Result<Problem> {
    if !(a > 0.0) {
        return Err(Error::InvalidParams(
            "quartic coefficient a must be > 0".into(),
        ));
    }
    quad_quartic_split(m, a, a)
}

/// Quadratic-plus-quartic objective whose reference carries its own quartic
/// coefficient `a_ref`, so the quartic term of `f` is `(a/a_ref)`-smooth
/// relative to the quartic term of `h` and the single-coordinate ESO vector
/// is `vᵢ = max(a/a_ref, Mᵢᵢ)`.
pub fn quad_quartic_split(m: RowMatrix, a: f64, a_ref: f64) -> Result<Problem> {
    if m.rows() != m.cols() {
        return Err(Error::Data("quadratic matrix must be square".into()));
    }
    if !(a > 0.0) || !(a_ref > 0.0) {
        return Err(Error::InvalidParams(
            "quartic coefficients must be > 0".into(),
        ));
    }
    let n = m.rows();
    for i in 0..n {
        if m.get(i, i) > 1.0 + 1e-9 {
            return Err(Error::Certificate(format!(
                "diagonal entry {} exceeds 1 under the normalization",
                m.get(i, i)
            )));
        }
    }
    let (lmin, lmax) = sym_eigen_range(&m);
    if lmin < -1e-9 {
        return Err(Error::Data(format!(
            "matrix not positive semidefinite (lambda_min = {lmin:.3e})"
        )));
    }
    let ratio = a / a_ref;
    let smoothness = lmax.max(ratio).max(1.0);
    let mu = lmin.max(0.0).min(ratio);
    Ok(Problem {
        name: "quad_quartic".into(),
        objective: Objective::QuadQuartic { m, a, a_ref },
        h: ReferenceFunction::quad_quartic(n, a_ref),
        feasible_set: FeasibleSet::FullSpace,
        smoothness,
        strong_convexity: mu,
        strong_convexity_weights: if mu > 0.0 { Some(vec![mu; n]) } else { None },
        noise_level: None,
        optimum_value: Some(0.0),
        optimum_point: Some(vec![0.0; n]),
    })
}

/// Quadratic-plus-quartic objective measured against the Euclidean reference;
/// the relative-smoothness constant must then be supplied by the caller
/// (typically a restricted-domain Lipschitz constant).
pub fn quad_quartic_euclidean(m: RowMatrix, a: f64, smoothness: f64) -> Result<Problem> {
    if m.rows() != m.cols() {
        return Err(Error::Data("quadratic matrix must be square".into()));
    }
    if !(smoothness > 0.0) {
        return Err(Error::InvalidParams("smoothness must be > 0".into()));
    }
    let n = m.rows();
    Ok(Problem {
        name: "quad_quartic_euclidean".into(),
        objective: Objective::QuadQuartic { m, a, a_ref: 0.0 },
        h: ReferenceFunction::squared_half(n),
        feasible_set: FeasibleSet::FullSpace,
        smoothness,
        strong_convexity: 0.0,
        strong_convexity_weights: None,
        noise_level: None,
        optimum_value: Some(0.0),
        optimum_point: Some(vec![0.0; n]),
    })
}

fn validate_poisson(a: &RowMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    for (i, &bi) in b.iter().enumerate() {
        if !(bi > 0.0) {
            return Err(Error::Data(format!("b[{i}] = {bi} must be positive")));
        }
    }
    for i in 0..a.rows() {
        let row = a.row(i);
        if row.iter().any(|&x| x < 0.0) {
            return Err(Error::Data(format!("row {i} of A has a negative entry")));
        }
        if row.iter().all(|&x| x == 0.0) {
            return Err(Error::Data(format!("row {i} of A is zero")));
        }
    }
    Ok(())
}

/// Poisson linear inverse problem `min KL(Ax ‖ b)` over the positive orthant,
/// `L = Σᵢ bᵢ` relative to Burg entropy.
pub fn poisson_kl(a: RowMatrix, b: Vec<f64>) -> Result<Problem> {
    validate_poisson(&a, &b)?;
    let n = a.cols();
    let l: f64 = b.iter().sum();
    // The one-dimensional identity instance has the closed-form optimum.
    let optimum = if a.rows() == 1 && n == 1 {
        let x_star = b[0] / a.get(0, 0);
        (Some(0.0), Some(vec![x_star]))
    } else {
        (None, None)
    };
    Ok(Problem {
        name: "poisson_kl".into(),
        objective: Objective::PoissonKl { a, b, mu_reg: 0.0 },
        h: ReferenceFunction::burg_log(n),
        feasible_set: FeasibleSet::PositiveOrthant,
        smoothness: l,
        strong_convexity: 0.0,
        strong_convexity_weights: None,
        noise_level: None,
        optimum_value: optimum.0,
        optimum_point: optimum.1,
    })
}

/// Poisson problem with logarithmic regularizer `mu_reg · (−Σ log xᵢ)`:
/// `L = Σ bᵢ + mu_reg` and `mu = mu_reg` (the regularizer is exactly
/// `mu_reg · h`, so `f − mu_reg·h` stays convex).
pub fn regularized_poisson(a: RowMatrix, b: Vec<f64>, mu_reg: f64) -> Result<Problem> {
    if !(mu_reg > 0.0) {
        return Err(Error::InvalidParams("mu_reg must be > 0".into()));
    }
    validate_poisson(&a, &b)?;
    let n = a.cols();
    let l: f64 = b.iter().sum::<f64>() + mu_reg;
    Ok(Problem {
        name: "regularized_poisson".into(),
        objective: Objective::PoissonKl { a, b, mu_reg },
        h: ReferenceFunction::burg_log(n),
        feasible_set: FeasibleSet::PositiveOrthant,
        smoothness: l,
        strong_convexity: mu_reg,
        strong_convexity_weights: Some(vec![mu_reg; n]),
        noise_level: None,
        optimum_value: None,
        optimum_point: None,
    })
}

/// D-optimal design problem on the simplex, `L = 1` relative to Burg entropy.
///
/// Requires full row rank (the printed rank condition `rank = n, n ≥ m+1` is
/// unsatisfiable for an `m×n` matrix; full row rank is what the objective
/// needs to be finite somewhere).
pub fn d_optimal_design(h_mat: RowMatrix) -> Result<Problem> {
    let m = h_mat.rows();
    let n = h_mat.cols();
    if n < m + 1 {
        return Err(Error::Data(format!(
            "design matrix needs n >= m + 1, got m = {m}, n = {n}"
        )));
    }
    let rank = h_mat.to_nalgebra().rank(1e-10);
    if rank < m {
        return Err(Error::Data(format!(
            "design matrix must have full row rank {m}, got rank {rank}"
        )));
    }
    Ok(Problem {
        name: "d_optimal_design".into(),
        objective: Objective::DOptimalDesign { h_mat },
        h: ReferenceFunction::burg_log(n),
        feasible_set: FeasibleSet::Simplex,
        smoothness: 1.0,
        strong_convexity: 0.0,
        strong_convexity_weights: None,
        noise_level: None,
        optimum_value: None,
        optimum_point: None,
    })
}

/// Separable quadratic with an additive-Gaussian stochastic oracle. The
/// variance-assumption constant is exact here: `sigma² · n` for the Euclidean
/// reference.
pub fn noisy_quadratic(diag: Vec<f64>, sigma: f64) -> Result<Problem> {
    if diag.is_empty() || diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Data("diagonal must be positive".into()));
    }
    if sigma < 0.0 {
        return Err(Error::InvalidParams("sigma must be >= 0".into()));
    }
    let n = diag.len();
    let l = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mu = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Problem {
        name: "noisy_quadratic".into(),
        objective: Objective::NoisyQuadratic {
            diag: diag.clone(),
            sigma,
        },
        h: ReferenceFunction::squared_half(n),
        feasible_set: FeasibleSet::FullSpace,
        smoothness: l,
        strong_convexity: mu,
        strong_convexity_weights: Some(diag),
        noise_level: Some(sigma * sigma * n as f64),
        optimum_value: Some(0.0),
        optimum_point: Some(vec![0.0; n]),
    })
}

/// The exact-model objective `f = factor · h`; relative smoothness and strong
/// convexity both hold with constant `factor`, with equality.
pub fn scaled_reference(h: ReferenceFunction, factor: f64, set: FeasibleSet) -> Result<Problem> {
    if !(factor > 0.0) {
        return Err(Error::InvalidParams("factor must be > 0".into()));
    }
    let n = h.dim();
    Ok(Problem {
        name: "scaled_reference".into(),
        objective: Objective::ScaledReference { factor },
        h,
        feasible_set: set,
        smoothness: factor,
        strong_convexity: factor,
        strong_convexity_weights: Some(vec![factor; n]),
        noise_level: None,
        optimum_value: None,
        optimum_point: None,
    })
}
