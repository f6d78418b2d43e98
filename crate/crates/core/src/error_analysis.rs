//! Error bound for the centered simplex Hessian diagonal, relative errors,
//! an empirical Lipschitz estimate for the third derivative, and log-log
//! convergence-order fits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::Objective;
use crate::error::{Error, Result};
use crate::matrix::{matrix_parts, Matrix, Svd, Vector};
use crate::sample_sets::SampleDirections;

/// The bound
///
/// ```text
/// ‖d − diag[∇²f(x⁰)]‖ ≤ ‖(W̃ᵀ)†‖ ( (k/12) L Δ_S² + 2 Σᵢ |(ŝⁱ)ᵀ U[∇²f(x⁰)] ŝⁱ| )
/// ```
///
/// split into its factors. `Δ_S` enters squared.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundBreakdown {
    /// `‖(W̃ᵀ)†‖` with `W̃ = W / Δ_S²`.
    pub pinv_norm: f64,
    /// `(k/12) · L · Δ_S²`.
    pub lipschitz_term: f64,
    /// `Σᵢ |(ŝⁱ)ᵀ U ŝⁱ|`, without the factor 2.
    pub cross_sum: f64,
    /// `2 · cross_sum`.
    pub cross_term: f64,
    /// `pinv_norm · (lipschitz_term + cross_term)`.
    pub total: f64,
    /// `pinv_norm · (√k/12) · L · Δ_S²`, present for lonely `S` of full row rank.
    pub corollary_total: Option<f64>,
}

/// `Σᵢ |(ŝⁱ)ᵀ U[H] ŝⁱ|` over the unit-radius directions of `s`.
pub fn cross_term_sum(s: &SampleDirections, hessian: &Matrix) -> Result<f64> {
    let upper = matrix_parts(hessian)?.upper;
    if upper.nrows() != s.dim() {
        return Err(Error::dimension("cross_term_sum", s.dim(), upper.nrows()));
    }
    let unit = s.unit_directions();
    unit.columns().map(|u| Ok(u.dot(&upper.mul_vec(&u)?)?.abs())).sum()
}

/// Evaluates the bound for directions `s`, a Lipschitz constant `lipschitz`
/// of `∇³f` on `B(x⁰; Δ_S)`, and the true Hessian at `x⁰`.
///
/// Fails with [`Error::BoundInapplicable`] when `W = S ⊙ S` lacks full row
/// rank.
pub fn error_bound(s: &SampleDirections, lipschitz: f64, hessian: &Matrix) -> Result<BoundBreakdown> {
    if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
        return Err(Error::Parameter(format!(
            "Lipschitz constant must be finite and nonnegative, got {lipschitz}"
        )));
    }
    if hessian.shape() != (s.dim(), s.dim()) {
        return Err(Error::dimension(
            "error_bound (hessian)",
            format!("{0}x{0}", s.dim()),
            format!("{}x{}", hessian.nrows(), hessian.ncols()),
        ));
    }
    let n = s.dim();
    let svd = Svd::new(&s.normalized_squared_set().transpose());
    if svd.rank() < n {
        return Err(Error::BoundInapplicable(format!(
            "W = S ⊙ S has rank {} < {n}",
            svd.rank()
        )));
    }
    // ‖A†‖ = 1/σ_min over the retained singular values.
    let sigma_min = svd
        .singular_values()
        .iter()
        .copied()
        .filter(|&v| v > svd.cutoff())
        .fold(f64::INFINITY, f64::min);
    let pinv_norm = 1.0 / sigma_min;

    let k = s.len() as f64;
    let radius_sq = s.radius() * s.radius();
    let lipschitz_term = k / 12.0 * lipschitz * radius_sq;
    let cross_sum = cross_term_sum(s, hessian)?;
    let cross_term = 2.0 * cross_sum;
    let corollary_total =
        (s.is_lonely() && s.has_full_row_rank()).then(|| pinv_norm * k.sqrt() / 12.0 * lipschitz * radius_sq);
    Ok(BoundBreakdown {
        pinv_norm,
        lipschitz_term,
        cross_sum,
        cross_term,
        total: pinv_norm * (lipschitz_term + cross_term),
        corollary_total,
    })
}

/// `‖approx − truth‖ / ‖truth‖`.
pub fn relative_error(approx: &Vector, truth: &Vector) -> Result<f64> {
    let denom = truth.norm();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(approx.sub(truth)?.norm() / denom)
}

pub fn absolute_error(approx: &Vector, truth: &Vector) -> Result<f64> {
    Ok(approx.sub(truth)?.norm())
}

/// Least-squares slope of `log(error)` against `log(h)`.
///
/// Needs at least three points, strictly decreasing positive `hs` and
/// positive errors.
pub fn convergence_order(hs: &[f64], errors: &[f64]) -> Result<f64> {
    if hs.len() != errors.len() {
        return Err(Error::Parameter(format!(
            "{} step sizes but {} errors",
            hs.len(),
            errors.len()
        )));
    }
    if hs.len() < 3 {
        return Err(Error::Parameter("order fit needs at least three points".into()));
    }
    if let Some(bad) = hs.iter().chain(errors).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Parameter(format!(
            "step sizes and errors must be positive and finite, got {bad}"
        )));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("step sizes must be strictly decreasing".into()));
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Round-off floor used to drop sweep points before fitting an order:
/// `100 · ε · ‖truth‖`.
pub fn roundoff_floor(truth: &Vector) -> f64 {
    100.0 * f64::EPSILON * truth.norm()
}

/// [`convergence_order`] over the points whose error lies above `floor`.
/// Returns `None` when fewer than three points survive.
pub fn truncation_order(hs: &[f64], errors: &[f64], floor: f64) -> Result<Option<f64>> {
    let (h, e): (Vec<f64>, Vec<f64>) = hs
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > floor)
        .map(|(&h, &e)| (h, e))
        .unzip();
    if h.len() < 3 {
        return Ok(None);
    }
    convergence_order(&h, &e).map(Some)
}

/// Hessian by central differences with one Richardson step (fourth order).
///
/// The step is `ε^{1/6} · max(1, ‖x‖∞)`.
pub fn finite_difference_hessian(f: &Objective, x: &Vector) -> Result<Matrix> {
    let scale = x.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let step = f64::EPSILON.powf(1.0 / 6.0) * scale;
    let coarse = second_order_hessian(f, x.as_slice(), 2.0 * step)?;
    let fine = second_order_hessian(f, x.as_slice(), step)?;
    fine.scaled(4.0 / 3.0)?.sub(&coarse.scaled(1.0 / 3.0)?)
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn second_order_hessian(f: &Objective, x: &[f64], step: f64) -> Result<Matrix> {
    let n = x.len();
    let f0 = f.eval(x)?;
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        let fp = f.eval(&shifted(x, &[(i, step)]))?;
        let fm = f.eval(&shifted(x, &[(i, -step)]))?;
        h[i * n + i] = (fp - 2.0 * f0 + fm) / (step * step);
        for j in i + 1..n {
            let fpp = f.eval(&shifted(x, &[(i, step), (j, step)]))?;
            let fpm = f.eval(&shifted(x, &[(i, step), (j, -step)]))?;
            let fmp = f.eval(&shifted(x, &[(i, -step), (j, step)]))?;
            let fmm = f.eval(&shifted(x, &[(i, -step), (j, -step)]))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
            h[i * n + j] = v;
            h[j * n + i] = v;
        }
    }
    Matrix::from_row_slice(n, n, &h)
}

/// Where the true Hessian comes from when measuring errors.
pub enum TruthSource<'a> {
    /// A closed-form Hessian.
    Analytic(&'a dyn Fn(&[f64]) -> Matrix),
    /// [`finite_difference_hessian`] of the objective.
    FiniteDifference(&'a Objective),
}

impl TruthSource<'_> {
    pub fn hessian(&self, x: &Vector) -> Result<Matrix> {
        match self {
            TruthSource::Analytic(rule) => Ok(rule(x.as_slice())),
            TruthSource::FiniteDifference(f) => finite_difference_hessian(f, x),
        }
    }

    pub fn diag_hessian(&self, x: &Vector) -> Result<Vector> {
        Ok(matrix_parts(&self.hessian(x)?)?.diag)
    }
}

/// Empirical Lipschitz constant of `∇³f`. A lower estimate, not a certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub pairs: usize,
}

const LIPSCHITZ_SEED: u64 = 0x5eed_cafe;

/// Estimates the Lipschitz constant of `∇³f` on `B(x⁰; Δ)`.
///
/// Compares finite-difference third-derivative tensors at antipodal pairs
/// `x⁰ ± Δu`: first along the coordinate axes, then along `samples`
/// pseudo-random unit directions. Tensors are compared in the Frobenius norm.
pub fn lipschitz_oracle(f: &Objective, x0: &Vector, delta: f64, samples: usize) -> Result<LipschitzEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("ball radius must be positive, got {delta}")));
    }
    if x0.len() != f.dim() {
        return Err(Error::dimension("lipschitz_oracle", f.dim(), x0.len()));
    }
    let n = x0.len();
    let reach = x0.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs())) + delta;
    let step = 1e-3 * reach.max(1.0);

    let mut directions: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(LIPSCHITZ_SEED);
    while directions.len() < n + samples {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-3 {
            directions.push(u.iter().map(|v| v / norm).collect());
        }
    }

    let mut best = 0.0f64;
    for u in &directions {
        let y: Vec<f64> = (0..n).map(|i| x0.get(i) + delta * u[i]).collect();
        let z: Vec<f64> = (0..n).map(|i| x0.get(i) - delta * u[i]).collect();
        let ty = third_derivative_tensor(f, &y, step)?;
        let tz = third_derivative_tensor(f, &z, step)?;
        let diff = ty.iter().zip(&tz).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        best = best.max(diff / (2.0 * delta));
    }
    Ok(LipschitzEstimate {
        value: best,
        pairs: directions.len(),
    })
}

/// `T[i][j][k] ≈ ∂³f/∂yᵢ∂yⱼ∂yₖ`, flattened, from central differences of
/// second-order finite-difference Hessians.
fn third_derivative_tensor(f: &Objective, y: &[f64], step: f64) -> Result<Vec<f64>> {
    let n = y.len();
    let mut t = vec![0.0; n * n * n];
    for k in 0..n {
        let hp = second_order_hessian(f, &shifted(y, &[(k, step)]), step)?;
        let hm = second_order_hessian(f, &shifted(y, &[(k, -step)]), step)?;
        for i in 0..n {
            for j in 0..n {
                t[(i * n + j) * n + k] = (hp.get(i, j) - hm.get(i, j)) / (2.0 * step);
            }
        }
    }
    Ok(t)
}
