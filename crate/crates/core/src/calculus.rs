//! Centered simplex derivatives.
//!
//! For a point `x⁰` and directions `S = [s¹ … sᵏ]` the function is sampled at
//! `x⁰ ± sⁱ`. The odd part of those samples, `δ_c`, gives the generalized
//! centered simplex gradient `(Sᵀ)† δ_c`; the even part, `ε_f`, gives the
//! centered simplex Hessian diagonal `(Wᵀ)† ε_f` with `W = S ⊙ S`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{pseudoinverse, Svd, Vector};
use crate::sample_sets::SampleDirections;

type Rule = dyn Fn(&[f64]) -> std::result::Result<f64, String> + Send + Sync;

/// A real function on ℝⁿ together with an exact evaluation counter.
///
/// Every call to [`eval`](Self::eval) bumps the counter by one, including
/// calls that fail. The counter is atomic, so concurrent evaluation keeps it
/// exact.
pub struct Objective {
    dim: usize,
    rule: Box<Rule>,
    evaluations: AtomicU64,
}

impl Objective {
    /// Wraps an infallible rule. Non-finite return values are reported as
    /// evaluation errors.
    pub fn new<F>(dim: usize, rule: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::fallible(dim, move |x| Ok(rule(x)))
    }

    /// Wraps a rule that can reject points outside its domain.
    pub fn fallible<F>(dim: usize, rule: F) -> Self
    where
        F: Fn(&[f64]) -> std::result::Result<f64, String> + Send + Sync + 'static,
    {
        assert!(dim > 0, "objective dimension must be positive");
        Objective {
            dim,
            rule: Box::new(rule),
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::SeqCst)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::dimension("Objective::eval", self.dim, x.len()));
        }
        self.evaluations.fetch_add(1, Ordering::SeqCst);
        match (self.rule)(x) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(Error::Evaluation {
                point: x.to_vec(),
                reason: format!("non-finite value {v}"),
            }),
            Err(reason) => Err(Error::Evaluation {
                point: x.to_vec(),
                reason,
            }),
        }
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("dim", &self.dim)
            .field("evaluations", &self.evaluations())
            .finish_non_exhaustive()
    }
}

/// Function values on the centered stencil `x⁰ ± sⁱ` and the derived
/// vectors `δ_c` and `ε_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluatedStencil {
    pub x0: Vector,
    pub f0: f64,
    /// `f(x⁰ + sⁱ)`.
    pub plus: Vec<f64>,
    /// `f(x⁰ − sⁱ)`.
    pub minus: Vec<f64>,
    /// `δ_c[i] = (f(x⁰+sⁱ) − f(x⁰−sⁱ)) / 2`.
    pub delta_c: Vector,
    /// `ε_f[i] = f(x⁰+sⁱ) + f(x⁰−sⁱ) − 2 f(x⁰)`.
    pub eps: Vector,
    /// Evaluations spent building this stencil: `2k`, plus one if `f(x⁰)`
    /// was not supplied.
    pub evals_used: usize,
}

impl EvaluatedStencil {
    fn assemble(x0: Vector, f0: f64, plus: Vec<f64>, minus: Vec<f64>, evals_used: usize) -> Result<Self> {
        let delta_c = plus.iter().zip(&minus).map(|(p, m)| (p - m) / 2.0).collect();
        // Differences against f0 first: less cancellation when |f0| is large.
        let eps = plus.iter().zip(&minus).map(|(p, m)| (p - f0) + (m - f0)).collect();
        Ok(EvaluatedStencil {
            x0,
            f0,
            delta_c: Vector::from_vec(delta_c)?,
            eps: Vector::from_vec(eps)?,
            plus,
            minus,
            evals_used,
        })
    }

    /// Number of directions k.
    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    /// `δ_f(x⁰; S)`, the forward differences `f(x⁰+sⁱ) − f(x⁰)`.
    pub fn forward_differences(&self) -> Vec<f64> {
        self.plus.iter().map(|p| p - self.f0).collect()
    }

    /// `δ_f(x⁰; −S)`, the backward differences `f(x⁰−sⁱ) − f(x⁰)`.
    pub fn backward_differences(&self) -> Vec<f64> {
        self.minus.iter().map(|m| m - self.f0).collect()
    }
}

fn stencil_points(x0: &Vector, s: &SampleDirections) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..s.len())
        .map(|i| {
            let plus = (0..s.dim()).map(|r| x0.get(r) + s.matrix().get(r, i)).collect();
            let minus = (0..s.dim()).map(|r| x0.get(r) - s.matrix().get(r, i)).collect();
            (plus, minus)
        })
        .collect()
}

fn check_inputs(f: &Objective, x0: &Vector, s: &SampleDirections, known_f0: Option<f64>) -> Result<()> {
    if x0.len() != f.dim() {
        return Err(Error::dimension("evaluate_stencil (point)", f.dim(), x0.len()));
    }
    if s.dim() != f.dim() {
        return Err(Error::dimension("evaluate_stencil (directions)", f.dim(), s.dim()));
    }
    if let Some(v) = known_f0 {
        if !v.is_finite() {
            return Err(Error::Parameter(format!("supplied f(x0) must be finite, got {v}")));
        }
    }
    Ok(())
}

/// Evaluates `f` at `x⁰ ± sⁱ` (and at `x⁰` unless `known_f0` is given).
pub fn evaluate_stencil(
    f: &Objective,
    x0: &Vector,
    s: &SampleDirections,
    known_f0: Option<f64>,
) -> Result<EvaluatedStencil> {
    check_inputs(f, x0, s, known_f0)?;
    let (f0, mut used) = match known_f0 {
        Some(v) => (v, 0),
        None => (f.eval(x0.as_slice())?, 1),
    };
    let mut plus = Vec::with_capacity(s.len());
    let mut minus = Vec::with_capacity(s.len());
    for (p, m) in stencil_points(x0, s) {
        plus.push(f.eval(&p)?);
        minus.push(f.eval(&m)?);
        used += 2;
    }
    EvaluatedStencil::assemble(x0.clone(), f0, plus, minus, used)
}

/// Same as [`evaluate_stencil`] but issues the `2k` evaluations on the rayon
/// pool. Results are identical; the objective's rule must tolerate
/// concurrent calls (it is `Sync` by construction).
pub fn evaluate_stencil_par(
    f: &Objective,
    x0: &Vector,
    s: &SampleDirections,
    known_f0: Option<f64>,
) -> Result<EvaluatedStencil> {
    check_inputs(f, x0, s, known_f0)?;
    let f0 = match known_f0 {
        Some(v) => v,
        None => f.eval(x0.as_slice())?,
    };
    let pairs: Vec<(f64, f64)> = stencil_points(x0, s)
        .into_par_iter()
        .map(|(p, m)| Ok((f.eval(&p)?, f.eval(&m)?)))
        .collect::<Result<_>>()?;
    let (plus, minus) = pairs.into_iter().unzip();
    let used = 2 * s.len() + usize::from(known_f0.is_none());
    EvaluatedStencil::assemble(x0.clone(), f0, plus, minus, used)
}

/// Generalized centered simplex gradient `(Sᵀ)† δ_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientEstimate {
    pub value: Vector,
    pub x0: Vector,
    pub directions: SampleDirections,
    pub evals_used: usize,
}

/// Centered simplex Hessian diagonal `(Wᵀ)† ε_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagHessianEstimate {
    pub value: Vector,
    pub x0: Vector,
    pub directions: SampleDirections,
    pub evals_used: usize,
    /// `W` lacks full row rank; `value` is then the minimum-norm
    /// least-squares solution rather than a unique one.
    pub rank_deficient: bool,
}

fn check_stencil(op: &'static str, stencil: &EvaluatedStencil, s: &SampleDirections) -> Result<()> {
    if stencil.len() != s.len() {
        return Err(Error::dimension(op, s.len(), stencil.len()));
    }
    if stencil.x0.len() != s.dim() {
        return Err(Error::dimension(op, s.dim(), stencil.x0.len()));
    }
    Ok(())
}

pub fn gcsg(stencil: &EvaluatedStencil, s: &SampleDirections) -> Result<GradientEstimate> {
    check_stencil("gcsg", stencil, s)?;
    let value = pseudoinverse(&s.matrix().transpose()).mul_vec(&stencil.delta_c)?;
    Ok(GradientEstimate {
        value,
        x0: stencil.x0.clone(),
        directions: s.clone(),
        evals_used: stencil.evals_used,
    })
}

pub fn cshd(stencil: &EvaluatedStencil, s: &SampleDirections) -> Result<DiagHessianEstimate> {
    check_stencil("cshd", stencil, s)?;
    let svd = Svd::new(&s.squared_set().transpose());
    let value = svd.pseudoinverse().mul_vec(&stencil.eps)?;
    Ok(DiagHessianEstimate {
        value,
        x0: stencil.x0.clone(),
        directions: s.clone(),
        evals_used: stencil.evals_used,
        rank_deficient: svd.rank() < s.dim(),
    })
}

/// Gradient and Hessian-diagonal estimates from a single stencil.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub stencil: EvaluatedStencil,
    pub gradient: GradientEstimate,
    pub diag_hessian: DiagHessianEstimate,
}

pub fn approximate(f: &Objective, x0: &Vector, s: &SampleDirections, known_f0: Option<f64>) -> Result<Approximation> {
    let stencil = evaluate_stencil(f, x0, s, known_f0)?;
    let gradient = gcsg(&stencil, s)?;
    let diag_hessian = cshd(&stencil, s)?;
    Ok(Approximation {
        stencil,
        gradient,
        diag_hessian,
    })
}

/// The diagonal quadratic model `f0 + gᵀ(x−x⁰) + ½ (x−x⁰)ᵀ Diag(d) (x−x⁰)`.
pub fn diag_model_eval(x: &Vector, x0: &Vector, f0: f64, g: &Vector, d: &Vector) -> Result<f64> {
    let n = x0.len();
    for (what, v) in [("x", x), ("g", g), ("d", d)] {
        if v.len() != n {
            return Err(Error::Parameter(format!(
                "model input {what} has dimension {}, expected {n}",
                v.len()
            )));
        }
    }
    let step = x.sub(x0)?;
    let linear = g.dot(&step)?;
    let quadratic: f64 = step.as_slice().iter().zip(d.as_slice()).map(|(s, di)| di * s * s).sum();
    Ok(f0 + linear + 0.5 * quadratic)
}
