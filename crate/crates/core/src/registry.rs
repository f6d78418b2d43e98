//! Test functions with closed-form derivatives.

use crate::calculus::Objective;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};

/// A named test function with analytic gradient and Hessian.
pub struct RegistryFunction {
    pub name: &'static str,
    pub dim: usize,
    pub value: fn(&[f64]) -> f64,
    pub gradient: fn(&[f64]) -> Vec<f64>,
    pub hessian: fn(&[f64]) -> Matrix,
    /// Certified upper bound on the Lipschitz constant of `∇³f` over the
    /// ball `B(x⁰; r)`, as a function of `(x⁰, r)`.
    pub lipschitz: Option<fn(&[f64], f64) -> f64>,
    /// Named points of interest usable on the command line.
    pub points: &'static [(&'static str, &'static [f64])],
}

impl RegistryFunction {
    pub fn objective(&self) -> Objective {
        Objective::new(self.dim, self.value)
    }

    pub fn gradient_at(&self, x: &Vector) -> Result<Vector> {
        Vector::from_vec((self.gradient)(x.as_slice()))
    }

    pub fn hessian_at(&self, x: &Vector) -> Matrix {
        (self.hessian)(x.as_slice())
    }

    pub fn diag_hessian_at(&self, x: &Vector) -> Vector {
        let h = self.hessian_at(x);
        Vector::from_vec((0..self.dim).map(|i| h.get(i, i)).collect()).expect("finite diagonal")
    }

    pub fn lipschitz_on_ball(&self, x0: &Vector, radius: f64) -> Option<f64> {
        self.lipschitz.map(|l| l(x0.as_slice(), radius))
    }

    /// Resolves a named point (`x1`) or a comma-separated coordinate list.
    pub fn resolve_point(&self, spec: &str) -> Result<Vector> {
        let spec = spec.trim();
        if let Some((_, p)) = self.points.iter().find(|(name, _)| name.eq_ignore_ascii_case(spec)) {
            return Vector::from_slice(p);
        }
        let point = parse_point(spec)?;
        if point.len() != self.dim {
            return Err(Error::dimension(self.name, self.dim, point.len()));
        }
        Ok(point)
    }
}

/// Parses `v1,v2,...` into a vector.
pub fn parse_point(spec: &str) -> Result<Vector> {
    let values = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad coordinate `{}` in point: {e}", t.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    Vector::from_vec(values)
}

pub const ROSENBROCK_X1: [f64; 2] = [1.1, 1.1 * 1.1 + 1e-5];
pub const ROSENBROCK_X2: [f64; 2] = [0.9, 0.81];
pub const EXPPROD_X0: [f64; 3] = [3.0, 2.0, 1.0];

fn rosenbrock(y: &[f64]) -> f64 {
    (1.0 - y[0]).powi(2) + 100.0 * (y[1] - y[0] * y[0]).powi(2)
}

fn rosenbrock_gradient(y: &[f64]) -> Vec<f64> {
    vec![
        -2.0 * (1.0 - y[0]) - 400.0 * y[0] * (y[1] - y[0] * y[0]),
        200.0 * (y[1] - y[0] * y[0]),
    ]
}

fn rosenbrock_hessian(y: &[f64]) -> Matrix {
    let off = -400.0 * y[0];
    Matrix::from_rows(&[
        vec![2.0 - 400.0 * (y[1] - y[0] * y[0]) + 800.0 * y[0] * y[0], off],
        vec![off, 200.0],
    ])
    .expect("finite hessian")
}

/// The only non-zero fourth derivative is ∂⁴f/∂y₁⁴ = 2400.
fn rosenbrock_lipschitz(_x0: &[f64], _radius: f64) -> f64 {
    2400.0
}

fn expprod(y: &[f64]) -> f64 {
    (y[0] * y[1] * y[2]).exp()
}

fn expprod_gradient(y: &[f64]) -> Vec<f64> {
    let e = expprod(y);
    vec![e * y[1] * y[2], e * y[0] * y[2], e * y[0] * y[1]]
}

fn expprod_hessian(y: &[f64]) -> Matrix {
    let e = expprod(y);
    let p = [y[1] * y[2], y[0] * y[2], y[0] * y[1]];
    // ∂²(y₁y₂y₃)/∂yᵢ∂yⱼ is the remaining coordinate.
    let mixed = |i: usize, j: usize| if i == j { 0.0 } else { y[3 - i - j] };
    let mut rows = vec![vec![0.0; 3]; 3];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = e * (p[i] * p[j] + mixed(i, j));
        }
    }
    Matrix::from_rows(&rows).expect("finite hessian")
}

/// Along a unit direction u, with p = y₁y₂y₃ and primes for derivatives in u,
/// (eᵖ)'''' = eᵖ (p'⁴ + 6p'²p'' + 4p'p''' + 3p''²). Each factor is bounded
/// over the ball: |p| ≤ Πbᵢ, |p'| ≤ ‖∇p‖, |p''| ≤ ‖∇²p‖_F, |p'''| = 6|u₁u₂u₃| ≤ 2/√3,
/// where bᵢ = |x⁰ᵢ| + r.
fn expprod_lipschitz(x0: &[f64], radius: f64) -> f64 {
    let b: Vec<f64> = x0.iter().map(|v| v.abs() + radius).collect();
    let p_max = b[0] * b[1] * b[2];
    let grad = ((b[1] * b[2]).powi(2) + (b[0] * b[2]).powi(2) + (b[0] * b[1]).powi(2)).sqrt();
    let hess = (2.0 * (b[0] * b[0] + b[1] * b[1] + b[2] * b[2])).sqrt();
    let third = 2.0 / 3f64.sqrt();
    p_max.exp() * (grad.powi(4) + 6.0 * grad * grad * hess + 4.0 * grad * third + 3.0 * hess * hess)
}

static REGISTRY: [RegistryFunction; 2] = [
    RegistryFunction {
        name: "rosenbrock2",
        dim: 2,
        value: rosenbrock,
        gradient: rosenbrock_gradient,
        hessian: rosenbrock_hessian,
        lipschitz: Some(rosenbrock_lipschitz),
        points: &[("x1", &ROSENBROCK_X1), ("x2", &ROSENBROCK_X2)],
    },
    RegistryFunction {
        name: "expprod3",
        dim: 3,
        value: expprod,
        gradient: expprod_gradient,
        hessian: expprod_hessian,
        lipschitz: Some(expprod_lipschitz),
        points: &[("x0", &EXPPROD_X0)],
    },
];

pub fn registry() -> &'static [RegistryFunction] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Result<&'static RegistryFunction> {
    REGISTRY
        .iter()
        .find(|f| f.name.eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| Error::UnknownFunction(name.to_string()))
}
