//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any of them fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cshd_core::error_analysis::{absolute_error, finite_difference_hessian};
use cshd_core::experiment::{run_approx, run_limit_study};
use cshd_core::registry::{lookup, EXPPROD_X0, ROSENBROCK_X1, ROSENBROCK_X2};
use cshd_core::{
    approximate, build_set, convergence_order, cross_term_sum, error_bound, evaluate_stencil_par, pseudoinverse,
    ExperimentReport, Matrix, Objective, SampleDirections, SetKind, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn vector(v: &[f64]) -> Vector {
    Vector::from_slice(v).unwrap()
}

fn rer(function: &str, point: &[f64], set: &SetKind, h: f64) -> f64 {
    let out = run_approx(lookup(function).unwrap(), &vector(point), set, h, None, false).unwrap();
    out.rer_diag.expect("nonzero true diagonal")
}

fn within_rel(computed: f64, reference: f64, tol: f64) -> bool {
    (computed - reference).abs() <= tol * reference.abs()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn table1() -> Outcome {
    let configs = [
        (SetKind::Cb, 2.02e-7, 1.18e-9),
        (SetKind::Rb, 3.14e-1, 3.74e-1),
        (SetKind::Cmpb, 4.19e-1, 4.99e-1),
        (SetKind::Rmpb, 1.78e-7, 3.39e-9),
    ];
    let (values, elapsed) = timed(|| {
        configs
            .iter()
            .map(|(set, _, _)| {
                (
                    rer("rosenbrock2", &ROSENBROCK_X1, set, 1e-3),
                    rer("rosenbrock2", &ROSENBROCK_X2, set, 1e-6),
                )
            })
            .collect::<Vec<_>>()
    });
    for ((set, r1, r2), (c1, c2)) in configs.iter().zip(&values) {
        ensure(within_rel(*c1, *r1, 0.05), || format!("x1 {set}: {c1:.4e} vs {r1:.3e}"))?;
        let ok2 = if *r2 < 1e-8 {
            *c2 >= r2 / 3.0 && *c2 <= r2 * 3.0
        } else {
            within_rel(*c2, *r2, 0.05)
        };
        ensure(ok2, || format!("x2 {set}: {c2:.4e} vs {r2:.3e}"))?;
    }
    ensure(elapsed < Duration::from_secs(1), || format!("runtime {elapsed:?}"))?;
    Ok(format!("8 values matched in {elapsed:?}"))
}

fn table3() -> Outcome {
    let cb_ref = [(1e-1, 2.93e-2), (1e-2, 2.90e-4), (1e-3, 2.90e-6), (1e-4, 2.95e-8)];
    let ((rmpb, cb), elapsed) = timed(|| {
        let rmpb: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&h| rer("expprod3", &EXPPROD_X0, &SetKind::Rmpb, h))
            .collect();
        let cb: Vec<f64> = cb_ref
            .iter()
            .map(|&(h, _)| rer("expprod3", &EXPPROD_X0, &SetKind::Cb, h))
            .collect();
        (rmpb, cb)
    });
    for r in &rmpb {
        ensure((1.25e-1..=1.40e-1).contains(r), || {
            format!("RMPB RER {r:.4e} outside [1.25e-1, 1.40e-1]")
        })?;
    }
    for (c, (h, r)) in cb.iter().zip(cb_ref) {
        ensure(within_rel(*c, r, 0.10), || format!("CB h={h:e}: {c:.4e} vs {r:.3e}"))?;
    }
    ensure(elapsed < Duration::from_secs(1), || format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "RMPB plateau {:.4e}, CB sequence matched in {elapsed:?}",
        rmpb[1]
    ))
}

fn table2() -> Outcome {
    let f = lookup("rosenbrock2").unwrap();
    let plateaus = [
        (&ROSENBROCK_X1, SetKind::Rb, 3.14e-1),
        (&ROSENBROCK_X2, SetKind::Rb, 3.74e-1),
        (&ROSENBROCK_X1, SetKind::Cmpb, 4.19e-1),
        (&ROSENBROCK_X2, SetKind::Cmpb, 5.00e-1),
    ];
    for (x, set, reference) in plateaus {
        let study = run_limit_study(f, &vector(x), &set).unwrap();
        ensure(within_rel(study.plateau, reference, 0.05), || {
            format!("{set} at {x:?}: plateau {:.4e} vs {reference:.3e}", study.plateau)
        })?;
    }
    for x in [&ROSENBROCK_X1, &ROSENBROCK_X2] {
        let study = run_limit_study(f, &vector(x), &SetKind::Cb).unwrap();
        ensure(study.plateau < 1e-5, || {
            format!("CB at {x:?}: plateau {:.4e}", study.plateau)
        })?;
    }
    let rmpb = run_limit_study(f, &vector(&ROSENBROCK_X1), &SetKind::Rmpb).unwrap();
    ensure(rmpb.non_monotone, || {
        "non-monotonicity flag not raised for (x1, RMPB)".into()
    })?;
    Ok(format!(
        "4 plateaus matched, CB plateaus below 1e-5, (x1, RMPB) flagged with infimum {:.3e} at h={:.3e}",
        rmpb.infimum, rmpb.argmin_h
    ))
}

fn cross_term_constant() -> Outcome {
    let f = lookup("rosenbrock2").unwrap();
    let hess = f.hessian_at(&vector(&ROSENBROCK_X1));
    let mut worst = 0.0f64;
    for e in 0..=6 {
        let h = 10f64.powi(-e);
        let s = build_set(&SetKind::Cmpb, 2, h).unwrap();
        let sum = cross_term_sum(&s, &hess).unwrap();
        worst = worst.max((sum - 220.0).abs());
    }
    ensure(worst <= 1e-9, || format!("max deviation from 220 is {worst:e}"))?;
    Ok(format!("max deviation from 220 over 7 step sizes: {worst:e}"))
}

/// `Σ aᵢ yᵢ⁴ + Σ bᵢⱼ yᵢ² yⱼ + Σ qᵢⱼ yᵢ yⱼ + Σ gᵢ yᵢ` with closed-form
/// Hessian. Its `∇³f` is affine with slope tensor `24 Diag(a)`, so
/// `24 ‖a‖` is a Lipschitz constant of `∇³f` in any norm dominated by the
/// Frobenius norm.
#[derive(Clone, Debug)]
struct Quartic {
    a: Vec<f64>,
    b: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    g: Vec<f64>,
}

impl Quartic {
    fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let mut sample = |lo: f64, hi: f64| rng.random_range(lo..hi);
        let a = (0..n)
            .map(|_| sample(0.5, 2.0) * if sample(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 })
            .collect();
        let b = (0..n).map(|_| (0..n).map(|_| sample(-1.0, 1.0)).collect()).collect();
        let q = (0..n).map(|_| (0..n).map(|_| sample(-2.0, 2.0)).collect()).collect();
        let g = (0..n).map(|_| sample(-1.0, 1.0)).collect();
        Quartic { a, b, q, g }
    }

    fn n(&self) -> usize {
        self.a.len()
    }

    fn value(&self, y: &[f64]) -> f64 {
        let n = self.n();
        let mut v = 0.0;
        for i in 0..n {
            v += self.a[i] * y[i].powi(4) + self.g[i] * y[i];
            for j in 0..n {
                v += self.b[i][j] * y[i] * y[i] * y[j] + self.q[i][j] * y[i] * y[j];
            }
        }
        v
    }

    fn hessian(&self, y: &[f64]) -> Matrix {
        let n = self.n();
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            h[i][i] += 12.0 * self.a[i] * y[i] * y[i];
            for j in 0..n {
                h[i][j] += self.q[i][j] + self.q[j][i];
                // ∂²(yᵢ² yⱼ): 2yⱼ on (i,i), 2yᵢ on (i,j) and (j,i); 6yᵢ when i = j.
                if i == j {
                    h[i][i] += 6.0 * self.b[i][i] * y[i];
                } else {
                    h[i][i] += 2.0 * self.b[i][j] * y[j];
                    h[i][j] += 2.0 * self.b[i][j] * y[i];
                    h[j][i] += 2.0 * self.b[i][j] * y[i];
                }
            }
        }
        Matrix::from_rows(&h).unwrap()
    }

    fn lipschitz(&self) -> f64 {
        24.0 * self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn objective(&self) -> Objective {
        let p = self.clone();
        Objective::new(self.n(), move |y| p.value(y))
    }
}

fn diag(m: &Matrix) -> Vector {
    Vector::from_vec((0..m.nrows()).map(|i| m.get(i, i)).collect()).unwrap()
}

/// Lonely `n × k` matrix of full row rank with entries of magnitude in
/// `[0.5, 2]`, `n ≤ 6`, `k ≤ 10` unless given.
fn random_lonely(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Matrix {
    let mut rows: Vec<usize> = (0..n).collect();
    rows.extend((n..k).map(|_| rng.random_range(0..n)));
    let mut m = vec![0.0; n * k];
    for (j, &row) in rows.iter().enumerate() {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        m[row * k + j] = sign * rng.random_range(0.5..2.0);
    }
    Matrix::from_row_slice(n, k, &m).unwrap()
}

type DiagOracle = Box<dyn Fn(&[f64]) -> Vector>;

fn order_two() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let hs = [1e-1, 1e-2, 1e-3];
    let rosen = lookup("rosenbrock2").unwrap();
    let mut orders = Vec::new();
    for instance in 0..20 {
        // A quarter of the instances use the registry function, the rest random quartics.
        let (objective, truth_at, n): (Objective, DiagOracle, usize) = if instance % 4 == 0 {
            (
                rosen.objective(),
                Box::new(|x: &[f64]| rosen.diag_hessian_at(&vector(x))),
                2,
            )
        } else {
            let n = rng.random_range(1..=4);
            let p = Quartic::random(&mut rng, n);
            let q = p.clone();
            (p.objective(), Box::new(move |x: &[f64]| diag(&q.hessian(x))), n)
        };
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let k = rng.random_range(n..=n + 3);
        let base = SampleDirections::new(random_lonely(&mut rng, n, k)).unwrap();
        ensure(base.is_lonely() && base.has_full_row_rank(), || {
            "generator produced a bad set".into()
        })?;
        let truth = truth_at(&x);
        let x0 = vector(&x);
        let errors: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let s = base.scaled(h).unwrap();
                let a = approximate(&objective, &x0, &s, None).unwrap();
                absolute_error(&a.diag_hessian.value, &truth).unwrap()
            })
            .collect();
        let order = convergence_order(&hs, &errors).map_err(|e| format!("instance {instance}: {e}"))?;
        ensure((1.8..=2.2).contains(&order), || {
            format!("instance {instance} (n={n}, k={k}): order {order:.3}, errors {errors:?}")
        })?;
        orders.push(order);
    }
    let cmpb: Vec<f64> = hs
        .iter()
        .map(|&h| rer("rosenbrock2", &ROSENBROCK_X1, &SetKind::Cmpb, h))
        .collect();
    let plateau = convergence_order(&hs, &cmpb).map_err(|e| e.to_string())?;
    ensure((-0.2..=0.2).contains(&plateau), || format!("CMPB order {plateau:.3}"))?;
    let (lo, hi) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
        (lo.min(*o), hi.max(*o))
    });
    Ok(format!(
        "20 lonely instances with orders in [{lo:.3}, {hi:.3}], CMPB order {plateau:.3}"
    ))
}

fn bound_dominance() -> Outcome {
    let hs = [1e-1, 1e-2, 1e-3];
    let sets = [SetKind::Cb, SetKind::Rb, SetKind::Cmpb, SetKind::Rmpb];
    let (mut tested, mut skipped) = (0, 0);
    let mut worst = 0.0f64;
    let mut check = |abs_err: f64, total: f64, pinv_norm: f64, f0: f64, radius: f64, label: String| {
        let roundoff = pinv_norm * 100.0 * f64::EPSILON * f0.abs().max(1.0) / (radius * radius);
        if total <= roundoff {
            skipped += 1;
            return Ok(());
        }
        tested += 1;
        worst = worst.max(abs_err / total);
        ensure(abs_err <= total, || {
            format!("{label}: error {abs_err:e} exceeds bound {total:e}")
        })
    };

    let registry = [
        ("rosenbrock2", &ROSENBROCK_X1[..]),
        ("rosenbrock2", &ROSENBROCK_X2[..]),
        ("expprod3", &EXPPROD_X0[..]),
    ];
    for (name, x) in registry {
        for set in &sets {
            for &h in &hs {
                let out = run_approx(lookup(name).unwrap(), &vector(x), set, h, None, true).unwrap();
                let b = out.bound.expect("bound requested");
                check(
                    out.abs_err_diag,
                    b.breakdown.total,
                    b.breakdown.pinv_norm,
                    out.approximation.stencil.f0,
                    out.approximation.diag_hessian.directions.radius(),
                    format!("{name} {x:?} {set} h={h:e}"),
                )?;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for instance in 0..20 {
        let n = rng.random_range(2..=4);
        let p = Quartic::random(&mut rng, n);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let x0 = vector(&x);
        let f = p.objective();
        let hess = p.hessian(&x);
        let fd = finite_difference_hessian(&f, &x0).unwrap();
        let gap = hess.sub(&fd).unwrap().frobenius_norm();
        ensure(gap <= 1e-6 * (1.0 + hess.frobenius_norm()), || {
            format!("quartic #{instance}: Hessian off by {gap:e}")
        })?;
        let truth = diag(&hess);
        for set in &sets {
            for &h in &hs {
                let s = build_set(set, n, h).unwrap();
                let a = approximate(&f, &x0, &s, None).unwrap();
                let b = error_bound(&s, p.lipschitz(), &hess).unwrap();
                check(
                    absolute_error(&a.diag_hessian.value, &truth).unwrap(),
                    b.total,
                    b.pinv_norm,
                    a.stencil.f0,
                    s.radius(),
                    format!("quartic #{instance} {set} h={h:e}"),
                )?;
            }
        }
    }
    Ok(format!(
        "{tested} configurations within the bound (largest error/bound ratio {worst:.3}), {skipped} round-off dominated skipped"
    ))
}

fn penrose_residual(a: &Matrix) -> f64 {
    let x = pseudoinverse(a);
    let ax = a.matmul(&x).unwrap();
    let xa = x.matmul(a).unwrap();
    let rel = |r: Matrix, scale: f64| r.frobenius_norm() / scale.max(f64::MIN_POSITIVE);
    [
        rel(ax.matmul(a).unwrap().sub(a).unwrap(), a.frobenius_norm()),
        rel(xa.matmul(&x).unwrap().sub(&x).unwrap(), x.frobenius_norm()),
        rel(ax.sub(&ax.transpose()).unwrap(), ax.frobenius_norm()),
        rel(xa.sub(&xa.transpose()).unwrap(), xa.frobenius_norm()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut worst = 0.0f64;
    for t in 0..500 {
        let r = rng.random_range(1..=8);
        let c = rng.random_range(1..=8);
        let a = if t % 5 == 0 {
            // Deliberately rank deficient: a product through a thin inner dimension.
            let inner = rng.random_range(1..=r.min(c));
            let u: Vec<f64> = (0..r * inner).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..inner * c).map(|_| rng.random_range(-1.0..1.0)).collect();
            Matrix::from_row_slice(r, inner, &u)
                .unwrap()
                .matmul(&Matrix::from_row_slice(inner, c, &v).unwrap())
                .unwrap()
        } else {
            let v: Vec<f64> = (0..r * c).map(|_| rng.random_range(-10.0..10.0)).collect();
            Matrix::from_row_slice(r, c, &v).unwrap()
        };
        worst = worst.max(penrose_residual(&a));
    }
    ensure(worst <= 1e-10, || format!("Penrose residual {worst:e}"))?;

    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let k = rng.random_range(n..=10);
        let s = SampleDirections::new(random_lonely(&mut rng, n, k)).unwrap();
        ensure(s.is_lonely() && s.has_full_row_rank(), || {
            "generator produced a bad set".into()
        })?;
        ensure(s.squared_set().rank() == n, || format!("rank(W) < {n}"))?;
        let sym: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let hess = Matrix::from_rows(
            &(0..n)
                .map(|i| (0..n).map(|j| sym[i.min(j)][i.max(j)]).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let cross = cross_term_sum(&s, &hess).unwrap();
        ensure(cross == 0.0, || format!("cross term {cross:e} on a lonely set"))?;
    }

    let mut cubic_worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let c3: Vec<f64> = (0..n * n * n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let q: Vec<f64> = (0..n * n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let cube = move |y: &[f64]| {
            let mut v = 0.0;
            for i in 0..n {
                for j in 0..n {
                    v += q[i * n + j] * y[i] * y[j];
                    for k in 0..n {
                        v += c3[(i * n + j) * n + k] * y[i] * y[j] * y[k];
                    }
                }
            }
            v
        };
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        // Oracle: the exact second difference of a cubic along eᵢ with step 1.
        let truth: Vec<f64> = (0..n)
            .map(|i| {
                let shift = |t: f64| {
                    let mut y = x.clone();
                    y[i] += t;
                    cube(&y)
                };
                shift(1.0) + shift(-1.0) - 2.0 * cube(&x)
            })
            .collect();
        let truth = vector(&truth);
        let f = Objective::new(n, cube);
        let h = rng.random_range(0.01..1.0);
        let k = rng.random_range(n..=n + 3);
        for s in [
            build_set(&SetKind::Cb, n, h).unwrap(),
            SampleDirections::new(random_lonely(&mut rng, n, k))
                .unwrap()
                .scaled(h)
                .unwrap(),
        ] {
            let a = approximate(&f, &vector(&x), &s, None).unwrap();
            let err = absolute_error(&a.diag_hessian.value, &truth).unwrap() / truth.norm().max(1.0);
            cubic_worst = cubic_worst.max(err);
        }
    }
    ensure(cubic_worst <= 1e-8, || format!("cubic relative error {cubic_worst:e}"))?;

    let mut bilinear_worst = 0.0f64;
    for _ in 0..50 {
        // Round-off in the estimate is about ε·|f|/h², so keep |f| moderate.
        let alpha = rng.random_range(-10.0..10.0);
        let f = Objective::new(2, move |y| alpha * y[0] * y[1]);
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        for h in [1.0, 1e-1, 1e-2] {
            let s = build_set(&SetKind::Cb, 2, h).unwrap();
            let a = approximate(&f, &vector(&x), &s, None).unwrap();
            bilinear_worst = bilinear_worst.max(a.diag_hessian.value.norm());
        }
    }
    ensure(bilinear_worst <= 1e-9, || {
        format!("bilinear estimate {bilinear_worst:e}")
    })?;

    Ok(format!(
        "Penrose residual {worst:.2e}, 200 lonely sets clean, cubic error {cubic_worst:.2e}, bilinear |d| {bilinear_worst:.2e}"
    ))
}

fn evaluation_accounting() -> Outcome {
    let configs: [(&str, &[f64], SetKind); 5] = [
        ("rosenbrock2", &ROSENBROCK_X1, SetKind::Cb),
        ("rosenbrock2", &ROSENBROCK_X2, SetKind::Rb),
        ("rosenbrock2", &ROSENBROCK_X1, SetKind::Cmpb),
        ("expprod3", &EXPPROD_X0, SetKind::Rmpb),
        ("expprod3", &EXPPROD_X0, SetKind::Cb),
    ];
    let mut runs = 0;
    for (name, x, set) in &configs {
        let func = lookup(name).unwrap();
        let k = build_set(set, func.dim, 1.0).unwrap().len();
        let f0 = (func.value)(x);

        let plain = run_approx(func, &vector(x), set, 1e-2, None, false).unwrap();
        ensure(plain.evals == 2 * k as u64 + 1, || {
            format!("{name} {set}: {} evals, k={k}", plain.evals)
        })?;
        let known = run_approx(func, &vector(x), set, 1e-2, Some(f0), false).unwrap();
        ensure(known.evals == 2 * k as u64, || {
            format!("{name} {set} with f0: {} evals", known.evals)
        })?;

        let objective = func.objective();
        let s = build_set(set, func.dim, 1e-2).unwrap();
        evaluate_stencil_par(&objective, &vector(x), &s, None).unwrap();
        ensure(objective.evaluations() == 2 * k as u64 + 1, || {
            format!("{name} {set}: parallel stencil miscounted")
        })?;

        for with_f0 in [false, true] {
            let point = x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_cshd"));
            cmd.args([
                "approx",
                "--function",
                name,
                "--point",
                &point,
                "--set",
                set.name(),
                "--h",
                "0.01",
            ]);
            if with_f0 {
                cmd.args(["--f0", &f0.to_string()]);
            }
            let out = cmd.output().map_err(|e| e.to_string())?;
            ensure(out.status.success(), || {
                String::from_utf8_lossy(&out.stderr).into_owned()
            })?;
            let report =
                ExperimentReport::parse_csv(&String::from_utf8_lossy(&out.stdout)).map_err(|e| e.to_string())?;
            let expected = 2 * k + usize::from(!with_f0);
            ensure(report.rows.len() == 1 && report.rows[0].evals == expected, || {
                format!(
                    "{name} {set}: CLI reported {:?} evals, expected {expected}",
                    report.rows.first().map(|r| r.evals)
                )
            })?;
            runs += 1;
        }
    }
    Ok(format!(
        "library, parallel and {runs} CLI runs all used 2k+1 (2k with f0) evaluations"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("Table 1 reproduction", table1),
        ("Table 3 reproduction", table3),
        ("Table 2 plateau estimates", table2),
        ("cross-term constant", cross_term_constant),
        ("order-2 property", order_two),
        ("bound dominance", bound_dominance),
        ("property suites", property_suites),
        ("evaluation accounting", evaluation_accounting),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
