//! Single-shot approximations, step-size sweeps and small-`h` limit studies
//! over registry functions.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::calculus::{approximate, Approximation, Objective};
use crate::error::{Error, Result};
use crate::error_analysis::{
    absolute_error, error_bound, lipschitz_oracle, relative_error, roundoff_floor, truncation_order, BoundBreakdown,
};
use crate::matrix::Vector;
use crate::registry::RegistryFunction;
use crate::report::{format_number, markdown_table, write_csv, ExperimentReport, Format, ReportRow};
use crate::sample_sets::{build_set, SetKind};

/// Process exit code for an error: 3 when the bound's hypothesis fails,
/// 2 for everything else (bad input, failed evaluation, i/o).
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BoundInapplicable(_) => 3,
        _ => 2,
    }
}

/// Exit code when a reproduction check misses its tolerance.
pub const EXIT_REPRODUCTION_FAILED: i32 = 4;

/// Where the Lipschitz constant used in a bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LipschitzSource {
    Certified,
    /// Empirical lower estimate; the resulting "bound" is not guaranteed.
    Estimated,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub breakdown: BoundBreakdown,
    pub lipschitz: f64,
    pub source: LipschitzSource,
}

/// Everything measured by one approximation run.
#[derive(Clone, Debug)]
pub struct ApproxOutcome {
    pub function: &'static str,
    pub set: String,
    pub h: f64,
    pub approximation: Approximation,
    pub true_gradient: Vector,
    pub true_diag: Vector,
    pub rer_diag: Option<f64>,
    pub abs_err_diag: f64,
    pub rer_grad: Option<f64>,
    pub bound: Option<BoundReport>,
    /// Evaluations counted by the objective during this run.
    pub evals: u64,
}

impl ApproxOutcome {
    pub fn row(&self) -> ReportRow {
        ReportRow {
            function: self.function.to_string(),
            point: self.approximation.stencil.x0.to_vec(),
            set: self.set.clone(),
            h: self.h,
            delta_s: self.approximation.diag_hessian.directions.radius(),
            rer_diag: self.rer_diag,
            abs_err_diag: self.abs_err_diag,
            rer_grad: self.rer_grad,
            bound_total: self.bound.as_ref().map(|b| b.breakdown.total),
            bound_cross: self.bound.as_ref().map(|b| b.breakdown.cross_term),
            evals: self.evals as usize,
        }
    }

    /// Report row followed by a `quantity,index,value` block with the
    /// estimates, the analytic values and the bound components.
    pub fn render(&self, format: Format) -> String {
        let report = ExperimentReport::new(vec![self.row()], format);
        let mut details: Vec<Vec<String>> = Vec::new();
        let mut push_vec = |name: &str, v: &Vector| {
            for (i, x) in v.as_slice().iter().enumerate() {
                details.push(vec![name.to_string(), i.to_string(), format_number(*x)]);
            }
        };
        push_vec("gradient", &self.approximation.gradient.value);
        push_vec("diag_hessian", &self.approximation.diag_hessian.value);
        push_vec("true_gradient", &self.true_gradient);
        push_vec("true_diag_hessian", &self.true_diag);
        let flag = |name: &str, v: bool| vec![name.to_string(), String::new(), v.to_string()];
        details.push(flag("rank_deficient", self.approximation.diag_hessian.rank_deficient));
        details.push(flag("lonely", self.approximation.diag_hessian.directions.is_lonely()));
        if let Some(b) = &self.bound {
            let scalar = |name: &str, v: f64| vec![name.to_string(), String::new(), format_number(v)];
            details.push(scalar("lipschitz_constant", b.lipschitz));
            details.push(vec![
                "lipschitz_source".into(),
                String::new(),
                match b.source {
                    LipschitzSource::Certified => "certified".into(),
                    LipschitzSource::Estimated => "estimate".into(),
                },
            ]);
            details.push(scalar("pinv_norm", b.breakdown.pinv_norm));
            details.push(scalar("lipschitz_term", b.breakdown.lipschitz_term));
            details.push(scalar("cross_sum", b.breakdown.cross_sum));
            details.push(scalar("cross_term", b.breakdown.cross_term));
            details.push(scalar("bound_total", b.breakdown.total));
            if let Some(c) = b.breakdown.corollary_total {
                details.push(scalar("corollary_total", c));
            }
        }
        let header = ["quantity", "index", "value"];
        match format {
            Format::Csv => format!("{}\n{}", report.render(), write_csv(&header, &details)),
            Format::Markdown => format!("{}\n{}", report.render(), markdown_table(&header, &details)),
        }
    }
}

/// One approximation at `h · set` around `x0`.
pub fn run_approx(
    func: &'static RegistryFunction,
    x0: &Vector,
    set: &SetKind,
    h: f64,
    known_f0: Option<f64>,
    with_bound: bool,
) -> Result<ApproxOutcome> {
    let objective = func.objective();
    run_approx_with(func, &objective, x0, set, h, known_f0, with_bound)
}

fn run_approx_with(
    func: &'static RegistryFunction,
    objective: &Objective,
    x0: &Vector,
    set: &SetKind,
    h: f64,
    known_f0: Option<f64>,
    with_bound: bool,
) -> Result<ApproxOutcome> {
    if x0.len() != func.dim {
        return Err(Error::dimension(func.name, func.dim, x0.len()));
    }
    let directions = build_set(set, func.dim, h)?;
    let before = objective.evaluations();
    let approximation = approximate(objective, x0, &directions, known_f0)?;
    let evals = objective.evaluations() - before;

    let true_gradient = func.gradient_at(x0)?;
    let true_diag = func.diag_hessian_at(x0);
    let d = &approximation.diag_hessian.value;
    let rer_diag = relative_error(d, &true_diag).ok();
    let abs_err_diag = absolute_error(d, &true_diag)?;
    let rer_grad = relative_error(&approximation.gradient.value, &true_gradient).ok();

    let bound = if with_bound {
        let hessian = func.hessian_at(x0);
        let (lipschitz, source) = match func.lipschitz_on_ball(x0, directions.radius()) {
            Some(l) => (l, LipschitzSource::Certified),
            None => {
                let est = lipschitz_oracle(&func.objective(), x0, directions.radius(), 32)?;
                (est.value, LipschitzSource::Estimated)
            }
        };
        Some(BoundReport {
            breakdown: error_bound(&directions, lipschitz, &hessian)?,
            lipschitz,
            source,
        })
    } else {
        None
    };

    Ok(ApproxOutcome {
        function: func.name,
        set: set_label(set),
        h,
        approximation,
        true_gradient,
        true_diag,
        rer_diag,
        abs_err_diag,
        rer_grad,
        bound,
        evals,
    })
}

fn set_label(set: &SetKind) -> String {
    set.name().to_string()
}

/// A geometric grid `start, start·factor, …` up to `stop`, written
/// `START:STOP:FACTOR`.
#[derive(Clone, Debug, PartialEq)]
pub struct HGrid {
    pub start: f64,
    pub stop: f64,
    pub factor: f64,
}

const MAX_GRID_POINTS: usize = 10_000;

impl HGrid {
    pub fn new(start: f64, stop: f64, factor: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(start) && ok(stop) && ok(factor)) {
            return Err(Error::Parameter("h-grid values must be positive and finite".into()));
        }
        if factor == 1.0 {
            return Err(Error::Parameter("h-grid factor must differ from 1".into()));
        }
        if (stop < start && factor > 1.0) || (stop > start && factor < 1.0) {
            return Err(Error::Parameter(format!(
                "factor {factor} never moves {start} towards {stop}"
            )));
        }
        Ok(HGrid { start, stop, factor })
    }

    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = (self.start.min(self.stop), self.start.max(self.stop));
        let slack = 1e-9;
        (0..MAX_GRID_POINTS as i32)
            .map(|i| self.start * self.factor.powi(i))
            .take_while(|h| *h >= lo * (1.0 - slack) && *h <= hi * (1.0 + slack))
            .collect()
    }
}

impl FromStr for HGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(Error::Parse(format!("h-grid must be START:STOP:FACTOR, got `{s}`")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad h-grid value `{t}`: {e}")))
        };
        HGrid::new(num(a)?, num(b)?, num(c)?)
    }
}

/// Result of a sweep over a grid of `h`.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub report: ExperimentReport,
    /// Log-log slope of the diagonal error over the rows above the round-off
    /// floor; `None` if fewer than three rows qualify.
    pub order: Option<f64>,
    /// `(h, RER)` with the smallest relative error on the grid.
    pub best: Option<(f64, f64)>,
}

impl SweepOutcome {
    pub fn render(&self) -> String {
        let mut summary = vec![vec![
            "fitted_order".to_string(),
            self.order.map(format_number).unwrap_or_default(),
        ]];
        if let Some((h, r)) = self.best {
            summary.push(vec!["best_h".into(), format_number(h)]);
            summary.push(vec!["best_rer_diag".into(), format_number(r)]);
        }
        render_with_summary(&self.report, &summary)
    }
}

fn render_with_summary(report: &ExperimentReport, summary: &[Vec<String>]) -> String {
    let header = ["quantity", "value"];
    match report.format {
        Format::Csv => format!("{}\n{}", report.render(), write_csv(&header, summary)),
        Format::Markdown => format!("{}\n{}", report.render(), markdown_table(&header, summary)),
    }
}

/// Runs `run_approx` at every `h` (in parallel) and fits the convergence
/// order.
pub fn run_sweep(
    func: &'static RegistryFunction,
    x0: &Vector,
    set: &SetKind,
    hs: &[f64],
    known_f0: Option<f64>,
    with_bound: bool,
    format: Format,
) -> Result<SweepOutcome> {
    let objective = func.objective();
    let outcomes: Vec<ApproxOutcome> = hs
        .par_iter()
        .map(|&h| {
            let mut o = run_approx_with(func, &objective, x0, set, h, known_f0, with_bound)?;
            // The counter is shared across threads; use the per-stencil count.
            o.evals = o.approximation.stencil.evals_used as u64;
            Ok(o)
        })
        .collect::<Result<_>>()?;
    let report = ExperimentReport::new(outcomes.iter().map(ApproxOutcome::row).collect(), format);

    let true_diag = func.diag_hessian_at(x0);
    let hs_sorted: Vec<f64> = report.rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = report.rows.iter().map(|r| r.abs_err_diag).collect();
    let order = truncation_order(&hs_sorted, &errs, roundoff_floor(&true_diag))?;
    let best = report
        .rows
        .iter()
        .filter_map(|r| r.rer_diag.map(|e| (r.h, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    Ok(SweepOutcome { report, order, best })
}

/// Relative error of the diagonal estimate at `h`, `+∞` if the stencil
/// cannot be evaluated there.
fn rer_at(func: &'static RegistryFunction, objective: &Objective, x0: &Vector, set: &SetKind, h: f64) -> Result<f64> {
    let truth = func.diag_hessian_at(x0);
    let directions = build_set(set, func.dim, h)?;
    match approximate(objective, x0, &directions, None) {
        Ok(a) => relative_error(&a.diag_hessian.value, &truth),
        Err(Error::Evaluation { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Grid exponents of the limit study: `h = 10^(j/10)` for `j = 5, 4, …, -70`.
pub const LIMIT_GRID_EXPONENTS: std::ops::RangeInclusive<i32> = -70..=5;
/// Exponents `j` with `10^(j/10)` in the plateau window `[1e-4, 1e-2]`.
pub const PLATEAU_EXPONENTS: std::ops::RangeInclusive<i32> = -40..=-20;
/// The RER must climb this many times above the grid minimum, at some `h`
/// below the minimizer, to raise the non-monotonicity flag.
pub const NON_MONOTONE_RATIO: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct LimitStudy {
    /// Median RER over the plateau window, the stand-in for `lim_{h→0} RER`.
    pub plateau: f64,
    /// Smallest RER found (grid plus a golden-section refinement).
    pub infimum: f64,
    pub argmin_h: f64,
    /// RER rises again as `h` shrinks below the minimizer.
    pub non_monotone: bool,
    /// Grid points whose stencil could not be evaluated.
    pub failed_points: usize,
    pub grid: Vec<(f64, f64)>,
}

impl LimitStudy {
    pub fn render(&self, func: &str, x0: &Vector, set: &SetKind, format: Format) -> String {
        let rows = self
            .grid
            .iter()
            .map(|&(h, rer)| {
                vec![
                    func.to_string(),
                    x0.to_vec()
                        .iter()
                        .map(|v| format_number(*v))
                        .collect::<Vec<_>>()
                        .join(";"),
                    set.name().to_string(),
                    format_number(h),
                    format_number(rer),
                ]
            })
            .collect::<Vec<_>>();
        let header = ["function", "point", "set", "h", "rer_diag"];
        let summary = vec![
            vec!["plateau_rer".to_string(), format_number(self.plateau)],
            vec!["infimum_rer".to_string(), format_number(self.infimum)],
            vec!["argmin_h".to_string(), format_number(self.argmin_h)],
            vec!["non_monotone".to_string(), self.non_monotone.to_string()],
            vec!["failed_points".to_string(), self.failed_points.to_string()],
        ];
        let sh = ["quantity", "value"];
        match format {
            Format::Csv => format!("{}\n{}", write_csv(&header, &rows), write_csv(&sh, &summary)),
            Format::Markdown => format!("{}\n{}", markdown_table(&header, &rows), markdown_table(&sh, &summary)),
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Estimates the small-`h` behaviour of the relative error.
pub fn run_limit_study(func: &'static RegistryFunction, x0: &Vector, set: &SetKind) -> Result<LimitStudy> {
    if x0.len() != func.dim {
        return Err(Error::dimension(func.name, func.dim, x0.len()));
    }
    let objective = func.objective();
    let exponents: Vec<i32> = LIMIT_GRID_EXPONENTS.rev().collect();
    let grid: Vec<(i32, f64, f64)> = exponents
        .par_iter()
        .map(|&j| {
            let h = 10f64.powf(j as f64 / 10.0);
            Ok((j, h, rer_at(func, &objective, x0, set, h)?))
        })
        .collect::<Result<_>>()?;

    let failed_points = grid.iter().filter(|g| !g.2.is_finite()).count();
    let mut window: Vec<f64> = grid
        .iter()
        .filter(|g| PLATEAU_EXPONENTS.contains(&g.0))
        .map(|g| g.2)
        .collect();
    let plateau = median(&mut window);

    let (imin, &(_, grid_h, grid_min)) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2))
        .expect("non-empty grid");
    let below_max = grid[imin + 1..].iter().map(|g| g.2).fold(f64::NEG_INFINITY, f64::max);
    let non_monotone = below_max.is_finite() && below_max >= NON_MONOTONE_RATIO * grid_min;

    // Golden-section search in log10(h) between the grid neighbours.
    let lo = grid[(imin + 1).min(grid.len() - 1)].1.log10();
    let hi = grid[imin.saturating_sub(1)].1.log10();
    let eval = |t: f64| rer_at(func, &objective, x0, set, 10f64.powf(t));
    let (t_best, r_best) = golden_section(lo, hi, 60, eval)?;
    let (infimum, argmin_h) = if r_best < grid_min {
        (r_best, 10f64.powf(t_best))
    } else {
        (grid_min, grid_h)
    };

    Ok(LimitStudy {
        plateau,
        infimum,
        argmin_h,
        non_monotone,
        failed_points,
        grid: grid.into_iter().map(|(_, h, r)| (h, r)).collect(),
    })
}

fn golden_section(mut a: f64, mut b: f64, iters: usize, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Settings gathered from a `key = value` config file and command-line flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub function: Option<String>,
    pub point: Option<String>,
    pub set: Option<String>,
    pub h: Option<f64>,
    pub h_grid: Option<String>,
    pub f0: Option<f64>,
    pub with_bound: bool,
    pub format: Option<Format>,
    pub out: Option<String>,
}

impl RunConfig {
    /// Parses `key = value` lines. Keys: function, point, set, h, h_grid
    /// (or h-grid), f0, with_bound, format, out. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", lineno + 1)))?;
            map.insert(k.trim().replace('-', "_"), v.trim().trim_matches('"').to_string());
        }
        let num = |key: &str, v: &str| {
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("config key `{key}`: {e}")))
        };
        let mut cfg = RunConfig::default();
        for (k, v) in map {
            match k.as_str() {
                "function" => cfg.function = Some(v),
                "point" => cfg.point = Some(v),
                "set" => cfg.set = Some(v),
                "h" => cfg.h = Some(num(&k, &v)?),
                "h_grid" => cfg.h_grid = Some(v),
                "f0" => cfg.f0 = Some(num(&k, &v)?),
                "with_bound" => {
                    cfg.with_bound = v.parse().map_err(|_| {
                        Error::Parse(format!("config key `with_bound`: expected true or false, got `{v}`"))
                    })?
                }
                "format" => cfg.format = Some(v.parse()?),
                "out" => cfg.out = Some(v),
                other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Fills unset fields from `fallback`.
    pub fn or(self, fallback: RunConfig) -> RunConfig {
        RunConfig {
            function: self.function.or(fallback.function),
            point: self.point.or(fallback.point),
            set: self.set.or(fallback.set),
            h: self.h.or(fallback.h),
            h_grid: self.h_grid.or(fallback.h_grid),
            f0: self.f0.or(fallback.f0),
            with_bound: self.with_bound || fallback.with_bound,
            format: self.format.or(fallback.format),
            out: self.out.or(fallback.out),
        }
    }

    fn require<'a>(&self, value: &'a Option<String>, flag: &str) -> Result<&'a str> {
        value
            .as_deref()
            .ok_or_else(|| Error::Parameter(format!("missing required --{flag}")))
    }

    pub fn function(&self) -> Result<&'static RegistryFunction> {
        crate::registry::lookup(self.require(&self.function, "function")?)
    }

    pub fn point(&self, func: &RegistryFunction) -> Result<Vector> {
        func.resolve_point(self.require(&self.point, "point")?)
    }

    pub fn set(&self) -> Result<SetKind> {
        SetKind::parse(self.require(&self.set, "set")?)
    }

    pub fn h(&self) -> Result<f64> {
        self.h.ok_or_else(|| Error::Parameter("missing required --h".into()))
    }

    pub fn h_grid(&self) -> Result<HGrid> {
        self.require(&self.h_grid, "h-grid")?.parse()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}
