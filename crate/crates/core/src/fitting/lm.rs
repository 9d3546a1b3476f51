use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::FitError;

/// Real-valued model `y = f(params, x)`.
pub type Model<'a> = dyn Fn(&[f64], f64) -> f64 + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Stop when the largest cosine between the residual vector and a
    /// Jacobian column falls below this.
    pub gtol: f64,
    /// Stop when an accepted step changes every parameter by less than
    /// `xtol · (|p| + xtol)`.
    pub xtol: f64,
    /// When no damped step lowers the RSS, accept the point as stationary if
    /// the undamped step predicts a relative reduction below this.
    pub ftol: f64,
    /// Relative central-difference step.
    pub fd_step: f64,
    /// Absolute floor on the difference step.
    pub fd_floor: f64,
    /// Bounds on the relative damping λ (multiplies diag(JᵀJ)).
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            gtol: 1e-8,
            xtol: 1e-12,
            ftol: 1e-10,
            fd_step: 1e-6,
            fd_floor: 1e-12,
            lambda_min: 1e-15,
            lambda_max: 1e15,
        }
    }
}

pub struct FitProblem<'a> {
    pub names: Vec<String>,
    pub model: &'a Model<'a>,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub initial: Vec<f64>,
    /// A parameter with equal lower and upper bound is held fixed.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub options: FitOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ExactFit,
    Gradient,
    Step,
    MaxIter,
    /// Damping hit `lambda_max` without finding a downhill step.
    NoReduction,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// From `s² (JᵀJ)⁻¹` with `s² = rss / (m − n_free)`. Fixed parameters
    /// get 0; directions the data cannot resolve get infinity.
    pub stderr: Vec<f64>,
    pub rss: f64,
    pub initial_rss: f64,
    pub converged: bool,
    pub iters: usize,
    pub termination: Termination,
    /// RSS after each accepted step, starting with the initial point.
    pub rss_history: Vec<f64>,
    /// Damping used for every trial step.
    pub lambda_history: Vec<f64>,
    pub diagnostics: Vec<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.params[i])
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.stderr[i])
    }
}

impl FitProblem<'_> {
    fn check(&self) -> Result<(), FitError> {
        let n = self.initial.len();
        let bad = |m: String| Err(FitError::InvalidProblem(m));
        if self.names.len() != n || self.lower.len() != n || self.upper.len() != n {
            return bad("names, initial and bounds must have equal length".into());
        }
        if self.x.len() != self.y.len() {
            return bad(format!(
                "{} sweep points but {} data values",
                self.x.len(),
                self.y.len()
            ));
        }
        if self.x.len() < n {
            return bad(format!("{} data points for {} parameters", self.x.len(), n));
        }
        if self.x.iter().chain(self.y).any(|v| !v.is_finite()) {
            return bad("data contain non-finite values".into());
        }
        for i in 0..n {
            let (lo, hi, p) = (self.lower[i], self.upper[i], self.initial[i]);
            if !(lo <= hi) || !(lo <= p && p <= hi) || !p.is_finite() {
                return bad(format!(
                    "initial {} = {p} outside bounds [{lo}, {hi}]",
                    self.names[i]
                ));
            }
        }
        let o = &self.options;
        if !(o.fd_step > 0.0
            && o.fd_floor > 0.0
            && o.lambda_min > 0.0
            && o.lambda_min < o.lambda_max)
        {
            return bad("invalid fit options".into());
        }
        Ok(())
    }

    fn residuals(&self, p: &[f64]) -> Result<DVector<f64>, FitError> {
        let r = DVector::from_iterator(
            self.x.len(),
            self.x
                .iter()
                .zip(self.y)
                .map(|(&x, &y)| y - (self.model)(p, x)),
        );
        if r.iter().any(|v| !v.is_finite()) {
            return Err(FitError::NonFinite { params: p.to_vec() });
        }
        Ok(r)
    }

    /// Central-difference Jacobian of the model over the free parameters.
    fn jacobian(&self, p: &[f64], free: &[usize]) -> Result<DMatrix<f64>, FitError> {
        let o = &self.options;
        let mut j = DMatrix::zeros(self.x.len(), free.len());
        let mut q = p.to_vec();
        for (c, &i) in free.iter().enumerate() {
            let h = (o.fd_step * p[i].abs()).max(o.fd_floor);
            q[i] = p[i] + h;
            let up: Vec<f64> = self.x.iter().map(|&x| (self.model)(&q, x)).collect();
            q[i] = p[i] - h;
            for (row, &x) in self.x.iter().enumerate() {
                j[(row, c)] = (up[row] - (self.model)(&q, x)) / (2.0 * h);
            }
            q[i] = p[i];
        }
        if j.iter().any(|v| !v.is_finite()) {
            return Err(FitError::NonFinite { params: p.to_vec() });
        }
        Ok(j)
    }

    fn project(&self, p: &mut [f64]) {
        for i in 0..p.len() {
            p[i] = p[i].clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// Damped Gauss-Newton on the free parameters with a central-difference
/// Jacobian and box bounds enforced by projection.
pub fn levenberg_marquardt(problem: &FitProblem) -> Result<FitResult, FitError> {
    problem.check()?;
    let o = problem.options;
    let n = problem.initial.len();
    let free: Vec<usize> = (0..n)
        .filter(|&i| problem.lower[i] < problem.upper[i])
        .collect();

    let mut p = problem.initial.clone();
    let mut r = problem.residuals(&p)?;
    let mut rss = r.norm_squared();
    let initial_rss = rss;
    let mut rss_history = vec![rss];
    let mut lambda_history = Vec::new();
    let mut lambda: Option<f64> = None;
    let mut termination = Termination::MaxIter;
    let mut iters = 0;
    let mut jac = problem.jacobian(&p, &free)?;

    'outer: while iters < o.max_iter {
        if rss == 0.0 {
            termination = Termination::ExactFit;
            break;
        }
        if free.is_empty() {
            termination = Termination::Gradient;
            break;
        }
        let mut a = jac.transpose() * &jac;
        let mut g = jac.transpose() * &r;
        let max_diag = a.diagonal().max();
        // a parameter on a bound whose descent direction points outward is
        // held there for this iteration
        for (c, &i) in free.iter().enumerate() {
            let pinned = (p[i] <= problem.lower[i] && g[c] < 0.0)
                || (p[i] >= problem.upper[i] && g[c] > 0.0);
            if pinned {
                g[c] = 0.0;
                let d = a[(c, c)];
                a.row_mut(c).fill(0.0);
                a.column_mut(c).fill(0.0);
                a[(c, c)] = d;
            }
        }
        if !(max_diag > 0.0) {
            if iters == 0 {
                return Err(FitError::Singular {
                    lambda: lambda.unwrap_or(0.0),
                    detail: "the model does not depend on any free parameter".into(),
                });
            }
            // zero Jacobian after some progress: a flat stationary point
            termination = Termination::Gradient;
            break;
        }
        let rnorm = rss.sqrt();
        let cosine = (0..free.len())
            .filter(|&c| a[(c, c)] > 0.0)
            .map(|c| g[c].abs() / (a[(c, c)].sqrt() * rnorm))
            .fold(0.0, f64::max);
        if cosine <= o.gtol {
            termination = Termination::Gradient;
            break;
        }
        // Marquardt scaling: damp each direction in proportion to its own
        // curvature, so the schedule does not depend on parameter units
        let floor = 1e-12 * max_diag;
        let mut lam = lambda.unwrap_or(1e-3).clamp(o.lambda_min, o.lambda_max);
        iters += 1;
        loop {
            lambda_history.push(lam);
            let mut damped = a.clone();
            for c in 0..free.len() {
                damped[(c, c)] += lam * a[(c, c)].max(floor);
            }
            let trial = damped.cholesky().map(|ch| ch.solve(&g)).map(|delta| {
                let mut q = p.clone();
                for (c, &i) in free.iter().enumerate() {
                    q[i] += delta[c];
                }
                problem.project(&mut q);
                q
            });
            if let Some(q) = trial {
                // a model that blows up far from the data is a rejected step,
                // not a failure
                if let Ok(r_new) = problem.residuals(&q) {
                    let rss_new = r_new.norm_squared();
                    if rss_new < rss {
                        let small = free
                            .iter()
                            .all(|&i| (q[i] - p[i]).abs() <= o.xtol * (p[i].abs() + o.xtol));
                        p = q;
                        r = r_new;
                        rss = rss_new;
                        rss_history.push(rss);
                        lambda = Some((lam / 2.0).max(o.lambda_min));
                        jac = problem.jacobian(&p, &free)?;
                        if small {
                            termination = Termination::Step;
                            break 'outer;
                        }
                        continue 'outer;
                    }
                }
            }
            if lam * 2.0 > o.lambda_max {
                // residuals already at the rounding level of the data count
                // as an exact fit
                let y_max = problem.y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let floor = 64.0 * f64::EPSILON * y_max;
                let predicted = a
                    .clone()
                    .pseudo_inverse(1e-14 * max_diag)
                    .map(|ai| g.dot(&(ai * &g)))
                    .unwrap_or(f64::INFINITY);
                termination = if rss <= problem.y.len() as f64 * floor * floor {
                    Termination::ExactFit
                } else if predicted <= o.ftol * rss {
                    // finite-difference noise in the gradient, not a real descent direction
                    Termination::Gradient
                } else {
                    Termination::NoReduction
                };
                lambda = Some(lam);
                break 'outer;
            }
            lam *= 2.0;
        }
    }

    let m = problem.x.len();
    let stderr = standard_errors(&jac, &free, n, rss, m);
    let converged = termination != Termination::MaxIter && termination != Termination::NoReduction;
    let mut diagnostics = Vec::new();
    if !converged {
        diagnostics.push(format!(
            "stopped by {termination:?} after {iters} iterations, rss {rss:e}, damping {:e}",
            lambda.unwrap_or(0.0)
        ));
    }
    for &i in &free {
        if p[i] == problem.lower[i] || p[i] == problem.upper[i] {
            diagnostics.push(format!("{} = {} is at its bound", problem.names[i], p[i]));
        }
    }
    if stderr.iter().any(|s| s.is_infinite()) {
        diagnostics.push("normal matrix is singular; some parameters are unidentifiable".into());
    }
    Ok(FitResult {
        names: problem.names.clone(),
        params: p,
        stderr,
        rss,
        initial_rss,
        converged,
        iters,
        termination,
        rss_history,
        lambda_history,
        diagnostics,
    })
}

/// `sqrt(diag(s² (JᵀJ)⁻¹))`, computed through the eigendecomposition of the
/// column-scaled normal matrix so that a rank-deficient direction yields
/// infinity for exactly the parameters it involves.
fn standard_errors(jac: &DMatrix<f64>, free: &[usize], n: usize, rss: f64, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if free.is_empty() {
        return out;
    }
    let k = free.len();
    let s2 = if m > k {
        rss / (m - k) as f64
    } else {
        f64::INFINITY
    };
    let a = jac.transpose() * jac;
    let scale: Vec<f64> = (0..k).map(|c| a[(c, c)].sqrt()).collect();
    let mut scaled = a.clone();
    for i in 0..k {
        for j in 0..k {
            if scale[i] > 0.0 && scale[j] > 0.0 {
                scaled[(i, j)] /= scale[i] * scale[j];
            } else {
                scaled[(i, j)] = 0.0;
            }
        }
    }
    let eig = scaled.symmetric_eigen();
    let top = eig.eigenvalues.max().max(0.0);
    let cutoff = top * 1e-14;
    for (c, &i) in free.iter().enumerate() {
        if scale[c] == 0.0 {
            out[i] = f64::INFINITY;
            continue;
        }
        let mut var = 0.0;
        for e in 0..k {
            let v = eig.eigenvectors[(c, e)];
            if eig.eigenvalues[e] > cutoff {
                var += v * v / eig.eigenvalues[e];
            } else if v.abs() > 1e-8 {
                var = f64::INFINITY;
            }
        }
        out[i] = if var.is_infinite() {
            f64::INFINITY
        } else {
            (s2 * var).sqrt() / scale[c]
        };
    }
    out
}
