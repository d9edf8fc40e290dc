//! Derivative-free local search (adaptive Nelder–Mead) and the multi-restart
//! driver used by every optimizer-backed measure.

use crate::error::{QccError, Result};
use crate::par::{self, Execution};
use crate::rng::Seed;

/// Restarts used when minimizing over degenerate eigenbasis families.
pub const DEGENERACY_RESTARTS: usize = 8;
/// Restarts used by the extension searches.
pub const EXTENSION_RESTARTS: usize = 32;
/// Best value is recorded every this many iterations in a restart trace.
const TRACE_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once the best value improved by less than `tolerance` over this many iterations.
    pub stall_iters: usize,
    pub tolerance: f64,
    /// Weight `μ` of the squared symmetry residual in the symmetric-extension objective.
    pub penalty_weight: f64,
    /// Initial simplex edge length.
    pub initial_step: f64,
    pub seed: Seed,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: EXTENSION_RESTARTS,
            max_iters: 6000,
            stall_iters: 50,
            tolerance: 1e-10,
            penalty_weight: 10.0,
            initial_step: 0.3,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    /// Defaults for the degenerate-eigenbasis minimization.
    pub fn degeneracy() -> Self {
        Self {
            restarts: DEGENERACY_RESTARTS,
            max_iters: 3000,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(QccError::InvalidArgument(
                "restarts must be at least 1".into(),
            ));
        }
        if self.penalty_weight.is_nan() || self.penalty_weight < 0.0 {
            return Err(QccError::InvalidArgument(
                "penalty weight must be non-negative".into(),
            ));
        }
        if self.max_iters == 0 || self.stall_iters == 0 {
            return Err(QccError::InvalidArgument(
                "iteration limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// What one restart did.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub restart: usize,
    pub initial_value: f64,
    pub final_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after every tenth iteration.
    pub trace: Vec<f64>,
}

/// Aggregate over all restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerReport {
    pub best_value: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartTrace>,
}

impl OptimizerReport {
    pub fn any_converged(&self) -> bool {
        self.restarts.iter().any(|r| r.converged)
    }

    pub fn total_evaluations(&self) -> usize {
        self.restarts.iter().map(|r| r.evaluations).sum()
    }
}

/// Result of one local search.
#[derive(Debug, Clone)]
pub struct LocalMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Adaptive Nelder–Mead (dimension-dependent coefficients) started from a
/// right-angled simplex of edge `step` around `x0`.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, config: &OptimizerConfig) -> LocalMinimum
where
    F: Fn(&[f64]) -> f64,
{
    nelder_mead_until(f, x0, step, config, f64::NEG_INFINITY)
}

/// As [`nelder_mead`], additionally stopping (as converged) once the best
/// value drops to `floor` or below.
///
/// A search cycle ends when the simplex values spread by less than
/// `tolerance`, or the best value improved by less than `tolerance` over
/// `max(stall_iters, 2n)` iterations. The simplex is then rebuilt around the
/// best point; the search has converged when a whole cycle brings no improvement.
pub fn nelder_mead_until<F>(
    f: F,
    x0: &[f64],
    step: f64,
    config: &OptimizerConfig,
    floor: f64,
) -> LocalMinimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let v = eval(x0);
        return LocalMinimum {
            x: Vec::new(),
            value: v,
            iterations: 0,
            evaluations: 1,
            converged: true,
            trace: vec![v],
        };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let window = config.stall_iters.max(2 * n);
    let trial = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + t * (ci - wi)).collect()
    };

    let mut best_x = x0.to_vec();
    let mut best_value = eval(x0);
    let mut evaluations = 1;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut converged = false;

    'cycles: while iterations < config.max_iters {
        let cycle_start = best_value;
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        simplex.push(best_x.clone());
        values.push(best_value);
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] += step;
            values.push(eval(&v));
            simplex.push(v);
        }
        evaluations += n;
        let mut order: Vec<usize> = (0..=n).collect();
        let mut history: Vec<f64> = Vec::new();
        let mut centroid = vec![0.0; n];

        loop {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let (best, second, worst) = (order[0], order[n - 1], order[n]);
            best_x.clone_from(&simplex[best]);
            best_value = values[best];
            history.push(best_value);
            if iterations % TRACE_EVERY == 0 {
                trace.push(best_value);
            }
            if best_value <= floor {
                converged = true;
                break 'cycles;
            }
            let spread = values[worst] - best_value;
            let stalled = history.len() > window
                && history[history.len() - 1 - window] - best_value < config.tolerance;
            if spread < config.tolerance || stalled {
                break;
            }
            if iterations >= config.max_iters {
                break 'cycles;
            }
            iterations += 1;

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &k in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                    *c += x / nf;
                }
            }
            let xr = trial(&centroid, &simplex[worst], alpha);
            let fr = eval(&xr);
            evaluations += 1;
            if fr < values[best] {
                let xe = trial(&centroid, &simplex[worst], gamma);
                let fe = eval(&xe);
                evaluations += 1;
                if fe < fr {
                    simplex[worst] = xe;
                    values[worst] = fe;
                } else {
                    simplex[worst] = xr;
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second] {
                simplex[worst] = xr;
                values[worst] = fr;
                continue;
            }
            let t = if fr < values[worst] {
                alpha * rho
            } else {
                -rho
            };
            let xc = trial(&centroid, &simplex[worst], t);
            let fc = eval(&xc);
            evaluations += 1;
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
                continue;
            }
            let xb = simplex[best].clone();
            for &k in &order[1..] {
                let shrunk: Vec<f64> = xb
                    .iter()
                    .zip(&simplex[k])
                    .map(|(b, x)| b + sigma * (x - b))
                    .collect();
                values[k] = eval(&shrunk);
                simplex[k] = shrunk;
            }
            evaluations += n;
        }
        if cycle_start - best_value < config.tolerance {
            converged = true;
            break;
        }
    }

    trace.push(best_value);
    LocalMinimum {
        x: best_x,
        value: best_value,
        iterations,
        evaluations,
        converged,
        trace,
    }
}

/// Run `config.restarts` independent local searches. `run(restart)` performs
/// restart number `restart` and returns its local minimum plus any payload the
/// caller wants back. Restarts are reduced by minimum value, ties going to the
/// lower restart index, so the outcome does not depend on execution order.
pub fn multistart<T, F>(config: &OptimizerConfig, run: F) -> (OptimizerReport, T)
where
    T: Send,
    F: Fn(usize) -> (LocalMinimum, T) + Sync + Send,
{
    let (report, payloads) = multistart_all(config, run);
    let best = report.best_restart;
    (
        report,
        payloads
            .into_iter()
            .nth(best)
            .expect("at least one restart"),
    )
}

/// As [`multistart`], returning every restart's payload in restart order.
pub fn multistart_all<T, F>(config: &OptimizerConfig, run: F) -> (OptimizerReport, Vec<T>)
where
    T: Send,
    F: Fn(usize) -> (LocalMinimum, T) + Sync + Send,
{
    let results = par::map_indexed(config.execution, config.restarts.max(1), run);
    let mut traces = Vec::with_capacity(results.len());
    let mut payloads = Vec::with_capacity(results.len());
    let (mut best_restart, mut best_value) = (0, f64::INFINITY);
    for (k, (local, payload)) in results.into_iter().enumerate() {
        if k == 0 || local.value < best_value {
            best_restart = k;
            best_value = local.value;
        }
        traces.push(RestartTrace {
            restart: k,
            initial_value: local.trace.first().copied().unwrap_or(local.value),
            final_value: local.value,
            iterations: local.iterations,
            evaluations: local.evaluations,
            converged: local.converged,
            trace: local.trace,
        });
        payloads.push(payload);
    }
    (
        OptimizerReport {
            best_value,
            best_restart,
            restarts: traces,
        },
        payloads,
    )
}
