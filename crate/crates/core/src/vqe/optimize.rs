use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Executor, Gradient, State, TerminationReason, KV};
use argmin::solver::linesearch::condition::ArmijoCondition;
use argmin::solver::linesearch::BacktrackingLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::BFGS;
use serde::{Deserialize, Serialize};

use super::{energy_gradient, evaluate, VqeProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Quasi-Newton on central finite-difference gradients.
    #[default]
    Bfgs,
    NelderMead,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfgs" => Ok(Self::Bfgs),
            "nelder_mead" | "nelder-mead" => Ok(Self::NelderMead),
            _ => Err(Error::Argument(format!("unknown optimizer \"{s}\" (expected bfgs or nelder_mead)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub kind: OptimizerKind,
    pub max_iterations: u64,
    /// Stop once an iteration lowers the energy by less than this.
    pub energy_tolerance: f64,
    /// Quasi-Newton stops once the gradient norm drops below this.
    pub gradient_tolerance: f64,
    pub finite_difference_step: f64,
    /// Edge length of the initial simplex.
    pub simplex_step: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Bfgs,
            max_iterations: 500,
            energy_tolerance: 1e-7,
            gradient_tolerance: 1e-6,
            finite_difference_step: 1e-4,
            simplex_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub energy: f64,
    pub parameters: Vec<f64>,
    pub iterations: u64,
    /// Best energy after initialization and after each iteration.
    pub energy_history: Vec<f64>,
    pub truncation_error_max: f64,
    pub energy_evaluations: u64,
    pub converged: bool,
}

struct Tracker {
    best: Option<(f64, Vec<f64>)>,
    truncation_error_max: f64,
    evaluations: u64,
    gradient_cache: Option<(Vec<f64>, Vec<f64>)>,
}

struct Objective<'a> {
    problem: &'a VqeProblem,
    workers: usize,
    tracker: Mutex<Tracker>,
}

impl Objective<'_> {
    fn energy(&self, theta: &[f64], record: bool) -> Result<f64> {
        let e = evaluate(self.problem, theta, self.workers)?;
        let mut t = self.tracker.lock().expect("tracker lock");
        t.evaluations += 1;
        t.truncation_error_max = t.truncation_error_max.max(e.truncation_error);
        if record && t.best.as_ref().is_none_or(|(b, _)| e.energy < *b) {
            t.best = Some((e.energy, theta.to_vec()));
        }
        Ok(e.energy)
    }
}

impl CostFunction for &Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.energy(theta, true)?)
    }
}

impl Gradient for &Objective<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, theta: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        if let Some((p, g)) = &self.tracker.lock().expect("tracker lock").gradient_cache {
            if p == theta {
                return Ok(g.clone());
            }
        }
        let h = self.problem.optimizer.finite_difference_step;
        let grad = energy_gradient(self.problem, theta, h, self.workers)?;
        {
            let mut t = self.tracker.lock().expect("tracker lock");
            t.evaluations += 2 * theta.len() as u64;
        }
        self.tracker.lock().expect("tracker lock").gradient_cache = Some((theta.clone(), grad.clone()));
        Ok(grad)
    }
}

#[derive(Clone, Default)]
struct History(Arc<Mutex<Vec<f64>>>);

impl<I: State<Float = f64>> Observe<I> for History {
    fn observe_init(&mut self, _name: &str, state: &I, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        if state.get_best_cost().is_finite() {
            self.0.lock().expect("history lock").push(state.get_best_cost());
        }
        Ok(())
    }

    fn observe_iter(&mut self, state: &I, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        self.0.lock().expect("history lock").push(state.get_best_cost());
        Ok(())
    }
}

fn into_error(e: argmin::core::Error) -> Error {
    match e.downcast::<Error>() {
        Ok(inner) => inner,
        Err(other) => Error::Optimizer(other.to_string()),
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

/// Runs the configured local optimizer from `theta0` and returns the best
/// point seen.
pub fn minimize(problem: &VqeProblem, theta0: &[f64], workers: usize) -> Result<VqeResult> {
    problem.check_theta(theta0)?;
    if workers == 0 {
        return Err(Error::Argument("at least one worker is required".into()));
    }
    let settings = problem.optimizer;
    let objective = Objective {
        problem,
        workers,
        tracker: Mutex::new(Tracker {
            best: None,
            truncation_error_max: 0.0,
            evaluations: 0,
            gradient_cache: None,
        }),
    };
    let history = History::default();
    let n = theta0.len();
    let (iterations, converged) = if n == 0 {
        let e = objective.energy(theta0, true)?;
        history.0.lock().expect("history lock").push(e);
        (0, true)
    } else {
        match settings.kind {
            OptimizerKind::Bfgs => {
                // cost-only line search: one finite-difference gradient per iteration
                let linesearch = BacktrackingLineSearch::new(ArmijoCondition::new(1e-4).map_err(into_error)?)
                    .rho(0.5)
                    .map_err(into_error)?;
                let solver = BFGS::new(linesearch)
                    .with_tolerance_cost(settings.energy_tolerance)
                    .map_err(into_error)?
                    .with_tolerance_grad(settings.gradient_tolerance)
                    .map_err(into_error)?;
                let res = Executor::new(&objective, solver)
                    .configure(|s| s.param(theta0.to_vec()).inv_hessian(identity(n)).max_iters(settings.max_iterations))
                    .add_observer(history.clone(), ObserverMode::Always)
                    .timer(false)
                    .ctrlc(false)
                    .run()
                    .map_err(into_error)?;
                let state = res.state();
                (state.get_iter(), state.get_termination_reason() == Some(&TerminationReason::SolverConverged))
            }
            OptimizerKind::NelderMead => {
                let mut simplex = vec![theta0.to_vec()];
                for k in 0..n {
                    let mut v = theta0.to_vec();
                    v[k] += settings.simplex_step;
                    simplex.push(v);
                }
                let solver = NelderMead::new(simplex)
                    .with_sd_tolerance(settings.energy_tolerance)
                    .map_err(into_error)?;
                let res = Executor::new(&objective, solver)
                    .configure(|s| s.max_iters(settings.max_iterations))
                    .add_observer(history.clone(), ObserverMode::Always)
                    .timer(false)
                    .ctrlc(false)
                    .run()
                    .map_err(into_error)?;
                let state = res.state();
                (state.get_iter(), state.get_termination_reason() == Some(&TerminationReason::SolverConverged))
            }
        }
    };
    let tracker = objective.tracker.into_inner().expect("tracker lock");
    let (energy, parameters) = tracker.best.expect("at least one energy was evaluated");
    let energy_history = Arc::try_unwrap(history.0)
        .map(|m| m.into_inner().expect("history lock"))
        .unwrap_or_else(|a| a.lock().expect("history lock").clone());
    Ok(VqeResult {
        energy,
        parameters,
        iterations,
        energy_history,
        truncation_error_max: tracker.truncation_error_max,
        energy_evaluations: tracker.evaluations,
        converged,
    })
}
