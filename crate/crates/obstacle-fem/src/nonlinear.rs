//! Damped semismooth Newton driver shared by both obstacle problems.
//!
//! The driver minimizes a convex energy whose gradient (the residual) is
//! piecewise smooth: penalty terms contribute negative-part kinks, so the
//! Jacobian is the semismooth generalized derivative and may change its
//! active set between iterations. Each iteration
//!
//! ```text
//! solve J(x) d = -r(x)          (sparse Cholesky)
//! find the largest a in {1, 1/2, 1/4, ...} with E(x + a d) <= E(x)
//! x <- x + a d
//! ```
//!
//! and the loop stops when the residual norm (or optionally the increment
//! norm) drops to the tolerance. Energies here are convex, so the Newton
//! direction is always a descent direction and backtracking terminates; the
//! halving budget is a safety net, and an exhausted budget accepts the last
//! (tiny) step rather than stalling forever.
//!
//! An optional polish step takes one extra full Newton step after the
//! tolerance is first met. It costs one solve and pushes independent starts
//! onto the same iterate to near machine precision, which the reproducibility
//! checks rely on; it is skipped when the residual is already far below the
//! tolerance and reverted if it fails to improve.

use crate::sparse::{norm2, CsrMatrix, SparseError};
use thiserror::Error;

/// Default residual tolerance for the stopping rule.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default iteration budget.
pub const DEFAULT_MAX_ITER: usize = 50;
/// Default backtracking budget per iteration.
pub const DEFAULT_MAX_HALVINGS: usize = 30;
/// The polish step is skipped when the residual is already below this
/// fraction of the tolerance (nothing left to polish at that scale).
pub const POLISH_SKIP_FACTOR: f64 = 1e-2;
/// Relative slack when comparing trial energies: near the minimum the true
/// energy decrease drops below floating-point resolution, so an exactly
/// flat comparison would reject good steps on roundoff noise.
pub const ENERGY_DECREASE_SLACK: f64 = 1e-12;

/// Which quantity the stopping rule tests against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingRule {
    /// Euclidean norm of the residual vector (default).
    Residual,
    /// Euclidean norm of the damped Newton increment.
    Increment,
}

/// Newton driver settings.
#[derive(Debug, Clone)]
pub struct NewtonConfig {
    /// Stopping tolerance.
    pub tol: f64,
    /// Maximum Newton iterations before giving up.
    pub max_iter: usize,
    /// Maximum step halvings per iteration.
    pub max_halvings: usize,
    /// Quantity tested by the stopping rule.
    pub stopping: StoppingRule,
    /// Take one extra full Newton step after the tolerance is met.
    pub polish: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            max_halvings: DEFAULT_MAX_HALVINGS,
            stopping: StoppingRule::Residual,
            polish: true,
        }
    }
}

/// What happened during a Newton run.
#[derive(Debug, Clone)]
pub struct NewtonReport {
    /// Newton steps taken (the polish step counts).
    pub iterations: usize,
    /// Residual norm after each evaluation, starting with the initial guess.
    pub residual_history: Vec<f64>,
    /// Whether the stopping rule was satisfied.
    pub converged: bool,
    /// Total step halvings across all iterations.
    pub step_halvings: usize,
}

/// Newton failures; both variants carry the partial report and last iterate
/// so drivers can record what happened.
#[derive(Debug, Error)]
pub enum NewtonError {
    #[error(
        "Newton did not converge within {} iterations (last residual {:.3e})",
        report.iterations,
        report.residual_history.last().copied().unwrap_or(f64::NAN)
    )]
    MaxIterationsExceeded { report: NewtonReport, x: Vec<f64> },
    #[error("linear solve failed at Newton iteration {}: {source}", report.iterations)]
    LinearSolve {
        report: NewtonReport,
        x: Vec<f64>,
        source: SparseError,
    },
}

impl NewtonError {
    /// The partial report carried by either failure variant.
    pub fn report(&self) -> &NewtonReport {
        match self {
            NewtonError::MaxIterationsExceeded { report, .. } => report,
            NewtonError::LinearSolve { report, .. } => report,
        }
    }
}

/// Runs damped Newton from `x0` on the system given by the three callbacks.
///
/// `residual_fn` must be the gradient of `energy_fn`, and `jacobian_fn` its
/// (generalized) derivative, symmetric positive definite wherever it is
/// evaluated; the finite-difference consistency of these callbacks is the
/// problem modules' responsibility and is covered by their tests.
///
/// Returns the converged iterate and a [`NewtonReport`]. A start that
/// already satisfies the stopping rule returns immediately with zero
/// iterations (no polish).
///
/// # Errors
/// [`NewtonError::MaxIterationsExceeded`] when the budget runs out, and
/// [`NewtonError::LinearSolve`] when the Jacobian solve fails; both carry
/// the partial report and the last iterate.
pub fn newton(
    residual_fn: &dyn Fn(&[f64]) -> Vec<f64>,
    jacobian_fn: &dyn Fn(&[f64]) -> CsrMatrix,
    energy_fn: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    config: &NewtonConfig,
) -> Result<(Vec<f64>, NewtonReport), NewtonError> {
    assert!(config.tol > 0.0, "tolerance must be positive, got {}", config.tol);
    let mut x = x0.to_vec();
    let mut residual = residual_fn(&x);
    assert!(
        residual.len() == x.len(),
        "residual length {} does not match state length {}",
        residual.len(),
        x.len()
    );
    let mut residual_norm = norm2(&residual);
    let mut report = NewtonReport {
        iterations: 0,
        residual_history: vec![residual_norm],
        converged: false,
        step_halvings: 0,
    };

    if config.stopping == StoppingRule::Residual && residual_norm <= config.tol {
        report.converged = true;
        return Ok((x, report));
    }

    let mut polishing = false;
    loop {
        if report.iterations >= config.max_iter {
            return Err(NewtonError::MaxIterationsExceeded { report, x });
        }

        let jacobian = jacobian_fn(&x);
        let neg_residual: Vec<f64> = residual.iter().map(|&r| -r).collect();
        let direction = match jacobian.solve_spd(&neg_residual) {
            Ok(d) => d,
            Err(source) => {
                return Err(NewtonError::LinearSolve { report, x, source });
            }
        };

        // Backtrack until the energy stops increasing. The polish step is
        // taken at full length unconditionally: it starts inside the basin
        // of quadratic convergence where damping can only hurt.
        let mut step = 1.0;
        let mut trial: Vec<f64>;
        if polishing {
            trial = x.iter().zip(&direction).map(|(&xi, &di)| xi + di).collect();
        } else {
            let energy_here = energy_fn(&x);
            loop {
                trial = x
                    .iter()
                    .zip(&direction)
                    .map(|(&xi, &di)| xi + step * di)
                    .collect();
                let energy_trial = energy_fn(&trial);
                let slack = ENERGY_DECREASE_SLACK * (energy_here.abs() + energy_trial.abs());
                if energy_trial <= energy_here + slack {
                    break;
                }
                if report.step_halvings >= config.max_halvings * config.max_iter
                    || step <= f64::EPSILON
                {
                    break;
                }
                step *= 0.5;
                report.step_halvings += 1;
            }
        }

        let trial_residual = residual_fn(&trial);
        let trial_norm = norm2(&trial_residual);
        report.iterations += 1;

        if polishing {
            // Keep the polish step only if it actually improved the
            // residual; otherwise the pre-polish iterate stands.
            if trial_norm <= residual_norm {
                x = trial;
                report.residual_history.push(trial_norm);
            } else {
                report.iterations -= 1;
            }
            report.converged = true;
            return Ok((x, report));
        }

        x = trial;
        residual = trial_residual;
        residual_norm = trial_norm;
        report.residual_history.push(residual_norm);

        let increment_norm = step * norm2(&direction);
        let met = match config.stopping {
            StoppingRule::Residual => residual_norm <= config.tol,
            StoppingRule::Increment => increment_norm <= config.tol,
        };
        if met {
            if config.polish && residual_norm > POLISH_SKIP_FACTOR * config.tol {
                polishing = true;
                continue;
            }
            report.converged = true;
            return Ok((x, report));
        }
    }
}
