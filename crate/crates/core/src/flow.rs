//! Discretized negative gradient flow of the total frame energy.
//!
//! Plain gradient descent with Armijo backtracking. Termination is decided
//! by the gradient norm; the outcome is then classified by the Parseval and
//! norm residuals so that non-minimizing critical points are reported as
//! such rather than as successes.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::admissibility::require_admissible;
use crate::energy::{energy_with, gradient_with, residuals};
use crate::error::{FrameError, Result};
use crate::frame::{Field, FrameMatrix, Scalar};
use crate::spec::{NormSpec, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub max_iters: usize,
    pub initial_step: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub tolerances: Tolerances,
    /// Telemetry stride.
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            initial_step: 0.05,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            tolerances: Tolerances::default(),
            record_every: 100,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if self.max_iters == 0
            || self.record_every == 0
            || !(self.initial_step.is_finite() && self.initial_step > 0.0)
            || !unit(self.armijo_c)
            || !unit(self.backtrack_factor)
        {
            return Err(FrameError::OutOfRange(format!("invalid flow config: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    ConvergedToPF,
    ConvergedToCriticalPoint,
    IterationBudgetExhausted,
    /// The line search could not find any decrease before the step
    /// underflowed, with the gradient still above `grad_tol`.
    LineSearchStalled,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Outcome::ConvergedToPF => "ConvergedToPF",
            Outcome::ConvergedToCriticalPoint => "ConvergedToCriticalPoint",
            Outcome::IterationBudgetExhausted => "IterationBudgetExhausted",
            Outcome::LineSearchStalled => "LineSearchStalled",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    #[serde(skip)]
    pub terminal: FrameMatrix,
    pub iterations: usize,
    pub terminal_energy: f64,
    pub terminal_grad_norm: f64,
    /// ‖FF* − I‖_Fr
    pub parseval_residual: f64,
    /// max_i |‖f_i‖² − r_i|
    pub norm_residual: f64,
    pub outcome: Outcome,
    pub trace: Vec<TraceSample>,
    /// Columns that are exactly zero both at the start and at the end.
    pub zero_column_indices: BTreeSet<usize>,
}

// below this the step is treated as having underflowed
const MIN_STEP: f64 = 1e-18;

/// Runs the descent from `start`. The spec must be admissible.
pub fn descend(start: &FrameMatrix, spec: &NormSpec, cfg: &FlowConfig) -> Result<FlowReport> {
    descend_with_observer(start, spec, cfg, |_, _| {})
}

/// Like [`descend`], calling `observer(iteration, iterate)` on the starting
/// point and on every accepted iterate.
pub fn descend_with_observer<O>(
    start: &FrameMatrix,
    spec: &NormSpec,
    cfg: &FlowConfig,
    mut observer: O,
) -> Result<FlowReport>
where
    O: FnMut(usize, &FrameMatrix),
{
    cfg.validate()?;
    require_admissible(spec)?;
    if start.n() != spec.n() || start.d() != spec.d() {
        return Err(FrameError::DimensionMismatch(format!(
            "frame is {}x{} but the spec asks for d = {}, n = {}",
            start.d(),
            start.n(),
            spec.d(),
            spec.n()
        )));
    }
    if !start.is_finite() {
        return Err(FrameError::NonFiniteEncountered { iteration: 0, what: "initial frame".into() });
    }

    let r = spec.r_f64();
    let tol = cfg.tolerances;
    let initial_zeros = start.exact_zero_columns();

    let mut current = start.clone();
    let mut e = energy_with(&current, &r).total;
    let mut grad = gradient_with(&current, &r);
    let mut gnorm = grad.norm_fro();
    ensure_finite(0, e, gnorm)?;

    let mut trace = vec![TraceSample { iteration: 0, energy: e, grad_norm: gnorm }];
    observer(0, &current);

    let mut iter = 0;
    let mut stalled = false;
    while gnorm >= tol.grad_tol && iter < cfg.max_iters {
        let g2 = gnorm * gnorm;
        let mut t = cfg.initial_step;
        let accepted = loop {
            let trial = step(&current, &grad, t);
            let e_trial = energy_with(&trial, &r).total;
            if !e_trial.is_finite() {
                return Err(FrameError::NonFiniteEncountered {
                    iteration: iter + 1,
                    what: format!("trial energy at step {t:e}"),
                });
            }
            if e_trial <= e - cfg.armijo_c * t * g2 {
                break Some((trial, e_trial));
            }
            t *= cfg.backtrack_factor;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((next, e_next)) = accepted else {
            stalled = true;
            break;
        };

        iter += 1;
        current = next;
        e = e_next;
        grad = gradient_with(&current, &r);
        gnorm = grad.norm_fro();
        ensure_finite(iter, e, gnorm)?;
        observer(iter, &current);
        if iter % cfg.record_every == 0 {
            trace.push(TraceSample { iteration: iter, energy: e, grad_norm: gnorm });
        }
    }
    if trace.last().map(|s| s.iteration) != Some(iter) {
        trace.push(TraceSample { iteration: iter, energy: e, grad_norm: gnorm });
    }

    let (parseval_residual, norm_residual) = residuals(&current, &r);
    let in_pf = parseval_residual < tol.residual_tol && norm_residual < tol.residual_tol;
    let outcome = if gnorm < tol.grad_tol || (stalled && in_pf) {
        if in_pf {
            Outcome::ConvergedToPF
        } else {
            Outcome::ConvergedToCriticalPoint
        }
    } else if stalled {
        Outcome::LineSearchStalled
    } else {
        Outcome::IterationBudgetExhausted
    };

    let final_zeros: BTreeSet<usize> = current.exact_zero_columns().into_iter().collect();
    let zero_column_indices = initial_zeros.into_iter().filter(|j| final_zeros.contains(j)).collect();

    Ok(FlowReport {
        terminal: current,
        iterations: iter,
        terminal_energy: e,
        terminal_grad_norm: gnorm,
        parseval_residual,
        norm_residual,
        outcome,
        trace,
        zero_column_indices,
    })
}

fn ensure_finite(iteration: usize, e: f64, gnorm: f64) -> Result<()> {
    if e.is_finite() && gnorm.is_finite() {
        Ok(())
    } else {
        Err(FrameError::NonFiniteEncountered {
            iteration,
            what: format!("energy {e}, gradient norm {gnorm}"),
        })
    }
}

// F − t·G; a zero column of F has a zero gradient column, so it stays
// bitwise zero.
fn step(frame: &FrameMatrix, grad: &FrameMatrix, t: f64) -> FrameMatrix {
    let next = frame.as_matrix() - grad.as_matrix() * Scalar::new(t, 0.0);
    FrameMatrix::from_parts(frame.field(), next)
}

/// i.i.d. standard Gaussian d×n matrix (independent real and imaginary
/// parts for the complex field), deterministic for a given seed.
pub fn random_full_spark_init(d: usize, n: usize, field: Field, seed: u64) -> Result<FrameMatrix> {
    if d == 0 || n < d {
        return Err(FrameError::InvalidDimensions(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(gaussian_matrix(d, n, field, &mut rng))
}

pub(crate) fn gaussian_matrix<R: rand::Rng>(d: usize, n: usize, field: Field, rng: &mut R) -> FrameMatrix {
    let mut entries = Vec::with_capacity(d * n);
    for _ in 0..d * n {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => StandardNormal.sample(rng),
        };
        entries.push(Scalar::new(re, im));
    }
    FrameMatrix::from_parts(field, DMatrix::from_row_slice(d, n, &entries))
}
