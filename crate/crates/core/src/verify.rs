//! Error measurement against a fine-grid reference and grid convergence
//! studies.
//!
//! The reference solution is a Crank-Nicolson run on a mesh refined by an
//! integer factor, so every coarse node coincides with a fine node and the
//! reference is read off without interpolation.

use std::thread;

use serde::Serialize;
use thiserror::Error;

use crate::discretise::{build_mesh, Discretisation, DiscretiseError, FullState, Mesh};
use crate::problem::Problem;
use crate::stepper::{march, Scheme, StepError, Stepper};

/// Default refinement of the oracle mesh relative to the query mesh.
pub const ORACLE_REFINEMENT: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("reference solution is identically zero; relative error undefined")]
    ZeroReference,
    #[error("states have different shapes")]
    ShapeMismatch,
    #[error("evaluation time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("oracle mesh (n = {fine}) does not nest the query mesh (n = {coarse})")]
    NonNesting { coarse: usize, fine: usize },
    #[error("spacing {h} does not divide layer width {width} into a whole number of intervals")]
    IncommensurateSpacing { h: f64, width: f64 },
    #[error("spacings must be positive and decrease by factors of 2")]
    SpacingSequence,
    #[error(transparent)]
    Discretise(#[from] DiscretiseError),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// `max |u_ref − u_num| / max |u_ref|` over all nodes, interface duplicates
/// included.
pub fn relative_error(numeric: &FullState, reference: &FullState) -> Result<f64, VerifyError> {
    if numeric.values.len() != reference.values.len()
        || numeric.values.iter().zip(&reference.values).any(|(a, b)| a.len() != b.len())
    {
        return Err(VerifyError::ShapeMismatch);
    }
    let scale = reference.max_abs();
    if scale == 0.0 {
        return Err(VerifyError::ZeroReference);
    }
    let diff = numeric
        .iter()
        .zip(reference.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(diff / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provider {
    FineGridOracle { n_fine: usize, tau_fine: f64, steps: usize },
    ExternalTable,
}

/// Reference values at the nodes of a query mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub provider: Provider,
    pub t: f64,
    pub state: FullState,
}

/// Crank-Nicolson reference with `n_fine = 16 n` restricted to `query`.
pub fn fine_grid_oracle(problem: &Problem, t: f64, query: &Mesh) -> Result<Reference, VerifyError> {
    fine_grid_oracle_with(problem, t, query, ORACLE_REFINEMENT)
}

/// Oracle with an explicit refinement factor.
///
/// The step is the largest `t / K` with `τ ≤ h_fine / 10`, so that
/// `τ² ≤ 0.01 h_fine²`. The first step is replaced by four backward Euler
/// quarter steps, which damps the stiff components excited by initial data
/// that disagree with the boundary conditions.
pub fn fine_grid_oracle_with(
    problem: &Problem,
    t: f64,
    query: &Mesh,
    refinement: usize,
) -> Result<Reference, VerifyError> {
    if !(t > 0.0) {
        return Err(VerifyError::NonPositiveTime(t));
    }
    let coarse = query.n();
    let n_fine = coarse * refinement;
    if refinement == 0 {
        return Err(VerifyError::NonNesting { coarse, fine: n_fine });
    }
    let fine = Discretisation::new(problem, n_fine)?;
    let h_min = fine.mesh.spacings().iter().copied().fold(f64::INFINITY, f64::min);
    let steps = (t / (0.1 * h_min)).ceil().max(1.0) as usize;
    let tau = t / steps as f64;

    let sys = &fine.system;
    let mut u = fine.initial(problem);
    let mut start = Stepper::new(Scheme::BackwardEuler, &sys.a, &sys.b, 0.25 * tau)?;
    for _ in 0..4 {
        start.advance(&mut u)?;
    }
    let mut cn = Stepper::new(Scheme::CrankNicolson, &sys.a, &sys.b, tau)?;
    for _ in 1..steps {
        cn.advance(&mut u)?;
    }
    let full = fine.reconstruct(&u)?;
    let values = full
        .values
        .iter()
        .map(|layer| (0..=coarse).map(|j| layer[j * refinement]).collect())
        .collect();
    Ok(Reference {
        provider: Provider::FineGridOracle {
            n_fine,
            tau_fine: tau,
            steps,
        },
        t,
        state: FullState { values },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub h: f64,
    pub n: usize,
    pub error: f64,
    /// `error(2h) / error(h)`; absent for the coarsest spacing.
    pub ratio: Option<f64>,
}

/// Intervals per layer giving spacing `h` on the widest layer.
pub fn intervals_for_spacing(problem: &Problem, h: f64) -> Result<usize, VerifyError> {
    let width = problem.layers().iter().map(|l| l.width()).fold(0.0, f64::max);
    let n = (width / h).round();
    if !(h > 0.0) || n < 1.0 || ((n * h - width).abs() > 1e-9 * width) {
        return Err(VerifyError::IncommensurateSpacing { h, width });
    }
    Ok(n as usize)
}

/// Error of one scheme at one resolution against the fine-grid oracle.
pub fn error_at(problem: &Problem, n: usize, tau: f64, t_eval: f64, scheme: Scheme) -> Result<f64, VerifyError> {
    let d = Discretisation::new(problem, n)?;
    let u0 = d.initial(problem);
    let run = march(&d.system, &d.map, &u0, tau, t_eval, scheme, &[])?;
    let reference = fine_grid_oracle(problem, t_eval, &d.mesh)?;
    relative_error(&run.final_state, &reference.state)
}

/// Errors and successive ratios for a sequence of spacings halving each
/// time. Spacings refer to the widest layer. Cells run concurrently.
pub fn convergence_study(
    problem: &Problem,
    tau: f64,
    h_list: &[f64],
    t_eval: f64,
    scheme: Scheme,
) -> Result<Vec<ErrorRecord>, VerifyError> {
    for w in h_list.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(VerifyError::SpacingSequence);
        }
    }
    let ns = h_list
        .iter()
        .map(|&h| intervals_for_spacing(problem, h))
        .collect::<Result<Vec<_>, _>>()?;
    let errors: Vec<Result<f64, VerifyError>> = thread::scope(|s| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| s.spawn(move || error_at(problem, n, tau, t_eval, scheme)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("study cell panicked")).collect()
    });
    let mut records: Vec<ErrorRecord> = Vec::with_capacity(h_list.len());
    for ((&h, &n), error) in h_list.iter().zip(&ns).zip(errors) {
        let error = error?;
        let ratio = records.last().map(|prev| prev.error / error);
        records.push(ErrorRecord { h, n, error, ratio });
    }
    Ok(records)
}

/// Least-squares slope of `log error` against `log h`.
pub fn fitted_order(records: &[ErrorRecord]) -> f64 {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.h.ln(), r.error.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Query mesh helper used when only `n` is known.
pub fn query_mesh(problem: &Problem, n: usize) -> Result<Mesh, VerifyError> {
    Ok(build_mesh(problem, n)?)
}
