//! Fixed-step time integration of `du/dt = A u + b`.
//!
//! * forward Euler: `u' = u + τ (A u + b)`
//! * backward Euler: `(I − τA) u' = u + τ b`
//! * Crank-Nicolson: `(I − τA/2) u' = (I + τA/2) u + τ b`
//!
//! Implicit operators are factored once per march and reused.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretise::{reconstruct_full, DiscretiseError, FullState, SemiDiscreteSystem, UnknownMap};
use crate::tridiag::{thomas_solve, LinalgError, ThomasFactor, TriDiag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ForwardEuler,
    BackwardEuler,
    CrankNicolson,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::ForwardEuler, Scheme::BackwardEuler, Scheme::CrankNicolson];

    pub fn short_name(self) -> &'static str {
        match self {
            Scheme::ForwardEuler => "FE",
            Scheme::BackwardEuler => "BE",
            Scheme::CrankNicolson => "CN",
        }
    }

    pub fn is_explicit(self) -> bool {
        self == Scheme::ForwardEuler
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ForwardEuler => "forward_euler",
            Scheme::BackwardEuler => "backward_euler",
            Scheme::CrankNicolson => "crank_nicolson",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scheme `{0}` (expected forward_euler, backward_euler or crank_nicolson)")]
pub struct ParseSchemeError(String);

impl FromStr for Scheme {
    type Err = ParseSchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "forward_euler" | "fe" | "explicit" => Ok(Scheme::ForwardEuler),
            "backward_euler" | "be" | "implicit" => Ok(Scheme::BackwardEuler),
            "crank_nicolson" | "cn" => Ok(Scheme::CrankNicolson),
            _ => Err(ParseSchemeError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("{what} = {value} is not a whole number of steps of size {tau}")]
    NonCommensurate { what: &'static str, value: f64, tau: f64 },
    #[error("snapshot time {time} lies outside [0, {t_end}]")]
    SnapshotOutOfRange { time: f64, t_end: f64 },
    #[error("solution diverged at step {step} (t = {time}): max-norm {norm:e}")]
    Diverged { step: usize, time: f64, norm: f64 },
    #[error("state has length {found}, system has {expected} unknowns")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<DiscretiseError> for StepError {
    fn from(e: DiscretiseError) -> Self {
        match e {
            DiscretiseError::LengthMismatch { expected, found } => StepError::LengthMismatch { expected, found },
            other => unreachable!("reconstruction cannot fail with {other:?}"),
        }
    }
}

/// One scheme at one fixed step, with the implicit operator factored.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    scheme: Scheme,
    tau: f64,
    a: &'a TriDiag,
    b: &'a [f64],
    factor: Option<ThomasFactor>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(scheme: Scheme, a: &'a TriDiag, b: &'a [f64], tau: f64) -> Result<Self, StepError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(StepError::InvalidStep(tau));
        }
        if b.len() != a.len() {
            return Err(StepError::LengthMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let factor = match scheme {
            Scheme::ForwardEuler => None,
            Scheme::BackwardEuler => Some(ThomasFactor::new(&a.shifted(1.0, -tau))?),
            Scheme::CrankNicolson => Some(ThomasFactor::new(&a.shifted(1.0, -0.5 * tau))?),
        };
        Ok(Self {
            scheme,
            tau,
            a,
            b,
            factor,
            scratch: vec![0.0; a.len()],
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Advance `u` by one step in place.
    pub fn advance(&mut self, u: &mut [f64]) -> Result<(), StepError> {
        if u.len() != self.a.len() {
            return Err(StepError::LengthMismatch {
                expected: self.a.len(),
                found: u.len(),
            });
        }
        let tau = self.tau;
        self.a.matvec_into(u, &mut self.scratch)?;
        match self.scheme {
            Scheme::ForwardEuler => {
                for ((x, au), b) in u.iter_mut().zip(&self.scratch).zip(self.b) {
                    *x += tau * (au + b);
                }
            }
            Scheme::BackwardEuler => {
                for (x, b) in u.iter_mut().zip(self.b) {
                    *x += tau * b;
                }
                self.factor.as_ref().expect("implicit factor").solve_in_place(u)?;
            }
            Scheme::CrankNicolson => {
                for ((x, au), b) in u.iter_mut().zip(&self.scratch).zip(self.b) {
                    *x += 0.5 * tau * au + tau * b;
                }
                self.factor.as_ref().expect("implicit factor").solve_in_place(u)?;
            }
        }
        Ok(())
    }
}

/// A single step of `scheme` from `u`.
pub fn step(scheme: Scheme, a: &TriDiag, b: &[f64], tau: f64, u: &[f64]) -> Result<Vec<f64>, StepError> {
    let mut stepper = Stepper::new(scheme, a, b, tau)?;
    let mut out = u.to_vec();
    stepper.advance(&mut out)?;
    Ok(out)
}

/// `u∞ = −A⁻¹ b`.
pub fn steady_state(system: &SemiDiscreteSystem) -> Result<Vec<f64>, StepError> {
    let rhs: Vec<f64> = system.b.iter().map(|v| -v).collect();
    Ok(thomas_solve(&system.a, &rhs)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarchResult {
    pub scheme: Scheme,
    pub tau: f64,
    pub step_count: usize,
    /// Requested snapshot times, ascending.
    pub times: Vec<f64>,
    pub states: Vec<FullState>,
    /// Full-node state at `t_end`.
    pub final_state: FullState,
    /// Unknown vector at `t_end`.
    pub final_unknowns: Vec<f64>,
}

/// Number of steps of size `tau` that make up `t`, within `1e-9 τ`.
pub fn whole_steps(what: &'static str, t: f64, tau: f64) -> Result<usize, StepError> {
    let k = (t / tau).round();
    if !k.is_finite() || k < 0.0 || (k * tau - t).abs() > 1e-9 * tau {
        return Err(StepError::NonCommensurate { what, value: t, tau });
    }
    Ok(k as usize)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// March `u0` to `t_end` with fixed step `tau`, recording full-node states at
/// each snapshot time.
///
/// Fails with [`StepError::Diverged`] once the max-norm exceeds
/// `1e6 (‖u0‖ + ‖u∞‖)`.
pub fn march(
    system: &SemiDiscreteSystem,
    map: &UnknownMap,
    u0: &[f64],
    tau: f64,
    t_end: f64,
    scheme: Scheme,
    snapshots: &[f64],
) -> Result<MarchResult, StepError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(StepError::InvalidStep(tau));
    }
    if u0.len() != system.len() {
        return Err(StepError::LengthMismatch {
            expected: system.len(),
            found: u0.len(),
        });
    }
    let total = whole_steps("t_end", t_end, tau)?;
    let mut times: Vec<f64> = snapshots.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut marks = Vec::with_capacity(times.len());
    for &t in &times {
        if t < 0.0 || t > t_end + 1e-9 * tau {
            return Err(StepError::SnapshotOutOfRange { time: t, t_end });
        }
        marks.push(whole_steps("snapshot time", t, tau)?);
    }

    let steady = steady_state(system)?;
    let threshold = 1e6 * (max_norm(u0) + max_norm(&steady));
    let mut stepper = Stepper::new(scheme, &system.a, &system.b, tau)?;
    let mut u = u0.to_vec();
    let mut states = Vec::with_capacity(times.len());
    let mut next = 0;
    for k in 0..=total {
        while next < marks.len() && marks[next] == k {
            states.push(reconstruct_full(map, &u)?);
            next += 1;
        }
        if k == total {
            break;
        }
        stepper.advance(&mut u)?;
        let norm = max_norm(&u);
        if !(norm <= threshold) {
            return Err(StepError::Diverged {
                step: k + 1,
                time: (k + 1) as f64 * tau,
                norm,
            });
        }
    }
    Ok(MarchResult {
        scheme,
        tau,
        step_count: total,
        times,
        states,
        final_state: reconstruct_full(map, &u)?,
        final_unknowns: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::discretise::Discretisation;
    use crate::problem::{BoundarySpec, Layer, Problem};

    fn laplacian(n: usize) -> TriDiag {
        TriDiag::new(vec![1.0; n - 1], vec![-2.0; n], vec![1.0; n - 1]).unwrap()
    }

    #[test]
    fn forward_euler_from_delta() {
        let a = laplacian(5);
        let b = vec![0.0; 5];
        let mut u = vec![0.0; 5];
        u[2] = 1.0;
        let out = step(Scheme::ForwardEuler, &a, &b, 0.1, &u).unwrap();
        // u + τ(u_{j-1} − 2u_j + u_{j+1})
        let expected = [0.0, 0.1, 0.8, 0.1, 0.0];
        for (x, e) in out.iter().zip(expected) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn implicit_steps_solve_their_equations() {
        let a = laplacian(6);
        let b: Vec<f64> = (0..6).map(|p| p as f64 * 0.3).collect();
        let u: Vec<f64> = (0..6).map(|p| (p as f64).sin()).collect();
        let tau = 0.7;

        let be = step(Scheme::BackwardEuler, &a, &b, tau, &u).unwrap();
        let lhs = a.shifted(1.0, -tau).matvec(&be).unwrap();
        for p in 0..6 {
            assert!((lhs[p] - (u[p] + tau * b[p])).abs() < 1e-12);
        }

        let cn = step(Scheme::CrankNicolson, &a, &b, tau, &u).unwrap();
        let lhs = a.shifted(1.0, -0.5 * tau).matvec(&cn).unwrap();
        let rhs = a.shifted(1.0, 0.5 * tau).matvec(&u).unwrap();
        for p in 0..6 {
            assert!((lhs[p] - (rhs[p] + tau * b[p])).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_stays_zero() {
        let a = laplacian(4);
        for s in Scheme::ALL {
            assert_eq!(step(s, &a, &[0.0; 4], 0.3, &[0.0; 4]).unwrap(), vec![0.0; 4]);
        }
    }

    #[test]
    fn steady_state_is_fixed_point() {
        let d = Discretisation::new(&cases::case_d(), 16).unwrap();
        let u = steady_state(&d.system).unwrap();
        let scale = max_norm(&u);
        for s in Scheme::ALL {
            let v = step(s, &d.system.a, &d.system.b, 1e-4, &u).unwrap();
            let diff = v.iter().zip(&u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff < 1e-10 * scale, "{s}: {diff}");
        }
    }

    #[test]
    fn steady_state_case_a_flux_balance() {
        let p = cases::case_a();
        let d = Discretisation::new(&p, 10).unwrap();
        let full = d.reconstruct(&steady_state(&d.system).unwrap()).unwrap();
        // Zero flux on the right forces a flat profile equal to the left value.
        for v in full.iter() {
            assert!((v - 1.0).abs() < 1e-10);
        }

        let q = Problem::new(
            p.layers().to_vec(),
            BoundarySpec::dirichlet(1.0),
            BoundarySpec::dirichlet(0.0),
            p.interfaces().to_vec(),
        )
        .unwrap();
        let d = Discretisation::new(&q, 10).unwrap();
        let full = d.reconstruct(&steady_state(&d.system).unwrap()).unwrap();
        let h = d.mesh.h(0);
        let s1 = (full.layer(0)[10] - full.layer(0)[9]) / h;
        let s2 = (full.layer(1)[1] - full.layer(1)[0]) / h;
        assert!((1.0 * s1 - 0.1 * s2).abs() < 1e-10);
    }

    #[test]
    fn long_backward_euler_reaches_steady_state() {
        let d = Discretisation::new(&cases::case_b(), 8).unwrap();
        let u0 = d.initial(&cases::case_b());
        let steady = steady_state(&d.system).unwrap();
        let r = march(&d.system, &d.map, &u0, 1.0, 1e5, Scheme::BackwardEuler, &[]).unwrap();
        assert_eq!(r.step_count, 100_000);
        let gap = r.final_unknowns.iter().zip(&steady).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(gap < 1e-8);
    }

    #[test]
    fn snapshots_and_commensurability() {
        let p = cases::case_a();
        let d = Discretisation::new(&p, 4).unwrap();
        let u0 = d.initial(&p);
        let r = march(&d.system, &d.map, &u0, 1e-3, 0.01, Scheme::CrankNicolson, &[0.005, 0.0, 0.01]).unwrap();
        assert_eq!(r.times, vec![0.0, 0.005, 0.01]);
        assert_eq!(r.states.len(), 3);
        assert_eq!(r.states[2], r.final_state);
        assert_eq!(r.states[0].layer(0)[0], 1.0);
        assert_eq!(r.states[0].layer(0)[1], 0.0);

        let err = march(&d.system, &d.map, &u0, 3e-3, 0.01, Scheme::ForwardEuler, &[]).unwrap_err();
        assert!(matches!(err, StepError::NonCommensurate { what: "t_end", .. }));
        let err = march(&d.system, &d.map, &u0, 1e-3, 0.01, Scheme::ForwardEuler, &[0.0025]).unwrap_err();
        assert!(matches!(err, StepError::NonCommensurate { what: "snapshot time", .. }));
        let err = march(&d.system, &d.map, &u0, 1e-3, 0.01, Scheme::ForwardEuler, &[0.02]).unwrap_err();
        assert!(matches!(err, StepError::SnapshotOutOfRange { .. }));
        assert!(matches!(
            march(&d.system, &d.map, &u0, -1.0, 0.01, Scheme::ForwardEuler, &[]),
            Err(StepError::InvalidStep(_))
        ));
    }

    #[test]
    fn forward_euler_divergence_detected() {
        let p = Problem::new(
            vec![Layer::new(0.0, 1.0, 1.0)],
            BoundarySpec::dirichlet(1.0),
            BoundarySpec::dirichlet(0.0),
            vec![],
        )
        .unwrap();
        let d = Discretisation::new(&p, 10).unwrap();
        let u0 = d.initial(&p);
        let err = march(&d.system, &d.map, &u0, 0.01, 10.0, Scheme::ForwardEuler, &[]).unwrap_err();
        assert!(matches!(err, StepError::Diverged { .. }));
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
            assert_eq!(s.short_name().parse::<Scheme>().unwrap(), s);
        }
        assert!("rk4".parse::<Scheme>().is_err());
    }
}
