//! Forward Euler time-step limits and spectral stability checks.
//!
//! Two derivations of the same limit are provided. [`gershgorin_bound`] reads
//! the row magnitudes `c_p = −a_pp`, `r_p = |a_{p,p−1}| + |a_{p,p+1}|` off an
//! assembled matrix and returns `min_p 2 / (c_p + r_p)`. [`table1_bounds`]
//! evaluates the closed-form bound of every node class directly from the
//! problem parameters and labels the binding one. [`spectral_verdict`]
//! computes the exact spectral radii of the three iteration matrices.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::discretise::{index_unknowns, Elimination, Mesh, NodeId, Slot, UnknownMap};
use crate::problem::{InterfaceSpec, Problem};
use crate::tridiag::{eigenvalues, symmetrize, LinalgError, TriDiag};

/// Rounding slack applied to spectral radius verdicts.
pub const RHO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("diagonal entry {value} in row {row} is not negative")]
    NonNegativeDiagonal { row: usize, value: f64 },
    #[error("empty operator")]
    Empty,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GershgorinRow {
    pub p: usize,
    pub c: f64,
    pub r: f64,
    pub tau_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GershgorinBound {
    pub rows: Vec<GershgorinRow>,
    pub tau_max: f64,
    /// Row attaining the minimum.
    pub binding_row: usize,
}

pub fn gershgorin_bound(a: &TriDiag) -> Result<GershgorinBound, StabilityError> {
    if a.is_empty() {
        return Err(StabilityError::Empty);
    }
    let mut rows = Vec::with_capacity(a.len());
    let mut best = (f64::INFINITY, 0);
    for p in 0..a.len() {
        let (lower, diag, upper) = a.row(p);
        if !(diag < 0.0) {
            return Err(StabilityError::NonNegativeDiagonal { row: p, value: diag });
        }
        let c = -diag;
        let r = lower.abs() + upper.abs();
        let tau_max = 2.0 / (c + r);
        if tau_max < best.0 {
            best = (tau_max, p);
        }
        rows.push(GershgorinRow { p, c, r, tau_max });
    }
    Ok(GershgorinBound {
        rows,
        tau_max: best.0,
        binding_row: best.1,
    })
}

/// Node class contributing a closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Constraint {
    /// Plain interior node, `h²/(2D)`.
    Interior { layer: usize },
    /// Robin or Neumann boundary node.
    LeftBoundary,
    RightBoundary,
    /// Interior node whose neighbours are partly eliminated; `weights` are
    /// the effective coefficients of the left and right neighbours relative
    /// to `D/h²`.
    Adjacent {
        layer: usize,
        weights: (f64, f64),
        dirichlet: bool,
    },
    /// The retained node of a `GI` interface.
    GiInterface { interface: usize, theta: f64 },
    /// Both nodes of a `GII` interface.
    GiiInterface { interface: usize },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Constraint::Interior { layer } => write!(f, "interior layer {}", layer + 1),
            Constraint::LeftBoundary => f.write_str("left boundary"),
            Constraint::RightBoundary => f.write_str("right boundary"),
            Constraint::Adjacent { layer, dirichlet: true, .. } => {
                write!(f, "Dirichlet-adjacent layer {}", layer + 1)
            }
            Constraint::Adjacent { layer, .. } => write!(f, "GI-adjacent layer {}", layer + 1),
            Constraint::GiInterface { interface, .. } => write!(f, "GI interface {}", interface + 1),
            Constraint::GiiInterface { interface } => write!(f, "GII interface {}", interface + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledBound {
    pub label: String,
    pub constraint: Constraint,
    pub tau: f64,
    /// `false` when the bound is implied by the interior bound of the same
    /// layer ("No additional restriction").
    pub restricting: bool,
}

impl LabeledBound {
    pub fn annotation(&self) -> &'static str {
        if self.restricting {
            ""
        } else {
            "No additional restriction"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    pub bounds: Vec<LabeledBound>,
    pub tau_max: f64,
    /// Index into `bounds` of the binding constraint.
    pub binding: usize,
}

impl Table1 {
    pub fn binding(&self) -> &LabeledBound {
        &self.bounds[self.binding]
    }
}

/// `h²/(2D)` for every layer.
pub fn classical_bounds(problem: &Problem, mesh: &Mesh) -> Vec<f64> {
    problem
        .layers()
        .iter()
        .enumerate()
        .map(|(i, l)| mesh.h(i).powi(2) / (2.0 * l.diffusivity))
        .collect()
}

fn neighbour_weight(map: &UnknownMap, node: NodeId) -> (f64, bool) {
    match map.slot(node) {
        Slot::Unknown(_) => (1.0, false),
        Slot::Eliminated(Elimination::Dirichlet { .. }) => (0.0, true),
        Slot::Eliminated(Elimination::GiRight { theta, .. }) => (1.0 / theta, false),
        Slot::Eliminated(Elimination::GiLeft { theta, .. }) => (theta, false),
    }
}

/// Closed-form forward Euler bounds for every node class of the default
/// discretisation on `mesh`.
pub fn table1_bounds(problem: &Problem, mesh: &Mesh) -> Table1 {
    let map = index_unknowns(problem, mesh);
    table1_bounds_for(problem, mesh, &map)
}

/// As [`table1_bounds`], for an explicit unknown numbering.
pub fn table1_bounds_for(problem: &Problem, mesh: &Mesh, map: &UnknownMap) -> Table1 {
    let n = mesh.n();
    let m = problem.num_layers();
    let classical = classical_bounds(problem, mesh);
    let mut bounds: Vec<(Constraint, f64, usize)> = Vec::new();

    for i in 0..m {
        let mut classes: Vec<(f64, f64, bool)> = Vec::new();
        for j in 1..n {
            let (wl, dl) = neighbour_weight(map, NodeId::new(i, j - 1));
            let (wr, dr) = neighbour_weight(map, NodeId::new(i, j + 1));
            if !classes.iter().any(|&(a, b, _)| a == wl && b == wr) {
                classes.push((wl, wr, dl || dr));
            }
        }
        // Interior class first so it wins ties.
        classes.sort_by_key(|&(wl, wr, _)| !(wl == 1.0 && wr == 1.0));
        for (wl, wr, dirichlet) in classes {
            let tau = 4.0 / (2.0 + wl + wr) * classical[i];
            let constraint = if wl == 1.0 && wr == 1.0 {
                Constraint::Interior { layer: i }
            } else {
                Constraint::Adjacent {
                    layer: i,
                    weights: (wl, wr),
                    dirichlet,
                }
            };
            bounds.push((constraint, tau, i));
        }
    }

    for (side, layer, bc) in [(0, 0, problem.bc_left()), (1, m - 1, problem.bc_right())] {
        if bc.is_dirichlet() {
            continue;
        }
        let h = mesh.h(layer);
        let tau = 2.0 * bc.b / (2.0 * bc.b + bc.a * h) * classical[layer];
        let constraint = if side == 0 {
            Constraint::LeftBoundary
        } else {
            Constraint::RightBoundary
        };
        bounds.push((constraint, tau, layer));
    }

    for (i, spec) in problem.interfaces().iter().enumerate() {
        let (l1, l2) = (problem.layer(i), problem.layer(i + 1));
        let (d1, d2) = (l1.diffusivity, l2.diffusivity);
        let (g1, g2) = (l1.conductivity, l2.conductivity);
        let (h1, h2) = (mesh.h(i), mesh.h(i + 1));
        match *spec {
            InterfaceSpec::Gi { theta } => {
                let den = g1 * h1 * theta * d2 + g2 * h2 * d1;
                let weighted = match map.index(NodeId::new(i, n)) {
                    Some(_) => 2.0 * theta * g1 * h2 + (1.0 + theta) * g2 * h1,
                    None => (1.0 + theta) * g1 * h2 + 2.0 * g2 * h1,
                };
                let tau = den * h1 * h2 / (weighted * d1 * d2);
                bounds.push((Constraint::GiInterface { interface: i, theta }, tau, usize::MAX));
            }
            InterfaceSpec::Gii { theta, transfer } => {
                let left = 2.0 * g1 / ((1.0 + theta) * transfer * h1 + 2.0 * g1) * classical[i];
                let right = 2.0 * g2 / ((1.0 + theta) * transfer * h2 + 2.0 * g2) * classical[i + 1];
                bounds.push((Constraint::GiiInterface { interface: i }, left.min(right), usize::MAX));
            }
        }
    }

    let has_interior = |layer: usize| {
        bounds
            .iter()
            .any(|(c, _, _)| matches!(c, Constraint::Interior { layer: l } if *l == layer))
    };
    let labeled: Vec<LabeledBound> = bounds
        .iter()
        .map(|&(constraint, tau, layer)| {
            let restricting = match constraint {
                Constraint::Interior { .. } => true,
                Constraint::GiInterface { .. } | Constraint::GiiInterface { .. } => true,
                _ => !(has_interior(layer) && tau >= classical[layer]),
            };
            LabeledBound {
                label: constraint.to_string(),
                constraint,
                tau,
                restricting,
            }
        })
        .collect();

    // Binding constraint: smallest bound; among (near) ties the earliest,
    // which puts interior layers ahead of the classes they imply.
    let tau_max = labeled.iter().map(|b| b.tau).fold(f64::INFINITY, f64::min);
    let binding = labeled
        .iter()
        .position(|b| b.tau <= tau_max * (1.0 + 1e-12))
        .expect("at least one bound");
    Table1 {
        bounds: labeled,
        tau_max,
        binding,
    }
}

/// Real eigenvalues of `A`, ascending, via the symmetrising similarity.
pub fn spectrum(a: &TriDiag) -> Result<Vec<f64>, StabilityError> {
    if a.is_empty() {
        return Err(StabilityError::Empty);
    }
    Ok(eigenvalues(&symmetrize(a)?.s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralVerdict {
    pub tau: f64,
    pub rho_forward: f64,
    pub rho_backward: f64,
    pub rho_crank_nicolson: f64,
    pub stable_forward: bool,
    pub stable_backward: bool,
    pub stable_crank_nicolson: bool,
}

impl SpectralVerdict {
    pub fn from_eigenvalues(lambda: &[f64], tau: f64) -> Self {
        let mut rho_f: f64 = 0.0;
        let mut rho_b: f64 = 0.0;
        let mut rho_c: f64 = 0.0;
        for &l in lambda {
            rho_f = rho_f.max((1.0 + tau * l).abs());
            rho_b = rho_b.max((1.0 / (1.0 - tau * l)).abs());
            rho_c = rho_c.max(((1.0 + 0.5 * tau * l) / (1.0 - 0.5 * tau * l)).abs());
        }
        Self {
            tau,
            rho_forward: rho_f,
            rho_backward: rho_b,
            rho_crank_nicolson: rho_c,
            stable_forward: rho_f <= 1.0 + RHO_SLACK,
            stable_backward: rho_b <= 1.0 + RHO_SLACK,
            stable_crank_nicolson: rho_c <= 1.0 + RHO_SLACK,
        }
    }
}

/// Spectral radii of `I + τA`, `(I − τA)⁻¹` and
/// `(I − τA/2)⁻¹ (I + τA/2)`.
pub fn spectral_verdict(a: &TriDiag, tau: f64) -> Result<SpectralVerdict, StabilityError> {
    Ok(SpectralVerdict::from_eigenvalues(&spectrum(a)?, tau))
}

/// Largest forward Euler step with `ρ ≤ 1`: `2 / max|λ|`.
pub fn exact_forward_limit(lambda: &[f64]) -> f64 {
    2.0 / lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()))
}

/// Round to `digits` significant figures.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Everything the forward Euler analysis produces for one discretisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub n: usize,
    pub unknowns: usize,
    pub table: Table1,
    pub gershgorin: GershgorinBound,
    /// `min_i h_i²/(2 D_i)`.
    pub classical: f64,
    /// `2 / max|λ|`.
    pub tau_max_exact: f64,
    pub eigenvalue_range: (f64, f64),
    pub spectral: Option<SpectralVerdict>,
}

impl StabilityReport {
    pub fn new(
        problem: &Problem,
        mesh: &Mesh,
        map: &UnknownMap,
        a: &TriDiag,
        tau: Option<f64>,
    ) -> Result<Self, StabilityError> {
        let gershgorin = gershgorin_bound(a)?;
        let lambda = spectrum(a)?;
        Ok(Self {
            n: mesh.n(),
            unknowns: a.len(),
            table: table1_bounds_for(problem, mesh, map),
            gershgorin,
            classical: classical_bounds(problem, mesh).into_iter().fold(f64::INFINITY, f64::min),
            tau_max_exact: exact_forward_limit(&lambda),
            eigenvalue_range: (lambda[0], lambda[lambda.len() - 1]),
            spectral: tau.map(|t| SpectralVerdict::from_eigenvalues(&lambda, t)),
        })
    }

    pub fn tau_max(&self) -> f64 {
        self.table.tau_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::discretise::{build_mesh, Discretisation};
    use crate::problem::{BoundarySpec, Layer};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn interior_row_bound() {
        let d = Discretisation::new(&cases::case_a(), 20).unwrap();
        let g = gershgorin_bound(&d.system.a).unwrap();
        assert!(rel(g.rows[5].tau_max, 3.125e-4) < 1e-12);
    }

    #[test]
    fn case_e_bounds() {
        let p = cases::case_e();
        let d = Discretisation::new(&p, 20).unwrap();
        let t = table1_bounds(&p, &d.mesh);
        let find = |label: &str| t.bounds.iter().find(|b| b.label == label).unwrap().tau;
        assert!(rel(find("interior layer 1"), 3.125e-4) < 1e-12);
        assert!(rel(find("interior layer 2"), 3.125e-3) < 1e-12);
        // 2/(2 + 2·5·0.025) · 3.125e-4
        assert!(rel(find("GII interface 1"), 2.0 / 2.25 * 3.125e-4) < 1e-12);
        assert_eq!(t.binding().label, "GII interface 1");
        let g = gershgorin_bound(&d.system.a).unwrap();
        assert!(rel(g.tau_max, t.tau_max) < 1e-12);
    }

    #[test]
    fn neumann_boundary_is_annotated() {
        let p = Problem::new(
            vec![Layer::new(0.0, 1.0, 1.0)],
            BoundarySpec::dirichlet(1.0),
            BoundarySpec::neumann(0.0),
            vec![],
        )
        .unwrap();
        let mesh = build_mesh(&p, 10).unwrap();
        let t = table1_bounds(&p, &mesh);
        let right = t.bounds.iter().find(|b| b.constraint == Constraint::RightBoundary).unwrap();
        assert!(!right.restricting);
        assert_eq!(right.annotation(), "No additional restriction");
        let dir = t.bounds.iter().find(|b| b.label == "Dirichlet-adjacent layer 1").unwrap();
        assert!(rel(dir.tau, 4.0 / 3.0 * 0.005) < 1e-12);
        assert!(!dir.restricting);
        assert_eq!(t.binding().label, "interior layer 1");
    }

    #[test]
    fn robin_boundary_restricts() {
        let p = Problem::new(
            vec![Layer::new(0.0, 1.0, 1.0)],
            BoundarySpec::new(2.0, 1.0, 0.0),
            BoundarySpec::dirichlet(0.0),
            vec![],
        )
        .unwrap();
        let d = Discretisation::new(&p, 10).unwrap();
        let t = table1_bounds(&p, &d.mesh);
        assert_eq!(t.binding().label, "left boundary");
        // 2b/(2b + a h) h²/(2D) = 2/2.2 · 0.005
        assert!(rel(t.tau_max, 2.0 / 2.2 * 0.005) < 1e-12);
        assert!(rel(gershgorin_bound(&d.system.a).unwrap().tau_max, t.tau_max) < 1e-12);
    }

    #[test]
    fn gi_theta_below_one_adjacent_row() {
        let p = cases::with_interface(cases::case_a(), InterfaceSpec::Gi { theta: 0.5 });
        let d = Discretisation::new(&p, 8).unwrap();
        let t = table1_bounds(&p, &d.mesh);
        let adj = t.bounds.iter().find(|b| b.label == "GI-adjacent layer 1").unwrap();
        // 4/(3 + θ) relative to the interior bound
        assert!(rel(adj.tau, 4.0 / 3.5 * d.mesh.h(0).powi(2) / 2.0) < 1e-12);
        let row = d.map.index(NodeId::new(0, 7)).unwrap();
        let g = gershgorin_bound(&d.system.a).unwrap();
        assert!(rel(g.rows[row].tau_max, adj.tau) < 1e-12);
        assert!(rel(g.tau_max, t.tau_max) < 1e-12);
    }

    #[test]
    fn rejects_nonnegative_diagonal() {
        let a = TriDiag::new(vec![1.0], vec![-1.0, 0.0], vec![1.0]).unwrap();
        assert!(matches!(
            gershgorin_bound(&a),
            Err(StabilityError::NonNegativeDiagonal { row: 1, .. })
        ));
    }

    #[test]
    fn verdict_maps() {
        let v = SpectralVerdict::from_eigenvalues(&[-1.0, -100.0], 0.03);
        assert!((v.rho_forward - 2.0).abs() < 1e-12);
        assert!(!v.stable_forward);
        assert!((v.rho_backward - 1.0 / 1.03).abs() < 1e-12);
        // λ = −1 dominates: (1 − 0.015)/(1 + 0.015)
        assert!((v.rho_crank_nicolson - 0.985 / 1.015).abs() < 1e-12);
        assert!(v.stable_backward && v.stable_crank_nicolson);
        assert_eq!(exact_forward_limit(&[-1.0, -100.0]), 0.02);
    }

    #[test]
    fn significant_figures() {
        assert_eq!(round_sig(2.4801587e-5, 3), 2.48e-5);
        assert_eq!(round_sig(87.14634, 5), 87.146);
        assert_eq!(round_sig(0.0, 3), 0.0);
    }
}
