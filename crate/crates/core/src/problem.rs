//! The continuous multilayer problem: layers, external boundary conditions
//! and interface conditions.
//!
//! Every interface is stored in one of the two general forms:
//!
//! * `GI`:  `u_i = θ u_{i+1}` and `γ_i u_i' = γ_{i+1} u_{i+1}'`
//! * `GII`: `γ_i u_i' = H (θ u_{i+1} − u_i)` and `γ_i u_i' = γ_{i+1} u_{i+1}'`
//!
//! The four classical interface types are mapped onto these by
//! [`canonicalize_interface`], which also fixes the conductivities `γ` of the
//! two adjacent layers.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Initial condition of a single layer, `u_i(x, 0) = f_i(x)`.
pub type InitialCondition = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One of the two external boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// A single layer `[left, right]` with constant coefficients.
#[derive(Clone)]
pub struct Layer {
    pub left: f64,
    pub right: f64,
    /// Diffusion coefficient `D_i`.
    pub diffusivity: f64,
    /// Conductivity `γ_i` entering the interface flux conditions.
    pub conductivity: f64,
    pub initial: InitialCondition,
}

impl Layer {
    /// Layer with `γ = D` and a zero initial condition.
    pub fn new(left: f64, right: f64, diffusivity: f64) -> Self {
        Self {
            left,
            right,
            diffusivity,
            conductivity: diffusivity,
            initial: Arc::new(|_| 0.0),
        }
    }

    pub fn with_conductivity(mut self, conductivity: f64) -> Self {
        self.conductivity = conductivity;
        self
    }

    pub fn with_initial<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.initial = Arc::new(f);
        self
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn initial_at(&self, x: f64) -> f64 {
        (self.initial)(x)
    }
}

impl fmt::Debug for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Layer")
            .field("left", &self.left)
            .field("right", &self.right)
            .field("diffusivity", &self.diffusivity)
            .field("conductivity", &self.conductivity)
            .finish_non_exhaustive()
    }
}

/// External boundary condition `a u ∓ b u' = c` (minus on the left, plus on
/// the right).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BoundarySpec {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// `u = value`.
    pub fn dirichlet(value: f64) -> Self {
        Self::new(1.0, 0.0, value)
    }

    /// `±u' = flux` (outward derivative prescribed).
    pub fn neumann(flux: f64) -> Self {
        Self::new(0.0, 1.0, flux)
    }

    /// `b = 0`: the boundary node is known and removed from the unknowns.
    pub fn is_dirichlet(&self) -> bool {
        self.b == 0.0
    }

    pub fn is_neumann(&self) -> bool {
        self.a == 0.0 && self.b != 0.0
    }

    /// Value of the boundary node for a Dirichlet condition.
    pub fn dirichlet_value(&self) -> f64 {
        self.c / self.a
    }
}

/// An interface condition in one of the two general forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InterfaceSpec {
    /// Perfect contact up to the partition coefficient `θ`.
    #[serde(rename = "GI")]
    Gi { theta: f64 },
    /// Imperfect contact with finite transfer coefficient `H`.
    #[serde(rename = "GII")]
    Gii { theta: f64, transfer: f64 },
}

impl InterfaceSpec {
    pub fn theta(&self) -> f64 {
        match *self {
            InterfaceSpec::Gi { theta } | InterfaceSpec::Gii { theta, .. } => theta,
        }
    }

    pub fn transfer(&self) -> Option<f64> {
        match *self {
            InterfaceSpec::Gi { .. } => None,
            InterfaceSpec::Gii { transfer, .. } => Some(transfer),
        }
    }

    pub fn is_gi(&self) -> bool {
        matches!(self, InterfaceSpec::Gi { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            InterfaceSpec::Gi { .. } => "GI",
            InterfaceSpec::Gii { .. } => "GII",
        }
    }
}

/// The classical interface condition types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterfaceType {
    /// Continuous solution and diffusive flux.
    I,
    /// Contact resistance: flux proportional to the jump, coefficient `H`.
    II,
    /// Continuous solution, conductivity-weighted flux (`γ_i`, `γ_{i+1}`).
    III,
    /// Partition coefficient jump `u_i = θ u_{i+1}`, diffusive flux.
    IV,
}

impl fmt::Display for InterfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InterfaceType::I => "I",
            InterfaceType::II => "II",
            InterfaceType::III => "III",
            InterfaceType::IV => "IV",
        };
        write!(f, "Type {s}")
    }
}

/// Optional parameters of a classical interface. Which ones are required
/// depends on the [`InterfaceType`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InterfaceParams {
    pub transfer: Option<f64>,
    pub theta: Option<f64>,
    pub gamma_left: Option<f64>,
    pub gamma_right: Option<f64>,
}

/// Result of mapping a classical interface onto a general form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalInterface {
    pub spec: InterfaceSpec,
    pub conductivity_left: f64,
    pub conductivity_right: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("{kind} interface requires parameter `{name}`")]
    MissingParameter { kind: InterfaceType, name: &'static str },
    #[error("{kind} interface does not take parameter `{name}`")]
    UnexpectedParameter { kind: InterfaceType, name: &'static str },
    #[error("interface parameter `{name}` must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("layer {layer} is given conductivity {first} by one interface and {second} by another")]
    ConflictingConductivity { layer: usize, first: f64, second: f64 },
    #[error("invalid problem: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

/// A single violated problem invariant. Layer and interface indices are
/// zero-based; interface `i` joins layers `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("problem has no layers")]
    NoLayers,
    #[error("layer {layer} has non-positive width ([{left}, {right}])")]
    EmptyLayer { layer: usize, left: f64, right: f64 },
    #[error("layer {layer} diffusivity must be positive and finite, got {value}")]
    Diffusivity { layer: usize, value: f64 },
    #[error("layer {layer} conductivity must be positive and finite, got {value}")]
    Conductivity { layer: usize, value: f64 },
    #[error("layers {layer} and {} are not contiguous ({end} != {start})", .layer + 1)]
    NonContiguous { layer: usize, end: f64, start: f64 },
    #[error("{side} boundary coefficient `{name}` must be non-negative and finite, got {value}")]
    BoundaryCoefficient { side: Side, name: &'static str, value: f64 },
    #[error("{side} boundary condition vanishes (a = b = 0)")]
    VanishingBoundary { side: Side },
    #[error("Neumann conditions on both boundaries are not supported")]
    DoubleNeumann,
    #[error("expected {expected} interface conditions, found {found}")]
    InterfaceCount { expected: usize, found: usize },
    #[error("interface {interface} partition coefficient must be positive and finite, got {value}")]
    Theta { interface: usize, value: f64 },
    #[error("interface {interface} transfer coefficient must be positive and finite, got {value}")]
    Transfer { interface: usize, value: f64 },
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn nonneg_finite(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Map a classical interface type onto `GI` or `GII`.
///
/// Type I → GI (θ = 1, γ = D); Type II → GII (θ = 1, γ = D);
/// Type III → GI (θ = 1, given γ pair); Type IV → GI (given θ, γ = D).
pub fn canonicalize_interface(
    kind: InterfaceType,
    params: &InterfaceParams,
    left: &Layer,
    right: &Layer,
) -> Result<CanonicalInterface, ProblemError> {
    let allowed: &[&'static str] = match kind {
        InterfaceType::I => &[],
        InterfaceType::II => &["transfer"],
        InterfaceType::III => &["gamma_left", "gamma_right"],
        InterfaceType::IV => &["theta"],
    };
    let given = [
        ("transfer", params.transfer),
        ("theta", params.theta),
        ("gamma_left", params.gamma_left),
        ("gamma_right", params.gamma_right),
    ];
    for (name, value) in given {
        match value {
            Some(_) if !allowed.contains(&name) => {
                return Err(ProblemError::UnexpectedParameter { kind, name })
            }
            None if allowed.contains(&name) => {
                return Err(ProblemError::MissingParameter { kind, name })
            }
            Some(v) if !positive_finite(v) => {
                return Err(ProblemError::NonPositiveParameter { name, value: v })
            }
            _ => {}
        }
    }

    let (gl, gr) = match kind {
        InterfaceType::III => (params.gamma_left.unwrap(), params.gamma_right.unwrap()),
        _ => (left.diffusivity, right.diffusivity),
    };
    let spec = match kind {
        InterfaceType::I | InterfaceType::III => InterfaceSpec::Gi { theta: 1.0 },
        InterfaceType::II => InterfaceSpec::Gii {
            theta: 1.0,
            transfer: params.transfer.unwrap(),
        },
        InterfaceType::IV => InterfaceSpec::Gi {
            theta: params.theta.unwrap(),
        },
    };
    Ok(CanonicalInterface {
        spec,
        conductivity_left: gl,
        conductivity_right: gr,
    })
}

/// A validated multilayer problem. Immutable once constructed.
#[derive(Clone, Debug)]
pub struct Problem {
    layers: Vec<Layer>,
    bc_left: BoundarySpec,
    bc_right: BoundarySpec,
    interfaces: Vec<InterfaceSpec>,
}

impl Problem {
    /// Build and validate a problem from general-form interfaces. The layer
    /// conductivities are taken as given.
    pub fn new(
        layers: Vec<Layer>,
        bc_left: BoundarySpec,
        bc_right: BoundarySpec,
        interfaces: Vec<InterfaceSpec>,
    ) -> Result<Self, ProblemError> {
        validate(Problem {
            layers,
            bc_left,
            bc_right,
            interfaces,
        })
        .map_err(ProblemError::Invalid)
    }

    /// Build a problem from classical interface types, writing the implied
    /// conductivities into the layers.
    pub fn from_classical(
        layers: Vec<Layer>,
        bc_left: BoundarySpec,
        bc_right: BoundarySpec,
        interfaces: &[(InterfaceType, InterfaceParams)],
    ) -> Result<Self, ProblemError> {
        let mut builder = ProblemBuilder::new(layers, bc_left, bc_right);
        for (kind, params) in interfaces {
            builder = builder.classical(*kind, *params);
        }
        builder.build()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i]
    }

    /// Number of layers `m`.
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn bc_left(&self) -> &BoundarySpec {
        &self.bc_left
    }

    pub fn bc_right(&self) -> &BoundarySpec {
        &self.bc_right
    }

    pub fn boundary(&self, side: Side) -> &BoundarySpec {
        match side {
            Side::Left => &self.bc_left,
            Side::Right => &self.bc_right,
        }
    }

    pub fn interfaces(&self) -> &[InterfaceSpec] {
        &self.interfaces
    }

    /// Position `l_{i+1}` of interface `i` (zero-based).
    pub fn interface_position(&self, i: usize) -> f64 {
        self.layers[i].right
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.layers[0].left, self.layers[self.layers.len() - 1].right)
    }

    /// Copy of this problem with every initial condition replaced.
    pub fn with_initial<F>(&self, f: F) -> Problem
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + Clone + 'static,
    {
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let g = f.clone();
                l.clone().with_initial(move |x| g(i, x))
            })
            .collect();
        Problem {
            layers,
            ..self.clone()
        }
    }
}

/// Check every problem invariant, returning the problem unchanged when all
/// hold and the complete list of violations otherwise.
pub fn validate(problem: Problem) -> Result<Problem, Vec<Violation>> {
    let mut errs = Vec::new();
    let layers = &problem.layers;
    if layers.is_empty() {
        errs.push(Violation::NoLayers);
    }
    for (i, l) in layers.iter().enumerate() {
        if !(l.left.is_finite() && l.right.is_finite() && l.right > l.left) {
            errs.push(Violation::EmptyLayer {
                layer: i,
                left: l.left,
                right: l.right,
            });
        }
        if !positive_finite(l.diffusivity) {
            errs.push(Violation::Diffusivity {
                layer: i,
                value: l.diffusivity,
            });
        }
        if !positive_finite(l.conductivity) {
            errs.push(Violation::Conductivity {
                layer: i,
                value: l.conductivity,
            });
        }
    }
    for (i, pair) in layers.windows(2).enumerate() {
        if pair[0].right != pair[1].left {
            errs.push(Violation::NonContiguous {
                layer: i,
                end: pair[0].right,
                start: pair[1].left,
            });
        }
    }

    for (side, bc) in [(Side::Left, &problem.bc_left), (Side::Right, &problem.bc_right)] {
        let mut coefficients_ok = true;
        for (name, value) in [("a", bc.a), ("b", bc.b)] {
            if !nonneg_finite(value) {
                coefficients_ok = false;
                errs.push(Violation::BoundaryCoefficient { side, name, value });
            }
        }
        if !bc.c.is_finite() {
            errs.push(Violation::BoundaryCoefficient {
                side,
                name: "c",
                value: bc.c,
            });
        }
        if coefficients_ok && bc.a + bc.b <= 0.0 {
            errs.push(Violation::VanishingBoundary { side });
        }
    }
    if problem.bc_left.a == 0.0 && problem.bc_right.a == 0.0 {
        errs.push(Violation::DoubleNeumann);
    }

    let expected = layers.len().saturating_sub(1);
    if problem.interfaces.len() != expected {
        errs.push(Violation::InterfaceCount {
            expected,
            found: problem.interfaces.len(),
        });
    }
    for (i, spec) in problem.interfaces.iter().enumerate() {
        let theta = spec.theta();
        if !positive_finite(theta) {
            errs.push(Violation::Theta {
                interface: i,
                value: theta,
            });
        }
        if let Some(h) = spec.transfer() {
            if !positive_finite(h) {
                errs.push(Violation::Transfer {
                    interface: i,
                    value: h,
                });
            }
        }
    }

    if errs.is_empty() {
        Ok(problem)
    } else {
        Err(errs)
    }
}

/// Incremental construction of a [`Problem`] where each interface may fix
/// the conductivities of its two neighbouring layers. Two interfaces that
/// assign different conductivities to the same layer are rejected.
#[derive(Debug)]
pub struct ProblemBuilder {
    layers: Vec<Layer>,
    bc_left: BoundarySpec,
    bc_right: BoundarySpec,
    interfaces: Vec<InterfaceSpec>,
    assigned: Vec<Option<f64>>,
    error: Option<ProblemError>,
}

impl ProblemBuilder {
    pub fn new(layers: Vec<Layer>, bc_left: BoundarySpec, bc_right: BoundarySpec) -> Self {
        let assigned = vec![None; layers.len()];
        Self {
            layers,
            bc_left,
            bc_right,
            interfaces: Vec::new(),
            assigned,
            error: None,
        }
    }

    /// Append the next interface given as a classical type.
    pub fn classical(mut self, kind: InterfaceType, params: InterfaceParams) -> Self {
        if self.error.is_some() {
            return self;
        }
        let i = self.interfaces.len();
        if i + 1 >= self.layers.len() {
            // Surplus interface: record it so validation reports the count.
            self.interfaces.push(InterfaceSpec::Gi { theta: 1.0 });
            return self;
        }
        match canonicalize_interface(kind, &params, &self.layers[i], &self.layers[i + 1]) {
            Ok(c) => {
                self.interfaces.push(c.spec);
                self.assign(i, c.conductivity_left);
                self.assign(i + 1, c.conductivity_right);
            }
            Err(e) => self.error = Some(e),
        }
        self
    }

    /// Append the next interface in general form. Explicit conductivities,
    /// when given, are written into the adjacent layers.
    pub fn general(mut self, spec: InterfaceSpec, conductivities: (Option<f64>, Option<f64>)) -> Self {
        if self.error.is_some() {
            return self;
        }
        let i = self.interfaces.len();
        self.interfaces.push(spec);
        if i + 1 >= self.layers.len() {
            return self;
        }
        for (layer, gamma) in [(i, conductivities.0), (i + 1, conductivities.1)] {
            if let Some(g) = gamma {
                if !positive_finite(g) {
                    self.error = Some(ProblemError::NonPositiveParameter {
                        name: if layer == i { "gamma_left" } else { "gamma_right" },
                        value: g,
                    });
                    return self;
                }
                self.assign(layer, g);
            }
        }
        self
    }

    fn assign(&mut self, layer: usize, gamma: f64) {
        match self.assigned[layer] {
            Some(prev) if (prev - gamma).abs() > 1e-12 * prev.abs().max(gamma.abs()) => {
                self.error = Some(ProblemError::ConflictingConductivity {
                    layer,
                    first: prev,
                    second: gamma,
                });
            }
            _ => {
                self.assigned[layer] = Some(gamma);
                self.layers[layer].conductivity = gamma;
            }
        }
    }

    pub fn build(self) -> Result<Problem, ProblemError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        Problem::new(self.layers, self.bc_left, self.bc_right, self.interfaces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_layers() -> Vec<Layer> {
        vec![Layer::new(0.0, 0.5, 1.0), Layer::new(0.5, 1.0, 0.1)]
    }

    fn case_a_bcs() -> (BoundarySpec, BoundarySpec) {
        (BoundarySpec::new(1.0, 0.0, 1.0), BoundarySpec::new(0.0, 1.0, 0.0))
    }

    #[test]
    fn type_one_becomes_gi_with_diffusivities() {
        let l = two_layers();
        let c = canonicalize_interface(InterfaceType::I, &InterfaceParams::default(), &l[0], &l[1])
            .unwrap();
        assert_eq!(c.spec, InterfaceSpec::Gi { theta: 1.0 });
        assert_eq!((c.conductivity_left, c.conductivity_right), (1.0, 0.1));
    }

    #[test]
    fn type_two_becomes_gii() {
        let l = two_layers();
        let p = InterfaceParams {
            transfer: Some(0.5),
            ..Default::default()
        };
        let c = canonicalize_interface(InterfaceType::II, &p, &l[0], &l[1]).unwrap();
        assert_eq!(c.spec, InterfaceSpec::Gii { theta: 1.0, transfer: 0.5 });
        assert_eq!((c.conductivity_left, c.conductivity_right), (1.0, 0.1));
    }

    #[test]
    fn type_three_keeps_given_conductivities() {
        let l = two_layers();
        let p = InterfaceParams {
            gamma_left: Some(2.0),
            gamma_right: Some(2.0),
            ..Default::default()
        };
        let c = canonicalize_interface(InterfaceType::III, &p, &l[0], &l[1]).unwrap();
        assert_eq!(c.spec, InterfaceSpec::Gi { theta: 1.0 });
        assert_eq!((c.conductivity_left, c.conductivity_right), (2.0, 2.0));
    }

    #[test]
    fn type_four_keeps_theta() {
        let l = two_layers();
        let p = InterfaceParams {
            theta: Some(1.2),
            ..Default::default()
        };
        let c = canonicalize_interface(InterfaceType::IV, &p, &l[0], &l[1]).unwrap();
        assert_eq!(c.spec, InterfaceSpec::Gi { theta: 1.2 });
        assert_eq!((c.conductivity_left, c.conductivity_right), (1.0, 0.1));
    }

    #[test]
    fn parameter_mismatch_is_rejected() {
        let l = two_layers();
        let err = canonicalize_interface(InterfaceType::II, &InterfaceParams::default(), &l[0], &l[1])
            .unwrap_err();
        assert!(matches!(err, ProblemError::MissingParameter { name: "transfer", .. }));

        let p = InterfaceParams {
            theta: Some(2.0),
            ..Default::default()
        };
        let err = canonicalize_interface(InterfaceType::I, &p, &l[0], &l[1]).unwrap_err();
        assert!(matches!(err, ProblemError::UnexpectedParameter { name: "theta", .. }));

        let p = InterfaceParams {
            theta: Some(-1.0),
            ..Default::default()
        };
        let err = canonicalize_interface(InterfaceType::IV, &p, &l[0], &l[1]).unwrap_err();
        assert!(matches!(err, ProblemError::NonPositiveParameter { name: "theta", .. }));

        let p = InterfaceParams {
            transfer: Some(f64::INFINITY),
            ..Default::default()
        };
        let err = canonicalize_interface(InterfaceType::II, &p, &l[0], &l[1]).unwrap_err();
        assert!(matches!(err, ProblemError::NonPositiveParameter { name: "transfer", .. }));
    }

    #[test]
    fn case_a_is_valid() {
        let (bl, br) = case_a_bcs();
        let p = Problem::from_classical(
            two_layers(),
            bl,
            br,
            &[(InterfaceType::I, InterfaceParams::default())],
        )
        .unwrap();
        assert_eq!(p.num_layers(), 2);
        assert_eq!(p.interfaces(), &[InterfaceSpec::Gi { theta: 1.0 }]);
    }

    #[test]
    fn vanishing_boundary_is_reported() {
        let err = Problem::new(
            two_layers(),
            BoundarySpec::new(0.0, 0.0, 1.0),
            BoundarySpec::dirichlet(0.0),
            vec![InterfaceSpec::Gi { theta: 1.0 }],
        )
        .unwrap_err();
        let ProblemError::Invalid(v) = err else { panic!() };
        assert!(v.contains(&Violation::VanishingBoundary { side: Side::Left }));
        assert!(v[0].to_string().contains("boundary condition vanishes"));
    }

    #[test]
    fn double_neumann_is_rejected() {
        let err = Problem::new(
            two_layers(),
            BoundarySpec::neumann(0.0),
            BoundarySpec::neumann(0.0),
            vec![InterfaceSpec::Gi { theta: 1.0 }],
        )
        .unwrap_err();
        assert_eq!(err, ProblemError::Invalid(vec![Violation::DoubleNeumann]));
    }

    #[test]
    fn all_violations_are_collected() {
        let layers = vec![
            Layer::new(0.0, 0.5, -1.0),
            Layer::new(0.6, 0.4, 1.0).with_conductivity(0.0),
        ];
        let v = validate(Problem {
            layers,
            bc_left: BoundarySpec::new(-1.0, 0.0, 0.0),
            bc_right: BoundarySpec::dirichlet(0.0),
            interfaces: vec![
                InterfaceSpec::Gii {
                    theta: 0.0,
                    transfer: f64::INFINITY,
                },
                InterfaceSpec::Gi { theta: 1.0 },
            ],
        })
        .unwrap_err();
        assert!(v.contains(&Violation::Diffusivity { layer: 0, value: -1.0 }));
        assert!(v.contains(&Violation::Conductivity { layer: 1, value: 0.0 }));
        assert!(v.iter().any(|e| matches!(e, Violation::EmptyLayer { layer: 1, .. })));
        assert!(v.iter().any(|e| matches!(e, Violation::NonContiguous { layer: 0, .. })));
        assert!(v.iter().any(|e| matches!(e, Violation::BoundaryCoefficient { name: "a", .. })));
        assert!(v.contains(&Violation::InterfaceCount { expected: 1, found: 2 }));
        assert!(v.iter().any(|e| matches!(e, Violation::Theta { interface: 0, .. })));
        assert!(v.iter().any(|e| matches!(e, Violation::Transfer { interface: 0, .. })));
    }

    #[test]
    fn no_layers() {
        let v = validate(Problem {
            layers: vec![],
            bc_left: BoundarySpec::dirichlet(0.0),
            bc_right: BoundarySpec::dirichlet(0.0),
            interfaces: vec![],
        })
        .unwrap_err();
        assert_eq!(v, vec![Violation::NoLayers]);
    }

    #[test]
    fn conflicting_conductivities() {
        let layers = vec![
            Layer::new(0.0, 1.0, 1.0),
            Layer::new(1.0, 2.0, 0.5),
            Layer::new(2.0, 3.0, 2.0),
        ];
        let (bl, br) = case_a_bcs();
        let err = Problem::from_classical(
            layers,
            bl,
            br,
            &[
                (
                    InterfaceType::III,
                    InterfaceParams {
                        gamma_left: Some(3.0),
                        gamma_right: Some(4.0),
                        ..Default::default()
                    },
                ),
                (InterfaceType::I, InterfaceParams::default()),
            ],
        )
        .unwrap_err();
        assert_eq!(
            err,
            ProblemError::ConflictingConductivity {
                layer: 1,
                first: 4.0,
                second: 0.5
            }
        );
    }

    #[test]
    fn general_interfaces_set_conductivities() {
        let p = ProblemBuilder::new(
            two_layers(),
            BoundarySpec::dirichlet(1.0),
            BoundarySpec::dirichlet(0.0),
        )
        .general(
            InterfaceSpec::Gii {
                theta: 1.0,
                transfer: 0.5,
            },
            (Some(1e-4), Some(5e-4)),
        )
        .build()
        .unwrap();
        assert_eq!(p.layer(0).conductivity, 1e-4);
        assert_eq!(p.layer(1).conductivity, 5e-4);
    }
}
