//! Mesh construction, unknown numbering and assembly of the semi-discrete
//! system `du/dt = A u + b`.
//!
//! Each layer carries `n + 1` uniformly spaced nodes, so every internal
//! interface has two coincident nodes `(i, n)` and `(i + 1, 0)`. Nodes that
//! are known explicitly are eliminated from the unknown vector:
//!
//! * a Dirichlet boundary node (`b = 0`) takes the value `c / a`;
//! * at a `GI` interface one of the two coincident nodes is expressed through
//!   the other using `u_{i,n} = θ u_{i+1,0}`: the right node is removed when
//!   `θ ≥ 1`, the left node when `θ < 1`, so the neighbouring interior rows
//!   stay diagonally dominant.
//!
//! Retained nodes are numbered layer by layer, left to right, which keeps `A`
//! tridiagonal.

use serde::Serialize;
use thiserror::Error;

use crate::problem::{InterfaceSpec, Problem};
use crate::tridiag::TriDiag;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretiseError {
    #[error("each layer needs at least 2 intervals (n >= 2), got n = {0}")]
    TooFewIntervals(usize),
    #[error("expected a vector of length {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected {expected} interface branch choices, got {found}")]
    BranchCount { expected: usize, found: usize },
}

/// Zero-based node address: layer `layer`, local index `j ∈ 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId {
    pub layer: usize,
    pub j: usize,
}

impl NodeId {
    pub fn new(layer: usize, j: usize) -> Self {
        Self { layer, j }
    }
}

/// Uniform-per-layer vertex mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n: usize,
    h: Vec<f64>,
    coords: Vec<Vec<f64>>,
}

impl Mesh {
    /// Intervals per layer; each layer has `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_layers(&self) -> usize {
        self.h.len()
    }

    /// Spacing `h_i` of layer `i`.
    pub fn h(&self, layer: usize) -> f64 {
        self.h[layer]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.h
    }

    pub fn coords(&self, layer: usize) -> &[f64] {
        &self.coords[layer]
    }

    pub fn x(&self, node: NodeId) -> f64 {
        self.coords[node.layer][node.j]
    }

    /// Control-volume width: `h_i` inside a layer, `h_i / 2` at its ends.
    pub fn volume_width(&self, node: NodeId) -> f64 {
        if node.j == 0 || node.j == self.n {
            0.5 * self.h[node.layer]
        } else {
            self.h[node.layer]
        }
    }

    /// Total node count `m (n + 1)`, duplicates included.
    pub fn num_nodes(&self) -> usize {
        self.num_layers() * (self.n + 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        let n = self.n;
        (0..self.num_layers()).flat_map(move |layer| (0..=n).map(move |j| NodeId { layer, j }))
    }
}

pub fn build_mesh(problem: &Problem, n: usize) -> Result<Mesh, DiscretiseError> {
    if n < 2 {
        return Err(DiscretiseError::TooFewIntervals(n));
    }
    let mut h = Vec::with_capacity(problem.num_layers());
    let mut coords = Vec::with_capacity(problem.num_layers());
    for layer in problem.layers() {
        let hi = layer.width() / n as f64;
        let mut xs: Vec<f64> = (0..=n).map(|j| layer.left + j as f64 * hi).collect();
        // Pin the end node to the interface position so duplicates coincide.
        xs[n] = layer.right;
        h.push(hi);
        coords.push(xs);
    }
    Ok(Mesh { n, h, coords })
}

/// How a removed node is recovered from the unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Elimination {
    /// Dirichlet boundary node, `u = c / a`.
    Dirichlet { value: f64 },
    /// Right node of a `GI` interface: `u_{i+1,0} = u_{i,n} / θ`.
    GiRight { theta: f64, source: NodeId },
    /// Left node of a `GI` interface: `u_{i,n} = θ u_{i+1,0}`.
    GiLeft { theta: f64, source: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Slot {
    /// Index into the unknown vector.
    Unknown(usize),
    Eliminated(Elimination),
}

/// Which coincident node a `GI` interface removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GiBranch {
    /// Remove `u_{i+1,0}` (default for `θ ≥ 1`).
    EliminateRight,
    /// Remove `u_{i,n}` (default for `θ < 1`).
    EliminateLeft,
}

impl GiBranch {
    pub fn for_theta(theta: f64) -> Self {
        if theta >= 1.0 {
            GiBranch::EliminateRight
        } else {
            GiBranch::EliminateLeft
        }
    }
}

/// Mapping between mesh nodes and entries of the unknown vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownMap {
    n: usize,
    slots: Vec<Vec<Slot>>,
    nodes: Vec<NodeId>,
    branches: Vec<Option<GiBranch>>,
    q: usize,
    r: usize,
}

/// `value = factor · u[index] + constant`, or just `constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine {
    term: Option<(usize, f64)>,
    constant: f64,
}

impl UnknownMap {
    /// Number of unknowns `N = m (n + 1) − q − r`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of `GI` interfaces.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of Dirichlet boundaries.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slot(&self, node: NodeId) -> Slot {
        self.slots[node.layer][node.j]
    }

    pub fn index(&self, node: NodeId) -> Option<usize> {
        match self.slot(node) {
            Slot::Unknown(p) => Some(p),
            Slot::Eliminated(_) => None,
        }
    }

    /// Node stored at unknown `p`.
    pub fn node(&self, p: usize) -> NodeId {
        self.nodes[p]
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Branch used at interface `i`, `None` for `GII`.
    pub fn branch(&self, interface: usize) -> Option<GiBranch> {
        self.branches[interface]
    }

    pub fn eliminated(&self) -> impl Iterator<Item = (NodeId, Elimination)> + '_ {
        self.slots.iter().enumerate().flat_map(|(layer, row)| {
            row.iter().enumerate().filter_map(move |(j, s)| match s {
                Slot::Eliminated(e) => Some((NodeId { layer, j }, *e)),
                Slot::Unknown(_) => None,
            })
        })
    }

    fn resolve(&self, node: NodeId) -> Affine {
        match self.slot(node) {
            Slot::Unknown(p) => Affine {
                term: Some((p, 1.0)),
                constant: 0.0,
            },
            Slot::Eliminated(Elimination::Dirichlet { value }) => Affine {
                term: None,
                constant: value,
            },
            Slot::Eliminated(Elimination::GiRight { theta, source }) => Affine {
                term: Some((self.index(source).expect("GI source is retained"), 1.0 / theta)),
                constant: 0.0,
            },
            Slot::Eliminated(Elimination::GiLeft { theta, source }) => Affine {
                term: Some((self.index(source).expect("GI source is retained"), theta)),
                constant: 0.0,
            },
        }
    }
}

/// Number the unknowns using the default `GI` branch for each interface.
pub fn index_unknowns(problem: &Problem, mesh: &Mesh) -> UnknownMap {
    let branches: Vec<GiBranch> = problem
        .interfaces()
        .iter()
        .map(|s| GiBranch::for_theta(s.theta()))
        .collect();
    index_unknowns_with(problem, mesh, &branches).expect("one branch per interface")
}

/// Number the unknowns with an explicit elimination choice per interface
/// (ignored for `GII` interfaces).
pub fn index_unknowns_with(
    problem: &Problem,
    mesh: &Mesh,
    branches: &[GiBranch],
) -> Result<UnknownMap, DiscretiseError> {
    let m = problem.num_layers();
    let n = mesh.n();
    if branches.len() != problem.interfaces().len() {
        return Err(DiscretiseError::BranchCount {
            expected: problem.interfaces().len(),
            found: branches.len(),
        });
    }
    let mut elim: Vec<Vec<Option<Elimination>>> = vec![vec![None; n + 1]; m];
    let mut r = 0;
    if problem.bc_left().is_dirichlet() {
        elim[0][0] = Some(Elimination::Dirichlet {
            value: problem.bc_left().dirichlet_value(),
        });
        r += 1;
    }
    if problem.bc_right().is_dirichlet() {
        elim[m - 1][n] = Some(Elimination::Dirichlet {
            value: problem.bc_right().dirichlet_value(),
        });
        r += 1;
    }
    let mut q = 0;
    let mut used = Vec::with_capacity(m.saturating_sub(1));
    for (i, spec) in problem.interfaces().iter().enumerate() {
        match *spec {
            InterfaceSpec::Gi { theta } => {
                q += 1;
                let left = NodeId::new(i, n);
                let right = NodeId::new(i + 1, 0);
                match branches[i] {
                    GiBranch::EliminateRight => {
                        elim[i + 1][0] = Some(Elimination::GiRight {
                            theta,
                            source: left,
                        })
                    }
                    GiBranch::EliminateLeft => {
                        elim[i][n] = Some(Elimination::GiLeft {
                            theta,
                            source: right,
                        })
                    }
                }
                used.push(Some(branches[i]));
            }
            InterfaceSpec::Gii { .. } => used.push(None),
        }
    }

    let mut nodes = Vec::with_capacity(m * (n + 1) - q - r);
    let slots = elim
        .into_iter()
        .enumerate()
        .map(|(layer, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, e)| match e {
                    Some(e) => Slot::Eliminated(e),
                    None => {
                        nodes.push(NodeId { layer, j });
                        Slot::Unknown(nodes.len() - 1)
                    }
                })
                .collect()
        })
        .collect();
    Ok(UnknownMap {
        n,
        slots,
        nodes,
        branches: used,
        q,
        r,
    })
}

/// Which finite volume equation produced a row of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    Interior,
    /// Robin/Neumann left boundary node.
    LeftBoundary,
    /// Robin/Neumann right boundary node.
    RightBoundary,
    /// Interior node next to an eliminated Dirichlet node. Takes precedence
    /// over `GiAdjacent` when a row is next to both.
    DirichletAdjacent,
    /// The retained node of a `GI` interface.
    GiInterface,
    /// Interior node next to the eliminated node of a `GI` interface.
    GiAdjacent,
    /// Left node `(i, n)` of a `GII` interface.
    GiiLeft,
    /// Right node `(i + 1, 0)` of a `GII` interface.
    GiiRight,
}

/// The tridiagonal system `du/dt = A u + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiDiscreteSystem {
    pub a: TriDiag,
    pub b: Vec<f64>,
    pub row_kind: Vec<RowKind>,
}

impl SemiDiscreteSystem {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

struct RowWriter<'a> {
    a: &'a mut TriDiag,
    b: &'a mut [f64],
    p: usize,
}

impl RowWriter<'_> {
    fn add(&mut self, value: Affine, coef: f64) {
        self.b[self.p] += coef * value.constant;
        if let Some((col, factor)) = value.term {
            let v = coef * factor;
            let p = self.p;
            if col == p {
                self.a.diag_mut()[p] += v;
            } else if col + 1 == p {
                self.a.sub_mut()[col] += v;
            } else if p + 1 == col {
                self.a.sup_mut()[p] += v;
            } else {
                unreachable!("stencil of row {p} reaches column {col}");
            }
        }
    }

    fn constant(&mut self, v: f64) {
        self.b[self.p] += v;
    }
}

/// Assemble `A` and `b` from the finite volume equation of every retained
/// node.
pub fn assemble(problem: &Problem, mesh: &Mesh, map: &UnknownMap) -> SemiDiscreteSystem {
    let n_unknowns = map.len();
    let n = mesh.n();
    let m = problem.num_layers();
    let mut a = TriDiag::zeros(n_unknowns);
    let mut b = vec![0.0; n_unknowns];
    let mut row_kind = Vec::with_capacity(n_unknowns);

    for (p, &node) in map.nodes().iter().enumerate() {
        let i = node.layer;
        let j = node.j;
        let layer = problem.layer(i);
        let d = layer.diffusivity;
        let h = mesh.h(i);
        let at = |layer, j| map.resolve(NodeId::new(layer, j));
        let mut w = RowWriter {
            a: &mut a,
            b: &mut b,
            p,
        };

        let kind = if j == 0 && i == 0 {
            let bc = problem.bc_left();
            w.add(at(0, 0), -2.0 * d / h * (1.0 / h + bc.a / bc.b));
            w.add(at(0, 1), 2.0 * d / (h * h));
            w.constant(2.0 * d * bc.c / (h * bc.b));
            RowKind::LeftBoundary
        } else if j == n && i == m - 1 {
            let bc = problem.bc_right();
            w.add(at(i, n - 1), 2.0 * d / (h * h));
            w.add(at(i, n), -2.0 * d / h * (1.0 / h + bc.a / bc.b));
            w.constant(2.0 * d * bc.c / (h * bc.b));
            RowKind::RightBoundary
        } else if j == n {
            interface_row(problem, mesh, map, i, Side::Left, &mut w)
        } else if j == 0 {
            interface_row(problem, mesh, map, i - 1, Side::Right, &mut w)
        } else {
            let left = at(i, j - 1);
            let right = at(i, j + 1);
            let c = d / (h * h);
            w.add(left, c);
            w.add(at(i, j), -2.0 * c);
            w.add(right, c);
            let eliminated = |nb: NodeId| match map.slot(nb) {
                Slot::Eliminated(e) => Some(e),
                Slot::Unknown(_) => None,
            };
            let neighbours = [eliminated(NodeId::new(i, j - 1)), eliminated(NodeId::new(i, j + 1))];
            if neighbours.iter().any(|e| matches!(e, Some(Elimination::Dirichlet { .. }))) {
                RowKind::DirichletAdjacent
            } else if neighbours.iter().any(Option::is_some) {
                RowKind::GiAdjacent
            } else {
                RowKind::Interior
            }
        };
        row_kind.push(kind);
    }
    SemiDiscreteSystem { a, b, row_kind }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Row for a retained node at interface `i`; `side` says whether it is the
/// left node `(i, n)` or the right node `(i + 1, 0)`.
fn interface_row(
    problem: &Problem,
    mesh: &Mesh,
    map: &UnknownMap,
    i: usize,
    side: Side,
    w: &mut RowWriter<'_>,
) -> RowKind {
    let n = mesh.n();
    let (li, lr) = (problem.layer(i), problem.layer(i + 1));
    let (d1, d2) = (li.diffusivity, lr.diffusivity);
    let (g1, g2) = (li.conductivity, lr.conductivity);
    let (h1, h2) = (mesh.h(i), mesh.h(i + 1));
    let at = |layer, j| map.resolve(NodeId::new(layer, j));

    match problem.interfaces()[i] {
        InterfaceSpec::Gi { theta } => {
            let den = g1 * h1 * theta * d2 + g2 * h2 * d1;
            match side {
                Side::Left => {
                    let k = 2.0 * d1 * d2 * theta / den;
                    w.add(at(i, n - 1), k * g1 / h1);
                    w.add(at(i, n), -k * (g1 / h1 + g2 / (theta * h2)));
                    w.add(at(i + 1, 1), k * g2 / h2);
                }
                Side::Right => {
                    let k = 2.0 * d1 * d2 / den;
                    w.add(at(i, n - 1), k * g1 / h1);
                    w.add(at(i + 1, 0), -k * (theta * g1 / h1 + g2 / h2));
                    w.add(at(i + 1, 1), k * g2 / h2);
                }
            }
            RowKind::GiInterface
        }
        InterfaceSpec::Gii { theta, transfer } => match side {
            Side::Left => {
                let k = 2.0 * d1 / (g1 * h1);
                w.add(at(i, n - 1), k * g1 / h1);
                w.add(at(i, n), -k * (transfer + g1 / h1));
                w.add(at(i + 1, 0), k * theta * transfer);
                RowKind::GiiLeft
            }
            Side::Right => {
                let k = 2.0 * d2 / (g2 * h2);
                w.add(at(i, n), k * transfer);
                w.add(at(i + 1, 0), -k * (theta * transfer + g2 / h2));
                w.add(at(i + 1, 1), k * g2 / h2);
                RowKind::GiiRight
            }
        },
    }
}

/// Values at every mesh node, one vector of `n + 1` entries per layer.
/// Interface positions appear twice, once per adjacent layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullState {
    pub values: Vec<Vec<f64>>,
}

impl FullState {
    pub fn get(&self, node: NodeId) -> f64 {
        self.values[node.layer][node.j]
    }

    pub fn layer(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn num_layers(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Expand an unknown vector to all `m (n + 1)` mesh nodes by applying the
/// elimination rules.
pub fn reconstruct_full(map: &UnknownMap, u: &[f64]) -> Result<FullState, DiscretiseError> {
    if u.len() != map.len() {
        return Err(DiscretiseError::LengthMismatch {
            expected: map.len(),
            found: u.len(),
        });
    }
    let values = map
        .slots
        .iter()
        .map(|row| {
            row.iter()
                .map(|slot| match *slot {
                    Slot::Unknown(p) => u[p],
                    Slot::Eliminated(Elimination::Dirichlet { value }) => value,
                    Slot::Eliminated(Elimination::GiRight { theta, source }) => {
                        u[map.index(source).expect("GI source is retained")] / theta
                    }
                    Slot::Eliminated(Elimination::GiLeft { theta, source }) => {
                        theta * u[map.index(source).expect("GI source is retained")]
                    }
                })
                .collect()
        })
        .collect();
    Ok(FullState { values })
}

/// Initial unknown vector: each retained node takes its own layer's initial
/// condition, so the two nodes of an interface are sampled independently.
pub fn sample_initial(problem: &Problem, mesh: &Mesh, map: &UnknownMap) -> Vec<f64> {
    map.nodes()
        .iter()
        .map(|&node| problem.layer(node.layer).initial_at(mesh.x(node)))
        .collect()
}

/// Mesh, numbering and assembled system of one problem at one resolution.
#[derive(Debug, Clone)]
pub struct Discretisation {
    pub mesh: Mesh,
    pub map: UnknownMap,
    pub system: SemiDiscreteSystem,
}

impl Discretisation {
    pub fn new(problem: &Problem, n: usize) -> Result<Self, DiscretiseError> {
        let mesh = build_mesh(problem, n)?;
        let map = index_unknowns(problem, &mesh);
        let system = assemble(problem, &mesh, &map);
        Ok(Self { mesh, map, system })
    }

    pub fn initial(&self, problem: &Problem) -> Vec<f64> {
        sample_initial(problem, &self.mesh, &self.map)
    }

    pub fn reconstruct(&self, u: &[f64]) -> Result<FullState, DiscretiseError> {
        reconstruct_full(&self.map, u)
    }
}
