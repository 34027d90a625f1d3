//! Benchmark problems used throughout the test suite and the CLI examples.
//!
//! Cases A-D share the domain `[0, 0.5, 1]`, `D = (1, 0.1)`, `u = 1` on the
//! left and a zero-flux right boundary, and differ only in the interface
//! condition. Case E is case B with a larger transfer coefficient; case F is
//! a strongly imperfect contact with Dirichlet data on both ends. All start
//! from `u = 0`.

use crate::problem::{
    BoundarySpec, InterfaceParams, InterfaceSpec, InterfaceType, Layer, Problem, ProblemBuilder,
};

fn ad_layers() -> Vec<Layer> {
    vec![Layer::new(0.0, 0.5, 1.0), Layer::new(0.5, 1.0, 0.1)]
}

fn ad_boundaries() -> (BoundarySpec, BoundarySpec) {
    (BoundarySpec::new(1.0, 0.0, 1.0), BoundarySpec::new(0.0, 1.0, 0.0))
}

fn classical(kind: InterfaceType, params: InterfaceParams) -> Problem {
    let (l, r) = ad_boundaries();
    Problem::from_classical(ad_layers(), l, r, &[(kind, params)]).expect("benchmark case is valid")
}

/// Perfect contact (Type I).
pub fn case_a() -> Problem {
    classical(InterfaceType::I, InterfaceParams::default())
}

/// Contact resistance (Type II), `H = 0.5`.
pub fn case_b() -> Problem {
    classical(
        InterfaceType::II,
        InterfaceParams {
            transfer: Some(0.5),
            ..Default::default()
        },
    )
}

/// Partition coefficient (Type IV), `θ = 1.2`.
pub fn case_c() -> Problem {
    classical(
        InterfaceType::IV,
        InterfaceParams {
            theta: Some(1.2),
            ..Default::default()
        },
    )
}

/// Conductivity-weighted flux (Type III), `γ_1 = γ_2 = 2`.
pub fn case_d() -> Problem {
    classical(
        InterfaceType::III,
        InterfaceParams {
            gamma_left: Some(2.0),
            gamma_right: Some(2.0),
            ..Default::default()
        },
    )
}

/// Case B with `H = 5`.
pub fn case_e() -> Problem {
    classical(
        InterfaceType::II,
        InterfaceParams {
            transfer: Some(5.0),
            ..Default::default()
        },
    )
}

/// `D = (0.1, 0.2)`, `γ = (1e-4, 5e-4)`, `H = 0.5`, Dirichlet `1` and `0`.
pub fn case_f() -> Problem {
    let layers = vec![Layer::new(0.0, 0.5, 0.1), Layer::new(0.5, 1.0, 0.2)];
    ProblemBuilder::new(layers, BoundarySpec::dirichlet(1.0), BoundarySpec::dirichlet(0.0))
        .general(
            InterfaceSpec::Gii {
                theta: 1.0,
                transfer: 0.5,
            },
            (Some(1e-4), Some(5e-4)),
        )
        .build()
        .expect("benchmark case is valid")
}

/// Cases A-D in order, labelled.
pub fn accuracy_cases() -> Vec<(&'static str, Problem)> {
    vec![("A", case_a()), ("B", case_b()), ("C", case_c()), ("D", case_d())]
}

/// Replace the single interface of a two-layer problem.
pub fn with_interface(problem: Problem, spec: InterfaceSpec) -> Problem {
    Problem::new(
        problem.layers().to_vec(),
        *problem.bc_left(),
        *problem.bc_right(),
        vec![spec],
    )
    .expect("interface replacement keeps the problem valid")
}
