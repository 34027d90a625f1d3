//! Shared helpers for the integration tests: a seeded generator of valid
//! random problems and an independent continuous steady-state solver.
#![allow(dead_code)]

use multilayer_fv::problem::ProblemBuilder;
use multilayer_fv::{BoundarySpec, InterfaceParams, InterfaceSpec, InterfaceType, Layer, Problem};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug)]
pub struct RandomCase {
    pub problem: Problem,
    pub n: usize,
    pub label: String,
}

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn boundary(rng: &mut StdRng, allow_neumann: bool) -> (BoundarySpec, &'static str) {
    let c = rng.gen_range(-2.0..2.0);
    match rng.gen_range(0..if allow_neumann { 3 } else { 2 }) {
        0 => (BoundarySpec::new(rng.gen_range(0.5..2.0), 0.0, c), "D"),
        1 => (BoundarySpec::new(rng.gen_range(0.1..5.0), rng.gen_range(0.1..2.0), c), "R"),
        _ => (BoundarySpec::new(0.0, rng.gen_range(0.5..2.0), c), "N"),
    }
}

pub fn random_case(rng: &mut StdRng) -> RandomCase {
    let m = rng.gen_range(1..=4);
    let n = rng.gen_range(4..=32);
    let mut x = rng.gen_range(-1.0..1.0);
    let mut layers = Vec::with_capacity(m);
    let mut gamma_is_d = Vec::with_capacity(m);
    for _ in 0..m {
        let w = rng.gen_range(0.2..1.5);
        let d = log_uniform(rng, 0.01, 10.0);
        let plain = rng.gen_bool(0.5);
        let g = if plain { d } else { log_uniform(rng, 0.01, 10.0) };
        layers.push(Layer::new(x, x + w, d).with_conductivity(g));
        gamma_is_d.push(plain);
        x += w;
    }
    let (left, lk) = boundary(rng, true);
    let (right, rk) = boundary(rng, lk != "N");
    let mut label = format!("m={m} n={n} {lk}");
    let gammas: Vec<f64> = layers.iter().map(|l| l.conductivity).collect();
    let mut builder = ProblemBuilder::new(layers, left, right);
    for i in 0..m.saturating_sub(1) {
        let classical_ok = gamma_is_d[i] && gamma_is_d[i + 1];
        let pick = rng.gen_range(0..if classical_ok { 6 } else { 3 });
        let theta = rng.gen_range(0.3..3.0);
        let transfer = log_uniform(rng, 0.1, 50.0);
        let pair = (Some(gammas[i]), Some(gammas[i + 1]));
        let (tag, b) = match pick {
            0 => ("III", builder.classical(
                InterfaceType::III,
                InterfaceParams { gamma_left: pair.0, gamma_right: pair.1, ..Default::default() },
            )),
            1 => ("GI", builder.general(InterfaceSpec::Gi { theta }, pair)),
            2 => ("GII", builder.general(InterfaceSpec::Gii { theta, transfer }, pair)),
            3 => ("I", builder.classical(InterfaceType::I, InterfaceParams::default())),
            4 => ("II", builder.classical(
                InterfaceType::II,
                InterfaceParams { transfer: Some(transfer), ..Default::default() },
            )),
            _ => ("IV", builder.classical(
                InterfaceType::IV,
                InterfaceParams { theta: Some(theta), ..Default::default() },
            )),
        };
        builder = b;
        label.push(' ');
        label.push_str(tag);
    }
    label.push(' ');
    label.push_str(rk);
    let problem = builder.build().expect("generator produces valid problems");
    RandomCase { problem, n, label }
}

pub fn random_suite(seed: u64, count: usize) -> Vec<RandomCase> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_case(&mut rng)).collect()
}

/// Exact steady state of the continuous problem: on layer `i`,
/// `u(x) = v_i + s_i (x − l_{i−1})`. Returns `(v, s)` per layer.
pub fn continuous_steady(problem: &Problem) -> Vec<(f64, f64)> {
    let m = problem.num_layers();
    let k = 2 * m;
    let mut mat = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    let (v, s) = (|i: usize| 2 * i, |i: usize| 2 * i + 1);
    let mut row = 0;
    let bl = problem.bc_left();
    mat[(row, v(0))] = bl.a;
    mat[(row, s(0))] = -bl.b;
    rhs[row] = bl.c;
    row += 1;
    for (i, spec) in problem.interfaces().iter().enumerate() {
        let w = problem.layer(i).width();
        let (g1, g2) = (problem.layer(i).conductivity, problem.layer(i + 1).conductivity);
        mat[(row, s(i))] = g1;
        mat[(row, s(i + 1))] = -g2;
        row += 1;
        match *spec {
            InterfaceSpec::Gi { theta } => {
                mat[(row, v(i))] = 1.0;
                mat[(row, s(i))] = w;
                mat[(row, v(i + 1))] = -theta;
            }
            InterfaceSpec::Gii { theta, transfer } => {
                // γ_i s_i = H (θ u_{i+1} − u_i)
                mat[(row, s(i))] = g1 + transfer * w;
                mat[(row, v(i))] = transfer;
                mat[(row, v(i + 1))] = -transfer * theta;
            }
        }
        row += 1;
    }
    let br = problem.bc_right();
    let w = problem.layer(m - 1).width();
    mat[(row, v(m - 1))] = br.a;
    mat[(row, s(m - 1))] = br.a * w + br.b;
    rhs[row] = br.c;
    let sol = mat.lu().solve(&rhs).expect("steady problem is nonsingular");
    (0..m).map(|i| (sol[v(i)], sol[s(i)])).collect()
}
