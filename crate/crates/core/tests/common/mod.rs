//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use grec::autodiff::{Graph, Tensor, Var};

pub const FD_STEP: f64 = 1e-4;
pub const GRAD_TOL: f64 = 1e-5;
/// Tighter bound for single operators.
pub const OP_TOL: f64 = 1e-6;
/// Relative errors are taken against `max(|analytic|, |numeric|, floor)` so
/// gradients that vanish up to rounding do not divide by zero.
pub const REL_FLOOR: f64 = 1e-7;

pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR)
}

/// Fourth-order central-difference check of `build` with respect to every
/// element of every input. `build` must return a scalar.
///
/// The two-point stencil's rounding error (about `eps * |loss| / h`) already
/// exceeds the tolerance for gradients near 1e-7, which the full network
/// produces; the five-point stencil reaches the same truncation error with a
/// step large enough to keep rounding small and still small enough not to
/// cross ReLU kinks.
pub fn fd_check(inputs: &[Tensor<f64>], build: &dyn Fn(&mut Graph<f64>, &[Var]) -> Var) -> f64 {
    let eval = |vals: &[Tensor<f64>]| {
        let mut g = Graph::new();
        let vars: Vec<Var> = vals.iter().map(|t| g.leaf(t.clone())).collect();
        let out = build(&mut g, &vars);
        g.data(out)[0]
    };
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.leaf(t.clone().with_grad())).collect();
    let out = build(&mut g, &vars);
    g.backward(out).unwrap();
    let analytic: Vec<Vec<f64>> = vars
        .iter()
        .zip(inputs)
        .map(|(&v, t)| g.grad(v).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; t.numel()]))
        .collect();

    let mut worst = 0.0f64;
    let mut vals = inputs.to_vec();
    for i in 0..vals.len() {
        for j in 0..vals[i].numel() {
            let x = vals[i].data()[j];
            let mut at = |dx: f64| {
                vals[i].data_mut()[j] = x + dx;
                eval(&vals)
            };
            let numeric = (8.0 * (at(FD_STEP) - at(-FD_STEP)) - (at(2.0 * FD_STEP) - at(-2.0 * FD_STEP)))
                / (12.0 * FD_STEP);
            vals[i].data_mut()[j] = x;
            let e = rel_err(analytic[i][j], numeric);
            worst = worst.max(e);
        }
    }
    worst
}

pub fn randn(shape: &[usize], std: f64, rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    let d = Normal::new(0.0, std).unwrap();
    Tensor::new(shape.to_vec(), (0..n).map(|_| d.sample(rng)).collect()).unwrap()
}

/// Values bounded away from zero so ReLU kinks stay outside the FD stencil.
pub fn away_from_zero(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            let m: f64 = rng.random_range(0.1..1.0);
            if rng.random::<bool>() { m } else { -m }
        })
        .collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

/// `sum(out * r)` for a fixed random `r`, turning any op into a scalar.
pub fn project_sum(g: &mut Graph<f64>, out: Var, seed: u64) -> Var {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = randn(g.shape(out), 1.0, &mut rng);
    let r = g.leaf(r);
    let prod = g.mul(out, r).unwrap();
    g.sum(prod)
}

