//! Compares the tape gradients of a small GRec loss against fourth-order
//! central finite differences in double precision. Parameters are moved away
//! from their initial values first, so every path carries a visible gradient.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use grec::autodiff::Graph;
use grec::data::SessionBatch;
use grec::masking::{row_rng, sample_gaps};
use grec::model::{ModelConfig, ModelKind, Network};

const STEP: f64 = 1e-4;

fn main() -> grec::Result<()> {
    let config = ModelConfig::new(ModelKind::Grec, 8, 6).with_width(4).with_dilations(&[1, 2]);
    let mut net = Network::<f64>::new(config.clone(), 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..net.params().len() {
        for x in net.params_mut().tensor_mut(i).data_mut() {
            *x += rng.random_range(-0.4..0.4);
        }
    }
    let rows = vec![vec![0, 3, 1, 4, 1, 5], vec![2, 6, 5, 3, 5, 8]];
    let batch = SessionBatch::from_rows(&rows);
    let plans = rows
        .iter()
        .enumerate()
        .map(|(i, r)| sample_gaps(r, 0.5, config.mask_id(), &mut row_rng(0, 0, i as u64)))
        .collect::<grec::Result<Vec<_>>>()?;

    let loss_of = |net: &Network<f64>| -> grec::Result<f64> {
        let mut g = Graph::new();
        let p = net.bind(&mut g, false);
        let out = net.loss(&mut g, &p, &batch, &plans)?;
        Ok(g.data(out.loss)[0])
    };

    let mut g = Graph::new();
    let p = net.bind(&mut g, true);
    let out = net.loss(&mut g, &p, &batch, &plans)?;
    g.backward(out.loss)?;
    let analytic: Vec<Vec<f64>> = p.iter().map(|&v| g.grad(v).map(<[f64]>::to_vec).unwrap_or_default()).collect();
    println!("loss {:.6} over {} parameter tensors", g.data(out.loss)[0], p.len());

    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let name = net.params().names()[i].clone();
        let mut tensor_worst = 0.0f64;
        for j in 0..net.params().tensor(i).numel() {
            let x = net.params().tensor(i).data()[j];
            let mut at = |dx: f64| -> grec::Result<f64> {
                net.params_mut().tensor_mut(i).data_mut()[j] = x + dx;
                loss_of(&net)
            };
            let numeric = (8.0 * (at(STEP)? - at(-STEP)?) - (at(2.0 * STEP)? - at(-2.0 * STEP)?)) / (12.0 * STEP);
            net.params_mut().tensor_mut(i).data_mut()[j] = x;
            let a = analytic[i].get(j).copied().unwrap_or(0.0);
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-7);
            tensor_worst = tensor_worst.max(err);
        }
        println!("{name:<28} max rel err {tensor_worst:.2e}");
        worst = worst.max(tensor_worst);
    }
    println!("worst relative error {worst:.2e}");
    Ok(())
}
