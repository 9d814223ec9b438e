//! Parameter initializers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::autodiff::{Scalar, Tensor};

/// Normal(0, std) truncated to two standard deviations by rejection.
pub fn truncated_normal<T: Scalar, R: Rng + ?Sized>(
    shape: Vec<usize>,
    std: f64,
    rng: &mut R,
) -> Tensor<T> {
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| loop {
            let z: f64 = rng.sample(StandardNormal);
            if z.abs() <= 2.0 {
                break T::from_f64(z * std);
            }
        })
        .collect();
    Tensor::new(shape, data).expect("shape product matches length")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn truncated_normal_is_bounded_and_scaled() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t: Tensor<f64> = truncated_normal(vec![100, 100], 0.02, &mut rng);
        assert!(t.data().iter().all(|x| x.abs() <= 0.04));
        let var = t.data().iter().map(|x| x * x).sum::<f64>() / t.numel() as f64;
        // variance of a 2-sigma truncated normal is ~0.774 sigma^2
        assert!((var.sqrt() / 0.02 - 0.88).abs() < 0.02);
    }
}
