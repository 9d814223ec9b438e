use crate::autodiff::{Scalar, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam with one moment pair per parameter tensor.
#[derive(Clone, Debug)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new<'a>(config: AdamConfig, params: impl IntoIterator<Item = &'a Tensor<T>>) -> Self {
        let first: Vec<Vec<T>> = params
            .into_iter()
            .map(|p| vec![T::zero(); p.numel()])
            .collect();
        let second = first.clone();
        AdamState {
            config,
            step: 0,
            first,
            second,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update. `grads[i]` belongs to `params[i]`; a missing
    /// gradient is treated as zero.
    pub fn step<'a>(
        &mut self,
        params: impl IntoIterator<Item = &'a mut Tensor<T>>,
        grads: &[Option<&[T]>],
    ) -> Result<()> {
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        let (b1, b2) = (T::from_f64(c.beta1), T::from_f64(c.beta2));
        let (one_b1, one_b2) = (T::one() - b1, T::one() - b2);
        let lr = T::from_f64(c.learning_rate);
        let eps = T::from_f64(c.eps);
        let (inv_bc1, inv_bc2) = (T::from_f64(1.0 / bc1), T::from_f64(1.0 / bc2));

        let mut count = 0;
        for (i, p) in params.into_iter().enumerate() {
            count += 1;
            let (Some(m), Some(v)) = (self.first.get_mut(i), self.second.get_mut(i)) else {
                return Err(Error::Shape {
                    op: "adam",
                    expected: vec![self.first.len()],
                    actual: vec![i + 1],
                });
            };
            if m.len() != p.numel() {
                return Err(Error::Shape {
                    op: "adam",
                    expected: vec![m.len()],
                    actual: p.shape().to_vec(),
                });
            }
            let Some(g) = grads.get(i).copied().flatten() else {
                // zero gradient: decay the moments, position unchanged iff moments are zero
                m.iter_mut().for_each(|x| *x = *x * b1);
                v.iter_mut().for_each(|x| *x = *x * b2);
                apply(p.data_mut(), m, v, lr, inv_bc1, inv_bc2, eps);
                continue;
            };
            for ((mi, vi), &gi) in m.iter_mut().zip(v.iter_mut()).zip(g) {
                *mi = b1 * *mi + one_b1 * gi;
                *vi = b2 * *vi + one_b2 * gi * gi;
            }
            apply(p.data_mut(), m, v, lr, inv_bc1, inv_bc2, eps);
        }
        if count != self.first.len() {
            return Err(Error::Shape {
                op: "adam",
                expected: vec![self.first.len()],
                actual: vec![count],
            });
        }
        Ok(())
    }
}

fn apply<T: Scalar>(p: &mut [T], m: &[T], v: &[T], lr: T, inv_bc1: T, inv_bc2: T, eps: T) {
    for ((x, &mi), &vi) in p.iter_mut().zip(m).zip(v) {
        let mhat = mi * inv_bc1;
        let vhat = vi * inv_bc2;
        *x = *x - lr * mhat / (vhat.sqrt() + eps);
    }
}
