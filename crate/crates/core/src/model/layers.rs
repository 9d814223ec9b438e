use rand::Rng;

use crate::autodiff::{init, Graph, Scalar, Tensor, Var};
use crate::error::Result;
use crate::model::ParamStore;

const INIT_STD: f64 = 0.02;

/// One dilated 1D convolution layer and the parameter slots it reads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvKernel {
    pub width: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub dilation: usize,
    pub causal: bool,
    weight: usize,
    bias: usize,
}

impl ConvKernel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn register<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        name: &str,
        width: usize,
        in_channels: usize,
        out_channels: usize,
        dilation: usize,
        causal: bool,
        rng: &mut R,
    ) -> Self {
        let weight = store.insert(
            format!("{name}.weight"),
            init::truncated_normal(vec![width, in_channels, out_channels], INIT_STD, rng),
        );
        let bias = store.insert(format!("{name}.bias"), Tensor::zeros(vec![out_channels]));
        ConvKernel {
            width,
            in_channels,
            out_channels,
            dilation,
            causal,
            weight,
            bias,
        }
    }

    pub(crate) fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &[Var], x: Var) -> Result<Var> {
        g.conv1d(x, p[self.weight], p[self.bias], self.dilation, self.causal)
    }
}

/// Span of input positions that can reach one output position through a
/// stack of width-`width` convolutions with the given dilations.
pub fn receptive_field(width: usize, dilations: &[usize]) -> usize {
    1 + dilations.iter().map(|r| (width - 1) * r).sum::<usize>()
}

/// `x + relu(ln(conv2(relu(ln(conv1(x))))))`
#[derive(Clone, Debug)]
pub(crate) struct ResidualBlock {
    convs: [ConvKernel; 2],
    norms: [(usize, usize); 2],
}

impl ResidualBlock {
    pub(crate) fn register<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        name: &str,
        width: usize,
        d: usize,
        dilations: [usize; 2],
        causal: bool,
        rng: &mut R,
    ) -> Self {
        let mut conv = |i: usize| {
            ConvKernel::register(
                store,
                &format!("{name}.conv{}", i + 1),
                width,
                d,
                d,
                dilations[i],
                causal,
                rng,
            )
        };
        let convs = [conv(0), conv(1)];
        let mut norm = |i: usize| {
            (
                store.insert(format!("{name}.norm{}.gain", i + 1), Tensor::full(vec![d], T::one())),
                store.insert(format!("{name}.norm{}.shift", i + 1), Tensor::zeros(vec![d])),
            )
        };
        let norms = [norm(0), norm(1)];
        ResidualBlock { convs, norms }
    }

    pub(crate) fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &[Var], x: Var) -> Result<Var> {
        let mut h = x;
        for (conv, &(gain, shift)) in self.convs.iter().zip(&self.norms) {
            h = conv.forward(g, p, h)?;
            h = g.layer_norm(h, p[gain], p[shift])?;
            h = g.relu(h);
        }
        g.add(x, h)
    }

    pub(crate) fn kernels(&self) -> &[ConvKernel; 2] {
        &self.convs
    }
}

/// Residual blocks built from consecutive pairs of `dilations`.
pub(crate) fn register_stack<T: Scalar, R: Rng + ?Sized>(
    store: &mut ParamStore<T>,
    prefix: &str,
    width: usize,
    d: usize,
    dilations: &[usize],
    causal: bool,
    rng: &mut R,
) -> Vec<ResidualBlock> {
    dilations
        .chunks_exact(2)
        .enumerate()
        .map(|(i, pair)| {
            ResidualBlock::register(
                store,
                &format!("{prefix}.block{i}"),
                width,
                d,
                [pair[0], pair[1]],
                causal,
                rng,
            )
        })
        .collect()
}

pub(crate) fn run_stack<T: Scalar>(
    g: &mut Graph<T>,
    p: &[Var],
    blocks: &[ResidualBlock],
    x: Var,
) -> Result<Var> {
    blocks.iter().try_fold(x, |h, b| b.forward(g, p, h))
}

/// Inverted bottleneck `x + down(relu(up(x)))`, `d -> f -> d`.
#[derive(Clone, Debug)]
pub(crate) struct Projector {
    up_w: usize,
    up_b: usize,
    down_w: usize,
    down_b: usize,
}

impl Projector {
    pub(crate) fn register<T: Scalar, R: Rng + ?Sized>(
        store: &mut ParamStore<T>,
        d: usize,
        f: usize,
        rng: &mut R,
    ) -> Self {
        // down starts at zero so the projector is the identity at step 0
        Projector {
            up_w: store.insert("proj.up.weight", init::truncated_normal(vec![d, f], INIT_STD, rng)),
            up_b: store.insert("proj.up.bias", Tensor::zeros(vec![f])),
            down_w: store.insert("proj.down.weight", Tensor::zeros(vec![f, d])),
            down_b: store.insert("proj.down.bias", Tensor::zeros(vec![d])),
        }
    }

    pub(crate) fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &[Var], x: Var) -> Result<Var> {
        let up = g.affine(x, p[self.up_w], p[self.up_b])?;
        let act = g.relu(up);
        let down = g.affine(act, p[self.down_w], p[self.down_b])?;
        g.add(x, down)
    }
}
