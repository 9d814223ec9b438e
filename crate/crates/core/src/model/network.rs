use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{init, Graph, Scalar, Tensor, Var};
use crate::data::{valid_region, ItemId, SessionBatch, PAD};
use crate::error::{Error, Result};
use crate::masking::MaskPlan;
use crate::model::layers::{register_stack, run_stack, Projector, ResidualBlock};
use crate::model::{ConvKernel, ModelConfig, ModelKind, ParamStore};

#[derive(Clone, Debug)]
struct Layout {
    enc_embedding: Option<usize>,
    encoder: Vec<ResidualBlock>,
    dec_embedding: Option<usize>,
    decoder: Vec<ResidualBlock>,
    backward: Vec<ResidualBlock>,
    projector: Option<Projector>,
    softmax_w: usize,
    softmax_b: usize,
}

/// Loss node plus the logits and targets of every prediction site, in the
/// order the sites were gathered.
pub struct LossOutput {
    pub loss: Var,
    pub logits: Var,
    pub targets: Vec<usize>,
}

/// A trainable sequence model: GRec or one of its NextItNet-family
/// relatives, selected by [`ModelConfig::kind`].
///
/// Embedding tables are sized `[V + 2, d]` on the encoder side (padding,
/// items, gap symbol) and `[V + 1, d]` on the decoder side. The softmax
/// covers `V + 1` classes; class 0 is padding and is never a target.
#[derive(Clone, Debug)]
pub struct Network<T> {
    config: ModelConfig,
    params: ParamStore<T>,
    layout: Layout,
}

impl<T: Scalar> Network<T> {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::default();
        let c = &config;
        let (v, d) = (c.vocab_size, c.d);
        let std = 0.02;

        let mut layout = Layout {
            enc_embedding: None,
            encoder: Vec::new(),
            dec_embedding: None,
            decoder: Vec::new(),
            backward: Vec::new(),
            projector: None,
            softmax_w: 0,
            softmax_b: 0,
        };
        if c.kind.has_encoder() {
            layout.enc_embedding = Some(store.insert(
                "enc.embedding",
                init::truncated_normal(vec![v + 2, d], std, &mut rng),
            ));
            layout.encoder = register_stack(
                &mut store,
                "enc",
                c.kernel,
                d,
                &c.enc_dilations,
                false,
                &mut rng,
            );
        }
        match c.kind {
            ModelKind::Grec | ModelKind::NextItNet | ModelKind::NextItNetPlus => {
                layout.dec_embedding = Some(store.insert(
                    "dec.embedding",
                    init::truncated_normal(vec![v + 1, d], std, &mut rng),
                ));
                layout.decoder =
                    register_stack(&mut store, "dec", c.kernel, d, &c.dec_dilations, true, &mut rng);
            }
            ModelKind::TNextItNet => {
                layout.dec_embedding = Some(store.insert(
                    "embedding",
                    init::truncated_normal(vec![v + 1, d], std, &mut rng),
                ));
                layout.decoder =
                    register_stack(&mut store, "fwd", c.kernel, d, &c.dec_dilations, true, &mut rng);
                layout.backward =
                    register_stack(&mut store, "bwd", c.kernel, d, &c.dec_dilations, true, &mut rng);
            }
            ModelKind::EncoderOnly | ModelKind::MostPop => {}
        }
        if c.projector && c.kind != ModelKind::EncoderOnly && c.kind != ModelKind::TNextItNet {
            layout.projector = Some(Projector::register(&mut store, d, c.f, &mut rng));
        }
        let head_in = if c.kind == ModelKind::TNextItNet { 2 * d } else { d };
        layout.softmax_w = store.insert(
            "softmax.weight",
            init::truncated_normal(vec![head_in, v + 1], std, &mut rng),
        );
        layout.softmax_b = store.insert("softmax.bias", Tensor::zeros(vec![v + 1]));
        Ok(Network {
            config,
            params: store,
            layout,
        })
    }

    /// Rebuilds a network around existing parameters, checking every name and
    /// shape against the layout implied by `config`.
    pub fn from_params(config: ModelConfig, params: ParamStore<T>) -> Result<Self> {
        let mut net = Network::<T>::new(config, 0)?;
        if params.names() != net.params.names() {
            return Err(Error::Corrupt(format!(
                "parameter names {:?} do not match the configured layout {:?}",
                params.names(),
                net.params.names()
            )));
        }
        for (i, (name, t)) in params.iter().enumerate() {
            let expected = net.params.tensor(i).shape();
            if t.shape() != expected {
                return Err(Error::Shape {
                    op: "checkpoint",
                    expected: expected.to_vec(),
                    actual: t.shape().to_vec(),
                })
                .map_err(|e| Error::Corrupt(format!("{name}: {e}")));
            }
        }
        net.params = params;
        Ok(net)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    pub fn cast<U: Scalar>(&self) -> Network<U> {
        Network {
            config: self.config.clone(),
            params: self.params.cast(),
            layout: self.layout.clone(),
        }
    }

    /// Every convolution of the causal decoder stack, bottom to top.
    pub fn decoder_kernels(&self) -> Vec<&ConvKernel> {
        self.layout.decoder.iter().flat_map(|b| b.kernels()).collect()
    }

    pub fn encoder_kernels(&self) -> Vec<&ConvKernel> {
        self.layout.encoder.iter().flat_map(|b| b.kernels()).collect()
    }

    pub fn bind(&self, g: &mut Graph<T>, trainable: bool) -> Vec<Var> {
        self.params.bind(g, trainable)
    }

    fn check_ids(ids: &[ItemId], rows: usize) -> Result<()> {
        match ids.iter().find(|&&id| id as usize >= rows) {
            Some(&id) => Err(Error::IdOutOfRange {
                id: id as usize,
                rows,
            }),
            None => Ok(()),
        }
    }

    fn lookup(&self, g: &mut Graph<T>, table: Var, ids: &[ItemId], batch: usize) -> Result<Var> {
        let t = ids.len() / batch.max(1);
        let ids: Vec<usize> = ids.iter().map(|&i| i as usize).collect();
        g.embedding(table, &ids, &[batch, t])
    }

    /// Non-causal encoder over gapped ids `[B, t]` (padding, items and the
    /// gap symbol). Output `[B, t, d]`.
    pub fn encode(&self, g: &mut Graph<T>, p: &[Var], ids: &[ItemId], batch: usize) -> Result<Var> {
        let table = self
            .layout
            .enc_embedding
            .ok_or_else(|| Error::Config(format!("{} has no encoder", self.kind())))?;
        Self::check_ids(ids, self.config.vocab_size + 2)?;
        let e = self.lookup(g, p[table], ids, batch)?;
        run_stack(g, p, &self.layout.encoder, e)
    }

    /// Decoder-side embedding of ungapped ids `[B, t]`.
    pub fn embed_decoder(
        &self,
        g: &mut Graph<T>,
        p: &[Var],
        ids: &[ItemId],
        batch: usize,
    ) -> Result<Var> {
        let table = self
            .layout
            .dec_embedding
            .ok_or_else(|| Error::Config(format!("{} has no decoder", self.kind())))?;
        Self::check_ids(ids, self.config.vocab_size + 1)?;
        self.lookup(g, p[table], ids, batch)
    }

    /// Sums the encoder output (when given) with the decoder embedding and
    /// applies the projector, if the model has one.
    pub fn project(&self, g: &mut Graph<T>, p: &[Var], enc: Option<Var>, dec_emb: Var) -> Result<Var> {
        let agg = match enc {
            Some(e) => g.add(e, dec_emb)?,
            None => dec_emb,
        };
        match &self.layout.projector {
            Some(proj) => proj.forward(g, p, agg),
            None => Ok(agg),
        }
    }

    /// Causal residual stack; position `i` of the output only depends on
    /// input positions `<= i`.
    pub fn decode(&self, g: &mut Graph<T>, p: &[Var], x: Var) -> Result<Var> {
        run_stack(g, p, &self.layout.decoder, x)
    }

    fn decode_backward(&self, g: &mut Graph<T>, p: &[Var], x: Var) -> Result<Var> {
        run_stack(g, p, &self.layout.backward, x)
    }

    /// `hidden [M, d_head] @ W + b`.
    pub fn head(&self, g: &mut Graph<T>, p: &[Var], hidden: Var) -> Result<Var> {
        g.affine(hidden, p[self.layout.softmax_w], p[self.layout.softmax_b])
    }

    /// Training objective for the configured kind. Gap plans are required for
    /// GRec and the encoder-only variant and ignored otherwise.
    pub fn loss(
        &self,
        g: &mut Graph<T>,
        p: &[Var],
        batch: &SessionBatch,
        plans: &[MaskPlan],
    ) -> Result<LossOutput> {
        match self.kind() {
            ModelKind::Grec => self.grec_loss(g, p, batch, plans, false),
            ModelKind::NextItNet | ModelKind::NextItNetPlus => self.nextitnet_loss(g, p, batch),
            ModelKind::TNextItNet => self.tnextitnet_loss(g, p, batch),
            ModelKind::EncoderOnly => self.encoder_only_loss(g, p, batch, plans),
            ModelKind::MostPop => Err(Error::Config("mostpop has no loss".into())),
        }
    }

    /// Gap-filling loss over the gapped positions only.
    ///
    /// The encoder reads the gapped rows, the decoder reads the original
    /// rows, and gap `j` is predicted from the decoder state at `j - 1`, so
    /// neither path can see the target. `zero_encoder` replaces the encoder
    /// output by zeros.
    pub fn grec_loss(
        &self,
        g: &mut Graph<T>,
        p: &[Var],
        batch: &SessionBatch,
        plans: &[MaskPlan],
        zero_encoder: bool,
    ) -> Result<LossOutput> {
        check_plans(batch, plans)?;
        let b = batch.len();
        let gapped: Vec<ItemId> = plans.iter().flat_map(|pl| pl.gapped.iter().copied()).collect();
        let enc = if zero_encoder {
            None
        } else {
            Some(self.encode(g, p, &gapped, b)?)
        };
        let dec_emb = self.embed_decoder(g, p, &batch.ids, b)?;
        let proj = self.project(g, p, enc, dec_emb)?;
        let hidden = self.decode(g, p, proj)?;
        let (sites, targets) = gap_sites(batch, plans, 1)?;
        self.finish(g, p, hidden, &sites, targets)
    }

    /// Left-to-right loss: position `j` predicts `j + 1` over every valid
    /// position except the last.
    pub fn nextitnet_loss(&self, g: &mut Graph<T>, p: &[Var], batch: &SessionBatch) -> Result<LossOutput> {
        let emb = self.embed_decoder(g, p, &batch.ids, batch.len())?;
        let proj = self.project(g, p, None, emb)?;
        let hidden = self.decode(g, p, proj)?;
        let t = batch.t;
        let mut sites = Vec::new();
        let mut targets = Vec::new();
        for r in 0..batch.len() {
            for pos in batch.first_valid(r)..t.saturating_sub(1) {
                sites.push(Some(r * t + pos));
                targets.push(batch.ids[r * t + pos + 1] as usize);
            }
        }
        self.finish(g, p, hidden, &sites, targets)
    }

    /// Joint two-direction loss. Item `j` is predicted from the
    /// concatenation of the forward state at `j - 1` and the backward state
    /// at `j + 1`; a side with no context contributes zeros.
    pub fn tnextitnet_loss(&self, g: &mut Graph<T>, p: &[Var], batch: &SessionBatch) -> Result<LossOutput> {
        let b = batch.len();
        let t = batch.t;
        let reversed: Vec<ItemId> = batch.rows().flat_map(reverse_valid).collect();
        let fwd_emb = self.embed_decoder(g, p, &batch.ids, b)?;
        let fwd = self.decode(g, p, fwd_emb)?;
        let bwd_emb = self.embed_decoder(g, p, &reversed, b)?;
        let bwd = self.decode_backward(g, p, bwd_emb)?;

        let mut fwd_ix = Vec::new();
        let mut bwd_ix = Vec::new();
        let mut targets = Vec::new();
        for r in 0..b {
            if batch.valid_len[r] < 2 {
                continue;
            }
            let first = batch.first_valid(r);
            for pos in first..t {
                fwd_ix.push((pos > first).then(|| r * t + pos - 1));
                // original position pos+1 sits at first + (t-1) - (pos+1) after reversal
                bwd_ix.push((pos + 1 < t).then(|| r * t + first + t - 2 - pos));
                targets.push(batch.ids[r * t + pos] as usize);
            }
        }
        let hf = g.gather_rows(fwd, &fwd_ix)?;
        let hb = g.gather_rows(bwd, &bwd_ix)?;
        let h = g.concat(hf, hb)?;
        let logits = self.head(g, p, h)?;
        let loss = g.softmax_xent(logits, &targets)?;
        Ok(LossOutput {
            loss,
            logits,
            targets,
        })
    }

    /// Softmax on the encoder output at the gapped positions themselves.
    pub fn encoder_only_loss(
        &self,
        g: &mut Graph<T>,
        p: &[Var],
        batch: &SessionBatch,
        plans: &[MaskPlan],
    ) -> Result<LossOutput> {
        check_plans(batch, plans)?;
        let gapped: Vec<ItemId> = plans.iter().flat_map(|pl| pl.gapped.iter().copied()).collect();
        let hidden = self.encode(g, p, &gapped, batch.len())?;
        let (sites, targets) = gap_sites(batch, plans, 0)?;
        self.finish(g, p, hidden, &sites, targets)
    }

    fn finish(
        &self,
        g: &mut Graph<T>,
        p: &[Var],
        hidden: Var,
        sites: &[Option<usize>],
        targets: Vec<usize>,
    ) -> Result<LossOutput> {
        let h = g.gather_rows(hidden, sites)?;
        let logits = self.head(g, p, h)?;
        let loss = g.softmax_xent(logits, &targets)?;
        Ok(LossOutput {
            loss,
            logits,
            targets,
        })
    }

    /// Arranges a query prefix into one model input row of length `t`.
    ///
    /// The newest items are kept. The encoder-only variant appends the gap
    /// symbol and predicts at that slot.
    pub fn query_row(&self, prefix: &[ItemId]) -> Result<Vec<ItemId>> {
        let t = self.config.seq_len;
        let items: Vec<ItemId> = prefix.iter().copied().filter(|&x| x != PAD).collect();
        if items.is_empty() {
            return Err(Error::EmptyInput("query prefix has no items".into()));
        }
        if let Some(&id) = items.iter().find(|&&x| x as usize > self.config.vocab_size) {
            return Err(Error::IdOutOfRange {
                id: id as usize,
                rows: self.config.vocab_size + 1,
            });
        }
        let keep = if self.kind() == ModelKind::EncoderOnly { t - 1 } else { t };
        let tail = &items[items.len().saturating_sub(keep)..];
        let mut row = vec![PAD; keep - tail.len()];
        row.extend_from_slice(tail);
        if self.kind() == ModelKind::EncoderOnly {
            row.push(self.config.mask_id());
        }
        Ok(row)
    }

    /// Next-item logits (`V + 1` classes, class 0 is padding) at the final
    /// position of each query. Nothing is gapped at inference.
    pub fn next_item_logits(&self, prefixes: &[&[ItemId]]) -> Result<Vec<Vec<T>>> {
        let mut out = Vec::with_capacity(prefixes.len());
        for chunk in prefixes.chunks(256) {
            let rows = chunk
                .iter()
                .map(|q| self.query_row(q))
                .collect::<Result<Vec<_>>>()?;
            let batch = SessionBatch::from_rows(&rows);
            let mut g = Graph::new();
            let p = self.bind(&mut g, false);
            let b = batch.len();
            let t = batch.t;
            let last: Vec<Option<usize>> = (0..b).map(|r| Some(r * t + t - 1)).collect();
            let hidden = match self.kind() {
                ModelKind::Grec => {
                    let enc = self.encode(&mut g, &p, &batch.ids, b)?;
                    let emb = self.embed_decoder(&mut g, &p, &batch.ids, b)?;
                    let proj = self.project(&mut g, &p, Some(enc), emb)?;
                    let h = self.decode(&mut g, &p, proj)?;
                    g.gather_rows(h, &last)?
                }
                ModelKind::NextItNet | ModelKind::NextItNetPlus => {
                    let emb = self.embed_decoder(&mut g, &p, &batch.ids, b)?;
                    let proj = self.project(&mut g, &p, None, emb)?;
                    let h = self.decode(&mut g, &p, proj)?;
                    g.gather_rows(h, &last)?
                }
                ModelKind::TNextItNet => {
                    // the backward stack has no future to read at generation time
                    let emb = self.embed_decoder(&mut g, &p, &batch.ids, b)?;
                    let h = self.decode(&mut g, &p, emb)?;
                    let hf = g.gather_rows(h, &last)?;
                    let hb = g.gather_rows(h, &vec![None; b])?;
                    g.concat(hf, hb)?
                }
                ModelKind::EncoderOnly => {
                    let h = self.encode(&mut g, &p, &batch.ids, b)?;
                    g.gather_rows(h, &last)?
                }
                ModelKind::MostPop => unreachable!("validated at construction"),
            };
            let logits = self.head(&mut g, &p, hidden)?;
            let n = self.config.vocab_size + 1;
            out.extend(g.data(logits).chunks_exact(n).map(<[T]>::to_vec));
        }
        Ok(out)
    }
}

fn check_plans(batch: &SessionBatch, plans: &[MaskPlan]) -> Result<()> {
    if plans.len() != batch.len() {
        return Err(Error::Shape {
            op: "gap plans",
            expected: vec![batch.len()],
            actual: vec![plans.len()],
        });
    }
    Ok(())
}

/// Flat `[B * t]` row indices of the prediction sites for every gap,
/// `shift` positions to the left of the gap, plus the gap targets.
fn gap_sites(
    batch: &SessionBatch,
    plans: &[MaskPlan],
    shift: usize,
) -> Result<(Vec<Option<usize>>, Vec<usize>)> {
    let t = batch.t;
    let mut sites = Vec::new();
    let mut targets = Vec::new();
    for (r, plan) in plans.iter().enumerate() {
        if plan.gapped.len() != t {
            return Err(Error::Shape {
                op: "gap plan",
                expected: vec![t],
                actual: vec![plan.gapped.len()],
            });
        }
        let first = batch.first_valid(r);
        for (&pos, &target) in plan.positions.iter().zip(&plan.targets) {
            if pos < first + shift || pos >= t {
                return Err(Error::Config(format!(
                    "gap at position {pos} of row {r} has no prediction site (first valid {first})"
                )));
            }
            sites.push(Some(r * t + pos - shift));
            targets.push(target as usize);
        }
    }
    Ok((sites, targets))
}

/// The row with its valid region reversed; padding stays a prefix.
pub fn reverse_valid(row: &[ItemId]) -> Vec<ItemId> {
    let valid = valid_region(row);
    let mut out = vec![PAD; row.len() - valid.len()];
    out.extend(valid.iter().rev());
    out
}

/// Each row followed by its reversal, which realizes NextItNet+ training.
pub fn nextitnet_plus_expand(rows: &[Vec<ItemId>]) -> Vec<Vec<ItemId>> {
    rows.iter()
        .flat_map(|r| [r.clone(), reverse_valid(r)])
        .collect()
}
