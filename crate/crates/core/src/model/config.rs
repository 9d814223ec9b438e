use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Gap-filling encoder-decoder.
    Grec,
    /// Causal decoder trained left to right on every position.
    NextItNet,
    /// NextItNet trained on the corpus plus its reversed sessions.
    NextItNetPlus,
    /// Forward and backward causal stacks joined by a shared softmax.
    TNextItNet,
    /// GRec with the decoder removed; the softmax sits on the encoder.
    EncoderOnly,
    /// Global popularity ranking.
    MostPop,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Grec,
        ModelKind::NextItNet,
        ModelKind::NextItNetPlus,
        ModelKind::TNextItNet,
        ModelKind::EncoderOnly,
        ModelKind::MostPop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Grec => "grec",
            ModelKind::NextItNet => "nextitnet",
            ModelKind::NextItNetPlus => "nextitnet_plus",
            ModelKind::TNextItNet => "tnextitnet",
            ModelKind::EncoderOnly => "encoder_only",
            ModelKind::MostPop => "mostpop",
        }
    }

    /// Whether training draws gap positions for each row.
    pub fn uses_gaps(self) -> bool {
        matches!(self, ModelKind::Grec | ModelKind::EncoderOnly)
    }

    pub fn has_encoder(self) -> bool {
        matches!(self, ModelKind::Grec | ModelKind::EncoderOnly)
    }

    pub fn has_decoder(self) -> bool {
        !matches!(self, ModelKind::EncoderOnly | ModelKind::MostPop)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        let norm = match norm.as_str() {
            "nextitnet+" => "nextitnet_plus",
            "encoder" => "encoder_only",
            other => other,
        }
        .to_string();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown model kind `{s}`")))
    }
}

/// Architecture hyper-parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Number of items `V`.
    pub vocab_size: usize,
    /// Session length `t`.
    pub seq_len: usize,
    /// Embedding and hidden width.
    pub d: usize,
    /// Inner width of the projector bottleneck.
    pub f: usize,
    pub kernel: usize,
    pub enc_dilations: Vec<usize>,
    pub dec_dilations: Vec<usize>,
    pub gamma: f64,
    pub projector: bool,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, vocab_size: usize, seq_len: usize) -> Self {
        let dil = vec![1, 2, 4, 8, 1, 2, 4, 8];
        ModelConfig {
            kind,
            vocab_size,
            seq_len,
            d: 64,
            f: 128,
            kernel: 3,
            enc_dilations: dil.clone(),
            dec_dilations: dil,
            gamma: 0.5,
            projector: kind == ModelKind::Grec,
        }
    }

    /// Sets `d` and keeps `f = 2d`.
    pub fn with_width(mut self, d: usize) -> Self {
        self.d = d;
        self.f = 2 * d;
        self
    }

    pub fn with_dilations(mut self, dilations: &[usize]) -> Self {
        self.enc_dilations = dilations.to_vec();
        self.dec_dilations = dilations.to_vec();
        self
    }

    pub fn mask_id(&self) -> u32 {
        self.vocab_size as u32 + 1
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.kind == ModelKind::MostPop {
            return fail("mostpop has no network configuration".into());
        }
        if self.vocab_size == 0 {
            return fail("vocab_size must be at least 1".into());
        }
        if self.seq_len < 2 {
            return fail(format!("seq_len must be at least 2, got {}", self.seq_len));
        }
        if self.d == 0 || self.f == 0 {
            return fail("d and f must be positive".into());
        }
        if self.kernel == 0 {
            return fail("kernel width must be at least 1".into());
        }
        if self.kind.has_encoder() && self.kernel % 2 == 0 {
            return fail(format!(
                "encoder convolutions are non-causal and need an odd kernel, got {}",
                self.kernel
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail(format!("gamma must be in (0, 1], got {}", self.gamma));
        }
        let mut stacks = Vec::new();
        if self.kind.has_encoder() {
            stacks.push(("enc_dilations", &self.enc_dilations));
        }
        if self.kind.has_decoder() {
            stacks.push(("dec_dilations", &self.dec_dilations));
        }
        for (name, d) in stacks {
            if d.is_empty() || d.len() % 2 != 0 {
                return fail(format!(
                    "{name} must be a nonempty list of even length (two layers per residual block), got {d:?}"
                ));
            }
            if d.contains(&0) {
                return fail(format!("{name} must be positive, got {d:?}"));
            }
        }
        Ok(())
    }

    /// `key=value` lines in a fixed order.
    pub fn to_kv(&self) -> String {
        let list = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "kind={}\nvocab_size={}\nseq_len={}\nd={}\nf={}\nkernel={}\nenc_dilations={}\ndec_dilations={}\ngamma={}\nprojector={}\n",
            self.kind,
            self.vocab_size,
            self.seq_len,
            self.d,
            self.f,
            self.kernel,
            list(&self.enc_dilations),
            list(&self.dec_dilations),
            self.gamma,
            self.projector
        )
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::new(ModelKind::Grec, 1, 2);
        let mut seen = std::collections::HashSet::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed config line `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |e: &dyn fmt::Display| Error::Config(format!("bad value for {k}: {e}"));
            match k {
                "kind" => cfg.kind = v.parse()?,
                "vocab_size" => cfg.vocab_size = v.parse().map_err(|e| bad(&e))?,
                "seq_len" => cfg.seq_len = v.parse().map_err(|e| bad(&e))?,
                "d" => cfg.d = v.parse().map_err(|e| bad(&e))?,
                "f" => cfg.f = v.parse().map_err(|e| bad(&e))?,
                "kernel" => cfg.kernel = v.parse().map_err(|e| bad(&e))?,
                "enc_dilations" => cfg.enc_dilations = parse_list(v)?,
                "dec_dilations" => cfg.dec_dilations = parse_list(v)?,
                "gamma" => cfg.gamma = v.parse().map_err(|e| bad(&e))?,
                "projector" => cfg.projector = v.parse().map_err(|e| bad(&e))?,
                other => return Err(Error::UnknownKey(other.to_string())),
            }
            seen.insert(k.to_string());
        }
        for required in ["kind", "vocab_size", "seq_len"] {
            if !seen.contains(required) {
                return Err(Error::Config(format!("missing `{required}`")));
            }
        }
        Ok(cfg)
    }
}

pub(crate) fn parse_list(v: &str) -> Result<Vec<usize>> {
    v.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<usize>()
                .map_err(|e| Error::Config(format!("bad list element `{x}`: {e}")))
        })
        .collect()
}
