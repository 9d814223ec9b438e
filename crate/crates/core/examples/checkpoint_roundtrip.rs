//! Saves a freshly initialised model of every trainable kind and reloads it,
//! checking that the scores survive bit for bit.
//!
//! ```text
//! cargo run --release --example checkpoint_roundtrip
//! ```

use grec::model::{checkpoint, ModelConfig, ModelKind, Network};

fn main() -> grec::Result<()> {
    let dir = std::env::temp_dir().join(format!("grec-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| grec::Error::io(&dir, e))?;
    let kinds = [
        ModelKind::Grec,
        ModelKind::NextItNet,
        ModelKind::NextItNetPlus,
        ModelKind::TNextItNet,
        ModelKind::EncoderOnly,
    ];
    for kind in kinds {
        let net = Network::<f32>::new(ModelConfig::new(kind, 50, 12).with_width(16), 3)?;
        let path = dir.join(format!("{kind}.bin"));
        checkpoint::save(&net, &path)?;
        let back = checkpoint::load(&path)?;
        let prefix: &[u32] = &[4, 8, 15, 16, 23, 42];
        let same = net.next_item_logits(&[prefix])? == back.next_item_logits(&[prefix])?;
        let bytes = std::fs::metadata(&path).map_err(|e| grec::Error::io(&path, e))?.len();
        println!("{:<16} {bytes:>8} bytes  identical scores: {same}", kind.name());
    }
    std::fs::remove_dir_all(&dir).map_err(|e| grec::Error::io(&dir, e))?;
    Ok(())
}
