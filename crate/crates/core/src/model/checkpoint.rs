//! Binary checkpoint format.
//!
//! ```text
//! magic        8 bytes  "GRECCKPT"
//! version      u32 LE
//! config_len   u32 LE, then that many bytes of `key=value` lines
//! n_params     u32 LE
//! per parameter:
//!   name_len u32 LE, name (UTF-8)
//!   ndim u32 LE, ndim x u32 LE extents
//!   product(extents) x f32 LE
//! ```

use std::fs;
use std::path::Path;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::model::{ModelConfig, Network, ParamStore};

pub const MAGIC: &[u8; 8] = b"GRECCKPT";
pub const VERSION: u32 = 1;

pub fn to_bytes(net: &Network<f32>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let cfg = net.config().to_kv();
    out.extend_from_slice(&(cfg.len() as u32).to_le_bytes());
    out.extend_from_slice(cfg.as_bytes());
    out.extend_from_slice(&(net.params().len() as u32).to_le_bytes());
    for (name, t) in net.params().iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &e in t.shape() {
            out.extend_from_slice(&(e as u32).to_le_bytes());
        }
        for x in t.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Corrupt(format!(
                "truncated while reading {what} at byte {} ({} bytes total)",
                self.pos,
                self.buf.len()
            ))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn text(&mut self, n: usize, what: &str) -> Result<&'a str> {
        std::str::from_utf8(self.take(n, what)?)
            .map_err(|e| Error::Corrupt(format!("{what} is not UTF-8: {e}")))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<Network<f32>> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::Corrupt("bad magic, not a checkpoint".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Version {
            found: version,
            expected: VERSION,
        });
    }
    let cfg_len = r.u32("config length")? as usize;
    let config = ModelConfig::from_kv(r.text(cfg_len, "config")?)?;
    let n = r.u32("parameter count")?;
    let mut store = ParamStore::default();
    for _ in 0..n {
        let name_len = r.u32("name length")? as usize;
        let name = r.text(name_len, "parameter name")?.to_string();
        let ndim = r.u32("rank")? as usize;
        let shape = (0..ndim)
            .map(|_| r.u32("extent").map(|x| x as usize))
            .collect::<Result<Vec<_>>>()?;
        let numel: usize = shape.iter().product();
        let bytes = r.take(numel * 4, &format!("data of {name}"))?;
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        store.insert(name, Tensor::new(shape, data)?);
    }
    if r.pos != buf.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after the last parameter",
            buf.len() - r.pos
        )));
    }
    Network::from_params(config, store)
}

pub fn save(net: &Network<f32>, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Network<f32>> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&buf)
}
