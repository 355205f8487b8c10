//! Versioned binary snapshot of a [`Network`].
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "PGNN" | version: u16 | layers: u32
//! per layer: activation: u8 | out: u32 | in: u32
//! then per layer: weights (out*in f64, row-major) | bias (out f64)
//! ```

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::nn::{Activation, Layer, Network};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"PGNN";
pub const VERSION: u16 = 1;

pub fn encode(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    encode_into(net, &mut out);
    out
}

pub fn encode_into(net: &Network, out: &mut Vec<u8>) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers.len() as u32).to_le_bytes());
    for l in &net.layers {
        out.push(l.activation.code());
        out.extend_from_slice(&(l.output_dim() as u32).to_le_bytes());
        out.extend_from_slice(&(l.input_dim() as u32).to_le_bytes());
    }
    for l in &net.layers {
        for v in l.weight.data().iter().chain(l.bias.data()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

/// Byte cursor used by the snapshot decoders.
pub struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "truncated: need {} bytes at offset {}, have {}",
                n,
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Network> {
    let mut r = Reader::new(bytes);
    let net = decode_from(&mut r)?;
    if r.position() != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after network",
            bytes.len() - r.position()
        )));
    }
    Ok(net)
}

pub fn decode_from(r: &mut Reader<'_>) -> Result<Network> {
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic, expected PGNN".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = r.u32()? as usize;
    let mut headers = Vec::with_capacity(n);
    for _ in 0..n {
        let code = r.u8()?;
        let act = Activation::from_code(code)
            .ok_or_else(|| Error::Format(format!("unknown activation code {code}")))?;
        let out = r.u32()? as usize;
        let inp = r.u32()? as usize;
        headers.push((act, out, inp));
    }
    let mut layers = Vec::with_capacity(n);
    for (act, out, inp) in headers {
        let w = (0..out * inp).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let b = (0..out).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        layers.push(Layer {
            weight: Tensor::new(alloc::vec![out, inp], w)?,
            bias: Tensor::new(alloc::vec![out], b)?,
            activation: act,
        });
    }
    Network::from_layers(layers)
}
