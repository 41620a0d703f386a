//! Binary model files.
//!
//! Little-endian layout:
//!
//! ```text
//! "SNKM"            4 bytes magic
//! u16 version       (1)
//! u16 seq_len
//! u16 layer_count
//! layer table, layer_count entries of 10 bytes:
//!   u8  kind        0 = LSTM, 1 = dense
//!   u32 input_dim
//!   u32 units       (LSTM units or dense outputs)
//!   u8  attribute   LSTM: 1 if it returns sequences; dense: activation code
//! payload, f32 per parameter, layers in table order:
//!   LSTM:  kernel (4h×d), recurrent (4h×h), bias (4h)
//!   dense: weights (out×in), bias (out)
//! ```

use std::fs;
use std::path::Path;

use super::dense::{Activation, DenseLayer};
use super::lstm::LstmLayer;
use super::network::Network;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: [u8; 4] = *b"SNKM";
pub const MODEL_VERSION: u16 = 1;

const KIND_LSTM: u8 = 0;
const KIND_DENSE: u8 = 1;
const HEADER_LEN: usize = 10;
const LAYER_ENTRY_LEN: usize = 10;

fn dim_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Architecture(format!("dimension {v} does not fit u32")))
}

pub fn encode_model(net: &Network<f32>) -> Result<Vec<u8>> {
    let layer_count = net.lstm_layers().len() + net.dense_layers().len();
    let seq_len = u16::try_from(net.seq_len())
        .map_err(|_| Error::Architecture("sequence length does not fit u16".into()))?;
    let layer_count_u16 = u16::try_from(layer_count)
        .map_err(|_| Error::Architecture("too many layers".into()))?;
    let total = net.param_count().total;
    let mut out = Vec::with_capacity(HEADER_LEN + layer_count * LAYER_ENTRY_LEN + total * 4);
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&seq_len.to_le_bytes());
    out.extend_from_slice(&layer_count_u16.to_le_bytes());
    for l in net.lstm_layers() {
        out.push(KIND_LSTM);
        out.extend_from_slice(&dim_u32(l.input_dim())?.to_le_bytes());
        out.extend_from_slice(&dim_u32(l.units())?.to_le_bytes());
        out.push(l.return_sequences() as u8);
    }
    for d in net.dense_layers() {
        out.push(KIND_DENSE);
        out.extend_from_slice(&dim_u32(d.input_dim())?.to_le_bytes());
        out.extend_from_slice(&dim_u32(d.output_dim())?.to_le_bytes());
        out.push(d.activation().code());
    }
    for tensor in net.tensors() {
        for v in tensor {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::CorruptModel(format!(
                "file ends at byte {}, needed {n} more at offset {}",
                self.bytes.len(),
                self.pos
            ))),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| Error::CorruptModel("size overflow".into()))?)?;
        let values: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("model contains a non-finite parameter".into()));
        }
        Ok(values)
    }
}

enum LayerEntry {
    Lstm { input: usize, units: usize, seq: bool },
    Dense { input: usize, units: usize, act: Activation },
}

impl LayerEntry {
    fn param_count(&self) -> Option<usize> {
        match *self {
            LayerEntry::Lstm { input, units, .. } => 4usize
                .checked_mul(units)?
                .checked_mul(input.checked_add(units)?.checked_add(1)?),
            LayerEntry::Dense { input, units, .. } => units.checked_mul(input.checked_add(1)?),
        }
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Network<f32>> {
    if bytes.len() < 6 || bytes[..4] != MODEL_MAGIC {
        return Err(Error::Format("not a model file (bad magic)".into()));
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u16()?;
    if version != MODEL_VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let seq_len = r.u16()? as usize;
    let layer_count = r.u16()? as usize;
    let mut entries = Vec::with_capacity(layer_count);
    for i in 0..layer_count {
        let kind = r.u8()?;
        let input = r.u32()?;
        let units = r.u32()?;
        let attr = r.u8()?;
        entries.push(match kind {
            KIND_LSTM if attr <= 1 => LayerEntry::Lstm {
                input,
                units,
                seq: attr == 1,
            },
            KIND_DENSE => LayerEntry::Dense {
                input,
                units,
                act: Activation::from_code(attr).ok_or_else(|| {
                    Error::CorruptModel(format!("layer {i}: unknown activation code {attr}"))
                })?,
            },
            _ => {
                return Err(Error::CorruptModel(format!(
                    "layer {i}: unknown layer kind {kind} / attribute {attr}"
                )))
            }
        });
    }

    let declared = entries
        .iter()
        .try_fold(0usize, |acc, e| acc.checked_add(e.param_count()?))
        .ok_or_else(|| Error::CorruptModel("declared parameter count overflows".into()))?;
    let remaining = bytes.len() - r.pos;
    if declared.checked_mul(4) != Some(remaining) {
        return Err(Error::CorruptModel(format!(
            "layer table declares {declared} parameters ({} bytes), payload has {remaining} bytes",
            declared.saturating_mul(4)
        )));
    }

    let mut lstm = Vec::new();
    let mut dense = Vec::new();
    for (i, entry) in entries.into_iter().enumerate() {
        match entry {
            LayerEntry::Lstm { input, units, seq } => {
                if !dense.is_empty() {
                    return Err(Error::CorruptModel(format!(
                        "layer {i}: LSTM layer after a dense layer"
                    )));
                }
                let kernel = r.f32s(4 * units * input)?;
                let recurrent = r.f32s(4 * units * units)?;
                let bias = r.f32s(4 * units)?;
                lstm.push(LstmLayer::from_parts(input, units, seq, kernel, recurrent, bias)?);
            }
            LayerEntry::Dense { input, units, act } => {
                let weights = r.f32s(units * input)?;
                let bias = r.f32s(units)?;
                dense.push(DenseLayer::from_parts(input, units, act, weights, bias)?);
            }
        }
    }
    Network::from_layers(seq_len, lstm, dense).map_err(|e| Error::CorruptModel(e.to_string()))
}

pub fn save_model(net: &Network<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_model(net).map_err(|e| Error::at(path, e))?;
    fs::write(path, bytes).map_err(|e| Error::at(path, e.into()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Network<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::at(path, e.into()))?;
    decode_model(&bytes).map_err(|e| Error::at(path, e))
}
