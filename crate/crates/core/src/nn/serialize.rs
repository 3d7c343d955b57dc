//! `VCNN` model files, little-endian throughout:
//!
//! ```text
//! magic        4 bytes  "VCNN"
//! version      u32      1
//! input shape  3 x u32  channels, height, width
//! num_classes  u32
//! layer count  u32
//! per layer    u8 kind, then kind-specific u32 fields
//!              0 conv2d  in_channels, out_channels, kernel
//!              1 maxpool2d
//!              2 relu
//!              3 flatten
//!              4 dense   in_features, out_features
//! parameters   f32 values of every parameter tensor in layer order
//!              (weights then bias), no padding
//! ```

use std::path::Path;

use super::model::{CnnModel, Layer, LayerSpec};
use super::tensor::Tensor;
use super::NnError;

pub const VCNN_MAGIC: &[u8; 4] = b"VCNN";
pub const VCNN_VERSION: u32 = 1;

pub fn encode_model(model: &CnnModel<f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 4 * model.param_count());
    out.extend_from_slice(VCNN_MAGIC);
    let put = |v: u32, out: &mut Vec<u8>| out.extend_from_slice(&v.to_le_bytes());
    put(VCNN_VERSION, &mut out);
    for d in model.input_shape {
        put(d as u32, &mut out);
    }
    put(model.num_classes as u32, &mut out);
    put(model.layers.len() as u32, &mut out);
    for layer in &model.layers {
        match layer.spec {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
            } => {
                out.push(0);
                put(in_channels as u32, &mut out);
                put(out_channels as u32, &mut out);
                put(kernel as u32, &mut out);
            }
            LayerSpec::MaxPool2d => out.push(1),
            LayerSpec::Relu => out.push(2),
            LayerSpec::Flatten => out.push(3),
            LayerSpec::Dense {
                in_features,
                out_features,
            } => {
                out.push(4);
                put(in_features as u32, &mut out);
                put(out_features as u32, &mut out);
            }
        }
    }
    for p in model.params() {
        for v in p.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], NnError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NnError::Corrupt(format!("truncated at byte {}", self.at)))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, NnError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<CnnModel<f32>, NnError> {
    let mut r = Reader { bytes, at: 0 };
    if bytes.len() >= 4 && &bytes[..4] != VCNN_MAGIC {
        return Err(NnError::Format("bad magic, not a VCNN model".into()));
    }
    r.take(4)?;
    let version = r.u32()?;
    if version != VCNN_VERSION as usize {
        return Err(NnError::Format(format!("unsupported model version {version}")));
    }
    let input_shape = [r.u32()?, r.u32()?, r.u32()?];
    let num_classes = r.u32()?;
    let n_layers = r.u32()?;
    let mut specs = Vec::with_capacity(n_layers.min(1024));
    for _ in 0..n_layers {
        let spec = match r.u8()? {
            0 => LayerSpec::Conv2d {
                in_channels: r.u32()?,
                out_channels: r.u32()?,
                kernel: r.u32()?,
            },
            1 => LayerSpec::MaxPool2d,
            2 => LayerSpec::Relu,
            3 => LayerSpec::Flatten,
            4 => LayerSpec::Dense {
                in_features: r.u32()?,
                out_features: r.u32()?,
            },
            k => return Err(NnError::Corrupt(format!("unknown layer kind {k}"))),
        };
        specs.push(spec);
    }
    // validates the stack without trusting sizes for allocation
    let out = specs
        .iter()
        .try_fold(input_shape.to_vec(), |s, l| l.output_shape(&s))
        .map_err(|e| NnError::Corrupt(e.to_string()))?;
    if out != [num_classes] {
        return Err(NnError::Corrupt(format!(
            "layers produce {out:?}, header says {num_classes} classes"
        )));
    }
    let total: usize = specs.iter().map(LayerSpec::param_count).sum();
    if bytes.len() - r.at != 4 * total {
        return Err(NnError::Corrupt(format!(
            "parameter payload is {} bytes, expected {}",
            bytes.len() - r.at,
            4 * total
        )));
    }
    let mut layers = Vec::with_capacity(specs.len());
    for spec in specs {
        let params = spec
            .param_shapes()
            .into_iter()
            .map(|shape| {
                let n: usize = shape.iter().product();
                let data = r
                    .take(4 * n)?
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                Tensor::new(shape, data)
            })
            .collect::<Result<Vec<_>, _>>()?;
        layers.push(Layer { spec, params });
    }
    Ok(CnnModel {
        input_shape,
        num_classes,
        layers,
    })
}

pub fn save_model(model: &CnnModel<f32>, path: impl AsRef<Path>) -> Result<(), NnError> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(model)).map_err(|source| NnError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CnnModel<f32>, NnError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| NnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_model(&bytes)
}
