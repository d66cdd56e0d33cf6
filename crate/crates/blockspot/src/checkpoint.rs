//! Single-file model container.
//!
//! Layout: 8-byte magic `BSPTCKPT`, manifest length as u64 LE, JSON
//! manifest, then every tensor as little-endian f64 in manifest order.

use std::fs;
use std::path::Path;

use blockspot_core::uvlm::{Hyper, MaskKind, ModelParams};
use blockspot_core::Vocab;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BSPTCKPT";
pub const FORMAT: &str = "blockspot-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperJson {
    pub layers: usize,
    pub heads: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub max_len: usize,
    pub vocab_size: usize,
    pub patch_dim: usize,
    pub mask: String,
    pub pad: usize,
    pub sep: usize,
    pub eos: usize,
}

impl From<&Hyper> for HyperJson {
    fn from(h: &Hyper) -> Self {
        Self {
            layers: h.layers,
            heads: h.heads,
            d_model: h.d_model,
            d_ff: h.d_ff,
            max_len: h.max_len,
            vocab_size: h.vocab_size,
            patch_dim: h.patch_dim,
            mask: h.mask.name().to_string(),
            pad: h.pad,
            sep: h.sep,
            eos: h.eos,
        }
    }
}

impl HyperJson {
    fn to_hyper(&self) -> std::result::Result<Hyper, String> {
        let mask = MaskKind::from_name(&self.mask).ok_or_else(|| format!("unknown mask {:?}", self.mask))?;
        let h = Hyper {
            layers: self.layers,
            heads: self.heads,
            d_model: self.d_model,
            d_ff: self.d_ff,
            max_len: self.max_len,
            vocab_size: self.vocab_size,
            patch_dim: self.patch_dim,
            mask,
            pad: self.pad,
            sep: self.sep,
            eos: self.eos,
        };
        h.validate().map_err(|e| e.to_string())?;
        Ok(h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    /// Byte offset into the payload.
    pub offset: u64,
    /// Byte length.
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub hyper: HyperJson,
    pub vocab: Vec<String>,
    /// Input canvas `[height, width]` the model was trained on.
    pub input: [usize; 2],
    /// Patch size `[height, width]`.
    pub patch: [usize; 2],
    pub tensors: Vec<TensorEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub vocab: Vocab,
    pub input: [usize; 2],
    pub patch: [usize; 2],
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut tensors = Vec::new();
        let mut payload = Vec::new();
        for t in self.params.tensors() {
            let offset = payload.len() as u64;
            for v in t.data {
                payload.extend_from_slice(&v.to_le_bytes());
            }
            tensors.push(TensorEntry {
                name: t.name,
                shape: t.shape,
                dtype: "f64".into(),
                offset,
                length: payload.len() as u64 - offset,
            });
        }
        let manifest = Manifest {
            format: FORMAT.into(),
            version: VERSION,
            hyper: HyperJson::from(&self.params.hyper),
            vocab: self.vocab.symbols().to_vec(),
            input: self.input,
            patch: self.patch,
            tensors,
        };
        let json = serde_json::to_vec(&manifest).expect("manifest serializes");
        let mut out = Vec::with_capacity(16 + json.len() + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&payload);
        out
    }

    /// Parses and validates a container: every tensor the hyperparameters
    /// imply must be present exactly once with the right shape, the
    /// payload must be fully covered, and all values finite.
    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err("not a blockspot checkpoint".into());
        }
        let mlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let mend = 16usize
            .checked_add(usize::try_from(mlen).map_err(|_| "manifest too large")?)
            .filter(|&e| e <= bytes.len())
            .ok_or("truncated manifest")?;
        let manifest: Manifest = serde_json::from_slice(&bytes[16..mend]).map_err(|e| format!("manifest: {e}"))?;
        if manifest.format != FORMAT || manifest.version != VERSION {
            return Err(format!("unsupported format {} v{}", manifest.format, manifest.version));
        }
        let hyper = manifest.hyper.to_hyper()?;
        let vocab = Vocab::from_symbols(manifest.vocab.clone()).map_err(|e| e.to_string())?;
        if vocab.len() != hyper.vocab_size || vocab.pad() != hyper.pad || vocab.sep() != hyper.sep || vocab.eos() != hyper.eos {
            return Err("vocabulary does not match hyperparameters".into());
        }
        let [ih, iw] = manifest.input;
        let [ph, pw] = manifest.patch;
        if ph == 0 || pw == 0 || ih == 0 || iw == 0 || ih % ph != 0 || iw % pw != 0 {
            return Err("input size is not a positive multiple of the patch size".into());
        }
        let channels = hyper.patch_dim / (ph * pw);
        if channels * ph * pw != hyper.patch_dim || !(channels == 1 || channels == 3) {
            return Err("patch_dim does not match patch size".into());
        }
        if (ih / ph) * (iw / pw) + 1 >= hyper.max_len {
            return Err("input leaves no room for language tokens".into());
        }

        let payload = &bytes[mend..];
        let mut params = ModelParams::init(hyper, 0).map_err(|e| e.to_string())?;
        let expected: Vec<(String, Vec<usize>)> = params.tensors().into_iter().map(|t| (t.name, t.shape)).collect();
        if manifest.tensors.len() != expected.len() {
            return Err(format!("expected {} tensors, found {}", expected.len(), manifest.tensors.len()));
        }
        let mut covered = 0u64;
        let mut slots = params.tensors_mut();
        for ((entry, (name, shape)), (_, slot)) in manifest.tensors.iter().zip(&expected).zip(slots.iter_mut()) {
            if &entry.name != name || &entry.shape != shape {
                return Err(format!("tensor {:?} {:?}, expected {name:?} {shape:?}", entry.name, entry.shape));
            }
            if entry.dtype != "f64" {
                return Err(format!("tensor {name}: unsupported dtype {}", entry.dtype));
            }
            let want = slot.len() as u64 * 8;
            if entry.length != want || entry.offset != covered {
                return Err(format!("tensor {name}: bad offset or length"));
            }
            let start = entry.offset as usize;
            let raw = payload.get(start..start + want as usize).ok_or_else(|| format!("tensor {name}: truncated payload"))?;
            for (dst, chunk) in slot.iter_mut().zip(raw.chunks_exact(8)) {
                *dst = f64::from_le_bytes(chunk.try_into().unwrap());
            }
            covered += want;
        }
        drop(slots);
        if covered != payload.len() as u64 {
            return Err("trailing bytes after payload".into());
        }
        if !params.is_finite() {
            return Err("non-finite parameter values".into());
        }
        Ok(Self {
            params,
            vocab,
            input: manifest.input,
            patch: manifest.patch,
        })
    }
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    fs::write(path, ck.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes).map_err(|message| Error::Checkpoint {
        path: path.to_path_buf(),
        message,
    })
}
