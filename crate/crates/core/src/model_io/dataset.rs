//! TrainingSet directories: `meta.json`, `symbols.f64`, `signals.f64`.
//!
//! Both binary files are flat little-endian f64 arrays, examples stored back
//! to back. Example `i` with `n_i` symbol vectors contributes a `[2N, n_i]`
//! channel-major block to `symbols.f64` (rows: Re of dimension 0..N, then Im
//! of dimension 0..N) and a `[2, (n_i − 1)L + K]` block to `signals.f64`
//! (row 0 = I, row 1 = Q).

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iq::{split_re_im, IqBuffer, SymbolFrame};
use crate::learning::TrainingSet;

pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub symbol_dimension: usize,
    pub samples_per_symbol: usize,
    pub kernel_len: usize,
    pub num_examples: usize,
    pub symbols_per_example: Vec<usize>,
}

fn to_bytes(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(|v| v.to_le_bytes()).collect()
}

pub fn write_training_set(dir: &Path, data: &TrainingSet) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let meta = DatasetMeta {
        format_version: DATASET_VERSION,
        symbol_dimension: data.symbol_dimension(),
        samples_per_symbol: data.samples_per_symbol(),
        kernel_len: data.kernel_len(),
        num_examples: data.len(),
        symbols_per_example: data.examples().iter().map(|(f, _)| f.num_vectors()).collect(),
    };
    let mut symbols = Vec::new();
    let mut signals = Vec::new();
    for (frame, signal) in data.examples() {
        symbols.extend(to_bytes(split_re_im(frame).as_slice().iter().copied()));
        let s = signal.samples();
        signals.extend(to_bytes(s.iter().map(|z| z.re).chain(s.iter().map(|z| z.im))));
    }
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    std::fs::write(dir.join("symbols.f64"), symbols)?;
    std::fs::write(dir.join("signals.f64"), signals)?;
    Ok(())
}

fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() != 8 * expected {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("{} bytes, metadata implies {}", bytes.len(), 8 * expected),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

pub fn read_training_set(dir: &Path) -> Result<TrainingSet> {
    let meta_path = dir.join("meta.json");
    let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?).map_err(|e| {
        Error::CorruptFile {
            path: meta_path.clone(),
            reason: e.to_string(),
        }
    })?;
    let corrupt = |reason: String| Error::CorruptFile {
        path: meta_path.clone(),
        reason,
    };
    if meta.format_version != DATASET_VERSION {
        return Err(corrupt(format!("unsupported format_version {}", meta.format_version)));
    }
    if meta.symbols_per_example.len() != meta.num_examples {
        return Err(corrupt("symbols_per_example length differs from num_examples".into()));
    }
    let (n, l, k) = (meta.symbol_dimension, meta.samples_per_symbol, meta.kernel_len);
    if meta.symbols_per_example.contains(&0) || n == 0 || l == 0 || k == 0 {
        return Err(corrupt("dimensions and symbol counts must be positive".into()));
    }
    let sig_len = |m: usize| (m - 1) * l + k;
    let sym_total: usize = meta.symbols_per_example.iter().map(|m| 2 * n * m).sum();
    let sig_total: usize = meta.symbols_per_example.iter().map(|&m| 2 * sig_len(m)).sum();
    let symbols = read_f64s(&dir.join("symbols.f64"), sym_total)?;
    let signals = read_f64s(&dir.join("signals.f64"), sig_total)?;

    let mut examples = Vec::with_capacity(meta.num_examples);
    let (mut so, mut go) = (0, 0);
    for &m in &meta.symbols_per_example {
        let block = &symbols[so..so + 2 * n * m];
        let mut flat = Vec::with_capacity(n * m);
        for t in 0..m {
            for j in 0..n {
                flat.push(Complex64::new(block[j * m + t], block[(n + j) * m + t]));
            }
        }
        so += 2 * n * m;
        let len = sig_len(m);
        let (re, im) = signals[go..go + 2 * len].split_at(len);
        go += 2 * len;
        let samples = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        examples.push((SymbolFrame::from_flat(n, flat)?, IqBuffer::from_samples(samples)?));
    }
    TrainingSet::new(examples, n, l, k)
}
