//! Posterior draw persistence: a JSON manifest plus flat little-endian
//! 64-bit float arrays (row-major; dimensions live in the manifest).
//! Integer-valued records (allocations, counts, offsets) are stored as
//! exactly-representable f64, so a write/read cycle is bitwise lossless.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::var_core::PanelTransform;

pub const DRAWS_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DrawsError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest parse error: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("draws version mismatch: file has {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("array {name} shape mismatch: manifest says {expected} values, file holds {found}")]
    ShapeMismatch {
        name: String,
        expected: u64,
        found: u64,
    },
    #[error("manifest is missing array {0}")]
    MissingArray(String),
    #[error("draw set is empty")]
    Empty,
}

/// Scalar hyper-parameters plus the row-major inverse-Wishart scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRecord {
    pub loc_mean: f64,
    pub loc_var: f64,
    pub scale_shape: f64,
    pub scale_scale: f64,
    pub spike_shape: f64,
    pub spike_scale: f64,
    pub concentration: f64,
    pub sparsity_shape: f64,
    pub dependence: u32,
    pub dof: f64,
    pub scale_matrix: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawsMeta {
    pub version: u32,
    pub dim: usize,
    pub t_len: usize,
    pub variant: String,
    pub hyper: HyperRecord,
    pub seed: u64,
    pub iters: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub draw_iterations: Vec<u64>,
    pub series_names: Vec<String>,
    pub transform: Option<PanelTransform>,
    /// Element count of each binary array, for shape validation on read.
    pub array_lens: BTreeMap<String, u64>,
}

/// Thinned post-burn-in trace of every sampled object, stored
/// structure-of-arrays. `slices = t_len - 1` coefficient slices per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub meta: DrawsMeta,
    /// `[draw][slice][coef]`, flattened.
    pub beta: Vec<f64>,
    /// `[draw][row][col]`, flattened row-major.
    pub sigma: Vec<f64>,
    /// `[draw][slice]`.
    pub pi: Vec<f64>,
    /// `[draw][slice][coef]`: 1 = slab, 0 = spike.
    pub gamma: Vec<u8>,
    /// `[draw][slice][coef]`: 0 = spike, k >= 1 names atom k of that draw.
    pub d_alloc: Vec<u32>,
    /// Ragged per-draw atom tables, delimited by `atom_offsets`.
    pub atom_mu: Vec<f64>,
    pub atom_tau: Vec<f64>,
    /// `len = draws + 1`; atoms of draw d live in `offsets[d]..offsets[d+1]`.
    pub atom_offsets: Vec<u64>,
    /// Instantiated component count per draw.
    pub k_star: Vec<u32>,
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.meta.draw_iterations.len()
    }

    pub fn slices(&self) -> usize {
        self.meta.t_len - 1
    }

    pub fn n_coef(&self) -> usize {
        self.meta.dim * self.meta.dim
    }

    pub fn beta_at(&self, draw: usize) -> &[f64] {
        let stride = self.slices() * self.n_coef();
        &self.beta[draw * stride..(draw + 1) * stride]
    }

    pub fn gamma_at(&self, draw: usize) -> &[u8] {
        let stride = self.slices() * self.n_coef();
        &self.gamma[draw * stride..(draw + 1) * stride]
    }

    pub fn d_alloc_at(&self, draw: usize) -> &[u32] {
        let stride = self.slices() * self.n_coef();
        &self.d_alloc[draw * stride..(draw + 1) * stride]
    }

    pub fn sigma_at(&self, draw: usize) -> &[f64] {
        let stride = self.meta.dim * self.meta.dim;
        &self.sigma[draw * stride..(draw + 1) * stride]
    }

    pub fn atoms_at(&self, draw: usize) -> (&[f64], &[f64]) {
        let lo = self.atom_offsets[draw] as usize;
        let hi = self.atom_offsets[draw + 1] as usize;
        (&self.atom_mu[lo..hi], &self.atom_tau[lo..hi])
    }

    pub fn expected_lens(&self) -> BTreeMap<String, u64> {
        let mut lens = BTreeMap::new();
        lens.insert("beta".into(), self.beta.len() as u64);
        lens.insert("sigma".into(), self.sigma.len() as u64);
        lens.insert("pi".into(), self.pi.len() as u64);
        lens.insert("gamma".into(), self.gamma.len() as u64);
        lens.insert("d_alloc".into(), self.d_alloc.len() as u64);
        lens.insert("atom_mu".into(), self.atom_mu.len() as u64);
        lens.insert("atom_tau".into(), self.atom_tau.len() as u64);
        lens.insert("atom_offsets".into(), self.atom_offsets.len() as u64);
        lens.insert("k_star".into(), self.k_star.len() as u64);
        lens
    }
}

fn write_f64_array(path: &Path, values: impl Iterator<Item = f64>) -> Result<(), DrawsError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in values {
        file.write_all(&v.to_le_bytes())?;
    }
    file.flush()?;
    Ok(())
}

fn read_f64_array(path: &Path, name: &str, expected: u64) -> Result<Vec<f64>, DrawsError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() as u64 != expected * 8 {
        return Err(DrawsError::ShapeMismatch {
            name: name.to_string(),
            expected,
            found: bytes.len() as u64 / 8,
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Persist a draw set as `manifest.json` plus one `.bin` per array.
pub fn write_draws(draws: &PosteriorDraws, dir: impl AsRef<Path>) -> Result<(), DrawsError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut meta = draws.meta.clone();
    meta.array_lens = draws.expected_lens();
    let manifest = serde_json::to_string_pretty(&meta)?;
    std::fs::write(dir.join("manifest.json"), manifest)?;

    write_f64_array(&dir.join("beta.bin"), draws.beta.iter().cloned())?;
    write_f64_array(&dir.join("sigma.bin"), draws.sigma.iter().cloned())?;
    write_f64_array(&dir.join("pi.bin"), draws.pi.iter().cloned())?;
    write_f64_array(&dir.join("gamma.bin"), draws.gamma.iter().map(|g| *g as f64))?;
    write_f64_array(
        &dir.join("d_alloc.bin"),
        draws.d_alloc.iter().map(|d| *d as f64),
    )?;
    write_f64_array(&dir.join("atom_mu.bin"), draws.atom_mu.iter().cloned())?;
    write_f64_array(&dir.join("atom_tau.bin"), draws.atom_tau.iter().cloned())?;
    write_f64_array(
        &dir.join("atom_offsets.bin"),
        draws.atom_offsets.iter().map(|o| *o as f64),
    )?;
    write_f64_array(&dir.join("k_star.bin"), draws.k_star.iter().map(|k| *k as f64))?;
    Ok(())
}

/// Exact inverse of [`write_draws`].
pub fn read_draws(dir: impl AsRef<Path>) -> Result<PosteriorDraws, DrawsError> {
    let dir = dir.as_ref();
    let manifest = std::fs::read_to_string(dir.join("manifest.json"))?;
    let meta: DrawsMeta = serde_json::from_str(&manifest)?;
    if meta.version != DRAWS_VERSION {
        return Err(DrawsError::VersionMismatch {
            found: meta.version,
            expected: DRAWS_VERSION,
        });
    }
    let len_of = |name: &str| -> Result<u64, DrawsError> {
        meta.array_lens
            .get(name)
            .copied()
            .ok_or_else(|| DrawsError::MissingArray(name.to_string()))
    };
    let beta = read_f64_array(&dir.join("beta.bin"), "beta", len_of("beta")?)?;
    let sigma = read_f64_array(&dir.join("sigma.bin"), "sigma", len_of("sigma")?)?;
    let pi = read_f64_array(&dir.join("pi.bin"), "pi", len_of("pi")?)?;
    let gamma = read_f64_array(&dir.join("gamma.bin"), "gamma", len_of("gamma")?)?
        .into_iter()
        .map(|v| v as u8)
        .collect();
    let d_alloc = read_f64_array(&dir.join("d_alloc.bin"), "d_alloc", len_of("d_alloc")?)?
        .into_iter()
        .map(|v| v as u32)
        .collect();
    let atom_mu = read_f64_array(&dir.join("atom_mu.bin"), "atom_mu", len_of("atom_mu")?)?;
    let atom_tau = read_f64_array(&dir.join("atom_tau.bin"), "atom_tau", len_of("atom_tau")?)?;
    let atom_offsets =
        read_f64_array(&dir.join("atom_offsets.bin"), "atom_offsets", len_of("atom_offsets")?)?
            .into_iter()
            .map(|v| v as u64)
            .collect();
    let k_star = read_f64_array(&dir.join("k_star.bin"), "k_star", len_of("k_star")?)?
        .into_iter()
        .map(|v| v as u32)
        .collect();
    Ok(PosteriorDraws {
        meta,
        beta,
        sigma,
        pi,
        gamma,
        d_alloc,
        atom_mu,
        atom_tau,
        atom_offsets,
        k_star,
    })
}
