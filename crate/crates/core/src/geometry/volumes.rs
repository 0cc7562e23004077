use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::frame::JacobiFrame;
use super::sectors::{SectorKey, SectorTable};
use super::system::MassSystem;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 10_000;
const BATCH: usize = 1 << 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorFraction {
    pub label: String,
    pub word: String,
    pub count: u64,
    pub fraction: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeTable {
    pub samples: usize,
    pub seed: u64,
    pub sectors: Vec<SectorFraction>,
}

impl VolumeTable {
    pub fn get(&self, label: &str) -> Option<&SectorFraction> {
        self.sectors.iter().find(|s| s.label == label)
    }

    /// Fraction summed over all sectors sharing a species word.
    pub fn by_word(&self, word: &str) -> (f64, f64) {
        let count: u64 = self.sectors.iter().filter(|s| s.word == word).map(|s| s.count).sum();
        let f = count as f64 / self.samples as f64;
        (f, (f * (1.0 - f) / self.samples as f64).sqrt())
    }

    pub fn total(&self) -> f64 {
        self.sectors.iter().map(|s| s.fraction).sum()
    }
}

/// Solid-angle fraction of every ordering sector, from isotropic Gaussian directions.
///
/// Samples are split into fixed batches with independent streams, so the result depends
/// only on `seed` and `n_samples`, not on the thread count.
pub fn volume_fractions(sys: &MassSystem, n_samples: usize, seed: u64) -> Result<VolumeTable> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::Domain(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    let frame = JacobiFrame::new(sys)?;
    let table = SectorTable::new(sys)?;
    let n = frame.n();
    let d = n - 1;
    let inv = frame.inverse();
    let cols: Vec<Vec<f64>> = (0..n).map(|i| (0..d).map(|k| inv[(i, k)]).collect()).collect();
    let batches = n_samples.div_ceil(BATCH);
    let counts: BTreeMap<SectorKey, u64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let len = BATCH.min(n_samples - b * BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut local: BTreeMap<SectorKey, u64> = BTreeMap::new();
            let mut r = vec![0.0; d];
            let mut q = vec![0.0; n];
            for _ in 0..len {
                for x in r.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                for (qi, c) in q.iter_mut().zip(&cols) {
                    *qi = c.iter().zip(&r).map(|(a, b)| a * b).sum();
                }
                *local.entry(table.key_of(&q)).or_insert(0) += 1;
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let total = n_samples as f64;
    let mut sectors = counts
        .into_iter()
        .map(|(k, c)| {
            let s = table.describe(k)?;
            let f = c as f64 / total;
            Ok(SectorFraction {
                label: s.label(),
                word: s.word,
                count: c,
                fraction: f,
                stderr: (f * (1.0 - f) / total).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sectors.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(VolumeTable { samples: n_samples, seed, sectors })
}
