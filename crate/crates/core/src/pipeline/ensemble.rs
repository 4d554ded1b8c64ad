use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gbdt::HyperConfig;

/// Seed ensemble: members use seeds `base_seed + 0 .. base_seed + n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub n_members: usize,
    pub base_seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            n_members: 10,
            base_seed: 0,
        }
    }
}

impl EnsembleSpec {
    pub fn new(n_members: usize, base_seed: u64) -> Result<Self> {
        if n_members == 0 {
            return Err(Error::argument("an ensemble needs at least one member"));
        }
        Ok(Self { n_members, base_seed })
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        let base = self.base_seed;
        (0..self.n_members as u64).map(move |i| base.wrapping_add(i))
    }
}

/// Mean of member outputs, summed in member order so the result does not
/// depend on scheduling.
pub fn average(members: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = members.first().ok_or_else(|| Error::argument("no ensemble members"))?;
    let mut sum = vec![0.0; first.len()];
    for m in members {
        if m.len() != sum.len() {
            return Err(Error::argument("ensemble members predict different lengths"));
        }
        for (s, v) in sum.iter_mut().zip(m) {
            *s += v;
        }
    }
    let n = members.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// Runs `member` once per seed of `spec` (in parallel) and averages the
/// returned prediction vectors.
///
/// `member` receives `config` with its seed replaced and should train a
/// model and predict with it.
pub fn ensemble_predict<F>(spec: &EnsembleSpec, config: &HyperConfig, member: F) -> Result<Vec<f64>>
where
    F: Fn(&HyperConfig) -> Result<Vec<f64>> + Sync,
{
    if spec.n_members == 0 {
        return Err(Error::argument("an ensemble needs at least one member"));
    }
    let seeds: Vec<u64> = spec.seeds().collect();
    let members = seeds
        .par_iter()
        .map(|&s| member(&config.with_seed(s)))
        .collect::<Result<Vec<_>>>()?;
    average(&members)
}
