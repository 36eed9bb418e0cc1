// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::metagrammar::{MatrixInstance, MatrixStructure};

use super::fitness::{FitnessReport, Score};
use super::GaError;

/// Indices of the `n` highest scores, best first; equal scores keep input order.
pub fn best_n_indices(scores: &[Score], n: usize) -> Result<Vec<usize>, GaError> {
    if n > scores.len() {
        return Err(GaError::Selection { n, len: scores.len() });
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].cmp(&scores[a]));
    idx.truncate(n);
    Ok(idx)
}

/// The `n` fittest instances of `pop`, best first.
pub fn best_n(pop: &[MatrixInstance], reports: &[FitnessReport], n: usize) -> Result<Vec<MatrixInstance>, GaError> {
    if pop.len() != reports.len() {
        return Err(GaError::Shape);
    }
    let scores: Vec<Score> = reports.iter().map(|r| r.score).collect();
    Ok(best_n_indices(&scores, n)?.into_iter().map(|i| pop[i].clone()).collect())
}

/// Per-cell parent choice: `false` takes the first parent's gene, `true` the second's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossoverMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl CrossoverMask {
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let m = MatrixInstance::from_rows(rows);
        CrossoverMask { rows: m.rows(), cols: m.cols(), bits: m.bits().to_vec() }
    }

    pub fn constant(s: &MatrixStructure, second: bool) -> Self {
        CrossoverMask { rows: s.n_rows(), cols: s.n_cols(), bits: vec![second; s.n_rows() * s.n_cols()] }
    }

    /// A fair coin per valid cell; invalid cells are `false`.
    pub fn random<R: Rng + ?Sized>(s: &MatrixStructure, rng: &mut R) -> Self {
        let bits = s.valid_mask().iter().map(|&v| v && rng.random_bool(0.5)).collect();
        CrossoverMask { rows: s.n_rows(), cols: s.n_cols(), bits }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }
}

/// Scattered crossover: each valid cell comes from the parent the mask selects.
pub fn crossover(
    s: &MatrixStructure,
    p1: &MatrixInstance,
    p2: &MatrixInstance,
    mask: &CrossoverMask,
) -> Result<MatrixInstance, GaError> {
    if !p1.same_shape(s) || !p2.same_shape(s) || mask.rows != s.n_rows() || mask.cols != s.n_cols() {
        return Err(GaError::Shape);
    }
    let bits = s
        .valid_mask()
        .iter()
        .enumerate()
        .map(|(i, &valid)| valid && if mask.bits[i] { p2.bits()[i] } else { p1.bits()[i] })
        .collect();
    Ok(MatrixInstance::from_bits(s.n_rows(), s.n_cols(), bits))
}

/// Children from parent pairs (0,1), (0,2), ..., (1,2), ... in rank order,
/// cycling through the pairs again if needed, one fresh mask per child.
pub fn crossover_population<R: Rng + ?Sized>(
    s: &MatrixStructure,
    parents: &[MatrixInstance],
    limit: usize,
    rng: &mut R,
) -> Result<Vec<MatrixInstance>, GaError> {
    if limit == 0 {
        return Ok(Vec::new());
    }
    if parents.len() < 2 {
        return Err(GaError::TooFewParents(parents.len()));
    }
    let n = parents.len();
    let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    pairs
        .cycle()
        .take(limit)
        .map(|(i, j)| crossover(s, &parents[i], &parents[j], &CrossoverMask::random(s, rng)))
        .collect()
}

/// Flip each valid cell independently with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(s: &MatrixStructure, m: &MatrixInstance, rate: f64, rng: &mut R) -> MatrixInstance {
    assert!((0.0..=1.0).contains(&rate), "mutation rate {rate} outside [0, 1]");
    let bits = m
        .bits()
        .iter()
        .zip(s.valid_mask())
        .map(|(&b, &valid)| if valid && rng.random_bool(rate) { !b } else { b })
        .collect();
    MatrixInstance::from_bits(m.rows(), m.cols(), bits)
}

/// Flip one chosen valid cell.
pub fn mutate_at(s: &MatrixStructure, m: &MatrixInstance, row: usize, col: usize) -> Result<MatrixInstance, GaError> {
    if !m.same_shape(s) {
        return Err(GaError::Shape);
    }
    if row >= s.n_rows() || col >= s.n_cols() || !s.is_valid(row, col) {
        return Err(GaError::InvalidCell { row, col });
    }
    let mut out = m.clone();
    out.set(row, col, !m.get(row, col));
    Ok(out)
}
