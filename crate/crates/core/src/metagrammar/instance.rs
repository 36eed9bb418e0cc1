// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use rand::Rng;

use super::structure::MatrixStructure;

/// A 0/1 assignment of the cells of a [`MatrixStructure`]. Cells that are
/// not valid for the structure are always 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixInstance {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl MatrixInstance {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixInstance { rows, cols, bits: vec![false; rows * cols] }
    }

    /// From row-major bits. Panics if the length does not match.
    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), rows * cols, "bit vector does not match a {rows}x{cols} matrix");
        MatrixInstance { rows, cols, bits }
    }

    /// From rows of 0/1 integers, e.g. `&[&[1, 0], &[0, 1]]`.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let bits = rows.iter().flat_map(|r| r.iter().map(|&b| b != 0)).collect();
        MatrixInstance { rows: rows.len(), cols, bits }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        self.bits[row * self.cols + col] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn same_shape(&self, s: &MatrixStructure) -> bool {
        self.rows == s.n_rows() && self.cols == s.n_cols()
    }

    /// Every 1 sits on a valid cell of `s`.
    pub fn respects(&self, s: &MatrixStructure) -> bool {
        self.same_shape(s) && self.bits.iter().zip(s.valid_mask()).all(|(&b, &v)| !b || v)
    }

    /// Cell-wise implication `self ⊆ other`.
    pub fn is_subset_of(&self, other: &MatrixInstance) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Stable 64-bit fingerprint (FNV-1a over the bits).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                h ^= i as u64 + 1;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h ^ (self.rows as u64) << 32 ^ self.cols as u64
    }

    /// Render with `x` on invalid cells, rows separated by newlines.
    pub fn render(&self, s: &MatrixStructure) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let line: Vec<&str> = (0..self.cols)
                .map(|c| {
                    if !s.is_valid(r, c) {
                        "x"
                    } else if self.get(r, c) {
                        "1"
                    } else {
                        "0"
                    }
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for MatrixInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                f.write_str("; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

/// Every valid cell set to 1: the default grammar.
pub fn full_instance(s: &MatrixStructure) -> MatrixInstance {
    MatrixInstance::from_bits(s.n_rows(), s.n_cols(), s.valid_mask().to_vec())
}

/// Each valid cell independently 1 with probability `density`.
pub fn random_instance_with_density<R: Rng + ?Sized>(s: &MatrixStructure, density: f64, rng: &mut R) -> MatrixInstance {
    let mut m = MatrixInstance::zeros(s.n_rows(), s.n_cols());
    for cell in s.valid_cells() {
        m.bits[cell] = rng.random_bool(density);
    }
    m
}

/// Each valid cell independently 1 with probability 0.5.
pub fn random_instance<R: Rng + ?Sized>(s: &MatrixStructure, rng: &mut R) -> MatrixInstance {
    random_instance_with_density(s, 0.5, rng)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::metagrammar::structure::{MatrixSort, RuleKind, WiringPolicy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Two sorts with two non-terminals and two rules each.
    pub(crate) fn block_structure() -> MatrixStructure {
        MatrixStructure::new(
            vec![(MatrixSort::Int, 1), (MatrixSort::Int, 2), (MatrixSort::Bool, 1), (MatrixSort::Bool, 2)],
            vec![
                (MatrixSort::Int, RuleKind::Argument { index: 0 }),
                (MatrixSort::Int, RuleKind::Zero),
                (MatrixSort::Bool, RuleKind::Zero),
                (MatrixSort::Bool, RuleKind::One),
            ],
            WiringPolicy::SameIndex,
        )
        .unwrap()
    }

    #[test]
    fn block_mask_matches_the_two_sort_display() {
        let s = block_structure();
        let full = full_instance(&s);
        assert_eq!(full.render(&s), "1 1 x x\n1 1 x x\nx x 1 1\nx x 1 1\n");
        assert_eq!(full.count_ones(), 8);
        assert_eq!(full.count_ones(), s.valid_count());
    }

    #[test]
    fn random_instances_are_seeded() {
        let s = block_structure();
        let a = random_instance(&s, &mut ChaCha8Rng::seed_from_u64(42));
        let b = random_instance(&s, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn random_instances_respect_the_mask() {
        let s = block_structure();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            assert!(random_instance(&s, &mut rng).respects(&s));
        }
    }

    #[test]
    fn random_density_is_one_half() {
        let s = block_structure();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ones = (0..10_000).filter(|_| random_instance(&s, &mut rng).get(0, 0)).count();
        let freq = ones as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&freq), "{freq}");
    }
}
