//! Attention masks over a `[vision ; SEP ; language]` token sequence.
//!
//! `bits[i][j] == true` means query `i` may attend to key `j`. The prefix
//! length `v_n` counts the visual tokens plus the `[SEP]` token, so with
//! `m` patches the `[SEP]` token sits at index `m` and `v_n = m + 1`.

use alloc::vec::Vec;

use super::ModelError;

/// Which mask a model is trained and decoded with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskKind {
    /// Bidirectional over the prefix, causal over the language tail.
    Unified,
    /// Plain lower-triangular mask over the whole sequence.
    Causal,
}

impl MaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            MaskKind::Unified => "uvlm",
            MaskKind::Causal => "causal",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "uvlm" | "unified" => Some(MaskKind::Unified),
            "causal" => Some(MaskKind::Causal),
            _ => None,
        }
    }

    pub fn build(&self, v_n: usize, total: usize) -> Result<AttentionMask, ModelError> {
        match self {
            MaskKind::Unified => unified_mask(v_n, total),
            MaskKind::Causal => {
                let mut m = causal_mask(total)?;
                m.v_n = v_n;
                Ok(m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionMask {
    n: usize,
    bits: Vec<bool>,
    /// Prefix length, `[SEP]` included.
    pub v_n: usize,
}

impl AttentionMask {
    pub fn from_fn(n: usize, v_n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, bits, v_n }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    /// Rows as 0/1 integers.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| self.row(i).iter().map(|&b| u8::from(b)).collect()).collect()
    }

    /// Top-left `k × k` block.
    pub fn truncate(&self, k: usize) -> Self {
        Self::from_fn(k, self.v_n.min(k), |i, j| self.allowed(i, j))
    }
}

/// All-ones mask.
pub fn visual_mask(n: usize) -> Result<AttentionMask, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidPrefix { v_n: 0, total: 0 });
    }
    Ok(AttentionMask::from_fn(n, n, |_, _| true))
}

/// Lower-triangular mask, diagonal included.
pub fn causal_mask(n: usize) -> Result<AttentionMask, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidPrefix { v_n: 0, total: 0 });
    }
    Ok(AttentionMask::from_fn(n, 0, |i, j| j <= i))
}

/// Prefix-LM mask: prefix queries see exactly the prefix; language queries
/// see the prefix and language keys up to themselves.
pub fn unified_mask(v_n: usize, total: usize) -> Result<AttentionMask, ModelError> {
    if v_n == 0 || v_n > total {
        return Err(ModelError::InvalidPrefix { v_n, total });
    }
    Ok(AttentionMask::from_fn(total, v_n, |i, j| j < v_n || (i >= v_n && j <= i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn small_cases() {
        assert_eq!(visual_mask(1).unwrap().to_rows(), vec![vec![1]]);
        assert!(visual_mask(3).unwrap().to_rows().iter().flatten().all(|&b| b == 1));
        assert_eq!(
            causal_mask(3).unwrap().to_rows(),
            vec![vec![1, 0, 0], vec![1, 1, 0], vec![1, 1, 1]]
        );
        let sums: Vec<usize> = causal_mask(5)
            .unwrap()
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|&b| b as usize).sum())
            .collect();
        assert_eq!(sums, vec![1, 2, 3, 4, 5]);
        assert_eq!(
            unified_mask(2, 4).unwrap().to_rows(),
            vec![vec![1, 1, 0, 0], vec![1, 1, 0, 0], vec![1, 1, 1, 0], vec![1, 1, 1, 1]]
        );
    }

    #[test]
    fn prefix_bounds() {
        assert!(unified_mask(0, 3).is_err());
        assert!(unified_mask(4, 3).is_err());
        assert_eq!(unified_mask(5, 5).unwrap().to_rows(), visual_mask(5).unwrap().to_rows());
        assert_eq!(unified_mask(1, 6).unwrap().to_rows(), causal_mask(6).unwrap().to_rows());
    }

    #[test]
    fn names_round_trip() {
        for k in [MaskKind::Unified, MaskKind::Causal] {
            assert_eq!(MaskKind::from_name(k.name()), Some(k));
        }
        assert_eq!(MaskKind::from_name("bogus"), None);
    }
}
