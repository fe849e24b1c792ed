//! Closed-form coincidence probabilities, computed event by event.
//!
//! This path never builds the two-boson state matrix. For columns `u`, `v`
//! with `N = 1 + |<u|v>|^2`:
//!
//! ```text
//! P(j,j) = 2 |u_j v_j|^2 / N
//! P{j,k} = |u_j v_k + u_k v_j|^2 / N        (j < k)
//! ```
//!
//! The raw weights before division sum to exactly `N`, which is what makes
//! the symmetrized state normalizable for any pair of unit columns.

use num_complex::Complex64;

use crate::{Error, Result, INPUT_NORM_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub dim: usize,
    pub bunched: Vec<f64>,
    /// `((j, k), p)` for `j < k` in lexicographic order.
    pub pairs: Vec<((usize, usize), f64)>,
}

impl OracleResult {
    pub fn probability(&self, j: usize, k: usize) -> f64 {
        if j == k {
            return self.bunched[j];
        }
        let (j, k) = (j.min(k), j.max(k));
        self.pairs
            .iter()
            .find(|(key, _)| *key == (j, k))
            .map(|(_, p)| *p)
            .expect("detector index out of range")
    }

    pub fn total(&self) -> f64 {
        self.bunched.iter().sum::<f64>() + self.pairs.iter().map(|(_, p)| p).sum::<f64>()
    }

    /// Bunched events, then pairs; same order as
    /// [`CoincidenceDistribution::events`](crate::amplitudes::CoincidenceDistribution::events).
    pub fn events(&self) -> impl Iterator<Item = f64> + '_ {
        self.bunched
            .iter()
            .copied()
            .chain(self.pairs.iter().map(|(_, p)| *p))
    }
}

fn check_columns(u: &[Complex64], v: &[Complex64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.len() < 2 {
        return Err(Error::TooFewChannels(u.len()));
    }
    for col in [u, v] {
        let norm_sq: f64 = col.iter().map(|x| x.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
    }
    Ok(())
}

/// `|<u|v>|^2`.
pub fn overlap_sq(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Sum of the unnormalized event weights `2|u_j v_j|^2` and
/// `|u_j v_k + u_k v_j|^2`; analytically `1 + |<u|v>|^2` for unit columns.
pub fn event_weight_sum(u: &[Complex64], v: &[Complex64]) -> f64 {
    let n = u.len().min(v.len());
    let mut sum = 0.0;
    for j in 0..n {
        sum += 2.0 * (u[j] * v[j]).norm_sqr();
        for k in j + 1..n {
            sum += (u[j] * v[k] + u[k] * v[j]).norm_sqr();
        }
    }
    sum
}

pub fn oracle_coincidences(col_a: &[Complex64], col_b: &[Complex64]) -> Result<OracleResult> {
    check_columns(col_a, col_b)?;
    let (u, v) = (col_a, col_b);
    let n = u.len();
    let norm = 1.0 + overlap_sq(u, v);

    let bunched = (0..n)
        .map(|j| 2.0 * (u[j] * v[j]).norm_sqr() / norm)
        .collect();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for k in j + 1..n {
            pairs.push(((j, k), (u[j] * v[k] + u[k] * v[j]).norm_sqr() / norm));
        }
    }
    Ok(OracleResult {
        dim: n,
        bunched,
        pairs,
    })
}
