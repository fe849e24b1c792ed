//! Two-boson state algebra.
//!
//! A splitter sends a particle from source A into the output column `u` and
//! one from source B into `v`. The symmetrized two-particle state over
//! ordered detector labels is
//!
//! ```text
//! A[j][k] = (u_j v_k + u_k v_j) / sqrt(2 (1 + |<u|v>|^2))
//! ```
//!
//! which reduces to the usual `1/sqrt(2)` prefactor for orthogonal columns
//! and stays normalized when the columns overlap.

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result, INPUT_NORM_TOL};

/// Output amplitudes of one particle over `n` detector channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector {
    amplitudes: Vec<Complex64>,
}

impl ModeVector {
    /// Wraps already-normalized amplitudes.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::TooFewChannels(amplitudes.len()));
        }
        let norm_sq = norm_sq(&amplitudes);
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::TooFewChannels(amplitudes.len()));
        }
        let norm_sq = norm_sq(&amplitudes);
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = norm_sq.sqrt().recip();
        for a in &mut amplitudes {
            *a *= scale;
        }
        Ok(Self { amplitudes })
    }

    /// Basis vector: the particle certainly ends up in `channel`.
    pub fn basis(dim: usize, channel: usize) -> Result<Self> {
        if channel >= dim {
            return Err(Error::IndexOutOfRange {
                index: channel,
                dim,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[channel] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.amplitudes)
    }

    /// Inner product `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &ModeVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies every amplitude by the unit phase `e^{i alpha}`.
    pub fn with_global_phase(&self, alpha: f64) -> Self {
        let phase = Complex64::from_polar(1.0, alpha);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }
}

fn norm_sq(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Symmetrized two-boson amplitude over ordered detector pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBosonState {
    pair_amplitudes: Array2<Complex64>,
    column_overlap: f64,
}

impl TwoBosonState {
    pub fn dim(&self) -> usize {
        self.pair_amplitudes.nrows()
    }

    /// The full `n x n` matrix; row = detector of particle 1.
    pub fn pair_amplitudes(&self) -> &Array2<Complex64> {
        &self.pair_amplitudes
    }

    /// `|<u|v>|` of the two columns the state was built from.
    pub fn column_overlap(&self) -> f64 {
        self.column_overlap
    }

    pub fn norm_sq(&self) -> f64 {
        self.pair_amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Builds the post-splitter two-boson state from the two splitter columns.
pub fn symmetrize(col_a: &ModeVector, col_b: &ModeVector) -> Result<TwoBosonState> {
    let overlap = col_a.inner(col_b)?;
    let n = col_a.dim();
    let scale = (2.0 * (1.0 + overlap.norm_sqr())).sqrt().recip();
    let u = col_a.as_slice();
    let v = col_b.as_slice();

    let mut pairs = Array2::zeros((n, n));
    for j in 0..n {
        for k in j..n {
            let amp = (u[j] * v[k] + u[k] * v[j]) * scale;
            pairs[[j, k]] = amp;
            pairs[[k, j]] = amp;
        }
    }
    Ok(TwoBosonState {
        pair_amplitudes: pairs,
        column_overlap: overlap.norm(),
    })
}

/// Amplitude for particle 1 at detector `j` and particle 2 at detector `k`.
pub fn ordered_amplitude(state: &TwoBosonState, j: usize, k: usize) -> Result<Complex64> {
    let dim = state.dim();
    for index in [j, k] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    Ok(state.pair_amplitudes[[j, k]])
}

/// Probabilities of the physical detection events: both particles at one
/// detector (`bunched`) or one particle at each of two distinct detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceDistribution {
    dim: usize,
    bunched: Vec<f64>,
    /// Upper triangle `j < k`, row-major.
    pairs: Vec<f64>,
}

/// Position of `{j, k}` (`j < k`) in packed upper-triangular storage.
pub(crate) fn pair_index(dim: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < dim);
    j * (2 * dim - j - 1) / 2 + (k - j - 1)
}

impl CoincidenceDistribution {
    pub(crate) fn from_parts(dim: usize, bunched: Vec<f64>, pairs: Vec<f64>) -> Self {
        debug_assert_eq!(bunched.len(), dim);
        debug_assert_eq!(pairs.len(), dim * (dim - 1) / 2);
        Self {
            dim,
            bunched,
            pairs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bunched(&self) -> &[f64] {
        &self.bunched
    }

    /// Probability of the event `{j, k}`; `j == k` is the bunched event.
    /// Panics on out-of-range indices.
    pub fn probability(&self, j: usize, k: usize) -> f64 {
        assert!(j < self.dim && k < self.dim, "detector index out of range");
        match j.cmp(&k) {
            std::cmp::Ordering::Equal => self.bunched[j],
            std::cmp::Ordering::Less => self.pairs[pair_index(self.dim, j, k)],
            std::cmp::Ordering::Greater => self.pairs[pair_index(self.dim, k, j)],
        }
    }

    /// Unordered pairs `((j, k), p)` with `j < k`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let n = self.dim;
        (0..n)
            .flat_map(move |j| (j + 1..n).map(move |k| (j, k)))
            .zip(self.pairs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.bunched.iter().sum::<f64>() + self.pairs.iter().sum::<f64>()
    }

    /// Coincidence probabilities of `reference` with every detector.
    pub fn row(&self, reference: usize) -> Vec<f64> {
        (0..self.dim)
            .map(|k| self.probability(reference, k))
            .collect()
    }

    /// All event probabilities: bunched first, then pairs in lexicographic order.
    pub fn events(&self) -> impl Iterator<Item = f64> + '_ {
        self.bunched.iter().chain(&self.pairs).copied()
    }

    /// Renames detector `d` to `perm[d]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim;
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation of 0..{n}"
                )));
            }
        }
        let mut bunched = vec![0.0; n];
        let mut pairs = vec![0.0; self.pairs.len()];
        for j in 0..n {
            bunched[perm[j]] = self.bunched[j];
        }
        for ((j, k), p) in self.pairs() {
            let (a, b) = (perm[j].min(perm[k]), perm[j].max(perm[k]));
            pairs[pair_index(n, a, b)] = p;
        }
        Ok(Self::from_parts(n, bunched, pairs))
    }

    /// Largest absolute difference over all events.
    pub fn max_abs_deviation(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .events()
            .zip(other.events())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Event probabilities of a two-boson state.
///
/// `P(j,j) = |A[j][j]|^2`; for `j < k` both particle labelings feed one
/// physical event, so `P{j,k} = |A[j][k]|^2 + |A[k][j]|^2`.
pub fn coincidences(state: &TwoBosonState) -> CoincidenceDistribution {
    let a = &state.pair_amplitudes;
    let n = state.dim();
    let bunched = (0..n).map(|j| a[[j, j]].norm_sqr()).collect();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for k in j + 1..n {
            pairs.push(a[[j, k]].norm_sqr() + a[[k, j]].norm_sqr());
        }
    }
    CoincidenceDistribution::from_parts(n, bunched, pairs)
}
