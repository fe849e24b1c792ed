//! Path-splitters: the two output columns a splitter assigns to the two
//! sources, built from phase profiles or compiled from beam-splitter
//! networks.
//!
//! Detector indices are 0-based. The parity rule of the alternating
//! profile is stated on 1-based labels, so 0-based index `j` corresponds
//! to detector `j + 1`.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitudes::ModeVector;
use crate::{Error, Result};

/// Columns with `|<a|b>|` at or below this extend to a unitary.
pub const EMBEDDABLE_OVERLAP_TOL: f64 = 1e-9;
/// Accepted `max |U^dagger U - I|` for a compiled network.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A path-splitter restricted to the two occupied input modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitterSpec {
    col_a: ModeVector,
    col_b: ModeVector,
    overlap: f64,
}

impl SplitterSpec {
    pub fn new(col_a: ModeVector, col_b: ModeVector) -> Result<Self> {
        let overlap = col_a.inner(&col_b)?.norm();
        Ok(Self {
            col_a,
            col_b,
            overlap,
        })
    }

    pub fn dim(&self) -> usize {
        self.col_a.dim()
    }

    pub fn col_a(&self) -> &ModeVector {
        &self.col_a
    }

    pub fn col_b(&self) -> &ModeVector {
        &self.col_b
    }

    /// `|<col_a|col_b>|`.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    /// Whether the two columns can be columns of one unitary, i.e. the
    /// splitter is lossless.
    pub fn is_unitary_embeddable(&self) -> bool {
        self.overlap <= EMBEDDABLE_OVERLAP_TOL
    }

    /// Every amplitude of both columns has modulus `1/sqrt(n)`.
    pub fn is_uniform_modulus(&self) -> bool {
        let target = 1.0 / self.dim() as f64;
        self.col_a
            .as_slice()
            .iter()
            .chain(self.col_b.as_slice())
            .all(|a| (a.norm_sqr() - target).abs() <= 1e-9 * target)
    }
}

/// `col_a[j] = e^{i thetas[j]} / sqrt(n)`, `col_b[k] = e^{i phis[k]} / sqrt(n)`.
pub fn uniform_phase_splitter(n: usize, thetas: &[f64], phis: &[f64]) -> Result<SplitterSpec> {
    if n < 2 {
        return Err(Error::TooFewChannels(n));
    }
    for phases in [thetas, phis] {
        if phases.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: phases.len(),
            });
        }
    }
    let modulus = (n as f64).sqrt().recip();
    let column = |phases: &[f64]| -> Result<ModeVector> {
        ModeVector::new(
            phases
                .iter()
                .map(|&p| Complex64::from_polar(modulus, p))
                .collect(),
        )
    };
    SplitterSpec::new(column(thetas)?, column(phis)?)
}

/// All source-A phases zero; source-B phase `pi` on even (1-based) detectors.
///
/// The columns are built from exact `+-1/sqrt(n)` values, so their overlap
/// is exactly zero.
pub fn alternating_profile(n: usize) -> Result<SplitterSpec> {
    if n < 2 {
        return Err(Error::TooFewChannels(n));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::OddChannelCount(n));
    }
    let q = (n as f64).sqrt().recip();
    let col_a = vec![Complex64::new(q, 0.0); n];
    let col_b = (0..n)
        .map(|j| Complex64::new(if j % 2 == 0 { q } else { -q }, 0.0))
        .collect();
    SplitterSpec::new(ModeVector::new(col_a)?, ModeVector::new(col_b)?)
}

/// `e^{i(theta_j + phi_k)} + e^{i(theta_k + phi_j)}` for a uniform-modulus
/// splitter; the amplitude of the cross term for detectors `j != k`.
pub fn cross_phase_factor(spec: &SplitterSpec, j: usize, k: usize) -> Result<Complex64> {
    let dim = spec.dim();
    for index in [j, k] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    if j == k {
        return Err(Error::SameDetector(j));
    }
    if !spec.is_uniform_modulus() {
        return Err(Error::NonUniformModulus);
    }
    let phasor = |col: &ModeVector, m: usize| {
        let a = col.as_slice()[m];
        a / a.norm()
    };
    let (a, b) = (&spec.col_a, &spec.col_b);
    Ok(phasor(a, j) * phasor(b, k) + phasor(a, k) * phasor(b, j))
}

/// Phase convention of a two-port beam splitter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `[[sqrt r, sqrt t], [sqrt t, -sqrt r]]`: the second input port picks
    /// up `pi` on reflection.
    #[default]
    Real,
    /// `[[sqrt r, i sqrt t], [i sqrt t, sqrt r]]`.
    Symmetric,
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Convention::Real),
            "symmetric" => Ok(Convention::Symmetric),
            other => Err(Error::UnknownConvention(other.to_string())),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Real => "real",
            Convention::Symmetric => "symmetric",
        })
    }
}

pub type Transform2 = [[Complex64; 2]; 2];

/// Beam splitter with reflectivity `r` (power fraction kept in the same mode).
pub fn beam_splitter(r: f64, convention: Convention) -> Result<Transform2> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "reflectivity {r} outside [0, 1]"
        )));
    }
    let rr = Complex64::new(r.sqrt(), 0.0);
    let tt = Complex64::new((1.0 - r).sqrt(), 0.0);
    Ok(match convention {
        Convention::Real => [[rr, tt], [tt, -rr]],
        Convention::Symmetric => {
            let i = Complex64::i();
            [[rr, i * tt], [i * tt, rr]]
        }
    })
}

/// The 50:50 splitter in the given convention.
pub fn balanced_splitter_element(convention: &str) -> Result<Transform2> {
    beam_splitter(0.5, convention.parse()?)
}

/// One beam splitter acting on modes `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Element {
    pub i: usize,
    pub j: usize,
    #[serde(default = "balanced")]
    pub r: f64,
    #[serde(default)]
    pub convention: Convention,
}

fn balanced() -> f64 {
    0.5
}

impl Element {
    pub fn balanced(i: usize, j: usize) -> Self {
        Self {
            i,
            j,
            r: 0.5,
            convention: Convention::Real,
        }
    }
}

/// A beam-splitter network; also the on-disk network file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDescription {
    pub dim: usize,
    pub elements: Vec<Element>,
    pub input_a: usize,
    pub input_b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledNetwork {
    /// Full transform; column `m` holds the outputs of input mode `m`.
    pub transform: Array2<Complex64>,
    pub spec: SplitterSpec,
}

impl NetworkDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidTopology(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    /// Index and reflectivity checks.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n < 2 {
            return Err(Error::TooFewChannels(n));
        }
        for (label, m) in [("input_a", self.input_a), ("input_b", self.input_b)] {
            if m >= n {
                return Err(Error::InvalidTopology(format!(
                    "{label} = {m} outside 0..{n}"
                )));
            }
        }
        for (idx, e) in self.elements.iter().enumerate() {
            if e.i >= n || e.j >= n {
                return Err(Error::InvalidTopology(format!(
                    "element {idx}: mode ({}, {}) outside 0..{n}",
                    e.i, e.j
                )));
            }
            if e.i == e.j {
                return Err(Error::InvalidTopology(format!(
                    "element {idx}: both ports on mode {}",
                    e.i
                )));
            }
            if !(0.0..=1.0).contains(&e.r) {
                return Err(Error::InvalidTopology(format!(
                    "element {idx}: reflectivity {} outside [0, 1]",
                    e.r
                )));
            }
        }
        Ok(())
    }

    /// Modes not connected to either input through any element.
    pub fn unreachable_modes(&self) -> Vec<usize> {
        let mut reached = vec![false; self.dim];
        reached[self.input_a] = true;
        reached[self.input_b] = true;
        // Undirected connectivity; iterate to a fixed point.
        loop {
            let mut changed = false;
            for e in &self.elements {
                if reached[e.i] != reached[e.j] {
                    reached[e.i] = true;
                    reached[e.j] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..self.dim).filter(|&m| !reached[m]).collect()
    }

    /// Product of the element embeddings, first element applied first.
    pub fn transfer_matrix(&self) -> Result<Array2<Complex64>> {
        self.validate()?;
        let n = self.dim;
        let mut u = Array2::<Complex64>::eye(n);
        for e in &self.elements {
            let m = beam_splitter(e.r, e.convention)?;
            for col in 0..n {
                let (a, b) = (u[[e.i, col]], u[[e.j, col]]);
                u[[e.i, col]] = m[0][0] * a + m[0][1] * b;
                u[[e.j, col]] = m[1][0] * a + m[1][1] * b;
            }
        }
        Ok(u)
    }
}

/// `max |U^dagger U - I|` over all entries.
pub fn unitarity_deviation(u: &Array2<Complex64>) -> f64 {
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let dot: Complex64 = (0..n).map(|r| u[[r, a]].conj() * u[[r, b]]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

pub fn compile_network(net: &NetworkDescription) -> Result<CompiledNetwork> {
    net.validate()?;
    let missing = net.unreachable_modes();
    if !missing.is_empty() {
        return Err(Error::InvalidTopology(format!(
            "detector modes {missing:?} are not reachable from the inputs"
        )));
    }
    let transform = net.transfer_matrix()?;
    let deviation = unitarity_deviation(&transform);
    if deviation > UNITARITY_TOL {
        return Err(Error::Invariant(format!(
            "compiled network deviates from unitarity by {deviation:e}"
        )));
    }
    let column = |m: usize| ModeVector::new(transform.column(m).to_vec());
    let spec = SplitterSpec::new(column(net.input_a)?, column(net.input_b)?)?;
    Ok(CompiledNetwork { transform, spec })
}
