//! The continuous-position limit: two sources at `x = +-x0`, detectors on
//! a screen at distance `L`.
//!
//! A particle reaching position `x` picks up `theta_x = 2 pi x0 x / (lambda L)`
//! from source A and `phi_x = -theta_x` from source B. With a common
//! envelope `psi(x)` the coincidence density over ordered positions is
//!
//! ```text
//! P(x1, x2) = |psi(x1) psi(x2)|^2 [1 + cos(4 pi x0 (x1 - x2) / (lambda L))] / (1 + |s|^2)
//! s         = integral |psi(x)|^2 e^{i(phi_x - theta_x)} dx
//! ```
//!
//! Dark fringes are spaced by `lambda L / (2 x0)`. The `1 + |s|^2` factor
//! is the exact two-boson normalization; it tends to one once the envelope
//! spans many fringes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitudes::{coincidences, symmetrize, ModeVector};
use crate::{Error, Result};

/// Minimum grid samples per fringe width.
pub const MIN_POINTS_PER_FRINGE: usize = 16;
/// Minimum grid span for [`scan`], in envelope widths.
pub const MIN_SPAN_SIGMAS: f64 = 5.0;
/// `2 x0 / L` above which the linear phase model is questionable.
pub const PARAXIAL_WARN_RATIO: f64 = 0.1;
/// Sampled minima must lie below this fraction of the peak to count as dark.
pub const DARK_FRACTION: f64 = 1e-3;

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtGeometry {
    x0: f64,
    wavelength: f64,
    distance: f64,
}

impl HbtGeometry {
    /// `x0` is half the source separation, `distance` the source-screen
    /// distance `L`; all in the same length unit.
    pub fn new(x0: f64, wavelength: f64, distance: f64) -> Result<Self> {
        Ok(Self {
            x0: positive("x0", x0)?,
            wavelength: positive("wavelength", wavelength)?,
            distance: positive("L", distance)?,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// `d theta / dx = 2 pi x0 / (lambda L)`.
    pub fn phase_rate(&self) -> f64 {
        2.0 * PI * self.x0 / (self.wavelength * self.distance)
    }

    /// Distance between neighbouring dark fringes, `lambda L / (2 x0)`.
    pub fn fringe_spacing(&self) -> f64 {
        self.wavelength * self.distance / (2.0 * self.x0)
    }

    pub fn paraxial_ratio(&self) -> f64 {
        2.0 * self.x0 / self.distance
    }

    pub fn paraxial_warning(&self) -> bool {
        self.paraxial_ratio() > PARAXIAL_WARN_RATIO
    }
}

/// Phases `(theta_x, phi_x)` picked up from sources A and B at position `x`.
pub fn phase_profiles(geom: &HbtGeometry, x: f64) -> (f64, f64) {
    let theta = geom.phase_rate() * x;
    (theta, -theta)
}

/// Gaussian detection-plane envelope; `sigma` is the standard deviation of
/// `|psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    sigma: f64,
    center: f64,
}

impl Envelope {
    pub fn gaussian(sigma: f64, center: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        if !center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "envelope center must be finite, got {center}"
            )));
        }
        let env = Self { sigma, center };
        let norm = env.weighted_integral(0.0).re;
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Invariant(format!(
                "envelope integrates to {norm}, not 1"
            )));
        }
        Ok(env)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        (2.0 * PI * self.sigma * self.sigma).powf(-0.25) * (-0.25 * z * z).exp()
    }

    pub fn intensity(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    /// `integral |psi(x)|^2 e^{-i k x} dx` by the trapezoid rule over
    /// `center +- 12 sigma`.
    ///
    /// The step keeps the first aliased frequency `2 pi / h - k` at least
    /// `12 / sigma` away, which puts the aliasing error far below 1e-16.
    pub fn weighted_integral(&self, k: f64) -> Complex64 {
        let half = 12.0 * self.sigma;
        let h_max = 2.0 * PI / (k.abs() + 12.0 / self.sigma);
        let intervals = ((2.0 * half / h_max).ceil() as usize).max(256);
        let h = 2.0 * half / intervals as f64;
        let x0 = self.center - half;
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..=intervals {
            let x = x0 + i as f64 * h;
            let w = if i == 0 || i == intervals { 0.5 } else { 1.0 };
            sum += Complex64::from_polar(w * self.intensity(x), -k * x);
        }
        sum * h
    }
}

/// Geometry and envelope with the column overlap `s` precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtModel {
    geometry: HbtGeometry,
    envelope: Envelope,
    overlap: Complex64,
}

impl HbtModel {
    pub fn new(geometry: HbtGeometry, envelope: Envelope) -> Self {
        // phi_x - theta_x = -2 * rate * x
        let overlap = envelope.weighted_integral(2.0 * geometry.phase_rate());
        Self {
            geometry,
            envelope,
            overlap,
        }
    }

    pub fn geometry(&self) -> &HbtGeometry {
        &self.geometry
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// `s = <A|B>` of the two single-particle screen states.
    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }

    /// Ordered coincidence density at `(x1, x2)`, per length squared.
    pub fn density(&self, x1: f64, x2: f64) -> f64 {
        let c = (self.geometry.phase_rate() * (x1 - x2)).cos();
        let env = self.envelope.intensity(x1) * self.envelope.intensity(x2);
        // 1 + cos(2u) = 2 cos^2(u): exact zeros at the dark fringes.
        2.0 * env * c * c / (1.0 + self.overlap.norm_sqr())
    }
}

pub fn coincidence_density(geom: &HbtGeometry, env: &Envelope, x1: f64, x2: f64) -> f64 {
    HbtModel::new(*geom, *env).density(x1, x2)
}

/// Uniform grid `min..=max` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy min < max, got {min}:{max}"
            )));
        }
        if points < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 points, got {points}"
            )));
        }
        Ok(Self { min, max, points })
    }

    /// `points` nodes centred on zero, `step` apart.
    pub fn centered(step: f64, points: usize) -> Result<Self> {
        let half = 0.5 * step * (points as f64 - 1.0);
        Self::new(-half, half, points)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| self.min + i as f64 * h).collect()
    }

    fn check_resolution(&self, geom: &HbtGeometry) -> Result<()> {
        let fringe = geom.fringe_spacing();
        let limit = fringe / MIN_POINTS_PER_FRINGE as f64;
        if self.step() > limit * (1.0 + 1e-12) {
            return Err(Error::UnderResolvedGrid {
                step: self.step(),
                fringe,
                min_per_fringe: MIN_POINTS_PER_FRINGE,
            });
        }
        Ok(())
    }

    fn check_coverage(&self, env: &Envelope) -> Result<()> {
        let half = 0.5 * MIN_SPAN_SIGMAS * env.sigma();
        let slack = 1e-12 * env.sigma();
        let (need_min, need_max) = (env.center() - half, env.center() + half);
        if self.min > need_min + slack || self.max < need_max - slack {
            return Err(Error::InsufficientCoverage {
                min: self.min,
                max: self.max,
                need_min,
                need_max,
            });
        }
        Ok(())
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `min:max:points`, e.g. `-0.005:0.005:2048`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("grid `{s}` is not min:max:points"));
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(bad());
        };
        let min = min.trim().parse().map_err(|_| bad())?;
        let max = max.trim().parse().map_err(|_| bad())?;
        let points = points.trim().parse().map_err(|_| bad())?;
        Self::new(min, max, points)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}:{:e}:{}", self.min, self.max, self.points)
    }
}

/// Sampled coincidence density.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPattern {
    grid: Vec<f64>,
    /// Full: row-major `density[i1 * n + i2]`. Slice: `density[i2]`.
    density: Vec<f64>,
    slice_x1: Option<f64>,
    overlap: f64,
}

impl ContinuousPattern {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Fixed `x1` when the pattern is a 1-D cut.
    pub fn slice_x1(&self) -> Option<f64> {
        self.slice_x1
    }

    pub fn is_slice(&self) -> bool {
        self.slice_x1.is_some()
    }

    /// `|s|` used for normalization.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    /// Density at grid nodes `(i1, i2)` of a full pattern.
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        assert!(!self.is_slice(), "`at` needs a full 2-D pattern");
        self.density[i1 * self.grid.len() + i2]
    }

    pub fn peak(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoid double integral of a full pattern.
    pub fn integral(&self) -> Option<f64> {
        if self.is_slice() {
            return None;
        }
        let n = self.grid.len();
        let h = self.grid[1] - self.grid[0];
        let w = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                sum += w(i) * w(j) * self.density[i * n + j];
            }
        }
        Some(sum * h * h)
    }
}

/// Samples the closed-form density on `grid`; a 1-D cut at `x1` when
/// `slice_x1` is given.
pub fn scan(model: &HbtModel, grid: &GridSpec, slice_x1: Option<f64>) -> Result<ContinuousPattern> {
    grid.check_resolution(model.geometry())?;
    grid.check_coverage(model.envelope())?;
    let xs = grid.positions();
    let density = match slice_x1 {
        Some(x1) => xs.iter().map(|&x2| model.density(x1, x2)).collect(),
        None => {
            let n = xs.len();
            let mut density = vec![0.0; n * n];
            density
                .par_chunks_mut(n)
                .zip(xs.par_iter())
                .for_each(|(row, &x1)| {
                    for (cell, &x2) in row.iter_mut().zip(&xs) {
                        *cell = model.density(x1, x2);
                    }
                });
            density
        }
    };
    Ok(ContinuousPattern {
        grid: xs,
        density,
        slice_x1,
        overlap: model.overlap().norm(),
    })
}

/// Refined positions of the dark fringes of a 1-D slice.
pub fn dark_fringe_positions(pattern: &ContinuousPattern) -> Result<Vec<f64>> {
    if !pattern.is_slice() {
        return Err(Error::NotASlice);
    }
    let (x, d) = (&pattern.grid, &pattern.density);
    let threshold = DARK_FRACTION * pattern.peak();
    let h = x[1] - x[0];
    let mut minima = Vec::new();
    for i in 1..d.len() - 1 {
        if d[i] < threshold && d[i] <= d[i - 1] && d[i] < d[i + 1] {
            let curvature = d[i - 1] - 2.0 * d[i] + d[i + 1];
            let shift = if curvature > 0.0 {
                0.5 * (d[i - 1] - d[i + 1]) / curvature
            } else {
                0.0
            };
            minima.push(x[i] + shift.clamp(-0.5, 0.5) * h);
        }
    }
    Ok(minima)
}

/// Mean distance between consecutive dark fringes of a 1-D slice.
pub fn fringe_spacing(pattern: &ContinuousPattern) -> Result<f64> {
    let minima = dark_fringe_positions(pattern)?;
    if minima.len() < 2 {
        return Err(Error::TooFewMinima(minima.len()));
    }
    Ok((minima[minima.len() - 1] - minima[0]) / (minima.len() - 1) as f64)
}

/// Builds the density through the discrete engine: one channel per grid
/// node, columns `psi(x_j) e^{i theta_j} sqrt(dx)` and
/// `psi(x_j) e^{i phi_j} sqrt(dx)`, renormalized on the grid.
///
/// Pair probabilities become ordered densities: `P(j,j) / dx^2` on the
/// diagonal and `P{j,k} / (2 dx^2)` off it.
pub fn hbt_from_nport(
    geom: &HbtGeometry,
    env: &Envelope,
    grid: &GridSpec,
) -> Result<ContinuousPattern> {
    grid.check_resolution(geom)?;
    let xs = grid.positions();
    let dx = grid.step();
    let column = |sign: f64| {
        ModeVector::normalized(
            xs.iter()
                .map(|&x| {
                    let (theta, _) = phase_profiles(geom, x);
                    Complex64::from_polar(env.amplitude(x) * dx.sqrt(), sign * theta)
                })
                .collect(),
        )
    };
    let col_a = column(1.0)?;
    let col_b = column(-1.0)?;
    let state = symmetrize(&col_a, &col_b)?;
    let dist = coincidences(&state);

    let n = xs.len();
    let inv_area = (dx * dx).recip();
    let mut density = vec![0.0; n * n];
    for (j, &p) in dist.bunched().iter().enumerate() {
        density[j * n + j] = p * inv_area;
    }
    for ((j, k), p) in dist.pairs() {
        let value = 0.5 * p * inv_area;
        density[j * n + k] = value;
        density[k * n + j] = value;
    }
    Ok(ContinuousPattern {
        grid: xs,
        density,
        slice_x1: None,
        overlap: state.column_overlap(),
    })
}
