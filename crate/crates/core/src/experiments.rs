//! Canned discrete experiments and fringe analysis.

use std::fmt;
use std::str::FromStr;

use crate::amplitudes::{coincidences, symmetrize, CoincidenceDistribution};
use crate::splitters::{
    alternating_profile, compile_network, Element, NetworkDescription, SplitterSpec,
};
use crate::{Error, Result};

/// Coincidence probabilities of one reference detector with every detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePattern {
    pub n: usize,
    pub reference: usize,
    /// Entry `k` is `P{reference, k}`; entry `reference` is the bunched
    /// probability.
    pub counts: Vec<f64>,
}

impl DiscretePattern {
    pub fn from_distribution(dist: &CoincidenceDistribution, reference: usize) -> Result<Self> {
        if reference >= dist.dim() {
            return Err(Error::IndexOutOfRange {
                index: reference,
                dim: dist.dim(),
            });
        }
        Ok(Self {
            n: dist.dim(),
            reference,
            counts: dist.row(reference),
        })
    }

    /// Counts rescaled by `n^2 / 2`, the bar heights of the usual plots.
    pub fn paper_units(&self) -> Vec<f64> {
        let scale = (self.n * self.n) as f64 / 2.0;
        self.counts.iter().map(|p| p * scale).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeReport {
    /// Detectors (excluding the reference) whose coincidence probability is
    /// below the zero tolerance.
    pub dark_indices: Vec<usize>,
    pub bright_value: f64,
    /// `(max - min) / (max + min)` over the cross entries; `None` when
    /// fewer than two cross entries exist or all of them vanish.
    pub visibility: Option<f64>,
}

/// Symmetrize and count, refusing lossy (non-embeddable) splitters unless
/// explicitly allowed.
pub fn run_splitter(
    spec: &SplitterSpec,
    allow_nonphysical: bool,
) -> Result<CoincidenceDistribution> {
    if !allow_nonphysical && !spec.is_unitary_embeddable() {
        return Err(Error::NonPhysical {
            overlap: spec.overlap(),
        });
    }
    let state = symmetrize(spec.col_a(), spec.col_b())?;
    Ok(coincidences(&state))
}

/// A balanced beam splitter with the sources on opposite input ports.
pub fn hom_network() -> NetworkDescription {
    NetworkDescription {
        dim: 2,
        elements: vec![Element::balanced(0, 1)],
        input_a: 0,
        input_b: 1,
    }
}

pub fn run_hom() -> CoincidenceDistribution {
    let spec = alternating_profile(2).expect("n = 2 is even");
    run_splitter(&spec, false).expect("HOM splitter is lossless")
}

/// Four-port realizations of the extended HOM experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// The alternating-phase columns written down directly.
    Eq6,
    /// Three splitters: one mixing both sources, then one on each output.
    Fig5,
    /// Four splitters: each source split separately, then the halves mixed
    /// pairwise.
    Fig6,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Eq6, Topology::Fig5, Topology::Fig6];

    /// The network for the beam-splitter realizations.
    pub fn network(self) -> Option<NetworkDescription> {
        let b = Element::balanced;
        match self {
            Topology::Eq6 => None,
            Topology::Fig5 => Some(NetworkDescription {
                dim: 4,
                elements: vec![b(0, 2), b(0, 1), b(2, 3)],
                input_a: 0,
                input_b: 2,
            }),
            Topology::Fig6 => Some(NetworkDescription {
                dim: 4,
                elements: vec![b(0, 1), b(2, 3), b(0, 2), b(1, 3)],
                input_a: 0,
                input_b: 3,
            }),
        }
    }

    /// Detector `d` of this topology plays the role of detector `perm[d]`
    /// in the direct alternating-phase labeling.
    ///
    /// Fig5 ends with source B on `(+,+,-,-)` and Fig6 on `(+,-,-,+)`
    /// instead of `(+,-,+,-)`; the wiring that would give the latter
    /// labeling is not fixed, so the relabeling is kept explicit.
    pub fn eq6_relabeling(self) -> [usize; 4] {
        match self {
            Topology::Eq6 => [0, 1, 2, 3],
            Topology::Fig5 => [0, 2, 1, 3],
            Topology::Fig6 => [0, 1, 3, 2],
        }
    }

    pub fn splitter(self) -> Result<SplitterSpec> {
        match self.network() {
            None => alternating_profile(4),
            Some(net) => Ok(compile_network(&net)?.spec),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq6" => Ok(Topology::Eq6),
            "fig5" => Ok(Topology::Fig5),
            "fig6" => Ok(Topology::Fig6),
            other => Err(Error::UnknownTopology(other.to_string())),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Eq6 => "eq6",
            Topology::Fig5 => "fig5",
            Topology::Fig6 => "fig6",
        })
    }
}

/// Distribution in the topology's own detector labeling.
pub fn run_extended_hom(topology: Topology) -> Result<CoincidenceDistribution> {
    run_splitter(&topology.splitter()?, false)
}

/// Alternating-phase `n`-port pattern seen from `reference` (0-based).
pub fn run_nport(n: usize, reference: usize) -> Result<DiscretePattern> {
    let dist = run_splitter(&alternating_profile(n)?, false)?;
    DiscretePattern::from_distribution(&dist, reference)
}

pub fn analyze_fringes(pattern: &DiscretePattern, zero_tol: f64) -> Result<FringeReport> {
    if zero_tol.is_nan() || zero_tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "zero tolerance must be positive, got {zero_tol}"
        )));
    }
    let cross: Vec<(usize, f64)> = pattern
        .counts
        .iter()
        .copied()
        .enumerate()
        .filter(|&(k, _)| k != pattern.reference)
        .collect();
    let dark_indices = cross
        .iter()
        .filter(|(_, p)| *p < zero_tol)
        .map(|(k, _)| *k)
        .collect();
    let max = cross
        .iter()
        .map(|(_, p)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    let min = cross.iter().map(|(_, p)| *p).fold(f64::INFINITY, f64::min);
    let visibility = if pattern.n < 3 || max + min <= 0.0 {
        None
    } else {
        Some(((max - min) / (max + min)).clamp(0.0, 1.0))
    };
    Ok(FringeReport {
        dark_indices,
        bright_value: max.max(0.0),
        visibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hom_dip() {
        let d = run_hom();
        assert!(d.probability(0, 1).abs() < 1e-12);
        assert!((d.probability(0, 0) - 0.5).abs() < 1e-12);
        assert!((d.probability(1, 1) - 0.5).abs() < 1e-12);
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hom_network_matches_phase_profile() {
        let net = compile_network(&hom_network()).unwrap();
        let d = run_splitter(&net.spec, false).unwrap();
        assert!(d.max_abs_deviation(&run_hom()).unwrap() < 1e-12);
    }

    #[test]
    fn extended_hom_eq6() {
        let d = run_extended_hom(Topology::Eq6).unwrap();
        for j in 0..4 {
            assert!((d.probability(j, j) - 0.125).abs() < 1e-12);
        }
        assert!((d.probability(0, 2) - 0.25).abs() < 1e-12);
        assert!((d.probability(1, 3) - 0.25).abs() < 1e-12);
        assert!(d.probability(0, 1).abs() < 1e-12);
    }

    #[test]
    fn extended_hom_networks_relabel_to_eq6() {
        let eq6 = run_extended_hom(Topology::Eq6).unwrap();
        for t in [Topology::Fig5, Topology::Fig6] {
            let d = run_extended_hom(t).unwrap();
            // Without relabeling the pattern differs.
            assert!(d.max_abs_deviation(&eq6).unwrap() > 0.1, "{t}");
            let r = d.relabeled(&t.eq6_relabeling()).unwrap();
            assert!(r.max_abs_deviation(&eq6).unwrap() < 1e-12, "{t}");
        }
    }

    #[test]
    fn nport_eight() {
        let p = run_nport(8, 0).unwrap();
        for (k, &v) in p.counts.iter().enumerate() {
            let want = match k {
                0 => 2.0 / 64.0,
                k if k % 2 == 0 => 4.0 / 64.0,
                _ => 0.0,
            };
            assert!((v - want).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn nport_small() {
        let p = run_nport(2, 0).unwrap();
        assert!((p.counts[0] - 0.5).abs() < 1e-12 && p.counts[1].abs() < 1e-12);
        let p = run_nport(4, 0).unwrap();
        for (v, want) in p.counts.iter().zip([0.125, 0.0, 0.25, 0.0]) {
            assert!((v - want).abs() < 1e-12);
        }
        assert_eq!(run_nport(7, 0), Err(Error::OddChannelCount(7)));
        assert!(matches!(
            run_nport(4, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn paper_units_bars() {
        let p = run_nport(8, 0).unwrap();
        let bars = p.paper_units();
        for (v, want) in bars.iter().zip([1.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 0.0]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fringes_of_nport() {
        let r = analyze_fringes(&run_nport(8, 0).unwrap(), 1e-12).unwrap();
        assert_eq!(r.dark_indices, vec![1, 3, 5, 7]);
        assert!((r.bright_value - 4.0 / 64.0).abs() < 1e-15);
        assert_eq!(r.visibility, Some(1.0));

        let row = DiscretePattern::from_distribution(&run_extended_hom(Topology::Eq6).unwrap(), 0)
            .unwrap();
        let r = analyze_fringes(&row, 1e-12).unwrap();
        assert_eq!(r.dark_indices, vec![1, 3]);
        assert_eq!(r.visibility, Some(1.0));
    }

    #[test]
    fn flat_pattern_has_no_visibility() {
        let flat = DiscretePattern {
            n: 5,
            reference: 2,
            counts: vec![0.1; 5],
        };
        let r = analyze_fringes(&flat, 1e-12).unwrap();
        assert!(r.dark_indices.is_empty());
        assert_eq!(r.visibility, Some(0.0));
    }

    #[test]
    fn hom_row_reports_dark_only() {
        let row = DiscretePattern::from_distribution(&run_hom(), 0).unwrap();
        let r = analyze_fringes(&row, 1e-12).unwrap();
        assert_eq!(r.dark_indices, vec![1]);
        assert_eq!(r.visibility, None);
        assert!(analyze_fringes(&row, 0.0).is_err());
    }

    #[test]
    fn nonphysical_splitter_refused() {
        let spec = crate::splitters::uniform_phase_splitter(2, &[0.0; 2], &[0.0; 2]).unwrap();
        assert!(matches!(
            run_splitter(&spec, false),
            Err(Error::NonPhysical { .. })
        ));
        let d = run_splitter(&spec, true).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn topology_names() {
        for t in Topology::ALL {
            assert_eq!(t.to_string().parse::<Topology>().unwrap(), t);
        }
        assert!("fig7".parse::<Topology>().is_err());
    }
}
