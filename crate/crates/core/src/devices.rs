//! Imperfect sources and detectors.
//!
//! A source emits a single photon with probability `efficiency` and vacuum
//! otherwise. A detector first loses each photon independently (efficiency
//! `delta`), then registers extra noise photons drawn from a thermal
//! distribution whose mean `nu = d / (1 - d)` makes the vacuum click
//! probability exactly `d`. Click detectors report `{no-click, click}`;
//! photon-number-resolving ones report `{0, 1, >=2}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::fock::{binomial, DensityOperator, FockBasis, PovmElement};

/// Placeholder per-window dark click probability.
pub const DEFAULT_DARK_PROB: f64 = 1.3e-6;

/// Largest thermal tail mass tolerated above the cutoff.
pub const THERMAL_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub efficiency: f64,
}

impl SourceModel {
    pub fn new(efficiency: f64) -> Result<Self> {
        check_unit("eps", efficiency)?;
        Ok(Self { efficiency })
    }

    pub fn ideal() -> Self {
        Self { efficiency: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_click_prob: f64,
    pub pnr: bool,
}

impl DetectorModel {
    pub fn new(efficiency: f64, dark_click_prob: f64, pnr: bool) -> Result<Self> {
        let det = Self {
            efficiency,
            dark_click_prob,
            pnr,
        };
        det.validate()?;
        Ok(det)
    }

    /// Unit efficiency, no dark counts, click/no-click.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_click_prob: 0.0,
            pnr: false,
        }
    }

    pub fn ideal_pnr() -> Self {
        Self {
            pnr: true,
            ..Self::ideal()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("delta", self.efficiency)?;
        if !(0.0..1.0).contains(&self.dark_click_prob) {
            return Err(Error::InvalidParameter {
                key: "dark_prob",
                value: self.dark_click_prob,
                reason: "must lie in [0, 1)",
            });
        }
        Ok(())
    }

    /// Mean of the thermal noise giving `P(click | vacuum) = d`.
    pub fn thermal_mean(&self) -> f64 {
        self.dark_click_prob / (1.0 - self.dark_click_prob)
    }

    pub fn outcomes(&self) -> &'static [Outcome] {
        if self.pnr {
            &[Outcome::Zero, Outcome::One, Outcome::TwoOrMore]
        } else {
            &[Outcome::NoClick, Outcome::Click]
        }
    }

    /// Outcome that counts as "one photon seen" for heralding.
    pub fn herald_outcome(&self) -> Outcome {
        if self.pnr {
            Outcome::One
        } else {
            Outcome::Click
        }
    }

    pub fn silent_outcome(&self) -> Outcome {
        if self.pnr {
            Outcome::Zero
        } else {
            Outcome::NoClick
        }
    }

    /// `P(outcome | n photons reach the detector)`.
    pub fn outcome_probability(&self, outcome: Outcome, n: usize) -> f64 {
        let q0 = 1.0 - self.dark_click_prob;
        let q1 = self.dark_click_prob * (1.0 - self.dark_click_prob);
        let loss = 1.0 - self.efficiency;
        let zero = loss.powi(n as i32) * q0;
        let one = if n == 0 {
            q1
        } else {
            n as f64 * self.efficiency * loss.powi(n as i32 - 1) * q0 + loss.powi(n as i32) * q1
        };
        match outcome {
            Outcome::NoClick | Outcome::Zero => zero,
            Outcome::Click => 1.0 - zero,
            Outcome::One => one,
            Outcome::TwoOrMore => 1.0 - zero - one,
        }
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            dark_click_prob: DEFAULT_DARK_PROB,
            pnr: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NoClick,
    Click,
    Zero,
    One,
    TwoOrMore,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::NoClick => "no_click",
            Outcome::Click => "click",
            Outcome::Zero => "zero",
            Outcome::One => "one",
            Outcome::TwoOrMore => "two_or_more",
        };
        f.write_str(s)
    }
}

/// Truncated thermal photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    mean_photons: f64,
    probabilities: Vec<f64>,
}

impl ThermalState {
    /// Fails when more than [`THERMAL_TAIL_TOL`] lies above `cutoff`.
    pub fn new(mean_photons: f64, cutoff: usize) -> Result<Self> {
        if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
            return Err(Error::InvalidParameter {
                key: "dark_prob",
                value: mean_photons,
                reason: "thermal mean must be finite and non-negative",
            });
        }
        let ratio = mean_photons / (1.0 + mean_photons);
        let probabilities: Vec<f64> = (0..=cutoff)
            .map(|n| ratio.powi(n as i32) / (1.0 + mean_photons))
            .collect();
        let tail = ratio.powi(cutoff as i32 + 1);
        if tail >= THERMAL_TAIL_TOL {
            return Err(Error::ThermalTail { tail, cutoff });
        }
        Ok(Self {
            mean_photons,
            probabilities,
        })
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn tail_mass(&self) -> f64 {
        1.0 - self.probabilities.iter().sum::<f64>()
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        let basis = Arc::new(FockBasis::new(1, self.probabilities.len() - 1)?);
        let occ: Vec<[u8; 1]> = (0..self.probabilities.len()).map(|n| [n as u8]).collect();
        let weights: Vec<(&[u8], f64)> = occ
            .iter()
            .zip(&self.probabilities)
            .map(|(o, &p)| (o.as_slice(), p))
            .collect();
        DensityOperator::mixture_of_fock(basis, &weights)
    }
}

/// `eps |1><1| + (1 - eps) |0><0|` on one mode.
pub fn lossy_single_photon(source: &SourceModel, cutoff: usize) -> Result<DensityOperator> {
    let basis = Arc::new(FockBasis::new(1, cutoff)?);
    let eps = source.efficiency;
    DensityOperator::mixture_of_fock(basis, &[(&[1], eps), (&[0], 1.0 - eps)])
}

/// Effective POVM of one detector on a mode with the given cutoff.
#[derive(Debug, Clone)]
pub struct DetectionMap {
    pub detector: DetectorModel,
    pub elements: Vec<(Outcome, PovmElement)>,
}

impl DetectionMap {
    pub fn element(&self, outcome: Outcome) -> Option<&PovmElement> {
        self.elements.iter().find(|(o, _)| *o == outcome).map(|(_, e)| e)
    }

    /// Photon-number weights `P(outcome | n)`, `n = 0..=cutoff`.
    pub fn weights(&self, outcome: Outcome) -> Option<Vec<f64>> {
        self.element(outcome).and_then(|e| e.diagonal_weights())
    }
}

/// Builds the detector POVM: binomial loss, thermal noise admixture, then
/// ideal click or photon counting.
pub fn detection_map(detector: &DetectorModel, cutoff: usize) -> Result<DetectionMap> {
    detector.validate()?;
    let noise = ThermalState::new(detector.thermal_mean(), cutoff)?;
    let q = noise.probabilities();
    let delta = detector.efficiency;

    // count[n][k]: probability of registering k photons (capped at 2) given n.
    let mut counts = vec![[0.0; 3]; cutoff + 1];
    for (n, row) in counts.iter_mut().enumerate() {
        for survived in 0..=n {
            let ps = binomial(n, survived) * delta.powi(survived as i32) * (1.0 - delta).powi((n - survived) as i32);
            for (j, &qj) in q.iter().enumerate() {
                row[(survived + j).min(2)] += ps * qj;
            }
        }
    }

    let zero: Vec<f64> = counts.iter().map(|r| r[0]).collect();
    let elements = if detector.pnr {
        let one: Vec<f64> = counts.iter().map(|r| r[1]).collect();
        let rest: Vec<f64> = zero.iter().zip(&one).map(|(a, b)| 1.0 - a - b).collect();
        vec![
            (Outcome::Zero, PovmElement::diagonal(&zero, Outcome::Zero.to_string())),
            (Outcome::One, PovmElement::diagonal(&one, Outcome::One.to_string())),
            (Outcome::TwoOrMore, PovmElement::diagonal(&rest, Outcome::TwoOrMore.to_string())),
        ]
    } else {
        let click: Vec<f64> = zero.iter().map(|a| 1.0 - a).collect();
        vec![
            (Outcome::NoClick, PovmElement::diagonal(&zero, Outcome::NoClick.to_string())),
            (Outcome::Click, PovmElement::diagonal(&click, Outcome::Click.to_string())),
        ]
    };
    Ok(DetectionMap {
        detector: *detector,
        elements,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeraldPolicy {
    SinglePattern,
    #[default]
    BothPatterns,
}

impl HeraldPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            HeraldPolicy::SinglePattern => "single_pattern",
            HeraldPolicy::BothPatterns => "both_patterns",
        }
    }
}

impl std::str::FromStr for HeraldPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "single_pattern" | "single" => Ok(HeraldPolicy::SinglePattern),
            "both_patterns" | "both" => Ok(HeraldPolicy::BothPatterns),
            other => Err(format!("unknown herald policy `{other}`")),
        }
    }
}

/// An accepted pair of herald outcomes.
///
/// `phase_flip` marks the pattern after which a pi phase must be applied to
/// the output mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeraldPattern {
    pub outcomes: [Outcome; 2],
    pub phase_flip: bool,
}

pub fn herald_pattern_map(
    first: &DetectorModel,
    second: &DetectorModel,
    policy: HeraldPolicy,
) -> Vec<HeraldPattern> {
    let mut patterns = vec![HeraldPattern {
        outcomes: [first.herald_outcome(), second.silent_outcome()],
        phase_flip: false,
    }];
    if policy == HeraldPolicy::BothPatterns {
        patterns.push(HeraldPattern {
            outcomes: [first.silent_outcome(), second.herald_outcome()],
            phase_flip: true,
        });
    }
    patterns
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{completeness_defect, measure_povm};

    fn click_prob(det: &DetectorModel, n: usize) -> f64 {
        let map = detection_map(det, 3).unwrap();
        map.weights(Outcome::Click).unwrap()[n]
    }

    #[test]
    fn lossy_photon_examples() {
        let rho = lossy_single_photon(&SourceModel::ideal(), 3).unwrap();
        assert_eq!(rho.element(&[1], &[1]).re, 1.0);
        let rho = lossy_single_photon(&SourceModel::new(0.0).unwrap(), 3).unwrap();
        assert_eq!(rho.element(&[0], &[0]).re, 1.0);
        let rho = lossy_single_photon(&SourceModel::new(0.85).unwrap(), 3).unwrap();
        assert!((rho.element(&[1], &[1]).re - 0.85).abs() < 1e-15);
        assert!((rho.element(&[0], &[0]).re - 0.15).abs() < 1e-15);
        assert!(SourceModel::new(1.1).is_err());
    }

    #[test]
    fn click_examples() {
        assert!((click_prob(&DetectorModel::ideal(), 1) - 1.0).abs() < 1e-15);
        let lossy = DetectorModel::new(0.7, 0.0, false).unwrap();
        assert!((click_prob(&lossy, 1) - 0.7).abs() < 1e-15);
        let dark = DetectorModel::new(1.0, 2e-4, false).unwrap();
        assert!((click_prob(&dark, 0) - 2e-4).abs() < 1e-15);
    }

    #[test]
    fn click_through_measurement() {
        let det = DetectorModel::new(0.6, 0.0, false).unwrap();
        let map = detection_map(&det, 3).unwrap();
        let one = lossy_single_photon(&SourceModel::ideal(), 3).unwrap();
        // measuring the only mode is not allowed, so pad with a vacuum mode
        let two = crate::fock::tensor_product(&one, &lossy_single_photon(&SourceModel::new(0.0).unwrap(), 3).unwrap()).unwrap();
        let (p, _) = measure_povm(&two, 0, map.element(Outcome::Click).unwrap()).unwrap();
        assert!((p - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_detectors() {
        assert!(DetectorModel::new(0.9, 1.0, false).is_err());
        assert!(DetectorModel::new(1.2, 0.0, false).is_err());
        let noisy = DetectorModel::new(0.9, 0.05, false).unwrap();
        assert!(matches!(detection_map(&noisy, 3), Err(Error::ThermalTail { .. })));
        assert!(detection_map(&noisy, 12).is_ok());
    }

    #[test]
    fn thermal_state_shape() {
        let th = ThermalState::new(1e-4, 3).unwrap();
        assert!(th.tail_mass() < 1e-12);
        let p = th.probabilities();
        assert!((p[1] / p[0] - 1e-4 / (1.0 + 1e-4)).abs() < 1e-18);
        let rho = th.to_density().unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(ThermalState::new(-1.0, 3).is_err());
    }

    #[test]
    fn elements_complete_and_match_closed_form() {
        for pnr in [false, true] {
            let det = DetectorModel::new(0.83, 1e-4, pnr).unwrap();
            let map = detection_map(&det, 3).unwrap();
            let els: Vec<_> = map.elements.iter().map(|(_, e)| e.clone()).collect();
            assert!(completeness_defect(&els) < 1e-12);
            for &o in det.outcomes() {
                let w = map.weights(o).unwrap();
                for (n, &wn) in w.iter().enumerate() {
                    assert!((wn - det.outcome_probability(o, n)).abs() < 1e-12, "{o} n={n}");
                }
            }
        }
    }

    #[test]
    fn herald_patterns() {
        let d = DetectorModel::ideal();
        let both = herald_pattern_map(&d, &d, HeraldPolicy::BothPatterns);
        assert_eq!(both.len(), 2);
        assert_eq!(both[0].outcomes, [Outcome::Click, Outcome::NoClick]);
        assert!(!both[0].phase_flip && both[1].phase_flip);
        assert_eq!(herald_pattern_map(&d, &d, HeraldPolicy::SinglePattern).len(), 1);
        let p = DetectorModel::ideal_pnr();
        assert_eq!(
            herald_pattern_map(&p, &p, HeraldPolicy::SinglePattern)[0].outcomes,
            [Outcome::One, Outcome::Zero]
        );
    }
}
