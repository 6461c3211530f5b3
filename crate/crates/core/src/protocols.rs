//! Entanglement distribution schemes built from the quantum-scissors
//! amplifier.
//!
//! Mode layout of the four-mode circuit: `a1 = 0`, `a2 = 1`, `b1 = 2`,
//! `b2 = 3`. Alice keeps `a1` and sends `a2`; Bob's ancilla photon is split
//! between `b1` (towards the heralding station) and `b2` (his output). The
//! heralding station mixes `a2` and `b1` on a 50:50 beam splitter. Herald
//! detector 0 watches the `b1` output port and detector 1 the `a2` port; with
//! the beam-splitter convention of [`crate::fock::beam_splitter_unitary`] the
//! pattern that clicks on the `a2` port needs a pi phase on `b2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::devices::{
    detection_map, herald_pattern_map, lossy_single_photon, DetectionMap, DetectorModel, HeraldPolicy,
    Outcome, SourceModel, DEFAULT_DARK_PROB,
};
use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::fock::{
    apply_beam_splitter, apply_loss, apply_phase, fidelity, measure_povm, measure_total_count,
    project_sector, subspace_populations, tensor_product, DensityOperator, FockBasis, DEFAULT_CUTOFF,
};

/// Herald probabilities below this are treated as "never heralds".
pub const DEGENERATE_P: f64 = 1e-300;

/// Comparison fidelity assigned to direct transmission.
pub const DEFAULT_DIRECT_FIDELITY: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Amplifier at Bob's end of the channel.
    End,
    /// Heralding station at the channel midpoint.
    Middle,
    /// No amplifier.
    Direct,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::End => "end",
            Scheme::Middle => "middle",
            Scheme::Direct => "direct",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "end" => Ok(Scheme::End),
            "middle" => Ok(Scheme::Middle),
            "direct" => Ok(Scheme::Direct),
            other => Err(format!("unknown scheme `{other}` (expected end, middle or direct)")),
        }
    }
}

/// State the output is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetState {
    /// Alice's input `sqrt(tau)|10> + sqrt(1-tau)|01>`.
    #[default]
    Input,
    /// `(|10> + |01>)/sqrt(2)` regardless of `tau`.
    MaximallyEntangled,
}

impl TargetState {
    pub fn id(&self, tau: f64) -> String {
        match self {
            TargetState::Input => format!("psi_in(tau={tau})"),
            TargetState::MaximallyEntangled => "D".to_string(),
        }
    }

    fn amplitudes(&self, tau: f64) -> (f64, f64) {
        match self {
            TargetState::Input => (tau.sqrt(), (1.0 - tau).sqrt()),
            TargetState::MaximallyEntangled => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub scheme: Scheme,
    pub tau: f64,
    /// Ancilla beam-splitter transmissivity; ignored by the direct scheme.
    pub t: f64,
    /// Total channel transmissivity.
    pub eta: f64,
    pub source_alice: SourceModel,
    pub source_bob: SourceModel,
    /// `[b1 port, a2 port]`.
    pub herald_detectors: [DetectorModel; 2],
    /// `[a1, b2]`; only their efficiency enters, as loss before the metrics.
    pub char_detectors: [DetectorModel; 2],
    pub herald_policy: HeraldPolicy,
    pub cutoff: usize,
    pub target: TargetState,
    pub direct_fidelity: f64,
    /// The channel loss is applied as this many equal sequential segments.
    pub channel_segments: u32,
    /// Hong-Ou-Mandel visibility at the heralding beam splitter.
    pub visibility: f64,
    /// When set, `p` also requires a photon at the characterization detectors.
    pub count_output_detection: bool,
}

impl ProtocolConfig {
    /// Lossless sources, unit-efficiency click detectors without dark counts.
    pub fn ideal(scheme: Scheme, tau: f64, t: f64, eta: f64) -> Self {
        Self {
            scheme,
            tau,
            t,
            eta,
            source_alice: SourceModel::ideal(),
            source_bob: SourceModel::ideal(),
            herald_detectors: [DetectorModel::ideal(); 2],
            char_detectors: [DetectorModel::ideal(); 2],
            herald_policy: HeraldPolicy::BothPatterns,
            cutoff: DEFAULT_CUTOFF,
            target: TargetState::Input,
            direct_fidelity: DEFAULT_DIRECT_FIDELITY,
            channel_segments: 1,
            visibility: 1.0,
            count_output_detection: false,
        }
    }

    /// Ideal devices with photon-number-resolving heralds.
    pub fn ideal_pnr(scheme: Scheme, tau: f64, t: f64, eta: f64) -> Self {
        let mut c = Self::ideal(scheme, tau, t, eta);
        c.herald_detectors = [DetectorModel::ideal_pnr(); 2];
        c
    }

    /// Fitted experimental device parameters: herald efficiency 0.95,
    /// characterization efficiency 0.80, source efficiency 0.85 for the
    /// midpoint and direct schemes and 0.78 for the end scheme.
    pub fn fitted(scheme: Scheme, tau: f64, t: f64, eta: f64) -> Self {
        let eps = match scheme {
            Scheme::End => 0.78,
            Scheme::Middle | Scheme::Direct => 0.85,
        };
        let mut c = Self::ideal(scheme, tau, t, eta);
        c.source_alice = SourceModel { efficiency: eps };
        c.source_bob = SourceModel { efficiency: eps };
        c.herald_detectors = [DetectorModel {
            efficiency: 0.95,
            dark_click_prob: DEFAULT_DARK_PROB,
            pnr: false,
        }; 2];
        c.char_detectors = [DetectorModel {
            efficiency: 0.80,
            dark_click_prob: 0.0,
            pnr: false,
        }; 2];
        c
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        Self {
            scheme,
            ..self.clone()
        }
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..self.clone() }
    }

    /// Amplitude gain `sqrt(t / (1 - t))`.
    pub fn amplitude_gain(&self) -> f64 {
        (self.t / (1.0 - self.t)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("tau", self.tau)?;
        if self.scheme != Scheme::Direct {
            check_open_unit("t", self.t)?;
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParameter {
                key: "eta",
                value: self.eta,
                reason: "must lie in (0, 1]",
            });
        }
        check_unit("eps1", self.source_alice.efficiency)?;
        check_unit("eps2", self.source_bob.efficiency)?;
        for d in self.herald_detectors.iter() {
            check_unit("delta1", d.efficiency)?;
            dark_check(d.dark_click_prob)?;
        }
        for d in self.char_detectors.iter() {
            check_unit("delta2", d.efficiency)?;
            dark_check(d.dark_click_prob)?;
        }
        if self.cutoff < 2 {
            return Err(Error::InvalidParameter {
                key: "cutoff",
                value: self.cutoff as f64,
                reason: "two photons must fit in the basis",
            });
        }
        check_unit("direct_fidelity", self.direct_fidelity)?;
        check_unit("visibility", self.visibility)?;
        if self.channel_segments == 0 {
            return Err(Error::InvalidParameter {
                key: "channel_segments",
                value: 0.0,
                reason: "need at least one segment",
            });
        }
        Ok(())
    }
}

fn dark_check(d: f64) -> Result<()> {
    if !(0.0..1.0).contains(&d) {
        return Err(Error::InvalidParameter {
            key: "dark_prob",
            value: d,
            reason: "must lie in [0, 1)",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub scheme: Scheme,
    pub tau: f64,
    pub t_used: Option<f64>,
    pub eta: f64,
    /// Herald success probability.
    pub p: f64,
    /// Herald probability times the chance of at least one output detection.
    pub p_coincidence: f64,
    /// Fidelity of the normalized one-photon sector with the target.
    #[serde(rename = "F")]
    pub fidelity: f64,
    /// Fidelity of the whole normalized output with the target.
    #[serde(rename = "F_full")]
    pub fidelity_full: f64,
    #[serde(rename = "X")]
    pub x: f64,
    pub pop_vac: f64,
    pub pop_one: f64,
    pub pop_two: f64,
    pub purity: f64,
    pub target_state_id: String,
    pub degenerate: bool,
    #[serde(skip)]
    pub rho_out: Option<DensityOperator>,
}

/// Alice's `sqrt(tau)|10> + sqrt(1-tau)|01>` on `(a1, a2)`, mixed with
/// vacuum by the source inefficiency.
pub fn prepare_alice_state(tau: f64, source: &SourceModel, cutoff: usize) -> Result<DensityOperator> {
    check_unit("tau", tau)?;
    let photon = lossy_single_photon(source, cutoff)?;
    let vac = lossy_single_photon(&SourceModel { efficiency: 0.0 }, cutoff)?;
    let rho = tensor_product(&photon, &vac)?;
    apply_beam_splitter(&rho, (0, 1), tau)
}

/// Bob's ancilla `sqrt(1-t)|10> + sqrt(t)|01>` on `(b1, b2)`.
pub fn prepare_bob_ancilla(t: f64, source: &SourceModel, cutoff: usize) -> Result<DensityOperator> {
    check_unit("t", t)?;
    let photon = lossy_single_photon(source, cutoff)?;
    let vac = lossy_single_photon(&SourceModel { efficiency: 0.0 }, cutoff)?;
    let rho = tensor_product(&vac, &photon)?;
    apply_beam_splitter(&rho, (1, 0), t)
}

/// Output of the standalone scissors gate.
#[derive(Debug, Clone)]
pub struct ScissorsOutput {
    pub p: f64,
    /// Normalized output state of Bob's mode.
    pub output: DensityOperator,
}

impl ScissorsOutput {
    pub fn population_ratio(&self) -> f64 {
        let p0 = self.output.element(&[0], &[0]).re;
        let p1 = self.output.element(&[1], &[1]).re;
        p1 / p0
    }
}

/// Quantum scissors acting on a single-mode input confined to `{|0>, |1>}`.
pub fn scissors_gate_standalone(
    input: &DensityOperator,
    t: f64,
    ancilla: &SourceModel,
    detectors: &[DetectorModel; 2],
    policy: HeraldPolicy,
) -> Result<ScissorsOutput> {
    check_open_unit("t", t)?;
    if input.num_modes() != 1 {
        return Err(Error::BasisMismatch("scissors input must be a single mode".into()));
    }
    let high: f64 = (2..=input.basis().cutoff())
        .map(|n| input.element(&[n as u8], &[n as u8]).re)
        .sum();
    if high > 1e-12 {
        return Err(Error::InvalidParameter {
            key: "input",
            value: high,
            reason: "population above one photon",
        });
    }
    let cutoff = input.basis().cutoff().max(2);
    let input = if input.basis().cutoff() == cutoff {
        input.clone()
    } else {
        rebase_single_mode(input, cutoff)?
    };
    // modes: c (input) = 0, b1 = 1, b2 = 2
    let rho = tensor_product(&input, &prepare_bob_ancilla(t, ancilla, cutoff)?)?;
    let rho = apply_beam_splitter(&rho, (0, 1), 0.5)?;
    let maps = [detection_map(&detectors[0], cutoff)?, detection_map(&detectors[1], cutoff)?];
    let mut total: Option<DensityOperator> = None;
    for pattern in herald_pattern_map(&detectors[0], &detectors[1], policy) {
        let (_, s) = measure_povm(&rho, 1, element(&maps[0], pattern.outcomes[0])?)?;
        let (_, mut s) = measure_povm(&s, 0, element(&maps[1], pattern.outcomes[1])?)?;
        if pattern.phase_flip {
            s = apply_phase(&s, 0, PI)?;
        }
        total = Some(match total {
            None => s,
            Some(acc) => acc.add(&s)?,
        });
    }
    let total = total.expect("at least one herald pattern");
    let p = total.trace();
    let output = total
        .normalized()
        .ok_or(Error::InvalidParameter {
            key: "t",
            value: t,
            reason: "scissors gate never heralds",
        })?;
    Ok(ScissorsOutput { p, output })
}

fn rebase_single_mode(rho: &DensityOperator, cutoff: usize) -> Result<DensityOperator> {
    let basis = Arc::new(FockBasis::new(1, cutoff)?);
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(cutoff + 1, cutoff + 1);
    let old = rho.basis().cutoff();
    for r in 0..=old.min(cutoff) {
        for c in 0..=old.min(cutoff) {
            m[(r, c)] = rho.matrix()[(r, c)];
        }
    }
    DensityOperator::from_matrix(basis, m)
}

fn element(map: &DetectionMap, outcome: Outcome) -> Result<&crate::fock::PovmElement> {
    map.element(outcome)
        .ok_or_else(|| Error::BasisMismatch(format!("detector has no `{outcome}` outcome")))
}

fn segmented_loss(rho: &DensityOperator, mode: usize, eta: f64, segments: u32) -> Result<DensityOperator> {
    let per = eta.powf(1.0 / segments as f64);
    let mut out = rho.clone();
    for _ in 0..segments {
        out = apply_loss(&out, mode, per)?;
    }
    Ok(out)
}

/// Transmissivities of Alice's and Bob's arms into the heralding station.
fn arm_transmissivities(config: &ProtocolConfig) -> (f64, f64) {
    match config.scheme {
        Scheme::End => (config.eta, 1.0),
        Scheme::Middle => (config.eta.sqrt(), config.eta.sqrt()),
        Scheme::Direct => (config.eta, 1.0),
    }
}

/// The four-mode state right after the heralding beam splitter.
fn pre_herald_indistinguishable(config: &ProtocolConfig) -> Result<DensityOperator> {
    let alice = prepare_alice_state(config.tau, &config.source_alice, config.cutoff)?;
    let bob = prepare_bob_ancilla(config.t, &config.source_bob, config.cutoff)?;
    let mut rho = tensor_product(&alice, &bob)?;
    let (ta, tb) = arm_transmissivities(config);
    rho = segmented_loss(&rho, 1, ta, config.channel_segments)?;
    if tb < 1.0 {
        rho = segmented_loss(&rho, 2, tb, config.channel_segments)?;
    }
    apply_beam_splitter(&rho, (1, 2), 0.5)
}

// Unnormalized (a1, b2) state for one accepted herald pattern, photons
// indistinguishable at the heralding beam splitter.
fn herald_branch_indistinguishable(
    rho: &DensityOperator,
    maps: &[DetectionMap; 2],
    outcomes: [Outcome; 2],
) -> Result<DensityOperator> {
    let (_, s) = measure_povm(rho, 2, element(&maps[0], outcomes[0])?)?;
    let (_, s) = measure_povm(&s, 1, element(&maps[1], outcomes[1])?)?;
    Ok(s)
}

/// Six-mode circuit where Bob's photon is orthogonal to Alice's in its
/// internal degree of freedom: `a1=0, a2=1, b1'=2, b2'=3, a2'=4, b1=5`.
fn pre_herald_distinguishable(config: &ProtocolConfig) -> Result<DensityOperator> {
    let alice = prepare_alice_state(config.tau, &config.source_alice, config.cutoff)?;
    let bob = prepare_bob_ancilla(config.t, &config.source_bob, config.cutoff)?;
    let vac2 = tensor_product(
        &lossy_single_photon(&SourceModel { efficiency: 0.0 }, config.cutoff)?,
        &lossy_single_photon(&SourceModel { efficiency: 0.0 }, config.cutoff)?,
    )?;
    let mut rho = tensor_product(&tensor_product(&alice, &bob)?, &vac2)?;
    let (ta, tb) = arm_transmissivities(config);
    rho = segmented_loss(&rho, 1, ta, config.channel_segments)?;
    if tb < 1.0 {
        rho = segmented_loss(&rho, 2, tb, config.channel_segments)?;
    }
    rho = apply_beam_splitter(&rho, (1, 5), 0.5)?;
    apply_beam_splitter(&rho, (4, 2), 0.5)
}

fn herald_branch_distinguishable(
    rho: &DensityOperator,
    maps: &[DetectionMap; 2],
    outcomes: [Outcome; 2],
) -> Result<DensityOperator> {
    let w0 = maps[0]
        .weights(outcomes[0])
        .ok_or_else(|| Error::BasisMismatch("detector element is not diagonal".into()))?;
    let w1 = maps[1]
        .weights(outcomes[1])
        .ok_or_else(|| Error::BasisMismatch("detector element is not diagonal".into()))?;
    // b1 port: modes 2 and 5; leaves (a1, a2, b2', a2')
    let (_, s) = measure_total_count(rho, &[2, 5], &w0)?;
    // a2 port: modes 1 and 3 of the reduced state; leaves (a1, b2')
    let (_, s) = measure_total_count(&s, &[1, 3], &w1)?;
    Ok(s)
}

/// Probability of every joint herald outcome, accepted or not.
pub fn herald_outcome_table(config: &ProtocolConfig) -> Result<Vec<([Outcome; 2], f64)>> {
    config.validate()?;
    if config.scheme == Scheme::Direct {
        return Err(Error::NoGainSetting);
    }
    let maps = [
        detection_map(&config.herald_detectors[0], config.cutoff)?,
        detection_map(&config.herald_detectors[1], config.cutoff)?,
    ];
    let rho = pre_herald_indistinguishable(config)?;
    let mut table = Vec::new();
    for &o0 in config.herald_detectors[0].outcomes() {
        for &o1 in config.herald_detectors[1].outcomes() {
            let s = herald_branch_indistinguishable(&rho, &maps, [o0, o1])?;
            table.push(([o0, o1], s.trace()));
        }
    }
    Ok(table)
}

/// Unnormalized heralded `(a1, b2)` state, before characterization loss.
pub fn heralded_state(config: &ProtocolConfig) -> Result<DensityOperator> {
    config.validate()?;
    if config.scheme == Scheme::Direct {
        return Err(Error::NoGainSetting);
    }
    let maps = [
        detection_map(&config.herald_detectors[0], config.cutoff)?,
        detection_map(&config.herald_detectors[1], config.cutoff)?,
    ];
    let patterns = herald_pattern_map(&config.herald_detectors[0], &config.herald_detectors[1], config.herald_policy);

    let mut branches: Vec<(f64, DensityOperator, bool)> = Vec::new();
    if config.visibility > 0.0 {
        branches.push((config.visibility, pre_herald_indistinguishable(config)?, false));
    }
    if config.visibility < 1.0 {
        branches.push((1.0 - config.visibility, pre_herald_distinguishable(config)?, true));
    }

    let mut total: Option<DensityOperator> = None;
    for (weight, rho, distinguishable) in &branches {
        for pattern in &patterns {
            let mut s = if *distinguishable {
                herald_branch_distinguishable(rho, &maps, pattern.outcomes)?
            } else {
                herald_branch_indistinguishable(rho, &maps, pattern.outcomes)?
            };
            if pattern.phase_flip {
                s = apply_phase(&s, 1, PI)?;
            }
            let s = s.scaled(*weight);
            total = Some(match total {
                None => s,
                Some(acc) => acc.add(&s)?,
            });
        }
    }
    Ok(total.expect("at least one branch and pattern"))
}

fn target_density(target: TargetState, tau: f64, basis: Arc<FockBasis>) -> Result<DensityOperator> {
    let (ca, cb) = target.amplitudes(tau);
    DensityOperator::from_superposition(
        basis,
        &[(&[1, 0], Complex64::new(ca, 0.0)), (&[0, 1], Complex64::new(cb, 0.0))],
    )
}

/// Alice's state parameter for direct transmission so that the surviving
/// one-photon sector has the target's amplitude ratio.
pub fn direct_balanced_tau(tau: f64, eta: f64) -> f64 {
    tau * eta / (1.0 - tau + tau * eta)
}

pub fn run_protocol(config: &ProtocolConfig) -> Result<RunResult> {
    config.validate()?;
    match config.scheme {
        Scheme::Direct => run_direct(config),
        Scheme::End | Scheme::Middle => run_nla(config),
    }
}

fn run_nla(config: &ProtocolConfig) -> Result<RunResult> {
    let heralded = heralded_state(config)?;
    let p_herald = heralded.trace();
    if p_herald < DEGENERATE_P {
        return Ok(degenerate_result(config, p_herald, Some(config.t)));
    }
    let rho = apply_loss(&heralded, 0, config.char_detectors[0].efficiency)?;
    let rho = apply_loss(&rho, 1, config.char_detectors[1].efficiency)?;
    let rho_out = rho.normalized().expect("loss preserves trace");
    let mut result = metrics(config, rho_out, p_herald, Some(config.t))?;
    result.p_coincidence = p_herald * (1.0 - result.pop_vac);
    if config.count_output_detection {
        result.p = result.p_coincidence;
    }
    Ok(result)
}

fn run_direct(config: &ProtocolConfig) -> Result<RunResult> {
    let cutoff = config.cutoff;
    // photon sent through the channel to Bob's characterization detector
    let sent = lossy_single_photon(&config.source_alice, cutoff)?;
    let pad = lossy_single_photon(&SourceModel { efficiency: 0.0 }, cutoff)?;
    let sent = tensor_product(&pad, &sent)?;
    let sent = apply_loss(&sent, 1, config.eta)?;
    let sent = apply_loss(&sent, 1, config.char_detectors[1].efficiency)?;
    let p = subspace_populations(&sent).one;

    let tau_d = direct_balanced_tau(config.tau, config.eta);
    let shared = prepare_alice_state(tau_d, &config.source_alice, cutoff)?;
    let shared = segmented_loss(&shared, 1, config.eta, config.channel_segments)?;
    let shared = apply_loss(&shared, 0, config.char_detectors[0].efficiency)?;
    let shared = apply_loss(&shared, 1, config.char_detectors[1].efficiency)?;
    let rho_out = shared.normalized().ok_or(Error::Unnormalized(0.0))?;
    let mut result = metrics(config, rho_out, p, None)?;
    result.fidelity = config.direct_fidelity;
    result.p_coincidence = p;
    Ok(result)
}

fn metrics(config: &ProtocolConfig, rho_out: DensityOperator, p: f64, t_used: Option<f64>) -> Result<RunResult> {
    let pops = subspace_populations(&rho_out);
    let x = if pops.vacuum > 0.0 {
        pops.one / pops.vacuum
    } else {
        f64::INFINITY
    };
    let target = target_density(config.target, config.tau, rho_out.basis_arc().clone())?;
    let sector = project_sector(&rho_out, 1);
    let f_sector = match sector.normalized() {
        Some(s) => fidelity(&s, &target)?,
        None => 0.0,
    };
    let f_full = fidelity(&rho_out, &target)?;
    Ok(RunResult {
        scheme: config.scheme,
        tau: config.tau,
        t_used,
        eta: config.eta,
        p,
        p_coincidence: p,
        fidelity: f_sector,
        fidelity_full: f_full,
        x,
        pop_vac: pops.vacuum,
        pop_one: pops.one,
        pop_two: pops.two,
        purity: rho_out.purity(),
        target_state_id: config.target.id(config.tau),
        degenerate: false,
        rho_out: Some(rho_out),
    })
}

fn degenerate_result(config: &ProtocolConfig, p: f64, t_used: Option<f64>) -> RunResult {
    RunResult {
        scheme: config.scheme,
        tau: config.tau,
        t_used,
        eta: config.eta,
        p,
        p_coincidence: 0.0,
        fidelity: f64::NAN,
        fidelity_full: f64::NAN,
        x: f64::NAN,
        pop_vac: f64::NAN,
        pop_one: f64::NAN,
        pop_two: f64::NAN,
        purity: f64::NAN,
        target_state_id: config.target.id(config.tau),
        degenerate: true,
        rho_out: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::purity_from_ratio;

    #[test]
    fn alice_state_examples() {
        let d = prepare_alice_state(0.5, &SourceModel::ideal(), 3).unwrap();
        assert!((d.element(&[1, 0], &[0, 1]).re - 0.5).abs() < 1e-15);
        assert!((d.element(&[1, 0], &[1, 0]).re - 0.5).abs() < 1e-15);
        let ten = prepare_alice_state(1.0, &SourceModel::ideal(), 3).unwrap();
        assert!((ten.element(&[1, 0], &[1, 0]).re - 1.0).abs() < 1e-15);
        let vac = prepare_alice_state(0.5, &SourceModel { efficiency: 0.0 }, 3).unwrap();
        assert!((vac.element(&[0, 0], &[0, 0]).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bob_ancilla_examples() {
        let s = prepare_bob_ancilla(0.5, &SourceModel::ideal(), 3).unwrap();
        assert!((s.element(&[1, 0], &[0, 1]).re - 0.5).abs() < 1e-15);
        let s = prepare_bob_ancilla(1.0, &SourceModel::ideal(), 3).unwrap();
        assert!((s.element(&[0, 1], &[0, 1]).re - 1.0).abs() < 1e-15);
        let t: f64 = 0.8;
        let s = prepare_bob_ancilla(t, &SourceModel { efficiency: 0.85 }, 3).unwrap();
        assert!((s.element(&[1, 0], &[1, 0]).re - 0.85 * 0.2).abs() < 1e-15);
        assert!((s.element(&[0, 1], &[0, 1]).re - 0.85 * 0.8).abs() < 1e-15);
        assert!((s.element(&[1, 0], &[0, 1]).re - 0.85 * (t * (1.0 - t)).sqrt()).abs() < 1e-15);
        assert!((s.element(&[0, 0], &[0, 0]).re - 0.15).abs() < 1e-15);
    }

    #[test]
    fn direct_ideal_p_is_eta() {
        let r = run_protocol(&ProtocolConfig::ideal(Scheme::Direct, 0.5, 0.5, 0.3)).unwrap();
        assert!((r.p - 0.3).abs() < 1e-15);
        assert_eq!(r.fidelity, DEFAULT_DIRECT_FIDELITY);
        assert!(r.t_used.is_none());
    }

    #[test]
    fn direct_purity_ratio_tracks_eta() {
        // X = 2 eta / (1 - eta) for tau = 0.5 and ideal devices
        for eta in [0.5, 0.1, 0.01] {
            let r = run_protocol(&ProtocolConfig::ideal(Scheme::Direct, 0.5, 0.5, eta)).unwrap();
            assert!((r.x - 2.0 * eta / (1.0 - eta)).abs() < 1e-12, "eta={eta} X={}", r.x);
        }
    }

    #[test]
    fn config_validation_names_keys() {
        let mut c = ProtocolConfig::ideal(Scheme::End, 0.5, 0.5, 0.5);
        c.tau = 1.0;
        assert!(matches!(run_protocol(&c), Err(Error::InvalidParameter { key: "tau", .. })));
        let c = ProtocolConfig::ideal(Scheme::End, 0.5, 0.0, 0.5);
        assert!(matches!(run_protocol(&c), Err(Error::InvalidParameter { key: "t", .. })));
        let c = ProtocolConfig::ideal(Scheme::Middle, 0.5, 0.5, 0.0);
        assert!(matches!(run_protocol(&c), Err(Error::InvalidParameter { key: "eta", .. })));
        let mut c = ProtocolConfig::ideal(Scheme::Middle, 0.5, 0.5, 0.5);
        c.herald_detectors[1].dark_click_prob = 1.0;
        assert!(matches!(run_protocol(&c), Err(Error::InvalidParameter { key: "dark_prob", .. })));
        // direct ignores t
        assert!(run_protocol(&ProtocolConfig::ideal(Scheme::Direct, 0.5, 0.0, 0.5)).is_ok());
    }

    #[test]
    fn degenerate_herald_is_flagged() {
        // no photons at all: the ideal heralds can never click
        let mut c = ProtocolConfig::ideal_pnr(Scheme::End, 0.5, 0.5, 0.5);
        c.source_alice.efficiency = 0.0;
        c.source_bob.efficiency = 0.0;
        let r = run_protocol(&c).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p, 0.0);
        assert!(r.x.is_nan());
    }

    #[test]
    fn pattern_branches_are_symmetric() {
        let c = ProtocolConfig::ideal_pnr(Scheme::End, 0.5, 0.8, 0.25);
        let maps = [detection_map(&c.herald_detectors[0], 3).unwrap(), detection_map(&c.herald_detectors[1], 3).unwrap()];
        let rho = pre_herald_indistinguishable(&c).unwrap();
        let a = herald_branch_indistinguishable(&rho, &maps, [Outcome::One, Outcome::Zero]).unwrap();
        let b = herald_branch_indistinguishable(&rho, &maps, [Outcome::Zero, Outcome::One]).unwrap();
        assert!((a.trace() - b.trace()).abs() < 1e-14);
        let b = apply_phase(&b, 1, PI).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-14);
        // without the correction the coherence has the opposite sign
        let raw = herald_branch_indistinguishable(&rho, &maps, [Outcome::Zero, Outcome::One]).unwrap();
        assert!((a.element(&[1, 0], &[0, 1]) + raw.element(&[1, 0], &[0, 1])).norm() < 1e-14);
    }

    #[test]
    fn ideal_purity_relation_holds() {
        let r = run_protocol(&ProtocolConfig::ideal_pnr(Scheme::Middle, 0.5, 0.5, 0.1)).unwrap();
        assert!(r.pop_two < 1e-12);
        assert!((r.purity - purity_from_ratio(r.x)).abs() < 1e-9);
    }

    #[test]
    fn full_visibility_matches_default_path() {
        let mut c = ProtocolConfig::fitted(Scheme::Middle, 0.5, 0.5, 0.2);
        let base = run_protocol(&c).unwrap();
        c.visibility = 1.0;
        let again = run_protocol(&c).unwrap();
        assert_eq!(base.p, again.p);
    }

    #[test]
    fn distinguishable_photons_remove_coherence() {
        let mut c = ProtocolConfig::ideal_pnr(Scheme::End, 0.5, 0.8, 0.25);
        c.visibility = 0.0;
        let r = run_protocol(&c).unwrap();
        // which-path information leaves the one-photon sector an even mixture
        assert!((r.fidelity - 0.5).abs() < 1e-9, "F={}", r.fidelity);
        c.visibility = 0.9;
        let partial = run_protocol(&c).unwrap();
        assert!(partial.fidelity < 1.0 - 1e-3 && partial.fidelity > 0.5);
    }
}
