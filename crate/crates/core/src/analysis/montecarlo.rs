//! Trajectory sampling of the distribution circuits.
//!
//! Each shot draws source emissions, unravels every loss element into
//! "photon lost" / "photon kept" jumps on single-photon wavefunctions,
//! propagates the survivors through the heralding beam splitter, samples a
//! photon-number configuration by the Born rule and finally samples the
//! detectors (binomial loss plus thermal noise photons). Nothing here uses
//! the density-matrix code.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::devices::{herald_pattern_map, DetectorModel, Outcome};
use crate::protocols::{direct_balanced_tau, ProtocolConfig, Scheme};
use crate::Result;

const A1: usize = 0;
const A2: usize = 1;
const B1: usize = 2;
const B2: usize = 3;

type Wave = [Complex64; 4];

#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub shots: u64,
    pub seed: u64,
    pub p_hat: f64,
    pub p_se: f64,
    pub x_hat: f64,
    pub x_se: f64,
    pub heralded: u64,
    pub output_vacuum: u64,
    pub output_one: u64,
    pub output_two: u64,
}

pub fn monte_carlo_oracle(config: &ProtocolConfig, shots: u64, seed: u64) -> Result<McEstimate> {
    config.validate()?;
    let shots = shots.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0u64;
    let mut tally = [0u64; 3];
    let mut herald_count = 0u64;
    for _ in 0..shots {
        match config.scheme {
            Scheme::Direct => {
                let (sent, out) = direct_shot(config, &mut rng);
                successes += sent as u64;
                herald_count += 1;
                tally[out.min(2)] += 1;
            }
            Scheme::End | Scheme::Middle => {
                if let Some(out) = nla_shot(config, &mut rng) {
                    successes += 1;
                    herald_count += 1;
                    tally[out.min(2)] += 1;
                }
            }
        }
    }
    let n = shots as f64;
    let p_hat = successes as f64 / n;
    let p_se = (p_hat * (1.0 - p_hat) / n).sqrt();
    let (n0, n1) = (tally[0] as f64, tally[1] as f64);
    let x_hat = if n0 > 0.0 { n1 / n0 } else { f64::INFINITY };
    // delta method for a ratio of multinomial counts: var(ln X) = 1/n1 + 1/n0
    let x_se = if n0 > 0.0 && n1 > 0.0 {
        x_hat * (1.0 / n1 + 1.0 / n0).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(McEstimate {
        shots,
        seed,
        p_hat,
        p_se,
        x_hat,
        x_se,
        heralded: herald_count,
        output_vacuum: tally[0],
        output_one: tally[1],
        output_two: tally[2],
    })
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.random::<f64>() < p
}

fn thin(rng: &mut ChaCha8Rng, n: usize, keep: f64) -> usize {
    (0..n).filter(|_| bernoulli(rng, keep)).count()
}

/// Returns whether the channel photon reached Bob's detector and how many
/// photons the two characterization detectors saw for the shared state.
fn direct_shot(config: &ProtocolConfig, rng: &mut ChaCha8Rng) -> (bool, usize) {
    let eps = config.source_alice.efficiency;
    let d_a = config.char_detectors[0].efficiency;
    let d_b = config.char_detectors[1].efficiency;
    let sent = bernoulli(rng, eps) && bernoulli(rng, config.eta) && bernoulli(rng, d_b);

    let mut out = 0;
    if bernoulli(rng, eps) {
        let tau_d = direct_balanced_tau(config.tau, config.eta);
        if bernoulli(rng, tau_d) {
            out += bernoulli(rng, d_a) as usize;
        } else {
            let per = config.eta.powf(1.0 / config.channel_segments as f64);
            let survived = (0..config.channel_segments).all(|_| bernoulli(rng, per));
            if survived {
                out += bernoulli(rng, d_b) as usize;
            }
        }
    }
    (sent, out)
}

/// Loss jump on one mode of a single-photon wavefunction; `false` if lost.
fn lossy_mode(rng: &mut ChaCha8Rng, wave: &mut Wave, mode: usize, eta: f64) -> bool {
    let weight = wave[mode].norm_sqr();
    if bernoulli(rng, weight * (1.0 - eta)) {
        return false;
    }
    wave[mode] *= eta.sqrt();
    let norm: f64 = wave.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in wave.iter_mut() {
        *a /= norm;
    }
    true
}

fn herald_beam_splitter(wave: &mut Wave) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a2, b1) = (wave[A2], wave[B1]);
    wave[A2] = (a2 - b1) * s;
    wave[B1] = (a2 + b1) * s;
}

fn sample_mode(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.len() - 1
}

fn detector_outcome(rng: &mut ChaCha8Rng, det: &DetectorModel, photons: usize) -> Outcome {
    let mut count = thin(rng, photons, det.efficiency);
    let nu = det.thermal_mean();
    let ratio = nu / (1.0 + nu);
    while bernoulli(rng, ratio) {
        count += 1;
    }
    match (det.pnr, count) {
        (false, 0) => Outcome::NoClick,
        (false, _) => Outcome::Click,
        (true, 0) => Outcome::Zero,
        (true, 1) => Outcome::One,
        (true, _) => Outcome::TwoOrMore,
    }
}

/// One shot of an amplifier scheme; `Some(output photons)` when heralded.
fn nla_shot(config: &ProtocolConfig, rng: &mut ChaCha8Rng) -> Option<usize> {
    let zero = Complex64::new(0.0, 0.0);
    let mut photons: Vec<Wave> = Vec::with_capacity(2);
    if bernoulli(rng, config.source_alice.efficiency) {
        let mut w = [zero; 4];
        w[A1] = Complex64::new(config.tau.sqrt(), 0.0);
        w[A2] = Complex64::new((1.0 - config.tau).sqrt(), 0.0);
        photons.push(w);
    }
    if bernoulli(rng, config.source_bob.efficiency) {
        let mut w = [zero; 4];
        w[B1] = Complex64::new((1.0 - config.t).sqrt(), 0.0);
        w[B2] = Complex64::new(config.t.sqrt(), 0.0);
        photons.push(w);
    }

    let (arm_a, arm_b) = match config.scheme {
        Scheme::Middle => (config.eta.sqrt(), config.eta.sqrt()),
        _ => (config.eta, 1.0),
    };
    let segs = config.channel_segments;
    let per_a = arm_a.powf(1.0 / segs as f64);
    let per_b = arm_b.powf(1.0 / segs as f64);
    photons.retain_mut(|w| {
        for _ in 0..segs {
            if !lossy_mode(rng, w, A2, per_a) {
                return false;
            }
        }
        if arm_b < 1.0 {
            for _ in 0..segs {
                if !lossy_mode(rng, w, B1, per_b) {
                    return false;
                }
            }
        }
        true
    });
    for w in photons.iter_mut() {
        herald_beam_splitter(w);
    }

    let mut counts = [0usize; 4];
    match photons.as_slice() {
        [] => {}
        [u] => {
            let probs: Vec<f64> = u.iter().map(|a| a.norm_sqr()).collect();
            counts[sample_mode(rng, &probs)] += 1;
        }
        [u, v] => {
            if bernoulli(rng, config.visibility) {
                // bosonic two-photon amplitudes; u and v are orthogonal
                let mut pairs = Vec::with_capacity(10);
                let mut probs = Vec::with_capacity(10);
                for i in 0..4 {
                    for j in i..4 {
                        let amp = if i == j {
                            u[i] * v[i] * std::f64::consts::SQRT_2
                        } else {
                            u[i] * v[j] + u[j] * v[i]
                        };
                        pairs.push((i, j));
                        probs.push(amp.norm_sqr());
                    }
                }
                let (i, j) = pairs[sample_mode(rng, &probs)];
                counts[i] += 1;
                counts[j] += 1;
            } else {
                for w in [u, v] {
                    let probs: Vec<f64> = w.iter().map(|a| a.norm_sqr()).collect();
                    counts[sample_mode(rng, &probs)] += 1;
                }
            }
        }
        _ => unreachable!("at most two photons"),
    }

    let o0 = detector_outcome(rng, &config.herald_detectors[0], counts[B1]);
    let o1 = detector_outcome(rng, &config.herald_detectors[1], counts[A2]);
    let accepted = herald_pattern_map(&config.herald_detectors[0], &config.herald_detectors[1], config.herald_policy)
        .iter()
        .any(|p| p.outcomes == [o0, o1]);
    if !accepted {
        return None;
    }
    let out = thin(rng, counts[A1], config.char_detectors[0].efficiency)
        + thin(rng, counts[B2], config.char_detectors[1].efficiency);
    Some(out)
}
