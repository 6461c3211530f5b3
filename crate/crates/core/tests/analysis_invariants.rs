use proptest::prelude::*;

use nla_core::analysis::{
    distance_from_eta, eta_from_distance, evaluate_point, fit_scaling_exponent, log_grid, monte_carlo_oracle,
    optimal_gain_setting, run_sweep, tune_gain_for_fidelity, GainMode, SweepSpec, SweepVariable,
};
use nla_core::devices::DetectorModel;
use nla_core::protocols::{run_protocol, ProtocolConfig, Scheme};
use nla_core::Error;

fn eta_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

proptest! {
    #[test]
    fn distance_round_trip(km in 0.0f64..500.0) {
        let back = distance_from_eta(eta_from_distance(km, 0.2).unwrap(), 0.2).unwrap();
        prop_assert!((back - km).abs() < 1e-12 * km.max(1.0));
    }
}

#[test]
fn distance_examples() {
    assert_eq!(eta_from_distance(0.0, 0.2).unwrap(), 1.0);
    assert!((eta_from_distance(50.0, 0.2).unwrap() - 0.1).abs() < 1e-15);
    assert!((eta_from_distance(100.0, 0.2).unwrap() - 0.01).abs() < 1e-16);
    assert!(eta_from_distance(-1.0, 0.2).is_err());
}

#[test]
fn gain_setting_examples() {
    assert!((optimal_gain_setting(Scheme::End, 0.5, 0.25).unwrap() - 0.8).abs() < 1e-15);
    assert_eq!(optimal_gain_setting(Scheme::Middle, 0.5, 0.25).unwrap(), 0.5);
    assert!((optimal_gain_setting(Scheme::End, 0.5, 1.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(matches!(optimal_gain_setting(Scheme::Direct, 0.5, 0.5), Err(Error::NoGainSetting)));
}

#[test]
fn tuner_examples() {
    let end = ProtocolConfig::ideal_pnr(Scheme::End, 0.5, 0.5, 0.25);
    let r = tune_gain_for_fidelity(&end, Scheme::End).unwrap();
    assert!((r.t_star - 0.8).abs() < 1e-3, "{}", r.t_star);
    assert!((r.f_star - 1.0).abs() < 1e-9);
    let mid = ProtocolConfig::ideal_pnr(Scheme::Middle, 0.5, 0.5, 0.25);
    let r = tune_gain_for_fidelity(&mid, Scheme::Middle).unwrap();
    assert!((r.t_star - 0.5).abs() < 1e-3);
    assert!(matches!(tune_gain_for_fidelity(&mid, Scheme::Direct), Err(Error::NoGainSetting)));
}

#[test]
fn tuned_fidelity_dominates_analytic_and_grid() {
    for scheme in [Scheme::End, Scheme::Middle] {
        let mut c = ProtocolConfig::fitted(scheme, 0.5, 0.5, 0.02);
        c.herald_detectors = [DetectorModel::new(0.95, 5e-4, false).unwrap(); 2];
        let tuned = tune_gain_for_fidelity(&c, scheme).unwrap();
        let analytic = evaluate_point(&c, GainMode::Optimal).unwrap().fidelity;
        assert!(tuned.f_star >= analytic - 1e-9);
        // coarse grid search as an oracle for the maximum
        let best = (1..100)
            .map(|k| run_protocol(&c.with_t(k as f64 / 100.0)).unwrap().fidelity)
            .fold(0.0, f64::max);
        assert!(tuned.f_star >= best - 1e-6, "{} vs {best}", tuned.f_star);
    }
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let spec = SweepSpec::new(
        SweepVariable::Eta,
        eta_grid(0.01, 0.49, 12),
        vec![
            ProtocolConfig::fitted(Scheme::End, 0.5, 0.5, 1.0),
            ProtocolConfig::fitted(Scheme::Middle, 0.5, 0.5, 1.0),
        ],
        GainMode::Optimal,
    );
    let a = run_sweep(&spec).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run_sweep(&spec).unwrap());
    assert_eq!(a.len(), 24);
    for (x, y) in a.iter().zip(&b) {
        let (rx, ry) = (x.result().unwrap(), y.result().unwrap());
        assert_eq!(rx.p.to_bits(), ry.p.to_bits());
        assert_eq!(rx.x.to_bits(), ry.x.to_bits());
        assert_eq!(x.config, y.config);
    }
    assert!(a[..12].iter().all(|r| r.config.scheme == Scheme::End));
}

#[test]
fn sweep_rejects_bad_grids() {
    let t = vec![ProtocolConfig::ideal(Scheme::Middle, 0.5, 0.5, 1.0)];
    let spec = |g: Vec<f64>| SweepSpec::new(SweepVariable::Eta, g, t.clone(), GainMode::Optimal);
    assert!(run_sweep(&spec(vec![0.2, 0.1])).is_err());
    assert!(run_sweep(&spec(vec![])).is_err());
    assert!(run_sweep(&spec(vec![0.5, 1.5])).is_err());
}

#[test]
fn direct_sweep_reproduces_eta() {
    let grid = vec![0.1, 0.3, 0.7];
    let spec = SweepSpec::new(
        SweepVariable::Eta,
        grid.clone(),
        vec![ProtocolConfig::ideal(Scheme::Direct, 0.5, 0.5, 1.0)],
        GainMode::Optimal,
    );
    let rows = run_sweep(&spec).unwrap();
    for (row, eta) in rows.iter().zip(grid) {
        assert!((row.result().unwrap().p - eta).abs() < 1e-12);
    }
}

#[test]
fn ideal_probabilities_fall_with_loss() {
    let grid = eta_grid(0.01, 0.49, 25);
    for scheme in [Scheme::End, Scheme::Middle] {
        let spec = SweepSpec::new(
            SweepVariable::Eta,
            grid.clone(),
            vec![ProtocolConfig::ideal(scheme, 0.5, 0.5, 1.0)],
            GainMode::Optimal,
        );
        let p: Vec<f64> = run_sweep(&spec).unwrap().iter().map(|r| r.result().unwrap().p).collect();
        assert!(p.windows(2).all(|w| w[0] <= w[1]), "{scheme}: {p:?}");
    }
}

#[test]
fn midpoint_is_ahead_on_ideal_grid() {
    for eta in eta_grid(0.01, 0.49, 13) {
        let end = evaluate_point(&ProtocolConfig::ideal(Scheme::End, 0.5, 0.5, eta), GainMode::Optimal).unwrap();
        let mid = evaluate_point(&ProtocolConfig::ideal(Scheme::Middle, 0.5, 0.5, eta), GainMode::Optimal).unwrap();
        assert!(mid.p > end.p, "eta={eta}");
    }
}

#[test]
fn probability_ratio_grows_with_inverse_root_eta() {
    let etas = log_grid(1e-3, 1e-1, 9);
    let ratios: Vec<f64> = etas
        .iter()
        .map(|&eta| {
            let end = evaluate_point(&ProtocolConfig::ideal(Scheme::End, 0.5, 0.5, eta), GainMode::Optimal).unwrap();
            let mid = evaluate_point(&ProtocolConfig::ideal(Scheme::Middle, 0.5, 0.5, eta), GainMode::Optimal).unwrap();
            mid.p / end.p
        })
        .collect();
    // etas ascend, so 1/sqrt(eta) descends and the ratio must too
    assert!(ratios.windows(2).all(|w| w[0] > w[1]), "{ratios:?}");
}

#[test]
fn midpoint_scaling_exponent() {
    let points: Vec<(f64, f64)> = log_grid(1e-3, 1e-2, 8)
        .into_iter()
        .map(|eta| {
            let r = evaluate_point(&ProtocolConfig::ideal(Scheme::Middle, 0.5, 0.5, eta), GainMode::Optimal).unwrap();
            (eta, r.p)
        })
        .collect();
    let fit = fit_scaling_exponent(&points, 1e-3, 1e-2).unwrap();
    assert!((fit.exponent - 0.5).abs() < 0.05, "{fit:?}");
}

#[test]
fn fitted_purity_is_flat_for_midpoint_only() {
    let grid: Vec<f64> = (1..=5).map(|k| 50.0 * k as f64).collect();
    let x_of = |scheme| -> Vec<f64> {
        let spec = SweepSpec::new(
            SweepVariable::DistanceKm,
            grid.clone(),
            vec![ProtocolConfig::fitted(scheme, 0.5, 0.5, 1.0)],
            GainMode::Optimal,
        );
        run_sweep(&spec).unwrap().iter().map(|r| r.result().unwrap().x).collect()
    };
    let mid = x_of(Scheme::Middle);
    let mean = mid.iter().sum::<f64>() / mid.len() as f64;
    let spread = mid.iter().cloned().fold(f64::MIN, f64::max) - mid.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.25 * mean, "{mid:?}");
    let direct = x_of(Scheme::Direct);
    assert!(direct[0] / direct[4] > 100.0, "{direct:?}");
}

#[test]
fn monte_carlo_direct_example() {
    let c = ProtocolConfig::ideal(Scheme::Direct, 0.5, 0.5, 0.3);
    let mc = monte_carlo_oracle(&c, 200_000, 11).unwrap();
    assert!((mc.p_hat - 0.3).abs() < 3.0 * mc.p_se);
    let again = monte_carlo_oracle(&c, 200_000, 11).unwrap();
    assert_eq!(mc.p_hat.to_bits(), again.p_hat.to_bits());
}

#[test]
fn monte_carlo_tracks_density_matrix_with_imperfections() {
    for scheme in [Scheme::End, Scheme::Middle] {
        let mut c = ProtocolConfig::fitted(scheme, 0.5, 0.6, 0.2);
        c.visibility = 0.9;
        let exact = run_protocol(&c).unwrap();
        let mc = monte_carlo_oracle(&c, 200_000, 5).unwrap();
        assert!((mc.p_hat - exact.p).abs() < 4.0 * mc.p_se, "{scheme} p {} vs {}", mc.p_hat, exact.p);
        assert!((mc.x_hat - exact.x).abs() < 4.0 * mc.x_se, "{scheme} X {} vs {}", mc.x_hat, exact.x);
    }
}
