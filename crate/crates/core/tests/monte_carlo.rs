use qi_rangekit::detection_mc::{
    detector_gain_experiment, estimate_covariance, roc_estimate, sample_quadratures, Hypothesis, ReturnChannelModel,
    RocRequest, Seed,
};
use qi_rangekit::quantum_states::{coherent_covariance, tmsv_covariance, MeanPhotonNumber, Quadrature};
use qi_rangekit::radiometry::NoiseOccupancy;
use qi_rangekit::Error;

fn ns(v: f64) -> MeanPhotonNumber {
    MeanPhotonNumber::new(v).unwrap()
}

fn nb(v: f64) -> NoiseOccupancy {
    NoiseOccupancy::new(v).unwrap()
}

#[test]
fn signal_idler_product_mean_is_half_correlation() {
    let n = 1_000_000;
    let v = 0.5;
    let samples = sample_quadratures(&tmsv_covariance(ns(v)), n, Seed(21)).unwrap();
    let mean = samples.iter().map(|r| r[0] * r[2]).sum::<f64>() / n as f64;
    let c_q = 2.0 * (v * (v + 1.0)).sqrt();
    // Var(x y) = σx²σy² + cov² for centred Gaussians
    let s = 2.0 * v + 1.0;
    let se = ((s * s / 4.0 + c_q * c_q / 4.0) / n as f64).sqrt();
    assert!((mean - c_q / 2.0).abs() < 5.0 * se, "{mean} vs {}", c_q / 2.0);
}

#[test]
fn coherent_cross_entry_recovered() {
    let n = 500_000;
    let cov = coherent_covariance(ns(0.5));
    let est = estimate_covariance(&sample_quadratures(&cov, n, Seed(4)).unwrap()).unwrap();
    let c = est.get(Quadrature::SignalI, Quadrature::IdlerI);
    // σ² = S²/4 + C²/4 with S = 2, C = 1, doubled convention
    let se = 2.0 * ((1.0 + 0.25) / n as f64).sqrt();
    assert!((c - 1.0).abs() < 5.0 * se, "{c}");
    assert!((est.get(Quadrature::SignalQ, Quadrature::IdlerQ) + 1.0).abs() < 5.0 * se);
}

#[test]
fn sample_size_guard() {
    assert!(estimate_covariance(&[[0.0; 4]]).is_err());
    assert!(sample_quadratures(&tmsv_covariance(ns(1.0)), 0, Seed(0)).map_or(true, |s| s.is_empty()));
}

fn roc_request(thresholds: Vec<f64>) -> RocRequest {
    RocRequest {
        thresholds,
        modes_per_trial: 64,
        trials: 20_000,
        p_fa_floor: 1e-3,
    }
}

#[test]
fn qi_roc_dominates_ci() {
    let (v, eta, n_b) = (0.1, 0.2, nb(1.0));
    let qi = ReturnChannelModel::new(eta, n_b, tmsv_covariance(ns(v))).unwrap();
    let ci = ReturnChannelModel::new(eta, n_b, coherent_covariance(ns(v))).unwrap();
    assert_eq!(qi.covariance(Hypothesis::Absent), ci.covariance(Hypothesis::Absent));

    let request = roc_request(vec![0.05, 0.1, 0.15]);
    let q = roc_estimate(&qi.covariance(Hypothesis::Present), &qi.covariance(Hypothesis::Absent), &request, Seed(8)).unwrap();
    let c = roc_estimate(&ci.covariance(Hypothesis::Present), &ci.covariance(Hypothesis::Absent), &request, Seed(8)).unwrap();
    for i in 0..3 {
        // same absent covariance and seed, so false-alarm rates coincide
        assert_eq!(q.p_fa[i], c.p_fa[i]);
        let se = (q.standard_error(q.p_d[i]).powi(2) + c.standard_error(c.p_d[i]).powi(2)).sqrt();
        assert!(q.p_d[i] - c.p_d[i] > 3.0 * se, "threshold {}: {} vs {}", q.thresholds[i], q.p_d[i], c.p_d[i]);
    }
}

#[test]
fn null_channel_roc_is_diagonal() {
    let model = ReturnChannelModel::new(0.2, nb(1.0), tmsv_covariance(ns(1.0))).unwrap();
    let absent = model.covariance(Hypothesis::Absent);
    let r = roc_estimate(&absent, &absent, &roc_request(vec![-0.2, -0.05, 0.0, 0.05, 0.2]), Seed(2)).unwrap();
    for (p_d, p_fa) in r.p_d.iter().zip(&r.p_fa) {
        let se = 2f64.sqrt() * r.standard_error(*p_fa).max(1.0 / r.trials as f64);
        assert!((p_d - p_fa).abs() < 5.0 * se, "{p_d} vs {p_fa}");
    }
}

#[test]
fn roc_requires_enough_trials() {
    let cov = tmsv_covariance(ns(1.0));
    let request = RocRequest {
        p_fa_floor: 1e-6,
        ..roc_request(vec![0.0])
    };
    assert!(matches!(roc_estimate(&cov, &cov, &request, Seed(0)), Err(Error::InsufficientTrials { .. })));
}

#[test]
fn gain_ratio_tracks_channel_model() {
    let n_b = nb(100.0);
    let mut previous = f64::INFINITY;
    for v in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let g = detector_gain_experiment(ns(v), 0.01, n_b, 1_000_000, Seed(7)).unwrap();
        let expected = 1.0 + 1.0 / v;
        assert!(g.ratio >= 1.0 - 3.0 * g.standard_error, "N_s = {v}: {}", g.ratio);
        assert!((g.ratio - expected).abs() < 5.0 * g.standard_error, "N_s = {v}: {} +/- {}", g.ratio, g.standard_error);
        assert!(g.ratio < previous);
        previous = g.ratio;
    }
}

#[test]
fn gain_ratio_limits() {
    let n_b = nb(100.0);
    let low = detector_gain_experiment(ns(0.01), 0.01, n_b, 1_000_000, Seed(1)).unwrap();
    assert!(low.ratio > 10.0);
    assert!(low.ratio - 1.0 >= 3.0 * low.standard_error);
    let high = detector_gain_experiment(ns(100.0), 0.01, n_b, 100_000, Seed(1)).unwrap();
    assert!((high.ratio - 1.0).abs() <= 3.0 * high.standard_error, "{} +/- {}", high.ratio, high.standard_error);
}

#[test]
fn gain_experiment_is_bit_deterministic() {
    let run = |seed| detector_gain_experiment(ns(0.5), 0.05, nb(10.0), 20_000, Seed(seed)).unwrap();
    assert_eq!(run(3), run(3));
    assert_ne!(run(3).ratio, run(4).ratio);
}
