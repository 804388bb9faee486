use proptest::prelude::*;

use qi_rangekit::atmosphere::AbsorptionCoefficient;
use qi_rangekit::link_budget::{DetectionSpec, IntegrationSpec, RadarParams};
use qi_rangekit::quantum_states::MeanPhotonNumber;
use qi_rangekit::radiometry::{Bandwidth, Frequency, NoiseOccupancy, PhysicalConstants};
use qi_rangekit::range_solver::{
    quantum_advantage_factor, r_max, r_max_free, FourPiConvention, Mode, RangeProblem, RangeSolution,
};

#[derive(Debug, Clone, Copy)]
struct Knobs {
    sigma: f64,
    aperture: f64,
    tau: f64,
    n_s: f64,
    gamma: f64,
    snr_db: f64,
    f: f64,
}

fn problem(k: Knobs, mode: Mode) -> RangeProblem {
    let bandwidth = Bandwidth::new(1e9).unwrap();
    RangeProblem {
        radar: RadarParams::new(k.sigma, k.aperture).unwrap(),
        detection: DetectionSpec::new(0.7, 1e-6, k.snr_db).unwrap(),
        integration: IntegrationSpec::new(k.tau, bandwidth).unwrap(),
        n_s: MeanPhotonNumber::new(k.n_s).unwrap(),
        frequency: Frequency::new(k.f).unwrap(),
        bandwidth,
        n_b: NoiseOccupancy::new(626.0).unwrap(),
        gamma: AbsorptionCoefficient::new(k.gamma).unwrap(),
        mode,
        convention: FourPiConvention::LinkBudget,
        constants: PhysicalConstants::ROUNDED,
    }
}

fn solve(k: Knobs, mode: Mode) -> RangeSolution {
    r_max(&problem(k, mode)).unwrap()
}

fn knobs() -> impl Strategy<Value = Knobs> {
    (0.1f64..10.0, 0.1f64..1.0, 0.1f64..1.0, 1e-3f64..10.0, 0.01f64..50.0, 5.0f64..15.0, 1e10f64..1e12).prop_map(
        |(sigma, aperture, tau, n_s, gamma, snr_db, f)| Knobs {
            sigma,
            aperture,
            tau,
            n_s,
            gamma,
            snr_db,
            f,
        },
    )
}

fn mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Ci), Just(Mode::Qi)]
}

proptest! {
    #[test]
    fn range_grows_with_resources(k in knobs(), m in mode(), scale in 1.1f64..4.0) {
        let base = solve(k, m).r_max_m;
        for bigger in [
            Knobs { sigma: k.sigma * scale, ..k },
            Knobs { aperture: k.aperture * scale, ..k },
            Knobs { tau: k.tau * scale, ..k },
            Knobs { n_s: k.n_s * scale, ..k },
        ] {
            prop_assert!(solve(bigger, m).r_max_m > base);
        }
    }

    #[test]
    fn range_shrinks_with_loss_and_threshold(k in knobs(), m in mode(), scale in 1.1f64..4.0) {
        let base = solve(k, m).r_max_m;
        let lossier = solve(Knobs { gamma: k.gamma * scale, ..k }, m).r_max_m;
        let stricter = solve(Knobs { snr_db: k.snr_db + scale, ..k }, m).r_max_m;
        prop_assert!(lossier < base);
        prop_assert!(stricter < base);
    }

    #[test]
    fn qi_advantage_below_lossless_factor(k in knobs()) {
        let ci = solve(k, Mode::Ci).r_max_m;
        let qi = solve(k, Mode::Qi).r_max_m;
        let factor = quantum_advantage_factor(MeanPhotonNumber::new(k.n_s).unwrap()).unwrap();
        prop_assert!(qi > ci);
        prop_assert!(qi / ci < factor);
    }

    #[test]
    fn bracket_straddles_threshold(k in knobs(), m in mode()) {
        let p = problem(k, m);
        let sol = r_max(&p).unwrap();
        let threshold = p.threshold_db().unwrap();
        let (lo, hi) = sol.bracket;
        prop_assert!(lo <= sol.r_max_m && sol.r_max_m <= hi);
        prop_assert!(p.snr_eff_db(lo) >= threshold);
        prop_assert!(p.snr_eff_db(hi) <= threshold);
        prop_assert!((hi - lo) / hi <= 1e-9);
        prop_assert!(hi <= r_max_free(&p).unwrap());
    }
}
