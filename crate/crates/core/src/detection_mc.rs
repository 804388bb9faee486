//! Monte Carlo checks of the covariance model and a correlation detector.
//!
//! Quadrature samples are classical Gaussian vectors whose covariance is half
//! the [`QuadratureCovariance`] entries (the matrices store twice the second
//! moment). All randomness comes from ChaCha20 seeded through
//! [`Seed`]; independent batches use distinct ChaCha stream ids, so a seed
//! reproduces the same output on every platform.
//!
//! The return channel mixes the transmitted signal with a thermal mode on a
//! beam splitter of transmissivity `η`:
//!
//! ```text
//! present:  R = √η S + √(1−η) B      absent:  R = B,   <B²> = (2 N_B + 1) / 2
//! ```
//!
//! The detector statistic is `d = I_R I_I − Q_R Q_I` per mode.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{positive, Error, Result};
use crate::quantum_states::{coherent_covariance, tmsv_covariance, MeanPhotonNumber, QuadratureCovariance};
use crate::radiometry::NoiseOccupancy;

/// Eigenvalues down to this value are treated as round-off and clamped to 0.
pub const PSD_TOLERANCE: f64 = 1e-9;
/// Minimum number of trials for the gain experiment.
pub const MIN_GAIN_TRIALS: usize = 10_000;
const JACKKNIFE_BLOCKS: usize = 20;

const STREAM_SAMPLES: u64 = 0;
const STREAM_QI: u64 = 1;
const STREAM_CI: u64 = 2;
const STREAM_ROC_PRESENT: u64 = 3;
const STREAM_ROC_ABSENT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    fn rng(self, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

/// Symmetric square root of `cov / 2`, so that `L z` with `z ~ N(0, I)` has
/// covariance `cov / 2`.
#[derive(Debug, Clone, Copy)]
struct SampleFactor(Matrix4<f64>);

impl SampleFactor {
    fn new(cov: &QuadratureCovariance) -> Result<Self> {
        let half = Matrix4::from_fn(|i, j| 0.5 * cov.entries()[i][j]);
        let eig = SymmetricEigen::new(half);
        if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -PSD_TOLERANCE) {
            // report in the stored (doubled) convention
            return Err(Error::NotPsd { eigenvalue: 2.0 * bad });
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let v = eig.eigenvectors;
        let sqrt = v * Matrix4::from_diagonal(&roots) * v.transpose();
        Ok(Self((sqrt + sqrt.transpose()) * 0.5))
    }

    fn draw(&self, rng: &mut impl Rng) -> [f64; 4] {
        let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let x = self.0 * z;
        [x[0], x[1], x[2], x[3]]
    }
}

/// Zero-mean Gaussian quadrature vectors whose second moments are `cov / 2`.
pub fn sample_quadratures(cov: &QuadratureCovariance, n: usize, seed: Seed) -> Result<Vec<[f64; 4]>> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "must be >= 1"));
    }
    let factor = SampleFactor::new(cov)?;
    let mut rng = seed.rng(STREAM_SAMPLES);
    Ok((0..n).map(|_| factor.draw(&mut rng)).collect())
}

/// Twice the sample non-central second-moment matrix.
pub fn estimate_covariance(samples: &[[f64; 4]]) -> Result<QuadratureCovariance> {
    if samples.len() < 2 {
        return Err(Error::domain("samples", samples.len() as f64, "need at least 2"));
    }
    let mut acc = [[0.0; 4]; 4];
    for row in samples {
        for j in 0..4 {
            for k in j..4 {
                acc[j][k] += row[j] * row[k];
            }
        }
    }
    let scale = 2.0 / samples.len() as f64;
    for row in acc.iter_mut() {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    Ok(QuadratureCovariance::from_upper(acc))
}

/// Standard error of each entry of [`estimate_covariance`] for Gaussian data:
/// `√((Σ_jj Σ_kk + Σ_jk²) / n)` in the doubled convention.
pub fn covariance_standard_errors(cov: &QuadratureCovariance, n: usize) -> [[f64; 4]; 4] {
    let e = cov.entries();
    let mut out = [[0.0; 4]; 4];
    for j in 0..4 {
        for k in 0..4 {
            out[j][k] = ((e[j][j] * e[k][k] + e[j][k] * e[j][k]) / n as f64).sqrt();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    Present,
    Absent,
}

/// Lossy thermal return channel acting on the signal half of a transmitter state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnChannelModel {
    eta: f64,
    n_b: NoiseOccupancy,
    base: QuadratureCovariance,
}

impl ReturnChannelModel {
    pub fn new(eta: f64, n_b: NoiseOccupancy, base: QuadratureCovariance) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain("eta", eta, "must lie in (0, 1]"));
        }
        Ok(Self { eta, n_b, base })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n_b(&self) -> NoiseOccupancy {
        self.n_b
    }

    pub fn base(&self) -> &QuadratureCovariance {
        &self.base
    }

    fn thermal_diag(&self) -> f64 {
        2.0 * self.n_b.value() + 1.0
    }

    /// Covariance over `(I_R, Q_R, I_I, Q_I)` under the given hypothesis.
    #[allow(clippy::needless_range_loop)]
    pub fn covariance(&self, hypothesis: Hypothesis) -> QuadratureCovariance {
        let b = self.base.entries();
        let thermal = self.thermal_diag();
        let mut out = *b;
        match hypothesis {
            Hypothesis::Present => {
                let amp = self.eta.sqrt();
                for j in 0..2 {
                    for k in 0..2 {
                        let noise = if j == k { (1.0 - self.eta) * thermal } else { 0.0 };
                        out[j][k] = self.eta * b[j][k] + noise;
                    }
                    for k in 2..4 {
                        out[j][k] = amp * b[j][k];
                        out[k][j] = amp * b[k][j];
                    }
                }
            }
            Hypothesis::Absent => {
                for j in 0..2 {
                    for k in 0..4 {
                        let v = if j == k { thermal } else { 0.0 };
                        out[j][k] = v;
                        out[k][j] = v;
                    }
                }
            }
        }
        QuadratureCovariance::from_upper(out)
    }

    /// Sampler producing `(present, absent)` rows that share the same thermal
    /// draw, which makes their difference a low-variance estimator of the
    /// detector's mean shift.
    fn paired_sampler(&self) -> Result<PairedSampler> {
        Ok(PairedSampler {
            transmitter: SampleFactor::new(&self.base)?,
            signal_gain: self.eta.sqrt(),
            noise_gain: (1.0 - self.eta).sqrt(),
            thermal_sd: (self.thermal_diag() / 2.0).sqrt(),
        })
    }
}

struct PairedSampler {
    transmitter: SampleFactor,
    signal_gain: f64,
    noise_gain: f64,
    thermal_sd: f64,
}

impl PairedSampler {
    fn draw(&self, rng: &mut impl Rng) -> ([f64; 4], [f64; 4]) {
        let [i_s, q_s, i_i, q_i] = self.transmitter.draw(rng);
        let i_b = self.thermal_sd * rng.sample::<f64, _>(StandardNormal);
        let q_b = self.thermal_sd * rng.sample::<f64, _>(StandardNormal);
        let present = [
            self.signal_gain * i_s + self.noise_gain * i_b,
            self.signal_gain * q_s + self.noise_gain * q_b,
            i_i,
            q_i,
        ];
        (present, [i_b, q_b, i_i, q_i])
    }
}

/// `I_R I_I − Q_R Q_I` for one mode.
pub fn correlation_statistic(row: &[f64; 4]) -> f64 {
    row[0] * row[2] - row[1] * row[3]
}

/// Deflection SNR of the correlation detector for one transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionEstimate {
    /// `E[d | present] − E[d | absent]`.
    pub mean_shift: f64,
    /// `Var[d | absent]`.
    pub absent_variance: f64,
    /// `mean_shift² / absent_variance`, per mode.
    pub deflection: f64,
}

/// Outcome of [`detector_gain_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainExperiment {
    /// QI deflection over CI deflection.
    pub ratio: f64,
    /// Delete-one-block jackknife standard error of `ratio`.
    pub standard_error: f64,
    pub qi: DeflectionEstimate,
    pub ci: DeflectionEstimate,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    shift: f64,
    absent: f64,
    absent_sq: f64,
}

impl Moments {
    fn add(&mut self, other: &Moments) {
        self.n += other.n;
        self.shift += other.shift;
        self.absent += other.absent;
        self.absent_sq += other.absent_sq;
    }

    fn minus(&self, other: &Moments) -> Moments {
        Moments {
            n: self.n - other.n,
            shift: self.shift - other.shift,
            absent: self.absent - other.absent,
            absent_sq: self.absent_sq - other.absent_sq,
        }
    }

    fn estimate(&self) -> DeflectionEstimate {
        let mean_shift = self.shift / self.n;
        let mean_absent = self.absent / self.n;
        let absent_variance = (self.absent_sq - self.n * mean_absent * mean_absent) / (self.n - 1.0);
        DeflectionEstimate {
            mean_shift,
            absent_variance,
            deflection: mean_shift * mean_shift / absent_variance,
        }
    }
}

fn block_moments(model: &ReturnChannelModel, trials: usize, seed: Seed, stream: u64) -> Result<Vec<Moments>> {
    let sampler = model.paired_sampler()?;
    let mut rng = seed.rng(stream);
    let mut blocks = vec![Moments::default(); JACKKNIFE_BLOCKS];
    for i in 0..trials {
        let (present, absent) = sampler.draw(&mut rng);
        let d_p = correlation_statistic(&present);
        let d_a = correlation_statistic(&absent);
        let b = &mut blocks[i * JACKKNIFE_BLOCKS / trials];
        b.n += 1.0;
        b.shift += d_p - d_a;
        b.absent += d_a;
        b.absent_sq += d_a * d_a;
    }
    Ok(blocks)
}

/// Empirical QI/CI ratio of the correlation detector's deflection SNR.
///
/// The squeezed-vacuum and coherent transmitters at the same `N_s` are sent
/// through the same channel model with independent random streams; each
/// trial is one mode.
pub fn detector_gain_experiment(
    n_s: MeanPhotonNumber,
    eta: f64,
    n_b: NoiseOccupancy,
    trials: usize,
    seed: Seed,
) -> Result<GainExperiment> {
    n_s.positive()?;
    positive("n_b", n_b.value())?;
    if trials < MIN_GAIN_TRIALS {
        return Err(Error::InsufficientTrials {
            trials,
            p_fa: f64::NAN,
            needed: MIN_GAIN_TRIALS,
        });
    }
    let qi_model = ReturnChannelModel::new(eta, n_b, tmsv_covariance(n_s))?;
    let ci_model = ReturnChannelModel::new(eta, n_b, coherent_covariance(n_s))?;
    let qi_blocks = block_moments(&qi_model, trials, seed, STREAM_QI)?;
    let ci_blocks = block_moments(&ci_model, trials, seed, STREAM_CI)?;

    let total = |blocks: &[Moments]| {
        let mut m = Moments::default();
        blocks.iter().for_each(|b| m.add(b));
        m
    };
    let (qi_total, ci_total) = (total(&qi_blocks), total(&ci_blocks));
    let qi = qi_total.estimate();
    let ci = ci_total.estimate();
    let ratio = qi.deflection / ci.deflection;

    let k = JACKKNIFE_BLOCKS as f64;
    let leave_one_out: Vec<f64> = qi_blocks
        .iter()
        .zip(&ci_blocks)
        .map(|(q, c)| qi_total.minus(q).estimate().deflection / ci_total.minus(c).estimate().deflection)
        .collect();
    let mean = leave_one_out.iter().sum::<f64>() / k;
    let spread = leave_one_out.iter().map(|r| (r - mean).powi(2)).sum::<f64>();
    let standard_error = ((k - 1.0) / k * spread).sqrt();

    Ok(GainExperiment {
        ratio,
        standard_error,
        qi,
        ci,
        trials,
    })
}

/// Empirical operating characteristic of the block-averaged correlation detector.
#[derive(Debug, Clone, PartialEq)]
pub struct RocEstimate {
    pub thresholds: Vec<f64>,
    pub p_d: Vec<f64>,
    pub p_fa: Vec<f64>,
    pub trials: usize,
}

impl RocEstimate {
    /// Binomial standard error of an estimated probability.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Parameters for [`roc_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct RocRequest {
    /// Strictly increasing detection thresholds on the block-mean statistic.
    pub thresholds: Vec<f64>,
    /// Modes averaged into each trial's statistic.
    pub modes_per_trial: usize,
    pub trials: usize,
    /// Smallest false-alarm probability the caller wants to resolve; it must
    /// be worth at least ten expected false alarms.
    pub p_fa_floor: f64,
}

fn trial_statistics(cov: &QuadratureCovariance, modes: usize, trials: usize, seed: Seed, stream: u64) -> Result<Vec<f64>> {
    let factor = SampleFactor::new(cov)?;
    let mut rng = seed.rng(stream);
    let mut stats: Vec<f64> = (0..trials)
        .map(|_| (0..modes).map(|_| correlation_statistic(&factor.draw(&mut rng))).sum::<f64>() / modes as f64)
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok(stats)
}

fn exceedance(sorted: &[f64], threshold: f64) -> f64 {
    let below = sorted.partition_point(|&d| d <= threshold);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// `P(D > threshold)` under each hypothesis, from independent trial batches.
pub fn roc_estimate(
    present: &QuadratureCovariance,
    absent: &QuadratureCovariance,
    request: &RocRequest,
    seed: Seed,
) -> Result<RocEstimate> {
    let RocRequest {
        thresholds,
        modes_per_trial,
        trials,
        p_fa_floor,
    } = request;
    if !(*p_fa_floor > 0.0 && *p_fa_floor <= 1.0) {
        return Err(Error::domain("p_fa_floor", *p_fa_floor, "must lie in (0, 1]"));
    }
    if (*trials as f64) * p_fa_floor < 10.0 {
        return Err(Error::InsufficientTrials {
            trials: *trials,
            p_fa: *p_fa_floor,
            needed: (10.0 / p_fa_floor).ceil() as usize,
        });
    }
    if *modes_per_trial == 0 {
        return Err(Error::domain("modes_per_trial", 0.0, "must be >= 1"));
    }
    if thresholds.iter().any(|t| t.is_nan()) || thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("thresholds must be strictly increasing".into()));
    }
    let d_present = trial_statistics(present, *modes_per_trial, *trials, seed, STREAM_ROC_PRESENT)?;
    let d_absent = trial_statistics(absent, *modes_per_trial, *trials, seed, STREAM_ROC_ABSENT)?;
    Ok(RocEstimate {
        thresholds: thresholds.clone(),
        p_d: thresholds.iter().map(|&t| exceedance(&d_present, t)).collect(),
        p_fa: thresholds.iter().map(|&t| exceedance(&d_absent, t)).collect(),
        trials: *trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_states::Quadrature;

    fn ns(v: f64) -> MeanPhotonNumber {
        MeanPhotonNumber::new(v).unwrap()
    }

    fn nb(v: f64) -> NoiseOccupancy {
        NoiseOccupancy::new(v).unwrap()
    }

    #[test]
    fn identity_recovered() {
        let n = 200_000;
        let samples = sample_quadratures(&QuadratureCovariance::identity(), n, Seed(1)).unwrap();
        let est = estimate_covariance(&samples).unwrap();
        let tol = 5.0 * (2.0 / n as f64).sqrt();
        assert!(est.max_abs_deviation(&QuadratureCovariance::identity()) < tol);
    }

    #[test]
    fn deterministic_under_seed() {
        let cov = tmsv_covariance(ns(0.5));
        let a = sample_quadratures(&cov, 1000, Seed(42)).unwrap();
        let b = sample_quadratures(&cov, 1000, Seed(42)).unwrap();
        let c = sample_quadratures(&cov, 1000, Seed(43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let mut e = *QuadratureCovariance::identity().entries();
        e[0][2] = 2.0;
        let bad = QuadratureCovariance::from_upper(e);
        match sample_quadratures(&bad, 10, Seed(0)).unwrap_err() {
            Error::NotPsd { eigenvalue } => assert!((eigenvalue + 1.0).abs() < 1e-9),
            e => panic!("unexpected {e:?}"),
        }
        assert!(sample_quadratures(&QuadratureCovariance::identity(), 0, Seed(0)).is_err());
    }

    #[test]
    fn clamps_round_off_eigenvalues() {
        // rank-deficient: I_S and I_I perfectly correlated
        let mut e = [[0.0; 4]; 4];
        e[0][0] = 1.0;
        e[0][2] = 1.0;
        e[2][2] = 1.0;
        e[1][1] = 1.0;
        e[3][3] = 1.0;
        let cov = QuadratureCovariance::from_upper(e);
        let s = sample_quadratures(&cov, 100, Seed(9)).unwrap();
        assert!(s.iter().all(|r| (r[0] - r[2]).abs() < 1e-7));
    }

    #[test]
    fn estimate_of_repeated_row_is_outer_product() {
        let row = [0.5, -1.0, 2.0, 0.25];
        let est = estimate_covariance(&vec![row; 7]).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert!((est.entries()[j][k] - 2.0 * row[j] * row[k]).abs() < 1e-12);
            }
        }
        assert!(est.is_symmetric());
        assert!(estimate_covariance(&[row]).is_err());
    }

    #[test]
    fn channel_covariances() {
        let m = ReturnChannelModel::new(0.1, nb(3.0), tmsv_covariance(ns(0.5))).unwrap();
        let p = m.covariance(Hypothesis::Present);
        let c_q = 2.0 * 0.75f64.sqrt();
        assert!((p.get(Quadrature::SignalI, Quadrature::SignalI) - (2.0 * (0.1 * 0.5 + 0.9 * 3.0) + 1.0)).abs() < 1e-12);
        assert!((p.get(Quadrature::SignalI, Quadrature::IdlerI) - 0.1f64.sqrt() * c_q).abs() < 1e-12);
        assert!((p.get(Quadrature::IdlerQ, Quadrature::SignalQ) + 0.1f64.sqrt() * c_q).abs() < 1e-12);
        assert_eq!(p.get(Quadrature::IdlerI, Quadrature::IdlerI), 2.0);
        let a = m.covariance(Hypothesis::Absent);
        assert_eq!(a.get(Quadrature::SignalQ, Quadrature::SignalQ), 7.0);
        assert_eq!(a.get(Quadrature::SignalI, Quadrature::IdlerI), 0.0);
        assert_eq!(a.get(Quadrature::IdlerQ, Quadrature::IdlerQ), 2.0);
        assert!(p.is_symmetric() && a.is_symmetric());
        assert!(ReturnChannelModel::new(0.0, nb(1.0), tmsv_covariance(ns(0.5))).is_err());
        assert!(ReturnChannelModel::new(1.5, nb(1.0), tmsv_covariance(ns(0.5))).is_err());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn paired_sampler_matches_channel_covariance() {
        let m = ReturnChannelModel::new(0.3, nb(2.0), tmsv_covariance(ns(0.7))).unwrap();
        let sampler = m.paired_sampler().unwrap();
        let mut rng = Seed(5).rng(0);
        let n = 200_000;
        let (present, absent): (Vec<_>, Vec<_>) = (0..n).map(|_| sampler.draw(&mut rng)).unzip();
        for (rows, h) in [(present, Hypothesis::Present), (absent, Hypothesis::Absent)] {
            let target = m.covariance(h);
            let est = estimate_covariance(&rows).unwrap();
            let se = covariance_standard_errors(&target, n);
            for j in 0..4 {
                for k in 0..4 {
                    let dev = (est.entries()[j][k] - target.entries()[j][k]).abs();
                    assert!(dev < 5.0 * se[j][k], "{h:?} ({j},{k}) dev {dev}");
                }
            }
        }
    }

    #[test]
    fn gain_experiment_validates_input() {
        assert!(detector_gain_experiment(ns(0.1), 0.1, nb(1.0), 100, Seed(0)).is_err());
        assert!(detector_gain_experiment(ns(0.0), 0.1, nb(1.0), 20_000, Seed(0)).is_err());
        assert!(detector_gain_experiment(ns(0.1), 0.0, nb(1.0), 20_000, Seed(0)).is_err());
        assert!(detector_gain_experiment(ns(0.1), 0.1, nb(0.0), 20_000, Seed(0)).is_err());
    }

    #[test]
    fn gain_experiment_lossless_quiet_channel() {
        let g = detector_gain_experiment(ns(0.5), 1.0, nb(1e-6), 50_000, Seed(3)).unwrap();
        assert!(g.ratio.is_finite());
        assert!(g.ratio >= 1.0 - 3.0 * g.standard_error, "{} ± {}", g.ratio, g.standard_error);
    }

    #[test]
    fn roc_edge_cases() {
        let cov = tmsv_covariance(ns(0.5));
        let req = RocRequest {
            thresholds: vec![f64::NEG_INFINITY, 0.0, f64::INFINITY],
            modes_per_trial: 4,
            trials: 10_000,
            p_fa_floor: 1e-3,
        };
        let roc = roc_estimate(&cov, &cov, &req, Seed(11)).unwrap();
        assert_eq!((roc.p_d[0], roc.p_fa[0]), (1.0, 1.0));
        assert_eq!((roc.p_d[2], roc.p_fa[2]), (0.0, 0.0));

        let starved = RocRequest { trials: 5_000, p_fa_floor: 1e-3, ..req.clone() };
        assert!(matches!(
            roc_estimate(&cov, &cov, &starved, Seed(11)),
            Err(Error::InsufficientTrials { needed: 10_000, .. })
        ));
        let unsorted = RocRequest { thresholds: vec![1.0, 0.0], ..req };
        assert!(roc_estimate(&cov, &cov, &unsorted, Seed(11)).is_err());
    }
}
