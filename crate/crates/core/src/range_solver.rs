//! Maximum detection range for classical (CI) and quantum (QI) illumination.
//!
//! The effective SNR at range `R` is
//!
//! ```text
//! SNR_eff(R) = σ G A M N_s F(R)² / ((4π)² N_B R⁴),   F(R) = 10^(−γ R / 10)
//! ```
//!
//! and detection requires `SNR_eff ≥ SNR_min`. The QI threshold is lowered by
//! the sensitivity factor `1 + 1/N_s`, which puts `(1 + 1/N_s)^(1/4)` on the
//! range. With `γ = 0` the equation has a closed-form fourth root; otherwise
//! `F` depends on `R` and the crossing is found by bisection on `ln R`.
//!
//! [`FourPiConvention::PaperLiteral`] swaps the `(4π)²` for `(4π)⁴` so the
//! the two range formulas can be compared.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atmosphere::{AbsorptionCoefficient, AttenuationTable, FormFactor};
use crate::error::{Error, Result};
use crate::link_budget::{db_to_linear, linear_to_db, raw_transmissivity, DetectionSpec, IntegrationSpec, RadarParams};
use crate::quantum_states::{correlation_ratio, MeanPhotonNumber};
use crate::radiometry::{Bandwidth, Frequency, NoiseOccupancy, PhysicalConstants, Power};

/// Relative bracket width at which bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-9;
pub const BISECTION_MAX_ITER: usize = 200;
/// A converged solution must hit the threshold to within this many dB.
pub const RESIDUAL_TOL_DB: f64 = 1e-6;
/// Lower bisection bracket, as a fraction of the lossless range.
const NEAR_ZERO_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "CI")]
    Ci,
    #[serde(rename = "QI")]
    Qi,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Ci, Mode::Qi];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ci => "CI",
            Mode::Qi => "QI",
        })
    }
}

/// Power of `4π` in the range-equation denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FourPiConvention {
    /// `(4π)²`, consistent with substituting the transmissivity into the SNR.
    #[default]
    LinkBudget,
    /// `(4π)⁴` in the range denominator.
    PaperLiteral,
}

impl FourPiConvention {
    pub fn exponent(self) -> i32 {
        match self {
            FourPiConvention::LinkBudget => 2,
            FourPiConvention::PaperLiteral => 4,
        }
    }

    pub fn from_exponent(exponent: u8) -> Result<Self> {
        match exponent {
            2 => Ok(Self::LinkBudget),
            4 => Ok(Self::PaperLiteral),
            other => Err(Error::Config(format!("four_pi_exponent must be 2 or 4, got {other}"))),
        }
    }
}

/// SNR-domain QI advantage, `1 + 1/N_s`.
pub fn qi_sensitivity_factor(n_s: MeanPhotonNumber) -> Result<f64> {
    Ok(1.0 + 1.0 / n_s.positive()?)
}

/// Range-domain QI advantage, `(1 + 1/N_s)^(1/4)`.
pub fn quantum_advantage_factor(n_s: MeanPhotonNumber) -> Result<f64> {
    Ok(qi_sensitivity_factor(n_s)?.powf(0.25))
}

/// Everything needed to solve for one `(N_s, f, mode)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeProblem {
    pub radar: RadarParams,
    pub detection: DetectionSpec,
    pub integration: IntegrationSpec,
    pub n_s: MeanPhotonNumber,
    pub frequency: Frequency,
    pub bandwidth: Bandwidth,
    pub n_b: NoiseOccupancy,
    pub gamma: AbsorptionCoefficient,
    pub mode: Mode,
    pub convention: FourPiConvention,
    pub constants: PhysicalConstants,
}

impl RangeProblem {
    /// Detection threshold for this mode, dB.
    pub fn threshold_db(&self) -> Result<f64> {
        match self.mode {
            Mode::Ci => Ok(self.detection.snr_min_db),
            Mode::Qi => Ok(self.detection.snr_min_db - linear_to_db(qi_sensitivity_factor(self.n_s)?)),
        }
    }

    pub fn gain(&self) -> f64 {
        self.radar.gain(self.frequency, &self.constants)
    }

    fn check(&self) -> Result<()> {
        self.n_s.positive()?;
        if self.n_b.value() <= 0.0 {
            return Err(Error::domain("n_b", self.n_b.value(), "must be > 0"));
        }
        Ok(())
    }

    /// `σ G A M N_s / ((4π)^k N_B)` in dB: the SNR at 1 m with no absorption.
    fn snr_at_one_metre_db(&self) -> f64 {
        let numerator = self.radar.sigma_m2()
            * self.gain()
            * self.radar.aperture_m2()
            * self.integration.modes() as f64
            * self.n_s.value();
        let denominator = (4.0 * std::f64::consts::PI).powi(self.convention.exponent()) * self.n_b.value();
        linear_to_db(numerator / denominator)
    }

    /// `SNR_eff(R)` in dB, including the two-way absorption `F²`.
    pub fn snr_eff_db(&self, range_m: f64) -> f64 {
        self.snr_at_one_metre_db() - 40.0 * range_m.log10() - 2.0 * self.gamma.one_way_loss_db(range_m)
    }

    /// Transmissivity at `range_m` under this problem's convention, unchecked.
    pub fn eta(&self, range_m: f64) -> f64 {
        let f = 10f64.powf(-self.gamma.one_way_loss_db(range_m) / 10.0);
        raw_transmissivity(
            self.radar.sigma_m2(),
            self.gain(),
            self.radar.aperture_m2(),
            f * f,
            range_m,
            self.convention.exponent(),
        )
    }
}

/// Solved maximum range with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSolution {
    pub r_max_m: f64,
    /// `|SNR_eff(r_max) − threshold|`, dB.
    pub residual_db: f64,
    pub iterations: usize,
    /// Final bisection interval; the full search interval when `γ = 0`.
    pub bracket: (f64, f64),
    pub converged: bool,
    pub form_factor: FormFactor,
    pub eta: f64,
}

/// Closed-form range with `F ≡ 1` (γ ignored).
pub fn r_max_free(problem: &RangeProblem) -> Result<f64> {
    problem.check()?;
    let threshold = db_to_linear(problem.threshold_db()?);
    let numerator = problem.radar.sigma_m2()
        * problem.gain()
        * problem.radar.aperture_m2()
        * problem.integration.modes() as f64
        * problem.n_s.value();
    let denominator = (4.0 * std::f64::consts::PI).powi(problem.convention.exponent()) * problem.n_b.value() * threshold;
    Ok((numerator / denominator).powf(0.25))
}

/// Range at which `SNR_eff` falls to the threshold, including absorption.
///
/// `SNR_eff` is strictly decreasing in `R`, and the lossless range bounds the
/// root from above, so bisection on `[r_free · 1e-12, r_free]` is exact up to
/// the bracket tolerance.
pub fn r_max(problem: &RangeProblem) -> Result<RangeSolution> {
    let upper = r_max_free(problem)?;
    let threshold_db = problem.threshold_db()?;
    let excess = |r: f64| problem.snr_eff_db(r) - threshold_db;

    let mut lo = upper * NEAR_ZERO_FRACTION;
    let mut hi = upper;
    let g_lo = excess(lo);
    if g_lo <= 0.0 {
        return Err(Error::NoDetection {
            range_m: lo,
            snr_db: problem.snr_eff_db(lo),
            threshold_db,
        });
    }
    let mut iterations = 0;
    let (root, bracket_closed) = if excess(hi) >= 0.0 {
        // γ = 0: the closed form is already the crossing.
        (hi, true)
    } else {
        while hi / lo - 1.0 > BISECTION_REL_TOL && iterations < BISECTION_MAX_ITER {
            let mid = (lo * hi).sqrt();
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        ((lo * hi).sqrt(), hi / lo - 1.0 <= BISECTION_REL_TOL)
    };

    let residual_db = excess(root).abs();
    let converged = bracket_closed && residual_db < RESIDUAL_TOL_DB;
    let eta = problem.eta(root);
    if eta > 1.0 {
        return Err(Error::UnphysicalGeometry { eta });
    }
    let form_factor = FormFactor::new(10f64.powf(-problem.gamma.one_way_loss_db(root) / 10.0))?;
    Ok(RangeSolution {
        r_max_m: root,
        residual_db,
        iterations,
        bracket: (lo, hi),
        converged,
        form_factor,
        eta,
    })
}

/// Table-level scenario from which per-point problems are built.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub radar: RadarParams,
    pub detection: DetectionSpec,
    pub bandwidth: Bandwidth,
    pub integration: IntegrationSpec,
    pub noise_power: Power,
    pub convention: FourPiConvention,
    pub constants: PhysicalConstants,
    pub attenuation: Option<AttenuationTable>,
}

impl Scenario {
    /// `N_B` at `f` implied by the configured noise power.
    pub fn noise_occupancy(&self, f: Frequency) -> Result<NoiseOccupancy> {
        let t = self.constants.t_eff_from_noise_power(self.noise_power, self.bandwidth)?;
        Ok(self.constants.thermal_occupancy(t, f))
    }

    pub fn gamma(&self, f: Frequency) -> Result<AbsorptionCoefficient> {
        match &self.attenuation {
            Some(table) => table.gamma_at(f),
            None => Ok(AbsorptionCoefficient::LOSSLESS),
        }
    }

    pub fn problem(&self, n_s: MeanPhotonNumber, f: Frequency, mode: Mode) -> Result<RangeProblem> {
        n_s.positive()?;
        Ok(RangeProblem {
            radar: self.radar,
            detection: self.detection,
            integration: self.integration,
            n_s,
            frequency: f,
            bandwidth: self.bandwidth,
            n_b: self.noise_occupancy(f)?,
            gamma: self.gamma(f)?,
            mode,
            convention: self.convention,
            constants: self.constants,
        })
    }
}

/// One curve of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub frequency: Option<Frequency>,
    pub mode: Option<Mode>,
    pub values: Vec<T>,
}

/// Values over an `N_s` axis; every series has one entry per axis point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub axis: Vec<f64>,
    pub series: Vec<Series<T>>,
}

fn validate_grid(grid: &[f64]) -> Result<Vec<MeanPhotonNumber>> {
    if grid.is_empty() {
        return Err(Error::Grid("empty N_s grid".into()));
    }
    if let Some(bad) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Grid(format!("N_s grid value {bad} must be finite and > 0")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("N_s grid must be strictly increasing".into()));
    }
    grid.iter().map(|&v| MeanPhotonNumber::new(v)).collect()
}

/// `r_max` for every `(f, mode, N_s)`, frequency-major then mode then `N_s`.
/// Failed points stay in place as `Err`.
pub fn sweep_range(
    scenario: &Scenario,
    n_s_grid: &[f64],
    frequencies: &[Frequency],
    modes: &[Mode],
) -> Result<SweepResult<Result<RangeSolution>>> {
    let grid = validate_grid(n_s_grid)?;
    let mut series = Vec::with_capacity(frequencies.len() * modes.len());
    for &f in frequencies {
        for &mode in modes {
            let values = grid
                .iter()
                .map(|&n_s| scenario.problem(n_s, f, mode).and_then(|p| r_max(&p)))
                .collect();
            series.push(Series {
                frequency: Some(f),
                mode: Some(mode),
                values,
            });
        }
    }
    Ok(SweepResult {
        axis: n_s_grid.to_vec(),
        series,
    })
}

/// `C_c / C_q` over the grid.
pub fn sweep_ratio(n_s_grid: &[f64]) -> Result<SweepResult<f64>> {
    let grid = validate_grid(n_s_grid)?;
    let values = grid.iter().map(|&n| correlation_ratio(n)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: n_s_grid.to_vec(),
        series: vec![Series {
            frequency: None,
            mode: None,
            values,
        }],
    })
}

/// `points` log-spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min > 0.0 && min < max) {
        return Err(Error::Grid(format!("need 0 < min < max, got min = {min}, max = {max}")));
    }
    if points < 2 {
        return Err(Error::Grid(format!("need at least 2 points, got {points}")));
    }
    let (lo, hi) = (min.log10(), max.log10());
    let step = (hi - lo) / (points - 1) as f64;
    // 13 significant digits keeps decade points such as 0.01 exact in CSV output
    let mut grid: Vec<f64> = (0..points)
        .map(|i| {
            let v = 10f64.powf(lo + step * i as f64);
            format!("{v:.12e}").parse().expect("formatted float parses")
        })
        .collect();
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid(format!("{points} points are too dense for [{min}, {max}]")));
    }
    grid[0] = min;
    grid[points - 1] = max;
    Ok(grid)
}
