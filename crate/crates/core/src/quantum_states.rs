//! Signal/idler covariance matrices for the two transmitter states.
//!
//! Matrices use the ordering `(I_S, Q_S, I_I, Q_I)` and the convention
//! `entry(j, k) = 2 <(R_j R_k + R_k R_j) / 2>`, i.e. twice the symmetrized
//! non-central second moment of the quadrature operators
//! `I = (a + a†)/√2`, `Q = (a − a†)/(i√2)`. Vacuum therefore has unit diagonal.
//!
//! The closed forms ([`tmsv_covariance`], [`coherent_covariance`]) are checked
//! against a brute-force oracle that expands each state in a truncated Fock
//! basis and evaluates the moments by applying ladder operators.

use num_complex::Complex64;

use crate::error::{non_negative, Error, Result};

/// Largest discarded probability mass tolerated by the Fock oracles.
pub const FOCK_TAIL_LIMIT: f64 = 1e-12;

/// Mean photon number per mode, `N_s`.
///
/// Construction admits zero; operations that divide by `N_s` reject it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeanPhotonNumber(f64);

impl MeanPhotonNumber {
    pub fn new(value: f64) -> Result<Self> {
        non_negative("n_s", value).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Returns the value, rejecting the degenerate `N_s = 0` case.
    pub fn positive(self) -> Result<f64> {
        if self.0 > 0.0 {
            Ok(self.0)
        } else {
            Err(Error::domain("n_s", self.0, "must be > 0"))
        }
    }
}

/// Diagonal entry `s` and cross-correlation magnitude `c` of a block covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceBlocks {
    pub s: f64,
    pub c: f64,
}

impl CovarianceBlocks {
    /// `s² − c²`: exactly 1 for the squeezed vacuum, `4 N_s + 1` for the coherent pair.
    pub fn determinant_gap(&self) -> f64 {
        (self.s - self.c) * (self.s + self.c)
    }
}

/// Index of a quadrature inside a [`QuadratureCovariance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    SignalI = 0,
    SignalQ = 1,
    IdlerI = 2,
    IdlerQ = 3,
}

/// 4×4 symmetric second-moment matrix over `(I_S, Q_S, I_I, Q_I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCovariance {
    entries: [[f64; 4]; 4],
}

impl QuadratureCovariance {
    /// Builds the block form: diagonal blocks `diag(s, s)`, cross blocks `diag(c, −c)`.
    pub fn from_blocks(blocks: CovarianceBlocks) -> Self {
        let CovarianceBlocks { s, c } = blocks;
        let mut entries = [[0.0; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = s;
        }
        entries[0][2] = c;
        entries[2][0] = c;
        entries[1][3] = -c;
        entries[3][1] = -c;
        Self { entries }
    }

    /// Builds a matrix from arbitrary entries, keeping the upper triangle and
    /// mirroring it so the result is exactly symmetric.
    #[allow(clippy::needless_range_loop)]
    pub fn from_upper(entries: [[f64; 4]; 4]) -> Self {
        let mut out = entries;
        for i in 0..4 {
            for j in 0..i {
                out[i][j] = out[j][i];
            }
        }
        Self { entries: out }
    }

    pub fn identity() -> Self {
        Self::from_blocks(CovarianceBlocks { s: 1.0, c: 0.0 })
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }

    pub fn get(&self, row: Quadrature, col: Quadrature) -> f64 {
        self.entries[row as usize][col as usize]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_deviation(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `S = 2 N_s + 1`, `C_q = 2 √(N_s (N_s + 1))`. `N_s = 0` gives the vacuum.
pub fn tmsv_blocks(n_s: MeanPhotonNumber) -> CovarianceBlocks {
    let n = n_s.value();
    CovarianceBlocks {
        s: 2.0 * n + 1.0,
        c: 2.0 * (n * (n + 1.0)).sqrt(),
    }
}

/// `S = 2 N_s + 1`, `C_c = 2 N_s`.
pub fn coherent_blocks(n_s: MeanPhotonNumber) -> CovarianceBlocks {
    let n = n_s.value();
    CovarianceBlocks {
        s: 2.0 * n + 1.0,
        c: 2.0 * n,
    }
}

pub fn tmsv_covariance(n_s: MeanPhotonNumber) -> QuadratureCovariance {
    QuadratureCovariance::from_blocks(tmsv_blocks(n_s))
}

/// Covariance of the correlated coherent pair as used by the range model.
///
/// The product state `|α⟩ ⊗ |α⟩` with real `α` only reproduces the I-sector
/// of this matrix; see [`coherent_covariance_oracle`].
pub fn coherent_covariance(n_s: MeanPhotonNumber) -> QuadratureCovariance {
    QuadratureCovariance::from_blocks(coherent_blocks(n_s))
}

/// `C_c / C_q = (1 + 1/N_s)^(-1/2)`, strictly inside `(0, 1)`.
pub fn correlation_ratio(n_s: MeanPhotonNumber) -> Result<f64> {
    let n = n_s.positive()?;
    Ok((1.0 + 1.0 / n).powf(-0.5))
}

/// Truncation index for the Fock-space oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockCutoff {
    n_max: usize,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::CutoffInsufficient {
                n_max,
                tail: 1.0,
                limit: FOCK_TAIL_LIMIT,
            });
        }
        Ok(Self { n_max })
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    /// Smallest cutoff whose discarded squeezed-vacuum tail is below [`FOCK_TAIL_LIMIT`].
    pub fn for_tmsv(n_s: MeanPhotonNumber) -> Result<Self> {
        let n = n_s.positive()?;
        let ratio = n / (n + 1.0);
        let estimate = (FOCK_TAIL_LIMIT.ln() / ratio.ln()).ceil().max(1.0) as usize;
        let mut n_max = estimate.saturating_sub(2).max(1);
        while tmsv_tail(n, n_max) >= FOCK_TAIL_LIMIT {
            n_max += 1;
        }
        Ok(Self { n_max })
    }

    /// Smallest cutoff whose discarded coherent-pair tail is below [`FOCK_TAIL_LIMIT`].
    pub fn for_coherent(n_s: MeanPhotonNumber) -> Result<Self> {
        let n = n_s.value();
        let mut n_max = 1;
        while coherent_pair_tail(n, n_max) >= FOCK_TAIL_LIMIT {
            n_max += 1;
        }
        Ok(Self { n_max })
    }
}

/// `Σ_{n > n_max} N^n / (N + 1)^(n+1) = (N / (N + 1))^(n_max + 1)`.
pub fn tmsv_tail(n_s: f64, n_max: usize) -> f64 {
    (n_s / (n_s + 1.0)).powi(n_max as i32 + 1)
}

/// Probability mass of `|α⟩ ⊗ |α⟩`, `|α|² = N_s / 2`, outside `[0, n_max]²`.
pub fn coherent_pair_tail(n_s: f64, n_max: usize) -> f64 {
    let single = poisson_tail(n_s / 2.0, n_max);
    single * (2.0 - single)
}

fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_fact = (1..=n_max + 1).map(|k| (k as f64).ln()).sum::<f64>();
    let mut total = 0.0;
    let mut k = n_max + 1;
    loop {
        let term = (-mean + k as f64 * ln_mean - ln_fact).exp();
        total += term;
        if (k as f64) > mean && term < total * 1e-17 {
            break;
        }
        k += 1;
        ln_fact += (k as f64).ln();
    }
    total
}

/// Two-mode pure state on a truncated Fock basis, amplitude index `n_s * dim + n_i`.
///
/// `dim` leaves one spare level above the populated cutoff so a single
/// creation operator never falls off the basis.
struct TwoModeState {
    dim: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Copy)]
enum Mode {
    Signal,
    Idler,
}

impl TwoModeState {
    fn from_amplitudes(n_max: usize, amp: impl Fn(usize, usize) -> f64) -> Self {
        let dim = n_max + 2;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
        for n in 0..=n_max {
            for m in 0..=n_max {
                amps[n * dim + m] = Complex64::new(amp(n, m), 0.0);
            }
        }
        Self { dim, amps }
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn lower(&self, mode: Mode) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for n in 0..d {
            for m in 0..d {
                let a = self.amps[n * d + m];
                match mode {
                    Mode::Signal if n > 0 => out[(n - 1) * d + m] += a * (n as f64).sqrt(),
                    Mode::Idler if m > 0 => out[n * d + m - 1] += a * (m as f64).sqrt(),
                    _ => {}
                }
            }
        }
        out
    }

    fn raise(&self, mode: Mode) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for n in 0..d {
            for m in 0..d {
                let a = self.amps[n * d + m];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                match mode {
                    Mode::Signal => {
                        assert!(n + 1 < d, "creation operator left the truncated basis");
                        out[(n + 1) * d + m] += a * ((n + 1) as f64).sqrt();
                    }
                    Mode::Idler => {
                        assert!(m + 1 < d, "creation operator left the truncated basis");
                        out[n * d + m + 1] += a * ((m + 1) as f64).sqrt();
                    }
                }
            }
        }
        out
    }

    /// `(I ψ, Q ψ)` for one mode.
    fn quadratures(&self, mode: Mode) -> [Vec<Complex64>; 2] {
        let lowered = self.lower(mode);
        let raised = self.raise(mode);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let minus_i = Complex64::new(0.0, -scale);
        let in_phase = lowered.iter().zip(&raised).map(|(l, r)| (l + r) * scale).collect();
        let quad = lowered.iter().zip(&raised).map(|(l, r)| (l - r) * minus_i).collect();
        [in_phase, quad]
    }

    fn mean_photons(&self, mode: Mode) -> f64 {
        let lowered = self.lower(mode);
        lowered.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.norm_sqr()
    }

    /// `2 Re⟨R_j ψ | R_k ψ⟩ / ⟨ψ|ψ⟩`, which equals twice the symmetrized moment.
    fn covariance(&self) -> QuadratureCovariance {
        let [is, qs] = self.quadratures(Mode::Signal);
        let [ii, qi] = self.quadratures(Mode::Idler);
        let vectors = [is, qs, ii, qi];
        let norm = self.norm_sqr();
        let mut entries = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in j..4 {
                let inner: Complex64 = vectors[j]
                    .iter()
                    .zip(&vectors[k])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                entries[j][k] = 2.0 * inner.re / norm;
            }
        }
        QuadratureCovariance::from_upper(entries)
    }
}

fn tmsv_state(n_s: f64, cutoff: FockCutoff) -> TwoModeState {
    let ln_n = n_s.ln();
    let ln_n1 = (n_s + 1.0).ln();
    TwoModeState::from_amplitudes(cutoff.n_max, |n, m| {
        if n == m {
            (0.5 * (n as f64 * ln_n - (n as f64 + 1.0) * ln_n1)).exp()
        } else {
            0.0
        }
    })
}

fn coherent_amplitudes(alpha: f64, n_max: usize) -> Vec<f64> {
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = (-alpha * alpha / 2.0).exp();
    for n in 0..=n_max {
        amps.push(c);
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    amps
}

fn coherent_state(n_s: f64, cutoff: FockCutoff) -> TwoModeState {
    let amps = coherent_amplitudes((n_s / 2.0).sqrt(), cutoff.n_max);
    TwoModeState::from_amplitudes(cutoff.n_max, |n, m| amps[n] * amps[m])
}

/// Squeezed-vacuum covariance re-derived from the truncated number-state expansion.
pub fn tmsv_covariance_oracle(
    n_s: MeanPhotonNumber,
    cutoff: FockCutoff,
) -> Result<QuadratureCovariance> {
    let n = n_s.positive()?;
    check_tail(cutoff, tmsv_tail(n, cutoff.n_max))?;
    Ok(tmsv_state(n, cutoff).covariance())
}

/// Signal mean photon number recovered from the truncated squeezed vacuum.
pub fn tmsv_mean_photons_oracle(n_s: MeanPhotonNumber, cutoff: FockCutoff) -> Result<f64> {
    let n = n_s.positive()?;
    check_tail(cutoff, tmsv_tail(n, cutoff.n_max))?;
    Ok(tmsv_state(n, cutoff).mean_photons(Mode::Signal))
}

/// Second moments of `|α⟩ ⊗ |α⟩` with real `α = √(N_s / 2)`.
///
/// The I-sector matches [`coherent_covariance`]; the Q diagonal comes out as 1
/// and the `Q_S Q_I` entry as 0, which differs from the block form used by the
/// range model. The entries are reported as computed.
pub fn coherent_covariance_oracle(
    n_s: MeanPhotonNumber,
    cutoff: FockCutoff,
) -> Result<QuadratureCovariance> {
    let n = n_s.value();
    check_tail(cutoff, coherent_pair_tail(n, cutoff.n_max))?;
    Ok(coherent_state(n, cutoff).covariance())
}

fn check_tail(cutoff: FockCutoff, tail: f64) -> Result<()> {
    if tail < FOCK_TAIL_LIMIT {
        Ok(())
    } else {
        Err(Error::CutoffInsufficient {
            n_max: cutoff.n_max,
            tail,
            limit: FOCK_TAIL_LIMIT,
        })
    }
}
