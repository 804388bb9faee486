//! `qi-rangekit` command-line front end.
//!
//! Exit codes: 0 success, 2 input or config error, 3 no physical solution.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{ScenarioConfig, BUNDLED_TABLE};

use crate::atmosphere::{form_factor, load_table, AttenuationTable};
use crate::detection_mc::{detector_gain_experiment, Seed};
use crate::error::{Error, Result};
use crate::link_budget::{albersheim_snr_min, linear_to_db};
use crate::quantum_states::{
    coherent_covariance, coherent_covariance_oracle, correlation_ratio, tmsv_covariance, tmsv_covariance_oracle,
    FockCutoff, MeanPhotonNumber, QuadratureCovariance,
};
use crate::radiometry::{Bandwidth, Frequency};
use crate::range_solver::{log_grid, r_max, r_max_free, sweep_range, sweep_ratio, FourPiConvention, Mode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NO_SOLUTION: u8 = 3;

pub const CONFIG_ENV: &str = "QI_RANGEKIT_CONFIG";
pub const FIGURE3_HEADER: &str = "n_s,frequency_hz,mode,r_max_m,converged";
pub const FIGURE1_HEADER: &str = "n_s,ratio";

#[derive(Debug, Parser)]
#[command(name = "qi-rangekit", version, about = "Quantum vs classical illumination range model")]
struct Cli {
    /// Scenario config (flat JSON); omitted fields use the reference system.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    /// Print the effective scenario config as JSON and exit.
    #[arg(long)]
    dump_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transmit power for N_s photons per mode.
    Power {
        #[arg(long)]
        ns: f64,
        /// Carrier frequency, Hz.
        #[arg(long)]
        freq: f64,
        /// Bandwidth, Hz.
        #[arg(long)]
        bw: f64,
    },
    /// Signal/idler covariance matrix.
    Covariance {
        #[arg(long)]
        ns: f64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Also evaluate the truncated Fock-space oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Classical-to-quantum correlation ratio C_c / C_q.
    Ratio {
        #[arg(long)]
        ns: f64,
    },
    /// Absorption coefficient and form factor from an attenuation table.
    Atten {
        /// Frequency, Hz.
        #[arg(long)]
        freq: f64,
        /// One-way path length, m.
        #[arg(long)]
        range: Option<f64>,
        /// CSV table; defaults to the config's table, then the bundled one.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Maximum detection range at one operating point.
    Range {
        #[arg(long)]
        ns: f64,
        /// Frequency, Hz.
        #[arg(long)]
        freq: f64,
        /// Solve only this mode (both when omitted).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write a figure dataset as CSV.
    Sweep {
        /// 1: correlation ratio; 3: maximum range per frequency and mode.
        #[arg(long, value_parser = ["1", "3"])]
        figure: String,
        #[arg(long, default_value_t = 1e-3)]
        ns_min: f64,
        #[arg(long, default_value_t = 10.0)]
        ns_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Monte Carlo correlation-detector gain, QI over CI.
    Mc {
        #[arg(long)]
        ns: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        nb: f64,
        #[arg(long, default_value_t = 200_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Use the bundled atmospheric attenuation table.
    #[arg(long)]
    bundled_atten: bool,
    /// Use a (4π)⁴ range denominator instead of (4π)².
    #[arg(long)]
    paper_literal_4pi4: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Ci,
    Qi,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ci => Mode::Ci,
            ModeArg::Qi => Mode::Qi,
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_INPUT
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoDetection { .. } | Error::UnphysicalGeometry { .. } => EXIT_NO_SOLUTION,
        _ => EXIT_INPUT,
    }
}

fn execute(cli: Cli) -> Result<String> {
    let config = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if cli.dump_config {
        return Ok(config.to_json() + "\n");
    }
    let Some(command) = cli.command else {
        return Err(Error::Config("no command given (try --help)".into()));
    };
    match command {
        Command::Power { ns, freq, bw } => cmd_power(&config, ns, freq, bw),
        Command::Covariance { ns, mode, oracle } => cmd_covariance(ns, mode.into(), oracle),
        Command::Ratio { ns } => cmd_ratio(ns),
        Command::Atten { freq, range, table } => cmd_atten(&config, freq, range, table),
        Command::Range { ns, freq, mode, model } => cmd_range(apply_model_args(config, &model), ns, freq, mode.map(Into::into)),
        Command::Sweep {
            figure,
            ns_min,
            ns_max,
            points,
            output,
            model,
        } => cmd_sweep(apply_model_args(config, &model), &figure, ns_min, ns_max, points, output),
        Command::Mc {
            ns,
            eta,
            nb,
            trials,
            seed,
        } => cmd_mc(ns, eta, nb, trials, seed),
    }
}

fn apply_model_args(mut config: ScenarioConfig, model: &ModelArgs) -> ScenarioConfig {
    if model.bundled_atten {
        config.attenuation_table_path = Some(BUNDLED_TABLE.into());
    }
    if model.paper_literal_4pi4 {
        config.four_pi_exponent = 4;
    }
    config
}

fn cmd_power(config: &ScenarioConfig, ns: f64, freq: f64, bw: f64) -> Result<String> {
    let n_s = MeanPhotonNumber::new(ns)?;
    let p = config
        .constants()
        .transmit_power(n_s, Frequency::new(freq)?, Bandwidth::new(bw)?)?;
    Ok(format!("P_t = {:.9e} W = {:.6} dBm\n", p.watts(), p.dbm()?))
}

fn format_matrix(out: &mut String, m: &QuadratureCovariance) {
    out.push_str("          I_S          Q_S          I_I          Q_I\n");
    for (label, row) in ["I_S", "Q_S", "I_I", "Q_I"].iter().zip(m.entries()) {
        let _ = write!(out, "{label}");
        for v in row {
            let _ = write!(out, " {v:>12.8}");
        }
        out.push('\n');
    }
}

fn cmd_covariance(ns: f64, mode: Mode, oracle: bool) -> Result<String> {
    let n_s = MeanPhotonNumber::new(ns)?;
    let (closed, label) = match mode {
        Mode::Qi => (tmsv_covariance(n_s), "two-mode squeezed vacuum"),
        Mode::Ci => (coherent_covariance(n_s), "correlated coherent pair"),
    };
    let e = closed.entries();
    let mut out = format!("{label}, N_s = {ns}\nS = {:.8}, C = {:.8}\n", e[0][0], e[0][2]);
    format_matrix(&mut out, &closed);
    if oracle {
        let (cutoff, computed) = match mode {
            Mode::Qi => {
                let c = FockCutoff::for_tmsv(n_s)?;
                (c, tmsv_covariance_oracle(n_s, c)?)
            }
            Mode::Ci => {
                let c = FockCutoff::for_coherent(n_s)?;
                (c, coherent_covariance_oracle(n_s, c)?)
            }
        };
        let _ = writeln!(out, "Fock oracle (n_max = {}):", cutoff.n_max());
        format_matrix(&mut out, &computed);
        let _ = writeln!(out, "max |deviation| = {:.3e}", computed.max_abs_deviation(&closed));
        if mode == Mode::Ci {
            out.push_str("note: the real-alpha product state has Q-diagonal 1 and zero Q_S-Q_I entry\n");
        }
    }
    Ok(out)
}

fn cmd_ratio(ns: f64) -> Result<String> {
    let r = correlation_ratio(MeanPhotonNumber::new(ns)?)?;
    Ok(format!("C_c/C_q = {r:.8}\nC_q/C_c = {:.8}\n", 1.0 / r))
}

fn cmd_atten(config: &ScenarioConfig, freq: f64, range: Option<f64>, table: Option<PathBuf>) -> Result<String> {
    let table = match table {
        Some(path) => {
            let file = std::fs::File::open(&path)
                .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
            load_table(file, path.to_string_lossy())?
        }
        None => config.attenuation_table()?.unwrap_or_else(AttenuationTable::bundled),
    };
    let f = Frequency::new(freq)?;
    let gamma = table.gamma_at(f)?;
    let mut out = format!("table: {}\ngamma({} GHz) = {} dB/km\n", table.source(), f.ghz(), gamma.db_per_km());
    if let Some(r) = range {
        let ff = form_factor(gamma, r)?;
        let _ = writeln!(
            out,
            "F({r} m) = {:.9e}\ntwo-way loss = {:.6} dB",
            ff.value(),
            2.0 * gamma.one_way_loss_db(r)
        );
    }
    Ok(out)
}

fn cmd_range(config: ScenarioConfig, ns: f64, freq: f64, mode: Option<Mode>) -> Result<String> {
    let scenario = config.scenario()?;
    let n_s = MeanPhotonNumber::new(ns)?;
    let f = Frequency::new(freq)?;
    let modes: Vec<Mode> = mode.map_or_else(|| Mode::ALL.to_vec(), |m| vec![m]);

    let first = scenario.problem(n_s, f, modes[0])?;
    let t_eff = scenario.constants.t_eff_from_noise_power(scenario.noise_power, scenario.bandwidth)?;
    let mut out = String::new();
    let _ = writeln!(out, "N_s = {ns}, f = {freq} Hz");
    let _ = writeln!(
        out,
        "G = {:.6e}, M = {}, T_eff = {:.2} K, N_B = {:.6e}, gamma = {} dB/km",
        first.gain(),
        first.integration.modes(),
        t_eff.kelvin(),
        first.n_b.value(),
        first.gamma.db_per_km()
    );
    let convention = match scenario.convention {
        FourPiConvention::LinkBudget => "(4pi)^2",
        FourPiConvention::PaperLiteral => "(4pi)^4 (literal)",
    };
    let _ = writeln!(out, "denominator convention: {convention}");
    let _ = write!(out, "SNR_min = {} dB (configured)", scenario.detection.snr_min_db);
    match albersheim_snr_min(scenario.detection.p_d, scenario.detection.p_fa, 1) {
        Ok(a) => {
            let _ = writeln!(
                out,
                "; Albersheim estimate for P_d = {}, P_fa = {:e}: {a:.3} dB (advisory)",
                scenario.detection.p_d, scenario.detection.p_fa
            );
        }
        Err(_) => out.push('\n'),
    }

    for m in modes {
        let problem = scenario.problem(n_s, f, m)?;
        let free = r_max_free(&problem)?;
        let sol = r_max(&problem)?;
        let _ = writeln!(
            out,
            "{m}: r_max = {:.6} m (lossless {:.6} m), threshold = {:.6} dB, residual = {:.3e} dB, F = {:.9}, eta = {:.6e}, iterations = {}, converged = {}",
            sol.r_max_m,
            free,
            problem.threshold_db()?,
            sol.residual_db,
            sol.form_factor.value(),
            sol.eta,
            sol.iterations,
            sol.converged
        );
    }
    Ok(out)
}

/// Figure-3 CSV: frequency-major, then mode, then `N_s`; failed points leave
/// `r_max_m` empty.
pub fn figure3_csv(config: &ScenarioConfig, grid: &[f64]) -> Result<String> {
    let scenario = config.scenario()?;
    let freqs = config.frequencies()?;
    let sweep = sweep_range(&scenario, grid, &freqs, &Mode::ALL)?;
    let mut out = String::from(FIGURE3_HEADER);
    out.push('\n');
    for series in &sweep.series {
        let f = series.frequency.expect("range sweep series carry a frequency").hertz();
        let mode = series.mode.expect("range sweep series carry a mode");
        for (n_s, value) in sweep.axis.iter().zip(&series.values) {
            match value {
                Ok(sol) => writeln!(out, "{n_s},{f},{mode},{},{}", sol.r_max_m, sol.converged),
                Err(_) => writeln!(out, "{n_s},{f},{mode},,false"),
            }
            .unwrap();
        }
    }
    Ok(out)
}

pub fn figure1_csv(grid: &[f64]) -> Result<String> {
    let sweep = sweep_ratio(grid)?;
    let mut out = String::from(FIGURE1_HEADER);
    out.push('\n');
    for (n_s, r) in sweep.axis.iter().zip(&sweep.series[0].values) {
        writeln!(out, "{n_s},{r}").unwrap();
    }
    Ok(out)
}

fn cmd_sweep(
    config: ScenarioConfig,
    figure: &str,
    ns_min: f64,
    ns_max: f64,
    points: usize,
    output: Option<PathBuf>,
) -> Result<String> {
    let grid = log_grid(ns_min, ns_max, points)?;
    let csv = match figure {
        "1" => figure1_csv(&grid)?,
        _ => figure3_csv(&config, &grid)?,
    };
    let rows = csv.lines().count() - 1;
    match output {
        Some(path) => {
            std::fs::write(&path, &csv).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            Ok(format!("wrote {rows} rows to {}\n", path.display()))
        }
        None => Ok(csv),
    }
}

fn cmd_mc(ns: f64, eta: f64, nb: f64, trials: usize, seed: u64) -> Result<String> {
    let n_s = MeanPhotonNumber::new(ns)?;
    let n_b = crate::radiometry::NoiseOccupancy::new(nb)?;
    let g = detector_gain_experiment(n_s, eta, n_b, trials, Seed(seed))?;
    let mut out = format!("N_s = {ns}, eta = {eta}, N_B = {nb}, trials = {trials}, seed = {seed}\n");
    for (label, d) in [("QI", g.qi), ("CI", g.ci)] {
        let _ = writeln!(
            out,
            "{label}: mean shift = {:.9e}, absent variance = {:.9e}, deflection = {:.9e} ({:.4} dB)",
            d.mean_shift,
            d.absent_variance,
            d.deflection,
            linear_to_db(d.deflection)
        );
    }
    let _ = writeln!(
        out,
        "correlation-detector deflection ratio QI/CI = {:.6} +/- {:.6} (1 + 1/N_s = {:.6})",
        g.ratio,
        g.standard_error,
        1.0 + 1.0 / ns
    );
    Ok(out)
}
