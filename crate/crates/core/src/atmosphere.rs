//! Tabulated gaseous absorption `γ(f)` and the one-way form factor.
//!
//! Tables are CSV with the exact header `frequency_ghz,gamma_db_per_km`;
//! `#` lines and blank lines are ignored. `γ` is in dB/km and ranges are in
//! metres, so `F = 10^(−γ · (R / 1000) / 10)`.

use std::fmt::Write as _;
use std::io::Read;

use crate::error::{non_negative, Error, Result};
use crate::radiometry::Frequency;

pub const CSV_HEADER: &str = "frequency_ghz,gamma_db_per_km";

const BUNDLED_CSV: &str = include_str!("../data/itu_p676_standard_atmosphere.csv");
const BUNDLED_SOURCE: &str = "bundled:itu-p676-standard-atmosphere";

/// Absorption coefficient `γ`, dB/km.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AbsorptionCoefficient(f64);

impl AbsorptionCoefficient {
    pub const LOSSLESS: Self = Self(0.0);

    pub fn new(db_per_km: f64) -> Result<Self> {
        non_negative("gamma_db_per_km", db_per_km).map(Self)
    }

    pub fn db_per_km(self) -> f64 {
        self.0
    }

    /// One-way loss over `range_m` metres, in dB.
    pub fn one_way_loss_db(self, range_m: f64) -> f64 {
        self.0 * range_m / 1000.0
    }
}

/// One-way power transmission, `0 < F ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FormFactor(f64);

impl FormFactor {
    pub const UNITY: Self = Self(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::domain("form_factor", value, "must lie in (0, 1]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `F = 10^(−γ R / 10)` with `γ` in dB/km and `range_m` in metres.
pub fn form_factor(gamma: AbsorptionCoefficient, range_m: f64) -> Result<FormFactor> {
    non_negative("range_m", range_m)?;
    let f = 10f64.powf(-gamma.one_way_loss_db(range_m) / 10.0);
    if f > 0.0 {
        Ok(FormFactor(f))
    } else {
        Err(Error::domain("form_factor", f, "path loss underflows f64"))
    }
}

/// Sorted `(frequency_ghz, gamma_db_per_km)` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationTable {
    rows: Vec<(f64, f64)>,
    source: String,
}

impl AttenuationTable {
    pub fn new(rows: Vec<(f64, f64)>, source: impl Into<String>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Validation {
                row: rows.len(),
                message: format!("need at least 2 rows, got {}", rows.len()),
            });
        }
        for (i, &(f, g)) in rows.iter().enumerate() {
            let row = i + 1;
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::Validation {
                    row,
                    message: format!("frequency {f} GHz must be finite and > 0"),
                });
            }
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::Validation {
                    row,
                    message: format!("gamma {g} dB/km must be finite and >= 0"),
                });
            }
            if i > 0 && f <= rows[i - 1].0 {
                return Err(Error::Validation {
                    row,
                    message: format!(
                        "frequency {f} GHz does not increase on previous row ({} GHz)",
                        rows[i - 1].0
                    ),
                });
            }
        }
        Ok(Self {
            rows,
            source: source.into(),
        })
    }

    /// The anchor table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED_CSV, BUNDLED_SOURCE).expect("bundled attenuation table is valid")
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `(min, max)` frequency span in GHz.
    pub fn span_ghz(&self) -> (f64, f64) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].0)
    }

    pub fn from_csv_str(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut header_seen = false;
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != CSV_HEADER {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header `{CSV_HEADER}`, found `{line}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 2 fields, found {}", fields.len()),
                });
            }
            let parse = |s: &str, what: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad {what} `{s}`: {e}"),
                })
            };
            rows.push((parse(fields[0], "frequency")?, parse(fields[1], "gamma")?));
        }
        if !header_seen {
            return Err(Error::Parse {
                line: 0,
                message: format!("missing header `{CSV_HEADER}`"),
            });
        }
        Self::new(rows, source)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (f, g) in &self.rows {
            writeln!(out, "{f},{g}").unwrap();
        }
        out
    }

    /// `γ(f)`: log–log linear between bracketing knots, plain linear when a
    /// bracketing knot has `γ = 0`. Queries outside the span are rejected.
    pub fn gamma_at(&self, f: Frequency) -> Result<AbsorptionCoefficient> {
        let ghz = f.ghz();
        let (lo, hi) = self.span_ghz();
        if !(lo..=hi).contains(&ghz) {
            return Err(Error::OutOfRange {
                ghz,
                min_ghz: lo,
                max_ghz: hi,
            });
        }
        let idx = self.rows.partition_point(|&(kf, _)| kf < ghz);
        let (f1, g1) = self.rows[idx];
        if f1 == ghz {
            return Ok(AbsorptionCoefficient(g1));
        }
        let (f0, g0) = self.rows[idx - 1];
        let gamma = if g0 > 0.0 && g1 > 0.0 {
            let t = (ghz.ln() - f0.ln()) / (f1.ln() - f0.ln());
            (g0.ln() + t * (g1.ln() - g0.ln())).exp()
        } else {
            let t = (ghz - f0) / (f1 - f0);
            g0 + t * (g1 - g0)
        };
        Ok(AbsorptionCoefficient(gamma))
    }
}

pub fn load_table(mut source: impl Read, label: impl Into<String>) -> Result<AttenuationTable> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    AttenuationTable::from_csv_str(&text, label)
}

pub fn gamma_at(table: &AttenuationTable, f: Frequency) -> Result<AbsorptionCoefficient> {
    table.gamma_at(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ghz(v: f64) -> Frequency {
        Frequency::new(v * 1e9).unwrap()
    }

    fn gamma(v: f64) -> AbsorptionCoefficient {
        AbsorptionCoefficient::new(v).unwrap()
    }

    #[test]
    fn loads_minimal_table() {
        let t = load_table(
            "frequency_ghz,gamma_db_per_km\n7,0.01\n95,0.5\n1000,100\n".as_bytes(),
            "inline",
        )
        .unwrap();
        assert_eq!(t.rows(), &[(7.0, 0.01), (95.0, 0.5), (1000.0, 100.0)]);
        assert_eq!(t.source(), "inline");
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# header comment\n\nfrequency_ghz,gamma_db_per_km\n# mid\n1,0.1\n\n2,0.2\n";
        assert_eq!(AttenuationTable::from_csv_str(text, "x").unwrap().rows().len(), 2);
    }

    #[test]
    fn rejects_bad_tables() {
        let unsorted = "frequency_ghz,gamma_db_per_km\n7,0.01\n95,0.5\n60,1\n";
        match AttenuationTable::from_csv_str(unsorted, "x").unwrap_err() {
            Error::Validation { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains("60"));
            }
            e => panic!("unexpected {e:?}"),
        }
        let dup = "frequency_ghz,gamma_db_per_km\n7,0.01\n7,0.5\n";
        assert!(matches!(AttenuationTable::from_csv_str(dup, "x"), Err(Error::Validation { row: 2, .. })));
        let neg = "frequency_ghz,gamma_db_per_km\n7,0.01\n8,-0.5\n";
        assert!(matches!(AttenuationTable::from_csv_str(neg, "x"), Err(Error::Validation { .. })));
        let short = "frequency_ghz,gamma_db_per_km\n7,0.01\n";
        assert!(matches!(AttenuationTable::from_csv_str(short, "x"), Err(Error::Validation { .. })));
        let header = "freq,gamma\n7,0.01\n8,0.5\n";
        assert!(matches!(AttenuationTable::from_csv_str(header, "x"), Err(Error::Parse { line: 1, .. })));
        let malformed = "frequency_ghz,gamma_db_per_km\n7,0.01\n8;0.5\n";
        assert!(matches!(AttenuationTable::from_csv_str(malformed, "x"), Err(Error::Parse { line: 3, .. })));
        let thousands = "frequency_ghz,gamma_db_per_km\n7,0.01\n1,000,0.5\n";
        assert!(matches!(AttenuationTable::from_csv_str(thousands, "x"), Err(Error::Parse { .. })));
        assert!(matches!(AttenuationTable::from_csv_str("", "x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn bundled_table_loads() {
        let t = AttenuationTable::bundled();
        assert_eq!(t.span_ghz(), (1.0, 1000.0));
        // oxygen complex near 60 GHz dominates its neighbourhood
        let peak = t.gamma_at(ghz(60.0)).unwrap().db_per_km();
        assert!(peak > 10.0 * t.gamma_at(ghz(40.0)).unwrap().db_per_km());
        assert!(peak > 10.0 * t.gamma_at(ghz(80.0)).unwrap().db_per_km());
        for f in [7.0, 95.0, 1000.0] {
            assert!(t.gamma_at(ghz(f)).is_ok());
        }
    }

    #[test]
    fn interpolation() {
        let t = AttenuationTable::new(vec![(10.0, 1.0), (1000.0, 100.0)], "x").unwrap();
        assert_relative_eq!(t.gamma_at(ghz(100.0)).unwrap().db_per_km(), 10.0, max_relative = 1e-12);
        assert_eq!(t.gamma_at(ghz(10.0)).unwrap().db_per_km(), 1.0);
        assert_eq!(t.gamma_at(ghz(1000.0)).unwrap().db_per_km(), 100.0);
        assert!(matches!(t.gamma_at(ghz(9.0)), Err(Error::OutOfRange { .. })));
        assert!(matches!(t.gamma_at(ghz(1001.0)), Err(Error::OutOfRange { .. })));

        let zero = AttenuationTable::new(vec![(10.0, 0.0), (20.0, 2.0)], "x").unwrap();
        assert_relative_eq!(zero.gamma_at(ghz(15.0)).unwrap().db_per_km(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn interpolation_continuous_at_knots() {
        let t = AttenuationTable::bundled();
        for &(f, g) in t.rows() {
            for side in [-1.0, 1.0] {
                let probe = f * (1.0 + side * 1e-14);
                if let Ok(v) = t.gamma_at(ghz(probe)) {
                    assert_relative_eq!(v.db_per_km(), g, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn form_factor_values() {
        assert_eq!(form_factor(gamma(123.0), 0.0).unwrap(), FormFactor::UNITY);
        assert_relative_eq!(form_factor(gamma(10.0), 1000.0).unwrap().value(), 0.1, max_relative = 1e-15);
        assert_relative_eq!(form_factor(gamma(3.0), 2000.0).unwrap().value(), 10f64.powf(-0.6), max_relative = 1e-15);
        assert_relative_eq!(10f64.powf(-0.6), 0.251_188_643_150_958, max_relative = 1e-12);
        assert!(form_factor(gamma(1.0), -1.0).is_err());
        assert!(FormFactor::new(0.0).is_err());
        assert!(FormFactor::new(1.5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn table_strategy() -> impl Strategy<Value = AttenuationTable> {
            prop::collection::vec((0.01f64..10.0, 0.0f64..500.0), 2..30).prop_map(|steps| {
                let mut f = 0.0;
                let rows = steps
                    .into_iter()
                    .map(|(df, g)| {
                        f += df;
                        (f, g)
                    })
                    .collect();
                AttenuationTable::new(rows, "prop").unwrap()
            })
        }

        proptest! {
            #[test]
            fn multiplicative(g in 0.0f64..100.0, r1 in 0.0f64..5000.0, r2 in 0.0f64..5000.0) {
                let whole = form_factor(gamma(g), r1 + r2).unwrap().value();
                let split = form_factor(gamma(g), r1).unwrap().value() * form_factor(gamma(g), r2).unwrap().value();
                prop_assert!((whole / split - 1.0).abs() < 1e-12);
            }

            #[test]
            fn strictly_decreasing(g in 0.01f64..100.0, r in 1.0f64..5000.0) {
                let base = form_factor(gamma(g), r).unwrap().value();
                prop_assert!(form_factor(gamma(g), r * 1.01).unwrap().value() < base);
                prop_assert!(form_factor(gamma(g * 1.01), r).unwrap().value() < base);
            }

            #[test]
            fn csv_round_trip(t in table_strategy()) {
                let back = AttenuationTable::from_csv_str(&t.to_csv_string(), "prop").unwrap();
                prop_assert_eq!(back, t);
            }
        }
    }
}
