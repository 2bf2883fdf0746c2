//! Gear/pulley winding model and the tension-measurement unit.
//!
//! The tension-measurement unit is a lever: the wire tension `T` acts on arm
//! `r3`, the load cell reads `F` across arms `r1 + r2`, so
//! `T = r3 / (r1 + r2) · F`.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::units::{kgf_to_newtons, mm_to_m};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActuationError {
    #[error("{field} must be positive and finite, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("efficiency must lie in (0, 1], got {0}")]
    Efficiency(f64),
    #[error("load-cell reading {reading} N is outside [0, {max}] N (sensor saturated)")]
    SensorSaturated { reading: f64, max: f64 },
    #[error("{quantity} must be nonnegative, got {value}")]
    Negative { quantity: &'static str, value: f64 },
    #[error("calibration needs at least two samples with distinct raw readings")]
    DegenerateSamples,
    #[error("calibration sample {line}: {message}")]
    SampleFormat { line: usize, message: String },
}

/// Motor + gearbox + winding pulley.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorSpec {
    pub gear_ratio: f64,
    /// Winding pulley radius, meters.
    pub pulley_radius: f64,
    pub efficiency: f64,
    /// Newtons.
    pub continuous_max_tension: f64,
    /// Meters per second.
    pub no_load_winding_rate: f64,
    /// Ohms.
    pub winding_resistance: f64,
    /// Newton-meters per ampere.
    pub torque_constant: f64,
}

impl ActuatorSpec {
    pub fn validate(&self) -> Result<(), ActuationError> {
        let positive = [
            ("gear_ratio", self.gear_ratio),
            ("pulley_radius", self.pulley_radius),
            ("continuous_max_tension", self.continuous_max_tension),
            ("no_load_winding_rate", self.no_load_winding_rate),
            ("winding_resistance", self.winding_resistance),
            ("torque_constant", self.torque_constant),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ActuationError::NotPositive { field, value });
            }
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(ActuationError::Efficiency(self.efficiency));
        }
        Ok(())
    }
}

/// Lever arms of the tension-measurement unit and the load-cell rating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorGeometry {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// Load-cell rated force, newtons.
    pub loadcell_max: f64,
}

impl SensorGeometry {
    /// The shipped unit: r1 = r2 = 5.0 mm, r3 = 11.3 mm, 50 kgf load cell.
    pub fn tension_unit() -> Self {
        Self {
            r1: mm_to_m(5.0),
            r2: mm_to_m(5.0),
            r3: mm_to_m(11.3),
            loadcell_max: kgf_to_newtons(50.0),
        }
    }

    pub fn validate(&self) -> Result<(), ActuationError> {
        for (field, value) in [("r1", self.r1), ("r2", self.r2), ("r3", self.r3), ("loadcell_max", self.loadcell_max)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ActuationError::NotPositive { field, value });
            }
        }
        Ok(())
    }

    /// `r3 / (r1 + r2)`.
    pub fn ratio(&self) -> f64 {
        self.r3 / (self.r1 + self.r2)
    }

    /// Largest measurable wire tension.
    pub fn rated_tension(&self) -> f64 {
        self.r3 * self.loadcell_max / (self.r1 + self.r2)
    }
}

/// Wire tension from a load-cell reading.
pub fn unit_tension_from_loadcell(geom: &SensorGeometry, reading: f64) -> Result<f64, ActuationError> {
    geom.validate()?;
    if !(0.0..=geom.loadcell_max).contains(&reading) {
        return Err(ActuationError::SensorSaturated {
            reading,
            max: geom.loadcell_max,
        });
    }
    Ok(geom.r3 * reading / (geom.r1 + geom.r2))
}

/// Least-squares line `tension = gain · raw + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub gain: f64,
    pub offset: f64,
    /// Root-mean-square residual, newtons.
    pub rms_residual: f64,
}

impl Calibration {
    pub fn apply(&self, raw: f64) -> f64 {
        self.gain * raw + self.offset
    }
}

/// Fits `tension = gain · raw + offset` to `(raw, tension)` samples.
pub fn calibrate_sensor(samples: &[(f64, f64)]) -> Result<Calibration, ActuationError> {
    if samples.len() < 2 {
        return Err(ActuationError::DegenerateSamples);
    }
    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in samples {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    let spread = samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
    if !(sxx > (spread * 1e-12).powi(2) * n) {
        return Err(ActuationError::DegenerateSamples);
    }
    let gain = sxy / sxx;
    let offset = mean_y - gain * mean_x;
    let sse: f64 = samples
        .iter()
        .map(|&(x, y)| {
            let r = y - (gain * x + offset);
            r * r
        })
        .sum();
    Ok(Calibration {
        gain,
        offset,
        rms_residual: (sse / n).sqrt(),
    })
}

/// Reads `raw,tension_newtons` lines; a non-numeric first line is taken as a
/// header.
pub fn read_calibration_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>, ActuationError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| ActuationError::SampleFormat {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(ActuationError::SampleFormat {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(raw), Ok(t)) => out.push((raw, t)),
            _ if i == 0 => continue,
            _ => {
                return Err(ActuationError::SampleFormat {
                    line,
                    message: format!("non-numeric values `{}`, `{}`", &record[0], &record[1]),
                })
            }
        }
    }
    Ok(out)
}

/// `(raw, tension)` pairs from the lever ratio of `geom`, raw readings drawn
/// uniformly over the load-cell range and each tension scaled by a uniform
/// factor in `[1 − noise, 1 + noise]`. Same seed, same samples.
pub fn synthetic_calibration_samples(
    geom: &SensorGeometry,
    n: usize,
    noise: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>, ActuationError> {
    geom.validate()?;
    if !(0.0..1.0).contains(&noise) {
        return Err(ActuationError::Negative {
            quantity: "noise fraction (must also be below 1)",
            value: noise,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio = geom.ratio();
    Ok((0..n)
        .map(|_| {
            let raw = rng.random_range(0.0..=geom.loadcell_max);
            let scale = if noise > 0.0 { 1.0 + rng.random_range(-noise..=noise) } else { 1.0 };
            (raw, ratio * raw * scale)
        })
        .collect())
}

/// Wire tension produced by a motor torque: `η · G · τ_m / r`.
pub fn winding_tension(spec: &ActuatorSpec, motor_torque: f64) -> Result<f64, ActuationError> {
    if !(motor_torque >= 0.0) {
        return Err(ActuationError::Negative {
            quantity: "motor torque",
            value: motor_torque,
        });
    }
    Ok(spec.efficiency * spec.gear_ratio * motor_torque / spec.pulley_radius)
}

/// Wire speed for a motor speed: `ω · r / G`.
pub fn winding_rate(spec: &ActuatorSpec, motor_speed: f64) -> Result<f64, ActuationError> {
    if !(motor_speed >= 0.0) {
        return Err(ActuationError::Negative {
            quantity: "motor speed",
            value: motor_speed,
        });
    }
    Ok(motor_speed * spec.pulley_radius / spec.gear_ratio)
}

/// Motor torque needed to hold wire tension `f`.
pub fn motor_torque_for_tension(spec: &ActuatorSpec, f: f64) -> f64 {
    f * spec.pulley_radius / (spec.gear_ratio * spec.efficiency)
}

/// Joule heating while holding tension `f`: `I²R` with `I = τ_m / k_t`.
pub fn heat_power_from_tension(spec: &ActuatorSpec, f: f64) -> Result<f64, ActuationError> {
    if !(f >= 0.0) {
        return Err(ActuationError::Negative {
            quantity: "tension",
            value: f,
        });
    }
    if !(spec.torque_constant > 0.0) {
        return Err(ActuationError::NotPositive {
            field: "torque_constant",
            value: spec.torque_constant,
        });
    }
    let current = motor_torque_for_tension(spec, f) / spec.torque_constant;
    Ok(current * current * spec.winding_resistance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ActuatorSpec {
        ActuatorSpec {
            gear_ratio: 157.0,
            pulley_radius: 0.004,
            efficiency: 1.0,
            continuous_max_tension: 424.0,
            no_load_winding_rate: 0.116,
            winding_resistance: 1.2,
            torque_constant: 0.0125,
        }
    }

    #[test]
    fn rated_tension_is_56_5_kgf() {
        let g = SensorGeometry::tension_unit();
        let t = unit_tension_from_loadcell(&g, kgf_to_newtons(50.0)).unwrap();
        let expected = kgf_to_newtons(56.5);
        assert!((t - expected).abs() / expected < 1e-9);
        assert!((g.rated_tension() - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn loadcell_edges() {
        let g = SensorGeometry::tension_unit();
        assert_eq!(unit_tension_from_loadcell(&g, 0.0).unwrap(), 0.0);
        assert!(matches!(
            unit_tension_from_loadcell(&g, g.loadcell_max * 1.0001),
            Err(ActuationError::SensorSaturated { .. })
        ));
        assert!(unit_tension_from_loadcell(&g, -1.0).is_err());
        let unity = SensorGeometry {
            r1: 0.004,
            r2: 0.006,
            r3: 0.010,
            loadcell_max: 1000.0,
        };
        for f in [0.0, 1.0, 123.456, 999.0] {
            assert_eq!(unit_tension_from_loadcell(&unity, f).unwrap(), f);
        }
    }

    #[test]
    fn calibration_degenerate() {
        assert_eq!(calibrate_sensor(&[(1.0, 2.0), (1.0, 3.0)]), Err(ActuationError::DegenerateSamples));
        assert_eq!(calibrate_sensor(&[(1.0, 2.0)]), Err(ActuationError::DegenerateSamples));
    }

    #[test]
    fn calibration_exact_line() {
        let samples: Vec<_> = (0..20).map(|i| (i as f64 * 10.0, 1.13 * i as f64 * 10.0 + 2.0)).collect();
        let c = calibrate_sensor(&samples).unwrap();
        assert!((c.gain - 1.13).abs() < 1e-12);
        assert!((c.offset - 2.0).abs() < 1e-10);
        assert!(c.rms_residual < 1e-10);
    }

    #[test]
    fn csv_header_optional() {
        let with = "raw,tension_newtons\n1,1.13\n2,2.26\n";
        let without = "1,1.13\n2,2.26\n";
        assert_eq!(read_calibration_csv(with.as_bytes()).unwrap(), read_calibration_csv(without.as_bytes()).unwrap());
        assert!(matches!(
            read_calibration_csv("1,2\nx,3\n".as_bytes()),
            Err(ActuationError::SampleFormat { line: 2, .. })
        ));
    }

    #[test]
    fn winding_tension_matches_table_rating() {
        // 0.0108 Nm is the continuous motor torque implied by 424 N at 157:1, φ8.
        let f = winding_tension(&spec(), 0.0108).unwrap();
        assert!((f - 423.9).abs() < 0.1, "{f}");
        assert_eq!(winding_tension(&spec(), 0.0).unwrap(), 0.0);
        let half = ActuatorSpec { efficiency: 0.5, ..spec() };
        assert!((winding_tension(&spec(), 0.01).unwrap() - 2.0 * winding_tension(&half, 0.01).unwrap()).abs() < 1e-12);
        assert!(winding_tension(&spec(), -1.0).is_err());
    }

    #[test]
    fn winding_rate_inverse() {
        // 116 mm/s at no load implies 0.116 · 157 / 0.004 = 4553 rad/s.
        let implied: f64 = 0.116 * 157.0 / 0.004;
        assert!((implied - 4553.0).abs() < 1e-9);
        assert!((winding_rate(&spec(), implied).unwrap() - 0.116).abs() < 1e-15);
        assert_eq!(winding_rate(&spec(), 0.0).unwrap(), 0.0);
        let g84 = ActuatorSpec { gear_ratio: 84.0, ..spec() };
        let ratio = winding_rate(&g84, 1000.0).unwrap() / winding_rate(&spec(), 1000.0).unwrap();
        assert!((ratio - 157.0 / 84.0).abs() < 1e-12);
        assert!(winding_rate(&spec(), -1.0).is_err());
    }

    #[test]
    fn heat_power_is_quadratic() {
        let s = spec();
        assert_eq!(heat_power_from_tension(&s, 0.0).unwrap(), 0.0);
        let p40 = heat_power_from_tension(&s, kgf_to_newtons(40.0)).unwrap();
        let p20 = heat_power_from_tension(&s, kgf_to_newtons(20.0)).unwrap();
        assert!((p20 - p40 / 4.0).abs() < 1e-12 * p40);
        let zero_kt = ActuatorSpec { torque_constant: 0.0, ..s };
        assert!(heat_power_from_tension(&zero_kt, 1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(spec().validate().is_ok());
        assert!(ActuatorSpec { efficiency: 1.2, ..spec() }.validate().is_err());
        assert!(ActuatorSpec { gear_ratio: 0.0, ..spec() }.validate().is_err());
    }
}
