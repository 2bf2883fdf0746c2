//! CSV formats shared by the library and the command-line tool.
//!
//! Every floating-point value is written in scientific notation with nine
//! significant digits so output is byte-identical across platforms.

use std::io::{Read, Write};

use nalgebra::Vector3;
use thiserror::Error;

use crate::analysis::SpeedProfile;
use crate::kinematics::Posture;
use crate::thermal::ThermalState;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv header: {0}")]
    Header(String),
    #[error("csv line {line}: {message}")]
    Value { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// `x` with nine significant digits, e.g. `1.23456789e-1`.
pub fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

/// A header row followed by numeric rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table<R: Read>(reader: R) -> Result<Table, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() {
        return Err(CsvError::Header("empty header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != header.len() {
            return Err(CsvError::Value {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| CsvError::Value {
                    line,
                    message: format!("`{s}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Reads `joint,angle_rad` lines (header optional) into a posture.
pub fn read_posture<R: Read>(reader: R) -> Result<Posture, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut posture = Posture::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        if rec.len() != 2 {
            return Err(CsvError::Value {
                line,
                message: format!("expected `joint,angle_rad`, found {} fields", rec.len()),
            });
        }
        match rec[1].parse::<f64>() {
            Ok(a) => posture.set(&rec[0], a),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CsvError::Value {
                    line,
                    message: format!("`{}` is not a number", &rec[1]),
                })
            }
        }
    }
    Ok(posture)
}

pub fn write_points<W: Write>(mut w: W, points: &[Vector3<f64>]) -> std::io::Result<()> {
    writeln!(w, "x,y,z")?;
    for p in points {
        writeln!(w, "{},{},{}", sci(p.x), sci(p.y), sci(p.z))?;
    }
    Ok(())
}

pub fn write_thermal_trace<W: Write>(mut w: W, trace: &[ThermalState]) -> std::io::Result<()> {
    writeln!(w, "time_s,T_motor_K,T_structure_K")?;
    for s in trace {
        writeln!(w, "{},{},{}", sci(s.time), sci(s.t_motor), sci(s.t_structure))?;
    }
    Ok(())
}

pub fn write_speed_profile<W: Write>(mut w: W, profile: &SpeedProfile) -> std::io::Result<()> {
    writeln!(w, "time_s,speed_mps")?;
    for (t, s) in profile.times.iter().zip(&profile.speeds) {
        writeln!(w, "{},{}", sci(*t), sci(*s))?;
    }
    Ok(())
}

pub fn write_tensions<W: Write>(mut w: W, names: &[String], tensions: &[f64]) -> std::io::Result<()> {
    writeln!(w, "muscle,tension_newtons")?;
    for (n, f) in names.iter().zip(tensions) {
        writeln!(w, "{n},{}", sci(*f))?;
    }
    Ok(())
}

pub fn write_calibration_samples<W: Write>(mut w: W, samples: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "raw,tension_newtons")?;
    for (raw, t) in samples {
        writeln!(w, "{},{}", sci(*raw), sci(*t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_has_nine_significant_digits() {
        assert_eq!(sci(0.35), "3.50000000e-1");
        assert_eq!(sci(-1234.5), "-1.23450000e3");
        assert_eq!(sci(0.0), "0.00000000e0");
    }

    #[test]
    fn posture_csv() {
        let p = read_posture("joint,angle_rad\nelbow,-0.5\nwrist, 0.25\n".as_bytes()).unwrap();
        assert_eq!(p.get("elbow"), Some(-0.5));
        assert_eq!(p.get("wrist"), Some(0.25));
        assert!(read_posture("a,1\nb,x\n".as_bytes()).is_err());
    }

    #[test]
    fn table_rejects_ragged_rows() {
        assert!(read_table("a,b\n1,2\n3\n".as_bytes()).is_err());
        assert!(read_table("a,b\n1,z\n".as_bytes()).is_err());
    }
}
