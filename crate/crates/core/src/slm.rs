//! Gray-level patterns for a column-addressed phase SLM and their PGM I/O.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phase::PhaseProfile;
use crate::units::{frequency_to_wavelength, wavelength_to_frequency};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SLMCalibration {
    pub columns: usize,
    pub rows: usize,
    pub wavelength_at_column_0: f64,
    /// May be negative when wavelength decreases along the columns.
    pub nm_per_column: f64,
    /// Phase mapped onto the 256 gray levels.
    pub phase_full_scale: f64,
}

impl Default for SLMCalibration {
    /// 1920×1080 panel spanning 1558.92 nm down to 1539.73 nm.
    fn default() -> Self {
        Self {
            columns: 1920,
            rows: 1080,
            wavelength_at_column_0: 1558.92,
            nm_per_column: -0.01,
            phase_full_scale: TAU,
        }
    }
}

impl SLMCalibration {
    pub fn validate(&self) -> Result<()> {
        if self.columns == 0 || self.rows == 0 {
            return Err(invalid("SLM geometry must have at least one row and column"));
        }
        if self.nm_per_column == 0.0 || !self.nm_per_column.is_finite() {
            return Err(invalid("nm_per_column must be finite and non-zero"));
        }
        if !(self.phase_full_scale > 0.0) {
            return Err(invalid("phase full scale must be positive"));
        }
        let last = self.wavelength(self.columns - 1);
        if !(self.wavelength_at_column_0 > 0.0) || !(last > 0.0) {
            return Err(invalid("calibration wavelengths must stay positive"));
        }
        Ok(())
    }

    pub fn wavelength(&self, column: usize) -> f64 {
        self.wavelength_at_column_0 + column as f64 * self.nm_per_column
    }

    pub fn frequency(&self, column: usize) -> f64 {
        wavelength_to_frequency(self.wavelength(column)).expect("validated calibration")
    }

    /// Frequency span covered by the columns, (low, high) in THz.
    pub fn frequency_span(&self) -> (f64, f64) {
        let a = self.frequency(0);
        let b = self.frequency(self.columns - 1);
        (a.min(b), a.max(b))
    }

    /// Structured-text sidecar.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("plain struct")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| invalid(format!("calibration: {e}")))?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrayPattern {
    calibration: SLMCalibration,
    /// One gray level per column; every row repeats it.
    levels: Vec<u8>,
}

impl GrayPattern {
    pub fn from_levels(calibration: SLMCalibration, levels: Vec<u8>) -> Result<Self> {
        calibration.validate()?;
        if levels.len() != calibration.columns {
            return Err(invalid(format!(
                "{} levels for {} columns",
                levels.len(),
                calibration.columns
            )));
        }
        Ok(Self { calibration, levels })
    }

    pub fn calibration(&self) -> &SLMCalibration {
        &self.calibration
    }

    pub fn columns(&self) -> usize {
        self.calibration.columns
    }

    pub fn rows(&self) -> usize {
        self.calibration.rows
    }

    pub fn row(&self) -> &[u8] {
        &self.levels
    }

    pub fn get(&self, row: usize, column: usize) -> u8 {
        assert!(row < self.rows());
        self.levels[column]
    }

    /// Full row-major byte matrix.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.levels.repeat(self.rows())
    }
}

/// gray = round(wrap(φ)/full_scale·256) mod 256, ties to even.
pub fn quantize(phase: f64, full_scale: f64) -> u8 {
    let wrapped = phase.rem_euclid(full_scale);
    ((wrapped / full_scale * 256.0).round_ties_even() as u32 % 256) as u8
}

pub fn dequantize(level: u8, full_scale: f64) -> f64 {
    level as f64 * full_scale / 256.0
}

pub fn phase_to_pattern(profile: &PhaseProfile, calibration: &SLMCalibration) -> Result<GrayPattern> {
    calibration.validate()?;
    let (lo, hi) = calibration.frequency_span();
    for band in profile.bands() {
        for edge in [band.start_thz, band.end_thz] {
            if edge < lo || edge > hi {
                return Err(Error::OutsideAxis {
                    what: "band edge for the SLM span",
                    value: edge,
                    start: lo,
                    end: hi,
                });
            }
        }
    }
    let levels = (0..calibration.columns)
        .map(|c| quantize(profile.interp(calibration.frequency(c)), calibration.phase_full_scale))
        .collect();
    GrayPattern::from_levels(*calibration, levels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnPhase {
    pub column: usize,
    pub wavelength_nm: f64,
    pub frequency_thz: f64,
    /// In [0, full scale).
    pub phase: f64,
}

pub fn pattern_to_phase(pattern: &GrayPattern) -> Vec<ColumnPhase> {
    let cal = pattern.calibration();
    pattern
        .row()
        .iter()
        .enumerate()
        .map(|(column, &g)| ColumnPhase {
            column,
            wavelength_nm: cal.wavelength(column),
            frequency_thz: cal.frequency(column),
            phase: dequantize(g, cal.phase_full_scale),
        })
        .collect()
}

pub fn export_pgm<W: Write>(pattern: &GrayPattern, mut out: W) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", pattern.columns(), pattern.rows())?;
    for _ in 0..pattern.rows() {
        out.write_all(pattern.row())?;
    }
    out.flush()?;
    Ok(())
}

fn header_token(data: &[u8], pos: &mut usize) -> Result<usize> {
    while *pos < data.len() && data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < data.len() && data[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Pgm(format!("expected a number at byte {start}")));
    }
    std::str::from_utf8(&data[start..*pos])
        .expect("ascii digits")
        .parse()
        .map_err(|_| Error::Pgm(format!("number at byte {start} is too large")))
}

/// Reads a binary PGM written by [`export_pgm`] (or any 8-bit P5 file without
/// comments). Rows must be identical; the calibration is attached as given.
pub fn import_pgm<R: Read>(mut input: R, calibration: &SLMCalibration) -> Result<GrayPattern> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    if !data.starts_with(b"P5") {
        return Err(Error::Pgm("missing P5 magic".into()));
    }
    let mut pos = 2;
    let columns = header_token(&data, &mut pos)?;
    let rows = header_token(&data, &mut pos)?;
    let maxval = header_token(&data, &mut pos)?;
    if maxval != 255 {
        return Err(Error::Pgm(format!("maxval {maxval} unsupported, expected 255")));
    }
    if data.get(pos).is_none_or(|b| !b.is_ascii_whitespace()) {
        return Err(Error::Pgm("header not terminated by whitespace".into()));
    }
    pos += 1;
    let payload = &data[pos..];
    let expected = columns
        .checked_mul(rows)
        .ok_or_else(|| Error::Pgm("image dimensions overflow".into()))?;
    if payload.len() < expected {
        return Err(Error::Pgm(format!("truncated payload: {} of {expected} bytes", payload.len())));
    }
    if payload.len() > expected {
        return Err(Error::Pgm(format!("{} trailing bytes", payload.len() - expected)));
    }
    if columns != calibration.columns || rows != calibration.rows {
        return Err(Error::Pgm(format!(
            "image is {columns}×{rows}, calibration expects {}×{}",
            calibration.columns, calibration.rows
        )));
    }
    if columns == 0 || rows == 0 {
        return Err(Error::Pgm("empty image".into()));
    }
    let first = &payload[..columns];
    if let Some(r) = payload.chunks(columns).position(|row| row != first) {
        return Err(Error::Pgm(format!("row {r} differs from row 0")));
    }
    GrayPattern::from_levels(*calibration, first.to_vec())
}

/// Wavelength of a frequency, for labeling pattern columns.
pub fn column_for_frequency(calibration: &SLMCalibration, frequency: f64) -> Result<f64> {
    let lambda = frequency_to_wavelength(frequency)?;
    Ok((lambda - calibration.wavelength_at_column_0) / calibration.nm_per_column)
}
