//! Programmable phase functions φ(ω) for the phase-control device.
//!
//! A profile is assembled band by band: a constant π/2 over the pump band,
//! `π/2 ∓ u(Ω, a)` over each signal/idler band, and a hold-edge fill in
//! between. The interference term of the interferometer depends on the
//! profile only through its second difference, see [`PhaseProfile::delta_phi`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::units::{check_on_axis, FrequencyAxis, MediumSpec, PumpSpec};

/// Shaping function whose cosine approximates a Gaussian:
/// cos(u(x, a)) ≈ exp(−x²/a²).
///
/// The argument of the arctangent is the series inverting that relation up
/// to ninth order, so u is odd, strictly increasing and bounded by π/2.
pub fn u_series(x: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(invalid(format!("bandwidth parameter must be positive, got {a}")));
    }
    Ok(u_unchecked(x, a))
}

#[inline]
pub(crate) fn u_unchecked(x: f64, a: f64) -> f64 {
    let t = x / a;
    let t2 = t * t;
    // √2 t + t³/√2 + 5t⁵/(12√2) + t⁷/(8√2) + 79t⁹/(2880√2), Horner in t²
    let poly = t
        * (SQRT_2
            + t2 * FRAC_1_SQRT_2
                * (1.0 + t2 * (5.0 / 12.0 + t2 * (1.0 / 8.0 + t2 * (79.0 / 2880.0)))));
    poly.atan()
}

/// One signal/idler island of the design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub signal_center: f64,
    pub idler_center: f64,
    pub a_signal: f64,
    pub a_idler: f64,
    pub band_half_width: f64,
    /// Flips the sign of u in both sub-bands.
    pub reversed: bool,
}

impl ChannelSpec {
    /// Channel with equal signal/idler bandwidth parameters, the idler placed
    /// by energy conservation and the default 3σ_p band half-width.
    pub fn symmetric(pump: &PumpSpec, signal_center: f64, a: f64) -> Self {
        Self {
            signal_center,
            idler_center: 2.0 * pump.center_frequency - signal_center,
            a_signal: a,
            a_idler: a,
            band_half_width: 3.0 * pump.sigma,
            reversed: false,
        }
    }

    pub fn validate(&self, pump: &PumpSpec) -> Result<()> {
        for (name, v) in [
            ("a_signal", self.a_signal),
            ("a_idler", self.a_idler),
            ("band_half_width", self.band_half_width),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("channel {name} must be positive, got {v}")));
            }
        }
        let mismatch = self.signal_center + self.idler_center - 2.0 * pump.center_frequency;
        if mismatch.abs() > 1e-6 {
            return Err(invalid(format!(
                "channel ({}, {}) THz violates energy conservation by {mismatch:e} THz",
                self.signal_center, self.idler_center
            )));
        }
        Ok(())
    }

    fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }

    pub fn signal_phase(&self, frequency: f64) -> f64 {
        FRAC_PI_2 - self.sign() * u_unchecked(frequency - self.signal_center, self.a_signal)
    }

    pub fn idler_phase(&self, frequency: f64) -> f64 {
        FRAC_PI_2 + self.sign() * u_unchecked(frequency - self.idler_center, self.a_idler)
    }
}

/// Multi-island layout on a common pump: idlers by energy conservation, band
/// half-width min(3σ_p, half the smallest island spacing), and every second
/// island reversed so adjacent band edges meet.
pub fn island_layout(pump: &PumpSpec, signal_centers: &[f64], a: f64) -> Vec<ChannelSpec> {
    let mut half_width = 3.0 * pump.sigma;
    for (i, x) in signal_centers.iter().enumerate() {
        for y in &signal_centers[i + 1..] {
            half_width = half_width.min((x - y).abs() / 2.0);
        }
    }
    signal_centers
        .iter()
        .enumerate()
        .map(|(k, &sc)| ChannelSpec {
            band_half_width: half_width,
            reversed: k % 2 == 1,
            ..ChannelSpec::symmetric(pump, sc, a)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    Pump,
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub kind: BandKind,
    /// Channel index; 0 for the pump band.
    pub channel: usize,
    pub start_thz: f64,
    pub end_thz: f64,
}

impl Band {
    fn contains(&self, f: f64) -> bool {
        let tol = 1e-12 * f.abs().max(1.0);
        f >= self.start_thz - tol && f <= self.end_thz + tol
    }

    fn overlaps(&self, other: &Band) -> bool {
        let tol = 1e-9;
        self.start_thz < other.end_thz - tol && other.start_thz < self.end_thz - tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandLabel {
    Pump,
    Signal(usize),
    Idler(usize),
    Fill,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    axis: FrequencyAxis,
    phi: Vec<f64>,
    labels: Vec<BandLabel>,
    bands: Vec<Band>,
    pump_offset: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BandMap {
    pump_offset: f64,
    #[serde(rename = "band", default)]
    bands: Vec<Band>,
}

impl PhaseProfile {
    pub fn axis(&self) -> &FrequencyAxis {
        &self.axis
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn labels(&self) -> &[BandLabel] {
        &self.labels
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Constant added to the pump band on top of π/2.
    pub fn pump_offset(&self) -> f64 {
        self.pump_offset
    }

    /// Profile of identical zeros: no phase programmed.
    pub fn flat(axis: FrequencyAxis) -> Self {
        Self::from_samples(axis, vec![0.0; axis.count()]).expect("length matches")
    }

    /// Profile from raw samples with no band annotation.
    pub fn from_samples(axis: FrequencyAxis, phi: Vec<f64>) -> Result<Self> {
        Self::from_parts(axis, phi, Vec::new(), 0.0)
    }

    pub fn from_parts(
        axis: FrequencyAxis,
        phi: Vec<f64>,
        bands: Vec<Band>,
        pump_offset: f64,
    ) -> Result<Self> {
        if phi.len() != axis.count() {
            return Err(invalid(format!(
                "{} phase samples for an axis of {}",
                phi.len(),
                axis.count()
            )));
        }
        if let Some(i) = phi.iter().position(|p| !p.is_finite()) {
            return Err(invalid(format!("phase sample {i} is not finite")));
        }
        let labels = label_samples(&axis, &bands);
        Ok(Self { axis, phi, labels, bands, pump_offset })
    }

    /// φ at an arbitrary frequency by linear interpolation.
    pub fn phase_at(&self, frequency: f64) -> Result<f64> {
        check_on_axis("phase evaluation point", &self.axis, frequency)?;
        Ok(self.interp(frequency))
    }

    #[inline]
    pub(crate) fn interp(&self, frequency: f64) -> f64 {
        let last = self.axis.count() - 1;
        let pos = self.axis.position(frequency).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        let t = pos - i as f64;
        self.phi[i] + t * (self.phi[i + 1] - self.phi[i])
    }

    /// Second difference Δφ = 2φ((ω_s+ω_i)/2) − φ(ω_s) − φ(ω_i).
    pub fn delta_phi(&self, signal: f64, idler: f64) -> Result<f64> {
        let mid = 0.5 * (signal + idler);
        check_on_axis("signal frequency", &self.axis, signal)?;
        check_on_axis("idler frequency", &self.axis, idler)?;
        check_on_axis("mean frequency", &self.axis, mid)?;
        Ok(self.delta_phi_unchecked(signal, idler))
    }

    #[inline]
    pub(crate) fn delta_phi_unchecked(&self, signal: f64, idler: f64) -> f64 {
        2.0 * self.interp(0.5 * (signal + idler)) - self.interp(signal) - self.interp(idler)
    }

    /// Adds `f(ω)` to every sample.
    pub fn add_function(&self, f: impl Fn(f64) -> f64) -> Self {
        let phi = self.axis.samples().zip(&self.phi).map(|(w, p)| p + f(w)).collect();
        Self { phi, ..self.clone() }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "frequency_THz,phase_rad")?;
        for (w, p) in self.axis.samples().zip(&self.phi) {
            writeln!(out, "{w},{p}")?;
        }
        Ok(())
    }

    pub fn band_map(&self) -> String {
        let map = BandMap { pump_offset: self.pump_offset, bands: self.bands.clone() };
        toml::to_string(&map).expect("band map serializes")
    }

    /// Reads a profile CSV and, optionally, its band-map sidecar.
    pub fn read_csv<R: BufRead>(input: R, band_map: Option<&str>) -> Result<Self> {
        let (freqs, phi) = read_two_column_csv(input, "frequency_THz,phase_rad")?;
        let axis = uniform_axis_from(&freqs)?;
        let (bands, offset) = match band_map {
            Some(text) => {
                let map: BandMap =
                    toml::from_str(text).map_err(|e| invalid(format!("band map: {e}")))?;
                (map.bands, map.pump_offset)
            }
            None => (Vec::new(), 0.0),
        };
        Self::from_parts(axis, phi, bands, offset)
    }
}

fn label_samples(axis: &FrequencyAxis, bands: &[Band]) -> Vec<BandLabel> {
    axis.samples()
        .map(|w| {
            // signal/idler bands take precedence on shared boundaries
            let hit = bands
                .iter()
                .filter(|b| b.kind != BandKind::Pump)
                .chain(bands.iter().filter(|b| b.kind == BandKind::Pump))
                .find(|b| b.contains(w));
            match hit {
                Some(Band { kind: BandKind::Pump, .. }) => BandLabel::Pump,
                Some(Band { kind: BandKind::Signal, channel, .. }) => BandLabel::Signal(*channel),
                Some(Band { kind: BandKind::Idler, channel, .. }) => BandLabel::Idler(*channel),
                None => BandLabel::Fill,
            }
        })
        .collect()
}

pub(crate) fn read_two_column_csv<R: BufRead>(
    input: R,
    header: &str,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if n == 0 {
            if line != header {
                return Err(Error::Csv { line: 1, msg: format!("expected header `{header}`") });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = || -> Result<f64> {
            cols.next()
                .ok_or_else(|| Error::Csv { line: n + 1, msg: "missing column".into() })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Csv { line: n + 1, msg: e.to_string() })
        };
        let x = next()?;
        let y = next()?;
        if cols.next().is_some() {
            return Err(Error::Csv { line: n + 1, msg: "too many columns".into() });
        }
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

fn uniform_axis_from(freqs: &[f64]) -> Result<FrequencyAxis> {
    if freqs.len() < 2 {
        return Err(invalid("profile needs at least two rows"));
    }
    let n = freqs.len();
    let step = (freqs[n - 1] - freqs[0]) / (n - 1) as f64;
    let axis = FrequencyAxis::new(freqs[0], step, n)?;
    for (i, &f) in freqs.iter().enumerate() {
        if (axis.sample(i) - f).abs() > 1e-6 * step {
            return Err(Error::Csv { line: i + 2, msg: "frequencies are not uniformly spaced".into() });
        }
    }
    Ok(axis)
}

/// Assembles the piecewise phase function for a set of channels.
///
/// Signal samples of channel k get `π/2 − s_k·u(Ω, a_s)`, idler samples
/// `π/2 + s_k·u(Ω, a_i)` with `s_k = −1` for reversed channels, the pump band
/// (half-width 3σ_p) gets π/2, and every other sample holds the value of the
/// nearest signal/idler band edge.
pub fn build_phase_profile(
    axis: FrequencyAxis,
    pump: &PumpSpec,
    channels: &[ChannelSpec],
) -> Result<PhaseProfile> {
    pump.validate()?;
    if channels.is_empty() {
        return Err(invalid("at least one channel is required"));
    }
    for ch in channels {
        ch.validate(pump)?;
    }

    let pump_half = 3.0 * pump.sigma;
    let mut bands = vec![Band {
        kind: BandKind::Pump,
        channel: 0,
        start_thz: pump.center_frequency - pump_half,
        end_thz: pump.center_frequency + pump_half,
    }];
    for (k, ch) in channels.iter().enumerate() {
        for (kind, center) in [(BandKind::Signal, ch.signal_center), (BandKind::Idler, ch.idler_center)] {
            bands.push(Band {
                kind,
                channel: k,
                start_thz: center - ch.band_half_width,
                end_thz: center + ch.band_half_width,
            });
        }
    }
    for (i, a) in bands.iter().enumerate() {
        for b in &bands[i + 1..] {
            if a.overlaps(b) {
                return Err(Error::OverlappingBands(format!(
                    "{:?} band of channel {} [{}, {}] and {:?} band of channel {} [{}, {}]",
                    a.kind, a.channel, a.start_thz, a.end_thz, b.kind, b.channel, b.start_thz,
                    b.end_thz
                )));
            }
        }
    }
    for b in &bands {
        check_on_axis("band edge", &axis, b.start_thz)?;
        check_on_axis("band edge", &axis, b.end_thz)?;
    }

    // (frequency, phase) at every signal/idler band edge
    let edges: Vec<(f64, f64)> = bands
        .iter()
        .filter(|b| b.kind != BandKind::Pump)
        .flat_map(|b| {
            let ch = &channels[b.channel];
            let value = |f| match b.kind {
                BandKind::Signal => ch.signal_phase(f),
                _ => ch.idler_phase(f),
            };
            [(b.start_thz, value(b.start_thz)), (b.end_thz, value(b.end_thz))]
        })
        .collect();

    let labels = label_samples(&axis, &bands);
    let phi = axis
        .samples()
        .zip(&labels)
        .map(|(w, label)| match *label {
            BandLabel::Pump => FRAC_PI_2,
            BandLabel::Signal(k) => channels[k].signal_phase(w),
            BandLabel::Idler(k) => channels[k].idler_phase(w),
            BandLabel::Fill => {
                edges
                    .iter()
                    .min_by(|x, y| (x.0 - w).abs().total_cmp(&(y.0 - w).abs()))
                    .expect("at least one channel")
                    .1
            }
        })
        .collect();

    Ok(PhaseProfile { axis, phi, labels, bands, pump_offset: 0.0 })
}

/// φ_c(ω) = −L·k_disp(ω): cancels the dispersive part of ΔkL in Δφ.
pub fn compensation_phase(medium: &MediumSpec, frequency: f64) -> f64 {
    -medium.length * medium.dispersive_k(frequency)
}

/// Adds the opposite of the fiber's dispersive phase to the profile and
/// shifts the pump band by +γP_pL, so that ΔkL + Δφ reduces to the designed
/// Δφ wherever the mean frequency falls in the pump band.
pub fn dispersion_compensation(
    profile: &PhaseProfile,
    medium: &MediumSpec,
    pump: &PumpSpec,
) -> Result<PhaseProfile> {
    medium.validate()?;
    pump.validate()?;
    let shift = medium.length * medium.nonlinear_rate(pump.peak_power);
    let mut out = profile.add_function(|w| compensation_phase(medium, w));
    for (p, label) in out.phi.iter_mut().zip(&out.labels) {
        if *label == BandLabel::Pump {
            *p += shift;
        }
    }
    out.pump_offset += shift;
    Ok(out)
}
