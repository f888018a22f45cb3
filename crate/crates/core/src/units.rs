//! Frequency/wavelength conventions, uniform frequency axes, and the pump and
//! medium parameter containers.
//!
//! All frequencies are ordinary frequencies in THz and all wavelengths are
//! vacuum wavelengths in nm. Angular frequency only appears inside the
//! dispersion evaluation, through [`angular_ps`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Speed of light in nm·THz.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

pub fn wavelength_to_frequency(wavelength_nm: f64) -> Result<f64> {
    if !(wavelength_nm > 0.0) || !wavelength_nm.is_finite() {
        return Err(invalid(format!("wavelength must be positive, got {wavelength_nm} nm")));
    }
    Ok(SPEED_OF_LIGHT_NM_THZ / wavelength_nm)
}

pub fn frequency_to_wavelength(frequency_thz: f64) -> Result<f64> {
    if !(frequency_thz > 0.0) || !frequency_thz.is_finite() {
        return Err(invalid(format!("frequency must be positive, got {frequency_thz} THz")));
    }
    Ok(SPEED_OF_LIGHT_NM_THZ / frequency_thz)
}

/// Frequency offset in THz expressed as an angular frequency in rad/ps.
#[inline]
pub fn angular_ps(offset_thz: f64) -> f64 {
    std::f64::consts::TAU * offset_thz
}

/// Converts a quantity given per km into per m.
#[inline]
pub fn per_km_to_per_m(value_per_km: f64) -> f64 {
    value_per_km * 1e-3
}

/// A uniform frequency grid.
///
/// Samples are computed as `origin + (i - origin_index) * step`, so the
/// anchor sample is reproduced exactly and no drift accumulates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyAxis {
    origin: f64,
    origin_index: usize,
    step: f64,
    count: usize,
}

impl FrequencyAxis {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        Self::anchored(start, 0, step, count)
    }

    fn anchored(origin: f64, origin_index: usize, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(invalid(format!("axis step must be positive, got {step}")));
        }
        if count < 2 {
            return Err(invalid(format!("axis needs at least 2 samples, got {count}")));
        }
        if !origin.is_finite() {
            return Err(invalid("axis origin must be finite"));
        }
        Ok(Self { origin, origin_index, step, count })
    }

    #[inline]
    pub fn sample(&self, i: usize) -> f64 {
        self.origin + (i as f64 - self.origin_index as f64) * self.step
    }

    pub fn start(&self) -> f64 {
        self.sample(0)
    }

    pub fn end(&self) -> f64 {
        self.sample(self.count - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.sample(i))
    }

    pub fn contains(&self, frequency: f64) -> bool {
        frequency >= self.start() && frequency <= self.end()
    }

    /// Fractional index of `frequency` on this axis.
    #[inline]
    pub fn position(&self, frequency: f64) -> f64 {
        self.origin_index as f64 + (frequency - self.origin) / self.step
    }

    pub fn nearest_index(&self, frequency: f64) -> usize {
        let p = self.position(frequency).round();
        p.clamp(0.0, (self.count - 1) as f64) as usize
    }

    /// Axes agree sample-by-sample to within a small fraction of a step.
    pub fn same_grid(&self, other: &Self) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= 1e-12 * self.step.max(other.step)
            && (self.start() - other.start()).abs() <= 1e-9 * self.step
    }
}

/// Symmetric axis around `center` with an odd sample count, so that the
/// middle sample is exactly `center`.
pub fn make_axis(center: f64, half_width: f64, count: usize) -> Result<FrequencyAxis> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(invalid(format!("half width must be positive, got {half_width}")));
    }
    if count < 3 || count % 2 == 0 {
        return Err(invalid(format!(
            "axis count must be odd and at least 3 so the center is a sample, got {count}"
        )));
    }
    let mid = (count - 1) / 2;
    FrequencyAxis::anchored(center, mid, half_width / mid as f64, count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    /// Central frequency ω_p0, THz.
    pub center_frequency: f64,
    /// Gaussian parameter of the amplitude spectrum, THz.
    pub sigma: f64,
    /// Peak power, W.
    pub peak_power: f64,
    /// Average power, mW. Metadata only.
    pub average_power_mw: f64,
    /// Repetition rate, MHz. Metadata only.
    pub repetition_rate_mhz: f64,
}

impl PumpSpec {
    pub fn new(center_frequency: f64, sigma: f64, peak_power: f64) -> Result<Self> {
        let pump = Self {
            center_frequency,
            sigma,
            peak_power,
            average_power_mw: 0.0,
            repetition_rate_mhz: 0.0,
        };
        pump.validate()?;
        Ok(pump)
    }

    /// The operating point of the fiber experiment: 193.5 THz center,
    /// σ_p = 0.042 THz, 36.9 MHz repetition, 0.7 mW average power.
    pub fn fiber_experiment() -> Self {
        Self {
            center_frequency: 193.5,
            sigma: 0.042,
            peak_power: 0.0,
            average_power_mw: 0.7,
            repetition_rate_mhz: 36.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid(format!("pump sigma must be positive, got {}", self.sigma)));
        }
        if !(self.peak_power >= 0.0) || !self.peak_power.is_finite() {
            return Err(invalid(format!(
                "pump peak power must be non-negative, got {}",
                self.peak_power
            )));
        }
        if !(self.center_frequency > 0.0) || !self.center_frequency.is_finite() {
            return Err(invalid("pump center frequency must be positive"));
        }
        Ok(())
    }
}

/// Nonlinear waveguide with a Taylor-expanded propagation constant.
///
/// k(ω) = β₂/2·Δω² + β₃/6·Δω³ + β₄/24·Δω⁴ with Δω the angular offset from
/// `reference_frequency`. β₀ and β₁ are omitted since they cancel in every
/// second difference the model uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    /// Length, m.
    pub length: f64,
    /// Nonlinear coefficient, 1/(W·km).
    pub gamma: f64,
    /// Expansion point, THz.
    pub reference_frequency: f64,
    /// ps²/km
    pub beta2: f64,
    /// ps³/km
    pub beta3: f64,
    /// ps⁴/km
    pub beta4: f64,
}

impl MediumSpec {
    pub fn dispersionless(length: f64, gamma: f64, reference_frequency: f64) -> Self {
        Self { length, gamma, reference_frequency, beta2: 0.0, beta3: 0.0, beta4: 0.0 }
    }

    /// Builds a medium from its zero-dispersion wavelength and dispersion
    /// slope S (ps/(nm²·km)), using β₃ = S·(λ₀²/2πc)² and β₂ = 0 at λ₀.
    pub fn from_dispersion_slope(
        length: f64,
        gamma: f64,
        zero_dispersion_nm: f64,
        slope_ps_per_nm2_km: f64,
    ) -> Result<Self> {
        let reference_frequency = wavelength_to_frequency(zero_dispersion_nm)?;
        // nm·ps
        let scale = zero_dispersion_nm * zero_dispersion_nm
            / (std::f64::consts::TAU * SPEED_OF_LIGHT_NM_THZ);
        let medium = Self {
            length,
            gamma,
            reference_frequency,
            beta2: 0.0,
            beta3: slope_ps_per_nm2_km * scale * scale,
            beta4: 0.0,
        };
        medium.validate()?;
        Ok(medium)
    }

    /// The dispersion-shifted fiber of the experiment: 30 m, zero dispersion
    /// near 1548.5 nm. γ and the slope are typical DSF values, not measured
    /// ones.
    pub fn example_dsf() -> Self {
        Self::from_dispersion_slope(30.0, 2.0, 1548.5, 0.07).expect("valid constants")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(invalid(format!("medium length must be positive, got {}", self.length)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        for (name, v) in [
            ("reference frequency", self.reference_frequency),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
            ("beta4", self.beta4),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Dispersive part of the propagation constant, 1/m.
    pub fn dispersive_k(&self, frequency_thz: f64) -> f64 {
        let w = angular_ps(frequency_thz - self.reference_frequency);
        let w2 = w * w;
        let per_km = w2 * (self.beta2 / 2.0 + w * (self.beta3 / 6.0 + w * self.beta4 / 24.0));
        per_km_to_per_m(per_km)
    }

    /// Nonlinear phase rate γP, 1/m.
    pub fn nonlinear_rate(&self, peak_power_w: f64) -> f64 {
        per_km_to_per_m(self.gamma * peak_power_w)
    }

    pub fn is_dispersionless(&self) -> bool {
        self.beta2 == 0.0 && self.beta3 == 0.0 && self.beta4 == 0.0
    }
}

pub(crate) fn check_on_axis(what: &'static str, axis: &FrequencyAxis, value: f64) -> Result<()> {
    let tol = 1e-9 * axis.step();
    if value < axis.start() - tol || value > axis.end() + tol {
        return Err(Error::OutsideAxis { what, value, start: axis.start(), end: axis.end() });
    }
    Ok(())
}
