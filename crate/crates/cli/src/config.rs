//! Run configuration: a TOML document written with dotted keys, one value per
//! line (`pump.sigma_thz = 0.042`). Units are part of every key name.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use pairshape::analysis::DualBandWindow;
use pairshape::measure::{HbtConfig, ScanConfig, LOW_GAIN_LIMIT};
use pairshape::phase::{build_phase_profile, island_layout, PhaseProfile};
use pairshape::slm::SLMCalibration;
use pairshape::{make_axis, wavelength_to_frequency, ChannelSpec, FrequencyAxis, MediumSpec, Model, PumpSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub pump: PumpSection,
    pub medium: MediumSection,
    pub channels: ChannelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub loss: LossSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub hbt: HbtSection,
    #[serde(default)]
    pub slm: SlmSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub center_thz: Option<f64>,
    pub center_nm: Option<f64>,
    pub sigma_thz: f64,
    #[serde(default)]
    pub peak_power_w: f64,
    #[serde(default)]
    pub average_power_mw: f64,
    #[serde(default)]
    pub repetition_mhz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    pub length_m: f64,
    pub gamma_per_w_km: f64,
    /// Either a zero-dispersion wavelength with a slope, or explicit β
    /// coefficients about `reference_thz`.
    pub zero_dispersion_nm: Option<f64>,
    pub slope_ps_per_nm2_km: Option<f64>,
    pub reference_thz: Option<f64>,
    #[serde(default)]
    pub beta2_ps2_per_km: f64,
    #[serde(default)]
    pub beta3_ps3_per_km: f64,
    #[serde(default)]
    pub beta4_ps4_per_km: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub signal_thz: Vec<f64>,
    /// Defaults to 2ω_p0 − signal for each channel.
    pub idler_thz: Option<Vec<f64>>,
    pub a_thz: f64,
    pub a_signal_thz: Option<f64>,
    pub a_idler_thz: Option<f64>,
    pub band_half_width_thz: Option<f64>,
    /// Defaults to every second channel reversed.
    pub reversed: Option<Vec<bool>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub profile_half_width_thz: f64,
    pub profile_points: usize,
    pub jsf_half_width_thz: f64,
    pub jsf_points: usize,
    pub signal_center_thz: Option<f64>,
    pub idler_center_thz: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            profile_half_width_thz: 1.25,
            profile_points: 12501,
            jsf_half_width_thz: 0.252,
            jsf_points: 201,
            signal_center_thz: None,
            idler_center_thz: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub simplified: bool,
    pub compensate: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { simplified: true, compensate: false }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub eta: f64,
    pub gain: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        Self { eta: 0.6, gain: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub eta_step: f64,
    pub window_thz: f64,
    pub windowed: bool,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self { eta_step: 0.05, window_thz: 0.2, windowed: true }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub filter_nm: f64,
    pub signal_start_nm: f64,
    pub signal_end_nm: f64,
    pub idler_start_nm: f64,
    pub idler_end_nm: f64,
    pub step_nm: f64,
    pub pulses_per_point: u64,
    pub brightness: f64,
    pub noiseless: bool,
}

impl Default for ScanSection {
    fn default() -> Self {
        let s = ScanConfig::fiber_experiment();
        Self {
            filter_nm: s.filter_full_width,
            signal_start_nm: s.signal_range.0,
            signal_end_nm: s.signal_range.1,
            idler_start_nm: s.idler_range.0,
            idler_end_nm: s.idler_range.1,
            step_nm: s.step,
            pulses_per_point: s.pulses_per_point,
            brightness: s.brightness,
            noiseless: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HbtSection {
    /// 0 skips the simulated measurement.
    pub pulses: u64,
    pub detector_efficiency: f64,
    pub mean_photons: f64,
    pub low_gain_limit: f64,
}

impl Default for HbtSection {
    fn default() -> Self {
        Self { pulses: 0, detector_efficiency: 0.15, mean_photons: 0.1, low_gain_limit: LOW_GAIN_LIMIT }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlmSection {
    pub columns: usize,
    pub rows: usize,
    pub wavelength_at_column_0_nm: f64,
    pub nm_per_column: f64,
    pub phase_full_scale_rad: f64,
}

impl Default for SlmSection {
    fn default() -> Self {
        let c = SLMCalibration::default();
        Self {
            columns: c.columns,
            rows: c.rows,
            wavelength_at_column_0_nm: c.wavelength_at_column_0,
            nm_per_column: c.nm_per_column,
            phase_full_scale_rad: c.phase_full_scale,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Everything a command needs, validated.
pub struct Setup {
    pub pump: PumpSpec,
    pub medium: MediumSpec,
    pub channels: Vec<ChannelSpec>,
    pub profile: PhaseProfile,
    pub signal_axis: FrequencyAxis,
    pub idler_axis: FrequencyAxis,
    pub model: Model,
    pub compensate: bool,
    pub eta: f64,
    pub gain: f64,
    pub eta_step: f64,
    pub window: Option<DualBandWindow>,
    pub scan: ScanConfig,
    pub hbt: Option<HbtConfig>,
    pub calibration: SLMCalibration,
    pub out_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| anyhow!("{}", e.message().trim_end()).context(location(text, e.span())))
}

fn location(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(s) => {
            let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
            format!("invalid configuration at line {line}")
        }
        None => "invalid configuration".to_string(),
    }
}

fn pump_spec(p: &PumpSection) -> Result<PumpSpec> {
    let center = match (p.center_thz, p.center_nm) {
        (Some(f), None) => f,
        (None, Some(nm)) => wavelength_to_frequency(nm)?,
        (Some(_), Some(_)) => bail!("pump: give either center_thz or center_nm, not both"),
        (None, None) => bail!("pump: center_thz or center_nm is required"),
    };
    let pump = PumpSpec {
        center_frequency: center,
        sigma: p.sigma_thz,
        peak_power: p.peak_power_w,
        average_power_mw: p.average_power_mw,
        repetition_rate_mhz: p.repetition_mhz,
    };
    pump.validate().context("pump")?;
    Ok(pump)
}

fn medium_spec(m: &MediumSection) -> Result<MediumSpec> {
    let explicit = m.reference_thz.is_some();
    let medium = match (m.zero_dispersion_nm, m.slope_ps_per_nm2_km) {
        (Some(zdw), Some(slope)) => {
            if explicit || m.beta2_ps2_per_km != 0.0 || m.beta3_ps3_per_km != 0.0 || m.beta4_ps4_per_km != 0.0 {
                bail!("medium: give either zero_dispersion_nm with slope_ps_per_nm2_km or reference_thz with beta coefficients");
            }
            MediumSpec::from_dispersion_slope(m.length_m, m.gamma_per_w_km, zdw, slope)?
        }
        (None, None) => {
            let reference_frequency =
                m.reference_thz.ok_or_else(|| anyhow!("medium: reference_thz is required with beta coefficients"))?;
            MediumSpec {
                length: m.length_m,
                gamma: m.gamma_per_w_km,
                reference_frequency,
                beta2: m.beta2_ps2_per_km,
                beta3: m.beta3_ps3_per_km,
                beta4: m.beta4_ps4_per_km,
            }
        }
        _ => bail!("medium: zero_dispersion_nm and slope_ps_per_nm2_km go together"),
    };
    medium.validate().context("medium")?;
    Ok(medium)
}

fn channel_specs(c: &ChannelSection, pump: &PumpSpec) -> Result<Vec<ChannelSpec>> {
    if c.signal_thz.is_empty() {
        bail!("channels: signal_thz must list at least one channel");
    }
    let n = c.signal_thz.len();
    let mut channels = island_layout(pump, &c.signal_thz, c.a_thz);
    if let Some(idlers) = &c.idler_thz {
        if idlers.len() != n {
            bail!("channels: {} idler centers for {n} signal centers", idlers.len());
        }
        for (ch, &i) in channels.iter_mut().zip(idlers) {
            ch.idler_center = i;
        }
    }
    if let Some(rev) = &c.reversed {
        if rev.len() != n {
            bail!("channels: {} reversed flags for {n} channels", rev.len());
        }
        for (ch, &r) in channels.iter_mut().zip(rev) {
            ch.reversed = r;
        }
    }
    for ch in &mut channels {
        if let Some(a) = c.a_signal_thz {
            ch.a_signal = a;
        }
        if let Some(a) = c.a_idler_thz {
            ch.a_idler = a;
        }
        if let Some(h) = c.band_half_width_thz {
            ch.band_half_width = h;
        }
    }
    for (k, ch) in channels.iter().enumerate() {
        ch.validate(pump).with_context(|| format!("channel {k}"))?;
    }
    Ok(channels)
}

fn centroid(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

impl RunConfig {
    /// Validates the document and builds the domain objects. Every error
    /// returned here is a configuration error.
    pub fn setup(&self) -> Result<Setup> {
        let pump = pump_spec(&self.pump)?;
        let medium = medium_spec(&self.medium)?;
        let channels = channel_specs(&self.channels, &pump)?;

        let g = &self.grid;
        let profile_axis = make_axis(pump.center_frequency, g.profile_half_width_thz, g.profile_points)
            .context("grid.profile_*")?;
        let profile = build_phase_profile(profile_axis, &pump, &channels).context("channels")?;
        let sc = g.signal_center_thz.unwrap_or_else(|| centroid(channels.iter().map(|c| c.signal_center)));
        let ic = g.idler_center_thz.unwrap_or_else(|| centroid(channels.iter().map(|c| c.idler_center)));
        let signal_axis = make_axis(sc, g.jsf_half_width_thz, g.jsf_points).context("grid.jsf_*")?;
        let idler_axis = make_axis(ic, g.jsf_half_width_thz, g.jsf_points).context("grid.jsf_*")?;
        for (what, axis) in [("signal", &signal_axis), ("idler", &idler_axis)] {
            if axis.start() < profile_axis.start() || axis.end() > profile_axis.end() {
                bail!("grid: {what} JSF axis [{}, {}] THz exceeds the profile axis", axis.start(), axis.end());
            }
        }

        let l = &self.loss;
        if !(0.0..=1.0).contains(&l.eta) {
            bail!("loss.eta must be in [0, 1], got {}", l.eta);
        }
        if !(l.gain >= 0.0) {
            bail!("loss.gain must be non-negative");
        }
        let a = &self.analysis;
        pairshape::analysis::eta_grid(a.eta_step).context("analysis.eta_step")?;
        let window = if a.windowed {
            if !(a.window_thz > 0.0) {
                bail!("analysis.window_thz must be positive");
            }
            // the window follows the first channel
            let w = DualBandWindow {
                signal_center: channels[0].signal_center,
                idler_center: channels[0].idler_center,
                full_width: a.window_thz,
            };
            for (c, axis) in [(w.signal_center, &signal_axis), (w.idler_center, &idler_axis)] {
                if c - 0.5 * w.full_width < axis.start() || c + 0.5 * w.full_width > axis.end() {
                    bail!("analysis.window_thz: window around {c} THz exceeds the JSF grid");
                }
            }
            Some(w)
        } else {
            None
        };

        let s = &self.scan;
        let scan = ScanConfig {
            filter_full_width: s.filter_nm,
            signal_range: (s.signal_start_nm, s.signal_end_nm),
            idler_range: (s.idler_start_nm, s.idler_end_nm),
            step: s.step_nm,
            pulses_per_point: s.pulses_per_point,
            brightness: s.brightness,
            seed: self.seed,
            noiseless: s.noiseless,
        };
        if !(scan.step > 0.0 && scan.filter_full_width > 0.0) {
            bail!("scan.step_nm and scan.filter_nm must be positive");
        }

        let h = &self.hbt;
        let hbt = (h.pulses > 0).then_some(HbtConfig {
            detector_efficiency: h.detector_efficiency,
            mean_photons: h.mean_photons,
            pulses: h.pulses,
            seed: self.seed,
            low_gain_limit: h.low_gain_limit,
        });
        if let Some(cfg) = &hbt {
            if cfg.mean_photons > cfg.low_gain_limit {
                bail!("hbt.mean_photons {} exceeds the low-gain limit {}", cfg.mean_photons, cfg.low_gain_limit);
            }
        }

        let calibration = SLMCalibration {
            columns: self.slm.columns,
            rows: self.slm.rows,
            wavelength_at_column_0: self.slm.wavelength_at_column_0_nm,
            nm_per_column: self.slm.nm_per_column,
            phase_full_scale: self.slm.phase_full_scale_rad,
        };
        calibration.validate().context("slm")?;

        Ok(Setup {
            pump,
            medium,
            channels,
            profile,
            signal_axis,
            idler_axis,
            model: if self.model.simplified { Model::Simplified } else { Model::Full },
            compensate: self.model.compensate,
            eta: l.eta,
            gain: l.gain,
            eta_step: a.eta_step,
            window,
            scan,
            hbt,
            calibration,
            out_dir: self.output.dir.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "pump.center_thz = 193.5\npump.sigma_thz = 0.042\nmedium.length_m = 30\nmedium.gamma_per_w_km = 2\nmedium.reference_thz = 193.5\nchannels.signal_thz = [192.9]\nchannels.a_thz = 0.042\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let s = parse(MINIMAL).unwrap().setup().unwrap();
        assert_eq!(s.channels.len(), 1);
        assert!((s.channels[0].idler_center - 194.1).abs() < 1e-12);
        assert_eq!(s.signal_axis.count(), 201);
        assert!(s.window.is_some());
        assert!(s.hbt.is_none());
        assert_eq!(s.calibration, SLMCalibration::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse(&format!("{MINIMAL}pump.sigma_nm = 1\n")).unwrap_err();
        assert!(format!("{err:#}").contains("sigma_nm"), "{err:#}");
        let err = parse(&format!("{MINIMAL}colour = 1\n")).unwrap_err();
        assert!(format!("{err:#}").contains("colour"), "{err:#}");
    }

    #[test]
    fn empty_channel_list_rejected() {
        let text = MINIMAL.replace("[192.9]", "[]");
        assert!(parse(&text).unwrap().setup().is_err());
    }

    #[test]
    fn pump_center_in_nm() {
        let text = MINIMAL.replace("pump.center_thz = 193.5", "pump.center_nm = 1549.32");
        let s = parse(&text).unwrap().setup().unwrap();
        assert!((s.pump.center_frequency - 193.5).abs() < 0.01);
        // idlers follow the pump exactly
        assert!((s.channels[0].signal_center + s.channels[0].idler_center - 2.0 * s.pump.center_frequency).abs() < 1e-9);
    }

    #[test]
    fn medium_forms_are_exclusive() {
        let text = format!("{MINIMAL}medium.zero_dispersion_nm = 1548.5\nmedium.slope_ps_per_nm2_km = 0.07\n");
        assert!(parse(&text).unwrap().setup().is_err());
        let text = MINIMAL.replace("medium.reference_thz = 193.5\n", "medium.zero_dispersion_nm = 1548.5\nmedium.slope_ps_per_nm2_km = 0.07\n");
        let s = parse(&text).unwrap().setup().unwrap();
        assert!(s.medium.beta3 > 0.0);
    }

    #[test]
    fn bad_values_rejected() {
        for (from, to) in [
            ("pump.sigma_thz = 0.042", "pump.sigma_thz = -1"),
            ("channels.a_thz = 0.042", "channels.a_thz = 0"),
            ("channels.signal_thz = [192.9]", "channels.signal_thz = [192.9, 192.8]\nchannels.band_half_width_thz = 0.2"),
        ] {
            assert!(parse(&MINIMAL.replace(from, to)).unwrap().setup().is_err(), "{to}");
        }
        assert!(parse(&format!("{MINIMAL}loss.eta = 1.5\n")).unwrap().setup().is_err());
        assert!(parse(&format!("{MINIMAL}hbt.pulses = 10\nhbt.mean_photons = 3\n")).unwrap().setup().is_err());
        assert!(parse("pump.center_thz = \"x\"").is_err());
    }
}
