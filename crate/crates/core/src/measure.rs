//! Simulated joint-spectral scans and HBT g² measurements.
//!
//! All randomness comes from ChaCha streams keyed by the run seed, one stream
//! per scan point, so results do not depend on evaluation order or thread
//! count.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use rayon::prelude::*;

use crate::analysis::{signal_correlation, thermal_mode_weights, DualBandWindow};
use crate::error::{invalid, Error, Result};
use crate::nli::{check_eta, Jsf};
use crate::units::{frequency_to_wavelength, wavelength_to_frequency, FrequencyAxis};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Full width of each flat-top filter channel, nm.
    pub filter_full_width: f64,
    /// Centers of the first and last signal windows, nm.
    pub signal_range: (f64, f64),
    pub idler_range: (f64, f64),
    pub step: f64,
    pub pulses_per_point: u64,
    /// Maps weight units to detection probability per pulse.
    pub brightness: f64,
    pub seed: u64,
    pub noiseless: bool,
}

impl ScanConfig {
    /// 0.2 nm flat-top windows stepped by 0.2 nm over 1552.6–1555.6 nm
    /// (signal) and 1543.0–1546.0 nm (idler).
    pub fn fiber_experiment() -> Self {
        Self {
            filter_full_width: 0.2,
            signal_range: (1552.6, 1555.6),
            idler_range: (1543.0, 1546.0),
            step: 0.2,
            pulses_per_point: 36_900_000,
            brightness: 1e-3,
            seed: 0,
            noiseless: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.filter_full_width > 0.0) {
            return Err(invalid("scan step and filter width must be positive"));
        }
        for (lo, hi) in [self.signal_range, self.idler_range] {
            if !(lo > 0.0) || !(hi >= lo) {
                return Err(invalid(format!("scan range [{lo}, {hi}] nm is empty or invalid")));
            }
        }
        if !(self.brightness >= 0.0) {
            return Err(invalid("brightness must be non-negative"));
        }
        Ok(())
    }
}

fn scan_centers((start, end): (f64, f64), step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}

/// Assigns each axis sample to the scan window containing it, if any.
///
/// Window i covers wavelengths [c_i − w/2, c_i + w/2) and membership is
/// decided on t = (λ − (c_0 − w/2))/step, so windows of width equal to the
/// step tile the scanned span exactly.
fn window_members(axis: &FrequencyAxis, centers: &[f64], width: f64, step: f64) -> Vec<Vec<usize>> {
    let base = centers[0] - 0.5 * width;
    let span = width / step;
    let mut members = vec![Vec::new(); centers.len()];
    for s in 0..axis.count() {
        let lambda = frequency_to_wavelength(axis.sample(s)).expect("positive axis");
        let t = (lambda - base) / step;
        if t < 0.0 {
            continue;
        }
        let last = t.floor() as usize;
        // windows i with i <= t < i + span
        let first = (t - span).floor() as i64 + 1;
        for i in first.max(0) as usize..=last.min(centers.len().saturating_sub(1)) {
            if t < i as f64 + span && t >= i as f64 {
                members[i].push(s);
            }
        }
    }
    members
}

fn check_span(axis: &FrequencyAxis, centers: &[f64], width: f64, what: &'static str) -> Result<()> {
    let long = centers[centers.len() - 1] + 0.5 * width;
    let short = centers[0] - 0.5 * width;
    for lambda in [short, long] {
        let f = wavelength_to_frequency(lambda)?;
        if !axis.contains(f) {
            return Err(Error::OutsideAxis { what, value: f, start: axis.start(), end: axis.end() });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub signal_nm: Vec<f64>,
    pub idler_nm: Vec<f64>,
    /// Row-major, signal index first.
    pub true_coincidence: Vec<f64>,
    pub accidental: Vec<f64>,
}

impl ScanResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.signal_nm.len(), self.idler_nm.len())
    }

    pub fn true_at(&self, i: usize, j: usize) -> f64 {
        self.true_coincidence[i * self.idler_nm.len() + j]
    }

    /// Indices of the largest true-coincidence entry.
    pub fn argmax(&self) -> (usize, usize) {
        let (k, _) = self
            .true_coincidence
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        (k / self.idler_nm.len(), k % self.idler_nm.len())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "signal_nm,idler_nm,true_coincidence,accidental")?;
        for (i, s) in self.signal_nm.iter().enumerate() {
            for (j, d) in self.idler_nm.iter().enumerate() {
                let k = i * self.idler_nm.len() + j;
                writeln!(out, "{s},{d},{},{}", self.true_coincidence[k], self.accidental[k])?;
            }
        }
        Ok(())
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(rng)
    } else {
        0.0
    }
}

/// Dual-band flat-top filter scan with accidental subtraction.
///
/// The true-coincidence mean of a point is the pair weight 4η²G²|F_NLI|²
/// summed over the two windows. The accidental mean is the product of the
/// windowed singles, which include the one-photon terms η(1−η)G²|F_SP|².
/// Noisy scans draw Poisson counts for same-pulse and adjacent-pulse
/// coincidences and subtract the latter.
pub fn joint_spectral_scan(
    single_piece: &Jsf,
    nli: &Jsf,
    eta: f64,
    gain: f64,
    config: &ScanConfig,
) -> Result<ScanResult> {
    check_eta(eta)?;
    config.validate()?;
    if !single_piece.same_axes(nli) {
        return Err(Error::AxisMismatch("single-piece JSF", "interferometer JSF"));
    }
    let signal_nm = scan_centers(config.signal_range, config.step);
    let idler_nm = scan_centers(config.idler_range, config.step);
    check_span(&nli.signal_axis, &signal_nm, config.filter_full_width, "signal scan window")?;
    check_span(&nli.idler_axis, &idler_nm, config.filter_full_width, "idler scan window")?;

    let (ns, ni) = nli.amplitude.shape();
    let cell = nli.cell();
    let g2 = gain * gain;
    let pair = |r: usize, c: usize| 4.0 * eta * eta * g2 * nli.intensity(r, c) * cell;
    let one = eta * (1.0 - eta) * g2 * cell;
    let signal_singles: Vec<f64> = (0..ns)
        .map(|r| (0..ni).map(|c| pair(r, c) + one * single_piece.intensity(r, c)).sum())
        .collect();
    let idler_singles: Vec<f64> = (0..ni)
        .map(|c| (0..ns).map(|r| pair(r, c) + one * single_piece.intensity(r, c)).sum())
        .collect();

    let s_members = window_members(&nli.signal_axis, &signal_nm, config.filter_full_width, config.step);
    let i_members = window_members(&nli.idler_axis, &idler_nm, config.filter_full_width, config.step);
    let s_single: Vec<f64> = s_members.iter().map(|m| m.iter().map(|&r| signal_singles[r]).sum()).collect();
    let i_single: Vec<f64> = i_members.iter().map(|m| m.iter().map(|&c| idler_singles[c]).sum()).collect();

    let n_idler = idler_nm.len();
    let points: Vec<(f64, f64)> = (0..signal_nm.len() * n_idler)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n_idler, k % n_idler);
            let mut t = 0.0;
            for &r in &s_members[i] {
                for &c in &i_members[j] {
                    t += pair(r, c);
                }
            }
            let acc = s_single[i] * i_single[j];
            if config.noiseless {
                return (t, acc);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            let n = config.pulses_per_point as f64;
            let b = config.brightness;
            let acc_mean = n * b * b * acc;
            let raw = poisson(&mut rng, n * b * t + acc_mean);
            let adjacent = poisson(&mut rng, acc_mean);
            ((raw - adjacent).max(0.0), adjacent)
        })
        .collect();
    let (true_coincidence, accidental) = points.into_iter().unzip();
    Ok(ScanResult { signal_nm, idler_nm, true_coincidence, accidental })
}

/// Sum of the pair weight over every grid sample inside the union of scan
/// windows.
pub fn windowed_pair_weight(nli: &Jsf, eta: f64, gain: f64, config: &ScanConfig) -> f64 {
    let signal_nm = scan_centers(config.signal_range, config.step);
    let idler_nm = scan_centers(config.idler_range, config.step);
    let rows: Vec<usize> = window_members(&nli.signal_axis, &signal_nm, config.filter_full_width, config.step)
        .concat();
    let cols: Vec<usize> =
        window_members(&nli.idler_axis, &idler_nm, config.filter_full_width, config.step).concat();
    let mut total = 0.0;
    for &r in &rows {
        for &c in &cols {
            total += nli.intensity(r, c);
        }
    }
    4.0 * eta * eta * gain * gain * total * nli.cell()
}

/// Default ceiling on the mean signal photon number per pulse.
pub const LOW_GAIN_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtConfig {
    pub detector_efficiency: f64,
    /// Mean signal photon number per pulse before the coupler.
    pub mean_photons: f64,
    pub pulses: u64,
    pub seed: u64,
    pub low_gain_limit: f64,
}

impl Default for HbtConfig {
    fn default() -> Self {
        Self {
            detector_efficiency: 0.15,
            mean_photons: 0.1,
            pulses: 1_000_000,
            seed: 0,
            low_gain_limit: LOW_GAIN_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtEstimate {
    pub g2: f64,
    pub std_error: f64,
    pub same_pulse: u64,
    pub adjacent_pulse: u64,
}

/// HBT measurement of a multimode thermal field with the given per-mode
/// weights (normalized internally).
///
/// Each pulse draws Bose-Einstein photon numbers per mode, splits them on a
/// 50/50 coupler and detects them with number resolution. Coincidences are
/// counted as n_A·n_B for the same pulse and n_A(t)·n_B(t+1) for adjacent
/// pulses; their ratio estimates g².
pub fn simulate_thermal_hbt(mode_weights: &[f64], config: &HbtConfig) -> Result<HbtEstimate> {
    if !(0.0..=1.0).contains(&config.detector_efficiency) || config.detector_efficiency == 0.0 {
        return Err(invalid("detector efficiency must be in (0, 1]"));
    }
    if !(config.mean_photons > 0.0) {
        return Err(invalid("mean photon number must be positive"));
    }
    if config.mean_photons > config.low_gain_limit {
        return Err(Error::GainTooHigh { mean: config.mean_photons, limit: config.low_gain_limit });
    }
    if config.pulses < 2 {
        return Err(invalid("at least two pulses are needed"));
    }
    let total: f64 = mode_weights.iter().sum();
    if !(total > 0.0) || mode_weights.iter().any(|w| *w < 0.0) {
        return Err(invalid("mode weights must be non-negative with positive sum"));
    }
    let modes: Vec<Geometric> = mode_weights
        .iter()
        .filter(|w| **w > 0.0)
        .map(|w| Geometric::new(1.0 / (1.0 + config.mean_photons * w / total)).expect("p in (0, 1]"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eff = config.detector_efficiency;
    let draw = |rng: &mut ChaCha8Rng| -> (u64, u64) {
        let n: u64 = modes.iter().map(|m| m.sample(rng)).sum();
        if n == 0 {
            return (0, 0);
        }
        let detected = if eff < 1.0 { Binomial::new(n, eff).expect("valid").sample(rng) } else { n };
        let a = (0..detected).filter(|_| rng.random_bool(0.5)).count() as u64;
        (a, detected - a)
    };

    // running sums for the delta-method error of x̄/ȳ
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut same, mut adjacent) = (0u64, 0u64);
    let (mut prev_a, first_b) = draw(&mut rng);
    same += prev_a * first_b;
    let pairs = config.pulses - 1;
    for _ in 0..pairs {
        let (a, b) = draw(&mut rng);
        let x = (a * b) as f64;
        let y = (prev_a * b) as f64;
        same += a * b;
        adjacent += prev_a * b;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        prev_a = a;
    }
    if adjacent == 0 {
        return Err(invalid("no adjacent-pulse coincidences; increase pulses or mean photon number"));
    }
    let n = pairs as f64;
    let (mx, my) = (sx / n, sy / n);
    let g2 = (same as f64 / config.pulses as f64) / (adjacent as f64 / n);
    let vx = sxx / n - mx * mx;
    let vy = syy / n - my * my;
    let cxy = sxy / n - mx * my;
    let r = mx / my;
    let var = (vx - 2.0 * r * cxy + r * r * vy) / (my * my * n);
    Ok(HbtEstimate { g2, std_error: var.max(0.0).sqrt(), same_pulse: same, adjacent_pulse: adjacent })
}

/// HBT simulation of the signal field of the lossy interferometer: the
/// thermal modes are the eigenvectors of Γ_s and their weights its
/// eigenvalues.
pub fn hbt_g2_sim(
    single_piece: &Jsf,
    nli: &Jsf,
    eta: f64,
    window: Option<&DualBandWindow>,
    config: &HbtConfig,
) -> Result<HbtEstimate> {
    let gamma = signal_correlation(single_piece, nli, eta, window)?;
    let weights = thermal_mode_weights(&gamma, 1e-9);
    simulate_thermal_hbt(&weights, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_scan_grid_is_sixteen_points() {
        let c = ScanConfig::fiber_experiment();
        assert_eq!(scan_centers(c.signal_range, c.step).len(), 16);
        assert_eq!(scan_centers(c.idler_range, c.step).len(), 16);
        let s = scan_centers(c.signal_range, c.step);
        assert!((s[15] - 1555.6).abs() < 1e-9);
    }

    #[test]
    fn windows_tile_at_step_equal_width() {
        let axis = FrequencyAxis::new(192.6, 0.0005, 1001).unwrap();
        let centers = scan_centers((1552.6, 1555.6), 0.2);
        let m = window_members(&axis, &centers, 0.2, 0.2);
        let mut all: Vec<usize> = m.concat();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n, "a sample belongs to two windows");
        // every sample with λ in [1552.5, 1555.7) is covered
        let expected = (0..axis.count())
            .filter(|&s| {
                let l = frequency_to_wavelength(axis.sample(s)).unwrap();
                (1552.5..1555.7 - 1e-9).contains(&l)
            })
            .count();
        assert!((n as i64 - expected as i64).abs() <= 1);
    }

    #[test]
    fn narrow_windows_leave_gaps() {
        let axis = FrequencyAxis::new(192.6, 0.0005, 1001).unwrap();
        let centers = scan_centers((1552.6, 1555.6), 0.2);
        let wide = window_members(&axis, &centers, 0.2, 0.2).concat().len();
        let narrow = window_members(&axis, &centers, 0.1, 0.2).concat().len();
        assert!(narrow * 2 <= wide + 16 && narrow * 2 + 16 >= wide);
    }

    #[test]
    fn single_mode_thermal_doubles() {
        let cfg = HbtConfig { detector_efficiency: 1.0, mean_photons: 0.5, pulses: 400_000, seed: 7, ..Default::default() };
        let e = simulate_thermal_hbt(&[1.0], &cfg).unwrap();
        assert!((e.g2 - 2.0).abs() < 4.0 * e.std_error, "{} ± {}", e.g2, e.std_error);
        assert!(e.std_error < 0.03);
    }

    #[test]
    fn equal_modes_give_one_plus_inverse_count() {
        let cfg = HbtConfig { detector_efficiency: 0.8, mean_photons: 1.0, pulses: 400_000, seed: 11, ..Default::default() };
        for m in [2usize, 4] {
            let e = simulate_thermal_hbt(&vec![1.0; m], &cfg).unwrap();
            let want = 1.0 + 1.0 / m as f64;
            assert!((e.g2 - want).abs() < 4.0 * e.std_error, "M={m}: {} ± {}", e.g2, e.std_error);
        }
    }

    #[test]
    fn hbt_rejects_high_gain_and_bad_input() {
        let cfg = HbtConfig { mean_photons: 2.0, ..Default::default() };
        assert!(matches!(simulate_thermal_hbt(&[1.0], &cfg), Err(Error::GainTooHigh { .. })));
        let cfg = HbtConfig { detector_efficiency: 0.0, ..Default::default() };
        assert!(simulate_thermal_hbt(&[1.0], &cfg).is_err());
        assert!(simulate_thermal_hbt(&[0.0], &HbtConfig::default()).is_err());
    }

    #[test]
    fn hbt_is_seed_reproducible() {
        let cfg = HbtConfig { pulses: 50_000, mean_photons: 0.5, seed: 3, ..Default::default() };
        let a = simulate_thermal_hbt(&[0.7, 0.3], &cfg).unwrap();
        let b = simulate_thermal_hbt(&[0.7, 0.3], &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_thermal_hbt(&[0.7, 0.3], &HbtConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(a, c);
    }
}
