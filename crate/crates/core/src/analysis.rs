//! Modal analysis of joint spectral functions.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nli::{check_eta, Jsf, TwoPhotonStateWeights};
use crate::phase::ChannelSpec;

/// Singular values below this fraction of the largest are left out of K.
pub const SINGULAR_VALUE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Normalized squared singular values, descending, summing to 1.
    pub lambdas: Vec<f64>,
    /// Mode number 1/Σλ².
    pub k: f64,
    /// Total squared norm ∬|F|².
    pub norm_sqr: f64,
    /// Columns are signal modes, orthonormal under Σ|ψ|²Δω_s.
    pub signal_modes: DMatrix<Complex64>,
    /// Columns are idler modes, orthonormal under Σ|φ|²Δω_i.
    pub idler_modes: DMatrix<Complex64>,
}

impl SchmidtResult {
    /// Σ_n √(λ_n·s)·ψ_n(ω_s)φ_n(ω_i) on the original grid.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let weights: Vec<Complex64> = self
            .lambdas
            .iter()
            .map(|l| Complex64::new((l * self.norm_sqr).sqrt(), 0.0))
            .collect();
        let mut scaled = self.signal_modes.clone();
        for (mut col, w) in scaled.column_iter_mut().zip(&weights) {
            col *= *w;
        }
        scaled * self.idler_modes.transpose()
    }
}

pub fn schmidt_decompose(jsf: &Jsf) -> Result<SchmidtResult> {
    let (ds, di) = (jsf.signal_axis.step(), jsf.idler_axis.step());
    let weight = (ds * di).sqrt();
    let weighted = jsf.amplitude.map(|z| z * weight);
    let norm_sqr: f64 = weighted.iter().map(|z| z.norm_sqr()).sum();
    if !(norm_sqr > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let svd = weighted.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let lambdas: Vec<f64> = sigma.iter().map(|s| s * s / total).collect();
    let k = mode_number(&lambdas);

    let signal_modes = DMatrix::from_fn(u.nrows(), order.len(), |r, n| u[(r, order[n])] / ds.sqrt());
    let idler_modes =
        DMatrix::from_fn(v_t.ncols(), order.len(), |c, n| v_t[(order[n], c)] / di.sqrt());
    Ok(SchmidtResult { lambdas, k, norm_sqr: total, signal_modes, idler_modes })
}

/// 1/Σλ² over normalized weights, dropping those below the cutoff.
fn mode_number(lambdas: &[f64]) -> f64 {
    let max = lambdas.iter().cloned().fold(0.0, f64::max);
    // squared singular values, so the cutoff is squared too
    let floor = max * SINGULAR_VALUE_CUTOFF * SINGULAR_VALUE_CUTOFF;
    let kept: Vec<f64> = lambdas.iter().cloned().filter(|&l| l >= floor).collect();
    let sum: f64 = kept.iter().sum();
    let purity: f64 = kept.iter().map(|l| (l / sum) * (l / sum)).sum();
    1.0 / purity
}

/// Rectangular dual-band filter, full widths in THz, centered per arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBandWindow {
    pub signal_center: f64,
    pub idler_center: f64,
    pub full_width: f64,
}

impl DualBandWindow {
    pub fn apply(&self, jsf: &Jsf) -> Result<Jsf> {
        let h = 0.5 * self.full_width;
        jsf.windowed(
            (self.signal_center - h, self.signal_center + h),
            (self.idler_center - h, self.idler_center + h),
        )
    }
}

/// Signal correlation operator Γ_s = η(1−η)·ρ_SP + 4η²·ρ_NLI on the signal
/// grid, ρ_X = F_X F_X† Δω_i. At η = 0 the η→0⁺ limit (ρ_SP alone) is used.
pub fn signal_correlation(
    single_piece: &Jsf,
    nli: &Jsf,
    eta: f64,
    window: Option<&DualBandWindow>,
) -> Result<DMatrix<Complex64>> {
    check_eta(eta)?;
    if !single_piece.same_axes(nli) {
        return Err(Error::AxisMismatch("single-piece JSF", "interferometer JSF"));
    }
    let (sp, f) = match window {
        Some(w) => (w.apply(single_piece)?, w.apply(nli)?),
        None => (single_piece.clone(), nli.clone()),
    };
    let di = f.idler_axis.step();
    let rho = |x: &Jsf| (&x.amplitude * x.amplitude.adjoint()) * Complex64::new(di, 0.0);
    let (c_sp, c_nli) = if eta == 0.0 { (1.0, 0.0) } else { (eta * (1.0 - eta), 4.0 * eta * eta) };
    let mut gamma = DMatrix::zeros(sp.amplitude.nrows(), sp.amplitude.nrows());
    if c_sp != 0.0 {
        gamma += rho(&sp) * Complex64::new(c_sp, 0.0);
    }
    if c_nli != 0.0 {
        gamma += rho(&f) * Complex64::new(c_nli, 0.0);
    }
    Ok(gamma)
}

/// g² of the signal arm, 1 + Tr(Γ_s²)/(TrΓ_s)².
pub fn g2_signal(single_piece: &Jsf, nli: &Jsf, eta: f64, window: Option<&DualBandWindow>) -> Result<f64> {
    let gamma = signal_correlation(single_piece, nli, eta, window)?;
    let trace = gamma.trace().re;
    if !(trace > 0.0) {
        return Err(Error::ZeroNorm);
    }
    // Γ is Hermitian, so Tr(Γ²) = Σ|Γ_ij|²
    let tr_sq: f64 = gamma.iter().map(|z| z.norm_sqr()).sum();
    Ok(1.0 + tr_sq / (trace * trace))
}

/// Eigenvalues of Γ_s, descending, normalized to sum 1, dropping those
/// below `cutoff` relative to the largest.
pub fn thermal_mode_weights(gamma: &DMatrix<Complex64>, cutoff: f64) -> Vec<f64> {
    let eig = SymmetricEigen::new(gamma.clone());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|v: &f64| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let max = ev.first().copied().unwrap_or(0.0);
    ev.retain(|&v| v > 0.0 && v >= cutoff * max);
    let sum: f64 = ev.iter().sum();
    ev.iter().map(|v| v / sum).collect()
}

/// Probability that a detected signal photon has its idler partner, before
/// detector losses: w_pair/(w_pair + w_signal_only).
pub fn heralding_efficiency(weights: &TwoPhotonStateWeights) -> Result<f64> {
    let denom = weights.w_pair + weights.w_signal_only;
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter("no photons reach the output (η = 0)".into()));
    }
    Ok(weights.w_pair / denom)
}

/// Pearson coefficient of (ω_s, ω_i) under the density |F|².
pub fn pearson_correlation(jsf: &Jsf) -> Result<f64> {
    let (ns, ni) = jsf.amplitude.shape();
    let total: f64 = jsf.amplitude.iter().map(|z| z.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    // offsets from the axis centers keep the moments well conditioned
    let s0 = jsf.signal_axis.sample(ns / 2);
    let i0 = jsf.idler_axis.sample(ni / 2);
    let (mut ms, mut mi) = (0.0, 0.0);
    for r in 0..ns {
        let x = jsf.signal_axis.sample(r) - s0;
        for c in 0..ni {
            let p = jsf.intensity(r, c) / total;
            ms += p * x;
            mi += p * (jsf.idler_axis.sample(c) - i0);
        }
    }
    let (mut vs, mut vi, mut cov) = (0.0, 0.0, 0.0);
    for r in 0..ns {
        let x = jsf.signal_axis.sample(r) - s0 - ms;
        for c in 0..ni {
            let p = jsf.intensity(r, c) / total;
            let y = jsf.idler_axis.sample(c) - i0 - mi;
            vs += p * x * x;
            vi += p * y * y;
            cov += p * x * y;
        }
    }
    if !(vs > 0.0 && vi > 0.0) {
        return Ok(0.0);
    }
    Ok((cov / (vs * vi).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone)]
pub struct ChannelPart {
    /// Real amplitude r_k, |r_k|² = share of the supported squared norm.
    pub r: f64,
    pub jsf: Jsf,
    pub k: f64,
    /// Grid point of maximum |F|² inside the support, (ω_s, ω_i) in THz.
    pub peak: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct ChannelDecomposition {
    pub channels: Vec<ChannelPart>,
    /// Squared norm outside every support, relative to the whole grid.
    pub residual: f64,
}

/// Index range of samples in [center − hw, center + hw), half-open so that
/// touching supports share no sample.
fn support_range(axis: &crate::units::FrequencyAxis, center: f64, hw: f64) -> std::ops::Range<usize> {
    let lo = axis.position(center - hw);
    let hi = axis.position(center + hw);
    let eps = 1e-9;
    let start = (lo - eps).ceil().max(0.0) as usize;
    let end = ((hi - eps).ceil().max(0.0) as usize).min(axis.count());
    start..end.max(start)
}

pub fn decompose_channels(jsf: &Jsf, channels: &[ChannelSpec]) -> Result<ChannelDecomposition> {
    if channels.is_empty() {
        return Err(Error::InvalidParameter("no channels to decompose".into()));
    }
    let overlap = |a: (f64, f64), b: (f64, f64)| a.0 < b.1 - 1e-9 && b.0 < a.1 - 1e-9;
    for (i, a) in channels.iter().enumerate() {
        for b in &channels[i + 1..] {
            let span = |c: f64, h: f64| (c - h, c + h);
            if overlap(span(a.signal_center, a.band_half_width), span(b.signal_center, b.band_half_width))
                && overlap(span(a.idler_center, a.band_half_width), span(b.idler_center, b.band_half_width))
            {
                return Err(Error::OverlappingBands(format!(
                    "channel supports at ({}, {}) and ({}, {}) THz",
                    a.signal_center, a.idler_center, b.signal_center, b.idler_center
                )));
            }
        }
    }

    let grid_total: f64 = jsf.amplitude.iter().map(|z| z.norm_sqr()).sum();
    if !(grid_total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let mut parts = Vec::with_capacity(channels.len());
    let mut norms = Vec::with_capacity(channels.len());
    let mut claimed = DMatrix::from_element(jsf.amplitude.nrows(), jsf.amplitude.ncols(), false);
    for ch in channels {
        let rows = support_range(&jsf.signal_axis, ch.signal_center, ch.band_half_width);
        let cols = support_range(&jsf.idler_axis, ch.idler_center, ch.band_half_width);
        let sub = jsf.restrict(rows.clone(), cols.clone())?;
        let mut norm = 0.0;
        let mut peak = (0.0, (0, 0));
        for r in rows.clone() {
            for c in cols.clone() {
                let v = jsf.intensity(r, c);
                if !claimed[(r, c)] {
                    claimed[(r, c)] = true;
                    norm += v;
                }
                if v > peak.0 {
                    peak = (v, (r, c));
                }
            }
        }
        let k = schmidt_decompose(&sub)?.k;
        let (r, c) = peak.1;
        norms.push(norm);
        parts.push(ChannelPart {
            r: 0.0,
            jsf: sub,
            k,
            peak: (jsf.signal_axis.sample(r), jsf.idler_axis.sample(c)),
        });
    }
    let supported: f64 = norms.iter().sum();
    if !(supported > 0.0) {
        return Err(Error::ZeroNorm);
    }
    for (p, n) in parts.iter_mut().zip(&norms) {
        p.r = (n / supported).sqrt();
    }
    Ok(ChannelDecomposition { channels: parts, residual: 1.0 - supported / grid_total })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelRow {
    pub index: usize,
    pub signal_thz: f64,
    pub idler_thz: f64,
    pub r: f64,
    pub k: f64,
    pub peak_signal_thz: f64,
    pub peak_idler_thz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub k: f64,
    pub pearson_r: f64,
    pub windowed: bool,
    pub eta: Vec<f64>,
    pub g2: Vec<f64>,
    pub heralding: Vec<f64>,
    pub residual: f64,
    #[serde(rename = "channel")]
    pub channels: Vec<ChannelRow>,
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

/// Evenly spaced η values over [0, 1] with `step`, always containing 0.6,
/// 0.85 and 1.0.
pub fn eta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParameter(format!("η step must be in (0, 1], got {step}")));
    }
    let n = (1.0 / step).round() as usize;
    let mut etas: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    etas.extend([0.6, 0.85, 1.0]);
    etas.sort_by(f64::total_cmp);
    etas.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(etas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nli::{interference_map, lossy_state_weights, nli_jsf, single_piece_jsf, Model};
    use crate::phase::build_phase_profile;
    use crate::units::{make_axis, FrequencyAxis, MediumSpec, PumpSpec};
    use nalgebra::DVector;

    fn column_norm(v: &DVector<Complex64>) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn gaussian(w_plus: f64, w_minus: f64, n: usize, half: f64) -> Jsf {
        let ax = make_axis(0.0 + 100.0, half, n).unwrap();
        Jsf::from_fn(ax, ax, |s, i| {
            let (p, m) = (s + i - 200.0, s - i);
            Complex64::new(
                (-p * p / (4.0 * w_plus * w_plus) - m * m / (4.0 * w_minus * w_minus)).exp(),
                0.0,
            )
        })
    }

    fn pump() -> PumpSpec {
        PumpSpec::new(193.5, 0.042, 0.0).unwrap()
    }

    fn factorable(n: usize) -> (Jsf, Jsf) {
        let p = pump();
        let m = MediumSpec::example_dsf();
        let sa = make_axis(192.9, 0.252, n).unwrap();
        let ia = make_axis(194.1, 0.252, n).unwrap();
        let prof = build_phase_profile(
            make_axis(193.5, 0.9, 9001).unwrap(),
            &p,
            &[ChannelSpec::symmetric(&p, 192.9, 0.042)],
        )
        .unwrap();
        let sp = single_piece_jsf(sa, ia, &p, &m, Model::Simplified).unwrap();
        let f = nli_jsf(&sp, &interference_map(sa, ia, &prof, &m, &p, Model::Simplified).unwrap()).unwrap();
        (sp, f)
    }

    fn window() -> DualBandWindow {
        DualBandWindow { signal_center: 192.9, idler_center: 194.1, full_width: 0.2 }
    }

    #[test]
    fn separable_gaussian_is_single_mode() {
        let ax = make_axis(100.0, 1.0, 81).unwrap();
        let f = Jsf::from_fn(ax, ax, |s, i| {
            Complex64::new((-(s - 100.0).powi(2) / 0.08 - (i - 100.0).powi(2) / 0.02).exp(), 0.0)
        });
        let r = schmidt_decompose(&f).unwrap();
        assert!((r.k - 1.0).abs() < 1e-6, "{}", r.k);
    }

    #[test]
    fn double_gaussian_matches_analytic_k() {
        let (wp, wm) = (0.05, 0.15);
        let f = gaussian(wp, wm, 201, 0.6);
        let k = schmidt_decompose(&f).unwrap().k;
        let want = (wp * wp + wm * wm) / (2.0 * wp * wm);
        assert!((k - want).abs() < 0.01 * want, "{k} vs {want}");
    }

    #[test]
    fn schmidt_invariants() {
        let (_, f) = factorable(101);
        let r = schmidt_decompose(&f).unwrap();
        let sum: f64 = r.lambdas.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(r.k >= 1.0);
        assert!(r.lambdas.windows(2).all(|w| w[0] >= w[1]));
        let rec = r.reconstruct();
        let err = (&rec - &f.amplitude).norm() / f.amplitude.norm();
        assert!(err < 1e-10, "{err}");
        // orthonormal under quadrature
        let ds = f.signal_axis.step();
        for n in 0..3 {
            let v: DVector<Complex64> = r.signal_modes.column(n).into_owned();
            assert!((column_norm(&v).powi(2) * ds - 1.0).abs() < 1e-9);
        }
        let overlap: Complex64 =
            r.signal_modes.column(0).iter().zip(r.signal_modes.column(1).iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(overlap.norm() * ds < 1e-9);
    }

    #[test]
    fn k_invariant_under_scale_and_transpose() {
        let f = gaussian(0.05, 0.11, 121, 0.5);
        let k = schmidt_decompose(&f).unwrap().k;
        let mut g = f.clone();
        g.amplitude *= Complex64::new(0.0, 3.7);
        assert!((schmidt_decompose(&g).unwrap().k - k).abs() < 1e-9);
        assert!((schmidt_decompose(&f.transpose()).unwrap().k - k).abs() < 1e-9);
    }

    #[test]
    fn zero_jsf_rejected() {
        let ax = make_axis(100.0, 1.0, 11).unwrap();
        let z = Jsf::from_fn(ax, ax, |_, _| Complex64::new(0.0, 0.0));
        assert!(matches!(schmidt_decompose(&z), Err(Error::ZeroNorm)));
        assert!(matches!(pearson_correlation(&z), Err(Error::ZeroNorm)));
    }

    #[test]
    fn factorable_design_mode_number() {
        let (_, f) = factorable(201);
        let k = schmidt_decompose(&f).unwrap().k;
        assert!((k - 1.01).abs() <= 0.02, "{k}");
    }

    #[test]
    fn g2_at_unit_transmission_is_one_plus_inverse_k() {
        let (sp, f) = factorable(201);
        let g = g2_signal(&sp, &f, 1.0, Some(&window())).unwrap();
        let k = schmidt_decompose(&window().apply(&f).unwrap()).unwrap().k;
        assert!((g - (1.0 + 1.0 / k)).abs() < 1e-9);
        assert!((g - 1.99).abs() <= 0.01, "{g}");
    }

    #[test]
    fn g2_low_transmission_limit() {
        let (sp, f) = factorable(201);
        let g0 = g2_signal(&sp, &f, 0.0, Some(&window())).unwrap();
        let k_sp = schmidt_decompose(&window().apply(&sp).unwrap()).unwrap().k;
        assert!((g0 - (1.0 + 1.0 / k_sp)).abs() < 1e-9);
        let g_tiny = g2_signal(&sp, &f, 1e-9, Some(&window())).unwrap();
        assert!((g_tiny - g0).abs() < 1e-6);
        assert!(g0 < g2_signal(&sp, &f, 1.0, Some(&window())).unwrap());
    }

    #[test]
    fn g2_bounds_and_eta_validation() {
        let (sp, f) = factorable(101);
        for eta in [0.0, 0.1, 0.5, 0.9, 1.0] {
            for w in [None, Some(window())] {
                let g = g2_signal(&sp, &f, eta, w.as_ref()).unwrap();
                assert!(g > 1.0 && g <= 2.0 + 1e-12, "{g}");
            }
        }
        assert!(matches!(g2_signal(&sp, &f, 1.2, None), Err(Error::TransmissionOutOfRange(_))));
    }

    #[test]
    fn heralding_extremes_and_monotonicity() {
        let (sp, f) = factorable(101);
        let h = |eta| heralding_efficiency(&lossy_state_weights(&sp, &f, eta, 1.0).unwrap());
        assert_eq!(h(1.0).unwrap(), 1.0);
        assert!(h(0.0).is_err());
        let vals: Vec<f64> = (1..=21).map(|i| h(i as f64 / 21.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pearson_of_correlated_gaussians() {
        // exp(-(s+i)²/4w₊² - (s-i)²/4w₋²): |F|² has r = (w₊² − w₋²)/(w₊² + w₋²)
        let (wp, wm) = (0.05, 0.1);
        let r = pearson_correlation(&gaussian(wp, wm, 201, 0.6)).unwrap();
        let want = (wp * wp - wm * wm) / (wm * wm + wp * wp);
        assert!((r - want).abs() < 1e-6, "{r} vs {want}");
        let r2 = pearson_correlation(&gaussian(wm, wp, 201, 0.6)).unwrap();
        assert!((r2 + want).abs() < 1e-6);
        assert!(pearson_correlation(&gaussian(0.07, 0.07, 201, 0.6)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn single_channel_decomposition() {
        let (_, f) = factorable(201);
        let ch = ChannelSpec::symmetric(&pump(), 192.9, 0.042);
        let d = decompose_channels(&f, &[ch]).unwrap();
        assert_eq!(d.channels.len(), 1);
        assert!((d.channels[0].r - 1.0).abs() < 1e-12);
        // tails beyond the 3σ_p support carry about 0.4% of the weight
        assert!(d.residual >= 0.0 && d.residual < 1e-2, "{}", d.residual);
        // the interferometer design is only nearly factorable; truncating its
        // tails at 3σ_p moves K from 1.01432 to 1.01261
        let whole = schmidt_decompose(&f).unwrap().k;
        assert!((whole - 1.014315).abs() < 1e-5, "{whole}");
        assert!((d.channels[0].k - 1.012610).abs() < 1e-5, "{}", d.channels[0].k);
    }

    #[test]
    fn restricting_factorable_jsf_keeps_k() {
        let p = pump();
        let sa = make_axis(192.9, 0.252, 201).unwrap();
        let ia = make_axis(194.1, 0.252, 201).unwrap();
        let g = |x: f64| (-x * x / (2.0 * 0.03f64.powi(2))).exp();
        let f = Jsf::from_fn(sa, ia, |s, i| Complex64::new(g(s - 192.9) * g(i - 194.1), 0.0));
        let ch = ChannelSpec::symmetric(&p, 192.9, 0.042);
        let d = decompose_channels(&f, &[ch]).unwrap();
        let whole = schmidt_decompose(&f).unwrap().k;
        assert!((whole - 1.0).abs() < 1e-9);
        assert!((d.channels[0].k - whole).abs() < 1e-3);
    }

    #[test]
    fn overlapping_supports_rejected() {
        let (_, f) = factorable(101);
        let a = ChannelSpec::symmetric(&pump(), 192.9, 0.042);
        let b = ChannelSpec::symmetric(&pump(), 192.95, 0.042);
        assert!(matches!(decompose_channels(&f, &[a, b]), Err(Error::OverlappingBands(_))));
    }

    #[test]
    fn support_ranges_tile_without_sharing() {
        let ax = FrequencyAxis::new(192.4, 0.002, 301).unwrap();
        let a = support_range(&ax, 192.5, 0.1);
        let b = support_range(&ax, 192.7, 0.1);
        assert_eq!(a.end, b.start);
        assert_eq!(a.len(), 100);
    }

    #[test]
    fn eta_grid_contains_anchors() {
        let g = eta_grid(0.1).unwrap();
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        for anchor in [0.6, 0.85, 1.0] {
            assert!(g.iter().any(|e| (e - anchor).abs() < 1e-12));
        }
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(eta_grid(0.0).is_err());
    }
}
