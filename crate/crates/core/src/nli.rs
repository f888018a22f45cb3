//! Forward model of the two-stage interferometer.
//!
//! F_NLI(ω_s, ω_i) = F_SP(ω_s, ω_i) · I(ω_s, ω_i), where F_SP is the joint
//! spectral function of one fiber and I the interference function set by the
//! phase profile. The simplified model assumes ΔkL → 0 near the
//! phase-matched frequencies.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase::PhaseProfile;
use crate::units::{check_on_axis, FrequencyAxis, MediumSpec, PumpSpec};

/// Model fidelity for [`single_piece_jsf`] and [`interference_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Gaussian pump envelope and I = cos(Δφ/2); ΔkL dropped.
    Simplified,
    /// sinc(ΔkL/2)·e^{iΔkL/2} phase matching and I = cos((ΔkL+Δφ)/2)·e^{iΔφ/2}.
    Full,
}

/// Complex amplitude on a (signal × idler) grid. Rows index signal samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Jsf {
    pub signal_axis: FrequencyAxis,
    pub idler_axis: FrequencyAxis,
    pub amplitude: DMatrix<Complex64>,
}

pub type InterferenceMap = Jsf;

impl Jsf {
    pub fn new(
        signal_axis: FrequencyAxis,
        idler_axis: FrequencyAxis,
        amplitude: DMatrix<Complex64>,
    ) -> Result<Self> {
        if amplitude.nrows() != signal_axis.count() || amplitude.ncols() != idler_axis.count() {
            return Err(Error::InvalidParameter(format!(
                "amplitude shape {}x{} does not match axes {}x{}",
                amplitude.nrows(),
                amplitude.ncols(),
                signal_axis.count(),
                idler_axis.count()
            )));
        }
        if amplitude.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("amplitude has non-finite entries".into()));
        }
        Ok(Self { signal_axis, idler_axis, amplitude })
    }

    /// Evaluates `f(ω_s, ω_i)` on every grid point, rows in parallel.
    pub fn from_fn(
        signal_axis: FrequencyAxis,
        idler_axis: FrequencyAxis,
        f: impl Fn(f64, f64) -> Complex64 + Sync,
    ) -> Self {
        let (ns, ni) = (signal_axis.count(), idler_axis.count());
        let rows: Vec<Vec<Complex64>> = (0..ns)
            .into_par_iter()
            .map(|r| {
                let ws = signal_axis.sample(r);
                (0..ni).map(|c| f(ws, idler_axis.sample(c))).collect()
            })
            .collect();
        let amplitude = DMatrix::from_fn(ns, ni, |r, c| rows[r][c]);
        Self { signal_axis, idler_axis, amplitude }
    }

    pub fn same_axes(&self, other: &Jsf) -> bool {
        self.signal_axis.same_grid(&other.signal_axis) && self.idler_axis.same_grid(&other.idler_axis)
    }

    /// Quadrature cell Δω_s·Δω_i.
    pub fn cell(&self) -> f64 {
        self.signal_axis.step() * self.idler_axis.step()
    }

    /// ∬|F|² by the rectangle rule.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn intensity(&self, r: usize, c: usize) -> f64 {
        self.amplitude[(r, c)].norm_sqr()
    }

    /// Zeroes everything outside the given signal/idler frequency intervals.
    pub fn windowed(&self, signal: (f64, f64), idler: (f64, f64)) -> Result<Jsf> {
        for (what, axis, (lo, hi)) in
            [("signal window", &self.signal_axis, signal), ("idler window", &self.idler_axis, idler)]
        {
            check_on_axis(what, axis, lo)?;
            check_on_axis(what, axis, hi)?;
        }
        let inside = |f: f64, (lo, hi): (f64, f64)| {
            let tol = 1e-9 * (hi - lo).abs().max(1e-12);
            f >= lo - tol && f <= hi + tol
        };
        let mut out = self.clone();
        for r in 0..out.amplitude.nrows() {
            let s_in = inside(self.signal_axis.sample(r), signal);
            for c in 0..out.amplitude.ncols() {
                if !(s_in && inside(self.idler_axis.sample(c), idler)) {
                    out.amplitude[(r, c)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(out)
    }

    /// Sub-grid of rows `rows` and columns `cols`.
    pub fn restrict(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Result<Jsf> {
        if rows.len() < 2 || cols.len() < 2 {
            return Err(Error::InvalidParameter("restriction needs at least 2x2 samples".into()));
        }
        let signal_axis =
            FrequencyAxis::new(self.signal_axis.sample(rows.start), self.signal_axis.step(), rows.len())?;
        let idler_axis =
            FrequencyAxis::new(self.idler_axis.sample(cols.start), self.idler_axis.step(), cols.len())?;
        let amplitude = self.amplitude.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned();
        Ok(Jsf { signal_axis, idler_axis, amplitude })
    }

    pub fn transpose(&self) -> Jsf {
        Jsf {
            signal_axis: self.idler_axis,
            idler_axis: self.signal_axis,
            amplitude: self.amplitude.transpose(),
        }
    }

    /// Row-major CSV: `signal_THz,idler_THz,re,im,abs2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "signal_THz,idler_THz,re,im,abs2")?;
        for r in 0..self.amplitude.nrows() {
            let ws = self.signal_axis.sample(r);
            for c in 0..self.amplitude.ncols() {
                let z = self.amplitude[(r, c)];
                writeln!(out, "{ws},{},{},{},{}", self.idler_axis.sample(c), z.re, z.im, z.norm_sqr())?;
            }
        }
        Ok(())
    }
}

#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Δk = 2k((ω_s+ω_i)/2) − k(ω_s) − k(ω_i) − 2γP_p, in 1/m.
pub fn wavevector_mismatch(signal: f64, idler: f64, medium: &MediumSpec, pump: &PumpSpec) -> f64 {
    let mid = 0.5 * (signal + idler);
    2.0 * medium.dispersive_k(mid) - medium.dispersive_k(signal) - medium.dispersive_k(idler)
        - 2.0 * medium.nonlinear_rate(pump.peak_power)
}

/// Gaussian pump envelope exp[−(ω_s+ω_i−2ω_p0)²/4σ_p²].
#[inline]
pub fn pump_envelope(signal: f64, idler: f64, pump: &PumpSpec) -> f64 {
    let d = signal + idler - 2.0 * pump.center_frequency;
    (-d * d / (4.0 * pump.sigma * pump.sigma)).exp()
}

pub fn single_piece_jsf(
    signal_axis: FrequencyAxis,
    idler_axis: FrequencyAxis,
    pump: &PumpSpec,
    medium: &MediumSpec,
    model: Model,
) -> Result<Jsf> {
    pump.validate()?;
    medium.validate()?;
    let len = medium.length;
    Ok(Jsf::from_fn(signal_axis, idler_axis, |ws, wi| {
        let env = pump_envelope(ws, wi, pump);
        match model {
            Model::Simplified => Complex64::new(env, 0.0),
            Model::Full => {
                let half = 0.5 * wavevector_mismatch(ws, wi, medium, pump) * len;
                Complex64::from_polar(env * sinc(half), half)
            }
        }
    }))
}

pub fn interference_map(
    signal_axis: FrequencyAxis,
    idler_axis: FrequencyAxis,
    profile: &PhaseProfile,
    medium: &MediumSpec,
    pump: &PumpSpec,
    model: Model,
) -> Result<InterferenceMap> {
    let paxis = profile.axis();
    check_on_axis("signal axis", paxis, signal_axis.start())?;
    check_on_axis("signal axis", paxis, signal_axis.end())?;
    check_on_axis("idler axis", paxis, idler_axis.start())?;
    check_on_axis("idler axis", paxis, idler_axis.end())?;
    let len = medium.length;
    Ok(Jsf::from_fn(signal_axis, idler_axis, |ws, wi| {
        let dphi = profile.delta_phi_unchecked(ws, wi);
        match model {
            Model::Simplified => Complex64::new((0.5 * dphi).cos(), 0.0),
            Model::Full => {
                let dk_l = wavevector_mismatch(ws, wi, medium, pump) * len;
                Complex64::from_polar((0.5 * (dk_l + dphi)).cos(), 0.5 * dphi)
            }
        }
    }))
}

/// F_NLI = F_SP × I, entrywise.
pub fn nli_jsf(single_piece: &Jsf, interference: &InterferenceMap) -> Result<Jsf> {
    if !single_piece.same_axes(interference) {
        return Err(Error::AxisMismatch("single-piece JSF", "interference map"));
    }
    let amplitude = single_piece.amplitude.component_mul(&interference.amplitude);
    Ok(Jsf { amplitude, ..single_piece.clone() })
}

/// Relative weights of the four terms of the lossy output state, in units of
/// the gain squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonStateWeights {
    pub w_vacuum: f64,
    pub w_signal_only: f64,
    pub w_idler_only: f64,
    pub w_pair: f64,
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::TransmissionOutOfRange(eta));
    }
    Ok(())
}

/// Weights of the state evolved through a transmission-η phase device:
/// amplitudes (1−η)G·F_SP (vacuum), √(η(1−η))G·F_SP (each one-photon term)
/// and 2ηG·F_NLI (pair).
pub fn lossy_state_weights(
    single_piece: &Jsf,
    nli: &Jsf,
    eta: f64,
    gain: f64,
) -> Result<TwoPhotonStateWeights> {
    check_eta(eta)?;
    if !single_piece.same_axes(nli) {
        return Err(Error::AxisMismatch("single-piece JSF", "interferometer JSF"));
    }
    let g2 = gain * gain;
    let n_sp = single_piece.norm_sqr();
    let n_nli = nli.norm_sqr();
    let one_photon = eta * (1.0 - eta) * g2 * n_sp;
    Ok(TwoPhotonStateWeights {
        w_vacuum: (1.0 - eta) * (1.0 - eta) * g2 * n_sp,
        w_signal_only: one_photon,
        w_idler_only: one_photon,
        w_pair: 4.0 * eta * eta * g2 * n_nli,
    })
}
