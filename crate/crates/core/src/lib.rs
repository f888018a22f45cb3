//! Spectral engineering of photon pairs with a two-stage nonlinear
//! interferometer whose inter-stage phase is set by a programmable
//! spectral phase mask.
//!
//! The crate is organized bottom-up: [`units`] holds grids and parameter
//! containers, [`phase`] builds the programmable phase function, [`nli`]
//! evaluates joint spectral functions and the loss-evolved state, [`analysis`]
//! does modal analysis, [`measure`] simulates the measurements and [`slm`]
//! turns a phase profile into a device pattern.

pub mod analysis;
pub mod error;
pub mod measure;
pub mod nli;
pub mod phase;
pub mod slm;
pub mod units;

pub use analysis::{
    decompose_channels, g2_signal, heralding_efficiency, pearson_correlation, schmidt_decompose,
    AnalysisReport, ChannelDecomposition, DualBandWindow, SchmidtResult,
};
pub use error::{Error, Result};
pub use measure::{hbt_g2_sim, joint_spectral_scan, HbtConfig, HbtEstimate, ScanConfig, ScanResult};
pub use nli::{
    interference_map, lossy_state_weights, nli_jsf, single_piece_jsf, InterferenceMap, Jsf, Model,
    TwoPhotonStateWeights,
};
pub use phase::{
    build_phase_profile, dispersion_compensation, island_layout, u_series, ChannelSpec, PhaseProfile,
};
pub use slm::{export_pgm, import_pgm, pattern_to_phase, phase_to_pattern, GrayPattern, SLMCalibration};
pub use units::{
    frequency_to_wavelength, make_axis, wavelength_to_frequency, FrequencyAxis, MediumSpec, PumpSpec,
};
