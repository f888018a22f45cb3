//! End-to-end: design a profile, store it, reload it, program the SLM and
//! check the reloaded device reproduces the same joint spectrum.

mod common;

use std::fs::File;
use std::io::{BufReader, BufWriter};

use pairshape::analysis::{decompose_channels, pearson_correlation};
use pairshape::phase::island_layout;
use pairshape::slm::{export_pgm, import_pgm, pattern_to_phase, phase_to_pattern, SLMCalibration};
use pairshape::{
    build_phase_profile, dispersion_compensation, interference_map, make_axis, nli_jsf, schmidt_decompose,
    single_piece_jsf, ChannelSpec, MediumSpec, Model, PhaseProfile, PumpSpec,
};
use proptest::prelude::*;

#[test]
fn stored_profile_reproduces_the_joint_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let p = common::pump();
    let m = MediumSpec::example_dsf();
    let prof = build_phase_profile(make_axis(193.5, 1.25, 12501).unwrap(), &p, &[ChannelSpec::symmetric(&p, 192.9, 0.042)])
        .unwrap();
    let prof = dispersion_compensation(&prof, &m, &PumpSpec { peak_power: 0.3, ..p }).unwrap();

    let csv = dir.path().join("profile.csv");
    prof.write_csv(BufWriter::new(File::create(&csv).unwrap())).unwrap();
    std::fs::write(dir.path().join("bands.toml"), prof.band_map()).unwrap();
    let map = std::fs::read_to_string(dir.path().join("bands.toml")).unwrap();
    let back = PhaseProfile::read_csv(BufReader::new(File::open(&csv).unwrap()), Some(&map)).unwrap();
    assert_eq!(back.bands(), prof.bands());
    assert_eq!(back.labels(), prof.labels());
    assert_eq!(back.pump_offset(), prof.pump_offset());
    // shortest round-trip formatting keeps every sample exact
    assert_eq!(back.phi(), prof.phi());

    let sa = make_axis(192.9, 0.252, 101).unwrap();
    let ia = make_axis(194.1, 0.252, 101).unwrap();
    let sp = single_piece_jsf(sa, ia, &p, &m, Model::Full).unwrap();
    let a = interference_map(sa, ia, &prof, &m, &p, Model::Full).unwrap();
    let b = interference_map(sa, ia, &back, &m, &p, Model::Full).unwrap();
    let worst = a.amplitude.iter().zip(b.amplitude.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    assert!(schmidt_decompose(&nli_jsf(&sp, &a).unwrap()).unwrap().k < 1.03);
}

#[test]
fn wdm_pattern_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let p = common::pump();
    let channels = island_layout(&p, &[192.9, 192.7, 192.5], 0.042);
    let prof = build_phase_profile(make_axis(193.5, 1.25, 12501).unwrap(), &p, &channels).unwrap();
    let cal = SLMCalibration::default();
    let pattern = phase_to_pattern(&prof, &cal).unwrap();

    let path = dir.path().join("pattern.pgm");
    export_pgm(&pattern, BufWriter::new(File::create(&path).unwrap())).unwrap();
    std::fs::write(dir.path().join("pattern.toml"), cal.to_text()).unwrap();
    let cal_back = SLMCalibration::from_text(&std::fs::read_to_string(dir.path().join("pattern.toml")).unwrap()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), "P5\n1920 1080\n255\n".len() + 1920 * 1080);
    let back = import_pgm(&bytes[..], &cal_back).unwrap();
    assert_eq!(back, pattern);

    // the reprogrammed device rebuilt from the pattern columns keeps the islands
    let cols = pattern_to_phase(&back);
    let mut samples: Vec<(f64, f64)> = cols.iter().map(|c| (c.frequency_thz, c.phase)).collect();
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));
    let axis = make_axis(193.5, 1.25, 5001).unwrap();
    let phi: Vec<f64> = axis
        .samples()
        .map(|w| {
            let k = samples.partition_point(|s| s.0 < w).clamp(1, samples.len() - 1);
            let (a, b) = (samples[k - 1], samples[k]);
            a.1 + (b.1 - a.1) * ((w - a.0) / (b.0 - a.0)).clamp(0.0, 1.0)
        })
        .collect();
    let device = PhaseProfile::from_samples(axis, phi).unwrap();
    let m = MediumSpec::example_dsf();
    let sa = make_axis(192.7, 0.35, 201).unwrap();
    let ia = make_axis(194.3, 0.35, 201).unwrap();
    let sp = single_piece_jsf(sa, ia, &p, &m, Model::Simplified).unwrap();
    let f = nli_jsf(&sp, &interference_map(sa, ia, &device, &m, &p, Model::Simplified).unwrap()).unwrap();
    let d = decompose_channels(&f, &channels).unwrap();
    assert_eq!(d.channels.len(), 3);
    for (c, s) in d.channels.iter().zip([192.9, 192.7, 192.5]) {
        assert!((c.peak.0 - s).abs() <= 2.0 * sa.step(), "{:?}", c.peak);
        assert!(c.k < 1.1);
    }
}

#[test]
fn correlation_sign_follows_bandwidth_ratio() {
    // positive below σ_p, negative above
    let r_narrow = pearson_correlation(&common::design(0.5 * common::SIGMA, 151).1).unwrap();
    let r_wide = pearson_correlation(&common::design(1.7 * common::SIGMA, 151).1).unwrap();
    assert!(r_narrow > 0.2, "{r_narrow}");
    assert!(r_wide < -0.2, "{r_wide}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nli_never_exceeds_single_piece(a in 0.01f64..0.8, center in 192.6f64..193.2, power in 0.0f64..1.0) {
        let p = PumpSpec { peak_power: power, ..common::pump() };
        let m = MediumSpec::example_dsf();
        let ch = ChannelSpec { band_half_width: 0.1, ..ChannelSpec::symmetric(&p, center, a) };
        let prof = build_phase_profile(make_axis(193.5, 1.5, 3001).unwrap(), &p, &[ch]).unwrap();
        let sa = make_axis(center, 0.2, 41).unwrap();
        let ia = make_axis(387.0 - center, 0.2, 41).unwrap();
        for model in [Model::Simplified, Model::Full] {
            let sp = single_piece_jsf(sa, ia, &p, &m, model).unwrap();
            let f = nli_jsf(&sp, &interference_map(sa, ia, &prof, &m, &p, model).unwrap()).unwrap();
            for (x, y) in f.amplitude.iter().zip(sp.amplitude.iter()) {
                prop_assert!(x.norm() <= y.norm() * (1.0 + 1e-12));
            }
        }
    }
}
