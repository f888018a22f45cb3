#![allow(dead_code)]

use pairshape::{
    build_phase_profile, interference_map, make_axis, nli_jsf, single_piece_jsf, ChannelSpec, DualBandWindow, Jsf,
    MediumSpec, Model, PumpSpec,
};

pub const SIGNAL: f64 = 192.9;
pub const IDLER: f64 = 194.1;
pub const SIGMA: f64 = 0.042;

pub fn pump() -> PumpSpec {
    PumpSpec::fiber_experiment()
}

/// Single island at (192.9, 194.1) THz on a ±6σ_p grid of n² samples.
pub fn design(a: f64, n: usize) -> (Jsf, Jsf) {
    let p = pump();
    let m = MediumSpec::example_dsf();
    let ch = ChannelSpec::symmetric(&p, SIGNAL, a);
    let prof = build_phase_profile(make_axis(193.5, 1.25, 12501).unwrap(), &p, &[ch]).unwrap();
    let sa = make_axis(SIGNAL, 6.0 * SIGMA, n).unwrap();
    let ia = make_axis(IDLER, 6.0 * SIGMA, n).unwrap();
    let sp = single_piece_jsf(sa, ia, &p, &m, Model::Simplified).unwrap();
    let f = nli_jsf(&sp, &interference_map(sa, ia, &prof, &m, &p, Model::Simplified).unwrap()).unwrap();
    (sp, f)
}

pub fn window() -> DualBandWindow {
    DualBandWindow { signal_center: SIGNAL, idler_center: IDLER, full_width: 0.2 }
}
