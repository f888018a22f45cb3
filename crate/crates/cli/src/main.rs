//! `pairshape`: design, simulate and export a phase-shaped photon-pair source.

mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pairshape::analysis::{decompose_channels, eta_grid, g2_signal, heralding_efficiency, pearson_correlation};
use pairshape::analysis::{schmidt_decompose, AnalysisReport, ChannelRow};
use pairshape::phase::{dispersion_compensation, PhaseProfile};
use pairshape::{export_pgm, hbt_g2_sim, interference_map, joint_spectral_scan, lossy_state_weights};
use pairshape::{nli_jsf, phase_to_pattern, single_piece_jsf, Jsf};

use config::Setup;

#[derive(Parser)]
#[command(name = "pairshape", version, about = "Phase-shaped photon-pair source designer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML, dotted keys)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, overrides output.dir
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// RNG seed, overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Use expected counts instead of Poisson draws
    #[arg(long)]
    noiseless: bool,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the phase profile and its SLM pattern
    Design(Common),
    /// Write the single-piece and shaped joint spectral amplitudes
    Jsf(Common),
    /// Schmidt number, correlation, g2 and heralding report
    Analyze(Common),
    /// Simulated filter-scan coincidence map
    Scan(Common),
    /// g2 and heralding efficiency against transmission
    G2curve(Common),
    /// Export an SLM gray-level pattern
    Pattern {
        #[command(flatten)]
        common: Common,
        /// Phase profile CSV to export instead of the configured design
        #[arg(long, value_name = "PATH")]
        profile: Option<PathBuf>,
        /// Band map written next to the profile
        #[arg(long, value_name = "PATH", requires = "profile")]
        bands: Option<PathBuf>,
    },
}

enum Failure {
    Config(anyhow::Error),
    Compute(anyhow::Error),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, err) = match self {
            Failure::Config(e) => (2, e),
            Failure::Compute(e) => (1, e),
        };
        eprintln!("error: {err:#}");
        ExitCode::from(code)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn prepare(common: &Common) -> Result<Setup, Failure> {
    let mut cfg = config::load(&common.config).map_err(Failure::Config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.noiseless {
        cfg.scan.noiseless = true;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    let setup = cfg.setup().map_err(Failure::Config)?;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::Config(anyhow::anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Compute(e.into()))?;
    }
    Ok(setup)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, profile_in) = match &cli.command {
        Command::Design(c) | Command::Jsf(c) | Command::Analyze(c) | Command::Scan(c) | Command::G2curve(c) => {
            (c, None)
        }
        Command::Pattern { common, profile, bands } => (common, Some((profile.clone(), bands.clone()))),
    };
    let setup = prepare(common)?;
    let result = match cli.command {
        Command::Design(_) => cmd_design(&setup),
        Command::Jsf(_) => cmd_jsf(&setup),
        Command::Analyze(_) => cmd_analyze(&setup),
        Command::Scan(_) => cmd_scan(&setup),
        Command::G2curve(_) => cmd_g2curve(&setup),
        Command::Pattern { .. } => {
            let (profile, bands) = profile_in.unwrap_or_default();
            cmd_pattern(&setup, profile.as_deref(), bands.as_deref())
        }
    };
    result.map_err(Failure::Compute)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let mut w = create(dir, name)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// The profile sent to the device: the design plus dispersion compensation
/// when enabled.
fn device_profile(s: &Setup) -> Result<PhaseProfile> {
    if s.compensate {
        Ok(dispersion_compensation(&s.profile, &s.medium, &s.pump)?)
    } else {
        Ok(s.profile.clone())
    }
}

fn states(s: &Setup) -> Result<(Jsf, Jsf)> {
    let profile = device_profile(s)?;
    let sp = single_piece_jsf(s.signal_axis, s.idler_axis, &s.pump, &s.medium, s.model)?;
    let map = interference_map(s.signal_axis, s.idler_axis, &profile, &s.medium, &s.pump, s.model)?;
    let nli = nli_jsf(&sp, &map)?;
    Ok((sp, nli))
}

fn write_pattern(s: &Setup, profile: &PhaseProfile) -> Result<()> {
    let pattern = phase_to_pattern(profile, &s.calibration)?;
    let mut w = create(&s.out_dir, "pattern.pgm")?;
    export_pgm(&pattern, &mut w)?;
    w.flush()?;
    write_text(&s.out_dir, "pattern.toml", &s.calibration.to_text())
}

fn cmd_design(s: &Setup) -> Result<()> {
    let profile = device_profile(s)?;
    let mut w = create(&s.out_dir, "profile.csv")?;
    profile.write_csv(&mut w)?;
    w.flush()?;
    write_text(&s.out_dir, "bands.toml", &profile.band_map())?;
    write_pattern(s, &profile)?;

    println!("islands: {}", s.channels.len());
    for (k, ch) in s.channels.iter().enumerate() {
        println!(
            "  {k}: signal {:.4} THz, idler {:.4} THz, a {:.4}/{:.4} THz, half-width {:.4} THz{}",
            ch.signal_center,
            ch.idler_center,
            ch.a_signal,
            ch.a_idler,
            ch.band_half_width,
            if ch.reversed { ", reversed" } else { "" }
        );
    }
    println!("wrote {}", s.out_dir.display());
    Ok(())
}

fn cmd_pattern(s: &Setup, profile: Option<&Path>, bands: Option<&Path>) -> Result<()> {
    let profile = match profile {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let map = bands
                .map(|b| fs::read_to_string(b).with_context(|| format!("reading {}", b.display())))
                .transpose()?;
            PhaseProfile::read_csv(BufReader::new(f), map.as_deref())
                .with_context(|| format!("reading {}", path.display()))?
        }
        None => device_profile(s)?,
    };
    write_pattern(s, &profile)?;
    println!("wrote {}", s.out_dir.join("pattern.pgm").display());
    Ok(())
}

fn cmd_jsf(s: &Setup) -> Result<()> {
    let (sp, nli) = states(s)?;
    for (name, jsf) in [("single_piece.csv", &sp), ("jsf.csv", &nli)] {
        let mut w = create(&s.out_dir, name)?;
        jsf.write_csv(&mut w)?;
        w.flush()?;
    }
    println!("wrote {}", s.out_dir.display());
    Ok(())
}

/// Heralding efficiency at transmission η; at η = 0 its limit, 0.
fn heralding(sp: &Jsf, nli: &Jsf, eta: f64, gain: f64) -> Result<f64> {
    if eta == 0.0 {
        return Ok(0.0);
    }
    Ok(heralding_efficiency(&lossy_state_weights(sp, nli, eta, gain)?)?)
}

#[derive(Serialize)]
struct HbtSection {
    hbt: HbtRow,
}

#[derive(Serialize)]
struct HbtRow {
    eta: f64,
    g2: f64,
    std_error: f64,
    pulses: u64,
    detector_efficiency: f64,
    mean_photons: f64,
    seed: u64,
}

fn cmd_analyze(s: &Setup) -> Result<()> {
    let (sp, nli) = states(s)?;
    let schmidt = schmidt_decompose(&nli)?;
    let pearson_r = pearson_correlation(&nli)?;
    let parts = decompose_channels(&nli, &s.channels)?;
    let eta = eta_grid(s.eta_step)?;
    let mut g2 = Vec::with_capacity(eta.len());
    let mut herald = Vec::with_capacity(eta.len());
    for &e in &eta {
        g2.push(g2_signal(&sp, &nli, e, s.window.as_ref())?);
        herald.push(heralding(&sp, &nli, e, s.gain)?);
    }
    let channels = s
        .channels
        .iter()
        .zip(&parts.channels)
        .enumerate()
        .map(|(index, (ch, p))| ChannelRow {
            index,
            signal_thz: ch.signal_center,
            idler_thz: ch.idler_center,
            r: p.r,
            k: p.k,
            peak_signal_thz: p.peak.0,
            peak_idler_thz: p.peak.1,
        })
        .collect();
    let report = AnalysisReport {
        k: schmidt.k,
        pearson_r,
        windowed: s.window.is_some(),
        eta,
        g2,
        heralding: herald,
        residual: parts.residual,
        channels,
    };
    let mut text = report.to_text();
    if let Some(cfg) = &s.hbt {
        let est = hbt_g2_sim(&sp, &nli, s.eta, s.window.as_ref(), cfg)?;
        let section = HbtSection {
            hbt: HbtRow {
                eta: s.eta,
                g2: est.g2,
                std_error: est.std_error,
                pulses: cfg.pulses,
                detector_efficiency: cfg.detector_efficiency,
                mean_photons: cfg.mean_photons,
                seed: cfg.seed,
            },
        };
        text.push('\n');
        text.push_str(&toml::to_string(&section)?);
        println!("simulated g2 at eta {}: {:.4} +/- {:.4}", s.eta, est.g2, est.std_error);
    }
    write_text(&s.out_dir, "report.toml", &text)?;

    println!("K = {:.4}, r = {:.4}", report.k, report.pearson_r);
    for (e, g) in report.eta.iter().zip(&report.g2) {
        if [0.6, 0.85, 1.0].iter().any(|x| (x - e).abs() < 1e-9) {
            println!("g2({e}) = {g:.4}");
        }
    }
    Ok(())
}

fn cmd_scan(s: &Setup) -> Result<()> {
    let (sp, nli) = states(s)?;
    let scan = joint_spectral_scan(&sp, &nli, s.eta, s.gain, &s.scan)?;
    let mut w = create(&s.out_dir, "scan.csv")?;
    scan.write_csv(&mut w)?;
    w.flush()?;
    let (i, j) = scan.argmax();
    println!("peak at signal {:.2} nm, idler {:.2} nm", scan.signal_nm[i], scan.idler_nm[j]);
    Ok(())
}

fn cmd_g2curve(s: &Setup) -> Result<()> {
    let (sp, nli) = states(s)?;
    let mut w = create(&s.out_dir, "g2curve.csv")?;
    writeln!(w, "eta,g2,heralding")?;
    for e in eta_grid(s.eta_step)? {
        let g2 = g2_signal(&sp, &nli, e, s.window.as_ref())?;
        writeln!(w, "{e},{g2},{}", heralding(&sp, &nli, e, s.gain)?)?;
    }
    w.flush()?;
    println!("wrote {}", s.out_dir.join("g2curve.csv").display());
    Ok(())
}
