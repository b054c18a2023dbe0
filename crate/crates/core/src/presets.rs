//! Figure presets: fiber-length sweeps for several pulse intervals, spin
//! echo against free evolution, the pulse-budget scan at fixed length, and
//! the spectral-slope sweep.

use std::fmt;
use std::str::FromStr;

use crate::dephasing::{
    decoherence_curve, uniform_grid, CurvePoint, DecoherenceCurve, SpectralProfile,
};
use crate::error::{Error, Result};
use crate::esd::pulse_scan;
use crate::noise::NoiseSpectrum;
use crate::pulses::PulseSequence;
use crate::states::XState;

pub const DEFAULT_LENGTH_MAX: f64 = 50.0;
pub const DEFAULT_GRID_POINTS: usize = 100;

/// Pulses per unit length, lowest first.
pub const FIG2A_DENSITIES: [f64; 3] = [0.1, 0.2, 0.4];
pub const FIG3_LENGTH: f64 = 50.0;
pub const FIG3_MAX_PULSES: u32 = 64;
pub const FIG4_EXPONENTS: [f64; 5] = [0.5, 0.75, 1.0, 1.25, 1.5];
/// The slope sweep runs CPMG at the middle fig2a density.
pub const FIG4_DENSITY: f64 = FIG2A_DENSITIES[1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2a, Figure::Fig2b, Figure::Fig3, Figure::Fig4];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }

    pub fn description(&self) -> String {
        match self {
            Figure::Fig2a => format!(
                "concurrence vs length: free evolution and CPMG at fixed densities {FIG2A_DENSITIES:?} pulses per unit length"
            ),
            Figure::Fig2b => {
                "concurrence vs length: free evolution and one spin-echo pulse at the midpoint of each length".into()
            }
            Figure::Fig3 => format!(
                "concurrence at fixed length {FIG3_LENGTH} vs total CPMG pulse count"
            ),
            Figure::Fig4 => format!(
                "concurrence vs length for spectral exponents {FIG4_EXPONENTS:?}; sequence fixed to CPMG at density {FIG4_DENSITY}"
            ),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure '{s}' (expected fig2a, fig2b, fig3 or fig4)"))
    }
}

/// Noise, photon spectrum, initial state and length grid shared by presets.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: NoiseSpectrum,
    pub profile: SpectralProfile,
    pub state: XState,
    pub grid: Vec<f64>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            spec: NoiseSpectrum::default(),
            profile: SpectralProfile::default(),
            state: XState::default_initial(),
            grid: uniform_grid(DEFAULT_LENGTH_MAX, DEFAULT_GRID_POINTS).expect("static grid"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub curve: DecoherenceCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureData {
    Curves(Vec<Series>),
    PulseScan {
        length: f64,
        scan: Vec<(u32, CurvePoint)>,
    },
}

fn series(name: String, seq: PulseSequence, spec: &NoiseSpectrum, s: &Scenario) -> Result<Series> {
    Ok(Series {
        name,
        curve: decoherence_curve(&seq, spec, &s.profile, &s.grid, &s.state)?,
    })
}

pub fn fig2a(s: &Scenario) -> Result<Vec<Series>> {
    let mut out = vec![series("free".into(), PulseSequence::Free, &s.spec, s)?];
    for density in FIG2A_DENSITIES {
        out.push(series(
            format!("cpmg-n{density}"),
            PulseSequence::CpmgDensity(density),
            &s.spec,
            s,
        )?);
    }
    Ok(out)
}

pub fn fig2b(s: &Scenario) -> Result<Vec<Series>> {
    Ok(vec![
        series("free".into(), PulseSequence::Free, &s.spec, s)?,
        series("se".into(), PulseSequence::SpinEcho, &s.spec, s)?,
    ])
}

pub fn fig3(s: &Scenario, length: f64, max_pulses: u32) -> Result<Vec<(u32, CurvePoint)>> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(
            "fiber length",
            length,
            "must be finite and > 0",
        ));
    }
    Ok(pulse_scan(
        length, &s.spec, &s.profile, &s.state, max_pulses,
    ))
}

pub fn fig4(s: &Scenario) -> Result<Vec<Series>> {
    FIG4_EXPONENTS
        .iter()
        .map(|&alpha| {
            let spec = s.spec.with_exponent(alpha)?;
            series(
                format!("alpha-{alpha}"),
                PulseSequence::CpmgDensity(FIG4_DENSITY),
                &spec,
                s,
            )
        })
        .collect()
}

pub fn run_figure(figure: Figure, s: &Scenario, fig3_max_pulses: u32) -> Result<FigureData> {
    Ok(match figure {
        Figure::Fig2a => FigureData::Curves(fig2a(s)?),
        Figure::Fig2b => FigureData::Curves(fig2b(s)?),
        Figure::Fig3 => FigureData::PulseScan {
            length: FIG3_LENGTH,
            scan: fig3(s, FIG3_LENGTH, fig3_max_pulses)?,
        },
        Figure::Fig4 => FigureData::Curves(fig4(s)?),
    })
}
