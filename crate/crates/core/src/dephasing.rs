//! Overlap integral `f(L)`, coherence factor `Γ(L)` and entanglement sweeps.
//!
//! ```text
//! f(L) = (1/2π) ∫ S(ω) F(ωL) / ω² dω      over ω_min ≤ |ω| ≤ ω_max
//! Γ    = exp(-ω0² f / (1 + σ² f)) / √(1 + σ² f)
//! ```
//!
//! `Γ` is the average of `exp(-ω² f)` over a Gaussian photon spectrum with
//! mean `ω0` and variance `σ²/2`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::concurrence::concurrence;
use crate::error::{Error, Result};
use crate::filter::{filter_generic, FilterSpec};
use crate::noise::NoiseSpectrum;
use crate::pulses::PulseSequence;
use crate::quadrature::{integrate, QuadSettings};
use crate::states::XState;

pub const DEFAULT_OMEGA0: f64 = 1.0;
pub const DEFAULT_SIGMA: f64 = 0.1;

/// Quadrature target for `f(L)`, absolute and relative.
pub const OVERLAP_TOL: f64 = 1e-8;
/// Points that only reach this relative accuracy are kept but flagged.
pub const LOOSE_TOL: f64 = 1e-5;

/// Photon frequency-offset distribution: Gaussian intensity with mean
/// `omega0` and variance `sigma²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralProfile {
    omega0: f64,
    sigma: f64,
}

impl Default for SpectralProfile {
    fn default() -> Self {
        Self {
            omega0: DEFAULT_OMEGA0,
            sigma: DEFAULT_SIGMA,
        }
    }
}

impl SpectralProfile {
    pub fn new(omega0: f64, sigma: f64) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::invalid("omega0", omega0, "must be finite"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid("sigma", sigma, "must be finite and >= 0"));
        }
        Ok(Self { omega0, sigma })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Variance of the sampled photon frequency offset.
    pub fn frequency_variance(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

/// `f(L)` for the pulse positions of `seq` at length `length`.
pub fn overlap_integral(seq: &PulseSequence, spec: &NoiseSpectrum, length: f64) -> Result<Overlap> {
    let fs = FilterSpec::for_sequence(seq, length)?;
    overlap_for_filter(&fs, spec)
}

/// `f(L)` for explicit pulse positions.
///
/// Panels are capped at `π/L`, half the period of the fastest oscillation
/// `e^{iωL}` in the filter.
pub fn overlap_for_filter(fs: &FilterSpec, spec: &NoiseSpectrum) -> Result<Overlap> {
    if spec.amplitude() == 0.0 {
        return Ok(Overlap {
            value: 0.0,
            abs_error: 0.0,
            panels: 0,
        });
    }
    let settings = QuadSettings {
        abs_tol: OVERLAP_TOL,
        rel_tol: OVERLAP_TOL,
        max_panel_width: Some(PI / fs.length()),
        ..QuadSettings::default()
    };
    // Even integrand: 2 × (1/2π) over the positive band.
    let q = integrate(
        |w| spec.density(w) * filter_generic(fs, w) / (PI * w * w),
        spec.ir_cutoff(),
        spec.uv_cutoff(),
        &settings,
    )?;
    Ok(Overlap {
        value: q.value,
        abs_error: q.abs_error,
        panels: q.panels,
    })
}

/// `Γ = exp(-ω0² f / (1 + σ² f)) / √(1 + σ² f)`.
pub fn coherence_factor(f_l: f64, profile: &SpectralProfile) -> f64 {
    let spread = 1.0 + profile.sigma * profile.sigma * f_l;
    (-profile.omega0 * profile.omega0 * f_l / spread).exp() / spread.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Converged,
    /// Quadrature missed the target but reached `LOOSE_TOL`.
    Loose {
        achieved: f64,
    },
    Failed {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub length: f64,
    pub f_l: f64,
    pub gamma: f64,
    pub concurrence: f64,
    pub status: PointStatus,
}

impl CurvePoint {
    pub fn is_failed(&self) -> bool {
        matches!(self.status, PointStatus::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecoherenceCurve {
    pub points: Vec<CurvePoint>,
}

impl DecoherenceCurve {
    pub fn lengths(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.length).collect()
    }

    pub fn concurrences(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.concurrence).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.is_failed()).count()
    }

    pub fn flagged(&self) -> usize {
        self.points
            .iter()
            .filter(|p| matches!(p.status, PointStatus::Loose { .. }))
            .count()
    }

    /// First grid length with zero concurrence.
    pub fn first_zero(&self) -> Option<f64> {
        self.points
            .iter()
            .find(|p| !p.is_failed() && p.concurrence == 0.0)
            .map(|p| p.length)
    }
}

/// `f`, `Γ` and concurrence at one fiber length. Fixed-density sequences
/// re-derive their pulses for this length and are free evolution until the
/// first waveplate fits.
pub fn evaluate_point(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    state: &XState,
    length: f64,
) -> CurvePoint {
    let failed = |reason: String| CurvePoint {
        length,
        f_l: f64::NAN,
        gamma: f64::NAN,
        concurrence: f64::NAN,
        status: PointStatus::Failed { reason },
    };
    let fs = match seq
        .positions_along_fiber(length)
        .and_then(|pos| FilterSpec::new(pos, length))
    {
        Ok(fs) => fs,
        Err(e) => return failed(e.to_string()),
    };
    let (f_l, status) = match overlap_for_filter(&fs, spec) {
        Ok(o) => (o.value, PointStatus::Converged),
        Err(Error::NotConverged {
            estimate, achieved, ..
        }) if achieved <= LOOSE_TOL * estimate.abs().max(1.0) => {
            (estimate, PointStatus::Loose { achieved })
        }
        Err(e) => return failed(e.to_string()),
    };
    let gamma = coherence_factor(f_l, profile);
    match concurrence(&state.dephase(gamma)) {
        Ok(c) => CurvePoint {
            length,
            f_l,
            gamma,
            concurrence: c,
            status,
        },
        Err(e) => failed(e.to_string()),
    }
}

/// Sweep over `grid`. Per-point quadrature failures are recorded in the
/// point status and the sweep continues; only invalid inputs are errors.
pub fn decoherence_curve(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    grid: &[f64],
    state: &XState,
) -> Result<DecoherenceCurve> {
    seq.validate()?;
    check_grid(grid)?;
    if !state.is_valid() {
        return Err(Error::InvalidState(
            state
                .validate()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let points = grid
        .par_iter()
        .map(|&l| evaluate_point(seq, spec, profile, state, l))
        .collect();
    Ok(DecoherenceCurve { points })
}

/// `points` evenly spaced lengths `L_max·i/points`, `i = 1..=points`.
pub fn uniform_grid(length_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(length_max.is_finite() && length_max > 0.0) {
        return Err(Error::invalid(
            "length max",
            length_max,
            "must be finite and > 0",
        ));
    }
    if points == 0 {
        return Err(Error::invalid("grid points", 0.0, "must be >= 1"));
    }
    Ok((1..=points)
        .map(|i| length_max * i as f64 / points as f64)
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid points", 0.0, "grid is empty"));
    }
    if let Some(&bad) = grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::invalid("grid length", bad, "must be finite and > 0"));
    }
    if let Some(w) = grid.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "grid length",
            w[1],
            "grid must be strictly increasing",
        ));
    }
    Ok(())
}
