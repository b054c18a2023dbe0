//! Entanglement sudden death length and the minimum CPMG pulse budget.

use rayon::prelude::*;

use crate::concurrence::concurrence;
use crate::dephasing::{evaluate_point, CurvePoint, PointStatus, SpectralProfile};
use crate::error::{Error, Result};
use crate::noise::NoiseSpectrum;
use crate::pulses::PulseSequence;
use crate::states::XState;

pub const ESD_SCAN_POINTS: usize = 200;
/// Bisection stops once the bracket is below this fraction of `L_max`.
pub const ESD_LENGTH_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_PULSES: u32 = 512;

fn concurrence_at(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    state: &XState,
    length: f64,
) -> Result<f64> {
    let point = evaluate_point(seq, spec, profile, state, length);
    match point.status {
        PointStatus::Failed { reason } => Err(quadrature_failure(length, reason)),
        _ => Ok(point.concurrence),
    }
}

fn quadrature_failure(length: f64, reason: String) -> Error {
    Error::PointFailed { length, reason }
}

/// Smallest `L ∈ (0, L_max]` with zero concurrence, or `None` if the state
/// stays entangled on the whole scan grid.
pub fn esd_length(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    state: &XState,
    length_max: f64,
) -> Result<Option<f64>> {
    esd_length_scan(seq, spec, profile, state, length_max, ESD_SCAN_POINTS)
}

/// [`esd_length`] with an explicit coarse-scan resolution (at least
/// [`ESD_SCAN_POINTS`]).
pub fn esd_length_scan(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    state: &XState,
    length_max: f64,
    scan_points: usize,
) -> Result<Option<f64>> {
    seq.validate()?;
    if !(length_max.is_finite() && length_max > 0.0) {
        return Err(Error::invalid(
            "length max",
            length_max,
            "must be finite and > 0",
        ));
    }
    if concurrence(state)? == 0.0 {
        return Ok(Some(0.0));
    }
    let points = scan_points.max(ESD_SCAN_POINTS);
    let step = length_max / points as f64;

    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=points {
        let l = step * i as f64;
        if concurrence_at(seq, spec, profile, state, l)? == 0.0 {
            hi = Some(l);
            break;
        }
        lo = l;
    }
    let Some(hi) = hi else {
        return Ok(None);
    };
    bisect_esd(
        seq,
        spec,
        profile,
        state,
        lo,
        hi,
        ESD_LENGTH_TOL * length_max,
    )
    .map(Some)
}

/// Narrows a bracket with `C(lo) > 0` (or `lo = 0`) and `C(hi) = 0` to
/// width `tol`, returning the upper end.
pub fn bisect_esd(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    state: &XState,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("bisection tolerance", tol, "must be > 0"));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if concurrence_at(seq, spec, profile, state, mid)? == 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseBudget {
    /// Concurrence at the target length for `N = 0..=N_max`.
    pub scan: Vec<(u32, CurvePoint)>,
    /// Smallest `N` reaching the target; `None` means unreachable.
    pub minimal: Option<u32>,
}

/// CPMG with `n` pulses, `n = 0` being free evolution.
pub fn cpmg_with_count(n: u32) -> PulseSequence {
    if n == 0 {
        PulseSequence::Free
    } else {
        PulseSequence::CpmgCount(n)
    }
}

/// Concurrence at `length` for every CPMG pulse count `0..=max_pulses`.
pub fn pulse_scan(
    length: f64,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    state: &XState,
    max_pulses: u32,
) -> Vec<(u32, CurvePoint)> {
    (0..=max_pulses)
        .into_par_iter()
        .map(|n| {
            (
                n,
                evaluate_point(&cpmg_with_count(n), spec, profile, state, length),
            )
        })
        .collect()
}

/// Linear scan for the smallest pulse count whose concurrence at
/// `length` reaches `target`. Concurrence is not assumed monotone in `N`,
/// so the whole range is evaluated and returned.
pub fn min_pulses_for_target(
    length: f64,
    target: f64,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    state: &XState,
    max_pulses: u32,
) -> Result<PulseBudget> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(
            "fiber length",
            length,
            "must be finite and > 0",
        ));
    }
    let initial = concurrence(state)?;
    if !target.is_finite() || target > initial {
        return Err(Error::invalid(
            "target concurrence",
            target,
            "must not exceed the initial concurrence",
        ));
    }
    let scan = pulse_scan(length, spec, profile, state, max_pulses);
    if let Some((_, p)) = scan.iter().find(|(_, p)| p.is_failed()) {
        if let PointStatus::Failed { reason } = &p.status {
            return Err(quadrature_failure(p.length, reason.clone()));
        }
    }
    let minimal = scan
        .iter()
        .find(|(_, p)| p.concurrence >= target)
        .map(|(n, _)| *n);
    Ok(PulseBudget { scan, minimal })
}
