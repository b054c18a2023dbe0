//! Filter functions `F(ωL)` of π-pulse sequences.
//!
//! The generic form sums the toggling-frame segments directly,
//!
//! ```text
//! F(ω) = ½ |Σ_{k=0}^{N} (-1)^k (e^{iω l_{k+1}} - e^{iω l_k})|²,  l_0 = 0, l_{N+1} = L,
//! ```
//!
//! normalized so that free evolution gives `2 sin²(ωL/2)`. The CPMG closed
//! forms are kept as independent routes and fall back to the generic sum at
//! their removable `0/0` points.

use crate::error::{Error, Result};
use crate::pulses::{cpmg_positions, PulseSequence};

/// Below this `|cos(x / 2N)|` the closed forms lose digits to cancellation
/// and the generic sum is used instead.
const SINGULAR_MARGIN: f64 = 1e-4;

/// Pulse positions in `(0, L)` plus the total length.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    positions: Vec<f64>,
    length: f64,
}

impl FilterSpec {
    pub fn new(positions: Vec<f64>, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(
                "fiber length",
                length,
                "must be finite and > 0",
            ));
        }
        let inside = positions.iter().all(|&p| p > 0.0 && p < length);
        let increasing = positions.windows(2).all(|w| w[0] < w[1]);
        if !(inside && increasing) {
            return Err(Error::InvalidPositions { length });
        }
        Ok(Self { positions, length })
    }

    pub fn free(length: f64) -> Result<Self> {
        Self::new(Vec::new(), length)
    }

    pub fn for_sequence(seq: &PulseSequence, length: f64) -> Result<Self> {
        Self::new(seq.positions(length)?, length)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn pulse_count(&self) -> usize {
        self.positions.len()
    }

    /// Shortest toggling segment, counting the two end segments.
    pub fn min_gap(&self) -> f64 {
        let mut prev = 0.0;
        let mut gap = f64::INFINITY;
        for &p in self.positions.iter().chain(std::iter::once(&self.length)) {
            gap = gap.min(p - prev);
            prev = p;
        }
        gap
    }
}

/// Generic filter from the pulse positions.
///
/// The segment sum equals `Σ c_j e^{iω l_j}` with `Σ c_j = 0`, so each
/// exponential is taken as `e^{iθ} - 1 = -2 sin²(θ/2) + i sin θ`, which
/// keeps the small-ω result accurate. The rounding error of `θ = ω·l` is
/// carried to first order; it dominates near zeros of `F` at large `ωL`.
pub fn filter_generic(fs: &FilterSpec, omega: f64) -> f64 {
    #[inline]
    fn phasor_minus_one(omega: f64, l: f64) -> (f64, f64) {
        let theta = omega * l;
        let err = omega.mul_add(l, -theta);
        let (s, c) = (0.5 * theta).sin_cos();
        let (sin, cos) = (2.0 * s * c, 1.0 - 2.0 * s * s);
        (-2.0 * s * s - err * sin, sin + err * cos)
    }

    let mut re = 0.0;
    let mut im = 0.0;
    let mut coeff = 2.0;
    for &l in &fs.positions {
        let (r, i) = phasor_minus_one(omega, l);
        re += coeff * r;
        im += coeff * i;
        coeff = -coeff;
    }
    let (r, i) = phasor_minus_one(omega, fs.length);
    // coeff is now 2 (-1)^N; the end point enters with (-1)^N.
    re += 0.5 * coeff * r;
    im += 0.5 * coeff * i;
    0.5 * (re * re + im * im)
}

/// Free evolution, `F(x) = 2 sin²(x/2)`.
pub fn filter_free(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Closed-form CPMG filter with `x = ωL`:
/// `8 sin⁴(x/4N) sin²(x/2) / cos²(x/2N)` for even `N`, with `sin²(x/2)`
/// replaced by `cos²(x/2)` for odd `N`.
pub fn filter_cpmg_closed(n: u32, omega: f64, length: f64) -> f64 {
    assert!(n >= 1, "CPMG needs at least one pulse");
    let count = n as f64;
    let x = omega * length;
    let denom = (x / (2.0 * count)).cos();
    if denom.abs() < SINGULAR_MARGIN {
        let fs = FilterSpec {
            positions: cpmg_positions(n, length),
            length,
        };
        return filter_generic(&fs, omega);
    }
    let s4 = (x / (4.0 * count)).sin().powi(4);
    let half = if n.is_multiple_of(2) {
        (0.5 * x).sin()
    } else {
        (0.5 * x).cos()
    };
    8.0 * s4 * half * half / (denom * denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityFilter {
    pub value: f64,
    /// True when `nL` is an even integer, where the continuum form is exact
    /// for the CPMG sequence with `N = nL` pulses. Otherwise the value is the
    /// continuum idealization and the generic filter for `N = round(nL)`
    /// is the ground truth.
    pub exact: bool,
}

/// Fixed-density form `8 sin⁴(ω/4n) sin²(ωL/2) / cos²(ω/2n)`.
pub fn filter_fixed_density(density: f64, omega: f64, length: f64) -> Result<DensityFilter> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::invalid(
            "CPMG pulse density",
            density,
            "must be finite and > 0",
        ));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(
            "fiber length",
            length,
            "must be finite and > 0",
        ));
    }
    let nl = density * length;
    let rounded = nl.round();
    let integral = rounded >= 1.0 && (nl - rounded).abs() <= 1e-12 * nl.max(1.0);
    let exact = integral && rounded % 2.0 == 0.0;

    let denom = (omega / (2.0 * density)).cos();
    if denom.abs() < SINGULAR_MARGIN && integral {
        return Ok(DensityFilter {
            value: filter_cpmg_closed(rounded as u32, omega, length),
            exact,
        });
    }
    let s4 = (omega / (4.0 * density)).sin().powi(4);
    let half = (0.5 * omega * length).sin();
    Ok(DensityFilter {
        value: 8.0 * s4 * half * half / (denom * denom),
        exact,
    })
}
