//! Classical stationary Gaussian dephasing noise with a power-law spectrum
//! `S(ω) = A / |ω|^α`, band-limited to `ω_min ≤ |ω| ≤ ω_max`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadSettings, Quadrature};

pub const DEFAULT_AMPLITUDE: f64 = 0.008;
pub const DEFAULT_EXPONENT: f64 = 1.0;
pub const DEFAULT_IR_CUTOFF: f64 = 1e-3;
pub const DEFAULT_UV_CUTOFF: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpectrum {
    amplitude: f64,
    exponent: f64,
    ir_cutoff: f64,
    uv_cutoff: f64,
}

impl Default for NoiseSpectrum {
    fn default() -> Self {
        Self {
            amplitude: DEFAULT_AMPLITUDE,
            exponent: DEFAULT_EXPONENT,
            ir_cutoff: DEFAULT_IR_CUTOFF,
            uv_cutoff: DEFAULT_UV_CUTOFF,
        }
    }
}

impl NoiseSpectrum {
    /// A zero amplitude is accepted and describes a noiseless fiber.
    pub fn new(amplitude: f64, exponent: f64, ir_cutoff: f64, uv_cutoff: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::invalid(
                "noise amplitude",
                amplitude,
                "must be finite and >= 0",
            ));
        }
        if !(0.0..=2.0).contains(&exponent) {
            return Err(Error::invalid(
                "spectral exponent",
                exponent,
                "must lie in [0, 2]",
            ));
        }
        if !(ir_cutoff.is_finite() && ir_cutoff > 0.0) {
            return Err(Error::invalid(
                "ir cutoff",
                ir_cutoff,
                "must be finite and > 0",
            ));
        }
        if !(uv_cutoff.is_finite() && uv_cutoff > ir_cutoff) {
            return Err(Error::invalid(
                "uv cutoff",
                uv_cutoff,
                "must be finite and > ir cutoff",
            ));
        }
        Ok(Self {
            amplitude,
            exponent,
            ir_cutoff,
            uv_cutoff,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn ir_cutoff(&self) -> f64 {
        self.ir_cutoff
    }

    pub fn uv_cutoff(&self) -> f64 {
        self.uv_cutoff
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(amplitude, self.exponent, self.ir_cutoff, self.uv_cutoff)
    }

    pub fn with_exponent(&self, exponent: f64) -> Result<Self> {
        Self::new(self.amplitude, exponent, self.ir_cutoff, self.uv_cutoff)
    }

    /// `S(ω)`; even in ω and only defined inside the cutoff band.
    pub fn eval(&self, omega: f64) -> Result<f64> {
        let w = omega.abs();
        if !(self.ir_cutoff..=self.uv_cutoff).contains(&w) {
            return Err(Error::FrequencyOutOfBand {
                omega,
                lo: self.ir_cutoff,
                hi: self.uv_cutoff,
            });
        }
        Ok(self.density(w))
    }

    /// Unchecked `S(ω)` for `ω > 0` inside the band; quadrature nodes are
    /// interior by construction.
    #[inline]
    pub(crate) fn density(&self, omega: f64) -> f64 {
        if self.exponent == 0.0 {
            self.amplitude
        } else if self.exponent == 1.0 {
            self.amplitude / omega
        } else if self.exponent == 2.0 {
            self.amplitude / (omega * omega)
        } else {
            self.amplitude * omega.powf(-self.exponent)
        }
    }

    /// Exact `∫ S(ω) dω` over `[lo, hi]` on the positive axis.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let one_minus = 1.0 - self.exponent;
        if self.exponent == 1.0 {
            self.amplitude * (hi / lo).ln()
        } else {
            self.amplitude * (hi.powf(one_minus) - lo.powf(one_minus)) / one_minus
        }
    }

    /// Two-point correlation `⟨β(l) β(l + Δl)⟩`, i.e. the inverse transform
    /// `(1/2π) ∫ S(ω) e^{-iωΔl} dω` over both signed bands.
    pub fn correlation(&self, delta: f64) -> Result<Quadrature> {
        if !delta.is_finite() {
            return Err(Error::invalid("correlation lag", delta, "must be finite"));
        }
        if self.amplitude == 0.0 {
            return Ok(Quadrature {
                value: 0.0,
                abs_error: 0.0,
                panels: 0,
                evaluations: 0,
            });
        }
        let lag = delta.abs();
        let settings = QuadSettings {
            max_panel_width: (lag > 0.0).then(|| PI / lag),
            ..QuadSettings::default()
        };
        // Even integrand: twice the positive band, times 1/2π.
        integrate(
            |w| self.density(w) * (w * lag).cos() / PI,
            self.ir_cutoff,
            self.uv_cutoff,
            &settings,
        )
    }

    pub fn variance(&self) -> f64 {
        self.band_power(self.ir_cutoff, self.uv_cutoff) / PI
    }
}
