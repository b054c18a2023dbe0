//! Entanglement of polarization-entangled photon pairs sent through a
//! polarization-maintaining fiber under Gaussian `1/f^α` birefringence noise,
//! protected by waveplate π-pulse sequences (spin echo and CPMG).
//!
//! The analytic path goes pulse positions → filter function → overlap
//! integral `f(L)` → coherence factor `Γ(L)` → dephased X state →
//! concurrence. [`montecarlo`] estimates `Γ(L)` independently by sampling
//! noise trajectories.

pub mod concurrence;
pub mod dephasing;
pub mod error;
pub mod esd;
pub mod filter;
pub mod montecarlo;
pub mod noise;
pub mod presets;
pub mod pulses;
pub mod quadrature;
pub mod states;

pub use concurrence::{concurrence, concurrence_xstate_closed};
pub use dephasing::{
    coherence_factor, decoherence_curve, overlap_integral, CurvePoint, DecoherenceCurve, Overlap,
    PointStatus, SpectralProfile,
};
pub use error::{Error, Result};
pub use esd::{bisect_esd, esd_length, min_pulses_for_target, PulseBudget};
pub use filter::{
    filter_cpmg_closed, filter_fixed_density, filter_free, filter_generic, FilterSpec,
};
pub use montecarlo::{mc_check, mc_coherence, McCheck, McConfig, McEstimate};
pub use noise::NoiseSpectrum;
pub use pulses::PulseSequence;
pub use states::{apply_dephasing, XState};
