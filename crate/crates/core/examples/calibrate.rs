//! Free-evolution ESD length of the default initial state as a function of
//! the noise amplitude. Used to pick `DEFAULT_AMPLITUDE`.
//!
//! cargo run --release -p fiberdd --example calibrate -- 0.006 0.008 0.01

use std::time::Instant;

use fiberdd::dephasing::SpectralProfile;
use fiberdd::{esd_length, NoiseSpectrum, PulseSequence, XState};

fn main() {
    let amplitudes: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let amplitudes = if amplitudes.is_empty() {
        vec![fiberdd::noise::DEFAULT_AMPLITUDE]
    } else {
        amplitudes
    };
    let profile = SpectralProfile::default();
    let state = XState::default_initial();
    for a in amplitudes {
        let spec = NoiseSpectrum::default()
            .with_amplitude(a)
            .expect("amplitude");
        let start = Instant::now();
        let esd = esd_length(&PulseSequence::Free, &spec, &profile, &state, 50.0).expect("esd");
        println!("A = {a}: free ESD = {esd:?} ({:.2?})", start.elapsed());
    }
}
