//! Sampled estimate of the coherence factor, independent of filter functions.
//!
//! Each trial draws a Gaussian birefringence trajectory `β(l)` by spectral
//! synthesis, a photon frequency `ω ~ N(ω0, σ²/2)`, and the toggling-frame
//! phase `φ = ω ∫₀^L y(l) β(l) dl` by the trapezoid rule. The estimate is
//! the real part of the mean of `e^{iφ}`.
//!
//! Trials use their own ChaCha stream (seed, trial index), and the reduction
//! runs serially in trial order, so results are bit-identical for any
//! worker count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dephasing::{coherence_factor, overlap_integral, SpectralProfile};
use crate::error::{Error, Result};
use crate::filter::FilterSpec;
use crate::noise::NoiseSpectrum;
use crate::pulses::PulseSequence;

/// Every toggling segment must span at least this many grid intervals.
pub const MIN_POINTS_PER_GAP: f64 = 16.0;
/// Largest trajectory grid accepted.
pub const MAX_TRAJECTORY_POINTS: usize = 10_000_000;
/// Largest mode × node table (cos and sin) kept in memory.
pub const MAX_TABLE_ENTRIES: usize = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: usize,
    /// Trajectory grid points per unit length.
    pub resolution: usize,
    pub seed: u64,
    /// Number of spectral-synthesis modes.
    pub frequency_modes: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            resolution: 256,
            seed: 0x5eed_f1be,
            frequency_modes: 1024,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::MonteCarlo("trials must be >= 1".into()));
        }
        if self.resolution == 0 {
            return Err(Error::MonteCarlo("resolution must be >= 1".into()));
        }
        if self.frequency_modes == 0 {
            return Err(Error::MonteCarlo("frequency modes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Cosine/sine modes for spectral synthesis.
///
/// The band is split into log-spaced cells; each mode sits at the geometric
/// center of its cell and carries the exact cell power, so the synthesized
/// variance equals `(1/π) ∫ S` over the band.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub omegas: Vec<f64>,
    /// Mode amplitudes `√(∫_cell S dω / π)`.
    pub weights: Vec<f64>,
}

impl ModeSet {
    pub fn new(spec: &NoiseSpectrum, modes: usize) -> Self {
        let lo = spec.ir_cutoff();
        let ratio = spec.uv_cutoff() / lo;
        let edge = |k: usize| {
            if k == modes {
                spec.uv_cutoff()
            } else {
                lo * ratio.powf(k as f64 / modes as f64)
            }
        };
        let (omegas, weights) = (0..modes)
            .map(|j| {
                let (a, b) = (edge(j), edge(j + 1));
                ((a * b).sqrt(), (spec.band_power(a, b) / PI).sqrt())
            })
            .unzip();
        Self { omegas, weights }
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Draws `(c_j a_j, c_j b_j)` with standard normal `a_j, b_j`.
    fn draw<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mut cos_amp = Vec::with_capacity(self.len());
        let mut sin_amp = Vec::with_capacity(self.len());
        for &c in &self.weights {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            cos_amp.push(c * a);
            sin_amp.push(c * b);
        }
        (cos_amp, sin_amp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
}

/// One realization of `β(l)` on a uniform grid of `ceil(L·resolution)`
/// intervals over `[0, L]`.
pub fn sample_noise_trajectory<R: Rng>(
    spec: &NoiseSpectrum,
    length: f64,
    resolution: usize,
    modes: usize,
    rng: &mut R,
) -> Result<NoiseTrajectory> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(
            "fiber length",
            length,
            "must be finite and > 0",
        ));
    }
    if resolution == 0 || modes == 0 {
        return Err(Error::MonteCarlo(
            "resolution and modes must be >= 1".into(),
        ));
    }
    let positions = uniform_nodes(length, resolution)?;
    let set = ModeSet::new(spec, modes);
    let (u, v) = set.draw(rng);
    let values = positions
        .iter()
        .map(|&l| {
            set.omegas
                .iter()
                .zip(u.iter().zip(&v))
                .map(|(&w, (&a, &b))| {
                    let (s, c) = (w * l).sin_cos();
                    a * c + b * s
                })
                .sum()
        })
        .collect();
    Ok(NoiseTrajectory { positions, values })
}

fn uniform_nodes(length: f64, resolution: usize) -> Result<Vec<f64>> {
    let intervals = (length * resolution as f64).ceil().max(1.0);
    if intervals + 1.0 > MAX_TRAJECTORY_POINTS as f64 {
        return Err(Error::MonteCarlo(format!(
            "trajectory grid of {intervals} intervals exceeds {MAX_TRAJECTORY_POINTS} points; \
             shorten the fiber or lower the resolution"
        )));
    }
    let n = intervals as usize;
    Ok((0..=n).map(|i| length * i as f64 / n as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Mean of `cos φ`.
    pub estimate: f64,
    pub std_error: f64,
    /// Mean of `sin φ`; zero up to sampling noise.
    pub imag: f64,
    pub imag_std_error: f64,
    pub trials: usize,
}

/// Everything about a run that does not depend on the trial.
struct Plan {
    modes: ModeSet,
    nodes: usize,
    /// Row-major `nodes × modes` tables of `cos(ω_j l_i)`, `sin(ω_j l_i)`.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
    /// Trapezoid weights with the toggling sign folded in.
    weights: Vec<f64>,
    omega0: f64,
    omega_sd: f64,
}

impl Plan {
    fn new(
        seq: &PulseSequence,
        spec: &NoiseSpectrum,
        profile: &SpectralProfile,
        length: f64,
        mc: &McConfig,
    ) -> Result<Self> {
        mc.validate()?;
        let fs = FilterSpec::for_sequence(seq, length)?;
        let gap_points = fs.min_gap() * mc.resolution as f64;
        if gap_points < MIN_POINTS_PER_GAP {
            let needed = (MIN_POINTS_PER_GAP / fs.min_gap()).ceil();
            return Err(Error::MonteCarlo(format!(
                "resolution {} puts only {gap_points:.1} grid points in the shortest pulse gap \
                 {:.4}; need at least {needed} points per unit length",
                mc.resolution,
                fs.min_gap()
            )));
        }

        let nodes = merge_nodes(
            uniform_nodes(length, mc.resolution)?,
            fs.positions(),
            length,
        );
        let modes = mc.frequency_modes;
        if nodes.len().saturating_mul(modes) > MAX_TABLE_ENTRIES {
            return Err(Error::MonteCarlo(format!(
                "{} grid points x {modes} modes exceeds the {MAX_TABLE_ENTRIES}-entry table; \
                 lower the resolution, the mode count or the fiber length",
                nodes.len()
            )));
        }
        let weights = toggled_trapezoid_weights(&nodes, fs.positions());
        let set = ModeSet::new(spec, modes);

        let mut cos_table = Vec::with_capacity(nodes.len() * modes);
        let mut sin_table = Vec::with_capacity(nodes.len() * modes);
        for &l in &nodes {
            for &w in &set.omegas {
                let (s, c) = (w * l).sin_cos();
                cos_table.push(c);
                sin_table.push(s);
            }
        }
        Ok(Self {
            modes: set,
            nodes: nodes.len(),
            cos_table,
            sin_table,
            weights,
            omega0: profile.omega0(),
            omega_sd: profile.frequency_variance().sqrt(),
        })
    }

    /// `(cos φ, sin φ)` for one trial.
    fn trial(&self, seed: u64, index: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let z: f64 = rng.sample(StandardNormal);
        let omega = self.omega0 + self.omega_sd * z;
        let (u, v) = self.modes.draw(&mut rng);

        let m = self.modes.len();
        let mut integral = 0.0;
        for i in 0..self.nodes {
            let cos_row = &self.cos_table[i * m..(i + 1) * m];
            let sin_row = &self.sin_table[i * m..(i + 1) * m];
            let beta: f64 = cos_row
                .iter()
                .zip(sin_row)
                .zip(u.iter().zip(&v))
                .map(|((c, s), (a, b))| a * c + b * s)
                .sum();
            integral += self.weights[i] * beta;
        }
        let phase = omega * integral;
        (phase.cos(), phase.sin())
    }

    fn run(&self, mc: &McConfig, parallel: bool) -> Vec<(f64, f64)> {
        let trials = mc.trials as u64;
        if parallel {
            (0..trials)
                .into_par_iter()
                .map(|t| self.trial(mc.seed, t))
                .collect()
        } else {
            (0..trials).map(|t| self.trial(mc.seed, t)).collect()
        }
    }
}

/// Uniform nodes plus every pulse position, so no trapezoid segment
/// straddles a sign flip.
fn merge_nodes(uniform: Vec<f64>, pulses: &[f64], length: f64) -> Vec<f64> {
    let snap = 1e-12 * length;
    let mut nodes = uniform;
    for &p in pulses {
        let k = nodes.partition_point(|&x| x < p);
        let near = |i: usize| nodes.get(i).is_some_and(|&x| (x - p).abs() <= snap);
        if near(k) {
            nodes[k] = p;
        } else if k > 0 && near(k - 1) {
            nodes[k - 1] = p;
        } else {
            nodes.insert(k, p);
        }
    }
    nodes
}

/// Node weights of `∫ y β dl` with `y` sampled at segment midpoints.
fn toggled_trapezoid_weights(nodes: &[f64], pulses: &[f64]) -> Vec<f64> {
    let mut weights = vec![0.0; nodes.len()];
    let mut crossed = 0;
    for i in 0..nodes.len() - 1 {
        let mid = 0.5 * (nodes[i] + nodes[i + 1]);
        while crossed < pulses.len() && pulses[crossed] < mid {
            crossed += 1;
        }
        let sign = if crossed % 2 == 0 { 1.0 } else { -1.0 };
        let half = 0.5 * sign * (nodes[i + 1] - nodes[i]);
        weights[i] += half;
        weights[i + 1] += half;
    }
    weights
}

fn reduce(samples: &[(f64, f64)]) -> McEstimate {
    let n = samples.len() as f64;
    let (sum_c, sum_s) = samples
        .iter()
        .fold((0.0, 0.0), |(a, b), &(c, s)| (a + c, b + s));
    let (mean_c, mean_s) = (sum_c / n, sum_s / n);
    let (ss_c, ss_s) = samples.iter().fold((0.0, 0.0), |(a, b), &(c, s)| {
        (a + (c - mean_c).powi(2), b + (s - mean_s).powi(2))
    });
    let se = |ss: f64| {
        if samples.len() > 1 {
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        }
    };
    McEstimate {
        estimate: mean_c,
        std_error: se(ss_c),
        imag: mean_s,
        imag_std_error: se(ss_s),
        trials: samples.len(),
    }
}

/// Monte Carlo estimate of `Γ(L)` with its standard error.
pub fn mc_coherence(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    length: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    mc_coherence_with(seq, spec, profile, length, mc, true)
}

fn mc_coherence_with(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    length: f64,
    mc: &McConfig,
    parallel: bool,
) -> Result<McEstimate> {
    if spec.amplitude() == 0.0 {
        // β ≡ 0, so φ ≡ 0 on every trial.
        mc.validate()?;
        FilterSpec::for_sequence(seq, length)?;
        return Ok(McEstimate {
            estimate: 1.0,
            std_error: 0.0,
            imag: 0.0,
            imag_std_error: 0.0,
            trials: mc.trials,
        });
    }
    let plan = Plan::new(seq, spec, profile, length, mc)?;
    Ok(reduce(&plan.run(mc, parallel)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCheck {
    pub f_l: f64,
    pub analytic: f64,
    pub mc: McEstimate,
    /// `(Γ_mc - Γ_analytic) / std_error`.
    pub z: f64,
}

/// Analytic `Γ` next to its Monte Carlo estimate.
pub fn mc_check(
    seq: &PulseSequence,
    spec: &NoiseSpectrum,
    profile: &SpectralProfile,
    length: f64,
    mc: &McConfig,
) -> Result<McCheck> {
    let estimate = mc_coherence(seq, spec, profile, length, mc)?;
    let f_l = overlap_integral(seq, spec, length)?.value;
    let analytic = coherence_factor(f_l, profile);
    let diff = estimate.estimate - analytic;
    let z = if diff == 0.0 {
        0.0
    } else if estimate.std_error == 0.0 {
        diff.signum() * f64::INFINITY
    } else {
        diff / estimate.std_error
    };
    Ok(McCheck {
        f_l,
        analytic,
        mc: estimate,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_spec(amplitude: f64) -> NoiseSpectrum {
        NoiseSpectrum::new(amplitude, 1.0, 1e-2, 1e2).unwrap()
    }

    fn quick() -> McConfig {
        McConfig {
            trials: 2_000,
            resolution: 128,
            seed: 7,
            frequency_modes: 256,
        }
    }

    #[test]
    fn mode_power_matches_variance() {
        let spec = small_spec(0.3);
        let set = ModeSet::new(&spec, 100);
        let power: f64 = set.weights.iter().map(|c| c * c).sum();
        assert_relative_eq!(power, spec.variance(), max_relative = 1e-12);
        assert!(set.omegas.windows(2).all(|w| w[0] < w[1]));
        assert!(set.omegas[0] > 1e-2 && *set.omegas.last().unwrap() < 1e2);
    }

    #[test]
    fn quiet_fiber_is_exactly_coherent() {
        let quiet = small_spec(0.0);
        for seq in [PulseSequence::Free, PulseSequence::CpmgCount(4)] {
            let est =
                mc_coherence(&seq, &quiet, &SpectralProfile::default(), 1.0, &quick()).unwrap();
            assert_eq!(est.estimate, 1.0);
            assert_eq!(est.std_error, 0.0);
            let check = mc_check(&seq, &quiet, &SpectralProfile::default(), 1.0, &quick()).unwrap();
            assert_eq!(check.z, 0.0);
        }
    }

    #[test]
    fn zero_amplitude_trajectory_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = sample_noise_trajectory(&small_spec(0.0), 2.0, 16, 32, &mut rng).unwrap();
        assert_eq!(t.positions.len(), 33);
        assert!(t.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn trapezoid_weights_integrate_signs() {
        let nodes = merge_nodes(uniform_nodes(4.0, 4).unwrap(), &[1.0, 3.0], 4.0);
        assert_eq!(nodes.len(), 17);
        let w = toggled_trapezoid_weights(&nodes, &[1.0, 3.0]);
        // ∫ y dl = 1 - 2 + 1 = 0; ∫ y l dl = 0.5 - 4 + 3.5 = 0.
        let total: f64 = w.iter().sum();
        let first: f64 = w.iter().zip(&nodes).map(|(w, l)| w * l).sum();
        assert!(total.abs() < 1e-15);
        assert!(first.abs() < 1e-14);
    }

    #[test]
    fn off_grid_pulses_become_nodes() {
        let nodes = merge_nodes(uniform_nodes(1.0, 3).unwrap(), &[0.5], 1.0);
        assert_eq!(nodes.len(), 5);
        assert!(nodes.contains(&0.5));
    }

    #[test]
    fn coarse_resolution_is_rejected_before_sampling() {
        let mc = McConfig {
            resolution: 20,
            ..quick()
        };
        let err = mc_coherence(
            &PulseSequence::CpmgCount(4),
            &small_spec(0.1),
            &SpectralProfile::default(),
            1.0,
            &mc,
        );
        assert!(matches!(err, Err(Error::MonteCarlo(_))));
    }

    #[test]
    fn oversized_grid_is_refused() {
        let mc = McConfig {
            resolution: 1_000_000,
            ..quick()
        };
        let err = mc_coherence(
            &PulseSequence::Free,
            &small_spec(0.1),
            &SpectralProfile::default(),
            100.0,
            &mc,
        );
        assert!(matches!(err, Err(Error::MonteCarlo(_))));
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let spec = small_spec(0.2);
        let p = SpectralProfile::new(1.0, 0.3).unwrap();
        let mc = quick();
        let a = mc_coherence_with(&PulseSequence::SpinEcho, &spec, &p, 1.0, &mc, true).unwrap();
        let b = mc_coherence_with(&PulseSequence::SpinEcho, &spec, &p, 1.0, &mc, false).unwrap();
        assert!((a.estimate - b.estimate).abs() <= 1e-12);
        assert_eq!(a, b);
    }

    #[test]
    fn echo_beats_free_stochastically() {
        let spec = small_spec(0.3);
        let p = SpectralProfile::default();
        let free = mc_coherence(&PulseSequence::Free, &spec, &p, 2.0, &quick()).unwrap();
        let cpmg = mc_coherence(&PulseSequence::CpmgCount(4), &spec, &p, 2.0, &quick()).unwrap();
        assert!(cpmg.estimate > free.estimate);
    }

    #[test]
    fn imaginary_part_vanishes() {
        let spec = small_spec(0.3);
        let p = SpectralProfile::new(1.0, 0.5).unwrap();
        let est = mc_coherence(&PulseSequence::Free, &spec, &p, 2.0, &quick()).unwrap();
        assert!(est.imag.abs() <= 4.0 * est.imag_std_error);
    }

    #[test]
    fn trajectory_moments_match_spectrum() {
        use rand::SeedableRng;
        let spec = small_spec(0.3);
        let trials = 10_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<f64> = (0..trials)
            .map(|_| {
                let t = sample_noise_trajectory(&spec, 0.5, 8, 64, &mut rng).unwrap();
                t.values[2]
            })
            .collect();
        let n = trials as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let target = spec.correlation(0.0).unwrap().value;
        assert!(mean.abs() <= 4.0 * (target / n).sqrt(), "mean {mean}");
        assert!((var / target - 1.0).abs() <= 0.05, "var {var} vs {target}");
    }

    #[test]
    fn std_error_shrinks_as_root_trials() {
        let spec = small_spec(0.3);
        let p = SpectralProfile::default();
        let base = McConfig {
            trials: 1_000,
            ..quick()
        };
        let more = McConfig {
            trials: 4_000,
            ..base
        };
        let a = mc_coherence(&PulseSequence::Free, &spec, &p, 1.0, &base).unwrap();
        let b = mc_coherence(&PulseSequence::Free, &spec, &p, 1.0, &more).unwrap();
        let ratio = b.std_error / a.std_error;
        assert!((ratio - 0.5).abs() <= 0.1, "ratio {ratio}");
    }
}
