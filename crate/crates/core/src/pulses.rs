//! π-pulse placement along the fiber and the toggling-frame sign.
//!
//! Pulses are ideal, zero-width sign flips. CPMG places `N` pulses at
//! `(k - 1/2) L / N`, so no pulse ever sits at `l = 0` or `l = L`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseSequence {
    Free,
    SpinEcho,
    /// CPMG with a fixed total pulse count.
    CpmgCount(u32),
    /// CPMG with a fixed number of pulses per unit length; the count is
    /// re-derived as `round(n L)` for every fiber length.
    CpmgDensity(f64),
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseSequence::Free => write!(f, "free"),
            PulseSequence::SpinEcho => write!(f, "se"),
            PulseSequence::CpmgCount(n) => write!(f, "cpmg-N{n}"),
            PulseSequence::CpmgDensity(d) => write!(f, "cpmg-n{d}"),
        }
    }
}

impl PulseSequence {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseSequence::CpmgCount(0) => {
                Err(Error::invalid("CPMG pulse count", 0.0, "must be >= 1"))
            }
            PulseSequence::CpmgDensity(d) if !(d.is_finite() && d > 0.0) => Err(Error::invalid(
                "CPMG pulse density",
                d,
                "must be finite and > 0",
            )),
            _ => Ok(()),
        }
    }

    /// Number of pulses placed in a fiber of length `length`.
    pub fn pulse_count(&self, length: f64) -> Result<u32> {
        self.validate()?;
        check_length(length)?;
        match *self {
            PulseSequence::Free => Ok(0),
            PulseSequence::SpinEcho => Ok(1),
            PulseSequence::CpmgCount(n) => Ok(n),
            PulseSequence::CpmgDensity(d) => {
                let n = (d * length).round();
                if n < 1.0 {
                    Err(Error::DegenerateSequence { density: d, length })
                } else if n > u32::MAX as f64 {
                    Err(Error::invalid(
                        "CPMG pulse density",
                        d,
                        "pulse count overflows",
                    ))
                } else {
                    Ok(n as u32)
                }
            }
        }
    }

    pub fn positions(&self, length: f64) -> Result<Vec<f64>> {
        let n = self.pulse_count(length)?;
        Ok(match self {
            PulseSequence::Free => Vec::new(),
            PulseSequence::SpinEcho => vec![0.5 * length],
            _ => cpmg_positions(n, length),
        })
    }

    /// Like [`positions`](Self::positions), except that a fixed-density
    /// sequence too short to hold its first pulse is plain free evolution.
    /// This is what a fiber with fixed waveplate spacing looks like before
    /// the first plate.
    pub fn positions_along_fiber(&self, length: f64) -> Result<Vec<f64>> {
        match self.positions(length) {
            Err(Error::DegenerateSequence { .. }) => Ok(Vec::new()),
            other => other,
        }
    }

    /// `y(l) = (-1)^(pulses before l)`.
    pub fn toggling_sign(&self, l: f64, length: f64) -> Result<f64> {
        check_length(length)?;
        if !(0.0..=length).contains(&l) {
            return Err(Error::PositionOutOfRange {
                position: l,
                length,
            });
        }
        let crossed = self.positions(length)?.iter().filter(|&&p| p < l).count();
        Ok(if crossed % 2 == 0 { 1.0 } else { -1.0 })
    }
}

/// `l_k = L (k - 1/2) / N` for `k = 1..=N`.
pub fn cpmg_positions(n: u32, length: f64) -> Vec<f64> {
    let count = n as f64;
    (1..=n).map(|k| length * (k as f64 - 0.5) / count).collect()
}

fn check_length(length: f64) -> Result<()> {
    if length.is_finite() && length > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "fiber length",
            length,
            "must be finite and > 0",
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn position_examples() {
        assert!(PulseSequence::Free.positions(5.0).unwrap().is_empty());
        assert_eq!(PulseSequence::SpinEcho.positions(4.0).unwrap(), vec![2.0]);
        assert_eq!(
            PulseSequence::CpmgCount(2).positions(4.0).unwrap(),
            vec![1.0, 3.0]
        );
    }

    #[test]
    fn sign_examples() {
        for l in [0.0, 1.3, 5.0] {
            assert_eq!(PulseSequence::Free.toggling_sign(l, 5.0).unwrap(), 1.0);
        }
        assert_eq!(
            PulseSequence::SpinEcho.toggling_sign(3.0, 4.0).unwrap(),
            -1.0
        );
        assert_eq!(
            PulseSequence::CpmgCount(2).toggling_sign(2.0, 4.0).unwrap(),
            -1.0
        );
        assert_eq!(
            PulseSequence::CpmgCount(2).toggling_sign(0.0, 4.0).unwrap(),
            1.0
        );
        assert_eq!(
            PulseSequence::CpmgCount(2).toggling_sign(3.5, 4.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn sign_outside_fiber_is_error() {
        assert!(PulseSequence::SpinEcho.toggling_sign(-0.1, 1.0).is_err());
        assert!(PulseSequence::SpinEcho.toggling_sign(1.1, 1.0).is_err());
    }

    #[test]
    fn degenerate_density() {
        let seq = PulseSequence::CpmgDensity(0.1);
        assert!(matches!(
            seq.positions(4.0),
            Err(Error::DegenerateSequence { .. })
        ));
        assert!(seq.positions_along_fiber(4.0).unwrap().is_empty());
        assert_eq!(seq.positions(5.0).unwrap(), vec![2.5]);
    }

    #[test]
    fn invalid_sequences() {
        assert!(PulseSequence::CpmgCount(0).positions(1.0).is_err());
        assert!(PulseSequence::CpmgDensity(-1.0).positions(1.0).is_err());
        assert!(PulseSequence::CpmgDensity(f64::NAN).validate().is_err());
        assert!(PulseSequence::Free.positions(0.0).is_err());
    }

    proptest! {
        #[test]
        fn positions_strictly_inside(n in 1u32..300, length in 1e-3f64..1e3) {
            let pos = PulseSequence::CpmgCount(n).positions(length).unwrap();
            prop_assert_eq!(pos.len(), n as usize);
            prop_assert!(pos[0] > 0.0 && *pos.last().unwrap() < length);
            prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn density_matches_count(density in 0.05f64..20.0, length in 0.5f64..100.0) {
            let n = (density * length).round() as u32;
            prop_assume!(n >= 1);
            prop_assert_eq!(
                PulseSequence::CpmgDensity(density).positions(length).unwrap(),
                PulseSequence::CpmgCount(n).positions(length).unwrap()
            );
        }

        #[test]
        fn even_cpmg_is_balanced(half in 1u32..100, length in 0.1f64..100.0) {
            let pos = PulseSequence::CpmgCount(2 * half).positions(length).unwrap();
            let mut edges = vec![0.0];
            edges.extend_from_slice(&pos);
            edges.push(length);
            let signed: f64 = edges
                .windows(2)
                .enumerate()
                .map(|(k, w)| if k % 2 == 0 { w[1] - w[0] } else { w[0] - w[1] })
                .sum();
            prop_assert!(signed.abs() < 1e-12 * length);
        }

        #[test]
        fn sign_changes_equal_pulse_count(n in 1u32..40, length in 0.5f64..20.0) {
            let seq = PulseSequence::CpmgCount(n);
            let steps = 64 * n as usize;
            let mut changes = 0;
            let mut last = seq.toggling_sign(0.0, length).unwrap();
            for i in 1..=steps {
                // Offset the probe grid so no sample lands on a pulse.
                let l = (length * (i as f64 - 0.37) / steps as f64).min(length);
                let s = seq.toggling_sign(l, length).unwrap();
                if s != last {
                    changes += 1;
                    last = s;
                }
            }
            prop_assert_eq!(changes, n);
        }
    }
}
