//! Two-qubit polarization states of X form in the basis
//! `|HH⟩, |HV⟩, |VH⟩, |VV⟩`, with the fiber-traversing photon as the first
//! tensor factor.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

const TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    /// `ρ11, ρ22, ρ33, ρ44`.
    pub diag: [f64; 4],
    /// `ρ14` (HH-VV coherence).
    pub outer: Complex64,
    /// `ρ23` (HV-VH coherence).
    pub inner: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NegativePopulation {
        index: usize,
        value: f64,
    },
    Trace {
        trace: f64,
        margin: f64,
    },
    /// `|ρ14|² - ρ11 ρ44 > 0`.
    OuterPositivity {
        margin: f64,
    },
    /// `|ρ23|² - ρ22 ρ33 > 0`.
    InnerPositivity {
        margin: f64,
    },
    NotFinite,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativePopulation { index, value } => {
                write!(f, "rho{0}{0} = {value} is negative", index + 1)
            }
            Violation::Trace { trace, margin } => {
                write!(f, "trace = {trace} deviates from 1 by {margin:e}")
            }
            Violation::OuterPositivity { margin } => {
                write!(f, "|rho14|^2 exceeds rho11*rho44 by {margin:e}")
            }
            Violation::InnerPositivity { margin } => {
                write!(f, "|rho23|^2 exceeds rho22*rho33 by {margin:e}")
            }
            Violation::NotFinite => write!(f, "state has non-finite entries"),
        }
    }
}

impl XState {
    pub fn new(diag: [f64; 4], outer: Complex64, inner: Complex64) -> Self {
        Self { diag, outer, inner }
    }

    /// Like [`new`](Self::new) but rejects invalid states.
    pub fn checked(diag: [f64; 4], outer: Complex64, inner: Complex64) -> Result<Self> {
        let state = Self::new(diag, outer, inner);
        let violations = state.validate();
        if violations.is_empty() {
            Ok(state)
        } else {
            let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
            Err(Error::InvalidState(text.join("; ")))
        }
    }

    /// `|Φ⁺⟩ = (|HH⟩ + |VV⟩)/√2`.
    pub fn bell_phi_plus() -> Self {
        Self::new(
            [0.5, 0.0, 0.0, 0.5],
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    /// `(1/3) [[1/2,0,0,0],[0,1,1,0],[0,1,1,0],[0,0,0,1/2]]`, concurrence 1/3.
    pub fn default_initial() -> Self {
        let third = 1.0 / 3.0;
        Self::new(
            [third / 2.0, third, third, third / 2.0],
            Complex64::new(0.0, 0.0),
            Complex64::new(third, 0.0),
        )
    }

    /// `p |Φ⁺⟩⟨Φ⁺| + (1 - p) I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("Werner weight", p, "must lie in [0, 1]"));
        }
        let edge = (1.0 + p) / 4.0;
        let mid = (1.0 - p) / 4.0;
        Ok(Self::new(
            [edge, mid, mid, edge],
            Complex64::new(p / 2.0, 0.0),
            Complex64::new(0.0, 0.0),
        ))
    }

    pub fn maximally_mixed() -> Self {
        Self::new(
            [0.25; 4],
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Every violated condition, with its margin. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let finite = self.diag.iter().all(|d| d.is_finite())
            && self.outer.re.is_finite()
            && self.outer.im.is_finite()
            && self.inner.re.is_finite()
            && self.inner.im.is_finite();
        if !finite {
            return vec![Violation::NotFinite];
        }

        let mut out = Vec::new();
        for (index, &value) in self.diag.iter().enumerate() {
            if value < 0.0 {
                out.push(Violation::NegativePopulation { index, value });
            }
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            out.push(Violation::Trace {
                trace,
                margin: (trace - 1.0).abs(),
            });
        }
        let [r11, r22, r33, r44] = self.diag;
        let outer = self.outer.norm_sqr() - r11 * r44;
        if outer > 0.0 {
            out.push(Violation::OuterPositivity { margin: outer });
        }
        let inner = self.inner.norm_sqr() - r22 * r33;
        if inner > 0.0 {
            out.push(Violation::InnerPositivity { margin: inner });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Dephasing of the first qubit: populations untouched, both X-form
    /// coherences scaled by `gamma`.
    pub fn dephase(&self, gamma: f64) -> Self {
        Self {
            diag: self.diag,
            outer: self.outer * gamma,
            inner: self.inner * gamma,
        }
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let re = |x: f64| Complex64::new(x, 0.0);
        let z = re(0.0);
        let [r11, r22, r33, r44] = self.diag;
        Matrix4::new(
            re(r11),
            z,
            z,
            self.outer,
            z,
            re(r22),
            self.inner,
            z,
            z,
            self.inner.conj(),
            re(r33),
            z,
            self.outer.conj(),
            z,
            z,
            re(r44),
        )
    }

    /// Smallest coherence factor that keeps the dephased state entangled;
    /// `C(dephase(Γ)) = 0` exactly for `Γ ≤ threshold`. Infinite when the
    /// state carries no usable coherence.
    pub fn esd_threshold(&self) -> f64 {
        let [r11, r22, r33, r44] = self.diag;
        let via_outer = (r22 * r33).sqrt() / self.outer.norm();
        let via_inner = (r11 * r44).sqrt() / self.inner.norm();
        // 0/0 (no coherence and empty pair) cannot entangle.
        let clean = |x: f64| if x.is_nan() { f64::INFINITY } else { x };
        clean(via_outer).min(clean(via_inner))
    }
}

/// Applies the dephasing channel; `gamma` must lie in `[0, 1]`.
pub fn apply_dephasing(state: &XState, gamma: f64) -> Result<XState> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(
            "coherence factor",
            gamma,
            "must lie in [0, 1]",
        ));
    }
    Ok(state.dephase(gamma))
}

const KEYS: [&str; 6] = ["rho11", "rho22", "rho33", "rho44", "rho14", "rho23"];

impl FromStr for XState {
    type Err = Error;

    /// Parses six `key=value` lines: `rho11..rho44` real and
    /// `rho14`, `rho23` complex (`a+bi`). Blank lines and `#` comments are
    /// skipped.
    fn from_str(text: &str) -> Result<Self> {
        let mut values: [Option<Complex64>; 6] = [None; 6];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::StateParse { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got '{content}'")))?;
            let key = key.trim().to_ascii_lowercase();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| parse_err(format!("unknown key '{key}'")))?;
            if values[slot].is_some() {
                return Err(parse_err(format!("duplicate key '{key}'")));
            }
            let parsed = parse_complex(value.trim())
                .ok_or_else(|| parse_err(format!("cannot parse value '{}'", value.trim())))?;
            if slot < 4 && parsed.im != 0.0 {
                return Err(parse_err(format!("population {key} must be real")));
            }
            values[slot] = Some(parsed);
        }
        let total_lines = text.lines().count();
        let mut got = [Complex64::new(0.0, 0.0); 6];
        for (slot, value) in values.iter().enumerate() {
            got[slot] = value.ok_or_else(|| Error::StateParse {
                line: total_lines + 1,
                message: format!("missing key '{}'", KEYS[slot]),
            })?;
        }
        Ok(XState::new(
            [got[0].re, got[1].re, got[2].re, got[3].re],
            got[4],
            got[5],
        ))
    }
}

/// `a`, `bi`, `a+bi` or `a-bi`, with optional exponents.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => t.parse::<f64>().ok(),
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

impl fmt::Display for XState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |z: Complex64| format!("{:e}{:+e}i", z.re, z.im);
        writeln!(f, "rho11={:e}", self.diag[0])?;
        writeln!(f, "rho22={:e}", self.diag[1])?;
        writeln!(f, "rho33={:e}", self.diag[2])?;
        writeln!(f, "rho44={:e}", self.diag[3])?;
        writeln!(f, "rho14={}", c(self.outer))?;
        writeln!(f, "rho23={}", c(self.inner))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Random valid X state: diagonal uniform on the simplex, coherences
    /// uniform inside their positivity disks.
    pub(crate) fn arb_xstate() -> impl Strategy<Value = XState> {
        (
            proptest::array::uniform4(1e-9f64..1.0),
            0.0f64..1.0,
            0.0f64..std::f64::consts::TAU,
            0.0f64..1.0,
            0.0f64..std::f64::consts::TAU,
        )
            .prop_map(|(e, r1, p1, r2, p2)| {
                let w: Vec<f64> = e.iter().map(|u| -u.ln()).collect();
                let total: f64 = w.iter().sum();
                let d = [
                    w[0] / total,
                    w[1] / total,
                    w[2] / total,
                    1.0 - (w[0] + w[1] + w[2]) / total,
                ];
                let outer = Complex64::from_polar(r1.sqrt() * (d[0] * d[3]).sqrt(), p1);
                let inner = Complex64::from_polar(r2.sqrt() * (d[1] * d[2]).sqrt(), p2);
                XState::new(d, outer, inner)
            })
    }

    #[test]
    fn validation_examples() {
        assert!(XState::bell_phi_plus().is_valid());
        assert!(XState::default_initial().is_valid());
        let bad = XState::new(
            [0.5, 0.0, 0.0, 0.5],
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let report = bad.validate();
        assert_eq!(report.len(), 1);
        match report[0] {
            Violation::OuterPositivity { margin } => assert!((margin - 0.11).abs() < 1e-12),
            ref other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_reports_each_violation() {
        let bad = XState::new(
            [0.6, -0.1, 0.1, 0.6],
            Complex64::new(0.0, 0.0),
            Complex64::new(0.2, 0.0),
        );
        let report = bad.validate();
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::NegativePopulation { index: 1, .. })));
        assert!(report.iter().any(|v| matches!(v, Violation::Trace { .. })));
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::InnerPositivity { .. })));
        assert!(XState::checked(bad.diag, bad.outer, bad.inner).is_err());
    }

    #[test]
    fn dephasing_examples() {
        let bell = XState::bell_phi_plus();
        assert_eq!(apply_dephasing(&bell, 1.0).unwrap(), bell);
        let half = apply_dephasing(&bell, 0.5).unwrap();
        assert_eq!(half.outer, Complex64::new(0.25, 0.0));
        assert_eq!(half.diag, bell.diag);
        assert!(apply_dephasing(&bell, 1.5).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(XState::bell_phi_plus().esd_threshold(), 0.0);
        assert!((XState::default_initial().esd_threshold() - 0.5).abs() < 1e-15);
        assert_eq!(XState::maximally_mixed().esd_threshold(), f64::INFINITY);
    }

    #[test]
    fn werner_state() {
        let w = XState::werner(1.0 / 3.0).unwrap();
        assert!(w.is_valid());
        assert!((w.outer.re - 1.0 / 6.0).abs() < 1e-15);
        assert!(XState::werner(1.2).is_err());
    }

    #[test]
    fn parse_state_file() {
        let text = "rho11=0.25\nrho22 = 0.25\n# comment\n\nrho33=0.25\nrho44=0.25\nrho14=0.1-0.05i\nrho23=1e-2+2e-3i\n";
        let s: XState = text.parse().unwrap();
        assert_eq!(s.outer, Complex64::new(0.1, -0.05));
        assert_eq!(s.inner, Complex64::new(0.01, 0.002));
        assert!(s.is_valid());
        let round: XState = s.to_string().parse().unwrap();
        assert_eq!(round, s);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "rho11=0.25\nrho22=0.25\nrho33=oops\nrho44=0.25\nrho14=0\nrho23=0\n";
        match text.parse::<XState>() {
            Err(Error::StateParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match "rho11=0.5\nrho99=1\n".parse::<XState>() {
            Err(Error::StateParse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("rho99"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            "rho11=0.5\nrho22=0.5\n".parse::<XState>(),
            Err(Error::StateParse { .. })
        ));
        assert!(matches!(
            "rho11=0.5+1i\n".parse::<XState>(),
            Err(Error::StateParse { line: 1, .. })
        ));
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5"), Some(Complex64::new(0.5, 0.0)));
        assert_eq!(parse_complex("-0.5i"), Some(Complex64::new(0.0, -0.5)));
        assert_eq!(parse_complex("i"), Some(Complex64::new(0.0, 1.0)));
        assert_eq!(
            parse_complex("-1e-3-2E+1i"),
            Some(Complex64::new(-1e-3, -20.0))
        );
        assert_eq!(parse_complex("1 + 2 i"), Some(Complex64::new(1.0, 2.0)));
        assert_eq!(parse_complex("x"), None);
        assert_eq!(parse_complex(""), None);
    }

    proptest! {
        #[test]
        fn dephasing_preserves_validity(s in arb_xstate(), g in 0.0f64..=1.0) {
            let d = s.dephase(g);
            prop_assert_eq!(d.trace(), s.trace());
            prop_assert!(d.is_valid());
        }

        #[test]
        fn dephasing_composes(s in arb_xstate(), g1 in 0.0f64..=1.0, g2 in 0.0f64..=1.0) {
            let twice = s.dephase(g1).dephase(g2);
            let once = s.dephase(g1 * g2);
            // Complex * real scales each component independently, so the
            // two routes agree to one rounding.
            prop_assert!((twice.outer - once.outer).norm() <= 2.0 * f64::EPSILON * s.outer.norm());
            prop_assert!((twice.inner - once.inner).norm() <= 2.0 * f64::EPSILON * s.inner.norm());
        }
    }
}
