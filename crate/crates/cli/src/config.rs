//! Run configuration: `key = value` files, flag overrides and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use fiberdd::dephasing::{uniform_grid, SpectralProfile, DEFAULT_OMEGA0, DEFAULT_SIGMA};
use fiberdd::noise::{DEFAULT_AMPLITUDE, DEFAULT_EXPONENT, DEFAULT_IR_CUTOFF, DEFAULT_UV_CUTOFF};
use fiberdd::presets::{DEFAULT_GRID_POINTS, DEFAULT_LENGTH_MAX, FIG3_MAX_PULSES};
use fiberdd::{McConfig, NoiseSpectrum, PulseSequence, XState};

use crate::error::CliError;

/// Length used by `mc-check` unless overridden.
pub const DEFAULT_MC_LENGTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Figure,
    McCheck,
    ValidateConfig,
}

/// Every recognized key, in print order.
pub const KEYS: [&str; 20] = [
    "sequence",
    "pulses",
    "density",
    "alpha",
    "noise-amp",
    "ir-cutoff",
    "uv-cutoff",
    "omega0",
    "sigma",
    "length-max",
    "grid-points",
    "state",
    "trials",
    "seed",
    "resolution",
    "modes",
    "mc-length",
    "max-pulses",
    "out",
    "config",
];

/// Flags shared by every subcommand. Values are kept as text so file and
/// flag values go through the same validation.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Pulse sequence: free, se or cpmg.
    #[arg(long, value_name = "free|se|cpmg")]
    pub sequence: Option<String>,
    /// CPMG pulse count (cpmg only; exclusive with --density).
    #[arg(long, value_name = "N", allow_negative_numbers = true)]
    pub pulses: Option<String>,
    /// CPMG pulses per unit length (cpmg only; exclusive with --pulses).
    #[arg(long, value_name = "n", allow_negative_numbers = true)]
    pub density: Option<String>,
    /// Noise exponent in S(ω) = A/|ω|^α.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<String>,
    /// Noise amplitude A.
    #[arg(long, allow_negative_numbers = true)]
    pub noise_amp: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub ir_cutoff: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub uv_cutoff: Option<String>,
    /// Photon frequency-offset mean.
    #[arg(long, allow_negative_numbers = true)]
    pub omega0: Option<String>,
    /// Photon bandwidth parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub length_max: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub grid_points: Option<String>,
    /// Initial state: paper (default mixed state, concurrence 1/3), bell,
    /// werner:p or file:PATH.
    #[arg(long, value_name = "paper|bell|werner:p|file:PATH")]
    pub state: Option<String>,
    /// Monte Carlo trials.
    #[arg(long, allow_negative_numbers = true)]
    pub trials: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub seed: Option<String>,
    /// Monte Carlo trajectory points per unit length.
    #[arg(long, allow_negative_numbers = true)]
    pub resolution: Option<String>,
    /// Monte Carlo spectral-synthesis modes.
    #[arg(long, allow_negative_numbers = true)]
    pub modes: Option<String>,
    /// Fiber length for mc-check.
    #[arg(long, allow_negative_numbers = true)]
    pub mc_length: Option<String>,
    /// Largest pulse count in the fig3 scan.
    #[arg(long, allow_negative_numbers = true)]
    pub max_pulses: Option<String>,
    /// Output file (simulate, mc-check) or directory (figure).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Read `key = value` settings from a file; flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

impl Overrides {
    fn entries(&self) -> Vec<(&'static str, String)> {
        let text = [
            ("sequence", &self.sequence),
            ("pulses", &self.pulses),
            ("density", &self.density),
            ("alpha", &self.alpha),
            ("noise-amp", &self.noise_amp),
            ("ir-cutoff", &self.ir_cutoff),
            ("uv-cutoff", &self.uv_cutoff),
            ("omega0", &self.omega0),
            ("sigma", &self.sigma),
            ("length-max", &self.length_max),
            ("grid-points", &self.grid_points),
            ("state", &self.state),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("resolution", &self.resolution),
            ("modes", &self.modes),
            ("mc-length", &self.mc_length),
            ("max-pulses", &self.max_pulses),
        ];
        let mut out: Vec<_> = text
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if let Some(p) = &self.out {
            out.push(("out", p.display().to_string()));
        }
        out
    }
}

/// Resolved settings as text, one value per key.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<&'static str, String>,
}

impl RawConfig {
    pub fn defaults(command: Command) -> Self {
        let mc = McConfig::default();
        let out = match command {
            Command::Simulate => "curve.csv",
            Command::Figure => "figures",
            Command::McCheck | Command::ValidateConfig => "-",
        };
        let values = [
            ("sequence", "free".to_string()),
            ("pulses", String::new()),
            ("density", String::new()),
            ("alpha", DEFAULT_EXPONENT.to_string()),
            ("noise-amp", DEFAULT_AMPLITUDE.to_string()),
            ("ir-cutoff", DEFAULT_IR_CUTOFF.to_string()),
            ("uv-cutoff", DEFAULT_UV_CUTOFF.to_string()),
            ("omega0", DEFAULT_OMEGA0.to_string()),
            ("sigma", DEFAULT_SIGMA.to_string()),
            ("length-max", DEFAULT_LENGTH_MAX.to_string()),
            ("grid-points", DEFAULT_GRID_POINTS.to_string()),
            ("state", "paper".to_string()),
            ("trials", mc.trials.to_string()),
            ("seed", mc.seed.to_string()),
            ("resolution", mc.resolution.to_string()),
            ("modes", mc.frequency_modes.to_string()),
            ("mc-length", DEFAULT_MC_LENGTH.to_string()),
            ("max-pulses", FIG3_MAX_PULSES.to_string()),
            ("out", out.to_string()),
            ("config", String::new()),
        ]
        .into_iter()
        .collect();
        Self { values }
    }

    /// Defaults, then the config file named by `--config`, then flags.
    pub fn resolve(command: Command, flags: &Overrides) -> Result<Self, CliError> {
        let mut raw = Self::defaults(command);
        if let Some(path) = &flags.config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading config {}: {e}", path.display())))?;
            let file = parse_config_text(&text).map_err(CliError::Config)?;
            raw.values.extend(file);
            raw.values.insert("config", path.display().to_string());
        }
        raw.values.extend(flags.entries());
        Ok(raw)
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }
}

impl fmt::Display for RawConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# resolved configuration")?;
        for key in KEYS {
            let v = self.get(key);
            if key == "config" {
                // Informational only; a config file cannot name another.
                writeln!(f, "# config = {}", if v.is_empty() { "none" } else { v })?;
            } else if v.is_empty() {
                writeln!(f, "{key} =")?;
            } else {
                writeln!(f, "{key} = {v}")?;
            }
        }
        Ok(())
    }
}

fn canonical_key(key: &str) -> Option<&'static str> {
    let key = key.replace('_', "-");
    KEYS.iter().copied().find(|k| *k == key && *k != "config")
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// skipped. Every bad line is reported.
pub fn parse_config_text(text: &str) -> Result<Vec<(&'static str, String)>, Vec<String>> {
    let mut out: Vec<(&'static str, String)> = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("config line {n}: expected `key = value`"));
            continue;
        };
        let Some(key) = canonical_key(key.trim()) else {
            errors.push(format!("config line {n}: unknown key `{}`", key.trim()));
            continue;
        };
        if out.iter().any(|(k, _)| *k == key) {
            errors.push(format!("config line {n}: duplicate key `{key}`"));
            continue;
        }
        out.push((key, value.trim().to_string()));
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Validated inputs for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sequence: PulseSequence,
    pub spec: NoiseSpectrum,
    pub profile: SpectralProfile,
    pub state: XState,
    pub grid: Vec<f64>,
    pub mc: McConfig,
    pub mc_length: f64,
    pub max_pulses: u32,
    pub out: PathBuf,
}

struct Checker<'a> {
    raw: &'a RawConfig,
    errors: Vec<String>,
}

impl Checker<'_> {
    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Option<T> {
        let text = self.raw.get(key);
        match text.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("{key}: cannot parse `{text}`"));
                None
            }
        }
    }

    fn optional<T: std::str::FromStr>(&mut self, key: &str) -> Option<Option<T>> {
        if self.raw.get(key).is_empty() {
            Some(None)
        } else {
            self.parse(key).map(Some)
        }
    }

    fn check<T>(&mut self, key: &str, r: fiberdd::Result<T>) -> Option<T> {
        r.map_err(|e| self.errors.push(format!("{key}: {e}"))).ok()
    }
}

impl RawConfig {
    /// Validates every field and reports all problems at once.
    pub fn build(&self) -> Result<RunConfig, CliError> {
        let mut c = Checker {
            raw: self,
            errors: Vec::new(),
        };
        let pulses: Option<Option<u32>> = c.optional("pulses");
        let density: Option<Option<f64>> = c.optional("density");
        let sequence = match (self.get("sequence"), pulses, density) {
            (_, None, _) | (_, _, None) => None,
            ("free", Some(None), Some(None)) => Some(PulseSequence::Free),
            ("se", Some(None), Some(None)) => Some(PulseSequence::SpinEcho),
            ("free" | "se", _, _) => {
                c.errors
                    .push("pulses/density: only used with sequence = cpmg".to_string());
                None
            }
            ("cpmg", Some(Some(n)), Some(None)) => Some(PulseSequence::CpmgCount(n)),
            ("cpmg", Some(None), Some(Some(d))) => Some(PulseSequence::CpmgDensity(d)),
            ("cpmg", _, _) => {
                c.errors
                    .push("pulses/density: cpmg needs exactly one of them".to_string());
                None
            }
            (other, _, _) => {
                c.errors
                    .push(format!("sequence: `{other}` is not one of free, se, cpmg"));
                None
            }
        };
        let sequence = match sequence {
            Some(seq) => c.check("sequence", seq.validate().map(|_| seq)),
            None => None,
        };

        let alpha = c.parse("alpha");
        let amp = c.parse("noise-amp");
        let ir = c.parse("ir-cutoff");
        let uv = c.parse("uv-cutoff");
        let spec = match (amp, alpha, ir, uv) {
            (Some(a), Some(al), Some(lo), Some(hi)) => {
                c.check("noise", NoiseSpectrum::new(a, al, lo, hi))
            }
            _ => None,
        };

        let omega0 = c.parse("omega0");
        let sigma = c.parse("sigma");
        let profile = match (omega0, sigma) {
            (Some(w), Some(s)) => c.check("omega0/sigma", SpectralProfile::new(w, s)),
            _ => None,
        };

        let length_max = c.parse("length-max");
        let points = c.parse("grid-points");
        let grid = match (length_max, points) {
            (Some(l), Some(p)) => c.check("length-max/grid-points", uniform_grid(l, p)),
            _ => None,
        };

        let state = match parse_state(self.get("state")) {
            Ok(s) => Some(s),
            Err(StateError::Io(msg)) => return Err(CliError::Io(msg)),
            Err(StateError::Invalid(msg)) => {
                c.errors.push(format!("state: {msg}"));
                None
            }
        };

        let trials = c.parse("trials");
        let seed = c.parse("seed");
        let resolution = c.parse("resolution");
        let modes = c.parse("modes");
        let mc = match (trials, seed, resolution, modes) {
            (Some(trials), Some(seed), Some(resolution), Some(frequency_modes)) => {
                let mc = McConfig {
                    trials,
                    resolution,
                    seed,
                    frequency_modes,
                };
                c.check("monte carlo", mc.validate().map(|_| mc))
            }
            _ => None,
        };
        let mc_length: Option<f64> = c.parse("mc-length");
        if let Some(l) = mc_length {
            if !(l.is_finite() && l > 0.0) {
                c.errors
                    .push(format!("mc-length: {l} must be finite and > 0"));
            }
        }
        let max_pulses = c.parse("max-pulses");
        let out = PathBuf::from(self.get("out"));
        if out.as_os_str().is_empty() {
            c.errors.push("out: empty path".to_string());
        }

        if !c.errors.is_empty() {
            return Err(CliError::Config(c.errors));
        }
        match (
            sequence, spec, profile, grid, state, mc, mc_length, max_pulses,
        ) {
            (
                Some(sequence),
                Some(spec),
                Some(profile),
                Some(grid),
                Some(state),
                Some(mc),
                Some(mc_length),
                Some(max_pulses),
            ) => Ok(RunConfig {
                sequence,
                spec,
                profile,
                state,
                grid,
                mc,
                mc_length,
                max_pulses,
                out,
            }),
            _ => unreachable!("every missing field records an error"),
        }
    }
}

enum StateError {
    Io(String),
    Invalid(String),
}

fn parse_state(text: &str) -> Result<XState, StateError> {
    let state = match text {
        "paper" => XState::default_initial(),
        "bell" => XState::bell_phi_plus(),
        _ => {
            if let Some(p) = text.strip_prefix("werner:") {
                let p: f64 = p.parse().map_err(|_| {
                    StateError::Invalid(format!("cannot parse Werner weight `{p}`"))
                })?;
                XState::werner(p).map_err(|e| StateError::Invalid(e.to_string()))?
            } else if let Some(path) = text.strip_prefix("file:") {
                read_state_file(Path::new(path))?
            } else {
                return Err(StateError::Invalid(format!(
                    "`{text}` is not one of paper, bell, werner:p, file:PATH"
                )));
            }
        }
    };
    let violations = state.validate();
    if violations.is_empty() {
        Ok(state)
    } else {
        Err(StateError::Invalid(
            violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }
}

fn read_state_file(path: &Path) -> Result<XState, StateError> {
    let text = fs::read_to_string(path)
        .map_err(|e| StateError::Io(format!("reading state {}: {e}", path.display())))?;
    text.parse()
        .map_err(|e: fiberdd::Error| StateError::Invalid(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_with(pairs: &[(&'static str, &str)]) -> RawConfig {
        let mut raw = RawConfig::defaults(Command::Simulate);
        for (k, v) in pairs {
            raw.values.insert(k, v.to_string());
        }
        raw
    }

    #[test]
    fn defaults_build() {
        let run = RawConfig::defaults(Command::Simulate).build().unwrap();
        assert_eq!(run.sequence, PulseSequence::Free);
        assert_eq!(run.grid.len(), DEFAULT_GRID_POINTS);
        assert_eq!(run.spec, NoiseSpectrum::default());
        assert_eq!(run.state, XState::default_initial());
    }

    #[test]
    fn shipped_default_config_matches_code() {
        let text = include_str!("../../../configs/default.conf");
        let pairs = parse_config_text(text).unwrap();
        let defaults = RawConfig::defaults(Command::Simulate);
        assert!(!pairs.is_empty());
        for (k, v) in pairs {
            let shipped: f64 = match v.parse() {
                Ok(x) => x,
                Err(_) => {
                    assert_eq!(v, defaults.get(k), "{k}");
                    continue;
                }
            };
            let code: f64 = defaults.get(k).parse().unwrap();
            assert_eq!(shipped, code, "{k}");
        }
    }

    #[test]
    fn parses_comments_and_underscores() {
        let text = "# header\n\nnoise_amp = 0.01  # inline\nsequence=cpmg\ndensity = 0.4\n";
        let pairs = parse_config_text(text).unwrap();
        assert_eq!(
            pairs,
            vec![
                ("noise-amp", "0.01".to_string()),
                ("sequence", "cpmg".to_string()),
                ("density", "0.4".to_string()),
            ]
        );
    }

    #[test]
    fn reports_every_bad_line() {
        let errors = parse_config_text("bogus = 1\nno equals\nalpha = 1\nalpha = 2\n").unwrap_err();
        assert_eq!(errors.len(), 3);
        assert!(errors[0].contains("line 1"));
        assert!(errors[1].contains("line 2"));
        assert!(errors[2].contains("duplicate"));
    }

    #[test]
    fn consolidated_validation_names_fields() {
        let raw = raw_with(&[("noise-amp", "-1"), ("sigma", "x"), ("grid-points", "0")]);
        let Err(CliError::Config(errors)) = raw.build() else {
            panic!("expected config error");
        };
        assert_eq!(errors.len(), 3, "{errors:?}");
        assert!(errors.iter().any(|e| e.starts_with("noise")));
        assert!(errors.iter().any(|e| e.starts_with("sigma")));
        assert!(errors
            .iter()
            .any(|e| e.starts_with("length-max/grid-points")));
    }

    #[test]
    fn sequence_selection() {
        let run = raw_with(&[("sequence", "cpmg"), ("pulses", "4")])
            .build()
            .unwrap();
        assert_eq!(run.sequence, PulseSequence::CpmgCount(4));
        let run = raw_with(&[("sequence", "cpmg"), ("density", "0.5")])
            .build()
            .unwrap();
        assert_eq!(run.sequence, PulseSequence::CpmgDensity(0.5));
        assert!(raw_with(&[("sequence", "cpmg")]).build().is_err());
        assert!(
            raw_with(&[("sequence", "cpmg"), ("pulses", "2"), ("density", "1")])
                .build()
                .is_err()
        );
        assert!(raw_with(&[("sequence", "se"), ("pulses", "2")])
            .build()
            .is_err());
        assert!(raw_with(&[("sequence", "udd")]).build().is_err());
        assert!(raw_with(&[("sequence", "cpmg"), ("pulses", "0")])
            .build()
            .is_err());
    }

    #[test]
    fn state_selectors() {
        assert_eq!(
            raw_with(&[("state", "bell")]).build().unwrap().state,
            XState::bell_phi_plus()
        );
        assert_eq!(
            raw_with(&[("state", "werner:0.6")]).build().unwrap().state,
            XState::werner(0.6).unwrap()
        );
        assert!(raw_with(&[("state", "werner:2")]).build().is_err());
        assert!(raw_with(&[("state", "ghz")]).build().is_err());
        assert!(matches!(
            raw_with(&[("state", "file:/nonexistent/state.txt")]).build(),
            Err(CliError::Io(_))
        ));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "noise-amp = 0.02\nsigma = 0.5\n").unwrap();
        let flags = Overrides {
            sigma: Some("0.7".into()),
            config: Some(path.clone()),
            ..Overrides::default()
        };
        let raw = RawConfig::resolve(Command::Simulate, &flags).unwrap();
        assert_eq!(raw.get("noise-amp"), "0.02");
        assert_eq!(raw.get("sigma"), "0.7");
        assert_eq!(raw.get("config"), path.display().to_string());
    }

    #[test]
    fn resolved_config_round_trips() {
        let raw = raw_with(&[("sequence", "cpmg"), ("density", "0.4"), ("state", "bell")]);
        let printed = raw.to_string();
        let reparsed = parse_config_text(&printed).unwrap();
        let mut again = RawConfig::defaults(Command::Simulate);
        again.values.extend(reparsed);
        assert_eq!(again, raw);
    }
}
