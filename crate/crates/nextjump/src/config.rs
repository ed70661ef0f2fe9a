//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored. Values
//! from the command line override the file, and anything left unset falls
//! back to the defaults of the command being run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nextjump_core::model::SystemParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    /// Rabi frequencies given in rad/s.
    #[default]
    Angular,
    /// Rabi frequencies given in Hz and multiplied by 2π; decay rates are
    /// taken as 1/s unchanged.
    Hertz,
}

impl FromStr for Units {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "angular" => Ok(Self::Angular),
            "hertz" => Ok(Self::Hertz),
            other => Err(CliError::Config(format!(
                "units must be angular or hertz, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Angular => "angular",
            Self::Hertz => "hertz",
        })
    }
}

/// Every key of the config format; all optional until resolved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub units: Option<Units>,
    pub grid_start: Option<f64>,
    pub grid_stop: Option<f64>,
    pub grid_step: Option<f64>,
    pub seed: Option<u64>,
    pub n_traj: Option<usize>,
    pub horizon: Option<f64>,
    pub t0_prime: Option<f64>,
    pub t3_threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::Config(format!("line {line}: cannot parse {key} = {raw:?}")))
}

impl PartialConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "omega1" => cfg.omega1 = Some(parse_value(key, value, line)?),
                "omega2" => cfg.omega2 = Some(parse_value(key, value, line)?),
                "beta1" => cfg.beta1 = Some(parse_value(key, value, line)?),
                "beta2" => cfg.beta2 = Some(parse_value(key, value, line)?),
                "units" => cfg.units = Some(value.parse()?),
                "grid_start" => cfg.grid_start = Some(parse_value(key, value, line)?),
                "grid_stop" => cfg.grid_stop = Some(parse_value(key, value, line)?),
                "grid_step" => cfg.grid_step = Some(parse_value(key, value, line)?),
                "seed" => cfg.seed = Some(parse_value(key, value, line)?),
                "n_traj" => cfg.n_traj = Some(parse_value(key, value, line)?),
                "horizon" => cfg.horizon = Some(parse_value(key, value, line)?),
                "t0_prime" => cfg.t0_prime = Some(parse_value(key, value, line)?),
                "t3_threshold" => cfg.t3_threshold = Some(parse_value(key, value, line)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::Config(format!(
                        "line {line}: unknown key {other:?}"
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Values set in `other` win.
    pub fn overridden_by(self, other: Self) -> Self {
        Self {
            omega1: other.omega1.or(self.omega1),
            omega2: other.omega2.or(self.omega2),
            beta1: other.beta1.or(self.beta1),
            beta2: other.beta2.or(self.beta2),
            units: other.units.or(self.units),
            grid_start: other.grid_start.or(self.grid_start),
            grid_stop: other.grid_stop.or(self.grid_stop),
            grid_step: other.grid_step.or(self.grid_step),
            seed: other.seed.or(self.seed),
            n_traj: other.n_traj.or(self.n_traj),
            horizon: other.horizon.or(self.horizon),
            t0_prime: other.t0_prime.or(self.t0_prime),
            t3_threshold: other.t3_threshold.or(self.t3_threshold),
            out: other.out.or(self.out),
        }
    }
}

/// Time grid on the command's native axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    /// `start, start + step, …` up to `stop` inclusive (within rounding).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.step > 0.0)
            || !(self.stop >= self.start)
            || !self.start.is_finite()
            || !self.stop.is_finite()
        {
            return Err(CliError::Config(format!(
                "grid needs step > 0 and finite start <= stop, got {}..{} step {}",
                self.start, self.stop, self.step
            )));
        }
        Ok(())
    }
}

/// Command defaults that a partial config is resolved against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defaults {
    pub params: SystemParams,
    pub grid: Grid,
    pub seed: u64,
    pub n_traj: usize,
    /// `None`: 200 lifetimes of the slowest mode (`10⁴/β₁` if it does not decay).
    pub horizon: Option<f64>,
    pub units: Units,
}

/// Fully resolved configuration. `params` are always angular.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub units: Units,
    pub grid: Grid,
    pub seed: u64,
    pub n_traj: usize,
    pub horizon: f64,
    pub t0_prime: f64,
    /// `None` means the default `1/|λ₃|`.
    pub t3_threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

fn default_horizon(params: &SystemParams) -> f64 {
    let slowest = nextjump_core::spectral::exact_eigenvalues(params)
        .slowest()
        .re
        .abs();
    if slowest > 0.0 {
        200.0 / slowest
    } else {
        1.0e4 / params.beta1
    }
}

impl RunConfig {
    pub fn resolve(partial: PartialConfig, defaults: &Defaults) -> Result<Self, CliError> {
        let units = partial.units.unwrap_or(defaults.units);
        let d = defaults.params;
        let to_angular = |x: f64| match units {
            Units::Angular => x,
            Units::Hertz => x * std::f64::consts::TAU,
        };
        let params = SystemParams::new(
            partial.omega1.map_or(d.omega1, to_angular),
            partial.omega2.map_or(d.omega2, to_angular),
            partial.beta1.unwrap_or(d.beta1),
            partial.beta2.unwrap_or(d.beta2),
        )?;
        let grid = Grid {
            start: partial.grid_start.unwrap_or(defaults.grid.start),
            stop: partial.grid_stop.unwrap_or(defaults.grid.stop),
            step: partial.grid_step.unwrap_or(defaults.grid.step),
        };
        grid.validate()?;
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::Config(format!(
                    "{name} must be positive and finite, got {x}"
                )))
            }
        };
        let n_traj = partial.n_traj.unwrap_or(defaults.n_traj);
        if n_traj == 0 {
            return Err(CliError::Config("n_traj must be at least 1".into()));
        }
        Ok(Self {
            params,
            units,
            grid,
            seed: partial.seed.unwrap_or(defaults.seed),
            n_traj,
            horizon: positive(
                "horizon",
                partial
                    .horizon
                    .or(defaults.horizon)
                    .unwrap_or_else(|| default_horizon(&params)),
            )?,
            t0_prime: positive(
                "t0_prime",
                partial
                    .t0_prime
                    .unwrap_or(nextjump_core::propagator::DEFAULT_ONSET_TAU / params.beta1),
            )?,
            t3_threshold: partial
                .t3_threshold
                .map(|x| positive("t3_threshold", x))
                .transpose()?,
            out: partial.out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Defaults {
        Defaults {
            params: SystemParams::figure2(),
            grid: Grid {
                start: 0.0,
                stop: 1.0,
                step: 0.5,
            },
            seed: 1,
            n_traj: 2,
            horizon: Some(10.0),
            units: Units::Angular,
        }
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let cfg =
            PartialConfig::parse("# header\n\nomega1 = 2.5 # trailing\nunits=hertz\nseed = 9\n")
                .unwrap();
        assert_eq!(cfg.omega1, Some(2.5));
        assert_eq!(cfg.units, Some(Units::Hertz));
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.beta1, None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            PartialConfig::parse("gamma = 1"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            PartialConfig::parse("beta1 = fast"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            PartialConfig::parse("beta1"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            PartialConfig::parse("units = rpm"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn overrides_take_precedence() {
        let file = PartialConfig::parse("seed = 1\nbeta1 = 3").unwrap();
        let flags = PartialConfig {
            seed: Some(5),
            ..Default::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.seed, Some(5));
        assert_eq!(merged.beta1, Some(3.0));
    }

    #[test]
    fn hertz_scales_only_rabi_frequencies() {
        let partial =
            PartialConfig::parse("units = hertz\nomega1 = 1\nomega2 = 2\nbeta1 = 3\nbeta2 = 4")
                .unwrap();
        let cfg = RunConfig::resolve(partial, &defaults()).unwrap();
        let tau = std::f64::consts::TAU;
        assert_eq!(
            cfg.params,
            SystemParams::new(tau, 2.0 * tau, 3.0, 4.0).unwrap()
        );
    }

    #[test]
    fn resolve_validates() {
        let bad = PartialConfig {
            beta1: Some(-1.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(bad, &defaults()).is_err());
        let bad = PartialConfig {
            grid_step: Some(0.0),
            ..Default::default()
        };
        assert!(matches!(
            RunConfig::resolve(bad, &defaults()),
            Err(CliError::Config(_))
        ));
        let cfg = RunConfig::resolve(PartialConfig::default(), &defaults()).unwrap();
        assert_eq!(cfg.t0_prime, 4.0);
        assert_eq!(cfg.grid.points(), [0.0, 0.5, 1.0]);
    }
}
