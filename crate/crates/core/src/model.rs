//! Physical parameters, derived dimensionless groups and regime tags.
//!
//! All rates are angular: Rabi frequencies in rad/s, decay rates in 1/s.

use core::f64::consts::TAU;

use crate::{Error, Result};

/// Drive and decay rates of the three-level atom.
///
/// Rabi frequencies are real and non-negative; any drive phase is absorbed
/// into the level basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Rabi frequency of the `|0⟩–|1⟩` drive, rad/s.
    pub omega1: f64,
    /// Rabi frequency of the `|0⟩–|2⟩` drive, rad/s.
    pub omega2: f64,
    /// Decay rate of the bright level `|1⟩`, 1/s.
    pub beta1: f64,
    /// Decay rate of the dark level `|2⟩`, 1/s.
    pub beta2: f64,
}

impl SystemParams {
    pub fn new(omega1: f64, omega2: f64, beta1: f64, beta2: f64) -> Result<Self> {
        let params = Self {
            omega1,
            omega2,
            beta1,
            beta2,
        };
        params.validate()?;
        Ok(params)
    }

    /// Drive frequencies given as `Ω/2π` in Hz; decay rates taken as 1/s.
    pub fn from_hertz(nu1: f64, nu2: f64, beta1: f64, beta2: f64) -> Result<Self> {
        Self::new(TAU * nu1, TAU * nu2, beta1, beta2)
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = |name, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and non-negative",
                })
            }
        };
        if !(self.beta1.is_finite() && self.beta1 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta1",
                value: self.beta1,
                reason: "must be finite and strictly positive",
            });
        }
        non_negative("omega1", self.omega1)?;
        non_negative("omega2", self.omega2)?;
        non_negative("beta2", self.beta2)
    }

    /// Multiplies every rate by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            omega1: self.omega1 * k,
            omega2: self.omega2 * k,
            beta1: self.beta1 * k,
            beta2: self.beta2 * k,
        }
    }

    /// `ε = Ω₁/β₁`.
    pub fn epsilon(&self) -> f64 {
        self.omega1 / self.beta1
    }

    /// Slow rate `β₂/4 + β₁ε²` of the dark-period envelopes.
    pub fn slow_rate(&self) -> f64 {
        self.beta2 / 4.0 + self.beta1 * self.epsilon() * self.epsilon()
    }

    /// Lifetime `1/β₁` of the bright level.
    pub fn bright_lifetime(&self) -> f64 {
        1.0 / self.beta1
    }

    /// Weak drive `Ω₂/β₁ = 1/48`, `ε = 1/24`, `β₂ = 0`, in units of `β₁`.
    pub fn figure2() -> Self {
        Self {
            omega1: 1.0 / 24.0,
            omega2: 1.0 / 48.0,
            beta1: 1.0,
            beta2: 0.0,
        }
    }

    /// `ε = 1/24`, `β₂ = 0` and `Ω₂` chosen so that `α = (η/2ε)² = 1/10`.
    pub fn figure3() -> Self {
        let epsilon = 1.0 / 24.0;
        let eta = 2.0 * epsilon * libm::sqrt(0.1);
        Self {
            omega1: epsilon,
            omega2: eta * epsilon,
            beta1: 1.0,
            beta2: 0.0,
        }
    }

    /// `Ω₁/2π = 1 MHz`, `Ω₂/2π = 20 kHz`, `β₁ = 48·10⁶ s⁻¹`, `β₂ = 0`.
    pub fn figure4() -> Self {
        Self {
            omega1: TAU * 1.0e6,
            omega2: TAU * 2.0e4,
            beta1: 4.8e7,
            beta2: 0.0,
        }
    }

    /// Crossover point `Ω₁ = β₁ = 10⁶ s⁻¹`, `Ω₂ = 0.2 Ω₁`, `β₂ = 0`.
    pub fn figure5() -> Self {
        Self {
            omega1: 1.0e6,
            omega2: 0.2e6,
            beta1: 1.0e6,
            beta2: 0.0,
        }
    }
}

/// Dimensionless groups that organize the asymptotic regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    /// `Ω₁/β₁`.
    pub epsilon: f64,
    /// `Ω₂/Ω₁`.
    pub eta: f64,
    /// `(η/2ε)²`, the weight of the extra-long dark component.
    pub alpha: f64,
    /// `β₂/4 + β₁ε²`, 1/s.
    pub beta_ell: f64,
}

impl DerivedRates {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        if params.omega1 == 0.0 {
            return Err(Error::EtaUndefined);
        }
        let epsilon = params.epsilon();
        let eta = params.omega2 / params.omega1;
        let half_ratio = eta / (2.0 * epsilon);
        Ok(Self {
            epsilon,
            eta,
            alpha: half_ratio * half_ratio,
            beta_ell: params.slow_rate(),
        })
    }
}

/// Shorthand for [`DerivedRates::new`].
pub fn derive_rates(params: &SystemParams) -> Result<DerivedRates> {
    DerivedRates::new(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeTag {
    Underdamped,
    Overdamped,
    Crossover,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Underdamped => "Underdamped",
            Self::Overdamped => "Overdamped",
            Self::Crossover => "Crossover",
        }
    }
}

impl core::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Boundaries for [`classify_regime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Overdamped below this margin.
    pub lower: f64,
    /// Underdamped above this margin.
    pub upper: f64,
    /// At or above this `ε` the small-drive expansion is abandoned and the
    /// tag is `Crossover` whatever the margin. `0.5` is where `4ε² = 1`.
    pub crossover_epsilon: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            lower: 0.25,
            upper: 4.0,
            crossover_epsilon: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `Ω₂²/β_ℓ²` (infinite when `β_ℓ = 0 < Ω₂`).
    pub margin: f64,
}

/// Tags the parameter point by comparing the weak Rabi frequency with the
/// slow rate.
pub fn classify_regime(params: &SystemParams, thresholds: &RegimeThresholds) -> Regime {
    let beta_ell = params.slow_rate();
    let margin = if beta_ell > 0.0 {
        let r = params.omega2 / beta_ell;
        r * r
    } else if params.omega2 > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let tag = if params.epsilon() >= thresholds.crossover_epsilon {
        RegimeTag::Crossover
    } else if margin > thresholds.upper {
        RegimeTag::Underdamped
    } else if margin < thresholds.lower {
        RegimeTag::Overdamped
    } else {
        RegimeTag::Crossover
    };
    Regime { tag, margin }
}
