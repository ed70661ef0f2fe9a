//! Closed-form amplitudes in the weak-drive regimes, the relative occupation
//! `Z`, the full-shelving time and analytic dark-period probabilities.
//!
//! These are leading-order expressions. Each evaluator records which of its
//! validity assumptions the parameters violate and logs them once at
//! construction; evaluation itself never fails on those grounds.

use alloc::vec::Vec;

use crate::model::{classify_regime, RegimeTag, RegimeThresholds, SystemParams};
use crate::propagator::{evolve_on_grid, AmplitudeState, Generator, DEFAULT_SCALED_STEP};
use crate::spectral::OverdampedRates;
use crate::{Error, Result};

/// Ratio used to decide that a stated `a ≪ b` or `a ≤ O(b)` no longer holds.
pub const ORDER_SLACK: f64 = 10.0;

/// A validity assumption of a closed form that the parameters break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// `Ω₂² ≫ β_ℓ²` does not hold.
    NotUnderdamped,
    /// `Ω₂² ≪ β_ℓ²` does not hold.
    NotOverdamped,
    /// `β₂ ≤ O(β₁ε²)` does not hold.
    DarkDecayAboveSlowRate,
    /// `β₂ ≪ β₁η²` does not hold.
    DarkDecayAboveExtraLongRate,
    /// `η²/4ε² ≪ 1` does not hold.
    AlphaNotSmall,
}

impl Assumption {
    pub fn describe(&self) -> &'static str {
        match self {
            Self::NotUnderdamped => "omega2^2 >> beta_ell^2 violated (not underdamped)",
            Self::NotOverdamped => "omega2^2 << beta_ell^2 violated (not overdamped)",
            Self::DarkDecayAboveSlowRate => "beta2 <= O(beta1 eps^2) violated",
            Self::DarkDecayAboveExtraLongRate => "beta2 << beta1 eta^2 violated",
            Self::AlphaNotSmall => "eta^2/(4 eps^2) << 1 violated",
        }
    }
}

fn report(form: &str, warnings: &[Assumption]) {
    for w in warnings {
        log::warn!("{form}: {}", w.describe());
    }
}

/// Post-reset and dark-period amplitudes for `Ω₂² ≫ β_ℓ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnderdampedForm {
    epsilon: f64,
    omega2: f64,
    beta1: f64,
    beta_ell: f64,
    pub warnings: Vec<Assumption>,
}

impl UnderdampedForm {
    pub fn new(params: &SystemParams, thresholds: &RegimeThresholds) -> Self {
        let epsilon = params.epsilon();
        let mut warnings = Vec::new();
        if classify_regime(params, thresholds).tag != RegimeTag::Underdamped {
            warnings.push(Assumption::NotUnderdamped);
        }
        if params.beta2 > ORDER_SLACK * params.beta1 * epsilon * epsilon {
            warnings.push(Assumption::DarkDecayAboveSlowRate);
        }
        report("underdamped closed form", &warnings);
        Self {
            epsilon,
            omega2: params.omega2,
            beta1: params.beta1,
            beta_ell: params.slow_rate(),
            warnings,
        }
    }

    /// Amplitudes at time `t` after a reset to `|0⟩`.
    pub fn after_reset(&self, t: f64) -> [f64; 3] {
        let slow = libm::exp(-self.beta_ell * t);
        let (cos, sin) = (libm::cos(self.omega2 * t), libm::sin(self.omega2 * t));
        let fast = libm::exp(-self.beta1 * t / 2.0);
        let two_eps = 2.0 * self.epsilon;
        [
            cos * slow,
            two_eps * fast - two_eps * cos * slow,
            -sin * slow,
        ]
    }

    /// Renormalization `f = 1/√(1 − 4ε²)` carried into the dark period.
    pub fn renormalization(&self) -> Result<f64> {
        let x = 1.0 - 4.0 * self.epsilon * self.epsilon;
        if x > 0.0 {
            Ok(1.0 / libm::sqrt(x))
        } else {
            Err(Error::OutsideValidity("4 eps^2 >= 1 leaves f undefined"))
        }
    }

    /// Amplitudes during a dark period that began at `onset`.
    pub fn dark(&self, t: f64, onset: f64) -> Result<[f64; 3]> {
        let f = self.renormalization()?;
        if t < onset {
            return Err(Error::OutsideValidity(
                "dark-period form requires t >= onset",
            ));
        }
        let envelope = f * libm::exp(-self.beta_ell * (t - onset));
        let (cos, sin) = (libm::cos(self.omega2 * t), libm::sin(self.omega2 * t));
        Ok([
            cos * envelope,
            -2.0 * self.epsilon * cos * envelope,
            -sin * envelope,
        ])
    }
}

/// Dark and extra-long dark amplitudes for `Ω₂² ≪ β_ℓ²`.
///
/// Time is measured from the dark-period onset, where `c0 = 1 − α` and
/// `c2 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverdampedForm {
    epsilon: f64,
    eta: f64,
    alpha: f64,
    pub rates: OverdampedRates,
    pub warnings: Vec<Assumption>,
}

impl OverdampedForm {
    pub fn new(params: &SystemParams, thresholds: &RegimeThresholds) -> Result<Self> {
        if params.omega1 == 0.0 {
            return Err(Error::EtaUndefined);
        }
        let epsilon = params.epsilon();
        let eta = params.omega2 / params.omega1;
        let alpha = (eta / (2.0 * epsilon)) * (eta / (2.0 * epsilon));
        if !(alpha < 1.0) {
            return Err(Error::OutsideValidity(
                "alpha = eta^2/(4 eps^2) must be < 1",
            ));
        }
        let mut warnings = Vec::new();
        if classify_regime(params, thresholds).tag != RegimeTag::Overdamped {
            warnings.push(Assumption::NotOverdamped);
        }
        if alpha * ORDER_SLACK > 1.0 {
            warnings.push(Assumption::AlphaNotSmall);
        }
        if params.beta2 * ORDER_SLACK > params.beta1 * eta * eta {
            warnings.push(Assumption::DarkDecayAboveExtraLongRate);
        }
        report("overdamped closed form", &warnings);
        Ok(Self {
            epsilon,
            eta,
            alpha,
            rates: OverdampedRates::new(params)?,
            warnings,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Two-exponential amplitudes during an ordinary dark period.
    pub fn dark(&self, t: f64) -> [f64; 3] {
        let e2 = libm::exp(self.rates.lambda2 * t);
        let e3 = libm::exp(self.rates.lambda3 * t);
        let (eps, eta) = (self.epsilon, self.eta);
        [
            e2 - self.alpha * e3,
            -2.0 * eps * e2 + eta * eta / (2.0 * eps) * e3,
            eta / (2.0 * eps) * (e2 - e3),
        ]
    }

    /// Unnormalized amplitudes once only the extra-long mode survives.
    pub fn extralong(&self, t: f64) -> [f64; 3] {
        let e3 = libm::exp(self.rates.lambda3 * t);
        [-self.eta / (2.0 * self.epsilon) * e3, self.eta * e3, -e3]
    }

    /// Conditioned occupation of `|2⟩` along the extra-long direction,
    /// `1/(1 + η² + η²/4ε²)`.
    pub fn extralong_dark_occupation(&self) -> f64 {
        1.0 / (1.0 + self.eta * self.eta + self.alpha)
    }

    /// The time `t₂` where `c0` of [`Self::dark`] vanishes and `Z = 1`.
    pub fn full_shelving_time(&self) -> Result<f64> {
        let gap = self.rates.lambda3 - self.rates.lambda2;
        if !(self.alpha > 0.0) || !(gap > 0.0) {
            return Err(Error::OutsideValidity("c0 has no zero crossing"));
        }
        // e^{λ₂t} = α e^{λ₃t}
        Ok(libm::log(self.alpha) / (self.rates.lambda2 - self.rates.lambda3))
    }

    /// `lim Z = (1 − α)/(1 + α)` of [`Self::dark`].
    pub fn late_time_z(&self) -> f64 {
        (1.0 - self.alpha) / (1.0 + self.alpha)
    }

    /// Leading-order form `1 − η²/2ε² = 1 − 2α`.
    pub fn late_time_z_leading(&self) -> f64 {
        1.0 - 2.0 * self.alpha
    }
}

/// `Z = (c2² − c0²)/(c2² + c0²)`.
pub fn relative_occupation(c0: f64, c2: f64) -> Result<f64> {
    let (a, b) = (c0 * c0, c2 * c2);
    if a + b == 0.0 {
        return Err(Error::UndefinedOccupation);
    }
    Ok((b - a) / (b + a))
}

/// Analytic probabilities for the extra-long dark period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtraLongPrediction {
    /// `η²/4ε²`.
    pub probability: f64,
    /// `2/(η²β₁)`, s.
    pub t3: f64,
    /// `β₂/(β₂ + β₁η²)`: the next photon comes from `|2⟩`.
    pub p_end_dark: f64,
    /// `β₂/(β₁η²)`, the leading-order form of `p_end_dark`.
    pub p_end_dark_leading: f64,
}

/// Cycle-averaged terminal channel rates of an underdamped dark period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSplit {
    /// `⟨β₁c1²⟩ = 2β₁ε²f²`, 1/s.
    pub bright_rate: f64,
    /// `⟨β₂c2²⟩ = β₂f²/2`, 1/s.
    pub dark_rate: f64,
    /// `bright_rate / (bright_rate + dark_rate)`.
    pub bright_fraction: f64,
    /// The `β₂ = 4β₁ε²` at which the two rates are equal.
    pub balanced_beta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkPeriodPredictions {
    /// Dark-period onset `t₀′`, s.
    pub onset: f64,
    /// `W(t₀′)` from the numeric propagator.
    pub p_dark_after_reset: f64,
    /// `(1 − W(t₀′))/ε²`, the measured coefficient of the `O(ε²)` deficit.
    pub dark_deficit_coefficient: Option<f64>,
    pub extralong: Option<ExtraLongPrediction>,
    pub channel_split: Option<ChannelSplit>,
}

/// Collects the analytic dark-period probabilities for `params`.
pub fn dark_period_predictions(params: &SystemParams, onset: f64) -> Result<DarkPeriodPredictions> {
    params.validate()?;
    let gen = Generator::new(params);
    let w = evolve_on_grid(
        &AmplitudeState::reset(),
        &gen,
        DEFAULT_SCALED_STEP / params.beta1,
        &[onset],
    )?[0]
        .survival();
    let eps = params.epsilon();
    let extralong = (params.omega1 > 0.0).then(|| {
        let eta = params.omega2 / params.omega1;
        let floor = params.beta1 * eta * eta;
        ExtraLongPrediction {
            probability: (eta / (2.0 * eps)) * (eta / (2.0 * eps)),
            t3: 2.0 / floor,
            p_end_dark: if params.beta2 > 0.0 {
                params.beta2 / (params.beta2 + floor)
            } else {
                0.0
            },
            p_end_dark_leading: params.beta2 / floor,
        }
    });
    let channel_split = (4.0 * eps * eps < 1.0).then(|| {
        let f2 = 1.0 / (1.0 - 4.0 * eps * eps);
        let bright_rate = 2.0 * params.beta1 * eps * eps * f2;
        let dark_rate = params.beta2 * f2 / 2.0;
        let total = bright_rate + dark_rate;
        ChannelSplit {
            bright_rate,
            dark_rate,
            bright_fraction: if total > 0.0 {
                bright_rate / total
            } else {
                f64::NAN
            },
            balanced_beta2: 4.0 * params.beta1 * eps * eps,
        }
    });
    Ok(DarkPeriodPredictions {
        onset,
        p_dark_after_reset: w,
        dark_deficit_coefficient: (eps > 0.0).then(|| (1.0 - w) / (eps * eps)),
        extralong,
        channel_split,
    })
}

/// One sample of a closed-form (or numeric) curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub t: f64,
    pub c: [f64; 3],
    pub w: f64,
    /// `None` where `c0 = c2 = 0`.
    pub z: Option<f64>,
    /// `c1²/4ε²`.
    pub pbar10: f64,
    /// `c2²`.
    pub p20: f64,
}

impl CurveRow {
    pub fn new(t: f64, c: [f64; 3], epsilon: f64) -> Self {
        Self {
            t,
            c,
            w: c[0] * c[0] + c[1] * c[1] + c[2] * c[2],
            z: relative_occupation(c[0], c[2]).ok(),
            pbar10: c[1] * c[1] / (4.0 * epsilon * epsilon),
            p20: c[2] * c[2],
        }
    }
}

/// A sampled table together with the name of the form that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCurves {
    pub label: &'static str,
    pub rows: Vec<CurveRow>,
}

impl RegimeCurves {
    pub fn sample(
        label: &'static str,
        times: &[f64],
        epsilon: f64,
        mut amplitudes: impl FnMut(f64) -> [f64; 3],
    ) -> Self {
        Self {
            label,
            rows: times
                .iter()
                .map(|&t| CurveRow::new(t, amplitudes(t), epsilon))
                .collect(),
        }
    }
}
