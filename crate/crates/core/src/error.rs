use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("eta = omega2/omega1 is undefined for omega1 = 0")]
    EtaUndefined,
    #[error("step size dt*beta1 = {scaled_dt} exceeds {limit}; reduce dt")]
    StepTooLarge { scaled_dt: f64, limit: f64 },
    #[error("survival probability is zero; cannot condition on null emission")]
    ZeroSurvival,
    #[error("state is not normalized (W = {0}); condition it before sampling")]
    NotNormalized(f64),
    #[error("total emission rate is zero at the jump state")]
    ZeroEmissionRate,
    #[error("Z is undefined for c0 = c2 = 0")]
    UndefinedOccupation,
    #[error("closed form invalid: {0}")]
    OutsideValidity(&'static str),
    #[error("no intervals to aggregate")]
    EmptyInput,
}
