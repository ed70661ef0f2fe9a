//! Monte Carlo photon records.
//!
//! The survival probability `W(t)` of the conditional state is the survival
//! function of the waiting time to the next photon, so a waiting time is
//! sampled by solving `W(t) = u` for uniform `u`. The channel is then picked
//! in proportion to the emission rates `β₁c1²` and `β₂c2²`, and the atom
//! restarts from `|0⟩`. Every jump resets to the ground state, so intervals
//! are independent and identically distributed.

use alloc::vec::Vec;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, Mat3};
use crate::model::SystemParams;
use crate::propagator::{
    emission_rates, rk4_step, AmplitudeState, Generator, StepMatrix, DEFAULT_ONSET_TAU,
    DEFAULT_SCALED_STEP, MAX_SCALED_STEP,
};
use crate::spectral::{exact_eigenvalues, OverdampedRates};
use crate::{Error, Result};

/// Tolerance on `|W(t_jump) − u|`.
pub const TOL_WAITING_TIME: f64 = 1e-6;
/// Bisection iterations inside the bracketing step.
pub const BISECTION_ITERATIONS: u32 = 20;
/// Steps skipped at once while scanning for the crossing.
const SCAN_BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// `|1⟩ → |0⟩`.
    Bright,
    /// `|2⟩ → |0⟩`.
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonEvent {
    pub time: f64,
    pub channel: Channel,
}

/// Emission times and channels of one simulated run on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonRecord {
    pub events: Vec<PhotonEvent>,
    pub horizon: f64,
    pub seed: u64,
    pub stream: u64,
}

/// A completed inter-jump interval and the channel that ended it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub length: f64,
    pub channel: Channel,
}

impl PhotonRecord {
    /// Gaps between consecutive events, starting with the gap from `t = 0`.
    /// The open interval after the last event is not included.
    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        let starts = core::iter::once(0.0).chain(self.events.iter().map(|e| e.time));
        starts.zip(&self.events).map(|(start, e)| Interval {
            length: e.time - start,
            channel: e.channel,
        })
    }

    /// Length of the censored interval from the last event to the horizon.
    pub fn censored_tail(&self) -> f64 {
        self.horizon - self.events.last().map_or(0.0, |e| e.time)
    }
}

/// Outcome of a waiting-time draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaitingTime {
    /// A photon is emitted at `state.t`; `state` is the unnormalized
    /// amplitude just before the jump.
    Jump { state: AmplitudeState },
    /// `W` stayed above `u` up to the maximum wait.
    Censored { until: f64 },
}

/// Inverts `W(t) = u` by fixed-step RK4 and bisection in the bracketing step.
#[derive(Debug, Clone)]
pub struct WaitingTimeSampler {
    gen: Generator,
    step: StepMatrix,
    block: Mat3,
    max_wait: f64,
}

impl WaitingTimeSampler {
    /// `dt` is the integrator step; the default maximum wait covers the
    /// slowest mode's decay to below `e^{-50}`.
    pub fn new(params: &SystemParams, dt: f64) -> Result<Self> {
        params.validate()?;
        let scaled = dt * params.beta1;
        if !(dt > 0.0) || scaled > MAX_SCALED_STEP {
            return Err(Error::StepTooLarge {
                scaled_dt: scaled,
                limit: MAX_SCALED_STEP,
            });
        }
        let gen = Generator::new(params);
        let step = StepMatrix::rk4(&gen, dt);
        let mut block = linalg::IDENTITY;
        for _ in 0..SCAN_BLOCK {
            block = linalg::mat_mul(&step.matrix(), &block);
        }
        let slowest = exact_eigenvalues(params).slowest().re.abs();
        let max_wait = if slowest > 0.0 {
            25.0 / slowest
        } else {
            1.0e3 / params.beta1
        };
        Ok(Self {
            gen,
            step,
            block,
            max_wait,
        })
    }

    pub fn with_default_step(params: &SystemParams) -> Result<Self> {
        Self::new(params, DEFAULT_SCALED_STEP / params.beta1)
    }

    pub fn with_max_wait(mut self, max_wait: f64) -> Self {
        self.max_wait = max_wait;
        self
    }

    pub fn max_wait(&self) -> f64 {
        self.max_wait
    }

    pub fn dt(&self) -> f64 {
        self.step.dt()
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    /// Waiting time from `state0` (which must have unit survival) for the
    /// uniform draw `u ∈ (0, 1)`.
    pub fn sample(&self, state0: &AmplitudeState, u: f64) -> Result<WaitingTime> {
        let w0 = state0.survival();
        if (w0 - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(w0));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidParameter {
                name: "u",
                value: u,
                reason: "must lie in (0, 1)",
            });
        }
        self.sample_within(state0, u, self.max_wait)
    }

    fn sample_within(&self, state0: &AmplitudeState, u: f64, max_wait: f64) -> Result<WaitingTime> {
        let dt = self.step.dt();
        let max_steps = libm::ceil(max_wait / dt) as usize;
        let norm = |c: &[f64; 3]| linalg::dot(c, c);
        let mut c = state0.amplitudes();
        let mut n = 0usize;
        // Coarse scan; W is non-increasing so a block that stays above u
        // contains no crossing.
        while n + SCAN_BLOCK <= max_steps {
            let next = linalg::mat_vec(&self.block, &c);
            if norm(&next) <= u {
                break;
            }
            c = next;
            n += SCAN_BLOCK;
        }
        while n < max_steps {
            let next = self.step.apply(&c);
            if norm(&next) <= u {
                let (s, amps) = self.bisect(&c, u, dt);
                let t = state0.t + n as f64 * dt + s;
                return Ok(WaitingTime::Jump {
                    state: AmplitudeState::from_array(amps, t),
                });
            }
            c = next;
            n += 1;
        }
        Ok(WaitingTime::Censored {
            until: state0.t + max_steps as f64 * dt,
        })
    }

    /// Finds `s ∈ (0, dt]` with `W(rk4(c, s)) ≈ u`.
    fn bisect(&self, c: &[f64; 3], u: f64, dt: f64) -> (f64, [f64; 3]) {
        let (mut lo, mut hi) = (0.0, dt);
        for _ in 0..BISECTION_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            let x = rk4_step(&self.gen, c, mid);
            if linalg::dot(&x, &x) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        (s, rk4_step(&self.gen, c, s))
    }
}

/// Picks the emitting level with probability proportional to its rate.
pub fn select_channel(state: &AmplitudeState, params: &SystemParams, u2: f64) -> Result<Channel> {
    let (bright, dark) = emission_rates(state, params);
    let total = bright + dark;
    if !(total > 0.0) {
        return Err(Error::ZeroEmissionRate);
    }
    Ok(if u2 * total < bright {
        Channel::Bright
    } else {
        Channel::Dark
    })
}

/// Per-record random stream: ChaCha8 keyed by the master seed, with the
/// record index as the stream id.
pub fn record_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates photon records and first-jump samples for one parameter set.
#[derive(Debug, Clone)]
pub struct RecordSimulator {
    params: SystemParams,
    sampler: WaitingTimeSampler,
    undriven: bool,
}

impl RecordSimulator {
    pub fn new(params: &SystemParams, dt: f64) -> Result<Self> {
        Ok(Self {
            params: *params,
            sampler: WaitingTimeSampler::new(params, dt)?,
            undriven: params.omega1 == 0.0 && params.omega2 == 0.0,
        })
    }

    pub fn with_default_step(params: &SystemParams) -> Result<Self> {
        Self::new(params, DEFAULT_SCALED_STEP / params.beta1)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn sampler(&self) -> &WaitingTimeSampler {
        &self.sampler
    }

    /// Jump, select, reset until `horizon`. Deterministic in
    /// `(params, dt, horizon, seed, stream)`.
    pub fn record(&self, horizon: f64, seed: u64, stream: u64) -> Result<PhotonRecord> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
                reason: "must be positive",
            });
        }
        let mut record = PhotonRecord {
            events: Vec::new(),
            horizon,
            seed,
            stream,
        };
        // Nothing ever leaves |0⟩ without drive.
        if self.undriven {
            return Ok(record);
        }
        let mut rng = record_rng(seed, stream);
        let mut now = 0.0;
        loop {
            let u: f64 = rng.sample(Open01);
            let start = AmplitudeState::reset();
            match self.sampler.sample_within(&start, u, horizon - now)? {
                WaitingTime::Jump { state } if now + state.t <= horizon => {
                    let u2: f64 = rng.sample(Open01);
                    now += state.t;
                    record.events.push(PhotonEvent {
                        time: now,
                        channel: select_channel(&state, &self.params, u2)?,
                    });
                }
                _ => break,
            }
        }
        Ok(record)
    }

    /// `n` independent first-jump draws from the reset state. Censored
    /// draws are returned as `None`.
    pub fn first_jumps(
        &self,
        n: usize,
        seed: u64,
        stream: u64,
    ) -> Result<Vec<Option<(f64, Channel)>>> {
        let mut rng = record_rng(seed, stream);
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                let u2: f64 = rng.sample(Open01);
                match self.sampler.sample(&AmplitudeState::reset(), u)? {
                    WaitingTime::Jump { state } => {
                        Ok(Some((state.t, select_channel(&state, &self.params, u2)?)))
                    }
                    WaitingTime::Censored { .. } => Ok(None),
                }
            })
            .collect()
    }
}

/// Convenience wrapper around [`RecordSimulator::record`] with the default step.
pub fn simulate_record(params: &SystemParams, horizon: f64, seed: u64) -> Result<PhotonRecord> {
    RecordSimulator::with_default_step(params)?.record(horizon, seed, 0)
}

/// Interval classes: ordinary dark periods are longer than `onset`,
/// extra-long ones longer than `extralong`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalThresholds {
    pub onset: f64,
    pub extralong: f64,
}

impl IntervalThresholds {
    /// `4/β₁` and `1/|λ₃|` with `λ₃ = −η²β₁/2` (infinite when `λ₃ = 0`).
    pub fn defaults(params: &SystemParams) -> Self {
        let extralong = OverdampedRates::new(params)
            .ok()
            .map(|r| r.lambda3)
            .filter(|l| *l != 0.0)
            .map_or(f64::INFINITY, |l| 1.0 / l.abs());
        Self {
            onset: DEFAULT_ONSET_TAU / params.beta1,
            extralong,
        }
    }
}

/// Logarithmically spaced bins on `[lo, hi]`. Values outside are clamped
/// into the first or last bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LogBins {
    pub fn edges(&self) -> Vec<f64> {
        let (a, b) = (libm::log(self.lo), libm::log(self.hi));
        (0..=self.count)
            .map(|k| libm::exp(a + (b - a) * k as f64 / self.count as f64))
            .collect()
    }

    pub fn index(&self, x: f64) -> usize {
        if !(x > self.lo) {
            return 0;
        }
        let (a, b) = (libm::log(self.lo), libm::log(self.hi));
        let k = ((libm::log(x) - a) / (b - a) * self.count as f64) as usize;
        k.min(self.count - 1)
    }

    /// `count` bins from `1e-2/β₁` to `1e4` times the slowest lifetime.
    pub fn defaults(params: &SystemParams, count: usize) -> Self {
        let slowest = exact_eigenvalues(params).slowest().re.abs();
        let hi = if slowest > 0.0 {
            50.0 / slowest
        } else {
            1.0e4 / params.beta1
        };
        Self {
            lo: 0.01 / params.beta1,
            hi: hi.max(1.0 / params.beta1),
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub bright: Vec<u64>,
    pub dark: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChannelCounts {
    pub bright: u64,
    pub dark: u64,
}

impl ChannelCounts {
    pub fn add(&mut self, channel: Channel) {
        match channel {
            Channel::Bright => self.bright += 1,
            Channel::Dark => self.dark += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.bright + self.dark
    }

    pub fn bright_fraction(&self) -> Fraction {
        Fraction::new(self.bright, self.total())
    }
}

/// An estimated probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fraction {
    pub count: u64,
    pub n: u64,
    pub value: f64,
    /// `√(p̂(1−p̂)/n)`.
    pub std_error: f64,
}

impl Fraction {
    pub fn new(count: u64, n: u64) -> Self {
        let value = if n > 0 {
            count as f64 / n as f64
        } else {
            f64::NAN
        };
        Self {
            count,
            n,
            value,
            std_error: libm::sqrt(value * (1.0 - value) / n as f64),
        }
    }

    /// `|p̂ − p| / SE`.
    pub fn z_score(&self, p: f64) -> f64 {
        (self.value - p).abs() / self.std_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkStats {
    pub n_intervals: u64,
    /// Records whose open tail after the last event was dropped.
    pub n_censored: u64,
    pub histogram: Histogram,
    pub fraction_dark: Fraction,
    pub fraction_extralong: Fraction,
    pub channels_all: ChannelCounts,
    pub channels_dark: ChannelCounts,
    pub channels_extralong: ChannelCounts,
}

/// Aggregates completed intervals over `records`. Counts are integers, so
/// the result does not depend on the order in which records were produced.
pub fn dark_stats(
    records: &[PhotonRecord],
    thresholds: &IntervalThresholds,
    bins: &LogBins,
) -> Result<DarkStats> {
    let mut histogram = Histogram {
        edges: bins.edges(),
        counts: alloc::vec![0; bins.count],
        bright: alloc::vec![0; bins.count],
        dark: alloc::vec![0; bins.count],
    };
    let (mut n, mut n_dark, mut n_long) = (0u64, 0u64, 0u64);
    let mut channels_all = ChannelCounts::default();
    let mut channels_dark = ChannelCounts::default();
    let mut channels_extralong = ChannelCounts::default();
    for interval in records.iter().flat_map(|r| r.intervals()) {
        n += 1;
        let k = bins.index(interval.length);
        histogram.counts[k] += 1;
        match interval.channel {
            Channel::Bright => histogram.bright[k] += 1,
            Channel::Dark => histogram.dark[k] += 1,
        }
        channels_all.add(interval.channel);
        if interval.length > thresholds.onset {
            n_dark += 1;
            channels_dark.add(interval.channel);
        }
        if interval.length > thresholds.extralong {
            n_long += 1;
            channels_extralong.add(interval.channel);
        }
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(DarkStats {
        n_intervals: n,
        n_censored: records.iter().filter(|r| r.censored_tail() > 0.0).count() as u64,
        histogram,
        fraction_dark: Fraction::new(n_dark, n),
        fraction_extralong: Fraction::new(n_long, n),
        channels_all,
        channels_dark,
        channels_extralong,
    })
}

/// Terminal channels of intervals whose length lies in `(lo, hi]`.
pub fn channels_in_window(records: &[PhotonRecord], lo: f64, hi: f64) -> ChannelCounts {
    let mut counts = ChannelCounts::default();
    records
        .iter()
        .flat_map(|r| r.intervals())
        .filter(|i| i.length > lo && i.length <= hi)
        .for_each(|i| counts.add(i.channel));
    counts
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sorted` and
/// `cdf`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value `√(−ln(a/2)/2)/√n` at level `a`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    libm::sqrt(-libm::log(level / 2.0) / 2.0) / libm::sqrt(n as f64)
}
