//! Conditional no-jump evolution of the amplitudes `(c0, c1, c2)`.
//!
//! With zero detuning and real Rabi frequencies the equations of motion are
//! a real, constant-coefficient linear system
//!
//! ```text
//! dc0/dt =  Ω₁ c1 + Ω₂ c2
//! dc1/dt = -Ω₁ c0 - (β₁/2) c1
//! dc2/dt = -Ω₂ c0 - (β₂/2) c2
//! ```
//!
//! whose squared norm `W = c0² + c1² + c2²` obeys
//! `dW/dt = -(β₁c1² + β₂c2²)`.

use alloc::vec::Vec;

use crate::linalg::{self, Mat3, Vec3};
use crate::model::SystemParams;
use crate::{Error, Result};

/// Largest `dt·β₁` accepted by [`evolve`].
pub const MAX_SCALED_STEP: f64 = 0.1;
/// Default `dt·β₁` for fixed-step integration.
pub const DEFAULT_SCALED_STEP: f64 = 0.01;
/// Norm slack per unit `τ = β₁t`.
pub const TOL_NORM: f64 = 1e-9;
/// Relative per-step slack of the dissipation identity.
pub const TOL_CONS: f64 = 1e-8;
/// Default dark-period onset in units of `1/β₁`.
pub const DEFAULT_ONSET_TAU: f64 = 4.0;

/// Joint amplitude of each level and of no emission since the last reset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Time since the last reset, s.
    pub t: f64,
}

impl AmplitudeState {
    pub fn reset() -> Self {
        Self {
            c0: 1.0,
            c1: 0.0,
            c2: 0.0,
            t: 0.0,
        }
    }

    pub fn from_array(c: [f64; 3], t: f64) -> Self {
        Self {
            c0: c[0],
            c1: c[1],
            c2: c[2],
            t,
        }
    }

    pub fn amplitudes(&self) -> [f64; 3] {
        [self.c0, self.c1, self.c2]
    }

    /// Probability that no photon has been emitted, `c0² + c1² + c2²`.
    pub fn survival(&self) -> f64 {
        let c = self.amplitudes();
        linalg::dot(&c, &c)
    }

    /// Same state with every amplitude multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            c0: a * self.c0,
            c1: a * self.c1,
            c2: a * self.c2,
            t: self.t,
        }
    }

    /// Angle between the amplitude directions of `self` and `other`,
    /// ignoring overall sign and scale.
    pub fn angle_to(&self, other: &[f64; 3]) -> f64 {
        linalg::line_angle(&self.amplitudes(), other)
    }
}

/// Free function form of [`AmplitudeState::survival`].
pub fn survival(state: &AmplitudeState) -> f64 {
    state.survival()
}

/// Photon emission rates `(β₁c1², β₂c2²)` from `|1⟩` and `|2⟩`, 1/s.
pub fn emission_rates(state: &AmplitudeState, params: &SystemParams) -> (f64, f64) {
    (
        params.beta1 * state.c1 * state.c1,
        params.beta2 * state.c2 * state.c2,
    )
}

/// Renormalizes the state after an observed emission-free interval.
///
/// The output has unit survival and the same `t`.
pub fn condition_on_no_jump(state: &AmplitudeState) -> Result<AmplitudeState> {
    let w = state.survival();
    if !(w > 0.0) {
        return Err(Error::ZeroSurvival);
    }
    Ok(state.scaled(1.0 / libm::sqrt(w)))
}

/// The 3×3 real matrix `A` with `dc/dt = A c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    matrix: Mat3,
    params: SystemParams,
}

impl Generator {
    pub fn new(params: &SystemParams) -> Self {
        let SystemParams {
            omega1,
            omega2,
            beta1,
            beta2,
        } = *params;
        Self {
            matrix: [
                [0.0, omega1, omega2],
                [-omega1, -beta1 / 2.0, 0.0],
                [-omega2, 0.0, -beta2 / 2.0],
            ],
            params: *params,
        }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.matrix
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// `A c`.
    #[inline]
    pub fn apply(&self, c: &[f64; 3]) -> [f64; 3] {
        linalg::mat_vec(&self.matrix, c)
    }

    /// `exp(A t)` by scaling and squaring.
    pub fn exp(&self, t: f64) -> [[f64; 3]; 3] {
        linalg::expm(&linalg::mat_scale(&self.matrix, t))
    }

    /// Time derivative of the total emission rate `β₁c1² + β₂c2²`.
    pub fn emission_rate_derivative(&self, c: &[f64; 3]) -> f64 {
        let d = self.apply(c);
        2.0 * (self.params.beta1 * c[1] * d[1] + self.params.beta2 * c[2] * d[2])
    }

    fn total_emission_rate(&self, c: &[f64; 3]) -> f64 {
        self.params.beta1 * c[1] * c[1] + self.params.beta2 * c[2] * c[2]
    }
}

/// Shorthand for [`Generator::new`].
pub fn build_generator(params: &SystemParams) -> Generator {
    Generator::new(params)
}

/// One classical fourth-order Runge–Kutta step of `dc/dt = A c`.
pub fn rk4_step(gen: &Generator, c: &[f64; 3], dt: f64) -> [f64; 3] {
    let axpy = |a: f64, x: &Vec3, y: &Vec3| [y[0] + a * x[0], y[1] + a * x[1], y[2] + a * x[2]];
    let k1 = gen.apply(c);
    let k2 = gen.apply(&axpy(dt / 2.0, &k1, c));
    let k3 = gen.apply(&axpy(dt / 2.0, &k2, c));
    let k4 = gen.apply(&axpy(dt, &k3, c));
    let mut out = *c;
    for i in 0..3 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// A fixed-step propagator `c(t + dt) = P c(t)`.
///
/// Because the system is linear, an RK4 step is itself a matrix; building it
/// once turns each step into a single 3×3 product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMatrix {
    matrix: Mat3,
    dt: f64,
}

impl StepMatrix {
    /// The RK4 step of size `dt`, built column by column from [`rk4_step`].
    pub fn rk4(gen: &Generator, dt: f64) -> Self {
        let mut matrix = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let col = rk4_step(gen, &e, dt);
            for i in 0..3 {
                matrix[i][j] = col[i];
            }
        }
        Self { matrix, dt }
    }

    /// The exact propagator `exp(A dt)`.
    pub fn exact(gen: &Generator, dt: f64) -> Self {
        Self {
            matrix: gen.exp(dt),
            dt,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.matrix
    }

    #[inline]
    pub fn apply(&self, c: &[f64; 3]) -> [f64; 3] {
        linalg::mat_vec(&self.matrix, c)
    }
}

fn check_step(gen: &Generator, dt: f64) -> Result<()> {
    let scaled_dt = dt * gen.params.beta1;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be finite and positive",
        });
    }
    if scaled_dt > MAX_SCALED_STEP {
        return Err(Error::StepTooLarge {
            scaled_dt,
            limit: MAX_SCALED_STEP,
        });
    }
    Ok(())
}

/// Fixed-step RK4 evolution; returns `n_steps + 1` states including `state`.
pub fn evolve(
    state: &AmplitudeState,
    gen: &Generator,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<AmplitudeState>> {
    check_step(gen, dt)?;
    let step = StepMatrix::rk4(gen, dt);
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(*state);
    let mut c = state.amplitudes();
    for k in 1..=n_steps {
        c = step.apply(&c);
        out.push(AmplitudeState::from_array(c, state.t + k as f64 * dt));
    }
    Ok(out)
}

/// Evolves `state` onto each time in `times` (ascending, none before
/// `state.t`), subdividing each gap into equal RK4 steps no longer than
/// `max_dt`.
pub fn evolve_on_grid(
    state: &AmplitudeState,
    gen: &Generator,
    max_dt: f64,
    times: &[f64],
) -> Result<Vec<AmplitudeState>> {
    check_step(gen, max_dt)?;
    let mut out = Vec::with_capacity(times.len());
    let mut current = *state;
    let mut cached: Option<StepMatrix> = None;
    for &t in times {
        let gap = t - current.t;
        if gap < 0.0 {
            return Err(Error::InvalidParameter {
                name: "time grid",
                value: t,
                reason: "times must be ascending and not before the initial state",
            });
        }
        if gap > 0.0 {
            let n = libm::ceil(gap / max_dt * (1.0 - 1e-12)).max(1.0) as usize;
            let h = gap / n as f64;
            let step = match cached {
                Some(s) if s.dt() == h => s,
                _ => StepMatrix::rk4(gen, h),
            };
            cached = Some(step);
            let mut c = current.amplitudes();
            for _ in 0..n {
                c = step.apply(&c);
            }
            current = AmplitudeState::from_array(c, t);
        }
        out.push(current);
    }
    Ok(out)
}

/// Exact evolution `exp(A (t - state.t)) c` onto each time in `times`.
pub fn evolve_exact_on_grid(
    state: &AmplitudeState,
    gen: &Generator,
    times: &[f64],
) -> Vec<AmplitudeState> {
    let c = state.amplitudes();
    times
        .iter()
        .map(|&t| AmplitudeState::from_array(linalg::mat_vec(&gen.exp(t - state.t), &c), t))
        .collect()
}

/// Probability emitted between two states one step apart, `∫(β₁c1²+β₂c2²)dt`.
///
/// Uses the endpoint-corrected trapezoid rule
/// `h/2 (r₀ + r₁) + h²/12 (r₀' − r₁')`, which is fourth order like RK4.
pub fn emitted_probability(gen: &Generator, from: &AmplitudeState, to: &AmplitudeState) -> f64 {
    let h = to.t - from.t;
    let (a, b) = (from.amplitudes(), to.amplitudes());
    let (r0, r1) = (gen.total_emission_rate(&a), gen.total_emission_rate(&b));
    let (d0, d1) = (
        gen.emission_rate_derivative(&a),
        gen.emission_rate_derivative(&b),
    );
    h / 2.0 * (r0 + r1) + h * h / 12.0 * (d0 - d1)
}

/// Worst relative violation of `ΔW + ∫(β₁c1²+β₂c2²)dt = 0` along a
/// trajectory, each step's residual divided by `β₁·dt·W(t)`.
pub fn max_dissipation_residual(gen: &Generator, trajectory: &[AmplitudeState]) -> f64 {
    trajectory
        .windows(2)
        .map(|w| {
            let residual =
                w[1].survival() - w[0].survival() + emitted_probability(gen, &w[0], &w[1]);
            let scale = gen.params.beta1 * (w[1].t - w[0].t) * w[0].survival();
            residual.abs() / scale
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn generator_layout() {
        let p = SystemParams::new(0.0, 0.0, 2.0, 4.0).unwrap();
        assert_eq!(
            Generator::new(&p).matrix(),
            [[0.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -2.0]]
        );
        let a = Generator::new(&SystemParams::figure2()).matrix();
        assert_eq!(a[0][1], 1.0 / 24.0);
        assert_eq!(a[1][0], -1.0 / 24.0);
        assert_eq!(a[0][2], 1.0 / 48.0);
        assert_eq!(a[2][0], -1.0 / 48.0);
        assert_eq!(a[1][1], -0.5);
        assert_eq!(a[2][2], 0.0);
        assert_eq!(a[0][0], 0.0);
        assert_eq!((a[1][2], a[2][1]), (0.0, 0.0));
    }

    #[test]
    fn undriven_ground_state_is_stationary() {
        let p = SystemParams::new(0.0, 0.0, 1.0, 0.3).unwrap();
        let traj = evolve(&AmplitudeState::reset(), &Generator::new(&p), 0.01, 1000).unwrap();
        assert_eq!(traj.len(), 1001);
        assert!(traj.iter().all(|s| s.c0 == 1.0 && s.survival() == 1.0));
        assert_relative_eq!(traj[1000].t, 10.0, max_relative = 1e-15);
    }

    #[test]
    fn step_guard() {
        let gen = Generator::new(&SystemParams::figure2());
        assert!(matches!(
            evolve(&AmplitudeState::reset(), &gen, 0.2, 1),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(evolve(&AmplitudeState::reset(), &gen, 0.1, 1).is_ok());
        assert!(evolve(&AmplitudeState::reset(), &gen, -0.01, 1).is_err());
    }

    #[test]
    fn rk4_matrix_matches_stagewise_step() {
        let gen = Generator::new(&SystemParams::figure4());
        let dt = 0.01 / 4.8e7;
        let step = StepMatrix::rk4(&gen, dt);
        let c = [0.3, -0.2, 0.9];
        let (a, b) = (step.apply(&c), rk4_step(&gen, &c, dt));
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn rk4_and_exact_agree() {
        let gen = Generator::new(&SystemParams::figure2());
        let times: Vec<f64> = (0..=40).map(|k| 5.0 * k as f64).collect();
        let rk = evolve_on_grid(&AmplitudeState::reset(), &gen, 0.01, &times).unwrap();
        let ex = evolve_exact_on_grid(&AmplitudeState::reset(), &gen, &times);
        for (a, b) in rk.iter().zip(&ex) {
            assert!(a.angle_to(&b.amplitudes()) < 1e-9);
            assert!((a.survival() - b.survival()).abs() < 1e-9);
        }
    }

    #[test]
    fn survival_examples() {
        assert_eq!(AmplitudeState::reset().survival(), 1.0);
        let p = SystemParams::new(0.0, 0.0, 3.0, 0.0).unwrap();
        let traj = evolve(&AmplitudeState::reset(), &Generator::new(&p), 0.01, 100).unwrap();
        assert!(traj.iter().all(|s| s.survival() == 1.0));
    }

    #[test]
    fn emission_rate_examples() {
        let p = SystemParams::figure4();
        assert_eq!(emission_rates(&AmplitudeState::reset(), &p), (0.0, 0.0));
        let bright = AmplitudeState::from_array([0.0, 1.0, 0.0], 0.0);
        assert_eq!(emission_rates(&bright, &p).0, 48.0e6);
    }

    #[test]
    fn conditioning_examples() {
        let r = AmplitudeState::reset();
        assert_eq!(condition_on_no_jump(&r).unwrap(), r);
        let s = AmplitudeState::from_array([0.3, 0.0, 0.4], 2.0);
        let c = condition_on_no_jump(&s).unwrap();
        assert_relative_eq!(c.c0, 0.6, max_relative = 1e-15);
        assert_relative_eq!(c.c2, 0.8, max_relative = 1e-15);
        assert_eq!(c.t, 2.0);
        let zero = AmplitudeState::from_array([0.0; 3], 1.0);
        assert_eq!(condition_on_no_jump(&zero), Err(Error::ZeroSurvival));
    }

    #[test]
    fn conditioning_keeps_dark_period_ratio() {
        let (eps, w) = (1.0 / 24.0, 1.0 / 48.0);
        for (t, g) in [(4.0, 1.0), (30.0, 0.4), (100.0, 0.05)] {
            let (c, s) = (libm::cos(w * t), libm::sin(w * t));
            let st = AmplitudeState::from_array([c * g, -2.0 * eps * c * g, -s * g], t);
            let out = condition_on_no_jump(&st).unwrap();
            assert_relative_eq!(out.c1 / out.c0, -2.0 * eps, max_relative = 1e-14);
            assert_relative_eq!(out.survival(), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn dissipation_identity_on_figure4() {
        let p = SystemParams::figure4();
        let gen = Generator::new(&p);
        let dt = DEFAULT_SCALED_STEP / p.beta1;
        let traj = evolve(&AmplitudeState::reset(), &gen, dt, 20_000).unwrap();
        assert!(max_dissipation_residual(&gen, &traj) < TOL_CONS);
    }

    proptest! {
        #[test]
        fn evolution_is_linear_and_dissipative(
            o1 in 0.0f64..2.0, o2 in 0.0f64..2.0, b2 in 0.0f64..1.0,
            a in -3.0f64..3.0, c0 in -1.0f64..1.0, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0,
        ) {
            let p = SystemParams::new(o1, o2, 1.0, b2).unwrap();
            let gen = Generator::new(&p);
            let s = AmplitudeState::from_array([c0, c1, c2], 0.0);
            let base = evolve(&s, &gen, 0.01, 300).unwrap();
            let scaled = evolve(&s.scaled(a), &gen, 0.01, 300).unwrap();
            for (x, y) in base.iter().zip(&scaled) {
                for (u, v) in x.amplitudes().iter().zip(y.amplitudes()) {
                    prop_assert!((a * u - v).abs() <= 1e-13 * (1.0 + v.abs()));
                }
            }
            let w0 = s.survival();
            for win in base.windows(2) {
                prop_assert!(win[1].survival() <= win[0].survival() + TOL_NORM * 0.01 * w0);
            }
        }

        #[test]
        fn conditioning_is_idempotent(c0 in -1.0f64..1.0, c1 in -1.0f64..1.0, c2 in 0.01f64..1.0) {
            let s = AmplitudeState::from_array([c0, c1, c2], 1.0);
            let once = condition_on_no_jump(&s).unwrap();
            let twice = condition_on_no_jump(&once).unwrap();
            for (u, v) in once.amplitudes().iter().zip(twice.amplitudes()) {
                prop_assert!((u - v).abs() < 1e-15);
            }
        }
    }
}
