//! With `Ω₂ = β₂ = 0` the dark level decouples and `(c0, c1)` obey a 2×2
//! system whose eigendecomposition is known in closed form.

use nextjump_core::propagator::{evolve, AmplitudeState, Generator};
use nextjump_core::trajectories::RecordSimulator;
use nextjump_core::SystemParams;
use num_complex::Complex64;

/// `(c0, c1)(t)` from `V e^{Λt} V⁻¹ (1, 0)` with `A = [[0, Ω], [−Ω, −β/2]]`.
fn two_level(omega: f64, beta: f64, t: f64) -> [f64; 2] {
    let disc = Complex64::new(beta * beta / 16.0 - omega * omega, 0.0).sqrt();
    let l = [-beta / 4.0 + disc, -beta / 4.0 - disc];
    // Eigenvector for λ: (Ω, λ).
    let v = |lam: Complex64| [Complex64::new(omega, 0.0), lam];
    let (v0, v1) = (v(l[0]), v(l[1]));
    // Solve a·v0 + b·v1 = (1, 0).
    let det = v0[0] * v1[1] - v1[0] * v0[1];
    let a = v1[1] / det;
    let b = -v0[1] / det;
    let (e0, e1) = ((l[0] * t).exp(), (l[1] * t).exp());
    let c0 = a * e0 * v0[0] + b * e1 * v1[0];
    let c1 = a * e0 * v0[1] + b * e1 * v1[1];
    [c0.re, c1.re]
}

fn max_error(omega: f64, beta: f64) -> f64 {
    let p = SystemParams::new(omega, 0.0, beta, 0.0).unwrap();
    let dt = 0.01 / beta;
    let traj = evolve(&AmplitudeState::reset(), &Generator::new(&p), dt, 3000).unwrap();
    traj.iter()
        .map(|s| {
            let [c0, c1] = two_level(omega, beta, s.t);
            (s.c0 - c0).abs().max((s.c1 - c1).abs()).max(s.c2.abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn rk4_matches_underdamped_two_level() {
    let err = max_error(0.3, 1.0);
    assert!(err < 1e-8, "max error {err:e}");
}

#[test]
fn rk4_matches_overdamped_two_level() {
    let err = max_error(0.1, 1.0);
    assert!(err < 1e-8, "max error {err:e}");
    let err = max_error(2.0e6, 4.0e6);
    assert!(err < 1e-8, "max error {err:e}");
}

fn survival(omega: f64, beta: f64, t: f64) -> f64 {
    let [c0, c1] = two_level(omega, beta, t);
    c0 * c0 + c1 * c1
}

#[test]
fn median_waiting_time_matches_closed_form() {
    let (omega, beta) = (0.3, 1.0);
    // W is monotone, so bisect W(t) = 1/2.
    let (mut lo, mut hi) = (0.0, 200.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if survival(omega, beta, mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let exact = 0.5 * (lo + hi);

    let p = SystemParams::new(omega, 0.0, beta, 0.0).unwrap();
    let sim = RecordSimulator::with_default_step(&p).unwrap();
    let mut times: Vec<f64> = sim
        .first_jumps(40_000, 2024, 0)
        .unwrap()
        .into_iter()
        .map(|j| j.expect("two-level waits always end").0)
        .collect();
    times.sort_by(f64::total_cmp);
    let median = 0.5 * (times[19_999] + times[20_000]);
    assert!(
        ((median - exact) / exact).abs() < 0.01,
        "median {median} vs {exact}"
    );
}
