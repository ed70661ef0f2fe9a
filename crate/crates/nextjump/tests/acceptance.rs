//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every line is printed; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use nextjump::commands::{self, Command};
use nextjump::config::PartialConfig;
use nextjump::ensemble::{run_records, with_threads};
use nextjump::output::Table;
use nextjump_core::model::{RegimeThresholds, SystemParams};
use nextjump_core::propagator::{
    condition_on_no_jump, evolve, max_dissipation_residual, AmplitudeState, Generator, StepMatrix,
};
use nextjump_core::regimes::{relative_occupation, OverdampedForm, UnderdampedForm};
use nextjump_core::spectral::{eigen_compare, OverdampedRates};
use nextjump_core::trajectories::{
    channels_in_window, dark_stats, ks_critical_value, ks_statistic, Fraction, IntervalThresholds,
    LogBins, RecordSimulator,
};

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{}; runtime {:.2?} (limit {:?})", o.detail, elapsed, limit);
    o.pass &= elapsed < limit;
    o
}

fn angle(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let cross = cross.iter().map(|x| x * x).sum::<f64>().sqrt();
    cross.atan2(dot.abs())
}

fn fig2_trajectory() -> (Generator, Vec<AmplitudeState>) {
    let p = SystemParams::figure2();
    let gen = Generator::new(&p);
    let traj = evolve(&AmplitudeState::reset(), &gen, 0.01 / p.beta1, 20_000).unwrap();
    (gen, traj)
}

fn ac1() -> Outcome {
    timed(Duration::from_secs(1), || {
        let (gen, traj) = fig2_trajectory();
        let residual = max_dissipation_residual(&gen, &traj);
        let monotone = traj.windows(2).all(|w| w[1].survival() <= w[0].survival());
        outcome(
            residual < 1e-8 && monotone,
            format!("max relative residual {residual:.3e} (< 1e-8), W monotone {monotone}"),
        )
    })
}

fn ac2() -> Outcome {
    timed(Duration::from_secs(1), || {
        let th = RegimeThresholds::default();
        let p2 = SystemParams::figure2();
        let eps = p2.epsilon();
        let tol2 = 5.0 * eps * eps;
        let c2 = eigen_compare(&p2, &th);
        // Sorted slowest first: the pair, then λ₁.
        let e = c2.underdamped.relative_errors;
        let pair = e[0].max(e[1]);
        let l1 = e[2];

        let p4 = SystemParams::figure4();
        let eps4 = p4.epsilon();
        let alpha4 = (p4.omega2 / p4.omega1 / (2.0 * eps4)).powi(2);
        let tol4 = 5.0 * (eps4 * eps4).max(alpha4);
        let err4 = eigen_compare(&p4, &th)
            .overdamped
            .map_or(f64::INFINITY, |m| m.max_error());

        let half = SystemParams {
            omega1: p2.omega1 / 2.0,
            ..p2
        };
        let eh = eigen_compare(&half, &th).underdamped.relative_errors;
        let ratio = pair / eh[0].max(eh[1]);

        let pass = pair < tol2 && l1 < tol2 && err4 < tol4 && (3.0..=5.0).contains(&ratio);
        outcome(
            pass,
            format!(
                "Fig.2 pair {pair:.4e}, fast {l1:.4e} (< {tol2:.4e}); Fig.4 {err4:.4e} (< {tol4:.4e}); halving ratio {ratio:.3} in [3,5]"
            ),
        )
    })
}

fn ac3() -> Outcome {
    timed(Duration::from_secs(1), || {
        let p = SystemParams::figure2();
        let eps = p.epsilon();
        let form = UnderdampedForm::new(&p, &RegimeThresholds::default());
        let (_, traj) = fig2_trajectory();
        let (mut e0, mut e1, mut e2) = (0.0f64, 0.0f64, 0.0f64);
        for s in &traj {
            let c = form.after_reset(s.t);
            e0 = e0.max((s.c0 - c[0]).abs());
            e1 = e1.max((s.c1 - c[1]).abs() / (2.0 * eps));
            e2 = e2.max((s.c2 - c[2]).abs());
        }
        let tol = 5.0 * eps * eps;
        outcome(
            e0 < tol && e2 < tol && e1 < 0.2,
            format!(
                "max |dc0| {e0:.4e}, |dc2| {e2:.4e} (< {tol:.4e}); |dc1|/2eps {e1:.4e} (< 0.2)"
            ),
        )
    })
}

fn ac4() -> Outcome {
    let p = SystemParams::figure2();
    let onset = 4.0 / p.beta1;
    let gen = Generator::new(&p);
    let raw = evolve(&AmplitudeState::reset(), &gen, 0.01 / p.beta1, 400).unwrap()[400];
    let conditioned = condition_on_no_jump(&raw).unwrap();
    let form = UnderdampedForm::new(&p, &RegimeThresholds::default());
    let closed = form.dark(onset, onset).unwrap();
    let theta = conditioned.angle_to(&closed);
    let f = form.renormalization().unwrap();
    let applied = 1.0 / raw.survival().sqrt();
    let mismatch = ((applied - 1.0) - (f - 1.0)).abs() / (f - 1.0);
    outcome(
        theta < 1e-2 && mismatch < 0.1,
        format!(
            "angle {theta:.4e} rad (< 1e-2); applied renormalization - 1 = {:.4e} vs f - 1 = {:.4e}, mismatch {:.1}% (< 10%)",
            applied - 1.0,
            f - 1.0,
            100.0 * mismatch
        ),
    )
}

fn ac5() -> Outcome {
    let p = SystemParams::figure4();
    let form = OverdampedForm::new(&p, &RegimeThresholds::default()).unwrap();
    let gen = Generator::new(&p);
    let rates = OverdampedRates::new(&p).unwrap();

    // (a) Late-time direction.
    let t = 10.0 / rates.lambda2.abs();
    let c = StepMatrix::exact(&gen, t).apply(&AmplitudeState::reset().amplitudes());
    let state = condition_on_no_jump(&AmplitudeState::from_array(c, t)).unwrap();
    let theta_a = angle(&state.amplitudes(), &form.extralong(t));

    // (b) Full shelving time against bisection on c0.
    let t2 = form.full_shelving_time().unwrap();
    let (mut lo, mut hi) = (0.0, 10.0 / rates.lambda3.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if form.dark(mid)[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let bisected = 0.5 * (lo + hi);
    let rel_b = ((t2 - bisected) / bisected).abs();
    let c2 = form.dark(t2);
    let z_t2 = relative_occupation(c2[0], c2[2]).unwrap();

    // (c) Late-time Z.
    let late = form.dark(200.0 / rates.lambda3.abs());
    let z_late = relative_occupation(late[0], late[2]).unwrap();
    let exact_gap = (z_late - form.late_time_z()).abs();
    let alpha = form.alpha();
    let leading_gap = (form.late_time_z() - form.late_time_z_leading()).abs();

    let pass = theta_a < 1e-2
        && rel_b < 1e-6
        && (z_t2 - 1.0).abs() < 1e-9
        && exact_gap < 1e-12
        && leading_gap <= 2.0 * alpha * alpha;
    outcome(
        pass,
        format!(
            "(a) angle {theta_a:.3e} rad; (b) t2 {t2:.6e} s vs bisection rel {rel_b:.1e}, Z(t2) = {z_t2:.12}; (c) late Z - (1-a)/(1+a) = {exact_gap:.1e}, |(1-a)/(1+a) - (1-2a)| = {leading_gap:.3e} <= 2a^2 = {:.3e}",
            2.0 * alpha * alpha
        ),
    )
}

fn ac6() -> Outcome {
    timed(Duration::from_secs(60), || {
        let p = SystemParams::figure2();
        let sim = RecordSimulator::with_default_step(&p).unwrap();
        let draws = sim.first_jumps(100_000, 6, 0).unwrap();
        let censored = draws.iter().filter(|d| d.is_none()).count();
        let mut times: Vec<f64> = draws.into_iter().flatten().map(|(t, _)| t).collect();
        times.sort_by(f64::total_cmp);
        let gen = Generator::new(&p);
        let c = AmplitudeState::reset().amplitudes();
        let d = ks_statistic(&times, |t| {
            let x = StepMatrix::exact(&gen, t).apply(&c);
            1.0 - x.iter().map(|v| v * v).sum::<f64>()
        });
        let crit = ks_critical_value(times.len(), 0.01);
        outcome(
            d < crit && censored == 0,
            format!(
                "N = {}, KS D = {d:.4e} (< {crit:.4e}), censored {censored}",
                times.len()
            ),
        )
    })
}

fn ac7() -> Outcome {
    timed(Duration::from_secs(300), || {
        let p = SystemParams::figure4();
        let sim = RecordSimulator::with_default_step(&p).unwrap();
        let records = run_records(&sim, 4, 0.02, 7).unwrap();
        let thresholds = IntervalThresholds::defaults(&p);
        let stats = dark_stats(&records, &thresholds, &LogBins::defaults(&p, 40)).unwrap();
        let eps = p.epsilon();
        let expected = (p.omega2 / p.omega1 / (2.0 * eps)).powi(2);
        let f = stats.fraction_extralong;
        let z = f.z_score(expected);
        outcome(
            stats.n_intervals >= 100_000 && z < 3.0,
            format!(
                "{} intervals, fraction > 1/|lambda3| = {:.4e} +- {:.2e} vs eta^2/4eps^2 = {expected:.4e}: {z:.1} SE (< 3)",
                stats.n_intervals, f.value, f.std_error
            ),
        )
    })
}

fn ac8() -> Outcome {
    timed(Duration::from_secs(300), || {
        let base = SystemParams::figure2();
        let eps = base.epsilon();
        let p = SystemParams {
            beta2: 4.0 * base.beta1 * eps * eps,
            ..base
        };
        let sim = RecordSimulator::with_default_step(&p).unwrap();
        let records = run_records(&sim, 16, 2.0e5, 8).unwrap();
        let onset = 4.0 / p.beta1;
        // Whole cycles of Ω₂, long enough to hold essentially every dark period.
        let window = 5.0 * std::f64::consts::TAU / p.omega2;
        let counts = channels_in_window(&records, onset, onset + window);
        let f: Fraction = counts.bright_fraction();
        let z = f.z_score(0.5);
        outcome(
            counts.total() >= 10_000 && z < 3.0,
            format!(
                "{} dark periods, bright:dark = {}:{}, bright fraction {:.4} +- {:.4}: {z:.2} sigma from 0.5 (< 3)",
                counts.total(),
                counts.bright,
                counts.dark,
                f.value,
                f.std_error
            ),
        )
    })
}

fn table(command: Command, partial: PartialConfig) -> Table {
    let cfg = command.resolve(partial).unwrap();
    match command {
        Command::Figure2 => commands::figure2(&cfg),
        Command::Figure3 => commands::figure3(&cfg),
        Command::Figure4 => commands::figure4(&cfg),
        Command::Figure5 => commands::figure5(&cfg),
        _ => unreachable!(),
    }
    .unwrap()
}

fn meta<'a>(t: &'a Table, key: &str) -> Option<&'a str> {
    t.meta
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn figure2_anchor() -> (bool, String) {
    let start = Instant::now();
    let t = table(Command::Figure2, PartialConfig::default());
    let elapsed = start.elapsed();
    let tau = t.column("tau").unwrap();
    let p = t.column("Pbar10_numeric").unwrap();
    let (mut before, mut after) = (0.0f64, 0.0f64);
    for i in 1..tau.len() {
        let slope = ((p[i] - p[i - 1]) / (tau[i] - tau[i - 1])).abs();
        if tau[i] <= 5.0 {
            before = before.max(slope);
        } else {
            after = after.max(slope);
        }
    }
    let ratio = before / after;
    let deterministic = t == table(Command::Figure2, PartialConfig::default());
    (
        ratio > 10.0 && deterministic && elapsed < Duration::from_secs(5),
        format!("Fig.2 slope ratio {ratio:.3} (> 10) in {elapsed:.2?}"),
    )
}

fn figure3_anchor() -> (bool, String) {
    let start = Instant::now();
    let t = table(Command::Figure3, PartialConfig::default());
    let elapsed = start.elapsed();
    let z = t.column("Z").unwrap();
    let near_one: Vec<usize> = (0..z.len()).filter(|&i| z[i] > 1.0 - 1e-3).collect();
    let touches_once = !near_one.is_empty() && near_one.windows(2).all(|w| w[1] == w[0] + 1);
    let last = *z.last().unwrap();
    let deterministic = t == table(Command::Figure3, PartialConfig::default());
    (
        z[0] == -1.0
            && touches_once
            && last < 1.0
            && deterministic
            && elapsed < Duration::from_secs(5),
        format!(
            "Fig.3 Z(0) = {}, max Z {:.8} in one run of {} rows, last Z {last:.6}",
            z[0],
            z.iter().copied().fold(f64::MIN, f64::max),
            near_one.len()
        ),
    )
}

fn figure4_anchor() -> (bool, String) {
    let start = Instant::now();
    let t = table(Command::Figure4, PartialConfig::default());
    let elapsed = start.elapsed();
    let eps: f64 = meta(&t, "epsilon").unwrap().parse().unwrap();
    let l3: f64 = meta(&t, "lambda3_asymptotic").unwrap().parse().unwrap();
    let ts = t.column("t").unwrap();
    let spans = *ts.last().unwrap() >= 5.0 / l3.abs();
    let p20 = *t.column("P20_cond").unwrap().last().unwrap();
    (
        (0.125..=0.135).contains(&eps) && spans && p20 > 0.99 && elapsed < Duration::from_secs(5),
        format!("Fig.4 eps {eps:.4}, lambda3 {l3:.1}, late conditioned P20 {p20:.4}"),
    )
}

fn figure5_anchor() -> (bool, String) {
    let start = Instant::now();
    let t = table(Command::Figure5, PartialConfig::default());
    let elapsed = start.elapsed();
    let regime = meta(&t, "regime").unwrap_or("");
    let numeric_only = t.columns == ["t", "P10", "P20", "W"];
    let p10 = t.column("P10").unwrap();
    let p20 = t.column("P20").unwrap();
    (
        regime == "Crossover"
            && numeric_only
            && p10[0] == 0.0
            && p20[0] == 0.0
            && elapsed < Duration::from_secs(5),
        format!("Fig.5 regime {regime}, columns {:?}", t.columns),
    )
}

fn ac9() -> Outcome {
    let parts = [
        figure2_anchor(),
        figure3_anchor(),
        figure4_anchor(),
        figure5_anchor(),
    ];
    let pass = parts.iter().all(|(p, _)| *p);
    let detail = parts
        .iter()
        .map(|(p, d)| format!("{d} [{}]", if *p { "ok" } else { "fail" }))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn ac10() -> Outcome {
    let mut same = true;
    for command in [
        Command::Figure2,
        Command::Figure3,
        Command::Figure4,
        Command::Figure5,
        Command::Eigen,
    ] {
        let cfg = command.resolve(PartialConfig::default()).unwrap();
        same &= commands::run(command, &cfg, None).unwrap()
            == commands::run(command, &cfg, None).unwrap();
    }
    let cfg = Command::Trajectories
        .resolve(PartialConfig {
            n_traj: Some(8),
            horizon: Some(2e-3),
            seed: Some(10),
            ..Default::default()
        })
        .unwrap();
    let one = commands::run(Command::Trajectories, &cfg, Some(1)).unwrap();
    let many = commands::run(Command::Trajectories, &cfg, Some(4)).unwrap();
    let again = commands::run(Command::Trajectories, &cfg, Some(4)).unwrap();
    let threads_agree = one == many && many == again;
    let records_agree = with_threads(Some(3), || {
        let sim = RecordSimulator::with_default_step(&cfg.params).unwrap();
        run_records(&sim, 8, 2e-3, 10).unwrap()
    })
    .unwrap()
        == run_records(
            &RecordSimulator::with_default_step(&cfg.params).unwrap(),
            8,
            2e-3,
            10,
        )
        .unwrap();
    outcome(
        same && threads_agree && records_agree,
        format!("repeat runs identical {same}; 1 vs 4 threads identical {threads_agree}; records identical {records_agree}"),
    )
}

fn main() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error"))
        .try_init();
    let criteria: [Criterion; 10] = [
        ("AC1", "dissipation identity", ac1),
        ("AC2", "eigenvalue cross-check", ac2),
        ("AC3", "underdamped closed-form agreement", ac3),
        ("AC4", "conditioning and f", ac4),
        ("AC5", "overdamped structure", ac5),
        ("AC6", "waiting-time KS test", ac6),
        ("AC7", "extra-long dark-period probability", ac7),
        ("AC8", "channel split", ac8),
        ("AC9", "figure reproduction", ac9),
        ("AC10", "determinism", ac10),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{id} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
