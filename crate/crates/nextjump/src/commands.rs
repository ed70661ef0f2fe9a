//! The six analyses exposed by the binary.

use std::fmt::Write as _;

use nextjump_core::model::{RegimeThresholds, SystemParams};
use nextjump_core::propagator::{
    evolve_on_grid, AmplitudeState, Generator, StepMatrix, DEFAULT_SCALED_STEP,
};
use nextjump_core::regimes::{
    dark_period_predictions, relative_occupation, Assumption, OverdampedForm, UnderdampedForm,
};
use nextjump_core::spectral::{eigen_compare, AsymptoticMatch, OverdampedRates};
use nextjump_core::trajectories::{dark_stats, IntervalThresholds, LogBins, RecordSimulator};
use nextjump_core::Error as CoreError;

use crate::config::{Defaults, Grid, PartialConfig, RunConfig, Units};
use crate::ensemble::{run_records, with_threads};
use crate::output::{describe_run, sci, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Figure2,
    Figure3,
    Figure4,
    Figure5,
    Eigen,
    Trajectories,
}

/// Histogram bins used by `trajectories`.
pub const HISTOGRAM_BINS: usize = 40;

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Figure2 => "figure2",
            Self::Figure3 => "figure3",
            Self::Figure4 => "figure4",
            Self::Figure5 => "figure5",
            Self::Eigen => "eigen",
            Self::Trajectories => "trajectories",
        }
    }

    pub fn defaults(&self) -> Defaults {
        let base = |params, start, stop, step| Defaults {
            params,
            grid: Grid { start, stop, step },
            seed: 0,
            n_traj: 16,
            horizon: None,
            units: Units::Angular,
        };
        match self {
            Self::Figure2 | Self::Eigen => base(SystemParams::figure2(), 0.0, 200.0, 0.05),
            Self::Figure3 => base(SystemParams::figure3(), 0.0, 10.0, 0.01),
            Self::Figure4 | Self::Trajectories => Defaults {
                units: Units::Hertz,
                ..base(SystemParams::figure4(), 0.0, 6.0e-4, 1.0e-7)
            },
            Self::Figure5 => base(SystemParams::figure5(), 0.0, 2.0e-5, 1.0e-8),
        }
    }

    pub fn resolve(&self, partial: PartialConfig) -> Result<RunConfig, CliError> {
        RunConfig::resolve(partial, &self.defaults())
    }
}

/// What a command produced: the main body (CSV or text) and, for
/// `trajectories`, a short human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub summary: Option<String>,
}

impl Output {
    fn table(table: Table) -> Self {
        Self {
            body: table.to_csv_string(),
            summary: None,
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig, threads: Option<usize>) -> Result<Output, CliError> {
    match command {
        Command::Figure2 => figure2(cfg).map(Output::table),
        Command::Figure3 => figure3(cfg).map(Output::table),
        Command::Figure4 => figure4(cfg).map(Output::table),
        Command::Figure5 => figure5(cfg).map(Output::table),
        Command::Eigen => Ok(Output {
            body: eigen(cfg),
            summary: None,
        }),
        Command::Trajectories => trajectories(cfg, threads),
    }
}

fn add_warnings(table: &mut Table, form: &str, warnings: &[Assumption]) {
    for w in warnings {
        table.meta("warning", format!("{form}: {}", w.describe()));
    }
}

fn numeric_states(params: &SystemParams, times: &[f64]) -> Result<Vec<AmplitudeState>, CliError> {
    let gen = Generator::new(params);
    Ok(evolve_on_grid(
        &AmplitudeState::reset(),
        &gen,
        DEFAULT_SCALED_STEP / params.beta1,
        times,
    )?)
}

fn z_or_nan(c: &[f64; 3]) -> f64 {
    relative_occupation(c[0], c[2]).unwrap_or(f64::NAN)
}

/// `c1²/4ε²` from the numeric propagator and the post-reset closed form,
/// on the dimensionless axis `τ = β₁t`.
pub fn figure2(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let mut table = Table::new(&[
        "tau",
        "c0",
        "c1",
        "c2",
        "W",
        "Pbar10_numeric",
        "Pbar10_closed",
    ]);
    describe_run(&mut table, "figure2", cfg);
    table.meta("axis", "tau = beta1 * t");
    let form = UnderdampedForm::new(p, &RegimeThresholds::default());
    add_warnings(&mut table, "underdamped closed form", &form.warnings);
    let taus = cfg.grid.points();
    let times: Vec<f64> = taus.iter().map(|tau| tau / p.beta1).collect();
    let states = numeric_states(p, &times)?;
    let scale = 4.0 * p.epsilon() * p.epsilon();
    for ((tau, t), s) in taus.iter().zip(&times).zip(&states) {
        let closed = form.after_reset(*t);
        table.push(&[
            *tau,
            s.c0,
            s.c1,
            s.c2,
            s.survival(),
            s.c1 * s.c1 / scale,
            closed[1] * closed[1] / scale,
        ]);
    }
    Ok(table)
}

/// Overdamped dark-period closed form on `τ′ = 2β₁ε²t`, time from onset.
pub fn figure3(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let form = OverdampedForm::new(p, &RegimeThresholds::default()).map_err(|e| match e {
        CoreError::OutsideValidity(_) | CoreError::EtaUndefined => {
            CliError::Config(format!("figure3 needs 0 < alpha < 1: {e}"))
        }
        other => other.into(),
    })?;
    let mut table = Table::new(&["tau_prime", "P20", "Z"]);
    describe_run(&mut table, "figure3", cfg);
    table.meta(
        "axis",
        "tau_prime = 2 beta1 eps^2 t, t from dark-period onset",
    );
    add_warnings(&mut table, "overdamped closed form", &form.warnings);
    let to_time = 1.0 / (2.0 * p.beta1 * p.epsilon() * p.epsilon());
    match form.full_shelving_time() {
        Ok(t2) => {
            table.meta("t2", sci(t2));
            table.meta("tau_prime_t2", sci(t2 / to_time));
        }
        Err(e) => table.meta("t2", e),
    }
    table.meta("late_z", sci(form.late_time_z()));
    table.meta("late_z_leading", sci(form.late_time_z_leading()));
    table.meta(
        "late_z_difference",
        sci(form.late_time_z() - form.late_time_z_leading()),
    );
    for tp in cfg.grid.points() {
        let c = form.dark(tp * to_time);
        table.push(&[tp, c[2] * c[2], z_or_nan(&c)]);
    }
    Ok(table)
}

/// Fig. 4 occupations in seconds by exact stepping, with and without
/// conditioning on null emission.
pub fn figure4(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let mut table = Table::new(&["t", "P10", "P20", "Z", "P10_cond", "P20_cond"]);
    describe_run(&mut table, "figure4", cfg);
    table.meta("axis", "t in seconds");
    let gen = Generator::new(p);
    let c = AmplitudeState::reset().amplitudes();
    let at_onset = StepMatrix::exact(&gen, cfg.t0_prime).apply(&c);
    table.meta(
        "W_t0_prime",
        sci(at_onset.iter().map(|x| x * x).sum::<f64>()),
    );
    match OverdampedRates::new(p) {
        Ok(r) => {
            table.meta("lambda3_asymptotic", sci(r.lambda3));
            table.meta("lambda2_asymptotic", sci(r.lambda2));
        }
        Err(e) => table.meta("lambda3_asymptotic", e),
    }
    if let Ok(form) = OverdampedForm::new(p, &RegimeThresholds::default()) {
        add_warnings(&mut table, "overdamped closed form", &form.warnings);
        table.meta(
            "extralong_dark_occupation",
            sci(form.extralong_dark_occupation()),
        );
    }
    if let Ok(pred) = dark_period_predictions(p, cfg.t0_prime) {
        if let Some(x) = pred.extralong {
            table.meta("t3", sci(x.t3));
            table.meta("p_extralong", sci(x.probability));
        }
    }
    let times = cfg.grid.points();
    let mut state = AmplitudeState::reset();
    if cfg.grid.start > 0.0 {
        state = AmplitudeState::from_array(
            StepMatrix::exact(&gen, cfg.grid.start).apply(&c),
            cfg.grid.start,
        );
    }
    let step = StepMatrix::exact(&gen, cfg.grid.step);
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            state = AmplitudeState::from_array(step.apply(&state.amplitudes()), t);
        }
        let a = state.amplitudes();
        let w = state.survival();
        let (p10, p20) = (a[1] * a[1], a[2] * a[2]);
        table.push(&[t, p10, p20, z_or_nan(&a), p10 / w, p20 / w]);
    }
    Ok(table)
}

/// Crossover occupations; numeric only.
pub fn figure5(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let mut table = Table::new(&["t", "P10", "P20", "W"]);
    describe_run(&mut table, "figure5", cfg);
    table.meta("axis", "t in seconds");
    table.meta("closed_forms", "none (outside their validity)");
    let times = cfg.grid.points();
    for s in numeric_states(p, &times)? {
        table.push(&[s.t, s.c1 * s.c1, s.c2 * s.c2, s.survival()]);
    }
    Ok(table)
}

fn write_match(out: &mut String, name: &str, m: &AsymptoticMatch) {
    let _ = writeln!(out, "{name} ({}):", m.triple.kind.as_str());
    for (l, e) in m.matched.iter().zip(&m.relative_errors) {
        let _ = writeln!(out, "  {} {:+.9e}i  rel_err {:.3e}", sci(l.re), l.im, e);
    }
    let _ = writeln!(out, "  max_rel_err {:.6e}", m.max_error());
}

/// Text report of exact and asymptotic eigenvalues.
pub fn eigen(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let cmp = eigen_compare(p, &RegimeThresholds::default());
    let mut out = String::new();
    let mut header = Table::default();
    describe_run(&mut header, "eigen", cfg);
    for (k, v) in header
        .meta
        .iter()
        .filter(|(k, _)| !k.starts_with("grid") && !k.starts_with("eigen_"))
    {
        let _ = writeln!(out, "{k}: {v}");
    }
    let _ = writeln!(out, "exact (slowest first):");
    for l in &cmp.exact.lambdas {
        let _ = writeln!(
            out,
            "  {} {:+.9e}i  (x = lambda/beta1 = {:.9e} {:+.9e}i)",
            sci(l.re),
            l.im,
            l.re / p.beta1,
            l.im / p.beta1
        );
    }
    write_match(&mut out, "underdamped", &cmp.underdamped);
    match &cmp.overdamped {
        Some(m) => write_match(&mut out, "overdamped", m),
        None => {
            let _ = writeln!(out, "overdamped: undefined (omega1 = 0)");
        }
    }
    if cmp.exact.is_real() {
        let l = cmp.exact.lambdas;
        if l[0].re != 0.0 && l[1].re != 0.0 {
            let _ = writeln!(
                out,
                "ratios: lambda2/lambda3 {:.6e}, lambda1/lambda2 {:.6e}",
                l[1].re / l[0].re,
                l[2].re / l[1].re
            );
        }
    }
    out
}

fn interval_thresholds(cfg: &RunConfig) -> IntervalThresholds {
    let d = IntervalThresholds::defaults(&cfg.params);
    IntervalThresholds {
        onset: cfg.t0_prime,
        extralong: cfg.t3_threshold.unwrap_or(d.extralong),
    }
}

/// Interval histogram plus measured-versus-predicted summary.
pub fn trajectories(cfg: &RunConfig, threads: Option<usize>) -> Result<Output, CliError> {
    let p = &cfg.params;
    let sim = RecordSimulator::with_default_step(p)?;
    let records = with_threads(threads, || {
        run_records(&sim, cfg.n_traj, cfg.horizon, cfg.seed)
    })??;
    let thresholds = interval_thresholds(cfg);
    let bins = LogBins::defaults(p, HISTOGRAM_BINS);
    let mut table = Table::new(&[
        "bin_lo",
        "bin_hi",
        "count",
        "terminal_channel_bright",
        "terminal_channel_dark",
    ]);
    describe_run(&mut table, "trajectories", cfg);
    table.meta("dark_threshold", sci(thresholds.onset));
    table.meta("extralong_threshold", sci(thresholds.extralong));
    let mut summary = String::new();
    match dark_stats(&records, &thresholds, &bins) {
        Err(CoreError::EmptyInput) => {
            let edges = bins.edges();
            for w in edges.windows(2) {
                table.push_cells(vec![
                    sci(w[0]),
                    sci(w[1]),
                    "0".into(),
                    "0".into(),
                    "0".into(),
                ]);
            }
            summary.push_str("no events\n");
        }
        Err(e) => return Err(e.into()),
        Ok(stats) => {
            let h = &stats.histogram;
            for k in 0..h.counts.len() {
                table.push_cells(vec![
                    sci(h.edges[k]),
                    sci(h.edges[k + 1]),
                    h.counts[k].to_string(),
                    h.bright[k].to_string(),
                    h.dark[k].to_string(),
                ]);
            }
            let pred = dark_period_predictions(p, thresholds.onset)?;
            let _ = writeln!(
                summary,
                "intervals {} (censored tails dropped: {})",
                stats.n_intervals, stats.n_censored
            );
            let fd = stats.fraction_dark;
            let _ = writeln!(
                summary,
                "fraction_dark {:.6e} +- {:.2e} (predicted W(t0') = {:.6e})",
                fd.value, fd.std_error, pred.p_dark_after_reset
            );
            let fx = stats.fraction_extralong;
            let predicted = pred.extralong.map_or(f64::NAN, |x| x.probability);
            let _ = writeln!(
                summary,
                "fraction_extralong {:.6e} +- {:.2e} (predicted eta^2/4eps^2 = {:.6e})",
                fx.value, fx.std_error, predicted
            );
            let bd = stats.channels_dark.bright_fraction();
            let _ = writeln!(
                summary,
                "dark periods ending bright {:.6e} +- {:.2e} ({} of {}); predicted cycle-averaged {}",
                bd.value,
                bd.std_error,
                bd.count,
                bd.n,
                pred.channel_split.map_or("n/a".to_string(), |c| format!("{:.6e}", c.bright_fraction))
            );
            let bx = stats.channels_extralong.bright_fraction();
            let _ = writeln!(
                summary,
                "extra-long periods ending bright {:.6e} +- {:.2e} ({} of {}); predicted {}",
                bx.value,
                bx.std_error,
                bx.count,
                bx.n,
                pred.extralong
                    .map_or("n/a".to_string(), |x| format!("{:.6e}", 1.0 - x.p_end_dark))
            );
        }
    }
    for line in summary.lines() {
        table.meta("summary", line);
    }
    Ok(Output {
        body: table.to_csv_string(),
        summary: Some(summary),
    })
}
