//! CSV tables with a `#`-prefixed metadata block.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` exactly.

use std::io::{self, Write};

use nextjump_core::model::{classify_regime, derive_rates, RegimeThresholds};
use nextjump_core::spectral::exact_eigenvalues;

use crate::config::RunConfig;

/// Formats a float for a CSV cell.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values.iter().map(|&x| sci(x)).collect());
    }

    pub fn push_cells(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table is UTF-8")
    }

    /// Column by name, parsed back to floats.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[i].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

/// Resolved config, derived rates, regime and eigenvalues for a header.
pub fn describe_run(table: &mut Table, command: &str, cfg: &RunConfig) {
    let p = &cfg.params;
    table.meta("command", command);
    table.meta("units", cfg.units);
    table.meta("omega1", sci(p.omega1));
    table.meta("omega2", sci(p.omega2));
    table.meta("beta1", sci(p.beta1));
    table.meta("beta2", sci(p.beta2));
    table.meta("grid_start", sci(cfg.grid.start));
    table.meta("grid_stop", sci(cfg.grid.stop));
    table.meta("grid_step", sci(cfg.grid.step));
    table.meta("seed", cfg.seed);
    table.meta("n_traj", cfg.n_traj);
    table.meta("horizon", sci(cfg.horizon));
    table.meta("t0_prime", sci(cfg.t0_prime));
    table.meta(
        "t3_threshold",
        cfg.t3_threshold.map_or_else(|| "default".to_string(), sci),
    );
    match derive_rates(p) {
        Ok(d) => {
            table.meta("epsilon", sci(d.epsilon));
            table.meta("eta", sci(d.eta));
            table.meta("alpha", sci(d.alpha));
            table.meta("beta_ell", sci(d.beta_ell));
        }
        Err(e) => {
            table.meta("epsilon", sci(p.epsilon()));
            table.meta("beta_ell", sci(p.slow_rate()));
            table.meta("eta", e);
        }
    }
    let regime = classify_regime(p, &RegimeThresholds::default());
    table.meta("regime", regime.tag);
    table.meta("regime_margin", sci(regime.margin));
    let lambdas = exact_eigenvalues(p).lambdas;
    for (name, l) in ["eigen_slowest", "eigen_middle", "eigen_fastest"]
        .iter()
        .zip(&lambdas)
    {
        table.meta(name, format!("{} {}", sci(l.re), sci(l.im)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_cells_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.283185307179586e6] {
            assert_eq!(sci(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(sci(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn layout() {
        let mut t = Table::new(&["a", "b"]);
        t.meta("k", "v");
        t.push(&[1.0, 2.0]);
        let s = t.to_csv_string();
        assert_eq!(
            s,
            "# k: v\na,b\n1.0000000000000000e0,2.0000000000000000e0\n"
        );
        assert_eq!(t.column("b"), Some(vec![2.0]));
    }
}
