//! Deterministic result serialization: CSV tables and a key-value summary.
//!
//! Floats are written with 17 significant digits so the files round-trip
//! losslessly and identical runs produce byte-identical output.

use std::fmt::Write as _;

use crate::grid::GridTrajectory;
use crate::scenarios::ComparisonMetrics;
use crate::variational::Trajectory;

/// Fixed-width scientific formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `snapshots.csv` rows: (t, x, Re ψ, Im ψ, |ψ|²), strictly ordered by (t, x).
pub const SNAPSHOT_HEADER: &str = "t,x,re_psi,im_psi,density";

/// One snapshot table from sampled wave-function values.
pub struct SnapshotTable {
    body: String,
}

impl SnapshotTable {
    pub fn new() -> Self {
        Self {
            body: format!("{SNAPSHOT_HEADER}\n"),
        }
    }

    pub fn push_row(&mut self, t: f64, x: f64, re: f64, im: f64) {
        let density = re * re + im * im;
        let _ = writeln!(
            self.body,
            "{},{},{},{},{}",
            fmt_f64(t),
            fmt_f64(x),
            fmt_f64(re),
            fmt_f64(im),
            fmt_f64(density)
        );
    }

    pub fn finish(self) -> String {
        self.body
    }
}

impl Default for SnapshotTable {
    fn default() -> Self {
        Self::new()
    }
}

/// Variational snapshots evaluated on the lattice x_min + j·dx.
pub fn variational_snapshots(traj: &Trajectory, x_min: f64, dx: f64, n_points: usize) -> String {
    let mut table = SnapshotTable::new();
    for s in &traj.samples {
        for j in 0..n_points {
            let x = x_min + j as f64 * dx;
            let v = s.state.psi.evaluate(x);
            table.push_row(s.state.time, x, v.re, v.im);
        }
    }
    table.finish()
}

pub fn grid_snapshots(traj: &GridTrajectory) -> String {
    let mut table = SnapshotTable::new();
    for s in &traj.samples {
        for (j, z) in s.state.amplitudes.iter().enumerate() {
            table.push_row(s.state.time, s.state.x(j), z.re, z.im);
        }
    }
    table.finish()
}

fn soliton_columns(prefix: &str, n: usize) -> String {
    (1..=n)
        .map(|i| format!(",{prefix}x_{i},{prefix}p_{i}"))
        .collect()
}

/// Observable table of a variational run:
/// t, norm, energy, per-soliton x/p, cumulative regularized solves.
pub fn variational_observables(traj: &Trajectory, grouping: &[Vec<usize>]) -> String {
    let mut out = format!(
        "t,norm,energy{},regularized_steps\n",
        soliton_columns("", grouping.len())
    );
    for s in &traj.samples {
        let obs = crate::variational::extract_observables(&s.state, grouping);
        let _ = write!(
            out,
            "{},{},{}",
            fmt_f64(s.state.time),
            fmt_f64(s.norm),
            fmt_f64(s.energy)
        );
        for g in &obs.groups {
            let _ = write!(out, ",{},{}", fmt_f64(g.position), fmt_f64(g.momentum));
        }
        let _ = writeln!(out, ",{}", s.regularized_steps);
    }
    out
}

/// Observable table of a grid run:
/// t, norm, energy, per-soliton x/p, boundary amplitude.
pub fn grid_observables(traj: &GridTrajectory, n_solitons: usize) -> String {
    let mut out = format!(
        "t,norm,energy{},boundary\n",
        soliton_columns("", n_solitons)
    );
    for s in &traj.samples {
        let _ = write!(
            out,
            "{},{},{}",
            fmt_f64(s.state.time),
            fmt_f64(s.norm),
            fmt_f64(s.energy)
        );
        for (x, p) in crate::scenarios::grid_soliton_observables(&s.state, n_solitons) {
            let _ = write!(out, ",{},{}", fmt_f64(x), fmt_f64(p));
        }
        let _ = writeln!(out, ",{}", fmt_f64(s.boundary));
    }
    out
}

/// Observable table of a comparison run: per-engine norm/energy and
/// per-soliton x/p, the regularized-solve count, and the mismatch metrics.
pub fn comparison_observables(
    var: &Trajectory,
    grid: &GridTrajectory,
    grouping: &[Vec<usize>],
    metrics: &[ComparisonMetrics],
) -> String {
    let n = grouping.len();
    let mut out = format!(
        "t,var_norm,var_energy,grid_norm,grid_energy{}{},regularized_steps,l2_mismatch,sup_mismatch\n",
        soliton_columns("var_", n),
        soliton_columns("grid_", n)
    );
    for ((vs, gs), m) in var.samples.iter().zip(&grid.samples).zip(metrics) {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            fmt_f64(m.time),
            fmt_f64(m.var_norm),
            fmt_f64(m.var_energy),
            fmt_f64(m.grid_norm),
            fmt_f64(m.grid_energy)
        );
        let obs = crate::variational::extract_observables(&vs.state, grouping);
        for g in &obs.groups {
            let _ = write!(out, ",{},{}", fmt_f64(g.position), fmt_f64(g.momentum));
        }
        for (x, p) in crate::scenarios::grid_soliton_observables(&gs.state, n) {
            let _ = write!(out, ",{},{}", fmt_f64(x), fmt_f64(p));
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            vs.regularized_steps,
            fmt_f64(m.l2_density_mismatch),
            fmt_f64(m.sup_mismatch)
        );
    }
    out
}

/// Key-value summary, one `key = value` per line.
pub struct Summary {
    body: String,
}

impl Summary {
    pub fn new(command: &str) -> Self {
        Self {
            body: format!("command = {command}\n"),
        }
    }

    pub fn push(&mut self, key: &str, value: &str) {
        let _ = writeln!(self.body, "{key} = {value}");
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        let v = fmt_f64(value);
        self.push(key, &v);
    }

    pub fn finish(self) -> String {
        self.body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [
            0.0,
            1.0,
            -1.0 / 48.0,
            std::f64::consts::PI,
            1.2345678901234567e-300,
            -9.87e250,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s} -> {back}");
        }
    }

    #[test]
    fn snapshot_schema_is_pinned() {
        let mut t = SnapshotTable::new();
        t.push_row(0.0, 1.5, 0.25, -0.5);
        let s = t.finish();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "t,x,re_psi,im_psi,density");
        let row = lines.next().unwrap();
        assert!(row.starts_with("0.0000000000000000e0,1.5000000000000000e0,"));
        assert!(row.ends_with(&fmt_f64(0.25 * 0.25 + 0.25)));
    }

    #[test]
    fn summary_layout() {
        let mut s = Summary::new("ground-state");
        s.push_f64("energy", -1.0 / 48.0);
        let text = s.finish();
        assert!(text.starts_with("command = ground-state\n"));
        assert!(text.contains("energy = -2.0833333333333332e-2\n"));
    }
}
