//! Experiment drivers: single runs, the curvature scan, the double-limit scan
//! and the long-time decay study. Every driver writes plain CSV files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{ModelKind, RunConfig};
use crate::csv::write_series_csv;
use crate::diagnostics::{
    energy_report, heat_power, load_power, stationarity_gap, transmission_residual, BalanceTracker,
};
use crate::error::{Error, Result};
use crate::grid::{build_grid, Grid};
use crate::integrate::{stable_dt, InterfaceScheme, Stepper};
use crate::limits::{chi_scaled_params, consistency_norms, ChiScanConfig};
use crate::params::{validate_params, PhysicalParams};
use crate::rhs::BeamModel;
use crate::state::{sample_initial_state, FieldState, SampledForcing};
use crate::vonkarman::{sample_vonkarman_state, vonkarman_stable_dt, VonKarmanModel, VonKarmanStepper};

/// Uniform sampling of `[0, t_end]`: `samples` intervals of `steps_per_sample`
/// steps each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps_per_sample: usize,
    pub samples: usize,
}

impl TimeGrid {
    /// Sample interval close to `stride * dt_ref`, adjusted so that `t_end`
    /// is a sample time, and the largest `dt <= dt_max` dividing it.
    pub fn new(t_end: f64, stride: usize, dt_ref: f64, dt_max: f64) -> Self {
        let target = stride.max(1) as f64 * dt_ref;
        let samples = ((t_end / target) - 1e-9).ceil().max(1.0) as usize;
        let interval = t_end / samples as f64;
        let steps_per_sample = ((interval / dt_max) - 1e-9).ceil().max(1.0) as usize;
        Self {
            dt: interval / steps_per_sample as f64,
            steps_per_sample,
            samples,
        }
    }

    pub fn interval(&self) -> f64 {
        self.dt * self.steps_per_sample as f64
    }

    pub fn total_steps(&self) -> usize {
        self.samples * self.steps_per_sample
    }
}

/// Named probe columns collected at the sample times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeSeries {
    pub t: Vec<f64>,
    pub columns: BTreeMap<String, Vec<f64>>,
    pub order: Vec<String>,
}

impl ProbeSeries {
    fn push(&mut self, t: f64, values: Vec<(String, f64)>) {
        self.t.push(t);
        for (name, v) in values {
            if !self.columns.contains_key(&name) {
                self.order.push(name.clone());
            }
            self.columns.entry(name).or_default().push(v);
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.get(name).map(Vec::as_slice)
    }

    /// Writes `t` followed by every column in insertion order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut header = vec!["t"];
        header.extend(self.order.iter().map(String::as_str));
        let rows: Vec<Vec<f64>> = (0..self.t.len())
            .map(|i| {
                std::iter::once(self.t[i])
                    .chain(self.order.iter().map(|c| self.columns[c][i]))
                    .collect()
            })
            .collect();
        write_series_csv(path, &header, &rows)
    }
}

fn probe_label(x: f64) -> String {
    format!("x={x}")
}

fn probe_nodes(probes: &[f64], g: &Grid) -> Result<Vec<usize>> {
    probes
        .iter()
        .map(|&x| {
            g.node_at(x)
                .ok_or_else(|| Error::InvalidConfig(format!("probe x = {x} is not a grid node")))
        })
        .collect()
}

/// Field names and values of a Bresse state at one node.
fn bresse_probe(s: &FieldState, g: &Grid, x: f64, node: usize) -> Vec<(String, f64)> {
    let m = g.interface_index;
    let label = probe_label(x);
    let (names, seg, i) = if node <= m {
        (["phi", "psi", "omega"], &s.damped, node)
    } else {
        (["u", "v", "w"], &s.undamped, node - m)
    };
    (0..3)
        .map(|c| (format!("{}@{label}", names[c]), seg.disp[c][i]))
        .collect()
}

fn vonkarman_probe(
    s: &crate::vonkarman::VonKarmanState,
    g: &Grid,
    x: f64,
    node: usize,
) -> Vec<(String, f64)> {
    let label = probe_label(x);
    let names = if node <= g.interface_index {
        ["phi", "omega"]
    } else {
        ["u", "w"]
    };
    vec![
        (format!("{}@{label}", names[0]), s.transversal[node]),
        (format!("{}@{label}", names[1]), s.longitudinal[node]),
    ]
}

/// Validated pieces of a Bresse-family run.
#[derive(Debug, Clone)]
pub struct BresseSetup {
    pub params: PhysicalParams,
    pub grid: Grid,
    pub forcing: SampledForcing,
    pub initial: FieldState,
    pub model: BeamModel,
    pub scheme: InterfaceScheme,
    pub probes: Vec<(f64, usize)>,
}

impl BresseSetup {
    pub fn from_config(cfg: &RunConfig, model: BeamModel, params: PhysicalParams) -> Result<Self> {
        validate_params(&params)?;
        let grid = build_grid(params.length, params.interface, cfg.n_per_unit)?;
        grid.require_interior(2)?;
        let nodes = probe_nodes(&cfg.probes, &grid)?;
        let params = match model {
            BeamModel::Timoshenko => PhysicalParams { l: 0.0, ..params },
            BeamModel::Bresse => params,
        };
        Ok(Self {
            forcing: cfg.forcing.sample(&grid),
            initial: sample_initial_state(&grid, &cfg.ic),
            params,
            grid,
            model,
            scheme: cfg.interface,
            probes: cfg.probes.iter().copied().zip(nodes).collect(),
        })
    }

    pub fn stable_dt(&self, safety: f64) -> f64 {
        stable_dt(&self.params, &self.grid, safety)
    }

    pub fn stepper(&self, dt: f64, guard_stride: usize) -> Result<Stepper> {
        let mut st = Stepper::new(
            self.params,
            self.grid.clone(),
            self.forcing.clone(),
            self.model,
            self.scheme,
            dt,
        )?;
        st.guard_stride = guard_stride;
        Ok(st)
    }

    fn probe_values(&self, s: &FieldState) -> Vec<(String, f64)> {
        self.probes
            .iter()
            .flat_map(|&(x, node)| bresse_probe(s, &self.grid, x, node))
            .collect()
    }
}

/// Everything computed along one Bresse-family trajectory.
#[derive(Debug, Clone, Default)]
pub struct BresseTrajectory {
    pub probes: ProbeSeries,
    /// Diagnostics rows at the sample times (see [`DIAGNOSTIC_COLUMNS`]).
    pub diagnostics: Vec<Vec<f64>>,
    pub has_lyapunov: bool,
    /// `sup_t` of the consistency norms (`psi + phi_x`, `v + u_x`).
    pub consistency_sup: (f64, f64),
    pub final_state: Option<FieldState>,
    pub steps: usize,
}

pub const DIAGNOSTIC_COLUMNS: [&str; 14] = [
    "t",
    "E",
    "kinetic",
    "thermal",
    "potential",
    "dissipation_rate",
    "lyapunov",
    "stationarity_gap",
    "balance_residual",
    "continuity_phi_u",
    "continuity_psi_v",
    "continuity_omega_w",
    "flux_shear",
    "flux_moment",
];

const FLUX_AXIAL: &str = "flux_axial";

fn diagnostic_header(lyapunov: bool) -> Vec<&'static str> {
    DIAGNOSTIC_COLUMNS
        .iter()
        .copied()
        .filter(|c| lyapunov || *c != "lyapunov")
        .chain(std::iter::once(FLUX_AXIAL))
        .collect()
}

/// Runs a Bresse-family trajectory on `tg`, sampling probes and diagnostics.
pub fn simulate_bresse(
    setup: &BresseSetup,
    tg: TimeGrid,
    mut on_sample: impl FnMut(&FieldState),
) -> Result<BresseTrajectory> {
    let mut st = setup.stepper(tg.dt, tg.steps_per_sample)?;
    let mut s = setup.initial.clone();
    st.prepare(&mut s)?;
    let (p, g, f) = (&setup.params, &setup.grid, &setup.forcing);
    let has_lyapunov = !f.has_heat_sources();
    let mut tracker = BalanceTracker::new(energy_report(&s, p, f, g).total);
    let mut out = BresseTrajectory {
        has_lyapunov,
        ..Default::default()
    };

    let record = |s: &FieldState, residual: f64, out: &mut BresseTrajectory| {
        let r = energy_report(s, p, f, g);
        let tr = transmission_residual(s, p, g);
        let mut row = vec![s.t, r.total, r.kinetic, r.thermal, r.potential, r.dissipation_rate];
        if let Some(l) = r.lyapunov {
            row.push(l);
        }
        row.push(stationarity_gap(s, p, g));
        row.push(residual);
        row.extend(tr.continuity);
        row.extend(tr.flux);
        out.diagnostics.push(row);
        out.probes.push(s.t, setup.probe_values(s));
        let (a, b) = consistency_norms(s, g);
        out.consistency_sup.0 = out.consistency_sup.0.max(a);
        out.consistency_sup.1 = out.consistency_sup.1.max(b);
    };

    let r0 = tracker.push_state(&s, p, f, g);
    record(&s, r0, &mut out);
    on_sample(&s);
    for _ in 0..tg.samples {
        let mut residual = 0.0;
        for _ in 0..tg.steps_per_sample {
            st.step(&mut s)?;
            residual = tracker.push_state(&s, p, f, g);
        }
        if !s.is_finite() {
            return Err(Error::NonFiniteState {
                step: st.steps_taken(),
                t: s.t,
            });
        }
        record(&s, residual, &mut out);
        on_sample(&s);
    }
    out.steps = st.steps_taken();
    out.final_state = Some(s);
    Ok(out)
}

/// Von Kármán trajectory sampled like [`simulate_bresse`].
#[derive(Debug, Clone, Default)]
pub struct VonKarmanTrajectory {
    pub probes: ProbeSeries,
    pub diagnostics: Vec<Vec<f64>>,
    pub steps: usize,
}

pub const VONKARMAN_COLUMNS: [&str; 7] = [
    "t",
    "E",
    "kinetic",
    "thermal",
    "potential",
    "dissipation_rate",
    "balance_residual",
];

pub fn simulate_vonkarman(cfg: &RunConfig, params: PhysicalParams, tg: TimeGrid) -> Result<VonKarmanTrajectory> {
    validate_params(&params)?;
    let g = build_grid(params.length, params.interface, cfg.n_per_unit)?;
    let nodes = probe_nodes(&cfg.probes, &g)?;
    let f = cfg.forcing.sample(&g);
    let model = VonKarmanModel::new(params, g.clone(), &f)?;
    let mut st = VonKarmanStepper::new(model, tg.dt);
    st.guard_stride = tg.steps_per_sample;
    let mut s = sample_vonkarman_state(&g, &cfg.ic);
    st.prepare(&mut s);
    let e0 = st.model.energy(&s);
    let mut tracker = BalanceTracker::new(e0.total);
    let mut out = VonKarmanTrajectory::default();
    let record = |s: &crate::vonkarman::VonKarmanState, st: &VonKarmanStepper, res: f64, out: &mut VonKarmanTrajectory| {
        let e = st.model.energy(s);
        out.diagnostics
            .push(vec![s.t, e.total, e.kinetic, e.thermal, e.potential, e.dissipation_rate, res]);
        let values = cfg
            .probes
            .iter()
            .zip(&nodes)
            .flat_map(|(&x, &n)| vonkarman_probe(s, &g, x, n))
            .collect();
        out.probes.push(s.t, values);
    };
    let r0 = tracker.push(s.t, e0.total, e0.dissipation_rate, st.model.source_power(&s));
    record(&s, &st, r0, &mut out);
    for k in 0..tg.samples {
        let mut res = 0.0;
        for _ in 0..tg.steps_per_sample {
            st.step(&mut s)?;
            let e = st.model.energy(&s);
            res = tracker.push(s.t, e.total, e.dissipation_rate, st.model.source_power(&s));
        }
        if !s.is_finite() {
            return Err(Error::NonFiniteState {
                step: (k + 1) * tg.steps_per_sample,
                t: s.t,
            });
        }
        record(&s, &st, res, &mut out);
    }
    out.steps = tg.total_steps();
    Ok(out)
}

/// Summary of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_energy: f64,
    pub max_abs_balance_residual: f64,
    pub max_transmission_flux: f64,
    pub max_transmission_continuity: f64,
    pub steps: usize,
    pub dt: f64,
    pub wall_time_s: f64,
    pub files: Vec<PathBuf>,
}

fn snapshot_rows(s: &FieldState, g: &Grid) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = (0..s.damped.len())
        .map(|i| {
            let mut r = vec![g.damped_x()[i]];
            r.extend((0..3).map(|c| s.damped.disp[c][i]));
            r.extend((0..3).map(|c| s.damped.vel[c][i]));
            r.push(s.xi[i]);
            r.push(s.theta[i]);
            r
        })
        .collect();
    let u = (0..s.undamped.len())
        .map(|i| {
            let mut r = vec![g.undamped_x()[i]];
            r.extend((0..3).map(|c| s.undamped.disp[c][i]));
            r.extend((0..3).map(|c| s.undamped.vel[c][i]));
            r
        })
        .collect();
    (d, u)
}

fn write_probe_files(series: &ProbeSeries, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    for name in &series.order {
        let path = dir.join("probes").join(format!("{}.csv", name.replace('@', "_")));
        let rows: Vec<Vec<f64>> = series
            .t
            .iter()
            .zip(&series.columns[name])
            .map(|(t, v)| vec![*t, *v])
            .collect();
        write_series_csv(&path, &["t", name], &rows)?;
        files.push(path);
    }
    Ok(())
}

/// Builds the grid, samples the initial data, steps to `t_end` and writes
/// probe series, diagnostics and optional snapshots below `cfg.outdir`.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let mut files = Vec::new();
    let dir = cfg.outdir.clone();
    match cfg.model {
        ModelKind::VonKarman => {
            let p = cfg.params;
            let g = build_grid(p.length, p.interface, cfg.n_per_unit)?;
            let dt = vonkarman_stable_dt(&p, &g, cfg.time.safety);
            let tg = TimeGrid::new(cfg.time.t_end, cfg.time.output_stride, dt, dt);
            let traj = simulate_vonkarman(cfg, p, tg)?;
            write_probe_files(&traj.probes, &dir, &mut files)?;
            let path = dir.join("diagnostics.csv");
            write_series_csv(&path, &VONKARMAN_COLUMNS, &traj.diagnostics)?;
            files.push(path);
            let last = traj.diagnostics.last().cloned().unwrap_or_default();
            Ok(RunSummary {
                final_energy: last.get(1).copied().unwrap_or(0.0),
                max_abs_balance_residual: traj
                    .diagnostics
                    .iter()
                    .map(|r| r[6].abs())
                    .fold(0.0, f64::max),
                max_transmission_flux: 0.0,
                max_transmission_continuity: 0.0,
                steps: traj.steps,
                dt: tg.dt,
                wall_time_s: start.elapsed().as_secs_f64(),
                files,
            })
        }
        ModelKind::Bresse | ModelKind::Timoshenko => {
            let model = if cfg.model == ModelKind::Bresse {
                BeamModel::Bresse
            } else {
                BeamModel::Timoshenko
            };
            let setup = BresseSetup::from_config(cfg, model, cfg.params)?;
            let dt = setup.stable_dt(cfg.time.safety);
            let tg = TimeGrid::new(cfg.time.t_end, cfg.time.output_stride, dt, dt);
            let snap_every = cfg
                .time
                .snapshot_stride
                .map(|s| (s / tg.steps_per_sample).max(1));
            let mut snaps = Vec::new();
            let mut count = 0usize;
            let traj = simulate_bresse(&setup, tg, |s| {
                if let Some(every) = snap_every {
                    if count.is_multiple_of(every) {
                        snaps.push(s.clone());
                    }
                }
                count += 1;
            })?;
            write_probe_files(&traj.probes, &dir, &mut files)?;
            let header = diagnostic_header(traj.has_lyapunov);
            let path = dir.join("diagnostics.csv");
            write_series_csv(&path, &header, &traj.diagnostics)?;
            files.push(path);
            for (k, s) in snaps.iter().enumerate() {
                let (d, u) = snapshot_rows(s, &setup.grid);
                let pd = dir.join("snapshots").join(format!("damped_{k:05}.csv"));
                write_series_csv(
                    &pd,
                    &["x", "phi", "psi", "omega", "phi_t", "psi_t", "omega_t", "xi", "theta"],
                    &d,
                )?;
                let pu = dir.join("snapshots").join(format!("undamped_{k:05}.csv"));
                write_series_csv(&pu, &["x", "u", "v", "w", "u_t", "v_t", "w_t"], &u)?;
                files.push(pd);
                files.push(pu);
            }
            let bal = header.iter().position(|c| *c == "balance_residual").unwrap();
            let cont = bal + 1;
            let fin = traj.final_state.as_ref().expect("final state");
            Ok(RunSummary {
                final_energy: crate::diagnostics::total_energy(fin, &setup.params, &setup.grid).total,
                max_abs_balance_residual: traj
                    .diagnostics
                    .iter()
                    .map(|r| r[bal].abs())
                    .fold(0.0, f64::max),
                max_transmission_continuity: traj
                    .diagnostics
                    .iter()
                    .flat_map(|r| r[cont..cont + 3].iter().map(|v| v.abs()))
                    .fold(0.0, f64::max),
                max_transmission_flux: traj
                    .diagnostics
                    .iter()
                    .flat_map(|r| r[cont + 3..].iter().map(|v| v.abs()))
                    .fold(0.0, f64::max),
                steps: traj.steps,
                dt: tg.dt,
                wall_time_s: start.elapsed().as_secs_f64(),
                files,
            })
        }
    }
}

/// Rows of sup-over-time probe differences against a reference run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let header: Vec<&str> = self.header.iter().map(String::as_str).collect();
        write_series_csv(path, &header, &self.rows)
    }
}

fn sup_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn param_tag(v: f64) -> String {
    format!("{v}")
}

/// Curvature scan: each `l` against the straight-beam run (`l = 0` denotes
/// the straight model itself). All runs share grid and time step.
pub fn run_l_limit_scan(cfg: &RunConfig, l_values: &[f64]) -> Result<ConvergenceTable> {
    let base = BresseSetup::from_config(cfg, BeamModel::Timoshenko, cfg.params)?;
    let dt = base.stable_dt(cfg.time.safety);
    let tg = TimeGrid::new(cfg.time.t_end, cfg.time.output_stride, dt, dt);

    let mut jobs: Vec<f64> = vec![0.0];
    jobs.extend(l_values.iter().copied().filter(|&l| l != 0.0));
    let runs: Vec<Result<ProbeSeries>> = jobs
        .par_iter()
        .map(|&l| {
            let (model, params) = if l == 0.0 {
                (BeamModel::Timoshenko, cfg.params)
            } else {
                (BeamModel::Bresse, PhysicalParams { l, ..cfg.params })
            };
            let setup = BresseSetup::from_config(cfg, model, params)?;
            Ok(simulate_bresse(&setup, tg, |_| {})?.probes)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = &runs[0];
    let by_l: BTreeMap<String, &ProbeSeries> = jobs
        .iter()
        .zip(&runs)
        .map(|(l, r)| (param_tag(*l), r))
        .collect();

    let dir = cfg.outdir.join("l-scan");
    for (l, series) in &by_l {
        series.write_csv(&dir.join(format!("probes_l={l}.csv")))?;
    }
    let mut header = vec!["l".to_string()];
    header.extend(reference.order.iter().map(|c| format!("max|d {c}|")));
    let rows = l_values
        .iter()
        .map(|&l| {
            let series = by_l[&param_tag(l)];
            std::iter::once(l)
                .chain(
                    reference
                        .order
                        .iter()
                        .map(|c| sup_difference(&series.columns[c], &reference.columns[c])),
                )
                .collect()
        })
        .collect();
    let table = ConvergenceTable { header, rows };
    table.write_csv(&dir.join("convergence.csv"))?;
    Ok(table)
}

/// Double-limit scan: Bresse runs with scaled `l`, `k1`, `k2` against one
/// von Kármán run on the same grid and sample times.
pub fn run_chi_scan(cfg: &RunConfig, chi: &ChiScanConfig) -> Result<ConvergenceTable> {
    let base = chi.base_params(&cfg.params);
    let g = build_grid(base.length, base.interface, cfg.n_per_unit)?;
    let dt_ref = stable_dt(&base, &g, cfg.time.safety);

    enum Job {
        Reference,
        Scaled(f64),
    }
    let mut jobs = vec![Job::Reference];
    jobs.extend(chi.chi_values.iter().map(|&c| Job::Scaled(c)));

    struct Outcome {
        probes: ProbeSeries,
        consistency: (f64, f64),
    }
    let results: Vec<Result<Outcome>> = jobs
        .par_iter()
        .map(|job| match *job {
            Job::Reference => {
                let dt = vonkarman_stable_dt(&base, &g, cfg.time.safety);
                let tg = TimeGrid::new(cfg.time.t_end, cfg.time.output_stride, dt_ref, dt);
                Ok(Outcome {
                    probes: simulate_vonkarman(cfg, base, tg)?.probes,
                    consistency: (0.0, 0.0),
                })
            }
            Job::Scaled(c) => {
                let params = chi_scaled_params(&base, c);
                let setup = BresseSetup::from_config(cfg, BeamModel::Bresse, params)?;
                let tg = TimeGrid::new(
                    cfg.time.t_end,
                    cfg.time.output_stride,
                    dt_ref,
                    setup.stable_dt(cfg.time.safety),
                );
                let traj = simulate_bresse(&setup, tg, |_| {})?;
                Ok(Outcome {
                    probes: traj.probes,
                    consistency: traj.consistency_sup,
                })
            }
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = &results[0].probes;

    let dir = cfg.outdir.join("chi-scan");
    reference.write_csv(&dir.join("probes_vonkarman.csv"))?;
    let mut header = vec!["chi".to_string()];
    header.extend(reference.order.iter().map(|c| format!("max|d {c}|")));
    header.push("sup|psi+phi_x|".into());
    header.push("sup|v+u_x|".into());
    let mut rows = Vec::new();
    for (c, out) in chi.chi_values.iter().zip(&results[1..]) {
        out.probes
            .write_csv(&dir.join(format!("probes_chi={}.csv", param_tag(*c))))?;
        let mut row = vec![*c];
        row.extend(
            reference
                .order
                .iter()
                .map(|name| sup_difference(&out.probes.columns[name], &reference.columns[name])),
        );
        row.push(out.consistency.0);
        row.push(out.consistency.1);
        rows.push(row);
    }
    let table = ConvergenceTable { header, rows };
    table.write_csv(&dir.join("convergence.csv"))?;
    Ok(table)
}

/// Options of the decay study.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    /// Fractions of the initial stationarity gap whose first crossing is
    /// reported.
    pub fractions: Vec<f64>,
    /// The run continues past `t_end` up to this time until the smallest
    /// fraction has been crossed.
    pub max_horizon: f64,
    /// Per-step tolerance of the monotonicity check, relative to `E(0)`.
    pub tolerance: f64,
    /// Width of the time windows whose maxima form the gap envelope.
    pub window: f64,
}

/// Time a signal at the slowest wave speed needs to cross the beam and
/// return.
pub fn round_trip_time(p: &PhysicalParams) -> f64 {
    let c2 = [
        p.k1 / p.rho1,
        p.k2 / p.rho2,
        p.sigma / p.rho1,
        p.sigma / p.rho2,
        p.nu1 / p.beta1,
        p.nu2 / p.beta2,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    2.0 * p.length / c2.sqrt()
}

impl DecayOptions {
    pub fn for_config(cfg: &RunConfig) -> Self {
        Self {
            fractions: vec![0.1, 0.01, 0.001],
            max_horizon: cfg.time.t_end.max(1.0) * 10.0,
            tolerance: 1e-10,
            window: round_trip_time(&cfg.params),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// `(t, E, L, gap)` at the sample times.
    pub samples: Vec<[f64; 4]>,
    /// First time the gap falls below `fraction * gap(0)`, if it does.
    pub thresholds: Vec<(f64, Option<f64>)>,
    pub initial_energy: f64,
    /// Largest single-step increase of `E`, relative to `E(0)`.
    pub max_energy_increase: f64,
    /// Largest single-step increase of `L`, relative to `E(0)`.
    pub max_lyapunov_increase: f64,
    pub lyapunov_monotone: bool,
    /// Maximum of the gap over consecutive windows of `DecayOptions::window`.
    pub envelope: Vec<f64>,
    /// The envelope does not increase after its largest value.
    pub monotone_after_peak: bool,
    pub t_final: f64,
    pub steps: usize,
}

impl DecayReport {
    pub fn crossing(&self, fraction: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .find(|(f, _)| (*f - fraction).abs() < 1e-15)
            .and_then(|(_, t)| *t)
    }
}

/// Long-time run without heat sources, checking the Lyapunov property at
/// every step and recording the stationarity gap.
pub fn run_decay(cfg: &RunConfig, opts: &DecayOptions) -> Result<DecayReport> {
    if cfg.forcing.has_heat_sources() {
        return Err(Error::HeatSourcePresent);
    }
    let model = match cfg.model {
        ModelKind::Bresse => BeamModel::Bresse,
        ModelKind::Timoshenko => BeamModel::Timoshenko,
        ModelKind::VonKarman => {
            return Err(Error::InvalidConfig(
                "the decay study supports the bresse and timoshenko models".into(),
            ))
        }
    };
    let setup = BresseSetup::from_config(cfg, model, cfg.params)?;
    if setup.forcing.has_heat_sources() {
        return Err(Error::HeatSourcePresent);
    }
    let (p, g, f) = (&setup.params, &setup.grid, &setup.forcing);
    let dt = setup.stable_dt(cfg.time.safety);
    let tg = TimeGrid::new(cfg.time.t_end, cfg.time.output_stride, dt, dt);
    let mut st = setup.stepper(tg.dt, tg.steps_per_sample)?;
    let mut s = setup.initial.clone();
    st.prepare(&mut s)?;

    let lyap = |s: &FieldState| {
        let r = energy_report(s, p, f, g);
        (r.total, r.lyapunov.expect("no heat sources"))
    };
    let (e0, l0) = lyap(&s);
    let gap0 = stationarity_gap(&s, p, g);
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    let mut samples = vec![[0.0, e0, l0, gap0]];
    let mut thresholds: Vec<(f64, Option<f64>)> = opts
        .fractions
        .iter()
        .map(|&fr| (fr, (gap0 <= fr * gap0).then_some(0.0)))
        .collect();
    let (mut prev_e, mut prev_l) = (e0, l0);
    let (mut max_de, mut max_dl) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut k = 0usize;
    let interval = tg.interval();
    loop {
        for _ in 0..tg.steps_per_sample {
            st.step(&mut s)?;
            let (e, l) = lyap(&s);
            max_de = max_de.max((e - prev_e) / scale);
            max_dl = max_dl.max((l - prev_l) / scale);
            prev_e = e;
            prev_l = l;
            let gap = stationarity_gap(&s, p, g);
            for (fr, t) in thresholds.iter_mut() {
                if t.is_none() && gap <= *fr * gap0 {
                    *t = Some(s.t);
                }
            }
        }
        k += 1;
        let t = k as f64 * interval;
        samples.push([t, prev_e, prev_l, stationarity_gap(&s, p, g)]);
        let done_base = k >= tg.samples;
        let all_crossed = thresholds.iter().all(|(_, t)| t.is_some());
        if done_base && (all_crossed || t >= opts.max_horizon - 1e-9) {
            break;
        }
    }
    if !s.is_finite() {
        return Err(Error::NonFiniteState {
            step: st.steps_taken(),
            t: s.t,
        });
    }

    let t_final = samples.last().map(|r| r[0]).unwrap_or(0.0);
    let width = opts.window.max(interval);
    let windows = (t_final / width - 1e-9).ceil().max(1.0) as usize;
    let mut envelope = vec![0.0f64; windows];
    for r in &samples {
        let w = (((r[0] / width) - 1e-12).max(0.0).floor() as usize).min(windows - 1);
        envelope[w] = envelope[w].max(r[3]);
    }
    let peak = envelope
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > envelope[best] { i } else { best });
    let monotone_after_peak = envelope[peak..].windows(2).all(|w| w[1] <= w[0]);
    if max_de == f64::NEG_INFINITY {
        max_de = 0.0;
        max_dl = 0.0;
    }
    Ok(DecayReport {
        samples,
        thresholds,
        initial_energy: e0,
        max_energy_increase: max_de,
        max_lyapunov_increase: max_dl,
        lyapunov_monotone: max_dl <= opts.tolerance,
        envelope,
        monotone_after_peak,
        t_final,
        steps: st.steps_taken(),
    })
}

/// Writes the decay samples and the threshold table below `cfg.outdir`.
pub fn write_decay_report(report: &DecayReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let samples = dir.join("decay").join("series.csv");
    let rows: Vec<Vec<f64>> = report.samples.iter().map(|r| r.to_vec()).collect();
    write_series_csv(&samples, &["t", "E", "lyapunov", "stationarity_gap"], &rows)?;
    let thr = dir.join("decay").join("thresholds.csv");
    let rows: Vec<Vec<f64>> = report
        .thresholds
        .iter()
        .filter_map(|(f, t)| t.map(|t| vec![*f, t]))
        .collect();
    write_series_csv(&thr, &["fraction", "t_first_below"], &rows)?;
    Ok(vec![samples, thr])
}

/// Power of all sources at `s`; exposed for external balance checks.
pub fn source_power(s: &FieldState, f: &SampledForcing, g: &Grid) -> f64 {
    load_power(s, f, g) + heat_power(s, f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::state::{ForcingSet, InitialData};

    fn short(cfg: &mut RunConfig, t_end: f64, dir: &Path) {
        cfg.time.t_end = t_end;
        cfg.outdir = dir.to_path_buf();
    }

    #[test]
    fn time_grid_hits_end_exactly() {
        let tg = TimeGrid::new(1.0, 10, 0.0045, 0.0045);
        assert!(tg.dt <= 0.0045);
        assert!((tg.interval() * tg.samples as f64 - 1.0).abs() < 1e-12);
        let tg2 = TimeGrid::new(1.0, 10, 0.0045, 0.001);
        assert_eq!(tg2.samples, tg.samples);
        assert!(tg2.dt <= 0.001);
    }

    #[test]
    fn zero_run_writes_zero_columns() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = preset("paper-5.1").unwrap();
        short(&mut cfg, 0.2, dir.path());
        cfg.ic = InitialData::default();
        cfg.forcing = ForcingSet::default();
        let summary = run_simulation(&cfg).unwrap();
        assert_eq!(summary.final_energy, 0.0);
        for file in &summary.files {
            let text = std::fs::read_to_string(file).unwrap();
            for line in text.lines().skip(1) {
                assert!(line.split(',').skip(1).all(|v| v == "0"), "{file:?}: {line}");
            }
        }
        assert!(summary.files.iter().any(|f| f.ends_with("probes/phi_x=2.csv")));
    }

    #[test]
    fn cfl_violation_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = preset("paper-5.1").unwrap();
        short(&mut cfg, 5.0, dir.path());
        cfg.time.safety = 4.0;
        let err = run_simulation(&cfg).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn identical_configs_give_identical_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut cfg = preset("paper-5.1").unwrap();
        short(&mut cfg, 0.3, a.path());
        let sa = run_simulation(&cfg).unwrap();
        cfg.outdir = b.path().to_path_buf();
        let sb = run_simulation(&cfg).unwrap();
        for (fa, fb) in sa.files.iter().zip(&sb.files) {
            assert_eq!(std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap());
        }
    }

    #[test]
    fn l_scan_self_comparison() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = preset("paper-5.1").unwrap();
        short(&mut cfg, 0.2, dir.path());
        let t = run_l_limit_scan(&cfg, &[0.0]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0][1..].iter().all(|&v| v == 0.0));
        let t = run_l_limit_scan(&cfg, &[0.05, 0.05]).unwrap();
        assert_eq!(t.rows[0], t.rows[1]);
        assert!(t.rows[0][1..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn chi_scan_models_differ() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = preset("paper-5.2").unwrap();
        short(&mut cfg, 0.2, dir.path());
        let chi = ChiScanConfig {
            chi_values: vec![1.0],
            ..Default::default()
        };
        let t = run_chi_scan(&cfg, &chi).unwrap();
        assert!(t.rows[0][1..].iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn decay_rejects_heat_sources() {
        let cfg = preset("paper-5.1").unwrap();
        let r = run_decay(&cfg, &DecayOptions::for_config(&cfg));
        assert!(matches!(r, Err(Error::HeatSourcePresent)));
    }

    #[test]
    fn decay_of_zero_state() {
        let mut cfg = preset("paper-5.1").unwrap();
        cfg.time.t_end = 0.5;
        cfg.ic = InitialData::default();
        cfg.forcing = ForcingSet::default();
        let r = run_decay(&cfg, &DecayOptions::for_config(&cfg)).unwrap();
        assert!(r.samples.iter().all(|s| s[3] == 0.0));
        assert!(r.thresholds.iter().all(|(_, t)| *t == Some(0.0)));
        assert!(r.lyapunov_monotone);
    }
}
