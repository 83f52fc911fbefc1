//! Explicit time stepping: velocity Verlet for the mechanical fields, forward
//! Euler for the temperatures.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::interface::{solve_interface_displacements, solve_interface_velocities};
use crate::params::{PhysicalParams, Segment};
use crate::rhs::{accelerations, heat_rates, BeamModel};
use crate::state::{apply_dirichlet, FieldState, SampledForcing};

/// How the interface node is advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterfaceScheme {
    /// The interface traces are recomputed from the one-sided transmission
    /// system after every position and velocity update.
    #[default]
    OneSided,
    /// The interface node carries the lumped mass of both adjacent half cells
    /// and is advanced like every other node; the flux conditions hold weakly.
    Conservative,
}

impl std::str::FromStr for InterfaceScheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "conservative" => Ok(Self::Conservative),
            "one-sided" | "one_sided" => Ok(Self::OneSided),
            other => Err(format!("unknown interface scheme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub safety: f64,
    pub t_end: f64,
    pub output_stride: usize,
}

impl StepControl {
    pub fn new(p: &PhysicalParams, g: &Grid, safety: f64, t_end: f64, output_stride: usize) -> Self {
        Self {
            dt: stable_dt(p, g, safety),
            safety,
            t_end,
            output_stride: output_stride.max(1),
        }
    }

    /// Number of steps needed to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Largest wave speed over both segments.
pub fn max_wave_speed(p: &PhysicalParams, include_shear: bool) -> f64 {
    [Segment::Damped, Segment::Undamped]
        .iter()
        .map(|&s| {
            let c = p.segment(s);
            let mut v = (c.nu / c.beta).sqrt().max((p.sigma / c.rho).sqrt());
            if include_shear {
                v = v.max((c.k / c.rho).sqrt());
            }
            v
        })
        .fold(0.0, f64::max)
}

fn parabolic_dt(p: &PhysicalParams, h: f64) -> f64 {
    h * h / (2.0 * (p.mu / p.gamma).max(p.lambda / p.delta))
}

/// `safety * min(h / c_max, h^2 / (2 max(mu/gamma, lambda/delta)))`.
pub fn stable_dt(p: &PhysicalParams, g: &Grid, safety: f64) -> f64 {
    let dt_hyp = g.h / max_wave_speed(p, true);
    safety * dt_hyp.min(parabolic_dt(p, g.h))
}

type Acc = ([Vec<f64>; 3], [Vec<f64>; 3]);

/// Owns the cached accelerations between steps of one trajectory.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub params: PhysicalParams,
    pub grid: Grid,
    pub forcing: SampledForcing,
    pub model: BeamModel,
    pub scheme: InterfaceScheme,
    pub dt: f64,
    pub guard_stride: usize,
    steps: usize,
    cached: Option<Acc>,
}

impl Stepper {
    pub fn new(
        params: PhysicalParams,
        grid: Grid,
        forcing: SampledForcing,
        model: BeamModel,
        scheme: InterfaceScheme,
        dt: f64,
    ) -> Result<Self> {
        grid.require_interior(2)?;
        Ok(Self {
            params,
            grid,
            forcing,
            model,
            scheme,
            dt,
            guard_stride: 1,
            steps: 0,
            cached: None,
        })
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    fn acc(&self, s: &FieldState) -> Acc {
        accelerations(s, &self.params, &self.forcing, &self.grid, self.model)
    }

    fn curvature(&self) -> f64 {
        match self.model {
            BeamModel::Bresse => self.params.l,
            BeamModel::Timoshenko => 0.0,
        }
    }

    /// Brings a fresh state into the admissible set used by the scheme.
    pub fn prepare(&mut self, s: &mut FieldState) -> Result<()> {
        apply_dirichlet(s);
        if self.scheme == InterfaceScheme::OneSided {
            solve_interface_displacements(s, &self.params, &self.grid)?;
            solve_interface_velocities(s, &self.params, &self.grid)?;
        }
        self.cached = None;
        Ok(())
    }

    /// Advances `s` by one step of length `dt`.
    pub fn step(&mut self, s: &mut FieldState) -> Result<()> {
        let dt = self.dt;
        let (a0d, a0u) = match self.cached.take() {
            Some(a) => a,
            None => self.acc(s),
        };
        let (xi_t, theta_t) = heat_rates(s, &self.params, &self.forcing, &self.grid, self.curvature());

        let one_sided = self.scheme == InterfaceScheme::OneSided;
        let nd = s.damped.len();
        for c in 0..3 {
            let (x, v) = (&mut s.damped.disp[c], &s.damped.vel[c]);
            let hi = if one_sided { nd - 1 } else { nd };
            for i in 1..hi {
                x[i] += dt * v[i] + 0.5 * dt * dt * a0d[c][i];
            }
            let (x, v) = (&mut s.undamped.disp[c], &s.undamped.vel[c]);
            let lo = if one_sided { 1 } else { 0 };
            for i in lo..x.len() - 1 {
                x[i] += dt * v[i] + 0.5 * dt * dt * a0u[c][i];
            }
            if !one_sided {
                s.undamped.disp[c][0] = s.damped.disp[c][nd - 1];
            }
        }
        for i in 1..s.xi.len() - 1 {
            s.xi[i] += dt * xi_t[i];
            s.theta[i] += dt * theta_t[i];
        }
        apply_dirichlet(s);
        if one_sided {
            solve_interface_displacements(s, &self.params, &self.grid)?;
        }

        let (a1d, a1u) = self.acc(s);
        for c in 0..3 {
            let v = &mut s.damped.vel[c];
            let hi = if one_sided { nd - 1 } else { nd };
            for i in 1..hi {
                v[i] += 0.5 * dt * (a0d[c][i] + a1d[c][i]);
            }
            let v = &mut s.undamped.vel[c];
            let lo = if one_sided { 1 } else { 0 };
            for i in lo..v.len() - 1 {
                v[i] += 0.5 * dt * (a0u[c][i] + a1u[c][i]);
            }
            if !one_sided {
                s.undamped.vel[c][0] = s.damped.vel[c][nd - 1];
            }
        }
        if one_sided {
            solve_interface_velocities(s, &self.params, &self.grid)?;
        }
        self.cached = Some((a1d, a1u));
        self.steps += 1;
        s.t = self.steps as f64 * dt;

        if self.steps.is_multiple_of(self.guard_stride.max(1)) && !s.is_finite() {
            return Err(Error::NonFiniteState {
                step: self.steps,
                t: s.t,
            });
        }
        Ok(())
    }
}

/// One stateless step (accelerations recomputed from `s`).
#[allow(clippy::too_many_arguments)]
pub fn step_explicit(
    s: &FieldState,
    p: &PhysicalParams,
    f: &SampledForcing,
    g: &Grid,
    model: BeamModel,
    scheme: InterfaceScheme,
    dt: f64,
) -> Result<FieldState> {
    let mut stepper = Stepper::new(*p, g.clone(), f.clone(), model, scheme, dt)?;
    let mut out = s.clone();
    let t0 = s.t;
    stepper.prepare(&mut out)?;
    stepper.step(&mut out)?;
    out.t = t0 + dt;
    Ok(out)
}

/// Thomas algorithm for a tridiagonal system. `lower[0]` and
/// `upper[n - 1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..n {
        let a = if i > 0 { lower[i] } else { 0.0 };
        let m = diag[i] - a * prev_c;
        if m == 0.0 || !m.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - a * prev_d) / m;
        prev_c = c[i];
        prev_d = d[i];
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}
