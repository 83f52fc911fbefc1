//! Thermoelastic von Kármán transmission beam with rotational inertia.
//!
//! Transversal and longitudinal displacements are stored as whole-beam
//! arrays, so value and slope continuity at the interface hold by
//! construction. The discrete energy is
//!
//! ```text
//! K = 1/2 sum w rho (phi_t^2 + omega_t^2) + 1/2 sum_cells h beta (D phi_t)^2
//! V = 1/2 sum B kappa^2 + 1/2 sum_cells h sigma (D omega + (D phi)^2 / 2)^2
//! ```
//!
//! with nodal second differences `kappa` (ghost values mirror the clamped
//! ends) and bending weights `B` that split `nu` between the half cells.
//! Forces are the exact gradient of `V` plus the thermal coupling, so the
//! moment and shear transmission conditions are imposed naturally.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::integrate::{max_wave_speed, solve_tridiagonal};
use crate::limits::derivative;
use crate::params::PhysicalParams;
use crate::state::{InitialData, SampledForcing};

#[derive(Debug, Clone, PartialEq)]
pub struct VonKarmanState {
    /// Transversal displacement over the whole beam (`phi` then `u`).
    pub transversal: Vec<f64>,
    /// Longitudinal displacement over the whole beam (`omega` then `w`).
    pub longitudinal: Vec<f64>,
    pub transversal_t: Vec<f64>,
    pub longitudinal_t: Vec<f64>,
    pub xi: Vec<f64>,
    pub theta: Vec<f64>,
    pub t: f64,
    pub interface_index: usize,
}

impl VonKarmanState {
    pub fn zeros(g: &Grid) -> Self {
        let n = g.n_total;
        Self {
            transversal: vec![0.0; n],
            longitudinal: vec![0.0; n],
            transversal_t: vec![0.0; n],
            longitudinal_t: vec![0.0; n],
            xi: vec![0.0; g.damped_len()],
            theta: vec![0.0; g.damped_len()],
            t: 0.0,
            interface_index: g.interface_index,
        }
    }

    pub fn phi(&self) -> &[f64] {
        &self.transversal[..=self.interface_index]
    }

    pub fn u(&self) -> &[f64] {
        &self.transversal[self.interface_index..]
    }

    pub fn omega(&self) -> &[f64] {
        &self.longitudinal[..=self.interface_index]
    }

    pub fn w(&self) -> &[f64] {
        &self.longitudinal[self.interface_index..]
    }

    pub fn is_finite(&self) -> bool {
        [
            &self.transversal,
            &self.longitudinal,
            &self.transversal_t,
            &self.longitudinal_t,
            &self.xi,
            &self.theta,
        ]
        .iter()
        .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Largest violation of the clamped-end and heat Dirichlet rows.
    /// The clamped slopes are built into the curvature stencil and are not
    /// part of this check.
    pub fn boundary_defect(&self) -> f64 {
        let n = self.transversal.len();
        let m = self.interface_index;
        let phi = &self.transversal;
        [
            phi[0],
            phi[n - 1],
            self.longitudinal[0],
            self.longitudinal[n - 1],
            self.xi[0],
            self.xi[m],
            self.theta[0],
            self.theta[m],
        ]
        .iter()
        .fold(0.0, |a: f64, v| a.max(v.abs()))
    }
}

/// Samples `phi0/u0`, `omega0/w0`, their velocities and the temperatures.
/// Shear-angle entries are ignored.
pub fn sample_vonkarman_state(g: &Grid, ic: &InitialData) -> VonKarmanState {
    let m = g.interface_index;
    let mut s = VonKarmanState::zeros(g);
    for (i, &x) in g.x.iter().enumerate() {
        let left = i <= m;
        let pick = |a: &crate::expr::Expr, b: &crate::expr::Expr| if left { a.eval(x) } else { b.eval(x) };
        s.transversal[i] = pick(&ic.phi0, &ic.u0);
        s.longitudinal[i] = pick(&ic.omega0, &ic.w0);
        s.transversal_t[i] = pick(&ic.phi1, &ic.u1);
        s.longitudinal_t[i] = pick(&ic.omega1, &ic.w1);
    }
    for (i, &x) in g.damped_x().iter().enumerate() {
        s.xi[i] = ic.xi0.eval(x);
        s.theta[i] = ic.theta0.eval(x);
    }
    apply_vonkarman_dirichlet(&mut s);
    s
}

pub fn apply_vonkarman_dirichlet(s: &mut VonKarmanState) {
    let n = s.transversal.len();
    let m = s.interface_index;
    for v in [
        &mut s.transversal,
        &mut s.longitudinal,
        &mut s.transversal_t,
        &mut s.longitudinal_t,
    ] {
        v[0] = 0.0;
        v[n - 1] = 0.0;
    }
    for v in [&mut s.xi, &mut s.theta] {
        v[0] = 0.0;
        v[m] = 0.0;
    }
}

/// `safety * min(h / c, parabolic bound)` with shear speeds excluded.
pub fn vonkarman_stable_dt(p: &PhysicalParams, g: &Grid, safety: f64) -> f64 {
    let dt_hyp = g.h / max_wave_speed(p, false);
    let dt_par = g.h * g.h / (2.0 * (p.mu / p.gamma).max(p.lambda / p.delta));
    safety * dt_hyp.min(dt_par)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VonKarmanEnergy {
    pub kinetic: f64,
    pub potential: f64,
    pub thermal: f64,
    pub total: f64,
    pub dissipation_rate: f64,
}

/// Precomputed operators of one von Kármán run.
#[derive(Debug, Clone)]
pub struct VonKarmanModel {
    pub params: PhysicalParams,
    pub grid: Grid,
    /// Nodal trapezoid weights times density.
    lumped_rho: Vec<f64>,
    /// Rotational inertia per cell.
    cell_beta: Vec<f64>,
    bending: Vec<f64>,
    weights: Vec<f64>,
    load_t: Vec<f64>,
    load_l: Vec<f64>,
    heat: [Vec<f64>; 2],
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl VonKarmanModel {
    pub fn new(params: PhysicalParams, grid: Grid, f: &SampledForcing) -> Result<Self> {
        grid.require_interior(2)?;
        let n = grid.n_total;
        let m = grid.interface_index;
        let h = grid.h;
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        let side = |i: usize, a: f64, b: f64| if i < m { a } else { b };
        let p = &params;
        let lumped_rho: Vec<f64> = (0..n)
            .map(|i| {
                if i == m {
                    0.5 * h * (p.rho1 + p.rho2)
                } else {
                    weights[i] * side(i, p.rho1, p.rho2)
                }
            })
            .collect();
        let bending: Vec<f64> = (0..n)
            .map(|i| {
                if i == m {
                    0.5 * h * (p.nu1 + p.nu2)
                } else {
                    weights[i] * side(i, p.nu1, p.nu2)
                }
            })
            .collect();
        let cell_beta: Vec<f64> = (0..n - 1)
            .map(|c| if c < m { p.beta1 } else { p.beta2 })
            .collect();

        let rx_d = derivative(&f.damped[1], h);
        let rx_u = derivative(&f.undamped[1], h);
        let wd = grid.trapezoid_weights(grid.damped_len());
        let wu = grid.trapezoid_weights(grid.undamped_len());
        let mut load_t = vec![0.0; n];
        let mut load_l = vec![0.0; n];
        for i in 0..=m {
            load_t[i] += wd[i] * (f.damped[0][i] + rx_d[i]);
            load_l[i] += wd[i] * f.damped[2][i];
        }
        for j in 0..grid.undamped_len() {
            load_t[m + j] += wu[j] * (f.undamped[0][j] + rx_u[j]);
            load_l[m + j] += wu[j] * f.undamped[2][j];
        }

        let k = n - 2;
        let mut lower = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut upper = vec![0.0; k];
        for r in 0..k {
            let i = r + 1;
            diag[r] = lumped_rho[i] + (cell_beta[i - 1] + cell_beta[i]) / h;
            lower[r] = -cell_beta[i - 1] / h;
            upper[r] = -cell_beta[i] / h;
        }
        Ok(Self {
            heat: f.heat.clone(),
            params,
            grid,
            lumped_rho,
            cell_beta,
            bending,
            weights,
            load_t,
            load_l,
            lower,
            diag,
            upper,
        })
    }

    fn curvature(&self, phi: &[f64]) -> Vec<f64> {
        let n = phi.len();
        let h2 = self.grid.h * self.grid.h;
        let mut k = vec![0.0; n];
        for i in 1..n - 1 {
            k[i] = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / h2;
        }
        k[0] = 2.0 * (phi[1] - phi[0]) / h2;
        k[n - 1] = 2.0 * (phi[n - 2] - phi[n - 1]) / h2;
        k
    }

    /// Generalized forces on every node (transversal, longitudinal).
    pub fn forces(&self, s: &VonKarmanState) -> (Vec<f64>, Vec<f64>) {
        let p = &self.params;
        let h = self.grid.h;
        let h2 = h * h;
        let n = s.transversal.len();
        let m = s.interface_index;
        let phi = &s.transversal;
        let om = &s.longitudinal;
        let kappa = self.curvature(phi);

        let mut moment: Vec<f64> = (0..n).map(|i| self.bending[i] * kappa[i]).collect();
        for i in 1..m {
            moment[i] += self.weights[i] * p.alpha2 * s.theta[i];
        }
        let mut ft = self.load_t.clone();
        let mut fl = self.load_l.clone();
        for i in 1..n - 1 {
            ft[i - 1] -= moment[i] / h2;
            ft[i] += 2.0 * moment[i] / h2;
            ft[i + 1] -= moment[i] / h2;
        }
        ft[1] -= 2.0 * moment[0] / h2;
        ft[n - 2] -= 2.0 * moment[n - 1] / h2;

        for c in 0..n - 1 {
            let r = c + 1;
            let dphi = (phi[r] - phi[c]) / h;
            let e = (om[r] - om[c]) / h + 0.5 * dphi * dphi;
            let mut axial = p.sigma * e;
            if c < m {
                axial -= p.alpha1 * 0.5 * (s.xi[c] + s.xi[r]);
            }
            ft[c] += axial * dphi;
            ft[r] -= axial * dphi;
            fl[c] += axial;
            fl[r] -= axial;
        }
        (ft, fl)
    }

    /// Accelerations; the rotational-inertia operator is inverted exactly.
    pub fn accelerations(&self, s: &VonKarmanState) -> Result<(Vec<f64>, Vec<f64>)> {
        let (ft, fl) = self.forces(s);
        let n = ft.len();
        let sol = solve_tridiagonal(&self.lower, &self.diag, &self.upper, &ft[1..n - 1])?;
        let mut at = vec![0.0; n];
        at[1..n - 1].copy_from_slice(&sol);
        let mut al = vec![0.0; n];
        for i in 1..n - 1 {
            al[i] = fl[i] / self.lumped_rho[i];
        }
        Ok((at, al))
    }

    pub fn heat_rates(&self, s: &VonKarmanState) -> (Vec<f64>, Vec<f64>) {
        let p = &self.params;
        let h = self.grid.h;
        let m = s.interface_index;
        let phi = &s.transversal;
        let phit = &s.transversal_t;
        let omt = &s.longitudinal_t;
        let strain_rate: Vec<f64> = (0..m)
            .map(|c| {
                let r = c + 1;
                (omt[r] - omt[c]) / h + (phi[r] - phi[c]) / h * (phit[r] - phit[c]) / h
            })
            .collect();
        let mut xi_t = vec![0.0; m + 1];
        let mut theta_t = vec![0.0; m + 1];
        for i in 1..m {
            let d2 = |f: &[f64]| (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
            xi_t[i] = (p.mu * d2(&s.xi) - p.alpha1 * 0.5 * (strain_rate[i - 1] + strain_rate[i])
                + self.heat[0][i])
                / p.gamma;
            theta_t[i] = (p.lambda * d2(&s.theta) + p.alpha2 * d2(phit) + self.heat[1][i]) / p.delta;
        }
        (xi_t, theta_t)
    }

    pub fn energy(&self, s: &VonKarmanState) -> VonKarmanEnergy {
        let p = &self.params;
        let h = self.grid.h;
        let n = s.transversal.len();
        let m = s.interface_index;
        let phi = &s.transversal;
        let mut kinetic = 0.0;
        for i in 0..n {
            kinetic += self.lumped_rho[i]
                * (s.transversal_t[i].powi(2) + s.longitudinal_t[i].powi(2));
        }
        for c in 0..n - 1 {
            kinetic += h * self.cell_beta[c] * ((s.transversal_t[c + 1] - s.transversal_t[c]) / h).powi(2);
        }
        let kappa = self.curvature(phi);
        let mut potential: f64 = (0..n).map(|i| self.bending[i] * kappa[i] * kappa[i]).sum();
        for c in 0..n - 1 {
            let dphi = (phi[c + 1] - phi[c]) / h;
            let e = (s.longitudinal[c + 1] - s.longitudinal[c]) / h + 0.5 * dphi * dphi;
            potential += h * p.sigma * e * e;
        }
        let w = self.grid.trapezoid_weights(m + 1);
        let thermal: f64 = (0..=m)
            .map(|i| w[i] * (p.gamma * s.xi[i].powi(2) + p.delta * s.theta[i].powi(2)))
            .sum();
        let grad = |f: &[f64]| f.windows(2).map(|q| (q[1] - q[0]).powi(2) / h).sum::<f64>();
        let (kinetic, potential, thermal) = (0.5 * kinetic, 0.5 * potential, 0.5 * thermal);
        VonKarmanEnergy {
            kinetic,
            potential,
            thermal,
            total: kinetic + potential + thermal,
            dissipation_rate: p.mu * grad(&s.xi) + p.lambda * grad(&s.theta),
        }
    }

    /// Power of the mechanical loads and heat sources.
    pub fn source_power(&self, s: &VonKarmanState) -> f64 {
        let mech: f64 = (0..s.transversal.len())
            .map(|i| self.load_t[i] * s.transversal_t[i] + self.load_l[i] * s.longitudinal_t[i])
            .sum();
        let w = self.grid.trapezoid_weights(s.xi.len());
        let heat: f64 = (0..s.xi.len())
            .map(|i| w[i] * (self.heat[0][i] * s.xi[i] + self.heat[1][i] * s.theta[i]))
            .sum();
        mech + heat
    }
}

/// Velocity Verlet stepper for [`VonKarmanModel`].
#[derive(Debug, Clone)]
pub struct VonKarmanStepper {
    pub model: VonKarmanModel,
    pub dt: f64,
    pub guard_stride: usize,
    steps: usize,
    t0: f64,
    cached: Option<(Vec<f64>, Vec<f64>)>,
}

impl VonKarmanStepper {
    pub fn new(model: VonKarmanModel, dt: f64) -> Self {
        Self {
            model,
            dt,
            guard_stride: 1,
            steps: 0,
            t0: 0.0,
            cached: None,
        }
    }

    pub fn prepare(&mut self, s: &mut VonKarmanState) {
        apply_vonkarman_dirichlet(s);
        self.t0 = s.t;
        self.steps = 0;
        self.cached = None;
    }

    pub fn step(&mut self, s: &mut VonKarmanState) -> Result<()> {
        let dt = self.dt;
        let (a0t, a0l) = match self.cached.take() {
            Some(a) => a,
            None => self.model.accelerations(s)?,
        };
        let (xi_t, theta_t) = self.model.heat_rates(s);
        let n = s.transversal.len();
        for i in 1..n - 1 {
            s.transversal[i] += dt * s.transversal_t[i] + 0.5 * dt * dt * a0t[i];
            s.longitudinal[i] += dt * s.longitudinal_t[i] + 0.5 * dt * dt * a0l[i];
        }
        for i in 1..s.xi.len() - 1 {
            s.xi[i] += dt * xi_t[i];
            s.theta[i] += dt * theta_t[i];
        }
        let (a1t, a1l) = self.model.accelerations(s)?;
        for i in 1..n - 1 {
            s.transversal_t[i] += 0.5 * dt * (a0t[i] + a1t[i]);
            s.longitudinal_t[i] += 0.5 * dt * (a0l[i] + a1l[i]);
        }
        self.cached = Some((a1t, a1l));
        self.steps += 1;
        s.t = self.t0 + self.steps as f64 * dt;
        if self.steps.is_multiple_of(self.guard_stride.max(1)) && !s.is_finite() {
            return Err(Error::NonFiniteState {
                step: self.steps,
                t: s.t,
            });
        }
        Ok(())
    }
}

/// One stateless step of the von Kármán system.
pub fn vonkarman_step(
    s: &VonKarmanState,
    p: &PhysicalParams,
    f: &SampledForcing,
    g: &Grid,
    dt: f64,
) -> Result<VonKarmanState> {
    let mut st = VonKarmanStepper::new(VonKarmanModel::new(*p, g.clone(), f)?, dt);
    let mut out = s.clone();
    st.prepare(&mut out);
    st.step(&mut out)?;
    Ok(out)
}
