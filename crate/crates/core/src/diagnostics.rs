//! Energy, dissipation, Lyapunov function and interface diagnostics.
//!
//! All quantities use the quadrature of the spatial scheme: nodal trapezoid
//! weights for kinetic, thermal and load terms, and cell midpoints (two-point
//! central differences) for the strain and dissipation terms. With these
//! choices the semi-discrete energy identity holds exactly, so the balance
//! residual only measures time-stepping and sampling error.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{PhysicalParams, Segment, SegmentCoeffs};
use crate::state::{FieldState, SampledForcing, SegmentFields};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub thermal: f64,
    pub potential: f64,
    pub total: f64,
    pub dissipation_rate: f64,
    /// `None` when heat sources are present.
    pub lyapunov: Option<f64>,
    pub balance_residual: f64,
}

fn segment_kinetic(seg: &SegmentFields, c: SegmentCoeffs, w: &[f64]) -> f64 {
    let m = [c.rho, c.beta, c.rho];
    (0..3)
        .map(|k| {
            seg.vel[k]
                .iter()
                .zip(w)
                .map(|(v, w)| w * m[k] * v * v)
                .sum::<f64>()
        })
        .sum::<f64>()
        * 0.5
}

fn segment_potential(seg: &SegmentFields, c: SegmentCoeffs, sigma: f64, l: f64, h: f64) -> f64 {
    let [phi, psi, om] = &seg.disp;
    let mut acc = 0.0;
    for i in 0..seg.len() - 1 {
        let r = i + 1;
        let q = c.k * ((phi[r] - phi[i]) / h + 0.5 * (psi[i] + psi[r]) + l * 0.5 * (om[i] + om[r]));
        let j = sigma
            * ((om[r] - om[i]) / h - l * 0.5 * (phi[i] + phi[r])
                + 0.25 * (psi[i] * psi[i] + psi[r] * psi[r]));
        let m = c.nu * (psi[r] - psi[i]) / h;
        acc += h * (q * q / c.k + j * j / sigma + m * m / c.nu);
    }
    0.5 * acc
}

fn weighted_sq(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(v, w)| w * v * v).sum()
}

fn grad_sq(v: &[f64], h: f64) -> f64 {
    v.windows(2).map(|p| (p[1] - p[0]).powi(2) / h).sum()
}

/// Inner product of the mechanical loads with a displacement-like field set.
fn load_product(a: &SegmentFields, b: &SegmentFields, f: &SampledForcing, g: &Grid, vel: bool) -> f64 {
    let mut acc = 0.0;
    for (seg, load) in [(a, &f.damped), (b, &f.undamped)] {
        let w = g.trapezoid_weights(seg.len());
        for c in 0..3 {
            let field = if vel { &seg.vel[c] } else { &seg.disp[c] };
            acc += field
                .iter()
                .zip(&load[c])
                .zip(&w)
                .map(|((x, p), w)| w * x * p)
                .sum::<f64>();
        }
    }
    acc
}

/// `(P, Phi)`: work of the mechanical loads on the displacements.
pub fn load_work(s: &FieldState, f: &SampledForcing, g: &Grid) -> f64 {
    load_product(&s.damped, &s.undamped, f, g, false)
}

/// `(P, Phi_t)`: power of the mechanical loads.
pub fn load_power(s: &FieldState, f: &SampledForcing, g: &Grid) -> f64 {
    load_product(&s.damped, &s.undamped, f, g, true)
}

/// `(G, Theta)`: power of the heat sources.
pub fn heat_power(s: &FieldState, f: &SampledForcing, g: &Grid) -> f64 {
    let w = g.trapezoid_weights(s.xi.len());
    (0..s.xi.len())
        .map(|i| w[i] * (f.heat[0][i] * s.xi[i] + f.heat[1][i] * s.theta[i]))
        .sum()
}

/// Energy split of `s`, without the load terms.
pub fn total_energy(s: &FieldState, p: &PhysicalParams, g: &Grid) -> EnergyReport {
    let h = g.h;
    let cd = p.segment(Segment::Damped);
    let cu = p.segment(Segment::Undamped);
    let wd = g.trapezoid_weights(s.damped.len());
    let wu = g.trapezoid_weights(s.undamped.len());
    let kinetic = segment_kinetic(&s.damped, cd, &wd) + segment_kinetic(&s.undamped, cu, &wu);
    let potential = segment_potential(&s.damped, cd, p.sigma, p.l, h)
        + segment_potential(&s.undamped, cu, p.sigma, p.l, h);
    let thermal = 0.5 * (p.gamma * weighted_sq(&s.xi, &wd) + p.delta * weighted_sq(&s.theta, &wd));
    let dissipation_rate = p.mu * grad_sq(&s.xi, h) + p.lambda * grad_sq(&s.theta, h);
    EnergyReport {
        kinetic,
        thermal,
        potential,
        total: kinetic + thermal + potential,
        dissipation_rate,
        lyapunov: None,
        balance_residual: 0.0,
    }
}

/// Energy report including the Lyapunov value when the heat sources vanish.
pub fn energy_report(s: &FieldState, p: &PhysicalParams, f: &SampledForcing, g: &Grid) -> EnergyReport {
    let mut r = total_energy(s, p, g);
    if !f.has_heat_sources() {
        r.lyapunov = Some(r.total - load_work(s, f, g));
    }
    r
}

/// `E - (P, Phi)`; requires vanishing heat sources.
pub fn lyapunov(s: &FieldState, p: &PhysicalParams, f: &SampledForcing, g: &Grid) -> Result<f64> {
    if f.has_heat_sources() {
        return Err(Error::HeatSourcePresent);
    }
    Ok(total_energy(s, p, g).total - load_work(s, f, g))
}

/// Weighted norm of all velocities and temperatures; vanishes exactly on
/// stationary states without heat sources.
pub fn stationarity_gap(s: &FieldState, p: &PhysicalParams, g: &Grid) -> f64 {
    let r = total_energy(s, p, g);
    (2.0 * (r.kinetic + r.thermal)).sqrt()
}

/// Running form of the energy balance `E(T) + int D - E(0) - int (P, Phi_t) - int (G, Theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceTracker {
    e0: f64,
    scale: f64,
    last: Option<(f64, f64)>,
    integral: f64,
}

impl BalanceTracker {
    /// Starts with the initial energy `e0`; residuals are divided by `max(e0, 1)`.
    pub fn new(e0: f64) -> Self {
        Self {
            e0,
            scale: e0.max(1.0),
            last: None,
            integral: 0.0,
        }
    }

    /// Adds a sample at time `t`: energy, dissipation rate and the total
    /// source power. Returns the normalized residual at `t`.
    pub fn push(&mut self, t: f64, energy: f64, dissipation: f64, source_power: f64) -> f64 {
        let integrand = dissipation - source_power;
        if let Some((t_prev, prev)) = self.last {
            self.integral += 0.5 * (t - t_prev) * (prev + integrand);
        }
        self.last = Some((t, integrand));
        (energy + self.integral - self.e0) / self.scale
    }

    pub fn push_state(&mut self, s: &FieldState, p: &PhysicalParams, f: &SampledForcing, g: &Grid) -> f64 {
        let r = total_energy(s, p, g);
        let power = load_power(s, f, g) + heat_power(s, f, g);
        self.push(s.t, r.total, r.dissipation_rate, power)
    }
}

/// Normalized balance residual at every sample of a trajectory.
pub fn energy_balance_residual(
    trajectory: &[FieldState],
    p: &PhysicalParams,
    f: &SampledForcing,
    g: &Grid,
) -> Result<Vec<f64>> {
    if trajectory.len() < 2 {
        return Err(Error::InsufficientSamples(trajectory.len()));
    }
    let mut tracker = BalanceTracker::new(total_energy(&trajectory[0], p, g).total);
    Ok(trajectory
        .iter()
        .map(|s| tracker.push_state(s, p, f, g))
        .collect())
}

/// Interface residuals: value jumps and flux jumps
/// `[shear force, bending moment, omega_x - w_x]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransmissionResidual {
    pub continuity: [f64; 3],
    pub flux: [f64; 3],
}

impl TransmissionResidual {
    pub fn max_continuity(&self) -> f64 {
        self.continuity.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_flux(&self) -> f64 {
        self.flux.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Third-order one-sided derivative at the end of `f` (looking backwards).
fn left_derivative(f: &[f64], h: f64) -> f64 {
    let m = f.len() - 1;
    (11.0 * f[m] - 18.0 * f[m - 1] + 9.0 * f[m - 2] - 2.0 * f[m - 3]) / (6.0 * h)
}

fn right_derivative(f: &[f64], h: f64) -> f64 {
    -(11.0 * f[0] - 18.0 * f[1] + 9.0 * f[2] - 2.0 * f[3]) / (6.0 * h)
}

/// Residuals of the transmission conditions measured with four-point
/// one-sided differences. Needs three nodes on each side of the interface.
pub fn transmission_residual(s: &FieldState, p: &PhysicalParams, g: &Grid) -> TransmissionResidual {
    let h = g.h;
    let d = &s.damped.disp;
    let u = &s.undamped.disp;
    let m = s.damped.len() - 1;
    if s.damped.len() < 4 || s.undamped.len() < 4 {
        return TransmissionResidual {
            continuity: std::array::from_fn(|c| d[c][m] - u[c][0]),
            flux: [0.0; 3],
        };
    }
    let q1 = p.k1 * (left_derivative(&d[0], h) + d[1][m] + p.l * d[2][m]);
    let q2 = p.k2 * (right_derivative(&u[0], h) + u[1][0] + p.l * u[2][0]);
    TransmissionResidual {
        continuity: std::array::from_fn(|c| d[c][m] - u[c][0]),
        flux: [
            q1 - q2,
            p.nu1 * left_derivative(&d[1], h) - p.nu2 * right_derivative(&u[1], h),
            left_derivative(&d[2], h) - right_derivative(&u[2], h),
        ],
    }
}
