//! Semi-discrete right-hand sides of the Bresse transmission system and of its
//! straight-beam (Timoshenko) limit.
//!
//! The spatial operator is written in flux form on the cells of each segment:
//! shear force, nonlinear axial stress and bending moment live on cell
//! midpoints (two-point central differences there, averages for undifferentiated
//! terms) and the nodal forces are their discrete divergences. Interior rows are
//! the classical three-point second-difference / two-point central-difference
//! stencils, and the whole operator is the exact gradient of the discrete
//! strain energy used by [`crate::diagnostics::total_energy`]. The interface
//! node is advanced with the combined lumped mass of both half cells, which
//! imposes the flux transmission conditions in the natural (weak) sense.

use crate::grid::Grid;
use crate::params::{PhysicalParams, SegmentCoeffs};
use crate::state::{FieldState, SampledForcing, SegmentFields};

const T: usize = 0;
const S: usize = 1;
const LG: usize = 2;

/// Accelerations of the six mechanical fields and heat rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub damped_acc: [Vec<f64>; 3],
    pub undamped_acc: [Vec<f64>; 3],
    pub xi_t: Vec<f64>,
    pub theta_t: Vec<f64>,
}

impl Rates {
    pub fn max_abs(&self) -> f64 {
        self.damped_acc
            .iter()
            .chain(self.undamped_acc.iter())
            .chain([&self.xi_t, &self.theta_t])
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Which straight/curved system the right-hand side represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamModel {
    /// The curved beam with curvature `l` taken from the parameters.
    Bresse,
    /// The straight beam obtained by removing every curvature term.
    Timoshenko,
}

pub(crate) struct HeatCoupling<'a> {
    pub xi: &'a [f64],
    pub theta: &'a [f64],
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Adds `-dV/dq + dW/dq` of one segment to `out`, where `V` is the cell-based
/// strain energy and `W` the thermo-mechanical coupling functional.
pub(crate) fn add_bresse_forces(
    seg: &SegmentFields,
    c: SegmentCoeffs,
    sigma: f64,
    l: f64,
    h: f64,
    heat: Option<&HeatCoupling<'_>>,
    out: &mut [Vec<f64>; 3],
) {
    let [phi, psi, om] = &seg.disp;
    for i in 0..seg.len() - 1 {
        let r = i + 1;
        let dphi = (phi[r] - phi[i]) / h;
        let dpsi = (psi[r] - psi[i]) / h;
        let dom = (om[r] - om[i]) / h;
        let psi_avg = 0.5 * (psi[i] + psi[r]);
        let om_avg = 0.5 * (om[i] + om[r]);
        let phi_avg = 0.5 * (phi[i] + phi[r]);
        let psi2_avg = 0.5 * (psi[i] * psi[i] + psi[r] * psi[r]);

        let q = c.k * (dphi + psi_avg + l * om_avg);
        let j = sigma * (dom - l * phi_avg + 0.5 * psi2_avg);
        let m = c.nu * dpsi;

        out[T][i] += q + 0.5 * h * l * j;
        out[T][r] += -q + 0.5 * h * l * j;
        out[S][i] += m - 0.5 * h * (q + j * psi[i]);
        out[S][r] += -m - 0.5 * h * (q + j * psi[r]);
        out[LG][i] += j - 0.5 * h * l * q;
        out[LG][r] += -j - 0.5 * h * l * q;

        if let Some(hc) = heat {
            let xb = 0.5 * (hc.xi[i] + hc.xi[r]);
            let tb = 0.5 * (hc.theta[i] + hc.theta[r]);
            out[T][i] -= 0.5 * h * l * hc.alpha1 * xb;
            out[T][r] -= 0.5 * h * l * hc.alpha1 * xb;
            out[S][i] += 0.5 * h * hc.alpha1 * xb * psi[i] - hc.alpha2 * tb;
            out[S][r] += 0.5 * h * hc.alpha1 * xb * psi[r] + hc.alpha2 * tb;
            out[LG][i] -= hc.alpha1 * xb;
            out[LG][r] += hc.alpha1 * xb;
        }
    }
}

/// Straight-beam counterpart of [`add_bresse_forces`] with all curvature
/// terms removed.
pub(crate) fn add_timoshenko_forces(
    seg: &SegmentFields,
    c: SegmentCoeffs,
    sigma: f64,
    h: f64,
    heat: Option<&HeatCoupling<'_>>,
    out: &mut [Vec<f64>; 3],
) {
    let [phi, psi, om] = &seg.disp;
    for i in 0..seg.len() - 1 {
        let r = i + 1;
        let q = c.k * ((phi[r] - phi[i]) / h + 0.5 * (psi[i] + psi[r]));
        let j = sigma * ((om[r] - om[i]) / h + 0.25 * (psi[i] * psi[i] + psi[r] * psi[r]));
        let m = c.nu * (psi[r] - psi[i]) / h;

        out[T][i] += q;
        out[T][r] -= q;
        out[S][i] += m - 0.5 * h * (q + j * psi[i]);
        out[S][r] += -m - 0.5 * h * (q + j * psi[r]);
        out[LG][i] += j;
        out[LG][r] -= j;

        if let Some(hc) = heat {
            let xb = 0.5 * (hc.xi[i] + hc.xi[r]);
            let tb = 0.5 * (hc.theta[i] + hc.theta[r]);
            out[S][i] += 0.5 * h * hc.alpha1 * xb * psi[i] - hc.alpha2 * tb;
            out[S][r] += 0.5 * h * hc.alpha1 * xb * psi[r] + hc.alpha2 * tb;
            out[LG][i] -= hc.alpha1 * xb;
            out[LG][r] += hc.alpha1 * xb;
        }
    }
}

fn zeros3(len: usize) -> [Vec<f64>; 3] {
    std::array::from_fn(|_| vec![0.0; len])
}

/// Generalized nodal forces (strain, coupling and external load) of both
/// segments, before division by the lumped masses.
pub(crate) fn nodal_forces(
    s: &FieldState,
    p: &PhysicalParams,
    f: &SampledForcing,
    g: &Grid,
    model: BeamModel,
) -> ([Vec<f64>; 3], [Vec<f64>; 3]) {
    let h = g.h;
    let mut fd = zeros3(s.damped.len());
    let mut fu = zeros3(s.undamped.len());
    let heat = HeatCoupling {
        xi: &s.xi,
        theta: &s.theta,
        alpha1: p.alpha1,
        alpha2: p.alpha2,
    };
    let damped = p.segment(crate::params::Segment::Damped);
    let undamped = p.segment(crate::params::Segment::Undamped);
    match model {
        BeamModel::Bresse => {
            add_bresse_forces(&s.damped, damped, p.sigma, p.l, h, Some(&heat), &mut fd);
            add_bresse_forces(&s.undamped, undamped, p.sigma, p.l, h, None, &mut fu);
        }
        BeamModel::Timoshenko => {
            add_timoshenko_forces(&s.damped, damped, p.sigma, h, Some(&heat), &mut fd);
            add_timoshenko_forces(&s.undamped, undamped, p.sigma, h, None, &mut fu);
        }
    }
    let wd = g.trapezoid_weights(s.damped.len());
    let wu = g.trapezoid_weights(s.undamped.len());
    for c in 0..3 {
        for (i, w) in wd.iter().enumerate() {
            fd[c][i] += w * f.damped[c][i];
        }
        for (i, w) in wu.iter().enumerate() {
            fu[c][i] += w * f.undamped[c][i];
        }
    }
    (fd, fu)
}

/// Lumped mass coefficient of each component (`rho`, `beta`, `rho`).
pub(crate) fn component_mass(c: SegmentCoeffs) -> [f64; 3] {
    [c.rho, c.beta, c.rho]
}

pub(crate) fn accelerations(
    s: &FieldState,
    p: &PhysicalParams,
    f: &SampledForcing,
    g: &Grid,
    model: BeamModel,
) -> ([Vec<f64>; 3], [Vec<f64>; 3]) {
    let (fd, fu) = nodal_forces(s, p, f, g, model);
    let h = g.h;
    let md = component_mass(p.segment(crate::params::Segment::Damped));
    let mu = component_mass(p.segment(crate::params::Segment::Undamped));
    let nd = s.damped.len();
    let nu = s.undamped.len();
    let mut ad = zeros3(nd);
    let mut au = zeros3(nu);
    for c in 0..3 {
        for i in 1..nd - 1 {
            ad[c][i] = fd[c][i] / (h * md[c]);
        }
        for i in 1..nu - 1 {
            au[c][i] = fu[c][i] / (h * mu[c]);
        }
        let a = (fd[c][nd - 1] + fu[c][0]) / (0.5 * h * (md[c] + mu[c]));
        ad[c][nd - 1] = a;
        au[c][0] = a;
    }
    (ad, au)
}

/// Forward rates of the two temperature fields on the damped segment.
pub(crate) fn heat_rates(
    s: &FieldState,
    p: &PhysicalParams,
    f: &SampledForcing,
    g: &Grid,
    l: f64,
) -> (Vec<f64>, Vec<f64>) {
    let h = g.h;
    let n = s.xi.len();
    let [phi_t, psi_t, om_t] = &s.damped.vel;
    let psi = s.psi();
    // Per cell: rate of the axial strain (omega_x - l phi + psi^2/2) and of psi_x.
    let mut strain_rate = vec![0.0; n - 1];
    let mut bend_rate = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let r = i + 1;
        strain_rate[i] = (om_t[r] - om_t[i]) / h - l * 0.5 * (phi_t[i] + phi_t[r])
            + 0.5 * (psi[i] * psi_t[i] + psi[r] * psi_t[r]);
        bend_rate[i] = (psi_t[r] - psi_t[i]) / h;
    }
    let mut xi_t = vec![0.0; n];
    let mut theta_t = vec![0.0; n];
    let (xi, theta) = (&s.xi, &s.theta);
    for i in 1..n - 1 {
        let d2xi = (xi[i + 1] - 2.0 * xi[i] + xi[i - 1]) / (h * h);
        let d2th = (theta[i + 1] - 2.0 * theta[i] + theta[i - 1]) / (h * h);
        xi_t[i] = (p.mu * d2xi - p.alpha1 * 0.5 * (strain_rate[i - 1] + strain_rate[i])
            + f.heat[0][i])
            / p.gamma;
        theta_t[i] = (p.lambda * d2th - p.alpha2 * 0.5 * (bend_rate[i - 1] + bend_rate[i])
            + f.heat[1][i])
            / p.delta;
    }
    (xi_t, theta_t)
}

fn rhs(s: &FieldState, p: &PhysicalParams, f: &SampledForcing, g: &Grid, model: BeamModel) -> Rates {
    let (damped_acc, undamped_acc) = accelerations(s, p, f, g, model);
    let l = match model {
        BeamModel::Bresse => p.l,
        BeamModel::Timoshenko => 0.0,
    };
    let (xi_t, theta_t) = heat_rates(s, p, f, g, l);
    Rates {
        damped_acc,
        undamped_acc,
        xi_t,
        theta_t,
    }
}

/// Accelerations and heat rates of the curved beam. Rows on the clamped ends
/// are zero; the interface row is the lumped combination of both sides.
pub fn bresse_rhs(s: &FieldState, p: &PhysicalParams, f: &SampledForcing, g: &Grid) -> Rates {
    rhs(s, p, f, g, BeamModel::Bresse)
}

/// Accelerations and heat rates of the straight beam (curvature ignored).
pub fn timoshenko_rhs(s: &FieldState, p: &PhysicalParams, f: &SampledForcing, g: &Grid) -> Rates {
    rhs(s, p, f, g, BeamModel::Timoshenko)
}

pub fn model_rhs(
    s: &FieldState,
    p: &PhysicalParams,
    f: &SampledForcing,
    g: &Grid,
    model: BeamModel,
) -> Rates {
    rhs(s, p, f, g, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::grid::build_grid;
    use crate::state::{sample_initial_state, ForcingSet, InitialData};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn straight_limit() -> PhysicalParams {
        crate::presets::straight_limit_params()
    }

    fn straight_limit_forcing() -> ForcingSet {
        crate::presets::straight_limit_forcing()
    }

    #[test]
    fn zero_state_is_an_equilibrium() {
        let g = build_grid(10.0, 4.0, 10).unwrap();
        let s = FieldState::zeros(&g);
        let r = bresse_rhs(&s, &straight_limit(), &SampledForcing::zeros(&g), &g);
        assert_eq!(r.max_abs(), 0.0);
        let r = timoshenko_rhs(&s, &straight_limit(), &SampledForcing::zeros(&g), &g);
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn zero_state_responds_to_load_only() {
        let g = build_grid(10.0, 4.0, 10).unwrap();
        let p = straight_limit();
        let f = straight_limit_forcing().sample(&g);
        let s = FieldState::zeros(&g);
        let r = bresse_rhs(&s, &p, &f, &g);
        for i in 1..40 {
            let x = g.x[i];
            assert!((r.damped_acc[0][i] - x.sin() / p.rho1).abs() < 1e-14);
            assert!((r.damped_acc[1][i] - x / p.beta1).abs() < 1e-14);
            assert!((r.xi_t[i] - x / p.gamma).abs() < 1e-14);
        }
        let r = timoshenko_rhs(&s, &p, &f, &g);
        for i in 1..40 {
            assert!((r.damped_acc[1][i] - g.x[i] / p.beta1).abs() < 1e-14);
        }
        for j in 1..60 {
            let x = g.x[40 + j];
            assert!((r.undamped_acc[1][j] - (x + 1.0) / p.beta2).abs() < 1e-14);
        }
    }

    #[test]
    fn transversal_wave_eigenmode() {
        // l = 0, psi = omega = 0, phi = sin(pi x / L0): phi_tt = -(pi/L0)^2 phi + O(h^2).
        let p = PhysicalParams {
            l: 0.0,
            ..PhysicalParams::unit()
        };
        let mut errs = Vec::new();
        for n in [10, 20, 40] {
            let g = build_grid(2.0, 1.0, n).unwrap();
            let ic = InitialData {
                phi0: parse("sin(3.141592653589793*x)").unwrap(),
                ..Default::default()
            };
            let s = sample_initial_state(&g, &ic);
            let r = bresse_rhs(&s, &p, &SampledForcing::zeros(&g), &g);
            let err = (1..g.interface_index)
                .map(|i| (r.damped_acc[0][i] + PI * PI * s.phi()[i]).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] < 0.1);
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.8 && ratio < 4.2, "ratio {ratio}");
        }
    }

    fn random_state(g: &Grid, seed: &[f64]) -> FieldState {
        let mut s = FieldState::zeros(g);
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * (1.0 + (k as f64 * 0.37).sin())
        };
        for c in 0..3 {
            for v in s.damped.disp[c].iter_mut().chain(s.damped.vel[c].iter_mut()) {
                *v = next();
            }
            for v in s.undamped.disp[c].iter_mut().chain(s.undamped.vel[c].iter_mut()) {
                *v = next();
            }
        }
        for v in s.xi.iter_mut().chain(s.theta.iter_mut()) {
            *v = next();
        }
        crate::state::copy_interface_traces(&mut s);
        crate::state::apply_dirichlet(&mut s);
        s
    }

    fn close(a: &Rates, b: &Rates, tol: f64) -> bool {
        let flat = |r: &Rates| {
            r.damped_acc
                .iter()
                .chain(r.undamped_acc.iter())
                .chain([&r.xi_t, &r.theta_t])
                .flat_map(|v| v.clone())
                .collect::<Vec<_>>()
        };
        flat(a)
            .iter()
            .zip(flat(b))
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn straight_bresse_matches_timoshenko(seed in prop::collection::vec(-2.0f64..2.0, 7..23)) {
            let g = build_grid(10.0, 4.0, 5).unwrap();
            let p = PhysicalParams { l: 0.0, ..straight_limit() };
            let f = straight_limit_forcing().sample(&g);
            let s = random_state(&g, &seed);
            prop_assert!(close(&bresse_rhs(&s, &p, &f, &g), &timoshenko_rhs(&s, &p, &f, &g), 1e-14));
        }

        #[test]
        fn rates_are_affine_in_forcing(seed in prop::collection::vec(-2.0f64..2.0, 7..23), l in 0.0f64..0.5) {
            let g = build_grid(10.0, 4.0, 5).unwrap();
            let p = PhysicalParams { l, ..straight_limit() };
            let f1 = straight_limit_forcing().sample(&g);
            let mut other = ForcingSet::default();
            other.p2 = parse("x^2 - 1").unwrap();
            other.h2 = parse("cos(2*x)").unwrap();
            other.r1 = parse("3").unwrap();
            let f2 = other.sample(&g);
            let f0 = SampledForcing::zeros(&g);
            let s = random_state(&g, &seed);
            let lhs = bresse_rhs(&s, &p, &SampledForcing::combine(&f1, &f2, &f0), &g);
            let a = bresse_rhs(&s, &p, &f1, &g);
            let b = bresse_rhs(&s, &p, &f2, &g);
            let c = bresse_rhs(&s, &p, &f0, &g);
            let mut rhs = a.clone();
            for k in 0..3 {
                for i in 0..rhs.damped_acc[k].len() {
                    rhs.damped_acc[k][i] = a.damped_acc[k][i] + b.damped_acc[k][i] - c.damped_acc[k][i];
                }
                for i in 0..rhs.undamped_acc[k].len() {
                    rhs.undamped_acc[k][i] = a.undamped_acc[k][i] + b.undamped_acc[k][i] - c.undamped_acc[k][i];
                }
            }
            for i in 0..rhs.xi_t.len() {
                rhs.xi_t[i] = a.xi_t[i] + b.xi_t[i] - c.xi_t[i];
                rhs.theta_t[i] = a.theta_t[i] + b.theta_t[i] - c.theta_t[i];
            }
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }
    }
}
