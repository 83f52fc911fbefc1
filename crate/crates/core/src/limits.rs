//! Parameter scaling toward the von Kármán limit and distance to its
//! constraint manifold `psi = -phi_x`, `v = -u_x`.

use crate::grid::Grid;
use crate::params::PhysicalParams;
use crate::state::FieldState;

/// Scale factors and base values of a double-limit scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiScanConfig {
    pub chi_values: Vec<f64>,
    pub base_l: f64,
    pub base_k1: f64,
    pub base_k2: f64,
}

impl Default for ChiScanConfig {
    fn default() -> Self {
        Self {
            chi_values: vec![1.0, 10.0, 100.0, 1000.0],
            base_l: 0.1,
            base_k1: 0.4,
            base_k2: 0.1,
        }
    }
}

impl ChiScanConfig {
    /// `base` with the scan's base curvature and shear moduli.
    pub fn base_params(&self, base: &PhysicalParams) -> PhysicalParams {
        PhysicalParams {
            l: self.base_l,
            k1: self.base_k1,
            k2: self.base_k2,
            ..*base
        }
    }
}

/// `l / chi`, `k1 * chi`, `k2 * chi`; everything else unchanged.
pub fn chi_scaled_params(base: &PhysicalParams, chi: f64) -> PhysicalParams {
    PhysicalParams {
        l: base.l / chi,
        k1: base.k1 * chi,
        k2: base.k2 * chi,
        ..*base
    }
}

/// Centered first derivative, second-order one-sided at both ends.
pub(crate) fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            d[0] = (f[1] - f[0]) / h;
            d[1] = d[0];
        }
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

/// Pointwise `psi + phi_x` on the damped segment and `v + u_x` on the
/// undamped one.
pub fn consistency_fields(s: &FieldState, g: &Grid) -> (Vec<f64>, Vec<f64>) {
    let add = |shear: &[f64], disp: &[f64]| {
        derivative(disp, g.h)
            .iter()
            .zip(shear)
            .map(|(d, s)| d + s)
            .collect::<Vec<_>>()
    };
    (add(s.psi(), s.phi()), add(s.v(), s.u()))
}

/// Trapezoid L2 norm of a segment profile.
pub fn l2_norm(f: &[f64], g: &Grid) -> f64 {
    g.trapezoid_weights(f.len())
        .iter()
        .zip(f)
        .map(|(w, v)| w * v * v)
        .sum::<f64>()
        .sqrt()
}

/// L2 norms of both consistency profiles.
pub fn consistency_norms(s: &FieldState, g: &Grid) -> (f64, f64) {
    let (a, b) = consistency_fields(s, g);
    (l2_norm(&a, g), l2_norm(&b, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::grid::build_grid;
    use crate::state::{sample_initial_state, InitialData};
    use proptest::prelude::*;

    #[test]
    fn scaling_examples() {
        let base = crate::presets::double_limit_params();
        assert_eq!(chi_scaled_params(&base, 1.0), base);
        let p = chi_scaled_params(&base, 10.0);
        assert!((p.l - 0.01).abs() < 1e-17);
        assert!((p.k1 - 4.0).abs() < 1e-15 && (p.k2 - 1.0).abs() < 1e-15);
        assert_eq!(p.nu1, base.nu1);
        let p = chi_scaled_params(&base, 1000.0);
        assert!((p.l - 1e-4).abs() < 1e-18);
        assert!((p.k1 - 400.0).abs() < 1e-12 && (p.k2 - 100.0).abs() < 1e-12);
        let cfg = ChiScanConfig::default();
        assert_eq!(cfg.chi_values, vec![1.0, 10.0, 100.0, 1000.0]);
        assert_eq!(cfg.base_params(&base), base);
    }

    #[test]
    fn zero_state_is_consistent() {
        let g = build_grid(10.0, 4.0, 10).unwrap();
        let (a, b) = consistency_fields(&FieldState::zeros(&g), &g);
        assert!(a.iter().chain(&b).all(|&v| v == 0.0));
    }

    fn residual_at(n: usize, ic: &InitialData, sample: bool) -> f64 {
        let g = build_grid(10.0, 4.0, n).unwrap();
        let s = if sample {
            sample_initial_state(&g, ic)
        } else {
            let mut s = FieldState::zeros(&g);
            let on = |e: &crate::expr::Expr, xs: &[f64]| xs.iter().map(|&x| e.eval(x)).collect::<Vec<_>>();
            s.damped.disp[0] = on(&ic.phi0, g.damped_x());
            s.damped.disp[1] = on(&ic.psi0, g.damped_x());
            s.undamped.disp[0] = on(&ic.u0, g.undamped_x());
            s.undamped.disp[1] = on(&ic.v0, g.undamped_x());
            s
        };
        let (a, b) = consistency_fields(&s, &g);
        a.iter().chain(&b).fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn analytic_pair_is_second_order() {
        let ic = InitialData {
            phi0: parse("sin(x)*x").unwrap(),
            psi0: parse("-(cos(x)*x + sin(x))").unwrap(),
            u0: parse("cos(x/2)").unwrap(),
            v0: parse("sin(x/2)/2").unwrap(),
            ..Default::default()
        };
        let (r1, r2) = (residual_at(10, &ic, false), residual_at(20, &ic, false));
        assert!(r1 < 0.1, "{r1}");
        assert!(r1 / r2 > 3.5, "{r1} {r2}");
    }

    #[test]
    fn double_limit_initial_data_is_near_the_manifold() {
        let ic = crate::presets::double_limit_initial_data();
        let (r1, r2) = (residual_at(10, &ic, true), residual_at(20, &ic, true));
        assert!(r1 < 0.05, "{r1}");
        assert!(r1 / r2 > 3.5, "{r1} {r2}");
    }

    proptest! {
        #[test]
        fn scaling_composes(a in 1.0f64..50.0, b in 1.0f64..50.0) {
            let base = crate::presets::double_limit_params();
            let two = chi_scaled_params(&chi_scaled_params(&base, a), b);
            let one = chi_scaled_params(&base, a * b);
            for (x, y) in [(two.l, one.l), (two.k1, one.k1), (two.k2, one.k2)] {
                prop_assert!((x - y).abs() <= 1e-14 * y.abs());
            }
            prop_assert_eq!(two.nu2, one.nu2);
        }
    }
}
