//! Transmission conditions at the interface node.
//!
//! The six trace values (three per side) are the unknowns of a linear system
//! made of three continuity rows and three flux rows, with second-order
//! one-sided differences on each side. Permuted by field pair the system is
//! block lower triangular: the `(psi, v)` and `(omega, w)` blocks stand alone
//! and the `(phi, u)` block only sees them through its right-hand side when
//! `k1 != k2`.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysicalParams;
use crate::state::{FieldState, SegmentFields};

/// Unknown ordering used by [`interface_matrix`].
pub const UNKNOWNS: [&str; 6] = ["phi", "psi", "omega", "u", "v", "w"];

/// Row-major 6x6 matrix of the transmission system. Rows: continuity of
/// transversal, shear and longitudinal traces, then the shear-force,
/// bending-moment and axial flux balances.
pub fn interface_matrix(p: &PhysicalParams, h: f64) -> [[f64; 6]; 6] {
    let s = 3.0 / (2.0 * h);
    let mut a = [[0.0; 6]; 6];
    for c in 0..3 {
        a[c][c] = 1.0;
        a[c][c + 3] = -1.0;
    }
    a[3][0] = p.k1 * s;
    a[3][1] = p.k1;
    a[3][2] = p.k1 * p.l;
    a[3][3] = p.k2 * s;
    a[3][4] = -p.k2;
    a[3][5] = -p.k2 * p.l;
    a[4][1] = p.nu1 * s;
    a[4][4] = p.nu2 * s;
    a[5][2] = p.sigma * s;
    a[5][5] = p.sigma * s;
    a
}

/// Solves `[[1, -1], [a, b]] (x, y) = (0, r)` by Cramer's rule.
fn solve_pair(a: f64, b: f64, r: f64, pair: &'static str) -> Result<f64> {
    let det = a + b;
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::SingularInterfaceSystem { pair });
    }
    Ok(r / det)
}

/// Weighted neighbor combination `c_left (4 f(L0-h) - f(L0-2h)) + c_right
/// (4 g(L0+h) - g(L0+2h))`, i.e. the known part of the flux row.
fn neighbors(left: &[f64], right: &[f64], cl: f64, cr: f64) -> f64 {
    let m = left.len() - 1;
    cl * (4.0 * left[m - 1] - left[m - 2]) + cr * (4.0 * right[1] - right[2])
}

fn solve_fields(
    left: &mut [Vec<f64>; 3],
    right: &mut [Vec<f64>; 3],
    p: &PhysicalParams,
    h: f64,
) -> Result<()> {
    let s = 3.0 / (2.0 * h);
    let m = left[0].len() - 1;
    let inv2h = 1.0 / (2.0 * h);

    let rs = neighbors(&left[1], &right[1], p.nu1, p.nu2) * inv2h;
    let psi = solve_pair(p.nu1 * s, p.nu2 * s, rs, "psi/v")?;

    let ro = neighbors(&left[2], &right[2], p.sigma, p.sigma) * inv2h;
    let om = solve_pair(p.sigma * s, p.sigma * s, ro, "omega/w")?;

    let rt = neighbors(&left[0], &right[0], p.k1, p.k2) * inv2h - (p.k1 - p.k2) * (psi + p.l * om);
    let phi = solve_pair(p.k1 * s, p.k2 * s, rt, "phi/u")?;

    for (c, value) in [phi, psi, om].into_iter().enumerate() {
        left[c][m] = value;
        right[c][0] = value;
    }
    Ok(())
}

fn check_support(s: &FieldState) -> Result<()> {
    if s.damped.len() < 3 || s.undamped.len() < 3 {
        return Err(Error::InvalidGrid(
            "interface stencils need two nodes on each side".into(),
        ));
    }
    Ok(())
}

/// Overwrites the interface traces of the displacement fields.
pub fn solve_interface_displacements(
    s: &mut FieldState,
    p: &PhysicalParams,
    g: &Grid,
) -> Result<()> {
    check_support(s)?;
    let FieldState {
        damped, undamped, ..
    } = s;
    solve_fields(&mut damped.disp, &mut undamped.disp, p, g.h)
}

/// Same solve applied to the velocity traces (the transmission conditions
/// hold for all times, hence also for their time derivatives).
pub fn solve_interface_velocities(s: &mut FieldState, p: &PhysicalParams, g: &Grid) -> Result<()> {
    check_support(s)?;
    let FieldState {
        damped, undamped, ..
    } = s;
    solve_fields(&mut damped.vel, &mut undamped.vel, p, g.h)
}

/// Returns a copy of `s` whose displacement and velocity traces satisfy the
/// discrete transmission conditions.
pub fn solve_interface(s: &FieldState, p: &PhysicalParams, g: &Grid) -> Result<FieldState> {
    let mut out = s.clone();
    solve_interface_displacements(&mut out, p, g)?;
    solve_interface_velocities(&mut out, p, g)?;
    Ok(out)
}

/// Second-order one-sided flux jumps `[Q-, M-, N-]` evaluated with the same
/// stencils as the solve; zero after [`solve_interface`] up to rounding.
pub fn discrete_flux_jumps(d: &SegmentFields, u: &SegmentFields, p: &PhysicalParams, h: f64) -> [f64; 3] {
    let m = d.len() - 1;
    let left = |f: &[f64]| (3.0 * f[m] - 4.0 * f[m - 1] + f[m - 2]) / (2.0 * h);
    let right = |f: &[f64]| (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    let (phi, psi, om) = (&d.disp[0], &d.disp[1], &d.disp[2]);
    let (uu, v, w) = (&u.disp[0], &u.disp[1], &u.disp[2]);
    [
        p.k1 * (left(phi) + psi[m] + p.l * om[m]) - p.k2 * (right(uu) + v[0] + p.l * w[0]),
        p.nu1 * left(psi) - p.nu2 * right(v),
        p.sigma * (left(om) - right(w)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::grid::build_grid;
    use crate::state::{sample_initial_state, InitialData};
    use proptest::prelude::*;

    fn reference_params() -> PhysicalParams {
        crate::presets::straight_limit_params()
    }

    #[test]
    fn flat_field_is_fixed_point() {
        let g = build_grid(2.0, 1.0, 10).unwrap();
        let p = PhysicalParams::unit();
        let mut s = FieldState::zeros(&g);
        for c in 0..3 {
            s.damped.disp[c].iter_mut().for_each(|v| *v = 0.7 + c as f64);
            s.undamped.disp[c].iter_mut().for_each(|v| *v = 0.7 + c as f64);
        }
        let m = g.interface_index;
        s.damped.disp[1][m] = -5.0;
        s.undamped.disp[1][0] = 9.0;
        let out = solve_interface(&s, &PhysicalParams { l: 0.0, ..p }, &g).unwrap();
        for c in 0..3 {
            assert!((out.damped.disp[c][m] - (0.7 + c as f64)).abs() < 1e-14);
            assert_eq!(out.damped.disp[c][m], out.undamped.disp[c][0]);
        }
    }

    #[test]
    fn linear_profile_is_exact() {
        let g = build_grid(10.0, 4.0, 10).unwrap();
        let p = PhysicalParams {
            k2: 1.0,
            l: 0.0,
            ..reference_params()
        };
        let ic = InitialData {
            phi0: parse("0.3*x").unwrap(),
            u0: parse("0.3*x").unwrap(),
            ..Default::default()
        };
        let mut s = sample_initial_state(&g, &ic);
        s.damped.disp[0][40] = 0.0;
        s.undamped.disp[0][0] = 0.0;
        let out = solve_interface(&s, &p, &g).unwrap();
        assert!((out.phi()[40] - 1.2).abs() < 1e-13);
        assert!((out.u()[0] - 1.2).abs() < 1e-13);
    }

    #[test]
    fn block_structure() {
        let p = reference_params();
        let a = interface_matrix(&p, 0.1);
        // Field pairs in order (psi, v), (omega, w), (phi, u).
        let order = [1, 4, 2, 5, 0, 3];
        let rows = [1, 4, 2, 5, 0, 3];
        let pa: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| order.iter().map(|&c| a[r][c]).collect())
            .collect();
        for bi in 0..3 {
            for bj in 0..3 {
                let nonzero = (0..2)
                    .flat_map(|i| (0..2).map(move |j| (i, j)))
                    .any(|(i, j)| pa[2 * bi + i][2 * bj + j] != 0.0);
                if bj > bi {
                    assert!(!nonzero, "upper block ({bi},{bj}) must vanish");
                }
                if bi == 1 && bj == 0 {
                    assert!(!nonzero, "shear and axial blocks are independent");
                }
                if bi == bj {
                    let d = pa[2 * bi][2 * bi] * pa[2 * bi + 1][2 * bi + 1]
                        - pa[2 * bi][2 * bi + 1] * pa[2 * bi + 1][2 * bi];
                    assert!(d.abs() >= 3.0 / 0.2 * p.k1.min(p.nu1).min(p.sigma));
                }
            }
        }
        let equal = PhysicalParams {
            k2: p.k1,
            ..p
        };
        let a = interface_matrix(&equal, 0.1);
        let coupling: f64 = [1, 2, 4, 5].iter().map(|&c| a[3][c].abs()).sum();
        assert_eq!(a[3][1] + a[3][4], 0.0);
        assert!(coupling > 0.0);
    }

    #[test]
    fn solve_satisfies_discrete_rows() {
        let g = build_grid(10.0, 4.0, 10).unwrap();
        let p = reference_params();
        let s = sample_initial_state(&g, &crate::presets::double_limit_initial_data());
        let out = solve_interface(&s, &p, &g).unwrap();
        let j = discrete_flux_jumps(&out.damped, &out.undamped, &p, g.h);
        for r in j {
            assert!(r.abs() < 1e-12, "{j:?}");
        }
    }

    proptest! {
        #[test]
        fn solve_is_idempotent(vals in prop::collection::vec(-3.0f64..3.0, 12), l in 0.0f64..1.0) {
            let g = build_grid(2.0, 1.0, 4).unwrap();
            let p = PhysicalParams { l, k2: 3.0, nu1: 0.5, ..PhysicalParams::unit() };
            let mut s = FieldState::zeros(&g);
            let mut k = 0;
            for c in 0..3 {
                for i in 1..4 {
                    s.damped.disp[c][i] = vals[k % 12];
                    s.undamped.disp[c][i] = vals[(k + 5) % 12];
                    s.damped.vel[c][i] = vals[(k + 7) % 12];
                    k += 1;
                }
            }
            let once = solve_interface(&s, &p, &g).unwrap();
            let twice = solve_interface(&once, &p, &g).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
