//! Grid-sampled unknowns, initial data and source terms.

use crate::expr::Expr;
use crate::grid::Grid;

/// Mechanical unknowns of one segment, in the order transversal
/// displacement, shear angle variation, longitudinal displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Transversal = 0,
    Shear = 1,
    Longitudinal = 2,
}

impl Component {
    pub const ALL: [Component; 3] = [
        Component::Transversal,
        Component::Shear,
        Component::Longitudinal,
    ];
}

/// Displacements and velocities of one segment on its local nodes.
///
/// For the damped segment local node 0 is `x = 0` and the last node is the
/// interface; for the undamped segment local node 0 is the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFields {
    pub disp: [Vec<f64>; 3],
    pub vel: [Vec<f64>; 3],
}

impl SegmentFields {
    pub fn zeros(len: usize) -> Self {
        Self {
            disp: std::array::from_fn(|_| vec![0.0; len]),
            vel: std::array::from_fn(|_| vec![0.0; len]),
        }
    }

    pub fn len(&self) -> usize {
        self.disp[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn disp(&self, c: Component) -> &[f64] {
        &self.disp[c as usize]
    }

    pub fn vel(&self, c: Component) -> &[f64] {
        &self.vel[c as usize]
    }
}

/// The full Bresse state at one time level. The interface node is stored in
/// both segments (duplicated traces).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub damped: SegmentFields,
    pub undamped: SegmentFields,
    /// Longitudinal temperature deviation on the damped segment.
    pub xi: Vec<f64>,
    /// Vertical temperature deviation on the damped segment.
    pub theta: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(g: &Grid) -> Self {
        Self {
            damped: SegmentFields::zeros(g.damped_len()),
            undamped: SegmentFields::zeros(g.undamped_len()),
            xi: vec![0.0; g.damped_len()],
            theta: vec![0.0; g.damped_len()],
            t: 0.0,
        }
    }

    pub fn phi(&self) -> &[f64] {
        self.damped.disp(Component::Transversal)
    }
    pub fn psi(&self) -> &[f64] {
        self.damped.disp(Component::Shear)
    }
    pub fn omega(&self) -> &[f64] {
        self.damped.disp(Component::Longitudinal)
    }
    pub fn u(&self) -> &[f64] {
        self.undamped.disp(Component::Transversal)
    }
    pub fn v(&self) -> &[f64] {
        self.undamped.disp(Component::Shear)
    }
    pub fn w(&self) -> &[f64] {
        self.undamped.disp(Component::Longitudinal)
    }

    pub fn is_finite(&self) -> bool {
        let seg = |s: &SegmentFields| {
            s.disp
                .iter()
                .chain(s.vel.iter())
                .all(|v| v.iter().all(|x| x.is_finite()))
        };
        seg(&self.damped)
            && seg(&self.undamped)
            && self.xi.iter().chain(&self.theta).all(|x| x.is_finite())
            && self.t.is_finite()
    }
}

/// Initial displacements (`*0`), velocities (`*1`) and temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub phi0: Expr,
    pub psi0: Expr,
    pub omega0: Expr,
    pub phi1: Expr,
    pub psi1: Expr,
    pub omega1: Expr,
    pub u0: Expr,
    pub v0: Expr,
    pub w0: Expr,
    pub u1: Expr,
    pub v1: Expr,
    pub w1: Expr,
    pub xi0: Expr,
    pub theta0: Expr,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            phi0: Expr::zero(),
            psi0: Expr::zero(),
            omega0: Expr::zero(),
            phi1: Expr::zero(),
            psi1: Expr::zero(),
            omega1: Expr::zero(),
            u0: Expr::zero(),
            v0: Expr::zero(),
            w0: Expr::zero(),
            u1: Expr::zero(),
            v1: Expr::zero(),
            w1: Expr::zero(),
            xi0: Expr::zero(),
            theta0: Expr::zero(),
        }
    }
}

impl InitialData {
    pub const KEYS: [&'static str; 14] = [
        "phi0", "psi0", "omega0", "phi1", "psi1", "omega1", "u0", "v0", "w0", "u1", "v1", "w1",
        "xi0", "theta0",
    ];

    pub fn get_mut(&mut self, key: &str) -> Option<&mut Expr> {
        Some(match key {
            "phi0" => &mut self.phi0,
            "psi0" => &mut self.psi0,
            "omega0" => &mut self.omega0,
            "phi1" => &mut self.phi1,
            "psi1" => &mut self.psi1,
            "omega1" => &mut self.omega1,
            "u0" => &mut self.u0,
            "v0" => &mut self.v0,
            "w0" => &mut self.w0,
            "u1" => &mut self.u1,
            "v1" => &mut self.v1,
            "w1" => &mut self.w1,
            "xi0" => &mut self.xi0,
            "theta0" => &mut self.theta0,
            _ => return None,
        })
    }
}

/// Mechanical loads and heat sources as formulas in `x`.
///
/// `p*` drives the transversal equation, `r*` the shear equation and `q*` the
/// longitudinal equation; `h1`, `h2` are the heat sources of the damped part.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSet {
    pub p1: Expr,
    pub r1: Expr,
    pub q1: Expr,
    pub h1: Expr,
    pub h2: Expr,
    pub p2: Expr,
    pub r2: Expr,
    pub q2: Expr,
}

impl Default for ForcingSet {
    fn default() -> Self {
        Self {
            p1: Expr::zero(),
            r1: Expr::zero(),
            q1: Expr::zero(),
            h1: Expr::zero(),
            h2: Expr::zero(),
            p2: Expr::zero(),
            r2: Expr::zero(),
            q2: Expr::zero(),
        }
    }
}

impl ForcingSet {
    pub const KEYS: [&'static str; 8] = ["p1", "r1", "q1", "h1", "h2", "p2", "r2", "q2"];

    pub fn get_mut(&mut self, key: &str) -> Option<&mut Expr> {
        Some(match key {
            "p1" => &mut self.p1,
            "r1" => &mut self.r1,
            "q1" => &mut self.q1,
            "h1" => &mut self.h1,
            "h2" => &mut self.h2,
            "p2" => &mut self.p2,
            "r2" => &mut self.r2,
            "q2" => &mut self.q2,
            _ => return None,
        })
    }

    pub fn has_heat_sources(&self) -> bool {
        !(self.h1.is_zero_literal() && self.h2.is_zero_literal())
    }

    /// Copy with both heat sources removed.
    pub fn without_heat_sources(&self) -> Self {
        Self {
            h1: Expr::zero(),
            h2: Expr::zero(),
            ..self.clone()
        }
    }

    pub fn sample(&self, g: &Grid) -> SampledForcing {
        let on = |e: &Expr, xs: &[f64]| xs.iter().map(|&x| e.eval(x)).collect::<Vec<_>>();
        let dx = g.damped_x();
        let ux = g.undamped_x();
        SampledForcing {
            damped: [on(&self.p1, dx), on(&self.r1, dx), on(&self.q1, dx)],
            undamped: [on(&self.p2, ux), on(&self.r2, ux), on(&self.q2, ux)],
            heat: [on(&self.h1, dx), on(&self.h2, dx)],
        }
    }
}

/// Sources sampled on the segment nodes, indexed like [`SegmentFields`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledForcing {
    pub damped: [Vec<f64>; 3],
    pub undamped: [Vec<f64>; 3],
    pub heat: [Vec<f64>; 2],
}

impl SampledForcing {
    pub fn zeros(g: &Grid) -> Self {
        ForcingSet::default().sample(g)
    }

    pub fn has_heat_sources(&self) -> bool {
        self.heat.iter().flatten().any(|&v| v != 0.0)
    }

    /// Pointwise `a + b - c`, used for affinity checks.
    pub fn combine(a: &Self, b: &Self, c: &Self) -> Self {
        fn z(a: &[Vec<f64>], b: &[Vec<f64>], c: &[Vec<f64>]) -> Vec<Vec<f64>> {
            a.iter()
                .zip(b)
                .zip(c)
                .map(|((a, b), c)| {
                    a.iter()
                        .zip(b)
                        .zip(c)
                        .map(|((a, b), c)| a + b - c)
                        .collect()
                })
                .collect()
        }
        let arr3 = |v: Vec<Vec<f64>>| -> [Vec<f64>; 3] { v.try_into().expect("three") };
        let arr2 = |v: Vec<Vec<f64>>| -> [Vec<f64>; 2] { v.try_into().expect("two") };
        Self {
            damped: arr3(z(&a.damped, &b.damped, &c.damped)),
            undamped: arr3(z(&a.undamped, &b.undamped, &c.undamped)),
            heat: arr2(z(&a.heat, &b.heat, &c.heat)),
        }
    }
}

/// Samples the initial data on the grid, then enforces the Dirichlet rows and
/// copies the damped-side interface value into the undamped trace.
pub fn sample_initial_state(g: &Grid, ic: &InitialData) -> FieldState {
    let on = |e: &Expr, xs: &[f64]| xs.iter().map(|&x| e.eval(x)).collect::<Vec<_>>();
    let dx = g.damped_x();
    let ux = g.undamped_x();
    let mut s = FieldState {
        damped: SegmentFields {
            disp: [on(&ic.phi0, dx), on(&ic.psi0, dx), on(&ic.omega0, dx)],
            vel: [on(&ic.phi1, dx), on(&ic.psi1, dx), on(&ic.omega1, dx)],
        },
        undamped: SegmentFields {
            disp: [on(&ic.u0, ux), on(&ic.v0, ux), on(&ic.w0, ux)],
            vel: [on(&ic.u1, ux), on(&ic.v1, ux), on(&ic.w1, ux)],
        },
        xi: on(&ic.xi0, dx),
        theta: on(&ic.theta0, dx),
        t: 0.0,
    };
    copy_interface_traces(&mut s);
    apply_dirichlet(&mut s);
    s
}

/// Overwrites the undamped interface trace with the damped one.
pub fn copy_interface_traces(s: &mut FieldState) {
    let m = s.damped.len() - 1;
    for c in 0..3 {
        s.undamped.disp[c][0] = s.damped.disp[c][m];
        s.undamped.vel[c][0] = s.damped.vel[c][m];
    }
}

/// Zeroes the clamped mechanical rows at both beam ends and the temperature
/// rows at both ends of the damped segment.
pub fn apply_dirichlet(s: &mut FieldState) {
    for c in 0..3 {
        s.damped.disp[c][0] = 0.0;
        s.damped.vel[c][0] = 0.0;
        let last = s.undamped.len() - 1;
        s.undamped.disp[c][last] = 0.0;
        s.undamped.vel[c][last] = 0.0;
    }
    let m = s.xi.len() - 1;
    for field in [&mut s.xi, &mut s.theta] {
        field[0] = 0.0;
        field[m] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::grid::build_grid;
    use proptest::prelude::*;

    fn grid() -> Grid {
        build_grid(10.0, 4.0, 10).unwrap()
    }

    fn straight_limit_ic() -> InitialData {
        InitialData {
            phi0: parse("-3/16*x^2 + 3/4*x").unwrap(),
            xi0: parse("x^2 - 4*x").unwrap(),
            ..Default::default()
        }
    }

    #[test]
    fn samples_polynomial_initial_data() {
        let g = grid();
        let s = sample_initial_state(&g, &straight_limit_ic());
        assert!((s.phi()[20] - 0.75).abs() < 1e-15);
        assert!(s.xi[40].abs() < 1e-14);
        assert_eq!(s.xi[0], 0.0);
    }

    #[test]
    fn zero_expressions_give_zero_state() {
        let g = grid();
        assert_eq!(sample_initial_state(&g, &InitialData::default()), FieldState::zeros(&g));
    }

    #[test]
    fn interface_trace_takes_damped_value() {
        let g = grid();
        let ic = InitialData {
            phi0: parse("1").unwrap(),
            u0: parse("2").unwrap(),
            ..Default::default()
        };
        let s = sample_initial_state(&g, &ic);
        assert_eq!(s.phi()[40], 1.0);
        assert_eq!(s.u()[0], 1.0);
        assert_eq!(s.u()[1], 2.0);
    }

    #[test]
    fn dirichlet_rows() {
        let g = grid();
        let mut s = FieldState::zeros(&g);
        s.damped.disp[0][0] = 0.3;
        s.xi[40] = 0.5;
        s.xi[20] = 0.5;
        apply_dirichlet(&mut s);
        assert_eq!(s.phi()[0], 0.0);
        assert_eq!(s.xi[40], 0.0);
        assert_eq!(s.xi[20], 0.5);
    }

    proptest! {
        #[test]
        fn dirichlet_is_an_idempotent_linear_projection(
            a in prop::collection::vec(-1.0f64..1.0, 41),
            b in prop::collection::vec(-1.0f64..1.0, 61),
            scale in -3.0f64..3.0,
        ) {
            let g = grid();
            let mut s = FieldState::zeros(&g);
            s.damped.disp[1] = a.clone();
            s.damped.vel[2] = a.clone();
            s.undamped.disp[0] = b.clone();
            s.xi = a.clone();
            apply_dirichlet(&mut s);
            let once = s.clone();
            apply_dirichlet(&mut s);
            prop_assert_eq!(&s, &once);

            let mut scaled = FieldState::zeros(&g);
            scaled.damped.disp[1] = a.iter().map(|v| v * scale).collect();
            scaled.xi = a.iter().map(|v| v * scale).collect();
            apply_dirichlet(&mut scaled);
            for (x, y) in scaled.psi().iter().zip(once.psi()) {
                prop_assert!((x - scale * y).abs() < 1e-15);
            }
            for (x, y) in scaled.xi.iter().zip(&once.xi) {
                prop_assert!((x - scale * y).abs() < 1e-15);
            }
        }
    }
}
