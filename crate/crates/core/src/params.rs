//! Material and geometry coefficients of the composite beam, plus the pointwise
//! stress resultants (shear force, axial force, bending moment and the nonlinear
//! axial stress) shared by the discretization and the diagnostics.

use crate::error::{Error, Result};

/// Relative tolerance used for the `rho1/beta1 == k1/nu1` equality check.
const RATIO_TOLERANCE: f64 = 1e-12;

/// All coefficients of the transmission Bresse system.
///
/// Index 1 refers to the thermally damped segment `(0, L0)`, index 2 to the
/// undamped segment `(L0, L)`. The axial modulus `sigma` is shared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub rho1: f64,
    pub rho2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub k1: f64,
    pub k2: f64,
    pub sigma: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mu: f64,
    pub lambda: f64,
    /// Curvature of the arch (`1/R`), zero for a straight beam.
    pub l: f64,
    /// Total beam length.
    pub length: f64,
    /// Interface position.
    pub interface: f64,
}

/// Which part of the beam a material point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    Damped,
    Undamped,
}

/// Coefficients that differ between the two segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCoeffs {
    pub rho: f64,
    pub beta: f64,
    pub k: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// True when the coefficients of the damped part satisfy the sufficient
    /// condition for asymptotic smoothness (and hence a global attractor):
    /// `rho1 > rho2`, `beta1 > beta2`, `k1 <= k2`, `nu1 <= nu2` and
    /// `rho1/beta1 == k1/nu1`.
    pub attractor_condition: bool,
    /// Human readable reasons the attractor condition fails, empty otherwise.
    pub notes: Vec<String>,
}

impl PhysicalParams {
    /// Every coefficient equal to one, straight beam of unit length.
    pub fn unit() -> Self {
        Self {
            rho1: 1.0,
            rho2: 1.0,
            beta1: 1.0,
            beta2: 1.0,
            k1: 1.0,
            k2: 1.0,
            sigma: 1.0,
            nu1: 1.0,
            nu2: 1.0,
            alpha1: 1.0,
            alpha2: 1.0,
            gamma: 1.0,
            delta: 1.0,
            mu: 1.0,
            lambda: 1.0,
            l: 0.0,
            length: 1.0,
            interface: 0.5,
        }
    }

    pub fn segment(&self, segment: Segment) -> SegmentCoeffs {
        match segment {
            Segment::Damped => SegmentCoeffs {
                rho: self.rho1,
                beta: self.beta1,
                k: self.k1,
                nu: self.nu1,
            },
            Segment::Undamped => SegmentCoeffs {
                rho: self.rho2,
                beta: self.beta2,
                k: self.k2,
                nu: self.nu2,
            },
        }
    }

    /// Named strictly positive coefficients, in declaration order.
    pub fn positive_coefficients(&self) -> [(&'static str, f64); 17] {
        [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("k1", self.k1),
            ("k2", self.k2),
            ("sigma", self.sigma),
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("L", self.length),
            ("L0", self.interface),
        ]
    }
}

/// Checks the positivity and ordering invariants and evaluates the attractor
/// condition. Hard violations are returned as errors; the attractor condition
/// is advisory only.
pub fn validate_params(p: &PhysicalParams) -> Result<ValidationReport> {
    for (name, value) in p.positive_coefficients() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveCoefficient(name.to_string()));
        }
    }
    if !(p.l >= 0.0) || !p.l.is_finite() {
        return Err(Error::NonPositiveCoefficient("l".to_string()));
    }
    if !(p.interface < p.length) {
        return Err(Error::InterfaceOutOfRange);
    }

    let mut notes = Vec::new();
    if !(p.rho1 > p.rho2) {
        notes.push(format!("rho1 > rho2 fails ({} vs {})", p.rho1, p.rho2));
    }
    if !(p.beta1 > p.beta2) {
        notes.push(format!("beta1 > beta2 fails ({} vs {})", p.beta1, p.beta2));
    }
    if !(p.k1 <= p.k2) {
        notes.push(format!("k1 <= k2 fails ({} vs {})", p.k1, p.k2));
    }
    if !(p.nu1 <= p.nu2) {
        notes.push(format!("nu1 <= nu2 fails ({} vs {})", p.nu1, p.nu2));
    }
    let lhs = p.rho1 / p.beta1;
    let rhs = p.k1 / p.nu1;
    if (lhs - rhs).abs() > RATIO_TOLERANCE * lhs.abs().max(rhs.abs()) {
        notes.push(format!("rho1/beta1 = k1/nu1 fails ({lhs} vs {rhs})"));
    }
    Ok(ValidationReport {
        attractor_condition: notes.is_empty(),
        notes,
    })
}

/// Pointwise kinematic quantities entering the stress resultants.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointKinematics {
    /// Transversal displacement (`phi` or `u`).
    pub transversal: f64,
    pub transversal_x: f64,
    /// Shear angle variation (`psi` or `v`).
    pub shear: f64,
    pub shear_x: f64,
    /// Longitudinal displacement (`omega` or `w`).
    pub longitudinal: f64,
    pub longitudinal_x: f64,
}

/// Stress resultants at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Resultants {
    /// Shear force `Q = k (phi_x + psi + l omega)`.
    pub shear_force: f64,
    /// Linear axial force `N = sigma (omega_x - l phi)`.
    pub axial_force: f64,
    /// Bending moment `M = nu psi_x`.
    pub bending_moment: f64,
    /// Nonlinear axial stress `J = sigma (omega_x - l phi + psi^2 / 2)`.
    pub axial_stress: f64,
}

pub fn constitutive(p: &PhysicalParams, segment: Segment, q: &PointKinematics) -> Resultants {
    let c = p.segment(segment);
    let n = p.sigma * (q.longitudinal_x - p.l * q.transversal);
    Resultants {
        shear_force: c.k * (q.transversal_x + q.shear + p.l * q.longitudinal),
        axial_force: n,
        bending_moment: c.nu * q.shear_x,
        axial_stress: n + 0.5 * p.sigma * q.shear * q.shear,
    }
}
