use crate::error::{Error, Result};

/// Tolerance for deciding that a length is an integer multiple of the spacing.
const ALIGN_TOL: f64 = 1e-9;

/// Uniform mesh over `[0, L]` with the interface `L0` on a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n_total: usize,
    pub h: f64,
    pub interface_index: usize,
    pub x: Vec<f64>,
}

impl Grid {
    /// Number of nodes in the damped segment, interface node included.
    pub fn damped_len(&self) -> usize {
        self.interface_index + 1
    }

    /// Number of nodes in the undamped segment, interface node included.
    pub fn undamped_len(&self) -> usize {
        self.n_total - self.interface_index
    }

    pub fn damped_x(&self) -> &[f64] {
        &self.x[..=self.interface_index]
    }

    pub fn undamped_x(&self) -> &[f64] {
        &self.x[self.interface_index..]
    }

    /// Fails unless both segments have at least `n` nodes strictly inside.
    pub fn require_interior(&self, n: usize) -> Result<()> {
        if self.interface_index < n + 1 || self.n_total - 1 - self.interface_index < n + 1 {
            return Err(Error::InvalidGrid(format!(
                "each segment needs at least {n} interior nodes"
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.x[self.n_total - 1]
    }

    pub fn interface(&self) -> f64 {
        self.x[self.interface_index]
    }

    /// Index of the node at `x`, if `x` lies on the grid.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let s = x / self.h;
        let i = s.round();
        if i < 0.0 || (s - i).abs() > ALIGN_TOL * s.abs().max(1.0) {
            return None;
        }
        let i = i as usize;
        (i < self.n_total).then_some(i)
    }

    /// Trapezoid weights of a segment with `len` nodes.
    pub fn trapezoid_weights(&self, len: usize) -> Vec<f64> {
        let mut w = vec![self.h; len];
        if len > 0 {
            w[0] = 0.5 * self.h;
            w[len - 1] = 0.5 * self.h;
        }
        w
    }
}

fn integer_ratio(value: f64, unit: f64) -> Option<usize> {
    let s = value / unit;
    let n = s.round();
    ((s - n).abs() <= ALIGN_TOL * s.abs().max(1.0) && n >= 1.0).then_some(n as usize)
}

/// Uniform grid with `n_per_unit` cells per unit length.
pub fn build_grid(length: f64, interface: f64, n_per_unit: usize) -> Result<Grid> {
    if n_per_unit == 0 {
        return Err(Error::InvalidGrid("n_per_unit must be positive".into()));
    }
    if !(interface > 0.0 && interface < length) {
        return Err(Error::InterfaceOutOfRange);
    }
    let h = 1.0 / n_per_unit as f64;
    let cells = integer_ratio(length, h).ok_or_else(|| {
        Error::InvalidGrid(format!("length {length} is not a multiple of h = {h}"))
    })?;
    let interface_index =
        integer_ratio(interface, h).ok_or(Error::InterfaceNotOnGrid { l0: interface, h })?;
    if interface_index >= cells {
        return Err(Error::InterfaceOutOfRange);
    }
    let x = (0..=cells)
        .map(|i| i as f64 / n_per_unit as f64)
        .collect::<Vec<_>>();
    Ok(Grid {
        n_total: cells + 1,
        h,
        interface_index,
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_beam_grid() {
        let g = build_grid(10.0, 4.0, 10).unwrap();
        assert_eq!(g.h, 0.1);
        assert_eq!(g.n_total, 101);
        assert_eq!(g.interface_index, 40);
        assert_eq!(g.x[40], 4.0);
        assert_eq!(g.damped_len(), 41);
        assert_eq!(g.undamped_len(), 61);
        assert!(g.x.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn smallest_aligned_grid() {
        let g = build_grid(1.0, 0.5, 2).unwrap();
        assert_eq!(g.h, 0.5);
        assert_eq!(g.interface_index, 1);
        assert_eq!(g.n_total, 3);
    }

    #[test]
    fn misaligned_interface() {
        assert!(matches!(
            build_grid(10.0, 4.05, 10),
            Err(Error::InterfaceNotOnGrid { .. })
        ));
    }

    #[test]
    fn node_lookup() {
        let g = build_grid(10.0, 4.0, 10).unwrap();
        assert_eq!(g.node_at(2.0), Some(20));
        assert_eq!(g.node_at(6.0), Some(60));
        assert_eq!(g.node_at(6.05), None);
        assert_eq!(g.node_at(10.5), None);
    }
}
