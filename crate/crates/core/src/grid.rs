//! Square sampling grid for the conformal coordinates x1 = s + it, x2 = s - it.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest resolution accepted; the one-sided boundary stencils need three
/// points and the report region needs a 2-node margin on each side.
pub const MIN_RESOLUTION: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: [f64; 2],
    pub half_width: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            half_width: 1.0,
            n: 201,
        }
    }
}

/// Uniform n×n grid over `[s0 - hw, s0 + hw] × [t0 - hw, t0 + hw]`.
///
/// Nodes are numbered row-major with `s` varying fastest: node `j*n + i`
/// sits at `(s_i, t_j)`. An optional mask deactivates nodes (e.g. near a
/// singular locus); inactive nodes are skipped by reports and singularity
/// checks.
#[derive(Clone, PartialEq)]
pub struct ConformalGrid {
    spec: GridSpec,
    active: Option<Vec<bool>>,
}

impl fmt::Debug for ConformalGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalGrid")
            .field("center", &self.spec.center)
            .field("half_width", &self.spec.half_width)
            .field("n", &self.spec.n)
            .field("masked", &self.active.is_some())
            .finish()
    }
}

impl ConformalGrid {
    pub fn new(center: [f64; 2], half_width: f64, n: usize) -> Result<Self> {
        Self::from_spec(GridSpec {
            center,
            half_width,
            n,
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        if spec.n < MIN_RESOLUTION {
            return Err(Error::Grid(format!(
                "resolution {} below minimum {MIN_RESOLUTION}",
                spec.n
            )));
        }
        if !(spec.half_width.is_finite() && spec.half_width > 0.0) {
            return Err(Error::Grid(format!(
                "half-width must be positive, got {}",
                spec.half_width
            )));
        }
        if !(spec.center[0].is_finite() && spec.center[1].is_finite()) {
            return Err(Error::Grid("center must be finite".into()));
        }
        Ok(Self { spec, active: None })
    }

    /// `[-1, 1]²` with `n` nodes per side.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new([0.0, 0.0], 1.0, n)
    }

    /// Deactivates every node where `excluded(x1)` holds.
    pub fn with_exclusion<P>(mut self, excluded: P) -> Result<Self>
    where
        P: Fn(Complex64) -> bool,
    {
        let mask: Vec<bool> = (0..self.len()).map(|k| !excluded(self.x1(k))).collect();
        if !mask[self.center_node()] {
            return Err(Error::Grid(
                "exclusion removes the base node at the grid center".into(),
            ));
        }
        self.active = Some(mask);
        Ok(self)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn len(&self) -> usize {
        self.spec.n * self.spec.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        2.0 * self.spec.half_width / (self.spec.n - 1) as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.spec.center[0] - self.spec.half_width + self.h() * i as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.spec.center[1] - self.spec.half_width + self.h() * j as f64
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.spec.n + i
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.spec.n, node / self.spec.n)
    }

    pub fn x1(&self, node: usize) -> Complex64 {
        let (i, j) = self.ij(node);
        Complex64::new(self.s(i), self.t(j))
    }

    pub fn x2(&self, node: usize) -> Complex64 {
        self.x1(node).conj()
    }

    /// Node nearest the geometric center (exact for odd `n`).
    pub fn center_node(&self) -> usize {
        let c = (self.spec.n - 1) / 2;
        self.node(c, c)
    }

    pub fn is_masked(&self) -> bool {
        self.active.is_some()
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active.as_ref().map_or(true, |m| m[node])
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_active(k))
    }

    /// Nodes at which residuals are reported: at least two nodes from the
    /// boundary, with the whole radius-2 neighbourhood active.
    pub fn report_nodes(&self) -> Vec<usize> {
        let n = self.spec.n;
        let mut out = Vec::with_capacity((n - 4) * (n - 4));
        for j in 2..n - 2 {
            for i in 2..n - 2 {
                let ok = match &self.active {
                    None => true,
                    Some(mask) => {
                        (j - 2..=j + 2).all(|jj| (i - 2..=i + 2).all(|ii| mask[jj * n + ii]))
                    }
                };
                if ok {
                    out.push(self.node(i, j));
                }
            }
        }
        out
    }

    /// Same physical square at a different resolution, mask predicate not
    /// carried over.
    pub fn with_resolution(&self, n: usize) -> Result<Self> {
        Self::new(self.spec.center, self.spec.half_width, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_are_conjugate_pairs() {
        let g = ConformalGrid::unit_square(11).unwrap();
        assert!((g.h() - 0.2).abs() < 1e-15);
        for k in 0..g.len() {
            assert_eq!(g.x2(k), g.x1(k).conj());
        }
        assert_eq!(g.x1(g.center_node()), Complex64::new(0.0, 0.0));
        assert_eq!(g.x1(g.node(10, 0)), Complex64::new(1.0, -1.0));
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(ConformalGrid::unit_square(4).is_err());
        assert!(ConformalGrid::new([0.0, 0.0], 0.0, 9).is_err());
    }

    #[test]
    fn report_region_respects_mask() {
        let g = ConformalGrid::unit_square(21).unwrap();
        assert_eq!(g.report_nodes().len(), 17 * 17);
        let masked = g
            .with_exclusion(|x| (x - Complex64::new(0.5, 0.5)).norm() < 0.05)
            .unwrap();
        let inactive = masked.len() - masked.active_nodes().count();
        assert_eq!(inactive, 1);
        assert_eq!(masked.report_nodes().len(), 17 * 17 - 25);
        assert!(ConformalGrid::unit_square(21)
            .unwrap()
            .with_exclusion(|x| x.norm() < 0.01)
            .is_err());
    }
}
