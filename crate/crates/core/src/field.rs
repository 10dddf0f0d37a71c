//! θ-polynomial valued fields sampled on a [`ConformalGrid`].
//!
//! A [`Field`] stores one complex plane per θ-monomial `θ3^m θ4^n`, with
//! `m <= d3`, `n <= d4`. Products are truncated at [`THETA_CAP`] per variable
//! and every field records, per variable, the highest order whose
//! coefficients are still exact (`exactness`). Differentiating in θ lowers
//! that order by one, so residual reports only ever read certified sectors.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ConformalGrid;
use crate::theta::{ThetaConj, ThetaPoly, ThetaVar, THETA_CAP};

/// Exactness marker: every order in this variable is exact.
pub const EXACT: i16 = i16::MAX;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Conformal derivative direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XDir {
    X1,
    X2,
}

/// Finite-difference order for x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Stencil {
    /// Central differences, one-sided second order at the boundary.
    #[default]
    Second,
    /// Five-point central differences, one-sided fourth order at the boundary.
    Fourth,
}

/// Real grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S,
    T,
}

#[derive(Clone)]
pub struct Field {
    grid: Arc<ConformalGrid>,
    deg: [usize; 2],
    exact: [i16; 2],
    data: Vec<Complex64>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("n", &self.grid.n())
            .field("deg", &self.deg)
            .field("exact", &self.exact)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

#[inline]
fn plane_index(deg4: usize, m: usize, n: usize) -> usize {
    m * (deg4 + 1) + n
}

fn min_exact(a: i16, b: i16) -> i16 {
    a.min(b)
}

impl Field {
    fn raw(grid: &Arc<ConformalGrid>, deg: [usize; 2], exact: [i16; 2]) -> Self {
        let planes = (deg[0] + 1) * (deg[1] + 1);
        Self {
            grid: Arc::clone(grid),
            deg,
            exact,
            data: vec![ZERO; planes * grid.len()],
        }
    }

    fn mask_inactive(mut self) -> Self {
        if self.grid.is_masked() {
            let len = self.grid.len();
            let nan = Complex64::new(f64::NAN, f64::NAN);
            for k in 0..len {
                if !self.grid.is_active(k) {
                    for p in 0..self.planes() {
                        self.data[p * len + k] = nan;
                    }
                }
            }
        }
        self
    }

    pub fn zeros(grid: &Arc<ConformalGrid>) -> Self {
        Self::raw(grid, [0, 0], [EXACT, EXACT]).mask_inactive()
    }

    pub fn constant(grid: &Arc<ConformalGrid>, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        let mut f = Self::raw(grid, [0, 0], [EXACT, EXACT]);
        f.data.iter_mut().for_each(|v| *v = c);
        f.mask_inactive()
    }

    /// θ-free field from a function of x1 = s + it.
    pub fn from_fn<F>(grid: &Arc<ConformalGrid>, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let mut out = Self::raw(grid, [0, 0], [EXACT, EXACT]);
        out.data
            .par_iter_mut()
            .enumerate()
            .for_each(|(k, v)| *v = f(grid.x1(k)));
        out.mask_inactive()
    }

    /// Field that is the same θ-polynomial at every node.
    pub fn from_theta(grid: &Arc<ConformalGrid>, p: &ThetaPoly) -> Self {
        Self::from_node_fn(grid, |_| *p)
    }

    /// General field from a per-node θ-polynomial. Degrees are the maxima
    /// over nodes; coefficients are taken as exact.
    pub fn from_node_fn<F>(grid: &Arc<ConformalGrid>, f: F) -> Self
    where
        F: Fn(Complex64) -> ThetaPoly + Sync,
    {
        let values: Vec<ThetaPoly> = (0..grid.len())
            .into_par_iter()
            .map(|k| f(grid.x1(k)))
            .collect();
        let mut deg = [0usize; 2];
        for (k, v) in values.iter().enumerate() {
            if grid.is_active(k) {
                deg[0] = deg[0].max(v.degree(ThetaVar::Theta3));
                deg[1] = deg[1].max(v.degree(ThetaVar::Theta4));
            }
        }
        let mut out = Self::raw(grid, deg, [EXACT, EXACT]);
        let len = grid.len();
        for m in 0..=deg[0] {
            for n in 0..=deg[1] {
                let p = plane_index(deg[1], m, n);
                for (k, v) in values.iter().enumerate() {
                    out.data[p * len + k] = v.coeff(m, n);
                }
            }
        }
        out.mask_inactive()
    }

    /// The coordinate field θ3 or θ4.
    pub fn theta(grid: &Arc<ConformalGrid>, var: ThetaVar) -> Self {
        let p = match var {
            ThetaVar::Theta3 => ThetaPoly::monomial(1, 0, ONE),
            ThetaVar::Theta4 => ThetaPoly::monomial(0, 1, ONE),
        };
        Self::from_theta(grid, &p)
    }

    /// Assembles a field from explicit planes, ordered `m`-major.
    pub fn from_planes(
        grid: &Arc<ConformalGrid>,
        deg: [usize; 2],
        exact: [i16; 2],
        planes: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if deg[0] > THETA_CAP || deg[1] > THETA_CAP {
            return Err(Error::InvalidParameter(format!(
                "θ degree {deg:?} above cap {THETA_CAP}"
            )));
        }
        let expected = (deg[0] + 1) * (deg[1] + 1);
        if planes.len() != expected {
            return Err(Error::DimensionMismatch {
                sector: "θ planes".into(),
                left: expected,
                right: planes.len(),
            });
        }
        let mut data = Vec::with_capacity(expected * grid.len());
        for p in planes {
            if p.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    sector: "grid nodes".into(),
                    left: grid.len(),
                    right: p.len(),
                });
            }
            data.extend(p);
        }
        Ok(Self {
            grid: Arc::clone(grid),
            deg,
            exact,
            data,
        }
        .mask_inactive())
    }

    pub fn grid(&self) -> &Arc<ConformalGrid> {
        &self.grid
    }

    pub fn degree(&self) -> [usize; 2] {
        self.deg
    }

    pub fn exactness(&self) -> [i16; 2] {
        self.exact
    }

    pub fn with_exactness(mut self, exact: [i16; 2]) -> Self {
        self.exact = exact;
        self
    }

    fn planes(&self) -> usize {
        (self.deg[0] + 1) * (self.deg[1] + 1)
    }

    pub fn is_theta_free(&self) -> bool {
        self.deg == [0, 0]
    }

    /// Coefficient plane of `θ3^m θ4^n`, `None` when above the stored degree
    /// (the coefficient is then zero).
    pub fn plane(&self, m: usize, n: usize) -> Option<&[Complex64]> {
        if m > self.deg[0] || n > self.deg[1] {
            return None;
        }
        let len = self.grid.len();
        let p = plane_index(self.deg[1], m, n);
        Some(&self.data[p * len..(p + 1) * len])
    }

    fn plane_mut(&mut self, m: usize, n: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        let p = plane_index(self.deg[1], m, n);
        &mut self.data[p * len..(p + 1) * len]
    }

    pub fn body(&self) -> &[Complex64] {
        self.plane(0, 0).expect("body plane always present")
    }

    pub fn coeff(&self, m: usize, n: usize, node: usize) -> Complex64 {
        self.plane(m, n).map_or(ZERO, |p| p[node])
    }

    pub fn at(&self, node: usize) -> ThetaPoly {
        let mut p = ThetaPoly::zero();
        for m in 0..=self.deg[0] {
            for n in 0..=self.deg[1] {
                p.set(m, n, self.coeff(m, n, node));
            }
        }
        p
    }

    /// Sectors `(m, n)` whose coefficients are exact and possibly nonzero.
    pub fn certified_sectors(&self) -> Vec<[usize; 2]> {
        let lim = |v: usize| -> Option<usize> {
            if self.exact[v] < 0 {
                None
            } else {
                Some(self.deg[v].min(self.exact[v] as usize))
            }
        };
        match (lim(0), lim(1)) {
            (Some(a), Some(b)) => (0..=a).flat_map(|m| (0..=b).map(move |n| [m, n])).collect(),
            _ => Vec::new(),
        }
    }

    /// Largest coefficient magnitude over active nodes and stored sectors.
    pub fn max_abs(&self) -> f64 {
        let len = self.grid.len();
        let mut best = 0.0f64;
        for p in 0..self.planes() {
            for k in self.grid.active_nodes() {
                best = best.max(self.data[p * len + k].norm());
            }
        }
        best
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        let len = self.grid.len();
        for p in 0..self.planes() {
            for k in self.grid.active_nodes() {
                let v = self.data[p * len + k];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    let x = self.grid.x1(k);
                    return Err(Error::NonFinite(format!(
                        "{what} at s={}, t={}",
                        x.re, x.im
                    )));
                }
            }
        }
        Ok(())
    }

    fn same_grid(&self, other: &Field) {
        assert!(
            Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid,
            "field operation across different grids"
        );
    }

    fn combine(&self, other: &Field, sign: f64) -> Field {
        self.same_grid(other);
        let deg = [self.deg[0].max(other.deg[0]), self.deg[1].max(other.deg[1])];
        let exact = [
            min_exact(self.exact[0], other.exact[0]),
            min_exact(self.exact[1], other.exact[1]),
        ];
        let mut out = Field::raw(&self.grid, deg, exact);
        for m in 0..=deg[0] {
            for n in 0..=deg[1] {
                let a = self.plane(m, n);
                let b = other.plane(m, n);
                let dst = out.plane_mut(m, n);
                match (a, b) {
                    (Some(a), Some(b)) => dst
                        .iter_mut()
                        .zip(a.iter().zip(b))
                        .for_each(|(d, (x, y))| *d = x + y * sign),
                    (Some(a), None) => dst.copy_from_slice(a),
                    (None, Some(b)) => dst.iter_mut().zip(b).for_each(|(d, y)| *d = y * sign),
                    (None, None) => {}
                }
            }
        }
        out
    }

    /// Truncated product.
    pub fn mul_field(&self, other: &Field) -> Field {
        self.same_grid(other);
        let mut deg = [0usize; 2];
        let mut exact = [0i16; 2];
        for v in 0..2 {
            let full = self.deg[v] + other.deg[v];
            deg[v] = full.min(THETA_CAP);
            let cap = if full > THETA_CAP {
                THETA_CAP as i16
            } else {
                EXACT
            };
            exact[v] = self.exact[v].min(other.exact[v]).min(cap);
        }
        if self.is_theta_free() && other.is_theta_free() {
            let mut out = Field::raw(&self.grid, deg, exact);
            out.data
                .par_iter_mut()
                .zip(self.data.par_iter().zip(other.data.par_iter()))
                .for_each(|(d, (a, b))| *d = a * b);
            return out;
        }
        let len = self.grid.len();
        let mut out = Field::raw(&self.grid, deg, exact);
        let d4 = deg[1];
        out.data
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(p, dst)| {
                let m = p / (d4 + 1);
                let n = p % (d4 + 1);
                for m1 in 0..=m.min(self.deg[0]) {
                    let m2 = m - m1;
                    if m2 > other.deg[0] {
                        continue;
                    }
                    for n1 in 0..=n.min(self.deg[1]) {
                        let n2 = n - n1;
                        if n2 > other.deg[1] {
                            continue;
                        }
                        let a = self.plane(m1, n1).unwrap();
                        let b = other.plane(m2, n2).unwrap();
                        dst.iter_mut()
                            .zip(a.iter().zip(b))
                            .for_each(|(d, (x, y))| *d += x * y);
                    }
                }
            });
        out
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Field {
        let c = c.into();
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add_scalar(&self, c: impl Into<Complex64>) -> Field {
        let c = c.into();
        let mut out = self.clone();
        out.plane_mut(0, 0).iter_mut().for_each(|v| *v += c);
        out
    }

    /// The field with its body removed.
    pub fn soul(&self) -> Field {
        let mut out = self.clone();
        out.plane_mut(0, 0).iter_mut().for_each(|v| *v = ZERO);
        out
    }

    fn soul_is_zero(&self) -> bool {
        let len = self.grid.len();
        (1..self.planes()).all(|p| {
            self.grid
                .active_nodes()
                .all(|k| self.data[p * len + k] == ZERO)
        })
    }

    fn check_body_nonzero(&self, what: &str) -> Result<()> {
        let body = self.body();
        for k in self.grid.active_nodes() {
            if body[k].norm() == 0.0 {
                let x = self.grid.x1(k);
                return Err(Error::Singular {
                    what: what.to_string(),
                    s: x.re,
                    t: x.im,
                });
            }
        }
        Ok(())
    }

    /// `g(self)` from the Taylor coefficients `g^(j)(b)/j!` at the body `b`,
    /// summed against powers of the nilpotent part.
    fn series<G>(&self, coeffs: G) -> Field
    where
        G: Fn(Complex64, &mut [Complex64]) + Sync,
    {
        let mut order = 0usize;
        if !self.soul_is_zero() {
            for v in 0..2 {
                if self.deg[v] > 0 {
                    order += THETA_CAP;
                }
            }
        }
        let len = self.grid.len();
        let body = self.body();
        let mut table = vec![ZERO; (order + 1) * len];
        table
            .par_chunks_mut(order + 1)
            .zip(body.par_iter())
            .for_each(|(row, b)| coeffs(*b, row));
        let coeff_field = |j: usize| -> Field {
            let mut f = Field::raw(&self.grid, [0, 0], [EXACT, EXACT]);
            for k in 0..len {
                f.data[k] = table[k * (order + 1) + j];
            }
            f
        };
        let out = if order == 0 {
            coeff_field(0).with_exactness(self.exact)
        } else {
            let nu = self.soul();
            let mut acc = coeff_field(order);
            for j in (0..order).rev() {
                acc = &acc.mul_field(&nu) + &coeff_field(j);
            }
            let mut exact = acc.exact;
            for (e, &d) in exact.iter_mut().zip(&self.deg) {
                if d > 0 {
                    *e = (*e).min(THETA_CAP as i16);
                }
            }
            acc.with_exactness(exact)
        };
        out.mask_inactive()
    }

    pub fn exp(&self) -> Field {
        self.series(|b, row| {
            let e = b.exp();
            let mut fact = 1.0;
            for (j, c) in row.iter_mut().enumerate() {
                if j > 0 {
                    fact *= j as f64;
                }
                *c = e / fact;
            }
        })
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Result<Field> {
        self.check_body_nonzero("logarithm of a vanishing field")?;
        let out = self.series(|b, row| {
            row[0] = b.ln();
            let inv = b.inv();
            let mut p = ONE;
            for (j, c) in row.iter_mut().enumerate().skip(1) {
                p *= inv;
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                *c = p * (sign / j as f64);
            }
        });
        out.ensure_finite("ln")?;
        Ok(out)
    }

    pub fn recip(&self) -> Result<Field> {
        self.check_body_nonzero("reciprocal of a vanishing field")?;
        let out = self.series(|b, row| {
            let inv = b.inv();
            let mut p = inv;
            for (j, c) in row.iter_mut().enumerate() {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                *c = p * sign;
                p *= inv;
            }
        });
        out.ensure_finite("recip")?;
        Ok(out)
    }

    /// Principal power `self^p`.
    pub fn powc(&self, p: impl Into<Complex64>) -> Result<Field> {
        let p = p.into();
        self.check_body_nonzero("power of a vanishing field")?;
        let out = self.series(move |b, row| {
            let bp = b.powc(p);
            let inv = b.inv();
            let mut binom = ONE;
            let mut ip = ONE;
            for (j, c) in row.iter_mut().enumerate() {
                if j > 0 {
                    binom = binom * (p - (j - 1) as f64) / j as f64;
                    ip *= inv;
                }
                *c = binom * bp * ip;
            }
        });
        out.ensure_finite("pow")?;
        Ok(out)
    }

    pub fn sqrt(&self) -> Result<Field> {
        self.powc(0.5)
    }

    /// Exact θ-derivative.
    pub fn d_theta(&self, var: ThetaVar) -> Field {
        let v = var.index();
        let mut deg = self.deg;
        deg[v] = deg[v].saturating_sub(1);
        let mut exact = self.exact;
        if exact[v] != EXACT {
            exact[v] -= 1;
        }
        let mut out = Field::raw(&self.grid, deg, exact);
        if self.deg[v] == 0 {
            return out.mask_inactive();
        }
        for m in 0..=deg[0] {
            for n in 0..=deg[1] {
                let (sm, sn, factor) = match var {
                    ThetaVar::Theta3 => (m + 1, n, (m + 1) as f64),
                    ThetaVar::Theta4 => (m, n + 1, (n + 1) as f64),
                };
                let src = self.plane(sm, sn).unwrap();
                out.plane_mut(m, n)
                    .iter_mut()
                    .zip(src)
                    .for_each(|(d, s)| *d = s * factor);
            }
        }
        out
    }

    /// Second-order finite difference along a real axis; one-sided at the
    /// boundary.
    pub fn d_axis(&self, axis: Axis) -> Field {
        self.d_axis_with(axis, Stencil::Second)
    }

    pub fn d_axis_with(&self, axis: Axis, stencil: Stencil) -> Field {
        let g = &self.grid;
        let n = g.n();
        let len = g.len();
        let h = g.h();
        let mut out = Field::raw(&self.grid, self.deg, self.exact);
        out.data
            .par_chunks_mut(len)
            .zip(self.data.par_chunks(len))
            .for_each(|(dst, src)| {
                let at = |line: usize, pos: usize| -> usize {
                    match axis {
                        Axis::S => line * n + pos,
                        Axis::T => pos * n + line,
                    }
                };
                for line in 0..n {
                    let f = |pos: usize| src[at(line, pos)];
                    for pos in 0..n {
                        dst[at(line, pos)] = match stencil {
                            Stencil::Second => second_order(&f, pos, n) / (2.0 * h),
                            Stencil::Fourth => fourth_order(&f, pos, n) / (12.0 * h),
                        };
                    }
                }
            });
        out
    }

    /// Wirtinger derivative ∂1 = (∂s − i∂t)/2 or ∂2 = (∂s + i∂t)/2.
    pub fn d_x(&self, dir: XDir) -> Field {
        self.d_x_with(dir, Stencil::Second)
    }

    pub fn d_x_with(&self, dir: XDir, stencil: Stencil) -> Field {
        let ds = self.d_axis_with(Axis::S, stencil);
        let dt = self.d_axis_with(Axis::T, stencil);
        let s = match dir {
            XDir::X1 => -1.0,
            XDir::X2 => 1.0,
        };
        let mut out = ds;
        out.data
            .par_iter_mut()
            .zip(dt.data.par_iter())
            .for_each(|(a, b)| *a = (*a + Complex64::new(0.0, s) * b) * 0.5);
        out
    }

    pub fn conj(&self, mode: ThetaConj) -> Field {
        let (deg, exact) = match mode {
            ThetaConj::Real => (self.deg, self.exact),
            ThetaConj::Pair => ([self.deg[1], self.deg[0]], [self.exact[1], self.exact[0]]),
        };
        let mut out = Field::raw(&self.grid, deg, exact);
        for m in 0..=self.deg[0] {
            for n in 0..=self.deg[1] {
                let (tm, tn) = match mode {
                    ThetaConj::Real => (m, n),
                    ThetaConj::Pair => (n, m),
                };
                let src = self.plane(m, n).unwrap();
                out.plane_mut(tm, tn)
                    .iter_mut()
                    .zip(src)
                    .for_each(|(d, s)| *d = s.conj());
            }
        }
        out
    }

    /// Largest deviation from reality, `max |f − conj f| / 2`.
    pub fn reality_defect(&self, mode: ThetaConj) -> f64 {
        (self - &self.conj(mode)).max_abs() * 0.5
    }

    /// Checks that coefficients of `θ3^m` (m ≥ `order3`) and `θ4^n`
    /// (n ≥ `order4`) vanish, i.e. `∂3^order3 f = ∂4^order4 f = 0`.
    pub fn check_nilpotency(&self, order3: usize, order4: usize) -> NilpotencyReport {
        let len = self.grid.len();
        let mut worst = 0.0f64;
        let mut sector = None;
        let mut uncertified = false;
        for m in 0..=self.deg[0] {
            for n in 0..=self.deg[1] {
                if m < order3 && n < order4 {
                    continue;
                }
                let certified = (self.exact[0] == EXACT || m as i16 <= self.exact[0])
                    && (self.exact[1] == EXACT || n as i16 <= self.exact[1]);
                if !certified {
                    uncertified = true;
                    continue;
                }
                let p = plane_index(self.deg[1], m, n);
                for k in self.grid.active_nodes() {
                    let v = self.data[p * len + k].norm();
                    if v > worst {
                        worst = v;
                        sector = Some([m, n]);
                    }
                }
            }
        }
        let scale = self.max_abs().max(1.0);
        NilpotencyReport {
            order3,
            order4,
            max_violation: worst,
            sector,
            uncertified,
            pass: worst <= NILPOTENCY_RTOL * scale,
        }
    }

    /// Drops top θ planes that vanish identically.
    pub fn trimmed(&self) -> Field {
        let mut deg = self.deg;
        let zero_plane = |f: &Field, m: usize, n: usize| {
            f.plane(m, n)
                .map_or(true, |p| f.grid.active_nodes().all(|k| p[k] == ZERO))
        };
        while deg[0] > 0 && (0..=deg[1]).all(|n| zero_plane(self, deg[0], n)) {
            deg[0] -= 1;
        }
        while deg[1] > 0 && (0..=deg[0]).all(|m| zero_plane(self, m, deg[1])) {
            deg[1] -= 1;
        }
        if deg == self.deg {
            return self.clone();
        }
        let mut out = Field::raw(&self.grid, deg, self.exact);
        for m in 0..=deg[0] {
            for n in 0..=deg[1] {
                out.plane_mut(m, n)
                    .copy_from_slice(self.plane(m, n).unwrap());
            }
        }
        out
    }
}

fn second_order(f: &impl Fn(usize) -> Complex64, pos: usize, n: usize) -> Complex64 {
    if pos == 0 {
        -3.0 * f(0) + 4.0 * f(1) - f(2)
    } else if pos == n - 1 {
        3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)
    } else {
        f(pos + 1) - f(pos - 1)
    }
}

fn fourth_order(f: &impl Fn(usize) -> Complex64, pos: usize, n: usize) -> Complex64 {
    const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let fwd = |w: &[f64; 5]| (0..5).map(|k| f(k) * w[k]).sum::<Complex64>();
    let bwd = |w: &[f64; 5]| -(0..5).map(|k| f(n - 1 - k) * w[k]).sum::<Complex64>();
    match pos {
        0 => fwd(&EDGE0),
        1 => fwd(&EDGE1),
        p if p == n - 1 => bwd(&EDGE0),
        p if p == n - 2 => bwd(&EDGE1),
        p => f(p - 2) - 8.0 * f(p - 1) + 8.0 * f(p + 1) - f(p + 2),
    }
}

/// Relative threshold (to the field's magnitude) below which a coefficient
/// counts as vanished in [`Field::check_nilpotency`].
pub const NILPOTENCY_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NilpotencyReport {
    pub order3: usize,
    pub order4: usize,
    pub max_violation: f64,
    pub sector: Option<[usize; 2]>,
    /// Some coefficients beyond the exact order could not be checked.
    pub uncertified: bool,
    pub pass: bool,
}

macro_rules! field_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                let f: fn(&Field, &Field) -> Field = $body;
                f(self, rhs)
            }
        }
        impl $tr<Field> for Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Field> for Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                (&self).$method(rhs)
            }
        }
        impl $tr<Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                self.$method(&rhs)
            }
        }
    };
}

field_binop!(Add, add, |a, b| a.combine(b, 1.0));
field_binop!(Sub, sub, |a, b| a.combine(b, -1.0));
field_binop!(Mul, mul, |a, b| a.mul_field(b));

macro_rules! scalar_ops {
    ($t:ty) => {
        impl Mul<$t> for &Field {
            type Output = Field;
            fn mul(self, rhs: $t) -> Field {
                self.scale(rhs)
            }
        }
        impl Mul<$t> for Field {
            type Output = Field;
            fn mul(self, rhs: $t) -> Field {
                self.scale(rhs)
            }
        }
        impl Add<$t> for &Field {
            type Output = Field;
            fn add(self, rhs: $t) -> Field {
                self.add_scalar(rhs)
            }
        }
        impl Add<$t> for Field {
            type Output = Field;
            fn add(self, rhs: $t) -> Field {
                self.add_scalar(rhs)
            }
        }
        impl Sub<$t> for &Field {
            type Output = Field;
            fn sub(self, rhs: $t) -> Field {
                self.add_scalar(-Complex64::from(rhs))
            }
        }
        impl Sub<$t> for Field {
            type Output = Field;
            fn sub(self, rhs: $t) -> Field {
                self.add_scalar(-Complex64::from(rhs))
            }
        }
    };
}

scalar_ops!(f64);
scalar_ops!(Complex64);

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<ConformalGrid> {
        Arc::new(ConformalGrid::unit_square(n).unwrap())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn interior_err(f: &Field, g: impl Fn(Complex64) -> Complex64) -> f64 {
        let grid = f.grid();
        grid.report_nodes()
            .into_iter()
            .map(|k| (f.body()[k] - g(grid.x1(k))).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn wirtinger_of_quadratics_is_exact() {
        let g = grid(21);
        let f = Field::from_fn(&g, |x| x * x);
        let d1 = f.d_x(XDir::X1);
        let d2 = f.d_x(XDir::X2);
        for k in 0..g.len() {
            assert!((d1.body()[k] - 2.0 * g.x1(k)).norm() < 1e-12);
            assert!(d2.body()[k].norm() < 1e-12);
        }
        let r = Field::from_fn(&g, |x| x * x.conj());
        let d1 = r.d_x(XDir::X1);
        for k in 0..g.len() {
            assert!((d1.body()[k] - g.x2(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn wirtinger_converges_at_second_order() {
        let exact = |x: Complex64| x.conj() / (1.0 + x * x.conj());
        let err = |n| {
            let g = grid(n);
            let f = Field::from_fn(&g, |x| (1.0 + x * x.conj()).ln());
            interior_err(&f.d_x(XDir::X1), exact)
        };
        let e1 = err(41);
        let e2 = err(81);
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn fourth_order_stencil_converges() {
        let exact = |x: Complex64| x.conj() / (1.0 + x * x.conj());
        let err = |n| {
            let g = grid(n);
            let f = Field::from_fn(&g, |x| (1.0 + x * x.conj()).ln());
            let d = f.d_x_with(XDir::X1, Stencil::Fourth);
            g.active_nodes()
                .map(|k| (d.body()[k] - exact(g.x1(k))).norm())
                .fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
        let g = grid(9);
        let cubic = Field::from_fn(&g, |x| x * x * x + x.conj() * x.conj());
        let d = cubic.d_x_with(XDir::X2, Stencil::Fourth);
        for k in 0..g.len() {
            assert!((d.body()[k] - 2.0 * g.x2(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn d_theta_of_metric_factor() {
        let g = grid(9);
        let (a, b) = (0.7, 1.3);
        let u = Field::from_fn(&g, |x| c(0.2) * x.re);
        let w = Field::theta(&g, ThetaVar::Theta3) * a + b;
        let f = u.exp() * (&w * &w);
        let d = f.d_theta(ThetaVar::Theta3);
        let expect = u.exp() * w.scale(2.0 * a);
        assert!((&d - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn d_theta_commutes_with_d_x() {
        let g = grid(15);
        let th = Field::theta(&g, ThetaVar::Theta3);
        let f =
            Field::from_fn(&g, |x| (x * 0.3).sin()) * &th + Field::from_fn(&g, |x| x.conj() * x);
        let f = &f * &f;
        let lhs = f.d_x(XDir::X2).d_theta(ThetaVar::Theta3);
        let rhs = f.d_theta(ThetaVar::Theta3).d_x(XDir::X2);
        assert!((&lhs - &rhs).max_abs() < 1e-13);
    }

    #[test]
    fn series_reproduce_inverses() {
        let g = grid(7);
        let th3 = Field::theta(&g, ThetaVar::Theta3);
        let th4 = Field::theta(&g, ThetaVar::Theta4);
        let w = &th3 * 0.4 + &(&th4 * Complex64::new(0.1, -0.3)) + &(&th3 * &th4) * 0.2 + 1.5;
        let r = w.recip().unwrap();
        let one = &w * &r;
        assert!((&one - &Field::constant(&g, 1.0)).max_abs() < 1e-14);
        let l = w.ln().unwrap();
        assert!((&l.exp() - &w).max_abs() < 1e-13);
        let s = w.sqrt().unwrap();
        assert!((&(&s * &s) - &w).max_abs() < 1e-13);
        assert_eq!(r.exactness(), [THETA_CAP as i16, THETA_CAP as i16]);
        assert_eq!(
            r.d_theta(ThetaVar::Theta3).exactness()[0],
            THETA_CAP as i16 - 1
        );
    }

    #[test]
    fn exactness_tracks_truncation() {
        let g = grid(5);
        let th3 = Field::theta(&g, ThetaVar::Theta3);
        let sq = &th3 * &th3;
        assert_eq!(sq.exactness(), [EXACT, EXACT]);
        let q = &sq * &sq;
        assert_eq!(q.degree(), [4, 0]);
        assert_eq!(q.exactness(), [EXACT, EXACT]);
        let over = &q * &th3;
        assert_eq!(over.exactness()[0], THETA_CAP as i16);
        assert!(over.max_abs() == 0.0);
    }

    #[test]
    fn nilpotency_read_off() {
        let g = grid(5);
        let th3 = Field::theta(&g, ThetaVar::Theta3);
        let f = &(&th3 * &th3) * 1e-3 + &th3 + 1.0;
        let r = f.check_nilpotency(2, 1);
        assert!(!r.pass);
        assert!((r.max_violation - 1e-3).abs() < 1e-18);
        assert_eq!(r.sector, Some([2, 0]));
        assert!(f.check_nilpotency(3, 1).pass);
    }

    #[test]
    fn ln_of_zero_is_singular() {
        let g = grid(5);
        let f = Field::from_fn(&g, |x| x);
        assert!(matches!(f.ln(), Err(Error::Singular { .. })));
        assert!(f.recip().is_err());
    }

    #[test]
    fn pair_conjugation_of_omega_is_real() {
        let g = grid(5);
        let th3 = Field::theta(&g, ThetaVar::Theta3);
        let th4 = Field::theta(&g, ThetaVar::Theta4);
        let alpha = Complex64::new(0.3, 0.8);
        let w = &th3 * alpha + &th4 * alpha.conj() + 2.0;
        assert!(w.reality_defect(ThetaConj::Pair) < 1e-16);
        assert!(w.reality_defect(ThetaConj::Real) > 0.5);
    }
}
