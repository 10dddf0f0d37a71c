//! Transport of the moving frame Ω (∂_iΩ = U_iΩ) across the grid,
//! plaquette holonomy, reconstruction of the immersion F and recovery of
//! the metric and frame relations.
//!
//! Ω is a θ-polynomial matrix at every node, truncated at a fixed order per
//! active θ variable. x-directions are stepped with the classical
//! fourth-order Runge–Kutta scheme along grid lines (cubic interpolation
//! supplies the half-step coefficients); θ-directions are solved exactly at
//! the base node by power-series recursion.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cases::{complete_bundle, metric, CaseSpec, CaseTag, GeometryBundle};
use crate::error::{Error, Result};
use crate::field::{Field, Stencil, XDir, EXACT};
use crate::frames::{assemble, zero_curvature_residual, FieldMatrix, FrameSystem};
use crate::grid::ConformalGrid;
use crate::report::{ResidualEntry, ResidualReport, Tolerance};

/// θ order kept per active variable during transport.
pub const DEFAULT_THETA_ORDER: usize = 2;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Matrix-valued θ-polynomial at one node, sectors `θ3^m θ4^n` with
/// `m ≤ ord[0]`, `n ≤ ord[1]`, stored `m`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMat {
    rows: usize,
    cols: usize,
    ord: [usize; 2],
    data: Vec<Complex64>,
}

impl SectorMat {
    pub fn zeros(rows: usize, cols: usize, ord: [usize; 2]) -> Self {
        let n = (ord[0] + 1) * (ord[1] + 1) * rows * cols;
        Self {
            rows,
            cols,
            ord,
            data: vec![ZERO; n],
        }
    }

    pub fn identity(dim: usize, ord: [usize; 2]) -> Self {
        let mut m = Self::zeros(dim, dim, ord);
        for i in 0..dim {
            m.set(0, 0, i, i, ONE);
        }
        m
    }

    /// θ-free matrix from a row-major body.
    pub fn from_body(rows: usize, cols: usize, ord: [usize; 2], body: &[Complex64]) -> Self {
        let mut m = Self::zeros(rows, cols, ord);
        m.data[..rows * cols].copy_from_slice(body);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ord(&self) -> [usize; 2] {
        self.ord
    }

    fn block_len(&self) -> usize {
        self.rows * self.cols
    }

    fn sector(&self, m: usize, n: usize) -> usize {
        m * (self.ord[1] + 1) + n
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, i: usize, j: usize) -> Complex64 {
        self.data[self.sector(m, n) * self.block_len() + i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, i: usize, j: usize, v: Complex64) {
        let k = self.sector(m, n) * self.block_len() + i * self.cols + j;
        self.data[k] = v;
    }

    /// Row-major body block.
    pub fn body(&self) -> &[Complex64] {
        &self.data[..self.block_len()]
    }

    /// Truncated product.
    pub fn mul(&self, other: &SectorMat) -> SectorMat {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.ord, other.ord);
        let (r, k, c) = (self.rows, self.cols, other.cols);
        let mut out = SectorMat::zeros(r, c, self.ord);
        let [o3, o4] = self.ord;
        for m in 0..=o3 {
            for n in 0..=o4 {
                let dst0 = out.sector(m, n) * r * c;
                for m1 in 0..=m {
                    for n1 in 0..=n {
                        let a0 = self.sector(m1, n1) * r * k;
                        let b0 = other.sector(m - m1, n - n1) * k * c;
                        let a = &self.data[a0..a0 + r * k];
                        let b = &other.data[b0..b0 + k * c];
                        if a.iter().all(|v| *v == ZERO) {
                            continue;
                        }
                        for i in 0..r {
                            for l in 0..k {
                                let x = a[i * k + l];
                                if x == ZERO {
                                    continue;
                                }
                                let brow = &b[l * c..(l + 1) * c];
                                let drow = &mut out.data[dst0 + i * c..dst0 + (i + 1) * c];
                                for (d, y) in drow.iter_mut().zip(brow) {
                                    *d += x * y;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &SectorMat) -> SectorMat {
        let mut out = self.clone();
        out.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(d, y)| *d += c * y);
        out
    }

    pub fn scale(&self, c: Complex64) -> SectorMat {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|d| *d *= c);
        out
    }

    pub fn sub(&self, other: &SectorMat) -> SectorMat {
        self.axpy(-ONE, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> SectorMat {
        let mut out = SectorMat::zeros(self.cols, self.rows, self.ord);
        for m in 0..=self.ord[0] {
            for n in 0..=self.ord[1] {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        out.set(m, n, j, i, self.get(m, n, i, j));
                    }
                }
            }
        }
        out
    }

    /// Product with a constant `cols × cols` matrix on the right.
    pub fn mul_const_right(&self, s: &[Complex64]) -> SectorMat {
        let s = SectorMat::from_body(self.cols, self.cols, self.ord, s);
        self.mul(&s)
    }

    /// Row `r` as a 1×cols matrix.
    pub fn row(&self, r: usize) -> SectorMat {
        let mut out = SectorMat::zeros(1, self.cols, self.ord);
        for m in 0..=self.ord[0] {
            for n in 0..=self.ord[1] {
                for j in 0..self.cols {
                    out.set(m, n, 0, j, self.get(m, n, r, j));
                }
            }
        }
        out
    }

    /// `A diag(η) Aᵀ`.
    pub fn gram(&self, eta: &[f64]) -> SectorMat {
        let mut weighted = self.clone();
        for m in 0..=self.ord[0] {
            for n in 0..=self.ord[1] {
                for i in 0..self.rows {
                    for (j, e) in eta.iter().enumerate() {
                        let v = weighted.get(m, n, i, j) * e;
                        weighted.set(m, n, i, j, v);
                    }
                }
            }
        }
        weighted.mul(&self.transpose())
    }
}

/// θ order per variable for a case.
pub fn theta_order(tag: CaseTag, order: usize) -> [usize; 2] {
    match tag.n_vars() {
        2 => [0, 0],
        3 => [order, 0],
        _ => [order, order],
    }
}

/// Ambient bilinear form: identity for flat cases; the coordinate 0 carries
/// sgn(c) for curved ones.
pub fn ambient_signature(spec: &CaseSpec) -> Vec<f64> {
    let d = spec.tag().dim();
    let mut eta = vec![1.0; d];
    if let Some(c) = spec.c() {
        eta[0] = c.signum();
    }
    eta
}

/// Coefficients of `m` at `node` as a θ-sector matrix.
pub fn extract(m: &FieldMatrix, node: usize, ord: [usize; 2]) -> SectorMat {
    let d = m.dim();
    let mut out = SectorMat::zeros(d, d, ord);
    for (i, j, f) in m.iter() {
        for a in 0..=ord[0] {
            for b in 0..=ord[1] {
                out.set(a, b, i, j, f.coeff(a, b, node));
            }
        }
    }
    out
}

/// Real-axis directions: `∂s = ∂1 + ∂2`, `∂t = i(∂1 − ∂2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    S,
    T,
}

fn direction_matrix(fs: &FrameSystem, node: usize, ord: [usize; 2], dir: Dir) -> SectorMat {
    let u1 = extract(&fs.u[0], node, ord);
    let u2 = extract(&fs.u[1], node, ord);
    match dir {
        Dir::S => u1.axpy(ONE, &u2),
        Dir::T => u1.sub(&u2).scale(I),
    }
}

/// Cubic interpolation at the midpoint between `k` and `k + 1`.
fn midpoint(vals: &[SectorMat], k: usize) -> SectorMat {
    let n = vals.len();
    let w = |c: [f64; 4], base: usize| -> SectorMat {
        let mut acc = vals[base].scale(Complex64::new(c[0] / 16.0, 0.0));
        for (off, &ci) in c.iter().enumerate().skip(1) {
            acc = acc.axpy(Complex64::new(ci / 16.0, 0.0), &vals[base + off]);
        }
        acc
    };
    if n < 4 {
        return vals[k]
            .axpy(ONE, &vals[k + 1])
            .scale(Complex64::new(0.5, 0.0));
    }
    if k == 0 {
        w([5.0, 15.0, -5.0, 1.0], 0)
    } else if k + 2 >= n {
        w([1.0, -5.0, 15.0, 5.0], n - 4)
    } else {
        w([-1.0, 9.0, 9.0, -1.0], k - 1)
    }
}

/// One classical Runge–Kutta step of `Y' = M Y` with signed step `h`.
fn rk4_step(y: &SectorMat, m0: &SectorMat, mm: &SectorMat, m1: &SectorMat, h: f64) -> SectorMat {
    let c = |x: f64| Complex64::new(x, 0.0);
    let k1 = m0.mul(y);
    let k2 = mm.mul(&y.axpy(c(h / 2.0), &k1));
    let k3 = mm.mul(&y.axpy(c(h / 2.0), &k2));
    let k4 = m1.mul(&y.axpy(c(h), &k3));
    let incr = k1.axpy(c(2.0), &k2).axpy(c(2.0), &k3).axpy(ONE, &k4);
    y.axpy(c(h / 6.0), &incr)
}

/// Values along a grid line from `y0` at index `start`.
fn transport_line(ms: &[SectorMat], start: usize, y0: SectorMat, h: f64) -> Vec<SectorMat> {
    let n = ms.len();
    let mut out: Vec<Option<SectorMat>> = vec![None; n];
    out[start] = Some(y0);
    for k in start..n - 1 {
        let y = out[k].as_ref().unwrap();
        let next = rk4_step(y, &ms[k], &midpoint(ms, k), &ms[k + 1], h);
        out[k + 1] = Some(next);
    }
    for k in (1..=start).rev() {
        let y = out[k].as_ref().unwrap();
        let prev = rk4_step(y, &ms[k], &midpoint(ms, k - 1), &ms[k - 1], -h);
        out[k - 1] = Some(prev);
    }
    out.into_iter().map(|v| v.unwrap()).collect()
}

/// Simpson integration of a gradient along a grid line from `f0` at `start`.
fn integrate_line(g: &[SectorMat], start: usize, f0: SectorMat, h: f64) -> Vec<SectorMat> {
    let n = g.len();
    let mut out: Vec<Option<SectorMat>> = vec![None; n];
    out[start] = Some(f0);
    let c = |x: f64| Complex64::new(x, 0.0);
    for k in start..n - 1 {
        let incr = g[k].axpy(c(4.0), &midpoint(g, k)).axpy(ONE, &g[k + 1]);
        out[k + 1] = Some(out[k].as_ref().unwrap().axpy(c(h / 6.0), &incr));
    }
    for k in (1..=start).rev() {
        let incr = g[k].axpy(c(4.0), &midpoint(g, k - 1)).axpy(ONE, &g[k - 1]);
        out[k - 1] = Some(out[k].as_ref().unwrap().axpy(c(-h / 6.0), &incr));
    }
    out.into_iter().map(|v| v.unwrap()).collect()
}

/// Order in which grid lines are swept from the base node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SweepOrder {
    /// Along the base row in s, then every column in t.
    #[default]
    RowFirst,
    /// Along the base column in t, then every row in s.
    ColumnFirst,
}

/// Two-step line sweep shared by frame transport and F integration.
fn sweep<L, F>(
    grid: &ConformalGrid,
    order: SweepOrder,
    y0: SectorMat,
    line_values: L,
    run: F,
) -> Vec<SectorMat>
where
    L: Fn(Dir, usize) -> Vec<SectorMat> + Sync,
    F: Fn(&[SectorMat], usize, SectorMat) -> Vec<SectorMat> + Sync,
{
    let n = grid.n();
    let c = (n - 1) / 2;
    let (first, second) = match order {
        SweepOrder::RowFirst => (Dir::S, Dir::T),
        SweepOrder::ColumnFirst => (Dir::T, Dir::S),
    };
    let base_line = run(&line_values(first, c), c, y0);
    let lines: Vec<Vec<SectorMat>> = (0..n)
        .into_par_iter()
        .map(|k| run(&line_values(second, k), c, base_line[k].clone()))
        .collect();
    let mut out: Vec<Option<SectorMat>> = vec![None; n * n];
    for (k, line) in lines.into_iter().enumerate() {
        for (p, v) in line.into_iter().enumerate() {
            let node = match second {
                Dir::T => grid.node(k, p),
                Dir::S => grid.node(p, k),
            };
            out[node] = Some(v);
        }
    }
    out.into_iter().map(|v| v.unwrap()).collect()
}

fn line_nodes(grid: &ConformalGrid, dir: Dir, k: usize) -> Vec<usize> {
    (0..grid.n())
        .map(|p| match dir {
            Dir::S => grid.node(p, k),
            Dir::T => grid.node(k, p),
        })
        .collect()
}

/// The frame field Ω over the grid.
#[derive(Debug, Clone)]
pub struct FrameState {
    grid: Arc<ConformalGrid>,
    ord: [usize; 2],
    nodes: Vec<SectorMat>,
}

impl FrameState {
    pub fn grid(&self) -> &Arc<ConformalGrid> {
        &self.grid
    }

    pub fn ord(&self) -> [usize; 2] {
        self.ord
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].rows()
    }

    pub fn at(&self, node: usize) -> &SectorMat {
        &self.nodes[node]
    }

    /// Entry `(i, j)` of Ω as a field.
    pub fn entry_field(&self, i: usize, j: usize) -> Result<Field> {
        sector_field(&self.grid, self.ord, &self.nodes, |m, a, b| {
            m.get(a, b, i, j)
        })
    }

    /// Largest entry-wise difference to another frame field.
    pub fn max_diff(&self, other: &FrameState) -> f64 {
        self.nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| a.sub(b).max_abs())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.nodes.iter().map(|m| m.max_abs()).fold(0.0, f64::max)
    }

    /// Ω S at every node.
    pub fn mul_const_right(&self, s: &[Complex64]) -> FrameState {
        FrameState {
            grid: Arc::clone(&self.grid),
            ord: self.ord,
            nodes: self
                .nodes
                .par_iter()
                .map(|m| m.mul_const_right(s))
                .collect(),
        }
    }
}

fn exactness(ord: [usize; 2]) -> [i16; 2] {
    [0, 1].map(|v| if ord[v] == 0 { EXACT } else { ord[v] as i16 })
}

fn sector_field<G>(
    grid: &Arc<ConformalGrid>,
    ord: [usize; 2],
    nodes: &[SectorMat],
    get: G,
) -> Result<Field>
where
    G: Fn(&SectorMat, usize, usize) -> Complex64,
{
    let mut planes = Vec::with_capacity((ord[0] + 1) * (ord[1] + 1));
    for a in 0..=ord[0] {
        for b in 0..=ord[1] {
            planes.push(nodes.iter().map(|m| get(m, a, b)).collect());
        }
    }
    Field::from_planes(grid, ord, exactness(ord), planes)
}

fn require_unmasked(grid: &ConformalGrid) -> Result<()> {
    if grid.is_masked() {
        return Err(Error::Grid(
            "frame transport needs a grid without excluded nodes".into(),
        ));
    }
    Ok(())
}

/// Transports `omega0` from the base (center) node over the whole grid.
pub fn propagate(
    fs: &FrameSystem,
    ord: [usize; 2],
    omega0: &SectorMat,
    order: SweepOrder,
) -> Result<FrameState> {
    let grid = Arc::clone(fs.grid());
    require_unmasked(&grid)?;
    if omega0.rows() != fs.dim() || omega0.cols() != fs.dim() || omega0.ord() != ord {
        return Err(Error::DimensionMismatch {
            sector: "initial frame".into(),
            left: fs.dim(),
            right: omega0.rows(),
        });
    }
    let h = grid.h();
    let nodes = sweep(
        &grid,
        order,
        omega0.clone(),
        |dir, k| {
            line_nodes(&grid, dir, k)
                .into_iter()
                .map(|node| direction_matrix(fs, node, ord, dir))
                .collect()
        },
        |ms, start, y0| transport_line(ms, start, y0, h),
    );
    for (k, m) in nodes.iter().enumerate() {
        if m.data
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            let x = grid.x1(k);
            return Err(Error::NonFinite(format!("frame at s={}, t={}", x.re, x.im)));
        }
    }
    Ok(FrameState { grid, ord, nodes })
}

/// Per-plaquette deviation of the transport around elementary cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyReport {
    pub n: usize,
    pub h: f64,
    pub plaquettes: usize,
    /// Largest ‖P − I‖ (max entry over θ-sectors).
    pub max: f64,
    pub mean: f64,
    /// Σ ‖P − I‖ over all plaquettes.
    pub sum: f64,
}

impl HolonomyReport {
    /// Empirical orders `(per-plaquette max, summed)` between two
    /// resolutions of the same domain.
    pub fn order_against(&self, finer: &HolonomyReport) -> (f64, f64) {
        let r = (self.h / finer.h).ln();
        (
            (self.max / finer.max).ln() / r,
            (self.sum / finer.sum).ln() / r,
        )
    }
}

/// Transports the identity around every elementary plaquette
/// (+s, +t, −s, −t) and measures the deviation from the identity.
pub fn holonomy(fs: &FrameSystem, ord: [usize; 2]) -> Result<HolonomyReport> {
    let grid = Arc::clone(fs.grid());
    require_unmasked(&grid)?;
    let n = grid.n();
    let h = grid.h();
    let dim = fs.dim();
    let id = SectorMat::identity(dim, ord);
    let devs: Vec<f64> = (0..n - 1)
        .into_par_iter()
        .flat_map_iter(|j| {
            let ms_lo: Vec<SectorMat> = line_nodes(&grid, Dir::S, j)
                .into_iter()
                .map(|node| direction_matrix(fs, node, ord, Dir::S))
                .collect();
            let ms_hi: Vec<SectorMat> = line_nodes(&grid, Dir::S, j + 1)
                .into_iter()
                .map(|node| direction_matrix(fs, node, ord, Dir::S))
                .collect();
            let mut out = Vec::with_capacity(n - 1);
            // t-direction stencil rows around the edge j → j+1
            let base = if j == 0 {
                0
            } else if j + 2 >= n {
                n - 4
            } else {
                j - 1
            };
            let rows: Vec<usize> = (base..base + 4.min(n)).collect();
            let mt_col = |i: usize| -> Vec<SectorMat> {
                rows.iter()
                    .map(|&jj| direction_matrix(fs, grid.node(i, jj), ord, Dir::T))
                    .collect()
            };
            let mut left = mt_col(0);
            for i in 0..n - 1 {
                let right = mt_col(i + 1);
                let local = j - base;
                let mid_l = midpoint_local(&left, local, j, n);
                let mid_r = midpoint_local(&right, local, j, n);
                let e_bottom = rk4_step(&id, &ms_lo[i], &midpoint(&ms_lo, i), &ms_lo[i + 1], h);
                let e_right = rk4_step(&id, &right[local], &mid_r, &right[local + 1], h);
                let e_top = rk4_step(&id, &ms_hi[i + 1], &midpoint(&ms_hi, i), &ms_hi[i], -h);
                let e_left = rk4_step(&id, &left[local + 1], &mid_l, &left[local], -h);
                let p = e_left.mul(&e_top).mul(&e_right).mul(&e_bottom);
                out.push(p.sub(&id).max_abs());
                left = right;
            }
            out
        })
        .collect();
    let sum: f64 = devs.iter().sum();
    let max = devs.iter().cloned().fold(0.0, f64::max);
    Ok(HolonomyReport {
        n,
        h,
        plaquettes: devs.len(),
        max,
        mean: sum / devs.len() as f64,
        sum,
    })
}

/// Midpoint between `local` and `local + 1` of a 4-point window that starts
/// at global index `j − local` on a line of `n` nodes.
fn midpoint_local(window: &[SectorMat], local: usize, j: usize, n: usize) -> SectorMat {
    let c = |x: f64| Complex64::new(x / 16.0, 0.0);
    let w = |k: [f64; 4]| -> SectorMat {
        let mut acc = window[0].scale(c(k[0]));
        for (off, &ki) in k.iter().enumerate().skip(1) {
            acc = acc.axpy(c(ki), &window[off]);
        }
        acc
    };
    if j == 0 {
        w([5.0, 15.0, -5.0, 1.0])
    } else if j + 2 >= n {
        w([1.0, -5.0, 15.0, 5.0])
    } else {
        debug_assert_eq!(local, 1);
        w([-1.0, 9.0, 9.0, -1.0])
    }
}

/// Metric of the frame rows `[[g, 0, 0], [0, 1, 0], [0, 0, c]]` at a node.
pub fn target_gram(spec: &CaseSpec, g: &FieldMatrix, node: usize, ord: [usize; 2]) -> SectorMat {
    let d = spec.tag().dim();
    let nv = g.dim();
    let mut out = SectorMat::zeros(d, d, ord);
    for (i, j, f) in g.iter() {
        for a in 0..=ord[0] {
            for b in 0..=ord[1] {
                out.set(a, b, i, j, f.coeff(a, b, node));
            }
        }
    }
    out.set(0, 0, nv, nv, ONE);
    if let Some(c) = spec.c() {
        out.set(0, 0, nv + 1, nv + 1, Complex64::new(c, 0.0));
    }
    out
}

/// `T` with rows ∂s = ∂1 + ∂2 and ∂t = i(∂1 − ∂2) (same for θ3, θ4 in F3
/// cases); identity elsewhere. Returns `(T, T⁻¹)` row-major.
fn real_transform(tag: CaseTag) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = tag.dim();
    let mut t = vec![ZERO; d * d];
    let mut ti = vec![ZERO; d * d];
    for k in 0..d {
        t[k * d + k] = ONE;
        ti[k * d + k] = ONE;
    }
    let mut pairs = vec![(0, 1)];
    if tag.n_vars() == 4 {
        pairs.push((2, 3));
    }
    let half = Complex64::new(0.5, 0.0);
    for (a, b) in pairs {
        t[a * d + a] = ONE;
        t[a * d + b] = ONE;
        t[b * d + a] = I;
        t[b * d + b] = -I;
        ti[a * d + a] = half;
        ti[a * d + b] = -I * half;
        ti[b * d + a] = half;
        ti[b * d + b] = I * half;
    }
    (t, ti)
}

fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let x = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += x * b[k * d + j];
            }
        }
    }
    out
}

fn transpose(a: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = a[i * d + j];
        }
    }
    out
}

/// Initial frame at the base node: rows with Gram matrix equal to the
/// target metric, extended in θ by solving ∂3Ω = U3Ω, ∂4Ω = U4Ω exactly.
pub fn initial_frame(
    spec: &CaseSpec,
    bundle: &GeometryBundle,
    fs: &FrameSystem,
    ord: [usize; 2],
) -> Result<SectorMat> {
    let grid = Arc::clone(fs.grid());
    let node = grid.center_node();
    let tag = spec.tag();
    let d = tag.dim();
    let g = metric(spec, bundle)?;
    let target = target_gram(spec, &g, node, ord);
    let (t, ti) = real_transform(tag);
    let gr = matmul(&matmul(&t, target.body(), d), &transpose(&t, d), d);
    let scale = gr.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    if gr.iter().any(|v| v.im.abs() > 1e-10 * scale) {
        return Err(Error::Frame(
            "metric at the base node is not real in real coordinates".into(),
        ));
    }
    // LDLᵀ without pivoting
    let mut l = vec![0.0; d * d];
    let mut dd = vec![0.0; d];
    for k in 0..d {
        let mut s = gr[k * d + k].re;
        for j in 0..k {
            s -= l[k * d + j] * l[k * d + j] * dd[j];
        }
        if s.abs() <= 1e-12 * scale {
            return Err(Error::Frame(format!(
                "metric degenerate at the base node (pivot {k})"
            )));
        }
        dd[k] = s;
        l[k * d + k] = 1.0;
        for i in k + 1..d {
            let mut v = gr[i * d + k].re;
            for j in 0..k {
                v -= l[i * d + j] * l[k * d + j] * dd[j];
            }
            l[i * d + k] = v / s;
        }
    }
    let eta = ambient_signature(spec);
    let neg_frame: Vec<usize> = (0..d).filter(|&k| dd[k] < 0.0).collect();
    let pos_frame: Vec<usize> = (0..d).filter(|&k| dd[k] > 0.0).collect();
    let neg_amb: Vec<usize> = (0..d).filter(|&a| eta[a] < 0.0).collect();
    let pos_amb: Vec<usize> = (0..d).filter(|&a| eta[a] > 0.0).collect();
    if neg_frame.len() != neg_amb.len() {
        return Err(Error::Frame(format!(
            "metric signature ({} negative) does not fit the ambient signature ({} negative)",
            neg_frame.len(),
            neg_amb.len()
        )));
    }
    let mut perm = vec![0usize; d];
    for (k, a) in neg_frame
        .iter()
        .zip(&neg_amb)
        .chain(pos_frame.iter().zip(&pos_amb))
    {
        perm[*k] = *a;
    }
    let mut r = vec![ZERO; d * d];
    for row in 0..d {
        for k in 0..d {
            r[row * d + perm[k]] = Complex64::new(l[row * d + k] * dd[k].abs().sqrt(), 0.0);
        }
    }
    let body = matmul(&ti, &r, d);
    let mut omega = SectorMat::from_body(d, d, ord, &body);
    if ord != [0, 0] {
        let u3 = extract(&fs.u[2], node, ord);
        let u4 = if fs.u.len() > 3 {
            extract(&fs.u[3], node, ord)
        } else {
            SectorMat::zeros(d, d, ord)
        };
        theta_extend(&mut omega, &u3, &u4);
    }
    let gram = omega.gram(&eta);
    let defect = (0..d * d)
        .map(|k| (gram.body()[k] - target.body()[k]).norm())
        .fold(0.0, f64::max);
    if defect > 1e-9 * scale {
        return Err(Error::Frame(format!(
            "frame relations violated at the base node by {defect:e}"
        )));
    }
    Ok(omega)
}

/// Fills θ-sectors of `omega` (body given) from ∂3Ω = AΩ, ∂4Ω = BΩ.
fn theta_extend(omega: &mut SectorMat, a: &SectorMat, b: &SectorMat) {
    let [o3, o4] = omega.ord;
    let d = omega.rows;
    let block = |m: &SectorMat, p: usize, q: usize| -> Vec<Complex64> {
        let s = m.sector(p, q) * d * d;
        m.data[s..s + d * d].to_vec()
    };
    for m in 1..=o3 {
        let mut acc = vec![ZERO; d * d];
        for p in 0..m {
            let prod = matmul(&block(a, p, 0), &block(omega, m - 1 - p, 0), d);
            acc.iter_mut().zip(prod).for_each(|(x, y)| *x += y);
        }
        let s = omega.sector(m, 0) * d * d;
        let f = Complex64::new(1.0 / m as f64, 0.0);
        omega.data[s..s + d * d]
            .iter_mut()
            .zip(acc)
            .for_each(|(x, y)| *x = y * f);
    }
    for n in 1..=o4 {
        for m in 0..=o3 {
            let mut acc = vec![ZERO; d * d];
            for p in 0..=m {
                for q in 0..n {
                    let prod = matmul(&block(b, p, q), &block(omega, m - p, n - 1 - q), d);
                    acc.iter_mut().zip(prod).for_each(|(x, y)| *x += y);
                }
            }
            let s = omega.sector(m, n) * d * d;
            let f = Complex64::new(1.0 / n as f64, 0.0);
            omega.data[s..s + d * d]
                .iter_mut()
                .zip(acc)
                .for_each(|(x, y)| *x = y * f);
        }
    }
}

/// Flat cases: F at the base node from the θ-rows of Ω (F body = 0).
fn base_position(spec: &CaseSpec, omega0: &SectorMat) -> SectorMat {
    let d = omega0.cols;
    let ord = omega0.ord;
    let mut f = SectorMat::zeros(1, d, ord);
    let n_vars = spec.tag().n_vars();
    for m in 0..=ord[0] {
        for n in 0..=ord[1] {
            if m == 0 && n == 0 {
                continue;
            }
            for j in 0..d {
                let v = if m >= 1 {
                    omega0.get(m - 1, n, 2, j) / m as f64
                } else if n_vars == 4 {
                    omega0.get(m, n - 1, 3, j) / n as f64
                } else {
                    ZERO
                };
                f.set(m, n, 0, j, v);
            }
        }
    }
    f
}

fn gradient(state: &FrameState, node: usize, dir: Dir) -> SectorMat {
    let om = state.at(node);
    let r1 = om.row(0);
    let r2 = om.row(1);
    match dir {
        Dir::S => r1.axpy(ONE, &r2),
        Dir::T => r1.sub(&r2).scale(I),
    }
}

/// Flat cases: integrates F from the gradient rows of Ω along lines.
fn integrate_position(spec: &CaseSpec, state: &FrameState, order: SweepOrder) -> Vec<SectorMat> {
    let grid = Arc::clone(&state.grid);
    let f0 = base_position(spec, state.at(grid.center_node()));
    let h = grid.h();
    sweep(
        &grid,
        order,
        f0,
        |dir, k| {
            line_nodes(&grid, dir, k)
                .into_iter()
                .map(|node| gradient(state, node, dir))
                .collect()
        },
        |g, start, y0| integrate_line(g, start, y0, h),
    )
}

/// Reconstructed immersion and the checks performed on it.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Ambient components of F.
    pub f: Vec<Field>,
    pub report: ResidualReport,
}

fn bilinear(a: &[Field], b: &[Field], eta: &[f64]) -> Field {
    let mut acc = &a[0] * &b[0] * eta[0];
    for k in 1..a.len() {
        acc = acc + &a[k] * &b[k] * eta[k];
    }
    acc
}

fn push_scalar(report: &mut ResidualReport, label: &str, max: f64, l2: f64, tol: Option<f64>) {
    report.push(ResidualEntry {
        label: label.to_string(),
        i: None,
        j: None,
        sector: [0, 0],
        max,
        l2,
        tol,
    });
}

/// Recovers F from Ω and checks metric, frame relations and (curved) the
/// quadric ⟨F,F⟩ = c.
pub fn reconstruct(
    spec: &CaseSpec,
    bundle: &GeometryBundle,
    state: &FrameState,
    tol: Tolerance,
) -> Result<Reconstruction> {
    let grid = Arc::clone(&state.grid);
    let tag = spec.tag();
    let d = tag.dim();
    let nv = tag.n_vars();
    let eta = ambient_signature(spec);
    let ord = state.ord;
    let mut report = ResidualReport::new(tag.name(), &grid, tol);
    let g = metric(spec, bundle)?;

    // frame relations Ω η Ωᵀ = diag(g, 1, c) over every node
    let drifts: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            state
                .at(node)
                .gram(&eta)
                .sub(&target_gram(spec, &g, node, ord))
                .max_abs()
        })
        .collect();
    let drift = drifts.iter().cloned().fold(0.0, f64::max);
    let rms = (drifts.iter().map(|v| v * v).sum::<f64>() / drifts.len() as f64).sqrt();
    push_scalar(&mut report, "frame-relations", drift, rms, None);
    report.set_extra("relation_drift", drift);

    let f: Vec<Field> = if spec.c().is_some() {
        (0..d)
            .map(|j| state.entry_field(d - 1, j))
            .collect::<Result<_>>()?
    } else {
        let row_first = integrate_position(spec, state, SweepOrder::RowFirst);
        let col_first = integrate_position(spec, state, SweepOrder::ColumnFirst);
        let diffs: Vec<f64> = row_first
            .iter()
            .zip(&col_first)
            .map(|(a, b)| a.sub(b).max_abs())
            .collect();
        let path = diffs.iter().cloned().fold(0.0, f64::max);
        let rms = (diffs.iter().map(|v| v * v).sum::<f64>() / diffs.len() as f64).sqrt();
        push_scalar(&mut report, "path-independence", path, rms, Some(tol.max));
        report.set_extra("path_dependence", path);
        (0..d)
            .map(|j| sector_field(&grid, ord, &row_first, |m, a, b| m.get(a, b, 0, j)))
            .collect::<Result<_>>()?
    };

    // metric recovery from derivatives of F
    let deriv = |k: usize| -> Vec<Field> {
        f.iter()
            .map(|fa| match k {
                0 => fa.d_x_with(XDir::X1, Stencil::Fourth),
                1 => fa.d_x_with(XDir::X2, Stencil::Fourth),
                2 => fa.d_theta(crate::theta::ThetaVar::Theta3),
                _ => fa.d_theta(crate::theta::ThetaVar::Theta4),
            })
            .collect()
    };
    let grads: Vec<Vec<Field>> = (0..nv).map(deriv).collect();
    let mut metric_max = 0.0f64;
    for i in 0..nv {
        for j in i..nv {
            let res = bilinear(&grads[i], &grads[j], &eta) - g.entry(i, j);
            report.push_field(
                &format!("metric:g{}{}", i + 1, j + 1),
                Some((i as u8 + 1, j as u8 + 1)),
                &res,
            );
            metric_max = metric_max.max(report.max_of(&format!("metric:g{}{}", i + 1, j + 1)));
        }
    }
    report.set_extra("metric_recovery", metric_max);
    if let Some(c) = spec.c() {
        let quad = bilinear(&f, &f, &eta) - c;
        let all = (0..grid.len())
            .map(|k| quad.body()[k].norm())
            .fold(0.0, f64::max);
        report.push_field("<F,F>-c", None, &quad);
        report.set_extra("quadric_drift", all);
        for (i, gi) in grads.iter().enumerate().take(2) {
            report.push_field(&format!("<d{}F,F>", i + 1), None, &bilinear(gi, &f, &eta));
        }
    }
    Ok(Reconstruction { f, report })
}

/// Options for [`integrate_case`].
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub theta_order: usize,
    pub tol: Option<Tolerance>,
    /// Constant ambient matrix for the gauge-covariance check.
    pub gauge: Option<Vec<Complex64>>,
    /// Adds `δ` to entry `(i, j)` (0-based) of U1 after assembly.
    pub perturb_u1: Option<(usize, usize, Complex64)>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            theta_order: DEFAULT_THETA_ORDER,
            tol: None,
            gauge: None,
            perturb_u1: None,
        }
    }
}

fn perturbed(mut fs: FrameSystem, delta: Option<(usize, usize, Complex64)>) -> Result<FrameSystem> {
    if let Some((i, j, d)) = delta {
        let dim = fs.dim();
        if i >= dim || j >= dim {
            return Err(Error::InvalidParameter(format!(
                "U1 entry ({}, {}) outside {dim}×{dim}",
                i + 1,
                j + 1
            )));
        }
        let e = fs.u[0].entry(i, j) + d;
        fs.u[0].set(i, j, e);
    }
    Ok(fs)
}

/// Everything produced by an integration run.
#[derive(Debug, Clone)]
pub struct Integration {
    pub frames: FrameSystem,
    pub state: FrameState,
    pub f: Vec<Field>,
    pub holonomy: HolonomyReport,
    pub report: ResidualReport,
}

/// Assembles, transports, reconstructs and checks one case. With `coarse`
/// (the same case on a coarser grid of the same domain) the holonomy order
/// is measured as well.
pub fn integrate_case(
    spec: &CaseSpec,
    bundle: &GeometryBundle,
    coarse: Option<&GeometryBundle>,
    opts: &IntegrateOptions,
) -> Result<Integration> {
    if let CaseSpec::CurF2 { c } = *spec {
        let mut out = integrate_case(&CaseSpec::CurF0 { c }, bundle, coarse, opts)?;
        out.report.case = CaseTag::CurF2.name().to_string();
        out.report.set_extra("reduces_to", CaseTag::CurF0.name());
        return Ok(out);
    }
    let full = complete_bundle(spec, bundle)?;
    let grid = Arc::clone(full.grid()?);
    let tol = opts.tol.unwrap_or_else(|| Tolerance::for_grid(&grid));
    let ord = theta_order(spec.tag(), opts.theta_order);
    let frames = perturbed(assemble(spec, &full, Stencil::Fourth)?, opts.perturb_u1)?;
    let zc = zero_curvature_residual(&frames, tol)?;
    let compatible = zc.pass;
    let omega0 = initial_frame(spec, &full, &frames, ord)?;
    let state = propagate(&frames, ord, &omega0, SweepOrder::RowFirst)?;
    let recon = reconstruct(spec, &full, &state, tol)?;
    let mut report = ResidualReport::new(spec.tag().name(), &grid, tol);
    report.set_extra("parameters", spec);
    report.set_extra("theta_order", ord);
    report.absorb("zc:", zc);
    report.absorb("", recon.report);
    if !compatible {
        report.set_extra(
            "warning",
            "connection matrices are not compatible; frame transport is path dependent",
        );
    }

    let hol = holonomy(&frames, ord)?;
    let h = grid.h();
    push_scalar(
        &mut report,
        "holonomy",
        hol.max,
        hol.mean,
        Some(50.0 * h * h * h),
    );
    report.set_extra("holonomy_max", hol.max);
    report.set_extra("holonomy_mean", hol.mean);
    report.set_extra("holonomy_sum", hol.sum);
    if let Some(cb) = coarse {
        let cfull = complete_bundle(spec, cb)?;
        let cframes = perturbed(assemble(spec, &cfull, Stencil::Fourth)?, opts.perturb_u1)?;
        let chol = holonomy(&cframes, ord)?;
        let (order_max, order_sum) = chol.order_against(&hol);
        report.set_extra("holonomy_order", order_sum);
        report.set_extra("holonomy_order_plaquette", order_max);
        if (order_sum.is_nan() || order_sum < 2.0) && hol.max > 1e-12 {
            report.fail(&format!(
                "holonomy convergence order {order_sum:.2} below 2"
            ));
        }
    }

    if let Some(s) = &opts.gauge {
        let moved = propagate(
            &frames,
            ord,
            &omega0.mul_const_right(s),
            SweepOrder::RowFirst,
        )?;
        let expect = state.mul_const_right(s);
        let rel = moved.max_diff(&expect) / expect.max_abs().max(f64::MIN_POSITIVE);
        push_scalar(&mut report, "gauge-covariance", rel, rel, Some(1e-12));
        report.set_extra("gauge_covariance", rel);
    }
    Ok(Integration {
        frames,
        state,
        f: recon.f,
        holonomy: hol,
        report,
    })
}
