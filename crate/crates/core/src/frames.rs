//! Gauss–Weingarten matrices `U_i` (∂_iΩ = U_iΩ) for every case and the
//! compatibility residuals ∂_iU_j − ∂_jU_i + [U_j, U_i].

use std::sync::Arc;

use serde_json::json;

use crate::cases::{complete_bundle, names, CaseSpec, CaseTag, GeometryBundle};
use crate::error::{Error, Result};
use crate::field::{Field, Stencil, XDir};
use crate::grid::ConformalGrid;
use crate::report::{ResidualReport, Tolerance};
use crate::theta::ThetaVar;

/// Square matrix of fields; `None` marks a structural zero.
#[derive(Debug, Clone)]
pub struct FieldMatrix {
    dim: usize,
    grid: Arc<ConformalGrid>,
    entries: Vec<Option<Field>>,
}

impl FieldMatrix {
    pub fn zeros(dim: usize, grid: &Arc<ConformalGrid>) -> Self {
        Self {
            dim,
            grid: Arc::clone(grid),
            entries: vec![None; dim * dim],
        }
    }

    pub fn identity(dim: usize, grid: &Arc<ConformalGrid>) -> Self {
        let mut m = Self::zeros(dim, grid);
        for i in 0..dim {
            m.set(i, i, Field::constant(grid, 1.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &Arc<ConformalGrid> {
        &self.grid
    }

    pub fn set(&mut self, i: usize, j: usize, f: Field) {
        self.entries[i * self.dim + j] = Some(f);
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Field> {
        self.entries[i * self.dim + j].as_ref()
    }

    /// Entry as a field, zero when structurally absent.
    pub fn entry(&self, i: usize, j: usize) -> Field {
        self.get(i, j)
            .cloned()
            .unwrap_or_else(|| Field::zeros(&self.grid))
    }

    /// Populated entries with their indices.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Field)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(move |(k, e)| e.as_ref().map(|f| (k / self.dim, k % self.dim, f)))
    }

    fn check_dim(&self, other: &FieldMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                sector: "matrix".into(),
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&Field) -> Field) -> FieldMatrix {
        FieldMatrix {
            dim: self.dim,
            grid: Arc::clone(&self.grid),
            entries: self.entries.iter().map(|e| e.as_ref().map(&f)).collect(),
        }
    }

    fn zip(&self, other: &FieldMatrix, sign: f64) -> Result<FieldMatrix> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| match (a, b) {
                (None, None) => None,
                (Some(a), None) => Some(a.clone()),
                (None, Some(b)) => Some(b * sign),
                (Some(a), Some(b)) => Some(a + &(b * sign)),
            })
            .collect();
        Ok(FieldMatrix {
            dim: self.dim,
            grid: Arc::clone(&self.grid),
            entries,
        })
    }

    pub fn add(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.zip(other, 1.0)
    }

    pub fn sub(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.zip(other, -1.0)
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut out = FieldMatrix::zeros(d, &self.grid);
        for i in 0..d {
            for j in 0..d {
                let mut acc: Option<Field> = None;
                for k in 0..d {
                    if let (Some(a), Some(b)) = (self.get(i, k), other.get(k, j)) {
                        let p = a * b;
                        acc = Some(match acc {
                            None => p,
                            Some(s) => s + p,
                        });
                    }
                }
                out.entries[i * d + j] = acc;
            }
        }
        Ok(out)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn d_x(&self, dir: XDir, stencil: Stencil) -> FieldMatrix {
        self.map(|f| f.d_x_with(dir, stencil))
    }

    pub fn d_theta(&self, var: ThetaVar) -> FieldMatrix {
        self.map(|f| f.d_theta(var))
    }

    /// Principal submatrix on the given rows/columns.
    pub fn restrict(&self, idx: &[usize]) -> FieldMatrix {
        let mut out = FieldMatrix::zeros(idx.len(), &self.grid);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.entries[a * idx.len() + b] = self.get(i, j).cloned();
            }
        }
        out
    }

    /// True when every populated entry vanishes at every node and sector.
    pub fn is_zero(&self) -> bool {
        self.iter().all(|(_, _, f)| f.max_abs() == 0.0)
    }

    /// Largest entry-wise difference over all nodes and θ-sectors.
    pub fn max_diff(&self, other: &FieldMatrix) -> Result<f64> {
        Ok(self
            .sub(other)?
            .iter()
            .map(|(_, _, f)| f.max_abs())
            .fold(0.0, f64::max))
    }
}

/// The connection matrices of one case.
#[derive(Debug, Clone)]
pub struct FrameSystem {
    pub tag: CaseTag,
    pub stencil: Stencil,
    /// `U_1 .. U_m` for the variables x1, x2 (θ3, θ4).
    pub u: Vec<FieldMatrix>,
}

impl FrameSystem {
    pub fn dim(&self) -> usize {
        self.u[0].dim()
    }

    pub fn grid(&self) -> &Arc<ConformalGrid> {
        self.u[0].grid()
    }

    /// Derivative of `m` along variable `i` (0-based: x1, x2, θ3, θ4).
    pub fn derivative(&self, m: &FieldMatrix, i: usize) -> FieldMatrix {
        match i {
            0 => m.d_x(XDir::X1, self.stencil),
            1 => m.d_x(XDir::X2, self.stencil),
            2 => m.d_theta(ThetaVar::Theta3),
            _ => m.d_theta(ThetaVar::Theta4),
        }
    }

    /// `∂_iU_j − ∂_jU_i + [U_j, U_i]` for 0-based `i`, `j`.
    pub fn curvature(&self, i: usize, j: usize) -> Result<FieldMatrix> {
        let a = self.derivative(&self.u[j], i);
        let b = self.derivative(&self.u[i], j);
        a.sub(&b)?.add(&self.u[j].commutator(&self.u[i])?)
    }
}

struct Parts {
    grid: Arc<ConformalGrid>,
    stencil: Stencil,
}

impl Parts {
    fn d1(&self, f: &Field) -> Field {
        f.d_x_with(XDir::X1, self.stencil)
    }
    fn d2(&self, f: &Field) -> Field {
        f.d_x_with(XDir::X2, self.stencil)
    }
    fn one(&self) -> Field {
        Field::constant(&self.grid, 1.0)
    }
    fn zeros(&self, d: usize) -> FieldMatrix {
        FieldMatrix::zeros(d, &self.grid)
    }
}

/// Builds the Gauss–Weingarten matrices of `spec` from `bundle`.
pub fn assemble(spec: &CaseSpec, bundle: &GeometryBundle, stencil: Stencil) -> Result<FrameSystem> {
    let b = complete_bundle(spec, bundle)?;
    let grid = Arc::clone(b.grid()?);
    let p = Parts {
        grid: Arc::clone(&grid),
        stencil,
    };
    let tag = spec.tag();
    let u = match *spec {
        CaseSpec::EucF0 => f0_block(&p, &b, None, 3, [0, 1, 2])?,
        CaseSpec::CurF0 { c } | CaseSpec::CurF2 { c } => f0_block(&p, &b, Some(c), 4, [0, 1, 2])?,
        CaseSpec::EucF3C2 { .. } => {
            let mut m = f0_block(&p, &b, None, 5, [0, 1, 4])?;
            m.push(p.zeros(5));
            m.push(p.zeros(5));
            m
        }
        CaseSpec::EucF2 { a, k, .. } => {
            let w = b.get(names::OMEGA)?;
            let wi = w.recip()?;
            let (u, q, qb, h) = small(&b)?;
            let eu = u.exp();
            let emu = (-u).exp();
            let mut u1 = p.zeros(4);
            let mut u2 = p.zeros(4);
            let mut u3 = p.zeros(4);
            let sec = &eu * w * (-a / (2.0 * k * k));
            let bh = &eu * h * w * 0.5;
            u1.set(0, 0, p.d1(u));
            u1.set(0, 3, q * w);
            u1.set(1, 2, sec.clone());
            u1.set(1, 3, bh.clone());
            u1.set(2, 0, &wi * a);
            u1.set(3, 0, -(h * &wi));
            u1.set(3, 1, &emu * q * &wi * -2.0);
            u2.set(0, 2, sec);
            u2.set(0, 3, bh);
            u2.set(1, 1, p.d2(u));
            u2.set(1, 3, qb * w);
            u2.set(2, 1, &wi * a);
            u2.set(3, 0, &emu * qb * &wi * -2.0);
            u2.set(3, 1, -(h * &wi));
            u3.set(0, 0, &wi * a);
            u3.set(1, 1, &wi * a);
            vec![u1, u2, u3]
        }
        CaseSpec::EucF3C1 { alpha, k, .. } => {
            let w = b.get(names::OMEGA)?;
            let wi = w.recip()?;
            let (u, q, qb, h) = small(&b)?;
            let eu = u.exp();
            let emu = (-u).exp();
            let ab = alpha.conj();
            let euw = &eu * w;
            let g13 = &euw * (-ab / (k * k));
            let g14 = &euw * (-alpha / (k * k));
            let bh = &euw * h * 0.5;
            let mut u1 = p.zeros(5);
            let mut u2 = p.zeros(5);
            let mut u3 = p.zeros(5);
            let mut u4 = p.zeros(5);
            u1.set(0, 0, p.d1(u));
            u1.set(0, 4, q * w);
            u1.set(1, 2, g13.clone());
            u1.set(1, 3, g14.clone());
            u1.set(1, 4, bh.clone());
            u1.set(2, 0, &wi * alpha);
            u1.set(3, 0, &wi * ab);
            u1.set(4, 0, -(h * &wi));
            u1.set(4, 1, &emu * q * &wi * -2.0);
            u2.set(0, 2, g13);
            u2.set(0, 3, g14);
            u2.set(0, 4, bh);
            u2.set(1, 1, p.d2(u));
            u2.set(1, 4, qb * w);
            u2.set(2, 1, &wi * alpha);
            u2.set(3, 1, &wi * ab);
            u2.set(4, 0, &emu * qb * &wi * -2.0);
            u2.set(4, 1, -(h * &wi));
            u3.set(0, 0, &wi * alpha);
            u3.set(1, 1, &wi * alpha);
            u4.set(0, 0, &wi * ab);
            u4.set(1, 1, &wi * ab);
            vec![u1, u2, u3, u4]
        }
        CaseSpec::HypF3C1 { k, c, .. } => {
            let w = b.get(names::OMEGA)?;
            let wi = w.recip()?;
            let w3 = w.d_theta(ThetaVar::Theta3);
            let w4 = w.d_theta(ThetaVar::Theta4);
            let u = b.get(names::U)?;
            let hh = b.get(names::H)?;
            let g = b.get(names::G)?;
            let eu = u.exp();
            let ww = w * w;
            let k2 = k * k;
            let g13 = &eu * w * &w4 * (-1.0 / k2);
            let g14 = &eu * w * &w3 * (-1.0 / k2);
            let b_ = &eu * hh * &ww * 0.5;
            let kap = &eu * &ww * (-1.0 / (2.0 * c));
            let r3 = &w3 * &wi;
            let r4 = &w4 * &wi;
            let mut u1 = p.zeros(6);
            let mut u2 = p.zeros(6);
            let mut u3 = p.zeros(6);
            let mut u4 = p.zeros(6);
            u1.set(0, 0, p.d1(u));
            u1.set(1, 2, g13.clone());
            u1.set(1, 3, g14.clone());
            u1.set(1, 4, b_.clone());
            u1.set(1, 5, kap.clone());
            u1.set(2, 0, r3.clone());
            u1.set(3, 0, r4.clone());
            u1.set(4, 0, -hh);
            u1.set(5, 0, p.one());
            u2.set(0, 2, g13);
            u2.set(0, 3, g14);
            u2.set(0, 4, b_);
            u2.set(0, 5, kap);
            u2.set(1, 1, p.d2(u));
            u2.set(2, 1, r3.clone());
            u2.set(3, 1, r4.clone());
            u2.set(4, 1, -hh);
            u2.set(5, 1, p.one());
            u3.set(0, 0, r3.clone());
            u3.set(1, 1, r3);
            u3.set(3, 4, g * (k2 * 0.5));
            u3.set(3, 5, Field::constant(&grid, -k2 / (2.0 * c)));
            u3.set(4, 2, -g);
            u3.set(5, 2, p.one());
            u4.set(0, 0, r4.clone());
            u4.set(1, 1, r4);
            u4.set(2, 4, g * (k2 * 0.5));
            u4.set(2, 5, Field::constant(&grid, -k2 / (2.0 * c)));
            u4.set(4, 3, -g);
            u4.set(5, 3, p.one());
            vec![u1, u2, u3, u4]
        }
        CaseSpec::HypF3C2 { c, .. } => {
            let phi = b.get(names::PHI)?;
            let psi = b.get(names::PSI)?;
            let q = b.get(names::Q)?;
            let qb = b.get(names::QBAR)?;
            let hh = b.get(names::H)?;
            let g = b.get(names::G)?;
            let ephi = phi.exp();
            let emphi = (-phi).exp();
            let epsi = psi.exp();
            let epsi_mphi = (psi - phi).exp();
            let p1 = p.d1(psi) * 0.5;
            let p2 = p.d2(psi) * 0.5;
            let b_ = &ephi * hh * 0.5;
            let kap = &ephi * (-1.0 / (2.0 * c));
            let bt = &epsi * g * 0.5;
            let kapt = &epsi * (-1.0 / (2.0 * c));
            let mut u1 = p.zeros(6);
            let mut u2 = p.zeros(6);
            let mut u3 = p.zeros(6);
            let mut u4 = p.zeros(6);
            u1.set(0, 0, p.d1(phi));
            u1.set(0, 4, q.clone());
            u1.set(1, 4, b_.clone());
            u1.set(1, 5, kap.clone());
            u1.set(2, 2, p1.clone());
            u1.set(3, 3, p1.clone());
            u1.set(4, 0, -hh);
            u1.set(4, 1, &emphi * q * -2.0);
            u1.set(5, 0, p.one());
            u2.set(0, 4, b_);
            u2.set(0, 5, kap);
            u2.set(1, 1, p.d2(phi));
            u2.set(1, 4, qb.clone());
            u2.set(2, 2, p2.clone());
            u2.set(3, 3, p2.clone());
            u2.set(4, 0, &emphi * qb * -2.0);
            u2.set(4, 1, -hh);
            u2.set(5, 1, p.one());
            let m2 = &epsi_mphi * &p2 * -1.0;
            let m1 = &epsi_mphi * &p1 * -1.0;
            u3.set(0, 2, p1.clone());
            u3.set(1, 2, p2.clone());
            u3.set(3, 0, m2.clone());
            u3.set(3, 1, m1.clone());
            u3.set(3, 4, bt.clone());
            u3.set(3, 5, kapt.clone());
            u3.set(4, 2, -g);
            u3.set(5, 2, p.one());
            u4.set(0, 3, p1);
            u4.set(1, 3, p2);
            u4.set(2, 0, m2);
            u4.set(2, 1, m1);
            u4.set(2, 4, bt);
            u4.set(2, 5, kapt);
            u4.set(4, 3, -g);
            u4.set(5, 3, p.one());
            vec![u1, u2, u3, u4]
        }
    };
    for m in &u {
        for (i, j, f) in m.iter() {
            f.ensure_finite(&format!("{} U entry ({}, {})", tag, i + 1, j + 1))?;
        }
    }
    Ok(FrameSystem { tag, stencil, u })
}

fn small(b: &GeometryBundle) -> Result<(&Field, &Field, &Field, &Field)> {
    Ok((
        b.get(names::U)?,
        b.get(names::Q_SMALL)?,
        b.get(names::QBAR_SMALL)?,
        b.get(names::H_SMALL)?,
    ))
}

/// The F0 block on frame slots `idx = [∂1F, ∂2F, N]`, with the extra F row
/// and column in the curved case.
fn f0_block(
    p: &Parts,
    b: &GeometryBundle,
    c: Option<f64>,
    dim: usize,
    idx: [usize; 3],
) -> Result<Vec<FieldMatrix>> {
    let u = b.get(names::U)?;
    let q = b.get(names::Q)?;
    let qb = b.get(names::QBAR)?;
    let h = b.get(names::H)?;
    let eu = u.exp();
    let emu = (-u).exp();
    let [x, y, n] = idx;
    let bh = &eu * h * 0.5;
    let mut u1 = p.zeros(dim);
    let mut u2 = p.zeros(dim);
    u1.set(x, x, p.d1(u));
    u1.set(x, n, q.clone());
    u1.set(y, n, bh.clone());
    u1.set(n, x, -h);
    u1.set(n, y, &emu * q * -2.0);
    u2.set(x, n, bh);
    u2.set(y, y, p.d2(u));
    u2.set(y, n, qb.clone());
    u2.set(n, x, &emu * qb * -2.0);
    u2.set(n, y, -h);
    if let Some(c) = c {
        let kap = &eu * (-1.0 / (2.0 * c));
        u1.set(y, 3, kap.clone());
        u1.set(3, x, p.one());
        u2.set(x, 3, kap);
        u2.set(3, y, p.one());
    }
    Ok(vec![u1, u2])
}

/// Compatibility residual for every pair `i < j`, one entry per pair and
/// θ-sector (max over matrix entries).
pub fn zero_curvature_residual(fs: &FrameSystem, tol: Tolerance) -> Result<ResidualReport> {
    let mut r = ResidualReport::new(fs.tag.name(), fs.grid(), tol);
    let m = fs.u.len();
    for i in 0..m {
        for j in i + 1..m {
            let res = fs.curvature(i, j)?;
            let fields: Vec<Field> = res.iter().map(|(_, _, f)| f.clone()).collect();
            r.push_matrix("zero-curvature", Some((i as u8 + 1, j as u8 + 1)), &fields);
        }
    }
    Ok(r)
}

/// The scalar Gauss–Codazzi equations of `spec` as named residual fields.
pub fn gauss_codazzi_fields(
    spec: &CaseSpec,
    bundle: &GeometryBundle,
    stencil: Stencil,
) -> Result<Vec<(String, Field)>> {
    let b = complete_bundle(spec, bundle)?;
    let d1 = |f: &Field| f.d_x_with(XDir::X1, stencil);
    let d2 = |f: &Field| f.d_x_with(XDir::X2, stencil);
    let classical =
        |u: &Field, q: &Field, qb: &Field, h: &Field, extra: f64| -> Vec<(String, Field)> {
            let eu = u.exp();
            let emu = (-u).exp();
            let gauss = d2(&d1(u)) + &eu * &((h * h) + extra) * 0.5 - &emu * &(q * qb) * 2.0;
            vec![
                ("gauss".to_string(), gauss),
                ("codazzi-1".to_string(), d2(q) - &eu * &d1(h) * 0.5),
                ("codazzi-2".to_string(), d1(qb) - &eu * &d2(h) * 0.5),
            ]
        };
    let get = |n: &str| b.get(n);
    Ok(match *spec {
        CaseSpec::EucF0 | CaseSpec::EucF3C2 { .. } => classical(
            get(names::U)?,
            get(names::Q)?,
            get(names::QBAR)?,
            get(names::H)?,
            0.0,
        ),
        CaseSpec::CurF0 { c } | CaseSpec::CurF2 { c } => classical(
            get(names::U)?,
            get(names::Q)?,
            get(names::QBAR)?,
            get(names::H)?,
            1.0 / c,
        ),
        CaseSpec::EucF2 { a, k, .. } => classical(
            get(names::U)?,
            get(names::Q_SMALL)?,
            get(names::QBAR_SMALL)?,
            get(names::H_SMALL)?,
            a * a / (k * k),
        ),
        CaseSpec::EucF3C1 { alpha, k, .. } => classical(
            get(names::U)?,
            get(names::Q_SMALL)?,
            get(names::QBAR_SMALL)?,
            get(names::H_SMALL)?,
            4.0 * alpha.norm_sqr() / (k * k),
        ),
        CaseSpec::HypF3C1 { .. } => {
            let u = get(names::U)?;
            let s2 = spec.hyp_case1_sigma2().expect("HYP_F3_C1");
            let liouville = d2(&d1(u)) + u.exp() * (2.0 * s2);
            let (h_ref, g_ref) = crate::cases::hyp_case1_hg(spec, u.grid())?;
            vec![
                ("liouville".to_string(), liouville),
                ("mean-curvature".to_string(), get(names::H)? - &h_ref),
                ("G".to_string(), get(names::G)? - &g_ref),
            ]
        }
        CaseSpec::HypF3C2 { c, .. } => {
            let (remaining, closed, _) = hyp_case2_remaining(&b, c, stencil)?;
            vec![
                ("remaining".to_string(), remaining),
                ("remaining-closed-form".to_string(), closed),
            ]
        }
    })
}

/// The single remaining equation of HYP_F3_C2 through Q, H and through the
/// closed form in φ, ψ, plus the printed reduced right-hand side.
fn hyp_case2_remaining(
    b: &GeometryBundle,
    c: f64,
    stencil: Stencil,
) -> Result<(Field, Field, Field)> {
    let d1 = |f: &Field| f.d_x_with(XDir::X1, stencil);
    let d2 = |f: &Field| f.d_x_with(XDir::X2, stencil);
    let phi = b.get(names::PHI)?;
    let psi = b.get(names::PSI)?;
    let q = b.get(names::Q)?;
    let qb = b.get(names::QBAR)?;
    let h = b.get(names::H)?;
    let ephi = phi.exp();
    let emphi = (-phi).exp();
    let lap = d2(&d1(phi));
    let remaining = &lap - &(&emphi * &(q * qb) * 2.0 - &ephi * &((h * h) + 1.0 / c) * 0.5);
    let p1 = d1(psi);
    let p2 = d2(psi);
    let prod = &p1 * &p2;
    let a1 = &d1(phi) * &p1 - d1(&p1) - (&p1 * &p1) * 0.5;
    let a2 = &d2(phi) * &p2 - d2(&p2) - (&p2 * &p2) * 0.5;
    let mixed = d2(&p1);
    let bb = &mixed + &(&prod * 0.5);
    let denom = (&emphi * &prod * c + 1.0).recip()?;
    let ce = &emphi * (c * 0.5);
    let closed_rhs = (&mixed + &(&ce * &(&bb * &bb - &a1 * &a2))) * &denom;
    let closed = &lap - &closed_rhs;
    let printed_rhs =
        &ephi * (1.0 / c) + &mixed * &denom + &ce * &denom * &(&bb * &bb + &a1 * &a2 * 4.0);
    let printed = &lap - &printed_rhs;
    Ok((remaining, closed, printed))
}

/// Scalar Gauss–Codazzi residual report (second-order stencils).
pub fn gauss_codazzi_residual(
    spec: &CaseSpec,
    bundle: &GeometryBundle,
    tol: Tolerance,
) -> Result<ResidualReport> {
    if let CaseSpec::CurF2 { c } = *spec {
        let mut r = gauss_codazzi_residual(&CaseSpec::CurF0 { c }, bundle, tol)?;
        r.case = CaseTag::CurF2.name().to_string();
        r.set_extra("reduces_to", CaseTag::CurF0.name());
        return Ok(r);
    }
    let fields = gauss_codazzi_fields(spec, bundle, Stencil::Second)?;
    let grid = Arc::clone(fields[0].1.grid());
    let mut r = ResidualReport::new(spec.tag().name(), &grid, tol);
    for (label, f) in &fields {
        r.push_field(label, None, f);
    }
    if let CaseSpec::HypF3C2 { c, .. } = *spec {
        let b = complete_bundle(spec, bundle)?;
        let (_, _, printed) = hyp_case2_remaining(&b, c, Stencil::Second)?;
        let nodes = grid.report_nodes();
        let worst = nodes
            .iter()
            .map(|&k| printed.body()[k].norm())
            .fold(0.0, f64::max);
        r.set_extra("printed_reduced_defect", worst);
    }
    Ok(r)
}

/// Report-friendly summary of a matrix: populated entries as 1-based pairs.
pub fn sparsity(m: &FieldMatrix) -> serde_json::Value {
    json!(m.iter().map(|(i, j, _)| [i + 1, j + 1]).collect::<Vec<_>>())
}
