//! Grassmann algebra on three generators, the sector-wise super inner
//! product, and splitting a supermanifold into its component manifolds.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, NILPOTENCY_RTOL};

/// Number of Grassmann generators ξ1..ξN.
pub const GENERATORS: usize = 3;
/// Number of basis monomials, one per subset of generators.
pub const BASIS_LEN: usize = 1 << GENERATORS;

/// A basis monomial ξ_{i1}…ξ_{ik} (i1 < … < ik), stored as a bit set with
/// bit `i-1` standing for ξi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Blade(pub u8);

impl Blade {
    pub const ONE: Blade = Blade(0);
    pub const XI1: Blade = Blade(0b001);
    pub const XI2: Blade = Blade(0b010);
    pub const XI3: Blade = Blade(0b100);
    pub const XI12: Blade = Blade(0b011);
    pub const XI13: Blade = Blade(0b101);
    pub const XI23: Blade = Blade(0b110);
    pub const XI123: Blade = Blade(0b111);

    /// Generator ξi, `i` starting at 1.
    pub fn generator(i: usize) -> Blade {
        assert!(
            (1..=GENERATORS).contains(&i),
            "generator index out of range"
        );
        Blade(1 << (i - 1))
    }

    pub fn grade(self) -> u32 {
        self.0.count_ones()
    }

    /// Sign and result of `self · other`, `None` if a generator repeats.
    pub fn product(self, other: Blade) -> Option<(f64, Blade)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // count pairs (i in self, j in other) with i > j
        let mut swaps = 0u32;
        let mut b = other.0;
        while b != 0 {
            let j = b.trailing_zeros();
            swaps += (self.0 >> (j + 1)).count_ones();
            b &= b - 1;
        }
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, Blade(self.0 | other.0)))
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        for i in 0..GENERATORS {
            if self.0 & (1 << i) != 0 {
                write!(f, "ξ{}", i + 1)?;
            }
        }
        Ok(())
    }
}

/// Element of the Grassmann algebra with complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrassmannValue {
    coeffs: [Complex64; BASIS_LEN],
}

impl Default for GrassmannValue {
    fn default() -> Self {
        Self::zero()
    }
}

impl GrassmannValue {
    pub fn zero() -> Self {
        Self {
            coeffs: [Complex64::new(0.0, 0.0); BASIS_LEN],
        }
    }

    pub fn scalar(c: impl Into<Complex64>) -> Self {
        Self::monomial(Blade::ONE, c)
    }

    pub fn generator(i: usize) -> Self {
        Self::monomial(Blade::generator(i), 1.0)
    }

    pub fn monomial(b: Blade, c: impl Into<Complex64>) -> Self {
        let mut v = Self::zero();
        v.coeffs[b.0 as usize] = c.into();
        v
    }

    pub fn from_coeffs(coeffs: [Complex64; BASIS_LEN]) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64; BASIS_LEN] {
        &self.coeffs
    }

    pub fn coeff(&self, b: Blade) -> Complex64 {
        self.coeffs[b.0 as usize]
    }

    pub fn set(&mut self, b: Blade, c: impl Into<Complex64>) {
        self.coeffs[b.0 as usize] = c.into();
    }

    pub fn body(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Degree when all nonzero terms share one grade.
    pub fn homogeneous_grade(&self) -> Option<u32> {
        let mut grade = None;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                let g = Blade(k as u8).grade();
                match grade {
                    None => grade = Some(g),
                    Some(h) if h != g => return None,
                    _ => {}
                }
            }
        }
        grade.or(Some(0))
    }

    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| Blade(k as u8).grade() % 2 == 0 || *c == Complex64::new(0.0, 0.0))
    }
}

impl Add for GrassmannValue {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for GrassmannValue {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for GrassmannValue {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.coeffs.iter_mut().for_each(|a| *a = -*a);
        self
    }
}

impl Mul for GrassmannValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        gr_mul(&self, &rhs)
    }
}

impl Mul<Complex64> for GrassmannValue {
    type Output = Self;
    fn mul(mut self, rhs: Complex64) -> Self {
        self.coeffs.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

/// Exterior product.
pub fn gr_mul(a: &GrassmannValue, b: &GrassmannValue) -> GrassmannValue {
    let mut out = GrassmannValue::zero();
    for (i, x) in a.coeffs.iter().enumerate() {
        if *x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, y) in b.coeffs.iter().enumerate() {
            if let Some((sign, blade)) = Blade(i as u8).product(Blade(j as u8)) {
                out.coeffs[blade.0 as usize] += x * y * sign;
            }
        }
    }
    out
}

impl fmt::Display for GrassmannValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        let mut order: Vec<usize> = (0..BASIS_LEN).collect();
        order.sort_by_key(|&k| (Blade(k as u8).grade(), k));
        for k in order {
            let c = self.coeffs[k];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let coef = if c.im == 0.0 {
                format!("{}", c.re)
            } else {
                format!("({c})")
            };
            terms.push(if k == 0 {
                coef
            } else {
                format!("{coef}{}", Blade(k as u8))
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Monomial carrying component `i` of a super vector:
/// V0 + V3 ξ1ξ2 + V2 ξ1ξ3 + V1 ξ2ξ3.
pub fn sector_blade(i: usize) -> Blade {
    match i {
        0 => Blade::ONE,
        1 => Blade::XI23,
        2 => Blade::XI13,
        3 => Blade::XI12,
        _ => panic!("sector index {i} out of range"),
    }
}

/// Even super vector `V0 + V3 ξ1ξ2 + V2 ξ1ξ3 + V1 ξ2ξ3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperVector {
    components: [Vec<Complex64>; 4],
}

impl SuperVector {
    pub fn new(components: [Vec<Complex64>; 4]) -> Self {
        Self { components }
    }

    pub fn real(components: [&[f64]; 4]) -> Self {
        Self::new(components.map(|v| v.iter().map(|&x| Complex64::new(x, 0.0)).collect()))
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.components[i]
    }

    pub fn dims(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|i| self.components[i].len())
    }
}

/// Per-sector scalar product: Euclidean, or signed in the 0-th coordinate
/// with the sign of the sector's curvature constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SectorMetricSignature {
    Flat,
    Curved([f64; 4]),
}

impl SectorMetricSignature {
    pub fn curved(c: [f64; 4]) -> Result<Self> {
        for (i, ci) in c.iter().enumerate() {
            if !(ci.is_finite() && *ci != 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "curvature constant c{i} must be nonzero, got {ci}"
                )));
            }
        }
        Ok(Self::Curved(c))
    }

    pub fn uniform_curved(c: f64) -> Result<Self> {
        Self::curved([c; 4])
    }

    fn sector_sign(&self, i: usize) -> Option<f64> {
        match self {
            Self::Flat => None,
            Self::Curved(c) => Some(c[i].signum()),
        }
    }
}

pub fn super_inner(
    a: &SuperVector,
    b: &SuperVector,
    sig: SectorMetricSignature,
) -> Result<GrassmannValue> {
    let mut out = GrassmannValue::zero();
    for i in 0..4 {
        let (x, y) = (a.component(i), b.component(i));
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                sector: format!("V{i}"),
                left: x.len(),
                right: y.len(),
            });
        }
        let mut acc: Complex64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        if let Some(sign) = sig.sector_sign(i) {
            if x.is_empty() {
                return Err(Error::DimensionMismatch {
                    sector: format!("V{i} (curved sectors need the 0-th coordinate)"),
                    left: 0,
                    right: 1,
                });
            }
            acc += (sign - 1.0) * x[0] * y[0];
        }
        out.set(sector_blade(i), acc);
    }
    Ok(out)
}

/// A supermanifold sampled on a grid: one vector of [`Field`]s per
/// Grassmann monomial (empty when the monomial is absent).
#[derive(Debug, Clone, Default)]
pub struct SuperField {
    pub monomials: [Vec<Field>; BASIS_LEN],
}

/// The component manifolds `F0 … F3`.
#[derive(Debug, Clone, Default)]
pub struct ComponentMaps {
    pub f: [Vec<Field>; 4],
}

fn negligible(f: &Field, values: impl Iterator<Item = f64>) -> (bool, f64) {
    let worst = values.fold(0.0, f64::max);
    (worst <= NILPOTENCY_RTOL * f.max_abs().max(1.0), worst)
}

fn sector_magnitude<P>(f: &Field, keep: P) -> f64
where
    P: Fn(usize, usize) -> bool,
{
    let [d3, d4] = f.degree();
    let mut worst = 0.0f64;
    for m in 0..=d3 {
        for n in 0..=d4 {
            if keep(m, n) {
                let p = f.plane(m, n).unwrap();
                for k in f.grid().active_nodes() {
                    worst = worst.max(p[k].norm());
                }
            }
        }
    }
    worst
}

/// Splits `S = F0 + F3 ξ1ξ2 + F2 ξ1ξ3 + F1 ξ2ξ3` and checks each component's
/// allowed θ-dependence: F0 none, F2 θ3 only, F1 θ4 only, and no component
/// quadratic in a single θ.
pub fn decompose(s: &SuperField) -> Result<ComponentMaps> {
    for (k, comp) in s.monomials.iter().enumerate() {
        let blade = Blade(k as u8);
        if blade.grade() % 2 == 1 {
            for f in comp {
                let (ok, _) = negligible(f, std::iter::once(f.max_abs()));
                if !ok {
                    return Err(Error::OddComponent {
                        monomial: blade.to_string(),
                    });
                }
            }
        }
    }
    let mut out = ComponentMaps::default();
    for i in 0..4 {
        let blade = sector_blade(i);
        let name = format!("F{i}");
        for f in &s.monomials[blade.0 as usize] {
            for (var, idx) in [("θ3", 0usize), ("θ4", 1usize)] {
                let mag = sector_magnitude(f, |m, n| if idx == 0 { m >= 2 } else { n >= 2 });
                if !negligible(f, std::iter::once(mag)).0 {
                    return Err(Error::Nilpotency {
                        sector: name.clone(),
                        var: var.into(),
                        magnitude: mag,
                    });
                }
            }
            let forbid3 = i == 0 || i == 1;
            let forbid4 = i == 0 || i == 2;
            if forbid3 {
                let mag = sector_magnitude(f, |m, _| m >= 1);
                if !negligible(f, std::iter::once(mag)).0 {
                    return Err(Error::ForbiddenDependence {
                        sector: name.clone(),
                        var: "θ3".into(),
                    });
                }
            }
            if forbid4 {
                let mag = sector_magnitude(f, |_, n| n >= 1);
                if !negligible(f, std::iter::once(mag)).0 {
                    return Err(Error::ForbiddenDependence {
                        sector: name.clone(),
                        var: "θ4".into(),
                    });
                }
            }
        }
        out.f[i] = s.monomials[blade.0 as usize].clone();
    }
    Ok(out)
}

/// Inverse of [`decompose`].
pub fn reassemble(c: &ComponentMaps) -> SuperField {
    let mut s = SuperField::default();
    for i in 0..4 {
        s.monomials[sector_blade(i).0 as usize] = c.f[i].clone();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ConformalGrid;
    use crate::theta::ThetaVar;
    use std::sync::Arc;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn generator_products() {
        let x1 = GrassmannValue::generator(1);
        let x2 = GrassmannValue::generator(2);
        assert_eq!(x1 * x2, GrassmannValue::monomial(Blade::XI12, 1.0));
        assert_eq!(x2 * x1, GrassmannValue::monomial(Blade::XI12, -1.0));
        assert_eq!(x1 * x1, GrassmannValue::zero());
    }

    #[test]
    fn nilpotent_cross_term_vanishes() {
        let a = GrassmannValue::scalar(1.0) + GrassmannValue::monomial(Blade::XI12, 2.0);
        let b = GrassmannValue::scalar(3.0) + GrassmannValue::monomial(Blade::XI23, 1.0);
        let expect = GrassmannValue::scalar(3.0)
            + GrassmannValue::monomial(Blade::XI12, 6.0)
            + GrassmannValue::monomial(Blade::XI23, 1.0);
        assert_eq!(a * b, expect);
        assert_eq!(expect.to_string(), "3 + 6ξ1ξ2 + 1ξ2ξ3");
    }

    #[test]
    fn triple_product_sign() {
        let x = |i| GrassmannValue::generator(i);
        assert_eq!(
            x(3) * x(2) * x(1),
            GrassmannValue::monomial(Blade::XI123, -1.0)
        );
        assert_eq!(
            x(2) * x(3) * x(1),
            GrassmannValue::monomial(Blade::XI123, 1.0)
        );
    }

    #[test]
    fn unit_sectors_flat() {
        let e = |n: usize| {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            v
        };
        let (a, b, c, d) = (e(3), e(4), e(2), e(5));
        let v = SuperVector::real([&a, &b, &c, &d]);
        let ip = super_inner(&v, &v, SectorMetricSignature::Flat).unwrap();
        let expect = GrassmannValue::scalar(1.0)
            + GrassmannValue::monomial(Blade::XI12, 1.0)
            + GrassmannValue::monomial(Blade::XI13, 1.0)
            + GrassmannValue::monomial(Blade::XI23, 1.0);
        assert_eq!(ip, expect);
    }

    #[test]
    fn curved_hyperbolic_signs() {
        let e = [1.0, 0.0, 0.0, 0.0];
        let v = SuperVector::real([&e, &e, &e, &e]);
        let sig = SectorMetricSignature::uniform_curved(-1.0).unwrap();
        let ip = super_inner(&v, &v, sig).unwrap();
        for i in 0..4 {
            assert_eq!(ip.coeff(sector_blade(i)), r(-1.0));
        }
        assert!(SectorMetricSignature::curved([1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn sector_dimension_mismatch() {
        let a = SuperVector::real([&[1.0], &[1.0], &[1.0], &[1.0, 2.0]]);
        let b = SuperVector::real([&[1.0], &[1.0], &[1.0], &[1.0]]);
        assert!(matches!(
            super_inner(&a, &b, SectorMetricSignature::Flat),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decompose_linear_f2_and_reject_square() {
        let g = Arc::new(ConformalGrid::unit_square(7).unwrap());
        let th3 = Field::theta(&g, ThetaVar::Theta3);
        let w = &th3 * 0.5 + 2.0;
        let mut s = SuperField::default();
        s.monomials[Blade::ONE.0 as usize] = vec![Field::from_fn(&g, |x| x)];
        s.monomials[Blade::XI13.0 as usize] = vec![w.scale(3.0), w.scale(-1.0)];
        let c = decompose(&s).unwrap();
        assert_eq!(c.f[2].len(), 2);
        assert_eq!(c.f[2][0].degree(), [1, 0]);
        assert!(c.f[1].is_empty() && c.f[3].is_empty());

        s.monomials[Blade::XI13.0 as usize] = vec![&th3 * &th3];
        assert!(matches!(decompose(&s), Err(Error::Nilpotency { .. })));

        s.monomials[Blade::XI13.0 as usize] = vec![Field::theta(&g, ThetaVar::Theta4)];
        assert!(matches!(
            decompose(&s),
            Err(Error::ForbiddenDependence { .. })
        ));

        s.monomials[Blade::XI13.0 as usize].clear();
        s.monomials[Blade::XI1.0 as usize] = vec![Field::constant(&g, 1.0)];
        assert!(matches!(decompose(&s), Err(Error::OddComponent { .. })));
    }
}
