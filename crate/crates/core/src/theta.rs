//! Polynomials in the commuting fermion-descendant variables θ3, θ4.
//!
//! Every θ-dependent quantity is carried as a truncated power series with
//! coefficients for θ3^m θ4^n, `m, n <= THETA_CAP`. Quantities that are
//! genuinely polynomial (metric factors, ω) are stored exactly; rational ones
//! such as `1/ω` are stored through order `THETA_CAP` in each variable, and
//! the containing [`Field`](crate::Field) tracks how many orders remain exact
//! after differentiation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Highest power of θ3 (and of θ4) kept in a series.
pub const THETA_CAP: usize = 4;
/// Coefficient slots of a full [`ThetaPoly`].
pub const THETA_SLOTS: usize = (THETA_CAP + 1) * (THETA_CAP + 1);

/// One of the two θ variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaVar {
    Theta3,
    Theta4,
}

impl ThetaVar {
    pub fn index(self) -> usize {
        match self {
            ThetaVar::Theta3 => 0,
            ThetaVar::Theta4 => 1,
        }
    }

    /// Coordinate index in the set {1, 2, 3, 4}.
    pub fn label(self) -> u8 {
        match self {
            ThetaVar::Theta3 => 3,
            ThetaVar::Theta4 => 4,
        }
    }
}

/// How complex conjugation acts on θ3, θ4.
///
/// `Real` treats both variables as real (F2-type manifolds, where θ4 never
/// appears); `Pair` uses the conformal pairing θ4 = conj(θ3), so conjugation
/// swaps the two variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaConj {
    Real,
    Pair,
}

#[inline]
pub(crate) fn slot(m: usize, n: usize) -> usize {
    m * (THETA_CAP + 1) + n
}

/// A single θ-polynomial value (one grid node).
#[derive(Clone, Copy, PartialEq)]
pub struct ThetaPoly {
    coeffs: [Complex64; THETA_SLOTS],
}

impl Default for ThetaPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl ThetaPoly {
    pub fn zero() -> Self {
        Self {
            coeffs: [Complex64::new(0.0, 0.0); THETA_SLOTS],
        }
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        let mut p = Self::zero();
        p.coeffs[0] = c.into();
        p
    }

    pub fn monomial(m: usize, n: usize, c: impl Into<Complex64>) -> Self {
        let mut p = Self::zero();
        p.set(m, n, c.into());
        p
    }

    /// Builds `Σ c_{mn} θ3^m θ4^n` from `(m, n, c)` triples; repeated slots add.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut p = Self::zero();
        for (m, n, c) in terms {
            assert!(m <= THETA_CAP && n <= THETA_CAP, "θ degree above cap");
            p.coeffs[slot(m, n)] += c;
        }
        p
    }

    pub fn coeff(&self, m: usize, n: usize) -> Complex64 {
        if m > THETA_CAP || n > THETA_CAP {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[slot(m, n)]
    }

    pub fn set(&mut self, m: usize, n: usize, c: Complex64) {
        assert!(m <= THETA_CAP && n <= THETA_CAP, "θ degree above cap");
        self.coeffs[slot(m, n)] = c;
    }

    pub fn body(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Highest power of `var` with a nonzero coefficient.
    pub fn degree(&self, var: ThetaVar) -> usize {
        let mut d = 0;
        for m in 0..=THETA_CAP {
            for n in 0..=THETA_CAP {
                if self.coeffs[slot(m, n)] != Complex64::new(0.0, 0.0) {
                    d = d.max(if var == ThetaVar::Theta3 { m } else { n });
                }
            }
        }
        d
    }

    /// Exact formal derivative.
    pub fn d_theta(&self, var: ThetaVar) -> Self {
        let mut out = Self::zero();
        for m in 0..=THETA_CAP {
            for n in 0..=THETA_CAP {
                let c = self.coeffs[slot(m, n)];
                match var {
                    ThetaVar::Theta3 if m > 0 => out.coeffs[slot(m - 1, n)] = c * m as f64,
                    ThetaVar::Theta4 if n > 0 => out.coeffs[slot(m, n - 1)] = c * n as f64,
                    _ => {}
                }
            }
        }
        out
    }

    pub fn eval(&self, theta3: Complex64, theta4: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p3 = Complex64::new(1.0, 0.0);
        for m in 0..=THETA_CAP {
            let mut p4 = Complex64::new(1.0, 0.0);
            for n in 0..=THETA_CAP {
                acc += self.coeffs[slot(m, n)] * p3 * p4;
                p4 *= theta4;
            }
            p3 *= theta3;
        }
        acc
    }

    pub fn conj(&self, mode: ThetaConj) -> Self {
        let mut out = Self::zero();
        for m in 0..=THETA_CAP {
            for n in 0..=THETA_CAP {
                let c = self.coeffs[slot(m, n)].conj();
                match mode {
                    ThetaConj::Real => out.coeffs[slot(m, n)] = c,
                    ThetaConj::Pair => out.coeffs[slot(n, m)] = c,
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..=THETA_CAP)
            .flat_map(move |m| (0..=THETA_CAP).map(move |n| (m, n, self.coeffs[slot(m, n)])))
    }
}

impl Add for ThetaPoly {
    type Output = ThetaPoly;
    fn add(mut self, rhs: ThetaPoly) -> ThetaPoly {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for ThetaPoly {
    type Output = ThetaPoly;
    fn sub(mut self, rhs: ThetaPoly) -> ThetaPoly {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for ThetaPoly {
    type Output = ThetaPoly;
    fn neg(mut self) -> ThetaPoly {
        for a in self.coeffs.iter_mut() {
            *a = -*a;
        }
        self
    }
}

/// Truncated product: terms above `THETA_CAP` in either variable are dropped.
impl Mul for ThetaPoly {
    type Output = ThetaPoly;
    fn mul(self, rhs: ThetaPoly) -> ThetaPoly {
        let mut out = ThetaPoly::zero();
        for m1 in 0..=THETA_CAP {
            for n1 in 0..=THETA_CAP {
                let a = self.coeffs[slot(m1, n1)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for m2 in 0..=THETA_CAP - m1 {
                    for n2 in 0..=THETA_CAP - n1 {
                        out.coeffs[slot(m1 + m2, n1 + n2)] += a * rhs.coeffs[slot(m2, n2)];
                    }
                }
            }
        }
        out
    }
}

impl Mul<Complex64> for ThetaPoly {
    type Output = ThetaPoly;
    fn mul(mut self, rhs: Complex64) -> ThetaPoly {
        for a in self.coeffs.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl fmt::Debug for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, n, c) in self.iter_terms() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if m > 0 {
                write!(f, "·θ3^{m}")?;
            }
            if n > 0 {
                write!(f, "·θ4^{n}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn derivative_of_linear_term() {
        let a = 2.5;
        let b = -1.0;
        let p = ThetaPoly::from_terms([(1, 0, c(a)), (0, 0, c(b))]);
        assert_eq!(p.d_theta(ThetaVar::Theta3), ThetaPoly::constant(a));
        assert_eq!(p.d_theta(ThetaVar::Theta4), ThetaPoly::zero());
    }

    #[test]
    fn triple_derivative_of_allowed_poly_vanishes() {
        let p = ThetaPoly::from_terms([
            (2, 2, c(3.0)),
            (1, 2, c(1.0)),
            (2, 0, c(-4.0)),
            (0, 1, c(7.0)),
        ]);
        let d3 = p
            .d_theta(ThetaVar::Theta3)
            .d_theta(ThetaVar::Theta3)
            .d_theta(ThetaVar::Theta3);
        assert_eq!(d3, ThetaPoly::zero());
        let d4 = p
            .d_theta(ThetaVar::Theta4)
            .d_theta(ThetaVar::Theta4)
            .d_theta(ThetaVar::Theta4);
        assert_eq!(d4, ThetaPoly::zero());
    }

    #[test]
    fn truncated_product_drops_high_orders() {
        let x = ThetaPoly::monomial(3, 0, c(1.0));
        assert_eq!(x * x, ThetaPoly::zero());
        let y = ThetaPoly::monomial(2, 1, c(2.0));
        assert_eq!(x * y, ThetaPoly::zero());
        let z = ThetaPoly::monomial(1, 1, c(2.0));
        assert_eq!((x * z).coeff(4, 1), c(2.0));
    }

    #[test]
    fn pair_conjugation_swaps_variables() {
        let p = ThetaPoly::from_terms([(1, 0, Complex64::new(1.0, 2.0)), (0, 0, c(3.0))]);
        let q = p.conj(ThetaConj::Pair);
        assert_eq!(q.coeff(0, 1), Complex64::new(1.0, -2.0));
        assert_eq!(q.coeff(1, 0), c(0.0));
        let r = p.conj(ThetaConj::Real);
        assert_eq!(r.coeff(1, 0), Complex64::new(1.0, -2.0));
    }

    #[test]
    fn eval_matches_terms() {
        let p = ThetaPoly::from_terms([(1, 1, c(2.0)), (0, 1, c(-1.0)), (0, 0, c(0.5))]);
        let v = p.eval(c(3.0), c(2.0));
        assert_eq!(v, c(2.0 * 6.0 - 2.0 + 0.5));
    }
}
