//! Closed-form solutions of the Liouville equation ∂1∂2u = −K e^u.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::ConformalGrid;

/// Constant printed in front of |∂1f|² in the hyperbolic F3 solution.
pub const PRINTED_LIOUVILLE_C: f64 = 2.0;

/// Constant for which u = ln(C|∂1f|²/(σ²(1+|f|²)²)) solves
/// ∂1∂2u = −2σ²e^u. Direct differentiation gives ∂1∂2u = −(2σ²/C)e^u.
pub const RESOLVED_LIOUVILLE_C: f64 = 1.0;

/// Holomorphic function of x1 used to generate Liouville solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Holomorphic {
    /// Σ c_k x1^k.
    Poly(Vec<Complex64>),
    /// e^{a x1}.
    Exp { a: Complex64 },
}

impl Holomorphic {
    pub fn identity() -> Self {
        Holomorphic::Poly(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn scaled(s: f64) -> Self {
        Holomorphic::Poly(vec![Complex64::new(0.0, 0.0), Complex64::new(s, 0.0)])
    }

    /// Value and first derivative at `z`.
    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        match self {
            Holomorphic::Poly(c) => {
                let mut f = Complex64::new(0.0, 0.0);
                let mut df = Complex64::new(0.0, 0.0);
                for ck in c.iter().rev() {
                    df = df * z + f;
                    f = f * z + ck;
                }
                (f, df)
            }
            Holomorphic::Exp { a } => {
                let e = (a * z).exp();
                (e, a * e)
            }
        }
    }
}

/// Solution of ∂1∂2u = −K e^u built from `f`:
/// K > 0: ln(|f'|²/((K/2)(1+|f|²)²)); K < 0: ln(|f'|²/((|K|/2)(1−|f|²)²));
/// K = 0: ln|f'|².
pub fn liouville_solution(grid: &Arc<ConformalGrid>, f: &Holomorphic, k: f64) -> Result<Field> {
    if !k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Liouville constant must be finite, got {k}"
        )));
    }
    let half = 0.5 * k.abs();
    let values: Vec<Complex64> = (0..grid.len())
        .map(|node| {
            let (fz, dfz) = f.eval(grid.x1(node));
            let num = dfz.norm_sqr();
            let v = if k > 0.0 {
                (num / (half * (1.0 + fz.norm_sqr()).powi(2))).ln()
            } else if k < 0.0 {
                (num / (half * (1.0 - fz.norm_sqr()).powi(2))).ln()
            } else {
                num.ln()
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    for node in grid.active_nodes() {
        let (fz, dfz) = f.eval(grid.x1(node));
        let x = grid.x1(node);
        if dfz.norm() == 0.0 {
            return Err(Error::Singular {
                what: "∂1f = 0".into(),
                s: x.re,
                t: x.im,
            });
        }
        if k < 0.0 && fz.norm() >= 1.0 {
            return Err(Error::Singular {
                what: "|f| ≥ 1 for negative curvature".into(),
                s: x.re,
                t: x.im,
            });
        }
        if !values[node].re.is_finite() {
            return Err(Error::NonFinite(format!(
                "Liouville solution at ({}, {})",
                x.re, x.im
            )));
        }
    }
    Field::from_planes(grid, [0, 0], [crate::field::EXACT; 2], vec![values])
}

/// u = ln(C|∂1f|²/(σ²(1+|f|²)²)) for an explicit constant `C`.
pub fn liouville_u_with_constant(
    grid: &Arc<ConformalGrid>,
    f: &Holomorphic,
    sigma: f64,
    c: f64,
) -> Result<Field> {
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "σ must be nonzero and finite, got {sigma}"
        )));
    }
    let base = liouville_solution(grid, f, 2.0)?;
    Ok(base.add_scalar((c / (sigma * sigma)).ln()))
}

/// Solution of ∂1∂2u = −2σ²e^u with the resolved constant.
pub fn liouville_u(grid: &Arc<ConformalGrid>, f: &Holomorphic, sigma: f64) -> Result<Field> {
    liouville_u_with_constant(grid, f, sigma, RESOLVED_LIOUVILLE_C)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::XDir;

    fn grid(n: usize) -> Arc<ConformalGrid> {
        Arc::new(ConformalGrid::unit_square(n).unwrap())
    }

    #[test]
    fn printed_value_at_origin() {
        let g = grid(21);
        let u = liouville_u_with_constant(&g, &Holomorphic::identity(), 1.0, PRINTED_LIOUVILLE_C)
            .unwrap();
        assert!((u.body()[g.center_node()].re - 2f64.ln()).abs() < 1e-15);
        let u1 = liouville_u(&g, &Holomorphic::identity(), 1.0).unwrap();
        let u2 = liouville_u(&g, &Holomorphic::scaled(2.0), 1.0).unwrap();
        let c = g.center_node();
        assert!((u2.body()[c].re - u1.body()[c].re - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn polynomial_eval() {
        let f = Holomorphic::Poly(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(3.0, 0.0),
        ]);
        let z = Complex64::new(0.5, -0.25);
        let (v, d) = f.eval(z);
        let ev = Complex64::new(1.0, 0.0) + Complex64::new(0.0, 2.0) * z + 3.0 * z * z;
        let ed = Complex64::new(0.0, 2.0) + 6.0 * z;
        assert!((v - ev).norm() < 1e-15 && (d - ed).norm() < 1e-15);
    }

    #[test]
    fn all_curvature_signs_solve_the_equation() {
        let g = grid(81);
        let nodes = g.report_nodes();
        let h2 = g.h() * g.h();
        let cases = [
            (1.5, Holomorphic::identity()),
            (-0.8, Holomorphic::scaled(0.5)),
            (
                0.0,
                Holomorphic::Exp {
                    a: Complex64::new(0.3, 0.2),
                },
            ),
        ];
        for (k, f) in cases {
            let u = liouville_solution(&g, &f, k).unwrap();
            let res = u.d_x(XDir::X1).d_x(XDir::X2) + u.exp() * k;
            let worst = nodes
                .iter()
                .map(|&n| res.body()[n].norm())
                .fold(0.0, f64::max);
            assert!(worst < 50.0 * h2, "K = {k}: {worst}");
        }
    }

    #[test]
    fn printed_constant_misses_the_equation() {
        let g = grid(81);
        let sigma = 1.0;
        let printed =
            liouville_u_with_constant(&g, &Holomorphic::identity(), sigma, PRINTED_LIOUVILLE_C)
                .unwrap();
        let res = printed.d_x(XDir::X1).d_x(XDir::X2) + printed.exp() * (2.0 * sigma * sigma);
        let c = g.center_node();
        // printed u solves ∂1∂2u = −σ²e^u, leaving σ²e^u = 2 at the origin
        assert!((res.body()[c].re - 2.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_singular_inputs() {
        let g = grid(21);
        assert!(liouville_solution(&g, &Holomorphic::identity(), -1.0).is_err());
        let constant = Holomorphic::Poly(vec![Complex64::new(1.0, 0.0)]);
        assert!(liouville_solution(&g, &constant, 1.0).is_err());
        assert!(liouville_u(&g, &Holomorphic::identity(), 0.0).is_err());
    }
}
