//! Closed-form solution families with Q = 0 (q = 0) and constant mean
//! curvature, built from Liouville solutions.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::liouville::{liouville_solution, liouville_u, Holomorphic};
use super::{complete_bundle, names, CaseSpec, GeometryBundle};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::ConformalGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOptions {
    /// Generating holomorphic function; chosen from the sign of the
    /// Liouville constant when absent.
    pub f: Option<Holomorphic>,
    /// Constant mean curvature H0 (or h0 for the ω-scaled cases).
    pub h0: f64,
    /// Constant value of ψ for HYP_F3_C2.
    pub psi0: f64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            f: None,
            h0: 1.5,
            psi0: 0.0,
        }
    }
}

/// Generating function suited to the curvature sign on `[-1, 1]²`.
pub fn default_generator(k: f64) -> Holomorphic {
    let c = |x: f64| Complex64::new(x, 0.0);
    if k > 0.0 {
        Holomorphic::identity()
    } else if k < 0.0 {
        Holomorphic::scaled(0.5)
    } else {
        Holomorphic::Poly(vec![c(0.0), c(1.0), c(0.0), c(1.0 / 12.0)])
    }
}

/// HYP_F3_C1 solution: ω from the parameters, u = ln(|f'|²/(σ²(1+|f|²)²)),
/// H and G from the closed forms. `sigma` must match the parameters.
pub fn hyp_case1_family(
    spec: &CaseSpec,
    grid: &Arc<ConformalGrid>,
    f: &Holomorphic,
    sigma: Option<f64>,
) -> Result<GeometryBundle> {
    let CaseSpec::HypF3C1 { .. } = spec else {
        return Err(Error::InvalidParameter(
            "HYP_F3_C1 parameters expected".into(),
        ));
    };
    spec.validate()?;
    let s2 = spec.hyp_case1_sigma2().expect("HYP_F3_C1");
    let sigma = match sigma {
        Some(s) => {
            if (s * s - s2).abs() > 1e-12 * s2.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "σ² = {} inconsistent with −(αγ + cα²/k² − |β|²)/k² = {s2}",
                    s * s
                )));
            }
            s
        }
        None => s2.sqrt(),
    };
    let u = liouville_u(grid, f, sigma)?;
    complete_bundle(spec, &GeometryBundle::new().with(names::U, u))
}

/// Inputs of a solved bundle for any case, completed with all derived
/// quantities.
pub fn family(
    spec: &CaseSpec,
    grid: &Arc<ConformalGrid>,
    opts: &FamilyOptions,
) -> Result<GeometryBundle> {
    spec.validate()?;
    let k = spec.liouville_constant(opts.h0);
    let f = opts.f.clone().unwrap_or_else(|| default_generator(k));
    let zero = Field::zeros(grid);
    let h0 = Field::constant(grid, opts.h0);
    let inputs = match spec {
        CaseSpec::EucF0
        | CaseSpec::CurF0 { .. }
        | CaseSpec::CurF2 { .. }
        | CaseSpec::EucF3C2 { .. } => GeometryBundle::new()
            .with(names::U, liouville_solution(grid, &f, k)?)
            .with(names::Q, zero)
            .with(names::H, h0),
        CaseSpec::EucF2 { .. } | CaseSpec::EucF3C1 { .. } => GeometryBundle::new()
            .with(names::U, liouville_solution(grid, &f, k)?)
            .with(names::Q_SMALL, zero)
            .with(names::H_SMALL, h0),
        CaseSpec::HypF3C1 { .. } => return hyp_case1_family(spec, grid, &f, None),
        CaseSpec::HypF3C2 { .. } => GeometryBundle::new()
            .with(names::PHI, liouville_solution(grid, &f, 0.0)?)
            .with(names::PSI, Field::constant(grid, opts.psi0)),
    };
    complete_bundle(spec, &inputs)
}
