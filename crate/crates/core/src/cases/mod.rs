//! The case catalog: parameters, geometry bundles, metrics, derived
//! quantities and closed-form families for the seven immersion cases.
//!
//! See [`catalog`] for the reference table.

pub mod appendix;
pub mod catalog;
pub mod families;
pub mod liouville;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::frames::FieldMatrix;
use crate::grid::ConformalGrid;
use crate::theta::{ThetaConj, ThetaPoly, ThetaVar};

pub use appendix::{appendix_a_residuals, appendix_b_residuals, AppendixFields};
pub use families::{family, hyp_case1_family, FamilyOptions};
pub use liouville::{
    liouville_solution, liouville_u, liouville_u_with_constant, Holomorphic, PRINTED_LIOUVILLE_C,
    RESOLVED_LIOUVILLE_C,
};

/// Field names used in bundles and manifests.
pub mod names {
    pub const U: &str = "u";
    pub const Q_SMALL: &str = "q";
    pub const QBAR_SMALL: &str = "qbar";
    pub const H_SMALL: &str = "h";
    pub const Q: &str = "Q";
    pub const QBAR: &str = "Qbar";
    pub const H: &str = "H";
    pub const G: &str = "G";
    pub const PHI: &str = "phi";
    pub const PSI: &str = "psi";
    pub const OMEGA: &str = "omega";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "euc-f0")]
    EucF0,
    #[serde(rename = "euc-f2")]
    EucF2,
    #[serde(rename = "euc-f3-c1")]
    EucF3C1,
    #[serde(rename = "euc-f3-c2")]
    EucF3C2,
    #[serde(rename = "cur-f0")]
    CurF0,
    /// Curved F2: carries no θ3 dependence and reduces to [`CaseTag::CurF0`].
    #[serde(rename = "cur-f2")]
    CurF2,
    #[serde(rename = "hyp-f3-c1")]
    HypF3C1,
    #[serde(rename = "hyp-f3-c2")]
    HypF3C2,
}

impl CaseTag {
    /// The seven distinct cases (the curved-F2 alias excluded).
    pub const ALL: [CaseTag; 7] = [
        CaseTag::EucF0,
        CaseTag::EucF2,
        CaseTag::EucF3C1,
        CaseTag::EucF3C2,
        CaseTag::CurF0,
        CaseTag::HypF3C1,
        CaseTag::HypF3C2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::EucF0 => "euc-f0",
            CaseTag::EucF2 => "euc-f2",
            CaseTag::EucF3C1 => "euc-f3-c1",
            CaseTag::EucF3C2 => "euc-f3-c2",
            CaseTag::CurF0 => "cur-f0",
            CaseTag::CurF2 => "cur-f2",
            CaseTag::HypF3C1 => "hyp-f3-c1",
            CaseTag::HypF3C2 => "hyp-f3-c2",
        }
    }

    /// Upper-case identifier, e.g. `EUC_F3_C1`.
    pub fn ident(self) -> String {
        self.name().replace('-', "_").to_uppercase()
    }

    /// Frame (and ambient) dimension.
    pub fn dim(self) -> usize {
        match self {
            CaseTag::EucF0 => 3,
            CaseTag::EucF2 | CaseTag::CurF0 | CaseTag::CurF2 => 4,
            CaseTag::EucF3C1 | CaseTag::EucF3C2 => 5,
            CaseTag::HypF3C1 | CaseTag::HypF3C2 => 6,
        }
    }

    /// Number of independent variables (2, 3 or 4).
    pub fn n_vars(self) -> usize {
        match self {
            CaseTag::EucF0 | CaseTag::CurF0 | CaseTag::CurF2 => 2,
            CaseTag::EucF2 => 3,
            _ => 4,
        }
    }

    pub fn is_curved(self) -> bool {
        matches!(
            self,
            CaseTag::CurF0 | CaseTag::CurF2 | CaseTag::HypF3C1 | CaseTag::HypF3C2
        )
    }

    /// θ3 is real for F2-type manifolds; F3-type manifolds pair θ4 = conj θ3.
    pub fn theta_conj(self) -> ThetaConj {
        match self.n_vars() {
            4 => ThetaConj::Pair,
            _ => ThetaConj::Real,
        }
    }

    /// θ variables the case depends on.
    pub fn theta_vars(self) -> &'static [ThetaVar] {
        match self.n_vars() {
            2 => &[],
            3 => &[ThetaVar::Theta3],
            _ => &[ThetaVar::Theta3, ThetaVar::Theta4],
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_lowercase().replace('_', "-");
        [CaseTag::CurF2]
            .into_iter()
            .chain(CaseTag::ALL)
            .find(|t| t.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown case `{s}`")))
    }
}

/// One immersion case with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum CaseSpec {
    EucF0,
    EucF2 {
        a: f64,
        b: f64,
        k: f64,
    },
    #[serde(rename = "euc-f3-c1")]
    EucF3C1 {
        alpha: Complex64,
        gamma: f64,
        k: f64,
    },
    #[serde(rename = "euc-f3-c2")]
    EucF3C2 {
        alpha: f64,
        beta: Complex64,
        gamma: f64,
    },
    CurF0 {
        c: f64,
    },
    CurF2 {
        c: f64,
    },
    #[serde(rename = "hyp-f3-c1")]
    HypF3C1 {
        alpha: f64,
        beta: Complex64,
        gamma: f64,
        k: f64,
        c: f64,
        eps: f64,
    },
    #[serde(rename = "hyp-f3-c2")]
    HypF3C2 {
        c: f64,
        eps: f64,
    },
}

/// Smallest |ω| accepted at the θ expansion point, relative to the
/// parameter scale.
const OMEGA_FLOOR: f64 = 0.1;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    ensure(eps == 1.0 || eps == -1.0, || {
        format!("ε must be ±1, got {eps}")
    })
}

fn check_finite(vals: &[(&str, f64)]) -> Result<()> {
    for (name, v) in vals {
        ensure(v.is_finite(), || format!("{name} must be finite, got {v}"))?;
    }
    Ok(())
}

impl CaseSpec {
    pub fn tag(&self) -> CaseTag {
        match self {
            CaseSpec::EucF0 => CaseTag::EucF0,
            CaseSpec::EucF2 { .. } => CaseTag::EucF2,
            CaseSpec::EucF3C1 { .. } => CaseTag::EucF3C1,
            CaseSpec::EucF3C2 { .. } => CaseTag::EucF3C2,
            CaseSpec::CurF0 { .. } => CaseTag::CurF0,
            CaseSpec::CurF2 { .. } => CaseTag::CurF2,
            CaseSpec::HypF3C1 { .. } => CaseTag::HypF3C1,
            CaseSpec::HypF3C2 { .. } => CaseTag::HypF3C2,
        }
    }

    /// Parameters used when none are given on the command line.
    pub fn default_for(tag: CaseTag) -> CaseSpec {
        match tag {
            CaseTag::EucF0 => CaseSpec::EucF0,
            CaseTag::EucF2 => CaseSpec::EucF2 {
                a: 1.0,
                b: 1.0,
                k: 1.0,
            },
            CaseTag::EucF3C1 => CaseSpec::EucF3C1 {
                alpha: Complex64::new(0.5, 0.25),
                gamma: 1.0,
                k: 1.0,
            },
            CaseTag::EucF3C2 => CaseSpec::EucF3C2 {
                alpha: 0.5,
                beta: Complex64::new(0.25, 0.25),
                gamma: 1.0,
            },
            CaseTag::CurF0 => CaseSpec::CurF0 { c: -1.0 },
            CaseTag::CurF2 => CaseSpec::CurF2 { c: -1.0 },
            CaseTag::HypF3C1 => CaseSpec::HypF3C1 {
                alpha: 0.5,
                beta: Complex64::new(1.0, 0.0),
                gamma: 0.5,
                k: 1.0,
                c: -1.0,
                eps: 1.0,
            },
            CaseTag::HypF3C2 => CaseSpec::HypF3C2 { c: -1.0, eps: 1.0 },
        }
    }

    /// Curvature constant of the ambient space (curved cases).
    pub fn c(&self) -> Option<f64> {
        match self {
            CaseSpec::CurF0 { c } | CaseSpec::CurF2 { c } => Some(*c),
            CaseSpec::HypF3C1 { c, .. } | CaseSpec::HypF3C2 { c, .. } => Some(*c),
            _ => None,
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match self {
            CaseSpec::HypF3C1 { eps, .. } | CaseSpec::HypF3C2 { eps, .. } => Some(*eps),
            _ => None,
        }
    }

    /// Checks every parameter invariant, including the strict HYP_F3_C1
    /// inequality αγ < |β|² − cα²/k².
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if let CaseSpec::HypF3C1 {
            alpha,
            beta,
            gamma,
            k,
            c,
            ..
        } = *self
        {
            let lhs = alpha * gamma;
            let rhs = beta.norm_sqr() - c * alpha * alpha / (k * k);
            ensure(lhs < rhs, || {
                format!(
                    "constraint αγ < |β|² − cα²/k² violated: αγ = {lhs} ≥ |β|² − cα²/k² = {rhs}"
                )
            })?;
        }
        Ok(())
    }

    /// Invariants needed to build matrices and metrics: signs, nonzero
    /// scales, finite values. The HYP_F3_C1 solvability inequality is left
    /// to [`CaseSpec::validate`].
    pub fn validate_structure(&self) -> Result<()> {
        match *self {
            CaseSpec::EucF0 => Ok(()),
            CaseSpec::EucF2 { a, b, k } => {
                check_finite(&[("a", a), ("b", b), ("k", k)])?;
                ensure(k != 0.0, || "k must be nonzero".into())?;
                ensure(a != 0.0 || b != 0.0, || {
                    "(a, b) must not both vanish".into()
                })
            }
            CaseSpec::EucF3C1 { alpha, gamma, k } => {
                check_finite(&[
                    ("α.re", alpha.re),
                    ("α.im", alpha.im),
                    ("γ", gamma),
                    ("k", k),
                ])?;
                ensure(k != 0.0, || "k must be nonzero".into())?;
                ensure(alpha.norm() != 0.0 || gamma != 0.0, || {
                    "ω = αθ3 + conj(α)θ4 + γ vanishes identically".into()
                })
            }
            CaseSpec::EucF3C2 { alpha, beta, gamma } => {
                check_finite(&[
                    ("α", alpha),
                    ("β.re", beta.re),
                    ("β.im", beta.im),
                    ("γ", gamma),
                ])?;
                ensure(alpha != 0.0 || beta.norm() != 0.0 || gamma != 0.0, || {
                    "ω vanishes identically; α, β, γ must not all be zero".into()
                })
            }
            CaseSpec::CurF0 { c } | CaseSpec::CurF2 { c } => {
                check_finite(&[("c", c)])?;
                ensure(c != 0.0, || "curvature constant c must be nonzero".into())
            }
            CaseSpec::HypF3C1 {
                alpha,
                beta,
                gamma,
                k,
                c,
                eps,
            } => {
                check_finite(&[
                    ("α", alpha),
                    ("β.re", beta.re),
                    ("β.im", beta.im),
                    ("γ", gamma),
                    ("k", k),
                    ("c", c),
                ])?;
                check_eps(eps)?;
                ensure(c < 0.0, || {
                    format!("c must be negative for F3 in a curved superspace, got {c}")
                })?;
                ensure(k != 0.0, || "k must be nonzero".into())
            }
            CaseSpec::HypF3C2 { c, eps } => {
                check_finite(&[("c", c)])?;
                check_eps(eps)?;
                ensure(c < 0.0, || {
                    format!("c must be negative for F3 in a curved superspace, got {c}")
                })
            }
        }
    }

    /// Coefficients `(A, B, C, D)` of `ω = A θ3θ4 + B θ3 + C θ4 + D` in the
    /// original θ variables, for cases with an ω factor.
    fn omega_coeffs(&self) -> Option<[Complex64; 4]> {
        let r = |x: f64| Complex64::new(x, 0.0);
        match *self {
            CaseSpec::EucF2 { a, b, .. } => Some([r(0.0), r(a), r(0.0), r(b)]),
            CaseSpec::EucF3C1 { alpha, gamma, .. } => Some([r(0.0), alpha, alpha.conj(), r(gamma)]),
            CaseSpec::EucF3C2 { alpha, beta, gamma } => {
                Some([r(alpha * alpha), beta, beta.conj(), r(gamma * gamma)])
            }
            CaseSpec::HypF3C1 {
                alpha, beta, gamma, ..
            } => Some([r(alpha), beta, beta.conj(), r(gamma)]),
            _ => None,
        }
    }

    /// θ3 value about which θ-series are expanded (θ4 is its conjugate in
    /// F3 cases). Zero unless ω vanishes there, in which case the first
    /// point of a fixed candidate list with |ω| ≥ 0.1·scale is used. The
    /// structural equations are invariant under constant θ shifts.
    pub fn theta_base(&self) -> Result<Complex64> {
        let Some([a, b, c, d]) = self.omega_coeffs() else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let scale = 1.0 + [a, b, c, d].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let real_only = self.tag().theta_conj() == ThetaConj::Real;
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let candidates: Vec<Complex64> = if real_only {
            [0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5]
                .iter()
                .map(|&x| one * x)
                .collect()
        } else {
            vec![
                0.0 * one,
                one,
                i,
                -one,
                -i,
                one + i,
                one - i,
                2.0 * one,
                2.0 * i,
                0.5 * one,
                0.5 * i,
            ]
        };
        for z3 in candidates {
            let z4 = if real_only {
                Complex64::new(0.0, 0.0)
            } else {
                z3.conj()
            };
            let w = a * z3 * z4 + b * z3 + c * z4 + d;
            if w.norm() >= OMEGA_FLOOR * scale {
                return Ok(z3);
            }
        }
        Err(Error::InvalidParameter(
            "no θ expansion point keeps ω away from zero".into(),
        ))
    }

    /// ω as a θ-polynomial about [`CaseSpec::theta_base`].
    pub fn omega(&self) -> Result<Option<ThetaPoly>> {
        let Some([a, b, c, d]) = self.omega_coeffs() else {
            return Ok(None);
        };
        let z3 = self.theta_base()?;
        let z4 = if self.tag().theta_conj() == ThetaConj::Real {
            Complex64::new(0.0, 0.0)
        } else {
            z3.conj()
        };
        Ok(Some(ThetaPoly::from_terms([
            (1, 1, a),
            (1, 0, a * z4 + b),
            (0, 1, a * z3 + c),
            (0, 0, a * z3 * z4 + b * z3 + c * z4 + d),
        ])))
    }

    /// Fields a caller must provide; the rest are derived.
    pub fn required_inputs(&self) -> &'static [&'static str] {
        match self.tag() {
            CaseTag::EucF0 | CaseTag::CurF0 | CaseTag::CurF2 | CaseTag::EucF3C2 => {
                &[names::U, names::Q, names::H]
            }
            CaseTag::EucF2 | CaseTag::EucF3C1 => &[names::U, names::Q_SMALL, names::H_SMALL],
            CaseTag::HypF3C1 => &[names::U],
            CaseTag::HypF3C2 => &[names::PHI, names::PSI],
        }
    }

    /// σ² of the Liouville equation ∂1∂2u = −2σ²e^u for HYP_F3_C1.
    pub fn hyp_case1_sigma2(&self) -> Option<f64> {
        match *self {
            CaseSpec::HypF3C1 {
                alpha,
                beta,
                gamma,
                k,
                c,
                ..
            } => Some(-(alpha * gamma + c * alpha * alpha / (k * k) - beta.norm_sqr()) / (k * k)),
            _ => None,
        }
    }

    /// Gaussian-curvature constant `K` with ∂1∂2u = −K e^u when q = 0 and
    /// the mean-curvature input is the constant `h0`.
    pub fn liouville_constant(&self, h0: f64) -> f64 {
        match *self {
            CaseSpec::EucF0 | CaseSpec::EucF3C2 { .. } => 0.5 * h0 * h0,
            CaseSpec::EucF2 { a, k, .. } => 0.5 * (h0 * h0 + a * a / (k * k)),
            CaseSpec::EucF3C1 { alpha, k, .. } => {
                0.5 * (h0 * h0 + 4.0 * alpha.norm_sqr() / (k * k))
            }
            CaseSpec::CurF0 { c } | CaseSpec::CurF2 { c } => 0.5 * (h0 * h0 + 1.0 / c),
            CaseSpec::HypF3C1 { .. } => 2.0 * self.hyp_case1_sigma2().unwrap_or(0.0),
            CaseSpec::HypF3C2 { .. } => 0.0,
        }
    }
}

/// Named fields describing one immersion.
#[derive(Debug, Clone, Default)]
pub struct GeometryBundle {
    fields: BTreeMap<String, Field>,
}

impl GeometryBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, f: Field) -> Self {
        self.insert(name, f);
        self
    }

    pub fn insert(&mut self, name: &str, f: Field) {
        self.fields.insert(name.to_string(), f);
    }

    pub fn get(&self, name: &str) -> Result<&Field> {
        self.fields.get(name).ok_or_else(|| Error::MissingField {
            name: name.to_string(),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fields.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fields.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Field)> {
        self.fields.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn grid(&self) -> Result<&Arc<ConformalGrid>> {
        self.fields
            .values()
            .next()
            .map(|f| f.grid())
            .ok_or_else(|| Error::MissingField {
                name: "any field".into(),
            })
    }
}

fn conj_of(bundle: &GeometryBundle, name: &str, bar: &str, mode: ThetaConj) -> Result<Field> {
    match bundle.get(bar) {
        Ok(f) => Ok(f.clone()),
        Err(_) => Ok(bundle.get(name)?.conj(mode)),
    }
}

/// The mean curvature and G of HYP_F3_C1:
/// H = −ε√(−c)(1/c + 2α/(k²ω)), G = ε/√(−c).
pub fn hyp_case1_hg(spec: &CaseSpec, grid: &Arc<ConformalGrid>) -> Result<(Field, Field)> {
    let CaseSpec::HypF3C1 {
        alpha, k, c, eps, ..
    } = *spec
    else {
        return Err(Error::InvalidParameter(
            "HYP_F3_C1 parameters expected".into(),
        ));
    };
    spec.validate_structure()?;
    let omega = Field::from_theta(grid, &spec.omega()?.expect("ω present"));
    let root = (-c).sqrt();
    let h = (omega.recip()? * (2.0 * alpha / (k * k)) + 1.0 / c) * (-eps * root);
    let g = Field::constant(grid, eps / root);
    Ok((h, g))
}

/// The value printed for G in the HYP_F3_C1 solution, ε√(−c). It agrees
/// with [`hyp_case1_hg`] only at c = −1.
pub fn hyp_case1_g_printed(c: f64, eps: f64) -> f64 {
    eps * (-c).sqrt()
}

/// Q, Q̄, H and G of HYP_F3_C2 expressed through φ and ψ.
///
/// With D = −1/c − e^{−φ}∂1ψ∂2ψ (positive by the constraint
/// ∂1ψ∂2ψ < −e^φ/c), A = ∂1φ∂1ψ − ∂1²ψ − (∂1ψ)²/2 and
/// B = ∂1∂2ψ + ∂1ψ∂2ψ/2:
/// Q = εA/(2√D), H = −ε(1/c + e^{−φ}B)/√D, G = ε√D.
pub fn hyp_case2_derived(phi: &Field, psi: &Field, c: f64, eps: f64) -> Result<GeometryBundle> {
    use crate::field::XDir::{X1, X2};
    CaseSpec::HypF3C2 { c, eps }.validate()?;
    let grid = phi.grid();
    let p1 = psi.d_x(X1);
    let p2 = psi.d_x(X2);
    let prod = &p1 * &p2;
    let e_phi = phi.exp();
    // constraint ∂1ψ∂2ψ < −e^φ/c, checked on the θ body
    let bound = e_phi.scale(-1.0 / c);
    let mut worst: Option<(usize, f64)> = None;
    for k in grid.active_nodes() {
        let margin = bound.body()[k].re - prod.body()[k].re;
        if (margin.is_nan() || margin <= 0.0) && worst.map_or(true, |(_, m)| margin < m) {
            worst = Some((k, margin));
        }
    }
    if let Some((k, margin)) = worst {
        let x = grid.x1(k);
        return Err(Error::Constraint {
            constraint: "∂1ψ∂2ψ < −e^φ/c".into(),
            s: x.re,
            t: x.im,
            margin,
        });
    }
    let e_mphi = (-phi).exp();
    let d = (&e_mphi * &prod) * -1.0 - 1.0 / c;
    let sqrt_d = d.sqrt()?;
    let inv_sqrt_d = sqrt_d.recip()?;
    let a1 = &phi.d_x(X1) * &p1 - p1.d_x(X1) - (&p1 * &p1) * 0.5;
    let a2 = &phi.d_x(X2) * &p2 - p2.d_x(X2) - (&p2 * &p2) * 0.5;
    let b = p1.d_x(X2) + &prod * 0.5;
    let q = (&a1 * &inv_sqrt_d) * (0.5 * eps);
    let qbar = (&a2 * &inv_sqrt_d) * (0.5 * eps);
    let h = ((&e_mphi * &b) + 1.0 / c) * &inv_sqrt_d * (-eps);
    let g = sqrt_d * eps;
    Ok(GeometryBundle::new()
        .with(names::PHI, phi.clone())
        .with(names::PSI, psi.clone())
        .with(names::Q, q)
        .with(names::QBAR, qbar)
        .with(names::H, h)
        .with(names::G, g))
}

/// Completes a bundle with every quantity the case's frames, equations and
/// appendix suites use (ω, conjugates, composite Q/H, φ/ψ).
pub fn complete_bundle(spec: &CaseSpec, input: &GeometryBundle) -> Result<GeometryBundle> {
    spec.validate_structure()?;
    for name in spec.required_inputs() {
        input.get(name)?;
    }
    let grid = Arc::clone(input.grid()?);
    let mode = spec.tag().theta_conj();
    let mut out = input.clone();
    let omega = spec.omega()?.map(|p| Field::from_theta(&grid, &p));
    if let Some(w) = &omega {
        out.insert(names::OMEGA, w.clone());
    }
    match spec {
        CaseSpec::EucF0 | CaseSpec::CurF0 { .. } | CaseSpec::CurF2 { .. } => {
            out.insert(names::QBAR, conj_of(input, names::Q, names::QBAR, mode)?);
        }
        CaseSpec::EucF3C2 { .. } => {
            out.insert(names::QBAR, conj_of(input, names::Q, names::QBAR, mode)?);
            let w = omega.as_ref().expect("ω present");
            out.insert(names::PHI, input.get(names::U)?.clone());
            out.insert(names::PSI, w.ln()?);
        }
        CaseSpec::EucF2 { k, .. } | CaseSpec::EucF3C1 { k, .. } => {
            let w = omega.as_ref().expect("ω present");
            let qbar = conj_of(input, names::Q_SMALL, names::QBAR_SMALL, mode)?;
            out.insert(names::QBAR_SMALL, qbar.clone());
            let u = input.get(names::U)?;
            out.insert(names::Q, input.get(names::Q_SMALL)? * w);
            out.insert(names::QBAR, &qbar * w);
            out.insert(names::H, input.get(names::H_SMALL)? * &w.recip()?);
            out.insert(names::PHI, u + &(w.ln()? * 2.0));
            out.insert(names::PSI, Field::constant(&grid, (k * k).ln()));
        }
        CaseSpec::HypF3C1 { k, .. } => {
            let w = omega.as_ref().expect("ω present");
            let (h, g) = hyp_case1_hg(spec, &grid)?;
            if !input.contains(names::H) {
                out.insert(names::H, h);
            }
            if !input.contains(names::G) {
                out.insert(names::G, g);
            }
            let u = input.get(names::U)?;
            out.insert(names::PHI, u + &(w.ln()? * 2.0));
            out.insert(names::PSI, Field::constant(&grid, (k * k).ln()));
            out.insert(names::Q, Field::zeros(&grid));
            out.insert(names::QBAR, Field::zeros(&grid));
        }
        CaseSpec::HypF3C2 { c, eps } => {
            let derived =
                hyp_case2_derived(input.get(names::PHI)?, input.get(names::PSI)?, *c, *eps)?;
            for (name, f) in derived.iter() {
                if !input.contains(name) {
                    out.insert(name, f.clone());
                }
            }
            if input.contains(names::Q) && !input.contains(names::QBAR) {
                out.insert(names::QBAR, input.get(names::Q)?.conj(mode));
            }
            out.insert(names::U, input.get(names::PHI)?.clone());
        }
    }
    Ok(out)
}

/// Fields that must be real, and conjugate pairs that must match.
pub fn reality_checks(spec: &CaseSpec) -> (Vec<&'static str>, Vec<(&'static str, &'static str)>) {
    match spec.tag() {
        CaseTag::EucF0 | CaseTag::CurF0 | CaseTag::CurF2 | CaseTag::EucF3C2 => {
            (vec![names::U, names::H], vec![(names::Q, names::QBAR)])
        }
        CaseTag::EucF2 | CaseTag::EucF3C1 => (
            vec![names::U, names::H_SMALL, names::OMEGA],
            vec![(names::Q_SMALL, names::QBAR_SMALL)],
        ),
        CaseTag::HypF3C1 => (vec![names::U, names::H, names::G, names::OMEGA], vec![]),
        CaseTag::HypF3C2 => (
            vec![names::PHI, names::PSI, names::H, names::G],
            vec![(names::Q, names::QBAR)],
        ),
    }
}

/// Metric `g_ij` on the tangent directions (2×2, 3×3 or 4×4).
pub fn metric(spec: &CaseSpec, bundle: &GeometryBundle) -> Result<FieldMatrix> {
    let full = complete_bundle(spec, bundle)?;
    let grid = Arc::clone(full.grid()?);
    let tag = spec.tag();
    let n = tag.n_vars();
    let mut g = FieldMatrix::zeros(n, &grid);
    let conformal = |phi_exp: Field| phi_exp * 0.5;
    let g12 = match tag {
        CaseTag::EucF0 | CaseTag::CurF0 | CaseTag::CurF2 | CaseTag::EucF3C2 => {
            conformal(full.get(names::U)?.exp())
        }
        CaseTag::EucF2 | CaseTag::EucF3C1 | CaseTag::HypF3C1 => {
            let w = full.get(names::OMEGA)?;
            conformal(full.get(names::U)?.exp() * &(w * w))
        }
        CaseTag::HypF3C2 => conformal(full.get(names::PHI)?.exp()),
    };
    g.set(0, 1, g12.clone());
    g.set(1, 0, g12);
    match *spec {
        CaseSpec::EucF2 { k, .. } => g.set(2, 2, Field::constant(&grid, k * k)),
        CaseSpec::EucF3C1 { k, .. } | CaseSpec::HypF3C1 { k, .. } => {
            let g34 = Field::constant(&grid, 0.5 * k * k);
            g.set(2, 3, g34.clone());
            g.set(3, 2, g34);
        }
        CaseSpec::EucF3C2 { .. } => {
            let g34 = full.get(names::OMEGA)? * 0.5;
            g.set(2, 3, g34.clone());
            g.set(3, 2, g34);
        }
        CaseSpec::HypF3C2 { .. } => {
            let g34 = full.get(names::PSI)?.exp() * 0.5;
            g.set(2, 3, g34.clone());
            g.set(3, 2, g34);
        }
        _ => {}
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<ConformalGrid> {
        Arc::new(ConformalGrid::unit_square(n).unwrap())
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn tags_round_trip() {
        for t in CaseTag::ALL {
            assert_eq!(t.name().parse::<CaseTag>().unwrap(), t);
            assert_eq!(CaseSpec::default_for(t).tag(), t);
            CaseSpec::default_for(t).validate().unwrap();
        }
        assert_eq!("EUC_F3_C1".parse::<CaseTag>().unwrap(), CaseTag::EucF3C1);
        assert_eq!(CaseTag::HypF3C2.ident(), "HYP_F3_C2");
        assert!("euc-f9".parse::<CaseTag>().is_err());
    }

    #[test]
    fn flat_f0_metric_at_u_zero() {
        let g = grid(9);
        let b = GeometryBundle::new()
            .with(names::U, Field::zeros(&g))
            .with(names::Q, Field::zeros(&g))
            .with(names::H, Field::zeros(&g));
        let m = metric(&CaseSpec::EucF0, &b).unwrap();
        assert!(m.get(0, 0).is_none());
        assert!((m.entry(0, 1).body()[0] - c(0.5)).norm() < 1e-15);
        assert!((m.entry(1, 0).body()[40] - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn flat_f2_metric_block() {
        let g = grid(9);
        let b = GeometryBundle::new()
            .with(names::U, Field::zeros(&g))
            .with(names::Q_SMALL, Field::zeros(&g))
            .with(names::H_SMALL, Field::zeros(&g));
        let m = metric(
            &CaseSpec::EucF2 {
                a: 0.0,
                b: 1.0,
                k: 2.0,
            },
            &b,
        )
        .unwrap();
        assert!((m.entry(0, 1).body()[3] - c(0.5)).norm() < 1e-15);
        assert!((m.entry(2, 2).body()[3] - c(4.0)).norm() < 1e-15);
        assert!(m.get(0, 2).is_none() && m.get(1, 2).is_none());
    }

    #[test]
    fn hyp_case1_metric_theta_free_slice() {
        let g = grid(9);
        let spec = CaseSpec::HypF3C1 {
            alpha: 0.3,
            beta: Complex64::new(1.0, 0.5),
            gamma: 1.0,
            k: 1.5,
            c: -1.0,
            eps: 1.0,
        };
        let u = Field::from_fn(&g, |x| c(0.1) * x.re);
        let b = GeometryBundle::new().with(names::U, u.clone());
        let m = metric(&spec, &b).unwrap();
        for k in [0usize, 17, 80] {
            let expect = 0.5 * u.body()[k].exp();
            assert!((m.entry(0, 1).coeff(0, 0, k) - expect).norm() < 1e-14);
            assert!((m.entry(2, 3).coeff(0, 0, k) - c(0.5 * 1.5 * 1.5)).norm() < 1e-14);
        }
    }

    #[test]
    fn hyp_case1_constraint_boundary() {
        let spec = CaseSpec::HypF3C1 {
            alpha: 1.0,
            beta: Complex64::new(0.0, 0.0),
            gamma: 1.0,
            k: 1.0,
            c: -1.0,
            eps: 1.0,
        };
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("αγ < |β|² − cα²/k²"), "{err}");
        let bad_c = CaseSpec::HypF3C2 { c: 0.5, eps: 1.0 };
        assert!(bad_c.validate().is_err());
        let bad_eps = CaseSpec::HypF3C2 { c: -0.5, eps: 0.5 };
        assert!(bad_eps.validate().is_err());
    }

    #[test]
    fn hyp_case1_h_and_g_at_alpha_zero() {
        let g = grid(9);
        for eps in [1.0, -1.0] {
            let spec = CaseSpec::HypF3C1 {
                alpha: 0.0,
                beta: c(1.0),
                gamma: 0.0,
                k: 1.0,
                c: -1.0,
                eps,
            };
            assert_eq!(spec.hyp_case1_sigma2(), Some(1.0));
            let (h, gg) = hyp_case1_hg(&spec, &g).unwrap();
            assert!(h.is_theta_free() || h.trimmed().is_theta_free());
            assert!((h.body()[5] - c(eps)).norm() < 1e-15);
            assert!((gg.body()[5] - c(eps)).norm() < 1e-15);
        }
    }

    #[test]
    fn theta_base_moves_off_zeros_of_omega() {
        let spec = CaseSpec::HypF3C1 {
            alpha: 0.0,
            beta: c(1.0),
            gamma: 0.0,
            k: 1.0,
            c: -1.0,
            eps: 1.0,
        };
        let z = spec.theta_base().unwrap();
        assert_ne!(z, c(0.0));
        let w = spec.omega().unwrap().unwrap();
        assert!(w.body().norm() >= 0.1);
        assert_eq!(w.coeff(1, 0), c(1.0));
        assert_eq!(w.coeff(0, 1), c(1.0));
        let f2 = CaseSpec::EucF2 {
            a: 1.0,
            b: 0.0,
            k: 1.0,
        };
        assert_eq!(f2.theta_base().unwrap(), c(1.0));
        assert_eq!(
            CaseSpec::EucF2 {
                a: 1.0,
                b: 2.0,
                k: 1.0
            }
            .theta_base()
            .unwrap(),
            c(0.0)
        );
    }

    #[test]
    fn hyp_case2_constant_psi() {
        let g = grid(21);
        for eps in [1.0, -1.0] {
            let phi = Field::from_fn(&g, |x| c(0.2) * x.re + c(0.1));
            let psi = Field::constant(&g, 0.3);
            let b = hyp_case2_derived(&phi, &psi, -1.0, eps).unwrap();
            assert!(b.get(names::Q).unwrap().max_abs() < 1e-15);
            let gg = b.get(names::G).unwrap();
            let h = b.get(names::H).unwrap();
            for k in [0usize, 100, 440] {
                assert!((gg.body()[k] - c(eps)).norm() < 1e-14);
                assert!((h.body()[k] - c(eps)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hyp_case2_constraint_names_node() {
        let g = grid(21);
        let phi = Field::zeros(&g);
        // ∂1ψ∂2ψ = |∇ψ|²/4 = 1 at slope 2, equal to −e^φ/c for c = −1
        let psi = Field::from_fn(&g, |x| c(2.0) * x.re);
        let err = hyp_case2_derived(&phi, &psi, -1.0, 1.0).unwrap_err();
        match err {
            Error::Constraint {
                constraint, margin, ..
            } => {
                assert!(constraint.contains("∂1ψ∂2ψ < −e^φ/c"));
                assert!(margin.abs() < 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
