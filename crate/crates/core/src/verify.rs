//! End-to-end verification of one case: scalar Gauss–Codazzi equations,
//! the zero-curvature residual of the assembled frame system, the full
//! structural-equation lists for F3 settings and reality of the inputs.

use crate::cases::{
    appendix_a_residuals, appendix_b_residuals, complete_bundle, names, reality_checks,
    AppendixFields, CaseSpec, CaseTag, GeometryBundle,
};
use crate::error::Result;
use crate::field::Stencil;
use crate::frames::{assemble, gauss_codazzi_residual, zero_curvature_residual};
use crate::report::{ResidualEntry, ResidualReport, Tolerance};

/// Relative bound on reality defects (imaginary parts, conjugate mismatch).
pub const REALITY_RTOL: f64 = 1e-9;

/// Runs every check applicable to `spec` on `bundle`.
pub fn verify_case(
    spec: &CaseSpec,
    bundle: &GeometryBundle,
    tol: Option<Tolerance>,
) -> Result<ResidualReport> {
    if let CaseSpec::CurF2 { c } = *spec {
        let mut r = verify_case(&CaseSpec::CurF0 { c }, bundle, tol)?;
        r.case = CaseTag::CurF2.name().to_string();
        r.set_extra("reduces_to", CaseTag::CurF0.name());
        return Ok(r);
    }
    spec.validate()?;
    let full = complete_bundle(spec, bundle)?;
    let grid = full.grid()?.clone();
    let tol = tol.unwrap_or_else(|| Tolerance::for_grid(&grid));
    let mut report = ResidualReport::new(spec.tag().name(), &grid, tol);
    report.set_extra("parameters", spec);
    report.set_extra("theta_base", spec.theta_base()?);

    report.absorb("gc:", gauss_codazzi_residual(spec, &full, tol)?);
    let fs = assemble(spec, &full, Stencil::Second)?;
    report.absorb("zc:", zero_curvature_residual(&fs, tol)?);

    match *spec {
        CaseSpec::EucF3C1 { .. } | CaseSpec::EucF3C2 { .. } => {
            let f = appendix_fields(&full)?;
            report.absorb("appendix-a:", appendix_a_residuals(&f, tol));
        }
        CaseSpec::HypF3C1 { c, .. } | CaseSpec::HypF3C2 { c, .. } => {
            let f = appendix_fields(&full)?;
            report.absorb(
                "appendix-b:",
                appendix_b_residuals(&f, full.get(names::G)?, c, tol),
            );
        }
        _ => {}
    }

    let mode = spec.tag().theta_conj();
    let (real, pairs) = reality_checks(spec);
    for name in real {
        let f = full.get(name)?;
        push_reality(
            &mut report,
            &format!("reality:{name}"),
            f.reality_defect(mode),
            f.max_abs(),
        );
    }
    for (a, b) in pairs {
        let fa = full.get(a)?;
        let fb = full.get(b)?;
        let defect = (&fa.conj(mode) - fb).max_abs();
        push_reality(
            &mut report,
            &format!("reality:{b}=conj({a})"),
            defect,
            fa.max_abs(),
        );
    }
    Ok(report)
}

fn push_reality(report: &mut ResidualReport, label: &str, defect: f64, scale: f64) {
    report.push(ResidualEntry {
        label: label.to_string(),
        i: None,
        j: None,
        sector: [0, 0],
        max: defect,
        l2: defect,
        tol: Some(REALITY_RTOL * scale.max(1.0)),
    });
}

fn appendix_fields(b: &GeometryBundle) -> Result<AppendixFields<'_>> {
    Ok(AppendixFields {
        phi: b.get(names::PHI)?,
        psi: b.get(names::PSI)?,
        q: b.get(names::Q)?,
        qbar: b.get(names::QBAR)?,
        h: b.get(names::H)?,
    })
}
