//! Full structural-equation lists for the two F3 settings, flat and
//! hyperbolic, written in terms of the metric functions φ, ψ
//! (g12 = e^φ/2, g34 = e^ψ/2) and the curvature data Q, Q̄, H, G.

use crate::field::{Field, XDir};
use crate::report::{ResidualReport, Tolerance};
use crate::theta::ThetaVar::{Theta3, Theta4};

fn d1(f: &Field) -> Field {
    f.d_x(XDir::X1)
}

fn d2(f: &Field) -> Field {
    f.d_x(XDir::X2)
}

fn d3(f: &Field) -> Field {
    f.d_theta(Theta3)
}

fn d4(f: &Field) -> Field {
    f.d_theta(Theta4)
}

/// Inputs shared by both suites.
#[derive(Debug, Clone)]
pub struct AppendixFields<'a> {
    pub phi: &'a Field,
    pub psi: &'a Field,
    pub q: &'a Field,
    pub qbar: &'a Field,
    pub h: &'a Field,
}

struct Pieces {
    d1phi: Field,
    d2phi: Field,
    d3phi: Field,
    d4phi: Field,
    d1psi: Field,
    d2psi: Field,
    d3psi: Field,
    d4psi: Field,
    e_phi: Field,
    e_mphi: Field,
    e_phi_mpsi: Field,
    qq: Field,
}

impl Pieces {
    fn new(f: &AppendixFields<'_>) -> Self {
        Pieces {
            d1phi: d1(f.phi),
            d2phi: d2(f.phi),
            d3phi: d3(f.phi),
            d4phi: d4(f.phi),
            d1psi: d1(f.psi),
            d2psi: d2(f.psi),
            d3psi: d3(f.psi),
            d4psi: d4(f.psi),
            e_phi: f.phi.exp(),
            e_mphi: (-f.phi).exp(),
            e_phi_mpsi: (f.phi - f.psi).exp(),
            qq: f.q * f.qbar,
        }
    }
}

fn push_common(r: &mut ResidualReport, f: &AppendixFields<'_>, p: &Pieces, g: Option<&Field>) {
    // Codazzi pair
    r.push_field(
        "d2Q-1/2e^phid1H",
        None,
        &(d2(f.q) - &p.e_phi * &d1(f.h) * 0.5),
    );
    r.push_field(
        "d1Qbar-1/2e^phid2H",
        None,
        &(d1(f.qbar) - &p.e_phi * &d2(f.h) * 0.5),
    );
    // mixed derivatives of φ
    let d1_d3 = d1(&p.d3phi);
    let d1_d4 = d1(&p.d4phi);
    let d2_d3 = d2(&p.d3phi);
    let d2_d4 = d2(&p.d4phi);
    r.push_field("d1d3phi", None, &d1_d3);
    r.push_field("d1d4phi", None, &d1_d4);
    r.push_field("d2d3phi", None, &d2_d3);
    r.push_field("d2d4phi", None, &d2_d4);
    // θ-Riccati relations for φ
    r.push_field(
        "2d3^2phi+(d3phi)^2",
        None,
        &(d3(&p.d3phi) * 2.0 + &p.d3phi * &p.d3phi),
    );
    r.push_field(
        "2d4^2phi+(d4phi)^2",
        None,
        &(d4(&p.d4phi) * 2.0 + &p.d4phi * &p.d4phi),
    );
    // transport of Q, Q̄ and H along θ
    r.push_field("d3Q-1/2Qd3phi", None, &(d3(f.q) - f.q * &p.d3phi * 0.5));
    r.push_field("d4Q-1/2Qd4phi", None, &(d4(f.q) - f.q * &p.d4phi * 0.5));
    r.push_field(
        "d3Qbar-1/2Qbard3phi",
        None,
        &(d3(f.qbar) - f.qbar * &p.d3phi * 0.5),
    );
    r.push_field(
        "d4Qbar-1/2Qbard4phi",
        None,
        &(d4(f.qbar) - f.qbar * &p.d4phi * 0.5),
    );
    match g {
        None => {
            r.push_field("d3H+1/2Hd3phi", None, &(d3(f.h) + f.h * &p.d3phi * 0.5));
            r.push_field("d4H+1/2Hd4phi", None, &(d4(f.h) + f.h * &p.d4phi * 0.5));
        }
        Some(g) => {
            let hg = f.h - g;
            r.push_field("d3H+1/2(H-G)d3phi", None, &(d3(f.h) + &hg * &p.d3phi * 0.5));
            r.push_field("d4H+1/2(H-G)d4phi", None, &(d4(f.h) + &hg * &p.d4phi * 0.5));
        }
    }
    // nilpotency of e^φ
    let e3 = d3(&d3(&d3(&p.e_phi)));
    let e4 = d4(&d4(&d4(&p.e_phi)));
    r.push_field("d3^3e^phi", None, &e3);
    r.push_field("d4^3e^phi", None, &e4);
}

/// Residuals of every structural equation of an F3 manifold in Euclidean
/// superspace.
pub fn appendix_a_residuals(f: &AppendixFields<'_>, tol: Tolerance) -> ResidualReport {
    let grid = f.phi.grid();
    let mut r = ResidualReport::new("appendix-a", grid, tol);
    let p = Pieces::new(f);
    let gauss = d2(&p.d1phi) + &p.e_phi * &(f.h * f.h) * 0.5 - &p.e_mphi * &p.qq * 2.0
        + &p.e_phi_mpsi * &(&p.d3phi * &p.d4phi) * 0.5;
    r.push_field(
        "d1d2phi+1/2e^phiH^2-2e^-phi|Q|^2+1/2e^(phi-psi)d3phid4phi",
        None,
        &gauss,
    );
    push_common(&mut r, f, &p, None);
    r.push_field("d1psid2psi", None, &(&p.d1psi * &p.d2psi));
    r.push_field("d3phid3psi", None, &(&p.d3phi * &p.d3psi));
    r.push_field("d3phid4psi", None, &(&p.d3phi * &p.d4psi));
    r.push_field("d4phid3psi", None, &(&p.d4phi * &p.d3psi));
    r.push_field("d4phid4psi", None, &(&p.d4phi * &p.d4psi));
    r.push_field(
        "2d3d4phi+d3phid4phi",
        None,
        &(d4(&p.d3phi) * 2.0 + &p.d3phi * &p.d4phi),
    );
    let e_psi = f.psi.exp();
    r.push_field("d3^2e^psi", None, &d3(&d3(&e_psi)));
    r.push_field("d4^2e^psi", None, &d4(&d4(&e_psi)));
    r
}

/// Residuals of every structural equation of an F3 manifold in a
/// hyperbolic superspace of curvature constant `c`.
pub fn appendix_b_residuals(
    f: &AppendixFields<'_>,
    g: &Field,
    c: f64,
    tol: Tolerance,
) -> ResidualReport {
    let grid = f.phi.grid();
    let mut r = ResidualReport::new("appendix-b", grid, tol);
    let p = Pieces::new(f);
    let gauss = d2(&p.d1phi) + &p.e_phi * &((f.h * f.h) + 1.0 / c) * 0.5 - &p.e_mphi * &p.qq * 2.0
        + &p.e_phi_mpsi * &(&p.d3phi * &p.d4phi) * 0.5;
    r.push_field(
        "d1d2phi+1/2e^phi(H^2+1/c)-2e^-phi|Q|^2+1/2e^(phi-psi)d3phid4phi",
        None,
        &gauss,
    );
    push_common(&mut r, f, &p, Some(g));
    let gh = g - f.h;
    r.push_field(
        "d1G+1/2(G-H)d1psi-e^-phiQd2psi",
        None,
        &(d1(g) + &gh * &p.d1psi * 0.5 - &p.e_mphi * f.q * &p.d2psi),
    );
    r.push_field(
        "d2G+1/2(G-H)d2psi-e^-phiQbard1psi",
        None,
        &(d2(g) + &gh * &p.d2psi * 0.5 - &p.e_mphi * f.qbar * &p.d1psi),
    );
    let prod = &p.d1psi * &p.d2psi;
    r.push_field(
        "1/c+G^2+e^-phid1psid2psi",
        None,
        &((g * g) + &p.e_mphi * &prod + 1.0 / c),
    );
    r.push_field("d3psi", None, &p.d3psi);
    r.push_field("d4psi", None, &p.d4psi);
    r.push_field("d3G", None, &d3(g));
    r.push_field("d4G", None, &d4(g));
    let e_mpsi = (-f.psi).exp();
    let theta_part = d4(&p.d3phi) + &p.d3phi * &p.d4phi * 0.5;
    let x_part = d2(&p.d1psi) + &prod * 0.5;
    r.push_field(
        "1/c+GH+e^-psi(d3d4phi+1/2d3phid4phi)+e^-phi(d1d2psi+1/2d1psid2psi)",
        None,
        &((g * f.h) + &e_mpsi * &theta_part + &p.e_mphi * &x_part + 1.0 / c),
    );
    r.push_field("d1psid3phi", None, &(&p.d1psi * &p.d3phi));
    r.push_field("d1psid4phi", None, &(&p.d1psi * &p.d4phi));
    r.push_field("d2psid3phi", None, &(&p.d2psi * &p.d3phi));
    r.push_field("d2psid4phi", None, &(&p.d2psi * &p.d4phi));
    r.push_field(
        "2d1^2psi+(d1psi)^2-2d1phid1psi+4GQ",
        None,
        &(d1(&p.d1psi) * 2.0 + &p.d1psi * &p.d1psi - &p.d1phi * &p.d1psi * 2.0 + g * f.q * 4.0),
    );
    r.push_field(
        "2d2^2psi+(d2psi)^2-2d2phid2psi+4GQbar",
        None,
        &(d2(&p.d2psi) * 2.0 + &p.d2psi * &p.d2psi - &p.d2phi * &p.d2psi * 2.0 + g * f.qbar * 4.0),
    );
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ConformalGrid;
    use crate::theta::ThetaPoly;
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn theta_riccati_violation_has_analytic_size() {
        let g = Arc::new(ConformalGrid::unit_square(21).unwrap());
        let kappa = 0.3;
        let phi = Field::from_theta(&g, &ThetaPoly::monomial(2, 0, Complex64::new(kappa, 0.0)));
        let zero = Field::zeros(&g);
        let psi = Field::zeros(&g);
        let f = AppendixFields {
            phi: &phi,
            psi: &psi,
            q: &zero,
            qbar: &zero,
            h: &zero,
        };
        let r = appendix_a_residuals(&f, Tolerance::for_grid(&g));
        let e = r
            .entries_labelled("2d3^2phi+(d3phi)^2")
            .find(|e| e.sector == [0, 0])
            .unwrap();
        assert!((e.max - 4.0 * kappa).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn zero_g_breaks_algebraic_identity() {
        let g = Arc::new(ConformalGrid::unit_square(21).unwrap());
        let zero = Field::zeros(&g);
        let f = AppendixFields {
            phi: &zero,
            psi: &zero,
            q: &zero,
            qbar: &zero,
            h: &zero,
        };
        let c = -0.5;
        let r = appendix_b_residuals(&f, &zero, c, Tolerance::for_grid(&g));
        assert!((r.max_of("1/c+G^2+e^-phid1psid2psi") - 2.0).abs() < 1e-14);
    }
}
