//! Reference table of the implemented cases.
//!
//! | tag | frame Ω | dim | metric | inputs | equations checked |
//! |---|---|---|---|---|---|
//! | `euc-f0` | (∂1F, ∂2F, N) | 3 | g12 = e^u/2 | u, Q, H | Gauss, two Codazzi |
//! | `euc-f2` | (∂1F, ∂2F, ∂3F, N) | 4 | g12 = e^u ω²/2, g33 = k², ω = aθ3 + b | u, q, h | Gauss with H² → h² + a²/k² |
//! | `euc-f3-c1` | (∂1F, ∂2F, ∂3F, ∂4F, N) | 5 | g12 = e^u ω²/2, g34 = k²/2, ω = αθ3 + ᾱθ4 + γ | u, q, h | Gauss with H² → h² + 4\|α\|²/k² |
//! | `euc-f3-c2` | (∂1F, ∂2F, ∂3F, ∂4F, N) | 5 | g12 = e^u/2, g34 = ω/2, ω = α²θ3θ4 + βθ3 + β̄θ4 + γ² | u, Q, H | flat F0 equations |
//! | `cur-f0` | (∂1F, ∂2F, N, F) | 4 | g12 = e^u/2, ⟨F,F⟩ = c | u, Q, H | Gauss gains e^u/(2c) |
//! | `cur-f2` | as `cur-f0` | 4 | as `cur-f0` | u, Q, H | delegates to `cur-f0` |
//! | `hyp-f3-c1` | (∂1F, ∂2F, ∂3F, ∂4F, N, F) | 6 | g12 = e^u ω²/2, g34 = k²/2, ω = αθ3θ4 + βθ3 + β̄θ4 + γ | u | ∂1∂2u = −2σ²e^u, closed H and G |
//! | `hyp-f3-c2` | (∂1F, ∂2F, ∂3F, ∂4F, N, F) | 6 | g12 = e^φ/2, g34 = e^ψ/2 | φ, ψ | one remaining equation for φ, ψ |
//!
//! Both F3 settings are also checked against their full structural
//! equation lists ([`super::appendix`]).
//!
//! Notes on the formulas as implemented:
//!
//! - Liouville normalization: u = ln(C\|∂1f\|²/(σ²(1+\|f\|²)²)) gives
//!   ∂1∂2u = −(2σ²/C)e^u, so ∂1∂2u = −2σ²e^u requires C = 1
//!   ([`super::liouville::RESOLVED_LIOUVILLE_C`]). The printed value C = 2
//!   ([`super::liouville::PRINTED_LIOUVILLE_C`]) solves ∂1∂2u = −σ²e^u.
//! - `euc-f3-c1`: the second-fundamental-form connection entries of U1, U2
//!   in the θ columns carry the factor e^u, i.e. −ᾱe^uω/k² and −αe^uω/k².
//!   Without it the compatibility residual is proportional to ∂1u. The
//!   entry written as conj(α/ω) is read as ᾱ/ω.
//! - `hyp-f3-c1`: G = ε/√(−c). The printed ε√(−c) agrees only at c = −1;
//!   elsewhere it violates 1/c + G² + e^{−φ}∂1ψ∂2ψ = 0. The θ-block
//!   entries of U3, U4 are k²G/2 and −k²/(2c).
//! - `hyp-f3-c2`: Q = εA/(2√D) with A = ∂1φ∂1ψ − ∂1²ψ − (∂1ψ)²/2 and
//!   D = −1/c − e^{−φ}∂1ψ∂2ψ, matching 2∂1²ψ + (∂1ψ)² − 2∂1φ∂1ψ + 4GQ = 0.
//!   The remaining equation ∂1∂2φ = 2e^{−φ}\|Q\|² − e^φ(H² + 1/c)/2 is
//!   equivalent to ∂1∂2φ = [∂1∂2ψ + (ce^{−φ}/2)(B² − AĀ)]/(1 + ce^{−φ}∂1ψ∂2ψ),
//!   B = ∂1∂2ψ + ∂1ψ∂2ψ/2. For constant ψ this is ∂1∂2φ = 0. The printed
//!   reduced form is evaluated for reference only.
//! - The Gauss equation of the hyperbolic F3 list carries e^φ in front of
//!   (H² + 1/c)/2.
//! - `euc-f3-c2`: ω is the bilinear θ-polynomial α²θ3θ4 + βθ3 + β̄θ4 + γ²,
//!   real under θ4 = conj θ3.
//! - θ-series are expanded about θ3 = z, θ4 = z̄ (θ3 = z real for F2) where z
//!   is the first of a fixed list of points with \|ω(z)\| ≥ 0.1·scale; z = 0
//!   unless ω vanishes there. All equations are invariant under constant θ
//!   translations.
