//! Grassmann algebra laws against an independent product built from
//! generator words.

use num_complex::Complex64;
use proptest::prelude::*;
use supergauss_core::grassmann::{Blade, GrassmannValue, BASIS_LEN, GENERATORS};

/// Product of basis monomials by concatenating generator words and
/// bubble-sorting them, counting transpositions.
fn word_product(a: usize, b: usize) -> Option<(f64, usize)> {
    let word = |m: usize| (0..GENERATORS).filter(move |g| m >> g & 1 == 1);
    let mut w: Vec<usize> = word(a).chain(word(b)).collect();
    let mut swaps = 0;
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] == w[j + 1] {
                return None;
            }
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                swaps += 1;
            }
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    let m = w.iter().fold(0, |acc, g| acc | 1 << g);
    Some((if swaps % 2 == 0 { 1.0 } else { -1.0 }, m))
}

fn oracle_mul(a: &GrassmannValue, b: &GrassmannValue) -> GrassmannValue {
    let mut out = [Complex64::new(0.0, 0.0); BASIS_LEN];
    for i in 0..BASIS_LEN {
        for j in 0..BASIS_LEN {
            if let Some((s, m)) = word_product(i, j) {
                out[m] += a.coeffs()[i] * b.coeffs()[j] * s;
            }
        }
    }
    GrassmannValue::from_coeffs(out)
}

fn int_value(grades: &'static [u32]) -> impl Strategy<Value = GrassmannValue> {
    prop::collection::vec((-9i32..=9, -9i32..=9), BASIS_LEN).prop_map(move |c| {
        let mut coeffs = [Complex64::new(0.0, 0.0); BASIS_LEN];
        for (k, (re, im)) in c.into_iter().enumerate() {
            if grades.contains(&Blade(k as u8).grade()) {
                coeffs[k] = Complex64::new(re as f64, im as f64);
            }
        }
        GrassmannValue::from_coeffs(coeffs)
    })
}

const ALL: &[u32] = &[0, 1, 2, 3];
const ODD: &[u32] = &[1, 3];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn product_matches_word_oracle(a in int_value(ALL), b in int_value(ALL)) {
        prop_assert_eq!(a * b, oracle_mul(&a, &b));
    }

    #[test]
    fn associativity_is_exact(a in int_value(ALL), b in int_value(ALL), c in int_value(ALL)) {
        prop_assert_eq!((a * b) * c, a * (b * c));
    }

    #[test]
    fn graded_commutation(p in 0u32..=3, q in 0u32..=3, a in int_value(ALL), b in int_value(ALL)) {
        let keep = |v: GrassmannValue, g: u32| {
            let mut c = *v.coeffs();
            for (k, x) in c.iter_mut().enumerate() {
                if Blade(k as u8).grade() != g {
                    *x = Complex64::new(0.0, 0.0);
                }
            }
            GrassmannValue::from_coeffs(c)
        };
        let (a, b) = (keep(a, p), keep(b, q));
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(a * b, (b * a) * Complex64::new(sign, 0.0));
    }

    #[test]
    fn odd_elements_square_to_zero(a in int_value(ODD)) {
        prop_assert_eq!(a * a, GrassmannValue::zero());
    }
}

#[test]
fn generators_are_nilpotent_and_anticommute() {
    for i in 1..=GENERATORS {
        let xi = GrassmannValue::generator(i);
        assert_eq!(xi * xi, GrassmannValue::zero());
        for j in 1..=GENERATORS {
            let xj = GrassmannValue::generator(j);
            let sum = xi * xj + xj * xi;
            assert_eq!(sum, GrassmannValue::zero());
        }
    }
}
