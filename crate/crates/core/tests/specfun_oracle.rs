use proptest::prelude::*;
use tlsim_core::hilbert::displacement;
use tlsim_core::specfun::{
    apply_displacement, displaced_fock_element, displacement_table, laguerre, real_displacement_element,
    DisplacedElementQuery,
};
use tlsim_core::{FockBasis, C64};

/// `L_n^{(k)}(x) = Σ_j (−1)^j C(n+k, n−j) x^j / j!`.
fn laguerre_direct(n: u32, k: u32, x: f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..=n {
        let mut binom = 1.0;
        for i in 0..(n - j) {
            binom *= f64::from(k + j + 1 + i) / f64::from(i + 1);
        }
        let mut term = binom;
        for i in 1..=j {
            term *= x / f64::from(i);
        }
        sum += if j % 2 == 0 { term } else { -term };
    }
    sum
}

proptest! {
    #[test]
    fn recurrence_matches_direct_sum(n in 0u32..12, k in 0u32..10, x in 0.0f64..4.0) {
        let a = laguerre(i64::from(n), i64::from(k), x).unwrap();
        let b = laguerre_direct(n, k, x);
        prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
    }

    #[test]
    fn displaced_columns_are_normalized(n in 0usize..20, beta in -1.5f64..1.5) {
        let s: f64 = (0..200).map(|l| real_displacement_element(l, n, beta).powi(2)).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn displacement_composes(b1 in -0.8f64..0.8, b2 in -0.8f64..0.8) {
        // exp[b1(a−a†)] exp[b2(a−a†)] = exp[(b1+b2)(a−a†)] for real arguments
        let dim = 120;
        let t1 = displacement_table(b1, dim);
        let t2 = displacement_table(b2, dim);
        let t12 = displacement_table(b1 + b2, dim);
        let prod = &t1 * &t2;
        for l in 0..15 {
            for n in 0..15 {
                prop_assert!((prod[(l, n)] - t12[(l, n)]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn elements_match_matrix_exponential() {
    let fock = FockBasis::new(120).unwrap();
    for x in [0.2, 0.8, 1.5] {
        for lambda in [1i8, -1] {
            // e^{β(a−a†)} = D(−β)
            let beta = f64::from(lambda) * x;
            let d = displacement(C64::new(-beta, 0.0), fock).unwrap();
            for l in 0..=25 {
                for n in 0..=25 {
                    let v = displaced_fock_element(DisplacedElementQuery::new(l, n, lambda, x));
                    let m = d.matrix()[(l, n)];
                    assert!((v - m.re).abs() < 1e-9 && m.im.abs() < 1e-9, "x={x} lambda={lambda} l={l} n={n}");
                }
            }
        }
    }
}

#[test]
fn complex_displacement_matches_matrix() {
    let fock = FockBasis::new(80).unwrap();
    let z = C64::new(0.7, -1.1);
    let d = displacement(z, fock).unwrap();
    let mut psi = vec![C64::new(0.0, 0.0); 10];
    psi[2] = C64::new(0.6, 0.0);
    psi[5] = C64::new(0.0, 0.8);
    let out = apply_displacement(z, &psi, 40);
    for (k, o) in out.iter().enumerate() {
        let m = d.matrix()[(k, 2)] * psi[2] + d.matrix()[(k, 5)] * psi[5];
        assert!((o - m).norm() < 1e-10, "k={k}");
    }
}
