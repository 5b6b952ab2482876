//! Associated Laguerre polynomials and matrix elements of the displacement
//! operator between number states.
//!
//! Factorial ratios are evaluated in log space so indices well beyond 170
//! stay finite.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::hilbert::{cr, C64};
use crate::math::{exp, ln, ln_factorial, sqrt};
use crate::{Error, Result};

/// `L_n^{(k)}(x)` by upward three-term recurrence in `n`.
///
/// Requires `n ≥ 0` and `k ≥ −n`.
pub fn laguerre(n: i64, k: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::Domain("Laguerre degree must be non-negative"));
    }
    if k < -n {
        return Err(Error::Domain("Laguerre order must satisfy k >= -n"));
    }
    let mut table = laguerre_sequence(n as usize, k as f64, x);
    Ok(table.pop().unwrap_or(1.0))
}

/// `[L_0^{(k)}(x), …, L_n^{(k)}(x)]`.
pub fn laguerre_sequence(n: usize, k: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + k - x);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Query for `⟨l| exp[(g/ω) λ (a − a†)] |n⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacedElementQuery {
    pub l: usize,
    pub n: usize,
    /// ±1.
    pub lambda: i8,
    pub g_over_omega: f64,
}

impl DisplacedElementQuery {
    pub fn new(l: usize, n: usize, lambda: i8, g_over_omega: f64) -> Self {
        debug_assert!(lambda == 1 || lambda == -1);
        Self { l, n, lambda, g_over_omega }
    }
}

/// `⟨l| exp[(g/ω) λ (a − a†)] |n⟩`, a real number.
///
/// With `β = λ g/ω` and `l ≥ n` this is
/// `√(n!/l!) (−β)^{l−n} e^{−β²/2} L_n^{(l−n)}(β²)`; `l < n` follows from
/// `⟨l|e^{β(a−a†)}|n⟩ = ⟨n|e^{−β(a−a†)}|l⟩`.
pub fn displaced_fock_element(q: DisplacedElementQuery) -> f64 {
    let beta = f64::from(q.lambda.signum()) * q.g_over_omega;
    real_displacement_element(q.l, q.n, beta)
}

/// `⟨l| exp[β (a − a†)] |n⟩` for real `β` (this is `⟨l|D(−β)|n⟩`).
pub fn real_displacement_element(l: usize, n: usize, beta: f64) -> f64 {
    if l < n {
        return real_displacement_element(n, l, -beta);
    }
    let d = l - n;
    if beta == 0.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let x = beta * beta;
    let lag = laguerre_sequence(n, d as f64, x)[n];
    let log_mag = 0.5 * (ln_factorial(n) - ln_factorial(l)) + d as f64 * ln(beta.abs()) - 0.5 * x;
    let sign = if beta > 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
    sign * exp(log_mag) * lag
}

/// Table `T[(l, n)] = ⟨l| exp[β (a − a†)] |n⟩` for `l, n < dim`.
///
/// Each diagonal `l − n = d` is filled by one recurrence in `n`, so the
/// whole table costs `O(dim²)`.
pub fn displacement_table(beta: f64, dim: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(dim, dim);
    if beta == 0.0 {
        for i in 0..dim {
            t[(i, i)] = 1.0;
        }
        return t;
    }
    let x = beta * beta;
    for d in 0..dim {
        let count = dim - d;
        let lag = laguerre_sequence(count - 1, d as f64, x);
        // prefactor √(n!/(n+d)!) |β|^d e^{−x/2}, advanced in n multiplicatively
        let mut pref = exp(-0.5 * ln_factorial(d) + d as f64 * ln(beta.abs()) - 0.5 * x);
        let sign_lower = if beta > 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
        let sign_upper = if beta < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
        for n in 0..count {
            let v = pref * lag[n];
            t[(n + d, n)] = sign_lower * v;
            if d > 0 {
                t[(n, n + d)] = sign_upper * v;
            }
            pref *= sqrt((n + 1) as f64 / (n + 1 + d) as f64);
        }
    }
    t
}

/// Applies `D(z) = exp(z a† − z* a)` to a truncated vector `psi` using the
/// analytic matrix elements, returning components `0..out_levels`.
///
/// `⟨k|D(z)|n⟩ = √(n!/k!) z^{k−n} e^{−|z|²/2} L_n^{(k−n)}(|z|²)` for `k ≥ n`
/// and `√(k!/n!) (−z*)^{n−k} e^{−|z|²/2} L_k^{(n−k)}(|z|²)` for `k < n`.
pub fn apply_displacement(z: C64, psi: &[C64], out_levels: usize) -> Vec<C64> {
    let in_levels = psi.len();
    let mut out = alloc::vec![cr(0.0); out_levels];
    let x = z.norm_sqr();
    if x == 0.0 {
        for (k, o) in out.iter_mut().enumerate() {
            if k < in_levels {
                *o = psi[k];
            }
        }
        return out;
    }
    let r = sqrt(x);
    let unit = z / cr(r);
    let neg_unit_conj = -unit.conj();
    let mut lag = Vec::new();
    // lower diagonals k = n + d (d ≥ 0)
    let mut phase = cr(1.0);
    for d in 0..out_levels {
        let count = in_levels.min(out_levels - d);
        if count == 0 {
            break;
        }
        fill_laguerre(&mut lag, count - 1, d as f64, x);
        let mut pref = exp(-0.5 * ln_factorial(d) + d as f64 * ln(r) - 0.5 * x);
        for n in 0..count {
            out[n + d] += phase * cr(pref * lag[n]) * psi[n];
            pref *= sqrt((n + 1) as f64 / (n + 1 + d) as f64);
        }
        phase *= unit;
    }
    // upper diagonals n = k + d (d ≥ 1)
    let mut phase = neg_unit_conj;
    for d in 1..in_levels {
        let count = out_levels.min(in_levels - d);
        if count == 0 {
            break;
        }
        fill_laguerre(&mut lag, count - 1, d as f64, x);
        let mut pref = exp(-0.5 * ln_factorial(d) + d as f64 * ln(r) - 0.5 * x);
        for k in 0..count {
            out[k] += phase * cr(pref * lag[k]) * psi[k + d];
            pref *= sqrt((k + 1) as f64 / (k + 1 + d) as f64);
        }
        phase *= neg_unit_conj;
    }
    out
}

fn fill_laguerre(buf: &mut Vec<f64>, n: usize, k: f64, x: f64) {
    buf.clear();
    buf.push(1.0);
    if n == 0 {
        return;
    }
    buf.push(1.0 + k - x);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * buf[j] - (jf + k) * buf[j - 1]) / (jf + 1.0);
        buf.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        assert_eq!(laguerre(0, 3, 2.5).unwrap(), 1.0);
        assert_eq!(laguerre(1, 0, 1.0).unwrap(), 0.0);
        assert!((laguerre(2, 0, 2.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(laguerre(-1, 0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn vacuum_element_and_identity() {
        let v = displaced_fock_element(DisplacedElementQuery::new(0, 0, 1, 1.0));
        assert!((v - 0.606_530_659_712_633_4).abs() < 1e-12);
        for l in 0..6 {
            for n in 0..6 {
                let v = displaced_fock_element(DisplacedElementQuery::new(l, n, -1, 0.0));
                assert_eq!(v, if l == n { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn lambda_flip_parity() {
        for (l, n) in [(5, 2), (2, 5), (7, 7), (9, 0)] {
            let p = displaced_fock_element(DisplacedElementQuery::new(l, n, 1, 0.6));
            let m = displaced_fock_element(DisplacedElementQuery::new(l, n, -1, 0.6));
            let sign = if (l + n) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((p - sign * m).abs() < 1e-14);
        }
    }

    #[test]
    fn table_matches_pointwise() {
        let t = displacement_table(-1.3, 20);
        for l in 0..20 {
            for n in 0..20 {
                let v = real_displacement_element(l, n, -1.3);
                assert!((t[(l, n)] - v).abs() < 1e-13, "{l} {n}");
            }
        }
    }

    #[test]
    fn apply_displacement_matches_real_elements() {
        // D(z) with real z equals exp[−z (a − a†)]
        let z = 0.8;
        let mut psi = alloc::vec![cr(0.0); 12];
        psi[3] = cr(1.0);
        let out = apply_displacement(cr(z), &psi, 30);
        for (k, o) in out.iter().enumerate() {
            assert!((o.re - real_displacement_element(k, 3, -z)).abs() < 1e-13);
            assert!(o.im.abs() < 1e-15);
        }
    }

    #[test]
    fn large_index_stays_finite() {
        let v = real_displacement_element(400, 380, 0.9);
        assert!(v.is_finite() && v.abs() <= 1.0);
    }
}
