//! Closed-form states that sit at distinguished points of the diagrams.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;

use crate::bases::{dft, mub4, TransitionMatrix};
use crate::error::{Error, Result};
use crate::kd::StateVector;

/// `|m,s⟩ = q^{-1/2} Σ_k exp(2πi·sk/q) |a_{kp+m}⟩` for `d = p·q`.
///
/// These have `n_A = q`, `n_B = p` for the DFT and reach `n_A·n_B = d`.
pub fn dft_min_states(d: usize, p: usize, q: usize, m: usize, s: usize) -> Result<StateVector> {
    let valid = p * q == d && p > 1 && q > 1 && p < d && q < d && m < p && s < q;
    if !valid {
        return Err(Error::InvalidFactorization { d, p, q, m, s });
    }
    let mut amps = vec![C64::new(0.0, 0.0); d];
    let norm = 1.0 / (q as f64).sqrt();
    for k in 0..q {
        amps[k * p + m] = C64::from_polar(norm, 2.0 * PI * ((s * k) % q) as f64 / q as f64);
    }
    StateVector::new(amps)
}

/// `ψ± = (|b_0⟩ ± |b_2⟩)/√2` for the d = 4 MUB family, in A-coordinates
/// `(2, 0, 1+s, 1−s)/(2√2)` and `(0, 2, 1−s, 1+s)/(2√2)`.
pub fn mub4_edge_states(s: C64) -> Result<(StateVector, StateVector)> {
    let u = mub4(s)?;
    if (s - 1.0).norm() < 1e-12 || (s + 1.0).norm() < 1e-12 {
        return Err(Error::DegenerateParameter("s = ±1 collapses the A-support of ψ±".into()));
    }
    let h = C64::new(1.0 / SQRT_2, 0.0);
    let zero = C64::new(0.0, 0.0);
    let plus = StateVector::from_b_coordinates(&u, &[h, zero, h, zero])?;
    let minus = StateVector::from_b_coordinates(&u, &[h, zero, -h, zero])?;
    Ok((plus, minus))
}

/// `(ω^{i₁k₂}|b_{k₁}⟩ − ω^{i₁k₁}|b_{k₂}⟩)/√2` for the 6-dimensional DFT,
/// `ω = exp(2πi/6)`; the unique state with B-support in `{k₁, k₂}` that
/// vanishes on `a_{i₁}`.
pub fn dft6_two_support(k1: usize, k2: usize, i1: usize) -> Result<StateVector> {
    if !(k1 < k2 && k2 <= 5 && i1 <= 5) {
        return Err(Error::IndexOutOfRange(format!("need 0 <= k1 < k2 <= 5 and i1 <= 5, got ({k1}, {k2}, {i1})")));
    }
    let u: TransitionMatrix = dft(6)?;
    let omega = |n: usize| C64::from_polar(1.0, 2.0 * PI * (n % 6) as f64 / 6.0);
    let mut b = vec![C64::new(0.0, 0.0); 6];
    b[k1] = omega(i1 * k2) / SQRT_2;
    b[k2] = -omega(i1 * k1) / SQRT_2;
    StateVector::from_b_coordinates(&u, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kd::{kd_distribution, nonclassicality, support, DEFAULT_ETA};

    #[test]
    fn min_state_six_two_three() {
        let psi = dft_min_states(6, 2, 3, 0, 0).unwrap();
        let r = 1.0 / 3f64.sqrt();
        let expect = [r, 0.0, r, 0.0, r, 0.0];
        for (a, e) in psi.amps().iter().zip(expect) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn min_states_are_orthonormal() {
        for (d, p, q) in [(4, 2, 2), (6, 2, 3), (6, 3, 2), (8, 2, 4), (8, 4, 2)] {
            let states: Vec<StateVector> =
                (0..p).flat_map(|m| (0..q).map(move |s| dft_min_states(d, p, q, m, s).unwrap())).collect();
            for (x, a) in states.iter().enumerate() {
                for (y, b) in states.iter().enumerate() {
                    let ip: C64 = a.amps().iter().zip(b.amps()).map(|(u, v)| u.conj() * v).sum();
                    let target = if x == y { 1.0 } else { 0.0 };
                    assert!((ip - target).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn min_states_reject_bad_factorizations() {
        assert!(dft_min_states(6, 2, 2, 0, 0).is_err());
        assert!(dft_min_states(6, 1, 6, 0, 0).is_err());
        assert!(dft_min_states(6, 2, 3, 2, 0).is_err());
        assert!(dft_min_states(6, 2, 3, 0, 3).is_err());
    }

    #[test]
    fn edge_states_a_coordinates() {
        let s = C64::new(0.0, 1.0);
        let (plus, minus) = mub4_edge_states(s).unwrap();
        let k = 1.0 / (2.0 * SQRT_2);
        let one = C64::new(1.0, 0.0);
        let ep = [one * 2.0, C64::new(0.0, 0.0), one + s, one - s];
        let em = [C64::new(0.0, 0.0), one * 2.0, one - s, one + s];
        for i in 0..4 {
            assert!((plus.amps()[i] - ep[i] * k).norm() < 1e-15);
            assert!((minus.amps()[i] - em[i] * k).norm() < 1e-15);
        }
        assert!(matches!(mub4_edge_states(C64::new(-1.0, 0.0)), Err(Error::DegenerateParameter(_))));
    }

    #[test]
    fn two_support_states_vanish_at_i1() {
        for k1 in 0..6 {
            for k2 in k1 + 1..6 {
                for i1 in 0..6 {
                    let psi = dft6_two_support(k1, k2, i1).unwrap();
                    assert!(psi.amps()[i1].norm() < 1e-12);
                    let n_a = support(&dft(6).unwrap(), &psi, DEFAULT_ETA).unwrap().n_a;
                    let extra_zero = (0..6).any(|i2| i2 != i1 && ((k2 - k1) * (i2 + 6 - i1)) % 6 == 0);
                    if extra_zero {
                        assert!(n_a <= 4);
                    } else {
                        assert_eq!(n_a, 5);
                    }
                }
            }
        }
        assert!(dft6_two_support(2, 2, 0).is_err());
        assert!(dft6_two_support(0, 6, 0).is_err());
    }

    #[test]
    fn antipodal_two_support_state_is_classical() {
        let u = dft(6).unwrap();
        let psi = dft6_two_support(1, 4, 0).unwrap();
        let p = support(&u, &psi, DEFAULT_ETA).unwrap();
        assert_eq!((p.n_a, p.n_b), (3, 2));
        let ncc = nonclassicality(&kd_distribution(&u, &psi).unwrap());
        assert!((ncc - 1.0).abs() < 1e-10);
    }
}
