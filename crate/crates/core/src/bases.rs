//! Transition matrices between two orthonormal bases.
//!
//! A pair of bases `A = {a_i}`, `B = {b_j}` enters every computation only
//! through the unitary `U_ij = ⟨a_i|b_j⟩`. Indices are 0-based throughout;
//! a basis vector written `a_1` in 1-based notation is index 0 here.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{unitary_from_generator, ComplexMatrix};

/// Unitarity tolerance for matrices built in-process.
pub const CONSTRUCTED_UNITARITY_TOL: f64 = 1e-10;
/// Unitarity tolerance for matrices read from disk.
pub const LOADED_UNITARITY_TOL: f64 = 1e-8;
/// Largest spin whose Wigner matrix is built from double-precision factorials.
pub const MAX_SPIN: f64 = 10.0;

/// Unitary `U` with `U_ij = ⟨a_i|b_j⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    u: ComplexMatrix,
}

impl TransitionMatrix {
    /// Wraps `u` after checking that it is square and unitary within `tol`.
    pub fn with_tolerance(u: ComplexMatrix, tol: f64) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare { rows: u.rows(), cols: u.cols() });
        }
        let deviation = u.unitarity_deviation();
        if !(deviation <= tol) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { u })
    }

    pub fn new(u: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(u, CONSTRUCTED_UNITARITY_TOL)
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.u[(i, j)]
    }

    /// Transition matrix with the roles of the two bases exchanged.
    pub fn swapped(&self) -> Self {
        Self { u: self.u.adjoint() }
    }

    /// `⟨b_j|ψ⟩` for every `j`, given A-coordinates.
    pub fn to_b_coordinates(&self, amps: &[C64]) -> Vec<C64> {
        self.u.adjoint_mul_vec(amps)
    }

    /// A-coordinates of a state given by its B-coordinates.
    pub fn from_b_coordinates(&self, b_amps: &[C64]) -> Vec<C64> {
        self.u.mul_vec(b_amps)
    }
}

/// Discrete Fourier transform, `U_ij = exp(2πi·ij/d)/√d`.
pub fn dft(d: usize) -> Result<TransitionMatrix> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let norm = 1.0 / (d as f64).sqrt();
    // reduce ij mod d first so that U stays exactly symmetric
    let u = ComplexMatrix::from_fn(d, d, |i, j| C64::from_polar(norm, 2.0 * PI * ((i * j) % d) as f64 / d as f64));
    TransitionMatrix::new(u)
}

/// The one-parameter family of mutually unbiased bases in dimension 4:
///
/// ```text
///          ( 1  1  1  1 )
///  U(s) = ½( 1  1 -1 -1 ),   |s| = 1
///          ( 1 -1  s -s )
///          ( 1 -1 -s  s )
/// ```
///
/// `s = i` is the 4-dimensional DFT up to a permutation.
pub fn mub4(s: C64) -> Result<TransitionMatrix> {
    if (s.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitModulus(s.norm()));
    }
    let one = C64::new(1.0, 0.0);
    let rows =
        vec![vec![one, one, one, one], vec![one, one, -one, -one], vec![one, -one, s, -s], vec![one, -one, -s, s]];
    let u = ComplexMatrix::from_rows(rows)?.scale(C64::new(0.5, 0.0));
    TransitionMatrix::new(u)
}

/// Self-adjoint generator used by [`perturbed`].
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// `L_jk = i` for `j < k`, `L_jk = -i` for `j > k`, zero diagonal.
    Default,
    Custom(ComplexMatrix),
}

impl Generator {
    pub fn matrix(&self, d: usize) -> ComplexMatrix {
        match self {
            Generator::Default => default_generator(d),
            Generator::Custom(m) => m.clone(),
        }
    }
}

pub fn default_generator(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |j, k| match j.cmp(&k) {
        std::cmp::Ordering::Less => C64::new(0.0, 1.0),
        std::cmp::Ordering::Greater => C64::new(0.0, -1.0),
        std::cmp::Ordering::Equal => C64::new(0.0, 0.0),
    })
}

/// `exp(-i·eps·L) · base`.
pub fn perturbed(base: &TransitionMatrix, eps: f64, generator: &Generator) -> Result<TransitionMatrix> {
    let d = base.dim();
    let l = generator.matrix(d);
    if l.rows() != d || l.cols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: l.rows().max(l.cols()) });
    }
    let factor = unitary_from_generator(&l, eps)?;
    TransitionMatrix::new(&factor * base.matrix())
}

fn spin_twice(spin: f64) -> Result<usize> {
    let two_s = 2.0 * spin;
    if !(spin >= 0.5) || (two_s - two_s.round()).abs() > 1e-12 {
        return Err(Error::InvalidSpin(spin));
    }
    if spin > MAX_SPIN {
        return Err(Error::SpinTooLarge(spin));
    }
    Ok(two_s.round() as usize)
}

/// Wigner little-d matrix `d^{(s)}_{m′,m}(β)`; row `a` is `m′ = a − s`,
/// column `b` is `m = b − s`, both ascending. At `β = π/2` this is the
/// transition matrix between the `J_z` and `J_x` eigenbases.
pub fn spin_transition(spin: f64, beta: f64) -> Result<TransitionMatrix> {
    let two_s = spin_twice(spin)?;
    let dim = two_s + 1;
    let fact: Vec<f64> = std::iter::once(1.0)
        .chain((1..=two_s).scan(1.0, |acc, k| {
            *acc *= k as f64;
            Some(*acc)
        }))
        .collect();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());

    // all factorial arguments are integers once expressed through row/column indices:
    // j+m′ = a, j−m′ = 2j−a, j+m = b, j−m = 2j−b
    let little_d = |a: usize, b: usize| -> f64 {
        let pre = (fact[a] * fact[two_s - a] * fact[b] * fact[two_s - b]).sqrt();
        let mut sum = 0.0;
        for k in 0..=two_s {
            // j+m−k, j−k−m′, k−m+m′
            let (Some(f1), Some(f2), Some(f3)) = (b.checked_sub(k), (two_s - a).checked_sub(k), (k + a).checked_sub(b))
            else {
                continue;
            };
            let sign = if (k + a + two_s - b).is_multiple_of(2) { 1.0 } else { -1.0 };
            let cos_pow = (two_s + b - a - 2 * k) as i32;
            let sin_pow = (2 * k + a - b) as i32;
            sum += sign * pre / (fact[f1] * fact[k] * fact[f2] * fact[f3]) * c.powi(cos_pow) * s.powi(sin_pow);
        }
        sum
    };
    let u = ComplexMatrix::from_fn(dim, dim, |a, b| C64::new(little_d(a, b), 0.0));
    TransitionMatrix::new(u)
}

/// Haar-random unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> TransitionMatrix {
    loop {
        let mut cols: Vec<Vec<C64>> = (0..d)
            .map(|_| (0..d).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect())
            .collect();
        let mut ok = true;
        for k in 0..d {
            for prev in 0..k {
                let proj: C64 = cols[prev].iter().zip(&cols[k]).map(|(p, x)| p.conj() * x).sum();
                let p = cols[prev].clone();
                for (x, pi) in cols[k].iter_mut().zip(&p) {
                    *x -= proj * pi;
                }
            }
            let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[k].iter_mut().for_each(|x| *x /= norm);
        }
        if ok {
            let u = ComplexMatrix::from_fn(d, d, |i, j| cols[j][i]);
            return TransitionMatrix::new(u).expect("Gram-Schmidt output is unitary");
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<TransitionMatrix> {
    let text = std::fs::read_to_string(path)?;
    let m = io::parse_matrix(&text)?;
    TransitionMatrix::with_tolerance(m, LOADED_UNITARITY_TOL)
}

pub fn save_matrix(u: &TransitionMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, io::matrix_json(u.matrix()))?;
    Ok(())
}

/// Declarative description of a transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisSpec {
    Dft { d: usize },
    Mub4 { s: C64 },
    Perturbed { base: Box<BasisSpec>, eps: f64, generator: Generator },
    Spin { spin: f64 },
    File { path: PathBuf },
}

impl BasisSpec {
    pub fn build(&self) -> Result<TransitionMatrix> {
        match self {
            BasisSpec::Dft { d } => dft(*d),
            BasisSpec::Mub4 { s } => mub4(*s),
            BasisSpec::Perturbed { base, eps, generator } => perturbed(&base.build()?, *eps, generator),
            BasisSpec::Spin { spin } => spin_transition(*spin, PI / 2.0),
            BasisSpec::File { path } => load_matrix(path),
        }
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSpec::Dft { d } => write!(f, "dft(d={d})"),
            BasisSpec::Mub4 { s } => write!(f, "mub4(s={}{:+}i)", s.re, s.im),
            BasisSpec::Perturbed { base, eps, generator } => {
                let g = match generator {
                    Generator::Default => "default",
                    Generator::Custom(_) => "custom",
                };
                write!(f, "perturbed(base={base}, eps={eps}, generator={g})")
            }
            BasisSpec::Spin { spin } => write!(f, "spin(s={spin}, beta=pi/2)"),
            BasisSpec::File { path } => write!(f, "file({})", path.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dft_small_cases() {
        let u = dft(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(u.entry(0, 0).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(u.entry(1, 1).re, -h, epsilon = 1e-15);
        assert_abs_diff_eq!(u.entry(1, 1).im, 0.0, epsilon = 1e-15);

        let u3 = dft(3).unwrap();
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let r = 1.0 / 3f64.sqrt();
        let powers = [[0, 0, 0], [0, 1, 2], [0, 2, 1]];
        for i in 0..3 {
            for j in 0..3 {
                let target = w.powi(powers[i][j]) * r;
                assert!((u3.entry(i, j) - target).norm() < 1e-15);
            }
        }
        assert!(matches!(dft(1), Err(Error::DimensionTooSmall(1))));
    }

    #[test]
    fn dft_is_symmetric_and_unitary() {
        for d in 2..=12 {
            let u = dft(d).unwrap();
            assert!(u.matrix().unitarity_deviation() <= 1e-12);
            assert_eq!(u.matrix(), &u.matrix().transpose());
        }
    }

    #[test]
    fn mub4_rows_and_moduli() {
        let i = C64::new(0.0, 1.0);
        let u = mub4(i).unwrap();
        let row2: Vec<C64> = u.matrix().row(2).to_vec();
        let expect = [C64::new(0.5, 0.), C64::new(-0.5, 0.), C64::new(0., 0.5), C64::new(0., -0.5)];
        for (a, b) in row2.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-15);
        }
        let s = C64::from_polar(1.0, 0.7);
        let us = mub4(s).unwrap();
        assert!(us.matrix().as_slice().iter().all(|z| (z.norm() - 0.5).abs() < 1e-15));
        assert!(us.matrix().adjoint().max_abs_diff(mub4(s.conj()).unwrap().matrix()) < 1e-15);
        assert!(matches!(mub4(C64::new(1.1, 0.0)), Err(Error::NotUnitModulus(_))));
    }

    #[test]
    fn perturbation_limits() {
        let base = mub4(C64::new(0.0, 1.0)).unwrap();
        let same = perturbed(&base, 0.0, &Generator::Default).unwrap();
        assert!(same.matrix().max_abs_diff(base.matrix()) < 1e-14);
        let p = perturbed(&base, 0.1, &Generator::Default).unwrap();
        assert!(p.matrix().unitarity_deviation() <= 1e-10);
        let bad = Generator::Custom(ComplexMatrix::identity(3));
        assert!(matches!(perturbed(&base, 0.1, &bad), Err(Error::DimensionMismatch { .. })));
        let nonherm = Generator::Custom(ComplexMatrix::from_fn(4, 4, |i, j| C64::new((i * 4 + j) as f64, 0.0)));
        assert!(matches!(perturbed(&base, 0.1, &nonherm), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn perturbation_is_first_order_in_eps() {
        let base = mub4(C64::new(0.0, 1.0)).unwrap();
        let lnorm = 1.0 + 2f64.sqrt(); // spectral norm of the default 4x4 generator
        for eps in [1e-2, 1e-3, 1e-4] {
            let p = perturbed(&base, eps, &Generator::Default).unwrap();
            assert!(p.matrix().max_abs_diff(base.matrix()) <= lnorm * eps + 10.0 * eps * eps);
        }
    }

    #[test]
    fn spin_two_matches_printed_matrix() {
        let u = spin_transition(2.0, PI / 2.0).unwrap();
        let r = 1.5f64.sqrt();
        let printed = [
            [0.5, 1.0, r, 1.0, 0.5],
            [-1.0, -1.0, 0.0, 1.0, 1.0],
            [r, 0.0, -1.0, 0.0, r],
            [-1.0, 1.0, 0.0, -1.0, 1.0],
            [0.5, -1.0, r, -1.0, 0.5],
        ];
        for i in 0..5 {
            for j in 0..5 {
                assert!((u.entry(i, j) - C64::new(0.5 * printed[i][j], 0.0)).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn spin_one_has_central_zero() {
        let u = spin_transition(1.0, PI / 2.0).unwrap();
        assert!(u.entry(1, 1).norm() < 1e-15);
    }

    #[test]
    fn spin_validation() {
        assert!(matches!(spin_transition(0.0, 1.0), Err(Error::InvalidSpin(_))));
        assert!(matches!(spin_transition(0.7, 1.0), Err(Error::InvalidSpin(_))));
        assert!(matches!(spin_transition(10.5, 1.0), Err(Error::SpinTooLarge(_))));
        for two_s in 1..=20 {
            let u = spin_transition(two_s as f64 / 2.0, 0.9).unwrap();
            assert!(u.matrix().unitarity_deviation() < 1e-10, "2s = {two_s}");
        }
    }

    #[test]
    fn spin_symmetry_relation() {
        // d_{m,m′} = (−1)^{m′−m} d_{m′,m}
        for two_s in 1..=8 {
            let u = spin_transition(two_s as f64 / 2.0, PI / 2.0).unwrap();
            let n = two_s + 1;
            for a in 0..n {
                for b in 0..n {
                    let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((u.entry(b, a) - u.entry(a, b) * sign).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in 1..=6 {
            assert!(random_unitary(d, &mut rng).matrix().unitarity_deviation() < 1e-12);
        }
    }
}
