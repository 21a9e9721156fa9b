//! Dense complex linear algebra at desk scale.
//!
//! Everything here works on small row-major matrices (dimension at most a
//! few dozen). The Hermitian eigensolver is a cyclic complex Jacobi sweep,
//! singular values come from the eigendecomposition of `C†C`, and minors
//! are LU determinants with partial pivoting.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::SizeMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a list of rows; all rows must share one length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::SizeMismatch(format!("row {bad} has {} entries, expected {n_cols}", rows[bad].len())));
        }
        Self::new(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    /// Diagonal matrix with the given entries.
    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { C64::new(0.0, 0.0) })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// `self · x`
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `self† · x`, without materializing the adjoint.
    pub fn adjoint_mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows, "vector length must match row count");
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Largest entrywise modulus of `self · self† - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: C64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b.conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot - target).norm());
            }
        }
        dev
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    fn check_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    fn check_hermitian(&self) -> Result<()> {
        self.check_square()?;
        let deviation = self.hermiticity_deviation();
        if deviation > 1e-10 * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition `H = V diag(λ) V†` by cyclic complex Jacobi rotations.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    h.check_hermitian()?;
    let n = h.rows();
    // work on the exactly Hermitian part
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale: f64 = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[(p, q)].norm_sqr()).sum();
        if off.sqrt() <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Annihilates `a[p][q]` with the unitary `G = diag(1, ē) · R(θ)` acting on
/// the (p, q) plane, where `e` is the phase of `a[p][q]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let n = a.rows();
    let e = apq / g;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta >= 0.0 { 1.0 } else { -1.0 } / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let g_qp = -e.conj() * s;
    let g_qq = e.conj() * c;
    for k in 0..n {
        let (xp, xq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = xp * c + xq * g_qp;
        a[(k, q)] = xp * s + xq * g_qq;
        let (yp, yq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = yp * c + yq * g_qp;
        v[(k, q)] = yp * s + yq * g_qq;
    }
    for k in 0..n {
        let (xp, xq) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = xp * c + xq * g_qp.conj();
        a[(q, k)] = xp * s + xq * g_qq.conj();
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * g, 0.0);
    a[(q, q)] = C64::new(aqq + t * g, 0.0);
}

/// `exp(-i·eps·L)` for Hermitian `L`, assembled from its eigendecomposition.
pub fn unitary_from_generator(generator: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix> {
    let HermitianEigen { values, vectors } = hermitian_eig(generator)?;
    let phases: Vec<C64> = values.iter().map(|&l| C64::from_polar(1.0, -eps * l)).collect();
    Ok(&(&vectors * &ComplexMatrix::diag(&phases)) * &vectors.adjoint())
}

/// Determinant of the submatrix selected by `row_set` × `col_set`.
pub fn minor(u: &ComplexMatrix, row_set: &[usize], col_set: &[usize]) -> Result<C64> {
    if row_set.len() != col_set.len() || row_set.is_empty() {
        return Err(Error::SizeMismatch(format!(
            "minor needs equal nonempty index sets, got {} rows and {} columns",
            row_set.len(),
            col_set.len()
        )));
    }
    if let Some(&i) = row_set.iter().find(|&&i| i >= u.rows()) {
        return Err(Error::IndexOutOfRange(format!("row {i} of {}", u.rows())));
    }
    if let Some(&j) = col_set.iter().find(|&&j| j >= u.cols()) {
        return Err(Error::IndexOutOfRange(format!("column {j} of {}", u.cols())));
    }
    let k = row_set.len();
    let mut buf: Vec<C64> = Vec::with_capacity(k * k);
    for &i in row_set {
        buf.extend(col_set.iter().map(|&j| u[(i, j)]));
    }
    Ok(lu_determinant(&mut buf, k))
}

/// Determinant of a k×k row-major buffer, destroyed in the process.
pub(crate) fn lu_determinant(m: &mut [C64], k: usize) -> C64 {
    let mut det = C64::new(1.0, 0.0);
    for col in 0..k {
        let pivot =
            (col..k).max_by(|&a, &b| m[a * k + col].norm_sqr().total_cmp(&m[b * k + col].norm_sqr())).unwrap_or(col);
        let pv = m[pivot * k + col];
        if pv == C64::new(0.0, 0.0) {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..k {
                m.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        det *= pv;
        for r in col + 1..k {
            let factor = m[r * k + col] / pv;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col + 1..k {
                let sub = factor * m[col * k + j];
                m[r * k + j] -= sub;
            }
        }
    }
    det
}

/// Orthonormal basis of a subspace of `C^ambient_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    columns: Vec<Vec<C64>>,
}

impl SubspaceBasis {
    pub fn new(ambient_dim: usize, columns: Vec<Vec<C64>>) -> Self {
        debug_assert!(columns.iter().all(|c| c.len() == ambient_dim));
        Self { ambient_dim, columns }
    }

    /// The whole ambient space with its canonical basis.
    pub fn full(ambient_dim: usize) -> Self {
        let id = ComplexMatrix::identity(ambient_dim);
        Self::new(ambient_dim, (0..ambient_dim).map(|j| id.column(j)).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[Vec<C64>] {
        &self.columns
    }

    /// `Σ_k coeffs[k] · column_k`
    pub fn combine(&self, coeffs: &[C64]) -> Vec<C64> {
        assert_eq!(coeffs.len(), self.dim());
        let mut out = vec![C64::new(0.0, 0.0); self.ambient_dim];
        for (c, col) in coeffs.iter().zip(&self.columns) {
            for (o, x) in out.iter_mut().zip(col) {
                *o += c * x;
            }
        }
        out
    }

    /// Columns as an `ambient_dim × dim` matrix.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.ambient_dim, self.dim(), |i, k| self.columns[k][i])
    }
}

/// Singular values of `c`, descending, paired with right singular vectors.
fn right_singular_pairs(c: &ComplexMatrix) -> Vec<(f64, Vec<C64>)> {
    let gram = &c.adjoint() * c;
    let eig = hermitian_eig(&gram).expect("C†C is Hermitian by construction");
    let mut pairs: Vec<(f64, Vec<C64>)> = (0..c.cols())
        .map(|k| {
            let v = eig.vectors.column(k);
            // ‖C v‖ resolves small singular values far below sqrt(eps·λmax)
            let sigma = c.mul_vec(&v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (sigma, v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Singular values of `c` in descending order.
pub fn singular_values(c: &ComplexMatrix) -> Vec<f64> {
    if c.rows() == 0 {
        return vec![0.0; c.cols()];
    }
    right_singular_pairs(c).into_iter().map(|(s, _)| s).collect()
}

/// Number of singular values above `tol · σ_max`.
pub fn numerical_rank(c: &ComplexMatrix, tol: f64) -> usize {
    let sv = singular_values(c);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis of `{x : C x = 0}`. A singular value counts as zero when
/// it is at most `tol · σ_max`; an all-zero (or row-less) `C` yields the whole
/// space.
pub fn orthonormal_null_space(c: &ComplexMatrix, tol: f64) -> SubspaceBasis {
    let n = c.cols();
    if c.rows() == 0 {
        return SubspaceBasis::full(n);
    }
    let pairs = right_singular_pairs(c);
    let smax = pairs.first().map_or(0.0, |p| p.0);
    if smax == 0.0 {
        return SubspaceBasis::full(n);
    }
    let columns = pairs.into_iter().filter(|(s, _)| *s <= tol * smax).map(|(_, v)| v).collect();
    SubspaceBasis::new(n, columns)
}
