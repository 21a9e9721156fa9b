//! Exact arithmetic over the Gaussian rationals, used as an independent
//! oracle for transition matrices whose entries lie in `Q(i)`.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

use itertools::Itertools;
use num_rational::Ratio;

type Q = Ratio<i128>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gq {
    re: Q,
    im: Q,
}

impl Gq {
    pub fn new(re: i128, im: i128, den: i128) -> Self {
        Self { re: Q::new(re, den), im: Q::new(im, den) }
    }

    fn zero() -> Self {
        Self::new(0, 0, 1)
    }

    fn one() -> Self {
        Self::new(1, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re == Q::from_integer(0) && self.im == Q::from_integer(0)
    }

    fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    fn inv(self) -> Self {
        let n = self.re * self.re + self.im * self.im;
        Self { re: self.re / n, im: -self.im / n }
    }
}

impl Add for Gq {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Gq {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Gq {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Mul for Gq {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

/// `U(s)` of the d = 4 MUB family at `s = i`.
pub fn mub4_i_exact() -> Vec<Vec<Gq>> {
    let h = |re: i128, im: i128| Gq::new(re, im, 2);
    vec![
        vec![h(1, 0), h(1, 0), h(1, 0), h(1, 0)],
        vec![h(1, 0), h(1, 0), h(-1, 0), h(-1, 0)],
        vec![h(1, 0), h(-1, 0), h(0, 1), h(0, -1)],
        vec![h(1, 0), h(-1, 0), h(0, -1), h(0, 1)],
    ]
}

/// Basis of the kernel of `rows` (each of length `n`) by exact reduction.
fn kernel(mut rows: Vec<Vec<Gq>>, n: usize) -> Vec<Vec<Gq>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv();
        rows[r] = rows[r].iter().map(|&x| x * inv).collect();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot_row) {
                    *x = *x - f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Gq::zero(); n];
            v[free] = Gq::one();
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[k][free];
            }
            v
        })
        .collect()
}

/// Every `(n_A, n_B)` attained by some nonzero state, from the exact generic
/// supports of all cells `Π_A(S)H ∩ Π_B(T)H`.
pub fn realized_points_exact(u: &[Vec<Gq>]) -> BTreeSet<(usize, usize)> {
    let d = u.len();
    let mut out = BTreeSet::new();
    for na in 1..=d {
        for s in (0..d).combinations(na) {
            for nb in 1..=d {
                for t in (0..d).combinations(nb) {
                    let mut rows = Vec::new();
                    for i in (0..d).filter(|i| !s.contains(i)) {
                        let mut e = vec![Gq::zero(); d];
                        e[i] = Gq::one();
                        rows.push(e);
                    }
                    for j in (0..d).filter(|j| !t.contains(j)) {
                        rows.push((0..d).map(|i| u[i][j].conj()).collect());
                    }
                    let basis = kernel(rows, d);
                    if basis.is_empty() {
                        continue;
                    }
                    let a_support = (0..d).filter(|&i| basis.iter().any(|v| !v[i].is_zero())).count();
                    let b_of = |v: &Vec<Gq>, j: usize| (0..d).fold(Gq::zero(), |acc, i| acc + u[i][j].conj() * v[i]);
                    let b_support = (0..d).filter(|&j| basis.iter().any(|v| !b_of(v, j).is_zero())).count();
                    out.insert((a_support, b_support));
                }
            }
        }
    }
    out
}
