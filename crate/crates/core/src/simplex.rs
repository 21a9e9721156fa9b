//! Nelder-Mead simplex minimization with dimension-adaptive coefficients.

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Stop once `f(worst) − f(best)` falls to this value.
    pub f_tol: f64,
    /// Edge length of the initial simplex around `x0`.
    pub initial_step: f64,
    /// Stop early once `f(best)` is at or below this value.
    pub target: Option<f64>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iter: 2000, f_tol: 1e-10, initial_step: 0.5, target: None }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`.
///
/// Uses the adaptive coefficients of Gao and Han (reflection 1, expansion
/// `1 + 2/n`, contraction `3/4 − 1/(2n)`, shrink `1 − 1/n`), which keep the
/// method effective in the 2–16 dimensional problems this crate produces.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = x0.len();
    assert!(n > 0, "cannot minimize over zero parameters");
    let nf = n as f64;
    let (alpha, beta, gamma, delta) =
        if n >= 2 { (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf) } else { (1.0, 2.0, 0.5, 0.5) };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        if vals[worst] - vals[best] <= opts.f_tol || opts.target.is_some_and(|t| vals[best] <= t) {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[idx]) {
                *c += x / nf;
            }
        }
        let along = |coef: f64, out: &mut [f64], worst_pt: &[f64], centroid: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(centroid).zip(worst_pt) {
                *o = c + coef * (c - w);
            }
        };

        along(alpha, &mut trial, &pts[worst], &centroid);
        let fr = f(&trial);
        if fr < vals[best] {
            along(alpha * beta, &mut trial2, &pts[worst], &centroid);
            let fe = f(&trial2);
            if fe < fr {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = fe;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
            continue;
        }
        // contraction, outside if the reflection improved on the worst point
        let (coef, reference) = if fr < vals[worst] { (alpha * gamma, fr) } else { (-gamma, vals[worst]) };
        along(coef, &mut trial2, &pts[worst], &centroid);
        let fc = f(&trial2);
        if fc <= reference {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for &idx in &order[1..] {
            for (x, a) in pts[idx].iter_mut().zip(&anchor) {
                *x = a + delta * (*x - a);
            }
            vals[idx] = f(&pts[idx]);
        }
    }

    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("simplex is nonempty");
    SimplexResult { x: pts[best].clone(), fx: vals[best], iterations, converged }
}
