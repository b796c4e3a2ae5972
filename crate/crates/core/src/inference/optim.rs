//! Derivative-free minimization and finite-difference curvature.

use crate::numerics::{symmetric_eigen, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Convergence when the spread of simplex values is below
    /// `f_tol · (1 + |f_best|)` and the simplex diameter is below `x_tol`.
    pub f_tol: f64,
    pub x_tol: f64,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 2000, f_tol: 1e-9, x_tol: 1e-5, initial_step: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder–Mead simplex search. Non-finite objective values are treated as
/// +∞, which lets callers encode box constraints by rejection.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if best.is_finite() && worst - best <= opts.f_tol * (1.0 + best.abs()) && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        if evals.get() >= opts.max_evals {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> { centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(1.0, &simplex[n].0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0, &simplex[n].0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        // outside contraction if the reflection improved on the worst vertex
        let t = if fr < simplex[n].1 { 0.5 } else { -0.5 };
        let xc = along(t, &simplex[n].0);
        let fc = eval(&xc);
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = x_best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let v = eval(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evals: evals.get(), converged }
}

/// Central finite-difference Hessian with per-coordinate steps `h`.
pub fn fd_hessian(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: &[f64]) -> Matrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in shifts {
            y[i] += s;
        }
        f(&y)
    };
    let mut hess = Matrix::zeros(n, n);
    for i in 0..n {
        let fp = at(&[(i, h[i])]);
        let fm = at(&[(i, -h[i])]);
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let fpp = at(&[(i, h[i]), (j, h[j])]);
            let fpm = at(&[(i, h[i]), (j, -h[j])]);
            let fmp = at(&[(i, -h[i]), (j, h[j])]);
            let fmm = at(&[(i, -h[i]), (j, -h[j])]);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Inverse of a symmetric matrix through its eigen-decomposition.
///
/// Eigenvalues at or below `rel_tol · max|eigenvalue|` are dropped, giving
/// the Moore–Penrose pseudo-inverse of the positive part. The flag is
/// `true` when every eigenvalue was positive and kept.
pub fn symmetric_inverse(m: &Matrix<f64>, rel_tol: f64) -> (Matrix<f64>, bool) {
    let n = m.rows();
    let (values, vectors) = symmetric_eigen(m);
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut full_rank = scale.is_finite() && scale > 0.0;
    let inv: Vec<f64> = values
        .iter()
        .map(|&v| {
            if v.is_finite() && v > rel_tol * scale {
                1.0 / v
            } else {
                full_rank = false;
                0.0
            }
        })
        .collect();
    let out = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| vectors[(i, k)] * inv[k] * vectors[(j, k)]).sum());
    (out, full_rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions { max_evals: 5000, f_tol: 1e-14, x_tol: 1e-8, initial_step: 0.5 };
        let m = nelder_mead(rosen, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn infinite_values_act_as_walls() {
        let f = |x: &[f64]| if x[0] < 0.5 { f64::INFINITY } else { (x[0] - 0.2).powi(2) };
        let m = nelder_mead(f, &[1.0], &NelderMeadOptions::default());
        assert!(m.x[0] >= 0.5 && m.x[0] < 0.5 + 1e-4);
    }

    #[test]
    fn hessian_of_quadratic_is_exact() {
        let f = |x: &[f64]| 2.0 * x[0] * x[0] + 3.0 * x[0] * x[1] + 5.0 * x[1] * x[1];
        let h = fd_hessian(f, &[0.3, -0.7], &[1e-3, 1e-3]);
        assert!((h[(0, 0)] - 4.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 3.0).abs() < 1e-6);
        assert!((h[(1, 1)] - 10.0).abs() < 1e-6);
    }

    #[test]
    fn pseudo_inverse_of_singular_matrix() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let (inv, full) = symmetric_inverse(&m, 1e-12);
        assert!(!full);
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[(i, j)] - 0.25).abs() < 1e-12);
            }
        }
    }
}
