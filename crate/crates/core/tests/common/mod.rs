//! Helpers shared by the integration tests: deterministic quadrature used as
//! an independent oracle for multivariate t probabilities.

#![allow(dead_code)]

use elliptical_pareto::numerics::{ln_gamma, t_cdf};

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const K_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K_WEIGHTS[7] * fc;
    let mut g = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval:
/// the interval with the largest error estimate is bisected until the
/// summed estimate falls below `tol`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol || parts.len() >= MAX_INTERVALS {
            return parts.iter().map(|p| p.2).sum();
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// ∫_{-∞}^{b} f via x = b − (1−t)/t.
pub fn integrate_lower_tail(f: &mut dyn FnMut(f64) -> f64, b: f64, tol: f64) -> f64 {
    let mut g = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let x = b - (1.0 - t) / t;
        f(x) / (t * t)
    };
    integrate(&mut g, 0.0, 1.0, tol)
}

fn inv2(s: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]]
}

fn t_density_1d(x: f64, nu: f64, s: f64) -> f64 {
    let lc = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * std::f64::consts::PI * s).ln();
    (lc - (nu + 1.0) / 2.0 * (1.0 + x * x / (s * nu)).ln()).exp()
}

fn t_density_2d(x: [f64; 2], nu: f64, s: &[[f64; 2]; 2]) -> f64 {
    let si = inv2(s);
    let q = x[0] * (si[0][0] * x[0] + si[0][1] * x[1]) + x[1] * (si[1][0] * x[0] + si[1][1] * x[1]);
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let lc = ln_gamma((nu + 2.0) / 2.0) - ln_gamma(nu / 2.0) - (nu * std::f64::consts::PI).ln() - 0.5 * det.ln();
    (lc - (nu + 2.0) / 2.0 * (1.0 + q / nu).ln()).exp()
}

/// Pr{X ≤ b} for X ~ t_ν(μ, S) in two or three dimensions, by integrating
/// the marginal density of the leading coordinates against the conditional
/// t distribution function of the last one.
pub fn mvt_cdf_quadrature(b: &[f64], nu: f64, mu: &[f64], s: &[Vec<f64>], tol: f64) -> f64 {
    let d = b.len();
    let b: Vec<f64> = b.iter().zip(mu).map(|(x, m)| x - m).collect();
    match d {
        2 => {
            let (a, c, ss) = (s[0][0], s[1][0], s[1][1]);
            let sc = ss - c * c / a;
            let mut f = |x: f64| {
                let q = x * x / a;
                let m = c / a * x;
                let scale = (nu + q) / (nu + 1.0) * sc;
                t_density_1d(x, nu, a) * t_cdf((b[1] - m) / scale.sqrt(), nu + 1.0)
            };
            integrate_lower_tail(&mut f, b[0], tol)
        }
        3 => {
            let a = [[s[0][0], s[0][1]], [s[1][0], s[1][1]]];
            let ai = inv2(&a);
            let c = [s[2][0], s[2][1]];
            let w = [ai[0][0] * c[0] + ai[0][1] * c[1], ai[1][0] * c[0] + ai[1][1] * c[1]];
            let sc = s[2][2] - (c[0] * w[0] + c[1] * w[1]);
            let mut outer = |x0: f64| {
                let mut inner = |x1: f64| {
                    let x = [x0, x1];
                    let q = x[0] * (ai[0][0] * x[0] + ai[0][1] * x[1]) + x[1] * (ai[1][0] * x[0] + ai[1][1] * x[1]);
                    let m = w[0] * x0 + w[1] * x1;
                    let scale = (nu + q) / (nu + 2.0) * sc;
                    t_density_2d(x, nu, &a) * t_cdf((b[2] - m) / scale.sqrt(), nu + 2.0)
                };
                // the inner integral is bounded by the x0 marginal density
                let bound = t_density_1d(x0, nu, a[0][0]);
                integrate_lower_tail(&mut inner, b[1], tol * 0.1 * bound)
            };
            integrate_lower_tail(&mut outer, b[0], tol)
        }
        _ => panic!("quadrature oracle supports two or three dimensions"),
    }
}

/// ∫_0^∞ f via y = (s/(1−s))⁵, which smooths integrable power singularities
/// at the origin.
pub fn integrate_half_line(f: &mut dyn FnMut(f64) -> f64, tol: f64) -> f64 {
    let mut g = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let r = s / (1.0 - s);
        let y = r.powi(5);
        f(y) * 5.0 * r.powi(4) / ((1.0 - s) * (1.0 - s))
    };
    integrate(&mut g, 0.0, 1.0, tol)
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov p-value (asymptotic law with Stephens'
/// small-sample correction).
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)
}

/// Two-sample Kolmogorov–Smirnov p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)
}

/// Upper tail of the chi-square law.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    elliptical_pareto::numerics::gamma_q(0.5 * dof, 0.5 * x)
}

pub fn column(rows: &elliptical_pareto::numerics::Matrix<f64>, j: usize) -> Vec<f64> {
    (0..rows.rows()).map(|i| rows[(i, j)]).collect()
}
