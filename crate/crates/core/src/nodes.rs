//! Spectral nodes `xi_mu(t)`: minima of the strictly convex fusion potential.
//!
//! All vectors live in the orthonormal frame of [`crate::rootdata::Frame`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::affine::{check_level, enumerate_pc_hat};
use crate::error::{Error, Result};
use crate::rootdata::{dot, CoweightHat, RootDatum};
use crate::tring::TParams;

pub const GRAD_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct Node {
    pub mu: CoweightHat,
    pub xi: Vec<f64>,
    pub grad_residual: f64,
    pub bethe_residual: f64,
    pub iterations: usize,
}

/// The odd quasi-periodic lift `v(x) = 2 atan((1+t)/(1-t) tan(x/2))`, `v(x + 2 pi) = v(x) + 2 pi`.
pub fn v_alpha(x: f64, t: f64) -> f64 {
    let k = (x / (2.0 * PI)).round();
    let y = x - 2.0 * PI * k;
    if (y.abs() - PI).abs() < 1e-300 {
        return x;
    }
    2.0 * (((1.0 + t) / (1.0 - t)) * (y / 2.0).tan()).atan() + 2.0 * PI * k
}

pub fn v_alpha_prime(x: f64, t: f64) -> f64 {
    (1.0 - t * t) / (1.0 - 2.0 * t * x.cos() + t * t)
}

/// `int_0^x v(y) dy = x^2/2 + 2 sum_k t^k (1 - cos kx) / k^2`.
pub fn v_alpha_integral(x: f64, t: f64) -> f64 {
    let mut s = 0.0;
    let mut tk = 1.0;
    for k in 1..20_000 {
        tk *= t;
        let kf = k as f64;
        let term = tk * (1.0 - (kf * x).cos()) / (kf * kf);
        s += term;
        if tk.abs() / (kf * kf) < 1e-19 {
            break;
        }
    }
    x * x / 2.0 + 2.0 * s
}

fn check_t(t: &TParams<f64>) -> Result<()> {
    for (name, v) in [("t_short", t.short), ("t_long", t.long)] {
        if !(v.abs() < 1.0) {
            return Err(Error::InvalidParameter {
                name,
                value: v.to_string(),
            });
        }
    }
    Ok(())
}

/// `2 pi (hat rho + mu)` in the frame.
pub fn target(datum: &RootDatum, mu: &CoweightHat) -> Vec<f64> {
    let f = &datum.frame;
    let mut out: Vec<f64> = f.hat_rho.clone();
    for (j, &m) in mu.0.iter().enumerate() {
        for (o, w) in out.iter_mut().zip(&f.hat_fundamental[j]) {
            *o += m as f64 * w;
        }
    }
    out.iter().map(|x| 2.0 * PI * x).collect()
}

/// `hat rho_v(xi) = sum_{alpha > 0} v_alpha(<xi, alpha>) hat alpha`.
pub fn hat_rho_v(datum: &RootDatum, xi: &[f64], t: &TParams<f64>) -> Vec<f64> {
    let f = &datum.frame;
    let mut out = vec![0.0; datum.rank];
    for (idx, (a, ha)) in f.roots.iter().zip(&f.hat_roots).enumerate() {
        let v = v_alpha(dot(xi, a), t.get(datum.is_long(idx)));
        for (o, h) in out.iter_mut().zip(ha) {
            *o += v * h;
        }
    }
    out
}

pub fn morse_value(
    datum: &RootDatum,
    mu: &CoweightHat,
    xi: &[f64],
    c: i64,
    t: &TParams<f64>,
) -> f64 {
    let f = &datum.frame;
    let mut s = c as f64 / 2.0 * dot(xi, xi) - dot(&target(datum, mu), xi);
    for (idx, (a, ha)) in f.roots.iter().zip(&f.hat_roots).enumerate() {
        let kappa = dot(ha, a) / dot(a, a);
        s += kappa * v_alpha_integral(dot(xi, a), t.get(datum.is_long(idx)));
    }
    s
}

pub fn morse_gradient(
    datum: &RootDatum,
    mu: &CoweightHat,
    xi: &[f64],
    c: i64,
    t: &TParams<f64>,
) -> Vec<f64> {
    let rv = hat_rho_v(datum, xi, t);
    let tg = target(datum, mu);
    (0..datum.rank)
        .map(|k| c as f64 * xi[k] + rv[k] - tg[k])
        .collect()
}

pub fn morse_hessian(datum: &RootDatum, xi: &[f64], c: i64, t: &TParams<f64>) -> DMatrix<f64> {
    let n = datum.rank;
    let f = &datum.frame;
    let mut h = DMatrix::<f64>::identity(n, n) * c as f64;
    for (idx, (a, ha)) in f.roots.iter().zip(&f.hat_roots).enumerate() {
        let d = v_alpha_prime(dot(xi, a), t.get(datum.is_long(idx)));
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] += d * ha[i] * a[j];
            }
        }
    }
    // hat alpha is parallel to alpha; symmetrize away rounding
    (&h + h.transpose()) * 0.5
}

/// `xi_mu(0) = 2 pi (hat rho + mu) / (h + c)`.
pub fn closed_form_node(datum: &RootDatum, mu: &CoweightHat, c: i64) -> Vec<f64> {
    let denom = (datum.coxeter_h + c) as f64;
    target(datum, mu).into_iter().map(|x| x / denom).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration from the `t = 0` node.
pub fn solve_node(datum: &RootDatum, mu: &CoweightHat, c: i64, t: &TParams<f64>) -> Result<Node> {
    check_level(c)?;
    check_t(t)?;
    if mu.0.len() != datum.rank {
        return Err(Error::Dimension {
            expected: datum.rank,
            got: mu.0.len(),
        });
    }
    let mut xi = closed_form_node(datum, mu, c);
    let mut grad = morse_gradient(datum, mu, &xi, c, t);
    let mut value = morse_value(datum, mu, &xi, c, t);
    let mut iterations = 0;
    while max_abs(&grad) >= GRAD_TOL {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                mu: mu.0.clone(),
                residual: max_abs(&grad),
            });
        }
        iterations += 1;
        let hess = morse_hessian(datum, &xi, c, t);
        let chol = hess.cholesky().ok_or(Error::Singular)?;
        let step = chol.solve(&DVector::from_column_slice(&grad));
        let gnorm = max_abs(&grad);
        let mut s = 1.0;
        loop {
            let cand: Vec<f64> = xi.iter().zip(step.iter()).map(|(x, d)| x - s * d).collect();
            let cand_value = morse_value(datum, mu, &cand, c, t);
            let cand_grad = morse_gradient(datum, mu, &cand, c, t);
            // near the minimum value differences drown in rounding; the gradient still decides
            if cand_value <= value || max_abs(&cand_grad) < gnorm || s < 1e-12 {
                xi = cand;
                value = cand_value;
                grad = cand_grad;
                break;
            }
            s *= 0.5;
        }
    }
    let bethe = bethe_residual(datum, &xi, c, t);
    Ok(Node {
        mu: mu.clone(),
        xi,
        grad_residual: max_abs(&grad),
        bethe_residual: bethe,
        iterations,
    })
}

/// Nodes at `t = 0`, given in closed form.
pub fn closed_form_nodes(datum: &RootDatum, c: i64) -> Result<Vec<Node>> {
    let zero = TParams::uniform(0.0);
    Ok(enumerate_pc_hat(datum, c)?
        .into_iter()
        .map(|mu| {
            let xi = closed_form_node(datum, &mu, c);
            let grad_residual = max_abs(&morse_gradient(datum, &mu, &xi, c, &zero));
            let bethe_residual = bethe_residual(datum, &xi, c, &zero);
            Node {
                mu,
                xi,
                grad_residual,
                bethe_residual,
                iterations: 0,
            }
        })
        .collect())
}

/// All nodes `xi_mu`, `mu` in `hat P_c`, in the order of [`enumerate_pc_hat`].
pub fn solve_all(datum: &RootDatum, c: i64, t: &TParams<f64>) -> Result<Vec<Node>> {
    if t.short == 0.0 && t.long == 0.0 {
        return closed_form_nodes(datum, c);
    }
    let mus = enumerate_pc_hat(datum, c)?;
    mus.par_iter()
        .map(|mu| solve_node(datum, mu, c, t))
        .collect()
}

/// Largest defect of the Bethe-type equations over the positive roots of `hat R_0`.
pub fn bethe_residual(datum: &RootDatum, xi: &[f64], c: i64, t: &TParams<f64>) -> f64 {
    let f = &datum.frame;
    let phases: Vec<Complex64> = f
        .roots
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            let ta = t.get(datum.is_long(idx));
            let z = Complex64::from_polar(1.0, dot(xi, a));
            (1.0 - ta * z) / (z - ta)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for beta in &f.hat_roots {
        let b2 = dot(beta, beta);
        let cobeta: Vec<f64> = beta.iter().map(|x| 2.0 * x / b2).collect();
        let lhs = Complex64::from_polar(1.0, c as f64 * dot(xi, &cobeta));
        let mut rhs = Complex64::new(1.0, 0.0);
        for (ha, z) in f.hat_roots.iter().zip(&phases) {
            let e = dot(ha, &cobeta).round() as i32;
            rhs *= z.powi(e);
        }
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

/// Recovers `mu` from `c xi + hat rho_v(xi) = 2 pi (hat rho + mu)`.
pub fn recover_mu(datum: &RootDatum, xi: &[f64], c: i64, t: &TParams<f64>) -> CoweightHat {
    let f = &datum.frame;
    let rv = hat_rho_v(datum, xi, t);
    let x: Vec<f64> = (0..datum.rank)
        .map(|k| (c as f64 * xi[k] + rv[k]) / (2.0 * PI) - f.hat_rho[k])
        .collect();
    CoweightHat(
        (0..datum.rank)
            .map(|j| {
                let b = &f.hat_roots[j];
                (2.0 * dot(&x, b) / dot(b, b)).round() as i64
            })
            .collect(),
    )
}

/// Smallest distance of `xi` to the walls of `0 < <xi, alpha> < 2 pi`; negative outside.
pub fn alcove_margin(datum: &RootDatum, xi: &[f64]) -> f64 {
    let f = &datum.frame;
    let lowest = f
        .roots
        .iter()
        .map(|a| dot(xi, a))
        .fold(f64::INFINITY, f64::min);
    let top = dot(xi, &f.roots[datum.phi]);
    lowest.min(2.0 * PI - top)
}

pub fn min_pairwise_distance(nodes: &[Node]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let d: f64 =
                a.xi.iter()
                    .zip(&b.xi)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt();
            best = best.min(d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootdata::{PairKind, RootType};

    #[test]
    fn v_basic_properties() {
        for t in [-0.7, -0.3, 0.3, 0.7] {
            assert_eq!(v_alpha(0.0, t), 0.0);
            assert!((v_alpha(PI, t) - PI).abs() < 1e-15);
            for x in [0.3, 1.7, -2.5] {
                assert!((v_alpha(x + 2.0 * PI, t) - v_alpha(x, t) - 2.0 * PI).abs() < 1e-12);
                assert!((v_alpha(-x, t) + v_alpha(x, t)).abs() < 1e-14);
                let h = 1e-5;
                let fd = (v_alpha(x + h, t) - v_alpha(x - h, t)) / (2.0 * h);
                assert!((fd - v_alpha_prime(x, t)).abs() < 1e-8);
                let fi = (v_alpha_integral(x + h, t) - v_alpha_integral(x - h, t)) / (2.0 * h);
                assert!((fi - v_alpha(x, t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn v_is_continuous_across_branch() {
        let t = 0.6;
        for k in -3..=3 {
            let x = PI + 2.0 * PI * k as f64;
            assert!((v_alpha(x - 1e-9, t) - v_alpha(x + 1e-9, t)).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = RootDatum::new(RootType::G2, PairKind::Twisted).unwrap();
        let t = TParams {
            short: 0.4,
            long: -0.6,
        };
        let mu = CoweightHat(vec![1, 0]);
        let xi = vec![0.41, 0.77];
        let g = morse_gradient(&d, &mu, &xi, 3, &t);
        for k in 0..2 {
            let h = 1e-5;
            let mut p = xi.clone();
            p[k] += h;
            let mut m = xi.clone();
            m[k] -= h;
            let fd =
                (morse_value(&d, &mu, &p, 3, &t) - morse_value(&d, &mu, &m, 3, &t)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6, "{fd} vs {}", g[k]);
        }
    }

    #[test]
    fn a1_matches_bisection() {
        let d = RootDatum::new(RootType::A(1), PairKind::Untwisted).unwrap();
        let t = TParams::uniform(0.5);
        let node = solve_node(&d, &CoweightHat(vec![0]), 2, &t).unwrap();
        // xi = s alpha / |alpha|, y = <xi, alpha> = sqrt2 s; critical eq. paired with alpha:
        // 2 y + 2 v(y) = 2 pi <hat rho, alpha> = 2 pi
        let f = |y: f64| 2.0 * y + 2.0 * v_alpha(y, 0.5) - 2.0 * PI;
        let (mut lo, mut hi) = (0.0, 2.0 * PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        let y = dot(&node.xi, &d.frame.roots[0]);
        assert!((y - lo).abs() < 1e-12, "{y} vs {lo}");
    }

    #[test]
    fn small_t_approaches_closed_form() {
        let d = RootDatum::new(RootType::B(3), PairKind::Untwisted).unwrap();
        let t = TParams::uniform(1e-6);
        for node in solve_all(&d, 2, &t).unwrap() {
            let xi0 = closed_form_node(&d, &node.mu, 2);
            let err = node
                .xi
                .iter()
                .zip(&xi0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-4);
        }
    }

    #[test]
    fn nodes_recover_mu_and_are_distinct() {
        for (ty, pair) in [
            (RootType::C(3), PairKind::Twisted),
            (RootType::A(2), PairKind::Untwisted),
        ] {
            let d = RootDatum::new(ty, pair).unwrap();
            let t = TParams {
                short: -0.7,
                long: 0.3,
            };
            let nodes = solve_all(&d, 3, &t).unwrap();
            for n in &nodes {
                assert!(n.grad_residual < GRAD_TOL);
                assert!(n.bethe_residual < 1e-10, "{}", n.bethe_residual);
                assert!(alcove_margin(&d, &n.xi) > 1e-8);
                assert_eq!(recover_mu(&d, &n.xi, 3, &t), n.mu);
            }
            assert!(min_pairwise_distance(&nodes) > 1e-6);
        }
    }

    #[test]
    fn hessian_is_positive_definite() {
        let d = RootDatum::new(RootType::B(2), PairKind::Twisted).unwrap();
        let t = TParams {
            short: 0.9,
            long: -0.9,
        };
        for k in 0..50 {
            let xi = vec![
                (k as f64 * 0.731).sin() * 9.0,
                (k as f64 * 1.37).cos() * 9.0,
            ];
            assert!(morse_hessian(&d, &xi, 2, &t).cholesky().is_some());
        }
    }

    #[test]
    fn closed_form_is_critical_at_zero() {
        let d = RootDatum::new(RootType::G2, PairKind::Untwisted).unwrap();
        for n in closed_form_nodes(&d, 4).unwrap() {
            assert!(n.grad_residual < 1e-12, "{}", n.grad_residual);
            assert!(n.bethe_residual < 1e-10);
        }
    }
}
