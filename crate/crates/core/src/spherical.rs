//! Macdonald spherical functions, Weyl characters and orbit sums at points `xi` of the frame,
//! plus the basis matrix `M_lambda(xi_mu)` over the nodes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::affine::{enumerate_pc, enumerate_pc_hat};
use crate::error::{Error, Result};
use crate::nodes::{self, Node};
use crate::rootdata::{dot, CoweightHat, RootDatum, Weight};
use crate::tring::{stabilizer_poincare_finite, weyl_poincare_product, TParams};

/// Largest Weyl group enumerated by the full-sum routes.
pub const FULL_SUM_CAP: usize = 60_000;

const SINGULAR_TOL: f64 = 1e-12;

/// `<lambda, xi>` for a weight in fundamental coordinates.
pub fn pair_weight(datum: &RootDatum, lambda: &Weight, xi: &[f64]) -> f64 {
    lambda
        .0
        .iter()
        .zip(&datum.frame.fundamental)
        .map(|(&k, w)| k as f64 * dot(w, xi))
        .sum()
}

pub fn is_regular(datum: &RootDatum, xi: &[f64]) -> bool {
    datum.frame.roots.iter().all(|a| {
        let x = dot(xi, a) / (2.0 * PI);
        (x - x.round()).abs() > SINGULAR_TOL
    })
}

fn require_regular(datum: &RootDatum, xi: &[f64]) -> Result<()> {
    if is_regular(datum, xi) {
        Ok(())
    } else {
        Err(Error::Singular)
    }
}

/// Simple reflection `s_j` on a frame vector.
pub fn reflect_frame(datum: &RootDatum, j: usize, x: &[f64]) -> Vec<f64> {
    let a = &datum.frame.simple[j - 1];
    let k = 2.0 * dot(x, a) / dot(a, a);
    x.iter().zip(a).map(|(xi, ai)| xi - k * ai).collect()
}

/// `w xi` for `w = s_{word[0]} s_{word[1]} ...`.
pub fn act_frame(datum: &RootDatum, word: &[usize], x: &[f64]) -> Vec<f64> {
    word.iter()
        .rev()
        .fold(x.to_vec(), |acc, &j| reflect_frame(datum, j, &acc))
}

/// `(w xi, l(w))` for every `w` in `W_0`.
pub fn weyl_images(datum: &RootDatum, xi: &[f64]) -> Result<Vec<(Vec<f64>, usize)>> {
    Ok(datum
        .weyl_group(FULL_SUM_CAP)?
        .iter()
        .map(|w| (act_frame(datum, &w.word, xi), w.length()))
        .collect())
}

/// Whether the longest element of `W_0` acts as `-1`.
pub fn minus_one_in_weyl(datum: &RootDatum) -> bool {
    let w0 = datum.longest_element();
    (1..=datum.rank).all(|j| {
        let w = Weight::fundamental(datum.rank, j);
        datum.act(&w0, &w) == -&w
    })
}

/// `C(xi) = prod_{alpha > 0} (1 - t_alpha e^{-i<xi,alpha>}) / (1 - e^{-i<xi,alpha>})`.
pub fn c_function(datum: &RootDatum, xi: &[f64], t: &TParams<f64>) -> Result<Complex64> {
    require_regular(datum, xi)?;
    Ok(datum
        .frame
        .roots
        .iter()
        .enumerate()
        .fold(Complex64::new(1.0, 0.0), |acc, (idx, a)| {
            let z = Complex64::from_polar(1.0, -dot(xi, a));
            acc * (1.0 - t.get(datum.is_long(idx)) * z) / (1.0 - z)
        }))
}

/// `sum_{w in W_0} C(w xi) e^{i<w xi, lambda>}` for any `lambda` in `P`.
pub fn msf_full_sum(
    datum: &RootDatum,
    lambda: &Weight,
    xi: &[f64],
    t: &TParams<f64>,
) -> Result<Complex64> {
    require_regular(datum, xi)?;
    let mut s = Complex64::new(0.0, 0.0);
    for (wx, _) in weyl_images(datum, xi)? {
        s += c_function(datum, &wx, t)?
            * Complex64::from_polar(1.0, pair_weight(datum, lambda, &wx));
    }
    Ok(s)
}

/// Orbit data for `M_lambda`: `W_{0;lambda}(t)` and, per `nu` in `W_0 lambda`,
/// the roots `beta` (index, sign) with `<nu, beta^vee> > 0`.
#[derive(Debug, Clone)]
pub struct MsfTable {
    pub lambda: Weight,
    pub stabilizer: f64,
    orbit: Vec<(Weight, Vec<(usize, f64, f64)>)>,
}

impl MsfTable {
    pub fn new(datum: &RootDatum, lambda: &Weight, t: &TParams<f64>) -> Result<Self> {
        let stabilizer = stabilizer_poincare_finite(datum, lambda)?.eval_f64(t)?;
        let orbit = datum
            .weyl_orbit(lambda)?
            .into_iter()
            .map(|nu| {
                let roots = (0..datum.num_positive_roots())
                    .filter_map(|idx| {
                        let p = datum.pair_coroot(&nu, idx);
                        (p != 0).then(|| (idx, p.signum() as f64, t.get(datum.is_long(idx))))
                    })
                    .collect();
                (nu, roots)
            })
            .collect();
        Ok(MsfTable {
            lambda: lambda.clone(),
            stabilizer,
            orbit,
        })
    }

    pub fn eval(&self, datum: &RootDatum, xi: &[f64]) -> Result<Complex64> {
        require_regular(datum, xi)?;
        let pairings: Vec<f64> = datum.frame.roots.iter().map(|a| dot(xi, a)).collect();
        let mut s = Complex64::new(0.0, 0.0);
        for (nu, roots) in &self.orbit {
            let mut term = Complex64::from_polar(1.0, pair_weight(datum, nu, xi));
            for &(idx, sign, ta) in roots {
                let z = Complex64::from_polar(1.0, -sign * pairings[idx]);
                term *= (1.0 - ta * z) / (1.0 - z);
            }
            s += term;
        }
        Ok(s * self.stabilizer)
    }
}

/// `M_lambda(xi)` for dominant `lambda`, summed over the orbit `W_0 lambda`.
pub fn msf_value(
    datum: &RootDatum,
    lambda: &Weight,
    xi: &[f64],
    t: &TParams<f64>,
) -> Result<Complex64> {
    MsfTable::new(datum, lambda, t)?.eval(datum, xi)
}

/// `delta(xi) = prod_{alpha > 0} (e^{i<xi,alpha>/2} - e^{-i<xi,alpha>/2})`.
pub fn weyl_denominator(datum: &RootDatum, xi: &[f64]) -> Complex64 {
    datum
        .frame
        .roots
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, a| {
            let h = dot(xi, a) / 2.0;
            acc * Complex64::new(0.0, 2.0 * h.sin())
        })
}

/// `chi_lambda(xi)` as the alternating sum over `W_0` divided by `delta(xi)`.
pub fn weyl_character(datum: &RootDatum, lambda: &Weight, xi: &[f64]) -> Result<Complex64> {
    require_regular(datum, xi)?;
    let den = weyl_denominator(datum, xi);
    let shifted = lambda + &datum.rho();
    let mut s = Complex64::new(0.0, 0.0);
    for (wx, len) in weyl_images(datum, xi)? {
        let sign = if len % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * Complex64::from_polar(1.0, pair_weight(datum, &shifted, &wx));
    }
    Ok(s / den)
}

/// Weyl's dimension formula `prod_{alpha > 0} <lambda + rho, alpha^vee> / <rho, alpha^vee>`.
pub fn weyl_dimension(datum: &RootDatum, lambda: &Weight) -> i64 {
    let shifted = lambda + &datum.rho();
    let (mut num, mut den) = (1i128, 1i128);
    for idx in 0..datum.num_positive_roots() {
        num *= datum.pair_coroot(&shifted, idx) as i128;
        den *= datum.pair_coroot(&datum.rho(), idx) as i128;
    }
    (num / den) as i64
}

/// `m_omega(e^{i xi}) = sum_{nu in W_0 omega} e^{i<nu, xi>}`.
pub fn orbit_sum_m(datum: &RootDatum, omega: &Weight, xi: &[f64]) -> Result<Complex64> {
    let s = datum
        .weyl_orbit(omega)?
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, nu| {
            acc + Complex64::from_polar(1.0, pair_weight(datum, nu, xi))
        });
    Ok(s)
}

/// `W_0(t)`, evaluated from Macdonald's product.
pub fn weyl_poincare_value(datum: &RootDatum, t: &TParams<f64>) -> Result<f64> {
    weyl_poincare_product(datum).eval_f64(t)
}

/// Uniform sample of the open alcove `0 < <xi, alpha> < 2 pi`, at least `margin` from its walls.
pub fn sample_alcove(datum: &RootDatum, rng: &mut impl Rng, margin: f64) -> Vec<f64> {
    let n = datum.rank;
    let phi = &datum.positive_roots[datum.phi].coeffs;
    loop {
        let e: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = e.iter().sum();
        // simplex coordinates y_j = <xi, alpha_j>, with sum_j phi_j y_j < 2 pi
        let y: Vec<f64> = (0..n)
            .map(|j| 2.0 * PI * e[j] / (phi[j] as f64 * total))
            .collect();
        let xi = coweight_combination(datum, &y);
        if nodes::alcove_margin(datum, &xi) > margin {
            return xi;
        }
    }
}

/// `sum_j y_j omega_j^vee`, the vector with `<xi, alpha_j> = y_j`.
pub fn coweight_combination(datum: &RootDatum, y: &[f64]) -> Vec<f64> {
    let f = &datum.frame;
    let mut xi = vec![0.0; datum.rank];
    for (j, yj) in y.iter().enumerate() {
        let a = &f.simple[j];
        let s = 2.0 * yj / dot(a, a);
        for (x, w) in xi.iter_mut().zip(&f.fundamental[j]) {
            *x += s * w;
        }
    }
    xi
}

/// The square matrix `M_lambda(xi_mu)`, rows `lambda in P_c`, columns `mu in hat P_c`.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub level: i64,
    pub t: TParams<f64>,
    pub rows: Vec<Weight>,
    pub cols: Vec<CoweightHat>,
    pub nodes: Vec<Node>,
    pub entries: DMatrix<Complex64>,
    pub condition: f64,
    lu_t: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl BasisMatrix {
    /// Coefficients `x` with `values[k] = sum_lambda x_lambda M_lambda(xi_k)`, and the solve residual.
    pub fn expand(&self, values: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        let n = self.rows.len();
        if values.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: values.len(),
            });
        }
        let b = nalgebra::DVector::from_column_slice(values);
        let x = self.lu_t.solve(&b).ok_or(Error::Singular)?;
        let r = self.entries.transpose() * &x - &b;
        let residual = r.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        Ok((x.iter().cloned().collect(), residual))
    }

    pub fn row(&self, lambda: &Weight) -> Option<Vec<Complex64>> {
        let i = self.rows.iter().position(|r| r == lambda)?;
        Some(self.entries.row(i).iter().cloned().collect())
    }
}

pub fn basis_matrix(datum: &RootDatum, c: i64, t: &TParams<f64>) -> Result<BasisMatrix> {
    let nodes = nodes::solve_all(datum, c, t)?;
    basis_matrix_at(datum, c, t, nodes)
}

/// Builds the basis matrix from already solved nodes.
pub fn basis_matrix_at(
    datum: &RootDatum,
    c: i64,
    t: &TParams<f64>,
    nodes: Vec<Node>,
) -> Result<BasisMatrix> {
    let rows = enumerate_pc(datum, c)?;
    let cols = enumerate_pc_hat(datum, c)?;
    if rows.len() != cols.len() {
        return Err(Error::Dimension {
            expected: rows.len(),
            got: cols.len(),
        });
    }
    let tables: Vec<MsfTable> = rows
        .iter()
        .map(|l| MsfTable::new(datum, l, t))
        .collect::<Result<_>>()?;
    let columns: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|node| {
            tables
                .iter()
                .map(|tab| tab.eval(datum, &node.xi))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let entries = (0..rows.len())
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    basis_matrix_from(c, t.clone(), rows, nodes, entries)
}

/// Assembles a basis matrix from precomputed rows `entries[i][k]` = value of basis function `i` at node `k`.
pub fn basis_matrix_from(
    c: i64,
    t: TParams<f64>,
    rows: Vec<Weight>,
    nodes: Vec<Node>,
    entries: Vec<Vec<Complex64>>,
) -> Result<BasisMatrix> {
    let n = rows.len();
    if nodes.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: nodes.len(),
        });
    }
    let cols = nodes.iter().map(|node| node.mu.clone()).collect();
    let entries = DMatrix::from_fn(n, n, |i, k| entries[i][k]);
    let sv = entries.clone().singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if !(smin > smax * 1e-13) {
        return Err(Error::Singular);
    }
    let lu_t = entries.transpose().lu();
    Ok(BasisMatrix {
        level: c,
        t,
        rows,
        cols,
        nodes,
        entries,
        condition: smax / smin,
        lu_t,
    })
}

/// Dominant weights `mu <= lambda` in the dominance order.
pub fn dominant_below(datum: &RootDatum, lambda: &Weight) -> Result<Vec<Weight>> {
    if !lambda.is_dominant() {
        return Err(Error::NotDominant(lambda.0.clone()));
    }
    // dominant weights below lambda are connected through single positive-root steps
    let mut seen = std::collections::BTreeSet::new();
    let mut stack = vec![lambda.clone()];
    seen.insert(lambda.clone());
    while let Some(x) = stack.pop() {
        for r in &datum.positive_roots {
            let y = &x - &r.weight;
            if y.is_dominant() && seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    let mut out: Vec<Weight> = seen.into_iter().collect();
    out.sort_by(|a, b| b.cmp(a));
    out.retain(|m| m != lambda);
    out.insert(0, lambda.clone());
    Ok(out)
}

/// Coefficients `n_{lambda,mu}(t)` of `M_lambda = sum_{mu <= lambda} n_{lambda,mu} m_mu`,
/// fitted at random regular points and validated at fresh ones.
pub fn monomial_expansion(
    datum: &RootDatum,
    lambda: &Weight,
    t: &TParams<f64>,
    seed: u64,
) -> Result<(Vec<(Weight, Complex64)>, f64)> {
    let mus = dominant_below(datum, lambda)?;
    let table = MsfTable::new(datum, lambda, t)?;
    let n = mus.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        let pts: Vec<Vec<f64>> = (0..2 * n)
            .map(|_| sample_alcove(datum, &mut rng, 1e-3))
            .collect();
        let basis = |xi: &[f64]| {
            mus.iter()
                .map(|m| orbit_sum_m(datum, m, xi))
                .collect::<Result<Vec<_>>>()
        };
        let rows: Vec<Vec<Complex64>> = pts.iter().map(|p| basis(p)).collect::<Result<_>>()?;
        let rhs: Vec<Complex64> = pts
            .iter()
            .map(|p| table.eval(datum, p))
            .collect::<Result<_>>()?;
        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let sv = a.clone().singular_values();
        let (smax, smin) = sv
            .iter()
            .fold((0.0f64, f64::INFINITY), |(x, y), &s| (x.max(s), y.min(s)));
        if smin < smax * 1e-9 {
            continue;
        }
        let Some(x) = a
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&rhs[..n]))
        else {
            continue;
        };
        let residual = (0..2 * n)
            .map(|k| {
                let fit: Complex64 = rows[k].iter().zip(x.iter()).map(|(m, c)| m * c).sum();
                (fit - rhs[k]).norm()
            })
            .fold(0.0, f64::max);
        return Ok((mus.into_iter().zip(x.iter().cloned()).collect(), residual));
    }
    Err(Error::LinearSolve(
        "no well-conditioned sample set for the monomial expansion".into(),
    ))
}

/// `max |sum_{w in W_0} C(w xi) - W_0(t)|` over `count` random regular points of the alcove.
pub fn macdonald_identity_defect(
    d: &RootDatum,
    t: &TParams<f64>,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let w0 = weyl_poincare_product(d).eval_f64(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let xi = sample_alcove(d, &mut rng, 0.25);
        let mut s = Complex64::new(0.0, 0.0);
        for (wx, _) in weyl_images(d, &xi)? {
            s += c_function(d, &wx, t)?;
        }
        worst = worst.max((s - w0).norm());
    }
    Ok(worst)
}
