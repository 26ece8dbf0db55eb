//! Affine Pieri coefficients, structure constants at general `t`, and the `t = 0` fusion ring.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::affine::{
    affine_value, apply_affine_word, check_level, enumerate_pc, in_alcove, project_to_alcove,
    theta_count,
};
use crate::error::{Error, Result};
use crate::hecke::{HeckeRep, LatticeFunction, Scalar};
use crate::nodes::closed_form_nodes;
use crate::rootdata::{PairKind, RootDatum, Weight};
use crate::spherical::{basis_matrix, basis_matrix_from, orbit_sum_m, weyl_character, BasisMatrix};
use crate::tring::{e_t, h_t, stabilizer_poincare_finite, t_theta, TLaurent, TParams};

/// Solve residual above which a structure-constant expansion is rejected.
pub const SOLVE_TOL: f64 = 1e-6;
/// Distance to the nearest integer accepted for a `t = 0` coefficient.
pub const INTEGER_TOL: f64 = 1e-6;

/// The minuscule fundamental weights followed by the quasi-minuscule weight `vartheta`.
pub fn pieri_weights(datum: &RootDatum) -> Vec<Weight> {
    let mut out = datum.minuscule_weights();
    out.push(datum.quasi_minuscule_weight());
    out
}

pub fn require_pieri_weight(datum: &RootDatum, omega: &Weight) -> Result<()> {
    if omega.is_zero() || datum.is_minuscule(omega) || datum.is_quasi_minuscule(omega) {
        Ok(())
    } else {
        Err(Error::NotQuasiMinuscule(omega.0.clone()))
    }
}

fn require_in_alcove(datum: &RootDatum, lambda: &Weight, c: i64) -> Result<()> {
    check_level(c)?;
    if in_alcove(datum, lambda, c) {
        Ok(())
    } else {
        Err(Error::NotInAlcove {
            weight: lambda.0.clone(),
            level: c,
        })
    }
}

/// `(root index, sign)` when `nu` lies in `W_0 vartheta`.
fn theta_orbit_root(datum: &RootDatum, nu: &Weight) -> Option<(usize, i64)> {
    datum
        .find_root_weight(nu)
        .filter(|&(idx, _)| datum.in_theta_orbit(idx))
}

fn inverse(p: &TLaurent) -> TLaurent {
    p.inv_monomial().expect("monomial")
}

/// `d_{lambda,nu} = theta(lambda+nu) e_t(-nu) h_t^{sign <lambda, hat nu>}` for `nu` in `W_0 vartheta`, else 0.
pub fn d_coef(datum: &RootDatum, lambda: &Weight, nu: &Weight, c: i64) -> Result<TLaurent> {
    require_in_alcove(datum, lambda, c)?;
    let Some((idx, sign)) = theta_orbit_root(datum, nu) else {
        return Ok(TLaurent::zero());
    };
    let theta = theta_count(datum, &(lambda + nu), c) as i64;
    if theta == 0 {
        return Ok(TLaurent::zero());
    }
    let pair = datum.pair_hat(lambda, idx) * sign;
    let h = h_t(datum);
    let hpow = match pair.numer().signum() {
        0 => TLaurent::one(),
        1 => h,
        _ => inverse(&h),
    };
    Ok((&e_t(datum, &-nu) * &hpow).scale(&BigRational::from_integer(theta.into())))
}

/// `U_{lambda,omega}(t)`.
pub fn u_coef(datum: &RootDatum, lambda: &Weight, omega: &Weight, c: i64) -> Result<TLaurent> {
    require_in_alcove(datum, lambda, c)?;
    require_pieri_weight(datum, omega)?;
    let one_minus = &TLaurent::one() - &inverse(&t_theta(datum));
    let mut first = TLaurent::zero();
    let mut second = TLaurent::zero();
    for nu in datum.weyl_orbit(omega)? {
        let proj = project_to_alcove(datum, &(lambda + &nu), c)?;
        if proj.lambda_plus == *lambda {
            first = &first + &proj.t_weight;
        }
        if apply_affine_word(datum, &proj.word, lambda, c) == *lambda {
            second = &second + &d_coef(datum, lambda, &nu, c)?;
        }
    }
    Ok(&first + &(&one_minus * &second))
}

/// `V_{lambda,nu}(t)` by the product over the walls of the alcove through `lambda`.
pub fn v_coef(datum: &RootDatum, lambda: &Weight, nu: &Weight, c: i64) -> Result<TLaurent> {
    require_in_alcove(datum, lambda, c)?;
    let target = lambda + nu;
    if !in_alcove(datum, &target, c) {
        return Err(Error::NotInAlcove {
            weight: target.0,
            level: c,
        });
    }
    let hh = crate::tring::h_hat_t(datum);
    let mut num = TLaurent::one();
    let mut den = TLaurent::one();
    for i in 0..datum.num_positive_roots() {
        let p = datum.pair_hat(lambda, i);
        let q = datum.pair_coroot(nu, i);
        let beta = crate::tring::hat_root(datum, i);
        let x = if p == 0.into() && q > 0 {
            crate::tring::e_hat_t(datum, &beta)?
        } else if p == c.into() && q < 0 {
            let minus: Vec<_> = beta.iter().map(|v| -v).collect();
            &hh * &crate::tring::e_hat_t(datum, &minus)?
        } else {
            continue;
        };
        let t = TLaurent::t(datum.is_long(i));
        num = &num * &(&TLaurent::one() - &(&t * &x));
        den = &den * &(&TLaurent::one() - &x);
    }
    num.div_exact(&den)
}

/// `sum_{eta in W_0 omega, (lambda+eta)_+ = lambda+nu} t[lambda+eta]`, the form `V` takes before
/// Macdonald's product formula is applied.
pub fn v_coef_orbit_sum(
    datum: &RootDatum,
    lambda: &Weight,
    nu: &Weight,
    omega: &Weight,
    c: i64,
) -> Result<TLaurent> {
    let target = lambda + nu;
    let mut s = TLaurent::zero();
    for eta in datum.weyl_orbit(omega)? {
        let proj = project_to_alcove(datum, &(lambda + &eta), c)?;
        if proj.lambda_plus == target {
            s = &s + &proj.t_weight;
        }
    }
    Ok(s)
}

/// `N_{lambda,omega} = #{j : a_j(lambda) = 0, alpha_j in W_0 omega}`.
pub fn n_count(datum: &RootDatum, lambda: &Weight, omega: &Weight, c: i64) -> Result<i64> {
    let orbit = datum.weyl_orbit(omega)?;
    Ok((0..=datum.rank)
        .filter(|&j| {
            affine_value(datum, j, lambda, c) == 0
                && orbit.contains(&datum.affine_simple_gradient(j))
        })
        .count() as i64)
}

/// `c^nu_{lambda,omega}(t)` for `omega` minuscule or quasi-minuscule, keyed by `nu`.
pub fn lr_pieri(
    datum: &RootDatum,
    lambda: &Weight,
    omega: &Weight,
    c: i64,
) -> Result<BTreeMap<Weight, TLaurent>> {
    require_in_alcove(datum, lambda, c)?;
    require_pieri_weight(datum, omega)?;
    let w = stabilizer_poincare_finite(datum, omega)?;
    let zero = Weight::zero(datum.rank);
    let diag = &w * &(&u_coef(datum, lambda, omega, c)? - &u_coef(datum, &zero, omega, c)?);
    let mut out = BTreeMap::new();
    let mut add = |k: Weight, v: TLaurent| {
        let e = out.entry(k).or_insert_with(TLaurent::zero);
        *e = &*e + &v;
    };
    add(lambda.clone(), diag);
    for nu in datum.weyl_orbit(omega)? {
        let target = lambda + &nu;
        if in_alcove(datum, &target, c) {
            add(target, &w * &v_coef(datum, lambda, &nu, c)?);
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// The boxed Pieri rule of the fusion ring: `(N_{0,omega} - N_{lambda,omega}) chi_lambda + sum chi_{lambda+nu}`.
pub fn fusion_pieri(
    datum: &RootDatum,
    lambda: &Weight,
    omega: &Weight,
    c: i64,
) -> Result<BTreeMap<Weight, i64>> {
    require_in_alcove(datum, lambda, c)?;
    require_pieri_weight(datum, omega)?;
    let zero = Weight::zero(datum.rank);
    let mut out = BTreeMap::new();
    out.insert(
        lambda.clone(),
        n_count(datum, &zero, omega, c)? - n_count(datum, lambda, omega, c)?,
    );
    for nu in datum.weyl_orbit(omega)? {
        let target = lambda + &nu;
        if in_alcove(datum, &target, c) {
            *out.entry(target).or_insert(0) += 1;
        }
    }
    out.retain(|_, v| *v != 0);
    Ok(out)
}

/// `max_k |m_omega(e^{i xi_k}) M_lambda(xi_k) - U M_lambda(xi_k) - sum_nu V M_{lambda+nu}(xi_k)|`.
pub fn pieri_identity_check(
    datum: &RootDatum,
    basis: &BasisMatrix,
    lambda: &Weight,
    omega: &Weight,
) -> Result<f64> {
    let c = basis.level;
    let t = &basis.t;
    let u = u_coef(datum, lambda, omega, c)?.eval_f64(t)?;
    let row = |w: &Weight| {
        basis.row(w).ok_or_else(|| Error::NotInAlcove {
            weight: w.0.clone(),
            level: c,
        })
    };
    let own = row(lambda)?;
    let mut others = Vec::new();
    for nu in datum.weyl_orbit(omega)? {
        let target = lambda + &nu;
        if in_alcove(datum, &target, c) {
            others.push((v_coef(datum, lambda, &nu, c)?.eval_f64(t)?, row(&target)?));
        }
    }
    let mut worst = 0.0f64;
    for (k, node) in basis.nodes.iter().enumerate() {
        let m = orbit_sum_m(datum, omega, &node.xi)?;
        let mut r = m * own[k] - u * own[k];
        for (v, other) in &others {
            r -= *v * other[k];
        }
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Defect of the integral-reflection identity in its inverted form: with `f = J g`,
/// `g(lambda+nu) - t[lambda+nu] f(lambda+nu) - d_{lambda,nu} (1 - t_vartheta^{-1}) f(lambda)`.
pub fn iqm_defect<S: Scalar>(
    rep: &HeckeRep<S>,
    g: &LatticeFunction<S>,
    lambda: &Weight,
    nu: &Weight,
) -> Result<S> {
    let datum = rep.datum();
    let c = rep.level();
    let f = rep.intertwiner(g);
    let mu = lambda + nu;
    let d = d_coef(datum, lambda, nu, c)?;
    let one_minus = &TLaurent::one() - &inverse(&t_theta(datum));
    let coef = S::eval_laurent(&(&d * &one_minus), rep.params())?;
    Ok(g.eval(&mu) - rep.t_bracket(&mu) * f.eval(&mu) - coef * f.eval(lambda))
}

/// `|m_omega(e^{i xi}) Phi(lambda) - sum_{nu in W_0 omega} (t[lambda+nu] Phi(lambda+nu) + d (1 - t_vartheta^{-1}) Phi(lambda))|`.
pub fn lomega_residual(
    rep: &HeckeRep<Complex64>,
    phi: &LatticeFunction<Complex64>,
    xi: &[f64],
    lambda: &Weight,
    omega: &Weight,
) -> Result<f64> {
    let datum = rep.datum();
    let c = rep.level();
    let one_minus = &TLaurent::one() - &inverse(&t_theta(datum));
    let at = phi.eval(lambda);
    let mut s = Complex64::zero();
    for nu in datum.weyl_orbit(omega)? {
        let mu = lambda + &nu;
        let d = Complex64::eval_laurent(
            &(&d_coef(datum, lambda, &nu, c)? * &one_minus),
            rep.params(),
        )?;
        s += rep.t_bracket(&mu) * phi.eval(&mu) + d * at;
    }
    Ok((orbit_sum_m(datum, omega, xi)? * at - s).norm())
}

/// Structure constants `c^nu_{lambda,mu}` of the basis `M_lambda` (or `chi_lambda` at `t = 0`) on the nodes.
#[derive(Debug, Clone)]
pub struct StructureTable {
    pub level: i64,
    /// `None` for the `t = 0` fusion ring.
    pub t: Option<TParams<f64>>,
    pub weights: Vec<Weight>,
    /// `values[(i * n + j) * n + k] = c^{w_k}_{w_i, w_j}`.
    pub values: Vec<Complex64>,
    /// Certified integer values at `t = 0`.
    pub integers: Option<Vec<i64>>,
    pub residual: f64,
    /// Twisted level at which negative fusion coefficients are predicted.
    pub negative_expected: bool,
}

impl StructureTable {
    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn index(&self, w: &Weight) -> Option<usize> {
        self.weights.iter().position(|x| x == w)
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let n = self.size();
        self.values[(i * n + j) * n + k]
    }

    pub fn get(&self, lambda: &Weight, mu: &Weight, nu: &Weight) -> Option<Complex64> {
        Some(self.at(self.index(lambda)?, self.index(mu)?, self.index(nu)?))
    }

    pub fn integer(&self, lambda: &Weight, mu: &Weight, nu: &Weight) -> Option<i64> {
        let n = self.size();
        let (i, j, k) = (self.index(lambda)?, self.index(mu)?, self.index(nu)?);
        self.integers.as_ref().map(|v| v[(i * n + j) * n + k])
    }

    pub fn commutativity_defect(&self) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                for k in 0..n {
                    worst = worst.max((self.at(i, j, k) - self.at(j, i, k)).norm());
                }
            }
        }
        worst
    }

    /// `max |sum_s c^s_{i,j} c^l_{s,k} - sum_s c^s_{j,k} c^l_{i,s}|`.
    pub fn associativity_defect(&self) -> f64 {
        let n = self.size();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut worst = 0.0f64;
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let mut a = Complex64::zero();
                            let mut b = Complex64::zero();
                            for s in 0..n {
                                a += self.at(i, j, s) * self.at(s, k, l);
                                b += self.at(j, k, s) * self.at(i, s, l);
                            }
                            worst = worst.max((a - b).norm());
                        }
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max |c^nu_{0,mu} - unit delta_{nu,mu}|` with `unit = W_0(t)`.
    pub fn unit_defect(&self, unit: f64) -> f64 {
        let n = self.size();
        let Some(z) = self.weights.iter().position(Weight::is_zero) else {
            return f64::INFINITY;
        };
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                let expect = if j == k { unit } else { 0.0 };
                worst = worst.max((self.at(z, j, k) - expect).norm());
            }
        }
        worst
    }
}

/// Whether the level forces a negative fusion coefficient: twisted, not simply laced,
/// and `c` a multiple of `<phi,phi>/<vartheta,vartheta>`.
pub fn negative_fusion_expected(datum: &RootDatum, c: i64) -> bool {
    datum.pair == PairKind::Twisted && !datum.is_simply_laced() && c % datum.length_ratio() == 0
}

/// `lambda` in `P_c` with `a_j(lambda) = 0` for every `j` such that `alpha_j` lies in `W_0 vartheta`.
pub fn negative_fusion_weights(datum: &RootDatum, c: i64) -> Result<Vec<Weight>> {
    let orbit = datum.weyl_orbit(&datum.quasi_minuscule_weight())?;
    let js: Vec<usize> = (0..=datum.rank)
        .filter(|&j| orbit.contains(&datum.affine_simple_gradient(j)))
        .collect();
    Ok(enumerate_pc(datum, c)?
        .into_iter()
        .filter(|l| js.iter().all(|&j| affine_value(datum, j, l, c) == 0))
        .collect())
}

fn expand_all(basis: &BasisMatrix) -> Result<(Vec<Complex64>, f64)> {
    let n = basis.rows.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let solved: Vec<(Vec<Complex64>, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let product: Vec<Complex64> = (0..n)
                .map(|k| basis.entries[(i, k)] * basis.entries[(j, k)])
                .collect();
            basis.expand(&product)
        })
        .collect::<Result<_>>()?;
    let residual = solved.iter().fold(0.0f64, |m, (_, r)| m.max(*r));
    if residual > SOLVE_TOL {
        return Err(Error::LinearSolve(format!(
            "structure constant residual {residual:e}"
        )));
    }
    Ok((solved.into_iter().flat_map(|(x, _)| x).collect(), residual))
}

/// Structure constants at fixed `t` from the basis matrix on the solved nodes.
pub fn structure_constants(datum: &RootDatum, c: i64, t: &TParams<f64>) -> Result<StructureTable> {
    t.validate()?;
    structure_constants_from(&basis_matrix(datum, c, t)?)
}

pub fn structure_constants_from(basis: &BasisMatrix) -> Result<StructureTable> {
    let (values, residual) = expand_all(basis)?;
    Ok(StructureTable {
        level: basis.level,
        t: Some(basis.t.clone()),
        weights: basis.rows.clone(),
        values,
        integers: None,
        residual,
        negative_expected: false,
    })
}

/// The fusion ring: Weyl characters on the closed-form `t = 0` nodes, coefficients certified integral.
pub fn fusion_ring(datum: &RootDatum, c: i64) -> Result<StructureTable> {
    let nodes = closed_form_nodes(datum, c)?;
    let rows = enumerate_pc(datum, c)?;
    let entries: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|l| {
            nodes
                .iter()
                .map(|n| weyl_character(datum, l, &n.xi))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let basis = basis_matrix_from(c, TParams::uniform(0.0), rows, nodes, entries)?;
    let (values, residual) = expand_all(&basis)?;
    let integers = values
        .iter()
        .map(|z| {
            let r = z.re.round();
            let off = (z.re - r).abs().max(z.im.abs());
            if off < INTEGER_TOL {
                Ok(r.to_i64().expect("small integer"))
            } else {
                Err(Error::NotInteger {
                    value: z.re,
                    tol: INTEGER_TOL,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StructureTable {
        level: c,
        t: None,
        weights: basis.rows,
        values,
        integers: Some(integers),
        residual,
        negative_expected: negative_fusion_expected(datum, c),
    })
}

/// Accumulates `prod (1 - t^{a}) / (1 - t^{b})` and divides once at the end.
#[derive(Clone)]
struct RatioProduct {
    num: TLaurent,
    den: TLaurent,
}

impl RatioProduct {
    fn new() -> Self {
        RatioProduct {
            num: TLaurent::one(),
            den: TLaurent::one(),
        }
    }

    fn push(&mut self, a: i64, b: i64) {
        let t = TLaurent::t(true);
        self.num = &self.num * &(&TLaurent::one() - &t.pow(a).expect("positive power"));
        self.den = &self.den * &(&TLaurent::one() - &t.pow(b).expect("positive power"));
    }

    fn finish(&self) -> TLaurent {
        self.num
            .div_exact(&self.den)
            .expect("the type A Pieri coefficients are polynomials")
    }
}

fn push_poincare(acc: &mut RatioProduct, m: usize) {
    for j in 1..=m {
        for k in j + 1..=m {
            acc.push((k - j + 1) as i64, (k - j) as i64);
        }
    }
}

/// `S_m(t) = prod_{1 <= j < k <= m} (1 - t^{k-j+1}) / (1 - t^{k-j})` in the long parameter.
pub fn type_a_poincare(m: usize) -> TLaurent {
    let mut acc = RatioProduct::new();
    push_poincare(&mut acc, m);
    acc.finish()
}

/// Partition coordinates `lambda_1 >= ... >= lambda_n = 0` of a weight of `A_{n-1}`.
fn partition(lambda: &Weight) -> Vec<i64> {
    let n = lambda.rank() + 1;
    (0..n).map(|j| lambda.0[j..].iter().sum()).collect()
}

/// The affine Pieri rule for cylindric Hall-Littlewood functions of `sl(n)` at level `c`,
/// returning the coefficient of `R_{lambda + e_J}` for every admissible `J` of size `r`.
pub fn type_a_pieri_affine(lambda: &Weight, r: usize, c: i64) -> BTreeMap<Weight, TLaurent> {
    let n = lambda.rank() + 1;
    let lam = partition(lambda);
    let mut prefactor = RatioProduct::new();
    push_poincare(&mut prefactor, r);
    push_poincare(&mut prefactor, n - r);
    let mut out = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let inj = |j: usize| mask & (1 << j) != 0;
        let shifted: Vec<i64> = (0..n).map(|j| lam[j] + i64::from(inj(j))).collect();
        let fund = Weight((0..n - 1).map(|j| shifted[j] - shifted[j + 1]).collect());
        if !fund.is_dominant() || fund.0.iter().sum::<i64>() > c {
            continue;
        }
        let mut coef = prefactor.clone();
        for j in 0..n {
            for k in j + 1..n {
                let gap = (k - j) as i64;
                if inj(j) && !inj(k) && lam[j] == lam[k] {
                    coef.push(gap + 1, gap);
                }
                if !inj(j) && inj(k) && lam[j] == lam[k] + c {
                    let m = n as i64 - gap;
                    coef.push(m + 1, m);
                }
            }
        }
        let e = out.entry(fund).or_insert_with(TLaurent::zero);
        *e = &*e + &coef.finish();
    }
    out
}

/// The `t = 0` specialization: coefficient 1 on every admissible `lambda + e_J`.
pub fn type_a_pieri_schur(lambda: &Weight, r: usize, c: i64) -> BTreeMap<Weight, i64> {
    type_a_pieri_affine(lambda, r, c)
        .into_iter()
        .map(|(k, v)| {
            (
                k,
                v.limit_at_zero()
                    .ok()
                    .and_then(|q| q.to_integer().to_i64())
                    .unwrap_or(i64::MIN),
            )
        })
        .collect()
}

/// Whether every coefficient of `p` is an integer (useful for the `t = 0` limit of exact tables).
pub fn has_integer_coefficients(p: &TLaurent) -> bool {
    p.terms().all(|(_, c)| c.is_integer())
}

/// Exact value `W_0(t)` of the unit coefficient `c^mu_{0,mu}`.
pub fn unit_coefficient(datum: &RootDatum) -> TLaurent {
    crate::tring::weyl_poincare_product(datum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::stabilizer_generators;
    use crate::hecke::hashed_test_function;
    use crate::rootdata::RootType;
    use crate::tring::{poincare_series, poincare_series_fixing};

    fn datum(ty: RootType, pair: PairKind) -> RootDatum {
        RootDatum::new(ty, pair).unwrap()
    }

    fn all_small() -> Vec<RootDatum> {
        use RootType::*;
        let mut out = Vec::new();
        for ty in [A(1), A(2), A(3), B(2), C(2), G2, B(3), C(3)] {
            for pair in [PairKind::Untwisted, PairKind::Twisted] {
                if pair == PairKind::Twisted && ty.is_simply_laced() {
                    continue;
                }
                out.push(datum(ty, pair));
            }
        }
        out
    }

    fn w(v: &[i64]) -> Weight {
        Weight(v.to_vec())
    }

    #[test]
    fn d_examples() {
        let d = datum(RootType::A(1), PairKind::Untwisted);
        assert_eq!(
            d_coef(&d, &w(&[0]), &w(&[-2]), 2).unwrap(),
            TLaurent::t(true)
        );
        assert!(d_coef(&d, &w(&[1]), &w(&[2]), 2).unwrap().is_zero());
        let d = datum(RootType::A(2), PairKind::Untwisted);
        // minuscule orbit: never a root
        for nu in d.weyl_orbit(&w(&[1, 0])).unwrap() {
            assert!(d_coef(&d, &w(&[0, 0]), &nu, 2).unwrap().is_zero());
        }
    }

    #[test]
    fn u_vanishes_for_minuscule_and_limits_to_minus_n() {
        for d in all_small() {
            for c in 2..=4 {
                for lambda in enumerate_pc(&d, c).unwrap() {
                    for omega in d.minuscule_weights() {
                        assert!(
                            u_coef(&d, &lambda, &omega, c).unwrap().is_zero(),
                            "{} {lambda}",
                            d.label
                        );
                    }
                    let theta = d.quasi_minuscule_weight();
                    let u = u_coef(&d, &lambda, &theta, c).unwrap();
                    let n = n_count(&d, &lambda, &theta, c).unwrap();
                    assert_eq!(
                        u.limit_at_zero().unwrap(),
                        BigRational::from_integer((-n).into()),
                        "{} {lambda}",
                        d.label
                    );
                }
            }
        }
    }

    #[test]
    fn v_three_ways() {
        for d in all_small().into_iter().filter(|d| d.rank <= 2) {
            for c in 2..=4 {
                for lambda in enumerate_pc(&d, c).unwrap() {
                    let gens = stabilizer_generators(&d, &lambda, c);
                    let full = poincare_series(&d, &gens, 10_000).unwrap();
                    for omega in pieri_weights(&d) {
                        for nu in d.weyl_orbit(&omega).unwrap() {
                            if !in_alcove(&d, &(&lambda + &nu), c) {
                                continue;
                            }
                            let v = v_coef(&d, &lambda, &nu, c).unwrap();
                            let quotient = full
                                .div_exact(&poincare_series_fixing(&d, &gens, &nu, 10_000).unwrap())
                                .unwrap();
                            assert_eq!(v, quotient, "{} c={c} {lambda} {nu}", d.label);
                            assert_eq!(v, v_coef_orbit_sum(&d, &lambda, &nu, &omega, c).unwrap());
                            assert_eq!(
                                v.limit_at_zero().unwrap(),
                                BigRational::from_integer(1.into())
                            );
                        }
                    }
                }
            }
        }
        let d = datum(RootType::A(1), PairKind::Untwisted);
        let t = TLaurent::t(true);
        assert_eq!(
            v_coef(&d, &w(&[0]), &w(&[2]), 2).unwrap(),
            &TLaurent::one() + &t
        );
        assert_eq!(v_coef(&d, &w(&[1]), &w(&[-1]), 3).unwrap(), TLaurent::one());
    }

    #[test]
    fn fusion_limit_of_lr_pieri() {
        for d in all_small() {
            for c in 2..=3 {
                for lambda in enumerate_pc(&d, c).unwrap() {
                    for omega in pieri_weights(&d) {
                        let exact = lr_pieri(&d, &lambda, &omega, c).unwrap();
                        let limit: BTreeMap<Weight, i64> = exact
                            .iter()
                            .map(|(k, v)| {
                                (
                                    k.clone(),
                                    v.limit_at_zero().unwrap().to_integer().to_i64().unwrap(),
                                )
                            })
                            .filter(|(_, v)| *v != 0)
                            .collect();
                        assert_eq!(
                            limit,
                            fusion_pieri(&d, &lambda, &omega, c).unwrap(),
                            "{} {lambda} {omega}",
                            d.label
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn integral_reflection_identity_exact() {
        let t = TParams {
            short: BigRational::new(1.into(), 3.into()),
            long: BigRational::new((-1).into(), 2.into()),
        };
        for (d, c) in all_small()
            .into_iter()
            .filter(|d| d.label.rank() <= 2)
            .flat_map(|d| [(d.clone(), 2), (d, 3)])
        {
            let rep = HeckeRep::new(&d, c, t.clone()).unwrap();
            let g = hashed_test_function(7);
            for lambda in enumerate_pc(&d, c).unwrap() {
                for omega in pieri_weights(&d) {
                    for nu in d.weyl_orbit(&omega).unwrap() {
                        assert!(
                            iqm_defect(&rep, &g, &lambda, &nu).unwrap().is_zero(),
                            "{} {lambda} {nu}",
                            d.label
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pieri_identity_and_two_routes() {
        for (d, c) in [
            (datum(RootType::A(2), PairKind::Untwisted), 3),
            (datum(RootType::B(2), PairKind::Twisted), 2),
            (datum(RootType::G2, PairKind::Untwisted), 2),
        ] {
            let t = TParams {
                short: 0.3,
                long: -0.5,
            };
            let basis = basis_matrix(&d, c, &t).unwrap();
            let table = structure_constants_from(&basis).unwrap();
            for lambda in enumerate_pc(&d, c).unwrap() {
                for omega in pieri_weights(&d) {
                    assert!(pieri_identity_check(&d, &basis, &lambda, &omega).unwrap() < 1e-9);
                    let exact = lr_pieri(&d, &lambda, &omega, c).unwrap();
                    for nu in &table.weights {
                        let want = exact.get(nu).map_or(0.0, |p| p.eval_f64(&t).unwrap());
                        let got = table.get(&lambda, &omega, nu).unwrap();
                        assert!(
                            (got - want).norm() < 1e-9,
                            "{} {lambda} {omega} {nu}: {got} vs {want}",
                            d.label
                        );
                    }
                }
            }
            let unit = unit_coefficient(&d).eval_f64(&t).unwrap();
            assert!(table.unit_defect(unit) < 1e-9);
            assert!(table.commutativity_defect() < 1e-10);
            assert!(table.associativity_defect() < 1e-8);
        }
    }

    #[test]
    fn su2_fusion_rules() {
        let d = datum(RootType::A(1), PairKind::Untwisted);
        for c in 2..=6 {
            let table = fusion_ring(&d, c).unwrap();
            for a in 0..=c {
                for b in 0..=c {
                    for e in 0..=c {
                        let expect = i64::from(
                            e >= (a - b).abs()
                                && e <= (a + b).min(2 * c - a - b)
                                && (a + b - e) % 2 == 0,
                        );
                        assert_eq!(table.integer(&w(&[a]), &w(&[b]), &w(&[e])), Some(expect));
                    }
                }
            }
        }
    }

    #[test]
    fn negative_coefficient_twisted_c2() {
        let d = datum(RootType::C(2), PairKind::Twisted);
        assert!(negative_fusion_expected(&d, 2));
        let table = fusion_ring(&d, 2).unwrap();
        let theta = d.quasi_minuscule_weight();
        let predicted = negative_fusion_weights(&d, 2).unwrap();
        assert!(!predicted.is_empty());
        for lambda in predicted {
            assert_eq!(
                table.integer(&lambda, &theta, &lambda),
                Some(-1),
                "{lambda}"
            );
        }
        // untwisted: nonnegative
        let d = datum(RootType::C(2), PairKind::Untwisted);
        let table = fusion_ring(&d, 2).unwrap();
        assert!(table.integers.unwrap().iter().all(|&v| v >= 0));
    }

    #[test]
    fn type_a_affine_pieri() {
        for n in [3usize, 4] {
            let d = datum(RootType::A(n - 1), PairKind::Untwisted);
            for c in 2..=4 {
                for lambda in enumerate_pc(&d, c).unwrap() {
                    for r in 1..n {
                        let omega = Weight::fundamental(n - 1, r);
                        let ours = lr_pieri(&d, &lambda, &omega, c).unwrap();
                        assert_eq!(
                            ours,
                            type_a_pieri_affine(&lambda, r, c),
                            "n={n} c={c} {lambda} r={r}"
                        );
                        let schur: BTreeMap<Weight, i64> = type_a_pieri_schur(&lambda, r, c);
                        assert_eq!(schur, fusion_pieri(&d, &lambda, &omega, c).unwrap());
                    }
                }
            }
        }
    }
}
