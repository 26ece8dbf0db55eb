//! Affine roots, the affine Weyl group at level `c`, and the alcoves `P_c`, `hat P_c`.
//!
//! An affine root `a = alpha^vee + m_alpha r c` evaluates as
//! `a(x) = <x, alpha^vee> + m_alpha r c`, so its zero set is the hyperplane
//! `<x, hat alpha> = -r c` and the positive roots cut out the alcove
//! `0 <= <x, beta> <= c` (`beta` in `hat R_0^+`).

use crate::error::{Error, Result};
use crate::rootdata::{CoweightHat, RootDatum, Weight};
use crate::tring::{e_hat_t, h_hat_t, hat_root, poincare_series, t_simple, TLaurent};

pub fn check_level(c: i64) -> Result<()> {
    if c > 1 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(c))
    }
}

/// `sign * alpha^vee + m_alpha r c` for the positive root `alpha = positive_roots[root]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineRoot {
    pub root: usize,
    pub sign: i64,
    pub r: i64,
}

impl AffineRoot {
    pub fn value(&self, datum: &RootDatum, lambda: &Weight, c: i64) -> i64 {
        self.sign * datum.pair_coroot(lambda, self.root) + datum.m_alpha(self.root) * self.r * c
    }

    pub fn is_positive(&self) -> bool {
        self.r >= 1 || (self.r == 0 && self.sign > 0)
    }

    /// `t_{a'}`.
    pub fn t(&self, datum: &RootDatum) -> TLaurent {
        TLaurent::t(datum.is_long(self.root))
    }
}

/// `a_j(lambda)` for the affine simple roots `a_0 = alpha_0^vee + c` and `a_j = alpha_j^vee`.
pub fn affine_value(datum: &RootDatum, j: usize, lambda: &Weight, c: i64) -> i64 {
    if j == 0 {
        datum.pair_alpha0_coroot(lambda) + c
    } else {
        lambda.0[j - 1]
    }
}

/// `s_j lambda = lambda - a_j(lambda) alpha_j`.
pub fn reflect_affine(datum: &RootDatum, j: usize, lambda: &Weight, c: i64) -> Weight {
    let a = affine_value(datum, j, lambda, c);
    if a == 0 {
        return lambda.clone();
    }
    let g = datum.affine_simple_gradient(j);
    Weight(lambda.0.iter().zip(&g.0).map(|(x, y)| x - a * y).collect())
}

/// Applies `s_{word[0]}` first, then `s_{word[1]}`, and so on.
pub fn apply_affine_word(datum: &RootDatum, word: &[usize], lambda: &Weight, c: i64) -> Weight {
    word.iter()
        .fold(lambda.clone(), |x, &j| reflect_affine(datum, j, &x, c))
}

pub fn in_alcove(datum: &RootDatum, lambda: &Weight, c: i64) -> bool {
    lambda.is_dominant()
        && lambda
            .0
            .iter()
            .zip(&datum.marks)
            .map(|(x, m)| x * m)
            .sum::<i64>()
            <= c
}

/// Result of moving a weight into `P_c` along the shortest path.
#[derive(Debug, Clone, PartialEq)]
pub struct AlcoveProjection {
    pub lambda_plus: Weight,
    /// Simple reflections in the order they are applied: `lambda_plus = s_{word[l-1]} ... s_{word[0]} lambda`.
    pub word: Vec<usize>,
    /// `t[lambda]`, the product of `t_j` over the word.
    pub t_weight: TLaurent,
}

/// Reflects at the lowest index `j` with `a_j(lambda) < 0` until the alcove is reached.
pub fn project_to_alcove(datum: &RootDatum, lambda: &Weight, c: i64) -> Result<AlcoveProjection> {
    check_level(c)?;
    let cap: i64 = 8
        + (0..datum.num_positive_roots())
            .map(|i| datum.pair_coroot(lambda, i).abs() / (datum.m_alpha(i) * c) + 1)
            .sum::<i64>();
    let mut x = lambda.clone();
    let mut word = Vec::new();
    let mut t = TLaurent::one();
    loop {
        let neg = (0..=datum.rank).find(|&j| affine_value(datum, j, &x, c) < 0);
        let Some(j) = neg else { break };
        if word.len() as i64 > cap {
            return Err(Error::ProjectionDiverged(lambda.0.clone()));
        }
        x = reflect_affine(datum, j, &x, c);
        word.push(j);
        t = &t * &t_simple(datum, j);
    }
    Ok(AlcoveProjection {
        lambda_plus: x,
        word,
        t_weight: t,
    })
}

/// Positive affine roots taking the value `target` at `lambda`, via the exact scan bound.
fn roots_with(
    datum: &RootDatum,
    lambda: &Weight,
    c: i64,
    pred: impl Fn(i64) -> bool,
    bound: i64,
) -> Vec<AffineRoot> {
    let mut out = Vec::new();
    for i in 0..datum.num_positive_roots() {
        let p = datum.pair_coroot(lambda, i).abs();
        let rmax = (p + bound) / c + 1;
        for sign in [1, -1] {
            for r in 0..=rmax {
                let a = AffineRoot { root: i, sign, r };
                if a.is_positive() && pred(a.value(datum, lambda, c)) {
                    out.push(a);
                }
            }
        }
    }
    out
}

/// `R[lambda] = {a in R^+ : a(lambda) < 0}`.
pub fn r_set(datum: &RootDatum, lambda: &Weight, c: i64) -> Vec<AffineRoot> {
    roots_with(datum, lambda, c, |v| v < 0, 0)
}

/// `theta(lambda) = |{a in R^+ : a(lambda) = -2}|`.
pub fn theta_count(datum: &RootDatum, lambda: &Weight, c: i64) -> usize {
    roots_with(datum, lambda, c, |v| v == -2, 2).len()
}

/// `theta(lambda + nu)` as predicted by the two-case classification for `lambda` in `P_c`
/// and `nu` in the orbit of a minuscule or quasi-minuscule weight.
pub fn theta_classified(datum: &RootDatum, lambda: &Weight, nu: &Weight, c: i64) -> Result<usize> {
    let mu = lambda + nu;
    let proj = project_to_alcove(datum, &mu, c)?;
    if proj.lambda_plus == *lambda {
        return Ok(0);
    }
    let Some((idx, sign)) = datum.find_root_weight(nu) else {
        return Ok(0);
    };
    if !datum.in_theta_orbit(idx) {
        return Ok(0);
    }
    let pair = datum.pair_hat(lambda, idx) * num_rational::Rational64::from_integer(sign);
    let hit = (sign < 0 && pair == 0.into()) || (sign > 0 && pair == c.into());
    Ok(usize::from(hit))
}

/// All `lambda` in `P_c`, in lexicographic order of fundamental coordinates.
pub fn enumerate_pc(datum: &RootDatum, c: i64) -> Result<Vec<Weight>> {
    check_level(c)?;
    Ok(bounded_combinations(&datum.marks, c)
        .into_iter()
        .map(Weight)
        .collect())
}

/// All `mu` in `hat P_c`.
pub fn enumerate_pc_hat(datum: &RootDatum, c: i64) -> Result<Vec<CoweightHat>> {
    check_level(c)?;
    Ok(bounded_combinations(&datum.hat_marks, c)
        .into_iter()
        .map(CoweightHat)
        .collect())
}

fn bounded_combinations(marks: &[i64], c: i64) -> Vec<Vec<i64>> {
    fn go(marks: &[i64], budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == marks.len() {
            out.push(prefix.clone());
            return;
        }
        let m = marks[prefix.len()];
        for k in 0..=budget / m {
            prefix.push(k);
            go(marks, budget - k * m, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(marks, c, &mut Vec::new(), &mut out);
    out
}

/// Indices `j` in `0..=n` with `a_j(lambda) = 0`; they generate the isotropy group `W_lambda`.
pub fn stabilizer_generators(datum: &RootDatum, lambda: &Weight, c: i64) -> Vec<usize> {
    (0..=datum.rank)
        .filter(|&j| affine_value(datum, j, lambda, c) == 0)
        .collect()
}

/// `W_lambda(t)` for `lambda` in `P_c` by Macdonald's product over the walls through `lambda`.
pub fn stabilizer_poincare(datum: &RootDatum, lambda: &Weight, c: i64) -> Result<TLaurent> {
    if !in_alcove(datum, lambda, c) {
        return Err(Error::NotInAlcove {
            weight: lambda.0.clone(),
            level: c,
        });
    }
    let hh = h_hat_t(datum);
    let mut num = TLaurent::one();
    let mut den = TLaurent::one();
    for i in 0..datum.num_positive_roots() {
        let p = datum.pair_hat(lambda, i);
        let beta = hat_root(datum, i);
        let t = TLaurent::t(datum.is_long(i));
        let x = if p == 0.into() {
            e_hat_t(datum, &beta)?
        } else if p == c.into() {
            let minus: Vec<_> = beta.iter().map(|v| -v).collect();
            &hh * &e_hat_t(datum, &minus)?
        } else {
            continue;
        };
        num = &num * &(&TLaurent::one() - &(&t * &x));
        den = &den * &(&TLaurent::one() - &x);
    }
    num.div_exact(&den)
}

/// `W_lambda(t)` by enumeration of the parabolic subgroup.
pub fn stabilizer_poincare_brute(datum: &RootDatum, lambda: &Weight, c: i64) -> Result<TLaurent> {
    poincare_series(datum, &stabilizer_generators(datum, lambda, c), 1_000_000)
}
