//! Integral-reflection representation of the affine Hecke algebra on functions `P -> S`.
//!
//! Operator images are never tabulated: a [`LatticeFunction`] is a node in an
//! immutable expression graph (evaluator, `T_j` applied to a child, the
//! intertwiner applied to a child, or a linear combination), and each node
//! memoizes the points it has been asked for. Values at one point of `T_j f`
//! need `f` along one root string, so every identity can be checked pointwise
//! with finite work.
//!
//! Graphs use `Rc` and `RefCell` memo tables and therefore stay on the thread
//! that built them; parallel callers build one graph per task.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::rc::Rc;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::affine::{affine_value, check_level, project_to_alcove};
use crate::error::Result;
use crate::rootdata::{dot, RootDatum, Weight};
use crate::tring::{TLaurent, TParams};

/// Coefficient field of lattice functions: exact rationals or complex doubles.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_rational(q: &BigRational) -> Self;
    fn recip(&self) -> Self;
    fn eval_laurent(p: &TLaurent, t: &TParams<Self>) -> Result<Self>;
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn recip(&self) -> Self {
        num_traits::Inv::inv(self.clone())
    }

    fn eval_laurent(p: &TLaurent, t: &TParams<Self>) -> Result<Self> {
        p.eval_exact(t)
    }
}

impl Scalar for Complex64 {
    fn from_rational(q: &BigRational) -> Self {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn recip(&self) -> Self {
        self.inv()
    }

    fn eval_laurent(p: &TLaurent, t: &TParams<Self>) -> Result<Self> {
        Ok(Complex64::new(p.eval_f64(&t.map(|z| z.re))?, 0.0))
    }
}

struct RepInner<S> {
    datum: RootDatum,
    c: i64,
    t: TParams<S>,
}

/// The action `T_j -> t_j s_j + (t_j - 1) J_j` at level `c` with parameters `t`.
pub struct HeckeRep<S>(Rc<RepInner<S>>);

impl<S> Clone for HeckeRep<S> {
    fn clone(&self) -> Self {
        HeckeRep(Rc::clone(&self.0))
    }
}

type Chains<S> = RefCell<HashMap<Vec<usize>, LatticeFunction<S>>>;

enum Kind<S: Scalar> {
    Eval {
        tag: &'static str,
        f: Box<dyn Fn(&Weight) -> S>,
    },
    ApplyT {
        rep: HeckeRep<S>,
        j: usize,
        inner: LatticeFunction<S>,
    },
    Intertwiner {
        rep: HeckeRep<S>,
        inner: LatticeFunction<S>,
        chains: Chains<S>,
    },
    Combination(Vec<(S, LatticeFunction<S>)>),
}

struct FnNode<S: Scalar> {
    kind: Kind<S>,
    memo: RefCell<HashMap<Weight, S>>,
}

/// A lazily evaluated, memoized function on the weight lattice.
pub struct LatticeFunction<S: Scalar>(Rc<FnNode<S>>);

impl<S: Scalar> Clone for LatticeFunction<S> {
    fn clone(&self) -> Self {
        LatticeFunction(Rc::clone(&self.0))
    }
}

impl<S: Scalar> fmt::Debug for LatticeFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LatticeFunction({}, {} cached)",
            self.provenance(),
            self.0.memo.borrow().len()
        )
    }
}

impl<S: Scalar> LatticeFunction<S> {
    fn new(kind: Kind<S>) -> Self {
        LatticeFunction(Rc::new(FnNode {
            kind,
            memo: RefCell::new(HashMap::new()),
        }))
    }

    pub fn from_fn(tag: &'static str, f: impl Fn(&Weight) -> S + 'static) -> Self {
        LatticeFunction::new(Kind::Eval {
            tag,
            f: Box::new(f),
        })
    }

    /// The function `mu -> [mu = lambda]`.
    pub fn delta(lambda: Weight) -> Self {
        LatticeFunction::from_fn(
            "delta",
            move |mu| if *mu == lambda { S::one() } else { S::zero() },
        )
    }

    pub fn combination(terms: Vec<(S, LatticeFunction<S>)>) -> Self {
        LatticeFunction::new(Kind::Combination(terms))
    }

    pub fn provenance(&self) -> &'static str {
        match &self.0.kind {
            Kind::Eval { tag, .. } => tag,
            Kind::ApplyT { .. } => "operator-applied",
            Kind::Intertwiner { .. } => "intertwiner",
            Kind::Combination(_) => "combination",
        }
    }

    pub fn cached_points(&self) -> usize {
        self.0.memo.borrow().len()
    }

    pub fn eval(&self, lambda: &Weight) -> S {
        if let Some(v) = self.0.memo.borrow().get(lambda) {
            return v.clone();
        }
        let v = self.compute(lambda);
        self.0.memo.borrow_mut().insert(lambda.clone(), v.clone());
        v
    }

    fn compute(&self, lambda: &Weight) -> S {
        match &self.0.kind {
            Kind::Eval { f, .. } => f(lambda),
            Kind::Combination(terms) => terms
                .iter()
                .fold(S::zero(), |acc, (c, g)| acc + c.clone() * g.eval(lambda)),
            Kind::ApplyT { rep, j, inner } => rep.t_action(*j, inner, lambda),
            Kind::Intertwiner { rep, inner, chains } => {
                let d = &rep.0.datum;
                let proj =
                    project_to_alcove(d, lambda, rep.0.c).expect("alcove projection terminates");
                let chain = chain_for(rep, inner, chains, &proj.word);
                let tw = proj.word.iter().fold(S::one(), |acc, &j| acc * rep.t_j(j));
                chain.eval(&proj.lambda_plus) * tw.recip()
            }
        }
    }
}

/// `T_{j_l} ... T_{j_1} f` for `word = [j_1, ..., j_l]`, built along shared prefixes.
fn chain_for<S: Scalar>(
    rep: &HeckeRep<S>,
    base: &LatticeFunction<S>,
    chains: &Chains<S>,
    word: &[usize],
) -> LatticeFunction<S> {
    if word.is_empty() {
        return base.clone();
    }
    if let Some(f) = chains.borrow().get(word) {
        return f.clone();
    }
    let prev = chain_for(rep, base, chains, &word[..word.len() - 1]);
    let f = rep.apply_t(word[word.len() - 1], &prev);
    chains.borrow_mut().insert(word.to_vec(), f.clone());
    f
}

impl<S: Scalar> HeckeRep<S> {
    pub fn new(datum: &RootDatum, c: i64, t: TParams<S>) -> Result<Self> {
        check_level(c)?;
        Ok(HeckeRep(Rc::new(RepInner {
            datum: datum.clone(),
            c,
            t,
        })))
    }

    pub fn datum(&self) -> &RootDatum {
        &self.0.datum
    }

    pub fn level(&self) -> i64 {
        self.0.c
    }

    pub fn params(&self) -> &TParams<S> {
        &self.0.t
    }

    /// `t_j` for `0 <= j <= n`.
    pub fn t_j(&self, j: usize) -> S {
        self.0.t.get(self.0.datum.affine_simple_is_long(j))
    }

    /// `t[lambda]`.
    pub fn t_bracket(&self, lambda: &Weight) -> S {
        let proj = project_to_alcove(&self.0.datum, lambda, self.0.c)
            .expect("alcove projection terminates");
        proj.word.iter().fold(S::one(), |acc, &j| acc * self.t_j(j))
    }

    fn t_action(&self, j: usize, f: &LatticeFunction<S>, lambda: &Weight) -> S {
        let d = &self.0.datum;
        let a = affine_value(d, j, lambda, self.0.c);
        let tj = self.t_j(j);
        if a == 0 {
            return tj * f.eval(lambda);
        }
        let g = d.affine_simple_gradient(j);
        let shifted = |k: i64| Weight(lambda.0.iter().zip(&g.0).map(|(x, y)| x + k * y).collect());
        let reflected = f.eval(&shifted(-a));
        let string = if a > 0 {
            -(1..=a).fold(S::zero(), |acc, k| acc + f.eval(&shifted(-k)))
        } else {
            (0..-a).fold(S::zero(), |acc, k| acc + f.eval(&shifted(k)))
        };
        tj.clone() * reflected + (tj - S::one()) * string
    }

    /// `T_j f`.
    pub fn apply_t(&self, j: usize, f: &LatticeFunction<S>) -> LatticeFunction<S> {
        LatticeFunction::new(Kind::ApplyT {
            rep: self.clone(),
            j,
            inner: f.clone(),
        })
    }

    /// `T_w f = T_{word[0]} T_{word[1]} ... f`: the last letter acts first.
    pub fn apply_word(&self, word: &[usize], f: &LatticeFunction<S>) -> LatticeFunction<S> {
        word.iter()
            .rev()
            .fold(f.clone(), |g, &j| self.apply_t(j, &g))
    }

    /// The affine intertwiner `(J f)(lambda) = t[lambda]^{-1} (T_{w_lambda} f)(lambda_+)`.
    pub fn intertwiner(&self, f: &LatticeFunction<S>) -> LatticeFunction<S> {
        LatticeFunction::new(Kind::Intertwiner {
            rep: self.clone(),
            inner: f.clone(),
            chains: RefCell::new(HashMap::new()),
        })
    }

    /// `sum_{v in W_0} T_v f`, using the lexicographically smallest reduced word of each `v`.
    pub fn symmetrize(&self, f: &LatticeFunction<S>) -> Result<LatticeFunction<S>> {
        let group = self.0.datum.weyl_group(WEYL_CAP)?;
        let mut cache: HashMap<Vec<usize>, LatticeFunction<S>> = HashMap::new();
        cache.insert(Vec::new(), f.clone());
        // suffixes of these words are again canonical, so shorter words are already cached
        let mut terms = Vec::with_capacity(group.len());
        for w in &group {
            let g = build_suffix(self, &mut cache, &w.word);
            terms.push((S::one(), g));
        }
        Ok(LatticeFunction::combination(terms))
    }
}

/// Largest finite Weyl group the operator route will enumerate.
pub const WEYL_CAP: usize = 2000;

fn build_suffix<S: Scalar>(
    rep: &HeckeRep<S>,
    cache: &mut HashMap<Vec<usize>, LatticeFunction<S>>,
    word: &[usize],
) -> LatticeFunction<S> {
    if let Some(f) = cache.get(word) {
        return f.clone();
    }
    let tail = build_suffix(rep, cache, &word[1..]);
    let f = rep.apply_t(word[0], &tail);
    cache.insert(word.to_vec(), f.clone());
    f
}

/// Plane wave `lambda -> e^{i <lambda, xi>}` with `xi` in the orthonormal frame.
pub fn plane_wave(datum: &RootDatum, xi: &[f64]) -> LatticeFunction<Complex64> {
    let pairings: Vec<f64> = datum.frame.fundamental.iter().map(|w| dot(w, xi)).collect();
    LatticeFunction::from_fn("plane wave", move |lambda| {
        let phase: f64 = lambda
            .0
            .iter()
            .zip(&pairings)
            .map(|(&k, p)| k as f64 * p)
            .sum();
        Complex64::from_polar(1.0, phase)
    })
}

impl HeckeRep<Complex64> {
    /// `phi_xi = sum_{v in W_0} T_v e^{i xi}`.
    pub fn phi(&self, xi: &[f64]) -> Result<LatticeFunction<Complex64>> {
        self.symmetrize(&plane_wave(&self.0.datum, xi))
    }

    /// `Phi_xi = J phi_xi`.
    #[allow(non_snake_case)]
    pub fn Phi(&self, xi: &[f64]) -> Result<LatticeFunction<Complex64>> {
        Ok(self.intertwiner(&self.phi(xi)?))
    }
}

/// Deterministic integer-valued test function with values in `-10..=10`.
pub fn hashed_test_function(seed: u64) -> LatticeFunction<BigRational> {
    LatticeFunction::from_fn("hashed", move |lambda| {
        let mut h = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
        for &x in &lambda.0 {
            h ^= x as u64;
            h = h
                .wrapping_mul(0x1000_0000_01B3)
                .rotate_left(29)
                .wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
        BigRational::from_integer((((h >> 40) % 21) as i64 - 10).into())
    })
}

/// Uniform random lattice points in `[-radius, radius]^n`.
pub fn sample_lattice_points(n: usize, count: usize, radius: i64, seed: u64) -> Vec<Weight> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Weight((0..n).map(|_| rng.random_range(-radius..=radius)).collect()))
        .collect()
}

/// Number of `(j, lambda)` at which `(T_j - t_j)(T_j + 1) f` does not vanish.
pub fn quadratic_failures<S: Scalar>(
    rep: &HeckeRep<S>,
    f: &LatticeFunction<S>,
    points: &[Weight],
) -> usize {
    let mut bad = 0;
    for j in 0..=rep.datum().rank {
        let tj = rep.t_j(j);
        let tf = rep.apply_t(j, f);
        let ttf = rep.apply_t(j, &tf);
        for lam in points {
            let v =
                ttf.eval(lam) + (S::one() - tj.clone()) * tf.eval(lam) - tj.clone() * f.eval(lam);
            bad += usize::from(!v.is_zero());
        }
    }
    bad
}

/// Number of `(j, k, lambda)` at which the braid relation of length `m_jk` fails; the infinite bond is skipped.
pub fn braid_failures<S: Scalar>(
    rep: &HeckeRep<S>,
    f: &LatticeFunction<S>,
    points: &[Weight],
) -> usize {
    let n = rep.datum().rank;
    let mut bad = 0;
    for j in 0..=n {
        for k in (j + 1)..=n {
            let Some(m) = rep.datum().coxeter_exponent(j, k) else {
                continue;
            };
            let word = |a: usize, b: usize| {
                (0..m)
                    .map(|i| if i % 2 == 0 { a } else { b })
                    .collect::<Vec<_>>()
            };
            let lhs = rep.apply_word(&word(j, k), f);
            let rhs = rep.apply_word(&word(k, j), f);
            bad += points
                .iter()
                .filter(|lam| lhs.eval(lam) != rhs.eval(lam))
                .count();
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::enumerate_pc;
    use crate::rootdata::{PairKind, RootType};
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn exact_rep(ty: RootType, pair: PairKind, c: i64) -> HeckeRep<BigRational> {
        let d = RootDatum::new(ty, pair).unwrap();
        HeckeRep::new(
            &d,
            c,
            TParams {
                short: q(1, 3),
                long: q(-1, 2),
            },
        )
        .unwrap()
    }

    fn sample_points(n: usize, count: usize, radius: i64, seed: u64) -> Vec<Weight> {
        sample_lattice_points(n, count, radius, seed)
    }

    #[test]
    fn explicit_small_strings() {
        let rep = exact_rep(RootType::A(2), PairKind::Untwisted, 3);
        let f = hashed_test_function(7);
        for j in 0..=2 {
            let tf = rep.apply_t(j, &f);
            for lam in sample_points(2, 60, 6, 3) {
                let a = affine_value(rep.datum(), j, &lam, 3);
                let g = rep.datum().affine_simple_gradient(j);
                let minus = |k: i64| &lam - &g.scaled(k);
                let expect = match a {
                    0 => rep.t_j(j) * f.eval(&lam),
                    1 => f.eval(&minus(1)),
                    2 => f.eval(&minus(2)) - (rep.t_j(j) - BigRational::one()) * f.eval(&minus(1)),
                    _ => continue,
                };
                assert_eq!(tf.eval(&lam), expect);
            }
        }
    }

    #[test]
    fn quadratic_relation_exact() {
        let rep = exact_rep(RootType::B(2), PairKind::Twisted, 2);
        assert_eq!(
            quadratic_failures(&rep, &hashed_test_function(1), &sample_points(2, 50, 5, 11)),
            0
        );
    }

    #[test]
    fn braid_relation_exact_g2() {
        let rep = exact_rep(RootType::G2, PairKind::Untwisted, 2);
        assert_eq!(
            braid_failures(&rep, &hashed_test_function(5), &sample_points(2, 30, 4, 17)),
            0
        );
    }

    #[test]
    fn relation_checks_detect_a_wrong_parameter() {
        // T_0 built with the wrong parameter breaks the quadratic relation
        let d = RootDatum::new(RootType::A(1), PairKind::Untwisted).unwrap();
        let rep = HeckeRep::new(&d, 2, TParams::uniform(q(1, 3))).unwrap();
        let f = hashed_test_function(3);
        let tf = rep.apply_t(0, &f);
        let ttf = rep.apply_t(0, &tf);
        let lam = Weight(vec![3]);
        let wrong = q(1, 2);
        let v = ttf.eval(&lam) + (BigRational::one() - wrong.clone()) * tf.eval(&lam)
            - wrong * f.eval(&lam);
        assert!(!v.is_zero());
    }

    #[test]
    fn intertwiner_trivial_on_alcove() {
        let rep = exact_rep(RootType::C(2), PairKind::Untwisted, 3);
        let f = hashed_test_function(2);
        let jf = rep.intertwiner(&f);
        for lam in enumerate_pc(rep.datum(), 3).unwrap() {
            assert_eq!(jf.eval(&lam), f.eval(&lam));
        }
    }

    #[test]
    fn intertwiner_rank_one_example() {
        let d = RootDatum::new(RootType::A(1), PairKind::Untwisted).unwrap();
        let rep = HeckeRep::new(&d, 2, TParams::uniform(q(2, 5))).unwrap();
        let f = hashed_test_function(9);
        let jf = rep.intertwiner(&f);
        let t0f = rep.apply_t(0, &f);
        assert_eq!(
            jf.eval(&Weight(vec![3])),
            t0f.eval(&Weight(vec![1])) * q(5, 2)
        );
    }

    /// Unmemoized `(T_{w_l} ... T_{w_1} f)(lam)`, written directly from the string sums.
    fn brute_word(
        rep: &HeckeRep<BigRational>,
        f: &LatticeFunction<BigRational>,
        word: &[usize],
        lam: &Weight,
    ) -> BigRational {
        let Some((&j, rest)) = word.split_last() else {
            return f.eval(lam);
        };
        let d = rep.datum();
        let a = affine_value(d, j, lam, rep.level());
        let g = d.affine_simple_gradient(j);
        let at = |k: i64| brute_word(rep, f, rest, &(lam + &g.scaled(k)));
        let tj = rep.t_j(j);
        let mut v = tj.clone() * at(-a);
        if a > 0 {
            for k in 1..=a {
                v = v - (tj.clone() - BigRational::one()) * at(-k);
            }
        } else {
            for k in 0..-a {
                v = v + (tj.clone() - BigRational::one()) * at(k);
            }
        }
        v
    }

    #[test]
    fn intertwiner_matches_brute_expansion() {
        let rep = exact_rep(RootType::A(2), PairKind::Untwisted, 2);
        let f = hashed_test_function(4);
        let jf = rep.intertwiner(&f);
        for lam in sample_points(2, 25, 5, 23) {
            let p = project_to_alcove(rep.datum(), &lam, 2).unwrap();
            let tw = p
                .word
                .iter()
                .fold(BigRational::one(), |acc, &j| acc * rep.t_j(j));
            let expect = brute_word(&rep, &f, &p.word, &p.lambda_plus) / tw;
            assert_eq!(jf.eval(&lam), expect, "{lam}");
        }
    }

    #[test]
    fn phi_is_finite_hecke_eigenfunction() {
        let d = RootDatum::new(RootType::B(2), PairKind::Untwisted).unwrap();
        let rep = HeckeRep::new(
            &d,
            3,
            TParams {
                short: Complex64::new(0.3, 0.0),
                long: Complex64::new(-0.6, 0.0),
            },
        )
        .unwrap();
        let phi = rep.phi(&[0.37, 1.21]).unwrap();
        for j in 1..=2 {
            let tphi = rep.apply_t(j, &phi);
            for lam in sample_points(2, 20, 4, 5) {
                let diff = tphi.eval(&lam) - phi.eval(&lam) * rep.t_j(j);
                assert!(diff.norm() < 1e-10, "{lam} {diff}");
            }
        }
    }

    #[test]
    fn memo_is_stable() {
        let rep = exact_rep(RootType::A(2), PairKind::Untwisted, 2);
        let f = rep.intertwiner(&hashed_test_function(3));
        let lam = Weight(vec![5, -3]);
        let a = f.eval(&lam);
        assert!(f.cached_points() >= 1);
        assert_eq!(f.eval(&lam), a);
        assert_eq!(f.provenance(), "intertwiner");
    }

    #[test]
    fn periodic_msf_matches_orbit_formula() {
        use crate::affine::reflect_affine;
        use crate::nodes::solve_all;
        use crate::spherical::msf_value;
        for (ty, pair, c) in [
            (RootType::B(2), PairKind::Twisted, 2),
            (RootType::A(2), PairKind::Untwisted, 3),
            (RootType::G2, PairKind::Untwisted, 2),
        ] {
            let d = RootDatum::new(ty, pair).unwrap();
            let t = TParams {
                short: 0.3,
                long: -0.6,
            };
            let rep = HeckeRep::new(&d, c, t.map(|&x| Complex64::new(x, 0.0))).unwrap();
            for node in solve_all(&d, c, &t).unwrap() {
                let phi = rep.Phi(&node.xi).unwrap();
                for lam in enumerate_pc(&d, c).unwrap() {
                    let m = msf_value(&d, &lam, &node.xi, &t).unwrap();
                    assert!((phi.eval(&lam) - m).norm() < 1e-8, "{ty:?} {lam}");
                }
                // translated points are deep in the alcove walk; see precise::tests for those
                for lam in sample_points(d.rank, 10, 3, 31) {
                    let v = phi.eval(&lam);
                    for j in 0..=d.rank {
                        assert!((phi.eval(&reflect_affine(&d, j, &lam, c)) - v).norm() < 1e-8);
                    }
                }
            }
        }
    }
}
