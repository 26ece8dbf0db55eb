//! The two-parameter coefficient ring.
//!
//! A root multiplicity function is constant on `W_0`-orbits, so it is fixed by
//! two values `t_short` and `t_long` (only `t_long` matters for simply-laced
//! types, where every root counts as long). Laurent expressions in these two
//! variables are stored with doubled exponents so that the half-integral
//! powers produced by `e_t` stay in integer arithmetic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64 as Q};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rootdata::{RootDatum, Weight};

/// Values of the multiplicity function on the short and long orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct TParams<S> {
    pub short: S,
    pub long: S,
}

impl<S: Clone> TParams<S> {
    pub fn uniform(t: S) -> Self {
        TParams {
            short: t.clone(),
            long: t,
        }
    }

    pub fn get(&self, long: bool) -> S {
        if long {
            self.long.clone()
        } else {
            self.short.clone()
        }
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> TParams<T> {
        TParams {
            short: f(&self.short),
            long: f(&self.long),
        }
    }
}

impl TParams<f64> {
    /// Requires both values in `(-1, 1) \ {0}`.
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_short", self.short), ("t_long", self.long)] {
            if !(t.abs() < 1.0) || t == 0.0 || !t.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: t.to_string(),
                });
            }
        }
        Ok(())
    }
}

impl TParams<BigRational> {
    pub fn to_f64(&self) -> TParams<f64> {
        self.map(|q| q.to_f64().unwrap_or(f64::NAN))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_short", &self.short), ("t_long", &self.long)] {
            if t.is_zero() || t.abs() >= BigRational::one() {
                return Err(Error::InvalidParameter {
                    name,
                    value: t.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Parses `"-0.5"`, `"1/3"`, `"2.5e-1"` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse {s:?} as a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(all);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

/// Laurent polynomial in `t_short^(1/2)`, `t_long^(1/2)` with rational coefficients.
///
/// Keys are `(doubled exponent of t_short, doubled exponent of t_long)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TLaurent {
    terms: BTreeMap<(i64, i64), BigRational>,
}

/// Monomial order used by exact division: total degree first, then the short exponent.
fn order(a: &(i64, i64), b: &(i64, i64)) -> Ordering {
    (a.0 + a.1).cmp(&(b.0 + b.1)).then(a.0.cmp(&b.0))
}

impl TLaurent {
    pub fn zero() -> Self {
        TLaurent::default()
    }

    pub fn one() -> Self {
        TLaurent::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut t = TLaurent::zero();
        t.add_term((0, 0), c);
        t
    }

    pub fn from_integer(c: i64) -> Self {
        TLaurent::constant(BigRational::from_integer(c.into()))
    }

    /// `t_short^(ds/2) t_long^(dl/2)`.
    pub fn monomial(ds: i64, dl: i64) -> Self {
        let mut t = TLaurent::zero();
        t.add_term((ds, dl), BigRational::one());
        t
    }

    /// The parameter `t_alpha` itself for a root of the given length.
    pub fn t(long: bool) -> Self {
        if long {
            TLaurent::monomial(0, 2)
        } else {
            TLaurent::monomial(2, 0)
        }
    }

    fn add_term(&mut self, key: (i64, i64), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, ds: i64, dl: i64) -> BigRational {
        self.terms
            .get(&(ds, dl))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// The exponent pair when `self` is a single monomial with coefficient 1.
    pub fn as_monomial(&self) -> Option<(i64, i64)> {
        match self.terms.iter().next() {
            Some((k, c)) if self.terms.len() == 1 && c.is_one() => Some(*k),
            _ => None,
        }
    }

    pub fn scale(&self, c: &BigRational) -> TLaurent {
        if c.is_zero() {
            return TLaurent::zero();
        }
        TLaurent {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    fn shift(&self, ds: i64, dl: i64) -> TLaurent {
        TLaurent {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| ((k.0 + ds, k.1 + dl), v.clone()))
                .collect(),
        }
    }

    /// Integer power; negative powers are only defined for monomials.
    pub fn pow(&self, k: i64) -> Result<TLaurent> {
        if k < 0 {
            let inv = self.inv_monomial().ok_or(Error::InexactDivision)?;
            return inv.pow(-k);
        }
        let mut out = TLaurent::one();
        for _ in 0..k {
            out = &out * self;
        }
        Ok(out)
    }

    /// Inverse of a monomial `c t^a`.
    pub fn inv_monomial(&self) -> Option<TLaurent> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        let mut t = TLaurent::zero();
        t.add_term((-k.0, -k.1), c.recip());
        Some(t)
    }

    fn leading(&self) -> Option<((i64, i64), BigRational)> {
        self.terms
            .iter()
            .max_by(|a, b| order(a.0, b.0))
            .map(|(k, v)| (*k, v.clone()))
    }

    fn trailing(&self) -> Option<(i64, i64)> {
        self.terms.keys().min_by(|a, b| order(a, b)).copied()
    }

    /// Exact quotient `self / d`; fails unless `d` divides `self` in the Laurent ring.
    pub fn div_exact(&self, d: &TLaurent) -> Result<TLaurent> {
        let (dl_key, dl_coef) = d.leading().ok_or(Error::InexactDivision)?;
        let d_trail = d.trailing().expect("nonzero divisor");
        let mut rem = self.clone();
        let mut quot = TLaurent::zero();
        let floor = match self.trailing() {
            Some(k) => (k.0 - d_trail.0, k.1 - d_trail.1),
            None => return Ok(quot),
        };
        while let Some((rk, rc)) = rem.leading() {
            let qk = (rk.0 - dl_key.0, rk.1 - dl_key.1);
            if order(&qk, &floor) == Ordering::Less {
                return Err(Error::InexactDivision);
            }
            let qc = rc / &dl_coef;
            let step = d.shift(qk.0, qk.1).scale(&qc);
            rem = &rem - &step;
            quot.add_term(qk, qc);
        }
        Ok(quot)
    }

    fn check_integral(&self, why: &str) -> Result<()> {
        if self.terms.keys().any(|k| k.0 % 2 != 0 || k.1 % 2 != 0) {
            return Err(Error::HalfIntegralExponent(why.to_string()));
        }
        Ok(())
    }

    /// Double-precision value; half-integral powers need nonnegative parameters.
    pub fn eval_f64(&self, t: &TParams<f64>) -> Result<f64> {
        let mut s = 0.0;
        for (k, c) in &self.terms {
            let f = |base: f64, e: i64| -> Result<f64> {
                if e % 2 == 0 {
                    Ok(base.powi((e / 2) as i32))
                } else if base > 0.0 {
                    Ok(base.powf(e as f64 / 2.0))
                } else {
                    Err(Error::HalfIntegralExponent(format!("t = {base}")))
                }
            };
            s += c.to_f64().unwrap_or(f64::NAN) * f(t.short, k.0)? * f(t.long, k.1)?;
        }
        Ok(s)
    }

    /// Exact value at rational parameters; requires integral exponents.
    pub fn eval_exact(&self, t: &TParams<BigRational>) -> Result<BigRational> {
        self.check_integral(&format!("t = ({}, {})", t.short, t.long))?;
        let mut s = BigRational::zero();
        for (k, c) in &self.terms {
            let p = |base: &BigRational, e: i64| -> BigRational {
                let m = num_traits::pow(base.clone(), (e.unsigned_abs() / 2) as usize);
                if e < 0 {
                    m.recip()
                } else {
                    m
                }
            };
            s += c * p(&t.short, k.0) * p(&t.long, k.1);
        }
        Ok(s)
    }

    /// Value at `t_short = t_long = 0`; every surviving term must have nonnegative exponents.
    pub fn limit_at_zero(&self) -> Result<BigRational> {
        if self.terms.keys().any(|k| k.0 < 0 || k.1 < 0) {
            return Err(Error::NoLimit);
        }
        Ok(self.coefficient(0, 0))
    }

    /// Value at `t_short = t_long = 1`.
    pub fn at_one(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |a, b| a + b)
    }
}

impl Add for &TLaurent {
    type Output = TLaurent;
    fn add(self, rhs: &TLaurent) -> TLaurent {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, v.clone());
        }
        out
    }
}

impl Sub for &TLaurent {
    type Output = TLaurent;
    fn sub(self, rhs: &TLaurent) -> TLaurent {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, -v.clone());
        }
        out
    }
}

impl Mul for &TLaurent {
    type Output = TLaurent;
    fn mul(self, rhs: &TLaurent) -> TLaurent {
        let mut out = TLaurent::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term((a.0 + b.0, a.1 + b.1), x * y);
            }
        }
        out
    }
}

impl Neg for &TLaurent {
    type Output = TLaurent;
    fn neg(self) -> TLaurent {
        self.scale(&-BigRational::one())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for TLaurent {
            type Output = TLaurent;
            fn $f(self, rhs: TLaurent) -> TLaurent {
                (&self).$f(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for TLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let power = |name: &str, e: i64| -> String {
            match e {
                0 => String::new(),
                2 => name.to_string(),
                e if e % 2 == 0 => format!("{name}^{}", e / 2),
                e => format!("{name}^({e}/2)"),
            }
        };
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            let vars: Vec<String> = [power("ts", k.0), power("tl", k.1)]
                .into_iter()
                .filter(|s| !s.is_empty())
                .collect();
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl FromStr for TParams<BigRational> {
    type Err = Error;

    /// `"0.3"` for a uniform parameter or `"short,long"`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(',') {
            Some((a, b)) => Ok(TParams {
                short: parse_rational(a)?,
                long: parse_rational(b)?,
            }),
            None => Ok(TParams::uniform(parse_rational(s)?)),
        }
    }
}

/// `e_t(nu) = prod_{alpha > 0} t_alpha^{<nu, alpha^vee>/2}`.
pub fn e_t(datum: &RootDatum, nu: &Weight) -> TLaurent {
    let (mut ds, mut dl) = (0, 0);
    for (i, r) in datum.positive_roots.iter().enumerate() {
        let p = datum.pair_coroot(nu, i);
        if r.long {
            dl += p;
        } else {
            ds += p;
        }
    }
    TLaurent::monomial(ds, dl)
}

/// `hat alpha` for a positive root, in simple-root coordinates.
pub fn hat_root(datum: &RootDatum, idx: usize) -> Vec<Q> {
    let s = datum.hat_scale(&datum.positive_roots[idx]);
    datum.positive_roots[idx]
        .coeffs
        .iter()
        .map(|&k| Q::from_integer(k) * s)
        .collect()
}

/// `hat e_t(eta) = prod_{beta in hat R_0^+} t_beta^{<eta, beta^vee>/2}` for `eta` in simple-root coordinates.
pub fn e_hat_t(datum: &RootDatum, eta: &[Q]) -> Result<TLaurent> {
    let (mut ds, mut dl) = (Q::zero(), Q::zero());
    for r in &datum.positive_roots {
        let c: Vec<Q> = r.coeffs.iter().map(|&k| Q::from_integer(k)).collect();
        // <eta, hat alpha^vee> = <eta, alpha^vee> / s_alpha
        let p = Q::from_integer(2) * datum.inner(eta, &c) / r.norm / datum.hat_scale(r);
        if r.long {
            dl += p;
        } else {
            ds += p;
        }
    }
    if !ds.is_integer() || !dl.is_integer() {
        return Err(Error::HalfIntegralExponent(format!(
            "{eta:?} is not in the hat root lattice"
        )));
    }
    Ok(TLaurent::monomial(ds.to_integer(), dl.to_integer()))
}

pub fn t_theta(datum: &RootDatum) -> TLaurent {
    TLaurent::t(datum.is_long(datum.theta))
}

/// `t_j` for the affine simple root `a_j`, `0 <= j <= n`.
pub fn t_simple(datum: &RootDatum, j: usize) -> TLaurent {
    TLaurent::t(datum.affine_simple_is_long(j))
}

/// `h_t = t_{alpha_0} e_t(-alpha_0)`; this is `t_vartheta e_t(-alpha_0)` unless `alpha_0 = -phi` is long.
pub fn h_t(datum: &RootDatum) -> TLaurent {
    &t_simple(datum, 0) * &e_t(datum, &datum.positive_roots[datum.alpha0].weight)
}

/// `hat h_t = t_{alpha_0} hat e_t(-alpha_0^vee)`.
pub fn h_hat_t(datum: &RootDatum) -> TLaurent {
    let eta = hat_root(datum, datum.alpha0);
    let e = e_hat_t(datum, &eta).expect("-alpha_0^vee lies in the hat root lattice");
    &t_simple(datum, 0) * &e
}

/// Linear part `s'_j` of an affine simple reflection acting on a weight.
pub fn linear_reflection(datum: &RootDatum, j: usize, x: &Weight) -> Weight {
    if j == 0 {
        datum.reflect(datum.alpha0, x)
    } else {
        datum.reflect_simple(j, x)
    }
}

/// Elements of the group generated by `{s_j : j in gens}`, each with a reduced word and its `t_w`.
///
/// The generators must form a simple system of a finite reflection group (any proper subset of
/// `0..=n` does). Elements are identified by the images of the generating roots.
pub fn enumerate_parabolic(
    datum: &RootDatum,
    gens: &[usize],
    cap: usize,
) -> Result<Vec<(Vec<usize>, TLaurent)>> {
    let roots: Vec<Weight> = gens
        .iter()
        .map(|&j| datum.affine_simple_gradient(j))
        .collect();
    let mut seen: HashMap<Vec<Weight>, usize> = HashMap::new();
    let mut out: Vec<(Vec<usize>, TLaurent)> = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(roots, 0);
    out.push((Vec::new(), TLaurent::one()));
    queue.push_back(0usize);
    while let Some(idx) = queue.pop_front() {
        for &j in gens {
            // images of w s_j: apply s_j first, i.e. w(s_j x)
            let next: Vec<Weight> = gens
                .iter()
                .map(|&k| {
                    let x = linear_reflection(datum, j, &datum.affine_simple_gradient(k));
                    apply_word(datum, &out[idx].0, &x)
                })
                .collect();
            if !seen.contains_key(&next) {
                if out.len() >= cap {
                    return Err(Error::GroupTooLarge(cap));
                }
                let mut word = out[idx].0.clone();
                word.push(j);
                let tw = &out[idx].1 * &t_simple(datum, j);
                seen.insert(next.clone(), out.len());
                out.push((word, tw));
                queue.push_back(out.len() - 1);
            }
        }
    }
    Ok(out)
}

/// `s'_{w_1} ... s'_{w_k} x`.
pub fn apply_word(datum: &RootDatum, word: &[usize], x: &Weight) -> Weight {
    word.iter()
        .rev()
        .fold(x.clone(), |acc, &j| linear_reflection(datum, j, &acc))
}

/// Generalized Poincare series `sum_{w in G} t_w` of the parabolic subgroup generated by `gens`.
pub fn poincare_series(datum: &RootDatum, gens: &[usize], cap: usize) -> Result<TLaurent> {
    Ok(enumerate_parabolic(datum, gens, cap)?
        .iter()
        .fold(TLaurent::zero(), |acc, (_, t)| &acc + t))
}

/// Poincare series of the elements of `<s_j : j in gens>` whose linear part fixes `nu`.
pub fn poincare_series_fixing(
    datum: &RootDatum,
    gens: &[usize],
    nu: &Weight,
    cap: usize,
) -> Result<TLaurent> {
    Ok(enumerate_parabolic(datum, gens, cap)?
        .iter()
        .filter(|(w, _)| apply_word(datum, w, nu) == *nu)
        .fold(TLaurent::zero(), |acc, (_, t)| &acc + t))
}

/// `W_0(t)` by Macdonald's product `prod_{alpha > 0} (1 - t_alpha e_t(alpha)) / (1 - e_t(alpha))`.
pub fn weyl_poincare_product(datum: &RootDatum) -> TLaurent {
    let mut num = TLaurent::one();
    let mut den = TLaurent::one();
    for (i, r) in datum.positive_roots.iter().enumerate() {
        let e = e_t(datum, &datum.positive_roots[i].weight);
        num = &num * &(&TLaurent::one() - &(&TLaurent::t(r.long) * &e));
        den = &den * &(&TLaurent::one() - &e);
    }
    num.div_exact(&den)
        .expect("Macdonald's product is a polynomial")
}

/// `W_{0;omega}(t)` for a dominant weight, by enumeration of its stabilizer.
pub fn stabilizer_poincare_finite(datum: &RootDatum, omega: &Weight) -> Result<TLaurent> {
    let gens: Vec<usize> = (1..=datum.rank).filter(|&j| omega.0[j - 1] == 0).collect();
    poincare_series(datum, &gens, 1_000_000)
}
