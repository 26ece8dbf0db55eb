//! Extended-precision evaluation of `Phi_xi` far from the alcove.
//!
//! `(J f)(lambda)` divides by `t[lambda]`, and the partial products `T_{j_k} ... T_{j_1} phi`
//! grow along the way, so any error in `phi_xi` (rounding, or the error of the node itself)
//! is amplified by up to ~10 per letter of `w_lambda`. Translated points reach word lengths
//! of 25 in rank 3, which no double-based evaluation survives. Here nodes are refined and the
//! Hecke action evaluated in binary fixed point with [`FRAC_BITS`] fractional bits on top of
//! `num-bigint`, including the few transcendental functions this needs.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::rc::Rc;
use std::sync::OnceLock;

use nalgebra::DVector;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::affine::{affine_value, project_to_alcove, reflect_affine};
use crate::error::{Error, Result};
use crate::hecke::{sample_lattice_points, HeckeRep, LatticeFunction, Scalar};
use crate::nodes::{morse_hessian, Node};
use crate::rootdata::{CoweightHat, PairKind, RootDatum, Weight};
use crate::tring::{TLaurent, TParams};

/// Fractional bits of [`Fx`] (about 58 decimal digits).
pub const FRAC_BITS: u32 = 192;

/// Real fixed-point number `value / 2^FRAC_BITS`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fx(pub BigInt);

impl fmt::Debug for Fx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl Fx {
    pub fn zero() -> Fx {
        Fx(BigInt::zero())
    }

    pub fn from_int(k: i64) -> Fx {
        Fx(BigInt::from(k) << FRAC_BITS)
    }

    /// Exact conversion of a double.
    pub fn from_f64(x: f64) -> Fx {
        if x == 0.0 {
            return Fx::zero();
        }
        let bits = x.abs().to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let mant = if exp == 0 {
            (bits & ((1 << 52) - 1)) << 1
        } else {
            (bits & ((1 << 52) - 1)) | (1 << 52)
        };
        let shift = exp - 1075 + FRAC_BITS as i64;
        let m = BigInt::from(mant);
        let v = if shift >= 0 {
            m << shift as u32
        } else {
            m >> (-shift) as u32
        };
        Fx(if x < 0.0 { -v } else { v })
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt) -> Fx {
        Fx((num << FRAC_BITS) / den)
    }

    pub fn from_rational(q: &BigRational) -> Fx {
        Fx::from_ratio(q.numer(), q.denom())
    }

    pub fn from_q64(q: &Rational64) -> Fx {
        Fx::from_ratio(&BigInt::from(*q.numer()), &BigInt::from(*q.denom()))
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.0.bits() as i64;
        let drop = (bits - 64).max(0);
        let top = (&self.0 >> drop as u32).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi((drop - FRAC_BITS as i64) as i32)
    }

    pub fn mul(&self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> FRAC_BITS)
    }

    pub fn mul_int(&self, k: i64) -> Fx {
        Fx(&self.0 * k)
    }

    pub fn div(&self, o: &Fx) -> Fx {
        Fx((&self.0 << FRAC_BITS) / &o.0)
    }

    pub fn div_int(&self, k: i64) -> Fx {
        Fx(&self.0 / k)
    }

    pub fn add(&self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }

    pub fn neg(&self) -> Fx {
        Fx(-&self.0)
    }

    pub fn abs(&self) -> Fx {
        Fx(self.0.abs())
    }

    pub fn sqrt(&self) -> Fx {
        Fx((&self.0 << FRAC_BITS).sqrt())
    }

    pub fn is_negligible(&self) -> bool {
        self.0.bits() < 4
    }
}

/// `arctan(1/n)` by its alternating series.
fn atan_inv(n: i64) -> Fx {
    let n2 = BigInt::from(n * n);
    let mut power = (BigInt::one() << FRAC_BITS) / n;
    let mut sum = power.clone();
    let mut k = 1i64;
    while !power.is_zero() {
        power /= &n2;
        let term = &power / (2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    Fx(sum)
}

/// `pi` by Machin's formula.
pub fn pi() -> &'static Fx {
    static PI: OnceLock<Fx> = OnceLock::new();
    PI.get_or_init(|| atan_inv(5).mul_int(16).sub(&atan_inv(239).mul_int(4)))
}

/// `(sin x, cos x)`.
pub fn sin_cos(x: &Fx) -> (Fx, Fx) {
    let half_pi = Fx(&pi().0 >> 1);
    let k = (x.to_f64() / std::f64::consts::FRAC_PI_2).round() as i64;
    let r = x.sub(&half_pi.mul_int(k));
    let r2 = r.mul(&r);
    let (mut s, mut ts) = (r.clone(), r);
    let (mut c, mut tc) = (Fx::from_int(1), Fx::from_int(1));
    let mut n = 1i64;
    while !(ts.is_negligible() && tc.is_negligible()) {
        let m = 2 * n;
        ts = ts.mul(&r2).div_int(m * (m + 1)).neg();
        tc = tc.mul(&r2).div_int((m - 1) * m).neg();
        s = s.add(&ts);
        c = c.add(&tc);
        n += 1;
    }
    match k.rem_euclid(4) {
        0 => (s, c),
        1 => (c, s.neg()),
        2 => (s.neg(), c.neg()),
        _ => (c.neg(), s),
    }
}

/// `atan2(y, x)` by Newton refinement of the double-precision angle.
pub fn atan2(y: &Fx, x: &Fx) -> Fx {
    let mut a = Fx::from_f64(y.to_f64().atan2(x.to_f64()));
    for _ in 0..4 {
        let (s, c) = sin_cos(&a);
        let g = x.mul(&s).sub(&y.mul(&c));
        let dg = x.mul(&c).add(&y.mul(&s));
        if g.is_negligible() {
            break;
        }
        a = a.sub(&g.div(&dg));
    }
    a
}

/// `v_alpha(x)` in fixed point.
pub fn v_alpha_fx(x: &Fx, t: &Fx) -> Fx {
    let two_pi = pi().mul_int(2);
    let k = (x.to_f64() / (2.0 * std::f64::consts::PI)).round() as i64;
    let y = x.sub(&two_pi.mul_int(k));
    let (s, c) = sin_cos(&Fx(&y.0 >> 1));
    let one = Fx::from_int(1);
    let ratio = one.add(t).div(&one.sub(t));
    atan2(&ratio.mul(&s), &c).mul_int(2).add(&two_pi.mul_int(k))
}

/// Complex fixed-point scalar.
#[derive(Clone, PartialEq)]
pub struct Cfx {
    pub re: Fx,
    pub im: Fx,
}

impl fmt::Debug for Cfx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_c64())
    }
}

impl Cfx {
    pub fn real(x: Fx) -> Self {
        Cfx {
            re: x,
            im: Fx::zero(),
        }
    }

    pub fn from_phase(phase: &Fx) -> Self {
        let (s, c) = sin_cos(phase);
        Cfx { re: c, im: s }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for Cfx {
    type Output = Cfx;
    fn add(self, o: Cfx) -> Cfx {
        Cfx {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }
}

impl Sub for Cfx {
    type Output = Cfx;
    fn sub(self, o: Cfx) -> Cfx {
        Cfx {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }
}

impl Mul for Cfx {
    type Output = Cfx;
    fn mul(self, o: Cfx) -> Cfx {
        Cfx {
            re: Fx((&self.re.0 * &o.re.0 - &self.im.0 * &o.im.0) >> FRAC_BITS),
            im: Fx((&self.re.0 * &o.im.0 + &self.im.0 * &o.re.0) >> FRAC_BITS),
        }
    }
}

impl Neg for Cfx {
    type Output = Cfx;
    fn neg(self) -> Cfx {
        Cfx {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }
}

impl Zero for Cfx {
    fn zero() -> Self {
        Cfx::real(Fx::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.0.is_zero() && self.im.0.is_zero()
    }
}

impl One for Cfx {
    fn one() -> Self {
        Cfx::real(Fx::from_int(1))
    }
}

impl Scalar for Cfx {
    fn from_rational(q: &BigRational) -> Self {
        Cfx::real(Fx::from_rational(q))
    }

    fn recip(&self) -> Self {
        let d = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Cfx {
            re: self.re.div(&d),
            im: self.im.div(&d).neg(),
        }
    }

    fn eval_laurent(p: &TLaurent, t: &TParams<Self>) -> Result<Self> {
        let pow = |x: &Fx, k: i64| -> Result<Fx> {
            let base = if k % 2 == 0 {
                x.clone()
            } else if x.0.is_positive() {
                x.sqrt()
            } else {
                return Err(Error::HalfIntegralExponent(p.to_string()));
            };
            let e = if k % 2 == 0 { k / 2 } else { k };
            let mut acc = Fx::from_int(1);
            for _ in 0..e.abs() {
                acc = acc.mul(&base);
            }
            Ok(if e < 0 {
                Fx::from_int(1).div(&acc)
            } else {
                acc
            })
        };
        let mut acc = Fx::zero();
        for (&(ds, dl), c) in p.terms() {
            let term = Fx::from_rational(c)
                .mul(&pow(&t.short.re, ds)?)
                .mul(&pow(&t.long.re, dl)?);
            acc = acc.add(&term);
        }
        Ok(Cfx::real(acc))
    }
}

fn dot_fx(x: &[Fx], y: &[Fx]) -> Fx {
    x.iter()
        .zip(y)
        .fold(Fx::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
}

/// The orthonormal frame of [`crate::rootdata::Frame`], rebuilt in fixed point.
#[derive(Debug, Clone)]
pub struct FxFrame {
    pub fundamental: Vec<Vec<Fx>>,
    pub roots: Vec<Vec<Fx>>,
    pub hat_roots: Vec<Vec<Fx>>,
    pub hat_fundamental: Vec<Vec<Fx>>,
    pub hat_rho: Vec<Fx>,
}

impl FxFrame {
    pub fn new(datum: &RootDatum) -> Self {
        let n = datum.rank;
        let g: Vec<Vec<Fx>> = datum
            .gram
            .iter()
            .map(|r| r.iter().map(Fx::from_q64).collect())
            .collect();
        let mut l = vec![vec![Fx::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let s = (0..j).fold(Fx::zero(), |acc, k| acc.add(&l[i][k].mul(&l[j][k])));
                l[i][j] = if i == j {
                    g[i][i].sub(&s).sqrt()
                } else {
                    g[i][j].sub(&s).div(&l[j][j])
                };
            }
        }
        let combine = |coeffs: &[Fx]| -> Vec<Fx> {
            (0..n)
                .map(|k| (0..n).fold(Fx::zero(), |acc, i| acc.add(&coeffs[i].mul(&l[i][k]))))
                .collect()
        };
        let fundamental: Vec<Vec<Fx>> = datum
            .fundamental_in_roots
            .iter()
            .map(|row| combine(&row.iter().map(Fx::from_q64).collect::<Vec<_>>()))
            .collect();
        let hat_fundamental: Vec<Vec<Fx>> = (0..n)
            .map(|j| {
                let s = Fx::from_q64(&datum.hat_fundamental_scale(j));
                fundamental[j].iter().map(|x| x.mul(&s)).collect()
            })
            .collect();
        let roots: Vec<Vec<Fx>> = datum
            .positive_roots
            .iter()
            .map(|r| {
                combine(
                    &r.coeffs
                        .iter()
                        .map(|&k| Fx::from_int(k))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let hat_roots = roots
            .iter()
            .zip(&datum.positive_roots)
            .map(|(v, r)| {
                let s = Fx::from_q64(&datum.hat_scale(r));
                v.iter().map(|x| x.mul(&s)).collect()
            })
            .collect();
        let hat_rho = (0..n)
            .map(|k| {
                hat_fundamental
                    .iter()
                    .fold(Fx::zero(), |acc, w| acc.add(&w[k]))
            })
            .collect();
        FxFrame {
            fundamental,
            roots,
            hat_roots,
            hat_fundamental,
            hat_rho,
        }
    }

    fn gradient(
        &self,
        datum: &RootDatum,
        mu: &CoweightHat,
        xi: &[Fx],
        c: i64,
        t: &TParams<Fx>,
    ) -> Vec<Fx> {
        let n = datum.rank;
        let two_pi = pi().mul_int(2);
        let mut g: Vec<Fx> = (0..n)
            .map(|k| {
                let target =
                    mu.0.iter()
                        .enumerate()
                        .fold(self.hat_rho[k].clone(), |acc, (j, &m)| {
                            acc.add(&self.hat_fundamental[j][k].mul_int(m))
                        });
                xi[k].mul_int(c).sub(&two_pi.mul(&target))
            })
            .collect();
        for (idx, (a, ha)) in self.roots.iter().zip(&self.hat_roots).enumerate() {
            let v = v_alpha_fx(&dot_fx(xi, a), &t.get(datum.is_long(idx)));
            for k in 0..n {
                g[k] = g[k].add(&v.mul(&ha[k]));
            }
        }
        g
    }
}

/// A node refined to fixed-point precision.
#[derive(Debug, Clone)]
pub struct PreciseNode {
    pub mu: CoweightHat,
    pub xi: Vec<Fx>,
    pub grad_residual: f64,
}

/// Gradient tolerance of [`refine_node`].
pub const PRECISE_GRAD_TOL: f64 = 1e-50;

/// Newton refinement of a solved node, with the exact-precision gradient and the double Hessian.
pub fn refine_node(
    datum: &RootDatum,
    frame: &FxFrame,
    node: &Node,
    c: i64,
    t: &TParams<f64>,
) -> Result<PreciseNode> {
    let tf = t.map(|&x| Fx::from_f64(x));
    let mut xi: Vec<Fx> = node.xi.iter().map(|&x| Fx::from_f64(x)).collect();
    let mut res = f64::INFINITY;
    for _ in 0..12 {
        let g = frame.gradient(datum, &node.mu, &xi, c, &tf);
        res = g.iter().fold(0.0f64, |m, x| m.max(x.to_f64().abs()));
        if res < PRECISE_GRAD_TOL {
            return Ok(PreciseNode {
                mu: node.mu.clone(),
                xi,
                grad_residual: res,
            });
        }
        let approx: Vec<f64> = xi.iter().map(Fx::to_f64).collect();
        let hess = morse_hessian(datum, &approx, c, t);
        let chol = hess.clone().cholesky().ok_or(Error::Singular)?;
        // solve H s = g in two rounds so that the step carries more than double precision
        let scale = res;
        let gs: Vec<f64> = g.iter().map(|x| x.to_f64() / scale).collect();
        let s1 = chol.solve(&DVector::from_column_slice(&gs));
        let s1_fx: Vec<Fx> = s1.iter().map(|&v| Fx::from_f64(v * scale)).collect();
        for (x, s) in xi.iter_mut().zip(&s1_fx) {
            *x = x.sub(s);
        }
    }
    Err(Error::NoConvergence {
        mu: node.mu.0.clone(),
        residual: res,
    })
}

/// `e^{i<omega_j, xi>}` and its inverse for each fundamental weight.
fn unit_phases(frame: &FxFrame, xi: &[Fx]) -> Vec<(Cfx, Cfx)> {
    frame
        .fundamental
        .iter()
        .map(|w| {
            let z = Cfx::from_phase(&dot_fx(w, xi));
            let inv = Cfx {
                re: z.re.clone(),
                im: z.im.neg(),
            };
            (z, inv)
        })
        .collect()
}

/// `e^{i<lambda, xi>}` as a product of integer powers of the unit phases.
fn phase_at(units: &[(Cfx, Cfx)], lambda: &Weight) -> Cfx {
    lambda
        .0
        .iter()
        .zip(units)
        .fold(Cfx::one(), |acc, (&k, (z, inv))| {
            acc * power(if k >= 0 { z } else { inv }, k.unsigned_abs())
        })
}

fn power(z: &Cfx, mut k: u64) -> Cfx {
    let mut base = z.clone();
    let mut out = Cfx::one();
    while k > 0 {
        if k & 1 == 1 {
            out = out * base.clone();
        }
        k >>= 1;
        if k > 0 {
            base = base.clone() * base;
        }
    }
    out
}

/// `lambda -> e^{i<lambda, xi>}` in fixed point.
pub fn plane_wave_fx(frame: &FxFrame, xi: &[Fx]) -> LatticeFunction<Cfx> {
    let units = unit_phases(frame, xi);
    LatticeFunction::from_fn("plane wave (fixed point)", move |lambda: &Weight| {
        phase_at(&units, lambda)
    })
}

/// `lambda -> sum_{w in W_0} C(w xi) e^{i<lambda, w xi>}` in fixed point. On every `lambda` in `P` this
/// agrees with the operator symmetrization `sum_v T_v e^{i xi}` (checked in the tests), at a fraction of the cost.
pub fn orbit_sum_fx(
    datum: &RootDatum,
    frame: &FxFrame,
    xi: &[Fx],
    t: &TParams<f64>,
) -> Result<LatticeFunction<Cfx>> {
    let units = unit_phases(frame, xi);
    let one = Cfx::one();
    // with u = w^{-1}: C(w xi) = prod_{alpha > 0} (1 - t_alpha e^{-i<xi, u alpha>}) / (1 - e^{-i<xi, u alpha>})
    let mut terms = Vec::new();
    for u in datum.weyl_group(crate::hecke::WEYL_CAP)? {
        let mut coef = Cfx::one();
        for (idx, root) in datum.positive_roots.iter().enumerate() {
            let e = phase_at(&units, &-&datum.act(&u, &root.weight));
            let den = one.clone() - e.clone();
            if den.re.is_negligible() && den.im.is_negligible() {
                return Err(Error::Singular);
            }
            let ta = Cfx::real(Fx::from_f64(t.get(datum.is_long(idx))));
            coef = coef * (one.clone() - ta * e) * den.recip();
        }
        terms.push((u, coef));
    }
    let d = datum.clone();
    Ok(LatticeFunction::from_fn(
        "orbit sum (fixed point)",
        move |lambda: &Weight| {
            terms.iter().fold(Cfx::zero(), |acc, (u, coef)| {
                acc + coef.clone() * phase_at(&units, &d.act(u, lambda))
            })
        },
    ))
}

/// `Phi_xi` for a refined node, evaluated in fixed point.
pub fn precise_phi(
    datum: &RootDatum,
    frame: &FxFrame,
    node: &PreciseNode,
    c: i64,
    t: &TParams<f64>,
) -> Result<LatticeFunction<Cfx>> {
    let rep = HeckeRep::new(datum, c, t.map(|&x| Cfx::real(Fx::from_f64(x))))?;
    Ok(rep.intertwiner(&orbit_sum_fx(datum, frame, &node.xi, t)?))
}

/// Integer matrix on weight coordinates, row-major.
type Mat = Vec<i64>;

fn mat_apply(m: &[i64], lambda: &Weight) -> Weight {
    let n = lambda.0.len();
    Weight(
        (0..n)
            .map(|r| (0..n).map(|k| m[r * n + k] * lambda.0[k]).sum())
            .collect(),
    )
}

fn mat_mul(a: &[i64], b: &[i64], n: usize) -> Mat {
    (0..n * n)
        .map(|i| (0..n).map(|k| a[(i / n) * n + k] * b[k * n + i % n]).sum())
        .collect()
}

fn mat_of(n: usize, f: impl Fn(&Weight) -> Weight) -> Mat {
    let cols: Vec<Weight> = (0..n).map(|k| f(&Weight::fundamental(n, k + 1))).collect();
    (0..n * n).map(|i| cols[i % n].0[i / n]).collect()
}

/// Plane-wave combination `lambda -> sum_M coef_M e^{i<M lambda, xi>}`.
type Waves = BTreeMap<Mat, Cfx>;

struct Generator {
    /// Linear part of `s_j`.
    linear: Mat,
    /// `s_j lambda = linear lambda - shift * gradient`.
    shift: i64,
    gradient: Weight,
    t: Cfx,
}

/// `Phi_xi = J(sum_w C(w xi) e^{i w xi})` evaluated on the frequency side: on plane waves
/// `T_j e^eta = (1 - t) z / (1 - z) e^eta + (t - z) / (1 - z) z^k e^{s_j eta}` with `z = e^{-i<alpha_j, eta>}`,
/// so `T_w` acts on a space of dimension `|W_0|` and far points cost one pass over the word.
pub struct SpectralPhi {
    datum: RootDatum,
    c: i64,
    units: Vec<(Cfx, Cfx)>,
    gens: Vec<Generator>,
    coefs: RefCell<HashMap<(usize, Mat), (Cfx, Cfx)>>,
    chains: RefCell<HashMap<Vec<usize>, Rc<Waves>>>,
}

impl SpectralPhi {
    pub fn new(
        datum: &RootDatum,
        frame: &FxFrame,
        node: &PreciseNode,
        c: i64,
        t: &TParams<f64>,
    ) -> Result<Self> {
        let n = datum.rank;
        let units = unit_phases(frame, &node.xi);
        let one = Cfx::one();
        let mut base = Waves::new();
        for u in datum.weyl_group(crate::hecke::WEYL_CAP)? {
            let mut coef = Cfx::one();
            for (idx, root) in datum.positive_roots.iter().enumerate() {
                let e = phase_at(&units, &-&datum.act(&u, &root.weight));
                let den = one.clone() - e.clone();
                if den.re.is_negligible() && den.im.is_negligible() {
                    return Err(Error::Singular);
                }
                let ta = Cfx::real(Fx::from_f64(t.get(datum.is_long(idx))));
                coef = coef * (one.clone() - ta * e) * den.recip();
            }
            base.insert(mat_of(n, |x| datum.act(&u, x)), coef);
        }
        let zero = Weight(vec![0; n]);
        let gens = (0..=n)
            .map(|j| {
                let shift = affine_value(datum, j, &zero, c);
                let gradient = datum.affine_simple_gradient(j);
                let linear = mat_of(n, |x| {
                    &reflect_affine(datum, j, x, c) + &gradient.scaled(shift)
                });
                let t = Cfx::real(Fx::from_f64(t.get(datum.affine_simple_is_long(j))));
                Generator {
                    linear,
                    shift,
                    gradient,
                    t,
                }
            })
            .collect();
        let mut chains = HashMap::new();
        chains.insert(Vec::new(), Rc::new(base));
        Ok(SpectralPhi {
            datum: datum.clone(),
            c,
            units,
            gens,
            coefs: RefCell::new(HashMap::new()),
            chains: RefCell::new(chains),
        })
    }

    fn coefficients(&self, j: usize, m: &Mat) -> Result<(Cfx, Cfx)> {
        if let Some(v) = self.coefs.borrow().get(&(j, m.clone())) {
            return Ok(v.clone());
        }
        let g = &self.gens[j];
        let z = phase_at(&self.units, &mat_apply(m, &-&g.gradient));
        let one = Cfx::one();
        let den = one.clone() - z.clone();
        if den.re.is_negligible() && den.im.is_negligible() {
            return Err(Error::Singular);
        }
        let inv = den.recip();
        let a = (one - g.t.clone()) * z.clone() * inv.clone();
        let zk = if g.shift >= 0 {
            power(&z, g.shift as u64)
        } else {
            power(
                &Cfx {
                    re: z.re.clone(),
                    im: z.im.neg(),
                },
                g.shift.unsigned_abs(),
            )
        };
        let b = (g.t.clone() - z) * inv * zk;
        self.coefs
            .borrow_mut()
            .insert((j, m.clone()), (a.clone(), b.clone()));
        Ok((a, b))
    }

    /// `T_{word[l-1]} ... T_{word[0]}` applied to the base, memoized along prefixes.
    fn chain(&self, word: &[usize]) -> Result<Rc<Waves>> {
        if let Some(w) = self.chains.borrow().get(word) {
            return Ok(Rc::clone(w));
        }
        let (&j, head) = word.split_last().expect("the empty word is cached");
        let prev = self.chain(head)?;
        let n = self.datum.rank;
        let mut out = Waves::new();
        for (m, coef) in prev.iter() {
            let (a, b) = self.coefficients(j, m)?;
            let slot = out.entry(m.clone()).or_insert_with(Cfx::zero);
            *slot = slot.clone() + a * coef.clone();
            let slot = out
                .entry(mat_mul(m, &self.gens[j].linear, n))
                .or_insert_with(Cfx::zero);
            *slot = slot.clone() + b * coef.clone();
        }
        let out = Rc::new(out);
        self.chains
            .borrow_mut()
            .insert(word.to_vec(), Rc::clone(&out));
        Ok(out)
    }

    pub fn eval(&self, lambda: &Weight) -> Result<Cfx> {
        let proj = project_to_alcove(&self.datum, lambda, self.c)?;
        let waves = self.chain(&proj.word)?;
        let value = waves.iter().fold(Cfx::zero(), |acc, (m, coef)| {
            acc + coef.clone() * phase_at(&self.units, &mat_apply(m, &proj.lambda_plus))
        });
        let tw = proj
            .word
            .iter()
            .fold(Cfx::one(), |acc, &j| acc * self.gens[j].t.clone());
        Ok(value * tw.recip())
    }
}

/// Largest deviation of `Phi_xi` from invariance under `s_0..s_n` and translations by `+- c hat alpha_j^vee`
/// at `count` random points of `[-c, c]^n`, in fixed-point arithmetic.
pub fn invariance_defect(
    d: &RootDatum,
    c: i64,
    t: &TParams<f64>,
    node: &Node,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let frame = FxFrame::new(d);
    let p = refine_node(d, &frame, node, c, t)?;
    let phi = SpectralPhi::new(d, &frame, &p, c, t)?;
    let mut worst = 0.0f64;
    for lam in sample_lattice_points(d.rank, count, c, seed) {
        let v = phi.eval(&lam)?.to_c64();
        for j in 0..=d.rank {
            worst = worst.max((phi.eval(&reflect_affine(d, j, &lam, c))?.to_c64() - v).norm());
        }
        for j in 0..d.rank {
            let step = c * if d.pair == PairKind::Untwisted {
                d.m_alpha(j)
            } else {
                1
            };
            for sign in [-1, 1] {
                let mu = &lam + &d.positive_roots[j].weight.scaled(sign * step);
                worst = worst.max((phi.eval(&mu)?.to_c64() - v).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::solve_node;
    use crate::rootdata::{PairKind, RootType};

    fn close(a: &Fx, b: &Fx, bits: u32) -> bool {
        (&a.0 - &b.0).abs().bits() <= (FRAC_BITS - bits) as u64
    }

    #[test]
    fn pi_and_trig() {
        assert!((pi().to_f64() - std::f64::consts::PI).abs() < 1e-15);
        // sin(pi/6) = 1/2, cos(pi/3) = 1/2
        let (s, _) = sin_cos(&pi().div_int(6));
        let (_, c) = sin_cos(&pi().div_int(3));
        let half = Fx::from_ratio(&BigInt::from(1), &BigInt::from(2));
        assert!(close(&s, &half, 180));
        assert!(close(&c, &half, 180));
        for k in -40..40 {
            let x = Fx::from_f64(k as f64 * 0.37 + 0.011);
            let (s, c) = sin_cos(&x);
            assert!(close(&s.mul(&s).add(&c.mul(&c)), &Fx::from_int(1), 180));
            assert!((s.to_f64() - (k as f64 * 0.37 + 0.011).sin()).abs() < 1e-14);
            let back = atan2(&s, &c);
            let wrapped = x.sub(&pi().mul_int(2).mul_int(
                ((k as f64 * 0.37 + 0.011) / (2.0 * std::f64::consts::PI)).round() as i64,
            ));
            assert!(close(&back, &wrapped, 175), "{k}");
        }
    }

    #[test]
    fn conversions() {
        for x in [0.3, -0.7, 1e-9, 12345.678] {
            assert_eq!(Fx::from_f64(x).to_f64(), x);
        }
        assert!(
            Fx::from_int(2)
                .sqrt()
                .mul(&Fx::from_int(2).sqrt())
                .sub(&Fx::from_int(2))
                .abs()
                .0
                .bits()
                < 4
        );
    }

    #[test]
    fn v_matches_double() {
        for t in [-0.7, 0.3] {
            for x in [-7.0, -1.2, 0.4, 3.0, 9.5] {
                let v = v_alpha_fx(&Fx::from_f64(x), &Fx::from_f64(t)).to_f64();
                assert!((v - crate::nodes::v_alpha(x, t)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn refined_node_is_consistent() {
        let d = RootDatum::new(RootType::C(3), PairKind::Twisted).unwrap();
        let t = TParams {
            short: 0.3,
            long: -0.3,
        };
        let frame = FxFrame::new(&d);
        let node = solve_node(&d, &CoweightHat(vec![1, 0, 1]), 3, &t).unwrap();
        let p = refine_node(&d, &frame, &node, 3, &t).unwrap();
        assert!(p.grad_residual < PRECISE_GRAD_TOL);
        for (a, b) in p.xi.iter().zip(&node.xi) {
            assert!((a.to_f64() - b).abs() < 1e-13);
        }
    }
    #[test]
    fn orbit_sum_equals_operator_symmetrization() {
        use crate::nodes::solve_all;
        for (ty, pair) in [
            (RootType::A(2), PairKind::Untwisted),
            (RootType::B(2), PairKind::Twisted),
            (RootType::G2, PairKind::Untwisted),
        ] {
            let d = RootDatum::new(ty, pair).unwrap();
            let t = TParams {
                short: 0.3,
                long: -0.6,
            };
            let frame = FxFrame::new(&d);
            let node = &solve_all(&d, 2, &t).unwrap()[1];
            let p = refine_node(&d, &frame, node, 2, &t).unwrap();
            let rep = HeckeRep::new(&d, 2, t.map(|&x| Cfx::real(Fx::from_f64(x)))).unwrap();
            let operator = rep.symmetrize(&plane_wave_fx(&frame, &p.xi)).unwrap();
            let closed = orbit_sum_fx(&d, &frame, &p.xi, &t).unwrap();
            for a in -4..=4i64 {
                for b in -4..=4i64 {
                    let lam = Weight(vec![a, b]);
                    let diff = operator.eval(&lam) - closed.eval(&lam);
                    assert!(diff.to_c64().norm() < 1e-40, "{ty:?} {lam}");
                }
            }
        }
    }

    #[test]
    fn spectral_route_matches_lattice_route() {
        use crate::nodes::solve_all;
        for (ty, pair) in [
            (RootType::A(2), PairKind::Untwisted),
            (RootType::B(2), PairKind::Twisted),
            (RootType::G2, PairKind::Untwisted),
        ] {
            let d = RootDatum::new(ty, pair).unwrap();
            let t = TParams {
                short: 0.3,
                long: -0.6,
            };
            let frame = FxFrame::new(&d);
            for node in solve_all(&d, 2, &t).unwrap().iter().take(2) {
                let p = refine_node(&d, &frame, node, 2, &t).unwrap();
                let lattice = precise_phi(&d, &frame, &p, 2, &t).unwrap();
                let spectral = SpectralPhi::new(&d, &frame, &p, 2, &t).unwrap();
                for a in -5..=5i64 {
                    for b in -5..=5i64 {
                        let lam = Weight(vec![a, b]);
                        let diff = (lattice.eval(&lam) - spectral.eval(&lam).unwrap())
                            .to_c64()
                            .norm();
                        assert!(diff < 1e-35, "{ty:?} {lam}: {diff:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn invariance_needs_a_node() {
        use crate::nodes::solve_all;
        let d = RootDatum::new(RootType::B(2), PairKind::Twisted).unwrap();
        let t = TParams {
            short: 0.3,
            long: -0.6,
        };
        let mut node = solve_all(&d, 2, &t).unwrap()[0].clone();
        assert!(invariance_defect(&d, 2, &t, &node, 5, 1).unwrap() < 1e-30);
        // off the Bethe solution the intertwined function is not invariant
        let frame = FxFrame::new(&d);
        node.xi[0] += 1e-3;
        let p = PreciseNode {
            mu: node.mu.clone(),
            xi: node.xi.iter().map(|&x| Fx::from_f64(x)).collect(),
            grad_residual: 1e-3,
        };
        let phi = SpectralPhi::new(&d, &frame, &p, 2, &t).unwrap();
        let mut worst = 0.0f64;
        for a in -3..=3 {
            for b in -3..=3 {
                let lam = Weight(vec![a, b]);
                let v = phi.eval(&lam).unwrap();
                let w = phi.eval(&reflect_affine(&d, 0, &lam, 2)).unwrap();
                worst = worst.max((v - w).to_c64().norm());
            }
        }
        assert!(worst > 1e-6, "{worst:e}");
    }

    #[test]
    fn translation_invariance_far_out() {
        use crate::affine::reflect_affine;
        use crate::nodes::solve_all;
        for (ty, pair, c) in [
            (RootType::B(2), PairKind::Twisted, 2),
            (RootType::G2, PairKind::Untwisted, 2),
        ] {
            let d = RootDatum::new(ty, pair).unwrap();
            let t = TParams {
                short: 0.3,
                long: -0.6,
            };
            let frame = FxFrame::new(&d);
            for node in solve_all(&d, c, &t).unwrap().iter().take(2) {
                let p = refine_node(&d, &frame, node, c, &t).unwrap();
                let phi = precise_phi(&d, &frame, &p, c, &t).unwrap();
                for a in -3..=3i64 {
                    let lam = Weight(vec![a, 2 - a]);
                    let v = phi.eval(&lam).to_c64();
                    for j in 0..d.rank {
                        let step = c * if pair == PairKind::Untwisted {
                            d.m_alpha(j)
                        } else {
                            1
                        };
                        for sign in [-1, 1] {
                            let mu = &lam + &d.positive_roots[j].weight.scaled(sign * step);
                            assert!(
                                (phi.eval(&mu).to_c64() - v).norm() < 1e-12,
                                "{ty:?} {lam} {mu}"
                            );
                        }
                    }
                    for j in 0..=d.rank {
                        assert!(
                            (phi.eval(&reflect_affine(&d, j, &lam, c)).to_c64() - v).norm() < 1e-12
                        );
                    }
                }
            }
        }
    }
}
