//! Finite root systems realized through exact rational Gram data.
//!
//! Every type is built from its Dynkin diagram: simple roots carry squared
//! lengths normalized so that the highest root has `<phi, phi> = 2`, and the
//! Gram matrix follows from bond multiplicities. Roots live in simple-root
//! integer coordinates, weights in fundamental-weight integer coordinates.
//!
//! Indexing convention: simple reflections are numbered `1..=n` as in the
//! affine Dynkin diagram (`0` is reserved for the affine node), while vectors
//! are stored 0-based, so `lambda.0[j - 1] = <lambda, alpha_j^vee>`.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Index, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64 as Q;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartan type of the finite root system `R_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootType {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    E(usize),
    F4,
    G2,
}

impl RootType {
    pub fn rank(&self) -> usize {
        match *self {
            RootType::A(n) | RootType::B(n) | RootType::C(n) | RootType::D(n) | RootType::E(n) => n,
            RootType::F4 => 4,
            RootType::G2 => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let (family, rank, min) = match *self {
            RootType::A(n) => ('A', n, 1),
            RootType::B(n) => ('B', n, 2),
            // C_2 is accepted as the relabeled B_2.
            RootType::C(n) => ('C', n, 2),
            RootType::D(n) => ('D', n, 4),
            RootType::E(n) => {
                if !(6..=8).contains(&n) {
                    return Err(Error::RankOutOfRange {
                        family: 'E',
                        rank: n,
                        min: 6,
                    });
                }
                return Ok(());
            }
            RootType::F4 | RootType::G2 => return Ok(()),
        };
        if rank < min {
            return Err(Error::RankOutOfRange { family, rank, min });
        }
        Ok(())
    }

    /// Squared lengths of the simple roots and the Dynkin bonds `(i, j, multiplicity)`.
    fn dynkin(&self) -> (Vec<Q>, Vec<(usize, usize, i64)>) {
        let two = Q::from_integer(2);
        let one = Q::one();
        let chain = |n: usize| {
            (0..n.saturating_sub(1))
                .map(|i| (i, i + 1, 1))
                .collect::<Vec<_>>()
        };
        match *self {
            RootType::A(n) => (vec![two; n], chain(n)),
            RootType::B(n) => {
                let mut norms = vec![two; n];
                norms[n - 1] = one;
                let mut bonds = chain(n);
                bonds[n - 2].2 = 2;
                (norms, bonds)
            }
            RootType::C(n) => {
                let mut norms = vec![one; n];
                norms[n - 1] = two;
                let mut bonds = chain(n);
                bonds[n - 2].2 = 2;
                (norms, bonds)
            }
            RootType::D(n) => {
                let mut bonds = chain(n - 1);
                bonds.push((n - 3, n - 1, 1));
                (vec![two; n], bonds)
            }
            RootType::E(n) => {
                let mut bonds = vec![(0, 2, 1), (1, 3, 1)];
                bonds.extend((2..n - 1).map(|i| (i, i + 1, 1)));
                (vec![two; n], bonds)
            }
            RootType::F4 => (
                vec![two, two, one, one],
                vec![(0, 1, 1), (1, 2, 2), (2, 3, 1)],
            ),
            RootType::G2 => (vec![Q::new(2, 3), two], vec![(0, 1, 3)]),
        }
    }

    pub fn is_simply_laced(&self) -> bool {
        matches!(self, RootType::A(_) | RootType::D(_) | RootType::E(_))
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RootType::A(n) => write!(f, "A{n}"),
            RootType::B(n) => write!(f, "B{n}"),
            RootType::C(n) => write!(f, "C{n}"),
            RootType::D(n) => write!(f, "D{n}"),
            RootType::E(n) => write!(f, "E{n}"),
            RootType::F4 => write!(f, "F4"),
            RootType::G2 => write!(f, "G2"),
        }
    }
}

impl FromStr for RootType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || Error::UnknownType(s.to_string());
        let mut chars = s.chars();
        let family = chars.next().ok_or_else(unknown)?.to_ascii_uppercase();
        let rank: usize = chars
            .as_str()
            .trim_start_matches('_')
            .parse()
            .map_err(|_| unknown())?;
        let ty = match (family, rank) {
            ('A', n) => RootType::A(n),
            ('B', n) => RootType::B(n),
            ('C', n) => RootType::C(n),
            ('D', n) => RootType::D(n),
            ('E', n) => RootType::E(n),
            ('F', 4) => RootType::F4,
            ('G', 2) => RootType::G2,
            _ => return Err(unknown()),
        };
        ty.validate()?;
        Ok(ty)
    }
}

/// Which partner `hat R_0` completes the admissible pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// `hat R_0 = u_phi R_0 = R_0`; the affine Lie algebra is untwisted.
    Untwisted,
    /// `hat R_0 = R_0^vee`; twisted affine Lie algebra for non-simply-laced `R_0`.
    Twisted,
}

impl FromStr for PairKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "untwisted" => Ok(PairKind::Untwisted),
            "twisted" => Ok(PairKind::Twisted),
            other => Err(Error::Config(format!("unknown pair kind {other:?}"))),
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairKind::Untwisted => "untwisted",
            PairKind::Twisted => "twisted",
        })
    }
}

/// Element of the weight lattice `P` in fundamental-weight coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight(pub Vec<i64>);

/// Element of `hat P`, the weight lattice of `hat R_0`, in its fundamental-weight coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoweightHat(pub Vec<i64>);

impl Weight {
    pub fn zero(n: usize) -> Self {
        Weight(vec![0; n])
    }

    pub fn fundamental(n: usize, j: usize) -> Self {
        let mut w = vec![0; n];
        w[j - 1] = 1;
        Weight(w)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    pub fn scaled(&self, k: i64) -> Weight {
        Weight(self.0.iter().map(|x| k * x).collect())
    }
}

impl Index<usize> for Weight {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, rhs: &Weight) -> Weight {
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, rhs: &Weight) -> Weight {
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A positive root of `R_0` with its derived integer data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    /// Coordinates in the simple-root basis.
    pub coeffs: Vec<i64>,
    /// Coordinates of `alpha^vee` in the simple-coroot basis.
    pub coroot: Vec<i64>,
    /// The root as a weight (fundamental-weight coordinates).
    pub weight: Weight,
    /// `<alpha, alpha>`.
    pub norm: Q,
    pub long: bool,
}

impl Root {
    pub fn height(&self) -> i64 {
        self.coeffs.iter().sum()
    }
}

/// Element of `W_0` stored as a reduced word in the simple reflections `1..=n`.
///
/// The word is read left to right as a product, `w = s_{word[0]} s_{word[1]} ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub word: Vec<usize>,
}

impl WeylElement {
    pub fn identity() -> Self {
        WeylElement { word: Vec::new() }
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }
}

/// Floating-point orthonormal frame for `V`, obtained from a Cholesky factor of the Gram matrix.
#[derive(Debug, Clone)]
pub struct Frame {
    pub simple: Vec<Vec<f64>>,
    pub fundamental: Vec<Vec<f64>>,
    pub hat_fundamental: Vec<Vec<f64>>,
    /// Positive roots, in the order of `RootDatum::positive_roots`.
    pub roots: Vec<Vec<f64>>,
    /// `hat alpha` for each positive root.
    pub hat_roots: Vec<Vec<f64>>,
    pub hat_rho: Vec<f64>,
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The finite root system with its admissible partner and derived constants.
#[derive(Debug, Clone)]
pub struct RootDatum {
    pub label: RootType,
    pub pair: PairKind,
    pub rank: usize,
    /// `cartan[i][j] = <alpha_i, alpha_j^vee>`.
    pub cartan: Vec<Vec<i64>>,
    /// `gram[i][j] = <alpha_i, alpha_j>`.
    pub gram: Vec<Vec<Q>>,
    pub positive_roots: Vec<Root>,
    /// Index of the highest root `phi`.
    pub phi: usize,
    /// Index of the highest short root `vartheta` (equal to `phi` when simply laced).
    pub theta: usize,
    /// Index of the positive root `-alpha_0`.
    pub alpha0: usize,
    /// Coefficients of `-alpha_0^vee` in the simple-coroot basis.
    pub marks: Vec<i64>,
    /// Coefficients of `phi` in the basis `hat alpha_j^vee`.
    pub hat_marks: Vec<i64>,
    /// `h = 1 - <rho, alpha_0^vee>`.
    pub coxeter_h: i64,
    /// Fundamental weights in simple-root coordinates (inverse Cartan matrix).
    pub fundamental_in_roots: Vec<Vec<Q>>,
    pub frame: Frame,
}

impl RootDatum {
    pub fn new(label: RootType, pair: PairKind) -> Result<Self> {
        label.validate()?;
        let n = label.rank();
        let (norms, bonds) = label.dynkin();
        let mut gram = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            gram[i][i] = norms[i];
        }
        for &(i, j, k) in &bonds {
            let m = if norms[i] < norms[j] {
                norms[i]
            } else {
                norms[j]
            };
            let g = -m * Q::from_integer(k) / Q::from_integer(2);
            gram[i][j] = g;
            gram[j][i] = g;
        }
        let cartan: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = Q::from_integer(2) * gram[i][j] / gram[j][j];
                        debug_assert!(v.is_integer());
                        v.to_integer()
                    })
                    .collect()
            })
            .collect();

        let fundamental_in_roots = invert_integer_matrix(&cartan);
        let coeff_lists = generate_positive_roots(&cartan);
        let positive_roots: Vec<Root> = coeff_lists
            .into_iter()
            .map(|coeffs| {
                let norm = quad(&gram, &coeffs);
                let coroot = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        let v = Q::from_integer(k) * norms[i] / norm;
                        debug_assert!(v.is_integer());
                        v.to_integer()
                    })
                    .collect();
                let weight = Weight(
                    (0..n)
                        .map(|j| {
                            coeffs
                                .iter()
                                .enumerate()
                                .map(|(i, &k)| k * cartan[i][j])
                                .sum()
                        })
                        .collect(),
                );
                Root {
                    coeffs,
                    coroot,
                    weight,
                    norm,
                    long: norm == Q::from_integer(2),
                }
            })
            .collect();

        let highest = |filter: &dyn Fn(&Root) -> bool| {
            positive_roots
                .iter()
                .enumerate()
                .filter(|(_, r)| filter(r))
                .max_by_key(|(_, r)| r.height())
                .map(|(i, _)| i)
                .expect("root system is nonempty")
        };
        let phi = highest(&|_| true);
        let theta = if label.is_simply_laced() {
            phi
        } else {
            highest(&|r: &Root| !r.long)
        };
        let alpha0 = match pair {
            PairKind::Untwisted => phi,
            PairKind::Twisted => theta,
        };
        let marks = positive_roots[alpha0].coroot.clone();
        let hat_marks = (0..n)
            .map(|j| {
                let k = positive_roots[phi].coeffs[j];
                match pair {
                    PairKind::Untwisted => {
                        (Q::from_integer(k) * norms[j] / Q::from_integer(2)).to_integer()
                    }
                    PairKind::Twisted => k,
                }
            })
            .collect();
        let coxeter_h = 1 + marks.iter().sum::<i64>();

        let mut datum = RootDatum {
            label,
            pair,
            rank: n,
            cartan,
            gram,
            positive_roots,
            phi,
            theta,
            alpha0,
            marks,
            hat_marks,
            coxeter_h,
            fundamental_in_roots,
            frame: Frame {
                simple: vec![],
                fundamental: vec![],
                hat_fundamental: vec![],
                roots: vec![],
                hat_roots: vec![],
                hat_rho: vec![],
            },
        };
        datum.frame = datum.build_frame();
        Ok(datum)
    }

    fn build_frame(&self) -> Frame {
        let n = self.rank;
        // Cholesky factor L with gram = L L^T; row i of L realizes alpha_i.
        let g: Vec<Vec<f64>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(q_to_f64).collect())
            .collect();
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    l[i][j] = (g[i][i] - s).sqrt();
                } else {
                    l[i][j] = (g[i][j] - s) / l[j][j];
                }
            }
        }
        let combine = |coeffs: &[f64]| -> Vec<f64> {
            let mut v = vec![0.0; n];
            for (i, c) in coeffs.iter().enumerate() {
                for k in 0..n {
                    v[k] += c * l[i][k];
                }
            }
            v
        };
        let fundamental: Vec<Vec<f64>> = self
            .fundamental_in_roots
            .iter()
            .map(|row| combine(&row.iter().map(q_to_f64).collect::<Vec<_>>()))
            .collect();
        let hat_fundamental: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let s = q_to_f64(&self.hat_fundamental_scale(j));
                fundamental[j].iter().map(|x| x * s).collect()
            })
            .collect();
        let roots: Vec<Vec<f64>> = self
            .positive_roots
            .iter()
            .map(|r| combine(&r.coeffs.iter().map(|&k| k as f64).collect::<Vec<_>>()))
            .collect();
        let hat_roots = roots
            .iter()
            .zip(&self.positive_roots)
            .map(|(v, r)| {
                let s = q_to_f64(&self.hat_scale(r));
                v.iter().map(|x| x * s).collect()
            })
            .collect();
        let mut hat_rho = vec![0.0; n];
        for w in &hat_fundamental {
            for k in 0..n {
                hat_rho[k] += w[k];
            }
        }
        Frame {
            simple: l,
            fundamental,
            hat_fundamental,
            roots,
            hat_roots,
            hat_rho,
        }
    }

    pub fn is_simply_laced(&self) -> bool {
        self.label.is_simply_laced()
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn simple_root(&self, j: usize) -> &Root {
        &self.positive_roots[j - 1]
    }

    /// Ordinary Coxeter number of `R_0` (one more than the height of `phi`).
    pub fn finite_coxeter_number(&self) -> i64 {
        self.positive_roots[self.phi].height() + 1
    }

    /// `hat alpha = s * alpha` for the positive root `alpha`.
    pub fn hat_scale(&self, root: &Root) -> Q {
        match self.pair {
            PairKind::Untwisted => Q::one(),
            PairKind::Twisted => Q::from_integer(2) / root.norm,
        }
    }

    /// `hat omega_j = s * omega_j`.
    pub fn hat_fundamental_scale(&self, j: usize) -> Q {
        match self.pair {
            PairKind::Untwisted => Q::one(),
            PairKind::Twisted => Q::from_integer(2) / self.gram[j][j],
        }
    }

    /// `m_alpha = 2 / <alpha, hat alpha>`.
    pub fn m_alpha(&self, idx: usize) -> i64 {
        let r = &self.positive_roots[idx];
        match self.pair {
            PairKind::Untwisted => (Q::from_integer(2) / r.norm).to_integer(),
            PairKind::Twisted => 1,
        }
    }

    /// `m_vartheta`, the only multiplicity other than 1.
    pub fn m_theta(&self) -> i64 {
        self.m_alpha(self.theta)
    }

    /// `<phi, phi> / <vartheta, vartheta>`.
    pub fn length_ratio(&self) -> i64 {
        (Q::from_integer(2) / self.positive_roots[self.theta].norm).to_integer()
    }

    pub fn is_long(&self, idx: usize) -> bool {
        self.positive_roots[idx].long
    }

    /// Whether `alpha` lies in `W_0 vartheta`: the short roots, or every root when simply laced.
    pub fn in_theta_orbit(&self, idx: usize) -> bool {
        self.is_simply_laced() || !self.positive_roots[idx].long
    }

    pub fn rho(&self) -> Weight {
        Weight(vec![1; self.rank])
    }

    /// `<lambda, alpha^vee>` for the positive root with index `idx`.
    pub fn pair_coroot(&self, lambda: &Weight, idx: usize) -> i64 {
        lambda
            .0
            .iter()
            .zip(&self.positive_roots[idx].coroot)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `<lambda, hat alpha>` for the positive root with index `idx` (rational in general).
    pub fn pair_hat(&self, lambda: &Weight, idx: usize) -> Q {
        let r = &self.positive_roots[idx];
        let base = Q::from_integer(self.pair_coroot(lambda, idx));
        match self.pair {
            PairKind::Untwisted => base * r.norm / Q::from_integer(2),
            PairKind::Twisted => base,
        }
    }

    /// `<mu, alpha>` for `mu` in `hat P` and the positive root `alpha`.
    pub fn pair_hat_weight_root(&self, mu: &CoweightHat, idx: usize) -> Q {
        let r = &self.positive_roots[idx];
        let mut s = Q::zero();
        for i in 0..self.rank {
            // alpha_i = g_i hat alpha_i^vee
            let g = match self.pair {
                PairKind::Untwisted => self.gram[i][i] / Q::from_integer(2),
                PairKind::Twisted => Q::one(),
            };
            s += Q::from_integer(r.coeffs[i] * mu.0[i]) * g;
        }
        s
    }

    /// Exact inner product of vectors given in simple-root coordinates.
    pub fn inner(&self, x: &[Q], y: &[Q]) -> Q {
        let mut s = Q::zero();
        for i in 0..self.rank {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                s += x[i] * self.gram[i][j] * y[j];
            }
        }
        s
    }

    /// A weight expressed in simple-root coordinates.
    pub fn weight_to_roots(&self, lambda: &Weight) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.rank];
        for (j, &c) in lambda.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for i in 0..self.rank {
                out[i] += Q::from_integer(c) * self.fundamental_in_roots[j][i];
            }
        }
        out
    }

    /// Simple reflection `s_j`, `1 <= j <= n`, acting on a weight.
    pub fn reflect_simple(&self, j: usize, lambda: &Weight) -> Weight {
        let k = lambda.0[j - 1];
        if k == 0 {
            return lambda.clone();
        }
        let a = &self.cartan[j - 1];
        Weight(lambda.0.iter().zip(a).map(|(x, y)| x - k * y).collect())
    }

    /// Reflection in the positive root `idx` acting on a weight.
    pub fn reflect(&self, idx: usize, lambda: &Weight) -> Weight {
        let k = self.pair_coroot(lambda, idx);
        let a = &self.positive_roots[idx].weight;
        Weight(lambda.0.iter().zip(&a.0).map(|(x, y)| x - k * y).collect())
    }

    /// Simple reflection acting on a vector in simple-root coordinates.
    pub fn reflect_simple_roots(&self, j: usize, x: &[i64]) -> Vec<i64> {
        let k: i64 = x
            .iter()
            .enumerate()
            .map(|(i, &c)| c * self.cartan[i][j - 1])
            .sum();
        let mut out = x.to_vec();
        out[j - 1] -= k;
        out
    }

    /// `w lambda` for a reduced word read as a product.
    pub fn act(&self, w: &WeylElement, lambda: &Weight) -> Weight {
        w.word
            .iter()
            .rev()
            .fold(lambda.clone(), |acc, &j| self.reflect_simple(j, &acc))
    }

    /// `w alpha` for a vector in simple-root coordinates.
    pub fn act_roots(&self, w: &WeylElement, x: &[i64]) -> Vec<i64> {
        w.word
            .iter()
            .rev()
            .fold(x.to_vec(), |acc, &j| self.reflect_simple_roots(j, &acc))
    }

    /// Index of the positive root `±x`, with the sign, when `x` (simple-root coordinates) is a root.
    pub fn find_root(&self, x: &[i64]) -> Option<(usize, i64)> {
        let neg: Vec<i64> = x.iter().map(|v| -v).collect();
        self.positive_roots
            .iter()
            .position(|r| r.coeffs == x)
            .map(|i| (i, 1))
            .or_else(|| {
                self.positive_roots
                    .iter()
                    .position(|r| r.coeffs == neg)
                    .map(|i| (i, -1))
            })
    }

    /// Index of the positive root `±alpha` whose weight is `w`.
    pub fn find_root_weight(&self, w: &Weight) -> Option<(usize, i64)> {
        let neg = -w;
        self.positive_roots
            .iter()
            .position(|r| &r.weight == w)
            .map(|i| (i, 1))
            .or_else(|| {
                self.positive_roots
                    .iter()
                    .position(|r| r.weight == neg)
                    .map(|i| (i, -1))
            })
    }

    /// Full `W_0`-orbit of a dominant weight, by breadth-first simple reflections.
    pub fn weyl_orbit(&self, lambda: &Weight) -> Result<Vec<Weight>> {
        if !lambda.is_dominant() {
            return Err(Error::NotDominant(lambda.0.clone()));
        }
        Ok(self.orbit_under(&(1..=self.rank).collect::<Vec<_>>(), lambda))
    }

    /// Orbit of `start` under the subgroup generated by the given simple reflections.
    pub fn orbit_under(&self, gens: &[usize], start: &Weight) -> Vec<Weight> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start.clone());
        while let Some(x) = queue.pop_front() {
            for &j in gens {
                let y = self.reflect_simple(j, &x);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
            out.push(x);
        }
        out
    }

    /// All elements of `W_0`, each with its lexicographically smallest reduced word,
    /// ordered by length. Refuses groups larger than `cap`.
    pub fn weyl_group(&self, cap: usize) -> Result<Vec<WeylElement>> {
        let mut seen = HashSet::new();
        let mut images = Vec::new();
        let mut queue = VecDeque::new();
        let rho = self.rho();
        seen.insert(rho.clone());
        queue.push_back(rho);
        while let Some(x) = queue.pop_front() {
            if images.len() >= cap {
                return Err(Error::GroupTooLarge(cap));
            }
            for j in 1..=self.rank {
                if x.0[j - 1] > 0 {
                    let y = self.reflect_simple(j, &x);
                    if seen.insert(y.clone()) {
                        queue.push_back(y);
                    }
                }
            }
            images.push(x);
        }
        Ok(images.iter().map(|x| self.element_from_image(x)).collect())
    }

    /// The Weyl element `w` with `w rho = image`, with its lexicographically smallest reduced word.
    pub fn element_from_image(&self, image: &Weight) -> WeylElement {
        let mut x = image.clone();
        let mut word = Vec::new();
        while let Some(j) = x.0.iter().position(|&v| v < 0) {
            word.push(j + 1);
            x = self.reflect_simple(j + 1, &x);
        }
        WeylElement { word }
    }

    /// Checks `sum_{alpha > 0} t_alpha <beta, alpha^vee> <alpha, beta^vee> = (2/n) sum_{alpha} t_alpha`
    /// exactly for every positive root `beta`, with `t` constant on root lengths.
    pub fn schur_identity_holds(&self, t_short: Q, t_long: Q) -> bool {
        let t = |i: usize| {
            if self.positive_roots[i].long {
                t_long
            } else {
                t_short
            }
        };
        let total: Q = (0..self.num_positive_roots())
            .map(|i| t(i) * Q::from_integer(2))
            .sum();
        let rhs = Q::from_integer(2) / Q::from_integer(self.rank as i64) * total;
        (0..self.num_positive_roots()).all(|b| {
            let bw = &self.positive_roots[b].weight;
            let lhs: Q = (0..self.num_positive_roots())
                .map(|a| {
                    t(a) * Q::from_integer(
                        self.pair_coroot(bw, a)
                            * self.pair_coroot(&self.positive_roots[a].weight, b),
                    )
                })
                .sum();
            lhs == rhs
        })
    }

    /// Longest element of `W_0`.
    pub fn longest_element(&self) -> WeylElement {
        self.element_from_image(&(-&self.rho()))
    }

    /// Fundamental weights `omega_j` with `<omega_j, alpha^vee> <= 1` for every positive root.
    pub fn minuscule_weights(&self) -> Vec<Weight> {
        (1..=self.rank)
            .filter(|&j| self.positive_roots.iter().all(|r| r.coroot[j - 1] <= 1))
            .map(|j| Weight::fundamental(self.rank, j))
            .collect()
    }

    /// The quasi-minuscule weight `vartheta`.
    pub fn quasi_minuscule_weight(&self) -> Weight {
        self.positive_roots[self.theta].weight.clone()
    }

    pub fn is_minuscule(&self, w: &Weight) -> bool {
        w.is_dominant()
            && self
                .positive_roots
                .iter()
                .enumerate()
                .all(|(i, _)| self.pair_coroot(w, i) <= 1)
    }

    pub fn is_quasi_minuscule(&self, w: &Weight) -> bool {
        *w == self.quasi_minuscule_weight()
    }

    /// `<lambda, alpha_0^vee>`, the finite part of the affine simple root `a_0`.
    pub fn pair_alpha0_coroot(&self, lambda: &Weight) -> i64 {
        -self.pair_coroot(lambda, self.alpha0)
    }

    /// The finite root `alpha_j` for `0 <= j <= n` as a weight (`alpha_0` for `j = 0`).
    pub fn affine_simple_gradient(&self, j: usize) -> Weight {
        if j == 0 {
            -&self.positive_roots[self.alpha0].weight
        } else {
            self.positive_roots[j - 1].weight.clone()
        }
    }

    /// Whether the affine simple root `a_j` carries the long or short parameter.
    pub fn affine_simple_is_long(&self, j: usize) -> bool {
        if j == 0 {
            self.positive_roots[self.alpha0].long
        } else {
            self.positive_roots[j - 1].long
        }
    }

    /// `<alpha_j, alpha_k^vee> <alpha_k, alpha_j^vee>` for the gradients of two affine simple roots.
    pub fn affine_bond(&self, j: usize, k: usize) -> i64 {
        let gj = self.affine_simple_gradient(j);
        let gk = self.affine_simple_gradient(k);
        let idx = |g: &Weight| self.find_root_weight(g).expect("simple gradient is a root");
        let (ij, sj) = idx(&gj);
        let (ik, sk) = idx(&gk);
        sk * self.pair_coroot(&gj, ik) * sj * self.pair_coroot(&gk, ij)
    }

    /// Coxeter exponent `m_jk` of the affine Weyl group, `None` for the infinite bond of `A_1`.
    pub fn coxeter_exponent(&self, j: usize, k: usize) -> Option<usize> {
        if j == k {
            return Some(1);
        }
        match self.affine_bond(j, k) {
            0 => Some(2),
            1 => Some(3),
            2 => Some(4),
            3 => Some(6),
            _ => None,
        }
    }
}

pub(crate) fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn quad(gram: &[Vec<Q>], x: &[i64]) -> Q {
    let mut s = Q::zero();
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += Q::from_integer(x[i] * x[j]) * gram[i][j];
        }
    }
    s
}

/// Positive roots by reflection closure of the simple roots; simple roots first, then by height.
fn generate_positive_roots(cartan: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = cartan.len();
    let simple: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            v[i] = 1;
            v
        })
        .collect();
    let mut seen: HashSet<Vec<i64>> = simple.iter().cloned().collect();
    let mut queue: VecDeque<Vec<i64>> = simple.iter().cloned().collect();
    let mut others = Vec::new();
    while let Some(beta) = queue.pop_front() {
        for i in 0..n {
            let k: i64 = beta
                .iter()
                .enumerate()
                .map(|(m, &c)| c * cartan[m][i])
                .sum();
            if k == 0 {
                continue;
            }
            let mut gamma = beta.clone();
            gamma[i] -= k;
            if gamma.iter().all(|&c| c >= 0)
                && gamma.iter().any(|&c| c > 0)
                && seen.insert(gamma.clone())
            {
                others.push(gamma.clone());
                queue.push_back(gamma);
            }
        }
    }
    others.sort_by(|a, b| {
        let ha: i64 = a.iter().sum();
        let hb: i64 = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    simple.into_iter().chain(others).collect()
}

/// Exact inverse of a nonsingular integer matrix.
fn invert_integer_matrix(m: &[Vec<i64>]) -> Vec<Vec<Q>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Q> = row.iter().map(|&x| Q::from_integer(x)).collect();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("Cartan matrix is nonsingular");
        a.swap(col, pivot);
        let p = a[col][col];
        for x in a[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}
